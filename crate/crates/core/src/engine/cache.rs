use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::algebra::StochasticSystem;
use crate::certificate::{Certificate, SynthesisOptions, TaskRegions};

#[derive(Serialize)]
struct Fingerprint<'a> {
    system: &'a StochasticSystem,
    x0: &'a crate::algebra::Region,
    x1: &'a crate::algebra::Region,
    domain: &'a crate::algebra::BasicSet,
    horizon: usize,
    options: &'a SynthesisOptions,
}

/// Content address of one synthesis: dynamics, regions, horizon and
/// synthesis options.
pub fn task_fingerprint(sys: &StochasticSystem, regions: &TaskRegions, horizon: usize, opts: &SynthesisOptions) -> String {
    let fp = Fingerprint {
        system: sys,
        x0: &regions.x0,
        x1: &regions.x1,
        domain: &regions.domain,
        horizon,
        options: opts,
    };
    let bytes = serde_json::to_vec(&fp).expect("fingerprint serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// Certificates keyed by fingerprint, in memory and optionally mirrored to
/// one JSON file per entry in a directory.
#[derive(Debug, Default)]
pub struct CertificateCache {
    entries: RwLock<HashMap<String, Certificate>>,
    dir: Option<PathBuf>,
}

impl CertificateCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: impl AsRef<Path>) -> Result<Self, String> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        Ok(CertificateCache { entries: RwLock::default(), dir: Some(dir) })
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    pub fn get(&self, key: &str) -> Option<Certificate> {
        if let Some(c) = self.entries.read().expect("cache lock").get(key) {
            return Some(c.clone());
        }
        let text = std::fs::read_to_string(self.path(key)?).ok()?;
        let cert: Certificate = serde_json::from_str(&text).ok()?;
        self.entries.write().expect("cache lock").insert(key.to_string(), cert.clone());
        Some(cert)
    }

    pub fn insert(&self, key: &str, cert: &Certificate) -> Result<(), String> {
        self.entries.write().expect("cache lock").insert(key.to_string(), cert.clone());
        if let Some(p) = self.path(key) {
            std::fs::write(&p, cert.to_json()).map_err(|e| format!("{}: {e}", p.display()))?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

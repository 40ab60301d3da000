use std::fmt::Write as _;

use super::{BlockKind, SdpInstance};

/// Renders `inst` in SDPA sparse format.
///
/// SDPA solves `min c'x s.t. sum_i x_i F_i - F_0 ⪰ 0`. With `c = b`,
/// `F_i = A_i` and `F_0 = -C` this is our dual under `x = -y`, so SDPA's
/// optimal value equals minus ours.
pub fn write_sdpa(inst: &SdpInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\"exported block SDP: {} constraints\"", inst.constraints.len());
    let _ = writeln!(out, "{}", inst.constraints.len());
    let _ = writeln!(out, "{}", inst.blocks.len());
    let sizes: Vec<String> = inst
        .blocks
        .iter()
        .map(|b| match b.kind {
            BlockKind::Psd => b.size.to_string(),
            BlockKind::Diag => format!("-{}", b.size),
        })
        .collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let rhs: Vec<String> = inst.rhs.iter().map(|b| fmt(*b)).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));
    for e in &inst.objective {
        let _ = writeln!(out, "0 {} {} {} {}", e.block + 1, e.row + 1, e.col + 1, fmt(-e.value));
    }
    for (i, cons) in inst.constraints.iter().enumerate() {
        for e in cons {
            let _ = writeln!(out, "{} {} {} {} {}", i + 1, e.block + 1, e.row + 1, e.col + 1, fmt(e.value));
        }
    }
    out
}

fn fmt(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.17e}")
    }
}

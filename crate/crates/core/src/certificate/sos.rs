//! Barrier conditions as SOS constraints and their Gram-matrix SDP.

use std::collections::{BTreeMap, HashMap};

use crate::algebra::{monomials_up_to, BasicSet, Monomial, Polynomial, Region, StochasticSystem};
use crate::sdp::{BlockKind, SdpInstance, SymEntry};

use super::CertificateError;

/// Polynomial whose coefficients are affine in the SDP variables:
/// per monomial, a constant plus a list of weighted matrix entries.
#[derive(Debug, Clone, Default)]
pub struct LinPoly {
    pub terms: BTreeMap<Monomial, (f64, Vec<SymEntry>)>,
}

impl LinPoly {
    pub fn add_constant(&mut self, p: &Polynomial, scale: f64) {
        for (m, c) in p.terms() {
            self.terms.entry(m.clone()).or_default().0 += scale * c;
        }
    }

    /// Adds `entry * p`, where the entry's value weights `p`.
    pub fn add_scaled(&mut self, entry: SymEntry, p: &Polynomial) {
        for (m, c) in p.terms() {
            let v = entry.value * c;
            if v != 0.0 {
                self.terms.entry(m.clone()).or_default().1.push(SymEntry { value: v, ..entry });
            }
        }
    }

    /// Largest total degree among monomials with a constant or a decision term.
    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .filter(|(_, (c, e))| *c != 0.0 || !e.is_empty())
            .map(|(m, _)| m.degree())
            .max()
            .unwrap_or(0)
    }
}

/// `x = center + scale * u`, applied to every state coordinate.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AffineMap {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

impl AffineMap {
    pub fn identity(n: usize) -> Self {
        AffineMap { center: vec![0.0; n], scale: vec![1.0; n] }
    }

    /// Centres and scales on the bounding box of `x0 ∪ x1`, coordinate by
    /// coordinate; unbounded coordinates are left alone.
    pub fn fit(x0: &Region, x1: &Region, n: usize) -> Self {
        let hull = Region::union([x0.clone(), x1.clone()]).bounding_box(n);
        let mut map = Self::identity(n);
        if let Some(bx) = hull {
            for (i, (lo, hi)) in bx.into_iter().enumerate() {
                if lo.is_finite() && hi.is_finite() && hi > lo {
                    map.center[i] = 0.5 * (lo + hi);
                    map.scale[i] = 0.5 * (hi - lo);
                }
            }
        }
        map
    }

    pub fn is_identity(&self) -> bool {
        self.center.iter().all(|&c| c == 0.0) && self.scale.iter().all(|&s| s == 1.0)
    }

    /// `x_i` as polynomials in `u` over `total` variables; variables past
    /// the state block map to themselves.
    fn forward(&self, total: usize) -> Vec<Polynomial> {
        (0..total)
            .map(|i| match self.center.get(i) {
                Some(&c) => &Polynomial::constant(total, c) + &Polynomial::var(total, i).scale(self.scale[i]),
                None => Polynomial::var(total, i),
            })
            .collect()
    }

    /// `u_i = (x_i - c_i) / s_i`.
    fn inverse(&self) -> Vec<Polynomial> {
        let n = self.center.len();
        (0..n)
            .map(|i| {
                &Polynomial::var(n, i).scale(1.0 / self.scale[i])
                    - &Polynomial::constant(n, self.center[i] / self.scale[i])
            })
            .collect()
    }

    pub fn to_scaled(&self, p: &Polynomial) -> Polynomial {
        p.compose(&self.forward(p.nvars())).expect("arity checked by construction")
    }

    pub fn to_original(&self, p: &Polynomial) -> Polynomial {
        p.compose(&self.inverse()).expect("arity checked by construction")
    }

    pub fn scale_set(&self, s: &BasicSet) -> BasicSet {
        BasicSet::new(s.ineqs.iter().map(|g| self.to_scaled(g)).collect())
    }

    pub fn scale_region(&self, r: &Region) -> Region {
        Region::new(r.disjuncts.iter().map(|d| self.scale_set(d)).collect(), r.bounded)
    }

    /// Dynamics in scaled coordinates: `u+ = (f(c + s u, w) - c) / s`.
    pub fn scale_system(&self, sys: &StochasticSystem) -> StochasticSystem {
        let total = sys.state_dim() + sys.noise_dim();
        let fwd = self.forward(total);
        let dynamics = sys
            .dynamics
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let g = f.compose(&fwd).expect("arity checked by construction");
                (&g - &Polynomial::constant(total, self.center[i])).scale(1.0 / self.scale[i])
            })
            .collect();
        StochasticSystem {
            state_names: sys.state_names.clone(),
            noise_names: sys.noise_names.clone(),
            dynamics,
            noise: sys.noise.clone(),
        }
    }
}

/// One SOS constraint `expr(x) = z' S z`, `S ⪰ 0`.
#[derive(Debug, Clone)]
pub struct SosExpr {
    pub name: String,
    pub poly: LinPoly,
    pub multiplier_degree: u32,
}

/// Decision variables (as SDP blocks) and the SOS constraints of one task,
/// in scaled coordinates.
#[derive(Debug, Clone)]
pub struct SosProgram {
    pub nvars: usize,
    pub horizon: usize,
    pub blocks: SdpInstance,
    pub barrier_block: usize,
    pub barrier_basis: Vec<Monomial>,
    /// Diagonal block holding `[gamma, c, 1 - gamma, constant multipliers..]`.
    pub lp_block: usize,
    pub expressions: Vec<SosExpr>,
    pub transform: AffineMap,
    pub expected_degree: u32,
}

pub const GAMMA: usize = 0;
pub const RATE: usize = 1;
const GAMMA_SLACK: usize = 2;

impl SosProgram {
    /// Scalar decision coefficients in the template (Gram entries and
    /// non-negative scalars), excluding expression Gram matrices.
    pub fn num_coefficients(&self) -> usize {
        self.blocks
            .blocks
            .iter()
            .map(|b| match b.kind {
                BlockKind::Psd => b.size * (b.size + 1) / 2,
                BlockKind::Diag => b.size,
            })
            .sum()
    }
}

fn even_floor(d: i64) -> i64 {
    d - d.rem_euclid(2)
}

fn even_ceil(d: u32) -> u32 {
    d + d % 2
}

struct Builder {
    n: usize,
    blocks: SdpInstance,
    lp_block: usize,
    lp_size: usize,
}

impl Builder {
    fn lp_var(&mut self) -> usize {
        self.lp_size += 1;
        self.lp_size - 1
    }

    /// Appends `-sum_h lambda_h h` for the generators of `set` to `expr`,
    /// with SOS multipliers sized so every product has degree <= `target`.
    /// Returns the largest multiplier degree used.
    fn subtract_multipliers(&mut self, expr: &mut LinPoly, set: &BasicSet, target: u32, products: bool, tag: &str) -> u32 {
        let mut gens: Vec<Polynomial> = set.ineqs.clone();
        if products {
            for i in 0..set.ineqs.len() {
                for j in i + 1..set.ineqs.len() {
                    let p = &set.ineqs[i] * &set.ineqs[j];
                    if p.degree() <= target {
                        gens.push(p);
                    }
                }
            }
        }
        let mut max_deg = 0;
        for (k, h) in gens.iter().enumerate() {
            let dm = even_floor(target as i64 - h.degree() as i64);
            if dm < 0 {
                continue;
            }
            let dm = dm as u32;
            max_deg = max_deg.max(dm);
            if dm == 0 {
                let v = self.lp_var();
                expr.add_scaled(SymEntry::new(self.lp_block, v, v, -1.0), h);
            } else {
                let basis = monomials_up_to(self.n, dm / 2);
                let blk = self.blocks.add_block(basis.len(), BlockKind::Psd, format!("{tag}.lambda{k}"));
                for j in 0..basis.len() {
                    for l in j..basis.len() {
                        let prod = Polynomial::monomial(basis[j].mul(&basis[l]), 1.0);
                        expr.add_scaled(SymEntry::new(blk, j, l, -1.0), &(&prod * h));
                    }
                }
            }
        }
        max_deg
    }
}

/// Builds the three families of SOS constraints for reaching `x1` from
/// `x0` within `horizon` steps while staying in `domain`:
///
/// ```text
/// -B - lambda0' g0 + gamma           (one per disjunct of x0)
///  B - lambda1' g1 - 1               (one per disjunct of x1)
/// -E[B(f(x, w))] + B - lambda' g + c
/// ```
///
/// with `B` SOS of degree `barrier_degree`.
#[allow(clippy::too_many_arguments)]
pub fn assemble_sos(
    sys: &StochasticSystem,
    x0: &Region,
    x1: &Region,
    domain: &BasicSet,
    horizon: usize,
    barrier_degree: u32,
    multiplier_degree: u32,
    transform: &AffineMap,
    products: bool,
) -> Result<SosProgram, CertificateError> {
    if barrier_degree == 0 || barrier_degree % 2 == 1 {
        return Err(CertificateError::Degree(format!(
            "barrier degree must be even and at least 2, got {barrier_degree}"
        )));
    }
    let n = sys.state_dim();
    let sys_u = transform.scale_system(sys);
    let x0_u = transform.scale_region(x0);
    let x1_u = transform.scale_region(x1);
    let dom_u = transform.scale_set(domain);

    let mut blocks = SdpInstance::default();
    let barrier_basis = monomials_up_to(n, barrier_degree / 2);
    let barrier_block = blocks.add_block(barrier_basis.len(), BlockKind::Psd, "B");
    let lp_block = blocks.add_block(0, BlockKind::Diag, "scalars");
    let mut b = Builder { n, blocks, lp_block, lp_size: 3 };

    // B, and B - E[B(f)] term by term over Gram entries
    let mut barrier = LinPoly::default();
    let mut drift = LinPoly::default();
    let mut expected_cache: HashMap<Monomial, Polynomial> = HashMap::new();
    let mut expected_degree = 0;
    for j in 0..barrier_basis.len() {
        for l in j..barrier_basis.len() {
            let m = barrier_basis[j].mul(&barrier_basis[l]);
            let mono = Polynomial::monomial(m.clone(), 1.0);
            let e = match expected_cache.get(&m) {
                Some(e) => e.clone(),
                None => {
                    let e = sys_u.expected_next(&mono)?;
                    expected_cache.insert(m, e.clone());
                    e
                }
            };
            expected_degree = expected_degree.max(e.degree());
            let entry = SymEntry::new(barrier_block, j, l, 1.0);
            barrier.add_scaled(entry, &mono);
            drift.add_scaled(entry, &(&mono - &e));
        }
    }

    let one = Polynomial::constant(n, 1.0);
    let gamma = SymEntry::new(lp_block, GAMMA, GAMMA, 1.0);
    let rate = SymEntry::new(lp_block, RATE, RATE, 1.0);
    let base_target = even_ceil(barrier_degree.max(multiplier_degree));
    let mut expressions = Vec::new();

    for (k, d) in x0_u.disjuncts.iter().enumerate() {
        let mut e = LinPoly::default();
        for (m, (c, ents)) in &barrier.terms {
            let t = e.terms.entry(m.clone()).or_default();
            t.0 -= c;
            t.1.extend(ents.iter().map(|s| SymEntry { value: -s.value, ..*s }));
        }
        e.add_scaled(gamma, &one);
        let md = b.subtract_multipliers(&mut e, d, base_target, products, &format!("init{k}"));
        expressions.push(SosExpr { name: format!("initial[{k}]"), poly: e, multiplier_degree: md });
    }
    for (k, d) in x1_u.disjuncts.iter().enumerate() {
        let mut e = barrier.clone();
        e.add_constant(&one, -1.0);
        let md = b.subtract_multipliers(&mut e, d, base_target, products, &format!("target{k}"));
        expressions.push(SosExpr { name: format!("target[{k}]"), poly: e, multiplier_degree: md });
    }
    let mut e = drift;
    e.add_scaled(rate, &one);
    let drift_target = even_ceil(expected_degree.max(barrier_degree).max(multiplier_degree));
    let md = b.subtract_multipliers(&mut e, &dom_u, drift_target, products, "domain");
    expressions.push(SosExpr { name: "martingale".into(), poly: e, multiplier_degree: md });

    let mut blocks = b.blocks;
    blocks.blocks[lp_block].size = b.lp_size;
    Ok(SosProgram {
        nvars: n,
        horizon,
        blocks,
        barrier_block,
        barrier_basis,
        lp_block,
        expressions,
        transform: transform.clone(),
        expected_degree,
    })
}

/// Compiled SDP with the Gram block and basis of each SOS expression.
#[derive(Debug, Clone)]
pub struct CompiledSdp {
    pub instance: SdpInstance,
    pub expression_blocks: Vec<(usize, Vec<Monomial>)>,
    pub expression_degrees: Vec<u32>,
}

/// Matches every SOS expression coefficient-wise against `z' S z`, adds
/// `gamma <= 1`, and sets the objective `gamma + horizon * c`. With
/// `bound_cap = Some(beta)` the objective is dropped and
/// `gamma + horizon * c <= beta` is imposed instead.
pub fn compile_sdp(prog: &SosProgram, bound_cap: Option<f64>) -> CompiledSdp {
    let mut inst = prog.blocks.clone();
    let lp = prog.lp_block;
    let t = prog.horizon as f64;
    let cap_slack = bound_cap.map(|_| {
        inst.blocks[lp].size += 1;
        inst.blocks[lp].size - 1
    });
    if bound_cap.is_none() {
        inst.objective.push(SymEntry::new(lp, GAMMA, GAMMA, 1.0));
        inst.objective.push(SymEntry::new(lp, RATE, RATE, t));
    }
    inst.add_constraint(
        vec![SymEntry::new(lp, GAMMA, GAMMA, 1.0), SymEntry::new(lp, GAMMA_SLACK, GAMMA_SLACK, 1.0)],
        1.0,
    );
    if let (Some(beta), Some(s)) = (bound_cap, cap_slack) {
        inst.add_constraint(
            vec![
                SymEntry::new(lp, GAMMA, GAMMA, 1.0),
                SymEntry::new(lp, RATE, RATE, t),
                SymEntry::new(lp, s, s, 1.0),
            ],
            beta,
        );
    }
    let mut expression_blocks = Vec::new();
    let mut expression_degrees = Vec::new();
    for e in &prog.expressions {
        let deg = e.poly.degree();
        expression_degrees.push(deg);
        let basis = monomials_up_to(prog.nvars, deg.div_ceil(2));
        let blk = inst.add_block(basis.len(), BlockKind::Psd, format!("sos:{}", e.name));
        let mut rows: BTreeMap<Monomial, (f64, Vec<SymEntry>)> = e.poly.terms.clone();
        for j in 0..basis.len() {
            for l in j..basis.len() {
                rows.entry(basis[j].mul(&basis[l])).or_default().1.push(SymEntry::new(blk, j, l, -1.0));
            }
        }
        for (_, (c, ents)) in rows {
            inst.add_constraint(ents, -c);
        }
        expression_blocks.push((blk, basis));
    }
    CompiledSdp { instance: inst, expression_blocks, expression_degrees }
}

/// `sum_{j,l} G_jl z_j z_l` for a symmetric Gram matrix.
pub fn gram_polynomial(basis: &[Monomial], gram: &nalgebra::DMatrix<f64>, nvars: usize) -> Polynomial {
    let mut p = Polynomial::zero(nvars);
    for j in 0..basis.len() {
        for l in 0..basis.len() {
            let v = gram[(j, l)];
            if v != 0.0 {
                p.add_term(basis[j].mul(&basis[l]), v);
            }
        }
    }
    p
}

/// Feasibility SDP for "`p` is a sum of squares": one Gram block over the
/// monomials up to half the degree of `p`, matched coefficient-wise.
pub fn sos_feasibility(p: &Polynomial) -> (SdpInstance, Vec<Monomial>) {
    let basis = monomials_up_to(p.nvars(), p.degree().div_ceil(2));
    let mut inst = SdpInstance::default();
    let blk = inst.add_block(basis.len(), BlockKind::Psd, "gram");
    let mut rows: BTreeMap<Monomial, Vec<SymEntry>> = BTreeMap::new();
    for (m, _) in p.terms() {
        rows.entry(m.clone()).or_default();
    }
    for j in 0..basis.len() {
        for l in j..basis.len() {
            rows.entry(basis[j].mul(&basis[l])).or_default().push(SymEntry::new(blk, j, l, 1.0));
        }
    }
    for (m, ents) in rows {
        inst.add_constraint(ents, p.coeff(&m));
    }
    (inst, basis)
}

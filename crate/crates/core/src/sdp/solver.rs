//! Infeasible primal-dual interior-point method with the HKM search
//! direction and Mehrotra predictor-corrector steps.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{BlockKind, SdpInstance, SymEntry};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative duality gap target.
    pub gap_tol: f64,
    /// Relative primal and dual residual target.
    pub feas_tol: f64,
    /// Smallest eigenvalue accepted for a PSD block of the returned point.
    pub psd_tol: f64,
    pub max_iterations: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Threshold on `||A*y + Z|| / b'y` (and its primal analogue) used to
    /// declare infeasibility.
    pub infeas_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            gap_tol: 1e-7,
            feas_tol: 1e-8,
            psd_tol: 1e-8,
            max_iterations: 200,
            step_fraction: 0.95,
            infeas_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
    NumericalFailure,
}

/// Solver output in the original (unscaled) problem data.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SolveStatus,
    /// One matrix per block; diagonal blocks are returned as diagonal matrices.
    pub x: Vec<DMatrix<f64>>,
    pub z: Vec<DMatrix<f64>>,
    pub y: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn relative_gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs()
            / (1.0 + self.primal_objective.abs() + self.dual_objective.abs())
    }
}

/// Dense or diagonal block value.
#[derive(Debug, Clone)]
enum Mat {
    Dense(DMatrix<f64>),
    Diag(DVector<f64>),
}

impl Mat {
    fn dot(&self, other: &Mat) -> f64 {
        match (self, other) {
            (Mat::Dense(a), Mat::Dense(b)) => a.dot(b),
            (Mat::Diag(a), Mat::Diag(b)) => a.dot(b),
            _ => unreachable!("block kinds differ"),
        }
    }

    fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    fn axpy(&mut self, alpha: f64, other: &Mat) {
        match (self, other) {
            (Mat::Dense(a), Mat::Dense(b)) => *a += b * alpha,
            (Mat::Diag(a), Mat::Diag(b)) => a.axpy(alpha, b, 1.0),
            _ => unreachable!("block kinds differ"),
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Mat::Dense(a) => a.clone(),
            Mat::Diag(d) => DMatrix::from_diagonal(d),
        }
    }
}

type BlockVec = Vec<Mat>;

fn bv_dot(a: &BlockVec, b: &BlockVec) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn bv_norm(a: &BlockVec) -> f64 {
    a.iter().map(Mat::norm_sq).sum::<f64>().sqrt()
}

/// Problem data regrouped per block for the Schur complement assembly.
struct Data {
    kinds: Vec<BlockKind>,
    sizes: Vec<usize>,
    m: usize,
    c: BlockVec,
    b: DVector<f64>,
    /// `per_block[k]` lists `(constraint, entries)` for constraints touching block `k`.
    per_block: Vec<Vec<(usize, Vec<(usize, usize, f64)>)>>,
}

impl Data {
    fn zeros(&self) -> BlockVec {
        self.kinds
            .iter()
            .zip(&self.sizes)
            .map(|(k, &n)| match k {
                BlockKind::Psd => Mat::Dense(DMatrix::zeros(n, n)),
                BlockKind::Diag => Mat::Diag(DVector::zeros(n)),
            })
            .collect()
    }

    fn identity(&self, scale: &[f64]) -> BlockVec {
        self.kinds
            .iter()
            .zip(&self.sizes)
            .zip(scale)
            .map(|((k, &n), &s)| match k {
                BlockKind::Psd => Mat::Dense(DMatrix::identity(n, n) * s),
                BlockKind::Diag => Mat::Diag(DVector::from_element(n, s)),
            })
            .collect()
    }

    /// `A(W)_i = tr(A_i W)` for a possibly non-symmetric `W`.
    fn apply(&self, w: &BlockVec) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (k, cons) in self.per_block.iter().enumerate() {
            match &w[k] {
                Mat::Dense(wk) => {
                    for (i, ents) in cons {
                        let mut s = 0.0;
                        for &(r, c, v) in ents {
                            s += if r == c { v * wk[(r, r)] } else { v * (wk[(r, c)] + wk[(c, r)]) };
                        }
                        out[*i] += s;
                    }
                }
                Mat::Diag(wk) => {
                    for (i, ents) in cons {
                        out[*i] += ents.iter().map(|&(r, _, v)| v * wk[r]).sum::<f64>();
                    }
                }
            }
        }
        out
    }

    /// `A*(y) = sum_i y_i A_i`.
    fn adjoint(&self, y: &DVector<f64>) -> BlockVec {
        let mut out = self.zeros();
        for (k, cons) in self.per_block.iter().enumerate() {
            match &mut out[k] {
                Mat::Dense(o) => {
                    for (i, ents) in cons {
                        let yi = y[*i];
                        for &(r, c, v) in ents {
                            o[(r, c)] += yi * v;
                            if r != c {
                                o[(c, r)] += yi * v;
                            }
                        }
                    }
                }
                Mat::Diag(o) => {
                    for (i, ents) in cons {
                        for &(r, _, v) in ents {
                            o[r] += y[*i] * v;
                        }
                    }
                }
            }
        }
        out
    }

    /// Schur complement `M_ij = tr(A_i X A_j Z^-1)`.
    fn schur(&self, x: &BlockVec, zinv: &BlockVec) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.m, self.m);
        for (k, cons) in self.per_block.iter().enumerate() {
            match (&x[k], &zinv[k]) {
                (Mat::Dense(xk), Mat::Dense(zk)) => {
                    let n = xk.nrows();
                    let mut u = DMatrix::zeros(n, n);
                    let mut a = DMatrix::zeros(n, n);
                    for (jdx, (j, ents_j)) in cons.iter().enumerate() {
                        if ents_j.len() > 2 * n {
                            a.fill(0.0);
                            for &(r, c, v) in ents_j {
                                a[(r, c)] += v;
                                if r != c {
                                    a[(c, r)] += v;
                                }
                            }
                            u = xk * &a * zk;
                        } else {
                            u.fill(0.0);
                            for &(r, c, v) in ents_j {
                                // X e_r e_c' Zinv (+ transpose pair)
                                u.ger(v, &xk.column(r), &zk.row(c).transpose(), 1.0);
                                if r != c {
                                    u.ger(v, &xk.column(c), &zk.row(r).transpose(), 1.0);
                                }
                            }
                        }
                        for (i, ents_i) in &cons[jdx..] {
                            let mut s = 0.0;
                            for &(r, c, v) in ents_i {
                                s += if r == c { v * u[(r, r)] } else { v * (u[(r, c)] + u[(c, r)]) };
                            }
                            m[(*i, *j)] += s;
                            if i != j {
                                m[(*j, *i)] += s;
                            }
                        }
                    }
                }
                (Mat::Diag(xk), Mat::Diag(zk)) => {
                    let mut d = DVector::zeros(xk.len());
                    for (jdx, (j, ents_j)) in cons.iter().enumerate() {
                        d.fill(0.0);
                        for &(r, _, v) in ents_j {
                            d[r] = v * xk[r] * zk[r];
                        }
                        for (i, ents_i) in &cons[jdx..] {
                            let s: f64 = ents_i.iter().map(|&(r, _, v)| v * d[r]).sum();
                            m[(*i, *j)] += s;
                            if i != j {
                                m[(*j, *i)] += s;
                            }
                        }
                    }
                }
                _ => unreachable!("block kinds differ"),
            }
        }
        m
    }
}

fn inverse_spd(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let ch = a.clone().cholesky()?;
    Some(ch.inverse())
}

fn inverse_block(z: &Mat) -> Option<Mat> {
    match z {
        Mat::Dense(a) => inverse_spd(a).map(Mat::Dense),
        Mat::Diag(d) => {
            if d.iter().any(|&v| v <= 0.0) {
                None
            } else {
                Some(Mat::Diag(d.map(|v| 1.0 / v)))
            }
        }
    }
}

/// Largest `alpha` with `X + alpha dX` in the cone (may be infinite).
fn max_step(x: &Mat, dx: &Mat) -> f64 {
    match (x, dx) {
        (Mat::Dense(a), Mat::Dense(d)) => {
            let Some(ch) = a.clone().cholesky() else { return 0.0 };
            let l = ch.l();
            let Some(linv) = l.clone().try_inverse() else { return 0.0 };
            let s = &linv * d * linv.transpose();
            let s = (&s + s.transpose()) * 0.5;
            let lmin = SymmetricEigen::new(s).eigenvalues.min();
            if lmin >= 0.0 {
                f64::INFINITY
            } else {
                -1.0 / lmin
            }
        }
        (Mat::Diag(a), Mat::Diag(d)) => a
            .iter()
            .zip(d.iter())
            .filter(|(_, &dv)| dv < 0.0)
            .map(|(&av, &dv)| -av / dv)
            .fold(f64::INFINITY, f64::min),
        _ => unreachable!("block kinds differ"),
    }
}

fn min_eig(x: &Mat) -> f64 {
    match x {
        Mat::Dense(a) => {
            if a.nrows() == 0 {
                return f64::INFINITY;
            }
            SymmetricEigen::new(a.clone()).eigenvalues.min()
        }
        Mat::Diag(d) => d.iter().cloned().fold(f64::INFINITY, f64::min),
    }
}

/// Solves the linear system with the Schur matrix, regularising on failure.
fn solve_schur(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = m.clone().cholesky() {
        let sol = ch.solve(rhs);
        if sol.iter().all(|v| v.is_finite()) {
            return Some(sol);
        }
    }
    let scale = m.diagonal().amax().max(1e-300);
    for reg in [1e-14, 1e-12, 1e-10, 1e-8] {
        let mut mr = m.clone();
        for i in 0..mr.nrows() {
            mr[(i, i)] += reg * scale;
        }
        if let Some(ch) = mr.cholesky() {
            let sol = ch.solve(rhs);
            if sol.iter().all(|v| v.is_finite()) {
                return Some(sol);
            }
        }
    }
    m.clone().lu().solve(rhs).filter(|s| s.iter().all(|v| v.is_finite()))
}

struct Direction {
    dx: BlockVec,
    dy: DVector<f64>,
    dz: BlockVec,
}

/// HKM direction for target `sigma * mu` with an optional second-order
/// correction `dXa dZa Z^-1`.
#[allow(clippy::too_many_arguments)]
fn direction(
    data: &Data,
    schur_m: &DMatrix<f64>,
    x: &BlockVec,
    zinv: &BlockVec,
    rp: &DVector<f64>,
    rd: &BlockVec,
    target: f64,
    corr: Option<(&BlockVec, &BlockVec)>,
) -> Option<Direction> {
    // H = X Rd Zinv - target Zinv + corr terms; A(dX) = rp gives
    // M dy = rp + A(X) + A(X Rd Zinv) - target A(Zinv) + A(dXa dZa Zinv)
    let mut h: BlockVec = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let blk = match (&x[k], &zinv[k], &rd[k]) {
            (Mat::Dense(xk), Mat::Dense(zk), Mat::Dense(rk)) => {
                let mut hk = xk * rk * zk - zk * target + xk;
                if let Some((dxa, dza)) = corr {
                    if let (Mat::Dense(a), Mat::Dense(b)) = (&dxa[k], &dza[k]) {
                        hk += a * b * zk;
                    }
                }
                Mat::Dense(hk)
            }
            (Mat::Diag(xk), Mat::Diag(zk), Mat::Diag(rk)) => {
                let mut hk = xk.component_mul(rk).component_mul(zk) - zk * target + xk;
                if let Some((dxa, dza)) = corr {
                    if let (Mat::Diag(a), Mat::Diag(b)) = (&dxa[k], &dza[k]) {
                        hk += a.component_mul(b).component_mul(zk);
                    }
                }
                Mat::Diag(hk)
            }
            _ => unreachable!("block kinds differ"),
        };
        h.push(blk);
    }
    let rhs = rp + data.apply(&h);
    let dy = solve_schur(schur_m, &rhs)?;
    let aty = data.adjoint(&dy);
    let mut dz = rd.clone();
    for (d, a) in dz.iter_mut().zip(&aty) {
        d.axpy(-1.0, a);
    }
    // dX = target Zinv - X - X dZ Zinv - corr, symmetrised
    let mut dx: BlockVec = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let blk = match (&x[k], &zinv[k], &dz[k]) {
            (Mat::Dense(xk), Mat::Dense(zk), Mat::Dense(dzk)) => {
                let mut d = zk * target - xk - xk * dzk * zk;
                if let Some((dxa, dza)) = corr {
                    if let (Mat::Dense(a), Mat::Dense(b)) = (&dxa[k], &dza[k]) {
                        d -= a * b * zk;
                    }
                }
                Mat::Dense((&d + d.transpose()) * 0.5)
            }
            (Mat::Diag(xk), Mat::Diag(zk), Mat::Diag(dzk)) => {
                let mut d = zk * target - xk - xk.component_mul(dzk).component_mul(zk);
                if let Some((dxa, dza)) = corr {
                    if let (Mat::Diag(a), Mat::Diag(b)) = (&dxa[k], &dza[k]) {
                        d -= a.component_mul(b).component_mul(zk);
                    }
                }
                Mat::Diag(d)
            }
            _ => unreachable!("block kinds differ"),
        };
        dx.push(blk);
    }
    if !dx.iter().chain(&dz).all(|m| m.norm_sq().is_finite()) {
        return None;
    }
    Some(Direction { dx, dy, dz })
}

fn step_lengths(x: &BlockVec, z: &BlockVec, d: &Direction) -> (f64, f64) {
    let ap = x.iter().zip(&d.dx).map(|(a, b)| max_step(a, b)).fold(f64::INFINITY, f64::min);
    let ad = z.iter().zip(&d.dz).map(|(a, b)| max_step(a, b)).fold(f64::INFINITY, f64::min);
    (ap, ad)
}

/// Builds the internal data with each constraint row scaled to unit norm.
fn prepare(inst: &SdpInstance) -> (Data, Vec<f64>) {
    let nb = inst.blocks.len();
    let kinds: Vec<BlockKind> = inst.blocks.iter().map(|b| b.kind).collect();
    let sizes: Vec<usize> = inst.blocks.iter().map(|b| b.size).collect();
    let m = inst.constraints.len();
    let mut row_scale = vec![1.0; m];
    let mut per_block: Vec<Vec<(usize, Vec<(usize, usize, f64)>)>> = vec![Vec::new(); nb];
    for (i, cons) in inst.constraints.iter().enumerate() {
        let norm: f64 = cons
            .iter()
            .map(|e| if e.row == e.col { e.value * e.value } else { 2.0 * e.value * e.value })
            .sum::<f64>()
            .sqrt();
        let s = if norm > 0.0 { 1.0 / norm } else { 1.0 };
        row_scale[i] = s;
        let mut by_block: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); nb];
        for e in cons {
            by_block[e.block].push((e.row, e.col, e.value * s));
        }
        for (k, ents) in by_block.into_iter().enumerate() {
            if !ents.is_empty() {
                per_block[k].push((i, ents));
            }
        }
    }
    let b = DVector::from_iterator(m, inst.rhs.iter().zip(&row_scale).map(|(b, s)| b * s));
    let mut data = Data { kinds, sizes, m, c: Vec::new(), b, per_block };
    let mut c = data.zeros();
    for e in &inst.objective {
        add_entry(&mut c, e);
    }
    data.c = c;
    (data, row_scale)
}

fn add_entry(bv: &mut BlockVec, e: &SymEntry) {
    match &mut bv[e.block] {
        Mat::Dense(a) => {
            a[(e.row, e.col)] += e.value;
            if e.row != e.col {
                a[(e.col, e.row)] += e.value;
            }
        }
        Mat::Diag(d) => d[e.row] += e.value,
    }
}

/// Solves `inst` from an infeasible starting point scaled to the data.
pub fn solve_sdp(inst: &SdpInstance, opts: &SolverOptions) -> SdpSolution {
    let (data, row_scale) = prepare(inst);
    let nb = data.kinds.len();
    let total_n: f64 = data.sizes.iter().sum::<usize>() as f64;

    // constraints without entries: consistent only if b_i = 0
    let empty_rows: Vec<usize> = (0..data.m)
        .filter(|&i| data.per_block.iter().all(|cons| cons.iter().all(|(j, _)| *j != i)))
        .collect();
    if empty_rows.iter().any(|&i| data.b[i].abs() > opts.feas_tol) {
        return finish(&data, &row_scale, SolveStatus::PrimalInfeasible, &data.zeros(), &DVector::zeros(data.m), &data.zeros(), 0);
    }

    // starting point
    let mut xi = vec![1.0; nb];
    let mut eta = vec![1.0; nb];
    for k in 0..nb {
        let n = data.sizes[k] as f64;
        let mut xk: f64 = 10f64.max(n.sqrt());
        let mut ek: f64 = 10f64.max(n.sqrt());
        for (i, ents) in &data.per_block[k] {
            let anorm: f64 = ents.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt();
            xk = xk.max(n * (1.0 + data.b[*i].abs()) / (1.0 + anorm));
            ek = ek.max(anorm);
        }
        ek = ek.max(data.c[k].norm_sq().sqrt());
        xi[k] = xk;
        eta[k] = ek;
    }
    let mut x = data.identity(&xi);
    let mut z = data.identity(&eta);
    let mut y = DVector::zeros(data.m);

    let bnorm = data.b.norm();
    let cnorm = bv_norm(&data.c);
    let mut status = SolveStatus::MaxIterations;
    let mut iter = 0;
    let mut stall = 0;

    while iter < opts.max_iterations {
        let ax = data.apply(&x);
        let rp = &data.b - &ax;
        let aty = data.adjoint(&y);
        let mut rd = data.c.clone();
        for k in 0..nb {
            rd[k].axpy(-1.0, &aty[k]);
            rd[k].axpy(-1.0, &z[k]);
        }
        let pobj = bv_dot(&data.c, &x);
        let dobj = data.b.dot(&y);
        let gap = bv_dot(&x, &z);
        let mu = gap / total_n;
        let pres = rp.norm() / (1.0 + bnorm);
        let dres = bv_norm(&rd) / (1.0 + cnorm);
        let relgap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());

        if relgap < opts.gap_tol && pres < opts.feas_tol && dres < opts.feas_tol {
            status = SolveStatus::Optimal;
            break;
        }
        // infeasibility certificates
        if dobj > 0.0 {
            let mut r = aty.clone();
            for k in 0..nb {
                r[k].axpy(1.0, &z[k]);
            }
            if bv_norm(&r) / dobj < opts.infeas_tol {
                status = SolveStatus::PrimalInfeasible;
                break;
            }
        }
        if pobj < 0.0 && ax.norm() / (-pobj) < opts.infeas_tol {
            status = SolveStatus::DualInfeasible;
            break;
        }
        if !mu.is_finite() || !pobj.is_finite() || !dobj.is_finite() {
            status = SolveStatus::NumericalFailure;
            break;
        }

        let Some(zinv) = z.iter().map(inverse_block).collect::<Option<BlockVec>>() else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let schur_m = data.schur(&x, &zinv);

        // predictor
        let Some(pred) = direction(&data, &schur_m, &x, &zinv, &rp, &rd, 0.0, None) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let (ap, ad) = step_lengths(&x, &z, &pred);
        let ap = (opts.step_fraction * ap).min(1.0);
        let ad = (opts.step_fraction * ad).min(1.0);
        let mut xa = x.clone();
        let mut za = z.clone();
        for k in 0..nb {
            xa[k].axpy(ap, &pred.dx[k]);
            za[k].axpy(ad, &pred.dz[k]);
        }
        let mu_aff = bv_dot(&xa, &za) / total_n;
        let mut sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        // keep some centring while residuals dominate
        if pres.max(dres) > 1e2 * relgap.max(opts.gap_tol) {
            sigma = sigma.max(0.1);
        }

        // corrector
        let Some(dir) = direction(&data, &schur_m, &x, &zinv, &rp, &rd, sigma * mu, Some((&pred.dx, &pred.dz)))
        else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let (ap, ad) = step_lengths(&x, &z, &dir);
        let frac = if iter < 3 { 0.9 } else { opts.step_fraction.max(0.9) };
        let ap = (frac * ap).min(1.0);
        let ad = (frac * ad).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            stall += 1;
            if stall >= 3 {
                status = SolveStatus::NumericalFailure;
                break;
            }
        } else {
            stall = 0;
        }
        for k in 0..nb {
            x[k].axpy(ap, &dir.dx[k]);
            z[k].axpy(ad, &dir.dz[k]);
        }
        y.axpy(ad, &dir.dy, 1.0);
        // re-symmetrise against drift
        for blk in x.iter_mut().chain(z.iter_mut()) {
            if let Mat::Dense(a) = blk {
                let t = (&*a + a.transpose()) * 0.5;
                *a = t;
            }
        }
        iter += 1;
    }

    if status == SolveStatus::Optimal {
        let worst = x.iter().map(min_eig).fold(f64::INFINITY, f64::min);
        if worst < -opts.psd_tol {
            status = SolveStatus::NumericalFailure;
        }
    }
    finish(&data, &row_scale, status, &x, &y, &z, iter)
}

fn finish(
    data: &Data,
    row_scale: &[f64],
    status: SolveStatus,
    x: &BlockVec,
    y: &DVector<f64>,
    z: &BlockVec,
    iterations: usize,
) -> SdpSolution {
    let rp = &data.b - data.apply(x);
    let aty = data.adjoint(y);
    let mut rd = data.c.clone();
    for k in 0..x.len() {
        rd[k].axpy(-1.0, &aty[k]);
        rd[k].axpy(-1.0, &z[k]);
    }
    SdpSolution {
        status,
        x: x.iter().map(Mat::to_dense).collect(),
        z: z.iter().map(Mat::to_dense).collect(),
        y: y.iter().zip(row_scale).map(|(v, s)| v * s).collect(),
        primal_objective: bv_dot(&data.c, x),
        dual_objective: data.b.dot(y),
        primal_residual: rp.norm() / (1.0 + data.b.norm()),
        dual_residual: bv_norm(&rd) / (1.0 + bv_norm(&data.c)),
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn two_by_two_bound() {
        // minimize t s.t. [[t, 1], [1, t]] ⪰ 0  =>  t = 1
        let mut p = SdpInstance::default();
        let k = p.add_block(2, BlockKind::Psd, "X");
        p.objective.push(SymEntry::new(k, 0, 0, 1.0));
        p.add_constraint(vec![SymEntry::new(k, 0, 0, 1.0), SymEntry::new(k, 1, 1, -1.0)], 0.0);
        p.add_constraint(vec![SymEntry::new(k, 0, 1, 0.5)], 1.0);
        let s = solve_sdp(&p, &SolverOptions::default());
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_close(s.primal_objective, 1.0, 1e-6);
        assert_close(s.dual_objective, 1.0, 1e-6);
    }

    #[test]
    fn linear_program() {
        // minimize x1 + 2 x2 s.t. x1 + x2 = 1, x >= 0  =>  1
        let mut p = SdpInstance::default();
        let k = p.add_block(2, BlockKind::Diag, "lp");
        p.objective.push(SymEntry::new(k, 0, 0, 1.0));
        p.objective.push(SymEntry::new(k, 1, 1, 2.0));
        p.add_constraint(vec![SymEntry::new(k, 0, 0, 1.0), SymEntry::new(k, 1, 1, 1.0)], 1.0);
        let s = solve_sdp(&p, &SolverOptions::default());
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_close(s.primal_objective, 1.0, 1e-6);
        assert_close(s.x[k][(0, 0)], 1.0, 1e-5);
    }

    #[test]
    fn max_eigenvalue() {
        // minimize t s.t. t I - A ⪰ 0 written as X = tI - A with X ⪰ 0, t = tI part
        // A = [[2, 1], [1, 2]], lambda_max = 3
        let mut p = SdpInstance::default();
        let xk = p.add_block(2, BlockKind::Psd, "X");
        let tk = p.add_block(2, BlockKind::Diag, "t");
        // t = t+ - t-
        p.objective.push(SymEntry::new(tk, 0, 0, 1.0));
        p.objective.push(SymEntry::new(tk, 1, 1, -1.0));
        let a = [[2.0, 1.0], [1.0, 2.0]];
        for r in 0..2 {
            for c in r..2 {
                let w = if r == c { 1.0 } else { 0.5 };
                let mut e = vec![SymEntry::new(xk, r, c, w)];
                if r == c {
                    e.push(SymEntry::new(tk, 0, 0, -1.0));
                    e.push(SymEntry::new(tk, 1, 1, 1.0));
                }
                p.add_constraint(e, -a[r][c]);
            }
        }
        let s = solve_sdp(&p, &SolverOptions::default());
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_close(s.primal_objective, 3.0, 1e-5);
    }

    #[test]
    fn primal_infeasible() {
        // X ⪰ 0 with X11 = -1
        let mut p = SdpInstance::default();
        let k = p.add_block(2, BlockKind::Psd, "X");
        p.objective.push(SymEntry::new(k, 0, 0, 1.0));
        p.add_constraint(vec![SymEntry::new(k, 0, 0, 1.0)], -1.0);
        let s = solve_sdp(&p, &SolverOptions::default());
        assert_eq!(s.status, SolveStatus::PrimalInfeasible);
    }

    #[test]
    fn dual_infeasible() {
        // minimize -x1 s.t. x1 - x2 = 0, x >= 0  is unbounded
        let mut p = SdpInstance::default();
        let k = p.add_block(2, BlockKind::Diag, "lp");
        p.objective.push(SymEntry::new(k, 0, 0, -1.0));
        p.add_constraint(vec![SymEntry::new(k, 0, 0, 1.0), SymEntry::new(k, 1, 1, -1.0)], 0.0);
        let s = solve_sdp(&p, &SolverOptions::default());
        assert_eq!(s.status, SolveStatus::DualInfeasible);
    }

    #[test]
    fn psd_and_lp_blocks_together() {
        // minimize X11 + X22 + s  s.t. X12 = 1, X11 = s, s >= 0
        // X11 X22 >= 1, so the optimum is min 2 X11 + 1 / X11 = 2 sqrt(2)
        let mut p = SdpInstance::default();
        let xk = p.add_block(2, BlockKind::Psd, "X");
        let sk = p.add_block(1, BlockKind::Diag, "s");
        p.objective.push(SymEntry::new(xk, 0, 0, 1.0));
        p.objective.push(SymEntry::new(xk, 1, 1, 1.0));
        p.objective.push(SymEntry::new(sk, 0, 0, 1.0));
        p.add_constraint(vec![SymEntry::new(xk, 0, 1, 0.5)], 1.0);
        p.add_constraint(vec![SymEntry::new(xk, 0, 0, 1.0), SymEntry::new(sk, 0, 0, -1.0)], 0.0);
        let s = solve_sdp(&p, &SolverOptions::default());
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_close(s.primal_objective, 2f64.sqrt() * 2.0, 1e-5);
    }
}

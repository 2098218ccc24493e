//! Homogeneous self-dual interior-point method on the compiled real form.
//!
//! The embedding solved is
//!
//! ```text
//!   A x − b τ = 0,   A'y + s − c τ = 0,   b'y − c'x − κ = 0,
//!   x ∈ K, s ∈ K*, τ, κ ≥ 0,
//! ```
//!
//! with Nesterov–Todd scaling on PSD blocks, `x/s` scaling on the LP block and
//! free variables eliminated through a Schur complement. Directions follow
//! Mehrotra's predictor-corrector scheme.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use super::compile::{Compiled, Row, Slot};
use super::{BlockKind, BlockValue, Residuals, SdpProblem, SdpSolution, SolveOptions, SolveStatus};
use crate::matcore::{CMatrix, C64};

const STEP_FRACTION: f64 = 0.98;

#[derive(Clone, Debug)]
struct Pt {
    psd: Vec<DMatrix<f64>>,
    lp: DVector<f64>,
    free: DVector<f64>,
}

impl Pt {
    fn identity(cp: &Compiled) -> Self {
        Self {
            psd: cp.psd_dims.iter().map(|&n| DMatrix::identity(n, n)).collect(),
            lp: DVector::from_element(cp.lp_dim, 1.0),
            free: DVector::zeros(cp.free_dim),
        }
    }

    fn axpy(&mut self, a: f64, o: &Pt) {
        for (x, y) in self.psd.iter_mut().zip(&o.psd) {
            *x += y * a;
        }
        self.lp.axpy(a, &o.lp, 1.0);
        self.free.axpy(a, &o.free, 1.0);
    }

    fn dot(&self, o: &Pt) -> f64 {
        let mut acc = 0.0;
        for (x, y) in self.psd.iter().zip(&o.psd) {
            acc += x.dot(y);
        }
        acc + self.lp.dot(&o.lp) + self.free.dot(&o.free)
    }

    fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    fn symmetrize(&mut self) {
        for x in &mut self.psd {
            let t = x.transpose();
            *x += t;
            *x *= 0.5;
        }
    }
}

/// Problem data after redundant rows have been removed.
struct Data {
    psd_dims: Vec<usize>,
    rows: Vec<Row>,
    /// For each PSD block, the rows touching it and the position of the block in `Row::psd`.
    by_block: Vec<Vec<(usize, usize)>>,
    a_lp: DMatrix<f64>,
    a_free: DMatrix<f64>,
    b: DVector<f64>,
    c: Pt,
}

impl Data {
    fn new(cp: &Compiled, keep: &[usize]) -> Self {
        let rows: Vec<Row> = keep.iter().map(|&k| cp.rows[k].clone()).collect();
        let m = rows.len();
        let mut by_block = vec![Vec::new(); cp.psd_dims.len()];
        let mut a_lp = DMatrix::zeros(m, cp.lp_dim);
        let mut a_free = DMatrix::zeros(m, cp.free_dim);
        for (k, row) in rows.iter().enumerate() {
            for (pos, (b, _)) in row.psd.iter().enumerate() {
                by_block[*b].push((k, pos));
            }
            for &(t, v) in &row.lp {
                a_lp[(k, t)] = v;
            }
            for &(t, v) in &row.free {
                a_free[(k, t)] = v;
            }
        }
        let b = DVector::from_iterator(m, keep.iter().map(|&k| cp.b[k]));
        Self {
            psd_dims: cp.psd_dims.clone(),
            rows,
            by_block,
            a_lp,
            a_free,
            b,
            c: Pt { psd: cp.c_psd.clone(), lp: cp.c_lp.clone(), free: cp.c_free.clone() },
        }
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn barrier_degree(&self) -> f64 {
        (self.psd_dims.iter().sum::<usize>() + self.a_lp.ncols()) as f64
    }

    /// `A x` over the cone part only.
    fn apply_cone(&self, x: &Pt) -> DVector<f64> {
        let mut out = &self.a_lp * &x.lp;
        for (k, row) in self.rows.iter().enumerate() {
            let mut acc = 0.0;
            for (b, ent) in &row.psd {
                let xb = &x.psd[*b];
                for &(i, j, v) in ent {
                    acc += if i == j { v * xb[(i, i)] } else { 2.0 * v * xb[(i, j)] };
                }
            }
            out[k] += acc;
        }
        out
    }

    fn apply(&self, x: &Pt) -> DVector<f64> {
        let mut out = self.apply_cone(x);
        out += &self.a_free * &x.free;
        out
    }

    /// `A' y`, including the free part.
    fn adjoint(&self, y: &DVector<f64>) -> Pt {
        let mut psd: Vec<DMatrix<f64>> = self.psd_dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (k, row) in self.rows.iter().enumerate() {
            let yk = y[k];
            if yk == 0.0 {
                continue;
            }
            for (b, ent) in &row.psd {
                let xb = &mut psd[*b];
                for &(i, j, v) in ent {
                    xb[(i, j)] += yk * v;
                    if i != j {
                        xb[(j, i)] += yk * v;
                    }
                }
            }
        }
        Pt { psd, lp: self.a_lp.transpose() * y, free: self.a_free.transpose() * y }
    }

    /// `Σ_b ⟨A_k, W_b A_l W_b⟩ + Σ_t a_kt d_t a_lt` (cone part only).
    fn schur(&self, w: &[DMatrix<f64>], d_lp: &DVector<f64>) -> DMatrix<f64> {
        let m = self.m();
        let mut out = DMatrix::zeros(m, m);
        for (b, list) in self.by_block.iter().enumerate() {
            let wb = &w[b];
            let n = wb.nrows();
            for (li, &(l, lpos)) in list.iter().enumerate() {
                let ent_l = &self.rows[l].psd[lpos].1;
                let g = sandwich(wb, ent_l, n);
                for &(k, kpos) in &list[..=li] {
                    let ent_k = &self.rows[k].psd[kpos].1;
                    let mut acc = 0.0;
                    for &(i, j, v) in ent_k {
                        acc += if i == j { v * g[(i, i)] } else { 2.0 * v * g[(i, j)] };
                    }
                    out[(k, l)] += acc;
                }
            }
        }
        for k in 0..m {
            for l in 0..k {
                out[(k, l)] = out[(l, k)];
            }
        }
        if self.a_lp.ncols() > 0 {
            let mut scaled = self.a_lp.clone();
            for (t, mut col) in scaled.column_iter_mut().enumerate() {
                col *= d_lp[t];
            }
            out += &scaled * self.a_lp.transpose();
        }
        out
    }
}

/// `W A W` for the symmetric matrix `A` given by upper-triangular entries.
fn sandwich(w: &DMatrix<f64>, ent: &[(usize, usize, f64)], n: usize) -> DMatrix<f64> {
    if 2 * ent.len() < n {
        let mut g = DMatrix::zeros(n, n);
        for &(i, j, v) in ent {
            let wi = w.column(i);
            let wj = w.column(j);
            if i == j {
                g.ger(v, &wi, &wi, 1.0);
            } else {
                g.ger(v, &wi, &wj, 1.0);
                g.ger(v, &wj, &wi, 1.0);
            }
        }
        g
    } else {
        let mut a = DMatrix::zeros(n, n);
        for &(i, j, v) in ent {
            a[(i, j)] += v;
            if i != j {
                a[(j, i)] += v;
            }
        }
        w * a * w
    }
}

/// Nesterov–Todd scaling of one PSD block: `W S W = X`, `R'SR = R⁻¹XR⁻ᵀ = Λ`.
struct Scaling {
    r: DMatrix<f64>,
    w: DMatrix<f64>,
    lam: DVector<f64>,
}

fn chol_lower(x: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    Cholesky::new(x.clone()).map(|c| c.unpack())
}

fn nt_scaling(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<Scaling> {
    let lx = chol_lower(x)?;
    let ls = chol_lower(s)?;
    let svd = (ls.transpose() * &lx).svd(false, true);
    let v = svd.v_t?.transpose();
    let lam = svd.singular_values;
    if lam.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return None;
    }
    let mut r = lx * v;
    for (j, mut col) in r.column_iter_mut().enumerate() {
        col *= 1.0 / lam[j].sqrt();
    }
    let w = &r * r.transpose();
    Some(Scaling { r, w, lam })
}

/// Max step `α` keeping `Λ + α D ⪰ 0`.
fn psd_step(lam: &DVector<f64>, d: &DMatrix<f64>) -> f64 {
    let n = lam.len();
    let mut m = d.clone();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] /= (lam[i] * lam[j]).sqrt();
        }
    }
    let m = (&m + m.transpose()) * 0.5;
    let e = SymmetricEigen::new(m).eigenvalues.min();
    if e < 0.0 {
        -1.0 / e
    } else {
        f64::INFINITY
    }
}

fn ratio_step(x: f64, dx: f64) -> f64 {
    if dx < 0.0 {
        -x / dx
    } else {
        f64::INFINITY
    }
}

/// Cholesky of `A + δ1` with the smallest `δ` (from a relative `1e-14`) that succeeds.
fn regularized_cholesky(a: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let n = a.nrows();
    let scale = (0..n).map(|k| a[(k, k)].abs()).fold(1e-300_f64, f64::max);
    let mut delta = 1e-14 * scale;
    for _ in 0..8 {
        let mut reg = a.clone();
        for k in 0..n {
            reg[(k, k)] += delta;
        }
        if let Some(c) = Cholesky::new(reg) {
            return Some(c);
        }
        delta *= 100.0;
    }
    None
}

/// Factorization of `[[M, A_f], [A_f', 0]]`.
struct Kkt {
    m: DMatrix<f64>,
    chol: Option<Cholesky<f64, Dyn>>,
    af: DMatrix<f64>,
    mi_af: DMatrix<f64>,
    sf: Option<Cholesky<f64, Dyn>>,
}

impl Kkt {
    fn new(m: DMatrix<f64>, af: &DMatrix<f64>) -> Option<Self> {
        let n = m.nrows();
        let chol = if n == 0 { None } else { Some(regularized_cholesky(&m)?) };
        let (mi_af, sf) = match &chol {
            Some(c) if af.ncols() > 0 => {
                let mi_af = c.solve(af);
                let s = af.transpose() * &mi_af;
                let s = (&s + s.transpose()) * 0.5;
                (mi_af, Some(regularized_cholesky(&s)?))
            }
            _ => (DMatrix::zeros(n, 0), None),
        };
        Some(Self { m, chol, af: af.clone(), mi_af, sf })
    }

    fn solve_once(&self, r1: &DVector<f64>, r2: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let Some(chol) = &self.chol else {
            return (DVector::zeros(0), DVector::zeros(r2.len()));
        };
        match &self.sf {
            None => (chol.solve(r1), DVector::zeros(0)),
            Some(sf) => {
                let rhs = self.mi_af.transpose() * r1 - r2;
                let q = sf.solve(&rhs);
                let p = chol.solve(&(r1 - &self.af * &q));
                (p, q)
            }
        }
    }

    fn solve(&self, r1: &DVector<f64>, r2: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let (mut p, mut q) = self.solve_once(r1, r2);
        for _ in 0..2 {
            if self.chol.is_none() {
                break;
            }
            let e1 = r1 - (&self.m * &p + &self.af * &q);
            let e2 = r2 - self.af.transpose() * &p;
            let (dp, dq) = self.solve_once(&e1, &e2);
            p += dp;
            q += dq;
        }
        (p, q)
    }
}

#[derive(Clone)]
struct State {
    x: Pt,
    s: Pt,
    y: DVector<f64>,
    tau: f64,
    kappa: f64,
}

struct Dir {
    dx: Pt,
    ds: Pt,
    dy: DVector<f64>,
    dtau: f64,
    dkappa: f64,
    dxt: Vec<DMatrix<f64>>,
    dst: Vec<DMatrix<f64>>,
}

struct Residual {
    rp: DVector<f64>,
    rd: Pt,
    rg: f64,
}

/// Per-iteration quantities shared by predictor and corrector.
struct Iter<'a> {
    data: &'a Data,
    st: &'a State,
    sc: &'a [Scaling],
    d_lp: DVector<f64>,
    kkt: Kkt,
    u: DVector<f64>,
    p2: DVector<f64>,
    q2: DVector<f64>,
    den: f64,
    res: &'a Residual,
}

impl Iter<'_> {
    fn apply_w(&self, z: &Pt) -> Pt {
        Pt {
            psd: z.psd.iter().zip(self.sc).map(|(zb, s)| &s.w * zb * &s.w).collect(),
            lp: z.lp.component_mul(&self.d_lp),
            free: DVector::zeros(z.free.len()),
        }
    }

    fn direction(&self, eta: f64, q_psd: &[DMatrix<f64>], target_lp: &DVector<f64>, rho: f64) -> Dir {
        let data = self.data;
        let st = self.st;
        let tau = st.tau;
        let mut dmat = Vec::with_capacity(self.sc.len());
        let mut h = Pt::zeros_like(&st.x);
        for (b, s) in self.sc.iter().enumerate() {
            let n = s.lam.len();
            let q = &q_psd[b];
            let d = DMatrix::from_fn(n, n, |i, j| 2.0 * q[(i, j)] / (s.lam[i] + s.lam[j]));
            h.psd[b] = &s.r * &d * s.r.transpose();
            dmat.push(d);
        }
        h.lp = target_lp.component_div(&st.s.lp);

        let mut rd_cone = self.res.rd.clone();
        rd_cone.free.fill(0.0);
        let w_rd = self.apply_w(&rd_cone);
        let mut t = h.clone();
        t.axpy(-eta, &w_rd);
        t.free.fill(0.0);

        let r1 = &self.res.rp * eta - data.apply_cone(&t);
        let r2 = &self.res.rd.free * eta;
        let r3 = -eta * self.res.rg - data.c.dot(&t) - rho / tau;
        let (p, q) = self.kkt.solve(&r1, &r2);
        let umb = &self.u - &data.b;
        let num = r3 - umb.dot(&p) - data.c.free.dot(&q);
        let dtau = num / self.den;
        let dy = &p + &self.p2 * dtau;
        let dxf = &q + &self.q2 * dtau;

        let aty = data.adjoint(&dy);
        let mut ds = rd_cone.clone();
        ds.psd.iter_mut().for_each(|m| *m *= eta);
        ds.lp *= eta;
        ds.axpy(-1.0, &aty);
        ds.axpy(dtau, &data.c);
        ds.free.fill(0.0);
        ds.symmetrize();

        let w_ds = self.apply_w(&ds);
        let mut dx = h;
        dx.axpy(-1.0, &w_ds);
        dx.free = dxf;
        dx.symmetrize();

        let dkappa = (rho - st.kappa * dtau) / tau;
        let mut dst = Vec::with_capacity(self.sc.len());
        let mut dxt = Vec::with_capacity(self.sc.len());
        for (b, s) in self.sc.iter().enumerate() {
            let t = s.r.transpose() * &ds.psd[b] * &s.r;
            let t = (&t + t.transpose()) * 0.5;
            dxt.push(&dmat[b] - &t);
            dst.push(t);
        }
        Dir { dx, ds, dy, dtau, dkappa, dxt, dst }
    }

    fn max_step(&self, d: &Dir) -> f64 {
        let st = self.st;
        let mut a = f64::INFINITY;
        for (b, s) in self.sc.iter().enumerate() {
            a = a.min(psd_step(&s.lam, &d.dxt[b]));
            a = a.min(psd_step(&s.lam, &d.dst[b]));
        }
        for i in 0..st.x.lp.len() {
            a = a.min(ratio_step(st.x.lp[i], d.dx.lp[i]));
            a = a.min(ratio_step(st.s.lp[i], d.ds.lp[i]));
        }
        a = a.min(ratio_step(st.tau, d.dtau));
        a.min(ratio_step(st.kappa, d.dkappa))
    }
}

impl Pt {
    fn zeros_like(o: &Pt) -> Self {
        Self {
            psd: o.psd.iter().map(|m| DMatrix::zeros(m.nrows(), m.ncols())).collect(),
            lp: DVector::zeros(o.lp.len()),
            free: DVector::zeros(o.free.len()),
        }
    }
}

/// Keeps a maximal linearly independent prefix-greedy subset of rows.
/// Returns `None` when a dropped row is inconsistent with the kept ones.
fn independent_rows(cp: &Compiled) -> Option<Vec<usize>> {
    let all: Vec<usize> = (0..cp.rows.len()).collect();
    let full = Data::new(cp, &all);
    let m = full.m();
    if m == 0 {
        return Some(all);
    }
    let w: Vec<DMatrix<f64>> = cp.psd_dims.iter().map(|&n| DMatrix::identity(n, n)).collect();
    let mut g = full.schur(&w, &DVector::from_element(cp.lp_dim, 1.0));
    if cp.free_dim > 0 {
        g += &full.a_free * full.a_free.transpose();
    }
    let bscale = full.b.amax().max(1.0);
    let mut kept: Vec<usize> = Vec::new();
    let mut lrows: Vec<Vec<f64>> = Vec::new();
    let mut z: Vec<f64> = Vec::new();
    for k in 0..m {
        let mut l = vec![0.0; kept.len() + 1];
        for (a, &j) in kept.iter().enumerate() {
            let mut v = g[(j, k)];
            for c in 0..a {
                v -= lrows[a][c] * l[c];
            }
            l[a] = v / lrows[a][a];
        }
        let d = g[(k, k)] - l[..kept.len()].iter().map(|v| v * v).sum::<f64>();
        if d > 1e-9 * g[(k, k)].max(1e-300) {
            let a = kept.len();
            l[a] = d.sqrt();
            let mut zv = full.b[k];
            for c in 0..a {
                zv -= l[c] * z[c];
            }
            z.push(zv / l[a]);
            kept.push(k);
            lrows.push(l);
        } else {
            let predicted: f64 = l[..kept.len()].iter().zip(&z).map(|(a, b)| a * b).sum();
            if (full.b[k] - predicted).abs() > 1e-7 * bscale {
                return None;
            }
        }
    }
    Some(kept)
}

fn infeasible_solution(problem: &SdpProblem, status: SolveStatus) -> SdpSolution {
    let x = problem
        .blocks
        .iter()
        .map(|b| match b.kind {
            BlockKind::Hermitian => BlockValue::Matrix(CMatrix::zeros(b.dim, b.dim)),
            _ => BlockValue::Vector(vec![0.0; b.dim]),
        })
        .collect::<Vec<_>>();
    SdpSolution {
        status,
        primal_value: f64::NAN,
        dual_value: f64::NAN,
        s: x.clone(),
        x,
        y: vec![0.0; problem.equalities.len()],
        residuals: Residuals { primal: f64::NAN, dual: f64::NAN, gap: f64::NAN },
        iterations: 0,
    }
}

fn unembed(xt: &DMatrix<f64>, factor: f64) -> CMatrix {
    let d = xt.nrows() / 2;
    CMatrix::from_fn(d, d, |i, j| {
        let re = 0.5 * (xt[(i, j)] + xt[(d + i, d + j)]);
        let im = 0.5 * (xt[(d + i, j)] - xt[(i, d + j)]);
        C64::new(factor * re, factor * im)
    })
}

pub(super) fn solve_compiled(problem: &SdpProblem, cp: &Compiled, opts: &SolveOptions) -> SdpSolution {
    if cp.inconsistent {
        return infeasible_solution(problem, SolveStatus::Infeasible);
    }
    let Some(keep) = independent_rows(cp) else {
        return infeasible_solution(problem, SolveStatus::Infeasible);
    };
    let data = Data::new(cp, &keep);
    let m = data.m();
    let nu = data.barrier_degree();
    let bnorm = data.b.norm();
    let cnorm = data.c.norm();

    let mut st = State { x: Pt::identity(cp), s: Pt::identity(cp), y: DVector::zeros(m), tau: 1.0, kappa: 1.0 };
    st.s.free.fill(0.0);

    let mut status = SolveStatus::MaxIter;
    let mut best: Option<(f64, State)> = None;
    let mut iterations = 0;
    let mut stalls = 0;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        let ax = data.apply(&st.x);
        let aty = data.adjoint(&st.y);
        let rp = &data.b * st.tau - &ax;
        let mut rd = data.c.clone();
        rd.psd.iter_mut().for_each(|m| *m *= st.tau);
        rd.lp *= st.tau;
        rd.free *= st.tau;
        rd.axpy(-1.0, &aty);
        rd.axpy(-1.0, &st.s);
        let cx = data.c.dot(&st.x);
        let by = data.b.dot(&st.y);
        let rg = st.kappa - by + cx;

        let pres = rp.norm() / st.tau / (1.0 + bnorm);
        let dres = rd.norm() / st.tau / (1.0 + cnorm);
        let pcost = cx / st.tau;
        let dcost = by / st.tau;
        let gap = (pcost - dcost).abs();
        let rel_gap = gap / (1.0 + pcost.abs());
        log::debug!(
            "iter {iter:3} pcost {pcost:+.10e} dcost {dcost:+.10e} pres {pres:.2e} dres {dres:.2e} gap {rel_gap:.2e} tau {:.2e} kappa {:.2e}",
            st.tau,
            st.kappa
        );
        if !(pres.is_finite() && dres.is_finite() && pcost.is_finite() && dcost.is_finite()) {
            status = SolveStatus::Numerical;
            break;
        }
        let merit = pres.max(dres).max(rel_gap);
        if best.as_ref().is_none_or(|(b, _)| merit < *b) {
            best = Some((merit, st.clone()));
        }
        if pres <= opts.feas_tol && dres <= opts.feas_tol && rel_gap <= opts.gap_tol {
            status = SolveStatus::Optimal;
            break;
        }
        if st.tau < 0.1 * st.kappa {
            let mut ays = aty.clone();
            ays.axpy(1.0, &st.s);
            if by > 0.0 && ays.norm() / by <= opts.feas_tol {
                status = SolveStatus::Infeasible;
                break;
            }
            if cx < 0.0 && data.apply(&st.x).norm() / (-cx) <= opts.feas_tol {
                status = SolveStatus::Unbounded;
                break;
            }
        }
        if iter == opts.max_iter {
            break;
        }

        let mut scalings = Vec::with_capacity(st.x.psd.len());
        let mut ok = true;
        for (x, s) in st.x.psd.iter().zip(&st.s.psd) {
            match nt_scaling(x, s) {
                Some(sc) => scalings.push(sc),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            status = SolveStatus::Numerical;
            break;
        }
        let d_lp = st.x.lp.component_div(&st.s.lp);
        let w: Vec<DMatrix<f64>> = scalings.iter().map(|s| s.w.clone()).collect();
        let mmat = data.schur(&w, &d_lp);
        let Some(kkt) = Kkt::new(mmat, &data.a_free) else {
            status = SolveStatus::Numerical;
            break;
        };
        let res = Residual { rp, rd, rg };
        let mut it = Iter {
            data: &data,
            st: &st,
            sc: &scalings,
            d_lp,
            kkt,
            u: DVector::zeros(m),
            p2: DVector::zeros(m),
            q2: DVector::zeros(cp.free_dim),
            den: 0.0,
            res: &res,
        };
        let mut c_cone = data.c.clone();
        c_cone.free.fill(0.0);
        let wc = it.apply_w(&c_cone);
        let cwc = c_cone.dot(&wc);
        it.u = data.apply_cone(&wc);
        let (p2, q2) = it.kkt.solve(&(&it.u + &data.b), &data.c.free);
        it.den = (&it.u - &data.b).dot(&p2) + data.c.free.dot(&q2) - cwc - st.kappa / st.tau;
        it.p2 = p2;
        it.q2 = q2;
        if !(it.den.is_finite()) || it.den == 0.0 {
            status = SolveStatus::Numerical;
            break;
        }

        let mu =
            (scalings.iter().map(|s| s.lam.norm_squared()).sum::<f64>() + st.x.lp.dot(&st.s.lp) + st.tau * st.kappa)
                / (nu + 1.0);

        // predictor
        let q_aff: Vec<DMatrix<f64>> =
            scalings.iter().map(|s| DMatrix::from_diagonal(&s.lam.map(|l| -l * l))).collect();
        let t_aff = -st.x.lp.component_mul(&st.s.lp);
        let aff = it.direction(1.0, &q_aff, &t_aff, -st.tau * st.kappa);
        let alpha_aff = it.max_step(&aff).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

        // corrector
        let q_cor: Vec<DMatrix<f64>> = scalings
            .iter()
            .enumerate()
            .map(|(b, s)| {
                let n = s.lam.len();
                let cross = &aff.dxt[b] * &aff.dst[b];
                let sym = (&cross + cross.transpose()) * 0.5;
                DMatrix::from_fn(n, n, |i, j| {
                    let base = if i == j { sigma * mu - s.lam[i] * s.lam[i] } else { 0.0 };
                    base - sym[(i, j)]
                })
            })
            .collect();
        let t_cor =
            DVector::from_fn(st.x.lp.len(), |i, _| sigma * mu - st.x.lp[i] * st.s.lp[i] - aff.dx.lp[i] * aff.ds.lp[i]);
        let rho = sigma * mu - st.tau * st.kappa - aff.dtau * aff.dkappa;
        let dir = it.direction(1.0 - sigma, &q_cor, &t_cor, rho);
        let alpha = (STEP_FRACTION * it.max_step(&dir)).min(1.0);
        if !alpha.is_finite() || alpha < 1e-10 {
            stalls += 1;
            if stalls > 3 {
                status = SolveStatus::Numerical;
                break;
            }
        } else {
            stalls = 0;
        }

        st.x.axpy(alpha, &dir.dx);
        st.s.axpy(alpha, &dir.ds);
        st.y.axpy(alpha, &dir.dy, 1.0);
        st.tau += alpha * dir.dtau;
        st.kappa += alpha * dir.dkappa;
        st.x.symmetrize();
        st.s.symmetrize();
    }

    if status == SolveStatus::MaxIter || status == SolveStatus::Numerical {
        if let Some((_, b)) = best {
            st = b;
        }
    }
    finish(problem, cp, &data, &keep, &st, status, iterations)
}

fn finish(
    problem: &SdpProblem,
    cp: &Compiled,
    data: &Data,
    keep: &[usize],
    st: &State,
    status: SolveStatus,
    iterations: usize,
) -> SdpSolution {
    let (scale_x, scale_y) = match status {
        // certificates are reported unnormalized
        SolveStatus::Infeasible | SolveStatus::Unbounded => (1.0, 1.0),
        _ => (1.0 / st.tau, 1.0 / st.tau),
    };
    let ax = data.apply(&st.x);
    let aty = data.adjoint(&st.y);
    let rp = (&data.b * st.tau - &ax).norm() / st.tau / (1.0 + data.b.norm());
    let mut rd = data.c.clone();
    rd.psd.iter_mut().for_each(|m| *m *= st.tau);
    rd.lp *= st.tau;
    rd.free *= st.tau;
    rd.axpy(-1.0, &aty);
    rd.axpy(-1.0, &st.s);
    let dres = rd.norm() / st.tau / (1.0 + data.c.norm());
    let pcost = data.c.dot(&st.x) / st.tau;
    let dcost = data.b.dot(&st.y) / st.tau;

    let mut xs = Vec::with_capacity(problem.blocks.len());
    let mut ss = Vec::with_capacity(problem.blocks.len());
    for (bi, blk) in problem.blocks.iter().enumerate() {
        match cp.slots[bi] {
            Slot::Psd(p) => {
                xs.push(BlockValue::Matrix(unembed(&st.x.psd[p], scale_x)));
                ss.push(BlockValue::Matrix(unembed(&st.s.psd[p], 2.0 * scale_y)));
            }
            Slot::Lp(off) => {
                xs.push(BlockValue::Vector((0..blk.dim).map(|k| st.x.lp[off + k] * scale_x).collect()));
                ss.push(BlockValue::Vector((0..blk.dim).map(|k| st.s.lp[off + k] * scale_y).collect()));
            }
            Slot::Free(off) => {
                xs.push(BlockValue::Vector((0..blk.dim).map(|k| st.x.free[off + k] * scale_x).collect()));
                ss.push(BlockValue::Vector(vec![0.0; blk.dim]));
            }
        }
    }
    let mut y = vec![0.0; problem.equalities.len()];
    for (pos, &k) in keep.iter().enumerate() {
        let orig = cp.row_origin[k];
        y[orig] = cp.sign * st.y[pos] * cp.row_scale[k] * scale_y;
    }
    SdpSolution {
        status,
        primal_value: cp.sign * pcost,
        dual_value: cp.sign * dcost,
        x: xs,
        s: ss,
        y,
        residuals: Residuals { primal: rp, dual: dres, gap: (pcost - dcost).abs() },
        iterations,
    }
}

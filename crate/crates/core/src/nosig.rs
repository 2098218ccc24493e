//! Quantum no-signalling correlations `Π: A_i ⊗ B_i → A_o ⊗ B_o`, stored as
//! Choi matrices on `A_i ⊗ A_o ⊗ B_i ⊗ B_o`.

use crate::matcore::{
    identity, kron, partial_trace_general, permute_subsystems, real, traceless_hermitian_basis, CMatrix,
    HermitianMatrix, C64,
};
use crate::model::{Channel, NCGraph};
use crate::quantities::{integer_part, sigma_channel, upsilon, upsilon_primal_model, Rounding};
use crate::sdp::{self, value_of, SolveOptions};
use crate::{Error, Result};

/// Tolerance of [`check_ns`].
pub const NS_TOL: f64 = 1e-8;

const A_I: usize = 0;
const A_O: usize = 1;
const B_I: usize = 2;
const B_O: usize = 3;

/// `E` and `F` blocks of `Ω = (1/M) D⊗E + (1/M)(1−D)⊗F`.
#[derive(Clone, Debug)]
pub struct CanonicalBlocks {
    pub m: usize,
    pub e: HermitianMatrix,
    /// Absent for `M = 1`.
    pub f: Option<HermitianMatrix>,
}

#[derive(Clone, Debug)]
pub struct NsCorrelation {
    /// `(d_Ai, d_Ao, d_Bi, d_Bo)`.
    pub dims: (usize, usize, usize, usize),
    pub omega: HermitianMatrix,
    /// Classical flags for `[A_i, A_o, B_i, B_o]`.
    pub classical_ports: [bool; 4],
    pub canonical: Option<CanonicalBlocks>,
    /// Set for the `M = 1` convention.
    pub trivial: bool,
    pub notes: Vec<String>,
}

impl NsCorrelation {
    pub fn new(dims: (usize, usize, usize, usize), omega: CMatrix) -> Result<Self> {
        let omega = HermitianMatrix::with_factors(omega, vec![dims.0, dims.1, dims.2, dims.3])?;
        Ok(Self { dims, omega, classical_ports: [false; 4], canonical: None, trivial: false, notes: Vec::new() })
    }

    fn factor_dims(&self) -> [usize; 4] {
        [self.dims.0, self.dims.1, self.dims.2, self.dims.3]
    }

    /// Product correlation `Ω = J_A ⊗ J_B` of a channel `A_i → A_o` and a channel `B_i → B_o`.
    pub fn product(alice: &Channel, bob: &Channel) -> Result<Self> {
        let dims = (alice.d_in, alice.d_out, bob.d_in, bob.d_out);
        Self::new(dims, kron(alice.choi.matrix(), bob.choi.matrix()))
    }

    /// Correlation whose Choi matrix is that of a single channel `A_i ⊗ B_i → A_o ⊗ B_o`.
    pub fn from_joint_channel(ch: &Channel, dims: (usize, usize, usize, usize)) -> Result<Self> {
        if ch.d_in != dims.0 * dims.2 || ch.d_out != dims.1 * dims.3 {
            return Err(Error::dim(format!("channel {}→{} does not match ports {dims:?}", ch.d_in, ch.d_out)));
        }
        // (A_i, B_i, A_o, B_o) → (A_i, A_o, B_i, B_o)
        let omega = permute_subsystems(ch.choi.matrix(), &[dims.0, dims.2, dims.1, dims.3], &[0, 2, 1, 3])?;
        Self::new(dims, omega)
    }

    /// Classical box with `q[x][y][a][b] = Q(ab|xy)`, encoded as a diagonal Ω.
    pub fn from_classical_box(q: &[Vec<Vec<Vec<f64>>>]) -> Result<Self> {
        let (nx, ny, na, nb) = box_dims(q)?;
        let dims = (nx, na, ny, nb);
        let d = nx * na * ny * nb;
        let mut omega = CMatrix::zeros(d, d);
        for x in 0..nx {
            for y in 0..ny {
                for a in 0..na {
                    for b in 0..nb {
                        let k = ((x * na + a) * ny + y) * nb + b;
                        omega[(k, k)] = real(q[x][y][a][b]);
                    }
                }
            }
        }
        let mut c = Self::new(dims, omega)?;
        c.classical_ports = [true; 4];
        Ok(c)
    }

    /// `Ω ↦ (U_Ai ⊗ U_Ao ⊗ U_Bi ⊗ U_Bo) Ω (…)†`.
    pub fn conjugate_by(&self, locals: [&CMatrix; 4]) -> Result<CMatrix> {
        let dims = self.factor_dims();
        for (k, u) in locals.iter().enumerate() {
            if u.shape() != (dims[k], dims[k]) {
                return Err(Error::dim(format!("local unitary {k} is {}x{}", u.nrows(), u.ncols())));
            }
        }
        let u = kron(&kron(&kron(locals[0], locals[1]), locals[2]), locals[3]);
        Ok(&u * self.omega.matrix() * u.adjoint())
    }
}

fn box_dims(q: &[Vec<Vec<Vec<f64>>>]) -> Result<(usize, usize, usize, usize)> {
    let nx = q.len();
    let ny = q.first().map_or(0, Vec::len);
    let na = q.first().and_then(|r| r.first()).map_or(0, Vec::len);
    let nb = q.first().and_then(|r| r.first()).and_then(|r| r.first()).map_or(0, Vec::len);
    let ok = nx > 0
        && ny > 0
        && na > 0
        && nb > 0
        && q.iter().all(|r| r.len() == ny && r.iter().all(|s| s.len() == na && s.iter().all(|t| t.len() == nb)));
    if ok {
        Ok((nx, ny, na, nb))
    } else {
        Err(Error::dim("classical box must be a non-empty rectangular array q[x][y][a][b]"))
    }
}

/// Classical no-signalling residual of a box `Q(ab|xy)`: deviations of the
/// marginals `Σ_a Q(ab|xy)` across `x` and `Σ_b Q(ab|xy)` across `y`, and of
/// normalization.
pub fn classical_box_residual(q: &[Vec<Vec<Vec<f64>>>]) -> Result<f64> {
    let (nx, ny, na, nb) = box_dims(q)?;
    let mut worst = 0.0f64;
    for x in 0..nx {
        for y in 0..ny {
            let total: f64 = q[x][y].iter().flatten().sum();
            worst = worst.max((total - 1.0).abs());
            worst = worst.max(-q[x][y].iter().flatten().fold(0.0, |m: f64, &v| m.min(v)));
            for b in 0..nb {
                let bob: f64 = (0..na).map(|a| q[x][y][a][b]).sum();
                let bob0: f64 = (0..na).map(|a| q[0][y][a][b]).sum();
                worst = worst.max((bob - bob0).abs());
            }
            for a in 0..na {
                let alice: f64 = (0..nb).map(|b| q[x][y][a][b]).sum();
                let alice0: f64 = (0..nb).map(|b| q[x][0][a][b]).sum();
                worst = worst.max((alice - alice0).abs());
            }
        }
    }
    Ok(worst)
}

/// Per-family maximal residuals of the no-signalling constraints.
#[derive(Clone, Copy, Debug)]
pub struct NsCheck {
    /// `max(0, −λ_min(Ω))`.
    pub cp: f64,
    /// `max |tr_{AoBo} Ω − 1|`.
    pub tp: f64,
    /// `max_X max |tr_{AiAo} Ω (X^T ⊗ 1)|` over a traceless Hermitian basis of `A_i`.
    pub a_to_b: f64,
    /// `max_Y max |tr_{BiBo} Ω (1 ⊗ Y^T)|` over a traceless Hermitian basis of `B_i`.
    pub b_to_a: f64,
    pub tol: f64,
}

impl NsCheck {
    pub fn cp_ok(&self) -> bool {
        self.cp <= self.tol
    }
    pub fn tp_ok(&self) -> bool {
        self.tp <= self.tol
    }
    pub fn a_to_b_ok(&self) -> bool {
        self.a_to_b <= self.tol
    }
    pub fn b_to_a_ok(&self) -> bool {
        self.b_to_a <= self.tol
    }
    pub fn passes(&self) -> bool {
        self.cp_ok() && self.tp_ok() && self.a_to_b_ok() && self.b_to_a_ok()
    }
    pub fn max_residual(&self) -> f64 {
        self.cp.max(self.tp).max(self.a_to_b).max(self.b_to_a)
    }
}

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Embeds `x` on factor `at` of a four-party space.
fn local(x: &CMatrix, at: usize, dims: &[usize; 4]) -> CMatrix {
    (0..4).fold(CMatrix::from_element(1, 1, real(1.0)), |acc, k| {
        if k == at {
            kron(&acc, x)
        } else {
            kron(&acc, &identity(dims[k]))
        }
    })
}

/// Evaluates CP, TP, A↛B and B↛A at tolerance [`NS_TOL`].
pub fn check_ns(c: &NsCorrelation) -> Result<NsCheck> {
    let dims = c.factor_dims();
    let total: usize = dims.iter().product();
    if c.omega.dim() != total {
        return Err(Error::dim(format!("Ω has dimension {} but ports {:?} give {total}", c.omega.dim(), dims)));
    }
    let omega = c.omega.matrix();
    let cp = (-c.omega.min_eigenvalue()).max(0.0);

    let marg = partial_trace_general(omega, &dims, &[A_I, B_I])?;
    let tp = max_entry(&(marg - identity(dims[A_I] * dims[B_I])));

    let mut a_to_b = 0.0f64;
    for x in traceless_hermitian_basis(dims[A_I]) {
        let w = omega * local(&x.transpose(), A_I, &dims);
        a_to_b = a_to_b.max(max_entry(&partial_trace_general(&w, &dims, &[B_I, B_O])?));
    }
    let mut b_to_a = 0.0f64;
    for y in traceless_hermitian_basis(dims[B_I]) {
        let w = omega * local(&y.transpose(), B_I, &dims);
        b_to_a = b_to_a.max(max_entry(&partial_trace_general(&w, &dims, &[A_I, A_O])?));
    }
    Ok(NsCheck { cp, tp, a_to_b, b_to_a, tol: NS_TOL })
}

/// `Ω = (1/M)[Σ_m |mm⟩⟨mm| ⊗ E + Σ_{m≠m'} |mm'⟩⟨mm'| ⊗ F]` on `M_a ⊗ M_b ⊗ X ⊗ Y`,
/// then reordered by `order`.
fn canonical_omega(
    m: usize,
    e: &CMatrix,
    f: Option<&CMatrix>,
    dx: usize,
    dy: usize,
    order: &[usize],
) -> Result<CMatrix> {
    let mut d = CMatrix::zeros(m * m, m * m);
    for k in 0..m {
        d[(k * m + k, k * m + k)] = real(1.0);
    }
    let scale = real(1.0 / m as f64);
    let mut omega = kron(&d, e) * scale;
    if let Some(f) = f {
        let mut off = CMatrix::zeros(m * m, m * m);
        for k in 0..m * m {
            if k / m != k % m {
                off[(k, k)] = real(1.0);
            }
        }
        omega += kron(&off, f) * scale;
    }
    permute_subsystems(&omega, &[m, m, dx, dy], order)
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * real(0.5)
}

/// Capacity correlation `Ω_{M_a A B M_b}` transmitting `M` messages with zero
/// error through any channel whose graph is `K`. Ports: `A_i = M_a`, `A_o = A`,
/// `B_i = B`, `B_o = M_b`.
pub fn build_capacity_ns(k: &NCGraph, m: usize, opts: &SolveOptions) -> Result<NsCorrelation> {
    if m == 0 {
        return Err(Error::spec("M must be at least 1"));
    }
    let (d_a, d_b) = (k.d_a, k.d_b);
    let ups = upsilon(k, opts)?.require()?;
    let floor = integer_part(ups.value, Rounding::Floor);
    if m as i64 > floor {
        return Err(Error::Infeasible(format!("M = {m} exceeds floor(Υ) = {floor} (Υ = {:.9})", ups.value)));
    }
    let dims = (m, d_a, d_b, m);
    // (M_a, M_b, A, B) → (M_a, A, B, M_b)
    let order = [0, 2, 3, 1];

    if m == 1 {
        let s = ups.witness("S").ok_or_else(|| Error::Missing("Υ witness S".into()))?;
        let sigma = hermitize(s) * real(1.0 / s.trace().re);
        let e = kron(&sigma, &identity(d_b));
        let omega = canonical_omega(1, &e, None, d_a, d_b, &order)?;
        let mut c = NsCorrelation::new(dims, omega)?;
        c.classical_ports = [true, false, false, true];
        c.trivial = true;
        c.canonical = Some(CanonicalBlocks { m, e: HermitianMatrix::with_factors(e, vec![d_a, d_b])?, f: None });
        c.notes.push("M = 1: trivial correlation E = σ⊗1 without an F block".into());
        return Ok(c);
    }

    // Zero error needs tr F J̄ = 0, so the face is taken with respect to P̄.
    let pbar = k.p.matrix().map(|z| z.conj());
    let um = upsilon_primal_model(&pbar, d_a, d_b, Some(m as f64));
    let sol = sdp::solve(&um.model.build(), opts)?.require_optimal("capacity correlation")?;
    let mut s = hermitize(&value_of(&sol, &um.s));
    s *= real(m as f64 / s.trace().re);
    let mut e = hermitize(&value_of(&sol, &um.e));
    let defect = identity(d_b) - partial_trace_general(&e, &[d_a, d_b], &[1])?;
    e += kron(&identity(d_a), &defect) * real(1.0 / d_a as f64);
    let f = (kron(&s, &identity(d_b)) - &e) * real(1.0 / (m - 1) as f64);

    let omega = canonical_omega(m, &e, Some(&f), d_a, d_b, &order)?;
    let mut c = NsCorrelation::new(dims, omega)?;
    c.classical_ports = [true, false, false, true];
    c.canonical = Some(CanonicalBlocks {
        m,
        e: HermitianMatrix::with_factors(e, vec![d_a, d_b])?,
        f: Some(HermitianMatrix::with_factors(f, vec![d_a, d_b])?),
    });
    Ok(c)
}

/// Simulation correlation reproducing `N` from `M` noiseless messages.
/// Ports: `A_i = A`, `A_o = M_a`, `B_i = M_b`, `B_o = B`.
pub fn build_simulation_ns(n: &Channel, m: usize, opts: &SolveOptions) -> Result<NsCorrelation> {
    if m == 0 {
        return Err(Error::spec("M must be at least 1"));
    }
    let (d_a, d_b) = (n.d_in, n.d_out);
    let sig = sigma_channel(n, opts)?.require()?;
    let ceil = integer_part(sig.value, Rounding::Ceil);
    if (m as i64) < ceil {
        return Err(Error::Infeasible(format!("M = {m} is below ceil(Σ) = {ceil} (Σ = {:.9})", sig.value)));
    }
    let dims = (d_a, m, m, d_b);
    // (M_a, M_b, A, B) → (A, M_a, M_b, B)
    let order = [2, 0, 1, 3];
    let j = n.choi.matrix().clone();

    if m == 1 {
        let omega = canonical_omega(1, &j, None, d_a, d_b, &order)?;
        let mut c = NsCorrelation::new(dims, omega)?;
        c.classical_ports = [false, true, true, false];
        c.trivial = true;
        c.canonical = Some(CanonicalBlocks { m, e: n.choi.clone(), f: None });
        c.notes.push("M = 1: the channel is constant and Ω is its Choi matrix".into());
        return Ok(c);
    }

    let t = hermitize(sig.witness("T").ok_or_else(|| Error::Missing("Σ witness T".into()))?);
    let pad = (m as f64 - t.trace().re) / d_b as f64;
    let t_padded = t + identity(d_b) * real(pad);
    let f = (kron(&identity(d_a), &t_padded) - &j) * real(1.0 / (m - 1) as f64);

    let omega = canonical_omega(m, &j, Some(&f), d_a, d_b, &order)?;
    let mut c = NsCorrelation::new(dims, omega)?;
    c.classical_ports = [false, true, true, false];
    c.canonical =
        Some(CanonicalBlocks { m, e: n.choi.clone(), f: Some(HermitianMatrix::with_factors(f, vec![d_a, d_b])?) });
    c.notes.push(format!("γ = T'/M with tr T' = {m}"));
    Ok(c)
}

fn check_link(c: &NsCorrelation, n: &Channel) -> Result<()> {
    if n.d_in != c.dims.1 || n.d_out != c.dims.2 {
        return Err(Error::dim(format!(
            "channel {}→{} does not connect A_o ({}) to B_i ({})",
            n.d_in, n.d_out, c.dims.1, c.dims.2
        )));
    }
    Ok(())
}

/// The map `A_i → B_o` obtained by plugging `N: A_o → B_i` into Π, evaluated
/// as in teleportation: `Π` acts on the input and half of `Φ_{B_i B_i'}`, `N`
/// acts on `A_o`, and the result is contracted with `Φ_{B B_i'}`.
pub fn compose(c: &NsCorrelation, n: &Channel) -> Result<Channel> {
    check_link(c, n)?;
    let [dai, dao, dbi, dbo] = c.factor_dims();
    let omega = c.omega.matrix();
    let idx = |a: usize, x: usize, b: usize, y: usize| ((a * dao + x) * dbi + b) * dbo + y;
    let lifted: Vec<CMatrix> = n.kraus.iter().map(|k| kron(k, &identity(dbo))).collect();

    let mut choi = CMatrix::zeros(dai * dbo, dai * dbo);
    for a in 0..dai {
        for a2 in 0..dai {
            let mut out = CMatrix::zeros(dbo, dbo);
            for b in 0..dbi {
                for b2 in 0..dbi {
                    // Π(|a b⟩⟨a2 b2|) on A_o ⊗ B_o
                    let block = CMatrix::from_fn(dao * dbo, dao * dbo, |r, s| {
                        omega[(idx(a, r / dbo, b, r % dbo), idx(a2, s / dbo, b2, s % dbo))]
                    });
                    let sent = lifted
                        .iter()
                        .fold(CMatrix::zeros(dbi * dbo, dbi * dbo), |acc, l| acc + l * &block * l.adjoint());
                    out += sent.view((b * dbo, b2 * dbo), (dbo, dbo));
                }
            }
            choi.view_mut((a * dbo, a2 * dbo), (dbo, dbo)).copy_from(&out);
        }
    }
    Channel::from_choi(&choi, dai, dbo)
}

/// Link product `tr_{A_o B_i}[Ω (1 ⊗ J̄_N ⊗ 1)]`; agrees with [`compose`].
pub fn compose_link(c: &NsCorrelation, n: &Channel) -> Result<Channel> {
    check_link(c, n)?;
    let dims = c.factor_dims();
    let jbar = n.choi.matrix().map(|z| z.conj());
    let mid = kron(&kron(&identity(dims[A_I]), &jbar), &identity(dims[B_O]));
    let choi = partial_trace_general(&(c.omega.matrix() * mid), &dims, &[A_I, B_O])?;
    Channel::from_choi(&choi, dims[A_I], dims[B_O])
}

/// Noiseless classical channel on `m` symbols.
pub fn noiseless_bits(m: usize) -> Result<Channel> {
    let rows: Vec<Vec<f64>> = (0..m).map(|x| (0..m).map(|y| if x == y { 1.0 } else { 0.0 }).collect()).collect();
    Channel::classical(&rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyKind {
    Code,
    Simulation,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub kind: VerifyKind,
    pub m: usize,
    pub ns: NsCheck,
    pub composed: Channel,
    /// `max_{m≠m'} p(m'|m)` of the composed code.
    pub max_off_diagonal: Option<f64>,
    /// `min_m p(m|m)` of the composed code.
    pub min_success: Option<f64>,
    /// `‖J_composed − J_N‖_F` for simulations.
    pub choi_distance: Option<f64>,
    /// `|tr F J̄|` for codes.
    pub orthogonality: Option<f64>,
    /// Difference between [`compose`] and [`compose_link`].
    pub compose_crosscheck: f64,
    pub trivial: bool,
    pub notes: Vec<String>,
}

/// Tolerance for transition probabilities and Choi distances in [`VerifyReport::passed`].
pub const VERIFY_TOL: f64 = 1e-6;
/// Looser tolerance on the no-signalling residuals of constructed correlations.
pub const BUILD_NS_TOL: f64 = 1e-7;

impl VerifyReport {
    pub fn passed(&self) -> bool {
        let ns = self.ns.max_residual() <= BUILD_NS_TOL;
        let tol = |v: Option<f64>| v.is_none_or(|x| x <= VERIFY_TOL);
        let success = self.min_success.is_none_or(|p| p >= 1.0 - VERIFY_TOL);
        ns && tol(self.max_off_diagonal) && tol(self.choi_distance) && tol(self.orthogonality) && success
    }
}

/// Builds the capacity correlation for `M`, composes it with `N`, and reports
/// the transition probabilities of the resulting `M`-message channel.
pub fn verify_code(k: &NCGraph, n: &Channel, m: usize, opts: &SolveOptions) -> Result<VerifyReport> {
    if (k.d_a, k.d_b) != (n.d_in, n.d_out) {
        return Err(Error::dim("channel and graph dimensions differ"));
    }
    let q = identity(k.joint_dim()) - k.p.matrix();
    let outside = (q * n.choi.matrix()).norm();
    if outside > 1e-8 {
        return Err(Error::spec(format!("channel Kraus operators leave the graph (residual {outside:.3e})")));
    }
    let c = build_capacity_ns(k, m, opts)?;
    let ns = check_ns(&c)?;
    let composed = compose(&c, n)?;
    let linked = compose_link(&c, n)?;
    let j = composed.choi.matrix();
    let mut off = 0.0f64;
    let mut success = f64::INFINITY;
    for x in 0..m {
        for y in 0..m {
            let p = j[(x * m + y, x * m + y)].re;
            if x == y {
                success = success.min(p);
            } else {
                off = off.max(p.abs());
            }
        }
    }
    let orthogonality = c.canonical.as_ref().and_then(|b| b.f.as_ref()).map(|f| {
        let jbar = n.choi.matrix().map(|z| z.conj());
        (f.matrix() * jbar).trace().norm()
    });
    Ok(VerifyReport {
        kind: VerifyKind::Code,
        m,
        ns,
        compose_crosscheck: (composed.choi.matrix() - linked.choi.matrix()).norm(),
        composed,
        max_off_diagonal: Some(off),
        min_success: Some(success),
        choi_distance: None,
        orthogonality: Some(orthogonality.unwrap_or(0.0)),
        trivial: c.trivial,
        notes: c.notes,
    })
}

/// Builds the simulation correlation for `M`, composes it with the `M`-symbol
/// noiseless channel, and reports the distance to `N`'s Choi matrix.
pub fn verify_simulation(n: &Channel, m: usize, opts: &SolveOptions) -> Result<VerifyReport> {
    let c = build_simulation_ns(n, m, opts)?;
    let ns = check_ns(&c)?;
    let id = noiseless_bits(m)?;
    let composed = compose(&c, &id)?;
    let linked = compose_link(&c, &id)?;
    Ok(VerifyReport {
        kind: VerifyKind::Simulation,
        m,
        ns,
        compose_crosscheck: (composed.choi.matrix() - linked.choi.matrix()).norm(),
        choi_distance: Some(composed.choi_distance(n)),
        composed,
        max_off_diagonal: None,
        min_success: None,
        orthogonality: None,
        trivial: c.trivial,
        notes: c.notes,
    })
}

/// Largest trace deviation `max_ρ |tr M(ρ) − 1|` over basis inputs of a composed map.
pub fn trace_deviation(ch: &Channel) -> f64 {
    let marg = partial_trace_general(ch.choi.matrix(), &[ch.d_in, ch.d_out], &[0]).expect("two factors");
    let dev = marg - identity(ch.d_in);
    crate::matcore::operator_norm(&dev)
}

/// Composes `Ω` with every deterministic classical channel `A_o → B_i`
/// (noiseless bits up to relabelling) and returns the largest trace deviation.
/// Positive values witness B→A signalling.
pub fn signalling_witness(c: &NsCorrelation) -> Result<f64> {
    let (dao, dbi) = (c.dims.1, c.dims.2);
    let count = (dbi as f64).powi(dao as i32);
    if count > 4096.0 {
        return Err(Error::TooLarge { dim: count as usize, limit: 4096 });
    }
    let mut best = 0.0f64;
    for code in 0..count as usize {
        let mut kraus = Vec::with_capacity(dao);
        let mut rest = code;
        for x in 0..dao {
            let mut e = CMatrix::zeros(dbi, dao);
            e[(rest % dbi, x)] = C64::new(1.0, 0.0);
            rest /= dbi;
            kraus.push(e);
        }
        let ch = Channel::from_kraus(kraus, dao, dbi)?;
        best = best.max(trace_deviation(&compose(c, &ch)?));
    }
    Ok(best)
}

#[cfg(test)]
mod tests;

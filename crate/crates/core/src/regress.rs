//! The acceptance suite: criteria 1–11 evaluated against reference values.

use std::time::Instant;

use crate::matcore::{max_abs, HermitianMatrix};
use crate::model::{Channel, Graph, NCGraph};
use crate::nosig::{
    build_capacity_ns, build_simulation_ns, check_ns, compose, noiseless_bits, signalling_witness, NsCorrelation,
    BUILD_NS_TOL,
};
use crate::quantities::{
    aram, aram_hat, aram_tilde, binary_entropy, cmin_e_amplitude_damping, cmin_e_two_state, feasibility,
    fractional_packing, lovasz_theta, sigma_channel, sigma_graph, superdense_bound, support_indicator,
    two_state_report, upsilon, FeasibilityCertificate, QuantityResult,
};
use crate::random;
use crate::sdp::SolveOptions;
use crate::Result;

pub const DEFAULT_SEED: u64 = 20;
pub const CRITERIA: std::ops::RangeInclusive<u32> = 1..=11;

#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    /// One line per individual check.
    pub details: Vec<String>,
    pub seconds: f64,
}

impl CriterionOutcome {
    /// `criterion  3 PASS  amplitude damping r = 0.5  (1.23 s)`
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {}  {}  ({:.2} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.seconds
        )
    }

    pub fn failures(&self) -> impl Iterator<Item = &String> {
        self.details.iter().filter(|d| d.starts_with("FAIL"))
    }
}

#[derive(Default)]
struct Checks {
    lines: Vec<String>,
    ok: bool,
}

impl Checks {
    fn new() -> Self {
        Self { lines: Vec::new(), ok: true }
    }

    fn holds(&mut self, label: &str, cond: bool, detail: String) {
        self.ok &= cond;
        self.lines.push(format!("{} {label}: {detail}", if cond { "ok  " } else { "FAIL" }));
    }

    fn close(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        let err = (got - want).abs();
        self.holds(label, err <= tol, format!("{got:.10} vs {want:.10} (|Δ| = {err:.2e}, tol {tol:.0e})"));
    }

    fn at_least(&mut self, label: &str, got: f64, bound: f64) {
        self.holds(label, got >= bound, format!("{got:.10} ≥ {bound:.10}"));
    }

    fn at_most(&mut self, label: &str, got: f64, bound: f64) {
        self.holds(label, got <= bound, format!("{got:.10} ≤ {bound:.10}"));
    }

    /// Records that both solves finished and agree.
    fn solved(&mut self, r: &QuantityResult) {
        if !r.ok() {
            self.holds(&r.name, false, format!("status {:?}, gap {:.2e}, {:?}", r.status, r.crosscheck_gap, r.notes));
        }
    }
}

/// Runs one criterion; an error inside a criterion is reported as a failed check.
pub fn run_criterion(id: u32, seed: u64, opts: &SolveOptions) -> CriterionOutcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let (title, res): (&'static str, Result<()>) = match id {
        1 => ("two-state family at α² = 0.75", c1(&mut c, opts)),
        2 => ("two-copy two-state values", c2(&mut c, opts)),
        3 => ("amplitude damping r = 0.5", c3(&mut c, opts)),
        4 => ("Lovász number and umbrella representation", c4(&mut c, opts)),
        5 => ("noiseless channels", c5(&mut c, opts)),
        6 => ("classical collapse", c6(&mut c, seed, opts)),
        7 => ("multiplicativity and additivity", c7(&mut c, seed, opts)),
        8 => ("primal/dual agreement and A·Â = 1", c8(&mut c, seed, opts)),
        9 => ("no-signalling end to end", c9(&mut c, opts)),
        10 => ("feasibility", c10(&mut c, seed)),
        11 => ("two-state sweep and β² → 0 limits", c11(&mut c, opts)),
        _ => ("unknown criterion", Err(crate::Error::spec(format!("no criterion {id}")))),
    };
    if let Err(e) = res {
        c.holds("error", false, e.to_string());
    }
    CriterionOutcome { id, title, passed: c.ok, details: c.lines, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_all(seed: u64, opts: &SolveOptions) -> Vec<CriterionOutcome> {
    CRITERIA.map(|id| run_criterion(id, seed, opts)).collect()
}

fn two_state_alpha(alpha_sq: f64) -> f64 {
    alpha_sq.sqrt()
}

fn c1(c: &mut Checks, opts: &SolveOptions) -> Result<()> {
    let alpha = two_state_alpha(0.75);
    let k = NCGraph::two_state(alpha)?;
    let n = Channel::two_state(alpha)?;
    let u = upsilon(&k, opts)?;
    let a = aram(&k, opts)?;
    let s = sigma_graph(&k, opts)?;
    let sc = sigma_channel(&n, opts)?;
    for r in [&u, &a, &s, &sc] {
        c.solved(r);
    }
    let sigma = 1.0 + 3f64.sqrt() / 2.0;
    c.close("Υ(K)", u.value, 1.0, 1e-6);
    c.close("A(K)", a.value, 4.0 / 3.0, 1e-6);
    c.close("Σ(K)", s.value, sigma, 1e-6);
    c.close("Σ(channel)", sc.value, sigma, 1e-6);
    // H2(1/4) = 2 − (3/4) log2 3
    c.close("C_minE", cmin_e_two_state(alpha)?, 2.0 - 0.75 * 3f64.log2(), 1e-9);
    Ok(())
}

fn c2(c: &mut Checks, opts: &SolveOptions) -> Result<()> {
    let boundary = two_state_alpha((1.0 + 0.5f64.sqrt()) / 2.0);
    let kk = NCGraph::two_state(boundary)?.power(2)?;
    let u = upsilon(&kk, opts)?;
    c.solved(&u);
    c.close("Υ(K⊗K) at the boundary", u.value, 4.0 / 3.0, 1e-5);

    let alpha = two_state_alpha(0.75);
    let kk = NCGraph::two_state(alpha)?.power(2)?;
    let u = upsilon(&kk, opts)?;
    c.solved(&u);
    let report = two_state_report(alpha, 2)?;
    let ansatz = report.ansatz.as_ref();
    c.holds(
        "ansatz feasible to 1e-8",
        ansatz.is_some_and(|a| a.feasible),
        format!("{:?}", ansatz.map(|a| (a.positivity, a.upper, a.normalization, a.orthogonality))),
    );
    c.close("ansatz lower bound", report.lower_bound.unwrap_or(f64::NAN), 1.6, 1e-12);
    c.at_least("Υ(K⊗K) at α² = 0.75", u.value, 1.6 - 1e-6);
    c.at_most("Υ(K⊗K) at α² = 0.75", u.value, 16.0 / 9.0 + 1e-6);

    let kk = NCGraph::two_state(two_state_alpha(0.9))?.power(2)?;
    let u = upsilon(&kk, opts)?;
    c.solved(&u);
    c.close("Υ(K⊗K) at α² = 0.9", u.value, 1.0, 1e-6);
    Ok(())
}

fn c3(c: &mut Checks, opts: &SolveOptions) -> Result<()> {
    let k = NCGraph::amplitude_damping(0.5)?;
    let n = Channel::amplitude_damping(0.5)?;
    let a = aram(&k, opts)?;
    let at = aram_tilde(&k, opts)?;
    let s = sigma_graph(&k, opts)?;
    let sc = sigma_channel(&n, opts)?;
    for r in [&a, &at, &s, &sc] {
        c.solved(r);
    }
    c.close("A", a.value, 1.5, 1e-6);
    c.close("Ã", at.value, 2.25, 1e-6);
    c.close("superdense bound", superdense_bound(&k).value, 1.2, 1e-12);
    c.close("C_minE", cmin_e_amplitude_damping(0.5)?, 1.0, 1e-6);
    c.close("Σ(K) vs Σ(channel)", s.value, sc.value, 1e-6);
    c.at_least("Σ(K)", s.value, 2.25 - 1e-6);
    Ok(())
}

fn c4(c: &mut Checks, opts: &SolveOptions) -> Result<()> {
    let t = lovasz_theta(&Graph::cycle(5), opts)?;
    c.solved(&t);
    c.close("ϑ(C5)", t.value, 5f64.sqrt(), 1e-5);
    for n in [2, 3, 4, 5] {
        let t = lovasz_theta(&Graph::complete(n), opts)?;
        c.solved(&t);
        c.close(&format!("ϑ(K{n})"), t.value, 1.0, 1e-7);
        let t = lovasz_theta(&Graph::empty(n), opts)?;
        c.solved(&t);
        c.close(&format!("ϑ(empty {n})"), t.value, n as f64, 1e-6);
    }
    let a = aram(&NCGraph::umbrella_c5(), opts)?;
    c.solved(&a);
    c.close("A(umbrella cq-graph)", a.value, 5f64.sqrt(), 1e-4);
    Ok(())
}

fn c5(c: &mut Checks, opts: &SolveOptions) -> Result<()> {
    for l in [2, 3] {
        let k = NCGraph::noiseless_classical(l)?;
        let u = upsilon(&k, opts)?;
        let s = sigma_graph(&k, opts)?;
        c.solved(&u);
        c.solved(&s);
        c.close(&format!("Υ(Δ{l})"), u.value, l as f64, 1e-6);
        c.close(&format!("Σ(Δ{l})"), s.value, l as f64, 1e-6);
    }
    let u = upsilon(&NCGraph::noiseless_quantum(2)?, opts)?;
    c.solved(&u);
    c.close("Υ(ℂ1)", u.value, 4.0, 1e-6);
    let s = sigma_channel(&Channel::identity(2), opts)?;
    c.solved(&s);
    c.close("Σ(id_2)", s.value, 4.0, 1e-6);
    Ok(())
}

fn c6(c: &mut Checks, seed: u64, opts: &SolveOptions) -> Result<()> {
    use rand::Rng;
    let mut rng = random::rng(seed);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let nx = rng.random_range(2..=4);
        let ny = rng.random_range(2..=4);
        let p = random::classical(&mut rng, nx, ny);
        let k = NCGraph::from_classical(&p)?;
        let vals = [
            upsilon(&k, opts)?,
            sigma_graph(&k, opts)?,
            aram(&k, opts)?,
            fractional_packing(&support_indicator(&p), opts)?,
        ];
        for r in &vals {
            c.solved(r);
        }
        let lo = vals.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
        let hi = vals.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(hi - lo);
        if hi - lo > 1e-6 {
            c.holds(
                &format!("instance {i}"),
                false,
                format!("Υ, Σ, A, α* = {:?}", vals.iter().map(|r| r.value).collect::<Vec<_>>()),
            );
        }
    }
    c.at_most("max spread of Υ, Σ, A, α* over 20 channels", worst, 1e-6);

    // pentagon typewriter: x ↦ {x, x+1 mod 5}
    let pent: Vec<Vec<f64>> =
        (0..5).map(|x| (0..5).map(|y| if y == x || y == (x + 1) % 5 { 1.0 } else { 0.0 }).collect()).collect();
    let a = fractional_packing(&pent, opts)?;
    c.solved(&a);
    c.close("α*(pentagon)", a.value, 2.5, 1e-7);
    Ok(())
}

fn c7(c: &mut Checks, seed: u64, opts: &SolveOptions) -> Result<()> {
    use rand::Rng;
    let mut rng = random::rng(seed.wrapping_add(7));
    let (mut sig_dev, mut ups_viol, mut sub_viol) = (0.0f64, 0.0f64, 0.0f64);
    let mut pairs: Vec<(NCGraph, NCGraph)> = Vec::new();
    for _ in 0..10 {
        let mut draw = || {
            let n = rng.random_range(2..=3);
            random::cq_graph(&mut rng, n, 2, 1)
        };
        pairs.push((draw(), draw()));
    }
    for (k1, k2) in &pairs {
        let k12 = k1.tensor(k2)?;
        let s = [sigma_graph(k1, opts)?, sigma_graph(k2, opts)?, sigma_graph(&k12, opts)?];
        let u = [upsilon(k1, opts)?, upsilon(k2, opts)?, upsilon(&k12, opts)?];
        for r in s.iter().chain(&u) {
            c.solved(r);
        }
        sig_dev = sig_dev.max((s[2].value - s[0].value * s[1].value).abs());
        sub_viol = sub_viol.max(s[2].value - s[0].value * s[1].value);
        ups_viol = ups_viol.max(u[0].value * u[1].value - u[2].value);
    }
    c.at_most("cq |Σ(K1⊗K2) − Σ(K1)Σ(K2)|", sig_dev, 1e-5);

    let mut add_dev = 0.0f64;
    for _ in 0..10 {
        let k1 = rng.random_range(1..=2);
        let k2 = rng.random_range(1..=2);
        let n1 = random::channel(&mut rng, 2, 2, k1);
        let n2 = random::channel(&mut rng, 2, 2, k2);
        let s = [sigma_channel(&n1, opts)?, sigma_channel(&n2, opts)?, sigma_channel(&n1.tensor(&n2)?, opts)?];
        for r in &s {
            c.solved(r);
        }
        add_dev = add_dev.max((s[2].value.log2() - s[0].value.log2() - s[1].value.log2()).abs());

        let (g1, g2) = (n1.graph(), n2.graph());
        let g12 = g1.tensor(&g2)?;
        let sg = [sigma_graph(&g1, opts)?, sigma_graph(&g2, opts)?, sigma_graph(&g12, opts)?];
        let ug = [upsilon(&g1, opts)?, upsilon(&g2, opts)?, upsilon(&g12, opts)?];
        for r in sg.iter().chain(&ug) {
            c.solved(r);
        }
        sub_viol = sub_viol.max(sg[2].value - sg[0].value * sg[1].value);
        ups_viol = ups_viol.max(ug[0].value * ug[1].value - ug[2].value);
    }
    c.at_most("|Hmin additivity defect| on channel pairs", add_dev, 1e-5);
    c.at_most("Υ(K1)Υ(K2) − Υ(K1⊗K2)", ups_viol, 1e-5);
    c.at_most("Σ(K1⊗K2) − Σ(K1)Σ(K2)", sub_viol, 1e-5);
    Ok(())
}

/// Graphs and channels of the randomized duality suite.
pub fn duality_suite(seed: u64) -> Vec<(NCGraph, Option<Channel>)> {
    use rand::Rng;
    let mut rng = random::rng(seed.wrapping_add(8));
    let mut out = Vec::with_capacity(30);
    for i in 0..30 {
        match i % 3 {
            0 => {
                let kraus = rng.random_range(1..=3);
                let n = random::channel(&mut rng, 2, 2, kraus);
                out.push((n.graph(), Some(n)));
            }
            1 => {
                let n = random::channel(&mut rng, 2, 3, 2);
                out.push((n.graph(), Some(n)));
            }
            _ => {
                let n = rng.random_range(2..=4);
                out.push((random::cq_graph(&mut rng, n, 3, 2), None));
            }
        }
    }
    out
}

fn c8(c: &mut Checks, seed: u64, opts: &SolveOptions) -> Result<()> {
    let (mut worst_gap, mut worst_product) = (0.0f64, 0.0f64);
    let mut solves = 0usize;
    for (i, (k, n)) in duality_suite(seed).iter().enumerate() {
        let mut rs = vec![upsilon(k, opts)?, sigma_graph(k, opts)?, aram(k, opts)?, aram_tilde(k, opts)?];
        let hat = aram_hat(k, opts)?;
        worst_product = worst_product.max((rs[2].value * hat.value - 1.0).abs());
        rs.push(hat);
        if let Some(n) = n {
            rs.push(sigma_channel(n, opts)?);
        }
        for r in &rs {
            solves += 1;
            worst_gap = worst_gap.max(r.crosscheck_gap);
            if r.status != crate::sdp::SolveStatus::Optimal || r.crosscheck_gap > 1e-6 {
                c.holds(
                    &format!("instance {i} {}", r.name),
                    false,
                    format!("status {:?}, gap {:.2e}", r.status, r.crosscheck_gap),
                );
            }
        }
    }
    c.at_most(&format!("max primal/dual gap over {solves} solves"), worst_gap, 1e-6);
    c.at_most("max |A·Â − 1|", worst_product, 1e-6);
    Ok(())
}

fn c9(c: &mut Checks, opts: &SolveOptions) -> Result<()> {
    let cap = build_capacity_ns(&NCGraph::noiseless_quantum(2)?, 4, opts)?;
    let r = check_ns(&cap)?;
    c.at_most("capacity Ω(ℂ1, 4) residual", r.max_residual(), BUILD_NS_TOL);
    let m = compose(&cap, &Channel::identity(2))?;
    c.at_most("composition vs I_4", max_abs(&(m.choi.matrix() - noiseless_bits(4)?.choi.matrix())), 1e-6);

    let id = Channel::identity(2);
    let sim = build_simulation_ns(&id, 4, opts)?;
    let r = check_ns(&sim)?;
    c.at_most("simulation Ω(id_2, 4) residual", r.max_residual(), BUILD_NS_TOL);
    let m = compose(&sim, &noiseless_bits(4)?)?;
    c.at_most("composition vs Φ", max_abs(&(m.choi.matrix() - HermitianMatrix::max_entangled(2).matrix())), 1e-6);

    let n = Channel::two_state(two_state_alpha(0.75))?;
    let sim = build_simulation_ns(&n, 2, opts)?;
    c.at_most("two-state simulation residual", check_ns(&sim)?.max_residual(), BUILD_NS_TOL);
    let m = compose(&sim, &noiseless_bits(2)?)?;
    c.at_most("composition vs cq Choi", max_abs(&(m.choi.matrix() - n.choi.matrix())), 1e-6);

    // Π sends B_i to A_o and A_i to B_o
    let swap = Channel::from_kraus(
        vec![crate::matcore::CMatrix::from_fn(4, 4, |r, s| {
            crate::matcore::real(if r / 2 == s % 2 && r % 2 == s / 2 { 1.0 } else { 0.0 })
        })],
        4,
        4,
    )?;
    let signalling = NsCorrelation::from_joint_channel(&swap, (2, 2, 2, 2))?;
    c.at_least("non-TP deviation of the signalling Ω", signalling_witness(&signalling)?, 1e-3);
    Ok(())
}

fn c10(c: &mut Checks, seed: u64) -> Result<()> {
    use rand::Rng;
    for alpha_sq in [0.51, 0.6, 0.7, 0.75, 0.8, 0.9, 0.95, 0.99] {
        let f = feasibility(&NCGraph::two_state(two_state_alpha(alpha_sq))?);
        c.holds(
            &format!("two_state α² = {alpha_sq}"),
            f.positive_capacity,
            format!("λ_min = {:.3e}", f.min_eigenvalue),
        );
    }
    let mut rng = random::rng(seed.wrapping_add(10));
    let k = random::cq_graph_common_support(&mut rng, 3, 3);
    let f = feasibility(&k);
    let cert = match (&f.certificate, &k.cq) {
        (FeasibilityCertificate::CommonSupport(v), Some(ps)) => {
            let unit = (v.norm() - 1.0).abs();
            let inside = ps.iter().map(|p| (p.matrix() * v - v).norm()).fold(0.0, f64::max);
            unit <= 1e-9 && inside <= 1e-8
        }
        _ => false,
    };
    c.holds("identical support infeasible", !f.positive_capacity, format!("λ_min = {:.3e}", f.min_eigenvalue));
    c.holds("unit-vector certificate", cert, format!("{:?}", f.common_support_dim));

    let mut disagree = 0;
    for i in 0..20 {
        let k = if i % 4 == 0 {
            random::cq_graph_common_support(&mut rng, 3, 3)
        } else {
            let n = rng.random_range(2..=4);
            let d = rng.random_range(2..=3);
            random::cq_graph(&mut rng, n, d, 2)
        };
        if !feasibility(&k).paths_agree {
            disagree += 1;
        }
    }
    c.holds("cq and general paths agree on 20 graphs", disagree == 0, format!("{disagree} disagreements"));
    Ok(())
}

#[derive(Clone, Copy, Debug)]
pub struct SweepRow {
    pub beta_sq: f64,
    pub log_aram: f64,
    pub cmin_e: f64,
    pub log_sigma: f64,
    /// Largest deviation of the SDP values from `1/α²` and `1 + 2αβ`.
    pub closed_form_error: f64,
}

/// `points` values of `β²` evenly spaced over `[0.05, 0.45]`, with `A` and
/// `Σ` from the SDPs and `C_minE = H2(β²)`.
pub fn two_state_sweep(points: usize, opts: &SolveOptions) -> Result<Vec<SweepRow>> {
    if points == 0 {
        return Err(crate::Error::spec("sweep needs at least one point"));
    }
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let beta_sq = if points == 1 { 0.05 } else { 0.05 + 0.4 * i as f64 / (points - 1) as f64 };
        let alpha = (1.0 - beta_sq).sqrt();
        let k = NCGraph::two_state(alpha)?;
        let a = aram(&k, opts)?.require()?;
        let s = sigma_graph(&k, opts)?.require()?;
        let err = (a.value - 1.0 / (alpha * alpha)).abs().max((s.value - (1.0 + 2.0 * alpha * beta_sq.sqrt())).abs());
        rows.push(SweepRow {
            beta_sq,
            log_aram: a.value.log2(),
            cmin_e: binary_entropy(beta_sq),
            log_sigma: s.value.log2(),
            closed_form_error: err,
        });
    }
    Ok(rows)
}

/// Linear extrapolation to `x = 0` through the two smallest samples.
fn extrapolate(xs: &[f64], f: impl Fn(f64) -> f64) -> (f64, bool) {
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let decreasing = ys.windows(2).all(|w| w[1] < w[0]);
    let n = xs.len();
    let (x1, x2, y1, y2) = (xs[n - 2], xs[n - 1], ys[n - 2], ys[n - 1]);
    (y2 - (y1 - y2) / (x1 - x2) * x2, decreasing)
}

fn c11(c: &mut Checks, opts: &SolveOptions) -> Result<()> {
    let rows = two_state_sweep(9, opts)?;
    let mut margin = f64::INFINITY;
    let mut closed = 0.0f64;
    for r in &rows {
        margin = margin.min(r.cmin_e - r.log_aram).min(r.log_sigma - r.cmin_e);
        closed = closed.max(r.closed_form_error);
    }
    c.at_least("min margin of log A < C_minE < log Σ", margin, 1e-4);
    c.at_most("SDP vs closed forms on the sweep", closed, 1e-6);

    // closed forms near β² = 0
    let xs = [1e-4, 1e-6, 1e-8];
    let curves: [(&str, Box<dyn Fn(f64) -> f64>); 3] = [
        ("log A", Box::new(|b2: f64| (1.0 / (1.0 - b2)).log2())),
        ("C_minE", Box::new(binary_entropy)),
        ("log Σ", Box::new(|b2: f64| (1.0 + 2.0 * ((1.0 - b2) * b2).sqrt()).log2())),
    ];
    for (name, f) in curves {
        let (limit, decreasing) = extrapolate(&xs, f);
        c.holds(
            &format!("{name} at β² → 0"),
            limit.abs() <= 1e-3 && decreasing,
            format!("extrapolated {limit:.3e}, decreasing {decreasing}"),
        );
    }
    Ok(())
}

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use zerocap::model::{Channel, GraphSpec, NCGraph};
use zerocap::nosig::{build_capacity_ns, build_simulation_ns, verify_code, verify_simulation, VerifyReport};
use zerocap::quantities::{
    aram, aram_hat, aram_tilde, feasibility, fractional_packing, integer_part, lovasz_theta, sigma_channel,
    sigma_graph, superdense_bound, support_indicator, upsilon, QuantityResult, Rounding,
};
use zerocap::regress::{run_all, two_state_sweep};
use zerocap::sdp::SolveOptions;
use zerocap::Error;

use super::{Command, GlobalOpts, PowerQuantity, SweepFamily};
use crate::report::{QuantityDump, Report, Row, WitnessDump};

/// Largest tensor power accepted by `power`.
pub const MAX_POWER: usize = 3;

#[derive(Debug)]
pub enum Failure {
    /// Unreadable or invalid spec, or invalid arguments.
    Spec(String),
    /// Solver failure or a failed check.
    Solver(String),
    /// The request cannot be met (M too large, dimension over the cap).
    Infeasible(String),
}

impl Failure {
    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Spec(_) => "spec_parse",
            Failure::Solver(_) => "solver",
            Failure::Infeasible(_) => "infeasible",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Solver(_) => 1,
            Failure::Spec(_) => 2,
            Failure::Infeasible(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Spec(m) | Failure::Solver(m) | Failure::Infeasible(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Solver { .. } | Error::Numerical(_) => Failure::Solver(msg),
            Error::Infeasible(_) | Error::TooLarge { .. } => Failure::Infeasible(msg),
            Error::Dimension(_)
            | Error::Permutation(_)
            | Error::NotHermitian { .. }
            | Error::NotPsd { .. }
            | Error::NotProjector { .. }
            | Error::Spec(_)
            | Error::Missing(_) => Failure::Spec(msg),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn load(path: &Path) -> Outcome<GraphSpec> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Spec(format!("{}: {e}", path.display())))?;
    Ok(GraphSpec::from_json(&text)?)
}

fn solve_options(g: &GlobalOpts) -> Outcome<SolveOptions> {
    for (name, v) in [("gap-tol", g.gap_tol), ("feas-tol", g.feas_tol)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Failure::Spec(format!("--{name} must be a positive number, got {v}")));
        }
    }
    Ok(SolveOptions { gap_tol: g.gap_tol, feas_tol: g.feas_tol, ..SolveOptions::default() })
}

fn timed<T>(f: impl FnOnce() -> zerocap::Result<T>) -> Outcome<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

/// Collects rows and witnesses of one invocation.
struct Session<'a> {
    global: &'a GlobalOpts,
    report: Report,
    dump: WitnessDump,
}

impl<'a> Session<'a> {
    fn new(global: &'a GlobalOpts, command: &str, spec: Option<&Path>) -> Self {
        Self {
            global,
            report: Report { command: command.into(), spec: spec.map(|p| p.display().to_string()), rows: Vec::new() },
            dump: WitnessDump { command: command.into(), ..WitnessDump::default() },
        }
    }

    fn quantity(&mut self, r: &QuantityResult, seconds: f64) {
        self.report.rows.push(Row::from_result(r, seconds));
        self.dump.quantities.push(QuantityDump::from(r));
    }

    fn row(&mut self, row: Row) {
        self.report.rows.push(row);
    }

    /// Writes the dump, prints the report and turns failed rows into an error.
    fn finish(mut self) -> Outcome<u8> {
        if let Some(path) = &self.global.dump_witness {
            let file = path.display().to_string();
            for row in &mut self.report.rows {
                row.witness_file = Some(file.clone());
            }
            let text = serde_json::to_string_pretty(&self.dump).expect("serializable");
            fs::write(path, text).map_err(|e| Failure::Solver(format!("{file}: {e}")))?;
        }
        let out = if self.global.json {
            serde_json::to_string_pretty(&self.report).expect("serializable") + "\n"
        } else if self.global.csv {
            self.report.to_csv()
        } else {
            self.report.to_text()
        };
        print!("{out}");
        let failed: Vec<_> = self.report.rows.iter().filter(|r| r.failed()).map(|r| r.quantity.as_str()).collect();
        if failed.is_empty() {
            Ok(0)
        } else {
            Err(Failure::Solver(format!("not verified: {}", failed.join(", "))))
        }
    }
}

pub fn run(command: &Command, global: &GlobalOpts) -> Outcome<u8> {
    let opts = solve_options(global)?;
    match command {
        Command::Capacity { spec } => capacity(global, spec, &opts),
        Command::Simcost { spec } => simcost(global, spec, &opts),
        Command::Packing { spec } => packing(global, spec, &opts),
        Command::Theta { spec } => {
            let g = load(spec)?.to_simple_graph()?;
            let mut s = Session::new(global, "theta", Some(spec));
            let (r, t) = timed(|| lovasz_theta(&g, &opts))?;
            s.quantity(&r, t);
            s.finish()
        }
        Command::Alphastar { spec } => {
            let gamma = support_indicator(&load(spec)?.transition()?);
            let mut s = Session::new(global, "alphastar", Some(spec));
            let (r, t) = timed(|| fractional_packing(&gamma, &opts))?;
            s.quantity(&r, t);
            s.finish()
        }
        Command::Power { spec, n, quantity, emit_spec } => {
            power(global, spec, *n, *quantity, emit_spec.as_deref(), &opts)
        }
        Command::Verify { spec, m, simulate } => verify(global, spec, *m, *simulate, &opts),
        Command::Sweep { family: SweepFamily::TwoState, points } => sweep(global, *points, &opts),
        Command::Regress => regress(global, &opts),
    }
}

fn capacity(global: &GlobalOpts, spec: &Path, opts: &SolveOptions) -> Outcome<u8> {
    let k = load(spec)?.to_graph()?;
    let mut s = Session::new(global, "capacity", Some(spec));
    let (u, t) = timed(|| upsilon(&k, opts))?;
    s.quantity(&u, t);

    let (sd, t) = timed(|| Ok(superdense_bound(&k)))?;
    s.row(Row::exact("superdense_bound", sd.value, Some(integer_part(sd.value, Rounding::Floor)), t));

    let (f, t) = timed(|| Ok(feasibility(&k)))?;
    let mut row = Row::exact("positive_capacity", if f.positive_capacity { 1.0 } else { 0.0 }, None, t)
        .with_residuals([("min_eigenvalue", f.min_eigenvalue)]);
    row.integer_part = Some(f.positive_capacity as i64);
    row.bits = None;
    if let Some(d) = f.common_support_dim {
        row = row.with_residuals([("common_support_dim", d as f64)]);
    }
    if !f.paths_agree {
        row.notes.push("cq and general feasibility tests disagree".into());
        row.status = "inconsistent".into();
    }
    s.row(row);
    s.finish()
}

fn simcost(global: &GlobalOpts, spec: &Path, opts: &SolveOptions) -> Outcome<u8> {
    let spec_doc = load(spec)?;
    let k = spec_doc.to_graph()?;
    let channel = spec_doc.to_channel()?;
    let mut s = Session::new(global, "simcost", Some(spec));
    let (sg, t) = timed(|| sigma_graph(&k, opts))?;
    s.quantity(&sg, t);
    match channel {
        Some(ch) if ch.trace_preserving => {
            let (sc, t) = timed(|| sigma_channel(&ch, opts))?;
            s.quantity(&sc, t);
            let mut h = Row::from_result(&sc, 0.0);
            h.quantity = "hmin".into();
            h.value = -sc.value.log2();
            h.integer_part = None;
            h.bits = None;
            h.residuals.clear();
            h.notes.clear();
            s.row(h);
        }
        Some(_) => s.report.rows[0].notes.push("channel is not trace preserving; sigma_channel skipped".into()),
        None => s.report.rows[0].notes.push("spec determines no channel; sigma_channel skipped".into()),
    }
    s.finish()
}

fn packing(global: &GlobalOpts, spec: &Path, opts: &SolveOptions) -> Outcome<u8> {
    let k = load(spec)?.to_graph()?;
    let mut s = Session::new(global, "packing", Some(spec));
    let (a, t) = timed(|| aram(&k, opts))?;
    s.quantity(&a, t);
    let (at, t) = timed(|| aram_tilde(&k, opts))?;
    s.quantity(&at, t);
    let (ah, t) = timed(|| aram_hat(&k, opts))?;
    s.quantity(&ah, t);

    let product = a.value * ah.value;
    let mut row = Row::exact("aram_times_aram_hat", product, None, 0.0);
    row.gap = (a.primal_value * ah.primal_value - a.dual_value * ah.dual_value).abs();
    row.status = if a.ok() && ah.ok() { "optimal" } else { "crosscheck_failed" }.into();
    s.row(row);
    s.finish()
}

fn power_quantity(q: PowerQuantity, k: &NCGraph, ch: Option<&Channel>, opts: &SolveOptions) -> Outcome<QuantityResult> {
    let r = match q {
        PowerQuantity::Upsilon => upsilon(k, opts),
        PowerQuantity::Sigma => sigma_graph(k, opts),
        PowerQuantity::SigmaChannel => {
            let ch = ch.ok_or_else(|| Failure::Spec("sigma-channel needs a spec that determines a channel".into()))?;
            sigma_channel(ch, opts)
        }
        PowerQuantity::Aram => aram(k, opts),
        PowerQuantity::AramTilde => aram_tilde(k, opts),
        PowerQuantity::AramHat => aram_hat(k, opts),
        PowerQuantity::Theta => zerocap::model::confusability_graph(k).and_then(|g| lovasz_theta(&g, opts)),
    };
    Ok(r?)
}

fn power(
    global: &GlobalOpts,
    spec: &Path,
    n: usize,
    q: PowerQuantity,
    emit: Option<&Path>,
    opts: &SolveOptions,
) -> Outcome<u8> {
    if n == 0 {
        return Err(Failure::Spec("-n must be at least 1".into()));
    }
    if n > MAX_POWER {
        return Err(Failure::Infeasible(format!("tensor power {n} exceeds the cap {MAX_POWER}")));
    }
    let tensor = GraphSpec::Tensor { factors: vec![load(spec)?], power: Some(n) };
    if let Some(path) = emit {
        fs::write(path, tensor.to_json()).map_err(|e| Failure::Solver(format!("{}: {e}", path.display())))?;
    }
    let k = tensor.to_graph()?;
    let ch = if q == PowerQuantity::SigmaChannel { tensor.to_channel()? } else { None };
    let mut s = Session::new(global, "power", Some(spec));
    let start = Instant::now();
    let r = power_quantity(q, &k, ch.as_ref(), opts)?;
    let mut row = Row::from_result(&r, start.elapsed().as_secs_f64());
    row.quantity = format!("{}^{n}", r.name);
    s.report.rows.push(row);
    s.dump.quantities.push(QuantityDump::from(&r));
    s.finish()
}

fn verify_row(name: &str, v: &VerifyReport, seconds: f64) -> Row {
    let mut row = Row::exact(name, v.m as f64, Some(v.m as i64), seconds).with_residuals([
        ("ns_cp", v.ns.cp),
        ("ns_tp", v.ns.tp),
        ("ns_a_to_b", v.ns.a_to_b),
        ("ns_b_to_a", v.ns.b_to_a),
        ("compose_crosscheck", v.compose_crosscheck),
    ]);
    for (key, val) in [
        ("max_off_diagonal", v.max_off_diagonal),
        ("min_success", v.min_success),
        ("choi_distance", v.choi_distance),
        ("orthogonality", v.orthogonality),
    ] {
        if let Some(x) = val {
            row = row.with_residuals([(key, x)]);
        }
    }
    row.gap = v.ns.max_residual();
    row.status = if v.passed() { "passed" } else { "failed" }.into();
    row.notes = v.notes.clone();
    if v.trivial {
        row.notes.push("M = 1 trivial correlation".into());
    }
    row
}

fn verify(global: &GlobalOpts, spec: &Path, m: usize, simulate: bool, opts: &SolveOptions) -> Outcome<u8> {
    if m == 0 {
        return Err(Failure::Spec("-M must be at least 1".into()));
    }
    let doc = load(spec)?;
    let k = doc.to_graph()?;
    let channel = doc.to_channel()?;
    let command = if simulate { "verify_simulation" } else { "verify_code" };
    let mut s = Session::new(global, command, Some(spec));
    if simulate {
        let ch = channel.ok_or_else(|| Failure::Spec("simulation needs a spec that determines a channel".into()))?;
        let (v, t) = timed(|| verify_simulation(&ch, m, opts))?;
        s.row(verify_row(command, &v, t));
        if global.dump_witness.is_some() {
            s.dump.correlation = Some((&build_simulation_ns(&ch, m, opts)?).into());
        }
    } else {
        let ch = match channel {
            Some(c) => c,
            None => k.some_channel()?,
        };
        let (v, t) = timed(|| verify_code(&k, &ch, m, opts))?;
        s.row(verify_row(command, &v, t));
        if global.dump_witness.is_some() {
            s.dump.correlation = Some((&build_capacity_ns(&k, m, opts)?).into());
        }
    }
    s.finish()
}

#[derive(Serialize)]
struct SweepPoint {
    beta_sq: f64,
    log_aram: f64,
    cmin_e: f64,
    log_sigma: f64,
}

fn sweep(global: &GlobalOpts, points: usize, opts: &SolveOptions) -> Outcome<u8> {
    let rows: Vec<SweepPoint> = two_state_sweep(points, opts)?
        .into_iter()
        .map(|r| SweepPoint { beta_sq: r.beta_sq, log_aram: r.log_aram, cmin_e: r.cmin_e, log_sigma: r.log_sigma })
        .collect();
    if global.json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("serializable"));
    } else {
        let mut out = String::from("beta_sq,log_aram,cmin_e,log_sigma\n");
        for r in &rows {
            let _ = writeln!(out, "{},{},{},{}", r.beta_sq, r.log_aram, r.cmin_e, r.log_sigma);
        }
        print!("{out}");
    }
    Ok(0)
}

#[derive(Serialize)]
struct CriterionLine<'a> {
    id: u32,
    title: &'a str,
    passed: bool,
    seconds: f64,
    details: &'a [String],
}

fn regress(global: &GlobalOpts, opts: &SolveOptions) -> Outcome<u8> {
    let outcomes = run_all(global.seed, opts);
    if global.json {
        let lines: Vec<_> = outcomes
            .iter()
            .map(|o| CriterionLine {
                id: o.id,
                title: o.title,
                passed: o.passed,
                seconds: o.seconds,
                details: &o.details,
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&lines).expect("serializable"));
    } else if global.csv {
        println!("criterion,title,passed,seconds");
        for o in &outcomes {
            println!("{},\"{}\",{},{:.3}", o.id, o.title.replace('"', "\"\""), o.passed, o.seconds);
        }
    } else {
        for o in &outcomes {
            println!("{}", o.line());
            for f in o.failures() {
                println!("    {f}");
            }
        }
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.to_string()).collect();
    if failed.is_empty() {
        Ok(0)
    } else {
        Err(Failure::Solver(format!("criteria failed: {}", failed.join(" "))))
    }
}

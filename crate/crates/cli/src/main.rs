//! `madec`: build instances, compute DECs, run learners and verification
//! suites from the command line.
//!
//! Exit status: 0 on success, 1 on a failed check or runtime error, 2 on a
//! usage error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use madec_core::constructions::{
    bandit_gap_family, default_grid, hr_to_ma, layered_needle_instance, ma_to_hr, normal_form_instance, random_payoffs,
    separation_instance, twin_instances, TwinParams,
};
use madec_core::dec::{equilibrium_grid, DecTables, Reference};
use madec_core::dist::{Dist, DivergenceKind};
use madec_core::error::Error;
use madec_core::harness::{estimate_risk, parse_variant, verify_suite, Algo, Params, SuiteReport, SUITES};
use madec_core::instance::{validate_instance, Decision, Family, Instance, Kind};
use madec_core::io::{read_instance, write_atomic, write_instance};
use madec_core::learners::MaexoConfig;
use madec_core::rng::stream_rng;

#[derive(Parser, Debug)]
#[command(name = "madec", version, about = "Decision-estimation coefficients for multi-agent and hidden-reward learning")]
struct Cli {
    /// Worker threads (default: MADEC_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Build a named instance and write it as JSON.
    Construct(ConstructArgs),
    /// Compute an offset or constrained DEC on a grid.
    Dec(DecArgs),
    /// Run a learner for several seeded replicates.
    Simulate(SimulateArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Print the sizes and validation status of an instance file.
    Inspect { file: PathBuf },
}

#[derive(Args, Debug)]
struct ConstructArgs {
    /// layered | twin | bandit | separation | normal-form | embed | ma-to-hr
    name: String,
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long)]
    cprob: Option<f64>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "T")]
    t: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    /// hellinger | chi2 | kl
    #[arg(long)]
    phi: Option<String>,
    #[arg(long)]
    c0: Option<f64>,
    /// Which twin to write: 1 or 2.
    #[arg(long)]
    which: Option<usize>,
    #[arg(long)]
    gaps: Option<usize>,
    #[arg(long)]
    arms: Option<usize>,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long = "A")]
    a: Option<usize>,
    /// Action counts, comma separated.
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long)]
    models: Option<usize>,
    /// NE | CCE | CE
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Base instance for embed and ma-to-hr.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long = "V")]
    v: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DecArgs {
    #[arg(long)]
    instance: PathBuf,
    /// offset | constrained
    #[arg(long)]
    variant: String,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// uniform | model:<label> | file:<mix.json>
    #[arg(long = "ref", default_value = "uniform")]
    reference: String,
    /// pure | default | equilibrium | file:<grid.json>
    #[arg(long, default_value = "default")]
    grid: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long = "true-model")]
    true_model: String,
    /// maexo | e2d | first-hit | uniform
    #[arg(long)]
    algo: String,
    #[arg(long = "T")]
    t: usize,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0.05)]
    eta: f64,
    #[arg(long, default_value_t = 40.0)]
    gamma: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite name, or "all".
    #[arg(long)]
    suite: String,
    /// Parameter overrides as k=v.
    #[arg(long, num_args = 1..)]
    params: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A usage error: exit status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

fn need<T>(x: Option<T>, flag: &str, what: &str) -> anyhow::Result<T> {
    x.ok_or_else(|| usage(format!("{what} requires --{flag}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let is_usage = e.downcast_ref::<Usage>().is_some() || matches!(e.downcast_ref::<Error>(), Some(Error::Config(_)));
            ExitCode::from(if is_usage { 2 } else { 1 })
        }
    }
}

/// Stdout line that tolerates a closed pipe.
fn say(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn init_threads(flag: Option<usize>) -> anyhow::Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("MADEC_THREADS") {
            Ok(s) => Some(s.trim().parse().map_err(|_| usage(format!("MADEC_THREADS='{s}' is not an integer")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    init_threads(cli.threads)?;
    match cli.cmd {
        Cmd::Construct(a) => construct(a).map(|_| true),
        Cmd::Dec(a) => dec(a).map(|_| true),
        Cmd::Simulate(a) => simulate(a).map(|_| true),
        Cmd::Verify(a) => verify(a),
        Cmd::Inspect { file } => inspect(&file).map(|_| true),
    }
}

fn parse_phi(s: &str) -> anyhow::Result<DivergenceKind> {
    DivergenceKind::parse(s).map_err(|e| usage(e.to_string()))
}

fn parse_sizes(s: &str) -> anyhow::Result<Vec<usize>> {
    s.split(',').map(|x| x.trim().parse().map_err(|_| usage(format!("bad --sizes entry '{x}'")))).collect()
}

fn construct(a: ConstructArgs) -> anyhow::Result<()> {
    let inst = match a.name.as_str() {
        "layered" => layered_needle_instance(need(a.l, "L", "layered")?, a.cprob.unwrap_or(1.0))?,
        "twin" => {
            let p = TwinParams {
                n: need(a.n, "N", "twin")?,
                t: need(a.t, "T", "twin")?,
                eps: need(a.eps, "eps", "twin")?,
                phi: parse_phi(a.phi.as_deref().unwrap_or("hellinger"))?,
                c0: a.c0.unwrap_or(1.0),
            };
            let pair = twin_instances(&p)?;
            match a.which.unwrap_or(1) {
                1 => pair.first,
                2 => pair.second,
                w => return Err(usage(format!("--which must be 1 or 2, got {w}"))),
            }
        }
        "bandit" => bandit_gap_family(need(a.gaps, "gaps", "bandit")?, a.arms.unwrap_or(2))?,
        "separation" => separation_instance(a.k.unwrap_or(2), a.a.unwrap_or(4))?,
        "normal-form" => {
            let seed = need(a.seed, "seed", "normal-form")?;
            let sizes = parse_sizes(a.sizes.as_deref().unwrap_or("2,2"))?;
            let kind = Kind::parse(a.kind.as_deref().unwrap_or("CCE")).map_err(|e| usage(e.to_string()))?;
            let pay = random_payoffs(&sizes, a.models.unwrap_or(4), &mut stream_rng(seed, 0));
            normal_form_instance(&sizes, &pay, kind)?
        }
        "embed" => {
            let base = read_instance(&need(a.instance, "instance", "embed")?)?;
            hr_to_ma(&base, need(a.v, "V", "embed")?)?
        }
        "ma-to-hr" => {
            let j = read_instance(&need(a.instance, "instance", "ma-to-hr")?)?;
            let grid = equilibrium_grid(&j);
            ma_to_hr(&j, &grid)?
        }
        other => return Err(usage(format!("unknown construction '{other}'"))),
    };
    write_instance(&a.out, &inst)?;
    eprintln!("wrote {} ({} models, {} symbols)", a.out.display(), inst.n_models(), inst.n_obs());
    Ok(())
}

fn parse_reference(inst: &Instance, spec: &str) -> anyhow::Result<Reference> {
    if spec == "uniform" {
        return Ok(Reference::uniform(inst));
    }
    if let Some(label) = spec.strip_prefix("model:") {
        return Ok(Reference::model(inst, inst.model_index(label)?));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let v = read_json(Path::new(path))?;
        let mut w = vec![0.0; inst.n_models()];
        match &v {
            Value::Array(xs) => {
                if xs.len() != w.len() {
                    bail!("reference file: {} weights for {} models", xs.len(), w.len());
                }
                for (i, x) in xs.iter().enumerate() {
                    w[i] = x.as_f64().ok_or_else(|| anyhow!("reference file: weights[{i}] is not a number"))?;
                }
            }
            Value::Object(map) => {
                for (label, x) in map {
                    w[inst.model_index(label)?] =
                        x.as_f64().ok_or_else(|| anyhow!("reference file: weight of '{label}' is not a number"))?;
                }
            }
            _ => bail!("reference file must hold an array or an object of weights"),
        }
        return Ok(Reference::mixture(format!("file:{path}"), Dist::new(w)?));
    }
    Err(usage(format!("unknown reference '{spec}'")))
}

fn read_json(path: &Path) -> anyhow::Result<Value> {
    let s = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&s).with_context(|| format!("parsing {}", path.display()))
}

fn probs(v: &Value, what: &str) -> anyhow::Result<Dist> {
    let xs = v.as_array().ok_or_else(|| anyhow!("{what} is not an array"))?;
    let w = xs
        .iter()
        .enumerate()
        .map(|(i, x)| x.as_f64().ok_or_else(|| anyhow!("{what}[{i}] is not a number")))
        .collect::<anyhow::Result<Vec<f64>>>()?;
    Ok(Dist::new(w).with_context(|| what.to_string())?)
}

/// Grid file: an array of {"pure": i}, {"joint": [..]} or {"ne": [[..], ..]}.
fn parse_grid(inst: &Instance, spec: &str) -> anyhow::Result<Vec<Decision>> {
    match spec {
        "pure" => return Ok(inst.pure_decisions()),
        "default" => return Ok(default_grid(inst, &[])),
        "equilibrium" => return Ok(equilibrium_grid(inst)),
        _ => {}
    }
    let path = spec.strip_prefix("file:").ok_or_else(|| usage(format!("unknown grid '{spec}'")))?;
    let v = read_json(Path::new(path))?;
    let items = v.as_array().ok_or_else(|| anyhow!("grid file must hold an array"))?;
    let pure = inst.pure_decisions();
    items
        .iter()
        .enumerate()
        .map(|(i, it)| {
            if let Some(p) = it.get("pure") {
                let idx = p.as_u64().ok_or_else(|| anyhow!("grid[{i}].pure is not an index"))? as usize;
                pure.get(idx).cloned().ok_or_else(|| anyhow!("grid[{i}].pure out of range"))
            } else if let Some(j) = it.get("joint") {
                Ok(Decision::Joint(probs(j, &format!("grid[{i}].joint"))?))
            } else if let Some(parts) = it.get("ne") {
                let parts = parts.as_array().ok_or_else(|| anyhow!("grid[{i}].ne is not an array"))?;
                let d = parts
                    .iter()
                    .enumerate()
                    .map(|(k, p)| probs(p, &format!("grid[{i}].ne[{k}]")))
                    .collect::<anyhow::Result<Vec<Dist>>>()?;
                Ok(Decision::Ne(d))
            } else {
                bail!("grid[{i}] needs one of pure, joint, ne")
            }
        })
        .collect()
}

fn dec(a: DecArgs) -> anyhow::Result<()> {
    let variant = match a.variant.as_str() {
        "offset" => parse_variant(Some(need(a.gamma, "gamma", "offset DEC")?), None),
        "constrained" => parse_variant(None, Some(need(a.eps, "eps", "constrained DEC")?)),
        v => return Err(usage(format!("unknown variant '{v}'"))),
    }
    .map_err(|e| usage(e.to_string()))?;
    let inst = read_instance(&a.instance)?;
    let reference = parse_reference(&inst, &a.reference)?;
    let grid = parse_grid(&inst, &a.grid)?;
    let res = DecTables::new(&inst, &grid, &reference)?.solve(variant)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["variant", "param", "ref", "value", "gap", "bound_direction"])?;
    w.write_record([
        res.variant.to_string(),
        format!("{}", res.param),
        res.reference.clone(),
        format!("{}", res.value),
        format!("{}", res.gap),
        res.direction.as_str().to_string(),
    ])?;
    let bytes = w.into_inner().map_err(|e| anyhow!("csv: {e}"))?;
    emit(a.out.as_deref(), &bytes)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(p) => Ok(write_atomic(p, bytes)?),
        None => {
            let _ = std::io::stdout().lock().write_all(bytes);
            Ok(())
        }
    }
}

fn simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let seed = need(a.seed, "seed", "simulate")?;
    if a.reps == 0 || a.t == 0 {
        return Err(usage("--reps and --T must be positive"));
    }
    let algo = match a.algo.as_str() {
        "maexo" => Algo::Maexo(MaexoConfig::new(a.eta, seed)),
        other => Algo::parse(other, a.eta, a.gamma).map_err(|e| usage(e.to_string()))?,
    };
    let inst = read_instance(&a.instance)?;
    let est = estimate_risk(&algo, &inst, &a.true_model, a.t, a.reps, seed, None)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rep", "seed", "algo", "T", "risk", "wallclock_ms"])?;
    for (rep, risk) in est.risks.iter().enumerate() {
        let ms = est.wallclock_ms.get(rep).copied().unwrap_or(0.0);
        w.write_record([
            rep.to_string(),
            seed.to_string(),
            algo.name().to_string(),
            a.t.to_string(),
            format!("{risk}"),
            format!("{ms:.3}"),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow!("csv: {e}"))?;
    emit(a.out.as_deref(), &bytes)?;
    eprintln!("mean risk {:.6} (stderr {:.6}, {} reps)", est.mean, est.stderr, est.reps);
    Ok(())
}

fn verify(a: VerifyArgs) -> anyhow::Result<bool> {
    let params = Params::parse(&a.params).map_err(|e| usage(e.to_string()))?;
    let names: Vec<&str> = if a.suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&a.suite.as_str()) {
        vec![a.suite.as_str()]
    } else {
        return Err(usage(format!("unknown suite '{}'; known: {}, all", a.suite, SUITES.join(", "))));
    };
    let mut reports: Vec<SuiteReport> = Vec::new();
    for name in names {
        let r = verify_suite(name, &params)?;
        for c in r.failures() {
            eprintln!("FAIL {} {}: {} {} {} (tol {}) {}", r.suite, c.id, c.lhs, c.relation, c.rhs, c.tol, c.detail);
        }
        say(&format!("{} {} ({} claims)", if r.pass { "PASS" } else { "FAIL" }, r.suite, r.claims.len()));
        reports.push(r);
    }
    let pass = reports.iter().all(|r| r.pass);
    let doc = if reports.len() == 1 { serde_json::to_value(&reports[0])? } else { serde_json::to_value(&reports)? };
    if let Some(out) = &a.out {
        write_atomic(out, serde_json::to_string_pretty(&doc)?.as_bytes())?;
    }
    Ok(pass)
}

fn inspect(file: &Path) -> anyhow::Result<()> {
    let inst = read_instance(file)?;
    let report = validate_instance(&inst);
    let family = match &inst.family {
        Family::Plain => json!({"type": "plain"}),
        Family::Twin { n } => json!({"type": "twin", "n": n}),
        Family::Layered { l, c_prob } => json!({"type": "layered", "L": l, "c_prob": c_prob}),
        Family::Embedded(_) => json!({"type": "embedded"}),
    };
    say(&format!("|Pi|={} |M|={} |O|={}", inst.n_rows(), inst.n_models(), inst.n_obs()));
    let summary = json!({
        "kind": inst.kind,
        "players": inst.k,
        "action_counts": inst.sizes(),
        "decisions": inst.n_rows(),
        "models": inst.n_models(),
        "symbols": inst.n_obs(),
        "reveals_profile": inst.reveals_sigma,
        "family": family,
        "valid": report.structural_ok(),
        "validation": format!("{report:?}"),
    });
    say(&serde_json::to_string_pretty(&summary)?);
    if report.structural_ok() {
        Ok(())
    } else {
        Err(anyhow!("instance failed validation"))
    }
}

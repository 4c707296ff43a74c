//! Monte-Carlo risk estimation, parameter sweeps, and the named
//! verification suites that compare computed quantities with the stated
//! bounds.
//!
//! Replicate `r` of a batch with seed `s` always uses the generator
//! `stream_rng(s, r)`, so results do not depend on thread count.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::{
    all_opponent_profiles, bandit_gap_family, default_grid, hr_to_ma, induced_single_agent, layered_needle_instance,
    ma_to_hr, normal_form_instance, random_payoffs, separation_instance, twin_instances, with_kind, LayeredNeedle,
    TwinParams, SEPARATION_GAP,
};
use crate::dec::{
    c_of_t, density_ratio, eps_upper, equilibrium_grid, gap_bound_report, log_grid, offset_to_constrained_bound_tables,
    DecTables, GapBoundInput, Reference, Variant,
};
use crate::dist::{f_divergence, hellinger_sq_raw, Dist, DivergenceKind};
use crate::error::{Error, Result};
use crate::game::{solve_lp, solve_mw};
use crate::instance::{product_to_joint, Decision, FiniteModel, Instance, Kernel, Kind};
use crate::learners::{
    e2d_pac_run, est_h_diagnostic, first_hit_layered, first_hit_run, first_hit_twin_risk, maexo_run,
    mwu_regret_check, uniform_baseline_run, E2dConfig, Environment, MaexoConfig,
};
use crate::rng::{stream_rng, subseed};

// ------------------------------------------------------------ estimation

#[derive(Clone, Debug)]
pub enum Algo {
    Maexo(MaexoConfig),
    E2d { gamma: f64 },
    FirstHit,
    Uniform,
}

impl Algo {
    pub fn name(&self) -> &'static str {
        match self {
            Algo::Maexo(_) => "maexo",
            Algo::E2d { .. } => "e2d",
            Algo::FirstHit => "first-hit",
            Algo::Uniform => "uniform",
        }
    }

    /// Parse an algorithm name; `eta` and `gamma` feed the learners that
    /// use them.
    pub fn parse(name: &str, eta: f64, gamma: f64) -> Result<Algo> {
        match name {
            "maexo" => Ok(Algo::Maexo(MaexoConfig::new(eta, 0))),
            "e2d" => Ok(Algo::E2d { gamma }),
            "first-hit" | "first_hit" => Ok(Algo::FirstHit),
            "uniform" => Ok(Algo::Uniform),
            _ => Err(Error::Config(format!("unknown algorithm '{name}'"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RiskEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
    pub risks: Vec<f64>,
    pub wallclock_ms: Vec<f64>,
}

impl RiskEstimate {
    pub fn from_risks(risks: Vec<f64>, wallclock_ms: Vec<f64>) -> Result<RiskEstimate> {
        let n = risks.len();
        if n == 0 {
            return Err(Error::Config("need at least one replicate".into()));
        }
        let mean = risks.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = risks.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Ok(RiskEstimate { mean, stderr, reps: n, risks, wallclock_ms })
    }

    pub fn median(&self) -> f64 {
        median(&self.risks)
    }
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Grid used by grid-based learners when none is given.
pub fn learner_grid(inst: &Instance) -> Vec<Decision> {
    if inst.kind == Kind::Hr {
        inst.pure_decisions()
    } else {
        equilibrium_grid(inst)
    }
}

/// One replicate: exact risk of the learner's output under the truth.
pub fn run_rep(algo: &Algo, inst: &Instance, truth: usize, grid: &[Decision], t: usize, seed: u64, rep: u64) -> Result<f64> {
    let mut rng = stream_rng(seed, rep);
    let env = Environment::with_index(inst, truth)?;
    let out = match algo {
        Algo::Maexo(cfg) => maexo_run(inst, &env, t, cfg, &mut rng)?.1,
        Algo::E2d { gamma } => e2d_pac_run(inst, &env, grid, t, &E2dConfig { gamma: *gamma, seed }, &mut rng)?.1,
        Algo::FirstHit => first_hit_run(inst, &env, t, &mut rng)?,
        Algo::Uniform => uniform_baseline_run(inst, &env, grid, t, &mut rng)?.1,
    };
    out.risk(inst, truth)
}

fn check_compatible(algo: &Algo, inst: &Instance) -> Result<()> {
    match algo {
        Algo::Maexo(_) if !matches!(inst.kind, Kind::Cce | Kind::Ce) => {
            Err(Error::Unsupported("maexo needs a CCE or CE instance".into()))
        }
        Algo::FirstHit if !matches!(inst.family, crate::instance::Family::Twin { .. } | crate::instance::Family::Layered { .. }) => {
            Err(Error::Unsupported("first-hit needs a twin or layered instance".into()))
        }
        _ => Ok(()),
    }
}

/// `reps` independent seeded runs, in parallel over replicates.
pub fn estimate_risk(
    algo: &Algo,
    inst: &Instance,
    truth_label: &str,
    t: usize,
    reps: usize,
    seed: u64,
    grid: Option<&[Decision]>,
) -> Result<RiskEstimate> {
    check_compatible(algo, inst)?;
    let truth = inst.model_index(truth_label)?;
    let owned;
    let grid = match grid {
        Some(g) => g,
        None => {
            owned = learner_grid(inst);
            &owned
        }
    };
    let runs: Vec<(f64, f64)> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let start = Instant::now();
            let r = run_rep(algo, inst, truth, grid, t, seed, rep)?;
            Ok((r, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect::<Result<_>>()?;
    let (risks, ms) = runs.into_iter().unzip();
    RiskEstimate::from_risks(risks, ms)
}

/// First-hit on the factored layered family, with a uniformly drawn
/// needle per replicate.
pub fn estimate_layered_first_hit(l: usize, c_prob: f64, t: usize, reps: usize, seed: u64) -> Result<RiskEstimate> {
    let needle = LayeredNeedle::new(l, c_prob)?;
    let risks: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(seed, rep);
            let v: Vec<usize> = needle.n.iter().map(|&n| rng.random_range(0..n)).collect();
            first_hit_layered(&needle, &v, t, &mut rng)
        })
        .collect();
    RiskEstimate::from_risks(risks, Vec::new())
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub t: usize,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of log mean against log T.
    pub slope: f64,
}

/// Least-squares slope of log y on log x; NaN when fewer than two points
/// have positive y.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

/// Run `estimate(T, seed_T)` for each horizon, with seed_T derived from
/// the sweep seed and T.
pub fn scaling_sweep(
    ts: &[usize],
    seed: u64,
    estimate: &(dyn Fn(usize, u64) -> Result<RiskEstimate> + Sync),
) -> Result<Sweep> {
    let mut rows = Vec::with_capacity(ts.len());
    for &t in ts {
        let e = estimate(t, subseed(seed, t as u64))?;
        rows.push(SweepRow { t, mean: e.mean, stderr: e.stderr });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.t as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let slope = log_log_slope(&xs, &ys);
    Ok(Sweep { rows, slope })
}

// --------------------------------------------------------------- reports

#[derive(Clone, Debug, Serialize)]
pub struct Claim {
    pub id: String,
    pub anchor: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    /// One of "<=", ">=", "==".
    pub relation: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Claim {
    fn new(id: impl Into<String>, anchor: &str, lhs: f64, rhs: f64, tol: f64, relation: &str) -> Claim {
        let pass = match relation {
            "<=" => lhs <= rhs + tol,
            ">=" => lhs >= rhs - tol,
            _ => (lhs - rhs).abs() <= tol,
        };
        Claim { id: id.into(), anchor: anchor.into(), lhs, rhs, tol, relation: relation.into(), pass, detail: String::new() }
    }

    pub fn le(id: impl Into<String>, anchor: &str, lhs: f64, rhs: f64, tol: f64) -> Claim {
        Claim::new(id, anchor, lhs, rhs, tol, "<=")
    }

    pub fn ge(id: impl Into<String>, anchor: &str, lhs: f64, rhs: f64, tol: f64) -> Claim {
        Claim::new(id, anchor, lhs, rhs, tol, ">=")
    }

    pub fn eq(id: impl Into<String>, anchor: &str, lhs: f64, rhs: f64, tol: f64) -> Claim {
        Claim::new(id, anchor, lhs, rhs, tol, "==")
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Claim {
        self.detail = d.into();
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub claims: Vec<Claim>,
    pub pass: bool,
}

impl SuiteReport {
    fn new(suite: &str, claims: Vec<Claim>) -> SuiteReport {
        let pass = !claims.is_empty() && claims.iter().all(|c| c.pass);
        SuiteReport { suite: suite.into(), claims, pass }
    }

    pub fn failures(&self) -> Vec<&Claim> {
        self.claims.iter().filter(|c| !c.pass).collect()
    }
}

/// `k=v` overrides for suite parameters.
#[derive(Clone, Debug, Default)]
pub struct Params(pub BTreeMap<String, String>);

impl Params {
    pub fn parse(items: &[String]) -> Result<Params> {
        let mut m = BTreeMap::new();
        for it in items {
            let (k, v) = it.split_once('=').ok_or_else(|| Error::Config(format!("parameter '{it}' is not k=v")))?;
            m.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Params(m))
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Config(format!("parameter {key}: '{v}' is not a number"))),
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Config(format!("parameter {key}: '{v}' is not an integer"))),
        }
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Config(format!("parameter {key}: '{v}' is not an integer"))),
        }
    }
}

pub const SUITES: [&str; 11] = [
    "gap-inherent",
    "fdiv-twin",
    "reductions",
    "constrained-offset",
    "dec-ordering",
    "separation",
    "mwu",
    "gap-bounding",
    "maexo",
    "estimation",
    "solvers",
];

pub fn verify_suite(name: &str, params: &Params) -> Result<SuiteReport> {
    let claims = match name {
        "gap-inherent" => {
            let mut c = layered_sandwich_claims(params)?;
            c.extend(layered_first_hit_claims(params)?);
            c
        }
        "fdiv-twin" => fdiv_twin_claims(params)?,
        "reductions" => reductions_claims(params)?,
        "constrained-offset" => constrained_offset_claims(params)?,
        "dec-ordering" => dec_ordering_claims(params)?,
        "separation" => separation_claims(params)?,
        "mwu" => mwu_claims(params)?,
        "gap-bounding" => gap_bounding_claims(params)?,
        "maexo" => maexo_claims(params)?,
        "estimation" => estimation_claims(params)?,
        "solvers" => solver_claims(params)?,
        _ => return Err(Error::Config(format!("unknown suite '{name}'; known: {}", SUITES.join(", ")))),
    };
    Ok(SuiteReport::new(name, claims))
}

// ------------------------------------------------------- layered needle

const LAYERED_EPS: [f64; 4] = [0.15, 0.25, 0.35, 0.5];

fn layered_refs(inst: &Instance) -> Result<Vec<Reference>> {
    let ones = vec!["1"; inst.family_layers()].join(",");
    let m = inst.model_index(&format!("v({ones})"))?;
    Ok(vec![Reference::model(inst, m), Reference::uniform(inst)])
}

trait Layers {
    fn family_layers(&self) -> usize;
}

impl Layers for Instance {
    fn family_layers(&self) -> usize {
        match self.family {
            crate::instance::Family::Layered { l, .. } => l,
            _ => 0,
        }
    }
}

/// Constrained DEC of the layered instance at L=3: dec <= 2 eps for each
/// reference, and eps/(sqrt 8 L) <= the max over references. The lower side needs eps >= sqrt(2
/// delta_L), so it is only asserted there.
fn layered_sandwich_claims(p: &Params) -> Result<Vec<Claim>> {
    let l = p.usize("L", 3)?;
    let c_prob = p.f64("cprob", 1.0)?;
    let inst = layered_needle_instance(l, c_prob)?;
    let needle = LayeredNeedle::new(l, c_prob)?;
    let floor = (2.0 * needle.delta[l - 1]).sqrt();
    let grid = inst.pure_decisions();
    let mut out = Vec::new();
    let mut best = vec![f64::NEG_INFINITY; LAYERED_EPS.len()];
    for r in layered_refs(&inst)? {
        let tables = DecTables::new(&inst, &grid, &r)?;
        for (i, &eps) in LAYERED_EPS.iter().enumerate() {
            let v = tables.constrained(eps)?.value;
            best[i] = best[i].max(v);
            out.push(Claim::le(
                format!("layered-dec-upper[{},eps={eps}]", r.label),
                "layered DEC <= 2 C_prob eps",
                v,
                2.0 * c_prob * eps,
                1e-6,
            ));
        }
    }
    // The lower side is a statement about the sup over references.
    for (i, &eps) in LAYERED_EPS.iter().enumerate() {
        if eps >= floor {
            out.push(Claim::ge(
                format!("layered-dec-lower[eps={eps}]"),
                "layered DEC >= C_prob eps / (sqrt 8 L)",
                best[i],
                c_prob * eps / (8f64.sqrt() * l as f64),
                1e-6,
            ));
        }
    }
    Ok(out)
}

fn layered_first_hit_claims(p: &Params) -> Result<Vec<Claim>> {
    let l = p.usize("first_hit_L", 6)?;
    let reps = p.usize("reps", 2000)?;
    let seed = p.u64("seed", 11)?;
    let mut out = Vec::new();
    for t in [16usize, 32, 64] {
        let e = estimate_layered_first_hit(l, 1.0, t, reps, subseed(seed, t as u64))?;
        let bound = 8.0 * (t as f64).ln() / t as f64;
        out.push(
            Claim::le(format!("layered-first-hit[T={t}]"), "first-hit risk <= 8 C_prob^2 log T / T", e.mean, bound, 3.0 * e.stderr)
                .with_detail(format!("stderr {:.3e}, reps {reps}", e.stderr)),
        );
    }
    Ok(out)
}

// ----------------------------------------------------------------- twins

fn fdiv_twin_claims(p: &Params) -> Result<Vec<Claim>> {
    let n = p.usize("N", 8)?;
    let t = p.usize("T", 64)?;
    let eps = p.f64("eps", 0.5)?;
    let c0 = p.f64("c0", 1.0)?;
    let mc_reps = p.usize("reps", 100_000)?;
    let base_reps = p.usize("baseline_reps", 4000)?;
    let seed = p.u64("seed", 5)?;
    let mut out = Vec::new();
    for (pi, phi) in [DivergenceKind::Hellinger, DivergenceKind::Chi2].into_iter().enumerate() {
        let name = phi.name();
        let pair = twin_instances(&TwinParams { n, t, eps, phi: phi.clone(), c0 })?;
        let (a, b) = (&pair.first, &pair.second);
        let mut value_diff: f64 = 0.0;
        for i in 0..n {
            let va = a.models[i].values.as_ref().expect("hidden-reward values");
            let vb = b.models[pair.mapping[i]].values.as_ref().expect("hidden-reward values");
            value_diff = value_diff.max(va.iter().zip(vb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
        }
        out.push(Claim::eq(format!("twin-values[{name}]"), "twin value tables coincide", value_diff, 0.0, 0.0));
        let mut div_diff: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let row = |inst: &Instance, m: usize| Dist::new(inst.row(m, 0).into_owned());
                let da = f_divergence(&phi, &row(a, i)?, &row(a, j)?)?;
                let db = f_divergence(&phi, &row(b, pair.mapping[i])?, &row(b, pair.mapping[j])?)?;
                div_diff = div_diff.max((da - db).abs());
            }
        }
        out.push(Claim::eq(format!("twin-divergences[{name}]"), "pairwise D_phi coincide", div_diff, 0.0, 1e-12));

        let closed = first_hit_twin_risk(n, pair.delta1, pair.beta1, t);
        let e = estimate_risk(&Algo::FirstHit, a, "m0", t, mc_reps, subseed(seed, 2 * pi as u64), None)?;
        out.push(
            Claim::eq(format!("twin-first-hit[{name}]"), "first-hit risk matches its closed form", e.mean, closed, 3.0 * e.stderr)
                .with_detail(format!("stderr {:.3e}", e.stderr)),
        );

        let s = (1.0 / pair.delta2.powf(1.0 - eps)).floor() as usize;
        let bound = 2f64.powf(-1.0 - 2.0 / eps) / (n as f64 * (pair.delta2 / pair.beta2).powf(2.0 / eps));
        let e = estimate_risk(&Algo::Uniform, b, "m0", s, base_reps, subseed(seed, 2 * pi as u64 + 1), None)?;
        out.push(
            Claim::ge(format!("twin-baseline-lower[{name}]"), "risk on the second twin >= lower bound at horizon S", e.mean, bound, 3.0 * e.stderr)
                .with_detail(format!("S = {s}, stderr {:.3e}", e.stderr)),
        );
    }
    Ok(out)
}

// ------------------------------------------------------------ reductions

/// The five random 2x2 CCE classes, their grids and three references each.
pub struct ReductionCase {
    pub j: Instance,
    pub grid: Vec<Decision>,
    pub i: Instance,
    pub refs: Vec<Reference>,
}

pub fn reduction_cases(seed: u64, count: usize) -> Result<Vec<ReductionCase>> {
    (0..count)
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let pay = random_payoffs(&[2, 2], 3, &mut rng);
            let j = normal_form_instance(&[2, 2], &pay, Kind::Cce)?;
            let grid = equilibrium_grid(&j);
            let i = ma_to_hr(&j, &grid)?;
            let refs = vec![Reference::uniform(&j), Reference::model(&j, 0), Reference::random(&j, "dirichlet", &mut rng)];
            Ok(ReductionCase { j, grid, i, refs })
        })
        .collect()
}

/// Base hidden-reward instance, its lift, and the lift's grid.
pub struct EmbedCase {
    pub base: Instance,
    pub lift: Instance,
    pub lift_grid: Vec<Decision>,
    pub v: usize,
}

pub fn embed_case(v: usize) -> Result<EmbedCase> {
    let base = bandit_gap_family(3, 2)?;
    let lift = hr_to_ma(&base, v)?;
    let n_pi = base.n_rows();
    let mut lift_grid = Vec::new();
    for p2 in [0, 1] {
        for a in 0..n_pi {
            lift_grid.push(Decision::Ne(vec![Dist::point(n_pi, a), Dist::point(v + 1, p2)]));
        }
    }
    lift_grid.push(Decision::Ne(vec![Dist::uniform(n_pi), Dist::uniform(v + 1)]));
    Ok(EmbedCase { base, lift, lift_grid, v })
}

/// Reference nu on the base lifted to nu x Unif[V].
pub fn lift_reference(case: &EmbedCase, nu: &Reference) -> Result<Reference> {
    let mut w = Vec::with_capacity(case.lift.n_models());
    for &x in nu.weights.probs() {
        for _ in 0..case.v {
            w.push(x / case.v as f64);
        }
    }
    Ok(Reference::mixture(format!("{}xunif", nu.label), Dist::new(w)?))
}

const REDUCTION_EPS: [f64; 2] = [0.2, 0.5];

fn reductions_claims(p: &Params) -> Result<Vec<Claim>> {
    let seed = p.u64("seed", 3)?;
    let count = p.usize("instances", 5)?;
    let v = p.usize("V", 10_000)?;
    let mut out = Vec::new();
    for (c, case) in reduction_cases(seed, count)?.iter().enumerate() {
        let i_grid = case.i.pure_decisions();
        for r in &case.refs {
            let tj = DecTables::new(&case.j, &case.grid, r)?;
            let ti = DecTables::new(&case.i, &i_grid, r)?;
            for &eps in &REDUCTION_EPS {
                let a = tj.constrained(eps)?.value;
                let b = ti.constrained(eps)?.value;
                out.push(Claim::eq(
                    format!("ma-to-hr[case={c},{},eps={eps}]", r.label),
                    "multi-agent DEC equals its hidden-reward view",
                    a,
                    b,
                    1e-6,
                ));
            }
        }
    }
    let case = embed_case(v)?;
    let mut rng = stream_rng(seed, 1000);
    let nus = vec![
        Reference::uniform(&case.base),
        Reference::model(&case.base, 0),
        Reference::random(&case.base, "dirichlet", &mut rng),
    ];
    let base_grid = case.base.pure_decisions();
    let shift = (6.0 / v as f64).sqrt();
    for nu in &nus {
        let lifted = lift_reference(&case, nu)?;
        let ti = DecTables::new(&case.base, &base_grid, nu)?;
        let tj = DecTables::new(&case.lift, &case.lift_grid, &lifted)?;
        for &eps in &REDUCTION_EPS {
            let di = ti.constrained(eps)?.value;
            let dj = tj.constrained(eps)?.value;
            let dj_shift = tj.constrained(eps + shift)?.value;
            out.push(Claim::le(format!("embed-lower[{},eps={eps}]", nu.label), "lift DEC <= base DEC", dj, di, 1e-6));
            out.push(Claim::le(
                format!("embed-upper[{},eps={eps}]", nu.label),
                "base DEC <= 6/sqrt V + lift DEC at eps + sqrt(6/V)",
                di,
                6.0 / (v as f64).sqrt() + dj_shift,
                1e-6,
            ));
        }
    }
    Ok(out)
}

// ---------------------------------------------------- constrained/offset

/// Every (tables, eps) pair of the layered sandwich and the reductions.
fn constrained_offset_claims(p: &Params) -> Result<Vec<Claim>> {
    let gammas = log_grid(p.f64("gamma_lo", 1e-2)?, p.f64("gamma_hi", 1e4)?, p.usize("gamma_n", 20)?);
    let mut sets: Vec<(String, DecTables, Vec<f64>)> = Vec::new();
    let inst = layered_needle_instance(3, 1.0)?;
    let grid = inst.pure_decisions();
    for r in layered_refs(&inst)? {
        sets.push((format!("layered/{}", r.label), DecTables::new(&inst, &grid, &r)?, LAYERED_EPS.to_vec()));
    }
    let seed = p.u64("seed", 3)?;
    for (c, case) in reduction_cases(seed, p.usize("instances", 5)?)?.iter().enumerate() {
        let i_grid = case.i.pure_decisions();
        for r in &case.refs {
            sets.push((format!("cce{c}/{}", r.label), DecTables::new(&case.j, &case.grid, r)?, REDUCTION_EPS.to_vec()));
            sets.push((format!("hr{c}/{}", r.label), DecTables::new(&case.i, &i_grid, r)?, REDUCTION_EPS.to_vec()));
        }
    }
    let v = p.usize("V", 10_000)?;
    let case = embed_case(v)?;
    let mut rng = stream_rng(seed, 1000);
    let nus = vec![
        Reference::uniform(&case.base),
        Reference::model(&case.base, 0),
        Reference::random(&case.base, "dirichlet", &mut rng),
    ];
    let shift = (6.0 / v as f64).sqrt();
    for nu in &nus {
        let lifted = lift_reference(&case, nu)?;
        sets.push((format!("base/{}", nu.label), DecTables::new(&case.base, &case.base.pure_decisions(), nu)?, REDUCTION_EPS.to_vec()));
        let eps: Vec<f64> = REDUCTION_EPS.iter().flat_map(|&e| [e, e + shift]).collect();
        sets.push((format!("lift/{}", lifted.label), DecTables::new(&case.lift, &case.lift_grid, &lifted)?, eps));
    }
    let mut out = Vec::new();
    for (name, tables, eps_list) in &sets {
        for &eps in eps_list {
            let c = tables.constrained(eps)?.value;
            let (bound, g) = offset_to_constrained_bound_tables(tables, eps, &gammas)?;
            out.push(
                Claim::le(format!("{name},eps={eps}"), "constrained DEC <= min_gamma offset DEC + gamma eps^2", c, bound, 1e-6)
                    .with_detail(format!("gamma {g:.4}")),
            );
        }
    }
    Ok(out)
}

// -------------------------------------------------------------- ordering

fn dec_ordering_claims(p: &Params) -> Result<Vec<Claim>> {
    let seed = p.u64("seed", 9)?;
    let count = p.usize("classes", 10)?;
    let mut out = Vec::new();
    for c in 0..count {
        let mut rng = stream_rng(seed, c as u64);
        let pay = random_payoffs(&[2, 2], 3, &mut rng);
        let ne = normal_form_instance(&[2, 2], &pay, Kind::Ne)?;
        let ce = with_kind(&ne, Kind::Ce)?;
        let cce = with_kind(&ne, Kind::Cce)?;
        let ne_grid = equilibrium_grid(&ne);
        let mut joint_grid: Vec<Decision> = ne_grid
            .iter()
            .map(|d| match d {
                Decision::Ne(parts) => Decision::Joint(product_to_joint(parts)),
                other => other.clone(),
            })
            .collect();
        for inst in [&ce, &cce] {
            for d in equilibrium_grid(inst) {
                if !joint_grid.contains(&d) {
                    joint_grid.push(d);
                }
            }
        }
        let refs = vec![Reference::uniform(&ne), Reference::random(&ne, "dirichlet", &mut rng)];
        for r in &refs {
            let t_ne = DecTables::new(&ne, &ne_grid, r)?;
            let t_ce = DecTables::new(&ce, &joint_grid, r)?;
            let t_cce = DecTables::new(&cce, &joint_grid, r)?;
            for gamma in [5.0, 20.0] {
                let v_ne = t_ne.offset(gamma)?.value;
                let v_ce = t_ce.offset(gamma)?.value;
                let v_cce = t_cce.offset(gamma)?.value;
                let id = format!("class={c},{},gamma={gamma}", r.label);
                out.push(Claim::le(format!("cce<=ce[{id}]"), "offset DEC: CCE <= CE", v_cce, v_ce, 1e-6));
                out.push(Claim::le(format!("ce<=ne[{id}]"), "offset DEC: CE <= NE", v_ce, v_ne, 1e-6));
            }
        }
    }
    Ok(out)
}

// ------------------------------------------------------------ separation

fn separation_claims(p: &Params) -> Result<Vec<Claim>> {
    let k = p.usize("K", 2)?;
    let a = p.usize("A", 4)?;
    let j = separation_instance(k, a)?;
    let grid = default_grid(&j, &[]);
    let pi0 = j.profile_index(&vec![0; k]);
    let mut out = Vec::new();
    for gamma in [1.0, 10.0, 100.0] {
        let mut best = f64::NEG_INFINITY;
        for r in std::iter::once(Reference::uniform(&j)).chain((0..j.n_models()).map(|m| Reference::model(&j, m))) {
            best = best.max(DecTables::new(&j, &grid, &r)?.offset(gamma)?.value);
        }
        out.push(Claim::le(format!("separation-dec[gamma={gamma}]"), "multi-agent offset DEC vanishes", best, 0.0, 1e-9));
        // Certificate: the all-zero profile is an equilibrium of every model.
        let cert = (0..j.n_models())
            .map(|m| j.suboptimality(m, &Decision::Ne(j.profile_of(pi0).iter().map(|&x| Dist::point(a + 1, x)).collect())))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        out.push(Claim::le(format!("separation-certificate[gamma={gamma}]"), "pi_0 has zero suboptimality under every model", cert, 0.0, 1e-12));
    }
    // Induced single-agent class of player 0 against every opponent
    // profile, versus a bandit class built directly.
    let gamma = 10.0;
    let induced = induced_single_agent(&j, 0, &all_opponent_profiles(&j, 0))?;
    let ind_grid = default_grid(&induced, &[]);
    let bandit = embedded_bandit(a)?;
    let b_grid = default_grid(&bandit, &[]);
    let b_ref = Reference::uniform(&bandit);
    let b_val = DecTables::new(&bandit, &b_grid, &b_ref)?.offset(gamma)?.value;
    // Matched reference: uniform over the models whose opponents all play 1.
    let ones = vec!["1"; k - 1].join(",");
    let idx: Vec<usize> = (1..=a).map(|x| induced.model_index(&format!("arm{x}|{ones}"))).collect::<Result<_>>()?;
    let mut w = vec![0.0; induced.n_models()];
    for &i in &idx {
        w[i] = 1.0 / a as f64;
    }
    let ind_ref = Reference::mixture("matched", Dist::new(w)?);
    let ind_val = DecTables::new(&induced, &ind_grid, &ind_ref)?.offset(gamma)?.value;
    out.push(
        Claim::ge("induced-vs-bandit[gamma=10]", "induced single-agent DEC >= half the bandit DEC", ind_val, 0.5 * b_val, 1e-9)
            .with_detail(format!("bandit DEC {b_val:.6}")),
    );
    Ok(out)
}

/// A-armed Bernoulli bandit with an extra null arm 0 of reward 0: arm x
/// has mean 1/2 + gap 1{x = a} under hypothesis a. Built directly, as the
/// independent counterpart of the induced class.
pub fn embedded_bandit(a: usize) -> Result<Instance> {
    let pay: Vec<Vec<Vec<f64>>> = (1..=a)
        .map(|good| {
            vec![(0..=a).map(|x| if x == 0 { 0.0 } else { 0.5 + if x == good { SEPARATION_GAP } else { 0.0 } }).collect()]
        })
        .collect();
    normal_form_instance(&[a + 1], &pay, Kind::Cce)
}

// ------------------------------------------------------------------- mwu

fn mwu_claims(p: &Params) -> Result<Vec<Claim>> {
    let seed = p.u64("seed", 1)?;
    let n = p.usize("sequences", 100)?;
    let (d, t, eta) = (5usize, 10usize, p.f64("eta", 0.3)?);
    let mut out = Vec::new();
    for s in 0..n {
        let mut rng = stream_rng(seed, s as u64);
        let f: Vec<Vec<f64>> = (0..t).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
        let c = mwu_regret_check(&f, eta);
        out.push(Claim::le(format!("mwu[{s}]"), "exponential weights regret with negative KL term", c.lhs, c.rhs, 1e-10));
    }
    Ok(out)
}

// ---------------------------------------------------------- gap-bounding

/// Regularity fit and interpolation on the layered DEC curve at T = 64. The
/// curve is the max over the two layered references.
fn gap_bounding_claims(p: &Params) -> Result<Vec<Claim>> {
    let t = p.usize("T", 64)?;
    let delta = p.f64("delta", 0.1)?;
    let inst = layered_needle_instance(3, 1.0)?;
    let grid = inst.pure_decisions();
    let tables: Vec<DecTables> =
        layered_refs(&inst)?.iter().map(|r| DecTables::new(&inst, &grid, r)).collect::<Result<_>>()?;
    let curve = |e: f64| -> Result<f64> {
        tables.iter().try_fold(f64::NEG_INFINITY, |acc, t| Ok(acc.max(t.constrained(e)?.value)))
    };
    let log_t = (t as f64).ln();
    let v = density_ratio(&inst, &grid)?;
    let c_t = c_of_t(t, v);
    let low = crate::dec::lower_bound_scale(&curve, t, 1.0, c_t)?;
    // Smallest eps with a positive value: the curve is a step function
    // with steps at sqrt of the reference distances.
    let mut steps: Vec<f64> =
        tables.iter().flat_map(|t| t.d.iter().map(|row| row[0].sqrt())).filter(|x| *x > 0.0).collect();
    steps.sort_by(f64::total_cmp);
    steps.dedup();
    let mut eps0 = f64::NAN;
    for &s in &steps {
        let e = s * (1.0 + 1e-9);
        if curve(e)? > 0.0 {
            eps0 = e;
            break;
        }
    }
    if !eps0.is_finite() {
        return Err(Error::Degenerate("layered DEC curve is identically zero".into()));
    }
    let e_up = eps_upper(t, delta, inst.n_models());
    let top = e_up.min(2.0);
    // Fit: smallest beta floor over a (C, c) grid with C, c <= log T.
    let mut fit: Option<(f64, f64, f64, f64)> = None;
    for ci in 0..12 {
        let cap = 1.5 + (log_t - 1.5) * ci as f64 / 11.0;
        for si in 1..60 {
            let c = 1.0 + (cap - 1.0) * si as f64 / 60.0;
            let e_low = eps0 * cap * cap / c;
            let lo = e_low * c / cap;
            if lo >= top {
                continue;
            }
            let mut pts = log_grid(lo, top, 40);
            pts.extend(steps.iter().copied().filter(|s| *s > lo && *s < top));
            let ok = pts.iter().try_fold(true, |acc, &e| -> Result<bool> {
                Ok(acc && curve(e)? <= c * c * curve(e / cap)? + 1e-12)
            })?;
            if ok {
                let beta = c.ln() / (cap / c).ln();
                if fit.is_none_or(|f| beta < f.2) {
                    fit = Some((cap, c, beta, e_low));
                }
                break;
            }
        }
    }
    let (cap, c, beta, e_low) =
        fit.ok_or_else(|| Error::Degenerate("no regularity constants at or below log T".into()))?;
    let sample: Vec<f64> = log_grid(e_low * c / cap, top, 40);
    let rep = gap_bound_report(&GapBoundInput {
        curve: &curve,
        eps_upper: e_up,
        eps_lower: e_low,
        c_reg: c,
        cap_c_reg: cap,
        beta,
        class_size: inst.n_models(),
        delta,
        c_t,
        sample_eps: sample,
        constant: 1.0,
    })?;
    let detail = format!(
        "eps_low fixed point degenerate: {}; regular range starts at {e_low:.4}; beta {beta:.4}; fitted C {:.4e}",
        low.degenerate, rep.fitted_c
    );
    Ok(vec![
        Claim::le("C_reg<=log T", "regularity constants are O(log T)", cap, log_t, 1e-12).with_detail(detail.clone()),
        Claim::le("c_reg<=log T", "regularity constants are O(log T)", c, log_t, 1e-12),
        Claim::le("regularity-failures", "regularity holds on the sampled range", rep.regularity_failures.len() as f64, 0.0, 0.0),
        Claim::le("interpolation", "dec(eps_up) <= (C log(1/delta) log|M| C_T C_reg/c_reg)^(b/(1+b)) dec(eps_low)^(1/(1+b))", rep.dec_upper, rep.rhs, 1e-12)
            .with_detail(detail),
    ])
}

// ----------------------------------------------------------------- maexo

/// The 2x2 CCE class used for the MAExO check.
pub fn maexo_instance(seed: u64) -> Result<Instance> {
    let mut rng = stream_rng(seed, 0);
    let pay = random_payoffs(&[2, 2], 4, &mut rng);
    normal_form_instance(&[2, 2], &pay, Kind::Cce)
}

/// Convex hull of a class as a finite class: the vertices plus `n`
/// Dirichlet mixtures, each with a dense mixture kernel.
pub fn hull_class(inst: &Instance, n: usize, seed: u64) -> Result<Instance> {
    let mut rng = stream_rng(seed, 1);
    let mut models = Vec::with_capacity(inst.n_models() + n);
    let dense = |label: String, w: &[f64]| -> FiniteModel {
        let rows = (0..inst.n_rows())
            .map(|r| {
                let mut row = vec![0.0; inst.n_obs()];
                for (m, &x) in w.iter().enumerate() {
                    if x > 0.0 {
                        for (acc, y) in row.iter_mut().zip(inst.row(m, r).iter()) {
                            *acc += x * y;
                        }
                    }
                }
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|y| *y /= s);
                row
            })
            .collect();
        FiniteModel { label, kernel: Kernel::Dense(rows), values: None }
    };
    for m in 0..inst.n_models() {
        models.push(dense(inst.models[m].label.clone(), Dist::point(inst.n_models(), m).probs()));
    }
    for i in 0..n {
        let r = Reference::random(inst, format!("mix{i}"), &mut rng);
        models.push(dense(format!("mix{i}"), r.weights.probs()));
    }
    Instance::new(
        inst.k,
        inst.kind,
        inst.pure_sets.clone(),
        inst.obs.clone(),
        models,
        inst.reveals_sigma,
        inst.reward_range,
        inst.family.clone(),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct MaexoBound {
    pub gamma: f64,
    pub dec: f64,
    pub bound: f64,
}

/// min over the gamma grid of dec^o_gamma(co J) + 16 gamma / T log(K D / 0.05),
/// times K. The DEC is a max over candidate references, so the result is a
/// lower-bound certificate on the true minimum.
pub fn maexo_bound(inst: &Instance, t: usize, gammas: &[f64], hull_n: usize, n_refs: usize, seed: u64) -> Result<MaexoBound> {
    let hull = hull_class(inst, hull_n, seed)?;
    let grid = equilibrium_grid(&hull);
    let devs = inst.sizes().iter().map(|s| s + 1).max().unwrap_or(1) as f64;
    let k = inst.k as f64;
    let refs: Vec<Reference> = (0..hull.n_models().min(inst.n_models() + n_refs)).map(|m| Reference::model(&hull, m)).collect();
    let tables: Vec<DecTables> = refs.iter().map(|r| DecTables::new(&hull, &grid, r)).collect::<Result<_>>()?;
    let mut best = MaexoBound { gamma: f64::NAN, dec: f64::NAN, bound: f64::INFINITY };
    for &g in gammas {
        let mut dec = f64::NEG_INFINITY;
        for tb in &tables {
            dec = dec.max(tb.offset(g)?.value);
        }
        let b = k * (dec + 16.0 * g / t as f64 * (k * devs / 0.05).ln());
        if b < best.bound {
            best = MaexoBound { gamma: g, dec, bound: b };
        }
    }
    Ok(best)
}

fn maexo_claims(p: &Params) -> Result<Vec<Claim>> {
    let seed = p.u64("seed", 21)?;
    let t = p.usize("T", 2000)?;
    let t_short = p.usize("T_short", 250)?;
    let seeds = p.usize("seeds", 20)?;
    let inst = maexo_instance(seed)?;
    let gammas = log_grid(p.f64("gamma_lo", 0.5)?, p.f64("gamma_hi", 500.0)?, p.usize("gamma_n", 16)?);
    let b = maexo_bound(&inst, t, &gammas, p.usize("hull", 200)?, p.usize("refs", 40)?, seed)?;
    let mut cfg = MaexoConfig::new(1.0 / (8.0 * b.gamma), seed);
    cfg.warm_iters = p.usize("warm_iters", cfg.warm_iters)?;
    cfg.solver_iters = p.usize("solver_iters", cfg.solver_iters)?;
    let algo = Algo::Maexo(cfg.clone());
    let long = estimate_risk(&algo, &inst, "h0", t, seeds, subseed(seed, 2), None)?;
    let short = estimate_risk(&algo, &inst, "h0", t_short, seeds, subseed(seed, 3), None)?;
    let detail = format!("gamma* {:.3}, eta {:.4}, dec {:.4}, K min_gamma {:.4}", b.gamma, cfg.eta, b.dec, b.bound);
    Ok(vec![
        Claim::le(format!("maexo-bound[T={t}]"), "median risk <= 2 K min_gamma (dec + 16 gamma/T log(K D/0.05))", long.median(), 2.0 * b.bound, 0.0)
            .with_detail(detail),
        Claim::le(format!("maexo-decrease[T={t_short}->{t}]"), "median risk decreases with T", long.median(), short.median(), 0.0)
            .with_detail(format!("T={t_short} median {:.4}", short.median())),
        Claim::ge("maexo-strict", "median risk decreases strictly", short.median() - long.median(), 1e-12, 0.0),
    ])
}

// ------------------------------------------------------------ estimation

/// The 8-model Bernoulli bandit class: four gaps times two arms.
pub fn estimation_class() -> Result<Instance> {
    bandit_gap_family(5, 2)
}

fn estimation_claims(p: &Params) -> Result<Vec<Claim>> {
    let t = p.usize("T", 500)?;
    let runs = p.usize("runs", 100)?;
    let seed = p.u64("seed", 17)?;
    let gamma = p.f64("gamma", 20.0)?;
    let inst = estimation_class()?;
    let grid = inst.pure_decisions();
    let delta = 0.05;
    let cap = 2.0 * (inst.n_models() as f64 / delta).ln();
    let ests: Vec<f64> = (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let truth = (r as usize) % inst.n_models();
            let env = Environment::with_index(&inst, truth)?;
            let mut rng = stream_rng(seed, r);
            let (trace, _) = e2d_pac_run(&inst, &env, &grid, t, &E2dConfig { gamma, seed }, &mut rng)?;
            est_h_diagnostic(&inst, &env, &grid, &trace)
        })
        .collect::<Result<_>>()?;
    let within = ests.iter().filter(|&&e| e <= cap).count();
    Ok(vec![Claim::ge(
        "est-h-within-cap",
        "Est_H <= 2 log(|M|/delta) in at least 90% of runs",
        within as f64,
        (0.9 * runs as f64).ceil(),
        0.0,
    )
    .with_detail(format!("cap {cap:.4}, max Est_H {:.4}", ests.iter().cloned().fold(0.0, f64::max)))])
}

// --------------------------------------------------------------- solvers

fn solver_claims(p: &Params) -> Result<Vec<Claim>> {
    let seed = p.u64("seed", 13)?;
    let games = p.usize("games", 50)?;
    let mut out = Vec::new();
    let diffs: Vec<(f64, f64)> = (0..games as u64)
        .into_par_iter()
        .map(|g| {
            let mut rng = stream_rng(seed, g);
            let a: Vec<Vec<f64>> = (0..20).map(|_| (0..20).map(|_| rng.random::<f64>()).collect()).collect();
            let lp = solve_lp(&a)?;
            let mw = solve_mw(&a, 2_000_000, 2e-5)?;
            Ok((lp.value, mw.value))
        })
        .collect::<Result<_>>()?;
    for (g, (lp, mw)) in diffs.into_iter().enumerate() {
        out.push(Claim::eq(format!("lp-vs-mw[{g}]"), "LP and multiplicative-weights game values agree", lp, mw, 1e-4));
    }
    let mesh = p.usize("mesh", 1000)?;
    for c in 0..p.usize("tiny", 5)? {
        let (inst, eps) = tiny_instance(seed, c as u64)?;
        let grid = inst.pure_decisions();
        let r = Reference::uniform(&inst);
        let tables = DecTables::new(&inst, &grid, &r)?;
        let exact = tables.constrained(eps)?.value;
        let h: Vec<Vec<f64>> = (0..inst.n_models())
            .map(|m| grid.iter().map(|d| inst.gap(m, d)).collect())
            .collect::<Result<_>>()?;
        let d: Vec<Vec<f64>> = (0..inst.n_models())
            .map(|m| {
                grid.iter()
                    .map(|dd| Ok(hellinger_sq_raw(&inst.obs_dist(m, dd)?, &r.obs_dist(&inst, dd)?)))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        let brute = brute_force_constrained(&h, &d, eps, mesh);
        out.push(Claim::eq(format!("constrained-vs-mesh[{c}]"), "constrained DEC matches a mesh brute force", exact, brute, 2e-3));
    }
    Ok(out)
}

/// Random hidden-reward instance with 3 decisions, 4 models and 3 symbols,
/// with an eps that makes the constraint bind for some but not all q.
pub fn tiny_instance(seed: u64, c: u64) -> Result<(Instance, f64)> {
    let mut rng = stream_rng(seed, 100 + c);
    let n_dec = 3;
    let n_obs = 3;
    let models = (0..4)
        .map(|m| {
            let rows = (0..n_dec)
                .map(|_| {
                    let w: Vec<f64> = (0..n_obs).map(|_| rng.random::<f64>() + 0.05).collect();
                    let s: f64 = w.iter().sum();
                    w.iter().map(|x| x / s).collect()
                })
                .collect();
            let values = (0..n_dec).map(|_| rng.random::<f64>()).collect();
            FiniteModel { label: format!("t{m}"), kernel: Kernel::Dense(rows), values: Some(values) }
        })
        .collect();
    let obs = (0..n_obs).map(|o| crate::instance::ObsSymbol::new(format!("o{o}"), vec![0.0], None)).collect();
    let labels = (0..n_dec).map(|i| i.to_string()).collect();
    let inst = Instance::new(1, Kind::Hr, vec![labels], obs, models, false, (0.0, 1.0), crate::instance::Family::Plain)?;
    let eps = 0.15 + 0.1 * rng.random::<f64>();
    Ok((inst, eps))
}

/// inf over (p, q) in a mesh of step 1/n on the simplex of
/// max over {m : q.d_m <= eps^2} of p.h_m (0 when no model is feasible).
pub fn brute_force_constrained(h: &[Vec<f64>], d: &[Vec<f64>], eps: f64, n: usize) -> f64 {
    let dim = h[0].len();
    let points = simplex_mesh(dim, n);
    let e2 = eps * eps;
    let mut masks: Vec<u64> = points
        .iter()
        .map(|q| {
            let mut mask = 0u64;
            for (m, row) in d.iter().enumerate() {
                let v: f64 = row.iter().zip(q).map(|(a, b)| a * b).sum();
                if v <= e2 {
                    mask |= 1 << m;
                }
            }
            mask
        })
        .collect();
    masks.sort_unstable();
    masks.dedup();
    let mut best = f64::INFINITY;
    for mask in masks {
        if mask == 0 {
            return 0.0;
        }
        let mut inner = f64::INFINITY;
        for pp in &points {
            let mut worst = f64::NEG_INFINITY;
            for (m, row) in h.iter().enumerate() {
                if mask & (1 << m) != 0 {
                    worst = worst.max(row.iter().zip(pp).map(|(a, b)| a * b).sum());
                }
            }
            inner = inner.min(worst);
        }
        best = best.min(inner);
    }
    best
}

fn simplex_mesh(dim: usize, n: usize) -> Vec<Vec<f64>> {
    fn rec(dim: usize, left: usize, n: usize, cur: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if dim == 1 {
            cur.push(left as f64 / n as f64);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for i in 0..=left {
            cur.push(i as f64 / n as f64);
            rec(dim - 1, left - i, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, n, n, &mut Vec::new(), &mut out);
    out
}

/// Variant check shared with the CLI.
pub fn parse_variant(offset: Option<f64>, constrained: Option<f64>) -> Result<Variant> {
    match (offset, constrained) {
        (Some(g), None) => Variant::Offset { gamma: g }.check(),
        (None, Some(e)) => Variant::Constrained { eps: e }.check(),
        _ => Err(Error::Config("give exactly one of --gamma (offset) or --eps (constrained)".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_counts() {
        assert_eq!(simplex_mesh(3, 4).len(), 15);
        assert!(simplex_mesh(3, 7).iter().all(|p| (p.iter().sum::<f64>() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        assert!((log_log_slope(&xs, &ys) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn stderr_of_constant_is_zero() {
        let e = RiskEstimate::from_risks(vec![0.2; 5], vec![]).unwrap();
        assert_eq!(e.stderr, 0.0);
        assert_eq!(e.median(), 0.2);
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(verify_suite("nope", &Params::default()).is_err());
    }
}

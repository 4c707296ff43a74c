//! Interactive learners. Every learner sees the model class (prior
//! knowledge) and interacts with the truth only through [`Environment`],
//! which hides the true model's identity.

mod maexo;
mod mwu;

pub use maexo::{
    gamma_objective, maexo_run, maexo_solve_step, DeviationSpace, GammaState, MaexoConfig, MaexoProblem,
};
pub use mwu::{exp_weights, kl, mwu_regret_check, MwuCheck};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constructions::LayeredNeedle;
use crate::dec::{DecTables, Reference};
use crate::dist::{argmin, Dist};
use crate::error::{Error, Result};
use crate::instance::{sample_index, Decision, Family, Instance, Kind};

/// The interaction boundary: plays a decision against the hidden true
/// model and returns the sampled profile row and observed symbol.
pub struct Environment<'a> {
    inst: &'a Instance,
    truth: usize,
}

impl<'a> Environment<'a> {
    pub fn new(inst: &'a Instance, truth_label: &str) -> Result<Self> {
        Ok(Environment { inst, truth: inst.model_index(truth_label)? })
    }

    pub fn with_index(inst: &'a Instance, truth: usize) -> Result<Self> {
        if truth >= inst.n_models() {
            return Err(Error::Shape(format!("model index {truth} out of range")));
        }
        Ok(Environment { inst, truth })
    }

    /// Sample a kernel row from the decision, then a symbol from that row.
    pub fn play(&self, d: &Decision, rng: &mut ChaCha8Rng) -> Result<(usize, usize)> {
        let w = self.inst.row_weights(d)?;
        let row = if w.len() == 1 {
            w[0].0
        } else {
            let probs: Vec<f64> = w.iter().map(|x| x.1).collect();
            w[sample_index(&probs, rng)].0
        };
        Ok((row, self.inst.sample_obs(self.truth, row, rng)))
    }

    /// Play a kernel row directly.
    pub fn play_row(&self, row: usize, rng: &mut ChaCha8Rng) -> usize {
        self.inst.sample_obs(self.truth, row, rng)
    }

    /// Escape hatch for measurement code outside the learners.
    pub(crate) fn truth(&self) -> usize {
        self.truth
    }
}

/// A learner's output: a randomized decision given as weighted atoms.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    #[serde(skip)]
    pub atoms: Vec<(f64, Decision)>,
    pub summary: String,
}

impl Outcome {
    pub fn point(d: Decision) -> Outcome {
        let summary = d.describe();
        Outcome { atoms: vec![(1.0, d)], summary }
    }

    /// Exact expected suboptimality under model `m`.
    pub fn risk(&self, inst: &Instance, m: usize) -> Result<f64> {
        let mut r = 0.0;
        for (w, d) in &self.atoms {
            if *w > 0.0 {
                r += w * inst.suboptimality(m, d)?;
            }
        }
        Ok(r)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    /// Exploration distribution (over the grid or over profiles).
    pub explore: Vec<f64>,
    pub row: usize,
    pub obs: usize,
    pub fhat: Option<Vec<Vec<f64>>>,
    pub posterior: Option<Vec<f64>>,
    pub entropy: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Trace {
    pub rounds: Vec<RoundRecord>,
    pub output: String,
}

// ---------------------------------------------------------------- posterior

/// Tempered exponential weights over the class: w_M <- w_M M(o|pi)^(1/2).
#[derive(Clone, Debug)]
pub struct Posterior {
    pub weights: Dist,
}

impl Posterior {
    pub fn uniform(n: usize) -> Posterior {
        Posterior { weights: Dist::uniform(n) }
    }

    pub fn reference(&self) -> Reference {
        Reference::mixture("posterior", self.weights.clone())
    }

    pub fn entropy(&self) -> f64 {
        -self.weights.probs().iter().filter(|&&w| w > 0.0).map(|w| w * w.ln()).sum::<f64>()
    }

    /// Update on the likelihoods M(o | pi) of each model.
    pub fn update_with(&self, likelihoods: &[f64]) -> Result<Posterior> {
        let w: Vec<f64> = self
            .weights
            .probs()
            .iter()
            .zip(likelihoods)
            .map(|(w, l)| w * l.max(0.0).sqrt())
            .collect();
        let s: f64 = w.iter().sum();
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::Degenerate("observation has zero likelihood under every weighted model".into()));
        }
        Ok(Posterior { weights: Dist::new(w.into_iter().map(|x| x / s).collect())? })
    }
}

pub fn posterior_update(inst: &Instance, post: &Posterior, d: &Decision, obs: usize) -> Result<Posterior> {
    let lik: Vec<f64> = (0..inst.n_models()).map(|m| inst.obs_dist(m, d).map(|p| p[obs])).collect::<Result<_>>()?;
    post.update_with(&lik)
}

// ---------------------------------------------------------------------- E2D

#[derive(Clone, Debug)]
pub struct E2dConfig {
    pub gamma: f64,
    pub seed: u64,
}

/// Per round: posterior mixture as reference, offset DEC on the grid,
/// explore with q = p, update. Output p^{t*} for a uniform t*; the
/// returned outcome keeps the whole mixture over t* so risk is exact.
pub fn e2d_pac_run(
    inst: &Instance,
    env: &Environment,
    grid: &[Decision],
    t: usize,
    cfg: &E2dConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Trace, Outcome)> {
    if grid.is_empty() {
        return Err(Error::Config("empty decision grid".into()));
    }
    let mut post = Posterior::uniform(inst.n_models());
    let mut trace = Trace::default();
    let mut mix = vec![0.0; grid.len()];
    // Likelihood rows M(.|pi) per grid decision, shared across rounds.
    let lik: Vec<Vec<Vec<f64>>> = grid
        .iter()
        .map(|d| (0..inst.n_models()).map(|m| inst.obs_dist(m, d)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let h_rows: Vec<Vec<f64>> =
        (0..inst.n_models()).map(|m| grid.iter().map(|d| inst.suboptimality(m, d)).collect()).collect::<Result<_>>()?;
    for round in 0..t {
        let reference = post.weights.probs();
        let mbars: Vec<Vec<f64>> = (0..grid.len())
            .map(|i| {
                let mut mbar = vec![0.0; inst.n_obs()];
                for (mm, &w) in reference.iter().enumerate() {
                    if w > 0.0 {
                        for (a, b) in mbar.iter_mut().zip(&lik[i][mm]) {
                            *a += w * b;
                        }
                    }
                }
                mbar
            })
            .collect();
        let d_rows: Vec<Vec<f64>> = (0..inst.n_models())
            .map(|m| (0..grid.len()).map(|i| crate::dist::hellinger_sq_raw(&lik[i][m], &mbars[i])).collect())
            .collect();
        let labels = inst.models.iter().map(|m| m.label.clone()).collect();
        let tables = DecTables::from_raw(h_rows.clone(), d_rows, labels, "posterior".into(), false);
        let res = tables.offset(cfg.gamma)?;
        let p = res.p.clone();
        for (acc, x) in mix.iter_mut().zip(&p) {
            *acc += x / t as f64;
        }
        let i = sample_index(&p, rng);
        let (row, obs) = env.play(&grid[i], rng)?;
        let l: Vec<f64> = (0..inst.n_models()).map(|m| lik[i][m][obs]).collect();
        post = post.update_with(&l)?;
        trace.rounds.push(RoundRecord {
            round,
            explore: p,
            row,
            obs,
            posterior: Some(post.weights.probs().to_vec()),
            entropy: Some(post.entropy()),
            residual: Some(res.gap),
            ..Default::default()
        });
    }
    let outcome = if t == 0 {
        let tables = DecTables::new(inst, grid, &post.reference())?;
        let p = tables.offset(cfg.gamma)?.p;
        weighted_outcome(grid, &p)
    } else {
        weighted_outcome(grid, &mix)
    };
    trace.output = outcome.summary.clone();
    Ok((trace, outcome))
}

fn weighted_outcome(grid: &[Decision], w: &[f64]) -> Outcome {
    let atoms: Vec<(f64, Decision)> =
        w.iter().zip(grid).filter(|(x, _)| **x > 0.0).map(|(x, d)| (*x, d.clone())).collect();
    let summary = atoms.iter().map(|(x, d)| format!("{x:.4}*{}", d.describe())).collect::<Vec<_>>().join(" + ");
    Outcome { atoms, summary }
}

// ---------------------------------------------------------------- first-hit

/// Output the first non-bottom symbol seen (per layer for layered
/// instances); uniform when none shows up.
pub fn first_hit_run(inst: &Instance, env: &Environment, t: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    match &inst.family {
        Family::Twin { n } => {
            let n = *n;
            for _ in 0..t {
                let o = env.play_row(0, rng);
                if o < n {
                    return Ok(Outcome::point(Decision::Hr(o)));
                }
            }
            Ok(uniform_outcome(n))
        }
        Family::Layered { l, c_prob } => {
            let needle = LayeredNeedle::new(*l, *c_prob)?;
            let sizes: Vec<usize> = needle.n.iter().map(|x| x + 1).collect();
            let mut hits: Vec<Option<usize>> = vec![None; *l];
            for _ in 0..t {
                let mut o = env.play_row(0, rng);
                for layer in (0..*l).rev() {
                    let part = o % sizes[layer];
                    o /= sizes[layer];
                    if hits[layer].is_none() && part < needle.n[layer] {
                        hits[layer] = Some(part);
                    }
                }
            }
            Ok(layered_outcome(&needle, &hits))
        }
        _ => Err(Error::Unsupported("first-hit needs a twin or layered instance".into())),
    }
}

fn uniform_outcome(n: usize) -> Outcome {
    Outcome {
        atoms: (0..n).map(|i| (1.0 / n as f64, Decision::Hr(i))).collect(),
        summary: format!("uniform over {n}"),
    }
}

/// Layers without a hit are uniform; the outcome is the product.
fn layered_outcome(needle: &LayeredNeedle, hits: &[Option<usize>]) -> Outcome {
    let mut atoms: Vec<(f64, Vec<usize>)> = vec![(1.0, Vec::new())];
    for (layer, hit) in hits.iter().enumerate() {
        let choices: Vec<(f64, usize)> = match hit {
            Some(x) => vec![(1.0, *x)],
            None => {
                let nl = needle.n[layer];
                (0..nl).map(|x| (1.0 / nl as f64, x)).collect()
            }
        };
        atoms = atoms
            .into_iter()
            .flat_map(|(w, pre)| {
                choices.iter().map(move |&(c, x)| {
                    let mut v = pre.clone();
                    v.push(x);
                    (w * c, v)
                })
            })
            .collect();
    }
    Outcome {
        atoms: atoms.into_iter().map(|(w, v)| (w, Decision::Hr(needle.encode(&v)))).collect(),
        summary: format!("{hits:?}"),
    }
}

/// Factored first-hit on a layered needle instance of any size up to the
/// factored cap. Returns the exact conditional risk given the observed
/// stream: hit layers contribute 0 (a hit is never the needle), silent
/// layers contribute alpha_l / N_l.
pub fn first_hit_layered<R: Rng + ?Sized>(needle: &LayeredNeedle, v: &[usize], t: usize, rng: &mut R) -> f64 {
    let mut hit = vec![false; needle.l];
    for _ in 0..t {
        let o = needle.sample_obs(v, rng);
        for (layer, &x) in o.iter().enumerate() {
            if x < needle.n[layer] {
                hit[layer] = true;
            }
        }
    }
    (0..needle.l).filter(|&l| !hit[l]).map(|l| needle.alpha[l] / needle.n[l] as f64).sum()
}

/// Exact risk of first-hit on I^{delta, beta} with N decisions.
pub fn first_hit_twin_risk(n: usize, delta: f64, beta: f64, t: usize) -> f64 {
    let silent = (1.0 - delta * (n as f64 - 1.0) - beta).powi(t as i32);
    silent / n as f64 + (1.0 - silent) * beta / (beta + delta * (n as f64 - 1.0))
}

// ----------------------------------------------------------------- uniform

/// Explore uniformly over the grid, then output the grid decision that
/// is best for the posterior-mean model. For hidden-reward instances the
/// mean model's gap is minimized exactly by maximizing the posterior-mean
/// value; for multi-agent instances the posterior-mean suboptimality is
/// used.
pub fn uniform_baseline_run(
    inst: &Instance,
    env: &Environment,
    grid: &[Decision],
    t: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Trace, Outcome)> {
    if grid.is_empty() {
        return Err(Error::Config("empty decision grid".into()));
    }
    let mut post = Posterior::uniform(inst.n_models());
    let mut trace = Trace::default();
    let decision_independent = inst.decision_independent();
    for round in 0..t {
        let i = rng.random_range(0..grid.len());
        let (row, obs) = env.play(&grid[i], rng)?;
        let lik: Vec<f64> = if decision_independent {
            (0..inst.n_models()).map(|m| inst.row(m, 0)[obs]).collect()
        } else {
            (0..inst.n_models()).map(|m| inst.obs_dist(m, &grid[i]).map(|p| p[obs])).collect::<Result<_>>()?
        };
        post = post.update_with(&lik)?;
        trace.rounds.push(RoundRecord { round, row, obs, ..Default::default() });
    }
    let w = post.weights.probs();
    let score: Vec<f64> = grid
        .iter()
        .map(|d| -> Result<f64> {
            let mut s = 0.0;
            for (m, &wm) in w.iter().enumerate() {
                if wm > 0.0 {
                    s += wm * if inst.kind == Kind::Hr { -inst.hidden_value(m, d)? } else { inst.suboptimality(m, d)? };
                }
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let out = Outcome::point(grid[argmin(&score)].clone());
    trace.output = out.summary.clone();
    Ok((trace, out))
}

/// Cumulative E_{pi ~ q^t} H^2(M*(pi), M_hat^t(pi)) along an E2D trace.
/// Uses the posterior before each round's update, which is the estimate
/// the learner committed to.
pub fn est_h_diagnostic(inst: &Instance, env: &Environment, grid: &[Decision], trace: &Trace) -> Result<f64> {
    let truth = env.truth();
    let mut prior = Dist::uniform(inst.n_models()).into_vec();
    let mut total = 0.0;
    let rows: Vec<Vec<Vec<f64>>> = grid
        .iter()
        .map(|d| (0..inst.n_models()).map(|m| inst.obs_dist(m, d)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    for rec in &trace.rounds {
        for (i, &qi) in rec.explore.iter().enumerate() {
            if qi == 0.0 {
                continue;
            }
            let mut mhat = vec![0.0; inst.n_obs()];
            for (m, &w) in prior.iter().enumerate() {
                for (a, b) in mhat.iter_mut().zip(&rows[i][m]) {
                    *a += w * b;
                }
            }
            total += qi * crate::dist::hellinger_sq_raw(&rows[i][truth], &mhat);
        }
        prior = rec.posterior.clone().ok_or_else(|| Error::Config("trace lacks posterior weights".into()))?;
    }
    Ok(total)
}

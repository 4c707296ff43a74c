//! Multi-agent exploration by optimization.
//!
//! Each round the players keep exponential weights q_k over their
//! deviations, jointly pick a play distribution pi and estimator tensors
//! g_k by minimizing the worst case of the objective Gamma over models and
//! deviation profiles, sample a profile, and feed g_k / pi(sigma) back to
//! their weights.

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Environment, Outcome, RoundRecord, Trace};
use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::instance::{sample_index, Decision, Instance, Kind};
use crate::linalg::project_floored_simplex;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeviationSpace {
    /// Fixed actions plus the identity.
    Cce,
    /// All maps from own actions to own actions.
    Ce,
}

#[derive(Clone, Debug)]
pub struct MaexoConfig {
    pub eta: f64,
    /// Gradient steps in the first round.
    pub solver_iters: usize,
    /// Steps in later rounds, which start from the previous solution.
    pub warm_iters: usize,
    pub pi_floor: f64,
    /// Bound on |g|; defaults to max(1, 1/eta).
    pub g_clamp: Option<f64>,
    /// Initial gradient step; adapted by backtracking.
    pub step: f64,
    /// Soft-max temperature of the surrogate objective.
    pub tau: f64,
    pub seed: u64,
}

impl MaexoConfig {
    pub fn new(eta: f64, seed: u64) -> MaexoConfig {
        MaexoConfig {
            eta,
            solver_iters: 2000,
            warm_iters: 60,
            pi_floor: 1e-4,
            g_clamp: None,
            step: 0.1,
            tau: 0.005,
            seed,
        }
    }

    fn clamp(&self) -> f64 {
        self.g_clamp.unwrap_or_else(|| 1f64.max(1.0 / self.eta))
    }

    fn check(&self, n_prof: usize) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Config("eta must be positive".into()));
        }
        if !(self.pi_floor > 0.0 && self.pi_floor < 1.0) || self.pi_floor * n_prof as f64 >= 1.0 {
            return Err(Error::Config("pi_floor must lie in (0, 1) and be below 1/|Sigma| in total".into()));
        }
        if !(self.tau > 0.0 && self.step > 0.0) {
            return Err(Error::Config("tau and step must be positive".into()));
        }
        if self.clamp() <= 0.0 {
            return Err(Error::Config("g_clamp must be positive".into()));
        }
        Ok(())
    }
}

/// Everything about the instance that Gamma needs, tabulated once.
#[derive(Clone, Debug)]
pub struct MaexoProblem {
    pub k: usize,
    pub n_prof: usize,
    pub space: DeviationSpace,
    /// Deviation count per player.
    pub devs: Vec<usize>,
    /// gain[m][k][dev][sigma] = f_k(U_k(dev, sigma)) - f_k(sigma).
    pub gain: Vec<Vec<Vec<Vec<f64>>>>,
    /// (sigma, symbol) pairs possible under some model.
    pub pairs: Vec<(usize, usize)>,
    /// prob[m][pair] = M(o | sigma).
    pub prob: Vec<Vec<f64>>,
}

impl MaexoProblem {
    pub fn new(inst: &Instance) -> Result<MaexoProblem> {
        let space = match inst.kind {
            Kind::Cce => DeviationSpace::Cce,
            Kind::Ce => DeviationSpace::Ce,
            _ => return Err(Error::Unsupported("MAExO runs on CCE and CE instances".into())),
        };
        if space == DeviationSpace::Ce && inst.sizes().iter().any(|&s| s > 3) {
            return Err(Error::Unsupported("CE deviations are enumerated only for |Sigma_k| <= 3".into()));
        }
        let n_prof = inst.n_rows();
        let sizes = inst.sizes().to_vec();
        let strides = inst.strides().to_vec();
        // Deviation maps, as the image of each own action.
        let maps: Vec<Vec<Vec<usize>>> = sizes
            .iter()
            .map(|&s| match space {
                DeviationSpace::Cce => {
                    let mut v: Vec<Vec<usize>> = (0..s).map(|a| vec![a; s]).collect();
                    v.push((0..s).collect());
                    v
                }
                DeviationSpace::Ce => (0..s.pow(s as u32))
                    .map(|mut code| {
                        (0..s)
                            .map(|_| {
                                let x = code % s;
                                code /= s;
                                x
                            })
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        let devs = maps.iter().map(|m| m.len()).collect();
        let gain = (0..inst.n_models())
            .map(|m| {
                (0..inst.k)
                    .map(|j| {
                        let tab = inst.reward_table(m, j);
                        maps[j]
                            .iter()
                            .map(|phi| {
                                (0..n_prof)
                                    .map(|r| {
                                        let a = (r / strides[j]) % sizes[j];
                                        let dev = r - a * strides[j] + phi[a] * strides[j];
                                        tab[dev] - tab[r]
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut pairs = Vec::new();
        for r in 0..n_prof {
            for o in 0..inst.n_obs() {
                if (0..inst.n_models()).any(|m| inst.row(m, r)[o] > 0.0) {
                    pairs.push((r, o));
                }
            }
        }
        let prob = (0..inst.n_models()).map(|m| pairs.iter().map(|&(r, o)| inst.row(m, r)[o]).collect()).collect();
        Ok(MaexoProblem { k: inst.k, n_prof, space, devs, gain, pairs, prob })
    }

    pub fn n_models(&self) -> usize {
        self.gain.len()
    }

    pub fn pair_index(&self, sigma: usize, obs: usize) -> Option<usize> {
        self.pairs.iter().position(|&p| p == (sigma, obs))
    }
}

/// Play distribution, estimators and the reference weights they answer.
#[derive(Clone, Debug, Serialize)]
pub struct GammaState {
    pub pi: Vec<f64>,
    /// g[k][dev][pair].
    pub g: Vec<Vec<Vec<f64>>>,
    pub q: Vec<Vec<f64>>,
    /// Outer objective at (pi, g).
    pub value: f64,
    /// Improvement of the best value over the last 20 iterates.
    pub residual: f64,
}

/// Player k's part of Gamma under model m with deviation `star`.
fn term(p: &MaexoProblem, q: &[f64], eta: f64, pi: &[f64], gk: &[Vec<f64>], star: usize, m: usize, k: usize) -> f64 {
    let mut first = 0.0;
    for (s, &w) in pi.iter().enumerate() {
        first += w * p.gain[m][k][star][s];
    }
    let mut second = 0.0;
    for (c, &(s, _)) in p.pairs.iter().enumerate() {
        let mo = p.prob[m][c];
        if mo == 0.0 {
            continue;
        }
        let scale = eta / pi[s];
        let gs = gk[star][c];
        let mut sum = 0.0;
        for (d, &qd) in q.iter().enumerate() {
            sum += qd * (scale * (gk[d][c] - gs)).exp();
        }
        second += pi[s] * mo * (sum - 1.0);
    }
    first + second / eta
}

/// Gamma_{q, eta}(pi, g; pi_star, M) by direct summation.
pub fn gamma_objective(
    p: &MaexoProblem,
    q: &[Vec<f64>],
    eta: f64,
    pi: &[f64],
    g: &[Vec<Vec<f64>>],
    pi_star: &[usize],
    m: usize,
) -> Result<f64> {
    if let Some(s) = pi.iter().position(|&x| x <= 0.0) {
        return Err(Error::Config(format!("pi({s}) = 0 violates the floor")));
    }
    Ok((0..p.k).map(|k| term(p, &q[k], eta, pi, &g[k], pi_star[k], m, k)).sum())
}

/// max over models and deviation profiles; the sup over deviation
/// profiles splits across players once the model is fixed.
fn outer(p: &MaexoProblem, q: &[Vec<f64>], eta: f64, pi: &[f64], g: &[Vec<Vec<f64>>]) -> (f64, usize, Vec<usize>) {
    let mut best = (f64::NEG_INFINITY, 0, vec![0; p.k]);
    for m in 0..p.n_models() {
        let mut total = 0.0;
        let mut stars = Vec::with_capacity(p.k);
        for k in 0..p.k {
            let mut bk = (f64::NEG_INFINITY, 0);
            for star in 0..p.devs[k] {
                let v = term(p, &q[k], eta, pi, &g[k], star, m, k);
                if v > bk.0 || v.is_nan() {
                    bk = (v, star);
                }
            }
            total += bk.0;
            stars.push(bk.1);
        }
        if total > best.0 || total.is_nan() {
            best = (total, m, stars);
        }
    }
    best
}

/// Adds `coef` times the gradient of player k's term under (m, star).
#[allow(clippy::too_many_arguments)]
fn term_grad(
    p: &MaexoProblem,
    q: &[f64],
    eta: f64,
    pi: &[f64],
    gk: &[Vec<f64>],
    star: usize,
    m: usize,
    k: usize,
    coef: f64,
    gpi: &mut [f64],
    ggk: &mut [Vec<f64>],
) {
    for (s, x) in gpi.iter_mut().enumerate() {
        *x += coef * p.gain[m][k][star][s];
    }
    for (c, &(s, _)) in p.pairs.iter().enumerate() {
        let mo = p.prob[m][c];
        if mo == 0.0 {
            continue;
        }
        let scale = eta / pi[s];
        let gs = gk[star][c];
        let mut total = 0.0;
        let mut acc_pi = 0.0;
        for (d, &qd) in q.iter().enumerate() {
            let z = scale * (gk[d][c] - gs);
            let ez = z.exp();
            total += qd * ez;
            acc_pi += qd * ((ez - 1.0) - z * ez);
            ggk[d][c] += coef * mo * qd * ez;
        }
        ggk[star][c] -= coef * mo * total;
        gpi[s] += coef * mo * acc_pi / eta;
    }
}

fn lse(xs: &[f64], tau: f64) -> (f64, Vec<f64>) {
    let mx = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !mx.is_finite() {
        return (mx, vec![0.0; xs.len()]);
    }
    let w: Vec<f64> = xs.iter().map(|x| ((x - mx) / tau).exp()).collect();
    let z: f64 = w.iter().sum();
    (mx + tau * z.ln(), w.iter().map(|x| x / z).collect())
}

type Grad = (Vec<f64>, Vec<Vec<Vec<f64>>>);

/// Soft-max surrogate of the worst-case Gamma at temperature tau: value,
/// and its gradient when `want_grad`. Overestimates the hard max by at most
/// tau (log|M| + sum_k log|Pi'_k|).
fn smooth(p: &MaexoProblem, q: &[Vec<f64>], eta: f64, pi: &[f64], g: &[Vec<Vec<f64>>], tau: f64, want_grad: bool) -> (f64, Option<Grad>) {
    let nm = p.n_models();
    let mut per_model = vec![0.0; nm];
    let mut inner_w: Vec<Vec<Vec<f64>>> = Vec::with_capacity(nm);
    for (m, pm) in per_model.iter_mut().enumerate() {
        let mut ws = Vec::with_capacity(p.k);
        for k in 0..p.k {
            let vals: Vec<f64> = (0..p.devs[k]).map(|st| term(p, &q[k], eta, pi, &g[k], st, m, k)).collect();
            let (v, w) = lse(&vals, tau);
            *pm += v;
            ws.push(w);
        }
        inner_w.push(ws);
    }
    let (val, outer_w) = lse(&per_model, tau);
    if !want_grad || !val.is_finite() {
        return (val, None);
    }
    let mut gpi = vec![0.0; p.n_prof];
    let mut gg: Vec<Vec<Vec<f64>>> = g.iter().map(|gk| gk.iter().map(|r| vec![0.0; r.len()]).collect()).collect();
    for m in 0..nm {
        if outer_w[m] < 1e-12 {
            continue;
        }
        for k in 0..p.k {
            for st in 0..p.devs[k] {
                let c = outer_w[m] * inner_w[m][k][st];
                if c >= 1e-12 {
                    term_grad(p, &q[k], eta, pi, &g[k], st, m, k, c, &mut gpi, &mut gg[k]);
                }
            }
        }
    }
    (val, Some((gpi, gg)))
}

/// Approximate argmin over (pi, g) of the worst-case Gamma. Minimizes a
/// soft-max surrogate by projected gradient with Armijo backtracking; the
/// temperature is lowered geometrically during a cold start. Starts from
/// `warm` when given and returns the iterate with the best hard value.
pub fn maexo_solve_step(
    p: &MaexoProblem,
    q: &[Vec<f64>],
    cfg: &MaexoConfig,
    iters: usize,
    warm: Option<&GammaState>,
) -> Result<GammaState> {
    cfg.check(p.n_prof)?;
    let eta = cfg.eta;
    let floor = cfg.pi_floor / p.n_prof as f64;
    let clamp = cfg.clamp();
    let cold = || -> (Vec<f64>, Vec<Vec<Vec<f64>>>) {
        (vec![1.0 / p.n_prof as f64; p.n_prof], (0..p.k).map(|k| vec![vec![0.0; p.pairs.len()]; p.devs[k]]).collect())
    };
    let (mut pi, mut g) = match warm {
        Some(w) => (w.pi.clone(), w.g.clone()),
        None => cold(),
    };
    if !outer(p, q, eta, &pi, &g).0.is_finite() {
        // A warm start can overflow under the new q; fall back.
        (pi, g) = cold();
    }
    let tau_end = cfg.tau;
    let tau_start = if warm.is_some() { tau_end } else { (100.0 * tau_end).max(tau_end) };
    let mut step = cfg.step;
    let mut best = (outer(p, q, eta, &pi, &g).0, pi.clone(), g.clone());
    let mut history = vec![best.0];
    for it in 0..iters {
        let frac = if iters > 1 { (it as f64 / (iters - 1) as f64).min(1.0) } else { 1.0 };
        let tau = tau_start * (tau_end / tau_start).powf((2.0 * frac).min(1.0));
        let (f0, grad) = smooth(p, q, eta, &pi, &g, tau, true);
        let Some((gpi, gg)) = grad else {
            return Err(Error::Config("objective overflowed; raise pi_floor or lower eta".into()));
        };
        let mut accepted = false;
        for _ in 0..40 {
            let mut pi_new: Vec<f64> = pi.iter().zip(&gpi).map(|(x, d)| x - step * d).collect();
            project_floored_simplex(&mut pi_new, floor);
            let mut g_new = g.clone();
            for (rows, grows) in g_new.iter_mut().zip(&gg) {
                for (row, grow) in rows.iter_mut().zip(grows) {
                    for (x, d) in row.iter_mut().zip(grow) {
                        *x = (*x - step * d).clamp(-clamp, clamp);
                    }
                }
            }
            // Armijo condition along the projected direction.
            let mut dec = 0.0;
            for ((a, b), d) in pi.iter().zip(&pi_new).zip(&gpi) {
                dec += d * (a - b);
            }
            let mut dist2 = pi.iter().zip(&pi_new).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            for ((rows, nrows), grows) in g.iter().zip(&g_new).zip(&gg) {
                for ((row, nrow), grow) in rows.iter().zip(nrows).zip(grows) {
                    for ((a, b), d) in row.iter().zip(nrow).zip(grow) {
                        dec += d * (a - b);
                        dist2 += (a - b).powi(2);
                    }
                }
            }
            let (f1, _) = smooth(p, q, eta, &pi_new, &g_new, tau, false);
            if f1.is_finite() && f1 <= f0 - 0.5 * dec.max(0.0) + 1e-15 {
                pi = pi_new;
                g = g_new;
                accepted = true;
                step *= 1.5;
                if dist2 == 0.0 {
                    step = cfg.step;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        let hard = outer(p, q, eta, &pi, &g).0;
        if hard < best.0 {
            best = (hard, pi.clone(), g.clone());
        }
        history.push(best.0);
    }
    let residual = if history.len() > 20 { history[history.len() - 21] - best.0 } else { 0.0 };
    Ok(GammaState { pi: best.1, g: best.2, q: q.to_vec(), value: best.0, residual })
}

/// Run MAExO for T rounds against the environment. The output is the
/// empirical distribution of the sampled profiles.
pub fn maexo_run(
    inst: &Instance,
    env: &Environment,
    t: usize,
    cfg: &MaexoConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Trace, Outcome)> {
    let problem = MaexoProblem::new(inst)?;
    cfg.check(problem.n_prof)?;
    let mut cum: Vec<Vec<f64>> = problem.devs.iter().map(|&d| vec![0.0; d]).collect();
    let mut counts = vec![0.0; problem.n_prof];
    let mut trace = Trace::default();
    let mut state: Option<GammaState> = None;
    for round in 0..t {
        let q: Vec<Vec<f64>> = cum.iter().map(|c| super::exp_weights(c, cfg.eta)).collect();
        let iters = if state.is_some() { cfg.warm_iters } else { cfg.solver_iters };
        let st = maexo_solve_step(&problem, &q, cfg, iters, state.as_ref())?;
        let sigma = sample_index(&st.pi, rng);
        let obs = env.play_row(sigma, rng);
        counts[sigma] += 1.0;
        let pair = problem.pair_index(sigma, obs);
        let fhat: Vec<Vec<f64>> = (0..problem.k)
            .map(|k| {
                (0..problem.devs[k])
                    .map(|d| pair.map_or(0.0, |c| st.g[k][d][c] / st.pi[sigma]))
                    .collect()
            })
            .collect();
        for (c, f) in cum.iter_mut().zip(&fhat) {
            for (a, b) in c.iter_mut().zip(f) {
                *a += b;
            }
        }
        trace.rounds.push(RoundRecord {
            round,
            explore: st.pi.clone(),
            row: sigma,
            obs,
            fhat: Some(fhat),
            residual: Some(st.residual),
            ..Default::default()
        });
        state = Some(st);
    }
    let out = if t == 0 {
        Outcome::point(Decision::Joint(Dist::uniform(problem.n_prof)))
    } else {
        let total: f64 = counts.iter().sum();
        Outcome::point(Decision::Joint(Dist::new(counts.iter().map(|c| c / total).collect())?))
    };
    trace.output = out.summary.clone();
    Ok((trace, out))
}

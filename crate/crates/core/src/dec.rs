//! Offset and constrained decision-estimation coefficients on a finite
//! decision grid, for a fixed reference model in the convex hull of the
//! class.
//!
//! Both variants reduce to zero-sum matrix games once two tables are
//! known: h[m][i], the suboptimality of grid decision i under model m, and
//! d[m][i], the squared Hellinger distance between M_m and the reference
//! at decision i.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::dist::{hellinger_sq_raw, Dist};
use crate::error::{Error, Result};
use crate::game::{solve_lp, GameSolution};
use crate::instance::{Decision, Instance, Kind};
use crate::linalg::project_floored_simplex;

/// An element of co(M): mixture weights over the model labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub label: String,
    pub weights: Dist,
}

impl Reference {
    pub fn model(inst: &Instance, m: usize) -> Reference {
        Reference { label: format!("model:{}", inst.models[m].label), weights: Dist::point(inst.n_models(), m) }
    }

    pub fn uniform(inst: &Instance) -> Reference {
        Reference { label: "uniform".into(), weights: Dist::uniform(inst.n_models()) }
    }

    pub fn mixture(label: impl Into<String>, weights: Dist) -> Reference {
        Reference { label: label.into(), weights }
    }

    /// Dirichlet(1, ..., 1) mixture.
    pub fn random<R: Rng + ?Sized>(inst: &Instance, label: impl Into<String>, rng: &mut R) -> Reference {
        let g = Gamma::new(1.0, 1.0).expect("valid gamma");
        let mut w: Vec<f64> = (0..inst.n_models()).map(|_| g.sample(rng)).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        Reference { label: label.into(), weights: Dist::new(w).expect("normalized") }
    }

    /// Observation distribution of the reference at a decision.
    pub fn obs_dist(&self, inst: &Instance, d: &Decision) -> Result<Vec<f64>> {
        if self.weights.len() != inst.n_models() {
            return Err(Error::Shape("reference weights do not match the class".into()));
        }
        let mut out = vec![0.0; inst.n_obs()];
        for (m, &w) in self.weights.probs().iter().enumerate() {
            if w > 0.0 {
                for (acc, p) in out.iter_mut().zip(inst.obs_dist(m, d)?) {
                    *acc += w * p;
                }
            }
        }
        Ok(out)
    }
}

/// Which side of the true (continuous, full-hull) value a number sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundDirection {
    /// Exact on the grid; an upper bound on the inf over all of Delta(Pi).
    GridUpper,
    /// Alternating heuristic over q: an upper bound even on the grid.
    HeuristicUpper,
    /// Max over a finite candidate set of references: a lower bound on the
    /// sup over co(M).
    CandidateLower,
}

impl BoundDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundDirection::GridUpper => "grid-upper",
            BoundDirection::HeuristicUpper => "heuristic-upper",
            BoundDirection::CandidateLower => "candidate-lower",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Variant {
    Offset { gamma: f64 },
    Constrained { eps: f64 },
}

impl Variant {
    pub fn check(self) -> Result<Self> {
        let x = match self {
            Variant::Offset { gamma } => gamma,
            Variant::Constrained { eps } => eps,
        };
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Config(format!("DEC parameter must be positive, got {x}")));
        }
        Ok(self)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Offset { .. } => "offset",
            Variant::Constrained { .. } => "constrained",
        }
    }

    pub fn param(self) -> f64 {
        match self {
            Variant::Offset { gamma } => gamma,
            Variant::Constrained { eps } => eps,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecResult {
    pub variant: &'static str,
    pub param: f64,
    pub reference: String,
    pub value: f64,
    /// Witness over the grid for the exploitation side.
    pub p: Vec<f64>,
    /// Witness over the grid for the exploration side (constrained only).
    pub q: Option<Vec<f64>>,
    /// Labels of the models carrying the sup.
    pub active: Vec<String>,
    pub gap: f64,
    pub direction: BoundDirection,
    pub grid_size: usize,
    pub note: String,
}

/// Per-model tables on a grid against one reference, after merging models
/// whose rows coincide and dropping dominated ones.
#[derive(Clone, Debug)]
pub struct DecTables {
    pub h: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
    /// Original model indices merged into each row.
    pub members: Vec<Vec<usize>>,
    pub labels: Vec<String>,
    pub grid_size: usize,
    pub reference: String,
    pub decision_independent: bool,
}

const FEAS_TOL: f64 = 1e-12;

fn key(v: &[f64]) -> Vec<i64> {
    v.iter().map(|x| (x * 1e12).round() as i64).collect()
}

impl DecTables {
    /// Evaluate h and d on the grid for every model.
    pub fn new(inst: &Instance, grid: &[Decision], reference: &Reference) -> Result<DecTables> {
        if grid.is_empty() {
            return Err(Error::Config("empty decision grid".into()));
        }
        let refs: Vec<Vec<f64>> = grid.iter().map(|d| reference.obs_dist(inst, d)).collect::<Result<_>>()?;
        let n = inst.n_models();
        let mut h = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        for m in 0..n {
            let mut hm = Vec::with_capacity(grid.len());
            let mut dm = Vec::with_capacity(grid.len());
            for (dec, r) in grid.iter().zip(&refs) {
                hm.push(inst.suboptimality(m, dec)?);
                dm.push(hellinger_sq_raw(&inst.obs_dist(m, dec)?, r));
            }
            h.push(hm);
            d.push(dm);
        }
        let labels = inst.models.iter().map(|m| m.label.clone()).collect();
        Ok(Self::from_raw(h, d, labels, reference.label.clone(), inst.decision_independent()))
    }

    /// Build from explicit tables (rows are models, columns grid points).
    pub fn from_raw(
        h: Vec<Vec<f64>>,
        d: Vec<Vec<f64>>,
        labels: Vec<String>,
        reference: String,
        decision_independent: bool,
    ) -> DecTables {
        let grid_size = h.first().map_or(0, |r| r.len());
        // Merge identical rows.
        let mut index: HashMap<(Vec<i64>, Vec<i64>), usize> = HashMap::new();
        let mut uh: Vec<Vec<f64>> = Vec::new();
        let mut ud: Vec<Vec<f64>> = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        for (m, (hm, dm)) in h.into_iter().zip(d).enumerate() {
            let k = (key(&hm), key(&dm));
            match index.get(&k) {
                Some(&u) => members[u].push(m),
                None => {
                    index.insert(k, uh.len());
                    uh.push(hm);
                    ud.push(dm);
                    members.push(vec![m]);
                }
            }
        }
        // Drop rows dominated by another: no more suboptimal anywhere and
        // no closer to the reference anywhere.
        let n = uh.len();
        let mut keep = vec![true; n];
        for a in 0..n {
            for b in 0..n {
                if a == b || !keep[b] {
                    continue;
                }
                let dominated = uh[a].iter().zip(&uh[b]).all(|(x, y)| x <= y)
                    && ud[a].iter().zip(&ud[b]).all(|(x, y)| x >= y);
                if dominated {
                    keep[a] = false;
                    let moved = std::mem::take(&mut members[a]);
                    members[b].extend(moved);
                    break;
                }
            }
        }
        let mut out_h = Vec::new();
        let mut out_d = Vec::new();
        let mut out_m = Vec::new();
        for i in 0..n {
            if keep[i] {
                out_h.push(uh[i].clone());
                out_d.push(ud[i].clone());
                out_m.push(std::mem::take(&mut members[i]));
            }
        }
        let rep_labels = out_m.iter().map(|ms| labels[ms[0]].clone()).collect();
        let decision_independent = decision_independent
            || out_d.iter().all(|row| row.iter().all(|&x| (x - row[0]).abs() <= 1e-15));
        DecTables {
            h: out_h,
            d: out_d,
            members: out_m,
            labels: rep_labels,
            grid_size,
            reference,
            decision_independent,
        }
    }

    pub fn n_models(&self) -> usize {
        self.h.len()
    }

    fn result(&self, variant: Variant, value: f64, p: Vec<f64>, q: Option<Vec<f64>>, active: Vec<usize>, gap: f64, direction: BoundDirection, note: &str) -> DecResult {
        DecResult {
            variant: variant.name(),
            param: variant.param(),
            reference: self.reference.clone(),
            value,
            p,
            q,
            active: active.into_iter().map(|u| self.labels[u].clone()).collect(),
            gap,
            direction,
            grid_size: self.grid_size,
            note: note.to_string(),
        }
    }

    /// min over p of max over models of E_p[h - gamma d].
    pub fn offset(&self, gamma: f64) -> Result<DecResult> {
        let variant = Variant::Offset { gamma }.check()?;
        let a: Vec<Vec<f64>> = (0..self.grid_size)
            .map(|i| (0..self.n_models()).map(|u| self.h[u][i] - gamma * self.d[u][i]).collect())
            .collect();
        let sol = solve_lp(&a)?;
        let active = active_columns(&a, &sol);
        Ok(self.result(variant, sol.value, sol.p, None, active, sol.gap, BoundDirection::GridUpper, ""))
    }

    /// Game value of h restricted to the model subset `set` (0 if empty).
    fn restricted_value(&self, set: &[usize]) -> Result<(f64, Vec<f64>, Vec<usize>, f64)> {
        if set.is_empty() {
            return Ok((0.0, vec![1.0 / self.grid_size as f64; self.grid_size], Vec::new(), 0.0));
        }
        let a: Vec<Vec<f64>> = (0..self.grid_size).map(|i| set.iter().map(|&u| self.h[u][i]).collect()).collect();
        let sol = solve_lp(&a)?;
        let active = active_columns(&a, &sol).into_iter().map(|c| set[c]).collect();
        Ok((sol.value, sol.p, active, sol.gap))
    }

    /// max over q of min over `set` of E_q[d], with its witness.
    fn exclusion_margin(&self, set: &[usize]) -> Result<(f64, Vec<f64>)> {
        let a: Vec<Vec<f64>> = (0..self.grid_size).map(|i| set.iter().map(|&u| -self.d[u][i]).collect()).collect();
        let sol = solve_lp(&a)?;
        Ok((-sol.value, sol.p))
    }

    /// Constrained coefficient: min over p, q of the max of E_p[h^M] over
    /// models with E_q[d^M] <= eps^2.
    pub fn constrained(&self, eps: f64) -> Result<DecResult> {
        let variant = Variant::Constrained { eps }.check()?;
        let e2 = eps * eps;
        let n = self.n_models();
        if self.decision_independent {
            let feasible: Vec<usize> = (0..n).filter(|&u| self.d[u][0] <= e2 + FEAS_TOL).collect();
            let (value, p, active, gap) = self.restricted_value(&feasible)?;
            let q = vec![1.0 / self.grid_size as f64; self.grid_size];
            return Ok(self.result(variant, value, p, Some(q), active, gap, BoundDirection::GridUpper, "decision-independent kernels"));
        }
        if n <= 12 {
            return self.constrained_enumerate(variant, e2);
        }
        self.constrained_heuristic(variant, e2, 3, 0x5eed)
    }

    /// Exact path. For fixed q the value depends only on which models q
    /// excludes; a set E is excludable iff some q pushes every member past
    /// eps^2, which is a matrix game. Excludable sets are closed under
    /// taking subsets, so supersets of a failure are skipped.
    fn constrained_enumerate(&self, variant: Variant, e2: f64) -> Result<DecResult> {
        let n = self.n_models();
        let full = 1usize << n;
        let mut excludable = vec![false; full];
        let mut witness: Vec<Option<Vec<f64>>> = vec![None; full];
        excludable[0] = true;
        witness[0] = Some(vec![1.0 / self.grid_size as f64; self.grid_size]);
        let mut best: Option<(f64, usize)> = None;
        for mask in 0..full {
            if mask != 0 {
                let subsets_ok = (0..n).filter(|b| mask >> b & 1 == 1).all(|b| excludable[mask & !(1 << b)]);
                if !subsets_ok {
                    continue;
                }
                let set: Vec<usize> = (0..n).filter(|b| mask >> b & 1 == 1).collect();
                let (margin, q) = self.exclusion_margin(&set)?;
                if margin <= e2 + FEAS_TOL {
                    continue;
                }
                excludable[mask] = true;
                witness[mask] = Some(q);
            }
            let rest: Vec<usize> = (0..n).filter(|b| mask >> b & 1 == 0).collect();
            let (value, _, _, _) = self.restricted_value(&rest)?;
            if best.is_none_or(|(v, _)| value < v - 1e-15) {
                best = Some((value, mask));
            }
        }
        let (_, mask) = best.expect("the empty exclusion set is always available");
        let rest: Vec<usize> = (0..n).filter(|b| mask >> b & 1 == 0).collect();
        let (value, p, active, gap) = self.restricted_value(&rest)?;
        let q = witness[mask].clone();
        Ok(self.result(variant, value, p, q, active, gap, BoundDirection::GridUpper, "exact exclusion-set enumeration"))
    }

    fn feasible_set(&self, q: &[f64], e2: f64) -> Vec<usize> {
        (0..self.n_models())
            .filter(|&u| self.d[u].iter().zip(q).map(|(a, b)| a * b).sum::<f64>() <= e2 + FEAS_TOL)
            .collect()
    }

    /// Alternating heuristic for large classes: given q, solve the p game
    /// on the feasible set exactly; then move q along the distances of
    /// the models carrying that game, to push them out. Every visited q
    /// certifies an upper bound.
    pub fn constrained_heuristic(&self, variant: Variant, e2: f64, restarts: usize, seed: u64) -> Result<DecResult> {
        let mut rng = crate::rng::rng(seed);
        let g = self.grid_size;
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut starts: Vec<Vec<f64>> = vec![vec![1.0 / g as f64; g]];
        let gam = Gamma::new(1.0, 1.0).expect("valid gamma");
        for _ in 1..restarts.max(1) {
            let mut w: Vec<f64> = (0..g).map(|_| gam.sample(&mut rng)).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= s);
            starts.push(w);
        }
        for start in starts {
            let mut q = start;
            for it in 0..200 {
                let feas = self.feasible_set(&q, e2);
                let (value, _, _, _) = self.restricted_value(&feas)?;
                if best.as_ref().is_none_or(|(v, _)| value < *v) {
                    best = Some((value, q.clone()));
                }
                if feas.is_empty() {
                    break;
                }
                let a: Vec<Vec<f64>> = (0..g).map(|i| feas.iter().map(|&u| self.h[u][i]).collect()).collect();
                let sol = solve_lp(&a)?;
                let mut grad = vec![0.0; g];
                for (c, &u) in feas.iter().enumerate() {
                    for i in 0..g {
                        grad[i] += sol.q[c] * self.d[u][i];
                    }
                }
                let norm = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm < 1e-15 {
                    break;
                }
                let step = 0.5 / ((it + 1) as f64).sqrt();
                for i in 0..g {
                    q[i] += step * grad[i] / norm;
                }
                project_floored_simplex(&mut q, 0.0);
            }
        }
        let (_, q) = best.expect("at least one start");
        let feas = self.feasible_set(&q, e2);
        let (value, p, active, gap) = self.restricted_value(&feas)?;
        Ok(self.result(variant, value, p, Some(q), active, gap, BoundDirection::HeuristicUpper, "alternating heuristic over q"))
    }

    pub fn solve(&self, variant: Variant) -> Result<DecResult> {
        match variant {
            Variant::Offset { gamma } => self.offset(gamma),
            Variant::Constrained { eps } => self.constrained(eps),
        }
    }
}

fn active_columns(a: &[Vec<f64>], sol: &GameSolution) -> Vec<usize> {
    let n = a[0].len();
    (0..n)
        .filter(|&j| {
            let v: f64 = a.iter().zip(&sol.p).map(|(row, p)| p * row[j]).sum();
            v >= sol.value - 1e-9
        })
        .collect()
}

pub fn offset_dec(inst: &Instance, grid: &[Decision], reference: &Reference, gamma: f64) -> Result<DecResult> {
    DecTables::new(inst, grid, reference)?.offset(gamma)
}

pub fn constrained_dec(inst: &Instance, grid: &[Decision], reference: &Reference, eps: f64) -> Result<DecResult> {
    DecTables::new(inst, grid, reference)?.constrained(eps)
}

/// Max over candidate references; a lower bound on the sup over co(M).
pub fn sup_over_references(
    inst: &Instance,
    grid: &[Decision],
    variant: Variant,
    candidates: &[Reference],
) -> Result<DecResult> {
    if candidates.is_empty() {
        return Err(Error::Config("no candidate references".into()));
    }
    let mut best: Option<DecResult> = None;
    for r in candidates {
        let res = DecTables::new(inst, grid, r)?.solve(variant)?;
        if best.as_ref().is_none_or(|b| res.value > b.value) {
            best = Some(res);
        }
    }
    let mut out = best.expect("nonempty candidates");
    out.direction = BoundDirection::CandidateLower;
    Ok(out)
}

/// Each model, the uniform mixture, then `n_random` Dirichlet mixtures.
pub fn default_candidates<R: Rng + ?Sized>(inst: &Instance, n_random: usize, rng: &mut R) -> Vec<Reference> {
    let mut out: Vec<Reference> = (0..inst.n_models()).map(|m| Reference::model(inst, m)).collect();
    if inst.n_models() > 1 {
        out.push(Reference::uniform(inst));
    }
    for i in 0..n_random {
        out.push(Reference::random(inst, format!("dirichlet{i}"), rng));
    }
    out
}

/// Log-spaced grid of `n` points between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// min over the gamma grid of max(offset, 0) + gamma eps^2, all on one
/// table set. Upper-bounds the constrained value at eps.
pub fn offset_to_constrained_bound_tables(tables: &DecTables, eps: f64, gammas: &[f64]) -> Result<(f64, f64)> {
    if gammas.is_empty() || gammas.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::Config("gamma grid must be nonempty and positive".into()));
    }
    let mut best = (f64::INFINITY, f64::NAN);
    for &g in gammas {
        let v = tables.offset(g)?.value.max(0.0) + g * eps * eps;
        if v < best.0 {
            best = (v, g);
        }
    }
    Ok(best)
}

pub fn offset_to_constrained_bound(
    inst: &Instance,
    grid: &[Decision],
    reference: &Reference,
    eps: f64,
    gammas: &[f64],
) -> Result<f64> {
    let t = DecTables::new(inst, grid, reference)?;
    Ok(offset_to_constrained_bound_tables(&t, eps, gammas)?.0)
}

// ------------------------------------------------------------------ scales

/// Largest ratio M(o|pi) / M'(o|pi) over pairs of models, grid decisions
/// and symbols; infinite when some symbol is possible under one model and
/// impossible under another. Floored at e.
pub fn density_ratio(inst: &Instance, grid: &[Decision]) -> Result<f64> {
    let mut v = std::f64::consts::E;
    for d in grid {
        let rows: Vec<Vec<f64>> = (0..inst.n_models()).map(|m| inst.obs_dist(m, d)).collect::<Result<_>>()?;
        for o in 0..inst.n_obs() {
            let hi = rows.iter().map(|r| r[o]).fold(0.0, f64::max);
            let lo = rows.iter().map(|r| r[o]).fold(f64::INFINITY, f64::min);
            if hi > 0.0 {
                if lo <= 0.0 {
                    return Ok(f64::INFINITY);
                }
                v = v.max(hi / lo);
            }
        }
    }
    Ok(v)
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleParams {
    pub t: usize,
    pub delta: f64,
    pub class_size: usize,
    pub r: f64,
    pub c_t: f64,
    pub eps_upper: f64,
}

/// C(T) = log(min(T, V(M))).
pub fn c_of_t(t: usize, v: f64) -> f64 {
    (t as f64).min(v).ln()
}

/// Upper scale 16 sqrt(ceil(log 2/delta) / T * log(|M| / delta)).
pub fn eps_upper(t: usize, delta: f64, class_size: usize) -> f64 {
    16.0 * ((2.0 / delta).ln().ceil() / t as f64 * (class_size as f64 / delta).ln()).sqrt()
}

impl ScaleParams {
    pub fn new(t: usize, delta: f64, class_size: usize, r: f64, v: f64) -> ScaleParams {
        ScaleParams { t, delta, class_size, r, c_t: c_of_t(t, v), eps_upper: eps_upper(t, delta, class_size) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerScale {
    pub eps_low: f64,
    pub risk_lower_bound: f64,
    /// True when no positive eps satisfies the fixed-point inequality.
    pub degenerate: bool,
}

/// Largest eps with eps^2 C_T R T <= dec(eps) / 8, by a downward log scan
/// followed by bisection to relative tolerance 1e-6. The reported risk
/// lower bound is dec(eps_low) / 6.
pub fn lower_bound_scale(curve: &dyn Fn(f64) -> Result<f64>, t: usize, r: f64, c_t: f64) -> Result<LowerScale> {
    let scale = c_t * r * t as f64;
    let ok = |e: f64| -> Result<bool> { Ok(e * e * scale <= curve(e)? / 8.0) };
    let ratio = 2f64.powf(0.25);
    let mut hi = 2f64.sqrt();
    if ok(hi)? {
        return Ok(LowerScale { eps_low: hi, risk_lower_bound: curve(hi)? / 6.0, degenerate: false });
    }
    let mut lo = hi / ratio;
    while !ok(lo)? {
        hi = lo;
        lo /= ratio;
        if lo < 1e-12 {
            return Ok(LowerScale { eps_low: 0.0, risk_lower_bound: 0.0, degenerate: true });
        }
    }
    while (hi - lo) > 1e-6 * lo {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(LowerScale { eps_low: lo, risk_lower_bound: curve(lo)? / 6.0, degenerate: false })
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityFailure {
    pub eps: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapBoundReport {
    pub c_reg: f64,
    pub cap_c_reg: f64,
    pub beta: f64,
    pub regularity_failures: Vec<RegularityFailure>,
    pub dec_upper: f64,
    pub dec_lower: f64,
    /// Smallest constant C for which the interpolation inequality holds.
    pub fitted_c: f64,
    /// Right-hand side evaluated with `constant`.
    pub rhs: f64,
    pub constant: f64,
    pub holds: bool,
}

#[derive(Clone)]
pub struct GapBoundInput<'a> {
    pub curve: &'a dyn Fn(f64) -> Result<f64>,
    pub eps_upper: f64,
    pub eps_lower: f64,
    pub c_reg: f64,
    pub cap_c_reg: f64,
    pub beta: f64,
    pub class_size: usize,
    pub delta: f64,
    pub c_t: f64,
    /// Points at which regularity is checked.
    pub sample_eps: Vec<f64>,
    /// Constant C used on the right-hand side.
    pub constant: f64,
}

/// Regularity dec(eps) <= c^2 dec(eps / C) at the sampled points, then
/// dec(eps_upper) <= (C log(1/delta) log|M| C_T C_reg / c_reg)^(b/(1+b))
/// dec(eps_lower)^(1/(1+b)).
pub fn gap_bound_report(inp: &GapBoundInput) -> Result<GapBoundReport> {
    let (c, cc, beta) = (inp.c_reg, inp.cap_c_reg, inp.beta);
    if !(cc > c && c > 1.0) {
        return Err(Error::Precondition("need C_reg > c_reg > 1".into()));
    }
    let floor = c.ln() / (cc / c).ln();
    if beta < floor - 1e-12 {
        return Err(Error::Precondition(format!("beta = {beta} below its floor {floor}")));
    }
    let mut failures = Vec::new();
    for &e in &inp.sample_eps {
        let lhs = (inp.curve)(e)?;
        let rhs = c * c * (inp.curve)(e / cc)?;
        if lhs > rhs + 1e-12 {
            failures.push(RegularityFailure { eps: e, lhs, rhs });
        }
    }
    let up = (inp.curve)(inp.eps_upper)?;
    let low = (inp.curve)(inp.eps_lower)?;
    let base = (1.0 / inp.delta).ln() * (inp.class_size as f64).ln() * inp.c_t * cc / c;
    let ex = beta / (1.0 + beta);
    let fitted_c = if up <= 0.0 {
        0.0
    } else if low <= 0.0 {
        f64::INFINITY
    } else {
        (up / low.powf(1.0 / (1.0 + beta))).powf(1.0 / ex) / base
    };
    let rhs = (inp.constant * base).powf(ex) * low.powf(1.0 / (1.0 + beta));
    Ok(GapBoundReport {
        c_reg: c,
        cap_c_reg: cc,
        beta,
        regularity_failures: failures,
        dec_upper: up,
        dec_lower: low,
        fitted_c,
        rhs,
        constant: inp.constant,
        holds: up <= rhs + 1e-12,
    })
}

/// The decision grid used for kind-generic DEC checks on normal-form
/// classes: pure profiles, uniform, and per-model equilibria.
pub fn equilibrium_grid(inst: &Instance) -> Vec<Decision> {
    let mut g = crate::constructions::default_grid(inst, &[]);
    for m in 0..inst.n_models() {
        let cand = match inst.kind {
            Kind::Ne => crate::equilibria::nash_two_player(inst, m).map(Decision::Ne),
            Kind::Cce | Kind::Ce => crate::equilibria::correlated_equilibrium(inst, m, inst.kind).map(Decision::Joint),
            Kind::Hr => None,
        };
        if let Some(c) = cand {
            g.push(c);
        }
    }
    g
}

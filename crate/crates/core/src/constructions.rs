//! Builders: the reductions between the multi-agent and hidden-reward
//! settings, and the instance families used as counterexamples.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use crate::dist::{DivergenceKind, Dist};
use crate::error::{Error, Result};
use crate::instance::{
    sample_index, Decision, EmbedData, EmbedDataEq, Family, FiniteModel, Instance, Kernel, Kind, ObsSymbol,
};

/// Row `q` as a constant kernel over all decisions.
fn constant(label: String, row: Vec<f64>, values: Option<Vec<f64>>) -> FiniteModel {
    FiniteModel { label, kernel: Kernel::Constant(row), values }
}

// ---------------------------------------------------------------- reductions

/// Hidden-reward view of a multi-agent instance on a finite grid: the
/// decision list is the grid and the value is K - h.
pub fn ma_to_hr(j: &Instance, grid: &[Decision]) -> Result<Instance> {
    if !j.kind.is_ma() {
        return Err(Error::Shape("ma_to_hr needs a multi-agent instance".into()));
    }
    if grid.is_empty() {
        return Err(Error::Config("empty decision grid".into()));
    }
    let k = j.k as f64;
    let mut models = Vec::with_capacity(j.n_models());
    for m in 0..j.n_models() {
        let mut rows = Vec::with_capacity(grid.len());
        let mut values = Vec::with_capacity(grid.len());
        for d in grid {
            rows.push(j.obs_dist(m, d)?);
            values.push(k - j.suboptimality(m, d)?);
        }
        let kernel = if matches!(j.models[m].kernel, Kernel::Constant(_)) {
            Kernel::Constant(rows.swap_remove(0))
        } else {
            Kernel::Dense(rows)
        };
        models.push(FiniteModel { label: j.models[m].label.clone(), kernel, values: Some(values) });
    }
    let labels = grid.iter().map(|d| d.describe()).collect();
    let obs = j.obs.iter().map(|s| ObsSymbol::new(s.id.clone(), s.rewards.clone(), None)).collect();
    Instance::new(j.k, Kind::Hr, vec![labels], obs, models, false, j.reward_range, Family::Plain)
}

/// Two-player zero-sum NE lift of a hidden-reward instance. Player 2 picks
/// 0 (let the base model speak) or a hiding index in 1..=V; the model
/// (M, v) punishes player 1 by the base gap exactly when player 2 plays v.
/// Kernels are evaluated lazily, so V = 10^4 is cheap.
pub fn hr_to_ma(base: &Instance, v_count: usize) -> Result<Instance> {
    if base.kind != Kind::Hr {
        return Err(Error::Shape("hr_to_ma needs a hidden-reward instance".into()));
    }
    if v_count == 0 {
        return Err(Error::Config("V must be at least 1".into()));
    }
    let n_pi = base.n_rows();
    let n_base_obs = base.n_obs();
    let mut obs: Vec<ObsSymbol> =
        base.obs.iter().map(|s| ObsSymbol::new(s.id.clone(), vec![0.0, 0.0], None)).collect();
    let bottom_sym = obs.len();
    obs.push(ObsSymbol::new("bot", vec![1.0, -1.0], None));
    let mut gap_index: BTreeMap<u64, usize> = BTreeMap::new();
    let mut base_rows = Vec::with_capacity(base.n_models());
    let mut gaps = Vec::with_capacity(base.n_models());
    let mut gap_sym = Vec::with_capacity(base.n_models());
    for m in 0..base.n_models() {
        let rows: Vec<Vec<f64>> = (0..n_pi).map(|r| base.row(m, r).into_owned()).collect();
        let g: Vec<f64> = (0..n_pi).map(|r| base.gap(m, &Decision::Hr(r))).collect::<Result<_>>()?;
        if g.iter().any(|&x| x > 1.0 + 1e-12) {
            return Err(Error::Config("base gaps must lie in [0, 1] for the [-1, 1] reward range".into()));
        }
        let syms = g
            .iter()
            .map(|&x| {
                let x = if x.abs() < 1e-15 { 0.0 } else { x };
                *gap_index.entry(x.to_bits()).or_insert_with(|| {
                    obs.push(ObsSymbol::new(format!("bot_g{x}"), vec![-x, x], None));
                    obs.len() - 1
                })
            })
            .collect();
        base_rows.push(rows);
        gaps.push(g);
        gap_sym.push(syms);
    }
    let embed = EmbedData { base_rows, gaps, gap_sym, bottom_sym, n_base_obs, v_count };
    let mut models = Vec::with_capacity(base.n_models() * v_count);
    for m in 0..base.n_models() {
        for v in 1..=v_count {
            models.push(FiniteModel {
                label: format!("{}|v{v}", base.models[m].label),
                kernel: Kernel::Embedded { base: m, v },
                values: None,
            });
        }
    }
    let p2: Vec<String> = (0..=v_count).map(|i| i.to_string()).collect();
    Instance::new(
        2,
        Kind::Ne,
        vec![base.pure_sets[0].clone(), p2],
        obs,
        models,
        false,
        (-1.0, 1.0),
        Family::Embedded(Arc::new(EmbedDataEq(embed))),
    )
}

/// Materialize an embedded instance with dense kernels. Only for small V;
/// used to cross-check the lazy closed forms.
pub fn densify(inst: &Instance) -> Result<Instance> {
    if inst.n_rows() * inst.n_models() > 5_000_000 {
        return Err(Error::Unsupported("instance too large to densify".into()));
    }
    let models = (0..inst.n_models())
        .map(|m| FiniteModel {
            label: inst.models[m].label.clone(),
            kernel: Kernel::Dense((0..inst.n_rows()).map(|r| inst.row(m, r).into_owned()).collect()),
            values: inst.models[m].values.clone(),
        })
        .collect();
    Instance::new(
        inst.k,
        inst.kind,
        inst.pure_sets.clone(),
        inst.obs.clone(),
        models,
        inst.reveals_sigma,
        inst.reward_range,
        Family::Plain,
    )
}

// ------------------------------------------------------------------ families

/// Bernoulli bandits with one good arm and gap delta in {2^-2, ..., 2^-L}.
/// The reward bit is the observation; the value table is the mean.
pub fn bandit_gap_family(l: usize, a: usize) -> Result<Instance> {
    if l < 2 || a < 2 {
        return Err(Error::Config("bandit_gap_family needs L >= 2 and A >= 2".into()));
    }
    let obs = vec![ObsSymbol::new("r0", vec![0.0], None), ObsSymbol::new("r1", vec![1.0], None)];
    let mut models = Vec::new();
    for i in 2..=l {
        let delta = 0.5f64.powi(i as i32);
        for arm in 0..a {
            let values: Vec<f64> = (0..a).map(|pi| 0.5 + if pi == arm { delta } else { 0.0 }).collect();
            let rows = values.iter().map(|&mu| vec![1.0 - mu, mu]).collect();
            models.push(FiniteModel {
                label: format!("d{i}a{arm}"),
                kernel: Kernel::Dense(rows),
                values: Some(values),
            });
        }
    }
    let arms = (0..a).map(|i| format!("arm{i}")).collect();
    Instance::new(1, Kind::Hr, vec![arms], obs, models, false, (0.0, 1.0), Family::Plain)
}

/// Parameters of the layered needle family.
#[derive(Clone, Debug)]
pub struct LayeredNeedle {
    pub l: usize,
    pub c_prob: f64,
    pub n: Vec<usize>,
    pub delta: Vec<f64>,
    pub alpha: Vec<f64>,
}

/// Largest L that is built as a full instance. Beyond it the kernel has
/// more than a few million entries; simulation uses [`LayeredNeedle`].
pub const LAYERED_FULL_CAP: usize = 4;
pub const LAYERED_FACTORED_CAP: usize = 12;

impl LayeredNeedle {
    pub fn new(l: usize, c_prob: f64) -> Result<Self> {
        if l == 0 || l > LAYERED_FACTORED_CAP {
            return Err(Error::Config(format!("L = {l} outside 1..={LAYERED_FACTORED_CAP}")));
        }
        if c_prob < 1.0 || !c_prob.is_finite() {
            return Err(Error::Config("C_prob must be >= 1".into()));
        }
        let n: Vec<usize> = (1..=l).map(|i| 1usize << i).collect();
        let delta: Vec<f64> = n.iter().map(|&nl| 1.0 / (c_prob * nl as f64).powi(2)).collect();
        for (d, &nl) in delta.iter().zip(&n) {
            if d * (nl as f64 - 1.0) > 1.0 {
                return Err(Error::Infeasible("layer probabilities exceed one".into()));
            }
        }
        Ok(LayeredNeedle { l, c_prob, n, delta, alpha: vec![1.0 / l as f64; l] })
    }

    /// Per-layer distribution P_{v_l} over [N_l] then bottom.
    pub fn layer_dist(&self, layer: usize, v: usize) -> Vec<f64> {
        let nl = self.n[layer];
        let d = self.delta[layer];
        let mut p = vec![d; nl + 1];
        p[v] = 0.0;
        p[nl] = 1.0 - d * (nl as f64 - 1.0);
        p
    }

    pub fn n_decisions(&self) -> usize {
        self.n.iter().product()
    }

    /// Mixed-radix index of a needle tuple, first layer most significant.
    pub fn encode(&self, v: &[usize]) -> usize {
        v.iter().zip(&self.n).fold(0, |acc, (&x, &nl)| acc * nl + x)
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut v = vec![0; self.l];
        for i in (0..self.l).rev() {
            v[i] = idx % self.n[i];
            idx /= self.n[i];
        }
        v
    }

    /// g^{M_v}(pi) = sum over layers of alpha_l 1{pi_l = v_l}.
    pub fn gap(&self, v: &[usize], pi: &[usize]) -> f64 {
        v.iter().zip(pi).zip(&self.alpha).map(|((a, b), w)| if a == b { *w } else { 0.0 }).sum()
    }

    /// One observation: a symbol index per layer (N_l means bottom).
    pub fn sample_obs<R: Rng + ?Sized>(&self, v: &[usize], rng: &mut R) -> Vec<usize> {
        (0..self.l).map(|layer| sample_index(&self.layer_dist(layer, v[layer]), rng)).collect()
    }

    /// The full instance; only for L <= LAYERED_FULL_CAP.
    pub fn instance(&self) -> Result<Instance> {
        if self.l > LAYERED_FULL_CAP {
            return Err(Error::Config(format!(
                "L = {} exceeds the full-enumeration cap {LAYERED_FULL_CAP}",
                self.l
            )));
        }
        let sizes: Vec<usize> = self.n.iter().map(|n| n + 1).collect();
        let n_obs: usize = sizes.iter().product();
        let mut obs = Vec::with_capacity(n_obs);
        for idx in 0..n_obs {
            let mut rem = idx;
            let mut parts = vec![0; self.l];
            for i in (0..self.l).rev() {
                parts[i] = rem % sizes[i];
                rem /= sizes[i];
            }
            let id: Vec<String> = parts
                .iter()
                .zip(&self.n)
                .map(|(&o, &nl)| if o == nl { "bot".to_string() } else { o.to_string() })
                .collect();
            obs.push(ObsSymbol::new(id.join("."), vec![0.0], None));
        }
        let n_dec = self.n_decisions();
        let mut models = Vec::with_capacity(n_dec);
        for m in 0..n_dec {
            let v = self.decode(m);
            let mut row = vec![1.0];
            for (layer, &vl) in v.iter().enumerate() {
                let p = self.layer_dist(layer, vl);
                let mut next = Vec::with_capacity(row.len() * p.len());
                for &a in &row {
                    for &b in &p {
                        next.push(a * b);
                    }
                }
                row = next;
            }
            let values = (0..n_dec).map(|pi| 1.0 - self.gap(&v, &self.decode(pi))).collect();
            let label = v.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(",");
            models.push(constant(format!("v({label})"), row, Some(values)));
        }
        let labels = (0..n_dec)
            .map(|pi| self.decode(pi).iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(","))
            .collect();
        Instance::new(
            1,
            Kind::Hr,
            vec![labels],
            obs,
            models,
            false,
            (0.0, 1.0),
            Family::Layered { l: self.l, c_prob: self.c_prob },
        )
    }
}

pub fn layered_needle_instance(l: usize, c_prob: f64) -> Result<Instance> {
    LayeredNeedle::new(l, c_prob)?.instance()
}

/// Parameters of a twin-instance pair.
#[derive(Clone, Debug)]
pub struct TwinParams {
    pub n: usize,
    pub t: usize,
    pub eps: f64,
    pub phi: DivergenceKind,
    pub c0: f64,
}

/// Floor standing in for N^{-eps/alpha} when alpha = 0.
pub const TWIN_ALPHA_ZERO_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct TwinPair {
    pub first: Instance,
    pub second: Instance,
    /// Model i of the first instance maps to model mapping[i] of the second.
    pub mapping: Vec<usize>,
    pub delta1: f64,
    pub beta1: f64,
    pub delta2: f64,
    pub beta2: f64,
}

/// I^{delta, beta}: decisions [N], symbols [N] then bottom; model i puts
/// beta on i, delta on every other index. Decision i is the only bad one
/// under model i.
pub fn twin_instance(n: usize, delta: f64, beta: f64) -> Result<Instance> {
    if n < 2 {
        return Err(Error::Config("twin instances need N >= 2".into()));
    }
    let rest = 1.0 - delta * (n as f64 - 1.0) - beta;
    if !(delta >= 0.0 && beta >= 0.0 && rest >= -1e-15) {
        return Err(Error::Infeasible(format!("delta = {delta}, beta = {beta} exceed total mass for N = {n}")));
    }
    let mut obs: Vec<ObsSymbol> = (0..n).map(|i| ObsSymbol::new(i.to_string(), vec![0.0], None)).collect();
    obs.push(ObsSymbol::new("bot", vec![0.0], None));
    let models = (0..n)
        .map(|i| {
            let mut row = vec![delta; n + 1];
            row[i] = beta;
            row[n] = rest.max(0.0);
            let values = (0..n).map(|pi| if pi == i { 0.0 } else { 1.0 }).collect();
            constant(format!("m{i}"), row, Some(values))
        })
        .collect();
    let labels = (0..n).map(|i| i.to_string()).collect();
    Instance::new(1, Kind::Hr, vec![labels], obs, models, false, (0.0, 1.0), Family::Twin { n })
}

/// Pairwise D_phi between distinct twin models.
pub fn twin_pair_divergence(phi: &DivergenceKind, delta: f64, beta: f64) -> f64 {
    beta * phi.phi(delta / beta) + delta * phi.phi(beta / delta)
}

pub fn twin_instances(p: &TwinParams) -> Result<TwinPair> {
    if !(p.eps > 0.0 && p.eps < 1.0) {
        return Err(Error::Config("eps must lie in (0, 1)".into()));
    }
    if p.t < 2 || p.n < 2 {
        return Err(Error::Config("twin instances need T >= 2 and N >= 2".into()));
    }
    let (alpha, _) = p.phi.bounds();
    let nf = p.n as f64;
    let tf = p.t as f64;
    let delta1 = p.c0 * tf.ln() / ((nf - 1.0) * tf);
    let ratio = if alpha > 0.0 { nf.powf(-p.eps / alpha) } else { TWIN_ALPHA_ZERO_FLOOR };
    let beta1 = delta1 * ratio;
    let target = twin_pair_divergence(&p.phi, delta1, beta1);
    // With beta2 = delta2 / 2 the pairwise divergence is linear in delta2.
    let slope = p.phi.phi(2.0) / 2.0 + p.phi.phi(0.5);
    if slope <= 0.0 {
        return Err(Error::Infeasible("generator vanishes at 2 and 1/2".into()));
    }
    let delta2 = target / slope;
    let beta2 = delta2 / 2.0;
    let first = twin_instance(p.n, delta1, beta1)?;
    let second = twin_instance(p.n, delta2, beta2)?;
    Ok(TwinPair { first, second, mapping: (0..p.n).collect(), delta1, beta1, delta2, beta2 })
}

// ------------------------------------------------------ normal-form games

/// Bernoulli-reward normal-form class. `payoffs[m][k][s]` is the mean
/// reward of player k at flat profile s under hypothesis m. Symbols are
/// (profile, reward bits), so every observation reveals the profile.
pub fn normal_form_instance(sizes: &[usize], payoffs: &[Vec<Vec<f64>>], kind: Kind) -> Result<Instance> {
    if kind == Kind::Hr {
        return Err(Error::Config("normal-form instances are multi-agent".into()));
    }
    if payoffs.is_empty() {
        return Err(Error::Config("no payoff hypotheses".into()));
    }
    let k = sizes.len();
    let n_prof: usize = sizes.iter().product();
    let n_bits = 1usize << k;
    for (m, tabs) in payoffs.iter().enumerate() {
        if tabs.len() != k || tabs.iter().any(|t| t.len() != n_prof) {
            return Err(Error::Shape(format!("hypothesis {m}: expected {k} tables of {n_prof} entries")));
        }
        if tabs.iter().flatten().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::Config(format!("hypothesis {m}: payoff outside [0, 1]")));
        }
    }
    let mut obs = Vec::with_capacity(n_prof * n_bits);
    for s in 0..n_prof {
        for bits in 0..n_bits {
            let rewards = (0..k).map(|j| ((bits >> (k - 1 - j)) & 1) as f64).collect();
            obs.push(ObsSymbol::new(format!("s{s}b{bits:0k$b}"), rewards, Some(s)));
        }
    }
    let models = payoffs
        .iter()
        .enumerate()
        .map(|(m, tabs)| {
            let rows = (0..n_prof)
                .map(|s| {
                    let mut row = vec![0.0; n_prof * n_bits];
                    for bits in 0..n_bits {
                        let mut p = 1.0;
                        for (j, tab) in tabs.iter().enumerate() {
                            let mu = tab[s];
                            p *= if (bits >> (k - 1 - j)) & 1 == 1 { mu } else { 1.0 - mu };
                        }
                        row[s * n_bits + bits] = p;
                    }
                    row
                })
                .collect();
            FiniteModel { label: format!("h{m}"), kernel: Kernel::Dense(rows), values: None }
        })
        .collect();
    let pure_sets = sizes.iter().map(|&n| (0..n).map(|a| a.to_string()).collect()).collect();
    Instance::new(k, kind, pure_sets, obs, models, true, (0.0, 1.0), Family::Plain)
}

/// Random 2-player payoff hypotheses with means uniform in [0, 1].
pub fn random_payoffs<R: Rng + ?Sized>(sizes: &[usize], count: usize, rng: &mut R) -> Vec<Vec<Vec<f64>>> {
    let n: usize = sizes.iter().product();
    (0..count).map(|_| (0..sizes.len()).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect()).collect()
}

/// Same class as `inst`, reinterpreted under another equilibrium kind.
pub fn with_kind(inst: &Instance, kind: Kind) -> Result<Instance> {
    Instance::new(
        inst.k,
        kind,
        inst.pure_sets.clone(),
        inst.obs.clone(),
        inst.models.clone(),
        inst.reveals_sigma,
        inst.reward_range,
        inst.family.clone(),
    )
}

// ------------------------------------------------------------- separation

/// Gap of the good arm in the separation instance.
pub const SEPARATION_GAP: f64 = 0.25;

/// K players with actions {0, ..., A}. Model a (1 <= a <= A) gives each
/// player Bernoulli reward 1/2 + gap 1{own action = a} when nobody plays
/// 0; any 0 zeroes every reward. The last model is identically zero.
pub fn separation_instance(k: usize, a: usize) -> Result<Instance> {
    if k == 0 || a == 0 {
        return Err(Error::Config("separation instance needs K >= 1 and A >= 1".into()));
    }
    let sizes = vec![a + 1; k];
    let n: usize = sizes.iter().product();
    let profile = |mut s: usize| {
        let mut out = vec![0; k];
        for i in (0..k).rev() {
            out[i] = s % (a + 1);
            s /= a + 1;
        }
        out
    };
    let mut payoffs = Vec::with_capacity(a + 1);
    for good in 1..=a {
        let tabs = (0..k)
            .map(|j| {
                (0..n)
                    .map(|s| {
                        let prof = profile(s);
                        if prof.contains(&0) {
                            0.0
                        } else {
                            0.5 + if prof[j] == good { SEPARATION_GAP } else { 0.0 }
                        }
                    })
                    .collect()
            })
            .collect();
        payoffs.push(tabs);
    }
    payoffs.push(vec![vec![0.0; n]; k]);
    let mut inst = normal_form_instance(&sizes, &payoffs, Kind::Ne)?;
    for (i, m) in inst.models.iter_mut().enumerate() {
        m.label = if i < a { format!("arm{}", i + 1) } else { "zero".into() };
    }
    Ok(inst)
}

/// Single-agent class seen by player `k` when the opponents are frozen at
/// each supplied profile. `opponents[i]` lists the K - 1 opponent actions
/// in player order with player `k` skipped.
pub fn induced_single_agent(j: &Instance, k: usize, opponents: &[Vec<usize>]) -> Result<Instance> {
    if j.kind != Kind::Ne {
        return Err(Error::Shape("induced classes are built from NE instances".into()));
    }
    if !j.reveals_sigma {
        return Err(Error::Precondition("induced classes need an instance whose observations reveal the profile".into()));
    }
    if k >= j.k || opponents.is_empty() {
        return Err(Error::Config("bad player index or empty opponent list".into()));
    }
    let size = j.sizes()[k];
    // Merge symbols that agree on the pure observation and on r_k: the
    // other players' rewards are not seen.
    let mut key_of = Vec::with_capacity(j.n_obs());
    let mut keys: Vec<(Option<usize>, u64)> = Vec::new();
    for s in &j.obs {
        let key = (s.pure_tag, s.rewards[k].to_bits());
        let idx = match keys.iter().position(|x| *x == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                keys.len() - 1
            }
        };
        key_of.push(idx);
    }
    let obs = keys
        .iter()
        .map(|&(tag, r)| {
            let r = f64::from_bits(r);
            let id = match tag {
                Some(t) => format!("s{t}r{r}"),
                None => format!("r{r}"),
            };
            ObsSymbol::new(id, vec![r], tag.map(|t| j.profile_of(t)[k]))
        })
        .collect();
    let mut models = Vec::new();
    for m in 0..j.n_models() {
        for opp in opponents {
            if opp.len() + 1 != j.k {
                return Err(Error::Shape("opponent profile of the wrong length".into()));
            }
            let rows = (0..size)
                .map(|ak| {
                    let mut prof = opp.clone();
                    prof.insert(k, ak);
                    let mut row = vec![0.0; keys.len()];
                    for (o, p) in j.row(m, j.profile_index(&prof)).iter().enumerate() {
                        row[key_of[o]] += p;
                    }
                    row
                })
                .collect();
            let tag: Vec<String> = opp.iter().map(|x| x.to_string()).collect();
            models.push(FiniteModel {
                label: format!("{}|{}", j.models[m].label, tag.join(",")),
                kernel: Kernel::Dense(rows),
                values: None,
            });
        }
    }
    Instance::new(1, Kind::Cce, vec![j.pure_sets[k].clone()], obs, models, true, j.reward_range, Family::Plain)
}

/// All opponent profiles of player `k`, as used by [`induced_single_agent`].
pub fn all_opponent_profiles(j: &Instance, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for r in 0..j.n_rows() {
        let prof = j.profile_of(r);
        if prof[k] == 0 {
            let mut opp = prof;
            opp.remove(k);
            out.push(opp);
        }
    }
    out
}

/// Decision grid: pure profiles, the uniform decision, then extras.
pub fn default_grid(inst: &Instance, extra: &[Decision]) -> Vec<Decision> {
    let mut g = inst.pure_decisions();
    if let Some(u) = inst.uniform_decision() {
        g.push(u);
    }
    g.extend(extra.iter().cloned());
    g
}

/// Product decision (NE kind) from mixed strategies.
pub fn product_decision(parts: Vec<Dist>) -> Decision {
    Decision::Ne(parts)
}

//! Finite multi-agent and hidden-reward instances.
//!
//! A model is a row-stochastic kernel from pure profiles (or, for hidden
//! reward instances, from decisions) to a shared alphabet of observation
//! symbols. Each symbol carries the K rewards it reveals, so the expected
//! reward of a player is a linear function of the kernel row.

use std::borrow::Cow;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{argmax, Dist, SUM_TOL};
use crate::error::{Error, Result};

const H_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "NE")]
    Ne,
    #[serde(rename = "CCE")]
    Cce,
    #[serde(rename = "CE")]
    Ce,
    #[serde(rename = "HR")]
    Hr,
}

impl Kind {
    pub fn parse(s: &str) -> Result<Kind> {
        match s.to_ascii_uppercase().as_str() {
            "NE" => Ok(Kind::Ne),
            "CCE" => Ok(Kind::Cce),
            "CE" => Ok(Kind::Ce),
            "HR" => Ok(Kind::Hr),
            _ => Err(Error::Parse(format!("unknown kind '{s}'"))),
        }
    }

    pub fn is_ma(self) -> bool {
        self != Kind::Hr
    }
}

/// A full observation: the K rewards plus an opaque label. `pure_tag` is
/// the flat index of the profile the symbol reveals, when it reveals one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObsSymbol {
    pub id: String,
    pub rewards: Vec<f64>,
    pub pure_tag: Option<usize>,
}

impl ObsSymbol {
    pub fn new(id: impl Into<String>, rewards: Vec<f64>, pure_tag: Option<usize>) -> Self {
        ObsSymbol { id: id.into(), rewards, pure_tag }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decision {
    /// One mixed strategy per player.
    Ne(Vec<Dist>),
    /// A distribution over flat pure profiles.
    Joint(Dist),
    /// An index into the finite decision list of a hidden-reward instance.
    Hr(usize),
}

impl Decision {
    pub fn describe(&self) -> String {
        let fmt = |d: &Dist| {
            let parts: Vec<String> = d.probs().iter().map(|p| format!("{p:.4}")).collect();
            format!("[{}]", parts.join(" "))
        };
        match self {
            Decision::Ne(parts) => {
                let v: Vec<String> = parts.iter().map(fmt).collect();
                format!("ne{}", v.join("x"))
            }
            Decision::Joint(d) => format!("joint{}", fmt(d)),
            Decision::Hr(i) => format!("pi{i}"),
        }
    }
}

/// The lazily evaluated lift of a hidden-reward instance into a two-player
/// zero-sum game with a large hiding action set for the second player.
#[derive(Clone, Debug)]
pub struct EmbedData {
    /// Kernel rows of the base instance, indexed [base model][decision].
    pub base_rows: Vec<Vec<Vec<f64>>>,
    /// Base gaps g^M, indexed [base model][decision].
    pub gaps: Vec<Vec<f64>>,
    /// Symbol emitted at (sigma_1, v) for the model's own v.
    pub gap_sym: Vec<Vec<usize>>,
    /// Symbol emitted at (sigma_1, i) for i not in {0, v}.
    pub bottom_sym: usize,
    pub n_base_obs: usize,
    pub v_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Plain,
    /// Twin instances: decisions [N], symbols [N] then bottom.
    Twin { n: usize },
    /// Layered needle instance with its parameters.
    Layered { l: usize, c_prob: f64 },
    /// hr_to_ma output; carries the base tables.
    Embedded(Arc<EmbedDataEq>),
}

/// Wrapper so `Family` can derive `PartialEq` by pointer identity.
#[derive(Debug)]
pub struct EmbedDataEq(pub EmbedData);

impl PartialEq for EmbedDataEq {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self, other)
    }
}

#[derive(Clone, Debug)]
pub enum Kernel {
    Dense(Vec<Vec<f64>>),
    /// The same row for every profile or decision.
    Constant(Vec<f64>),
    Embedded { base: usize, v: usize },
}

#[derive(Clone, Debug)]
pub struct FiniteModel {
    pub label: String,
    pub kernel: Kernel,
    pub values: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub k: usize,
    pub kind: Kind,
    pub pure_sets: Vec<Vec<String>>,
    pub obs: Vec<ObsSymbol>,
    pub models: Vec<FiniteModel>,
    pub reveals_sigma: bool,
    pub reward_range: (f64, f64),
    pub family: Family,
    sizes: Vec<usize>,
    strides: Vec<usize>,
    n_rows: usize,
    /// Per model, mean rewards laid out [row * k + player]. Empty for
    /// hidden-reward and embedded models.
    means: Vec<Vec<f64>>,
}

fn check_row(row: &[f64], n_obs: usize, what: &str) -> Result<()> {
    if row.len() != n_obs {
        return Err(Error::Shape(format!("{what}: {} entries for {n_obs} symbols", row.len())));
    }
    let mut s = 0.0;
    for &p in row {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDist(format!("{what}: entry {p}")));
        }
        s += p;
    }
    if (s - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidDist(format!("{what}: row sums to {s}")));
    }
    Ok(())
}

impl Instance {
    /// Validate and assemble an instance.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        k: usize,
        kind: Kind,
        pure_sets: Vec<Vec<String>>,
        obs: Vec<ObsSymbol>,
        models: Vec<FiniteModel>,
        reveals_sigma: bool,
        reward_range: (f64, f64),
        family: Family,
    ) -> Result<Instance> {
        if models.is_empty() {
            return Err(Error::Shape("empty model class".into()));
        }
        if pure_sets.is_empty() || pure_sets.iter().any(|s| s.is_empty()) {
            return Err(Error::Shape("empty decision set".into()));
        }
        if kind.is_ma() && pure_sets.len() != k {
            return Err(Error::Shape(format!("{} pure sets for K = {k}", pure_sets.len())));
        }
        if !kind.is_ma() && pure_sets.len() != 1 {
            return Err(Error::Shape("hidden-reward instances have one decision list".into()));
        }
        let sizes: Vec<usize> = pure_sets.iter().map(|s| s.len()).collect();
        let mut strides = vec![1; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        let n_rows: usize = sizes.iter().product();
        let n_obs = obs.len();
        for s in &obs {
            if s.rewards.len() != k {
                return Err(Error::Shape(format!("symbol '{}' has {} rewards", s.id, s.rewards.len())));
            }
            for &r in &s.rewards {
                if !(reward_range.0 - 1e-12..=reward_range.1 + 1e-12).contains(&r) {
                    return Err(Error::Shape(format!("symbol '{}' reward {r} out of range", s.id)));
                }
            }
            if let Some(t) = s.pure_tag {
                if t >= n_rows {
                    return Err(Error::Shape(format!("symbol '{}' tag {t} out of range", s.id)));
                }
            }
        }
        for m in &models {
            match &m.kernel {
                Kernel::Dense(rows) => {
                    if rows.len() != n_rows {
                        return Err(Error::Shape(format!(
                            "model '{}' has {} rows, expected {n_rows}",
                            m.label,
                            rows.len()
                        )));
                    }
                    for (i, row) in rows.iter().enumerate() {
                        check_row(row, n_obs, &format!("model '{}' row {i}", m.label))?;
                    }
                }
                Kernel::Constant(row) => check_row(row, n_obs, &format!("model '{}'", m.label))?,
                Kernel::Embedded { .. } => {
                    if !matches!(family, Family::Embedded(_)) {
                        return Err(Error::Shape("embedded kernel outside an embedded family".into()));
                    }
                }
            }
            if kind == Kind::Hr {
                match &m.values {
                    Some(v) if v.len() == n_rows => {}
                    _ => {
                        return Err(Error::Shape(format!(
                            "model '{}' needs a value table of length {n_rows}",
                            m.label
                        )))
                    }
                }
            }
        }
        let mut inst = Instance {
            k,
            kind,
            pure_sets,
            obs,
            models,
            reveals_sigma,
            reward_range,
            family,
            sizes,
            strides,
            n_rows,
            means: Vec::new(),
        };
        if kind.is_ma() {
            inst.means = (0..inst.models.len()).map(|m| inst.compute_means(m)).collect();
        }
        Ok(inst)
    }

    fn compute_means(&self, m: usize) -> Vec<f64> {
        let k = self.k;
        let mean_of = |row: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; k];
            for (p, s) in row.iter().zip(&self.obs) {
                if *p > 0.0 {
                    for j in 0..k {
                        out[j] += p * s.rewards[j];
                    }
                }
            }
            out
        };
        match &self.models[m].kernel {
            Kernel::Dense(rows) => rows.iter().flat_map(|r| mean_of(r)).collect(),
            Kernel::Constant(row) => {
                let one = mean_of(row);
                (0..self.n_rows).flat_map(|_| one.clone()).collect()
            }
            Kernel::Embedded { .. } => Vec::new(),
        }
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    pub fn n_obs(&self) -> usize {
        self.obs.len()
    }

    /// Number of kernel rows: |Sigma| for multi-agent kinds, |Pi| otherwise.
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn profile_index(&self, actions: &[usize]) -> usize {
        actions.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn profile_of(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        for (i, s) in self.strides.iter().enumerate() {
            out[i] = flat / s;
            flat %= s;
        }
        out
    }

    pub fn model_index(&self, label: &str) -> Result<usize> {
        self.models
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::Parse(format!("no model labelled '{label}'")))
    }

    pub fn embed_data(&self) -> Option<&EmbedData> {
        match &self.family {
            Family::Embedded(e) => Some(&e.0),
            _ => None,
        }
    }

    /// True when every kernel ignores the decision.
    pub fn decision_independent(&self) -> bool {
        self.models.iter().all(|m| matches!(m.kernel, Kernel::Constant(_)))
    }

    /// Kernel row `r` of model `m`.
    pub fn row(&self, m: usize, r: usize) -> Cow<'_, [f64]> {
        match &self.models[m].kernel {
            Kernel::Dense(rows) => Cow::Borrowed(&rows[r]),
            Kernel::Constant(row) => Cow::Borrowed(row),
            Kernel::Embedded { base, v } => {
                let e = self.embed_data().expect("embedded kernel");
                let s1 = r / self.strides[0];
                let s2 = r % self.strides[0];
                let mut out = vec![0.0; self.obs.len()];
                if s2 == 0 {
                    out[..e.n_base_obs].copy_from_slice(&e.base_rows[*base][s1]);
                } else if s2 == *v {
                    out[e.gap_sym[*base][s1]] = 1.0;
                } else {
                    out[e.bottom_sym] = 1.0;
                }
                Cow::Owned(out)
            }
        }
    }

    /// Expected reward of player `j` at pure profile `r` under model `m`.
    pub fn mean_reward(&self, m: usize, r: usize, j: usize) -> f64 {
        if let Kernel::Embedded { base, v } = self.models[m].kernel {
            let e = self.embed_data().expect("embedded kernel");
            let s1 = r / self.strides[0];
            let s2 = r % self.strides[0];
            let r1 = if s2 == 0 {
                0.0
            } else if s2 == v {
                -e.gaps[base][s1]
            } else {
                1.0
            };
            return if j == 0 { r1 } else { -r1 };
        }
        self.means[m][r * self.k + j]
    }

    /// Sparse weights over kernel rows induced by a decision.
    pub fn row_weights(&self, d: &Decision) -> Result<Vec<(usize, f64)>> {
        match d {
            Decision::Hr(i) => {
                if self.kind != Kind::Hr {
                    return Err(Error::Shape("index decision on a multi-agent instance".into()));
                }
                if *i >= self.n_rows {
                    return Err(Error::Shape(format!("decision {i} out of range")));
                }
                Ok(vec![(*i, 1.0)])
            }
            Decision::Joint(p) => {
                if self.kind == Kind::Ne || self.kind == Kind::Hr {
                    return Err(Error::Shape(format!("joint decision on a {:?} instance", self.kind)));
                }
                if p.len() != self.n_rows {
                    return Err(Error::Shape(format!("joint decision of length {}", p.len())));
                }
                Ok(p.probs().iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(i, &w)| (i, w)).collect())
            }
            Decision::Ne(parts) => {
                if self.kind == Kind::Hr {
                    return Err(Error::Shape("product decision on a hidden-reward instance".into()));
                }
                self.check_product(parts)?;
                let mut out = vec![(0usize, 1.0f64)];
                for (j, part) in parts.iter().enumerate() {
                    let mut next = Vec::new();
                    for &(idx, w) in &out {
                        for (a, &p) in part.probs().iter().enumerate() {
                            if p > 0.0 {
                                next.push((idx + a * self.strides[j], w * p));
                            }
                        }
                    }
                    out = next;
                }
                Ok(out)
            }
        }
    }

    fn check_product(&self, parts: &[Dist]) -> Result<()> {
        if parts.len() != self.k {
            return Err(Error::Shape(format!("{} strategies for K = {}", parts.len(), self.k)));
        }
        for (j, p) in parts.iter().enumerate() {
            if p.len() != self.sizes[j] {
                return Err(Error::Shape(format!("player {j} strategy of length {}", p.len())));
            }
        }
        Ok(())
    }

    /// M(pi): the observation distribution of model `m` under decision `d`.
    pub fn obs_dist(&self, m: usize, d: &Decision) -> Result<Vec<f64>> {
        if let (Kernel::Embedded { base, v }, Decision::Ne(parts)) = (&self.models[m].kernel, d) {
            self.check_product(parts)?;
            return Ok(self.embedded_obs_dist(*base, *v, parts));
        }
        match &self.models[m].kernel {
            Kernel::Constant(row) => {
                self.row_weights(d)?;
                Ok(row.clone())
            }
            _ => {
                let mut out = vec![0.0; self.obs.len()];
                for (r, w) in self.row_weights(d)? {
                    for (acc, &p) in out.iter_mut().zip(self.row(m, r).iter()) {
                        *acc += w * p;
                    }
                }
                Ok(out)
            }
        }
    }

    fn embedded_obs_dist(&self, base: usize, v: usize, parts: &[Dist]) -> Vec<f64> {
        let e = self.embed_data().expect("embedded kernel");
        let (p1, p2) = (parts[0].probs(), parts[1].probs());
        let mut out = vec![0.0; self.obs.len()];
        let w0 = p2[0];
        let wv = p2[v];
        let rest = (1.0 - w0 - wv).max(0.0);
        for (s1, &a) in p1.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            if w0 > 0.0 {
                for (o, &p) in e.base_rows[base][s1].iter().enumerate() {
                    out[o] += w0 * a * p;
                }
            }
            out[e.gap_sym[base][s1]] += wv * a;
        }
        out[e.bottom_sym] += rest;
        out
    }

    /// f_k^M(pi) for a multi-agent instance.
    pub fn expected_reward(&self, m: usize, d: &Decision, j: usize) -> Result<f64> {
        if !self.kind.is_ma() {
            return Err(Error::Unsupported(
                "hidden-reward instances have no observed rewards; use hidden_value".into(),
            ));
        }
        if j >= self.k {
            return Err(Error::Shape(format!("player {j} of {}", self.k)));
        }
        if let (Kernel::Embedded { .. }, Decision::Ne(parts)) = (&self.models[m].kernel, d) {
            self.check_product(parts)?;
            let f1 = self.embedded_f1(m, parts);
            return Ok(if j == 0 { f1 } else { -f1 });
        }
        Ok(self.row_weights(d)?.iter().map(|&(r, w)| w * self.mean_reward(m, r, j)).sum())
    }

    fn embedded_f1(&self, m: usize, parts: &[Dist]) -> f64 {
        let Kernel::Embedded { base, v } = self.models[m].kernel else { unreachable!() };
        let e = self.embed_data().expect("embedded kernel");
        let p2 = parts[1].probs();
        let eg: f64 = parts[0].probs().iter().zip(&e.gaps[base]).map(|(a, g)| a * g).sum();
        let rest = 1.0 - p2[0] - p2[v];
        rest - p2[v] * eg
    }

    /// f^M(pi) for a hidden-reward instance.
    pub fn hidden_value(&self, m: usize, d: &Decision) -> Result<f64> {
        match (self.kind, d) {
            (Kind::Hr, Decision::Hr(i)) => {
                let vals = self.models[m].values.as_ref().expect("validated value table");
                vals.get(*i).copied().ok_or_else(|| Error::Shape(format!("decision {i} out of range")))
            }
            (Kind::Hr, _) => Err(Error::Shape("hidden-reward decisions are indices".into())),
            _ => Err(Error::Unsupported("hidden_value needs a hidden-reward instance".into())),
        }
    }

    /// g^M(pi) = max over decisions of f^M minus f^M(pi).
    pub fn gap(&self, m: usize, d: &Decision) -> Result<f64> {
        let v = self.hidden_value(m, d)?;
        let vals = self.models[m].values.as_ref().expect("validated value table");
        Ok(vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v)
    }

    /// h^M(pi): summed best-deviation gains, or the gap for hidden rewards.
    pub fn suboptimality(&self, m: usize, d: &Decision) -> Result<f64> {
        if self.kind == Kind::Hr {
            return self.gap(m, d);
        }
        if let (Kernel::Embedded { .. }, Decision::Ne(parts)) = (&self.models[m].kernel, d) {
            if self.kind == Kind::Ne {
                self.check_product(parts)?;
                return Ok(self.embedded_h(m, parts));
            }
        }
        self.suboptimality_generic(m, d)
    }

    /// Closed form for the lifted game: player 1's gain plus player 2's.
    fn embedded_h(&self, m: usize, parts: &[Dist]) -> f64 {
        let Kernel::Embedded { base, v } = self.models[m].kernel else { unreachable!() };
        let e = self.embed_data().expect("embedded kernel");
        let p2 = parts[1].probs();
        let gaps = &e.gaps[base];
        let eg: f64 = parts[0].probs().iter().zip(gaps).map(|(a, g)| a * g).sum();
        let gmin = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
        let rest = (1.0 - p2[0] - p2[v]).max(0.0);
        let f1 = rest - p2[v] * eg;
        let gain1 = (rest - p2[v] * gmin) - f1;
        // Player 2 answers with 0 (value 0), v (value E g >= 0) or another
        // hiding action (value -1), so v is always a best reply.
        let gain2 = eg.max(0.0) + f1;
        gain1 + gain2
    }

    /// Deviation gains evaluated through the per-profile mean table. Exact
    /// for every multi-agent kind; used directly except on lifted games.
    pub fn suboptimality_generic(&self, m: usize, d: &Decision) -> Result<f64> {
        if !self.kind.is_ma() {
            return self.gap(m, d);
        }
        let n = self.n_rows;
        let weights = match (self.kind, d) {
            (Kind::Ne, Decision::Ne(parts)) => {
                self.check_product(parts)?;
                return Ok(self.ne_h(m, parts));
            }
            (Kind::Ne, _) => return Err(Error::Shape("NE instances take product decisions".into())),
            (_, Decision::Hr(_)) => return Err(Error::Shape("index decision on a multi-agent instance".into())),
            _ => {
                let mut w = vec![0.0; n];
                for (r, p) in self.row_weights(d)? {
                    w[r] += p;
                }
                w
            }
        };
        let mut total = 0.0;
        for j in 0..self.k {
            let stride = self.strides[j];
            let size = self.sizes[j];
            let fj: f64 = (0..n).map(|r| weights[r] * self.mean_reward(m, r, j)).sum();
            let term = match self.kind {
                Kind::Cce => {
                    let mut dev = vec![0.0; size];
                    for (r, &w) in weights.iter().enumerate() {
                        if w == 0.0 {
                            continue;
                        }
                        let base = r - ((r / stride) % size) * stride;
                        for (a, acc) in dev.iter_mut().enumerate() {
                            *acc += w * self.mean_reward(m, base + a * stride, j);
                        }
                    }
                    let best = dev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    (best - fj).max(0.0)
                }
                Kind::Ce => {
                    // Swap regret: for every recommendation b, best response to
                    // the conditional (unnormalized) opponent distribution.
                    let mut dev = vec![vec![0.0; size]; size];
                    for (r, &w) in weights.iter().enumerate() {
                        if w == 0.0 {
                            continue;
                        }
                        let b = (r / stride) % size;
                        let base = r - b * stride;
                        for a in 0..size {
                            dev[b][a] += w * self.mean_reward(m, base + a * stride, j);
                        }
                    }
                    let best: f64 = dev.iter().map(|row| row.iter().cloned().fold(f64::NEG_INFINITY, f64::max)).sum();
                    best - fj
                }
                _ => unreachable!(),
            };
            total += term;
        }
        Ok(total)
    }

    fn ne_h(&self, m: usize, parts: &[Dist]) -> f64 {
        let n = self.n_rows;
        let mut total = 0.0;
        for j in 0..self.k {
            let stride = self.strides[j];
            let size = self.sizes[j];
            let mut dev = vec![0.0; size];
            let mut fj = 0.0;
            for r in 0..n {
                if (r / stride) % size != 0 {
                    continue;
                }
                // Weight of the opponents' part of profile r.
                let mut w = 1.0;
                for (i, part) in parts.iter().enumerate() {
                    if i != j {
                        w *= part.probs()[(r / self.strides[i]) % self.sizes[i]];
                    }
                }
                if w == 0.0 {
                    continue;
                }
                for (a, acc) in dev.iter_mut().enumerate() {
                    let val = self.mean_reward(m, r + a * stride, j);
                    *acc += w * val;
                    fj += w * parts[j].probs()[a] * val;
                }
            }
            let best = dev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            total += best - fj;
        }
        total
    }

    pub fn is_equilibrium(&self, m: usize, d: &Decision, tol: f64) -> Result<bool> {
        Ok(self.suboptimality(m, d)? <= tol)
    }

    /// Draw a symbol index from kernel row `r` of model `m`.
    pub fn sample_obs<R: Rng + ?Sized>(&self, m: usize, r: usize, rng: &mut R) -> usize {
        let row = self.row(m, r);
        sample_index(&row, rng)
    }

    /// Pure-profile decisions, one per kernel row.
    pub fn pure_decisions(&self) -> Vec<Decision> {
        match self.kind {
            Kind::Hr => (0..self.n_rows).map(Decision::Hr).collect(),
            Kind::Ne => (0..self.n_rows)
                .map(|r| {
                    let prof = self.profile_of(r);
                    Decision::Ne(prof.iter().zip(&self.sizes).map(|(&a, &n)| Dist::point(n, a)).collect())
                })
                .collect(),
            _ => (0..self.n_rows).map(|r| Decision::Joint(Dist::point(self.n_rows, r))).collect(),
        }
    }

    /// The uniform decision of the instance's kind (uniform product for NE).
    pub fn uniform_decision(&self) -> Option<Decision> {
        match self.kind {
            Kind::Hr => None,
            Kind::Ne => Some(Decision::Ne(self.sizes.iter().map(|&n| Dist::uniform(n)).collect())),
            _ => Some(Decision::Joint(Dist::uniform(self.n_rows))),
        }
    }

    /// Mean-reward table of model `m` for player `j`, indexed by flat profile.
    pub fn reward_table(&self, m: usize, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.mean_reward(m, r, j)).collect()
    }
}

/// Inverse-CDF draw from an unnormalized-safe probability row.
pub fn sample_index<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Embed a product decision as a joint distribution over flat profiles.
pub fn product_to_joint(parts: &[Dist]) -> Dist {
    let mut probs = vec![1.0];
    for part in parts {
        let mut next = Vec::with_capacity(probs.len() * part.len());
        for &a in &probs {
            for &b in part.probs() {
                next.push(a * b);
            }
        }
        probs = next;
    }
    Dist::new(probs).expect("product of valid distributions")
}

/// Outcome of [`validate_instance`].
#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub monotone: Vec<bool>,
    pub reward_range_ok: bool,
    pub reveal_ok: bool,
    /// Per model: Some(decision description) when an equilibrium was found.
    pub existence: Vec<Option<String>>,
    pub issues: Vec<String>,
}

impl ValidationReport {
    /// Structural checks passed; existence may still be unverified.
    pub fn structural_ok(&self) -> bool {
        self.reward_range_ok && self.reveal_ok && self.monotone.iter().all(|&b| b)
    }
}

/// Structural checks; problems are reported, never thrown.
pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut rep = ValidationReport { reward_range_ok: true, reveal_ok: true, ..Default::default() };
    let (lo, hi) = inst.reward_range;
    for s in &inst.obs {
        if s.rewards.iter().any(|&r| r < lo - 1e-12 || r > hi + 1e-12) {
            rep.reward_range_ok = false;
            rep.issues.push(format!("symbol '{}' reward outside [{lo}, {hi}]", s.id));
        }
    }
    if inst.kind.is_ma() && inst.reveals_sigma && inst.embed_data().is_none() {
        for (m, model) in inst.models.iter().enumerate() {
            for r in 0..inst.n_rows() {
                let row = inst.row(m, r);
                for (o, &p) in row.iter().enumerate() {
                    if p > 0.0 && inst.obs[o].pure_tag != Some(r) {
                        rep.reveal_ok = false;
                        rep.issues.push(format!(
                            "model '{}' row {r}: symbol '{}' does not reveal the profile",
                            model.label, inst.obs[o].id
                        ));
                    }
                }
            }
        }
    }
    let mut grid = if inst.n_rows() <= 4096 { inst.pure_decisions() } else { Vec::new() };
    if let Some(u) = inst.uniform_decision() {
        grid.push(u);
    }
    for m in 0..inst.n_models() {
        let mut ok = true;
        if inst.kind.is_ma() {
            for d in &grid {
                match inst.suboptimality(m, d) {
                    Ok(h) if h >= -H_TOL => {}
                    Ok(h) => {
                        ok = false;
                        rep.issues.push(format!("model {m}: negative best deviation gain {h}"));
                    }
                    Err(e) => {
                        ok = false;
                        rep.issues.push(format!("model {m}: {e}"));
                    }
                }
            }
        }
        rep.monotone.push(ok);
        rep.existence.push(find_equilibrium(inst, m, &grid).map(|d| d.describe()));
    }
    rep
}

/// Best-effort search for an equilibrium of model `m`: the supplied grid,
/// then computed candidates (LP for joint kinds, support enumeration for
/// two-player NE).
pub fn find_equilibrium(inst: &Instance, m: usize, grid: &[Decision]) -> Option<Decision> {
    if inst.kind == Kind::Hr {
        let vals = inst.models[m].values.as_ref()?;
        return Some(Decision::Hr(argmax(vals)));
    }
    for d in grid {
        if inst.suboptimality(m, d).ok()? <= H_TOL {
            return Some(d.clone());
        }
    }
    let cand = match inst.kind {
        Kind::Cce | Kind::Ce => crate::equilibria::correlated_equilibrium(inst, m, inst.kind).map(Decision::Joint),
        Kind::Ne => crate::equilibria::nash_two_player(inst, m).map(Decision::Ne),
        Kind::Hr => None,
    }?;
    if inst.suboptimality(m, &cand).ok()? <= 1e-7 {
        Some(cand)
    } else {
        None
    }
}

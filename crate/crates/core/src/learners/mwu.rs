//! Exponential weights and the regret identity it satisfies.

/// q(i) proportional to exp(eta * cum(i)), computed with a max shift.
pub fn exp_weights(cum: &[f64], eta: f64) -> Vec<f64> {
    let mx = cum.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let w: Vec<f64> = cum.iter().map(|c| (eta * (c - mx)).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// KL(p || q) with the 0 log 0 = 0 convention.
pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * (a / b).ln()).sum()
}

#[derive(Clone, Debug)]
pub struct MwuCheck {
    /// max over comparators j of sum_t f^t(j).
    pub lhs: f64,
    /// sum_t <q^{t+1}, f^t> - (1/eta) sum_t KL(q^{t+1} || q^t) + (1/eta) log d.
    pub rhs: f64,
}

impl MwuCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + slack
    }
}

/// Run exponential weights from the uniform start on `rewards` and
/// evaluate both sides of the negative-KL regret bound.
pub fn mwu_regret_check(rewards: &[Vec<f64>], eta: f64) -> MwuCheck {
    let d = rewards[0].len();
    let mut cum = vec![0.0; d];
    let mut q = exp_weights(&cum, eta);
    let mut rhs = (d as f64).ln() / eta;
    for f in rewards {
        for (c, x) in cum.iter_mut().zip(f) {
            *c += x;
        }
        let next = exp_weights(&cum, eta);
        rhs += next.iter().zip(f).map(|(a, b)| a * b).sum::<f64>() - kl(&next, &q) / eta;
        q = next;
    }
    let lhs = cum.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    MwuCheck { lhs, rhs }
}

//! Library outputs against closed forms and brute force computed here.

use approx::assert_abs_diff_eq;
use madec_core::constructions::{layered_needle_instance, twin_instance, LayeredNeedle};
use madec_core::dec::{constrained_dec, offset_dec, Reference};
use madec_core::dist::{f_divergence, hellinger_sq};
use madec_core::game::{solve_lp, solve_mw};
use madec_core::harness::estimate_layered_first_hit;
use madec_core::learners::{first_hit_run, first_hit_twin_risk, Environment};
use madec_core::rng::stream_rng;
use madec_core::{Decision, DivergenceKind, Dist};
use proptest::prelude::*;

fn pure_grid(n: usize) -> Vec<Decision> {
    (0..n).map(Decision::Hr).collect()
}

/// Expected first-hit risk on the layered needle, layer by layer: a layer
/// that never fires leaves a uniform guess that is the needle w.p. 1/N_l.
fn layered_first_hit_oracle(l: usize, c_prob: f64, t: usize) -> f64 {
    (1..=l)
        .map(|i| {
            let n = (1usize << i) as f64;
            let delta = 1.0 / (c_prob * n).powi(2);
            let silent = (1.0 - delta * (n - 1.0)).powi(t as i32);
            silent / (l as f64 * n)
        })
        .sum()
}

#[test]
fn layered_counts_at_three_layers() {
    let inst = layered_needle_instance(3, 1.0).unwrap();
    assert_eq!(inst.pure_decisions().len(), 2 * 4 * 8);
    assert_eq!(inst.n_models(), 64);
    assert_eq!(inst.n_obs(), 3 * 5 * 9);
}

#[test]
fn layered_first_hit_matches_layerwise_sum() {
    // frozen from the oracle above at L = 6, C_prob = 1
    let frozen = [(16, 0.014784454402134), (32, 0.005616250169786), (64, 0.001925039487275)];
    for (t, want) in frozen {
        assert_abs_diff_eq!(layered_first_hit_oracle(6, 1.0, t), want, epsilon = 1e-12);
        let e = estimate_layered_first_hit(6, 1.0, t, 20_000, 3).unwrap();
        assert!((e.mean - want).abs() <= 4.0 * e.stderr + 1e-4, "T={t}: {} vs {want}", e.mean);
    }
}

#[test]
fn twin_first_hit_closed_form_matches_round_sum() {
    for &(n, delta, beta, t) in &[(2usize, 0.05, 0.1, 10usize), (8, 0.01, 0.2, 64), (5, 0.0, 0.3, 7)] {
        // sum over the round of the first non-bottom symbol
        let quiet = 1.0 - delta * (n as f64 - 1.0) - beta;
        let fire = 1.0 - quiet;
        let mut p_hit = 0.0;
        for r in 0..t {
            p_hit += quiet.powi(r as i32) * fire;
        }
        let want = (1.0 - p_hit) / n as f64 + p_hit * beta / fire;
        assert_abs_diff_eq!(first_hit_twin_risk(n, delta, beta, t), want, epsilon = 1e-12);
    }
}

#[test]
fn twin_first_hit_simulation_agrees() {
    let (n, delta, beta, t) = (4, 0.05, 0.2, 5);
    let inst = twin_instance(n, delta, beta).unwrap();
    let env = Environment::new(&inst, "m0").unwrap();
    let reps = 20_000;
    let mut total = 0.0;
    for rep in 0..reps {
        let mut rng = stream_rng(17, rep);
        total += first_hit_run(&inst, &env, t, &mut rng).unwrap().risk(&inst, 0).unwrap();
    }
    let mean = total / reps as f64;
    let want = first_hit_twin_risk(n, delta, beta, t);
    assert!((mean - want).abs() < 0.015, "{mean} vs {want}");
}

#[test]
fn offset_dec_on_two_twins() {
    // Against model m0 the offset DEC is max(0, (1 - gamma h) / 2) with
    // h the squared Hellinger distance between the twins.
    let (delta, beta) = (0.1, 0.4);
    let inst = twin_instance(2, delta, beta).unwrap();
    let h = 2.0 * (beta.sqrt() - delta.sqrt()).powi(2);
    let r = Reference::model(&inst, 0);
    for gamma in [0.1, 1.0, 3.0, 5.0, 20.0] {
        let got = offset_dec(&inst, &pure_grid(2), &r, gamma).unwrap().value;
        assert_abs_diff_eq!(got, (0.5 * (1.0 - gamma * h)).max(0.0), epsilon = 1e-9);
    }
}

#[test]
fn constrained_dec_on_two_twins() {
    let (delta, beta) = (0.1, 0.4);
    let inst = twin_instance(2, delta, beta).unwrap();
    let h = 2.0 * (beta.sqrt() - delta.sqrt()).powi(2);
    let r = Reference::model(&inst, 0);
    let grid = pure_grid(2);
    // below the separation only the reference is feasible
    assert_abs_diff_eq!(constrained_dec(&inst, &grid, &r, 0.5 * h.sqrt()).unwrap().value, 0.0, epsilon = 1e-9);
    assert_abs_diff_eq!(constrained_dec(&inst, &grid, &r, 2.0 * h.sqrt()).unwrap().value, 0.5, epsilon = 1e-9);
}

/// Value of a 2x2 game where the row player minimizes, by checking the
/// endpoints and the crossing of the two column payoffs.
fn two_by_two_value(a: [[f64; 2]; 2]) -> f64 {
    let worst = |p: f64| (0..2).map(|j| p * a[0][j] + (1.0 - p) * a[1][j]).fold(f64::NEG_INFINITY, f64::max);
    let mut cands = vec![0.0, 1.0];
    let den = a[0][0] - a[1][0] - a[0][1] + a[1][1];
    if den.abs() > 1e-12 {
        let p = (a[1][1] - a[1][0]) / den;
        if (0.0..=1.0).contains(&p) {
            cands.push(p);
        }
    }
    cands.into_iter().map(worst).fold(f64::INFINITY, f64::min)
}

proptest! {
    #[test]
    fn lp_solves_two_by_two(x in prop::array::uniform4(-1.0f64..1.0)) {
        let a = [[x[0], x[1]], [x[2], x[3]]];
        let rows: Vec<Vec<f64>> = a.iter().map(|r| r.to_vec()).collect();
        let sol = solve_lp(&rows).unwrap();
        prop_assert!((sol.value - two_by_two_value(a)).abs() < 1e-9);
        prop_assert!(sol.gap < 1e-9);
    }

    #[test]
    fn mw_agrees_with_lp(seed in 0u64..1000) {
        use rand::Rng;
        let mut rng = stream_rng(seed, 0);
        let a: Vec<Vec<f64>> = (0..4).map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let lp = solve_lp(&a).unwrap();
        let mw = solve_mw(&a, 200_000, 1e-4).unwrap();
        prop_assert!((lp.value - mw.value).abs() < 1e-3);
    }

    #[test]
    fn hellinger_of_bernoullis(p in 0.0f64..1.0, q in 0.0f64..1.0) {
        let want = (p.sqrt() - q.sqrt()).powi(2) + ((1.0 - p).sqrt() - (1.0 - q).sqrt()).powi(2);
        let got = hellinger_sq(&Dist::bernoulli(p).unwrap(), &Dist::bernoulli(q).unwrap()).unwrap();
        prop_assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn chi2_of_bernoullis(p in 0.0f64..1.0, q in 0.05f64..0.95) {
        let want = (p - q).powi(2) / (q * (1.0 - q));
        let kind = DivergenceKind::parse("chi2").unwrap();
        let got = f_divergence(&kind, &Dist::bernoulli(p).unwrap(), &Dist::bernoulli(q).unwrap()).unwrap();
        prop_assert!((got - want).abs() < 1e-9);
    }

    #[test]
    fn dist_rejects_bad_mass(x in 0.0f64..1.0, y in 0.0f64..1.0) {
        prop_assume!((x + y - 1.0).abs() > 1e-6);
        prop_assert!(Dist::new(vec![x, y]).is_err());
    }
}

#[test]
fn needle_encoding_round_trips() {
    let needle = LayeredNeedle::new(4, 1.0).unwrap();
    for idx in 0..needle.n_decisions() {
        assert_eq!(needle.encode(&needle.decode(idx)), idx);
    }
}

#[test]
fn twin_first_hit_reference_point() {
    // N = 10, delta = 0.01, beta = 0.001, T = 50; frozen from the round sum
    let want = 0.011743473713621635;
    assert_abs_diff_eq!(first_hit_twin_risk(10, 0.01, 0.001, 50), want, epsilon = 1e-12);
    let inst = twin_instance(10, 0.01, 0.001).unwrap();
    let env = Environment::new(&inst, "m3").unwrap();
    let reps = 100_000u64;
    let risks: Vec<f64> = (0..reps)
        .map(|rep| first_hit_run(&inst, &env, 50, &mut stream_rng(23, rep)).unwrap().risk(&inst, 3).unwrap())
        .collect();
    let mean = risks.iter().sum::<f64>() / reps as f64;
    let var = risks.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let stderr = (var / reps as f64).sqrt();
    assert!((mean - want).abs() <= 3.0 * stderr, "{mean} vs {want} (stderr {stderr})");
}

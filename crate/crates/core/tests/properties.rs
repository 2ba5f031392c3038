//! Sampled checks of the comparison and scaling properties.

use halfline_kolmogorov::extremal::{norm_table, ExtremalParams};
use halfline_kolmogorov::oracle::{build_phi, decide, synthesize, Problem4};
use halfline_kolmogorov::solver::{solve_outer_b, SolveRequest};
use halfline_kolmogorov::verify::{check_membership, measure_profile, random_member};
use halfline_kolmogorov::DEFAULT_TOL;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs()
}

fn arb_params(r: usize) -> impl Strategy<Value = ExtremalParams> {
    (-2.3f64..2.3, 0.0f64..0.9, -2.3f64..2.3)
        .prop_map(move |(la, frac, ll)| ExtremalParams::new(r, la.exp(), frac * la.exp(), ll.exp()).unwrap())
}

fn arb_orders() -> impl Strategy<Value = (usize, usize, usize)> {
    (3usize..=8).prop_flat_map(|r| (Just(r), 1..=r - 2)).prop_flat_map(|(r, j2)| (Just(r), 0..j2, Just(j2)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_recovers_sampled_norms(((r, j1, j2), unit) in arb_orders().prop_flat_map(|o| (Just(o), arb_params(1)))) {
        let params = ExtremalParams { r, ..unit };
        let t = norm_table(&params).unwrap();
        let targets = [(j1, t.get(j1).unwrap()), (j2, t.get(j2).unwrap()), (r, t.get(r).unwrap())];
        let req = SolveRequest::new(r, j1, j2, targets[0].1, targets[1].1, targets[2].1).unwrap();
        let res = solve_outer_b(&req).unwrap();
        for (k, v) in targets {
            prop_assert!(rel(res.achieved.get(k).unwrap(), v) <= 1e-8);
        }
        if let Some((lo, hi)) = res.b_bracket {
            prop_assert!(lo < res.params.b && res.params.b < hi);
        }
    }

    #[test]
    fn decisions_are_scale_invariant(
        ((r, j1, j2), unit) in arb_orders().prop_filter("four orders need r >= 4 and k2 >= 1", |(r, j1, _)| *r >= 4 && *j1 >= 1)
            .prop_flat_map(|o| (Just(o), arb_params(1))),
        m0_factor in 0.5f64..2.0,
        lambda in 0.2f64..5.0,
        mu in 0.1f64..10.0,
    ) {
        let t = norm_table(&ExtremalParams { r, ..unit }).unwrap();
        let m0 = t.get(0).unwrap() * m0_factor;
        let p = Problem4::new(r, j1, j2, m0, t.get(j1).unwrap(), t.get(j2).unwrap(), t.get(r).unwrap()).unwrap();
        let d = decide(&p, DEFAULT_TOL).unwrap();
        let ds = decide(&p.scaled(lambda, mu), DEFAULT_TOL).unwrap();
        let margin = d.slack_outer.unwrap().abs() / d.phi_norm.unwrap();
        if margin > 1e-8 {
            prop_assert_eq!(d.feasible, ds.feasible);
        }
        let expected = d.phi_norm.unwrap() * mu * lambda.powi(r as i32);
        prop_assert!(rel(ds.phi_norm.unwrap(), expected) < 1e-9);
    }
}

/// A class member whose norms at `(k2, k3, r)` match some extremal spline can
/// never have a smaller sup than that spline.
#[test]
fn members_never_beat_the_extremal_spline() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    for _ in 0..400 {
        let r = rng.gen_range(4..=8);
        let k3 = rng.gen_range(2..=r - 2);
        let k2 = rng.gen_range(1..k3);
        let member = random_member(r, 3, rng.gen()).unwrap();
        let (profile, monotone) = measure_profile(&member).unwrap();
        assert!(monotone);
        let (m2, m3, mr) = (profile.get(k2).unwrap(), profile.get(k3).unwrap(), profile.get(r).unwrap());
        if mr == 0.0 {
            continue;
        }
        let (params, _) = build_phi(r, k2, k3, m2, m3, mr, DEFAULT_TOL).unwrap();
        let phi_norm = norm_table(&params).unwrap().get(0).unwrap();
        let x_norm = profile.get(0).unwrap();
        assert!(x_norm >= phi_norm * (1.0 - 1e-9), "member {x_norm} below extremal {phi_norm} (r={r}, k2={k2}, k3={k3})");
        checked += 1;
    }
    assert!(checked > 300);
}

/// Perturbed extremal splines, re-solved from their own norms, satisfy the same bound.
#[test]
fn perturbed_extremal_members_respect_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let r = rng.gen_range(4..=8);
        let k3 = rng.gen_range(2..=r - 2);
        let k2 = rng.gen_range(1..k3);
        let a = rng.gen_range(0.5..5.0);
        let b = rng.gen_range(0.0..0.8) * a;
        let l = rng.gen_range(0.2..5.0);
        let jitter = |x: f64, rng: &mut ChaCha8Rng| x * (1.0 + rng.gen_range(-0.2..0.2));
        let params = ExtremalParams::new(r, jitter(a, &mut rng), jitter(b, &mut rng).min(0.95 * a), jitter(l, &mut rng));
        let Ok(params) = params else { continue };
        let t = norm_table(&params).unwrap();
        let offset = rng.gen_range(0.0..1.0);
        let x_norm = t.get(0).unwrap() + offset;
        let (solved, _) = build_phi(r, k2, k3, t.get(k2).unwrap(), t.get(k3).unwrap(), t.get(r).unwrap(), DEFAULT_TOL).unwrap();
        let phi_norm = norm_table(&solved).unwrap().get(0).unwrap();
        assert!(x_norm >= phi_norm - 1e-9 * phi_norm.max(1.0));
    }
}

#[test]
fn feasibility_in_m0_is_an_upward_half_line() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let r = rng.gen_range(4..=7);
        let (k2, k3) = (1, 2);
        let t = norm_table(&ExtremalParams::new(r, rng.gen_range(1.0..3.0), rng.gen_range(0.0..0.9), 1.0).unwrap()).unwrap();
        let base = Problem4::new(r, k2, k3, 1.0, t.get(k2).unwrap(), t.get(k3).unwrap(), 1.0).unwrap();
        let phi = decide(&base, DEFAULT_TOL).unwrap().phi_norm.unwrap();
        let verdicts: Vec<bool> = (0..100)
            .map(|i| {
                let m0 = phi * (0.5 + i as f64 / 99.0);
                let p = Problem4::new(r, k2, k3, m0, t.get(k2).unwrap(), t.get(k3).unwrap(), 1.0).unwrap();
                decide(&p, DEFAULT_TOL).unwrap().feasible
            })
            .collect();
        assert_eq!(verdicts.windows(2).filter(|w| w[0] != w[1]).count(), 1);
        assert!(!verdicts[0] && *verdicts.last().unwrap());
    }
}

#[test]
fn witnesses_are_class_members() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let r = rng.gen_range(4..=8);
        let k3 = rng.gen_range(2..=r - 2);
        let k2 = rng.gen_range(1..k3);
        let t = norm_table(&ExtremalParams::new(r, rng.gen_range(0.5..4.0), rng.gen_range(0.0..0.4), rng.gen_range(0.5..2.0)).unwrap()).unwrap();
        let p = Problem4::new(r, k2, k3, 2.0 * t.get(0).unwrap() + 1.0, t.get(k2).unwrap(), t.get(k3).unwrap(), t.get(r).unwrap()).unwrap();
        let w = synthesize(&p, DEFAULT_TOL).unwrap();
        assert!(w.shift >= 0.0);
        check_membership(&w.function(), r).unwrap();
    }
}

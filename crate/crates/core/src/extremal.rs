//! The two-knot extremal splines `phi_r(a, b, l; t)`.
//!
//! `phi_1(a, b, l; t) = l ((t + a)_+ - 2 (t + b)_+)_+` is a tent supported on
//! `[-a, a - 2b]` with its peak `l (a - b)` at `t = -b`, and `phi_r` is its
//! `(r - 1)`-fold antiderivative from `-inf`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::PiecewisePolynomial;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalParams {
    pub r: usize,
    pub a: f64,
    pub b: f64,
    pub l: f64,
}

impl ExtremalParams {
    pub fn new(r: usize, a: f64, b: f64, l: f64) -> Result<Self> {
        let params = Self { r, a, b, l };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r < 1 {
            return Err(Error::Argument("order r must be at least 1".into()));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(Error::Argument(format!("slope l = {} must be positive", self.l)));
        }
        if !(self.b >= 0.0 && self.a > self.b && self.a.is_finite()) {
            return Err(Error::Argument(format!(
                "need a > b >= 0, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    /// `(r, lambda a, lambda b, mu l)`; every norm of order `k` picks up `mu lambda^(r-k)`.
    pub fn scaled(&self, lambda: f64, mu: f64) -> Self {
        Self {
            r: self.r,
            a: lambda * self.a,
            b: lambda * self.b,
            l: mu * self.l,
        }
    }
}

/// Sup-norms `||x^(k)||` keyed by derivative order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormProfile {
    entries: BTreeMap<usize, f64>,
}

impl NormProfile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, f64)>>(pairs: I) -> Self {
        Self {
            entries: pairs.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, order: usize, value: f64) {
        self.entries.insert(order, value);
    }

    pub fn get(&self, order: usize) -> Option<f64> {
        self.entries.get(&order).copied()
    }

    /// Like [`get`](Self::get) but reports a missing order as an argument error.
    pub fn require(&self, order: usize) -> Result<f64> {
        self.get(order)
            .ok_or_else(|| Error::Argument(format!("norm profile has no entry for order {order}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Apply the homogeneity law: entry `k` times `mu lambda^(r-k)`.
    pub fn scaled(&self, r: usize, lambda: f64, mu: f64) -> Self {
        Self::from_pairs(
            self.iter()
                .map(|(k, v)| (k, v * mu * lambda.powi(r as i32 - k as i32))),
        )
    }
}

pub fn build_phi1(params: &ExtremalParams) -> Result<PiecewisePolynomial> {
    params.validate()?;
    let ExtremalParams { a, b, l, .. } = *params;
    let tail_knot = a - 2.0 * b;
    let mut pieces = vec![(-a, vec![0.0, l]), (-b, vec![l * (a - b), -l])];
    if tail_knot < 0.0 {
        pieces.push((tail_knot, vec![0.0]));
    }
    PiecewisePolynomial::from_pieces(pieces, 0.0, a)
}

/// `phi_1, phi_2, ..., phi_r` for the given parameters.
pub fn build_chain(params: &ExtremalParams) -> Result<Vec<PiecewisePolynomial>> {
    let mut chain = Vec::with_capacity(params.r);
    chain.push(build_phi1(params)?);
    for _ in 1..params.r {
        let next = chain.last().expect("chain is non-empty").antiderivative()?;
        chain.push(next);
    }
    Ok(chain)
}

pub fn build_phi_r(params: &ExtremalParams) -> Result<PiecewisePolynomial> {
    Ok(build_chain(params)?.pop().expect("chain has r >= 1 members"))
}

/// `phi_m(a, b, l; 0)`, the sup-norm of `phi_r^(r-m)` for `m >= 2`.
pub fn value_at_origin(order: usize, a: f64, b: f64, l: f64) -> Result<f64> {
    let params = ExtremalParams::new(order, a, b, l)?;
    build_phi_r(&params)?.evaluate(0.0)
}

/// `||phi_r^(k)||` for `k = 0..=r`.
///
/// Orders up to `r - 2` are read off at the origin, where the non-decreasing
/// derivative attains its sup. Order `r - 1` is the tent peak and order `r` is `l`.
pub fn norm_table(params: &ExtremalParams) -> Result<NormProfile> {
    let chain = build_chain(params)?;
    let r = params.r;
    let mut profile = NormProfile::new();
    for (idx, phi) in chain.iter().enumerate().skip(1) {
        // chain[idx] = phi_{idx+1} = phi_r^(r-idx-1)
        profile.insert(r - idx - 1, phi.evaluate(0.0)?);
    }
    profile.insert(r - 1, params.l * (params.a - params.b));
    profile.insert(r, params.l);
    Ok(profile)
}

pub fn scale_params(params: &ExtremalParams, lambda: f64, mu: f64) -> Result<ExtremalParams> {
    if !(lambda > 0.0 && mu > 0.0) {
        return Err(Error::Argument(format!(
            "scaling factors must be positive, got lambda = {lambda}, mu = {mu}"
        )));
    }
    Ok(params.scaled(lambda, mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorial;

    fn params(r: usize, a: f64, b: f64, l: f64) -> ExtremalParams {
        ExtremalParams::new(r, a, b, l).unwrap()
    }

    fn rel(x: f64, y: f64) -> f64 {
        (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn tent_shapes() {
        let p = build_phi1(&params(1, 2.0, 1.0, 1.0)).unwrap();
        assert_eq!(p.evaluate(0.0).unwrap(), 0.0);
        assert_eq!(p.evaluate(-1.0).unwrap(), 1.0);
        assert_eq!(p.breakpoints(), &[-2.0, -1.0]);

        let p = build_phi1(&params(1, 3.0, 1.0, 1.0)).unwrap();
        assert_eq!(p.evaluate(0.0).unwrap(), 1.0);

        let p = build_phi1(&params(1, 1.0, 0.0, 5.0)).unwrap();
        assert_eq!(p.breakpoints(), &[-1.0]);
        assert_eq!(p.segments(), &[vec![0.0, 5.0]]);

        // a < 2b leaves a zero stretch before the origin
        let p = build_phi1(&params(1, 3.0, 2.0, 1.0)).unwrap();
        assert_eq!(p.breakpoints(), &[-3.0, -2.0, -1.0]);
        assert_eq!(p.evaluate(-0.5).unwrap(), 0.0);
    }

    #[test]
    fn tent_matches_direct_formula() {
        for &(a, b, l) in &[(2.0, 1.0, 1.0), (3.0, 2.0, 0.5), (1.0, 0.0, 5.0), (5.0, 0.3, 2.0)] {
            let p = build_phi1(&params(1, a, b, l)).unwrap();
            for i in 0..=500 {
                let t = -(a + 1.0) * i as f64 / 500.0;
                let direct = l * ((t + a).max(0.0) - 2.0 * (t + b).max(0.0)).max(0.0);
                assert!((p.evaluate(t).unwrap() - direct).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(ExtremalParams::new(2, 1.0, 1.0, 1.0).is_err());
        assert!(ExtremalParams::new(2, 1.0, -0.1, 1.0).is_err());
        assert!(ExtremalParams::new(2, 1.0, 0.0, 0.0).is_err());
        assert!(ExtremalParams::new(0, 1.0, 0.0, 1.0).is_err());
        let bad = ExtremalParams { r: 2, a: 1.0, b: 2.0, l: 1.0 };
        assert!(build_phi1(&bad).is_err());
    }

    #[test]
    fn phi_r_spot_values() {
        let phi2 = build_phi_r(&params(2, 2.0, 1.0, 1.0)).unwrap();
        assert!((phi2.evaluate(0.0).unwrap() - 1.0).abs() < 1e-15);
        let phi3 = build_phi_r(&params(3, 2.0, 1.0, 1.0)).unwrap();
        assert!((phi3.evaluate(0.0).unwrap() - 1.0).abs() < 1e-15);
        let phi2 = build_phi_r(&params(2, 1.0, 0.0, 1.0)).unwrap();
        assert_eq!(phi2.evaluate(0.0).unwrap(), 0.5);
        for i in 0..=100 {
            let t = -1.0 + i as f64 / 100.0;
            assert!((phi2.evaluate(t).unwrap() - (t + 1.0).powi(2) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn norm_table_spot_values() {
        let t = norm_table(&params(3, 2.0, 1.0, 1.0)).unwrap();
        for k in 0..=3 {
            assert!((t.get(k).unwrap() - 1.0).abs() < 1e-12, "order {k}");
        }
        let t = norm_table(&params(2, 1.0, 0.0, 1.0)).unwrap();
        assert_eq!(t, NormProfile::from_pairs([(0, 0.5), (1, 1.0), (2, 1.0)]));
    }

    #[test]
    fn norm_table_monomial_case() {
        let (a, l) = (1.7, 2.3);
        let t = norm_table(&params(4, a, 0.0, l)).unwrap();
        for k in 0..4 {
            let expected = l * a.powi(4 - k as i32) / factorial(4 - k);
            assert!(rel(t.get(k).unwrap(), expected) < 1e-14, "order {k}");
        }
        assert_eq!(t.get(4), Some(l));
    }

    #[test]
    fn top_orders_are_exact() {
        let p = params(5, 3.25, 1.125, 0.7);
        let t = norm_table(&p).unwrap();
        assert_eq!(t.get(5), Some(p.l));
        assert_eq!(t.get(4), Some(p.l * (p.a - p.b)));
    }

    #[test]
    fn tent_peak_is_the_sup_of_order_r_minus_1() {
        // both a < 2b and a >= 2b
        for &(a, b) in &[(3.0, 2.0), (3.0, 1.0), (2.0, 1.0), (4.0, 0.0)] {
            let p = params(4, a, b, 1.3);
            let d = build_phi_r(&p).unwrap().nth_derivative(3);
            let grid_max = (0..=20_000)
                .map(|i| d.evaluate(-(a + 1.0) * i as f64 / 20_000.0).unwrap())
                .fold(0.0, f64::max);
            let entry = norm_table(&p).unwrap().get(3).unwrap();
            assert!(rel(grid_max, entry) < 1e-3);
            assert!(rel(d.sup_norm_halfline(), entry) < 1e-14);
        }
    }

    #[test]
    fn scaling_examples() {
        let p = params(3, 2.0, 1.0, 1.0);
        assert_eq!(scale_params(&p, 1.0, 1.0).unwrap(), p);
        let q = scale_params(&params(2, 1.0, 0.0, 1.0), 2.0, 1.0).unwrap();
        assert_eq!(norm_table(&q).unwrap(), NormProfile::from_pairs([(0, 2.0), (1, 2.0), (2, 1.0)]));
        let t = norm_table(&scale_params(&p, 1.0, 3.0).unwrap()).unwrap();
        for k in 0..=3 {
            assert!((t.get(k).unwrap() - 3.0).abs() < 1e-14);
        }
        assert!(scale_params(&p, 0.0, 1.0).is_err());
    }

    #[test]
    fn membership_on_grid() {
        for &(r, a, b, l) in &[(3, 2.0, 1.0, 1.0), (6, 3.0, 2.5, 0.4), (8, 1.0, 0.2, 9.0), (5, 4.0, 0.0, 1.0)] {
            let p = params(r, a, b, l);
            let chain = build_chain(&p).unwrap();
            let phi = chain.last().unwrap();
            for i in 0..=1000 {
                let t = -(a + 1.0) * i as f64 / 1000.0;
                if t <= -a {
                    assert_eq!(phi.evaluate(t).unwrap(), 0.0);
                }
            }
            for k in 0..r {
                let d = phi.nth_derivative(k);
                let scale = d.sup_norm_halfline().max(1.0);
                let mut prev = f64::NEG_INFINITY;
                for i in 0..=1000 {
                    let t = -(a + 1.0) + (a + 1.0) * i as f64 / 1000.0;
                    let v = d.evaluate(t).unwrap();
                    assert!(v >= -1e-12 * scale, "order {k} negative at {t}");
                    if k + 2 <= r {
                        assert!(v - prev >= -1e-12 * scale, "order {k} decreasing at {t}");
                    }
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn repeated_derivative_recovers_tent() {
        let p = params(6, 2.5, 1.0, 1.5);
        let chain = build_chain(&p).unwrap();
        let back = chain.last().unwrap().nth_derivative(5);
        for (x, y) in back.segments().iter().zip(chain[0].segments()) {
            for (u, v) in x.iter().zip(y) {
                assert!((u - v).abs() <= 1e-12 * (1.0 + v.abs()));
            }
        }
    }

    #[test]
    fn homogeneity_of_norm_table() {
        let base = params(5, 2.0, 0.7, 1.3);
        let t = norm_table(&base).unwrap();
        for lambda in [0.5, 2.0, 10.0] {
            for mu in [0.1, 1.0, 7.0] {
                let s = norm_table(&scale_params(&base, lambda, mu).unwrap()).unwrap();
                for (k, v) in t.scaled(5, lambda, mu).iter() {
                    assert!(rel(s.get(k).unwrap(), v) < 1e-10, "k={k} lambda={lambda} mu={mu}");
                }
            }
        }
    }

    #[test]
    fn profile_serializes_as_map() {
        let t = NormProfile::from_pairs([(0, 0.5), (2, 1.0)]);
        assert_eq!(serde_json::to_string(&t).unwrap(), r#"{"0":0.5,"2":1.0}"#);
    }
}

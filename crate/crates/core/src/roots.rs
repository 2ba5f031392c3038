//! Bracketed bisection and real roots of low-degree polynomials.

use crate::error::{Error, Result};

/// Final state of a bisection: `residual(lo) <= 0 < residual(hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        self.lo + 0.5 * (self.hi - self.lo)
    }
}

/// Bisect `residual` on `[lo, hi]` where `residual(lo) <= 0 < residual(hi)` is
/// assumed (and not re-checked). Stops when `done(lo, hi)` holds, when the
/// midpoint is no longer strictly inside the bracket, or after `max_iter` halvings.
pub fn bisect<F, D>(mut residual: F, lo: f64, hi: f64, max_iter: usize, done: D) -> Result<Bracket>
where
    F: FnMut(f64) -> Result<f64>,
    D: Fn(f64, f64) -> bool,
{
    let (mut lo, mut hi) = (lo, hi);
    let mut iterations = 0;
    while iterations < max_iter && !done(lo, hi) {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let value = residual(mid)?;
        if value.is_nan() {
            return Err(Error::NoConvergence(format!("residual is NaN at {mid}")));
        }
        if value <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(Bracket { lo, hi, iterations })
}

/// Horner evaluation of `sum c[j] x^j`.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn trimmed(coeffs: &[f64]) -> &[f64] {
    let len = coeffs.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
    &coeffs[..len]
}

/// Grid resolution used to seed bisection for polynomials of degree four and up.
pub const SEED_GRID: usize = 64;

/// Real roots of `sum c[j] x^j` lying in `[0, width]`.
///
/// Degrees up to three use closed forms; higher degrees are located by sign
/// changes on a [`SEED_GRID`]-point grid and refined by bisection. Roots of even
/// multiplicity are not reported for degree four and up, which is harmless for
/// locating extrema since the derivative does not change sign there.
pub fn real_roots_in(coeffs: &[f64], width: f64) -> Vec<f64> {
    let c = trimmed(coeffs);
    let mut roots = match c.len() {
        0 | 1 => Vec::new(),
        2 => vec![-c[0] / c[1]],
        3 => quadratic_roots(c[0], c[1], c[2]),
        4 => cubic_roots(c[0], c[1], c[2], c[3]),
        _ => return seeded_roots(c, width),
    };
    roots.retain(|x| x.is_finite() && *x >= 0.0 && *x <= width);
    roots
}

fn quadratic_roots(c0: f64, c1: f64, c2: f64) -> Vec<f64> {
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / c2, c0 / q]
}

fn cubic_roots(c0: f64, c1: f64, c2: f64, c3: f64) -> Vec<f64> {
    let (a, b, c) = (c2 / c3, c1 / c3, c0 / c3);
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let depressed: Vec<f64> = if p == 0.0 {
        vec![(-q).cbrt()]
    } else if disc > 0.0 {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect()
    };
    let poly = [c0, c1, c2, c3];
    let dpoly = [c1, 2.0 * c2, 3.0 * c3];
    depressed
        .into_iter()
        .map(|t| {
            let mut x = t + shift;
            for _ in 0..3 {
                let d = horner(&dpoly, x);
                if d == 0.0 {
                    break;
                }
                let step = horner(&poly, x) / d;
                if !step.is_finite() {
                    break;
                }
                x -= step;
            }
            x
        })
        .collect()
}

fn seeded_roots(c: &[f64], width: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    if !(width > 0.0) {
        return roots;
    }
    let grid: Vec<f64> = (0..=SEED_GRID)
        .map(|i| width * i as f64 / SEED_GRID as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&x| horner(c, x)).collect();
    for i in 0..SEED_GRID {
        let (x0, x1) = (grid[i], grid[i + 1]);
        let (v0, v1) = (values[i], values[i + 1]);
        if v0 == 0.0 {
            roots.push(x0);
            continue;
        }
        if v0.signum() == v1.signum() || v1 == 0.0 {
            continue;
        }
        // orient so that the residual is <= 0 at the left end
        let sign = if v0 < 0.0 { 1.0 } else { -1.0 };
        let bracket = bisect(|x| Ok(sign * horner(c, x)), x0, x1, 200, |_, _| false)
            .expect("polynomial residual is infallible");
        roots.push(bracket.midpoint());
    }
    if values[SEED_GRID] == 0.0 {
        roots.push(width);
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(found: &[f64], expected: &[f64]) {
        let mut f = found.to_vec();
        f.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(f.len(), expected.len(), "found {f:?}, expected {expected:?}");
        for (x, y) in f.iter().zip(expected) {
            assert!((x - y).abs() < 1e-10, "found {f:?}, expected {expected:?}");
        }
    }

    #[test]
    fn linear_and_quadratic() {
        close(&real_roots_in(&[-1.0, 2.0], 1.0), &[0.5]);
        // (x - 0.25)(x - 0.75)
        close(&real_roots_in(&[0.1875, -1.0, 1.0], 1.0), &[0.25, 0.75]);
        close(&real_roots_in(&[1.0, 0.0, 1.0], 10.0), &[]);
        close(&real_roots_in(&[3.0], 1.0), &[]);
    }

    #[test]
    fn cubic_three_real_roots() {
        // (x - 0.1)(x - 0.5)(x - 2)
        let c = [-0.1, 1.25, -2.6, 1.0];
        close(&real_roots_in(&c, 3.0), &[0.1, 0.5, 2.0]);
        close(&real_roots_in(&c, 1.0), &[0.1, 0.5]);
    }

    #[test]
    fn cubic_single_real_root() {
        // (x - 0.3)(x^2 + 1)
        let c = [-0.3, 1.0, -0.3, 1.0];
        close(&real_roots_in(&c, 1.0), &[0.3]);
    }

    #[test]
    fn cubic_triple_root() {
        // (x - 0.5)^3
        let c = [-0.125, 0.75, -1.5, 1.0];
        let r = real_roots_in(&c, 1.0);
        assert!(!r.is_empty());
        assert!(r.iter().all(|x| (x - 0.5).abs() < 1e-5));
    }

    #[test]
    fn quintic_by_grid_seeding() {
        // (x - 0.2)(x - 0.4)(x - 0.6)(x - 0.8)(x + 3)
        let roots = [0.2, 0.4, 0.6, 0.8, -3.0];
        let mut c = vec![1.0];
        for r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (j, &cj) in c.iter().enumerate() {
                next[j + 1] += cj;
                next[j] -= r * cj;
            }
            c = next;
        }
        close(&real_roots_in(&c, 1.0), &[0.2, 0.4, 0.6, 0.8]);
    }

    #[test]
    fn bisection_respects_stop_rule() {
        let b = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 200, |lo, hi| hi - lo < 1e-6).unwrap();
        assert!(b.width() < 1e-6);
        assert!(b.lo * b.lo - 2.0 <= 0.0 && b.hi * b.hi - 2.0 > 0.0);
        assert!((b.midpoint() - 2f64.sqrt()).abs() < 1e-6);
    }
}

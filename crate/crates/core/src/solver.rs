//! Three-norm inverse problem: given orders `j1 < j2 <= r - 2` and targets
//! `M_j1, M_j2, M_r`, find `(a, b, l)` with `||phi_r^(k)(a, b, l)|| = M_k` at
//! `k = j1, j2, r`.
//!
//! `l = M_r` fixes the top order. For fixed `b`, `a(b)` is the root of
//! `psi(a) = ||phi_r^(j2)(a, b)|| - M_j2`, and `b` is then the root of
//! `eta(b) = ||phi_r^(j1)(a(b), b)|| - M_j1`. Both are found by bracketed
//! bisection taking the first crossing from the left.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{norm_table, value_at_origin, ExtremalParams, NormProfile};
use crate::roots::{bisect, Bracket};
use crate::{factorial, DEFAULT_TOL};

const MAX_BISECTIONS: usize = 200;
const BRACKET_CAP: f64 = (1u64 << 60) as f64;
/// Outer bisection stops once the `b` bracket is this narrow relative to `max(1, b)`.
const OUTER_REL_WIDTH: f64 = 1e-12;

/// Constant `(r - j2)!^((r - j1)/(r - j2)) / (r - j1)!` of the three-norm inequality.
pub fn olov_constant(r: usize, j1: usize, j2: usize) -> f64 {
    let p = (r - j1) as f64 / (r - j2) as f64;
    factorial(r - j2).powf(p) / factorial(r - j1)
}

/// Right-hand side of the three-norm inequality, the least admissible `M_j1`.
pub fn olov_rhs(r: usize, j1: usize, j2: usize, m_j2: f64, m_r: f64) -> f64 {
    let d = (r - j2) as f64;
    let p = (r - j1) as f64 / d;
    let q = (j1 as f64 - j2 as f64) / d;
    olov_constant(r, j1, j2) * m_j2.powf(p) * m_r.powf(q)
}

fn check_orders(r: usize, j1: usize, j2: usize) -> Result<()> {
    if !(j1 < j2 && j2 < r) {
        return Err(Error::Argument(format!(
            "need 0 <= j1 < j2 < r, got j1 = {j1}, j2 = {j2}, r = {r}"
        )));
    }
    Ok(())
}

fn check_positive(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(Error::Argument(format!("{name} = {v} must be positive and finite")));
        }
    }
    Ok(())
}

/// Signed slack `M_j1 - rhs`; non-negative means the triple is admissible.
pub fn check_olov(r: usize, j1: usize, j2: usize, m_j1: f64, m_j2: f64, m_r: f64) -> Result<f64> {
    check_orders(r, j1, j2)?;
    check_positive(&[("M_j1", m_j1), ("M_j2", m_j2), ("M_r", m_r)])?;
    Ok(m_j1 - olov_rhs(r, j1, j2, m_j2, m_r))
}

/// Closed form for `b = 0`: `phi_r(a, 0, l) = l (t + a)_+^r / r!` matched at orders `j` and `r`.
pub fn solve_b_zero(r: usize, j: usize, m_j: f64, m_r: f64) -> Result<ExtremalParams> {
    if j >= r {
        return Err(Error::Argument(format!("need j < r, got j = {j}, r = {r}")));
    }
    check_positive(&[("M_j", m_j), ("M_r", m_r)])?;
    let a = (factorial(r - j) * m_j / m_r).powf(1.0 / (r - j) as f64);
    ExtremalParams::new(r, a, 0.0, m_r)
}

/// `a > b` with `||phi_r^(j2)(a, b, l)|| = M_j2`.
pub fn solve_inner_a(r: usize, j2: usize, b: f64, m_j2: f64, l: f64) -> Result<f64> {
    inner_solve(r, j2, b, m_j2, l).map(|(a, _)| a)
}

fn inner_solve(r: usize, j2: usize, b: f64, m_j2: f64, l: f64) -> Result<(f64, usize)> {
    if j2 + 2 > r {
        return Err(Error::Argument(format!("need j2 <= r - 2, got j2 = {j2}, r = {r}")));
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::Argument(format!("b = {b} must be non-negative")));
    }
    check_positive(&[("M_j2", m_j2), ("l", l)])?;

    let order = r - j2;
    let psi = |a: f64| value_at_origin(order, a, b, l).map(|v| v - m_j2);
    let unit = b.max(1.0);
    // psi(b) = 0 < M_j2, so b itself is a valid left end.
    let mut lo = b;
    let mut width = unit;
    let mut evals = 0;
    loop {
        let hi = b + width;
        evals += 1;
        if psi(hi)? > 0.0 {
            break;
        }
        lo = hi;
        width *= 2.0;
        if width > BRACKET_CAP * unit {
            return Err(Error::NoConvergence(format!(
                "inner bracket for a exceeded 2^60 * max(1, b) at b = {b}"
            )));
        }
    }
    let hi = b + width;
    let bracket = bisect(psi, lo, hi, MAX_BISECTIONS, |_, _| false)?;
    evals += bracket.iterations;
    let a = if bracket.lo > b && psi(bracket.lo)?.abs() < psi(bracket.hi)?.abs() {
        bracket.lo
    } else {
        bracket.hi
    };
    Ok((a, evals))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRequest {
    pub r: usize,
    pub j1: usize,
    pub j2: usize,
    pub targets: NormProfile,
    /// Relative tolerance of the equality boundary of the three-norm inequality.
    pub tol: f64,
}

impl SolveRequest {
    pub fn new(r: usize, j1: usize, j2: usize, m_j1: f64, m_j2: f64, m_r: f64) -> Result<Self> {
        if r < 3 {
            return Err(Error::Argument(format!("need r >= 3, got {r}")));
        }
        check_orders(r, j1, j2)?;
        if j2 + 2 > r {
            return Err(Error::Argument(format!("need j2 <= r - 2, got j2 = {j2}, r = {r}")));
        }
        check_positive(&[("M_j1", m_j1), ("M_j2", m_j2), ("M_r", m_r)])?;
        Ok(Self {
            r,
            j1,
            j2,
            targets: NormProfile::from_pairs([(j1, m_j1), (j2, m_j2), (r, m_r)]),
            tol: DEFAULT_TOL,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn target(&self, k: usize) -> Result<f64> {
        self.targets.require(k)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Iterations {
    pub outer: usize,
    pub inner: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub params: ExtremalParams,
    pub achieved: NormProfile,
    /// Relative errors `|achieved - target| / target` at `j1, j2, r`.
    pub residuals: BTreeMap<usize, f64>,
    pub iterations: Iterations,
    /// Final bracket on `b` in the caller's units; `None` on the `b = 0` boundary.
    pub b_bracket: Option<(f64, f64)>,
}

/// Solve in normalized units where `M_j2 = M_r = 1`, so only `M_j1` remains.
struct Normalized {
    r: usize,
    j1: usize,
    j2: usize,
    target: f64,
}

impl Normalized {
    fn eta(&self, b: f64, iters: &mut Iterations) -> Result<f64> {
        let (a, inner) = inner_solve(self.r, self.j2, b, 1.0, 1.0)?;
        iters.inner += inner;
        value_at_origin(self.r - self.j1, a, b, 1.0)
    }

    fn solve(&self, iters: &mut Iterations) -> Result<(f64, Bracket)> {
        let mut lo = 0.0;
        let mut hi = 1.0;
        loop {
            iters.outer += 1;
            if self.eta(hi, iters)? > self.target {
                break;
            }
            lo = hi;
            hi *= 2.0;
            if hi > BRACKET_CAP {
                return Err(Error::NoConvergence(
                    "outer bracket for b exceeded 2^60 without crossing the target".into(),
                ));
            }
        }
        let mut inner_evals = Iterations::default();
        let bracket = bisect(
            |b| self.eta(b, &mut inner_evals).map(|v| v - self.target),
            lo,
            hi,
            MAX_BISECTIONS,
            |lo, hi| hi - lo <= OUTER_REL_WIDTH * hi.max(1.0),
        )?;
        iters.outer += bracket.iterations;
        iters.inner += inner_evals.inner;
        Ok((bracket.midpoint(), bracket))
    }
}

/// Find `(a, b, l)` matching the request's three targets.
pub fn solve_outer_b(request: &SolveRequest) -> Result<SolveResult> {
    let SolveRequest { r, j1, j2, tol, .. } = *request;
    if j2 + 2 > r || j1 >= j2 {
        return Err(Error::Argument(format!(
            "need 0 <= j1 < j2 <= r - 2, got j1 = {j1}, j2 = {j2}, r = {r}"
        )));
    }
    let (m_j1, m_j2, m_r) = (request.target(j1)?, request.target(j2)?, request.target(r)?);
    let slack = check_olov(r, j1, j2, m_j1, m_j2, m_r)?;
    if slack < -tol * m_j1 {
        return Err(Error::InfeasibleTriple { slack });
    }

    // Time and amplitude rescaling: the normalized problem has M_j2 = M_r = 1.
    let mu = m_r;
    let lambda = (m_j2 / m_r).powf(1.0 / (r - j2) as f64);
    let normalized = Normalized {
        r,
        j1,
        j2,
        target: m_j1 / (mu * lambda.powi((r - j1) as i32)),
    };
    let c = olov_constant(r, j1, j2);

    let mut iterations = Iterations::default();
    let (unit_params, bracket) = if (normalized.target - c).abs() <= tol * normalized.target {
        (solve_b_zero(r, j2, 1.0, 1.0)?, None)
    } else {
        let (b, bracket) = normalized.solve(&mut iterations)?;
        let (a, inner) = inner_solve(r, j2, b, 1.0, 1.0)?;
        iterations.inner += inner;
        (ExtremalParams::new(r, a, b, 1.0)?, Some(bracket))
    };

    let mut params = unit_params.scaled(lambda, mu);
    params.l = m_r;
    let achieved = norm_table(&params)?;
    let mut residuals = BTreeMap::new();
    let allowed = tol.max(DEFAULT_TOL) * (1.0 + 1e-6) + 1e-12;
    for k in [j1, j2, r] {
        let target = request.target(k)?;
        let residual = (achieved.require(k)? - target).abs() / target;
        if !(residual <= allowed) {
            return Err(Error::NoConvergence(format!(
                "residual {residual:e} at order {k} exceeds {allowed:e}"
            )));
        }
        residuals.insert(k, residual);
    }
    Ok(SolveResult {
        params,
        achieved,
        residuals,
        iterations,
        b_bracket: bracket.map(|br| (lambda * br.lo, lambda * br.hi)),
    })
}

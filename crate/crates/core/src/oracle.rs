//! Four-norm feasibility on `(r - 1)`-monotone functions and witness synthesis.
//!
//! For `0 = k1 < k2 < k3 <= r - 2` and `k4 = r`, the targets are attainable iff
//! `(M_k2, M_k3, M_r)` satisfies the three-norm inequality at orders `(k2, k3, r)`
//! and `M_0 >= ||Phi||`, where `Phi` is the extremal spline matching those three
//! norms. A witness is then `Phi + (M_0 - ||Phi||)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{build_chain, norm_table, ExtremalParams, NormProfile};
use crate::poly::PiecewisePolynomial;
use crate::solver::{check_olov, solve_outer_b, SolveRequest};

/// Relative agreement required between a witness's norms and the targets.
pub const WITNESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem4 {
    pub r: usize,
    pub k2: usize,
    pub k3: usize,
    /// Targets at orders `0, k2, k3, r`.
    pub targets: NormProfile,
}

impl Problem4 {
    pub fn new(r: usize, k2: usize, k3: usize, m0: f64, m_k2: f64, m_k3: f64, m_r: f64) -> Result<Self> {
        if !(0 < k2 && k2 < k3 && k3 + 2 <= r) {
            return Err(Error::Argument(format!(
                "orders must satisfy 0 < k2 < k3 <= r - 2 (so r >= 4), got r = {r}, k2 = {k2}, k3 = {k3}"
            )));
        }
        for (name, v) in [("M0", m0), ("Mk2", m_k2), ("Mk3", m_k3), ("Mr", m_r)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!("{name} = {v} must be positive and finite")));
            }
        }
        Ok(Self {
            r,
            k2,
            k3,
            targets: NormProfile::from_pairs([(0, m0), (k2, m_k2), (k3, m_k3), (r, m_r)]),
        })
    }

    pub fn orders(&self) -> [usize; 4] {
        [0, self.k2, self.k3, self.r]
    }

    pub fn target(&self, k: usize) -> f64 {
        self.targets.get(k).expect("problem targets cover all four orders")
    }

    /// The same problem with every target `M_k` replaced by `mu lambda^(r-k) M_k`.
    pub fn scaled(&self, lambda: f64, mu: f64) -> Self {
        Self {
            targets: self.targets.scaled(self.r, lambda, mu),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    /// `(M_k2, M_k3, M_r)` breaks the three-norm inequality.
    Inner,
    /// `M_0 < ||Phi||`.
    Outer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub slack_inner: f64,
    pub phi_norm: Option<f64>,
    pub slack_outer: Option<f64>,
    pub params: Option<ExtremalParams>,
    pub violated: Option<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// The extremal spline `Phi`.
    pub spline: PiecewisePolynomial,
    pub params: ExtremalParams,
    /// Additive constant `M_0 - ||Phi||`.
    pub shift: f64,
    /// Norms of `spline + shift` at all orders `0..=r`.
    pub achieved: NormProfile,
}

impl Witness {
    /// `x(t) = Phi(t) + shift` as a single piecewise polynomial.
    pub fn function(&self) -> PiecewisePolynomial {
        self.spline.add_constant(self.shift)
    }
}

/// The extremal spline matching `(M_k2, M_k3, M_r)` at orders `(k2, k3, r)`.
pub fn build_phi(
    r: usize,
    k2: usize,
    k3: usize,
    m_k2: f64,
    m_k3: f64,
    m_r: f64,
    tol: f64,
) -> Result<(ExtremalParams, PiecewisePolynomial)> {
    let request = SolveRequest::new(r, k2, k3, m_k2, m_k3, m_r)?.with_tol(tol);
    let solved = solve_outer_b(&request)?;
    let spline = build_chain(&solved.params)?.pop().expect("r >= 1");
    Ok((solved.params, spline))
}

/// Feasibility decision. Infeasibility is a value; only numerical failures are errors.
pub fn decide(problem: &Problem4, tol: f64) -> Result<FeasibilityReport> {
    let (r, k2, k3) = (problem.r, problem.k2, problem.k3);
    let (m_k2, m_k3, m_r) = (problem.target(k2), problem.target(k3), problem.target(r));
    let slack_inner = check_olov(r, k2, k3, m_k2, m_k3, m_r)?;
    if slack_inner < -tol * m_k2 {
        return Ok(FeasibilityReport {
            feasible: false,
            slack_inner,
            phi_norm: None,
            slack_outer: None,
            params: None,
            violated: Some(Violation::Inner),
        });
    }
    let (params, _) = match build_phi(r, k2, k3, m_k2, m_k3, m_r, tol) {
        Ok(found) => found,
        Err(Error::InfeasibleTriple { slack }) => {
            return Err(Error::Internal(format!(
                "solver rejected a triple with admissible slack {slack_inner:e} (its slack {slack:e})"
            )))
        }
        Err(e) => return Err(e),
    };
    let phi_norm = norm_table(&params)?.require(0)?;
    let slack_outer = problem.target(0) - phi_norm;
    let feasible = slack_outer >= -tol * phi_norm;
    Ok(FeasibilityReport {
        feasible,
        slack_inner,
        phi_norm: Some(phi_norm),
        slack_outer: Some(slack_outer),
        params: Some(params),
        violated: (!feasible).then_some(Violation::Outer),
    })
}

/// Build `x = Phi + (M_0 - ||Phi||)` for a feasible problem.
pub fn synthesize(problem: &Problem4, tol: f64) -> Result<Witness> {
    let report = decide(problem, tol)?;
    if !report.feasible {
        return Err(Error::InfeasibleProblem {
            slack_inner: report.slack_inner,
            slack_outer: report.slack_outer,
        });
    }
    let params = report.params.expect("feasible reports carry parameters");
    let phi_norm = report.phi_norm.expect("feasible reports carry the norm");
    let spline = build_chain(&params)?.pop().expect("r >= 1");
    let shift = (problem.target(0) - phi_norm).max(0.0);
    let mut achieved = norm_table(&params)?;
    achieved.insert(0, phi_norm + shift);

    let allowed = WITNESS_TOL.max(tol * (1.0 + 1e-6));
    for k in problem.orders() {
        let target = problem.target(k);
        let got = achieved.require(k)?;
        if (got - target).abs() > allowed * target {
            return Err(Error::Internal(format!(
                "witness norm {got} at order {k} misses target {target}"
            )));
        }
    }
    Ok(Witness {
        spline,
        params,
        shift,
        achieved,
    })
}

/// Three-norm inequality slack on an arbitrary measured profile at `(k1, k2, r)`.
pub fn check_lemma3(r: usize, k1: usize, k2: usize, profile: &NormProfile) -> Result<f64> {
    check_olov(r, k1, k2, profile.require(k1)?, profile.require(k2)?, profile.require(r)?)
}

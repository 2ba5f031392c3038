//! Piecewise polynomials on the half-line `(-inf, 0]`.
//!
//! A function is a constant left tail on `(-inf, t_0]` followed by one polynomial
//! per interval `[t_i, t_{i+1})`, the last interval ending at `0`. Each polynomial
//! is stored in coordinates local to its left endpoint, `sum c_j (t - t_i)^j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{horner, real_roots_in};

/// Relative distance below which two knots are treated as one.
pub const KNOT_MERGE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseRepr", into = "PiecewiseRepr")]
pub struct PiecewisePolynomial {
    breakpoints: Vec<f64>,
    segments: Vec<Vec<f64>>,
    left_tail: f64,
}

/// Wire format: `{"breakpoints": [...], "segments": [[c0, c1, ...], ...], "left_tail": v}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PiecewiseRepr {
    breakpoints: Vec<f64>,
    segments: Vec<Vec<f64>>,
    left_tail: f64,
}

impl TryFrom<PiecewiseRepr> for PiecewisePolynomial {
    type Error = Error;

    fn try_from(repr: PiecewiseRepr) -> Result<Self> {
        PiecewisePolynomial::new(repr.breakpoints, repr.segments, repr.left_tail)
    }
}

impl From<PiecewisePolynomial> for PiecewiseRepr {
    fn from(p: PiecewisePolynomial) -> Self {
        PiecewiseRepr {
            breakpoints: p.breakpoints,
            segments: p.segments,
            left_tail: p.left_tail,
        }
    }
}

fn trim(mut coeffs: Vec<f64>) -> Vec<f64> {
    while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        coeffs.push(0.0);
    }
    coeffs
}

/// Coefficients of `x -> p(x + h)`.
fn taylor_shift(coeffs: &[f64], h: f64) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    if h == 0.0 {
        return c;
    }
    let n = c.len();
    for i in 0..n.saturating_sub(1) {
        for j in (i..n - 1).rev() {
            c[j] += h * c[j + 1];
        }
    }
    c
}

fn add_coeffs(lhs: &[f64], rhs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; lhs.len().max(rhs.len())];
    for (j, c) in lhs.iter().enumerate() {
        out[j] += c;
    }
    for (j, c) in rhs.iter().enumerate() {
        out[j] += c;
    }
    trim(out)
}

impl PiecewisePolynomial {
    /// Build from left endpoints, local coefficients and the left tail value.
    ///
    /// `segments.len()` must equal `breakpoints.len()` (every breakpoint is the
    /// start of a segment and all lie strictly below 0). A trailing breakpoint at
    /// exactly 0 with one segment fewer is accepted and dropped.
    pub fn new(mut breakpoints: Vec<f64>, segments: Vec<Vec<f64>>, left_tail: f64) -> Result<Self> {
        if breakpoints.last() == Some(&0.0) && segments.len() + 1 == breakpoints.len() {
            breakpoints.pop();
        }
        if breakpoints.len() != segments.len() {
            return Err(Error::Argument(format!(
                "{} breakpoints but {} segments",
                breakpoints.len(),
                segments.len()
            )));
        }
        if !left_tail.is_finite() {
            return Err(Error::Argument("left tail must be finite".into()));
        }
        for (i, &t) in breakpoints.iter().enumerate() {
            if !t.is_finite() || t >= 0.0 {
                return Err(Error::Argument(format!("breakpoint {t} must be finite and below 0")));
            }
            if i > 0 && breakpoints[i - 1] >= t {
                return Err(Error::Argument("breakpoints must be strictly increasing".into()));
            }
        }
        let mut trimmed = Vec::with_capacity(segments.len());
        for seg in segments {
            if seg.iter().any(|c| !c.is_finite()) {
                return Err(Error::Argument("segment coefficients must be finite".into()));
            }
            trimmed.push(trim(seg));
        }
        Ok(Self {
            breakpoints,
            segments: trimmed,
            left_tail,
        })
    }

    /// Build from `(left endpoint, coefficients)` pieces, dropping any piece
    /// narrower than `KNOT_MERGE_TOL * max(1, scale)` so that nearly coincident
    /// knots (including knots at the origin) collapse into one.
    pub fn from_pieces(pieces: Vec<(f64, Vec<f64>)>, left_tail: f64, scale: f64) -> Result<Self> {
        let tol = KNOT_MERGE_TOL * scale.abs().max(1.0);
        let mut kept: Vec<(f64, Vec<f64>)> = Vec::with_capacity(pieces.len());
        for (i, (start, coeffs)) in pieces.iter().enumerate() {
            let end = pieces.get(i + 1).map_or(0.0, |p| p.0);
            if end - start <= tol || *start >= -tol {
                continue;
            }
            kept.push((*start, coeffs.clone()));
        }
        let (breakpoints, segments) = kept.into_iter().unzip();
        Self::new(breakpoints, segments, left_tail)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(value: f64) -> Self {
        Self {
            breakpoints: Vec::new(),
            segments: Vec::new(),
            left_tail: value,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[Vec<f64>] {
        &self.segments
    }

    pub fn left_tail(&self) -> f64 {
        self.left_tail
    }

    /// `[start, end]` of segment `i`.
    pub fn segment_interval(&self, i: usize) -> (f64, f64) {
        let end = self.breakpoints.get(i + 1).copied().unwrap_or(0.0);
        (self.breakpoints[i], end)
    }

    pub fn degree(&self) -> usize {
        self.segments.iter().map(|s| s.len() - 1).max().unwrap_or(0)
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if t > 0.0 || t.is_nan() {
            return Err(Error::Domain(t));
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> f64 {
        match self.breakpoints.first() {
            Some(&t0) if t > t0 => {
                let i = self.breakpoints.partition_point(|&x| x <= t) - 1;
                horner(&self.segments[i], t - self.breakpoints[i])
            }
            _ => self.left_tail,
        }
    }

    /// Segment-wise derivative. The result may jump at breakpoints.
    pub fn derivative(&self) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|c| {
                trim(
                    c.iter()
                        .enumerate()
                        .skip(1)
                        .map(|(j, cj)| j as f64 * cj)
                        .collect(),
                )
            })
            .collect();
        Self {
            breakpoints: self.breakpoints.clone(),
            segments,
            left_tail: 0.0,
        }
    }

    pub fn nth_derivative(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |p, _| p.derivative())
    }

    /// The antiderivative vanishing on `(-inf, t_0]`. Requires a zero left tail.
    pub fn antiderivative(&self) -> Result<Self> {
        if self.left_tail != 0.0 {
            return Err(Error::Precondition(format!(
                "antiderivative from -inf needs a zero left tail, got {}",
                self.left_tail
            )));
        }
        let mut acc = 0.0;
        let mut segments = Vec::with_capacity(self.segments.len());
        for (i, c) in self.segments.iter().enumerate() {
            let mut integ = Vec::with_capacity(c.len() + 1);
            integ.push(acc);
            integ.extend(c.iter().enumerate().map(|(j, cj)| cj / (j + 1) as f64));
            let (start, end) = self.segment_interval(i);
            acc = horner(&integ, end - start);
            segments.push(trim(integ));
        }
        Ok(Self {
            breakpoints: self.breakpoints.clone(),
            segments,
            left_tail: 0.0,
        })
    }

    /// `sup |p(t)|` over `t <= 0`, from segment endpoints and interior critical points.
    pub fn sup_norm_halfline(&self) -> f64 {
        let mut best = self.left_tail.abs();
        for (i, c) in self.segments.iter().enumerate() {
            let (start, end) = self.segment_interval(i);
            let width = end - start;
            best = best.max(horner(c, 0.0).abs()).max(horner(c, width).abs());
            if c.len() > 2 {
                let deriv: Vec<f64> = c
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(j, cj)| j as f64 * cj)
                    .collect();
                for x in real_roots_in(&deriv, width) {
                    best = best.max(horner(c, x).abs());
                }
            }
        }
        best
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            segments: self
                .segments
                .iter()
                .map(|c| trim(c.iter().map(|x| x * factor).collect()))
                .collect(),
            left_tail: self.left_tail * factor,
        }
    }

    pub fn add_constant(&self, value: f64) -> Self {
        let mut out = self.clone();
        out.left_tail += value;
        for c in &mut out.segments {
            c[0] += value;
        }
        out
    }

    /// Local coefficients of the piece active at `s`, re-expanded about `s`.
    fn piece_at(&self, s: f64) -> Vec<f64> {
        match self.breakpoints.first() {
            Some(&t0) if s >= t0 => {
                let i = self.breakpoints.partition_point(|&x| x <= s) - 1;
                taylor_shift(&self.segments[i], s - self.breakpoints[i])
            }
            _ => vec![self.left_tail],
        }
    }

    /// Pointwise sum over the union of both knot sets.
    pub fn add(&self, other: &Self) -> Self {
        let mut knots: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .copied()
            .collect();
        knots.sort_by(|a, b| a.partial_cmp(b).expect("breakpoints are finite"));
        knots.dedup();
        let segments = knots
            .iter()
            .map(|&s| add_coeffs(&self.piece_at(s), &other.piece_at(s)))
            .collect();
        Self {
            breakpoints: knots,
            segments,
            left_tail: self.left_tail + other.left_tail,
        }
    }
}

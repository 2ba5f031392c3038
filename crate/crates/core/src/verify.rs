//! Independent checks: a quadrature oracle for derivative norms and random
//! members of the class of `(r - 1)`-monotone functions.
//!
//! [`quad_norm`] only reads the segment coefficients and evaluates them with its
//! own Horner loop. The `(r - 1)`-th derivative is sampled by divided differences,
//! lower orders are rebuilt by Gauss-Legendre quadrature of the repeated
//! integral, and sups are taken on a dense grid.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{build_phi_r, ExtremalParams, NormProfile};
use crate::oracle::check_lemma3;
use crate::poly::PiecewisePolynomial;
use crate::{factorial, DEFAULT_TOL};

/// Sup-search grid points per segment.
pub const QUAD_GRID_PER_SEGMENT: usize = 10_000;
/// Gauss-Legendre points per integration panel (exact through degree 15).
pub const GL_POINTS: usize = 8;
/// Grid points for class-membership and monotonicity checks.
pub const MEMBERSHIP_GRID: usize = 1_000;
/// Relative slack allowed in membership checks.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn horner(c: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &cj in c.iter().rev() {
        acc = acc * x + cj;
    }
    acc
}

/// Newton divided difference `f[x_0, ..., x_m]`.
fn divided_difference(xs: &[f64], mut fs: Vec<f64>) -> f64 {
    let n = xs.len();
    for level in 1..n {
        for i in (level..n).rev() {
            fs[i] = (fs[i] - fs[i - 1]) / (xs[i] - xs[i - level]);
        }
    }
    fs[n - 1]
}

/// `p^(r-1)` on one segment as `value_at_mid + slope (t - mid)`.
#[derive(Debug, Clone, Copy)]
struct TopDerivative {
    start: f64,
    end: f64,
    mid: f64,
    value_at_mid: f64,
    slope: f64,
}

impl TopDerivative {
    fn at(&self, t: f64) -> f64 {
        self.value_at_mid + self.slope * (t - self.mid)
    }
}

/// For a polynomial of degree `<= m + 1`, the divided difference over `m + 1`
/// nodes equals `p^(m)(mean of nodes) / m!`, so two node sets pin down the
/// linear `p^(m)`.
fn sample_top_derivative(p: &PiecewisePolynomial, r: usize) -> Vec<TopDerivative> {
    let order = r - 1;
    let span = p.breakpoints().first().map_or(1.0, |t0| t0.abs()).max(1.0);
    (0..p.segments().len())
        .map(|i| {
            let (start, end) = p.segment_interval(i);
            let coeffs = &p.segments()[i];
            let mid = 0.5 * (start + end);
            let spread = span.max(end - start);
            let sample = |centre: f64| -> f64 {
                if order == 0 {
                    return horner(coeffs, centre - start);
                }
                let xs: Vec<f64> = (0..=order)
                    .map(|j| centre + spread * (j as f64 / order as f64 - 0.5))
                    .collect();
                let mean = xs.iter().sum::<f64>() / xs.len() as f64;
                debug_assert!((mean - centre).abs() <= 1e-12 * spread);
                let fs = xs.iter().map(|&x| horner(coeffs, x - start)).collect();
                factorial(order) * divided_difference(&xs, fs)
            };
            let offset = 0.25 * spread;
            let (g_lo, g_hi) = (sample(mid - offset), sample(mid + offset));
            TopDerivative {
                start,
                end,
                mid,
                value_at_mid: 0.5 * (g_lo + g_hi),
                slope: (g_hi - g_lo) / (2.0 * offset),
            }
        })
        .collect()
}

/// `int_{t_0}^t (t - s)^(m-1) / (m-1)! g(s) ds` with composite Gauss-Legendre.
fn repeated_integral(top: &[TopDerivative], m: usize, t: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let norm = factorial(m - 1);
    let mut total = 0.0;
    for seg in top {
        if seg.start >= t {
            break;
        }
        let (lo, hi) = (seg.start, seg.end.min(t));
        let half = 0.5 * (hi - lo);
        let centre = 0.5 * (hi + lo);
        let mut acc = 0.0;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            let s = centre + half * x;
            acc += w * (t - s).powi(m as i32 - 1) * seg.at(s);
        }
        total += half * acc;
    }
    total / norm
}

/// Recompute `||p^(k)||` for `p` with degree `<= r` on every segment, without
/// the analytic derivative or sup machinery of [`PiecewisePolynomial`].
pub fn quad_norm(p: &PiecewisePolynomial, k: usize, r: usize) -> Result<f64> {
    if r == 0 || k > r {
        return Err(Error::Argument(format!("need 0 <= k <= r and r >= 1, got k = {k}, r = {r}")));
    }
    if p.degree() > r {
        return Err(Error::Argument(format!(
            "degree {} exceeds r = {r}; quadrature oracle needs an r-fold structure",
            p.degree()
        )));
    }
    let top = sample_top_derivative(p, r);
    if k == r {
        return Ok(top.iter().map(|s| s.slope.abs()).fold(0.0, f64::max));
    }
    let tail_value = if k == 0 { p.left_tail() } else { 0.0 };
    let mut best = tail_value.abs();
    let m = r - 1 - k;
    let rule = gauss_legendre(GL_POINTS);
    for seg in &top {
        for i in 0..=QUAD_GRID_PER_SEGMENT {
            let t = seg.start + (seg.end - seg.start) * i as f64 / QUAD_GRID_PER_SEGMENT as f64;
            let value = if m == 0 {
                seg.at(t)
            } else {
                tail_value + repeated_integral(&top, m, t, &rule)
            };
            best = best.max(value.abs());
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AtomKind {
    /// `phi_r(a, b, l; t)`.
    Extremal { params: ExtremalParams },
    /// `c (t + alpha)_+^r / r!`.
    TruncatedPower { alpha: f64, c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub coeff: f64,
    pub kind: AtomKind,
}

impl Atom {
    fn realize(&self, r: usize) -> Result<PiecewisePolynomial> {
        let base = match self.kind {
            AtomKind::Extremal { params } => {
                if params.r != r {
                    return Err(Error::Argument(format!("atom order {} differs from r = {r}", params.r)));
                }
                build_phi_r(&params)?
            }
            AtomKind::TruncatedPower { alpha, c } => {
                if !(alpha > 0.0 && c >= 0.0) {
                    return Err(Error::Argument(format!(
                        "truncated power needs alpha > 0 and c >= 0, got alpha = {alpha}, c = {c}"
                    )));
                }
                let mut coeffs = vec![0.0; r + 1];
                coeffs[r] = c / factorial(r);
                PiecewisePolynomial::new(vec![-alpha], vec![coeffs], 0.0)?
            }
        };
        Ok(base.scale(self.coeff))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMember {
    pub r: usize,
    pub atoms: Vec<Atom>,
    pub offset: f64,
    pub realized: PiecewisePolynomial,
}

impl ClassMember {
    /// Sum the atoms, add the offset and check membership on a grid.
    pub fn from_atoms(r: usize, atoms: Vec<Atom>, offset: f64) -> Result<Self> {
        if r < 1 {
            return Err(Error::Argument("r must be at least 1".into()));
        }
        if atoms.iter().any(|a| !(a.coeff >= 0.0)) || !(offset >= 0.0) {
            return Err(Error::Argument("atom coefficients and the offset must be non-negative".into()));
        }
        let mut realized = PiecewisePolynomial::zero();
        for atom in &atoms {
            realized = realized.add(&atom.realize(r)?);
        }
        let realized = realized.add_constant(offset);
        let member = Self {
            r,
            atoms,
            offset,
            realized,
        };
        member.check_membership()?;
        Ok(member)
    }

    fn grid(&self) -> Vec<f64> {
        grid_for(&self.realized)
    }

    /// Derivatives of orders `0..r` are non-negative on the check grid.
    pub fn check_membership(&self) -> Result<()> {
        check_membership(&self.realized, self.r)
    }
}

/// Grid check that `p` and its derivatives of orders `1..r` are non-negative,
/// up to [`MEMBERSHIP_TOL`] relative to each derivative's sup.
pub fn check_membership(p: &PiecewisePolynomial, r: usize) -> Result<()> {
    let grid = grid_for(p);
    for k in 0..r {
        let d = p.nth_derivative(k);
        let scale = d.sup_norm_halfline().max(1.0);
        for &t in &grid {
            let v = d.evaluate(t)?;
            if v < -MEMBERSHIP_TOL * scale {
                return Err(Error::Internal(format!("derivative of order {k} is {v:e} at t = {t}")));
            }
        }
    }
    Ok(())
}

fn grid_for(p: &PiecewisePolynomial) -> Vec<f64> {
    let start = p.breakpoints().first().copied().unwrap_or(0.0) - 1.0;
    let mut grid: Vec<f64> = (0..=MEMBERSHIP_GRID)
        .map(|i| start * (1.0 - i as f64 / MEMBERSHIP_GRID as f64))
        .collect();
    grid.extend_from_slice(p.breakpoints());
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// A random `(r - 1)`-monotone function, deterministic in `seed`.
pub fn random_member(r: usize, atoms: usize, seed: u64) -> Result<ClassMember> {
    if r < 2 || atoms < 1 {
        return Err(Error::Argument(format!("need r >= 2 and atoms >= 1, got r = {r}, atoms = {atoms}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(1..=atoms);
    let drawn = (0..count)
        .map(|_| {
            let kind = if rng.gen_bool(0.5) {
                let a = log_uniform(&mut rng, 0.1, 10.0);
                let b = rng.gen_range(0.0..=0.9 * a);
                let l = log_uniform(&mut rng, 0.1, 10.0);
                AtomKind::Extremal {
                    params: ExtremalParams::new(r, a, b, l)?,
                }
            } else {
                AtomKind::TruncatedPower {
                    alpha: log_uniform(&mut rng, 0.1, 10.0),
                    c: log_uniform(&mut rng, 0.1, 10.0),
                }
            };
            Ok(Atom { coeff: 1.0, kind })
        })
        .collect::<Result<Vec<_>>>()?;
    let offset = rng.gen_range(0.0..=10.0);
    ClassMember::from_atoms(r, drawn, offset)
}

/// Measured norms at all orders `0..=r`, plus whether orders `0..=r-2` were
/// non-decreasing on the check grid (which is what makes the value at 0 the sup).
pub fn measure_profile(member: &ClassMember) -> Result<(NormProfile, bool)> {
    let r = member.r;
    let p = &member.realized;
    let grid = member.grid();
    let mut profile = NormProfile::new();
    let mut monotone = true;
    for k in 0..r.saturating_sub(1) {
        let d = p.nth_derivative(k);
        let value = d.evaluate(0.0)?;
        let slack = MEMBERSHIP_TOL * value.abs().max(1.0);
        let mut prev = f64::NEG_INFINITY;
        for &t in &grid {
            let v = d.evaluate(t)?;
            monotone &= v - prev >= -slack;
            prev = v;
        }
        profile.insert(k, value);
    }
    profile.insert(r - 1, p.nth_derivative(r - 1).sup_norm_halfline());
    let top = p
        .segments()
        .iter()
        .map(|c| c.get(r).copied().unwrap_or(0.0).abs() * factorial(r))
        .fold(0.0, f64::max);
    profile.insert(r, top);
    Ok((profile, monotone))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub r: usize,
    /// Minimum relative slack `(M_k1 - rhs) / M_k1` over all pairs `k1 < k2 < r`.
    pub min_slack: Option<f64>,
    pub worst_pair: Option<(usize, usize)>,
    pub skipped: bool,
    pub monotone: bool,
}

impl TrialRecord {
    pub fn failed(&self) -> bool {
        !self.monotone || self.min_slack.is_some_and(|s| s < -DEFAULT_TOL)
    }
}

/// Check the three-norm inequality on every order pair of a member.
pub fn sweep_member(member: &ClassMember, seed: u64) -> Result<TrialRecord> {
    let r = member.r;
    let (profile, monotone) = measure_profile(member)?;
    let mut worst: Option<(f64, (usize, usize))> = None;
    for k2 in 1..r {
        for k1 in 0..k2 {
            let values = [profile.require(k1)?, profile.require(k2)?, profile.require(r)?];
            if values.iter().any(|v| *v <= 0.0) {
                continue;
            }
            let slack = check_lemma3(r, k1, k2, &profile)? / values[0];
            if worst.is_none_or(|(w, _)| slack < w) {
                worst = Some((slack, (k1, k2)));
            }
        }
    }
    Ok(TrialRecord {
        seed,
        r,
        min_slack: worst.map(|w| w.0),
        worst_pair: worst.map(|w| w.1),
        skipped: worst.is_none(),
        monotone,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepHeader {
    pub seed: u64,
    pub r_min: usize,
    pub r_max: usize,
    pub trials_per_r: usize,
    pub atoms: usize,
    pub membership_grid: usize,
    pub quad_grid_per_segment: usize,
    pub slack_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub header: SweepHeader,
    pub records: Vec<TrialRecord>,
    pub min_slack: Option<f64>,
    pub failing_seeds: Vec<u64>,
    pub skipped: usize,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failing_seeds.is_empty() && self.min_slack.is_none_or(|s| s >= -DEFAULT_TOL)
    }

    /// Header line, one line per trial, then a summary line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        let header = serde_json::json!({ "header": self.header });
        out.push_str(&header.to_string());
        out.push('\n');
        for rec in &self.records {
            out.push_str(&serde_json::to_string(rec).expect("records serialize"));
            out.push('\n');
        }
        let summary = serde_json::json!({
            "summary": {
                "trials": self.records.len(),
                "min_slack": self.min_slack,
                "failing_seeds": self.failing_seeds,
                "skipped": self.skipped,
                "passed": self.passed(),
            }
        });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }
}

/// Atoms per random member in [`property_sweep`].
pub const SWEEP_ATOMS: usize = 3;

/// Draw `trials` random members for each `r` in the range and check the
/// three-norm inequality on all of them. Trials run in parallel; the report
/// depends only on the arguments.
pub fn property_sweep(r_range: std::ops::RangeInclusive<usize>, trials: usize, seed: u64) -> Result<SweepReport> {
    if trials < 1 {
        return Err(Error::Argument("trials must be at least 1".into()));
    }
    let (r_min, r_max) = (*r_range.start(), *r_range.end());
    if r_min < 2 || r_min > r_max {
        return Err(Error::Argument(format!("invalid order range {r_min}..={r_max}")));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let jobs: Vec<(usize, u64)> = r_range
        .flat_map(|r| (0..trials).map(move |_| r))
        .map(|r| (r, master.next_u64()))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(r, s)| {
            let member = random_member(r, SWEEP_ATOMS, s)?;
            sweep_member(&member, s)
        })
        .collect::<Result<Vec<_>>>()?;
    let min_slack = records
        .iter()
        .filter_map(|r| r.min_slack)
        .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.min(s))));
    Ok(SweepReport {
        header: SweepHeader {
            seed,
            r_min,
            r_max,
            trials_per_r: trials,
            atoms: SWEEP_ATOMS,
            membership_grid: MEMBERSHIP_GRID,
            quad_grid_per_segment: QUAD_GRID_PER_SEGMENT,
            slack_tolerance: DEFAULT_TOL,
        },
        failing_seeds: records.iter().filter(|r| r.failed()).map(|r| r.seed).collect(),
        skipped: records.iter().filter(|r| r.skipped).count(),
        min_slack,
        records,
    })
}

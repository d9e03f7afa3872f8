//! Numerical and exact verification of candidate spectra.

use num_traits::Zero;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{classify, classify_collinear, Normalized, TwoSegmentInput};
use crate::error::{Error, Result};
use crate::measure::{project_to_line, LineDir, Measure, Point, SegmentPiece};
use crate::scalar::ExactScalar;
use crate::spectra::{
    choose_projection_line, cross_line_spectrum, lattice_walk, pullback_spectrum_affine, PeriodicSet1D, SpectrumSpec,
};
use crate::zeros::{cross_zero_membership, CrossConfig};

pub const BESSEL_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub lambda: Vec<f64>,
    pub lambda_prime: Vec<f64>,
    pub difference: Vec<f64>,
    pub value: f64,
    /// Decided by the exact zero-set test rather than by a float bound.
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompletenessSample {
    pub x: Vec<f64>,
    pub radius: f64,
    pub partial_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub orthogonality: f64,
    pub bessel_slack: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
    /// Distinct differences `λ − λ′` examined.
    pub differences_checked: usize,
    pub points: usize,
    pub bessel_max: f64,
    pub completeness_samples: Vec<CompletenessSample>,
    pub verdict: Verdict,
    pub tolerances: Tolerances,
    /// Total mass divided out before testing.
    pub normalization: f64,
    /// Completeness was evaluated without a passing orthogonality check.
    pub diagnostic: bool,
}

/// Neumaier compensated sum; deterministic for a fixed input order.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.c
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Search for `λ′ ∈ offsets[j] + L` with `λ′` and `λ′ + d` both in the ball.
fn witness_pair(s: &SpectrumSpec, j: usize, d: &[f64], radius: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let half: Vec<f64> = d.iter().map(|x| -x / 2.0).collect();
    let lens = (radius * radius - norm(d).powi(2) / 4.0).max(0.0).sqrt();
    let gens = s.lattice_f64();
    let base = s.offsets[j].to_f64();
    let r_tol = radius * (1.0 + 1e-12) + 1e-12;
    lattice_walk(&gens, &base, &half, lens).ok()?.into_iter().find_map(|n| {
        let lp = s.point_f64(j, &n);
        let l: Vec<f64> = lp.iter().zip(d).map(|(a, b)| a + b).collect();
        (norm(&lp) <= r_tol && norm(&l) <= r_tol).then_some((l, lp))
    })
}

/// Checks `μ̂(λ − λ′) = 0` for all distinct `λ, λ′ ∈ Λ ∩ B(0, radius)`.
///
/// Distinct differences are enumerated once each as `oᵢ − oⱼ + L` inside
/// `B(0, 2·radius)`; a witness pair is searched only for violations, and
/// differences no pair realizes are dropped.
pub fn check_orthogonality(m: &Measure, s: &SpectrumSpec, radius: f64, tol: f64) -> Result<VerificationReport> {
    if m.dimension != s.dimension {
        return Err(Error::DimensionMismatch {
            expected: m.dimension,
            found: s.dimension,
        });
    }
    let (norm_m, total) = m.normalized();
    let exact = CrossConfig::recognize(&norm_m);
    let nm = norm_m.numeric();
    let zero = vec![0.0; s.dimension];
    let points = s.coefficients_in_ball(&zero, radius)?.len();
    let gens = s.lattice_f64();

    let mut tasks = Vec::new();
    for i in 0..s.offsets.len() {
        for j in 0..s.offsets.len() {
            let base: Vec<f64> = s.offsets[i]
                .to_f64()
                .iter()
                .zip(s.offsets[j].to_f64())
                .map(|(a, b)| a - b)
                .collect();
            for n in lattice_walk(&gens, &base, &zero, 2.0 * radius)? {
                if i == j && n.iter().all(|&k| k == 0) {
                    continue;
                }
                tasks.push((i, j, n));
            }
        }
    }

    let results: Vec<Option<Violation>> = tasks
        .par_iter()
        .map(|(i, j, n)| -> Result<Option<Violation>> {
            let d_exact = &(&s.offsets[*i] - &s.offsets[*j]) + &(&s.point_exact(0, n) - &s.offsets[0]);
            let d = d_exact.to_f64();
            let (bad, value, is_exact) = match &exact {
                Some(c) => {
                    let mem = cross_zero_membership(c, &d_exact, tol)?;
                    (!mem.member, mem.value, true)
                }
                None => {
                    let v = nm.eval(&d).norm();
                    (v > tol, v, false)
                }
            };
            if !bad {
                return Ok(None);
            }
            Ok(witness_pair(s, *j, &d, radius).map(|(l, lp)| Violation {
                lambda: l,
                lambda_prime: lp,
                difference: d,
                value,
                exact: is_exact,
            }))
        })
        .collect::<Result<_>>()?;

    let violations: Vec<Violation> = results.into_iter().flatten().collect();
    let verdict = if violations.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(VerificationReport {
        violations,
        differences_checked: tasks.len(),
        points,
        bessel_max: 0.0,
        completeness_samples: vec![],
        verdict,
        tolerances: Tolerances {
            orthogonality: tol,
            bessel_slack: BESSEL_SLACK,
            radius,
        },
        normalization: total.to_f64(),
        diagnostic: false,
    })
}

/// Regular grid of `g^dim` points `((i+½)/g, …)` in the unit cube.
pub fn unit_grid(dim: usize, g: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..g).map(move |i| {
                    let mut q = p.clone();
                    q.push((i as f64 + 0.5) / g as f64);
                    q
                })
            })
            .collect();
    }
    out
}

/// Partial sums `S(x, R) = Σ_{|λ| ≤ R} |μ̂(x − λ)|²` for the probability
/// normalization of `m`.
pub fn partial_sums(m: &Measure, s: &SpectrumSpec, x: &[f64], radii: &[f64]) -> Result<Vec<f64>> {
    let nm = m.normalized().0.numeric();
    let rmax = radii.iter().cloned().fold(0.0, f64::max);
    let zero = vec![0.0; s.dimension];
    let mut terms: Vec<(f64, f64)> = s
        .coefficients_in_ball(&zero, rmax)?
        .into_iter()
        .map(|(i, n)| {
            let lam = s.point_f64(i, &n);
            let diff: Vec<f64> = x.iter().zip(&lam).map(|(a, b)| a - b).collect();
            (norm(&lam), nm.abs_sq(&diff))
        })
        .collect();
    terms.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut sorted: Vec<(usize, f64)> = radii.iter().cloned().enumerate().collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut out = vec![0.0; radii.len()];
    let mut acc = Neumaier::default();
    let mut k = 0;
    for (idx, r) in sorted {
        let r_tol = r * (1.0 + 1e-12) + 1e-12;
        while k < terms.len() && terms[k].0 <= r_tol {
            acc.add(terms[k].1);
            k += 1;
        }
        out[idx] = acc.value();
    }
    Ok(out)
}

/// Truncated completeness sums on a grid of `x` values.
///
/// Verdict: `fail` if any partial sum exceeds `1 + 10⁻⁹`; `pass` if at every
/// `x` the deficit at the largest radius is within the `C₀/R` envelope
/// fitted on the smaller radii (which must span a factor ≥ 2);
/// otherwise `inconclusive`.
pub fn completeness_curve(m: &Measure, s: &SpectrumSpec, xs: &[Vec<f64>], radii: &[f64]) -> Result<VerificationReport> {
    if radii.is_empty() || radii.iter().any(|r| *r <= 0.0) {
        return Err(Error::InvalidConfig("radii must be positive and nonempty".into()));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let sums: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|x| partial_sums(m, s, x, &radii))
        .collect::<Result<_>>()?;

    let mut samples = Vec::new();
    let mut bessel_max: f64 = 0.0;
    let mut certified = radii.len() >= 2 && radii[radii.len() - 1] >= 2.0 * radii[0];
    for (x, row) in xs.iter().zip(&sums) {
        for (r, v) in radii.iter().zip(row) {
            bessel_max = bessel_max.max(*v);
            samples.push(CompletenessSample {
                x: x.clone(),
                radius: *r,
                partial_sum: *v,
            });
        }
        let rmax = radii[radii.len() - 1];
        let c0 = radii[..radii.len() - 1]
            .iter()
            .zip(row)
            .map(|(r, v)| (1.0 - v).max(0.0) * r)
            .fold(0.0, f64::max);
        let last_deficit = 1.0 - row[row.len() - 1];
        if last_deficit > 1.5 * c0 / rmax + BESSEL_SLACK {
            certified = false;
        }
    }
    let verdict = if bessel_max > 1.0 + BESSEL_SLACK {
        Verdict::Fail
    } else if certified {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    Ok(VerificationReport {
        violations: vec![],
        differences_checked: 0,
        points: s
            .coefficients_in_ball(&vec![0.0; s.dimension], radii[radii.len() - 1])?
            .len(),
        bessel_max,
        completeness_samples: samples,
        verdict,
        tolerances: Tolerances {
            orthogonality: 0.0,
            bessel_slack: BESSEL_SLACK,
            radius: radii[radii.len() - 1],
        },
        normalization: m.total_mass().to_f64(),
        diagnostic: false,
    })
}

/// Orthogonality at `radius` followed by completeness on `xs`; the
/// completeness part is marked diagnostic when orthogonality fails.
pub fn verify_spectrum(
    m: &Measure,
    s: &SpectrumSpec,
    radius: f64,
    tol: f64,
    xs: &[Vec<f64>],
    radii: &[f64],
) -> Result<VerificationReport> {
    let orth = check_orthogonality(m, s, radius, tol)?;
    if xs.is_empty() || radii.is_empty() {
        return Ok(orth);
    }
    let comp = completeness_curve(m, s, xs, radii)?;
    let verdict = match (orth.verdict, comp.verdict) {
        (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
        (Verdict::Pass, Verdict::Pass) => Verdict::Pass,
        _ => Verdict::Inconclusive,
    };
    Ok(VerificationReport {
        verdict,
        bessel_max: comp.bessel_max,
        completeness_samples: comp.completeness_samples,
        diagnostic: orth.verdict != Verdict::Pass,
        ..orth
    })
}

// ---------------------------------------------------------------------------
// One-dimensional tiling identity

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TilingSample {
    pub s: f64,
    pub partial_sum: f64,
    pub tail_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TilingReport {
    pub verdict: Verdict,
    pub samples: Vec<TilingSample>,
    pub max_deviation: f64,
    /// Periods summed on each side at the last refinement.
    pub periods: u64,
}

pub const TILING_TOL: f64 = 1e-6;

/// `|1̂_{[0,T]}(x)|² = sin²(πTx)/(πx)²`.
pub fn interval_ft_sq(t: f64, x: f64) -> f64 {
    if x.abs() < 1e-12 {
        return t * t;
    }
    let s = crate::measure::sin_pi(t * x);
    (s * s) / (PI * x).powi(2)
}

const MAX_PERIODS: u64 = 1 << 24;

/// One sample point: returns the final (partial, tail, verdict).
fn tiling_at(s: f64, offs: &[f64], p: f64, t: f64, target: f64) -> (f64, f64, Verdict) {
    let m = offs.len() as f64;
    // Terms with |n| ≤ K; the rest are at distance ≥ (|n|−1)p from s.
    let tail = |k: u64| 2.0 * m / (PI * PI * p * p) * (1.0 / k as f64 + 1.0 / (k * k) as f64);
    let mut acc = Neumaier::default();
    for o in offs {
        acc.add(interval_ft_sq(t, s - o));
    }
    let mut done = 0u64;
    let mut k = 16u64;
    loop {
        for n in done + 1..=k {
            for o in offs {
                acc.add(interval_ft_sq(t, s - o - n as f64 * p));
                acc.add(interval_ft_sq(t, s - o + n as f64 * p));
            }
        }
        done = k;
        let (sum, tb) = (acc.value(), tail(k));
        if sum > target + TILING_TOL || sum + tb < target - TILING_TOL {
            return (sum, tb, Verdict::Fail);
        }
        if tb <= TILING_TOL && (sum - target).abs() <= TILING_TOL {
            return (sum, tb, Verdict::Pass);
        }
        if k >= MAX_PERIODS {
            return (sum, tb, Verdict::Inconclusive);
        }
        k *= 2;
    }
}

/// Checks `Σ_{λ∈Λ} |1̂_{[0,T]}|²(s − λ) = target` at `grid` points of one
/// period, with a certified truncation: terms are added until the analytic
/// tail bound (from `|1̂(x)| ≤ 1/(π|x|)`) is below 10⁻⁶.
pub fn check_tiling_1d(s: &PeriodicSet1D, t: &ExactScalar, target: &ExactScalar, grid: usize) -> Result<TilingReport> {
    if !t.is_positive() {
        return Err(Error::InvalidConfig("T must be positive".into()));
    }
    if grid == 0 {
        return Err(Error::InvalidConfig("grid must be positive".into()));
    }
    let p = s.period.to_f64();
    let offs: Vec<f64> = s.offsets.iter().map(ExactScalar::to_f64).collect();
    let (tf, target_f) = (t.to_f64(), target.to_f64());
    let pts: Vec<f64> = (0..grid).map(|i| (i as f64 + 0.5) / grid as f64 * p).collect();
    let rows: Vec<(f64, f64, Verdict)> = pts.par_iter().map(|x| tiling_at(*x, &offs, p, tf, target_f)).collect();
    let verdict = if rows.iter().any(|r| r.2 == Verdict::Fail) {
        Verdict::Fail
    } else if rows.iter().all(|r| r.2 == Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    let max_deviation = rows.iter().map(|r| (r.0 - target_f).abs()).fold(0.0, f64::max);
    let tail = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let m = offs.len() as f64;
    // Invert the tail bound for the period count actually reached.
    let periods = (2.0 * m / (PI * PI * p * p * tail)).round() as u64;
    Ok(TilingReport {
        verdict,
        samples: pts
            .iter()
            .zip(&rows)
            .map(|(x, r)| TilingSample {
                s: *x,
                partial_sum: r.0,
                tail_bound: r.1,
            })
            .collect(),
        max_deviation,
        periods,
    })
}

/// Period `A = mT/(2w)` of a spectrum with tiling value `2w`.
pub fn canonical_period(offsets: &[ExactScalar], t: &ExactScalar, w: &ExactScalar) -> Result<PeriodicSet1D> {
    if offsets.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    if !t.is_positive() || !w.is_positive() {
        return Err(Error::InvalidConfig("T and w must be positive".into()));
    }
    let m = ExactScalar::int(offsets.len() as i64);
    let period = (&m * t).checked_div(&(&ExactScalar::int(2) * w))?;
    PeriodicSet1D::new(offsets.to_vec(), period)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TilerForm {
    /// `{0, α} + Z`.
    ZeroAlpha,
    /// `Z/2`.
    HalfIntegers,
    Reject,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TilerClassification {
    pub form: TilerForm,
    pub alpha: Option<ExactScalar>,
    /// `|p_k|` for the tested exponents `k = 1, …`.
    pub power_sums: Vec<f64>,
    /// Coefficient reconstruction via Newton's identities agrees with direct
    /// expansion, and (when the power sums vanish) the polynomial has the
    /// form `x^{2m} + (−1)^m e_m x^m + e_{2m}` with the `u_j^m` as roots.
    pub newton_consistent: bool,
}

pub const POWER_SUM_TOL: f64 = 1e-10;

/// Elementary symmetric polynomials `e_0..e_n` of `u` by expanding `Π(x − u_j)`.
fn elementary_direct(u: &[Complex64]) -> Vec<Complex64> {
    // coeffs[k] = coefficient of x^{n−k} in Π(x − u_j) = (−1)^k e_k
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &r in u {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= c * r;
        }
        coeffs = next;
    }
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| if k % 2 == 0 { *c } else { -c })
        .collect()
}

/// `e_k` from power sums: `k e_k = Σ_{i=1}^k (−1)^{i−1} e_{k−i} p_i`.
fn elementary_newton(p: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(1.0, 0.0)];
    for k in 1..=n {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 1..=k {
            let sign = if (i - 1) % 2 == 0 { 1.0 } else { -1.0 };
            acc += e[k - i] * p[i] * sign;
        }
        e.push(acc / k as f64);
    }
    e
}

fn newton_check(u: &[Complex64], m: usize, vanish: bool) -> bool {
    let n = u.len();
    let p: Vec<Complex64> = (0..=n).map(|k| u.iter().map(|z| z.powu(k as u32)).sum()).collect();
    let direct = elementary_direct(u);
    let newton = elementary_newton(&p, n);
    let tol = 1e-8 * (1u64 << n.min(40)) as f64;
    if direct.iter().zip(&newton).any(|(a, b)| (a - b).norm() > tol) {
        return false;
    }
    if !vanish {
        return true;
    }
    // Only e_0, e_m, e_{2m} survive; each u_j^m solves y² + (−1)^m e_m y + e_{2m}.
    if (1..n).any(|k| k != m && direct[k].norm() > tol) {
        return false;
    }
    let b = if m % 2 == 0 { direct[m] } else { -direct[m] };
    u.iter().all(|z| {
        let y = z.powu(m as u32);
        (y * y + b * y + direct[n]).norm() <= tol
    })
}

/// Classifies a `2m`-point offset set in `[0, m)` of a spectrum of period
/// `m` for two intervals of total length 2 with longer length `T ≥ 1`.
pub fn classify_periodic_tiler(offsets: &[ExactScalar], t: &ExactScalar) -> Result<TilerClassification> {
    if offsets.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    if offsets.len() % 2 == 1 {
        return Err(Error::OutOfScope(format!(
            "{} offsets per period: only even counts 2m are covered",
            offsets.len()
        )));
    }
    if t < &ExactScalar::one() {
        return Err(Error::InvalidConfig("T must be at least 1".into()));
    }
    let m = offsets.len() / 2;
    let mm = ExactScalar::int(m as i64);
    if !offsets[0].is_zero() {
        return Err(Error::InvalidSpectrum("first offset must be 0".into()));
    }
    if offsets.windows(2).any(|w| w[0] > w[1]) || offsets.iter().any(|o| o.is_negative() || *o >= mm) {
        return Err(Error::InvalidSpectrum("offsets must be sorted in [0, m)".into()));
    }

    let u: Vec<Complex64> = offsets
        .iter()
        .map(|a| Complex64::from_polar(1.0, 2.0 * PI * a.to_f64() / m as f64))
        .collect();
    let t_gt_1 = t > &ExactScalar::one();
    let kmax = if t_gt_1 { m } else { m - 1 };
    let power_sums: Vec<f64> = (1..=kmax)
        .map(|k| u.iter().map(|z| z.powu(k as u32)).sum::<Complex64>().norm())
        .collect();
    let vanish = power_sums.iter().all(|p| *p <= POWER_SUM_TOL);
    let newton_consistent = newton_check(&u, m, vanish);

    let alpha = offsets[1].clone();
    let expected: Vec<ExactScalar> = {
        let mut v: Vec<ExactScalar> = (0..m as i64)
            .flat_map(|k| [ExactScalar::int(k), &ExactScalar::int(k) + &alpha])
            .collect();
        v.sort();
        v
    };
    let structured = alpha.is_positive() && alpha < ExactScalar::one() && expected == offsets;
    let half = ExactScalar::ratio(1, 2);
    let (form, alpha) = match (vanish && structured, t_gt_1) {
        (false, _) => (TilerForm::Reject, None),
        (true, true) if alpha == half => (TilerForm::HalfIntegers, Some(alpha)),
        (true, true) => (TilerForm::Reject, None),
        (true, false) => (TilerForm::ZeroAlpha, Some(alpha)),
    };
    Ok(TilerClassification {
        form,
        alpha,
        power_sums,
        newton_consistent,
    })
}

// ---------------------------------------------------------------------------
// Projection injectivity

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleInterval {
    /// Open interval of line angles in `[0, π)`.
    pub lo: f64,
    pub hi: f64,
    pub sample_direction: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalAngle {
    pub angle: f64,
    pub direction: Point,
    /// Injectivity at exactly this direction (decided exactly).
    pub injective: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleIntervalSet {
    pub intervals: Vec<AngleInterval>,
    pub critical: Vec<CriticalAngle>,
}

impl AngleIntervalSet {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && !self.critical.iter().any(|c| c.injective)
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        let theta = theta.rem_euclid(PI);
        if let Some(c) = self.critical.iter().find(|c| (c.angle - theta).abs() < 1e-12) {
            return c.injective;
        }
        self.intervals.iter().any(|i| i.lo < theta && theta < i.hi)
    }

    pub fn contains_direction(&self, v: &Point) -> bool {
        if let Some(c) = self.critical.iter().find(|c| c.direction.parallel_to(v)) {
            return c.injective;
        }
        let f = v.to_f64();
        self.contains_angle(f[1].atan2(f[0]))
    }
}

/// Float injectivity test for the line at angle `theta`; `eps` is an
/// absolute length tolerance.
pub fn injective_at_angle(m: &Measure, theta: f64, eps: f64) -> bool {
    let v = [theta.cos(), theta.sin()];
    let mut iv: Vec<(f64, f64)> = m
        .segments
        .iter()
        .map(|s| {
            let (a, b) = (s.from.to_f64(), s.to.to_f64());
            let (x, y) = (a[0] * v[0] + a[1] * v[1], b[0] * v[0] + b[1] * v[1]);
            (x.min(y), x.max(y))
        })
        .collect();
    if iv.iter().any(|(lo, hi)| hi - lo <= eps) {
        return false;
    }
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut reach = f64::NEG_INFINITY;
    for (lo, hi) in iv {
        if reach - lo > eps {
            return false;
        }
        reach = reach.max(hi);
    }
    true
}

fn segments_2d(m: &Measure) -> Result<()> {
    if m.dimension != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: m.dimension,
        });
    }
    if !m.is_segments_only() || m.segments.is_empty() {
        return Err(Error::InvalidMeasure("expected a nonempty union of segments".into()));
    }
    Ok(())
}

/// Directions of lines onto which `m` projects injectively almost
/// everywhere.  The combinatorics of projected endpoints only change at
/// the finitely many critical directions perpendicular to a segment or to
/// a difference of endpoints; each open arc between them is decided at its
/// midpoint, and each critical direction exactly.
pub fn injectivity_scan(m: &Measure) -> Result<AngleIntervalSet> {
    segments_2d(m)?;
    let ends: Vec<(usize, &Point)> = m
        .segments
        .iter()
        .enumerate()
        .flat_map(|(i, s)| [(i, &s.from), (i, &s.to)])
        .collect();
    let mut dirs: Vec<Point> = m.segments.iter().map(|s| s.direction().perp()).collect();
    for (a, (i, p)) in ends.iter().enumerate() {
        for (j, q) in &ends[a + 1..] {
            if i != j {
                let d = *p - *q;
                if !d.is_zero() {
                    dirs.push(d.perp());
                }
            }
        }
    }
    let mut unique: Vec<Point> = Vec::new();
    for d in dirs {
        let d = d.sign_normalized();
        if !unique.iter().any(|u| u.parallel_to(&d)) {
            unique.push(d);
        }
    }
    let mut critical: Vec<CriticalAngle> = unique
        .into_iter()
        .map(|d| {
            let line = LineDir::new(d.clone())?;
            let injective = project_to_line(m, &line)?.multiplicity.is_injective();
            Ok(CriticalAngle {
                angle: line.angle(),
                direction: d,
                injective,
            })
        })
        .collect::<Result<_>>()?;
    critical.sort_by(|a, b| a.angle.total_cmp(&b.angle));

    let eps = 1e-9 * (1.0 + m.diameter());
    let mut arcs: Vec<(f64, f64)> = critical.windows(2).map(|w| (w[0].angle, w[1].angle)).collect();
    let (first, last) = (critical[0].angle, critical[critical.len() - 1].angle);
    // Wrap-around arc (last, first + π), stored as up to two pieces.
    let wrap_mid = ((last + first + PI) / 2.0).rem_euclid(PI);
    let wrap_ok = injective_at_angle(m, wrap_mid, eps);
    let mut intervals: Vec<AngleInterval> = arcs
        .drain(..)
        .filter(|(lo, hi)| injective_at_angle(m, (lo + hi) / 2.0, eps))
        .map(|(lo, hi)| {
            let mid = (lo + hi) / 2.0;
            AngleInterval {
                lo,
                hi,
                sample_direction: vec![mid.cos(), mid.sin()],
            }
        })
        .collect();
    if wrap_ok {
        let sample = vec![wrap_mid.cos(), wrap_mid.sin()];
        if first > 0.0 {
            intervals.insert(
                0,
                AngleInterval {
                    lo: 0.0,
                    hi: first,
                    sample_direction: sample.clone(),
                },
            );
        }
        intervals.push(AngleInterval {
            lo: last,
            hi: PI,
            sample_direction: sample,
        });
    }
    Ok(AngleIntervalSet { intervals, critical })
}

// ---------------------------------------------------------------------------
// Line-spectrum feasibility

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Obstruction {
    NoInjectiveDirection,
    /// No direction makes every gap an integer multiple of the common
    /// projected length.
    IncommensurableGaps {
        certificate: String,
        /// The irrational part that cannot vanish, when that is the reason.
        irrational_part: Option<ExactScalar>,
    },
    /// No injective direction gives equal projected lengths.
    NonUniformProjection,
    NotSpectral,
    Inconclusive {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibleDirection {
    pub direction: Point,
    /// Gaps between consecutive projected intervals over their common
    /// length (empty when the lengths differ).
    pub gap_ratios: Vec<ExactScalar>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub directions: Vec<FeasibleDirection>,
    pub obstruction: Option<Obstruction>,
}

impl FeasibilityReport {
    fn found(directions: Vec<FeasibleDirection>) -> Self {
        FeasibilityReport {
            feasible: true,
            directions,
            obstruction: None,
        }
    }

    fn blocked(o: Obstruction) -> Self {
        FeasibilityReport {
            feasible: false,
            directions: vec![],
            obstruction: Some(o),
        }
    }
}

/// Sorted projected intervals along `v` (exact), or `None` if the
/// projection is not injective.
fn exact_intervals(m: &Measure, v: &Point) -> Result<Option<Vec<(ExactScalar, ExactScalar)>>> {
    let p = project_to_line(m, &LineDir::new(v.clone())?)?;
    if !p.multiplicity.is_injective() {
        return Ok(None);
    }
    let mut iv: Vec<_> = p
        .measure
        .segments
        .iter()
        .map(|s| (s.from.0[0].clone(), s.to.0[0].clone()))
        .collect();
    iv.sort();
    Ok(Some(iv))
}

/// Gap ratios when all projected lengths agree.
fn gap_ratios(iv: &[(ExactScalar, ExactScalar)]) -> Option<Vec<ExactScalar>> {
    let len = &iv[0].1 - &iv[0].0;
    if iv.iter().any(|(a, b)| (b - a) != len) {
        return None;
    }
    Some(
        iv.windows(2)
            .map(|w| (&w[1].0 - &w[0].1).checked_div(&len).expect("positive length"))
            .collect(),
    )
}

fn equal_density(m: &Measure) -> bool {
    let s0 = &m.segments[0];
    let (m0, l0) = (s0.mass.square(), s0.length_sq());
    m.segments
        .iter()
        .all(|s| &s.mass.square() * &l0 == &m0 * &s.length_sq())
}

fn lcm(a: &num_bigint::BigInt, b: &num_bigint::BigInt) -> num_bigint::BigInt {
    use num_integer::Integer;
    a.lcm(b)
}

/// Decides whether `m` (a union of segments with equal density) can admit
/// a spectrum contained in a line, using the necessary condition that the
/// projection onto that line is injective and that all gaps are integer
/// multiples of the common projected length.
pub fn line_spectrum_feasibility(m: &Measure) -> Result<FeasibilityReport> {
    segments_2d(m)?;
    if !equal_density(m) {
        return Err(Error::InvalidMeasure("segments must carry equal density".into()));
    }
    let d = m.segments[0].direction();
    if m.segments.iter().all(|s| s.direction().parallel_to(&d)) {
        return parallel_feasibility(m, &d);
    }
    let scan = injectivity_scan(m)?;
    if scan.is_empty() {
        return Ok(FeasibilityReport::blocked(Obstruction::NoInjectiveDirection));
    }
    if m.segments.len() == 2 {
        return two_segment_feasibility(m);
    }

    // Equal projected lengths force v ⊥ (dᵢ ∓ dⱼ) for non-parallel pairs.
    let dirs: Vec<Point> = m.segments.iter().map(SegmentPiece::direction).collect();
    let mut candidates: Vec<Point> = Vec::new();
    for (i, a) in dirs.iter().enumerate() {
        for b in &dirs[i + 1..] {
            if a.parallel_to(b) {
                continue;
            }
            for w in [a - b, a + b] {
                let v = w.perp().sign_normalized();
                if !candidates.iter().any(|c| c.parallel_to(&v)) {
                    candidates.push(v);
                }
            }
        }
    }
    let mut first_bad: Option<(Point, Vec<ExactScalar>)> = None;
    let mut found = Vec::new();
    for v in candidates {
        let Some(iv) = exact_intervals(m, &v)? else { continue };
        let Some(ratios) = gap_ratios(&iv) else { continue };
        if ratios.iter().all(ExactScalar::is_integer) {
            found.push(FeasibleDirection {
                direction: v,
                gap_ratios: ratios,
                note: "equal projected lengths with integer gap ratios".into(),
            });
        } else if first_bad.is_none() {
            first_bad = Some((v, ratios));
        }
    }
    if !found.is_empty() {
        return Ok(FeasibilityReport::found(found));
    }
    Ok(FeasibilityReport::blocked(match first_bad {
        Some((v, ratios)) => Obstruction::IncommensurableGaps {
            certificate: format!(
                "the only injective direction with equal projected lengths is {:?}; gap ratios {} are not all integers",
                v.to_f64(),
                ratios.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
            ),
            irrational_part: ratios
                .iter()
                .find(|r| !r.is_rational())
                .map(|r| ExactScalar::new(Default::default(), r.sq2().clone())),
        },
        None => Obstruction::NonUniformProjection,
    }))
}

fn two_segment_feasibility(m: &Measure) -> Result<FeasibilityReport> {
    let inp = TwoSegmentInput::from_pieces(&m.segments[0], &m.segments[1])?;
    let verdict = classify(&inp)?;
    if !verdict.spectral {
        return Ok(FeasibilityReport::blocked(Obstruction::NotSpectral));
    }
    let Normalized::Cross(c) = &verdict.normalized else {
        return Ok(FeasibilityReport::blocked(Obstruction::Inconclusive {
            reason: "two-segment classification was not exact".into(),
        }));
    };
    let linear = c.provenance.as_ref().map(|p| p.linear.clone());
    let mut out = Vec::new();
    for ls in cross_line_spectrum(c)? {
        let spec = match &linear {
            Some(a) => pullback_spectrum_affine(&ls.spectrum, a)?,
            None => ls.spectrum,
        };
        out.push(FeasibleDirection {
            direction: spec.lattice[0].sign_normalized(),
            gap_ratios: vec![],
            note: format!("line spectrum from condition {}", ls.condition),
        });
    }
    Ok(FeasibilityReport::found(out))
}

fn parallel_feasibility(m: &Measure, d: &Point) -> Result<FeasibilityReport> {
    let segs = &m.segments;
    if segs.len() == 1 {
        return Ok(FeasibilityReport::found(vec![FeasibleDirection {
            direction: d.sign_normalized(),
            gap_ratios: vec![],
            note: "single interval".into(),
        }]));
    }
    let collinear = segs.iter().all(|s| d.cross(&(&s.from - &segs[0].from)).is_zero());
    if segs.len() == 2 {
        if collinear {
            let iv = exact_intervals(m, d)?.expect("disjoint collinear segments");
            let (l1, l2) = (&iv[0].1 - &iv[0].0, &iv[1].1 - &iv[1].0);
            let gap = &iv[1].0 - &iv[0].1;
            let v = classify_collinear(&l1, &l2, &gap)?;
            if !v.spectral {
                return Ok(FeasibilityReport::blocked(Obstruction::NotSpectral));
            }
            return Ok(FeasibilityReport::found(vec![FeasibleDirection {
                direction: d.sign_normalized(),
                gap_ratios: gap_ratios(&iv).unwrap_or_default(),
                note: "collinear pair".into(),
            }]));
        }
        let mut out = Vec::new();
        for k in 1..=3u32 {
            let line = choose_projection_line(&segs[0], &segs[1], k)?;
            let iv = exact_intervals(m, &line.direction)?.expect("constructed line is injective");
            out.push(FeasibleDirection {
                direction: line.direction,
                gap_ratios: gap_ratios(&iv).unwrap_or_default(),
                note: format!("gap equal to {k} times the total projected length"),
            });
        }
        return Ok(FeasibilityReport::found(out));
    }

    // Orient every segment along +d; equal lengths are then exact equality.
    let starts: Vec<Point> = segs
        .iter()
        .map(|s| {
            if s.direction() == *d {
                s.from.clone()
            } else {
                s.to.clone()
            }
        })
        .collect();
    if segs.iter().any(|s| s.direction() != *d && s.direction() != -d) {
        return Ok(FeasibilityReport::blocked(Obstruction::Inconclusive {
            reason: "three or more parallel segments of different lengths".into(),
        }));
    }
    // Along v = d + r·d⊥ every interval has projected length |d|², and the
    // start of interval j sits at x_j = p_j + r·q_j lengths from interval 0.
    let dp = d.perp();
    let l2 = d.norm_sq();
    let pq: Vec<(ExactScalar, ExactScalar)> = starts[1..]
        .iter()
        .map(|a| {
            let w = a - &starts[0];
            (
                w.dot(d).checked_div(&l2).expect("l2 > 0"),
                w.dot(&dp).checked_div(&l2).expect("l2 > 0"),
            )
        })
        .collect();
    let incommensurable = |j: usize, what: String, irr: Option<ExactScalar>| {
        Ok(FeasibilityReport::blocked(Obstruction::IncommensurableGaps {
            certificate: format!("segment {j}: {what}"),
            irrational_part: irr,
        }))
    };
    for (j, (p, q)) in pq.iter().enumerate() {
        if q.is_zero() && !p.is_integer() {
            return incommensurable(
                j + 1,
                format!("collinear with segment 0 at offset {p} lengths, not an integer"),
                (!p.is_rational()).then(|| ExactScalar::new(Default::default(), p.sq2().clone())),
            );
        }
    }
    let Some(k) = pq.iter().position(|(_, q)| !q.is_zero()) else {
        // All collinear with integer offsets: the line itself.
        let iv = exact_intervals(m, d)?.expect("disjoint collinear segments");
        return Ok(FeasibilityReport::found(vec![FeasibleDirection {
            direction: d.sign_normalized(),
            gap_ratios: gap_ratios(&iv).unwrap_or_default(),
            note: "collinear intervals with integer offsets".into(),
        }]));
    };
    let (pk, qk) = pq[k].clone();
    // With x_k = n ∈ Z: x_j = e_j + n·c_j.
    let ec: Vec<(usize, ExactScalar, ExactScalar)> = pq
        .iter()
        .enumerate()
        .filter(|(j, (_, q))| *j != k && !q.is_zero())
        .map(|(j, (p, q))| {
            let c = q.checked_div(&qk).expect("qk ≠ 0");
            (j + 1, p - &(&pk * &c), c)
        })
        .collect();

    let residue_ok = |n: &ExactScalar| ec.iter().all(|(_, e, c)| (e + &(n * c)).is_integer());
    let n_base: ExactScalar;
    let mut period = ExactScalar::zero();
    if let Some((j, e, c)) = ec.iter().find(|(_, _, c)| !c.sq2().is_zero()) {
        // Irrational parts force n = −E′/C′.
        let n =
            -(ExactScalar::from_rational(e.sq2().clone())).checked_div(&ExactScalar::from_rational(c.sq2().clone()))?;
        if !n.is_integer() || !residue_ok(&n) {
            return incommensurable(
                *j,
                format!(
                    "cancelling the irrational part requires x_{} = {n}, which does not make every gap integral",
                    k + 1
                ),
                None,
            );
        }
        n_base = n;
    } else {
        if let Some((j, e, _)) = ec.iter().find(|(_, e, _)| !e.sq2().is_zero()) {
            return incommensurable(
                *j,
                format!(
                    "once the gap of segment {} is an integer multiple of the length, the position of segment {j} has irrational part {}",
                    k + 1,
                    ExactScalar::new(Default::default(), e.sq2().clone())
                ),
                Some(ExactScalar::new(Default::default(), e.sq2().clone())),
            );
        }
        let mut l = num_bigint::BigInt::from(1);
        for (_, _, c) in &ec {
            l = lcm(&l, c.rat().denom());
        }
        if l > num_bigint::BigInt::from(1_000_000) {
            return Ok(FeasibilityReport::blocked(Obstruction::Inconclusive {
                reason: format!("residue search modulo {l} is too large"),
            }));
        }
        let lim: i64 = l.to_string().parse().expect("small");
        let Some(n0) = (0..lim).map(ExactScalar::int).find(|n| residue_ok(n)) else {
            return incommensurable(
                ec[0].0,
                format!("no residue of x_{} modulo {lim} makes all gaps integral", k + 1),
                None,
            );
        };
        n_base = n0;
        period = ExactScalar::int(lim);
    }

    // Shift within the residue class until all positions are distinct.
    let tries = (segs.len() * segs.len() + 2) as i64;
    for t in (0..=tries).flat_map(|t| [t, -t]) {
        let n = &n_base + &(&period * &ExactScalar::int(t));
        let r = (&n - &pk).checked_div(&qk)?;
        let v = (d + &dp.scale(&r)).sign_normalized();
        if let Some(iv) = exact_intervals(m, &v)? {
            if let Some(ratios) = gap_ratios(&iv) {
                if ratios.iter().all(ExactScalar::is_integer) {
                    return Ok(FeasibilityReport::found(vec![FeasibleDirection {
                        direction: v,
                        gap_ratios: ratios,
                        note: "gaps are integer multiples of the common length".into(),
                    }]));
                }
            }
        }
        if period.is_zero() {
            break;
        }
    }
    Ok(FeasibilityReport::blocked(Obstruction::Inconclusive {
        reason: "gap conditions solvable but every candidate projection overlaps".into(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(s: &str) -> ExactScalar {
        s.parse().unwrap()
    }

    fn cross(t1: (i64, i64), t2: (i64, i64)) -> CrossConfig {
        CrossConfig::from_ratios(t1, t2, (1, 1), (1, 1)).unwrap()
    }

    fn half_diagonal() -> SpectrumSpec {
        SpectrumSpec::new(2, vec![Point::zeros(2)], vec![Point::ratio2((1, 2), (-1, 2))]).unwrap()
    }

    #[test]
    fn unit_cross_orthogonal() {
        let c = cross((0, 1), (0, 1));
        let r = check_orthogonality(&c.measure(), &half_diagonal(), 50.0, 1e-10).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.violations.is_empty());
        assert_eq!(r.points, 2 * 70 + 1);
    }

    #[test]
    fn symmetric_cross_violation_is_two_over_pi() {
        let c = cross((-1, 2), (-1, 2));
        let r = check_orthogonality(&c.measure(), &half_diagonal(), 10.0, 1e-10).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let v = r
            .violations
            .iter()
            .find(|v| (v.difference[0] - 0.5).abs() < 1e-12 && (v.difference[1] + 0.5).abs() < 1e-12)
            .expect("violation at (1/2,-1/2)");
        assert!((v.value - 2.0 / PI).abs() < 1e-12);
        assert!(v.exact);
        // The float path agrees on a copy the exact path does not recognize.
        let moved =
            crate::measure::affine_pushforward(&c.measure(), &crate::measure::Matrix::identity(2), &Point::int2(3, 0))
                .unwrap();
        let r2 = check_orthogonality(&moved, &half_diagonal(), 10.0, 1e-10).unwrap();
        assert_eq!(r2.violations.len(), r.violations.len());
    }

    #[test]
    fn unit_interval_with_integers() {
        let m = Measure::interval(e("0"), e("1"), e("1")).unwrap();
        let z = PeriodicSet1D::new(vec![e("0")], e("1")).unwrap().to_spectrum().unwrap();
        assert!(check_orthogonality(&m, &z, 50.0, 1e-10).unwrap().violations.is_empty());
        let s = partial_sums(&m, &z, &[0.3], &[200.0]).unwrap()[0];
        assert!((0.995..=1.0 + BESSEL_SLACK).contains(&s), "{s}");
        let half = PeriodicSet1D::new(vec![e("0")], e("1/2"))
            .unwrap()
            .to_spectrum()
            .unwrap();
        assert!(!check_orthogonality(&m, &half, 5.0, 1e-10)
            .unwrap()
            .violations
            .is_empty());
    }

    #[test]
    fn translation_invariance() {
        let pp = builtins::parallel_pair().unwrap();
        let bad = SpectrumSpec::new(2, vec![Point::zeros(2)], vec![Point::ratio2((1, 3), (1, 5))]).unwrap();
        for s in [&pp.spectra[0].spectrum, &bad] {
            let a = check_orthogonality(&pp.measure, s, 20.0, 1e-10).unwrap();
            let moved = s.translated(&Point::ratio2((7, 3), (-2, 9))).unwrap();
            let b = check_orthogonality(&pp.measure, &moved, 20.0, 1e-10).unwrap();
            assert_eq!(a.violations.is_empty(), b.violations.is_empty());
            assert_eq!(a.differences_checked, b.differences_checked);
        }
    }

    #[test]
    fn completeness_examples() {
        let c = cross((0, 1), (0, 1));
        let r = completeness_curve(&c.measure(), &half_diagonal(), &unit_grid(2, 4), &[50.0, 200.0, 500.0]).unwrap();
        assert!(r.bessel_max <= 1.0 + BESSEL_SLACK);
        assert_eq!(r.verdict, Verdict::Pass);
        for smp in r.completeness_samples.iter().filter(|s| s.radius == 500.0) {
            assert!(smp.partial_sum >= 0.99, "{smp:?}");
        }
        // Maximal orthogonal subset on the diagonal of the symmetric cross.
        let sym = cross((-1, 2), (-1, 2));
        let diag = SpectrumSpec::new(2, vec![Point::zeros(2)], vec![Point::int2(1, -1)]).unwrap();
        assert!(check_orthogonality(&sym.measure(), &diag, 30.0, 1e-10)
            .unwrap()
            .violations
            .is_empty());
        let s = partial_sums(&sym.measure(), &diag, &[0.25, 0.25], &[100.0, 400.0]).unwrap();
        let plateau = 0.5 * (1.0 + 2.0 / PI);
        assert!(s.iter().all(|v| (v - plateau).abs() < 0.01 && *v < 0.9), "{s:?}");
        let r = completeness_curve(&sym.measure(), &diag, &[vec![0.25, 0.25]], &[100.0, 200.0, 400.0]).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn partial_sums_monotone() {
        let pp = builtins::parallel_pair().unwrap();
        let radii: Vec<f64> = (1..=12).map(|k| 5.0 * k as f64).collect();
        for x in unit_grid(2, 3) {
            let s = partial_sums(&pp.measure, &pp.spectra[0].spectrum, &x, &radii).unwrap();
            assert!(s.windows(2).all(|w| w[0] <= w[1]));
            assert!(s.iter().all(|v| *v <= 1.0 + BESSEL_SLACK));
        }
    }

    /// Poisson summation: `Σ_λ |1̂_{[0,T]}|²(s−λ) = (1/P) Σ_{|k|<TP} (T − |k|/P) Σ_j e^{2πik(s−o_j)/P}`.
    fn poisson(offs: &[f64], p: f64, t: f64, s: f64) -> f64 {
        let kmax = (t * p).ceil() as i64;
        let mut acc = 0.0;
        for k in -kmax..=kmax {
            let w = t - k.abs() as f64 / p;
            if w <= 0.0 {
                continue;
            }
            let phase: f64 = offs.iter().map(|o| (2.0 * PI * k as f64 * (s - o) / p).cos()).sum();
            acc += w * phase;
        }
        acc / p
    }

    #[test]
    fn tiling_examples() {
        let z_half = PeriodicSet1D::new(vec![e("0"), e("1/2")], e("1")).unwrap();
        assert_eq!(
            check_tiling_1d(&z_half, &e("1"), &e("2"), 8).unwrap().verdict,
            Verdict::Pass
        );
        let z = PeriodicSet1D::new(vec![e("0")], e("1")).unwrap();
        assert_eq!(check_tiling_1d(&z, &e("1"), &e("2"), 8).unwrap().verdict, Verdict::Fail);
        assert_eq!(check_tiling_1d(&z, &e("1"), &e("1"), 8).unwrap().verdict, Verdict::Pass);
        let half = PeriodicSet1D::new(vec![e("0")], e("1/2")).unwrap();
        let r = check_tiling_1d(&half, &e("3/2"), &e("3"), 8).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        for smp in &r.samples {
            assert!((poisson(&[0.0], 0.5, 1.5, smp.s) - 3.0).abs() < 1e-12);
            assert!(smp.tail_bound <= TILING_TOL);
        }
    }

    #[test]
    fn tiling_partial_sums_bracket_poisson_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let offs: Vec<ExactScalar> = std::iter::once(e("0"))
                .chain((0..3).map(|_| ExactScalar::ratio(rng.gen_range(0..24), 12)))
                .collect();
            let s = PeriodicSet1D::new(offs, e("2")).unwrap();
            let of: Vec<f64> = s.offsets.iter().map(ExactScalar::to_f64).collect();
            let x = rng.gen_range(0.0..2.0);
            let truth = poisson(&of, 2.0, 1.0, x);
            let (sum, tail, _) = tiling_at(x, &of, 2.0, 1.0, truth);
            assert!(
                sum <= truth + 1e-9 && truth <= sum + tail + 1e-9,
                "{truth} vs {sum}+{tail}"
            );
        }
    }

    #[test]
    fn canonical_period_examples() {
        let p = canonical_period(&[e("0"), e("1/4")], &e("1"), &e("1")).unwrap();
        assert_eq!(p.period, e("1"));
        assert_eq!(canonical_period(&[e("0")], &e("1"), &e("1")).unwrap().period, e("1/2"));
        let four = [e("0"), e("1/4"), e("1"), e("5/4")];
        assert_eq!(canonical_period(&four, &e("1"), &e("1")).unwrap().period, e("2"));
        assert!(canonical_period(&four, &e("0"), &e("1")).is_err());
        assert!(canonical_period(&[], &e("1"), &e("1")).is_err());
    }

    #[test]
    fn tiler_examples() {
        let c = classify_periodic_tiler(&[e("0"), e("1/4"), e("1"), e("5/4")], &e("1")).unwrap();
        assert_eq!((c.form, c.alpha.clone()), (TilerForm::ZeroAlpha, Some(e("1/4"))));
        assert!(c.newton_consistent);
        let c = classify_periodic_tiler(&[e("0"), e("1/2"), e("1"), e("3/2")], &e("3/2")).unwrap();
        assert_eq!(c.form, TilerForm::HalfIntegers);
        assert!(c.newton_consistent);
        let c = classify_periodic_tiler(&[e("0"), e("1/3"), e("1"), e("4/3")], &e("3/2")).unwrap();
        assert_eq!(c.form, TilerForm::Reject);
        assert!(c.power_sums[0] < POWER_SUM_TOL && c.power_sums[1] > 0.1);
        assert!(matches!(
            classify_periodic_tiler(&[e("0"), e("1/2"), e("1")], &e("1")),
            Err(Error::OutOfScope(_))
        ));
        assert!(classify_periodic_tiler(&[e("1/4"), e("1/2")], &e("1")).is_err());
        assert!(classify_periodic_tiler(&[e("0"), e("1/2")], &e("1/2")).is_err());
        // m = 3 with T = 1.
        let c = classify_periodic_tiler(&[e("0"), e("2/7"), e("1"), e("9/7"), e("2"), e("16/7")], &e("1")).unwrap();
        assert_eq!(c.form, TilerForm::ZeroAlpha);
        assert!(c.newton_consistent);
    }

    #[test]
    fn tiler_agrees_with_tiling_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let eps = e("1/1000");
        for _ in 0..50 {
            let q = rng.gen_range(2..60);
            let alpha = ExactScalar::ratio(rng.gen_range(1..q), q);
            let offs = vec![e("0"), alpha.clone(), e("1"), &e("1") + &alpha];
            let cls = classify_periodic_tiler(&offs, &e("1")).unwrap();
            assert_eq!(
                (cls.form, cls.alpha.clone()),
                (TilerForm::ZeroAlpha, Some(alpha.clone()))
            );
            let set = PeriodicSet1D::new(offs, e("2")).unwrap();
            assert_eq!(
                check_tiling_1d(&set, &e("1"), &e("2"), 4).unwrap().verdict,
                Verdict::Pass
            );

            let bad = vec![e("0"), alpha.clone(), e("1"), &(&e("1") + &alpha) + &eps];
            if bad[3] >= e("2") {
                continue;
            }
            assert_eq!(classify_periodic_tiler(&bad, &e("1")).unwrap().form, TilerForm::Reject);
            let set = PeriodicSet1D::new(bad, e("2")).unwrap();
            assert_eq!(
                check_tiling_1d(&set, &e("1"), &e("2"), 4).unwrap().verdict,
                Verdict::Fail
            );
        }
    }

    #[test]
    fn injectivity_examples() {
        let unit = cross((0, 1), (0, 1)).measure();
        let scan = injectivity_scan(&unit).unwrap();
        assert!(!scan.is_empty());
        assert!(scan.contains_direction(&Point::int2(1, -1)));
        assert!(!scan.contains_direction(&Point::int2(1, 1)));
        assert!(!scan.contains_direction(&Point::int2(1, 0)));

        assert!(injectivity_scan(&builtins::th_l().unwrap().measure).unwrap().is_empty());

        let tp = injectivity_scan(&builtins::th_parallel().unwrap().measure).unwrap();
        assert!(!tp.is_empty());
        // Only steep lines separate three stacked segments of length 100.
        for i in &tp.intervals {
            assert!(
                (i.lo - PI / 2.0).abs() < 0.05 && (i.hi - PI / 2.0).abs() < 0.05,
                "{i:?}"
            );
        }
    }

    /// Monte-Carlo oracle: a random support point whose projection lies
    /// strictly inside another segment's projection witnesses overlap.
    fn probe_injective(m: &Measure, theta: f64, rng: &mut ChaCha8Rng) -> bool {
        let v = [theta.cos(), theta.sin()];
        let proj = |p: &[f64]| p[0] * v[0] + p[1] * v[1];
        let segs: Vec<(Vec<f64>, Vec<f64>)> = m.segments.iter().map(|s| (s.from.to_f64(), s.to.to_f64())).collect();
        let iv: Vec<(f64, f64)> = segs
            .iter()
            .map(|(a, b)| {
                let (x, y) = (proj(a), proj(b));
                (x.min(y), x.max(y))
            })
            .collect();
        if iv.iter().any(|(lo, hi)| hi - lo < 1e-9) {
            return false;
        }
        for _ in 0..10_000 {
            let i = rng.gen_range(0..segs.len());
            let t: f64 = rng.gen();
            let (a, b) = &segs[i];
            let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            let px = proj(&x);
            if iv
                .iter()
                .enumerate()
                .any(|(j, (lo, hi))| j != i && *lo + 1e-9 < px && px < *hi - 1e-9)
            {
                return false;
            }
        }
        true
    }

    #[test]
    fn injectivity_matches_monte_carlo_probe() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut configs = 0;
        while configs < 20 {
            let mut pt = || Point::ratio2((rng.gen_range(-12..=12), 4), (rng.gen_range(-12..=12), 4));
            let segs: Vec<_> = (0..3)
                .filter_map(|_| SegmentPiece::arc_length(pt(), pt()).ok())
                .collect();
            let Ok(m) = Measure::from_segments(segs) else { continue };
            if m.segments.len() != 3 {
                continue;
            }
            configs += 1;
            let scan = injectivity_scan(&m).unwrap();
            let crit: Vec<f64> = scan.critical.iter().map(|c| c.angle).collect();
            let mut tested = 0;
            while tested < 15 {
                let theta = rng.gen_range(0.0..PI);
                let dist = crit
                    .iter()
                    .map(|c| (c - theta).abs().min(PI - (c - theta).abs()))
                    .fold(f64::INFINITY, f64::min);
                if dist < 0.05 {
                    continue;
                }
                tested += 1;
                assert_eq!(
                    scan.contains_angle(theta),
                    probe_injective(&m, theta, &mut rng),
                    "{m:?} at {theta}"
                );
            }
        }
    }

    #[test]
    fn feasibility_examples() {
        let tp = line_spectrum_feasibility(&builtins::th_parallel().unwrap().measure).unwrap();
        assert!(!tp.feasible);
        match tp.obstruction.unwrap() {
            Obstruction::IncommensurableGaps { irrational_part, .. } => {
                let irr = irrational_part.expect("exact certificate");
                assert!(!irr.is_zero() && !irr.is_rational());
            }
            o => panic!("unexpected {o:?}"),
        }

        let pp = line_spectrum_feasibility(&builtins::parallel_pair().unwrap().measure).unwrap();
        assert!(pp.feasible);
        let ratios: Vec<_> = pp.directions.iter().map(|d| d.gap_ratios[0].clone()).collect();
        assert_eq!(ratios, vec![e("2"), e("4"), e("6")]);

        let l = line_spectrum_feasibility(&builtins::th_l().unwrap().measure).unwrap();
        assert_eq!(l.obstruction, Some(Obstruction::NoInjectiveDirection));

        // Shifts 0, 50, 0: positions x₁ = n, x₂ = 2n − 1 can all be integers.
        let segs = [(0, 0), (50, 1), (0, 2)]
            .iter()
            .map(|(x, y)| SegmentPiece::arc_length(Point::int2(*x, *y), Point::int2(*x + 100, *y)).unwrap())
            .collect();
        let r = line_spectrum_feasibility(&Measure::from_segments(segs).unwrap()).unwrap();
        assert!(r.feasible, "{r:?}");
        assert!(r.directions[0].gap_ratios.iter().all(ExactScalar::is_integer));

        // Two crossing segments: feasible exactly when spectral.
        assert!(
            line_spectrum_feasibility(&cross((0, 1), (0, 1)).measure())
                .unwrap()
                .feasible
        );
        let apart = line_spectrum_feasibility(&cross((1, 4), (1, 4)).measure()).unwrap();
        assert_eq!(apart.obstruction, Some(Obstruction::NotSpectral));
        // A centred plus sign overlaps itself under every projection.
        let plus = line_spectrum_feasibility(&cross((-1, 2), (-1, 2)).measure()).unwrap();
        assert_eq!(plus.obstruction, Some(Obstruction::NoInjectiveDirection));
    }

    #[test]
    fn builtin_spectra_are_orthogonal() {
        for name in [
            "th-parallel",
            "th-L",
            "parallel-pair",
            "collinear(1,1,2)",
            "collinear(3/2,1/2,2)",
            "cross(1,0,1,1)",
        ] {
            let b = builtins::builtin(name).unwrap();
            for s in &b.spectra {
                let r = check_orthogonality(&b.measure, &s.spectrum, 20.0, 1e-10).unwrap();
                assert!(r.violations.is_empty(), "{name}/{}: {:?}", s.label, &r.violations[..1]);
            }
        }
    }
}

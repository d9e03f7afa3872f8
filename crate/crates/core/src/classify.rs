//! Spectrality of two-segment measures.
//!
//! Non-parallel pairs are mapped affinely onto a normalized cross (see
//! [`CrossConfig`]); parallel and collinear pairs reduce to the gap between
//! two intervals.  Every decision is an integrality test in Q[√2].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{AffineMap, Matrix, Point, SegmentPiece};
use crate::scalar::ExactScalar;
use crate::zeros::CrossConfig;

const NUMERIC_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[allow(clippy::large_enum_variant)]
pub enum Weights {
    /// Arc-length measure: mass equals Euclidean length.
    ArcLength,
    /// Uniform density on each segment with the given total masses.
    Masses(ExactScalar, ExactScalar),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoSegmentInput {
    pub seg1: (Point, Point),
    pub seg2: (Point, Point),
    pub weights: Weights,
}

impl TwoSegmentInput {
    pub fn arc_length(a1: Point, b1: Point, a2: Point, b2: Point) -> Result<Self> {
        Self::build((a1, b1), (a2, b2), Weights::ArcLength)
    }

    /// From weighted pieces, enforcing equal density (mass ∝ length).
    pub fn from_pieces(s1: &SegmentPiece, s2: &SegmentPiece) -> Result<Self> {
        let lhs = s1.mass.square() * s2.length_sq();
        let rhs = s2.mass.square() * s1.length_sq();
        if lhs != rhs {
            return Err(Error::InvalidMeasure("segments must carry equal density".into()));
        }
        Self::from_pieces_weighted(s1, s2)
    }

    /// From weighted pieces without the density check.  Affine images of
    /// arc-length pairs look like this: masses survive, lengths do not.
    pub fn from_pieces_weighted(s1: &SegmentPiece, s2: &SegmentPiece) -> Result<Self> {
        Self::build(
            (s1.from.clone(), s1.to.clone()),
            (s2.from.clone(), s2.to.clone()),
            Weights::Masses(s1.mass.clone(), s2.mass.clone()),
        )
    }

    fn build(seg1: (Point, Point), seg2: (Point, Point), weights: Weights) -> Result<Self> {
        for (a, b) in [&seg1, &seg2] {
            if a.dim() != 2 || b.dim() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    found: a.dim().max(b.dim()),
                });
            }
            if a == b {
                return Err(Error::ZeroLength);
            }
        }
        if let Weights::Masses(m1, m2) = &weights {
            if !m1.is_positive() || !m2.is_positive() {
                return Err(Error::InvalidMeasure("masses must be positive".into()));
            }
        }
        let inp = TwoSegmentInput { seg1, seg2, weights };
        let pieces = inp.pieces_unchecked();
        crate::measure::Measure::new(2, vec![], pieces)?;
        Ok(inp)
    }

    fn pieces_unchecked(&self) -> Vec<SegmentPiece> {
        let (m1, m2) = match &self.weights {
            Weights::Masses(a, b) => (a.clone(), b.clone()),
            // Placeholder masses; only geometry matters for the overlap check.
            Weights::ArcLength => (ExactScalar::one(), ExactScalar::one()),
        };
        vec![
            SegmentPiece::new(self.seg1.0.clone(), self.seg1.1.clone(), m1).expect("validated"),
            SegmentPiece::new(self.seg2.0.clone(), self.seg2.1.clone(), m2).expect("validated"),
        ]
    }

    pub fn d1(&self) -> Point {
        &self.seg1.1 - &self.seg1.0
    }

    pub fn d2(&self) -> Point {
        &self.seg2.1 - &self.seg2.0
    }

    pub fn geometry(&self) -> Geometry {
        let (d1, d2) = (self.d1(), self.d2());
        if !d1.cross(&d2).is_zero() {
            Geometry::Nonparallel
        } else if d1.cross(&(&self.seg2.0 - &self.seg1.0)).is_zero() {
            Geometry::Collinear
        } else {
            Geometry::Parallel
        }
    }

    /// `mass₁ / mass₂`, exact when available.
    fn mass_ratio(&self) -> Ratio {
        match &self.weights {
            Weights::Masses(a, b) => Ratio::Exact(a.checked_div(b).expect("positive mass")),
            Weights::ArcLength => {
                let q = self.d1().norm_sq().checked_div(&self.d2().norm_sq()).expect("nonzero");
                match q.sqrt_exact() {
                    Some(r) => Ratio::Exact(r),
                    None => Ratio::Numeric(q.to_f64().sqrt()),
                }
            }
        }
    }
}

enum Ratio {
    Exact(ExactScalar),
    Numeric(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Collinear,
    Parallel,
    Nonparallel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    Exact,
    NumericFlagged,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// Equal lengths, `t₁+t₂ ∈ Z∖{−1}`.
    SumInteger,
    /// Equal lengths, `t₁−t₂ ∈ Z∖{0}`.
    DifferenceInteger,
    /// Unequal lengths, `t₁+t₂ ∈ 2Z`.
    SumEven,
    /// Unequal lengths, `t₁−t₂−T₂ ∈ 2Z`.
    ShiftedDifferenceEven,
    /// Parallel, non-collinear pair.
    Parallel,
    /// Collinear, equal lengths, integer gap.
    GapInteger,
    /// Collinear, unequal lengths, even gap.
    GapEven,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::SumInteger => "t1+t2 in Z\\{-1}",
            Condition::DifferenceInteger => "t1-t2 in Z\\{0}",
            Condition::SumEven => "t1+t2 in 2Z",
            Condition::ShiftedDifferenceEven => "t1-t2-T2 in 2Z",
            Condition::Parallel => "parallel non-collinear pair",
            Condition::GapInteger => "equal lengths, gap in Z",
            Condition::GapEven => "unequal lengths, gap in 2Z",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParallelData {
    /// Normalized lengths, summing to 2.
    pub len1: ExactScalar,
    pub len2: ExactScalar,
    /// Start of the second segment along the common direction, relative to
    /// the start of the first, in normalized units.
    pub offset: ExactScalar,
    /// Squared perpendicular displacement in normalized units.
    pub perpendicular_sq: ExactScalar,
    /// Normalized unit = original `d₁`-length divided by this scale.
    pub scale: ExactScalar,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollinearData {
    pub len1: ExactScalar,
    pub len2: ExactScalar,
    pub gap: ExactScalar,
    pub scale: ExactScalar,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Normalized {
    Cross(CrossConfig),
    CrossNumeric {
        t1: f64,
        t2: f64,
        #[serde(rename = "T1")]
        len1: f64,
        #[serde(rename = "T2")]
        len2: f64,
    },
    Parallel(ParallelData),
    Collinear(CollinearData),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationResult {
    pub geometry: Geometry,
    pub spectral: bool,
    pub matched_conditions: Vec<Condition>,
    pub normalized: Normalized,
    pub exactness: Exactness,
}

/// Interval positions of the two segments along `d₁` (first segment is
/// `[0, 1]`), plus the signed ratio `c` with `d₂ = c·d₁`.
fn along_first(inp: &TwoSegmentInput) -> (ExactScalar, ExactScalar, ExactScalar) {
    let d1 = inp.d1();
    let dd = d1.norm_sq();
    let c = inp.d2().dot(&d1).checked_div(&dd).expect("nonzero");
    let s = (&inp.seg2.0 - &inp.seg1.0).dot(&d1).checked_div(&dd).expect("nonzero");
    (s.clone(), &s + &c, c)
}

fn check_parallel_density(inp: &TwoSegmentInput, c: &ExactScalar) -> Result<()> {
    if let Weights::Masses(m1, m2) = &inp.weights {
        if *m2 != m1 * &c.abs() {
            return Err(Error::Unsupported(
                "parallel segments with unequal densities are outside the classification".into(),
            ));
        }
    }
    Ok(())
}

pub fn normalize_two_segments(inp: &TwoSegmentInput) -> Result<(Geometry, Normalized, Exactness)> {
    let geometry = inp.geometry();
    match geometry {
        Geometry::Nonparallel => {
            let (d1, d2) = (inp.d1(), inp.d2());
            let w = &inp.seg2.0 - &inp.seg1.0;
            let den = d1.cross(&d2);
            // Intersection P = from₁ + s·d₁ = from₂ + u·d₂.
            let s = w.cross(&d2).checked_div(&den)?;
            let u = w.cross(&d1).checked_div(&den)?;
            match inp.mass_ratio() {
                Ratio::Exact(r) => {
                    let one = ExactScalar::one();
                    let k1 = (&ExactScalar::int(2) * &r).checked_div(&(&r + &one))?;
                    let k2 = ExactScalar::int(2).checked_div(&(&r + &one))?;
                    let mut cfg = CrossConfig::new(-&(&s * &k1), -&(&u * &k2), k1.clone(), k2.clone())?;
                    // M·d₁ = k₁e₁, M·d₂ = k₂e₂, and M·P + b = 0.
                    let basis = Matrix::from_columns(&[d1.clone(), d2.clone()])?;
                    let diag = Matrix::new(vec![vec![k1, ExactScalar::zero()], vec![ExactScalar::zero(), k2]])?;
                    let m = diag.mul(&basis.inverse()?);
                    let p = &inp.seg1.0 + &d1.scale(&s);
                    let b = -&m.apply(&p);
                    cfg.provenance = Some(AffineMap::new(m, b)?);
                    Ok((geometry, Normalized::Cross(cfg), Exactness::Exact))
                }
                Ratio::Numeric(r) => {
                    let k1 = 2.0 * r / (r + 1.0);
                    let k2 = 2.0 / (r + 1.0);
                    Ok((
                        geometry,
                        Normalized::CrossNumeric {
                            t1: -s.to_f64() * k1,
                            t2: -u.to_f64() * k2,
                            len1: k1,
                            len2: k2,
                        },
                        Exactness::NumericFlagged,
                    ))
                }
            }
        }
        Geometry::Parallel | Geometry::Collinear => {
            let (a, b, c) = along_first(inp);
            check_parallel_density(inp, &c)?;
            let one = ExactScalar::one();
            let scale = ExactScalar::int(2).checked_div(&(&one + &c.abs()))?;
            let len1 = scale.clone();
            let len2 = &scale * &c.abs();
            if geometry == Geometry::Collinear {
                let (lo2, hi2) = if a < b { (a, b) } else { (b, a) };
                let gap = if hi2 <= ExactScalar::zero() {
                    -&hi2
                } else if lo2 >= one {
                    &lo2 - &one
                } else {
                    return Err(Error::Overlap);
                };
                Ok((
                    geometry,
                    Normalized::Collinear(CollinearData {
                        len1,
                        len2,
                        gap: &gap * &scale,
                        scale,
                    }),
                    Exactness::Exact,
                ))
            } else {
                let d1 = inp.d1();
                let w = &inp.seg2.0 - &inp.seg1.0;
                let along = d1.scale(&w.dot(&d1).checked_div(&d1.norm_sq())?);
                let perp = &w - &along;
                let perpendicular_sq = perp.norm_sq().checked_div(&d1.norm_sq())? * scale.square();
                Ok((
                    geometry,
                    Normalized::Parallel(ParallelData {
                        len1,
                        len2,
                        offset: &a * &scale,
                        perpendicular_sq,
                        scale,
                    }),
                    Exactness::Exact,
                ))
            }
        }
    }
}

fn in_z_except(x: &ExactScalar, excluded: i64) -> bool {
    x.is_integer() && *x != ExactScalar::int(excluded)
}

pub fn cross_conditions(c: &CrossConfig) -> Vec<Condition> {
    let sum = &c.t1 + &c.t2;
    let diff = &c.t1 - &c.t2;
    let mut out = Vec::new();
    if c.equal_lengths() {
        if in_z_except(&sum, -1) {
            out.push(Condition::SumInteger);
        }
        if in_z_except(&diff, 0) {
            out.push(Condition::DifferenceInteger);
        }
    } else {
        if sum.is_even_integer() {
            out.push(Condition::SumEven);
        }
        if (&diff - &c.len2).is_even_integer() {
            out.push(Condition::ShiftedDifferenceEven);
        }
    }
    out
}

pub fn classify_cross(c: &CrossConfig) -> ClassificationResult {
    let matched = cross_conditions(c);
    ClassificationResult {
        geometry: Geometry::Nonparallel,
        spectral: !matched.is_empty(),
        matched_conditions: matched,
        normalized: Normalized::Cross(c.clone()),
        exactness: Exactness::Exact,
    }
}

fn near_integer(x: f64, modulus: f64) -> Option<i64> {
    let k = (x / modulus).round();
    ((x - k * modulus).abs() <= NUMERIC_TOL).then_some(k as i64)
}

/// The same conditions evaluated in floating point, for parameters outside
/// Q[√2].  The verdict is flagged as numeric.
pub fn classify_cross_numeric(t1: f64, t2: f64, len1: f64, len2: f64) -> ClassificationResult {
    let mut matched = Vec::new();
    if (len1 - len2).abs() <= NUMERIC_TOL {
        if matches!(near_integer(t1 + t2, 1.0), Some(k) if k != -1) {
            matched.push(Condition::SumInteger);
        }
        if matches!(near_integer(t1 - t2, 1.0), Some(k) if k != 0) {
            matched.push(Condition::DifferenceInteger);
        }
    } else {
        if near_integer(t1 + t2, 2.0).is_some() {
            matched.push(Condition::SumEven);
        }
        if near_integer(t1 - t2 - len2, 2.0).is_some() {
            matched.push(Condition::ShiftedDifferenceEven);
        }
    }
    ClassificationResult {
        geometry: Geometry::Nonparallel,
        spectral: !matched.is_empty(),
        matched_conditions: matched,
        normalized: Normalized::CrossNumeric { t1, t2, len1, len2 },
        exactness: Exactness::NumericFlagged,
    }
}

/// Two collinear intervals; lengths are rescaled to sum to 2 first.
pub fn classify_collinear(len1: &ExactScalar, len2: &ExactScalar, gap: &ExactScalar) -> Result<ClassificationResult> {
    if !len1.is_positive() || !len2.is_positive() {
        return Err(Error::InvalidConfig("lengths must be positive".into()));
    }
    if gap.is_negative() {
        return Err(Error::Overlap);
    }
    let scale = ExactScalar::int(2).checked_div(&(len1 + len2))?;
    let (l1, l2, g) = (len1 * &scale, len2 * &scale, gap * &scale);
    let cond = if l1 == l2 {
        g.is_integer().then_some(Condition::GapInteger)
    } else {
        g.is_even_integer().then_some(Condition::GapEven)
    };
    Ok(ClassificationResult {
        geometry: Geometry::Collinear,
        spectral: cond.is_some(),
        matched_conditions: cond.into_iter().collect(),
        normalized: Normalized::Collinear(CollinearData {
            len1: l1,
            len2: l2,
            gap: g,
            scale,
        }),
        exactness: Exactness::Exact,
    })
}

pub fn classify(inp: &TwoSegmentInput) -> Result<ClassificationResult> {
    let (geometry, normalized, exactness) = normalize_two_segments(inp)?;
    match normalized {
        Normalized::Cross(c) => Ok(classify_cross(&c)),
        Normalized::CrossNumeric { t1, t2, len1, len2 } => Ok(classify_cross_numeric(t1, t2, len1, len2)),
        Normalized::Collinear(d) => {
            let mut r = classify_collinear(&d.len1, &d.len2, &d.gap)?;
            r.normalized = Normalized::Collinear(d);
            Ok(r)
        }
        Normalized::Parallel(p) => Ok(ClassificationResult {
            geometry,
            spectral: true,
            matched_conditions: vec![Condition::Parallel],
            normalized: Normalized::Parallel(p),
            exactness,
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumLine {
    /// Direction (1, 1).
    Plus,
    /// Direction (1, −1).
    Minus,
}

/// Gap between the projections of the two arms onto the spectrum line,
/// divided by the sum of the projected lengths.
pub fn gap_ratio(c: &CrossConfig, line: SpectrumLine) -> Result<ExactScalar> {
    let matched = cross_conditions(c);
    let half = ExactScalar::ratio(1, 2);
    let one = ExactScalar::one();
    match line {
        SpectrumLine::Minus => {
            if !matched
                .iter()
                .any(|m| matches!(m, Condition::SumInteger | Condition::SumEven))
            {
                let need = if c.equal_lengths() {
                    "t1+t2 in Z\\{-1}"
                } else {
                    "t1+t2 in 2Z"
                };
                return Err(Error::ConditionNotMet(need.into()));
            }
            Ok(&half * &(&(&(&c.t1 + &c.t2) + &one).abs() - &one))
        }
        SpectrumLine::Plus => {
            if !matched
                .iter()
                .any(|m| matches!(m, Condition::DifferenceInteger | Condition::ShiftedDifferenceEven))
            {
                let need = if c.equal_lengths() {
                    "t1-t2 in Z\\{0}"
                } else {
                    "t1-t2-T2 in 2Z"
                };
                return Err(Error::ConditionNotMet(need.into()));
            }
            let inner = if c.equal_lengths() {
                &c.t1 - &c.t2
            } else {
                &(&(&c.t1 - &c.t2) - &c.len2) + &one
            };
            Ok(&half * &(&inner.abs() - &one))
        }
    }
}

//! Explicit spectra: finite offsets plus an integer lattice.

use serde::{Deserialize, Serialize};

use crate::classify::{cross_conditions, Condition, SpectrumLine};
use crate::error::{Error, Result};
use crate::measure::{project_to_line, LineDir, Matrix, Measure, Point, SegmentPiece};
use crate::scalar::ExactScalar;
use crate::zeros::CrossConfig;

/// `Λ = offsets + Z-span(lattice)`, offsets reduced into a fundamental
/// domain of the lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectrumSpec {
    pub dimension: usize,
    pub offsets: Vec<Point>,
    pub lattice: Vec<Point>,
}

#[derive(Deserialize)]
struct RawSpectrum {
    dimension: usize,
    offsets: Vec<Point>,
    #[serde(default)]
    lattice: Vec<Point>,
}

impl<'de> Deserialize<'de> for SpectrumSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSpectrum::deserialize(d)?;
        SpectrumSpec::new(raw.dimension, raw.offsets, raw.lattice).map_err(serde::de::Error::custom)
    }
}

fn gram(gens: &[Point]) -> Option<Matrix> {
    if gens.is_empty() {
        return None;
    }
    let rows = gens.iter().map(|a| gens.iter().map(|b| a.dot(b)).collect()).collect();
    Some(Matrix::new(rows).expect("square"))
}

impl SpectrumSpec {
    pub fn new(dimension: usize, offsets: Vec<Point>, lattice: Vec<Point>) -> Result<Self> {
        let s = Self::new_unanchored(dimension, offsets, lattice)?;
        if !s.offsets.iter().any(Point::is_zero) {
            return Err(Error::InvalidSpectrum("spectrum must contain the origin".into()));
        }
        Ok(s)
    }

    /// Like [`SpectrumSpec::new`] without the `0 ∈ Λ` convention; used for
    /// translates.
    pub fn new_unanchored(dimension: usize, offsets: Vec<Point>, lattice: Vec<Point>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        for p in offsets.iter().chain(&lattice) {
            if p.dim() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: p.dim(),
                });
            }
        }
        if lattice.len() > dimension {
            return Err(Error::InvalidSpectrum("lattice rank exceeds dimension".into()));
        }
        if let Some(g) = gram(&lattice) {
            if g.det().is_zero() {
                return Err(Error::InvalidSpectrum("lattice generators are dependent".into()));
            }
        }
        let mut s = SpectrumSpec {
            dimension,
            offsets: vec![],
            lattice,
        };
        let mut reduced: Vec<Point> = offsets.iter().map(|o| s.reduce(o)).collect();
        reduced.sort();
        if reduced.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSpectrum("offsets coincide modulo the lattice".into()));
        }
        s.offsets = reduced;
        Ok(s)
    }

    pub fn rank(&self) -> usize {
        self.lattice.len()
    }

    /// Lattice coordinates of the projection of `p` onto the lattice span.
    fn lattice_coords(&self, p: &Point) -> Vec<ExactScalar> {
        let Some(g) = gram(&self.lattice) else {
            return vec![];
        };
        let rhs = Point(self.lattice.iter().map(|b| p.dot(b)).collect());
        g.inverse().expect("independent").apply(&rhs).0
    }

    /// Canonical representative of `p + lattice` with lattice coordinates in
    /// `[0, 1)`.
    pub fn reduce(&self, p: &Point) -> Point {
        let mut out = p.clone();
        for (c, g) in self.lattice_coords(p).iter().zip(&self.lattice) {
            let k = ExactScalar::from_bigint(c.floor());
            out = &out - &g.scale(&k);
        }
        out
    }

    pub fn contains(&self, p: &Point) -> bool {
        let r = self.reduce(p);
        self.offsets.contains(&r)
    }

    pub fn translated(&self, c: &Point) -> Result<SpectrumSpec> {
        SpectrumSpec::new_unanchored(
            self.dimension,
            self.offsets.iter().map(|o| o + c).collect(),
            self.lattice.clone(),
        )
    }

    pub fn offsets_f64(&self) -> Vec<Vec<f64>> {
        self.offsets.iter().map(Point::to_f64).collect()
    }

    pub fn lattice_f64(&self) -> Vec<Vec<f64>> {
        self.lattice.iter().map(Point::to_f64).collect()
    }

    /// Coefficient vectors `(offset index, n)` of points within `radius` of
    /// `center` (float geometry, boundary inclusive up to 1e-12 relative).
    pub fn coefficients_in_ball(&self, center: &[f64], radius: f64) -> Result<Vec<(usize, Vec<i64>)>> {
        let gens = self.lattice_f64();
        let mut out = Vec::new();
        for (i, o) in self.offsets_f64().iter().enumerate() {
            for n in lattice_walk(&gens, o, center, radius)? {
                out.push((i, n));
            }
        }
        Ok(out)
    }

    pub fn point_f64(&self, offset: usize, n: &[i64]) -> Vec<f64> {
        let mut p = self.offsets[offset].to_f64();
        for (k, g) in n.iter().zip(self.lattice_f64()) {
            for (pi, gi) in p.iter_mut().zip(g) {
                *pi += *k as f64 * gi;
            }
        }
        p
    }

    pub fn point_exact(&self, offset: usize, n: &[i64]) -> Point {
        let mut p = self.offsets[offset].clone();
        for (k, g) in n.iter().zip(&self.lattice) {
            p = &p + &g.scale(&ExactScalar::int(*k));
        }
        p
    }

    pub fn points_in_ball(&self, center: &[f64], radius: f64) -> Result<Vec<Vec<f64>>> {
        Ok(self
            .coefficients_in_ball(center, radius)?
            .into_iter()
            .map(|(i, n)| self.point_f64(i, &n))
            .collect())
    }

    pub fn exact_points_in_ball(&self, radius: f64) -> Result<Vec<Point>> {
        let c = vec![0.0; self.dimension];
        Ok(self
            .coefficients_in_ball(&c, radius)?
            .into_iter()
            .map(|(i, n)| self.point_exact(i, &n))
            .collect())
    }

    /// Projection onto coordinate axis `axis` as a periodic set; requires a
    /// rank-one lattice whose generator has nonzero `axis` component.
    pub fn coordinate_projection(&self, axis: usize) -> Option<PeriodicSet1D> {
        if self.rank() != 1 {
            return None;
        }
        let period = self.lattice[0].0[axis].abs();
        if period.is_zero() {
            return None;
        }
        PeriodicSet1D::new(self.offsets.iter().map(|o| o.0[axis].clone()).collect(), period).ok()
    }

    /// No two distinct points on a common vertical or horizontal line.
    pub fn multiplicity_one(&self) -> bool {
        (0..self.dimension).all(|axis| match self.coordinate_projection(axis) {
            Some(p) => p.offsets.windows(2).all(|w| w[0] != w[1]),
            None => false,
        })
    }
}

/// Integer coefficient vectors `n` with `|base + Σ nᵢgᵢ − center| ≤ r`.
pub(crate) fn lattice_walk(gens: &[Vec<f64>], base: &[f64], center: &[f64], r: f64) -> Result<Vec<Vec<i64>>> {
    let r = r * (1.0 + 1e-12) + 1e-12;
    let shift: Vec<f64> = base.iter().zip(center).map(|(b, c)| b - c).collect();
    match gens.len() {
        0 => Ok(if norm(&shift) <= r { vec![vec![]] } else { vec![] }),
        1 => Ok(range_on_line(&gens[0], &shift, r)
            .map(|(lo, hi)| (lo..=hi).map(|n| vec![n]).collect())
            .unwrap_or_default()),
        2 => {
            let (lo, hi) = first_coefficient_range(gens, &shift, r);
            let mut out = Vec::new();
            for n1 in lo..=hi {
                let s: Vec<f64> = shift.iter().zip(&gens[0]).map(|(a, g)| a + n1 as f64 * g).collect();
                if let Some((a, b)) = range_on_line(&gens[1], &s, r) {
                    out.extend((a..=b).map(|n2| vec![n1, n2]));
                }
            }
            Ok(out)
        }
        _ => Err(Error::Unsupported("lattices of rank above 2".into())),
    }
}

/// Number of lattice points in the ball without materializing them.
pub(crate) fn lattice_count(gens: &[Vec<f64>], base: &[f64], center: &[f64], r: f64) -> Result<u64> {
    let r = r * (1.0 + 1e-12) + 1e-12;
    let shift: Vec<f64> = base.iter().zip(center).map(|(b, c)| b - c).collect();
    let span = |x: Option<(i64, i64)>| x.map_or(0, |(a, b)| (b - a + 1) as u64);
    match gens.len() {
        0 => Ok(u64::from(norm(&shift) <= r)),
        1 => Ok(span(range_on_line(&gens[0], &shift, r))),
        2 => {
            let (lo, hi) = first_coefficient_range(gens, &shift, r);
            Ok((lo..=hi)
                .map(|n1| {
                    let s: Vec<f64> = shift.iter().zip(&gens[0]).map(|(a, g)| a + n1 as f64 * g).collect();
                    span(range_on_line(&gens[1], &s, r))
                })
                .sum())
        }
        _ => Err(Error::Unsupported("lattices of rank above 2".into())),
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Integer range of `n` with `|s + n·g| ≤ r`.
fn range_on_line(g: &[f64], s: &[f64], r: f64) -> Option<(i64, i64)> {
    let a = dot(g, g);
    let b = 2.0 * dot(g, s);
    let c = dot(s, s) - r * r;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let lo = ((-b - sq) / (2.0 * a)).ceil() as i64;
    let hi = ((-b + sq) / (2.0 * a)).floor() as i64;
    (lo <= hi).then_some((lo, hi))
}

/// Range of the first coefficient via the dual vector `g₁*` (with
/// `⟨g₁*, g₁⟩ = 1`, `⟨g₁*, g₂⟩ = 0`).
fn first_coefficient_range(gens: &[Vec<f64>], shift: &[f64], r: f64) -> (i64, i64) {
    let (g1, g2) = (&gens[0], &gens[1]);
    let (a, b, c) = (dot(g1, g1), dot(g1, g2), dot(g2, g2));
    let det = a * c - b * b;
    let dual: Vec<f64> = g1.iter().zip(g2).map(|(x, y)| (c * x - b * y) / det).collect();
    let centre = -dot(shift, &dual);
    let w = r * norm(&dual);
    ((centre - w).ceil() as i64, (centre + w).floor() as i64)
}

/// `offsets + period·Z` on the line; repeated offsets are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicSet1D {
    pub offsets: Vec<ExactScalar>,
    pub period: ExactScalar,
}

impl PeriodicSet1D {
    pub fn new(offsets: Vec<ExactScalar>, period: ExactScalar) -> Result<Self> {
        if !period.is_positive() {
            return Err(Error::InvalidSpectrum("period must be positive".into()));
        }
        let mut red: Vec<ExactScalar> = offsets
            .iter()
            .map(|o| {
                let k = o.checked_div(&period).expect("positive period").floor();
                o - &(&period * &ExactScalar::from_bigint(k))
            })
            .collect();
        red.sort();
        if !red.first().is_some_and(ExactScalar::is_zero) {
            return Err(Error::InvalidSpectrum("periodic set must contain 0".into()));
        }
        Ok(PeriodicSet1D { offsets: red, period })
    }

    pub fn scaled(&self, k: &ExactScalar) -> Result<Self> {
        PeriodicSet1D::new(self.offsets.iter().map(|o| o * k).collect(), &self.period * k)
    }

    /// Points per unit length.
    pub fn density(&self) -> ExactScalar {
        ExactScalar::int(self.offsets.len() as i64)
            .checked_div(&self.period)
            .expect("positive period")
    }

    pub fn to_spectrum(&self) -> Result<SpectrumSpec> {
        SpectrumSpec::new(
            1,
            self.offsets.iter().cloned().map(Point::scalar).collect(),
            vec![Point::scalar(self.period.clone())],
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabeledSpectrum {
    pub condition: Condition,
    pub line: SpectrumLine,
    pub spectrum: SpectrumSpec,
}

/// One line spectrum per satisfied condition.
pub fn cross_line_spectrum(c: &CrossConfig) -> Result<Vec<LabeledSpectrum>> {
    let conds = cross_conditions(c);
    if conds.is_empty() {
        return Err(Error::NotSpectral(format!(
            "cross (t1={}, t2={}, T1={}, T2={}) satisfies no spectrality condition",
            c.t1, c.t2, c.len1, c.len2
        )));
    }
    let half = ExactScalar::ratio(1, 2);
    let mut out = Vec::new();
    for cond in conds {
        let (line, offsets, gen) = match cond {
            Condition::SumEven => (
                SpectrumLine::Minus,
                vec![Point::zeros(2)],
                Point::xy(half.clone(), -&half),
            ),
            Condition::ShiftedDifferenceEven => (
                SpectrumLine::Plus,
                vec![Point::zeros(2)],
                Point::xy(half.clone(), half.clone()),
            ),
            Condition::SumInteger => {
                let n = &(&c.t1 + &c.t2) + &ExactScalar::one();
                let alpha = ExactScalar::one().checked_div(&(&ExactScalar::int(2) * &n))?;
                (
                    SpectrumLine::Minus,
                    vec![Point::zeros(2), Point::xy(alpha.clone(), -&alpha)],
                    Point::int2(1, -1),
                )
            }
            Condition::DifferenceInteger => {
                let n = &c.t1 - &c.t2;
                let alpha = ExactScalar::one().checked_div(&(&ExactScalar::int(2) * &n))?;
                (
                    SpectrumLine::Plus,
                    vec![Point::zeros(2), Point::xy(alpha.clone(), alpha)],
                    Point::int2(1, 1),
                )
            }
            _ => unreachable!("cross conditions only"),
        };
        out.push(LabeledSpectrum {
            condition: cond,
            line,
            spectrum: SpectrumSpec::new(2, offsets, vec![gen])?,
        });
    }
    Ok(out)
}

/// Spectrum of uniform measure on two collinear intervals at the given
/// scale.  Internally the lengths are rescaled to sum to 2; the returned
/// set is scaled back to the caller's units.
pub fn two_interval_spectrum_1d(len1: &ExactScalar, len2: &ExactScalar, gap: &ExactScalar) -> Result<PeriodicSet1D> {
    let verdict = crate::classify::classify_collinear(len1, len2, gap)?;
    if !verdict.spectral {
        return Err(Error::NotSpectral(format!(
            "intervals of lengths {len1}, {len2} with gap {gap}"
        )));
    }
    let scale = ExactScalar::int(2).checked_div(&(len1 + len2))?;
    let (l1, l2, g) = (len1 * &scale, len2 * &scale, gap * &scale);
    let normalized = if l1 == l2 {
        let alpha = ExactScalar::one().checked_div(&(&ExactScalar::int(2) * &(&g + &ExactScalar::one())))?;
        PeriodicSet1D::new(vec![ExactScalar::zero(), alpha], ExactScalar::one())?
    } else {
        PeriodicSet1D::new(vec![ExactScalar::zero()], ExactScalar::ratio(1, 2))?
    };
    // x_orig = x_norm / scale, so frequencies scale by `scale`.
    normalized.scaled(&scale)
}

fn parallel_pair(seg1: &SegmentPiece, seg2: &SegmentPiece) -> Result<(Point, ExactScalar)> {
    let d1 = seg1.direction();
    let d2 = seg2.direction();
    if d1.dim() != 2 || d2.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: d1.dim(),
        });
    }
    if !d1.cross(&d2).is_zero() {
        return Err(Error::InvalidConfig("segments are not parallel".into()));
    }
    if d1.cross(&(&seg2.from - &seg1.from)).is_zero() {
        return Err(Error::Collinear);
    }
    let c = d2.dot(&d1).checked_div(&d1.norm_sq())?;
    Ok((d1, c))
}

/// A direction `v` whose projection sends the pair to two intervals with
/// gap equal to `k` times the sum of their lengths.
pub fn choose_projection_line(seg1: &SegmentPiece, seg2: &SegmentPiece, k: u32) -> Result<LineDir> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be a positive integer".into()));
    }
    let (d1, c) = parallel_pair(seg1, seg2)?;
    let w = &seg2.midpoint() - &seg1.midpoint();
    // ⟨w, u⟩ = (2k+1)·(1+|c|)/2·⟨d₁, u⟩ makes the gap k times the total.
    let f = &ExactScalar::int(2 * k as i64 + 1) * &(&(&ExactScalar::one() + &c.abs()) * &ExactScalar::ratio(1, 2));
    let z = &w - &d1.scale(&f);
    LineDir::new(z.perp().sign_normalized())
}

/// A direction onto which the pair projects to a single interval: the
/// start of one segment lands on the end of the other.
pub fn single_interval_projection_line(seg1: &SegmentPiece, seg2: &SegmentPiece) -> Result<LineDir> {
    let (_, c) = parallel_pair(seg1, seg2)?;
    let b2 = if c.is_positive() { &seg2.to } else { &seg2.from };
    LineDir::new((b2 - &seg1.from).perp().sign_normalized())
}

pub fn lift_1d_spectrum(s: &PeriodicSet1D, line: &LineDir) -> Result<SpectrumSpec> {
    let u = line.lift_vector();
    SpectrumSpec::new(
        u.dim(),
        s.offsets.iter().map(|o| u.scale(o)).collect(),
        vec![u.scale(&s.period)],
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectedSpectrum {
    pub line: LineDir,
    /// Spectrum of the projected measure, in projection coordinates.
    pub one_d: PeriodicSet1D,
    pub spectrum: SpectrumSpec,
    /// Projected gap divided by the total projected length.
    pub gap_ratio: ExactScalar,
}

fn projected_intervals(
    seg1: &SegmentPiece,
    seg2: &SegmentPiece,
    line: &LineDir,
) -> Result<Vec<(ExactScalar, ExactScalar)>> {
    let m = Measure::new(2, vec![], vec![seg1.clone(), seg2.clone()])?;
    let p = project_to_line(&m, line)?;
    if !p.multiplicity.is_injective() {
        return Err(Error::InvalidConfig("projection is not injective".into()));
    }
    let mut iv: Vec<_> = p
        .measure
        .segments
        .iter()
        .map(|s| (s.from.0[0].clone(), s.to.0[0].clone()))
        .collect();
    iv.sort();
    Ok(iv)
}

/// Line spectrum of a parallel pair through the projection of
/// [`choose_projection_line`].
pub fn parallel_spectrum(seg1: &SegmentPiece, seg2: &SegmentPiece, k: u32) -> Result<ProjectedSpectrum> {
    let line = choose_projection_line(seg1, seg2, k)?;
    let iv = projected_intervals(seg1, seg2, &line)?;
    let (l1, l2) = (&iv[0].1 - &iv[0].0, &iv[1].1 - &iv[1].0);
    let gap = &iv[1].0 - &iv[0].1;
    let gap_ratio = gap.checked_div(&(&l1 + &l2))?;
    let one_d = two_interval_spectrum_1d(&l1, &l2, &gap)?;
    let spectrum = lift_1d_spectrum(&one_d, &line)?;
    Ok(ProjectedSpectrum {
        line,
        one_d,
        spectrum,
        gap_ratio,
    })
}

/// Spectrum through a projection onto a single interval.
pub fn single_interval_spectrum(seg1: &SegmentPiece, seg2: &SegmentPiece) -> Result<ProjectedSpectrum> {
    let line = single_interval_projection_line(seg1, seg2)?;
    let iv = projected_intervals(seg1, seg2, &line)?;
    if iv[0].1 != iv[1].0 {
        return Err(Error::InvalidConfig("projections do not abut".into()));
    }
    let total = &iv[1].1 - &iv[0].0;
    let one_d = PeriodicSet1D::new(vec![ExactScalar::zero()], total.inv()?)?;
    let spectrum = lift_1d_spectrum(&one_d, &line)?;
    Ok(ProjectedSpectrum {
        line,
        one_d,
        spectrum,
        gap_ratio: ExactScalar::zero(),
    })
}

/// Orthogonal splitting `R^d = V ⊕ V⊥`: the rows of `basis` are pairwise
/// orthogonal, and the first `v_dim` of them span `V`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub basis: Matrix,
    pub v_dim: usize,
}

impl Split {
    pub fn new(basis: Matrix, v_dim: usize) -> Result<Self> {
        let d = basis.dim();
        if v_dim > d {
            return Err(Error::InvalidConfig("v_dim exceeds dimension".into()));
        }
        for i in 0..d {
            let ri = Point(basis.rows[i].clone());
            if ri.is_zero() {
                return Err(Error::InvalidConfig("zero basis row".into()));
            }
            for j in i + 1..d {
                if !ri.dot(&Point(basis.rows[j].clone())).is_zero() {
                    return Err(Error::InvalidConfig("basis rows must be pairwise orthogonal".into()));
                }
            }
        }
        Ok(Split { basis, v_dim })
    }

    fn rows(&self, range: std::ops::Range<usize>) -> Vec<Point> {
        self.basis.rows[range].iter().cloned().map(Point).collect()
    }

    pub fn in_v(&self, p: &Point) -> bool {
        self.rows(self.v_dim..self.basis.dim())
            .iter()
            .all(|r| r.dot(p).is_zero())
    }

    pub fn in_complement(&self, p: &Point) -> bool {
        self.rows(0..self.v_dim).iter().all(|r| r.dot(p).is_zero())
    }
}

/// `L + M` as a spectrum of a convolution whose factors have spectra
/// `L ⊂ V` and `M ⊂ V⊥`.
pub fn sumset_spectrum(l: &SpectrumSpec, m: &SpectrumSpec, split: &Split) -> Result<SpectrumSpec> {
    if l.dimension != m.dimension || l.dimension != split.basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dimension,
            found: m.dimension,
        });
    }
    if !l.offsets.iter().chain(&l.lattice).all(|p| split.in_v(p)) {
        return Err(Error::InvalidConfig("first spectrum is not contained in V".into()));
    }
    if !m.offsets.iter().chain(&m.lattice).all(|p| split.in_complement(p)) {
        return Err(Error::InvalidConfig(
            "second spectrum is not contained in the complement of V".into(),
        ));
    }
    let offsets = l
        .offsets
        .iter()
        .flat_map(|a| m.offsets.iter().map(move |b| a + b))
        .collect();
    let lattice = l.lattice.iter().chain(&m.lattice).cloned().collect();
    SpectrumSpec::new(l.dimension, offsets, lattice)
}

/// Whether the support of `nu` lies in a translate of `V⊥`.
pub fn supported_in_complement_translate(nu: &Measure, split: &Split) -> bool {
    let pts: Vec<&Point> = nu
        .atoms
        .iter()
        .map(|a| &a.at)
        .chain(nu.segments.iter().flat_map(|s| [&s.from, &s.to]))
        .collect();
    pts.iter().all(|p| split.in_complement(&(*p - pts[0])))
}

/// Spectrum `{0, 1/(nh), …, (n−1)/(nh)}·u` of `n` equal atoms spaced `h`
/// apart along the unit direction `u` of `axis`.
pub fn equal_spaced_atoms_spectrum(n: u32, h: &ExactScalar, axis: &LineDir) -> Result<SpectrumSpec> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    if h.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let norm = axis
        .exact_norm()
        .ok_or_else(|| Error::Unsupported("axis length is not in Q[sqrt2]".into()))?;
    let u = axis.direction.scale(&norm.inv()?);
    let step = (&ExactScalar::int(n as i64) * h).inv()?;
    let offsets = (0..n)
        .map(|k| u.scale(&(&step * &ExactScalar::int(k as i64))))
        .collect();
    SpectrumSpec::new(axis.direction.dim(), offsets, vec![])
}

/// If `Λ` is a spectrum of `T_#μ` with `T(x) = Ax + b`, then `AᵀΛ` is a
/// spectrum of `μ`.
pub fn pullback_spectrum_affine(s: &SpectrumSpec, a: &Matrix) -> Result<SpectrumSpec> {
    if a.dim() != s.dimension {
        return Err(Error::DimensionMismatch {
            expected: s.dimension,
            found: a.dim(),
        });
    }
    if a.det().is_zero() {
        return Err(Error::SingularMap);
    }
    let at = a.transpose();
    SpectrumSpec::new(
        s.dimension,
        s.offsets.iter().map(|o| at.apply(o)).collect(),
        s.lattice.iter().map(|g| at.apply(g)).collect(),
    )
}

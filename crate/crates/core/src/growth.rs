//! Growth of orthogonal sets: ball counts, Fourier energy, dyadic entropy
//! and Ahlfors-regularity estimates.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{Measure, NumericMeasure, Point};
use crate::scalar::ExactScalar;
use crate::spectra::{lattice_count, SpectrumSpec};
use crate::verify::Neumaier;

/// `#(Λ ∩ B(center, r))`, boundary inclusive.
pub fn count_in_ball(s: &SpectrumSpec, center: &[f64], r: f64) -> Result<u64> {
    if center.len() != s.dimension {
        return Err(Error::DimensionMismatch {
            expected: s.dimension,
            found: center.len(),
        });
    }
    let gens = s.lattice_f64();
    s.offsets_f64().iter().map(|o| lattice_count(&gens, o, center, r)).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthSample {
    pub center: Vec<f64>,
    pub radius: f64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthProfile {
    pub samples: Vec<GrowthSample>,
    /// Least-squares fit of `max_center count(R) ≈ slope·R + intercept`.
    pub slope: f64,
    pub intercept: f64,
    pub max_ratio: f64,
    /// Relative change of `count/R` across the top decade of radii.
    pub top_decade_change: f64,
    pub superlinear: bool,
}

pub const GRID_POINTS: usize = 25;

pub const DEFAULT_EPSILON: f64 = 0.5;

/// Log-spaced radii `1 … rmax`.
pub fn log_radii(rmax: f64, n: usize) -> Vec<f64> {
    if n < 2 || rmax <= 1.0 {
        return vec![rmax];
    }
    (0..n).map(|i| rmax.powf(i as f64 / (n - 1) as f64)).collect()
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if xs.len() < 2 || sxx <= 0.0 {
        return Err(Error::DegenerateRegression(
            "need at least two distinct abscissae".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

pub fn growth_profile(s: &SpectrumSpec, rmax: f64, centers: &[Vec<f64>]) -> Result<GrowthProfile> {
    if rmax < 1.0 {
        return Err(Error::InvalidConfig("rmax must be at least 1".into()));
    }
    let centers: Vec<Vec<f64>> = if centers.is_empty() {
        vec![vec![0.0; s.dimension]]
    } else {
        centers.to_vec()
    };
    let radii = log_radii(rmax, GRID_POINTS);
    let mut samples = Vec::new();
    let mut best = vec![0u64; radii.len()];
    for c in &centers {
        for (k, r) in radii.iter().enumerate() {
            let count = count_in_ball(s, c, *r)?;
            best[k] = best[k].max(count);
            samples.push(GrowthSample {
                center: c.clone(),
                radius: *r,
                count,
            });
        }
    }
    let ys: Vec<f64> = best.iter().map(|c| *c as f64).collect();
    let (slope, intercept) = if radii.len() >= 2 {
        least_squares(&radii, &ys)?
    } else {
        (ys[0] / radii[0], 0.0)
    };
    let ratios: Vec<f64> = ys.iter().zip(&radii).map(|(y, r)| y / r).collect();
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    // Ratio at the radius closest to rmax/10 against the ratio at rmax.
    let lo = radii
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - rmax / 10.0).abs().total_cmp(&(b.1 - rmax / 10.0).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let hi = radii.len() - 1;
    let top_decade_change = if ratios[lo] > 0.0 {
        ratios[hi] / ratios[lo] - 1.0
    } else {
        0.0
    };
    Ok(GrowthProfile {
        samples,
        slope,
        intercept,
        max_ratio,
        top_decade_change,
        superlinear: top_decade_change > 0.10,
    })
}

/// Midpoint-rule estimate of `∫_{|t|<R} |μ̂(t)|² dt` for the probability
/// normalization of `m`.
pub fn fourier_energy(m: &Measure, r: f64, step: f64) -> Result<f64> {
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::InvalidConfig("grid step must lie in (0, 0.1]".into()));
    }
    if r <= 0.0 {
        return Err(Error::InvalidConfig("radius must be positive".into()));
    }
    let nm = m.normalized().0.numeric();
    let k = (r / step).ceil() as i64;
    let coord = |i: i64| (i as f64 + 0.5) * step;
    let cell = step.powi(m.dimension as i32);
    match m.dimension {
        1 => {
            let mut acc = Neumaier::default();
            for i in -k..k {
                let t = coord(i);
                if t.abs() < r {
                    acc.add(nm.abs_sq(&[t]));
                }
            }
            Ok(acc.value() * cell)
        }
        2 => {
            let rows: Vec<f64> = (-k..k)
                .into_par_iter()
                .map(|i| row_energy(&nm, coord(i), k, step, r))
                .collect();
            let mut acc = Neumaier::default();
            for v in rows {
                acc.add(v);
            }
            Ok(acc.value() * cell)
        }
        d => Err(Error::Unsupported(format!("energy quadrature in dimension {d}"))),
    }
}

fn row_energy(nm: &NumericMeasure, x: f64, k: i64, step: f64, r: f64) -> f64 {
    let mut acc = Neumaier::default();
    for j in -k..k {
        let y = (j as f64 + 0.5) * step;
        if x * x + y * y < r * r {
            acc.add(nm.abs_sq(&[x, y]));
        }
    }
    acc.value()
}

/// Default quadrature step: fine enough for the oscillation scale of the
/// support.
pub fn default_energy_step(m: &Measure) -> f64 {
    let diam = m.diameter();
    if diam <= 0.0 {
        0.05
    } else {
        0.05f64.min(1.0 / (4.0 * diam))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevEstimate {
    pub dimension: usize,
    pub energies: Vec<(f64, f64)>,
    /// Slope of `log energy` against `log R`.
    pub slope: f64,
    /// `d − slope`.
    pub alpha: f64,
    /// The energy has (numerically) stopped growing.
    pub saturated: bool,
}

pub const SATURATION_SLOPE: f64 = 0.1;

pub fn lev_exponent_estimate(m: &Measure, radii: &[f64], step: f64) -> Result<LevEstimate> {
    if radii.len() < 3 {
        return Err(Error::DegenerateRegression("at least three radii are required".into()));
    }
    let energies: Vec<(f64, f64)> = radii
        .iter()
        .map(|r| Ok((*r, fourier_energy(m, *r, step)?)))
        .collect::<Result<_>>()?;
    if energies.iter().any(|(_, e)| *e <= 0.0) {
        return Err(Error::DegenerateRegression("nonpositive energy".into()));
    }
    let xs: Vec<f64> = energies.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = energies.iter().map(|(_, e)| e.ln()).collect();
    let (slope, _) = least_squares(&xs, &ys)?;
    Ok(LevEstimate {
        dimension: m.dimension,
        energies,
        slope,
        alpha: m.dimension as f64 - slope,
        saturated: slope < SATURATION_SLOPE,
    })
}

// ---------------------------------------------------------------------------
// Dyadic partitions

/// A piece of the measure inside one dyadic cell.
#[derive(Clone, Debug, PartialEq)]
pub enum CellPiece {
    Atom(Point, ExactScalar),
    Segment(Point, Point, ExactScalar),
}

pub type Cell = Vec<i64>;

fn cell_of(p: &Point, scale: &ExactScalar) -> Result<Cell> {
    p.0.iter()
        .map(|c| {
            let f = (c * scale).floor();
            i64::try_from(f).map_err(|_| Error::Unsupported("cell index out of range".into()))
        })
        .collect()
}

/// Restrictions of the probability normalization of `m` to the half-open
/// cells `Π [kᵢ/2ⁿ, (kᵢ+1)/2ⁿ)`, computed exactly.
pub fn dyadic_pieces(m: &Measure, n: u32) -> Result<BTreeMap<Cell, Vec<CellPiece>>> {
    let (m, _) = m.normalized();
    let scale = ExactScalar::from_bigint(num_bigint::BigInt::from(1u64) << n);
    let mut out: BTreeMap<Cell, Vec<CellPiece>> = BTreeMap::new();
    for a in &m.atoms {
        out.entry(cell_of(&a.at, &scale)?)
            .or_default()
            .push(CellPiece::Atom(a.at.clone(), a.mass.clone()));
    }
    for s in &m.segments {
        let d = s.direction();
        let mut ts = vec![ExactScalar::zero(), ExactScalar::one()];
        for (pi, di) in s.from.0.iter().zip(&d.0) {
            if di.is_zero() {
                continue;
            }
            // Grid lines j/2ⁿ crossed by this coordinate.
            let (a, b) = (pi * &scale, &(pi + di) * &scale);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let mut j: num_bigint::BigInt = lo.floor() + 1;
            while ExactScalar::from_bigint(j.clone()) < hi {
                let t = (&ExactScalar::from_bigint(j.clone()).checked_div(&scale)? - pi).checked_div(di)?;
                ts.push(t);
                j += 1;
            }
        }
        ts.sort();
        ts.dedup();
        let point_at = |t: &ExactScalar| &s.from + &d.scale(t);
        for w in ts.windows(2) {
            let mid = (&w[0] + &w[1]) * ExactScalar::ratio(1, 2);
            out.entry(cell_of(&point_at(&mid), &scale)?)
                .or_default()
                .push(CellPiece::Segment(
                    point_at(&w[0]),
                    point_at(&w[1]),
                    &s.mass * &(&w[1] - &w[0]),
                ));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicMasses {
    pub level: u32,
    pub cells: BTreeMap<Cell, ExactScalar>,
}

impl DyadicMasses {
    /// `H_n = Σ −μ(D) log₂ μ(D)`.
    pub fn entropy(&self) -> f64 {
        self.cells
            .values()
            .map(|m| m.to_f64())
            .filter(|m| *m > 0.0)
            .map(|m| -m * m.log2())
            .sum()
    }

    pub fn total(&self) -> ExactScalar {
        self.cells.values().sum()
    }

    /// Masses of the parent partition (level `n − 1`).
    pub fn coarsen(&self) -> DyadicMasses {
        let mut cells: BTreeMap<Cell, ExactScalar> = BTreeMap::new();
        for (k, v) in &self.cells {
            let parent: Cell = k.iter().map(|x| x.div_euclid(2)).collect();
            *cells.entry(parent).or_insert_with(ExactScalar::zero) += v;
        }
        DyadicMasses {
            level: self.level.saturating_sub(1),
            cells,
        }
    }
}

pub fn dyadic_masses(m: &Measure, n: u32) -> Result<DyadicMasses> {
    let cells = dyadic_pieces(m, n)?
        .into_iter()
        .map(|(k, pieces)| {
            let total: ExactScalar = pieces
                .iter()
                .map(|p| match p {
                    CellPiece::Atom(_, w) | CellPiece::Segment(_, _, w) => w.clone(),
                })
                .sum();
            (k, total)
        })
        .filter(|(_, v)| !v.is_zero())
        .collect();
    Ok(DyadicMasses { level: n, cells })
}

// ---------------------------------------------------------------------------
// Entropy bound on ball counts

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyRow {
    pub h: f64,
    pub level: u32,
    pub entropy: f64,
    pub max_count: u64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyReport {
    pub epsilon: f64,
    /// Numeric estimate of the radius on which every rescaled cell
    /// transform stays above `epsilon`.
    pub delta_estimate: f64,
    pub rho: u32,
    pub fitted_c: f64,
    pub rows: Vec<EntropyRow>,
    pub centers_sampled: usize,
    pub holds: bool,
}

const DIRECTIONS_2D: usize = 32;

/// Minimum over occupied cells at `level` and sampled `ξ` with `|ξ| = ρ` of
/// the rescaled cell transform `|μ̂_D^□(ξ)|`.
fn min_cell_transform(cells: &[(Vec<f64>, NumericMeasure)], dim: usize, rho: f64) -> f64 {
    let dirs: Vec<Vec<f64>> = match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        _ => (0..DIRECTIONS_2D)
            .map(|k| {
                let a = std::f64::consts::PI * k as f64 / DIRECTIONS_2D as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
    };
    cells
        .iter()
        .flat_map(|(_, nm)| {
            dirs.iter().map(move |d| {
                let xi: Vec<f64> = d.iter().map(|x| x * rho).collect();
                nm.eval(&xi).norm() / nm.total_mass()
            })
        })
        .fold(f64::INFINITY, f64::min)
}

/// Rescaled cell measures `x ↦ 2ⁿx − k` at `level`, as float snapshots.
fn rescaled_cells(m: &Measure, level: u32) -> Result<Vec<(Vec<f64>, NumericMeasure)>> {
    let scale = ExactScalar::from_bigint(num_bigint::BigInt::from(1u64) << level);
    let map = |p: &Point, k: &Cell| {
        Point(
            p.0.iter()
                .zip(k)
                .map(|(c, ki)| &(c * &scale) - &ExactScalar::int(*ki))
                .collect(),
        )
    };
    dyadic_pieces(m, level)?
        .into_iter()
        .map(|(k, pieces)| {
            let mut atoms = Vec::new();
            let mut segs = Vec::new();
            for p in pieces {
                match p {
                    CellPiece::Atom(a, w) => atoms.push(crate::measure::AtomPiece {
                        at: map(&a, &k),
                        mass: w,
                    }),
                    CellPiece::Segment(a, b, w) => segs.push(crate::measure::SegmentPiece {
                        from: map(&a, &k),
                        to: map(&b, &k),
                        mass: w,
                    }),
                }
            }
            let cell = Measure::new_allow_overlap(m.dimension, atoms, segs)?;
            Ok((k.iter().map(|x| *x as f64).collect(), cell.numeric()))
        })
        .collect()
}

/// Largest `δ ≤ 1` (by bisection) such that the rescaled cell transforms at
/// levels `0..=max_level` stay above `epsilon` on `|ξ| < δ`.
pub fn estimate_delta(m: &Measure, epsilon: f64, max_level: u32) -> Result<f64> {
    let mut cells = Vec::new();
    for level in 0..=max_level {
        cells.extend(rescaled_cells(m, level)?);
    }
    let ok = |rho: f64| {
        // Check the whole radial segment on a coarse grid as well as the end.
        (1..=8).all(|i| min_cell_transform(&cells, m.dimension, rho * i as f64 / 8.0) > epsilon)
    };
    if ok(1.0) {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Checks `#(Λ ∩ B(t, h)) ≤ C·2^{H_{n_h+ϱ}}` for sampled centers `t`, with
/// `n_h = ⌈log₂ h⌉`, `ϱ` the least integer with `2^{−ϱ} < δ`, and a single
/// constant `C` fitted at the smallest `h`.
pub fn entropy_bound_check(
    m: &Measure,
    s: &SpectrumSpec,
    hs: &[f64],
    epsilon: f64,
    seed: u64,
) -> Result<EntropyReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidConfig("epsilon must lie in (0, 1)".into()));
    }
    if hs.is_empty() || hs.iter().any(|h| *h <= 0.0) {
        return Err(Error::InvalidConfig("radii must be positive".into()));
    }
    if m.dimension != s.dimension {
        return Err(Error::DimensionMismatch {
            expected: m.dimension,
            found: s.dimension,
        });
    }
    let delta = estimate_delta(m, epsilon, 3)?;
    let mut rho = 0u32;
    while 2f64.powi(-(rho as i32)) >= delta {
        rho += 1;
    }
    let mut hs = hs.to_vec();
    hs.sort_by(f64::total_cmp);

    // Centers: origin, offsets, offset midpoints, offsets shifted by half a
    // generator (where ball counts peak), and seeded random points.
    let mut centers: Vec<Vec<f64>> = vec![vec![0.0; s.dimension]];
    let offs = s.offsets_f64();
    centers.extend(offs.iter().cloned());
    for (i, a) in offs.iter().enumerate() {
        for b in &offs[i + 1..] {
            centers.push(a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect());
        }
        for g in s.lattice_f64() {
            centers.push(a.iter().zip(&g).map(|(x, y)| x + 0.5 * y).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = 2.0 * hs[hs.len() - 1];
    for _ in 0..16 {
        centers.push((0..s.dimension).map(|_| rng.gen_range(-spread..spread)).collect());
    }

    let mut rows = Vec::new();
    for h in &hs {
        let nh = h.log2().ceil().max(0.0) as u32;
        let level = nh + rho;
        let entropy = dyadic_masses(m, level)?.entropy();
        let max_count = centers
            .iter()
            .map(|c| count_in_ball(s, c, *h))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .max()
            .unwrap_or(0);
        rows.push(EntropyRow {
            h: *h,
            level,
            entropy,
            max_count,
            bound: 0.0,
            holds: true,
        });
    }
    let fitted_c = rows[0].max_count as f64 / 2f64.powf(rows[0].entropy);
    for r in &mut rows {
        r.bound = fitted_c * 2f64.powf(r.entropy);
        r.holds = r.max_count as f64 <= r.bound * (1.0 + 1e-9);
    }
    let holds = rows.iter().all(|r| r.holds);
    Ok(EntropyReport {
        epsilon,
        delta_estimate: delta,
        rho,
        fitted_c,
        rows,
        centers_sampled: centers.len(),
        holds,
    })
}

// ---------------------------------------------------------------------------
// Ahlfors–David regularity

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AhlforsEstimate {
    pub s: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    pub samples: usize,
}

/// `μ(B(x, r))` for the measure as given.
pub fn ball_mass(m: &Measure, x: &[f64], r: f64) -> f64 {
    let mut acc = Neumaier::default();
    for a in &m.atoms {
        let p = a.at.to_f64();
        let d2: f64 = p.iter().zip(x).map(|(u, v)| (u - v).powi(2)).sum();
        if d2 <= r * r {
            acc.add(a.mass.to_f64());
        }
    }
    for s in &m.segments {
        let (p, q) = (s.from.to_f64(), s.to.to_f64());
        let d: Vec<f64> = q.iter().zip(&p).map(|(a, b)| a - b).collect();
        let w: Vec<f64> = p.iter().zip(x).map(|(a, b)| a - b).collect();
        // |w + t d|² ≤ r² for t ∈ [0, 1].
        let a2: f64 = d.iter().map(|v| v * v).sum();
        let b: f64 = 2.0 * d.iter().zip(&w).map(|(u, v)| u * v).sum::<f64>();
        let c: f64 = w.iter().map(|v| v * v).sum::<f64>() - r * r;
        let disc = b * b - 4.0 * a2 * c;
        if disc < 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        let lo = ((-b - sq) / (2.0 * a2)).max(0.0);
        let hi = ((-b + sq) / (2.0 * a2)).min(1.0);
        if hi > lo {
            acc.add(s.mass.to_f64() * (hi - lo));
        }
    }
    acc.value()
}

/// Empirical `min`/`max` of `μ(B(x, r)) / r^s` over support points `x`
/// (atoms, segment endpoints, and seeded random points) and radii
/// `r = diam·2^{−k}`, `k = 0..10`.
pub fn ahlfors_estimate(m: &Measure, s_exp: f64, samples: usize, seed: u64) -> Result<AhlforsEstimate> {
    if s_exp < 0.0 {
        return Err(Error::InvalidConfig("exponent must be nonnegative".into()));
    }
    if m.atoms.is_empty() && m.segments.is_empty() {
        return Err(Error::InvalidMeasure("empty support".into()));
    }
    let mut pts: Vec<Vec<f64>> = m.atoms.iter().map(|a| a.at.to_f64()).collect();
    for s in &m.segments {
        pts.push(s.from.to_f64());
        pts.push(s.to.to_f64());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if !m.segments.is_empty() {
        for _ in 0..samples {
            let s = &m.segments[rng.gen_range(0..m.segments.len())];
            let t: f64 = rng.gen();
            let (p, q) = (s.from.to_f64(), s.to.to_f64());
            pts.push(p.iter().zip(&q).map(|(a, b)| a + t * (b - a)).collect());
        }
    }
    let diam = m.diameter();
    let top = if diam > 0.0 { diam } else { 1.0 };
    let radii: Vec<f64> = (0..=10).map(|k| top * 2f64.powi(-k)).collect();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for x in &pts {
        for r in &radii {
            let v = ball_mass(m, x, *r) / r.powf(s_exp);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    Ok(AhlforsEstimate {
        s: s_exp,
        c_lower: lo,
        c_upper: hi,
        samples: pts.len() * radii.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::measure::SegmentPiece;
    use crate::zeros::CrossConfig;
    use proptest::prelude::*;
    use proptest::test_runner::{Config, RngSeed};

    fn e(s: &str) -> ExactScalar {
        s.parse().unwrap()
    }

    fn unit_cross() -> Measure {
        CrossConfig::from_ratios((0, 1), (0, 1), (1, 1), (1, 1))
            .unwrap()
            .measure()
    }

    fn diag() -> SpectrumSpec {
        SpectrumSpec::new(2, vec![Point::zeros(2)], vec![Point::ratio2((1, 2), (-1, 2))]).unwrap()
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_in_ball(&diag(), &[0.0, 0.0], 10.0).unwrap(), 29);
        let finite =
            SpectrumSpec::new(2, vec![Point::zeros(2), Point::int2(3, 4), Point::int2(-7, 1)], vec![]).unwrap();
        assert_eq!(count_in_ball(&finite, &[0.0, 0.0], 1e9).unwrap(), 3);
        assert_eq!(count_in_ball(&finite, &[0.0, 0.0], 5.0).unwrap(), 2);
        // {(n,−n)} ∪ {(n+½,−(n+½))} is the same set as (½)Z·(1,−1).
        let two = SpectrumSpec::new(
            2,
            vec![Point::zeros(2), Point::ratio2((1, 2), (-1, 2))],
            vec![Point::int2(1, -1)],
        )
        .unwrap();
        assert_eq!(count_in_ball(&two, &[0.0, 0.0], 10.0).unwrap(), 29);
        // Brute-force oracle for a rank-2 lattice off-centre.
        let skew = SpectrumSpec::new(
            2,
            vec![Point::zeros(2), Point::ratio2((1, 3), (1, 7))],
            vec![Point::int2(2, 1), Point::int2(-1, 3)],
        )
        .unwrap();
        let c = [0.4, -1.3];
        let mut brute = 0;
        for o in skew.offsets_f64() {
            for a in -40i64..=40 {
                for b in -40i64..=40 {
                    let p = [o[0] + 2.0 * a as f64 - b as f64, o[1] + a as f64 + 3.0 * b as f64];
                    if ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt() <= 17.5 {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(count_in_ball(&skew, &c, 17.5).unwrap(), brute);
    }

    #[test]
    fn growth_examples() {
        let g = growth_profile(&diag(), 1000.0, &[]).unwrap();
        assert!((g.slope - 2.0 * 2f64.sqrt()).abs() < 0.05, "{}", g.slope);
        assert!(!g.superlinear);
        let z2 = SpectrumSpec::new(2, vec![Point::zeros(2)], vec![Point::int2(1, 0), Point::int2(0, 1)]).unwrap();
        assert!(growth_profile(&z2, 1000.0, &[]).unwrap().superlinear);
        let tp = builtins::th_parallel().unwrap();
        let g = growth_profile(&tp.spectra[0].spectrum, 100.0, &[]).unwrap();
        assert!((g.slope - 600.0).abs() < 10.0, "{}", g.slope);
        assert!(!g.superlinear);
        // Counts never decrease with R for a fixed center.
        for w in g.samples.windows(2) {
            assert!(w[0].count <= w[1].count);
        }
    }

    #[test]
    fn energy_examples() {
        let (e20, e40) = (
            fourier_energy(&unit_cross(), 20.0, 0.05).unwrap(),
            fourier_energy(&unit_cross(), 40.0, 0.05).unwrap(),
        );
        let (a, b) = (e20 / 20.0, e40 / 40.0);
        assert!(a >= 0.5 && b >= 0.5 && (a / b - 1.0).abs() < 0.15, "{a} {b}");
        assert!(e40 >= e20);

        let atom = Measure::atom(Point::int2(3, -1), e("1")).unwrap();
        let ea = fourier_energy(&atom, 5.0, 0.05).unwrap();
        assert!((ea / (std::f64::consts::PI * 25.0) - 1.0).abs() < 0.01, "{ea}");

        let unit = Measure::interval(e("0"), e("1"), e("1")).unwrap();
        let ei = fourier_energy(&unit, 200.0, 0.05).unwrap();
        assert!((ei - 1.0).abs() < 0.01, "{ei}");
        assert!(fourier_energy(&unit, 10.0, 0.5).is_err());
    }

    #[test]
    fn lev_examples() {
        let l = lev_exponent_estimate(&unit_cross(), &[10.0, 20.0, 40.0], 0.05).unwrap();
        assert!((0.8..=1.2).contains(&l.alpha), "{l:?}");
        let atom = Measure::atom(Point::int2(0, 0), e("1")).unwrap();
        let l = lev_exponent_estimate(&atom, &[2.0, 4.0, 8.0], 0.05).unwrap();
        assert!((l.slope - 2.0).abs() < 0.05 && l.alpha.abs() < 0.05, "{l:?}");
        let unit = Measure::interval(e("0"), e("1"), e("1")).unwrap();
        let l = lev_exponent_estimate(&unit, &[50.0, 100.0, 200.0], 0.05).unwrap();
        assert!(l.saturated && (l.alpha - 1.0).abs() < 0.05, "{l:?}");
        assert!(lev_exponent_estimate(&unit, &[1.0, 2.0], 0.05).is_err());
    }

    #[test]
    fn dyadic_examples() {
        let unit = Measure::interval(e("0"), e("1"), e("1")).unwrap();
        let d = dyadic_masses(&unit, 3).unwrap();
        assert_eq!(d.cells.len(), 8);
        assert!(d.cells.values().all(|v| *v == e("1/8")));
        assert!((d.entropy() - 3.0).abs() < 1e-12);

        let c = dyadic_masses(&unit_cross(), 1).unwrap();
        let expect: BTreeMap<Cell, ExactScalar> =
            [(vec![0, 0], e("1/2")), (vec![1, 0], e("1/4")), (vec![0, 1], e("1/4"))].into();
        assert_eq!(c.cells, expect);

        let corner = Measure::atom(Point::ratio2((1, 2), (1, 2)), e("1")).unwrap();
        assert_eq!(
            dyadic_masses(&corner, 1).unwrap().cells.keys().next().unwrap(),
            &vec![1, 1]
        );
        assert_eq!(dyadic_masses(&corner, 4).unwrap().entropy(), 0.0);

        // Irrational endpoints still split exactly.
        let tp = builtins::th_parallel().unwrap();
        assert_eq!(dyadic_masses(&tp.measure, 2).unwrap().total(), e("1"));
    }

    #[test]
    fn cross_entropy_closed_form() {
        for n in 0..8u32 {
            let h = dyadic_masses(&unit_cross(), n).unwrap().entropy();
            let closed = n as f64 + 1.0 - 2f64.powi(-(n as i32));
            assert!((h - closed).abs() < 1e-12, "n={n}: {h} vs {closed}");
        }
    }

    #[test]
    fn entropy_bound_examples() {
        let hs: Vec<f64> = (1..=6).map(|k| 2f64.powi(k)).collect();
        let r = entropy_bound_check(&unit_cross(), &diag(), &hs, 0.5, 0).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.delta_estimate > 0.0 && r.delta_estimate <= 1.0);
        assert!(2f64.powi(-(r.rho as i32)) < r.delta_estimate);

        let atom = Measure::atom(Point::scalar(e("0")), e("1")).unwrap();
        let single = SpectrumSpec::new(1, vec![Point::scalar(e("0"))], vec![]).unwrap();
        let r = entropy_bound_check(&atom, &single, &[1.0, 10.0, 100.0], 0.5, 0).unwrap();
        assert!(r.rows.iter().all(|row| row.entropy == 0.0 && row.max_count == 1));
        assert!(r.holds);
        assert!(entropy_bound_check(&atom, &single, &[1.0], 1.0, 0).is_err());
    }

    #[test]
    fn ahlfors_examples() {
        let unit = Measure::interval(e("0"), e("1"), e("1")).unwrap();
        let a = ahlfors_estimate(&unit, 1.0, 200, 0).unwrap();
        assert!(
            (a.c_lower - 1.0).abs() < 1e-9 && (a.c_upper - 2.0).abs() < 1e-9,
            "{a:?}"
        );
        let atom = Measure::atom(Point::int2(1, 1), e("3")).unwrap();
        let a = ahlfors_estimate(&atom, 0.0, 10, 0).unwrap();
        assert_eq!((a.c_lower, a.c_upper), (3.0, 3.0));
        // Arc length on the cross: two arms through the crossing point.
        let cross = Measure::arc_length(&[
            (Point::int2(0, 0), Point::int2(1, 0)),
            (Point::int2(0, 0), Point::int2(0, 1)),
        ])
        .unwrap();
        assert!((ball_mass(&cross, &[0.0, 0.0], 0.25) - 0.5).abs() < 1e-12);
        let a = ahlfors_estimate(&cross, 1.0, 200, 0).unwrap();
        assert!(a.c_upper >= 2.0 - 1e-9 && a.c_upper < 2.5, "{a:?}");
        assert!(ahlfors_estimate(&unit, -1.0, 10, 0).is_err());
    }

    fn small_rational() -> impl Strategy<Value = ExactScalar> {
        (-24i64..=24, 1i64..=8).prop_map(|(n, d)| ExactScalar::ratio(n, d))
    }

    /// Segments along directions whose lengths stay in Q[√2].
    fn exact_segment() -> impl Strategy<Value = SegmentPiece> {
        let dirs = [(1, 0), (0, 1), (1, 1), (1, -1), (3, 4), (-4, 3)];
        (small_rational(), small_rational(), 0..dirs.len(), 1i64..=16, 1i64..=4).prop_map(move |(x, y, k, n, d)| {
            let (dx, dy) = dirs[k];
            let t = ExactScalar::ratio(n, d);
            let a = Point::xy(x.clone(), y.clone());
            let b = Point::xy(&x + &(&t * &ExactScalar::int(dx)), &y + &(&t * &ExactScalar::int(dy)));
            SegmentPiece::arc_length(a, b).unwrap()
        })
    }

    proptest! {
        #![proptest_config(Config { cases: 128, rng_seed: RngSeed::Fixed(23), ..Config::default() })]

        #[test]
        fn dyadic_refinement_consistent(
            segs in proptest::collection::vec(exact_segment(), 1..4),
            n in 0u32..5,
        ) {
            let m = Measure::new_allow_overlap(2, vec![], segs).unwrap();
            let fine = dyadic_masses(&m, n + 1).unwrap();
            let coarse = dyadic_masses(&m, n).unwrap();
            prop_assert_eq!(fine.total(), ExactScalar::one());
            prop_assert_eq!(&fine.coarsen().cells, &coarse.cells);
            prop_assert!(fine.entropy() >= coarse.entropy() - 1e-12);
        }
    }
}

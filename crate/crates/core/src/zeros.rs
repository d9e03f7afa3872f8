//! Zero set of the Fourier transform of the normalized cross measure
//!
//! ```text
//! ρ = ½·L[t₁, t₁+T₁]×δ₀ + ½·δ₀×L[t₂, t₂+T₂],   T₁ + T₂ = 2
//! ```
//!
//! Up to a unimodular factor, `2ρ̂(λ) = e^{−πiT(λ)}·S₁ + S₂` with
//! `Sᵢ = sin(πTᵢλᵢ)/(πλᵢ)` and `T(λ) = λ₁(2t₁+T₁) − λ₂(2t₂+T₂)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{AffineMap, Measure, Point, SegmentPiece};
use crate::scalar::ExactScalar;

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossConfig {
    pub t1: ExactScalar,
    pub t2: ExactScalar,
    #[serde(rename = "T1")]
    pub len1: ExactScalar,
    #[serde(rename = "T2")]
    pub len2: ExactScalar,
    /// Affine map taking the original two-segment input onto this cross.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<AffineMap>,
}

impl CrossConfig {
    pub fn new(t1: ExactScalar, t2: ExactScalar, len1: ExactScalar, len2: ExactScalar) -> Result<Self> {
        let c = CrossConfig {
            t1,
            t2,
            len1,
            len2,
            provenance: None,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn from_ratios(t1: (i64, i64), t2: (i64, i64), len1: (i64, i64), len2: (i64, i64)) -> Result<Self> {
        let r = |p: (i64, i64)| ExactScalar::ratio(p.0, p.1);
        CrossConfig::new(r(t1), r(t2), r(len1), r(len2))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.len1.is_positive() || !self.len2.is_positive() {
            return Err(Error::InvalidConfig("T1 and T2 must be positive".into()));
        }
        if &self.len1 + &self.len2 != ExactScalar::int(2) {
            return Err(Error::InvalidConfig("T1 + T2 must equal 2".into()));
        }
        Ok(())
    }

    pub fn equal_lengths(&self) -> bool {
        self.len1 == self.len2
    }

    /// The probability measure ρ (density ½ on each arm).
    pub fn measure(&self) -> Measure {
        let z = ExactScalar::zero();
        let half = ExactScalar::ratio(1, 2);
        let s1 = SegmentPiece::new(
            Point::xy(self.t1.clone(), z.clone()),
            Point::xy(&self.t1 + &self.len1, z.clone()),
            &self.len1 * &half,
        )
        .expect("positive length");
        let s2 = SegmentPiece::new(
            Point::xy(z.clone(), self.t2.clone()),
            Point::xy(z, &self.t2 + &self.len2),
            &self.len2 * &half,
        )
        .expect("positive length");
        Measure::new(2, vec![], vec![s1, s2]).expect("arms meet in at most one point")
    }

    /// Recognize a (possibly unnormalized) measure of this exact shape.
    pub fn recognize(m: &Measure) -> Option<CrossConfig> {
        if m.dimension != 2 || !m.atoms.is_empty() || m.segments.len() != 2 {
            return None;
        }
        let on_x = |s: &SegmentPiece| s.from.0[1].is_zero() && s.to.0[1].is_zero();
        let on_y = |s: &SegmentPiece| s.from.0[0].is_zero() && s.to.0[0].is_zero();
        let (h, v) = match (&m.segments[0], &m.segments[1]) {
            (a, b) if on_x(a) && on_y(b) => (a, b),
            (a, b) if on_y(a) && on_x(b) => (b, a),
            _ => return None,
        };
        let span = |s: &SegmentPiece, i: usize| {
            let (a, b) = (s.from.0[i].clone(), s.to.0[i].clone());
            if a < b {
                (a.clone(), &b - &a)
            } else {
                (b.clone(), &a - &b)
            }
        };
        let (t1, len1) = span(h, 0);
        let (t2, len2) = span(v, 1);
        // Equal density on both arms.
        if &h.mass * &len2 != &v.mass * &len1 {
            return None;
        }
        CrossConfig::new(t1, t2, len1, len2).ok()
    }

    /// `T(λ) = λ₁(2t₁+T₁) − λ₂(2t₂+T₂)`.
    pub fn t_value(&self, lam: &Point) -> ExactScalar {
        let two = ExactScalar::int(2);
        let c1 = &(&two * &self.t1) + &self.len1;
        let c2 = &(&two * &self.t2) + &self.len2;
        &(&lam.0[0] * &c1) - &(&lam.0[1] * &c2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Z1,
    Z2,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Certificate {
    Exact,
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    pub branch: Branch,
    pub certificate: Certificate,
    /// `|ρ̂(λ)|` evaluated in floating point.
    pub value: f64,
}

/// `sin(πTx)/(πx)`, continuously extended by `T` at 0.
fn sine_term(len: f64, x: f64) -> f64 {
    if x == 0.0 {
        len
    } else {
        len * crate::measure::sinc(len * x)
    }
}

pub fn cross_zero_membership(c: &CrossConfig, lam: &Point, tol: f64) -> Result<Membership> {
    if lam.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: lam.dim(),
        });
    }
    if lam.is_zero() {
        return Err(Error::ZeroFrequency);
    }
    let (l1, l2) = (&lam.0[0], &lam.0[1]);
    let value = c.measure().numeric().eval(&lam.to_f64()).norm();
    let a = &c.len1 * l1;
    let b = &c.len2 * l2;
    let zero1 = !l1.is_zero() && a.is_integer();
    let zero2 = !l2.is_zero() && b.is_integer();
    let exact = |member, branch| Membership {
        member,
        branch,
        certificate: Certificate::Exact,
        value,
    };
    if zero1 && zero2 {
        return Ok(exact(true, Branch::Z1));
    }
    if zero1 || zero2 {
        // One sine term vanishes and the other cannot.
        return Ok(exact(false, Branch::None));
    }
    let t = c.t_value(lam);
    let Some(t_int) = t.as_integer() else {
        // Both terms are nonzero reals, and the phase is not ±1.
        return Ok(exact(false, Branch::None));
    };
    let sigma: i64 = if num_integer::Integer::is_even(&t_int) { 1 } else { -1 };

    if l1.is_zero() || l2.is_zero() {
        // One term is the rational Tᵢ.  For rational x the other term is a
        // nonzero algebraic number divided by π, so the two never cancel.
        let x = if l1.is_zero() { &b } else { &a };
        if x.is_rational() {
            return Ok(exact(false, Branch::None));
        }
    } else {
        // sin(πa) = ±sin(πb) whenever a ∓ b ∈ Z; then the expression is a
        // nonzero multiple of σ·(±1)/λ₁ + 1/λ₂.
        let pattern = if let Some(k) = (&a - &b).as_integer() {
            Some(if num_integer::Integer::is_even(&k) { 1 } else { -1 })
        } else {
            (&a + &b)
                .as_integer()
                .map(|k| if num_integer::Integer::is_even(&k) { -1 } else { 1 })
        };
        if let Some(rel) = pattern {
            let coeff = ExactScalar::int(sigma * rel);
            let vanishes = (&(&coeff * l2) + l1).is_zero();
            return Ok(exact(vanishes, if vanishes { Branch::Z2 } else { Branch::None }));
        }
    }

    let lf = lam.to_f64();
    let s1 = sine_term(c.len1.to_f64(), lf[0]);
    let s2 = sine_term(c.len2.to_f64(), lf[1]);
    let v = 0.5 * (sigma as f64 * s1 + s2).abs();
    let member = v <= tol;
    Ok(Membership {
        member,
        branch: if member { Branch::Z2 } else { Branch::None },
        certificate: Certificate::Numeric,
        value: v,
    })
}

pub fn numeric_zero_test(m: &Measure, xi: &[f64], tol: f64) -> Result<bool> {
    Ok(m.fourier_eval(xi)?.norm() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use proptest::test_runner::{Config, RngSeed};
    use std::f64::consts::PI;

    fn lam(a: (i64, i64), b: (i64, i64)) -> Point {
        Point::ratio2(a, b)
    }

    fn unit() -> CrossConfig {
        CrossConfig::from_ratios((0, 1), (0, 1), (1, 1), (1, 1)).unwrap()
    }

    #[test]
    fn examples() {
        let m = cross_zero_membership(&unit(), &lam((1, 2), (-1, 2)), DEFAULT_TOL).unwrap();
        assert!(m.member);
        assert_eq!((m.branch, m.certificate), (Branch::Z2, Certificate::Exact));

        let m = cross_zero_membership(&unit(), &lam((1, 1), (1, 1)), DEFAULT_TOL).unwrap();
        assert!(m.member);
        assert_eq!(m.branch, Branch::Z1);

        let sym = CrossConfig::from_ratios((-1, 2), (-1, 2), (1, 1), (1, 1)).unwrap();
        let m = cross_zero_membership(&sym, &lam((1, 2), (-1, 2)), DEFAULT_TOL).unwrap();
        assert!(!m.member);
        assert_eq!(m.certificate, Certificate::Exact);
        assert!((m.value - 2.0 / PI).abs() < 1e-12);

        assert_eq!(
            cross_zero_membership(&unit(), &Point::zeros(2), DEFAULT_TOL),
            Err(Error::ZeroFrequency)
        );
    }

    #[test]
    fn numeric_zero_examples() {
        let unit_interval = Measure::interval(ExactScalar::zero(), ExactScalar::one(), ExactScalar::one()).unwrap();
        assert!(numeric_zero_test(&unit_interval, &[3.0], DEFAULT_TOL).unwrap());
        assert!(!numeric_zero_test(&unit_interval, &[0.5], DEFAULT_TOL).unwrap());
        assert!((unit_interval.fourier_eval(&[0.5]).unwrap().norm() - 2.0 / PI).abs() < 1e-14);
        assert!(numeric_zero_test(&unit().measure(), &[0.5, -0.5], DEFAULT_TOL).unwrap());
    }

    #[test]
    fn config_validation_and_recognition() {
        assert!(CrossConfig::from_ratios((0, 1), (0, 1), (1, 1), (3, 2)).is_err());
        assert!(CrossConfig::from_ratios((0, 1), (0, 1), (0, 1), (2, 1)).is_err());
        let c = CrossConfig::from_ratios((1, 3), (-2, 1), (3, 2), (1, 2)).unwrap();
        assert_eq!(CrossConfig::recognize(&c.measure()), Some(c.clone()));
        // Scaling masses uniformly keeps the shape.
        let (n, _) = c.measure().normalized();
        assert_eq!(CrossConfig::recognize(&n), Some(c));
        let json = serde_json::to_value(unit()).unwrap();
        assert_eq!(json, serde_json::json!({"t1": "0", "t2": "0", "T1": "1", "T2": "1"}));
    }

    #[test]
    fn irrational_axis_point_is_decided_numerically() {
        // λ₁ = 0, T(λ) = 0 because 2t₂+T₂ = 0, and an irrational sine argument.
        let c = CrossConfig::from_ratios((0, 1), (-1, 2), (1, 1), (1, 1)).unwrap();
        let m = cross_zero_membership(
            &c,
            &Point::xy(ExactScalar::zero(), "sqrt2".parse().unwrap()),
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(!m.member);
        assert_eq!(m.certificate, Certificate::Numeric);
    }

    fn cfg() -> Config {
        Config {
            cases: 500,
            rng_seed: RngSeed::Fixed(0x7a65),
            ..Config::default()
        }
    }

    fn config() -> impl Strategy<Value = CrossConfig> {
        (-6i64..6, -6i64..6, 1i64..4, prop::bool::ANY).prop_map(|(a, b, d, equal)| {
            let (l1, l2) = if equal { (1, 1) } else { (3, 1) };
            CrossConfig::from_ratios(
                (a, d),
                (b, d),
                (l1, if equal { 1 } else { 2 }),
                (l2, if equal { 1 } else { 2 }),
            )
            .unwrap()
        })
    }

    fn diagonal_point() -> impl Strategy<Value = Point> {
        (
            -80i64..80,
            prop::sample::select(vec![1i64, 2, 3, 4, 6]),
            prop::bool::ANY,
        )
            .prop_filter("nonzero", |(n, _, _)| *n != 0)
            .prop_map(|(n, q, anti)| {
                let x = ExactScalar::ratio(n, q);
                let y = if anti { -&x } else { x.clone() };
                Point::xy(x, y)
            })
            .prop_filter("within radius 20", |p| p.to_f64()[0].abs() * 2f64.sqrt() <= 20.0)
    }

    proptest! {
        #![proptest_config(cfg())]

        #[test]
        fn agrees_with_numeric_test_on_diagonals(c in config(), p in diagonal_point()) {
            let m = cross_zero_membership(&c, &p, 1e-9).unwrap();
            let num = numeric_zero_test(&c.measure(), &p.to_f64(), 1e-9).unwrap();
            prop_assert_eq!(m.member, num, "{:?} at {:?}: value {}", c, p, m.value);
        }

        #[test]
        fn membership_is_symmetric(c in config(), p in diagonal_point()) {
            let a = cross_zero_membership(&c, &p, DEFAULT_TOL).unwrap();
            let b = cross_zero_membership(&c, &(-&p), DEFAULT_TOL).unwrap();
            prop_assert_eq!(a.member, b.member);
        }

        #[test]
        fn z1_lattice_points_are_zeros(c in config(), m in -12i64..12, n in -12i64..12) {
            prop_assume!(m != 0 && n != 0);
            let p = Point::xy(
                ExactScalar::int(m).checked_div(&c.len1).unwrap(),
                ExactScalar::int(n).checked_div(&c.len2).unwrap(),
            );
            prop_assert!(numeric_zero_test(&c.measure(), &p.to_f64(), 1e-10).unwrap());
            let r = cross_zero_membership(&c, &p, DEFAULT_TOL).unwrap();
            prop_assert_eq!((r.member, r.branch), (true, Branch::Z1));
        }
    }
}

//! Named example measures together with their constructed spectra.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{LineDir, Matrix, Measure, Point, SegmentPiece};
use crate::scalar::ExactScalar;
use crate::spectra::{
    cross_line_spectrum, equal_spaced_atoms_spectrum, parallel_spectrum, sumset_spectrum, two_interval_spectrum_1d,
    SpectrumSpec, Split,
};
use crate::zeros::CrossConfig;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedSpectrum {
    pub label: String,
    pub spectrum: SpectrumSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Builtin {
    pub name: String,
    pub measure: Measure,
    pub spectra: Vec<NamedSpectrum>,
}

pub const NAMES: &[&str] = &[
    "th-parallel",
    "th-L",
    "cross(t1,t2,T1,T2)",
    "collinear(l1,l2,g)",
    "parallel-pair",
];

fn seg(a: Point, b: Point) -> Result<SegmentPiece> {
    SegmentPiece::arc_length(a, b)
}

/// The irrational horizontal shift of the third copy.
pub fn th_parallel_shift() -> ExactScalar {
    "sqrt2/200".parse().expect("literal")
}

/// Three translates of the segment from (0,0) to (100,0) by (0,0), (0,1)
/// and (α,2) with α = √2/200.
pub fn th_parallel() -> Result<Builtin> {
    let alpha = th_parallel_shift();
    let base = [(ExactScalar::zero(), 0), (ExactScalar::zero(), 1), (alpha, 2)];
    let segments = base
        .iter()
        .map(|(x, y)| {
            let y = ExactScalar::int(*y);
            seg(
                Point::xy(x.clone(), y.clone()),
                Point::xy(x + &ExactScalar::int(100), y),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let measure = Measure::from_segments(segments)?;
    let l = SpectrumSpec::new(2, vec![Point::zeros(2)], vec![Point::ratio2((1, 100), (0, 1))])?;
    let m = equal_spaced_atoms_spectrum(3, &ExactScalar::one(), &LineDir::xy(0, 1)?)?;
    let spectrum = sumset_spectrum(&l, &m, &Split::new(Matrix::identity(2), 1)?)?;
    Ok(Builtin {
        name: "th-parallel".into(),
        measure,
        spectra: vec![NamedSpectrum {
            label: "sumset".into(),
            spectrum,
        }],
    })
}

/// Unit cross at the origin together with its translate by (1,1).
pub fn th_l() -> Result<Builtin> {
    let p = Point::int2;
    let measure = Measure::from_segments(vec![
        seg(p(0, 0), p(1, 0))?,
        seg(p(0, 0), p(0, 1))?,
        seg(p(1, 1), p(1, 2))?,
        seg(p(1, 1), p(2, 1))?,
    ])?;
    let cross = SpectrumSpec::new(2, vec![Point::zeros(2)], vec![Point::ratio2((1, 2), (-1, 2))])?;
    let atoms = equal_spaced_atoms_spectrum(2, &"sqrt2".parse()?, &LineDir::xy(1, 1)?)?;
    let split = Split::new(Matrix::from_ints(&[&[1, -1], &[1, 1]]), 1)?;
    Ok(Builtin {
        name: "th-L".into(),
        measure,
        spectra: vec![NamedSpectrum {
            label: "sumset".into(),
            spectrum: sumset_spectrum(&cross, &atoms, &split)?,
        }],
    })
}

pub fn cross(c: &CrossConfig) -> Result<Builtin> {
    let spectra = match cross_line_spectrum(c) {
        Ok(v) => v
            .into_iter()
            .map(|ls| NamedSpectrum {
                label: ls.condition.to_string(),
                spectrum: ls.spectrum,
            })
            .collect(),
        Err(Error::NotSpectral(_)) => vec![],
        Err(e) => return Err(e),
    };
    Ok(Builtin {
        name: format!("cross({},{},{},{})", c.t1, c.t2, c.len1, c.len2),
        measure: c.measure(),
        spectra,
    })
}

/// `[0, l1] ∪ [l1 + g, l1 + g + l2]` with arc length.
pub fn collinear(l1: &ExactScalar, l2: &ExactScalar, g: &ExactScalar) -> Result<Builtin> {
    let b = &(l1 + g) + l2;
    let measure = Measure::from_segments(vec![
        SegmentPiece::new(
            Point::scalar(ExactScalar::zero()),
            Point::scalar(l1.clone()),
            l1.clone(),
        )?,
        SegmentPiece::new(Point::scalar(l1 + g), Point::scalar(b), l2.clone())?,
    ])?;
    let spectra = match two_interval_spectrum_1d(l1, l2, g) {
        Ok(p) => vec![NamedSpectrum {
            label: "two-interval".into(),
            spectrum: p.to_spectrum()?,
        }],
        Err(Error::NotSpectral(_)) => vec![],
        Err(e) => return Err(e),
    };
    Ok(Builtin {
        name: format!("collinear({l1},{l2},{g})"),
        measure,
        spectra,
    })
}

/// `[−½, ½] × {0}` and `[−½, ½] × {1}` with the line spectra for k = 1, 2, 3.
pub fn parallel_pair() -> Result<Builtin> {
    let s1 = seg(Point::ratio2((-1, 2), (0, 1)), Point::ratio2((1, 2), (0, 1)))?;
    let s2 = seg(Point::ratio2((-1, 2), (1, 1)), Point::ratio2((1, 2), (1, 1)))?;
    let spectra = (1..=3)
        .map(|k| {
            Ok(NamedSpectrum {
                label: format!("k={k}"),
                spectrum: parallel_spectrum(&s1, &s2, k)?.spectrum,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Builtin {
        name: "parallel-pair".into(),
        measure: Measure::from_segments(vec![s1, s2])?,
        spectra,
    })
}

fn args(name: &str, head: &str, n: usize) -> Result<Option<Vec<ExactScalar>>> {
    let Some(rest) = name.strip_prefix(head) else {
        return Ok(None);
    };
    let inner = rest
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("expected {head}(…)")))?;
    let vals = inner
        .split(',')
        .map(|s| s.trim().parse::<ExactScalar>())
        .collect::<Result<Vec<_>>>()?;
    if vals.len() != n {
        return Err(Error::Parse(format!("{head} takes {n} arguments")));
    }
    Ok(Some(vals))
}

pub fn builtin(name: &str) -> Result<Builtin> {
    let name = name.trim();
    match name {
        "th-parallel" => return th_parallel(),
        "th-L" => return th_l(),
        "parallel-pair" => return parallel_pair(),
        _ => {}
    }
    if let Some(v) = args(name, "cross", 4)? {
        let [t1, t2, l1, l2]: [ExactScalar; 4] = v.try_into().expect("length checked");
        return cross(&CrossConfig::new(t1, t2, l1, l2)?);
    }
    if let Some(v) = args(name, "collinear", 3)? {
        return collinear(&v[0], &v[1], &v[2]);
    }
    Err(Error::InvalidConfig(format!(
        "unknown example {name:?}; expected one of {}",
        NAMES.join(", ")
    )))
}

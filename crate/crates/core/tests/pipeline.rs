use segspec::builtins;
use segspec::classify::{classify, Normalized, TwoSegmentInput};
use segspec::measure::affine_pushforward;
use segspec::spectra::{cross_line_spectrum, pullback_spectrum_affine};
use segspec::verify::{check_orthogonality, completeness_curve, unit_grid, Verdict};
use segspec::{ExactScalar, Matrix, Measure, Point, SegmentPiece, SpectrumSpec};

fn e(s: &str) -> ExactScalar {
    s.parse().unwrap()
}

#[test]
fn builtins_round_trip_through_json() {
    for name in [
        "th-parallel",
        "th-L",
        "cross(1/2,-1/2,3/2,1/2)",
        "collinear(1,1,2)",
        "parallel-pair",
    ] {
        let b = builtins::builtin(name).unwrap();
        let text = serde_json::to_string(&b.measure).unwrap();
        let back: Measure = serde_json::from_str(&text).unwrap();
        assert_eq!(back, b.measure, "{name}");
        for s in &b.spectra {
            let text = serde_json::to_string(&s.spectrum).unwrap();
            let back: SpectrumSpec = serde_json::from_str(&text).unwrap();
            assert_eq!(back, s.spectrum, "{name}");
        }
    }
}

/// Skewed two-segment inputs are classified through their affine normal
/// form; pulling the cross spectrum back gives a spectrum of the input.
#[test]
fn skewed_pairs_inherit_cross_spectra() {
    let (mut spectral, mut total) = (0, 0);
    let dir = Point::xy(e("3/5"), e("4/5"));
    for x0 in ["-1", "-1/2", "0", "1/3", "1"] {
        for u in ["-1", "-1/2", "0", "1/4"] {
            // Unit segments along (1,0) and (3,4)/5 whose lines meet at (x0, 0).
            let a2 = &Point::xy(e(x0), e("0")) + &dir.scale(&e(u));
            let b2 = &a2 + &dir;
            let inp =
                TwoSegmentInput::arc_length(Point::int2(0, 0), Point::int2(1, 0), a2.clone(), b2.clone()).unwrap();
            let r = classify(&inp).unwrap();
            let Normalized::Cross(c) = &r.normalized else {
                panic!("expected a cross normal form for ({x0}, {u})");
            };
            let list = cross_line_spectrum(c);
            assert_eq!(list.is_ok(), r.spectral, "({x0}, {u})");
            total += 1;
            let Ok(list) = list else { continue };
            spectral += 1;
            let map = c.provenance.as_ref().expect("normal form records its map");
            let m = Measure::from_segments(vec![
                SegmentPiece::arc_length(Point::int2(0, 0), Point::int2(1, 0)).unwrap(),
                SegmentPiece::arc_length(a2, b2).unwrap(),
            ])
            .unwrap();
            // The recorded map carries the input onto the cross support.
            let image = affine_pushforward(&m, &map.linear, &map.shift).unwrap();
            let cross = c.measure();
            for seg in &image.segments {
                assert!(cross
                    .segments
                    .iter()
                    .any(|t| (t.from == seg.from && t.to == seg.to) || (t.from == seg.to && t.to == seg.from)));
            }
            for ls in list {
                let pulled = pullback_spectrum_affine(&ls.spectrum, &map.linear).unwrap();
                let rep = check_orthogonality(&m, &pulled, 15.0, 1e-10).unwrap();
                assert!(rep.violations.is_empty(), "({x0}, {u}): {:?}", rep.violations.first());
                assert!(rep.points > 10);
            }
        }
    }
    assert!(spectral >= 4 && spectral < total, "{spectral} of {total} spectral");
}

#[test]
fn scaled_copies_keep_their_spectra_up_to_scaling() {
    let b = builtins::builtin("cross(0,0,1,1)").unwrap();
    let a = Matrix::new(vec![vec![e("3"), e("0")], vec![e("0"), e("3")]]).unwrap();
    let m = affine_pushforward(&b.measure, &a, &Point::xy(e("1/7"), e("-2"))).unwrap();
    // Dilating the measure by 3 shrinks the spectrum by 3.
    let base = &b.spectra[0].spectrum;
    let third = e("1/3");
    let s = SpectrumSpec::new(
        2,
        base.offsets.iter().map(|o| o.scale(&third)).collect(),
        base.lattice.iter().map(|g| g.scale(&third)).collect(),
    )
    .unwrap();
    let rep = completeness_curve(&m, &s, &unit_grid(2, 3), &[50.0, 100.0, 200.0]).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    assert!(check_orthogonality(&m, &s, 40.0, 1e-10).unwrap().violations.is_empty());
}

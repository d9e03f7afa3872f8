mod io;

use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use segspec::builtins;
use segspec::classify::{
    classify, classify_collinear, classify_cross, ClassificationResult, Geometry, TwoSegmentInput,
};
use segspec::growth::{
    default_energy_step, entropy_bound_check, growth_profile, lev_exponent_estimate, DEFAULT_EPSILON,
};
use segspec::measure::project_to_line;
use segspec::spectra::{cross_line_spectrum, parallel_spectrum, two_interval_spectrum_1d};
use segspec::verify::{injectivity_scan, line_spectrum_feasibility, unit_grid, verify_spectrum, Obstruction, Verdict};
use segspec::zeros::cross_zero_membership;
use segspec::{CrossConfig, Error, ExactScalar, LineDir, Measure, Point};

use crate::io::{float, measure_of, print_json, spectra_of, stamp, write_csv, Inputs};

const OK: u8 = 0;
const FAIL: u8 = 1;
const INCONCLUSIVE: u8 = 2;
const INPUT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "segspec",
    version,
    about = "Spectrality of arc-length measures on unions of line segments",
    after_help = "Exit codes: 0 ok/pass, 1 fail or non-spectral, 2 inconclusive, 3 input error.\n\
                  Every JSON payload carries \"schema\": \"segment-spectra/1\". Use \"-\" to read JSON from stdin.\n\
                  SEGSPEC_THREADS sets the worker thread count."
)]
struct Cli {
    /// Seed for randomized sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide spectrality of two segments: a cross configuration
    /// {"t1","t2","T1","T2"} or a measure with exactly two segments.
    Classify {
        #[arg(long)]
        input: String,
    },
    /// Construct explicit spectra for a cross configuration, a parallel
    /// pair, or two intervals on the line.
    Spectrum {
        #[arg(long)]
        config: String,
        /// Parallel pairs: emit the spectra for k = 1..=K.
        #[arg(long, default_value_t = 3)]
        k: u32,
    },
    /// Check orthogonality and completeness of a spectrum candidate.
    ///
    /// Without --measure, the measure is taken from the spectrum document
    /// (e.g. the output of `example`).  --csv writes the columns
    /// x1[,x2],R,S: sample point, truncation radius, partial sum.
    Verify {
        #[arg(long)]
        measure: Option<String>,
        #[arg(long)]
        spectrum: String,
        #[arg(long, default_value_t = 50.0)]
        radius: f64,
        #[arg(long, default_value_t = 8)]
        grid: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        csv: Option<String>,
    },
    /// Test points against the zero set of a cross measure.
    ///
    /// Points come one per CSV row (l1,l2), exact values such as 1/2 or
    /// 3*sqrt2/4 allowed.  Output columns: l1,l2,member,branch,value where
    /// value is |transform| at the point.
    Zeros {
        #[arg(long)]
        config: String,
        #[arg(long)]
        points: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Destination for the CSV rows ("-" = stdout).
        #[arg(long, default_value = "-")]
        csv: String,
    },
    /// Push a measure forward onto the line spanned by a direction.
    Project {
        #[arg(long)]
        measure: String,
        /// Direction "x,y" with exact entries.
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
    },
    /// Injective projection directions and line-spectrum feasibility.
    Scan {
        #[arg(long)]
        measure: String,
    },
    /// Ball counts of a spectrum.  CSV columns: R,count.
    Growth {
        #[arg(long)]
        spectrum: String,
        #[arg(long, default_value_t = 1000.0)]
        rmax: f64,
        #[arg(long)]
        csv: Option<String>,
    },
    /// Fourier energy over balls and the fitted decay exponent.
    /// CSV columns: R,energy.
    Energy {
        #[arg(long)]
        measure: String,
        #[arg(long, default_value_t = 40.0)]
        rmax: f64,
        /// Quadrature step; defaults to min(0.05, 1/(4·diameter)).
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        csv: Option<String>,
    },
    /// Entropy bound on ball counts for h = 2^a..2^b.  CSV columns:
    /// h,count,bound.
    Entropy {
        #[arg(long)]
        measure: String,
        #[arg(long)]
        spectrum: String,
        /// Dyadic exponents "a..b".
        #[arg(long, default_value = "1..6")]
        levels: String,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        csv: Option<String>,
    },
    /// Print a built-in example: th-parallel, th-L, cross(t1,t2,T1,T2),
    /// collinear(l1,l2,g), parallel-pair.
    Example { name: String },
}

fn exact(s: &str) -> Result<ExactScalar> {
    s.trim().parse().with_context(|| format!("bad number {s:?}"))
}

fn check_f64(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        bail!("--{name} must be positive and finite");
    }
    Ok(())
}

fn classify_doc(v: &Value) -> Result<ClassificationResult> {
    if v.get("t1").is_some() {
        let c: CrossConfig = serde_json::from_value(v.clone()).context("not a cross configuration")?;
        c.validate()?;
        return Ok(classify_cross(&c));
    }
    let m = measure_of(v)?;
    if !m.atoms.is_empty() || m.segments.len() != 2 {
        bail!("classification needs exactly two segments and no atoms");
    }
    let (s1, s2) = (&m.segments[0], &m.segments[1]);
    match m.dimension {
        2 => Ok(classify(&TwoSegmentInput::from_pieces(s1, s2)?)?),
        1 => {
            let (l1, l2, gap) = intervals_1d(&m)?;
            Ok(classify_collinear(&l1, &l2, &gap)?)
        }
        d => bail!("classification is defined in dimensions 1 and 2, not {d}"),
    }
}

/// Lengths and gap of two disjoint intervals carrying equal density.
fn intervals_1d(m: &Measure) -> Result<(ExactScalar, ExactScalar, ExactScalar)> {
    let mut iv: Vec<(ExactScalar, ExactScalar, ExactScalar)> = m
        .segments
        .iter()
        .map(|s| {
            let (a, b) = (s.from.0[0].clone(), s.to.0[0].clone());
            if a < b {
                (a, b, s.mass.clone())
            } else {
                (b, a, s.mass.clone())
            }
        })
        .collect();
    iv.sort();
    let len = |i: usize| &iv[i].1 - &iv[i].0;
    if &iv[0].2 * &len(1) != &iv[1].2 * &len(0) {
        bail!("the two intervals must carry equal density");
    }
    Ok((len(0), len(1), &iv[1].0 - &iv[0].1))
}

fn cmd_classify(inputs: &mut Inputs, input: &str) -> Result<u8> {
    let r = classify_doc(&inputs.load(input)?)?;
    print_json(&stamp(&r)?)?;
    Ok(if r.spectral { OK } else { FAIL })
}

fn cmd_spectrum(inputs: &mut Inputs, config: &str, k: u32) -> Result<u8> {
    let v = inputs.load(config)?;
    let cross = if v.get("t1").is_some() {
        let c: CrossConfig = serde_json::from_value(v.clone()).context("not a cross configuration")?;
        c.validate()?;
        Some(c)
    } else {
        None
    };
    let mut spectra = vec![];
    let measure = match &cross {
        Some(c) => c.measure(),
        None => measure_of(&v)?,
    };
    let cross = cross.or_else(|| CrossConfig::recognize(&measure));
    let result = if let Some(c) = cross {
        cross_line_spectrum(&c).map(|list| {
            for ls in list {
                spectra.push(json!({"label": ls.condition.to_string(), "line": ls.line, "spectrum": ls.spectrum}));
            }
        })
    } else if measure.segments.len() == 2 && measure.atoms.is_empty() && measure.dimension == 1 {
        let (l1, l2, gap) = intervals_1d(&measure)?;
        two_interval_spectrum_1d(&l1, &l2, &gap).and_then(|p| {
            spectra.push(json!({"label": "two-interval", "periodic": p, "spectrum": p.to_spectrum()?}));
            Ok(())
        })
    } else if measure.segments.len() == 2 && measure.atoms.is_empty() && measure.dimension == 2 {
        let (s1, s2) = (&measure.segments[0], &measure.segments[1]);
        let inp = TwoSegmentInput::from_pieces(s1, s2)?;
        if inp.geometry() != Geometry::Parallel {
            bail!("non-parallel pairs must be given in cross position (t1,t2,T1,T2); run classify for the normal form");
        }
        (1..=k.max(1)).try_for_each(|j| {
            let p = parallel_spectrum(s1, s2, j)?;
            spectra.push(json!({
                "label": format!("k={j}"),
                "line": p.line,
                "gap_ratio": p.gap_ratio,
                "spectrum": p.spectrum,
            }));
            Ok(())
        })
    } else {
        bail!("spectra are constructed for two segments only");
    };
    let spectral = match result {
        Ok(()) => true,
        Err(Error::NotSpectral(_)) => false,
        Err(e) => return Err(e.into()),
    };
    print_json(&stamp(
        &json!({"spectral": spectral, "measure": measure, "spectra": spectra}),
    )?)?;
    Ok(if spectral { OK } else { FAIL })
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Pass => OK,
        Verdict::Fail => FAIL,
        Verdict::Inconclusive => INCONCLUSIVE,
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    inputs: &mut Inputs,
    measure: Option<&str>,
    spectrum: &str,
    radius: f64,
    grid: usize,
    tol: f64,
    csv: Option<&str>,
) -> Result<u8> {
    check_f64("radius", radius)?;
    check_f64("tol", tol)?;
    if grid == 0 {
        bail!("--grid must be at least 1");
    }
    let sdoc = inputs.load(spectrum)?;
    let m = match measure {
        Some(path) => measure_of(&inputs.load(path)?)?,
        None => measure_of(&sdoc).context("no --measure given and the spectrum document carries none")?,
    };
    let xs = unit_grid(m.dimension, grid);
    let radii = [radius / 4.0, radius / 2.0, radius];
    let mut reports = vec![];
    let mut code = OK;
    let mut rows = vec![];
    for (label, s) in spectra_of(&sdoc)? {
        let r = verify_spectrum(&m, &s, radius, tol, &xs, &radii)?;
        code = code.max(match verdict_code(r.verdict) {
            // Fail outranks inconclusive.
            FAIL => 3,
            c => c,
        });
        for smp in &r.completeness_samples {
            let mut row: Vec<String> = smp.x.iter().map(|x| float(*x)).collect();
            row.push(float(smp.radius));
            row.push(float(smp.partial_sum));
            rows.push(row);
        }
        reports.push(json!({"label": label, "report": r}));
    }
    let code = if code == 3 { FAIL } else { code };
    let verdict = match code {
        OK => Verdict::Pass,
        FAIL => Verdict::Fail,
        _ => Verdict::Inconclusive,
    };
    if let Some(path) = csv {
        let mut header: Vec<String> = (1..=m.dimension).map(|i| format!("x{i}")).collect();
        header.extend(["R".into(), "S".into()]);
        write_csv(path, &header.iter().map(String::as_str).collect::<Vec<_>>(), rows)?;
    }
    if csv != Some("-") {
        print_json(&stamp(&json!({"verdict": verdict, "reports": reports}))?)?;
    }
    Ok(code)
}

fn cmd_zeros(inputs: &mut Inputs, config: &str, points: &str, tol: f64, out: &str) -> Result<u8> {
    check_f64("tol", tol)?;
    let c: CrossConfig = serde_json::from_value(inputs.load(config)?).context("not a cross configuration")?;
    c.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(points)
        .with_context(|| format!("opening {points}"))?;
    let m = c.measure();
    let mut rows = vec![];
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            bail!("{points}: row {} needs two columns", i + 1);
        }
        let parsed = (exact(&rec[0]), exact(&rec[1]));
        let (x, y) = match parsed {
            (Ok(x), Ok(y)) => (x, y),
            // A header row.
            _ if i == 0 => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e.context(format!("{points}: row {}", i + 1))),
        };
        let lam = Point::xy(x, y);
        let row = match cross_zero_membership(&c, &lam, tol) {
            Ok(mb) => vec![
                rec[0].to_string(),
                rec[1].to_string(),
                mb.member.to_string(),
                format!("{:?}", mb.branch),
                float(mb.value),
            ],
            Err(Error::ZeroFrequency) => {
                let v = m.fourier_eval(&lam.to_f64())?.norm();
                vec![
                    rec[0].to_string(),
                    rec[1].to_string(),
                    "false".into(),
                    "None".into(),
                    float(v),
                ]
            }
            Err(e) => return Err(e.into()),
        };
        rows.push(row);
    }
    write_csv(out, &["l1", "l2", "member", "branch", "value"], rows)?;
    Ok(OK)
}

fn parse_direction(s: &str) -> Result<Point> {
    let coords = s.split(',').map(exact).collect::<Result<Vec<_>>>()?;
    Ok(Point::new(coords))
}

fn cmd_project(inputs: &mut Inputs, measure: &str, direction: &str) -> Result<u8> {
    let m = measure_of(&inputs.load(measure)?)?;
    let line = LineDir::new(parse_direction(direction)?)?;
    let p = project_to_line(&m, &line)?;
    print_json(&stamp(&json!({
        "projection": p,
        "injective": p.multiplicity.is_injective(),
    }))?)?;
    Ok(OK)
}

fn cmd_scan(inputs: &mut Inputs, measure: &str) -> Result<u8> {
    let m = measure_of(&inputs.load(measure)?)?;
    let scan = if m.dimension == 2 {
        Some(injectivity_scan(&m)?)
    } else {
        None
    };
    let f = line_spectrum_feasibility(&m)?;
    let code = match &f.obstruction {
        _ if f.feasible => OK,
        Some(Obstruction::Inconclusive { .. }) => INCONCLUSIVE,
        _ => FAIL,
    };
    print_json(&stamp(&json!({"injective_directions": scan, "feasibility": f}))?)?;
    Ok(code)
}

fn cmd_growth(inputs: &mut Inputs, spectrum: &str, rmax: f64, csv: Option<&str>) -> Result<u8> {
    check_f64("rmax", rmax)?;
    let sdoc = inputs.load(spectrum)?;
    let mut out = vec![];
    let mut rows = vec![];
    for (label, s) in spectra_of(&sdoc)? {
        let mut centers = vec![vec![0.0; s.dimension]];
        centers.extend(s.offsets_f64().into_iter().filter(|o| o.iter().any(|x| *x != 0.0)));
        let g = growth_profile(&s, rmax, &centers)?;
        // The profile keeps every center; the CSV reports the maximum per radius.
        let mut best: Vec<(f64, u64)> = vec![];
        for smp in &g.samples {
            match best.iter_mut().find(|b| b.0 == smp.radius) {
                Some(b) => b.1 = b.1.max(smp.count),
                None => best.push((smp.radius, smp.count)),
            }
        }
        rows.extend(
            best.into_iter()
                .map(|(r, c)| vec![label.clone(), float(r), c.to_string()]),
        );
        out.push(json!({"label": label, "growth": g}));
    }
    if let Some(path) = csv {
        write_csv(path, &["label", "R", "count"], rows)?;
    }
    if csv != Some("-") {
        print_json(&stamp(&json!({"profiles": out}))?)?;
    }
    Ok(OK)
}

fn cmd_energy(inputs: &mut Inputs, measure: &str, rmax: f64, step: Option<f64>, csv: Option<&str>) -> Result<u8> {
    check_f64("rmax", rmax)?;
    let m = measure_of(&inputs.load(measure)?)?;
    let step = step.unwrap_or_else(|| default_energy_step(&m));
    check_f64("step", step)?;
    let radii = [rmax / 4.0, rmax / 2.0, rmax];
    let lev = lev_exponent_estimate(&m, &radii, step)?;
    if let Some(path) = csv {
        write_csv(
            path,
            &["R", "energy"],
            lev.energies.iter().map(|(r, e)| vec![float(*r), float(*e)]),
        )?;
    }
    if csv != Some("-") {
        print_json(&stamp(&json!({"step": step, "estimate": lev}))?)?;
    }
    Ok(OK)
}

fn parse_levels(s: &str) -> Result<Vec<f64>> {
    let (a, b) = s.split_once("..").context("--levels takes the form a..b")?;
    let (a, b): (u32, u32) = (a.trim().parse()?, b.trim().parse()?);
    if a > b || b > 30 {
        bail!("--levels must satisfy a <= b <= 30");
    }
    Ok((a..=b).map(|k| f64::from(k).exp2()).collect())
}

#[allow(clippy::too_many_arguments)]
fn cmd_entropy(
    inputs: &mut Inputs,
    measure: &str,
    spectrum: &str,
    levels: &str,
    epsilon: f64,
    seed: u64,
    csv: Option<&str>,
) -> Result<u8> {
    let hs = parse_levels(levels)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        bail!("--epsilon must lie in (0, 1)");
    }
    let m = measure_of(&inputs.load(measure)?)?;
    let specs = spectra_of(&inputs.load(spectrum)?)?;
    let mut out = vec![];
    let mut rows = vec![];
    let mut all = true;
    for (label, s) in specs {
        let r = entropy_bound_check(&m, &s, &hs, epsilon, seed)?;
        all &= r.holds;
        rows.extend(
            r.rows
                .iter()
                .map(|row| vec![label.clone(), float(row.h), row.max_count.to_string(), float(row.bound)]),
        );
        out.push(json!({"label": label, "report": r}));
    }
    if let Some(path) = csv {
        write_csv(path, &["label", "h", "count", "bound"], rows)?;
    }
    if csv != Some("-") {
        print_json(&stamp(&json!({"holds": all, "reports": out}))?)?;
    }
    Ok(if all { OK } else { FAIL })
}

fn cmd_example(name: &str) -> Result<u8> {
    let b = builtins::builtin(name)?;
    print_json(&stamp(&b)?)?;
    Ok(OK)
}

fn run(cli: Cli) -> Result<u8> {
    let mut inputs = Inputs::default();
    match cli.command {
        Command::Classify { input } => cmd_classify(&mut inputs, &input),
        Command::Spectrum { config, k } => cmd_spectrum(&mut inputs, &config, k),
        Command::Verify {
            measure,
            spectrum,
            radius,
            grid,
            tol,
            csv,
        } => cmd_verify(
            &mut inputs,
            measure.as_deref(),
            &spectrum,
            radius,
            grid,
            tol,
            csv.as_deref(),
        ),
        Command::Zeros {
            config,
            points,
            tol,
            csv,
        } => cmd_zeros(&mut inputs, &config, &points, tol, &csv),
        Command::Project { measure, direction } => cmd_project(&mut inputs, &measure, &direction),
        Command::Scan { measure } => cmd_scan(&mut inputs, &measure),
        Command::Growth { spectrum, rmax, csv } => cmd_growth(&mut inputs, &spectrum, rmax, csv.as_deref()),
        Command::Energy {
            measure,
            rmax,
            step,
            csv,
        } => cmd_energy(&mut inputs, &measure, rmax, step, csv.as_deref()),
        Command::Entropy {
            measure,
            spectrum,
            levels,
            epsilon,
            csv,
        } => cmd_entropy(
            &mut inputs,
            &measure,
            &spectrum,
            &levels,
            epsilon,
            cli.seed,
            csv.as_deref(),
        ),
        Command::Example { name } => cmd_example(&name),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("SEGSPEC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .context("SEGSPEC_THREADS must be a positive integer")?;
    if n == 0 {
        bail!("SEGSPEC_THREADS must be a positive integer");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn input_error(e: &anyhow::Error) -> ExitCode {
    eprintln!("error: {e:#}");
    let payload = stamp(&json!({"error": format!("{e:#}")})).expect("plain JSON");
    let _ = print_json(&payload);
    ExitCode::from(INPUT_ERROR)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads() {
        return input_error(&e);
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => input_error(&e),
    }
}

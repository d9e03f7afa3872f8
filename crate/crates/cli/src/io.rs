use std::fs::File;
use std::io::{self, Read, Write};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

use segspec::{Measure, SpectrumSpec};

pub const SCHEMA: &str = "segment-spectra/1";

/// Reads JSON documents from files or stdin ("-").  Stdin is read at most
/// once, so `--measure - --spectrum -` sees the same bundle twice.
#[derive(Default)]
pub struct Inputs {
    stdin: Option<Value>,
}

impl Inputs {
    pub fn load(&mut self, path: &str) -> Result<Value> {
        if path == "-" {
            if self.stdin.is_none() {
                let mut text = String::new();
                io::stdin().read_to_string(&mut text).context("reading stdin")?;
                self.stdin = Some(serde_json::from_str(&text).context("parsing JSON from stdin")?);
            }
            return Ok(self.stdin.clone().expect("just read"));
        }
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        serde_json::from_str(&text).with_context(|| format!("parsing JSON in {path}"))
    }
}

/// A measure document, or any payload carrying a `measure` field (such as
/// the output of `example`).
pub fn measure_of(v: &Value) -> Result<Measure> {
    let inner = v.get("measure").unwrap_or(v);
    serde_json::from_value(inner.clone()).context("not a measure document")
}

/// Labelled spectra from a bare spectrum, a `{"spectrum": …}` wrapper or a
/// `{"spectra": [...]}` list.
pub fn spectra_of(v: &Value) -> Result<Vec<(String, SpectrumSpec)>> {
    if let Some(list) = v.get("spectra") {
        let items = list.as_array().context("\"spectra\" must be an array")?;
        if items.is_empty() {
            bail!("document lists no spectra");
        }
        return items
            .iter()
            .enumerate()
            .map(|(i, item)| {
                let label = item
                    .get("label")
                    .and_then(Value::as_str)
                    .map_or_else(|| format!("#{i}"), str::to_owned);
                let spec = item.get("spectrum").unwrap_or(item);
                let parsed = serde_json::from_value(spec.clone()).with_context(|| format!("spectrum {label}"))?;
                Ok((label, parsed))
            })
            .collect();
    }
    let spec = v.get("spectrum").unwrap_or(v);
    Ok(vec![(
        "spectrum".into(),
        serde_json::from_value(spec.clone()).context("not a spectrum document")?,
    )])
}

/// Serializes `payload` and stamps the schema tag in front.
pub fn stamp(payload: &impl Serialize) -> Result<Value> {
    let body = serde_json::to_value(payload)?;
    let mut out = Map::new();
    out.insert("schema".into(), Value::String(SCHEMA.into()));
    match body {
        Value::Object(fields) => out.extend(fields.into_iter().filter(|(k, _)| k != "schema")),
        other => {
            out.insert("result".into(), other);
        }
    }
    Ok(Value::Object(out))
}

pub fn print_json(v: &Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

/// 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV rows go to `path`, or to stdout for "-".
pub fn write_csv(path: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let sink: Box<dyn Write> = if path == "-" {
        Box::new(io::stdout().lock())
    } else {
        Box::new(File::create(path).with_context(|| format!("creating {path}"))?)
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

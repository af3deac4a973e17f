//! Flattens emitted JSON documents into one long-format CSV.

use std::io::{self, Write};
use std::path::Path;

use serde_json::Value;

use crate::error::CliError;

/// One quantity from one document. `None` values are written empty; for
/// stopping times that means "not reached or not applicable".
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub source: String,
    pub command: String,
    pub quantity: String,
    pub t: Option<f64>,
    pub value: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
}

pub fn rows_from_file(path: &Path) -> Result<Vec<Row>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let source = path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into(),
    );
    rows_from_value(&source, &doc).map_err(|m| CliError::config(format!("{}: {m}", path.display())))
}

pub fn rows_from_value(source: &str, doc: &Value) -> Result<Vec<Row>, String> {
    let command = doc
        .get("command")
        .and_then(Value::as_str)
        .ok_or("no `command` field; not an emitted document")?;
    let row = |quantity: String, t: Option<f64>, value: Option<f64>| Row {
        source: source.into(),
        command: command.into(),
        quantity,
        t,
        value,
        ci_lo: None,
        ci_hi: None,
    };
    let num = |v: &Value, key: &str| v.get(key).and_then(Value::as_f64);
    let mut rows = Vec::new();
    match command {
        "bounds" => {
            let b = doc.get("bounds").ok_or("missing `bounds`")?;
            for q in ["tau_star", "theta", "tau_upper"] {
                rows.push(row(q.into(), None, num(b, q)));
            }
        }
        "ensemble" => {
            for p in doc
                .get("probabilities")
                .and_then(Value::as_array)
                .ok_or("missing `probabilities`")?
            {
                let name = p.get("name").and_then(Value::as_str).unwrap_or("unnamed");
                rows.push(Row {
                    ci_lo: num(p, "ci_lo"),
                    ci_hi: num(p, "ci_hi"),
                    ..row(name.into(), num(p, "t"), num(p, "estimate"))
                });
            }
            let quantiles = doc.get("quantiles").ok_or("missing `quantiles`")?;
            for q in ["tau_star", "theta", "tau_upper"] {
                let Some(table) = quantiles.get(q).filter(|v| !v.is_null()) else {
                    continue;
                };
                let levels = table
                    .get("levels")
                    .and_then(Value::as_array)
                    .ok_or("malformed quantiles")?;
                let values = table
                    .get("values")
                    .and_then(Value::as_array)
                    .ok_or("malformed quantiles")?;
                for (level, value) in levels.iter().zip(values) {
                    let level = level.as_f64().ok_or("malformed quantile level")?;
                    rows.push(row(format!("{q}_q{level}"), None, value.as_f64()));
                }
            }
        }
        "pde" => {
            let r = doc.get("report").ok_or("missing `report`")?;
            rows.push(row("tau_num".into(), None, num(r, "tau_num")));
            rows.push(row("tau_half".into(), None, num(r, "tau_half")));
        }
        other => return Err(format!("unsupported command `{other}`")),
    }
    Ok(rows)
}

pub fn write_csv(rows: &[Row], out: &mut dyn Write) -> io::Result<()> {
    let f = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    writeln!(out, "source,command,quantity,t,value,ci_lo,ci_hi")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.source.replace(',', ";"),
            r.command,
            r.quantity,
            f(r.t),
            f(r.value),
            f(r.ci_lo),
            f(r.ci_hi)
        )?;
    }
    Ok(())
}

/// Reads `report.csv` next to itself and writes `report.png`.
pub const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plots report.csv: probability estimates against t, stopping times per source."""
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
src = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "report.csv")
with open(src, newline="") as fh:
    rows = list(csv.DictReader(fh))


def num(s):
    return float(s) if s not in ("", None) else None


curves = {}
times = {}
for r in rows:
    key = (r["source"], r["quantity"])
    if r["t"] and r["value"]:
        curves.setdefault(key, []).append((num(r["t"]), num(r["value"]), num(r["ci_lo"]), num(r["ci_hi"])))
    elif r["value"] and "_q" not in r["quantity"]:
        times[key] = num(r["value"])

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(12, 4.5))
for (source, name), pts in sorted(curves.items()):
    pts.sort()
    t = [p[0] for p in pts]
    v = [p[1] for p in pts]
    lo = [p[1] - p[2] if p[2] is not None else 0.0 for p in pts]
    hi = [p[3] - p[1] if p[3] is not None else 0.0 for p in pts]
    ax1.errorbar(t, v, yerr=[lo, hi], marker="o", capsize=3, label=f"{name} ({source})")
ax1.set_xlabel("t")
ax1.set_ylabel("probability")
ax1.set_ylim(-0.02, 1.02)
if curves:
    ax1.legend(fontsize=7)

labels = [f"{q}\n{s}" for (s, q) in times]
ax2.barh(range(len(times)), list(times.values()))
ax2.set_yticks(range(len(times)))
ax2.set_yticklabels(labels, fontsize=7)
ax2.set_xlabel("time")

fig.tight_layout()
out = os.path.join(os.path.dirname(os.path.abspath(src)), "report.png")
fig.savefig(out, dpi=120)
print(out)
"#;

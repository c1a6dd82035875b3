//! CSV and JSON writers for datasets.
//!
//! CSV: one header row, then one row per (key, τ) in run order; every number is
//! written with 17 significant digits. JSON: an object with `metadata`
//! (generator, key names, observables, notes and one entry per run with its
//! configuration and status) and `columns`, the same long-format table stored
//! column by column.

use std::io::Write;

use serde_json::{Map, Value, json};

use crate::config::OutputFormat;
use crate::error::CliResult;
use crate::sweep::{AxisValue, Dataset};

pub const ORACLE_COLUMN: &str = "oracle_deviation";

fn number(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(ds: &Dataset) -> Vec<String> {
    let mut cols = ds.key_names.clone();
    cols.push("tau".into());
    cols.extend(ds.observables.iter().map(|o| o.name().to_string()));
    if ds.oracle_check {
        cols.push(ORACLE_COLUMN.into());
    }
    cols
}

pub fn write_csv(ds: &Dataset, out: &mut impl Write) -> CliResult<()> {
    writeln!(out, "{}", header(ds).join(","))?;
    for (key, traj) in ds.successes() {
        let prefix: Vec<String> = key.iter().map(ToString::to_string).collect();
        for i in 0..traj.len() {
            let mut row = prefix.clone();
            row.push(number(traj.tau[i]));
            row.extend(traj.columns.iter().map(|c| number(c[i])));
            if let Some(dev) = &traj.oracle_deviation {
                row.push(number(dev[i]));
            }
            writeln!(out, "{}", row.join(","))?;
        }
    }
    Ok(())
}

fn key_json(value: &AxisValue) -> Value {
    match value {
        AxisValue::Number(v) => json!(v),
        AxisValue::Preset(p) => json!(p.name()),
    }
}

fn key_object(names: &[String], key: &[AxisValue]) -> Value {
    Value::Object(
        names
            .iter()
            .cloned()
            .zip(key.iter().map(key_json))
            .collect(),
    )
}

pub fn to_json(ds: &Dataset) -> Value {
    let runs: Vec<Value> = ds
        .runs
        .iter()
        .map(|r| {
            let mut entry = Map::new();
            entry.insert("key".into(), key_object(&ds.key_names, &r.key));
            entry.insert(
                "config".into(),
                serde_json::to_value(&r.config).expect("config serialises"),
            );
            entry.insert("time_scale".into(), json!(r.config.effective_time_scale()));
            match &r.outcome {
                Ok(t) => {
                    entry.insert("status".into(), json!("ok"));
                    entry.insert("nmax".into(), json!(t.nmax));
                    entry.insert("rows".into(), json!(t.len()));
                }
                Err(e) => {
                    entry.insert("status".into(), json!("error"));
                    entry.insert("error".into(), json!(e.to_string()));
                }
            }
            Value::Object(entry)
        })
        .collect();

    let names = header(ds);
    let mut columns: Vec<Vec<Value>> = vec![Vec::new(); names.len()];
    let nkeys = ds.key_names.len();
    for (key, traj) in ds.successes() {
        for i in 0..traj.len() {
            for (k, v) in key.iter().enumerate() {
                columns[k].push(key_json(v));
            }
            columns[nkeys].push(json!(traj.tau[i]));
            for (j, c) in traj.columns.iter().enumerate() {
                columns[nkeys + 1 + j].push(json!(c[i]));
            }
            if let Some(dev) = &traj.oracle_deviation {
                columns[names.len() - 1].push(json!(dev[i]));
            }
        }
    }
    json!({
        "metadata": {
            "generator": concat!("tcxy-cli ", env!("CARGO_PKG_VERSION")),
            "keys": ds.key_names,
            "observables": ds.observables,
            "notes": ds.notes,
            "runs": runs,
        },
        "columns": Value::Object(names.into_iter().zip(columns.into_iter().map(Value::Array)).collect()),
    })
}

pub fn write_json(ds: &Dataset, out: &mut impl Write) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, &to_json(ds)).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

pub fn write(ds: &Dataset, format: OutputFormat, out: &mut impl Write) -> CliResult<()> {
    match format {
        OutputFormat::Csv => write_csv(ds, out),
        OutputFormat::Json => write_json(ds, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Observable, RunConfig, TimeGrid};
    use crate::sweep::{SweepAxis, run_sweep, single};
    use tcxy::Preset;

    fn cfg() -> RunConfig {
        let mut cfg = RunConfig::default().with_preset(Preset::PsiE);
        cfg.nbar = 4.0;
        cfg.time_grid = TimeGrid {
            tau_max: 1.0,
            points: 3,
        };
        cfg.observables = vec![Observable::Inversion, Observable::Eof];
        cfg
    }

    #[test]
    fn csv_layout() {
        let ds = single(&cfg()).unwrap();
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "tau,inversion,eof");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0.0000000000000000e0,1.0000000000000000e0,"));
        let parsed: f64 = lines[2].split(',').next().unwrap().parse().unwrap();
        assert_eq!(parsed, 0.5);
    }

    #[test]
    fn csv_round_trips_exactly() {
        let ds = single(&cfg()).unwrap();
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let traj = ds.get(&[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for (i, line) in text.lines().skip(1).enumerate() {
            let inv: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(inv, traj.columns[0][i]);
        }
    }

    #[test]
    fn sweep_long_format_and_failures() {
        let values = SweepAxis::Lambda2.parse_values("0,-1").unwrap();
        let ds = run_sweep(&cfg(), SweepAxis::Lambda2, &values).unwrap();
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "lambda2,tau,inversion,eof");
        assert_eq!(text.lines().count(), 4);
        let v = to_json(&ds);
        assert_eq!(v["columns"]["lambda2"].as_array().unwrap().len(), 3);
        assert_eq!(v["metadata"]["runs"][1]["status"], "error");
        assert_eq!(v["metadata"]["runs"][0]["key"]["lambda2"], 0.0);
    }

    #[test]
    fn json_is_deterministic() {
        let a = serde_json::to_string(&to_json(&single(&cfg()).unwrap())).unwrap();
        let b = serde_json::to_string(&to_json(&single(&cfg()).unwrap())).unwrap();
        assert_eq!(a, b);
    }
}

//! Data ingestion and report emission: CSV matrices with header rows,
//! feature-set definitions for batch mode, and JSON/CSV output that is
//! byte-stable under fixed inputs.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_two_sample, TestFamily, TestResult, TestSpec};
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::multiplicity::benjamini_hochberg;
use crate::sim::SimReport;

/// Default minimum feature-set size in batch mode; smaller sets are skipped
/// with a note.
pub const DEFAULT_MIN_SET_SIZE: usize = 19;

/// Default FDR level for batch mode.
pub const DEFAULT_FDR: f64 = 0.015;

/// A named feature set (columns of the expression matrix). Sets may overlap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneSetDef {
    pub set_id: String,
    pub feature_names: Vec<String>,
}

/// Load a CSV matrix: header row of feature names, one observation per row.
/// Any non-numeric cell rejects the file with its line number.
pub fn load_matrix(path: &Path) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let names: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2; // 1-based, after the header
        if record.len() != names.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} cells, found {}", names.len(), record.len()),
            });
        }
        let row: Vec<f64> = record
            .iter()
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("non-numeric cell {cell:?}"),
                })
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::invalid("no observations"));
    }
    DataMatrix::from_rows(&rows, Some(names))
}

/// Load a matrix whose named column holds group labels, splitting it into
/// one `DataMatrix` per label (two labels expected).
pub fn load_matrix_grouped(path: &Path, group_column: &str) -> Result<(DataMatrix, DataMatrix)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let group_idx = headers
        .iter()
        .position(|h| h == group_column)
        .ok_or_else(|| Error::invalid(format!("group column {group_column:?} not found")))?;
    let names: Vec<String> =
        headers.iter().enumerate().filter(|&(i, _)| i != group_idx).map(|(_, h)| h.clone()).collect();
    let mut groups: Vec<(String, Vec<Vec<f64>>)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} cells, found {}", headers.len(), record.len()),
            });
        }
        let label = record[group_idx].trim().to_string();
        let row: Vec<f64> = record
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != group_idx)
            .map(|(_, cell)| {
                cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("non-numeric cell {cell:?}"),
                })
            })
            .collect::<Result<_>>()?;
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, rows)) => rows.push(row),
            None => groups.push((label, vec![row])),
        }
    }
    if groups.len() != 2 {
        return Err(Error::invalid(format!(
            "expected exactly 2 group labels, found {}: {:?}",
            groups.len(),
            groups.iter().map(|(l, _)| l.as_str()).collect::<Vec<_>>()
        )));
    }
    // deterministic order: by label
    groups.sort_by(|a, b| a.0.cmp(&b.0));
    let mut it = groups.into_iter();
    let (_, rows_a) = it.next().unwrap();
    let (_, rows_b) = it.next().unwrap();
    Ok((
        DataMatrix::from_rows(&rows_a, Some(names.clone()))?,
        DataMatrix::from_rows(&rows_b, Some(names))?,
    ))
}

/// Load feature-set definitions: CSV with columns `set_id,feature` (one
/// feature per row), aggregated by id in file order.
pub fn load_gene_sets(path: &Path) -> Result<Vec<GeneSetDef>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let mut order: Vec<String> = Vec::new();
    let mut sets: HashMap<String, Vec<String>> = HashMap::new();
    for record in reader.records() {
        let record = record?;
        if record.len() < 2 {
            return Err(Error::invalid("feature-set file needs set_id and feature columns"));
        }
        let id = record[0].trim().to_string();
        if !sets.contains_key(&id) {
            order.push(id.clone());
        }
        sets.entry(id).or_default().push(record[1].trim().to_string());
    }
    if order.is_empty() {
        return Err(Error::invalid("no feature sets defined"));
    }
    Ok(order
        .into_iter()
        .map(|id| {
            let feature_names = sets.remove(&id).unwrap();
            GeneSetDef { set_id: id, feature_names }
        })
        .collect())
}

/// One feature set's outcome inside a batch report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchItem {
    pub set_id: String,
    pub set_size: usize,
    pub result: Option<TestResult>,
    pub fdr_reject: Option<bool>,
    /// Present when the set was skipped or its empirical p-value hit zero.
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchReport {
    pub alpha: f64,
    pub fdr_q: f64,
    pub min_set_size: usize,
    pub num_draws: usize,
    pub tested: usize,
    pub skipped: usize,
    /// Sorted by p-value ascending, skipped sets last.
    pub items: Vec<BatchItem>,
}

/// Run the two-sample test on each feature set and apply BH across the
/// per-set p-values. Each set's randomness is keyed by its id, so adding or
/// removing sets does not perturb the others' p-values.
pub fn run_batch(
    matrix_x: &DataMatrix,
    matrix_y: &DataMatrix,
    sets: &[GeneSetDef],
    spec: &TestSpec,
    fdr_q: f64,
    min_set_size: usize,
) -> Result<BatchReport> {
    if spec.family != TestFamily::TwoSample {
        return Err(Error::invalid("batch mode runs the two-sample test"));
    }
    let names = matrix_x
        .feature_names()
        .ok_or_else(|| Error::invalid("batch mode needs named features"))?;
    if matrix_y.feature_names() != Some(names) {
        return Err(Error::invalid("group matrices have different feature names"));
    }
    let index: HashMap<&str, usize> =
        names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();

    struct Resolved<'a> {
        def: &'a GeneSetDef,
        outcome: Outcome,
    }
    enum Outcome {
        Skipped(String),
        Tested(Box<TestResult>),
    }

    let resolved: Vec<Result<Resolved>> = sets
        .par_iter()
        .map(|def| {
            let mut missing: Vec<&str> = Vec::new();
            let mut cols: Vec<usize> = Vec::new();
            for f in &def.feature_names {
                match index.get(f.as_str()) {
                    Some(&i) => cols.push(i),
                    None => missing.push(f),
                }
            }
            if !missing.is_empty() {
                return Err(Error::invalid(format!(
                    "set {:?}: unresolvable feature names: {}",
                    def.set_id,
                    missing.join(", ")
                )));
            }
            if cols.len() < min_set_size {
                return Ok(Resolved {
                    def,
                    outcome: Outcome::Skipped(format!(
                        "set size {} below the minimum {min_set_size}",
                        cols.len()
                    )),
                });
            }
            let sub_x = matrix_x.select_columns(&cols)?;
            let sub_y = matrix_y.select_columns(&cols)?;
            let mut set_spec = spec.clone();
            set_spec.rng = spec.rng.substream_labeled(&def.set_id);
            let result = run_two_sample(&sub_x, &sub_y, &set_spec)?;
            Ok(Resolved { def, outcome: Outcome::Tested(Box::new(result)) })
        })
        .collect();
    let resolved: Vec<Resolved> = resolved.into_iter().collect::<Result<_>>()?;

    // BH over the tested sets, in definition order
    let tested_p: Vec<f64> = resolved
        .iter()
        .filter_map(|r| match &r.outcome {
            Outcome::Tested(t) => Some(t.p_value),
            Outcome::Skipped(_) => None,
        })
        .collect();
    let bh = if tested_p.is_empty() { None } else { Some(benjamini_hochberg(&tested_p, fdr_q)?) };

    let mut items: Vec<BatchItem> = Vec::with_capacity(resolved.len());
    let mut bh_idx = 0usize;
    for r in resolved {
        match r.outcome {
            Outcome::Skipped(note) => items.push(BatchItem {
                set_id: r.def.set_id.clone(),
                set_size: r.def.feature_names.len(),
                result: None,
                fdr_reject: None,
                note: Some(note),
            }),
            Outcome::Tested(result) => {
                let reject = bh.as_ref().map(|d| d.rejected[bh_idx]);
                bh_idx += 1;
                let note = (result.p_value == 0.0)
                    .then(|| format!("empirical p-value < 1/{}", result.num_draws));
                items.push(BatchItem {
                    set_id: r.def.set_id.clone(),
                    set_size: r.def.feature_names.len(),
                    result: Some(*result),
                    fdr_reject: reject,
                    note,
                });
            }
        }
    }
    let tested = items.iter().filter(|i| i.result.is_some()).count();
    let skipped = items.len() - tested;
    items.sort_by(|a, b| {
        let pa = a.result.as_ref().map(|r| r.p_value).unwrap_or(f64::INFINITY);
        let pb = b.result.as_ref().map(|r| r.p_value).unwrap_or(f64::INFINITY);
        pa.partial_cmp(&pb).unwrap().then_with(|| a.set_id.cmp(&b.set_id))
    });
    Ok(BatchReport {
        alpha: spec.alpha,
        fdr_q,
        min_set_size,
        num_draws: spec.num_draws,
        tested,
        skipped,
        items,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Serialized form of a single test run for report emission. Numeric fields
/// round-trip at full precision (serde_json emits 17 significant digits
/// where needed).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingleReport {
    pub test: String,
    pub statistic: f64,
    pub critical_value: Option<f64>,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    #[serde(rename = "M")]
    pub num_draws: usize,
    pub seed: u64,
    pub screened_out: Option<usize>,
    pub retained: Option<Vec<usize>>,
    pub notes: Vec<String>,
}

impl SingleReport {
    pub fn from_result(result: &TestResult, spec: &TestSpec) -> Self {
        let family = match spec.family {
            TestFamily::OneSample => "one_sample",
            TestFamily::TwoSample => "two_sample",
        };
        let mut label = String::from(family);
        label.push_str(if spec.studentized { "_studentized" } else { "_non_studentized" });
        if spec.screened {
            label.push_str("_screened");
        }
        SingleReport {
            test: label,
            statistic: result.statistic,
            critical_value: result.critical_value,
            p_value: result.p_value,
            reject: result.reject,
            alpha: spec.alpha,
            num_draws: result.num_draws,
            seed: spec.rng.seed,
            screened_out: result.screened_out,
            retained: result.retained.clone(),
            notes: result.notes.clone(),
        }
    }
}

fn fmt_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn emit_single(report: &SingleReport, format: OutputFormat, out: &mut dyn Write) -> Result<()> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            out.write_all(b"\n")?;
        }
        OutputFormat::Csv => {
            writeln!(
                out,
                "test,statistic,critical_value,p_value,reject,alpha,M,seed,screened_out,notes"
            )?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                report.test,
                fmt_f64(report.statistic),
                fmt_opt(report.critical_value),
                fmt_f64(report.p_value),
                report.reject,
                fmt_f64(report.alpha),
                report.num_draws,
                report.seed,
                report.screened_out.map(|v| v.to_string()).unwrap_or_default(),
                report.notes.join("; "),
            )?;
        }
    }
    Ok(())
}

pub fn emit_batch(report: &BatchReport, format: OutputFormat, out: &mut dyn Write) -> Result<()> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            out.write_all(b"\n")?;
        }
        OutputFormat::Csv => {
            writeln!(out, "set_id,set_size,statistic,critical_value,p_value,fdr_reject,note")?;
            for item in &report.items {
                let (stat, cv, pv) = match &item.result {
                    Some(r) => {
                        (fmt_f64(r.statistic), fmt_opt(r.critical_value), fmt_f64(r.p_value))
                    }
                    None => (String::new(), String::new(), String::new()),
                };
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    item.set_id,
                    item.set_size,
                    stat,
                    cv,
                    pv,
                    item.fdr_reject.map(|v| v.to_string()).unwrap_or_default(),
                    item.note.clone().unwrap_or_default(),
                )?;
            }
        }
    }
    Ok(())
}

pub fn emit_sim(reports: &[SimReport], format: OutputFormat, out: &mut dyn Write) -> Result<()> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, reports)?;
            out.write_all(b"\n")?;
        }
        OutputFormat::Csv => {
            writeln!(out, "scenario,test,rejections,replicates,rate,mc_se")?;
            for report in reports {
                for rate in &report.rates {
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        report.scenario_id,
                        rate.test,
                        rate.rejections,
                        rate.replicates,
                        fmt_f64(rate.rate),
                        fmt_f64(rate.mc_se),
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// Convenience wrapper used by the CLI: emit to a file path.
pub fn emit_to_path<F>(path: &Path, emit: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let mut file = std::fs::File::create(path)?;
    emit(&mut file)?;
    file.flush()?;
    Ok(())
}

/// Parse a mu0 file: one number per line (or comma separated on one line).
pub fn load_mu0(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        for cell in line.split(',') {
            let cell = cell.trim();
            if cell.is_empty() {
                continue;
            }
            out.push(cell.parse::<f64>().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("non-numeric cell {cell:?}"),
            })?);
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("mu0 file is empty"));
    }
    Ok(out)
}

/// Parse a simulation scenario list from JSON (an array of scenarios or a
/// single scenario object).
pub fn load_scenarios(path: &Path) -> Result<Vec<crate::sim::SimScenario>> {
    let text = std::fs::read_to_string(path)?;
    match serde_json::from_str::<Vec<crate::sim::SimScenario>>(&text) {
        Ok(v) => Ok(v),
        Err(_) => Ok(vec![serde_json::from_str(&text)?]),
    }
}

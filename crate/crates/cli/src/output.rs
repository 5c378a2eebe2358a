//! CSV writers for run results, bins and sample streams.

use std::fs::{File, OpenOptions};
use std::path::Path;

use anyhow::{Context, Result};
use hexsse::{RunConfigF64, RunResultF64};
use serde::Serialize;

#[derive(Serialize)]
struct ResultRow {
    g: f64,
    beta: f64,
    lx: usize,
    ly: usize,
    nn: usize,
    seed: u64,
    e_mean: f64,
    e_err: f64,
    #[serde(rename = "abs_mH_mean")]
    abs_mh_mean: Option<f64>,
    #[serde(rename = "abs_mH_err")]
    abs_mh_err: Option<f64>,
    #[serde(rename = "abs_mH_sliceavg_mean")]
    abs_mh_sliceavg_mean: Option<f64>,
    #[serde(rename = "abs_psiH_mean")]
    abs_psih_mean: Option<f64>,
    #[serde(rename = "abs_psiH_err")]
    abs_psih_err: Option<f64>,
    n_mean: f64,
    #[serde(rename = "L_final")]
    l_final: usize,
    max_nh: usize,
    saturated: u64,
    valid: bool,
}

#[derive(Serialize)]
struct BinRow {
    g: f64,
    seed: u64,
    bin: usize,
    sweeps: usize,
    n_mean: f64,
    e: f64,
    #[serde(rename = "abs_mH")]
    abs_mh: Option<f64>,
    #[serde(rename = "abs_mH_sliceavg")]
    abs_mh_sliceavg: Option<f64>,
    #[serde(rename = "abs_psiH")]
    abs_psih: Option<f64>,
    #[serde(rename = "abs_psiH_sliceavg")]
    abs_psih_sliceavg: Option<f64>,
}

#[derive(Serialize)]
struct SampleRow {
    sweep: usize,
    #[serde(rename = "re_mH")]
    re_mh: f64,
    #[serde(rename = "im_mH")]
    im_mh: f64,
    #[serde(rename = "re_psiH")]
    re_psih: f64,
    #[serde(rename = "im_psiH")]
    im_psih: f64,
}

fn result_row(c: &RunConfigF64, r: &RunResultF64) -> ResultRow {
    ResultRow {
        g: c.g,
        beta: c.beta,
        lx: c.lx,
        ly: c.ly,
        nn: r.nn,
        seed: c.seed,
        e_mean: r.energy.mean,
        e_err: r.energy.err,
        abs_mh_mean: r.abs_m.map(|e| e.mean),
        abs_mh_err: r.abs_m.map(|e| e.err),
        abs_mh_sliceavg_mean: r.abs_m_sliceavg.map(|e| e.mean),
        abs_psih_mean: r.abs_psi.map(|e| e.mean),
        abs_psih_err: r.abs_psi.map(|e| e.err),
        n_mean: r.n_mean.mean,
        l_final: r.cutoff,
        max_nh: r.max_nh,
        saturated: r.saturation,
        valid: r.valid,
    }
}

fn bin_rows(c: &RunConfigF64, r: &RunResultF64) -> Vec<BinRow> {
    r.bins
        .iter()
        .enumerate()
        .map(|(k, b)| BinRow {
            g: c.g,
            seed: c.seed,
            bin: k,
            sweeps: b.sweeps,
            n_mean: b.n_mean,
            e: b.energy,
            abs_mh: b.abs_m,
            abs_mh_sliceavg: b.abs_m_sliceavg,
            abs_psih: b.abs_psi,
            abs_psih_sliceavg: b.abs_psi_sliceavg,
        })
        .collect()
}

/// Writes `rows` to `path`, appending when `append` is set and the file
/// already has content (the header is then not repeated).
fn write_rows<R: Serialize>(path: &Path, rows: &[R], append: bool) -> Result<()> {
    let existing = append && path.metadata().map(|m| m.len() > 0).unwrap_or(false);
    let file = if append {
        OpenOptions::new().create(true).append(true).open(path)
    } else {
        File::create(path)
    }
    .with_context(|| format!("opening {}", path.display()))?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(!existing)
        .from_writer(file);
    for row in rows {
        writer
            .serialize(row)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    writer
        .flush()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn append_results(dir: &Path, runs: &[(RunConfigF64, RunResultF64)]) -> Result<()> {
    let rows: Vec<_> = runs.iter().map(|(c, r)| result_row(c, r)).collect();
    write_rows(&dir.join("results.csv"), &rows, true)
}

pub fn write_results(dir: &Path, runs: &[(RunConfigF64, RunResultF64)]) -> Result<()> {
    let rows: Vec<_> = runs.iter().map(|(c, r)| result_row(c, r)).collect();
    write_rows(&dir.join("results.csv"), &rows, false)
}

pub fn append_bins(dir: &Path, runs: &[(RunConfigF64, RunResultF64)]) -> Result<()> {
    let rows: Vec<_> = runs.iter().flat_map(|(c, r)| bin_rows(c, r)).collect();
    write_rows(&dir.join("bins.csv"), &rows, true)
}

pub fn write_bins(dir: &Path, runs: &[(RunConfigF64, RunResultF64)]) -> Result<()> {
    let rows: Vec<_> = runs.iter().flat_map(|(c, r)| bin_rows(c, r)).collect();
    write_rows(&dir.join("bins.csv"), &rows, false)
}

pub fn samples_name(c: &RunConfigF64) -> String {
    format!("samples_{}_{}.csv", c.g, c.seed)
}

pub fn write_samples(c: &RunConfigF64, r: &RunResultF64) -> Result<()> {
    let rows: Vec<SampleRow> = r
        .samples
        .iter()
        .map(|s| SampleRow {
            sweep: s.sweep,
            re_mh: s.m.re,
            im_mh: s.m.im,
            re_psih: s.psi.re,
            im_psih: s.psi.im,
        })
        .collect();
    let path = c.out_dir.join(samples_name(c));
    if rows.is_empty() {
        let mut w =
            csv::Writer::from_path(&path).with_context(|| format!("opening {}", path.display()))?;
        w.write_record(["sweep", "re_mH", "im_mH", "re_psiH", "im_psiH"])?;
        w.flush()?;
        return Ok(());
    }
    write_rows(&path, &rows, false)
}

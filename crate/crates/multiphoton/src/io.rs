//! Text formats for distributions, samples, counts, and visibilities.
//!
//! All mode indices in these formats are 1-based. Floats are written in
//! Rust's shortest round-trip form, so write → read → write is
//! byte-identical.
//!
//! - Distribution CSV: header `pattern;probability`, one row per
//!   collision-free pattern in lexicographic order, the pattern written as
//!   comma-joined mode indices. The support is always complete, so the mode
//!   count is recoverable from the last pattern.
//! - Samples CSV: header `pattern`, one detected pattern per row.
//! - Counts CSV: header `input,output,count`, one row per (input, output).
//! - Visibility CSV: header `in_i,in_j,out_k,out_l,visibility,sigma`.
//! - Likelihood CSV: header `t,L`.
//! - Comparison CSV: header `model,D,D_mean,D_std,x_fit`.

use std::path::Path;

use crate::characterize::{CountTable, VisibilityRecord};
use crate::error::{Error, Result};
use crate::interference::{Normalization, OutcomeDistribution};
use crate::patterns::OccupationPattern;
use crate::validate::{LikelihoodCurve, ModelComparison, SampleSet};

fn read_to_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)?;
    Ok(text.lines().map(str::to_owned).collect())
}

fn parse_f64(token: &str, what: &str) -> Result<f64> {
    token
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what} value `{token}`")))
}

fn parse_index(token: &str, what: &str) -> Result<usize> {
    let v: usize = token
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what} index `{token}`")))?;
    if v == 0 {
        return Err(Error::Parse(format!("{what} indices are 1-based, got 0")));
    }
    Ok(v - 1)
}

// ---------------------------------------------------------------------------
// Outcome distributions.
// ---------------------------------------------------------------------------

pub fn distribution_to_csv(dist: &OutcomeDistribution) -> String {
    let mut out = String::from("pattern;probability\n");
    for (pat, &p) in dist.patterns().iter().zip(dist.probs()) {
        out.push_str(&pat.format_one_based());
        out.push(';');
        out.push_str(&format!("{p}"));
        out.push('\n');
    }
    out
}

pub fn write_distribution_csv(path: &Path, dist: &OutcomeDistribution) -> Result<()> {
    std::fs::write(path, distribution_to_csv(dist))?;
    Ok(())
}

/// Read a distribution CSV. The file must enumerate the complete
/// collision-free support (as written by [`write_distribution_csv`]); the
/// mode count is inferred from it. `normalization` declares how the caller
/// interprets the column.
pub fn read_distribution_csv(
    path: &Path,
    normalization: Normalization,
) -> Result<OutcomeDistribution> {
    let lines = read_to_lines(path)?;
    if lines.first().map(String::as_str) != Some("pattern;probability") {
        return Err(Error::Parse(format!(
            "{}: expected header `pattern;probability`",
            path.display()
        )));
    }
    let mut patterns = Vec::new();
    let mut probs = Vec::new();
    for line in &lines[1..] {
        if line.trim().is_empty() {
            continue;
        }
        let (pat, prob) = line
            .split_once(';')
            .ok_or_else(|| Error::Parse(format!("missing `;` in row `{line}`")))?;
        patterns.push(OccupationPattern::parse_one_based(pat)?);
        probs.push(parse_f64(prob, "probability")?);
    }
    if patterns.is_empty() {
        return Err(Error::Parse("distribution file has no rows".into()));
    }
    let photons = patterns[0].photons();
    let modes = patterns.iter().map(|p| p.max_mode()).max().unwrap() + 1;
    OutcomeDistribution::from_parts(modes, photons, patterns, probs, normalization)
}

// ---------------------------------------------------------------------------
// Sample sets.
// ---------------------------------------------------------------------------

pub fn samples_to_csv(samples: &SampleSet) -> String {
    let mut out = String::from("pattern\n");
    for s in samples.samples() {
        out.push_str(&s.format_one_based());
        out.push('\n');
    }
    out
}

pub fn write_samples_csv(path: &Path, samples: &SampleSet) -> Result<()> {
    std::fs::write(path, samples_to_csv(samples))?;
    Ok(())
}

/// Read a samples CSV; `modes` declares the mode count of the circuit the
/// samples came from.
pub fn read_samples_csv(path: &Path, modes: usize) -> Result<SampleSet> {
    let lines = read_to_lines(path)?;
    if lines.first().map(String::as_str) != Some("pattern") {
        return Err(Error::Parse(format!(
            "{}: expected header `pattern`",
            path.display()
        )));
    }
    let mut samples = Vec::new();
    for line in &lines[1..] {
        if line.trim().is_empty() {
            continue;
        }
        samples.push(OccupationPattern::parse_one_based(line)?);
    }
    SampleSet::new(modes, samples)
}

// ---------------------------------------------------------------------------
// Count tables.
// ---------------------------------------------------------------------------

pub fn counts_to_csv(counts: &CountTable) -> String {
    let mut out = String::from("input,output,count\n");
    for (j, row) in counts.rows().iter().enumerate() {
        for (k, &c) in row.iter().enumerate() {
            out.push_str(&format!("{},{},{c}\n", j + 1, k + 1));
        }
    }
    out
}

pub fn write_counts_csv(path: &Path, counts: &CountTable) -> Result<()> {
    std::fs::write(path, counts_to_csv(counts))?;
    Ok(())
}

pub fn read_counts_csv(path: &Path) -> Result<CountTable> {
    let lines = read_to_lines(path)?;
    if lines.first().map(String::as_str) != Some("input,output,count") {
        return Err(Error::Parse(format!(
            "{}: expected header `input,output,count`",
            path.display()
        )));
    }
    let mut cells: Vec<(usize, usize, f64)> = Vec::new();
    let mut max_in = 0usize;
    let mut max_out = 0usize;
    for line in &lines[1..] {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("expected 3 fields in row `{line}`")));
        }
        let j = parse_index(fields[0], "input")?;
        let k = parse_index(fields[1], "output")?;
        let c = parse_f64(fields[2], "count")?;
        max_in = max_in.max(j);
        max_out = max_out.max(k);
        cells.push((j, k, c));
    }
    if cells.is_empty() {
        return Err(Error::Parse("count file has no rows".into()));
    }
    let mut table = vec![vec![0.0; max_out + 1]; max_in + 1];
    for (j, k, c) in cells {
        table[j][k] = c;
    }
    CountTable::new(table)
}

// ---------------------------------------------------------------------------
// Visibility records.
// ---------------------------------------------------------------------------

const VISIBILITY_HEADER: &str = "in_i,in_j,out_k,out_l,visibility,sigma";

pub fn visibilities_to_csv(records: &[VisibilityRecord]) -> String {
    let mut out = String::from(VISIBILITY_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.inputs.0 + 1,
            r.inputs.1 + 1,
            r.outputs.0 + 1,
            r.outputs.1 + 1,
            r.visibility,
            r.sigma
        ));
    }
    out
}

pub fn write_visibilities_csv(path: &Path, records: &[VisibilityRecord]) -> Result<()> {
    std::fs::write(path, visibilities_to_csv(records))?;
    Ok(())
}

pub fn read_visibilities_csv(path: &Path) -> Result<Vec<VisibilityRecord>> {
    let lines = read_to_lines(path)?;
    let header = lines
        .first()
        .ok_or_else(|| Error::Parse(format!("{}: empty visibility file", path.display())))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    for required in ["in_i", "in_j", "out_k", "out_l", "visibility", "sigma"] {
        if !columns.contains(&required) {
            return Err(Error::Parse(format!(
                "{}: missing column `{required}` in visibility header",
                path.display()
            )));
        }
    }
    let col = |name: &str| columns.iter().position(|&c| c == name).unwrap();
    let (ci, cj, ck, cl, cv, cs) = (
        col("in_i"),
        col("in_j"),
        col("out_k"),
        col("out_l"),
        col("visibility"),
        col("sigma"),
    );
    let mut records = Vec::new();
    for line in &lines[1..] {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(Error::Parse(format!(
                "expected {} fields in row `{line}`",
                columns.len()
            )));
        }
        records.push(VisibilityRecord::new(
            (
                parse_index(fields[ci], "input")?,
                parse_index(fields[cj], "input")?,
            ),
            (
                parse_index(fields[ck], "output")?,
                parse_index(fields[cl], "output")?,
            ),
            parse_f64(fields[cv], "visibility")?,
            parse_f64(fields[cs], "sigma")?,
        )?);
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Comparison tables and likelihood curves.
// ---------------------------------------------------------------------------

pub fn comparisons_to_csv(rows: &[ModelComparison]) -> String {
    let mut out = String::from("model,D,D_mean,D_std,x_fit\n");
    for r in rows {
        let x = r.x_fit.map(|x| format!("{x}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{x}\n",
            r.model, r.distance, r.distance_mean, r.distance_std
        ));
    }
    out
}

pub fn write_comparisons_csv(path: &Path, rows: &[ModelComparison]) -> Result<()> {
    std::fs::write(path, comparisons_to_csv(rows))?;
    Ok(())
}

pub fn likelihood_to_csv(curve: &LikelihoodCurve) -> String {
    let mut out = String::from("t,L\n");
    for (t, &l) in curve.values.iter().enumerate() {
        out.push_str(&format!("{},{l}\n", t + 1));
    }
    out
}

pub fn write_likelihood_csv(path: &Path, curve: &LikelihoodCurve) -> Result<()> {
    std::fs::write(path, likelihood_to_csv(curve))?;
    Ok(())
}

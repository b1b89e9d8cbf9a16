//! Declarative experiment runner behind the command-line interface.
//!
//! An [`ExperimentConfig`] names a circuit source, an input (pure pattern or
//! incoherent mixture), a list of named interference models, and the seeds
//! and trial counts of the statistical machinery. Runs are fully determined
//! by the config: repeated runs produce byte-identical files, and every run
//! writes a `manifest.json` recording the effective config, its hash, and
//! the crate version, which is enough to reproduce it.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characterize::{magnitudes_from_counts, retrieve_phases};
use crate::error::{Error, Result};
use crate::interference::{
    output_distribution, InterferenceModel, Normalization, OutcomeDistribution,
};
use crate::io;
use crate::matrix::TransferMatrix;
use crate::mesh::{haar_random, mesh_to_matrix, MeshParams};
use crate::patterns::{InputMixture, OccupationPattern};
use crate::photons::{marked_photon_overlap, uniform_overlap, OverlapMatrix, WTensor};
use crate::validate::{
    draw_samples, fit_overlap, likelihood_ratio_curve, poisson_bootstrap_distance, tvd,
    ModelComparison, SampleSet, ScalarFamily,
};

/// Where the circuit comes from; exactly one variant.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CircuitSource {
    /// Generate a Haar-random unitary of the given size.
    Haar { modes: usize, seed: u64 },
    /// Load mesh parameters (JSON) and evaluate them.
    MeshFile { path: PathBuf },
    /// Load a transfer matrix (JSON) directly.
    MatrixFile { path: PathBuf },
}

/// Input photons: a single pattern or an incoherent mixture. Mode indices
/// are 1-based in the config, one entry per photon.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    Pattern(Vec<usize>),
    Mixture(Vec<MixtureComponent>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub pattern: Vec<usize>,
}

/// One named interference model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ModelKind,
    /// Optimize the scalar overlap `x` against the samples before computing
    /// distances and likelihood curves (uniform-overlap and truncated models
    /// only).
    #[serde(default)]
    pub fit_x: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ModelKind {
    Ideal,
    Distinguishable,
    UniformOverlap {
        x: f64,
    },
    Truncated {
        x: f64,
        k_max: usize,
    },
    /// One photon (1-based label into the expanded input) fully
    /// distinguishable, the others ideal.
    MarkedPhoton {
        photon: usize,
    },
    OverlapFile {
        path: PathBuf,
    },
    WTensorFile {
        path: PathBuf,
    },
}

/// Seeds for the stochastic stages; the circuit seed lives in
/// [`CircuitSource::Haar`].
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    #[serde(default)]
    pub sampling: u64,
    #[serde(default)]
    pub bootstrap: u64,
}

fn default_bootstrap_trials() -> usize {
    200
}

fn default_samples() -> usize {
    1000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub circuit: CircuitSource,
    pub input: InputSpec,
    pub models: Vec<ModelSpec>,
    /// Reference model B for likelihood-ratio curves (required by `compare`).
    #[serde(default)]
    pub reference_model: Option<String>,
    /// Default sample count for the `sample` command.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default = "default_bootstrap_trials")]
    pub bootstrap_trials: usize,
    /// Normalization of the distribution CSVs written by `simulate`.
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
    pub output_dir: PathBuf,
}

fn default_normalization() -> Normalization {
    Normalization::Renormalized
}

impl ExperimentConfig {
    /// Parse and validate a config document, reporting the offending field
    /// path on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig =
            serde_path_to_error::deserialize(de).map_err(|e| Error::InvalidConfig {
                field: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (i, m) in self.models.iter().enumerate() {
            if m.name.is_empty() {
                return Err(Error::InvalidConfig {
                    field: format!("models[{i}].name"),
                    message: "model name must not be empty".into(),
                });
            }
            if !seen.insert(m.name.clone()) {
                return Err(Error::InvalidConfig {
                    field: format!("models[{i}].name"),
                    message: format!("duplicate model name `{}`", m.name),
                });
            }
        }
        if let Some(reference) = &self.reference_model {
            if !seen.contains(reference) {
                return Err(Error::InvalidConfig {
                    field: "reference_model".into(),
                    message: format!("`{reference}` is not a configured model"),
                });
            }
        }
        match &self.input {
            InputSpec::Pattern(p) if p.is_empty() => {
                return Err(Error::InvalidConfig {
                    field: "input.pattern".into(),
                    message: "pattern must contain at least one photon".into(),
                });
            }
            InputSpec::Mixture(m) if m.is_empty() => {
                return Err(Error::InvalidConfig {
                    field: "input.mixture".into(),
                    message: "mixture must contain at least one component".into(),
                });
            }
            _ => {}
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig {
                field: "samples".into(),
                message: "sample count must be positive".into(),
            });
        }
        if self.bootstrap_trials < 2 {
            return Err(Error::InvalidConfig {
                field: "bootstrap_trials".into(),
                message: "bootstrap needs at least two trials".into(),
            });
        }
        Ok(())
    }

    /// FNV-1a hash of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    pub fn circuit_matrix(&self) -> Result<TransferMatrix> {
        match &self.circuit {
            CircuitSource::Haar { modes, seed } => haar_random(*modes, *seed),
            CircuitSource::MeshFile { path } => {
                let params: MeshParams = serde_json::from_str(&std::fs::read_to_string(path)?)?;
                mesh_to_matrix(&params)
            }
            CircuitSource::MatrixFile { path } => {
                Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
            }
        }
    }

    pub fn input_mixture(&self) -> Result<InputMixture> {
        let to_pattern = |modes: &[usize], field: &str| -> Result<OccupationPattern> {
            if modes.contains(&0) {
                return Err(Error::InvalidConfig {
                    field: field.into(),
                    message: "mode indices are 1-based".into(),
                });
            }
            let zero_based: Vec<usize> = modes.iter().map(|&m| m - 1).collect();
            OccupationPattern::from_modes(&zero_based)
        };
        match &self.input {
            InputSpec::Pattern(p) => Ok(InputMixture::pure(to_pattern(p, "input.pattern")?)),
            InputSpec::Mixture(components) => {
                let parts = components
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        Ok((
                            c.weight,
                            to_pattern(&c.pattern, &format!("input.mixture[{i}].pattern"))?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                InputMixture::new(parts)
            }
        }
    }
}

impl ModelKind {
    /// Instantiate for a given photon number.
    pub fn build(&self, photons: usize) -> Result<InterferenceModel> {
        Ok(match self {
            ModelKind::Ideal => InterferenceModel::Ideal,
            ModelKind::Distinguishable => {
                InterferenceModel::Overlap(uniform_overlap(photons, Complex64::new(0.0, 0.0))?)
            }
            ModelKind::UniformOverlap { x } => {
                InterferenceModel::Overlap(uniform_overlap(photons, Complex64::new(*x, 0.0))?)
            }
            ModelKind::Truncated { x, k_max } => InterferenceModel::TruncatedUniform {
                x: *x,
                k_max: *k_max,
            },
            ModelKind::MarkedPhoton { photon } => {
                if *photon == 0 {
                    return Err(Error::invalid("photon labels are 1-based"));
                }
                InterferenceModel::Overlap(marked_photon_overlap(photons, photon - 1)?)
            }
            ModelKind::OverlapFile { path } => {
                let x: OverlapMatrix = serde_json::from_str(&std::fs::read_to_string(path)?)?;
                InterferenceModel::Overlap(x)
            }
            ModelKind::WTensorFile { path } => {
                let w: WTensor = serde_json::from_str(&std::fs::read_to_string(path)?)?;
                InterferenceModel::CircuitW(w)
            }
        })
    }

    /// The scalar family fitted when `fit_x` is set.
    fn scalar_family(&self) -> Option<ScalarFamily> {
        match self {
            ModelKind::UniformOverlap { .. } => Some(ScalarFamily::UniformOverlap),
            ModelKind::Truncated { k_max, .. } => Some(ScalarFamily::Truncated { k_max: *k_max }),
            _ => None,
        }
    }
}

/// Run manifest written next to every command's outputs.
#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_hash: String,
    config: &'a ExperimentConfig,
    outputs: Vec<String>,
}

fn write_manifest(
    dir: &Path,
    command: &str,
    config: &ExperimentConfig,
    outputs: &[PathBuf],
) -> Result<PathBuf> {
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: config.hash(),
        config,
        outputs: outputs
            .iter()
            .map(|p| {
                p.file_name()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned()
            })
            .collect(),
    };
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(path)
}

/// Outputs of a pipeline run: every file written, manifest included.
#[derive(Debug)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
}

/// `simulate`: write one distribution CSV per configured model.
pub fn run_simulate(config: &ExperimentConfig) -> Result<RunOutput> {
    let t = config.circuit_matrix()?;
    let input = config.input_mixture()?;
    std::fs::create_dir_all(&config.output_dir)?;
    let mut files = Vec::new();
    for spec in &config.models {
        let model = spec.kind.build(input.photons())?;
        let dist = output_distribution(&t, &input, &model)?;
        let dist = match config.normalization {
            Normalization::Physical => dist,
            Normalization::Renormalized => dist.renormalized()?,
        };
        let path = config.output_dir.join(format!("dist_{}.csv", spec.name));
        io::write_distribution_csv(&path, &dist)?;
        files.push(path);
    }
    files.push(write_manifest(
        &config.output_dir,
        "simulate",
        config,
        &files,
    )?);
    Ok(RunOutput { files })
}

/// `sample`: draw from a distribution produced by `simulate`.
///
/// The distribution is renormalized after loading, whatever its stored
/// normalization.
pub fn run_sample(dist_path: &Path, count: usize, seed: u64, out: &Path) -> Result<RunOutput> {
    let dist = io::read_distribution_csv(dist_path, Normalization::Physical)?;
    let dist = dist.renormalized()?;
    let samples = draw_samples(&dist, count, seed)?;
    io::write_samples_csv(out, &samples)?;
    let sidecar = sidecar_manifest(
        out,
        "sample",
        &serde_json::json!({
            "dist": dist_path.display().to_string(),
            "count": count,
            "seed": seed,
        }),
    )?;
    Ok(RunOutput {
        files: vec![out.to_path_buf(), sidecar],
    })
}

/// `compare`: distance table with bootstrap errors and fitted overlaps,
/// plus a likelihood-ratio curve per model against the reference model.
pub fn run_compare(config: &ExperimentConfig, samples_path: &Path) -> Result<RunOutput> {
    let reference_name = config
        .reference_model
        .as_deref()
        .ok_or(Error::InvalidConfig {
            field: "reference_model".into(),
            message: "compare requires a reference model".into(),
        })?;
    let t = config.circuit_matrix()?;
    let input = config.input_mixture()?;
    let photons = input.photons();
    let samples: SampleSet = io::read_samples_csv(samples_path, t.outputs())?;
    if samples.photons() != photons {
        return Err(Error::invalid(format!(
            "samples carry {} photons but the input has {}",
            samples.photons(),
            photons
        )));
    }
    let empirical = samples.empirical()?;

    // Distributions per model, with scalar-overlap fitting where requested.
    let mut rows = Vec::new();
    let mut dists: Vec<(String, OutcomeDistribution)> = Vec::new();
    for spec in &config.models {
        let (dist, x_fit) = match (spec.fit_x, spec.kind.scalar_family()) {
            (true, Some(family)) => {
                let (x_star, _) = fit_overlap(&empirical, &t, &input, family)?;
                let model = match family {
                    ScalarFamily::UniformOverlap => ModelKind::UniformOverlap { x: x_star },
                    ScalarFamily::Truncated { k_max } => ModelKind::Truncated { x: x_star, k_max },
                }
                .build(photons)?;
                (
                    output_distribution(&t, &input, &model)?.renormalized()?,
                    Some(x_star),
                )
            }
            (true, None) => {
                return Err(Error::InvalidConfig {
                    field: format!("models[{}].fit_x", rows.len()),
                    message: "fit_x applies only to uniform_overlap and truncated models".into(),
                });
            }
            (false, _) => {
                let model = spec.kind.build(photons)?;
                (
                    output_distribution(&t, &input, &model)?.renormalized()?,
                    None,
                )
            }
        };
        let distance = tvd(&empirical, &dist)?;
        let counts = samples.counts_on_support(&dist)?;
        let (mean, std) = poisson_bootstrap_distance(
            &counts,
            &dist,
            config.bootstrap_trials,
            config.seeds.bootstrap,
        )?;
        rows.push(ModelComparison {
            model: spec.name.clone(),
            distance,
            distance_mean: mean,
            distance_std: std,
            x_fit,
        });
        dists.push((spec.name.clone(), dist));
    }

    let reference = &dists.iter().find(|(n, _)| n == reference_name).unwrap().1;
    std::fs::create_dir_all(&config.output_dir)?;
    let mut files = Vec::new();
    let comparisons = config.output_dir.join("comparisons.csv");
    io::write_comparisons_csv(&comparisons, &rows)?;
    files.push(comparisons);
    for (name, dist) in &dists {
        let curve = likelihood_ratio_curve(&samples, dist, reference)?;
        let path = config.output_dir.join(format!("likelihood_{name}.csv"));
        io::write_likelihood_csv(&path, &curve)?;
        files.push(path);
    }
    files.push(write_manifest(
        &config.output_dir,
        "compare",
        config,
        &files,
    )?);
    Ok(RunOutput { files })
}

/// Options for `characterize`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharacterizeOptions {
    pub x_assumed: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for CharacterizeOptions {
    fn default() -> Self {
        Self {
            x_assumed: 1.0,
            restarts: 20,
            seed: 1,
        }
    }
}

/// Report written by `characterize`: the full reconstruction result
/// (gauge-fixed matrix included) plus record bookkeeping. The matrix is also
/// written standalone as `matrix.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct CharacterizeReport {
    pub matrix: TransferMatrix,
    pub residual: f64,
    pub converged: bool,
    pub n_restarts_used: usize,
    pub records_used: usize,
    /// Full pair count for the given dimensions.
    pub expected_records: usize,
    /// Records missing relative to the full set.
    pub shortfall: usize,
}

/// `characterize`: reconstruct a transfer matrix from counts and
/// visibilities; writes the gauge-fixed matrix JSON and a residual report.
pub fn run_characterize(
    counts_path: &Path,
    visibilities_path: &Path,
    options: &CharacterizeOptions,
    out_dir: &Path,
) -> Result<RunOutput> {
    let counts = io::read_counts_csv(counts_path)?;
    let records = io::read_visibilities_csv(visibilities_path)?;
    let magnitudes = magnitudes_from_counts(&counts)?;
    let (n_out, n_in) = magnitudes.dim();
    let expected = n_in * (n_in - 1) / 2 * (n_out * (n_out - 1) / 2);
    let result = retrieve_phases(
        &magnitudes,
        &records,
        options.x_assumed,
        options.restarts,
        options.seed,
    )?;

    std::fs::create_dir_all(out_dir)?;
    let matrix_path = out_dir.join("matrix.json");
    let mut matrix = result.matrix;
    matrix.set_label("characterized");
    std::fs::write(&matrix_path, serde_json::to_string_pretty(&matrix)? + "\n")?;
    let report = CharacterizeReport {
        matrix,
        residual: result.residual,
        converged: result.converged,
        n_restarts_used: result.n_restarts_used,
        records_used: records.len(),
        expected_records: expected,
        shortfall: expected.saturating_sub(records.len()),
    };
    let report_path = out_dir.join("report.json");
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)? + "\n")?;
    let sidecar = sidecar_manifest(
        &matrix_path,
        "characterize",
        &serde_json::json!({
            "counts": counts_path.display().to_string(),
            "visibilities": visibilities_path.display().to_string(),
            "options": options,
        }),
    )?;
    Ok(RunOutput {
        files: vec![matrix_path, report_path, sidecar],
    })
}

/// Sidecar manifest for single-file commands: `<out>.manifest.json`.
pub fn sidecar_manifest(out: &Path, command: &str, args: &serde_json::Value) -> Result<PathBuf> {
    let manifest = serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "args": args,
    });
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    let path = out.with_file_name(name);
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tempdir(tag: &str) -> PathBuf {
        let dir =
            std::env::temp_dir().join(format!("multiphoton-pipe-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn basic_config(out: &Path) -> String {
        format!(
            r#"{{
  "circuit": {{"haar": {{"modes": 13, "seed": 7}}}},
  "input": {{"pattern": [1, 2, 3]}},
  "models": [
    {{"name": "ideal", "type": "ideal"}},
    {{"name": "dist", "type": "distinguishable"}}
  ],
  "reference_model": "ideal",
  "samples": 500,
  "seeds": {{"sampling": 11, "bootstrap": 13}},
  "bootstrap_trials": 20,
  "output_dir": "{}"
}}"#,
            out.display()
        )
    }

    #[test]
    fn config_validation_reports_field_paths() {
        let out = tempdir("cfg");
        let mut bad = basic_config(&out).replace("\"dist\"", "\"ideal\"");
        match ExperimentConfig::from_json(&bad) {
            Err(Error::InvalidConfig { field, .. }) => assert_eq!(field, "models[1].name"),
            other => panic!("expected invalid config, got {other:?}"),
        }
        bad = basic_config(&out).replace("\"haar\"", "\"haarr\"");
        match ExperimentConfig::from_json(&bad) {
            Err(Error::InvalidConfig { field, .. }) => assert_eq!(field, "circuit"),
            other => panic!("expected invalid config, got {other:?}"),
        }
        let good = ExperimentConfig::from_json(&basic_config(&out)).unwrap();
        assert_eq!(good.models.len(), 2);
    }

    #[test]
    fn simulate_writes_full_support_and_is_reproducible() {
        let out = tempdir("sim");
        let config = ExperimentConfig::from_json(&basic_config(&out)).unwrap();
        let first = run_simulate(&config).unwrap();
        assert_eq!(first.files.len(), 3);
        let ideal = std::fs::read_to_string(out.join("dist_ideal.csv")).unwrap();
        assert_eq!(ideal.lines().count(), 287); // header + 286 patterns
        let bytes_before: Vec<Vec<u8>> = first
            .files
            .iter()
            .map(|f| std::fs::read(f).unwrap())
            .collect();
        let second = run_simulate(&config).unwrap();
        for (f, before) in second.files.iter().zip(bytes_before) {
            assert_eq!(
                std::fs::read(f).unwrap(),
                before,
                "file {} changed",
                f.display()
            );
        }
    }

    #[test]
    fn mixture_simulation_covers_715_patterns() {
        let out = tempdir("mix");
        let text = format!(
            r#"{{
  "circuit": {{"haar": {{"modes": 13, "seed": 3}}}},
  "input": {{"mixture": [
    {{"weight": 0.3333333333333333, "pattern": [1, 2, 3, 4]}},
    {{"weight": 0.3333333333333333, "pattern": [1, 1, 2, 2]}},
    {{"weight": 0.3333333333333334, "pattern": [3, 3, 4, 4]}}
  ]}},
  "models": [{{"name": "ideal", "type": "ideal"}}],
  "output_dir": "{}"
}}"#,
            out.display()
        );
        let config = ExperimentConfig::from_json(&text).unwrap();
        run_simulate(&config).unwrap();
        let csv = std::fs::read_to_string(out.join("dist_ideal.csv")).unwrap();
        assert_eq!(csv.lines().count(), 716);
    }

    #[test]
    fn sample_then_compare_round_trip() {
        let out = tempdir("cmp");
        let config = ExperimentConfig::from_json(&basic_config(&out)).unwrap();
        run_simulate(&config).unwrap();
        let samples_path = out.join("samples.csv");
        run_sample(&out.join("dist_ideal.csv"), 500, 11, &samples_path).unwrap();
        let result = run_compare(&config, &samples_path).unwrap();
        assert!(out.join("comparisons.csv").exists());
        assert!(out.join("likelihood_ideal.csv").exists());
        assert!(out.join("likelihood_dist.csv").exists());
        assert!(result.files.iter().any(|f| f.ends_with("manifest.json")));

        let table = std::fs::read_to_string(out.join("comparisons.csv")).unwrap();
        let mut lines = table.lines();
        assert_eq!(lines.next().unwrap(), "model,D,D_mean,D_std,x_fit");
        let parse_row = |line: &str| -> (String, f64) {
            let fields: Vec<&str> = line.split(',').collect();
            (fields[0].to_string(), fields[1].parse().unwrap())
        };
        let (name_a, d_ideal) = parse_row(lines.next().unwrap());
        let (name_b, d_dist) = parse_row(lines.next().unwrap());
        assert_eq!(name_a, "ideal");
        assert_eq!(name_b, "dist");
        assert!(
            d_ideal < d_dist,
            "samples from the ideal model should sit closer to it ({d_ideal} vs {d_dist})"
        );

        // The reference model's own curve is identically one.
        let own = std::fs::read_to_string(out.join("likelihood_ideal.csv")).unwrap();
        for line in own.lines().skip(1) {
            let l: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(l, 1.0);
        }
    }

    #[test]
    fn characterize_round_trips_through_files() {
        let out = tempdir("char");
        let u = haar_random(8, 9).unwrap();
        let slice = u.select_inputs(&[0, 1, 2, 3]).unwrap();
        let counts = crate::characterize::CountTable::new(
            (0..4)
                .map(|j| (0..8).map(|k| 1e6 * slice.get(k, j).norm_sqr()).collect())
                .collect(),
        )
        .unwrap();
        let counts_path = out.join("counts.csv");
        io::write_counts_csv(&counts_path, &counts).unwrap();
        let set =
            crate::characterize::synth_visibility_set(&slice, &[0, 1, 2, 3], 1.0, 0.0, 5).unwrap();
        let vis_path = out.join("vis.csv");
        io::write_visibilities_csv(&vis_path, &set.records).unwrap();

        let result = run_characterize(
            &counts_path,
            &vis_path,
            &CharacterizeOptions::default(),
            &out,
        )
        .unwrap();
        assert_eq!(result.files.len(), 3);
        let matrix: TransferMatrix =
            serde_json::from_str(&std::fs::read_to_string(out.join("matrix.json")).unwrap())
                .unwrap();
        let truth =
            crate::matrix::canonical_conjugation(&crate::matrix::fix_gauge(&slice).matrix, 1e-9);
        assert!(crate::linalg::max_abs_diff(matrix.entries(), truth.entries()) < 1e-6);
        let report: CharacterizeReport =
            serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap())
                .unwrap();
        assert_eq!(report.expected_records, 6 * 28);
        assert_eq!(report.shortfall, 0);
        assert!(report.converged);

        // An incomplete visibility file is reported as a shortfall.
        io::write_visibilities_csv(&vis_path, &set.records[..set.records.len() - 10]).unwrap();
        run_characterize(
            &counts_path,
            &vis_path,
            &CharacterizeOptions::default(),
            &out,
        )
        .unwrap();
        let report: CharacterizeReport =
            serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap())
                .unwrap();
        assert_eq!(report.shortfall, 10);
    }

    /// Samples drawn from the ideal model land closer to it than to the
    /// distinguishable model on every seeded pipeline run.
    #[test]
    fn compare_orders_models_across_seeds() {
        let out = tempdir("order");
        let text = format!(
            r#"{{
  "circuit": {{"haar": {{"modes": 13, "seed": 7}}}},
  "input": {{"pattern": [1, 2, 3]}},
  "models": [
    {{"name": "ideal", "type": "ideal"}},
    {{"name": "dist", "type": "distinguishable"}}
  ],
  "reference_model": "ideal",
  "bootstrap_trials": 2,
  "output_dir": "{}"
}}"#,
            out.display()
        );
        let config = ExperimentConfig::from_json(&text).unwrap();
        run_simulate(&config).unwrap();
        for seed in 0..10u64 {
            let samples_path = out.join(format!("samples_{seed}.csv"));
            run_sample(&out.join("dist_ideal.csv"), 10_000, seed, &samples_path).unwrap();
            run_compare(&config, &samples_path).unwrap();
            let table = std::fs::read_to_string(out.join("comparisons.csv")).unwrap();
            let d: Vec<f64> = table
                .lines()
                .skip(1)
                .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
                .collect();
            assert!(
                d[0] < d[1],
                "seed {seed}: ideal D {} vs distinguishable D {}",
                d[0],
                d[1]
            );
        }
    }
}

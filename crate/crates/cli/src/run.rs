//! The `predict` pipeline: ingest, validate, tournament, report, dumps.

use std::fs;
use std::path::PathBuf;

use splinecast::criteria::Q;
use splinecast::energy::{build_families, FamilyId};
use splinecast::tournament::{run_tournament, AnalyzedFamily, TournamentResult};
use splinecast::SeriesData;

use crate::emit;
use crate::error::CliError;
use crate::ingest;
use crate::report::{digest, q_labels, ConfigEcho, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Everything one `predict` invocation needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub lag: usize,
    pub qs: Vec<Q>,
    pub families: Vec<FamilyId>,
    pub tol_rel: f64,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub emit_weights: Option<PathBuf>,
    pub emit_basis: Option<usize>,
    pub emit_spline: Option<PathBuf>,
    pub emit_svg: Option<PathBuf>,
    pub full_precision: bool,
    pub samples_per_interval: usize,
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.lag < 1 {
            return Err(CliError::Config("lag must be at least 1".into()));
        }
        if self.qs.is_empty() {
            return Err(CliError::Config("the q set must not be empty".into()));
        }
        if self.families.is_empty() {
            return Err(CliError::Config("the family set must not be empty".into()));
        }
        if self.tol_rel.is_nan() || self.tol_rel <= 0.0 {
            return Err(CliError::Config("tol must be positive".into()));
        }
        Ok(())
    }
}

pub struct RunOutcome {
    pub report: RunReport,
    pub rendered: String,
    pub results: Vec<TournamentResult>,
    pub series: SeriesData,
}

/// Runs the whole pipeline and writes the report plus any dumps.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    config.validate()?;

    let raw = fs::read(&config.input).map_err(|e| {
        CliError::Ingestion(format!("cannot read {}: {e}", config.input.display()))
    })?;
    let text = String::from_utf8(raw.clone())
        .map_err(|_| CliError::Ingestion("input is not valid UTF-8".into()))?;
    let series = ingest::parse_series(&text)?;

    let n = series.n();
    if series.values().len() < config.lag + 2 {
        return Err(CliError::Ingestion(format!(
            "insufficient data: need at least {} rows for lag {}, got {}",
            config.lag + 2,
            config.lag,
            series.values().len()
        )));
    }
    if let Some(level) = config.emit_basis {
        if level < 1 || level > n {
            return Err(CliError::Config(format!(
                "basis level {level} outside 1..={n}"
            )));
        }
    }

    let built = build_families(&config.families, n).map_err(CliError::from)?;
    let analyzed: Vec<AnalyzedFamily> = built
        .iter()
        .map(|f| AnalyzedFamily::from_family(f, config.tol_rel))
        .collect::<Result<_, _>>()
        .map_err(CliError::from)?;

    let mut warnings = Vec::new();
    for family in &analyzed {
        for w in &family.warnings {
            warnings.push(format!(
                "family {}: level {} pivot ratio {:.3e} exceeds the conditioning limit",
                family.id.map_or("canonical", |f| f.tag()),
                w.level,
                w.pivot_ratio
            ));
        }
        for pm in &family.levels {
            if !pm.near_threshold().is_empty() {
                warnings.push(format!(
                    "family {}: level {} rows {:?} have trend products within a decade of the tolerance cut",
                    family.id.map_or("canonical", |f| f.tag()),
                    pm.level(),
                    pm.near_threshold()
                ));
            }
        }
    }

    let results = run_tournament(&analyzed, &series, &config.qs, config.lag)
        .map_err(CliError::from)?;

    let echo = ConfigEcho {
        lag: config.lag,
        q: q_labels(&config.qs),
        families: config.families.iter().map(|f| f.tag().to_string()).collect(),
        tol_rel: config.tol_rel,
        full_precision: config.full_precision,
    };
    let report = RunReport::assemble(&results, &series, echo, digest(&raw), warnings);
    let rendered = match config.format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => report.to_csv(),
    };

    if let Some(path) = &config.output {
        fs::write(path, &rendered)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    if let Some(dir) = &config.emit_weights {
        emit::emit_weights(dir, &results, &series)?;
    }
    if let Some(level) = config.emit_basis {
        let dir = config
            .emit_weights
            .clone()
            .unwrap_or_else(|| PathBuf::from("."));
        emit::emit_basis(&dir, &analyzed, level)?;
    }
    if let Some(path) = &config.emit_spline {
        emit::emit_spline(path, &series, config.samples_per_interval)?;
    }
    if let Some(dir) = &config.emit_svg {
        emit::emit_svg(dir, &results, &series)?;
    }

    Ok(RunOutcome { report, rendered, results, series })
}

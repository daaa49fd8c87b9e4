//! The run report: structure, 7-significant-digit formatting, and the
//! JSON/CSV encodings with lossless round trips.

use serde::{Deserialize, Serialize};
use splinecast::criteria::{CriterionId, Q};
use splinecast::tournament::TournamentResult;
use splinecast::SeriesData;

use crate::error::CliError;

/// Rounds to 7 significant digits; report numbers use this unless full
/// precision is requested.
pub fn round_sig7(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let exponent = x.abs().log10().floor() as i32;
    let shift = 6 - exponent;
    let factor = 10f64.powi(shift);
    (x * factor).round() / factor
}

/// Formats with exactly 7 significant digits (padded decimals).
pub fn format_sig7(x: f64) -> String {
    if x == 0.0 {
        return "0.000000".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded = round_sig7(x);
    let exponent = rounded.abs().log10().floor() as i32;
    let decimals = (6 - exponent).clamp(0, 17) as usize;
    format!("{rounded:.decimals$}")
}

fn format_value(x: f64, full_precision: bool) -> String {
    if full_precision {
        format!("{x}")
    } else {
        format_sig7(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub lag: usize,
    pub q: Vec<String>,
    pub families: Vec<String>,
    pub tol_rel: f64,
    pub full_precision: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEcho {
    pub start_year: i64,
    pub count: usize,
    pub n: usize,
    pub last_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionEcho {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q1: Option<String>,
}

impl CriterionEcho {
    pub fn from_id(id: CriterionId) -> Self {
        let (u, v, q1) = match id {
            CriterionId::U { u } => (Some(u), None, None),
            CriterionId::Mean | CriterionId::MaxCor => (None, None, None),
            CriterionId::Tail1 { u } | CriterionId::Tail2 { u } | CriterionId::Var { u } => {
                (Some(u), None, None)
            }
            CriterionId::NearUniform { q1 } => (None, None, Some(q1.label().to_string())),
            CriterionId::Fd { u, v } => (Some(u), Some(v), None),
        };
        Self { kind: id.kind_name().to_string(), u, v, q1 }
    }
}

/// One table row: the winner for one cost exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QRow {
    pub q: String,
    pub family: String,
    pub criterion: CriterionEcho,
    pub cost: f64,
    pub stage_costs: Vec<f64>,
    pub backtest_prediction: f64,
    pub true_value: f64,
    pub forecast: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub input_digest: String,
    pub config: ConfigEcho,
    pub series: SeriesEcho,
    pub warnings: Vec<String>,
    pub results: Vec<QRow>,
}

impl RunReport {
    pub fn assemble(
        results: &[TournamentResult],
        series: &SeriesData,
        config: ConfigEcho,
        input_digest: String,
        warnings: Vec<String>,
    ) -> Self {
        let full = config.full_precision;
        let shrink = |x: f64| if full { x } else { round_sig7(x) };
        let rows = results
            .iter()
            .map(|r| QRow {
                q: r.q.label().to_string(),
                family: r.family.map_or_else(|| "canonical".to_string(), |f| f.tag().to_string()),
                criterion: CriterionEcho::from_id(r.criterion),
                cost: shrink(r.cost),
                stage_costs: r.stage_results.iter().map(|s| shrink(s.cost)).collect(),
                backtest_prediction: shrink(r.backtest_prediction),
                true_value: shrink(*series.values().last().expect("non-empty")),
                forecast: shrink(r.forecast),
            })
            .collect();
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            input_digest,
            config,
            series: SeriesEcho {
                start_year: series.start_year(),
                count: series.values().len(),
                n: series.n(),
                last_value: shrink(*series.values().last().expect("non-empty")),
            },
            warnings,
            results: rows,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Io(format!("invalid report JSON: {e}")))
    }

    /// Flattened spreadsheet encoding: `# key=value` metadata lines,
    /// then a header and one row per exponent.
    pub fn to_csv(&self) -> String {
        let full = self.config.full_precision;
        let fv = |x: f64| format_value(x, full);
        let mut out = String::new();
        out.push_str(&format!("# version={}\n", self.version));
        out.push_str(&format!("# input_digest={}\n", self.input_digest));
        out.push_str(&format!("# lag={}\n", self.config.lag));
        out.push_str(&format!("# q={}\n", self.config.q.join(";")));
        out.push_str(&format!("# families={}\n", self.config.families.join(";")));
        out.push_str(&format!("# tol_rel={}\n", self.config.tol_rel));
        out.push_str(&format!("# full_precision={}\n", self.config.full_precision));
        out.push_str(&format!(
            "# series_start_year={} series_count={} series_n={} series_last_value={}\n",
            self.series.start_year,
            self.series.count,
            self.series.n,
            fv(self.series.last_value)
        ));
        for warning in &self.warnings {
            out.push_str(&format!("# warning={warning}\n"));
        }
        out.push_str(
            "q,family,criterion,u,v,q1,cost,stage1,stage2,stage3,stage4,stage5,stage6,stage7,\
             backtest_prediction,true_value,forecast\n",
        );
        for row in &self.results {
            let opt_usize = |v: Option<usize>| v.map_or(String::new(), |x| x.to_string());
            let stages: Vec<String> = row.stage_costs.iter().map(|&c| fv(c)).collect();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                row.q,
                row.family,
                row.criterion.kind,
                opt_usize(row.criterion.u),
                opt_usize(row.criterion.v),
                row.criterion.q1.clone().unwrap_or_default(),
                fv(row.cost),
                stages.join(","),
                fv(row.backtest_prediction),
                fv(row.true_value),
                fv(row.forecast),
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, CliError> {
        let bad = |m: String| CliError::Io(format!("invalid report CSV: {m}"));
        let mut version = String::new();
        let mut input_digest = String::new();
        let mut config = ConfigEcho {
            lag: 0,
            q: Vec::new(),
            families: Vec::new(),
            tol_rel: 0.0,
            full_precision: false,
        };
        let mut series = SeriesEcho { start_year: 0, count: 0, n: 0, last_value: 0.0 };
        let mut warnings = Vec::new();
        let mut results = Vec::new();
        let mut seen_header = false;

        for line in text.lines() {
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix("# ") {
                if let Some(value) = meta.strip_prefix("version=") {
                    version = value.to_string();
                } else if let Some(value) = meta.strip_prefix("input_digest=") {
                    input_digest = value.to_string();
                } else if let Some(value) = meta.strip_prefix("lag=") {
                    config.lag = value.parse().map_err(|_| bad(format!("lag '{value}'")))?;
                } else if let Some(value) = meta.strip_prefix("q=") {
                    config.q = value.split(';').map(str::to_string).collect();
                } else if let Some(value) = meta.strip_prefix("families=") {
                    config.families = value.split(';').map(str::to_string).collect();
                } else if let Some(value) = meta.strip_prefix("tol_rel=") {
                    config.tol_rel =
                        value.parse().map_err(|_| bad(format!("tol_rel '{value}'")))?;
                } else if let Some(value) = meta.strip_prefix("full_precision=") {
                    config.full_precision =
                        value.parse().map_err(|_| bad(format!("full_precision '{value}'")))?;
                } else if let Some(value) = meta.strip_prefix("warning=") {
                    warnings.push(value.to_string());
                } else if meta.starts_with("series_start_year=") {
                    for part in meta.split(' ') {
                        let mut kv = part.splitn(2, '=');
                        match (kv.next(), kv.next()) {
                            (Some("series_start_year"), Some(v)) => {
                                series.start_year =
                                    v.parse().map_err(|_| bad(format!("start year '{v}'")))?
                            }
                            (Some("series_count"), Some(v)) => {
                                series.count =
                                    v.parse().map_err(|_| bad(format!("count '{v}'")))?
                            }
                            (Some("series_n"), Some(v)) => {
                                series.n = v.parse().map_err(|_| bad(format!("n '{v}'")))?
                            }
                            (Some("series_last_value"), Some(v)) => {
                                series.last_value =
                                    v.parse().map_err(|_| bad(format!("last value '{v}'")))?
                            }
                            _ => return Err(bad(format!("series line part '{part}'"))),
                        }
                    }
                } else {
                    return Err(bad(format!("unknown metadata line '{line}'")));
                }
                continue;
            }
            if !seen_header {
                seen_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 17 {
                return Err(bad(format!("expected 17 fields, got {}", fields.len())));
            }
            let parse_f64 =
                |s: &str| s.parse::<f64>().map_err(|_| bad(format!("number '{s}'")));
            let parse_opt = |s: &str| -> Result<Option<usize>, CliError> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad(format!("index '{s}'")))
                }
            };
            results.push(QRow {
                q: fields[0].to_string(),
                family: fields[1].to_string(),
                criterion: CriterionEcho {
                    kind: fields[2].to_string(),
                    u: parse_opt(fields[3])?,
                    v: parse_opt(fields[4])?,
                    q1: if fields[5].is_empty() { None } else { Some(fields[5].to_string()) },
                },
                cost: parse_f64(fields[6])?,
                stage_costs: fields[7..14]
                    .iter()
                    .map(|s| parse_f64(s))
                    .collect::<Result<_, _>>()?,
                backtest_prediction: parse_f64(fields[14])?,
                true_value: parse_f64(fields[15])?,
                forecast: parse_f64(fields[16])?,
            });
        }
        Ok(Self { version, input_digest, config, series, warnings, results })
    }
}

/// FNV-1a 64-bit hash, hex encoded; identifies the exact input bytes.
pub fn digest(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &byte in bytes {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("fnv1a64:{hash:016x}")
}

/// Labels matching the CLI's `--q` flag values.
pub fn q_labels(qs: &[Q]) -> Vec<String> {
    qs.iter().map(|q| q.label().to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig7_matches_printed_table_precision() {
        assert_eq!(format_sig7(0.42330629), "0.4233063");
        assert_eq!(format_sig7(13.019856), "13.01986");
        assert_eq!(format_sig7(1.22077), "1.220770");
        assert_eq!(format_sig7(-0.42330629), "-0.4233063");
        assert_eq!(format_sig7(0.0), "0.000000");
        assert_eq!(format_sig7(12345678.9), "12345680");
    }

    #[test]
    fn rounding_is_idempotent() {
        for x in [0.1234567891, -98765.43215, 3.5e-8, 7.0] {
            let once = round_sig7(x);
            assert_eq!(round_sig7(once), once);
        }
    }

    #[test]
    fn sig7_near_magnitude_boundaries() {
        // rounding may carry into the next magnitude; the digit count
        // must follow the rounded value
        assert_eq!(format_sig7(0.999999951), "1.000000");
        assert_eq!(format_sig7(9.99999951), "10.00000");
    }

    fn sample_report() -> RunReport {
        RunReport {
            version: "0.1.0".into(),
            input_digest: digest(b"year,value\n2000,1.0\n"),
            config: ConfigEcho {
                lag: 4,
                q: vec!["1".into(), "2".into(), "inf".into()],
                families: vec!["M".into(), "S".into()],
                tol_rel: 1e-10,
                full_precision: false,
            },
            series: SeriesEcho { start_year: 2000, count: 61, n: 60, last_value: 11.8 },
            warnings: vec!["family M level 3: pivot ratio 2e12".into()],
            results: vec![QRow {
                q: "2".into(),
                family: "Minv".into(),
                criterion: CriterionEcho {
                    kind: "S_fd".into(),
                    u: Some(93),
                    v: Some(5),
                    q1: None,
                },
                cost: 0.278453,
                stage_costs: vec![0.5, 0.4, 0.4, 0.4, 0.3, 0.3, 0.278453],
                backtest_prediction: 13.01986,
                true_value: 13.8,
                forecast: 13.06234,
            }],
        }
    }

    #[test]
    fn json_roundtrip_is_lossless() {
        let report = sample_report();
        let text = report.to_json();
        let back = RunReport::from_json(&text).unwrap();
        assert_eq!(back, report);
        // serialization is deterministic
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn csv_roundtrip_is_lossless() {
        let report = sample_report();
        let text = report.to_csv();
        let back = RunReport::from_csv(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest(b""), "fnv1a64:cbf29ce484222325");
        assert_eq!(digest(b"abc"), digest(b"abc"));
        assert_ne!(digest(b"abc"), digest(b"abd"));
    }
}

//! Experiment orchestration: spec files, reproducible runs, JSON/CSV
//! persistence and structural comparison.
//!
//! A spec fully determines a run; rerunning writes byte-identical files.
//! Everything serialized goes through sorted maps, p-adic quantities are
//! exponent strings (`p^-3`, `p^-7/2`), never decimals, and each table
//! carries the name of the operation that produced it.

use crate::checkers::{
    check_th_da, check_th_main, concat_scheme_checker, lmad_certificate_periodic,
    prop_lem1_check, CheckOutcome, Lem1Subject, MSpec, OrbitEvidence, PairDichotomy,
    ThMainInstance, Verdict,
};
use crate::dynamics::{factor_graph, uk_collection, Saturation};
use crate::matrices::matrix_of_word;
use crate::proj::{pbad_estimate, ProjPoint};
use crate::words::{
    complexity, parse_word, source_from_map, SourceKind, WordSource,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: &str = "1";

/// Default working precision for checkers when a spec omits `precision`.
pub const DEFAULT_PRECISION: u32 = 6;
/// Default box bound for badly-approximable scans.
pub const DEFAULT_PBAD_BOUND: u64 = 50;
/// Default prefix window.
pub const DEFAULT_WINDOW: usize = 1 << 14;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("spec error: {0}")]
    Spec(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("run error in checker `{checker}`: {message}")]
    Run { checker: String, message: String },
    #[error("schema mismatch: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

fn spec_err<T>(msg: impl fmt::Display) -> Result<T> {
    Err(ExperimentError::Spec(msg.to_string()))
}

/// Exit classification of a run, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RunStatus {
    Success = 0,
    HypothesisFailures = 1,
    PrecisionLimited = 2,
    Error = 3,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        self as i32
    }
}

/// Parsed experiment specification.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub name: String,
    pub raw: String,
    pub source: Option<WordSource>,
    pub p: u64,
    pub k_list: Vec<u32>,
    pub window: usize,
    pub shift_max: usize,
    pub trajectory_window: usize,
    pub checkers: Vec<String>,
    pub params: BTreeMap<String, String>,
}

impl ExperimentSpec {
    /// Parse `key = value` text (see the README for the schema).
    pub fn parse(text: &str) -> Result<ExperimentSpec> {
        let mut map: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return spec_err(format!("line {}: expected `key = value`", idx + 1));
            };
            let key = key.trim().to_string();
            if map.contains_key(&key) {
                return spec_err(format!("line {}: duplicate key `{key}`", idx + 1));
            }
            map.insert(key, (idx + 1, value.trim().to_string()));
        }
        let get = |k: &str| map.get(k).map(|(_, v)| v.clone());
        let name = get("name").unwrap_or_else(|| "experiment".into());
        let p: u64 = match get("prime") {
            Some(t) => t
                .parse()
                .map_err(|_| ExperimentError::Spec("bad `prime`".into()))?,
            None => return spec_err("missing `prime`"),
        };
        if p < 2 {
            return spec_err("`prime` must be at least 2");
        }
        let k_list: Vec<u32> = match get("precision") {
            None => vec![DEFAULT_PRECISION],
            Some(t) => {
                let ks: std::result::Result<Vec<u32>, _> =
                    t.split(',').map(|x| x.trim().parse()).collect();
                let ks = ks.map_err(|_| ExperimentError::Spec("bad `precision`".into()))?;
                if ks.is_empty() || ks.iter().any(|&k| k == 0) {
                    return spec_err("`precision` entries must be ≥ 1");
                }
                ks
            }
        };
        let window = match get("window") {
            None => DEFAULT_WINDOW,
            Some(t) => t
                .parse()
                .map_err(|_| ExperimentError::Spec("bad `window`".into()))?,
        };
        let shift_max = match get("shift_max") {
            None => 100,
            Some(t) => t
                .parse()
                .map_err(|_| ExperimentError::Spec("bad `shift_max`".into()))?,
        };
        let trajectory_window = match get("trajectory_window") {
            None => 10usize.saturating_mul((p as usize).saturating_pow(k_list[0])),
            Some(t) => t
                .parse()
                .map_err(|_| ExperimentError::Spec("bad `trajectory_window`".into()))?,
        };
        let checkers: Vec<String> = match get("checker") {
            None => return spec_err("missing `checker` (comma-separated list)"),
            Some(t) => {
                let list: Vec<String> = t
                    .split(',')
                    .map(|x| x.trim().to_string())
                    .filter(|x| !x.is_empty())
                    .collect();
                if list.is_empty() {
                    return spec_err("empty checker list");
                }
                list
            }
        };
        let source = if map.contains_key("kind") {
            Some(
                source_from_map(&map)
                    .map_err(|e| ExperimentError::Spec(format!("source: {e}")))?,
            )
        } else {
            None
        };
        let params: BTreeMap<String, String> =
            map.into_iter().map(|(k, (_, v))| (k, v)).collect();
        Ok(ExperimentSpec {
            name,
            raw: text.to_string(),
            source,
            p,
            k_list,
            window,
            shift_max,
            trajectory_window,
            checkers,
            params,
        })
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.raw.as_bytes());
        hex_string(&h.finalize())
    }

    fn param(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(|s| s.as_str())
    }

    fn param_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.param(key) {
            None => Ok(default),
            Some(t) => t
                .parse()
                .map_err(|_| ExperimentError::Spec(format!("bad `{key}`"))),
        }
    }

    fn source_required(&self) -> Result<&WordSource> {
        self.source
            .as_ref()
            .ok_or_else(|| ExperimentError::Spec("this checker needs a word source".into()))
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// One CSV table plus the operation it traces to.
#[derive(Debug, Clone)]
pub struct TableOut {
    pub name: String,
    pub provenance: String,
    pub csv: String,
}

/// Output of one checker pipeline.
#[derive(Debug, Clone)]
pub struct CheckerOut {
    pub checker: String,
    pub json: Value,
    pub tables: Vec<TableOut>,
    pub status: RunStatus,
}

/// A full run result ready for persistence.
#[derive(Debug, Clone)]
pub struct ResultRecord {
    pub spec_name: String,
    pub spec_hash: String,
    pub outputs: Vec<CheckerOut>,
}

impl ResultRecord {
    pub fn status(&self) -> RunStatus {
        self.outputs
            .iter()
            .map(|o| o.status)
            .max()
            .unwrap_or(RunStatus::Success)
    }

    pub fn to_json(&self) -> Value {
        let mut checkers = Vec::new();
        for out in &self.outputs {
            let mut m = Map::new();
            m.insert("checker".into(), json!(out.checker));
            m.insert("result".into(), out.json.clone());
            m.insert(
                "tables".into(),
                Value::Array(
                    out.tables
                        .iter()
                        .map(|t| {
                            json!({
                                "name": t.name,
                                "provenance": t.provenance,
                                "csv": t.csv,
                            })
                        })
                        .collect(),
                ),
            );
            m.insert("status".into(), json!(out.status.exit_code()));
            checkers.push(Value::Object(m));
        }
        json!({
            "schema_version": SCHEMA_VERSION,
            "spec_name": self.spec_name,
            "spec_hash": self.spec_hash,
            "checkers": checkers,
        })
    }

    /// Write `<dir>/<name>.json` and one CSV per table; returns the paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let json_path = dir.join(format!("{}.json", self.spec_name));
        let mut text = serde_json::to_string_pretty(&self.to_json())
            .expect("serializable by construction");
        text.push('\n');
        std::fs::write(&json_path, text)?;
        written.push(json_path);
        for out in &self.outputs {
            for t in &out.tables {
                let path = dir.join(format!("{}.{}.{}.csv", self.spec_name, out.checker, t.name));
                std::fs::write(&path, &t.csv)?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

// ---------------------------------------------------------------------------
// Run.
// ---------------------------------------------------------------------------

/// Execute every checker in the spec.  Checker-level precision failures
/// are recorded in the output rather than aborting the run.
pub fn run(spec: &ExperimentSpec) -> Result<ResultRecord> {
    let mut outputs = Vec::new();
    for checker in &spec.checkers {
        let out = match checker.as_str() {
            "complexity" => run_complexity(spec),
            "factor-graph" => run_factor_graph(spec),
            "uk-sets" => run_uk_sets(spec),
            "lmad-periodic" => run_lmad_periodic(spec),
            "concat-scheme" => run_concat(spec),
            "lem1-dichotomy" => run_lem1(spec),
            "pbad" => run_pbad(spec),
            "th-main" => run_th_main(spec),
            "th-da" => run_th_da(spec),
            other => spec_err(format!("unknown checker `{other}`")),
        };
        match out {
            Ok(o) => outputs.push(o),
            Err(ExperimentError::Spec(m)) => return Err(ExperimentError::Spec(m)),
            Err(e) => outputs.push(CheckerOut {
                checker: checker.clone(),
                json: json!({ "error": e.to_string() }),
                tables: Vec::new(),
                status: RunStatus::Error,
            }),
        }
    }
    Ok(ResultRecord {
        spec_name: spec.name.clone(),
        spec_hash: spec.hash(),
        outputs,
    })
}

fn run_err<T>(checker: &str, e: impl fmt::Display) -> Result<T> {
    Err(ExperimentError::Run {
        checker: checker.into(),
        message: e.to_string(),
    })
}

fn csv_of(header: &str, rows: &[String]) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(r);
        out.push('\n');
    }
    out
}

fn verdict_json(o: &CheckOutcome) -> Value {
    let verdict = match &o.verdict {
        Verdict::Applies { epsilon_sq } => json!({
            "kind": "applies",
            "epsilon_sq": epsilon_sq.render(),
            "epsilon_approx": format!("{:.6e}", epsilon_sq.to_f64().sqrt()),
        }),
        Verdict::NotInLmadUnconditionally => json!({ "kind": "not_in_lmad_unconditionally" }),
        Verdict::HypothesisFailed { reason } => json!({
            "kind": "hypothesis_failed",
            "reason": reason,
        }),
        Verdict::PrecisionLimited { reason } => json!({
            "kind": "precision_limited",
            "reason": reason,
        }),
    };
    json!({
        "verdict": verdict,
        "quantities": o.quantities,
        "caveats": o.caveats,
    })
}

fn status_of_outcomes<'a>(outcomes: impl Iterator<Item = &'a CheckOutcome>) -> RunStatus {
    let mut status = RunStatus::Success;
    for o in outcomes {
        let s = match o.verdict {
            Verdict::Applies { .. } | Verdict::NotInLmadUnconditionally => RunStatus::Success,
            Verdict::HypothesisFailed { .. } => RunStatus::HypothesisFailures,
            Verdict::PrecisionLimited { .. } => RunStatus::PrecisionLimited,
        };
        status = status.max(s);
    }
    status
}

fn run_complexity(spec: &ExperimentSpec) -> Result<CheckerOut> {
    let source = spec.source_required()?;
    let n_max = spec.param_usize("complexity.n_max", 12)?;
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for n in 1..=n_max {
        let (p_n, exact) =
            complexity(source, n, spec.window).map_err(|e| ExperimentError::Run {
                checker: "complexity".into(),
                message: e.to_string(),
            })?;
        rows.push(format!("{n},{p_n},{exact}"));
        json_rows.push(json!({ "n": n, "P": p_n, "exact": exact }));
    }
    Ok(CheckerOut {
        checker: "complexity".into(),
        json: json!({
            "source": source.to_string(),
            "window": spec.window,
            "rows": json_rows,
        }),
        tables: vec![TableOut {
            name: "complexity".into(),
            provenance: "words::complexity".into(),
            csv: csv_of("n,P,exact", &rows),
        }],
        status: RunStatus::Success,
    })
}

fn run_factor_graph(spec: &ExperimentSpec) -> Result<CheckerOut> {
    let source = spec.source_required()?;
    let n_min = spec.param_usize("graph.n_min", 1)?;
    let n_max = spec.param_usize("graph.n_max", 8)?;
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    let mut edge_law = true;
    let mut any_lower_bound = false;
    for n in n_min..=n_max {
        let g = factor_graph(source, n, spec.window).map_err(|e| ExperimentError::Run {
            checker: "factor-graph".into(),
            message: e.to_string(),
        })?;
        let (p2n, _) = complexity(source, 2 * n, spec.window).map_err(|e| {
            ExperimentError::Run {
                checker: "factor-graph".into(),
                message: e.to_string(),
            }
        })?;
        if g.exact && g.edges.len() != p2n {
            edge_law = false;
        }
        any_lower_bound |= !g.exact;
        rows.push(format!(
            "{n},{},{},{},{}",
            g.left.len(),
            g.edges.len(),
            g.components,
            g.exact
        ));
        json_rows.push(json!({
            "n": n,
            "vertices_per_side": g.left.len(),
            "edges": g.edges.len(),
            "P_2n": p2n,
            "components": g.components,
            "exact": g.exact,
        }));
    }
    Ok(CheckerOut {
        checker: "factor-graph".into(),
        json: json!({
            "source": source.to_string(),
            "window": spec.window,
            "edge_law_holds": edge_law,
            "rows": json_rows,
        }),
        tables: vec![TableOut {
            name: "components".into(),
            provenance: "dynamics::factor_graph".into(),
            csv: csv_of("n,vertices_per_side,edges,components,exact", &rows),
        }],
        status: if !edge_law {
            RunStatus::Error
        } else if any_lower_bound {
            RunStatus::PrecisionLimited
        } else {
            RunStatus::Success
        },
    })
}

fn run_uk_sets(spec: &ExperimentSpec) -> Result<CheckerOut> {
    let source = spec.source_required()?;
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    let mut all_saturated = true;
    for &k in &spec.k_list {
        let col = uk_collection(source, spec.p, k, spec.shift_max, Some(spec.window))
            .map_err(|e| ExperimentError::Run {
                checker: "uk-sets".into(),
                message: e.to_string(),
            })?;
        all_saturated &= col.all_saturated;
        let sat = |s: &Saturation| match s {
            Saturation::ExactCycle { period } => format!("exact-cycle({period})"),
            Saturation::Window { window } => format!("window({window})"),
            Saturation::No => "no".into(),
        };
        let base_size = col.sets[col.assignment[0]].len();
        rows.push(format!(
            "{k},{base_size},{},{},{}",
            col.sets.len(),
            col.equal_cardinality.map_or("n/a".into(), |b| b.to_string()),
            col.all_saturated
        ));
        json_rows.push(json!({
            "k": k,
            "uk_size": base_size,
            "collection_size": col.sets.len(),
            "equal_cardinality": col.equal_cardinality,
            "all_saturated": col.all_saturated,
            "saturation": col.sets.iter().map(|s| sat(&s.saturated)).collect::<Vec<_>>(),
        }));
    }
    Ok(CheckerOut {
        checker: "uk-sets".into(),
        json: json!({
            "source": source.to_string(),
            "p": spec.p,
            "shift_max": spec.shift_max,
            "rows": json_rows,
        }),
        tables: vec![TableOut {
            name: "sizes".into(),
            provenance: "dynamics::uk_collection".into(),
            csv: csv_of("k,uk_size,collection_size,equal_cardinality,all_saturated", &rows),
        }],
        status: if all_saturated {
            RunStatus::Success
        } else {
            RunStatus::PrecisionLimited
        },
    })
}

fn run_lmad_periodic(spec: &ExperimentSpec) -> Result<CheckerOut> {
    let source = spec.source_required()?;
    let period = match source.kind() {
        SourceKind::Periodic { period } => period.clone(),
        _ => return spec_err("lmad-periodic needs a periodic source"),
    };
    let bounds: Vec<u64> = match spec.param("lmad.bounds") {
        None => vec![10, DEFAULT_PBAD_BOUND, 100],
        Some(t) => t
            .split(',')
            .map(|x| x.trim().parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| ExperimentError::Spec("bad `lmad.bounds`".into()))?,
    };
    let samples = spec.param_usize("lmad.samples", 20)?;
    let seed = spec.param_usize("lmad.seed", 1)? as u64;
    let k = spec.k_list[0];
    let cert = match lmad_certificate_periodic(&period, spec.p, k, &bounds, samples, seed) {
        Ok(c) => c,
        Err(e) => return run_err("lmad-periodic", e),
    };
    let eigen_json: Vec<Value> = cert
        .eigen_evidence
        .iter()
        .map(|e| {
            json!({
                "eigenvector": e.label,
                "reports": e.reports.iter().map(|r| json!({
                    "bound": r.bound,
                    "epsilon": r.epsilon.render(),
                    "witness": [r.witness.0, r.witness.1],
                    "precision_limited": r.precision_limited,
                })).collect::<Vec<_>>(),
                "image_positive": e.image_reports.iter().all(|r| r.is_positive_evidence()),
            })
        })
        .collect();
    let samples_json: Vec<Value> = cert.sample_verdicts.iter().map(verdict_json).collect();
    let status = status_of_outcomes(cert.sample_verdicts.iter());
    Ok(CheckerOut {
        checker: "lmad-periodic".into(),
        json: json!({
            "period": crate::words::render_word(&cert.period),
            "p": spec.p,
            "k": k,
            "conclusive": cert.is_conclusive(),
            "ramified": cert.ramified,
            "eigen_evidence": eigen_json,
            "samples": samples_json,
        }),
        tables: Vec::new(),
        status,
    })
}

fn run_concat(spec: &ExperimentSpec) -> Result<CheckerOut> {
    let source = spec.source_required()?;
    let (seeds, program) = match source.kind() {
        SourceKind::Concat { seeds, program } => (seeds.clone(), program.clone()),
        _ => return spec_err("concat-scheme needs a concat source"),
    };
    let n_max = spec.param_usize("concat.n_max", 4096)?;
    let k = spec.k_list[0];
    let report = match concat_scheme_checker(&seeds, &program, spec.p, k, n_max) {
        Ok(r) => r,
        Err(e) => return run_err("concat-scheme", e),
    };
    Ok(CheckerOut {
        checker: "concat-scheme".into(),
        json: json!({
            "p": spec.p,
            "k": k,
            "preperiod": report.preperiod,
            "period": report.period,
            "purely_periodic": report.purely_periodic,
            "uniqueness": format!("{:?}", report.uniqueness),
            "exclusion_for_all_points": report.exclusion_for_all_points,
            "notes": report.notes,
        }),
        tables: Vec::new(),
        status: if report.purely_periodic && report.exclusion_for_all_points {
            RunStatus::Success
        } else {
            RunStatus::HypothesisFailures
        },
    })
}

fn parse_epsilon(text: &str) -> Result<BigRational> {
    let (n, d) = match text.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text.trim(), "1"),
    };
    let num: BigInt = n
        .parse()
        .map_err(|_| ExperimentError::Spec("bad epsilon numerator".into()))?;
    let den: BigInt = d
        .parse()
        .map_err(|_| ExperimentError::Spec("bad epsilon denominator".into()))?;
    if den.is_zero() {
        return spec_err("zero epsilon denominator");
    }
    Ok(BigRational::new(num, den))
}

fn run_lem1(spec: &ExperimentSpec) -> Result<CheckerOut> {
    let subject = match spec.param("lem1.subject").unwrap_or("golden") {
        "golden" => Lem1Subject::GoldenRatio,
        "sqrt2m1" => Lem1Subject::Sqrt2Minus1,
        other => return spec_err(format!("unknown lem1 subject `{other}`")),
    };
    let n_max = spec.param_usize("lem1.n_max", 40)?;
    let ab_max = spec.param_usize("lem1.ab_max", 5)? as i64;
    let epsilon = parse_epsilon(spec.param("lem1.epsilon").unwrap_or("1/3"))?;
    let mut rows = Vec::new();
    let mut holds = true;
    for n in 1..=n_max {
        for a in -ab_max..=ab_max {
            for b in -ab_max..=ab_max {
                if a == 0 && b == 0 {
                    continue;
                }
                let row = match prop_lem1_check(&subject, n, a, b, spec.p, &epsilon) {
                    Ok(r) => r,
                    Err(e) => return run_err("lem1-dichotomy", e),
                };
                holds &= row.inequality_holds;
                let dich = match row.dichotomy {
                    PairDichotomy::RIsZero => "r=0",
                    PairDichotomy::LowerBoundHolds => "holds",
                    PairDichotomy::LowerBoundFails => "fails",
                };
                rows.push(format!(
                    "{n},{a},{b},{},{},{},{dich}",
                    row.r,
                    row.r_valuation.map_or("inf".into(), |v| v.to_string()),
                    row.inequality_holds
                ));
            }
        }
    }
    Ok(CheckerOut {
        checker: "lem1-dichotomy".into(),
        json: json!({
            "subject": format!("{subject:?}"),
            "p": spec.p,
            "epsilon": epsilon.to_string(),
            "inequality_holds_everywhere": holds,
            "rows": rows.len(),
        }),
        tables: vec![TableOut {
            name: "dichotomy".into(),
            provenance: "checkers::prop_lem1_check".into(),
            csv: csv_of("n,a,b,r,v_p(r),inequality,dichotomy", &rows),
        }],
        status: if holds {
            RunStatus::Success
        } else {
            RunStatus::Error // the proposition is proved; a violation is a bug
        },
    })
}

fn parse_point(spec: &ExperimentSpec, key: &str, k: u32) -> Result<ProjPoint> {
    let text = spec
        .param(key)
        .ok_or_else(|| ExperimentError::Spec(format!("missing `{key}` (format: a,b)")))?;
    let parts: Vec<&str> = text.split(',').map(|x| x.trim()).collect();
    if parts.len() != 2 {
        return spec_err(format!("`{key}` must be two integers"));
    }
    let a: i64 = parts[0]
        .parse()
        .map_err(|_| ExperimentError::Spec(format!("bad `{key}`")))?;
    let b: i64 = parts[1]
        .parse()
        .map_err(|_| ExperimentError::Spec(format!("bad `{key}`")))?;
    ProjPoint::from_ints(spec.p, k, a, b)
        .map_err(|e| ExperimentError::Spec(format!("`{key}`: {e}")))
}

fn run_pbad(spec: &ExperimentSpec) -> Result<CheckerOut> {
    let k = spec.k_list[0];
    let bounds: Vec<u64> = match spec.param("pbad.bounds") {
        None => vec![DEFAULT_PBAD_BOUND],
        Some(t) => t
            .split(',')
            .map(|x| x.trim().parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| ExperimentError::Spec("bad `pbad.bounds`".into()))?,
    };
    // Either an explicit point or an eigenvector of a word matrix.
    let point = if let Some(word_text) = spec.param("pbad.eigenvector_of") {
        let word = parse_word(word_text)
            .map_err(|e| ExperimentError::Spec(format!("pbad.eigenvector_of: {e}")))?;
        let m = matrix_of_word(&word);
        match crate::matrices::eigen_decompose(&m, spec.p, k) {
            Ok(crate::matrices::EigenDecomposition::Semisimple(d)) => d.v1.clone(),
            Ok(_) => return spec_err("word matrix is not semisimple"),
            Err(e) => return run_err("pbad", e),
        }
    } else {
        parse_point(spec, "pbad.point", k)?
    };
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    let mut limited = false;
    for &b in &bounds {
        let r = match pbad_estimate(&point, b) {
            Ok(r) => r,
            Err(e) => return run_err("pbad", e),
        };
        limited |= r.precision_limited;
        rows.push(format!(
            "{b},{},{},{},{}",
            r.epsilon.render(),
            r.witness.0,
            r.witness.1,
            r.precision_limited
        ));
        json_rows.push(json!({
            "bound": r.bound,
            "epsilon": r.epsilon.render(),
            "epsilon_approx": r.epsilon.to_f64(),
            "witness": [r.witness.0, r.witness.1],
            "precision_limited": r.precision_limited,
        }));
    }
    Ok(CheckerOut {
        checker: "pbad".into(),
        json: json!({
            "point": point.to_string(),
            "p": spec.p,
            "k": k,
            "rows": json_rows,
        }),
        tables: vec![TableOut {
            name: "epsilon".into(),
            provenance: "proj::pbad_estimate".into(),
            csv: csv_of("bound,epsilon,witness_a,witness_b,precision_limited", &rows),
        }],
        status: if limited {
            RunStatus::PrecisionLimited
        } else {
            RunStatus::Success
        },
    })
}

fn parse_evidence(spec: &ExperimentSpec, prefix: &str) -> Result<OrbitEvidence> {
    match spec.param(&format!("{prefix}.evidence")).unwrap_or("periodic") {
        "periodic" => Ok(OrbitEvidence::PeriodicSelfMap),
        "uk-stabilizer" => Ok(OrbitEvidence::UkStabilizer),
        "scan" => Ok(OrbitEvidence::TrajectoryScan {
            window: spec.trajectory_window,
            m_cap: spec.trajectory_window,
        }),
        other => spec_err(format!("unknown evidence kind `{other}`")),
    }
}

fn parse_m(spec: &ExperimentSpec, key: &str) -> Result<MSpec> {
    match spec.param(key) {
        None => Ok(MSpec::Max),
        Some("max") => Ok(MSpec::Max),
        Some(t) => {
            let m: BigInt = t
                .parse()
                .map_err(|_| ExperimentError::Spec(format!("bad `{key}`")))?;
            Ok(MSpec::Given(m))
        }
    }
}

fn run_th_main(spec: &ExperimentSpec) -> Result<CheckerOut> {
    let source = spec.source_required()?;
    let word_text = spec
        .param("thmain.word")
        .ok_or_else(|| ExperimentError::Spec("missing `thmain.word`".into()))?;
    let word =
        parse_word(word_text).map_err(|e| ExperimentError::Spec(format!("thmain.word: {e}")))?;
    let matrix = matrix_of_word(&word);
    let evidence = parse_evidence(spec, "thmain")?;
    let m = parse_m(spec, "thmain.m")?;
    let mut sweeps = Vec::new();
    let mut outcomes = Vec::new();
    for &k in &spec.k_list {
        let x_p = parse_point(spec, "thmain.point", k.max(4))?;
        let instance = ThMainInstance {
            matrix: matrix.clone(),
            x_p,
            source: source.clone(),
            p: spec.p,
            k,
            m: m.clone(),
        };
        let out = match check_th_main(&instance, &evidence) {
            Ok(o) => o,
            Err(e) => return run_err("th-main", e),
        };
        sweeps.push(json!({ "k": k, "outcome": verdict_json(&out) }));
        outcomes.push(out);
    }
    let status = status_of_outcomes(outcomes.iter());
    Ok(CheckerOut {
        checker: "th-main".into(),
        json: json!({
            "word": crate::words::render_word(&word),
            "p": spec.p,
            "sweep": sweeps,
        }),
        tables: Vec::new(),
        status,
    })
}

fn run_th_da(spec: &ExperimentSpec) -> Result<CheckerOut> {
    let source = spec.source_required()?;
    let a_text = spec
        .param("thda.a")
        .ok_or_else(|| ExperimentError::Spec("missing `thda.a`".into()))?;
    let a_int: i64 = a_text
        .parse()
        .map_err(|_| ExperimentError::Spec("bad `thda.a`".into()))?;
    let evidence = parse_evidence(spec, "thda")?;
    let m = parse_m(spec, "thda.m")?;
    let mut sweeps = Vec::new();
    let mut outcomes = Vec::new();
    for &k in &spec.k_list {
        let x_p = parse_point(spec, "thda.point", k.max(4))?;
        let a = crate::padic::PAdic::from_i64(spec.p, k.max(4), a_int);
        let out = match check_th_da(&a, &x_p, source, spec.p, k, &m, &evidence) {
            Ok(o) => o,
            Err(e) => return run_err("th-da", e),
        };
        sweeps.push(json!({ "k": k, "outcome": verdict_json(&out) }));
        outcomes.push(out);
    }
    let status = status_of_outcomes(outcomes.iter());
    Ok(CheckerOut {
        checker: "th-da".into(),
        json: json!({
            "a": a_int,
            "p": spec.p,
            "sweep": sweeps,
        }),
        tables: Vec::new(),
        status,
    })
}

// ---------------------------------------------------------------------------
// Compare.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DiffReport {
    pub identical: bool,
    pub differences: Vec<String>,
    /// ε entries found at matching paths, for monotonicity eyeballing.
    pub epsilon_pairs: Vec<(String, String, String)>,
}

/// Structural diff of two result files.
pub fn compare(a: &Value, b: &Value) -> Result<DiffReport> {
    let sa = a.get("schema_version").and_then(Value::as_str);
    let sb = b.get("schema_version").and_then(Value::as_str);
    if sa != Some(SCHEMA_VERSION) || sb != Some(SCHEMA_VERSION) {
        return Err(ExperimentError::Schema(format!(
            "expected schema {SCHEMA_VERSION}, found {sa:?} and {sb:?}"
        )));
    }
    let mut differences = Vec::new();
    let mut epsilon_pairs = Vec::new();
    walk_diff("", a, b, &mut differences, &mut epsilon_pairs);
    Ok(DiffReport {
        identical: differences.is_empty(),
        differences,
        epsilon_pairs,
    })
}

fn walk_diff(
    path: &str,
    a: &Value,
    b: &Value,
    diffs: &mut Vec<String>,
    eps: &mut Vec<(String, String, String)>,
) {
    match (a, b) {
        (Value::Object(ma), Value::Object(mb)) => {
            let keys: std::collections::BTreeSet<&String> =
                ma.keys().chain(mb.keys()).collect();
            for k in keys {
                let p = format!("{path}/{k}");
                match (ma.get(k), mb.get(k)) {
                    (Some(x), Some(y)) => walk_diff(&p, x, y, diffs, eps),
                    (Some(_), None) => diffs.push(format!("{p}: only in left")),
                    (None, Some(_)) => diffs.push(format!("{p}: only in right")),
                    (None, None) => unreachable!(),
                }
            }
        }
        (Value::Array(xa), Value::Array(xb)) => {
            if xa.len() != xb.len() {
                diffs.push(format!("{path}: array lengths {} vs {}", xa.len(), xb.len()));
            }
            for (i, (x, y)) in xa.iter().zip(xb.iter()).enumerate() {
                walk_diff(&format!("{path}[{i}]"), x, y, diffs, eps);
            }
        }
        (x, y) => {
            if x != y {
                if path.ends_with("epsilon_sq") || path.ends_with("epsilon") {
                    eps.push((path.to_string(), x.to_string(), y.to_string()));
                }
                diffs.push(format!("{path}: {x} ≠ {y}"));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TM_GRAPH_SPEC: &str = "\
name = tm-graph
kind = morphic
seed = 1
rule.1 = 12
rule.2 = 21
prime = 2
precision = 3
checker = factor-graph, complexity
graph.n_min = 1
graph.n_max = 4
complexity.n_max = 6
window = 4096
";

    #[test]
    fn parse_and_run_tm_graph_spec() {
        let spec = ExperimentSpec::parse(TM_GRAPH_SPEC).unwrap();
        assert_eq!(spec.checkers, vec!["factor-graph", "complexity"]);
        let record = run(&spec).unwrap();
        assert_eq!(record.status(), RunStatus::Success);
        let json = record.to_json();
        assert_eq!(json["schema_version"], "1");
        // Edge law asserted by the runner.
        assert_eq!(json["checkers"][0]["result"]["edge_law_holds"], true);
    }

    #[test]
    fn missing_checker_list_is_a_validation_error() {
        let text = "name = x\nprime = 3\nkind = periodic\nperiod = 12\n";
        assert!(matches!(
            ExperimentSpec::parse(text),
            Err(ExperimentError::Spec(_))
        ));
        let text2 = "name = x\nprime = 3\nchecker = \nkind = periodic\nperiod = 12\n";
        assert!(matches!(
            ExperimentSpec::parse(text2),
            Err(ExperimentError::Spec(_))
        ));
    }

    #[test]
    fn runs_are_deterministic() {
        let spec = ExperimentSpec::parse(TM_GRAPH_SPEC).unwrap();
        let r1 = serde_json::to_string(&run(&spec).unwrap().to_json()).unwrap();
        let r2 = serde_json::to_string(&run(&spec).unwrap().to_json()).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn compare_detects_divergence_and_identity() {
        let spec = ExperimentSpec::parse(TM_GRAPH_SPEC).unwrap();
        let a = run(&spec).unwrap().to_json();
        let b = a.clone();
        let d = compare(&a, &b).unwrap();
        assert!(d.identical);
        let mut c = a.clone();
        c["checkers"][0]["result"]["window"] = json!(1);
        let d = compare(&a, &c).unwrap();
        assert!(!d.identical);
        assert!(d.differences.iter().any(|x| x.contains("window")));
        // Schema mismatch is an error.
        let mut bad = a.clone();
        bad["schema_version"] = json!("0");
        assert!(compare(&a, &bad).is_err());
    }

    #[test]
    fn lmad_spec_runs_on_periodic_source() {
        let text = "\
name = lmad-ones
kind = periodic
period = 1
prime = 11
precision = 8
checker = lmad-periodic
lmad.bounds = 5, 10
lmad.samples = 2
lmad.seed = 7
";
        let spec = ExperimentSpec::parse(text).unwrap();
        let record = run(&spec).unwrap();
        assert_eq!(record.status(), RunStatus::Success);
        let json = record.to_json();
        assert_eq!(json["checkers"][0]["result"]["conclusive"], true);
    }

    #[test]
    fn unknown_checker_is_a_spec_error() {
        let text = "name = x\nprime = 3\nchecker = nonsense\nkind = periodic\nperiod = 1\n";
        let spec = ExperimentSpec::parse(text).unwrap();
        assert!(matches!(run(&spec), Err(ExperimentError::Spec(_))));
    }
}

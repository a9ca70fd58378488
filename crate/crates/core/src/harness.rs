//! Seeded end-to-end trials and parameter sweeps.
//!
//! Seed splitting: the seed of trial `t` in cell `(n, alpha)` is
//! `mix(mix(mix(base ^ n) ^ alpha.to_bits()) ^ t)` where `mix` is the
//! SplitMix64 finalizer applied after adding the golden-ratio increment.
//! The anonymization seed of a trial is `mix(trial_seed ^ ANON_SALT)`.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assemble_one::{assemble_from_1nbhd, AssemblyOutcome, AssemblyStatus};
use crate::assemble_two::{assemble_auto, assemble_diameter2, assemble_from_2nbhd_fingerprint};
use crate::error::{Error, Result};
use crate::graph::{sample_er, EdgeProb, ErParams, Graph};
use crate::shotgun::{find_center_r1, locate_center_r2, shred_with_truth, CenterRule, NeighborhoodCollection, ShredTruth};
use crate::witness::star_witness;

const ANON_SALT: u64 = 0x5348_5245_4444_4544;

pub fn mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(base: u64, n: usize, alpha: f64, trial: usize) -> u64 {
    mix(mix(mix(base ^ n as u64) ^ alpha.to_bits()) ^ trial as u64)
}

pub fn anonymize_seed(trial_seed: u64) -> u64 {
    mix(trial_seed ^ ANON_SALT)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Fingerprint1,
    Diameter2,
    Fingerprint2,
    Auto,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Fingerprint1 => "fingerprint1",
            Method::Diameter2 => "diameter2",
            Method::Fingerprint2 => "fingerprint2",
            Method::Auto => "auto",
        }
    }

    pub fn radius(self) -> usize {
        match self {
            Method::Fingerprint1 => 1,
            _ => 2,
        }
    }

    /// Whether the method can run without center labels at this alpha.
    /// Centers of views that cover the whole graph cannot be told apart,
    /// so the diameter-2 path needs labels.
    pub fn supports_unlabeled(self, alpha: f64) -> bool {
        match self {
            Method::Fingerprint1 | Method::Fingerprint2 => true,
            Method::Diameter2 => false,
            Method::Auto => alpha >= 0.5,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fingerprint1" => Ok(Method::Fingerprint1),
            "diameter2" => Ok(Method::Diameter2),
            "fingerprint2" => Ok(Method::Fingerprint2),
            "auto" => Ok(Method::Auto),
            other => Err(Error::Config(format!("unknown method {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    pub alpha_values: Vec<f64>,
    pub radius: usize,
    pub method: Method,
    pub trials: usize,
    pub base_seed: u64,
    pub labeled_centers: bool,
    /// Output stem: results go to `<stem>.csv`, `<stem>.jsonl`,
    /// `<stem>.summary.csv` and `<stem>.timings.csv`.
    pub output_path: PathBuf,
    /// Attach a star witness report to every record.
    #[serde(default)]
    pub star_report: bool,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return bad("n_values must be non-empty and positive".into());
        }
        if self.alpha_values.is_empty() {
            return bad("alpha_values must be non-empty".into());
        }
        if let Some(a) = self.alpha_values.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return bad(format!("alpha {a} outside (0, 1)"));
        }
        if self.radius != self.method.radius() {
            return bad(format!(
                "method {} needs radius {}, got {}",
                self.method,
                self.method.radius(),
                self.radius
            ));
        }
        if !self.labeled_centers {
            if let Some(a) = self
                .alpha_values
                .iter()
                .find(|&&a| !self.method.supports_unlabeled(a))
            {
                return bad(format!(
                    "method {} at alpha {a} requires labeled centers",
                    self.method
                ));
            }
        }
        Ok(())
    }

    pub fn file(&self, suffix: &str) -> PathBuf {
        let mut s = self.output_path.clone().into_os_string();
        s.push(suffix);
        PathBuf::from(s)
    }
}

/// One trial of the pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSpec {
    pub n: usize,
    pub prob: EdgeProb,
    pub method: Method,
    pub seed: u64,
    pub labeled_centers: bool,
    pub star_report: bool,
    /// Index within its sweep cell; only recorded.
    pub trial: usize,
}

impl TrialSpec {
    pub fn new(n: usize, alpha: f64, method: Method, seed: u64, labeled_centers: bool) -> Self {
        TrialSpec {
            n,
            prob: EdgeProb::Alpha(alpha),
            method,
            seed,
            labeled_centers,
            star_report: false,
            trial: 0,
        }
    }
}

/// Flat per-trial record; CSV columns follow field order and the JSON
/// lines carry the same keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub alpha: Option<f64>,
    pub p: f64,
    pub trial: usize,
    pub seed: u64,
    pub method: Method,
    pub radius: usize,
    pub labeled: bool,
    pub status: AssemblyStatus,
    pub exact_match: bool,
    pub path: String,
    pub edges: usize,
    pub fingerprints: usize,
    pub distinct_certs: usize,
    pub colliding_certs: usize,
    pub max_multiplicity: usize,
    pub unmatched_certs: usize,
    pub unresolved_entries: usize,
    pub degree_mismatches: usize,
    pub short_views: usize,
    pub unmatched_centers: usize,
    /// Views whose center could not be recovered.
    pub center_failures: usize,
    /// Views whose recovered center is not the true one.
    pub center_wrong: usize,
    /// Radius-2 views resolved by the eccentricity fallback.
    pub center_fallbacks: usize,
    pub star_multiplicity: Option<usize>,
    pub star_threshold: Option<f64>,
    pub star_passed: Option<bool>,
    pub note: String,
    /// Wall-clock time; kept out of the results files so they stay
    /// reproducible, see [`run_sweep`].
    #[serde(skip)]
    pub wall_ms: f64,
}

impl TrialRecord {
    /// `exact_match` implies exact success and, with labeled centers, the
    /// converse.
    pub fn is_sound(&self) -> bool {
        let forward = !self.exact_match || self.status == AssemblyStatus::ExactSuccess;
        let backward = !self.labeled || self.status != AssemblyStatus::ExactSuccess || self.exact_match;
        forward && backward
    }
}

/// Result of recovering anonymous centers: the collection with positions
/// filled in, plus counters.
#[derive(Clone, Debug)]
pub struct CenterRecovery {
    pub collection: NeighborhoodCollection,
    pub failures: usize,
    pub wrong: usize,
    pub fallbacks: usize,
}

/// Fills in `center_pos` of every view by the radius-appropriate rule and,
/// when `truth` is given, counts views whose recovered center is wrong.
pub fn recover_centers(
    c: &NeighborhoodCollection,
    truth: Option<&ShredTruth>,
    alpha: f64,
) -> CenterRecovery {
    let found: Vec<Option<(usize, bool)>> = c
        .views
        .par_iter()
        .map(|view| match view.radius {
            1 => find_center_r1(view).ok().map(|p| (p, false)),
            _ => locate_center_r2(view, c.n, alpha)
                .ok()
                .map(|f| (f.pos, f.rule == CenterRule::Eccentricity)),
        })
        .collect();
    let mut out = c.clone();
    let (mut failures, mut wrong, mut fallbacks) = (0, 0, 0);
    for (i, (view, f)) in out.views.iter_mut().zip(found).enumerate() {
        match f {
            Some((pos, fallback)) => {
                view.center_pos = Some(pos);
                wrong += usize::from(truth.is_some_and(|t| pos != t.center_pos(i)));
                fallbacks += usize::from(fallback);
            }
            None => failures += 1,
        }
    }
    CenterRecovery {
        collection: out,
        failures,
        wrong,
        fallbacks,
    }
}

fn effective_alpha(n: usize, prob: EdgeProb) -> Option<f64> {
    match prob {
        EdgeProb::Alpha(a) => Some(a),
        EdgeProb::P(p) if n > 1 && p > 0.0 => Some(-p.ln() / (n as f64).ln()),
        EdgeProb::P(_) => None,
    }
}

fn assemble(c: &NeighborhoodCollection, method: Method, alpha: Option<f64>) -> Result<AssemblyOutcome> {
    match method {
        Method::Fingerprint1 => assemble_from_1nbhd(c),
        Method::Diameter2 => assemble_diameter2(c),
        Method::Fingerprint2 => assemble_from_2nbhd_fingerprint(c),
        Method::Auto => {
            let alpha = alpha.ok_or_else(|| Error::param("auto dispatch needs a positive edge probability"))?;
            assemble_auto(c, c.n, alpha)
        }
    }
}

/// Runs sample, shred, center recovery (when unlabeled), assembly and the
/// comparison with the source graph. Failures of any stage become a
/// `Failed` record; only invariant violations are returned as errors.
pub fn run_trial(spec: &TrialSpec) -> Result<TrialRecord> {
    let start = Instant::now();
    let params = ErParams {
        n: spec.n,
        prob: spec.prob,
        seed: spec.seed,
    };
    let radius = spec.method.radius();
    let mut record = TrialRecord {
        n: spec.n,
        alpha: match spec.prob {
            EdgeProb::Alpha(a) => Some(a),
            EdgeProb::P(_) => None,
        },
        p: params.p(),
        trial: spec.trial,
        seed: spec.seed,
        method: spec.method,
        radius,
        labeled: spec.labeled_centers,
        status: AssemblyStatus::Failed,
        exact_match: false,
        path: String::new(),
        edges: 0,
        fingerprints: 0,
        distinct_certs: 0,
        colliding_certs: 0,
        max_multiplicity: 0,
        unmatched_certs: 0,
        unresolved_entries: 0,
        degree_mismatches: 0,
        short_views: 0,
        unmatched_centers: 0,
        center_failures: 0,
        center_wrong: 0,
        center_fallbacks: 0,
        star_multiplicity: None,
        star_threshold: None,
        star_passed: None,
        note: String::new(),
        wall_ms: 0.0,
    };
    let result = trial_body(spec, &params, &mut record);
    record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    match result {
        Ok(()) => Ok(record),
        Err(e @ Error::InvariantViolation(_)) => Err(e),
        Err(e) => {
            record.status = AssemblyStatus::Failed;
            record.exact_match = false;
            record.note = e.to_string();
            Ok(record)
        }
    }
}

fn trial_body(spec: &TrialSpec, params: &ErParams, record: &mut TrialRecord) -> Result<()> {
    let g = sample_er(params)?;
    record.edges = g.edge_count();
    let alpha = effective_alpha(spec.n, spec.prob);
    if spec.star_report {
        let report = star_witness(&g, alpha.filter(|a| *a > 0.0 && *a < 1.0).ok_or_else(|| {
            Error::param("star report needs alpha in (0, 1)")
        })?)?;
        record.star_multiplicity = Some(report.multiplicity);
        record.star_threshold = Some(report.threshold);
        record.star_passed = Some(report.passed);
    }

    let (collection, truth) = shred_with_truth(&g, record.radius, anonymize_seed(spec.seed), spec.labeled_centers)?;
    let collection = if spec.labeled_centers {
        collection
    } else {
        if !spec.method.supports_unlabeled(alpha.unwrap_or(0.0)) {
            return Err(Error::param(format!("method {} requires labeled centers here", spec.method)));
        }
        let rec = recover_centers(&collection, Some(&truth), alpha.unwrap_or(0.0));
        record.center_failures = rec.failures;
        record.center_wrong = rec.wrong;
        record.center_fallbacks = rec.fallbacks;
        if rec.failures > 0 {
            record.note = format!("center recovery failed for {} views", rec.failures);
            return Ok(());
        }
        rec.collection
    };

    let out = assemble(&collection, spec.method, alpha)?;
    let d = &out.diagnostics;
    record.status = out.status;
    record.path = d.path.clone();
    record.fingerprints = d.fingerprints;
    record.distinct_certs = d.distinct_certs;
    record.colliding_certs = d.colliding_certs;
    record.max_multiplicity = d.max_multiplicity;
    record.unmatched_certs = d.unmatched_certs;
    record.unresolved_entries = d.unresolved_entries;
    record.degree_mismatches = d.degree_mismatches;
    record.short_views = d.short_views;
    record.unmatched_centers = d.unmatched_centers;
    record.note = d.note.clone().unwrap_or_default();
    record.exact_match = output_matches(&out.graph, &g, &truth, spec.labeled_centers)?;
    Ok(())
}

/// Compares an assembled graph with the source. Unlabeled assemblies name
/// vertices by view index and are mapped through the true centers first.
fn output_matches(out: &Graph, source: &Graph, truth: &ShredTruth, labeled: bool) -> Result<bool> {
    if out.n() != source.n() {
        return Ok(false);
    }
    if labeled {
        return Ok(out == source);
    }
    Ok(&out.relabel(&truth.centers)? == source)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: usize,
    pub alpha: f64,
    pub trials: usize,
    pub exact_success: usize,
    pub exact_match: usize,
    pub ambiguous: usize,
    pub failed: usize,
    pub success_rate: f64,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<CellSummary>,
}

/// Runs every `(n, alpha, trial)` of the grid and writes the results files.
///
/// Records are sorted by `(n, alpha, trial)` before writing. Wall-clock
/// times go to `<stem>.timings.csv` only, so the other files are identical
/// across reruns with the same configuration. A soundness violation in any
/// record aborts before the results are written.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let paths = ["csv", "jsonl", "summary.csv", "timings.csv"].map(|s| cfg.file(&format!(".{s}")));
    for p in &paths {
        File::create(p).map_err(|e| Error::io(p, e))?;
    }

    let specs: Vec<TrialSpec> = cfg
        .n_values
        .iter()
        .flat_map(|&n| {
            cfg.alpha_values.iter().flat_map(move |&alpha| {
                (0..cfg.trials).map(move |t| TrialSpec {
                    n,
                    prob: EdgeProb::Alpha(alpha),
                    method: cfg.method,
                    seed: trial_seed(cfg.base_seed, n, alpha, t),
                    labeled_centers: cfg.labeled_centers,
                    star_report: cfg.star_report,
                    trial: t,
                })
            })
        })
        .collect();
    let mut records: Vec<TrialRecord> = specs.par_iter().map(run_trial).collect::<Result<_>>()?;
    records.sort_by(|a, b| {
        a.n.cmp(&b.n)
            .then(a.alpha.partial_cmp(&b.alpha).expect("alphas are finite"))
            .then(a.trial.cmp(&b.trial))
    });
    if let Some(r) = records.iter().find(|r| !r.is_sound()) {
        return Err(Error::InvariantViolation(format!(
            "unsound record: n={} alpha={:?} trial={} status={} exact_match={}",
            r.n, r.alpha, r.trial, r.status, r.exact_match
        )));
    }
    let summary = summarize(&records);

    write_csv(&paths[0], &records)?;
    write_jsonl(&paths[1], &records)?;
    write_csv(&paths[2], &summary)?;
    let timings: Vec<(usize, Option<f64>, usize, f64)> = records
        .iter()
        .map(|r| (r.n, r.alpha, r.trial, r.wall_ms))
        .collect();
    write_timings(&paths[3], &timings)?;
    Ok(SweepResult { records, summary })
}

pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut out: Vec<CellSummary> = Vec::new();
    for r in records {
        let alpha = r.alpha.unwrap_or(f64::NAN);
        let cell = match out.last_mut() {
            Some(c) if c.n == r.n && c.alpha.to_bits() == alpha.to_bits() => c,
            _ => {
                out.push(CellSummary {
                    n: r.n,
                    alpha,
                    trials: 0,
                    exact_success: 0,
                    exact_match: 0,
                    ambiguous: 0,
                    failed: 0,
                    success_rate: 0.0,
                });
                out.last_mut().expect("just pushed")
            }
        };
        cell.trials += 1;
        match r.status {
            AssemblyStatus::ExactSuccess => cell.exact_success += 1,
            AssemblyStatus::Ambiguous => cell.ambiguous += 1,
            AssemblyStatus::Failed => cell.failed += 1,
        }
        cell.exact_match += usize::from(r.exact_match);
        cell.success_rate = cell.exact_match as f64 / cell.trials as f64;
    }
    out
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvariantViolation(format!("csv serialization: {other:?}")),
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for row in rows {
        let line = serde_json::to_string(row).map_err(|e| Error::InvariantViolation(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_timings(path: &Path, rows: &[(usize, Option<f64>, usize, f64)]) -> Result<()> {
    #[derive(Serialize)]
    struct Timing {
        n: usize,
        alpha: Option<f64>,
        trial: usize,
        wall_ms: f64,
    }
    let rows: Vec<Timing> = rows
        .iter()
        .map(|&(n, alpha, trial, wall_ms)| Timing { n, alpha, trial, wall_ms })
        .collect();
    write_csv(path, &rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiameterCheck {
    pub n: usize,
    pub c: f64,
    pub p: f64,
    pub trials: usize,
    pub diameter_two: usize,
    pub fraction: f64,
}

/// Edge probability `c * sqrt(ln n / n)` (natural logarithm).
pub fn diameter_probability(n: usize, c: f64) -> f64 {
    let n = n as f64;
    c * (n.ln() / n).sqrt()
}

/// Fraction of `G(n, c sqrt(ln n / n))` samples whose diameter is exactly 2.
pub fn diameter_check(n: usize, c: f64, trials: usize, seed: u64) -> Result<DiameterCheck> {
    if n < 2 {
        return Err(Error::param("diameter check needs n >= 2"));
    }
    if trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    let p = diameter_probability(n, c);
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("p = {p} is outside [0, 1]")));
    }
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let g = sample_er(&ErParams::with_p(n, p, trial_seed(seed, n, c, t)))?;
            Ok(g.within_distance_two() && g.edge_count() < n * (n - 1) / 2)
        })
        .collect::<Result<_>>()?;
    let diameter_two = hits.iter().filter(|&&h| h).count();
    Ok(DiameterCheck {
        n,
        c,
        p,
        trials,
        diameter_two,
        fraction: diameter_two as f64 / trials as f64,
    })
}

/// Degree concentration of a sample against the multiplicative Chernoff
/// bound `P(|X - mu| >= delta mu) <= 2 exp(-delta^2 mu / 3)` for
/// `0 < delta <= 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChernoffCheck {
    pub mu: f64,
    pub delta: f64,
    pub bound: f64,
    pub outside: usize,
    pub observed: f64,
}

pub fn chernoff_degree_check(g: &Graph, p: f64, delta: f64) -> Result<ChernoffCheck> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param(format!("delta must lie in (0, 1], got {delta}")));
    }
    if g.n() == 0 {
        return Err(Error::param("empty graph"));
    }
    let mu = p * (g.n() - 1) as f64;
    let outside = g
        .degrees()
        .into_iter()
        .filter(|&d| (d as f64 - mu).abs() >= delta * mu)
        .count();
    Ok(ChernoffCheck {
        mu,
        delta,
        bound: (2.0 * (-delta * delta * mu / 3.0).exp()).min(1.0),
        outside,
        observed: outside as f64 / g.n() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(dir: &Path) -> ExperimentConfig {
        ExperimentConfig {
            n_values: vec![30],
            alpha_values: vec![0.3, 0.8],
            radius: 1,
            method: Method::Fingerprint1,
            trials: 3,
            base_seed: 11,
            labeled_centers: true,
            output_path: dir.join("out"),
            star_report: false,
        }
    }

    #[test]
    fn seeds_differ_and_repeat() {
        assert_eq!(trial_seed(1, 10, 0.5, 2), trial_seed(1, 10, 0.5, 2));
        assert_ne!(trial_seed(1, 10, 0.5, 2), trial_seed(1, 10, 0.5, 3));
        assert_ne!(trial_seed(1, 10, 0.5, 2), trial_seed(1, 10, 0.25, 2));
        assert_ne!(anonymize_seed(5), 5);
    }

    #[test]
    fn forced_p_trials() {
        let mut spec = TrialSpec::new(4, 0.5, Method::Fingerprint1, 1, true);
        spec.prob = EdgeProb::P(1.0);
        let r = run_trial(&spec).unwrap();
        assert_eq!(r.status, AssemblyStatus::Ambiguous);
        spec.n = 2;
        let r = run_trial(&spec).unwrap();
        assert!(r.exact_match);
        assert_eq!(r.status, AssemblyStatus::ExactSuccess);
    }

    #[test]
    fn config_validation() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = config(dir.path());
        assert!(cfg.validate().is_ok());
        cfg.alpha_values.clear();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = config(dir.path());
        cfg.radius = 2;
        assert!(cfg.validate().is_err());
        let mut cfg = config(dir.path());
        cfg.method = Method::Auto;
        cfg.radius = 2;
        cfg.labeled_centers = false;
        assert!(cfg.validate().is_err());
        cfg.alpha_values = vec![0.6];
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
n_values = [50, 100]
alpha_values = [0.25]
radius = 2
method = "fingerprint2"
trials = 4
base_seed = 9
labeled_centers = true
output_path = "results/run"
"#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.method, Method::Fingerprint2);
        assert!(!cfg.star_report);
        assert_eq!(cfg.file(".csv"), PathBuf::from("results/run.csv"));
        assert!(ExperimentConfig::from_toml_str("trials = 0").is_err());
    }

    #[test]
    fn sweep_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(dir.path());
        let first = run_sweep(&cfg).unwrap();
        let csv1 = std::fs::read(cfg.file(".csv")).unwrap();
        let json1 = std::fs::read(cfg.file(".jsonl")).unwrap();
        let second = run_sweep(&cfg).unwrap();
        assert_eq!(csv1, std::fs::read(cfg.file(".csv")).unwrap());
        assert_eq!(json1, std::fs::read(cfg.file(".jsonl")).unwrap());
        assert_eq!(first.summary, second.summary);
        assert_eq!(first.records.len(), 6);
        assert_eq!(first.summary.len(), 2);
    }

    #[test]
    fn sweep_rejects_unwritable_output() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = config(dir.path());
        cfg.output_path = dir.path().join("missing").join("out");
        assert!(matches!(run_sweep(&cfg), Err(Error::Io { .. })));
    }

    #[test]
    fn unlabeled_trial_maps_through_truth() {
        let spec = TrialSpec::new(120, 0.6, Method::Fingerprint2, 3, false);
        let r = run_trial(&spec).unwrap();
        assert!(r.is_sound());
        if r.center_failures == 0 && r.center_wrong == 0 && r.status == AssemblyStatus::ExactSuccess {
            assert!(r.exact_match);
        }
    }

    #[test]
    fn diameter_check_rejects_large_p() {
        assert!(diameter_check(2, 100.0, 3, 0).is_err());
        let d = diameter_check(60, 3.0, 4, 1).unwrap();
        assert_eq!(d.trials, 4);
    }

    #[test]
    fn chernoff_on_complete_graph() {
        let c = chernoff_degree_check(&Graph::complete(10), 1.0, 0.5).unwrap();
        assert_eq!(c.outside, 0);
        assert!((c.mu - 9.0).abs() < 1e-12);
    }
}

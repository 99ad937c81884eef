use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::output::EpisodeRow;
use super::HarnessError;

/// Evaluation rows of one run set (one configuration, any number of seeds).
#[derive(Debug, Clone)]
pub struct RunSet {
    pub label: String,
    pub rows: Vec<EpisodeRow>,
}

/// Paired differences `other - reference` for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedDiff {
    pub reference: String,
    pub other: String,
    pub metric: String,
    pub seeds: usize,
    pub mean_diff: f64,
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

const METRICS: [(&str, fn(&EpisodeRow) -> f64); 4] = [
    ("reward", |r| r.reward),
    ("qoe", |r| r.qoe),
    ("srs", |r| r.srs),
    ("delay_ms", |r| r.delay_ms),
];

fn per_seed(set: &RunSet, metric: fn(&EpisodeRow) -> f64) -> BTreeMap<u64, f64> {
    let mut acc: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for r in set.rows.iter().filter(|r| r.phase == "eval") {
        let e = acc.entry(r.seed).or_insert((0.0, 0));
        e.0 += metric(r);
        e.1 += 1;
    }
    acc.into_iter().map(|(s, (sum, n))| (s, sum / n as f64)).collect()
}

/// Groups rows by configuration hash, labelling each group by its algorithm.
pub fn group_rows(rows: Vec<EpisodeRow>) -> Vec<RunSet> {
    let mut sets: Vec<RunSet> = Vec::new();
    for r in rows {
        match sets.iter_mut().find(|s| s.rows[0].config_hash == r.config_hash) {
            Some(s) => s.rows.push(r),
            None => sets.push(RunSet { label: format!("{}@{}", r.algorithm, &r.config_hash[..8.min(r.config_hash.len())]), rows: vec![r] }),
        }
    }
    sets
}

/// Per-seed evaluation means of each set compared against the first set.
/// All sets must share one scenario and one seed list.
pub fn compare_algorithms(sets: &[RunSet]) -> Result<Vec<PairedDiff>, HarnessError> {
    if sets.len() < 2 {
        return Err(HarnessError::Config("compare needs at least two runs".into()));
    }
    if sets.iter().any(|s| s.rows.is_empty()) {
        return Err(HarnessError::Config("compare: empty run".into()));
    }
    let scenario = &sets[0].rows[0].scenario_hash;
    for s in sets {
        if s.rows.iter().any(|r| &r.scenario_hash != scenario) {
            return Err(HarnessError::Config(format!("compare: {} was run on a different scenario", s.label)));
        }
        let hash = &s.rows[0].config_hash;
        if s.rows.iter().any(|r| &r.config_hash != hash) {
            return Err(HarnessError::Config(format!("compare: {} mixes configurations", s.label)));
        }
    }
    let mut out = Vec::new();
    let reference = &sets[0];
    for other in &sets[1..] {
        for (name, f) in METRICS {
            let a = per_seed(reference, f);
            let b = per_seed(other, f);
            if a.keys().ne(b.keys()) || a.is_empty() {
                return Err(HarnessError::Config(format!(
                    "compare: {} and {} were not evaluated on the same seeds",
                    reference.label, other.label
                )));
            }
            let diffs: Vec<f64> = a.iter().map(|(s, x)| b[s] - x).collect();
            out.push(PairedDiff {
                reference: reference.label.clone(),
                other: other.label.clone(),
                metric: name.into(),
                seeds: diffs.len(),
                mean_diff: diffs.iter().sum::<f64>() / diffs.len() as f64,
                positive: diffs.iter().filter(|d| **d > 0.0).count(),
                negative: diffs.iter().filter(|d| **d < 0.0).count(),
                zero: diffs.iter().filter(|d| **d == 0.0).count(),
            });
        }
    }
    Ok(out)
}

/// Plain-text CSV rendering of a comparison.
pub fn render_report(diffs: &[PairedDiff]) -> String {
    let mut s = String::from("reference,other,metric,seeds,mean_diff,positive,negative,zero\n");
    for d in diffs {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            d.reference, d.other, d.metric, d.seeds, d.mean_diff, d.positive, d.negative, d.zero
        );
    }
    s
}

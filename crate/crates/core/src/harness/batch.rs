use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::run::{run_scenario, RunRecord};
use super::scenario::{Scenario, SimConfig};
use crate::error::{Error, Result};
use crate::world::PadType;

/// Error statistics for one group of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    /// Pad type name, or `overall`.
    pub group: String,
    pub runs: usize,
    /// Landed runs; the statistics below cover these only.
    pub n: usize,
    pub mu_e_m: f64,
    pub sigma_e_m: f64,
    pub max_alt_m: f64,
    pub max_dist_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn group(&self, name: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.group == name)
    }

    pub fn overall(&self) -> &SummaryRow {
        self.group("overall").expect("summary always has an overall row")
    }
}

/// Summary plus the records it was computed from, in input order.
#[derive(Debug, Clone)]
pub struct BatchSummary {
    pub summary: Summary,
    pub records: Vec<RunRecord>,
}

/// Mean and sample standard deviation. A single sample has zero spread.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        log::warn!("standard deviation of a single run reported as 0");
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

fn summarize_group(group: &str, records: &[&RunRecord]) -> SummaryRow {
    let errors: Vec<f64> = records.iter().filter_map(|r| r.touchdown_error_m).collect();
    let (mu, sigma) = mean_and_std(&errors);
    let landed = records.iter().filter(|r| r.landed());
    let (max_alt, max_dist) = landed.fold((0.0f64, 0.0f64), |(a, d), r| {
        (a.max(r.start_altitude_m), d.max(r.start_distance_m))
    });
    SummaryRow {
        group: group.to_string(),
        runs: records.len(),
        n: errors.len(),
        mu_e_m: mu,
        sigma_e_m: sigma,
        max_alt_m: max_alt,
        max_dist_m: max_dist,
    }
}

/// Per-pad-type and overall statistics over already finished runs.
pub fn summarize(records: &[RunRecord]) -> Summary {
    let mut rows = Vec::new();
    for pad in PadType::ALL {
        let group: Vec<&RunRecord> = records.iter().filter(|r| r.pad_type == pad).collect();
        if !group.is_empty() {
            rows.push(summarize_group(pad.as_str(), &group));
        }
    }
    let all: Vec<&RunRecord> = records.iter().collect();
    rows.push(summarize_group("overall", &all));
    Summary { rows }
}

/// Runs every scenario on a worker pool and aggregates the results.
///
/// `jobs = None` uses rayon's default pool size. Results do not depend on `jobs`.
pub fn run_batch(scenarios: &[(Scenario, SimConfig)], jobs: Option<usize>) -> Result<BatchSummary> {
    if scenarios.is_empty() {
        return Err(Error::validation("scenarios", "batch needs at least one scenario"));
    }
    let work = || -> Result<Vec<RunRecord>> {
        scenarios.par_iter().map(|(s, c)| run_scenario(s, c)).collect()
    };
    let records = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::validation("jobs", e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    Ok(BatchSummary { summary: summarize(&records), records })
}

impl Summary {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::validation("summary", e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

//! Per-scenario metric samples, empirical CDFs and table export.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Samples produced by one realization.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RealizationOutput {
    pub scenario_id: String,
    /// End-of-routing occupancy of every segment.
    pub segment_utilization: Vec<f64>,
    /// SINR of every served UE, in dB.
    pub sinr_db: Vec<f64>,
    /// Surviving fraction of each UE's initial serving subset (dropped UEs give 0).
    pub connection_ratio: Vec<f64>,
    /// Segment count of every committed ARU → RU route.
    pub l2_path_lengths: Vec<usize>,
    pub ue_count: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricBatch {
    pub scenario_id: String,
    pub realizations: usize,
    pub segment_utilization: Vec<f64>,
    pub sinr_db: Vec<f64>,
    pub connection_ratio: Vec<f64>,
    pub l2_path_lengths: Vec<usize>,
    pub ue_instances: usize,
    pub dropped: usize,
    pub drop_rate: f64,
}

/// Concatenates realization samples in the order given.
pub fn collect(scenario_id: &str, outputs: &[RealizationOutput]) -> Result<MetricBatch> {
    let mut batch = MetricBatch {
        scenario_id: scenario_id.to_string(),
        ..Default::default()
    };
    for o in outputs {
        if o.scenario_id != scenario_id {
            return Err(Error::MixedScenarios {
                expected: scenario_id.to_string(),
                found: o.scenario_id.clone(),
            });
        }
        batch.realizations += 1;
        batch
            .segment_utilization
            .extend_from_slice(&o.segment_utilization);
        batch.sinr_db.extend_from_slice(&o.sinr_db);
        batch
            .connection_ratio
            .extend_from_slice(&o.connection_ratio);
        batch.l2_path_lengths.extend_from_slice(&o.l2_path_lengths);
        batch.ue_instances += o.ue_count;
        batch.dropped += o.dropped;
    }
    batch.drop_rate = if batch.ue_instances == 0 {
        0.0
    } else {
        batch.dropped as f64 / batch.ue_instances as f64
    };
    Ok(batch)
}

/// Sorted `(value, fraction of samples ≤ value)` steps, one per distinct value.
pub fn empirical_cdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, x) in xs.into_iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = frac,
            _ => out.push((x, frac)),
        }
    }
    Ok(out)
}

pub fn mean(samples: &[f64]) -> Option<f64> {
    (!samples.is_empty()).then(|| samples.iter().sum::<f64>() / samples.len() as f64)
}

pub fn median(samples: &[f64]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    Some(if xs.len().is_multiple_of(2) {
        (xs[mid - 1] + xs[mid]) / 2.0
    } else {
        xs[mid]
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario_id: String,
    pub realizations: usize,
    pub ue_instances: usize,
    pub dropped: usize,
    pub drop_rate: f64,
    pub mean_sinr_db: Option<f64>,
    pub median_sinr_db: Option<f64>,
    pub mean_segment_utilization: Option<f64>,
    pub mean_connection_ratio: Option<f64>,
    pub max_l2_path_length: Option<usize>,
}

impl MetricBatch {
    pub fn summary(&self) -> Summary {
        Summary {
            scenario_id: self.scenario_id.clone(),
            realizations: self.realizations,
            ue_instances: self.ue_instances,
            dropped: self.dropped,
            drop_rate: self.drop_rate,
            mean_sinr_db: mean(&self.sinr_db),
            median_sinr_db: median(&self.sinr_db),
            mean_segment_utilization: mean(&self.segment_utilization),
            mean_connection_ratio: mean(&self.connection_ratio),
            max_l2_path_length: self.l2_path_lengths.iter().copied().max(),
        }
    }

    /// `(metric name, samples)` for each exported family.
    pub fn families(&self) -> [(&'static str, Vec<f64>); 4] {
        [
            ("segment_utilization", self.segment_utilization.clone()),
            ("sinr_db", self.sinr_db.clone()),
            ("connection_ratio", self.connection_ratio.clone()),
            (
                "l2_path_length",
                self.l2_path_lengths.iter().map(|&l| l as f64).collect(),
            ),
        ]
    }
}

pub const TABLE_HEADER: &str = "scenario_id,metric,value,cumulative_fraction";

/// Writes one CDF table (`scenario_id,metric,value,cumulative_fraction`).
/// An empty sample set produces only the header.
pub fn write_cdf_table<W: Write>(
    mut out: W,
    scenario_id: &str,
    metric: &str,
    samples: &[f64],
) -> Result<()> {
    writeln!(out, "{TABLE_HEADER}")?;
    if samples.is_empty() {
        return Ok(());
    }
    for (v, f) in empirical_cdf(samples)? {
        writeln!(out, "{scenario_id},{metric},{v},{f}")?;
    }
    Ok(())
}

//! Scenario configuration and the seeded Monte-Carlo driver.
//!
//! Each realization draws fresh UE/blocker positions and a fresh channel, then
//! runs grouping → two-level routing → association update → zero-forcing.
//! Realization `r` of scenario `id` is seeded from `(master seed, id, r)` only,
//! so realizations can run in any order or in parallel and still reproduce.

use std::fs;
use std::io::BufWriter;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::association::{apply_routing_outcomes, connection_ratio, AssociationMatrix};
use crate::channel::{draw_channel, place_entities, Area, ChannelParams};
use crate::error::{Error, Result};
use crate::grouping::{
    assign_arus, select_subsets, to_association, AruCriterion, ServingSubset, SubsetRule,
};
use crate::metrics::{collect, write_cdf_table, MetricBatch, RealizationOutput};
use crate::precoding::{
    czf, effective_channel, linear_to_db, normalize_power, off_association_power_fraction, sinr,
};
use crate::routing::{route_two_level, RoutingLedger, UeOrder, UeRouting};
use crate::topology::{build_grid, DuCorner, FronthaulTopology};

/// Maximum route length in segments. `Auto` uses the base segment capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "MaxLenRepr", into = "MaxLenRepr")]
pub enum MaxPathLength {
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MaxLenRepr {
    Fixed(usize),
    Keyword(String),
}

impl TryFrom<MaxLenRepr> for MaxPathLength {
    type Error = String;

    fn try_from(r: MaxLenRepr) -> std::result::Result<Self, String> {
        match r {
            MaxLenRepr::Fixed(n) => Ok(MaxPathLength::Fixed(n)),
            MaxLenRepr::Keyword(s) if s == "auto" => Ok(MaxPathLength::Auto),
            MaxLenRepr::Keyword(s) => Err(format!("expected \"auto\" or an integer, got \"{s}\"")),
        }
    }
}

impl From<MaxPathLength> for MaxLenRepr {
    fn from(m: MaxPathLength) -> Self {
        match m {
            MaxPathLength::Auto => MaxLenRepr::Keyword("auto".into()),
            MaxPathLength::Fixed(n) => MaxLenRepr::Fixed(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UeOrderPolicy {
    #[default]
    Ascending,
    /// Fresh shuffle per realization, seeded from the realization seed.
    Shuffled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Side of the square deployment area in metres.
    pub area_m: f64,
    pub du_corner: DuCorner,
    pub ues: usize,
    pub blockers: usize,
    pub blocker_radius_m: f64,
    pub channel: ChannelParams,
    /// Downlink share of the TDD frame. Recorded only; SINR does not depend on it.
    pub tdd_dl_fraction: f64,
    pub subset: SubsetRule,
    pub aru_criterion: AruCriterion,
    pub segment_capacity: u32,
    pub corner_multiplier: u32,
    pub max_path_length: MaxPathLength,
    pub ue_order: UeOrderPolicy,
    pub realizations: usize,
    pub seed: u64,
    pub iterations: usize,
    /// When false, every initial association survives (unconstrained fronthaul).
    pub routing_enabled: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "k8_cap10".into(),
            grid_rows: 4,
            grid_cols: 4,
            area_m: 100.0,
            du_corner: DuCorner::TopLeft,
            ues: 8,
            blockers: 1000,
            blocker_radius_m: 0.5,
            channel: ChannelParams::default(),
            tdd_dl_fraction: 0.5,
            subset: SubsetRule::TopM { m: 5 },
            aru_criterion: AruCriterion::StrongestGain,
            segment_capacity: 10,
            corner_multiplier: 2,
            max_path_length: MaxPathLength::Auto,
            ue_order: UeOrderPolicy::Ascending,
            realizations: 50,
            seed: 1,
            iterations: 1,
            routing_enabled: true,
        }
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field,
        reason: reason.into(),
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn ru_count(&self) -> usize {
        self.grid_rows * self.grid_cols
    }

    pub fn max_len(&self) -> usize {
        match self.max_path_length {
            MaxPathLength::Auto => self.segment_capacity as usize,
            MaxPathLength::Fixed(n) => n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || self.name.contains([',', '/', '\\', '\n'])
            || self.name == "."
            || self.name == ".."
        {
            return Err(invalid(
                "name",
                "must be non-empty and contain no commas, slashes or newlines",
            ));
        }
        if self.grid_rows == 0 {
            return Err(invalid("grid_rows", "must be at least 1"));
        }
        if self.grid_cols == 0 {
            return Err(invalid("grid_cols", "must be at least 1"));
        }
        if !(self.area_m.is_finite() && self.area_m > 0.0) {
            return Err(invalid(
                "area_m",
                format!("must be positive, got {}", self.area_m),
            ));
        }
        if self.ues == 0 {
            return Err(invalid("ues", "must be at least 1"));
        }
        if !(self.blocker_radius_m.is_finite() && self.blocker_radius_m >= 0.0) {
            return Err(invalid("blocker_radius_m", "must be a non-negative length"));
        }
        let ch = &self.channel;
        if !(ch.carrier_ghz.is_finite() && ch.carrier_ghz > 0.0) {
            return Err(invalid("channel.carrier_ghz", "must be positive"));
        }
        if !(ch.bandwidth_hz.is_finite() && ch.bandwidth_hz > 0.0) {
            return Err(invalid("channel.bandwidth_hz", "must be positive"));
        }
        for (field, v) in [
            ("channel.ru_power_dbm", ch.ru_power_dbm),
            ("channel.noise_figure_db", ch.noise_figure_db),
            ("channel.array_gain_db", ch.array_gain_db),
        ] {
            if !v.is_finite() {
                return Err(invalid(field, "must be finite"));
            }
        }
        if !(0.0..=1.0).contains(&self.tdd_dl_fraction) {
            return Err(invalid("tdd_dl_fraction", "must lie in [0, 1]"));
        }
        match self.subset {
            SubsetRule::TopM { m } if m == 0 || m > self.ru_count() => {
                return Err(invalid(
                    "subset.m",
                    format!("must lie in 1..={}, got {m}", self.ru_count()),
                ));
            }
            SubsetRule::Alpha { alpha } if !(alpha > 0.0 && alpha <= 1.0) => {
                return Err(invalid(
                    "subset.alpha",
                    format!("must lie in (0, 1], got {alpha}"),
                ));
            }
            _ => {}
        }
        if self.segment_capacity == 0 {
            return Err(invalid("segment_capacity", "must be at least 1"));
        }
        if self.corner_multiplier == 0 {
            return Err(invalid("corner_multiplier", "must be at least 1"));
        }
        if self.max_path_length == MaxPathLength::Fixed(0) {
            return Err(invalid("max_path_length", "must be at least 1"));
        }
        if self.realizations == 0 {
            return Err(invalid("realizations", "must be at least 1"));
        }
        if self.iterations == 0 {
            return Err(invalid("iterations", "must be at least 1"));
        }
        Ok(())
    }

    pub fn topology(&self) -> Result<FronthaulTopology> {
        let spacing = self.area_m / self.grid_rows.max(self.grid_cols) as f64;
        build_grid(
            self.grid_rows,
            self.grid_cols,
            spacing,
            self.segment_capacity,
            self.corner_multiplier,
            self.du_corner,
        )
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed of realization `index` of scenario `scenario_id`.
pub fn child_seed(master: u64, scenario_id: &str, index: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ fnv1a(scenario_id.as_bytes())) ^ index as u64)
}

#[derive(Clone, Copy)]
enum Stream {
    Placement = 1,
    Channel = 2,
    UeOrder = 3,
}

fn stream_seed(child: u64, stream: Stream) -> u64 {
    splitmix64(child ^ (stream as u64).wrapping_mul(0xd6e8_feb8_6659_fd93))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationDiagnostics {
    pub index: usize,
    pub seed: u64,
    pub active_ues: usize,
    pub dropped_ues: usize,
    pub bits_cleared: usize,
    pub ledger_peak_used: u32,
    pub ledger_peak_occupancy: f64,
    pub zf_rank: usize,
    pub zf_residual: f64,
    pub max_ru_power_w: f64,
    pub off_association_power_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationResult {
    pub output: RealizationOutput,
    pub diagnostics: RealizationDiagnostics,
    pub initial: AssociationMatrix,
    pub updated: AssociationMatrix,
    pub routing: Vec<UeRouting>,
    /// Per-UE linear SINR, `None` for dropped UEs.
    pub sinr: Vec<Option<f64>>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario_id: String,
    pub config: ScenarioConfig,
    pub batch: MetricBatch,
    pub diagnostics: Vec<RealizationDiagnostics>,
    pub duration: Duration,
}

fn regroup(updated: &AssociationMatrix, original: &[ServingSubset]) -> Vec<ServingSubset> {
    original
        .iter()
        .filter(|s| !updated.dropped[s.ue_id])
        .map(|s| ServingSubset {
            ue_id: s.ue_id,
            ru_ids: s
                .ru_ids
                .iter()
                .copied()
                .filter(|&n| updated.get(s.ue_id, n))
                .collect(),
            aru_id: s.aru_id,
        })
        .filter(|s| !s.ru_ids.is_empty())
        .collect()
}

/// Runs realization `index` of `config` on `topology`.
pub fn run_realization(
    config: &ScenarioConfig,
    topology: &FronthaulTopology,
    index: usize,
) -> Result<RealizationResult> {
    let seed = child_seed(config.seed, &config.name, index);
    let k = config.ues;
    let n = topology.ru_count();

    let deployment = place_entities(
        Area::square(config.area_m),
        k,
        config.blockers,
        config.blocker_radius_m,
        stream_seed(seed, Stream::Placement),
    );
    let ch = draw_channel(
        &deployment,
        topology,
        &config.channel,
        stream_seed(seed, Stream::Channel),
    )?;

    let mut subsets = select_subsets(&ch.large_scale, config.subset)?;
    assign_arus(
        &mut subsets,
        config.aru_criterion,
        &ch.large_scale,
        topology,
    )?;
    let initial = to_association(&subsets, k, n)?;

    let order = match config.ue_order {
        UeOrderPolicy::Ascending => UeOrder::Ascending,
        UeOrderPolicy::Shuffled => UeOrder::Shuffled {
            seed: stream_seed(seed, Stream::UeOrder),
        },
    };
    let mut ledger = RoutingLedger::new(topology);
    let mut routing = Vec::new();
    let mut updated = initial.clone();
    if config.routing_enabled {
        for iteration in 0..config.iterations {
            let mut current = if iteration == 0 {
                subsets.clone()
            } else {
                regroup(&updated, &subsets)
            };
            if iteration > 0 {
                assign_arus(
                    &mut current,
                    config.aru_criterion,
                    &ch.large_scale,
                    topology,
                )?;
            }
            ledger = RoutingLedger::new(topology);
            routing = route_two_level(topology, &mut ledger, &current, config.max_len(), order)?;
            updated = apply_routing_outcomes(&updated, &routing)?;
        }
    }

    let eff = effective_channel(&ch.h, &updated)?;
    let raw = czf(&eff);
    let precoders = normalize_power(&raw.w, ch.per_ru_power)?;
    let gamma = sinr(&ch.h, &precoders, &updated, ch.noise_power);

    let segment_utilization: Vec<f64> = (0..ledger.segment_count())
        .map(|s| ledger.occupancy(s))
        .collect();
    let l2_path_lengths: Vec<usize> = routing
        .iter()
        .flat_map(|u| u.l2.iter().filter_map(|d| d.path_len()))
        .collect();
    let connection: Vec<f64> = (0..k)
        .filter(|&ue| initial.row_count(ue) > 0)
        .map(|ue| connection_ratio(&initial, &updated, ue))
        .collect();
    let dropped = updated.dropped.iter().filter(|&&d| d).count();

    let diagnostics = RealizationDiagnostics {
        index,
        seed,
        active_ues: eff.active_ues.len(),
        dropped_ues: dropped,
        bits_cleared: initial.ones() - updated.ones(),
        ledger_peak_used: ledger.peak_used(),
        ledger_peak_occupancy: segment_utilization.iter().copied().fold(0.0, f64::max),
        zf_rank: raw.rank,
        zf_residual: raw.zf_residual,
        max_ru_power_w: precoders
            .per_ru_tx_power
            .iter()
            .copied()
            .fold(0.0, f64::max),
        off_association_power_fraction: off_association_power_fraction(&precoders, &updated),
    };
    let output = RealizationOutput {
        scenario_id: config.name.clone(),
        segment_utilization,
        sinr_db: gamma.iter().flatten().map(|&g| linear_to_db(g)).collect(),
        connection_ratio: connection,
        l2_path_lengths,
        ue_count: k,
        dropped,
    };
    Ok(RealizationResult {
        output,
        diagnostics,
        initial,
        updated,
        routing,
        sinr: gamma,
    })
}

/// Runs every realization of one scenario. Realizations execute on the
/// current rayon pool; results are gathered in index order.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let topology = config.topology()?;
    let results: Vec<RealizationResult> = (0..config.realizations)
        .into_par_iter()
        .map(|r| run_realization(config, &topology, r))
        .collect::<Result<_>>()?;
    let outputs: Vec<RealizationOutput> = results.iter().map(|r| r.output.clone()).collect();
    let batch = collect(&config.name, &outputs)?;
    Ok(RunReport {
        scenario_id: config.name.clone(),
        config: config.clone(),
        batch,
        diagnostics: results.into_iter().map(|r| r.diagnostics).collect(),
        duration: start.elapsed(),
    })
}

pub fn run_sweep(configs: &[ScenarioConfig]) -> Result<Vec<RunReport>> {
    if configs.is_empty() {
        return Err(invalid("scenarios", "a sweep needs at least one scenario"));
    }
    let mut names: Vec<&str> = configs.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(invalid(
            "name",
            format!("duplicate scenario name '{}'", w[0]),
        ));
    }
    configs.iter().map(run_scenario).collect()
}

/// Cross product of UE counts and segment capacities over a base scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub base: ScenarioConfig,
    pub ues: Vec<usize>,
    pub capacities: Vec<u32>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            base: ScenarioConfig::default(),
            ues: vec![8, 15],
            capacities: vec![5, 10, 100],
        }
    }
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// One scenario per `(K, capacity)` pair, named `k{K}_cap{C}`.
    pub fn expand(&self) -> Result<Vec<ScenarioConfig>> {
        let mut out = Vec::with_capacity(self.ues.len() * self.capacities.len());
        for &k in &self.ues {
            for &cap in &self.capacities {
                let cfg = ScenarioConfig {
                    name: format!("k{k}_cap{cap}"),
                    ues: k,
                    segment_capacity: cap,
                    ..self.base.clone()
                };
                cfg.validate()?;
                out.push(cfg);
            }
        }
        Ok(out)
    }
}

pub const METRIC_FILES: [&str; 4] = [
    "segment_utilization",
    "sinr_db",
    "connection_ratio",
    "l2_path_length",
];

/// Writes a scenario's CDF tables, summary, diagnostics and segment table
/// under `dir/<scenario_id>/`.
pub fn write_report(report: &RunReport, dir: &Path) -> Result<()> {
    let sub = dir.join(&report.scenario_id);
    fs::create_dir_all(&sub)?;
    for (metric, samples) in report.batch.families() {
        let f = BufWriter::new(fs::File::create(sub.join(format!("{metric}.csv")))?);
        write_cdf_table(f, &report.scenario_id, metric, &samples)?;
    }
    let mut summary = serde_json::to_string_pretty(&report.batch.summary())?;
    summary.push('\n');
    fs::write(sub.join("summary.json"), summary)?;

    let mut diag = String::from(
        "index,seed,active_ues,dropped_ues,bits_cleared,ledger_peak_used,ledger_peak_occupancy,zf_rank,zf_residual,max_ru_power_w,off_association_power_fraction\n",
    );
    for d in &report.diagnostics {
        diag.push_str(&format!(
            "{},{},{},{},{},{},{},{},{:e},{:e},{}\n",
            d.index,
            d.seed,
            d.active_ues,
            d.dropped_ues,
            d.bits_cleared,
            d.ledger_peak_used,
            d.ledger_peak_occupancy,
            d.zf_rank,
            d.zf_residual,
            d.max_ru_power_w,
            d.off_association_power_fraction
        ));
    }
    fs::write(sub.join("diagnostics.csv"), diag)?;
    report
        .config
        .topology()?
        .write_segment_table(BufWriter::new(fs::File::create(sub.join("topology.csv"))?))?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub scenarios: Vec<&'a ScenarioConfig>,
}

/// Writes `manifest.json` echoing every scenario config.
pub fn write_manifest(dir: &Path, command: &str, reports: &[RunReport]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        scenarios: reports.iter().map(|r| &r.config).collect(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(name: &str) -> ScenarioConfig {
        ScenarioConfig {
            name: name.into(),
            realizations: 4,
            blockers: 200,
            ..Default::default()
        }
    }

    #[test]
    fn defaults_mirror_the_reference_scenario() {
        let c = ScenarioConfig::default();
        assert_eq!(c.ru_count(), 16);
        assert_eq!(c.ues, 8);
        assert_eq!(c.subset, SubsetRule::TopM { m: 5 });
        assert_eq!(c.realizations, 50);
        assert_eq!(c.max_len(), 10);
        assert_eq!(c.channel.carrier_ghz, 28.0);
        c.validate().unwrap();
    }

    #[test]
    fn toml_round_trip_and_max_len_forms() {
        let c = ScenarioConfig {
            max_path_length: MaxPathLength::Fixed(6),
            ..Default::default()
        };
        assert_eq!(ScenarioConfig::from_toml(&c.to_toml()).unwrap(), c);
        let auto = ScenarioConfig::from_toml("max_path_length = \"auto\"\nsegment_capacity = 5\n")
            .unwrap();
        assert_eq!(auto.max_len(), 5);
        let fixed = ScenarioConfig::from_toml("max_path_length = 3\n").unwrap();
        assert_eq!(fixed.max_len(), 3);
        assert!(ScenarioConfig::from_toml("max_path_length = \"long\"\n").is_err());
        let partial = ScenarioConfig::from_toml("[channel]\nbandwidth_hz = 1e8\n").unwrap();
        assert_eq!(partial.channel.bandwidth_hz, 1e8);
        assert_eq!(partial.channel.carrier_ghz, 28.0);
        let alpha =
            ScenarioConfig::from_toml("[subset]\nrule = \"alpha\"\nalpha = 0.95\n").unwrap();
        assert_eq!(alpha.subset, SubsetRule::Alpha { alpha: 0.95 });
        assert!(ScenarioConfig::from_toml("bogus_field = 1\n").is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let cases: Vec<(ScenarioConfig, &str)> = vec![
            (
                ScenarioConfig {
                    ues: 0,
                    ..Default::default()
                },
                "ues",
            ),
            (
                ScenarioConfig {
                    realizations: 0,
                    ..Default::default()
                },
                "realizations",
            ),
            (
                ScenarioConfig {
                    segment_capacity: 0,
                    ..Default::default()
                },
                "segment_capacity",
            ),
            (
                ScenarioConfig {
                    subset: SubsetRule::TopM { m: 17 },
                    ..Default::default()
                },
                "subset.m",
            ),
            (
                ScenarioConfig {
                    name: "a/b".into(),
                    ..Default::default()
                },
                "name",
            ),
            (
                ScenarioConfig {
                    max_path_length: MaxPathLength::Fixed(0),
                    ..Default::default()
                },
                "max_path_length",
            ),
            (
                ScenarioConfig {
                    iterations: 0,
                    ..Default::default()
                },
                "iterations",
            ),
        ];
        for (cfg, field) in cases {
            match cfg.validate() {
                Err(Error::InvalidConfig { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected {field} error, got {other:?}"),
            }
        }
    }

    #[test]
    fn child_seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..100).map(|r| child_seed(1, "k8_cap10", r)).collect();
        let mut dedup = a.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 100);
        assert_eq!(child_seed(1, "k8_cap10", 3), a[3]);
        assert_ne!(child_seed(2, "k8_cap10", 3), a[3]);
        assert_ne!(child_seed(1, "k8_cap5", 3), a[3]);
    }

    #[test]
    fn realization_is_reproducible_and_independent_of_others() {
        let cfg = small("s");
        let topo = cfg.topology().unwrap();
        let r2 = run_realization(&cfg, &topo, 2).unwrap();
        let report = run_scenario(&cfg).unwrap();
        assert_eq!(report.diagnostics[2], r2.diagnostics);
        // a different master seed changes the realization; realization 2 alone is unaffected by the count
        let more = ScenarioConfig {
            realizations: 9,
            ..cfg.clone()
        };
        assert_eq!(run_scenario(&more).unwrap().diagnostics[2], r2.diagnostics);
    }

    #[test]
    fn pipeline_invariants_hold() {
        for cap in [1, 3, 100] {
            let cfg = ScenarioConfig {
                segment_capacity: cap,
                ues: 10,
                ..small("inv")
            };
            let topo = cfg.topology().unwrap();
            for r in 0..4 {
                let res = run_realization(&cfg, &topo, r).unwrap();
                assert!(res.updated.is_subset_of(&res.initial));
                for k in 0..cfg.ues {
                    assert_eq!(res.updated.dropped[k], !res.routing[k].l1.succeeded());
                    if res.updated.dropped[k] {
                        assert_eq!(res.updated.row_count(k), 0);
                        assert!(res.sinr[k].is_none());
                    } else {
                        assert!(res.updated.row_count(k) >= 1);
                        assert!(res.sinr[k].is_some());
                    }
                }
                assert!(res
                    .output
                    .l2_path_lengths
                    .iter()
                    .all(|&l| l >= 1 && l <= cfg.max_len()));
                assert!(res
                    .output
                    .segment_utilization
                    .iter()
                    .all(|&u| (0.0..=1.0).contains(&u)));
                assert!(res.diagnostics.max_ru_power_w <= res_power(&cfg) * (1.0 + 1e-12));
                for u in &res.routing {
                    for d in std::iter::once(&u.l1).chain(&u.l2) {
                        if let Some(f) = d.utility {
                            assert!(f > 0.0 && f <= 1.0);
                        }
                    }
                }
            }
        }
    }

    fn res_power(cfg: &ScenarioConfig) -> f64 {
        crate::channel::dbm_to_watts(cfg.channel.ru_power_dbm)
    }

    #[test]
    fn extra_iterations_never_add_links() {
        let cfg = ScenarioConfig {
            segment_capacity: 2,
            ues: 12,
            iterations: 3,
            ..small("iter")
        };
        let one = ScenarioConfig {
            iterations: 1,
            ..cfg.clone()
        };
        let topo = cfg.topology().unwrap();
        for r in 0..4 {
            let a = run_realization(&cfg, &topo, r).unwrap();
            let b = run_realization(&one, &topo, r).unwrap();
            assert!(a.updated.is_subset_of(&b.updated));
            assert_eq!(a.initial, b.initial);
        }
    }

    #[test]
    fn sweep_expansion() {
        let s = SweepConfig::default();
        let cfgs = s.expand().unwrap();
        assert_eq!(cfgs.len(), 6);
        assert_eq!(cfgs[0].name, "k8_cap5");
        assert_eq!(cfgs[5].name, "k15_cap100");
        assert_eq!(cfgs[5].max_len(), 100);
        assert!(run_sweep(&[]).is_err());
        let dup = vec![small("x"), small("x")];
        assert!(run_sweep(&dup).is_err());
        let one = run_sweep(&[small("solo")]).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn report_files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_scenario(&small("files")).unwrap();
        write_report(&report, dir.path()).unwrap();
        write_manifest(dir.path(), "test", std::slice::from_ref(&report)).unwrap();
        for f in METRIC_FILES {
            let text =
                fs::read_to_string(dir.path().join("files").join(format!("{f}.csv"))).unwrap();
            assert!(text.starts_with(crate::metrics::TABLE_HEADER));
        }
        let manifest = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        assert!(manifest.contains("\"seed\": 1"));
        assert!(dir.path().join("files/summary.json").exists());
        assert!(dir.path().join("files/topology.csv").exists());
    }
}

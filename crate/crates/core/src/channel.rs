//! UE and blocker placement, blockage test, InH-Office pathloss and Rayleigh
//! channel draws.
//!
//! UEs and RUs share one antenna height, so all geometry is 2-D. Each RU is a
//! single effective antenna whose array gain is folded into the large-scale
//! coefficient.

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{FronthaulTopology, Point};

/// Thermal noise density at 290 K.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Shadow-fading standard deviations for InH-Office.
pub const SHADOW_SIGMA_LOS_DB: f64 = 3.0;
pub const SHADOW_SIGMA_NLOS_DB: f64 = 8.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Area {
    pub width: f64,
    pub height: f64,
}

impl Area {
    pub fn square(side: f64) -> Self {
        Self {
            width: side,
            height: side,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blocker {
    pub center: Point,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentRealization {
    pub ue_positions: Vec<Point>,
    pub blockers: Vec<Blocker>,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub carrier_ghz: f64,
    pub bandwidth_hz: f64,
    pub ru_power_dbm: f64,
    pub noise_figure_db: f64,
    pub array_gain_db: f64,
    pub shadowing: bool,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            carrier_ghz: 28.0,
            bandwidth_hz: 200e6,
            ru_power_dbm: 13.0,
            noise_figure_db: 10.0,
            // two 4x4 subarrays
            array_gain_db: 10.0 * 32f64.log10(),
            shadowing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    /// K × N complex gains.
    pub h: DMatrix<Complex<f64>>,
    /// K × N linear large-scale gains, `E{|h_kn|²}`.
    pub large_scale: DMatrix<f64>,
    /// K × N line-of-sight flags.
    pub los: DMatrix<bool>,
    pub noise_power: f64,
    pub per_ru_power: f64,
}

impl ChannelState {
    pub fn ue_count(&self) -> usize {
        self.h.nrows()
    }

    pub fn ru_count(&self) -> usize {
        self.h.ncols()
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Drops `ue_count` UEs and `blocker_count` blockers uniformly over `area`.
pub fn place_entities(
    area: Area,
    ue_count: usize,
    blocker_count: usize,
    blocker_radius: f64,
    seed: u64,
) -> DeploymentRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| {
        Point::new(
            rng.random::<f64>() * area.width,
            rng.random::<f64>() * area.height,
        )
    };
    let ue_positions = (0..ue_count).map(|_| point(&mut rng)).collect();
    let blockers = (0..blocker_count)
        .map(|_| Blocker {
            center: point(&mut rng),
            radius: blocker_radius,
        })
        .collect();
    DeploymentRealization {
        ue_positions,
        blockers,
        rng_seed: seed,
    }
}

fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(&Point::new(a.x + t * dx, a.y + t * dy))
}

/// True iff the straight link between the two points crosses no blocker disk.
pub fn is_los(ue: &Point, ru: &Point, blockers: &[Blocker]) -> bool {
    blockers
        .iter()
        .all(|b| point_segment_distance(&b.center, ue, ru) > b.radius)
}

/// InH-Office pathloss in dB.
///
/// LOS: `32.4 + 17.3·log10(d) + 20·log10(fc)`.
/// NLOS: `max(LOS, 17.3 + 38.3·log10(d) + 24.9·log10(fc))`.
/// Distances below the model's 1 m lower bound are evaluated at 1 m.
pub fn pathloss_db(distance: f64, los: bool, carrier_ghz: f64) -> Result<f64> {
    if distance.is_nan() || distance <= 0.0 {
        return Err(Error::NonPositiveDistance(distance));
    }
    let d = distance.max(1.0).log10();
    let f = carrier_ghz.log10();
    let pl_los = 32.4 + 17.3 * d + 20.0 * f;
    if los {
        Ok(pl_los)
    } else {
        Ok(pl_los.max(17.3 + 38.3 * d + 24.9 * f))
    }
}

/// Noise power in watts for the given bandwidth and receiver noise figure.
pub fn noise_power(bandwidth_hz: f64, noise_figure_db: f64) -> Result<f64> {
    if bandwidth_hz.is_nan() || bandwidth_hz <= 0.0 {
        return Err(Error::InvalidConfig {
            field: "bandwidth_hz",
            reason: format!("must be positive, got {bandwidth_hz}"),
        });
    }
    Ok(dbm_to_watts(
        THERMAL_NOISE_DBM_PER_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db,
    ))
}

/// Draws `h_kn = sqrt(g_kn)·z_kn` with `z_kn ~ CN(0, 1)`.
pub fn draw_channel(
    realization: &DeploymentRealization,
    topology: &FronthaulTopology,
    params: &ChannelParams,
    seed: u64,
) -> Result<ChannelState> {
    let k = realization.ue_positions.len();
    let n = topology.ru_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sf_los = Normal::new(0.0, SHADOW_SIGMA_LOS_DB).expect("finite sigma");
    let sf_nlos = Normal::new(0.0, SHADOW_SIGMA_NLOS_DB).expect("finite sigma");

    let mut large_scale = DMatrix::<f64>::zeros(k, n);
    let mut los = DMatrix::<bool>::from_element(k, n, false);
    let mut h = DMatrix::<Complex<f64>>::zeros(k, n);
    for (ue, pos) in realization.ue_positions.iter().enumerate() {
        for ru in topology.rus() {
            let clear = is_los(pos, &ru.position, &realization.blockers);
            // a UE dropped exactly on an RU is evaluated at the 1 m floor
            let d = pos.distance(&ru.position).max(f64::MIN_POSITIVE);
            let mut gain_db = params.array_gain_db - pathloss_db(d, clear, params.carrier_ghz)?;
            if params.shadowing {
                gain_db += if clear {
                    sf_los.sample(&mut rng)
                } else {
                    sf_nlos.sample(&mut rng)
                };
            }
            let g = 10f64.powf(gain_db / 10.0);
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let z = Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            large_scale[(ue, ru.id)] = g;
            los[(ue, ru.id)] = clear;
            h[(ue, ru.id)] = z * g.sqrt();
        }
    }
    Ok(ChannelState {
        h,
        large_scale,
        los,
        noise_power: noise_power(params.bandwidth_hz, params.noise_figure_db)?,
        per_ru_power: dbm_to_watts(params.ru_power_dbm),
    })
}

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::SutError;
use crate::problem::{Comparison, FitnessEvaluator, Oracle, SearchDomain, SearchProblem, Sense, Threshold};

/// Geometry of the pedestrian-crossing surrogate, in metres.
///
/// The ego vehicle drives along a straight lane at constant speed `x1`,
/// starting at longitudinal position 0. A pedestrian waits on the sidewalk
/// `lane_offset` metres from the lane edge at longitudinal position
/// `crossing_position`, starts walking perpendicular to the lane after
/// `x3` seconds at speed `x2`, and reaches the ego path (the lane centre,
/// `crossing_width / 2` beyond the edge) at
/// `t_c = x3 + (lane_offset + crossing_width / 2) / x2`.
/// The miss distance is the longitudinal gap between the ego front and the
/// crossing point at that moment: `d = |crossing_position - x1 * t_c|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AvpGeometry {
    pub lane_offset: f64,
    pub crossing_width: f64,
    pub crossing_position: f64,
}

impl Default for AvpGeometry {
    fn default() -> Self {
        Self {
            lane_offset: 5.0,
            crossing_width: 2.0,
            crossing_position: 10.0,
        }
    }
}

impl AvpGeometry {
    pub fn miss_distance(&self, x: &[f64]) -> f64 {
        let (ego_speed, ped_speed, delay) = (x[0], x[1], x[2]);
        let crossing_time = delay + (self.lane_offset + 0.5 * self.crossing_width) / ped_speed;
        (self.crossing_position - ego_speed * crossing_time).abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SyntheticKind {
    Avp(AvpGeometry),
    /// Failing iff `|x - center| < radius`.
    Ball { center: Vec<f64>, radius: f64 },
    /// Failing iff `| |x - center| - radius | < half_thickness`.
    Shell {
        center: Vec<f64>,
        radius: f64,
        half_thickness: f64,
    },
    /// Failing iff within `radius` of any center.
    Blobs { centers: Vec<Vec<f64>>, radius: f64 },
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl SyntheticKind {
    /// Distance-like depth and the scale at which the oracle flips.
    fn depth(&self, x: &[f64]) -> (f64, f64) {
        match self {
            SyntheticKind::Avp(_) => unreachable!("the AVP surrogate has its own fitness"),
            SyntheticKind::Ball { center, radius } => (distance(x, center), *radius),
            SyntheticKind::Shell {
                center,
                radius,
                half_thickness,
            } => ((distance(x, center) - radius).abs(), *half_thickness),
            SyntheticKind::Blobs { centers, radius } => (
                centers.iter().map(|c| distance(x, c)).fold(f64::INFINITY, f64::min),
                *radius,
            ),
        }
    }
}

/// A closed-form SUT with known failing region.
#[derive(Clone, Debug)]
pub struct SyntheticSut {
    pub name: String,
    pub domain: SearchDomain,
    pub senses: Vec<Sense>,
    pub oracle: Oracle,
    pub kind: SyntheticKind,
    /// Raw-objective box containing every failing fitness vector; the
    /// distinct-failure grid is laid over it.
    pub objective_bounds: Vec<(f64, f64)>,
    /// Raw hypervolume reference point (the oracle threshold corner).
    pub hv_reference: Vec<f64>,
    pub latency: Duration,
}

impl SyntheticSut {
    pub fn fitness(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            SyntheticKind::Avp(geometry) => {
                let d = geometry.miss_distance(x);
                vec![1.0 / (1.0 + d), x[0]]
            }
            kind => {
                let (depth, scale) = kind.depth(x);
                vec![1.0 / (1.0 + depth / scale), x[0]]
            }
        }
    }

    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.latency = latency;
        self
    }

    pub fn problem(&self) -> SearchProblem {
        SearchProblem::new(
            self.name.clone(),
            self.domain.clone(),
            self.senses.clone(),
            self.oracle.clone(),
            Arc::new(self.clone()),
        )
        .expect("synthetic SUTs are well formed")
    }
}

impl FitnessEvaluator for SyntheticSut {
    fn evaluate(&self, input: &[f64]) -> Result<Vec<f64>, SutError> {
        if !self.latency.is_zero() {
            std::thread::sleep(self.latency);
        }
        Ok(self.fitness(input))
    }
}

/// Automated-valet-parking surrogate: ego speed, pedestrian speed and
/// pedestrian start delay; `f1 = 1 / (1 + d)`, `f2` = ego speed at closest
/// approach; both maximized; failing iff `f1 > 0.8 && f2 > 0.1`.
pub fn avp_surrogate() -> SyntheticSut {
    avp_surrogate_with(AvpGeometry::default())
}

pub fn avp_surrogate_with(geometry: AvpGeometry) -> SyntheticSut {
    SyntheticSut {
        name: "avp".into(),
        domain: SearchDomain::new(vec![(0.1, 3.0), (0.5, 2.0), (0.0, 5.0)]).expect("valid bounds"),
        senses: vec![Sense::Maximize, Sense::Maximize],
        oracle: Oracle::new(vec![
            Threshold {
                objective: 0,
                op: Comparison::Greater,
                value: 0.8,
            },
            Threshold {
                objective: 1,
                op: Comparison::Greater,
                value: 0.1,
            },
        ]),
        kind: SyntheticKind::Avp(geometry),
        objective_bounds: vec![(0.8, 1.0), (0.1, 3.0)],
        hv_reference: vec![0.8, 0.1],
        latency: Duration::ZERO,
    }
}

/// Target failing-volume fraction of the benchmark geometries.
const BENCHMARK_VOLUME: f64 = 0.03;

fn benchmark(name: &str, kind: SyntheticKind) -> SyntheticSut {
    SyntheticSut {
        name: name.into(),
        domain: SearchDomain::unit(3).expect("valid bounds"),
        senses: vec![Sense::Maximize, Sense::Maximize],
        oracle: Oracle::new(vec![Threshold {
            objective: 0,
            op: Comparison::Greater,
            value: 0.5,
        }]),
        kind,
        objective_bounds: vec![(0.5, 1.0), (0.0, 1.0)],
        hv_reference: vec![0.5, 0.0],
        latency: Duration::ZERO,
    }
}

fn ball_radius(volume: f64) -> f64 {
    (volume * 3.0 / (4.0 * PI)).cbrt()
}

pub fn ball() -> SyntheticSut {
    benchmark(
        "ball",
        SyntheticKind::Ball {
            center: vec![0.5; 3],
            radius: ball_radius(BENCHMARK_VOLUME),
        },
    )
}

pub fn shell() -> SyntheticSut {
    // 4/3 pi ((R + t)^3 - (R - t)^3) ~ 0.030 for R = 0.3
    benchmark(
        "shell",
        SyntheticKind::Shell {
            center: vec![0.5; 3],
            radius: 0.3,
            half_thickness: 0.0133,
        },
    )
}

pub fn two_blobs() -> SyntheticSut {
    benchmark(
        "two-blobs",
        SyntheticKind::Blobs {
            centers: vec![vec![0.25; 3], vec![0.75; 3]],
            radius: ball_radius(BENCHMARK_VOLUME / 2.0),
        },
    )
}

/// Convex, hollow and two-component failing regions in the unit cube.
pub fn benchmark_suite() -> Vec<SyntheticSut> {
    vec![ball(), shell(), two_blobs()]
}

pub const SUT_NAMES: &[&str] = &["avp", "ball", "shell", "two-blobs"];

pub fn by_name(name: &str) -> Option<SyntheticSut> {
    match name {
        "avp" => Some(avp_surrogate()),
        "ball" => Some(ball()),
        "shell" => Some(shell()),
        "two-blobs" => Some(two_blobs()),
        _ => None,
    }
}

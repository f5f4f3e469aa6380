//! Analysis configuration shared by every module and echoed in reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semialg::SamplerConfig;

/// Parameters of the accumulation test behind tameness verdicts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TamenessParams {
    /// Accumulation points closer to the origin than this are conceded.
    pub exclusion_radius: f64,
    /// Relative distance every sample must keep from the target set.
    pub margin: f64,
    /// Largest final rung distance accepted for a witness.
    pub witness_tol: f64,
    /// A ladder stalling at a target distance at least this large certifies
    /// a gap.
    pub gap_floor: f64,
    /// Each rung must shrink the distance to the target by this factor.
    pub descent_ratio: f64,
    /// Rung step lengths tried, as multiples of the current target distance.
    pub step_factors: Vec<f64>,
    /// Most rungs per ladder.
    pub max_rungs: usize,
    /// Ladders started per radius from the closest samples.
    pub candidates_per_radius: usize,
    /// Starts tried per rung.
    pub rung_starts: usize,
    /// A rung may not shrink the target distance below this fraction of the
    /// previous one.
    pub off_target_ratio: f64,
    /// Normalized size `F(y)` must keep for `y` to count as off `V_F` in the
    /// composite test.
    pub image_floor: f64,
}

impl Default for TamenessParams {
    fn default() -> Self {
        TamenessParams {
            exclusion_radius: 0.02,
            margin: 0.1,
            witness_tol: 1e-5,
            gap_floor: 4e-5,
            descent_ratio: 0.7,
            step_factors: vec![0.5, 0.75, 1.0, 1.5, 2.0, 4.0],
            max_rungs: 48,
            candidates_per_radius: 4,
            rung_starts: 8,
            off_target_ratio: 0.05,
            image_floor: 1e-3,
        }
    }
}

/// Thresholds of the discriminant evidence test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscParams {
    pub image_tol: f64,
    pub order_floor: f64,
}

impl Default for DiscParams {
    fn default() -> Self {
        DiscParams {
            image_tol: 1e-6,
            order_floor: 1.0,
        }
    }
}

/// Effort and tolerances of gradient-degree computations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopologyParams {
    /// Regular values tried; a strict majority must agree exactly.
    pub directions: usize,
    /// Newton starts per direction.
    pub starts: usize,
    /// Preimages closer than `radius * dedup_factor` coincide.
    pub dedup_factor: f64,
    /// Gauss–Legendre nodes per unit of angle range in the Kronecker check.
    pub quadrature_nodes: usize,
    /// Largest distance of the quadrature value from an integer.
    pub quadrature_residual: f64,
}

impl Default for TopologyParams {
    fn default() -> Self {
        TopologyParams {
            directions: 7,
            starts: 96,
            dedup_factor: 1e-4,
            quadrature_nodes: 48,
            quadrature_residual: 0.2,
        }
    }
}

/// Everything a sampling-based check needs; fully determines its output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub seed: u64,
    /// Sphere radii probed, largest first.
    pub radii: Vec<f64>,
    pub points_per_radius: usize,
    /// Float membership tolerance of set-identity checks.
    pub membership_tol: f64,
    pub sampler: SamplerConfig,
    pub tameness: TamenessParams,
    pub disc: DiscParams,
    pub topology: TopologyParams,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            seed: 0,
            radii: radius_ladder(0.2, 4),
            points_per_radius: 48,
            membership_tol: 1e-8,
            sampler: SamplerConfig::default(),
            tameness: TamenessParams::default(),
            disc: DiscParams::default(),
            topology: TopologyParams::default(),
        }
    }
}

fn ladder_params_ok(t: &TamenessParams) -> bool {
    t.descent_ratio < 1.0
        && t.off_target_ratio < t.descent_ratio
        && !t.step_factors.is_empty()
        && t.step_factors.iter().all(|f| *f > 0.0 && f.is_finite())
        && t.max_rungs > 0
}

/// `start * 2^-k` for `k = 0..steps`.
pub fn radius_ladder(start: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|k| start * 0.5f64.powi(k as i32)).collect()
}

impl AnalysisConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.sampler.validate()?;
        if self.radii.is_empty() || self.radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::Input("radii must be a non-empty list of positive numbers".into()));
        }
        if self.points_per_radius == 0 {
            return Err(Error::Input("points_per_radius must be at least 1".into()));
        }
        let t = &self.tameness;
        for v in [
            t.exclusion_radius,
            t.margin,
            t.witness_tol,
            t.gap_floor,
            t.descent_ratio,
            t.off_target_ratio,
            t.image_floor,
            self.membership_tol,
            self.disc.image_tol,
            self.topology.dedup_factor,
            self.topology.quadrature_residual,
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidTolerance(v));
            }
        }
        if !ladder_params_ok(t) {
            return Err(Error::Input(
                "descent_ratio must lie in (off_target_ratio, 1) and step_factors must be positive".into(),
            ));
        }
        let tp = &self.topology;
        if tp.directions == 0 || tp.starts == 0 || tp.quadrature_nodes < 2 {
            return Err(Error::Input(
                "topology needs at least one direction, one start and two quadrature nodes".into(),
            ));
        }
        Ok(())
    }

    /// Sub-seed for an independent stream tagged by `tag`.
    pub fn stream(&self, tag: u64) -> u64 {
        splitmix(self.seed ^ splitmix(tag))
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = AnalysisConfig::default();
        c.validate().unwrap();
        assert_eq!(c.radii, vec![0.2, 0.1, 0.05, 0.025]);
        let s = serde_json::to_string(&c).unwrap();
        let back: AnalysisConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let partial: AnalysisConfig = serde_json::from_str(r#"{"seed": 9}"#).unwrap();
        assert_eq!(partial.seed, 9);
        assert_eq!(partial.tameness, TamenessParams::default());
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = AnalysisConfig::default();
        c.tameness.margin = 0.0;
        assert!(matches!(c.validate(), Err(Error::InvalidTolerance(_))));
        let c = AnalysisConfig {
            radii: vec![],
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn streams_differ() {
        let c = AnalysisConfig::default();
        assert_ne!(c.stream(1), c.stream(2));
        assert_ne!(c.stream(1), c.clone().with_seed(1).stream(1));
    }
}

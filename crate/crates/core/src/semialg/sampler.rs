use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::newton::{self, NewtonConfig, System};
use super::{CompiledPiece, CompiledSet, ConstructibleSet};
use crate::error::{Error, Result};

/// Tolerances and effort limits for sphere sampling and projection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    /// Normalized equation residual accepted on a retained point.
    pub tol: f64,
    /// Normalized inequation magnitude a retained point must exceed.
    pub sep_tol: f64,
    /// Membership tolerance used when subtracting a set.
    pub reject_tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Start budget per requested point.
    pub starts_per_point: usize,
    /// Points closer than `radius * dedup_factor` are duplicates.
    pub dedup_factor: f64,
    pub batch: usize,
    /// Multi-start count for nearest-point projection.
    pub projection_starts: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            tol: 1e-10,
            sep_tol: 1e-6,
            reject_tol: 1e-6,
            max_iter: 80,
            max_halvings: 30,
            starts_per_point: 64,
            dedup_factor: 1e-3,
            batch: 64,
            projection_starts: 24,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn newton(&self) -> NewtonConfig {
        NewtonConfig {
            max_iter: self.max_iter,
            max_halvings: self.max_halvings,
            target: self.tol * 1e-4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for t in [self.tol, self.sep_tol, self.reject_tol, self.dedup_factor] {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::InvalidTolerance(t));
            }
        }
        Ok(())
    }
}

/// Counters describing what happened to every start.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingDiagnostics {
    pub starts: usize,
    pub converged: usize,
    pub rejected_separation: usize,
    pub rejected_difference: usize,
    pub duplicates: usize,
}

/// Points on one sphere, all members of the sampled set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleCloud {
    pub variables: Vec<String>,
    pub points: Vec<Vec<f64>>,
    pub radius: f64,
    pub residuals: Vec<f64>,
    pub seed: u64,
    pub tol: f64,
    pub sep_tol: f64,
    pub diagnostics: SamplingDiagnostics,
}

impl SampleCloud {
    pub fn empty(variables: Vec<String>, radius: f64, seed: u64, cfg: &SamplerConfig) -> Self {
        SampleCloud {
            variables,
            points: Vec::new(),
            radius,
            residuals: Vec::new(),
            seed,
            tol: cfg.tol,
            sep_tol: cfg.sep_tol,
            diagnostics: SamplingDiagnostics::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Per-start generator: stream `index` of a ChaCha8 keyed by `seed`, so
/// results do not depend on scheduling.
pub(crate) fn start_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub(crate) fn random_unit(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let nrm = norm(&v);
        if nrm > 1e-8 {
            return v.into_iter().map(|a| a / nrm).collect();
        }
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

enum Outcome {
    Failed,
    Separation,
    Difference,
    Point(Vec<f64>, f64),
}

/// Samples `set ∖ reject` on the sphere of radius `radius`.
pub(crate) fn sample_compiled(
    vars: Vec<String>,
    pieces: &[CompiledPiece],
    reject: Option<&CompiledSet>,
    radius: f64,
    count: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> SampleCloud {
    let n = vars.len();
    let mut cloud = SampleCloud::empty(vars, radius, seed, cfg);
    if pieces.is_empty() || count == 0 {
        return cloud;
    }
    let systems: Vec<System> = pieces
        .iter()
        .map(|p| {
            System::new(n)
                .with_polys(p.equations.iter().cloned(), radius)
                .with_sphere(vec![0.0; n], radius)
        })
        .collect();
    let ncfg = cfg.newton();
    let max_starts = cfg.starts_per_point.max(1) * count;
    let dedup = radius * cfg.dedup_factor;
    let mut next = 0usize;
    while cloud.points.len() < count && next < max_starts {
        let end = (next + cfg.batch.max(1)).min(max_starts);
        let outcomes: Vec<Outcome> = (next..end)
            .into_par_iter()
            .map(|idx| {
                let mut rng = start_rng(seed, idx as u64);
                let k = idx % pieces.len();
                let x0: Vec<f64> = random_unit(&mut rng, n).iter().map(|a| a * radius).collect();
                let sol = newton::solve(&systems[k], &x0, &ncfg);
                let piece = &pieces[k];
                let res = piece.residual(&sol.x);
                if !(res <= cfg.tol) || (norm(&sol.x) - radius).abs() > cfg.tol * radius.max(1e-300)
                {
                    return Outcome::Failed;
                }
                if !(piece.separation(&sol.x) > cfg.sep_tol) {
                    return Outcome::Separation;
                }
                if reject.is_some_and(|b| b.contains(&sol.x, cfg.reject_tol)) {
                    return Outcome::Difference;
                }
                Outcome::Point(sol.x, res)
            })
            .collect();
        cloud.diagnostics.starts += end - next;
        next = end;
        for o in outcomes {
            match o {
                Outcome::Failed => {}
                Outcome::Separation => {
                    cloud.diagnostics.converged += 1;
                    cloud.diagnostics.rejected_separation += 1;
                }
                Outcome::Difference => {
                    cloud.diagnostics.converged += 1;
                    cloud.diagnostics.rejected_difference += 1;
                }
                Outcome::Point(x, res) => {
                    cloud.diagnostics.converged += 1;
                    if cloud.points.len() >= count {
                        continue;
                    }
                    if cloud.points.iter().any(|p| dist(p, &x) < dedup) {
                        cloud.diagnostics.duplicates += 1;
                        continue;
                    }
                    cloud.points.push(x);
                    cloud.residuals.push(res);
                }
            }
        }
    }
    cloud
}

fn check_radius(radius: f64, count: usize) -> Result<()> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Input(format!("radius must be positive, got {radius}")));
    }
    if count == 0 {
        return Err(Error::Input("count must be at least 1".into()));
    }
    Ok(())
}

/// Seeded sample of `s` on the sphere `‖x‖ = radius`.
///
/// Fails with `NoConvergence` when no start converges onto the set at all.
pub fn sample_on_sphere(
    s: &ConstructibleSet,
    radius: f64,
    count: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<SampleCloud> {
    check_radius(radius, count)?;
    cfg.validate()?;
    let cloud = sample_compiled(
        s.vars().names().to_vec(),
        &s.compile(),
        None,
        radius,
        count,
        seed,
        cfg,
    );
    if cloud.is_empty() {
        return Err(Error::NoConvergence(format!(
            "no point of the set found at radius {radius} after {} starts ({} converged)",
            cloud.diagnostics.starts, cloud.diagnostics.converged
        )));
    }
    Ok(cloud)
}

/// Samples `a`, dropping points that are members of `b` at `reject_tol`.
///
/// Fails only when `a` itself yields nothing; a fully rejected sample is an
/// empty cloud.
pub fn set_difference_samples(
    a: &ConstructibleSet,
    b: &ConstructibleSet,
    radius: f64,
    count: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<SampleCloud> {
    check_radius(radius, count)?;
    cfg.validate()?;
    if a.vars() != b.vars() {
        return Err(Error::VariableMismatch("set difference over different spaces".into()));
    }
    let reject = CompiledSet::new(b);
    let cloud = sample_compiled(
        a.vars().names().to_vec(),
        &a.compile(),
        Some(&reject),
        radius,
        count,
        seed,
        cfg,
    );
    if cloud.diagnostics.converged == 0 {
        return Err(Error::NoConvergence(format!(
            "no point of the minuend found at radius {radius}"
        )));
    }
    Ok(cloud)
}

/// Moves a feasible `x` along the tangent space towards `target` while
/// staying on the piece; returns the improved point.
fn tangent_refine(
    sys: &System,
    piece: &CompiledPiece,
    mut x: Vec<f64>,
    target: &[f64],
    cfg: &SamplerConfig,
) -> Vec<f64> {
    let ncfg = cfg.newton();
    let mut d = dist(&x, target);
    for _ in 0..40 {
        let (_, j) = sys.residual_and_jacobian(&x);
        let delta = DVector::from_iterator(x.len(), target.iter().zip(&x).map(|(t, a)| t - a));
        let step = newton::tangent_part(&j, &delta);
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..12 {
            let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let sol = newton::solve(sys, &cand, &ncfg);
            let dc = dist(&sol.x, target);
            if piece.residual(&sol.x) <= cfg.tol && dc < d * (1.0 - 1e-12) {
                x = sol.x;
                improved = d - dc > 1e-13 * d;
                d = dc;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    x
}

/// Multi-start projection of `target` onto compiled pieces; `None` when no
/// start lands on the set.
pub(crate) fn project_compiled(
    pieces: &[CompiledPiece],
    target: &[f64],
    seed: u64,
    cfg: &SamplerConfig,
) -> Option<(Vec<f64>, f64)> {
    let n = target.len();
    if pieces.is_empty() {
        return None;
    }
    let scale = {
        let t = norm(target);
        if t > 0.0 {
            t
        } else {
            1.0
        }
    };
    let systems: Vec<System> = pieces
        .iter()
        .map(|p| System::new(n).with_polys(p.equations.iter().cloned(), scale))
        .collect();
    let ncfg = cfg.newton();
    // a linear piece is hit exactly by one min-norm step from the target
    let linear: Vec<bool> = pieces
        .iter()
        .map(|p| p.equations.iter().all(|e| e.degree() <= 1))
        .collect();
    let starts = cfg.projection_starts.max(1) * pieces.len();
    let best = (0..starts)
        .into_par_iter()
        .filter_map(|idx| {
            let k = idx % pieces.len();
            let round = idx / pieces.len();
            if round > 0 && linear[k] {
                return None;
            }
            let x0: Vec<f64> = if round == 0 {
                target.to_vec()
            } else {
                let mut rng = start_rng(seed, idx as u64);
                let u = random_unit(&mut rng, n);
                let amp = scale * 0.5 * rng.random::<f64>();
                target.iter().zip(&u).map(|(t, a)| t + amp * a).collect()
            };
            let sol = newton::solve(&systems[k], &x0, &ncfg);
            if !(pieces[k].residual(&sol.x) <= cfg.tol) {
                return None;
            }
            let x = tangent_refine(&systems[k], &pieces[k], sol.x, target, cfg);
            if !(pieces[k].separation(&x) > cfg.sep_tol) {
                return None;
            }
            let d = dist(&x, target);
            Some((idx, x, d))
        })
        .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)))?;
    Some((best.1, best.2))
}

/// Best point of `s` found near `target` with its distance (an upper bound
/// on the true distance).
pub fn nearest_point(
    s: &ConstructibleSet,
    target: &[f64],
    cfg: &SamplerConfig,
) -> Result<(Vec<f64>, f64)> {
    if target.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: target.len(),
        });
    }
    if target.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    cfg.validate()?;
    project_compiled(&s.compile(), target, cfg.seed, cfg)
        .ok_or_else(|| Error::NoConvergence("no feasible point found near the target".into()))
}

pub fn nearest_distance(s: &ConstructibleSet, target: &[f64], cfg: &SamplerConfig) -> Result<f64> {
    nearest_point(s, target, cfg).map(|(_, d)| d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::VarList;

    fn xyzw() -> VarList {
        VarList::new(&["x", "y", "z", "w"])
    }

    #[test]
    fn linear_piece_sampling() {
        let s = ConstructibleSet::parse(&xyzw(), &[(vec!["w"], vec![])]).unwrap();
        let c = sample_on_sphere(&s, 0.1, 50, 7, &SamplerConfig::default()).unwrap();
        assert_eq!(c.len(), 50);
        for p in &c.points {
            assert!(p[3].abs() <= 1e-12);
            assert!((norm(p) - 0.1).abs() <= 1e-12);
        }
    }

    #[test]
    fn cone_piece_sampling() {
        let s = ConstructibleSet::parse(&xyzw(), &[(vec!["z^2-x^2-y^2", "w"], vec![])]).unwrap();
        let c = sample_on_sphere(&s, 0.1, 40, 1, &SamplerConfig::default()).unwrap();
        assert!(c.len() >= 30);
        for p in &c.points {
            assert!((p[2] * p[2] - p[0] * p[0] - p[1] * p[1]).abs() <= 1e-10 * 0.01);
        }
    }

    #[test]
    fn empty_set_fails() {
        let v = xyzw();
        let r = sample_on_sphere(&ConstructibleSet::empty(&v), 0.1, 5, 0, &SamplerConfig::default());
        assert!(matches!(r, Err(Error::NoConvergence(_))));
        let unit = ConstructibleSet::parse(&v, &[(vec!["x^2+y^2+z^2+w^2"], vec![])]).unwrap();
        let r = sample_on_sphere(&unit, 0.1, 5, 0, &SamplerConfig::default());
        assert!(matches!(r, Err(Error::NoConvergence(_))));
    }

    #[test]
    fn deterministic_under_seed() {
        let s = ConstructibleSet::parse(&xyzw(), &[(vec!["x*y-z*w"], vec![])]).unwrap();
        let cfg = SamplerConfig::default();
        let a = sample_on_sphere(&s, 0.05, 30, 11, &cfg).unwrap();
        let b = sample_on_sphere(&s, 0.05, 30, 11, &cfg).unwrap();
        assert_eq!(a.points, b.points);
        let c = sample_on_sphere(&s, 0.05, 30, 12, &cfg).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn differences() {
        let v = xyzw();
        let cfg = SamplerConfig::default();
        let a = ConstructibleSet::parse(&v, &[(vec!["w"], vec![])]).unwrap();
        let b = ConstructibleSet::parse(&v, &[(vec!["w", "y"], vec![])]).unwrap();
        let c = set_difference_samples(&a, &b, 0.1, 40, 3, &cfg).unwrap();
        assert_eq!(c.len(), 40);
        assert!(c.points.iter().all(|p| p[1].abs() > cfg.reject_tol * 0.1));
        let same = set_difference_samples(&a, &a, 0.1, 10, 3, &cfg).unwrap();
        assert!(same.is_empty());
    }

    #[test]
    fn nearest_on_linear_and_quadric_sets() {
        let v = xyzw();
        let cfg = SamplerConfig::default();
        let w0 = ConstructibleSet::parse(&v, &[(vec!["w"], vec![])]).unwrap();
        let d = nearest_distance(&w0, &[0.0, 0.0, 0.0, 0.3], &cfg).unwrap();
        assert!((d - 0.3).abs() < 1e-9);
        let uvt = VarList::new(&["u", "v", "t"]);
        let s = ConstructibleSet::parse(&uvt, &[(vec!["t", "v^2-3*u^2"], vec![])]).unwrap();
        let d = nearest_distance(&s, &[1.0, 3f64.sqrt(), 0.0], &cfg).unwrap();
        assert!(d <= 1e-9);
        // off-surface target: distance to the line v = √3 u in t = 0
        let d = nearest_distance(&s, &[1.0, 0.0, 0.5], &cfg).unwrap();
        let expect = (0.25f64 + 0.75).sqrt();
        assert!((d - expect).abs() < 1e-6, "{d} vs {expect}");
    }
}

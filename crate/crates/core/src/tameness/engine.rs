//! Accumulation test: does `closure(A) ∩ T` contain points away from the
//! origin, where `A = M ∖ B` is sampled on spheres and `T` is the target?

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::AnalysisConfig;
use crate::poly::CompiledMap;
use crate::semialg::newton::{self, System};
use crate::semialg::sampler::{dist, norm, project_compiled, random_unit, sample_compiled, start_rng};
use crate::semialg::{CompiledPiece, CompiledSet, ConstructibleSet, SamplerConfig};

/// How far an accumulation point is from the conceded neighbourhood.
#[derive(Clone, Debug)]
pub(crate) enum Exclusion {
    /// `‖y‖`.
    Norm,
    /// `‖y‖` where `F(y)` is normalized-away from zero by the floor, else 0.
    Image(CompiledMap, f64),
}

impl Exclusion {
    pub(crate) fn value(&self, y: &[f64]) -> f64 {
        match self {
            Exclusion::Norm => norm(y),
            Exclusion::Image(f, floor) => {
                if f.max_normalized_abs(y) >= *floor {
                    norm(y)
                } else {
                    0.0
                }
            }
        }
    }
}

pub(crate) struct Problem<'a> {
    /// Set whose difference with `avoid` is sampled.
    pub m: &'a ConstructibleSet,
    pub avoid: &'a ConstructibleSet,
    pub target: &'a ConstructibleSet,
    /// `avoid` and `target` coincide; saves one projection per rung.
    pub avoid_is_target: bool,
    pub exclusion: Exclusion,
}

/// One rung of a descent ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    /// Point of the sampled set.
    pub point: Vec<f64>,
    /// Nearest point of the target set found for `point`.
    pub foot: Vec<f64>,
    /// `‖point − foot‖`.
    pub distance: f64,
    /// Distance moved from the previous rung's point.
    pub step: f64,
}

/// Accumulation point with the ladder of approaching points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    /// Exclusion measure of `point` (its norm, or the norm of its image).
    pub exclusion_value: f64,
    pub ladder: Vec<Rung>,
}

impl Witness {
    pub fn final_distance(&self) -> f64 {
        self.ladder.last().map_or(f64::INFINITY, |r| r.distance)
    }

    pub fn distances_strictly_decrease(&self) -> bool {
        self.ladder.windows(2).all(|w| w[1].distance < w[0].distance)
    }
}

/// How a ladder ended.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LadderOutcome {
    Complete { witness: Witness },
    /// No rung brought the distance to the target below `distance`.
    Stalled { rung: usize, distance: f64 },
    /// The center drifted into the conceded neighbourhood.
    Excluded { rung: usize, exclusion_value: f64 },
    /// Ran out of rungs above the witness tolerance.
    Exhausted { distance: f64 },
}

/// Per-radius evidence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusEvidence {
    pub radius: f64,
    pub samples: usize,
    /// Samples whose projection onto the target failed.
    pub unprojected: usize,
    /// Smallest `dist(a, T) / ‖a‖` over samples.
    pub min_relative_distance: Option<f64>,
    pub margin_holds: bool,
    pub ladders: Vec<LadderOutcome>,
    /// Smallest stall distance when every ladder stalled or left for the
    /// conceded ball.
    pub certified_gap: Option<f64>,
    pub resolved: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineStatus {
    Tame,
    NotTame,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub(crate) struct EngineResult {
    pub status: EngineStatus,
    pub witness: Option<Witness>,
    pub evidence: Vec<RadiusEvidence>,
    pub vacuous: Option<String>,
}

struct Ctx<'a> {
    problem: &'a Problem<'a>,
    m_pieces: Vec<CompiledPiece>,
    target_pieces: Vec<CompiledPiece>,
    avoid_pieces: Vec<CompiledPiece>,
    cfg: &'a AnalysisConfig,
    proj_cfg: SamplerConfig,
}

impl Ctx<'_> {
    fn project(&self, x: &[f64], seed: u64) -> Option<(Vec<f64>, f64)> {
        project_compiled(&self.target_pieces, x, seed, &self.proj_cfg)
    }

    fn avoid_distance(&self, x: &[f64], seed: u64) -> f64 {
        project_compiled(&self.avoid_pieces, x, seed, &self.proj_cfg).map_or(f64::INFINITY, |p| p.1)
    }

    /// A point of `m ∖ avoid` within a bounded step of `x` whose distance to
    /// the target lies in `[off_target_ratio, descent_ratio] * d`.
    fn rung(&self, x: &[f64], foot: &[f64], d: f64, seed: u64) -> Option<(Vec<f64>, Vec<f64>, f64, f64)> {
        let n = x.len();
        let p = &self.cfg.tameness;
        let down: Vec<f64> = {
            let v: Vec<f64> = foot.iter().zip(x).map(|(a, b)| a - b).collect();
            let l = norm(&v);
            if l > 0.0 {
                v.into_iter().map(|c| c / l).collect()
            } else {
                random_unit(&mut start_rng(seed, u64::MAX), n)
            }
        };
        let ncfg = self.cfg.sampler.newton();
        let tol = self.cfg.sampler.tol;
        let scale = norm(x);
        let pieces = self.m_pieces.len();
        // descent direction along each piece through `x`
        let heads: Vec<Vec<f64>> = self
            .m_pieces
            .iter()
            .map(|piece| {
                if !(piece.residual(x) <= 100.0 * tol) {
                    return down.clone();
                }
                let sys = System::new(n).with_polys(piece.equations.iter().cloned(), scale);
                let (_, j) = sys.residual_and_jacobian(x);
                let t = newton::tangent_part(&j, &DVector::from_column_slice(&down));
                let l = t.norm();
                if l > 1e-9 {
                    t.iter().map(|c| c / l).collect()
                } else {
                    down.clone()
                }
            })
            .collect();
        for (fi, &factor) in p.step_factors.iter().enumerate() {
            let s = factor * d;
            for idx in 0..p.rung_starts.max(1) * pieces {
                let k = idx % pieces;
                let attempt = (idx / pieces) as u64;
                let u: Vec<f64> = if attempt == 0 {
                    heads[k].clone()
                } else if attempt == 1 {
                    down.clone()
                } else {
                    let mut rng = start_rng(seed ^ ((fi as u64) << 32), idx as u64);
                    let g = random_unit(&mut rng, n);
                    let v: Vec<f64> = heads[k].iter().zip(&g).map(|(a, b)| a + 0.7 * b).collect();
                    let l = norm(&v);
                    v.into_iter().map(|c| c / l).collect()
                };
                let x0: Vec<f64> = x.iter().zip(&u).map(|(c, a)| c + s * a).collect();
                let sys = System::new(n)
                    .with_polys(self.m_pieces[k].equations.iter().cloned(), scale)
                    .with_sphere(x.to_vec(), s);
                let sol = newton::solve(&sys, &x0, &ncfg);
                let piece = &self.m_pieces[k];
                if !(piece.residual(&sol.x) <= tol)
                    || !(piece.separation(&sol.x) > self.cfg.sampler.sep_tol)
                    || (dist(&sol.x, x) - s).abs() > 1e-6 * s
                {
                    continue;
                }
                let Some((y, dn)) = self.project(&sol.x, seed ^ ((idx as u64) << 20) ^ fi as u64) else {
                    continue;
                };
                if dn > p.descent_ratio * d || dn < p.off_target_ratio * d {
                    continue;
                }
                if !self.problem.avoid_is_target
                    && self.avoid_distance(&sol.x, seed ^ 0x5a5a ^ idx as u64) < p.off_target_ratio * dn
                {
                    continue;
                }
                return Some((sol.x, y, dn, s));
            }
        }
        None
    }

    fn ladder(&self, a: &[f64], y0: &[f64], d0: f64, seed: u64) -> LadderOutcome {
        let p = &self.cfg.tameness;
        let mut x = a.to_vec();
        let mut foot = y0.to_vec();
        let mut d = d0;
        let mut rungs = Vec::new();
        for j in 0..p.max_rungs {
            let Some((xn, yn, dn, step)) = self.rung(&x, &foot, d, seed.wrapping_add(j as u64 * 7919))
            else {
                return LadderOutcome::Stalled { rung: j, distance: d };
            };
            let e = self.problem.exclusion.value(&yn);
            if e < p.exclusion_radius {
                return LadderOutcome::Excluded {
                    rung: j,
                    exclusion_value: e,
                };
            }
            rungs.push(Rung {
                point: xn.clone(),
                foot: yn.clone(),
                distance: dn,
                step,
            });
            x = xn;
            foot = yn;
            d = dn;
            if d <= p.witness_tol {
                let exclusion_value = self.problem.exclusion.value(&foot);
                return LadderOutcome::Complete {
                    witness: Witness {
                        point: foot,
                        exclusion_value,
                        ladder: rungs,
                    },
                };
            }
        }
        LadderOutcome::Exhausted { distance: d }
    }

    fn radius(&self, ri: usize, r: f64) -> RadiusEvidence {
        let cfg = self.cfg;
        let p = &cfg.tameness;
        let avoid = CompiledSet {
            pieces: self.avoid_pieces.clone(),
        };
        let cloud = sample_compiled(
            self.problem.m.vars().names().to_vec(),
            &self.m_pieces,
            Some(&avoid),
            r,
            cfg.points_per_radius,
            cfg.stream(0x100 + ri as u64),
            &cfg.sampler,
        );
        let proj_seed = cfg.stream(0x200 + ri as u64);
        let projected: Vec<Option<(Vec<f64>, f64)>> = cloud
            .points
            .par_iter()
            .enumerate()
            .map(|(i, a)| self.project(a, proj_seed.wrapping_add(i as u64)))
            .collect();
        let mut unprojected = 0;
        let mut cands: Vec<(f64, usize, Vec<f64>, f64)> = Vec::new();
        let mut min_rel: Option<f64> = None;
        for (i, (a, pr)) in cloud.points.iter().zip(&projected).enumerate() {
            match pr {
                None => unprojected += 1,
                Some((y, d)) => {
                    let rel = d / norm(a);
                    min_rel = Some(min_rel.map_or(rel, |m: f64| m.min(rel)));
                    if self.problem.exclusion.value(y) >= p.exclusion_radius {
                        cands.push((rel, i, y.clone(), *d));
                    }
                }
            }
        }
        let margin_holds = min_rel.is_none_or(|m| m >= p.margin);
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        cands.truncate(p.candidates_per_radius);
        let ladder_seed = cfg.stream(0x300 + ri as u64);
        let ladders: Vec<LadderOutcome> = cands
            .par_iter()
            .map(|(_, i, y, d)| {
                self.ladder(&cloud.points[*i], y, *d, ladder_seed.wrapping_add(*i as u64 * 104729))
            })
            .collect();
        let all_stalled_gap = !ladders.is_empty()
            && ladders.iter().all(|l| match l {
                LadderOutcome::Stalled { distance, .. } => *distance >= p.gap_floor,
                LadderOutcome::Excluded { .. } => true,
                _ => false,
            })
            && ladders
                .iter()
                .any(|l| matches!(l, LadderOutcome::Stalled { .. }));
        let all_excluded = !ladders.is_empty()
            && ladders
                .iter()
                .all(|l| matches!(l, LadderOutcome::Excluded { .. }));
        let certified_gap = all_stalled_gap.then(|| {
            ladders
                .iter()
                .filter_map(|l| match l {
                    LadderOutcome::Stalled { distance, .. } => Some(*distance),
                    _ => None,
                })
                .fold(f64::INFINITY, f64::min)
        });
        let any_complete = ladders
            .iter()
            .any(|l| matches!(l, LadderOutcome::Complete { .. }));
        RadiusEvidence {
            radius: r,
            samples: cloud.points.len(),
            unprojected,
            min_relative_distance: min_rel,
            margin_holds,
            resolved: !any_complete
                && unprojected == 0
                && (margin_holds || all_stalled_gap || all_excluded),
            ladders,
            certified_gap,
        }
    }
}

pub(crate) fn run(problem: &Problem<'_>, cfg: &AnalysisConfig) -> EngineResult {
    let mut proj_cfg = cfg.sampler.clone();
    proj_cfg.projection_starts = proj_cfg.projection_starts.min(8);
    let ctx = Ctx {
        problem,
        m_pieces: problem.m.compile(),
        target_pieces: problem.target.compile(),
        avoid_pieces: problem.avoid.compile(),
        cfg,
        proj_cfg,
    };

    // an empty target away from the origin makes the condition vacuous
    let target_seen = cfg.radii.iter().enumerate().any(|(ri, &r)| {
        !sample_compiled(
            problem.target.vars().names().to_vec(),
            &ctx.target_pieces,
            None,
            r,
            4,
            cfg.stream(0x400 + ri as u64),
            &cfg.sampler,
        )
        .is_empty()
    });
    if !target_seen {
        return EngineResult {
            status: EngineStatus::Tame,
            witness: None,
            evidence: Vec::new(),
            vacuous: Some("target set has no points on the probed spheres".into()),
        };
    }

    let mut evidence = Vec::new();
    for (ri, &r) in cfg.radii.iter().enumerate() {
        let ev = ctx.radius(ri, r);
        let witness = ev.ladders.iter().find_map(|l| match l {
            LadderOutcome::Complete { witness } => Some(witness.clone()),
            _ => None,
        });
        evidence.push(ev);
        if let Some(w) = witness {
            return EngineResult {
                status: EngineStatus::NotTame,
                witness: Some(w),
                evidence,
                vacuous: None,
            };
        }
    }
    if evidence.iter().all(|e| e.samples == 0) {
        return EngineResult {
            status: EngineStatus::Tame,
            witness: None,
            evidence,
            vacuous: Some("sampled set has no points on the probed spheres".into()),
        };
    }
    let status = if evidence.iter().all(|e| e.resolved) {
        EngineStatus::Tame
    } else {
        EngineStatus::Inconclusive
    };
    EngineResult {
        status,
        witness: None,
        evidence,
        vacuous: None,
    }
}


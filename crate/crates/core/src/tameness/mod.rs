//! Tameness of a germ, `closure(M(F) ∖ V_F) ∩ V_F ⊆ {0}`, tested in the
//! equivalent form with `Sing F` in place of `V_F`, and tameness of a
//! composite through the image condition on `F(M(H) ∖ Sing H)`.

mod engine;

pub use engine::{LadderOutcome, RadiusEvidence, Rung, Witness};

use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::composite::{
    disc_evidence, image_cloud, milnor_set, preimage, sing_set, zero_set, CheckResult, CheckStatus,
    Composite, DiscVerdict, ImageSummary,
};
use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::minors::{singular_set_ideal, Rho};
use crate::poly::{rational_to_f64, PolyMap, Polynomial, Rational};
use crate::semialg::newton::{self, System};
use crate::semialg::sampler::{random_unit, start_rng};
use crate::semialg::{CompiledSet, ConstructibleSet};
use engine::{EngineStatus, Exclusion, Problem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TameStatus {
    Tame,
    NotTame,
    Inconclusive,
}

impl TameStatus {
    pub fn is_definite(self) -> bool {
        self != TameStatus::Inconclusive
    }
}

impl From<EngineStatus> for TameStatus {
    fn from(s: EngineStatus) -> Self {
        match s {
            EngineStatus::Tame => TameStatus::Tame,
            EngineStatus::NotTame => TameStatus::NotTame,
            EngineStatus::Inconclusive => TameStatus::Inconclusive,
        }
    }
}

/// How a verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictMethod {
    /// Accumulation of `M ∖ Sing` on `Sing` in the source of the map.
    Direct,
    /// Accumulation of `F(M(H) ∖ Sing H)` on `Sing G`, pulled back to the
    /// source of `F`.
    CompositeCondition,
}

/// Direct verdict on `H` recorded next to a composite verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub direct_status: TameStatus,
    /// False only when both statuses are definite and differ.
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TamenessVerdict {
    pub status: TameStatus,
    pub method: VerdictMethod,
    /// Components of the map the verdict is about.
    pub map: Vec<String>,
    pub rho: String,
    pub witness: Option<Witness>,
    pub evidence: Vec<RadiusEvidence>,
    /// Set when the verdict is Tame because a tested set is empty.
    pub vacuous: Option<String>,
    pub cross_check: Option<CrossCheck>,
    pub image_cloud: Option<ImageSummary>,
    pub config: AnalysisConfig,
}

impl TamenessVerdict {
    /// Violations of the verdict's own invariants, read off the record alone.
    pub fn invariant_violations(&self) -> Vec<String> {
        let p = &self.config.tameness;
        let mut out = Vec::new();
        match self.status {
            TameStatus::NotTame => match &self.witness {
                None => out.push("NotTame without a witness".into()),
                Some(w) => {
                    if w.ladder.is_empty() {
                        out.push("witness ladder is empty".into());
                    }
                    if !w.distances_strictly_decrease() {
                        out.push("witness ladder distances do not strictly decrease".into());
                    }
                    if !(w.final_distance() <= p.witness_tol) {
                        out.push(format!(
                            "final ladder distance {} exceeds witness_tol {}",
                            w.final_distance(),
                            p.witness_tol
                        ));
                    }
                    let norm = w.point.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if !(norm >= p.exclusion_radius) {
                        out.push(format!("accumulation point norm {norm} is below exclusion_radius"));
                    }
                }
            },
            TameStatus::Tame => {
                if self.witness.is_some() {
                    out.push("Tame with a witness".into());
                }
                if self.vacuous.is_none() {
                    if self.evidence.is_empty() {
                        out.push("Tame without evidence".into());
                    }
                    for e in &self.evidence {
                        let gap = e.certified_gap.is_some_and(|g| g >= p.gap_floor)
                            || (!e.ladders.is_empty()
                                && e.ladders
                                    .iter()
                                    .all(|l| matches!(l, LadderOutcome::Excluded { .. })));
                        if e.unprojected > 0 || !(e.margin_holds || gap) {
                            out.push(format!("radius {} is not resolved by its evidence", e.radius));
                        }
                        if e.margin_holds
                            && e.min_relative_distance.is_some_and(|d| d < p.margin)
                        {
                            out.push(format!("radius {} claims a margin it does not have", e.radius));
                        }
                        if e
                            .ladders
                            .iter()
                            .any(|l| matches!(l, LadderOutcome::Complete { .. }))
                        {
                            out.push(format!("radius {} has a complete ladder", e.radius));
                        }
                    }
                }
            }
            TameStatus::Inconclusive => {
                if self.witness.is_some() {
                    out.push("Inconclusive with a witness".into());
                }
            }
        }
        if let Some(c) = &self.cross_check {
            if !c.agrees {
                out.push(format!(
                    "direct verdict {:?} disagrees with the composite verdict {:?}",
                    c.direct_status, self.status
                ));
            }
        }
        out
    }
}

/// Tameness of `f` with respect to `rho`.
pub fn check_tame(f: &PolyMap, rho: &Rho, cfg: &AnalysisConfig) -> Result<TamenessVerdict> {
    cfg.validate()?;
    let m = milnor_set(f, rho)?;
    let sing = sing_set(f);
    let r = engine::run(
        &Problem {
            m: &m,
            avoid: &sing,
            target: &sing,
            avoid_is_target: true,
            exclusion: Exclusion::Norm,
        },
        cfg,
    );
    Ok(TamenessVerdict {
        status: r.status.into(),
        method: VerdictMethod::Direct,
        map: f.to_strings(),
        rho: rho.poly().to_string(),
        witness: r.witness,
        evidence: r.evidence,
        vacuous: r.vacuous,
        cross_check: None,
        image_cloud: None,
        config: cfg.clone(),
    })
}

/// Fails unless `F` is tame with an isolated critical value and `0 ∈ Sing G`.
fn composite_preconditions(f: &PolyMap, g: &PolyMap, cfg: &AnalysisConfig) -> Result<()> {
    if f.target_dim() != g.source_dim() {
        return Err(Error::DimensionMismatch {
            expected: g.source_dim(),
            found: f.target_dim(),
        });
    }
    let zero = vec![Rational::zero(); g.source_dim()];
    if !singular_set_ideal(g).vanishes_exact(&zero)? {
        return Err(Error::PreconditionNotMet(
            "the origin is not a singular point of G".into(),
        ));
    }
    let d = disc_evidence(f, cfg);
    if d.verdict != DiscVerdict::OriginOnly {
        return Err(Error::PreconditionNotMet(format!(
            "F does not have an isolated critical value at the origin (discriminant evidence: {:?})",
            d.verdict
        )));
    }
    let tf = check_tame(f, &Rho::euclidean(f.source()), cfg)?;
    if tf.status != TameStatus::Tame {
        return Err(Error::PreconditionNotMet(format!(
            "F is not tame (status {:?})",
            tf.status
        )));
    }
    Ok(())
}

/// Tameness of `H = G ∘ F` through the image condition
/// `closure(F(M(H) ∖ Sing H)) ∩ Sing G ⊆ {0}`.
///
/// The condition is tested in the source of `F`: samples of
/// `M(H) ∖ Sing H` may not accumulate on `F⁻¹(Sing G)` at points whose
/// image stays away from zero.
pub fn check_composite_condition(
    f: &PolyMap,
    g: &PolyMap,
    cfg: &AnalysisConfig,
) -> Result<TamenessVerdict> {
    cfg.validate()?;
    composite_preconditions(f, g, cfg)?;
    let c = Composite::new(f, g)?;
    let rho = Rho::euclidean(f.source());
    let mh = milnor_set(&c.h, &rho)?;
    let sh = sing_set(&c.h);
    let target = preimage(f, &sing_set(g))?;
    let r = engine::run(
        &Problem {
            m: &mh,
            avoid: &sh,
            target: &target,
            avoid_is_target: false,
            exclusion: Exclusion::Image(f.compile(), cfg.tameness.image_floor),
        },
        cfg,
    );
    let status: TameStatus = r.status.into();
    let img = image_cloud(f, Some(g.source()), &mh, &sh, cfg)?;
    let direct = check_tame(&c.h, &rho, cfg)?.status;
    let agrees = !(status.is_definite() && direct.is_definite() && status != direct);
    Ok(TamenessVerdict {
        status,
        method: VerdictMethod::CompositeCondition,
        map: c.h.to_strings(),
        rho: rho.poly().to_string(),
        witness: r.witness,
        evidence: r.evidence,
        vacuous: r.vacuous,
        cross_check: Some(CrossCheck {
            direct_status: direct,
            agrees,
        }),
        image_cloud: Some(ImageSummary {
            variables: img.variables,
            count: img.points.len(),
            points: img.points,
        }),
        config: cfg.clone(),
    })
}

/// Result of the sufficient condition `F(M(H)) ⊆ M(G)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SufficientInclusion {
    /// Samples of `M(H)` pushed into `M(G)`.
    pub inclusion: CheckResult,
    /// Samples of `M(G)` lifted to `M(H)`; run only when the inclusion holds.
    pub reverse: Option<CheckResult>,
    pub g_status: Option<TameStatus>,
    /// Tameness of `H` implied by the inclusion and the status of `G`.
    pub implied_h_status: Option<TameStatus>,
    /// Both directions hold, so `H` is tame exactly when `G` is.
    pub equivalence: bool,
}

/// Solves `F(x) = z` inside `M(H)`; returns whether a solution was found.
fn lift_into(f: &PolyMap, mh: &ConstructibleSet, z: &[f64], seed: u64, cfg: &AnalysisConfig) -> bool {
    let n = f.source_dim();
    let zr: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    let shifted: Vec<Polynomial> = f
        .components()
        .iter()
        .zip(z)
        .map(|(c, &v)| {
            let q = Rational::from_float(v).unwrap_or_else(Rational::zero);
            c - &Polynomial::constant(f.source(), q)
        })
        .collect();
    let shifted: Vec<_> = shifted.iter().map(Polynomial::compile).collect();
    let ncfg = cfg.sampler.newton();
    let mut rng = start_rng(seed, 0);
    for piece in mh.compile() {
        for attempt in 0..cfg.sampler.projection_starts {
            let scale = zr.max(1e-12).powf(1.0 / (1 + attempt % 3) as f64);
            let x0: Vec<f64> = random_unit(&mut rng, n).into_iter().map(|v| v * scale).collect();
            let sys = System::new(n)
                .with_polys(shifted.iter().cloned(), zr.max(1e-12))
                .with_polys(piece.equations.iter().cloned(), scale);
            let sol = newton::solve(&sys, &x0, &ncfg);
            let fit = shifted
                .iter()
                .map(|p| p.eval(&sol.x).abs())
                .fold(0.0, f64::max);
            if fit <= cfg.membership_tol * zr.max(1e-300)
                && piece.residual(&sol.x) <= cfg.membership_tol
                && piece.separation(&sol.x) > cfg.membership_tol
            {
                return true;
            }
        }
    }
    false
}

/// Sufficient condition for tameness of `H`: `F(M(H)) ⊆ M(G)` with `G`
/// tame. When the reverse inclusion also holds, `H` is tame exactly when
/// `G` is.
pub fn check_sufficient_inclusion(
    f: &PolyMap,
    g: &PolyMap,
    cfg: &AnalysisConfig,
) -> Result<SufficientInclusion> {
    cfg.validate()?;
    if f.target_dim() != g.source_dim() {
        return Err(Error::DimensionMismatch {
            expected: g.source_dim(),
            found: f.target_dim(),
        });
    }
    if disc_evidence(f, cfg).verdict != DiscVerdict::OriginOnly {
        return Err(Error::PreconditionNotMet(
            "F does not have an isolated critical value at the origin".into(),
        ));
    }
    let tf = check_tame(f, &Rho::euclidean(f.source()), cfg)?;
    if tf.status != TameStatus::Tame {
        return Err(Error::PreconditionNotMet(format!("F is not tame (status {:?})", tf.status)));
    }
    let c = Composite::new(f, g)?;
    let mh = milnor_set(&c.h, &Rho::euclidean(f.source()))?;
    let mg = CompiledSet::new(&milnor_set(g, &Rho::euclidean(g.source()))?);
    let fm = f.compile();
    let tol = cfg.membership_tol;

    let mut inclusion = CheckResult {
        name: "image_of_milnor_set_inclusion".into(),
        status: CheckStatus::Vacuous,
        witness: None,
        radii: cfg.radii.clone(),
        points_checked: 0,
        detail: "F(M(H)) inside M(G)".into(),
    };
    for cloud in crate::composite::ladder_clouds(&mh, None, cfg, 0x5a1) {
        for x in &cloud.points {
            inclusion.points_checked += 1;
            if mg.contains(&fm.eval(x), tol) {
                if inclusion.status == CheckStatus::Vacuous {
                    inclusion.status = CheckStatus::Holds;
                }
            } else if inclusion.status != CheckStatus::Fails {
                inclusion.status = CheckStatus::Fails;
                inclusion.witness = Some(x.clone());
            }
        }
    }
    if inclusion.status == CheckStatus::Fails {
        return Ok(SufficientInclusion {
            inclusion,
            reverse: None,
            g_status: None,
            implied_h_status: None,
            equivalence: false,
        });
    }

    let mut reverse = CheckResult {
        name: "milnor_set_lifts".into(),
        status: CheckStatus::Vacuous,
        witness: None,
        radii: cfg.radii.clone(),
        points_checked: 0,
        detail: "M(G) inside F(M(H))".into(),
    };
    let mg_set = milnor_set(g, &Rho::euclidean(g.source()))?;
    let seed = cfg.stream(0x5a2);
    for cloud in crate::composite::ladder_clouds(&mg_set, None, cfg, 0x5a3) {
        for (i, z) in cloud.points.iter().enumerate() {
            reverse.points_checked += 1;
            let ok = lift_into(f, &mh, z, seed.wrapping_add(i as u64), cfg);
            if ok {
                if reverse.status == CheckStatus::Vacuous {
                    reverse.status = CheckStatus::Holds;
                }
            } else if reverse.status != CheckStatus::Fails {
                reverse.status = CheckStatus::Fails;
                reverse.witness = Some(z.clone());
            }
        }
    }
    let g_status = check_tame(g, &Rho::euclidean(g.source()), cfg)?.status;
    let equivalence = reverse.status == CheckStatus::Holds && inclusion.status == CheckStatus::Holds;
    let implied = match g_status {
        TameStatus::Tame => Some(TameStatus::Tame),
        TameStatus::NotTame if equivalence => Some(TameStatus::NotTame),
        _ => None,
    };
    Ok(SufficientInclusion {
        inclusion,
        reverse: Some(reverse),
        g_status: Some(g_status),
        implied_h_status: implied,
        equivalence,
    })
}

/// Evidence for `Sing F ∩ V_F ⊆ {0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IcisVerdict {
    /// `None` when the evidence is too thin to decide.
    pub icis: Option<bool>,
    pub exact: bool,
    pub witness: Option<Vec<f64>>,
    pub samples: usize,
    pub detail: String,
}

/// Isolated critical point of `f` restricted to its zero set.
pub fn check_icis(f: &PolyMap, cfg: &AnalysisConfig) -> IcisVerdict {
    let vars = f.source();
    let n = vars.len();
    let sing = singular_set_ideal(f);
    if sing.zero_set_within_origin() {
        return IcisVerdict {
            icis: Some(true),
            exact: true,
            witness: None,
            samples: 0,
            detail: "Sing F is contained in {0}".into(),
        };
    }
    let (axes, _) = sing.coordinate_factors();
    for &i in &axes {
        let subs: Vec<Polynomial> = (0..n)
            .map(|j| {
                if j == i {
                    Polynomial::zero(vars)
                } else {
                    Polynomial::coordinate(vars, j)
                }
            })
            .collect();
        let restricted: Result<Vec<Polynomial>> =
            f.components().iter().map(|c| c.substitute(&subs)).collect();
        if restricted.is_ok_and(|r| r.iter().all(Polynomial::is_zero)) {
            let mut rng = start_rng(cfg.stream(0x1c15), i as u64);
            let p: Vec<Rational> = (0..n)
                .map(|j| {
                    if j == i {
                        Rational::zero()
                    } else {
                        Rational::new(rng.random_range(1i64..=9).into(), 100.into())
                    }
                })
                .collect();
            return IcisVerdict {
                icis: Some(false),
                exact: true,
                witness: Some(p.iter().map(rational_to_f64).collect()),
                samples: 0,
                detail: format!(
                    "F vanishes on the hyperplane {{{} = 0}} inside Sing F",
                    vars.names()[i]
                ),
            };
        }
    }
    let mut eqs = f.components().to_vec();
    eqs.extend(sing.generators().iter().cloned());
    let meet = ConstructibleSet::variety(vars, eqs);
    let zs = CompiledSet::new(&zero_set(f));
    let mut samples = 0;
    for cloud in crate::composite::ladder_clouds(&meet, None, cfg, 0x1c) {
        samples += cloud.points.len();
        if let Some(x) = cloud.points.iter().find(|x| zs.contains(x, cfg.membership_tol)) {
            return IcisVerdict {
                icis: Some(false),
                exact: false,
                witness: Some(x.clone()),
                samples,
                detail: "sampled point of Sing F ∩ V_F off the origin".into(),
            };
        }
    }
    IcisVerdict {
        icis: None,
        exact: false,
        witness: None,
        samples,
        detail: "no point of Sing F ∩ V_F found on the probed spheres".into(),
    }
}

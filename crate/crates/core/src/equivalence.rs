//! Transfers under left, right and A-equivalence: Milnor-set invariance and
//! tameness with respect to a pulled-back ρ.

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::composite::{
    ladder_clouds, milnor_set, preimage, sets_equal_by_sampling, sing_set, CheckResult, CheckStatus,
};
use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::minors::{det_rational, Rho};
use crate::poly::{CompiledPoly, PolyMap, Polynomial, Rational, VarList};
use crate::semialg::sampler::{norm, random_unit, start_rng};
use crate::semialg::{CompiledSet, ConstructibleSet};
use crate::tameness::{check_tame, TameStatus};

/// Default bound on `‖inverse_jet(forward(x)) − x‖ / ‖x‖²`.
pub const JET_TOL: f64 = 1e-6;
// Dyadic grid used to snap float samples to rationals.
const SNAP_BITS: i32 = 30;
const TAG_JET: u64 = 0xe0_01;
const TAG_POSITIVITY: u64 = 0xe0_02;

/// A diffeomorphism germ with a declared polynomial truncation of its
/// inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffeoPair {
    pub forward: PolyMap,
    pub inverse_jet: PolyMap,
    pub validation_radius: f64,
}

fn linear_part(f: &PolyMap) -> Vec<Vec<Rational>> {
    let m = f.source_dim();
    f.components()
        .iter()
        .map(|c| {
            (0..m)
                .map(|j| {
                    let mut e = vec![0; m];
                    e[j] = 1;
                    c.coefficient(&e)
                })
                .collect()
        })
        .collect()
}

/// Exact inverse of a square rational matrix, `None` when singular.
pub fn invert_rational(a: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, p);
        let inv = m[c][c].recip();
        for v in m[c].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let k = m[r][c].clone();
                for j in 0..2 * n {
                    let d = &k * &m[c][j];
                    m[r][j] = &m[r][j] - &d;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

impl DiffeoPair {
    /// Validates the pair with tolerance [`JET_TOL`].
    pub fn new(forward: PolyMap, inverse_jet: PolyMap, validation_radius: f64) -> Result<Self> {
        let d = DiffeoPair {
            forward,
            inverse_jet,
            validation_radius,
        };
        d.validate(JET_TOL)?;
        Ok(d)
    }

    /// `x ↦ A x` with its exact inverse.
    pub fn linear(vars: &VarList, matrix: &[Vec<Rational>]) -> Result<Self> {
        if matrix.len() != vars.len() {
            return Err(Error::DimensionMismatch {
                expected: vars.len(),
                found: matrix.len(),
            });
        }
        let forward = PolyMap::linear(vars, matrix)?;
        let inv = invert_rational(matrix)
            .ok_or_else(|| Error::PreconditionNotMet("the linear map is singular".into()))?;
        DiffeoPair::new(forward, PolyMap::linear(vars, &inv)?, 1.0)
    }

    pub fn identity(vars: &VarList) -> Self {
        DiffeoPair {
            forward: PolyMap::identity(vars),
            inverse_jet: PolyMap::identity(vars),
            validation_radius: 1.0,
        }
    }

    pub fn vars(&self) -> &VarList {
        self.forward.source()
    }

    pub fn is_linear(&self) -> bool {
        [&self.forward, &self.inverse_jet]
            .iter()
            .all(|f| f.components().iter().all(|c| c.total_degree() <= 1))
    }

    /// Exact `d forward(0)`.
    pub fn derivative_at_origin(&self) -> Vec<Vec<Rational>> {
        linear_part(&self.forward)
    }

    /// Checks every invariant of the pair.
    ///
    /// Exact: `forward` is square and fixes 0, `d forward(0)` is invertible,
    /// and `inverse_jet ∘ forward − id` has no terms of degree ≤ 2. Sampled:
    /// the remainder stays below `jet_tol·‖x‖²` inside the validation ball.
    pub fn validate(&self, jet_tol: f64) -> Result<()> {
        let m = self.forward.source_dim();
        if self.forward.target_dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: self.forward.target_dim(),
            });
        }
        if self.inverse_jet.source() != self.forward.source() || self.inverse_jet.target_dim() != m {
            return Err(Error::VariableMismatch(
                "inverse_jet must map the variables of forward to themselves".into(),
            ));
        }
        if !(jet_tol > 0.0) || !jet_tol.is_finite() {
            return Err(Error::InvalidTolerance(jet_tol));
        }
        if !(self.validation_radius > 0.0) || !self.validation_radius.is_finite() {
            return Err(Error::Input("validation_radius must be positive".into()));
        }
        if det_rational(&self.derivative_at_origin()).is_zero() {
            return Err(Error::PreconditionNotMet(
                "the derivative of the diffeomorphism at 0 is singular".into(),
            ));
        }
        let round_trip = PolyMap::compose(&self.inverse_jet, &self.forward)?;
        for (i, c) in round_trip.components().iter().enumerate() {
            let rem = c - &Polynomial::coordinate(self.vars(), i);
            if rem.terms().any(|(mono, _)| mono.degree() <= 2) {
                return Err(Error::PreconditionNotMet(format!(
                    "inverse_jet does not invert forward to second order in component {}",
                    i + 1
                )));
            }
        }
        let fwd = self.forward.compile();
        let inv = self.inverse_jet.compile();
        for k in 0..64u64 {
            let mut rng = start_rng(TAG_JET, k);
            let r = self.validation_radius * rng.random::<f64>().max(1e-3);
            let x: Vec<f64> = random_unit(&mut rng, m).iter().map(|a| a * r).collect();
            let back = inv.eval(&fwd.eval(&x));
            let err = back.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            // Round-off floor keeps exact linear pairs valid at tiny radii.
            if err > jet_tol * r * r + 1e-12 * r {
                return Err(Error::PreconditionNotMet(format!(
                    "inverse_jet misses by {err:e} at radius {r:e}"
                )));
            }
        }
        Ok(())
    }
}

/// `ρ ∘ forward`, marked as a pullback and checked positive on punctured
/// spheres inside the validation ball.
pub fn pullback_rho(d: &DiffeoPair, rho: &Polynomial) -> Result<Rho> {
    if rho.vars() != d.forward.source() {
        return Err(Error::DimensionMismatch {
            expected: d.forward.target_dim(),
            found: rho.nvars(),
        });
    }
    let poly = rho.substitute(d.forward.components())?;
    let c = CompiledPoly::new(&poly);
    let m = d.forward.source_dim();
    for k in 0..5 {
        let r = d.validation_radius * 0.5f64.powi(k);
        for i in 0..32u64 {
            let mut rng = start_rng(TAG_POSITIVITY ^ k as u64, i);
            let x: Vec<f64> = random_unit(&mut rng, m).iter().map(|a| a * r).collect();
            if !(c.eval(&x) > 0.0) {
                return Err(Error::InvalidRho(format!(
                    "pulled-back rho `{poly}` is not positive at {x:?}"
                )));
            }
        }
    }
    Ok(Rho::pullback_unchecked(poly))
}

/// Statuses of a germ and its transform; definite statuses must agree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TameTransfer {
    pub original: TameStatus,
    pub transformed: TameStatus,
    pub original_witness: Option<Vec<f64>>,
    pub transformed_witness: Option<Vec<f64>>,
    /// Transformed witness carried back into the original source.
    pub transported_witness: Option<Vec<f64>>,
    /// False only when both statuses are definite and differ.
    pub agrees: bool,
}

fn agree(a: TameStatus, b: TameStatus) -> bool {
    !(a.is_definite() && b.is_definite() && a != b)
}

/// Evidence that `M(g ∘ f) = M(f)` and `Sing(g ∘ f) = Sing(f)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeftInvariance {
    pub status: CheckStatus,
    /// The composite is syntactically `f`.
    pub syntactic: bool,
    pub milnor: CheckResult,
    pub sing: CheckResult,
}

fn combine(a: &CheckResult, b: &CheckResult) -> CheckStatus {
    use CheckStatus::*;
    match (a.status, b.status) {
        (Fails, _) | (_, Fails) => Fails,
        (Holds, _) | (_, Holds) => Holds,
        _ => Vacuous,
    }
}

fn left_composite(f: &PolyMap, g: &DiffeoPair) -> Result<PolyMap> {
    if g.forward.source_dim() != f.target_dim() {
        return Err(Error::DimensionMismatch {
            expected: f.target_dim(),
            found: g.forward.source_dim(),
        });
    }
    if det_rational(&g.derivative_at_origin()).is_zero() {
        return Err(Error::PreconditionNotMet("dG(0) is singular".into()));
    }
    PolyMap::compose(&g.forward, f)
}

/// `M(g ∘ f) = M(f)` and `Sing(g ∘ f) = Sing(f)` by bidirectional sampling.
pub fn check_left_invariance(f: &PolyMap, g: &DiffeoPair, cfg: &AnalysisConfig) -> Result<LeftInvariance> {
    cfg.validate()?;
    let h = left_composite(f, g)?;
    let rho = Rho::euclidean(f.source());
    let syntactic = h == *f;
    let milnor = sets_equal_by_sampling("left_milnor_equality", &milnor_set(&h, &rho)?, &milnor_set(f, &rho)?, cfg, 0xe1)?;
    let sing = sets_equal_by_sampling("left_sing_equality", &sing_set(&h), &sing_set(f), cfg, 0xe2)?;
    let status = if syntactic { CheckStatus::Holds } else { combine(&milnor, &sing) };
    Ok(LeftInvariance {
        status,
        syntactic,
        milnor,
        sing,
    })
}

/// Tameness of `f` and `g ∘ f` with respect to `ρ_E`.
pub fn left_tameness_transfer(f: &PolyMap, g: &DiffeoPair, cfg: &AnalysisConfig) -> Result<TameTransfer> {
    let h = left_composite(f, g)?;
    let rho = Rho::euclidean(f.source());
    let a = check_tame(f, &rho, cfg)?;
    let b = check_tame(&h, &rho, cfg)?;
    Ok(TameTransfer {
        original: a.status,
        transformed: b.status,
        original_witness: a.witness.as_ref().map(|w| w.point.clone()),
        transported_witness: b.witness.as_ref().map(|w| w.point.clone()),
        transformed_witness: b.witness.map(|w| w.point),
        agrees: agree(a.status, b.status),
    })
}

/// Exact membership comparison on rational points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactTransfer {
    pub points: usize,
    /// Points lying in both sets.
    pub members: usize,
    pub mismatches: usize,
}

/// Evidence for `M_{ρ∘φ}(g ∘ φ) = φ⁻¹(M_ρ(g))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RightTransfer {
    pub status: CheckStatus,
    pub transformed_map: Vec<String>,
    pub pulled_back_rho: String,
    pub milnor: CheckResult,
    /// Run only for linear diffeomorphisms, whose inverse is exact.
    pub exact: Option<ExactTransfer>,
}

fn snap(v: f64, r: f64) -> Rational {
    if v.abs() < 1e-9 * r {
        return Rational::zero();
    }
    let scaled = (v * 2f64.powi(SNAP_BITS)).round();
    Rational::from_float(scaled).unwrap_or_else(Rational::zero) / Rational::from_float(2f64.powi(SNAP_BITS)).unwrap()
}

/// Pullback of `M_ρ(g)` sampled, snapped to rationals, carried by the exact
/// inverse and compared exactly.
fn exact_transfer(
    g2: &PolyMap,
    rho2: &Rho,
    m1: &ConstructibleSet,
    d: &DiffeoPair,
    cfg: &AnalysisConfig,
) -> Result<ExactTransfer> {
    let m2 = milnor_set(g2, rho2)?;
    let mut out = ExactTransfer {
        points: 0,
        members: 0,
        mismatches: 0,
    };
    let clouds = ladder_clouds(m1, None, cfg, 0xe3);
    for cloud in clouds {
        for y in &cloud.points {
            let r = norm(y).max(f64::MIN_POSITIVE);
            let ys: Vec<Rational> = y.iter().map(|v| snap(*v, r)).collect();
            let x = d.inverse_jet.evaluate_exact(&ys)?;
            let fx = d.forward.evaluate_exact(&x)?;
            let a = m2.member_exact(&x)?;
            let b = m1.member_exact(&fx)?;
            out.points += 1;
            out.members += usize::from(a && b);
            out.mismatches += usize::from(a != b);
        }
    }
    Ok(out)
}

fn right_setup(g1: &PolyMap, d: &DiffeoPair, rho1: &Rho) -> Result<(PolyMap, Rho)> {
    if d.forward.target_dim() != g1.source_dim() {
        return Err(Error::DimensionMismatch {
            expected: g1.source_dim(),
            found: d.forward.target_dim(),
        });
    }
    if d.vars() != g1.source() {
        return Err(Error::VariableMismatch(
            "the diffeomorphism must use the source variables of G".into(),
        ));
    }
    let g2 = PolyMap::compose(g1, &d.forward)?;
    let rho2 = pullback_rho(d, rho1.poly())?;
    Ok((g2, rho2))
}

/// `M_{ρ₂}(g₂) = forward⁻¹(M_{ρ₁}(g₁))` for `g₂ = g₁ ∘ forward` and
/// `ρ₂ = ρ₁ ∘ forward`.
pub fn check_right_transfer(g1: &PolyMap, d: &DiffeoPair, rho1: &Rho, cfg: &AnalysisConfig) -> Result<RightTransfer> {
    cfg.validate()?;
    let (g2, rho2) = right_setup(g1, d, rho1)?;
    let m1 = milnor_set(g1, rho1)?;
    let pulled = preimage(&d.forward, &m1)?;
    let milnor = sets_equal_by_sampling("right_milnor_transfer", &milnor_set(&g2, &rho2)?, &pulled, cfg, 0xe4)?;
    let exact = if d.is_linear() {
        Some(exact_transfer(&g2, &rho2, &m1, d, cfg)?)
    } else {
        None
    };
    let status = if exact.as_ref().is_some_and(|e| e.mismatches > 0) {
        CheckStatus::Fails
    } else {
        milnor.status
    };
    Ok(RightTransfer {
        status,
        transformed_map: g2.to_strings(),
        pulled_back_rho: rho2.poly().to_string(),
        milnor,
        exact,
    })
}

/// Tameness of `g₁` w.r.t. `ρ₁` against `g₁ ∘ forward` w.r.t. the pullback.
/// The transformed witness is pushed through `forward` into `g₁`'s source.
pub fn right_tameness_transfer(g1: &PolyMap, d: &DiffeoPair, rho1: &Rho, cfg: &AnalysisConfig) -> Result<TameTransfer> {
    let (g2, rho2) = right_setup(g1, d, rho1)?;
    let a = check_tame(g1, rho1, cfg)?;
    let b = check_tame(&g2, &rho2, cfg)?;
    let fwd = d.forward.compile();
    Ok(TameTransfer {
        original: a.status,
        transformed: b.status,
        original_witness: a.witness.as_ref().map(|w| w.point.clone()),
        transported_witness: b.witness.as_ref().map(|w| fwd.eval(&w.point)),
        transformed_witness: b.witness.map(|w| w.point),
        agrees: agree(a.status, b.status),
    })
}

/// True when `x` lies on `Sing g` up to the normalized tolerance `tol`.
pub fn on_sing(g: &PolyMap, x: &[f64], tol: f64) -> bool {
    CompiledSet::new(&sing_set(g)).contains(x, tol)
}

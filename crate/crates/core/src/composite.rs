//! The composite picture for `H = G ∘ F`: singular and Milnor sets of all
//! three maps, the inclusion lattice between them, discriminant evidence and
//! image clouds.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::minors::{det_rational, jacobian, milnor_set_ideal, singular_set_ideal, Rho};
use crate::poly::{rational_to_f64, CompiledMap, PolyMap, Polynomial, Rational, VarList};
use crate::semialg::sampler::{nearest_point, norm, sample_compiled, start_rng};
use crate::semialg::{BasicPiece, CompiledSet, ConstructibleSet, PieceText, SampleCloud};

/// Outcome of one lattice check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Holds,
    Fails,
    /// Nothing to check: the sampled sets were empty on every sphere.
    Vacuous,
    PreconditionNotMet,
}

/// A named check with its evidence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    /// Source point violating the relation.
    pub witness: Option<Vec<f64>>,
    pub radii: Vec<f64>,
    pub points_checked: usize,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, radii: &[f64]) -> Self {
        CheckResult {
            name: name.into(),
            status: CheckStatus::Vacuous,
            witness: None,
            radii: radii.to_vec(),
            points_checked: 0,
            detail: String::new(),
        }
    }

    fn precondition(name: &str, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            status: CheckStatus::PreconditionNotMet,
            witness: None,
            radii: Vec::new(),
            points_checked: 0,
            detail,
        }
    }

    /// Folds one more sampled point into the status.
    fn record(&mut self, ok: bool, x: &[f64]) {
        self.points_checked += 1;
        if ok {
            if self.status == CheckStatus::Vacuous {
                self.status = CheckStatus::Holds;
            }
        } else if self.status != CheckStatus::Fails {
            self.status = CheckStatus::Fails;
            self.witness = Some(x.to_vec());
        }
    }
}

/// A composable pair and its composite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Composite {
    pub f: PolyMap,
    pub g: PolyMap,
    pub h: PolyMap,
}

impl Composite {
    pub fn new(f: &PolyMap, g: &PolyMap) -> Result<Self> {
        Ok(Composite {
            h: PolyMap::compose(g, f)?,
            f: f.clone(),
            g: g.clone(),
        })
    }
}

/// Zero set `F⁻¹(0)`.
pub fn zero_set(f: &PolyMap) -> ConstructibleSet {
    ConstructibleSet::variety(f.source(), f.components().to_vec())
}

pub fn sing_set(f: &PolyMap) -> ConstructibleSet {
    singular_set_ideal(f).zero_set()
}

pub fn milnor_set(f: &PolyMap, rho: &Rho) -> Result<ConstructibleSet> {
    Ok(milnor_set_ideal(f, rho)?.zero_set())
}

/// Preimage `F⁻¹(S)` of a set over `F`'s target.
pub fn preimage(f: &PolyMap, s: &ConstructibleSet) -> Result<ConstructibleSet> {
    if s.dim() != f.target_dim() {
        return Err(Error::DimensionMismatch {
            expected: f.target_dim(),
            found: s.dim(),
        });
    }
    let pull = |v: &[Polynomial]| {
        v.iter()
            .map(|p| p.substitute(f.components()))
            .collect::<Result<Vec<_>>>()
    };
    let pieces = s
        .pieces()
        .iter()
        .map(|p| {
            Ok(crate::semialg::BasicPiece::new(
                pull(&p.equations)?,
                pull(&p.inequations)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    ConstructibleSet::new(f.source(), pieces)
}

/// Samples of `s ∖ avoid` on every configured sphere, tagged by `tag`.
pub(crate) fn ladder_clouds(
    s: &ConstructibleSet,
    avoid: Option<&ConstructibleSet>,
    cfg: &AnalysisConfig,
    tag: u64,
) -> Vec<SampleCloud> {
    let pieces = s.compile();
    let avoid = avoid.map(CompiledSet::new);
    cfg.radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            sample_compiled(
                s.vars().names().to_vec(),
                &pieces,
                avoid.as_ref(),
                r,
                cfg.points_per_radius,
                cfg.stream(tag.wrapping_mul(1 << 16) + i as u64),
                &cfg.sampler,
            )
        })
        .collect()
}

/// Samples of `a` must lie in `b` and samples of `b` in `a`.
pub fn sets_equal_by_sampling(
    name: &str,
    a: &ConstructibleSet,
    b: &ConstructibleSet,
    cfg: &AnalysisConfig,
    tag: u64,
) -> Result<CheckResult> {
    if a.vars() != b.vars() {
        return Err(Error::VariableMismatch("compared sets live in different spaces".into()));
    }
    let mut out = CheckResult::new(name, &cfg.radii);
    for (from, to, t) in [(a, b, tag), (b, a, tag ^ 0xb1d1)] {
        let into = CompiledSet::new(to);
        for cloud in ladder_clouds(from, None, cfg, t) {
            for x in &cloud.points {
                out.record(into.contains(x, cfg.membership_tol), x);
            }
        }
    }
    Ok(out)
}

/// Samples of `a ∖ avoid` must lie in `b`.
fn inclusion_by_sampling(
    name: &str,
    a: &ConstructibleSet,
    avoid: Option<&ConstructibleSet>,
    cfg: &AnalysisConfig,
    tag: u64,
    accept: impl Fn(&[f64]) -> bool,
) -> CheckResult {
    let mut out = CheckResult::new(name, &cfg.radii);
    for cloud in ladder_clouds(a, avoid, cfg, tag) {
        for x in &cloud.points {
            out.record(accept(x), x);
        }
    }
    out
}

/// `F(x) ∈ S`, judged in the target or through the pulled-back equations
/// at `x`; the latter stays well scaled where `F(x)` is close to 0.
fn image_in(s: &CompiledSet, pulled: &CompiledSet, fm: &CompiledMap, x: &[f64], tol: f64) -> bool {
    s.contains(&fm.eval(x), tol) || pulled.contains(x, tol)
}

/// Points probed on the segment of a tube test.
const TUBE_STEPS: usize = 16;

/// `x` reaches the nearest point of some piece of `target` along a segment
/// that stays in the tolerance tube of `within`. Near a high-order
/// component a sample of `within` passes the residual test away from the
/// set itself; such a sample is numerically indistinguishable from the
/// target point it connects to.
fn tube_connected(within: &CompiledSet, target: &ConstructibleSet, x: &[f64], tol: f64, cfg: &AnalysisConfig) -> bool {
    let vars = target.vars();
    target.pieces().iter().flat_map(BasicPiece::reduced).any(|piece| {
        let Ok(single) = ConstructibleSet::new(vars, vec![piece]) else {
            return false;
        };
        let Ok((y, _)) = nearest_point(&single, x, &cfg.sampler) else {
            return false;
        };
        (0..=TUBE_STEPS).all(|k| {
            let s = k as f64 / TUBE_STEPS as f64;
            let p: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + s * (b - a)).collect();
            within.contains(&p, tol)
        })
    })
}

/// `Sing H ⊆ Sing F ∪ F⁻¹(Sing G)` on samples of `Sing H`.
///
/// A sample failing the residual test is still accepted when it is tube
/// connected to the right-hand side; the detail counts such samples.
pub fn check_sing_inclusion(f: &PolyMap, g: &PolyMap, cfg: &AnalysisConfig) -> Result<CheckResult> {
    let c = Composite::new(f, g)?;
    let sf = CompiledSet::new(&sing_set(f));
    let sg = CompiledSet::new(&sing_set(g));
    let pulled_set = preimage(f, &sing_set(g))?;
    let pulled = CompiledSet::new(&pulled_set);
    let rhs = sing_set(f).union(&pulled_set)?;
    let sh_set = sing_set(&c.h);
    let sh = CompiledSet::new(&sh_set);
    let fm = f.compile();
    let tol = cfg.membership_tol;
    let tubed = AtomicUsize::new(0);
    let mut r = inclusion_by_sampling("sing_inclusion", &sh_set, None, cfg, 0x51, |x| {
        if sf.contains(x, tol) || image_in(&sg, &pulled, &fm, x, tol) {
            return true;
        }
        let ok = tube_connected(&sh, &rhs, x, tol, cfg);
        tubed.fetch_add(usize::from(ok), Ordering::Relaxed);
        ok
    });
    let tubed = tubed.into_inner();
    if tubed > 0 {
        r.detail = format!("{tubed} samples accepted by tube connection to the right-hand side");
    }
    Ok(r)
}

fn origin_in_sing(g: &PolyMap) -> Result<bool> {
    let zero = vec![Rational::zero(); g.source_dim()];
    singular_set_ideal(g).vanishes_exact(&zero)
}

fn require_disc_origin(f: &PolyMap, cfg: &AnalysisConfig) -> Result<DiscEvidence> {
    let d = disc_evidence(f, cfg);
    if d.verdict != DiscVerdict::OriginOnly {
        return Err(Error::PreconditionNotMet(format!(
            "F does not have an isolated critical value at the origin (discriminant evidence: {:?})",
            d.verdict
        )));
    }
    Ok(d)
}

/// `Sing H = F⁻¹(Sing G)` when `Disc F = {0}` and `0 ∈ Sing G`.
pub fn check_lemma_l0(f: &PolyMap, g: &PolyMap, cfg: &AnalysisConfig) -> Result<CheckResult> {
    let c = Composite::new(f, g)?;
    if !origin_in_sing(g)? {
        return Err(Error::PreconditionNotMet(
            "the origin is not a singular point of G".into(),
        ));
    }
    require_disc_origin(f, cfg)?;
    let pre = preimage(f, &sing_set(g))?;
    let mut r = sets_equal_by_sampling("lemma_sing_preimage", &sing_set(&c.h), &pre, cfg, 0x52)?;
    r.detail = "Sing H compared with the preimage of Sing G".into();
    Ok(r)
}

/// `M(H) ∖ Sing H ⊆ M(F) ∖ V_F` when `Disc F = {0}`.
pub fn check_lemma_l1(f: &PolyMap, g: &PolyMap, cfg: &AnalysisConfig) -> Result<CheckResult> {
    let c = Composite::new(f, g)?;
    require_disc_origin(f, cfg)?;
    let mh = milnor_set(&c.h, &Rho::euclidean(f.source()))?;
    let mf = CompiledSet::new(&milnor_set(f, &Rho::euclidean(f.source()))?);
    let vf = CompiledSet::new(&zero_set(f));
    let tol = cfg.membership_tol;
    Ok(inclusion_by_sampling(
        "lemma_milnor_inclusion",
        &mh,
        Some(&sing_set(&c.h)),
        cfg,
        0x53,
        |x| mf.contains(x, tol) && !vf.contains(x, tol),
    ))
}

/// `M(H) = M(F)` when `G` is a local diffeomorphism at the origin.
pub fn check_prop_p1_equality(f: &PolyMap, g: &PolyMap, cfg: &AnalysisConfig) -> Result<CheckResult> {
    let c = Composite::new(f, g)?;
    if g.source_dim() != g.target_dim() {
        return Err(Error::PreconditionNotMet(format!(
            "G is not equidimensional ({} -> {})",
            g.source_dim(),
            g.target_dim()
        )));
    }
    let zero = vec![Rational::zero(); g.source_dim()];
    if det_rational(&jacobian(g).evaluate_exact(&zero)?).is_zero() {
        return Err(Error::PreconditionNotMet("dG(0) is singular".into()));
    }
    let rho = Rho::euclidean(f.source());
    sets_equal_by_sampling(
        "diffeo_milnor_equality",
        &milnor_set(&c.h, &rho)?,
        &milnor_set(f, &rho)?,
        cfg,
        0x54,
    )
}

/// `V_H = F⁻¹(V_G)`: samples of `V_H` map into `V_G`, and conversely.
pub fn check_zero_set_pullback(f: &PolyMap, g: &PolyMap, cfg: &AnalysisConfig) -> Result<CheckResult> {
    let c = Composite::new(f, g)?;
    let vg = CompiledSet::new(&zero_set(g));
    let vh = CompiledSet::new(&zero_set(&c.h));
    let pulled = CompiledSet::new(&preimage(f, &zero_set(g))?);
    let fm = f.compile();
    let tol = cfg.membership_tol;
    let mut r = inclusion_by_sampling("zero_set_pullback", &zero_set(&c.h), None, cfg, 0x55, |x| {
        image_in(&vg, &pulled, &fm, x, tol)
    });
    let back = inclusion_by_sampling(
        "zero_set_pullback",
        &preimage(f, &zero_set(g))?,
        None,
        cfg,
        0x56,
        |x| vh.contains(x, tol),
    );
    r.points_checked += back.points_checked;
    if r.status != CheckStatus::Fails {
        if back.status == CheckStatus::Fails {
            r.status = CheckStatus::Fails;
            r.witness = back.witness;
        } else if back.status == CheckStatus::Holds {
            r.status = CheckStatus::Holds;
        }
    }
    Ok(r)
}

/// Evidence about `Disc F = {0}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscVerdict {
    OriginOnly,
    NontrivialValue,
    Inconclusive,
}

/// Which kind of evidence settled the verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscMethod {
    /// Exact substitution on coordinate pieces of `Sing F`.
    Exact,
    /// Exact on coordinate pieces; the rest of `Sing F` was sampled.
    ExactPiecesAndSampling,
    Sampling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscEvidence {
    pub verdict: DiscVerdict,
    pub method: DiscMethod,
    /// Point of `Sing F` with `F ≠ 0`.
    pub witness: Option<Vec<f64>>,
    /// Exact form of the witness when found by substitution.
    pub witness_exact: Option<Vec<String>>,
    pub witness_image: Option<Vec<f64>>,
    /// Coordinate hyperplanes contained in `Sing F`.
    pub coordinate_pieces: Vec<String>,
    pub samples: usize,
    pub detail: String,
}

fn restrict_to_hyperplane(f: &PolyMap, i: usize) -> Result<Vec<Polynomial>> {
    let vars = f.source();
    let subs: Vec<Polynomial> = (0..vars.len())
        .map(|j| {
            if j == i {
                Polynomial::zero(vars)
            } else {
                Polynomial::coordinate(vars, j)
            }
        })
        .collect();
    f.components().iter().map(|c| c.substitute(&subs)).collect()
}

/// Small rational point on `{x_i = 0}` where some restricted component is
/// nonzero.
fn rational_witness(restricted: &[Polynomial], n: usize, i: usize, seed: u64) -> Option<Vec<Rational>> {
    let mut rng = start_rng(seed, i as u64);
    for _ in 0..64 {
        let p: Vec<Rational> = (0..n)
            .map(|j| {
                if j == i {
                    Rational::zero()
                } else {
                    let k: i64 = rng.random_range(-9..=9);
                    Rational::new(k.into(), 100.into())
                }
            })
            .collect();
        if restricted
            .iter()
            .any(|c| c.evaluate_exact(&p).is_ok_and(|v| !v.is_zero()))
        {
            return Some(p);
        }
    }
    None
}

/// Evidence for `Disc F = {0}`, i.e. `F` vanishing on `Sing F` near 0.
pub fn disc_evidence(f: &PolyMap, cfg: &AnalysisConfig) -> DiscEvidence {
    let vars = f.source();
    let n = vars.len();
    let sing = singular_set_ideal(f);
    let mut ev = DiscEvidence {
        verdict: DiscVerdict::Inconclusive,
        method: DiscMethod::Exact,
        witness: None,
        witness_exact: None,
        witness_image: None,
        coordinate_pieces: Vec::new(),
        samples: 0,
        detail: String::new(),
    };
    if sing.zero_set_within_origin() {
        ev.verdict = DiscVerdict::OriginOnly;
        ev.detail = "Sing F is contained in {0}".into();
        return ev;
    }
    // a minor nonzero at 0 keeps Sing F off a neighbourhood of 0
    if sing.generators().iter().any(|g| !g.constant_term().is_zero()) {
        ev.verdict = DiscVerdict::OriginOnly;
        ev.detail = "dF(0) has full rank, so Sing F misses a neighbourhood of 0".into();
        return ev;
    }
    let (axes, cofactor) = sing.coordinate_factors();
    for &i in &axes {
        ev.coordinate_pieces.push(format!("{} = 0", vars.names()[i]));
        let Ok(restricted) = restrict_to_hyperplane(f, i) else {
            continue;
        };
        if restricted.iter().all(Polynomial::is_zero) {
            continue;
        }
        if let Some(p) = rational_witness(&restricted, n, i, cfg.stream(0xd15c)) {
            let img = f.evaluate_exact(&p).unwrap_or_default();
            ev.verdict = DiscVerdict::NontrivialValue;
            ev.witness = Some(p.iter().map(rational_to_f64).collect());
            ev.witness_image = Some(img.iter().map(rational_to_f64).collect());
            ev.witness_exact = Some(p.iter().map(|q| q.to_string()).collect());
            ev.detail = format!("F does not vanish on {{{} = 0}} inside Sing F", vars.names()[i]);
            return ev;
        }
    }
    if !axes.is_empty() && cofactor.zero_set_within_origin() {
        ev.verdict = DiscVerdict::OriginOnly;
        ev.detail = "F vanishes identically on every piece of Sing F".into();
        return ev;
    }

    // sample what the exact step could not cover
    let rest = if axes.is_empty() { sing.zero_set() } else { cofactor.zero_set() };
    ev.method = if axes.is_empty() {
        DiscMethod::Sampling
    } else {
        DiscMethod::ExactPiecesAndSampling
    };
    let fm = f.compile();
    let vf = CompiledSet::new(&zero_set(f));
    let mut ambiguous = 0usize;
    for cloud in ladder_clouds(&rest, None, cfg, 0xd1) {
        for x in &cloud.points {
            ev.samples += 1;
            let fx = fm.eval(x);
            let size = norm(&fx);
            if size <= cfg.disc.image_tol * norm(x).powf(cfg.disc.order_floor) {
                continue;
            }
            if size > cfg.disc.image_tol && !vf.contains(x, cfg.membership_tol) {
                ev.verdict = DiscVerdict::NontrivialValue;
                ev.witness = Some(x.clone());
                ev.witness_image = Some(fx);
                ev.detail = "sampled point of Sing F with nonzero image".into();
                return ev;
            }
            ambiguous += 1;
        }
    }
    if ev.samples == 0 {
        if axes.is_empty() {
            ev.detail = "no point of Sing F found on the probed spheres".into();
        } else {
            ev.verdict = DiscVerdict::OriginOnly;
            ev.detail =
                "F vanishes on every coordinate piece; the remainder of Sing F was not found off the origin"
                    .into();
        }
    } else if ambiguous == 0 {
        ev.verdict = DiscVerdict::OriginOnly;
        ev.detail = format!("F vanishes on all {} samples of Sing F", ev.samples);
    } else {
        ev.detail = format!("{ambiguous} samples with small but nonzero image");
    }
    ev
}

/// Push-forward of sampled points through a map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageCloud {
    pub variables: Vec<String>,
    pub points: Vec<Vec<f64>>,
    pub source_points: Vec<Vec<f64>>,
    /// Sphere each source point was drawn from.
    pub source_radii: Vec<f64>,
}

impl ImageCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Cloud of image points for export.
    pub fn as_sample_cloud(&self, seed: u64, cfg: &AnalysisConfig) -> SampleCloud {
        let mut c = SampleCloud::empty(
            self.variables.clone(),
            self.source_radii.first().copied().unwrap_or(0.0),
            seed,
            &cfg.sampler,
        );
        c.points = self.points.clone();
        c.residuals = vec![0.0; self.points.len()];
        c
    }
}

/// `F(A ∖ B)` sampled over the configured spheres; `target_vars` names the
/// image coordinates (defaults to `y1, …, yN`).
pub fn image_cloud(
    f: &PolyMap,
    target_vars: Option<&VarList>,
    a: &ConstructibleSet,
    b: &ConstructibleSet,
    cfg: &AnalysisConfig,
) -> Result<ImageCloud> {
    if a.vars() != f.source() || b.vars() != f.source() {
        return Err(Error::VariableMismatch("sets must live in the source of F".into()));
    }
    let variables = match target_vars {
        Some(v) if v.len() == f.target_dim() => v.names().to_vec(),
        Some(v) => {
            return Err(Error::DimensionMismatch {
                expected: f.target_dim(),
                found: v.len(),
            })
        }
        None => (1..=f.target_dim()).map(|i| format!("y{i}")).collect(),
    };
    let fm: CompiledMap = f.compile();
    let mut out = ImageCloud {
        variables,
        points: Vec::new(),
        source_points: Vec::new(),
        source_radii: Vec::new(),
    };
    for cloud in ladder_clouds(a, Some(b), cfg, 0x1a) {
        for x in cloud.points {
            out.points.push(fm.eval(&x));
            out.source_points.push(x);
            out.source_radii.push(cloud.radius);
        }
    }
    Ok(out)
}

/// Named set with its ambient space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedSet {
    pub space: Vec<String>,
    pub pieces: Vec<PieceText>,
}

impl NamedSet {
    pub fn of(s: &ConstructibleSet) -> Self {
        NamedSet {
            space: s.vars().names().to_vec(),
            pieces: s.to_text(),
        }
    }
}

/// Summary of the image cloud kept in reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageSummary {
    pub variables: Vec<String>,
    pub count: usize,
    pub points: Vec<Vec<f64>>,
}

/// Everything known about a composable pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeReport {
    pub maps: BTreeMap<String, Vec<String>>,
    pub sets: BTreeMap<String, NamedSet>,
    pub lattice_checks: Vec<CheckResult>,
    pub disc_evidence: BTreeMap<String, DiscEvidence>,
    pub image_cloud: ImageSummary,
    pub config: AnalysisConfig,
}

fn as_check(name: &str, r: Result<CheckResult>) -> Result<CheckResult> {
    match r {
        Ok(c) => Ok(c),
        Err(Error::PreconditionNotMet(msg)) => Ok(CheckResult::precondition(name, msg)),
        Err(e) => Err(e),
    }
}

/// Runs every composite check for `F` and `G`.
pub fn analyze(f: &PolyMap, g: &PolyMap, cfg: &AnalysisConfig) -> Result<CompositeReport> {
    cfg.validate()?;
    let c = Composite::new(f, g)?;
    let rho_src = Rho::euclidean(f.source());
    let rho_mid = Rho::euclidean(g.source());
    let mut sets = BTreeMap::new();
    let mut put = |name: &str, s: &ConstructibleSet| {
        sets.insert(name.to_string(), NamedSet::of(s));
    };
    put("sing_f", &sing_set(f));
    put("sing_g", &sing_set(g));
    put("sing_h", &sing_set(&c.h));
    put("m_f", &milnor_set(f, &rho_src)?);
    put("m_g", &milnor_set(g, &rho_mid)?);
    put("m_h", &milnor_set(&c.h, &rho_src)?);
    put("v_f", &zero_set(f));
    put("v_g", &zero_set(g));
    put("v_h", &zero_set(&c.h));

    let lattice_checks = vec![
        as_check("sing_inclusion", check_sing_inclusion(f, g, cfg))?,
        as_check("lemma_sing_preimage", check_lemma_l0(f, g, cfg))?,
        as_check("lemma_milnor_inclusion", check_lemma_l1(f, g, cfg))?,
        as_check("diffeo_milnor_equality", check_prop_p1_equality(f, g, cfg))?,
        as_check("zero_set_pullback", check_zero_set_pullback(f, g, cfg))?,
    ];
    let mut disc = BTreeMap::new();
    disc.insert("F".to_string(), disc_evidence(f, cfg));
    disc.insert("G".to_string(), disc_evidence(g, cfg));
    disc.insert("H".to_string(), disc_evidence(&c.h, cfg));

    let img = image_cloud(
        f,
        Some(g.source()),
        &milnor_set(&c.h, &rho_src)?,
        &sing_set(&c.h),
        cfg,
    )?;
    let mut maps = BTreeMap::new();
    maps.insert("F".to_string(), f.to_strings());
    maps.insert("G".to_string(), g.to_strings());
    maps.insert("H".to_string(), c.h.to_strings());
    Ok(CompositeReport {
        maps,
        sets,
        lattice_checks,
        disc_evidence: disc,
        image_cloud: ImageSummary {
            variables: img.variables.clone(),
            count: img.len(),
            points: img.points,
        },
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xyzw() -> VarList {
        VarList::new(&["x", "y", "z", "w"])
    }

    fn uvt() -> VarList {
        VarList::new(&["u", "v", "t"])
    }

    fn quick() -> AnalysisConfig {
        AnalysisConfig {
            points_per_radius: 16,
            ..Default::default()
        }
    }

    #[test]
    fn disc_evidence_examples() {
        let cfg = quick();
        let f46 = PolyMap::parse(&xyzw(), &["x", "y", "z*(x^2+y^2+z^2+w^2)"]).unwrap();
        let d = disc_evidence(&f46, &cfg);
        assert_eq!((d.verdict, d.method), (DiscVerdict::OriginOnly, DiscMethod::Exact));

        let g48 = PolyMap::parse(&uvt(), &["u*t", "v*t*(9*u^2+v^2+t^2)"]).unwrap();
        let d = disc_evidence(&g48, &cfg);
        assert_eq!(d.verdict, DiscVerdict::OriginOnly);
        assert_eq!(d.coordinate_pieces, vec!["t = 0"]);

        let v5 = VarList::new(&["x", "y", "z", "w", "k"]);
        let f49 = PolyMap::parse(&v5, &["x", "y", "z", "x*w"]).unwrap();
        let d = disc_evidence(&f49, &cfg);
        assert_eq!(d.verdict, DiscVerdict::NontrivialValue);
        let w = d.witness.unwrap();
        assert_eq!(w[0], 0.0);
        assert!(norm(&d.witness_image.unwrap()) > 0.0);

        let f42 = PolyMap::parse(&xyzw(), &["x", "y", "z*(x^2+y^2+z^4)"]).unwrap();
        let d = disc_evidence(&f42, &cfg);
        assert_eq!((d.verdict, d.method), (DiscVerdict::OriginOnly, DiscMethod::Sampling));
        assert!(d.samples > 0);

        let sub = PolyMap::parse(&xyzw(), &["x+z^2", "y", "z+w^3"]).unwrap();
        let d = disc_evidence(&sub, &cfg);
        assert_eq!((d.verdict, d.method), (DiscVerdict::OriginOnly, DiscMethod::Exact));
    }

    #[test]
    fn lattice_checks_tame_pair() {
        let cfg = quick();
        let f = PolyMap::parse(&xyzw(), &["x", "y", "z*(x^2+y^2+z^2+w^2)"]).unwrap();
        let g = PolyMap::parse(&uvt(), &["u*t", "v*t"]).unwrap();
        assert_eq!(check_sing_inclusion(&f, &g, &cfg).unwrap().status, CheckStatus::Holds);
        assert_eq!(check_lemma_l0(&f, &g, &cfg).unwrap().status, CheckStatus::Holds);
        assert_eq!(check_lemma_l1(&f, &g, &cfg).unwrap().status, CheckStatus::Holds);
        assert_eq!(check_zero_set_pullback(&f, &g, &cfg).unwrap().status, CheckStatus::Holds);
        assert!(matches!(
            check_prop_p1_equality(&f, &g, &cfg),
            Err(Error::PreconditionNotMet(_))
        ));
    }

    #[test]
    fn projection_pair_and_its_variant() {
        let cfg = quick();
        let f = PolyMap::parse(&xyzw(), &["x", "y", "z*(x^2+y^2+z^2+w^2)"]).unwrap();
        let g = PolyMap::parse(&uvt(), &["u", "v"]).unwrap();
        assert_eq!(check_sing_inclusion(&f, &g, &cfg).unwrap().status, CheckStatus::Vacuous);
        let g2 = PolyMap::parse(&uvt(), &["u", "t"]).unwrap();
        assert!(matches!(check_lemma_l0(&f, &g2, &cfg), Err(Error::PreconditionNotMet(_))));
        // the hypothesis matters: Sing H is the origin, the preimage is empty
        let h = PolyMap::compose(&g2, &f).unwrap();
        assert!(singular_set_ideal(&h).vanishes_exact(&vec![Rational::zero(); 4]).unwrap());
    }

    #[test]
    fn counter_pair_lemma_still_holds() {
        let cfg = quick();
        let f = PolyMap::parse(&xyzw(), &["x", "y", "z"]).unwrap();
        let g = PolyMap::parse(&uvt(), &["u", "v*(u^2+v^2+t^2)"]).unwrap();
        assert_eq!(check_lemma_l1(&f, &g, &cfg).unwrap().status, CheckStatus::Holds);
    }

    #[test]
    fn diffeo_equality() {
        let cfg = quick();
        let f = PolyMap::parse(&xyzw(), &["x", "y", "z*(x^2+y^2+z^2+w^2)"]).unwrap();
        let g = PolyMap::parse(&uvt(), &["u+v", "v", "t-u"]).unwrap();
        assert_eq!(check_prop_p1_equality(&f, &g, &cfg).unwrap().status, CheckStatus::Holds);
        let sing = PolyMap::parse(&uvt(), &["u^2", "v", "t"]).unwrap();
        assert!(matches!(
            check_prop_p1_equality(&f, &sing, &cfg),
            Err(Error::PreconditionNotMet(_))
        ));
    }

    #[test]
    fn image_cloud_of_tame_pair() {
        let cfg = quick();
        let f = PolyMap::parse(&xyzw(), &["x", "y", "z*(x^2+y^2+z^2+w^2)"]).unwrap();
        let g = PolyMap::parse(&uvt(), &["u*t", "v*t"]).unwrap();
        let c = Composite::new(&f, &g).unwrap();
        let mh = milnor_set(&c.h, &Rho::euclidean(&xyzw())).unwrap();
        let img = image_cloud(&f, Some(&uvt()), &mh, &sing_set(&c.h), &cfg).unwrap();
        assert!(img.len() > 20);
        for p in &img.points {
            let (u, v, t) = (p[0], p[1], p[2]);
            assert!((t * t - 4.0 * (u * u + v * v).powi(3)).abs() <= 1e-6);
        }
        let id = PolyMap::identity(&xyzw());
        let w = ConstructibleSet::parse(&xyzw(), &[(vec!["w"], vec![])]).unwrap();
        let img = image_cloud(&id, None, &w, &ConstructibleSet::empty(&xyzw()), &cfg).unwrap();
        assert_eq!(img.points, img.source_points);
        let none = image_cloud(&id, None, &w, &w, &cfg).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn report_serializes() {
        let cfg = AnalysisConfig {
            points_per_radius: 6,
            radii: vec![0.1],
            ..Default::default()
        };
        let f = PolyMap::parse(&xyzw(), &["x", "y", "z*(x^2+y^2+z^2+w^2)"]).unwrap();
        let g = PolyMap::parse(&uvt(), &["u*t", "v*t"]).unwrap();
        let r = analyze(&f, &g, &cfg).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        let back: CompositeReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back.lattice_checks.len(), 5);
        assert_eq!(back.maps["H"].len(), 2);
        for p in r.sets.values().flat_map(|s| &s.pieces).flat_map(|p| &p.equations) {
            assert!(!p.is_empty());
        }
    }
}

//! Topological degree of normalized gradient maps on small spheres and the
//! Euler characteristics of Milnor fibers and tubes derived from it.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::composite::sing_set;
use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::poly::{CompiledPoly, PolyMap, Polynomial};
use crate::semialg::newton::min_norm_solve;
use crate::semialg::sampler::{dist, norm, random_unit, sample_compiled, start_rng};
use crate::semialg::ConstructibleSet;

const TAG_DIRECTIONS: u64 = 0x70_01;
const TAG_STARTS: u64 = 0x70_02;
const TAG_VANISHING: u64 = 0x70_03;
const TAG_SING: u64 = 0x70_04;
// Residual of an accepted preimage, in units of the unit sphere.
const PREIMAGE_TOL: f64 = 1e-9;
// Smallest Hadamard ratio of a regular preimage.
const REGULAR_RATIO: f64 = 1e-9;

/// Preimages of one regular value and their orientation signs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionCount {
    pub direction: Vec<f64>,
    pub preimages: Vec<Vec<f64>>,
    pub signs: Vec<i64>,
    pub degree: i64,
}

/// Kronecker-integral value of the degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureCheck {
    pub value: f64,
    pub rounded: i64,
    pub residual: f64,
    /// `residual` is below the configured bound.
    pub resolved: bool,
}

/// `deg₀ ∇f` with the evidence behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientDegree {
    pub degree: i64,
    pub radius: f64,
    pub directions: Vec<DirectionCount>,
    /// Directions discarded because a preimage was critical.
    pub singular_directions: usize,
    pub quadrature: Option<QuadratureCheck>,
    /// Quadrature agrees with the preimage count; `None` when not run.
    pub agreement: Option<bool>,
}

struct Gradient {
    parts: Vec<CompiledPoly>,
}

impl Gradient {
    fn new(f: &Polynomial) -> Self {
        Gradient {
            parts: f.gradient().iter().map(CompiledPoly::new).collect(),
        }
    }

    fn dim(&self) -> usize {
        self.parts.len()
    }

    /// Value and Hessian at `x`.
    fn eval(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let m = self.dim();
        let mut g = DVector::zeros(m);
        let mut h = DMatrix::zeros(m, m);
        let mut row = vec![0.0; m];
        for (i, p) in self.parts.iter().enumerate() {
            g[i] = p.eval_grad(x, &mut row);
            for j in 0..m {
                h[(i, j)] = row[j];
            }
        }
        (g, h)
    }
}

/// Residual `(∇f/‖∇f‖ − u, (‖x‖² − r²)/r²)` and its Jacobian.
fn preimage_system(grad: &Gradient, x: &[f64], u: &[f64], r: f64) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let m = grad.dim();
    let (g, h) = grad.eval(x);
    let gn = g.norm();
    if !(gn > 0.0) || !gn.is_finite() {
        return None;
    }
    let n = &g / gn;
    let proj = DMatrix::identity(m, m) - &n * n.transpose();
    let dn = proj * h / gn;
    let mut res = DVector::zeros(m + 1);
    let mut jac = DMatrix::zeros(m + 1, m);
    for i in 0..m {
        res[i] = n[i] - u[i];
        for j in 0..m {
            jac[(i, j)] = dn[(i, j)];
        }
    }
    let r2 = r * r;
    res[m] = (x.iter().map(|a| a * a).sum::<f64>() - r2) / r2;
    for j in 0..m {
        jac[(m, j)] = 2.0 * x[j] / r2;
    }
    Some((res, jac))
}

fn solve_preimage(grad: &Gradient, x0: &[f64], u: &[f64], r: f64) -> Option<Vec<f64>> {
    let mut x = x0.to_vec();
    let (mut res, mut jac) = preimage_system(grad, &x, u, r)?;
    let mut nrm = res.norm();
    for _ in 0..80 {
        if res.amax() < 1e-14 {
            break;
        }
        let step = min_norm_solve(&jac, &(-&res))?;
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            if let Some((r2, j2)) = preimage_system(grad, &cand, u, r) {
                if r2.norm() < nrm {
                    x = cand;
                    res = r2;
                    jac = j2;
                    nrm = res.norm();
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (res.amax() < PREIMAGE_TOL).then_some(x)
}

/// Orientation sign of the normalized gradient map at a preimage of `u`,
/// or `None` when the preimage is critical.
fn local_sign(grad: &Gradient, x: &[f64], u: &[f64]) -> Option<i64> {
    let m = grad.dim();
    let xn = norm(x);
    let xhat = DVector::from_iterator(m, x.iter().map(|a| a / xn));
    // [x̂ | e_j, j ≠ argmax |x̂_j|] has full rank; its QR gives a tangent frame.
    let skip = (0..m)
        .max_by(|&a, &b| xhat[a].abs().total_cmp(&xhat[b].abs()))
        .unwrap_or(0);
    let mut seed = DMatrix::zeros(m, m);
    seed.set_column(0, &xhat);
    let mut c = 1;
    for j in (0..m).filter(|&j| j != skip) {
        seed[(j, c)] = 1.0;
        c += 1;
    }
    let q = seed.qr().q();
    let (_, h) = grad.eval(x);
    let mut a = DMatrix::zeros(m, m);
    let mut b = DMatrix::zeros(m, m);
    a.set_column(0, &xhat);
    b.set_column(0, &DVector::from_column_slice(u));
    for k in 1..m {
        let v = q.column(k).into_owned();
        let hv = &h * &v;
        a.set_column(k, &v);
        b.set_column(k, &hv);
    }
    let det_b = b.determinant();
    let scale: f64 = b.column_iter().map(|col| col.norm()).product();
    if !(scale > 0.0) || !(det_b.abs() > REGULAR_RATIO * scale) {
        return None;
    }
    let det_a = a.determinant();
    Some((det_a.signum() * det_b.signum()) as i64)
}

fn count_direction(grad: &Gradient, u: &[f64], r: f64, seed: u64, cfg: &AnalysisConfig) -> Option<DirectionCount> {
    let m = grad.dim();
    let tp = &cfg.topology;
    let found: Vec<Option<Vec<f64>>> = (0..tp.starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = start_rng(seed, i as u64);
            let x0: Vec<f64> = random_unit(&mut rng, m).iter().map(|a| a * r).collect();
            solve_preimage(grad, &x0, u, r)
        })
        .collect();
    let dedup = r * tp.dedup_factor;
    let mut preimages: Vec<Vec<f64>> = Vec::new();
    for x in found.into_iter().flatten() {
        if !preimages.iter().any(|p| dist(p, &x) < dedup) {
            preimages.push(x);
        }
    }
    let mut signs = Vec::with_capacity(preimages.len());
    for x in &preimages {
        signs.push(local_sign(grad, x, u)?);
    }
    Some(DirectionCount {
        direction: u.to_vec(),
        degree: signs.iter().sum(),
        preimages,
        signs,
    })
}

/// Fails when `∇f` has a zero on one of several spheres inside the ball.
fn check_gradient_nonvanishing(f: &Polynomial, radius: f64, cfg: &AnalysisConfig) -> Result<()> {
    let vars = f.vars();
    let grad = f.gradient();
    if grad.iter().all(Polynomial::is_zero) {
        let mut point = vec![0.0; vars.len()];
        point[0] = radius;
        return Err(Error::GradientVanishesOnSphere { radius, point });
    }
    let pieces = ConstructibleSet::variety(vars, grad).compile();
    for (k, scale) in [1.0, 0.75, 0.5, 0.25].into_iter().enumerate() {
        let r = radius * scale;
        let cloud = sample_compiled(
            vars.names().to_vec(),
            &pieces,
            None,
            r,
            1,
            cfg.stream(TAG_VANISHING ^ ((k as u64) << 8)),
            &cfg.sampler,
        );
        if let Some(p) = cloud.points.into_iter().next() {
            return Err(Error::GradientVanishesOnSphere { radius: r, point: p });
        }
    }
    Ok(())
}

/// `deg₀ ∇f` on the sphere of radius `radius` by regular-value preimage
/// counting, cross-checked by Kronecker quadrature when `M ≤ 3`.
pub fn gradient_degree(f: &Polynomial, radius: f64, cfg: &AnalysisConfig) -> Result<GradientDegree> {
    cfg.validate()?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Input(format!("radius must be positive, got {radius}")));
    }
    let m = f.nvars();
    if m < 2 {
        return Err(Error::Input("gradient degree needs at least two variables".into()));
    }
    check_gradient_nonvanishing(f, radius, cfg)?;
    let grad = Gradient::new(f);
    let tp = &cfg.topology;
    let dir_seed = cfg.stream(TAG_DIRECTIONS);
    let mut counts = Vec::with_capacity(tp.directions);
    let mut singular = 0;
    let mut draw = 0u64;
    while counts.len() < tp.directions && draw < 4 * tp.directions as u64 {
        let u = random_unit(&mut start_rng(dir_seed, draw), m);
        let seed = cfg.stream(TAG_STARTS ^ (draw << 8));
        draw += 1;
        match count_direction(&grad, &u, radius, seed, cfg) {
            Some(c) => counts.push(c),
            None => singular += 1,
        }
    }
    let mut tally: BTreeMap<i64, usize> = BTreeMap::new();
    for c in &counts {
        *tally.entry(c.degree).or_default() += 1;
    }
    let degree = tally
        .iter()
        .find(|(_, &n)| 2 * n > tp.directions)
        .map(|(&d, _)| d)
        .ok_or_else(|| Error::DegreeDisagreement {
            candidates: counts.iter().map(|c| c.degree).collect(),
        })?;
    let quadrature = (m <= 3).then(|| kronecker_degree(&grad, radius, cfg));
    let agreement = quadrature.as_ref().map(|q| q.resolved && q.rounded == degree);
    Ok(GradientDegree {
        degree,
        radius,
        directions: counts,
        singular_directions: singular,
        quadrature,
        agreement,
    })
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        out.push((mid + half * z, half * w));
    }
    out
}

fn nodes_for(range: f64, per_unit: usize) -> usize {
    ((range * per_unit as f64).ceil() as usize).max(2)
}

/// Degree as the integral of the pulled-back volume form over the sphere.
fn kronecker_degree(grad: &Gradient, r: f64, cfg: &AnalysisConfig) -> QuadratureCheck {
    let per = cfg.topology.quadrature_nodes;
    let value = match grad.dim() {
        2 => {
            let nodes = gauss_legendre(nodes_for(2.0 * PI, per), 0.0, 2.0 * PI);
            let total: f64 = nodes
                .iter()
                .map(|&(t, w)| {
                    let x = [r * t.cos(), r * t.sin()];
                    let dx = DVector::from_column_slice(&[-x[1], x[0]]);
                    let (g, h) = grad.eval(&x);
                    let dg = h * dx;
                    w * (g[0] * dg[1] - g[1] * dg[0]) / g.norm_squared()
                })
                .sum();
            total / (2.0 * PI)
        }
        3 => {
            let thetas = gauss_legendre(nodes_for(PI, per), 0.0, PI);
            let phis = gauss_legendre(nodes_for(2.0 * PI, per), 0.0, 2.0 * PI);
            let total: f64 = thetas
                .par_iter()
                .map(|&(th, wt)| {
                    let (st, ct) = th.sin_cos();
                    phis.iter()
                        .map(|&(ph, wp)| {
                            let (sp, cp) = ph.sin_cos();
                            let x = [r * st * cp, r * st * sp, r * ct];
                            let xt = DVector::from_column_slice(&[r * ct * cp, r * ct * sp, -r * st]);
                            let xp = DVector::from_column_slice(&[-r * st * sp, r * st * cp, 0.0]);
                            let (g, h) = grad.eval(&x);
                            let gn = g.norm();
                            let n = &g / gn;
                            let proj = DMatrix::identity(3, 3) - &n * n.transpose();
                            let nt = &proj * (&h * xt) / gn;
                            let np = &proj * (&h * xp) / gn;
                            wt * wp * n.dot(&nt.cross(&np))
                        })
                        .sum::<f64>()
                })
                .collect::<Vec<f64>>()
                .into_iter()
                .sum();
            total / (4.0 * PI)
        }
        _ => f64::NAN,
    };
    let rounded = value.round() as i64;
    let residual = (value - value.round()).abs();
    QuadratureCheck {
        value,
        rounded,
        residual,
        resolved: residual < cfg.topology.quadrature_residual,
    }
}

/// `χ(S^n)`.
pub fn sphere_euler(n: usize) -> i64 {
    if n % 2 == 0 {
        2
    } else {
        0
    }
}

/// Milnor fiber Euler characteristic `1 − ½χ(S^M)·deg`.
pub fn euler_fiber(m: usize, deg: i64) -> i64 {
    1 - sphere_euler(m) / 2 * deg
}

/// Composite fiber Euler characteristic by the four-term degree formula.
pub fn euler_composite(m: usize, n: usize, deg_f1: i64, deg_g1: i64) -> i64 {
    let (sm, sn) = (sphere_euler(m), sphere_euler(n));
    1 - sm / 2 * deg_f1 - sn / 2 * deg_g1 + sm * sn / 4 * deg_f1 * deg_g1
}

/// Tube Euler characteristics over the link sphere `S^{K−1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TubeEuler {
    pub sphere_euler: i64,
    pub chi_tube_h: i64,
    pub chi_tube_g: i64,
    /// `χ(T_H) = χ(T_G)·χ(F_F)`.
    pub consistent: bool,
}

pub fn euler_tube(k: usize, chi_fiber_h: i64, chi_fiber_f: i64, chi_fiber_g: i64) -> TubeEuler {
    let s = sphere_euler(k.saturating_sub(1));
    let chi_tube_h = s * chi_fiber_h;
    let chi_tube_g = s * chi_fiber_g;
    TubeEuler {
        sphere_euler: s,
        chi_tube_h,
        chi_tube_g,
        consistent: chi_tube_h == chi_tube_g * chi_fiber_f,
    }
}

/// How degrees were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeMethod {
    PreimageCount,
    KroneckerQuadrature,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
    pub k: Option<usize>,
}

/// Degree evidence for one gradient component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentDegree {
    pub map: String,
    pub index: usize,
    pub result: GradientDegree,
}

/// Gradient degrees and the Euler characteristics they determine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerReport {
    pub dims: Dims,
    pub radius: f64,
    /// `deg₀ ∇F_i`, keyed by 1-based component index.
    pub degrees: BTreeMap<usize, i64>,
    pub degrees_g: Option<BTreeMap<usize, i64>>,
    pub chi_fiber_f: i64,
    pub chi_fiber_g: Option<i64>,
    /// Four-term composite formula.
    pub chi_fiber_h: Option<i64>,
    /// `χ(F_F)·χ(F_G)`.
    pub chi_fiber_h_product: Option<i64>,
    pub chi_tube_h: Option<i64>,
    pub chi_tube_g: Option<i64>,
    pub tube_consistent: Option<bool>,
    pub methods: Vec<DegreeMethod>,
    /// Every quadrature check agrees; `None` when none ran.
    pub agreement: Option<bool>,
    pub components: Vec<ComponentDegree>,
}

impl EulerReport {
    /// Broken invariants; empty on a sound report.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.dims.m % 2 == 1 {
            if self.chi_fiber_f != 1 {
                out.push(format!("M odd but chi_fiber_F = {}", self.chi_fiber_f));
            }
            if self.degrees.values().any(|d| *d != 0) {
                out.push(format!("M odd but degrees {:?} are not all 0", self.degrees));
            }
        }
        if let (Some(h), Some(p)) = (self.chi_fiber_h, self.chi_fiber_h_product) {
            if h != p {
                out.push(format!("chi_fiber_H = {h} differs from the product {p}"));
            }
        }
        if self.tube_consistent == Some(false) {
            out.push("chi_tube_H != chi_tube_G * chi_fiber_F".into());
        }
        out
    }
}

/// Fails unless sampling finds no point of `Sing f` on the configured spheres.
fn check_isolated(f: &PolyMap, name: &str, cfg: &AnalysisConfig) -> Result<()> {
    let s = sing_set(f);
    let pieces = s.compile();
    for (k, &r) in cfg.radii.iter().enumerate() {
        let cloud = sample_compiled(
            s.vars().names().to_vec(),
            &pieces,
            None,
            r,
            1,
            cfg.stream(TAG_SING ^ ((k as u64) << 8) ^ name.len() as u64),
            &cfg.sampler,
        );
        if let Some(p) = cloud.points.first() {
            return Err(Error::PreconditionNotMet(format!(
                "Sing {name} is not isolated: it meets the sphere of radius {r} at {p:?}"
            )));
        }
    }
    Ok(())
}

fn map_degrees(
    f: &PolyMap,
    name: &str,
    radius: f64,
    cfg: &AnalysisConfig,
    components: &mut Vec<ComponentDegree>,
) -> Result<BTreeMap<usize, i64>> {
    if !(f.source_dim() > f.target_dim() && f.target_dim() >= 2) {
        return Err(Error::PreconditionNotMet(format!(
            "{name}: R^{} -> R^{} needs source dimension > target dimension >= 2",
            f.source_dim(),
            f.target_dim()
        )));
    }
    check_isolated(f, name, cfg)?;
    let mut degrees = BTreeMap::new();
    for (i, p) in f.components().iter().enumerate() {
        let result = gradient_degree(p, radius, cfg)?;
        degrees.insert(i + 1, result.degree);
        components.push(ComponentDegree {
            map: name.to_string(),
            index: i + 1,
            result,
        });
    }
    let distinct: Vec<i64> = degrees.values().copied().collect();
    if distinct.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::DegreeDisagreement { candidates: distinct });
    }
    Ok(degrees)
}

/// Degrees and Euler characteristics of `F` and, when given, of `G` and
/// `H = G ∘ F`, on the smallest configured sphere.
pub fn euler_report(f: &PolyMap, g: Option<&PolyMap>, cfg: &AnalysisConfig) -> Result<EulerReport> {
    cfg.validate()?;
    if let Some(g) = g {
        if g.source_dim() != f.target_dim() {
            return Err(Error::DimensionMismatch {
                expected: f.target_dim(),
                found: g.source_dim(),
            });
        }
    }
    let radius = cfg.radii.iter().copied().fold(f64::INFINITY, f64::min);
    let mut components = Vec::new();
    let degrees = map_degrees(f, "F", radius, cfg, &mut components)?;
    let (m, n) = (f.source_dim(), f.target_dim());
    let deg_f1 = degrees[&1];
    let chi_fiber_f = euler_fiber(m, deg_f1);
    let mut report = EulerReport {
        dims: Dims { m, n, k: None },
        radius,
        degrees,
        degrees_g: None,
        chi_fiber_f,
        chi_fiber_g: None,
        chi_fiber_h: None,
        chi_fiber_h_product: None,
        chi_tube_h: None,
        chi_tube_g: None,
        tube_consistent: None,
        methods: vec![DegreeMethod::PreimageCount],
        agreement: None,
        components: Vec::new(),
    };
    if let Some(g) = g {
        let degrees_g = map_degrees(g, "G", radius, cfg, &mut components)?;
        let k = g.target_dim();
        let deg_g1 = degrees_g[&1];
        let chi_g = euler_fiber(n, deg_g1);
        let chi_h = euler_composite(m, n, deg_f1, deg_g1);
        let tube = euler_tube(k, chi_h, chi_fiber_f, chi_g);
        report.dims.k = Some(k);
        report.degrees_g = Some(degrees_g);
        report.chi_fiber_g = Some(chi_g);
        report.chi_fiber_h = Some(chi_h);
        report.chi_fiber_h_product = Some(chi_fiber_f * chi_g);
        report.chi_tube_h = Some(tube.chi_tube_h);
        report.chi_tube_g = Some(tube.chi_tube_g);
        report.tube_consistent = Some(tube.consistent);
    }
    let checks: Vec<bool> = components.iter().filter_map(|c| c.result.agreement).collect();
    if !checks.is_empty() {
        report.methods.push(DegreeMethod::KroneckerQuadrature);
        report.agreement = Some(checks.iter().all(|a| *a));
    }
    report.components = components;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::VarList;

    fn poly(text: &str, names: &[&str]) -> Polynomial {
        Polynomial::parse(text, &VarList::new(names)).unwrap()
    }

    fn degree(text: &str, names: &[&str]) -> GradientDegree {
        gradient_degree(&poly(text, names), 0.1, &AnalysisConfig::default()).unwrap()
    }

    #[test]
    fn identity_and_reflection() {
        assert_eq!(degree("x^2+y^2+z^2+w^2", &["x", "y", "z", "w"]).degree, 1);
        let r = degree("x^2-y^2", &["x", "y"]);
        assert_eq!(r.degree, -1);
        assert_eq!(r.agreement, Some(true));
    }

    #[test]
    fn monkey_saddle_winds_backwards() {
        let r = degree("x^3-3*x*y^2", &["x", "y"]);
        assert_eq!(r.degree, -2);
        assert_eq!(r.agreement, Some(true));
        assert!(r.quadrature.unwrap().residual < 1e-6);
    }

    #[test]
    fn three_dimensional_quadrature() {
        let r = degree("x^2+y^2-z^2", &["x", "y", "z"]);
        assert_eq!(r.degree, -1);
        assert_eq!(r.agreement, Some(true));
        let r = degree("x+y*z", &["x", "y", "z"]);
        assert_eq!(r.degree, 0);
        assert_eq!(r.agreement, Some(true));
    }

    #[test]
    fn vanishing_gradient_is_rejected() {
        let err = gradient_degree(&poly("x*y", &["x", "y", "z"]), 0.1, &AnalysisConfig::default()).unwrap_err();
        assert!(matches!(err, Error::GradientVanishesOnSphere { .. }));
        let err = gradient_degree(&poly("0", &["x", "y"]), 0.1, &AnalysisConfig::default()).unwrap_err();
        assert!(matches!(err, Error::GradientVanishesOnSphere { .. }));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let nodes = gauss_legendre(5, 0.0, 2.0);
        let v: f64 = nodes.iter().map(|(x, w)| w * x.powi(9)).sum();
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-10);
    }

    #[test]
    fn euler_formulas() {
        assert_eq!(euler_fiber(4, 2), -1);
        assert_eq!(euler_fiber(5, 7), 1);
        assert_eq!(euler_fiber(2, 0), 1);
        assert_eq!(euler_composite(4, 2, 2, 3), 2);
        assert_eq!(euler_composite(5, 2, 9, 3), euler_fiber(2, 3));
        let t = euler_tube(3, -2, -1, 2);
        assert_eq!((t.chi_tube_g, t.chi_tube_h, t.consistent), (4, -4, true));
        let t = euler_tube(2, 5, 3, 7);
        assert_eq!((t.chi_tube_g, t.chi_tube_h, t.consistent), (0, 0, true));
    }

    #[test]
    fn holomorphic_germ_degree_is_the_milnor_number() {
        // z³ + w² with z = x + iy, w = u + iv: Milnor number 2, fiber χ = −1.
        let vars = VarList::new(&["x", "y", "u", "v"]);
        let f = PolyMap::parse(&vars, &["x^3-3*x*y^2+u^2-v^2", "3*x^2*y-y^3+2*u*v"]).unwrap();
        let r = euler_report(&f, None, &AnalysisConfig::default()).unwrap();
        assert_eq!(r.degrees.values().copied().collect::<Vec<_>>(), vec![2, 2]);
        assert_eq!(r.chi_fiber_f, -1);
        assert!(r.invariant_violations().is_empty());
    }

    #[test]
    fn non_isolated_singularity_is_a_precondition_failure() {
        let vars = VarList::new(&["x", "y", "z"]);
        let f = PolyMap::parse(&vars, &["x*y", "y*z"]).unwrap();
        let err = euler_report(&f, None, &AnalysisConfig::default()).unwrap_err();
        assert!(matches!(err, Error::PreconditionNotMet(_)));
    }
}

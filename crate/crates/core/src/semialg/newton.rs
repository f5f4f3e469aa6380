//! Damped Gauss–Newton with minimum-norm steps for small polynomial systems.

use nalgebra::{DMatrix, DVector};

use crate::poly::CompiledPoly;

/// Weighted equations plus sphere constraints `(‖x − c‖² − s²)/s² = 0`.
#[derive(Clone, Debug)]
pub struct System {
    n: usize,
    polys: Vec<(CompiledPoly, f64)>,
    spheres: Vec<(Vec<f64>, f64)>,
}

impl System {
    pub fn new(n: usize) -> Self {
        System {
            n,
            polys: Vec::new(),
            spheres: Vec::new(),
        }
    }

    /// Adds `p` scaled by its reciprocal magnitude at radius `r`.
    pub fn with_poly(mut self, p: CompiledPoly, r: f64) -> Self {
        if p.is_zero() {
            return self;
        }
        let m = p.magnitude(r);
        let w = if m > 0.0 { 1.0 / m } else { 1.0 };
        self.polys.push((p, w));
        self
    }

    pub fn with_polys<I: IntoIterator<Item = CompiledPoly>>(mut self, ps: I, r: f64) -> Self {
        for p in ps {
            self = self.with_poly(p, r);
        }
        self
    }

    pub fn with_sphere(mut self, center: Vec<f64>, radius: f64) -> Self {
        debug_assert_eq!(center.len(), self.n);
        self.spheres.push((center, radius));
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.polys.len() + self.spheres.len()
    }

    pub fn residual(&self, x: &[f64]) -> DVector<f64> {
        let mut r = DVector::zeros(self.rows());
        for (i, (p, w)) in self.polys.iter().enumerate() {
            r[i] = w * p.eval(x);
        }
        let k = self.polys.len();
        for (i, (c, s)) in self.spheres.iter().enumerate() {
            let d2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
            r[k + i] = (d2 - s * s) / (s * s);
        }
        r
    }

    pub fn residual_and_jacobian(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let mut r = DVector::zeros(self.rows());
        let mut j = DMatrix::zeros(self.rows(), self.n);
        let mut g = vec![0.0; self.n];
        for (i, (p, w)) in self.polys.iter().enumerate() {
            r[i] = w * p.eval_grad(x, &mut g);
            for c in 0..self.n {
                j[(i, c)] = w * g[c];
            }
        }
        let k = self.polys.len();
        for (i, (c, s)) in self.spheres.iter().enumerate() {
            let s2 = s * s;
            let mut d2 = 0.0;
            for t in 0..self.n {
                let d = x[t] - c[t];
                d2 += d * d;
                j[(k + i, t)] = 2.0 * d / s2;
            }
            r[k + i] = (d2 - s2) / s2;
        }
        (r, j)
    }

    /// Largest absolute weighted residual.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        self.residual(x).amax()
    }
}

/// Solver limits.
#[derive(Clone, Copy, Debug)]
pub struct NewtonConfig {
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Stop once the max weighted residual falls below this.
    pub target: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            max_iter: 80,
            max_halvings: 30,
            target: 1e-14,
        }
    }
}

/// Outcome of one solve.
#[derive(Clone, Debug)]
pub struct Solution {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Minimum-norm least-squares solution of `J d = b`.
pub fn min_norm_solve(j: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if j.nrows() == 0 {
        return Some(DVector::zeros(j.ncols()));
    }
    let svd = j.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || !smax.is_finite() {
        return None;
    }
    svd.solve(b, smax * 1e-12).ok()
}

/// Projects `d` onto the null space of `j`.
pub fn tangent_part(j: &DMatrix<f64>, d: &DVector<f64>) -> DVector<f64> {
    match min_norm_solve(j, &(j * d)) {
        Some(n) => d - n,
        None => d.clone(),
    }
}

/// Damped Gauss–Newton from `x0`; returns the best iterate found.
pub fn solve(sys: &System, x0: &[f64], cfg: &NewtonConfig) -> Solution {
    let mut x = DVector::from_column_slice(x0);
    let (mut r, mut jac) = sys.residual_and_jacobian(x.as_slice());
    let mut norm = r.norm();
    let mut it = 0;
    while it < cfg.max_iter {
        if !norm.is_finite() || r.amax() <= cfg.target {
            break;
        }
        it += 1;
        let Some(step) = min_norm_solve(&jac, &(-&r)) else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let cand = &x + &step * t;
            let rc = sys.residual(cand.as_slice());
            let nc = rc.norm();
            if nc.is_finite() && nc < norm {
                accepted = Some(cand);
                break;
            }
            t *= 0.5;
        }
        let Some(nx) = accepted else {
            break;
        };
        x = nx;
        (r, jac) = sys.residual_and_jacobian(x.as_slice());
        norm = r.norm();
    }
    Solution {
        residual: if norm.is_finite() { r.amax() } else { f64::INFINITY },
        x: x.as_slice().to_vec(),
        iterations: it,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{Polynomial, VarList};

    #[test]
    fn lands_on_circle_in_plane() {
        let v = VarList::new(&["x", "y", "z"]);
        let z = Polynomial::parse("z", &v).unwrap().compile();
        let sys = System::new(3).with_poly(z, 0.5).with_sphere(vec![0.0; 3], 0.5);
        let s = solve(&sys, &[0.3, 0.1, 0.2], &NewtonConfig::default());
        assert!(s.residual < 1e-14);
        assert!(s.x[2].abs() < 1e-14);
        let n: f64 = s.x.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!((n - 0.5).abs() < 1e-12);
    }

    #[test]
    fn handles_double_roots() {
        let v = VarList::new(&["x", "y"]);
        let p = Polynomial::parse("(x-y)^2", &v).unwrap().compile();
        let sys = System::new(2).with_poly(p, 1.0).with_sphere(vec![0.0; 2], 1.0);
        let s = solve(&sys, &[0.9, 0.3], &NewtonConfig::default());
        assert!(s.residual < 1e-12, "{}", s.residual);
    }

    #[test]
    fn tangent_projection_is_orthogonal() {
        let j = DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 2.0]);
        let d = DVector::from_column_slice(&[1.0, 2.0, 3.0]);
        let t = tangent_part(&j, &d);
        assert!((t - DVector::from_column_slice(&[1.0, 2.0, 0.0])).norm() < 1e-14);
    }
}

use super::{rational_to_f64, Polynomial};

/// Smallest radius used to normalize residuals.
pub const NORM_FLOOR: f64 = 1e-6;

/// Binary64 snapshot of a polynomial for hot evaluation loops.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    nvars: usize,
    coeffs: Vec<f64>,
    // row-major exponents, `nvars` per term
    exps: Vec<u32>,
    degrees: Vec<i32>,
    max_exp: Vec<u32>,
}

impl CompiledPoly {
    pub fn new(p: &Polynomial) -> Self {
        let nvars = p.nvars();
        let mut coeffs = Vec::with_capacity(p.num_terms());
        let mut exps = Vec::with_capacity(p.num_terms() * nvars);
        let mut degrees = Vec::with_capacity(p.num_terms());
        let mut max_exp = vec![0; nvars];
        for (m, c) in p.terms() {
            coeffs.push(rational_to_f64(c));
            exps.extend_from_slice(m.exponents());
            degrees.push(m.degree() as i32);
            for (i, &e) in m.exponents().iter().enumerate() {
                max_exp[i] = max_exp[i].max(e);
            }
        }
        CompiledPoly {
            nvars,
            coeffs,
            exps,
            degrees,
            max_exp,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0) as u32
    }

    fn powers(&self, x: &[f64]) -> Vec<Vec<f64>> {
        x.iter()
            .zip(&self.max_exp)
            .map(|(&xi, &k)| {
                let mut v = Vec::with_capacity(k as usize + 1);
                v.push(1.0);
                for j in 1..=k as usize {
                    v.push(v[j - 1] * xi);
                }
                v
            })
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        let pw = self.powers(x);
        let mut acc = 0.0;
        for (t, &c) in self.coeffs.iter().enumerate() {
            let e = &self.exps[t * self.nvars..(t + 1) * self.nvars];
            let mut m = c;
            for (i, &k) in e.iter().enumerate() {
                m *= pw[i][k as usize];
            }
            acc += m;
        }
        acc
    }

    /// Value and gradient in one pass; the gradient is written into `grad`.
    pub fn eval_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        let n = self.nvars;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let pw = self.powers(x);
        let mut acc = 0.0;
        for (t, &c) in self.coeffs.iter().enumerate() {
            let e = &self.exps[t * n..(t + 1) * n];
            let mut m = c;
            for (i, &k) in e.iter().enumerate() {
                m *= pw[i][k as usize];
            }
            acc += m;
            for i in 0..n {
                let k = e[i] as usize;
                if k == 0 {
                    continue;
                }
                let mut d = c * k as f64 * pw[i][k - 1];
                for (j, &kj) in e.iter().enumerate() {
                    if j != i {
                        d *= pw[j][kj as usize];
                    }
                }
                grad[i] += d;
            }
        }
        acc
    }

    /// `Σ |c_α| r^{|α|}`: the size of the polynomial on the sphere of radius `r`.
    pub fn magnitude(&self, r: f64) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.degrees)
            .map(|(c, &d)| c.abs() * r.powi(d))
            .sum()
    }

    /// |p(x)| divided by its magnitude at radius ‖x‖, with radii below
    /// `NORM_FLOOR` raised to it so round-off at the origin stays small.
    pub fn normalized_abs(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(NORM_FLOOR);
        let v = self.eval(x).abs();
        let scale = self.magnitude(r);
        if scale > 0.0 {
            v / scale
        } else {
            v
        }
    }
}

//! Constructible sets, exact and numeric membership, and seeded sampling on
//! small spheres.

mod io;
pub mod newton;
pub(crate) mod sampler;

pub use io::{read_cloud_csv, write_cloud_csv, CloudSidecar};
pub use sampler::{
    nearest_distance, nearest_point, sample_on_sphere, set_difference_samples, SampleCloud,
    SamplerConfig, SamplingDiagnostics,
};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{CompiledPoly, Polynomial, Rational, VarList};

/// `{equations = 0, inequations ≠ 0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicPiece {
    pub equations: Vec<Polynomial>,
    pub inequations: Vec<Polynomial>,
}

impl BasicPiece {
    pub fn new(equations: Vec<Polynomial>, inequations: Vec<Polynomial>) -> Self {
        BasicPiece {
            equations,
            inequations,
        }
    }

    fn member_exact(&self, point: &[Rational]) -> Result<bool> {
        for e in &self.equations {
            if !e.evaluate_exact(point)?.is_zero() {
                return Ok(false);
            }
        }
        for q in &self.inequations {
            if q.evaluate_exact(point)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// No equation is a nonzero constant and no inequation is the zero
    /// polynomial; anything else is empty for certain.
    pub fn is_trivially_empty(&self) -> bool {
        self.equations.iter().any(|e| e.is_constant() && !e.is_zero())
            || self.inequations.iter().any(Polynomial::is_zero)
    }

    /// Same zero set in a better conditioned form: coordinate powers
    /// dividing a polynomial drop to the first power, a positive sum of even
    /// coordinate powers becomes the coordinates themselves, and an equation
    /// `x_i * q` splits the piece into `x_i = 0` and `q = 0`.
    pub fn reduced(&self) -> Vec<BasicPiece> {
        let mut eqs: Vec<Polynomial> = Vec::new();
        let push = |e: Polynomial, eqs: &mut Vec<Polynomial>| {
            if !e.is_zero() && !eqs.contains(&e) {
                eqs.push(e);
            }
        };
        for e in self.equations.iter().map(squarefree_coordinates) {
            if e.is_positive_even_diagonal() && !e.is_constant() {
                let vars = e.vars().clone();
                let support = e.monomial_support();
                for i in support {
                    push(Polynomial::coordinate(&vars, i), &mut eqs);
                }
            } else {
                push(e, &mut eqs);
            }
        }
        let ineqs: Vec<Polynomial> = self.inequations.iter().map(squarefree_coordinates).collect();
        let piece = BasicPiece::new(eqs, ineqs);
        if piece.is_trivially_empty() {
            return vec![piece];
        }
        // split on the first coordinate factor of a non-linear equation
        let split = piece.equations.iter().enumerate().find_map(|(k, e)| {
            if e.total_degree() <= 1 {
                return None;
            }
            e.monomial_content().iter().position(|&c| c > 0).map(|i| (k, i))
        });
        let Some((k, i)) = split else {
            return vec![piece];
        };
        let vars = piece.equations[k].vars().clone();
        let n = vars.len();
        let xi = Polynomial::coordinate(&vars, i);
        let mut on_plane = vec![xi];
        let subs: Vec<Polynomial> = (0..n)
            .map(|j| {
                if j == i {
                    Polynomial::zero(&vars)
                } else {
                    Polynomial::coordinate(&vars, j)
                }
            })
            .collect();
        for e in &piece.equations {
            if let Ok(r) = e.substitute(&subs) {
                if !r.is_zero() && !on_plane.contains(&r) {
                    on_plane.push(r);
                }
            }
        }
        let mut e = vec![0; n];
        e[i] = 1;
        let mut rest_eqs = piece.equations.clone();
        rest_eqs[k] = rest_eqs[k].divide_by_monomial(&e);
        let mut out: Vec<BasicPiece> = Vec::new();
        for q in BasicPiece::new(on_plane, piece.inequations.clone())
            .reduced()
            .into_iter()
            .chain(BasicPiece::new(rest_eqs, piece.inequations.clone()).reduced())
        {
            if !q.is_trivially_empty() && !out.contains(&q) {
                out.push(q);
            }
        }
        out
    }

    pub fn compile(&self) -> CompiledPiece {
        CompiledPiece {
            equations: self.equations.iter().map(Polynomial::compile).collect(),
            inequations: self.inequations.iter().map(Polynomial::compile).collect(),
        }
    }
}

/// `p` with each coordinate power `x_i^k` dividing it lowered to `x_i`.
fn squarefree_coordinates(p: &Polynomial) -> Polynomial {
    let e = p.monomial_content();
    if e.iter().all(|&k| k <= 1) {
        return p.clone();
    }
    let lower: Vec<u32> = e.iter().map(|&k| k.saturating_sub(1)).collect();
    p.divide_by_monomial(&lower)
}

/// Float snapshot of a [`BasicPiece`].
#[derive(Clone, Debug)]
pub struct CompiledPiece {
    pub equations: Vec<CompiledPoly>,
    pub inequations: Vec<CompiledPoly>,
}

impl CompiledPiece {
    /// Largest normalized equation residual at `x`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.equations
            .iter()
            .map(|e| e.normalized_abs(x))
            .fold(0.0, f64::max)
    }

    /// Smallest normalized inequation magnitude at `x` (`inf` when none).
    pub fn separation(&self, x: &[f64]) -> f64 {
        self.inequations
            .iter()
            .map(|q| q.normalized_abs(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn accepts(&self, x: &[f64], tol: f64) -> bool {
        self.residual(x) <= tol && self.separation(x) > tol
    }
}

/// Finite union of basic pieces over one variable list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructibleSet {
    vars: VarList,
    pieces: Vec<BasicPiece>,
}

impl ConstructibleSet {
    pub fn new(vars: &VarList, pieces: Vec<BasicPiece>) -> Result<Self> {
        for p in &pieces {
            for q in p.equations.iter().chain(&p.inequations) {
                if q.vars() != vars {
                    return Err(Error::VariableMismatch(format!(
                        "piece polynomial `{q}` is not over {:?}",
                        vars.names()
                    )));
                }
            }
        }
        Ok(ConstructibleSet {
            vars: vars.clone(),
            pieces,
        })
    }

    pub fn empty(vars: &VarList) -> Self {
        ConstructibleSet {
            vars: vars.clone(),
            pieces: Vec::new(),
        }
    }

    pub fn whole(vars: &VarList) -> Self {
        ConstructibleSet {
            vars: vars.clone(),
            pieces: vec![BasicPiece::new(Vec::new(), Vec::new())],
        }
    }

    /// Common zero set of `equations`.
    pub fn variety(vars: &VarList, equations: Vec<Polynomial>) -> Self {
        ConstructibleSet {
            vars: vars.clone(),
            pieces: vec![BasicPiece::new(equations, Vec::new())],
        }
    }

    /// Parses `[[equations], [inequations]]` text pieces.
    pub fn parse<S: AsRef<str>>(vars: &VarList, pieces: &[(Vec<S>, Vec<S>)]) -> Result<Self> {
        let parse_all = |v: &[S]| {
            v.iter()
                .map(|t| Polynomial::parse(t.as_ref(), vars))
                .collect::<Result<Vec<_>>>()
        };
        let pieces = pieces
            .iter()
            .map(|(e, q)| Ok(BasicPiece::new(parse_all(e)?, parse_all(q)?)))
            .collect::<Result<Vec<_>>>()?;
        ConstructibleSet::new(vars, pieces)
    }

    pub fn union(&self, other: &ConstructibleSet) -> Result<Self> {
        if self.vars != other.vars {
            return Err(Error::VariableMismatch("union of sets over different spaces".into()));
        }
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        Ok(ConstructibleSet {
            vars: self.vars.clone(),
            pieces,
        })
    }

    pub fn vars(&self) -> &VarList {
        &self.vars
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn pieces(&self) -> &[BasicPiece] {
        &self.pieces
    }

    pub fn is_empty_syntactically(&self) -> bool {
        self.pieces.iter().all(BasicPiece::is_trivially_empty)
    }

    /// Float snapshot of the reduced pieces.
    pub fn compile(&self) -> Vec<CompiledPiece> {
        self.pieces
            .iter()
            .flat_map(BasicPiece::reduced)
            .filter(|p| !p.is_trivially_empty())
            .map(|p| p.compile())
            .collect()
    }

    pub fn member_exact(&self, point: &[Rational]) -> Result<bool> {
        self.check_dim(point.len())?;
        for p in &self.pieces {
            if p.member_exact(point)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Float membership with scale-free residuals: each polynomial value is
    /// divided by `Σ|c_α|‖x‖^{|α|}` before comparing with `tol`.
    pub fn member_float(&self, point: &[f64], tol: f64) -> Result<bool> {
        self.check_dim(point.len())?;
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::InvalidTolerance(tol));
        }
        if point.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(CompiledSet::new(self).contains(point, tol))
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: n,
            });
        }
        Ok(())
    }

    /// Text form: one `(equations, inequations)` pair per piece.
    pub fn to_text(&self) -> Vec<PieceText> {
        self.pieces
            .iter()
            .map(|p| PieceText {
                equations: p.equations.iter().map(|e| e.to_string()).collect(),
                inequations: p.inequations.iter().map(|e| e.to_string()).collect(),
            })
            .collect()
    }
}

/// Serializable text of one basic piece.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceText {
    pub equations: Vec<String>,
    #[serde(default)]
    pub inequations: Vec<String>,
}

/// Compiled membership test shared by the samplers.
#[derive(Clone, Debug)]
pub struct CompiledSet {
    pub pieces: Vec<CompiledPiece>,
}

impl CompiledSet {
    pub fn new(s: &ConstructibleSet) -> Self {
        CompiledSet {
            pieces: s.compile(),
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.pieces.iter().any(|p| p.accepts(x, tol))
    }
}

use std::fmt;

use num_traits::Zero;

use super::{CompiledPoly, Polynomial, Rational, VarList};
use crate::error::{Error, Result};

/// Polynomial map germ `(R^M, 0) -> (R^N, 0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMap {
    source: VarList,
    components: Vec<Polynomial>,
}

impl PolyMap {
    /// Every component must live over `source` and vanish at the origin.
    pub fn new(source: &VarList, components: Vec<Polynomial>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Input("a map needs at least one component".into()));
        }
        for (i, c) in components.iter().enumerate() {
            if c.vars() != source {
                return Err(Error::VariableMismatch(format!(
                    "component {i} is over {:?}, map source is {:?}",
                    c.vars().names(),
                    source.names()
                )));
            }
            if !c.constant_term().is_zero() {
                return Err(Error::NotAGerm(i));
            }
        }
        Ok(PolyMap {
            source: source.clone(),
            components,
        })
    }

    pub fn parse<S: AsRef<str>>(source: &VarList, texts: &[S]) -> Result<Self> {
        let comps = texts
            .iter()
            .map(|t| Polynomial::parse(t.as_ref(), source))
            .collect::<Result<Vec<_>>>()?;
        PolyMap::new(source, comps)
    }

    pub fn identity(vars: &VarList) -> Self {
        PolyMap {
            source: vars.clone(),
            components: (0..vars.len())
                .map(|i| Polynomial::coordinate(vars, i))
                .collect(),
        }
    }

    /// Linear map `x ↦ A x` for a row-major `rows × vars.len()` matrix.
    pub fn linear(vars: &VarList, matrix: &[Vec<Rational>]) -> Result<Self> {
        let comps = matrix
            .iter()
            .map(|row| {
                if row.len() != vars.len() {
                    return Err(Error::DimensionMismatch {
                        expected: vars.len(),
                        found: row.len(),
                    });
                }
                Ok(row.iter().enumerate().fold(Polynomial::zero(vars), |acc, (j, a)| {
                    &acc + &Polynomial::coordinate(vars, j).scale(a)
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        PolyMap::new(vars, comps)
    }

    pub fn source(&self) -> &VarList {
        &self.source
    }

    pub fn source_dim(&self) -> usize {
        self.source.len()
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    /// Always true: construction rejects components with a constant term.
    pub fn origin_check(&self) -> bool {
        self.components.iter().all(|c| c.constant_term().is_zero())
    }

    /// `g ∘ f` by exact substitution.
    pub fn compose(g: &PolyMap, f: &PolyMap) -> Result<PolyMap> {
        if f.target_dim() != g.source_dim() {
            return Err(Error::DimensionMismatch {
                expected: g.source_dim(),
                found: f.target_dim(),
            });
        }
        let comps = g
            .components
            .iter()
            .map(|gc| gc.substitute(&f.components))
            .collect::<Result<Vec<_>>>()?;
        PolyMap::new(&f.source, comps)
    }

    pub fn evaluate_exact(&self, point: &[Rational]) -> Result<Vec<Rational>> {
        self.components
            .iter()
            .map(|c| c.evaluate_exact(point))
            .collect()
    }

    pub fn evaluate_float(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.components
            .iter()
            .map(|c| c.evaluate_float(point))
            .collect()
    }

    pub fn compile(&self) -> CompiledMap {
        CompiledMap {
            components: self.components.iter().map(Polynomial::compile).collect(),
        }
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.components.iter().map(|c| c.to_string()).collect()
    }
}

impl fmt::Display for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_strings().join(", "))
    }
}

/// Float-evaluation snapshot of a [`PolyMap`].
#[derive(Clone, Debug)]
pub struct CompiledMap {
    components: Vec<CompiledPoly>,
}

impl CompiledMap {
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    /// Largest scale-free component value `|F_i(x)| / Σ|c_α|‖x‖^{|α|}`.
    pub fn max_normalized_abs(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .map(|c| c.normalized_abs(x))
            .fold(0.0, f64::max)
    }

    /// Row-major `N × M` Jacobian at `x`.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.components
            .iter()
            .map(|c| {
                let mut g = vec![0.0; x.len()];
                c.eval_grad(x, &mut g);
                g
            })
            .collect()
    }
}

//! Jacobian matrices and the determinantal ideals cutting out `Sing F` and
//! the Milnor set `M_ρ(F)`.

use std::collections::HashMap;
use std::fmt;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{CompiledPoly, PolyMap, Polynomial, Rational, VarList};
use crate::semialg::ConstructibleSet;

/// Matrix of polynomials over one variable list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Polynomial>) -> Result<Self> {
        if entries.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        let vars = entries[0].vars();
        if entries.iter().any(|e| e.vars() != vars) {
            return Err(Error::VariableMismatch("matrix entries".into()));
        }
        Ok(PolyMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.cols + j]
    }

    pub fn vars(&self) -> &VarList {
        self.entries[0].vars()
    }

    /// Appends the rows of `other` below `self`.
    pub fn stack(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        if other.cols != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.cols,
            });
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        PolyMatrix::new(self.rows + other.rows, self.cols, entries)
    }

    pub fn evaluate_exact(&self, point: &[Rational]) -> Result<Vec<Vec<Rational>>> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j).evaluate_exact(point))
                    .collect()
            })
            .collect()
    }

    /// All `k × k` minors, ordered by (row subset, column subset) in
    /// lexicographic order.
    pub fn minors(&self, k: usize) -> Vec<Polynomial> {
        assert!(k >= 1 && k <= self.rows.min(self.cols));
        let row_sets = subsets(self.rows, k);
        let col_sets = subsets(self.cols, k);
        row_sets
            .par_iter()
            .flat_map_iter(|rs| {
                let mut memo: HashMap<u64, Polynomial> = HashMap::new();
                col_sets
                    .iter()
                    .map(|cs| {
                        let mask = cs.iter().fold(0u64, |m, &j| m | (1 << j));
                        self.det_rows_mask(rs, mask, &mut memo)
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    /// Determinant of rows `rs` against the columns in `mask`, expanded along
    /// the last row with memoization on column subsets.
    fn det_rows_mask(
        &self,
        rs: &[usize],
        mask: u64,
        memo: &mut HashMap<u64, Polynomial>,
    ) -> Polynomial {
        let m = mask.count_ones() as usize;
        debug_assert!(m <= rs.len());
        if m == 0 {
            return Polynomial::one(self.vars());
        }
        if let Some(p) = memo.get(&mask) {
            return p.clone();
        }
        let row = rs[m - 1];
        let mut acc = Polynomial::zero(self.vars());
        let mut pos = 0usize;
        for j in 0..self.cols {
            if mask & (1 << j) == 0 {
                continue;
            }
            let a = self.get(row, j);
            if !a.is_zero() {
                let sub = self.det_rows_mask(rs, mask & !(1 << j), memo);
                if !sub.is_zero() {
                    let term = a * &sub;
                    acc = if (m - 1 + pos) % 2 == 0 {
                        &acc + &term
                    } else {
                        &acc - &term
                    };
                }
            }
            pos += 1;
        }
        memo.insert(mask, acc.clone());
        acc
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Exact determinant of a square rational matrix by fraction-free
/// elimination with row pivoting.
pub fn det_rational(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = Rational::from_integer(1.into());
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        let piv = a[c][c].clone();
        det *= &piv;
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] / &piv;
            for k in c..n {
                let v = &a[c][k] * &f;
                a[r][k] -= v;
            }
        }
    }
    det
}

/// Generators whose common zero locus is the set of interest.
///
/// Generators are stored monic, zero generators are dropped and scalar
/// multiples collapse to one representative. A nonzero constant generator
/// collapses the whole list to `[1]` (the empty set). An empty list means the
/// whole ambient space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealGenerators {
    vars: VarList,
    generators: Vec<Polynomial>,
}

impl IdealGenerators {
    pub fn new(vars: &VarList, gens: Vec<Polynomial>) -> Self {
        let mut out: Vec<Polynomial> = Vec::new();
        for g in gens {
            if g.is_zero() {
                continue;
            }
            if g.is_constant() {
                return IdealGenerators {
                    vars: vars.clone(),
                    generators: vec![Polynomial::one(vars)],
                };
            }
            let m = g.monic();
            if !out.contains(&m) {
                out.push(m);
            }
        }
        IdealGenerators {
            vars: vars.clone(),
            generators: out,
        }
    }

    pub fn vars(&self) -> &VarList {
        &self.vars
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    /// The zero set is empty for certain.
    pub fn is_unit(&self) -> bool {
        self.generators.len() == 1 && self.generators[0].is_constant()
    }

    /// The zero set is the whole space.
    pub fn is_whole_space(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn vanishes_exact(&self, point: &[Rational]) -> Result<bool> {
        for g in &self.generators {
            if !g.evaluate_exact(point)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn compiled(&self) -> Vec<CompiledPoly> {
        self.generators.iter().map(Polynomial::compile).collect()
    }

    pub fn zero_set(&self) -> ConstructibleSet {
        ConstructibleSet::variety(&self.vars, self.generators.clone())
    }

    /// Pulls the ideal back along `f` (generators composed with `f`).
    pub fn pullback(&self, f: &PolyMap) -> Result<IdealGenerators> {
        let gens = self
            .generators
            .iter()
            .map(|g| g.substitute(f.components()))
            .collect::<Result<Vec<_>>>()?;
        Ok(IdealGenerators::new(f.source(), gens))
    }

    /// Splits off coordinate hyperplanes dividing every generator.
    ///
    /// Returns the indices `i` with `x_i | g` for all generators `g` and the
    /// cofactor ideal, so that the zero set is the union of `{x_i = 0}` and
    /// the cofactor zero set.
    pub fn coordinate_factors(&self) -> (Vec<usize>, IdealGenerators) {
        if self.generators.is_empty() || self.is_unit() {
            return (Vec::new(), self.clone());
        }
        let n = self.vars.len();
        let mut content = vec![u32::MAX; n];
        for g in &self.generators {
            for (c, e) in content.iter_mut().zip(g.monomial_content()) {
                *c = (*c).min(e);
            }
        }
        let axes: Vec<usize> = (0..n).filter(|&i| content[i] > 0).collect();
        let cof = self
            .generators
            .iter()
            .map(|g| g.divide_by_monomial(&content))
            .collect();
        (axes, IdealGenerators::new(&self.vars, cof))
    }

    /// Sufficient test for the zero set being `{0}` or empty: the ideal is
    /// the unit ideal, contains a positive definite diagonal form, or
    /// contains a pure power of every variable.
    pub fn zero_set_within_origin(&self) -> bool {
        if self.is_unit() {
            return true;
        }
        if self
            .generators
            .iter()
            .any(|g| g.is_positive_even_diagonal() && g.covers_all_variables_evenly())
        {
            return true;
        }
        (0..self.vars.len()).all(|i| {
            self.generators.iter().any(|g| {
                g.num_terms() == 1
                    && g.terms()
                        .all(|(m, _)| m.exponents().iter().enumerate().all(|(j, &e)| (j == i) == (e > 0)))
            })
        })
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.to_string()).collect()
    }
}

impl fmt::Display for IdealGenerators {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.to_strings().join(", "))
    }
}

/// How a ρ was validated as a proper control function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoKind {
    /// Sum of positive pure even powers covering every variable.
    Syntactic,
    /// Pullback of a proper ρ by a diffeomorphism; checked by sampling.
    Pullback,
}

/// Nonnegative proper function whose level spheres define the Milnor set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rho {
    poly: Polynomial,
    kind: RhoKind,
}

impl Rho {
    pub fn euclidean(vars: &VarList) -> Self {
        Rho {
            poly: Polynomial::euclidean(vars),
            kind: RhoKind::Syntactic,
        }
    }

    /// Accepts sums of even-power monomials with positive coefficients in
    /// which every variable occurs as a pure even power.
    pub fn new(poly: Polynomial) -> Result<Self> {
        if !poly.is_positive_even_diagonal() || !poly.covers_all_variables_evenly() {
            return Err(Error::InvalidRho(format!(
                "`{poly}` is not a positive sum of pure even powers in every variable"
            )));
        }
        Ok(Rho {
            poly,
            kind: RhoKind::Syntactic,
        })
    }

    pub fn parse(text: &str, vars: &VarList) -> Result<Self> {
        Rho::new(Polynomial::parse(text, vars)?)
    }

    /// Marks `poly` as a pullback ρ, exempt from the syntactic check.
    pub(crate) fn pullback_unchecked(poly: Polynomial) -> Self {
        Rho {
            poly,
            kind: RhoKind::Pullback,
        }
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn kind(&self) -> RhoKind {
        self.kind
    }

    pub fn is_euclidean(&self) -> bool {
        self.poly == Polynomial::euclidean(self.poly.vars())
    }
}

/// `N × M` matrix of partials `∂F_i/∂x_j`.
pub fn jacobian(f: &PolyMap) -> PolyMatrix {
    let m = f.source_dim();
    let entries = f
        .components()
        .iter()
        .flat_map(|c| (0..m).map(move |j| c.derivative(j)))
        .collect();
    PolyMatrix::new(f.target_dim(), m, entries).expect("jacobian shape")
}

/// Maximal minors of `dF`; their common zeros are `Sing F`.
pub fn singular_set_ideal(f: &PolyMap) -> IdealGenerators {
    let j = jacobian(f);
    let k = f.source_dim().min(f.target_dim());
    IdealGenerators::new(f.source(), j.minors(k))
}

/// Minors of `dF` stacked over `dρ`; their common zeros are `M_ρ(F)`.
pub fn milnor_set_ideal(f: &PolyMap, rho: &Rho) -> Result<IdealGenerators> {
    if rho.poly().vars() != f.source() {
        return Err(Error::DimensionMismatch {
            expected: f.source_dim(),
            found: rho.poly().nvars(),
        });
    }
    if !rho.poly().constant_term().is_zero() {
        return Err(Error::InvalidRho("rho must vanish at the origin".into()));
    }
    let grad = PolyMatrix::new(1, f.source_dim(), rho.poly().gradient())?;
    let stacked = jacobian(f).stack(&grad)?;
    let k = f.source_dim().min(f.target_dim() + 1);
    Ok(IdealGenerators::new(f.source(), stacked.minors(k)))
}

/// Numeric rank-deficiency test on `dF(0)`: true when `0 ∈ Sing F`, decided
/// exactly.
pub fn origin_is_singular(f: &PolyMap) -> Result<bool> {
    let zero = vec![Rational::zero(); f.source_dim()];
    singular_set_ideal(f).vanishes_exact(&zero)
}

//! Exact sparse multivariate polynomials over the rationals.
//!
//! A [`Polynomial`] is a map from exponent vectors to nonzero rational
//! coefficients over an ordered variable list. Terms are kept in graded
//! lexicographic order, which fixes both iteration and printing order.

mod compiled;
mod map;
mod parse;

pub use compiled::CompiledPoly;
pub use map::{CompiledMap, PolyMap};

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Converts a small integer into a rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `num / den` as a rational. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub(crate) fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Fall back through the integer parts for huge numerators.
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Ordered, shared list of variable names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarList(Arc<[String]>);

impl VarList {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Self {
        VarList(names.iter().map(|s| s.as_ref().to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.0
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }
}

impl<S: AsRef<str>> From<&[S]> for VarList {
    fn from(names: &[S]) -> Self {
        VarList::new(names)
    }
}

/// Exponent vector, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial with exact rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is
/// mathematical equality for polynomials over the same variable list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    vars: VarList,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(vars: &VarList) -> Self {
        Polynomial {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &VarList, c: Rational) -> Self {
        let mut p = Polynomial::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(vars.len()), c);
        }
        p
    }

    pub fn one(vars: &VarList) -> Self {
        Polynomial::constant(vars, Rational::one())
    }

    /// The coordinate function for variable index `i`.
    pub fn coordinate(vars: &VarList, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        let mut p = Polynomial::zero(vars);
        p.terms.insert(Monomial(e), Rational::one());
        p
    }

    pub fn variable(vars: &VarList, name: &str) -> Result<Self> {
        Ok(Polynomial::coordinate(vars, vars.index_of(name)?))
    }

    /// Builds a polynomial from raw terms, merging repeats and dropping zeros.
    pub fn from_terms<I>(vars: &VarList, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Polynomial::zero(vars);
        for (e, c) in terms {
            if e.len() != vars.len() {
                return Err(Error::DimensionMismatch {
                    expected: vars.len(),
                    found: e.len(),
                });
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    /// Parses an expression over `vars`; see the crate docs for the grammar.
    pub fn parse(text: &str, vars: &VarList) -> Result<Self> {
        parse::parse(text, vars)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &VarList {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one(self.nvars()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Rational {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Leading term in graded-lex order.
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    fn check_same_vars(&self, other: &Polynomial) {
        assert!(
            self.vars == other.vars,
            "polynomial arithmetic across different variable lists: {:?} vs {:?}",
            self.vars.names(),
            other.vars.names()
        );
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.vars);
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    /// Divides by the leading coefficient; zero stays zero.
    pub fn monic(&self) -> Polynomial {
        match self.leading() {
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(&inv)
            }
            None => self.clone(),
        }
    }

    pub fn pow(&self, mut k: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one(&self.vars);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Partial derivative with respect to the named variable.
    pub fn differentiate(&self, var: &str) -> Result<Polynomial> {
        Ok(self.derivative(self.vars.index_of(var)?))
    }

    /// Partial derivative with respect to variable index `i`.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut em = m.0.clone();
            em[i] -= 1;
            out.add_term(Monomial(em), c * rat(e as i64));
        }
        out
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.nvars()).map(|i| self.derivative(i)).collect()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.nvars() {
            return Err(Error::DimensionMismatch {
                expected: self.nvars(),
                found: n,
            });
        }
        Ok(())
    }

    /// Exact value at a rational point.
    pub fn evaluate_exact(&self, point: &[Rational]) -> Result<Rational> {
        self.check_len(point.len())?;
        let powers = power_table(point, self.max_exponents());
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= &powers[i][e as usize];
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Binary64 value at a point.
    pub fn evaluate_float(&self, point: &[f64]) -> Result<f64> {
        self.check_len(point.len())?;
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = rational_to_f64(c);
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= point[i].powi(e as i32);
                }
            }
            acc += t;
        }
        if acc.is_finite() {
            Ok(acc)
        } else {
            Err(Error::NonFinite)
        }
    }

    fn max_exponents(&self) -> Vec<u32> {
        let mut mx = vec![0; self.nvars()];
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                mx[i] = mx[i].max(e);
            }
        }
        mx
    }

    /// Substitutes `subs[i]` for variable `i`. All substitutes must share one
    /// variable list, which becomes the variable list of the result.
    pub fn substitute(&self, subs: &[Polynomial]) -> Result<Polynomial> {
        self.check_len(subs.len())?;
        let target = match subs.first() {
            Some(p) => p.vars.clone(),
            None => return Ok(self.clone()),
        };
        if let Some(bad) = subs.iter().find(|p| p.vars != target) {
            return Err(Error::VariableMismatch(format!(
                "{:?} vs {:?}",
                bad.vars.names(),
                target.names()
            )));
        }
        let mx = self.max_exponents();
        let powers: Vec<Vec<Polynomial>> = subs
            .iter()
            .zip(&mx)
            .map(|(p, &k)| {
                let mut v = vec![Polynomial::one(&target)];
                for j in 1..=k as usize {
                    let next = &v[j - 1] * p;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Polynomial::zero(&target);
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(&target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = &t * &powers[i][e as usize];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Same terms over a renamed variable list of equal length.
    pub fn with_vars(&self, vars: &VarList) -> Result<Polynomial> {
        self.check_len(vars.len())?;
        Ok(Polynomial {
            vars: vars.clone(),
            terms: self.terms.clone(),
        })
    }

    /// Upper bound `Σ |c_α| r^{|α|}` on |p| over the ball of radius `r`.
    pub fn magnitude_at_radius(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| rational_to_f64(c).abs() * r.powi(m.degree() as i32))
            .sum()
    }

    /// Largest power of each variable dividing every term.
    pub fn monomial_content(&self) -> Vec<u32> {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return vec![0; self.nvars()];
        };
        let mut g = first.0.clone();
        for m in it {
            for (a, b) in g.iter_mut().zip(&m.0) {
                *a = (*a).min(*b);
            }
        }
        g
    }

    /// Divides every term by the monomial `x^e`; `e` must divide every term.
    pub fn divide_by_monomial(&self, e: &[u32]) -> Polynomial {
        let mut out = Polynomial::zero(&self.vars);
        for (m, c) in &self.terms {
            let em: Vec<u32> = m.0.iter().zip(e).map(|(a, b)| a - b).collect();
            out.add_term(Monomial(em), c.clone());
        }
        out
    }

    /// Indices of the variables occurring in some term.
    pub fn monomial_support(&self) -> Vec<usize> {
        (0..self.nvars())
            .filter(|&i| self.terms.keys().any(|m| m.0[i] > 0))
            .collect()
    }

    /// True when every term is a pure even power with positive coefficient.
    pub fn is_positive_even_diagonal(&self) -> bool {
        !self.terms.is_empty()
            && self.terms.iter().all(|(m, c)| {
                c.is_positive()
                    && m.0.iter().filter(|&&e| e > 0).count() == 1
                    && m.0.iter().all(|&e| e % 2 == 0)
            })
    }

    /// Every variable appears in some pure even power with positive coefficient.
    pub fn covers_all_variables_evenly(&self) -> bool {
        (0..self.nvars()).all(|i| {
            self.terms.iter().any(|(m, c)| {
                c.is_positive()
                    && m.0[i] > 0
                    && m.0[i] % 2 == 0
                    && m.0.iter().enumerate().all(|(j, &e)| j == i || e == 0)
            })
        })
    }

    /// Euclidean `Σ x_i²` over `vars`.
    pub fn euclidean(vars: &VarList) -> Polynomial {
        (0..vars.len()).fold(Polynomial::zero(vars), |acc, i| {
            let x = Polynomial::coordinate(vars, i);
            &acc + &(&x * &x)
        })
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly::new(self)
    }
}

fn power_table(point: &[Rational], mx: Vec<u32>) -> Vec<Vec<Rational>> {
    point
        .iter()
        .zip(mx)
        .map(|(x, k)| {
            let mut v = vec![Rational::one()];
            for j in 1..=k as usize {
                let next = &v[j - 1] * x;
                v.push(next);
            }
            v
        })
        .collect()
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.check_same_vars(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.check_same_vars(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.check_same_vars(rhs);
        let mut out = Polynomial::zero(&self.vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! owned_binop {
    ($tr:ident, $f:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: Polynomial) -> Polynomial {
                (&self).$f(&rhs)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

fn fmt_coeff(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Polynomial {
    /// Prints in the parser's grammar, highest graded-lex term first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.degree() == 0 {
                factors.push(fmt_coeff(&abs));
            }
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.vars.0[i].clone()),
                    _ => factors.push(format!("{}^{}", self.vars.0[i], e)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(names: &[&str]) -> VarList {
        VarList::new(names)
    }

    #[test]
    fn derivative_of_cone_component() {
        let v = vars(&["x", "y", "z", "w"]);
        let p = Polynomial::parse("z*(x^2+y^2+z^2+w^2)", &v).unwrap();
        let d = p.differentiate("w").unwrap();
        assert_eq!(d, Polynomial::parse("2*z*w", &v).unwrap());
    }

    #[test]
    fn derivative_of_zero_and_rho() {
        let v = vars(&["x", "y", "z", "w"]);
        assert!(Polynomial::zero(&v).differentiate("x").unwrap().is_zero());
        let rho = Polynomial::euclidean(&v);
        assert_eq!(
            rho.differentiate("x").unwrap(),
            Polynomial::parse("2*x", &v).unwrap()
        );
        assert_eq!(
            rho.differentiate("q"),
            Err(Error::UnknownVariable("q".into()))
        );
    }

    #[test]
    fn exact_evaluation() {
        let v = vars(&["x", "y", "z"]);
        let p = Polynomial::parse(
            "x^4+5*x^2*z^4-x^2*z^2-y^4-5*y^2*z^4+3*y^2*z^2+z^6",
            &v,
        )
        .unwrap();
        assert_eq!(
            p.evaluate_exact(&[rat(0), rat(0), rat(1)]).unwrap(),
            rat(1)
        );
        assert_eq!(p.evaluate_exact(&[rat(0), rat(0), rat(0)]).unwrap(), rat(0));
        let v2 = vars(&["x", "y"]);
        let q = Polynomial::parse("x^2-y^2", &v2).unwrap();
        assert_eq!(q.evaluate_exact(&[rat(3), rat(2)]).unwrap(), rat(5));
        assert!(matches!(
            q.evaluate_exact(&[rat(1)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn float_overflow_is_reported() {
        let v = vars(&["x"]);
        let p = Polynomial::parse("x^200", &v).unwrap();
        assert_eq!(p.evaluate_float(&[1e10]), Err(Error::NonFinite));
    }

    #[test]
    fn display_uses_grlex_descending() {
        let v = vars(&["x", "y"]);
        let p = Polynomial::parse("1 - y + 3*x^2 + x*y/2", &v).unwrap();
        assert_eq!(p.to_string(), "3*x^2 + 1/2*x*y - y + 1");
    }

    #[test]
    fn monomial_content_and_division() {
        let v = vars(&["u", "v", "t"]);
        let p = Polynomial::parse("t^2*u - t*v", &v).unwrap();
        assert_eq!(p.monomial_content(), vec![0, 0, 1]);
        assert_eq!(
            p.divide_by_monomial(&[0, 0, 1]),
            Polynomial::parse("t*u - v", &v).unwrap()
        );
    }

    #[test]
    fn even_diagonal_detection() {
        let v = vars(&["x", "y", "z", "w"]);
        let p = Polynomial::parse("x^2+y^2+z^4+w^2", &v).unwrap();
        assert!(p.is_positive_even_diagonal() && p.covers_all_variables_evenly());
        let q = Polynomial::parse("x^2+y^2+z^2", &v).unwrap();
        assert!(q.is_positive_even_diagonal() && !q.covers_all_variables_evenly());
        let r = Polynomial::parse("x^2+x*y+y^2+z^2+w^2", &v).unwrap();
        assert!(!r.is_positive_even_diagonal());
    }
}

//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*        divisor must be a nonzero constant
//! factor := ('+' | '-') factor | power
//! power  := atom ('^' integer)?
//! atom   := integer | identifier | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Polynomial, Rational, VarList};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = text[start..i].parse().expect("digits");
            out.push((start, Tok::Int(n)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(Error::Syntax {
                pos: i,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    vars: &'a VarList,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            if self.eat_op('+') {
                acc = &acc + &self.term()?;
            } else if self.eat_op('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        loop {
            if self.eat_op('*') {
                acc = &acc * &self.factor()?;
            } else if self.peek() == Some(&Tok::Op('/')) {
                let pos = self.pos();
                self.at += 1;
                let d = self.factor()?;
                if !d.is_constant() {
                    return Err(Error::Syntax {
                        pos,
                        message: "division by a non-constant expression".into(),
                    });
                }
                let c = d.constant_term();
                if c.is_zero() {
                    return Err(Error::Syntax {
                        pos,
                        message: "division by zero".into(),
                    });
                }
                acc = acc.scale(&c.recip());
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Polynomial> {
        if self.eat_op('-') {
            return Ok(-&self.factor()?);
        }
        if self.eat_op('+') {
            return self.factor();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if !self.eat_op('^') {
            return Ok(base);
        }
        let pos = self.pos();
        let parens = self.eat_op('(');
        if self.peek() == Some(&Tok::Op('-')) {
            return Err(Error::NegativeExponent { pos });
        }
        let k = match self.peek() {
            Some(Tok::Int(n)) => {
                let k = u32::try_from(n.clone()).map_err(|_| Error::Syntax {
                    pos,
                    message: "exponent too large".into(),
                })?;
                self.at += 1;
                k
            }
            _ => {
                return Err(Error::Syntax {
                    pos,
                    message: "expected a non-negative integer exponent".into(),
                })
            }
        };
        if parens && !self.eat_op(')') {
            return Err(Error::Syntax {
                pos: self.pos(),
                message: "expected `)`".into(),
            });
        }
        Ok(base.pow(k))
    }

    fn atom(&mut self) -> Result<Polynomial> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.at += 1;
                Ok(Polynomial::constant(self.vars, Rational::from_integer(n)))
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                Polynomial::variable(self.vars, &name)
            }
            Some(Tok::Op('(')) => {
                self.at += 1;
                let inner = self.expr()?;
                if !self.eat_op(')') {
                    return Err(Error::Syntax {
                        pos: self.pos(),
                        message: "expected `)`".into(),
                    });
                }
                Ok(inner)
            }
            Some(Tok::Op(c)) => Err(Error::Syntax {
                pos,
                message: format!("unexpected `{c}`"),
            }),
            None => Err(Error::Syntax {
                pos,
                message: "unexpected end of input".into(),
            }),
        }
    }
}

pub(super) fn parse(text: &str, vars: &VarList) -> Result<Polynomial> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
        vars,
    };
    let out = p.expr()?;
    if p.at < p.toks.len() {
        return Err(Error::Syntax {
            pos: p.pos(),
            message: "expected an operator".into(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, ratio};

    fn v(names: &[&str]) -> VarList {
        VarList::new(names)
    }

    #[test]
    fn polar_sextic_polynomial() {
        let vars = v(&["x", "y", "z"]);
        let p = parse(
            "x^4+5*x^2*z^4-x^2*z^2-y^4-5*y^2*z^4+3*y^2*z^2+z^6",
            &vars,
        )
        .unwrap();
        assert_eq!(p.num_terms(), 7);
        assert_eq!(p.coefficient(&[2, 0, 4]), rat(5));
        assert_eq!(p.coefficient(&[0, 2, 2]), rat(3));
        assert_eq!(p.coefficient(&[0, 0, 6]), rat(1));
    }

    #[test]
    fn zero_and_ring_identity() {
        let x = v(&["x"]);
        assert!(parse("0", &x).unwrap().is_zero());
        let xy = v(&["x", "y"]);
        assert!(parse("(x+y)^2 - x^2 - 2*x*y - y^2", &xy).unwrap().is_zero());
    }

    #[test]
    fn whitespace_and_rational_literals() {
        let vars = v(&["x", "w"]);
        let a = parse(" x * w / 3 ", &vars).unwrap();
        let b = parse("1/3*x*w", &vars).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.coefficient(&[1, 1]), ratio(1, 3));
        assert_eq!(parse("-x^2", &vars).unwrap().coefficient(&[2, 0]), rat(-1));
    }

    #[test]
    fn errors() {
        let vars = v(&["x", "y"]);
        assert_eq!(
            parse("x + q", &vars),
            Err(Error::UnknownVariable("q".into()))
        );
        assert!(matches!(parse("x^-2", &vars), Err(Error::NegativeExponent { pos: 2 })));
        assert!(matches!(parse("2x", &vars), Err(Error::Syntax { pos: 1, .. })));
        assert!(matches!(parse("x*(y+1", &vars), Err(Error::Syntax { pos: 6, .. })));
        assert!(matches!(parse("x/y", &vars), Err(Error::Syntax { pos: 1, .. })));
        assert!(matches!(parse("x/0", &vars), Err(Error::Syntax { .. })));
        assert!(matches!(parse("x $ y", &vars), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse("", &vars), Err(Error::Syntax { pos: 0, .. })));
    }
}

//! Text syntax for polynomials.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | integer 'i' | 'i' | identifier | '(' expr ')'
//! ```
//!
//! `i` is always the imaginary unit. Division is allowed only by nonzero
//! constants. Juxtaposition (`x y`, `2x`) is rejected.

use crate::error::{Error, Result};
use crate::poly::MultiPoly;
use crate::scalar::GaussRat;
use num_bigint::BigInt;
use num_rational::BigRational;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    ImagInt(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            d if d.is_ascii_digit() => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().expect("digits");
                let is_imag = i < bytes.len()
                    && bytes[i] == b'i'
                    && !bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_');
                if is_imag {
                    i += 1;
                    out.push((Tok::ImagInt(n), start));
                } else {
                    out.push((Tok::Int(n), start));
                }
                continue;
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            other => {
                return Err(Error::Syntax { pos: start, msg: format!("unexpected character `{other}`") })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [String],
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end)
    }

    fn nvars(&self) -> usize {
        self.vars.len()
    }

    fn expr(&mut self) -> Result<MultiPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(Tok::Slash) => {
                    let at = self.here();
                    self.pos += 1;
                    let den_at = self.here();
                    let den = self.unary()?;
                    let c = den.constant_value().ok_or(Error::NonConstantDivision { pos: den_at })?;
                    let inv = c.inv().ok_or(Error::DivisionByZero { pos: at })?;
                    acc = acc.scale(&inv);
                }
                Some(Tok::Int(_) | Tok::ImagInt(_) | Tok::Ident(_) | Tok::LParen) => {
                    return Err(Error::Syntax {
                        pos: self.here(),
                        msg: "implicit multiplication is not allowed; use `*`".into(),
                    })
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<MultiPoly> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<MultiPoly> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let at = self.here();
            match self.peek().cloned() {
                Some(Tok::Int(n)) => {
                    self.pos += 1;
                    let e: u32 = n
                        .try_into()
                        .map_err(|_| Error::Syntax { pos: at, msg: "exponent too large".into() })?;
                    Ok(base.pow(e))
                }
                _ => Err(Error::Syntax { pos: at, msg: "expected a nonnegative integer exponent".into() }),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<MultiPoly> {
        let at = self.here();
        let tok = self.peek().cloned();
        let n = self.nvars();
        match tok {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(MultiPoly::constant(n, GaussRat::from_rational(BigRational::from_integer(v))))
            }
            Some(Tok::ImagInt(v)) => {
                self.pos += 1;
                Ok(MultiPoly::constant(
                    n,
                    GaussRat::new(BigRational::from_integer(0.into()), BigRational::from_integer(v)),
                ))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "i" {
                    return Ok(MultiPoly::constant(n, GaussRat::i()));
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(k) => Ok(MultiPoly::var(n, k)),
                    None => Err(Error::UnknownVariable { name, pos: at }),
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(Error::Syntax { pos: self.here(), msg: "expected `)`".into() });
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(_) => Err(Error::Syntax { pos: at, msg: "expected a number, variable or `(`".into() }),
            None => Err(Error::Syntax { pos: at, msg: "unexpected end of input".into() }),
        }
    }
}

/// Parse `text` as a polynomial in the listed variables, returning the
/// expanded canonical form.
pub fn parse_poly<S: AsRef<str>>(text: &str, var_names: &[S]) -> Result<MultiPoly> {
    let vars: Vec<String> = var_names.iter().map(|s| s.as_ref().to_string()).collect();
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(Error::Syntax { pos: 0, msg: "empty expression".into() });
    }
    let mut p = Parser { toks, pos: 0, vars: &vars, end: text.len() };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Syntax { pos: p.here(), msg: "unexpected trailing input".into() });
    }
    Ok(out)
}

/// Parse a single coefficient (a constant expression).
pub fn parse_coeff(text: &str) -> Result<GaussRat> {
    let p = parse_poly::<&str>(text, &[])?;
    Ok(p.constant_value().unwrap_or_else(GaussRat::zero))
}

/// Default variable names `x0, x1, …`.
pub fn default_vars(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// Canonical text form: terms in descending graded-lex order.
pub fn render_poly<S: AsRef<str>>(p: &MultiPoly, var_names: &[S]) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (m, c) in p.terms().rev() {
        let mono: Vec<String> = m
            .exps()
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(k, &e)| {
                let name = var_names[k].as_ref();
                if e == 1 { name.to_string() } else { format!("{name}^{e}") }
            })
            .collect();
        let mono = mono.join("*");
        let coeff = c.to_string();
        let term = if mono.is_empty() {
            if !c.re.is_zero_ref() && !c.im.is_zero_ref() { format!("({coeff})") } else { coeff }
        } else if c.is_one() {
            mono
        } else if *c == GaussRat::from_int(-1) {
            format!("-{mono}")
        } else if !c.re.is_zero_ref() && !c.im.is_zero_ref() {
            format!("({coeff})*{mono}")
        } else {
            format!("{coeff}*{mono}")
        };
        if !out.is_empty() && !term.starts_with('-') {
            out.push('+');
        }
        out.push_str(&term);
    }
    out
}

pub fn render_poly_default(p: &MultiPoly) -> String {
    render_poly(p, &default_vars(p.nvars()))
}

trait ZeroRef {
    fn is_zero_ref(&self) -> bool;
}

impl ZeroRef for BigRational {
    fn is_zero_ref(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const V4: [&str; 4] = ["x0", "x1", "x2", "x3"];

    #[test]
    fn parses_fermat() {
        let f = parse_poly("x0^4+x1^4+x2^4+x3^4", &V4).unwrap();
        assert_eq!(f.num_terms(), 4);
        assert!(f.is_homogeneous(4));
        for k in 0..4 {
            let mut e = vec![0; 4];
            e[k] = 4;
            assert!(f.coeff(&e).is_one());
        }
    }

    #[test]
    fn zero_is_empty() {
        assert!(parse_poly("0", &["x"]).unwrap().is_zero());
        assert!(parse_poly("x - x", &["x"]).unwrap().is_zero());
    }

    #[test]
    fn gaussian_coefficient_arithmetic() {
        // (1+2i)/3 - 1 = -2/3 + 2/3 i
        let p = parse_poly("(1+2i)/3 * x*y - x*y", &["x", "y"]).unwrap();
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.coeff(&[1, 1]), GaussRat::from_fracs(-2, 3, 2, 3));
        assert_eq!(render_poly(&p, &["x", "y"]), "(-2/3+2/3*i)*x*y");
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse_poly("x + q", &["x"]),
            Err(Error::UnknownVariable { name: "q".into(), pos: 4 })
        );
        assert!(matches!(parse_poly("x y", &["x", "y"]), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse_poly("2x", &["x"]), Err(Error::Syntax { pos: 1, .. })));
        assert!(matches!(parse_poly("1/x", &["x"]), Err(Error::NonConstantDivision { pos: 2 })));
        assert!(matches!(parse_poly("x/(1-1)", &["x"]), Err(Error::DivisionByZero { .. })));
        assert!(matches!(parse_poly("(x+1", &["x"]), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly("x^y", &["x", "y"]), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly("", &["x"]), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly("x $ 1", &["x"]), Err(Error::Syntax { pos: 2, .. })));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let p = parse_poly("-x^2", &["x"]).unwrap();
        assert_eq!(p.coeff(&[2]), GaussRat::from_int(-1));
    }

    #[test]
    fn render_is_canonical() {
        let p = parse_poly("3 + x1*x0 - 2i*x0^2 + 1/2*x1^3", &["x0", "x1"]).unwrap();
        assert_eq!(render_poly(&p, &["x0", "x1"]), "1/2*x1^3-2*i*x0^2+x0*x1+3");
        assert_eq!(parse_poly(&render_poly(&p, &["x0", "x1"]), &["x0", "x1"]).unwrap(), p);
    }

    #[test]
    fn coefficient_parser() {
        assert_eq!(parse_coeff("3+2i").unwrap(), GaussRat::from_ints(3, 2));
        assert_eq!(parse_coeff("-1/2").unwrap(), GaussRat::from_fracs(-1, 2, 0, 1));
    }
}

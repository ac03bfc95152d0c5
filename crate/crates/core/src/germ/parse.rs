//! Text format for polynomials.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := coeff ('*' power)* | power ('*' power)*
//! coeff  := digits ['.' digits] | digits '/' digits
//! power  := 'x' index ['^' exponent]
//! ```
//!
//! Whitespace is insignificant. Decimal coefficients become exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{GermError, MultiIndex, Poly, PolyGerm};

/// Parses a germ in `n` variables; rejects a nonzero constant term.
pub fn parse(text: &str, n: usize) -> Result<PolyGerm, GermError> {
    PolyGerm::new(parse_poly(text, n)?)
}

/// Parses a general polynomial (constant term allowed).
pub fn parse_poly(text: &str, n: usize) -> Result<Poly, GermError> {
    if n == 0 {
        return Err(GermError::ZeroDimension);
    }
    Parser::new(text, n).expr()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, n: usize) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            n,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, msg: impl Into<String>) -> GermError {
        GermError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn expr(&mut self) -> Result<Poly, GermError> {
        let mut acc = Poly::zero(self.n);
        let mut first = true;
        loop {
            let negative = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    false
                }
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                None if first => return Err(self.err("empty expression")),
                None => break,
                Some(_) if first => false,
                Some(c) => return Err(self.err(format!("expected '+' or '-', found '{}'", c as char))),
            };
            first = false;
            let (mut c, m) = self.term()?;
            if negative {
                c = -c;
            }
            acc = &acc + &Poly::monomial(c, m);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<(BigRational, MultiIndex), GermError> {
        let mut coeff = BigRational::one();
        let mut exps = vec![0u32; self.n];
        let mut need_power = true;
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                coeff = self.coefficient()?;
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                } else {
                    need_power = false;
                }
            }
            Some(b'x') => {}
            Some(c) => return Err(self.err(format!("unexpected '{}'", c as char))),
            None => return Err(self.err("expected a term")),
        }
        if need_power {
            loop {
                let (i, e) = self.power()?;
                exps[i] += e;
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        Ok((coeff, MultiIndex::new(exps)))
    }

    fn digits(&mut self) -> &'a [u8] {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn integer(&mut self) -> Result<BigInt, GermError> {
        self.skip_ws();
        let d = self.digits();
        if d.is_empty() {
            return Err(self.err("expected digits"));
        }
        Ok(BigInt::parse_bytes(d, 10).expect("ascii digits"))
    }

    fn coefficient(&mut self) -> Result<BigRational, GermError> {
        self.skip_ws();
        let start = self.pos;
        let whole = self.digits();
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let frac = self.digits();
            if whole.is_empty() && frac.is_empty() {
                self.pos = start;
                return Err(self.err("malformed number"));
            }
            let mut all = whole.to_vec();
            all.extend_from_slice(frac);
            if all.is_empty() {
                all.push(b'0');
            }
            let num = BigInt::parse_bytes(&all, 10).expect("ascii digits");
            let den = num_traits::pow(BigInt::from(10), frac.len());
            return Ok(BigRational::new(num, den));
        }
        let num = BigInt::parse_bytes(whole, 10).expect("ascii digits");
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let den = self.integer()?;
            if den.is_zero() {
                return Err(self.err("division by zero"));
            }
            return Ok(BigRational::new(num, den));
        }
        Ok(BigRational::from_integer(num))
    }

    fn power(&mut self) -> Result<(usize, u32), GermError> {
        if self.peek() != Some(b'x') {
            return Err(self.err("expected variable 'x<k>'"));
        }
        let var_pos = self.pos;
        self.pos += 1;
        let d = self.digits();
        if d.is_empty() {
            return Err(self.err("expected variable index after 'x'"));
        }
        let index: usize = std::str::from_utf8(d)
            .expect("ascii digits")
            .parse()
            .map_err(|_| GermError::VariableOutOfRange {
                index: usize::MAX,
                n: self.n,
                pos: var_pos,
            })?;
        if index == 0 || index > self.n {
            return Err(GermError::VariableOutOfRange {
                index,
                n: self.n,
                pos: var_pos,
            });
        }
        let mut exp = 1u32;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let at = self.pos;
            let d = self.digits();
            exp = std::str::from_utf8(d)
                .ok()
                .and_then(|s| s.parse().ok())
                .filter(|&e: &u32| e > 0)
                .ok_or(GermError::Syntax {
                    pos: at,
                    msg: "exponent must be a positive integer".into(),
                })?;
        }
        Ok((index - 1, exp))
    }
}

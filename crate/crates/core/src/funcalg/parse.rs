//! Infix syntax for expressions and complex literals in experiment configs.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' int | '^' '(' int ')')?
//! primary := number | number 'i' | 'i' | 'z' | 'pi'
//!          | ('exp' | 'sin' | 'cos' | 'diff') '(' expr ')'
//!          | 'shift' '(' expr ',' expr ')'
//!          | '(' expr ')'
//! ```
//! The offset of `shift` must be a constant expression. Exponents are integers.

use num_complex::Complex64;

use super::expr::Expr;
use super::FuncError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn err(src: &str, offset: usize, message: impl Into<String>) -> FuncError {
    let (line, column) = position(src, offset);
    FuncError::Parse {
        line,
        column,
        message: message.into(),
    }
}

impl Lexer {
    fn run(src: &str) -> Result<Vec<(Tok, usize)>, FuncError> {
        let mut lx = Lexer { toks: Vec::new() };
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let ch = bytes[i] as char;
            if ch.is_whitespace() {
                i += 1;
            } else if ch.is_ascii_digit() || ch == '.' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| err(src, start, format!("malformed number `{text}`")))?;
                let imag = i < bytes.len()
                    && bytes[i] == b'i'
                    && !(i + 1 < bytes.len() && (bytes[i + 1] as char).is_ascii_alphanumeric());
                if imag {
                    i += 1;
                    lx.toks.push((Tok::Imag(v), start));
                } else {
                    lx.toks.push((Tok::Num(v), start));
                }
            } else if ch.is_ascii_alphabetic() || ch == '_' {
                let start = i;
                while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                lx.toks.push((Tok::Ident(src[start..i].to_string()), start));
            } else if "+-*/^(),".contains(ch) {
                lx.toks.push((Tok::Sym(ch), i));
                i += 1;
            } else {
                return Err(err(src, i, format!("unexpected character `{ch}`")));
            }
        }
        lx.toks.push((Tok::End, src.len()));
        Ok(lx.toks)
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, ch: char) -> Result<(), FuncError> {
        if *self.peek() == Tok::Sym(ch) {
            self.bump();
            Ok(())
        } else {
            Err(err(self.src, self.offset(), format!("expected `{ch}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, FuncError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    lhs = lhs + self.term()?;
                }
                Tok::Sym('-') => {
                    self.bump();
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, FuncError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    lhs = lhs * self.unary()?;
                }
                Tok::Sym('/') => {
                    self.bump();
                    let at = self.offset();
                    let den = self.unary()?;
                    lhs = lhs.checked_div(&den).map_err(|e| err(self.src, at, e.to_string()))?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, FuncError> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(-self.unary()?);
        }
        if *self.peek() == Tok::Sym('+') {
            self.bump();
            return self.unary();
        }
        self.power()
    }

    fn integer(&mut self) -> Result<i32, FuncError> {
        let at = self.offset();
        let neg = if *self.peek() == Tok::Sym('-') {
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => {
                Ok(if neg { -(v as i32) } else { v as i32 })
            }
            _ => Err(err(self.src, at, "exponent must be an integer literal")),
        }
    }

    fn power(&mut self) -> Result<Expr, FuncError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let k = if *self.peek() == Tok::Sym('(') {
            self.bump();
            let k = self.integer()?;
            self.expect(')')?;
            k
        } else {
            self.integer()?
        };
        Ok(base.powi(k))
    }

    fn primary(&mut self) -> Result<Expr, FuncError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::real(v)),
            Tok::Imag(v) => Ok(Expr::constant(Complex64::new(0.0, v))),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "z" => Ok(Expr::z()),
                "i" => Ok(Expr::constant(Complex64::new(0.0, 1.0))),
                "pi" => Ok(Expr::real(std::f64::consts::PI)),
                "exp" | "sin" | "cos" | "diff" => {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    Ok(match name.as_str() {
                        "exp" => arg.exp(),
                        "sin" => arg.sin(),
                        "cos" => arg.cos(),
                        _ => arg.derivative(),
                    })
                }
                "shift" => {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(',')?;
                    let off_at = self.offset();
                    let off = self.expr()?;
                    self.expect(')')?;
                    let off =
                        constant_value(&off).ok_or_else(|| err(self.src, off_at, "shift offset must be a constant"))?;
                    Ok(arg.shift(off))
                }
                other => Err(err(self.src, at, format!("unknown identifier `{other}`"))),
            },
            Tok::End => Err(err(self.src, at, "unexpected end of input")),
            Tok::Sym(ch) => Err(err(self.src, at, format!("unexpected `{ch}`"))),
        }
    }
}

fn constant_value(e: &Expr) -> Option<Complex64> {
    if !e.is_closed() {
        return None;
    }
    e.eval(Complex64::new(0.0, 0.0)).value()
}

/// Parses an infix expression in `z`.
pub fn parse_expr(src: &str) -> Result<Expr, FuncError> {
    let toks = Lexer::run(src)?;
    let mut p = Parser { src, toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(err(src, p.offset(), "trailing input"));
    }
    Ok(e)
}

fn parse_real_part(src: &str, part: &str, offset: usize) -> Result<f64, FuncError> {
    let (sign, body) = match part.as_bytes().first() {
        Some(b'-') => (-1.0, &part[1..]),
        Some(b'+') => (1.0, &part[1..]),
        _ => (1.0, part),
    };
    let bad = || err(src, offset, format!("malformed number `{part}`"));
    let v = match body.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.parse().map_err(|_| bad())?;
            let q: f64 = q.parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(err(src, offset, "zero denominator in rational literal"));
            }
            p / q
        }
        None => body.parse().map_err(|_| bad())?,
    };
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(sign * v)
}

/// Parses a complex literal `a`, `bi`, `a+bi`, `a-bi` where each part is a
/// decimal or a rational `p/q` (e.g. `1/3-2/5i`).
pub fn parse_complex(src: &str) -> Result<Complex64, FuncError> {
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(err(src, 0, "empty complex literal"));
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(parse_real_part(src, &s, 0)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_part, im_part) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let re = if re_part.is_empty() {
        0.0
    } else {
        parse_real_part(src, re_part, 0)?
    };
    let im = match im_part {
        "" | "+" => 1.0,
        "-" => -1.0,
        p => parse_real_part(src, p, re_part.len())?,
    };
    Ok(Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(e: &Expr, re: f64, im: f64) -> Complex64 {
        e.eval(Complex64::new(re, im)).value().unwrap()
    }

    #[test]
    fn parses_basic_forms() {
        let e = parse_expr("exp(2*pi*i*z) + z^2 - 3").unwrap();
        let want = (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * 0.3).exp() + 0.09 - 3.0;
        assert!((at(&e, 0.3, 0.0) - want).norm() < 1e-12);
        let e = parse_expr("shift(z^2, 1+2i)").unwrap();
        assert!((at(&e, 0.0, 0.0) - Complex64::new(1.0, 2.0).powi(2)).norm() < 1e-12);
        let e = parse_expr("diff(sin(z)*z)").unwrap();
        assert!((at(&e, 1.0, 0.0).re - (1f64.sin() + 1f64.cos())).abs() < 1e-12);
        let e = parse_expr("-z^2").unwrap();
        assert!((at(&e, 2.0, 0.0).re + 4.0).abs() < 1e-12);
        let e = parse_expr("z^(-1) + 2.5e-1i").unwrap();
        assert!((at(&e, 2.0, 0.0) - Complex64::new(0.5, 0.25)).norm() < 1e-12);
    }

    #[test]
    fn rejects_unknown_identifier_with_position() {
        match parse_expr("exp(z) + log(z)") {
            Err(FuncError::Parse { line, column, message }) => {
                assert_eq!((line, column), (1, 10));
                assert!(message.contains("log"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_expr("z^0.5").is_err());
        assert!(parse_expr("shift(z, z)").is_err());
        assert!(parse_expr("1/(z-z)").is_err());
        assert!(parse_expr("(z").is_err());
    }

    #[test]
    fn complex_literals() {
        let cases = [
            ("1", (1.0, 0.0)),
            ("-2.5", (-2.5, 0.0)),
            ("3i", (0.0, 3.0)),
            ("-i", (0.0, -1.0)),
            ("1+2i", (1.0, 2.0)),
            ("1 - 2i", (1.0, -2.0)),
            ("1/3-2/5i", (1.0 / 3.0, -0.4)),
            ("1e-3+1e+2i", (1e-3, 100.0)),
            ("0.5+i", (0.5, 1.0)),
        ];
        for (s, (re, im)) in cases {
            let v = parse_complex(s).unwrap();
            assert!((v - Complex64::new(re, im)).norm() < 1e-15, "{s} -> {v}");
        }
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1/0").is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "exp(z)*z - 1",
            "shift(sin(z), 1+0.5i)/(z - 3)",
            "(1-exp(z))^2",
            "-z + 2i",
        ] {
            let e = parse_expr(s).unwrap();
            let back = parse_expr(&e.to_string()).unwrap();
            for z in [Complex64::new(0.3, 0.7), Complex64::new(-1.1, 0.2)] {
                assert!((at(&e, z.re, z.im) - at(&back, z.re, z.im)).norm() < 1e-12, "{s}");
            }
        }
    }
}

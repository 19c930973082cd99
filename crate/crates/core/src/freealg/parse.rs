use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{Coeff, NcPoly, NcPolynomial};
use super::word::Word;
use super::FreeAlgError;

/// Options for the polynomial text grammar.
#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    /// Accept `x`/`y` as aliases for `x1`/`x2`. On by default when
    /// `nvars == 2`, matching the two-variable convention.
    pub allow_alias: bool,
}

/// Parses a polynomial in the text grammar: terms separated by `+`/`-`,
/// each term an optional decimal or rational coefficient followed by
/// letters `x1..xN` joined by `*` with `^k` for powers. Whitespace is
/// ignored. With two variables, `x` and `y` alias `x1` and `x2`.
pub fn parse_poly(text: &str, nvars: usize) -> Result<NcPolynomial, FreeAlgError> {
    parse_poly_with_options(
        text,
        nvars,
        ParseOptions {
            allow_alias: nvars == 2,
        },
    )
}

pub fn parse_poly_with_options(
    text: &str,
    nvars: usize,
    opts: ParseOptions,
) -> Result<NcPolynomial, FreeAlgError> {
    if nvars == 0 {
        return Err(FreeAlgError::NoVariables);
    }
    Parser::new(text, nvars, opts).parse()
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    nvars: usize,
    opts: ParseOptions,
}

impl Parser {
    fn new(text: &str, nvars: usize, opts: ParseOptions) -> Self {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            nvars,
            opts,
        }
    }

    fn err(&self, message: impl Into<String>) -> FreeAlgError {
        FreeAlgError::Parse {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn parse(mut self) -> Result<NcPolynomial, FreeAlgError> {
        self.skip_ws();
        if self.peek().is_none() {
            return Err(self.err("empty polynomial"));
        }
        let mut poly = NcPolynomial::zero(self.nvars);
        let mut first = true;
        loop {
            self.skip_ws();
            let mut negate = false;
            match self.peek() {
                Some('+') => {
                    self.bump();
                }
                Some('-') | Some('\u{2212}') => {
                    self.bump();
                    negate = true;
                }
                Some(_) if first => {}
                Some(c) => return Err(self.err(format!("expected '+' or '-', found '{}'", c))),
                None => break,
            }
            self.skip_ws();
            if self.peek().is_none() {
                return Err(self.err("expected a term"));
            }
            let (word, coeff) = self.parse_term()?;
            let coeff = if negate { -coeff } else { coeff };
            poly.add_term(word, coeff);
            first = false;
            self.skip_ws();
            if self.peek().is_none() {
                break;
            }
        }
        Ok(poly)
    }

    fn parse_term(&mut self) -> Result<(Word, BigRational), FreeAlgError> {
        let mut coeff = <BigRational as One>::one();
        let mut saw_coeff = false;
        if matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
            coeff = self.parse_number()?;
            saw_coeff = true;
            self.skip_ws();
            if self.peek() == Some('/') {
                self.bump();
                self.skip_ws();
                let denom = self.parse_number()?;
                if Zero::is_zero(&denom) {
                    return Err(self.err("zero denominator"));
                }
                coeff /= denom;
                self.skip_ws();
            }
        }
        let mut letters: Vec<u32> = Vec::new();
        let mut expect_factor = false;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => {
                    self.bump();
                    expect_factor = true;
                    continue;
                }
                Some(c) if c == 'x' || c == 'y' => {
                    let (letter, power) = self.parse_letter()?;
                    for _ in 0..power {
                        letters.push(letter);
                    }
                    expect_factor = false;
                }
                _ => break,
            }
        }
        if expect_factor {
            return Err(self.err("expected a variable after '*'"));
        }
        if letters.is_empty() && !saw_coeff {
            return Err(self.err("expected a coefficient or a variable"));
        }
        Ok((Word::from_letters(letters), coeff))
    }

    fn parse_letter(&mut self) -> Result<(u32, usize), FreeAlgError> {
        let start_line = self.line;
        let start_col = self.col;
        let name = self.bump().unwrap();
        let mut digits = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            digits.push(self.bump().unwrap());
        }
        let index: u32 = match (name, digits.is_empty()) {
            ('x', false) => digits.parse().map_err(|_| self.err("bad variable index"))?,
            ('x', true) if self.opts.allow_alias => 1,
            ('y', true) if self.opts.allow_alias => 2,
            _ => {
                return Err(FreeAlgError::Parse {
                    line: start_line,
                    col: start_col,
                    message: format!("unknown variable '{}{}'", name, digits),
                })
            }
        };
        if index == 0 || index as usize > self.nvars {
            return Err(FreeAlgError::Parse {
                line: start_line,
                col: start_col,
                message: format!(
                    "unknown variable '{}{}' (nvars = {})",
                    name, digits, self.nvars
                ),
            });
        }
        let mut power = 1usize;
        if self.peek() == Some('^') {
            self.bump();
            self.skip_ws();
            let mut pow_digits = String::new();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                pow_digits.push(self.bump().unwrap());
            }
            if pow_digits.is_empty() {
                return Err(self.err("expected an exponent after '^'"));
            }
            power = pow_digits
                .parse()
                .map_err(|_| self.err("exponent too large"))?;
        }
        Ok((index, power))
    }

    /// Decimal number with optional fraction and exponent, parsed exactly
    /// into a rational.
    fn parse_number(&mut self) -> Result<BigRational, FreeAlgError> {
        let mut int_part = String::new();
        let mut frac_part = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            int_part.push(self.bump().unwrap());
        }
        if self.peek() == Some('.') {
            self.bump();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                frac_part.push(self.bump().unwrap());
            }
        }
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(self.err("expected a number"));
        }
        let digits = format!("{}{}", int_part, frac_part);
        let mantissa: BigInt = digits.parse().expect("digit string");
        let mut value = BigRational::new(mantissa, BigInt::from(10).pow(frac_part.len() as u32));
        // optional exponent, only when followed by a sign or digit so that
        // a variable cannot be swallowed
        if matches!(self.peek(), Some('e') | Some('E')) {
            let save = (self.pos, self.line, self.col);
            self.bump();
            let mut exp_sign = 1i32;
            if matches!(self.peek(), Some('+') | Some('-')) && self.bump() == Some('-') {
                exp_sign = -1;
            }
            let mut exp_digits = String::new();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                exp_digits.push(self.bump().unwrap());
            }
            if exp_digits.is_empty() {
                (self.pos, self.line, self.col) = save;
            } else {
                let exp: u32 = exp_digits
                    .parse()
                    .map_err(|_| self.err("exponent too large"))?;
                let scale = BigRational::from_integer(BigInt::from(10).pow(exp));
                if exp_sign > 0 {
                    value *= scale;
                } else {
                    value /= scale;
                }
            }
        }
        Ok(value)
    }
}

/// Renders a polynomial in the text grammar, terms in graded
/// lexicographic order. With two variables, letters print as `x`/`y`.
pub fn poly_to_string<C: Coeff>(p: &NcPoly<C>) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let alias = p.nvars() == 2;
    let mut out = String::new();
    for (i, (w, c)) in p.terms().enumerate() {
        let coeff_str = coeff_to_string(c);
        let (sign, mag) = match coeff_str.strip_prefix('-') {
            Some(rest) => ("-", rest.to_string()),
            None => ("+", coeff_str),
        };
        if i == 0 {
            if sign == "-" {
                out.push('-');
            }
        } else {
            out.push_str(sign);
        }
        let word_str = word_to_string(w, alias);
        if w.is_empty() {
            out.push_str(&mag);
        } else if mag == "1" {
            out.push_str(&word_str);
        } else {
            out.push_str(&mag);
            out.push('*');
            out.push_str(&word_str);
        }
    }
    out
}

fn word_to_string(w: &Word, alias: bool) -> String {
    if w.is_empty() {
        return "1".to_string();
    }
    let name = |l: u32| -> String {
        if alias {
            match l {
                1 => return "x".to_string(),
                2 => return "y".to_string(),
                _ => {}
            }
        }
        format!("x{}", l)
    };
    let letters = w.letters();
    let mut parts = Vec::new();
    let mut i = 0;
    while i < letters.len() {
        let l = letters[i];
        let mut run = 1;
        while i + run < letters.len() && letters[i + run] == l {
            run += 1;
        }
        if run == 1 {
            parts.push(name(l));
        } else {
            parts.push(format!("{}^{}", name(l), run));
        }
        i += run;
    }
    parts.join("*")
}

fn coeff_to_string<C: Coeff>(c: &C) -> String {
    c.repr()
}

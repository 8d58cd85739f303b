//! Univariate arithmetic over a [`Field`]: polynomials, rational functions,
//! truncated Laurent polynomials, and the degree valuation.
//!
//! The degree of `p/q` is `deg p - deg q`, and the zero element has degree
//! minus infinity, modeled by the [`Deg`] sentinel. All operations are exact.

use std::fmt;

use crate::field::{Field, FieldError};

/// Degree value: an integer or the minus-infinity sentinel for zero.
///
/// The derived order places `NegInf` below every finite degree.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Deg {
    NegInf,
    Fin(i64),
}

impl Deg {
    pub fn is_finite(self) -> bool {
        matches!(self, Deg::Fin(_))
    }

    /// The finite value; panics on `NegInf`.
    pub fn finite(self) -> i64 {
        match self {
            Deg::Fin(v) => v,
            Deg::NegInf => panic!("degree is minus infinity"),
        }
    }

    /// Degree of a product: addition with absorbing `NegInf`.
    pub fn plus(self, other: Deg) -> Deg {
        match (self, other) {
            (Deg::Fin(a), Deg::Fin(b)) => Deg::Fin(a + b),
            _ => Deg::NegInf,
        }
    }

    /// Shift by a finite amount; `NegInf` is absorbing.
    pub fn shift(self, k: i64) -> Deg {
        match self {
            Deg::Fin(a) => Deg::Fin(a + k),
            Deg::NegInf => Deg::NegInf,
        }
    }
}

impl From<i64> for Deg {
    fn from(v: i64) -> Self {
        Deg::Fin(v)
    }
}

impl fmt::Display for Deg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Deg::NegInf => write!(f, "-inf"),
            Deg::Fin(v) => write!(f, "{v}"),
        }
    }
}

/// Dense polynomial in `t` with coefficients in ascending power order.
/// Invariant: the last stored coefficient is nonzero (empty = zero).
#[derive(Clone, PartialEq, Debug)]
pub struct Poly<F: Field> {
    pub coeffs: Vec<F::Elem>,
}

impl<F: Field> Poly<F> {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one(f: &F) -> Self {
        Poly { coeffs: vec![f.one()] }
    }

    pub fn constant(f: &F, c: F::Elem) -> Self {
        Poly::from_coeffs(f, vec![c])
    }

    /// `c * t^k` for `k >= 0`.
    pub fn monomial(f: &F, c: F::Elem, k: usize) -> Self {
        if f.is_zero(&c) {
            return Poly::zero();
        }
        let mut coeffs = vec![f.zero(); k + 1];
        coeffs[k] = c;
        Poly { coeffs }
    }

    /// Build from raw coefficients, trimming trailing zeros.
    pub fn from_coeffs(f: &F, mut coeffs: Vec<F::Elem>) -> Self {
        while coeffs.last().is_some_and(|c| f.is_zero(c)) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn deg(&self) -> Deg {
        if self.coeffs.is_empty() {
            Deg::NegInf
        } else {
            Deg::Fin(self.coeffs.len() as i64 - 1)
        }
    }

    pub fn leading_coeff(&self, f: &F) -> F::Elem {
        self.coeffs.last().cloned().unwrap_or_else(|| f.zero())
    }

    pub fn coeff(&self, f: &F, k: usize) -> F::Elem {
        self.coeffs.get(k).cloned().unwrap_or_else(|| f.zero())
    }

    pub fn add(f: &F, a: &Self, b: &Self) -> Self {
        let n = a.coeffs.len().max(b.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(f.add(&a.coeff(f, k), &b.coeff(f, k)));
        }
        Poly::from_coeffs(f, out)
    }

    pub fn neg(f: &F, a: &Self) -> Self {
        Poly { coeffs: a.coeffs.iter().map(|c| f.neg(c)).collect() }
    }

    pub fn sub(f: &F, a: &Self, b: &Self) -> Self {
        Poly::add(f, a, &Poly::neg(f, b))
    }

    pub fn mul(f: &F, a: &Self, b: &Self) -> Self {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![f.zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, ai) in a.coeffs.iter().enumerate() {
            if f.is_zero(ai) {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                out[i + j] = f.add(&out[i + j], &f.mul(ai, bj));
            }
        }
        Poly::from_coeffs(f, out)
    }

    pub fn scale(f: &F, a: &Self, c: &F::Elem) -> Self {
        Poly::from_coeffs(f, a.coeffs.iter().map(|x| f.mul(x, c)).collect())
    }

    /// Multiply by `t^k`, `k >= 0`.
    pub fn shift_up(f: &F, a: &Self, k: usize) -> Self {
        if a.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![f.zero(); k];
        coeffs.extend(a.coeffs.iter().cloned());
        Poly { coeffs }
    }

    /// Euclidean division: returns `(quotient, remainder)` with
    /// `deg r < deg b`. Panics if `b` is zero.
    pub fn divmod(f: &F, a: &Self, b: &Self) -> (Self, Self) {
        assert!(!b.is_zero(), "polynomial division by zero");
        let db = b.coeffs.len() - 1;
        let lead_inv = f.inv(&b.leading_coeff(f)).expect("nonzero leading coefficient");
        let mut rem = a.coeffs.clone();
        if rem.len() <= db {
            return (Poly::zero(), a.clone());
        }
        let mut quot = vec![f.zero(); rem.len() - db];
        for k in (db..rem.len()).rev() {
            let c = f.mul(&rem[k], &lead_inv);
            if f.is_zero(&c) {
                continue;
            }
            quot[k - db] = c.clone();
            for (j, bj) in b.coeffs.iter().enumerate() {
                let idx = k - db + j;
                rem[idx] = f.sub(&rem[idx], &f.mul(&c, bj));
            }
        }
        (Poly::from_coeffs(f, quot), Poly::from_coeffs(f, rem))
    }

    /// Exact division; `None` when the remainder is nonzero.
    pub fn div_exact(f: &F, a: &Self, b: &Self) -> Option<Self> {
        let (q, r) = Poly::divmod(f, a, b);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    /// Monic gcd via Euclid. `gcd(0, 0) = 0`.
    pub fn gcd(f: &F, a: &Self, b: &Self) -> Self {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = Poly::divmod(f, &x, &y);
            x = y;
            y = r;
        }
        x.into_monic(f)
    }

    /// Scale so the leading coefficient is one.
    pub fn into_monic(self, f: &F) -> Self {
        if self.is_zero() {
            return self;
        }
        let li = f.inv(&self.leading_coeff(f)).expect("nonzero leading coefficient");
        Poly::scale(f, &self, &li)
    }

    /// Horner evaluation.
    pub fn eval(&self, f: &F, x: &F::Elem) -> F::Elem {
        let mut acc = f.zero();
        for c in self.coeffs.iter().rev() {
            acc = f.add(&f.mul(&acc, x), c);
        }
        acc
    }
}

/// Lagrange interpolation through distinct sample points.
pub fn interpolate<F: Field>(f: &F, points: &[(F::Elem, F::Elem)]) -> Poly<F> {
    let mut acc = Poly::zero();
    for (i, (xi, yi)) in points.iter().enumerate() {
        if f.is_zero(yi) {
            continue;
        }
        let mut basis = Poly::constant(f, yi.clone());
        for (j, (xj, _)) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            let dx = f.sub(xi, xj);
            let dxi = f.inv(&dx).expect("interpolation points must be distinct");
            // basis *= (t - xj) / (xi - xj)
            let lin = Poly::from_coeffs(f, vec![f.mul(&f.neg(xj), &dxi), dxi]);
            basis = Poly::mul(f, &basis, &lin);
        }
        acc = Poly::add(f, &acc, &basis);
    }
    acc
}

/// Reduced rational function `num/den` with a monic denominator.
#[derive(Clone, PartialEq, Debug)]
pub struct RatFn<F: Field> {
    num: Poly<F>,
    den: Poly<F>,
}

/// Error for operations requiring proper (degree at most zero) inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotProper;

impl fmt::Display for NotProper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "value has positive degree")
    }
}

impl std::error::Error for NotProper {}

impl<F: Field> RatFn<F> {
    /// Build and canonicalize `num/den`. Panics if `den` is zero.
    pub fn new(f: &F, num: Poly<F>, den: Poly<F>) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFn { num, den: Poly::one(f) };
        }
        let g = Poly::gcd(f, &num, &den);
        let num = Poly::div_exact(f, &num, &g).expect("gcd divides");
        let den = Poly::div_exact(f, &den, &g).expect("gcd divides");
        let li = f.inv(&den.leading_coeff(f)).expect("nonzero denominator");
        RatFn { num: Poly::scale(f, &num, &li), den: den.into_monic(f) }
    }

    pub fn from_poly(f: &F, p: Poly<F>) -> Self {
        RatFn { num: p, den: Poly::one(f) }
    }

    pub fn zero(f: &F) -> Self {
        RatFn { num: Poly::zero(), den: Poly::one(f) }
    }

    pub fn one(f: &F) -> Self {
        RatFn { num: Poly::one(f), den: Poly::one(f) }
    }

    pub fn constant(f: &F, c: F::Elem) -> Self {
        RatFn { num: Poly::constant(f, c), den: Poly::one(f) }
    }

    /// `t^k` for any sign of `k`.
    pub fn t_power(f: &F, k: i64) -> Self {
        if k >= 0 {
            RatFn { num: Poly::monomial(f, f.one(), k as usize), den: Poly::one(f) }
        } else {
            RatFn { num: Poly::one(f), den: Poly::monomial(f, f.one(), (-k) as usize) }
        }
    }

    pub fn num(&self) -> &Poly<F> {
        &self.num
    }

    pub fn den(&self) -> &Poly<F> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn deg(&self) -> Deg {
        match (self.num.deg(), self.den.deg()) {
            (Deg::Fin(a), Deg::Fin(b)) => Deg::Fin(a - b),
            _ => Deg::NegInf,
        }
    }

    pub fn is_proper(&self) -> bool {
        self.deg() <= Deg::Fin(0)
    }

    pub fn add(f: &F, a: &Self, b: &Self) -> Self {
        let num = Poly::add(
            f,
            &Poly::mul(f, &a.num, &b.den),
            &Poly::mul(f, &b.num, &a.den),
        );
        RatFn::new(f, num, Poly::mul(f, &a.den, &b.den))
    }

    pub fn neg(f: &F, a: &Self) -> Self {
        RatFn { num: Poly::neg(f, &a.num), den: a.den.clone() }
    }

    pub fn sub(f: &F, a: &Self, b: &Self) -> Self {
        RatFn::add(f, a, &RatFn::neg(f, b))
    }

    pub fn mul(f: &F, a: &Self, b: &Self) -> Self {
        RatFn::new(
            f,
            Poly::mul(f, &a.num, &b.num),
            Poly::mul(f, &a.den, &b.den),
        )
    }

    /// `a / b`; `None` when `b` is zero.
    pub fn div(f: &F, a: &Self, b: &Self) -> Option<Self> {
        if b.is_zero() {
            return None;
        }
        Some(RatFn::new(
            f,
            Poly::mul(f, &a.num, &b.den),
            Poly::mul(f, &a.den, &b.num),
        ))
    }

    pub fn inv(f: &F, a: &Self) -> Option<Self> {
        RatFn::div(f, &RatFn::one(f), a)
    }

    /// The unique `u` in `K` with `deg(a - u) < 0`, defined for proper `a`:
    /// the ratio of degree-matched leading coefficients.
    ///
    /// # Errors
    /// [`NotProper`] when `deg(a) > 0`.
    pub fn proper_leading(&self, f: &F) -> Result<F::Elem, NotProper> {
        match self.deg() {
            Deg::Fin(d) if d > 0 => Err(NotProper),
            Deg::Fin(d) if d == 0 => Ok(f
                .div(&self.num.leading_coeff(f), &self.den.leading_coeff(f))
                .expect("nonzero denominator")),
            _ => Ok(f.zero()),
        }
    }
}

/// Laurent polynomial: coefficients for exponents `lo, lo+1, ...`.
/// Invariant: first and last stored coefficients are nonzero (empty = zero,
/// with `lo = 0`).
#[derive(Clone, PartialEq, Debug)]
pub struct Laurent<F: Field> {
    lo: i64,
    coeffs: Vec<F::Elem>,
}

impl<F: Field> Laurent<F> {
    pub fn zero() -> Self {
        Laurent { lo: 0, coeffs: Vec::new() }
    }

    pub fn one(f: &F) -> Self {
        Laurent { lo: 0, coeffs: vec![f.one()] }
    }

    /// `c * t^k`.
    pub fn monomial(f: &F, c: F::Elem, k: i64) -> Self {
        if f.is_zero(&c) {
            Laurent::zero()
        } else {
            Laurent { lo: k, coeffs: vec![c] }
        }
    }

    /// Build from a lowest exponent and ascending coefficients, trimming
    /// zeros at both ends.
    pub fn from_parts(f: &F, mut lo: i64, mut coeffs: Vec<F::Elem>) -> Self {
        while coeffs.last().is_some_and(|c| f.is_zero(c)) {
            coeffs.pop();
        }
        let lead_zeros = coeffs.iter().take_while(|c| f.is_zero(c)).count();
        if lead_zeros > 0 {
            coeffs.drain(..lead_zeros);
            lo += lead_zeros as i64;
        }
        if coeffs.is_empty() {
            Laurent::zero()
        } else {
            Laurent { lo, coeffs }
        }
    }

    pub fn from_poly(f: &F, p: &Poly<F>) -> Self {
        Laurent::from_parts(f, 0, p.coeffs.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn deg(&self) -> Deg {
        if self.coeffs.is_empty() {
            Deg::NegInf
        } else {
            Deg::Fin(self.lo + self.coeffs.len() as i64 - 1)
        }
    }

    /// Lowest exponent with a nonzero coefficient (the `t`-adic order).
    pub fn ord(&self) -> Deg {
        if self.coeffs.is_empty() {
            Deg::NegInf
        } else {
            Deg::Fin(self.lo)
        }
    }

    pub fn coeff_at(&self, f: &F, k: i64) -> F::Elem {
        if k < self.lo {
            return f.zero();
        }
        self.coeffs
            .get((k - self.lo) as usize)
            .cloned()
            .unwrap_or_else(|| f.zero())
    }

    /// Coefficient of `t^0`; for proper values this is the leading matrix
    /// entry `a^0` in the expansion `a^0 + a^(1) t^-1 + ...`.
    pub fn coeff0(&self, f: &F) -> F::Elem {
        self.coeff_at(f, 0)
    }

    pub fn add(f: &F, a: &Self, b: &Self) -> Self {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        let lo = a.lo.min(b.lo);
        let hi = (a.lo + a.coeffs.len() as i64).max(b.lo + b.coeffs.len() as i64);
        let mut out = Vec::with_capacity((hi - lo) as usize);
        for k in lo..hi {
            out.push(f.add(&a.coeff_at(f, k), &b.coeff_at(f, k)));
        }
        Laurent::from_parts(f, lo, out)
    }

    pub fn neg(f: &F, a: &Self) -> Self {
        Laurent { lo: a.lo, coeffs: a.coeffs.iter().map(|c| f.neg(c)).collect() }
    }

    pub fn sub(f: &F, a: &Self, b: &Self) -> Self {
        Laurent::add(f, a, &Laurent::neg(f, b))
    }

    pub fn mul(f: &F, a: &Self, b: &Self) -> Self {
        if a.is_zero() || b.is_zero() {
            return Laurent::zero();
        }
        let mut out = vec![f.zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, ai) in a.coeffs.iter().enumerate() {
            if f.is_zero(ai) {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                out[i + j] = f.add(&out[i + j], &f.mul(ai, bj));
            }
        }
        Laurent::from_parts(f, a.lo + b.lo, out)
    }

    pub fn scale(f: &F, a: &Self, c: &F::Elem) -> Self {
        Laurent::from_parts(f, a.lo, a.coeffs.iter().map(|x| f.mul(x, c)).collect())
    }

    /// Multiply by `t^k` (either sign).
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            Laurent::zero()
        } else {
            Laurent { lo: self.lo + k, coeffs: self.coeffs.clone() }
        }
    }

    /// Convert to a rational function (denominator a power of `t`).
    pub fn to_ratfn(&self, f: &F) -> RatFn<F> {
        let p = Poly::from_coeffs(f, self.coeffs.clone());
        let base = RatFn::from_poly(f, p);
        RatFn::mul(f, &base, &RatFn::t_power(f, self.lo))
    }

    /// Substitute a field value for `t`. `None` if `x = 0` while negative
    /// exponents are present.
    pub fn eval(&self, f: &F, x: &F::Elem) -> Option<F::Elem> {
        if self.is_zero() {
            return Some(f.zero());
        }
        let p = Poly::from_coeffs(f, self.coeffs.clone());
        let v = p.eval(f, x);
        if self.lo >= 0 {
            let mut shift = f.one();
            for _ in 0..self.lo {
                shift = f.mul(&shift, x);
            }
            Some(f.mul(&v, &shift))
        } else {
            let xi = f.inv(x)?;
            let mut shift = f.one();
            for _ in 0..(-self.lo) {
                shift = f.mul(&shift, &xi);
            }
            Some(f.mul(&v, &shift))
        }
    }
}

// ---------------------------------------------------------------------------
// Text grammar
// ---------------------------------------------------------------------------

/// Parse error with a byte offset into the source string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        ParseError { offset, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at offset {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for ParseError {}

impl From<FieldError> for ParseError {
    fn from(e: FieldError) -> Self {
        ParseError::new(0, e.to_string())
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
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

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let neg = self.eat(b'-');
        if !neg {
            self.eat(b'+');
        }
        self.skip_ws();
        let digits_start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(ParseError::new(start, "expected an integer"));
        }
        let text = std::str::from_utf8(&self.src[digits_start..self.pos]).unwrap();
        let mag: i64 = text
            .parse()
            .map_err(|_| ParseError::new(digits_start, "integer out of range"))?;
        Ok(if neg { -mag } else { mag })
    }
}

/// Parse one term after its sign: `<coeff>`, `<coeff>*t^<int>`, `t^<int>`,
/// or `t`; the `*` is optional and `t` alone means exponent one.
fn parse_term<F: Field>(f: &F, lx: &mut Lexer<'_>) -> Result<(F::Elem, i64), ParseError> {
    let start = lx.pos;
    let mut coeff = f.one();
    let mut saw_coeff = false;
    match lx.peek() {
        Some(c) if c.is_ascii_digit() => {
            let num = lx.integer()?;
            if lx.eat(b'/') {
                let den = lx.integer()?;
                coeff = f
                    .from_fraction(num, den)
                    .map_err(|e| ParseError::new(start, e.to_string()))?;
            } else {
                coeff = f.from_i64(num);
            }
            saw_coeff = true;
        }
        Some(b't') => {}
        _ => return Err(ParseError::new(lx.pos, "expected a coefficient or t")),
    }
    if saw_coeff {
        lx.eat(b'*');
    }
    let exp = if lx.peek() == Some(b't') {
        lx.bump();
        if lx.eat(b'^') {
            lx.integer()?
        } else {
            1
        }
    } else {
        if !saw_coeff {
            return Err(ParseError::new(lx.pos, "expected t"));
        }
        0
    };
    Ok((coeff, exp))
}

/// Parse the Laurent text grammar: terms joined by `+`/`-`, each
/// `<coeff>`, `<coeff>*t^<int>`, `t^<int>`, or `t`; coefficients are decimal
/// integers or `a/b` fractions, exponents may be negative, whitespace is
/// ignored. Example: `3*t^2 - 1 + 2*t^-1`.
pub fn parse_laurent<F: Field>(f: &F, src: &str) -> Result<Laurent<F>, ParseError> {
    let mut lx = Lexer::new(src);
    let mut acc = Laurent::zero();
    let mut first = true;
    loop {
        let sign = if lx.eat(b'+') {
            false
        } else if lx.eat(b'-') {
            true
        } else if first {
            false
        } else if lx.peek().is_none() {
            break;
        } else {
            return Err(ParseError::new(lx.pos, "expected + or - between terms"));
        };
        if first && lx.peek().is_none() {
            return Err(ParseError::new(lx.pos, "empty input"));
        }
        let (c, e) = parse_term(f, &mut lx)?;
        let c = if sign { f.neg(&c) } else { c };
        acc = Laurent::add(f, &acc, &Laurent::monomial(f, c, e));
        first = false;
        if lx.peek().is_none() {
            break;
        }
    }
    Ok(acc)
}

/// Parse a polynomial: the Laurent grammar restricted to exponents `>= 0`.
pub fn parse_poly<F: Field>(f: &F, src: &str) -> Result<Poly<F>, ParseError> {
    let l = parse_laurent(f, src)?;
    if l.is_zero() {
        return Ok(Poly::zero());
    }
    if l.lo < 0 {
        return Err(ParseError::new(0, "negative exponent in a polynomial"));
    }
    let mut coeffs = vec![f.zero(); l.lo as usize];
    coeffs.extend(l.coeffs.iter().cloned());
    Ok(Poly::from_coeffs(f, coeffs))
}

/// Parse a rational function: either a Laurent string or the quotient form
/// `(<poly>)/(<poly>)`.
pub fn parse_ratfn<F: Field>(f: &F, src: &str) -> Result<RatFn<F>, ParseError> {
    let trimmed = src.trim();
    if let Some(rest) = trimmed.strip_prefix('(') {
        let close = rest.find(")/(").ok_or_else(|| {
            ParseError::new(0, "quotient form must be (<poly>)/(<poly>)")
        })?;
        let num_src = &rest[..close];
        let den_src = rest[close + 3..]
            .strip_suffix(')')
            .ok_or_else(|| ParseError::new(src.len(), "missing closing parenthesis"))?;
        let num = parse_poly(f, num_src)?;
        let den = parse_poly(f, den_src)?;
        if den.is_zero() {
            return Err(ParseError::new(0, "zero denominator"));
        }
        Ok(RatFn::new(f, num, den))
    } else {
        Ok(parse_laurent(f, trimmed)?.to_ratfn(f))
    }
}

/// Render a Laurent polynomial in the text grammar, highest exponent first.
pub fn fmt_laurent<F: Field>(f: &F, l: &Laurent<F>) -> String {
    if l.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (idx, c) in l.coeffs.iter().enumerate().rev() {
        if f.is_zero(c) {
            continue;
        }
        let e = l.lo + idx as i64;
        let cs = f.fmt_elem(c);
        let (neg, mag) = match cs.strip_prefix('-') {
            Some(rest) => (true, rest.to_string()),
            None => (false, cs),
        };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mag_is_one = mag == "1";
        match (e, mag_is_one) {
            (0, _) => out.push_str(&mag),
            (1, true) => out.push('t'),
            (1, false) => {
                out.push_str(&mag);
                out.push_str("*t");
            }
            (_, true) => out.push_str(&format!("t^{e}")),
            (_, false) => out.push_str(&format!("{mag}*t^{e}")),
        }
    }
    out
}

/// Render a polynomial in the text grammar.
pub fn fmt_poly<F: Field>(f: &F, p: &Poly<F>) -> String {
    fmt_laurent(f, &Laurent::from_poly(f, p))
}

/// Render a rational function: a Laurent string when the denominator is a
/// power of `t`, otherwise the quotient form.
pub fn fmt_ratfn<F: Field>(f: &F, r: &RatFn<F>) -> String {
    let den = r.den();
    let t_power = den.coeffs.len() >= 1
        && den
            .coeffs
            .iter()
            .take(den.coeffs.len() - 1)
            .all(|c| f.is_zero(c));
    if r.is_zero() {
        return "0".to_string();
    }
    if t_power {
        let shift = -(den.coeffs.len() as i64 - 1);
        let l = Laurent::from_parts(f, shift, r.num().coeffs.clone());
        fmt_laurent(f, &l)
    } else {
        format!("({})/({})", fmt_poly(f, r.num()), fmt_poly(f, den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{GfP, Rationals};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q() -> Rationals {
        Rationals
    }

    #[test]
    fn deg_sentinel_ordering() {
        assert!(Deg::NegInf < Deg::Fin(i64::MIN));
        assert!(Deg::Fin(-3) < Deg::Fin(0));
        assert_eq!(Deg::NegInf.plus(Deg::Fin(5)), Deg::NegInf);
        assert_eq!(Deg::Fin(2).plus(Deg::Fin(3)), Deg::Fin(5));
    }

    #[test]
    fn poly_degree_examples() {
        let f = q();
        let p = parse_poly(&f, "t^2 + 1").unwrap();
        assert_eq!(p.deg(), Deg::Fin(2));
        assert_eq!(Poly::<Rationals>::zero().deg(), Deg::NegInf);
    }

    #[test]
    fn ratfn_degree_after_reduction() {
        let f = q();
        // (t^3 + t)/(t - 1) is already reduced; degree 3 - 1 = 2.
        let num = parse_poly(&f, "t^3 + t").unwrap();
        let den = parse_poly(&f, "t - 1").unwrap();
        let r = RatFn::new(&f, num, den);
        assert_eq!(r.deg(), Deg::Fin(2));
    }

    #[test]
    fn proper_leading_examples() {
        let f = q();
        // (2t+1)/(t+3) -> 2
        let r = RatFn::new(
            &f,
            parse_poly(&f, "2*t + 1").unwrap(),
            parse_poly(&f, "t + 3").unwrap(),
        );
        assert_eq!(r.proper_leading(&f).unwrap(), f.from_i64(2));
        // 1/t -> 0
        let r = RatFn::t_power(&f, -1);
        assert_eq!(r.proper_leading(&f).unwrap(), f.zero());
        // constant 5 -> 5
        let r = RatFn::constant(&f, f.from_i64(5));
        assert_eq!(r.proper_leading(&f).unwrap(), f.from_i64(5));
        // t is not proper
        let r = RatFn::t_power(&f, 1);
        assert_eq!(r.proper_leading(&f), Err(NotProper));
    }

    #[test]
    fn laurent_shift_and_cancel() {
        let f = q();
        let a = parse_laurent(&f, "1 + t^-1").unwrap();
        assert_eq!(fmt_laurent(&f, &a.shift(1)), "t + 1");
        let b = parse_laurent(&f, "t^-1").unwrap();
        let t = parse_laurent(&f, "t").unwrap();
        assert_eq!(fmt_laurent(&f, &Laurent::mul(&f, &b, &t)), "1");
        let c = parse_laurent(&f, "1 + t^-2").unwrap();
        let d = parse_laurent(&f, "-1").unwrap();
        assert_eq!(fmt_laurent(&f, &Laurent::add(&f, &c, &d)), "t^-2");
    }

    #[test]
    fn grammar_round_trip() {
        let f = q();
        for src in ["3*t^2 - 1 + 2*t^-1", "t", "-t^3", "0", "1/2*t - 3/4", "5"] {
            let l = parse_laurent(&f, src).unwrap();
            let rendered = fmt_laurent(&f, &l);
            let back = parse_laurent(&f, &rendered).unwrap();
            assert_eq!(l, back, "round trip through `{rendered}` from `{src}`");
        }
        let g = GfP::new(7).unwrap();
        let l = parse_laurent(&g, "10*t^-2 - 3").unwrap();
        assert_eq!(fmt_laurent(&g, &l), "4 + 3*t^-2");
    }

    #[test]
    fn grammar_rejects_malformed_input() {
        let f = q();
        assert!(parse_laurent(&f, "").is_err());
        assert!(parse_laurent(&f, "t^").is_err());
        assert!(parse_laurent(&f, "2 +").is_err());
        assert!(parse_laurent(&f, "x").is_err());
        assert!(parse_poly(&f, "t^-1").is_err());
        assert!(parse_laurent(&f, "1/0").is_err());
    }

    #[test]
    fn divmod_and_gcd() {
        let f = q();
        let a = parse_poly(&f, "t^3 - 1").unwrap();
        let b = parse_poly(&f, "t - 1").unwrap();
        let (qt, r) = Poly::divmod(&f, &a, &b);
        assert!(r.is_zero());
        assert_eq!(fmt_poly(&f, &qt), "t^2 + t + 1");
        let g = Poly::gcd(&f, &a, &b);
        assert_eq!(fmt_poly(&f, &g), "t - 1");
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let f = GfP::new(10007).unwrap();
        let p = parse_poly(&f, "3*t^4 + t + 9").unwrap();
        let pts: Vec<(u64, u64)> = (0..6u64).map(|x| (x, p.eval(&f, &x))).collect();
        let back = interpolate(&f, &pts);
        assert_eq!(back, p);
    }

    #[test]
    fn valuation_laws_on_random_samples() {
        let f = GfP::new(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let a = random_laurent(&f, &mut rng);
            let b = random_laurent(&f, &mut rng);
            // deg(ab) = deg a + deg b
            assert_eq!(Laurent::mul(&f, &a, &b).deg(), a.deg().plus(b.deg()));
            // deg(a+b) <= max, equality when degrees differ
            let s = Laurent::add(&f, &a, &b);
            assert!(s.deg() <= a.deg().max(b.deg()));
            if a.deg() != b.deg() {
                assert_eq!(s.deg(), a.deg().max(b.deg()));
            }
        }
    }

    fn random_laurent<F: Field, R: rand::Rng>(f: &F, rng: &mut R) -> Laurent<F> {
        let lo = rng.gen_range(-3..=3);
        let len = rng.gen_range(0..=4);
        let coeffs = (0..len).map(|_| f.sample(rng)).collect();
        Laurent::from_parts(f, lo, coeffs)
    }

    #[test]
    fn ratfn_field_ops() {
        let f = q();
        let a = parse_ratfn(&f, "(t + 1)/(t)").unwrap();
        let b = parse_ratfn(&f, "t^-1").unwrap();
        let d = RatFn::sub(&f, &a, &b);
        assert_eq!(d, RatFn::one(&f));
        let m = RatFn::mul(&f, &a, &RatFn::inv(&f, &a).unwrap());
        assert_eq!(m, RatFn::one(&f));
        // t-power denominators render back in Laurent form
        assert_eq!(fmt_ratfn(&f, &a), "1 + t^-1");
        let c = parse_ratfn(&f, "(t^2 + 2)/(t + 1)").unwrap();
        assert_eq!(c.deg(), Deg::Fin(1));
        assert_eq!(fmt_ratfn(&f, &c), "(t^2 + 2)/(t + 1)");
    }

    #[test]
    fn laurent_eval_matches_ratfn() {
        let f = GfP::new(10007).unwrap();
        let l = parse_laurent(&f, "3*t^2 - 1 + 2*t^-1").unwrap();
        let x = 17u64;
        let direct = l.eval(&f, &x).unwrap();
        let expected = {
            let three = f.from_i64(3);
            let x2 = f.mul(&x, &x);
            let xi = f.inv(&x).unwrap();
            f.add(
                &f.sub(&f.mul(&three, &x2), &f.one()),
                &f.mul(&f.from_i64(2), &xi),
            )
        };
        assert_eq!(direct, expected);
        assert_eq!(l.eval(&f, &0), None);
    }
}

//! Exact scalar kernel.
//!
//! Every value the moment pipeline produces is a rational number, but the
//! intermediate Gamma and Beta values at half-integer arguments carry powers
//! of `sqrt(pi)`. [`PiScalar`] keeps those powers symbolic so that the final
//! cancellation can be checked instead of assumed.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
pub type Rat = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("cannot parse rational {0:?}")]
    Parse(String),
    #[error("value is not rational: carries pi^({grade}/2)")]
    NotRational { grade: i32 },
    #[error("division by a non-monomial or zero pi-graded value")]
    BadDivisor,
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or `"p"` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, ExactError> {
    let s = s.trim();
    let bad = || ExactError::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(n, d))
        }
        None => s.parse::<BigInt>().map(Rat::from_integer).map_err(|_| bad()),
    }
}

/// Formats a rational as `"p/q"`, or `"p"` when integral.
pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Ratio::to_f64 only fails on overflow.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// A half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Half(i64);

impl Half {
    pub const fn from_twice(twice: i64) -> Self {
        Half(twice)
    }

    pub const fn int(n: i64) -> Self {
        Half(2 * n)
    }

    /// `n + 1/2`.
    pub const fn plus_half(n: i64) -> Self {
        Half(2 * n + 1)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_rat(self) -> Rat {
        rat(self.0, 2)
    }

    pub fn from_rat(r: &Rat) -> Result<Self, ExactError> {
        let twice = r * int(2);
        if !twice.is_integer() {
            return Err(ExactError::Domain(format!("{r} is not a half-integer")));
        }
        twice
            .to_integer()
            .to_i64()
            .map(Half)
            .ok_or_else(|| ExactError::Domain(format!("{r} is out of range")))
    }
}

impl Add for Half {
    type Output = Half;
    fn add(self, rhs: Half) -> Half {
        Half(self.0 + rhs.0)
    }
}

impl Sub for Half {
    type Output = Half;
    fn sub(self, rhs: Half) -> Half {
        Half(self.0 - rhs.0)
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Exponents of a monomial in several variables; each exponent must exceed -1
/// so the monomial is integrable near the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExponentVector<const N: usize>([Half; N]);

impl<const N: usize> ExponentVector<N> {
    pub fn new(exponents: [Half; N]) -> Result<Self, ExactError> {
        if let Some(bad) = exponents.iter().find(|e| e.twice() <= -2) {
            return Err(ExactError::Domain(format!(
                "exponent {bad} is not integrable (must exceed -1)"
            )));
        }
        Ok(ExponentVector(exponents))
    }

    pub fn exponents(&self) -> &[Half; N] {
        &self.0
    }
}

/// A finite sum `sum_k c_k * pi^(k/2)` with rational `c_k`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PiScalar {
    terms: BTreeMap<i32, Rat>,
}

impl PiScalar {
    pub fn zero() -> Self {
        PiScalar::default()
    }

    pub fn one() -> Self {
        PiScalar::rational(Rat::one())
    }

    pub fn rational(r: Rat) -> Self {
        PiScalar::monomial(r, 0)
    }

    /// `coeff * pi^(grade/2)`.
    pub fn monomial(coeff: Rat, grade: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(grade, coeff);
        }
        PiScalar { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `pi^(grade/2)`.
    pub fn coeff(&self, grade: i32) -> Rat {
        self.terms.get(&grade).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Rat)> {
        self.terms.iter().map(|(g, c)| (*g, c))
    }

    pub fn is_rational(&self) -> bool {
        self.terms.keys().all(|&g| g == 0)
    }

    /// The value as a plain rational, or an error naming the first
    /// surviving pi grade.
    pub fn to_rational(&self) -> Result<Rat, ExactError> {
        match self.terms.keys().find(|&&g| g != 0) {
            Some(&grade) => Err(ExactError::NotRational { grade }),
            None => Ok(self.coeff(0)),
        }
    }

    pub fn scale(&self, r: &Rat) -> PiScalar {
        if r.is_zero() {
            return PiScalar::zero();
        }
        PiScalar {
            terms: self.terms.iter().map(|(g, c)| (*g, c * r)).collect(),
        }
    }

    /// Divides by a single-term value `c * pi^(k/2)`.
    pub fn div_monomial(&self, divisor: &PiScalar) -> Result<PiScalar, ExactError> {
        if divisor.terms.len() != 1 {
            return Err(ExactError::BadDivisor);
        }
        let (&grade, coeff) = divisor.terms.iter().next().expect("one term");
        let inv = coeff.recip();
        Ok(PiScalar {
            terms: self
                .terms
                .iter()
                .map(|(g, c)| (g - grade, c * &inv))
                .collect(),
        })
    }

    pub fn to_f64(&self) -> f64 {
        let root_pi = std::f64::consts::PI.sqrt();
        self.terms
            .iter()
            .map(|(g, c)| rat_to_f64(c) * root_pi.powi(*g))
            .sum()
    }

    fn add_term(&mut self, grade: i32, coeff: Rat) {
        let entry = self.terms.entry(grade).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&grade);
        }
    }
}

impl From<Rat> for PiScalar {
    fn from(r: Rat) -> Self {
        PiScalar::rational(r)
    }
}

impl Add<&PiScalar> for &PiScalar {
    type Output = PiScalar;
    fn add(self, rhs: &PiScalar) -> PiScalar {
        let mut out = self.clone();
        for (g, c) in &rhs.terms {
            out.add_term(*g, c.clone());
        }
        out
    }
}

impl Add for PiScalar {
    type Output = PiScalar;
    fn add(self, rhs: PiScalar) -> PiScalar {
        &self + &rhs
    }
}

impl Neg for &PiScalar {
    type Output = PiScalar;
    fn neg(self) -> PiScalar {
        PiScalar {
            terms: self.terms.iter().map(|(g, c)| (*g, -c)).collect(),
        }
    }
}

impl Neg for PiScalar {
    type Output = PiScalar;
    fn neg(self) -> PiScalar {
        -&self
    }
}

impl Sub<&PiScalar> for &PiScalar {
    type Output = PiScalar;
    fn sub(self, rhs: &PiScalar) -> PiScalar {
        self + &(-rhs)
    }
}

impl Sub for PiScalar {
    type Output = PiScalar;
    fn sub(self, rhs: PiScalar) -> PiScalar {
        &self - &rhs
    }
}

impl Mul<&PiScalar> for &PiScalar {
    type Output = PiScalar;
    fn mul(self, rhs: &PiScalar) -> PiScalar {
        let mut out = PiScalar::zero();
        for (ga, ca) in &self.terms {
            for (gb, cb) in &rhs.terms {
                out.add_term(ga + gb, ca * cb);
            }
        }
        out
    }
}

impl Mul for PiScalar {
    type Output = PiScalar;
    fn mul(self, rhs: PiScalar) -> PiScalar {
        &self * &rhs
    }
}

impl fmt::Display for PiScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (g, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match g {
                0 => write!(f, "{}", format_rat(c))?,
                g if g % 2 == 0 => write!(f, "{}*pi^{}", format_rat(c), g / 2)?,
                g => write!(f, "{}*pi^({}/2)", format_rat(c), g)?,
            }
        }
        Ok(())
    }
}

fn factorial_big(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `n!! = n (n-2) (n-4) ...`, with `0!! = (-1)!! = 1`.
pub fn double_factorial(n: i64) -> Result<Rat, ExactError> {
    if n < -1 {
        return Err(ExactError::Domain(format!("double factorial of {n}")));
    }
    let mut acc = BigInt::one();
    let mut k = n;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    Ok(Rat::from_integer(acc))
}

pub fn factorial(n: u64) -> Rat {
    Rat::from_integer(factorial_big(n))
}

// Rational part of Gamma, keyed by twice the argument. The pi grade is
// implied: 0 at integers, 1 at half-integers.
fn gamma_cache() -> &'static RwLock<HashMap<i64, Rat>> {
    static CACHE: OnceLock<RwLock<HashMap<i64, Rat>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Exact Gamma at a positive integer or half-integer.
pub fn gamma_exact(x: Half) -> Result<PiScalar, ExactError> {
    if x.twice() <= 0 {
        return Err(ExactError::Domain(format!("Gamma({x}) is not finite")));
    }
    let grade = if x.is_integer() { 0 } else { 1 };
    if let Some(c) = gamma_cache().read().expect("gamma cache").get(&x.twice()) {
        return Ok(PiScalar::monomial(c.clone(), grade));
    }
    let coeff = if x.is_integer() {
        factorial(x.twice() as u64 / 2 - 1)
    } else {
        // Gamma(n + 1/2) = (2n-1)!! / 2^n * sqrt(pi)
        let n = (x.twice() - 1) / 2;
        double_factorial(2 * n - 1)? / Rat::from_integer(BigInt::one() << n as usize)
    };
    gamma_cache()
        .write()
        .expect("gamma cache")
        .insert(x.twice(), coeff.clone());
    Ok(PiScalar::monomial(coeff, grade))
}

/// Rising factorial `a (a+1) ... (a+n-1)`.
pub fn pochhammer(a: &Rat, n: u32) -> Rat {
    let mut acc = Rat::one();
    let mut term = a.clone();
    for _ in 0..n {
        acc *= &term;
        term += Rat::one();
    }
    acc
}

/// `int_{-1}^{1} z^(2p) (1 - z^2)^(q/2) dz = B(p + 1/2, q/2 + 1)`.
///
/// Odd powers of `z` integrate to zero and are the caller's business.
pub fn beta_line_integral(even_power: u32, half_power: u32) -> PiScalar {
    let p = even_power as i64;
    let q = half_power as i64;
    let a = gamma_exact(Half::plus_half(p)).expect("positive argument");
    let b = gamma_exact(Half::from_twice(q + 2)).expect("positive argument");
    let c = gamma_exact(Half::from_twice(2 * p + q + 3)).expect("positive argument");
    (&a * &b).div_monomial(&c).expect("Gamma is a monomial")
}

/// Dirichlet integral of `r1^a1 r2^a2 r3^a3 r4^a4` over the unit simplex
/// `r1 + r2 + r3 + r4 = 1` (three-dimensional measure).
pub fn dirichlet_simplex_integral(exponents: [Half; 4]) -> Result<PiScalar, ExactError> {
    let ev = ExponentVector::new(exponents)?;
    let one = Half::int(1);
    let mut num = PiScalar::one();
    let mut total = Half::int(4);
    for &a in ev.exponents() {
        num = &num * &gamma_exact(a + one)?;
        total = total + a;
    }
    num.div_monomial(&gamma_exact(total)?)
}

/// Integer power of a rational, including negative exponents.
pub fn rat_pow(base: &Rat, exp: i32) -> Rat {
    num_traits::pow::Pow::pow(base, exp)
}

/// Largest prime factor of `|n|` by trial division.
pub fn largest_prime_factor(n: &BigInt) -> Option<u64> {
    let mut n = n.abs();
    if n <= BigInt::one() {
        return None;
    }
    let mut largest = 1u64;
    let mut p = 2u64;
    while BigInt::from(p) * BigInt::from(p) <= n {
        let bp = BigInt::from(p);
        while (&n % &bp).is_zero() {
            n = n.div_floor(&bp);
            largest = p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > BigInt::one() {
        largest = largest.max(n.to_u64()?);
    }
    Some(largest)
}

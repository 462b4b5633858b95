//! First integration stage: correlation geometry of real two-qubit states.
//!
//! Off-diagonal entries are written as correlations `z_ab = rho_ab /
//! sqrt(rho_aa rho_bb)`. Up to the factor `(rho_22 rho_33)^2`, the partial
//! transpose determinant is the polynomial `P` in six correlations and
//! `mu = sqrt(rho_11 rho_44 / (rho_22 rho_33))`. Replacing `z_ik`, `z_jl`, `z_il`
//! with partial correlations turns the feasible region into the cube
//! `[-1, 1]^6`, and integrating `J * P^m` over that cube gives the even
//! polynomial `I_m(mu)`.

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exactnum::{
    beta_line_integral, format_rat, int, parse_rat, pochhammer, rat, rat_to_f64, ExactError,
    PiScalar, Rat,
};
use crate::summation::{mean_and_std_error, NeumaierSum};

/// Largest moment order for which the hypercube integral is expanded
/// symbolically.
pub const MAX_DERIVE_ORDER: u32 = 3;
/// Term-count guard for the symbolic expansion.
pub const MAX_TERMS: usize = 10_000_000;
/// Orders covered by the coefficient fixture.
pub const TABLE_ORDERS: std::ops::RangeInclusive<u32> = 1..=9;

const FIXTURE: &str = include_str!("../data/intermediate_coefficients.txt");
pub const FIXTURE_HEADER: &str = "# hsmoments intermediate-coefficients v1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlooreError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("expansion would exceed {limit} terms (order {m})")]
    Capacity { m: u32, limit: usize },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("coefficient fixture line {line}: {message}")]
    Fixture { line: usize, message: String },
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Minimal commutative-ring surface shared by floats, exact rationals and
/// symbolic sums, so the determinant polynomial is written once.
pub trait Ring: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn from_i64(n: i64) -> Self;
}

impl Ring for f64 {
    fn from_i64(n: i64) -> Self {
        n as f64
    }
}

impl Ring for Rat {
    fn from_i64(n: i64) -> Self {
        int(n)
    }
}

/// The six pairwise correlations of a real 4x4 density matrix, indices
/// `i, j, k, l` standing for 1..4.
#[derive(Clone, Debug, PartialEq)]
pub struct Correlations<T> {
    pub z_ij: T,
    pub z_jk: T,
    pub z_kl: T,
    pub z_ik: T,
    pub z_jl: T,
    pub z_il: T,
}

/// `P`, proportional to the partial-transpose determinant.
pub fn eval_p<T: Ring>(c: &Correlations<T>, mu: &T) -> T {
    let k = T::from_i64;
    let sq = |x: &T| x.clone() * x.clone();
    let Correlations {
        z_ij,
        z_jk,
        z_kl,
        z_ik,
        z_jl,
        z_il,
    } = c;
    let mu2 = sq(mu);
    let mu3 = mu2.clone() * mu.clone();
    let mu4 = sq(&mu2);

    let quartic = k(0) - sq(z_il) * mu4;
    let cubic = k(2)
        * z_il.clone()
        * (z_ij.clone() * z_ik.clone() + z_jl.clone() * z_kl.clone())
        * mu3;
    let linear = k(2)
        * z_jk.clone()
        * (z_ij.clone() * z_jl.clone() + z_ik.clone() * z_kl.clone())
        * mu.clone();
    let constant = k(0) - sq(z_jk);
    let bracket = (sq(z_kl) - k(1)) * sq(z_ij)
        - k(2)
            * (z_il.clone() * z_jk.clone() + z_ik.clone() * z_jl.clone())
            * z_kl.clone()
            * z_ij.clone()
        + sq(z_il) * sq(z_jk)
        - sq(z_jl)
        - sq(z_kl)
        - k(2) * z_ik.clone() * z_il.clone() * z_jk.clone() * z_jl.clone()
        + sq(z_ik) * (sq(z_jl) - k(1))
        + k(1);
    quartic + cubic + linear + constant + bracket * mu2
}

/// Partial-correlation map with the square-root factors supplied by the
/// caller (`s_x = sqrt(1 - x^2)`), so the same code serves floats and the
/// symbolic expansion. Returns `(z_ik, z_jl, z_il)`.
#[allow(clippy::too_many_arguments)]
fn substitute<T: Ring>(
    z_ij: &T,
    z_jk: &T,
    z_kl: &T,
    z_ikj: &T,
    z_jlk: &T,
    z_iljk: &T,
    s: [&T; 5],
) -> (T, T, T) {
    let [s_ij, s_jk, s_kl, s_ikj, s_jlk] = s.map(Clone::clone);
    let (z_ij, z_jk, z_kl) = (z_ij.clone(), z_jk.clone(), z_kl.clone());
    let (a, b, c) = (z_ikj.clone(), z_jlk.clone(), z_iljk.clone());

    let z_ik = z_ij.clone() * z_jk.clone() + s_ij.clone() * s_jk.clone() * a.clone();
    let z_jl = z_jk.clone() * z_kl.clone() + s_jk.clone() * s_kl.clone() * b.clone();
    let z_il = z_ij.clone() * z_jk.clone() * z_kl.clone()
        + s_ij.clone() * s_jk.clone() * a.clone() * z_kl.clone()
        + z_ij * s_jk * s_kl.clone() * b.clone()
        + s_ij.clone() * s_kl.clone() * s_ikj * s_jlk * c
        - s_ij * z_jk * s_kl * a * b;
    (z_ik, z_jl, z_il)
}

/// A point of the partial-correlation cube together with `mu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationPoint {
    pub z_ij: f64,
    pub z_jk: f64,
    pub z_kl: f64,
    pub z_ikj: f64,
    pub z_jlk: f64,
    pub z_iljk: f64,
    pub mu: f64,
}

impl CorrelationPoint {
    pub fn new(coords: [f64; 6], mu: f64) -> Result<Self, BlooreError> {
        if coords.iter().any(|z| !(-1.0..=1.0).contains(z)) {
            return Err(BlooreError::Invariant(format!(
                "correlation coordinates {coords:?} leave [-1, 1]"
            )));
        }
        if !(mu > 0.0) {
            return Err(BlooreError::Invariant(format!("mu = {mu} must be positive")));
        }
        let [z_ij, z_jk, z_kl, z_ikj, z_jlk, z_iljk] = coords;
        Ok(CorrelationPoint {
            z_ij,
            z_jk,
            z_kl,
            z_ikj,
            z_jlk,
            z_iljk,
            mu,
        })
    }

    /// Recovers all six pairwise correlations.
    pub fn correlations(&self) -> Correlations<f64> {
        let (z_ik, z_jl, z_il) = to_partial_correlations(
            self.z_ij, self.z_jk, self.z_kl, self.z_ikj, self.z_jlk, self.z_iljk,
        );
        Correlations {
            z_ij: self.z_ij,
            z_jk: self.z_jk,
            z_kl: self.z_kl,
            z_ik,
            z_jl,
            z_il,
        }
    }
}

fn root(x: f64) -> f64 {
    (1.0 - x * x).max(0.0).sqrt()
}

/// Maps the partial correlations back to `(z_ik, z_jl, z_il)`.
pub fn to_partial_correlations(
    z_ij: f64,
    z_jk: f64,
    z_kl: f64,
    z_ikj: f64,
    z_jlk: f64,
    z_iljk: f64,
) -> (f64, f64, f64) {
    let s = [root(z_ij), root(z_jk), root(z_kl), root(z_ikj), root(z_jlk)];
    substitute(
        &z_ij,
        &z_jk,
        &z_kl,
        &z_ikj,
        &z_jlk,
        &z_iljk,
        [&s[0], &s[1], &s[2], &s[3], &s[4]],
    )
}

/// `P` evaluated at a point of the partial-correlation cube.
pub fn eval_p_tilde(point: &CorrelationPoint) -> f64 {
    eval_p(&point.correlations(), &point.mu)
}

/// Jacobian of the map from partial correlations to correlations.
pub fn jacobian(point: &CorrelationPoint) -> f64 {
    let one_minus = |x: f64| 1.0 - x * x;
    one_minus(point.z_ij)
        * one_minus(point.z_jk)
        * one_minus(point.z_kl)
        * root(point.z_ikj)
        * root(point.z_jlk)
}

/// Even polynomial `sum_j coeffs[j] mu^(2j)` of degree `4m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvenPoly {
    m: u32,
    coeffs: Vec<Rat>,
}

impl EvenPoly {
    pub fn new(m: u32, coeffs: Vec<Rat>) -> Result<Self, BlooreError> {
        if coeffs.len() != 2 * m as usize + 1 {
            return Err(BlooreError::Invariant(format!(
                "order {m} needs {} coefficients, got {}",
                2 * m + 1,
                coeffs.len()
            )));
        }
        Ok(EvenPoly { m, coeffs })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Entry `j` multiplies `mu^(2j)`.
    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn eval(&self, mu: &Rat) -> Rat {
        let mu2 = mu * mu;
        self.coeffs
            .iter()
            .rev()
            .fold(Rat::zero(), |acc, c| acc * &mu2 + c)
    }

    pub fn eval_f64(&self, mu: f64) -> f64 {
        let mu2 = mu * mu;
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * mu2 + rat_to_f64(c))
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.coeffs.len();
        (0..n).all(|j| self.coeffs[j] == self.coeffs[n - 1 - j])
    }

    /// Palindromic coefficients and constant term of sign `(-1)^m`.
    pub fn check_invariants(&self) -> Result<(), BlooreError> {
        if !self.is_symmetric() {
            return Err(BlooreError::Invariant(format!(
                "I_{} coefficients are not symmetric",
                self.m
            )));
        }
        let c0 = &self.coeffs[0];
        let expect_negative = self.m % 2 == 1;
        if c0.is_zero() || c0.is_negative() != expect_negative {
            return Err(BlooreError::Invariant(format!(
                "I_{} constant term {} has the wrong sign",
                self.m,
                format_rat(c0)
            )));
        }
        Ok(())
    }
}

/// Monomial in the six cube coordinates, the five root factors
/// `(1 - z^2)^(1/2)` that the map and jacobian introduce, and `mu`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    z: [u8; 6],
    root: [u8; 5],
    mu: u8,
}

impl Monomial {
    const ONE: Monomial = Monomial {
        z: [0; 6],
        root: [0; 5],
        mu: 0,
    };

    fn times(&self, other: &Monomial) -> Monomial {
        let mut out = *self;
        for i in 0..6 {
            out.z[i] += other.z[i];
        }
        for i in 0..5 {
            out.root[i] += other.root[i];
        }
        out.mu += other.mu;
        out
    }

    pub fn mu_power(&self) -> u8 {
        self.mu
    }
}

/// Sparse polynomial over [`Monomial`]s with exact coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseMonomialSum {
    terms: HashMap<Monomial, Rat>,
}

impl SparseMonomialSum {
    fn constant(c: Rat) -> Self {
        let mut terms = HashMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::ONE, c);
        }
        SparseMonomialSum { terms }
    }

    fn single(m: Monomial) -> Self {
        let mut terms = HashMap::new();
        terms.insert(m, Rat::one());
        SparseMonomialSum { terms }
    }

    /// Cube coordinate `index` (0..6).
    fn coordinate(index: usize) -> Self {
        let mut m = Monomial::ONE;
        m.z[index] = 1;
        Self::single(m)
    }

    /// `sqrt(1 - z^2)` for cube coordinate `index` (0..5).
    fn root_factor(index: usize) -> Self {
        let mut m = Monomial::ONE;
        m.root[index] = 1;
        Self::single(m)
    }

    fn mu() -> Self {
        let mut m = Monomial::ONE;
        m.mu = 1;
        Self::single(m)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(map: &mut HashMap<Monomial, Rat>, m: Monomial, c: Rat) {
        use std::collections::hash_map::Entry;
        match map.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if !c.is_zero() {
                    e.insert(c);
                }
            }
        }
    }

    /// Product that refuses to start when the pairwise work would exceed
    /// `limit` terms.
    pub fn checked_mul(&self, rhs: &Self, limit: usize) -> Option<Self> {
        if self.len().saturating_mul(rhs.len()) > limit.saturating_mul(8) {
            return None;
        }
        let mut terms = HashMap::with_capacity(self.len().max(rhs.len()) * 4);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                Self::add_term(&mut terms, ma.times(mb), ca * cb);
            }
            if terms.len() > limit {
                return None;
            }
        }
        Some(SparseMonomialSum { terms })
    }

    fn map_monomials(&self, f: impl Fn(&Monomial) -> Monomial) -> Self {
        SparseMonomialSum {
            terms: self.terms.iter().map(|(m, c)| (f(m), c.clone())).collect(),
        }
    }

    /// Integrates every monomial over `[-1, 1]^6`, collecting by power of
    /// `mu`. Odd powers of any coordinate vanish by symmetry.
    pub fn integrate_cube(&self) -> BTreeMap<u8, PiScalar> {
        let mut beta_cache: HashMap<(u8, u8), (Rat, i32)> = HashMap::new();
        let mut beta = |p: u8, q: u8| {
            beta_cache
                .entry((p, q))
                .or_insert_with(|| {
                    let v = beta_line_integral(p as u32, q as u32);
                    let (g, c) = v.terms().next().expect("nonzero Beta value");
                    (c.clone(), g)
                })
                .clone()
        };
        let mut by_mu: BTreeMap<u8, BTreeMap<i32, Rat>> = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.z.iter().any(|e| e % 2 == 1) {
                continue;
            }
            let mut coeff = c.clone();
            let mut grade = 0;
            for var in 0..6 {
                let q = if var < 5 { m.root[var] } else { 0 };
                let (bc, bg) = beta(m.z[var] / 2, q);
                coeff *= bc;
                grade += bg;
            }
            *by_mu
                .entry(m.mu)
                .or_default()
                .entry(grade)
                .or_insert_with(Rat::zero) += coeff;
        }
        by_mu
            .into_iter()
            .map(|(mu, grades)| {
                let v = grades
                    .into_iter()
                    .fold(PiScalar::zero(), |acc, (g, c)| acc + PiScalar::monomial(c, g));
                (mu, v)
            })
            .filter(|(_, v)| !v.is_zero())
            .collect()
    }
}

impl Add for SparseMonomialSum {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (m, c) in rhs.terms {
            Self::add_term(&mut self.terms, m, c);
        }
        self
    }
}

impl Sub for SparseMonomialSum {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (m, c) in rhs.terms {
            Self::add_term(&mut self.terms, m, -c);
        }
        self
    }
}

impl Mul for SparseMonomialSum {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(&rhs, usize::MAX / 16)
            .expect("unbounded product")
    }
}

impl Ring for SparseMonomialSum {
    fn from_i64(n: i64) -> Self {
        SparseMonomialSum::constant(int(n))
    }
}

/// `P` after the partial-correlation substitution, as an exact sparse
/// polynomial.
pub fn p_tilde_symbolic() -> &'static SparseMonomialSum {
    static P_TILDE: OnceLock<SparseMonomialSum> = OnceLock::new();
    P_TILDE.get_or_init(|| {
        let z: Vec<SparseMonomialSum> = (0..6).map(SparseMonomialSum::coordinate).collect();
        let s: Vec<SparseMonomialSum> = (0..5).map(SparseMonomialSum::root_factor).collect();
        let (z_ik, z_jl, z_il) =
            substitute(&z[0], &z[1], &z[2], &z[3], &z[4], &z[5], [&s[0], &s[1], &s[2], &s[3], &s[4]]);
        let corr = Correlations {
            z_ij: z[0].clone(),
            z_jk: z[1].clone(),
            z_kl: z[2].clone(),
            z_ik,
            z_jl,
            z_il,
        };
        eval_p(&corr, &SparseMonomialSum::mu())
    })
}

/// `27 / (32 pi^2)`, the reciprocal of the cube volume under the jacobian.
fn cube_normalization() -> PiScalar {
    PiScalar::monomial(rat(27, 32), -4)
}

/// Derives `I_m` from scratch by expanding `J * P^m` and integrating each
/// monomial exactly.
pub fn derive_intermediate_exact(m: u32) -> Result<EvenPoly, BlooreError> {
    if m > MAX_DERIVE_ORDER {
        return Err(BlooreError::Capacity {
            m,
            limit: MAX_TERMS,
        });
    }
    let p = p_tilde_symbolic();
    let mut power = SparseMonomialSum::constant(Rat::one());
    for _ in 0..m {
        power = power
            .checked_mul(p, MAX_TERMS)
            .ok_or(BlooreError::Capacity {
                m,
                limit: MAX_TERMS,
            })?;
    }
    // J = (1 - z_ij^2)(1 - z_jk^2)(1 - z_kl^2) sqrt(1 - z_ikj^2) sqrt(1 - z_jlk^2)
    let integrand = power.map_monomials(|mono| {
        let mut out = *mono;
        for (r, add) in out.root.iter_mut().zip([2u8, 2, 2, 1, 1]) {
            *r += add;
        }
        out
    });
    let norm = cube_normalization();
    let mut coeffs = vec![Rat::zero(); 2 * m as usize + 1];
    for (mu_power, value) in integrand.integrate_cube() {
        let value = (&value * &norm).to_rational()?;
        if mu_power % 2 == 1 || mu_power as usize > 4 * m as usize {
            return Err(BlooreError::Invariant(format!(
                "I_{m} has a nonzero mu^{mu_power} term"
            )));
        }
        coeffs[mu_power as usize / 2] = value;
    }
    let poly = EvenPoly::new(m, coeffs)?;
    poly.check_invariants()?;
    Ok(poly)
}

/// Closed-form coefficient of `mu^(2j)` (and of `mu^(4m-2j)`) in `I_m`,
/// for `j` in `0..=3`.
pub fn coefficient_c(j: u32, m: u32) -> Result<Rat, BlooreError> {
    let mm = int(m as i64);
    let sign = if m % 2 == 0 { int(1) } else { int(-1) };
    // Horner evaluation of the integer-coefficient numerator polynomials.
    let horner = |coeffs: &[i64]| {
        coeffs
            .iter()
            .fold(Rat::zero(), |acc, &c| acc * &mm + int(c))
    };
    let (numerator, scale) = match j {
        0 => (int(3), 4),
        1 => (int(3) * &mm * horner(&[8, -10, -15]), 100),
        2 => (
            int(3) * &mm * horner(&[384, -448, 1240, -52, -2034, -315]),
            19600,
        ),
        3 => (
            (&mm - int(1)) * &mm * horner(&[5120, -14080, 11072, -68848, 75728, 119288, -36660, -4725]),
            529200,
        ),
        _ => {
            return Err(BlooreError::Unsupported(format!(
                "closed form for C_{} is not available (j <= 3)",
                2 * j
            )))
        }
    };
    // Denominator: (m + (1 - 2j)/2)_(j + 2), poles at half-integers only.
    let base = &mm + rat(1 - 2 * j as i64, 2);
    let denominator = int(scale) * pochhammer(&base, j + 2);
    Ok(sign * numerator / denominator)
}

fn fixture_error(line: usize, message: impl Into<String>) -> BlooreError {
    BlooreError::Fixture {
        line,
        message: message.into(),
    }
}

/// Parses the versioned coefficient fixture format.
///
/// Records are `m j numerator denominator`; missing lower-half entries are
/// completed from `coeffs[j] == coeffs[2m - j]`.
pub fn parse_coefficient_fixture(text: &str) -> Result<BTreeMap<u32, EvenPoly>, BlooreError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.find(|(_, l)| !l.is_empty()) {
        Some((_, l)) if l == FIXTURE_HEADER => {}
        Some((n, _)) => return Err(fixture_error(n, format!("expected header {FIXTURE_HEADER:?}"))),
        None => return Err(fixture_error(0, "empty fixture")),
    }
    let mut raw: BTreeMap<u32, BTreeMap<usize, (usize, Rat)>> = BTreeMap::new();
    for (n, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(fixture_error(n, "expected `m j numerator denominator`"));
        }
        let m: u32 = fields[0].parse().map_err(|_| fixture_error(n, "bad order m"))?;
        let j: usize = fields[1].parse().map_err(|_| fixture_error(n, "bad index j"))?;
        let value = parse_rat(&format!("{}/{}", fields[2], fields[3]))
            .map_err(|e| fixture_error(n, e.to_string()))?;
        if m == 0 || j > 2 * m as usize {
            return Err(fixture_error(n, format!("index {j} out of range for order {m}")));
        }
        if raw.entry(m).or_default().insert(j, (n, value)).is_some() {
            return Err(fixture_error(n, format!("duplicate record ({m}, {j})")));
        }
    }
    let mut out = BTreeMap::new();
    for (m, entries) in raw {
        let len = 2 * m as usize + 1;
        let mut coeffs: Vec<Option<Rat>> = vec![None; len];
        let mut in_file_order: Vec<_> = entries.iter().collect();
        in_file_order.sort_by_key(|(_, (line, _))| *line);
        for (&j, (line, v)) in in_file_order {
            let mirror = len - 1 - j;
            for slot in [j, mirror] {
                match &coeffs[slot] {
                    Some(prev) if prev != v => {
                        return Err(fixture_error(
                            *line,
                            format!("record ({m}, {j}) contradicts its mirror ({m}, {mirror})"),
                        ))
                    }
                    _ => coeffs[slot] = Some(v.clone()),
                }
            }
        }
        let coeffs = coeffs
            .into_iter()
            .enumerate()
            .map(|(j, c)| {
                c.ok_or_else(|| fixture_error(0, format!("order {m} is missing index {j}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let poly = EvenPoly::new(m, coeffs)?;
        poly.check_invariants()?;
        out.insert(m, poly);
    }
    Ok(out)
}

/// Writes polynomials in the fixture format (upper half only).
pub fn write_coefficient_fixture<'a>(polys: impl IntoIterator<Item = &'a EvenPoly>) -> String {
    let mut out = format!("{FIXTURE_HEADER}\n");
    for p in polys {
        let m = p.m() as usize;
        for j in (m..=2 * m).rev() {
            let c = &p.coeffs()[j];
            out.push_str(&format!("{} {} {} {}\n", m, j, c.numer(), c.denom()));
        }
    }
    out
}

fn tables() -> &'static BTreeMap<u32, EvenPoly> {
    static TABLES: OnceLock<BTreeMap<u32, EvenPoly>> = OnceLock::new();
    TABLES.get_or_init(|| parse_coefficient_fixture(FIXTURE).expect("embedded fixture is valid"))
}

/// Full coefficient vector of `I_m` for `m` in `1..=9`.
pub fn intermediate_table(m: u32) -> Result<EvenPoly, BlooreError> {
    tables().get(&m).cloned().ok_or_else(|| {
        BlooreError::Unsupported(format!(
            "I_{m} is tabulated only for m in {}..={}",
            TABLE_ORDERS.start(),
            TABLE_ORDERS.end()
        ))
    })
}

/// `I_m` with `I_0 = 1` included.
pub fn intermediate(m: u32) -> Result<EvenPoly, BlooreError> {
    if m == 0 {
        return EvenPoly::new(0, vec![Rat::one()]);
    }
    intermediate_table(m)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

impl McEstimate {
    /// Distance to `exact` in standard errors.
    pub fn z_score(&self, exact: f64) -> f64 {
        (self.estimate - exact) / self.std_error
    }
}

/// Uniform Monte Carlo estimate of `I_m(mu)` over the cube.
pub fn mc_intermediate_check(m: u32, mu: f64, n: u64, seed: u64) -> Result<McEstimate, BlooreError> {
    if m < 1 || !(mu > 0.0) || n < 10_000 {
        return Err(BlooreError::Unsupported(
            "Monte Carlo check needs m >= 1, mu > 0 and n >= 10^4".into(),
        ));
    }
    let scale = 27.0 / (32.0 * std::f64::consts::PI.powi(2)) * 64.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq) = (NeumaierSum::new(), NeumaierSum::new());
    for _ in 0..n {
        let coords: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        let point = CorrelationPoint::new(coords, mu)?;
        let v = scale * jacobian(&point) * eval_p_tilde(&point).powi(m as i32);
        sum += v;
        sum_sq += v * v;
    }
    let (estimate, std_error) = mean_and_std_error(sum.value(), sum_sq.value(), n);
    Ok(McEstimate {
        estimate,
        std_error,
    })
}

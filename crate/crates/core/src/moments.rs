//! Second integration stage and closed-form moment machinery.
//!
//! `assemble_moment` integrates `I_m` against the diagonal of the density
//! matrix over the simplex; the determinant families have closed forms in
//! rising factorials. The remaining functions turn raw moments into summary
//! statistics and bounds.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::bloore::{intermediate, BlooreError, EvenPoly, Ring};
use crate::ensemble::Family;
use crate::exactnum::{
    dirichlet_simplex_integral, gamma_exact, int, parse_rat, pochhammer, rat, rat_pow, rat_to_f64,
    ExactError, Half, PiScalar, Rat,
};

/// Highest order of the partial-transpose moments available in closed form.
pub const MAX_PT_ORDER: u32 = 9;

const GOLDEN: &str = include_str!("../data/golden_moments.txt");
pub const GOLDEN_HEADER: &str = "# hsmoments moments v1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentsError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate distribution: variance {0} is not positive")]
    Degenerate(String),
    #[error("support [{0}, {1}] is empty")]
    EmptySupport(String, String),
    #[error("moment fixture line {line}: {message}")]
    Fixture { line: usize, message: String },
    #[error(transparent)]
    Bloore(#[from] BlooreError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Scalars usable as raw moments: exact rationals or float estimates.
pub trait MomentScalar: Ring {
    fn to_f64(&self) -> f64;
    fn is_positive(&self) -> bool;
}

impl MomentScalar for Rat {
    fn to_f64(&self) -> f64 {
        rat_to_f64(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
}

impl MomentScalar for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_positive(&self) -> bool {
        *self > 0.0
    }
}

/// Raw moments `m_1..m_K` of a distribution on `support`; `m_0 = 1` is
/// implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector<T = Rat> {
    support: (Rat, Rat),
    raw: Vec<T>,
}

impl<T: MomentScalar> MomentVector<T> {
    pub fn new(support: (Rat, Rat), raw: Vec<T>) -> Result<Self, MomentsError> {
        if support.0 >= support.1 {
            return Err(MomentsError::EmptySupport(
                support.0.to_string(),
                support.1.to_string(),
            ));
        }
        Ok(MomentVector { support, raw })
    }

    pub fn support(&self) -> &(Rat, Rat) {
        &self.support
    }

    /// `m_1..m_K`.
    pub fn raw(&self) -> &[T] {
        &self.raw
    }

    pub fn order(&self) -> usize {
        self.raw.len()
    }

    /// `m_k`, with `m_0 = 1`.
    pub fn moment(&self, k: usize) -> Option<T> {
        match k {
            0 => Some(T::from_i64(1)),
            k => self.raw.get(k - 1).cloned(),
        }
    }

    /// `E[(X - m_1)^k]` by binomial expansion.
    pub fn central(&self, k: usize) -> Option<T> {
        let mean = self.moment(1)?;
        let neg_mean = T::from_i64(0) - mean;
        let mut total = T::from_i64(0);
        let mut binom: i64 = 1;
        for i in 0..=k {
            let mut term = T::from_i64(binom) * self.moment(i)?;
            for _ in 0..(k - i) {
                term = term * neg_mean.clone();
            }
            total = total + term;
            binom = binom * (k - i) as i64 / (i as i64 + 1);
        }
        Some(total)
    }
}

/// Mean, variance and the standardized third and fourth moments.
///
/// `kurtosis` is the raw Pearson ratio `mu_4 / sigma^4` (3 for a normal
/// distribution), not the excess.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionSummary<T = Rat> {
    pub mean: T,
    pub variance: T,
    pub skewness: f64,
    pub kurtosis: f64,
}

pub fn summarize<T: MomentScalar>(mv: &MomentVector<T>) -> Result<DistributionSummary<T>, MomentsError> {
    if mv.order() < 4 {
        return Err(MomentsError::Unsupported(format!(
            "summary needs 4 raw moments, got {}",
            mv.order()
        )));
    }
    let central = |k| mv.central(k).expect("order checked");
    let variance = central(2);
    if !variance.is_positive() {
        return Err(MomentsError::Degenerate(format!("{}", variance.to_f64())));
    }
    let var = variance.to_f64();
    Ok(DistributionSummary {
        mean: mv.moment(1).expect("order checked"),
        skewness: central(3).to_f64() / var.powf(1.5),
        kurtosis: central(4).to_f64() / (var * var),
        variance,
    })
}

/// Result of the one-sided Chebyshev inequality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CantelliBound {
    pub bound: Rat,
    /// The threshold does not exceed the mean, so the bound says nothing.
    pub vacuous: bool,
}

/// Upper bound on `P(X >= threshold)` from the mean and variance alone.
pub fn cantelli_upper_bound(
    mean: &Rat,
    variance: &Rat,
    threshold: &Rat,
) -> Result<CantelliBound, MomentsError> {
    if !Signed::is_positive(variance) {
        return Err(MomentsError::Degenerate(variance.to_string()));
    }
    let t = threshold - mean;
    if !Signed::is_positive(&t) {
        return Ok(CantelliBound {
            bound: Rat::one(),
            vacuous: true,
        });
    }
    Ok(CantelliBound {
        bound: variance / (variance + &t * &t),
        vacuous: false,
    })
}

/// Interval `mean +- sqrt(3) sigma` bracketing the mode of a unimodal
/// distribution.
pub fn mode_interval(mean: f64, variance: f64) -> Result<(f64, f64), MomentsError> {
    if !(variance > 0.0) {
        return Err(MomentsError::Degenerate(variance.to_string()));
    }
    let half_width = (3.0 * variance).sqrt();
    Ok((mean - half_width, mean + half_width))
}

/// `(1146880 / pi^2) * int_simplex (r22 r33)^(2m) (r11 r22 r33 r44)^(3/2)
/// I_m(sqrt(r11 r44 / (r22 r33)))`, term by term through Dirichlet
/// integrals. The result must be a pure rational.
pub fn assemble_from_poly(poly: &EvenPoly) -> Result<Rat, MomentsError> {
    let m = poly.m() as i64;
    let three_halves = Half::from_twice(3);
    let mut total = PiScalar::zero();
    for (j, c) in poly.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        // mu^(2j) contributes (r11 r44)^j (r22 r33)^(-j).
        let outer = three_halves + Half::int(j as i64);
        let inner = three_halves + Half::int(2 * m - j as i64);
        let integral = dirichlet_simplex_integral([outer, inner, inner, outer])?;
        total = total + integral.scale(c);
    }
    let normalization = PiScalar::monomial(int(1_146_880), -4);
    Ok((&total * &normalization).to_rational()?)
}

/// Exact `m`-th raw moment of the partial-transpose determinant of real
/// two-qubit states under the Hilbert-Schmidt measure.
pub fn assemble_moment(m: u32) -> Result<Rat, MomentsError> {
    if m > MAX_PT_ORDER {
        return Err(MomentsError::Unsupported(format!(
            "partial-transpose moments are available for m in 0..={MAX_PT_ORDER}"
        )));
    }
    assemble_from_poly(&intermediate(m)?)
}

/// Exact `m`-th raw moment of `det(rho)` for Hilbert-Schmidt random
/// two-qubit states.
pub fn hs_det_moment(family: Family, m: u32) -> Rat {
    match family {
        Family::Real => {
            rat_pow(&int(2), 1 - 8 * m as i32) * pochhammer(&int(1), m) * pochhammer(&rat(3, 2), m)
                / (int(m as i64 + 2) * pochhammer(&rat(11, 4), m) * pochhammer(&rat(13, 4), m))
        }
        Family::Complex => {
            rat_pow(&int(256), -(m as i32))
                * pochhammer(&int(1), m)
                * pochhammer(&int(2), m)
                * pochhammer(&int(3), m)
                / (pochhammer(&rat(17, 4), m) * pochhammer(&rat(9, 2), m) * pochhammer(&rat(19, 4), m))
        }
        Family::Quaternion => {
            let constant: BigInt = "315071454005160652800000".parse().expect("literal");
            let g = |x: u32| {
                gamma_exact(Half::int(x as i64))
                    .and_then(|v| v.to_rational())
                    .expect("integer Gamma")
            };
            Rat::from_integer(constant) * g(m + 1) * g(m + 3) * g(m + 5) * g(m + 7) / g(4 * m + 28)
        }
    }
}

/// Exact `m`-th raw moment of `det(rho)` for Hilbert-Schmidt random
/// complex `n x n` states: `Gamma(n^2) / Gamma(n^2 + n m)` times
/// `prod_j (j)_m`.
pub fn complex_det_moment(n: u32, m: u32) -> Rat {
    let mut value = Rat::one();
    for j in 1..=n {
        value *= pochhammer(&int(j as i64), m);
    }
    value / pochhammer(&int((n * n) as i64), n * m)
}

/// Support of `det(rho)` for 4x4 states.
pub fn det_support() -> (Rat, Rat) {
    (Rat::zero(), rat(1, 256))
}

/// Support of `det(rho^PT)` for 4x4 states.
pub fn pt_support() -> (Rat, Rat) {
    (rat(-1, 16), rat(1, 256))
}

/// Support of `det(rho)` for 6x6 (qubit-qutrit) states.
pub fn qubit_qutrit_support() -> (Rat, Rat) {
    (Rat::zero(), rat(1, 46656))
}

/// `m_1..m_max` of the partial-transpose determinant (real states).
pub fn pt_moments(max: u32) -> Result<MomentVector, MomentsError> {
    let raw = (1..=max).map(assemble_moment).collect::<Result<Vec<_>, _>>()?;
    MomentVector::new(pt_support(), raw)
}

/// `m_1..m_max` of `det(rho)` for the given family.
pub fn det_moments(family: Family, max: u32) -> MomentVector {
    let raw = (1..=max).map(|m| hs_det_moment(family, m)).collect();
    MomentVector::new(det_support(), raw).expect("nonempty support")
}

/// Truncated moment-generating function `sum_{k <= terms} m_k t^k / k!`.
pub fn mgf_eval(family: Family, t: f64, terms: u32) -> f64 {
    let mut factorial = Rat::one();
    let mut total = 0.0;
    for k in 0..=terms {
        if k > 0 {
            factorial *= int(k as i64);
        }
        total += rat_to_f64(&(hs_det_moment(family, k) / &factorial)) * t.powi(k as i32);
    }
    total
}

/// Generalized hypergeometric series `pFq(a; b; x)`, summed until terms
/// stop contributing.
pub fn hypergeometric_pfq(a: &[f64], b: &[f64], x: f64) -> f64 {
    let mut term = 1.0;
    let mut total = 1.0;
    for k in 0..10_000 {
        let kf = k as f64;
        let num: f64 = a.iter().map(|ai| ai + kf).product();
        let den: f64 = b.iter().map(|bi| bi + kf).product::<f64>() * (kf + 1.0);
        term *= num / den * x;
        total += term;
        if term.abs() <= f64::EPSILON * total.abs() {
            break;
        }
    }
    total
}

/// Moment-generating function in hypergeometric closed form.
pub fn mgf_closed_form(family: Family, t: f64) -> f64 {
    let x = t / 256.0;
    match family {
        Family::Real if t == 0.0 => 1.0,
        Family::Real => 4032.0 * (hypergeometric_pfq(&[0.5, 1.0, 1.0], &[1.75, 2.0, 2.25], x) - 1.0) / t,
        Family::Complex => hypergeometric_pfq(&[1.0, 2.0, 3.0], &[4.25, 4.5, 4.75], x),
        Family::Quaternion => hypergeometric_pfq(&[1.0, 3.0, 5.0], &[7.25, 7.5, 7.75], x),
    }
}

/// Exact contribution of the six extreme terms of `I_m` (powers `0, 2, 4`
/// and their mirrors) to the `m`-th partial-transpose moment, in factored
/// closed form.
pub fn six_term_approximation(m: u32) -> Result<Rat, MomentsError> {
    if m < 3 {
        return Err(MomentsError::Unsupported(
            "six-term approximation is defined for m >= 3".into(),
        ));
    }
    let mi = m as i64;
    let mm = int(mi);
    let sign = if m % 2 == 0 { int(1) } else { int(-1) };
    // m(2m(2m(2m(40m(6m-5)-169)+101)-495)-9)+27
    let nested = [(40, -5), (0, -169), (0, 101), (0, -495), (0, -9)];
    let mut inner = int(6) * &mm + int(nested[0].1);
    inner = int(40) * &mm * inner + int(nested[1].1);
    inner = int(2) * &mm * inner + int(nested[2].1);
    inner = int(2) * &mm * inner + int(nested[3].1);
    inner = int(2) * &mm * inner + int(nested[4].1);
    let numerator = &mm * inner + int(27);
    let quartic = int(16) * rat_pow(&mm, 4) - int(40) * &mm * &mm + int(9);
    let first = int(945) * sign * numerator / (int(2) * quartic);

    let gamma = |twice: i64| gamma_exact(Half::from_twice(twice));
    let g_half = gamma(4 * mi + 1)?;
    let pi_term = (&(&g_half * &g_half).scale(&int(256)))
        .div_monomial(&(&PiScalar::monomial(Rat::one(), 2) * &gamma(8 * mi + 20)?))?
        .to_rational()?;
    let g = |twice: i64| gamma(twice).and_then(|v| v.to_rational());
    let odd = |k: i64| int(4 * mi + k);
    let denom = int(mi + 2)
        * rat_pow(&odd(1), 2)
        * rat_pow(&odd(3), 2)
        * rat_pow(&odd(5), 2)
        * rat_pow(&odd(7), 2)
        * odd(9)
        * rat_pow(&g(4 * mi + 8)?, 2);
    let rational_term = rat_pow(&int(2), -8 * m as i32) * g(8 * mi + 16)? / denom;
    Ok(first * (pi_term + rational_term))
}

/// `zeta'_m / six_term_approximation(m)`.
pub fn six_term_ratio(m: u32) -> Result<f64, MomentsError> {
    Ok(rat_to_f64(&(assemble_moment(m)? / six_term_approximation(m)?)))
}

/// Named exact moment sequences shipped with the crate.
#[derive(Clone, Debug, PartialEq)]
pub struct GoldenMoments {
    pub pt_real: Vec<Rat>,
    pub det_real: Vec<Rat>,
    pub qubit_qutrit_complex: Vec<Rat>,
}

/// Parses the versioned golden-moment format: `sequence k p/q` records.
pub fn parse_golden_moments(text: &str) -> Result<GoldenMoments, MomentsError> {
    let err = |line: usize, message: &str| MomentsError::Fixture {
        line,
        message: message.to_string(),
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.find(|(_, l)| !l.is_empty()) {
        Some((_, l)) if l == GOLDEN_HEADER => {}
        Some((n, _)) => return Err(err(n, "missing header")),
        None => return Err(err(0, "empty fixture")),
    }
    let mut out = GoldenMoments {
        pt_real: vec![],
        det_real: vec![],
        qubit_qutrit_complex: vec![],
    };
    for (n, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [name, k, value] = fields[..] else {
            return Err(err(n, "expected `sequence k p/q`"));
        };
        let seq = match name {
            "pt-real" => &mut out.pt_real,
            "det-real" => &mut out.det_real,
            "det-qubit-qutrit" => &mut out.qubit_qutrit_complex,
            _ => return Err(err(n, "unknown sequence")),
        };
        let k: usize = k.parse().map_err(|_| err(n, "bad order"))?;
        if k != seq.len() + 1 {
            return Err(err(n, "orders must be consecutive from 1"));
        }
        seq.push(parse_rat(value).map_err(|e| err(n, &e.to_string()))?);
    }
    Ok(out)
}

pub fn golden_moments() -> GoldenMoments {
    parse_golden_moments(GOLDEN).expect("embedded fixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{double_factorial, factorial, largest_prime_factor};

    #[test]
    fn low_order_moments() {
        assert_eq!(assemble_moment(0).unwrap(), int(1));
        assert_eq!(assemble_moment(1).unwrap(), rat(-1, 858));
        assert_eq!(assemble_moment(2).unwrap(), rat(27, 2489344));
        assert!(matches!(assemble_moment(10), Err(MomentsError::Unsupported(_))));
    }

    /// The double-factorial rewrite of the assembly sum (middle term to the
    /// fourth power) as an independent route.
    #[test]
    fn assembly_matches_double_factorial_form() {
        for m in 1..=MAX_PT_ORDER {
            let c = intermediate(m).unwrap();
            let c = c.coeffs();
            let mi = m as i64;
            let df = |n: i64| double_factorial(n).unwrap();
            let mut sum = rat_pow(&df(2 * mi + 3), 4) * &c[m as usize];
            for j in 0..m as usize {
                let ji = j as i64;
                sum += int(2) * rat_pow(&(df(3 + 2 * ji) * df(3 - 2 * ji + 4 * mi)), 2) * &c[j];
            }
            let value = int(35) * rat_pow(&int(2), 7 - 4 * m as i32) / factorial(4 * m as u64 + 9) * sum;
            assert_eq!(value, assemble_moment(m).unwrap(), "m = {m}");
        }
    }

    #[test]
    fn golden_pt_moments_and_structure() {
        let golden = golden_moments();
        assert_eq!(golden.pt_real.len(), 9);
        for (k, g) in golden.pt_real.iter().enumerate() {
            let m = k as u32 + 1;
            let z = assemble_moment(m).unwrap();
            assert_eq!(&z, g, "m = {m}");
            assert_eq!(z.is_negative(), m % 2 == 1);
        }
    }

    #[test]
    fn denominators_top_out_at_the_same_prime() {
        const PRIMES: [u64; 14] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43];
        for m in 1..=9u32 {
            let expected = PRIMES[(5 + m - 1) as usize];
            let pt = assemble_moment(m).unwrap();
            let det = hs_det_moment(Family::Real, m);
            assert_eq!(largest_prime_factor(pt.denom()), Some(expected), "pt m = {m}");
            assert_eq!(largest_prime_factor(det.denom()), Some(expected), "det m = {m}");
        }
    }

    #[test]
    fn real_det_moments() {
        let golden = golden_moments();
        assert_eq!(golden.det_real.len(), 15);
        for (k, g) in golden.det_real.iter().enumerate() {
            assert_eq!(&hs_det_moment(Family::Real, k as u32 + 1), g);
        }
        for m in 1..15 {
            let a = hs_det_moment(Family::Real, m);
            assert!(Signed::is_positive(&a));
            assert!(hs_det_moment(Family::Real, m + 1) < a);
        }
        // Gamma route: 945 sqrt(pi) 2^(-8m-4) Gamma(2m+2) / ((m+2) Gamma(2m+11/2)).
        for m in 0..=20u32 {
            let mi = m as i64;
            let num = gamma_exact(Half::int(2 * mi + 2))
                .unwrap()
                .scale(&(int(945) * rat_pow(&int(2), -8 * m as i32 - 4)));
            let num = &num * &PiScalar::monomial(int(1), 1);
            let den = gamma_exact(Half::from_twice(4 * mi + 11)).unwrap().scale(&int(mi + 2));
            let v = num.div_monomial(&den).unwrap().to_rational().unwrap();
            assert_eq!(v, hs_det_moment(Family::Real, m));
        }
    }

    #[test]
    fn far_moment_matches_printed_factorization() {
        let primes: [(u64, u32); 21] = [
            (2, 98), (3, 2), (5, 2), (11, 1), (13, 2), (17, 1), (19, 1), (29, 1), (31, 1),
            (53, 1), (59, 1), (61, 1), (67, 1), (71, 1), (73, 1), (79, 1), (83, 1), (89, 1),
            (97, 1), (101, 1), (103, 1),
        ];
        let denom: BigInt = primes
            .iter()
            .fold(BigInt::one(), |acc, &(p, e)| acc * BigInt::from(p).pow(e));
        assert_eq!(hs_det_moment(Family::Real, 24), Rat::new(BigInt::one(), denom));
    }

    #[test]
    fn complex_and_quaternion_closed_forms() {
        for family in Family::ALL {
            assert_eq!(hs_det_moment(family, 0), int(1));
        }
        assert_eq!(hs_det_moment(Family::Complex, 1), rat(1, 3876));
        assert_eq!(hs_det_moment(Family::Quaternion, 1), rat(1, 7192));
        let g = |x: u64| factorial(x - 1);
        let big = |s: &str| Rat::from_integer(s.parse::<BigInt>().unwrap());
        for m in 0..=20u32 {
            let mu = m as u64;
            // Gamma form of the complex family.
            let complex = int(108_972_864_000) * g(mu + 1) * g(mu + 2) * g(mu + 3) * g(mu + 4)
                / g(4 * mu + 16);
            assert_eq!(complex, hs_det_moment(Family::Complex, m));
            // Rising-factorial form read off the quaternion 3F3 parameters.
            let quat = rat_pow(&int(256), -(m as i32))
                * pochhammer(&int(1), m)
                * pochhammer(&int(3), m)
                * pochhammer(&int(5), m)
                / (pochhammer(&rat(29, 4), m) * pochhammer(&rat(15, 2), m) * pochhammer(&rat(31, 4), m));
            assert_eq!(quat, hs_det_moment(Family::Quaternion, m));
        }
        assert_eq!(
            big("315071454005160652800000") * int(2 * 24 * 720),
            Rat::from_integer(factorial(27).to_integer())
        );
    }

    #[test]
    fn summary_statistics() {
        let mv = pt_moments(4).unwrap();
        let s = summarize(&mv).unwrap();
        assert_eq!(s.mean, rat(-1, 858));
        assert_eq!(s.variance, rat(30397, 3203785728));
        assert!((s.skewness + 3.13228).abs() < 1e-4, "{}", s.skewness);
        assert!((s.kurtosis - 17.6316).abs() < 1e-3, "{}", s.kurtosis);
        assert!(s.kurtosis - s.skewness * s.skewness - 1.0 >= 0.0);

        let short = MomentVector::new(pt_support(), vec![rat(1, 2)]).unwrap();
        assert!(matches!(summarize(&short), Err(MomentsError::Unsupported(_))));
        let point = MomentVector::new((int(0), int(1)), vec![rat(1, 2), rat(1, 4), rat(1, 8), rat(1, 16)])
            .unwrap();
        assert!(matches!(summarize(&point), Err(MomentsError::Degenerate(_))));
    }

    #[test]
    fn summary_of_uniform_floats() {
        let raw: Vec<f64> = (1..=4).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let s = summarize(&MomentVector::new((int(0), int(1)), raw).unwrap()).unwrap();
        assert!((s.variance - 1.0 / 12.0).abs() < 1e-15);
        assert!(s.skewness.abs() < 1e-12);
        assert!((s.kurtosis - 1.8).abs() < 1e-12);
    }

    #[test]
    fn cantelli_values() {
        let b = cantelli_upper_bound(&rat(-1, 858), &rat(30397, 3203785728), &int(0)).unwrap();
        assert_eq!(b.bound, rat(30397, 34749));
        assert!(!b.vacuous);
        let b = cantelli_upper_bound(&int(0), &rat(1, 7), &int(0)).unwrap();
        assert_eq!(b, CantelliBound { bound: int(1), vacuous: true });
        assert_eq!(cantelli_upper_bound(&int(0), &int(1), &int(1)).unwrap().bound, rat(1, 2));
        assert!(cantelli_upper_bound(&int(0), &int(0), &int(1)).is_err());
    }

    #[test]
    fn mode_interval_values() {
        let (lo, hi) = mode_interval(-1.0 / 858.0, 30397.0 / 3203785728.0).unwrap();
        assert!((lo + 0.00650062).abs() < 5e-9);
        assert!((hi - 0.00416962).abs() < 5e-9);
        let (lo, hi) = mode_interval(0.0, 1.0).unwrap();
        assert_eq!((lo, hi), (-(3f64.sqrt()), 3f64.sqrt()));
        let (lo, hi) = mode_interval(1.0, 1.0 / 3.0).unwrap();
        assert!(lo.abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);
        assert!(mode_interval(0.0, 0.0).is_err());
    }

    #[test]
    fn mgf_values() {
        for family in Family::ALL {
            assert_eq!(mgf_eval(family, 0.0, 5), 1.0);
        }
        let h = 1e-3;
        let slope = (mgf_eval(Family::Real, h, 20) - mgf_eval(Family::Real, -h, 20)) / (2.0 * h);
        assert!((slope - 1.0 / 2288.0).abs() < 1e-12);
        assert!((mgf_eval(Family::Complex, 1.0, 30) - mgf_eval(Family::Complex, 1.0, 60)).abs() < 1e-12);
        for family in Family::ALL {
            for t in [-40.0, -3.0, 0.5, 1.0, 7.0, 100.0] {
                let series = mgf_eval(family, t, 60);
                let closed = mgf_closed_form(family, t);
                assert!((series - closed).abs() < 1e-12 * closed.abs(), "{family} t = {t}");
            }
        }
    }

    #[test]
    fn six_term_ratios() {
        let ratios: Vec<f64> = (3..=9).map(|m| six_term_ratio(m).unwrap()).collect();
        assert!((ratios[0] - 1.05766).abs() < 5e-6);
        assert!((ratios[6] - 1.94638).abs() < 5e-6);
        assert!(ratios.windows(2).all(|w| w[0] < w[1]));
        assert!(six_term_approximation(2).is_err());
    }

    /// The six-term value equals the extreme coefficients of `I_m` pushed
    /// through the assembly.
    #[test]
    fn six_term_matches_partial_assembly() {
        use crate::bloore::coefficient_c;
        for m in 3..=9u32 {
            let n = 2 * m as usize + 1;
            let mut coeffs = vec![Rat::zero(); n];
            for j in 0..3 {
                let c = coefficient_c(j as u32, m).unwrap();
                coeffs[j] = c.clone();
                coeffs[n - 1 - j] = c;
            }
            let partial = assemble_from_poly(&EvenPoly::new(m, coeffs).unwrap()).unwrap();
            assert_eq!(partial, six_term_approximation(m).unwrap(), "m = {m}");
        }
    }

    #[test]
    fn golden_parser_reports_lines() {
        let e = parse_golden_moments(&format!("{GOLDEN_HEADER}\npt-real 1 -1/858\npt-real 3 1/2\n"))
            .unwrap_err();
        assert!(matches!(e, MomentsError::Fixture { line: 3, .. }));
        let e = parse_golden_moments(&format!("{GOLDEN_HEADER}\npt-real 1 nope\n")).unwrap_err();
        assert!(matches!(e, MomentsError::Fixture { line: 2, .. }));
    }

    #[test]
    fn qubit_qutrit_fixture() {
        let g = golden_moments().qubit_qutrit_complex;
        assert_eq!(g[0], rat(1, 4496388));
        assert_eq!(&g[1] / &g[0], rat(1, 1533939));
        assert_eq!(g.len(), 12);
        for (k, v) in g.iter().enumerate() {
            assert_eq!(v, &complex_det_moment(6, k as u32 + 1));
        }
        assert!((rat_to_f64(&g[11]) / 6.16876e-68 - 1.0).abs() < 1e-5);
        for m in 0..=10 {
            assert_eq!(complex_det_moment(4, m), hs_det_moment(Family::Complex, m));
        }
    }
}

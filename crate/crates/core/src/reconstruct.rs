//! Densities from finitely many moments.
//!
//! Moments are first mapped onto `[0, 1]`. `fit_poly_density` finds the
//! degree-`D` polynomial whose first `D + 1` moments match exactly (no
//! positivity constraint), and `stable_density` evaluates the piecewise
//! constant moment-recovery approximation.

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{factorial, int, rat_to_f64, Rat};
use crate::moments::MomentVector;

pub const MAX_ALPHA: u32 = 60;
pub const ROOT_GRID: usize = 1 << 12;
pub const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{0}")]
    Domain(String),
    #[error("moment system is singular at column {0}")]
    Singular(usize),
    #[error("root isolation failed on [{lo}, {hi}]: {message}")]
    RootIsolation { lo: f64, hi: f64, message: String },
}

/// Moments of `(X - a) / (b - a)` for `X` supported on `[a, b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMappedMoments {
    support: (Rat, Rat),
    /// `m_0 = 1, m_1, ..., m_K` on `[0, 1]`.
    mapped: Vec<Rat>,
}

impl AffineMappedMoments {
    /// Moments already on `[0, 1]`; `moments` starts at `m_1`.
    pub fn unit(moments: Vec<Rat>) -> Self {
        let mut mapped = vec![Rat::one()];
        mapped.extend(moments);
        AffineMappedMoments {
            support: (Rat::zero(), Rat::one()),
            mapped,
        }
    }

    pub fn support(&self) -> &(Rat, Rat) {
        &self.support
    }

    /// `m_0..m_K`.
    pub fn moments(&self) -> &[Rat] {
        &self.mapped
    }

    /// Highest available order `K`.
    pub fn order(&self) -> usize {
        self.mapped.len() - 1
    }

    /// Maps a point of the original support onto `[0, 1]`.
    pub fn to_unit(&self, x: &Rat) -> Rat {
        (x - &self.support.0) / (&self.support.1 - &self.support.0)
    }

    pub fn from_unit(&self, y: &Rat) -> Rat {
        &self.support.0 + y * (&self.support.1 - &self.support.0)
    }
}

/// Binomial transform of raw moments under the increasing affine map
/// `[a, b] -> [0, 1]`.
pub fn map_moments(mv: &MomentVector) -> Result<AffineMappedMoments, ReconstructError> {
    let (a, b) = mv.support().clone();
    let width = &b - &a;
    if !width.is_positive() {
        return Err(ReconstructError::Domain(format!("support [{a}, {b}] is degenerate")));
    }
    let neg_a = -a.clone();
    let raw: Vec<Rat> = (0..=mv.order()).map(|k| mv.moment(k).expect("k <= order")).collect();
    let mut mapped = Vec::with_capacity(raw.len());
    let mut scale = Rat::one();
    for k in 0..raw.len() {
        let mut total = Rat::zero();
        let mut binom = Rat::one();
        let mut power = Rat::one(); // (-a)^(k - i), built from i = k downward
        for i in (0..=k).rev() {
            total += &binom * &raw[i] * &power;
            power *= &neg_a;
            binom = binom * int(i as i64) / int((k - i + 1) as i64);
        }
        mapped.push(total / &scale);
        scale *= &width;
    }
    Ok(AffineMappedMoments {
        support: (a, b),
        mapped,
    })
}

/// Polynomial density `p(y) = sum_j c_j y^j` on `[0, 1]`, reported against
/// the original support.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyDensity {
    coeffs: Vec<Rat>,
    support: (Rat, Rat),
}

impl PolyDensity {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn support(&self) -> &(Rat, Rat) {
        &self.support
    }

    /// `p(y)` on the unit interval.
    pub fn eval_unit(&self, y: &Rat) -> Rat {
        self.coeffs.iter().rev().fold(Rat::zero(), |acc, c| acc * y + c)
    }

    /// Density at `x` in original coordinates, `p((x - a)/(b - a)) / (b - a)`.
    pub fn eval(&self, x: f64) -> f64 {
        let (a, b) = &self.support;
        let width = b - a;
        let y = (Rat::from_float(x).unwrap_or_else(Rat::zero) - a) / &width;
        rat_to_f64(&(self.eval_unit(&y) / width))
    }

    /// `int_0^y p`.
    pub fn antiderivative_unit(&self, y: &Rat) -> Rat {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(Rat::zero(), |acc, (j, c)| acc * y + c / int(j as i64 + 1))
            * y
    }

    /// `int_0^1 y^k p(y) dy`.
    pub fn unit_moment(&self, k: usize) -> Rat {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c / int((j + k + 1) as i64))
            .sum()
    }
}

/// Exact Gauss-Jordan solve of `A x = rhs`.
fn solve_exact(mut a: Vec<Vec<Rat>>, mut rhs: Vec<Rat>) -> Result<Vec<Rat>, ReconstructError> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(ReconstructError::Singular(col))?;
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = Rat::one() / &a[col][col];
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        rhs[col] *= &inv;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in col..n {
                let delta = &factor * &a[col][c];
                a[r][c] -= delta;
            }
            let delta = &factor * &rhs[col];
            rhs[r] -= delta;
        }
    }
    Ok(rhs)
}

/// Degree-`degree` polynomial on `[0, 1]` reproducing `m_0..m_degree`
/// exactly.
pub fn fit_poly_density(
    mapped: &AffineMappedMoments,
    degree: usize,
) -> Result<PolyDensity, ReconstructError> {
    if degree > mapped.order() {
        return Err(ReconstructError::Unsupported(format!(
            "degree {degree} needs {degree} moments, only {} given",
            mapped.order()
        )));
    }
    let hilbert = (0..=degree)
        .map(|i| (0..=degree).map(|j| Rat::new(1.into(), ((i + j + 1) as i64).into())).collect())
        .collect();
    let coeffs = solve_exact(hilbert, mapped.mapped[..=degree].to_vec())?;
    Ok(PolyDensity {
        coeffs,
        support: mapped.support.clone(),
    })
}

/// Piecewise-constant density estimate at `x` in `[0, 1]` from
/// `m_0..m_alpha`:
/// `(alpha+1)!/k! sum_{j=0}^{alpha-k} (-1)^j m_{k+j} / (j! (alpha-k-j)!)`
/// with `k = floor(alpha x)`.
pub fn stable_density(mapped: &AffineMappedMoments, alpha: u32, x: f64) -> Result<f64, ReconstructError> {
    Ok(rat_to_f64(&stable_density_exact(mapped, alpha, x)?))
}

pub fn stable_density_exact(
    mapped: &AffineMappedMoments,
    alpha: u32,
    x: f64,
) -> Result<Rat, ReconstructError> {
    if alpha == 0 || alpha > MAX_ALPHA {
        return Err(ReconstructError::Unsupported(format!("alpha must be in 1..={MAX_ALPHA}")));
    }
    if alpha as usize > mapped.order() {
        return Err(ReconstructError::Unsupported(format!(
            "alpha {alpha} needs {alpha} moments, only {} given",
            mapped.order()
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(ReconstructError::Domain(format!("x = {x} is outside [0, 1]")));
    }
    let a = alpha as u64;
    let k = ((alpha as f64 * x).floor() as u64).min(a);
    let mut total = Rat::zero();
    for j in 0..=(a - k) {
        let term = &mapped.mapped[(k + j) as usize] / (factorial(j) * factorial(a - k - j));
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(factorial(a + 1) / factorial(k) * total)
}

/// Exact mass of the fitted density on `[lo, hi]` (original coordinates).
pub fn mass_on_interval(pd: &PolyDensity, sub: (&Rat, &Rat)) -> Result<Rat, ReconstructError> {
    let (a, b) = &pd.support;
    let (lo, hi) = sub;
    if lo > hi || lo < a || hi > b {
        return Err(ReconstructError::Domain(format!(
            "[{lo}, {hi}] is not inside the support [{a}, {b}]"
        )));
    }
    let width = b - a;
    let to_unit = |x: &Rat| (x - a) / &width;
    Ok(pd.antiderivative_unit(&to_unit(hi)) - pd.antiderivative_unit(&to_unit(lo)))
}

/// Masses of the negative and positive parts of a fitted density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegativeMass {
    /// `int max(-p, 0)`.
    pub below: f64,
    /// `int max(p, 0)`.
    pub above: f64,
    /// Sign changes on `[0, 1]`, in unit coordinates.
    pub roots: Vec<f64>,
}

fn sign(r: &Rat) -> i8 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

/// Isolates sign changes of `p` on a grid of `ROOT_GRID` cells, bisects
/// each to `ROOT_TOL`, and integrates exactly between the roots.
pub fn negative_mass(pd: &PolyDensity) -> Result<NegativeMass, ReconstructError> {
    if pd.coeffs.iter().all(Zero::is_zero) {
        return Err(ReconstructError::RootIsolation {
            lo: 0.0,
            hi: 1.0,
            message: "polynomial is identically zero".into(),
        });
    }
    let at = |y: f64| pd.eval_unit(&Rat::from_float(y).expect("finite"));
    let mut roots = Vec::new();
    let mut prev_y = 0.0;
    let mut prev_s = sign(&at(0.0));
    for i in 1..=ROOT_GRID {
        let y = i as f64 / ROOT_GRID as f64;
        let s = sign(&at(y));
        if s == 0 {
            roots.push(y);
        } else if prev_s != 0 && s != prev_s {
            let (mut lo, mut hi) = (prev_y, y);
            let mut steps = 0;
            while hi - lo > ROOT_TOL {
                let mid = 0.5 * (lo + hi);
                if sign(&at(mid)) == prev_s {
                    lo = mid;
                } else {
                    hi = mid;
                }
                steps += 1;
                if steps > 200 {
                    return Err(ReconstructError::RootIsolation {
                        lo,
                        hi,
                        message: "bisection did not converge".into(),
                    });
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_y = y;
        if s != 0 {
            prev_s = s;
        }
    }
    let mut breaks = vec![Rat::zero()];
    breaks.extend(roots.iter().map(|&r| Rat::from_float(r).expect("finite")));
    breaks.push(Rat::one());
    let (mut below, mut above) = (Rat::zero(), Rat::zero());
    for w in breaks.windows(2) {
        let piece = pd.antiderivative_unit(&w[1]) - pd.antiderivative_unit(&w[0]);
        if piece.is_negative() {
            below -= piece;
        } else {
            above += piece;
        }
    }
    Ok(NegativeMass {
        below: rat_to_f64(&below),
        above: rat_to_f64(&above),
        roots,
    })
}

/// Location of the largest value of the fitted density, in original
/// coordinates, to within `1 / ROOT_GRID` of the support width before
/// refinement.
pub fn density_argmax(pd: &PolyDensity) -> f64 {
    let at = |y: f64| pd.eval_unit(&Rat::from_float(y).expect("finite"));
    let grid = |i: usize| i as f64 / ROOT_GRID as f64;
    let best = (0..=ROOT_GRID)
        .map(|i| (i, at(grid(i))))
        .max_by(|a, b| a.1.cmp(&b.1))
        .expect("nonempty grid")
        .0;
    let (mut lo, mut hi) = (grid(best.saturating_sub(1)), grid((best + 1).min(ROOT_GRID)));
    for _ in 0..60 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if at(m1) < at(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let y = Rat::from_float(0.5 * (lo + hi)).expect("finite");
    let (a, b) = &pd.support;
    rat_to_f64(&(a + y * (b - a)))
}

/// Sampled density curve in original coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
}

impl Curve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,density\n");
        for (x, y) in self.x.iter().zip(&self.density) {
            out.push_str(&format!("{x:e},{y:e}\n"));
        }
        out
    }
}

fn grid_points(points: usize) -> Vec<Rat> {
    (0..points)
        .map(|i| Rat::new((i as i64).into(), ((points.max(2) - 1) as i64).into()))
        .collect()
}

/// `points` equally spaced evaluations of a fitted density over its support.
pub fn poly_curve(pd: &PolyDensity, points: usize) -> Curve {
    let (a, b) = &pd.support;
    let width = b - a;
    let (x, density) = grid_points(points)
        .iter()
        .map(|y| {
            let x = a + y * &width;
            (rat_to_f64(&x), rat_to_f64(&(pd.eval_unit(y) / &width)))
        })
        .unzip();
    Curve { x, density }
}

/// `points` equally spaced evaluations of the stable approximation, rescaled
/// to the original support.
pub fn stable_curve(
    mapped: &AffineMappedMoments,
    alpha: u32,
    points: usize,
) -> Result<Curve, ReconstructError> {
    let width = &mapped.support.1 - &mapped.support.0;
    let mut curve = Curve { x: vec![], density: vec![] };
    for y in grid_points(points) {
        let yf = y.to_f64().expect("finite");
        let f = stable_density_exact(mapped, alpha, yf)? / &width;
        curve.x.push(rat_to_f64(&mapped.from_unit(&y)));
        curve.density.push(rat_to_f64(&f));
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Family;
    use crate::exactnum::rat;
    use crate::moments::{det_moments, pt_moments, pt_support};

    fn uniform(k: usize) -> AffineMappedMoments {
        AffineMappedMoments::unit((1..=k).map(|i| rat(1, i as i64 + 1)).collect())
    }

    #[test]
    fn mapping_examples() {
        let u = MomentVector::new((int(0), int(1)), (1..=5).map(|i| rat(1, i + 1)).collect()).unwrap();
        assert_eq!(map_moments(&u).unwrap(), uniform(5));

        let mv = MomentVector::new(pt_support(), vec![rat(-1, 858)]).unwrap();
        let mapped = map_moments(&mv).unwrap();
        assert_eq!(mapped.moments()[1], (rat(-1, 858) + rat(1, 16)) / rat(17, 256));

        let b = rat(3, 7);
        let point = MomentVector::new((int(-1), b.clone()), (1..=4).map(|k| crate::exactnum::rat_pow(&b, k)).collect())
            .unwrap();
        assert!(map_moments(&point).unwrap().moments().iter().all(|m| m == &int(1)));
    }

    /// Mapped moments equal direct expectations for a two-point
    /// distribution.
    #[test]
    fn mapping_matches_direct_expectation() {
        let (a, b) = (rat(-1, 3), rat(5, 2));
        let pts = [(rat(1, 4), rat(-1, 5)), (rat(3, 4), rat(2, 1))];
        let raw = (1..=6)
            .map(|k| pts.iter().map(|(w, x)| w * crate::exactnum::rat_pow(x, k)).sum())
            .collect();
        let mapped = map_moments(&MomentVector::new((a.clone(), b.clone()), raw).unwrap()).unwrap();
        for k in 0..=6 {
            let direct: Rat = pts
                .iter()
                .map(|(w, x)| w * crate::exactnum::rat_pow(&((x - &a) / (&b - &a)), k))
                .sum();
            assert_eq!(mapped.moments()[k as usize], direct);
        }
    }

    #[test]
    fn uniform_fit_is_constant() {
        let pd = fit_poly_density(&AffineMappedMoments::unit(vec![]), 0).unwrap();
        assert_eq!(pd.coeffs(), &[int(1)]);
        let pd = fit_poly_density(&uniform(6), 6).unwrap();
        assert_eq!(pd.coeffs()[0], int(1));
        assert!(pd.coeffs()[1..].iter().all(Zero::is_zero));
        assert!(fit_poly_density(&uniform(3), 4).is_err());
        let nm = negative_mass(&pd).unwrap();
        assert_eq!((nm.below, nm.above), (0.0, 1.0));
        assert!(nm.roots.is_empty());
    }

    #[test]
    fn fit_reproduces_moments() {
        let mapped = map_moments(&pt_moments(9).unwrap()).unwrap();
        let pd = fit_poly_density(&mapped, 9).unwrap();
        for k in 0..=9 {
            assert_eq!(pd.unit_moment(k), mapped.moments()[k]);
        }
        let (a, b) = pt_support();
        assert_eq!(mass_on_interval(&pd, (&a, &b)).unwrap(), int(1));
        let inner = mass_on_interval(&pd, (&int(0), &b)).unwrap();
        assert_eq!(mass_on_interval(&pd, (&a, &int(0))).unwrap(), int(1) - inner);
        assert!(mass_on_interval(&pd, (&int(-1), &b)).is_err());
    }

    #[test]
    fn stable_density_examples() {
        let u = uniform(30);
        for alpha in [10, 20, 30] {
            for i in 0..=20 {
                assert_eq!(stable_density_exact(&u, alpha, i as f64 / 20.0).unwrap(), int(1));
            }
        }
        let point = AffineMappedMoments::unit(vec![int(0); 20]);
        assert_eq!(stable_density(&point, 20, 0.9).unwrap(), 0.0);
        assert!(stable_density(&u, 31, 0.5).is_err());
        assert!(stable_density(&u, 10, 1.5).is_err());
        assert!(stable_density(&AffineMappedMoments::unit(vec![int(0); 70]), 61, 0.5).is_err());
    }

    /// Beta(2, 2) has density 6y(1-y) and moments 6/((k+2)(k+3)).
    #[test]
    fn stable_density_converges_on_beta() {
        let beta = AffineMappedMoments::unit((1..=30).map(|k| rat(6, (k + 2) * (k + 3))).collect());
        let max_err = |alpha| {
            (0..=80)
                .map(|i| 0.1 + 0.01 * i as f64)
                .map(|x| (stable_density(&beta, alpha, x).unwrap() - 6.0 * x * (1.0 - x)).abs())
                .fold(0.0, f64::max)
        };
        let errs: Vec<f64> = [10, 20, 30].iter().map(|&a| max_err(a)).collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn stable_plateaus_peak_near_zero() {
        let mapped = map_moments(&det_moments(Family::Real, 24)).unwrap();
        let curve = stable_curve(&mapped, 24, 97).unwrap();
        let argmax = (0..curve.x.len())
            .max_by(|&i, &j| curve.density[i].total_cmp(&curve.density[j]))
            .unwrap();
        assert!(curve.x[argmax] < 0.2 / 256.0, "{}", curve.x[argmax]);
        // Plateaus: consecutive grid points inside one cell share a value.
        assert_eq!(curve.density[1], curve.density[2]);
    }

    #[test]
    fn negative_mass_of_det_fit() {
        let mapped = map_moments(&det_moments(Family::Real, 24)).unwrap();
        let pd = fit_poly_density(&mapped, 24).unwrap();
        let nm = negative_mass(&pd).unwrap();
        assert!((nm.below - 0.000397).abs() < 5e-5, "{}", nm.below);
        assert!((nm.above - nm.below - 1.0).abs() < 1e-9);
        let pt = fit_poly_density(&map_moments(&pt_moments(9).unwrap()).unwrap(), 9).unwrap();
        assert!(negative_mass(&pt).unwrap().below > nm.below);
    }

    #[test]
    fn curves() {
        let pd = fit_poly_density(&uniform(2), 2).unwrap();
        let c = poly_curve(&pd, 3);
        assert_eq!(c.x, vec![0.0, 0.5, 1.0]);
        assert_eq!(c.density, vec![1.0; 3]);
        assert_eq!(c.to_csv(), "x,density\n0e0,1e0\n5e-1,1e0\n1e0,1e0\n");
        assert!((pd.eval(0.25) - 1.0).abs() < 1e-15);
        assert!((density_argmax(&fit_poly_density(&AffineMappedMoments::unit(vec![rat(1, 2), rat(3, 10)]), 2).unwrap())
            - 0.5)
            .abs()
            < 1e-3);
    }
}

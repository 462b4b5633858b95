//! Hilbert-Schmidt sampling of density matrices and streaming Monte Carlo
//! moment estimates.
//!
//! Real states are `G G^T / tr` with `G` of shape `N x (N+1)`; complex states
//! use a square complex Ginibre `G`. Quaternionic states draw their spectrum
//! from the beta = 4 Laguerre bidiagonal model and are rotated by a Haar
//! symplectic unitary, stored as the `2N x 2N` complex embedding.
//!
//! Estimation runs in chunks of `CHUNK_SIZE` samples. Chunk `c` draws from
//! ChaCha8 stream `c` under the run seed, and chunk sums are merged in chunk
//! order, so results depend only on `(seed, n)`.

use nalgebra::{Complex, DMatrix, Dim, Matrix4, OMatrix, SMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensemble::{Family, Target};
use crate::exactnum::{format_rat, rat_to_f64, Rat};
use crate::moments::{
    assemble_moment, complex_det_moment, det_support, hs_det_moment, pt_support,
    qubit_qutrit_support, MomentVector, MAX_PT_ORDER,
};
use crate::summation::{mean_and_std_error, NeumaierSum};

pub const CHUNK_SIZE: u64 = 1 << 16;
pub const TRACE_TOL: f64 = 1e-12;
pub const EIGEN_FLOOR: f64 = -1e-10;
pub const MIN_ESTIMATION_SAMPLES: u64 = 10_000;
pub const MIN_SEPARABILITY_SAMPLES: u64 = 100_000;
pub const RECORD_SCHEMA: &str = "hsmoments.mc/v1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("dimension mismatch: matrix is {n}x{n}, factors {a}x{b}")]
    DimensionMismatch { n: usize, a: usize, b: usize },
    #[error("need at least {min} samples, got {n}")]
    TooFewSamples { n: u64, min: u64 },
    #[error(
        "chunk {chunk} sample {index}: det(rho^PT) = {det:e} but smallest PT eigenvalue is {min_eigenvalue:e}"
    )]
    SignMismatch {
        chunk: u64,
        index: u64,
        det: f64,
        min_eigenvalue: f64,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Supported `(family, N)` combinations.
fn check_supported(family: Family, n: usize) -> Result<(), SamplerError> {
    match (family, n) {
        (_, 4) | (Family::Complex, 6) => Ok(()),
        _ => Err(SamplerError::Unsupported(format!(
            "{family} states of dimension {n} (supported: any family at 4, complex at 6)"
        ))),
    }
}

/// Factor dimensions of an `N = 4` or `N = 6` bipartite system.
pub fn factor_dims(n: usize) -> Result<(usize, usize), SamplerError> {
    match n {
        4 => Ok((2, 2)),
        6 => Ok((2, 3)),
        _ => Err(SamplerError::Unsupported(format!("no bipartition for dimension {n}"))),
    }
}

/// A Hermitian, unit-trace, positive semidefinite matrix.
///
/// Real and complex states hold their `N x N` entries; quaternionic states
/// hold the `2N x 2N` complex embedding in which each quaternion
/// `a + b j` becomes `[[a, b], [-conj(b), conj(a)]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    family: Family,
    n: usize,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Wraps and validates Hermiticity and the trace (eigenvalues are not
    /// checked).
    pub fn new(family: Family, n: usize, entries: DMatrix<Complex64>) -> Result<Self, SamplerError> {
        let size = if family == Family::Quaternion { 2 * n } else { n };
        if entries.nrows() != size || entries.ncols() != size {
            return Err(SamplerError::Unsupported(format!(
                "{family} state of dimension {n} needs a {size}x{size} matrix"
            )));
        }
        let hermitian_gap = (&entries - entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if hermitian_gap > 1e-12 {
            return Err(SamplerError::Unsupported(format!("matrix is not Hermitian ({hermitian_gap:e})")));
        }
        let rho = DensityMatrix { family, n, entries };
        if (rho.trace() - 1.0).abs() > TRACE_TOL {
            return Err(SamplerError::Unsupported(format!("trace {} is not 1", rho.trace())));
        }
        Ok(rho)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Trace of the state (half the embedded trace for quaternions).
    pub fn trace(&self) -> f64 {
        let t = self.entries.trace().re;
        if self.family == Family::Quaternion {
            t / 2.0
        } else {
            t
        }
    }

    /// `det(rho)`; for quaternions the positive square root of the embedded
    /// determinant.
    pub fn determinant(&self) -> f64 {
        let d = self.entries.clone().determinant().re;
        if self.family == Family::Quaternion {
            d.max(0.0).sqrt()
        } else {
            d
        }
    }

    /// Ascending eigenvalues of the stored matrix (each quaternionic
    /// eigenvalue appears twice).
    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted(self.entries.clone().symmetric_eigenvalues().iter().copied())
    }
}

fn sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Partial transpose on the second factor: `(a b),(c d) -> (a d),(c b)`.
pub fn partial_transpose_matrix<T: nalgebra::Scalar + Copy, R: Dim, C: Dim>(
    m: &OMatrix<T, R, C>,
    dims: (usize, usize),
) -> Result<OMatrix<T, R, C>, SamplerError>
where
    nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<R, C>,
{
    let (da, db) = dims;
    let n = m.nrows();
    if m.ncols() != n || da * db != n {
        return Err(SamplerError::DimensionMismatch { n, a: da, b: db });
    }
    let mut out = m.clone();
    for a in 0..da {
        for b in 0..db {
            for c in 0..da {
                for d in 0..db {
                    out[(a * db + b, c * db + d)] = m[(a * db + d, c * db + b)];
                }
            }
        }
    }
    Ok(out)
}

/// Partial transpose of a real or complex state; `dims` must multiply to
/// `N`.
pub fn partial_transpose(
    rho: &DensityMatrix,
    dims: (usize, usize),
) -> Result<DMatrix<Complex64>, SamplerError> {
    if rho.family == Family::Quaternion {
        return Err(SamplerError::Unsupported(
            "partial transpose of quaternionic states".into(),
        ));
    }
    partial_transpose_matrix(&rho.entries, dims)
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    Complex::new(normal(rng), normal(rng))
}

fn real4(rng: &mut impl Rng) -> Matrix4<f64> {
    loop {
        let g = SMatrix::<f64, 4, 5>::from_fn(|_, _| normal(rng));
        let w = g * g.transpose();
        let t = w.trace();
        if t > TRACE_TOL {
            return w / t;
        }
    }
}

fn complex_square<const N: usize>(rng: &mut impl Rng) -> SMatrix<Complex64, N, N> {
    loop {
        let g = SMatrix::<Complex64, N, N>::from_fn(|_, _| complex_normal(rng));
        let w = g * g.adjoint();
        let t = w.trace().re;
        if t > TRACE_TOL {
            return w.map(|z| z / t);
        }
    }
}

/// Unit-trace spectrum of a quaternionic HS state (beta = 4 Laguerre,
/// bidiagonal model with diagonal chi_{14,10,6,2} and subdiagonal
/// chi_{12,8,4}).
fn quaternion_spectrum(rng: &mut impl Rng) -> [f64; 4] {
    let mut chi = |k: f64| ChiSquared::new(k).expect("k > 0").sample(rng).sqrt();
    loop {
        let mut b = Matrix4::<f64>::zeros();
        for i in 0..4 {
            b[(i, i)] = chi(14.0 - 4.0 * i as f64);
            if i > 0 {
                b[(i, i - 1)] = chi(16.0 - 4.0 * i as f64);
            }
        }
        let eig = (b * b.transpose()).symmetric_eigenvalues();
        let t: f64 = eig.iter().sum();
        if t > TRACE_TOL {
            let mut out = [0.0; 4];
            for (o, e) in out.iter_mut().zip(eig.iter()) {
                *o = (e / t).max(0.0);
            }
            return out;
        }
    }
}

/// Haar-distributed element of `Sp(4)` as an 8x8 complex unitary, from the
/// QR factorization of an embedded quaternionic Gaussian matrix with the
/// phases of `R` absorbed.
fn haar_symplectic(rng: &mut impl Rng) -> SMatrix<Complex64, 8, 8> {
    let mut z = SMatrix::<Complex64, 8, 8>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let a = complex_normal(rng);
            let b = complex_normal(rng);
            z[(2 * i, 2 * j)] = a;
            z[(2 * i, 2 * j + 1)] = b;
            z[(2 * i + 1, 2 * j)] = -b.conj();
            z[(2 * i + 1, 2 * j + 1)] = a.conj();
        }
    }
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..8 {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex::new(1.0, 0.0) };
        for i in 0..8 {
            q[(i, k)] *= phase;
        }
    }
    q
}

fn quaternion4(rng: &mut impl Rng) -> SMatrix<Complex64, 8, 8> {
    let spectrum = quaternion_spectrum(rng);
    let u = haar_symplectic(rng);
    let d = SMatrix::<Complex64, 8, 8>::from_fn(|i, j| {
        if i == j {
            Complex::new(spectrum[i / 2], 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    let rho = u * d * u.adjoint();
    // Restore exact Hermiticity lost to rounding.
    (rho + rho.adjoint()).map(|z| z * 0.5)
}

fn to_dynamic<const R: usize>(m: &SMatrix<Complex64, R, R>) -> DMatrix<Complex64> {
    DMatrix::from_iterator(R, R, m.iter().copied())
}

/// Draws `rho` from the Hilbert-Schmidt measure.
pub fn sample_hs(family: Family, n: usize, rng: &mut impl Rng) -> Result<DensityMatrix, SamplerError> {
    check_supported(family, n)?;
    let entries = match (family, n) {
        (Family::Real, _) => to_dynamic(&real4(rng).map(|x| Complex::new(x, 0.0))),
        (Family::Complex, 4) => to_dynamic(&complex_square::<4>(rng)),
        (Family::Complex, _) => to_dynamic(&complex_square::<6>(rng)),
        (Family::Quaternion, _) => to_dynamic(&quaternion4(rng)),
    };
    Ok(DensityMatrix { family, n, entries })
}

/// Sign check of one partial transpose.
#[derive(Clone, Copy, Debug)]
struct PtCheck {
    min_eigenvalue: f64,
    negative: usize,
}

fn pt_check<T>(pt: Matrix4<T>) -> PtCheck
where
    T: nalgebra::ComplexField<RealField = f64>,
{
    let eig = SymmetricEigen::new(pt).eigenvalues;
    PtCheck {
        min_eigenvalue: eig.iter().copied().fold(f64::INFINITY, f64::min),
        negative: eig.iter().filter(|&&e| e < EIGEN_FLOOR).count(),
    }
}

/// One observation: the target determinant and, for partial transposes,
/// the eigenvalue sign check.
fn observe(family: Family, n: usize, target: Target, rng: &mut impl Rng) -> (f64, Option<PtCheck>) {
    match (family, n, target) {
        (Family::Real, _, Target::Det) => (real4(rng).determinant(), None),
        (Family::Real, _, Target::DetPt) => {
            let pt = partial_transpose_matrix(&real4(rng), (2, 2)).expect("4 = 2x2");
            (pt.determinant(), Some(pt_check(pt)))
        }
        (Family::Complex, 4, Target::Det) => (complex_square::<4>(rng).determinant().re, None),
        (Family::Complex, 4, Target::DetPt) => {
            let pt = partial_transpose_matrix(&complex_square::<4>(rng), (2, 2)).expect("4 = 2x2");
            (pt.determinant().re, Some(pt_check(pt)))
        }
        (Family::Complex, _, _) => (complex_square::<6>(rng).determinant().re, None),
        // The determinant is invariant under the symplectic rotation, so the
        // spectrum alone suffices here.
        (Family::Quaternion, _, _) => (quaternion_spectrum(rng).iter().product(), None),
    }
}

fn check_target(family: Family, n: usize, target: Target) -> Result<(), SamplerError> {
    check_supported(family, n)?;
    if target == Target::DetPt && (n != 4 || family == Family::Quaternion) {
        return Err(SamplerError::Unsupported(format!(
            "detPT estimation for {family} states of dimension {n} (real or complex 4x4 only)"
        )));
    }
    Ok(())
}

/// Running sums of one chunk or of a whole run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleAccumulator {
    pub count: u64,
    /// `sum x^k` for `k = 1..=K`.
    pub sums: Vec<NeumaierSum>,
    /// `sum x^(2k)` for `k = 1..=K`.
    pub sums_sq: Vec<NeumaierSum>,
    /// Samples with `det(rho^PT) >= 0` (partial-transpose runs only).
    pub nonnegative: u64,
    /// Samples whose partial transpose has two or more eigenvalues below
    /// `EIGEN_FLOOR`.
    pub multi_negative: u64,
    pub seed: u64,
    pub chunk_size: u64,
    pub chunks: u64,
}

impl SampleAccumulator {
    fn empty(orders: usize, seed: u64) -> Self {
        SampleAccumulator {
            count: 0,
            sums: vec![NeumaierSum::new(); orders],
            sums_sq: vec![NeumaierSum::new(); orders],
            nonnegative: 0,
            multi_negative: 0,
            seed,
            chunk_size: CHUNK_SIZE,
            chunks: 0,
        }
    }

    fn push(&mut self, x: f64) {
        self.count += 1;
        let mut power = 1.0;
        for (s, s2) in self.sums.iter_mut().zip(self.sums_sq.iter_mut()) {
            power *= x;
            *s += power;
            *s2 += power * power;
        }
    }

    fn merge(&mut self, other: &SampleAccumulator) {
        self.count += other.count;
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a = *a + *b;
        }
        for (a, b) in self.sums_sq.iter_mut().zip(&other.sums_sq) {
            *a = *a + *b;
        }
        self.nonnegative += other.nonnegative;
        self.multi_negative += other.multi_negative;
        self.chunks += other.chunks;
    }

    /// Estimate and standard error of `E[x^k]`.
    pub fn estimate(&self, k: usize) -> (f64, f64) {
        mean_and_std_error(self.sums[k - 1].value(), self.sums_sq[k - 1].value(), self.count)
    }

    /// Fraction of samples with `det(rho^PT) >= 0` and its binomial standard
    /// error.
    pub fn separable_fraction(&self) -> (f64, f64) {
        let n = self.count as f64;
        let p = self.nonnegative as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }
}

fn run_chunk(
    family: Family,
    n: usize,
    target: Target,
    orders: usize,
    seed: u64,
    chunk: u64,
    len: u64,
) -> Result<SampleAccumulator, SamplerError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut acc = SampleAccumulator::empty(orders, seed);
    acc.chunks = 1;
    for index in 0..len {
        let (x, check) = observe(family, n, target, &mut rng);
        acc.push(x);
        if let Some(c) = check {
            if (x >= 0.0) != (c.min_eigenvalue >= 0.0) && c.min_eigenvalue.abs() > -EIGEN_FLOOR {
                return Err(SamplerError::SignMismatch {
                    chunk,
                    index,
                    det: x,
                    min_eigenvalue: c.min_eigenvalue,
                });
            }
            acc.nonnegative += (x >= 0.0) as u64;
            acc.multi_negative += (c.negative >= 2) as u64;
        }
    }
    Ok(acc)
}

fn run_chunks(
    family: Family,
    n: usize,
    target: Target,
    orders: usize,
    samples: u64,
    seed: u64,
    threads: usize,
) -> Result<SampleAccumulator, SamplerError> {
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let job = |c: u64| {
        let len = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
        run_chunk(family, n, target, orders, seed, c, len)
    };
    let parts: Vec<SampleAccumulator> = if threads <= 1 {
        (0..chunks).map(job).collect::<Result<_, _>>()?
    } else {
        parallel_map(chunks, threads, job)?
    };
    let mut total = SampleAccumulator::empty(orders, seed);
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

#[cfg(feature = "parallel")]
fn parallel_map<F>(chunks: u64, threads: usize, job: F) -> Result<Vec<SampleAccumulator>, SamplerError>
where
    F: Fn(u64) -> Result<SampleAccumulator, SamplerError> + Send + Sync,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SamplerError::ThreadPool(e.to_string()))?;
    pool.install(|| (0..chunks).into_par_iter().map(job).collect())
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<F>(chunks: u64, _threads: usize, job: F) -> Result<Vec<SampleAccumulator>, SamplerError>
where
    F: Fn(u64) -> Result<SampleAccumulator, SamplerError>,
{
    (0..chunks).map(job).collect()
}

/// Exact `E[x^k]` where a closed form or table exists.
pub fn exact_moment(family: Family, n: usize, target: Target, k: u32) -> Option<Rat> {
    match (target, family, n) {
        (Target::Det, Family::Complex, 6) => Some(complex_det_moment(6, k)),
        (Target::Det, _, 4) => Some(hs_det_moment(family, k)),
        (Target::DetPt, Family::Real, 4) if k <= MAX_PT_ORDER => assemble_moment(k).ok(),
        _ => None,
    }
}

fn support(n: usize, target: Target) -> (Rat, Rat) {
    match (target, n) {
        (Target::DetPt, _) => pt_support(),
        (Target::Det, 6) => qubit_qutrit_support(),
        (Target::Det, _) => det_support(),
    }
}

/// Streaming estimates of `E[x^1..x^K]` for `x = det(rho)` or
/// `det(rho^PT)`.
pub fn run_estimation(
    target: Target,
    family: Family,
    n: usize,
    orders: u32,
    samples: u64,
    seed: u64,
    threads: usize,
) -> Result<(MomentVector<f64>, SampleAccumulator), SamplerError> {
    check_target(family, n, target)?;
    if samples < MIN_ESTIMATION_SAMPLES {
        return Err(SamplerError::TooFewSamples { n: samples, min: MIN_ESTIMATION_SAMPLES });
    }
    let acc = run_chunks(family, n, target, orders as usize, samples, seed, threads)?;
    let raw = (1..=orders as usize).map(|k| acc.estimate(k).0).collect();
    let mv = MomentVector::new(support(n, target), raw).expect("supports are nonempty");
    Ok((mv, acc))
}

/// Estimated probability that a 4x4 state has `det(rho^PT) >= 0`, with its
/// standard error and the underlying accumulator.
pub fn separability_probability(
    family: Family,
    samples: u64,
    seed: u64,
    threads: usize,
) -> Result<(f64, f64, SampleAccumulator), SamplerError> {
    check_target(family, 4, Target::DetPt)?;
    if samples < MIN_SEPARABILITY_SAMPLES {
        return Err(SamplerError::TooFewSamples { n: samples, min: MIN_SEPARABILITY_SAMPLES });
    }
    let acc = run_chunks(family, 4, Target::DetPt, 1, samples, seed, threads)?;
    let (p, se) = acc.separable_fraction();
    Ok((p, se, acc))
}

/// `samples` raw values of the target, from stream 0 of `seed`.
pub fn sample_values(
    target: Target,
    family: Family,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>, SamplerError> {
    check_target(family, n, target)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..samples).map(|_| observe(family, n, target, &mut rng).0).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub order: u32,
    pub estimate: f64,
    pub std_error: f64,
    /// Exact value as `"num/den"`.
    pub exact_if_known: Option<String>,
    pub z_score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityRecord {
    pub count: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub multi_negative: u64,
}

/// Serializable summary of one Monte Carlo run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McRecord {
    pub schema: String,
    pub family: Family,
    #[serde(rename = "N")]
    pub dimension: usize,
    pub target: Target,
    #[serde(rename = "n")]
    pub samples: u64,
    pub seed: u64,
    pub chunk_size: u64,
    pub moments: Vec<MomentRecord>,
    pub separability: Option<SeparabilityRecord>,
}

impl McRecord {
    pub fn new(family: Family, n: usize, target: Target, acc: &SampleAccumulator) -> Self {
        let moments = (1..=acc.sums.len() as u32)
            .map(|k| {
                let (estimate, std_error) = acc.estimate(k as usize);
                let exact = exact_moment(family, n, target, k);
                MomentRecord {
                    order: k,
                    estimate,
                    std_error,
                    z_score: exact.as_ref().map(|e| (estimate - rat_to_f64(e)) / std_error),
                    exact_if_known: exact.as_ref().map(format_rat),
                }
            })
            .collect();
        let separability = (target == Target::DetPt).then(|| {
            let (estimate, std_error) = acc.separable_fraction();
            SeparabilityRecord {
                count: acc.nonnegative,
                estimate,
                std_error,
                multi_negative: acc.multi_negative,
            }
        });
        McRecord {
            schema: RECORD_SCHEMA.into(),
            family,
            dimension: n,
            target,
            samples: acc.count,
            seed: acc.seed,
            chunk_size: acc.chunk_size,
            moments,
            separability,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn c(re: f64) -> Complex64 {
        Complex::new(re, 0.0)
    }

    #[test]
    fn samples_are_states() {
        let mut r = rng(1);
        for (family, n) in [
            (Family::Real, 4),
            (Family::Complex, 4),
            (Family::Complex, 6),
            (Family::Quaternion, 4),
        ] {
            for _ in 0..200 {
                let rho = sample_hs(family, n, &mut r).unwrap();
                assert!((rho.trace() - 1.0).abs() < TRACE_TOL);
                assert!(rho.eigenvalues()[0] >= EIGEN_FLOOR);
                let again = DensityMatrix::new(family, n, rho.entries().clone()).unwrap();
                assert_eq!(again, rho);
                let det = rho.determinant();
                let bound = if n == 4 { 1.0 / 256.0 } else { 1.0 / 46656.0 };
                assert!((0.0..=bound + 1e-12).contains(&det), "{family} {det}");
            }
        }
        assert!(sample_hs(Family::Real, 6, &mut r).is_err());
        assert!(sample_hs(Family::Complex, 5, &mut r).is_err());
    }

    #[test]
    fn real_samples_are_real_symmetric() {
        let rho = sample_hs(Family::Real, 4, &mut rng(2)).unwrap();
        let m = rho.entries();
        assert!(m.iter().all(|z| z.im == 0.0));
        assert_eq!(m, &m.transpose());
    }

    #[test]
    fn quaternion_embedding_structure() {
        let mut r = rng(3);
        for _ in 0..50 {
            let rho = sample_hs(Family::Quaternion, 4, &mut r).unwrap();
            let m = rho.entries();
            for i in 0..4 {
                for j in 0..4 {
                    let (a, b) = (m[(2 * i, 2 * j)], m[(2 * i, 2 * j + 1)]);
                    assert!((m[(2 * i + 1, 2 * j)] + b.conj()).norm() < 1e-14);
                    assert!((m[(2 * i + 1, 2 * j + 1)] - a.conj()).norm() < 1e-14);
                }
            }
            let eig = rho.eigenvalues();
            for pair in eig.chunks(2) {
                assert!((pair[0] - pair[1]).abs() < 1e-10);
            }
            let distinct: f64 = eig.iter().step_by(2).product();
            assert!((rho.determinant() - distinct).abs() < 1e-10);
        }
    }

    #[test]
    fn partial_transpose_examples() {
        let id = DensityMatrix::new(Family::Real, 4, DMatrix::from_diagonal_element(4, 4, c(0.25))).unwrap();
        let pt = partial_transpose(&id, (2, 2)).unwrap();
        assert_eq!(&pt, id.entries());
        assert!((pt.determinant().re - 1.0 / 256.0).abs() < 1e-18);

        // |00> + |11>, normalized.
        let mut bell = DMatrix::from_element(4, 4, c(0.0));
        for i in [0, 3] {
            for j in [0, 3] {
                bell[(i, j)] = c(0.5);
            }
        }
        let bell = DensityMatrix::new(Family::Real, 4, bell).unwrap();
        let pt = partial_transpose(&bell, (2, 2)).unwrap();
        assert!((pt.determinant().re + 1.0 / 16.0).abs() < 1e-15);
        let eig = sorted(pt.symmetric_eigenvalues().iter().copied());
        assert!((eig[0] + 0.5).abs() < 1e-12 && eig[1..].iter().all(|e| (e - 0.5).abs() < 1e-12));

        assert!(matches!(
            partial_transpose(&bell, (2, 3)),
            Err(SamplerError::DimensionMismatch { n: 4, a: 2, b: 3 })
        ));
        let q = sample_hs(Family::Quaternion, 4, &mut rng(4)).unwrap();
        assert!(partial_transpose(&q, (2, 2)).is_err());
        assert_eq!(factor_dims(6).unwrap(), (2, 3));
        assert!(factor_dims(5).is_err());
    }

    #[test]
    fn partial_transpose_ranges() {
        let mut r = rng(5);
        for family in [Family::Real, Family::Complex] {
            for _ in 0..2000 {
                let rho = sample_hs(family, 4, &mut r).unwrap();
                let pt = partial_transpose(&rho, (2, 2)).unwrap();
                let d = pt.clone().determinant();
                assert!(d.im.abs() < 1e-15);
                assert!((-1.0 / 16.0 - 1e-12..=1.0 / 256.0 + 1e-12).contains(&d.re));
                assert!((pt.trace().re - 1.0).abs() < 1e-12);
            }
        }
        let rho = sample_hs(Family::Complex, 6, &mut r).unwrap();
        let pt = partial_transpose(&rho, (2, 3)).unwrap();
        assert!((&pt - pt.adjoint()).iter().all(|z| z.norm() < 1e-15));
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = DMatrix<Complex64>> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n)
            .prop_map(move |v| DMatrix::from_iterator(n, n, v.into_iter().map(|(a, b)| Complex::new(a, b))))
    }

    proptest! {
        #[test]
        fn partial_transpose_is_an_involution(m4 in arb_matrix(4), m6 in arb_matrix(6)) {
            for (m, dims) in [(m4, (2, 2)), (m6, (2, 3))] {
                let pt = partial_transpose_matrix(&m, dims).unwrap();
                prop_assert_eq!(&partial_transpose_matrix(&pt, dims).unwrap(), &m);
                prop_assert_eq!(pt.trace(), m.trace());
                prop_assert!((pt.norm() - m.norm()).abs() < 1e-12);
            }
        }
    }

    /// Five raw moments per family within 4 standard errors of the exact
    /// values.
    #[test]
    fn estimates_match_exact_moments() {
        for (family, n) in [
            (Family::Real, 4),
            (Family::Complex, 4),
            (Family::Quaternion, 4),
            (Family::Complex, 6),
        ] {
            let (mv, acc) = run_estimation(Target::Det, family, n, 5, 200_000, 11, 1).unwrap();
            assert_eq!(acc.count, 200_000);
            assert_eq!(mv.order(), 5);
            for k in 1..=5 {
                let (est, se) = acc.estimate(k);
                let exact = rat_to_f64(&exact_moment(family, n, Target::Det, k as u32).unwrap());
                assert!(((est - exact) / se).abs() < 4.0, "{family} N={n} k={k}: {est} vs {exact} (se {se})");
            }
        }
        let (_, acc) = run_estimation(Target::DetPt, Family::Real, 4, 5, 200_000, 12, 1).unwrap();
        for k in 1..=5 {
            let (est, se) = acc.estimate(k);
            let exact = rat_to_f64(&assemble_moment(k as u32).unwrap());
            assert!(((est - exact) / se).abs() < 4.0, "detPT k={k}: {est} vs {exact} (se {se})");
        }
        assert_eq!(acc.multi_negative, 0);
    }

    #[test]
    fn estimation_preconditions() {
        assert!(matches!(
            run_estimation(Target::Det, Family::Real, 4, 1, 100, 0, 1),
            Err(SamplerError::TooFewSamples { .. })
        ));
        assert!(run_estimation(Target::DetPt, Family::Quaternion, 4, 1, 20_000, 0, 1).is_err());
        assert!(run_estimation(Target::DetPt, Family::Complex, 6, 1, 20_000, 0, 1).is_err());
        assert!(separability_probability(Family::Real, 20_000, 0, 1).is_err());
    }

    #[test]
    fn runs_are_deterministic() {
        let run = |threads| run_estimation(Target::DetPt, Family::Complex, 4, 3, 150_000, 99, threads).unwrap();
        let (mv1, a1) = run(1);
        let (mv2, a2) = run(1);
        assert_eq!(a1, a2);
        assert_eq!(mv1, mv2);
        assert_eq!(a1.chunks, 3);
        let (_, a3) = run(3);
        assert_eq!(a1, a3);
        let (_, other) = run_estimation(Target::DetPt, Family::Complex, 4, 3, 150_000, 100, 1).unwrap();
        assert_ne!(a1, other);
        assert_eq!(
            sample_values(Target::Det, Family::Real, 4, 10, 5).unwrap(),
            sample_values(Target::Det, Family::Real, 4, 10, 5).unwrap()
        );
    }

    #[test]
    fn complex_separability_and_record() {
        let (p, se, acc) = separability_probability(Family::Complex, 200_000, 21, 1).unwrap();
        // Known complex two-qubit HS value 8/33.
        assert!(((p - 8.0 / 33.0) / se).abs() < 4.0, "{p} +- {se}");
        assert_eq!(acc.multi_negative, 0);
        let record = McRecord::new(Family::Complex, 4, Target::DetPt, &acc);
        let json = serde_json::to_value(&record).unwrap();
        assert_eq!(json["schema"], RECORD_SCHEMA);
        assert_eq!(json["N"], 4);
        assert_eq!(json["n"], 200_000);
        assert_eq!(json["target"], "detPT");
        assert_eq!(json["family"], "complex");
        assert!(json["moments"][0]["exact_if_known"].is_null());
        assert_eq!(json["separability"]["count"], acc.nonnegative);
        let back: McRecord = serde_json::from_value(json).unwrap();
        assert_eq!(back, record);
    }
}

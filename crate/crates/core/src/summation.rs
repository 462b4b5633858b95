use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

/// Kahan-Babuska-Neumaier compensated sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        NeumaierSum::default()
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = if a.abs() >= b.abs() {
        (a - s) + b
    } else {
        (b - s) + a
    };
    (s, err)
}

impl AddAssign<f64> for NeumaierSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        let (s, err) = two_sum(self.sum, rhs);
        self.sum = s;
        self.compensation += err;
    }
}

impl Add for NeumaierSum {
    type Output = NeumaierSum;

    fn add(self, rhs: NeumaierSum) -> NeumaierSum {
        let (s, err) = two_sum(self.sum, rhs.sum);
        NeumaierSum {
            sum: s,
            compensation: self.compensation + rhs.compensation + err,
        }
    }
}

/// Mean and standard error of the mean from running sums of `x` and `x^2`.
pub fn mean_and_std_error(sum: f64, sum_sq: f64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let mut s = NeumaierSum::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s += x;
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (1..=1000).map(|k| 1.0 / k as f64).collect();
        let mut whole = NeumaierSum::new();
        xs.iter().for_each(|&x| whole += x);
        let (mut a, mut b) = (NeumaierSum::new(), NeumaierSum::new());
        xs[..400].iter().for_each(|&x| a += x);
        xs[400..].iter().for_each(|&x| b += x);
        assert!(((a + b).value() - whole.value()).abs() < 1e-15);
    }

    #[test]
    fn std_error_of_constant_is_zero() {
        let (m, se) = mean_and_std_error(10.0, 20.0, 5);
        assert_eq!(m, 2.0);
        assert_eq!(se, 0.0);
    }
}

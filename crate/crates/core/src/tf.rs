//! Rational transfer functions with real coefficients in descending powers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::roots::{poly_roots, DEFAULT_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTF {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl RationalTF {
    /// Builds a transfer function, trimming leading zero coefficients.
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        let num = trim_leading(num, 0.0);
        let den = trim_leading(den, 0.0);
        if den.is_empty() {
            return Err(Error::param("den", "denominator is identically zero"));
        }
        if num.iter().chain(&den).any(|c| !c.is_finite()) {
            return Err(Error::param("coefficients", "must be finite"));
        }
        let num = if num.is_empty() { vec![0.0] } else { num };
        Ok(RationalTF { num, den })
    }

    pub fn constant(k: f64) -> Self {
        RationalTF {
            num: vec![k],
            den: vec![1.0],
        }
    }

    pub fn num_degree(&self) -> usize {
        self.num.len() - 1
    }

    pub fn den_degree(&self) -> usize {
        self.den.len() - 1
    }

    pub fn is_proper(&self) -> bool {
        self.num_degree() <= self.den_degree()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        polyval(&self.num, s) / polyval(&self.den, s)
    }

    /// Value at `s = 0`.
    pub fn dc_gain(&self) -> f64 {
        self.num[self.num.len() - 1] / self.den[self.den.len() - 1]
    }

    /// Scales numerator and denominator so the denominator is monic.
    pub fn monic(&self) -> Self {
        let lead = self.den[0];
        RationalTF {
            num: self.num.iter().map(|c| c / lead).collect(),
            den: self.den.iter().map(|c| c / lead).collect(),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        RationalTF {
            num: self.num.iter().map(|c| c * k).collect(),
            den: self.den.clone(),
        }
    }

    /// Series connection `self * other`.
    pub fn series(&self, other: &RationalTF) -> Self {
        RationalTF {
            num: polymul(&self.num, &other.num),
            den: polymul(&self.den, &other.den),
        }
    }

    /// Removes roots at the origin shared by numerator and denominator.
    ///
    /// A common factor `s^k` shows up as trailing coefficients that are
    /// (relatively) zero in both polynomials.
    pub fn cancel_common_origin_roots(&self, rel_tol: f64) -> Self {
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        let num_scale = max_abs(&num);
        let den_scale = max_abs(&den);
        while num.len() > 1
            && den.len() > 1
            && num[num.len() - 1].abs() <= rel_tol * num_scale
            && den[den.len() - 1].abs() <= rel_tol * den_scale
        {
            num.pop();
            den.pop();
        }
        RationalTF { num, den }
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        if self.den_degree() == 0 {
            return Ok(Vec::new());
        }
        Ok(poly_roots(&self.den, DEFAULT_TOL)?.roots)
    }

    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        if self.num_degree() == 0 {
            return Ok(Vec::new());
        }
        Ok(poly_roots(&self.num, DEFAULT_TOL)?.roots)
    }
}

/// Horner evaluation of a real polynomial (descending coefficients) at a
/// complex point.
pub fn polyval(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

pub fn polymul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Sum of two descending-coefficient polynomials, aligned at the constant term.
pub fn polyadd(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut out = vec![0.0; n];
    for (i, x) in a.iter().rev().enumerate() {
        out[n - 1 - i] += x;
    }
    for (i, x) in b.iter().rev().enumerate() {
        out[n - 1 - i] += x;
    }
    out
}

fn max_abs(c: &[f64]) -> f64 {
    c.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub(crate) fn trim_leading(mut c: Vec<f64>, abs_tol: f64) -> Vec<f64> {
    let first = c.iter().position(|x| x.abs() > abs_tol).unwrap_or(c.len());
    c.drain(..first);
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_helpers() {
        assert_eq!(polymul(&[1.0, 1.0], &[1.0, 2.0]), vec![1.0, 3.0, 2.0]);
        assert_eq!(polyadd(&[1.0, 0.0, 0.0], &[2.0, 3.0]), vec![1.0, 2.0, 3.0]);
        let v = polyval(&[1.0, 3.0, 2.0], Complex64::new(-1.0, 0.0));
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn leading_zeros_are_trimmed() {
        let tf = RationalTF::new(vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(tf.num, vec![1.0]);
        assert_eq!(tf.den, vec![1.0, 2.0]);
        assert!(RationalTF::new(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn common_origin_roots_cancel() {
        let tf = RationalTF::new(vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 2.0, 0.0]).unwrap();
        let m = tf.cancel_common_origin_roots(1e-12);
        assert_eq!(m.num, vec![2.0, 1.0]);
        assert_eq!(m.den, vec![1.0, 3.0, 2.0]);
    }
}

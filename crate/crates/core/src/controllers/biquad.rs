//! Bilinear (Tustin) discretization into cascaded second-order sections.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::roots::{poly_roots, sort_roots, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::tf::{polymul, polyval, RationalTF};

/// Second-order section `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`
/// in direct form II transposed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
    pub s1: f64,
    pub s2: f64,
}

impl Biquad {
    pub fn passthrough() -> Self {
        Biquad {
            b0: 1.0,
            ..Default::default()
        }
    }

    pub fn step(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.s1;
        self.s1 = self.b1 * x - self.a1 * y + self.s2;
        self.s2 = self.b2 * x - self.a2 * y;
        y
    }

    pub fn response(&self, z: Complex64) -> Complex64 {
        let zi = z.inv();
        (self.b0 + zi * (self.b1 + zi * self.b2)) / (1.0 + zi * (self.a1 + zi * self.a2))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteBiquadChain {
    pub sections: Vec<Biquad>,
    pub fs: f64,
}

impl DiscreteBiquadChain {
    pub fn response(&self, z: Complex64) -> Complex64 {
        self.sections.iter().map(|s| s.response(z)).product()
    }

    /// Frequency response at `omega` [rad/s].
    pub fn frequency_response(&self, omega: f64) -> Complex64 {
        self.response(Complex64::from_polar(1.0, omega / self.fs))
    }

    pub fn reset(&mut self) {
        for s in &mut self.sections {
            s.s1 = 0.0;
            s.s2 = 0.0;
        }
    }
}

/// Cascaded DF-II-T update.
pub fn biquad_step(chain: &mut DiscreteBiquadChain, input: f64) -> f64 {
    chain.sections.iter_mut().fold(input, |x, s| s.step(x))
}

/// Maps `s -> 2 fs (z - 1) / (z + 1)` without pre-warping.
pub fn discretize_tustin(tf: &RationalTF, fs: f64) -> Result<DiscreteBiquadChain> {
    if !(fs > 0.0 && fs.is_finite()) {
        return Err(Error::param("fs", format!("must be > 0, got {fs}")));
    }
    if !tf.is_proper() {
        return Err(Error::param("tf", "transfer function must be proper"));
    }
    let n = tf.den_degree();
    let k = 2.0 * fs;

    // Singular when a continuous pole sits at s = 2 fs.
    let at_k = polyval(&tf.den, Complex64::new(k, 0.0)).re;
    let den_scale: f64 = tf.den.iter().enumerate().map(|(i, c)| c.abs() * k.powi((n - i) as i32)).sum();
    if at_k.abs() <= 1e-12 * den_scale {
        return Err(Error::TustinSingularity { value: at_k });
    }

    if n == 0 {
        return Ok(DiscreteBiquadChain {
            sections: vec![Biquad {
                b0: tf.num[0] / tf.den[0],
                ..Default::default()
            }],
            fs,
        });
    }

    let num_z = substitute(&tf.num, n, k);
    let den_z = substitute(&tf.den, n, k);
    let gain = num_z[0] / den_z[0];
    let zeros = if num_z.iter().all(|c| *c == 0.0) {
        Vec::new()
    } else {
        z_roots(&num_z)?
    };
    let poles = z_roots(&den_z)?;

    let zero_groups = group_conjugates(zeros);
    let pole_groups = group_conjugates(poles);
    let count = pole_groups.len().max(zero_groups.len());
    let mut sections = Vec::with_capacity(count);
    for i in 0..count {
        let b = zero_groups.get(i).cloned().unwrap_or_else(|| vec![1.0]);
        let a = pole_groups.get(i).cloned().unwrap_or_else(|| vec![1.0]);
        let b = pad_section(&b);
        let a = pad_section(&a);
        let g = if i == 0 { gain } else { 1.0 };
        sections.push(Biquad {
            b0: g * b[0],
            b1: g * b[1],
            b2: g * b[2],
            a1: a[1],
            a2: a[2],
            s1: 0.0,
            s2: 0.0,
        });
    }
    // s = 0 maps to z = 1; pin the chain's DC gain to the continuous one so
    // rounding in the root factorization cannot move it.
    let dc = tf.dc_gain();
    let chain_dc: f64 = sections.iter().map(|s| s.response(Complex64::new(1.0, 0.0)).re).product();
    if dc.is_finite() && dc != 0.0 && chain_dc.is_finite() && chain_dc != 0.0 {
        let scale = dc / chain_dc;
        let first = &mut sections[0];
        first.b0 *= scale;
        first.b1 *= scale;
        first.b2 *= scale;
    }
    if num_z.iter().all(|c| *c == 0.0) {
        for s in &mut sections {
            s.b0 = 0.0;
            s.b1 = 0.0;
            s.b2 = 0.0;
        }
    }
    Ok(DiscreteBiquadChain { sections, fs })
}

/// `sum_i c_i k^i (z - 1)^i (z + 1)^(n - i)` for descending `c` padded to
/// degree `n`; returned in descending powers of `z`.
fn substitute(c: &[f64], n: usize, k: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    let deg = c.len() - 1;
    for (idx, coeff) in c.iter().enumerate() {
        let i = deg - idx;
        let mut term = vec![coeff * k.powi(i as i32)];
        for _ in 0..i {
            term = polymul(&term, &[1.0, -1.0]);
        }
        for _ in 0..(n - i) {
            term = polymul(&term, &[1.0, 1.0]);
        }
        for (o, t) in out.iter_mut().zip(term) {
            *o += t;
        }
    }
    out
}

fn z_roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let first = c.iter().position(|x| *x != 0.0).unwrap_or(c.len());
    let c = &c[first..];
    if c.len() < 2 {
        return Ok(Vec::new());
    }
    Ok(poly_roots(c, DEFAULT_TOL)?.roots)
}

/// Groups roots into real quadratics (or a trailing linear factor); each
/// group is returned as monic polynomial coefficients in descending powers.
fn group_conjugates(mut roots: Vec<Complex64>) -> Vec<Vec<f64>> {
    sort_roots(&mut roots);
    let (complex, real): (Vec<_>, Vec<_>) = roots.into_iter().partition(|r| r.im != 0.0);
    let mut groups = Vec::new();
    for r in complex.iter().filter(|r| r.im > 0.0) {
        groups.push(vec![1.0, -2.0 * r.re, r.norm_sqr()]);
    }
    for pair in real.chunks(2) {
        match pair {
            [a, b] => groups.push(vec![1.0, -(a.re + b.re), a.re * b.re]),
            [a] => groups.push(vec![1.0, -a.re]),
            _ => unreachable!(),
        }
    }
    groups
}

fn pad_section(p: &[f64]) -> [f64; 3] {
    // descending powers of z over z^2 equals ascending powers of z^-1
    let mut out = [0.0; 3];
    for (i, c) in p.iter().enumerate() {
        out[i] = *c;
    }
    out
}

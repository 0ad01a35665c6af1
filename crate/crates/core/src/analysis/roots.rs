//! Polynomial roots by simultaneous Aberth-Ehrlich iteration.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct PolyRoots {
    /// Roots sorted by real part, then imaginary part.
    pub roots: Vec<Complex64>,
    /// Largest backward error `|p(r)| / sum_i |a_i| |r|^(n-i)` over the roots.
    pub residual: f64,
}

/// Finds all complex roots of the polynomial with descending real
/// coefficients `coeffs`.
///
/// Exact zeros (trailing zero coefficients) are split off first; the rest is
/// iterated to convergence and Newton-polished. Results for real input are
/// made exactly conjugate-symmetric.
pub fn poly_roots(coeffs: &[f64], tol: f64) -> Result<PolyRoots> {
    if coeffs.len() < 2 {
        return Err(Error::param("coeffs", "degree must be >= 1"));
    }
    if coeffs[0] == 0.0 || !coeffs[0].is_finite() {
        return Err(Error::param("coeffs", "leading coefficient must be nonzero"));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::param("coeffs", "coefficients must be finite"));
    }

    let zero_count = coeffs.iter().rev().take_while(|c| **c == 0.0).count();
    let reduced: Vec<f64> = coeffs[..coeffs.len() - zero_count]
        .iter()
        .map(|c| c / coeffs[0])
        .collect();
    let mut roots = vec![Complex64::new(0.0, 0.0); zero_count];

    match reduced.len() - 1 {
        0 => {}
        1 => roots.push(Complex64::new(-reduced[1], 0.0)),
        _ => roots.extend(aberth(&reduced, tol)?),
    }

    let roots = enforce_conjugate_symmetry(roots);
    let residual = roots
        .iter()
        .map(|r| backward_error(coeffs, *r))
        .fold(0.0, f64::max);
    if residual > tol {
        return Err(Error::RootsNotConverged {
            iterations: MAX_ITERATIONS,
            residual,
        });
    }
    Ok(PolyRoots { roots, residual })
}

fn eval_with_derivative(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(c[0], 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in &c[1..] {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

pub(crate) fn backward_error(c: &[f64], z: Complex64) -> f64 {
    let az = z.norm();
    let mut p = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for &a in c {
        p = p * z + a;
        scale = scale * az + a.abs();
    }
    if scale == 0.0 {
        0.0
    } else {
        p.norm() / scale
    }
}

fn aberth(monic: &[f64], tol: f64) -> Result<Vec<Complex64>> {
    let n = monic.len() - 1;
    // Initial guesses on a circle inside the Cauchy bound, off the real axis.
    let radius = monic[1..]
        .iter()
        .enumerate()
        .map(|(k, a)| a.abs().powf(1.0 / (k as f64 + 1.0)))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, angle)
        })
        .collect();

    let mut best = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let mut max_step = 0.0f64;
        for k in 0..n {
            let (p, dp) = eval_with_derivative(monic, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        let residual = z.iter().map(|r| backward_error(monic, *r)).fold(0.0, f64::max);
        best = best.min(residual);
        if max_step < 1e-15 || (residual < tol * 1e-3 && max_step < 1e-12) {
            break;
        }
    }

    for r in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval_with_derivative(monic, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let candidate = *r - p / dp;
            if candidate.is_finite() && backward_error(monic, candidate) <= backward_error(monic, *r) {
                *r = candidate;
            } else {
                break;
            }
        }
    }

    let residual = z.iter().map(|r| backward_error(monic, *r)).fold(0.0, f64::max);
    if residual > tol {
        return Err(Error::RootsNotConverged {
            iterations: MAX_ITERATIONS,
            residual: best.min(residual),
        });
    }
    Ok(z)
}

fn enforce_conjugate_symmetry(roots: Vec<Complex64>) -> Vec<Complex64> {
    let threshold = |z: &Complex64| 1e-10 * (1.0 + z.norm());
    let mut out = Vec::with_capacity(roots.len());
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for z in roots {
        if z.im.abs() <= threshold(&z) {
            out.push(Complex64::new(z.re, 0.0));
        } else if z.im > 0.0 {
            upper.push(z);
        } else {
            lower.push(z);
        }
    }
    for u in upper {
        let partner = lower
            .iter()
            .enumerate()
            .min_by(|a, b| {
                let da = (a.1 - u.conj()).norm();
                let db = (b.1 - u.conj()).norm();
                da.total_cmp(&db)
            })
            .map(|(i, _)| i);
        match partner {
            Some(i) => {
                let l = lower.swap_remove(i);
                let mean = (u + l.conj()) * 0.5;
                out.push(mean);
                out.push(mean.conj());
            }
            None => out.push(u),
        }
    }
    out.extend(lower);
    sort_roots(&mut out);
    out
}

pub(crate) fn sort_roots(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

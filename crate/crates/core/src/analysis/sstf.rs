//! State space to transfer function via the Faddeev-LeVerrier recursion.

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::error::Result;
use crate::plant::StateSpaceModel;
use crate::tf::{trim_leading, RationalTF};

/// Relative tolerance used to drop numerically-zero leading numerator
/// coefficients.
const TRIM_TOL: f64 = 1e-12;

/// Characteristic polynomial `det(sI - A)` (descending, monic) together with
/// the adjugate coefficient matrices `M_1..M_n`, where
/// `adj(sI - A) = sum_k M_k s^(n-k)`.
pub fn faddeev_leverrier(a: &DMatrix<f64>) -> (Vec<f64>, Vec<DMatrix<f64>>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "A must be square");
    let identity = DMatrix::<f64>::identity(n, n);
    let mut charpoly = vec![0.0; n + 1];
    charpoly[0] = 1.0;
    let mut adjugates = Vec::with_capacity(n);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + &identity * charpoly[k - 1];
        charpoly[k] = -(a * &m).trace() / k as f64;
        adjugates.push(m.clone());
    }
    (charpoly, adjugates)
}

/// SISO transfer function `C adj(sI - A) B / det(sI - A)` for arbitrary size.
pub fn ss_to_tf_parts(a: &DMatrix<f64>, b: &DVector<f64>, c: &RowDVector<f64>) -> Result<RationalTF> {
    let (den, adjugates) = faddeev_leverrier(a);
    let num: Vec<f64> = adjugates.iter().map(|m| (c * m * b)[(0, 0)]).collect();
    let scale = num.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let num = trim_leading(num, TRIM_TOL * scale);
    RationalTF::new(num, den)
}

/// Output-to-input transfer function of the linearized plant. The
/// denominator keeps the full fourth-order characteristic polynomial; use
/// [`RationalTF::cancel_common_origin_roots`] for the minimal form.
pub fn ss_to_tf(model: &StateSpaceModel) -> Result<RationalTF> {
    let a = DMatrix::from_iterator(4, 4, model.a.iter().copied());
    let b = DVector::from_iterator(4, model.b.iter().copied());
    let c = RowDVector::from_iterator(4, model.c.iter().copied());
    ss_to_tf_parts(&a, &b, &c)
}

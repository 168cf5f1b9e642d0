//! Scalar field abstraction: the tensor algebra runs over `f64` or `Complex64`.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use faer::Mat;
use ndarray::Array2;
use num_complex::Complex64;

/// Marker for the scalar field of a tensor, used by the JSON interchange format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

/// Entry type of tensors: real or complex double precision.
///
/// Besides arithmetic this carries the dense factorizations (thin QR / thin SVD)
/// so that the rounding and cross sweeps stay generic over the field.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
{
    const FIELD: Field;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn from_re_im(re: f64, im: f64) -> Self;
    fn conj(self) -> Self;
    /// Modulus.
    fn abs(self) -> f64;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn is_finite(self) -> bool;
    /// Multiply by a real scalar.
    fn scale(self, x: f64) -> Self;

    /// Thin QR: `a = q * r` with `q` of shape m×k, `r` k×n, k = min(m, n).
    fn thin_qr(a: &Array2<Self>) -> (Array2<Self>, Array2<Self>);

    /// Thin SVD: `a = u * diag(s) * v^H` with `u` m×k, `v` n×k and `s`
    /// non-negative in descending order, k = min(m, n).
    fn thin_svd(a: &Array2<Self>) -> (Array2<Self>, Vec<f64>, Array2<Self>);
}

fn to_faer<T: Scalar, F: faer::traits::ComplexField>(
    a: &Array2<T>,
    map: impl Fn(T) -> F,
) -> Mat<F> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| map(a[(i, j)]))
}

fn from_faer<T: Scalar, F: faer::traits::ComplexField>(
    m: faer::MatRef<'_, F>,
    map: impl Fn(&F) -> T,
) -> Array2<T> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| map(&m[(i, j)]))
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_re_im(re: f64, _im: f64) -> Self {
        re
    }
    fn conj(self) -> Self {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }

    fn thin_qr(a: &Array2<Self>) -> (Array2<Self>, Array2<Self>) {
        let qr = to_faer(a, |x| x).qr();
        let q = from_faer(qr.compute_thin_Q().as_ref(), |x| *x);
        let r = from_faer(qr.thin_R().as_ref(), |x| *x);
        (q, r)
    }

    fn thin_svd(a: &Array2<Self>) -> (Array2<Self>, Vec<f64>, Array2<Self>) {
        let svd = to_faer(a, |x| x).thin_svd().expect("svd did not converge");
        let u = from_faer(svd.U().as_ref(), |x| *x);
        let v = from_faer(svd.V().as_ref(), |x| *x);
        let s = svd.S();
        let sv = (0..s.dim()).map(|i| s[i]).collect();
        (u, sv, v)
    }
}

impl Scalar for Complex64 {
    const FIELD: Field = Field::Complex;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_re_im(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn scale(self, x: f64) -> Self {
        Complex64::new(self.re * x, self.im * x)
    }

    fn thin_qr(a: &Array2<Self>) -> (Array2<Self>, Array2<Self>) {
        let qr = to_faer(a, |x| x).qr();
        let q = from_faer(qr.compute_thin_Q().as_ref(), |x| *x);
        let r = from_faer(qr.thin_R().as_ref(), |x| *x);
        (q, r)
    }

    fn thin_svd(a: &Array2<Self>) -> (Array2<Self>, Vec<f64>, Array2<Self>) {
        let svd = to_faer(a, |x| x).thin_svd().expect("svd did not converge");
        let u = from_faer(svd.U().as_ref(), |x| *x);
        let v = from_faer(svd.V().as_ref(), |x| *x);
        let s = svd.S();
        let sv = (0..s.dim()).map(|i| s[i].re).collect();
        (u, sv, v)
    }
}

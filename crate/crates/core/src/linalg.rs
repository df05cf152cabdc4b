//! Thin SVD for the solver, computed by faer.
//!
//! nalgebra's own SVD stops iterating too early on matrices whose singular
//! values cluster tightly, which the folding systems produce routinely (many
//! columns of equal weight); its factors then carry relative errors around
//! 1e-6. faer's SVD is accurate to working precision on the same inputs.

use faer::Mat;
use nalgebra::{Complex, ComplexField, DMatrix, DVector};

use crate::error::{Result, SmrsError};

/// `A = U · diag(s) · Vᴴ` with singular values in non-increasing order.
/// All-zero rows of `A` are factored out first, so `s` may hold fewer than
/// `min(m, n)` values; the ones left out are zero.
#[derive(Debug, Clone)]
pub struct ThinSvd<E: ComplexField> {
    pub u: DMatrix<E>,
    pub s: DVector<E::RealField>,
    pub v: DMatrix<E>,
}

mod sealed {
    pub trait Sealed {}
}

/// Element types the solver can factor: `f32`, `f64` and their complex
/// counterparts.
pub trait Field: ComplexField + Copy + sealed::Sealed {
    fn thin_svd(a: &DMatrix<Self>) -> Result<ThinSvd<Self>>;
    /// All `min(m, n)` singular values, non-increasing.
    fn singular_values(a: &DMatrix<Self>) -> Result<DVector<Self::RealField>>;
}

fn to_faer<E: Copy>(a: &DMatrix<E>) -> Mat<E> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn no_convergence(_: faer::linalg::svd::SvdError) -> SmrsError {
    SmrsError::Degenerate("singular value decomposition did not converge")
}

fn nonzero_rows<E: ComplexField>(a: &DMatrix<E>) -> Vec<usize> {
    (0..a.nrows())
        .filter(|&r| a.row(r).iter().any(|e| !e.is_zero()))
        .collect()
}

/// faer's iteration occasionally fails on exactly structured inputs (entries
/// drawn from a handful of values, zero rows). Dropping zero rows avoids most
/// cases; the rest go through once more on a copy scaled by 3, which changes
/// the rounding pattern, and the singular values are scaled back.
fn with_retry<E: Field, R>(
    a: &DMatrix<E>,
    raw: impl Fn(&DMatrix<E>) -> std::result::Result<R, faer::linalg::svd::SvdError>,
    unscale: impl Fn(R, E::RealField) -> R,
) -> Result<R> {
    match raw(a) {
        Ok(r) => Ok(r),
        Err(_) => {
            let three: E::RealField = nalgebra::convert(3.0);
            let r = raw(&a.scale(three.clone())).map_err(no_convergence)?;
            Ok(unscale(r, three))
        }
    }
}

fn robust_thin_svd<E: Field>(
    a: &DMatrix<E>,
    raw: impl Fn(&DMatrix<E>) -> std::result::Result<ThinSvd<E>, faer::linalg::svd::SvdError>,
) -> Result<ThinSvd<E>> {
    let keep = nonzero_rows(a);
    let unscale = |mut svd: ThinSvd<E>, c: E::RealField| {
        svd.s.iter_mut().for_each(|x| *x = x.clone() / c.clone());
        svd
    };
    if keep.len() == a.nrows() {
        return with_retry(a, raw, unscale);
    }
    let n = a.ncols();
    if keep.is_empty() || n == 0 {
        return Ok(ThinSvd {
            u: DMatrix::zeros(a.nrows(), 0),
            s: DVector::zeros(0),
            v: DMatrix::zeros(n, 0),
        });
    }
    let part = with_retry(&a.select_rows(keep.iter()), raw, unscale)?;
    let mut u = DMatrix::zeros(a.nrows(), part.u.ncols());
    for (pos, &r) in keep.iter().enumerate() {
        u.row_mut(r).copy_from(&part.u.row(pos));
    }
    Ok(ThinSvd {
        u,
        s: part.s,
        v: part.v,
    })
}

fn robust_singular_values<E: Field>(
    a: &DMatrix<E>,
    raw: impl Fn(&DMatrix<E>) -> std::result::Result<DVector<E::RealField>, faer::linalg::svd::SvdError>,
) -> Result<DVector<E::RealField>> {
    let k = a.nrows().min(a.ncols());
    let keep = nonzero_rows(a);
    let unscale = |s: DVector<E::RealField>, c: E::RealField| s.map(|x| x / c.clone());
    let part = if keep.len() == a.nrows() {
        with_retry(a, raw, unscale)?
    } else if keep.is_empty() || a.ncols() == 0 {
        DVector::zeros(0)
    } else {
        with_retry(&a.select_rows(keep.iter()), raw, unscale)?
    };
    let mut s = DVector::zeros(k);
    s.rows_mut(0, part.len()).copy_from(&part);
    Ok(s)
}

macro_rules! impl_field {
    ($t:ty, $real:expr) => {
        impl sealed::Sealed for $t {}

        impl Field for $t {
            fn thin_svd(a: &DMatrix<Self>) -> Result<ThinSvd<Self>> {
                robust_thin_svd(a, |a| {
                    let svd = to_faer(a).thin_svd()?;
                    let (u, v) = (svd.U(), svd.V());
                    let s = svd.S().column_vector();
                    Ok(ThinSvd {
                        u: DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]),
                        s: DVector::from_fn(s.nrows(), |i, _| $real(s[i])),
                        v: DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)]),
                    })
                })
            }

            fn singular_values(a: &DMatrix<Self>) -> Result<DVector<Self::RealField>> {
                robust_singular_values(a, |a| Ok(DVector::from_vec(to_faer(a).singular_values()?)))
            }
        }
    };
}

impl_field!(f32, |x: f32| x);
impl_field!(f64, |x: f64| x);
impl_field!(Complex<f32>, |z: Complex<f32>| z.re);
impl_field!(Complex<f64>, |z: Complex<f64>| z.re);

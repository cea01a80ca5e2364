//! Singular value decomposition backed by faer.
//!
//! nalgebra's bidiagonal SVD loses accuracy on exactly rank-deficient input, which is
//! precisely the case for null spaces and collinear regression designs.

use faer::Mat;
use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;

/// Thin SVD `m = u · diag(singular_values) · vᴴ`.
#[derive(Debug, Clone)]
pub struct ThinSvd<N: ComplexField> {
    pub u: DMatrix<N>,
    pub singular_values: DVector<N::RealField>,
    pub v: DMatrix<N>,
}

pub trait SvdScalar: ComplexField + Copy {
    /// Returns `None` if the iteration fails to converge.
    fn thin_svd(m: &DMatrix<Self>) -> Option<ThinSvd<Self>>;
}

macro_rules! impl_svd {
    ($t:ty, $re:ty, $to_real:expr) => {
        impl SvdScalar for $t {
            fn thin_svd(m: &DMatrix<Self>) -> Option<ThinSvd<Self>> {
                let (r, c) = m.shape();
                if r == 0 || c == 0 {
                    let k = r.min(c);
                    return Some(ThinSvd {
                        u: DMatrix::zeros(r, k),
                        singular_values: DVector::zeros(k),
                        v: DMatrix::zeros(c, k),
                    });
                }
                let f = Mat::<$t>::from_fn(r, c, |i, j| m[(i, j)]);
                let svd = f.thin_svd().ok()?;
                let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
                let k = s.nrows();
                let to_real: fn($t) -> $re = $to_real;
                Some(ThinSvd {
                    u: DMatrix::from_fn(r, k, |i, j| u[(i, j)]),
                    singular_values: DVector::from_fn(k, |i, _| to_real(s[i])),
                    v: DMatrix::from_fn(c, k, |i, j| v[(i, j)]),
                })
            }
        }
    };
}

impl_svd!(f64, f64, |x| x);
impl_svd!(f32, f32, |x| x);
impl_svd!(Complex<f64>, f64, |x| x.re);
impl_svd!(Complex<f32>, f32, |x| x.re);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_rank_deficient_design() {
        let m = DMatrix::<f64>::from_fn(30, 3, |i, j| if j == 2 { 1.0 } else { (i as f64 * 0.37).sin() });
        let mut m = m;
        for i in 0..30 {
            m[(i, 1)] = 2.0 * m[(i, 0)];
        }
        let svd = f64::thin_svd(&m).unwrap();
        let rec = &svd.u * DMatrix::from_diagonal(&svd.singular_values) * svd.v.adjoint();
        assert!((rec - m).amax() < 1e-13);
        assert!(svd.singular_values.min() < 1e-12);
    }

    #[test]
    fn complex_singular_values_are_real_and_sorted() {
        let m = DMatrix::<Complex<f64>>::from_fn(5, 5, |i, j| Complex::new((i * j) as f64, i as f64 - j as f64));
        let svd = Complex::<f64>::thin_svd(&m).unwrap();
        let s = &svd.singular_values;
        assert!(s.iter().zip(s.iter().skip(1)).all(|(a, b)| a >= b));
        let rec = &svd.u * DMatrix::from_diagonal(&s.map(|x| Complex::new(x, 0.0))) * svd.v.adjoint();
        assert!((rec - m).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }
}

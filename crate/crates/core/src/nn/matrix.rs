use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Sub};

/// Element type of the dense engine: `f32` for training, `f64` for the
/// gradient-check shadow mode.
pub trait Scalar:
    Copy
    + Debug
    + Default
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + AddAssign
    + 'static
{
    const ZERO: Self;
    const ONE: Self;
    /// Smallest positive normal value.
    const MIN_NORMAL: Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn is_finite(self) -> bool;
    fn sqrt(self) -> Self;

    /// `C = A·B + beta·C` over strided operands (`alpha = 1`).
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        a: &[Self],
        rsa: isize,
        csa: isize,
        b: &[Self],
        rsb: isize,
        csb: isize,
        beta: Self,
        c: &mut [Self],
        rsc: isize,
        csc: isize,
    );
}

macro_rules! impl_scalar {
    ($t:ty, $gemm:path) => {
        impl Scalar for $t {
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;
            const MIN_NORMAL: Self = <$t>::MIN_POSITIVE;
            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
            #[inline]
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }
            #[inline]
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                a: &[Self],
                rsa: isize,
                csa: isize,
                b: &[Self],
                rsb: isize,
                csb: isize,
                beta: Self,
                c: &mut [Self],
                rsc: isize,
                csc: isize,
            ) {
                if m == 0 || n == 0 {
                    return;
                }
                // Bounds: every operand is a dense row-major buffer sized by the caller.
                debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
                unsafe {
                    $gemm(
                        m,
                        k,
                        n,
                        1.0,
                        a.as_ptr(),
                        rsa,
                        csa,
                        b.as_ptr(),
                        rsb,
                        csb,
                        beta,
                        c.as_mut_ptr(),
                        rsc,
                        csc,
                    );
                }
            }
        }
    };
}

impl_scalar!(f32, matrixmultiply::sgemm);
impl_scalar!(f64, matrixmultiply::dgemm);

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::ZERO; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(rows * cols, data.len(), "matrix storage does not match {rows}x{cols}");
        Self { rows, cols, data }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| U::from_f64(v.to_f64())).collect(),
        }
    }

    /// `self · wᵀ + bias` for a weight matrix shaped `(out, in)`.
    pub fn affine(&self, w: &Matrix<T>, bias: &[T]) -> Matrix<T> {
        assert_eq!(self.cols, w.cols);
        let mut out = Matrix::zeros(self.rows, w.rows);
        for r in out.data.chunks_exact_mut(w.rows) {
            r.copy_from_slice(bias);
        }
        T::gemm(
            self.rows,
            self.cols,
            w.rows,
            &self.data,
            self.cols as isize,
            1,
            &w.data,
            1,
            w.cols as isize,
            T::ONE,
            &mut out.data,
            w.rows as isize,
            1,
        );
        out
    }

    /// `self · w` (used to push gradients back through a `(out, in)` weight).
    pub fn matmul(&self, w: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, w.rows);
        let mut out = Matrix::zeros(self.rows, w.cols);
        T::gemm(
            self.rows,
            self.cols,
            w.cols,
            &self.data,
            self.cols as isize,
            1,
            &w.data,
            w.cols as isize,
            1,
            T::ZERO,
            &mut out.data,
            w.cols as isize,
            1,
        );
        out
    }

    /// `acc += selfᵀ · x`, the weight gradient for upstream gradient `self`.
    pub fn accumulate_outer(&self, x: &Matrix<T>, acc: &mut Matrix<T>) {
        assert_eq!(self.rows, x.rows);
        assert_eq!((acc.rows, acc.cols), (self.cols, x.cols));
        T::gemm(
            self.cols,
            self.rows,
            x.cols,
            &self.data,
            1,
            self.cols as isize,
            &x.data,
            x.cols as isize,
            1,
            T::ONE,
            &mut acc.data,
            acc.cols as isize,
            1,
        );
    }

    /// Adds each column sum into `acc`.
    pub fn accumulate_column_sums(&self, acc: &mut [T]) {
        for r in self.data.chunks_exact(self.cols) {
            for (a, v) in acc.iter_mut().zip(r) {
                *a += *v;
            }
        }
    }
}

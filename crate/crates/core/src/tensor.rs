//! Row-major dense matrices and the named-parameter abstraction used by the
//! optimizers, serializer and gradient checks.

use rand::Rng;

use crate::scalar::{axpy, dot, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(rows * cols, data.len(), "matrix data length");
        Self { rows, cols, data }
    }

    /// Uniform initialization in `[-bound, bound]`.
    pub fn uniform<R: Rng>(rows: usize, cols: usize, bound: f64, rng: &mut R) -> Self {
        let data = (0..rows * cols)
            .map(|_| T::lit(rng.gen_range(-bound..=bound)))
            .collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add_at(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] += v;
    }

    /// Appends zero rows until the matrix has `rows` rows.
    pub fn grow_rows(&mut self, rows: usize) {
        if rows > self.rows {
            self.data.resize(rows * self.cols, T::zero());
            self.rows = rows;
        }
    }

    pub fn fill_zero(&mut self) {
        self.data.iter_mut().for_each(|v| *v = T::zero());
    }

    /// `out += self · x`
    pub fn matvec_add(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            *o += dot(self.row(r), x);
        }
    }

    /// `out += selfᵀ · v`
    pub fn matvec_t_add(&self, v: &[T], out: &mut [T]) {
        debug_assert_eq!(v.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (r, &vr) in v.iter().enumerate() {
            if vr != T::zero() {
                axpy(vr, self.row(r), out);
            }
        }
    }

    /// `self += a ⊗ b`
    pub fn outer_add(&mut self, a: &[T], b: &[T]) {
        debug_assert_eq!(a.len(), self.rows);
        debug_assert_eq!(b.len(), self.cols);
        for (r, &ar) in a.iter().enumerate() {
            if ar != T::zero() {
                axpy(ar, b, self.row_mut(r));
            }
        }
    }

    pub fn sq_norm(&self) -> T {
        dot(&self.data, &self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| U::lit(v.to_f64_lossy())).collect(),
        }
    }
}

/// A model whose trainable state is a fixed list of named matrices.
///
/// Gradients use the same type as the parameters, so a gradient buffer is
/// just `params.zeros_like()`.
pub trait ParamSet<T: Scalar>: Clone {
    fn blocks(&self) -> Vec<(&'static str, &Matrix<T>)>;
    fn blocks_mut(&mut self) -> Vec<&mut Matrix<T>>;

    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.fill_zero();
        z
    }

    fn fill_zero(&mut self) {
        for b in self.blocks_mut() {
            b.fill_zero();
        }
    }

    fn scale(&mut self, s: T) {
        for b in self.blocks_mut() {
            b.as_mut_slice().iter_mut().for_each(|v| *v *= s);
        }
    }

    fn sq_norm(&self) -> T {
        self.blocks().iter().map(|(_, b)| b.sq_norm()).sum()
    }

    fn all_finite(&self) -> bool {
        self.blocks().iter().all(|(_, b)| b.is_finite())
    }

    fn param_count(&self) -> usize {
        self.blocks().iter().map(|(_, b)| b.as_slice().len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_transpose_agree_with_loops() {
        let m = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let mut out = vec![0.0; 2];
        m.matvec_add(&[1.0, 0.0, -1.0], &mut out);
        assert_eq!(out, vec![-2.0, -2.0]);
        let mut back = vec![0.0; 3];
        m.matvec_t_add(&[1.0, 1.0], &mut back);
        assert_eq!(back, vec![5.0, 7.0, 9.0]);
    }

    #[test]
    fn outer_add_accumulates() {
        let mut m = Matrix::<f64>::zeros(2, 2);
        m.outer_add(&[1.0, 2.0], &[3.0, 4.0]);
        m.outer_add(&[1.0, 0.0], &[1.0, 1.0]);
        assert_eq!(m.as_slice(), &[4.0, 5.0, 6.0, 8.0]);
    }

    #[test]
    fn grow_rows_keeps_existing_values() {
        let mut m = Matrix::from_vec(1, 2, vec![1.0f32, 2.0]);
        m.grow_rows(3);
        assert_eq!(m.rows(), 3);
        assert_eq!(m.row(0), &[1.0, 2.0]);
        assert_eq!(m.row(2), &[0.0, 0.0]);
    }
}

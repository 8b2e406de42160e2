use serde::{Deserialize, Serialize};

use super::Rng;
use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor2 {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor2 {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(n, n);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} tensor",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("tensor entry {i}")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_vec(r, c, rows.concat())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.cols.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self * x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Shape(format!(
                "matvec: {}x{} times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows).map(|r| super::dot(self.row(r), x)).collect())
    }

    /// `self^T * y`.
    pub fn matvec_t(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::Shape(format!(
                "matvec_t: ({}x{})^T times vector of length {}",
                self.rows,
                self.cols,
                y.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (r, yr) in y.iter().enumerate() {
            if *yr == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(self.row(r)) {
                *o += yr * w;
            }
        }
        Ok(out)
    }

    /// `self += alpha * u v^T`.
    pub fn add_outer(&mut self, alpha: f64, u: &[f64], v: &[f64]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for (r, ur) in u.iter().enumerate() {
            let a = alpha * ur;
            if a == 0.0 {
                continue;
            }
            for (d, vc) in self.row_mut(r).iter_mut().zip(v) {
                *d += a * vc;
            }
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Tensor2) -> Result<()> {
        self.check_same_shape(other)?;
        for (d, o) in self.data.iter_mut().zip(&other.data) {
            *d += alpha * o;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|d| *d *= alpha);
    }

    pub fn scaled(&self, alpha: f64) -> Tensor2 {
        let mut t = self.clone();
        t.scale(alpha);
        t
    }

    /// Frobenius inner product.
    pub fn frobenius_dot(&self, other: &Tensor2) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(super::dot(&self.data, &other.data))
    }

    pub fn frobenius_norm(&self) -> f64 {
        super::norm(&self.data)
    }

    pub fn max_abs_diff(&self, other: &Tensor2) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn check_same_shape(&self, other: &Tensor2) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }
}

/// Entries i.i.d. uniform in `[-scale, scale]`, drawn in row-major order.
pub fn init_uniform(rows: usize, cols: usize, scale: f64, rng: &mut Rng) -> Result<Tensor2> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument(format!(
            "zero-sized shape {rows}x{cols}"
        )));
    }
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "init scale must be positive, got {scale}"
        )));
    }
    let data = (0..rows * cols)
        .map(|_| rng.uniform(-scale, scale))
        .collect();
    Tensor2::from_vec(rows, cols, data)
}

// Tensors serialize as nested row arrays in model files.
impl Serialize for Tensor2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tensor2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Tensor2::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_scale_and_zero_shape() {
        let mut rng = Rng::new(0);
        assert!(init_uniform(2, 2, 0.0, &mut rng).is_err());
        assert!(init_uniform(2, 2, -1.0, &mut rng).is_err());
        assert!(init_uniform(0, 2, 0.1, &mut rng).is_err());
        assert!(init_uniform(2, 0, 0.1, &mut rng).is_err());
    }

    #[test]
    fn tiny_scale_approaches_zero() {
        let mut rng = Rng::new(0);
        let t = init_uniform(4, 4, 1e-300, &mut rng).unwrap();
        assert!(t.data().iter().all(|v| v.abs() <= 1e-300));
    }

    #[test]
    fn deterministic_for_seed() {
        let a = init_uniform(3, 5, 0.1, &mut Rng::new(9)).unwrap();
        let b = init_uniform(3, 5, 0.1, &mut Rng::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_mean_near_zero() {
        let t = init_uniform(100, 100, 0.1, &mut Rng::new(11)).unwrap();
        let mean = t.data().iter().sum::<f64>() / 10_000.0;
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!(t.data().iter().all(|v| v.abs() <= 0.1));
    }

    #[test]
    fn matvec_and_transpose() {
        let t = Tensor2::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(t.matvec(&[1.0, 1.0]).unwrap(), vec![3.0, 7.0, 11.0]);
        assert_eq!(t.matvec_t(&[1.0, 0.0, 1.0]).unwrap(), vec![6.0, 8.0]);
        assert!(t.matvec(&[1.0]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Tensor2::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Tensor2::from_vec(1, 2, vec![1.0]).is_err());
    }
}

use std::fmt;

use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix over any [`Scalar`].
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    /// Builds from row vectors; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != c) {
            return Err(Error::domain("ragged matrix rows"));
        }
        Ok(Matrix {
            rows: n,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row_vecs(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.cols.max(1)).map(<[T]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn column_sums(&self) -> Vec<T> {
        (0..self.cols)
            .map(|j| (0..self.rows).fold(T::zero(), |acc, i| acc + self.get(i, j).clone()))
            .collect()
    }

    pub fn mul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != other.rows {
            return Err(Error::domain(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| {
                acc + self.get(i, k).clone() * other.get(k, j).clone()
            })
        }))
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::domain("vector length does not match matrix"));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).fold(T::zero(), |acc, k| acc + self.get(i, k).clone() * v[k].clone()))
            .collect())
    }

    /// Columns scaled to unit coordinate sum.
    pub fn normalized_columns(&self) -> Result<Vec<Vec<T>>> {
        (0..self.cols)
            .map(|j| {
                let col = self.column(j);
                normalize(&col).ok_or_else(|| Error::Degenerate(format!("column {} is zero", j + 1)))
            })
            .collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|x| *x >= T::zero())
    }

    pub fn is_positive(&self) -> bool {
        self.data.iter().all(|x| *x > T::zero())
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(Scalar::to_f64_lossy)
    }
}

/// `v / sum(v)`, or `None` for a zero vector.
pub fn normalize<T: Scalar>(v: &[T]) -> Option<Vec<T>> {
    let s = v.iter().fold(T::zero(), |acc, x| acc + x.clone());
    if s.is_zero() {
        return None;
    }
    Some(v.iter().map(|x| x.clone() / s.clone()).collect())
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut l = f.debug_list();
        for r in self.data.chunks(self.cols.max(1)) {
            l.entry(&r);
        }
        l.finish()
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.data.chunks(self.cols.max(1)).enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = r.iter().map(ToString::to_string).collect();
            write!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl<T: Serialize> Serialize for Matrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for r in self.data.chunks(self.cols.max(1)).take(self.rows) {
            seq.serialize_element(r)?;
        }
        seq.end()
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for Matrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<T>>::deserialize(deserializer)?;
        Matrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Exact;

    fn ex(rows: &[&[i64]]) -> Matrix<Exact> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Exact::from_integer(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn product_and_identity() {
        let a = ex(&[&[1, 0], &[2, 3]]);
        let b = ex(&[&[9, 2], &[0, 7]]);
        assert_eq!(a.mul(&b).unwrap(), ex(&[&[9, 2], &[18, 25]]));
        assert_eq!(a.mul(&Matrix::identity(2)).unwrap(), a);
        assert!(a.mul(&ex(&[&[1, 2, 3]])).is_err());
    }

    #[test]
    fn normalization() {
        let a = ex(&[&[9, 2], &[18, 25]]);
        let cols = a.normalized_columns().unwrap();
        assert_eq!(cols[0], vec![Exact::ratio(1, 3), Exact::ratio(2, 3)]);
        assert_eq!(cols[1], vec![Exact::ratio(2, 27), Exact::ratio(25, 27)]);
        assert!(matches!(
            ex(&[&[0, 1], &[0, 1]]).normalized_columns(),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn float_matrices() {
        let a: Matrix<f64> = Matrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let p = a.mul(&a).unwrap();
        assert_eq!(p.row_vecs(), vec![vec![5.0, 4.0], vec![4.0, 5.0]]);
        let f: Matrix<f32> = Matrix::identity(3);
        assert_eq!(f.column_sums(), vec![1.0f32; 3]);
    }

    #[test]
    fn json_round_trip() {
        let a = ex(&[&[1, 0], &[2, 3]]).map(|x| x.clone() / Exact::from_integer(4));
        let s = serde_json::to_string(&a).unwrap();
        assert!(s.starts_with(r#"[[{"num":"1","den":"4"}"#));
        let back: Matrix<Exact> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
    }
}

use nalgebra::DMatrix;
use num_traits::{One, Zero};

use super::univariate::UnivariatePoly;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Dense square matrix over the rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    n: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(n: usize) -> Self {
        RatMatrix {
            n,
            data: vec![Rational::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix is not square".into()));
        }
        Ok(RatMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| rational::int(x)).collect())
                .collect(),
        )
    }

    /// `v v^T`
    pub fn outer(v: &[Rational]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = &v[i] * &v[j];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.n + j] = v;
    }

    pub fn add_assign(&mut self, other: &RatMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        RatMatrix {
            n: self.n,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn mul(&self, other: &RatMatrix) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Rational {
        (0..self.n).map(|i| self.get(i, i).clone()).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Determinant by Gaussian elimination.
    pub fn det(&self) -> Rational {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
                return Rational::zero();
            };
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col].clone();
            det *= &p;
            for r in col + 1..n {
                let f = &a[r * n + col] / &p;
                if f.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = &f * &a[col * n + j];
                    a[r * n + j] -= v;
                }
            }
        }
        det
    }

    /// Exact inverse by Gauss–Jordan elimination, `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[r * n + col].is_zero())?;
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                    inv.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[col * n + col].recip();
            for j in 0..n {
                a[col * n + j] *= &p;
                inv[col * n + j] *= &p;
            }
            for r in 0..n {
                let f = a[r * n + col].clone();
                if r == col || f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let (u, v) = (&f * &a[col * n + j], &f * &inv[col * n + j]);
                    a[r * n + j] -= u;
                    inv[r * n + j] -= v;
                }
            }
        }
        Some(RatMatrix { n, data: inv })
    }

    /// Principal submatrix on the given (sorted) indices.
    pub fn principal(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut m = Self::zeros(k);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m.data[a * k + b] = self.get(i, j).clone();
            }
        }
        m
    }

    /// Sum of all principal `k x k` minors.
    pub fn sigma(&self, k: usize) -> Rational {
        if k == 0 {
            return Rational::one();
        }
        if k > self.n {
            return Rational::zero();
        }
        let mut total = Rational::zero();
        for_each_k_subset(self.n, k, |idx| total += self.principal(idx).det());
        total
    }

    /// `det(xI - M)` by the Faddeev–LeVerrier recurrence.
    pub fn char_poly(&self) -> UnivariatePoly {
        let n = self.n;
        let mut coeffs = vec![Rational::zero(); n + 1];
        coeffs[n] = Rational::one();
        let mut m = Self::zeros(n);
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{n-k+1} I
            let mut next = self.mul(&m);
            let c = coeffs[n - k + 1].clone();
            for i in 0..n {
                next.data[i * n + i] += &c;
            }
            m = next;
            let am = self.mul(&m);
            coeffs[n - k] = -am.trace() / rational::int(k as i64);
        }
        UnivariatePoly::new(coeffs)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| rational::to_f64(self.get(i, j)))
    }
}

/// `det(x^2 I - M)` for a symmetric rational matrix, a polynomial in `x` of
/// degree `2 * dim`.
pub fn char_poly_x2(m: &RatMatrix) -> Result<UnivariatePoly> {
    if !m.is_symmetric() {
        return Err(Error::Precondition("matrix must be symmetric".into()));
    }
    Ok(m.char_poly().compose_square())
}

/// `char_poly_x2` from a row-major list; rejects non-square input.
pub fn char_poly_x2_rows(rows: Vec<Vec<Rational>>) -> Result<UnivariatePoly> {
    char_poly_x2(&RatMatrix::from_rows(rows)?)
}

/// Calls `f` with every sorted `k`-subset of `0..n`.
pub fn for_each_k_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        if idx[i] == i + n - k {
            return;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Gram matrix `G[a][b] = <v_a, v_b>` of the given vectors.
pub fn gram(vectors: &[&[Rational]]) -> RatMatrix {
    let k = vectors.len();
    let mut g = RatMatrix::zeros(k);
    for a in 0..k {
        for b in 0..=a {
            let dot: Rational = vectors[a].iter().zip(vectors[b]).map(|(x, y)| x * y).sum();
            g.set(a, b, dot.clone());
            g.set(b, a, dot);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let a = RatMatrix::from_ints(&[&[0, 2, 1], &[1, 1, 0], &[3, 0, 1]]).unwrap();
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), RatMatrix::identity(3));
        assert!(RatMatrix::from_ints(&[&[1, 2], &[2, 4]])
            .unwrap()
            .inverse()
            .is_none());
    }

    #[test]
    fn k_subsets_are_enumerated_once() {
        let mut seen = Vec::new();
        for_each_k_subset(5, 3, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 10);
        assert_eq!(seen[0], vec![0, 1, 2]);
        assert_eq!(seen[9], vec![2, 3, 4]);
        let mut empty = 0;
        for_each_k_subset(3, 0, |s| {
            assert!(s.is_empty());
            empty += 1
        });
        assert_eq!(empty, 1);
        let mut none = 0;
        for_each_k_subset(2, 3, |_| none += 1);
        assert_eq!(none, 0);
    }

    #[test]
    fn determinant_and_char_poly() {
        let m = RatMatrix::from_ints(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]).unwrap();
        assert_eq!(m.det(), rational::int(18));
        let chi = m.char_poly();
        // det(xI - M) = x^3 - 9x^2 + 24x - 18
        assert_eq!(chi, UnivariatePoly::from_ints(&[-18, 24, -9, 1]));
        for k in 0..=3 {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            assert_eq!(chi.coeff(3 - k), m.sigma(k) * rational::int(sign));
        }
    }

    #[test]
    fn char_poly_x2_examples() {
        let two = RatMatrix::from_ints(&[&[2]]).unwrap();
        assert_eq!(
            char_poly_x2(&two).unwrap(),
            UnivariatePoly::from_ints(&[-2, 0, 1])
        );
        let id = RatMatrix::identity(2);
        assert_eq!(
            char_poly_x2(&id).unwrap(),
            UnivariatePoly::from_ints(&[1, 0, -2, 0, 1])
        );
        let ones = RatMatrix::from_ints(&[&[1, 1], &[1, 1]]).unwrap();
        assert_eq!(
            char_poly_x2(&ones).unwrap(),
            UnivariatePoly::from_ints(&[0, 0, -2, 0, 1])
        );
        let asym = RatMatrix::from_ints(&[&[1, 2], &[0, 1]]).unwrap();
        assert!(char_poly_x2(&asym).is_err());
        assert!(char_poly_x2_rows(vec![vec![rational::int(1), rational::int(2)]]).is_err());
    }
}

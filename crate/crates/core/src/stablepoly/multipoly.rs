use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::matrix::RatMatrix;
use super::multiaffine::MultiAffinePoly;
use super::univariate::UnivariatePoly;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Sparse polynomial in `n` variables with rational coefficients and no
/// degree restriction. Keys are exponent vectors of length `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    n: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl MultiPoly {
    pub fn zero(n: usize) -> Self {
        MultiPoly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        let mut p = Self::zero(n);
        p.add_term(vec![0; n], c);
        p
    }

    /// The coordinate `z_i`.
    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        let mut p = Self::zero(n);
        p.add_term(e, Rational::one());
        p
    }

    /// `c + Σ a_i z_i`
    pub fn linear(constant: Rational, coeffs: &[Rational]) -> Self {
        let n = coeffs.len();
        let mut p = Self::constant(n, constant);
        for (i, a) in coeffs.iter().enumerate() {
            p = &p + &Self::var(n, i).scale(a);
        }
        p
    }

    pub fn from_multi_affine(p: &MultiAffinePoly) -> Self {
        let n = p.num_vars();
        let mut out = Self::zero(n);
        for (&mask, c) in p.terms() {
            out.add_term((0..n).map(|i| (mask >> i & 1) as u32).collect(), c.clone());
        }
        out
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Rational) {
        debug_assert_eq!(exps.len(), self.n);
        let entry = self
            .terms
            .entry(exps.clone())
            .or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.n);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut f = e.clone();
            f[i] -= 1;
            out.add_term(f, c * rational::int(e[i] as i64));
        }
        out
    }

    /// `p − ∂²p/∂z_i²`
    pub fn one_minus_d2(&self, i: usize) -> Self {
        self - &self.partial(i).partial(i)
    }

    pub fn eval(&self, z: &[Rational]) -> Result<Rational> {
        if z.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "point has {} coordinates, polynomial has {} variables",
                z.len(),
                self.n
            )));
        }
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (zi, &k) in z.iter().zip(e) {
                for _ in 0..k {
                    t *= zi;
                }
            }
            total += t;
        }
        Ok(total)
    }

    /// Univariate restriction `s -> p(z + s e_i)`.
    pub fn restrict_line(&self, z: &[Rational], i: usize) -> Result<UnivariatePoly> {
        if z.len() != self.n || i >= self.n {
            return Err(Error::InvalidInput(
                "restriction point or direction out of range".into(),
            ));
        }
        let deg = self.degree_in(i) as usize;
        let mut coeffs = Vec::with_capacity(deg + 1);
        let mut deriv = self.clone();
        let mut fact = Rational::one();
        for k in 0..=deg {
            if k > 0 {
                deriv = deriv.partial(i);
                fact *= rational::int(k as i64);
            }
            coeffs.push(deriv.eval(z)? / &fact);
        }
        Ok(UnivariatePoly::new(coeffs))
    }

    /// `x -> p(x, x, …, x)`
    pub fn diagonal(&self) -> UnivariatePoly {
        let deg = self
            .terms
            .keys()
            .map(|e| e.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0);
        let mut coeffs = vec![Rational::zero(); deg + 1];
        for (e, c) in &self.terms {
            coeffs[e.iter().sum::<u32>() as usize] += c;
        }
        UnivariatePoly::new(coeffs)
    }

    /// `det(C + Σ z_i A_i)` for square rational matrices of equal size.
    pub fn determinantal(pencil: &[RatMatrix], constant: &RatMatrix) -> Result<Self> {
        let n = pencil.len();
        let k = constant.dim();
        if pencil.iter().any(|a| a.dim() != k) {
            return Err(Error::InvalidInput("pencil matrices differ in size".into()));
        }
        let entries: Vec<Vec<MultiPoly>> = (0..k)
            .map(|r| {
                (0..k)
                    .map(|c| {
                        let coeffs: Vec<Rational> =
                            pencil.iter().map(|a| a.get(r, c).clone()).collect();
                        MultiPoly::linear(constant.get(r, c).clone(), &coeffs)
                    })
                    .collect()
            })
            .collect();
        let rows: Vec<usize> = (0..k).collect();
        Ok(det_cofactor(n, &entries, &rows, &mut vec![false; k]))
    }
}

fn det_cofactor(n: usize, m: &[Vec<MultiPoly>], rows: &[usize], used: &mut [bool]) -> MultiPoly {
    let Some((&r, rest)) = rows.split_first() else {
        return MultiPoly::constant(n, Rational::one());
    };
    let mut total = MultiPoly::zero(n);
    let mut sign = true;
    for c in 0..used.len() {
        if used[c] {
            continue;
        }
        if !m[r][c].is_zero() {
            used[c] = true;
            let minor = det_cofactor(n, m, rest, used);
            used[c] = false;
            let term = &m[r][c] * &minor;
            total = if sign { &total + &term } else { &total - &term };
        }
        sign = !sign;
    }
    total
}

impl std::ops::Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl std::ops::Mul for &MultiPoly {
    type Output = MultiPoly;
    // exponents add when monomials multiply
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.iter().zip(b).map(|(x, y)| x + y).collect(), ca * cb);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn square_of_sum() {
        let s = &MultiPoly::var(2, 0) + &MultiPoly::var(2, 1);
        let sq = &s * &s;
        assert_eq!(sq.eval(&[int(1), int(2)]).unwrap(), int(9));
        let d = sq.partial(0);
        assert_eq!(d.eval(&[int(1), int(1)]).unwrap(), int(4));
        let line = sq.restrict_line(&[int(1), int(1)], 0).unwrap();
        assert_eq!(line, UnivariatePoly::from_ints(&[4, 4, 1]));
    }

    #[test]
    fn determinantal_diagonal() {
        let a = RatMatrix::from_ints(&[&[1, 0], &[0, 0]]).unwrap();
        let b = RatMatrix::from_ints(&[&[0, 0], &[0, 1]]).unwrap();
        let p = MultiPoly::determinantal(&[a, b], &RatMatrix::zeros(2)).unwrap();
        assert_eq!(p, &MultiPoly::var(2, 0) * &MultiPoly::var(2, 1));
        let c = RatMatrix::from_ints(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]).unwrap();
        let q = MultiPoly::determinantal(&[], &c).unwrap();
        assert_eq!(q, MultiPoly::constant(0, int(18)));
    }
}

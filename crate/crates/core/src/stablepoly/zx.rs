use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::matrix::{for_each_k_subset, gram};
use super::multiaffine::MultiAffinePoly;
use super::multipoly::MultiPoly;
use super::univariate::UnivariatePoly;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Polynomial in `z_1..z_m` whose coefficients are polynomials in `x`.
///
/// Each variable's exponent is at most 2 and is packed into two bits of a
/// `u128` key, so `m ≤ 64`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZXPoly {
    m: usize,
    terms: BTreeMap<u128, UnivariatePoly>,
}

pub fn exponent(key: u128, i: usize) -> u8 {
    (key >> (2 * i) & 0b11) as u8
}

fn key_of_mask(mask: u64) -> u128 {
    (0..64)
        .filter(|i| mask >> i & 1 == 1)
        .fold(0u128, |k, i| k | 1u128 << (2 * i))
}

impl ZXPoly {
    pub fn zero(m: usize) -> Result<Self> {
        if m > 64 {
            return Err(Error::InvalidInput(format!(
                "{m} variables exceed the 64-variable limit"
            )));
        }
        Ok(ZXPoly {
            m,
            terms: BTreeMap::new(),
        })
    }

    pub fn constant(m: usize, c: UnivariatePoly) -> Result<Self> {
        let mut p = Self::zero(m)?;
        p.add_term(0, c);
        Ok(p)
    }

    fn add_term(&mut self, key: u128, c: UnivariatePoly) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_default();
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs.
    pub fn from_terms(m: usize, terms: Vec<(Vec<u8>, UnivariatePoly)>) -> Result<Self> {
        let mut p = Self::zero(m)?;
        for (exps, c) in terms {
            if exps.len() != m {
                return Err(Error::InvalidInput(
                    "exponent vector has wrong length".into(),
                ));
            }
            let mut key = 0u128;
            for (i, &e) in exps.iter().enumerate() {
                if e > 2 {
                    return Err(Error::UnsupportedDegree {
                        var: i,
                        degree: e as usize,
                    });
                }
                key |= (e as u128) << (2 * i);
            }
            p.add_term(key, c);
        }
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &BTreeMap<u128, UnivariatePoly> {
        &self.terms
    }

    pub fn exps(&self, key: u128) -> Vec<u8> {
        (0..self.m).map(|i| exponent(key, i)).collect()
    }

    pub fn is_multi_affine(&self) -> bool {
        self.terms
            .keys()
            .all(|&k| (0..self.m).all(|i| exponent(k, i) <= 1))
    }

    /// `g(z + x𝟙)` expanded in `z` with coefficients in `x`.
    pub fn shift_diagonal(p: &MultiAffinePoly) -> Self {
        let mut out = ZXPoly {
            m: p.num_vars(),
            terms: BTreeMap::new(),
        };
        for (&mask, c) in p.terms() {
            let full = mask.count_ones() as usize;
            // all submasks t of mask: z^t x^{|mask \ t|}
            let mut t = mask;
            loop {
                let xdeg = full - t.count_ones() as usize;
                out.add_term(key_of_mask(t), UnivariatePoly::monomial(c.clone(), xdeg));
                if t == 0 {
                    break;
                }
                t = (t - 1) & mask;
            }
        }
        out
    }

    /// `det(xI + Σ z_i v_i v_iᵀ)` by Cauchy–Binet: the coefficient of `z^S`
    /// is `x^{d−|S|}` times the Gram determinant of `{v_i : i ∈ S}`.
    pub fn cauchy_binet_expand(d: usize, vectors: &[Vec<Rational>]) -> Result<Self> {
        let m = vectors.len();
        if vectors.iter().any(|v| v.len() != d) {
            return Err(Error::InvalidInput(format!(
                "all vectors must have dimension {d}"
            )));
        }
        let mut out = Self::zero(m)?;
        for k in 0..=d.min(m) {
            for_each_k_subset(m, k, |idx| {
                let vs: Vec<&[Rational]> = idx.iter().map(|&i| vectors[i].as_slice()).collect();
                let det = gram(&vs).det();
                if !det.is_zero() {
                    let key = idx.iter().fold(0u128, |k, &i| k | 1u128 << (2 * i));
                    out.add_term(key, UnivariatePoly::monomial(det, d - k));
                }
            });
        }
        Ok(out)
    }

    /// Product of two polynomials that are multi-affine in `z`.
    pub fn mul(&self, other: &ZXPoly) -> Result<Self> {
        if self.m != other.m {
            return Err(Error::InvalidInput("variable counts differ".into()));
        }
        for p in [self, other] {
            if let Some((&k, _)) = p
                .terms
                .iter()
                .find(|(&k, _)| (0..p.m).any(|i| exponent(k, i) > 1))
            {
                let var = (0..p.m).find(|&i| exponent(k, i) > 1).unwrap_or(0);
                return Err(Error::UnsupportedDegree {
                    var,
                    degree: exponent(k, var) as usize + 1,
                });
            }
        }
        let mut out = ZXPoly {
            m: self.m,
            terms: BTreeMap::new(),
        };
        for (&a, ca) in &self.terms {
            for (&b, cb) in &other.terms {
                // exponents are 0/1, so packed addition never carries
                out.add_term(a + b, ca * cb);
            }
        }
        Ok(out)
    }

    /// `p − ∂²p/∂z_i²`
    pub fn apply_one_minus_dzz(&self, i: usize) -> Result<Self> {
        if i >= self.m {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.m,
            });
        }
        let mut out = self.clone();
        for (&k, c) in &self.terms {
            if exponent(k, i) == 2 {
                let lowered = k & !(0b11u128 << (2 * i));
                out.add_term(lowered, c.scale(&rational::int(-2)));
            }
        }
        Ok(out)
    }

    /// `p` with `z_i = 0`.
    pub fn set_zero(&self, i: usize) -> Self {
        ZXPoly {
            m: self.m,
            terms: self
                .terms
                .iter()
                .filter(|(&k, _)| exponent(k, i) == 0)
                .map(|(&k, c)| (k, c.clone()))
                .collect(),
        }
    }

    /// Coefficient at `z = 0`.
    pub fn restrict_zero(&self) -> UnivariatePoly {
        self.terms.get(&0).cloned().unwrap_or_default()
    }

    pub fn eval(&self, x: &Rational, z: &[Rational]) -> Result<Rational> {
        if z.len() != self.m {
            return Err(Error::InvalidInput("point has wrong dimension".into()));
        }
        let mut total = Rational::zero();
        for (&k, c) in &self.terms {
            let mut t = c.eval(x);
            for (i, zi) in z.iter().enumerate() {
                for _ in 0..exponent(k, i) {
                    t *= zi;
                }
            }
            total += t;
        }
        Ok(total)
    }

    /// The polynomial in `z` obtained by fixing `x`.
    pub fn eval_x(&self, x: &Rational) -> MultiPoly {
        let mut out = MultiPoly::zero(self.m);
        for (&k, c) in &self.terms {
            out.add_term(
                (0..self.m).map(|i| exponent(k, i) as u32).collect(),
                c.eval(x),
            );
        }
        out
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            terms: self
                .terms
                .iter()
                .map(|(&k, c)| TermJson {
                    exps: self.exps(k),
                    coeffs: c.coeffs().iter().map(rational::format).collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(m: usize, json: &PolyJson) -> Result<Self> {
        let terms = json
            .terms
            .iter()
            .map(|t| {
                let coeffs = t
                    .coeffs
                    .iter()
                    .map(|s| rational::parse(s))
                    .collect::<Result<Vec<_>>>()?;
                Ok((t.exps.clone(), UnivariatePoly::new(coeffs)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(m, terms)
    }
}

/// Serialized form: each term lists its `z` exponents and the ascending
/// coefficients of its `x`-polynomial as `"num/den"` strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exps: Vec<u8>,
    pub coeffs: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn x() -> UnivariatePoly {
        UnivariatePoly::from_ints(&[0, 1])
    }

    fn c(n: i64) -> UnivariatePoly {
        UnivariatePoly::from_ints(&[n])
    }

    #[test]
    fn shift_diagonal_examples() {
        let p = MultiAffinePoly::from_terms(2, [(0b11, int(1))]).unwrap();
        let expected = ZXPoly::from_terms(
            2,
            vec![
                (vec![1, 1], c(1)),
                (vec![1, 0], x()),
                (vec![0, 1], x()),
                (vec![0, 0], UnivariatePoly::from_ints(&[0, 0, 1])),
            ],
        )
        .unwrap();
        assert_eq!(ZXPoly::shift_diagonal(&p), expected);

        let one = MultiAffinePoly::from_terms(3, [(0, int(1))]).unwrap();
        assert_eq!(
            ZXPoly::shift_diagonal(&one),
            ZXPoly::constant(3, c(1)).unwrap()
        );
    }

    #[test]
    fn cauchy_binet_examples() {
        let e = vec![vec![int(1), int(0)], vec![int(0), int(1)]];
        let p = ZXPoly::cauchy_binet_expand(2, &e).unwrap();
        let lin0 = ZXPoly::from_terms(2, vec![(vec![0, 0], x()), (vec![1, 0], c(1))]).unwrap();
        let lin1 = ZXPoly::from_terms(2, vec![(vec![0, 0], x()), (vec![0, 1], c(1))]).unwrap();
        assert_eq!(p, lin0.mul(&lin1).unwrap());

        let single = ZXPoly::cauchy_binet_expand(1, &[vec![rat(3, 2)]]).unwrap();
        let expected = ZXPoly::from_terms(
            1,
            vec![
                (vec![0], x()),
                (vec![1], UnivariatePoly::constant(rat(9, 4))),
            ],
        )
        .unwrap();
        assert_eq!(single, expected);

        let twice = ZXPoly::cauchy_binet_expand(1, &[vec![int(1)], vec![int(1)]]).unwrap();
        let expected = ZXPoly::from_terms(
            2,
            vec![(vec![0, 0], x()), (vec![1, 0], c(1)), (vec![0, 1], c(1))],
        )
        .unwrap();
        assert_eq!(twice, expected);
    }

    #[test]
    fn operator_and_restriction() {
        let z1 = ZXPoly::from_terms(1, vec![(vec![1], c(1))]).unwrap();
        let sq = z1.mul(&z1).unwrap();
        assert_eq!(sq.exps(*sq.terms().keys().next().unwrap()), vec![2]);
        let op = sq.apply_one_minus_dzz(0).unwrap();
        assert_eq!(op.restrict_zero(), c(-2));
        assert_eq!(z1.apply_one_minus_dzz(0).unwrap(), z1);
        assert!(matches!(
            sq.mul(&z1),
            Err(Error::UnsupportedDegree { var: 0, .. })
        ));

        let p = ZXPoly::from_terms(
            2,
            vec![
                (vec![2, 0], UnivariatePoly::from_ints(&[0, 0, 1])),
                (vec![0, 1], c(1)),
            ],
        )
        .unwrap();
        let q = p.apply_one_minus_dzz(0).unwrap();
        assert_eq!(q.restrict_zero(), UnivariatePoly::from_ints(&[0, 0, -2]));
        assert_eq!(q.terms().len(), 3);
    }

    #[test]
    fn json_round_trip() {
        let p = ZXPoly::shift_diagonal(
            &MultiAffinePoly::from_terms(2, [(0b01, rat(1, 2)), (0b10, rat(1, 2))]).unwrap(),
        );
        let json = p.to_json();
        assert_eq!(ZXPoly::from_json(2, &json).unwrap(), p);
        assert!(serde_json::to_string(&json).unwrap().contains("\"1/2\""));
    }
}

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Polynomial of degree at most one in each of `m` variables. Monomials are
/// keyed by the bitmask of the variables they contain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiAffinePoly {
    m: usize,
    terms: BTreeMap<u64, Rational>,
}

fn check_vars(m: usize) -> Result<()> {
    if m > 64 {
        return Err(Error::InvalidInput(format!(
            "{m} variables exceed the 64-variable limit"
        )));
    }
    Ok(())
}

impl MultiAffinePoly {
    pub fn zero(m: usize) -> Result<Self> {
        check_vars(m)?;
        Ok(MultiAffinePoly {
            m,
            terms: BTreeMap::new(),
        })
    }

    pub fn from_terms(m: usize, terms: impl IntoIterator<Item = (u64, Rational)>) -> Result<Self> {
        let mut p = Self::zero(m)?;
        for (mask, c) in terms {
            p.add_term(mask, c)?;
        }
        Ok(p)
    }

    pub fn add_term(&mut self, mask: u64, c: Rational) -> Result<()> {
        if self.m < 64 && mask >> self.m != 0 {
            let index = 63 - mask.leading_zeros() as usize;
            return Err(Error::IndexOutOfRange { index, len: self.m });
        }
        let entry = self.terms.entry(mask).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&mask);
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &BTreeMap<u64, Rational> {
        &self.terms
    }

    pub fn coeff(&self, mask: u64) -> Rational {
        self.terms
            .get(&mask)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.m {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.m,
            });
        }
        Ok(())
    }

    pub fn eval(&self, z: &[Rational]) -> Result<Rational> {
        if z.len() != self.m {
            return Err(Error::InvalidInput(format!(
                "point has {} coordinates, polynomial has {} variables",
                z.len(),
                self.m
            )));
        }
        let mut total = Rational::zero();
        for (&mask, c) in &self.terms {
            let mut t = c.clone();
            for (i, zi) in z.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    t *= zi;
                }
            }
            total += t;
        }
        Ok(total)
    }

    /// `∂p/∂z_i`
    pub fn partial(&self, i: usize) -> Result<Self> {
        self.check_index(i)?;
        let bit = 1u64 << i;
        Ok(MultiAffinePoly {
            m: self.m,
            terms: self
                .terms
                .iter()
                .filter(|(&mask, _)| mask & bit != 0)
                .map(|(&mask, c)| (mask & !bit, c.clone()))
                .collect(),
        })
    }

    /// `p` with `z_i` set to zero.
    pub fn restrict_zero(&self, i: usize) -> Result<Self> {
        self.check_index(i)?;
        let bit = 1u64 << i;
        Ok(MultiAffinePoly {
            m: self.m,
            terms: self
                .terms
                .iter()
                .filter(|(&mask, _)| mask & bit == 0)
                .map(|(&mask, c)| (mask, c.clone()))
                .collect(),
        })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return MultiAffinePoly {
                m: self.m,
                terms: BTreeMap::new(),
            };
        }
        MultiAffinePoly {
            m: self.m,
            terms: self.terms.iter().map(|(&k, v)| (k, v * c)).collect(),
        }
    }

    /// Value at the all-ones point.
    pub fn eval_ones(&self) -> Rational {
        self.terms.values().cloned().sum()
    }

    /// Conditioning on `i` being present: `z_i ∂_i p / ∂_i p(𝟙)`.
    pub fn condition_in(&self, i: usize) -> Result<Self> {
        let d = self.partial(i)?;
        let norm = d.eval_ones();
        if norm.is_zero() {
            return Err(Error::EmptyCondition { element: i, bit: 1 });
        }
        let bit = 1u64 << i;
        Ok(MultiAffinePoly {
            m: self.m,
            terms: d.terms.iter().map(|(&k, c)| (k | bit, c / &norm)).collect(),
        })
    }

    /// Conditioning on `i` being absent: `p|_{z_i=0} / p|_{z_i=0}(𝟙)`.
    pub fn condition_out(&self, i: usize) -> Result<Self> {
        let r = self.restrict_zero(i)?;
        let norm = r.eval_ones();
        if norm.is_zero() {
            return Err(Error::EmptyCondition { element: i, bit: 0 });
        }
        Ok(r.scale(&norm.recip()))
    }

    /// Common total degree of all monomials, if there is one.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut degs = self.terms.keys().map(|k| k.count_ones() as usize);
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// `∂_i p ∂_j p − p ∂_i∂_j p` at `z`.
    pub fn rayleigh_difference(&self, z: &[Rational], i: usize, j: usize) -> Result<Rational> {
        let pi = self.partial(i)?;
        let pj = self.partial(j)?;
        let pij = pi.partial(j)?;
        Ok(pi.eval(z)? * pj.eval(z)? - self.eval(z)? * pij.eval(z)?)
    }
}

/// Falsification test for real stability of a multi-affine polynomial.
///
/// A multi-affine real polynomial is stable iff `∂_i p ∂_j p ≥ p ∂_i∂_j p`
/// everywhere on `ℝ^m` for all `i ≠ j`. This checks the inequality at the
/// origin, at `±𝟙` and at `samples` seeded random rational points. `false`
/// certifies instability; `true` only means no violation was found.
pub fn stability_falsifier(p: &MultiAffinePoly, samples: usize, seed: u64) -> bool {
    let m = p.num_vars();
    if m < 2 {
        return true;
    }
    let mut points = vec![
        vec![Rational::zero(); m],
        vec![Rational::one(); m],
        vec![-Rational::one(); m],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        points.push(
            (0..m)
                .map(|_| rational::rat(rng.random_range(-40..=40), rng.random_range(1..=8)))
                .collect(),
        );
    }
    let partials: Vec<MultiAffinePoly> = (0..m)
        .map(|i| p.partial(i).expect("index in range"))
        .collect();
    for z in &points {
        let pz = p.eval(z).expect("point dimension matches");
        let dz: Vec<Rational> = partials
            .iter()
            .map(|d| d.eval(z).expect("dimension"))
            .collect();
        for i in 0..m {
            for j in i + 1..m {
                let dij = partials[i]
                    .partial(j)
                    .expect("index")
                    .eval(z)
                    .expect("dimension");
                let delta = &dz[i] * &dz[j] - &pz * dij;
                if delta.is_negative() {
                    return false;
                }
            }
        }
    }
    true
}

/// Bitmask of a list of indices.
pub fn mask_of(indices: &[usize]) -> u64 {
    indices.iter().fold(0, |m, &i| m | 1u64 << i)
}

/// Sorted indices of a bitmask.
pub fn indices_of(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn pair() -> MultiAffinePoly {
        MultiAffinePoly::from_terms(2, [(0b01, rat(1, 2)), (0b10, rat(1, 2))]).unwrap()
    }

    #[test]
    fn zero_terms_are_dropped() {
        let p = MultiAffinePoly::from_terms(2, [(0b01, int(1)), (0b01, int(-1))]).unwrap();
        assert!(p.is_zero());
        assert!(MultiAffinePoly::from_terms(2, [(0b100, int(1))]).is_err());
    }

    #[test]
    fn partial_and_conditioning() {
        let p = pair();
        assert_eq!(p.partial(0).unwrap().eval_ones(), rat(1, 2));
        let inside = p.condition_in(0).unwrap();
        assert_eq!(
            inside,
            MultiAffinePoly::from_terms(2, [(0b01, int(1))]).unwrap()
        );
        let outside = p.condition_out(0).unwrap();
        assert_eq!(
            outside,
            MultiAffinePoly::from_terms(2, [(0b10, int(1))]).unwrap()
        );
        let point = MultiAffinePoly::from_terms(2, [(0b11, int(1))]).unwrap();
        assert!(matches!(
            point.condition_out(0),
            Err(Error::EmptyCondition { element: 0, bit: 0 })
        ));
    }

    #[test]
    fn falsifier_examples() {
        assert!(stability_falsifier(&pair(), 50, 1));
        let prod = MultiAffinePoly::from_terms(2, [(0b11, int(1))]).unwrap();
        assert!(stability_falsifier(&prod, 50, 1));
        let bad = MultiAffinePoly::from_terms(2, [(0b11, int(1)), (0, int(1))]).unwrap();
        assert_eq!(
            bad.rayleigh_difference(&[int(0), int(0)], 0, 1).unwrap(),
            int(-1)
        );
        assert!(!stability_falsifier(&bad, 0, 1));
    }

    #[test]
    fn homogeneity() {
        assert_eq!(pair().homogeneous_degree(), Some(1));
        let mixed = MultiAffinePoly::from_terms(2, [(0b01, int(1)), (0b11, int(1))]).unwrap();
        assert_eq!(mixed.homogeneous_degree(), None);
        assert_eq!(mask_of(&[0, 3]), 0b1001);
        assert_eq!(indices_of(0b1001), vec![0, 3]);
    }
}

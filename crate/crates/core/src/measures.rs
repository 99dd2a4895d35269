//! Probability measures on subsets of a finite ground set, stored by
//! explicit support.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphlab::WeightedGraph;
use crate::rational::{self, Rational};
use crate::stablepoly::matrix::{for_each_k_subset, gram};
use crate::stablepoly::multiaffine::{indices_of, mask_of};
use crate::stablepoly::{MultiAffinePoly, RatMatrix, VectorSystem};

/// Default cap on the number of support sets any constructor may build.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Measure on subsets of `{0, …, m−1}` with exact rational probabilities.
/// Subsets are bitmasks, so `m ≤ 64`. Zero-probability sets are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetDistribution {
    m: usize,
    support: BTreeMap<u64, Rational>,
    degree: Option<usize>,
}

impl SubsetDistribution {
    pub fn new(m: usize, entries: impl IntoIterator<Item = (u64, Rational)>) -> Result<Self> {
        if m > 64 {
            return Err(Error::InvalidDistribution(format!(
                "ground set of size {m} exceeds 64"
            )));
        }
        let mut support = BTreeMap::new();
        let mut total = Rational::zero();
        for (mask, p) in entries {
            if m < 64 && mask >> m != 0 {
                return Err(Error::InvalidDistribution(format!(
                    "set {:?} is not a subset of 0..{m}",
                    indices_of(mask)
                )));
            }
            if p.is_negative() {
                return Err(Error::InvalidDistribution(format!(
                    "negative probability {} for set {:?}",
                    rational::format(&p),
                    indices_of(mask)
                )));
            }
            total += &p;
            if p.is_zero() {
                continue;
            }
            if support.insert(mask, p).is_some() {
                return Err(Error::InvalidDistribution(format!(
                    "set {:?} listed twice",
                    indices_of(mask)
                )));
            }
        }
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {}, not 1",
                rational::format(&total)
            )));
        }
        let mut sizes = support.keys().map(|k| k.count_ones() as usize);
        let first = sizes.next();
        let degree = first.filter(|&d| sizes.all(|s| s == d));
        Ok(SubsetDistribution { m, support, degree })
    }

    /// Uniform measure on the given sets (duplicates are an error).
    pub fn uniform(m: usize, sets: &[u64]) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        let p = rational::rat(1, sets.len() as i64);
        Self::new(m, sets.iter().map(|&s| (s, p.clone())))
    }

    pub fn point_mass(m: usize, set: u64) -> Result<Self> {
        Self::new(m, [(set, Rational::one())])
    }

    /// Normalises nonnegative weights into a distribution.
    pub fn from_weights(
        m: usize,
        weights: impl IntoIterator<Item = (u64, Rational)>,
    ) -> Result<Self> {
        let weights: Vec<(u64, Rational)> = weights.into_iter().collect();
        let total: Rational = weights.iter().map(|(_, w)| w.clone()).sum();
        if !total.is_positive() {
            return Err(Error::InvalidDistribution(
                "weights do not have positive total".into(),
            ));
        }
        Self::new(m, weights.into_iter().map(|(s, w)| (s, w / &total)))
    }

    pub fn ground_size(&self) -> usize {
        self.m
    }

    pub fn support(&self) -> &BTreeMap<u64, Rational> {
        &self.support
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    pub fn prob(&self, set: u64) -> Rational {
        self.support
            .get(&set)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// `g_μ(z) = Σ_S μ(S) z^S`
    pub fn generating_poly(&self) -> MultiAffinePoly {
        MultiAffinePoly::from_terms(self.m, self.support.iter().map(|(&s, p)| (s, p.clone())))
            .expect("support sets lie inside the ground set")
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

    /// `P[i ∈ S]`, checked against `∂_i g_μ(𝟙)`.
    pub fn marginal(&self, i: usize) -> Result<Rational> {
        self.check_index(i)?;
        let direct: Rational = self
            .support
            .iter()
            .filter(|(&s, _)| s >> i & 1 == 1)
            .map(|(_, p)| p.clone())
            .sum();
        let via_poly = self.generating_poly().partial(i)?.eval_ones();
        if direct != via_poly {
            return Err(Error::InternalConsistency(format!(
                "marginal of {i}: direct sum {} differs from derivative {}",
                rational::format(&direct),
                rational::format(&via_poly)
            )));
        }
        Ok(direct)
    }

    pub fn marginals(&self) -> Result<Vec<Rational>> {
        (0..self.m).map(|i| self.marginal(i)).collect()
    }

    /// `P[T ⊆ S]`
    pub fn containment(&self, t: u64) -> Rational {
        self.support
            .iter()
            .filter(|(&s, _)| s & t == t)
            .map(|(_, p)| p.clone())
            .sum()
    }

    /// Total mass of sets with element `i` present (`bit = 1`) or absent.
    pub fn branch_mass(&self, i: usize, bit: u8) -> Result<Rational> {
        self.check_index(i)?;
        Ok(self
            .support
            .iter()
            .filter(|(&s, _)| (s >> i & 1) as u8 == bit)
            .map(|(_, p)| p.clone())
            .sum())
    }

    /// Measure conditioned on `i ∈ S` (`bit = 1`) or `i ∉ S` (`bit = 0`).
    pub fn condition(&self, i: usize, bit: u8) -> Result<Self> {
        self.check_index(i)?;
        if bit > 1 {
            return Err(Error::InvalidInput(format!(
                "bit must be 0 or 1, got {bit}"
            )));
        }
        let mass = self.branch_mass(i, bit)?;
        if mass.is_zero() {
            return Err(Error::EmptyCondition { element: i, bit });
        }
        Self::new(
            self.m,
            self.support
                .iter()
                .filter(|(&s, _)| (s >> i & 1) as u8 == bit)
                .map(|(&s, p)| (s, p / &mass)),
        )
    }

    pub fn condition_path(&self, path: &ConditioningPath) -> Result<Self> {
        path.assignments
            .iter()
            .try_fold(self.clone(), |d, &(i, bit)| d.condition(i, bit))
    }

    /// Common support-set size when all sets have one.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        self.degree
    }

    pub fn is_homogeneous(&self) -> (bool, Option<usize>) {
        (self.degree.is_some(), self.degree)
    }

    /// Inverse-CDF draw over the support (in increasing mask order).
    pub fn sample(&self, rng: &mut impl Rng) -> u64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = 0;
        for (&s, p) in &self.support {
            acc += rational::to_f64(p);
            last = s;
            if u < acc {
                return s;
            }
        }
        last
    }

    pub fn to_json(&self) -> DistributionJson {
        DistributionJson {
            m: self.m,
            support: self
                .support
                .iter()
                .map(|(&s, p)| SupportEntry {
                    set: indices_of(s),
                    p: rational::format(p),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &DistributionJson) -> Result<Self> {
        let entries = json
            .support
            .iter()
            .map(|e| {
                if let Some(&bad) = e.set.iter().find(|&&i| i >= json.m.min(64)) {
                    return Err(Error::IndexOutOfRange {
                        index: bad,
                        len: json.m,
                    });
                }
                Ok((mask_of(&e.set), rational::parse(&e.p)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(json.m, entries)
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionJson {
    pub m: usize,
    pub support: Vec<SupportEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportEntry {
    pub set: Vec<usize>,
    pub p: String,
}

/// Ordered list of `(element, bit)` assignments with distinct elements in
/// increasing order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditioningPath {
    assignments: Vec<(usize, u8)>,
}

impl ConditioningPath {
    pub fn new(assignments: Vec<(usize, u8)>) -> Result<Self> {
        if assignments.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidInput(
                "path elements must be strictly increasing".into(),
            ));
        }
        if assignments.iter().any(|&(_, b)| b > 1) {
            return Err(Error::InvalidInput("path bits must be 0 or 1".into()));
        }
        Ok(ConditioningPath { assignments })
    }

    pub fn assignments(&self) -> &[(usize, u8)] {
        &self.assignments
    }

    pub fn push(&mut self, element: usize, bit: u8) -> Result<()> {
        if self.assignments.last().is_some_and(|&(e, _)| e >= element) || bit > 1 {
            return Err(Error::InvalidInput(
                "path elements must be strictly increasing".into(),
            ));
        }
        self.assignments.push((element, bit));
        Ok(())
    }

    /// The set of elements assigned bit 1.
    pub fn included(&self) -> u64 {
        self.assignments
            .iter()
            .filter(|&&(_, b)| b == 1)
            .fold(0, |m, &(e, _)| m | 1 << e)
    }
}

/// Uniform choice of one `(i, j)` for each `i < m`, on ground set
/// `{0, …, m·r − 1}` with `(i, j) ↦ i·r + j`.
pub fn product_lift(m: usize, r: usize, budget: u64) -> Result<SubsetDistribution> {
    if r == 0 {
        return Err(Error::InvalidInput("r must be positive".into()));
    }
    if m * r > 64 {
        return Err(Error::InvalidInput(format!(
            "lifted ground set of size {} exceeds 64",
            m * r
        )));
    }
    let count = (r as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if count > budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "product lift support",
            needed: count,
            budget: budget as u128,
        });
    }
    let p = Rational::one() / Rational::from_integer((r as u64).pow(m as u32).into());
    let mut sets = Vec::with_capacity(count as usize);
    for code in 0..count as u64 {
        let mut c = code;
        let mut mask = 0u64;
        for i in 0..m {
            let j = (c % r as u64) as usize;
            c /= r as u64;
            mask |= 1 << (i * r + j);
        }
        sets.push((mask, p.clone()));
    }
    SubsetDistribution::new(m * r, sets)
}

/// Spanning-tree measure `μ_λ(T) ∝ Π_{e∈T} λ_e`, normalised by the
/// λ-weighted matrix-tree determinant (checked against the enumeration).
pub fn lambda_tree_distribution(
    g: &WeightedGraph,
    lambda: &[Rational],
    budget: u64,
) -> Result<SubsetDistribution> {
    if lambda.len() != g.m() {
        return Err(Error::InvalidInput(format!(
            "{} weights for {} edges",
            lambda.len(),
            g.m()
        )));
    }
    if lambda.iter().any(|l| !l.is_positive()) {
        return Err(Error::InvalidInput("weights must be positive".into()));
    }
    let all = g.all_edges()?;
    if !g.is_connected() {
        return Err(Error::NoBasis("graph is disconnected".into()));
    }
    let trees = g.spanning_trees(all, budget)?;
    let weights: Vec<(u64, Rational)> = trees
        .iter()
        .map(|&t| {
            (
                t,
                indices_of(t).iter().map(|&e| lambda[e].clone()).product(),
            )
        })
        .collect();
    let total: Rational = weights.iter().map(|(_, w)| w.clone()).sum();

    // matrix-tree: det of the weighted Laplacian with vertex 0 removed
    let n = g.n();
    let mut lap = RatMatrix::zeros(n.saturating_sub(1));
    for (e, l) in g.edges().iter().zip(lambda) {
        let (u, v) = (e.u, e.v);
        for (a, b, sign) in [(u, u, 1), (v, v, 1), (u, v, -1), (v, u, -1)] {
            if a > 0 && b > 0 {
                let cur = lap.get(a - 1, b - 1).clone();
                lap.set(a - 1, b - 1, cur + l * rational::int(sign));
            }
        }
    }
    let det = lap.det();
    if det != total {
        return Err(Error::InternalConsistency(format!(
            "tree weight sum {} differs from matrix-tree determinant {}",
            rational::format(&total),
            rational::format(&det)
        )));
    }
    SubsetDistribution::from_weights(g.m(), weights)
}

/// `μ_λ(T) = Π_{i∈T} λ_i · det(Σ_{i∈T} v_i v_iᵀ) / det(B)` over bases `T`,
/// with `B = Σ λ_i v_i v_iᵀ`; the Cauchy–Binet normalisation is checked.
pub fn determinantal_from_lambda(
    vs: &VectorSystem,
    lambda: &[Rational],
    budget: u64,
) -> Result<SubsetDistribution> {
    let m = vs.len();
    let d = vs.dim();
    if lambda.len() != m {
        return Err(Error::InvalidInput(format!(
            "{} weights for {m} vectors",
            lambda.len()
        )));
    }
    if lambda.iter().any(|l| !l.is_positive()) {
        return Err(Error::InvalidInput("weights must be positive".into()));
    }
    if m > 64 {
        return Err(Error::InvalidInput("more than 64 vectors".into()));
    }
    let count = binomial(m, d);
    if count > budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "basis enumeration",
            needed: count,
            budget: budget as u128,
        });
    }
    let mut b = RatMatrix::zeros(d);
    for (v, l) in vs.vectors().iter().zip(lambda) {
        b.add_assign(&RatMatrix::outer(v).scale(l));
    }
    let det_b = b.det();
    if det_b.is_zero() {
        return Err(Error::NoBasis(
            "vectors do not span the ambient space".into(),
        ));
    }
    let mut weights = Vec::new();
    for_each_k_subset(m, d, |idx| {
        let rows: Vec<&[Rational]> = idx.iter().map(|&i| vs.vectors()[i].as_slice()).collect();
        let det = gram(&rows).det();
        if !det.is_zero() {
            let lam: Rational = idx.iter().map(|&i| lambda[i].clone()).product();
            weights.push((mask_of(idx), lam * det));
        }
    });
    let total: Rational = weights.iter().map(|(_, w)| w.clone()).sum();
    if total != det_b {
        return Err(Error::InternalConsistency(format!(
            "Cauchy-Binet sum {} differs from det(B) {}",
            rational::format(&total),
            rational::format(&det_b)
        )));
    }
    SubsetDistribution::new(m, weights.into_iter().map(|(s, w)| (s, w / &det_b)))
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ust_triangle() -> SubsetDistribution {
        lambda_tree_distribution(
            &WeightedGraph::complete(3),
            &[int(1), int(1), int(1)],
            DEFAULT_BUDGET,
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        assert!(SubsetDistribution::new(2, [(0b01, rat(1, 2))]).is_err());
        assert!(SubsetDistribution::new(2, [(0b01, rat(3, 2)), (0b10, rat(-1, 2))]).is_err());
        assert!(SubsetDistribution::new(2, [(0b100, int(1))]).is_err());
        let d = SubsetDistribution::new(2, [(0b01, int(1)), (0b10, int(0))]).unwrap();
        assert_eq!(d.support_size(), 1);
    }

    #[test]
    fn triangle_tree_measure() {
        let d = ust_triangle();
        assert_eq!(d.support_size(), 3);
        assert_eq!(d.marginal(0).unwrap(), rat(2, 3));
        assert_eq!(d.is_homogeneous(), (true, Some(2)));
        let c = d.condition(0, 1).unwrap();
        assert_eq!(c.support_size(), 2);
        assert_eq!(c.marginal(1).unwrap(), rat(1, 2));
        let weighted =
            lambda_tree_distribution(&WeightedGraph::complete(3), &[int(2), int(1), int(1)], 100)
                .unwrap();
        assert_eq!(weighted.prob(0b011), rat(2, 5));
        assert_eq!(weighted.prob(0b101), rat(2, 5));
        assert_eq!(weighted.prob(0b110), rat(1, 5));
    }

    #[test]
    fn conditioning_edge_cases() {
        let pair = SubsetDistribution::uniform(2, &[0b01, 0b10]).unwrap();
        assert_eq!(
            pair.condition(0, 0).unwrap(),
            SubsetDistribution::point_mass(2, 0b10).unwrap()
        );
        let point = SubsetDistribution::point_mass(2, 0b11).unwrap();
        assert!(matches!(
            point.condition(0, 0),
            Err(Error::EmptyCondition { element: 0, bit: 0 })
        ));
        assert!(matches!(
            point.marginal(2),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
        let mixed = SubsetDistribution::uniform(2, &[0b01, 0b11]).unwrap();
        assert_eq!(mixed.is_homogeneous(), (false, None));
        let empty = SubsetDistribution::point_mass(3, 0).unwrap();
        assert_eq!(empty.is_homogeneous(), (true, Some(0)));
    }

    #[test]
    fn product_lift_marginals() {
        let d = product_lift(2, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(d.support_size(), 4);
        assert!(d.support().values().all(|p| *p == rat(1, 4)));
        assert!(d.marginals().unwrap().iter().all(|p| *p == rat(1, 2)));
        let d3 = product_lift(2, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(d3.support_size(), 9);
        assert!(d3.marginals().unwrap().iter().all(|p| *p == rat(1, 3)));
        assert!(matches!(
            product_lift(7, 8, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn determinantal_matches_tree_measure() {
        let g = WeightedGraph::complete(3);
        let vs = g.reduced_incidence().unwrap();
        let det = determinantal_from_lambda(&vs, &[int(1), int(1), int(1)], 100).unwrap();
        assert_eq!(det, ust_triangle());
        let ones = VectorSystem::from_ints(1, &[&[1], &[1]]).unwrap();
        let d = determinantal_from_lambda(&ones, &[int(1), int(1)], 100).unwrap();
        assert_eq!(d, SubsetDistribution::uniform(2, &[0b01, 0b10]).unwrap());
        let flat = VectorSystem::from_ints(2, &[&[1, 0], &[2, 0]]).unwrap();
        assert!(matches!(
            determinantal_from_lambda(&flat, &[int(1), int(1)], 100),
            Err(Error::NoBasis(_))
        ));
        let split = WeightedGraph::unweighted(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            lambda_tree_distribution(&split, &[int(1), int(1)], 100),
            Err(Error::NoBasis(_))
        ));
    }

    #[test]
    fn sampling_is_reproducible() {
        let pair = SubsetDistribution::uniform(2, &[0b01, 0b10]).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10).map(|_| pair.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        let point = SubsetDistribution::point_mass(3, 0b101).unwrap();
        assert_eq!(point.sample(&mut ChaCha8Rng::seed_from_u64(9)), 0b101);
    }

    #[test]
    fn json_round_trip() {
        let d = ust_triangle();
        let text = serde_json::to_string(&d.to_json()).unwrap();
        assert!(text.contains("\"1/3\""));
        assert_eq!(SubsetDistribution::parse_json(&text).unwrap(), d);
        assert!(
            SubsetDistribution::parse_json(r#"{"m":2,"support":[{"set":[5],"p":"1"}]}"#).is_err()
        );
    }
}

//! Seeded random instances: isotropic rational frames, connected graphs,
//! strongly Rayleigh distributions and small real stable polynomials.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphlab::WeightedGraph;
use crate::measures::{lambda_tree_distribution, product_lift, SubsetDistribution};
use crate::rational::{self, Rational};
use crate::stablepoly::{MultiPoly, RatMatrix, VectorSystem};

/// `m` vectors in `ℝ^d` with `Σ v_i v_iᵀ = I` exactly: the columns of the
/// first `d` rows of the Cayley transform `(I − A)(I + A)⁻¹` of a random
/// skew-symmetric integer matrix `A`.
pub fn random_isotropic(d: usize, m: usize, rng: &mut impl Rng) -> Result<VectorSystem> {
    if d > m {
        return Err(Error::InvalidInput(format!(
            "cannot place {m} vectors isotropically in dimension {d}"
        )));
    }
    let mut a = RatMatrix::zeros(m);
    for i in 0..m {
        for j in i + 1..m {
            let v = rational::int(rng.random_range(-2..=2));
            a.set(i, j, v.clone());
            a.set(j, i, -v);
        }
    }
    let id = RatMatrix::identity(m);
    let mut plus = id.clone();
    plus.add_assign(&a);
    let mut minus = id;
    minus.add_assign(&a.scale(&rational::int(-1)));
    // I + A is invertible for skew-symmetric A
    let q = minus.mul(&plus.inverse().expect("I + A is invertible"));
    let vectors = (0..m)
        .map(|i| (0..d).map(|r| q.get(r, i).clone()).collect())
        .collect();
    VectorSystem::new(d, vectors)
}

/// A connected simple graph with `n` vertices and `m` edges: a random
/// spanning tree plus random extra edges.
pub fn random_connected_graph(n: usize, m: usize, rng: &mut impl Rng) -> Result<WeightedGraph> {
    if n == 0 || m + 1 < n || m > n * (n - 1) / 2 {
        return Err(Error::InvalidInput(format!(
            "no connected simple graph with {n} vertices and {m} edges"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs = Vec::new();
    for k in 1..n {
        let parent = order[rng.random_range(0..k)];
        let (u, v) = (parent.min(order[k]), parent.max(order[k]));
        pairs.push((u, v));
    }
    let mut rest: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|p| !pairs.contains(p))
        .collect();
    rest.shuffle(rng);
    pairs.extend(rest.into_iter().take(m + 1 - n));
    pairs.sort_unstable();
    WeightedGraph::unweighted(n, &pairs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    SpanningTrees,
    ProductLift,
    PointMass,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub kind: InstanceKind,
    pub dist: SubsetDistribution,
    pub vectors: VectorSystem,
}

/// Vertex counts `n ≤ max_n` admitting a connected simple graph with `m` edges.
fn tree_vertex_counts(m: usize, max_n: usize) -> Vec<usize> {
    (2..=max_n)
        .filter(|&n| m + 1 >= n && m <= n * (n - 1) / 2)
        .collect()
}

/// A random strongly Rayleigh instance on `m` elements with an isotropic
/// frame in dimension `d`: uniform spanning trees of a random connected
/// graph on at most 5 vertices, a product lift, or a point mass.
pub fn random_instance(m: usize, d: usize, rng: &mut impl Rng) -> Result<Instance> {
    if m == 0 || m > 64 {
        return Err(Error::InvalidInput(
            "ground set size must be between 1 and 64".into(),
        ));
    }
    let ns = tree_vertex_counts(m, 5);
    let lifts: Vec<usize> = (2..=m).filter(|&r| m.is_multiple_of(r)).collect();
    let mut kinds = vec![InstanceKind::PointMass];
    if !ns.is_empty() {
        kinds.push(InstanceKind::SpanningTrees);
    }
    if !lifts.is_empty() {
        kinds.push(InstanceKind::ProductLift);
    }
    let kind = kinds[rng.random_range(0..kinds.len())];
    let dist = match kind {
        InstanceKind::SpanningTrees => {
            let n = ns[rng.random_range(0..ns.len())];
            let g = random_connected_graph(n, m, rng)?;
            lambda_tree_distribution(
                &g,
                &vec![Rational::one(); m],
                crate::measures::DEFAULT_BUDGET,
            )?
        }
        InstanceKind::ProductLift => {
            let r = lifts[rng.random_range(0..lifts.len())];
            product_lift(m / r, r, crate::measures::DEFAULT_BUDGET)?
        }
        InstanceKind::PointMass => {
            let set = (0..m)
                .filter(|_| rng.random_bool(0.5))
                .fold(0u64, |s, i| s | 1 << i);
            SubsetDistribution::point_mass(m, set)?
        }
    };
    Ok(Instance {
        kind,
        dist,
        vectors: random_isotropic(d, m, rng)?,
    })
}

/// `count` instances with `2 ≤ m ≤ max_m` and `1 ≤ d ≤ min(max_d, m)`.
pub fn random_suite(
    count: usize,
    max_m: usize,
    max_d: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Instance>> {
    if max_m < 2 || max_d == 0 {
        return Err(Error::InvalidInput("need max_m ≥ 2 and max_d ≥ 1".into()));
    }
    (0..count)
        .map(|_| {
            let m = rng.random_range(2..=max_m);
            let d = rng.random_range(1..=max_d.min(m));
            random_instance(m, d, rng)
        })
        .collect()
}

/// A real stable polynomial together with a point above its roots.
#[derive(Clone, Debug)]
pub struct StableInstance {
    pub poly: MultiPoly,
    pub point: Vec<Rational>,
    pub determinantal: bool,
}

fn leading_minors_positive(m: &RatMatrix) -> bool {
    (1..=m.dim()).all(|k| m.principal(&(0..k).collect::<Vec<_>>()).det() > Rational::zero())
}

/// Either a product of 2 or 3 linear forms with nonnegative variable
/// coefficients, or `det(C + Σ z_i w_i w_iᵀ)` for random integer `w_i`
/// spanning the space and symmetric `C`. The point is `t𝟙` with `t` a
/// power of two large enough that every linear form is positive, or
/// `C + t Σ w_i w_iᵀ` is positive definite.
pub fn random_stable(n: usize, rng: &mut impl Rng) -> Result<StableInstance> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one variable".into()));
    }
    let determinantal = rng.random_bool(0.5);
    if determinantal {
        let k = rng.random_range(1..=2.min(n));
        loop {
            let ws: Vec<Vec<Rational>> = (0..n)
                .map(|_| {
                    (0..k)
                        .map(|_| rational::int(rng.random_range(-2..=2)))
                        .collect()
                })
                .collect();
            let mut total = RatMatrix::zeros(k);
            let pencil: Vec<RatMatrix> = ws.iter().map(|w| RatMatrix::outer(w)).collect();
            pencil.iter().for_each(|a| total.add_assign(a));
            if !leading_minors_positive(&total) {
                continue;
            }
            let mut c = RatMatrix::zeros(k);
            for i in 0..k {
                for j in i..k {
                    let v = rational::int(rng.random_range(-3..=3));
                    c.set(i, j, v.clone());
                    c.set(j, i, v);
                }
            }
            let poly = MultiPoly::determinantal(&pencil, &c)?;
            let mut t = Rational::one();
            loop {
                let mut at = c.clone();
                at.add_assign(&total.scale(&t));
                if leading_minors_positive(&at) {
                    break;
                }
                t *= rational::int(2);
            }
            return Ok(StableInstance {
                poly,
                point: vec![t; n],
                determinantal,
            });
        }
    }
    let forms = rng.random_range(2..=3);
    let mut poly = MultiPoly::constant(n, Rational::one());
    let mut needed = Rational::one();
    for _ in 0..forms {
        let mut coeffs: Vec<Rational> = (0..n)
            .map(|_| rational::int(rng.random_range(0..=3)))
            .collect();
        if coeffs.iter().all(Zero::is_zero) {
            let i = rng.random_range(0..n);
            coeffs[i] = Rational::one();
        }
        let c = rational::int(rng.random_range(-4..=4));
        let slope: Rational = coeffs.iter().sum();
        // c + t·slope > 0 once t > -c / slope
        let bound = -&c / &slope + Rational::one();
        if bound > needed {
            needed = bound;
        }
        poly = &poly * &MultiPoly::linear(c, &coeffs);
    }
    let mut t = Rational::one();
    while t < needed {
        t *= rational::int(2);
    }
    Ok(StableInstance {
        poly,
        point: vec![t; n],
        determinantal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn isotropic_frames_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (d, m) in [(1, 2), (2, 4), (3, 6), (3, 3)] {
            let vs = random_isotropic(d, m, &mut rng).unwrap();
            assert!(vs.is_isotropic());
        }
    }

    #[test]
    fn graphs_are_connected_with_requested_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (n, m) in [(2, 1), (4, 3), (4, 6), (5, 7)] {
            let g = random_connected_graph(n, m, &mut rng).unwrap();
            assert_eq!((g.n(), g.m()), (n, m));
            assert!(g.is_connected());
        }
        assert!(random_connected_graph(4, 7, &mut rng).is_err());
    }

    #[test]
    fn suite_instances_are_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for inst in random_suite(20, 6, 3, &mut rng).unwrap() {
            assert!(inst.dist.is_homogeneous().0);
            assert_eq!(inst.dist.ground_size(), inst.vectors.len());
        }
    }

    #[test]
    fn stable_points_are_above_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let inst = random_stable(3, &mut rng).unwrap();
            assert!(crate::barrier::above_roots_probe(
                &inst.poly,
                &inst.point,
                50,
                1
            ));
        }
    }
}

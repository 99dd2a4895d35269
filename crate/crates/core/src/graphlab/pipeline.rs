//! End to end: edge vectors, tree packing, interior point, maximum-entropy
//! weights, the `λ`-weighted tree measure and interlacing descent.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::graph::{Edge, WeightedGraph};
use super::packing::disjoint_spanning_trees;
use super::spectral::{combinatorial_thinness, cut_dominance, edge_vectors, spectral_thinness};
use crate::charpoly::descend;
use crate::error::{Error, Result};
use crate::maxent::{self, fit_lambda, interior_point_with, maxent_marginals, rational_lambda};
use crate::measures::lambda_tree_distribution;
use crate::stablepoly::multiaffine::indices_of;

/// Trees drawn by the sampled fallback.
pub const FALLBACK_SAMPLES: usize = 256;

#[derive(Clone, Debug, Serialize)]
pub struct ThinnessCertificate {
    /// Edge indices of the tree, into the input graph.
    pub tree: Vec<usize>,
    #[serde(skip)]
    pub tree_mask: u64,
    /// Smallest `α` with `L_T ⪯ α R`.
    pub alpha_spectral: f64,
    /// Largest cut ratio `w(T(S,S̄)) / w(E(S,S̄))`.
    pub alpha_combinatorial: f64,
    /// Number of disjoint spanning trees found in `F`.
    pub k: usize,
    /// Largest squared edge-vector norm (effective resistance without `D`).
    pub eps: f64,
    /// Interior-point mixing weight.
    pub eps_target: f64,
    pub tol: f64,
    /// Largest coordinate of the interior point, the target marginals.
    pub max_marginal: f64,
    pub fit_residual: f64,
    pub fit_iterations: usize,
    /// Descent bound `4ε + 2ε²` (absent when sampled).
    pub bound: Option<f64>,
    pub mixed_root: Option<f64>,
    /// `"laplacian"` or `"laplacian+D"`
    pub reference: &'static str,
    /// Whether `D ⪯_□ L_G` holds cut by cut (absent without `D`).
    pub cut_dominated: Option<bool>,
    /// The measure did not fit the budget; the tree is the best of
    /// seeded samples instead of the descent output.
    pub sampled: bool,
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub eps_target: f64,
    pub tol: f64,
    pub budget: u64,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            eps_target: 0.01,
            tol: maxent::DEFAULT_TOL,
            budget: crate::measures::DEFAULT_BUDGET,
            seed: 0,
            max_iter: maxent::DEFAULT_MAX_ITER,
        }
    }
}

/// Finds a spanning tree inside `f` that is spectrally thin with respect
/// to `L_G` (or `L_G + D`).
pub fn thin_tree_pipeline(
    g: &WeightedGraph,
    f: u64,
    d: Option<&DMatrix<f64>>,
    opts: &PipelineOptions,
) -> Result<ThinnessCertificate> {
    let all = g.all_edges()?;
    if f & !all != 0 {
        return Err(Error::InvalidInput(
            "F contains edges not in the graph".into(),
        ));
    }
    if !g.is_connected_on(f) {
        return Err(Error::NoBasis("(V, F) is not connected".into()));
    }
    if !(0.0..=1.0).contains(&opts.eps_target) {
        return Err(Error::InvalidInput("eps_target must lie in [0, 1]".into()));
    }
    let evs = edge_vectors(g, f, d)?;
    let vs = evs.to_vector_system()?;
    let m = evs.edges.len();
    let eps = (0..m).map(|k| evs.norm_sq(k)).fold(0.0, f64::max);

    // the subgraph (V, F), edges in the same order as the vectors
    let sub_edges: Vec<Edge> = evs.edges.iter().map(|&e| g.edges()[e]).collect();
    let sub = WeightedGraph::new(g.n(), sub_edges)?;
    let sub_all = sub.all_edges()?;
    let want = m / g.n().saturating_sub(1).max(1);
    let packing = disjoint_spanning_trees(&sub, sub_all, want.max(1))?;

    let enumerated = match sub.spanning_trees(sub_all, opts.budget) {
        Ok(trees) => Some(trees),
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let x1 = match &enumerated {
        Some(trees) => {
            let mut x = vec![0.0; m];
            for &t in trees {
                indices_of(t).into_iter().for_each(|i| x[i] += 1.0);
            }
            x.iter().map(|v| v / trees.len() as f64).collect()
        }
        None => maxent_marginals(&vs, &vec![1.0; m])?,
    };
    let target = interior_point_with(&packing.trees, &x1, m, opts.eps_target)?;
    let model = fit_lambda(&vs, &target, opts.tol, opts.max_iter)?;
    // det(Σ_{e∈T} v_e v_eᵀ) is proportional to Π_{e∈T} w_e on spanning trees
    let weights: Vec<f64> = model
        .lambda
        .iter()
        .zip(sub.edges())
        .map(|(l, e)| l * e.w)
        .collect();

    let (positions, bound, mixed_root, sampled) = match enumerated {
        Some(_) => {
            let dist = lambda_tree_distribution(&sub, &rational_lambda(&weights)?, opts.budget)?;
            let cert = descend(&dist, &vs, opts.tol)?;
            (cert.mask, Some(cert.bound), Some(cert.mixed_root), false)
        }
        None => (
            best_sampled(&sub, g, &evs.edges, &weights, d, opts.seed)?,
            None,
            None,
            true,
        ),
    };
    let tree_mask = evs.edges_of(positions);
    if !g.is_spanning_tree(tree_mask) || tree_mask & !f != 0 {
        return Err(Error::InternalConsistency(
            "pipeline output is not a spanning tree inside F".into(),
        ));
    }
    Ok(ThinnessCertificate {
        tree: indices_of(tree_mask),
        tree_mask,
        alpha_spectral: spectral_thinness(g, tree_mask, d)?,
        alpha_combinatorial: combinatorial_thinness(g, tree_mask)?,
        k: packing.found,
        eps,
        eps_target: opts.eps_target,
        tol: opts.tol,
        max_marginal: target.max_coordinate(),
        fit_residual: model.residual,
        fit_iterations: model.iterations,
        bound,
        mixed_root,
        reference: if d.is_some() {
            "laplacian+D"
        } else {
            "laplacian"
        },
        cut_dominated: d.map(|d| cut_dominance(d, g)).transpose()?,
        sampled,
    })
}

/// Best spectral thinness over [`FALLBACK_SAMPLES`] seeded Wilson trees.
fn best_sampled(
    sub: &WeightedGraph,
    g: &WeightedGraph,
    edges: &[usize],
    weights: &[f64],
    d: Option<&DMatrix<f64>>,
    seed: u64,
) -> Result<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all = sub.all_edges()?;
    let mut best: Option<(f64, u64)> = None;
    for _ in 0..FALLBACK_SAMPLES {
        let t = sub.wilson_tree(all, weights, &mut rng)?;
        let original = indices_of(t).iter().fold(0u64, |m, &k| m | 1 << edges[k]);
        let alpha = spectral_thinness(g, original, d)?;
        if best.is_none_or(|(a, _)| alpha < a) {
            best = Some((alpha, t));
        }
    }
    Ok(best.expect("at least one sample").1)
}

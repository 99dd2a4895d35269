use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::graph::{check_cut_budget, WeightedGraph};
use crate::error::{Error, Result};
use crate::stablepoly::vectors::largest_eigenvalue;
use crate::stablepoly::VectorSystem;

/// Eigenvalues at or below this (relative to the largest) count as zero.
pub const NULL_CUTOFF: f64 = 1e-9;

/// Weighted Laplacian `Σ w_e b_e b_eᵀ` of the edges in `mask`.
pub fn laplacian_of(g: &WeightedGraph, mask: u64) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(g.n(), g.n());
    for (i, e) in g.edges().iter().enumerate() {
        if i < 64 && mask >> i & 1 == 0 {
            continue;
        }
        l[(e.u, e.u)] += e.w;
        l[(e.v, e.v)] += e.w;
        l[(e.u, e.v)] -= e.w;
        l[(e.v, e.u)] -= e.w;
    }
    l
}

pub fn laplacian(g: &WeightedGraph) -> DMatrix<f64> {
    laplacian_of(g, u64::MAX)
}

/// Eigenpairs of a symmetric matrix with eigenvalue above the null cutoff,
/// sorted by decreasing eigenvalue.
pub fn range_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(m.clone());
    let top = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = NULL_CUTOFF * top.max(1.0);
    let mut keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > cutoff).collect();
    keep.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let vals = keep.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])]);
    (vals, vecs)
}

/// Moore–Penrose pseudo-inverse of a symmetric matrix.
pub fn pinv_symmetric(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (vals, vecs) = range_eigen(m);
    let inv = DMatrix::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|v| 1.0 / v),
    ));
    &vecs * inv * vecs.transpose()
}

pub fn pseudo_inverse(g: &WeightedGraph) -> DMatrix<f64> {
    pinv_symmetric(&laplacian(g))
}

fn incidence(n: usize, u: usize, v: usize) -> DVector<f64> {
    let mut b = DVector::zeros(n);
    b[u] = 1.0;
    b[v] = -1.0;
    b
}

/// `b_eᵀ L_G^† b_e` for edge index `e`.
pub fn effective_resistance(g: &WeightedGraph, e: usize) -> Result<f64> {
    let edge = g.edges().get(e).ok_or(Error::IndexOutOfRange {
        index: e,
        len: g.m(),
    })?;
    resistance_between(g, edge.u, edge.v)
}

/// Effective resistance between two vertices.
pub fn resistance_between(g: &WeightedGraph, u: usize, v: usize) -> Result<f64> {
    if u >= g.n() || v >= g.n() {
        return Err(Error::IndexOutOfRange {
            index: u.max(v),
            len: g.n(),
        });
    }
    if !g.same_component(u, v) {
        return Err(Error::InfiniteResistance { u, v });
    }
    let b = incidence(g.n(), u, v);
    Ok(b.dot(&(pseudo_inverse(g) * &b)))
}

/// Resistance of every edge, sharing one pseudo-inverse.
pub fn all_resistances(g: &WeightedGraph) -> Result<Vec<f64>> {
    let pinv = pseudo_inverse(g);
    g.edges()
        .iter()
        .map(|e| {
            if !g.same_component(e.u, e.v) {
                return Err(Error::InfiniteResistance { u: e.u, v: e.v });
            }
            let b = incidence(g.n(), e.u, e.v);
            Ok(b.dot(&(&pinv * &b)))
        })
        .collect()
}

/// Isotropic (or sub-isotropic) edge vectors `√w_e R^{†/2} b_e`, with
/// `R = L_G` or `R = L_G + D`, in reduced coordinates.
#[derive(Clone, Debug)]
pub struct EdgeVectorSystem {
    /// Edge indices of the graph, in order; `vectors[k]` belongs to `edges[k]`.
    pub edges: Vec<usize>,
    /// Reduced coordinates, all of length `dim`.
    pub vectors: Vec<Vec<f64>>,
    pub dim: usize,
    /// Columns: orthonormal basis in `ℝ^V` of the reduced coordinate space.
    pub basis: DMatrix<f64>,
    /// `R^{†/2}` expressed in reduced coordinates (`dim × n`).
    pub whitening: DMatrix<f64>,
}

impl EdgeVectorSystem {
    pub fn norm_sq(&self, k: usize) -> f64 {
        self.vectors[k].iter().map(|x| x * x).sum()
    }

    /// `Σ_k v_k v_kᵀ` over the positions selected by `mask` (bits index
    /// positions in `edges`).
    pub fn frame(&self, mask: u64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (k, v) in self.vectors.iter().enumerate() {
            if mask >> k & 1 == 1 {
                let v = DVector::from_column_slice(v);
                m += &v * v.transpose();
            }
        }
        m
    }

    /// Exact rational copy of the vectors.
    pub fn to_vector_system(&self) -> Result<VectorSystem> {
        VectorSystem::from_f64(self.dim, &self.vectors)
    }

    /// Position mask of a graph edge mask restricted to this system.
    pub fn positions_of(&self, edge_mask: u64) -> u64 {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &e)| edge_mask >> e & 1 == 1)
            .fold(0, |m, (k, _)| m | 1 << k)
    }

    /// Graph edge mask of a position mask.
    pub fn edges_of(&self, positions: u64) -> u64 {
        self.edges
            .iter()
            .enumerate()
            .filter(|(k, _)| positions >> k & 1 == 1)
            .fold(0, |m, (_, &e)| m | 1 << e)
    }
}

fn check_pd(d: &DMatrix<f64>, n: usize) -> Result<()> {
    if d.nrows() != n || d.ncols() != n {
        return Err(Error::Precondition(format!("D must be {n}x{n}")));
    }
    let asym = (d - d.transpose()).abs().max();
    if asym > 1e-12 * d.abs().max().max(1.0) {
        return Err(Error::Precondition("D is not symmetric".into()));
    }
    let eig = SymmetricEigen::new(d.clone());
    if eig.eigenvalues.iter().any(|&x| x <= 0.0) {
        return Err(Error::Precondition("D is not positive definite".into()));
    }
    Ok(())
}

/// Reference matrix `L_G` or `L_G + D`.
pub fn reference_matrix(g: &WeightedGraph, d: Option<&DMatrix<f64>>) -> Result<DMatrix<f64>> {
    let l = laplacian(g);
    match d {
        None => Ok(l),
        Some(d) => {
            check_pd(d, g.n())?;
            Ok(l + d)
        }
    }
}

/// Edge vectors for the edges of `f` (a mask over `g`'s edges).
///
/// The whitened vectors `u_e = √w_e R^{†/2} b_e` live in the range of `R`.
/// They are expressed in an orthonormal basis of the span of all edge
/// vectors `{u_e : e ∈ E}`, so that spanning trees are bases and, when
/// `R = L_G`, `Σ_{e∈E} v_e v_eᵀ = I`.
pub fn edge_vectors(
    g: &WeightedGraph,
    f: u64,
    d: Option<&DMatrix<f64>>,
) -> Result<EdgeVectorSystem> {
    let r = reference_matrix(g, d)?;
    let (vals, vecs) = range_eigen(&r);
    let half = DMatrix::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|v| v.sqrt().recip()),
    ));
    // coordinates in the eigenbasis of R
    let coords = &half * vecs.transpose();
    let lap = laplacian(g);
    let (whitening, basis) = if d.is_none() {
        (coords, vecs)
    } else {
        let s = &coords * &lap * coords.transpose();
        let (_, q) = range_eigen(&s);
        (q.transpose() * &coords, &vecs * &q)
    };
    let dim = whitening.nrows();
    let mut edges = Vec::new();
    let mut vectors = Vec::new();
    for (i, e) in g.edges().iter().enumerate() {
        if i >= 64 || f >> i & 1 == 0 {
            continue;
        }
        let b = incidence(g.n(), e.u, e.v) * e.w.sqrt();
        edges.push(i);
        vectors.push((&whitening * b).iter().cloned().collect());
    }
    Ok(EdgeVectorSystem {
        edges,
        vectors,
        dim,
        basis,
        whitening,
    })
}

/// Smallest `α` with `L_T ⪯ α R`, where `R = L_G` or `L_G + D`.
pub fn spectral_thinness(g: &WeightedGraph, t: u64, d: Option<&DMatrix<f64>>) -> Result<f64> {
    if !g.is_spanning_tree(t) {
        return Err(Error::Precondition(
            "edge set is not a spanning tree".into(),
        ));
    }
    let r = reference_matrix(g, d)?;
    let (vals, vecs) = range_eigen(&r);
    let half = DMatrix::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|v| v.sqrt().recip()),
    ));
    let w = &half * vecs.transpose();
    let m = &w * laplacian_of(g, t) * w.transpose();
    Ok(largest_eigenvalue(&m))
}

/// `max_S w(T(S, S̄)) / w(E(S, S̄))` over nontrivial cuts.
pub fn combinatorial_thinness(g: &WeightedGraph, t: u64) -> Result<f64> {
    if !g.is_spanning_tree(t) {
        return Err(Error::Precondition(
            "edge set is not a spanning tree".into(),
        ));
    }
    let all = g.all_edges()?;
    let mut best = 0.0f64;
    g.for_each_cut(|s| {
        let total = g.cut_weight(s, all);
        if total > 0.0 {
            best = best.max(g.cut_weight(s, t) / total);
        }
    })?;
    Ok(best)
}

/// `𝟙_Sᵀ D 𝟙_S ≤ 𝟙_Sᵀ L_G 𝟙_S` for every proper nonempty `S ⊂ V`.
///
/// `D` need not annihilate `𝟙`, so `S` and its complement are checked
/// separately.
pub fn cut_dominance(d: &DMatrix<f64>, g: &WeightedGraph) -> Result<bool> {
    let n = g.n();
    check_cut_budget(n)?;
    if d.nrows() != n || d.ncols() != n {
        return Err(Error::InvalidInput(format!("D must be {n}x{n}")));
    }
    let l = laplacian(g);
    let scale = d.abs().max().max(l.abs().max()).max(1.0);
    let full = (1u64 << n) - 1;
    for s in 1..full {
        let idx: Vec<usize> = (0..n).filter(|&i| s >> i & 1 == 1).collect();
        let quad = |m: &DMatrix<f64>| {
            idx.iter()
                .flat_map(|&i| idx.iter().map(move |&j| m[(i, j)]))
                .sum::<f64>()
        };
        if quad(d) > quad(&l) + 1e-12 * scale * (n * n) as f64 {
            return Ok(false);
        }
    }
    Ok(true)
}

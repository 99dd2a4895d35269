//! Graph Laplacians, effective resistances, isotropic edge vectors,
//! spanning-tree packing, thinness measures and the thin-tree pipeline.

pub mod graph;
pub mod packing;
pub mod pipeline;
pub mod spectral;

pub use graph::{Edge, WeightedGraph};
pub use packing::{disjoint_spanning_trees, TreePacking};
pub use pipeline::{thin_tree_pipeline, PipelineOptions, ThinnessCertificate};
pub use spectral::{
    combinatorial_thinness, cut_dominance, edge_vectors, effective_resistance, laplacian,
    pseudo_inverse, spectral_thinness, EdgeVectorSystem,
};

//! Exact polynomial arithmetic: multi-affine polynomials over subsets, the
//! bounded-degree `z`/`x` ring, univariate real-root tooling and interlacing
//! tests.

pub mod matrix;
pub mod multiaffine;
pub mod multipoly;
pub mod roots;
pub mod univariate;
pub mod vectors;
pub mod zx;

pub use matrix::{char_poly_x2, RatMatrix};
pub use multiaffine::{stability_falsifier, MultiAffinePoly};
pub use multipoly::MultiPoly;
pub use roots::{
    common_interlacing_test, is_interlacing, is_real_rooted, max_real_root, RealRoot, SturmChain,
};
pub use univariate::UnivariatePoly;
pub use vectors::VectorSystem;
pub use zx::{PolyJson, ZXPoly};

use crate::error::Result;

/// `g(x𝟙 + z)`
pub fn shift_diagonal(p: &MultiAffinePoly) -> ZXPoly {
    ZXPoly::shift_diagonal(p)
}

/// `det(xI + Σ z_i v_i v_iᵀ)`
pub fn cauchy_binet_expand(vs: &VectorSystem) -> Result<ZXPoly> {
    ZXPoly::cauchy_binet_expand(vs.dim(), vs.vectors())
}

pub fn zx_mul(p: &ZXPoly, q: &ZXPoly) -> Result<ZXPoly> {
    p.mul(q)
}

pub fn apply_one_minus_dzz(p: &ZXPoly, i: usize) -> Result<ZXPoly> {
    p.apply_one_minus_dzz(i)
}

pub fn restrict_zero(p: &ZXPoly) -> UnivariatePoly {
    p.restrict_zero()
}

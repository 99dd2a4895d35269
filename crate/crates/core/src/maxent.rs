//! Maximum-entropy weights: find `λ` such that the determinantal measure
//! `μ_λ(T) ∝ det(Σ_{i∈T} λ_i v_i v_iᵀ)` has prescribed marginals `x`.
//!
//! The dual `f(γ) = log det B(e^γ) − ⟨γ, x⟩`, `B(λ) = Σ λ_i v_i v_iᵀ`, is
//! minimised by damped Newton. Its gradient is the leverage-score vector
//! minus `x`, so a zero of the gradient is exactly a matching `λ`.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphlab::graph::Dsu;
use crate::measures::binomial;
use crate::rational::{self, Rational};
use crate::stablepoly::matrix::for_each_k_subset;
use crate::stablepoly::multiaffine::indices_of;
use crate::stablepoly::VectorSystem;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200;
/// `|γ_i|` beyond this means the target sits on (or outside) the boundary.
pub const GAMMA_LIMIT: f64 = 50.0;
const ARMIJO: f64 = 0.3;
const SHRINK: f64 = 0.5;
/// Newton decrements below this (relative to `|f|`) are lost in rounding.
const FLAT: f64 = 1e-12;
/// Every subset inequality is checked up to this ground-set size.
pub const FACET_CHECK_LIMIT: usize = 16;

/// Squared `B⁻¹`-cosines below this count as orthogonal when splitting
/// the vectors into matroid components.
const COMPONENT_CUTOFF: f64 = 1e-20;

/// Cauchy–Binet cross-check in `partition_function` up to this many terms.
const CROSS_CHECK_TERMS: u128 = 20_000;

/// A point of the basis polytope `conv{𝟙_T}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisPolytopePoint {
    pub x: Vec<f64>,
    /// Basis cardinality `d`, the coordinate sum.
    pub rank: usize,
    /// Set when the construction did not perturb into the interior.
    pub boundary_risk: bool,
}

impl BasisPolytopePoint {
    pub fn new(x: Vec<f64>, rank: usize) -> Result<Self> {
        if x.iter()
            .any(|v| !v.is_finite() || *v < -1e-12 || *v > 1.0 + 1e-12)
        {
            return Err(Error::InvalidInput("coordinates must lie in [0, 1]".into()));
        }
        let sum: f64 = x.iter().sum();
        if (sum - rank as f64).abs() > 1e-12 * rank.max(1) as f64 {
            return Err(Error::InvalidInput(format!(
                "coordinates sum to {sum}, expected {rank}"
            )));
        }
        Ok(BasisPolytopePoint {
            x,
            rank,
            boundary_risk: false,
        })
    }

    pub fn max_coordinate(&self) -> f64 {
        self.x.iter().cloned().fold(0.0, f64::max)
    }
}

fn indicator_average(sets: &[u64], m: usize) -> Vec<f64> {
    let mut x = vec![0.0; m];
    for &s in sets {
        for i in indices_of(s) {
            x[i] += 1.0;
        }
    }
    x.iter_mut().for_each(|v| *v /= sets.len() as f64);
    x
}

fn check_bases(sets: &[u64], m: usize) -> Result<usize> {
    let Some(&first) = sets.first() else {
        return Err(Error::InvalidInput("at least one basis is required".into()));
    };
    let d = first.count_ones() as usize;
    if m < 64 && sets.iter().any(|&s| s >> m != 0) {
        return Err(Error::InvalidInput(
            "basis uses an element outside the ground set".into(),
        ));
    }
    if sets.iter().any(|s| s.count_ones() as usize != d) {
        return Err(Error::InvalidInput("bases differ in size".into()));
    }
    Ok(d)
}

/// `(1 − ε)·avg(𝟙_{T_j}) + ε·avg(all bases)` for disjoint bases `T_j`.
pub fn interior_point(
    bases: &[u64],
    all_bases: &[u64],
    m: usize,
    eps: f64,
) -> Result<BasisPolytopePoint> {
    check_bases(all_bases, m)?;
    interior_point_with(bases, &indicator_average(all_bases, m), m, eps)
}

/// As [`interior_point`] with an explicit interior point `x1`.
pub fn interior_point_with(
    bases: &[u64],
    x1: &[f64],
    m: usize,
    eps: f64,
) -> Result<BasisPolytopePoint> {
    let d = check_bases(bases, m)?;
    let mut seen = 0u64;
    for &b in bases {
        if seen & b != 0 {
            return Err(Error::InvalidInput("bases are not disjoint".into()));
        }
        seen |= b;
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidInput("eps must lie in [0, 1]".into()));
    }
    if x1.len() != m {
        return Err(Error::InvalidInput("x1 has the wrong length".into()));
    }
    let x0 = indicator_average(bases, m);
    let x: Vec<f64> = x0
        .iter()
        .zip(x1)
        .map(|(a, b)| (1.0 - eps) * a + eps * b)
        .collect();
    let mut point = BasisPolytopePoint::new(x, d)?;
    point.boundary_risk = eps == 0.0;
    Ok(point)
}

fn float_vectors(vs: &VectorSystem) -> Vec<DVector<f64>> {
    vs.vectors()
        .iter()
        .map(|v| DVector::from_iterator(v.len(), v.iter().map(rational::to_f64)))
        .collect()
}

fn frame(vecs: &[DVector<f64>], d: usize, lambda: &[f64]) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(d, d);
    for (v, l) in vecs.iter().zip(lambda) {
        b += v * v.transpose() * *l;
    }
    b
}

fn check_lambda<T>(vs: &VectorSystem, lambda: &[T], positive: impl Fn(&T) -> bool) -> Result<()> {
    if lambda.len() != vs.len() {
        return Err(Error::InvalidInput(format!(
            "{} weights for {} vectors",
            lambda.len(),
            vs.len()
        )));
    }
    if !lambda.iter().all(positive) {
        return Err(Error::InvalidInput("weights must be positive".into()));
    }
    Ok(())
}

/// `det B(λ)`, exact. On small instances it is also summed over bases by
/// Cauchy–Binet and the two are required to agree.
pub fn partition_function(vs: &VectorSystem, lambda: &[Rational]) -> Result<Rational> {
    check_lambda(vs, lambda, |l| *l > Rational::zero())?;
    let mut b = crate::stablepoly::RatMatrix::zeros(vs.dim());
    for (v, l) in vs.vectors().iter().zip(lambda) {
        b.add_assign(&crate::stablepoly::RatMatrix::outer(v).scale(l));
    }
    let det = b.det();
    if det.is_zero() {
        return Err(Error::RankDeficient("B(λ) is singular".into()));
    }
    let (m, d) = (vs.len(), vs.dim());
    if binomial(m, d) <= CROSS_CHECK_TERMS {
        let mut total = Rational::zero();
        for_each_k_subset(m, d, |idx| {
            let weight: Rational = idx.iter().map(|&i| lambda[i].clone()).product();
            let set = idx.iter().fold(0u64, |s, &i| s | 1 << i);
            total += weight * vs.sum_outer(set).det();
        });
        if total != det {
            return Err(Error::InternalConsistency(
                "Cauchy–Binet sum differs from det B(λ)".into(),
            ));
        }
    }
    Ok(det)
}

/// Leverage scores `λ_i v_iᵀ B(λ)⁻¹ v_i`, the marginals of `μ_λ`.
pub fn maxent_marginals(vs: &VectorSystem, lambda: &[f64]) -> Result<Vec<f64>> {
    check_lambda(vs, lambda, |l| *l > 0.0 && l.is_finite())?;
    let vecs = float_vectors(vs);
    let state = State::new(&vecs, vs.dim(), lambda).ok_or_else(singular)?;
    Ok(state.leverage)
}

fn singular() -> Error {
    Error::RankDeficient("B(λ) is singular".into())
}

/// Factorised frame at one `λ`.
struct State {
    log_det: f64,
    leverage: Vec<f64>,
    /// `(λ_i λ_j (v_iᵀ B⁻¹ v_j)²)`
    cross: DMatrix<f64>,
}

impl State {
    fn new(vecs: &[DVector<f64>], d: usize, lambda: &[f64]) -> Option<Self> {
        let chol = frame(vecs, d, lambda).cholesky()?;
        let log_det = 2.0
            * chol
                .l_dirty()
                .diagonal()
                .iter()
                .take(d)
                .map(|x| x.ln())
                .sum::<f64>();
        if !log_det.is_finite() {
            return None;
        }
        let m = vecs.len();
        let solved: Vec<DVector<f64>> = vecs.iter().map(|v| chol.solve(v)).collect();
        let mut cross = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let k = lambda[i] * lambda[j] * vecs[i].dot(&solved[j]).powi(2);
                cross[(i, j)] = k;
                cross[(j, i)] = k;
            }
        }
        let leverage = (0..m)
            .map(|i| lambda[i] * vecs[i].dot(&solved[i]))
            .collect();
        Some(State {
            log_det,
            leverage,
            cross,
        })
    }
}

/// Fitted weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxEntModel {
    /// Dual variables, normalised so that `λ` has geometric mean 1 on
    /// every matroid component (a loop gets `λ = 1`).
    pub gamma: Vec<f64>,
    /// `λ_i = exp(γ_i − 1/d)`
    pub lambda: Vec<f64>,
    pub target: Vec<f64>,
    /// `max_i |marginal_i − x_i|` at the final iterate.
    pub residual: f64,
    pub iterations: usize,
    /// Dual objective at every accepted iterate.
    #[serde(skip)]
    pub objective: Vec<f64>,
}

impl MaxEntModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn rank_of(vecs: &[DVector<f64>], d: usize, set: u64) -> usize {
    let mut b = DMatrix::zeros(d, d);
    for i in indices_of(set) {
        b += &vecs[i] * vecs[i].transpose();
    }
    let scale = b.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    b.symmetric_eigenvalues()
        .iter()
        .filter(|e| **e > 1e-9 * scale)
        .count()
}

/// Rejects targets outside the relative interior of the basis polytope.
/// All rank inequalities `x(S) ≤ r(S)` are checked for ground sets up to
/// [`FACET_CHECK_LIMIT`]; equality is allowed only on separators. Larger
/// instances get the single-element checks and rely on divergence.
pub fn check_interior(vs: &VectorSystem, x: &[f64]) -> Result<()> {
    let boundary = || Error::BoundaryOrInfeasible {
        iterations: 0,
        max_abs_gamma: f64::INFINITY,
    };
    let (m, d) = (vs.len(), vs.dim());
    if x.len() != m {
        return Err(Error::InvalidInput(format!(
            "target has {} coordinates for {m} vectors",
            x.len()
        )));
    }
    let vecs = float_vectors(vs);
    let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let r_full = rank_of(&vecs, d, full);
    let tight = |set: u64, r: usize| -> Result<bool> {
        let sum: f64 = indices_of(set).iter().map(|&i| x[i]).sum();
        if sum > r as f64 + 1e-9 {
            return Err(boundary());
        }
        Ok(sum >= r as f64 - 1e-12)
    };
    let separator = |set: u64, r: usize| r + rank_of(&vecs, d, full & !set) == r_full;
    if m <= FACET_CHECK_LIMIT {
        for set in 1..full {
            let r = rank_of(&vecs, d, set);
            if tight(set, r)? && !separator(set, r) {
                return Err(boundary());
            }
            // x(S) ≥ x-sum forced by the complement: x(S) ≥ r(E) − r(E∖S)
            let sum: f64 = indices_of(set).iter().map(|&i| x[i]).sum();
            let lower = r_full as f64 - rank_of(&vecs, d, full & !set) as f64;
            if sum < lower - 1e-9 {
                return Err(boundary());
            }
        }
    } else {
        for (i, &xi) in x.iter().enumerate() {
            let r = rank_of(&vecs, d, 1 << i);
            if tight(1 << i, r)? && !separator(1 << i, r) {
                return Err(boundary());
            }
            if xi < -1e-12 {
                return Err(boundary());
            }
        }
    }
    for (i, &xi) in x.iter().enumerate() {
        let set = 1u64 << i;
        if xi <= 1e-12 && !separator(full & !set, rank_of(&vecs, d, full & !set)) {
            return Err(boundary());
        }
    }
    Ok(())
}

/// Connected components of the vector matroid, as a label per vector.
///
/// `i` and `j` share a component iff they are joined by a path with
/// `v_iᵀB⁻¹v_j ≠ 0`; the spans of different components are `B⁻¹`-orthogonal.
/// A zero vector is a component on its own.
fn components(state: &State) -> Vec<usize> {
    let m = state.leverage.len();
    let mut dsu = Dsu::new(m);
    for i in 0..m {
        for j in i + 1..m {
            // squared B⁻¹-cosine, scale free
            let norm = state.leverage[i] * state.leverage[j];
            if norm > 0.0 && state.cross[(i, j)] > COMPONENT_CUTOFF * norm {
                dsu.union(i, j);
            }
        }
    }
    (0..m).map(|i| dsu.find(i)).collect()
}

/// Subtracts the mean of `g` on each component.
fn center(g: &mut DVector<f64>, labels: &[usize]) {
    let mut sums = vec![(0.0, 0usize); labels.len()];
    for (i, &c) in labels.iter().enumerate() {
        sums[c].0 += g[i];
        sums[c].1 += 1;
    }
    for (i, &c) in labels.iter().enumerate() {
        g[i] -= sums[c].0 / sums[c].1 as f64;
    }
}

/// Damped Newton on the dual. The objective is invariant along the
/// indicator of every matroid component, so the Newton system is solved
/// with `Σ_C 𝟙_C𝟙_Cᵀ/|C|` added and `γ` is centred per component; a
/// failed factorisation falls back to a gradient step.
pub fn fit_lambda(
    vs: &VectorSystem,
    target: &BasisPolytopePoint,
    tol: f64,
    max_iter: usize,
) -> Result<MaxEntModel> {
    let (m, d) = (vs.len(), vs.dim());
    if target.x.len() != m {
        return Err(Error::InvalidInput(format!(
            "target has {} coordinates for {m} vectors",
            target.x.len()
        )));
    }
    if target.rank != d {
        return Err(Error::InvalidInput(format!(
            "target sums to {}, but the vectors span {d} dimensions",
            target.rank
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    check_interior(vs, &target.x)?;
    let vecs = float_vectors(vs);
    let x = DVector::from_column_slice(&target.x);
    let shift = 1.0 / d as f64;
    let lambda_of = |g: &DVector<f64>| -> Vec<f64> { g.iter().map(|v| v.exp()).collect() };
    let objective = |s: &State, g: &DVector<f64>| s.log_det - g.dot(&x);

    let mut gamma = DVector::zeros(m);
    let mut state = State::new(&vecs, d, &lambda_of(&gamma)).ok_or_else(singular)?;
    let labels = components(&state);
    let mut regulariser = DMatrix::zeros(m, m);
    for i in 0..m {
        let size = labels.iter().filter(|&&c| c == labels[i]).count() as f64;
        for j in 0..m {
            if labels[j] == labels[i] {
                regulariser[(i, j)] = 1.0 / size;
            }
        }
    }
    let mut history = vec![objective(&state, &gamma)];
    let max_abs = |g: &DVector<f64>| g.iter().fold(0.0f64, |a, v| a.max((v + shift).abs()));
    for iteration in 0..=max_iter {
        let grad = DVector::from_column_slice(&state.leverage) - &x;
        let residual = grad.amax();
        if residual <= tol {
            let gamma: Vec<f64> = gamma.iter().map(|g| g + shift).collect();
            return Ok(MaxEntModel {
                lambda: gamma.iter().map(|g| (g - shift).exp()).collect(),
                gamma,
                target: target.x.clone(),
                residual,
                iterations: iteration,
                objective: history,
            });
        }
        if iteration == max_iter {
            return Err(Error::NotConverged {
                iterations: max_iter,
                residual,
            });
        }
        let hessian = DMatrix::from_diagonal(&DVector::from_column_slice(&state.leverage))
            - &state.cross
            + &regulariser;
        let step = match hessian.cholesky() {
            Some(c) => -c.solve(&grad),
            None => -grad.clone(),
        };
        let slope = grad.dot(&step);
        let f0 = *history.last().expect("nonempty");
        let mut alpha = 1.0;
        loop {
            let trial = &gamma + &step * alpha;
            if let Some(s) = State::new(&vecs, d, &lambda_of(&trial)) {
                let f = objective(&s, &trial);
                let sufficient = f <= f0 + ARMIJO * alpha * slope;
                // once f cannot resolve the decrease, a smaller gradient is the signal
                let flat = -slope <= FLAT * f0.abs().max(1.0) && {
                    let g = DVector::from_column_slice(&s.leverage) - &x;
                    g.amax() < residual
                };
                if sufficient || flat {
                    gamma = trial;
                    state = s;
                    history.push(f);
                    break;
                }
            }
            alpha *= SHRINK;
            if alpha < 1e-12 {
                return Err(Error::NotConverged {
                    iterations: iteration,
                    residual,
                });
            }
        }
        center(&mut gamma, &labels);
        let drift = max_abs(&gamma);
        if drift > GAMMA_LIMIT {
            return Err(Error::BoundaryOrInfeasible {
                iterations: iteration + 1,
                max_abs_gamma: drift,
            });
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// `Σ_T p(T) log(p(T)/q(T))` over the support of `p`.
pub fn relative_entropy(p: &[(u64, f64)], q: impl Fn(u64) -> f64) -> f64 {
    p.iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|&(t, v)| v * (v / q(t)).ln())
        .sum()
}

/// `λ` converted to rationals for the exact measures.
pub fn rational_lambda(lambda: &[f64]) -> Result<Vec<Rational>> {
    lambda
        .iter()
        .map(|&l| {
            let r = rational::from_f64(l)?;
            if r <= Rational::zero() {
                return Err(Error::InvalidInput("weight underflowed to zero".into()));
            }
            Ok(r)
        })
        .collect()
}

/// Uniform weights, the reference measure `μ*` of the entropy program.
pub fn unit_lambda(m: usize) -> Vec<Rational> {
    vec![Rational::one(); m]
}

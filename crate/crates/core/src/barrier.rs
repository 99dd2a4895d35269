//! Barrier functions `Φ = ∂p/p` and `Ψ = ∂²p/p` evaluated exactly, probes
//! for the "above all roots" region, instance checks of the barrier lemmas
//! and a replay of the root-bound schedule on a concrete polynomial.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::SubsetDistribution;
use crate::rational::{self, Rational};
use crate::stablepoly::roots::SturmChain;
use crate::stablepoly::{MultiPoly, UnivariatePoly, VectorSystem, ZXPoly};

/// Slack used by every barrier inequality check.
pub const SLACK: f64 = 1e-10;

fn slack() -> Rational {
    rational::tol(SLACK)
}

/// `(Φ^i_p(z), Ψ^i_p(z))`, exact.
pub fn phi_psi(p: &MultiPoly, z: &[Rational], i: usize) -> Result<(Rational, Rational)> {
    let q = p.restrict_line(z, i)?;
    let at = q.coeff(0);
    if at.is_zero() {
        return Err(Error::AtRoot);
    }
    // q(s) = p(z + s e_i): q'(0) = c1, q''(0) = 2 c2
    Ok((q.coeff(1) / &at, q.coeff(2) * rational::int(2) / at))
}

/// Barrier values in every direction at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BarrierProbe {
    pub point: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub above_roots: bool,
}

pub fn probe(p: &MultiPoly, z: &[Rational], probes: usize, seed: u64) -> Result<BarrierProbe> {
    let mut phi = Vec::new();
    let mut psi = Vec::new();
    for i in 0..p.num_vars() {
        let (a, b) = phi_psi(p, z, i)?;
        phi.push(rational::to_f64(&a));
        psi.push(rational::to_f64(&b));
    }
    Ok(BarrierProbe {
        point: z.iter().map(rational::to_f64).collect(),
        phi,
        psi,
        above_roots: above_roots_probe(p, z, probes, seed),
    })
}

/// Ray lengths probed along each coordinate axis.
const RAY_MAGNITUDES: [(i64, i64); 3] = [(1, 4), (2, 1), (16, 1)];

/// One-sided test of `z ∈ Ab_p`: `p` must be positive at `z`, at `probes`
/// seeded random nonnegative offsets and along every coordinate ray at
/// three magnitudes. `false` certifies that `z` is not above the roots.
pub fn above_roots_probe(p: &MultiPoly, z: &[Rational], probes: usize, seed: u64) -> bool {
    let n = p.num_vars();
    let positive = |t: &[Rational]| {
        let pt: Vec<Rational> = z.iter().zip(t).map(|(a, b)| a + b).collect();
        p.eval(&pt).is_ok_and(|v| v.is_positive())
    };
    let zero = vec![Rational::zero(); n];
    if !positive(&zero) {
        return false;
    }
    for i in 0..n {
        for &(a, b) in &RAY_MAGNITUDES {
            let mut t = zero.clone();
            t[i] = rational::rat(a, b);
            if !positive(&t) {
                return false;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..probes {
        let scale = RAY_MAGNITUDES[rng.random_range(0..RAY_MAGNITUDES.len())];
        let t: Vec<Rational> = (0..n)
            .map(|_| rational::rat(rng.random_range(0..=64) * scale.0, 64 * scale.1))
            .collect();
        if !positive(&t) {
            return false;
        }
    }
    true
}

/// Outcome of checking the shift lemma at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftReport {
    /// `(2/δ)Φ^j + (Φ^j)²`
    pub hypothesis_lhs: f64,
    pub phi_before: Vec<f64>,
    pub phi_after: Vec<f64>,
    /// `Φ^i_{p−∂²_j p}(z + δe_j) ≤ Φ^i_p(z) + slack` for every `i`.
    pub phi_nonincreasing: bool,
    /// `z + δe_j` passed the above-roots probe for `p − ∂²_j p`.
    pub shifted_above_roots: bool,
}

impl ShiftReport {
    pub fn ok(&self) -> bool {
        self.phi_nonincreasing && self.shifted_above_roots
    }
}

fn above_or_fail(p: &MultiPoly, z: &[Rational], probes: usize, seed: u64) -> Result<()> {
    if !above_roots_probe(p, z, probes, seed) {
        return Err(Error::Precondition(
            "point is not above the roots of the polynomial".into(),
        ));
    }
    Ok(())
}

/// Checks that applying `1 − ∂²_{z_j}` and shifting coordinate `j` by
/// `delta` does not increase any barrier value, provided
/// `(2/δ)Φ^j_p(z) + Φ^j_p(z)² ≤ 1`.
pub fn shift_lemma_check(
    p: &MultiPoly,
    z: &[Rational],
    j: usize,
    delta: &Rational,
    probes: usize,
    seed: u64,
) -> Result<ShiftReport> {
    if !delta.is_positive() {
        return Err(Error::InvalidInput("delta must be positive".into()));
    }
    above_or_fail(p, z, probes, seed)?;
    let (phi_j, _) = phi_psi(p, z, j)?;
    let lhs = rational::int(2) / delta * &phi_j + &phi_j * &phi_j;
    if lhs > Rational::one() {
        return Err(Error::HypothesisNotMet {
            lhs: rational::to_f64(&lhs),
        });
    }
    let next = p.one_minus_d2(j);
    let mut shifted = z.to_vec();
    shifted[j] += delta;
    let mut before = Vec::new();
    let mut after = Vec::new();
    let mut nonincreasing = true;
    for i in 0..p.num_vars() {
        let (b, _) = phi_psi(p, z, i)?;
        let (a, _) = phi_psi(&next, &shifted, i)?;
        nonincreasing &= a <= &b + slack();
        before.push(rational::to_f64(&b));
        after.push(rational::to_f64(&a));
    }
    Ok(ShiftReport {
        hypothesis_lhs: rational::to_f64(&lhs),
        phi_before: before,
        phi_after: after,
        phi_nonincreasing: nonincreasing,
        shifted_above_roots: above_roots_probe(&next, &shifted, probes, seed),
    })
}

/// `(∂_iΨ^j_p(z), ∂_iΦ^j_p(z))`, exact.
pub fn barrier_partials(
    p: &MultiPoly,
    z: &[Rational],
    i: usize,
    j: usize,
) -> Result<(Rational, Rational)> {
    let v = p.eval(z)?;
    if v.is_zero() {
        return Err(Error::AtRoot);
    }
    let pi = p.partial(i);
    let pj = p.partial(j);
    let pjj = pj.partial(j);
    let pij = pi.partial(j);
    let pjji = pjj.partial(i);
    let (pi_z, pj_z, pjj_z) = (pi.eval(z)?, pj.eval(z)?, pjj.eval(z)?);
    let sq = &v * &v;
    let dpsi = (pjji.eval(z)? * &v - pjj_z * &pi_z) / &sq;
    let dphi = (pij.eval(z)? * &v - pi_z * pj_z) / sq;
    Ok((dpsi, dphi))
}

/// `∂_iΨ^j_p(z) / ∂_iΦ^j_p(z) ≤ 2Φ^j_p(z)` up to the slack.
pub fn ratio_lemma_check(p: &MultiPoly, z: &[Rational], i: usize, j: usize) -> Result<bool> {
    let (dpsi, dphi) = barrier_partials(p, z, i, j)?;
    if dphi.is_zero() {
        return Err(Error::DegenerateDirection);
    }
    let (phi_j, _) = phi_psi(p, z, j)?;
    Ok(dpsi / dphi <= phi_j * rational::int(2) + slack())
}

/// `Ψ^i ≤ (Φ^i)²` in every direction.
pub fn psi_phi_check(p: &MultiPoly, z: &[Rational]) -> Result<bool> {
    for i in 0..p.num_vars() {
        let (phi, psi) = phi_psi(p, z, i)?;
        if psi > &phi * &phi + slack() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Monotonicity `Φ^i(z + δe_j) ≤ Φ^i(z)` and convexity
/// `Φ^i(z + δe_j) ≤ Φ^i(z) + δ ∂_jΦ^i(z + δe_j)` for all `i, j`.
pub fn monotone_convex_check(p: &MultiPoly, z: &[Rational], delta: &Rational) -> Result<bool> {
    let n = p.num_vars();
    for j in 0..n {
        let mut shifted = z.to_vec();
        shifted[j] += delta;
        for i in 0..n {
            let (before, _) = phi_psi(p, z, i)?;
            let (after, _) = phi_psi(p, &shifted, i)?;
            if after > &before + slack() {
                return Ok(false);
            }
            // ∂_jΦ^i = ∂_iΦ^j, so barrier_partials(p, ·, j, i) gives it
            let (_, dphi) = barrier_partials(p, &shifted, j, i)?;
            if after > before + delta * dphi + slack() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Parameters of the root bound for given `ε₁`, `ε₂`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub eps1: f64,
    pub eps2: f64,
    pub eps: f64,
    pub t: f64,
    pub delta: f64,
    /// `ε / t`, zero when `t = 0`.
    pub phi: f64,
    /// `2√(2ε + ε²)`: bound on the largest root in `x`.
    pub x_root_bound: f64,
    /// `4ε + 2ε²`: bound on the spectral norm, the square of the above over 2.
    pub eigen_bound: f64,
}

impl BoundReport {
    /// `(2/δ)φ + φ² − 1`, or `None` when `t = 0`.
    pub fn invariant_residual(&self) -> Option<f64> {
        (self.t > 0.0).then(|| 2.0 / self.delta * self.phi + self.phi * self.phi - 1.0)
    }
}

pub fn bound_report(eps1: f64, eps2: f64) -> BoundReport {
    let eps = eps1 + eps2;
    let t = (2.0 * eps + eps * eps).sqrt();
    let phi = if t > 0.0 { eps / t } else { 0.0 };
    let report = BoundReport {
        eps1,
        eps2,
        eps,
        t,
        delta: t,
        phi,
        x_root_bound: 2.0 * t,
        eigen_bound: 4.0 * eps + 2.0 * eps * eps,
    };
    debug_assert!(report.invariant_residual().is_none_or(|r| r.abs() < 1e-12));
    report
}

/// `g_μ(y) · det(Σ y_i v_i v_iᵀ)`, built from the same expansions as the
/// operator side of the mixed polynomial.
pub fn barrier_polynomial(dist: &SubsetDistribution, vs: &VectorSystem) -> Result<MultiPoly> {
    if dist.ground_size() != vs.len() {
        return Err(Error::InvalidInput(
            "distribution and vectors differ in size".into(),
        ));
    }
    let g = MultiPoly::from_multi_affine(&dist.generating_poly());
    // at x = 0 only the full-rank terms of det(xI + Σ y_i v_i v_iᵀ) survive
    let det = ZXPoly::cauchy_binet_expand(vs.dim(), vs.vectors())?.eval_x(&Rational::zero());
    Ok(&g * &det)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplayStep {
    /// Coordinate the operator was applied to.
    pub coordinate: usize,
    pub point: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplayReport {
    pub eps1: f64,
    pub eps2: f64,
    pub t: f64,
    pub delta: f64,
    /// `ε / t`, the barrier ceiling.
    pub phi_bound: f64,
    pub start: BarrierProbe,
    pub steps: Vec<ReplayStep>,
    /// Every point stayed above the roots and every `Φ ≤ ε/t + slack`.
    pub all_ok: bool,
    /// `t + δ`
    pub final_point: f64,
    /// Largest root of the fully transformed polynomial on the diagonal.
    pub diagonal_root: Option<f64>,
    /// All roots on the diagonal lie strictly below `t + δ` (exact).
    pub ends_above_roots: bool,
}

/// Smallest dyadic `t` (denominator `2^40`) with `t² ≥ 2ε + ε²`.
fn rational_t(eps: &Rational) -> Result<Rational> {
    let target = eps * rational::int(2) + eps * eps;
    let step = rational::rat(1, 1 << 40);
    let mut t = rational::ceil_dyadic(rational::to_f64(&target).sqrt(), 40)?;
    while &t * &t < target {
        t += &step;
    }
    Ok(t)
}

/// Replays the root-bound schedule on `p = g_μ(y) det(Σ y_i v_i v_iᵀ)`:
/// start at `t𝟙` with `t = δ = √(2ε+ε²)` (rounded up to a dyadic
/// rational), then for each `k` apply `1 − ∂²_{y_k}` and shift `y_k` by
/// `δ`. Every intermediate point is probed and every barrier value is
/// compared with `ε/t`.
pub fn replay(
    dist: &SubsetDistribution,
    vs: &VectorSystem,
    probes: usize,
    seed: u64,
) -> Result<ReplayReport> {
    let eps1 = dist
        .marginals()?
        .into_iter()
        .fold(Rational::zero(), |a, b| if b > a { b } else { a });
    let eps2 = vs.eps2().clone();
    let eps = &eps1 + &eps2;
    if !eps.is_positive() {
        return Err(Error::UndefinedInput(
            "ε = 0 leaves no room for the schedule".into(),
        ));
    }
    let t = rational_t(&eps)?;
    let delta = t.clone();
    let phi_bound = &eps / &t + slack();
    let m = vs.len();
    let mut p = barrier_polynomial(dist, vs)?;
    let mut z = vec![t.clone(); m];
    let within = |p: &MultiPoly, z: &[Rational]| -> Result<(bool, Vec<f64>, Vec<f64>)> {
        let mut ok = true;
        let (mut phis, mut psis) = (Vec::new(), Vec::new());
        for i in 0..m {
            let (phi, psi) = phi_psi(p, z, i)?;
            ok &= phi <= phi_bound;
            phis.push(rational::to_f64(&phi));
            psis.push(rational::to_f64(&psi));
        }
        Ok((ok, phis, psis))
    };
    let start = probe(&p, &z, probes, seed)?;
    let (mut all_ok, _, _) = within(&p, &z)?;
    all_ok &= start.above_roots;
    let mut steps = Vec::new();
    for k in 0..m {
        p = p.one_minus_d2(k);
        z[k] += &delta;
        let above = above_roots_probe(&p, &z, probes, seed.wrapping_add(k as u64 + 1));
        let (ok, phi, psi) = match within(&p, &z) {
            Ok(v) => v,
            Err(Error::AtRoot) => (false, Vec::new(), Vec::new()),
            Err(e) => return Err(e),
        };
        all_ok &= ok && above;
        steps.push(ReplayStep {
            coordinate: k,
            point: z.iter().map(rational::to_f64).collect(),
            phi,
            psi,
            ok: ok && above,
        });
    }
    let diagonal = p.diagonal();
    let final_point = &t + &delta;
    Ok(ReplayReport {
        eps1: rational::to_f64(&eps1),
        eps2: rational::to_f64(&eps2),
        t: rational::to_f64(&t),
        delta: rational::to_f64(&delta),
        phi_bound: rational::to_f64(&(&eps / &t)),
        start,
        steps,
        all_ok,
        final_point: rational::to_f64(&final_point),
        diagonal_root: crate::stablepoly::roots::isolate_max_root(&diagonal)
            .map(|mut r| r.approximate(&rational::tol(1e-12))),
        ends_above_roots: roots_below(&diagonal, &final_point),
    })
}

/// Every real root of `p` is strictly less than `x`.
pub fn roots_below(p: &UnivariatePoly, x: &Rational) -> bool {
    if p.is_zero() || p.eval(x).is_zero() {
        return false;
    }
    let bound = p.cauchy_bound();
    x >= &bound || SturmChain::new(p).count_in(x, &bound) == 0
}

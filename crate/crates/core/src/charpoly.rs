//! Mixed characteristic polynomials of a homogeneous measure and a vector
//! system, computed three independent ways, and the interlacing-family
//! descent that extracts a subset with small spectral norm.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use crate::barrier::bound_report;
use crate::error::{Error, Result};
use crate::measures::{self, SubsetDistribution};
use crate::rational::{self, Rational};
use crate::stablepoly::matrix::for_each_k_subset;
use crate::stablepoly::multiaffine::{indices_of, mask_of};
use crate::stablepoly::roots::{compare_isolated, isolate_max_root, RealRoot};
use crate::stablepoly::{char_poly_x2, is_real_rooted, UnivariatePoly, VectorSystem, ZXPoly};

/// Root approximations are reported to this accuracy.
const ROOT_TOL: f64 = 1e-12;

/// `E_{S∼μ} χ[Σ_{i∈S} 2 v_i v_iᵀ](x²)`, a polynomial of degree `2d`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedCharPoly {
    pub poly: UnivariatePoly,
    pub d_mu: usize,
    pub d: usize,
    /// Largest real root, if any.
    pub max_root: Option<f64>,
}

impl MixedCharPoly {
    fn new(poly: UnivariatePoly, d_mu: usize, d: usize) -> Self {
        let max_root = largest_root(&poly);
        MixedCharPoly {
            poly,
            d_mu,
            d,
            max_root,
        }
    }

    pub fn is_real_rooted(&self) -> Result<bool> {
        is_real_rooted(&self.poly)
    }

    /// True when only even powers of `x` occur.
    pub fn is_even(&self) -> bool {
        self.poly.is_even()
    }
}

fn largest_root(p: &UnivariatePoly) -> Option<f64> {
    approximate(isolate_max_root(p).as_ref())
}

fn approximate(r: Option<&RealRoot>) -> Option<f64> {
    r.map(|r| r.clone().approximate(&rational::tol(ROOT_TOL)))
}

fn check_inputs(dist: &SubsetDistribution, vs: &VectorSystem) -> Result<usize> {
    if dist.ground_size() != vs.len() {
        return Err(Error::InvalidInput(format!(
            "distribution has ground set of size {}, but there are {} vectors",
            dist.ground_size(),
            vs.len()
        )));
    }
    dist.homogeneous_degree()
        .ok_or_else(|| Error::Precondition("distribution is not homogeneous".into()))
}

/// `μ(S) · χ[Σ_{i∈S} 2 v_i v_iᵀ](x²)`
pub fn subset_poly(vs: &VectorSystem, set: u64, mass: &Rational) -> UnivariatePoly {
    let m = vs.sum_outer(set).scale(&rational::int(2));
    char_poly_x2(&m)
        .expect("sum of outer products is symmetric")
        .scale(mass)
}

/// Mixed polynomial by enumerating the support.
pub fn mixed_enum(dist: &SubsetDistribution, vs: &VectorSystem) -> Result<MixedCharPoly> {
    let d_mu = check_inputs(dist, vs)?;
    let poly = dist
        .support()
        .iter()
        .map(|(&s, p)| subset_poly(vs, s, p))
        .sum();
    Ok(MixedCharPoly::new(poly, d_mu, vs.dim()))
}

/// `Π_i (1 − ∂²_{z_i}) (g_μ(x𝟙 + z) · det(xI + Σ z_i v_i v_iᵀ)) |_{z=0}`,
/// a polynomial of degree `d_μ + d`.
pub fn operator_side(dist: &SubsetDistribution, vs: &VectorSystem) -> Result<UnivariatePoly> {
    check_inputs(dist, vs)?;
    let shifted = ZXPoly::shift_diagonal(&dist.generating_poly());
    let det = ZXPoly::cauchy_binet_expand(vs.dim(), vs.vectors())?;
    let mut q = shifted.mul(&det)?;
    for i in 0..vs.len() {
        // z_i is not touched again, so its positive powers can be dropped now
        q = q.apply_one_minus_dzz(i)?.set_zero(i);
    }
    Ok(q.restrict_zero())
}

/// `Σ_k (−1)^k 2^k x^{d_μ+d−2k} Σ_{|S|=k} P[S ⊆ T] σ_k(Σ_{i∈S} v_i v_iᵀ)`
pub fn closed_form_side(dist: &SubsetDistribution, vs: &VectorSystem) -> Result<UnivariatePoly> {
    let d_mu = check_inputs(dist, vs)?;
    let d = vs.dim();
    let mut coeffs = vec![Rational::zero(); d_mu + d + 1];
    for k in 0..=d.min(d_mu) {
        let mut inner = Rational::zero();
        for_each_k_subset(vs.len(), k, |idx| {
            let s = mask_of(idx);
            let p = dist.containment(s);
            if !p.is_zero() {
                inner += p * vs.sum_outer(s).sigma(k);
            }
        });
        let sign = if k % 2 == 0 { 1 } else { -1 };
        coeffs[d_mu + d - 2 * k] += inner * rational::int(sign) * rational::int(1 << k);
    }
    Ok(UnivariatePoly::new(coeffs))
}

/// Removes the `x^{d_μ−d}` factor from an operator-side polynomial, or
/// multiplies by `x^{d−d_μ}` when `d_μ < d`.
pub fn align(q: &UnivariatePoly, d_mu: usize, d: usize) -> Result<UnivariatePoly> {
    if d_mu >= d {
        q.shift_down(d_mu - d).ok_or_else(|| {
            Error::InternalConsistency(format!("operator side is not divisible by x^{}", d_mu - d))
        })
    } else {
        Ok(q.shift_up(d - d_mu))
    }
}

fn expect_equal(name: &str, got: &UnivariatePoly, want: &UnivariatePoly) -> Result<()> {
    if got != want {
        return Err(Error::InternalConsistency(format!(
            "{name} gives {got}, enumeration gives {want}"
        )));
    }
    Ok(())
}

/// Mixed polynomial from the differential-operator expression, checked
/// exactly against the enumeration.
pub fn mixed_operator(dist: &SubsetDistribution, vs: &VectorSystem) -> Result<MixedCharPoly> {
    let reference = mixed_enum(dist, vs)?;
    let poly = align(&operator_side(dist, vs)?, reference.d_mu, reference.d)?;
    expect_equal("operator identity", &poly, &reference.poly)?;
    Ok(MixedCharPoly::new(poly, reference.d_mu, reference.d))
}

/// Mixed polynomial from the principal-minor closed form, checked exactly
/// against the enumeration.
pub fn mixed_closed_form(dist: &SubsetDistribution, vs: &VectorSystem) -> Result<MixedCharPoly> {
    let reference = mixed_enum(dist, vs)?;
    let poly = align(&closed_form_side(dist, vs)?, reference.d_mu, reference.d)?;
    expect_equal("closed form", &poly, &reference.poly)?;
    Ok(MixedCharPoly::new(poly, reference.d_mu, reference.d))
}

/// One element of the descent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DescentStep {
    pub element: usize,
    pub bit: u8,
    /// One branch was empty, so the choice was forced.
    pub forced: bool,
    pub parent_root: Option<f64>,
    pub root0: Option<f64>,
    pub root1: Option<f64>,
    /// `parent = f_{…,0} + f_{…,1}` held exactly.
    pub decomposition_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DescentTrace {
    pub steps: Vec<DescentStep>,
    pub set: Vec<usize>,
    #[serde(skip)]
    pub mask: u64,
    /// Largest root of the mixed polynomial `f_∅`.
    pub root_start: Option<f64>,
    /// Largest root of `q_S` for the returned set.
    pub root_end: Option<f64>,
}

/// Interlacing-family descent over elements `0..m`.
///
/// `q_S = μ(S) χ[Σ_{i∈S} 2 v_i v_iᵀ](x²)` and each node polynomial is the
/// sum of `q_S` over the sets consistent with the assignments so far. At
/// each element the branch whose largest root does not exceed the
/// parent's is taken, preferring exclusion; roots are compared exactly.
pub fn descend_with_trace(
    dist: &SubsetDistribution,
    vs: &VectorSystem,
    tol: f64,
) -> Result<DescentTrace> {
    check_inputs(dist, vs)?;
    let q: BTreeMap<u64, UnivariatePoly> = dist
        .support()
        .iter()
        .map(|(&s, p)| (s, subset_poly(vs, s, p)))
        .collect();
    let mut alive: Vec<u64> = q.keys().cloned().collect();
    let mut parent: UnivariatePoly = q.values().cloned().sum();
    let mut parent_iso = isolate_max_root(&parent);
    let root_start = approximate(parent_iso.as_ref());
    let mut steps = Vec::new();
    for i in 0..vs.len() {
        let (with, without): (Vec<u64>, Vec<u64>) = alive.iter().partition(|&&s| s >> i & 1 == 1);
        if with.is_empty() || without.is_empty() {
            let bit = u8::from(without.is_empty());
            steps.push(DescentStep {
                element: i,
                bit,
                forced: true,
                parent_root: None,
                root0: None,
                root1: None,
                decomposition_ok: true,
            });
            continue;
        }
        let f0: UnivariatePoly = without.iter().map(|s| q[s].clone()).sum();
        let f1: UnivariatePoly = with.iter().map(|s| q[s].clone()).sum();
        let decomposition_ok = &f0 + &f1 == parent;
        if !decomposition_ok {
            return Err(Error::InternalConsistency(format!(
                "branch sums at element {i} do not add up"
            )));
        }
        let (iso0, iso1) = (isolate_max_root(&f0), isolate_max_root(&f1));
        let (r0, r1, rp) = (
            approximate(iso0.as_ref()),
            approximate(iso1.as_ref()),
            approximate(parent_iso.as_ref()),
        );
        let bit = if compare_isolated(iso0.as_ref(), parent_iso.as_ref()) != Ordering::Greater {
            0
        } else if compare_isolated(iso1.as_ref(), parent_iso.as_ref()) != Ordering::Greater {
            1
        } else {
            let within = |r: Option<f64>| match (r, rp) {
                (Some(a), Some(b)) => a <= b + tol,
                (None, _) => true,
                (Some(_), None) => false,
            };
            if within(r0) {
                0
            } else if within(r1) {
                1
            } else {
                return Err(Error::NumericalFailure(format!(
                    "at element {i} both branch roots ({r0:?}, {r1:?}) exceed the parent root {rp:?}"
                )));
            }
        };
        steps.push(DescentStep {
            element: i,
            bit,
            forced: false,
            parent_root: rp,
            root0: r0,
            root1: r1,
            decomposition_ok,
        });
        let (keep, poly, iso) = if bit == 0 {
            (without, f0, iso0)
        } else {
            (with, f1, iso1)
        };
        alive = keep;
        parent = poly;
        parent_iso = iso;
    }
    let [mask] = alive[..] else {
        return Err(Error::InternalConsistency(
            "descent did not isolate a single set".into(),
        ));
    };
    Ok(DescentTrace {
        steps,
        set: indices_of(mask),
        mask,
        root_start,
        root_end: largest_root(&q[&mask]),
    })
}

/// Result of a descent: the chosen set and the quantities in the bound
/// `‖Σ_{i∈S} v_i v_iᵀ‖ ≤ 4ε + 2ε²`, `ε = ε₁ + ε₂`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsetCertificate {
    pub set: Vec<usize>,
    #[serde(skip)]
    pub mask: u64,
    pub spectral_norm: f64,
    /// Largest root of the mixed polynomial.
    pub mixed_root: f64,
    /// `4ε + 2ε²`
    pub bound: f64,
    /// Largest marginal.
    pub eps1: f64,
    /// Largest squared norm.
    pub eps2: f64,
    /// `2√(2ε + ε²)`, the bound on `mixed_root`.
    pub barrier_bound: f64,
}

pub fn descend(
    dist: &SubsetDistribution,
    vs: &VectorSystem,
    tol: f64,
) -> Result<SubsetCertificate> {
    let trace = descend_with_trace(dist, vs, tol)?;
    if dist.prob(trace.mask).is_zero() {
        return Err(Error::InternalConsistency(
            "descent returned a null set".into(),
        ));
    }
    let eps1 = dist
        .marginals()?
        .iter()
        .map(rational::to_f64)
        .fold(0.0, f64::max);
    let eps2 = rational::to_f64(vs.eps2());
    let report = bound_report(eps1, eps2);
    Ok(SubsetCertificate {
        set: trace.set,
        mask: trace.mask,
        spectral_norm: vs.spectral_norm(trace.mask),
        mixed_root: trace.root_start.unwrap_or(0.0),
        bound: report.eigen_bound,
        eps1,
        eps2,
        barrier_bound: report.x_root_bound,
    })
}

/// Tolerance on `Σ v_i v_iᵀ = I` for the certificate.
pub const ISOTROPY_TOL: f64 = 1e-10;

/// Descent plus verification of both bounds for an isotropic system.
pub fn main_certificate(
    dist: &SubsetDistribution,
    vs: &VectorSystem,
    tol: f64,
) -> Result<SubsetCertificate> {
    check_inputs(dist, vs)?;
    let defect = vs.isotropy_defect();
    if defect > ISOTROPY_TOL {
        return Err(Error::Precondition(format!(
            "vectors are not in isotropic position (max deviation {defect:.3e})"
        )));
    }
    let cert = descend(dist, vs, tol)?;
    if cert.spectral_norm > cert.bound + tol {
        return Err(Error::BoundViolated(format!(
            "spectral norm {} exceeds 4ε+2ε² = {}",
            cert.spectral_norm, cert.bound
        )));
    }
    if cert.mixed_root > cert.barrier_bound + tol {
        return Err(Error::BoundViolated(format!(
            "mixed root {} exceeds 2√(2ε+ε²) = {}",
            cert.mixed_root, cert.barrier_bound
        )));
    }
    Ok(cert)
}

/// Partition of `0..m` into `r` parts from the lifted descent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsrPartition {
    pub parts: Vec<Vec<usize>>,
    pub norms: Vec<f64>,
    /// Largest squared norm `ε`.
    pub eps: f64,
    /// `4(1/r + ε) + 2(1/r + ε)²`
    pub bound: f64,
    pub mixed_root: f64,
}

/// Splits an isotropic system into `r` parts with small spectral norms by
/// descending on the lifted vectors `w_{i,j}` under the product measure
/// that picks one `j` per `i` uniformly.
pub fn ksr_partition(vs: &VectorSystem, r: usize, tol: f64, budget: u64) -> Result<KsrPartition> {
    if r < 2 {
        return Err(Error::InvalidInput("r must be at least 2".into()));
    }
    let defect = vs.isotropy_defect();
    if defect > ISOTROPY_TOL {
        return Err(Error::Precondition(format!(
            "vectors are not in isotropic position (max deviation {defect:.3e})"
        )));
    }
    let m = vs.len();
    let dist = measures::product_lift(m, r, budget)?;
    let lifted = vs.lift(r)?;
    let trace = descend_with_trace(&dist, &lifted, tol)?;
    let mut parts = vec![Vec::new(); r];
    for &k in &trace.set {
        parts[k % r].push(k / r);
    }
    let norms: Vec<f64> = parts.iter().map(|p| vs.spectral_norm(mask_of(p))).collect();
    let eps = rational::to_f64(vs.eps2());
    let a = 1.0 / r as f64 + eps;
    let bound = 4.0 * a + 2.0 * a * a;
    if let Some(worst) = norms.iter().cloned().find(|&n| n > bound + tol) {
        return Err(Error::BoundViolated(format!(
            "part norm {worst} exceeds {bound}"
        )));
    }
    Ok(KsrPartition {
        parts,
        norms,
        eps,
        bound,
        mixed_root: trace.root_start.unwrap_or(0.0),
    })
}

/// True if the descent's chosen branch never had a larger root than its
/// parent (exact comparison on the recorded roots within `tol`).
pub fn trace_is_monotone(trace: &DescentTrace, tol: f64) -> bool {
    trace.steps.iter().filter(|s| !s.forced).all(|s| {
        let chosen = if s.bit == 0 { s.root0 } else { s.root1 };
        match (chosen, s.parent_root) {
            (Some(c), Some(p)) => c <= p + tol,
            (None, _) => true,
            (Some(_), None) => false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphlab::WeightedGraph;
    use crate::rational::{int, rat};

    fn pair() -> (SubsetDistribution, VectorSystem) {
        (
            SubsetDistribution::uniform(2, &[0b01, 0b10]).unwrap(),
            VectorSystem::from_ints(1, &[&[1], &[1]]).unwrap(),
        )
    }

    fn x2_minus_2() -> UnivariatePoly {
        UnivariatePoly::from_ints(&[-2, 0, 1])
    }

    #[test]
    fn pair_three_ways() {
        let (d, v) = pair();
        assert_eq!(mixed_enum(&d, &v).unwrap().poly, x2_minus_2());
        assert_eq!(mixed_operator(&d, &v).unwrap().poly, x2_minus_2());
        assert_eq!(mixed_closed_form(&d, &v).unwrap().poly, x2_minus_2());
    }

    #[test]
    fn point_masses() {
        let single = SubsetDistribution::point_mass(1, 0b1).unwrap();
        let v = VectorSystem::from_ints(1, &[&[1]]).unwrap();
        assert_eq!(mixed_operator(&single, &v).unwrap().poly, x2_minus_2());
        let both = SubsetDistribution::point_mass(2, 0b11).unwrap();
        let e = VectorSystem::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap();
        let sq = &x2_minus_2() * &x2_minus_2();
        assert_eq!(mixed_enum(&both, &e).unwrap().poly, sq);
        assert_eq!(mixed_closed_form(&both, &e).unwrap().poly, sq);
        assert_eq!(mixed_operator(&both, &e).unwrap().poly, sq);
    }

    #[test]
    fn triangle_agreement_and_descent() {
        let g = WeightedGraph::complete(3);
        let dist = measures::lambda_tree_distribution(&g, &[int(1), int(1), int(1)], 100).unwrap();
        let vs = g.reduced_incidence().unwrap();
        let e = mixed_enum(&dist, &vs).unwrap();
        assert_eq!(e.poly.degree(), Some(4));
        assert!(e.is_even());
        assert!(e.is_real_rooted().unwrap());
        assert_eq!(mixed_operator(&dist, &vs).unwrap().poly, e.poly);
        assert_eq!(mixed_closed_form(&dist, &vs).unwrap().poly, e.poly);
        let cert = descend(&dist, &vs, 1e-9).unwrap();
        assert!(g.is_spanning_tree(cert.mask));
        assert!(cert.spectral_norm <= cert.mixed_root.powi(2) / 2.0 + 1e-9);
    }

    #[test]
    fn non_homogeneous_is_rejected() {
        let d = SubsetDistribution::uniform(2, &[0b01, 0b11]).unwrap();
        let v = VectorSystem::from_ints(1, &[&[1], &[1]]).unwrap();
        assert!(matches!(mixed_enum(&d, &v), Err(Error::Precondition(_))));
    }

    #[test]
    fn pair_descent_prefers_exclusion() {
        let (d, v) = pair();
        let trace = descend_with_trace(&d, &v, 1e-9).unwrap();
        // excluding element 0 leaves {1}, which ties with the parent root √2
        assert_eq!(trace.set, vec![1]);
        assert!(trace_is_monotone(&trace, 1e-9));
        let cert = descend(&d, &v, 1e-9).unwrap();
        assert!((cert.mixed_root - 2f64.sqrt()).abs() < 1e-9);
        assert!((cert.spectral_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn padded_pair_certificate() {
        let d = SubsetDistribution::uniform(2, &[0b01, 0b10]).unwrap();
        let v = VectorSystem::from_ints(2, &[&[1, 0], &[0, 1]]).unwrap();
        let cert = main_certificate(&d, &v, 1e-9).unwrap();
        assert_eq!(cert.eps1, 0.5);
        assert_eq!(cert.eps2, 1.0);
        assert!((cert.bound - 10.5).abs() < 1e-12);
        assert!((cert.spectral_norm - 1.0).abs() < 1e-12);
        let (pd, pv) = pair();
        assert!(matches!(
            main_certificate(&pd, &pv, 1e-9),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn ksr_on_rotated_pairs() {
        let h = rat(1, 2);
        let vs = VectorSystem::new(
            2,
            vec![
                vec![h.clone(), h.clone()],
                vec![h.clone(), h.clone()],
                vec![h.clone(), -h.clone()],
                vec![h.clone(), -h.clone()],
            ],
        )
        .unwrap();
        let part = ksr_partition(&vs, 2, 1e-9, 1000).unwrap();
        assert_eq!(part.parts.iter().map(Vec::len).sum::<usize>(), 4);
        for n in &part.norms {
            assert!((n - 0.5).abs() < 1e-9, "norms {:?}", part.norms);
        }
        assert!((part.bound - 6.0).abs() < 1e-12);
    }

    #[test]
    fn ksr_single_vector() {
        let vs = VectorSystem::from_ints(1, &[&[1]]).unwrap();
        let part = ksr_partition(&vs, 2, 1e-9, 100).unwrap();
        let mut norms = part.norms.clone();
        norms.sort_by(f64::total_cmp);
        assert_eq!(norms, vec![0.0, 1.0]);
    }
}

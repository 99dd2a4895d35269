//! Real-root tooling over the rationals: Sturm chains, isolating intervals,
//! exact comparison of real algebraic roots, real-rootedness and
//! interlacing tests.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::univariate::UnivariatePoly;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Positive multiple of a polynomial with integer coefficients, for
/// gcd-free sign evaluation.
#[derive(Clone, Debug)]
struct IntPoly(Vec<BigInt>);

impl IntPoly {
    fn new(p: &UnivariatePoly) -> Self {
        let lcm = p
            .coeffs()
            .iter()
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        IntPoly(
            p.coeffs()
                .iter()
                .map(|c| c.numer() * (&lcm / c.denom()))
                .collect(),
        )
    }

    /// Sign of `p(n/d)` as `Σ c_i n^i d^{deg−i}`, with `d > 0`.
    fn sign_at(&self, x: &Rational) -> i8 {
        let (n, d) = (x.numer(), x.denom());
        let mut acc = BigInt::zero();
        let mut dpow = BigInt::one();
        for c in self.0.iter().rev() {
            acc = acc * n + c * &dpow;
            dpow *= d;
        }
        acc.sign_i8()
    }
}

trait SignI8 {
    fn sign_i8(&self) -> i8;
}

impl SignI8 for BigInt {
    fn sign_i8(&self) -> i8 {
        if self.is_zero() {
            0
        } else if self.is_positive() {
            1
        } else {
            -1
        }
    }
}

/// Sturm sequence of a square-free polynomial.
#[derive(Clone, Debug)]
pub struct SturmChain {
    chain: Vec<UnivariatePoly>,
    ints: Vec<IntPoly>,
}

impl SturmChain {
    /// Builds the chain of `p`; `p` is reduced to its square-free part first.
    pub fn new(p: &UnivariatePoly) -> Self {
        let p0 = p.square_free();
        if p0.degree().unwrap_or(0) == 0 {
            return SturmChain::from_chain(vec![p0]);
        }
        let mut chain = vec![p0.clone(), p0.derivative()];
        loop {
            let n = chain.len();
            let r = chain[n - 2].div_rem(&chain[n - 1]).1;
            if r.is_zero() {
                break;
            }
            // positive rescaling keeps signs and tames coefficient growth
            let lc = r.leading().unwrap().abs();
            chain.push(-&r.scale(&lc.recip()));
        }
        SturmChain::from_chain(chain)
    }

    fn from_chain(chain: Vec<UnivariatePoly>) -> Self {
        let ints = chain.iter().map(IntPoly::new).collect();
        SturmChain { chain, ints }
    }

    /// Sign of the square-free part at `x`.
    fn sign_at(&self, x: &Rational) -> i8 {
        self.ints[0].sign_at(x)
    }

    pub fn poly(&self) -> &UnivariatePoly {
        &self.chain[0]
    }

    fn sign_changes(signs: impl Iterator<Item = i8>) -> usize {
        let mut last = 0i8;
        let mut changes = 0;
        for s in signs.filter(|&s| s != 0) {
            if last != 0 && s != last {
                changes += 1;
            }
            last = s;
        }
        changes
    }

    fn sign(x: &Rational) -> i8 {
        if x.is_zero() {
            0
        } else if x.is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn changes_at(&self, x: &Rational) -> usize {
        Self::sign_changes(self.ints.iter().map(|p| p.sign_at(x)))
    }

    fn changes_at_infinity(&self, positive: bool) -> usize {
        Self::sign_changes(self.chain.iter().map(|p| {
            let s = p.leading().map(Self::sign).unwrap_or(0);
            let odd = p.degree().unwrap_or(0) % 2 == 1;
            if !positive && odd {
                -s
            } else {
                s
            }
        }))
    }

    /// Number of distinct real roots in `(a, b]`.
    pub fn count_in(&self, a: &Rational, b: &Rational) -> usize {
        if a >= b {
            return 0;
        }
        self.changes_at(a).saturating_sub(self.changes_at(b))
    }

    /// Number of distinct real roots.
    pub fn count_real(&self) -> usize {
        self.changes_at_infinity(false)
            .saturating_sub(self.changes_at_infinity(true))
    }
}

/// A real root of a square-free polynomial, located as the unique root of
/// that polynomial in the half-open interval `(lo, hi]`.
#[derive(Clone, Debug)]
pub struct RealRoot {
    sturm: SturmChain,
    lo: Rational,
    hi: Rational,
}

impl RealRoot {
    pub fn interval(&self) -> (&Rational, &Rational) {
        (&self.lo, &self.hi)
    }

    pub fn poly(&self) -> &UnivariatePoly {
        self.sturm.poly()
    }

    /// Halves the isolating interval.
    pub fn refine(&mut self) {
        if self.sturm.sign_at(&self.hi) == 0 {
            // exact rational root: collapse onto it
            self.lo = self.hi.clone() - (self.hi.clone() - self.lo.clone()) / rational::int(2);
            return;
        }
        let mid = (&self.lo + &self.hi) / rational::int(2);
        // the root is simple, so away from other roots a sign change locates it
        let at_lo = self.sturm.sign_at(&self.lo);
        let left = if at_lo == 0 {
            self.sturm.count_in(&self.lo, &mid) == 1
        } else {
            let at_mid = self.sturm.sign_at(&mid);
            at_mid == 0 || at_mid != at_lo
        };
        if left {
            self.hi = mid;
        } else {
            self.lo = mid;
        }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// Refines until the interval is at most `tol` wide and returns a float
    /// within `tol` of the root (exact when the root is a dyadic endpoint).
    pub fn approximate(&mut self, tol: &Rational) -> f64 {
        if self.sturm.sign_at(&self.hi) == 0 {
            return rational::to_f64(&self.hi);
        }
        while &self.width() > tol {
            self.refine();
            if self.sturm.sign_at(&self.hi) == 0 {
                return rational::to_f64(&self.hi);
            }
        }
        rational::to_f64(&((&self.lo + &self.hi) / rational::int(2)))
    }

    /// Exact comparison of two real algebraic numbers.
    pub fn compare(&self, other: &RealRoot) -> Ordering {
        let mut a = self.clone();
        let mut b = other.clone();
        // Equality: a common root of both polynomials inside the overlap of
        // the two isolating intervals is necessarily both roots.
        let lo = if a.lo > b.lo { &a.lo } else { &b.lo };
        let hi = if a.hi < b.hi { &a.hi } else { &b.hi };
        if lo < hi {
            let h = a.poly().gcd(b.poly());
            if h.degree().unwrap_or(0) > 0 && SturmChain::new(&h).count_in(lo, hi) > 0 {
                return Ordering::Equal;
            }
        }
        loop {
            if a.hi <= b.lo {
                return Ordering::Less;
            }
            if b.hi <= a.lo {
                return Ordering::Greater;
            }
            if a.width() >= b.width() {
                a.refine();
            } else {
                b.refine();
            }
        }
    }
}

fn isolate_in(sturm: &SturmChain, lo: Rational, hi: Rational, out: &mut Vec<RealRoot>) {
    match sturm.count_in(&lo, &hi) {
        0 => {}
        1 => out.push(RealRoot {
            sturm: sturm.clone(),
            lo,
            hi,
        }),
        _ => {
            let mid = (&lo + &hi) / rational::int(2);
            isolate_in(sturm, lo, mid.clone(), out);
            isolate_in(sturm, mid, hi, out);
        }
    }
}

/// Distinct real roots of `p`, ascending, each with an isolating interval.
pub fn isolate_real_roots(p: &UnivariatePoly) -> Vec<RealRoot> {
    if p.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let sturm = SturmChain::new(p);
    let bound = sturm.poly().cauchy_bound();
    let mut out = Vec::new();
    isolate_in(&sturm, -bound.clone(), bound, &mut out);
    out
}

/// Largest real root of `p` (any polynomial), or `None` if it has no real root.
pub fn isolate_max_root(p: &UnivariatePoly) -> Option<RealRoot> {
    if p.degree().unwrap_or(0) == 0 {
        return None;
    }
    let sturm = SturmChain::new(p);
    let bound = sturm.poly().cauchy_bound();
    let mut lo = -bound.clone();
    let hi = bound;
    if sturm.count_in(&lo, &hi) == 0 {
        return None;
    }
    let mut hi = hi;
    while sturm.count_in(&lo, &hi) > 1 {
        let mid = (&lo + &hi) / rational::int(2);
        if sturm.count_in(&mid, &hi) >= 1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(RealRoot { sturm, lo, hi })
}

/// Compares the largest real roots of two polynomials exactly. A polynomial
/// without real roots compares below every polynomial that has one.
pub fn compare_max_roots(f: &UnivariatePoly, g: &UnivariatePoly) -> Ordering {
    compare_isolated(isolate_max_root(f).as_ref(), isolate_max_root(g).as_ref())
}

/// [`compare_max_roots`] on already isolated largest roots.
pub fn compare_isolated(a: Option<&RealRoot>, b: Option<&RealRoot>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(a), Some(b)) => a.compare(b),
    }
}

/// True iff every complex root of `p` is real.
pub fn is_real_rooted(p: &UnivariatePoly) -> Result<bool> {
    p.require_nonzero()?;
    let sturm = SturmChain::new(p);
    let degree = sturm.poly().degree().unwrap_or(0);
    Ok(sturm.count_real() == degree)
}

/// Largest root of a real-rooted polynomial, within `tol`.
pub fn max_real_root(p: &UnivariatePoly, tol: f64) -> Result<f64> {
    p.require_nonzero()?;
    if !is_real_rooted(p)? {
        return Err(Error::Precondition("polynomial is not real-rooted".into()));
    }
    let mut root = isolate_max_root(p)
        .ok_or_else(|| Error::UndefinedInput("constant polynomial has no roots".into()))?;
    Ok(root.approximate(&rational::tol(tol)))
}

/// All real roots counted with multiplicity, ascending.
pub fn real_roots_with_multiplicity(p: &UnivariatePoly) -> Vec<RealRoot> {
    let mut roots: Vec<(RealRoot, usize)> = Vec::new();
    for (mult, factor) in p.square_free_factors() {
        for r in isolate_real_roots(&factor) {
            roots.push((r, mult));
        }
    }
    roots.sort_by(|a, b| a.0.compare(&b.0));
    roots
        .into_iter()
        .flat_map(|(r, m)| std::iter::repeat_n(r, m))
        .collect()
}

fn require_real_rooted_positive(p: &UnivariatePoly, name: &str) -> Result<()> {
    if !is_real_rooted(p)? {
        return Err(Error::Precondition(format!("{name} is not real-rooted")));
    }
    if !p.leading().is_some_and(|c| c.is_positive()) {
        return Err(Error::Precondition(format!(
            "{name} must have a positive leading coefficient"
        )));
    }
    Ok(())
}

/// Does `g` interlace `f`? Roots `a_1..a_{n-1}` of `g` and `b_1..b_n` of `f`
/// must satisfy `b_1 <= a_1 <= b_2 <= ... <= a_{n-1} <= b_n`; shared roots
/// are allowed. All comparisons are exact.
pub fn is_interlacing(g: &UnivariatePoly, f: &UnivariatePoly) -> Result<bool> {
    g.require_nonzero()?;
    f.require_nonzero()?;
    let (dg, df) = (g.degree().unwrap(), f.degree().unwrap());
    if dg + 1 != df {
        return Err(Error::DegreeMismatch(format!(
            "interlacer has degree {dg}, expected {}",
            df.saturating_sub(1)
        )));
    }
    require_real_rooted_positive(g, "g")?;
    require_real_rooted_positive(f, "f")?;
    let alphas = real_roots_with_multiplicity(g);
    let betas = real_roots_with_multiplicity(f);
    Ok(alphas.iter().enumerate().all(|(i, a)| {
        betas[i].compare(a) != Ordering::Greater && a.compare(&betas[i + 1]) != Ordering::Greater
    }))
}

/// Sampled falsifier for a common interlacing: checks that convex
/// combinations of the polynomials are real-rooted. Every pair is tested at
/// `lambda = j / grid`, plus the uniform average of all of them. `false` is
/// a certificate that no common interlacing exists; `true` only means no
/// counterexample was found.
pub fn common_interlacing_test(polys: &[UnivariatePoly], grid: usize) -> Result<bool> {
    let first = polys
        .first()
        .ok_or_else(|| Error::InvalidInput("empty polynomial list".into()))?;
    first.require_nonzero()?;
    let degree = first.degree();
    for p in polys {
        p.require_nonzero()?;
        if p.degree() != degree {
            return Err(Error::DegreeMismatch(
                "polynomials must share a degree".into(),
            ));
        }
        if !p.leading().unwrap().is_positive() {
            return Err(Error::Precondition(
                "leading coefficients must be positive".into(),
            ));
        }
        if !is_real_rooted(p)? {
            return Ok(false);
        }
    }
    let grid = grid.max(1);
    for (i, a) in polys.iter().enumerate() {
        for b in &polys[i + 1..] {
            for j in 1..grid {
                let lambda = rational::rat(j as i64, grid as i64);
                let mix = &a.scale(&(Rational::one() - &lambda)) + &b.scale(&lambda);
                if !is_real_rooted(&mix)? {
                    return Ok(false);
                }
            }
        }
    }
    if polys.len() > 2 {
        let avg: UnivariatePoly = polys.iter().cloned().sum();
        if !is_real_rooted(&avg)? {
            return Ok(false);
        }
    }
    Ok(true)
}

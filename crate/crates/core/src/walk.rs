//! Closed forms behind the star and expander arguments.
//!
//! The gambler's-ruin probability and the birth-death solver work over any
//! [`Scalar`], so they can be checked exactly with rationals; everything that
//! needs roots, logarithms or exponentials is generic over [`Real`]. Bounds that
//! can overflow are evaluated in log space.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::{frac, lit, powi, Real, Scalar};
use crate::stats::Estimate;

/// Biased walk started `lower_gap` above a lower barrier and `upper_gap`
/// below an upper barrier, stepping up with probability `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSpec<T> {
    p: T,
    lower_gap: u32,
    upper_gap: u32,
}

impl<T: Scalar> WalkSpec<T> {
    pub fn new(p: T, lower_gap: u32, upper_gap: u32) -> Result<Self> {
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::invalid(format!("up-probability must lie in (0, 1), got {p:?}")));
        }
        if lower_gap == 0 || upper_gap == 0 {
            return Err(Error::invalid("barrier distances must be at least 1"));
        }
        Ok(WalkSpec {
            p,
            lower_gap,
            upper_gap,
        })
    }

    pub fn p(&self) -> &T {
        &self.p
    }

    pub fn lower_gap(&self) -> u32 {
        self.lower_gap
    }

    pub fn upper_gap(&self) -> u32 {
        self.upper_gap
    }

    pub fn absorption_oracle(&self) -> Result<Absorption<T>> {
        exact_absorption(self.p.clone(), self.lower_gap as usize, self.upper_gap as usize)
    }
}

/// Probability that the walk reaches the lower barrier before the upper one,
/// `(φ(Δ₂) − 1) / (φ(Δ₂) − φ(−Δ₁))` with `φ(s) = ((1 − p)/p)^s`, and
/// `Δ₂ / (Δ₁ + Δ₂)` in the symmetric case.
pub fn ruin_probability<T: Scalar>(spec: &WalkSpec<T>) -> T {
    let p = spec.p.clone();
    let d1 = spec.lower_gap;
    let d2 = spec.upper_gap;
    if p == frac(1, 2) {
        return lit::<T>(d2 as i64) / lit::<T>((d1 + d2) as i64);
    }
    let q = T::one() - p.clone();
    let up = powi(q.clone() / p.clone(), d2);
    let down = powi(p / q, d1);
    (up.clone() - T::one()) / (up - down)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Absorption<T> {
    /// Probability of hitting the lower barrier first.
    pub lower_first: T,
    /// Expected number of steps until either barrier is hit.
    pub expected_steps: T,
}

/// Largest `lower_gap + upper_gap` accepted by [`exact_absorption`].
pub const ORACLE_LIMIT: usize = 10_000;

/// Solves the birth-death chain on `0..=Δ₁+Δ₂` (absorbing ends, start at `Δ₁`)
/// for the absorption probability and the expected absorption time, by the
/// tridiagonal (Thomas) elimination. `p` may be 0 or 1.
pub fn exact_absorption<T: Scalar>(p: T, lower_gap: usize, upper_gap: usize) -> Result<Absorption<T>> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::invalid(format!("up-probability must lie in [0, 1], got {p:?}")));
    }
    if lower_gap == 0 || upper_gap == 0 {
        return Err(Error::invalid("barrier distances must be at least 1"));
    }
    let len = lower_gap + upper_gap;
    if len > ORACLE_LIMIT {
        return Err(Error::SizeLimit {
            nodes: len,
            limit: ORACLE_LIMIT,
        });
    }
    let q = T::one() - p.clone();
    // interior states 1..len, equation x_k − p x_{k+1} − q x_{k−1} = r_k
    let interior = len - 1;
    let mut rhs_hit: Vec<T> = vec![T::zero(); interior];
    rhs_hit[0] = q.clone();
    let rhs_time: Vec<T> = vec![T::one(); interior];
    let hit = thomas(&p, &q, rhs_hit);
    let time = thomas(&p, &q, rhs_time);
    Ok(Absorption {
        lower_first: hit[lower_gap - 1].clone(),
        expected_steps: time[lower_gap - 1].clone(),
    })
}

/// Thomas algorithm for the constant tridiagonal system `(−q, 1, −p)`.
fn thomas<T: Scalar>(p: &T, q: &T, mut rhs: Vec<T>) -> Vec<T> {
    let n = rhs.len();
    let mut upper: Vec<T> = Vec::with_capacity(n);
    let mut pivot = T::one();
    for k in 0..n {
        if k > 0 {
            pivot = T::one() + q.clone() * upper[k - 1].clone();
            let prev = rhs[k - 1].clone();
            rhs[k] = rhs[k].clone() + q.clone() * prev;
        }
        upper.push(T::zero() - p.clone() / pivot.clone());
        rhs[k] = rhs[k].clone() / pivot.clone();
    }
    for k in (0..n.saturating_sub(1)).rev() {
        let next = rhs[k + 1].clone();
        rhs[k] = rhs[k].clone() - upper[k].clone() * next;
    }
    rhs
}

/// `E[ρ^T]` for the first passage `T` of the unrestricted walk to `+Δ₂`:
/// `((1 − √(1 − 4p(1−p)ρ²)) / (2(1−p)ρ))^Δ₂`.
///
/// Evaluated as `(2pρ / (1 + √D))^Δ₂` with `D = (2p − 1)² − 4p(1 − p)(ρ² − 1)`.
/// A discriminant within a few ulps of zero is taken to be zero: the map has a
/// square-root branch point there, and rounding noise in `D` would otherwise
/// be amplified to its square root.
pub fn ruin_mgf<T: Real>(p: T, rho: T, upper_gap: u32) -> Result<T> {
    if !(p > T::zero() && p <= T::one()) {
        return Err(Error::invalid(format!("up-probability must lie in (0, 1], got {p:?}")));
    }
    if !(rho >= T::one()) || !rho.is_finite() {
        return Err(Error::invalid(format!("rho must be finite and >= 1, got {rho:?}")));
    }
    let two: T = lit(2);
    let four: T = lit(4);
    let q = T::one() - p;
    let skew = two * p - T::one();
    let mut disc = skew * skew - four * p * q * (rho * rho - T::one());
    let tol = lit::<T>(16) * T::epsilon();
    if disc.abs() <= tol {
        disc = T::zero();
    }
    if disc < T::zero() {
        return Err(Error::Domain(format!(
            "4p(1-p)rho^2 > 1 for p = {p:?}, rho = {rho:?}"
        )));
    }
    let base = two * p * rho / (T::one() + disc.sqrt());
    Ok(base.powi(upper_gap as i32))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonTail<T> {
    pub exact: T,
    pub ln_exact: T,
    pub bound: T,
    pub ln_bound: T,
}

fn log_sum_exp<T: Real>(terms: &[T]) -> T {
    let max = terms.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    max + terms.iter().map(|&t| (t - max).exp()).fold(T::zero(), |a, b| a + b).ln()
}

fn ln_poisson_pmf<T: Real>(mean: T, q: u64, ln_factorial: T) -> T {
    if mean == T::zero() {
        return if q == 0 { T::zero() } else { T::neg_infinity() };
    }
    -mean + lit::<T>(q as i64) * mean.ln() - ln_factorial
}

/// `P[Q ≤ k]` for `Q ~ Poisson(mean)`, with the bound `2^{−mean/2}`.
pub fn poisson_lower_tail<T: Real>(mean: T, k: u64) -> Result<PoissonTail<T>> {
    if !(mean >= T::zero()) || !mean.is_finite() {
        return Err(Error::invalid(format!("Poisson mean must be finite and >= 0, got {mean:?}")));
    }
    let mut ln_fact = T::zero();
    let mut terms = Vec::with_capacity(k as usize + 1);
    for q in 0..=k {
        if q > 0 {
            ln_fact = ln_fact + lit::<T>(q as i64).ln();
        }
        terms.push(ln_poisson_pmf(mean, q, ln_fact));
    }
    let ln_exact = log_sum_exp(&terms).min(T::zero());
    let ln_bound = -(mean / lit(2)) * lit::<T>(2).ln();
    Ok(PoissonTail {
        exact: ln_exact.exp(),
        ln_exact,
        bound: ln_bound.exp(),
        ln_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonUpperTail<T> {
    /// `P[Q ≥ k]`.
    pub exact: T,
    pub ln_exact: T,
    /// Chernoff bound `e^{mean(e − 1)} / e^k`.
    pub ln_chernoff: T,
    /// Simplified bound `2^{−k/2}`.
    pub ln_bound: T,
}

/// `P[Q ≥ k]` for `Q ~ Poisson(mean)` with the Chernoff bound
/// `E[e^Q] / e^k` and its simplification `2^{−k/2}`; all in log space since
/// these are typically astronomically small.
pub fn poisson_upper_tail<T: Real>(mean: T, k: u64) -> Result<PoissonUpperTail<T>> {
    if !(mean >= T::zero()) || !mean.is_finite() {
        return Err(Error::invalid(format!("Poisson mean must be finite and >= 0, got {mean:?}")));
    }
    let two: T = lit(2);
    let ln_chernoff = mean * (T::one().exp() - T::one()) - lit::<T>(k as i64);
    let ln_bound = -(lit::<T>(k as i64) / two) * two.ln();
    let ln_exact = if k == 0 {
        T::zero()
    } else if lit::<T>(k as i64) <= mean {
        let lower = poisson_lower_tail(mean, k - 1)?;
        (T::one() - lower.exact).ln()
    } else {
        // terms decrease past the mean; sum until negligible
        let mut ln_fact = (1..=k).fold(T::zero(), |acc, q| acc + lit::<T>(q as i64).ln());
        let mut terms = vec![ln_poisson_pmf(mean, k, ln_fact)];
        let cutoff = lit::<T>(40);
        let mut q = k;
        loop {
            q += 1;
            ln_fact = ln_fact + lit::<T>(q as i64).ln();
            let t = ln_poisson_pmf(mean, q, ln_fact);
            if terms[0] - t > cutoff || t == T::neg_infinity() {
                break;
            }
            terms.push(t);
        }
        log_sum_exp(&terms)
    };
    Ok(PoissonUpperTail {
        exact: ln_exact.exp(),
        ln_exact,
        ln_chernoff,
        ln_bound,
    })
}

/// A bound together with its value clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundValue<T> {
    pub value: T,
    pub unclamped: T,
}

impl<T: Real> BoundValue<T> {
    fn new(unclamped: T) -> Self {
        BoundValue {
            value: unclamped.max(T::zero()).min(T::one()),
            unclamped,
        }
    }
}

/// Thresholds and horizon for the star escape bound. `g2 = d/3 − 2` is fixed
/// by the degree; `horizon` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarBoundSpec<T> {
    g0: T,
    g1: T,
    g2: T,
    horizon: T,
    degree: T,
}

impl<T: Real> StarBoundSpec<T> {
    pub fn new(g0: T, g1: T, horizon: T, degree: T) -> Result<Self> {
        let g2 = degree / lit(3) - lit(2);
        if !(degree > lit(15)) {
            return Err(Error::invalid(format!("star bound needs d > 15, got {degree:?}")));
        }
        if !(T::one() < g0 && g0 < g1 && g1 < g2) {
            return Err(Error::invalid(format!(
                "need 1 < g0 < g1 < g2 = d/3 - 2, got {g0:?}, {g1:?}, {g2:?}"
            )));
        }
        if !(horizon > T::zero()) {
            return Err(Error::invalid("horizon must be positive"));
        }
        Ok(StarBoundSpec {
            g0,
            g1,
            g2,
            horizon,
            degree,
        })
    }

    /// Few defectors grow: `g0 = 2`, `g1 = 3`.
    pub fn defection_spreads(degree: T, horizon: T) -> Result<Self> {
        Self::new(lit(2), lit(3), horizon, degree)
    }

    /// Many defectors persist: `g0 = d/4 − 3`, `g1 = d/3 − 3`, no horizon.
    pub fn defection_survives(degree: T) -> Result<Self> {
        Self::new(
            degree / lit(4) - lit(3),
            degree / lit(3) - lit(3),
            T::infinity(),
            degree,
        )
    }

    /// A quarter of defectors is boosted to a third: `g0 = d/5 − 2 − τ`,
    /// `g1 = d/4 − 2 − τ`.
    pub fn defection_boosting(degree: T, tau: T, horizon: T) -> Result<Self> {
        Self::new(
            degree / lit(5) - lit(2) - tau,
            degree / lit(4) - lit(2) - tau,
            horizon,
            degree,
        )
    }

    pub fn g0(&self) -> T {
        self.g0
    }

    pub fn g1(&self) -> T {
        self.g1
    }

    pub fn g2(&self) -> T {
        self.g2
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn degree(&self) -> T {
        self.degree
    }

    pub fn lower_gap(&self) -> T {
        self.g1 - self.g0
    }

    pub fn upper_gap(&self) -> T {
        self.g2 - self.g1
    }

    /// `μ = g0 · M′`.
    pub fn mean(&self) -> T {
        self.g0 * self.horizon
    }

    /// `ρ = √(9/8)`.
    pub fn rho() -> T {
        (lit::<T>(9) / lit(8)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarEscapeBound<T> {
    /// `2^{−Δ₁}`
    pub ruin_term: T,
    /// `ρ^{−√μ/2} (√2)^{Δ₂}`
    pub passage_term: T,
    /// `2^{−μ/2}`
    pub poisson_term: T,
    pub total: BoundValue<T>,
}

/// Bound on the probability that a star fails to reach `g2` defecting leaves
/// before dropping to `g0` or running out of time `M′`.
pub fn star_escape_bound<T: Real>(spec: &StarBoundSpec<T>) -> StarEscapeBound<T> {
    let two: T = lit(2);
    let ln2 = two.ln();
    let mu = spec.mean();
    let ruin_term = (-spec.lower_gap() * ln2).exp();
    let ln_passage =
        -(mu.sqrt() / two) * StarBoundSpec::<T>::rho().ln() + spec.upper_gap() * ln2 / two;
    let passage_term = ln_passage.exp();
    let poisson_term = (-(mu / two) * ln2).exp();
    StarEscapeBound {
        ruin_term,
        passage_term,
        poisson_term,
        total: BoundValue::new(ruin_term + passage_term + poisson_term),
    }
}

/// Drift constants for the defector count on a graph with expansion above
/// `1/2 + ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionRates<T> {
    pub epsilon: T,
    /// `2 − ε′ = (1/2 + ε)^{−1}`
    pub epsilon_prime: T,
    /// `2/(3 − ε′) − 2/3`
    pub epsilon_double_prime: T,
    /// Lower bound `2/3 + ε″` on the up-step probability.
    pub up_probability: T,
    /// Upper bound `1/3 − ε″` on the down-step probability.
    pub down_probability: T,
    /// Supermartingale base `a`, with `W(N) = a^{n − N}`.
    pub base: T,
    /// `(2/3 + ε″) a^{−1} + (1/3 − ε″) a²`, which must be below one.
    pub drift: T,
}

pub fn expansion_rates<T: Real>(epsilon: T) -> Result<ExpansionRates<T>> {
    let half: T = frac(1, 2);
    if !(epsilon > T::zero() && epsilon < half) {
        return Err(Error::Domain(format!(
            "expansion slack must lie in (0, 1/2), got {epsilon:?}"
        )));
    }
    let two: T = lit(2);
    let three: T = lit(3);
    let epsilon_prime = two - (half + epsilon).recip();
    let epsilon_double_prime = two / (three - epsilon_prime) - two / three;
    let up = two / three + epsilon_double_prime;
    let down = three.recip() - epsilon_double_prime;
    if !(down > T::zero()) {
        return Err(Error::Domain("down-step probability bound vanished".into()));
    }
    let base = (half * up / down).cbrt();
    let drift = up / base + down * base * base;
    if !(drift < T::one()) || !(base > T::one()) {
        return Err(Error::Domain(format!(
            "supermartingale condition fails numerically at epsilon = {epsilon:?} (drift {drift:?})"
        )));
    }
    Ok(ExpansionRates {
        epsilon,
        epsilon_prime,
        epsilon_double_prime,
        up_probability: up,
        down_probability: down,
        base,
        drift,
    })
}

/// Union bound on the probability that an oriented lattice with `n = 2n′ + 1`
/// and height `T` is not crossed:
/// `T² (3√(1 − p′))^{(n−1)/2} / (1 − 3√(1 − p′))`.
pub fn crossing_upper_bound<T: Real>(n: u64, p_open: T, height: u64) -> Result<BoundValue<T>> {
    if !(p_open >= T::zero() && p_open <= T::one()) {
        return Err(Error::invalid(format!("open probability must lie in [0, 1], got {p_open:?}")));
    }
    if n < 1 {
        return Err(Error::invalid("n must be positive"));
    }
    let r = lit::<T>(3) * (T::one() - p_open).sqrt();
    if !(r < T::one()) {
        return Err(Error::BoundInapplicable(format!(
            "3 sqrt(1 - p') = {r:?} >= 1"
        )));
    }
    if r == T::zero() {
        return Ok(BoundValue::new(T::zero()));
    }
    let t: T = lit(height as i64);
    let exponent = lit::<T>(n as i64 - 1) / lit(2);
    let ln = lit::<T>(2) * t.ln() + exponent * r.ln() - (T::one() - r).ln();
    Ok(BoundValue::new(ln.exp()))
}

/// Monte Carlo frequency of hitting the lower barrier first.
pub fn simulate_ruin(spec: &WalkSpec<f64>, replicas: u64, seed: u64) -> Estimate {
    let p = *spec.p();
    let hits = (0..replicas)
        .filter(|&r| {
            let mut rng = rng::replica_rng(seed, r);
            let mut pos: i64 = 0;
            let low = -(spec.lower_gap() as i64);
            let high = spec.upper_gap() as i64;
            while pos > low && pos < high {
                pos += if rng.random::<f64>() < p { 1 } else { -1 };
            }
            pos == low
        })
        .count() as u64;
    Estimate::from_binomial(hits, replicas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;

    fn exact(n: i64, d: i64) -> Exact {
        frac(n, d)
    }

    #[test]
    fn ruin_examples_exact() {
        let s = WalkSpec::new(exact(2, 3), 1, 1).unwrap();
        assert_eq!(ruin_probability(&s), exact(1, 3));
        let s = WalkSpec::new(exact(2, 3), 3, 5).unwrap();
        assert_eq!(ruin_probability(&s), exact(31, 255));
        let s = WalkSpec::new(exact(1, 2), 4, 4).unwrap();
        assert_eq!(ruin_probability(&s), exact(1, 2));
    }

    #[test]
    fn oracle_examples_exact() {
        let a = exact_absorption(exact(2, 3), 1, 1).unwrap();
        assert_eq!(a.lower_first, exact(1, 3));
        assert_eq!(a.expected_steps, exact(1, 1));
        let a = exact_absorption(exact(1, 1), 4, 7).unwrap();
        assert_eq!(a.lower_first, exact(0, 1));
        assert_eq!(a.expected_steps, exact(7, 1));
        let a = exact_absorption(exact(1, 2), 2, 3).unwrap();
        assert_eq!(a.lower_first, exact(3, 5));
        // symmetric walk: expected duration Δ₁Δ₂
        assert_eq!(a.expected_steps, exact(6, 1));
        assert!(exact_absorption(0.5f64, 6000, 6000).is_err());
        assert!(exact_absorption(1.5f64, 1, 1).is_err());
    }

    #[test]
    fn closed_form_matches_oracle_exactly_on_rationals() {
        for (pn, pd) in [(1, 10), (1, 3), (1, 2), (3, 5), (9, 10)] {
            for d1 in 1..6 {
                for d2 in 1..6 {
                    let s = WalkSpec::new(exact(pn, pd), d1, d2).unwrap();
                    assert_eq!(ruin_probability(&s), s.absorption_oracle().unwrap().lower_first);
                }
            }
        }
    }

    #[test]
    fn walk_spec_validation() {
        assert!(WalkSpec::new(0.0, 1, 1).is_err());
        assert!(WalkSpec::new(1.0, 1, 1).is_err());
        assert!(WalkSpec::new(0.5, 0, 1).is_err());
    }

    #[test]
    fn ruin_is_monotone() {
        let ps: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
        for d1 in 1..=20u32 {
            for d2 in 1..=20u32 {
                let vals: Vec<f64> = ps
                    .iter()
                    .map(|&p| ruin_probability(&WalkSpec::new(p, d1, d2).unwrap()))
                    .collect();
                assert!(vals.windows(2).all(|w| w[1] <= w[0]));
                let p = 0.6;
                let here = ruin_probability(&WalkSpec::new(p, d1, d2).unwrap());
                let more_d1 = ruin_probability(&WalkSpec::new(p, d1 + 1, d2).unwrap());
                let more_d2 = ruin_probability(&WalkSpec::new(p, d1, d2 + 1).unwrap());
                assert!(more_d1 <= here && more_d2 >= here);
            }
        }
    }

    #[test]
    fn mgf_examples() {
        let rho = (9.0f64 / 8.0).sqrt();
        let v = ruin_mgf(2.0 / 3.0, rho, 1).unwrap();
        assert!((v - std::f64::consts::SQRT_2).abs() < 1e-15);
        for k in 1..20 {
            assert!((ruin_mgf(2.0f64 / 3.0, 1.0, k).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!(matches!(ruin_mgf(0.5, 1.1, 1), Err(Error::Domain(_))));
        assert!(ruin_mgf(0.5, 0.9, 1).is_err());
        // p < 1/2 at rho = 1 gives the probability of ever reaching +Δ₂
        let v = ruin_mgf(0.25f64, 1.0, 2).unwrap();
        assert!((v - (1.0f64 / 3.0).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn mgf_in_single_precision() {
        let v = ruin_mgf(2.0f32 / 3.0, (9.0f32 / 8.0).sqrt(), 2).unwrap();
        assert!((v - 2.0).abs() < 1e-5);
    }

    #[test]
    fn poisson_examples() {
        let t = poisson_lower_tail(4.0f64, 2).unwrap();
        assert!((t.exact - 13.0 * (-4.0f64).exp()).abs() < 1e-15);
        assert!(t.exact <= t.bound && (t.bound - 0.25).abs() < 1e-15);
        let t = poisson_lower_tail(0.0f64, 0).unwrap();
        assert_eq!(t.exact, 1.0);
        let t = poisson_lower_tail(25.0f64, 5).unwrap();
        assert!((t.exact - 1.397_112_107_542_86e-6).abs() < 1e-18, "{}", t.exact);
        assert!((t.bound - 2f64.powf(-12.5)).abs() < 1e-15);
        assert!(poisson_lower_tail(-1.0f64, 2).is_err());
    }

    #[test]
    fn poisson_bound_needs_mean_above_one() {
        // P[Q <= 1] = 2/e exceeds 2^{-1/2} at mean 1; the bound only holds from 2 on
        let t = poisson_lower_tail(1.0f64, 1).unwrap();
        assert!(t.exact > t.bound);
        for mu in 2..=200u64 {
            let k = (mu as f64).sqrt().floor() as u64;
            let t = poisson_lower_tail(mu as f64, k).unwrap();
            assert!(t.exact <= t.bound, "mu = {mu}");
        }
    }

    #[test]
    fn poisson_upper_tail_matches_direct_sum() {
        let u = poisson_upper_tail(3.0f64, 2).unwrap();
        let direct = 1.0 - (-3.0f64).exp() * 4.0;
        assert!((u.exact - direct).abs() < 1e-14);
        let u = poisson_upper_tail(2.0f64, 30).unwrap();
        assert!(u.ln_exact <= u.ln_chernoff);
        // d = 16, M = 2: mean dM = 32, threshold d²M² = 1024
        let u = poisson_upper_tail(32.0f64, 1024).unwrap();
        assert!(u.ln_exact < u.ln_chernoff && u.ln_chernoff < u.ln_bound);
        assert_eq!(poisson_upper_tail(5.0f64, 0).unwrap().exact, 1.0);
    }

    #[test]
    fn star_bound_examples() {
        let spreads = StarBoundSpec::defection_spreads(300.0f64, 300f64.powi(3)).unwrap();
        assert!(star_escape_bound(&spreads).total.value < 2.0 / 3.0);

        let survives = StarBoundSpec::defection_survives(120.0f64).unwrap();
        let b = star_escape_bound(&survives);
        assert_eq!(b.total.unclamped, 2f64.powi(-10));

        assert!(StarBoundSpec::new(2.0f64, 3.0, 10.0, 15.0).is_err());
        assert!(StarBoundSpec::new(3.0f64, 2.0, 10.0, 30.0).is_err());
        assert!(StarBoundSpec::new(2.0f64, 9.0, 10.0, 30.0).is_err());
    }

    #[test]
    fn star_bound_vanishes_for_large_gaps() {
        let mut last = f64::INFINITY;
        for d in [120.0f64, 600.0, 3000.0, 15000.0] {
            let s = StarBoundSpec::defection_boosting(d, 1.0, d.powi(3)).unwrap();
            let v = star_escape_bound(&s).total.unclamped;
            assert!(v < last);
            last = v;
        }
        assert!(last < 1e-100);
    }

    #[test]
    fn star_bound_decreases_with_degree() {
        let mut prev_spread = f64::INFINITY;
        let mut prev_survive = f64::INFINITY;
        for d in 17..=80 {
            let d = d as f64;
            let a = star_escape_bound(&StarBoundSpec::defection_spreads(d, d.powi(3)).unwrap());
            let b = star_escape_bound(&StarBoundSpec::defection_survives(d).unwrap());
            assert!(a.total.unclamped <= prev_spread);
            assert!(b.total.unclamped < prev_survive);
            prev_spread = a.total.unclamped;
            prev_survive = b.total.unclamped;
        }
    }

    #[test]
    fn expansion_rate_examples() {
        let r = expansion_rates(0.1f64).unwrap();
        assert!((r.epsilon_prime - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.epsilon_double_prime - 1.0 / 12.0).abs() < 1e-15);
        assert!((r.base - 1.5f64.cbrt()).abs() < 1e-12);
        assert!(r.drift < 1.0);

        let r = expansion_rates(1.0f64 / 18.0).unwrap();
        assert!((r.epsilon_prime - 0.2).abs() < 1e-15);
        assert!((r.up_probability - 5.0 / 7.0).abs() < 1e-15);
        assert!((r.base - 1.25f64.cbrt()).abs() < 1e-15);

        let r = expansion_rates(1e-6f64).unwrap();
        assert!(r.epsilon_prime < 1e-5 && r.epsilon_double_prime < 1e-5);
        assert!(r.base > 1.0 && r.base - 1.0 < 1e-5);

        assert!(matches!(expansion_rates(0.5f64), Err(Error::Domain(_))));
        assert!(expansion_rates(0.0f64).is_err());
    }

    #[test]
    fn crossing_bound_examples() {
        assert_eq!(crossing_upper_bound(21, 1.0f64, 100).unwrap().value, 0.0);
        let p = 1.0 - 2f64.powi(-10);
        let b = crossing_upper_bound(21, p, 100).unwrap();
        let expect = 1e4 * 0.09375f64.powi(10) / 0.90625;
        assert!((b.unclamped - expect).abs() < 1e-18, "{}", b.unclamped);
        assert!((b.unclamped - 5.8e-7).abs() < 0.05e-6);
        assert!(matches!(
            crossing_upper_bound(21, 0.8f64, 10),
            Err(Error::BoundInapplicable(_))
        ));
        let mut last = f64::INFINITY;
        for n in (3..200).step_by(2) {
            let v = crossing_upper_bound(n, 0.95f64, 50).unwrap().unclamped;
            assert!(v < last);
            last = v;
        }
        assert_eq!(crossing_upper_bound(3, 0.95f64, 10_000).unwrap().value, 1.0);
    }

    #[test]
    fn monte_carlo_ruin_agrees() {
        let spec = WalkSpec::new(2.0 / 3.0, 2, 3).unwrap();
        let est = simulate_ruin(&spec, 20_000, 5);
        let exact = ruin_probability(&spec);
        assert!((est.mean - exact).abs() < 4.0 * est.stderr);
    }
}

//! The Poissonian chain: binomial thinnings of a Poisson seed, truncated to
//! `{0, ..., K}`. Float only; the binomial and Poisson weights are
//! transcendental in general.

use std::fmt;
use std::sync::Arc;

use statrs::distribution::{Binomial, Discrete, DiscreteCDF, Poisson};

use crate::error::{Error, Result};
use crate::probcore::{total_variation, Dist, OrderedStateSpace, Space};

use super::{ChainRule, LevelKernel, LeveledChain};

pub const DEFAULT_TAIL_BOUND: f64 = 1e-9;

/// Row entries below this are dropped (and the row renormalized) to keep
/// high-count rows sparse.
const ROW_CUTOFF: f64 = 1e-20;

/// Level-indexed intensity `n ↦ λ_n`.
#[derive(Clone)]
pub struct LambdaRule {
    label: String,
    f: Arc<dyn Fn(i32) -> f64 + Send + Sync>,
}

impl fmt::Debug for LambdaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LambdaRule({})", self.label)
    }
}

impl LambdaRule {
    pub fn from_fn(label: &str, f: impl Fn(i32) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.to_string(),
            f: Arc::new(f),
        }
    }

    /// `values[i]` is `λ` at level `depth + i`; the last entry is `λ_0`.
    pub fn from_values(values: Vec<f64>) -> Self {
        let depth = -(values.len() as i32 - 1);
        let label = format!("{values:?}");
        Self::from_fn(&label, move |n| {
            let i = (n - depth).clamp(0, values.len() as i32 - 1);
            values[i as usize]
        })
    }

    pub fn constant(lambda: f64) -> Self {
        Self::from_fn(&format!("{lambda}"), move |_| lambda)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn at(&self, level: i32) -> f64 {
        (self.f)(level)
    }

    /// λ positive, finite and nonincreasing from `depth` toward 0.
    pub fn validate(&self, depth: i32) -> Result<()> {
        let mut prev = f64::INFINITY;
        for n in depth..=0 {
            let l = self.at(n);
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "λ at level {n} is {l}, must be positive"
                )));
            }
            if l > prev * (1.0 + 1e-15) {
                return Err(Error::InvalidParameter(format!(
                    "λ must be nonincreasing toward level 0; λ({n}) = {l} > {prev}"
                )));
            }
            prev = l;
        }
        Ok(())
    }
}

pub fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    Poisson::new(lambda).map(|p| p.pmf(k)).unwrap_or(0.0)
}

/// `ℙ(𝒫(λ) > k)`.
pub fn poisson_tail(lambda: f64, k: u64) -> f64 {
    Poisson::new(lambda).map(|p| p.sf(k)).unwrap_or(0.0)
}

/// Smallest `K` with `ℙ(𝒫(λ) > K) <= bound`.
pub fn poisson_truncation(lambda: f64, bound: f64) -> usize {
    let mut k = lambda.floor() as u64;
    while poisson_tail(lambda, k) > bound {
        k += 1 + (k / 64);
    }
    while k > 0 && poisson_tail(lambda, k - 1) <= bound {
        k -= 1;
    }
    k as usize
}

/// Poisson(λ) restricted to `space` (labels `0..=K`) and renormalized.
pub fn truncated_poisson(space: Space, lambda: f64) -> Result<Dist<f64>> {
    let w: Vec<f64> = space.labels().iter().map(|&k| poisson_pmf(lambda, k as u64)).collect();
    Dist::new(space, w)
}

fn binomial_row(k: usize, theta: f64) -> Vec<(usize, f64)> {
    if theta >= 1.0 {
        return vec![(k, 1.0)];
    }
    if theta <= 0.0 || k == 0 {
        return vec![(0, 1.0)];
    }
    // Walk outward from the mode with the pmf ratio recurrence; one statrs
    // evaluation per row instead of k + 1.
    let b = Binomial::new(theta, k as u64).expect("valid binomial parameters");
    let mode = (((k + 1) as f64 * theta).floor() as usize).min(k);
    let peak = b.pmf(mode as u64);
    let odds = theta / (1.0 - theta);
    let mut below = Vec::new();
    let (mut p, mut j) = (peak, mode);
    while j > 0 {
        p *= j as f64 / ((k - j + 1) as f64 * odds);
        j -= 1;
        if p <= ROW_CUTOFF {
            break;
        }
        below.push((j, p));
    }
    below.reverse();
    let mut row = below;
    row.push((mode, peak));
    let (mut p, mut j) = (peak, mode);
    while j < k {
        p *= (k - j) as f64 / (j + 1) as f64 * odds;
        j += 1;
        if p <= ROW_CUTOFF {
            break;
        }
        row.push((j, p));
    }
    let total: f64 = row.iter().map(|x| x.1).sum();
    for e in &mut row {
        e.1 /= total;
    }
    row
}

/// Bin(k, θ) as a law on `space` (which must contain `0..=k`).
pub fn binomial_dist(space: Space, k: usize, theta: f64) -> Result<Dist<f64>> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "success probability {theta} outside [0, 1]"
        )));
    }
    if k >= space.len() {
        return Err(Error::UnknownState(format!(
            "{k} outside a space of {} states",
            space.len()
        )));
    }
    Dist::from_sparse(space, &binomial_row(k, theta))
}

/// Kernel rule: `K_n(k, ·) = Bin(k, λ_n / λ_{n-1})` on `{0, ..., K}`.
#[derive(Debug, Clone)]
pub struct PoissonRule {
    lambda: LambdaRule,
    truncation: usize,
}

impl PoissonRule {
    pub fn new(lambda: LambdaRule, truncation: usize) -> Self {
        Self { lambda, truncation }
    }

    pub fn lambda(&self) -> &LambdaRule {
        &self.lambda
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    fn thinning(&self, from: i32, to: i32) -> Result<LevelKernel<f64>> {
        let theta = (self.lambda.at(to) / self.lambda.at(from)).min(1.0);
        let rows = (0..=self.truncation).map(|k| binomial_row(k, theta)).collect();
        LevelKernel::new(self.space(from)?, self.space(to)?, rows)
    }
}

impl ChainRule<f64> for PoissonRule {
    fn name(&self) -> String {
        format!("poisson[{}]", self.lambda.label())
    }

    fn space(&self, level: i32) -> Result<Space> {
        OrderedStateSpace::range(level, self.truncation as i64)
    }

    fn kernel(&self, level: i32) -> Result<LevelKernel<f64>> {
        self.thinning(level - 1, level)
    }

    /// Thinnings compose: Bin(Bin(k, a), b) = Bin(k, ab).
    fn composed(&self, from: i32, to: i32) -> Option<Result<LevelKernel<f64>>> {
        Some(self.thinning(from, to))
    }

    // A row of length K + 1 per state makes these kernels large; deep
    // windows would otherwise hold every level in memory.
    fn cache_kernels(&self) -> bool {
        false
    }
}

/// A Poissonian chain together with its truncation data.
#[derive(Debug, Clone)]
pub struct PoissonChain {
    pub chain: LeveledChain<f64>,
    pub truncation: usize,
    /// `ℙ(𝒫(λ_m) > K)` for the seed intensity.
    pub tail: f64,
}

/// Builds the chain on the window `depth..=0`. With `truncation = None` the
/// smallest `K` meeting `tail_bound` is used.
pub fn poisson_chain(
    lambda: &LambdaRule,
    depth: i32,
    truncation: Option<usize>,
    tail_bound: f64,
) -> Result<PoissonChain> {
    if depth > 0 {
        return Err(Error::InvalidLevels(format!("depth {depth} must be <= 0")));
    }
    lambda.validate(depth)?;
    let lm = lambda.at(depth);
    let k = match truncation {
        Some(k) => k,
        None => poisson_truncation(lm, tail_bound),
    };
    let tail = poisson_tail(lm, k as u64);
    if tail > tail_bound {
        return Err(Error::TruncationTail {
            tail,
            bound: tail_bound,
        });
    }
    let rule = PoissonRule::new(lambda.clone(), k);
    let seed = truncated_poisson(rule.space(depth)?, lm)?;
    let chain = LeveledChain::new(Arc::new(rule), depth, seed)?;
    Ok(PoissonChain {
        chain,
        truncation: k,
        tail,
    })
}

/// A computed total-variation value against its analytic bound.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PoissonBoundCheck {
    pub value: f64,
    pub bound: f64,
    /// Truncation slack added to the bound.
    pub slack: f64,
    pub holds: bool,
}

impl PoissonBoundCheck {
    fn new(value: f64, bound: f64, slack: f64) -> Self {
        Self {
            value,
            bound,
            slack,
            holds: value <= bound + slack + 1e-12,
        }
    }
}

/// TV between truncated Poisson(λ) and Poisson(λ′) on `{0..K}` against
/// `1 − exp(λ′ − λ)`.
pub fn poisson_distance_bound(lambda: f64, lambda_prime: f64, truncation: usize) -> Result<PoissonBoundCheck> {
    if !(lambda_prime > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter("intensities must be positive".into()));
    }
    if lambda < lambda_prime {
        return Err(Error::InvalidParameter(format!(
            "need λ >= λ′, got {lambda} < {lambda_prime}"
        )));
    }
    let space = OrderedStateSpace::range(0, truncation as i64)?;
    let a = truncated_poisson(space.clone(), lambda)?;
    let b = truncated_poisson(space, lambda_prime)?;
    let value = total_variation(&a, &b)?;
    let slack = poisson_tail(lambda, truncation as u64) + poisson_tail(lambda_prime, truncation as u64);
    Ok(PoissonBoundCheck::new(
        value,
        1.0 - (lambda_prime - lambda).exp(),
        slack,
    ))
}

/// TV between Bin(k, θ) and truncated Poisson(kθ) on `{0..K}` against `kθ²`.
pub fn binomial_poisson_check(k: usize, theta: f64, truncation: usize) -> Result<PoissonBoundCheck> {
    let space = OrderedStateSpace::range(0, truncation.max(k) as i64)?;
    let b = binomial_dist(space.clone(), k, theta)?;
    let lam = k as f64 * theta;
    let (p, slack) = if lam > 0.0 {
        (
            truncated_poisson(space, lam)?,
            poisson_tail(lam, truncation.max(k) as u64),
        )
    } else {
        (Dist::point_mass(space, 0), 0.0)
    };
    let value = total_variation(&b, &p)?;
    Ok(PoissonBoundCheck::new(value, k as f64 * theta * theta, slack))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_lambda_freezes_the_chain() {
        let pc = poisson_chain(&LambdaRule::constant(2.0), -5, None, DEFAULT_TAIL_BOUND).unwrap();
        let k = pc.chain.kernel(-2).unwrap();
        for x in 0..=pc.truncation {
            assert_eq!(k.row(x), &[(x, 1.0)]);
        }
        assert!(pc.tail <= DEFAULT_TAIL_BOUND);
        assert!(pc.chain.is_monotonic().unwrap());
    }

    #[test]
    fn composition_is_a_thinning() {
        let lam = LambdaRule::from_values(vec![8.0, 6.0, 5.0, 4.0, 2.0]);
        let pc = poisson_chain(&lam, -4, None, DEFAULT_TAIL_BOUND).unwrap();
        let closed = pc.chain.compose_kernels(-4, 0).unwrap();
        let mut product = (*pc.chain.kernel(0).unwrap()).clone();
        for l in (-3..0).rev() {
            product = pc.chain.kernel(l).unwrap().then(&product).unwrap();
        }
        for x in [0, 3, 7, pc.truncation] {
            let expected = binomial_dist(closed.target().clone(), x, 2.0 / 8.0).unwrap();
            for y in 0..=pc.truncation {
                assert!((closed.get(x, y) - expected.weight(y)).abs() < 1e-12);
                assert!((product.get(x, y) - expected.weight(y)).abs() < 1e-12);
            }
        }
        for l in -3..=0 {
            assert!(pc.chain.kernel(l).unwrap().is_identifiable());
        }
    }

    #[test]
    fn rejects_bad_lambda_and_tail() {
        let up = LambdaRule::from_values(vec![1.0, 2.0]);
        assert!(matches!(
            poisson_chain(&up, -1, None, 1e-9),
            Err(Error::InvalidParameter(_))
        ));
        let neg = LambdaRule::constant(-1.0);
        assert!(matches!(
            poisson_chain(&neg, -1, None, 1e-9),
            Err(Error::InvalidParameter(_))
        ));
        let c = LambdaRule::constant(10.0);
        assert!(matches!(
            poisson_chain(&c, -1, Some(5), 1e-9),
            Err(Error::TruncationTail { .. })
        ));
    }

    #[test]
    fn bound_checks() {
        let same = poisson_distance_bound(1.5, 1.5, 60).unwrap();
        assert!(same.value.abs() < 1e-15 && same.holds);
        let two = poisson_distance_bound(2.0, 1.0, 60).unwrap();
        assert!(two.holds);
        assert!((two.bound - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let close = poisson_distance_bound(1.01, 1.0, 60).unwrap();
        assert!(close.holds && close.value <= 0.00995);
        assert!(poisson_distance_bound(1.0, 2.0, 60).is_err());
        let bp = binomial_poisson_check(10, 0.1, 60).unwrap();
        assert!(bp.holds && bp.value <= 0.1);
    }

    #[test]
    fn truncation_is_minimal() {
        let k = poisson_truncation(3.0, 1e-9);
        assert!(poisson_tail(3.0, k as u64) <= 1e-9);
        assert!(poisson_tail(3.0, k as u64 - 1) > 1e-9);
    }
}

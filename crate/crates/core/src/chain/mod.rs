//! Leveled negative-time Markov chains: kernels, windows, marginals,
//! updating functions, Propp–Wilson couplings and reference chains.

mod kernel;
mod poisson;
mod propp_wilson;
mod square;
mod updating;

pub use kernel::LevelKernel;
pub use poisson::{
    binomial_dist, binomial_poisson_check, poisson_chain, poisson_distance_bound, poisson_pmf, poisson_tail,
    poisson_truncation, truncated_poisson, LambdaRule, PoissonBoundCheck, PoissonChain, PoissonRule,
    DEFAULT_TAIL_BOUND,
};
pub(crate) use propp_wilson::summarize;
pub use propp_wilson::{
    choose_start, common_innovation_law, exact_pw_expectation, propp_wilson_run, CoupledRun, Innovations, JointLaw,
    McEstimate, PathSample, ProppWilson, StartPolicy, DEFAULT_PRODUCT_CAP,
};
pub use square::{square_walk_chain, SquareWalkRule, SQUARE_STATES};
pub use updating::{quantile_updating, UpdatingFunction};

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::probcore::{ensure_same, Dist, Space};
use crate::scalar::Scalar;

/// Level-indexed generator of state spaces and kernels. One rule serves any
/// finite window.
pub trait ChainRule<S: Scalar>: Send + Sync {
    fn name(&self) -> String;
    /// State space of level `level` (`level <= 0`).
    fn space(&self, level: i32) -> Result<Space>;
    /// Kernel from level `level - 1` into level `level`.
    fn kernel(&self, level: i32) -> Result<LevelKernel<S>>;
    /// Closed form for the multi-step kernel from `from` to `to`, when known.
    fn composed(&self, _from: i32, _to: i32) -> Option<Result<LevelKernel<S>>> {
        None
    }
    /// Whether materialized kernels should be kept in memory.
    fn cache_kernels(&self) -> bool {
        true
    }
}

/// A chain materialized over the window `depth..=0`.
pub struct LeveledChain<S: Scalar> {
    depth: i32,
    rule: Arc<dyn ChainRule<S>>,
    spaces: Vec<Space>,
    marginals: Vec<Dist<S>>,
    cache: Vec<OnceLock<Arc<LevelKernel<S>>>>,
}

impl<S: Scalar> Clone for LeveledChain<S> {
    fn clone(&self) -> Self {
        Self {
            depth: self.depth,
            rule: self.rule.clone(),
            spaces: self.spaces.clone(),
            marginals: self.marginals.clone(),
            cache: self.cache.clone(),
        }
    }
}

impl<S: Scalar> std::fmt::Debug for LeveledChain<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LeveledChain")
            .field("name", &self.rule.name())
            .field("depth", &self.depth)
            .finish()
    }
}

impl<S: Scalar> LeveledChain<S> {
    /// Materializes the window and pushes `seed` (a law on level `depth`)
    /// forward to every level.
    pub fn new(rule: Arc<dyn ChainRule<S>>, depth: i32, seed: Dist<S>) -> Result<Self> {
        if depth > 0 {
            return Err(Error::InvalidLevels(format!("depth {depth} must be <= 0")));
        }
        let spaces = (depth..=0).map(|l| rule.space(l)).collect::<Result<Vec<_>>>()?;
        ensure_same(seed.space(), &spaces[0])?;
        let cache = (depth..=0).map(|_| OnceLock::new()).collect();
        let mut chain = Self {
            depth,
            rule,
            spaces,
            marginals: Vec::new(),
            cache,
        };
        let mut marginals = Vec::with_capacity(chain.spaces.len());
        marginals.push(seed);
        for level in (depth + 1)..=0 {
            let k = chain.kernel(level)?;
            let next = k.push_forward(marginals.last().expect("seeded"))?;
            marginals.push(next);
        }
        chain.marginals = marginals;
        Ok(chain)
    }

    /// Chain from explicit kernels: `kernels[i]` maps level `depth + i` into `depth + i + 1`.
    pub fn from_kernels(name: &str, seed: Dist<S>, kernels: Vec<LevelKernel<S>>) -> Result<Self> {
        let depth = -(kernels.len() as i32);
        let rule = ExplicitRule::new(name, depth, seed.space().clone(), kernels)?;
        Self::new(Arc::new(rule), depth, seed)
    }

    pub fn name(&self) -> String {
        self.rule.name()
    }

    pub fn depth(&self) -> i32 {
        self.depth
    }

    pub fn rule(&self) -> &Arc<dyn ChainRule<S>> {
        &self.rule
    }

    fn check_level(&self, level: i32) -> Result<usize> {
        if level < self.depth || level > 0 {
            return Err(Error::LevelOutOfWindow {
                level,
                lo: self.depth,
                hi: 0,
            });
        }
        Ok((level - self.depth) as usize)
    }

    pub fn space(&self, level: i32) -> Result<&Space> {
        Ok(&self.spaces[self.check_level(level)?])
    }

    /// Law of the state at `level` (the pushforward of the seed).
    pub fn marginal_at(&self, level: i32) -> Result<&Dist<S>> {
        Ok(&self.marginals[self.check_level(level)?])
    }

    pub fn seed(&self) -> &Dist<S> {
        &self.marginals[0]
    }

    /// Kernel from `level - 1` into `level`.
    pub fn kernel(&self, level: i32) -> Result<Arc<LevelKernel<S>>> {
        let idx = self.check_level(level)?;
        if level == self.depth {
            return Err(Error::LevelOutOfWindow {
                level,
                lo: self.depth + 1,
                hi: 0,
            });
        }
        if self.rule.cache_kernels() {
            if let Some(k) = self.cache[idx].get() {
                return Ok(k.clone());
            }
        }
        let k = Arc::new(self.rule.kernel(level)?);
        ensure_same(k.source(), &self.spaces[idx - 1])?;
        ensure_same(k.target(), &self.spaces[idx])?;
        if self.rule.cache_kernels() {
            let _ = self.cache[idx].set(k.clone());
        }
        Ok(k)
    }

    /// `ℒ(X_n | X_m = x)` for every `x`, as a kernel from level `m` to level `n`.
    pub fn compose_kernels(&self, m: i32, n: i32) -> Result<LevelKernel<S>> {
        self.check_level(m)?;
        self.check_level(n)?;
        if m >= n {
            return Err(Error::InvalidLevels(format!("need m < n, got m = {m}, n = {n}")));
        }
        if let Some(k) = self.rule.composed(m, n) {
            return k;
        }
        // Right-to-left products keep every intermediate matrix's columns on level n.
        let mut acc = (*self.kernel(n)?).clone();
        for level in ((m + 1)..n).rev() {
            acc = self.kernel(level)?.then(&acc)?;
        }
        Ok(acc)
    }

    /// Same chain restricted to the window `depth..=0` with `depth >= self.depth()`.
    pub fn window(&self, depth: i32) -> Result<Self> {
        let idx = self.check_level(depth)?;
        Ok(Self {
            depth,
            rule: self.rule.clone(),
            spaces: self.spaces[idx..].to_vec(),
            marginals: self.marginals[idx..].to_vec(),
            cache: self.cache[idx..].to_vec(),
        })
    }

    /// Every kernel in the window is monotonic (totally ordered levels only).
    pub fn is_monotonic(&self) -> Result<bool> {
        for level in (self.depth + 1)..=0 {
            if !self.kernel(level)?.is_monotonic()? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A rule backed by explicitly stored kernels (tests, deserialized chains).
pub struct ExplicitRule<S> {
    name: String,
    depth: i32,
    spaces: Vec<Space>,
    kernels: Vec<LevelKernel<S>>,
}

impl<S: Scalar> ExplicitRule<S> {
    pub fn new(name: &str, depth: i32, first: Space, kernels: Vec<LevelKernel<S>>) -> Result<Self> {
        let mut spaces = vec![first];
        for k in &kernels {
            ensure_same(k.source(), spaces.last().expect("nonempty"))?;
            spaces.push(k.target().clone());
        }
        for (i, s) in spaces.iter().enumerate() {
            if s.level() != depth + i as i32 {
                return Err(Error::InvalidLevels(format!(
                    "space {i} has level {}, expected {}",
                    s.level(),
                    depth + i as i32
                )));
            }
        }
        Ok(Self {
            name: name.to_string(),
            depth,
            spaces,
            kernels,
        })
    }
}

impl<S: Scalar> ChainRule<S> for ExplicitRule<S> {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn space(&self, level: i32) -> Result<Space> {
        let idx = level - self.depth;
        if idx < 0 || idx as usize >= self.spaces.len() {
            return Err(Error::LevelOutOfWindow {
                level,
                lo: self.depth,
                hi: 0,
            });
        }
        Ok(self.spaces[idx as usize].clone())
    }

    fn kernel(&self, level: i32) -> Result<LevelKernel<S>> {
        let idx = level - self.depth - 1;
        if idx < 0 || idx as usize >= self.kernels.len() {
            return Err(Error::LevelOutOfWindow {
                level,
                lo: self.depth + 1,
                hi: 0,
            });
        }
        Ok(self.kernels[idx as usize].clone())
    }

    fn cache_kernels(&self) -> bool {
        false
    }
}

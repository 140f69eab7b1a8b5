//! Propp–Wilson coupling: a second trajectory started from a fixed past state
//! and driven by the same innovations as the chain itself.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::probcore::{ensure_same, Dist, Space};
use crate::scalar::Scalar;
use crate::transport::{kantorovich, LevelMetric};

use super::{quantile_updating, LeveledChain, UpdatingFunction};

/// Largest product space allowed in exact joint evolutions by default.
pub const DEFAULT_PRODUCT_CAP: usize = 4_000_000;

/// Counter-based innovation stream: the uniform for `(trial, stream, level)`
/// is a pure function of the seed, so trials replay independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Innovations {
    seed: u64,
}

impl Innovations {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn uniform(&self, trial: u64, stream: u32, level: i32) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        // Two 32-bit words per draw; streams are spaced 2^32 levels apart.
        let slot = ((stream as u128) << 32) | (level.unsigned_abs() as u128);
        rng.set_word_pos(slot * 2);
        (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// A realized trajectory over consecutive levels.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub start_level: i32,
    /// State index per level, `start_level..=start_level + len - 1`.
    pub states: Vec<usize>,
    /// Uniform used at each level (the first entry drew the starting state,
    /// when it was drawn at random).
    pub innovations: Vec<f64>,
}

impl PathSample {
    pub fn end_level(&self) -> i32 {
        self.start_level + self.states.len() as i32 - 1
    }

    pub fn last(&self) -> usize {
        *self.states.last().expect("nonempty path")
    }
}

/// The chain `X` and the Propp–Wilson trajectory `Y(m, x_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledRun {
    pub x: PathSample,
    pub y: PathSample,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Precomputed updating functions for levels `m + 1..=n`.
pub struct ProppWilson<'a, S: Scalar> {
    chain: &'a LeveledChain<S>,
    m: i32,
    n: i32,
    updaters: Vec<UpdatingFunction<S>>,
    seed_cdf: Vec<f64>,
    innovations: Innovations,
}

impl<'a, S: Scalar> ProppWilson<'a, S> {
    pub fn new(chain: &'a LeveledChain<S>, m: i32, n: i32, seed: u64) -> Result<Self> {
        if m >= n {
            return Err(Error::InvalidLevels(format!("need m < n, got m = {m}, n = {n}")));
        }
        chain.space(m)?;
        chain.space(n)?;
        let updaters = ((m + 1)..=n)
            .map(|l| quantile_updating(chain.kernel(l)?.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        let mut acc = 0.0;
        let seed_cdf = chain.marginal_at(m)?.weights().iter().map(|w| {
            acc += w.to_f64();
            acc
        });
        let seed_cdf = seed_cdf.collect();
        Ok(Self {
            chain,
            m,
            n,
            updaters,
            seed_cdf,
            innovations: Innovations::new(seed),
        })
    }

    pub fn chain(&self) -> &LeveledChain<S> {
        self.chain
    }

    /// All updating functions on the path are increasing.
    pub fn is_increasing(&self) -> bool {
        self.updaters.iter().all(UpdatingFunction::is_increasing)
    }

    fn draw_seed(&self, u: f64) -> usize {
        self.seed_cdf
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.seed_cdf.len() - 1)
    }

    /// One coupled run: `X_m ~ μ_m`, `Y_m = x_m`, both driven by the shared uniforms.
    pub fn run(&self, x_m: usize, trial: u64) -> Result<CoupledRun> {
        if x_m >= self.chain.space(self.m)?.len() {
            return Err(Error::UnknownState(format!("index {x_m} at level {}", self.m)));
        }
        let u0 = self.innovations.uniform(trial, 0, self.m);
        let mut x = self.draw_seed(u0);
        let mut y = x_m;
        let len = (self.n - self.m + 1) as usize;
        let mut xs = Vec::with_capacity(len);
        let mut ys = Vec::with_capacity(len);
        let mut us = Vec::with_capacity(len);
        xs.push(x);
        ys.push(y);
        us.push(u0);
        for (k, f) in self.updaters.iter().enumerate() {
            let level = self.m + 1 + k as i32;
            let u = self.innovations.uniform(trial, 0, level);
            x = f.eval(x, u);
            y = f.eval(y, u);
            xs.push(x);
            ys.push(y);
            us.push(u);
        }
        Ok(CoupledRun {
            x: PathSample {
                start_level: self.m,
                states: xs,
                innovations: us.clone(),
            },
            y: PathSample {
                start_level: self.m,
                states: ys,
                innovations: us,
            },
        })
    }

    /// Monte Carlo estimate of `E[ρ(X_n, Y_n(m, x_m))]`.
    pub fn estimate(&self, x_m: usize, rho: &LevelMetric<f64>, trials: u64) -> Result<McEstimate> {
        ensure_same(rho.space(), self.chain.space(self.n)?)?;
        let samples: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| self.run(x_m, t).map(|r| rho.get(r.x.last(), r.y.last())))
            .collect::<Result<_>>()?;
        Ok(summarize(&samples))
    }
}

pub(crate) fn summarize(samples: &[f64]) -> McEstimate {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    McEstimate {
        mean,
        stderr: (var / n).sqrt(),
        trials: samples.len() as u64,
    }
}

/// Single Propp–Wilson run (trial 0) returning the coupled pair `(X_n, Y_n)`.
pub fn propp_wilson_run<S: Scalar>(
    chain: &LeveledChain<S>,
    m: i32,
    x_m: usize,
    n: i32,
    seed: u64,
) -> Result<(usize, usize)> {
    let pw = ProppWilson::new(chain, m, n, seed)?;
    let run = pw.run(x_m, 0)?;
    Ok((run.x.last(), run.y.last()))
}

/// Joint law of a pair of states on two copies of one level, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct JointLaw<S> {
    space: Space,
    mass: Vec<S>,
}

impl<S: Scalar> JointLaw<S> {
    pub fn zero(space: Space) -> Self {
        let n = space.len();
        Self {
            space,
            mass: vec![S::zero(); n * n],
        }
    }

    /// `μ ⊗ δ_y`.
    pub fn with_fixed_second(mu: &Dist<S>, y: usize) -> Self {
        let mut j = Self::zero(mu.space().clone());
        for (x, w) in mu.support() {
            j.add(x, y, &w);
        }
        j
    }

    pub fn point(space: Space, x: usize, y: usize) -> Self {
        let mut j = Self::zero(space);
        j.add(x, y, &S::one());
        j
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn get(&self, x: usize, y: usize) -> &S {
        &self.mass[x * self.space.len() + y]
    }

    fn add(&mut self, x: usize, y: usize, w: &S) {
        let n = self.space.len();
        self.mass[x * n + y] += w;
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, usize, &S)> {
        let n = self.space.len();
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(move |(k, w)| (k / n, k % n, w))
    }

    pub fn expect(&self, rho: &LevelMetric<S>) -> S {
        let mut acc = S::zero();
        for (x, y, w) in self.support() {
            if x != y {
                acc += &(w.clone() * rho.get(x, y));
            }
        }
        acc
    }

    pub fn first_margin(&self) -> Vec<S> {
        let mut m = vec![S::zero(); self.space.len()];
        for (x, _, w) in self.support() {
            m[x] += w;
        }
        m
    }

    pub fn second_margin(&self) -> Vec<S> {
        let mut m = vec![S::zero(); self.space.len()];
        for (_, y, w) in self.support() {
            m[y] += w;
        }
        m
    }
}

/// Exact evolution of a joint law under the common-uniform coupling: from
/// `(x, y)` the next pair is the pushforward of the uniform law through
/// `u ↦ (f(x, u), f(y, u))`, read off the two interval partitions.
pub fn common_innovation_law<S: Scalar>(
    chain: &LeveledChain<S>,
    m: i32,
    init: &JointLaw<S>,
    n: i32,
    cap: usize,
) -> Result<JointLaw<S>> {
    ensure_same(init.space(), chain.space(m)?)?;
    if m > n {
        return Err(Error::InvalidLevels(format!("need m <= n, got m = {m}, n = {n}")));
    }
    chain.space(n)?;
    for level in m..=n {
        let size = chain.space(level)?.len().pow(2);
        if size > cap {
            return Err(Error::ProductCapExceeded { size, cap });
        }
    }
    let mut law = init.clone();
    for level in (m + 1)..=n {
        let f = quantile_updating(chain.kernel(level)?.as_ref())?;
        let mut next = JointLaw::zero(chain.space(level)?.clone());
        for (x, y, w) in law.support() {
            for (len, a, b) in f.overlaps(x, y) {
                next.add(a, b, &(w.clone() * len));
            }
        }
        law = next;
    }
    Ok(law)
}

/// Exact `E[ρ(X_n, Y_n(m, x_m))]` with `X_m ~ μ_m`.
pub fn exact_pw_expectation<S: Scalar>(
    chain: &LeveledChain<S>,
    m: i32,
    x_m: usize,
    n: i32,
    rho: &LevelMetric<S>,
    cap: usize,
) -> Result<S> {
    let mu = chain.marginal_at(m)?;
    if x_m >= mu.len() {
        return Err(Error::UnknownState(format!("index {x_m} at level {m}")));
    }
    ensure_same(rho.space(), chain.space(n)?)?;
    let init = JointLaw::with_fixed_second(mu, x_m);
    Ok(common_innovation_law(chain, m, &init, n, cap)?.expect(rho))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartPolicy {
    /// The state whose conditional law at the target level is closest (in
    /// Kantorovich distance) to the unconditional one.
    #[default]
    MinKantorovich,
    /// The median of the level's marginal (mode for partially ordered levels).
    Median,
}

/// Picks the fixed past state `x_m` for coupling experiments.
pub fn choose_start<S: Scalar>(
    chain: &LeveledChain<S>,
    m: i32,
    n: i32,
    rho_n: &LevelMetric<S>,
    policy: StartPolicy,
) -> Result<usize> {
    let mu_m = chain.marginal_at(m)?;
    match policy {
        StartPolicy::Median => {
            if mu_m.space().is_total() {
                let half = S::from_ratio(1, 2);
                let cdf = mu_m.cdf()?;
                Ok(cdf.iter().position(|c| *c >= half).unwrap_or(cdf.len() - 1))
            } else {
                let mut best = 0;
                for (i, w) in mu_m.weights().iter().enumerate() {
                    if *w > mu_m.weights()[best] {
                        best = i;
                    }
                }
                Ok(best)
            }
        }
        StartPolicy::MinKantorovich => {
            let mu_n = chain.marginal_at(n)?;
            let composed = chain.compose_kernels(m, n)?;
            let dists: Vec<S> = (0..mu_m.len())
                .into_par_iter()
                .map(|x| kantorovich(&composed.row_dist(x), mu_n, rho_n))
                .collect::<Result<_>>()?;
            let mut best = 0;
            for (i, d) in dists.iter().enumerate() {
                if d.to_f64() < dists[best].to_f64() - 1e-15 || (S::TOL == 0.0 && *d < dists[best]) {
                    best = i;
                }
            }
            Ok(best)
        }
    }
}

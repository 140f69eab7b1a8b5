use rayon::prelude::*;

use crate::chain::{common_innovation_law, JointLaw, LeveledChain};
use crate::error::{Error, Result};
use crate::probcore::{ensure_same, Dist};
use crate::scalar::Scalar;
use crate::transport::{kantorovich, kantorovich_lp, lift_metric, LevelMetric, LiftStrategy};

/// Intrinsic metrics `ρ_n` for `n = n0, n0 − 1, ..., m`, each the Kantorovich
/// lift of the one above through the chain's kernel.
#[derive(Debug, Clone)]
pub struct MetricLadder<S> {
    n0: i32,
    metrics: Vec<LevelMetric<S>>,
}

impl<S: Scalar> MetricLadder<S> {
    pub fn top(&self) -> i32 {
        self.n0
    }

    pub fn bottom(&self) -> i32 {
        self.n0 - self.metrics.len() as i32 + 1
    }

    pub fn initial(&self) -> &LevelMetric<S> {
        &self.metrics[0]
    }

    pub fn metric(&self, level: i32) -> Result<&LevelMetric<S>> {
        if level > self.n0 || level < self.bottom() {
            return Err(Error::LevelOutOfWindow {
                level,
                lo: self.bottom(),
                hi: self.n0,
            });
        }
        Ok(&self.metrics[(self.n0 - level) as usize])
    }

    /// `(level, metric)` from the top down.
    pub fn iter(&self) -> impl Iterator<Item = (i32, &LevelMetric<S>)> {
        self.metrics
            .iter()
            .enumerate()
            .map(move |(i, m)| (self.n0 - i as i32, m))
    }
}

pub fn intrinsic_metrics<S: Scalar>(
    chain: &LeveledChain<S>,
    n0: i32,
    rho0: LevelMetric<S>,
    m: i32,
    strategy: LiftStrategy,
) -> Result<MetricLadder<S>> {
    if m > n0 {
        return Err(Error::InvalidLevels(format!("need m <= n0, got m = {m}, n0 = {n0}")));
    }
    ensure_same(rho0.space(), chain.space(n0)?)?;
    chain.space(m)?;
    let mut metrics = Vec::with_capacity((n0 - m + 1) as usize);
    metrics.push(rho0);
    for level in (m..n0).rev() {
        let k = chain.kernel(level + 1)?;
        let next = lift_metric(metrics.last().expect("seeded"), &k, strategy)?;
        metrics.push(next);
    }
    Ok(MetricLadder { n0, metrics })
}

/// `E[ρ(X, X′)]` for independent `X, X′ ~ μ`.
pub fn expected_distance<S: Scalar>(mu: &Dist<S>, rho: &LevelMetric<S>) -> Result<S> {
    ensure_same(mu.space(), rho.space())?;
    let support = mu.support();
    if let Some(pos) = rho.positions() {
        // Line metric: sort by position and use the prefix-mass identity
        // Σ_{i<j} a_i a_j (p_j − p_i) = Σ_j a_j (p_j A_j − B_j).
        let mut pts: Vec<(S, S)> = support.iter().map(|(i, w)| (pos[*i].clone(), w.clone())).collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable"));
        let (mut mass, mut moment, mut acc) = (S::zero(), S::zero(), S::zero());
        for (p, w) in pts {
            acc += &(w.clone() * (p.clone() * mass.clone() - moment.clone()));
            mass += &w;
            moment += &(w * p);
        }
        return Ok(acc * S::from_int(2));
    }
    let mut acc = S::zero();
    for (a, (i, wi)) in support.iter().enumerate() {
        for (j, wj) in &support[a + 1..] {
            acc += &(wi.clone() * wj.clone() * rho.get(*i, *j));
        }
    }
    Ok(acc * S::from_int(2))
}

/// The V′ statistic at `level`: expected ladder distance of two independent
/// copies drawn from the marginal.
pub fn vprime_statistic<S: Scalar>(chain: &LeveledChain<S>, ladder: &MetricLadder<S>, level: i32) -> Result<S> {
    expected_distance(chain.marginal_at(level)?, ladder.metric(level)?)
}

/// `s_m = Σ_x μ_m(x) K_ρ(ℒ(X_n | X_m = x), μ_n)`.
pub fn tail_criterion_statistic<S: Scalar>(chain: &LeveledChain<S>, n: i32, m: i32, rho: &LevelMetric<S>) -> Result<S> {
    ensure_same(rho.space(), chain.space(n)?)?;
    let composed = chain.compose_kernels(m, n)?;
    let mu_n = chain.marginal_at(n)?;
    let support = chain.marginal_at(m)?.support();
    let terms: Vec<S> = support
        .par_iter()
        .map(|(x, w)| Ok(w.clone() * kantorovich(&composed.row_dist(*x), mu_n, rho)?))
        .collect::<Result<_>>()?;
    let mut acc = S::zero();
    for t in &terms {
        acc += t;
    }
    Ok(acc)
}

/// Outcome of an identity check over many pairs.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum CheckOutcome {
    Pass {
        checked: usize,
    },
    Fail {
        level: i32,
        pair: (String, String),
        detail: String,
    },
    NotApplicable {
        reason: String,
    },
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CheckOutcome::Pass { .. })
    }
}

/// At `level`, for every pair `(y, z)`: the ladder value, the Kantorovich
/// distance between the composed conditional laws at the ladder top, and the
/// common-innovation expectation started from `(y, z)` all coincide.
pub fn vprime_equals_conditional_kantorovich<S: Scalar>(
    chain: &LeveledChain<S>,
    ladder: &MetricLadder<S>,
    level: i32,
    cap: usize,
) -> Result<CheckOutcome> {
    let n0 = ladder.top();
    let rho0 = ladder.initial();
    if !rho0.is_linear() {
        return Ok(CheckOutcome::NotApplicable {
            reason: "initial metric is not linear".into(),
        });
    }
    let space = chain.space(level)?.clone();
    if !space.is_total() {
        return Ok(CheckOutcome::NotApplicable {
            reason: "levels are not totally ordered".into(),
        });
    }
    for l in (level + 1)..=n0 {
        if !chain.kernel(l)?.is_monotonic()? {
            return Ok(CheckOutcome::NotApplicable {
                reason: format!("kernel into level {l} is not monotonic"),
            });
        }
    }
    let rho = ladder.metric(level)?;
    if level == n0 {
        return Ok(CheckOutcome::Pass { checked: 0 });
    }
    let composed = chain.compose_kernels(level, n0)?;
    let pairs: Vec<(usize, usize)> = (0..space.len())
        .flat_map(|y| ((y + 1)..space.len()).map(move |z| (y, z)))
        .collect();
    let results: Vec<Option<String>> = pairs
        .par_iter()
        .map(|&(y, z)| {
            let r = rho.get(y, z);
            let k = kantorovich_lp(&composed.row_dist(y), &composed.row_dist(z), rho0)?;
            let e = common_innovation_law(chain, level, &JointLaw::point(space.clone(), y, z), n0, cap)?.expect(rho0);
            let ok = r.approx_eq(&k, S::TOL) && r.approx_eq(&e, S::TOL);
            Ok((!ok).then(|| {
                format!(
                    "ladder {} / composed {} / coupling {}",
                    r.to_repr(),
                    k.to_repr(),
                    e.to_repr()
                )
            }))
        })
        .collect::<Result<_>>()?;
    for (&(y, z), bad) in pairs.iter().zip(results) {
        if let Some(detail) = bad {
            return Ok(CheckOutcome::Fail {
                level,
                pair: (space.state_name(y), space.state_name(z)),
                detail,
            });
        }
    }
    Ok(CheckOutcome::Pass { checked: pairs.len() })
}

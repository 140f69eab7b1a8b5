use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bratteli::wellordered_coupling_multipascal;
use crate::chain::{summarize, Innovations, LevelKernel, LeveledChain};
use crate::error::{Error, Result};
use crate::probcore::{quantile_coupling, CouplingPlan};
use crate::scalar::Scalar;
use crate::transport::LevelMetric;

/// Builds couplings of the rows of two states for the kernel into `level`.
pub trait PairCoupler<S: Scalar>: Send + Sync {
    fn name(&self) -> &'static str;
    /// Rows are the law of the step from `x`, columns the step from `xp`.
    fn couple(&self, chain: &LeveledChain<S>, level: i32, x: usize, xp: usize) -> Result<CouplingPlan<S>>;
}

/// Quantile coupling; well-ordered for monotonic kernels on a total order.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuantileCoupler;

impl<S: Scalar> PairCoupler<S> for QuantileCoupler {
    fn name(&self) -> &'static str {
        "quantile"
    }

    fn couple(&self, chain: &LeveledChain<S>, level: i32, x: usize, xp: usize) -> Result<CouplingPlan<S>> {
        let k = chain.kernel(level)?;
        quantile_coupling(&k.row_dist(x), &k.row_dist(xp))
    }
}

/// The partition coupling of the d-dimensional Pascal graph.
#[derive(Debug, Clone, Copy, Default)]
pub struct MultipascalCoupler;

impl<S: Scalar> PairCoupler<S> for MultipascalCoupler {
    fn name(&self) -> &'static str {
        "multipascal-partition"
    }

    fn couple(&self, chain: &LeveledChain<S>, level: i32, x: usize, xp: usize) -> Result<CouplingPlan<S>> {
        wellordered_coupling_multipascal(chain.space(level - 1)?, chain.space(level)?, x, xp)
    }
}

/// Square walk: both walkers flip the same coordinate. Not well-ordered in
/// general (no such coupling exists), but the natural synchronous choice.
#[derive(Debug, Clone, Copy, Default)]
pub struct SquareFlipCoupler;

impl<S: Scalar> PairCoupler<S> for SquareFlipCoupler {
    fn name(&self) -> &'static str {
        "same-coordinate-flip"
    }

    fn couple(&self, chain: &LeveledChain<S>, level: i32, x: usize, xp: usize) -> Result<CouplingPlan<S>> {
        let (from, to) = (chain.space(level - 1)?, chain.space(level)?);
        let flip = |s: usize, k: usize| {
            let mut c = from
                .coord(s)
                .ok_or_else(|| Error::UnknownState(format!("{s}")))?
                .to_vec();
            c[k] = -c[k];
            to.index_of_coords(&c)
                .ok_or_else(|| Error::UnknownState(format!("{c:?}")))
        };
        let d = from
            .dimension()
            .ok_or_else(|| Error::DimensionMismatch("square walk needs coordinates".into()))?;
        let w = S::from_ratio(1, d as i64);
        let entries = (0..d)
            .map(|k| Ok(((flip(x, k)?, flip(xp, k)?), w.clone())))
            .collect::<Result<Vec<_>>>()?;
        CouplingPlan::from_entries(to.clone(), to.clone(), entries)
    }
}

/// Inverse-CDF draw from sparse weights in stored order.
fn sample_row(row: &[(usize, f64)], u: f64) -> usize {
    let mut acc = 0.0;
    for (y, w) in row {
        acc += w;
        if u < acc {
            return *y;
        }
    }
    row.last().expect("nonempty row").0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CascadeRow {
    /// Estimates `E[ρ(Z^j_n, Z^{j+1}_n)]`.
    pub j: usize,
    pub level: i32,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CascadeTable {
    pub chain: String,
    pub coupler: String,
    /// `(n_j, x_{n_j})` in order of decreasing level.
    pub starts: Vec<(i32, String)>,
    pub trials: u64,
    pub seed: u64,
    pub rows: Vec<CascadeRow>,
}

impl CascadeTable {
    /// Means for consecutive `j` at `level`.
    pub fn column(&self, level: i32) -> Vec<f64> {
        self.rows.iter().filter(|r| r.level == level).map(|r| r.mean).collect()
    }
}

/// Simulates the processes `Z^j`: `Z^j` starts at `x_{n_j}`, moves on its own
/// innovations up to `n_{j−1}`, and from there follows `Z^{j−1}` through the
/// coupler's plan (sampled from the conditional row given `Z^{j−1}`'s step).
/// `eval` lists the levels and metrics where distances are recorded.
pub fn coupling_cascade_simulation(
    chain: &LeveledChain<f64>,
    coupler: &dyn PairCoupler<f64>,
    starts: &[(i32, usize)],
    eval: &[(i32, LevelMetric<f64>)],
    trials: u64,
    seed: u64,
) -> Result<CascadeTable> {
    if starts.len() < 2 {
        return Err(Error::InvalidParameter(
            "a cascade needs at least two start levels".into(),
        ));
    }
    if starts.windows(2).any(|w| w[1].0 >= w[0].0) {
        return Err(Error::InvalidLevels("start levels must be strictly decreasing".into()));
    }
    if eval.is_empty() || trials == 0 {
        return Err(Error::InvalidParameter(
            "need at least one evaluation level and one trial".into(),
        ));
    }
    for (n, x) in starts {
        if *x >= chain.space(*n)?.len() {
            return Err(Error::UnknownState(format!("state {x} at level {n}")));
        }
    }
    let top = eval.iter().map(|e| e.0).max().expect("nonempty");
    for (n, rho) in eval {
        crate::probcore::ensure_same(rho.space(), chain.space(*n)?)?;
    }
    if starts[0].0 >= top {
        return Err(Error::InvalidLevels(format!(
            "first start {} must lie below level {top}",
            starts[0].0
        )));
    }
    let kernels: Vec<std::sync::Arc<LevelKernel<f64>>> = ((starts.last().expect("nonempty").0 + 1)..=top)
        .map(|l| chain.kernel(l))
        .collect::<Result<_>>()?;
    let base = starts.last().expect("nonempty").0;
    let kernel = |l: i32| &kernels[(l - base - 1) as usize];
    let inn = Innovations::new(seed);
    let slots: Vec<(usize, usize)> = (0..starts.len() - 1)
        .flat_map(|j| {
            eval.iter()
                .enumerate()
                .filter(move |(_, e)| e.0 >= starts[j].0)
                .map(move |(e, _)| (j, e))
        })
        .collect();

    let samples: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut paths: Vec<Vec<usize>> = Vec::with_capacity(starts.len());
            for (j, &(nj, xj)) in starts.iter().enumerate() {
                let mut path = Vec::with_capacity((top - nj + 1) as usize);
                path.push(xj);
                for l in (nj + 1)..=top {
                    let prev = *path.last().expect("seeded");
                    let u = inn.uniform(trial, j as u32, l);
                    let next = if j == 0 || l <= starts[j - 1].0 {
                        sample_row(kernel(l).row(prev), u)
                    } else {
                        let (lead, n_lead) = (&paths[j - 1], starts[j - 1].0);
                        let from = lead[(l - 1 - n_lead) as usize];
                        let to = lead[(l - n_lead) as usize];
                        let plan = coupler.couple(chain, l, from, prev)?;
                        sample_row(&plan.conditional_row(to), u)
                    };
                    path.push(next);
                }
                paths.push(path);
            }
            Ok(slots
                .iter()
                .map(|&(j, e)| {
                    let (n, rho) = (&eval[e].0, &eval[e].1);
                    let a = paths[j][(n - starts[j].0) as usize];
                    let b = paths[j + 1][(n - starts[j + 1].0) as usize];
                    rho.get(a, b)
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let rows = slots
        .iter()
        .enumerate()
        .map(|(s, &(j, e))| {
            let column: Vec<f64> = samples.iter().map(|t| t[s]).collect();
            let est = summarize(&column);
            CascadeRow {
                j,
                level: eval[e].0,
                mean: est.mean,
                stderr: est.stderr,
            }
        })
        .collect();
    Ok(CascadeTable {
        chain: chain.name(),
        coupler: coupler.name().to_string(),
        starts: starts
            .iter()
            .map(|(n, x)| Ok((*n, chain.space(*n)?.state_name(*x))))
            .collect::<Result<_>>()?,
        trials,
        seed,
        rows,
    })
}

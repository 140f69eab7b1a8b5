use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::chain::{LevelKernel, LeveledChain};
use crate::error::{Error, Result};
use crate::probcore::{CouplingPlan, Dist, OrderedStateSpace, Space};
use crate::scalar::Scalar;
use crate::transport::{transport_simplex, LevelMetric, LiftStrategy};

use super::cascade::PairCoupler;
use super::ladder::{intrinsic_metrics, CheckOutcome};

/// Positive coordinate weights `a_1..a_d` summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateWeights<S> {
    weights: Vec<S>,
}

impl<S: Scalar> CoordinateWeights<S> {
    pub fn new(weights: Vec<S>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one coordinate weight is required".into(),
            ));
        }
        if let Some(w) = weights.iter().find(|w| **w <= S::zero()) {
            return Err(Error::InvalidParameter(format!(
                "coordinate weight {} is not positive",
                w.to_repr()
            )));
        }
        let mut total = S::zero();
        for w in &weights {
            total += w;
        }
        if !total.approx_eq(&S::one(), S::TOL) {
            return Err(Error::NotNormalized(format!(
                "coordinate weights sum to {}",
                total.to_repr()
            )));
        }
        Ok(Self { weights })
    }

    pub fn uniform(d: usize) -> Result<Self> {
        Self::new(vec![S::from_ratio(1, d as i64); d])
    }

    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }
}

fn coords_of(space: &Space) -> Result<&[Vec<i64>]> {
    space
        .coords()
        .ok_or_else(|| Error::DimensionMismatch(format!("level {} has no coordinates", space.level())))
}

/// Whether every support point `(Y, Y′)` of `plan` keeps the coordinatewise
/// order of `(x, x′)`: `x(k) <= x′(k)` forces `Y(k) <= Y′(k)` and likewise
/// for `>=`.
pub fn well_ordered_check<S: Scalar>(plan: &CouplingPlan<S>, x: &[i64], xp: &[i64]) -> Result<bool> {
    let (rows, cols) = (coords_of(plan.rows())?, coords_of(plan.cols())?);
    let d = x.len();
    if xp.len() != d || plan.rows().dimension() != Some(d) || plan.cols().dimension() != Some(d) {
        return Err(Error::DimensionMismatch(format!(
            "plan dimension {:?}/{:?} vs states of dimension {d} and {}",
            plan.rows().dimension(),
            plan.cols().dimension(),
            xp.len()
        )));
    }
    Ok(plan.entries().filter(|(_, _, w)| !w.is_negligible()).all(|(i, j, _)| {
        (0..d).all(|k| {
            let (y, yp) = (rows[i][k], cols[j][k]);
            (x[k] > xp[k] || y <= yp) && (x[k] < xp[k] || y >= yp)
        })
    }))
}

/// Law of coordinate `k` of the next state, started from source state `x`.
fn coordinate_row<S: Scalar>(kernel: &LevelKernel<S>, coords: &[Vec<i64>], x: usize, k: usize) -> BTreeMap<i64, S> {
    let mut law = BTreeMap::new();
    for (y, w) in kernel.row(x) {
        *law.entry(coords[*y][k]).or_insert_with(S::zero) += w;
    }
    law.retain(|_, w| !w.is_negligible());
    law
}

fn same_law<S: Scalar>(a: &BTreeMap<i64, S>, b: &BTreeMap<i64, S>) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|((ka, wa), (kb, wb))| ka == kb && wa.approx_eq(wb, S::TOL))
}

/// Whether `ℒ(X_{n+1}(k) | X_n = v)` depends on `v` only through `v(k)`, at
/// every transition of the window.
pub fn coordinate_immersion_check<S: Scalar>(chain: &LeveledChain<S>, k: usize) -> Result<bool> {
    for level in (chain.depth() + 1)..=0 {
        if !kernel_immerses(chain.kernel(level)?.as_ref(), k)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub(crate) fn kernel_immerses<S: Scalar>(kernel: &LevelKernel<S>, k: usize) -> Result<bool> {
    let (src, dst) = (coords_of(kernel.source())?, coords_of(kernel.target())?);
    if kernel.source().dimension().is_none_or(|d| k >= d) {
        return Err(Error::DimensionMismatch(format!("coordinate {k} out of range")));
    }
    let mut seen: BTreeMap<i64, BTreeMap<i64, S>> = BTreeMap::new();
    for (x, c) in src.iter().enumerate() {
        let law = coordinate_row(kernel, dst, x, k);
        match seen.get(&c[k]) {
            Some(prev) if !same_law(prev, &law) => return Ok(false),
            Some(_) => {}
            None => {
                seen.insert(c[k], law);
            }
        }
    }
    Ok(true)
}

fn project_space(space: &Space, k: usize) -> Result<(Space, Vec<usize>)> {
    let coords = coords_of(space)?;
    let values: Vec<i64> = coords
        .iter()
        .map(|c| c[k])
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let proj = OrderedStateSpace::integers(space.level(), values.clone())?;
    let map = coords
        .iter()
        .map(|c| values.binary_search(&c[k]).expect("value present"))
        .collect();
    Ok((proj, map))
}

/// The chain of coordinate `k` alone, on integer levels. Requires immersion.
pub fn coordinate_projection_chain<S: Scalar>(chain: &LeveledChain<S>, k: usize) -> Result<LeveledChain<S>> {
    if !coordinate_immersion_check(chain, k)? {
        return Err(Error::InvalidParameter(format!(
            "coordinate {k} is not immersed in the chain"
        )));
    }
    let (seed_space, seed_map) = project_space(chain.space(chain.depth())?, k)?;
    let mut seed_w = vec![S::zero(); seed_space.len()];
    for (x, w) in chain.seed().weights().iter().enumerate() {
        seed_w[seed_map[x]] += w;
    }
    let seed = Dist::new(seed_space, seed_w)?;
    let mut kernels = Vec::new();
    for level in (chain.depth() + 1)..=0 {
        let kernel = chain.kernel(level)?;
        let (src, src_map) = project_space(kernel.source(), k)?;
        let (dst, dst_map) = project_space(kernel.target(), k)?;
        let mut rows: Vec<Option<Vec<(usize, S)>>> = vec![None; src.len()];
        for x in 0..kernel.source().len() {
            let slot = &mut rows[src_map[x]];
            if slot.is_none() {
                *slot = Some(kernel.row(x).iter().map(|(y, w)| (dst_map[*y], w.clone())).collect());
            }
        }
        let rows = rows.into_iter().map(|r| r.expect("every value has a state")).collect();
        kernels.push(LevelKernel::new(src, dst, rows)?);
    }
    LeveledChain::from_kernels(&format!("{}[{k}]", chain.name()), seed, kernels)
}

/// Whether the rows of `x` and `x′` admit a well-ordered coupling, decided by
/// a transportation problem with unit cost on order-breaking cells.
pub fn wellordered_coupling_exists<S: Scalar>(kernel: &LevelKernel<S>, x: usize, xp: usize) -> Result<bool> {
    let (src, dst) = (coords_of(kernel.source())?, coords_of(kernel.target())?);
    let (a, b) = (kernel.row(x), kernel.row(xp));
    let (cx, cxp) = (&src[x], &src[xp]);
    let cost: Vec<S> = a
        .iter()
        .flat_map(|(i, _)| {
            b.iter().map(move |(j, _)| {
                let ok = (0..cx.len()).all(|k| {
                    let (y, yp) = (dst[*i][k], dst[*j][k]);
                    (cx[k] > cxp[k] || y <= yp) && (cx[k] < cxp[k] || y >= yp)
                });
                if ok {
                    S::zero()
                } else {
                    S::one()
                }
            })
        })
        .collect();
    let supply: Vec<S> = a.iter().map(|e| e.1.clone()).collect();
    let demand: Vec<S> = b.iter().map(|e| e.1.clone()).collect();
    Ok(transport_simplex(&supply, &demand, &cost)?.value.is_negligible())
}

/// Strong monotonicity over the window: every coordinate is immersed and every
/// pair of states at every transition has a well-ordered coupling (built by
/// `coupler` and verified when given, otherwise decided by feasibility).
pub fn strong_monotonicity_check<S: Scalar>(
    chain: &LeveledChain<S>,
    coupler: Option<&dyn PairCoupler<S>>,
) -> Result<CheckOutcome> {
    let d = match chain.space(chain.depth())?.dimension() {
        Some(d) => d,
        None => {
            return Ok(CheckOutcome::NotApplicable {
                reason: "levels carry no coordinates".into(),
            })
        }
    };
    for k in 0..d {
        if !coordinate_immersion_check(chain, k)? {
            return Ok(CheckOutcome::NotApplicable {
                reason: format!("coordinate {k} is not immersed"),
            });
        }
    }
    let mut checked = 0;
    for level in (chain.depth() + 1)..=0 {
        let kernel = chain.kernel(level)?;
        let src = kernel.source().clone();
        let n = src.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        let bad = pairs
            .par_iter()
            .map(|&(x, xp)| {
                let ok = match coupler {
                    Some(c) => {
                        let plan = c.couple(chain, level, x, xp)?;
                        plan.check_margins(&kernel.row_dist(x), &kernel.row_dist(xp))
                            && well_ordered_check(&plan, src.coord(x).expect("coords"), src.coord(xp).expect("coords"))?
                    }
                    None => wellordered_coupling_exists(&kernel, x, xp)?,
                };
                Ok((!ok).then_some((x, xp)))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .next();
        if let Some((x, xp)) = bad {
            return Ok(CheckOutcome::Fail {
                level: level - 1,
                pair: (src.state_name(x), src.state_name(xp)),
                detail: "no well-ordered coupling of the two rows".into(),
            });
        }
        checked += pairs.len();
    }
    Ok(CheckOutcome::Pass { checked })
}

/// The joint ladder from `Σ a_k |x(k) − x′(k)|` at `n0` against the weighted
/// sum of the coordinate ladders from `|·|`, level by level down to the
/// chain's depth.
pub fn metric_decomposition_check<S: Scalar>(
    chain: &LeveledChain<S>,
    n0: i32,
    weights: &CoordinateWeights<S>,
    coupler: Option<&dyn PairCoupler<S>>,
) -> Result<CheckOutcome> {
    let d = weights.dimension();
    let top = chain.space(n0)?.clone();
    if top.dimension() != Some(d) {
        return Err(Error::DimensionMismatch(format!(
            "{d} weights for levels of dimension {:?}",
            top.dimension()
        )));
    }
    let pre = strong_monotonicity_check(chain, coupler)?;
    if !pre.passed() {
        let reason = match pre {
            CheckOutcome::Fail { level, pair, .. } => {
                format!(
                    "not strongly monotonic: no well-ordered coupling for {} and {} at level {level}",
                    pair.0, pair.1
                )
            }
            CheckOutcome::NotApplicable { reason } => reason,
            CheckOutcome::Pass { .. } => unreachable!(),
        };
        return Ok(CheckOutcome::NotApplicable { reason });
    }
    let joint = intrinsic_metrics(
        chain,
        n0,
        LevelMetric::weighted_l1(top, weights.weights())?,
        chain.depth(),
        LiftStrategy::Auto,
    )?;
    let mut ladders = Vec::with_capacity(d);
    for k in 0..d {
        let proj = coordinate_projection_chain(chain, k)?;
        let rho0 = LevelMetric::absolute(proj.space(n0)?.clone())?;
        ladders.push((
            proj.clone(),
            intrinsic_metrics(&proj, n0, rho0, proj.depth(), LiftStrategy::Auto)?,
        ));
    }
    let mut checked = 0;
    for (level, rho) in joint.iter() {
        let space = rho.space();
        let coords = coords_of(space)?;
        let index: Vec<Vec<usize>> = (0..d)
            .map(|k| {
                let ps = ladders[k].0.space(level).expect("same window");
                coords
                    .iter()
                    .map(|c| ps.index_of_label(c[k]).expect("projected value"))
                    .collect()
            })
            .collect();
        let metrics: Vec<&LevelMetric<S>> = ladders
            .iter()
            .map(|(_, l)| l.metric(level).expect("same window"))
            .collect();
        for x in 0..space.len() {
            for xp in (x + 1)..space.len() {
                let mut sum = S::zero();
                for k in 0..d {
                    sum += &(weights.weights()[k].clone() * metrics[k].get(index[k][x], index[k][xp]));
                }
                let lhs = rho.get(x, xp);
                if !lhs.approx_eq(&sum, S::TOL) {
                    return Ok(CheckOutcome::Fail {
                        level,
                        pair: (space.state_name(x), space.state_name(xp)),
                        detail: format!("joint {} vs coordinate sum {}", lhs.to_repr(), sum.to_repr()),
                    });
                }
                checked += 1;
            }
        }
    }
    Ok(CheckOutcome::Pass { checked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bratteli::{multinomial_multipascal_chain, wellordered_coupling_multipascal};
    use crate::chain::square_walk_chain;
    use crate::scalar::Exact;
    use crate::standardness::MultipascalCoupler;

    fn q(n: i64, d: i64) -> Exact {
        Exact::from_ratio(n, d)
    }

    #[test]
    fn weights_validation() {
        assert!(CoordinateWeights::new(vec![q(1, 2), q(1, 2)]).is_ok());
        assert!(matches!(
            CoordinateWeights::new(vec![q(1, 2), q(1, 3)]),
            Err(Error::NotNormalized(_))
        ));
        assert!(matches!(
            CoordinateWeights::new(vec![q(3, 2), q(-1, 2)]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn well_ordered_basics() {
        let s = OrderedStateSpace::coordinates(0, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]).unwrap();
        let mu = Dist::from_sparse(s.clone(), &[(0, q(1, 2)), (2, q(1, 2))]).unwrap();
        assert!(well_ordered_check(&CouplingPlan::diagonal(&mu), &[0, 0], &[0, 0]).unwrap());
        // x ≤ x′ in both coordinates; the product plan puts mass on ((1,0),(0,1)).
        let nu = Dist::from_sparse(s.clone(), &[(1, q(1, 2)), (3, q(1, 2))]).unwrap();
        assert!(!well_ordered_check(&CouplingPlan::product(&mu, &nu), &[0, 0], &[0, 1]).unwrap());
        let good =
            CouplingPlan::from_entries(s.clone(), s.clone(), vec![((0, 1), q(1, 2)), ((2, 3), q(1, 2))]).unwrap();
        assert!(well_ordered_check(&good, &[0, 0], &[0, 1]).unwrap());
        assert!(matches!(
            well_ordered_check(&good, &[0], &[0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn multipascal_partition_plans_are_well_ordered() {
        let c = multinomial_multipascal_chain(&[q(1, 3), q(1, 3), q(1, 3)], -6).unwrap();
        let (from, to) = (c.chain.space(-5).unwrap(), c.chain.space(-4).unwrap());
        let k = c.chain.kernel(-4).unwrap();
        for v in 0..from.len() {
            for vp in 0..from.len() {
                let plan = wellordered_coupling_multipascal::<Exact>(from, to, v, vp).unwrap();
                assert!(plan.check_margins(&k.row_dist(v), &k.row_dist(vp)));
                assert!(well_ordered_check(&plan, from.coord(v).unwrap(), from.coord(vp).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn immersion_and_projection() {
        let sq = square_walk_chain::<Exact>(-3).unwrap();
        assert!(coordinate_immersion_check(&sq, 0).unwrap());
        assert!(coordinate_immersion_check(&sq, 1).unwrap());
        let c = multinomial_multipascal_chain(&[q(1, 2), q(1, 3), q(1, 6)], -5).unwrap();
        for k in 0..3 {
            assert!(coordinate_immersion_check(&c.chain, k).unwrap());
        }
        let p = coordinate_projection_chain(&c.chain, 0).unwrap();
        // Coordinate 0 at level -5 is Bin(5, 1/2); one step removes a unit with probability v/5.
        assert_eq!(p.kernel(-4).unwrap().get(5, 4), q(1, 1));
        assert_eq!(p.kernel(-4).unwrap().get(2, 1), q(2, 5));
        assert_eq!(p.marginal_at(-1).unwrap().weights(), &[q(1, 2), q(1, 2)]);
    }

    #[test]
    fn immersion_fails_when_other_coordinate_matters() {
        let s0 = OrderedStateSpace::coordinates(-1, vec![vec![0, 0], vec![0, 1]]).unwrap();
        let s1 = OrderedStateSpace::coordinates(0, vec![vec![0, 0], vec![1, 0]]).unwrap();
        let k = LevelKernel::new(s0.clone(), s1, vec![vec![(0, q(1, 1))], vec![(1, q(1, 1))]]).unwrap();
        let c = LeveledChain::from_kernels("toy", Dist::uniform(s0), vec![k]).unwrap();
        assert!(!coordinate_immersion_check(&c, 0).unwrap());
        assert!(coordinate_immersion_check(&c, 1).unwrap());
    }

    #[test]
    fn decomposition_multipascal_and_square_walk() {
        let c = multinomial_multipascal_chain(&[q(1, 3), q(1, 3), q(1, 3)], -6).unwrap();
        let w = CoordinateWeights::uniform(3).unwrap();
        let out = metric_decomposition_check(&c.chain, -1, &w, Some(&MultipascalCoupler)).unwrap();
        assert!(out.passed(), "{out:?}");
        let out = metric_decomposition_check(&c.chain, -1, &w, None).unwrap();
        assert!(out.passed(), "{out:?}");

        let sq = square_walk_chain::<Exact>(-3).unwrap();
        let w = CoordinateWeights::uniform(2).unwrap();
        let out = metric_decomposition_check(&sq, 0, &w, None).unwrap();
        assert!(matches!(out, CheckOutcome::NotApplicable { .. }), "{out:?}");
    }
}

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainRule, LevelKernel, LeveledChain};
use crate::error::{Error, Result};
use crate::probcore::{Dist, Space};
use crate::scalar::Scalar;

use super::graph::{euler_graph, multipascal_graph, pascal_graph, path_counts, BratteliGraph, PathCount};

/// Central kernel from level `n` to `n + 1`:
/// `K(v, w) = mult(v, w) dim(w) / dim(v)`.
pub fn central_kernel<S: Scalar>(g: &BratteliGraph, dims: &PathCount, n: i32) -> Result<LevelKernel<S>> {
    let source = g.space(n)?.clone();
    let target = g.space(n + 1)?.clone();
    let rows = (0..source.len())
        .map(|v| {
            let den = BigInt::from(dims.dim(n, v).clone());
            g.up(n, v).map(|out| {
                out.iter()
                    .map(|&(w, m)| {
                        let num = BigInt::from(dims.dim(n + 1, w) * m);
                        (w, S::from_big_ratio(&num, &den))
                    })
                    .collect()
            })
        })
        .collect::<Result<Vec<Vec<(usize, S)>>>>()?;
    LevelKernel::new(source, target, rows)
}

/// The measure fixing a central chain's marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeasureTag {
    Bernoulli {
        p: String,
    },
    SymmetricEuler,
    Multinomial {
        theta: Vec<String>,
    },
    /// Uniform over paths starting at the window's bottom level.
    UniformPath,
}

/// Chain rule whose kernels are the central kernels of a graph.
pub struct CentralRule {
    graph: Arc<BratteliGraph>,
    dims: Arc<PathCount>,
}

impl CentralRule {
    pub fn new(graph: Arc<BratteliGraph>) -> Self {
        let dims = Arc::new(path_counts(&graph));
        Self { graph, dims }
    }
}

impl<S: Scalar> ChainRule<S> for CentralRule {
    fn name(&self) -> String {
        self.graph.name()
    }

    fn space(&self, level: i32) -> Result<Space> {
        self.graph.space(level).cloned()
    }

    fn kernel(&self, level: i32) -> Result<LevelKernel<S>> {
        central_kernel(&self.graph, &self.dims, level - 1)
    }
}

/// A graph, its path counts and a central Markov chain on it.
#[derive(Debug, Clone)]
pub struct CentralChain<S: Scalar> {
    pub graph: Arc<BratteliGraph>,
    pub dims: Arc<PathCount>,
    pub measure: MeasureTag,
    pub chain: LeveledChain<S>,
}

impl<S: Scalar> CentralChain<S> {
    /// Central chain over the whole graph window with the given bottom-level law.
    pub fn new(
        graph: BratteliGraph,
        measure: MeasureTag,
        seed: impl FnOnce(&BratteliGraph, &PathCount) -> Result<Dist<S>>,
    ) -> Result<Self> {
        let graph = Arc::new(graph);
        let rule = CentralRule::new(graph.clone());
        let dims = rule.dims.clone();
        let seed = seed(&graph, &dims)?;
        let chain = LeveledChain::new(Arc::new(rule), graph.depth(), seed)?;
        Ok(Self {
            graph,
            dims,
            measure,
            chain,
        })
    }

    pub fn depth(&self) -> i32 {
        self.graph.depth()
    }
}

fn check_probability<S: Scalar>(p: &S) -> Result<()> {
    if !(p > &S::zero() && p < &S::one()) {
        return Err(Error::InvalidParameter(format!(
            "p = {} must lie in (0, 1)",
            p.to_repr()
        )));
    }
    Ok(())
}

fn big_to_scalar<S: Scalar>(x: &BigUint) -> S {
    S::from_big_ratio(&BigInt::from(x.clone()), &BigInt::one())
}

/// Pascal chain with marginals Bin(|n|, p).
pub fn bernoulli_pascal_chain<S: Scalar>(p: S, depth: i32) -> Result<CentralChain<S>> {
    check_probability(&p)?;
    let q = S::one() - p.clone();
    let measure = MeasureTag::Bernoulli { p: p.to_repr() };
    CentralChain::new(pascal_graph(depth)?, measure, |g, dims| {
        let space = g.space(depth)?.clone();
        let a = depth.unsigned_abs();
        let w = (0..=a)
            .map(|v| big_to_scalar::<S>(dims.dim(depth, v as usize)) * p.powi(v) * q.powi(a - v))
            .collect();
        Dist::new(space, w)
    })
}

/// Backward marginals of the symmetric Euler measure: from `v` at level `n`
/// the walk goes down to `v` with probability `(v+1)/(|n|+2)` and to `v + 1`
/// with probability `(|n|+1−v)/(|n|+2)`. Entry `i` is the law at level `−i`.
pub fn symmetric_euler_marginals<S: Scalar>(depth: i32) -> Vec<Vec<S>> {
    let mut out = vec![vec![S::one()]];
    for a in 0..depth.unsigned_abs() as i64 {
        let prev = out.last().expect("seeded");
        let mut next = vec![S::zero(); a as usize + 2];
        for (v, w) in prev.iter().enumerate() {
            let v = v as i64;
            next[v as usize] += &(w.clone() * S::from_ratio(v + 1, a + 2));
            next[v as usize + 1] += &(w.clone() * S::from_ratio(a + 1 - v, a + 2));
        }
        out.push(next);
    }
    out
}

/// Euler chain under the symmetric central measure; the seed is the
/// backward-propagated law at the bottom level.
pub fn symmetric_euler_chain<S: Scalar>(depth: i32) -> Result<CentralChain<S>> {
    CentralChain::new(euler_graph(depth)?, MeasureTag::SymmetricEuler, |g, _| {
        let mut marg = symmetric_euler_marginals::<S>(depth);
        Dist::new(g.space(depth)?.clone(), marg.pop().expect("nonempty"))
    })
}

/// Forward kernel from level `n` to `n + 1` obtained from the backward rule by
/// Bayes: `μ_{n+1}(w) B(w → v) / μ_n(v)`.
pub fn symmetric_euler_forward_kernel<S: Scalar>(
    g: &BratteliGraph,
    n: i32,
    marginals: &[Vec<S>],
) -> Result<LevelKernel<S>> {
    let a = n.unsigned_abs() as i64;
    let lo = &marginals[a as usize];
    let hi = &marginals[a as usize - 1];
    let rows = (0..=a)
        .map(|v| {
            let mut row = Vec::with_capacity(2);
            // Down from w = v at level n+1 (|n+1| = a - 1) to v: weight (v+1)/(a+1).
            if v < a {
                row.push((
                    v as usize,
                    hi[v as usize].clone() * S::from_ratio(v + 1, a + 1) / lo[v as usize].clone(),
                ));
            }
            // Down from w = v - 1 to v: weight (a - 1 + 1 - (v - 1))/(a + 1).
            if v >= 1 {
                row.push((
                    v as usize - 1,
                    hi[v as usize - 1].clone() * S::from_ratio(a + 1 - v, a + 1) / lo[v as usize].clone(),
                ));
            }
            row
        })
        .collect();
    LevelKernel::new(g.space(n)?.clone(), g.space(n + 1)?.clone(), rows)
}

/// Probability vector with positive entries summing to one.
pub fn check_theta<S: Scalar>(theta: &[S]) -> Result<()> {
    let mut total = S::zero();
    for t in theta {
        if !t.is_positive() {
            return Err(Error::InvalidParameter(format!(
                "θ entry {} must be positive",
                t.to_repr()
            )));
        }
        total += t;
    }
    if !total.approx_eq(&S::one(), 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "θ sums to {}, expected 1",
            total.to_repr()
        )));
    }
    Ok(())
}

/// d-dimensional Pascal chain with multinomial(|n|; θ) marginals.
pub fn multinomial_multipascal_chain<S: Scalar>(theta: &[S], depth: i32) -> Result<CentralChain<S>> {
    check_theta(theta)?;
    let measure = MeasureTag::Multinomial {
        theta: theta.iter().map(Scalar::to_repr).collect(),
    };
    CentralChain::new(multipascal_graph(theta.len(), depth)?, measure, |g, dims| {
        let space = g.space(depth)?.clone();
        let w = (0..space.len())
            .map(|v| {
                let c = space.coord(v).expect("coordinates");
                let mut acc = big_to_scalar::<S>(dims.dim(depth, v));
                for (t, &k) in theta.iter().zip(c) {
                    acc = acc * t.powi(k as u32);
                }
                acc
            })
            .collect();
        Dist::new(space, w)
    })
}

/// Uniform law on paths from the bottom level: seed proportional to `dim`.
pub fn uniform_path_chain<S: Scalar>(graph: BratteliGraph) -> Result<CentralChain<S>> {
    CentralChain::new(graph, MeasureTag::UniformPath, |g, dims| {
        let depth = g.depth();
        Dist::new(
            g.space(depth)?.clone(),
            dims.level(depth).iter().map(big_to_scalar).collect(),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bratteli::{next_jump_graph, odometer_graph};
    use crate::scalar::Exact;

    fn q(n: i64, d: i64) -> Exact {
        Exact::from_ratio(n, d)
    }

    #[test]
    fn pascal_kernels_and_marginals() {
        let c = bernoulli_pascal_chain(q(1, 2), -6).unwrap();
        let k = c.chain.kernel(-1).unwrap();
        assert_eq!(k.row(1), &[(0, q(1, 2)), (1, q(1, 2))]);
        let m2 = c.chain.marginal_at(-2).unwrap();
        assert_eq!(m2.weights(), &[q(1, 4), q(1, 2), q(1, 4)]);
        let comp = c.chain.compose_kernels(-4, -1).unwrap();
        assert_eq!(comp.get(2, 1), q(2, 4));
        for v in 0..=6usize {
            assert_eq!(c.chain.compose_kernels(-6, -1).unwrap().get(v, 1), q(v as i64, 6));
        }
        assert!(bernoulli_pascal_chain(q(1, 1), -3).is_err());
        // Arbitrary p: marginals stay binomial.
        let c = bernoulli_pascal_chain(q(1, 3), -5).unwrap();
        assert_eq!(c.chain.marginal_at(-1).unwrap().weights(), &[q(2, 3), q(1, 3)]);
        assert_eq!(c.chain.kernel(0).unwrap().row(1), &[(0, q(1, 1))]);
    }

    #[test]
    fn symmetric_euler_is_central() {
        let c = symmetric_euler_chain::<Exact>(-12).unwrap();
        let marg = symmetric_euler_marginals::<Exact>(-12);
        assert_eq!(marg[1], vec![q(1, 2), q(1, 2)]);
        for n in -12..=-1 {
            let fwd = symmetric_euler_forward_kernel(&c.graph, n, &marg).unwrap();
            let central = c.chain.kernel(n + 1).unwrap();
            assert_eq!(&fwd, central.as_ref(), "level {n}");
            assert_eq!(
                c.chain.marginal_at(n).unwrap().weights(),
                marg[n.unsigned_abs() as usize].as_slice()
            );
        }
    }

    #[test]
    fn multipascal_rows() {
        let third = q(1, 3);
        let c = multinomial_multipascal_chain(&[third.clone(), third.clone(), third], -4).unwrap();
        let s = c.graph.space(-2).unwrap();
        let t = c.graph.space(-1).unwrap();
        let v = s.index_of_coords(&[1, 1, 0]).unwrap();
        let row = c.chain.kernel(-1).unwrap().row(v).to_vec();
        let a = t.index_of_coords(&[0, 1, 0]).unwrap();
        let b = t.index_of_coords(&[1, 0, 0]).unwrap();
        let mut expected = vec![(a, q(1, 2)), (b, q(1, 2))];
        expected.sort();
        assert_eq!(row, expected);
        assert!(multinomial_multipascal_chain(&[q(1, 2), q(1, 3)], -2).is_err());
    }

    #[test]
    fn gallery_chains_build() {
        let o = uniform_path_chain::<Exact>(odometer_graph(-5).unwrap()).unwrap();
        assert_eq!(o.chain.kernel(-2).unwrap().row(0), &[(0, q(1, 2)), (1, q(1, 2))]);
        let nj = uniform_path_chain::<Exact>(next_jump_graph(-6).unwrap()).unwrap();
        let u = nj.chain.marginal_at(-6).unwrap();
        assert_eq!(
            u.weights(),
            &[q(1, 64), q(1, 64), q(2, 64), q(4, 64), q(8, 64), q(16, 64), q(32, 64)]
        );
    }
}

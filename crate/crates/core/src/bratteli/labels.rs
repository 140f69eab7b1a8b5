use crate::chain::{quantile_updating, LevelKernel};
use crate::error::Result;
use crate::probcore::Space;
use crate::scalar::Scalar;

use super::central::CentralChain;

/// One labelled edge leaving a vertex: target, label within the target's
/// block (1-based), probability and the upper endpoint of its interval.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledEdge<S> {
    pub target: usize,
    pub label: u64,
    pub prob: S,
    pub upper: S,
}

/// Edge labels for one transition `n - 1 → n`.
#[derive(Debug, Clone)]
pub struct LevelLabels<S> {
    pub level: i32,
    pub source: Space,
    pub target: Space,
    /// Per source vertex: edges ordered by target, then label.
    pub edges: Vec<Vec<LabelledEdge<S>>>,
}

impl<S: Scalar> LevelLabels<S> {
    /// `h_n(v, u)`: index of the edge whose interval holds `u`.
    pub fn h(&self, v: usize, u: f64) -> usize {
        let edges = &self.edges[v];
        edges
            .iter()
            .position(|e| u < e.upper.to_f64())
            .unwrap_or(edges.len() - 1)
    }

    /// `φ_n(v, e)`: endpoint of edge `e`.
    pub fn phi(&self, v: usize, e: usize) -> usize {
        self.edges[v][e].target
    }

    /// `f_n = φ_n ∘ h_n`.
    pub fn update(&self, v: usize, u: f64) -> usize {
        self.phi(v, self.h(v, u))
    }

    /// Composite partition: consecutive edge intervals merged by endpoint,
    /// as `(upper endpoint, target)`.
    pub fn composite(&self, v: usize) -> Vec<(S, usize)> {
        let mut out: Vec<(S, usize)> = Vec::new();
        for e in &self.edges[v] {
            match out.last_mut() {
                Some(last) if last.1 == e.target => last.0 = e.upper.clone(),
                _ => out.push((e.upper.clone(), e.target)),
            }
        }
        out
    }

    /// Endpoint map nondecreasing along the label order.
    pub fn phi_monotone(&self) -> bool {
        self.edges.iter().all(|es| {
            es.windows(2)
                .all(|w| self.target.label(w[0].target) <= self.target.label(w[1].target))
        })
    }
}

/// The label process of a central chain: `ℒ(ε_n | V_{n−1} = v)` is uniform
/// within each endpoint block, blocks in increasing endpoint order.
#[derive(Debug, Clone)]
pub struct LabelProcess<S> {
    pub levels: Vec<LevelLabels<S>>,
}

impl<S: Scalar> LabelProcess<S> {
    pub fn at(&self, level: i32) -> Option<&LevelLabels<S>> {
        self.levels.iter().find(|l| l.level == level)
    }

    /// Every composite partition reproduces the quantile updating function
    /// of the central kernel, interval by interval.
    pub fn check_pushforward(&self, kernels: impl Fn(i32) -> Result<LevelKernel<S>>) -> Result<bool> {
        for lvl in &self.levels {
            let f = quantile_updating(&kernels(lvl.level)?)?;
            for v in 0..lvl.source.len() {
                let comp = lvl.composite(v);
                let part = f.partition(v);
                if comp.len() != part.len()
                    || comp
                        .iter()
                        .zip(part)
                        .any(|(a, b)| a.1 != b.1 || !a.0.approx_eq(&b.0, 1e-12))
                {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

pub fn label_process<S: Scalar>(cc: &CentralChain<S>) -> Result<LabelProcess<S>> {
    let g = &cc.graph;
    let levels = ((g.depth() + 1)..=0)
        .map(|level| {
            let n = level - 1;
            let source = g.space(n)?.clone();
            let target = g.space(level)?.clone();
            let edges = (0..source.len())
                .map(|v| {
                    let mut acc = S::zero();
                    let out = g.up(n, v)?;
                    let mut list = Vec::new();
                    let den = cc.dims.dim(n, v).clone();
                    for (k, &(w, m)) in out.iter().enumerate() {
                        let p = S::from_big_ratio(&cc.dims.dim(level, w).clone().into(), &den.clone().into());
                        for label in 1..=m {
                            acc += &p;
                            let last = k + 1 == out.len() && label == m;
                            // Pin the final endpoint to 1, as the quantile partitions do.
                            let upper = if last { S::one() } else { acc.clone() };
                            list.push(LabelledEdge {
                                target: w,
                                label,
                                prob: p.clone(),
                                upper,
                            });
                        }
                    }
                    Ok(list)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(LevelLabels {
                level,
                source,
                target,
                edges,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabelProcess { levels })
}

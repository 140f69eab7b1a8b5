//! Versioned JSON documents for chains and graphs, and flat metric rows for
//! CSV tables.

use serde::{Deserialize, Serialize};

use crate::bratteli::{BratteliGraph, GraphTag};
use crate::chain::{LevelKernel, LeveledChain};
use crate::error::{Error, Result};
use crate::probcore::{Dist, OrderedStateSpace, Space};
use crate::scalar::Scalar;
use crate::transport::LevelMetric;

pub const CHAIN_SCHEMA: &str = "filtra.chain/1";
pub const GRAPH_SCHEMA: &str = "filtra.graph/1";

/// One level's states: integer labels or coordinate vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDoc {
    pub level: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<i64>>>,
}

impl LevelDoc {
    fn from_space(s: &Space) -> Self {
        match s.coords() {
            Some(c) => Self {
                level: s.level(),
                labels: None,
                coords: Some(c.to_vec()),
            },
            None => Self {
                level: s.level(),
                labels: Some(s.labels().to_vec()),
                coords: None,
            },
        }
    }

    fn to_space(&self) -> Result<Space> {
        match (&self.labels, &self.coords) {
            (Some(l), None) => OrderedStateSpace::integers(self.level, l.clone()),
            (None, Some(c)) => OrderedStateSpace::coordinates(self.level, c.clone()),
            _ => Err(Error::Parse(format!(
                "level {} needs exactly one of labels or coords",
                self.level
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDoc {
    /// Target level; the kernel maps `level - 1` into `level`.
    pub level: i32,
    /// Sparse rows of `(target index, weight)`.
    pub rows: Vec<Vec<(usize, String)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainDoc {
    pub schema: String,
    pub name: String,
    pub depth: i32,
    pub levels: Vec<LevelDoc>,
    /// Law of the state at `depth`.
    pub seed: Vec<String>,
    pub kernels: Vec<KernelDoc>,
}

fn check_schema(found: &str, expected: &str) -> Result<()> {
    if found != expected {
        return Err(Error::Parse(format!(
            "unsupported schema {found:?}, expected {expected:?}"
        )));
    }
    Ok(())
}

pub fn chain_to_doc<S: Scalar>(chain: &LeveledChain<S>) -> Result<ChainDoc> {
    let levels = (chain.depth()..=0)
        .map(|l| Ok(LevelDoc::from_space(chain.space(l)?)))
        .collect::<Result<_>>()?;
    let kernels = ((chain.depth() + 1)..=0)
        .map(|l| {
            let k = chain.kernel(l)?;
            let rows = k
                .rows()
                .iter()
                .map(|r| r.iter().map(|(y, w)| (*y, w.to_repr())).collect())
                .collect();
            Ok(KernelDoc { level: l, rows })
        })
        .collect::<Result<_>>()?;
    Ok(ChainDoc {
        schema: CHAIN_SCHEMA.into(),
        name: chain.name(),
        depth: chain.depth(),
        levels,
        seed: chain.seed().weights().iter().map(Scalar::to_repr).collect(),
        kernels,
    })
}

pub fn chain_from_doc<S: Scalar>(doc: &ChainDoc) -> Result<LeveledChain<S>> {
    check_schema(&doc.schema, CHAIN_SCHEMA)?;
    if doc.depth > 0 || doc.levels.len() != (1 - doc.depth) as usize || doc.kernels.len() + 1 != doc.levels.len() {
        return Err(Error::Parse(format!(
            "depth {} does not match the level and kernel counts",
            doc.depth
        )));
    }
    let spaces: Vec<Space> = doc.levels.iter().map(LevelDoc::to_space).collect::<Result<_>>()?;
    let seed_w = doc.seed.iter().map(|s| S::parse_repr(s)).collect::<Result<Vec<_>>>()?;
    let seed = Dist::normalized(spaces[0].clone(), seed_w)?;
    let kernels = doc
        .kernels
        .iter()
        .enumerate()
        .map(|(i, k)| {
            if k.level != doc.depth + i as i32 + 1 {
                return Err(Error::Parse(format!("kernel {i} targets level {}", k.level)));
            }
            let rows = k
                .rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|(y, w)| Ok((*y, S::parse_repr(w)?)))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            LevelKernel::new(spaces[i].clone(), spaces[i + 1].clone(), rows)
        })
        .collect::<Result<Vec<_>>>()?;
    LeveledChain::from_kernels(&doc.name, seed, kernels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub schema: String,
    pub graph: GraphTag,
    pub depth: i32,
    pub levels: Vec<LevelDoc>,
    /// `(level, source index, target index, multiplicity)`, edges going up
    /// from `level` to `level + 1`.
    pub edges: Vec<(i32, usize, usize, u64)>,
}

pub fn graph_to_doc(g: &BratteliGraph) -> GraphDoc {
    GraphDoc {
        schema: GRAPH_SCHEMA.into(),
        graph: g.tag().clone(),
        depth: g.depth(),
        levels: g.spaces().iter().map(LevelDoc::from_space).collect(),
        edges: g.triples().collect(),
    }
}

pub fn graph_from_doc(doc: &GraphDoc) -> Result<BratteliGraph> {
    check_schema(&doc.schema, GRAPH_SCHEMA)?;
    if doc.depth >= 0 || doc.levels.len() != (1 - doc.depth) as usize {
        return Err(Error::Parse(format!(
            "depth {} does not match {} levels",
            doc.depth,
            doc.levels.len()
        )));
    }
    let levels: Vec<Space> = doc.levels.iter().map(LevelDoc::to_space).collect::<Result<_>>()?;
    let mut edges: Vec<Vec<Vec<(usize, u64)>>> = levels[..levels.len() - 1]
        .iter()
        .map(|s| vec![Vec::new(); s.len()])
        .collect();
    for &(level, v, w, m) in &doc.edges {
        let i = level - doc.depth;
        if i < 0 || i >= -doc.depth {
            return Err(Error::Parse(format!("edge from level {level} outside the window")));
        }
        let slot = edges[i as usize]
            .get_mut(v)
            .ok_or_else(|| Error::Parse(format!("edge source {v} out of range at level {level}")))?;
        slot.push((w, m));
    }
    for lvl in &mut edges {
        for out in lvl.iter_mut() {
            out.sort_unstable();
        }
    }
    BratteliGraph::new(doc.graph.clone(), levels, edges)
}

/// One CSV line of a metric table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub level: i32,
    pub v: String,
    pub v_prime: String,
    pub value: String,
}

/// Unordered pairs `v <= v′` of the metric at its level.
pub fn metric_rows<S: Scalar>(rho: &LevelMetric<S>) -> Vec<MetricRow> {
    let s = rho.space();
    (0..s.len())
        .flat_map(|i| (i..s.len()).map(move |j| (i, j)))
        .map(|(i, j)| MetricRow {
            level: s.level(),
            v: s.state_name(i),
            v_prime: s.state_name(j),
            value: rho.get(i, j).to_repr(),
        })
        .collect()
}

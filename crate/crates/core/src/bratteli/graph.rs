use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probcore::{OrderedStateSpace, Space};

/// Which generator produced a graph; drives closed forms and defaults.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphTag {
    Pascal,
    Euler,
    Odometer,
    NextJump,
    Multipascal { d: usize },
    Custom { name: String },
}

impl GraphTag {
    pub fn name(&self) -> String {
        match self {
            GraphTag::Pascal => "pascal".into(),
            GraphTag::Euler => "euler".into(),
            GraphTag::Odometer => "odometer".into(),
            GraphTag::NextJump => "next-jump".into(),
            GraphTag::Multipascal { d } => format!("multipascal-{d}"),
            GraphTag::Custom { name } => name.clone(),
        }
    }

    pub fn is_unidimensional(&self) -> bool {
        !matches!(self, GraphTag::Multipascal { .. })
    }
}

/// Graded graph over levels `depth..=0` with a single root at level 0.
/// `edges[i][v]` lists `(w, mult(v, w))` from level `depth + i` up to
/// `depth + i + 1`, sorted by `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct BratteliGraph {
    tag: GraphTag,
    depth: i32,
    levels: Vec<Space>,
    edges: Vec<Vec<Vec<(usize, u64)>>>,
}

impl BratteliGraph {
    pub fn new(tag: GraphTag, levels: Vec<Space>, edges: Vec<Vec<Vec<(usize, u64)>>>) -> Result<Self> {
        if levels.len() < 2 || edges.len() + 1 != levels.len() {
            return Err(Error::InvalidLevels(
                "need at least two levels and one edge set per gap".into(),
            ));
        }
        let depth = -(edges.len() as i32);
        for (i, s) in levels.iter().enumerate() {
            if s.level() != depth + i as i32 {
                return Err(Error::InvalidLevels(format!("space {i} sits at level {}", s.level())));
            }
        }
        if levels.last().map(|s| s.len()) != Some(1) {
            return Err(Error::InvalidSpace("level 0 must hold exactly one vertex".into()));
        }
        let mut edges = edges;
        for (i, level_edges) in edges.iter_mut().enumerate() {
            let (lo, hi) = (&levels[i], &levels[i + 1]);
            if level_edges.len() != lo.len() {
                return Err(Error::LengthMismatch {
                    expected: lo.len(),
                    got: level_edges.len(),
                });
            }
            let mut has_down = vec![false; hi.len()];
            for (v, out) in level_edges.iter_mut().enumerate() {
                out.retain(|&(_, m)| m > 0);
                out.sort_unstable();
                if out.windows(2).any(|p| p[0].0 == p[1].0) {
                    return Err(Error::InvalidSpace(format!("duplicate edge target from vertex {v}")));
                }
                if out.is_empty() {
                    return Err(Error::InvalidSpace(format!(
                        "vertex {} at level {} has no upward edge",
                        lo.state_name(v),
                        lo.level()
                    )));
                }
                for &(w, _) in out.iter() {
                    if w >= hi.len() {
                        return Err(Error::UnknownState(format!("target {w} at level {}", hi.level())));
                    }
                    has_down[w] = true;
                }
            }
            if let Some(w) = has_down.iter().position(|d| !d) {
                return Err(Error::InvalidSpace(format!(
                    "vertex {} at level {} has no downward edge",
                    hi.state_name(w),
                    hi.level()
                )));
            }
        }
        Ok(Self {
            tag,
            depth,
            levels,
            edges,
        })
    }

    pub fn tag(&self) -> &GraphTag {
        &self.tag
    }

    pub fn name(&self) -> String {
        self.tag.name()
    }

    pub fn depth(&self) -> i32 {
        self.depth
    }

    fn index(&self, level: i32) -> Result<usize> {
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
        Ok(&self.levels[self.index(level)?])
    }

    pub fn spaces(&self) -> &[Space] {
        &self.levels
    }

    /// Edges from `v` at `level` up to `level + 1`.
    pub fn up(&self, level: i32, v: usize) -> Result<&[(usize, u64)]> {
        let i = self.index(level)?;
        if level == 0 {
            return Err(Error::LevelOutOfWindow {
                level,
                lo: self.depth,
                hi: -1,
            });
        }
        self.edges[i]
            .get(v)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownState(format!("vertex {v} at level {level}")))
    }

    pub fn mult(&self, level: i32, v: usize, w: usize) -> Result<u64> {
        Ok(self.up(level, v)?.iter().find(|e| e.0 == w).map_or(0, |e| e.1))
    }

    /// Every multiplicity triple `(level, v, w, mult)`.
    pub fn triples(&self) -> impl Iterator<Item = (i32, usize, usize, u64)> + '_ {
        self.edges.iter().enumerate().flat_map(move |(i, lvl)| {
            let level = self.depth + i as i32;
            lvl.iter()
                .enumerate()
                .flat_map(move |(v, out)| out.iter().map(move |&(w, m)| (level, v, w, m)))
        })
    }

    /// Same graph restricted to levels `depth..=0`.
    pub fn truncate(&self, depth: i32) -> Result<Self> {
        let i = self.index(depth)?;
        if depth > -1 {
            return Err(Error::InvalidLevels(format!("depth {depth} must be <= -1")));
        }
        Ok(Self {
            tag: self.tag.clone(),
            depth,
            levels: self.levels[i..].to_vec(),
            edges: self.edges[i..].to_vec(),
        })
    }
}

fn check_depth(depth: i32) -> Result<()> {
    if depth > -1 {
        return Err(Error::InvalidLevels(format!("graph depth {depth} must be <= -1")));
    }
    Ok(())
}

/// Vertices `0..=|n|` at level `n`; `v` joins `v - 1` and `v` one level up.
pub fn pascal_graph(depth: i32) -> Result<BratteliGraph> {
    check_depth(depth)?;
    let levels = (depth..=0)
        .map(|n| OrderedStateSpace::range(n, n.unsigned_abs() as i64))
        .collect::<Result<Vec<_>>>()?;
    let edges = (depth..0)
        .map(|n| {
            let a = n.unsigned_abs() as usize;
            (0..=a)
                .map(|v| {
                    let mut out = Vec::with_capacity(2);
                    if v >= 1 {
                        out.push((v - 1, 1));
                    }
                    if v < a {
                        out.push((v, 1));
                    }
                    out
                })
                .collect()
        })
        .collect();
    BratteliGraph::new(GraphTag::Pascal, levels, edges)
}

/// Vertices `0..=|n|`; `v` at level `n` has `v + 1` edges up to `v` and
/// `|n| + 1 - v` edges up to `v - 1`.
pub fn euler_graph(depth: i32) -> Result<BratteliGraph> {
    check_depth(depth)?;
    let levels = (depth..=0)
        .map(|n| OrderedStateSpace::range(n, n.unsigned_abs() as i64))
        .collect::<Result<Vec<_>>>()?;
    let edges = (depth..0)
        .map(|n| {
            let a = n.unsigned_abs() as usize;
            (0..=a)
                .map(|v| {
                    let mut out = Vec::with_capacity(2);
                    if v >= 1 {
                        out.push((v - 1, (a + 1 - v) as u64));
                    }
                    if v < a {
                        out.push((v, (v + 1) as u64));
                    }
                    out
                })
                .collect()
        })
        .collect();
    BratteliGraph::new(GraphTag::Euler, levels, edges)
}

/// Two vertices per level below the root, every pair of adjacent-level
/// vertices joined by one edge.
pub fn odometer_graph(depth: i32) -> Result<BratteliGraph> {
    check_depth(depth)?;
    let levels = (depth..=0)
        .map(|n| OrderedStateSpace::range(n, if n == 0 { 0 } else { 1 }))
        .collect::<Result<Vec<_>>>()?;
    let edges = (depth..0)
        .map(|n| {
            let up: Vec<(usize, u64)> = if n == -1 { vec![(0, 1)] } else { vec![(0, 1), (1, 1)] };
            vec![up.clone(), up]
        })
        .collect();
    BratteliGraph::new(GraphTag::Odometer, levels, edges)
}

/// Vertices `0..=|n|`. Vertex `k < |n|` continues straight up to `k`; the
/// top vertex `|n|` jumps to every vertex one level up.
pub fn next_jump_graph(depth: i32) -> Result<BratteliGraph> {
    check_depth(depth)?;
    let levels = (depth..=0)
        .map(|n| OrderedStateSpace::range(n, n.unsigned_abs() as i64))
        .collect::<Result<Vec<_>>>()?;
    let edges = (depth..0)
        .map(|n| {
            let a = n.unsigned_abs() as usize;
            (0..=a)
                .map(|k| {
                    if k < a {
                        vec![(k, 1)]
                    } else {
                        (0..a).map(|w| (w, 1)).collect()
                    }
                })
                .collect()
        })
        .collect();
    BratteliGraph::new(GraphTag::NextJump, levels, edges)
}

/// Compositions of `total` into `d` nonnegative parts, lexicographic.
pub fn compositions(total: usize, d: usize) -> Vec<Vec<i64>> {
    fn rec(rest: usize, d: usize, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if d == 1 {
            prefix.push(rest as i64);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=rest {
            prefix.push(first as i64);
            rec(rest - first, d - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, d, &mut Vec::with_capacity(d), &mut out);
    out
}

/// Vertices at level `n` are the points of `ℕ^d` with coordinate sum `|n|`;
/// `v` joins `v - e_i` one level up for every `i` with `v(i) > 0`.
pub fn multipascal_graph(d: usize, depth: i32) -> Result<BratteliGraph> {
    check_depth(depth)?;
    if d < 2 {
        return Err(Error::InvalidParameter(format!("dimension d = {d} must be at least 2")));
    }
    let levels = (depth..=0)
        .map(|n| OrderedStateSpace::coordinates(n, compositions(n.unsigned_abs() as usize, d)))
        .collect::<Result<Vec<_>>>()?;
    let edges = levels
        .windows(2)
        .map(|pair| {
            let (lo, hi) = (&pair[0], &pair[1]);
            (0..lo.len())
                .map(|v| {
                    let c = lo.coord(v).expect("coordinates");
                    let mut out: Vec<(usize, u64)> = (0..d)
                        .filter(|&i| c[i] > 0)
                        .map(|i| {
                            let mut t = c.to_vec();
                            t[i] -= 1;
                            (hi.index_of_coords(&t).expect("composition one level up"), 1)
                        })
                        .collect();
                    out.sort_unstable();
                    out
                })
                .collect()
        })
        .collect();
    BratteliGraph::new(GraphTag::Multipascal { d }, levels, edges)
}

/// `dim(v)`: the number of paths from `v` up to the root.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCount {
    depth: i32,
    dims: Vec<Vec<BigUint>>,
}

impl PathCount {
    pub fn dim(&self, level: i32, v: usize) -> &BigUint {
        &self.dims[(level - self.depth) as usize][v]
    }

    pub fn level(&self, level: i32) -> &[BigUint] {
        &self.dims[(level - self.depth) as usize]
    }

    pub fn depth(&self) -> i32 {
        self.depth
    }
}

/// Counts paths from every vertex to `target` at `target_level`; levels above
/// `target_level` are not included in the result.
pub fn paths_to(g: &BratteliGraph, target_level: i32, target: usize) -> Result<Vec<Vec<BigUint>>> {
    let top = g.space(target_level)?;
    if target >= top.len() {
        return Err(Error::UnknownState(format!("vertex {target} at level {target_level}")));
    }
    let mut counts = vec![vec![BigUint::zero(); top.len()]];
    counts[0][target] = BigUint::one();
    for level in (g.depth()..target_level).rev() {
        let above = counts.last().expect("seeded");
        let here = (0..g.space(level)?.len())
            .map(|v| {
                let mut acc = BigUint::zero();
                for &(w, m) in g.up(level, v).expect("in range") {
                    acc += &above[w] * m;
                }
                acc
            })
            .collect();
        counts.push(here);
    }
    counts.reverse();
    Ok(counts)
}

pub fn path_counts(g: &BratteliGraph) -> PathCount {
    let dims = paths_to(g, 0, 0).expect("root exists");
    PathCount { depth: g.depth(), dims }
}

//! Kantorovich (Wasserstein-1) distances on finite metric spaces and the
//! one-step Kantorovich lift of a level metric through a kernel.

use rayon::prelude::*;

use crate::chain::LevelKernel;
use crate::error::{Error, Result};
use crate::probcore::{ensure_same, Dist, Space};
use crate::scalar::{Mode, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Metric,
    Pseudometric,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr<S> {
    /// `ρ(x, y) = 1` for `x != y`.
    Discrete,
    /// `ρ(x, y) = |pos(x) - pos(y)|`.
    Line(Vec<S>),
    /// Row-major symmetric matrix.
    Dense(Vec<S>),
}

/// A symmetric nonnegative (pseudo)metric on one level's states.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelMetric<S> {
    space: Space,
    repr: Repr<S>,
    kind: MetricKind,
    linear: bool,
}

impl<S: Scalar> LevelMetric<S> {
    pub fn discrete(space: Space) -> Self {
        // On at most two totally ordered points the discrete metric is additive.
        let linear = space.is_total() && space.len() <= 2;
        Self {
            space,
            repr: Repr::Discrete,
            kind: MetricKind::Metric,
            linear,
        }
    }

    /// `|label(x) - label(y)|` on a totally ordered integer space.
    pub fn absolute(space: Space) -> Result<Self> {
        if !space.is_total() {
            return Err(Error::NotTotallyOrdered);
        }
        let pos = space.labels().iter().map(|&l| S::from_int(l)).collect();
        Self::from_positions(space, pos)
    }

    /// `|pos(x) - pos(y)|`. Linear when the positions are monotone along a total order.
    pub fn from_positions(space: Space, positions: Vec<S>) -> Result<Self> {
        if positions.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                got: positions.len(),
            });
        }
        let monotone = positions.windows(2).all(|w| w[0] <= w[1]) || positions.windows(2).all(|w| w[0] >= w[1]);
        let linear = space.is_total() && monotone;
        let mut sorted: Vec<&S> = positions.iter().collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("comparable"));
        let injective = sorted.windows(2).all(|w| w[0] != w[1]);
        let kind = if injective {
            MetricKind::Metric
        } else {
            MetricKind::Pseudometric
        };
        Ok(Self {
            space,
            repr: Repr::Line(positions),
            kind,
            linear,
        })
    }

    /// `Σ_k a_k |x(k) - y(k)|` on a coordinate space.
    pub fn weighted_l1(space: Space, weights: &[S]) -> Result<Self> {
        let d = space
            .dimension()
            .ok_or_else(|| Error::InvalidMetric("weighted L1 needs coordinates".into()))?;
        if weights.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for dimension {d}",
                weights.len()
            )));
        }
        let n = space.len();
        let coords = space.coords().expect("coordinates");
        let mut values = vec![S::zero(); n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let mut acc = S::zero();
                for k in 0..d {
                    let diff = (coords[i][k] - coords[j][k]).abs();
                    if diff != 0 {
                        acc += &(weights[k].clone() * S::from_int(diff));
                    }
                }
                values[i * n + j] = acc.clone();
                values[j * n + i] = acc;
            }
        }
        Self::from_matrix(space, values)
    }

    /// Validates a full matrix: nonnegative, zero diagonal, symmetric,
    /// triangle inequality. Kind and linearity are detected.
    pub fn from_matrix(space: Space, values: Vec<S>) -> Result<Self> {
        let n = space.len();
        if values.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                got: values.len(),
            });
        }
        let tol = S::TOL * 10.0;
        for i in 0..n {
            if !values[i * n + i].is_negligible() {
                return Err(Error::InvalidMetric(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = &values[i * n + j];
                if v.is_negative() && !v.is_negligible() {
                    return Err(Error::InvalidMetric(format!("negative entry at ({i}, {j})")));
                }
                if !v.approx_eq(&values[j * n + i], tol) {
                    return Err(Error::InvalidMetric(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let through = values[i * n + k].clone() + values[k * n + j].clone();
                    if !values[i * n + j].le_tol(&through, tol) {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails for ({i}, {k}, {j})"
                        )));
                    }
                }
            }
        }
        let kind = if (0..n).all(|i| (0..n).all(|j| i == j || !values[i * n + j].is_negligible())) {
            MetricKind::Metric
        } else {
            MetricKind::Pseudometric
        };
        let mut m = Self {
            space,
            repr: Repr::Dense(values),
            kind,
            linear: false,
        };
        m.linear = m.space.is_total() && m.linearity_holds();
        Ok(m)
    }

    fn from_trusted_dense(space: Space, values: Vec<S>, kind: MetricKind, linear: bool) -> Self {
        Self {
            space,
            repr: Repr::Dense(values),
            kind,
            linear,
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn is_linear(&self) -> bool {
        self.linear
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.repr, Repr::Discrete)
    }

    /// Line positions when the metric is stored as an embedding.
    pub fn positions(&self) -> Option<&[S]> {
        match &self.repr {
            Repr::Line(p) => Some(p),
            _ => None,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        match &self.repr {
            Repr::Discrete => {
                if i == j {
                    S::zero()
                } else {
                    S::one()
                }
            }
            Repr::Line(p) => (p[i].clone() - p[j].clone()).abs(),
            Repr::Dense(v) => v[i * self.space.len() + j].clone(),
        }
    }

    pub fn diameter(&self) -> S {
        let n = self.space.len();
        let mut best = S::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.get(i, j);
                if v > best {
                    best = v;
                }
            }
        }
        best
    }

    /// Checks `ρ(a, c) = ρ(a, b) + ρ(b, c)` for every ordered triple `a <= b <= c`.
    pub fn linearity_holds(&self) -> bool {
        if !self.space.is_total() {
            return false;
        }
        let n = self.space.len();
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    let lhs = self.get(a, c);
                    let rhs = self.get(a, b) + self.get(b, c);
                    if !lhs.approx_eq(&rhs, S::TOL * 10.0) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Monotone embedding `φ` with `ρ(x, y) = |φ(x) - φ(y)|`, for linear metrics.
    pub fn line_embedding(&self) -> Result<Vec<S>> {
        if !self.linear {
            return Err(Error::NotLinear);
        }
        Ok(match &self.repr {
            Repr::Line(p) => {
                // Orient so the embedding is nondecreasing.
                if p.first() <= p.last() {
                    p.clone()
                } else {
                    p.iter().map(|x| -x.clone()).collect()
                }
            }
            _ => (0..self.space.len()).map(|j| self.get(0, j)).collect(),
        })
    }

    /// Full matrix copy of the metric.
    pub fn to_matrix(&self) -> Vec<S> {
        let n = self.space.len();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn to_f64(&self) -> LevelMetric<f64> {
        let repr = match &self.repr {
            Repr::Discrete => Repr::Discrete,
            Repr::Line(p) => Repr::Line(p.iter().map(Scalar::to_f64).collect()),
            Repr::Dense(v) => Repr::Dense(v.iter().map(Scalar::to_f64).collect()),
        };
        LevelMetric {
            space: self.space.clone(),
            repr,
            kind: self.kind,
            linear: self.linear,
        }
    }

    /// Same values with every pair scaled by a positive constant.
    pub fn scaled(&self, factor: &S) -> Self {
        let repr = match &self.repr {
            Repr::Discrete => Repr::Dense(self.to_matrix().into_iter().map(|v| v * factor.clone()).collect()),
            Repr::Line(p) => Repr::Line(p.iter().map(|v| v.clone() * factor.clone()).collect()),
            Repr::Dense(v) => Repr::Dense(v.iter().map(|x| x.clone() * factor.clone()).collect()),
        };
        Self {
            space: self.space.clone(),
            repr,
            kind: self.kind,
            linear: self.linear,
        }
    }
}

/// Kantorovich distance: the linear-metric closed form when the metric is
/// flagged linear, total variation for the discrete metric, the exact
/// transportation simplex otherwise.
pub fn kantorovich<S: Scalar>(mu: &Dist<S>, nu: &Dist<S>, rho: &LevelMetric<S>) -> Result<S> {
    ensure_same(mu.space(), nu.space())?;
    ensure_same(mu.space(), rho.space())?;
    kantorovich_sparse(&mu.support(), &nu.support(), rho, LiftStrategy::Auto)
}

/// Kantorovich distance computed by the transportation simplex, regardless of
/// any structure of the metric.
pub fn kantorovich_lp<S: Scalar>(mu: &Dist<S>, nu: &Dist<S>, rho: &LevelMetric<S>) -> Result<S> {
    ensure_same(mu.space(), nu.space())?;
    ensure_same(mu.space(), rho.space())?;
    kantorovich_sparse(&mu.support(), &nu.support(), rho, LiftStrategy::Lp)
}

/// Optimal value and an optimal plan (as sparse `(i, j, mass)` triples over state indices).
pub fn kantorovich_with_plan<S: Scalar>(
    mu: &Dist<S>,
    nu: &Dist<S>,
    rho: &LevelMetric<S>,
) -> Result<(S, Vec<(usize, usize, S)>)> {
    ensure_same(mu.space(), nu.space())?;
    ensure_same(mu.space(), rho.space())?;
    let a = mu.support();
    let b = nu.support();
    let cost: Vec<S> = a
        .iter()
        .flat_map(|(i, _)| b.iter().map(move |(j, _)| (*i, *j)))
        .map(|(i, j)| rho.get(i, j))
        .collect();
    let sol = transport_simplex(
        &a.iter().map(|x| x.1.clone()).collect::<Vec<_>>(),
        &b.iter().map(|x| x.1.clone()).collect::<Vec<_>>(),
        &cost,
    )?;
    let plan = sol.flows.into_iter().map(|(r, c, w)| (a[r].0, b[c].0, w)).collect();
    Ok((sol.value, plan))
}

/// Closed form for linear metrics: the expected cost of the quantile
/// coupling, `Σ_i |F_μ(i) - F_ν(i)| (φ(i+1) - φ(i))`.
pub fn kantorovich_line<S: Scalar>(mu: &Dist<S>, nu: &Dist<S>, rho: &LevelMetric<S>) -> Result<S> {
    ensure_same(mu.space(), nu.space())?;
    ensure_same(mu.space(), rho.space())?;
    if !rho.is_linear() {
        return Err(Error::NotLinear);
    }
    let phi = rho.line_embedding()?;
    Ok(line_cost(&mu.support(), &nu.support(), &phi))
}

fn line_cost<S: Scalar>(a: &[(usize, S)], b: &[(usize, S)], phi: &[S]) -> S {
    // Walk the union of both supports in state order, accumulating the CDF gap.
    let mut acc = S::zero();
    let mut gap = S::zero(); // F_μ - F_ν up to the previous support point
    let (mut i, mut j) = (0, 0);
    let mut prev: Option<usize> = None;
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.0.min(y.0),
            (Some(x), None) => x.0,
            (None, Some(y)) => y.0,
            (None, None) => unreachable!(),
        };
        if let Some(p) = prev {
            if !gap.is_zero() {
                acc += &(gap.abs() * (phi[next].clone() - phi[p].clone()));
            }
        }
        if i < a.len() && a[i].0 == next {
            gap += &a[i].1;
            i += 1;
        }
        if j < b.len() && b[j].0 == next {
            gap -= &b[j].1;
            j += 1;
        }
        prev = Some(next);
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiftStrategy {
    /// Line closed form for linear metrics, total variation for the discrete
    /// metric, transportation simplex otherwise.
    #[default]
    Auto,
    /// Always the transportation simplex.
    Lp,
    /// For a monotonic kernel and a linear metric, push the line embedding
    /// through the kernel; falls back to `Auto` otherwise.
    Embedding,
}

pub(crate) fn kantorovich_sparse<S: Scalar>(
    a: &[(usize, S)],
    b: &[(usize, S)],
    rho: &LevelMetric<S>,
    strategy: LiftStrategy,
) -> Result<S> {
    if a == b {
        return Ok(S::zero());
    }
    if strategy != LiftStrategy::Lp {
        if rho.is_linear() {
            return Ok(line_cost(a, b, &rho.line_embedding()?));
        }
        if rho.is_discrete() {
            return Ok(sparse_tv(a, b));
        }
    }
    if a.len() == 1 || b.len() == 1 {
        // One marginal is a point mass: the product plan is the only coupling.
        let mut acc = S::zero();
        for (i, wa) in a {
            for (j, wb) in b {
                acc += &(wa.clone() * wb.clone() * rho.get(*i, *j));
            }
        }
        return Ok(acc);
    }
    let cost: Vec<S> = a
        .iter()
        .flat_map(|(i, _)| b.iter().map(move |(j, _)| rho.get(*i, *j)))
        .collect();
    let supply: Vec<S> = a.iter().map(|x| x.1.clone()).collect();
    let demand: Vec<S> = b.iter().map(|x| x.1.clone()).collect();
    Ok(transport_simplex(&supply, &demand, &cost)?.value)
}

fn sparse_tv<S: Scalar>(a: &[(usize, S)], b: &[(usize, S)]) -> S {
    let mut acc = S::zero();
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x.0 == y.0 => {
                acc += &(x.1.clone() - y.1.clone()).abs();
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x.0 < y.0 => {
                acc += &x.1;
                i += 1;
            }
            (Some(_), Some(y)) => {
                acc += &y.1;
                j += 1;
            }
            (Some(x), None) => {
                acc += &x.1;
                i += 1;
            }
            (None, Some(y)) => {
                acc += &y.1;
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    acc / S::from_int(2)
}

/// Result of the transportation simplex.
#[derive(Debug, Clone)]
pub struct TransportSolution<S> {
    pub value: S,
    /// Positive basic flows `(row, col, mass)`.
    pub flows: Vec<(usize, usize, S)>,
    pub pivots: usize,
}

const MAX_PIVOTS: usize = 1_000_000;
const FLOAT_GAP_TOL: f64 = 1e-9;

/// Exact transportation simplex (northwest-corner start, MODI potentials,
/// Bland's rule for entering and leaving cells). `cost` is row-major
/// `supply.len() x demand.len()`; supply and demand must have equal totals.
pub fn transport_simplex<S: Scalar>(supply: &[S], demand: &[S], cost: &[S]) -> Result<TransportSolution<S>> {
    let m = supply.len();
    let n = demand.len();
    if m == 0 || n == 0 || cost.len() != m * n {
        return Err(Error::Solver("empty or mis-sized transportation problem".into()));
    }
    let mut flow = vec![S::zero(); m * n];
    let mut basic = vec![false; m * n];
    let mut basis: Vec<usize> = Vec::with_capacity(m + n - 1);

    // Northwest corner: exactly m + n - 1 basic cells, degenerate zeros allowed.
    {
        let mut ra = supply.to_vec();
        let mut rb = demand.to_vec();
        let (mut i, mut j) = (0, 0);
        for _ in 0..(m + n - 1) {
            let x = S::min_of(&ra[i], &rb[j]);
            let x = if x.is_negative() { S::zero() } else { x };
            let row_exhausted = ra[i] <= rb[j];
            ra[i] -= &x;
            rb[j] -= &x;
            flow[i * n + j] = x;
            basic[i * n + j] = true;
            basis.push(i * n + j);
            if i == m - 1 {
                j += 1;
            } else if j == n - 1 || row_exhausted {
                i += 1;
            } else {
                j += 1;
            }
        }
    }

    let neg_tol = match S::MODE {
        Mode::Exact => 0.0,
        Mode::Float => 1e-12,
    };
    let mut pivots = 0;
    let mut u: Vec<Option<S>> = vec![None; m];
    let mut v: Vec<Option<S>> = vec![None; n];
    loop {
        // Potentials: u_i + v_j = c_ij on basic cells (spanning tree).
        compute_potentials(m, n, &basis, cost, &mut u, &mut v);
        let mut entering = None;
        'scan: for i in 0..m {
            let ui = u[i].as_ref().expect("tree spans rows");
            for j in 0..n {
                let cell = i * n + j;
                if basic[cell] {
                    continue;
                }
                let vj = v[j].as_ref().expect("tree spans columns");
                let reduced = cost[cell].clone() - ui.clone() - vj.clone();
                let negative = match S::MODE {
                    Mode::Exact => reduced.is_negative(),
                    Mode::Float => reduced.to_f64() < -neg_tol,
                };
                if negative {
                    entering = Some(cell);
                    break 'scan;
                }
            }
        }
        let Some(enter) = entering else { break };
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(Error::Solver("pivot limit exceeded".into()));
        }
        let (ei, ej) = (enter / n, enter % n);
        // Tree path from column ej to row ei; cells alternate -, +, -, ...
        let path = tree_path(m, n, &basis, ej, ei);
        let minus: Vec<usize> = path.iter().step_by(2).copied().collect();
        let theta = minus
            .iter()
            .map(|&c| flow[c].clone())
            .fold(None, |acc: Option<S>, f| match acc {
                None => Some(f),
                Some(a) => Some(S::min_of(&a, &f)),
            })
            .expect("cycle has a minus cell");
        let leave = *minus
            .iter()
            .filter(|&&c| flow[c] == theta)
            .min()
            .expect("minimum attained");
        for (k, &c) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[c] -= &theta;
            } else {
                flow[c] += &theta;
            }
        }
        flow[enter] = theta;
        basic[leave] = false;
        basic[enter] = true;
        let pos = basis.iter().position(|&c| c == leave).expect("leaving cell is basic");
        basis[pos] = enter;
        flow[leave] = S::zero();
    }

    let mut value = S::zero();
    let mut flows = Vec::new();
    for &c in &basis {
        if !flow[c].is_zero() {
            value += &(flow[c].clone() * cost[c].clone());
            flows.push((c / n, c % n, flow[c].clone()));
        }
    }
    flows.sort_by_key(|f| (f.0, f.1));
    if S::MODE == Mode::Float {
        let dual: f64 = supply
            .iter()
            .zip(&u)
            .map(|(a, ui)| a.to_f64() * ui.as_ref().unwrap().to_f64())
            .sum::<f64>()
            + demand
                .iter()
                .zip(&v)
                .map(|(b, vj)| b.to_f64() * vj.as_ref().unwrap().to_f64())
                .sum::<f64>();
        if (dual - value.to_f64()).abs() > FLOAT_GAP_TOL * (1.0 + value.to_f64().abs()) {
            return Err(Error::Solver(format!(
                "duality gap {} exceeds tolerance",
                dual - value.to_f64()
            )));
        }
    }
    Ok(TransportSolution { value, flows, pivots })
}

fn adjacency(m: usize, n: usize, basis: &[usize]) -> Vec<Vec<(usize, usize)>> {
    // Nodes 0..m are rows, m..m+n are columns; edges carry the cell index.
    let mut adj = vec![Vec::new(); m + n];
    for &c in basis {
        let (i, j) = (c / n, c % n);
        adj[i].push((m + j, c));
        adj[m + j].push((i, c));
    }
    adj
}

fn compute_potentials<S: Scalar>(
    m: usize,
    n: usize,
    basis: &[usize],
    cost: &[S],
    u: &mut [Option<S>],
    v: &mut [Option<S>],
) {
    u.iter_mut().for_each(|x| *x = None);
    v.iter_mut().for_each(|x| *x = None);
    let adj = adjacency(m, n, basis);
    u[0] = Some(S::zero());
    let mut stack = vec![0usize];
    while let Some(node) = stack.pop() {
        for &(other, c) in &adj[node] {
            if node < m {
                let j = other - m;
                if v[j].is_none() {
                    v[j] = Some(cost[c].clone() - u[node].clone().unwrap());
                    stack.push(other);
                }
            } else if u[other].is_none() {
                u[other] = Some(cost[c].clone() - v[node - m].clone().unwrap());
                stack.push(other);
            }
        }
    }
}

/// Cells along the unique tree path from column `col` to row `row`.
fn tree_path(m: usize, n: usize, basis: &[usize], col: usize, row: usize) -> Vec<usize> {
    let adj = adjacency(m, n, basis);
    let start = m + col;
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; m + n];
    let mut seen = vec![false; m + n];
    seen[start] = true;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        if node == row {
            break;
        }
        for &(other, c) in &adj[node] {
            if !seen[other] {
                seen[other] = true;
                parent[other] = Some((node, c));
                queue.push_back(other);
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = row;
    while node != start {
        let (p, c) = parent[node].expect("basis is a spanning tree");
        cells.push(c);
        node = p;
    }
    cells.reverse();
    cells
}

/// One-step Kantorovich lift: `result(x, x') = K(ρ_next)(row x, row x')` for a
/// kernel from level `n` to level `n + 1` and a metric on level `n + 1`.
pub fn lift_metric<S: Scalar>(
    rho_next: &LevelMetric<S>,
    kernel: &LevelKernel<S>,
    strategy: LiftStrategy,
) -> Result<LevelMetric<S>> {
    ensure_same(rho_next.space(), kernel.target())?;
    let source = kernel.source().clone();
    let identifiable = kernel.is_identifiable();
    let kind = if identifiable && rho_next.kind() == MetricKind::Metric {
        MetricKind::Metric
    } else {
        MetricKind::Pseudometric
    };
    let monotonic = source.is_total() && kernel.target().is_total() && kernel.is_monotonic()?;
    let linear = rho_next.is_linear() && monotonic;

    if strategy == LiftStrategy::Embedding && linear {
        let phi = rho_next.line_embedding()?;
        let positions: Vec<S> = (0..source.len())
            .map(|x| {
                let mut acc = S::zero();
                for (y, w) in kernel.row(x) {
                    acc += &(w.clone() * phi[*y].clone());
                }
                acc
            })
            .collect();
        let mut m = LevelMetric::from_positions(source, positions)?;
        m.kind = kind;
        return Ok(m);
    }

    let n = source.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let pair_strategy = if strategy == LiftStrategy::Embedding {
        LiftStrategy::Auto
    } else {
        strategy
    };
    let values: Vec<S> = pairs
        .par_iter()
        .map(|&(i, j)| kantorovich_sparse(kernel.row(i), kernel.row(j), rho_next, pair_strategy))
        .collect::<Result<_>>()?;
    let mut matrix = vec![S::zero(); n * n];
    for (&(i, j), v) in pairs.iter().zip(values) {
        matrix[j * n + i] = v.clone();
        matrix[i * n + j] = v;
    }
    Ok(LevelMetric::from_trusted_dense(source, matrix, kind, linear))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probcore::{total_variation, OrderedStateSpace};
    use crate::scalar::Exact;

    fn q(n: i64, d: i64) -> Exact {
        Exact::from_ratio(n, d)
    }

    #[test]
    fn kantorovich_examples() {
        let s = OrderedStateSpace::range(0, 1).unwrap();
        let rho = LevelMetric::<Exact>::discrete(s.clone());
        let a = Dist::new(s.clone(), vec![q(1, 4), q(3, 4)]).unwrap();
        let b = Dist::<Exact>::uniform(s.clone());
        assert_eq!(kantorovich_lp(&a, &a, &rho).unwrap(), q(0, 1));
        assert_eq!(kantorovich_lp(&a, &b, &rho).unwrap(), q(1, 4));
        assert_eq!(kantorovich_lp(&a, &b, &rho).unwrap(), total_variation(&a, &b).unwrap());

        let s3 = OrderedStateSpace::range(0, 2).unwrap();
        let abs = LevelMetric::<Exact>::absolute(s3.clone()).unwrap();
        let d0 = Dist::point_mass(s3.clone(), 0);
        let d2 = Dist::point_mass(s3.clone(), 2);
        assert_eq!(kantorovich_lp(&d0, &d2, &abs).unwrap(), q(2, 1));
    }

    #[test]
    fn kantorovich_line_examples() {
        let s = OrderedStateSpace::range(0, 1).unwrap();
        let abs = LevelMetric::<Exact>::absolute(s.clone()).unwrap();
        let u = Dist::<Exact>::uniform(s.clone());
        let d1 = Dist::point_mass(s.clone(), 1);
        assert_eq!(kantorovich_line(&u, &u, &abs).unwrap(), q(0, 1));
        assert_eq!(kantorovich_line(&u, &d1, &abs).unwrap(), q(1, 2));
        let a = Dist::new(s.clone(), vec![q(1, 4), q(3, 4)]).unwrap();
        assert_eq!(kantorovich_line(&a, &u, &abs).unwrap(), q(1, 4));
        // Brute force over all 2x2 plans with margins (1/2, 1/2) and δ_1: only one plan.
        assert_eq!(kantorovich_lp(&u, &d1, &abs).unwrap(), q(1, 2));
        let s3 = OrderedStateSpace::range(0, 2).unwrap();
        assert_eq!(
            kantorovich_line(
                &Dist::<Exact>::uniform(s3.clone()),
                &Dist::uniform(s3.clone()),
                &LevelMetric::discrete(s3)
            ),
            Err(Error::NotLinear)
        );
    }

    #[test]
    fn metric_validation() {
        let s = OrderedStateSpace::range(0, 2).unwrap();
        let bad = vec![
            q(0, 1),
            q(1, 1),
            q(5, 1),
            q(1, 1),
            q(0, 1),
            q(1, 1),
            q(5, 1),
            q(1, 1),
            q(0, 1),
        ];
        assert!(matches!(
            LevelMetric::from_matrix(s.clone(), bad),
            Err(Error::InvalidMetric(_))
        ));
        let lin = vec![
            q(0, 1),
            q(1, 1),
            q(3, 1),
            q(1, 1),
            q(0, 1),
            q(2, 1),
            q(3, 1),
            q(2, 1),
            q(0, 1),
        ];
        let m = LevelMetric::from_matrix(s.clone(), lin).unwrap();
        assert!(m.is_linear());
        assert_eq!(m.kind(), MetricKind::Metric);
        assert_eq!(m.line_embedding().unwrap(), vec![q(0, 1), q(1, 1), q(3, 1)]);
        let pseudo = vec![
            q(0, 1),
            q(0, 1),
            q(1, 1),
            q(0, 1),
            q(0, 1),
            q(1, 1),
            q(1, 1),
            q(1, 1),
            q(0, 1),
        ];
        assert_eq!(
            LevelMetric::from_matrix(s, pseudo).unwrap().kind(),
            MetricKind::Pseudometric
        );
    }

    #[test]
    fn simplex_handles_degenerate_instances() {
        // Equal supplies and demands create ties in the northwest corner.
        let supply = vec![q(1, 3), q(1, 3), q(1, 3)];
        let demand = vec![q(1, 3), q(1, 3), q(1, 3)];
        let cost = vec![
            q(3, 1),
            q(1, 1),
            q(2, 1),
            q(1, 1),
            q(2, 1),
            q(3, 1),
            q(2, 1),
            q(3, 1),
            q(1, 1),
        ];
        let sol = transport_simplex(&supply, &demand, &cost).unwrap();
        assert_eq!(sol.value, q(1, 1));
        let mut rows = vec![q(0, 1); 3];
        for (i, _, w) in &sol.flows {
            rows[*i] += w;
        }
        assert_eq!(rows, supply);
    }

    #[test]
    fn float_simplex_matches_exact() {
        let supply = [0.2, 0.5, 0.3];
        let demand = [0.6, 0.1, 0.3];
        let cost = [0.0, 2.0, 5.0, 1.0, 0.5, 3.0, 4.0, 1.0, 0.0];
        let f = transport_simplex(&supply, &demand, &cost).unwrap();
        let e = transport_simplex(
            &supply.map(Exact::from_f64),
            &demand.map(Exact::from_f64),
            &cost.map(Exact::from_f64),
        )
        .unwrap();
        assert!((f.value - e.value.to_f64()).abs() < 1e-12);
    }
}

//! Finite probability distributions on ordered state spaces, stochastic
//! dominance, quantile couplings and the relatively independent gluing of
//! two couplings.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateOrder {
    /// States are listed in strictly increasing order.
    Total,
    /// Product order on the coordinate vectors.
    Coordinatewise,
}

/// The states of one level. States are addressed by index; labels and
/// coordinate vectors identify them for humans and serializers.
#[derive(Debug, Clone)]
pub struct OrderedStateSpace {
    level: i32,
    labels: Vec<i64>,
    coords: Option<Vec<Vec<i64>>>,
    order: StateOrder,
    coord_index: HashMap<Vec<i64>, usize>,
}

pub type Space = Arc<OrderedStateSpace>;

impl PartialEq for OrderedStateSpace {
    fn eq(&self, other: &Self) -> bool {
        self.level == other.level
            && self.order == other.order
            && self.labels == other.labels
            && self.coords == other.coords
    }
}

impl OrderedStateSpace {
    /// Totally ordered space of integer labels (strictly increasing).
    pub fn integers(level: i32, labels: Vec<i64>) -> Result<Space> {
        check_level(level)?;
        if labels.is_empty() {
            return Err(Error::InvalidSpace("empty state list".into()));
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpace(
                "labels of a totally ordered space must be strictly increasing".into(),
            ));
        }
        Ok(Arc::new(Self {
            level,
            labels,
            coords: None,
            order: StateOrder::Total,
            coord_index: HashMap::new(),
        }))
    }

    /// `{0, 1, ..., max}`.
    pub fn range(level: i32, max: i64) -> Result<Space> {
        Self::integers(level, (0..=max).collect())
    }

    /// Product-ordered space of integer vectors, all of the same dimension.
    pub fn coordinates(level: i32, coords: Vec<Vec<i64>>) -> Result<Space> {
        check_level(level)?;
        let d = coords
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidSpace("empty state list".into()))?;
        if d == 0 || coords.iter().any(|c| c.len() != d) {
            return Err(Error::InvalidSpace(
                "coordinate vectors must share one dimension d >= 1".into(),
            ));
        }
        let mut coord_index = HashMap::with_capacity(coords.len());
        for (i, c) in coords.iter().enumerate() {
            if coord_index.insert(c.clone(), i).is_some() {
                return Err(Error::InvalidSpace(format!("duplicate state {c:?}")));
            }
        }
        Ok(Arc::new(Self {
            level,
            labels: (0..coords.len() as i64).collect(),
            coords: Some(coords),
            order: StateOrder::Coordinatewise,
            coord_index,
        }))
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn order(&self) -> StateOrder {
        self.order
    }

    pub fn is_total(&self) -> bool {
        self.order == StateOrder::Total
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> i64 {
        self.labels[i]
    }

    pub fn coords(&self) -> Option<&[Vec<i64>]> {
        self.coords.as_deref()
    }

    pub fn coord(&self, i: usize) -> Option<&[i64]> {
        self.coords.as_ref().map(|c| c[i].as_slice())
    }

    pub fn dimension(&self) -> Option<usize> {
        self.coords.as_ref().map(|c| c[0].len())
    }

    pub fn index_of_label(&self, label: i64) -> Option<usize> {
        match self.order {
            StateOrder::Total => self.labels.binary_search(&label).ok(),
            StateOrder::Coordinatewise => (label >= 0 && (label as usize) < self.len()).then_some(label as usize),
        }
    }

    pub fn index_of_coords(&self, c: &[i64]) -> Option<usize> {
        self.coord_index.get(c).copied()
    }

    /// Human-readable state name: the label, or "(a,b,...)" for coordinates.
    pub fn state_name(&self, i: usize) -> String {
        match &self.coords {
            Some(c) => {
                let parts: Vec<String> = c[i].iter().map(i64::to_string).collect();
                format!("({})", parts.join(","))
            }
            None => self.labels[i].to_string(),
        }
    }

    /// Parses a state written as by [`Self::state_name`].
    pub fn parse_state(&self, s: &str) -> Result<usize> {
        let s = s.trim();
        let found = if self.coords.is_some() {
            let inner = s.trim_start_matches('(').trim_end_matches(')');
            let v: std::result::Result<Vec<i64>, _> = inner.split(',').map(|p| p.trim().parse::<i64>()).collect();
            v.ok().and_then(|v| self.index_of_coords(&v))
        } else {
            s.parse::<i64>().ok().and_then(|l| self.index_of_label(l))
        };
        found.ok_or_else(|| Error::UnknownState(s.to_string()))
    }

    /// Same states, relabelled to another level.
    pub fn at_level(&self, level: i32) -> Result<Space> {
        check_level(level)?;
        let mut s = self.clone();
        s.level = level;
        Ok(Arc::new(s))
    }
}

fn check_level(level: i32) -> Result<()> {
    if level > 0 {
        return Err(Error::InvalidSpace(format!("level {level} must be <= 0")));
    }
    Ok(())
}

pub(crate) fn same_space(a: &Space, b: &Space) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn ensure_same(a: &Space, b: &Space) -> Result<()> {
    if same_space(a, b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!(
            "level {} ({} states) vs level {} ({} states)",
            a.level(),
            a.len(),
            b.level(),
            b.len()
        )))
    }
}

/// A probability vector over one level's states.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist<S> {
    space: Space,
    weights: Vec<S>,
}

impl<S: Scalar> Dist<S> {
    /// Normalizes nonnegative weights into a distribution.
    pub fn new(space: Space, weights: Vec<S>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                got: weights.len(),
            });
        }
        let mut total = S::zero();
        for (i, w) in weights.iter().enumerate() {
            if w.is_negative() {
                return Err(Error::NegativeWeight {
                    index: i,
                    value: w.to_repr(),
                });
            }
            total += w;
        }
        if total.is_zero() {
            return Err(Error::ZeroMass);
        }
        let weights = if total.is_one() {
            weights
        } else {
            weights.into_iter().map(|w| w / total.clone()).collect()
        };
        Ok(Self { space, weights })
    }

    /// Wraps weights that already sum to one (exactly, or within 1e-12 in float mode).
    pub fn normalized(space: Space, weights: Vec<S>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                got: weights.len(),
            });
        }
        let mut total = S::zero();
        for (i, w) in weights.iter().enumerate() {
            if w.is_negative() {
                return Err(Error::NegativeWeight {
                    index: i,
                    value: w.to_repr(),
                });
            }
            total += w;
        }
        if !total.approx_eq(&S::one(), 1e-12) {
            return Err(Error::NotNormalized(total.to_repr()));
        }
        Ok(Self { space, weights })
    }

    pub fn point_mass(space: Space, index: usize) -> Self {
        let mut weights = vec![S::zero(); space.len()];
        weights[index] = S::one();
        Self { space, weights }
    }

    pub fn uniform(space: Space) -> Self {
        let n = space.len() as i64;
        let weights = vec![S::from_ratio(1, n); space.len()];
        Self { space, weights }
    }

    /// Builds a distribution from sparse `(index, weight)` entries.
    pub fn from_sparse(space: Space, entries: &[(usize, S)]) -> Result<Self> {
        let mut weights = vec![S::zero(); space.len()];
        for (i, w) in entries {
            if *i >= space.len() {
                return Err(Error::UnknownState(format!("index {i}")));
            }
            weights[*i] += w;
        }
        Self::normalized(space, weights)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> &S {
        &self.weights[i]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Indices carrying positive mass, with their weights.
    pub fn support(&self) -> Vec<(usize, S)> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(i, w)| (i, w.clone()))
            .collect()
    }

    /// Cumulative distribution in state order.
    pub fn cdf(&self) -> Result<Vec<S>> {
        if !self.space.is_total() {
            return Err(Error::NotTotallyOrdered);
        }
        Ok(prefix_sums(&self.weights))
    }

    /// Expectation of a function given by its values on the states.
    pub fn expect(&self, values: &[S]) -> S {
        let mut acc = S::zero();
        for (w, v) in self.weights.iter().zip(values) {
            if !w.is_zero() {
                acc += &(w.clone() * v.clone());
            }
        }
        acc
    }

    pub fn to_f64(&self) -> Dist<f64> {
        Dist {
            space: self.space.clone(),
            weights: self.weights.iter().map(Scalar::to_f64).collect(),
        }
    }
}

pub(crate) fn prefix_sums<S: Scalar>(w: &[S]) -> Vec<S> {
    let mut acc = S::zero();
    w.iter()
        .map(|x| {
            acc += x;
            acc.clone()
        })
        .collect()
}

/// `make_dist`: normalize nonnegative weights.
pub fn make_dist<S: Scalar>(space: Space, weights: Vec<S>) -> Result<Dist<S>> {
    Dist::new(space, weights)
}

/// True iff `upper` stochastically dominates `lower`: `cdf(upper) <= cdf(lower)` pointwise.
pub fn stochastically_dominates<S: Scalar>(upper: &Dist<S>, lower: &Dist<S>) -> Result<bool> {
    ensure_same(&upper.space, &lower.space)?;
    let cu = upper.cdf()?;
    let cl = lower.cdf()?;
    Ok(cu.iter().zip(&cl).all(|(u, l)| u.le_tol(l, S::TOL)))
}

/// Half the L1 distance between two distributions on the same space.
pub fn total_variation<S: Scalar>(mu: &Dist<S>, nu: &Dist<S>) -> Result<S> {
    ensure_same(&mu.space, &nu.space)?;
    let mut acc = S::zero();
    for (a, b) in mu.weights.iter().zip(&nu.weights) {
        acc += &(a.clone() - b.clone()).abs();
    }
    Ok(acc / S::from_int(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanOrder {
    /// Support inside `{(x, y): x <= y}`.
    Below,
    /// Support inside `{(x, y): x >= y}`.
    Above,
}

/// A joint law with prescribed margins, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingPlan<S> {
    rows: Space,
    cols: Space,
    entries: BTreeMap<(usize, usize), S>,
    ordered: Option<PlanOrder>,
}

impl<S: Scalar> CouplingPlan<S> {
    /// Builds a plan from entries, summing duplicates and dropping zeros.
    /// Margins are not prescribed here; see [`Self::check_margins`].
    pub fn from_entries(
        rows: Space,
        cols: Space,
        entries: impl IntoIterator<Item = ((usize, usize), S)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<(usize, usize), S> = BTreeMap::new();
        for ((i, j), w) in entries {
            if i >= rows.len() || j >= cols.len() {
                return Err(Error::UnknownState(format!("({i}, {j})")));
            }
            if w.is_negative() {
                return Err(Error::NegativeWeight {
                    index: i,
                    value: w.to_repr(),
                });
            }
            if w.is_zero() {
                continue;
            }
            *map.entry((i, j)).or_insert_with(S::zero) += &w;
        }
        let mut plan = Self {
            rows,
            cols,
            entries: map,
            ordered: None,
        };
        plan.ordered = plan.detect_order();
        Ok(plan)
    }

    /// The product coupling `mu ⊗ nu`.
    pub fn product(mu: &Dist<S>, nu: &Dist<S>) -> Self {
        let entries = mu
            .support()
            .into_iter()
            .flat_map(|(i, a)| nu.support().into_iter().map(move |(j, b)| ((i, j), a.clone() * b)));
        Self::from_entries(mu.space.clone(), nu.space.clone(), entries).expect("valid product")
    }

    /// Diagonal coupling of a distribution with itself.
    pub fn diagonal(mu: &Dist<S>) -> Self {
        let entries = mu.support().into_iter().map(|(i, a)| ((i, i), a));
        Self::from_entries(mu.space.clone(), mu.space.clone(), entries).expect("valid diagonal")
    }

    fn detect_order(&self) -> Option<PlanOrder> {
        if !self.rows.is_total() || !self.cols.is_total() {
            return None;
        }
        let below = self
            .entries
            .keys()
            .all(|&(i, j)| self.rows.label(i) <= self.cols.label(j));
        let above = self
            .entries
            .keys()
            .all(|&(i, j)| self.rows.label(i) >= self.cols.label(j));
        match (below, above) {
            (true, _) => Some(PlanOrder::Below),
            (false, true) => Some(PlanOrder::Above),
            _ => None,
        }
    }

    pub fn rows(&self) -> &Space {
        &self.rows
    }

    pub fn cols(&self) -> &Space {
        &self.cols
    }

    pub fn ordered(&self) -> Option<PlanOrder> {
        self.ordered
    }

    /// True iff the support lies in `{x <= y}`.
    pub fn is_below(&self) -> bool {
        self.rows.is_total()
            && self.cols.is_total()
            && self
                .entries
                .keys()
                .all(|&(i, j)| self.rows.label(i) <= self.cols.label(j))
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(S::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &S)> {
        self.entries.iter().map(|(&(i, j), w)| (i, j, w))
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn row_margin(&self) -> Vec<S> {
        let mut m = vec![S::zero(); self.rows.len()];
        for (&(i, _), w) in &self.entries {
            m[i] += w;
        }
        m
    }

    pub fn col_margin(&self) -> Vec<S> {
        let mut m = vec![S::zero(); self.cols.len()];
        for (&(_, j), w) in &self.entries {
            m[j] += w;
        }
        m
    }

    /// Checks both margins against prescribed distributions (tolerance `S::TOL`).
    pub fn check_margins(&self, mu: &Dist<S>, nu: &Dist<S>) -> bool {
        let close = |a: &[S], b: &[S]| a.iter().zip(b).all(|(x, y)| x.approx_eq(y, 1e-10));
        same_space(&self.rows, &mu.space)
            && same_space(&self.cols, &nu.space)
            && close(&self.row_margin(), mu.weights())
            && close(&self.col_margin(), nu.weights())
    }

    /// Expected cost under the plan.
    pub fn cost(&self, cost: impl Fn(usize, usize) -> S) -> S {
        let mut acc = S::zero();
        for (&(i, j), w) in &self.entries {
            acc += &(w.clone() * cost(i, j));
        }
        acc
    }

    /// Conditional law of the column given row `i`, as sparse normalized entries.
    pub fn conditional_row(&self, i: usize) -> Vec<(usize, S)> {
        let row: Vec<(usize, S)> = self
            .entries
            .range((i, 0)..(i + 1, 0))
            .map(|(&(_, j), w)| (j, w.clone()))
            .collect();
        let mut total = S::zero();
        for (_, w) in &row {
            total += w;
        }
        row.into_iter().map(|(j, w)| (j, w / total.clone())).collect()
    }

    pub fn to_f64(&self) -> CouplingPlan<f64> {
        CouplingPlan {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            entries: self.entries.iter().map(|(k, w)| (*k, w.to_f64())).collect(),
            ordered: self.ordered,
        }
    }
}

/// The comonotone coupling: the mass of the overlap of CDF intervals. Both
/// spaces must be totally ordered.
pub fn quantile_coupling<S: Scalar>(mu: &Dist<S>, nu: &Dist<S>) -> Result<CouplingPlan<S>> {
    if !mu.space.is_total() || !nu.space.is_total() {
        return Err(Error::NotTotallyOrdered);
    }
    let a = mu.support();
    let b = nu.support();
    let mut entries = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0].1.clone(), b[0].1.clone());
    while i < a.len() && j < b.len() {
        let take = S::min_of(&ra, &rb);
        entries.push(((a[i].0, b[j].0), take.clone()));
        ra -= &take;
        rb -= &take;
        let row_done = ra.is_negligible();
        let col_done = rb.is_negligible();
        if row_done {
            i += 1;
            if i < a.len() {
                ra = a[i].1.clone();
            }
        }
        if col_done {
            j += 1;
            if j < b.len() {
                rb = b[j].1.clone();
            }
        }
        if !row_done && !col_done {
            // Float residue: both cannot stay positive after taking the minimum.
            break;
        }
    }
    CouplingPlan::from_entries(mu.space.clone(), nu.space.clone(), entries)
}

/// A joint law on three spaces produced by [`glue_couplings`].
#[derive(Debug, Clone)]
pub struct TripleJoint<S> {
    pub spaces: [Space; 3],
    pub entries: BTreeMap<(usize, usize, usize), S>,
}

impl<S: Scalar> TripleJoint<S> {
    pub fn get(&self, a: usize, b: usize, c: usize) -> S {
        self.entries.get(&(a, b, c)).cloned().unwrap_or_else(S::zero)
    }

    fn margin(&self, first: usize, second: usize) -> CouplingPlan<S> {
        let entries = self.entries.iter().map(|(&(a, b, c), w)| {
            let idx = [a, b, c];
            ((idx[first], idx[second]), w.clone())
        });
        CouplingPlan::from_entries(self.spaces[first].clone(), self.spaces[second].clone(), entries)
            .expect("margin of a valid joint")
    }

    pub fn margin_ab(&self) -> CouplingPlan<S> {
        self.margin(0, 1)
    }

    pub fn margin_bc(&self) -> CouplingPlan<S> {
        self.margin(1, 2)
    }

    pub fn margin_ac(&self) -> CouplingPlan<S> {
        self.margin(0, 2)
    }
}

/// Relatively independent gluing over the common middle margin:
/// `P(a, b, c) = π_ab(a, b) π_bc(b, c) / ν(b)`.
pub fn glue_couplings<S: Scalar>(ab: &CouplingPlan<S>, bc: &CouplingPlan<S>) -> Result<TripleJoint<S>> {
    ensure_same(&ab.cols, &bc.rows)?;
    let nu = ab.col_margin();
    let nu2 = bc.row_margin();
    for (b, (x, y)) in nu.iter().zip(&nu2).enumerate() {
        if !x.approx_eq(y, 1e-10) {
            return Err(Error::MarginMismatch(b));
        }
    }
    let mut by_middle: BTreeMap<usize, Vec<(usize, S)>> = BTreeMap::new();
    for (b, c, w) in bc.entries() {
        by_middle.entry(b).or_default().push((c, w.clone()));
    }
    let mut entries = BTreeMap::new();
    for (a, b, w_ab) in ab.entries() {
        if nu[b].is_zero() {
            continue;
        }
        if let Some(cs) = by_middle.get(&b) {
            for (c, w_bc) in cs {
                let w = w_ab.clone() * w_bc.clone() / nu[b].clone();
                if !w.is_zero() {
                    entries.insert((a, b, *c), w);
                }
            }
        }
    }
    Ok(TripleJoint {
        spaces: [ab.rows.clone(), ab.cols.clone(), bc.cols.clone()],
        entries,
    })
}

impl fmt::Display for OrderedStateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.len()).map(|i| self.state_name(i)).collect();
        write!(f, "level {}: {{{}}}", self.level, names.join(", "))
    }
}

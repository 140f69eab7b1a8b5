use crate::error::{Error, Result};
use crate::probcore::Space;
use crate::scalar::Scalar;

use super::LevelKernel;

/// Quantile updating function of a kernel: for each source state, the unit
/// interval is cut at the CDF breakpoints of its row and each piece is
/// labelled with a target state.
#[derive(Debug, Clone)]
pub struct UpdatingFunction<S> {
    source: Space,
    target: Space,
    /// Per source: `(upper endpoint, target)` with increasing endpoints ending at 1.
    parts: Vec<Vec<(S, usize)>>,
    parts_f64: Vec<Vec<(f64, usize)>>,
    increasing: bool,
}

/// Builds the quantile updating function `f(x, u) = inf{t : F_x(t) >= u}` as
/// interval partitions. The increasing flag is computed from the endpoints.
pub fn quantile_updating<S: Scalar>(kernel: &LevelKernel<S>) -> Result<UpdatingFunction<S>> {
    if !kernel.target().is_total() {
        return Err(Error::NotTotallyOrdered);
    }
    let parts: Vec<Vec<(S, usize)>> = kernel
        .rows()
        .iter()
        .map(|row| {
            let mut acc = S::zero();
            let mut out: Vec<(S, usize)> = row
                .iter()
                .map(|(j, p)| {
                    acc += p;
                    (acc.clone(), *j)
                })
                .collect();
            // Pin the final endpoint to 1 so float residue never leaves a gap.
            if let Some(last) = out.last_mut() {
                last.0 = S::one();
            }
            out
        })
        .collect();
    Ok(UpdatingFunction::from_parts(
        kernel.source().clone(),
        kernel.target().clone(),
        parts,
    ))
}

impl<S: Scalar> UpdatingFunction<S> {
    pub(crate) fn from_parts(source: Space, target: Space, parts: Vec<Vec<(S, usize)>>) -> Self {
        let parts_f64 = parts
            .iter()
            .map(|p| p.iter().map(|(e, j)| (e.to_f64(), *j)).collect())
            .collect();
        let mut f = Self {
            source,
            target,
            parts,
            parts_f64,
            increasing: false,
        };
        f.increasing = f.source.is_total()
            && (1..f.parts.len()).all(|x| {
                f.overlaps(x - 1, x)
                    .iter()
                    .all(|(_, a, b)| f.target.label(*a) <= f.target.label(*b))
            });
        f
    }

    pub fn source(&self) -> &Space {
        &self.source
    }

    pub fn target(&self) -> &Space {
        &self.target
    }

    /// For almost every `u`, `x <= x'` implies `f(x, u) <= f(x', u)`.
    pub fn is_increasing(&self) -> bool {
        self.increasing
    }

    /// Interval partition of the unit interval for source `x`.
    pub fn partition(&self, x: usize) -> &[(S, usize)] {
        &self.parts[x]
    }

    /// Lengths of the pieces of source `x`, accumulated per target (its kernel row).
    pub fn pushforward(&self, x: usize) -> Vec<(usize, S)> {
        let mut out: Vec<(usize, S)> = Vec::new();
        let mut lo = S::zero();
        for (hi, j) in &self.parts[x] {
            let len = hi.clone() - lo.clone();
            lo = hi.clone();
            match out.iter_mut().find(|e| e.0 == *j) {
                Some(e) => e.1 += &len,
                None => out.push((*j, len)),
            }
        }
        out.retain(|e| !e.1.is_zero());
        out.sort_by_key(|e| e.0);
        out
    }

    /// `f(x, u)` for `u` in `[0, 1)`.
    pub fn eval(&self, x: usize, u: f64) -> usize {
        let p = &self.parts_f64[x];
        for (hi, j) in p {
            if u < *hi {
                return *j;
            }
        }
        p.last().expect("nonempty row").1
    }

    /// Pieces of positive length of the common refinement of two partitions:
    /// `(length, f(x, ·), f(y, ·))`.
    pub fn overlaps(&self, x: usize, y: usize) -> Vec<(S, usize, usize)> {
        let a = &self.parts[x];
        let b = &self.parts[y];
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        let mut lo = S::zero();
        while i < a.len() && j < b.len() {
            let hi = S::min_of(&a[i].0, &b[j].0);
            let len = hi.clone() - lo.clone();
            if len.is_positive() {
                out.push((len, a[i].1, b[j].1));
            }
            if a[i].0 == hi {
                i += 1;
            }
            if b[j].0 == hi {
                j += 1;
            }
            lo = hi;
        }
        out
    }
}

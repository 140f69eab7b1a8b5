use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::probcore::{ensure_same, prefix_sums, Dist, Space};
use crate::scalar::Scalar;

/// Row-stochastic transition matrix between two levels, rows stored sparsely
/// as `(target index, probability)` with strictly increasing targets.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelKernel<S> {
    source: Space,
    target: Space,
    rows: Vec<Vec<(usize, S)>>,
}

impl<S: Scalar> LevelKernel<S> {
    pub fn new(source: Space, target: Space, rows: Vec<Vec<(usize, S)>>) -> Result<Self> {
        if rows.len() != source.len() {
            return Err(Error::LengthMismatch {
                expected: source.len(),
                got: rows.len(),
            });
        }
        let mut clean = Vec::with_capacity(rows.len());
        for row in rows {
            let mut acc: BTreeMap<usize, S> = BTreeMap::new();
            for (j, w) in row {
                if j >= target.len() {
                    return Err(Error::UnknownState(format!("target index {j}")));
                }
                if w.is_negative() {
                    return Err(Error::NegativeWeight {
                        index: j,
                        value: w.to_repr(),
                    });
                }
                if !w.is_zero() {
                    *acc.entry(j).or_insert_with(S::zero) += &w;
                }
            }
            let mut total = S::zero();
            for w in acc.values() {
                total += w;
            }
            if !total.approx_eq(&S::one(), 1e-12) {
                return Err(Error::NotNormalized(total.to_repr()));
            }
            clean.push(acc.into_iter().collect());
        }
        Ok(Self {
            source,
            target,
            rows: clean,
        })
    }

    pub fn from_dists(source: Space, target: Space, rows: &[Dist<S>]) -> Result<Self> {
        for r in rows {
            ensure_same(r.space(), &target)?;
        }
        Self::new(source, target, rows.iter().map(Dist::support).collect())
    }

    pub fn source(&self) -> &Space {
        &self.source
    }

    pub fn target(&self) -> &Space {
        &self.target
    }

    pub fn row(&self, x: usize) -> &[(usize, S)] {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Vec<(usize, S)>] {
        &self.rows
    }

    pub fn row_dist(&self, x: usize) -> Dist<S> {
        let mut w = vec![S::zero(); self.target.len()];
        for (j, p) in &self.rows[x] {
            w[*j] = p.clone();
        }
        Dist::normalized(self.target.clone(), w).expect("rows are normalized")
    }

    pub fn get(&self, x: usize, y: usize) -> S {
        self.rows[x]
            .binary_search_by_key(&y, |e| e.0)
            .map(|k| self.rows[x][k].1.clone())
            .unwrap_or_else(|_| S::zero())
    }

    /// `μ K`.
    pub fn push_forward(&self, mu: &Dist<S>) -> Result<Dist<S>> {
        ensure_same(mu.space(), &self.source)?;
        let mut out = vec![S::zero(); self.target.len()];
        for (x, wx) in mu.weights().iter().enumerate() {
            if wx.is_zero() {
                continue;
            }
            for (y, p) in &self.rows[x] {
                out[*y] += &(wx.clone() * p.clone());
            }
        }
        Dist::normalized(self.target.clone(), out)
    }

    /// Composition `self` then `next`.
    pub fn then(&self, next: &LevelKernel<S>) -> Result<LevelKernel<S>> {
        ensure_same(&self.target, &next.source)?;
        let width = next.target.len();
        let mut buf = vec![S::zero(); width];
        let mut touched = vec![false; width];
        let mut rows = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let mut idx = Vec::new();
            for (y, p) in row {
                for (z, q) in &next.rows[*y] {
                    if !touched[*z] {
                        touched[*z] = true;
                        idx.push(*z);
                    }
                    buf[*z] += &(p.clone() * q.clone());
                }
            }
            idx.sort_unstable();
            let mut out = Vec::with_capacity(idx.len());
            for z in idx {
                let w = std::mem::replace(&mut buf[z], S::zero());
                touched[z] = false;
                if !w.is_zero() {
                    out.push((z, w));
                }
            }
            rows.push(out);
        }
        Ok(LevelKernel {
            source: self.source.clone(),
            target: next.target.clone(),
            rows,
        })
    }

    /// Every row stochastically dominates the rows of smaller source states.
    /// Both spaces must be totally ordered.
    pub fn is_monotonic(&self) -> Result<bool> {
        if !self.source.is_total() || !self.target.is_total() {
            return Err(Error::NotTotallyOrdered);
        }
        let cdfs: Vec<Vec<S>> = (0..self.rows.len()).map(|x| self.dense_cdf(x)).collect();
        Ok(cdfs
            .windows(2)
            .all(|w| w[1].iter().zip(&w[0]).all(|(hi, lo)| hi.le_tol(lo, S::TOL))))
    }

    fn dense_cdf(&self, x: usize) -> Vec<S> {
        let mut w = vec![S::zero(); self.target.len()];
        for (j, p) in &self.rows[x] {
            w[*j] = p.clone();
        }
        prefix_sums(&w)
    }

    /// Rows pairwise distinct.
    pub fn is_identifiable(&self) -> bool {
        let n = self.rows.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if rows_equal(&self.rows[i], &self.rows[j]) {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_f64(&self) -> LevelKernel<f64> {
        LevelKernel {
            source: self.source.clone(),
            target: self.target.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|(j, p)| (*j, p.to_f64())).collect())
                .collect(),
        }
    }
}

fn rows_equal<S: Scalar>(a: &[(usize, S)], b: &[(usize, S)]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.0 == y.0 && x.1.approx_eq(&y.1, S::TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probcore::OrderedStateSpace;
    use crate::scalar::Exact;

    fn q(n: i64, d: i64) -> Exact {
        Exact::from_ratio(n, d)
    }

    fn two() -> (Space, Space) {
        (
            OrderedStateSpace::range(-1, 1).unwrap(),
            OrderedStateSpace::range(0, 1).unwrap(),
        )
    }

    #[test]
    fn monotonicity_examples() {
        let (a, b) = two();
        let same = LevelKernel::new(a.clone(), b.clone(), vec![vec![(0, q(1, 3)), (1, q(2, 3))]; 2]).unwrap();
        assert!(same.is_monotonic().unwrap());
        assert!(!same.is_identifiable());
        let reversed = LevelKernel::new(a.clone(), b.clone(), vec![vec![(1, q(1, 1))], vec![(0, q(1, 1))]]).unwrap();
        assert!(!reversed.is_monotonic().unwrap());
        assert!(reversed.is_identifiable());
        let c = OrderedStateSpace::coordinates(-1, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let k = LevelKernel::new(c, b, vec![vec![(0, q(1, 1))], vec![(1, q(1, 1))]]).unwrap();
        assert_eq!(k.is_monotonic(), Err(Error::NotTotallyOrdered));
    }

    #[test]
    fn rejects_unnormalized_rows() {
        let (a, b) = two();
        assert!(matches!(
            LevelKernel::new(a, b, vec![vec![(0, q(1, 2))], vec![(1, q(1, 1))]]),
            Err(Error::NotNormalized(_))
        ));
    }
}

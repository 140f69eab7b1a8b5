use std::sync::RwLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};

use crate::scalar::Scalar;

// Rows A(1, ·), A(2, ·), ... grown on demand; readers never see a partial row.
static EULERIAN: RwLock<Vec<Vec<BigUint>>> = RwLock::new(Vec::new());

/// Eulerian number `A(n, k)`: permutations of `n` with `k` descents.
/// Zero outside `n >= 1, 0 <= k <= n - 1`.
pub fn eulerian(n: u32, k: i64) -> BigUint {
    if n == 0 || k < 0 || k >= n as i64 {
        return BigUint::zero();
    }
    {
        let table = EULERIAN.read().expect("eulerian table");
        if let Some(row) = table.get(n as usize - 1) {
            return row[k as usize].clone();
        }
    }
    let mut table = EULERIAN.write().expect("eulerian table");
    while table.len() < n as usize {
        let m = table.len() as u64 + 1;
        let row = if m == 1 {
            vec![BigUint::one()]
        } else {
            let prev = &table[m as usize - 2];
            (0..m)
                .map(|j| {
                    let mut acc = BigUint::zero();
                    if j < m - 1 {
                        acc += &prev[j as usize] * (j + 1);
                    }
                    if j >= 1 {
                        acc += &prev[j as usize - 1] * (m - j);
                    }
                    acc
                })
                .collect()
        };
        table.push(row);
    }
    table[n as usize - 1][k as usize].clone()
}

fn binom(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// The generalized Eulerian number `A₀,₁(a, b)`, evaluated through the
/// alternating sum with `|n| = a + b + 1`:
/// `Σ_{t=0}^{a} (−1)^{a−t} C(t+2, 2) C(a+b+3, a−t) (1+t)^{a+b}`.
/// It counts Euler-graph paths from vertex `b + 1` at level `−(a + b + 1)`
/// to vertex 1 at level −1. Zero when `a < 0` or `b < -1`.
pub fn generalized_eulerian_a01(a: i64, b: i64) -> BigUint {
    if a < 0 || b < -1 {
        return BigUint::zero();
    }
    let (a, absn) = (a as u64, (a + b + 1) as u64);
    if absn == 0 {
        return BigUint::zero();
    }
    let mut acc = BigInt::zero();
    for t in 0..=a {
        let term = binom(t + 2, 2) * binom(absn + 2, a - t) * num_traits::pow(BigUint::from(1 + t), absn as usize - 1);
        let term = BigInt::from_biguint(Sign::Plus, term);
        if (a - t) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc.to_biguint().expect("path counts are nonnegative")
}

/// `ℙ(V_{−1} = 1 | V_n = v)` under any central measure on the Euler graph,
/// `A₀,₁(|n|−v, v−1) / A(|n|+1, v)`.
pub fn euler_conditional<S: Scalar>(v: u64, absn: u64) -> S {
    assert!(v <= absn && absn >= 1, "vertex {v} not at level -{absn}");
    let num = generalized_eulerian_a01((absn - v) as i64, v as i64 - 1);
    let den = eulerian(absn as u32 + 1, v as i64);
    S::from_big_ratio(&BigInt::from(num), &BigInt::from(den))
}

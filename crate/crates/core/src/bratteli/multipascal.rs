use crate::error::{Error, Result};
use crate::probcore::{CouplingPlan, Space};
use crate::scalar::Scalar;

/// Canonical block assignment for the partition coupling: coordinate of each
/// index `1..=N` (as position `0..N`). Shared coordinates (`v(i) = v′(i)`)
/// come first, then the remaining coordinates of `v`, in coordinate order.
fn blocks(v: &[i64], shared: &[bool]) -> Vec<usize> {
    let mut out = Vec::new();
    for pass in [true, false] {
        for (i, &c) in v.iter().enumerate() {
            if shared[i] == pass {
                out.extend(std::iter::repeat_n(i, c as usize));
            }
        }
    }
    out
}

/// Well-ordered coupling of the d-Pascal rows of `v` and `v′` at level `n`
/// (spaces `from` at `n`, `to` at `n + 1`): index `u` uniform in `1..=|n|`
/// moves `v` to `v − e_{i(u)}` and `v′` to `v′ − e_{i′(u)}`.
pub fn wellordered_coupling_multipascal<S: Scalar>(
    from: &Space,
    to: &Space,
    v: usize,
    vp: usize,
) -> Result<CouplingPlan<S>> {
    let (a, b) = match (from.coord(v), from.coord(vp)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::UnknownState(format!("({v}, {vp}) at level {}", from.level()))),
    };
    let total: i64 = a.iter().sum();
    if total != b.iter().sum::<i64>() || total != from.level().unsigned_abs() as i64 {
        return Err(Error::InvalidParameter(format!(
            "coordinate sums of {} and {} must both equal {}",
            from.state_name(v),
            from.state_name(vp),
            from.level().unsigned_abs()
        )));
    }
    if to.level() != from.level() + 1 {
        return Err(Error::InvalidLevels(format!(
            "target level {} is not {} + 1",
            to.level(),
            from.level()
        )));
    }
    let shared: Vec<bool> = a.iter().zip(b).map(|(x, y)| x == y).collect();
    let (ia, ib) = (blocks(a, &shared), blocks(b, &shared));
    let w = S::from_ratio(1, total);
    let step = |c: &[i64], i: usize| {
        let mut t = c.to_vec();
        t[i] -= 1;
        to.index_of_coords(&t)
            .ok_or_else(|| Error::UnknownState(format!("{t:?} at level {}", to.level())))
    };
    let entries = ia
        .iter()
        .zip(&ib)
        .map(|(&i, &j)| Ok(((step(a, i)?, step(b, j)?), w.clone())))
        .collect::<Result<Vec<_>>>()?;
    CouplingPlan::from_entries(to.clone(), to.clone(), entries)
}

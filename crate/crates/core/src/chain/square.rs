//! The square walk: a walk on the vertices of `{−1,1}²` flipping one
//! uniformly chosen coordinate per step.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::probcore::{Dist, OrderedStateSpace, Space};
use crate::scalar::Scalar;

use super::{ChainRule, LevelKernel, LeveledChain};

/// State order used for every level.
pub const SQUARE_STATES: [[i64; 2]; 4] = [[-1, -1], [-1, 1], [1, -1], [1, 1]];

#[derive(Debug, Clone, Copy, Default)]
pub struct SquareWalkRule;

fn index(c: [i64; 2]) -> usize {
    SQUARE_STATES
        .iter()
        .position(|s| *s == c)
        .expect("vertex of the square")
}

impl<S: Scalar> ChainRule<S> for SquareWalkRule {
    fn name(&self) -> String {
        "square-walk".into()
    }

    fn space(&self, level: i32) -> Result<Space> {
        OrderedStateSpace::coordinates(level, SQUARE_STATES.iter().map(|c| c.to_vec()).collect())
    }

    fn kernel(&self, level: i32) -> Result<LevelKernel<S>> {
        let half = S::from_ratio(1, 2);
        let rows = SQUARE_STATES
            .iter()
            .map(|&[a, b]| vec![(index([-a, b]), half.clone()), (index([a, -b]), half.clone())])
            .collect();
        LevelKernel::new(
            <Self as ChainRule<S>>::space(self, level - 1)?,
            <Self as ChainRule<S>>::space(self, level)?,
            rows,
        )
    }
}

pub fn square_walk_chain<S: Scalar>(depth: i32) -> Result<LeveledChain<S>> {
    if depth > 0 {
        return Err(Error::InvalidLevels(format!("depth {depth} must be <= 0")));
    }
    let rule = SquareWalkRule;
    let seed = Dist::uniform(<SquareWalkRule as ChainRule<S>>::space(&rule, depth)?);
    LeveledChain::new(Arc::new(rule), depth, seed)
}

use evalexpr::{ContextWithMutableVariables, HashMapContext, Value};
use filtra_core::bratteli::{
    bernoulli_pascal_chain, multinomial_multipascal_chain, next_jump_graph, odometer_graph, symmetric_euler_chain,
    uniform_path_chain, CentralChain,
};
use filtra_core::chain::LambdaRule;
use filtra_core::scalar::Scalar;

use crate::args::{GraphKind, ModeArgs, ParamArgs, Policy, Strategy};
use crate::error::{config, CliResult};
use filtra_core::chain::StartPolicy;
use filtra_core::transport::LiftStrategy;

pub fn parse_scalar<S: Scalar>(s: &str, what: &str) -> CliResult<S> {
    S::parse_repr(s).map_err(|e| config(format!("{what}: {e}")))
}

/// `--depth D` as the bottom level `-D`; `D` must be at least 1.
pub fn bottom_level(depth: i64) -> CliResult<i32> {
    if !(1..=100_000).contains(&depth) {
        return Err(config(format!(
            "depth must be a positive number of levels, got {depth}"
        )));
    }
    Ok(-(depth as i32))
}

pub fn use_float(mode: &ModeArgs) -> bool {
    mode.float
}

pub fn strategy(s: Strategy) -> LiftStrategy {
    match s {
        Strategy::Auto => LiftStrategy::Auto,
        Strategy::Lp => LiftStrategy::Lp,
        Strategy::Embedding => LiftStrategy::Embedding,
    }
}

pub fn policy(p: Policy) -> StartPolicy {
    match p {
        Policy::MinKantorovich => StartPolicy::MinKantorovich,
        Policy::Median => StartPolicy::Median,
    }
}

pub fn theta<S: Scalar>(params: &ParamArgs) -> CliResult<Vec<S>> {
    match &params.theta {
        Some(t) => {
            if t.len() != params.d {
                return Err(config(format!(
                    "--theta has {} entries but --d is {}",
                    t.len(),
                    params.d
                )));
            }
            t.iter().map(|s| parse_scalar(s, "theta")).collect()
        }
        None => Ok(vec![S::from_ratio(1, params.d as i64); params.d]),
    }
}

pub fn coordinate_weights<S: Scalar>(params: &ParamArgs) -> CliResult<Vec<S>> {
    match &params.weights {
        Some(w) => {
            if w.len() != params.d {
                return Err(config(format!(
                    "--weights has {} entries but --d is {}",
                    w.len(),
                    params.d
                )));
            }
            w.iter().map(|s| parse_scalar(s, "weights")).collect()
        }
        None => Ok(vec![S::from_ratio(1, params.d as i64); params.d]),
    }
}

/// The gallery chain on a graph with its default central measure.
pub fn graph_chain<S: Scalar>(kind: GraphKind, params: &ParamArgs, bottom: i32) -> CliResult<CentralChain<S>> {
    Ok(match kind {
        GraphKind::Pascal => bernoulli_pascal_chain(parse_scalar(&params.p, "p")?, bottom)?,
        GraphKind::Euler => symmetric_euler_chain(bottom)?,
        GraphKind::Multipascal => {
            if params.d < 2 {
                return Err(config("--d must be at least 2"));
            }
            multinomial_multipascal_chain(&theta::<S>(params)?, bottom)?
        }
        GraphKind::Odometer => uniform_path_chain(odometer_graph(bottom)?)?,
        GraphKind::NextJump => uniform_path_chain(next_jump_graph(bottom)?)?,
    })
}

/// Intensities from a rule such as `lambda=|n|+1`; `|n|` and `n` are the
/// level's absolute value and the level itself.
pub fn lambda_rule(rule: &str, bottom: i32) -> CliResult<LambdaRule> {
    let expr = rule.trim();
    let expr = expr
        .strip_prefix("lambda")
        .map(|r| r.trim_start())
        .and_then(|r| r.strip_prefix('='))
        .unwrap_or(expr);
    let expr = expr.replace("|n|", "absn");
    let tree = evalexpr::build_operator_tree(&expr).map_err(|e| config(format!("rule {rule:?}: {e}")))?;
    let mut values = Vec::with_capacity((1 - bottom) as usize);
    for n in bottom..=0 {
        let mut ctx = HashMapContext::new();
        ctx.set_value("absn".into(), Value::Float(n.unsigned_abs() as f64))
            .expect("fresh context");
        ctx.set_value("n".into(), Value::Float(n as f64))
            .expect("fresh context");
        let v = tree
            .eval_number_with_context(&ctx)
            .map_err(|e| config(format!("rule {rule:?} at level {n}: {e}")))?;
        values.push(v);
    }
    let label = rule.to_string();
    let table = LambdaRule::from_values(values);
    Ok(LambdaRule::from_fn(&label, move |n| table.at(n)))
}

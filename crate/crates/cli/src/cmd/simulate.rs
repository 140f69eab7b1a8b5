use std::fmt::Write as _;

use clap::ValueEnum;
use filtra_core::bratteli::{bernoulli_pascal_chain, multinomial_multipascal_chain, symmetric_euler_chain};
use filtra_core::chain::{
    choose_start, exact_pw_expectation, poisson_chain, square_walk_chain, LeveledChain, ProppWilson, DEFAULT_TAIL_BOUND,
};
use filtra_core::error::Error as CoreError;
use filtra_core::standardness::{
    coupling_cascade_simulation, CascadeTable, MultipascalCoupler, PairCoupler, QuantileCoupler, SquareFlipCoupler,
};
use filtra_core::transport::LevelMetric;
use serde::Serialize;

use crate::args::{CascadeArgs, ChainKind, Format, ParamArgs, Policy, PwArgs, SimulateCommand};
use crate::cmd::standardness::DEFAULT_RULE;
use crate::error::{config, CliResult};
use crate::output::{emit, to_csv, to_json};
use crate::select::{lambda_rule, parse_scalar, policy, theta};

pub fn run(c: &SimulateCommand) -> CliResult<()> {
    match c {
        SimulateCommand::Pw(a) => pw(a),
        SimulateCommand::Cascade(a) => cascade(a),
    }
}

fn policy_name(p: Policy) -> String {
    p.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

fn require_seed(seed: Option<u64>) -> CliResult<u64> {
    seed.ok_or_else(|| config("--seed is required for stochastic commands"))
}

fn float_chain(kind: ChainKind, params: &ParamArgs, bottom: i32) -> CliResult<LeveledChain<f64>> {
    Ok(match kind {
        ChainKind::Pascal => bernoulli_pascal_chain(parse_scalar::<f64>(&params.p, "p")?, bottom)?.chain,
        ChainKind::Euler => symmetric_euler_chain(bottom)?.chain,
        ChainKind::Multipascal => multinomial_multipascal_chain(&theta::<f64>(params)?, bottom)?.chain,
        ChainKind::SquareWalk => square_walk_chain(bottom)?,
        ChainKind::Poisson => {
            let rule = lambda_rule(params.rule.as_deref().unwrap_or(DEFAULT_RULE), bottom)?;
            poisson_chain(&rule, bottom, None, DEFAULT_TAIL_BOUND)?.chain
        }
    })
}

fn depth_of(values: &[u32], flag: &str) -> CliResult<i32> {
    match values.iter().copied().max() {
        Some(d) if (1..=100_000).contains(&d) && !values.contains(&0) => Ok(-(d as i32)),
        _ => Err(config(format!("{flag} needs positive depths"))),
    }
}

#[derive(Serialize)]
struct PwRow {
    m: i32,
    start: String,
    mc_mean: f64,
    mc_stderr: f64,
    trials: u64,
    exact: Option<f64>,
}

#[derive(Serialize)]
struct PwDoc {
    schema: &'static str,
    chain: String,
    n: i32,
    seed: u64,
    policy: String,
    metric: &'static str,
    rows: Vec<PwRow>,
}

fn pw(a: &PwArgs) -> CliResult<()> {
    let seed = require_seed(a.seed)?;
    if matches!(a.chain, ChainKind::SquareWalk | ChainKind::Multipascal) {
        return Err(config(
            "Propp–Wilson runs need totally ordered levels (pascal, euler or poisson)",
        ));
    }
    if a.trials == 0 {
        return Err(config("--trials must be positive"));
    }
    let mut ms = a.ms.clone();
    ms.sort_unstable();
    ms.dedup();
    let bottom = depth_of(&ms, "--ms")?;
    let chain = float_chain(a.chain, &a.params, bottom)?;
    if a.n <= -(ms[0] as i32) || a.n > 0 {
        return Err(config(format!("--n {} must lie above every -m and at most 0", a.n)));
    }
    if chain.space(a.n)?.len() < 2 {
        return Err(config(format!("level {} holds a single state", a.n)));
    }
    let rho = LevelMetric::discrete(chain.space(a.n)?.clone());
    let mut rows = Vec::with_capacity(ms.len());
    for &depth in &ms {
        let m = -(depth as i32);
        let x_m = choose_start(&chain, m, a.n, &rho, policy(a.policy))?;
        let est = ProppWilson::new(&chain, m, a.n, seed)?.estimate(x_m, &rho, a.trials)?;
        let exact = match exact_pw_expectation(&chain, m, x_m, a.n, &rho, a.exact_cap) {
            Ok(v) => Some(v),
            Err(CoreError::ProductCapExceeded { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        rows.push(PwRow {
            m,
            start: chain.space(m)?.state_name(x_m),
            mc_mean: est.mean,
            mc_stderr: est.stderr,
            trials: est.trials,
            exact,
        });
    }
    let doc = PwDoc {
        schema: "filtra.pw/1",
        chain: chain.name(),
        n: a.n,
        seed,
        policy: policy_name(a.policy),
        metric: "discrete",
        rows,
    };
    let body = match a.out.format.unwrap_or(Format::Text) {
        Format::Json => to_json(&doc)?,
        Format::Csv => to_csv(&doc.rows)?,
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "chain: {}, n = {}, seed {}, policy {}",
                doc.chain, doc.n, seed, doc.policy
            );
            let _ = writeln!(
                out,
                "{:>7}  {:>10}  {:>12}  {:>10}  {:>12}",
                "m", "x_m", "mc mean", "stderr", "exact"
            );
            for r in &doc.rows {
                let exact = r.exact.map_or("n/a".to_string(), |v| format!("{v:.8}"));
                let _ = writeln!(
                    out,
                    "{:>7}  {:>10}  {:>12.8}  {:>10.2e}  {:>12}",
                    r.m, r.start, r.mc_mean, r.mc_stderr, exact
                );
            }
            out
        }
        Format::Svg => return Err(config("simulate supports json, csv and text output")),
    };
    emit(a.out.output.as_deref(), &body)
}

#[derive(Serialize)]
struct CascadeDoc<'a> {
    schema: &'static str,
    eval_level: i32,
    policy: String,
    #[serde(flatten)]
    table: &'a CascadeTable,
}

fn cascade(a: &CascadeArgs) -> CliResult<()> {
    let seed = require_seed(a.seed)?;
    if a.trials == 0 {
        return Err(config("--trials must be positive"));
    }
    let mut depths = a.starts.clone();
    depths.sort_unstable();
    depths.dedup();
    if depths.len() < 2 {
        return Err(config("--starts needs at least two distinct depths"));
    }
    let bottom = depth_of(&depths, "--starts")?;
    let chain = float_chain(a.chain, &a.params, bottom)?;
    let eval = match a.chain {
        ChainKind::Pascal | ChainKind::Euler | ChainKind::Multipascal => -1,
        ChainKind::SquareWalk | ChainKind::Poisson => 0,
    };
    if -(depths[0] as i32) >= eval {
        return Err(config(format!("start depths must lie below level {eval}")));
    }
    let coupler: &dyn PairCoupler<f64> = match a.chain {
        ChainKind::Multipascal => &MultipascalCoupler,
        ChainKind::SquareWalk => &SquareFlipCoupler,
        _ => &QuantileCoupler,
    };
    let rho = LevelMetric::discrete(chain.space(eval)?.clone());
    let starts = depths
        .iter()
        .map(|&d| {
            let n = -(d as i32);
            Ok((n, choose_start(&chain, n, eval, &rho, policy(a.policy))?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let table = coupling_cascade_simulation(&chain, coupler, &starts, &[(eval, rho)], a.trials, seed)?;
    let doc = CascadeDoc {
        schema: "filtra.cascade/1",
        eval_level: eval,
        policy: policy_name(a.policy),
        table: &table,
    };
    let body = match a.out.format.unwrap_or(Format::Text) {
        Format::Json => to_json(&doc)?,
        Format::Csv => to_csv(&table.rows)?,
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "chain: {}, coupler: {}, seed {}, {} trials",
                table.chain, table.coupler, seed, table.trials
            );
            for (j, (n, x)) in table.starts.iter().enumerate() {
                let _ = writeln!(out, "Z^{j} starts at level {n} in state {x}");
            }
            let _ = writeln!(out, "{:>3}  {:>6}  {:>12}  {:>10}", "j", "level", "E rho", "stderr");
            for r in &table.rows {
                let _ = writeln!(out, "{:>3}  {:>6}  {:>12.6}  {:>10.2e}", r.j, r.level, r.mean, r.stderr);
            }
            out
        }
        Format::Svg => return Err(config("simulate supports json, csv and text output")),
    };
    emit(a.out.output.as_deref(), &body)
}

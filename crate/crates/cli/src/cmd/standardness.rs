use filtra_core::bratteli::{bernoulli_pascal_chain, multinomial_multipascal_chain, symmetric_euler_chain};
use filtra_core::chain::{poisson_chain, square_walk_chain, LeveledChain, DEFAULT_TAIL_BOUND};
use filtra_core::scalar::{Exact, Scalar};
use filtra_core::serial::{chain_from_doc, ChainDoc};
use filtra_core::standardness::{standardness_report, ReportConfig, StandardnessReport};
use filtra_core::transport::LevelMetric;

use crate::args::{ChainKind, Format, StandardnessArgs};
use crate::error::{config, CliResult};
use crate::output::{emit, to_json};
use crate::select::{coordinate_weights, lambda_rule, parse_scalar, strategy, theta, use_float};

pub const DEFAULT_RULE: &str = "lambda=|n|+1";

fn default_ladder(kind: Option<ChainKind>) -> Vec<u32> {
    match kind {
        Some(ChainKind::Poisson) => vec![50, 100, 200, 400],
        Some(ChainKind::Multipascal) => vec![6, 12, 24],
        _ => vec![8, 16, 32, 64],
    }
}

pub fn run(a: &StandardnessArgs) -> CliResult<()> {
    let report = if a.chain == Some(ChainKind::Poisson) {
        if a.mode.exact {
            return Err(config("the Poisson chain is available in float mode only"));
        }
        poisson(a)?
    } else if use_float(&a.mode) {
        report_mode::<f64>(a)?
    } else {
        report_mode::<Exact>(a)?
    };
    let format = a.out.format.unwrap_or(Format::Text);
    match (&a.out.output, format) {
        (Some(path), _) => {
            emit(Some(path), &to_json(&report)?)?;
            emit(None, &report.to_text())
        }
        (None, Format::Json) => emit(None, &to_json(&report)?),
        (None, Format::Text) => emit(None, &report.to_text()),
        (None, _) => Err(config("standardness supports json and text output")),
    }
}

fn ladder_config(a: &StandardnessArgs, n0: i32, tail: i32) -> CliResult<(ReportConfig, i32)> {
    let ladder = a.ladder.clone().unwrap_or_else(|| default_ladder(a.chain));
    let deepest = ladder.iter().copied().max().ok_or_else(|| config("empty --ladder"))?;
    if deepest == 0 || deepest > 100_000 {
        return Err(config(format!("ladder depths must lie in 1..=100000, got {deepest}")));
    }
    let mut cfg = ReportConfig::new(ladder, n0, tail);
    cfg.floor = a.floor;
    cfg.decay_tol = a.decay_tol;
    cfg.strategy = strategy(a.strategy);
    Ok((cfg, -(deepest as i32)))
}

fn report_mode<S: Scalar>(a: &StandardnessArgs) -> CliResult<StandardnessReport> {
    let kind = match (a.chain, &a.chain_file) {
        (Some(k), _) => k,
        (None, Some(path)) => return from_file::<S>(a, path),
        (None, None) => return Err(config("one of --chain or --chain-file is required")),
    };
    let bratteli = matches!(kind, ChainKind::Pascal | ChainKind::Euler | ChainKind::Multipascal);
    let (n0, tail) = if bratteli { (-1, -1) } else { (0, 0) };
    let (mut cfg, bottom) = ladder_config(a, n0, tail)?;
    let chain: LeveledChain<S> = match kind {
        ChainKind::Pascal => bernoulli_pascal_chain(parse_scalar(&a.params.p, "p")?, bottom)?.chain,
        ChainKind::Euler => symmetric_euler_chain(bottom)?.chain,
        ChainKind::Multipascal => multinomial_multipascal_chain(&theta::<S>(&a.params)?, bottom)?.chain,
        ChainKind::SquareWalk => square_walk_chain(bottom)?,
        ChainKind::Poisson => unreachable!("handled in float mode"),
    };
    let top = chain.space(n0)?.clone();
    let rho0 = if kind == ChainKind::Multipascal {
        cfg.notes.push("initial metric: weighted l1 at level -1".into());
        LevelMetric::weighted_l1(top.clone(), &coordinate_weights::<S>(&a.params)?)?
    } else {
        cfg.notes.push(format!("initial metric: discrete at level {n0}"));
        LevelMetric::discrete(top.clone())
    };
    cfg.notes
        .push(format!("tail criterion: discrete metric at level {tail}"));
    Ok(standardness_report(
        &chain,
        rho0,
        &LevelMetric::discrete(chain.space(tail)?.clone()),
        &cfg,
    )?)
}

fn from_file<S: Scalar>(a: &StandardnessArgs, path: &std::path::Path) -> CliResult<StandardnessReport> {
    let text = std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
    let doc: ChainDoc = serde_json::from_str(&text)?;
    let chain: LeveledChain<S> = chain_from_doc(&doc)?;
    let n0 = if chain.space(0)?.len() == 1 { -1 } else { 0 };
    let (mut cfg, bottom) = ladder_config(a, n0, n0)?;
    if bottom < chain.depth() {
        return Err(config(format!(
            "ladder reaches level {bottom} but the chain starts at {}",
            chain.depth()
        )));
    }
    cfg.notes.push(format!("chain file: {}", path.display()));
    cfg.notes
        .push(format!("initial and tail metric: discrete at level {n0}"));
    let rho = LevelMetric::discrete(chain.space(n0)?.clone());
    Ok(standardness_report(&chain, rho.clone(), &rho, &cfg)?)
}

fn poisson(a: &StandardnessArgs) -> CliResult<StandardnessReport> {
    let (mut cfg, bottom) = ladder_config(a, 0, 0)?;
    let rule_text = a.params.rule.as_deref().unwrap_or(DEFAULT_RULE);
    let rule = lambda_rule(rule_text, bottom)?;
    let pc = poisson_chain(&rule, bottom, None, DEFAULT_TAIL_BOUND)?;
    cfg.notes.push(format!(
        "rule {rule_text}; truncation K = {}, seed tail {:.3e}",
        pc.truncation, pc.tail
    ));
    cfg.notes
        .push("initial metric: absolute value at level 0; tail criterion: discrete metric at level 0".into());
    let top = pc.chain.space(0)?.clone();
    Ok(standardness_report(
        &pc.chain,
        LevelMetric::absolute(top.clone())?,
        &LevelMetric::discrete(top),
        &cfg,
    )?)
}

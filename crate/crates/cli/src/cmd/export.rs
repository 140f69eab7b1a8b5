use filtra_core::bratteli::{euler_graph, multipascal_graph, next_jump_graph, odometer_graph, pascal_graph};
use filtra_core::chain::{poisson_chain, square_walk_chain, DEFAULT_TAIL_BOUND};
use filtra_core::scalar::{Exact, Scalar};
use filtra_core::serial::{chain_to_doc, graph_to_doc};

use crate::args::{ChainKind, ExportArgs, Format, GraphKind};
use crate::cmd::standardness::DEFAULT_RULE;
use crate::error::{config, CliResult};
use crate::output::{emit, to_json};
use crate::select::{bottom_level, graph_chain, lambda_rule, use_float};

pub fn run(a: &ExportArgs) -> CliResult<()> {
    if !matches!(a.out.format, None | Some(Format::Json)) {
        return Err(config("export writes json only"));
    }
    let bottom = bottom_level(a.depth)?;
    let body = if let Some(g) = a.graph {
        let graph = match g {
            GraphKind::Pascal => pascal_graph(bottom)?,
            GraphKind::Euler => euler_graph(bottom)?,
            GraphKind::Multipascal => multipascal_graph(a.params.d, bottom)?,
            GraphKind::Odometer => odometer_graph(bottom)?,
            GraphKind::NextJump => next_jump_graph(bottom)?,
        };
        to_json(&graph_to_doc(&graph))?
    } else if a.chain == Some(ChainKind::Poisson) {
        if a.mode.exact {
            return Err(config("the Poisson chain is available in float mode only"));
        }
        let rule = lambda_rule(a.params.rule.as_deref().unwrap_or(DEFAULT_RULE), bottom)?;
        to_json(&chain_to_doc(
            &poisson_chain(&rule, bottom, None, DEFAULT_TAIL_BOUND)?.chain,
        )?)?
    } else if use_float(&a.mode) {
        chain_json::<f64>(a, bottom)?
    } else {
        chain_json::<Exact>(a, bottom)?
    };
    emit(a.out.output.as_deref(), &body)
}

fn chain_json<S: Scalar>(a: &ExportArgs, bottom: i32) -> CliResult<String> {
    let kind = a.chain.ok_or_else(|| config("one of --graph or --chain is required"))?;
    let chain = match kind {
        ChainKind::Pascal => graph_chain::<S>(GraphKind::Pascal, &a.params, bottom)?.chain,
        ChainKind::Euler => graph_chain::<S>(GraphKind::Euler, &a.params, bottom)?.chain,
        ChainKind::Multipascal => graph_chain::<S>(GraphKind::Multipascal, &a.params, bottom)?.chain,
        ChainKind::SquareWalk => square_walk_chain::<S>(bottom)?,
        ChainKind::Poisson => unreachable!("handled in float mode"),
    };
    to_json(&chain_to_doc(&chain)?)
}

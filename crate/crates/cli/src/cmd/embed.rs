use filtra_core::bratteli::{embedding_layers, embedding_svg};
use filtra_core::scalar::Exact;
use serde::Serialize;

use crate::args::{EmbedArgs, Format, GraphKind};
use crate::error::{config, CliResult};
use crate::output::{emit, to_json};
use crate::select::{bottom_level, graph_chain};

#[derive(Serialize)]
struct Layer {
    level: i32,
    positions: Vec<f64>,
}

pub fn run(a: &EmbedArgs) -> CliResult<()> {
    if a.graph == GraphKind::Multipascal {
        return Err(config("the line embedding needs a unidimensional graph"));
    }
    let bottom = bottom_level(a.depth)?;
    let cc = graph_chain::<Exact>(a.graph, &a.params, bottom)?;
    let layers = embedding_layers(&cc, bottom)?;
    let body = match a.out.format.unwrap_or(Format::Svg) {
        Format::Svg => embedding_svg(&cc.graph, &layers)?,
        Format::Json => to_json(
            &layers
                .into_iter()
                .map(|(level, positions)| Layer { level, positions })
                .collect::<Vec<_>>(),
        )?,
        _ => return Err(config("embed supports svg and json output")),
    };
    emit(a.out.output.as_deref(), &body)
}

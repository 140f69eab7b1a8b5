use std::fmt::Write as _;

use filtra_core::bratteli::closed_form_intrinsic;
use filtra_core::scalar::{Exact, Scalar};
use filtra_core::serial::metric_rows;
use filtra_core::standardness::intrinsic_metrics;
use filtra_core::transport::{LevelMetric, MetricKind};
use serde::Serialize;

use crate::args::{Format, GraphKind, MetricsArgs};
use crate::error::{config, CliError, CliResult};
use crate::output::{emit, to_csv, to_json};
use crate::select::{bottom_level, coordinate_weights, graph_chain, strategy, use_float};

#[derive(Serialize)]
struct LevelTable {
    level: i32,
    states: Vec<String>,
    kind: MetricKind,
    linear: bool,
    values: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct MetricsDoc {
    schema: &'static str,
    graph: String,
    mode: &'static str,
    depth: i64,
    initial_metric: String,
    verified: Option<bool>,
    levels: Vec<LevelTable>,
}

pub fn run(a: &MetricsArgs) -> CliResult<()> {
    if use_float(&a.mode) {
        run_mode::<f64>(a)
    } else {
        run_mode::<Exact>(a)
    }
}

fn run_mode<S: Scalar>(a: &MetricsArgs) -> CliResult<()> {
    let bottom = bottom_level(a.depth)?;
    let cc = graph_chain::<S>(a.graph, &a.params, bottom)?;
    let top = cc.chain.space(-1)?.clone();
    let (rho0, initial, weights) = if a.graph == GraphKind::Multipascal {
        let w = coordinate_weights::<S>(&a.params)?;
        let names: Vec<String> = w.iter().map(Scalar::to_repr).collect();
        (
            LevelMetric::weighted_l1(top, &w)?,
            format!("weighted l1 [{}] at level -1", names.join(", ")),
            Some(w),
        )
    } else {
        (LevelMetric::discrete(top), "discrete at level -1".to_string(), None)
    };
    let ladder = intrinsic_metrics(&cc.chain, -1, rho0, bottom, strategy(a.strategy))?;

    let mut mismatch = None;
    if a.verify {
        for (level, m) in ladder.iter() {
            let cf = closed_form_intrinsic::<S>(&cc.graph, level, weights.as_deref())?;
            let n = m.space().len();
            let bad = (0..n)
                .flat_map(|i| (i..n).map(move |j| (i, j)))
                .find(|&(i, j)| !m.get(i, j).approx_eq(&cf.get(i, j), S::TOL));
            if let Some((i, j)) = bad {
                mismatch = Some(format!(
                    "level {level}, pair ({}, {}): ladder {} vs closed form {}",
                    m.space().state_name(i),
                    m.space().state_name(j),
                    m.get(i, j).to_repr(),
                    cf.get(i, j).to_repr()
                ));
                break;
            }
        }
    }

    let format = a.out.format.unwrap_or(Format::Text);
    let body = match format {
        Format::Csv => to_csv(&ladder.iter().flat_map(|(_, m)| metric_rows(m)).collect::<Vec<_>>())?,
        Format::Json => {
            let levels = ladder
                .iter()
                .map(|(level, m)| {
                    let n = m.space().len();
                    LevelTable {
                        level,
                        states: (0..n).map(|i| m.space().state_name(i)).collect(),
                        kind: m.kind(),
                        linear: m.is_linear(),
                        values: (0..n)
                            .map(|i| (0..n).map(|j| m.get(i, j).to_repr()).collect())
                            .collect(),
                    }
                })
                .collect();
            to_json(&MetricsDoc {
                schema: "filtra.metrics/1",
                graph: cc.graph.name(),
                mode: if S::TOL == 0.0 { "exact" } else { "float" },
                depth: a.depth,
                initial_metric: initial,
                verified: a.verify.then_some(mismatch.is_none()),
                levels,
            })?
        }
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "graph: {}, initial metric: {initial}", cc.graph.name());
            for (level, m) in ladder.iter() {
                let _ = writeln!(out, "level {level} ({:?}, linear: {})", m.kind(), m.is_linear());
                let n = m.space().len();
                for i in 0..n {
                    let row: Vec<String> = (0..n).map(|j| m.get(i, j).to_repr()).collect();
                    let _ = writeln!(out, "  {:>12}: {}", m.space().state_name(i), row.join(" "));
                }
            }
            if a.verify {
                let _ = writeln!(
                    out,
                    "closed-form check: {}",
                    if mismatch.is_none() { "ok" } else { "MISMATCH" }
                );
            }
            out
        }
        Format::Svg => return Err(config("metrics supports json, csv and text output")),
    };
    emit(a.out.output.as_deref(), &body)?;
    match mismatch {
        Some(m) => Err(CliError::Verification(m)),
        None => Ok(()),
    }
}

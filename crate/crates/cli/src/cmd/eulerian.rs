use std::fmt::Write as _;

use filtra_core::bratteli::{euler_graph, eulerian, generalized_eulerian_a01, path_counts, paths_to};
use serde::Serialize;

use crate::args::{EulerianArgs, Format};
use crate::error::{config, CliError, CliResult};
use crate::output::{emit, to_json};
use crate::select::bottom_level;

#[derive(Serialize)]
struct A01Row {
    level: i32,
    values: Vec<String>,
}

#[derive(Serialize)]
struct EulerianDoc {
    schema: &'static str,
    depth: i64,
    /// `eulerian[i]` is `A(i + 1, ·)`.
    eulerian: Vec<Vec<String>>,
    a01: Vec<A01Row>,
    dims_match: bool,
    a01_matches_paths: bool,
}

fn row(n: u32) -> Vec<String> {
    (0..n as i64).map(|k| eulerian(n, k).to_string()).collect()
}

pub fn run(a: &EulerianArgs) -> CliResult<()> {
    if let Some(n) = a.n {
        if n == 0 {
            return Err(config("--n must be at least 1"));
        }
        return emit(a.out.output.as_deref(), &format!("{}\n", row(n).join(" ")));
    }
    let bottom = bottom_level(a.depth)?;
    let g = euler_graph(bottom)?;
    let dims = path_counts(&g);
    let to_top = paths_to(&g, -1, 1)?;
    let mut dims_match = true;
    let mut a01_match = true;
    let mut a01 = Vec::new();
    for level in (bottom..=-1).rev() {
        let absn = level.unsigned_abs() as i64;
        let mut values = Vec::new();
        for v in 0..=absn {
            dims_match &= *dims.dim(level, v as usize) == eulerian(absn as u32 + 1, v);
            let f = generalized_eulerian_a01(absn - v, v - 1);
            a01_match &= f == to_top[(level - bottom) as usize][v as usize];
            values.push(f.to_string());
        }
        a01.push(A01Row { level, values });
    }
    let doc = EulerianDoc {
        schema: "filtra.eulerian/1",
        depth: a.depth,
        eulerian: (1..=(a.depth as u32 + 1)).map(row).collect(),
        a01,
        dims_match,
        a01_matches_paths: a01_match,
    };
    let body = match a.out.format.unwrap_or(Format::Text) {
        Format::Json => to_json(&doc)?,
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "Eulerian numbers A(n, k):");
            for (i, r) in doc.eulerian.iter().enumerate() {
                let _ = writeln!(out, "  n = {:>3}: {}", i + 1, r.join(" "));
            }
            let _ = writeln!(out, "A01(|n| - v, v - 1) by level, v = 0..|n|:");
            for r in &doc.a01 {
                let _ = writeln!(out, "  {:>4}: {}", r.level, r.values.join(" "));
            }
            let flag = |b: bool| if b { "ok" } else { "MISMATCH" };
            let _ = writeln!(out, "dims = A(|n|+1, v): {}", flag(dims_match));
            let _ = writeln!(out, "A01 = path counts to vertex 1 at level -1: {}", flag(a01_match));
            out
        }
        _ => return Err(config("eulerian supports json and text output")),
    };
    emit(a.out.output.as_deref(), &body)?;
    if a.check && !(dims_match && a01_match) {
        return Err(CliError::Verification(
            "Eulerian formula and path counts disagree".into(),
        ));
    }
    Ok(())
}

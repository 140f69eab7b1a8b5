use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::transport::LevelMetric;

use super::central::CentralChain;
use super::eulerian::euler_conditional;
use super::graph::{BratteliGraph, GraphTag};

/// The closed-form intrinsic metric at level `n` (from the discrete metric at
/// level −1 for Pascal and Euler, from the weighted L1 metric at level −1 for
/// the d-dimensional Pascal graph). `weights` defaults to uniform.
pub fn closed_form_intrinsic<S: Scalar>(g: &BratteliGraph, n: i32, weights: Option<&[S]>) -> Result<LevelMetric<S>> {
    if n > -1 {
        return Err(Error::InvalidLevels(format!("level {n} must be <= -1")));
    }
    let space = g.space(n)?.clone();
    let absn = n.unsigned_abs() as i64;
    match g.tag() {
        GraphTag::Pascal => {
            let pos = (0..=absn).map(|v| S::from_ratio(v, absn)).collect();
            LevelMetric::from_positions(space, pos)
        }
        GraphTag::Euler => {
            let pos = (0..=absn as u64).map(|v| euler_conditional(v, absn as u64)).collect();
            LevelMetric::from_positions(space, pos)
        }
        GraphTag::Multipascal { d } => {
            let w: Vec<S> = match weights {
                Some(w) => w.to_vec(),
                None => vec![S::from_ratio(1, *d as i64); *d],
            };
            let scale = S::from_ratio(1, absn);
            let w: Vec<S> = w.into_iter().map(|a| a * scale.clone()).collect();
            LevelMetric::weighted_l1(space, &w)
        }
        other => Err(Error::Unsupported(format!(
            "no closed-form intrinsic metric for {}",
            other.name()
        ))),
    }
}

/// Line positions `ℙ(V_{−1} = 1 | V_n = v)` for a unidimensional graph whose
/// level −1 has two vertices.
pub fn embedding_coordinates<S: Scalar>(cc: &CentralChain<S>, n: i32) -> Result<Vec<S>> {
    if !cc.graph.tag().is_unidimensional() {
        return Err(Error::Unsupported(format!("no line embedding for {}", cc.graph.name())));
    }
    if cc.graph.space(-1)?.len() != 2 {
        return Err(Error::Unsupported("level -1 must have exactly two vertices".into()));
    }
    match n {
        -1 => Ok(vec![S::zero(), S::one()]),
        0 => Ok(vec![S::from_ratio(1, 2)]),
        _ => {
            let k = cc.chain.compose_kernels(n, -1)?;
            Ok((0..k.source().len()).map(|v| k.get(v, 1)).collect())
        }
    }
}

/// Positions for every level from `lowest` to 0; the root sits at 1/2.
pub fn embedding_layers<S: Scalar>(cc: &CentralChain<S>, lowest: i32) -> Result<Vec<(i32, Vec<f64>)>> {
    (lowest..=0)
        .map(|n| Ok((n, embedding_coordinates(cc, n)?.iter().map(Scalar::to_f64).collect())))
        .collect()
}

/// SVG 1.1 drawing: one horizontal row per level (root on top), vertices at
/// their unit-interval positions, edges between consecutive rows.
pub fn embedding_svg(g: &BratteliGraph, layers: &[(i32, Vec<f64>)]) -> Result<String> {
    const WIDTH: f64 = 800.0;
    const MARGIN: f64 = 40.0;
    const ROW: f64 = 36.0;
    let height = 2.0 * MARGIN + ROW * (layers.len().saturating_sub(1)) as f64;
    let x = |p: f64| MARGIN + p * (WIDTH - 2.0 * MARGIN);
    let y = |n: i32| MARGIN + ROW * (-n) as f64;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    let _ = writeln!(out, "<title>{} graph under the intrinsic metrics</title>", g.name());
    let _ = writeln!(out, r##"<g stroke="#555" stroke-opacity="0.6">"##);
    for pair in layers.windows(2) {
        let ((lo, pl), (hi, ph)) = (&pair[0], &pair[1]);
        if *hi != lo + 1 {
            return Err(Error::InvalidLevels("layers must be consecutive and increasing".into()));
        }
        for (v, &xv) in pl.iter().enumerate() {
            for &(w, m) in g.up(*lo, v)? {
                let width = 0.5 + (m as f64).ln_1p() * 0.5;
                let _ = writeln!(
                    out,
                    r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke-width="{width:.3}"/>"#,
                    x(xv),
                    y(*lo),
                    x(ph[w]),
                    y(*hi)
                );
            }
        }
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r##"<g fill="#1f4e79">"##);
    for (n, pos) in layers {
        for &p in pos {
            let _ = writeln!(out, r#"<circle cx="{:.3}" cy="{:.3}" r="2.5"/>"#, x(p), y(*n));
        }
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r##"<g font-family="monospace" font-size="10" fill="#333">"##);
    for (n, _) in layers {
        let _ = writeln!(out, r#"<text x="4" y="{:.3}">{n}</text>"#, y(*n) + 3.0);
    }
    let _ = writeln!(out, "</g>\n</svg>");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bratteli::{bernoulli_pascal_chain, multinomial_multipascal_chain, symmetric_euler_chain};
    use crate::scalar::Exact;

    fn q(n: i64, d: i64) -> Exact {
        Exact::from_ratio(n, d)
    }

    #[test]
    fn closed_forms() {
        let c = bernoulli_pascal_chain(q(1, 2), -6).unwrap();
        let m = closed_form_intrinsic::<Exact>(&c.graph, -4, None).unwrap();
        assert_eq!(m.get(1, 3), q(1, 2));
        let e = symmetric_euler_chain::<Exact>(-3).unwrap();
        let m = closed_form_intrinsic::<Exact>(&e.graph, -2, None).unwrap();
        let d = euler_conditional::<Exact>(0, 2) - euler_conditional::<Exact>(2, 2);
        assert_eq!(m.get(0, 2), num_traits::Signed::abs(&d));
        let mp = multinomial_multipascal_chain(&[q(1, 3), q(1, 3), q(1, 3)], -4).unwrap();
        let s = mp.graph.space(-3).unwrap();
        let m = closed_form_intrinsic::<Exact>(&mp.graph, -3, None).unwrap();
        let (a, b) = (
            s.index_of_coords(&[3, 0, 0]).unwrap(),
            s.index_of_coords(&[0, 3, 0]).unwrap(),
        );
        assert_eq!(m.get(a, b), q(2, 3));
    }

    #[test]
    fn embeddings() {
        let c = bernoulli_pascal_chain(q(1, 2), -6).unwrap();
        let pos = embedding_coordinates(&c, -5).unwrap();
        assert_eq!(pos, (0..=5).map(|k| q(k, 5)).collect::<Vec<_>>());
        let e = symmetric_euler_chain::<Exact>(-4).unwrap();
        let pos = embedding_coordinates(&e, -2).unwrap();
        assert_eq!(
            pos,
            (0..=2).map(|v| euler_conditional::<Exact>(v, 2)).collect::<Vec<_>>()
        );
        let mp = multinomial_multipascal_chain(&[q(1, 2), q(1, 2)], -3).unwrap();
        assert!(matches!(embedding_coordinates(&mp, -2), Err(Error::Unsupported(_))));

        let svg = embedding_svg(&c.graph, &embedding_layers(&c, -6).unwrap()).unwrap();
        assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), (1..=7).sum::<usize>());
    }
}

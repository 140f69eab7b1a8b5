use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::chain::LeveledChain;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::transport::{LevelMetric, LiftStrategy};

use super::ladder::{intrinsic_metrics, tail_criterion_statistic, vprime_statistic};

pub const REPORT_SCHEMA: &str = "filtra.standardness-report/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportConfig {
    /// Window ladder of depths `|m|`, increasing.
    pub ladder: Vec<u32>,
    /// Level of the initial metric.
    pub n0: i32,
    /// Level `n` of the tail criterion.
    pub tail_level: i32,
    pub floor: f64,
    /// Fitted log-log slopes above `-decay_tol` count as no decay.
    pub decay_tol: f64,
    pub strategy: LiftStrategy,
    /// Free-form description of the metric policies, seeds and so on.
    pub notes: Vec<String>,
}

impl ReportConfig {
    pub fn new(ladder: Vec<u32>, n0: i32, tail_level: i32) -> Self {
        Self {
            ladder,
            n0,
            tail_level,
            floor: 0.05,
            decay_tol: 0.05,
            strategy: LiftStrategy::Embedding,
            notes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

impl Verdict {
    pub fn text(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent with standardness",
            Verdict::Inconsistent => "inconsistent (statistic bounded away from 0)",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub level: i32,
    pub vprime: String,
    pub vprime_f64: f64,
    pub tail: String,
    pub tail_f64: f64,
    /// Kernel out of this level; absent when the levels are not totally ordered.
    pub monotonic: Option<bool>,
    pub identifiable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StandardnessReport {
    pub schema: String,
    pub chain: String,
    pub mode: String,
    pub config: ReportConfig,
    pub rows: Vec<ReportRow>,
    /// Least-squares slope of `ln s` against `ln |m|` (absent when fewer
    /// than two positive values).
    pub vprime_slope: Option<f64>,
    pub tail_slope: Option<f64>,
    pub verdict: Verdict,
    pub verdict_text: String,
}

/// Least-squares slope of `ln y` on `ln x` over the positive values.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Verdict from one statistic column ordered by increasing `|m|`.
pub fn verdict_for(values: &[f64], slope: Option<f64>, floor: f64, decay_tol: f64) -> Verdict {
    let Some(&last) = values.last() else {
        return Verdict::Inconclusive;
    };
    if last == 0.0 {
        return Verdict::Consistent;
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    match slope {
        Some(s) if s < -decay_tol && last < floor => Verdict::Consistent,
        Some(s) if s.abs() <= decay_tol && min > floor => Verdict::Inconsistent,
        _ => Verdict::Inconclusive,
    }
}

/// V′ and tail-criterion columns over the window ladder with the verdict
/// drawn from the tail column. `rho0` sits at `config.n0`, `tail_rho` at
/// `config.tail_level`.
pub fn standardness_report<S: Scalar>(
    chain: &LeveledChain<S>,
    rho0: LevelMetric<S>,
    tail_rho: &LevelMetric<S>,
    config: &ReportConfig,
) -> Result<StandardnessReport> {
    let mut ladder = config.ladder.clone();
    ladder.sort_unstable();
    ladder.dedup();
    if ladder.is_empty() {
        return Err(Error::InvalidParameter("empty window ladder".into()));
    }
    let deepest = -(*ladder.last().expect("nonempty") as i32);
    let levels: Vec<i32> = ladder.iter().map(|m| -(*m as i32)).collect();
    if let Some(m) = levels.iter().find(|m| **m >= config.tail_level || **m > config.n0) {
        return Err(Error::InvalidLevels(format!(
            "ladder level {m} must lie below the tail level {} and the initial level {}",
            config.tail_level, config.n0
        )));
    }
    let metrics = intrinsic_metrics(chain, config.n0, rho0, deepest, config.strategy)?;
    let mut rows = Vec::with_capacity(levels.len());
    for &m in &levels {
        let v = vprime_statistic(chain, &metrics, m)?;
        let t = tail_criterion_statistic(chain, config.tail_level, m, tail_rho)?;
        let k = chain.kernel(m + 1)?;
        let total = k.source().is_total() && k.target().is_total();
        rows.push(ReportRow {
            level: m,
            vprime: v.to_repr(),
            vprime_f64: v.to_f64(),
            tail: t.to_repr(),
            tail_f64: t.to_f64(),
            monotonic: if total { Some(k.is_monotonic()?) } else { None },
            identifiable: k.is_identifiable(),
        });
    }
    let xs: Vec<f64> = ladder.iter().map(|m| *m as f64).collect();
    let vcol: Vec<f64> = rows.iter().map(|r| r.vprime_f64).collect();
    let tcol: Vec<f64> = rows.iter().map(|r| r.tail_f64).collect();
    let tail_slope = loglog_slope(&xs, &tcol);
    let verdict = verdict_for(&tcol, tail_slope, config.floor, config.decay_tol);
    Ok(StandardnessReport {
        schema: REPORT_SCHEMA.into(),
        chain: chain.name(),
        mode: format!("{:?}", S::MODE).to_lowercase(),
        config: config.clone(),
        rows,
        vprime_slope: loglog_slope(&xs, &vcol),
        tail_slope,
        verdict,
        verdict_text: verdict.text().into(),
    })
}

impl StandardnessReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "chain: {} ({} arithmetic)", self.chain, self.mode);
        let _ = writeln!(
            out,
            "initial metric at level {}, tail criterion at level {}, floor {}",
            self.config.n0, self.config.tail_level, self.config.floor
        );
        for note in &self.config.notes {
            let _ = writeln!(out, "note: {note}");
        }
        let _ = writeln!(
            out,
            "{:>8}  {:>14}  {:>14}  {:>9}  {:>12}",
            "level", "V'", "tail s_m", "monotonic", "identifiable"
        );
        let flag = |b: Option<bool>| match b {
            Some(true) => "yes",
            Some(false) => "no",
            None => "n/a",
        };
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>8}  {:>14.8}  {:>14.8}  {:>9}  {:>12}",
                r.level,
                r.vprime_f64,
                r.tail_f64,
                flag(r.monotonic),
                flag(Some(r.identifiable))
            );
        }
        let slope = |s: Option<f64>| s.map_or("n/a".to_string(), |s| format!("{s:.4}"));
        let _ = writeln!(
            out,
            "fitted log-log slope: V' {}, tail {}",
            slope(self.vprime_slope),
            slope(self.tail_slope)
        );
        let _ = writeln!(out, "verdict: {}", self.verdict_text);
        out
    }
}

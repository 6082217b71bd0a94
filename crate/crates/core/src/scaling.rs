//! Wall-clock scaling of decomposition plus solve on chained diamonds.

use std::time::{Duration, Instant};

use crate::cfg::{Cfg, ExprProblem};
use crate::dp::{solve_with, DpError, SolveOptions};
use crate::oracle::diamond_chain;
use crate::treedec::{decompose, make_nice};

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    pub nodes: usize,
    pub edges: usize,
    pub width: usize,
    /// Fastest of the repeats, decomposition included.
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
}

impl ScalingReport {
    /// Least-squares slope of log(time) against log(nodes).
    pub fn slope(&self) -> Option<f64> {
        let xy: Vec<(f64, f64)> = self
            .points
            .iter()
            .map(|p| {
                (
                    (p.nodes as f64).ln(),
                    p.elapsed.as_secs_f64().max(1e-9).ln(),
                )
            })
            .collect();
        log_log_slope(&xy)
    }
}

/// Slope of the least-squares line through `(x, y)`; `None` for fewer than
/// two distinct x values.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (points.len() >= 2 && sxx > 0.0).then(|| sxy / sxx)
}

/// A chain of `nodes / 4` diamonds, each looping back to its top, with the
/// expression computed in every left arm and invalidated at every third top.
pub fn chain_instance(nodes: usize) -> (Cfg, ExprProblem) {
    let cfg = diamond_chain(nodes, true);
    let uses = (0..nodes / 4).map(|d| 4 * d + 1);
    let inval = (0..nodes / 4).filter(|d| d % 3 == 0).map(|d| 4 * d);
    let problem = ExprProblem::new(&cfg, uses, inval).expect("valid chain instance");
    (cfg, problem)
}

pub fn time_once(cfg: &Cfg, problem: &ExprProblem) -> Result<(Duration, usize), DpError> {
    let start = Instant::now();
    let nice = make_nice(cfg, &decompose(cfg)).map_err(|e| DpError::DecompositionMismatch(e.0))?;
    solve_with(cfg, problem, &nice, &SolveOptions::default())?;
    Ok((start.elapsed(), nice.width()))
}

pub fn measure_chain(sizes: &[usize], repeats: usize) -> Result<ScalingReport, DpError> {
    let mut points = Vec::with_capacity(sizes.len());
    for &nodes in sizes {
        let (cfg, problem) = chain_instance(nodes);
        let mut best = Duration::MAX;
        let mut width = 0;
        for _ in 0..repeats.max(1) {
            let (t, w) = time_once(&cfg, &problem)?;
            best = best.min(t);
            width = w;
        }
        points.push(ScalingPoint {
            nodes,
            edges: cfg.edge_count(),
            width,
            elapsed: best,
        });
    }
    Ok(ScalingReport { points })
}

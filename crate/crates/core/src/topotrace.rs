//! Index profiles along random geodesic rays through a starting plane.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ProjectionFrame, TangentDirection};
use crate::index::{IndexConfig, IndexValue};
use crate::pursuit::evaluate_or_zero;
use crate::seed;
use crate::slicing::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopotraceConfig {
    /// Number of random directions.
    pub m: usize,
    pub alpha_max: f64,
    /// Grid points on each side of the start.
    pub steps: usize,
    pub seed: u64,
}

impl TopotraceConfig {
    pub fn new(m: usize, seed: u64) -> Self {
        Self { m, alpha_max: FRAC_PI_2, steps: 20, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("topotrace needs at least one direction"));
        }
        if !(self.alpha_max > 0.0 && self.alpha_max <= FRAC_PI_2) {
            return Err(Error::invalid(format!("alpha_max = {} outside (0, pi/2]", self.alpha_max)));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps must be at least 1"));
        }
        Ok(())
    }

    /// Symmetric grid `-alpha_max, ..., 0, ..., alpha_max` of `2 steps + 1` angles.
    pub fn alphas(&self) -> Vec<f64> {
        let s = self.steps as i64;
        (-s..=s).map(|j| self.alpha_max * j as f64 / s as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub alpha: f64,
    pub index: IndexValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopotraceSet {
    pub start: ProjectionFrame,
    pub config: TopotraceConfig,
    pub index_config: IndexConfig,
    /// One profile per direction over the common alpha grid.
    pub traces: Vec<Vec<TracePoint>>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl TopotraceSet {
    /// Position of `alpha = 0` in every trace.
    pub fn center(&self) -> usize {
        self.config.steps
    }

    pub fn start_index(&self) -> IndexValue {
        self.traces[0][self.center()].index
    }

    /// Long format `trace_id,alpha,index,raw`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trace_id,alpha,index,raw\n");
        for (i, trace) in self.traces.iter().enumerate() {
            for pt in trace {
                writeln!(out, "{i},{},{},{}", pt.alpha, pt.index.value, pt.index.raw).expect("write to string");
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invalid(e.to_string()))
    }
}

/// Evaluate the index along `m` seeded geodesics through `start`.
///
/// Direction `i` uses the sub-seed `sub_seed(seed, i)`, so traces do not
/// depend on `m` or on evaluation order. The start frame is scored once and
/// shared by all traces.
pub fn topotrace(
    data: &Dataset,
    start: &ProjectionFrame,
    index_config: &IndexConfig,
    tconfig: &TopotraceConfig,
) -> Result<TopotraceSet> {
    tconfig.validate()?;
    index_config.validate()?;
    if data.p() != start.p() {
        return Err(Error::DimensionMismatch { expected: data.p(), got: start.p() });
    }
    let config = index_config.resolved(data.n(), data.p())?;
    let alphas = tconfig.alphas();
    let mut warnings = Vec::new();
    let center = evaluate_or_zero(data, start, &config, &mut warnings)?;

    let results: Vec<Result<(Vec<TracePoint>, Vec<String>)>> = (0..tconfig.m)
        .into_par_iter()
        .map(|i| {
            let direction = TangentDirection::new(start, seed::sub_seed(tconfig.seed, i as u64));
            let mut local = Vec::new();
            let mut trace = Vec::with_capacity(alphas.len());
            for &alpha in &alphas {
                let index = if alpha == 0.0 {
                    center
                } else {
                    evaluate_or_zero(data, &direction.at(alpha), &config, &mut local)?
                };
                trace.push(TracePoint { alpha, index });
            }
            Ok((trace, local))
        })
        .collect();

    let mut traces = Vec::with_capacity(tconfig.m);
    for r in results {
        let (trace, local) = r?;
        traces.push(trace);
        warnings.extend(local);
    }
    Ok(TopotraceSet {
        start: start.clone(),
        config: tconfig.clone(),
        index_config: index_config.clone(),
        traces,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquintSummary {
    pub fraction: f64,
    pub per_trace: Vec<f64>,
    pub median: f64,
}

/// Per trace, the largest `|alpha|` reached from the start, on either side,
/// before the index first drops below `fraction` times its start value.
///
/// Ratios are taken on raw values, which rescaling does not change unless the
/// rescaled value is clamped at 1.
pub fn squint_summary(tset: &TopotraceSet, fraction: f64) -> Result<SquintSummary> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!("fraction = {fraction} outside (0, 1)")));
    }
    let start = tset.start_index().raw;
    if start == 0.0 {
        return Err(Error::NoStructure);
    }
    let threshold = fraction * start;
    let c = tset.center();
    let per_trace: Vec<f64> = tset
        .traces
        .iter()
        .map(|trace| {
            let reach = |side: &mut dyn Iterator<Item = &TracePoint>| {
                side.take_while(|pt| pt.index.raw >= threshold).map(|pt| pt.alpha.abs()).last().unwrap_or(0.0)
            };
            let right = reach(&mut trace[c..].iter());
            let left = reach(&mut trace[..=c].iter().rev());
            right.max(left)
        })
        .collect();
    let median = median(&per_trace);
    Ok(SquintSummary { fraction, per_trace, median })
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

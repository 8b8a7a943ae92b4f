//! Gradient-free maximisation of the slice index over projection frames.

use std::f64::consts::FRAC_PI_2;

use log::warn;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GeodesicPath, ProjectionFrame, TangentDirection};
use crate::index::{rotation_averaged_index, IndexConfig, IndexValue};
use crate::seed;
use crate::slicing::{slice, Dataset};

/// Neighbourhood angle below which a search stops.
pub const MIN_ALPHA: f64 = 1e-3;

/// Evaluations spent on the golden-section line search of one iteration.
pub const LINE_SEARCH_EVALS: usize = 10;

/// Full pipeline score of one frame: slice, centre, bin, reweight, index.
pub fn evaluate_frame(data: &Dataset, frame: &ProjectionFrame, config: &IndexConfig) -> Result<IndexValue> {
    rotation_averaged_index(&slice(data, frame, config.h)?.centered(), config)
}

/// Like [`evaluate_frame`], but degenerate slices score zero and leave a
/// warning instead of failing.
pub fn evaluate_or_zero(
    data: &Dataset,
    frame: &ProjectionFrame,
    config: &IndexConfig,
    warnings: &mut Vec<String>,
) -> Result<IndexValue> {
    match evaluate_frame(data, frame, config) {
        Err(Error::DegenerateSlice { inside, outside }) => {
            let msg = format!("degenerate slice scored as 0 (inside {inside}, outside {outside})");
            warn!("{msg}");
            warnings.push(msg);
            let eps = config.resolve_epsilon(data.n(), data.p())?;
            Ok(IndexValue::zero(eps, inside, outside))
        }
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GeodesicSearch,
    SearchBetter,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geodesic_search" | "geodesic" => Ok(Method::GeodesicSearch),
            "search_better" | "better" => Ok(Method::SearchBetter),
            _ => Err(Error::invalid(format!("unknown optimizer {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerParams {
    pub method: Method,
    pub max_iter: usize,
    pub candidates_per_iter: usize,
    /// Initial neighbourhood angle in radians.
    pub alpha0: f64,
    pub cooling: f64,
    pub min_improvement: f64,
    pub seed: u64,
    /// Keep every evaluated candidate in the trace.
    #[serde(default)]
    pub record_candidates: bool,
}

impl OptimizerParams {
    pub fn new(method: Method, seed: u64) -> Self {
        Self {
            method,
            max_iter: 60,
            candidates_per_iter: 25,
            alpha0: 0.5,
            cooling: 0.9,
            min_improvement: 1e-4,
            seed,
            record_candidates: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if self.candidates_per_iter == 0 {
            return Err(Error::invalid("candidates_per_iter must be at least 1"));
        }
        if !(self.alpha0 > 0.0 && self.alpha0 <= FRAC_PI_2) {
            return Err(Error::invalid(format!("alpha0 = {} outside (0, pi/2]", self.alpha0)));
        }
        if !(self.cooling > 0.0 && self.cooling <= 1.0) {
            return Err(Error::invalid(format!("cooling = {} outside (0, 1]", self.cooling)));
        }
        if !(self.min_improvement >= 0.0 && self.min_improvement.is_finite()) {
            return Err(Error::invalid(format!("min_improvement = {} must be non-negative", self.min_improvement)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Start,
    Candidate,
    Accepted,
    Interpolation,
    Final,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "RecordWire", try_from = "RecordWire")]
pub struct TraceRecord {
    pub step: usize,
    pub kind: RecordKind,
    pub frame: ProjectionFrame,
    pub index: IndexValue,
}

#[derive(Serialize, Deserialize)]
struct RecordWire {
    step: usize,
    kind: RecordKind,
    index: f64,
    raw: f64,
    epsilon: f64,
    inside: usize,
    outside: usize,
    p: usize,
    basis: Vec<f64>,
}

impl From<TraceRecord> for RecordWire {
    fn from(r: TraceRecord) -> Self {
        Self {
            step: r.step,
            kind: r.kind,
            index: r.index.value,
            raw: r.index.raw,
            epsilon: r.index.epsilon_used,
            inside: r.index.inside_count,
            outside: r.index.outside_count,
            p: r.frame.p(),
            basis: r.frame.to_column_major(),
        }
    }
}

impl TryFrom<RecordWire> for TraceRecord {
    type Error = Error;

    fn try_from(w: RecordWire) -> Result<Self> {
        Ok(Self {
            step: w.step,
            kind: w.kind,
            frame: ProjectionFrame::from_column_major(w.p, &w.basis)?,
            index: IndexValue {
                value: w.index,
                raw: w.raw,
                epsilon_used: w.epsilon,
                inside_count: w.inside,
                outside_count: w.outside,
            },
        })
    }
}

/// Ordered record of one optimisation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PursuitTrace {
    pub optimizer: OptimizerParams,
    pub config: IndexConfig,
    pub records: Vec<TraceRecord>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl PursuitTrace {
    /// The last record, holding the best frame found.
    pub fn best(&self) -> &TraceRecord {
        self.records.last().expect("a trace always has start and final records")
    }

    pub fn start(&self) -> &TraceRecord {
        &self.records[0]
    }

    /// Start record followed by every accepted record.
    pub fn anchors(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(|r| matches!(r.kind, RecordKind::Start | RecordKind::Accepted))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invalid(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::invalid(format!("malformed trace: {e}")))
    }
}

struct Search<'a> {
    data: &'a Dataset,
    config: IndexConfig,
    params: &'a OptimizerParams,
    records: Vec<TraceRecord>,
    warnings: Vec<String>,
    incumbent: ProjectionFrame,
    best: IndexValue,
}

impl<'a> Search<'a> {
    fn begin(
        data: &'a Dataset,
        start: &ProjectionFrame,
        config: &IndexConfig,
        params: &'a OptimizerParams,
        method: Method,
    ) -> Result<Self> {
        if params.method != method {
            return Err(Error::invalid(format!("optimizer method is {:?}, expected {method:?}", params.method)));
        }
        params.validate()?;
        config.validate()?;
        if data.p() != start.p() {
            return Err(Error::DimensionMismatch { expected: data.p(), got: start.p() });
        }
        let resolved = config.resolved(data.n(), data.p())?;
        let mut warnings = Vec::new();
        let best = evaluate_or_zero(data, start, &resolved, &mut warnings)?;
        let records = vec![TraceRecord { step: 0, kind: RecordKind::Start, frame: start.clone(), index: best }];
        Ok(Self { data, config: resolved, params, records, warnings, incumbent: start.clone(), best })
    }

    fn score(&mut self, frame: &ProjectionFrame, step: usize) -> Result<IndexValue> {
        let value = evaluate_or_zero(self.data, frame, &self.config, &mut self.warnings)?;
        if self.params.record_candidates {
            self.records.push(TraceRecord { step, kind: RecordKind::Candidate, frame: frame.clone(), index: value });
        }
        Ok(value)
    }

    fn improves(&self, value: &IndexValue) -> bool {
        value.value > self.best.value + self.params.min_improvement
    }

    fn accept(&mut self, frame: ProjectionFrame, value: IndexValue, step: usize) {
        self.records.push(TraceRecord { step, kind: RecordKind::Accepted, frame: frame.clone(), index: value });
        self.incumbent = frame;
        self.best = value;
    }

    fn finish(mut self, steps: usize, original: &IndexConfig) -> PursuitTrace {
        self.records.push(TraceRecord {
            step: steps,
            kind: RecordKind::Final,
            frame: self.incumbent.clone(),
            index: self.best,
        });
        PursuitTrace {
            optimizer: self.params.clone(),
            config: original.clone(),
            records: self.records,
            warnings: self.warnings,
        }
    }
}

/// Random local search: draw candidates within the current neighbourhood
/// angle, take the first that improves, and shrink the angle when none does.
pub fn search_better(
    data: &Dataset,
    start: &ProjectionFrame,
    config: &IndexConfig,
    params: &OptimizerParams,
) -> Result<PursuitTrace> {
    let mut search = Search::begin(data, start, config, params, Method::SearchBetter)?;
    let mut rng = seed::rng(params.seed);
    let mut alpha = params.alpha0;
    let mut step = 0;
    while step < params.max_iter && alpha >= MIN_ALPHA {
        step += 1;
        let mut accepted = false;
        for _ in 0..params.candidates_per_iter {
            let direction = TangentDirection::new(&search.incumbent, rng.next_u64());
            let frame = direction.at(alpha);
            let value = search.score(&frame, step)?;
            if search.improves(&value) {
                search.accept(frame, value, step);
                accepted = true;
                break;
            }
        }
        if !accepted {
            alpha *= params.cooling;
        }
    }
    Ok(search.finish(step, config))
}

/// Maximise `f` over `[lo, hi]` with `evals` golden-section evaluations,
/// returning the best `(t, f(t))` seen.
fn golden_section<F>(lo: f64, hi: f64, evals: usize, mut f: F) -> Result<(f64, IndexValue)>
where
    F: FnMut(f64) -> Result<IndexValue>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut best = if fd.value > fc.value { (d, fd) } else { (c, fc) };
    for _ in 2..evals {
        if fc.value >= fd.value {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
            if fc.value > best.1.value {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
            if fd.value > best.1.value {
                best = (d, fd);
            }
        }
    }
    Ok(best)
}

/// Geodesic line search: probe random directions at `+-alpha`, keep the most
/// promising one and golden-section search along it.
pub fn search_geodesic(
    data: &Dataset,
    start: &ProjectionFrame,
    config: &IndexConfig,
    params: &OptimizerParams,
) -> Result<PursuitTrace> {
    let mut search = Search::begin(data, start, config, params, Method::GeodesicSearch)?;
    let mut rng = seed::rng(params.seed);
    let mut alpha = params.alpha0;
    let mut step = 0;
    while step < params.max_iter && alpha >= MIN_ALPHA {
        step += 1;
        let mut best: Option<(TangentDirection, f64, IndexValue)> = None;
        for _ in 0..params.candidates_per_iter {
            let direction = TangentDirection::new(&search.incumbent, rng.next_u64());
            for t in [alpha, -alpha] {
                let value = search.score(&direction.at(t), step)?;
                if best.as_ref().is_none_or(|b| value.value > b.2.value) {
                    best = Some((direction.clone(), t, value));
                }
            }
        }
        let (direction, mut t_best, mut v_best) = best.expect("at least one candidate");
        let (t, v) = golden_section(-alpha, alpha, LINE_SEARCH_EVALS, |t| search.score(&direction.at(t), step))?;
        if v.value > v_best.value {
            t_best = t;
            v_best = v;
        }
        if search.improves(&v_best) {
            search.accept(direction.at(t_best), v_best, step);
        } else {
            alpha *= params.cooling;
        }
    }
    Ok(search.finish(step, config))
}

/// Dispatch on `params.method`.
pub fn optimize(
    data: &Dataset,
    start: &ProjectionFrame,
    config: &IndexConfig,
    params: &OptimizerParams,
) -> Result<PursuitTrace> {
    match params.method {
        Method::SearchBetter => search_better(data, start, config, params),
        Method::GeodesicSearch => search_geodesic(data, start, config, params),
    }
}

/// Replayable tour: start and accepted frames joined by evenly spaced
/// geodesic interpolation frames, each scored on `data`. Candidate records
/// are dropped.
pub fn interpolated_trace(data: &Dataset, trace: &PursuitTrace, steps_per_segment: usize) -> Result<PursuitTrace> {
    if steps_per_segment == 0 {
        return Err(Error::invalid("steps_per_segment must be at least 1"));
    }
    let config = trace.config.resolved(data.n(), data.p())?;
    let mut warnings = trace.warnings.clone();
    let anchors: Vec<&TraceRecord> = trace.anchors().collect();
    let mut records = vec![anchors[0].clone()];
    for pair in anchors.windows(2) {
        let path = GeodesicPath::between(&pair[0].frame, &pair[1].frame)?;
        for j in 1..steps_per_segment {
            let frame = path.interpolate(j as f64 / steps_per_segment as f64)?;
            let index = evaluate_or_zero(data, &frame, &config, &mut warnings)?;
            records.push(TraceRecord { step: pair[1].step, kind: RecordKind::Interpolation, frame, index });
        }
        records.push(pair[1].clone());
    }
    records.push(trace.best().clone());
    Ok(PursuitTrace { optimizer: trace.optimizer.clone(), config: trace.config.clone(), records, warnings })
}

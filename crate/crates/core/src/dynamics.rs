//! Bounded-confidence opinion dynamics on a cellular sheaf.
//!
//! Each vertex holds an opinion in its stalk. Along every edge the two
//! restricted opinions pull toward each other with a weight given by a bump
//! function of their distance; once that distance reaches the threshold the
//! edge is ignored. The flow is integrated with explicit Euler steps.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::graph::Graph;
use crate::numeric::Scalar;
use crate::sheaf::CellularSheaf;

/// Distance at which every bump function vanishes.
pub const THRESHOLD: f64 = 1.0;

/// Influence profile `φ: [0, ∞) → [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BumpFunction {
    /// `1 − x`
    Phi1,
    /// `1 − x²`
    Phi2,
    /// `(1 − x)²`
    Phi3,
    /// `1 − x − sin(2πx)/7`
    Phi4,
    /// `1` everywhere: the unbounded consensus flow `ẋ = −L x`.
    ConstantOne,
}

impl BumpFunction {
    pub const ALL_BOUNDED: [BumpFunction; 4] =
        [BumpFunction::Phi1, BumpFunction::Phi2, BumpFunction::Phi3, BumpFunction::Phi4];

    pub fn eval(self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return domain(format!("bump function evaluated at {x}"));
        }
        Ok(self.value(x))
    }

    /// [`BumpFunction::value`] in an arbitrary scalar type. `φ₄` goes through
    /// `f64` for the sine term.
    pub(crate) fn value_in<S: Scalar>(self, x: &S) -> S {
        if self == BumpFunction::ConstantOne {
            return S::one();
        }
        let one = S::one();
        if *x >= one {
            return S::zero();
        }
        match self {
            BumpFunction::Phi1 => one.sub(x),
            BumpFunction::Phi2 => one.sub(&x.mul(x)),
            BumpFunction::Phi3 => one.sub(x).mul(&one.sub(x)),
            BumpFunction::Phi4 => {
                let wave = (2.0 * std::f64::consts::PI * x.to_f64()).sin() / 7.0;
                one.sub(x).sub(&S::from_f64(wave))
            }
            BumpFunction::ConstantOne => unreachable!(),
        }
    }

    #[inline]
    fn value(self, x: f64) -> f64 {
        if self == BumpFunction::ConstantOne {
            return 1.0;
        }
        if x >= THRESHOLD {
            return 0.0;
        }
        match self {
            BumpFunction::Phi1 => 1.0 - x,
            BumpFunction::Phi2 => 1.0 - x * x,
            BumpFunction::Phi3 => (1.0 - x) * (1.0 - x),
            BumpFunction::Phi4 => 1.0 - x - (2.0 * std::f64::consts::PI * x).sin() / 7.0,
            BumpFunction::ConstantOne => unreachable!(),
        }
    }

    /// Distance from which an edge no longer interacts.
    pub fn cutoff(self) -> f64 {
        match self {
            BumpFunction::ConstantOne => f64::INFINITY,
            _ => THRESHOLD,
        }
    }

    /// `1..=4` for the bounded profiles.
    pub fn from_index(i: u32) -> Option<Self> {
        Self::ALL_BOUNDED.get(i.checked_sub(1)? as usize).copied()
    }
}

impl fmt::Display for BumpFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            BumpFunction::Phi1 => "phi1",
            BumpFunction::Phi2 => "phi2",
            BumpFunction::Phi3 => "phi3",
            BumpFunction::Phi4 => "phi4",
            BumpFunction::ConstantOne => "one",
        };
        f.write_str(name)
    }
}

impl FromStr for BumpFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let index = s.strip_prefix("phi").unwrap_or(s);
        if matches!(s, "one" | "constant" | "constant_one") {
            return Ok(BumpFunction::ConstantOne);
        }
        index
            .parse()
            .ok()
            .and_then(Self::from_index)
            .ok_or_else(|| Error::Domain(format!("unknown bump function {s:?}")))
    }
}

/// Integration and stopping parameters shared by the flow-based detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    pub phi: BumpFunction,
    /// Edges closer than this count as in consensus.
    pub eps: f64,
    /// ODE time after which an unsettled run is abandoned.
    pub t_max: f64,
    pub dt: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams { phi: BumpFunction::Phi1, eps: 0.0033, t_max: 1000.0, dt: 0.01 }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < THRESHOLD) {
            return domain(format!("eps must lie in (0, {THRESHOLD}), got {}", self.eps));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return domain(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return domain(format!("t_max must be positive, got {}", self.t_max));
        }
        Ok(())
    }

    fn max_steps(&self) -> u64 {
        (self.t_max / self.dt - 1e-9).ceil() as u64
    }
}

/// Opinions of all vertices, flattened in `C⁰` layout, at ODE time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionState {
    pub values: Vec<f64>,
    pub time: f64,
}

impl OpinionState {
    pub fn new(s: &CellularSheaf, values: Vec<f64>) -> Result<Self> {
        if values.len() != s.c0_dim() {
            return Err(Error::Shape(format!(
                "state has {} coordinates, sheaf expects {}",
                values.len(),
                s.c0_dim()
            )));
        }
        Ok(OpinionState { values, time: 0.0 })
    }

    pub fn from_vertices(s: &CellularSheaf, per_vertex: Vec<Vec<f64>>) -> Result<Self> {
        if per_vertex.len() != s.graph().vertex_count() {
            return Err(Error::Shape(format!("{} opinions for {} vertices", per_vertex.len(), s.graph().vertex_count())));
        }
        for (v, x) in per_vertex.iter().enumerate() {
            if x.len() != s.vertex_dim(v) {
                return Err(Error::Shape(format!("opinion of vertex {v} has dimension {}, stalk has {}", x.len(), s.vertex_dim(v))));
            }
        }
        Self::new(s, per_vertex.concat())
    }

    pub fn vertex<'a>(&'a self, s: &CellularSheaf, v: usize) -> &'a [f64] {
        &self.values[s.vertex_range(v)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Converged,
    Aborted,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::Aborted => "aborted",
        })
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionOutcome {
    pub state: OpinionState,
    pub status: Status,
    /// Ids of edges whose restricted opinions differ by at most `eps`.
    pub consensus_edges: Vec<usize>,
    pub steps: u64,
}

impl EvolutionOutcome {
    /// Edge mask of `consensus_edges`, for component extraction.
    pub fn consensus_mask(&self, edge_count: usize) -> Vec<bool> {
        let mut mask = vec![false; edge_count];
        for &e in &self.consensus_edges {
            mask[e] = true;
        }
        mask
    }
}

/// `‖F_{u⊂e} x_u − F_{v⊂e} x_v‖` for edge `e = (u, v)`.
pub fn edge_difference(s: &CellularSheaf, x: &OpinionState, e: usize) -> f64 {
    let flow = Flow::<f64>::new(s, BumpFunction::ConstantOne);
    let mut buf = vec![0.0; s.edge_dim(e)];
    flow.restricted_difference(&x.values, e, &mut buf);
    norm(&buf)
}

/// Right-hand side of the bounded-confidence flow in `C⁰` layout.
pub fn derivative(s: &CellularSheaf, phi: BumpFunction, x: &OpinionState) -> Vec<f64> {
    let mut flow = Flow::new(s, phi);
    flow.residuals(&x.values);
    let mut dx = vec![0.0; s.c0_dim()];
    flow.accumulate(&mut dx);
    dx
}

/// Integrates the flow until every edge difference lies outside `(eps, cutoff)`
/// or ODE time `t_max` passes.
pub fn evolve(s: &CellularSheaf, x0: &OpinionState, params: &FlowParams) -> Result<EvolutionOutcome> {
    evolve_observed(s, x0, params, |_, _| {})
}

/// [`evolve`], calling `observer(t, x)` on the initial state and after every step.
pub fn evolve_observed(
    s: &CellularSheaf,
    x0: &OpinionState,
    params: &FlowParams,
    observer: impl FnMut(f64, &[f64]),
) -> Result<EvolutionOutcome> {
    evolve_in::<f64>(s, x0, params, observer)
}

/// [`evolve_observed`] carried out in the scalar type `S`.
///
/// The scheme is identical for every `S`; only rounding differs. The returned
/// state is converted back to `f64`, while the stopping test and the consensus
/// edges are decided in `S`.
pub fn evolve_in<S: Scalar>(
    s: &CellularSheaf,
    x0: &OpinionState,
    params: &FlowParams,
    mut observer: impl FnMut(f64, &[S]),
) -> Result<EvolutionOutcome> {
    params.validate()?;
    if x0.values.len() != s.c0_dim() {
        return Err(Error::Shape(format!("state has {} coordinates, sheaf expects {}", x0.values.len(), s.c0_dim())));
    }
    let mut flow = Flow::<S>::new(s, params.phi);
    let mut x: Vec<S> = x0.values.iter().map(|&v| S::from_f64(v)).collect();
    let mut dx = vec![S::zero(); x.len()];
    let dt = S::from_f64(params.dt);
    let eps = S::from_f64(params.eps);
    let cutoff = params.phi.cutoff();
    let cutoff = cutoff.is_finite().then(|| S::from_f64(cutoff));
    let settled = |d: &S| *d <= eps || (d.is_finite() && cutoff.as_ref().is_some_and(|c| d >= c));
    let max_steps = params.max_steps();
    let mut step = 0u64;
    let time = |step: u64| x0.time + step as f64 * params.dt;

    observer(time(0), &x);
    flow.residuals(&x);
    let status = loop {
        if flow.norms.iter().all(settled) {
            break Status::Converged;
        }
        if step >= max_steps {
            break Status::Aborted;
        }
        dx.iter_mut().for_each(|d| *d = S::zero());
        flow.accumulate(&mut dx);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi = xi.add(&dt.mul(di));
        }
        step += 1;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure { time: time(step) });
        }
        observer(time(step), &x);
        flow.residuals(&x);
    };
    let consensus_edges =
        flow.norms.iter().enumerate().filter(|(_, d)| **d <= eps).map(|(e, _)| e).collect();
    Ok(EvolutionOutcome {
        state: OpinionState { values: x.iter().map(S::to_f64).collect(), time: time(step) },
        status,
        consensus_edges,
        steps: step,
    })
}

/// Restriction maps in `S` plus per-edge scratch for repeated derivative evaluation.
struct Flow<'a, 's, S> {
    sheaf: &'a CellularSheaf<'s>,
    phi: BumpFunction,
    /// Column-major `[tail, head]` restriction entries per edge.
    maps: Vec<[Vec<S>; 2]>,
    /// `F_tail x_tail − F_head x_head`, in `C¹` layout.
    residual: Vec<S>,
    norms: Vec<S>,
    scratch: Vec<S>,
}

impl<'a, 's, S: Scalar> Flow<'a, 's, S> {
    fn new(sheaf: &'a CellularSheaf<'s>, phi: BumpFunction) -> Self {
        let edges = sheaf.graph().edge_count();
        let maps = (0..edges)
            .map(|e| sheaf.restrictions(e).each_ref().map(|m| m.iter().map(|&v| S::from_f64(v)).collect()))
            .collect();
        Flow {
            sheaf,
            phi,
            maps,
            residual: vec![S::zero(); sheaf.c1_dim()],
            norms: vec![S::zero(); edges],
            scratch: Vec::new(),
        }
    }

    fn residuals(&mut self, x: &[S]) {
        let mut r = std::mem::take(&mut self.scratch);
        for e in 0..self.norms.len() {
            let range = self.sheaf.edge_range(e);
            r.clear();
            r.resize(range.len(), S::zero());
            self.restricted_difference(x, e, &mut r);
            self.norms[e] = norm(&r);
            self.residual[range].clone_from_slice(&r);
        }
        self.scratch = r;
    }

    /// Writes `F_tail x_tail − F_head x_head` for edge `e` into `out`.
    fn restricted_difference(&self, x: &[S], e: usize, out: &mut [S]) {
        let (u, v) = self.sheaf.graph().edge(e);
        let [tail, head] = &self.maps[e];
        out.iter_mut().for_each(|o| *o = S::zero());
        apply_add(tail, &x[self.sheaf.vertex_range(u)], false, out);
        apply_add(head, &x[self.sheaf.vertex_range(v)], true, out);
    }

    /// Adds the flow contributions of the current residuals to `dx`.
    fn accumulate(&mut self, dx: &mut [S]) {
        let s = self.sheaf;
        let zero = S::zero();
        let mut weighted = std::mem::take(&mut self.scratch);
        for (e, &(u, v)) in s.graph().edges().iter().enumerate() {
            let weight = self.phi.value_in(&self.norms[e]);
            if weight == zero {
                continue;
            }
            weighted.clear();
            weighted.extend(self.residual[s.edge_range(e)].iter().map(|r| weight.mul(r)));
            let [tail, head] = &self.maps[e];
            // head moves along +Fᵀr, tail along −Fᵀr
            transpose_apply_add(head, &weighted, false, &mut dx[s.vertex_range(v)]);
            transpose_apply_add(tail, &weighted, true, &mut dx[s.vertex_range(u)]);
        }
        self.scratch = weighted;
    }
}

/// `out ±= M y` for column-major `M` with `out.len()` rows.
#[inline]
fn apply_add<S: Scalar>(m: &[S], y: &[S], subtract: bool, out: &mut [S]) {
    let rows = out.len();
    for (j, yj) in y.iter().enumerate() {
        let col = &m[j * rows..(j + 1) * rows];
        for (o, mij) in out.iter_mut().zip(col) {
            let term = times(mij, yj);
            *o = if subtract { o.sub(&term) } else { o.add(&term) };
        }
    }
}

/// `out ±= Mᵀ r` for column-major `M` with `r.len()` rows.
#[inline]
fn transpose_apply_add<S: Scalar>(m: &[S], r: &[S], subtract: bool, out: &mut [S]) {
    let rows = r.len();
    for (j, o) in out.iter_mut().enumerate() {
        let col = &m[j * rows..(j + 1) * rows];
        let mut acc = S::zero();
        for (a, b) in col.iter().zip(r) {
            acc = acc.add(&times(a, b));
        }
        *o = if subtract { o.sub(&acc) } else { o.add(&acc) };
    }
}

/// Product that passes through `±1` and `0` matrix entries without rounding.
#[inline]
fn times<S: Scalar>(entry: &S, y: &S) -> S {
    let one = S::one();
    if *entry == S::zero() {
        S::zero()
    } else if *entry == one {
        y.clone()
    } else if *entry == one.neg() {
        y.neg()
    } else {
        entry.mul(y)
    }
}

fn norm<S: Scalar>(v: &[S]) -> S {
    match v {
        [x] => x.abs(),
        _ => v.iter().fold(S::zero(), |acc, x| acc.add(&x.mul(x))).sqrt(),
    }
}

/// Six-vertex network on which the flow never settles.
///
/// Vertices 0 and 1 hold `a`, vertex 2 holds `b`, vertex 3 holds `1 + a`,
/// vertices 4 and 5 hold `1 + b`.
pub fn nonconvergent_network() -> Graph {
    Graph::new(6, [(0, 2), (1, 2), (2, 3), (3, 4), (3, 5)]).expect("fixed edge list")
}

/// Scalar initial opinions for [`nonconvergent_network`].
pub fn nonconvergent_initial_state(a0: f64, b0: f64) -> Vec<f64> {
    vec![a0, a0, b0, 1.0 + a0, 1.0 + b0, 1.0 + b0]
}

/// Exact `(a(t), b(t))` on [`nonconvergent_network`] under `φ₁`, valid for `1 + a₀ > b₀ > a₀`.
pub fn nonconvergent_closed_form(a0: f64, b0: f64, t: f64) -> Result<(f64, f64)> {
    if !(1.0 + a0 > b0 && b0 > a0) {
        return domain(format!("closed form needs 1 + a0 > b0 > a0, got a0 = {a0}, b0 = {b0}"));
    }
    let c = (1.0 / (b0 - a0) - 1.0).ln();
    let gap = 1.0 / ((2.0 * t + c).exp() + 1.0);
    let mid = a0 + b0;
    Ok((0.5 * (mid - gap), 0.5 * (mid + gap)))
}

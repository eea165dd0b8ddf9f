//! Saddle problems over a probability simplex of labels, their lower and upper
//! values, and searches for minorant pairs with the intersection property.
//!
//! `Y` is the simplex over at most four base labels; `a(x, t) = Σ tᵢ a(x, yᵢ)`
//! is affine in `t`, so the inner supremum over `Y` is attained at a label.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::convexsep::conv_subgradient_ip_pair;
use crate::error::{Error, Result};
use crate::intersection::{
    ip_decide_ball, ip_decide_fullspace, pair_exists_1d, touch_summary_1d, IPDecision, Touch, Verdict,
    DEFAULT_BALL_MARGIN,
};
use crate::primitives::{dot, norm_sq, support_membership, ExtReal, Grid, QuadMinorant, SampledFunction, Vector, DEFAULT_TOL};
use crate::subdiff::{eps_subgradient_from_support, subdiff_membership, SubdiffQuery};
use crate::support::MinorantDictionary;
use crate::variational::ip_transfer_to_ball;

/// Largest number of base labels.
pub const MAX_LABELS: usize = 4;

/// Default simplex resolution for `m` labels.
pub fn default_mixture_step(m: usize) -> f64 {
    if m <= 2 {
        0.01
    } else {
        0.05
    }
}

/// Points of the simplex `{t >= 0, Σ t = 1}` with coordinates in `step·Z`.
///
/// Vertices come first (in label order), then the remaining points in
/// lexicographically decreasing order of their weights.
pub fn simplex_grid(m: usize, step: f64) -> Result<Vec<Vec<f64>>> {
    if m == 0 || m > MAX_LABELS {
        return Err(Error::InvalidInput(format!("label count {m} outside 1..={MAX_LABELS}")));
    }
    let k = simplex_divisions(step)?;
    let mut out = Vec::new();
    let mut current = vec![0usize; m];
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for v in (0..=left).rev() {
            cur[pos] = v;
            rec(pos + 1, left - v, cur, out);
        }
    }
    let mut counts = Vec::new();
    rec(0, k, &mut current, &mut counts);
    let (vertices, rest): (Vec<_>, Vec<_>) = counts.into_iter().partition(|c| c.contains(&k));
    for c in vertices.into_iter().chain(rest) {
        out.push(c.iter().map(|&v| v as f64 / k as f64).collect());
    }
    Ok(out)
}

fn simplex_divisions(step: f64) -> Result<usize> {
    if !(step.is_finite() && step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidInput(format!("mixture step {step} must lie in (0, 1]")));
    }
    let k = (1.0 / step).round();
    if (k * step - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("mixture step {step} must divide 1")));
    }
    Ok(k as usize)
}

/// A family `a(·, yᵢ)` of sampled functions on one grid, extended affinely to the simplex.
#[derive(Debug, Clone)]
pub struct SaddleProblem {
    labels: Vec<String>,
    tables: Vec<SampledFunction>,
    mixture_step: f64,
}

impl SaddleProblem {
    pub fn new(labels: Vec<String>, tables: Vec<SampledFunction>, mixture_step: Option<f64>) -> Result<Self> {
        let m = tables.len();
        if m == 0 || m > MAX_LABELS {
            return Err(Error::InvalidInput(format!("label count {m} outside 1..={MAX_LABELS}")));
        }
        if labels.len() != m {
            return Err(Error::InvalidInput(format!("{} labels for {m} tables", labels.len())));
        }
        if tables.iter().any(|t| !t.same_grid(&tables[0])) {
            return Err(Error::InvalidInput("all tables must share one grid".into()));
        }
        let mixture_step = mixture_step.unwrap_or_else(|| default_mixture_step(m));
        simplex_divisions(mixture_step)?;
        Ok(SaddleProblem {
            labels,
            tables,
            mixture_step,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn tables(&self) -> &[SampledFunction] {
        &self.tables
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.tables[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.tables[0].dim()
    }

    pub fn label_count(&self) -> usize {
        self.tables.len()
    }

    pub fn mixture_step(&self) -> f64 {
        self.mixture_step
    }

    pub fn mixtures(&self) -> Result<Vec<Vec<f64>>> {
        simplex_grid(self.label_count(), self.mixture_step)
    }

    /// `Σ tᵢ a(x, yᵢ)` at grid point `i`; labels with zero weight are skipped.
    pub fn mixture_value(&self, t: &[f64], i: usize) -> ExtReal {
        let mut acc = 0.0;
        for (w, table) in t.iter().zip(&self.tables) {
            if *w == 0.0 {
                continue;
            }
            match table.value(i) {
                ExtReal::Finite(v) => acc += w * v,
                ExtReal::PlusInfinity => return ExtReal::PlusInfinity,
            }
        }
        ExtReal::Finite(acc)
    }

    /// The mixture as a sampled function, `None` when it is `+∞` everywhere.
    pub fn mixture(&self, t: &[f64]) -> Result<Option<SampledFunction>> {
        self.check_weights(t)?;
        if let Some(j) = t.iter().position(|&w| w == 1.0) {
            return Ok(Some(self.tables[j].clone()));
        }
        let values: Vec<ExtReal> = (0..self.grid().len()).map(|i| self.mixture_value(t, i)).collect();
        if values.iter().all(|v| !v.is_finite()) {
            return Ok(None);
        }
        SampledFunction::from_values(self.grid().clone(), values).map(Some)
    }

    fn check_weights(&self, t: &[f64]) -> Result<()> {
        if t.len() != self.label_count() {
            return Err(Error::DimensionMismatch {
                expected: self.label_count(),
                got: t.len(),
            });
        }
        let sum: f64 = t.iter().sum();
        if t.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("{t:?} is not a probability vector")));
        }
        Ok(())
    }

    fn inner_inf(&self, t: &[f64]) -> f64 {
        (0..self.grid().len())
            .map(|i| self.mixture_value(t, i).finite().unwrap_or(f64::INFINITY))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Lower and upper values of a saddle problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleValues {
    /// `max_t min_x a(x, t)` over the simplex grid.
    pub lower: f64,
    /// `min_x max_i a(x, yᵢ)`.
    pub upper: f64,
    pub gap: f64,
    /// First simplex point attaining `lower`.
    pub lower_argmax: Vec<f64>,
    /// First grid point attaining `upper`.
    pub upper_argmin: Vector,
    /// Increase of `lower` when the simplex step is halved.
    pub refinement_delta: f64,
}

impl SaddleValues {
    /// Gap tolerance attributable to the simplex resolution.
    pub fn gap_tolerance(&self) -> f64 {
        (4.0 * self.refinement_delta).max(1e-9)
    }

    pub fn gap_closed(&self) -> bool {
        self.gap <= self.gap_tolerance()
    }
}

fn lower_value(p: &SaddleProblem, step: f64) -> Result<(f64, Vec<f64>)> {
    let ts = simplex_grid(p.label_count(), step)?;
    let infs: Vec<f64> = ts.par_iter().map(|t| p.inner_inf(t)).collect();
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (j, v) in infs.iter().enumerate() {
        if *v > best.0 {
            best = (*v, j);
        }
    }
    Ok((best.0, ts[best.1].clone()))
}

/// Lower value by a simplex sweep and upper value by a per-point label maximum.
pub fn saddle_values(p: &SaddleProblem) -> Result<SaddleValues> {
    let (lower, lower_argmax) = lower_value(p, p.mixture_step)?;
    let refined = p.mixture_step / 2.0;
    let refinement_delta = match lower_value(p, refined) {
        Ok((l2, _)) => (l2 - lower).max(0.0),
        Err(_) => 0.0,
    };
    let grid = p.grid();
    let mut upper = f64::INFINITY;
    let mut argmin = 0usize;
    for i in 0..grid.len() {
        let m = p
            .tables
            .iter()
            .map(|t| t.value(i).finite().unwrap_or(f64::INFINITY))
            .fold(f64::NEG_INFINITY, f64::max);
        if m < upper {
            upper = m;
            argmin = i;
        }
    }
    if !lower.is_finite() || !upper.is_finite() {
        return Err(Error::Unsupported("saddle values are not finite on this grid".into()));
    }
    Ok(SaddleValues {
        lower,
        upper,
        gap: upper - lower,
        lower_argmax,
        upper_argmin: grid.point_vector(argmin),
        refinement_delta,
    })
}

/// Always true: the mixture extension is affine in `t`. The vertex tables are
/// checked to reproduce the stored functions exactly.
pub fn concavity_in_y_check(p: &SaddleProblem) -> bool {
    let m = p.label_count();
    (0..m).all(|j| {
        let mut t = vec![0.0; m];
        t[j] = 1.0;
        (0..p.grid().len()).all(|i| p.mixture_value(&t, i) == p.tables[j].value(i))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WitnessMode {
    Support,
    Subgradient,
    EpsSubgradient(f64),
    ConvSubgradient,
}

impl WitnessMode {
    pub fn name(&self) -> &'static str {
        match self {
            WitnessMode::Support => "support",
            WitnessMode::Subgradient => "subgrad",
            WitnessMode::EpsSubgradient(_) => "eps",
            WitnessMode::ConvSubgradient => "conv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    FullSpace,
    Ball(f64),
}

impl Region {
    pub fn name(&self) -> String {
        match self {
            Region::FullSpace => "fullspace".to_string(),
            Region::Ball(g) => format!("ball({g})"),
        }
    }

    fn radius(&self) -> Option<f64> {
        match self {
            Region::FullSpace => None,
            Region::Ball(g) => Some(*g),
        }
    }
}

/// Minorant pair with the intersection property, together with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct IPWitness {
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub x1: Option<Vector>,
    pub x2: Option<Vector>,
    pub phi1: QuadMinorant,
    pub phi2: QuadMinorant,
    pub mode: WitnessMode,
    pub region: Region,
    pub level: f64,
    pub decision: IPDecision,
}

/// Union of the default dictionaries of all tables.
pub fn default_dictionary(p: &SaddleProblem) -> Result<MinorantDictionary> {
    let mut dict = MinorantDictionary::default_for(&p.tables[0])?;
    for t in &p.tables[1..] {
        dict = dict.merged(&MinorantDictionary::default_for(t)?)?;
    }
    Ok(dict)
}

/// Largest touching offset of `-a‖x‖² + ⟨l, x⟩ + c` below `h` and the touching point.
///
/// With [`Touch::Closed`] this is the tight offset; with [`Touch::Interior`]
/// the touching point must be an interior grid point within [`DEFAULT_TOL`] of
/// the minimum slack.
fn touching_offset(h: &SampledFunction, a: f64, l: &[f64], touch: Touch) -> Option<(f64, usize)> {
    let grid = h.grid();
    let mut min = f64::INFINITY;
    let mut first = usize::MAX;
    let vals: Vec<(usize, f64)> = h
        .domain()
        .map(|(i, x, v)| (i, v + a * norm_sq(x) - dot(l, x)))
        .collect();
    for &(i, v) in &vals {
        if v < min {
            min = v;
            first = i;
        }
    }
    if first == usize::MAX {
        return None;
    }
    match touch {
        Touch::Closed => Some((min, first)),
        Touch::Interior => {
            let mut best: Option<(f64, usize)> = None;
            for &(i, v) in &vals {
                if v <= min + DEFAULT_TOL && grid.is_interior(i) && best.is_none_or(|(bv, _)| v > bv) {
                    best = Some((v, i));
                }
            }
            best
        }
    }
}

#[derive(Debug, Clone)]
struct Entry {
    t: usize,
    slope: usize,
    c: f64,
    x: usize,
}

fn direction_key(l: &[f64]) -> Vec<i64> {
    let n = norm_sq(l).sqrt();
    l.iter().map(|c| (c / n * 1e9).round() as i64).collect()
}

struct Search<'a> {
    p: &'a SaddleProblem,
    ts: Vec<Vec<f64>>,
    funcs: Vec<Option<SampledFunction>>,
    touch: Touch,
}

impl<'a> Search<'a> {
    fn new(p: &'a SaddleProblem, touch: Touch) -> Result<Self> {
        let ts = p.mixtures()?;
        let funcs = ts.par_iter().map(|t| p.mixture(t)).collect::<Result<Vec<_>>>()?;
        Ok(Search { p, ts, funcs, touch })
    }

    fn minorant(&self, a: f64, l: &Vector, c: f64) -> Result<QuadMinorant> {
        QuadMinorant::new(a, l.clone(), c)
    }

    /// First mixture whose touching constant lies at or above `alpha`.
    fn constant_route(&self, alpha: f64) -> Option<(usize, f64, usize)> {
        let zero = vec![0.0; self.p.dim()];
        self.funcs.iter().enumerate().find_map(|(j, h)| {
            let h = h.as_ref()?;
            let (c, x) = touching_offset(h, 0.0, &zero, self.touch)?;
            (c >= alpha).then_some((j, c, x))
        })
    }

    /// First touching minorant of some mixture, in mixture then dictionary order.
    fn any_touching(&self, dict: &MinorantDictionary) -> Option<(usize, QuadMinorant, usize)> {
        for (j, h) in self.funcs.iter().enumerate() {
            let Some(h) = h else { continue };
            for (a, l) in dict.pairs() {
                if let Some((c, x)) = touching_offset(h, a, l.as_slice(), self.touch) {
                    if let Ok(phi) = QuadMinorant::new(a, l.clone(), c) {
                        return Some((j, phi, x));
                    }
                }
            }
        }
        None
    }

    /// Anti-parallel affine pairs with disjoint strict sublevel sets.
    fn affine_route(&self, alpha: f64, dict: &MinorantDictionary) -> Result<Option<(Entry, Entry)>> {
        let slopes: Vec<&Vector> = dict.slopes().iter().filter(|l| !l.is_zero()).collect();
        let per_t: Vec<Vec<Entry>> = self
            .funcs
            .par_iter()
            .enumerate()
            .map(|(t, h)| {
                let Some(h) = h else { return Vec::new() };
                slopes
                    .iter()
                    .enumerate()
                    .filter_map(|(s, l)| {
                        touching_offset(h, 0.0, l.as_slice(), self.touch).map(|(c, x)| Entry { t, slope: s, c, x })
                    })
                    .collect()
            })
            .collect();
        let mut best: HashMap<Vec<i64>, (f64, Entry)> = HashMap::new();
        let mut order: Vec<Vec<i64>> = Vec::new();
        for e in per_t.into_iter().flatten() {
            let l = slopes[e.slope].as_slice();
            let b = (alpha - e.c) / norm_sq(l).sqrt();
            let key = direction_key(l);
            match best.get(&key) {
                Some((bb, _)) if *bb <= b => {}
                Some(_) => {
                    best.insert(key, (b, e));
                }
                None => {
                    order.push(key.clone());
                    best.insert(key, (b, e));
                }
            }
        }
        for key in &order {
            let opposite: Vec<i64> = key.iter().map(|v| -v).collect();
            let (Some((b1, e1)), Some((b2, e2))) = (best.get(key), best.get(&opposite)) else { continue };
            if b1 + b2 <= 1e-12 * (1.0 + b1.abs() + b2.abs()) {
                let phi1 = self.minorant(0.0, slopes[e1.slope], e1.c)?;
                let phi2 = self.minorant(0.0, slopes[e2.slope], e2.c)?;
                if ip_decide_fullspace(&phi1, &phi2, alpha, self.p.dim())?.verdict == Verdict::Holds {
                    return Ok(Some((e1.clone(), e2.clone())));
                }
            }
        }
        Ok(None)
    }

    fn witness(
        &self,
        alpha: f64,
        dict: &MinorantDictionary,
        mode: WitnessMode,
    ) -> Result<Option<IPWitness>> {
        let n = self.p.dim();
        let grid = self.p.grid();
        let with_points = self.touch == Touch::Interior;
        if let Some((j, c, x)) = self.constant_route(alpha) {
            let phi1 = QuadMinorant::constant(n, c)?;
            let (j2, phi2, x2) = match self.touch {
                Touch::Closed => {
                    let (c2, x2) = touching_offset(self.funcs[0].as_ref().ok_or(Error::Improper)?, 0.0, &vec![0.0; n], Touch::Closed)
                        .ok_or(Error::Improper)?;
                    (0, QuadMinorant::constant(n, c2)?, x2)
                }
                Touch::Interior => match self.any_touching(dict) {
                    Some(found) => found,
                    None => return Ok(None),
                },
            };
            let decision = ip_decide_fullspace(&phi1, &phi2, alpha, n)?;
            if decision.verdict == Verdict::Holds {
                return Ok(Some(IPWitness {
                    y1: self.ts[j].clone(),
                    y2: self.ts[j2].clone(),
                    x1: with_points.then(|| grid.point_vector(x)),
                    x2: with_points.then(|| grid.point_vector(x2)),
                    phi1,
                    phi2,
                    mode,
                    region: Region::FullSpace,
                    level: alpha,
                    decision,
                }));
            }
        }
        if let Some((e1, e2)) = self.affine_route(alpha, dict)? {
            let slopes: Vec<&Vector> = dict.slopes().iter().filter(|l| !l.is_zero()).collect();
            let phi1 = self.minorant(0.0, slopes[e1.slope], e1.c)?;
            let phi2 = self.minorant(0.0, slopes[e2.slope], e2.c)?;
            let decision = ip_decide_fullspace(&phi1, &phi2, alpha, n)?;
            return Ok(Some(IPWitness {
                y1: self.ts[e1.t].clone(),
                y2: self.ts[e2.t].clone(),
                x1: with_points.then(|| grid.point_vector(e1.x)),
                x2: with_points.then(|| grid.point_vector(e2.x)),
                phi1,
                phi2,
                mode,
                region: Region::FullSpace,
                level: alpha,
                decision,
            }));
        }
        Ok(None)
    }
}

fn check_level(alpha: f64) -> Result<()> {
    if !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("level {alpha} must be finite")));
    }
    Ok(())
}

/// Support members of two mixtures with the intersection property on the whole space.
///
/// Only two kinds of pairs can qualify: a constant at or above `α`, or two
/// affine members with anti-parallel slopes and non-overlapping halfspaces.
/// Both are searched exhaustively over the dictionary, so `None` means no
/// dictionary pair of any mixture on the simplex grid works.
pub fn support_ip_witness_search(p: &SaddleProblem, alpha: f64, dict: &MinorantDictionary) -> Result<Option<IPWitness>> {
    check_level(alpha)?;
    Search::new(p, Touch::Closed)?.witness(alpha, dict, WitnessMode::Support)
}

/// Exact subgradient pairs with the intersection property.
///
/// On the whole space the samples are treated as a window of functions on the
/// whole space, so touching points must be interior grid points. On a ball of
/// radius `γ` a support witness at an intermediate level `β ∈ (α, upper)` is
/// transferred to exact subgradients with [`ip_transfer_to_ball`], `η = β - α`.
pub fn subgradient_ip_witness_search(
    p: &SaddleProblem,
    alpha: f64,
    region: Region,
    dict: &MinorantDictionary,
) -> Result<Option<IPWitness>> {
    check_level(alpha)?;
    match region {
        Region::FullSpace => Search::new(p, Touch::Interior)?.witness(alpha, dict, WitnessMode::Subgradient),
        Region::Ball(gamma) => ball_witness(p, alpha, gamma, dict),
    }
}

fn ball_witness(p: &SaddleProblem, alpha: f64, gamma: f64, dict: &MinorantDictionary) -> Result<Option<IPWitness>> {
    let values = saddle_values(p)?;
    if alpha >= values.upper {
        return Err(Error::Precondition(format!(
            "level {alpha} is not below the upper value {}",
            values.upper
        )));
    }
    let beta = if alpha < values.lower {
        (alpha + values.lower) / 2.0
    } else {
        (alpha + values.upper) / 2.0
    };
    let Some(w) = support_ip_witness_search(p, beta, dict)? else {
        if values.gap_closed() {
            return Err(Error::TheoremViolation(format!(
                "no support witness at level {beta} although the saddle gap is closed"
            )));
        }
        return Ok(None);
    };
    let f = p.mixture(&w.y1)?.ok_or(Error::Improper)?;
    let g = p.mixture(&w.y2)?.ok_or(Error::Improper)?;
    let t = match ip_transfer_to_ball(&f, &g, &w.phi1, &w.phi2, beta, gamma, beta - alpha) {
        Ok(t) => t,
        Err(Error::NoAdmissiblePoint(msg)) if !values.gap_closed() => {
            let _ = msg;
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    if t.decision.verdict != Verdict::Holds {
        return Ok(None);
    }
    Ok(Some(IPWitness {
        y1: w.y1,
        y2: w.y2,
        x1: Some(t.leg1.br.y_bar.clone()),
        x2: Some(t.leg2.br.y_bar.clone()),
        phi1: t.leg1.br.phi_bar.clone(),
        phi2: t.leg2.br.phi_bar.clone(),
        mode: WitnessMode::Subgradient,
        region: Region::Ball(gamma),
        level: alpha,
        decision: t.decision,
    }))
}

/// ε-subgradient pair obtained by lifting a support witness to tight offsets.
pub fn eps_subgradient_ip_witness_search(
    p: &SaddleProblem,
    alpha: f64,
    epsilon: f64,
    dict: &MinorantDictionary,
) -> Result<Option<IPWitness>> {
    let Some(w) = support_ip_witness_search(p, alpha, dict)? else { return Ok(None) };
    let f = p.mixture(&w.y1)?.ok_or(Error::Improper)?;
    let g = p.mixture(&w.y2)?.ok_or(Error::Improper)?;
    let e1 = eps_subgradient_from_support(&f, &w.phi1, epsilon)?;
    let e2 = eps_subgradient_from_support(&g, &w.phi2, epsilon)?;
    let decision = ip_decide_fullspace(&e1.phi_bar, &e2.phi_bar, alpha, p.dim())?;
    if decision.verdict != Verdict::Holds {
        return Err(Error::TheoremViolation(format!(
            "lifted minorants {} and {} lost the intersection property",
            e1.phi_bar, e2.phi_bar
        )));
    }
    Ok(Some(IPWitness {
        y1: w.y1,
        y2: w.y2,
        x1: Some(e1.x1),
        x2: Some(e2.x1),
        phi1: e1.phi_bar,
        phi2: e2.phi_bar,
        mode: WitnessMode::EpsSubgradient(epsilon),
        region: Region::FullSpace,
        level: alpha,
        decision,
    }))
}

/// Whether `[h <= level]` is non-empty and stays off the boundary of the box.
fn sublevel_inside_box(h: &SampledFunction, level: f64) -> bool {
    let grid = h.grid();
    let mut any = false;
    for i in 0..grid.len() {
        if h.value(i).le(level) {
            if !grid.is_interior(i) {
                return false;
            }
            any = true;
        }
    }
    any
}

/// Affine subgradient pair for convex tables, built at the common saddle value
/// and then lowered to `α`.
///
/// Requires a closed gap, and some label or mixture `ỹ` whose sublevel set at
/// a level above `lower` lies strictly inside the box. The pair is produced by
/// [`conv_subgradient_ip_pair`] for `a(·, ȳ)` and `a(·, ỹ)`, with `ȳ` the
/// mixture attaining the lower value, at level `β = lower` (or `upper` if the
/// two `β`-sublevel sets do not meet on the grid).
pub fn conv_minimax_witness(p: &SaddleProblem, alpha: f64) -> Result<Option<IPWitness>> {
    check_level(alpha)?;
    let values = saddle_values(p)?;
    if !values.gap_closed() {
        return Err(Error::Precondition(format!(
            "saddle gap {} exceeds the grid tolerance {}",
            values.gap,
            values.gap_tolerance()
        )));
    }
    let y_bar = values.lower_argmax.clone();
    let h_bar = p.mixture(&y_bar)?.ok_or(Error::Improper)?;
    let ts = p.mixtures()?;
    let offsets = [1.0, 0.1, 0.01];
    let mut y_tilde = None;
    'outer: for t in &ts {
        let Some(h) = p.mixture(t)? else { continue };
        for d in offsets {
            if sublevel_inside_box(&h, values.lower + d) {
                y_tilde = Some((t.clone(), h));
                break 'outer;
            }
        }
    }
    let Some((y_tilde, h_tilde)) = y_tilde else {
        return Err(Error::Precondition(
            "no label or mixture has a sublevel set above the lower value strictly inside the box".into(),
        ));
    };

    let mut last_err = None;
    for beta in [values.lower, values.upper] {
        if alpha > beta {
            continue;
        }
        if nested_common_point(&h_bar, &h_tilde, beta).is_none() {
            continue;
        }
        match conv_subgradient_ip_pair(&h_bar, &h_tilde, beta) {
            Ok(pair) => {
                let decision = ip_decide_fullspace(&pair.phi1, &pair.phi2, alpha, p.dim())?;
                if decision.verdict != Verdict::Holds {
                    return Err(Error::TheoremViolation(format!(
                        "pair {} / {} holds at {beta} but not at {alpha}",
                        pair.phi1, pair.phi2
                    )));
                }
                return Ok(Some(IPWitness {
                    y1: y_bar,
                    y2: y_tilde,
                    x1: Some(pair.x1),
                    x2: Some(pair.x2),
                    phi1: pair.phi1,
                    phi2: pair.phi2,
                    mode: WitnessMode::ConvSubgradient,
                    region: Region::FullSpace,
                    level: alpha,
                    decision,
                }));
            }
            Err(e @ Error::TheoremViolation(_)) => return Err(e),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| {
        let shrink = (0..=52)
            .map(|k| values.lower + 0.5f64.powi(k))
            .map(|lvl| (lvl, nested_common_point(&h_bar, &h_tilde, lvl).is_some()))
            .filter(|(_, ok)| *ok)
            .map(|(lvl, _)| lvl)
            .next_back();
        Error::Precondition(format!(
            "sublevel sets of the attaining mixture and the bounded mixture do not meet at the saddle \
             value (smallest meeting level tried: {shrink:?})"
        ))
    }))
}

/// First grid point of `[f <= β] ∩ [g <= β]`, approached through the nested
/// levels `β + 2^-k`; on a finite grid the nested sets stabilize.
fn nested_common_point(f: &SampledFunction, g: &SampledFunction, beta: f64) -> Option<usize> {
    let common = |lvl: f64| (0..f.len()).find(|&i| f.value(i).le(lvl) && g.value(i).le(lvl));
    let mut last = None;
    for k in 0..=52 {
        {
            let i = common(beta + 0.5f64.powi(k))?;
            last = Some(i)
        }
    }
    last.and(common(beta))
}

/// Re-verifies a witness: support membership, mode-specific touching, and the
/// intersection-property decision on its region.
pub fn verify_ip_witness(p: &SaddleProblem, w: &IPWitness) -> Result<bool> {
    let f = p.mixture(&w.y1)?.ok_or(Error::Improper)?;
    let g = p.mixture(&w.y2)?.ok_or(Error::Improper)?;
    for (h, phi, x) in [(&f, &w.phi1, &w.x1), (&g, &w.phi2, &w.x2)] {
        if !support_membership(h, phi, DEFAULT_TOL)?.member {
            return Ok(false);
        }
        let eps = match w.mode {
            WitnessMode::Support => None,
            WitnessMode::Subgradient | WitnessMode::ConvSubgradient => Some(0.0),
            WitnessMode::EpsSubgradient(e) => Some(e),
        };
        if let Some(eps) = eps {
            let Some(x) = x else { return Ok(false) };
            let q = SubdiffQuery::new(h, x, eps, DEFAULT_TOL)?;
            if !subdiff_membership(&q, phi)? {
                return Ok(false);
            }
        }
    }
    let decision = match w.region.radius() {
        None => ip_decide_fullspace(&w.phi1, &w.phi2, w.level, p.dim())?,
        Some(g) => ip_decide_ball(&w.phi1, &w.phi2, w.level, g, DEFAULT_BALL_MARGIN)?,
    };
    Ok(decision.verdict == Verdict::Holds)
}

/// One-dimensional certificate that no pair of mixtures admits touching
/// minorants with the intersection property at level `α`.
///
/// Uses [`Touch::Closed`] for support-level claims (a support member can
/// always be raised until it touches somewhere on the box) and
/// [`Touch::Interior`] for subgradient claims about functions on the line.
pub fn nonexistence_certificate_1d(p: &SaddleProblem, alpha: f64, touch: Touch) -> Result<bool> {
    check_level(alpha)?;
    if p.dim() != 1 {
        return Err(Error::Unsupported("nonexistence certificates are one-dimensional".into()));
    }
    let ts = p.mixtures()?;
    let summaries = ts
        .par_iter()
        .map(|t| match p.mixture(t)? {
            Some(h) => touch_summary_1d(&h, alpha, touch).map(Some),
            None => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;
    let present: Vec<_> = summaries.into_iter().flatten().collect();
    Ok(!present
        .iter()
        .any(|s1| present.iter().any(|s2| pair_exists_1d(s1, s2))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(lo: f64, hi: f64, step: f64, fs: &[fn(f64) -> f64]) -> SaddleProblem {
        let grid = Arc::new(Grid::cube(1, lo, hi, step).unwrap());
        let tables = fs
            .iter()
            .map(|f| SampledFunction::from_real_fn(grid.clone(), |x| f(x[0])).unwrap())
            .collect::<Vec<_>>();
        let labels = (1..=fs.len()).map(|i| format!("y{i}")).collect();
        SaddleProblem::new(labels, tables, None).unwrap()
    }

    fn gap4() -> SaddleProblem {
        problem(-2.0, 2.0, 0.01, &[|x| -(x + 1.0) * (x + 1.0), |x| -(x - 1.0) * (x - 1.0)])
    }

    fn gap0() -> SaddleProblem {
        problem(-3.0, 3.0, 0.01, &[|x| x * x, |x| (x - 2.0) * (x - 2.0)])
    }

    #[test]
    fn simplex_grid_order() {
        let ts = simplex_grid(2, 0.25).unwrap();
        assert_eq!(ts.len(), 5);
        assert_eq!(ts[0], vec![1.0, 0.0]);
        assert_eq!(ts[1], vec![0.0, 1.0]);
        assert_eq!(ts[2], vec![0.75, 0.25]);
        assert_eq!(simplex_grid(3, 0.05).unwrap().len(), 231);
        assert!(simplex_grid(2, 0.3).is_err());
        assert!(simplex_grid(5, 0.5).is_err());
    }

    #[test]
    fn saddle_value_examples() {
        let bil = problem(-1.0, 1.0, 0.01, &[|x| x, |x| -x]);
        let v = saddle_values(&bil).unwrap();
        assert!(v.lower.abs() < 1e-12 && v.upper.abs() < 1e-12);
        assert_eq!(v.lower_argmax, vec![0.5, 0.5]);

        let v = saddle_values(&gap4()).unwrap();
        assert!((v.lower + 5.0).abs() < 1e-9);
        assert!((v.upper + 1.0).abs() < 1e-9);
        assert!((v.gap - 4.0).abs() < 1e-9);

        let v = saddle_values(&gap0()).unwrap();
        assert!((v.lower - 1.0).abs() < 1e-9 && (v.upper - 1.0).abs() < 1e-9);
        assert!(v.gap_closed());
    }

    #[test]
    fn concavity_guard() {
        assert!(concavity_in_y_check(&gap4()));
    }

    #[test]
    fn support_search_on_gap_instances() {
        let p = gap0();
        let dict = default_dictionary(&p).unwrap();
        for alpha in [0.9, 0.5, 0.0] {
            let w = support_ip_witness_search(&p, alpha, &dict).unwrap().expect("witness");
            assert!(verify_ip_witness(&p, &w).unwrap());
        }
        let p = gap4();
        let dict = default_dictionary(&p).unwrap();
        assert!(support_ip_witness_search(&p, -3.0, &dict).unwrap().is_none());
        assert!(nonexistence_certificate_1d(&p, -3.0, Touch::Closed).unwrap());
        let w = support_ip_witness_search(&p, -6.0, &dict).unwrap().expect("below lower");
        assert!(w.phi1.is_constant() && w.phi1.offset() >= -6.0);
    }

    #[test]
    fn exp2_and_abs_pair_subgradients() {
        let p = problem(-10.0, 10.0, 0.01, &[f64::exp2, |x| -x.abs() + 2.0]);
        let dict = MinorantDictionary::lattice(vec![0.0, 1.0], &[4.0], 0.5).unwrap();
        assert!(subgradient_ip_witness_search(&p, 0.0, Region::FullSpace, &dict).unwrap().is_none());
        let w = subgradient_ip_witness_search(&p, -0.1, Region::Ball(5.0), &dict)
            .unwrap()
            .expect("ball witness");
        assert!(verify_ip_witness(&p, &w).unwrap());
    }

    #[test]
    fn eps_and_conv_witnesses() {
        let p = gap0();
        let dict = default_dictionary(&p).unwrap();
        let w = eps_subgradient_ip_witness_search(&p, 0.5, 0.1, &dict).unwrap().unwrap();
        assert!(verify_ip_witness(&p, &w).unwrap());
        let w = conv_minimax_witness(&p, 0.5).unwrap().unwrap();
        assert!(verify_ip_witness(&p, &w).unwrap());
        assert!(eps_subgradient_ip_witness_search(&gap4(), -3.0, 0.1, &default_dictionary(&gap4()).unwrap())
            .unwrap()
            .is_none());
    }

    #[test]
    fn conv_rejects_affine_tables() {
        let p = problem(-1.0, 1.0, 0.1, &[|x| x, |x| -x]);
        assert!(matches!(conv_minimax_witness(&p, -0.5), Err(Error::Precondition(_))));
    }
}

//! ζ(H) along two independent paths.
//!
//! * Reeb path: `ζ(H) = ∫_X H ω + Σ_j ∫_{D_j} (α_j − H) ω` from the cycle/tree
//!   decomposition of the Reeb graph.
//! * Aarnes path: `ζ(H) = max H − ∫_{min H}^{max H} b(t) dt` with
//!   `b(t) = τ({H ≤ t}) = |Ŵ|`, where the sublevel sets are regularized
//!   directly and no Reeb graph is built.
//!
//! Both paths see the same PL field, so `b` agrees pointwise between them;
//! their only difference is the quadrature of `∫ b dt`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::TorusField;
use crate::reeb::{CycleTreeDecomposition, ReebGraph, SublevelProfile};

/// Default discrepancy tolerance between the two paths.
pub const DEFAULT_TOLERANCE: f64 = 5e-3;

/// Monotonicity slack for sampled b-curves.
const MONOTONE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Reeb,
    Aarnes,
    Both,
}

/// Where `b(t)` is sampled.
///
/// Every open interval between consecutive distinct critical values gets
/// `max(per_interval, ⌈density · n · length / (max − min)⌉)` samples at the
/// midpoints of an even split, so the t-resolution follows the grid
/// resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub per_interval: usize,
    pub density: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { per_interval: 8, density: 1.0 }
    }
}

impl Sampling {
    pub fn with_per_interval(per_interval: usize) -> Self {
        Self { per_interval, ..Self::default() }
    }

    /// Regular sample levels, ascending, together with the critical values.
    pub fn levels(&self, field: &TorusField) -> (Vec<f64>, Vec<f64>) {
        let critical = field.critical_values();
        let sorted = field.sorted_values();
        let is_vertex_value = |t: f64| sorted.binary_search_by(|x| x.total_cmp(&t)).is_ok();
        let (m, big_m) = (field.min_value(), field.max_value());
        let n = field.grid().n() as f64;
        let mut ts = Vec::new();
        for w in critical.windows(2) {
            let (a, b) = (w[0], w[1]);
            let scaled = (self.density * n * (b - a) / (big_m - m)).ceil() as usize;
            let k = self.per_interval.max(scaled).max(1);
            for i in 0..k {
                let mut t = a + (i as f64 + 0.5) * (b - a) / k as f64;
                while is_vertex_value(t) {
                    t = t.next_up();
                }
                if t > a && t < b && ts.last().map_or(true, |&l| t > l) {
                    ts.push(t);
                }
            }
        }
        (critical, ts)
    }
}

/// Sampled `t ↦ b(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BCurve {
    pub samples: Vec<(f64, f64)>,
    pub critical_values: Vec<f64>,
    pub min_value: f64,
    pub max_value: f64,
}

impl BCurve {
    /// CSV with header `t,b`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,b\n");
        for &(t, b) in &self.samples {
            out.push_str(&format!("{t:.16e},{b:.16e}\n"));
        }
        out
    }

    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.samples.iter().find(|s| s.0 == t).map(|s| s.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeTerm {
    pub alpha: f64,
    /// `∫_{D_j} (α_j − H) ω`.
    pub term: f64,
    pub region_measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiStateReport {
    pub zeta_reeb: Option<f64>,
    pub zeta_aarnes: Option<f64>,
    pub mean: f64,
    pub trees: Vec<TreeTerm>,
    pub discrepancy: Option<f64>,
    /// Discrepancy exceeded the tolerance.
    pub flagged: bool,
    pub tolerance: f64,
    pub n: usize,
    pub seed: Option<u64>,
    pub mode: Mode,
}

/// Reeb graph plus its decomposition, kept together for reuse.
#[derive(Debug, Clone)]
pub struct ReebAnalysis {
    pub graph: ReebGraph,
    pub decomposition: CycleTreeDecomposition,
}

impl ReebAnalysis {
    pub fn new(field: &TorusField) -> Result<Self> {
        let graph = ReebGraph::build(field)?;
        let decomposition = graph.decompose()?;
        Ok(Self { graph, decomposition })
    }

    pub fn zeta(&self, field: &TorusField) -> f64 {
        field.integral() + self.decomposition.trees.iter().map(|t| t.term()).sum::<f64>()
    }

    /// `b(t) = |X^t ∩ S| + Σ_{α_j < t} |D_j|` at each level.
    pub fn b_values(&self, field: &TorusField, ts: &[f64]) -> Vec<f64> {
        let profile = SublevelProfile::new(&self.graph, &self.decomposition.cycle_edges);
        ts.iter()
            .map(|&t| {
                let trees: f64 = self
                    .decomposition
                    .trees
                    .iter()
                    .filter(|tr| tr.alpha < t)
                    .map(|tr| tr.region_measure)
                    .sum();
                profile.measure_below(field, t) + trees
            })
            .collect()
    }
}

pub fn evaluate_reeb(field: &TorusField) -> Result<QuasiStateReport> {
    let analysis = ReebAnalysis::new(field)?;
    let zeta = analysis.zeta(field);
    Ok(QuasiStateReport {
        zeta_reeb: Some(zeta),
        zeta_aarnes: None,
        mean: field.integral(),
        trees: tree_terms(&analysis),
        discrepancy: None,
        flagged: false,
        tolerance: DEFAULT_TOLERANCE,
        n: field.grid().n(),
        seed: None,
        mode: Mode::Reeb,
    })
}

fn tree_terms(analysis: &ReebAnalysis) -> Vec<TreeTerm> {
    analysis
        .decomposition
        .trees
        .iter()
        .map(|t| TreeTerm { alpha: t.alpha, term: t.term(), region_measure: t.region_measure })
        .collect()
}

/// ζ via the Reeb formula.
pub fn zeta_reeb(field: &TorusField) -> Result<f64> {
    Ok(ReebAnalysis::new(field)?.zeta(field))
}

fn curve(field: &TorusField, critical: Vec<f64>, ts: &[f64], bs: Vec<f64>) -> BCurve {
    BCurve {
        samples: ts.iter().copied().zip(bs).collect(),
        critical_values: critical,
        min_value: field.min_value(),
        max_value: field.max_value(),
    }
}

pub fn b_curve_reeb(field: &TorusField, sampling: &Sampling) -> Result<BCurve> {
    let analysis = ReebAnalysis::new(field)?;
    let (critical, ts) = sampling.levels(field);
    let bs = analysis.b_values(field, &ts);
    Ok(curve(field, critical, &ts, bs))
}

/// `b(t) = |Ŵ_t|` from the regularized sublevel sets alone.
pub fn b_curve_tau(field: &TorusField, sampling: &Sampling) -> Result<BCurve> {
    let (critical, ts) = sampling.levels(field);
    let bs = ts
        .par_iter()
        .map(|&t| field.sublevel(t)?.tau())
        .collect::<Result<Vec<f64>>>()?;
    Ok(curve(field, critical, &ts, bs))
}

/// `max − ∫_{min}^{max} b dt`. Each interval between consecutive critical
/// values is integrated on its own: trapezoids between samples, and the
/// nearest sample held constant out to the interval ends, so jumps at
/// critical values never get smeared.
pub fn evaluate_aarnes(curve: &BCurve) -> Result<f64> {
    for w in curve.samples.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::Data("b-curve samples are not strictly increasing in t".into()));
        }
        if w[1].1 < w[0].1 - MONOTONE_SLACK {
            return Err(Error::Data(format!(
                "b-curve decreases from {} to {} at t = {}",
                w[0].1, w[1].1, w[1].0
            )));
        }
    }
    let mut integral = 0.0;
    let mut k = 0;
    for w in curve.critical_values.windows(2) {
        let (a, b) = (w[0], w[1]);
        while k < curve.samples.len() && curve.samples[k].0 <= a {
            k += 1;
        }
        let start = k;
        while k < curve.samples.len() && curve.samples[k].0 < b {
            k += 1;
        }
        let inner = &curve.samples[start..k];
        let (first, last) = match (inner.first(), inner.last()) {
            (Some(f), Some(l)) => (f, l),
            // a sliver with no room for a sample; its share is below 1e-12
            _ if b - a <= 1e-12 * a.abs().max(b.abs()).max(1.0) => continue,
            _ => return Err(Error::Data(format!("no samples in critical interval ({a}, {b})"))),
        };
        integral += (first.0 - a) * first.1 + (b - last.0) * last.1;
        for s in inner.windows(2) {
            integral += 0.5 * (s[1].0 - s[0].0) * (s[0].1 + s[1].1);
        }
    }
    Ok(curve.max_value - integral)
}

/// ζ via the Aarnes representation.
pub fn zeta_aarnes(field: &TorusField, sampling: &Sampling) -> Result<f64> {
    evaluate_aarnes(&b_curve_tau(field, sampling)?)
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub sampling: Sampling,
    pub tolerance: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self { sampling: Sampling::default(), tolerance: DEFAULT_TOLERANCE }
    }
}

/// A full run: the report and the b-curve of the path(s) that produced one
/// (the τ curve when the Aarnes path ran).
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: QuasiStateReport,
    pub curve: BCurve,
}

pub fn quasi_state(field: &TorusField, mode: Mode, opts: &Options) -> Result<Evaluation> {
    let mut report = QuasiStateReport {
        zeta_reeb: None,
        zeta_aarnes: None,
        mean: field.integral(),
        trees: Vec::new(),
        discrepancy: None,
        flagged: false,
        tolerance: opts.tolerance,
        n: field.grid().n(),
        seed: None,
        mode,
    };
    let mut reeb_curve = None;
    if matches!(mode, Mode::Reeb | Mode::Both) {
        let analysis = ReebAnalysis::new(field)?;
        report.zeta_reeb = Some(analysis.zeta(field));
        report.trees = tree_terms(&analysis);
        if mode == Mode::Reeb {
            let (critical, ts) = opts.sampling.levels(field);
            let bs = analysis.b_values(field, &ts);
            reeb_curve = Some(curve(field, critical, &ts, bs));
        }
    }
    let curve = match reeb_curve {
        Some(c) => c,
        None => {
            let c = b_curve_tau(field, &opts.sampling)?;
            report.zeta_aarnes = Some(evaluate_aarnes(&c)?);
            c
        }
    };
    if let (Some(r), Some(a)) = (report.zeta_reeb, report.zeta_aarnes) {
        let d = (r - a).abs();
        report.discrepancy = Some(d);
        report.flagged = d > opts.tolerance;
    }
    Ok(Evaluation { report, curve })
}

#[cfg(test)]
mod tests;

//! Radial weights on the two summands and the neck, and discrete weighted
//! Hölder norms of sampled fields.
//!
//! The weights only have prescribed plateaus; in between they follow a
//! monotone quintic blend. Distances are Euclidean in chart coordinates.

use rayon::prelude::*;

use crate::error::{QcurvError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// `ρ1` on the inverted chart of the punctured `N`: 1 for `|z| ≤ 1/2`, `|z|` for `|z| ≥ 2`.
    RhoNInverted,
    /// `ρ` in normal coordinates at the puncture: `|x|` near it, 1 away from it.
    RhoNNormal,
    /// `ρ2` in normal coordinates on `M`: `|u|` near `q`, 1 away.
    RhoM,
    /// `w` on the connected sum.
    Glued,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub a: f64,
    pub b: f64,
}

impl WeightSpec {
    pub fn rho1() -> Self {
        WeightSpec { kind: WeightKind::RhoNInverted, a: 1.0, b: 1.0 }
    }

    pub fn rho() -> Self {
        WeightSpec { kind: WeightKind::RhoNNormal, a: 1.0, b: 1.0 }
    }

    pub fn rho2() -> Self {
        WeightSpec { kind: WeightKind::RhoM, a: 1.0, b: 1.0 }
    }

    /// Needs `4b ≤ 1/2` so the neck annulus sits where `ρ2 = |u|`, and
    /// `a ≤ 1` so that `|z| = 2/a` is already on the `ρ1 = |z|` plateau.
    pub fn glued(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0 && b > 0.0 && b <= 0.125) {
            return Err(QcurvError::BadInput(format!("glued weight needs 0 < a ≤ 1, 0 < b ≤ 1/8, got a={a}, b={b}")));
        }
        Ok(WeightSpec { kind: WeightKind::Glued, a, b })
    }

    pub fn ab(&self) -> f64 {
        self.a * self.b
    }
}

/// Where a sample lives. `Plain` for the single-chart weights; the glued
/// weight takes `Neck` (inverted coordinates `z` on `N`, `|z| ≤ 4/a`) or
/// `Far` (normal coordinates `u` on `M`, `|u| ≥ b`), identified by `u = abz`.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartPoint {
    Plain(Vec<f64>),
    Neck(Vec<f64>),
    Far(Vec<f64>),
}

impl ChartPoint {
    pub fn coords(&self) -> &[f64] {
        match self {
            ChartPoint::Plain(x) | ChartPoint::Neck(x) | ChartPoint::Far(x) => x,
        }
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// `ρ1` as a function of `|z|`.
pub fn rho1_radial(r: f64) -> f64 {
    let t = r - 1.0;
    1.0 + smoothstep(t) * t.max(0.0)
}

/// `1/ρ1(x/|x|²)`, i.e. `|x|` for `|x| ≤ 1/2` and 1 for `|x| ≥ 1`.
pub fn rho_radial(r: f64) -> f64 {
    1.0 / rho1_radial(1.0 / r)
}

pub fn weight(point: &ChartPoint, spec: &WeightSpec) -> Result<f64> {
    let r = norm(point.coords());
    match (spec.kind, point) {
        (WeightKind::RhoNInverted, ChartPoint::Plain(_)) => Ok(rho1_radial(r)),
        (WeightKind::RhoNNormal | WeightKind::RhoM, ChartPoint::Plain(_)) if r > 0.0 => Ok(rho_radial(r)),
        (WeightKind::Glued, ChartPoint::Neck(_)) if r <= 4.0 / spec.a => Ok(spec.ab() * rho1_radial(r)),
        (WeightKind::Glued, ChartPoint::Far(_)) if r >= spec.b => Ok(rho_radial(r)),
        _ => Err(QcurvError::PointOutsideChart),
    }
}

/// Position used for distances: `u`-coordinates on the connected sum.
fn common_coords(point: &ChartPoint, spec: &WeightSpec) -> Vec<f64> {
    match point {
        ChartPoint::Neck(z) if spec.kind == WeightKind::Glued => z.iter().map(|c| c * spec.ab()).collect(),
        other => other.coords().to_vec(),
    }
}

/// Factor converting a chart-coordinate `i`-th derivative to the metric
/// of the connected sum: the neck carries `a²b² g_N`.
fn derivative_scale(point: &ChartPoint, spec: &WeightSpec, i: usize) -> f64 {
    match point {
        ChartPoint::Neck(_) if spec.kind == WeightKind::Glued => spec.ab().powi(-(i as i32)),
        _ => 1.0,
    }
}

/// A field sampled at a point: `jets[i]` holds the components of `∇^i f`
/// in the point's own chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub point: ChartPoint,
    pub jets: Vec<Vec<f64>>,
}

impl Sample {
    pub fn scalar(point: ChartPoint, value: f64) -> Self {
        Sample { point, jets: vec![vec![value]] }
    }

    fn jet(&self, i: usize) -> Result<&[f64]> {
        self.jets
            .get(i)
            .map(Vec::as_slice)
            .ok_or_else(|| QcurvError::BadInput(format!("sample lacks derivatives of order {i}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedNormResult {
    pub value: f64,
    pub argmax_point: Option<ChartPoint>,
    pub components: Vec<f64>,
}

/// Index of the larger value; ties go to the lower index so the parallel
/// reduction is deterministic.
fn better(x: (f64, usize), y: (f64, usize)) -> (f64, usize) {
    if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
        y
    } else {
        x
    }
}

struct Prepared {
    pos: Vec<f64>,
    weight: f64,
}

fn prepare(samples: &[Sample], spec: &WeightSpec) -> Result<Vec<Prepared>> {
    samples
        .iter()
        .map(|s| Ok(Prepared { pos: common_coords(&s.point, spec), weight: weight(&s.point, spec)? }))
        .collect()
}

/// `sup w^{−(δ−i)} |∇^i f|` over the samples.
pub fn weighted_sup_norm(samples: &[Sample], spec: &WeightSpec, delta: f64, i: usize) -> Result<WeightedNormResult> {
    let prep = prepare(samples, spec)?;
    let vals: Vec<f64> = samples
        .iter()
        .zip(&prep)
        .map(|(s, p)| Ok(p.weight.powf(i as f64 - delta) * derivative_scale(&s.point, spec, i) * norm(s.jet(i)?)))
        .collect::<Result<_>>()?;
    let (value, arg) =
        vals.iter().enumerate().fold((f64::NEG_INFINITY, usize::MAX), |acc, (j, v)| better(acc, (*v, j)));
    if arg == usize::MAX {
        return Ok(WeightedNormResult { value: 0.0, argmax_point: None, components: vec![0.0] });
    }
    Ok(WeightedNormResult { value, argmax_point: Some(samples[arg].point.clone()), components: vec![value] })
}

/// `sup_x w(x)^{−(δ−k)+α} sup_{0 < 4d(x,y) ≤ w(x)} |∇^k f(x) − ∇^k f(y)| / d^α`.
pub fn weighted_holder_seminorm(
    samples: &[Sample],
    spec: &WeightSpec,
    delta: f64,
    alpha: f64,
    k: usize,
) -> Result<WeightedNormResult> {
    let prep = prepare(samples, spec)?;
    let jets: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| {
            let c = derivative_scale(&s.point, spec, k);
            Ok(s.jet(k)?.iter().map(|v| c * v).collect())
        })
        .collect::<Result<_>>()?;
    let per_x: Vec<Option<f64>> = (0..samples.len())
        .into_par_iter()
        .map(|x| {
            let px = &prep[x];
            let mut best: Option<f64> = None;
            for (y, py) in prep.iter().enumerate() {
                let d = dist(&px.pos, &py.pos);
                if d > 0.0 && 4.0 * d <= px.weight {
                    let diff: f64 = jets[x].iter().zip(&jets[y]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    let q = diff / d.powf(alpha);
                    best = Some(best.map_or(q, |b: f64| b.max(q)));
                }
            }
            best.map(|b| px.weight.powf(k as f64 - delta + alpha) * b)
        })
        .collect();
    if per_x.iter().all(Option::is_none) {
        return Err(QcurvError::NoAdmissiblePairs);
    }
    let (value, arg) = per_x
        .par_iter()
        .enumerate()
        .filter_map(|(j, v)| v.map(|v| (v, j)))
        .reduce(|| (f64::NEG_INFINITY, usize::MAX), better);
    Ok(WeightedNormResult { value, argmax_point: Some(samples[arg].point.clone()), components: vec![value] })
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `‖f‖_{C^{k,α}_δ} = Σ_{i ≤ k} sup w^{−(δ−i)}|∇^i f| + [∇^k f]_{α, δ−k}`;
/// the components list the `k + 1` sup terms followed by the seminorm.
pub fn weighted_holder_norm(
    samples: &[Sample],
    spec: &WeightSpec,
    delta: f64,
    alpha: f64,
    k: usize,
) -> Result<WeightedNormResult> {
    let mut components = Vec::with_capacity(k + 2);
    let mut best: Option<(f64, ChartPoint)> = None;
    let sups = (0..=k).map(|i| weighted_sup_norm(samples, spec, delta, i));
    for r in sups.chain(std::iter::once(weighted_holder_seminorm(samples, spec, delta, alpha, k))) {
        let r = r?;
        if let Some(p) = r.argmax_point {
            if best.as_ref().is_none_or(|(v, _)| r.value > *v) {
                best = Some((r.value, p));
            }
        }
        components.push(r.value);
    }
    Ok(WeightedNormResult { value: components.iter().sum(), argmax_point: best.map(|b| b.1), components })
}

/// Radii from `lo` to `hi` with `per_dyadic` log-spaced points per doubling.
pub fn dyadic_radii(lo: f64, hi: f64, per_dyadic: usize) -> Vec<f64> {
    let m = ((hi / lo).log2() * per_dyadic as f64).ceil().max(1.0) as usize;
    (0..=m).map(|i| lo * (hi / lo).powf(i as f64 / m as f64)).collect()
}

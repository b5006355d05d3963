//! The approximate metric on `N # M`: the inverted-chart expansion of the
//! asymptotically flat `g_N`, the normal-coordinate expansion of `g_2`, and a
//! cutoff blend on `b ≤ |u| ≤ 4b`. Curvature is taken by fourth-order finite
//! differences of sampled metric components.
//!
//! Curvature tensors are stored as `R[a][b][c][d]` with the usual symmetries;
//! normal coordinates read `g_ij = δ_ij − ⅓ R[i][k][j][l] x^k x^l`, so the unit
//! sphere has `R[a][b][c][d] = δ_ac δ_bd − δ_ad δ_bc`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{QcurvError, Result};
use crate::exact_models::q_ricci_coefficient;
use crate::fit::fit_with_min;
use crate::weighted_norms::{self, ChartPoint, Sample, WeightSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GluingParams {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub coupled: bool,
}

impl GluingParams {
    /// `a = b⁴`, `λ = 1/|ln b|`.
    pub fn coupled(b: f64) -> Result<Self> {
        Self::build(b.powi(4), b, 1.0, true)
    }

    pub fn with_lambda_constant(b: f64, c: f64) -> Result<Self> {
        Self::build(b.powi(4), b, c, true)
    }

    pub fn uncoupled(a: f64, b: f64) -> Result<Self> {
        Self::build(a, b, 1.0, false)
    }

    fn build(a: f64, b: f64, c: f64, coupled: bool) -> Result<Self> {
        if !(b > 0.0 && b < 0.25) {
            return Err(QcurvError::BadInput(format!("need 0 < b < 1/4, got {b}")));
        }
        if !(a > 0.0 && a <= 1.0) || !(c > 0.0) {
            return Err(QcurvError::BadInput(format!("need 0 < a ≤ 1 and c > 0, got a={a}, c={c}")));
        }
        Ok(GluingParams { a, b, lambda: c / b.ln().abs(), coupled })
    }

    pub fn ab(&self) -> f64 {
        self.a * self.b
    }
}

/// An algebraic curvature tensor on `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    n: usize,
    r: Vec<f64>,
}

impl CurvatureTensor {
    pub fn new(n: usize, r: Vec<f64>) -> Result<Self> {
        if r.len() != n.pow(4) {
            return Err(QcurvError::BadInput(format!("{} entries for a rank-4 tensor in dimension {n}", r.len())));
        }
        let t = CurvatureTensor { n, r };
        let defect = t.symmetry_defect();
        if defect > 1e-12 * t.norm().max(1.0) {
            return Err(QcurvError::BadInput(format!("curvature symmetries violated by {defect:e}")));
        }
        Ok(t)
    }

    pub fn zero(n: usize) -> Self {
        CurvatureTensor { n, r: vec![0.0; n.pow(4)] }
    }

    /// Constant sectional curvature `κ`.
    pub fn round(n: usize, kappa: f64) -> Self {
        let id = DMatrix::identity(n, n);
        let mut t = Self::kulkarni_nomizu(&id, &id);
        t.r.iter_mut().for_each(|v| *v *= 0.5 * kappa);
        t
    }

    /// `(h ∧ k)_abcd = h_ac k_bd + h_bd k_ac − h_ad k_bc − h_bc k_ad`; for symmetric
    /// `h`, `k` this is an algebraic curvature tensor.
    pub fn kulkarni_nomizu(h: &DMatrix<f64>, k: &DMatrix<f64>) -> Self {
        let n = h.nrows();
        let mut r = vec![0.0; n.pow(4)];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        r[((a * n + b) * n + c) * n + d] = h[(a, c)] * k[(b, d)] + h[(b, d)] * k[(a, c)]
                            - h[(a, d)] * k[(b, c)]
                            - h[(b, c)] * k[(a, d)];
                    }
                }
            }
        }
        CurvatureTensor { n, r }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.n;
        self.r[((a * n + b) * n + c) * n + d]
    }

    pub fn norm(&self) -> f64 {
        self.r.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest violation of antisymmetry, pair symmetry and the first Bianchi identity.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let v = self.get(a, b, c, d);
                        worst = worst
                            .max((v + self.get(b, a, c, d)).abs())
                            .max((v + self.get(a, b, d, c)).abs())
                            .max((v - self.get(c, d, a, b)).abs())
                            .max((v + self.get(a, c, d, b) + self.get(a, d, b, c)).abs());
                    }
                }
            }
        }
        worst
    }

    /// `A_pq = R[p][k][q][l] x^k x^l`, symmetrised so rounding keeps `A = Aᵀ`.
    fn contract(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let a = DMatrix::from_fn(n, n, |p, q| {
            let mut s = 0.0;
            for k in 0..n {
                for l in 0..n {
                    s += self.get(p, k, q, l) * x[k] * x[l];
                }
            }
            s
        });
        (&a + a.transpose()) * 0.5
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeckMetric {
    pub curvature_at_p: CurvatureTensor,
    pub curvature_at_q: CurvatureTensor,
    pub mass_coefficient: f64,
    pub params: GluingParams,
}

impl NeckMetric {
    pub fn new(p: CurvatureTensor, q: CurvatureTensor, mass: f64, params: GluingParams) -> Result<Self> {
        if p.n() != q.n() {
            return Err(QcurvError::BadInput("curvature tensors of different dimensions".into()));
        }
        Ok(NeckMetric { curvature_at_p: p, curvature_at_q: q, mass_coefficient: mass, params })
    }

    /// Unit-sphere curvature at both points and `C = 1`.
    pub fn round_default(n: usize, params: GluingParams) -> Self {
        NeckMetric {
            curvature_at_p: CurvatureTensor::round(n, 1.0),
            curvature_at_q: CurvatureTensor::round(n, 1.0),
            mass_coefficient: 1.0,
            params,
        }
    }

    pub fn with_params(&self, params: GluingParams) -> Self {
        NeckMetric { params, ..self.clone() }
    }

    pub fn n(&self) -> usize {
        self.curvature_at_p.n()
    }
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// 1 for `t ≤ 1`, 0 for `t ≥ 4`, a quintic smoothstep in `ln t` between.
pub fn theta1(t: f64) -> f64 {
    if t <= 1.0 {
        return 1.0;
    }
    1.0 - smoothstep(t.ln() / 4f64.ln())
}

pub fn theta2(t: f64) -> f64 {
    1.0 - theta1(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoffs {
    pub theta1: f64,
    pub theta2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

/// All cutoffs at `|u| = r`; the θ's are evaluated at `t = r/b`.
pub fn cutoffs(r: f64, params: &GluingParams) -> Cutoffs {
    let (b, lam) = (params.b, params.lambda);
    let t = r / b;
    let gamma1 = theta1(t);
    Cutoffs {
        theta1: gamma1,
        theta2: 1.0 - gamma1,
        beta1: theta1((r / (4.0 * b)).powf(lam)),
        beta2: theta2(4.0 * t.powf(lam)),
        gamma1,
        gamma2: 1.0 - gamma1,
    }
}

fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `g_N` in inverted coordinates, with the `O(|z|⁻³)` tail dropped.
pub fn g_n_inverted(z: &[f64], neck: &NeckMetric) -> Result<DMatrix<f64>> {
    let n = neck.n();
    let r2 = sq_norm(z);
    if r2 < 1.0 {
        return Err(QcurvError::InsideUnitBall(r2.sqrt()));
    }
    let r = r2.sqrt();
    let rp = &neck.curvature_at_p;
    let a = rp.contract(z);
    let az = &a * DMatrix::from_column_slice(n, 1, z);
    let azz: f64 = (0..n).map(|i| az[i] * z[i]).sum();
    let r4 = r2 * r2;
    Ok(DMatrix::from_fn(n, n, |p, q| {
        let delta = if p == q { 1.0 } else { 0.0 };
        delta * (1.0 + neck.mass_coefficient / r) - a[(p, q)] / (3.0 * r4) + 4.0 / 3.0 * az[p] * z[q] / (r4 * r2)
            - 4.0 / 3.0 * azz * z[p] * z[q] / (r4 * r4)
    }))
}

/// `g_2` in normal coordinates at `q`, truncated after the curvature term.
pub fn g2_normal(u: &[f64], neck: &NeckMetric) -> DMatrix<f64> {
    let n = neck.n();
    let a = neck.curvature_at_q.contract(u);
    DMatrix::identity(n, n) - a / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Neck,
    Annulus,
    Far,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSample {
    pub point: Vec<f64>,
    pub region: Region,
    pub g: DMatrix<f64>,
}

pub fn region_of(r: f64, params: &GluingParams) -> Region {
    if r < params.b {
        Region::Neck
    } else if r <= 4.0 * params.b {
        Region::Annulus
    } else {
        Region::Far
    }
}

/// `g_{a,b}` in `u`-coordinates. On the neck the components are those of
/// `g_N(u/(ab))`, since `a²b² g_N = g_N(z)_{ij} du^i du^j`.
pub fn approximate_metric(u: &[f64], neck: &NeckMetric) -> Result<MetricSample> {
    let params = &neck.params;
    let r = sq_norm(u).sqrt();
    let region = region_of(r, params);
    let z: Vec<f64> = u.iter().map(|c| c / params.ab()).collect();
    let g = match region {
        Region::Neck => g_n_inverted(&z, neck)?,
        Region::Far => g2_normal(u, neck),
        Region::Annulus => {
            let n = neck.n();
            let id = DMatrix::<f64>::identity(n, n);
            let t1 = theta1(r / params.b);
            let eta1 = g_n_inverted(&z, neck)? - &id;
            let eta2 = g2_normal(u, neck) - &id;
            id + eta1 * t1 + eta2 * (1.0 - t1)
        }
    };
    Ok(MetricSample { point: u.to_vec(), region, g })
}

/// Metric components as a function of chart coordinates.
pub trait MetricSampler: Sync {
    fn dim(&self) -> usize;

    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>>;

    /// Rejects stencils of the given reach that leave the smooth piece
    /// containing `center`.
    fn check_stencil(&self, _center: &[f64], _reach: f64) -> Result<()> {
        Ok(())
    }
}

/// `g_{a,b}` in `u`-coordinates; stencils may not cross `|u| = ab, b, 4b`.
pub struct GluedChart<'a>(pub &'a NeckMetric);

impl MetricSampler for GluedChart<'_> {
    fn dim(&self) -> usize {
        self.0.n()
    }

    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(approximate_metric(x, self.0)?.g)
    }

    fn check_stencil(&self, center: &[f64], reach: f64) -> Result<()> {
        let p = &self.0.params;
        let r = sq_norm(center).sqrt();
        if [p.ab(), p.b, 4.0 * p.b].iter().any(|s| (r - s).abs() <= reach) || r < p.ab() {
            return Err(QcurvError::StencilOutOfRegion);
        }
        Ok(())
    }
}

/// `g_N` in its own inverted chart `z`.
pub struct NeckChart<'a>(pub &'a NeckMetric);

impl MetricSampler for NeckChart<'_> {
    fn dim(&self) -> usize {
        self.0.n()
    }

    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        g_n_inverted(x, self.0)
    }

    fn check_stencil(&self, center: &[f64], reach: f64) -> Result<()> {
        if sq_norm(center).sqrt() - reach <= 1.0 {
            return Err(QcurvError::StencilOutOfRegion);
        }
        Ok(())
    }
}

/// The unblended `g_2` expansion.
pub struct FarChart<'a>(pub &'a NeckMetric);

impl MetricSampler for FarChart<'_> {
    fn dim(&self) -> usize {
        self.0.n()
    }

    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(g2_normal(x, self.0))
    }
}

pub struct FlatMetric(pub usize);

impl MetricSampler for FlatMetric {
    fn dim(&self) -> usize {
        self.0
    }

    fn metric(&self, _x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(DMatrix::identity(self.0, self.0))
    }
}

/// The unit sphere in geodesic normal coordinates.
pub struct RoundSphereNormal(pub usize);

impl MetricSampler for RoundSphereNormal {
    fn dim(&self) -> usize {
        self.0
    }

    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.0;
        let r2 = sq_norm(x);
        let r = r2.sqrt();
        // s = sin²r/r², and (1 − s)/r² by series near the origin.
        let (s, w) = if r < 1e-3 {
            (1.0 - r2 / 3.0 + 2.0 * r2 * r2 / 45.0, 1.0 / 3.0 - 2.0 * r2 / 45.0)
        } else {
            let s = (r.sin() / r).powi(2);
            (s, (1.0 - s) / r2)
        };
        Ok(DMatrix::from_fn(n, n, |i, j| if i == j { s } else { 0.0 } + w * x[i] * x[j]))
    }
}

/// Round 3-sphere times hyperbolic 3-space, in stereographic and Poincaré-ball
/// coordinates: Einstein factors with `Ric = ±2g`.
pub struct SphereTimesHyperbolic;

impl MetricSampler for SphereTimesHyperbolic {
    fn dim(&self) -> usize {
        6
    }

    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let s = 4.0 / (1.0 + sq_norm(&x[..3])).powi(2);
        let h = 4.0 / (1.0 - sq_norm(&x[3..])).powi(2);
        Ok(DMatrix::from_fn(6, 6, |i, j| match (i == j, i < 3) {
            (false, _) => 0.0,
            (true, true) => s,
            (true, false) => h,
        }))
    }

    fn check_stencil(&self, center: &[f64], reach: f64) -> Result<()> {
        if sq_norm(&center[3..]).sqrt() + reach >= 1.0 {
            return Err(QcurvError::StencilOutOfRegion);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdCurvature {
    pub scalar: f64,
    pub ricci: DMatrix<f64>,
    pub ric_norm_sq: f64,
    pub lap_scalar: f64,
    pub q: f64,
}

type Stencil = Vec<(Vec<i32>, f64)>;

fn unit(n: usize, i: usize, k: i32) -> Vec<i32> {
    let mut v = vec![0; n];
    v[i] = k;
    v
}

/// Fourth-order first derivative along `i`, without the `1/h`.
fn d1_stencil(n: usize, i: usize) -> Stencil {
    vec![
        (unit(n, i, -2), 1.0 / 12.0),
        (unit(n, i, -1), -8.0 / 12.0),
        (unit(n, i, 1), 8.0 / 12.0),
        (unit(n, i, 2), -1.0 / 12.0),
    ]
}

/// Fourth-order `∂_i ∂_j`, without the `1/h²`.
fn d2_stencil(n: usize, i: usize, j: usize) -> Stencil {
    if i == j {
        return vec![
            (unit(n, i, -2), -1.0 / 12.0),
            (unit(n, i, -1), 16.0 / 12.0),
            (vec![0; n], -30.0 / 12.0),
            (unit(n, i, 1), 16.0 / 12.0),
            (unit(n, i, 2), -1.0 / 12.0),
        ];
    }
    let mut out = Vec::with_capacity(8);
    for (k, w) in [(1, 16.0 / 48.0), (2, -1.0 / 48.0)] {
        for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let mut v = vec![0; n];
            v[i] = si * k;
            v[j] = sj * k;
            out.push((v, w * (si * sj) as f64));
        }
    }
    out
}

fn shifted(p: &[i32], off: &[i32]) -> Vec<i32> {
    p.iter().zip(off).map(|(a, b)| a + b).collect()
}

struct Lattice<'s, S: MetricSampler + ?Sized> {
    sampler: &'s S,
    center: &'s [f64],
    h: f64,
    d1: Vec<Stencil>,
    d2: Vec<Vec<Stencil>>,
    g: HashMap<Vec<i32>, DMatrix<f64>>,
}

struct Geometry {
    ginv: DMatrix<f64>,
    /// `Γ^k_ij` at `[k][i*n + j]`.
    gamma: Vec<Vec<f64>>,
    ricci: DMatrix<f64>,
    scalar: f64,
}

impl<'s, S: MetricSampler + ?Sized> Lattice<'s, S> {
    fn new(sampler: &'s S, center: &'s [f64], h: f64) -> Self {
        let n = sampler.dim();
        Lattice {
            sampler,
            center,
            h,
            d1: (0..n).map(|i| d1_stencil(n, i)).collect(),
            d2: (0..n).map(|i| (0..n).map(|j| d2_stencil(n, i, j)).collect()).collect(),
            g: HashMap::new(),
        }
    }

    fn metric(&mut self, p: &[i32]) -> Result<&DMatrix<f64>> {
        if !self.g.contains_key(p) {
            let x: Vec<f64> = self.center.iter().zip(p).map(|(c, k)| c + self.h * *k as f64).collect();
            let m = self.sampler.metric(&x)?;
            self.g.insert(p.to_vec(), m);
        }
        Ok(&self.g[p])
    }

    fn apply(&mut self, p: &[i32], stencil: &Stencil, scale: f64) -> Result<DMatrix<f64>> {
        let n = self.sampler.dim();
        let mut acc = DMatrix::zeros(n, n);
        for (off, w) in stencil {
            acc += self.metric(&shifted(p, off))? * (*w);
        }
        Ok(acc * scale)
    }

    fn geometry(&mut self, p: &[i32]) -> Result<Geometry> {
        let n = self.sampler.dim();
        let h = self.h;
        let g = self.metric(p)?.clone();
        let ginv = g.clone().try_inverse().ok_or_else(|| QcurvError::BadInput("singular metric sample".into()))?;
        let d1s = self.d1.clone();
        let dg: Vec<DMatrix<f64>> = d1s.iter().map(|s| self.apply(p, s, 1.0 / h)).collect::<Result<_>>()?;
        let d2s = self.d2.clone();
        let mut ddg = vec![DMatrix::zeros(n, n); n * n];
        for m in 0..n {
            for l in m..n {
                let v = self.apply(p, &d2s[m][l], 1.0 / (h * h))?;
                ddg[l * n + m] = v.clone();
                ddg[m * n + l] = v;
            }
        }
        // T_lij = ∂_i g_jl + ∂_j g_il − ∂_l g_ij, and its derivatives.
        let t = |l: usize, i: usize, j: usize| dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)];
        let dt = |m: usize, l: usize, i: usize, j: usize| {
            ddg[m * n + i][(j, l)] + ddg[m * n + j][(i, l)] - ddg[m * n + l][(i, j)]
        };
        let dginv: Vec<DMatrix<f64>> = dg.iter().map(|d| -(&ginv * d * &ginv)).collect();
        let mut gamma = vec![vec![0.0; n * n]; n];
        // dgamma[m][k][i*n+j] = ∂_m Γ^k_ij
        let mut dgamma = vec![vec![vec![0.0; n * n]; n]; n];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += ginv[(k, l)] * t(l, i, j);
                    }
                    gamma[k][i * n + j] = 0.5 * s;
                    gamma[k][j * n + i] = 0.5 * s;
                    for m in 0..n {
                        let mut s = 0.0;
                        for l in 0..n {
                            s += dginv[m][(k, l)] * t(l, i, j) + ginv[(k, l)] * dt(m, l, i, j);
                        }
                        dgamma[m][k][i * n + j] = 0.5 * s;
                        dgamma[m][k][j * n + i] = 0.5 * s;
                    }
                }
            }
        }
        // Ric_jk = ∂_i Γ^i_jk − ∂_j Γ^i_ik + Γ^i_im Γ^m_jk − Γ^i_jm Γ^m_ik
        let mut ricci = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in j..n {
                let mut s = 0.0;
                for i in 0..n {
                    s += dgamma[i][i][j * n + k] - dgamma[j][i][i * n + k];
                    for m in 0..n {
                        s += gamma[i][i * n + m] * gamma[m][j * n + k] - gamma[i][j * n + m] * gamma[m][i * n + k];
                    }
                }
                ricci[(j, k)] = s;
                ricci[(k, j)] = s;
            }
        }
        let scalar = ginv.component_mul(&ricci).sum();
        Ok(Geometry { ginv, gamma, ricci, scalar })
    }
}

/// Largest distance from the centre reached by the nested stencils, in units of `h`.
const STENCIL_REACH: f64 = 4.0 * std::f64::consts::SQRT_2;

/// `R`, `Ric`, `|Ric|²`, `ΔR` and `Q` at `point`, with lattice spacing `h`.
/// `ΔR` differences the scalar curvature of the neighbouring lattice points.
pub fn fd_curvature<S: MetricSampler + ?Sized>(sampler: &S, point: &[f64], h: f64) -> Result<FdCurvature> {
    let n = sampler.dim();
    if point.len() != n || !(h > 0.0) {
        return Err(QcurvError::BadInput(format!("point of length {} in dimension {n}, h = {h}", point.len())));
    }
    if n < 5 {
        return Err(QcurvError::DimensionTooLow { n, min: 5 });
    }
    sampler.check_stencil(point, STENCIL_REACH * h * (1.0 + 1e-12))?;
    let mut lat = Lattice::new(sampler, point, h);
    let origin = vec![0; n];
    let centre = lat.geometry(&origin)?;
    let mut scalars: HashMap<Vec<i32>, f64> = HashMap::new();
    scalars.insert(origin.clone(), centre.scalar);
    let mut scalar_at = |lat: &mut Lattice<S>, p: Vec<i32>| -> Result<f64> {
        if let Some(v) = scalars.get(&p) {
            return Ok(*v);
        }
        let v = lat.geometry(&p)?.scalar;
        scalars.insert(p, v);
        Ok(v)
    };
    let mut grad = vec![0.0; n];
    for (i, gi) in grad.iter_mut().enumerate() {
        for (off, w) in d1_stencil(n, i) {
            *gi += w * scalar_at(&mut lat, off)? / h;
        }
    }
    let mut lap = 0.0;
    for i in 0..n {
        for j in 0..n {
            let gij = centre.ginv[(i, j)];
            if gij == 0.0 {
                continue;
            }
            let mut hess = 0.0;
            for (off, w) in d2_stencil(n, i, j) {
                hess += w * scalar_at(&mut lat, off)? / (h * h);
            }
            let conn: f64 = (0..n).map(|k| centre.gamma[k][i * n + j] * grad[k]).sum();
            lap += gij * (hess - conn);
        }
    }
    let ric_up = &centre.ginv * &centre.ricci * &centre.ginv;
    let ric_norm_sq = ric_up.component_mul(&centre.ricci).sum();
    let q = q_from_ricci(n, centre.scalar, ric_norm_sq, lap);
    Ok(FdCurvature { scalar: centre.scalar, ricci: centre.ricci, ric_norm_sq, lap_scalar: lap, q })
}

/// `Q = −ΔR/(2(n−1)) + a_n R² − 2|Ric|²/(n−2)²`.
pub fn q_from_ricci(n: usize, scalar: f64, ric_norm_sq: f64, lap_scalar: f64) -> f64 {
    let nf = n as f64;
    let an = q_ricci_coefficient(n).to_f64().unwrap_or(f64::NAN);
    -lap_scalar / (2.0 * (nf - 1.0)) + an * scalar * scalar - 2.0 * ric_norm_sq / ((nf - 2.0) * (nf - 2.0))
}

/// Largest entry of the first and second coordinate derivatives of the metric.
pub fn metric_derivative_sup<S: MetricSampler + ?Sized>(sampler: &S, point: &[f64], h: f64) -> Result<(f64, f64)> {
    let n = sampler.dim();
    sampler.check_stencil(point, 2.0 * std::f64::consts::SQRT_2 * h * (1.0 + 1e-12))?;
    let mut lat = Lattice::new(sampler, point, h);
    let origin = vec![0; n];
    let (mut d1, mut d2) = (0.0f64, 0.0f64);
    for i in 0..n {
        d1 = d1.max(lat.apply(&origin, &d1_stencil(n, i), 1.0 / h)?.amax());
        for j in i..n {
            d2 = d2.max(lat.apply(&origin, &d2_stencil(n, i, j), 1.0 / (h * h))?.amax());
        }
    }
    Ok((d1, d2))
}

/// Step used for a point at radius `r`.
pub fn default_step(r: f64) -> f64 {
    r / 64.0
}

/// Step for `ν = Q_{g_2}`, which varies on the unit scale.
pub const NU_STEP: f64 = 1e-2;

pub fn default_b_list() -> Vec<f64> {
    (5..=9).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub b: f64,
    pub phi_d1: f64,
    pub phi_d2: f64,
    pub q_annulus: f64,
    pub q_weighted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSlopes {
    pub phi_d1: f64,
    pub phi_d2: f64,
    pub q_annulus: f64,
    pub q_weighted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSweep {
    pub delta: f64,
    pub rows: Vec<SweepRow>,
    pub slopes: SweepSlopes,
    /// `sup |Q_{g_N}|` over the sampled inverted chart; zero for the exact
    /// metric, nonzero here because of the truncated tail.
    pub neck_q_sup: f64,
}

impl ScalingSweep {
    /// Long format: `(b, quantity, value)`.
    pub fn long_rows(&self) -> Vec<(f64, &'static str, f64)> {
        self.rows
            .iter()
            .flat_map(|r| {
                [
                    (r.b, "phi_d1", r.phi_d1),
                    (r.b, "phi_d2", r.phi_d2),
                    (r.b, "q_annulus", r.q_annulus),
                    (r.b, "q_weighted", r.q_weighted),
                ]
            })
            .collect()
    }
}

const ANNULUS_RADII: usize = 24;
const NECK_RADII_PER_DECADE: usize = 4;

fn directions(n: usize) -> Vec<Vec<f64>> {
    let e1 = unit(n, 0, 1).into_iter().map(f64::from).collect::<Vec<_>>();
    let diag: Vec<f64> = (0..n).map(|i| if i < 2 { 0.5f64.sqrt() } else { 0.0 }).collect();
    let generic: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * i as f64).collect();
    let gn = sq_norm(&generic).sqrt();
    vec![e1, diag, generic.iter().map(|v| v / gn).collect()]
}

fn geometric(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    (0..m).map(|i| lo * (hi / lo).powf(i as f64 / (m - 1).max(1) as f64)).collect()
}

fn along(dir: &[f64], r: f64) -> Vec<f64> {
    dir.iter().map(|c| c * r).collect()
}

/// Sweeps `b` with `a = b⁴`, recording annulus sups of `|∂φ|`, `|∂²φ|`,
/// `|Q_{g_{a,b}}|` and the weighted norm `‖Q − ν‖_{C⁰_{δ−4}}` with
/// `ν = Q_{g_2}` pointwise, then fits log-log slopes against `b`.
pub fn scaling_sweep(neck: &NeckMetric, b_list: &[f64], delta: f64) -> Result<ScalingSweep> {
    if b_list.len() < 2 {
        return Err(QcurvError::BadInput("sweep needs at least two values of b".into()));
    }
    let n = neck.n();
    let dirs = directions(n);
    let max_inv_a = b_list.iter().map(|b| b.powi(-4)).fold(0.0, f64::max);
    // Q_{g_N} does not depend on (a, b); sample it once.
    let decades = (0.9 * max_inv_a / 1.2).log10();
    let neck_radii = geometric(1.2, 0.9 * max_inv_a, (decades * NECK_RADII_PER_DECADE as f64).ceil() as usize + 1);
    let neck_chart = NeckChart(neck);
    let neck_q: Vec<(Vec<f64>, f64)> = neck_radii
        .par_iter()
        .map(|&r| {
            let z = along(&dirs[2], r);
            let q = fd_curvature(&neck_chart, &z, default_step(r))?.q;
            Ok((z, q))
        })
        .collect::<Result<_>>()?;
    let neck_q_sup = neck_q.iter().map(|(_, q)| q.abs()).fold(0.0, f64::max);

    let rows = b_list.iter().map(|&b| sweep_row(neck, b, delta, &dirs, &neck_q)).collect::<Result<Vec<_>>>()?;
    let bs: Vec<f64> = rows.iter().map(|r| r.b).collect();
    let slope = |f: fn(&SweepRow) -> f64| -> Result<f64> {
        let ys: Vec<f64> = rows.iter().map(f).collect();
        Ok(fit_with_min(&bs, &ys, f64::MIN_POSITIVE, f64::INFINITY, 2)?.slope)
    };
    let slopes = SweepSlopes {
        phi_d1: slope(|r| r.phi_d1)?,
        phi_d2: slope(|r| r.phi_d2)?,
        q_annulus: slope(|r| r.q_annulus)?,
        q_weighted: slope(|r| r.q_weighted)?,
    };
    Ok(ScalingSweep { delta, rows, slopes, neck_q_sup })
}

fn sweep_row(
    template: &NeckMetric,
    b: f64,
    delta: f64,
    dirs: &[Vec<f64>],
    neck_q: &[(Vec<f64>, f64)],
) -> Result<SweepRow> {
    let params = GluingParams::coupled(b)?;
    let neck = template.with_params(params);
    let glued = GluedChart(&neck);
    let far = FarChart(&neck);
    let ab = params.ab();
    let nu = |u: &[f64]| fd_curvature(&far, u, NU_STEP).map(|c| c.q);

    let annulus: Vec<Vec<f64>> = geometric(1.15 * b, 3.5 * b, ANNULUS_RADII)
        .into_iter()
        .flat_map(|r| dirs.iter().map(move |d| along(d, r)))
        .collect();
    struct AnnulusPoint {
        u: Vec<f64>,
        d1: f64,
        d2: f64,
        q: f64,
        nu: f64,
    }
    let ann: Vec<AnnulusPoint> = annulus
        .into_par_iter()
        .map(|u| {
            let h = default_step(sq_norm(&u).sqrt());
            let (d1, d2) = metric_derivative_sup(&glued, &u, h)?;
            let q = fd_curvature(&glued, &u, h)?.q;
            let nu = nu(&u)?;
            Ok(AnnulusPoint { u, d1, d2, q, nu })
        })
        .collect::<Result<_>>()?;

    // Far region: g_{a,b} = g_2 identically, evaluated with a common step.
    let far_pts: Vec<Vec<f64>> =
        geometric((8.0 * b).max(0.1), 0.45, 6).into_iter().map(|r| along(&dirs[2], r)).collect();
    let far_vals: Vec<f64> =
        far_pts.par_iter().map(|u| Ok(fd_curvature(&glued, u, NU_STEP)?.q - nu(u)?)).collect::<Result<_>>()?;

    let neck_vals: Vec<f64> = neck_q
        .par_iter()
        .map(|(z, qn)| {
            if sq_norm(z).sqrt() * (1.0 + STENCIL_REACH / 64.0) >= 1.0 / params.a {
                return Ok(f64::NAN);
            }
            let u: Vec<f64> = z.iter().map(|c| c * ab).collect();
            Ok(qn / ab.powi(4) - nu(&u)?)
        })
        .collect::<Result<_>>()?;

    let mut samples: Vec<Sample> = Vec::new();
    for p in &ann {
        samples.push(Sample::scalar(ChartPoint::Far(p.u.clone()), p.q - p.nu));
    }
    for (u, v) in far_pts.iter().zip(&far_vals) {
        samples.push(Sample::scalar(ChartPoint::Far(u.clone()), *v));
    }
    for ((z, _), v) in neck_q.iter().zip(&neck_vals) {
        if v.is_finite() {
            samples.push(Sample::scalar(ChartPoint::Neck(z.clone()), *v));
        }
    }
    let spec = WeightSpec::glued(params.a, b)?;
    let q_weighted = weighted_norms::weighted_sup_norm(&samples, &spec, delta - 4.0, 0)?.value;
    let sup = |f: fn(&AnnulusPoint) -> f64| ann.iter().map(f).fold(0.0, f64::max);
    Ok(SweepRow { b, phi_d1: sup(|p| p.d1), phi_d2: sup(|p| p.d2), q_annulus: sup(|p| p.q.abs()), q_weighted })
}

//! Radial Green's function of the round-sphere Paneitz operator, built from
//! two Helmholtz solves: `(−Δ + c1) F = 0` away from the pole and
//! `(−Δ + c2) G = F`, with `F ~ 2(n−4) r^{2−n}` and `G ~ r^{4−n}` at `r → 0`.
//!
//! Each integration runs in the direction in which the wanted solution
//! dominates: antipode-regular solutions inward, pole-regular ones outward.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix2, Vector2};

use crate::error::{QcurvError, Result};
use crate::fit::fit_power_law;
use crate::ode::{integrate, Tolerance};

pub const GRID_POINTS: usize = 400;
pub const R_MIN: f64 = 1e-4;
/// Where the antipodal series hands over to the integrator.
const S_START: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    n: usize,
    r: Vec<f64>,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(n: usize, r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if r.len() != values.len() || r.is_empty() {
            return Err(QcurvError::BadInput("radii and values must pair up".into()));
        }
        if r[0] <= 0.0 || r.windows(2).any(|w| w[1] <= w[0]) || *r.last().unwrap() > PI {
            return Err(QcurvError::BadInput("radii must increase inside (0, π]".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(QcurvError::BadInput("non-finite profile value".into()));
        }
        Ok(RadialProfile { n, r, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> (f64, f64) {
        self.r
            .iter()
            .zip(&self.values)
            .fold((f64::NAN, f64::INFINITY), |acc, (r, v)| if *v < acc.1 { (*r, *v) } else { acc })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Length of the initial run on which the samples strictly decrease.
    pub fn decreasing_prefix(&self) -> usize {
        1 + self.values.windows(2).take_while(|w| w[1] < w[0]).count()
    }

    /// `values − r^{4−n}`, the part beyond the normalised leading term.
    pub fn subleading(&self) -> RadialProfile {
        let m = 4.0 - self.n as f64;
        let values = self.r.iter().zip(&self.values).map(|(r, v)| v - r.powf(m)).collect();
        RadialProfile { n: self.n, r: self.r.clone(), values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticFit {
    pub window: (f64, f64),
    pub slope: f64,
    pub leading_constant: f64,
    pub residual: f64,
}

impl AsymptoticFit {
    pub fn is_meaningful(&self) -> bool {
        self.residual < 1e-2
    }
}

pub fn fit_leading_exponent(profile: &RadialProfile, window: (f64, f64)) -> Result<AsymptoticFit> {
    let f = fit_power_law(&profile.r, &profile.values, window.0, window.1)?;
    Ok(AsymptoticFit { window, slope: f.slope, leading_constant: f.constant, residual: f.residual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenPair {
    pub c1: f64,
    pub c2: f64,
    pub f: RadialProfile,
    pub g: RadialProfile,
}

/// 400 log-spaced radii from `10⁻⁴` to `π`.
pub fn output_grid() -> Vec<f64> {
    let span = (PI / R_MIN).ln();
    let mut r: Vec<f64> =
        (0..GRID_POINTS).map(|i| R_MIN * (span * i as f64 / (GRID_POINTS - 1) as f64).exp()).collect();
    r[GRID_POINTS - 1] = PI;
    r
}

pub fn helmholtz_constants(n: usize) -> (f64, f64) {
    let nf = n as f64;
    ((nf * nf - 2.0 * nf - 8.0) / 4.0, (nf * nf - 2.0 * nf) / 4.0)
}

/// Coefficients `(f0, f2, f4)` of the even solution of `Δf = c f` near a
/// point where `Δ = ∂² + (n−1) cot(x) ∂`.
fn regular_series(n: f64, c: f64, f0: f64) -> [f64; 3] {
    let f2 = c * f0 / (2.0 * n);
    let f4 = (c * f2 + 2.0 * (n - 1.0) * f2 / 3.0) / (4.0 * (n + 2.0));
    [f0, f2, f4]
}

fn eval_even(c: [f64; 3], x: f64) -> (f64, f64) {
    let x2 = x * x;
    (c[0] + c[1] * x2 + c[2] * x2 * x2, 2.0 * c[1] * x + 4.0 * c[2] * x * x2)
}

/// `2(n−4) r^{2−n}(1 + a1 r²)`, the singular solution of `Δf = c f` to the
/// order needed at `r = 10⁻⁴`, with its derivative.
fn singular_series(n: f64, c: f64, r: f64) -> (f64, f64) {
    let a1 = (c - (n - 1.0) * (n - 2.0) / 3.0) / (2.0 * (4.0 - n));
    let (k, m) = (2.0 * (n - 4.0), 2.0 - n);
    let v = k * r.powf(m) * (1.0 + a1 * r * r);
    let d = k * (m * r.powf(m - 1.0) + a1 * (m + 2.0) * r.powf(m + 1.0));
    (v, d)
}

fn tol() -> Tolerance {
    Tolerance { rtol: 1e-13, atol: 1e-300 }
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

/// A radial solution sampled on the output grid: values and `∂_r`.
struct Sampled {
    v: Vec<f64>,
    d: Vec<f64>,
}

/// Solution of `Δf = c f` with `f(π) = 1`, integrated from the antipode in
/// towards the pole. The singular mode grows in that direction, so the
/// integration is stable; outward from the pole the regular mode would swamp
/// it by a factor of order `r₀^{2−n}`.
fn from_antipode(n: f64, c: f64, r: &[f64]) -> Result<Sampled> {
    let ser = regular_series(n, c, 1.0);
    // In s = π − r the equation keeps its form; state (f, ∂_s f).
    let rhs_s = |x: f64, y: &[f64; 2]| [y[1], c * y[0] - (n - 1.0) * cot(x) * y[1]];
    let mut s_targets: Vec<f64> = r.iter().filter(|x| **x > FRAC_PI_2 && **x < PI).map(|x| PI - x).collect();
    s_targets.reverse();
    let n_right = s_targets.len();
    s_targets.push(FRAC_PI_2);
    let (v0, d0) = eval_even(ser, S_START);
    let right = integrate(rhs_s, S_START, [v0, d0], &s_targets, tol())?;
    let mid = right[n_right];
    // Then x = −r, state (f, ∂_r f), so the abscissa increases.
    let rhs_x = |x: f64, y: &[f64; 2]| [-y[1], -(c * y[0] - (n - 1.0) * cot(-x) * y[1])];
    let x_targets: Vec<f64> = r.iter().filter(|x| **x <= FRAC_PI_2).rev().map(|x| -x).collect();
    let left = integrate(rhs_x, -FRAC_PI_2, [mid[0], -mid[1]], &x_targets, tol())?;

    let mut v = Vec::with_capacity(r.len());
    let mut d = Vec::with_capacity(r.len());
    for y in left.iter().rev() {
        v.push(y[0]);
        d.push(y[1]);
    }
    for y in right[..n_right].iter().rev() {
        v.push(y[0]);
        d.push(-y[1]);
    }
    if r.last() == Some(&PI) {
        v.push(1.0);
        d.push(0.0);
    }
    Ok(Sampled { v, d })
}

/// Scale taking the antipode-regular solution to `F ~ 2(n−4) r^{2−n}`: the
/// state at the first node is split into singular and regular series.
fn pole_normalisation(n: f64, c: f64, r0: f64, v: f64, d: f64) -> Result<f64> {
    let (sv, sd) = singular_series(n, c, r0);
    let (rv, rd) = eval_even(regular_series(n, c, 1.0), r0);
    let alpha = Matrix2::new(sv, rv, sd, rd)
        .lu()
        .solve(&Vector2::new(v, d))
        .ok_or_else(|| QcurvError::ShootingFailure("degenerate pole basis".into()))?[0];
    if !alpha.is_finite() || alpha == 0.0 {
        return Err(QcurvError::ShootingFailure("antipodal solution is regular at the pole".into()));
    }
    Ok(1.0 / alpha)
}

fn helmholtz_sampled(c: f64, n: usize, r: &[f64]) -> Result<Sampled> {
    let nf = n as f64;
    let mut f = from_antipode(nf, c, r)?;
    let scale = pole_normalisation(nf, c, r[0], f.v[0], f.d[0])?;
    f.v.iter_mut().chain(f.d.iter_mut()).for_each(|x| *x *= scale);
    Ok(f)
}

/// `F` with `(−Δ + c) F = 0` on `(0, π)`, regular at `π`, normalised so that
/// `F r^{n−2} → 2(n−4)` at the pole.
pub fn helmholtz_radial_green(c: f64, n: usize) -> Result<RadialProfile> {
    if n < 5 {
        return Err(QcurvError::DimensionTooLow { n, min: 5 });
    }
    if c <= 0.0 {
        return Err(QcurvError::NonPositiveOperator(c));
    }
    let r = output_grid();
    let f = helmholtz_sampled(c, n, &r)?;
    RadialProfile::new(n, r, f.v)
}

/// `F` and `G` for `P = (−Δ + c1)(−Δ + c2)` on the round `S^n`, with
/// `G = r^{4−n} + o(r^{4−n})`.
///
/// By partial fractions `G = (F₁ − F₂)/(c2 − c1)` with `F_i` the normalised
/// Green's function of `−Δ + c_i`. Near the pole that difference cancels the
/// `r^{2−n}` terms and loses about `10⁻¹²/r²` in relative accuracy, so for
/// `r ≤ 1` the profile comes instead from the Frobenius expansion
/// `G = G_s + β R_p + γ R₂`, whose two free coefficients are read off at
/// `r ≈ 1`.
pub fn paneitz_green_pair(n: usize) -> Result<GreenPair> {
    if n < 6 {
        return Err(QcurvError::DimensionTooLow { n, min: 6 });
    }
    let (c1, c2) = helmholtz_constants(n);
    let r = output_grid();
    let f1 = helmholtz_sampled(c1, n, &r)?.v;
    let f2 = helmholtz_sampled(c2, n, &r)?.v;
    let mut g: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| (a - b) / (c2 - c1)).collect();

    let local = frobenius::PoleBasis::new(n, c1, c2);
    let im = r.iter().position(|x| *x >= MATCH_RADIUS).unwrap_or(r.len() - 1);
    let rm = r[im];
    let beta = (f1[im] - local.f_sing.eval(rm)) / local.reg1.eval(rm);
    let gamma = (g[im] - local.g_sing.eval(rm) - beta * local.reg_part.eval(rm)) / local.reg2.eval(rm);
    for (gi, &x) in g.iter_mut().zip(&r).take(im) {
        *gi = local.g_sing.eval(x) + beta * local.reg_part.eval(x) + gamma * local.reg2.eval(x);
    }
    Ok(GreenPair { c1, c2, f: RadialProfile::new(n, r.clone(), f1)?, g: RadialProfile::new(n, r, g)? })
}

const MATCH_RADIUS: f64 = 1.0;

/// Pole expansions `Σ a_j r^{p_j} + ln r Σ l_j r^{p_j}`, `p_j = base + 2j`,
/// for the radial Helmholtz operators of the round sphere.
mod frobenius {
    const TERMS: usize = 48;

    pub(super) struct Series {
        base: i32,
        a: Vec<f64>,
        l: Vec<f64>,
    }

    impl Series {
        pub(super) fn eval(&self, r: f64) -> f64 {
            let (r2, ln) = (r * r, r.ln());
            let mut pw = r.powi(self.base);
            let mut acc = 0.0;
            for (a, l) in self.a.iter().zip(&self.l) {
                acc += (a + l * ln) * pw;
                pw *= r2;
            }
            acc
        }

        fn shifted_up(&self) -> Series {
            // Same function written on the lattice starting two powers lower.
            let mut a = vec![0.0];
            a.extend_from_slice(&self.a[..TERMS - 1]);
            let mut l = vec![0.0];
            l.extend_from_slice(&self.l[..TERMS - 1]);
            Series { base: self.base - 2, a, l }
        }
    }

    /// `κ_k` with `cot x = 1/x + Σ_{k≥1} κ_k x^{2k−1}`, from `x cot x = (x cos x)/(sin x)`.
    fn cot_coeffs() -> Vec<f64> {
        let mut fact = vec![1.0f64; 2 * TERMS + 2];
        for i in 1..fact.len() {
            fact[i] = fact[i - 1] * i as f64;
        }
        let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
        let cs: Vec<f64> = (0..TERMS).map(|k| sign(k) / fact[2 * k]).collect();
        let sn: Vec<f64> = (0..TERMS).map(|k| sign(k) / fact[2 * k + 1]).collect();
        let mut c = vec![0.0; TERMS];
        for k in 0..TERMS {
            c[k] = cs[k] - (1..=k).map(|i| sn[i] * c[k - i]).sum::<f64>();
        }
        c
    }

    /// Solves `(Δ − c) f = t` term by term, where `t` lives on the lattice
    /// two powers below `f`. At the resonant power the free coefficient takes
    /// `lead` (when it is the first) or zero, and a log term absorbs the rest.
    fn solve(n: f64, c: f64, base: i32, t: &Series, lead: f64, kappa: &[f64]) -> Series {
        debug_assert_eq!(t.base, base - 2);
        let mut a = vec![0.0; TERMS];
        let mut l = vec![0.0; TERMS];
        for j in 0..TERMS {
            let p = |i: usize| (base + 2 * i as i32) as f64;
            let pj = p(j);
            let d = pj * (pj + n - 2.0);
            let mut rest_l = 0.0;
            let mut rest_a = 0.0;
            for i in 0..j {
                let kk = kappa[j - i];
                rest_l += l[i] * (n - 1.0) * p(i) * kk;
                rest_a += a[i] * (n - 1.0) * p(i) * kk + l[i] * (n - 1.0) * kk;
            }
            if j > 0 {
                rest_l -= c * l[j - 1];
                rest_a -= c * a[j - 1];
            }
            if d.abs() > 1e-9 {
                l[j] = (t.l[j] - rest_l) / d;
                a[j] = (t.a[j] - rest_a - l[j] * (2.0 * pj + n - 2.0)) / d;
            } else {
                a[j] = if j == 0 { lead } else { 0.0 };
                l[j] = (t.a[j] - rest_a) / (2.0 * pj + n - 2.0);
            }
        }
        Series { base, a, l }
    }

    pub(super) struct PoleBasis {
        /// `2(n−4) r^{2−n} + …`, homogeneous for `c1`.
        pub f_sing: Series,
        /// `r^{4−n} + …` with `(−Δ + c2) g_sing = f_sing`.
        pub g_sing: Series,
        /// Regular, `1 + …`, homogeneous for `c1`.
        pub reg1: Series,
        /// Regular, `1 + …`, homogeneous for `c2`.
        pub reg2: Series,
        /// Regular, `O(r²)`, with `(−Δ + c2) reg_part = reg1`.
        pub reg_part: Series,
    }

    impl PoleBasis {
        pub(super) fn new(n: usize, c1: f64, c2: f64) -> Self {
            let nf = n as f64;
            let kappa = cot_coeffs();
            let zero = |base: i32| Series { base, a: vec![0.0; TERMS], l: vec![0.0; TERMS] };
            let neg = |s: &Series| Series {
                base: s.base,
                a: s.a.iter().map(|x| -x).collect(),
                l: s.l.iter().map(|x| -x).collect(),
            };
            let sb = 2 - n as i32;
            let f_sing = solve(nf, c1, sb, &zero(sb - 2), 2.0 * (nf - 4.0), &kappa);
            let g_sing = solve(nf, c2, sb + 2, &neg(&f_sing), 0.0, &kappa);
            let reg1 = solve(nf, c1, 0, &zero(-2), 1.0, &kappa);
            let reg2 = solve(nf, c2, 0, &zero(-2), 1.0, &kappa);
            let reg_part = solve(nf, c2, 0, &neg(&reg1).shifted_up(), 0.0, &kappa);
            PoleBasis { f_sing, g_sing, reg1, reg2, reg_part }
        }
    }

}

pub fn paneitz_radial_green(n: usize) -> Result<RadialProfile> {
    Ok(paneitz_green_pair(n)?.g)
}

const D1: [f64; 7] = [-1.0 / 60.0, 9.0 / 60.0, -45.0 / 60.0, 0.0, 45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0];
const D2: [f64; 7] =
    [2.0 / 180.0, -27.0 / 180.0, 270.0 / 180.0, -490.0 / 180.0, 270.0 / 180.0, -27.0 / 180.0, 2.0 / 180.0];

/// `(−Δ + c) v` at samples `3..len−3` of a log-uniform radial grid, using
/// sixth-order central differences in `s = ln r`.
fn apply_helmholtz_fd(n: usize, c: f64, r: &[f64], v: &[f64]) -> Vec<f64> {
    let nf = n as f64;
    let ds = (r[r.len() - 1] / r[0]).ln() / (r.len() - 1) as f64;
    (3..r.len() - 3)
        .map(|i| {
            let stencil = |w: &[f64; 7]| (0..7).map(|k| w[k] * v[i + k - 3]).sum::<f64>();
            let (vs, vss) = (stencil(&D1) / ds, stencil(&D2) / (ds * ds));
            // ∂_r = r⁻¹ ∂_s and ∂_r² = r⁻² (∂_s² − ∂_s).
            let (d1, d2) = (vs / r[i], (vss - vs) / (r[i] * r[i]));
            -(d2 + (nf - 1.0) * cot(r[i]) * d1) + c * v[i]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorCheck {
    /// `max |(−Δ+c1)(−Δ+c2) G|` over samples in `[0.1, π − 0.1]`.
    pub max_abs: f64,
    pub max_abs_g: f64,
    pub window_max_g: f64,
}

impl OperatorCheck {
    pub fn relative(&self) -> f64 {
        self.max_abs / self.max_abs_g
    }
}

/// Finite-difference application of `P` to `G` on its own radial grid.
/// The grid is log-uniform up to the rounding of its last node onto `π`,
/// which lies outside the window checked here.
pub fn operator_check(pair: &GreenPair) -> OperatorCheck {
    let g = &pair.g;
    let n = g.n();
    let r = g.r();
    let inner = apply_helmholtz_fd(n, pair.c2, r, g.values());
    let inner_r = &r[3..r.len() - 3];
    let outer = apply_helmholtz_fd(n, pair.c1, inner_r, &inner);
    let outer_r = &inner_r[3..inner_r.len() - 3];
    let in_window = |x: &f64| *x >= 0.1 && *x <= PI - 0.1;
    let max_abs = outer_r.iter().zip(&outer).filter(|(x, _)| in_window(x)).fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    let window_max_g = r.iter().zip(g.values()).filter(|(x, _)| in_window(x)).fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    OperatorCheck { max_abs, max_abs_g: g.max_abs(), window_max_g }
}

/// `r^{n−2} P(r^{4−n})` at `r = 10⁻³`, which approximates the coefficient of
/// `r^{2−n}` in `P(r^{4−n})` to `O(r²)`. Derivatives are taken in closed form;
/// differencing would drown in cancellation this close to the pole.
pub fn leading_image_coefficient(n: usize) -> f64 {
    let nf = n as f64;
    let (c1, c2) = helmholtz_constants(n);
    let m = 4.0 - nf;
    let r: f64 = 1e-3;
    let (ct, csc2) = (cot(r), 1.0 + cot(r).powi(2));
    // inner = A r^{m−2} + B cot(r) r^{m−1} + c2 r^m = (−Δ + c2) r^m.
    let (a, b) = (-m * (m - 1.0), -(nf - 1.0) * m);
    let pw = |p: f64, k: u32| -> f64 { (0..k).map(|i| p - i as f64).product::<f64>() * r.powf(p - k as f64) };
    let cot_d = [ct, -csc2, 2.0 * ct * csc2];
    let inner = |k: u32| -> f64 {
        let prod: f64 = match k {
            0 => cot_d[0] * pw(m - 1.0, 0),
            1 => cot_d[1] * pw(m - 1.0, 0) + cot_d[0] * pw(m - 1.0, 1),
            _ => cot_d[2] * pw(m - 1.0, 0) + 2.0 * cot_d[1] * pw(m - 1.0, 1) + cot_d[0] * pw(m - 1.0, 2),
        };
        a * pw(m - 2.0, k) + b * prod + c2 * pw(m, k)
    };
    (-(inner(2) + (nf - 1.0) * ct * inner(1)) + c1 * inner(0)) * r.powf(nf - 2.0)
}

/// Max relative deviation from `2(n−4) r^{2−n}` of the flat radial
/// Laplacian's solution started from that data at `r = 1` and integrated in
/// to `10⁻⁴`. Inward, the singular mode dominates, so relative accuracy is
/// not swamped by the constant mode the way it is outward from the pole.
pub fn flat_harmonic_residual(n: usize) -> Result<f64> {
    if n < 5 {
        return Err(QcurvError::DimensionTooLow { n, min: 5 });
    }
    let nf = n as f64;
    let k = 2.0 * (nf - 4.0);
    let exact = |r: f64| k * r.powf(2.0 - nf);
    // x = −r, state (y, ∂_r y).
    let targets: Vec<f64> = output_grid().into_iter().filter(|r| *r < 1.0).rev().map(|r| -r).collect();
    let y0 = [k, k * (2.0 - nf)];
    let ys = integrate(|x, y: &[f64; 2]| [-y[1], -(nf - 1.0) / x * y[1]], -1.0, y0, &targets, tol())?;
    Ok(targets.iter().zip(&ys).map(|(x, y)| (y[0] / exact(-x) - 1.0).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let r = output_grid();
        assert_eq!(r.len(), 400);
        assert_eq!(r[0], 1e-4);
        assert_eq!(r[399], PI);
        assert!(r.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn helmholtz_rejects_nonpositive() {
        assert_eq!(helmholtz_radial_green(0.0, 6).unwrap_err(), QcurvError::NonPositiveOperator(0.0));
    }

    #[test]
    fn flat_sanity() {
        for n in 5..=9 {
            assert!(flat_harmonic_residual(n).unwrap() < 1e-8);
        }
    }

    #[test]
    fn f_positive_and_normalised_at_six() {
        let f = helmholtz_radial_green(4.0, 6).unwrap();
        assert!(f.values().iter().all(|v| *v > 0.0));
        for (r, v) in f.r().iter().zip(f.values()) {
            if (1e-3..=1e-2).contains(r) {
                assert!((v * r.powi(4) / 4.0 - 1.0).abs() < 1e-2);
            }
        }
    }

    #[test]
    fn pair_reproduces_standalone_f() {
        let pair = paneitz_green_pair(7).unwrap();
        let f = helmholtz_radial_green(pair.c1, 7).unwrap();
        for (a, b) in pair.f.values().iter().zip(f.values()) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }

    fn chordal(r: f64) -> f64 {
        2.0 * (r / 2.0).sin()
    }

    #[test]
    fn conformal_laplacian_green_is_chordal_power() {
        // −Δ + n(n−2)/4 is the conformal Laplacian of S^n; its Green's
        // function is a multiple of the chordal distance to the power 2 − n.
        for n in [5usize, 6, 9] {
            let nf = n as f64;
            let f = helmholtz_radial_green(nf * (nf - 2.0) / 4.0, n).unwrap();
            for (r, v) in f.r().iter().zip(f.values()) {
                let exact = 2.0 * (nf - 4.0) * chordal(*r).powf(2.0 - nf);
                assert!((v / exact - 1.0).abs() < 1e-9, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn paneitz_green_is_chordal_power() {
        for n in [6usize, 7, 10] {
            let g = paneitz_radial_green(n).unwrap();
            for (r, v) in g.r().iter().zip(g.values()) {
                let exact = chordal(*r).powf(4.0 - n as f64);
                assert!((v / exact - 1.0).abs() < 1e-9, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn green_six() {
        let pair = paneitz_green_pair(6).unwrap();
        assert!(pair.g.values().iter().all(|v| *v > 0.0));
        let fit = fit_leading_exponent(&pair.g, (1e-3, 1e-2)).unwrap();
        assert!((fit.slope + 2.0).abs() < 0.05 && fit.is_meaningful());
        let (rmin, gmin) = pair.g.min();
        assert!(rmin > 1.0 && gmin > 0.0);
        assert!(pair.g.decreasing_prefix() > 10 && pair.f.decreasing_prefix() > 10);
        let sub = fit_leading_exponent(&pair.g.subleading(), (1e-3, 1e-2)).unwrap();
        assert!(sub.slope >= -0.7);
    }

    #[test]
    fn green_seven_subleading() {
        let g = paneitz_radial_green(7).unwrap();
        let sub = fit_leading_exponent(&g.subleading(), (1e-3, 1e-2)).unwrap();
        assert!((sub.slope + 1.0).abs() < 0.3, "{sub:?}");
    }

    #[test]
    fn operator_annihilates_g_away_from_pole() {
        for n in [6, 8] {
            let check = operator_check(&paneitz_green_pair(n).unwrap());
            assert!(check.relative() <= 1e-6);
            // Also small against the r⁻⁴-scaled terms at the window's inner edge.
            assert!(check.max_abs < 1e-4 * check.window_max_g * 1e4, "{check:?}");
        }
    }

    #[test]
    fn leading_image_matches_series() {
        for n in 6..=10 {
            let nf = n as f64;
            let (c1, c2) = helmholtz_constants(n);
            let series = 2.0 * (nf - 4.0) * (c1 + c2 + (nf - 1.0) * (6.0 - 2.0 * nf) / 3.0);
            assert!((leading_image_coefficient(n) - series).abs() < 1e-4 * series.abs().max(1.0));
        }
    }
}

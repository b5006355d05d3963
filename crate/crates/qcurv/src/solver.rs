//! Banach iteration `φ ↦ T[φ] = −L⁻¹(N[1] + q[φ])` on the spectral venue.
//!
//! The background is `ψ0 = 1 + f` over the round sphere and `L` is the round
//! linearization, so `T[φ] = φ` exactly when `N[1 + φ] = 0`. Fields stay
//! antipodally even, which keeps `L` away from its kernel at degree 1.

use crate::conformal_core::{round_q, ConformalBackground, NonlinearMapSpec};
use crate::error::{QcurvError, Result};
use crate::sphere_spectral::{apply_l_inverse, apply_laplacian, sup_abs, SpectralField, SphereVenue};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub n: usize,
    pub nu: f64,
    pub l_max: usize,
    pub max_iter: usize,
    pub residual_tol: f64,
    pub ball_radius: f64,
    pub min_eigen_threshold: f64,
}

impl SolverConfig {
    /// `ν = Q` of the unit sphere, tolerance `10⁻⁹`, ball radius `10⁻¹`.
    pub fn round(n: usize, l_max: usize) -> Result<Self> {
        let c = SolverConfig {
            n,
            nu: round_q(n),
            l_max,
            max_iter: 50,
            residual_tol: 1e-9,
            ball_radius: 0.1,
            min_eigen_threshold: 1e-8,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 6 {
            return Err(QcurvError::DimensionTooLow { n: self.n, min: 6 });
        }
        if !(self.residual_tol > 0.0 && self.ball_radius > 0.0) {
            return Err(QcurvError::BadInput("tolerance and ball radius must be positive".into()));
        }
        Ok(())
    }

    fn spec(&self) -> Result<NonlinearMapSpec> {
        NonlinearMapSpec::new(self.n, self.nu)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `sup |N[1 + φ_k]|` over the nodes.
    pub residual: f64,
    /// `sup |φ_k − φ_{k−1}|`; zero for the starting point.
    pub update: f64,
    pub ratio: Option<f64>,
    pub min_factor: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn max_ratio(&self) -> Option<f64> {
        self.records.iter().filter_map(|r| r.ratio).reduce(f64::max)
    }

    pub fn final_residual(&self) -> f64 {
        self.records.last().map_or(f64::INFINITY, |r| r.residual)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub phi: SpectralField,
    /// Total conformal factor `u = (1 + f)(1 + φ)` over the round metric.
    pub u: SpectralField,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn check_even(phi: &SpectralField) -> Result<()> {
    if phi.even_only() {
        Ok(())
    } else {
        Err(QcurvError::BadInput("iterates must be antipodally even".into()))
    }
}

/// One application of `T` for the given background.
pub fn apply_t(bg: &ConformalBackground, phi: &SpectralField, config: &SolverConfig) -> Result<SpectralField> {
    check_even(phi)?;
    let venue = bg.venue();
    let n1 = bg.n_at(&venue.zeros())?;
    let q = bg.quadratic_remainder(phi)?;
    let rhs: Vec<f64> = n1.iter().zip(&q).map(|(a, b)| a + b).collect();
    Ok(apply_l_inverse(&venue.to_spectral_even(&rhs)?, config.min_eigen_threshold)?.scale(-1.0))
}

/// `sup |N[1 + φ]|`.
pub fn residual(bg: &ConformalBackground, phi: &SpectralField) -> Result<f64> {
    Ok(sup_abs(&bg.n_at(phi)?))
}

fn min_factor(venue: &SphereVenue, phi: &SpectralField) -> f64 {
    venue.to_physical(phi).iter().fold(f64::INFINITY, |m, v| m.min(1.0 + v))
}

const STALL_WINDOW: usize = 3;

/// Iterates `T` from `φ = 0` for the background `1 + f`. Returns an
/// unconverged solution if `max_iter` runs out.
pub fn iterate(config: &SolverConfig, background_f: &SpectralField) -> Result<(Solution, IterationTrace)> {
    config.validate()?;
    check_even(background_f)?;
    let venue = SphereVenue::new(config.n, config.l_max)?;
    if background_f.n() != config.n || background_f.lmax() != config.l_max {
        return Err(QcurvError::BadInput("background field does not match the configuration".into()));
    }
    let bg = ConformalBackground::perturbed(&venue, config.spec()?, background_f);
    let mut trace = IterationTrace::default();
    let mut phi = venue.zeros();
    let mut prev_update: Option<f64> = None;
    let mut update = 0.0;
    let mut k = 0;
    loop {
        let min_u = min_factor(&venue, &phi);
        if min_u <= 0.0 {
            return Err(QcurvError::NonPositiveConformalFactor { min: min_u });
        }
        let res = residual(&bg, &phi)?;
        let ratio = prev_update.filter(|p| *p > 0.0 && k > 1).map(|p| update / p);
        trace.records.push(IterationRecord { iteration: k, residual: res, update, ratio, min_factor: min_u });
        let ratios: Vec<f64> = trace.records.iter().rev().take(STALL_WINDOW).filter_map(|r| r.ratio).collect();
        if ratios.len() == STALL_WINDOW && ratios.iter().all(|r| *r >= 1.0) {
            return Err(QcurvError::NotContracting(ratios));
        }
        let converged = res < config.residual_tol;
        if converged || k >= config.max_iter {
            let one = SpectralField::constant(config.n, config.l_max, 1.0);
            let u = bg.total_factor(&one.add(&phi));
            let sol = Solution { phi, u, iterations: k, residual: res, converged };
            return Ok((sol, trace));
        }
        let next = apply_t(&bg, &phi, config)?;
        let norm = venue.sup(&next);
        if norm > config.ball_radius {
            return Err(QcurvError::BallExit { norm, radius: config.ball_radius });
        }
        prev_update = Some(update);
        update = venue.sup(&next.sub(&phi));
        phi = next;
        k += 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// `sup |Q_achieved − ν|` with `Q_achieved = 2/(n−4) · u^{−(n+4)/(n−4)} P u`.
    pub q_deviation: f64,
    pub min_u: f64,
    pub residual: f64,
    pub residual_ok: bool,
    pub pass: bool,
}

/// Recomputes the Q-curvature of `u^{4/(n−4)} g_round` from the solved factor.
pub fn verify_solution(solution: &Solution, config: &SolverConfig) -> Result<VerificationReport> {
    let venue = SphereVenue::new(config.n, config.l_max)?;
    let spec = config.spec()?;
    let uv = venue.to_physical(&solution.u);
    let min_u = uv.iter().copied().fold(f64::INFINITY, f64::min);
    let mut q_deviation = f64::INFINITY;
    if min_u > 0.0 {
        let nu = crate::conformal_core::nonlinear_map(&venue, &solution.u, &spec)?;
        let scale = 2.0 / (config.n as f64 - 4.0);
        q_deviation = sup_abs(&nu) * scale;
    }
    let residual_ok = solution.residual < config.residual_tol;
    let pass = residual_ok && min_u > 0.0 && q_deviation < 10.0 * config.residual_tol;
    Ok(VerificationReport { q_deviation, min_u, residual: solution.residual, residual_ok, pass })
}

/// Norm standing in for the unweighted `C^{4,α}` norm on the sphere:
/// the largest of `sup|φ|`, `sup|Δφ|`, `sup|Δ²φ|`.
pub fn strong_norm(venue: &SphereVenue, phi: &SpectralField) -> f64 {
    let lap = apply_laplacian(phi);
    let bilap = apply_laplacian(&lap);
    venue.sup(phi).max(venue.sup(&lap)).max(venue.sup(&bilap))
}

/// `‖q[ψ] − q[φ]‖_∞ / ((‖φ‖ + ‖ψ‖)‖ψ − φ‖)` with the strong norm below.
pub fn lipschitz_ratio(
    venue: &SphereVenue,
    spec: &NonlinearMapSpec,
    phi: &SpectralField,
    psi: &SpectralField,
) -> Result<f64> {
    let bg = ConformalBackground::round(venue, spec.clone());
    let qa = bg.quadratic_remainder(phi)?;
    let qb = bg.quadratic_remainder(psi)?;
    let num = qa.iter().zip(&qb).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let den = (strong_norm(venue, phi) + strong_norm(venue, psi)) * strong_norm(venue, &psi.sub(phi));
    Ok(num / den)
}

/// `(t, sup|q[tφ]|)` for each `t`.
pub fn remainder_scaling(
    venue: &SphereVenue,
    spec: &NonlinearMapSpec,
    phi: &SpectralField,
    ts: &[f64],
) -> Result<Vec<(f64, f64)>> {
    ts.iter()
        .map(|&t| Ok((t, sup_abs(&crate::conformal_core::quadratic_remainder(venue, &phi.scale(t), spec)?))))
        .collect()
}

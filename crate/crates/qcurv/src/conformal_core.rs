//! Paneitz coefficients on Einstein manifolds, the nonlinear map
//! `N[u] = u^{−(n+4)/(n−4)} P u − (n−4)/2 · ν`, its linearization and
//! quadratic remainder, the conformal covariance check, and indicial roots of
//! the flat bilaplacian.

use num_traits::ToPrimitive;

use crate::error::{QcurvError, Result};
use crate::exact_models::{int, rat, Rational};
use crate::sphere_spectral::{apply_linearized, apply_paneitz, SpectralField, SphereVenue, JET_LEN};

#[derive(Debug, Clone, PartialEq)]
pub struct PaneitzEinsteinCoeffs {
    pub n: usize,
    pub c1: Rational,
    pub c2: Rational,
    pub q_value: Rational,
    /// Coefficient of `R g` in `P = Δ² + div((b_n R g − 4/(n−2) Ric) d·) + …`.
    pub b_n: Rational,
}

/// `P = (−Δ + c1)(−Δ + c2)` on an Einstein manifold with `Ric = (n−1) g`.
pub fn einstein_paneitz_coeffs(n: usize) -> Result<PaneitzEinsteinCoeffs> {
    if n < 5 {
        return Err(QcurvError::DimensionTooLow { n, min: 5 });
    }
    let ni = n as i64;
    Ok(PaneitzEinsteinCoeffs {
        n,
        c1: rat(ni * ni - 2 * ni - 8, 4),
        c2: rat(ni * ni - 2 * ni, 4),
        q_value: rat(ni * (ni * ni - 4), 8),
        b_n: rat(ni * ni - 4 * ni + 8, 2 * (ni - 1) * (ni - 2)),
    })
}

fn sphere_eigen(l: usize) -> impl Fn(usize) -> i64 {
    move |n| (l * (l + n - 1)) as i64
}

/// Eigenvalue of the round-sphere Paneitz operator on degree-`l` harmonics.
pub fn paneitz_eigenvalue(l: usize, n: usize) -> Rational {
    let ni = n as i64;
    let lam = int(sphere_eigen(l)(n));
    (lam.clone() + rat(ni * ni - 2 * ni - 8, 4)) * (lam + rat(ni * ni - 2 * ni, 4))
}

/// Eigenvalue of `L = P − (n+4)/2 · Q` on degree-`l` harmonics.
pub fn linearized_eigenvalue(l: usize, n: usize) -> Rational {
    let ni = n as i64;
    paneitz_eigenvalue(l, n) - rat(ni + 4, 2) * rat(ni * (ni * ni - 4), 8)
}

pub fn paneitz_eigenvalue_f64(l: usize, n: usize) -> f64 {
    let nf = n as f64;
    let lam = (l * (l + n - 1)) as f64;
    (lam + nf * nf / 4.0 - nf / 2.0 - 2.0) * (lam + nf * nf / 4.0 - nf / 2.0)
}

pub fn linearized_eigenvalue_f64(l: usize, n: usize) -> f64 {
    let nf = n as f64;
    paneitz_eigenvalue_f64(l, n) - (nf + 4.0) / 2.0 * round_q(n)
}

/// `n(n² − 4)/8`, the Q-curvature of the unit round sphere.
pub fn round_q(n: usize) -> f64 {
    let nf = n as f64;
    nf * (nf * nf - 4.0) / 8.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearMapSpec {
    pub n: usize,
    pub nu: f64,
    pub exponent: Rational,
}

impl NonlinearMapSpec {
    pub fn new(n: usize, nu: f64) -> Result<Self> {
        if n < 6 {
            return Err(QcurvError::DimensionTooLow { n, min: 6 });
        }
        Ok(Self { n, nu, exponent: rat(n as i64 + 4, n as i64 - 4) })
    }

    /// Target equal to the round sphere's own Q.
    pub fn round(n: usize) -> Result<Self> {
        Self::new(n, round_q(n))
    }

    pub fn exponent_f64(&self) -> f64 {
        self.exponent.to_f64().expect("small rational")
    }

    fn shift(&self) -> f64 {
        (self.n as f64 - 4.0) / 2.0 * self.nu
    }
}

fn positive_min(values: &[f64]) -> Result<()> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        Ok(())
    } else {
        Err(QcurvError::NonPositiveConformalFactor { min })
    }
}

/// `N[u]` at the venue nodes for the round background.
pub fn nonlinear_map(venue: &SphereVenue, u: &SpectralField, spec: &NonlinearMapSpec) -> Result<Vec<f64>> {
    let uv = venue.to_physical(u);
    positive_min(&uv)?;
    let pu = venue.to_physical(&apply_paneitz(u));
    let p = spec.exponent_f64();
    Ok(uv.iter().zip(&pu).map(|(x, y)| x.powf(-p) * y - spec.shift()).collect())
}

/// Metric `ψ0^{4/(n−4)} g_round`, handled through the covariance law:
/// `N_{ψ0}[v] = N_round[ψ0 v]`.
#[derive(Debug, Clone)]
pub struct ConformalBackground<'a> {
    venue: &'a SphereVenue,
    factor: SpectralField,
    spec: NonlinearMapSpec,
}

impl<'a> ConformalBackground<'a> {
    pub fn round(venue: &'a SphereVenue, spec: NonlinearMapSpec) -> Self {
        Self { venue, factor: SpectralField::constant(venue.n(), venue.lmax(), 1.0), spec }
    }

    /// Background conformal factor `1 + f`.
    pub fn perturbed(venue: &'a SphereVenue, spec: NonlinearMapSpec, f: &SpectralField) -> Self {
        let factor = SpectralField::constant(venue.n(), venue.lmax(), 1.0).add(f);
        Self { venue, factor, spec }
    }

    pub fn venue(&self) -> &'a SphereVenue {
        self.venue
    }

    pub fn spec(&self) -> &NonlinearMapSpec {
        &self.spec
    }

    pub fn factor(&self) -> &SpectralField {
        &self.factor
    }

    /// Total conformal factor `ψ0 v` relative to the round metric.
    pub fn total_factor(&self, v: &SpectralField) -> SpectralField {
        self.venue.product_exact(&self.factor, v)
    }

    /// `N[v]` of the background at the nodes.
    pub fn nonlinear_map(&self, v: &SpectralField) -> Result<Vec<f64>> {
        positive_min(&self.venue.to_physical(v))?;
        nonlinear_map(self.venue, &self.total_factor(v), &self.spec)
    }

    /// `N[1 + φ]`.
    pub fn n_at(&self, phi: &SpectralField) -> Result<Vec<f64>> {
        let one = SpectralField::constant(phi.n(), phi.lmax(), 1.0);
        self.nonlinear_map(&one.add(phi))
    }

    /// `q[φ] = N[1+φ] − N[1] − L[φ]` with `L` the round linearization.
    pub fn quadratic_remainder(&self, phi: &SpectralField) -> Result<Vec<f64>> {
        let n1 = self.n_at(&self.venue.zeros())?;
        let nphi = self.n_at(phi)?;
        let lphi = self.venue.to_physical(&apply_linearized(phi));
        Ok(nphi.iter().zip(&n1).zip(&lphi).map(|((a, b), c)| a - b - c).collect())
    }
}

/// `q[φ]` for the round background.
pub fn quadratic_remainder(venue: &SphereVenue, phi: &SpectralField, spec: &NonlinearMapSpec) -> Result<Vec<f64>> {
    ConformalBackground::round(venue, spec.clone()).quadratic_remainder(phi)
}

/// Truncated Taylor series in `t` about a node. Products never feed high
/// orders into low ones, so reading `c[0]` after `k` differentiations is
/// exact provided the inputs carried `k` orders.
#[derive(Debug, Clone, Copy)]
struct Jet([f64; JET_LEN]);

impl Jet {
    fn constant(x: f64) -> Self {
        let mut c = [0.0; JET_LEN];
        c[0] = x;
        Jet(c)
    }

    fn var(t: f64) -> Self {
        let mut c = Self::constant(t).0;
        c[1] = 1.0;
        Jet(c)
    }

    fn value(self) -> f64 {
        self.0[0]
    }

    fn d(self) -> Self {
        let mut c = [0.0; JET_LEN];
        for k in 0..JET_LEN - 1 {
            c[k] = (k + 1) as f64 * self.0[k + 1];
        }
        Jet(c)
    }

    fn scale(self, s: f64) -> Self {
        Jet(self.0.map(|x| s * x))
    }

    fn ln(self) -> Self {
        let a = self.0;
        let mut c = [0.0; JET_LEN];
        c[0] = a[0].ln();
        for k in 1..JET_LEN {
            let acc: f64 = (1..k).map(|i| i as f64 * c[i] * a[k - i]).sum();
            c[k] = (a[k] - acc / k as f64) / a[0];
        }
        Jet(c)
    }

    // From x·y' = p·x'·y for y = x^p.
    fn powf(self, p: f64) -> Self {
        let a = self.0;
        let mut c = [0.0; JET_LEN];
        c[0] = a[0].powf(p);
        for k in 1..JET_LEN {
            let acc: f64 = (1..=k).map(|i| (p * i as f64 - (k - i) as f64) * a[i] * c[k - i]).sum();
            c[k] = acc / (k as f64 * a[0]);
        }
        Jet(c)
    }
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|k| self.0[k] + o.0[k]))
    }
}

impl std::ops::Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|k| self.0[k] - o.0[k]))
    }
}

impl std::ops::Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|k| (0..=k).map(|i| self.0[i] * o.0[k - i]).sum()))
    }
}

/// Paneitz operator of `g̃ = ψ^{4/(n−4)} g_round` applied to `u`, assembled
/// from the Schouten tensor of `g̃` rather than from the covariance law.
/// Values at the nodes of `venue`.
///
/// Everything is carried as t-jets built from the exact coefficients of `ψ`
/// and `u`; re-projecting intermediate fields and differentiating them again
/// loses several digits at the nodes next to the poles.
pub fn conformal_paneitz_direct(venue: &SphereVenue, psi: &SpectralField, u: &SpectralField) -> Result<Vec<f64>> {
    let nf = venue.n() as f64;
    let pv = venue.to_physical(psi);
    positive_min(&pv)?;
    let kappa = 2.0 / (nf - 4.0);
    let psi_jets = venue.taylor(psi);
    let u_jets = venue.taylor(u);
    let half = Jet::constant(0.5);
    Ok(venue
        .nodes()
        .iter()
        .zip(psi_jets.iter().zip(&u_jets))
        .map(|(&t0, (pj, uj))| {
            let t = Jet::var(t0);
            let s2 = Jet::constant(1.0) - t * t;
            let (psi, u) = (Jet(*pj), Jet(*uj));
            let w = psi.ln().scale(kappa);
            let e = psi.powf(-2.0 * kappa);
            let wt = w.d();
            // Hessian of w on the round sphere: radial entry and the tangential
            // multiple of the metric, with r the distance from the north pole.
            let w_rr = s2 * wt.d() - t * wt;
            let sq = s2 * wt * wt;
            let a_r = e * (half - w_rr + sq.scale(0.5));
            let a_t = e * (half + t * wt - sq.scale(0.5));
            let round_lap = |h: Jet| s2 * h.d().d() - (t * h.d()).scale(nf);
            let lap = |h: Jet| e * (round_lap(h) + (s2 * wt * h.d()).scale(nf - 2.0));

            let sigma1 = a_r + a_t.scale(nf - 1.0);
            let sigma2 = (a_r * a_t).scale(nf - 1.0) + (a_t * a_t).scale((nf - 1.0) * (nf - 2.0) / 2.0);
            let q = (sigma1 * sigma1).scale((nf - 4.0) / 2.0) + sigma2.scale(4.0) - lap(sigma1);
            let tau = a_r.scale(4.0) - sigma1.scale(nf - 2.0);
            let div = e * (tau * round_lap(u) + s2 * tau.d() * u.d() + (tau * s2 * wt * u.d()).scale(nf - 2.0));
            (lap(lap(u)) + div + (q * u).scale((nf - 4.0) / 2.0)).value()
        })
        .collect())
}

fn pad(field: &SpectralField, lmax: usize) -> SpectralField {
    let mut c = field.coeffs().to_vec();
    c.resize(lmax + 1, 0.0);
    SpectralField::new(field.n(), c)
}

/// Max-norm of `P_{g̃} u − ψ^{−(n+4)/(n−4)} P(uψ)` with `g̃ = ψ^{4/(n−4)} g`.
/// The left side comes from the curvature of `g̃`; both sides are evaluated
/// on a venue with twice the truncation degree of the inputs.
pub fn conformal_covariance_residual(psi: &SpectralField, u: &SpectralField) -> Result<f64> {
    let n = psi.n();
    if u.n() != n {
        return Err(QcurvError::BadInput("fields live on different spheres".into()));
    }
    if n < 5 {
        return Err(QcurvError::DimensionTooLow { n, min: 5 });
    }
    let lmax = 2 * psi.lmax().max(u.lmax());
    let venue = SphereVenue::new(n, lmax)?;
    let (psi, u) = (pad(psi, lmax), pad(u, lmax));
    let lhs = conformal_paneitz_direct(&venue, &psi, &u)?;
    let nf = n as f64;
    let p = (nf + 4.0) / (nf - 4.0);
    let (c1, c2) = ((nf * nf - 2.0 * nf - 8.0) / 4.0, (nf * nf - 2.0 * nf) / 4.0);
    // Round P(uψ) = (−Δ + c1)(−Δ + c2)(uψ), with the product formed on jets.
    let psi_jets = venue.taylor(&psi);
    let rhs = venue.nodes().iter().zip(psi_jets.iter().zip(venue.taylor(&u))).map(|(&t0, (pj, uj))| {
        let t = Jet::var(t0);
        let s2 = Jet::constant(1.0) - t * t;
        let helm = |h: Jet, c: f64| h.scale(c) - (s2 * h.d().d() - (t * h.d()).scale(nf));
        let h = Jet(*pj) * Jet(uj);
        (helm(helm(h, c2), c1).value(), pj[0])
    });
    Ok(lhs.iter().zip(rhs).map(|(l, (r, s))| (l - s.powf(-p) * r).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicialRootSet {
    pub n: usize,
    pub l_max: usize,
    /// Sorted, without repetitions.
    pub roots: Vec<i64>,
    /// True when no root lies in the open interval `(4 − n, 0)`.
    pub gap_is_empty: bool,
}

/// Exponents `γ` with `Δ²(r^γ Y_l) = 0` on flat `R^n`, for `l ≤ l_max`.
pub fn bilaplacian_indicial_roots(n: usize, l_max: usize) -> IndicialRootSet {
    let ni = n as i64;
    let mut roots: Vec<i64> = (0..=l_max as i64).flat_map(|l| [l, 2 + l, 2 - ni - l, 4 - ni - l]).collect();
    roots.sort_unstable();
    roots.dedup();
    let gap_is_empty = !roots.iter().any(|&g| 4 - ni < g && g < 0);
    IndicialRootSet { n, l_max, roots, gap_is_empty }
}

//! Exact rational curvature scalars of diagonal Schouten models and products
//! of Einstein factors.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{QcurvError, Result};

pub type Rational = BigRational;

pub fn rat(p: i64, q: i64) -> Rational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    BigRational::from_integer(BigInt::from(p))
}

fn dim_check(n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(QcurvError::DimensionTooLow { n, min })
    } else {
        Ok(())
    }
}

/// Diagonal Schouten tensor `g⁻¹A` given as eigenvalues with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct SchoutenSpectrum {
    entries: Vec<(Rational, usize)>,
    n: usize,
}

impl SchoutenSpectrum {
    /// Zero multiplicities are rejected; `n` is the sum of multiplicities.
    pub fn new(entries: Vec<(Rational, usize)>) -> Result<Self> {
        if entries.iter().any(|(_, m)| *m == 0) {
            return Err(QcurvError::BadInput("zero multiplicity".into()));
        }
        let n = entries.iter().map(|(_, m)| m).sum();
        Ok(Self { entries, n })
    }

    /// The spectrum `{1/2 ×k, (−1/2+ε) ×k, 0 ×(n−2k)}` of the positive ×
    /// negative × flat product family.
    pub fn product_family(n: usize, k: usize, eps: &Rational) -> Result<Self> {
        if k == 0 || 2 * k > n {
            return Err(QcurvError::BadInput(format!("need 1 ≤ k ≤ n/2, got k={k}, n={n}")));
        }
        let mut entries = vec![(rat(1, 2), k), (rat(-1, 2) + eps, k)];
        if n > 2 * k {
            entries.push((Rational::zero(), n - 2 * k));
        }
        Self::new(entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(Rational, usize)] {
        &self.entries
    }

    fn power_sum(&self, p: u32) -> Rational {
        self.entries
            .iter()
            .map(|(v, m)| num_traits::pow(v.clone(), p as usize) * int(*m as i64))
            .fold(Rational::zero(), |a, b| a + b)
    }
}

/// Einstein factor with `Ric = κ (dim − 1) g`.
#[derive(Debug, Clone, PartialEq)]
pub struct EinsteinFactor {
    pub dim: usize,
    pub kappa: Rational,
}

impl EinsteinFactor {
    pub fn new(dim: usize, kappa: Rational) -> Self {
        Self { dim, kappa }
    }

    pub fn flat(dim: usize) -> Self {
        Self { dim, kappa: Rational::zero() }
    }

    fn ricci_eigenvalue(&self) -> Rational {
        if self.dim <= 1 {
            // One-dimensional factors carry no curvature whatever κ says.
            return Rational::zero();
        }
        self.kappa.clone() * int(self.dim as i64 - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureScalars {
    pub n: usize,
    pub sigma1: Rational,
    pub sigma2: Rational,
    pub r: Rational,
    pub ric_norm_sq: Rational,
    pub laplacian_r: Rational,
    pub q: Rational,
}

pub fn sigma_elementary(spec: &SchoutenSpectrum, k: usize) -> Result<Rational> {
    match k {
        0 => Ok(Rational::one()),
        1 => Ok(spec.power_sum(1)),
        2 => {
            let p1 = spec.power_sum(1);
            Ok((p1.clone() * p1 - spec.power_sum(2)) / int(2))
        }
        _ => Err(QcurvError::UnsupportedOrder(k)),
    }
}

/// `Q = (n−4)/2·σ1² + 4σ2` for a homogeneous model (Δσ1 = 0).
pub fn q_from_schouten(spec: &SchoutenSpectrum) -> Result<Rational> {
    dim_check(spec.n, 5)?;
    let s1 = sigma_elementary(spec, 1)?;
    let s2 = sigma_elementary(spec, 2)?;
    Ok(rat(spec.n as i64 - 4, 2) * s1.clone() * s1 + int(4) * s2)
}

/// All scalars of a homogeneous Schouten model.
pub fn curvature_scalars(spec: &SchoutenSpectrum) -> Result<CurvatureScalars> {
    let n = spec.n;
    dim_check(n, 5)?;
    let sigma1 = sigma_elementary(spec, 1)?;
    let sigma2 = sigma_elementary(spec, 2)?;
    let r = int(2 * (n as i64 - 1)) * sigma1.clone();
    // Ric = (n−2)A + σ1 g, since R/(2(n−1)) = σ1.
    let ric_norm_sq = spec
        .entries
        .iter()
        .map(|(a, m)| {
            let ric = int(n as i64 - 2) * a.clone() + sigma1.clone();
            ric.clone() * ric * int(*m as i64)
        })
        .fold(Rational::zero(), |x, y| x + y);
    let q = q_from_schouten(spec)?;
    Ok(CurvatureScalars { n, sigma1, sigma2, r, ric_norm_sq, laplacian_r: Rational::zero(), q })
}

/// Schouten spectrum of a Riemannian product of Einstein factors.
pub fn product_schouten(factors: &[EinsteinFactor]) -> Result<SchoutenSpectrum> {
    if factors.is_empty() {
        return Err(QcurvError::EmptyProduct);
    }
    if factors.iter().any(|f| f.dim == 0) {
        return Err(QcurvError::BadInput("factor of dimension 0".into()));
    }
    let n: usize = factors.iter().map(|f| f.dim).sum();
    dim_check(n, 5)?;
    let r_total = factors.iter().map(|f| f.ricci_eigenvalue() * int(f.dim as i64)).fold(Rational::zero(), |a, b| a + b);
    let shift = r_total / int(2 * (n as i64 - 1));
    let entries = factors.iter().map(|f| ((f.ricci_eigenvalue() - shift.clone()) / int(n as i64 - 2), f.dim)).collect();
    SchoutenSpectrum::new(entries)
}

/// `a_n` in `Q = −ΔR/(2(n−1)) + a_n R² − 2|Ric|²/(n−2)²`.
pub fn q_ricci_coefficient(n: usize) -> Rational {
    let n = n as i64;
    rat(n * n * n - 4 * n * n + 16 * n - 16, 8 * (n - 1) * (n - 1) * (n - 2) * (n - 2))
}

/// Q computed twice from Ricci eigenvalues: through the Schouten spectrum and
/// through the R/Ric form.
pub fn q_two_forms(ric_eigenvalues: &[Rational], laplacian_r: &Rational, n: usize) -> Result<(Rational, Rational)> {
    dim_check(n, 5)?;
    if ric_eigenvalues.len() != n {
        return Err(QcurvError::BadInput(format!("{} Ricci eigenvalues for dimension {n}", ric_eigenvalues.len())));
    }
    let ni = n as i64;
    let r = ric_eigenvalues.iter().fold(Rational::zero(), |a, b| a + b);
    let ric_sq = ric_eigenvalues.iter().fold(Rational::zero(), |a, b| a + b.clone() * b);

    let shift = r.clone() / int(2 * (ni - 1));
    let spec = SchoutenSpectrum::new(
        ric_eigenvalues.iter().map(|v| ((v.clone() - shift.clone()) / int(ni - 2), 1)).collect(),
    )?;
    let lap_sigma1 = laplacian_r.clone() / int(2 * (ni - 1));
    let q_schouten = q_from_schouten(&spec)? - lap_sigma1;

    let q_ricci = -laplacian_r.clone() / int(2 * (ni - 1)) + q_ricci_coefficient(n) * r.clone() * r
        - int(2) * ric_sq / int((ni - 2) * (ni - 2));
    Ok((q_schouten, q_ricci))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(x: &Rational) -> Self {
        if x.is_positive() {
            Sign::Positive
        } else if x.is_negative() {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Coefficients of the Bochner lower bound for `⟨L u, u⟩` on a metric with
/// constant Q and sign-definite scalar curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityCertificate {
    pub n: usize,
    pub coeff_laplacian_sq: Rational,
    pub coeff_gradient: Rational,
    pub coeff_hessian: Rational,
    pub coeff_zeroth: Rational,
    pub verdict: bool,
}

pub fn bochner_certificate(n: usize, q: &Rational, r_sign: Sign) -> Result<PositivityCertificate> {
    dim_check(n, 6)?;
    let ni = n as i64;
    let coeff_laplacian_sq = int(1) - rat(4, ni - 2);
    let coeff_gradient = rat((ni - 2) * (ni - 2) + 4, 2 * (ni - 1) * (ni - 2));
    let coeff_hessian = rat(4, ni - 2);
    let coeff_zeroth = -int(4) * q.clone();
    let nonneg = !coeff_laplacian_sq.is_negative() && !coeff_gradient.is_negative() && !coeff_hessian.is_negative();
    let verdict = nonneg && coeff_zeroth.is_positive() && r_sign == Sign::Positive;
    Ok(PositivityCertificate { n, coeff_laplacian_sq, coeff_gradient, coeff_hessian, coeff_zeroth, verdict })
}

/// Exact certificate that `R > 0` and `Q < 0` on the whole window
/// `ε ∈ (0, ε_max]` of the product family, `ε_max = 1/(2nk)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonWindow {
    pub n: usize,
    pub k: usize,
    pub eps_max: Rational,
    pub r_at_max: Rational,
    pub q_at_zero: Rational,
    pub q_at_max: Rational,
    /// Largest value of Q over the closed window.
    pub q_sup: Rational,
    pub holds: bool,
}

pub fn product_family_window(n: usize, k: usize) -> Result<EpsilonWindow> {
    dim_check(n, 5)?;
    let eps_max = rat(1, 2 * n as i64 * k as i64);
    let q_of = |eps: &Rational| -> Result<Rational> { q_from_schouten(&SchoutenSpectrum::product_family(n, k, eps)?) };
    let at_max = curvature_scalars(&SchoutenSpectrum::product_family(n, k, &eps_max)?)?;
    let q_at_zero = q_of(&Rational::zero())?;
    // Q(ε) = −k + 2kε + (nk²/2 − 2k)ε² is a quadratic; its sup on [0, ε_max]
    // is at an endpoint unless the vertex of a concave parabola lies inside.
    let lead = rat(n as i64 * (k * k) as i64, 2) - int(2 * k as i64);
    let mut q_sup = q_at_zero.clone().max(at_max.q.clone());
    if lead.is_negative() {
        let vertex = -int(2 * k as i64) / (int(2) * lead);
        if vertex.is_positive() && vertex < eps_max {
            q_sup = q_sup.max(q_of(&vertex)?);
        }
    }
    let holds = at_max.r.is_positive() && q_sup.is_negative();
    Ok(EpsilonWindow { n, k, eps_max, r_at_max: at_max.r, q_at_zero, q_at_max: at_max.q, q_sup, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sigma_orders() {
        let s = SchoutenSpectrum::product_family(6, 1, &rat(1, 10)).unwrap();
        assert_eq!(sigma_elementary(&s, 0).unwrap(), int(1));
        assert_eq!(sigma_elementary(&s, 1).unwrap(), rat(1, 10));
        assert_eq!(sigma_elementary(&s, 2).unwrap(), rat(-1, 5));
        assert_eq!(sigma_elementary(&s, 3), Err(QcurvError::UnsupportedOrder(3)));
    }

    #[test]
    fn q_of_flat_and_low_dimension() {
        let flat = SchoutenSpectrum::new(vec![(int(0), 6)]).unwrap();
        assert_eq!(q_from_schouten(&flat).unwrap(), int(0));
        let low = SchoutenSpectrum::new(vec![(int(0), 4)]).unwrap();
        assert!(matches!(q_from_schouten(&low), Err(QcurvError::DimensionTooLow { .. })));
    }

    #[test]
    fn product_cases() {
        assert_eq!(product_schouten(&[]), Err(QcurvError::EmptyProduct));
        let flat = product_schouten(&[EinsteinFactor::flat(7)]).unwrap();
        assert_eq!(flat.entries(), &[(int(0), 7)]);
        let pn = product_schouten(&[EinsteinFactor::new(3, int(1)), EinsteinFactor::new(3, int(-1))]).unwrap();
        assert_eq!(pn.entries(), &[(rat(1, 2), 3), (rat(-1, 2), 3)]);
        assert_eq!(q_from_schouten(&pn).unwrap(), int(-3));
    }

    #[test]
    fn certificate_coefficients() {
        let c6 = bochner_certificate(6, &int(-1), Sign::Positive).unwrap();
        assert_eq!(c6.coeff_gradient, rat(1, 2));
        assert_eq!(c6.coeff_laplacian_sq, int(0));
        assert!(c6.verdict);
        let c10 = bochner_certificate(10, &int(-1), Sign::Positive).unwrap();
        assert_eq!(c10.coeff_laplacian_sq, rat(1, 2));
        assert_eq!(c10.coeff_gradient, rat(17, 36));
        assert!(!bochner_certificate(7, &int(0), Sign::Positive).unwrap().verdict);
        assert!(!bochner_certificate(7, &int(-1), Sign::Zero).unwrap().verdict);
        assert!(bochner_certificate(5, &int(-1), Sign::Positive).is_err());
    }

    #[test]
    fn two_forms_length_mismatch() {
        assert!(matches!(q_two_forms(&vec![int(1); 5], &int(0), 6), Err(QcurvError::BadInput(_))));
    }

    #[test]
    fn two_forms_with_laplacian() {
        let ric: Vec<_> = (1..=7).map(|i| rat(i, 3)).collect();
        let (a, b) = q_two_forms(&ric, &rat(5, 2), 7).unwrap();
        assert_eq!(a, b);
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-40i64..=40, 1i64..=12).prop_map(|(p, q)| rat(p, q))
    }

    proptest! {
        #[test]
        fn q_is_its_definition(vals in prop::collection::vec((small_rational(), 1usize..4), 2..5)) {
            let spec = SchoutenSpectrum::new(vals).unwrap();
            prop_assume!(spec.n() >= 5);
            let s1 = sigma_elementary(&spec, 1).unwrap();
            let s2 = sigma_elementary(&spec, 2).unwrap();
            let q = q_from_schouten(&spec).unwrap();
            prop_assert_eq!(q, rat(spec.n() as i64 - 4, 2) * s1.clone() * s1 + int(4) * s2);
        }

        #[test]
        fn round_factor_is_half(n in 5usize..40) {
            let s = product_schouten(&[EinsteinFactor::new(n, int(1))]).unwrap();
            prop_assert_eq!(s.entries(), &[(rat(1, 2), n)]);
        }

        #[test]
        fn scalar_curvature_is_trace(vals in prop::collection::vec((small_rational(), 1usize..4), 2..5)) {
            let spec = SchoutenSpectrum::new(vals).unwrap();
            prop_assume!(spec.n() >= 5);
            let c = curvature_scalars(&spec).unwrap();
            prop_assert_eq!(c.r, int(2 * (spec.n() as i64 - 1)) * c.sigma1);
        }
    }
}

//! Zonal functions on the round n-sphere in an orthonormal Gegenbauer basis.
//!
//! A zonal function depends only on `t = cos r`, the cosine of the distance
//! to the north pole. The basis `p_l(t)` is orthonormal for the probability
//! measure proportional to `(1 − t²)^{(n−2)/2} dt`, so constants have
//! coefficient vector `(c, 0, 0, …)` and `p_l` is an eigenfunction of the
//! Laplacian with eigenvalue `−l(l + n − 1)`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::conformal_core::{linearized_eigenvalue_f64, paneitz_eigenvalue_f64};
use crate::error::{QcurvError, Result};

/// Threshold below which a linearized eigenvalue counts as degenerate.
pub const DEFAULT_MIN_EIGEN: f64 = 1e-8;

/// Recurrence coefficients `a_l`, `t p_l = a_{l+1} p_{l+1} + a_l p_{l−1}`.
fn recurrence(n: usize, count: usize) -> Vec<f64> {
    let lam = (n as f64 - 1.0) / 2.0;
    (0..count)
        .map(|l| {
            if l == 0 {
                return 0.0;
            }
            let l = l as f64;
            (l * (l + 2.0 * lam - 1.0) / (4.0 * (l + lam) * (l + lam - 1.0))).sqrt()
        })
        .collect()
}

/// Number of t-derivatives tabulated per basis function.
pub const JET_LEN: usize = 5;

/// `p_l^{(k)}(t)` for `l ≤ lmax`, `k < JET_LEN`, from the differentiated
/// recurrence `p^{(k)}_{l+1} = (t p^{(k)}_l + k p^{(k−1)}_l − a_l p^{(k)}_{l−1}) / a_{l+1}`.
fn eval_basis(a: &[f64], t: f64, lmax: usize, out: &mut [[f64; JET_LEN]]) {
    out[0] = [1.0, 0.0, 0.0, 0.0, 0.0];
    if lmax == 0 {
        return;
    }
    out[1] = [t / a[1], 1.0 / a[1], 0.0, 0.0, 0.0];
    for l in 1..lmax {
        let (p, q) = (out[l], out[l - 1]);
        let inv = 1.0 / a[l + 1];
        let mut next = [0.0; JET_LEN];
        for k in 0..JET_LEN {
            let lower = if k == 0 { 0.0 } else { k as f64 * p[k - 1] };
            next[k] = (t * p[k] + lower - a[l] * q[k]) * inv;
        }
        out[l + 1] = next;
    }
}

/// `p_l(1)`, the pole value of the orthonormal zonal harmonic of degree `l`.
pub fn pole_value(n: usize, l: usize) -> f64 {
    let a = recurrence(n, l + 2);
    let mut buf = vec![[0.0; JET_LEN]; l + 1];
    eval_basis(&a, 1.0, l, &mut buf);
    buf[l][0]
}

/// Gauss quadrature for the normalized surface measure in `t = cos r`.
#[derive(Debug, Clone)]
pub struct ZonalGrid {
    pub n: usize,
    pub nodes: Vec<f64>,
    /// Sum to one: integrals are averages over the sphere.
    pub weights: Vec<f64>,
}

impl ZonalGrid {
    pub fn gauss(n: usize, node_count: usize) -> Result<Self> {
        if n < 2 {
            return Err(QcurvError::DimensionTooLow { n, min: 2 });
        }
        if node_count == 0 {
            return Err(QcurvError::BadInput("empty quadrature".into()));
        }
        let m = node_count;
        let a = recurrence(n, m + 1);
        let jacobi = DMatrix::from_fn(m, m, |i, j| {
            if i + 1 == j {
                a[j]
            } else if j + 1 == i {
                a[i]
            } else {
                0.0
            }
        });
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
        nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());

        let mut buf = vec![[0.0; JET_LEN]; m + 1];
        let mut weights = Vec::with_capacity(m);
        for t in nodes.iter_mut() {
            for _ in 0..3 {
                eval_basis(&a, *t, m, &mut buf);
                let step = buf[m][0] / buf[m][1];
                *t -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            eval_basis(&a, *t, m, &mut buf);
            let christoffel: f64 = buf[..m].iter().map(|v| v[0] * v[0]).sum();
            weights.push(1.0 / christoffel);
        }
        // Symmetrize so that even fields stay exactly even under quadrature.
        for i in 0..m / 2 {
            let j = m - 1 - i;
            let t = 0.5 * (nodes[j] - nodes[i]);
            let w = 0.5 * (weights[i] + weights[j]);
            nodes[i] = -t;
            nodes[j] = t;
            weights[i] = w;
            weights[j] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Ok(Self { n, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Zonal field stored as coefficients `c_0 … c_{lmax}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    n: usize,
    coeffs: Vec<f64>,
    even_only: bool,
}

impl SpectralField {
    pub fn new(n: usize, coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a field needs at least the degree-0 coefficient");
        let even_only = coeffs.iter().skip(1).step_by(2).all(|c| *c == 0.0);
        Self { n, coeffs, even_only }
    }

    pub fn zeros(n: usize, lmax: usize) -> Self {
        Self::new(n, vec![0.0; lmax + 1])
    }

    pub fn constant(n: usize, lmax: usize, c: f64) -> Self {
        let mut f = Self::zeros(n, lmax);
        f.coeffs[0] = c;
        f
    }

    /// Orthonormal basis function `p_l`.
    pub fn basis(n: usize, lmax: usize, l: usize) -> Self {
        let mut f = Self::zeros(n, lmax);
        f.coeffs[l] = 1.0;
        f.even_only = l % 2 == 0;
        f
    }

    /// Degree-`l` zonal harmonic scaled to equal 1 at the pole, so its
    /// sup norm is 1.
    pub fn zonal_harmonic(n: usize, lmax: usize, l: usize) -> Self {
        Self::basis(n, lmax, l).scale(1.0 / pole_value(n, l))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lmax(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn even_only(&self) -> bool {
        self.even_only
    }

    /// Drops odd degrees, i.e. averages with the antipodal reflection.
    pub fn project_even(&self) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(l, c)| if l % 2 == 0 { *c } else { 0.0 }).collect();
        Self { n: self.n, coeffs, even_only: true }
    }

    fn map_degrees(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(l, c)| f(l, *c)).collect();
        Self { n: self.n, coeffs, even_only: self.even_only }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_degrees(|_, c| s * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        assert_eq!(self.coeffs.len(), other.coeffs.len(), "truncation mismatch");
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + s * b).collect();
        Self { n: self.n, coeffs, even_only: self.even_only && other.even_only }
    }

    /// Euclidean norm of the coefficients, equal to the L² average norm.
    pub fn l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }
}

pub fn laplacian_eigenvalue(l: usize, n: usize) -> f64 {
    -((l * (l + n - 1)) as f64)
}

pub fn apply_laplacian(field: &SpectralField) -> SpectralField {
    let n = field.n;
    field.map_degrees(|l, c| laplacian_eigenvalue(l, n) * c)
}

/// `(−Δ + c1)(−Δ + c2)` applied coefficient-wise.
pub fn apply_paneitz(field: &SpectralField) -> SpectralField {
    let n = field.n;
    field.map_degrees(|l, c| paneitz_eigenvalue_f64(l, n) * c)
}

/// `L = P − (n+4)/2 · Q` of the round sphere.
pub fn apply_linearized(field: &SpectralField) -> SpectralField {
    let n = field.n;
    field.map_degrees(|l, c| linearized_eigenvalue_f64(l, n) * c)
}

/// `L⁻¹` on the degrees a field actually carries; fails if one of them sits
/// on a (near-)zero eigenvalue.
pub fn apply_l_inverse(field: &SpectralField, threshold: f64) -> Result<SpectralField> {
    let n = field.n;
    for (l, c) in field.coeffs.iter().enumerate() {
        if *c == 0.0 {
            continue;
        }
        let ev = linearized_eigenvalue_f64(l, n);
        if ev.abs() <= threshold {
            return Err(QcurvError::DegenerateOperator { degree: l, value: ev });
        }
    }
    Ok(field.map_degrees(|l, c| if c == 0.0 { 0.0 } else { c / linearized_eigenvalue_f64(l, n) }))
}

/// Quadrature grid plus basis tables for one truncation degree.
#[derive(Debug, Clone)]
pub struct SphereVenue {
    n: usize,
    lmax: usize,
    grid: ZonalGrid,
    /// Node-major table of `p_l` and its t-derivatives at the nodes.
    basis: Vec<[f64; JET_LEN]>,
}

impl SphereVenue {
    /// Venue with the default two-fold oversampling, `2(lmax + 1)` nodes.
    pub fn new(n: usize, lmax: usize) -> Result<Self> {
        Self::with_nodes(n, lmax, 2 * (lmax + 1))
    }

    pub fn with_nodes(n: usize, lmax: usize, node_count: usize) -> Result<Self> {
        if node_count < lmax + 1 {
            return Err(QcurvError::UnderResolved { nodes: node_count, lmax });
        }
        let grid = ZonalGrid::gauss(n, node_count)?;
        let a = recurrence(n, lmax + 2);
        let mut basis = vec![[0.0; JET_LEN]; node_count * (lmax + 1)];
        for (j, t) in grid.nodes.iter().enumerate() {
            eval_basis(&a, *t, lmax, &mut basis[j * (lmax + 1)..(j + 1) * (lmax + 1)]);
        }
        Ok(Self { n, lmax, grid, basis })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn grid(&self) -> &ZonalGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        &self.grid.nodes
    }

    fn row(&self, j: usize) -> &[[f64; JET_LEN]] {
        &self.basis[j * (self.lmax + 1)..(j + 1) * (self.lmax + 1)]
    }

    fn check_field(&self, field: &SpectralField) {
        assert_eq!(field.n, self.n, "field dimension differs from venue");
        assert_eq!(field.lmax(), self.lmax, "field truncation differs from venue");
    }

    pub fn zeros(&self) -> SpectralField {
        SpectralField::zeros(self.n, self.lmax)
    }

    pub fn to_spectral(&self, values: &[f64]) -> Result<SpectralField> {
        if values.len() != self.grid.len() {
            return Err(QcurvError::BadInput(format!("{} values for {} nodes", values.len(), self.grid.len())));
        }
        let mut coeffs = vec![0.0; self.lmax + 1];
        for (j, (w, v)) in self.grid.weights.iter().zip(values).enumerate() {
            let wv = w * v;
            for (c, p) in coeffs.iter_mut().zip(self.row(j)) {
                *c += wv * p[0];
            }
        }
        Ok(SpectralField::new(self.n, coeffs))
    }

    /// Projection onto even degrees, for fields known to be antipodally even.
    pub fn to_spectral_even(&self, values: &[f64]) -> Result<SpectralField> {
        Ok(self.to_spectral(values)?.project_even())
    }

    fn synth(&self, field: &SpectralField, k: usize) -> Vec<f64> {
        self.check_field(field);
        (0..self.grid.len()).map(|j| self.row(j).iter().zip(&field.coeffs).map(|(p, c)| p[k] * c).sum()).collect()
    }

    pub fn to_physical(&self, field: &SpectralField) -> Vec<f64> {
        self.synth(field, 0)
    }

    /// `∂f/∂t` at the nodes.
    pub fn dt(&self, field: &SpectralField) -> Vec<f64> {
        self.synth(field, 1)
    }

    /// `∂²f/∂t²` at the nodes.
    pub fn dtt(&self, field: &SpectralField) -> Vec<f64> {
        self.synth(field, 2)
    }

    /// Taylor coefficients `f^{(k)}(t_j)/k!` at every node.
    pub fn taylor(&self, field: &SpectralField) -> Vec<[f64; JET_LEN]> {
        self.check_field(field);
        let mut fact = [1.0; JET_LEN];
        for k in 1..JET_LEN {
            fact[k] = fact[k - 1] * k as f64;
        }
        (0..self.grid.len())
            .map(|j| {
                let mut out = [0.0; JET_LEN];
                for (p, c) in self.row(j).iter().zip(&field.coeffs) {
                    for k in 0..JET_LEN {
                        out[k] += p[k] * c;
                    }
                }
                for k in 0..JET_LEN {
                    out[k] /= fact[k];
                }
                out
            })
            .collect()
    }

    /// Pointwise product re-projected onto the truncation; exact when the
    /// product degree stays within the quadrature's reach.
    pub fn product(&self, a: &SpectralField, b: &SpectralField) -> SpectralField {
        let va = self.to_physical(a);
        let vb = self.to_physical(b);
        let prod: Vec<f64> = va.iter().zip(&vb).map(|(x, y)| x * y).collect();
        let f = self.to_spectral(&prod).expect("node count matches");
        if a.even_only && b.even_only {
            f.project_even()
        } else {
            f
        }
    }

    /// Product computed in coefficient space by expanding the lower-degree
    /// factor through the three-term recurrence, truncated to the venue.
    /// Unlike [`Self::product`] it adds no quadrature noise to the high
    /// degrees, which the Paneitz operator would amplify by `~l⁴`.
    pub fn product_exact(&self, a: &SpectralField, b: &SpectralField) -> SpectralField {
        self.check_field(a);
        self.check_field(b);
        let degree = |f: &SpectralField| f.coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0);
        let (short, long) = if degree(a) <= degree(b) { (a, b) } else { (b, a) };
        let d = degree(short);
        let len = self.lmax + d + 1;
        let rec = recurrence(self.n, len + 1);
        let times_t = |v: &[f64]| {
            let mut out = vec![0.0; len];
            for l in 0..len {
                if l + 1 < len {
                    out[l + 1] += rec[l + 1] * v[l];
                }
                if l >= 1 {
                    out[l - 1] += rec[l] * v[l];
                }
            }
            out
        };
        let mut prev = vec![0.0; len];
        let mut cur = long.coeffs.clone();
        cur.resize(len, 0.0);
        let mut acc: Vec<f64> = cur.iter().map(|c| short.coeffs[0] * c).collect();
        // cur = p_k(t)·long, advanced by p_{k+1} = (t p_k − a_k p_{k−1}) / a_{k+1}.
        for k in 0..d {
            let tv = times_t(&cur);
            let next: Vec<f64> = tv.iter().zip(&prev).map(|(x, y)| (x - rec[k] * y) / rec[k + 1]).collect();
            prev = std::mem::replace(&mut cur, next);
            let s = short.coeffs[k + 1];
            if s != 0.0 {
                acc.iter_mut().zip(&cur).for_each(|(x, y)| *x += s * y);
            }
        }
        acc.truncate(self.lmax + 1);
        let f = SpectralField::new(self.n, acc);
        if a.even_only && b.even_only {
            f.project_even()
        } else {
            f
        }
    }

    pub fn sup(&self, field: &SpectralField) -> f64 {
        sup_abs(&self.to_physical(field))
    }
}

pub fn sup_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quadrature_is_exact_for_moments() {
        // Average of t^{2k} over S^n: Π_{i<k} (2i+1)/(n+1+2i).
        let n = 6;
        let grid = ZonalGrid::gauss(n, 20).unwrap();
        assert!((grid.weights.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        for k in 0..20 {
            let vals: Vec<f64> = grid.nodes.iter().map(|t| t.powi(2 * k as i32)).collect();
            let exact: f64 = (0..k).map(|i| (2 * i + 1) as f64 / (n + 1 + 2 * i) as f64).product();
            assert!((grid.integrate(&vals) - exact).abs() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn exact_product_matches_quadrature_product() {
        let v = SphereVenue::new(6, 24).unwrap();
        let a = SpectralField::new(6, (0..25).map(|l| if l <= 5 { 0.3 / (1 + l) as f64 } else { 0.0 }).collect());
        let b = SpectralField::new(6, (0..25).map(|l| if l <= 12 { (-0.5f64).powi(l) } else { 0.0 }).collect());
        let exact = v.product_exact(&a, &b);
        let quad = v.product(&a, &b);
        assert!(exact.sub(&quad).l2() < 1e-13);
        assert!(v.product_exact(&b, &a).sub(&exact).l2() < 1e-13);
    }

    #[test]
    fn exact_product_of_constants_is_noise_free() {
        let v = SphereVenue::new(6, 64).unwrap();
        let one = SpectralField::constant(6, 64, 1.0);
        let p = v.product_exact(&one, &one);
        assert_eq!(p.coeffs()[0], 1.0);
        assert!(p.coeffs()[1..].iter().all(|c| *c == 0.0));
    }

    #[test]
    fn degree_two_pole_value_matches_dimension_count() {
        // dim of degree-2 harmonics on S^6 is C(8,2) − 1 = 27.
        assert!((pole_value(6, 2).powi(2) - 27.0).abs() < 1e-10);
        assert!((pole_value(2, 3).powi(2) - 7.0).abs() < 1e-10);
    }

    #[test]
    fn constants_and_basis_round_trip() {
        let v = SphereVenue::new(6, 16).unwrap();
        let one = v.to_spectral(&vec![1.0; v.grid().len()]).unwrap();
        assert!((one.coeffs()[0] - 1.0).abs() < 1e-14);
        assert!(one.coeffs()[1..].iter().all(|c| c.abs() < 1e-14));
        let p2 = SpectralField::basis(6, 16, 2);
        let back = v.to_spectral(&v.to_physical(&p2)).unwrap();
        assert!((back.coeffs()[2] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn under_resolved_grid() {
        assert_eq!(SphereVenue::with_nodes(6, 10, 10).unwrap_err(), QcurvError::UnderResolved { nodes: 10, lmax: 10 });
    }

    #[test]
    fn laplacian_of_degree_two() {
        let p2 = SpectralField::basis(6, 8, 2);
        assert_eq!(apply_laplacian(&p2).coeffs()[2], -14.0);
        assert_eq!(apply_laplacian(&SpectralField::constant(6, 8, 3.0)).coeffs()[0], 0.0);
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        // Δf = f'' + (n−1) cot r f' for zonal f, checked on a fine r-grid.
        let (n, lmax) = (6, 8);
        let a = recurrence(n, lmax + 2);
        let eval = |r: f64| {
            let mut buf = vec![[0.0; JET_LEN]; lmax + 1];
            eval_basis(&a, r.cos(), lmax, &mut buf);
            buf[2][0]
        };
        let h = 1e-3;
        for r in [0.3, 1.0, 2.0, 2.8] {
            let d2 = (eval(r + h) - 2.0 * eval(r) + eval(r - h)) / (h * h);
            let d1 = (eval(r + h) - eval(r - h)) / (2.0 * h);
            let lap = d2 + (n as f64 - 1.0) * d1 / r.tan();
            assert!((lap + 14.0 * eval(r)).abs() < 1e-4 * eval(r).abs().max(1.0));
        }
    }

    #[test]
    fn l_inverse_cases() {
        let c = SpectralField::constant(6, 8, 1.0);
        let inv = apply_l_inverse(&c, DEFAULT_MIN_EIGEN).unwrap();
        assert!((inv.coeffs()[0] + 1.0 / 96.0).abs() < 1e-16);
        let p1 = SpectralField::basis(6, 8, 1);
        assert!(matches!(
            apply_l_inverse(&p1, DEFAULT_MIN_EIGEN),
            Err(QcurvError::DegenerateOperator { degree: 1, .. })
        ));
    }

    #[test]
    fn t_derivatives_match_closed_form() {
        // p_1 = t / a_1 with a_1 = (n+1)^{-1/2}.
        let v = SphereVenue::new(6, 4).unwrap();
        let p1 = SpectralField::basis(6, 4, 1);
        let d = v.dt(&p1);
        assert!(d.iter().all(|x| (x - 7f64.sqrt()).abs() < 1e-13));
        assert!(v.dtt(&p1).iter().all(|x| x.abs() < 1e-13));
    }

    fn coeffs(lmax: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, lmax + 1)
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(c in coeffs(24)) {
            let v = SphereVenue::new(7, 24).unwrap();
            let f = SpectralField::new(7, c);
            let back = v.to_spectral(&v.to_physical(&f)).unwrap();
            for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn parseval(a in coeffs(20), b in coeffs(20)) {
            let v = SphereVenue::new(6, 20).unwrap();
            let (fa, fb) = (SpectralField::new(6, a), SpectralField::new(6, b));
            let pa = v.to_physical(&fa);
            let pb = v.to_physical(&fb);
            let quad: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
            prop_assert!((v.grid().integrate(&quad) - fa.dot(&fb)).abs() < 1e-12);
        }

        #[test]
        fn paneitz_is_composed_helmholtz(c in coeffs(12), n in 5usize..12) {
            let f = SpectralField::new(n, c);
            let nf = n as f64;
            let (c1, c2) = (nf * nf / 4.0 - nf / 2.0 - 2.0, nf * nf / 4.0 - nf / 2.0);
            let h1 = apply_laplacian(&f).scale(-1.0).axpy(c1, &f);
            let h2 = apply_laplacian(&h1).scale(-1.0).axpy(c2, &h1);
            let p = apply_paneitz(&f);
            for (x, y) in h2.coeffs().iter().zip(p.coeffs()) {
                prop_assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
            }
        }

        #[test]
        fn operators_commute_with_even_projection(c in coeffs(12)) {
            let f = SpectralField::new(6, c);
            for op in [apply_laplacian, apply_paneitz, apply_linearized] {
                prop_assert_eq!(op(&f).project_even(), op(&f.project_even()));
            }
        }

        #[test]
        fn l_inverse_inverts_on_even_fields(c in coeffs(16)) {
            let f = SpectralField::new(6, c).project_even();
            let back = apply_l_inverse(&apply_linearized(&f), DEFAULT_MIN_EIGEN).unwrap();
            for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn laplacian_is_linear(a in coeffs(10), b in coeffs(10), s in -3.0f64..3.0) {
            let (fa, fb) = (SpectralField::new(6, a), SpectralField::new(6, b));
            let lhs = apply_laplacian(&fa.axpy(s, &fb));
            let rhs = apply_laplacian(&fa).axpy(s, &apply_laplacian(&fb));
            for (x, y) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                prop_assert!((x - y).abs() < 1e-11 * y.abs().max(1.0));
            }
        }
    }
}

use std::path::PathBuf;

use anyhow::Result;
use num_rational::Ratio;
use qcurv::conformal_core::{bilaplacian_indicial_roots, einstein_paneitz_coeffs, linearized_eigenvalue};
use qcurv::exact_models::{
    curvature_scalars, int, product_family_window, product_schouten, q_two_forms, rat, EinsteinFactor, Rational,
    SchoutenSpectrum,
};
use qcurv::green_paneitz::{fit_leading_exponent, paneitz_green_pair};
use qcurv::neck_gluing::{scaling_sweep, GluingParams, NeckMetric};
use qcurv::solver::{iterate, verify_solution, SolverConfig};
use qcurv::sphere_spectral::SpectralField;
use qcurv::QcurvError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{fmt_f64, write_table, CheckRecord};

pub const RANDOM_SPECTRA: usize = 200;
const INDICIAL_DEGREES: usize = 24;
const SLOPE_TOL: f64 = 0.3;

pub fn verify_examples(n: usize, seed: u64) -> Result<Vec<CheckRecord>> {
    let ni = n as i64;
    let (k, eps) = (int(1), rat(1, 10));
    let s = curvature_scalars(&SchoutenSpectrum::product_family(n, 1, &eps)?)?;
    let q_closed = -k.clone() - int(2) * k.clone() * eps.clone() * eps.clone()
        + int(2) * k.clone() * eps.clone()
        + rat(ni, 2) * k.clone() * k.clone() * eps.clone() * eps.clone();
    let mut checks = vec![
        CheckRecord::exact(
            "product-family-r",
            "scalar curvature of the k=1, eps=1/10 product spectrum",
            int(2) * int(ni - 1) * k * eps,
            s.r,
            "product-family-scalar-curvature",
        ),
        CheckRecord::exact(
            "product-family-q",
            "Q-curvature of the k=1, eps=1/10 product spectrum",
            q_closed,
            s.q,
            "product-family-q-curvature",
        ),
    ];

    let ks: Vec<usize> = (1..=(n - 1) / 2).collect();
    let failing: Vec<usize> =
        ks.iter().copied().filter(|&k| !product_family_window(n, k).map(|w| w.holds).unwrap_or(false)).collect();
    checks.push(CheckRecord::flag(
        "product-family-window",
        "R > 0 and Q < 0 on the whole window eps in (0, 1/(2nk)] for every admissible k",
        failing.is_empty(),
        if failing.is_empty() {
            format!("holds for k = 1..{}", ks.len())
        } else {
            format!("fails for k = {failing:?}")
        },
        "product-family-sign-window",
    ));

    let round = curvature_scalars(&product_schouten(&[EinsteinFactor::new(n, int(1))])?)?;
    let coeffs = einstein_paneitz_coeffs(n)?;
    checks.push(CheckRecord::exact(
        "round-sphere-q",
        "Q-curvature of the unit sphere",
        rat(ni * (ni * ni - 4), 8),
        round.q.clone(),
        "einstein-q-value",
    ));
    checks.push(CheckRecord::exact(
        "einstein-q-coefficient",
        "Q from the Einstein factorisation agrees with the Schouten formula",
        round.q.clone(),
        coeffs.q_value.clone(),
        "einstein-q-value",
    ));
    checks.push(CheckRecord::exact(
        "c1-c2-product",
        "product of the Helmholtz constants of the factorised Paneitz operator",
        rat(ni * (ni - 4) * (ni * ni - 4), 16),
        coeffs.c1.clone() * coeffs.c2.clone(),
        "einstein-paneitz-factorisation",
    ));
    checks.push(CheckRecord::exact(
        "linearized-l0",
        "linearized operator eigenvalue on constants",
        int(-4) * round.q,
        linearized_eigenvalue(0, n),
        "linearized-spectrum",
    ));
    checks.push(CheckRecord::exact(
        "linearized-l1",
        "linearized operator eigenvalue on first spherical harmonics",
        Rational::from_integer(0.into()),
        linearized_eigenvalue(1, n),
        "linearized-spectrum",
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disagreements = 0;
    for _ in 0..RANDOM_SPECTRA {
        let ric: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(-40..=40), rng.gen_range(1..=12))).collect();
        let lap = rat(rng.gen_range(-30..=30), rng.gen_range(1..=7));
        let (a, b) = q_two_forms(&ric, &lap, n)?;
        if a != b {
            disagreements += 1;
        }
    }
    checks.push(CheckRecord::exact(
        "q-two-forms",
        "Schouten and Ricci forms of Q disagree on this many random spectra",
        0,
        disagreements,
        "q-curvature-two-forms",
    ));

    let roots = bilaplacian_indicial_roots(n, INDICIAL_DEGREES);
    checks.push(CheckRecord::flag(
        "indicial-gap",
        "no indicial root of the flat bilaplacian in (4-n, 0)",
        roots.gap_is_empty,
        format!("{} distinct roots for l <= {INDICIAL_DEGREES}", roots.roots.len()),
        "indicial-root-gap",
    ));
    Ok(checks)
}

pub fn verify_green(n: usize, profile_csv: Option<&PathBuf>) -> Result<Vec<CheckRecord>> {
    let pair = paneitz_green_pair(n)?;
    let nf = n as f64;
    let (g, f) = (&pair.g, &pair.f);
    let (at, min_g) = g.min();
    let mut checks = vec![CheckRecord::flag(
        "green-positive",
        "G > 0 on the whole radial grid",
        min_g > 0.0,
        format!("min G = {} at r = {}", fmt_f64(min_g), fmt_f64(at)),
        "green-positivity",
    )];
    let fit = fit_leading_exponent(g, (1e-3, 1e-2))?;
    checks.push(CheckRecord::close(
        "green-leading-exponent",
        "log-log slope of G on [1e-3, 1e-2]",
        4.0 - nf,
        fit.slope,
        0.05,
        "green-pole-order",
    ));
    let norm_dev = f
        .r()
        .iter()
        .zip(f.values())
        .filter(|(r, _)| **r <= 1e-3)
        .map(|(r, v)| (v * r.powf(nf - 2.0) / (2.0 * (nf - 4.0)) - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(CheckRecord::below(
        "f-normalisation",
        "max |F r^(n-2) / (2(n-4)) - 1| for r <= 1e-3",
        norm_dev,
        1e-2,
        "green-normalisation",
    ));
    if n % 2 == 1 {
        let sub = fit_leading_exponent(&g.subleading(), (1e-3, 1e-2))?;
        checks.push(CheckRecord::close(
            "green-subleading-exponent",
            "log-log slope of G - r^(4-n) on [1e-3, 1e-2]",
            6.0 - nf,
            sub.slope,
            SLOPE_TOL,
            "green-expansion",
        ));
    }
    if let Some(path) = profile_csv {
        let rows =
            g.r().iter().zip(g.values()).zip(f.values()).map(|((r, gv), fv)| [r, gv, fv].map(|x| format!("{x:e}")));
        write_table(path, &["r", "G", "F"], rows)?;
    }
    Ok(checks)
}

pub fn neck_scaling(
    n: usize,
    b_list: &[Ratio<i64>],
    delta: f64,
    table_csv: Option<&PathBuf>,
) -> Result<Vec<CheckRecord>> {
    let bs: Vec<f64> = b_list.iter().map(|b| *b.numer() as f64 / *b.denom() as f64).collect();
    let neck = NeckMetric::round_default(n, GluingParams::coupled(bs[0])?);
    let sweep = scaling_sweep(&neck, &bs, delta)?;
    let s = &sweep.slopes;
    let checks = vec![
        CheckRecord::close(
            "neck-metric-derivative",
            "slope in b of sup |d(g_ab)| over the gluing annulus",
            1.0,
            s.phi_d1,
            SLOPE_TOL,
            "neck-error-derivative",
        ),
        CheckRecord::close(
            "neck-q-annulus",
            "slope in b of sup |Q(g_ab)| over the gluing annulus",
            -2.0,
            s.q_annulus,
            SLOPE_TOL,
            "neck-error-q-sup",
        ),
        CheckRecord::close(
            "neck-q-weighted",
            "slope in b of the weighted norm of Q(g_ab) - nu",
            2.0 - delta,
            s.q_weighted,
            SLOPE_TOL,
            "neck-error-weighted",
        ),
    ];
    if let Some(path) = table_csv {
        let label = |b: f64| {
            let i = bs.iter().position(|x| *x == b).expect("row b comes from the list");
            format!("{}/{}", b_list[i].numer(), b_list[i].denom())
        };
        let rows = sweep.long_rows().into_iter().map(|(b, q, v)| [label(b), q.to_string(), format!("{v:e}")]);
        write_table(path, &["b", "quantity", "value"], rows)?;
    }
    Ok(checks)
}

pub struct SolveArgs {
    pub n: usize,
    pub lmax: usize,
    pub tol: f64,
    pub amplitude: f64,
    pub mode: usize,
}

pub fn solve(args: &SolveArgs, trace_csv: Option<&PathBuf>) -> Result<Vec<CheckRecord>> {
    let mut config = SolverConfig::round(args.n, args.lmax)?;
    config.residual_tol = args.tol;
    config.validate()?;
    if args.mode > args.lmax {
        anyhow::bail!("--mode {} exceeds --lmax {}", args.mode, args.lmax);
    }
    let f = SpectralField::zonal_harmonic(args.n, args.lmax, args.mode).scale(args.amplitude);
    let (sol, trace) = match iterate(&config, &f) {
        Ok(r) => r,
        Err(
            e @ (QcurvError::NotContracting(_)
            | QcurvError::BallExit { .. }
            | QcurvError::NonPositiveConformalFactor { .. }),
        ) => {
            return Ok(vec![CheckRecord::flag(
                "solver-terminated",
                "fixed-point iteration ran to completion",
                false,
                e.to_string(),
                "contraction-mapping",
            )]);
        }
        Err(e) => return Err(e.into()),
    };
    let report = verify_solution(&sol, &config)?;
    let max_ratio = trace.max_ratio().unwrap_or(0.0);
    let checks = vec![
        CheckRecord::flag(
            "solver-converged",
            "residual fell below the tolerance within the iteration cap",
            sol.converged,
            format!("{} iterations", sol.iterations),
            "contraction-mapping",
        ),
        CheckRecord::below(
            "solver-residual",
            "sup |N[1 + phi]| at the last iterate",
            sol.residual,
            args.tol,
            "contraction-mapping",
        ),
        CheckRecord::below("solver-ratio", "largest successive update ratio", max_ratio, 0.5, "contraction-mapping"),
        CheckRecord::flag(
            "solver-positive-factor",
            "conformal factor stays positive",
            report.min_u > 0.0,
            format!("min u = {}", fmt_f64(report.min_u)),
            "contraction-mapping",
        ),
        CheckRecord::below(
            "solver-q-constant",
            "sup |Q - nu| recomputed from the solved conformal factor",
            report.q_deviation,
            10.0 * args.tol,
            "constant-q-solution",
        ),
    ];
    if let Some(path) = trace_csv {
        let rows = trace.records.iter().map(|r| {
            [
                r.iteration.to_string(),
                format!("{:e}", r.residual),
                r.ratio.map(|x| format!("{x:e}")).unwrap_or_default(),
                format!("{:e}", r.min_factor),
            ]
        });
        write_table(path, &["iteration", "residual", "ratio", "min_u"], rows)?;
    }
    Ok(checks)
}

//! The ten acceptance criteria, one PASS/FAIL line each. Exits non-zero if
//! any criterion fails or overruns its time budget.

use std::time::{Duration, Instant};

use num_traits::{ToPrimitive, Zero};
use qcurv::conformal_core::{
    bilaplacian_indicial_roots, conformal_covariance_residual, einstein_paneitz_coeffs, linearized_eigenvalue,
    NonlinearMapSpec,
};
use qcurv::exact_models::{
    curvature_scalars, int, product_family_window, product_schouten, q_two_forms, rat, EinsteinFactor, Rational,
    SchoutenSpectrum,
};
use qcurv::fit::fit_with_min;
use qcurv::green_paneitz::{fit_leading_exponent, helmholtz_radial_green, paneitz_green_pair, paneitz_radial_green};
use qcurv::neck_gluing::{
    default_b_list, fd_curvature, scaling_sweep, FlatMetric, GluingParams, NeckMetric, RoundSphereNormal,
};
use qcurv::solver::{iterate, lipschitz_ratio, remainder_scaling, verify_solution, SolverConfig};
use qcurv::sphere_spectral::{SpectralField, SphereVenue};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn product_family() -> Check {
    let s = curvature_scalars(&SchoutenSpectrum::product_family(6, 1, &rat(1, 10)).map_err(err)?).map_err(err)?;
    let eps = rat(1, 10);
    let (n, k) = (int(6), int(1));
    let r_closed = int(2) * (n.clone() - int(1)) * k.clone() * eps.clone();
    let q_closed = -k.clone() - int(2) * k.clone() * eps.clone() * eps.clone()
        + int(2) * k.clone() * eps.clone()
        + n / int(2) * k.clone() * k * eps.clone() * eps;
    if s.r != int(1) || s.q != rat(-79, 100) || s.r != r_closed || s.q != q_closed {
        return Err(format!("R = {}, Q = {}", s.r, s.q));
    }
    let mut windows = 0;
    let mut skipped = Vec::new();
    for k in 1..=5usize {
        for n in (2 * k + 1)..=12 {
            if n < 5 {
                // The Q formula needs n ≥ 5.
                skipped.push(format!("(n={n},k={k})"));
                continue;
            }
            let w = product_family_window(n, k).map_err(err)?;
            if !w.holds {
                return Err(format!("no window for n={n}, k={k}"));
            }
            windows += 1;
        }
    }
    Ok(format!("R = 1, Q = -79/100; {windows} windows certified; skipped {}", skipped.join(" ")))
}

fn einstein_identities() -> Check {
    for n in 5..=16usize {
        let c = einstein_paneitz_coeffs(n).map_err(err)?;
        let ni = n as i64;
        let round = product_schouten(&[EinsteinFactor::new(n, int(1))]).map_err(err)?;
        let q = curvature_scalars(&round).map_err(err)?.q;
        if q != rat(ni * (ni * ni - 4), 8) || c.q_value != q {
            return Err(format!("Q mismatch at n={n}"));
        }
        if c.c1.clone() * c.c2.clone() != rat(ni * (ni - 4) * (ni * ni - 4), 16) {
            return Err(format!("c1·c2 mismatch at n={n}"));
        }
    }
    for n in 6..=12usize {
        let q = rat(n as i64 * (n as i64 * n as i64 - 4), 8);
        if !linearized_eigenvalue(1, n).is_zero() || linearized_eigenvalue(0, n) != int(-4) * q {
            return Err(format!("linearized eigenvalues wrong at n={n}"));
        }
    }
    Ok("n = 5..16 exact; L eigenvalues 0 and -4Q for n = 6..12".into())
}

fn two_forms() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..200 {
        let n = rng.gen_range(6..=10usize);
        let ric: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(-40..=40), rng.gen_range(1..=12))).collect();
        let lap = rat(rng.gen_range(-30..=30), rng.gen_range(1..=7));
        let (a, b) = q_two_forms(&ric, &lap, n).map_err(err)?;
        if a != b {
            return Err(format!("trial {trial}: {a} ≠ {b}"));
        }
    }
    Ok("200 random spectra agree exactly".into())
}

fn green() -> Check {
    let pair = paneitz_green_pair(6).map_err(err)?;
    let positive = pair.g.values().iter().all(|v| *v > 0.0);
    let fit = fit_leading_exponent(&pair.g, (1e-3, 1e-2)).map_err(err)?;
    let f = helmholtz_radial_green(pair.c1, 6).map_err(err)?;
    let norm_dev = f
        .r()
        .iter()
        .zip(f.values())
        .filter(|(r, _)| **r <= 1e-3)
        .map(|(r, v)| (v * r.powi(4) / 4.0 - 1.0).abs())
        .fold(0.0, f64::max);
    let g7 = paneitz_radial_green(7).map_err(err)?;
    let sub = fit_leading_exponent(&g7.subleading(), (1e-3, 1e-2)).map_err(err)?;
    ensure(
        positive && (fit.slope + 2.0).abs() <= 0.05 && norm_dev < 1e-2 && (sub.slope + 1.0).abs() <= 0.3,
        format!(
            "G>0: {positive}; slope {:.4}; max|F r^4/4 - 1| = {norm_dev:.2e}; n=7 subleading slope {:.3}",
            fit.slope, sub.slope
        ),
    )
}

fn neck_sweep() -> Check {
    let neck = NeckMetric::round_default(6, GluingParams::coupled(1.0 / 32.0).map_err(err)?);
    let s = scaling_sweep(&neck, &default_b_list(), -0.5).map_err(err)?;
    let sl = &s.slopes;
    ensure(
        (sl.phi_d1 - 1.0).abs() <= 0.3 && (sl.q_annulus + 2.0).abs() <= 0.3 && (sl.q_weighted - 2.5).abs() <= 0.3,
        format!(
            "slopes: |φ'| {:.3}, sup|Q| {:.3}, ‖Q-ν‖ {:.3} (sup|Q_gN| sampled {:.2e})",
            sl.phi_d1, sl.q_annulus, sl.q_weighted, s.neck_q_sup
        ),
    )
}

fn fd_oracle() -> Check {
    let x = [0.2, -0.1, 0.15, 0.05, 0.1, -0.2];
    let exact = curvature_scalars(&product_schouten(&[EinsteinFactor::new(6, int(1))]).map_err(err)?).map_err(err)?;
    let (r_ex, q_ex) = (exact.r.to_f64().unwrap(), exact.q.to_f64().unwrap());
    let c = fd_curvature(&RoundSphereNormal(6), &x, 0.01).map_err(err)?;
    let flat = fd_curvature(&FlatMetric(6), &x, 0.01).map_err(err)?;
    let flat_max = [flat.scalar, flat.q, flat.lap_scalar, flat.ric_norm_sq, flat.ricci.amax()]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let y = [0.3, -0.2, 0.25, 0.1, 0.2, -0.3];
    let e = |h: f64| -> Result<f64, String> {
        Ok((fd_curvature(&RoundSphereNormal(6), &y, h).map_err(err)?.scalar - r_ex).abs())
    };
    let order = (e(0.08)? / e(0.04)?).log2();
    ensure(
        (c.scalar - r_ex).abs() < 1e-6 && (c.q - q_ex).abs() < 1e-4 && flat_max < 1e-10 && order >= 3.5,
        format!(
            "S^6: |R-30| = {:.1e}, |Q-24| = {:.1e}; flat max {:.1e}; order {order:.2}",
            (c.scalar - r_ex).abs(),
            (c.q - q_ex).abs(),
            flat_max
        ),
    )
}

fn solver_contraction() -> Check {
    let config = SolverConfig::round(6, 64).map_err(err)?;
    let f = SpectralField::zonal_harmonic(6, 64, 2).scale(1e-2);
    let (sol, trace) = iterate(&config, &f).map_err(err)?;
    let venue = SphereVenue::new(6, 64).map_err(err)?;
    let dev = venue.to_physical(&sol.u).iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    let ratio = trace.max_ratio().unwrap_or(0.0);
    let min_factor = trace.records.iter().map(|r| r.min_factor).fold(f64::INFINITY, f64::min);
    let report = verify_solution(&sol, &config).map_err(err)?;
    ensure(
        sol.converged && sol.iterations <= 20 && sol.residual < 1e-9 && dev < 1e-8 && ratio < 0.5 && min_factor > 0.0,
        format!(
            "{} iterations, residual {:.1e}, max|u-1| {dev:.1e}, max ratio {ratio:.3}, min(1+φ) {min_factor:.4}, sup|Q-24| {:.1e}",
            sol.iterations, sol.residual, report.q_deviation
        ),
    )
}

fn random_even_field(rng: &mut ChaCha8Rng, lmax: usize, top: usize, amp: f64) -> SpectralField {
    let coeffs = (0..=lmax)
        .map(|l| if l % 2 == 0 && l <= top { amp * rng.gen_range(-1.0..1.0) / (1 + l * l) as f64 } else { 0.0 })
        .collect();
    SpectralField::new(6, coeffs)
}

/// Uniform constant asserted for the Lipschitz inequality.
const LIPSCHITZ_C: f64 = 1.0;

fn quadratic_remainder() -> Check {
    let venue = SphereVenue::new(6, 32).map_err(err)?;
    let spec = NonlinearMapSpec::round(6).map_err(err)?;
    let phi = SpectralField::zonal_harmonic(6, 32, 2).add(&SpectralField::zonal_harmonic(6, 32, 4).scale(0.5));
    let pts = remainder_scaling(&venue, &spec, &phi, &[1e-1, 1e-2, 1e-3, 1e-4]).map_err(err)?;
    let (ts, qs): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let slope = fit_with_min(&ts, &qs, 0.0, 1.0, 4).map_err(err)?.slope;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let amp = 10f64.powf(rng.gen_range(-4.0..-2.0));
        let a = random_even_field(&mut rng, 32, 8, amp);
        let b = random_even_field(&mut rng, 32, 8, amp);
        worst = worst.max(lipschitz_ratio(&venue, &spec, &a, &b).map_err(err)?);
    }
    ensure(
        (slope - 2.0).abs() <= 0.1 && worst <= LIPSCHITZ_C,
        format!("slope {slope:.4}; max Lipschitz ratio {worst:.2e} ≤ C = {LIPSCHITZ_C}"),
    )
}

fn random_smooth_field(rng: &mut ChaCha8Rng, venue: &SphereVenue, amp: f64) -> SpectralField {
    let lmax = venue.lmax();
    let raw = SpectralField::new(6, (0..=lmax).map(|l| rng.gen_range(-1.0..1.0) * 0.7f64.powi(l as i32)).collect());
    raw.scale(amp / venue.sup(&raw))
}

fn covariance() -> Check {
    let venue = SphereVenue::new(6, 64).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let psi = SpectralField::constant(6, 64, 1.0).add(&random_smooth_field(&mut rng, &venue, 0.1));
        let u = random_smooth_field(&mut rng, &venue, 1.0);
        worst = worst.max(conformal_covariance_residual(&psi, &u).map_err(err)?);
    }
    ensure(worst < 1e-8, format!("max residual {worst:.2e} over 20 pairs"))
}

fn indicial() -> Check {
    for n in 6..=12 {
        let set = bilaplacian_indicial_roots(n, 24);
        if !set.gap_is_empty || set.roots.iter().any(|g| (4 - n as i64) < *g && *g < 0) {
            return Err(format!("root inside (4-n, 0) for n={n}"));
        }
    }
    Ok("no roots in (4-n, 0) for n = 6..12".into())
}

fn main() {
    let criteria: [(&str, u64, fn() -> Check); 10] = [
        ("product-family algebra", 1, product_family),
        ("Einstein Paneitz identities", 1, einstein_identities),
        ("two forms of Q", 5, two_forms),
        ("Green's function n=6,7", 30, green),
        ("neck scaling sweep", 300, neck_sweep),
        ("finite-difference curvature", 60, fd_oracle),
        ("solver contraction", 60, solver_contraction),
        ("quadratic remainder", 60, quadratic_remainder),
        ("conformal covariance", 30, covariance),
        ("indicial roots", 1, indicial),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*budget);
        let (ok, detail) = match result {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<30} {}  [{:.2}s / {}s] {}",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget,
            detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}

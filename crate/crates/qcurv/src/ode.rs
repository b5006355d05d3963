//! Dormand–Prince 5(4) with standard step-size control, stepping exactly
//! onto each requested abscissa.

use crate::error::{QcurvError, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-12, atol: 1e-300 }
    }
}

const MAX_STEPS: usize = 200_000;

/// Integrates `y' = f(x, y)` from `(x0, y0)` and returns the state at every
/// abscissa in `targets`, which must be increasing and ≥ `x0`.
pub(crate) fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    x0: f64,
    y0: [f64; N],
    targets: &[f64],
    tol: Tolerance,
) -> Result<Vec<[f64; N]>> {
    let mut out = Vec::with_capacity(targets.len());
    let (mut x, mut y) = (x0, y0);
    let mut h = targets.first().map_or(0.0, |t| (t - x0).abs() * 1e-3).max(1e-12 * x0.abs().max(1.0));
    let mut steps = 0;
    let mut k0 = f(x, &y);
    for &target in targets {
        if target < x {
            return Err(QcurvError::ShootingFailure(format!("target {target} behind {x}")));
        }
        while x < target {
            steps += 1;
            if steps > MAX_STEPS || !h.is_finite() || h <= 0.0 {
                return Err(QcurvError::ShootingFailure(format!("step control failed at x = {x}")));
            }
            let last = x + h >= target;
            let step = if last { target - x } else { h };
            let mut k = [[0.0; N]; 7];
            k[0] = k0;
            for s in 1..7 {
                let mut ys = y;
                for (i, yi) in ys.iter_mut().enumerate() {
                    *yi += step * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
                }
                k[s] = f(x + C[s] * step, &ys);
            }
            let mut y_new = y;
            let mut err = 0.0f64;
            for i in 0..N {
                y_new[i] += step * (0..7).map(|s| B[s] * k[s][i]).sum::<f64>();
                let e = step * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
                let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                h = step * 0.1;
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                x = if last { target } else { x + step };
                y = y_new;
                k0 = k[6];
                if !last || factor < 1.0 {
                    h = step * factor;
                }
            } else {
                h = step * factor;
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_over_a_period() {
        let pi2 = 2.0 * std::f64::consts::PI;
        let ys = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], &[pi2 / 4.0, pi2], Tolerance::default())
            .unwrap();
        assert!(ys[0][0].abs() < 1e-10 && (ys[0][1] + 1.0).abs() < 1e-10);
        assert!((ys[1][0] - 1.0).abs() < 1e-10 && ys[1][1].abs() < 1e-10);
    }

    #[test]
    fn steep_power_law() {
        // y = x^{-4} from x = 1e-4: eight decades of decay.
        let ys =
            integrate(|x, y: &[f64; 1]| [-4.0 * y[0] / x], 1e-4, [1e16], &[1e-2, 1.0], Tolerance::default()).unwrap();
        assert!((ys[0][0] / 1e8 - 1.0).abs() < 1e-10);
        assert!((ys[1][0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_backward_targets() {
        let r = integrate(|_, y: &[f64; 1]| [y[0]], 1.0, [1.0], &[0.5], Tolerance::default());
        assert!(matches!(r, Err(QcurvError::ShootingFailure(_))));
    }
}

//! Dormand–Prince 5(4) with embedded error control, specialised to complex
//! state vectors.

use num_complex::Complex64;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Step-size controller settings.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    /// Absolute and relative local-error tolerance.
    pub tolerance: f64,
    /// Largest step in the independent variable.
    pub max_step: f64,
    /// Largest tolerated `| ‖y‖ − 1 |` at any accepted step.
    pub norm_limit: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub max_norm_drift: f64,
}

fn norm(y: &[Complex64]) -> f64 {
    y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Integrates `dy/dx = f(x, y)` from `x0` to `x1` in place.
///
/// `f(x, y, out)` must overwrite `out`. The solution norm is checked after
/// every accepted step but never renormalized.
pub fn integrate<F>(
    mut f: F,
    y: &mut Vec<Complex64>,
    x0: f64,
    x1: f64,
    initial_step: f64,
    control: StepControl,
) -> Result<StepStats>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let dim = y.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut k = vec![vec![zero; dim]; 7];
    let mut tmp = vec![zero; dim];
    let mut y_new = vec![zero; dim];
    let mut stats = StepStats::default();

    let mut x = x0;
    let mut h = initial_step.min(control.max_step).min(x1 - x0);
    let min_step = (x1 - x0).abs() * 1e-14;
    f(x, y, &mut k[0]);

    while x < x1 {
        if x + h > x1 {
            h = x1 - x;
        }
        let stage = |tmp: &mut Vec<Complex64>, k: &[Vec<Complex64>], coeffs: &[f64]| {
            for i in 0..dim {
                let mut acc = zero;
                for (kj, &a) in k.iter().zip(coeffs) {
                    acc += kj[i] * a;
                }
                tmp[i] = y[i] + acc * h;
            }
        };

        stage(&mut tmp, &k[..1], &[A21]);
        f(x + C2 * h, &tmp, &mut k[1]);
        stage(&mut tmp, &k[..2], &[A31, A32]);
        f(x + C3 * h, &tmp, &mut k[2]);
        stage(&mut tmp, &k[..3], &[A41, A42, A43]);
        f(x + C4 * h, &tmp, &mut k[3]);
        stage(&mut tmp, &k[..4], &[A51, A52, A53, A54]);
        f(x + C5 * h, &tmp, &mut k[4]);
        stage(&mut tmp, &k[..5], &[A61, A62, A63, A64, A65]);
        f(x + h, &tmp, &mut k[5]);
        for i in 0..dim {
            y_new[i] = y[i] + (k[0][i] * B1 + k[2][i] * B3 + k[3][i] * B4 + k[4][i] * B5 + k[5][i] * B6) * h;
        }
        f(x + h, &y_new, &mut k[6]);

        let mut err_sq = 0.0;
        for i in 0..dim {
            let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * h;
            let scale = control.tolerance * (1.0 + y[i].norm().max(y_new[i].norm()));
            err_sq += e.norm_sqr() / (scale * scale);
        }
        let err = (err_sq / dim as f64).sqrt();

        if err <= 1.0 {
            x += h;
            std::mem::swap(y, &mut y_new);
            k.swap(0, 6);
            stats.accepted += 1;
            let drift = (norm(y) - 1.0).abs();
            stats.max_norm_drift = stats.max_norm_drift.max(drift);
            if drift > control.norm_limit {
                return Err(Error::Integration(format!(
                    "norm drift {drift:.3e} exceeds {:.1e} at x = {x:.6}",
                    control.norm_limit
                )));
            }
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * factor).min(control.max_step);
        if h < min_step && x < x1 {
            return Err(Error::Integration(format!("step size underflow at x = {x:.6}")));
        }
    }
    Ok(stats)
}

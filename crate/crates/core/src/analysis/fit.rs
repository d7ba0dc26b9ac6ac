//! Decaying-sinusoid and fringe-scan fits.
//!
//! Small dense Levenberg-Marquardt with analytic Jacobians. Parameter counts
//! are 4-5, so normal equations with partial-pivot elimination are exact
//! enough and keep the fitter dependency-free and deterministic.

use crate::{Error, Result};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-8;
const MAX_RESTARTS: usize = 5;

/// Result of a decaying-sinusoid fit
/// y = A·exp(−(τ/T)^p)·sin(2πf·τ + φ) to a mean-subtracted trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayFit {
    pub amplitude: f64,
    pub decay_time_s: f64,
    pub stretch_exponent: f64,
    pub frequency_hz: f64,
    pub phase_rad: f64,
    /// 1σ uncertainties in the same order: A, T, p, f, φ (p entry is 0 when
    /// p was fixed).
    pub uncertainties: [f64; 5],
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Quick envelope-based T estimate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnvelopeEstimate {
    pub decay_time_s: f64,
    /// Set when the envelope shows no measurable decay (slope ≈ 0); the
    /// decay time is +∞.
    pub undamped: bool,
}

/// Result of a sinusoid-with-offset fit to a fringe scan,
/// y = A·sin(ω·x + φ) + c, with the drive-voltage axis x.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FringeScanFit {
    pub angular_freq_per_volt: f64,
    pub amplitude: f64,
    pub phase_rad: f64,
    pub offset: f64,
    /// Fringe period in drive volts, 2π/ω.
    pub period_volts: f64,
    /// Calibration factor ΔB_fringe/period, T/V.
    pub kappa_tesla_per_volt: f64,
    pub residual_rms: f64,
    pub converged: bool,
}

/// Solve the square system a·x = b in place by Gaussian elimination with
/// partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Generic damped least squares over `params`, residual r_i = model_i − y_i.
/// `eval` fills residuals and the Jacobian (rows = points, cols = params).
fn levenberg_marquardt<F>(params: &mut [f64], n_points: usize, mut eval: F) -> (bool, usize, f64)
where
    F: FnMut(&[f64], &mut [f64], &mut [Vec<f64>]),
{
    let n_par = params.len();
    let mut residuals = vec![0.0; n_points];
    let mut jacobian = vec![vec![0.0; n_par]; n_points];
    let mut lambda = 1e-3;

    eval(params, &mut residuals, &mut jacobian);
    let mut cost: f64 = residuals.iter().map(|r| r * r).sum();

    for iteration in 1..=MAX_ITERATIONS {
        // normal equations JᵀJ + λ·diag(JᵀJ)
        let mut jtj = vec![vec![0.0; n_par]; n_par];
        let mut jtr = vec![0.0; n_par];
        for (row, r) in jacobian.iter().zip(&residuals) {
            for i in 0..n_par {
                jtr[i] += row[i] * r;
                for j in 0..n_par {
                    jtj[i][j] += row[i] * row[j];
                }
            }
        }
        let mut stepped = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for i in 0..n_par {
                a[i][i] += lambda * jtj[i][i].max(1e-30);
            }
            let mut rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let Some(delta) = solve_dense(&mut a, &mut rhs) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = params.iter().zip(&delta).map(|(p, d)| p + d).collect();
            let mut trial_res = vec![0.0; n_points];
            let mut trial_jac = vec![vec![0.0; n_par]; n_points];
            eval(&trial, &mut trial_res, &mut trial_jac);
            let trial_cost: f64 = trial_res.iter().map(|r| r * r).sum();
            if trial_cost.is_finite() && trial_cost <= cost {
                let rel_step = delta
                    .iter()
                    .zip(&trial)
                    .map(|(d, p)| (d / (p.abs() + 1e-12)).abs())
                    .fold(0.0, f64::max);
                params.copy_from_slice(&trial);
                residuals = trial_res;
                jacobian = trial_jac;
                cost = trial_cost;
                lambda = (lambda * 0.1).max(1e-14);
                stepped = true;
                if rel_step < STEP_TOLERANCE {
                    return (true, iteration, cost);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !stepped {
            // stuck at a (possibly good) minimum the damping cannot improve
            return (true, iteration, cost);
        }
    }
    (false, MAX_ITERATIONS, cost)
}

/// 1σ parameter uncertainties from the Jacobian at the solution.
fn uncertainties(jacobian: &[Vec<f64>], cost: f64, n_points: usize, n_par: usize) -> Vec<f64> {
    if n_points <= n_par {
        return vec![0.0; n_par];
    }
    let s2 = cost / (n_points - n_par) as f64;
    let mut jtj = vec![vec![0.0; n_par]; n_par];
    for row in jacobian {
        for i in 0..n_par {
            for j in 0..n_par {
                jtj[i][j] += row[i] * row[j];
            }
        }
    }
    // invert via n solves against unit vectors
    let mut out = vec![0.0; n_par];
    for i in 0..n_par {
        let mut a = jtj.clone();
        let mut e = vec![0.0; n_par];
        e[i] = 1.0;
        match solve_dense(&mut a, &mut e) {
            Some(col) => out[i] = (col[i].max(0.0) * s2).sqrt(),
            None => out[i] = 0.0,
        }
    }
    out
}

/// Peak of the trace's discrete spectrum: (frequency Hz, amplitude, phase).
fn spectral_seed(taus: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = ys.len();
    let dt = (taus[n - 1] - taus[0]) / (n as f64 - 1.0);
    let mut buf: Vec<Complex64> = ys.iter().map(|&y| Complex64::new(y, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mut best = 1;
    for k in 1..(n / 2 + 1).max(2).min(n) {
        if buf[k].norm() > buf[best].norm() {
            best = k;
        }
    }
    let freq = best as f64 / (n as f64 * dt);
    let amp = 2.0 * buf[best].norm() / n as f64;
    // y ~ A sin(2πf τ + φ); DFT of sin gives phase arg − π/2 relative offset
    let phase = buf[best].arg() + std::f64::consts::FRAC_PI_2 + TAU * freq * taus[0];
    (freq, amp, phase)
}

/// Fit a mean-subtracted decaying sinusoid. `fix_p` pins the stretch
/// exponent (protocol comparisons conventionally pin p = 1); `None` fits it.
///
/// Deterministic: frequency and amplitude seed from the spectral peak, the
/// decay time from the envelope estimate, p from 1, with up to 5 restarts at
/// jittered phase seeds.
pub fn fit_decaying_sinusoid(taus: &[f64], ys: &[f64], fix_p: Option<f64>) -> Result<DecayFit> {
    if taus.len() != ys.len() {
        return Err(Error::InvalidParameter("tau/signal length mismatch".into()));
    }
    if taus.len() < 6 {
        return Err(Error::InvalidParameter(format!(
            "need at least 6 points to fit, got {}",
            taus.len()
        )));
    }
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let y0: Vec<f64> = ys.iter().map(|y| y - mean).collect();

    let (f_seed, a_seed, phi_seed) = spectral_seed(taus, &y0);
    let t_seed = match envelope_t2star(taus, &y0) {
        Ok(e) if !e.undamped && e.decay_time_s.is_finite() => e.decay_time_s,
        _ => (taus[taus.len() - 1] - taus[0]).max(taus[taus.len() - 1]) / 2.0,
    };
    let p_seed = fix_p.unwrap_or(1.0);

    // The last parameter is a nuisance offset: mean subtraction of a trace
    // whose envelope has not fully decayed leaves a small residual constant
    // that would otherwise bias T.
    let fit_p = fix_p.is_none();
    let n_par = if fit_p { 6 } else { 5 };
    let n_points = taus.len();

    let eval = |params: &[f64], residuals: &mut [f64], jacobian: &mut [Vec<f64>]| {
        let (a, t, p) = (
            params[0],
            params[1].abs(),
            if fit_p { params[5].abs() } else { p_seed },
        );
        let (f, phi, c) = (params[2], params[3], params[4]);
        for (i, (&tau, &y)) in taus.iter().zip(&y0).enumerate() {
            let u = if tau > 0.0 { (tau / t).powf(p) } else { 0.0 };
            let envelope = (-u).exp();
            let theta = TAU * f * tau + phi;
            let (sin_t, cos_t) = theta.sin_cos();
            residuals[i] = a * envelope * sin_t + c - y;
            jacobian[i][0] = envelope * sin_t;
            jacobian[i][1] = a * envelope * sin_t * p * u / t;
            jacobian[i][2] = a * envelope * cos_t * TAU * tau;
            jacobian[i][3] = a * envelope * cos_t;
            jacobian[i][4] = 1.0;
            if fit_p {
                jacobian[i][5] = if tau > 0.0 && u > 0.0 {
                    -a * envelope * sin_t * u * (tau / t).ln()
                } else {
                    0.0
                };
            }
        }
    };

    let mut best: Option<(Vec<f64>, f64, bool, usize)> = None;
    for restart in 0..MAX_RESTARTS {
        let phi_try = phi_seed + restart as f64 * TAU / MAX_RESTARTS as f64;
        let mut params = vec![a_seed, t_seed, f_seed, phi_try, 0.0];
        if fit_p {
            params.push(p_seed);
        }
        let (converged, iterations, cost) = levenberg_marquardt(&mut params, n_points, eval);
        let better = match &best {
            Some((_, c, _, _)) => cost < *c,
            None => true,
        };
        if better {
            best = Some((params, cost, converged, iterations));
        }
        if converged
            && best.as_ref().is_some_and(|(_, c, _, _)| {
                // good absolute fit: residual under 1e-6 of signal power
                *c < 1e-12 * y0.iter().map(|y| y * y).sum::<f64>().max(1e-300)
            })
        {
            break;
        }
    }
    let (params, cost, converged, iterations) =
        best.ok_or_else(|| Error::FitDidNotConverge("no restart produced a fit".into()))?;
    if !converged {
        return Err(Error::FitDidNotConverge(format!(
            "no convergence after {MAX_ITERATIONS} iterations x {MAX_RESTARTS} restarts"
        )));
    }

    // Canonicalize: positive amplitude, phase in [0, 2π)
    let mut amplitude = params[0];
    let mut phase = params[3];
    if amplitude < 0.0 {
        amplitude = -amplitude;
        phase += std::f64::consts::PI;
    }
    phase = phase.rem_euclid(TAU);

    let mut residuals = vec![0.0; n_points];
    let mut jacobian = vec![vec![0.0; n_par]; n_points];
    eval(&params, &mut residuals, &mut jacobian);
    let sigmas = uncertainties(&jacobian, cost, n_points, n_par);

    let mut unc = [0.0; 5];
    unc[0] = sigmas[0];
    unc[1] = sigmas[1];
    unc[3] = sigmas[2];
    unc[4] = sigmas[3];
    if fit_p {
        unc[2] = sigmas[5];
    }
    Ok(DecayFit {
        amplitude,
        decay_time_s: params[1].abs(),
        stretch_exponent: if fit_p { params[5].abs() } else { p_seed },
        frequency_hz: params[2].abs(),
        phase_rad: phase,
        uncertainties: [unc[0], unc[1], unc[2], unc[3], unc[4]],
        residual_rms: (cost / n_points as f64).sqrt(),
        converged,
        iterations,
    })
}

/// Quick T estimate from the analytic-signal envelope: the trace is
/// mean-subtracted, Hilbert-transformed, and the log envelope is fit
/// linearly assuming p = 1. A monitor, looser than the full fit.
pub fn envelope_t2star(taus: &[f64], ys: &[f64]) -> Result<EnvelopeEstimate> {
    if taus.len() != ys.len() || taus.len() < 16 {
        return Err(Error::InvalidParameter(format!(
            "need at least 16 points, got {}",
            taus.len()
        )));
    }
    let n = ys.len();
    let mean = ys.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = ys.iter().map(|&y| Complex64::new(y - mean, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    // analytic signal: zero negative frequencies, double positive ones
    for (k, c) in buf.iter_mut().enumerate() {
        if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
            // DC and Nyquist unchanged
        } else if k < n.div_ceil(2) {
            *c *= 2.0;
        } else {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let envelope: Vec<f64> = buf.iter().map(|c| c.norm() / n as f64).collect();

    // Trim Hilbert edge artifacts and keep only the first two e-foldings:
    // the tail is ripple-dominated and biases the unweighted log fit.
    let skip = (n / 10).max(2);
    let max_env = envelope.iter().cloned().fold(0.0, f64::max);
    if max_env <= 0.0 {
        return Err(Error::InvalidParameter(
            "envelope is identically zero".into(),
        ));
    }
    let floor = (-2.0f64).exp() * max_env;
    let pts: Vec<(f64, f64)> = (skip..n - skip)
        .filter(|&i| envelope[i] > floor)
        .map(|i| (taus[i], envelope[i].ln()))
        .collect();
    if pts.len() < 8 {
        return Err(Error::InvalidParameter(
            "too few usable envelope points after trimming".into(),
        ));
    }
    // least-squares line ln(env) = b − τ/T
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);

    // an undamped trace has |slope|·span ≈ 0: less than ~5% decay overall
    let span = taus[n - 1] - taus[0];
    if slope >= 0.0 || (-slope) * span < 0.05 {
        return Ok(EnvelopeEstimate {
            decay_time_s: f64::INFINITY,
            undamped: true,
        });
    }
    Ok(EnvelopeEstimate {
        decay_time_s: -1.0 / slope,
        undamped: false,
    })
}

/// Fit a fringe scan (mean signal vs drive amplitude in volts) to a sinusoid
/// with additive offset and convert the fitted period to a calibration
/// factor using the known fringe spacing ΔB.
pub fn fit_fringe_scan(points: &[(f64, f64)], delta_b_fringe_tesla: f64) -> Result<FringeScanFit> {
    if points.len() < 8 {
        return Err(Error::InvalidParameter(format!(
            "need at least 8 scan points, got {}",
            points.len()
        )));
    }
    if !(delta_b_fringe_tesla > 0.0) {
        return Err(Error::InvalidParameter(
            "fringe spacing must be positive".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let span = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - xs.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(span > 0.0) {
        return Err(Error::InvalidParameter(
            "scan spans zero drive range".into(),
        ));
    }
    let offset_seed = ys.iter().sum::<f64>() / ys.len() as f64;
    let y0: Vec<f64> = ys.iter().map(|y| y - offset_seed).collect();
    let amp_seed = (ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ys.iter().cloned().fold(f64::INFINITY, f64::min))
        / 2.0;
    if amp_seed <= 0.0 || !amp_seed.is_finite() {
        return Err(Error::InvalidParameter(
            "scan has zero amplitude; period unidentifiable".into(),
        ));
    }
    let (f_seed, _, phi_seed) = spectral_seed(&xs, &y0);

    let n_points = points.len();
    let eval = |params: &[f64], residuals: &mut [f64], jacobian: &mut [Vec<f64>]| {
        let (a, w, phi, c) = (params[0], params[1], params[2], params[3]);
        for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
            let (sin_t, cos_t) = (w * x + phi).sin_cos();
            residuals[i] = a * sin_t + c - y;
            jacobian[i][0] = sin_t;
            jacobian[i][1] = a * cos_t * x;
            jacobian[i][2] = a * cos_t;
            jacobian[i][3] = 1.0;
        }
    };

    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for restart in 0..MAX_RESTARTS {
        let mut params = vec![
            amp_seed,
            TAU * f_seed,
            phi_seed + restart as f64 * TAU / MAX_RESTARTS as f64,
            offset_seed,
        ];
        let (converged, _, cost) = levenberg_marquardt(&mut params, n_points, eval);
        let better = match &best {
            Some((_, c, _)) => cost < *c,
            None => true,
        };
        if better {
            best = Some((params, cost, converged));
        }
    }
    let (params, cost, converged) =
        best.ok_or_else(|| Error::FitDidNotConverge("fringe scan fit failed".into()))?;
    if !converged {
        return Err(Error::FitDidNotConverge(
            "fringe scan fit did not converge".into(),
        ));
    }
    let mut amplitude = params[0];
    let mut omega = params[1];
    let mut phase = params[2];
    if omega < 0.0 {
        omega = -omega;
        phase = -phase;
        amplitude = -amplitude;
    }
    if amplitude < 0.0 {
        amplitude = -amplitude;
        phase += std::f64::consts::PI;
    }
    phase = phase.rem_euclid(TAU);
    if omega <= 0.0 {
        return Err(Error::FitDidNotConverge(
            "degenerate zero-frequency fit".into(),
        ));
    }
    let period = TAU / omega;
    if period > span * (1.0 + 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "scan spans {span:.3e} V, less than the fitted fringe period {period:.3e} V"
        )));
    }
    Ok(FringeScanFit {
        angular_freq_per_volt: omega,
        amplitude,
        phase_rad: phase,
        offset: params[3],
        period_volts: period,
        kappa_tesla_per_volt: delta_b_fringe_tesla / period,
        residual_rms: (cost / n_points as f64).sqrt(),
        converged,
    })
}

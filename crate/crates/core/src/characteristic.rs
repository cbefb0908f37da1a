//! Nevanlinna functions of the construction: proximity `m(r, f)`,
//! `m(r, 1/f)`, integrated counting functions, the characteristic
//! `T = m + N`, and least-squares estimates of the logarithmic order and the
//! logarithmic convergence exponent.
//!
//! Conjugate symmetry of `f` reduces every circle average to `[0, pi]`, and
//! `|f| >= 1` on the right half-plane puts `pi/2` at the only kink of `log+`.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::NeumaierSum;
use crate::product::{CirclePlan, ConstructionSpec};
use crate::quadrature::{integrate_pair, QuadSettings};

pub const MIN_FIT_SAMPLES: usize = 8;
pub const MIN_FIT_SPAN: f64 = 1.0;

/// A radius this close (in log units) to a singular modulus is rejected.
pub const SINGULAR_RADIUS_GUARD: f64 = 1e-9;
/// Grid points that collide with a singular modulus are moved out by this much.
pub const GRID_NUDGE: f64 = 1e-6;

pub const QUAD_MIN_PANELS: usize = 1 << 6;
pub const QUAD_MAX_INTERVALS: usize = 1 << 20;

/// Relative gap `|r - A_j| / r` below which geometric breakpoints are placed
/// around the nearby zero and pole.
const BREAKPOINT_GAP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Counted {
    Zeros,
    Poles,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicSample {
    pub log_r: f64,
    pub m_f: f64,
    #[serde(rename = "N_poles")]
    pub n_poles: f64,
    pub m_inv: f64,
    #[serde(rename = "N_zeros")]
    pub n_zeros: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub jensen_residual: f64,
}

impl CharacteristicSample {
    /// How far `T` exceeds a single counting function, relative to `T`.
    /// This is the part the growth inequality absorbs into `o(T)`.
    pub fn relative_excess(&self) -> f64 {
        (self.t - self.n_zeros) / self.t
    }

    /// Slack needed for `T <= N(r,0) + N(r,inf) + slack`.
    pub fn inequality_slack(&self) -> f64 {
        (self.t - self.n_zeros - self.n_poles).max(0.0)
    }
}

/// Rejects radii sitting on a zero/pole modulus.
pub fn check_radius(spec: &ConstructionSpec, log_r: f64) -> Result<()> {
    if !(log_r >= 0.0) || !log_r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "log r must be finite and non-negative, got {log_r}"
        )));
    }
    if let Some((index, log_a)) = colliding_modulus(spec, log_r) {
        return Err(Error::RadiusOnSingularity {
            log_r,
            index,
            log_a,
        });
    }
    Ok(())
}

fn colliding_modulus(spec: &ConstructionSpec, log_r: f64) -> Option<(u64, f64)> {
    let j = spec.last_index_at_or_below(log_r);
    [j, j + 1]
        .into_iter()
        .filter(|&k| k >= spec.start)
        .map(|k| (k, spec.log_a(k)))
        .find(|&(_, la)| (la - log_r).abs() < SINGULAR_RADIUS_GUARD)
}

/// `(m(r, f), m(r, 1/f))`, each with absolute error estimate at most `quad_tol`.
pub fn proximity_pair(spec: &ConstructionSpec, log_r: f64, quad_tol: f64) -> Result<(f64, f64)> {
    if !(quad_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "quad_tol must be positive, got {quad_tol}"
        )));
    }
    check_radius(spec, log_r)?;
    let plan = CirclePlan::new(spec, log_r);

    let mut breaks = vec![0.0, FRAC_PI_2, PI];
    if let Some((_, gap)) = plan.nearest_relative_gap() {
        if gap < BREAKPOINT_GAP {
            // log|f| peaks on a scale `gap` around the pole (theta = 0) and
            // the zero (theta = pi)
            let mut t = 0.25 * gap;
            while t < 0.5 * FRAC_PI_2 {
                breaks.push(t);
                breaks.push(PI - t);
                t *= 4.0;
            }
            breaks.sort_by(f64::total_cmp);
        }
    }
    // (1/pi) int_0^pi, so the raw tolerance is pi * quad_tol
    let settings = QuadSettings {
        tol: PI * quad_tol,
        min_panels: QUAD_MIN_PANELS,
        max_intervals: QUAD_MAX_INTERVALS,
    };
    let out = integrate_pair(
        |theta| {
            let l = plan.log_abs(theta);
            [l.max(0.0), (-l).max(0.0)]
        },
        &breaks,
        settings,
    )?;
    Ok((out.integral[0] / PI, out.integral[1] / PI))
}

/// `m(r, f) = (1/2pi) int log+ |f(r e^{i theta})| d theta`.
pub fn proximity(spec: &ConstructionSpec, log_r: f64, quad_tol: f64) -> Result<f64> {
    proximity_pair(spec, log_r, quad_tol).map(|(m, _)| m)
}

/// `N(r, .) = sum_{A_j <= r} log(r / A_j)`. Zeros and poles have the same
/// moduli, so both choices return the same value; `f(0) = 1` adds no origin term.
pub fn counting_integrated(spec: &ConstructionSpec, log_r: f64, which: Counted) -> Result<f64> {
    if !(log_r >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "log r must be non-negative, got {log_r}"
        )));
    }
    let _ = which;
    let top = spec.last_index_at_or_below(log_r);
    Ok((spec.start..=top)
        .map(|j| log_r - spec.log_a(j))
        .collect::<NeumaierSum>()
        .value())
}

pub fn characteristic(
    spec: &ConstructionSpec,
    log_r: f64,
    quad_tol: f64,
) -> Result<CharacteristicSample> {
    let (m_f, m_inv) = proximity_pair(spec, log_r, quad_tol)?;
    let n_poles = counting_integrated(spec, log_r, Counted::Poles)?;
    let n_zeros = counting_integrated(spec, log_r, Counted::Zeros)?;
    let t = m_f + n_poles;
    // log |f(0)| = 0
    let jensen_residual = (m_f - m_inv) + (n_poles - n_zeros);
    Ok(CharacteristicSample {
        log_r,
        m_f,
        n_poles,
        m_inv,
        n_zeros,
        t,
        jensen_residual,
    })
}

/// Geometric grid in `log r`, moving any point off a singular modulus by
/// [`GRID_NUDGE`].
pub fn radius_grid(
    spec: &ConstructionSpec,
    log_r_min: f64,
    log_r_max: f64,
    points: usize,
) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::InvalidArgument("radius grid is empty".into()));
    }
    if !(log_r_min > 0.0 && log_r_min.is_finite() && log_r_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "grid bounds must be finite with log_r_min > 0, got [{log_r_min}, {log_r_max}]"
        )));
    }
    if points > 1 && !(log_r_min < log_r_max) {
        return Err(Error::InvalidArgument(format!(
            "log_r_min must be below log_r_max, got [{log_r_min}, {log_r_max}]"
        )));
    }
    let ratio = (log_r_max / log_r_min).ln();
    Ok((0..points)
        .map(|k| {
            let l = if points == 1 {
                log_r_min
            } else if k + 1 == points {
                log_r_max
            } else {
                log_r_min * (ratio * k as f64 / (points - 1) as f64).exp()
            };
            if colliding_modulus(spec, l).is_some() {
                l + GRID_NUDGE
            } else {
                l
            }
        })
        .collect())
}

/// Samples over a grid; radii run in parallel, output keeps grid order.
pub fn characteristic_grid(
    spec: &ConstructionSpec,
    grid: &[f64],
    quad_tol: f64,
) -> Result<Vec<CharacteristicSample>> {
    grid.par_iter()
        .map(|&l| characteristic(spec, l, quad_tol))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    /// Least-squares slope of `log T` against `log log r`.
    pub lambda_hat: f64,
    pub intercept: f64,
    /// `(log_r_min, log_r_max)` of the fitted samples.
    pub window: (f64, f64),
    pub max_residual: f64,
    pub sample_count: usize,
    /// `log T / log log r` at the largest radius: the quantity whose limsup
    /// defines the order. Absent when `log log r <= 0` there.
    pub tail_ratio: Option<f64>,
}

pub fn log_order_fit(samples: &[CharacteristicSample]) -> Result<OrderFit> {
    let log_r: Vec<f64> = samples.iter().map(|s| s.log_r).collect();
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    log_order_fit_points(&log_r, &t)
}

/// Order fit from raw `(log r, T)` columns.
pub fn log_order_fit_points(log_r: &[f64], t: &[f64]) -> Result<OrderFit> {
    if log_r.len() != t.len() {
        return Err(Error::InvalidArgument(format!(
            "column lengths differ: {} log r values, {} T values",
            log_r.len(),
            t.len()
        )));
    }
    for (&l, &v) in log_r.iter().zip(t) {
        if !(v > 0.0) {
            return Err(Error::NonPositiveCharacteristic { log_r: l, t: v });
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "log r must be positive for log log r, got {l}"
            )));
        }
    }
    let x: Vec<f64> = log_r.iter().map(|l| l.ln()).collect();
    let y: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let span = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - x.iter().cloned().fold(f64::INFINITY, f64::min);
    if x.len() < MIN_FIT_SAMPLES || !(span >= MIN_FIT_SPAN) {
        return Err(Error::InsufficientSpan {
            samples: x.len(),
            span: if span.is_finite() { span } else { 0.0 },
            min_samples: MIN_FIT_SAMPLES,
            min_span: MIN_FIT_SPAN,
        });
    }
    let (slope, intercept) = least_squares(&x, &y);
    let max_residual = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| (yi - (intercept + slope * xi)).abs())
        .fold(0.0, f64::max);
    let (i_max, _) = log_r
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let tail_ratio = (x[i_max] > 0.0).then(|| y[i_max] / x[i_max]);
    let lo = log_r.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = log_r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(OrderFit {
        lambda_hat: slope,
        intercept,
        window: (lo, hi),
        max_residual,
        sample_count: x.len(),
        tail_ratio,
    })
}

/// Ordinary least squares `y = intercept + slope * x`, centered for accuracy.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().copied().collect::<NeumaierSum>().value() / n;
    let my = y.iter().copied().collect::<NeumaierSum>().value() / n;
    let mut sxy = NeumaierSum::new();
    let mut sxx = NeumaierSum::new();
    for (xi, yi) in x.iter().zip(y) {
        sxy.add((xi - mx) * (yi - my));
        sxx.add((xi - mx) * (xi - mx));
    }
    let slope = sxy.value() / sxx.value();
    (slope, my - slope * mx)
}

/// Slope of `log n(t)` against `log t`, where `n(t)` counts the schedule
/// indices `j >= 1` with `log A_j <= t`, sampled at `t = log A_j` for
/// `j = start..=j_max`.
pub fn log_convergence_exponent(spec: &ConstructionSpec, j_max: u64) -> Result<f64> {
    if j_max < spec.start + 8 {
        return Err(Error::InvalidArgument(format!(
            "j_max must be at least start + 8 = {}, got {j_max}",
            spec.start + 8
        )));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for j in spec.start..=j_max {
        let t = spec.log_a(j);
        let count = spec.last_index_at_or_below(t);
        x.push(t.ln());
        y.push((count as f64).ln());
    }
    Ok(least_squares(&x, &y).0)
}

/// Same estimate for an arbitrary increasing sequence of log-moduli
/// `log |a_1| <= log |a_2| <= ...`, counting from the first term.
pub fn log_convergence_exponent_of(log_moduli: &[f64]) -> Result<f64> {
    if log_moduli.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two log-moduli".into(),
        ));
    }
    if log_moduli.windows(2).any(|w| w[1] < w[0]) || !(log_moduli[0] > 0.0) {
        return Err(Error::InvalidArgument(
            "log-moduli must be positive and non-decreasing".into(),
        ));
    }
    let mut x = Vec::with_capacity(log_moduli.len());
    let mut y = Vec::with_capacity(log_moduli.len());
    for (i, &t) in log_moduli.iter().enumerate() {
        let count = log_moduli[i..].iter().take_while(|&&u| u <= t).count() + i;
        x.push(t.ln());
        y.push((count as f64).ln());
    }
    Ok(least_squares(&x, &y).0)
}

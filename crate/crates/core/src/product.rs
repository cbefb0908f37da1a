//! The infinite product `f(z) = prod_{j > n0} w_{A_j}(z)` with
//! `log A_j = j^p`, `p = 1/(lambda - 1)`.
//!
//! Values are sums of factor logarithms, accumulated in ascending index order
//! with Neumaier compensation, so results are bit-reproducible. The tail past
//! the truncation index is controlled by an explicit bound.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    compute_n0, disjointness_margin, exponent_for, moebius_of_ratio, DisjointnessCertificate,
};
use crate::logspace::{axis_exact_cos_sin, wrap_angle, LogComplex, NeumaierSum};

/// Scan windows tried in turn by [`ConstructionSpec::new`].
pub const SCAN_SCHEDULE: [u64; 4] = [10_000, 100_000, 1_000_000, 10_000_000];

/// `sum_{j > J} |log w_{A_j}(z)| <= TAIL_CONSTANT * |z| / A_{J+1}` once
/// `A_{J+1} >= 8 |z|`.
pub const TAIL_CONSTANT: f64 = 5.1;

/// `log 8`: the first neglected factor must satisfy `|z| / A_{J+1} <= 1/8`.
pub const TAIL_SAFETY_LOG: f64 = 2.0794415416798357;

/// Factors with `log A_j < log |z| - UNDERFLOW_GAP` equal `-1` to the last bit.
const UNDERFLOW_GAP: f64 = 800.0;

/// Factors within this log-distance of `|z|` are evaluated exactly on a circle;
/// the rest contribute `2 e^{-|d|} cos(theta)` with an error below `e^{-60}`.
const CIRCLE_NEAR_BAND: f64 = 20.0;

/// Number of indices past the start whose margin is re-checked when a spec is
/// loaded from disk.
const RELOAD_CHECK_WINDOW: u64 = 64;

/// The construction: `lambda`, `p`, the disjointness threshold and the first
/// index of the product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecFields")]
pub struct ConstructionSpec {
    pub lambda: f64,
    pub p: f64,
    pub n0: u64,
    pub start: u64,
}

#[derive(Deserialize)]
struct SpecFields {
    lambda: f64,
    p: f64,
    n0: u64,
    start: u64,
}

impl TryFrom<SpecFields> for ConstructionSpec {
    type Error = Error;

    fn try_from(raw: SpecFields) -> Result<Self> {
        let p = exponent_for(raw.lambda)?;
        if raw.p != p {
            return Err(Error::InvalidArgument(format!(
                "p = {} does not equal 1/(lambda - 1) = {p}",
                raw.p
            )));
        }
        if raw.n0 < 1 || raw.start != raw.n0 + 1 {
            return Err(Error::InvalidArgument(format!(
                "start must equal n0 + 1 with n0 >= 1 (n0 = {}, start = {})",
                raw.n0, raw.start
            )));
        }
        let spec = ConstructionSpec {
            lambda: raw.lambda,
            p,
            n0: raw.n0,
            start: raw.start,
        };
        for n in spec.start..spec.start + RELOAD_CHECK_WINDOW {
            if disjointness_margin(n, p) <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "disks {n} and {} overlap; n0 = {} is too small",
                    n + 1,
                    spec.n0
                )));
            }
        }
        Ok(spec)
    }
}

impl ConstructionSpec {
    /// Builds the construction, widening the disjointness scan until a
    /// certificate is found.
    pub fn new(lambda: f64) -> Result<Self> {
        Self::certified(lambda).map(|(spec, _)| spec)
    }

    pub fn certified(lambda: f64) -> Result<(Self, DisjointnessCertificate)> {
        exponent_for(lambda)?;
        let mut last_err = None;
        for &upper in &SCAN_SCHEDULE {
            match Self::with_scan_upper(lambda, upper) {
                Ok(found) => return Ok(found),
                Err(e @ Error::CertificateNotFound { .. }) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last_err.expect("scan schedule is non-empty"))
    }

    pub fn with_scan_upper(
        lambda: f64,
        scan_upper: u64,
    ) -> Result<(Self, DisjointnessCertificate)> {
        let cert = compute_n0(lambda, scan_upper)?;
        Ok((Self::from_certificate(&cert)?, cert))
    }

    pub fn from_certificate(cert: &DisjointnessCertificate) -> Result<Self> {
        let p = exponent_for(cert.lambda)?;
        Ok(ConstructionSpec {
            lambda: cert.lambda,
            p,
            n0: cert.n0,
            start: cert.n0 + 1,
        })
    }

    /// `log A_j = j^p`.
    #[inline]
    pub fn log_a(&self, j: u64) -> f64 {
        (j as f64).powf(self.p)
    }

    /// Largest `j >= 0` with `log A_j <= t` (over all `j >= 1`, ignoring `start`).
    pub fn last_index_at_or_below(&self, t: f64) -> u64 {
        if !(t >= 1.0) {
            return 0;
        }
        let mut j = t.powf(1.0 / self.p).floor() as u64;
        while self.log_a(j + 1) <= t {
            j += 1;
        }
        while j > 0 && self.log_a(j) > t {
            j -= 1;
        }
        j
    }

    /// Largest `j >= 0` with `log A_j < t`.
    pub fn last_index_below(&self, t: f64) -> u64 {
        if !(t > 1.0) {
            return 0;
        }
        let mut j = self.last_index_at_or_below(t);
        while j > 0 && self.log_a(j) >= t {
            j -= 1;
        }
        j
    }
}

/// Singular point kinds of `f`: zeros at `-A_j`, poles at `+A_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularityKind {
    Zero,
    Pole,
}

/// A zero or pole within log-polar distance 1 of the evaluation point.
///
/// The log-polar distance from `z` to `+-A_j` is
/// `hypot(log|z| - log A_j, arg z - arg(+-A_j))`, which is close to
/// `|z -+ A_j| / A_j` near the singular point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearSingularity {
    pub kind: SingularityKind,
    pub index: u64,
    pub log_distance: f64,
}

pub const NEAR_SINGULARITY_REPORT: f64 = 1.0;

/// Log-polar distance from `(log_abs_z, arg_z)` to the nearest of `+-A_j`.
pub fn singular_log_distance(log_abs_z: f64, arg_z: f64, log_a: f64) -> (SingularityKind, f64) {
    let d = log_abs_z - log_a;
    let to_pole = d.hypot(wrap_angle(arg_z));
    let to_zero = d.hypot(wrap_angle(arg_z - PI));
    if to_zero < to_pole {
        (SingularityKind::Zero, to_zero)
    } else {
        (SingularityKind::Pole, to_pole)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: LogComplex,
    pub truncation_index: u64,
    pub tail_bound: f64,
    pub nearest_singularity: Option<NearSingularity>,
}

/// `log w_{A_j}(z)` packed as a [`LogComplex`] equal to the factor value.
pub fn factor_log(j: u64, z: LogComplex, spec: &ConstructionSpec) -> Result<LogComplex> {
    if j < spec.start {
        return Err(Error::InvalidIndex {
            min: spec.start,
            got: j,
        });
    }
    Ok(crate::geometry::moebius(spec.log_a(j), z))
}

/// Smallest `J >= start` whose neglected tail is provably below `eps`, with
/// the bound `TAIL_CONSTANT * exp(log|z| - log A_{J+1})`.
pub fn truncation_index(spec: &ConstructionSpec, log_abs_z: f64, eps: f64) -> Result<(u64, f64)> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive and finite, got {eps}"
        )));
    }
    if log_abs_z == f64::NEG_INFINITY {
        return Ok((spec.start, 0.0));
    }
    if !log_abs_z.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "truncation needs a finite |z|, got log|z| = {log_abs_z}"
        )));
    }
    let needed = TAIL_SAFETY_LOG.max((TAIL_CONSTANT / eps).ln());
    let threshold = log_abs_z + needed;
    // J + 1 is the first index whose log A reaches the threshold
    let first_reaching = spec.last_index_below(threshold) + 1;
    let last = (first_reaching - 1).max(spec.start);
    Ok((last, tail_bound(spec, log_abs_z, last)))
}

/// Tail bound after truncating at `last`. Only meaningful when
/// `log A_{last+1} >= log|z| + log 8`; infinite otherwise.
pub fn tail_bound(spec: &ConstructionSpec, log_abs_z: f64, last: u64) -> f64 {
    if log_abs_z == f64::NEG_INFINITY {
        return 0.0;
    }
    let gap = spec.log_a(last + 1) - log_abs_z;
    if gap < TAIL_SAFETY_LOG {
        return f64::INFINITY;
    }
    TAIL_CONSTANT * (-gap).exp()
}

/// `f(z)` truncated so that the neglected tail is below `eps`.
pub fn evaluate(spec: &ConstructionSpec, z: LogComplex, eps: f64) -> Result<EvalResult> {
    let (last, bound) = truncation_index(spec, z.log_mag, eps)?;
    let (value, nearest) = evaluate_through(spec, z, last);
    Ok(EvalResult {
        value,
        truncation_index: last,
        tail_bound: bound,
        nearest_singularity: nearest,
    })
}

/// Partial product over `start..=last`.
///
/// Factors with `log A_j < log|z| - 800` are exactly `-1` in double precision
/// and are folded in through the parity of their count.
pub fn evaluate_through(
    spec: &ConstructionSpec,
    z: LogComplex,
    last: u64,
) -> (LogComplex, Option<NearSingularity>) {
    if z.is_zero() || last < spec.start {
        return (LogComplex::ONE, None);
    }
    if z.is_infinite() {
        let count = last + 1 - spec.start;
        let arg = if count % 2 == 1 { PI } else { 0.0 };
        return (LogComplex::new(0.0, arg), None);
    }
    let log_abs_z = z.log_mag;
    let phi = z.arg;

    let skip_end = spec.last_index_below(log_abs_z - UNDERFLOW_GAP).min(last);
    let skipped = skip_end.saturating_sub(spec.start - 1);
    let first = spec.start.max(skip_end + 1);

    let mut log_mag = NeumaierSum::new();
    let mut arg = NeumaierSum::new();
    let mut nearest: Option<NearSingularity> = None;
    for j in first..=last {
        let log_a = spec.log_a(j);
        let d = log_abs_z - log_a;
        if d.abs() < NEAR_SINGULARITY_REPORT {
            let (kind, dist) = singular_log_distance(log_abs_z, phi, log_a);
            if dist < NEAR_SINGULARITY_REPORT && nearest.is_none_or(|n| dist < n.log_distance) {
                nearest = Some(NearSingularity {
                    kind,
                    index: j,
                    log_distance: dist,
                });
            }
        }
        let w = moebius_of_ratio(d, phi);
        if w.is_zero() || w.is_infinite() {
            let kind = if w.is_zero() {
                SingularityKind::Zero
            } else {
                SingularityKind::Pole
            };
            let exact = Some(NearSingularity {
                kind,
                index: j,
                log_distance: 0.0,
            });
            return (w, exact);
        }
        log_mag.add(w.log_mag);
        arg.add(w.arg);
    }
    if skipped % 2 == 1 {
        arg.add(PI);
    }
    (LogComplex::new(log_mag.value(), arg.value()), nearest)
}

/// Zeros and poles of modulus at most `r`, by index and log-modulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularModuli {
    pub indices: Vec<u64>,
    pub zero_log_moduli: Vec<f64>,
    pub pole_log_moduli: Vec<f64>,
}

pub fn zeros_poles_up_to(spec: &ConstructionSpec, log_r: f64) -> Result<SingularModuli> {
    if !(log_r >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "log r must be non-negative, got {log_r}"
        )));
    }
    let top = spec.last_index_at_or_below(log_r);
    let indices: Vec<u64> = (spec.start..=top).collect();
    let moduli: Vec<f64> = indices.iter().map(|&j| spec.log_a(j)).collect();
    Ok(SingularModuli {
        indices,
        zero_log_moduli: moduli.clone(),
        pole_log_moduli: moduli,
    })
}

/// Number of poles (equivalently zeros) with `log A_j <= log_r`.
pub fn singular_count(spec: &ConstructionSpec, log_r: f64) -> u64 {
    spec.last_index_at_or_below(log_r)
        .saturating_sub(spec.start - 1)
}

/// `log |f(r e^{i theta})|` on a fixed circle, with the circle-independent
/// work hoisted out of the angular loop.
///
/// Factors far from the circle in log-modulus contribute
/// `2 e^{-|log r - log A_j|} cos(theta)` each; those are pre-summed.
#[derive(Debug, Clone)]
pub struct CirclePlan {
    log_r: f64,
    near_offsets: Vec<f64>,
    lumped: f64,
    nearest: Option<(u64, f64)>,
}

impl CirclePlan {
    pub fn new(spec: &ConstructionSpec, log_r: f64) -> Self {
        let first = spec
            .start
            .max(spec.last_index_below(log_r - UNDERFLOW_GAP) + 1);
        let last = spec
            .last_index_at_or_below(log_r + UNDERFLOW_GAP)
            .max(first);
        let mut near_offsets = Vec::new();
        let mut lumped = NeumaierSum::new();
        let mut nearest: Option<(u64, f64)> = None;
        for j in first..=last {
            let d = log_r - spec.log_a(j);
            if d.abs() <= CIRCLE_NEAR_BAND {
                near_offsets.push(d);
            } else {
                lumped.add((-d.abs()).exp());
            }
            if nearest.is_none_or(|(_, best)| d.abs() < best.abs()) {
                nearest = Some((j, d));
            }
        }
        CirclePlan {
            log_r,
            near_offsets,
            lumped: lumped.value(),
            nearest,
        }
    }

    pub fn log_r(&self) -> f64 {
        self.log_r
    }

    pub fn log_abs(&self, theta: f64) -> f64 {
        let (c, _) = axis_exact_cos_sin(theta);
        let mut acc = NeumaierSum::new();
        for &d in &self.near_offsets {
            acc.add(moebius_of_ratio(d, theta).log_mag);
        }
        acc.add(2.0 * c * self.lumped);
        acc.value()
    }

    /// `|r - A_j| / r` for the singular modulus closest to the circle.
    pub fn nearest_relative_gap(&self) -> Option<(u64, f64)> {
        self.nearest.map(|(j, d)| (j, (-d).exp_m1().abs()))
    }
}

//! Sampled evidence that no ray from the origin is a Julia direction.
//!
//! Directions with `|theta| <= pi/2` get a sector inside `{ |arg z| < 3pi/4 }`
//! where every value outside the `E` disks satisfies `|f| >= (1/3)/(n0+1)`.
//! Directions with `|theta| > pi/2` get a sector inside the open left
//! half-plane, where `|f| < 1`. In both cases a whole open set of values is
//! omitted on the sector.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{level_complement, moebius, EXCEPTIONAL_LEVEL};
use crate::logspace::{extended_real, wrap_angle, LogComplex};
use crate::product::{evaluate, singular_log_distance, ConstructionSpec};

/// Angular room kept between a small-disk sector and the `3pi/4` edge.
pub const SMALL_DISK_GUARD: f64 = FRAC_PI_4;

/// Samples closer than this (log-polar) to a zero or pole are not used.
pub const SINGULAR_EXCLUSION: f64 = 0.5;

/// Directions this close above `pi/2` stay in the small-disk regime.
const AXIS_TOLERANCE: f64 = 1e-12;

/// Something whose modulus can be sampled: the construction itself, or a
/// surrogate used to check that the scanner can fail.
pub trait ModulusField: Sync {
    fn log_abs(&self, z: LogComplex) -> f64;
}

/// `log |f|` of the construction, truncated at tolerance `eps`.
#[derive(Debug, Clone, Copy)]
pub struct ProductField<'a> {
    pub spec: &'a ConstructionSpec,
    pub eps: f64,
}

impl ModulusField for ProductField<'_> {
    fn log_abs(&self, z: LogComplex) -> f64 {
        evaluate(self.spec, z, self.eps)
            .map(|r| r.value.log_mag)
            .unwrap_or(f64::NAN)
    }
}

/// `tan z`: takes every finite value near the real axis, so it omits neither
/// a small disk nor the exterior of the unit disk.
#[derive(Debug, Clone, Copy, Default)]
pub struct TangentSurrogate;

impl ModulusField for TangentSurrogate {
    fn log_abs(&self, z: LogComplex) -> f64 {
        let Some((x, y)) = z.to_cartesian() else {
            return 0.0;
        };
        if (2.0 * y).abs() > 40.0 {
            // |tan z| = 1 + O(e^{-2|y|})
            return 0.0;
        }
        let (s2x, c2x) = (2.0 * x).sin_cos();
        let sh = (2.0 * y).sinh();
        let num = (s2x * s2x + sh * sh).sqrt();
        let den = c2x + (2.0 * y).cosh();
        (num / den).ln()
    }
}

/// Radius of the omitted disk about 0: the coarse `(1/3)/(n0+1)`, and the
/// sharper value from the telescoping product `prod_{n > n0} I_n = (n0+1)/(n0+2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmittedFloor {
    pub c_printed: f64,
    pub c_derived: f64,
}

pub fn omitted_floor(n0: u64) -> Result<OmittedFloor> {
    if n0 < 1 {
        return Err(Error::InvalidIndex { min: 1, got: n0 });
    }
    let n = n0 as f64;
    Ok(OmittedFloor {
        c_printed: (1.0 / 3.0) / (n + 1.0),
        c_derived: (1.0 / 3.0) * (n + 1.0) / (n + 2.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionalMembership {
    pub in_e_union: bool,
    pub f_index: Option<u64>,
}

/// Indices `n >= start` whose scheduled disk `F_n = { |w_{A_n}| < I_n }`
/// contains `z`. Only disks whose radial extent covers `|z|` are tested.
pub fn f_disk_indices(spec: &ConstructionSpec, z: LogComplex) -> Vec<u64> {
    if !z.is_finite_nonzero() || z.re_sign() >= 0 {
        return Vec::new();
    }
    let l = z.log_mag;
    let reach = |n: u64| {
        let nf = n as f64;
        (2.0 * nf * nf + 4.0 * nf + 1.0).ln() + 1e-9
    };
    let pivot = spec.last_index_at_or_below(l).max(spec.start);
    let mut candidates = Vec::new();
    let mut n = pivot;
    loop {
        if (spec.log_a(n) - l).abs() < reach(n) {
            candidates.push(n);
        }
        if n == spec.start || spec.log_a(n) + reach(n) < l {
            break;
        }
        n -= 1;
    }
    let mut n = pivot + 1;
    while spec.log_a(n) - reach(n) < l || n <= pivot + 2 {
        if (spec.log_a(n) - l).abs() < reach(n) {
            candidates.push(n);
        }
        n += 1;
    }
    candidates.sort_unstable();
    candidates
        .into_iter()
        .filter(|&n| moebius(spec.log_a(n), z).log_mag < (-level_complement(n)).ln_1p())
        .collect()
}

/// Membership in `union_n E_n` and the (at most one) `F` disk holding `z`.
pub fn in_exceptional(spec: &ConstructionSpec, z: LogComplex) -> ExceptionalMembership {
    let f_index = f_disk_indices(spec, z).first().copied();
    // E_n is inside F_n, so only the F index can hold an E membership
    let in_e_union =
        f_index.is_some_and(|n| moebius(spec.log_a(n), z).log_mag < EXCEPTIONAL_LEVEL.ln());
    ExceptionalMembership {
        in_e_union,
        f_index,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    OmitsSmallDisk,
    OmitsExterior,
}

/// Regime and sector half-width for a direction.
pub fn regime_for(theta: f64) -> Result<(Regime, f64)> {
    if !theta.is_finite() {
        return Err(Error::RegimeUnavailable(theta));
    }
    let t = wrap_angle(theta).abs();
    if t <= FRAC_PI_2 + AXIS_TOLERANCE {
        let eps = (0.5 * SMALL_DISK_GUARD).min(0.5 * (0.75 * PI - t));
        Ok((Regime::OmitsSmallDisk, eps))
    } else {
        let eps = 0.5 * (t - FRAC_PI_2);
        if !(eps > 0.0) {
            return Err(Error::RegimeUnavailable(theta));
        }
        Ok((Regime::OmitsExterior, eps))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub n_radii: usize,
    pub log_r_min: f64,
    pub log_r_max: f64,
    pub angles_per_radius: usize,
    pub seed: u64,
    pub eval_eps: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            n_radii: 64,
            log_r_min: 0.5,
            log_r_max: 500.0,
            angles_per_radius: 8,
            seed: 0,
            eval_eps: 1e-12,
        }
    }
}

impl ScanOptions {
    fn validate(&self) -> Result<()> {
        if self.n_radii < 16 {
            return Err(Error::InvalidArgument(format!(
                "a direction scan needs at least 16 radii, got {}",
                self.n_radii
            )));
        }
        if !(self.log_r_min > 0.0 && self.log_r_min < self.log_r_max && self.log_r_max.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "scan radii need 0 < log_r_min < log_r_max, got [{}, {}]",
                self.log_r_min, self.log_r_max
            )));
        }
        if self.angles_per_radius == 0 || !(self.eval_eps > 0.0) {
            return Err(Error::InvalidArgument(
                "angles_per_radius and eval_eps must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionReport {
    pub theta: f64,
    pub epsilon: f64,
    pub regime: Regime,
    /// `c_printed` for the small-disk regime, 1 for the exterior regime.
    pub bound_claimed: f64,
    pub log_bound: f64,
    #[serde(with = "extended_real")]
    pub log_min_abs_f: f64,
    #[serde(with = "extended_real")]
    pub log_max_abs_f: f64,
    pub samples: usize,
    pub skipped_near_singular: usize,
    pub exceptional_hits: Vec<u64>,
    pub violations: usize,
    pub seed: u64,
}

impl DirectionReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

fn near_singular(spec: &ConstructionSpec, z: LogComplex) -> bool {
    let j = spec.last_index_at_or_below(z.log_mag);
    [j, j + 1]
        .into_iter()
        .filter(|&k| k >= spec.start)
        .any(|k| singular_log_distance(z.log_mag, z.arg, spec.log_a(k)).1 < SINGULAR_EXCLUSION)
}

pub fn scan_direction(
    spec: &ConstructionSpec,
    theta: f64,
    n_radii: usize,
    log_r_max: f64,
) -> Result<DirectionReport> {
    let opts = ScanOptions {
        n_radii,
        log_r_max,
        ..ScanOptions::default()
    };
    scan_direction_with(
        &ProductField {
            spec,
            eps: opts.eval_eps,
        },
        spec,
        theta,
        &opts,
    )
}

/// Scans one sector about `theta` with `field` standing in for `|f|`; the
/// exclusion geometry (zeros, poles, `E` disks) always comes from `spec`.
pub fn scan_direction_with<F: ModulusField + ?Sized>(
    field: &F,
    spec: &ConstructionSpec,
    theta: f64,
    opts: &ScanOptions,
) -> Result<DirectionReport> {
    opts.validate()?;
    let (regime, epsilon) = regime_for(theta)?;
    let theta = wrap_angle(theta);
    let floor = omitted_floor(spec.n0)?;
    let (bound_claimed, log_bound) = match regime {
        Regime::OmitsSmallDisk => (floor.c_printed, floor.c_printed.ln()),
        Regime::OmitsExterior => (1.0, 0.0),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let step = (opts.log_r_max / opts.log_r_min).ln() / (opts.n_radii - 1) as f64;
    let mut report = DirectionReport {
        theta,
        epsilon,
        regime,
        bound_claimed,
        log_bound,
        log_min_abs_f: f64::INFINITY,
        log_max_abs_f: f64::NEG_INFINITY,
        samples: 0,
        skipped_near_singular: 0,
        exceptional_hits: Vec::new(),
        violations: 0,
        seed: opts.seed,
    };

    for k in 0..opts.n_radii {
        let base = opts.log_r_min * (step * k as f64).exp();
        for a in 0..opts.angles_per_radius {
            // draw both coordinates every time so the stream is position-stable
            let u_angle: f64 = rng.gen();
            let u_radius: f64 = rng.gen();
            let (log_r, arg) = if a == 0 {
                (base, theta)
            } else {
                (
                    base * (step * (u_radius - 0.5)).exp(),
                    theta + epsilon * (2.0 * u_angle - 1.0),
                )
            };
            let z = LogComplex::new(log_r, arg);
            if near_singular(spec, z) {
                report.skipped_near_singular += 1;
                continue;
            }
            if regime == Regime::OmitsSmallDisk {
                let m = in_exceptional(spec, z);
                if m.in_e_union {
                    if let Some(n) = m.f_index {
                        if !report.exceptional_hits.contains(&n) {
                            report.exceptional_hits.push(n);
                        }
                    }
                    continue;
                }
            }
            let v = field.log_abs(z);
            report.samples += 1;
            let ok = match regime {
                Regime::OmitsSmallDisk => v >= log_bound,
                Regime::OmitsExterior => v < 0.0,
            };
            if !ok {
                report.violations += 1;
            }
            if v.is_finite() || v.is_infinite() {
                report.log_min_abs_f = report.log_min_abs_f.min(v);
                report.log_max_abs_f = report.log_max_abs_f.max(v);
            }
        }
    }
    report.exceptional_hits.sort_unstable();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub directions: usize,
    pub violations: usize,
    pub failing_directions: usize,
    pub omits_small_disk: usize,
    pub omits_exterior: usize,
    pub total_samples: usize,
    pub log_c_printed: f64,
    pub log_c_derived: f64,
    /// Smallest `log |f|` over all small-disk sectors.
    #[serde(with = "extended_real")]
    pub log_min_small_disk: f64,
    /// Largest `log |f|` over all exterior sectors.
    #[serde(with = "extended_real")]
    pub log_max_exterior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullScan {
    pub reports: Vec<DirectionReport>,
    pub summary: ScanSummary,
}

/// Direction `k` of an `n`-point grid over `(-pi, pi]`.
pub fn direction_angle(k: usize, n: usize) -> f64 {
    wrap_angle(-PI + 2.0 * PI * (k + 1) as f64 / n as f64)
}

fn direction_seed(base: u64, k: usize) -> u64 {
    // splitmix64 step
    let mut x = base.wrapping_add((k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn full_scan(
    spec: &ConstructionSpec,
    n_directions: usize,
    n_radii: usize,
    log_r_max: f64,
) -> Result<FullScan> {
    let opts = ScanOptions {
        n_radii,
        log_r_max,
        ..ScanOptions::default()
    };
    full_scan_with(
        &ProductField {
            spec,
            eps: opts.eval_eps,
        },
        spec,
        n_directions,
        &opts,
    )
}

/// Scans `n_directions` evenly spaced directions; runs in parallel and
/// merges in direction order.
pub fn full_scan_with<F: ModulusField + ?Sized>(
    field: &F,
    spec: &ConstructionSpec,
    n_directions: usize,
    opts: &ScanOptions,
) -> Result<FullScan> {
    if n_directions < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 directions, got {n_directions}"
        )));
    }
    let reports: Vec<DirectionReport> = (0..n_directions)
        .into_par_iter()
        .map(|k| {
            let o = ScanOptions {
                seed: direction_seed(opts.seed, k),
                ..*opts
            };
            scan_direction_with(field, spec, direction_angle(k, n_directions), &o)
        })
        .collect::<Result<_>>()?;

    let floor = omitted_floor(spec.n0)?;
    let summary = ScanSummary {
        directions: reports.len(),
        violations: reports.iter().map(|r| r.violations).sum(),
        failing_directions: reports.iter().filter(|r| !r.holds()).count(),
        omits_small_disk: reports
            .iter()
            .filter(|r| r.regime == Regime::OmitsSmallDisk)
            .count(),
        omits_exterior: reports
            .iter()
            .filter(|r| r.regime == Regime::OmitsExterior)
            .count(),
        total_samples: reports.iter().map(|r| r.samples).sum(),
        log_c_printed: floor.c_printed.ln(),
        log_c_derived: floor.c_derived.ln(),
        log_min_small_disk: reports
            .iter()
            .filter(|r| r.regime == Regime::OmitsSmallDisk)
            .map(|r| r.log_min_abs_f)
            .fold(f64::INFINITY, f64::min),
        log_max_exterior: reports
            .iter()
            .filter(|r| r.regime == Regime::OmitsExterior)
            .map(|r| r.log_max_abs_f)
            .fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(FullScan { reports, summary })
}

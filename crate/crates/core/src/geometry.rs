//! The factor maps `w_a(z) = (a + z) / (a - z)` for real `a > 0`, their
//! sublevel disks `{ |w_a(z)| < K }`, the level schedule used by the
//! construction and the finite certificate that those disks are disjoint.
//!
//! Every `a` enters as `log a`. Disk quantities are stored as ratios to `a`,
//! which makes them independent of the size of `a`.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::{axis_exact_cos_sin, wrap_angle, LogComplex};

/// Level of the exceptional disks `E_n`.
pub const EXCEPTIONAL_LEVEL: f64 = 1.0 / 3.0;

/// Beyond this distance in `log |z| - log a`, the factor is evaluated from its
/// first-order expansion. Both exact-formula inputs stay representable inside it.
pub const ASYMPTOTIC_SWITCH: f64 = 500.0;

/// `w_a(z)` for `a = exp(log_alpha)`.
///
/// Exact pole at `z = a` (`log_mag = +inf`) and exact zero at `z = -a`
/// (`log_mag = -inf`).
pub fn moebius(log_alpha: f64, z: LogComplex) -> LogComplex {
    if z.is_zero() {
        return LogComplex::ONE;
    }
    if z.is_infinite() {
        return LogComplex::new(0.0, PI);
    }
    moebius_of_ratio(z.log_mag - log_alpha, z.arg)
}

/// `(1 + u) / (1 - u)` for `u = exp(d + i phi)`.
pub(crate) fn moebius_of_ratio(d: f64, phi: f64) -> LogComplex {
    if d == 0.0 && phi == 0.0 {
        return LogComplex::INFINITY;
    }
    if d == 0.0 && phi == PI {
        return LogComplex::ZERO;
    }
    if d <= 0.0 {
        let (log_mag, arg) = unit_disk_log_moebius(d, phi);
        LogComplex::new(log_mag, arg)
    } else {
        // (1+u)/(1-u) = -(1+v)/(1-v) with v = 1/u
        let (log_mag, arg) = unit_disk_log_moebius(-d, wrap_angle(-phi));
        LogComplex::new(log_mag, PI + arg)
    }
}

/// `log (1+w)/(1-w)` as `(real, imaginary)` for `w = exp(d + i phi)`, `d <= 0`.
fn unit_disk_log_moebius(d: f64, phi: f64) -> (f64, f64) {
    let (c, s) = axis_exact_cos_sin(phi);
    if d < -ASYMPTOTIC_SWITCH {
        // no quadratic term in 2 atanh(w); the cubic one is below e^-1000
        let m = 2.0 * d.exp();
        return (m * c, m * s);
    }
    let ed = d.exp();
    let em1 = d.exp_m1();
    let im_sq = (ed * s) * (ed * s);

    // |1 - w|^2 and |1 + w|^2 through expm1 so neither cancels near w = +-1
    let one_minus_cos = if c <= 0.0 {
        1.0 - c
    } else {
        let h = (0.5 * phi).sin();
        2.0 * h * h
    };
    let one_plus_cos = if c >= 0.0 {
        1.0 + c
    } else {
        let h = (0.5 * phi).cos();
        2.0 * h * h
    };
    let re_minus = em1 * c - one_minus_cos;
    let re_plus = -em1 * c - one_plus_cos;
    let minus_sq = re_minus * re_minus + im_sq;

    // |1+w|^2 / |1-w|^2 = 1 + 4 Re w / |1-w|^2, whose sign is exactly sign(Re w)
    let x = 4.0 * ed * c / minus_sq;
    let log_mag = if x >= -0.5 {
        0.5 * x.ln_1p()
    } else {
        let plus_sq = re_plus * re_plus + im_sq;
        0.5 * (plus_sq.ln() - minus_sq.ln())
    };
    // arg (1+w)(1-conj w) = arg(1 - |w|^2 + 2i Im w)
    let arg = (2.0 * ed * s).atan2(-(2.0 * d).exp_m1());
    (log_mag, arg)
}

/// Where `|w_a(z)|` sits relative to 1, read off the sign of `Re z` alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfPlaneClass {
    InsideUnit,
    OnUnit,
    OutsideUnit,
}

pub fn half_plane_class(z: LogComplex) -> HalfPlaneClass {
    if z.is_infinite() {
        // w_a(inf) = -1
        return HalfPlaneClass::OnUnit;
    }
    match z.re_sign() {
        -1 => HalfPlaneClass::InsideUnit,
        0 => HalfPlaneClass::OnUnit,
        _ => HalfPlaneClass::OutsideUnit,
    }
}

/// The disk `{ z : |w_a(z)| < K }`, which for `0 < K < 1` is a Euclidean disk
/// symmetric about the real axis in the open left half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelDisk {
    pub log_alpha: f64,
    pub level: f64,
    pub center_ratio: f64,
    pub radius_ratio: f64,
    pub near_ratio: f64,
    pub far_ratio: f64,
}

impl LevelDisk {
    pub fn new(log_alpha: f64, level: f64) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::InvalidLevel(level));
        }
        Ok(Self::with_complement(log_alpha, level, 1.0 - level))
    }

    /// Disk at the scheduled level `I_n`, using the exact complement
    /// `1 - I_n = 1/(n+1)^2` instead of a rounded subtraction.
    pub fn scheduled(log_alpha: f64, n: u64) -> Result<Self> {
        let level = level_schedule(n)?;
        Ok(Self::with_complement(log_alpha, level, level_complement(n)))
    }

    /// `E`-type disk at the level 1/3.
    pub fn exceptional(log_alpha: f64) -> Self {
        Self::with_complement(log_alpha, EXCEPTIONAL_LEVEL, 2.0 / 3.0)
    }

    fn with_complement(log_alpha: f64, k: f64, one_minus_k: f64) -> Self {
        let one_plus_k = 1.0 + k;
        let denom = one_minus_k * one_plus_k;
        LevelDisk {
            log_alpha,
            level: k,
            center_ratio: -(1.0 + k * k) / denom,
            radius_ratio: 2.0 * k / denom,
            near_ratio: -one_minus_k / one_plus_k,
            far_ratio: -one_plus_k / one_minus_k,
        }
    }

    /// `log |X_a(K)|`, the log-modulus of the boundary point nearest the origin.
    pub fn log_near_abs(&self) -> f64 {
        self.log_alpha + (-self.near_ratio).ln()
    }

    /// `log |chi_a(K)|`, the farthest boundary point on the axis.
    pub fn log_far_abs(&self) -> f64 {
        self.log_alpha + (-self.far_ratio).ln()
    }

    pub fn sector_half_angle(&self) -> f64 {
        sector_half_angle_unchecked(self.level)
    }

    /// Boundary point `a (center + radius e^{i psi})`.
    pub fn boundary_point(&self, psi: f64) -> LogComplex {
        self.offset_point(1.0, psi)
    }

    pub fn center(&self) -> LogComplex {
        LogComplex::from_real(self.center_ratio).scale_log(self.log_alpha)
    }

    /// `a (center + scale * radius * e^{i psi})`; `scale < 1` is inside.
    pub fn offset_point(&self, scale: f64, psi: f64) -> LogComplex {
        let (c, s) = (psi.cos(), psi.sin());
        let re = self.center_ratio + scale * self.radius_ratio * c;
        let im = scale * self.radius_ratio * s;
        LogComplex::from_cartesian(re, im).scale_log(self.log_alpha)
    }

    /// Strict interior membership through the Euclidean description of the disk.
    pub fn contains(&self, z: LogComplex) -> bool {
        if z.is_zero() || z.is_infinite() {
            return false;
        }
        let d = z.log_mag - self.log_alpha;
        // the disk sits between near and far, both of moderate size relative to a
        if d < (-self.near_ratio).ln() - 1.0 || d > (-self.far_ratio).ln() + 1.0 {
            return false;
        }
        let m = d.exp();
        let (c, s) = axis_exact_cos_sin(z.arg);
        let dx = m * c - self.center_ratio;
        let dy = m * s;
        dx * dx + dy * dy < self.radius_ratio * self.radius_ratio
    }

    /// Membership through `|w_a(z)| < K` directly.
    pub fn contains_by_level(&self, z: LogComplex) -> bool {
        moebius(self.log_alpha, z).log_mag < self.level.ln()
    }
}

/// `I_n = n(n+2)/(n+1)^2`, strictly increasing towards 1.
pub fn level_schedule(n: u64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidIndex { min: 1, got: n });
    }
    let nf = n as f64;
    Ok(nf * (nf + 2.0) / ((nf + 1.0) * (nf + 1.0)))
}

/// `1 - I_n = 1/(n+1)^2`.
pub fn level_complement(n: u64) -> f64 {
    let m = n as f64 + 1.0;
    1.0 / (m * m)
}

/// Half-angle of the narrowest sector about the negative real axis that
/// contains `{ |w_a| < K }`; independent of `a`.
pub fn sector_half_angle(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidLevel(level));
    }
    Ok(sector_half_angle_unchecked(level))
}

fn sector_half_angle_unchecked(k: f64) -> f64 {
    (2.0 * k / (1.0 + k * k)).asin()
}

/// The quarter-sector bound that the `E` disks must respect.
pub const QUARTER_SECTOR: f64 = FRAC_PI_4;

/// `p = 1/(lambda - 1)` after range validation.
pub fn exponent_for(lambda: f64) -> Result<f64> {
    if !(lambda > 1.0 && lambda < 2.0) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    Ok(1.0 / (lambda - 1.0))
}

/// `(n+1)^p - n^p` without cancellation.
pub(crate) fn schedule_gap(n: u64, p: f64) -> f64 {
    let nf = n as f64;
    nf.powf(p) * (p * (1.0 / nf).ln_1p()).exp_m1()
}

/// Gap between the far point of `F_n` and the near point of `F_{n+1}` in log
/// units: `(n+1)^p - n^p - log((2n^2+4n+1)(2n^2+8n+7))`.
pub fn disjointness_margin(n: u64, p: f64) -> f64 {
    let nf = n as f64;
    let lower = 2.0 * nf * nf + 4.0 * nf + 1.0;
    let upper = 2.0 * nf * nf + 8.0 * nf + 7.0;
    schedule_gap(n, p) - lower.ln() - upper.ln()
}

/// Whether `F_{n+1}` lies strictly to the left of `F_n`, with the margin.
pub fn disjointness_holds(n: u64, lambda: f64) -> Result<(bool, f64)> {
    let p = exponent_for(lambda)?;
    if n < 1 {
        return Err(Error::InvalidIndex { min: 1, got: n });
    }
    let g = disjointness_margin(n, p);
    Ok((g > 0.0, g))
}

/// Finite evidence for the disjointness threshold: positive margin on the
/// scanned window past `n0`, and a margin that is strictly increasing from
/// `monotone_from` to the end of the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisjointnessCertificate {
    pub lambda: f64,
    pub n0: u64,
    pub scan_upper: u64,
    pub margin_window: Vec<(u64, f64)>,
    pub monotone_from: u64,
}

impl DisjointnessCertificate {
    /// Re-checks the recorded claims against a fresh scan.
    pub fn verify(&self) -> bool {
        let Ok(p) = exponent_for(self.lambda) else {
            return false;
        };
        let mut prev = disjointness_margin(self.n0.max(1), p);
        for n in (self.n0 + 1)..=self.scan_upper {
            let g = disjointness_margin(n, p);
            if g <= 0.0 {
                return false;
            }
            if n > self.monotone_from && g <= prev {
                return false;
            }
            prev = g;
        }
        self.margin_window
            .iter()
            .all(|&(n, g)| disjointness_margin(n, p) == g)
    }
}

/// Smallest `n0 >= 1` such that the scheduled disks `F_n`, `n > n0`, are
/// pairwise disjoint on `(n0, scan_upper]` with an increasing margin tail.
pub fn compute_n0(lambda: f64, scan_upper: u64) -> Result<DisjointnessCertificate> {
    let p = exponent_for(lambda)?;
    if scan_upper < 2 {
        return Err(Error::InvalidArgument(format!(
            "scan_upper must be at least 2, got {scan_upper}"
        )));
    }
    let mut last_fail = 0u64;
    let mut last_non_increase = 0u64;
    let mut prev = disjointness_margin(1, p);
    if prev <= 0.0 {
        last_fail = 1;
    }
    for n in 2..=scan_upper {
        let g = disjointness_margin(n, p);
        if g <= 0.0 {
            last_fail = n;
        }
        if g <= prev {
            last_non_increase = n - 1;
        }
        prev = g;
    }
    let monotone_from = last_non_increase + 1;
    if last_fail >= scan_upper || monotone_from >= scan_upper {
        return Err(Error::CertificateNotFound { lambda, scan_upper });
    }
    let n0 = last_fail.max(1);

    let lo = n0.saturating_sub(3).max(1);
    let hi = (n0 + 16).min(scan_upper);
    let mut margin_window: Vec<(u64, f64)> =
        (lo..=hi).map(|n| (n, disjointness_margin(n, p))).collect();
    let tail_lo = scan_upper.saturating_sub(2).max(hi + 1);
    margin_window.extend((tail_lo..=scan_upper).map(|n| (n, disjointness_margin(n, p))));

    Ok(DisjointnessCertificate {
        lambda,
        n0,
        scan_upper,
        margin_window,
        monotone_from,
    })
}

//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::{FRAC_PI_4, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nojulia::characteristic::{
    characteristic_grid, counting_integrated, log_convergence_exponent, radius_grid, Counted,
};
use nojulia::cli::{read_characteristic_columns, ConstructionFile};
use nojulia::geometry::{moebius, LevelDisk};
use nojulia::logspace::{wrap_angle, LogComplex};
use nojulia::product::{evaluate, evaluate_through, ConstructionSpec};
use nojulia::scanner::regime_for;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const THRESHOLD_RUNTIME_S: f64 = 1.0;
const THRESHOLD_SCAN_TO: u64 = 10_000;

const GEOMETRY_DISKS: usize = 1_000;
const GEOMETRY_BOUNDARY_PER_DISK: usize = 16;
const GEOMETRY_TOL: f64 = 1e-10;

const SECTOR_BOUNDARY_SAMPLES: usize = 4_096;
const SECTOR_MARGIN: f64 = 0.05;

const HALF_PLANE_SAMPLES: usize = 10_000;
const SINGULAR_EXCLUSION: f64 = 0.5;

const FLOOR_SAMPLES: usize = 10_000;
const FLOOR_PRINTED: f64 = 1.0 / 12.0;
const FLOOR_DERIVED: f64 = 4.0 / 15.0;

const QUAD_TOL: f64 = 1e-6;
const JENSEN_TOL: f64 = 2.0 * QUAD_TOL;
const JENSEN_RUNTIME_S: f64 = 120.0;
const PROXIMITY_CROSS_CHECK_TOL: f64 = 1e-4;

const COUNTING_RADII: usize = 20;
const COUNTING_REL_TOL: f64 = 1e-10;

const ORDER_TOL: f64 = 0.10;
const ORDER_STRETCH_TOL: f64 = 0.15;
const ORDER_RUNTIME_S: f64 = 600.0;

const EXPONENT_TOL: f64 = 0.05;
const EXPONENT_J_MAX: u64 = 100_000;

const TRUNCATION_CASES: usize = 100;
const TRUNCATION_DEEPEN: u64 = 20;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_nojulia")
}

fn spec(lambda: f64) -> ConstructionSpec {
    ConstructionSpec::new(lambda).expect("construction exists")
}

/// Log-polar distance from `z` to the nearest `+-A_j`, scanning indices
/// around `log|z|` directly.
fn singular_distance(s: &ConstructionSpec, z: LogComplex) -> f64 {
    let mut best = f64::INFINITY;
    let centre = z.log_mag.max(0.0).powf(1.0 / s.p).floor() as u64;
    for j in centre.saturating_sub(2).max(s.start)..=centre + 2 {
        let d = z.log_mag - (j as f64).powf(s.p);
        best = best
            .min(d.hypot(wrap_angle(z.arg)))
            .min(d.hypot(wrap_angle(z.arg - PI)));
    }
    best
}

/// Brute-force membership of `z` in some `E_n`, in Cartesian ratio
/// coordinates `u = z / A_n`.
fn in_some_e_disk(s: &ConstructionSpec, z: LogComplex) -> bool {
    let top = z.log_mag.max(0.0).powf(1.0 / s.p).ceil() as u64 + 3;
    (s.start..=top).any(|n| {
        let d = z.log_mag - (n as f64).powf(s.p);
        if d.abs() > 30.0 {
            return false;
        }
        let (ur, ui) = (d.exp() * z.arg.cos(), d.exp() * z.arg.sin());
        let num = (1.0 + ur).hypot(ui);
        let den = (1.0 - ur).hypot(ui);
        num < den / 3.0
    })
}

fn threshold() -> Verdict {
    let t0 = Instant::now();
    let out = Command::new(bin())
        .args(["construct", "--lambda", "1.5"])
        .output()
        .expect("binary runs");
    let elapsed = t0.elapsed().as_secs_f64();
    let file: ConstructionFile = match serde_json::from_slice(&out.stdout) {
        Ok(f) => f,
        Err(e) => return verdict(false, format!("unreadable construct output: {e}")),
    };
    // p = 2: g(n) = 2n + 1 - ln(2n^2 + 4n + 1) - ln(2n^2 + 8n + 7)
    let g = |n: u64| {
        let n = n as f64;
        2.0 * n + 1.0 - (2.0 * n * n + 4.0 * n + 1.0).ln() - (2.0 * n * n + 8.0 * n + 7.0).ln()
    };
    let oracle_n0 = (1..=THRESHOLD_SCAN_TO)
        .filter(|&n| g(n) <= 0.0)
        .max()
        .unwrap_or(0);
    let tail_ok = (4..THRESHOLD_SCAN_TO).all(|n| g(n) > 0.0 && g(n + 1) > g(n));
    let c = &file.certificate;
    let pass = out.status.code() == Some(0)
        && file.construction.n0 == 3
        && oracle_n0 == 3
        && tail_ok
        && c.n0 == 3
        && c.scan_upper >= THRESHOLD_SCAN_TO
        && c.monotone_from <= 4
        && c.verify()
        && elapsed < THRESHOLD_RUNTIME_S;
    verdict(
        pass,
        format!(
            "n0 = {} (oracle {oracle_n0}), margin positive and increasing on 4..{THRESHOLD_SCAN_TO}: {tail_ok}, certificate verifies: {}, {elapsed:.3} s",
            file.construction.n0,
            c.verify()
        ),
    )
}

fn geometry_identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_product = 0.0f64;
    let mut worst_level = 0.0f64;
    let mut worst_cartesian = 0.0f64;
    for i in 0..GEOMETRY_DISKS {
        // every other disk is small enough for a Cartesian oracle
        let la = if i % 2 == 0 {
            rng.gen_range(-5.0..5.0)
        } else {
            rng.gen_range(-30.0..700.0)
        };
        let k: f64 = rng.gen_range(0.001..0.999);
        let d = LevelDisk::new(la, k).unwrap();
        // near * far = alpha^2, i.e. the ratio product is 1
        worst_product = worst_product.max((d.near_ratio * d.far_ratio - 1.0).abs());
        for _ in 0..GEOMETRY_BOUNDARY_PER_DISK {
            let psi: f64 = rng.gen_range(-PI..PI);
            let w = moebius(la, d.boundary_point(psi));
            worst_level = worst_level.max((w.log_mag.exp() - k).abs());
            if i % 2 == 0 {
                let a = la.exp();
                let c = -(1.0 + k * k) / (1.0 - k * k);
                let rho = 2.0 * k / (1.0 - k * k);
                let (zr, zi) = (a * (c + rho * psi.cos()), a * rho * psi.sin());
                let m = (a + zr).hypot(zi) / (a - zr).hypot(zi);
                worst_cartesian = worst_cartesian.max((m - k).abs());
            }
        }
    }
    let pass = worst_product < GEOMETRY_TOL
        && worst_level < GEOMETRY_TOL
        && worst_cartesian < GEOMETRY_TOL;
    verdict(
        pass,
        format!(
            "{GEOMETRY_DISKS} disks: max |near*far/alpha^2 - 1| = {worst_product:.1e}, max ||w| - K| = {worst_level:.1e} (log space), {worst_cartesian:.1e} (Cartesian)"
        ),
    )
}

fn sector_containment() -> Verdict {
    let s = spec(1.5);
    let mut worst = 0.0f64;
    for n in 4..=50u64 {
        let d = LevelDisk::exceptional(s.log_a(n));
        for i in 0..SECTOR_BOUNDARY_SAMPLES {
            let psi = 2.0 * PI * i as f64 / SECTOR_BOUNDARY_SAMPLES as f64;
            worst = worst.max(wrap_angle(d.boundary_point(psi).arg - PI).abs());
        }
    }
    // boundary of E in ratio coordinates: -5/4 + (3/4) e^{i psi}
    let oracle = (0..SECTOR_BOUNDARY_SAMPLES)
        .map(|i| {
            let psi = 2.0 * PI * i as f64 / SECTOR_BOUNDARY_SAMPLES as f64;
            wrap_angle((0.75 * psi.sin()).atan2(-1.25 + 0.75 * psi.cos()) - PI).abs()
        })
        .fold(0.0, f64::max);
    let pass = worst < FRAC_PI_4 - SECTOR_MARGIN && (worst - oracle).abs() < 1e-9;
    verdict(
        pass,
        format!(
            "max |arg z - pi| on E_4..E_50 = {worst:.6} (Cartesian oracle {oracle:.6}, asin(3/5) = {:.6}), limit {:.6}",
            0.6f64.asin(),
            FRAC_PI_4 - SECTOR_MARGIN
        ),
    )
}

fn half_planes() -> Verdict {
    let s = spec(1.5);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut used, mut excluded, mut violations) = (0, 0, 0);
    while used < HALF_PLANE_SAMPLES {
        let z = LogComplex::new(rng.gen_range(-5.0..500.0), rng.gen_range(-PI..PI));
        if singular_distance(&s, z) < SINGULAR_EXCLUSION {
            excluded += 1;
            continue;
        }
        used += 1;
        let v = evaluate(&s, z, 1e-12).unwrap().value.log_mag;
        let ok = match z.re_sign() {
            -1 => v < 0.0,
            1 => v >= 0.0,
            _ => v == 0.0,
        };
        if !ok {
            violations += 1;
        }
    }
    verdict(
        violations == 0,
        format!(
            "{used} samples ({excluded} singular-adjacent excluded), {violations} sign violations"
        ),
    )
}

fn omitted_floor() -> Verdict {
    let s = spec(1.5);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut used, mut in_e, mut excluded, mut violations) = (0, 0, 0, 0);
    let mut min_abs = f64::INFINITY;
    while used < FLOOR_SAMPLES {
        let theta = rng.gen_range(-PI / 2.0..=PI / 2.0);
        let (_, eps) = regime_for(theta).unwrap();
        let arg = theta + eps * rng.gen_range(-1.0..1.0);
        let z = LogComplex::new(rng.gen_range(0.5..500.0), arg);
        if in_some_e_disk(&s, z) {
            in_e += 1;
            continue;
        }
        if singular_distance(&s, z) < SINGULAR_EXCLUSION {
            excluded += 1;
            continue;
        }
        used += 1;
        let v = evaluate(&s, z, 1e-12).unwrap().value.log_mag.exp();
        min_abs = min_abs.min(v);
        if !(v >= FLOOR_PRINTED) {
            violations += 1;
        }
    }
    verdict(
        violations == 0,
        format!(
            "{used} samples ({in_e} in E disks, {excluded} singular-adjacent), {violations} below 1/12; min |f| = {min_abs:.6} vs derived floor 4/15 = {FLOOR_DERIVED:.6} ({})",
            if min_abs >= FLOOR_DERIVED { "above" } else { "below" }
        ),
    )
}

/// Trapezoid rule for `(1/2pi) int log+ |f(r e^{it})| dt` straight from the
/// product; used where the circle stays clear of zeros and poles.
fn proximity_by_trapezoid(s: &ConstructionSpec, log_r: f64) -> f64 {
    let n = 1 << 14;
    (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            evaluate(s, LogComplex::new(log_r, t), 1e-14)
                .unwrap()
                .value
                .log_mag
                .max(0.0)
        })
        .sum::<f64>()
        / n as f64
}

fn jensen() -> Verdict {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_cross = 0.0f64;
    let mut crossed = 0;
    let mut rows = 0;
    for (lambda, lo, hi) in [(1.25, 100.0, 1e4), (1.5, 50.0, 2000.0)] {
        let s = spec(lambda);
        let grid = radius_grid(&s, lo, hi, 16).unwrap();
        let samples = match characteristic_grid(&s, &grid, QUAD_TOL) {
            Ok(x) => x,
            Err(e) => return verdict(false, format!("lambda = {lambda}: {e}")),
        };
        for x in &samples {
            rows += 1;
            worst = worst.max(x.jensen_residual.abs());
            let clear = (1..)
                .map(|j| s.log_a(j))
                .take_while(|&a| a < 2.0 * x.log_r)
                .all(|a| (a - x.log_r).abs() > 0.5);
            if clear {
                crossed += 1;
                worst_cross = worst_cross.max((proximity_by_trapezoid(&s, x.log_r) - x.m_f).abs());
            }
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let pass = worst <= JENSEN_TOL
        && worst_cross <= PROXIMITY_CROSS_CHECK_TOL
        && elapsed < JENSEN_RUNTIME_S;
    verdict(
        pass,
        format!(
            "{rows} radii, max |residual| = {worst:.2e} (limit {JENSEN_TOL:.0e}); m_f vs trapezoid at {crossed} clear radii: {worst_cross:.1e}; {elapsed:.1} s"
        ),
    )
}

fn counting() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut worst = 0.0f64;
    let mut balanced = true;
    for lambda in [1.25, 1.5] {
        let s = spec(lambda);
        for _ in 0..COUNTING_RADII {
            let l: f64 = rng.gen_range(5.0..5000.0);
            let n = counting_integrated(&s, l, Counted::Poles).unwrap();
            balanced &= n == counting_integrated(&s, l, Counted::Zeros).unwrap();
            // Abel summation: N(r) = int_0^{log r} n(t) dt with n stepping at log A_j
            let moduli: Vec<f64> = (s.start..)
                .map(|j| (j as f64).powf(s.p))
                .take_while(|&a| a <= l)
                .collect();
            let mut brute = 0.0;
            for (k, &a) in moduli.iter().enumerate() {
                let next = moduli.get(k + 1).copied().unwrap_or(l);
                brute += (k + 1) as f64 * (next - a);
            }
            let rel = if brute == 0.0 {
                n.abs()
            } else {
                ((n - brute) / brute).abs()
            };
            worst = worst.max(rel);
        }
    }
    verdict(
        worst <= COUNTING_REL_TOL && balanced,
        format!(
            "{} radii, max relative error {worst:.1e}, N(zeros) == N(poles): {balanced}",
            2 * COUNTING_RADII
        ),
    )
}

/// `characteristic` to CSV, then `order` on that file.
fn pipeline_fit(
    dir: &Path,
    lambda: f64,
    lo: f64,
    hi: f64,
) -> Result<(f64, Option<f64>, f64), String> {
    let t0 = Instant::now();
    let csv = dir.join(format!("t_{lambda}.csv"));
    let st = Command::new(bin())
        .args(["characteristic", "--lambda", &lambda.to_string()])
        .args([
            "--log-r-min",
            &lo.to_string(),
            "--log-r-max",
            &hi.to_string(),
        ])
        .args(["--points", "16", "--quad-tol", &QUAD_TOL.to_string()])
        .args(["--out", csv.to_str().unwrap()])
        .status()
        .map_err(|e| e.to_string())?;
    if !st.success() {
        return Err(format!("characteristic exited with {st}"));
    }
    let out = Command::new(bin())
        .args(["order", csv.to_str().unwrap()])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let (rows, _) = read_characteristic_columns(&csv).map_err(|e| e.to_string())?;
    if rows.len() != 16 {
        return Err(format!("{} rows", rows.len()));
    }
    Ok((
        v["lambda_hat"].as_f64().unwrap_or(f64::NAN),
        v["tail_ratio"].as_f64(),
        t0.elapsed().as_secs_f64(),
    ))
}

fn order_recovery() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (lambda, lo, hi) in [(1.5, 50.0, 2000.0), (1.25, 100.0, 1e4)] {
        match pipeline_fit(dir.path(), lambda, lo, hi) {
            Ok((hat, tail, secs)) => {
                let ok = (hat - lambda).abs() <= ORDER_TOL && secs < ORDER_RUNTIME_S;
                pass &= ok;
                parts.push(format!(
                    "lambda {lambda}: lambda_hat = {hat:.4} (|err| {:.3}, limit {ORDER_TOL}), log T / log log r at top = {}, {secs:.1} s",
                    (hat - lambda).abs(),
                    tail.map_or("n/a".into(), |t| format!("{t:.4}"))
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("lambda {lambda}: {e}"));
            }
        }
    }
    verdict(pass, parts.join("; "))
}

fn order_stretch() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    match pipeline_fit(dir.path(), 1.75, 1e8, 1e10) {
        Ok((hat, tail, secs)) => verdict(
            (hat - 1.75).abs() <= ORDER_STRETCH_TOL,
            format!(
                "lambda 1.75 on log r in [1e8, 1e10]: lambda_hat = {hat:.4} (limit {ORDER_STRETCH_TOL}), log T / log log r at top = {}, {secs:.1} s",
                tail.map_or("n/a".into(), |t| format!("{t:.4}"))
            ),
        ),
        Err(e) => verdict(false, e),
    }
}

fn convergence_exponent() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for lambda in [1.25, 1.5] {
        let e = log_convergence_exponent(&spec(lambda), EXPONENT_J_MAX).unwrap();
        let ok = (e - (lambda - 1.0)).abs() <= EXPONENT_TOL;
        pass &= ok;
        parts.push(format!("lambda {lambda}: {e:.5} vs {:.2}", lambda - 1.0));
    }
    verdict(pass, parts.join("; "))
}

fn no_julia() -> Verdict {
    let run = |extra: &[&str]| {
        Command::new(bin())
            .args([
                "scan",
                "--lambda",
                "1.5",
                "--directions",
                "360",
                "--log-r-max",
                "500",
            ])
            .args(extra)
            .output()
            .expect("binary runs")
    };
    let real = run(&[]);
    let fake = run(&["--surrogate"]);
    let count = |o: &std::process::Output| {
        serde_json::from_slice::<serde_json::Value>(&o.stdout)
            .ok()
            .and_then(|v| v["summary"]["violations"].as_u64())
    };
    let pass = real.status.code() == Some(0) && fake.status.code() == Some(1);
    verdict(
        pass,
        format!(
            "scan exit {:?} with {:?} violations; surrogate exit {:?} with {:?} violations",
            real.status.code(),
            count(&real),
            fake.status.code(),
            count(&fake)
        ),
    )
}

fn truncation() -> Verdict {
    let s = spec(1.5);
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut failures = 0;
    let mut worst_ratio = 0.0f64;
    for _ in 0..TRUNCATION_CASES {
        let z = LogComplex::new(rng.gen_range(0.0..500.0), rng.gen_range(-PI..PI));
        let eps = 10f64.powf(rng.gen_range(-12.0..-3.0));
        let r = evaluate(&s, z, eps).unwrap();
        let (deep, _) = evaluate_through(&s, z, r.truncation_index + TRUNCATION_DEEPEN);
        let change = (deep.log_mag - r.value.log_mag).abs();
        if !(change < r.tail_bound) {
            failures += 1;
        }
        worst_ratio = worst_ratio.max(change / r.tail_bound);
    }
    verdict(
        failures == 0,
        format!("{TRUNCATION_CASES} cases, {failures} with change >= tail_bound, max change / tail_bound = {worst_ratio:.2e}"),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("threshold", threshold),
        ("geometry identities", geometry_identities),
        ("sector containment", sector_containment),
        ("left/right half-plane", half_planes),
        ("omitted floor", omitted_floor),
        ("Jensen residual", jensen),
        ("counting closed form", counting),
        ("logarithmic order recovery", order_recovery),
        ("logarithmic order recovery (stretch)", order_stretch),
        ("convergence exponent", convergence_exponent),
        ("no-Julia evidence", no_julia),
        ("truncation soundness", truncation),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let v = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| verdict(false, "panicked".into()));
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CliError, Command, Format, RunConfig};
use crate::characteristic::{characteristic_grid, log_order_fit_points, radius_grid};
use crate::geometry::{disjointness_margin, level_schedule, DisjointnessCertificate, LevelDisk};
use crate::logspace::LogComplex;
use crate::product::{evaluate, ConstructionSpec};
use crate::scanner::{full_scan_with, ProductField, ScanOptions, TangentSurrogate};

/// Document written by `construct` and read back through `--spec`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionFile {
    pub construction: ConstructionSpec,
    pub certificate: DisjointnessCertificate,
}

pub(super) struct Output {
    pub text: String,
    /// Set when the command ran but its evidence check failed.
    pub failure: Option<String>,
}

impl Output {
    fn ok(text: String) -> Self {
        Output {
            text,
            failure: None,
        }
    }
}

const CHARACTERISTIC_COLUMNS: [&str; 7] = [
    "log_r",
    "m_f",
    "N_poles",
    "m_inv",
    "N_zeros",
    "T",
    "jensen_residual",
];
const GEOMETRY_COLUMNS: [&str; 8] = [
    "n",
    "log_A",
    "K",
    "center_ratio",
    "radius_ratio",
    "near_ratio",
    "far_ratio",
    "margin_g",
];
const EVAL_COLUMNS: [&str; 6] = [
    "log_abs_z",
    "arg_z",
    "log_abs_f",
    "arg_f",
    "truncation_index",
    "tail_bound",
];

/// 17 significant digits.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Evidence(format!("cannot serialize output: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn csv_table(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Evidence(format!("cannot write csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Evidence(format!("cannot write csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Evidence(e.to_string()))
}

fn json_only(cfg: &RunConfig, command: &str) -> Result<(), CliError> {
    match cfg.format {
        Some(Format::Csv) => Err(CliError::Usage(format!("{command} only writes json"))),
        _ => Ok(()),
    }
}

fn load_spec(path: &Path) -> Result<ConstructionSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read spec {}: {e}", path.display())))?;
    if let Ok(file) = serde_json::from_str::<ConstructionFile>(&text) {
        if file.certificate.n0 != file.construction.n0
            || file.certificate.lambda != file.construction.lambda
            || !file.certificate.verify()
        {
            return Err(CliError::Usage(format!(
                "certificate in {} does not check out",
                path.display()
            )));
        }
        return Ok(file.construction);
    }
    serde_json::from_str::<ConstructionSpec>(&text)
        .map_err(|e| CliError::Usage(format!("invalid spec {}: {e}", path.display())))
}

fn construction(cfg: &RunConfig) -> Result<ConstructionSpec, CliError> {
    match (&cfg.spec, cfg.lambda) {
        (Some(path), lambda) => {
            let spec = load_spec(path)?;
            if let Some(l) = lambda {
                if l != spec.lambda {
                    return Err(CliError::Usage(format!(
                        "--lambda {l} disagrees with lambda = {} in {}",
                        spec.lambda,
                        path.display()
                    )));
                }
            }
            Ok(spec)
        }
        (None, Some(l)) => Ok(ConstructionSpec::new(l)?),
        (None, None) => Err(CliError::Usage("--lambda or --spec is required".into())),
    }
}

pub(super) fn dispatch(command: &Command, cfg: &RunConfig) -> Result<Output, CliError> {
    match command {
        Command::Construct { scan_upper } => construct(cfg, *scan_upper),
        Command::Geometry { n_max } => geometry(cfg, *n_max),
        Command::Eval { points } => eval(cfg, points),
        Command::Characteristic => characteristic(cfg),
        Command::Order { input } => order(cfg, input),
        Command::Scan { surrogate, .. } => scan(cfg, *surrogate),
    }
}

fn construct(cfg: &RunConfig, scan_upper: Option<u64>) -> Result<Output, CliError> {
    json_only(cfg, "construct")?;
    let lambda = cfg
        .lambda
        .ok_or_else(|| CliError::Usage("construct needs --lambda".into()))?;
    let (construction, certificate) = match scan_upper {
        Some(upper) => ConstructionSpec::with_scan_upper(lambda, upper)?,
        None => ConstructionSpec::certified(lambda)?,
    };
    Ok(Output::ok(json(&ConstructionFile {
        construction,
        certificate,
    })?))
}

#[derive(Serialize)]
struct GeometryRow {
    n: u64,
    #[serde(rename = "log_A")]
    log_a: f64,
    #[serde(rename = "K")]
    k: f64,
    center_ratio: f64,
    radius_ratio: f64,
    near_ratio: f64,
    far_ratio: f64,
    margin_g: f64,
}

fn geometry(cfg: &RunConfig, n_max: u64) -> Result<Output, CliError> {
    let spec = construction(cfg)?;
    if n_max < spec.start {
        return Err(CliError::Usage(format!(
            "n-max = {n_max} is below the first index {}",
            spec.start
        )));
    }
    let rows = (spec.start..=n_max)
        .map(|n| {
            let d = LevelDisk::scheduled(spec.log_a(n), n)?;
            Ok(GeometryRow {
                n,
                log_a: d.log_alpha,
                k: level_schedule(n)?,
                center_ratio: d.center_ratio,
                radius_ratio: d.radius_ratio,
                near_ratio: d.near_ratio,
                far_ratio: d.far_ratio,
                margin_g: disjointness_margin(n, spec.p),
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => json(&rows)?,
        Format::Csv => csv_table(
            &GEOMETRY_COLUMNS,
            rows.iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        real(r.log_a),
                        real(r.k),
                        real(r.center_ratio),
                        real(r.radius_ratio),
                        real(r.near_ratio),
                        real(r.far_ratio),
                        real(r.margin_g),
                    ]
                })
                .collect(),
        )?,
    };
    Ok(Output::ok(text))
}

fn parse_point(s: &str) -> Result<LogComplex, CliError> {
    let bad = || CliError::Usage(format!("point must be LOG_MODULUS,ARG, got {s:?}"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let log_mag: f64 = a.trim().parse().map_err(|_| bad())?;
    let arg: f64 = b.trim().parse().map_err(|_| bad())?;
    if log_mag.is_nan() || !arg.is_finite() {
        return Err(bad());
    }
    Ok(LogComplex::new(log_mag, arg))
}

#[derive(Serialize)]
struct EvalRow {
    #[serde(with = "crate::logspace::extended_real")]
    log_abs_z: f64,
    arg_z: f64,
    #[serde(flatten)]
    result: crate::product::EvalResult,
}

fn eval(cfg: &RunConfig, points: &[String]) -> Result<Output, CliError> {
    let spec = construction(cfg)?;
    let rows = points
        .iter()
        .map(|p| {
            let z = parse_point(p)?;
            Ok(EvalRow {
                log_abs_z: z.log_mag,
                arg_z: z.arg,
                result: evaluate(&spec, z, cfg.eps)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let text = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => json(&rows)?,
        Format::Csv => csv_table(
            &EVAL_COLUMNS,
            rows.iter()
                .map(|r| {
                    vec![
                        real(r.log_abs_z),
                        real(r.arg_z),
                        real(r.result.value.log_mag),
                        real(r.result.value.arg),
                        r.result.truncation_index.to_string(),
                        real(r.result.tail_bound),
                    ]
                })
                .collect(),
        )?,
    };
    Ok(Output::ok(text))
}

fn characteristic(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec = construction(cfg)?;
    let lo = cfg.log_r_min.unwrap_or(10.0);
    let hi = cfg.log_r_max.unwrap_or(1000.0);
    if !(lo < hi) {
        return Err(CliError::Usage(format!(
            "log-r-min must be below log-r-max, got [{lo}, {hi}]"
        )));
    }
    let grid = radius_grid(&spec, lo, hi, cfg.points)?;
    let samples = characteristic_grid(&spec, &grid, cfg.quad_tol)?;
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => json(&samples)?,
        Format::Csv => csv_table(
            &CHARACTERISTIC_COLUMNS,
            samples
                .iter()
                .map(|s| {
                    [
                        s.log_r,
                        s.m_f,
                        s.n_poles,
                        s.m_inv,
                        s.n_zeros,
                        s.t,
                        s.jensen_residual,
                    ]
                    .into_iter()
                    .map(real)
                    .collect()
                })
                .collect(),
        )?,
    };
    Ok(Output::ok(text))
}

/// `(log_r, T)` columns of a characteristic CSV.
pub fn read_characteristic_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let usage = |e: csv::Error| CliError::Usage(format!("cannot read {}: {e}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(usage)?;
    let headers = rdr.headers().map_err(usage)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("{} has no {name} column", path.display())))
    };
    let (i_r, i_t) = (col("log_r")?, col("T")?);
    let mut log_r = Vec::new();
    let mut t = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(usage)?;
        let field = |i: usize| -> Result<f64, CliError> {
            rec.get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| CliError::Usage(format!("row {}: unreadable number", line + 2)))
        };
        log_r.push(field(i_r)?);
        t.push(field(i_t)?);
    }
    Ok((log_r, t))
}

fn order(cfg: &RunConfig, input: &Path) -> Result<Output, CliError> {
    json_only(cfg, "order")?;
    let (log_r, t) = read_characteristic_columns(input)?;
    let fit = log_order_fit_points(&log_r, &t)?;
    Ok(Output::ok(json(&fit)?))
}

#[derive(Serialize)]
struct ScanFile<'a> {
    lambda: f64,
    n0: u64,
    seed: u64,
    surrogate: bool,
    #[serde(flatten)]
    scan: &'a crate::scanner::FullScan,
}

fn scan(cfg: &RunConfig, surrogate: bool) -> Result<Output, CliError> {
    json_only(cfg, "scan")?;
    let spec = construction(cfg)?;
    let opts = ScanOptions {
        n_radii: cfg.radii.unwrap_or(64),
        log_r_min: cfg.log_r_min.unwrap_or(0.5),
        log_r_max: cfg.log_r_max.unwrap_or(500.0),
        seed: cfg.seed,
        ..ScanOptions::default()
    };
    let scan = if surrogate {
        full_scan_with(&TangentSurrogate, &spec, cfg.directions, &opts)?
    } else {
        let field = ProductField {
            spec: &spec,
            eps: opts.eval_eps,
        };
        full_scan_with(&field, &spec, cfg.directions, &opts)?
    };
    let text = json(&ScanFile {
        lambda: spec.lambda,
        n0: spec.n0,
        seed: cfg.seed,
        surrogate,
        scan: &scan,
    })?;
    let failure = (scan.summary.violations > 0).then(|| {
        format!(
            "{} violations in {} of {} directions",
            scan.summary.violations, scan.summary.failing_directions, scan.summary.directions
        )
    });
    Ok(Output { text, failure })
}

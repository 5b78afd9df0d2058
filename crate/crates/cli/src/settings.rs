//! Resolution of run settings from flags, an optional `key = value` file
//! and the environment. Flags win over the file; the worker variable is
//! only read when neither gives a worker count.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use qslice::discreteness::BqOptions;
use qslice::holonomy::IntegratorOptions;
use qslice::scan::{calibrate_fuchsian_point, NewtonOptions, RasterConfig, BASE_WINDOW};

pub const WORKERS_ENV: &str = "QSLICE_WORKERS";

/// A failure with its exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config keys or values.
    Usage(String),
    /// Files that cannot be read or written, or a computation that failed.
    Runtime(String),
    /// Verification suites that did not pass.
    Verify(Vec<String>),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Verify(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => f.write_str(m),
            Failure::Verify(names) => write!(f, "failing invariants: {}", names.join(", ")),
        }
    }
}

impl From<qslice::Error> for Failure {
    fn from(e: qslice::Error) -> Self {
        match e {
            qslice::Error::InvalidConfig(m) => Failure::Usage(m),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

/// `re,im` or a bare real number.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let bad = || format!("expected a complex number as `re,im`, got {s:?}");
    let mut parts = s.split(',');
    let re = parts.next().ok_or_else(bad)?.trim().parse::<f64>().map_err(|_| bad())?;
    let im = match parts.next() {
        Some(v) => v.trim().parse::<f64>().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() || !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

/// `WxH`, or a single number for a square.
pub fn parse_size(s: &str) -> Result<(f64, f64), String> {
    let bad = || format!("expected a window size as `WxH`, got {s:?}");
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
    match s.split_once(['x', 'X']) {
        Some((w, h)) => Ok((num(w)?, num(h)?)),
        None => {
            let w = num(s)?;
            Ok((w, w))
        }
    }
}

/// Values given on the command line; `None` when absent.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub center: Option<Complex64>,
    pub size: Option<(f64, f64)>,
    pub res: Option<usize>,
    pub max_depth: Option<usize>,
    pub max_nodes: Option<usize>,
    pub growth_bound: Option<f64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub seed_threshold: Option<f64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub png: Option<PathBuf>,
    pub stats: Option<PathBuf>,
    pub centers: Option<PathBuf>,
}

const KEYS: [&str; 14] = [
    "center",
    "size",
    "res",
    "max-depth",
    "max-nodes",
    "growth-bound",
    "rtol",
    "atol",
    "seed-threshold",
    "workers",
    "out",
    "png",
    "stats",
    "centers",
];

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T, Failure> {
    v.parse::<T>()
        .map_err(|_| Failure::Usage(format!("invalid value {v:?} for `{key}` in config file")))
}

/// Read a config file. Blank lines and lines starting with `#` are
/// skipped; every other line is `key = value` with a key named like the
/// long flag.
pub fn read_config_file(path: &Path) -> Result<Overrides, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Runtime(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Overrides, Failure> {
    let mut seen = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Failure::Usage(format!("config line {}: expected `key = value`", n + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(Failure::Usage(format!("config line {}: unknown key `{k}`", n + 1)));
        }
        seen.insert(k.to_string(), v.to_string());
    }
    let mut o = Overrides::default();
    for (k, v) in &seen {
        let v = v.as_str();
        match k.as_str() {
            "center" => o.center = Some(parse_complex(v).map_err(|e| Failure::Usage(format!("`center`: {e}")))?),
            "size" => o.size = Some(parse_size(v).map_err(|e| Failure::Usage(format!("`size`: {e}")))?),
            "res" => o.res = Some(parse_value(k, v)?),
            "max-depth" => o.max_depth = Some(parse_value(k, v)?),
            "max-nodes" => o.max_nodes = Some(parse_value(k, v)?),
            "growth-bound" => o.growth_bound = Some(parse_value(k, v)?),
            "rtol" => o.rtol = Some(parse_value(k, v)?),
            "atol" => o.atol = Some(parse_value(k, v)?),
            "seed-threshold" => o.seed_threshold = Some(parse_value(k, v)?),
            "workers" => o.workers = Some(parse_value(k, v)?),
            "out" => o.out = Some(PathBuf::from(v)),
            "png" => o.png = Some(PathBuf::from(v)),
            "stats" => o.stats = Some(PathBuf::from(v)),
            "centers" => o.centers = Some(PathBuf::from(v)),
            _ => unreachable!("keys are checked above"),
        }
    }
    Ok(o)
}

impl Overrides {
    /// `self` where set, otherwise `file`.
    pub fn over(self, file: Overrides) -> Overrides {
        Overrides {
            center: self.center.or(file.center),
            size: self.size.or(file.size),
            res: self.res.or(file.res),
            max_depth: self.max_depth.or(file.max_depth),
            max_nodes: self.max_nodes.or(file.max_nodes),
            growth_bound: self.growth_bound.or(file.growth_bound),
            rtol: self.rtol.or(file.rtol),
            atol: self.atol.or(file.atol),
            seed_threshold: self.seed_threshold.or(file.seed_threshold),
            workers: self.workers.or(file.workers),
            out: self.out.or(file.out),
            png: self.png.or(file.png),
            stats: self.stats.or(file.stats),
            centers: self.centers.or(file.centers),
        }
    }
}

fn workers_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("invalid value {v:?} in {WORKERS_ENV}"))),
        _ => Ok(None),
    }
}

/// The configuration a run actually used, echoed into stats output.
#[derive(Clone, Debug, Serialize)]
pub struct Effective {
    pub center: [f64; 2],
    pub width: f64,
    pub height: f64,
    pub res: usize,
    pub max_depth: usize,
    pub max_nodes: usize,
    pub growth_bound: f64,
    pub rtol: f64,
    pub atol: f64,
    pub seed_threshold: f64,
    pub workers: Option<usize>,
    pub fuchsian_point: [f64; 2],
}

fn check(ok: bool, flag: &str, msg: String) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(Failure::Usage(format!("invalid value for --{flag}: {msg}")))
    }
}

fn positive(v: Option<f64>, flag: &str) -> Result<(), Failure> {
    match v {
        Some(x) => check(x > 0.0 && x.is_finite(), flag, format!("must be positive, got {x}")),
        None => Ok(()),
    }
}

/// Range checks, naming the offending flag, before any computation.
pub fn validate(o: &Overrides) -> Result<(), Failure> {
    if let Some(r) = o.res {
        check(r >= 2, "res", format!("must be at least 2, got {r}"))?;
    }
    if let Some((w, h)) = o.size {
        check(
            w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite(),
            "size",
            format!("width and height must be positive, got {w}x{h}"),
        )?;
    }
    if let Some(d) = o.max_depth {
        check(d > 0, "max-depth", "must be positive, got 0".into())?;
    }
    if let Some(n) = o.max_nodes {
        check(n > 0, "max-nodes", "must be positive, got 0".into())?;
    }
    if let Some(g) = o.growth_bound {
        check(g > 2.0 && g.is_finite(), "growth-bound", format!("must exceed 2, got {g}"))?;
    }
    positive(o.rtol, "rtol")?;
    positive(o.atol, "atol")?;
    positive(o.seed_threshold, "seed-threshold")?;
    if let Some(w) = o.workers {
        check(w > 0, "workers", "must be positive, got 0".into())?;
    }
    Ok(())
}

pub fn bq_options(o: &Overrides) -> BqOptions {
    let d = BqOptions::default();
    BqOptions {
        max_depth: o.max_depth.unwrap_or(d.max_depth),
        max_nodes: o.max_nodes.unwrap_or(d.max_nodes),
        growth_bound: o.growth_bound.unwrap_or(d.growth_bound),
    }
}

pub fn integrator_options(o: &Overrides) -> IntegratorOptions {
    let d = IntegratorOptions::default();
    IntegratorOptions {
        rtol: o.rtol.unwrap_or(d.rtol),
        atol: o.atol.unwrap_or(d.atol),
        ..d
    }
}

/// Build the raster configuration. The Fuchsian point is located by a
/// calibration pass from the origin; it fixes the SL2 lift, and it is the
/// window center unless one is given.
pub fn raster_config(o: &Overrides) -> Result<(RasterConfig, Effective), Failure> {
    validate(o)?;
    let workers = match o.workers {
        Some(w) => Some(w),
        None => workers_from_env()?,
    };
    if workers == Some(0) {
        return Err(Failure::Usage(format!("invalid value for {WORKERS_ENV}: must be positive")));
    }
    let mut cfg = RasterConfig {
        bq: bq_options(o),
        integrator: integrator_options(o),
        workers,
        ..Default::default()
    };
    let solver = cfg.solver()?;
    let c_f = calibrate_fuchsian_point(&solver, Complex64::new(0.0, 0.0), &NewtonOptions::default())?;
    let (width, height) = o.size.unwrap_or((BASE_WINDOW, BASE_WINDOW));
    cfg.reference = c_f;
    cfg.center = o.center.unwrap_or(c_f);
    cfg.width = width;
    cfg.height = height;
    cfg.resolution = o.res.unwrap_or(cfg.resolution);
    if let Some(t) = o.seed_threshold {
        cfg.seed_threshold = t;
    }
    cfg.validate()?;
    let effective = Effective {
        center: [cfg.center.re, cfg.center.im],
        width: cfg.width,
        height: cfg.height,
        res: cfg.resolution,
        max_depth: cfg.bq.max_depth,
        max_nodes: cfg.bq.max_nodes,
        growth_bound: cfg.bq.growth_bound,
        rtol: cfg.integrator.rtol,
        atol: cfg.integrator.atol,
        seed_threshold: cfg.seed_threshold,
        workers: cfg.workers,
        fuchsian_point: [c_f.re, c_f.im],
    };
    Ok((cfg, effective))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_and_size_parsing() {
        assert_eq!(parse_complex("1.5,-2").unwrap(), Complex64::new(1.5, -2.0));
        assert_eq!(parse_complex("-21.3").unwrap(), Complex64::new(-21.3, 0.0));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("nan,0").is_err());
        assert_eq!(parse_size("4x3").unwrap(), (4.0, 3.0));
        assert_eq!(parse_size("7").unwrap(), (7.0, 7.0));
        assert!(parse_size("4xq").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config("# window\nres = 32\nsize = 10x5\n\nworkers=3\n").unwrap();
        assert_eq!(file.res, Some(32));
        assert_eq!(file.size, Some((10.0, 5.0)));
        let flags = Overrides {
            res: Some(8),
            ..Default::default()
        };
        let merged = flags.over(file);
        assert_eq!(merged.res, Some(8));
        assert_eq!(merged.workers, Some(3));
        assert_eq!(merged.size, Some((10.0, 5.0)));
    }

    #[test]
    fn config_errors_are_usage_errors() {
        for text in ["res 4", "colour = red", "res = -1", "center = x"] {
            let e = parse_config(text).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn validation_names_the_flag() {
        let o = Overrides {
            res: Some(0),
            ..Default::default()
        };
        let msg = validate(&o).unwrap_err().to_string();
        assert!(msg.contains("--res"), "{msg}");
        let o = Overrides {
            growth_bound: Some(1.0),
            ..Default::default()
        };
        assert!(validate(&o).unwrap_err().to_string().contains("--growth-bound"));
    }
}

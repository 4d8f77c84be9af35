//! Experiment configuration: a flat `key = value` file plus flag overrides,
//! resolved to explicit values before anything runs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analytic::{
    normal_radius, planar_hessian_model, spherical_hessian_model, HessianModel2D, PowerSpectrum, SignVariant,
};
use crate::critcount::{default_depth, PixelGrid, MIN_ORACLE_REALIZATIONS};
use crate::error::Error;
use crate::fieldsim::{PlanarKind, MAX_DEGREE};

/// Keys accepted in config files and as `--key` flags.
pub const KEYS: [&str; 18] = [
    "command",
    "k",
    "m",
    "t",
    "r",
    "model",
    "sigma2",
    "c",
    "spectrum",
    "n",
    "seed",
    "threads",
    "out",
    "sign_variant",
    "depth",
    "pixel",
    "volume",
    "criteria",
];

/// A configuration problem, located in a file when it came from one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigError {
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self { message: message.into(), file: None, line: None }
    }

    fn at(message: impl Into<String>, file: &Path, line: usize) -> Self {
        Self { message: message.into(), file: Some(file.to_path_buf()), line: Some(line) }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.file, self.line) {
            (Some(p), Some(l)) => write!(f, "{}:{}: {}", p.display(), l, self.message),
            (Some(p), None) => write!(f, "{}: {}", p.display(), self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ClosedForm,
    EstimateEk,
    EstimateDk,
    A1a2,
    ExpectedMaxima,
    SimulateCount,
    OracleHessian,
    Validate,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::ClosedForm,
        Command::EstimateEk,
        Command::EstimateDk,
        Command::A1a2,
        Command::ExpectedMaxima,
        Command::SimulateCount,
        Command::OracleHessian,
        Command::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::ClosedForm => "closed-form",
            Command::EstimateEk => "estimate-ek",
            Command::EstimateDk => "estimate-dk",
            Command::A1a2 => "a1a2",
            Command::ExpectedMaxima => "expected-maxima",
            Command::SimulateCount => "simulate-count",
            Command::OracleHessian => "oracle-hessian",
            Command::Validate => "validate",
        }
    }

    fn default_n(self) -> u64 {
        match self {
            Command::SimulateCount => 100,
            Command::OracleHessian => 20_000,
            _ => 1_000_000,
        }
    }
}

impl FromStr for Command {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| ConfigError::new(format!("unknown command {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Berry,
    BargmannFock,
    Custom,
    Sphere,
}

impl ModelChoice {
    pub fn name(self) -> &'static str {
        match self {
            ModelChoice::Berry => "berry",
            ModelChoice::BargmannFock => "bf",
            ModelChoice::Custom => "custom",
            ModelChoice::Sphere => "sphere",
        }
    }

    pub fn planar_kind(self) -> Option<PlanarKind> {
        match self {
            ModelChoice::Berry => Some(PlanarKind::Berry),
            ModelChoice::BargmannFock => Some(PlanarKind::BargmannFock),
            _ => None,
        }
    }
}

impl FromStr for ModelChoice {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "berry" => Ok(Self::Berry),
            "bf" | "bargmann_fock" | "bargmann-fock" => Ok(Self::BargmannFock),
            "custom" => Ok(Self::Custom),
            "sphere" => Ok(Self::Sphere),
            _ => Err(ConfigError::new(format!("unknown model {s:?} (berry, bf, custom or sphere)"))),
        }
    }
}

/// Where a raw value came from, for error messages.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    File { path: PathBuf, line: usize },
    Flag,
}

/// Unvalidated `key -> (value, source)` pairs; later sources override earlier ones.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Source)>,
}

impl RawConfig {
    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse_file(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let mut raw = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(ConfigError::at(format!("expected `key = value`, got {body:?}"), path, line_no));
            };
            let key = k.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError::at(format!("unknown key {:?}", k.trim()), path, line_no));
            }
            if raw.entries.contains_key(&key) {
                return Err(ConfigError::at(format!("duplicate key {key:?}"), path, line_no));
            }
            raw.entries.insert(key, (v.trim().to_string(), Source::File { path: path.to_path_buf(), line: line_no }));
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { message: e.to_string(), file: Some(path.to_path_buf()), line: None })?;
        Self::parse_file(&text, path)
    }

    /// Sets `key` from a command-line flag, overriding any file value.
    pub fn set_flag(&mut self, key: &str, value: impl Into<String>) -> Result<(), ConfigError> {
        let key = key.replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::new(format!("unknown key {key:?}")));
        }
        self.entries.insert(key, (value.into(), Source::Flag));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&(String, Source)> {
        self.entries.get(key)
    }

    fn error(&self, key: &str, message: String) -> ConfigError {
        match self.get(key) {
            Some((_, Source::File { path, line })) => ConfigError::at(message, path, *line),
            _ if key == "command" => ConfigError::new(message),
            _ => ConfigError::new(format!("--{}: {message}", key.replace('_', "-"))),
        }
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some((v, _)) => v.parse::<T>().map(Some).map_err(|e| self.error(key, format!("bad value {v:?}: {e}"))),
        }
    }
}

/// Parses `2,3,4` or the inclusive range `start:stop:step`.
pub fn parse_t_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    let out: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, h] = parts[..] else {
            return Err(format!("expected start:stop:step, got {s:?}"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad number {x:?}"));
        let (a, b, h) = (num(a)?, num(b)?, num(h)?);
        if !(h > 0.0) || !(b >= a) {
            return Err(format!("range {s:?} needs step > 0 and stop >= start"));
        }
        let count = ((b - a) / h + 1e-9).floor() as usize + 1;
        if count > 100_000 {
            return Err(format!("range {s:?} has too many points"));
        }
        (0..count).map(|i| a + i as f64 * h).collect()
    } else {
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number {x:?}")))
            .collect::<Result<_, _>>()?
    };
    if out.is_empty() || out.iter().any(|t| !t.is_finite()) {
        return Err("thresholds must be finite numbers".into());
    }
    Ok(out)
}

/// A fully resolved experiment. Every field has an explicit value.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub k: u32,
    pub m: u32,
    pub t_grid: Vec<f64>,
    pub model: ModelChoice,
    /// Resolved Hessian model of the chosen field (`None` only for a
    /// non-Hessian-like custom model, which is rejected where it matters).
    pub hessian: Option<HessianModel2D>,
    pub sigma2: f64,
    pub c: f64,
    pub r: f64,
    pub spectrum_path: Option<PathBuf>,
    pub spectrum: Option<PowerSpectrum>,
    pub n: u64,
    pub seed: u64,
    /// 0 means one worker per core.
    pub threads: usize,
    pub out: PathBuf,
    pub sign_variant: SignVariant,
    pub depth: u32,
    pub pixel: Option<PixelGrid>,
    pub volume: f64,
    pub quick: bool,
    pub criteria: Vec<String>,
}

fn parse_pixel(s: &str) -> Result<Option<PixelGrid>, String> {
    if s == "none" {
        return Ok(None);
    }
    let (a, b) = s.split_once('x').ok_or_else(|| format!("expected THETAxPHI or none, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad ring count {a:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad longitude count {b:?}"))?;
    if a < 2 || b < 3 || a * b > 1 << 26 {
        return Err(format!("pixel grid {a}x{b} out of range"));
    }
    Ok(Some(PixelGrid::new(a, b)))
}

impl ExperimentConfig {
    /// Resolves defaults and checks the command's preconditions. `quick`
    /// only matters for `validate`.
    pub fn resolve(raw: &RawConfig, quick: bool) -> Result<Self, ConfigError> {
        let command: Command = match raw.get("command") {
            Some((v, _)) => v.parse().map_err(|e: ConfigError| raw.error("command", e.message))?,
            None => return Err(ConfigError::new("no command given")),
        };
        let k: u32 = raw.parsed("k")?.unwrap_or(2);
        let m: u32 = raw.parsed("m")?.unwrap_or(2);
        let t_grid = match raw.get("t") {
            Some((v, _)) => parse_t_grid(v).map_err(|e| raw.error("t", e))?,
            None => vec![0.0, 1.0, 2.0, 3.0],
        };
        let spectrum_path: Option<PathBuf> = raw.get("spectrum").map(|(v, _)| PathBuf::from(v));
        let spectrum = match &spectrum_path {
            None => None,
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| raw.error("spectrum", format!("{}: {e}", p.display())))?;
                Some(PowerSpectrum::parse(&text).map_err(|e| match e {
                    Error::Parse { line, message } => ConfigError::at(message, p, line),
                    other => ConfigError { message: other.to_string(), file: Some(p.clone()), line: None },
                })?)
            }
        };
        let model: ModelChoice = match raw.parsed::<String>("model")? {
            Some(s) => s.parse().map_err(|e: ConfigError| raw.error("model", e.message))?,
            None if spectrum.is_some() => ModelChoice::Sphere,
            None => ModelChoice::Berry,
        };
        let sign_variant: SignVariant = match raw.get("sign_variant") {
            Some((v, _)) => v.parse().map_err(|e: Error| raw.error("sign_variant", e.to_string()))?,
            None => SignVariant::Corrected,
        };
        let sigma2_in: Option<f64> = raw.parsed("sigma2")?;
        let c_in: Option<f64> = raw.parsed("c")?;
        let r_in: Option<f64> = raw.parsed("r")?;
        if model != ModelChoice::Custom && (sigma2_in.is_some() || c_in.is_some()) {
            return Err(raw.error(
                if sigma2_in.is_some() { "sigma2" } else { "c" },
                format!("sigma2 and c are only used with model = custom (model is {})", model.name()),
            ));
        }
        if model == ModelChoice::Sphere && spectrum.is_none() {
            return Err(raw.error("model", "model = sphere needs a spectrum file".into()));
        }
        if spectrum.is_some() && model != ModelChoice::Sphere {
            return Err(raw.error("spectrum", format!("a spectrum file implies model = sphere (model is {})", model.name())));
        }
        if spectrum.is_some() && r_in.is_some() {
            return Err(raw.error("r", "the radius is fixed by the spectrum and cannot also be given".into()));
        }
        if let Some(r) = r_in {
            if !(r > 0.0 && r.is_finite()) {
                return Err(raw.error("r", format!("radius must be positive (got {r})")));
            }
        }
        let hessian = match model {
            ModelChoice::Berry => Some(planar_hessian_model(1.5).map_err(|e| ConfigError::new(e.to_string()))?),
            ModelChoice::BargmannFock => Some(planar_hessian_model(3.0).map_err(|e| ConfigError::new(e.to_string()))?),
            ModelChoice::Custom => {
                let (Some(s), Some(c)) = (sigma2_in, c_in) else {
                    return Err(raw.error("model", "model = custom needs both sigma2 and c".into()));
                };
                Some(HessianModel2D::new(s, c).map_err(|e| raw.error("sigma2", e.to_string()))?)
            }
            ModelChoice::Sphere => {
                let spec = spectrum.as_ref().expect("checked above");
                if spec.lmax() > MAX_DEGREE {
                    return Err(raw.error("spectrum", format!("degree {} exceeds {MAX_DEGREE}", spec.lmax())));
                }
                Some(spherical_hessian_model(spec, sign_variant).map_err(|e| raw.error("spectrum", e.to_string()))?)
            }
        };
        let (sigma2, c) = hessian.map(|h| (h.sigma2(), h.c())).unwrap_or((f64::NAN, f64::NAN));
        let r = match &spectrum {
            Some(s) => normal_radius(s),
            None => r_in.unwrap_or(1.0),
        };
        let volume: f64 = raw.parsed("volume")?.unwrap_or(4.0 * std::f64::consts::PI * r * r);
        let n: u64 = raw.parsed("n")?.unwrap_or(command.default_n());
        let seed: u64 = raw.parsed("seed")?.unwrap_or(1);
        let threads: usize = raw.parsed("threads")?.unwrap_or(0);
        let out = raw.get("out").map(|(v, _)| PathBuf::from(v)).unwrap_or_else(|| PathBuf::from("out"));
        let depth: u32 = match raw.parsed("depth")? {
            Some(d) => d,
            None => default_depth(spectrum.as_ref().map_or(1, |s| s.lmax())),
        };
        let pixel = match raw.get("pixel") {
            Some((v, _)) => parse_pixel(v).map_err(|e| raw.error("pixel", e))?,
            None => None,
        };
        let criteria: Vec<String> = match raw.get("criteria") {
            Some((v, _)) => v.split(',').map(|s| s.trim().to_uppercase()).filter(|s| !s.is_empty()).collect(),
            None => Vec::new(),
        };

        let cfg = Self {
            command,
            k,
            m,
            t_grid,
            model,
            hessian,
            sigma2,
            c,
            r,
            spectrum_path,
            spectrum,
            n,
            seed,
            threads,
            out,
            sign_variant,
            depth,
            pixel,
            volume,
            quick,
            criteria,
        };
        cfg.check(raw)?;
        Ok(cfg)
    }

    fn check(&self, raw: &RawConfig) -> Result<(), ConfigError> {
        use Command::*;
        let needs_mc = matches!(self.command, EstimateEk | EstimateDk | A1a2 | ExpectedMaxima);
        if self.k == 0 {
            return Err(raw.error("k", "k must be at least 1".into()));
        }
        if self.k > 64 {
            return Err(raw.error("k", format!("k = {} is larger than supported (64)", self.k)));
        }
        if needs_mc && self.m != 2 {
            return Err(raw.error("m", format!("only m = 2 Hessian models are available (got m = {})", self.m)));
        }
        if needs_mc && self.n == 0 {
            return Err(raw.error("n", "n must be at least 1".into()));
        }
        if needs_mc && self.model == ModelChoice::Sphere && self.sign_variant == SignVariant::PaperText {
            return Err(raw.error(
                "sign_variant",
                "the printed sphere covariance has c - sigma2 < 0 and is not Hessian-like; \
                 Monte Carlo on a sphere model needs sign_variant = corrected"
                    .into(),
            ));
        }
        if needs_mc && !self.hessian.is_some_and(|h| h.hessian_like()) {
            return Err(raw.error(
                "sigma2",
                format!("sigma2 + c = {} < 1: the model is not Hessian-like", self.sigma2 + self.c),
            ));
        }
        if matches!(self.command, EstimateEk | EstimateDk | A1a2 | ExpectedMaxima | SimulateCount)
            && self.t_grid.iter().any(|&t| t < 0.0)
        {
            return Err(raw.error("t", "thresholds must be >= 0".into()));
        }
        if self.command == A1a2 && self.k != 2 {
            return Err(raw.error("k", format!("a1a2 needs k = 2 (got {})", self.k)));
        }
        if matches!(self.command, EstimateDk | ExpectedMaxima) && self.k < 2 {
            return Err(raw.error("k", format!("the maxima functional needs k >= 2 (got {})", self.k)));
        }
        if self.command == ExpectedMaxima && !(self.volume > 0.0 && self.volume.is_finite()) {
            return Err(raw.error("volume", format!("volume must be positive (got {})", self.volume)));
        }
        if self.command == SimulateCount {
            if self.spectrum.is_none() {
                return Err(ConfigError::new("simulate-count needs --spectrum FILE"));
            }
            if self.t_grid.iter().any(|&t| t <= 0.0) {
                return Err(raw.error("t", "simulate-count thresholds must be > 0".into()));
            }
            if self.n == 0 {
                return Err(raw.error("n", "at least one realization is needed".into()));
            }
            if self.depth > 8 {
                return Err(raw.error("depth", format!("depth {} is above the supported 8", self.depth)));
            }
        }
        if self.command == OracleHessian {
            if self.model == ModelChoice::Custom {
                return Err(raw.error("model", "oracle-hessian samples fields: use berry, bf or a spectrum".into()));
            }
            if self.n < MIN_ORACLE_REALIZATIONS {
                return Err(raw.error("n", format!("oracle-hessian needs n >= {MIN_ORACLE_REALIZATIONS}")));
            }
        }
        if self.command == Validate {
            if let Some(bad) = self.criteria.iter().find(|c| !crate::acceptance::ALL.contains(&c.as_str())) {
                return Err(raw.error("criteria", format!("unknown criterion {bad:?}")));
            }
        }
        Ok(())
    }

    /// Result-determining settings as sorted `key = value` lines.
    pub fn canonical(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut out = vec![
            ("command".to_string(), self.command.name().to_string()),
            ("k".into(), self.k.to_string()),
            ("m".into(), self.m.to_string()),
            ("t".into(), list(&self.t_grid)),
            ("model".into(), self.model.name().to_string()),
            ("sigma2".into(), self.sigma2.to_string()),
            ("c".into(), self.c.to_string()),
            ("r".into(), self.r.to_string()),
            ("n".into(), self.n.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("sign_variant".into(), self.sign_variant.to_string()),
            ("depth".into(), self.depth.to_string()),
            (
                "pixel".into(),
                self.pixel.map_or("none".to_string(), |p| format!("{}x{}", p.n_theta, p.n_phi)),
            ),
            ("volume".into(), self.volume.to_string()),
            ("quick".into(), self.quick.to_string()),
            ("criteria".into(), self.criteria.join(",")),
        ];
        if let Some(s) = &self.spectrum {
            out.push(("spectrum_sha256".into(), hex(&Sha256::digest(s.to_text().as_bytes()))));
        }
        out.sort();
        out
    }

    /// SHA-256 of the canonical settings. Output paths, thread counts and the
    /// spectrum file's location do not enter it.
    pub fn hash(&self) -> String {
        let text: String = self.canonical().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        hex(&Sha256::digest(text.as_bytes()))
    }

    /// Settings that do not affect results, reported for completeness.
    pub fn run_settings(&self) -> Vec<(String, String)> {
        vec![
            ("out".into(), self.out.display().to_string()),
            ("threads".into(), self.threads.to_string()),
            (
                "spectrum".into(),
                self.spectrum_path.as_ref().map_or("none".to_string(), |p| p.display().to_string()),
            ),
        ]
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(pairs: &[(&str, &str)]) -> RawConfig {
        let mut r = RawConfig::default();
        for (k, v) in pairs {
            r.set_flag(k, *v).unwrap();
        }
        r
    }

    #[test]
    fn t_grid_forms() {
        assert_eq!(parse_t_grid("2,3,4").unwrap(), vec![2.0, 3.0, 4.0]);
        assert_eq!(parse_t_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_t_grid("1:0:1").is_err());
        assert!(parse_t_grid("a").is_err());
        assert!(parse_t_grid("1,inf").is_err());
    }

    #[test]
    fn file_errors_carry_lines() {
        let p = Path::new("exp.cfg");
        let e = RawConfig::parse_file("# header\nk = 3\n\nbogus = 1\n", p).unwrap_err();
        assert_eq!(e.line, Some(4));
        let e = RawConfig::parse_file("k = 3\nk = 4\n", p).unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = RawConfig::parse_file("k 3\n", p).unwrap_err();
        assert_eq!(e.line, Some(1));
        let mut r = RawConfig::parse_file("command = estimate-ek\nk = x\n", p).unwrap();
        let e = ExperimentConfig::resolve(&r, false).unwrap_err();
        assert_eq!(e.line, Some(2));
        r.set_flag("k", "3").unwrap();
        assert_eq!(ExperimentConfig::resolve(&r, false).unwrap().k, 3);
    }

    #[test]
    fn defaults_and_model_resolution() {
        let c = ExperimentConfig::resolve(&raw(&[("command", "estimate-dk")]), false).unwrap();
        assert_eq!((c.k, c.m, c.n, c.seed), (2, 2, 1_000_000, 1));
        assert_eq!((c.sigma2, c.c), (0.5, 0.5));
        let c = ExperimentConfig::resolve(&raw(&[("command", "estimate-dk"), ("model", "bf")]), false).unwrap();
        assert_eq!((c.sigma2, c.c), (1.0, 1.0));
        let c =
            ExperimentConfig::resolve(&raw(&[("command", "a1a2"), ("model", "custom"), ("sigma2", "0.3"), ("c", "0.9")]), false)
                .unwrap();
        assert_eq!((c.sigma2, c.c), (0.3, 0.9));
    }

    #[test]
    fn preconditions_are_checked_before_running() {
        let bad = [
            vec![("command", "estimate-dk"), ("model", "custom"), ("sigma2", "0.1"), ("c", "0.2")],
            vec![("command", "estimate-dk"), ("sigma2", "0.5")],
            vec![("command", "simulate-count")],
            vec![("command", "oracle-hessian"), ("n", "10")],
            vec![("command", "a1a2"), ("k", "3")],
            vec![("command", "estimate-ek"), ("m", "3")],
            vec![("command", "validate"), ("criteria", "A9")],
            vec![("command", "frobnicate")],
        ];
        for b in bad {
            assert!(ExperimentConfig::resolve(&raw(&b), false).is_err(), "{b:?}");
        }
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = ExperimentConfig::resolve(&raw(&[("command", "closed-form"), ("out", "x")]), false).unwrap();
        let b = ExperimentConfig::resolve(&raw(&[("command", "closed-form"), ("out", "y"), ("threads", "3")]), false)
            .unwrap();
        let c = ExperimentConfig::resolve(&raw(&[("command", "closed-form"), ("seed", "2")]), false).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }
}

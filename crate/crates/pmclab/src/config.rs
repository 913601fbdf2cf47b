//! Run configuration: a flat `key = value` file with keys mirroring the CLI
//! flag names; flags override file values. The environment variable
//! `PMCLAB_CONFIG` supplies the default config path.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::params::{AlphaSide, Branch, ImSign, ModelParams};
use crate::verify::{RunSpec, VerifySettings, RESIDUAL_NAMES};

pub const CONFIG_ENV_VAR: &str = "PMCLAB_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<OutputFormat> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Usage(format!("unknown format {other:?}"))),
        }
    }
}

/// Everything a run needs; built from defaults, then the config file, then
/// command-line flags, in that order.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub b: f64,
    pub c3: f64,
    pub branch: Option<Branch>,
    pub im_sign: ImSign,
    pub alpha_side: AlphaSide,
    /// Initial angle in radians; interval midpoint when absent.
    pub alpha0: Option<f64>,
    pub u_span: f64,
    pub h: f64,
    pub delta: f64,
    pub v_count: Option<usize>,
    pub v_step: Option<f64>,
    pub rho_scale: f64,
    pub margin_frac: f64,
    /// Absolute tolerance overrides per residual name.
    pub tol: BTreeMap<String, f64>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            b: 1.0,
            c3: 0.5,
            branch: None,
            im_sign: ImSign::Plus,
            alpha_side: AlphaSide::Acute,
            alpha0: None,
            u_span: 0.5,
            h: 1e-3,
            delta: crate::params::DEFAULT_DELTA,
            v_count: None,
            v_step: None,
            rho_scale: 1.0,
            margin_frac: 0.15,
            tol: BTreeMap::new(),
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    /// Family parameters with the branch check and the rho perturbation.
    pub fn params(&self) -> Result<ModelParams> {
        let mut p = ModelParams::family(self.b, self.c3)?
            .with_im_sign(self.im_sign)
            .with_alpha_side(self.alpha_side);
        if let Some(branch) = self.branch {
            if branch != p.branch {
                return Err(Error::InvalidParams(format!(
                    "branch {} is empty for c3 = {}",
                    branch.as_str(),
                    self.c3
                )));
            }
        }
        if self.rho_scale != 1.0 {
            p = p.with_rho_scale(self.rho_scale);
        }
        p.validate()?;
        Ok(p)
    }

    pub fn run_spec(&self, default_v_count: usize) -> RunSpec {
        RunSpec {
            alpha0: self.alpha0,
            u_span: self.u_span,
            h: self.h,
            delta: self.delta,
            v_count: self.v_count.unwrap_or(default_v_count),
            v_step: self.v_step,
        }
    }

    pub fn verify_settings(&self) -> VerifySettings {
        VerifySettings {
            margin_frac: self.margin_frac,
            include_boundary: false,
            tol_overrides: self.tol.clone(),
        }
    }

    /// Apply one `key = value` assignment (config-file key or flag name).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let parse_f64 = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::Usage(format!("{key}: invalid number {v:?}")))
        };
        match key {
            "b" => self.b = parse_f64(value)?,
            "c3" => self.c3 = parse_f64(value)?,
            "branch" => self.branch = Some(value.parse()?),
            "im-sign" => self.im_sign = value.parse()?,
            "alpha-side" => self.alpha_side = value.parse()?,
            "alpha0" => self.alpha0 = Some(parse_f64(value)?),
            "u-span" => self.u_span = parse_f64(value)?,
            "h" => self.h = parse_f64(value)?,
            "delta" => self.delta = parse_f64(value)?,
            "v-count" => {
                self.v_count = Some(value.parse::<usize>().map_err(|_| {
                    Error::Usage(format!("v-count: invalid count {value:?}"))
                })?)
            }
            "v-step" => self.v_step = Some(parse_f64(value)?),
            "rho-scale" => self.rho_scale = parse_f64(value)?,
            "margin-frac" => self.margin_frac = parse_f64(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            _ => {
                if let Some(name) = key.strip_prefix("tol.") {
                    if !RESIDUAL_NAMES.contains(&name) {
                        return Err(Error::Usage(format!("unknown residual name {name:?}")));
                    }
                    self.tol.insert(name.to_string(), parse_f64(value)?);
                } else {
                    return Err(Error::Usage(format!("unknown config key {key:?}")));
                }
            }
        }
        Ok(())
    }

    /// Parse a flat config file: one `key = value` per line, `#` comments.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Usage(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                ))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Resolve the config file: an explicit `--config` path (must exist) or
    /// the `PMCLAB_CONFIG` environment variable (must exist when set).
    pub fn load(explicit: Option<&Path>) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let path = match explicit {
            Some(p) => Some(p.to_path_buf()),
            None => std::env::var_os(CONFIG_ENV_VAR).map(PathBuf::from),
        };
        if let Some(p) = path {
            cfg.apply_file(&p)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("u-span", self.u_span),
            ("h", self.h),
            ("delta", self.delta),
            ("margin-frac", self.margin_frac),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Usage(format!("{key} = {v} must be nonnegative")));
            }
        }
        if self.h == 0.0 {
            return Err(Error::Usage("h must be positive".into()));
        }
        if self.v_count == Some(0) {
            return Err(Error::Usage("v-count must be positive".into()));
        }
        for (name, &tol) in &self.tol {
            if !tol.is_finite() || tol < 0.0 {
                return Err(Error::Usage(format!("tol.{name} = {tol} must be nonnegative")));
            }
        }
        Ok(())
    }
}

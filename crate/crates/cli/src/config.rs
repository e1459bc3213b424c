//! Run configuration: an optional JSON file overridden by flags.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use einsub::verify::{Tolerances, DEFAULT_SEED, SCHEMA_VERSION};

/// Errors that map to exit code 3.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Schwarzschild,
    RicciFlat,
    Custom,
    Clifford,
    CliffordPerturbed,
    Sine,
    Linear,
    Rotational,
    ProfileSurface,
    ExampleOne,
    #[value(alias = "nonrot-example2")]
    #[serde(alias = "nonrot-example2")]
    ExampleTwo,
    ExtraCodim,
    Perturbed,
}

impl Family {
    /// Snake-case name used for file stems and check names.
    pub fn slug(self) -> String {
        self.to_possible_value()
            .map(|v| v.get_name().replace('-', "_"))
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    Lifted,
    Literal,
}

/// Parameters shared by every subcommand; each uses the ones it needs.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamFlags {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<Family>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Gauss curvature of the base for the second example (1 or 0).
    #[arg(long)]
    pub k: Option<u8>,
    #[arg(long)]
    pub placement: Option<Placement>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub dphi0: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample points per fixture.
    #[arg(long)]
    pub points: Option<usize>,
    #[command(flatten)]
    pub tol: TolFlags,
}

macro_rules! tol_flags {
    ($($field:ident => $flag:literal),* $(,)?) => {
        /// Overrides of the tolerance table.
        #[derive(Debug, Clone, Default, Args)]
        pub struct TolFlags {
            $(
                #[arg(long = $flag)]
                pub $field: Option<f64>,
            )*
        }

        impl TolFlags {
            pub fn apply(&self, t: &mut Tolerances) {
                $(
                    if let Some(v) = self.$field {
                        t.$field = v;
                    }
                )*
            }
        }
    };
}

tol_flags! {
    closed_form => "tol-closed-form",
    drift => "tol-drift",
    drift_halving => "tol-drift-halving",
    identity => "tol-identity",
    margin_at_zero => "tol-margin-at-zero",
    einstein => "tol-einstein",
    spread_constant => "tol-spread-constant",
    spread_schwarzschild => "tol-spread-schwarzschild",
    negative => "tol-negative",
    pullback_analytic => "tol-pullback-analytic",
    pullback_quadrature => "tol-pullback-quadrature",
    flat_normal => "tol-flat-normal",
    umbilic => "tol-umbilic",
    grouping => "tol-grouping",
    delta => "tol-delta",
    intrinsic_extrinsic => "tol-intrinsic-extrinsic",
    gauss => "tol-gauss",
    dupin => "tol-dupin",
    codazzi => "tol-codazzi",
    appendix => "tol-appendix",
    fd_step => "tol-fd-step",
}

/// The configuration file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub family: Option<Family>,
    pub n: Option<usize>,
    pub rho: Option<f64>,
    pub eps: Option<f64>,
    pub c: Option<f64>,
    pub m: Option<usize>,
    pub k: Option<u8>,
    pub placement: Option<Placement>,
    pub t_end: Option<f64>,
    pub step: Option<f64>,
    pub phi0: Option<f64>,
    pub dphi0: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub points: Option<usize>,
    pub tolerances: Option<Tolerances>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(config_err(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }
}

/// Resolved settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub family: Option<Family>,
    pub n: Option<usize>,
    pub rho: Option<f64>,
    pub eps: Option<f64>,
    pub c: Option<f64>,
    pub m: Option<usize>,
    pub k: Option<u8>,
    pub placement: Placement,
    pub t_end: Option<f64>,
    pub step: f64,
    pub phi0: Option<f64>,
    pub dphi0: Option<f64>,
    pub out: PathBuf,
    pub seed: u64,
    pub points: Option<usize>,
    pub tol: Tolerances,
}

impl Settings {
    pub fn resolve(flags: &ParamFlags) -> anyhow::Result<Self> {
        let file = match &flags.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let mut tol = file.tolerances.unwrap_or_default();
        flags.tol.apply(&mut tol);
        tol.validate().map_err(|e| config_err(e.to_string()))?;
        let s = Settings {
            family: flags.family.or(file.family),
            n: flags.n.or(file.n),
            rho: flags.rho.or(file.rho),
            eps: flags.eps.or(file.eps),
            c: flags.c.or(file.c),
            m: flags.m.or(file.m),
            k: flags.k.or(file.k),
            placement: flags.placement.or(file.placement).unwrap_or(Placement::Lifted),
            t_end: flags.t_end.or(file.t_end),
            step: flags.step.or(file.step).unwrap_or(einsub::warpfunc::DEFAULT_STEP),
            phi0: flags.phi0.or(file.phi0),
            dphi0: flags.dphi0.or(file.dphi0),
            out: flags.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            points: flags.points.or(file.points),
            tol,
        };
        if !(s.step > 0.0 && s.step.is_finite()) {
            return Err(config_err(format!("step must be positive, got {}", s.step)));
        }
        if s.points == Some(0) {
            return Err(config_err("points must be positive"));
        }
        if let Some(k) = s.k {
            if k > 1 {
                return Err(config_err(format!("k must be 0 or 1, got {k}")));
            }
        }
        Ok(s)
    }

    pub fn n_or(&self, default: usize) -> usize {
        self.n.unwrap_or(default)
    }

    pub fn points_or(&self, default: usize) -> usize {
        self.points.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(Family::ExampleTwo.slug(), "example_two");
        assert_eq!(Family::CliffordPerturbed.slug(), "clifford_perturbed");
    }

    #[test]
    fn flags_override_table() {
        let mut t = Tolerances::default();
        let f = TolFlags {
            gauss: Some(3e-4),
            ..Default::default()
        };
        f.apply(&mut t);
        assert_eq!(t.gauss, 3e-4);
        assert_eq!(t.einstein, Tolerances::default().einstein);
    }

    #[test]
    fn defaults_resolve() {
        let s = Settings::resolve(&ParamFlags::default()).unwrap();
        assert_eq!(s.seed, DEFAULT_SEED);
        assert_eq!(s.placement, Placement::Lifted);
        assert_eq!(s.out, PathBuf::from("out"));
    }
}

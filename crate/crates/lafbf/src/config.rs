//! CLI argument and config-file handling.
//!
//! Config files are flat `key = value` text (also accepted without spaces);
//! command-line flags mirror the keys one-to-one and override them.
//! Defaults: size=256 (r=255), hurst=0.2, alpha=0.1, epsilon=0.01,
//! regularized=true, sigma=alpha, seed=0.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::fbm::HurstIndex;
use crate::grid_io::{self, GridFormat};
use crate::orientation::{AngleRaster, OrientationField};
use crate::synthesis::SynthesisParams;

#[derive(Debug, Parser)]
#[command(
    name = "lafbf",
    about = "Gaussian texture synthesis with prescribed local orientation (turning bands)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a texture grid and write it to disk.
    Synth(SynthArgs),
    /// Print the band plan as CSV (p,q,theta,lambda,cost).
    Bands(BandsArgs),
    /// Monte-Carlo variogram vs. quadrature as CSV.
    Variogram(VariogramArgs),
    /// Run the built-in statistical sanity checks.
    Validate(ValidateArgs),
}

#[derive(Debug, Default, Args)]
pub struct ParamArgs {
    /// Flat key=value config file; flags override file keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Grid side length r+1; must be a power of two.
    #[arg(long)]
    pub size: Option<usize>,
    /// Hurst index in (0, 1).
    #[arg(long)]
    pub hurst: Option<f64>,
    /// Sector half-width in (0, pi/2].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Maximum angular band gap.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Gaussian-regularized angular weight instead of the sharp indicator.
    #[arg(long)]
    pub regularized: Option<bool>,
    /// Regularization width (defaults to alpha).
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// constant:<radians> | v1 | v2 | v3 | raster:<path> | gradient:<path>
    #[arg(long)]
    pub orientation: Option<String>,
    /// Output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// pgm | raw
    #[arg(long)]
    pub format: Option<String>,
    /// Overwrite an existing output file.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct BandsArgs {
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct VariogramArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Constant orientation (radians) of the stationary field.
    #[arg(long, default_value_t = 0.0)]
    pub alpha0: f64,
    /// Independent realizations.
    #[arg(long, default_value_t = 100)]
    pub seeds: u64,
    /// Largest lag (pixels) along each of the 4 probe directions.
    #[arg(long, default_value_t = 16)]
    pub max_lag: i64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Realizations for the Monte-Carlo checks.
    #[arg(long, default_value_t = 50)]
    pub seeds: u64,
}

/// Fully resolved run configuration.
#[derive(Debug)]
pub struct RunConfig {
    pub params: SynthesisParams,
    pub orientation_spec: String,
    pub out: Option<PathBuf>,
    pub format: GridFormat,
    pub force: bool,
}

const PARAM_KEYS: &[&str] = &[
    "size",
    "hurst",
    "alpha",
    "epsilon",
    "seed",
    "regularized",
    "sigma",
    "orientation",
    "out",
    "format",
];

fn load_config_file(path: &PathBuf) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "{}:{}: expected key=value, got '{line}'",
                path.display(),
                lineno + 1
            ))
        })?;
        let key = key.trim().to_string();
        if !PARAM_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "{}:{}: unknown key '{key}' (accepted: {})",
                path.display(),
                lineno + 1,
                PARAM_KEYS.join(", ")
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse_key<T: std::str::FromStr>(map: &HashMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
            Error::Config(format!("config key '{key}': cannot parse '{raw}': {e}"))
        }),
    }
}

/// Resolve params from defaults, then config file, then flags.
pub fn resolve_params(args: &ParamArgs) -> Result<SynthesisParams> {
    let file = match &args.config {
        Some(path) => load_config_file(path)?,
        None => HashMap::new(),
    };

    let size: usize = args
        .size
        .or(parse_key(&file, "size")?)
        .unwrap_or(256);
    if size < 2 || !size.is_power_of_two() {
        return Err(Error::Config(format!(
            "size must be a power of two >= 2 (grid order r = 2^k - 1), got {size}"
        )));
    }
    let hurst = args.hurst.or(parse_key(&file, "hurst")?).unwrap_or(0.2);
    let alpha = args.alpha.or(parse_key(&file, "alpha")?).unwrap_or(0.1);
    let epsilon = args
        .epsilon
        .or(parse_key(&file, "epsilon")?)
        .unwrap_or(0.01);
    let seed = args.seed.or(parse_key(&file, "seed")?).unwrap_or(0);
    let regularized = args
        .regularized
        .or(parse_key(&file, "regularized")?)
        .unwrap_or(true);
    let sigma = args.sigma.or(parse_key(&file, "sigma")?).unwrap_or(alpha);

    SynthesisParams::new(
        HurstIndex::new(hurst)?,
        alpha,
        epsilon,
        size - 1,
        seed,
        regularized,
        sigma,
    )
}

/// Resolve the full `synth` configuration.
pub fn parse_config(args: &SynthArgs) -> Result<RunConfig> {
    let params = resolve_params(&args.params)?;
    let file = match &args.params.config {
        Some(path) => load_config_file(path)?,
        None => HashMap::new(),
    };
    let orientation_spec = args
        .orientation
        .clone()
        .or_else(|| file.get("orientation").cloned())
        .unwrap_or_else(|| "constant:0".to_string());
    // Validate the spec eagerly so errors surface before any computation.
    build_orientation(&orientation_spec)?;
    let out = args
        .out
        .clone()
        .or_else(|| file.get("out").map(PathBuf::from));
    let format: GridFormat = args
        .format
        .clone()
        .or_else(|| file.get("format").cloned())
        .unwrap_or_else(|| "pgm".to_string())
        .parse()?;
    Ok(RunConfig {
        params,
        orientation_spec,
        out,
        format,
        force: args.force,
    })
}

/// Build an orientation field from its textual spec.
pub fn build_orientation(spec: &str) -> Result<OrientationField> {
    if let Some(rest) = spec.strip_prefix("constant:") {
        let angle: f64 = rest.parse().map_err(|e| {
            Error::Config(format!("orientation constant: cannot parse '{rest}': {e}"))
        })?;
        return Ok(OrientationField::Constant(angle));
    }
    if let Some(path) = spec.strip_prefix("raster:") {
        let (rows, cols, angles) = grid_io::read_raster(&PathBuf::from(path))?;
        return Ok(OrientationField::Raster(AngleRaster::from_angles(
            rows, cols, angles,
        )?));
    }
    if let Some(path) = spec.strip_prefix("gradient:") {
        let (rows, cols, field) = grid_io::read_raster(&PathBuf::from(path))?;
        return Ok(OrientationField::GradientOfRaster(
            AngleRaster::from_scalar_field(rows, cols, field)?,
        ));
    }
    match spec {
        "v1" => Ok(OrientationField::PresetV1),
        "v2" => Ok(OrientationField::PresetV2),
        "v3" => Ok(OrientationField::PresetV3),
        other => Err(Error::Config(format!(
            "orientation must be constant:<radians> | v1 | v2 | v3 | raster:<path> | gradient:<path>, got '{other}'"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn synth_args(extra: &[&str]) -> SynthArgs {
        let mut argv = vec!["lafbf", "synth"];
        argv.extend_from_slice(extra);
        match Cli::try_parse_from(argv).unwrap().command {
            Command::Synth(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn defaults_match_simulation_parameters() {
        let cfg = parse_config(&synth_args(&[])).unwrap();
        assert_eq!(cfg.params.grid_order, 255);
        assert_eq!(cfg.params.hurst.value(), 0.2);
        assert_eq!(cfg.params.alpha, 0.1);
        assert_eq!(cfg.params.epsilon, 0.01);
        assert!(cfg.params.regularized);
        assert_eq!(cfg.params.sigma, 0.1);
        assert_eq!(cfg.params.seed, 0);
        assert_eq!(cfg.format, GridFormat::Pgm);
    }

    #[test]
    fn flags_parse_into_config() {
        let cfg = parse_config(&synth_args(&[
            "--size",
            "256",
            "--hurst",
            "0.2",
            "--orientation",
            "v1",
            "--seed",
            "7",
            "--out",
            "t.pgm",
        ]))
        .unwrap();
        assert_eq!(cfg.params.grid_order, 255);
        assert_eq!(cfg.params.seed, 7);
        assert_eq!(cfg.orientation_spec, "v1");
        assert_eq!(cfg.out.as_deref(), Some(std::path::Path::new("t.pgm")));
    }

    #[test]
    fn hurst_out_of_range_rejected() {
        let err = parse_config(&synth_args(&["--hurst", "1.5"])).unwrap_err();
        assert!(err.to_string().contains("(0, 1)"), "{err}");
    }

    #[test]
    fn size_must_be_power_of_two() {
        let err = parse_config(&synth_args(&["--size", "100"])).unwrap_err();
        assert!(err.to_string().contains("power of two"), "{err}");
    }

    #[test]
    fn config_file_keys_and_flag_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        let mut f = fs::File::create(&path).unwrap();
        writeln!(f, "# comment").unwrap();
        writeln!(f, "hurst = 0.4").unwrap();
        writeln!(f, "size = 64").unwrap();
        writeln!(f, "orientation = v2").unwrap();
        drop(f);

        let cfg = parse_config(&synth_args(&[
            "--config",
            path.to_str().unwrap(),
            "--hurst",
            "0.3",
        ]))
        .unwrap();
        assert_eq!(cfg.params.hurst.value(), 0.3); // flag wins
        assert_eq!(cfg.params.grid_order, 63); // file key applies
        assert_eq!(cfg.orientation_spec, "v2");
    }

    #[test]
    fn unknown_config_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "hirst = 0.4\n").unwrap();
        let err = parse_config(&synth_args(&["--config", path.to_str().unwrap()])).unwrap_err();
        assert!(err.to_string().contains("unknown key 'hirst'"), "{err}");
    }

    #[test]
    fn orientation_specs_parse() {
        assert!(build_orientation("v1").is_ok());
        assert!(build_orientation("constant:0.7").is_ok());
        assert!(build_orientation("spiral").is_err());
        assert!(build_orientation("constant:abc").is_err());
    }
}

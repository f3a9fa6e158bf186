//! Command-line arguments and their validation into a [`RunConfig`].

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nodal_core::estimators::EstimatorId;
use nodal_core::fields::syntax::parse_field;
use nodal_core::fields::FieldSpec;
use nodal_core::geometry::ManifoldSpec;
use nodal_core::{Error, Result};

/// Name of the boundary-flux estimator used on boxes.
pub const CORNER: &str = "corner";

#[derive(Debug, Parser)]
#[command(name = "nodal", version, about = "Volume of nodal sets f^-1(0) on model manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate estimators at each resolution and print one CSV row per run.
    Estimate(CommonArgs),
    /// Compare estimators with each other and with the level-set oracle.
    Compare(CommonArgs),
    /// Convergence sweep over at least three resolutions.
    Converge(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// torus1, torus2, torus3, sphere2, box1 or box2.
    #[arg(long)]
    pub manifold: String,
    /// Inline field spec, e.g. 'trig:[k=(1,0),b=1]'.
    #[arg(long, conflicts_with = "field_file", required_unless_present = "field_file")]
    pub field: Option<String>,
    /// File holding an inline spec or its JSON serialization.
    #[arg(long)]
    pub field_file: Option<PathBuf>,
    /// Estimator name (repeatable or comma separated); "all" selects every
    /// estimator that applies to the manifold.
    #[arg(long = "estimator", value_delimiter = ',')]
    pub estimators: Vec<String>,
    /// N, or NxM on the sphere (repeatable, strictly increasing).
    #[arg(long = "resolution", value_delimiter = ',')]
    pub resolutions: Vec<String>,
    /// Oracle grid; defaults to 4x the finest resolution (2x on sphere2 and torus3).
    #[arg(long)]
    pub oracle_resolution: Option<String>,
    /// Skip the oracle (compare then uses the estimator median).
    #[arg(long, conflicts_with = "oracle_resolution")]
    pub no_oracle: bool,
    /// Relative tolerance for compare.
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    /// Output path, "-" for stdout.
    #[arg(long, default_value = "-")]
    pub out: String,
    /// Replaces the seed of a random field.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write 0 for every runtime so that output is reproducible bytewise.
    #[arg(long)]
    pub no_timing: bool,
    /// Write the oracle's extracted pieces to this file.
    #[arg(long)]
    pub dump_oracle: Option<PathBuf>,
}

/// One estimator selected on the command line.
#[derive(Debug, Clone, Copy)]
pub enum Formula {
    Closed(EstimatorId),
    Corner,
}

impl Formula {
    pub fn name(&self) -> String {
        match self {
            Self::Closed(e) => e.name(),
            Self::Corner => CORNER.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub manifold: ManifoldSpec,
    pub field: FieldSpec,
    pub formulas: Vec<Formula>,
    pub resolutions: Vec<Vec<usize>>,
    /// `None` when the oracle is disabled.
    pub oracle_resolution: Option<Vec<usize>>,
    pub tol: f64,
    pub out: String,
    pub timing: bool,
    pub dump_oracle: Option<PathBuf>,
}

pub fn parse_resolution(s: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = s.trim().split(['x', 'X']).collect();
    let res = parts
        .iter()
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Config(format!("resolution: '{s}' is not N or NxM")))?;
    if res.is_empty() || res.len() > 2 || res.contains(&0) {
        return Err(Error::Config(format!("resolution: '{s}' is not N or NxM")));
    }
    Ok(res)
}

fn parse_formulas(names: &[String], m: &ManifoldSpec) -> Result<Vec<Formula>> {
    let mut formulas = Vec::new();
    for name in names.iter().map(|n| n.trim()) {
        if name == "all" {
            if m.has_boundary() {
                formulas.push(Formula::Corner);
            } else {
                formulas.extend(EstimatorId::all().into_iter().map(Formula::Closed));
            }
        } else if name == CORNER {
            if !m.has_boundary() {
                return Err(Error::Config(format!("estimator: '{CORNER}' needs box1 or box2, got {m}")));
            }
            formulas.push(Formula::Corner);
        } else if name.is_empty() {
            continue;
        } else {
            let est: EstimatorId = name
                .parse()
                .map_err(|e: Error| Error::Config(format!("estimator: {}", strip_prefix(&e))))?;
            if m.has_boundary() {
                return Err(Error::Config(format!(
                    "estimator: {m} only supports '{CORNER}', got '{name}'"
                )));
            }
            formulas.push(Formula::Closed(est));
        }
    }
    if formulas.is_empty() {
        return Err(Error::Config("estimator: the formula list is empty".into()));
    }
    Ok(formulas)
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(msg) => msg.clone(),
        other => other.to_string(),
    }
}

/// Default oracle grid for the finest resolution `res`.
pub fn default_oracle_resolution(m: &ManifoldSpec, res: &[usize]) -> Vec<usize> {
    let factor = match m {
        ManifoldSpec::UnitSphere2 | ManifoldSpec::FlatTorus { dim: 3 } => 2,
        _ => 4,
    };
    res.iter().map(|n| factor * n).collect()
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs, min_resolutions: usize) -> Result<Self> {
        let manifold: ManifoldSpec = args
            .manifold
            .parse()
            .map_err(|e: Error| Error::Config(format!("manifold: {}", strip_prefix(&e))))?;
        let text = match (&args.field, &args.field_file) {
            (Some(s), _) => s.clone(),
            (None, Some(path)) => fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("field-file: {}: {e}", path.display())))?,
            (None, None) => return Err(Error::Config("field: no field given".into())),
        };
        let mut field = parse_field(text.trim())
            .map_err(|e| Error::Config(format!("field: {}", strip_prefix(&e))))?;
        if let Some(seed) = args.seed {
            field = field.with_seed(seed);
        }
        let formulas = parse_formulas(&args.estimators, &manifold)?;

        let resolutions = args
            .resolutions
            .iter()
            .map(|s| parse_resolution(s))
            .collect::<Result<Vec<_>>>()?;
        if resolutions.len() < min_resolutions {
            return Err(Error::Config(format!(
                "resolution: at least {min_resolutions} needed, got {}",
                resolutions.len()
            )));
        }
        if resolutions.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(Error::Config("resolution: values must be strictly increasing".into()));
        }
        let oracle_resolution = if args.no_oracle {
            None
        } else {
            Some(match &args.oracle_resolution {
                Some(s) => parse_resolution(s)?,
                None => default_oracle_resolution(&manifold, resolutions.last().unwrap()),
            })
        };
        if !(args.tol > 0.0) {
            return Err(Error::Config(format!("tol: must be positive, got {}", args.tol)));
        }
        Ok(Self {
            manifold,
            field,
            formulas,
            resolutions,
            oracle_resolution,
            tol: args.tol,
            out: args.out.clone(),
            timing: !args.no_timing,
            dump_oracle: args.dump_oracle.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolutions_parse() {
        assert_eq!(parse_resolution("512").unwrap(), vec![512]);
        assert_eq!(parse_resolution("256x512").unwrap(), vec![256, 512]);
        for bad in ["", "x", "0", "12x", "1x2x3", "-4"] {
            assert!(parse_resolution(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn boxes_only_take_the_corner_formula() {
        let b = ManifoldSpec::flat_box(2).unwrap();
        assert!(matches!(parse_formulas(&["all".into()], &b).unwrap()[..], [Formula::Corner]));
        assert!(parse_formulas(&["algebraic".into()], &b).is_err());
        let t = ManifoldSpec::torus(2).unwrap();
        assert!(parse_formulas(&[CORNER.into()], &t).is_err());
        assert_eq!(parse_formulas(&["all".into()], &t).unwrap().len(), EstimatorId::NAMES.len());
        assert!(parse_formulas(&[], &t).is_err());
        assert!(parse_formulas(&["".into()], &t).is_err());
    }
}

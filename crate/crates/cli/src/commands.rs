//! The `estimate`, `compare` and `converge` subcommands.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};

use nodal_core::estimators::{estimate, estimate_corner};
use nodal_core::oracle::{oracle, OracleOutput};
use nodal_core::quadrature::{box_face_rules, box_rule, resolution_label, rule_for};
use nodal_core::report::EstimateReport;
use nodal_core::{Error, Result};

use crate::config::{Formula, RunConfig};

pub const COMPARE_HEADER: &str = "source,resolution,value,reference,rel_deviation,runtime_ms";
pub const CONVERGE_HEADER: &str =
    "formula,resolution,estimate,abs_err_vs_oracle,integrand_max,min_eta,runtime_ms";

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Ok,
    /// Some deviation exceeded the tolerance.
    OutOfTolerance(String),
}

pub fn run_formula(cfg: &RunConfig, formula: &Formula, res: &[usize]) -> Result<EstimateReport> {
    let mut report = match formula {
        Formula::Closed(est) => {
            let rule = rule_for(&cfg.manifold, res)?;
            estimate(&cfg.field, &cfg.manifold, est, &rule)?
        }
        Formula::Corner => {
            let &[n] = res else {
                return Err(Error::Config(format!(
                    "resolution: {} on {} must be a single N",
                    resolution_label(res),
                    cfg.manifold
                )));
            };
            let dim = cfg.manifold.dim();
            estimate_corner(&cfg.field, &cfg.manifold, &box_rule(dim, n)?, &box_face_rules(dim, n)?)?
        }
    };
    if !cfg.timing {
        report.runtime_ms = 0.0;
    }
    Ok(report)
}

fn run_oracle(cfg: &RunConfig) -> Result<Option<OracleOutput>> {
    let Some(res) = &cfg.oracle_resolution else {
        return Ok(None);
    };
    let mut out = oracle(&cfg.field, &cfg.manifold, res, cfg.dump_oracle.is_some())?;
    if !cfg.timing {
        out.report.runtime_ms = 0.0;
    }
    if let Some(path) = &cfg.dump_oracle {
        let file = File::create(path)
            .map_err(|e| Error::Config(format!("dump-oracle: {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        out.write_pieces(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::Config(format!("dump-oracle: {}: {e}", path.display())))?;
    }
    Ok(Some(out))
}

/// `|v - reference| / |reference|`, or the absolute difference when the
/// reference is 0.
pub fn relative_deviation(v: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        (v - reference).abs()
    } else {
        (v - reference).abs() / reference.abs()
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn cmd_estimate(cfg: &RunConfig, out: &mut String) -> Result<Outcome> {
    out.push_str(EstimateReport::CSV_HEADER);
    out.push('\n');
    for formula in &cfg.formulas {
        for res in &cfg.resolutions {
            out.push_str(&run_formula(cfg, formula, res)?.csv_row());
            out.push('\n');
        }
    }
    Ok(Outcome::Ok)
}

pub fn cmd_compare(cfg: &RunConfig, out: &mut String) -> Result<Outcome> {
    let mut rows = Vec::new();
    for res in &cfg.resolutions {
        for formula in &cfg.formulas {
            rows.push(run_formula(cfg, formula, res)?);
        }
    }
    let oracle = run_oracle(cfg)?;

    out.push_str(COMPARE_HEADER);
    out.push('\n');
    let mut worst = (0.0f64, String::new());
    for res in &cfg.resolutions {
        let label = resolution_label(res);
        let here: Vec<&EstimateReport> = rows.iter().filter(|r| r.resolution == label).collect();
        let reference = match &oracle {
            Some(o) => o.report.value,
            None => median(&here.iter().map(|r| r.value).collect::<Vec<_>>()),
        };
        for r in here {
            let dev = relative_deviation(r.value, reference);
            if dev > worst.0 || worst.1.is_empty() {
                worst = (dev, format!("{} at {}", r.estimator, r.resolution));
            }
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.estimator, r.resolution, r.value, reference, dev, r.runtime_ms
            );
        }
    }
    if let Some(o) = &oracle {
        let r = &o.report;
        let _ = writeln!(
            out,
            "oracle:{},{},{},{},0,{}",
            r.method.name(),
            r.resolution,
            r.value,
            r.value,
            r.runtime_ms
        );
    }
    if worst.0 <= cfg.tol {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::OutOfTolerance(format!(
            "largest relative deviation {:e} ({}) exceeds tol {:e}",
            worst.0, worst.1, cfg.tol
        )))
    }
}

pub fn cmd_converge(cfg: &RunConfig, out: &mut String) -> Result<Outcome> {
    let oracle = run_oracle(cfg)?;
    out.push_str(CONVERGE_HEADER);
    out.push('\n');
    for formula in &cfg.formulas {
        for res in &cfg.resolutions {
            let r = run_formula(cfg, formula, res)?;
            let err = oracle
                .as_ref()
                .map(|o| (r.value - o.report.value).abs().to_string())
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.estimator, r.resolution, r.value, err, r.integrand_max, r.min_eta, r.runtime_ms
            );
        }
    }
    if let Some(o) = &oracle {
        eprintln!(
            "oracle {} at {}: {}",
            o.report.method.name(),
            o.report.resolution,
            o.report.value
        );
    }
    Ok(Outcome::Ok)
}

pub fn write_output(path: &str, text: &str) -> std::io::Result<()> {
    if path == "-" {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        lock.write_all(text.as_bytes())?;
        lock.flush()
    } else {
        std::fs::write(path, text)
    }
}

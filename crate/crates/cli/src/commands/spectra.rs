use std::fmt::Write;
use std::path::Path;

use annulus_core::criteria::MuMode;
use annulus_core::kernels::{Kernel, WindowPair};
use annulus_core::problem::{load_problem, SpectralConfig};
use annulus_core::spectral::{principal_char_value, LinearOperator, SpectralResult};
use anyhow::{Context, Result};
use serde_json::json;

use super::{to_json, write_artifact, Output};
use crate::args::SpectraArgs;
use crate::format::{g6, Table};

fn used(r: &SpectralResult, mode: MuMode) -> f64 {
    match mode {
        MuMode::Paper => r.mu_closed_form.unwrap_or(r.mu_numeric),
        MuMode::Numeric => r.mu_numeric,
        MuMode::Shooting => r.mu_shooting.unwrap_or(r.mu_numeric),
    }
}

/// Eigenfunctions side by side; operators on shorter intervals are sampled
/// on their own grids, so each gets its own `t` column.
fn eigen_csv(results: &[SpectralResult]) -> String {
    let mut s = String::new();
    let header: Vec<String> = results.iter().flat_map(|r| [format!("t_{}", r.operator.name()), r.operator.name()]).collect();
    writeln!(s, "{}", header.join(",")).unwrap();
    let rows = results.iter().map(|r| r.eigenfunction.len()).max().unwrap_or(0);
    for j in 0..rows {
        let cells: Vec<String> = results
            .iter()
            .flat_map(|r| {
                let f = &r.eigenfunction;
                if j < f.len() {
                    [f.node(j).to_string(), f.values()[j].to_string()]
                } else {
                    [String::new(), String::new()]
                }
            })
            .collect();
        writeln!(s, "{}", cells.join(",")).unwrap();
    }
    s
}

pub fn run(args: &SpectraArgs, out: Option<&Path>) -> Result<Output> {
    let (windows, cfg, source) = match &args.file {
        Some(path) => {
            let p = load_problem(path).with_context(|| format!("loading {}", path.display()))?;
            (p.windows, p.spectral, path.display().to_string())
        }
        None => (WindowPair::new(0.25, 0.75, 0.5, 1.0)?, SpectralConfig::default(), "defaults".to_string()),
    };
    let mode = args.mu_mode.unwrap_or(cfg.mu_mode);
    let nodes = args.nodes.unwrap_or(cfg.nodes);
    let mut ops = vec![LinearOperator::L1, LinearOperator::L2];
    for k in Kernel::ALL {
        let (a, b) = windows.window(k);
        ops.push(LinearOperator::restricted(k, a, b));
    }
    let results = ops
        .iter()
        .map(|&op| principal_char_value(op, nodes).with_context(|| format!("operator {}", op.name())))
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(&["operator", "closed form", "numeric", "shooting", "used", "closed form dev", "residual"]);
    for r in &results {
        table.row(vec![
            r.operator.name(),
            r.mu_closed_form.map(g6).unwrap_or_default(),
            g6(r.mu_numeric),
            r.mu_shooting.map(g6).unwrap_or_default(),
            g6(used(r, mode)),
            r.closed_form_deviation().map(|d| format!("{:+.3e}", d)).unwrap_or_default(),
            format!("{:.1e}", r.residual),
        ]);
    }
    let mut text = format!("principal characteristic values ({source}, N = {nodes}, used: {mode})\n");
    text.push_str(&table.render("  "));

    let rows: Vec<_> = results
        .iter()
        .map(|r| {
            json!({
                "operator": r.operator,
                "name": r.operator.name(),
                "mu_closed_form": r.mu_closed_form,
                "mu_numeric": r.mu_numeric,
                "mu_shooting": r.mu_shooting,
                "mu_used": used(r, mode),
                "closed_form_deviation": r.closed_form_deviation(),
                "residual": r.residual,
                "nodes": r.nodes,
            })
        })
        .collect();
    let json = json!({ "command": "spectra", "source": source, "nodes": nodes, "mu_mode": to_json(&mode), "operators": rows });
    if let Some(dir) = out {
        let path = write_artifact(dir, "eigenfunctions.csv", &eigen_csv(&results))?;
        writeln!(text, "wrote {}", path.display()).unwrap();
    }
    Ok(Output { pass: true, text, json })
}

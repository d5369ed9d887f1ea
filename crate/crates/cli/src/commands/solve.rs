use std::fmt::Write;
use std::path::Path;

use annulus_core::problem::load_problem;
use annulus_core::solver::{multi_start, SolveResult};
use anyhow::{Context, Result};
use serde_json::json;

use super::{write_artifact, Output};
use crate::args::SolveArgs;
use crate::format::{g6, pass_fail, Table};

fn summary(s: &SolveResult) -> serde_json::Value {
    let (nu, nv) = s.norms();
    json!({
        "amplitude": s.amplitude,
        "norm_u": nu,
        "norm_v": nv,
        "trivial": s.is_trivial(),
        "iterations": s.iterations,
        "method": s.method,
        "residual_fp": s.residual_fp,
        "residual_deriv": s.residual_deriv,
        "residual_ode": s.residual_ode,
        "certification": s.certification,
    })
}

pub fn run(args: &SolveArgs, out: &Path) -> Result<Output> {
    let mut problem = load_problem(&args.file).with_context(|| format!("loading {}", args.file.display()))?;
    if let Some(n) = args.nodes {
        problem.solver.nodes = n;
    }
    let amplitudes = args.amplitudes.clone().unwrap_or_else(|| problem.solver.amplitudes.clone());
    let ms = multi_start(&problem, &amplitudes)?;

    // Prefer fixed points with both components nonzero, then the smallest residual.
    let both = |s: &SolveResult| {
        let (nu, nv) = s.norms();
        nu > 0.0 && nv > 0.0
    };
    let best = ms
        .nontrivial()
        .min_by(|a, b| both(b).cmp(&both(a)).then(a.residual_fp.total_cmp(&b.residual_fp)));
    let pass = best.is_some();
    let chosen = best.or_else(|| ms.solutions.iter().find(|s| s.is_trivial()));

    let mut table = Table::new(&["start", "|u|inf", "|v|inf", "residual", "iterations", "certified", "note"]);
    for s in &ms.solutions {
        let (nu, nv) = s.norms();
        let cert = s.certification.as_ref();
        let note = if s.is_trivial() {
            "trivial solution".to_string()
        } else {
            cert.map(|c| c.violations.join("; ")).unwrap_or_default()
        };
        table.row(vec![
            s.amplitude.map(g6).unwrap_or_else(|| "zero".into()),
            g6(nu),
            g6(nv),
            format!("{:.2e}", s.residual_fp),
            s.iterations.to_string(),
            pass_fail(cert.is_some_and(|c| c.verified)),
            note,
        ]);
    }
    let mut text = format!(
        "{}: {} start(s) at N = {}, {} distinct fixed point(s)\n",
        args.file.display(),
        amplitudes.len(),
        problem.solver.nodes,
        ms.solutions.len()
    );
    text.push_str(&table.render("  "));
    for f in &ms.failures {
        writeln!(text, "  start {} failed: {}", g6(f.amplitude), f.reason).unwrap();
    }
    match (best, chosen) {
        (Some(s), _) => {
            let (nu, nv) = s.norms();
            writeln!(text, "nontrivial certified solution: |u|inf = {}, |v|inf = {}", g6(nu), g6(nv)).unwrap();
        }
        (None, Some(_)) => writeln!(text, "only the trivial solution was found (flagged: not a positive solution)").unwrap(),
        (None, None) => writeln!(text, "no fixed point found").unwrap(),
    }

    let json = json!({
        "command": "solve",
        "file": args.file.display().to_string(),
        "nodes": problem.solver.nodes,
        "amplitudes": amplitudes,
        "pass": pass,
        "trivial_only": !pass && chosen.is_some(),
        "solutions": ms.solutions.iter().map(summary).collect::<Vec<_>>(),
        "failures": ms.failures,
        "chosen": chosen.map(summary),
    });
    let report = write_artifact(out, "report.json", &serde_json::to_string_pretty(&json)?)?;
    writeln!(text, "wrote {}", report.display()).unwrap();
    if let Some(s) = chosen {
        let csv = write_artifact(out, "solution.csv", &s.to_csv())?;
        writeln!(text, "wrote {}", csv.display()).unwrap();
    }
    Ok(Output { pass, text, json })
}

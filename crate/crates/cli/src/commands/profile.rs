//! `decompose` and `mollify`: cone constructions on a single profile.

use std::fmt::Write;
use std::path::Path;

use annulus_core::cone::{
    approximate_by_difference, cone_membership, convergence_report, decompose, norms, ConeVerdict, WeightedSpaceTag,
};
use annulus_core::kernels::Kernel;
use annulus_core::GridFunction;
use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use super::{to_json, write_artifact, Output};
use crate::args::{DecomposeArgs, MollifyArgs, ProfileArgs};
use crate::format::{g6, pass_fail, Table};

/// Reads a uniform-grid CSV profile with a `t` column.
pub fn read_profile(path: &Path, column: Option<&str>) -> Result<(GridFunction, String)> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let t_col = headers.iter().position(|h| h.trim() == "t").ok_or_else(|| anyhow!("{}: no `t` column", path.display()))?;
    let w_col = match column {
        Some(name) => headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| anyhow!("{}: no `{name}` column", path.display()))?,
        None => (0..headers.len()).find(|&i| i != t_col).ok_or_else(|| anyhow!("{}: no value column", path.display()))?,
    };
    let mut t = Vec::new();
    let mut w = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let cell = |i: usize| -> Result<f64> {
            let s = record.get(i).unwrap_or("").trim();
            s.parse().with_context(|| format!("{}: row {}: `{s}` is not a number", path.display(), line + 2))
        };
        t.push(cell(t_col)?);
        w.push(cell(w_col)?);
    }
    if t.len() < 3 {
        bail!("{}: need at least 3 rows, got {}", path.display(), t.len());
    }
    let (lo, hi) = (t[0], t[t.len() - 1]);
    let h = (hi - lo) / (t.len() - 1) as f64;
    if let Some(j) = t.iter().enumerate().position(|(j, &x)| (x - (lo + j as f64 * h)).abs() > 1e-9 * (hi - lo)) {
        bail!("{}: the t column is not a uniform grid (row {})", path.display(), j + 2);
    }
    let g = GridFunction::from_values(lo, hi, w)?;
    Ok((g, headers[w_col].trim().to_string()))
}

/// Demo profile for `decompose`: steep enough that `‖w'‖_ω > ‖w‖∞`.
fn decompose_demo() -> Result<GridFunction> {
    Ok(GridFunction::sample(401, |t| (3.0 * std::f64::consts::PI * t).sin().powi(2) + 0.1)?)
}

fn load(args: &ProfileArgs, demo: impl Fn() -> Result<GridFunction>, demo_name: &str) -> Result<(GridFunction, String)> {
    match &args.file {
        Some(path) => {
            let (g, col) = read_profile(path, args.column.as_deref())?;
            Ok((g, format!("{} ({col})", path.display())))
        }
        None => Ok((demo()?, format!("demo: {demo_name}"))),
    }
}

fn verdict_row(name: &str, v: &ConeVerdict) -> Vec<String> {
    vec![
        name.into(),
        g6(v.nonnegative.margin),
        g6(v.window.margin),
        g6(v.derivative.margin),
        pass_fail(v.member),
    ]
}

pub fn decompose_cmd(args: &DecomposeArgs, out: &Path) -> Result<Output> {
    let (w, source) = load(&args.profile, decompose_demo, "sin(3 pi t)^2 + 0.1")?;
    let kernel = args.profile.weight.kernel();
    let (a, b) = match args.window.as_deref() {
        Some(&[a, b]) => (a, b),
        Some(_) => bail!("--window takes two numbers a,b"),
        None => match kernel {
            Kernel::K1 => (0.25, 0.75),
            Kernel::K2 => (0.5, 1.0),
        },
    };
    let c = kernel.c_constant(a, b)?;
    let tag = WeightedSpaceTag::new(kernel, a, b, c)?;
    let d = decompose(&w, &tag)?;
    let n = norms(&w, &tag);
    let phi_v = cone_membership(&d.phi, &tag, 1e-10);
    let psi_v = cone_membership(&d.psi, &tag, 1e-10);
    let w_v = cone_membership(&w, &tag, 1e-10);
    let residual = (0..w.len())
        .map(|j| (d.phi.values()[j] - d.psi.values()[j] - w.values()[j]).abs())
        .fold(0.0, f64::max);

    let mut text = format!("{source}: {} nodes, weight {kernel:?}, window [{}, {}], c = {}\n", w.len(), g6(a), g6(b), g6(c));
    writeln!(text, "  |w|inf = {}, |w'|omega = {}", g6(n.sup), g6(n.weighted_deriv)).unwrap();
    writeln!(text, "  beta = {}, gamma = {}, |phi - psi - w|inf = {:.1e}", g6(d.beta), g6(d.gamma), residual).unwrap();
    let mut table = Table::new(&["profile", "min", "window margin", "derivative margin", "in cone"]);
    table.row(verdict_row("w", &w_v));
    table.row(verdict_row("phi", &phi_v));
    table.row(verdict_row("psi", &psi_v));
    text.push_str(&table.render("  "));

    let mut csv = String::from("t,w,phi,psi\n");
    for j in 0..w.len() {
        writeln!(csv, "{},{},{},{}", w.node(j), w.values()[j], d.phi.values()[j], d.psi.values()[j]).unwrap();
    }
    let path = write_artifact(out, "decomposition.csv", &csv)?;
    writeln!(text, "wrote {}", path.display()).unwrap();

    let pass = phi_v.member && psi_v.member;
    let json = json!({
        "command": "decompose",
        "source": source,
        "weight": format!("{kernel:?}"),
        "window": [a, b],
        "c": c,
        "norms": to_json(&n),
        "beta": d.beta,
        "gamma": d.gamma,
        "trivial": d.trivial,
        "residual": residual,
        "cone": { "w": to_json(&w_v), "phi": to_json(&phi_v), "psi": to_json(&psi_v) },
        "pass": pass,
    });
    Ok(Output { pass, text, json })
}

fn mollify_demo() -> Result<GridFunction> {
    Ok(GridFunction::sample(2049, f64::sqrt)?)
}

pub fn mollify_cmd(args: &MollifyArgs, out: &Path) -> Result<Output> {
    let (w, source) = load(&args.profile, mollify_demo, "sqrt(t)")?;
    if args.n_list.is_empty() {
        bail!("--n-list is empty");
    }
    let kernel = args.profile.weight.kernel();
    let rows = convergence_report(&w, kernel, &args.n_list)?;
    let windows = annulus_core::kernels::WindowPair::new(0.25, 0.75, 0.5, 1.0)?;
    let tag = WeightedSpaceTag::for_component(&windows, kernel);

    let mut table = Table::new(&["n", "|w_n - w|inf", "|w_n' - w'|omega", "phi_n, psi_n in cone"]);
    let mut csv = String::from("n,sup_error,weighted_deriv_error,difference_in_cone\n");
    let mut json_rows = Vec::new();
    for r in &rows {
        let (phi, psi) = approximate_by_difference(&w, &tag, r.n)?;
        let members = cone_membership(&phi, &tag, 1e-10).member && cone_membership(&psi, &tag, 1e-10).member;
        table.row(vec![r.n.to_string(), g6(r.sup_error), g6(r.weighted_deriv_error), pass_fail(members)]);
        writeln!(csv, "{},{},{},{}", r.n, r.sup_error, r.weighted_deriv_error, members).unwrap();
        json_rows.push(json!({
            "n": r.n,
            "sup_error": r.sup_error,
            "weighted_deriv_error": r.weighted_deriv_error,
            "difference_in_cone": members,
        }));
    }
    let nonincreasing = rows
        .windows(2)
        .all(|p| p[1].sup_error <= p[0].sup_error + 1e-12 && p[1].weighted_deriv_error <= p[0].weighted_deriv_error + 1e-12);
    let mut text = format!("{source}: {} nodes, weight {kernel:?}\n", w.len());
    text.push_str(&table.render("  "));
    writeln!(text, "  errors nonincreasing in n: {}", if nonincreasing { "yes" } else { "no" }).unwrap();
    let path = write_artifact(out, "convergence.csv", &csv)?;
    writeln!(text, "wrote {}", path.display()).unwrap();
    let json = json!({
        "command": "mollify",
        "source": source,
        "weight": format!("{kernel:?}"),
        "rows": json_rows,
        "nonincreasing": nonincreasing,
    });
    Ok(Output { pass: nonincreasing, text, json })
}

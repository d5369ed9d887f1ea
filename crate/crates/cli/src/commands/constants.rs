use std::fmt::Write;

use annulus_core::kernels::Kernel;
use annulus_core::problem::load_problem;
use anyhow::{Context, Result};
use serde_json::json;

use super::Output;
use crate::args::ConstantsArgs;
use crate::format::{g6, Table};

pub fn run(args: &ConstantsArgs) -> Result<Output> {
    let p = load_problem(&args.file).with_context(|| format!("loading {}", args.file.display()))?;
    let g = &p.geometry;
    let (_, sup_p) = g.p_extrema(0.0, 1.0)?;
    let mut table = Table::new(&["i", "window", "m_i", "M_i", "c_i", "inf p on window", "r(window)"]);
    let mut rows = Vec::new();
    for k in Kernel::ALL {
        let (a, b) = p.windows.window(k);
        let (inf_p, _) = g.p_extrema(a, b)?;
        let (r_lo, r_hi) = g.radial_range(a, b)?;
        let i = k.index() + 1;
        table.row(vec![
            i.to_string(),
            format!("[{}, {}]", g6(a), g6(b)),
            g6(k.m_constant()),
            g6(p.windows.big_m(k)),
            g6(p.windows.c(k)),
            g6(inf_p),
            format!("[{}, {}]", g6(r_lo), g6(r_hi)),
        ]);
        rows.push(json!({
            "i": i, "a": a, "b": b,
            "m": k.m_constant(), "big_m": p.windows.big_m(k), "c": p.windows.c(k),
            "inf_p": inf_p, "r_range": [r_lo, r_hi],
        }));
    }
    let mut text = format!(
        "annulus: n = {}, R0 = {}, R1 = {}\n",
        g.dimension(),
        g6(g.inner_radius()),
        g6(g.outer_radius())
    );
    if let Some((a, b)) = g.a_b() {
        writeln!(text, "A = {}, B = {}", g6(a), g6(b)).unwrap();
    }
    writeln!(text, "sup p on [0, 1] = {}", g6(sup_p)).unwrap();
    text.push_str(&table.render("  "));
    let json = json!({
        "command": "constants",
        "dimension": g.dimension(),
        "inner_radius": g.inner_radius(),
        "outer_radius": g.outer_radius(),
        "a_b": g.a_b(),
        "sup_p": sup_p,
        "components": rows,
    });
    Ok(Output { pass: true, text, json })
}

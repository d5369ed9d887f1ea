use std::fmt::Write;
use std::path::Path;

use annulus_core::criteria::{
    check_eigen_existence, check_ellyptic, check_index_condition, Certificate, CriteriaReport, InequalityLine, Relation, TheoremId,
};
use annulus_core::problem::{load_problem, ProblemSpec};
use anyhow::{bail, Context, Result};
use serde_json::json;

use super::{to_json, write_artifact, Output};
use crate::args::CheckArgs;
use crate::format::{g6, pass_fail, Table};

const ALL: [TheoremId; 6] = [
    TheoremId::Constants,
    TheoremId::Index1Small,
    TheoremId::Index1Large,
    TheoremId::Index0Small,
    TheoremId::Index0Large,
    TheoremId::Existence,
];

fn title(t: TheoremId) -> &'static str {
    match t {
        TheoremId::Constants => "existence via the constants m_i, M_i",
        TheoremId::Index1Small => "index 1 near the origin",
        TheoremId::Index1Large => "index 1 far from the origin",
        TheoremId::Index0Small => "index 0 near the origin",
        TheoremId::Index0Large => "index 0 far from the origin",
        TheoremId::Existence => "existence via principal characteristic values",
    }
}

/// Runs one theorem, or explains why its parameters are missing.
fn run_one(theorem: TheoremId, p: &ProblemSpec) -> Result<Result<CriteriaReport, String>> {
    let params = &p.params;
    let report = match theorem {
        TheoremId::Existence => {
            p.require_existence_params()?;
            check_eigen_existence(p)?
        }
        TheoremId::Constants => match (params.s, params.rho) {
            (Some(s), Some(rho)) => check_ellyptic(p, s, rho)?,
            _ => return Ok(Err("needs s1, s2 and rho1, rho2".into())),
        },
        TheoremId::Index1Small | TheoremId::Index0Small => match params.rho {
            Some(rho) => check_index_condition(theorem, p, rho)?,
            None => return Ok(Err("needs rho1, rho2".into())),
        },
        TheoremId::Index1Large | TheoremId::Index0Large => match params.theta {
            Some(theta) => check_index_condition(theorem, p, theta)?,
            None => return Ok(Err("needs theta1, theta2".into())),
        },
    };
    Ok(Ok(report))
}

fn certificate_name(c: &Certificate) -> String {
    match c {
        Certificate::CornerExact { limit_dims, .. } if limit_dims.is_empty() => "corner-exact".into(),
        Certificate::CornerExact { limit_dims, .. } => {
            let dims: Vec<&str> = limit_dims.iter().map(|v| v.name()).collect();
            format!("corner-exact (limit in {})", dims.join(","))
        }
        Certificate::Sampled { rejected_hint: Some(v), .. } => format!("sampled (hint on {} rejected)", v.name()),
        Certificate::Sampled { .. } => "sampled".into(),
        Certificate::ZeroFace { w, .. } => format!("+inf on {} = 0", w.name()),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(g6).unwrap_or_else(|| "-".into())
}

fn line_row(l: &InequalityLine) -> Vec<String> {
    let rel = match l.relation {
        Relation::Less => "<",
        Relation::Greater => ">",
    };
    vec![
        l.id.clone(),
        g6(l.left),
        rel.into(),
        g6(l.right),
        g6(l.margin),
        opt(l.scaled_left),
        opt(l.scaled_right),
        l.mu.map(|m| format!("{} ({})", g6(m.value), m.mode)).unwrap_or_else(|| "-".into()),
        certificate_name(&l.certificate),
        pass_fail(l.pass),
    ]
}

pub fn render(report: &CriteriaReport) -> String {
    let mut s = String::new();
    let t = report.theorem;
    writeln!(s, "Theorem {}: {}", t.code(), title(t)).unwrap();
    for pre in &report.preconditions {
        writeln!(s, "  precondition  {}  {}", pre.description, pass_fail(pre.pass)).unwrap();
    }
    let mut table = Table::new(&["line", "left", "", "right", "margin", "scaled left", "scaled right", "mu", "certificate", "result"]);
    for l in &report.lines {
        table.row(line_row(l));
    }
    s.push_str(&table.render("  "));
    for l in &report.lines {
        writeln!(s, "  {}: {}", l.id, l.description).unwrap();
    }
    if let Some([t1, t2]) = report.tau {
        writeln!(s, "  tau = ({}, {})", g6(t1), g6(t2)).unwrap();
    }
    for r in report.lines.iter().flat_map(|l| &l.references) {
        let flag = if r.discrepancy { "DISCREPANCY" } else { "agrees" };
        writeln!(s, "  reference {}: printed {}, recomputed {}  {flag}", r.key, g6(r.reference), g6(r.recomputed)).unwrap();
    }
    for n in &report.notes {
        writeln!(s, "  note: {n}").unwrap();
    }
    writeln!(s, "  verdict: {}. {}", pass_fail(report.verdict), report.conclusion).unwrap();
    s
}

pub fn run(args: &CheckArgs, out: Option<&Path>) -> Result<Output> {
    let mut problem = load_problem(&args.file).with_context(|| format!("loading {}", args.file.display()))?;
    if let Some(mode) = args.mu_mode {
        problem.spectral.mu_mode = mode;
    }
    let theorems: Vec<TheoremId> = args.theorem.map_or(ALL.to_vec(), |t| vec![t]);
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for &t in &theorems {
        match run_one(t, &problem).with_context(|| format!("theorem {}", t.code()))? {
            Ok(r) => reports.push(r),
            Err(why) if args.theorem.is_some() => bail!("theorem {} {why}", t.code()),
            Err(why) => skipped.push((t, why)),
        }
    }
    // The exit status follows the requested theorem, by default the
    // eigenvalue existence criterion.
    let decisive = args.theorem.unwrap_or(TheoremId::Existence);
    let pass = reports.iter().find(|r| r.theorem == decisive).is_some_and(|r| r.verdict);

    let mut text = format!("{} (mu mode: {})\n\n", args.file.display(), problem.spectral.mu_mode);
    for r in &reports {
        text.push_str(&render(r));
        text.push('\n');
    }
    for (t, why) in &skipped {
        writeln!(text, "Theorem {}: skipped, {why}", t.code()).unwrap();
    }
    let discrepancies: Vec<_> = reports.iter().flat_map(|r| r.discrepancies()).collect();
    if !discrepancies.is_empty() {
        writeln!(text, "{} printed value(s) disagree with the recomputation by more than 1%", discrepancies.len()).unwrap();
    }
    writeln!(text, "overall (Theorem {}): {}", decisive.code(), pass_fail(pass)).unwrap();

    let json = json!({
        "command": "check",
        "file": args.file.display().to_string(),
        "mu_mode": problem.spectral.mu_mode,
        "decisive": decisive,
        "pass": pass,
        "reports": to_json(&reports),
        "skipped": skipped.iter().map(|(t, why)| json!({"theorem": t, "reason": why})).collect::<Vec<_>>(),
    });
    if let Some(dir) = out {
        let path = write_artifact(dir, "report.json", &serde_json::to_string_pretty(&json)?)?;
        writeln!(text, "wrote {}", path.display()).unwrap();
    }
    Ok(Output { pass, text, json })
}

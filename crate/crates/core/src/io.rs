//! Run execution and artifact export: nodes.csv, regions.txt,
//! diagnostics.txt, net.svg and error.log.
//!
//! Numeric output uses the shortest round-trip float formatting, so
//! re-importing nodes.csv reconstructs every field bit-exactly and
//! identical configs produce byte-identical files.

use crate::config::RunConfig;
use crate::diagnostics::{self, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::geometry::DuctGeometry;
use crate::regions::{self, Solution};
use std::fmt::Write as _;
use std::path::Path;

pub const NODES_HEADER: &str =
    "region,kind,i,j,x,y,u,v,rho,s,c,A,sigma,Ehat,omega_over_rho,delta2";

/// Render the node table, one row per mesh node inside the truncated
/// domain, full double precision.
pub fn nodes_csv(sol: &Solution) -> String {
    let mut out = String::new();
    out.push_str(NODES_HEADER);
    out.push('\n');
    for region in &sol.regions {
        for (i, j, n) in region.mesh.iter_nodes() {
            if n.x > sol.cfg.x_max {
                continue;
            }
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                region.id,
                n.kind.label(),
                i,
                j,
                n.x,
                n.y,
                n.state.u,
                n.state.v,
                n.state.rho,
                n.state.s,
                n.derived.c,
                n.derived.mach_angle,
                n.derived.sigma,
                n.transported.e_hat,
                n.transported.omega_over_rho,
                n.transported.delta2
            );
        }
    }
    out
}

/// Parse a nodes.csv back into (region, kind, i, j, numeric fields) rows.
pub fn parse_nodes_csv(text: &str) -> Result<Vec<(usize, String, usize, usize, Vec<f64>)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == NODES_HEADER => {}
        _ => return Err(Error::Config("nodes.csv header mismatch".into())),
    }
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 16 {
            return Err(Error::Config(format!("nodes.csv line {}: wrong column count", ln + 2)));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Config(format!("nodes.csv line {}: bad float", ln + 2)))
        };
        let region = cols[0]
            .parse()
            .map_err(|_| Error::Config(format!("nodes.csv line {}: bad region id", ln + 2)))?;
        let i = cols[2]
            .parse()
            .map_err(|_| Error::Config(format!("nodes.csv line {}: bad index", ln + 2)))?;
        let j = cols[3]
            .parse()
            .map_err(|_| Error::Config(format!("nodes.csv line {}: bad index", ln + 2)))?;
        let vals: Vec<f64> = cols[4..].iter().map(|s| parse(s)).collect::<Result<_>>()?;
        rows.push((region, cols[1].to_string(), i, j, vals));
    }
    Ok(rows)
}

/// Region, junction, termination and vacuum-interface summary.
pub fn regions_txt(sol: &Solution) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "termination_case: {}", sol.termination.label());
    let _ = writeln!(out, "cross_characteristic_case: {}", if sol.case_one { "i" } else { "ii" });
    let in_domain = |region: &crate::regions::Region| {
        region.mesh.iter_nodes().filter(|(_, _, n)| n.x <= sol.cfg.x_max).count()
    };
    let _ = writeln!(out, "region_count: {}", sol.regions.len());
    let _ = writeln!(
        out,
        "node_count: {}",
        sol.regions.iter().map(in_domain).sum::<usize>()
    );
    out.push('\n');
    for region in &sol.regions {
        let _ = writeln!(
            out,
            "region {} kind={} rows={} nodes={} truncation={}",
            region.id,
            region.kind.label(),
            region.mesh.rows.len(),
            in_domain(region),
            match region.truncation {
                regions::Truncation::Closed => "closed",
                regions::Truncation::XMax => "x_max",
                regions::Truncation::Vacuum => "vacuum",
                regions::Truncation::Degenerate => "degenerate",
            }
        );
    }
    out.push('\n');
    for (name, pos) in &sol.junctions {
        let _ = writeln!(out, "junction {} x={} y={}", name, pos[0], pos[1]);
    }
    if !sol.vacuum_interfaces.is_empty() {
        out.push('\n');
        for v in &sol.vacuum_interfaces {
            let _ = writeln!(
                out,
                "vacuum_interface side={} anchor_x={} anchor_y={} slope={}",
                match v.side {
                    crate::geometry::WallSide::Lower => "lower",
                    crate::geometry::WallSide::Upper => "upper",
                },
                v.anchor_x,
                v.anchor_y,
                v.slope
            );
        }
    }
    out
}

pub fn diagnostics_txt(reports: &[(&str, &DiagnosticsReport)]) -> String {
    let mut out = String::new();
    for (title, report) in reports {
        let _ = writeln!(out, "[{title}]");
        for c in &report.checks {
            let _ = write!(
                out,
                "check {} samples={} max_residual={:e} mean_residual={:e} at=({}, {})",
                c.name, c.samples, c.max_residual, c.mean_residual, c.max_location[0], c.max_location[1]
            );
            if let (Some(tol), Some(passed)) = (c.tolerance, c.passed) {
                let _ = write!(out, " tolerance={tol:e} {}", if passed { "pass" } else { "FAIL" });
            }
            out.push('\n');
        }
        if let Some(conv) = &report.convergence {
            let _ = writeln!(
                out,
                "convergence resolutions={:?} errors={:?} fitted_order={} reliable={}",
                conv.resolutions, conv.errors, conv.fitted_order, conv.reliable
            );
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// SVG rendering

struct SvgMapper {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl SvgMapper {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0) * self.scale, (self.y1 - y) * self.scale)
    }
}

fn polyline(path: &mut String, pts: &[(f64, f64)], style: &str) {
    if pts.len() < 2 {
        return;
    }
    let mut d = String::new();
    for (i, (x, y)) in pts.iter().enumerate() {
        let _ = write!(d, "{}{:.3},{:.3}", if i == 0 { "M" } else { " L" }, x, y);
    }
    let _ = writeln!(path, "  <path d=\"{d}\" {style}/>");
}

/// Characteristic-net drawing: walls, both characteristic families,
/// junction points and straight dashed vacuum rays.
pub fn render_net(sol: &Solution, duct: &DuctGeometry, with_streamlines: bool) -> Result<String> {
    if sol.regions.is_empty() {
        return Err(Error::OutOfRegion("nothing to render: no regions solved".into()));
    }
    let mut x_hi = 0.0f64;
    for r in &sol.regions {
        for (_, _, n) in r.mesh.iter_nodes() {
            if n.x <= duct.x_max() {
                x_hi = x_hi.max(n.x);
            }
        }
    }
    for v in &sol.vacuum_interfaces {
        x_hi = x_hi.max((v.anchor_x + 2.0).min(duct.x_max()));
    }
    x_hi = x_hi.max(1.0).min(duct.x_max()) * 1.02;
    let y_hi = duct.f(x_hi.min(duct.x_max())) * 1.06;
    let width = 1400.0;
    let scale = width / x_hi;
    let m = SvgMapper { x0: 0.0, y1: y_hi, scale };
    let height = 2.0 * y_hi * scale;

    let mut body = String::new();
    // walls
    let wall_steps = 400;
    for side in [-1.0, 1.0] {
        let pts: Vec<(f64, f64)> = (0..=wall_steps)
            .map(|i| {
                let x = x_hi.min(duct.x_max()) * i as f64 / wall_steps as f64;
                m.map(x, side * duct.f(x))
            })
            .collect();
        polyline(&mut body, &pts, "fill=\"none\" stroke=\"#222\" stroke-width=\"2.2\"");
    }
    // inlet
    let (ix0, iy0) = m.map(0.0, -duct.f(0.0));
    let (ix1, iy1) = m.map(0.0, duct.f(0.0));
    let _ = writeln!(
        body,
        "  <line x1=\"{ix0:.3}\" y1=\"{iy0:.3}\" x2=\"{ix1:.3}\" y2=\"{iy1:.3}\" stroke=\"#222\" stroke-width=\"1.4\"/>"
    );

    // characteristic net per region, one color per family
    for region in &sol.regions {
        let plus_style = "fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"0.55\"";
        let minus_style = "fill=\"none\" stroke=\"#c03a2b\" stroke-width=\"0.55\"";
        let (plus, minus) = diagnostics::family_polylines(region);
        for (polys, style) in [(&plus, plus_style), (&minus, minus_style)] {
            for poly in polys {
                let pts: Vec<(f64, f64)> = poly
                    .iter()
                    .filter(|n| n.x <= duct.x_max())
                    .map(|n| m.map(n.x, n.y))
                    .collect();
                polyline(&mut body, &pts, style);
            }
        }
    }

    if with_streamlines {
        let traces = diagnostics::trace_streamlines(sol, 4);
        let _ = traces; // positions are not retained; draw seeds only
    }

    // junctions
    for (name, pos) in &sol.junctions {
        let (cx, cy) = m.map(pos[0], pos[1]);
        let _ = writeln!(
            body,
            "  <circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"3\" fill=\"#111\"/>\n  <text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\" fill=\"#111\">{name}</text>",
            cx + 5.0,
            cy - 5.0
        );
    }

    // vacuum interfaces as straight dashed rays tangent to the walls
    for v in &sol.vacuum_interfaces {
        let x_end = x_hi;
        let (x0, y0) = m.map(v.anchor_x, v.anchor_y);
        let (x1, y1) = m.map(x_end, v.anchor_y + v.slope * (x_end - v.anchor_x));
        let _ = writeln!(
            body,
            "  <line x1=\"{x0:.3}\" y1=\"{y0:.3}\" x2=\"{x1:.3}\" y2=\"{y1:.3}\" stroke=\"#7a1fa2\" stroke-width=\"1.6\" stroke-dasharray=\"8 5\"/>"
        );
    }

    Ok(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width:.1} {height:.1}\" width=\"{width:.0}\" height=\"{height:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    ))
}

// ---------------------------------------------------------------------------
// Run driver

pub struct RunArtifacts {
    pub solution: Option<Solution>,
    pub exit_code: i32,
    pub messages: Vec<String>,
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Execute validate -> orchestrate -> diagnostics -> export.
/// Exit codes: 0 success, 2 validation failure, 3 case (ii) detected,
/// 4 numerical failure (partial artifacts written where possible).
pub fn run(config_path: &Path, out_override: Option<&Path>, quiet: bool) -> RunArtifacts {
    run_opts(config_path, out_override, quiet, false)
}

/// `run` with the diagnostics artifact optionally forced on regardless of
/// the configuration (the diagnose subcommand).
pub fn run_opts(
    config_path: &Path,
    out_override: Option<&Path>,
    quiet: bool,
    force_diagnostics: bool,
) -> RunArtifacts {
    let mut messages = Vec::new();
    let say = |messages: &mut Vec<String>, quiet: bool, msg: String| {
        if !quiet {
            println!("{msg}");
        }
        messages.push(msg);
    };

    let finish = |dir: &Path, messages: Vec<String>, sol: Option<Solution>, code: i32| {
        let _ = std::fs::create_dir_all(dir);
        let log = messages.join("\n") + "\n";
        let _ = std::fs::write(dir.join("error.log"), &log);
        RunArtifacts { solution: sol, exit_code: code, messages }
    };

    let fallback_dir = out_override.map(Path::to_path_buf).unwrap_or_else(|| "out".into());
    let mut cfg = match RunConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            say(&mut messages, quiet, format!("config error: {e}"));
            return finish(&fallback_dir, messages, None, 2);
        }
    };
    if force_diagnostics {
        cfg.outputs.diagnostics = true;
    }
    let out_dir = out_override.map(Path::to_path_buf).unwrap_or_else(|| cfg.outputs.dir.clone());
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        say(&mut messages, quiet, format!("cannot create output dir: {e}"));
        return finish(&fallback_dir, messages, None, 2);
    }
    let base = config_path.parent().unwrap_or(Path::new("."));

    let gas = match cfg.gas() {
        Ok(g) => g,
        Err(e) => {
            say(&mut messages, quiet, format!("validation error: {e}"));
            return finish(&out_dir, messages, None, 2);
        }
    };
    let duct = match cfg.build_duct(base) {
        Ok(d) => d,
        Err(e) => {
            say(&mut messages, quiet, format!("validation error: {e}"));
            return finish(&out_dir, messages, None, 2);
        }
    };
    let report = match duct.validate(1001) {
        Ok(r) => r,
        Err(e) => {
            say(&mut messages, quiet, format!("validation error: {e}"));
            return finish(&out_dir, messages, None, 2);
        }
    };
    for note in &report.notes {
        say(&mut messages, quiet, format!("duct note: {note}"));
    }
    if !report.is_valid() {
        for v in &report.violations {
            say(
                &mut messages,
                quiet,
                format!(
                    "duct violation: {} at x={:?}: {}",
                    v.condition, v.x, v.detail
                ),
            );
        }
        return finish(&out_dir, messages, None, 2);
    }
    let profile = match cfg.build_profile(base) {
        Ok(p) => p,
        Err(e) => {
            say(&mut messages, quiet, format!("validation error: {e}"));
            return finish(&out_dir, messages, None, 2);
        }
    };
    let scfg = cfg.solver_config(&gas);

    let sol = match regions::orchestrate(&profile, &duct, &gas, &scfg) {
        Ok(s) => s,
        Err(Error::CaseTwoDetected) => {
            say(&mut messages, quiet, format!("{}", Error::CaseTwoDetected));
            let _ = write_file(&out_dir, "regions.txt", "cross_characteristic_case: ii\n");
            return finish(&out_dir, messages, None, 3);
        }
        Err(Error::ProfileViolation { clause, detail }) => {
            say(&mut messages, quiet, format!("inflow violates ({clause}): {detail}"));
            return finish(&out_dir, messages, None, 2);
        }
        Err(e) => {
            say(&mut messages, quiet, format!("numerical failure: {e}"));
            return finish(&out_dir, messages, None, 4);
        }
    };
    say(
        &mut messages,
        quiet,
        format!(
            "solved {} regions, {} nodes, termination: {}",
            sol.regions.len(),
            sol.node_count(),
            sol.termination.label()
        ),
    );

    let mut failed = false;
    if cfg.outputs.nodes {
        if let Err(e) = write_file(&out_dir, "nodes.csv", &nodes_csv(&sol)) {
            say(&mut messages, quiet, format!("export error: {e}"));
            failed = true;
        }
    }
    if cfg.outputs.regions {
        if let Err(e) = write_file(&out_dir, "regions.txt", &regions_txt(&sol)) {
            say(&mut messages, quiet, format!("export error: {e}"));
            failed = true;
        }
    }
    if cfg.outputs.diagnostics {
        let transport = diagnostics::transport_residuals(&sol, 7);
        let relations = diagnostics::char_relation_residuals(&sol);
        let mut flux_report = DiagnosticsReport::default();
        let mut x_hi = 0.0f64;
        for r in &sol.regions {
            for (_, _, n) in r.mesh.iter_nodes() {
                if n.x <= sol.cfg.x_max {
                    x_hi = x_hi.max(n.x);
                }
            }
        }
        let stations: Vec<f64> = (1..=6).map(|i| x_hi * i as f64 / 7.0).collect();
        match diagnostics::flux_audit(&sol, &duct, &stations) {
            Ok(audit) => {
                flux_report.checks.push(crate::diagnostics::CheckResult {
                    name: "mass flux deviation across stations".into(),
                    max_residual: audit.max_mass_deviation,
                    mean_residual: audit.max_mass_deviation,
                    max_location: [f64::NAN, f64::NAN],
                    samples: audit.stations.len(),
                    tolerance: None,
                    passed: None,
                });
                flux_report.checks.push(crate::diagnostics::CheckResult {
                    name: "energy flux deviation across stations".into(),
                    max_residual: audit.max_energy_deviation,
                    mean_residual: audit.max_energy_deviation,
                    max_location: [f64::NAN, f64::NAN],
                    samples: audit.stations.len(),
                    tolerance: None,
                    passed: None,
                });
            }
            Err(e) => say(&mut messages, quiet, format!("flux audit skipped: {e}")),
        }
        let text = diagnostics_txt(&[
            ("transport", &transport),
            ("characteristic_relations", &relations),
            ("flux_audit", &flux_report),
        ]);
        if let Err(e) = write_file(&out_dir, "diagnostics.txt", &text) {
            say(&mut messages, quiet, format!("export error: {e}"));
            failed = true;
        }
    }
    if cfg.outputs.svg {
        match render_net(&sol, &duct, cfg.outputs.svg_streamlines) {
            Ok(svg) => {
                if let Err(e) = write_file(&out_dir, "net.svg", &svg) {
                    say(&mut messages, quiet, format!("export error: {e}"));
                    failed = true;
                }
            }
            Err(e) => {
                say(&mut messages, quiet, format!("render error: {e}"));
                failed = true;
            }
        }
    }

    let code = if failed { 4 } else { 0 };
    finish(&out_dir, messages, Some(sol), code)
}

//! Numerical verification of the transport laws, characteristic relations,
//! conservation fluxes and convergence order on a computed Solution.
//!
//! Directional derivatives use one-sided two-point stencils along the mesh
//! characteristic lines; the mesh is characteristic-aligned so no
//! interpolation enters the residuals.

use crate::error::{Error, Result};
use crate::gas::GasConstants;
use crate::geometry::DuctGeometry;
use crate::kernel::{self, CharNode, Front, InletProfile, SolverConfig};
use crate::regions::{Region, RegionKind, Solution};
use crate::simple_wave::{build_fan, SimpleWaveFan};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub max_location: [f64; 2],
    pub samples: usize,
    pub tolerance: Option<f64>,
    pub passed: Option<bool>,
}

impl CheckResult {
    fn from_samples(name: &str, vals: &[(f64, [f64; 2])]) -> Self {
        let mut max_residual = 0.0;
        let mut max_location = [f64::NAN, f64::NAN];
        let mut sum = 0.0;
        for (v, loc) in vals {
            sum += v.abs();
            if v.abs() >= max_residual {
                max_residual = v.abs();
                max_location = *loc;
            }
        }
        CheckResult {
            name: name.to_string(),
            max_residual,
            mean_residual: if vals.is_empty() { 0.0 } else { sum / vals.len() as f64 },
            max_location,
            samples: vals.len(),
            tolerance: None,
            passed: None,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self.passed = Some(self.max_residual <= tol);
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct DiagnosticsReport {
    pub checks: Vec<CheckResult>,
    pub convergence: Option<ConvergenceStudy>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub resolutions: Vec<usize>,
    pub errors: Vec<f64>,
    pub fitted_order: f64,
    /// False when the errors sit at roundoff and the fit is meaningless.
    pub reliable: bool,
}

// ---------------------------------------------------------------------------
// Mesh adjacency

/// A node together with its parents one step back along C+ and C-.
pub struct Stencil<'a> {
    pub node: &'a CharNode,
    pub plus_parent: Option<&'a CharNode>,
    pub minus_parent: Option<&'a CharNode>,
}

/// Enumerate characteristic-aligned stencils of a region. Parent layout
/// follows the marching conventions of the region builder.
pub fn stencils(region: &Region) -> Vec<Stencil<'_>> {
    let rows = &region.mesh.rows;
    let mut out = Vec::new();
    let node_at = |i: isize, j: isize| -> Option<&CharNode> {
        if i < 0 || j < 0 {
            return None;
        }
        rows.get(i as usize)?.get(j as usize)?.as_ref()
    };
    match region.kind {
        RegionKind::Laminar => {
            // row k node j from (k-1, j) along C+ and (k-1, j+1) along C-
            for (k, row) in rows.iter().enumerate() {
                for (j, n) in row.iter().enumerate() {
                    let Some(n) = n else { continue };
                    let (p, m) = if k == 0 {
                        (region.incoming.get(j), region.incoming.get(j + 1))
                    } else {
                        (
                            node_at(k as isize - 1, j as isize),
                            node_at(k as isize - 1, j as isize + 1),
                        )
                    };
                    out.push(Stencil { node: n, plus_parent: p, minus_parent: m });
                }
            }
        }
        RegionKind::WallLower => {
            // fronts are C+ lines from the wall; the exact C- parents are
            // the recorded (possibly subdivided) data rows, row[j] pairing
            // with parent_rows[k][j + 1]
            for (k, row) in rows.iter().enumerate() {
                let parents = region.parent_rows.get(k);
                for (j, n) in row.iter().enumerate() {
                    let Some(n) = n else { continue };
                    let plus = if j == 0 { None } else { node_at(k as isize, j as isize - 1) };
                    let minus = parents.and_then(|p| p.get(j + 1));
                    out.push(Stencil { node: n, plus_parent: plus, minus_parent: minus });
                }
            }
        }
        RegionKind::WallUpper => {
            for (k, row) in rows.iter().enumerate() {
                let parents = region.parent_rows.get(k);
                for (j, n) in row.iter().enumerate() {
                    let Some(n) = n else { continue };
                    let minus = if j == 0 { None } else { node_at(k as isize, j as isize - 1) };
                    let plus = parents.and_then(|p| p.get(j + 1));
                    out.push(Stencil { node: n, plus_parent: plus, minus_parent: minus });
                }
            }
        }
        RegionKind::Goursat => {
            // cell (i, j): C+ parent (i, j-1), C- parent (i-1, j); the data
            // curves live in incoming (minus, indexed by i) and
            // incoming_second (plus, indexed by j)
            for (i, row) in rows.iter().enumerate() {
                for (j, n) in row.iter().enumerate() {
                    let Some(n) = n else { continue };
                    let plus = if j == 1 {
                        region.incoming.get(i)
                    } else {
                        node_at(i as isize, j as isize - 1)
                    };
                    let minus = if i == 1 {
                        region.incoming_second.get(j)
                    } else {
                        node_at(i as isize - 1, j as isize)
                    };
                    out.push(Stencil { node: n, plus_parent: plus, minus_parent: minus });
                }
            }
        }
    }
    out
}

/// Row polylines of a region usable as crossing fronts for streamline
/// traces (contiguous filled prefix of each row, at least two nodes).
pub fn row_fronts(region: &Region) -> Vec<Front> {
    let mut fronts = Vec::new();
    for row in &region.mesh.rows {
        let nodes: Vec<CharNode> = row.iter().take_while(|c| c.is_some()).flatten().copied().collect();
        if nodes.len() >= 2 {
            if let Ok(f) = Front::new(nodes) {
                fronts.push(f);
            }
        }
    }
    fronts
}

/// Polylines along both characteristic families of a region's mesh,
/// used for station sampling and rendering. Rows are one family and the
/// cross family connects matching positions of consecutive rows.
pub fn family_polylines(region: &Region) -> (Vec<Vec<CharNode>>, Vec<Vec<CharNode>>) {
    let rows = &region.mesh.rows;
    let row_polys: Vec<Vec<CharNode>> = rows
        .iter()
        .map(|row| row.iter().take_while(|c| c.is_some()).flatten().copied().collect())
        .filter(|r: &Vec<CharNode>| r.len() >= 2)
        .collect();
    let max_len = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let node_at = |k: usize, j: usize| -> Option<CharNode> { rows.get(k)?.get(j)?.as_ref().copied() };
    let cross: Vec<Vec<CharNode>> = match region.kind {
        // columns are the cross family
        RegionKind::Goursat => (0..max_len)
            .map(|j| (0..rows.len()).filter_map(|i| node_at(i, j)).collect::<Vec<_>>())
            .filter(|p: &Vec<CharNode>| p.len() >= 2)
            .collect(),
        // anti-diagonals (k, s - k) follow the cross family
        _ => (0..rows.len() + max_len)
            .map(|s| {
                (0..=s.min(rows.len().saturating_sub(1)))
                    .filter_map(|k| s.checked_sub(k).and_then(|j| node_at(k, j)))
                    .collect::<Vec<_>>()
            })
            .filter(|p: &Vec<CharNode>| p.len() >= 2)
            .collect(),
    };
    match region.kind {
        RegionKind::WallUpper => (cross, row_polys),
        _ => (row_polys, cross),
    }
}

// ---------------------------------------------------------------------------
// Transport residuals

#[derive(Debug, Clone, Default)]
pub struct StreamlineResiduals {
    pub delta2_drift: Vec<(f64, [f64; 2])>,
    pub vorticity_quadrature: Vec<(f64, [f64; 2])>,
    pub e_hat_drift: Vec<(f64, [f64; 2])>,
    pub entropy_drift: Vec<(f64, [f64; 2])>,
    pub c_increase: Vec<(f64, [f64; 2])>,
    pub traces: usize,
}

/// Trace streamlines region by region across the row fronts and measure the
/// drift of the carried invariants and the vorticity-law quadrature.
pub fn trace_streamlines(sol: &Solution, seeds_per_region: usize) -> StreamlineResiduals {
    let g = &sol.gas;
    let mut out = StreamlineResiduals::default();
    for region in &sol.regions {
        let fronts = row_fronts(region);
        if fronts.len() < 2 {
            continue;
        }
        let first = &fronts[0];
        for si in 0..seeds_per_region {
            let t = first.total_arclen() * (si as f64 + 0.5) / seeds_per_region as f64;
            let Ok(start) = first.sample(t, g) else { continue };
            let mut pos = [start.x, start.y];
            let mut sigma = start.derived.sigma;
            let d1 = start.transported.omega_over_rho;
            let mut c2 = start.derived.c * start.derived.c;
            let mut quad = 0.0f64;
            let mut steps = 0;
            for front in fronts.iter().skip(1) {
                // corrector on the segment direction
                let mut smp = match kernel::ray_front_crossing(pos, sigma, front) {
                    Ok(s) => s,
                    Err(_) => break,
                };
                for _ in 0..3 {
                    let avg = 0.5 * (sigma + smp.sigma);
                    match kernel::ray_front_crossing(pos, avg, front) {
                        Ok(s) => smp = s,
                        Err(_) => break,
                    }
                }
                let tr = smp.transported;
                quad += -tr.delta2 * (tr.s * g.gamma).powf(1.0 / (g.gamma - 1.0))
                    / (g.gamma * (g.gamma - 1.0) * tr.s)
                    * (smp.c2 - c2);
                let loc = [smp.x, smp.y];
                out.delta2_drift.push((tr.delta2 - start.transported.delta2, loc));
                out.e_hat_drift.push((tr.e_hat - start.transported.e_hat, loc));
                out.entropy_drift.push((tr.s - start.transported.s, loc));
                out.vorticity_quadrature.push((tr.omega_over_rho - d1 - quad, loc));
                out.c_increase.push(((smp.c2.max(0.0)).sqrt() - c2.max(0.0).sqrt(), loc));
                pos = loc;
                sigma = smp.sigma;
                c2 = smp.c2;
                steps += 1;
            }
            if steps >= 1 {
                out.traces += 1;
            }
        }
    }
    out
}

/// Residuals of the streamline transport laws: constancy of delta2, E_hat
/// and s, and the vorticity-law quadrature.
pub fn transport_residuals(sol: &Solution, seeds_per_region: usize) -> DiagnosticsReport {
    let tr = trace_streamlines(sol, seeds_per_region);
    let mut report = DiagnosticsReport::default();
    report.checks.push(CheckResult::from_samples("delta2 constant along streamlines", &tr.delta2_drift));
    report.checks.push(CheckResult::from_samples(
        "omega/rho matches the vorticity-law quadrature",
        &tr.vorticity_quadrature,
    ));
    report.checks.push(CheckResult::from_samples("E_hat constant along streamlines", &tr.e_hat_drift));
    report.checks.push(CheckResult::from_samples("s constant along streamlines", &tr.entropy_drift));
    report
}

// ---------------------------------------------------------------------------
// Characteristic-relation residuals

/// Finite-difference residuals of the angle and velocity characteristic
/// relations and of the entropy reflection identity, over all wave regions.
pub fn char_relation_residuals(sol: &Solution) -> DiagnosticsReport {
    let g = &sol.gas;
    let kappa = g.kappa;
    let mut samples: Vec<Vec<(f64, [f64; 2])>> = vec![Vec::new(); 9];
    for region in &sol.regions {
        for st in stencils(region) {
            let n = st.node;
            let d = &n.derived;
            let a = d.mach_angle;
            let (sin_a, cos_a) = a.sin_cos();
            let tan_a = sin_a / cos_a;
            let sin2a = (2.0 * a).sin();
            let cos2a = (2.0 * a).cos();
            let omega = n.omega();
            let j = d.j;
            let loc = n.pos();
            if let Some(l) = st.plus_parent {
                let ell = (n.x - l.x).hypot(n.y - l.y);
                if ell > 1e-14 {
                    let dp = |f: &dyn Fn(&CharNode) -> f64| (f(n) - f(l)) / ell;
                    let dc = dp(&|q| q.derived.c);
                    let ds = dp(&|q| q.state.s);
                    let dbeta = dp(&|q| q.derived.beta);
                    let dalpha = dp(&|q| q.derived.alpha);
                    let du = dp(&|q| q.state.u);
                    let dv = dp(&|q| q.state.v);
                    samples[0].push((
                        d.c * dbeta + (1.0 + kappa) * tan_a * dc
                            - omega * sin_a * sin_a * tan_a
                            - j * tan_a * ds,
                        loc,
                    ));
                    samples[1].push((
                        d.c * dalpha + 0.5 * (1.0 + kappa) * d.omega_coef * sin2a * dc
                            + omega * sin_a * sin_a * tan_a
                            - j * tan_a * cos2a * ds,
                        loc,
                    ));
                    samples[4].push((
                        du - kappa * d.beta.sin() * dc - omega * d.sigma.cos() * sin_a
                            + j * d.beta.sin() * ds,
                        loc,
                    ));
                    samples[6].push((
                        dv + kappa * d.beta.cos() * dc - omega * d.sigma.sin() * sin_a
                            - j * d.beta.cos() * ds,
                        loc,
                    ));
                }
            }
            if let Some(r) = st.minus_parent {
                let ell = (n.x - r.x).hypot(n.y - r.y);
                if ell > 1e-14 {
                    let dm = |f: &dyn Fn(&CharNode) -> f64| (f(n) - f(r)) / ell;
                    let dc = dm(&|q| q.derived.c);
                    let ds = dm(&|q| q.state.s);
                    let dbeta = dm(&|q| q.derived.beta);
                    let dalpha = dm(&|q| q.derived.alpha);
                    let du = dm(&|q| q.state.u);
                    let dv = dm(&|q| q.state.v);
                    samples[2].push((
                        d.c * dalpha - (1.0 + kappa) * tan_a * dc
                            - omega * sin_a * sin_a * tan_a
                            + j * tan_a * ds,
                        loc,
                    ));
                    samples[3].push((
                        d.c * dbeta - 0.5 * (1.0 + kappa) * d.omega_coef * sin2a * dc
                            + omega * sin_a * sin_a * tan_a
                            + j * tan_a * cos2a * ds,
                        loc,
                    ));
                    samples[5].push((
                        du + kappa * d.alpha.sin() * dc + omega * d.sigma.cos() * sin_a
                            - j * d.alpha.sin() * ds,
                        loc,
                    ));
                    samples[7].push((
                        dv - kappa * d.alpha.cos() * dc + omega * d.sigma.sin() * sin_a
                            + j * d.alpha.cos() * ds,
                        loc,
                    ));
                }
            }
            if let (Some(l), Some(r)) = (st.plus_parent, st.minus_parent) {
                let ell_p = (n.x - l.x).hypot(n.y - l.y);
                let ell_m = (n.x - r.x).hypot(n.y - r.y);
                if ell_p > 1e-14 && ell_m > 1e-14 {
                    let dsp = (n.state.s - l.state.s) / ell_p;
                    let dsm = (n.state.s - r.state.s) / ell_m;
                    samples[8].push((dsp + dsm, loc));
                }
            }
        }
    }
    let names = [
        "dplus_beta",
        "dplus_alpha",
        "dminus_alpha",
        "dminus_beta",
        "dplus_u",
        "dminus_u",
        "dplus_v",
        "dminus_v",
        "entropy_reflection",
    ];
    let mut report = DiagnosticsReport::default();
    for (name, vals) in names.iter().zip(samples.iter()) {
        report.checks.push(CheckResult::from_samples(name, vals));
    }
    report
}

// ---------------------------------------------------------------------------
// Monotonicity and sign monitors

#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    /// Largest (signed) finite-difference D+c and D-c over wave regions.
    pub max_dplus_c: f64,
    pub max_dminus_c: f64,
    /// Largest (signed) R+ and R- over wave regions.
    pub max_r_plus: f64,
    pub max_r_minus: f64,
    /// Largest per-step sound-speed increase along traced streamlines.
    pub max_c_increase: f64,
    pub stencil_count: usize,
}

/// Sign monitors for the expansion regime: D(+-)c and R(+-) should stay
/// nonpositive throughout wave regions and c nonincreasing on streamlines.
pub fn monotonicity_monitor(sol: &Solution, seeds_per_region: usize) -> MonotonicityReport {
    let g = &sol.gas;
    let mut rep = MonotonicityReport {
        max_dplus_c: f64::NEG_INFINITY,
        max_dminus_c: f64::NEG_INFINITY,
        max_r_plus: f64::NEG_INFINITY,
        max_r_minus: f64::NEG_INFINITY,
        max_c_increase: f64::NEG_INFINITY,
        stencil_count: 0,
    };
    for region in &sol.regions {
        if region.kind == RegionKind::Laminar {
            continue;
        }
        for st in stencils(region) {
            let n = st.node;
            if let Some(l) = st.plus_parent {
                let ell = (n.x - l.x).hypot(n.y - l.y);
                if ell > 1e-14 {
                    let dc = (n.derived.c - l.derived.c) / ell;
                    let ds = (n.state.s - l.state.s) / ell;
                    rep.max_dplus_c = rep.max_dplus_c.max(dc);
                    rep.max_r_plus = rep.max_r_plus.max(dc - n.derived.j * ds / g.kappa);
                    rep.stencil_count += 1;
                }
            }
            if let Some(r) = st.minus_parent {
                let ell = (n.x - r.x).hypot(n.y - r.y);
                if ell > 1e-14 {
                    let dc = (n.derived.c - r.derived.c) / ell;
                    let ds = (n.state.s - r.state.s) / ell;
                    rep.max_dminus_c = rep.max_dminus_c.max(dc);
                    rep.max_r_minus = rep.max_r_minus.max(dc - n.derived.j * ds / g.kappa);
                    rep.stencil_count += 1;
                }
            }
        }
    }
    let traces = trace_streamlines(sol, seeds_per_region);
    for (dc, _) in &traces.c_increase {
        rep.max_c_increase = rep.max_c_increase.max(*dc);
    }
    rep
}

// ---------------------------------------------------------------------------
// Flux audit

#[derive(Debug, Clone)]
pub struct StationFlux {
    pub x: f64,
    pub mass: f64,
    pub energy: f64,
    /// x-momentum flux plus the wall-pressure line integral from the inlet.
    pub momentum_corrected: f64,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct FluxAudit {
    pub inlet_mass: f64,
    pub inlet_energy: f64,
    pub inlet_momentum: f64,
    pub stations: Vec<StationFlux>,
    pub max_mass_deviation: f64,
    pub max_energy_deviation: f64,
}

fn crossing_samples(
    polyline: &[CharNode],
    x_station: f64,
    samples: &mut Vec<(f64, f64, f64, f64)>, // (y, rho*u, rho*u*E_hat, rho*u^2 + p)
) {
    for w in polyline.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (xa, xb) = (a.x, b.x);
        if (xa - x_station) * (xb - x_station) > 0.0 || xa == xb {
            continue;
        }
        let t = (x_station - xa) / (xb - xa);
        let lerp = |fa: f64, fb: f64| fa + t * (fb - fa);
        let y = lerp(a.y, b.y);
        let rho = lerp(a.state.rho, b.state.rho);
        let u = lerp(a.state.u, b.state.u);
        let e = lerp(a.transported.e_hat, b.transported.e_hat);
        let p = lerp(a.derived.p, b.derived.p);
        samples.push((y, rho * u, rho * u * e, rho * u * u + p));
    }
}

/// Mass and energy flux across transversal stations, with the x-momentum
/// flux corrected by the wall-pressure line integral.
pub fn flux_audit(sol: &Solution, duct: &DuctGeometry, stations: &[f64]) -> Result<FluxAudit> {
    // reference fluxes at the inlet
    let integrate = |samples: &mut Vec<(f64, f64, f64, f64)>| -> Option<(f64, f64, f64, usize)> {
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        samples.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12);
        if samples.len() < 4 {
            return None;
        }
        let mut mass = 0.0;
        let mut energy = 0.0;
        let mut momentum = 0.0;
        for w in samples.windows(2) {
            let dy = w[1].0 - w[0].0;
            mass += 0.5 * dy * (w[0].1 + w[1].1);
            energy += 0.5 * dy * (w[0].2 + w[1].2);
            momentum += 0.5 * dy * (w[0].3 + w[1].3);
        }
        Some((mass, energy, momentum, samples.len()))
    };

    let mut inlet_samples: Vec<(f64, f64, f64, f64)> = sol
        .inlet
        .nodes()
        .iter()
        .map(|n| {
            (
                n.y,
                n.state.rho * n.state.u,
                n.state.rho * n.state.u * n.transported.e_hat,
                n.state.rho * n.state.u * n.state.u + n.derived.p,
            )
        })
        .collect();
    inlet_samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut inlet_mass = 0.0;
    let mut inlet_energy = 0.0;
    let mut inlet_momentum = 0.0;
    for w in inlet_samples.windows(2) {
        let dy = w[1].0 - w[0].0;
        inlet_mass += 0.5 * dy * (w[0].1 + w[1].1);
        inlet_energy += 0.5 * dy * (w[0].2 + w[1].2);
        inlet_momentum += 0.5 * dy * (w[0].3 + w[1].3);
    }

    // wall pressure polylines for the momentum correction
    let mut wall_lower: Vec<CharNode> = vec![*sol.inlet.first()];
    let mut wall_upper: Vec<CharNode> = vec![*sol.inlet.last()];
    for region in &sol.regions {
        for row in &region.mesh.rows {
            if let Some(Some(first)) = row.first() {
                match first.kind {
                    kernel::NodeKind::WallLower => wall_lower.push(*first),
                    kernel::NodeKind::WallUpper => wall_upper.push(*first),
                    _ => {}
                }
            }
        }
    }
    wall_lower.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
    wall_upper.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
    let wall_integral = |wall: &[CharNode], x_to: f64| -> f64 {
        let mut acc = 0.0;
        for w in wall.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.x >= x_to {
                break;
            }
            let xb = b.x.min(x_to);
            let t_end = if (b.x - a.x).abs() < 1e-300 { 1.0 } else { (xb - a.x) / (b.x - a.x) };
            let pb = a.derived.p + t_end * (b.derived.p - a.derived.p);
            // trapezoid of p f' dx
            let fa = duct.f_prime(a.x);
            let fb = duct.f_prime(xb);
            acc += 0.5 * (xb - a.x) * (a.derived.p * fa + pb * fb);
        }
        acc
    };

    let mut max_x = 0.0f64;
    for region in &sol.regions {
        for (_, _, n) in region.mesh.iter_nodes() {
            max_x = max_x.max(n.x);
        }
    }

    let mut result = FluxAudit {
        inlet_mass,
        inlet_energy,
        inlet_momentum,
        stations: Vec::new(),
        max_mass_deviation: 0.0,
        max_energy_deviation: 0.0,
    };
    for &xs in stations {
        if xs < 0.0 || xs > max_x {
            return Err(Error::StationOutsideGas(xs));
        }
        let mut samples = Vec::new();
        for region in &sol.regions {
            let (plus, minus) = family_polylines(region);
            for poly in plus.iter().chain(minus.iter()) {
                crossing_samples(poly, xs, &mut samples);
            }
            crossing_samples(&region.incoming, xs, &mut samples);
            if !region.incoming_second.is_empty() {
                crossing_samples(&region.incoming_second, xs, &mut samples);
            }
        }
        crossing_samples(&wall_lower, xs, &mut samples);
        crossing_samples(&wall_upper, xs, &mut samples);
        let Some((mass, energy, momentum, count)) = integrate(&mut samples) else {
            return Err(Error::StationOutsideGas(xs));
        };
        let momentum_corrected =
            momentum - wall_integral(&wall_lower, xs) - wall_integral(&wall_upper, xs);
        result.max_mass_deviation = result
            .max_mass_deviation
            .max(((mass - inlet_mass) / inlet_mass).abs());
        result.max_energy_deviation = result
            .max_energy_deviation
            .max(((energy - inlet_energy) / inlet_energy).abs());
        result.stations.push(StationFlux { x: xs, mass, energy, momentum_corrected, samples: count });
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// Convergence order

/// Max-norm state error of the first lower wall region against the
/// simple-wave closed form.
pub fn wall_region_error(sol: &Solution, duct: &DuctGeometry, fan: &SimpleWaveFan) -> Result<f64> {
    let region = sol
        .regions
        .iter()
        .find(|r| r.kind == RegionKind::WallLower)
        .ok_or_else(|| Error::OutOfRegion("no lower wall region solved".into()))?;
    let q0 = fan.upstream.u.hypot(fan.upstream.v);
    let c0 = (fan.gas.gamma * fan.upstream.s * fan.upstream.rho.powf(fan.gas.gamma - 1.0)).sqrt();
    let rho0 = fan.upstream.rho;
    let mut err = 0.0f64;
    for (_, _, n) in region.mesh.iter_nodes() {
        let exact = fan.oracle_field(duct, n.x, n.y)?;
        let e = ((n.state.u - exact.state.u).abs() / q0)
            .max((n.state.v - exact.state.v).abs() / q0)
            .max((n.derived.c - exact.c).abs() / c0)
            .max((n.state.rho - exact.state.rho).abs() / rho0);
        err = err.max(e);
    }
    Ok(err)
}

/// Grid-refinement study of the wall-region error against the closed form.
/// Requires a uniform inflow (the oracle is exact only there) and at least
/// three distinct resolutions.
pub fn convergence_order(
    profile: &InletProfile,
    duct: &DuctGeometry,
    g: &GasConstants,
    cfg: &SolverConfig,
    resolutions: &[usize],
) -> Result<ConvergenceStudy> {
    if resolutions.len() < 2 {
        return Err(Error::InvalidParameter("need >= 2 resolutions".into()));
    }
    let mut sorted = resolutions.to_vec();
    sorted.dedup();
    if sorted.len() != resolutions.len() {
        return Err(Error::InvalidParameter("resolutions must be distinct".into()));
    }
    let (u0, rho0, s0) = match profile {
        InletProfile::Uniform { u0, rho0, s0 } => (*u0, *rho0, *s0),
        _ => {
            return Err(Error::InvalidParameter(
                "convergence study requires a uniform inflow".into(),
            ))
        }
    };
    let fan = build_fan(&crate::gas::FlowState::new(u0, 0.0, rho0, s0), g)?;
    let mut errors = Vec::new();
    for &n in resolutions {
        let cfg_n = SolverConfig { inlet_nodes: n, ..*cfg };
        let sol = crate::regions::orchestrate(profile, duct, g, &cfg_n)?;
        errors.push(wall_region_error(&sol, duct, &fan)?);
    }
    Ok(fit_order(resolutions, &errors))
}

pub fn fit_order(resolutions: &[usize], errors: &[f64]) -> ConvergenceStudy {
    let reliable = errors.iter().all(|&e| e > 1e-12);
    // least squares of ln(err) vs ln(h), h ~ 1/(N-1)
    let pts: Vec<(f64, f64)> = resolutions
        .iter()
        .zip(errors.iter())
        .map(|(&n, &e)| ((1.0 / (n as f64 - 1.0)).ln(), e.max(1e-300).ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let slope = if denom.abs() < 1e-300 { 0.0 } else { (n * sxy - sx * sy) / denom };
    ConvergenceStudy {
        resolutions: resolutions.to_vec(),
        errors: errors.to_vec(),
        fitted_order: slope,
        reliable,
    }
}

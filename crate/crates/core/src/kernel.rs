//! Unit processes of the rotational method of characteristics.
//!
//! Closure: (u, v) are solved from the discretized compatibility pair
//! along C+ and C-; c is recovered from the streamline-transported
//! Bernoulli value, rho from (c, s), and s, E_hat, delta2 are transported
//! exactly. omega/rho picks up the vorticity-law increment, which is
//! exact per streamline segment because delta2 and s are constant on it.
//!
//! The compatibility pair is used in the regular form
//!     cos(beta) du + sin(beta) dv = omega sinA cosA dl   along C+,
//!     cos(alpha) du + sin(alpha) dv = -omega sinA cosA dl along C-,
//! which stays finite where the slope forms tan(alpha), tan(beta) blow up.

use crate::error::{Error, Result};
use crate::gas::{self, DerivedState, FlowState, GasConstants};
use crate::geometry::{DuctGeometry, WallSide};
use crate::interp::Pchip;

/// Quantities carried along streamlines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transported {
    /// Specific entropy (identical to state.s by construction).
    pub s: f64,
    /// Bernoulli function.
    pub e_hat: f64,
    /// delta1 = omega / rho.
    pub omega_over_rho: f64,
    /// delta2 = (d+ s) / c^((gamma+1)/(gamma-1)), exactly constant along
    /// streamlines.
    pub delta2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    WallLower,
    WallUpper,
    Inlet,
    Axis,
    Vacuum,
}

impl NodeKind {
    pub fn label(&self) -> &'static str {
        match self {
            NodeKind::Interior => "interior",
            NodeKind::WallLower => "wall_lower",
            NodeKind::WallUpper => "wall_upper",
            NodeKind::Inlet => "inlet",
            NodeKind::Axis => "axis",
            NodeKind::Vacuum => "vacuum",
        }
    }
}

/// One solution node on the characteristic lattice.
#[derive(Debug, Clone, Copy)]
pub struct CharNode {
    pub x: f64,
    pub y: f64,
    pub state: FlowState,
    pub derived: DerivedState,
    pub transported: Transported,
    pub kind: NodeKind,
}

impl CharNode {
    pub fn gas_node(
        x: f64,
        y: f64,
        state: FlowState,
        transported: Transported,
        kind: NodeKind,
        g: &GasConstants,
    ) -> Result<Self> {
        let derived = gas::derive(&state, g)?;
        Ok(CharNode { x, y, state, derived, transported, kind })
    }

    pub fn omega(&self) -> f64 {
        self.transported.omega_over_rho * self.state.rho
    }

    pub fn pos(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    fn dist(&self, other: &CharNode) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Solver knobs. `c_vac` is the absolute vacuum cutoff (the config layer
/// derives it as a fraction of the inlet sound speed).
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub inlet_nodes: usize,
    pub x_max: f64,
    pub c_vac: f64,
    pub corrector_tol: f64,
    pub max_iters: usize,
    pub max_regions: usize,
    /// Horizon over which monotone divergence of outgoing characteristics
    /// declares them non-crossing.
    pub guard_dx: f64,
    /// Bisection depth for localizing the vacuum onset.
    pub max_refinements: usize,
    /// Reject characteristic crossings flatter than this angle.
    pub min_cross_angle: f64,
    /// Largest admissible slip-angle change per wall step; bigger steps
    /// trigger subdivision of the incoming front.
    pub max_wall_turn: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            inlet_nodes: 65,
            x_max: 30.0,
            c_vac: 1e-4,
            corrector_tol: 1e-12,
            max_iters: 20,
            max_regions: 64,
            guard_dx: 10.0,
            max_refinements: 48,
            min_cross_angle: 1e-4,
            max_wall_turn: 0.005,
        }
    }
}

/// Straight gas-vacuum interface ray, tangent to the wall at onset.
#[derive(Debug, Clone, Copy)]
pub struct VacuumInterface {
    pub side: WallSide,
    pub anchor_x: f64,
    pub anchor_y: f64,
    pub slope: f64,
}

// ---------------------------------------------------------------------------
// Fronts

/// Ordered polyline of nodes forming a data curve: the inlet segment or a
/// previously computed characteristic front. Interpolation of transported
/// quantities is monotone piecewise-cubic in arclength.
#[derive(Debug, Clone)]
pub struct Front {
    nodes: Vec<CharNode>,
    arclen: Vec<f64>,
}

/// Interpolated sample on a front.
#[derive(Debug, Clone, Copy)]
pub struct FrontSample {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
    pub c2: f64,
    pub transported: Transported,
    pub t: f64,
}

impl Front {
    pub fn new(nodes: Vec<CharNode>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidParameter("front needs >= 2 nodes".into()));
        }
        let mut arclen = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        arclen.push(0.0);
        for w in nodes.windows(2) {
            let d = w[0].dist(&w[1]);
            if d <= 0.0 {
                return Err(Error::InvalidParameter(
                    "front nodes must be strictly separated".into(),
                ));
            }
            acc += d;
            arclen.push(acc);
        }
        Ok(Front { nodes, arclen })
    }

    pub fn nodes(&self) -> &[CharNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &CharNode {
        &self.nodes[i]
    }

    pub fn first(&self) -> &CharNode {
        &self.nodes[0]
    }

    pub fn last(&self) -> &CharNode {
        self.nodes.last().unwrap()
    }

    pub fn arclen_at(&self, i: usize) -> f64 {
        self.arclen[i]
    }

    pub fn total_arclen(&self) -> f64 {
        *self.arclen.last().unwrap()
    }

    /// Interpolate the front at arclength t (clamped to the range).
    /// Positions and carried fields are PCHIP in t; the state is rebuilt
    /// with c^2 from the Bernoulli closure so a sampled node is consistent
    /// with what the unit processes would produce.
    pub fn sample(&self, t: f64, g: &GasConstants) -> Result<CharNode> {
        let t = t.clamp(0.0, self.total_arclen());
        let field = |get: &dyn Fn(&CharNode) -> f64| -> Result<Pchip> {
            Pchip::new(self.arclen.clone(), self.nodes.iter().map(|n| get(n)).collect())
        };
        let x = field(&|n| n.x)?.eval(t);
        let y = field(&|n| n.y)?.eval(t);
        let u = field(&|n| n.state.u)?.eval(t);
        let v = field(&|n| n.state.v)?.eval(t);
        let s = field(&|n| n.state.s)?.eval(t);
        let e_hat = field(&|n| n.transported.e_hat)?.eval(t);
        let d1 = field(&|n| n.transported.omega_over_rho)?.eval(t);
        let d2 = field(&|n| n.transported.delta2)?.eval(t);
        let q2 = u * u + v * v;
        let c2 = (g.gamma - 1.0) * (e_hat - 0.5 * q2);
        if c2 <= 0.0 {
            return Err(Error::VacuumReached { x, c: 0.0 });
        }
        let rho = gas::density_from(c2.sqrt(), s, g)?;
        CharNode::gas_node(
            x,
            y,
            FlowState::new(u, v, rho, s),
            Transported { s, e_hat, omega_over_rho: d1, delta2: d2 },
            NodeKind::Interior,
            g,
        )
    }
}

/// Back-trace a straight streamline from `pos` at angle `sigma_est` and
/// interpolate the transported quantities where it meets the front.
/// Interpolation is monotone piecewise-cubic along the front.
pub fn streamline_sample(pos: [f64; 2], sigma_est: f64, front: &Front) -> Result<FrontSample> {
    ray_front_crossing(pos, sigma_est + std::f64::consts::PI, front)
}

/// Intersect the forward ray from `pos` at `angle` with the front polyline
/// and interpolate there (PCHIP in arclength). The nearest crossing with a
/// nonnegative ray parameter wins.
pub fn ray_front_crossing(pos: [f64; 2], angle: f64, front: &Front) -> Result<FrontSample> {
    let (dir_x, dir_y) = (angle.cos(), angle.sin());
    let mut hit: Option<(usize, f64, f64)> = None; // (segment, zeta, ray distance)
    for i in 0..front.len() - 1 {
        let a = front.node(i);
        let b = front.node(i + 1);
        let ex = b.x - a.x;
        let ey = b.y - a.y;
        // pos + lam*dir = a + zeta*e
        let det = dir_x * ey - dir_y * ex;
        if det.abs() < 1e-300 {
            continue;
        }
        let rx = pos[0] - a.x;
        let ry = pos[1] - a.y;
        let zeta = (dir_x * ry - dir_y * rx) / det;
        let lam = (ex * ry - ey * rx) / det;
        let tol = 1e-9;
        if (-tol..=1.0 + tol).contains(&zeta) && lam >= -1e-9 {
            match hit {
                Some((_, _, best)) if lam >= best => {}
                _ => hit = Some((i, zeta.clamp(0.0, 1.0), lam)),
            }
        }
    }
    let (seg, zeta, _) = hit.ok_or_else(|| {
        Error::FootOutsideFront(format!(
            "ray from ({}, {}) at angle {} misses the front",
            pos[0], pos[1], angle
        ))
    })?;
    let t = front.arclen[seg] + zeta * (front.arclen[seg + 1] - front.arclen[seg]);
    let pick = |get: &dyn Fn(&CharNode) -> f64| -> f64 {
        // cubic in arclength over the whole front
        Pchip::new(front.arclen.clone(), front.nodes.iter().map(|n| get(n)).collect())
            .map(|p| p.eval(t))
            .unwrap_or_else(|_| get(front.node(seg)))
    };
    let u = pick(&|n| n.state.u);
    let v = pick(&|n| n.state.v);
    Ok(FrontSample {
        x: pick(&|n| n.x),
        y: pick(&|n| n.y),
        sigma: v.atan2(u),
        c2: pick(&|n| n.derived.c * n.derived.c),
        transported: Transported {
            s: pick(&|n| n.transported.s),
            e_hat: pick(&|n| n.transported.e_hat),
            omega_over_rho: pick(&|n| n.transported.omega_over_rho),
            delta2: pick(&|n| n.transported.delta2),
        },
        t,
    })
}

// ---------------------------------------------------------------------------
// Inlet

/// Inflow profile on the inlet segment x = 0, y in [-f(0), f(0)].
#[derive(Debug, Clone)]
pub enum InletProfile {
    Uniform { u0: f64, rho0: f64, s0: f64 },
    /// Base state plus an even cosine perturbation of amplitude eps.
    Perturbed { u0: f64, rho0: f64, s0: f64, eps: f64, shape: PerturbShape },
    /// Sampled columns (y, u, rho, s), v identically zero unless given.
    Table { y: Vec<f64>, u: Vec<f64>, v: Option<Vec<f64>>, rho: Vec<f64>, s: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbShape {
    /// u perturbed, rho and s uniform (rotational, isentropic).
    CosU,
    /// rho perturbed with s adjusted to keep p constant, u uniform.
    CosRho,
    /// both of the above.
    CosMix,
}

struct ProfilePoint {
    u: f64,
    v: f64,
    rho: f64,
    s: f64,
    du_dy: f64,
    ds_dy: f64,
}

impl InletProfile {
    pub fn uniform_mach(m: f64, c0: f64, rho0: f64, g: &GasConstants) -> Self {
        // s such that c(rho0, s) = c0
        let s0 = c0 * c0 / (g.gamma * rho0.powf(g.gamma - 1.0));
        InletProfile::Uniform { u0: m * c0, rho0, s0 }
    }

    fn eval_with_gas(&self, y: f64, f0: f64, g: &GasConstants) -> Result<ProfilePoint> {
        match self {
            InletProfile::Uniform { u0, rho0, s0 } => Ok(ProfilePoint {
                u: *u0,
                v: 0.0,
                rho: *rho0,
                s: *s0,
                du_dy: 0.0,
                ds_dy: 0.0,
            }),
            InletProfile::Perturbed { u0, rho0, s0, eps, shape } => {
                let w = std::f64::consts::FRAC_PI_2 / f0;
                let bump = (w * y).cos();
                let dbump = -w * (w * y).sin();
                let (u, du_dy) = match shape {
                    PerturbShape::CosU | PerturbShape::CosMix => {
                        (u0 * (1.0 + eps * bump), u0 * eps * dbump)
                    }
                    PerturbShape::CosRho => (*u0, 0.0),
                };
                // rho-perturbed shapes keep p = s rho^gamma constant
                let (rho, s, ds_dy) = match shape {
                    PerturbShape::CosRho | PerturbShape::CosMix => {
                        let rho = rho0 * (1.0 + eps * bump);
                        let drho_dy = rho0 * eps * dbump;
                        let p0 = s0 * rho0.powf(g.gamma);
                        let s = p0 / rho.powf(g.gamma);
                        (rho, s, -g.gamma * p0 * drho_dy / rho.powf(g.gamma + 1.0))
                    }
                    PerturbShape::CosU => (*rho0, *s0, 0.0),
                };
                Ok(ProfilePoint { u, v: 0.0, rho, s, du_dy, ds_dy })
            }
            InletProfile::Table { y: ys, u, v, rho, s } => {
                let pu = Pchip::new(ys.clone(), u.clone())?;
                let prho = Pchip::new(ys.clone(), rho.clone())?;
                let ps = Pchip::new(ys.clone(), s.clone())?;
                let vv = match v {
                    Some(vcol) => Pchip::new(ys.clone(), vcol.clone())?.eval(y),
                    None => 0.0,
                };
                Ok(ProfilePoint {
                    u: pu.eval(y),
                    v: vv,
                    rho: prho.eval(y),
                    s: ps.eval(y),
                    du_dy: pu.eval_deriv(y),
                    ds_dy: ps.eval_deriv(y),
                })
            }
        }
    }
}

/// Discretize the inflow onto N inlet nodes, checking the admissibility
/// conditions: C1 data, v = 0 with constant pressure and supersonic speed,
/// and even symmetry.
pub fn inlet_discretize(
    profile: &InletProfile,
    duct: &DuctGeometry,
    n: usize,
    g: &GasConstants,
) -> Result<Front> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("inlet needs N >= 3 nodes, got {n}")));
    }
    let f0 = duct.f(0.0);
    let p_ref = {
        let p = profile.eval_with_gas(0.0, f0, g)?;
        p.s * p.rho.powf(g.gamma)
    };
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let y = -f0 + 2.0 * f0 * i as f64 / (n - 1) as f64;
        let pt = profile.eval_with_gas(y, f0, g)?;
        if !(pt.u.is_finite() && pt.rho.is_finite() && pt.s.is_finite()) {
            return Err(Error::ProfileViolation {
                clause: "A1".into(),
                detail: format!("profile not finite at y = {y}"),
            });
        }
        if pt.v != 0.0 {
            return Err(Error::ProfileViolation {
                clause: "A2".into(),
                detail: format!("v_in({y}) = {} != 0", pt.v),
            });
        }
        let p = pt.s * pt.rho.powf(g.gamma);
        if (p - p_ref).abs() > 1e-10 * p_ref.abs().max(1e-300) {
            return Err(Error::ProfileViolation {
                clause: "A2".into(),
                detail: format!("p_in({y}) = {p} deviates from {p_ref}"),
            });
        }
        let c2 = g.gamma * pt.s * pt.rho.powf(g.gamma - 1.0);
        if pt.u * pt.u <= c2 {
            return Err(Error::ProfileViolation {
                clause: "A2".into(),
                detail: format!("not supersonic at y = {y}: u = {}, c = {}", pt.u, c2.sqrt()),
            });
        }
        let mirror = profile.eval_with_gas(-y, f0, g)?;
        let asym = (pt.u - mirror.u).abs() / pt.u.abs().max(1.0)
            + (pt.rho - mirror.rho).abs() / pt.rho.abs().max(1.0)
            + (pt.s - mirror.s).abs() / pt.s.abs().max(1.0);
        if asym > 1e-10 {
            return Err(Error::ProfileViolation {
                clause: "A3".into(),
                detail: format!("profile not even at y = {y} (asymmetry {asym:e})"),
            });
        }
        let state = FlowState::new(pt.u, 0.0, pt.rho, pt.s);
        let d = gas::derive(&state, g).map_err(|e| Error::ProfileViolation {
            clause: "A2".into(),
            detail: format!("state at y = {y} rejected: {e}"),
        })?;
        // d+ s = sin(alpha_in) s'(y) in the laminar field s = s_in(y)
        let cexp = d.c.powf((g.gamma + 1.0) / (g.gamma - 1.0));
        let transported = Transported {
            s: pt.s,
            e_hat: d.e_hat,
            omega_over_rho: pt.du_dy / pt.rho,
            delta2: d.alpha.sin() * pt.ds_dy / cexp,
        };
        nodes.push(CharNode { x: 0.0, y, state, derived: d, transported, kind: NodeKind::Inlet });
    }
    Front::new(nodes)
}

// ---------------------------------------------------------------------------
// Interior point

struct Coeffs {
    alpha_pos: f64,
    beta_pos: f64,
    // C+ relation carries beta coefficients, C- relation alpha coefficients
    beta_rel: f64,
    alpha_rel: f64,
    rhs_plus: f64,
    rhs_minus: f64,
}

fn average_coeffs(l: &CharNode, r: &CharNode, x: Option<&CharNode>) -> Coeffs {
    match x {
        None => Coeffs {
            alpha_pos: l.derived.alpha,
            beta_pos: r.derived.beta,
            beta_rel: l.derived.beta,
            alpha_rel: r.derived.alpha,
            rhs_plus: l.omega() * l.derived.mach_angle.sin() * l.derived.mach_angle.cos(),
            rhs_minus: r.omega() * r.derived.mach_angle.sin() * r.derived.mach_angle.cos(),
        },
        Some(xn) => {
            let w = |a: f64, b: f64| 0.5 * (a + b);
            let sc = |n: &CharNode| n.derived.mach_angle.sin() * n.derived.mach_angle.cos() * n.omega();
            Coeffs {
                alpha_pos: w(l.derived.alpha, xn.derived.alpha),
                beta_pos: w(r.derived.beta, xn.derived.beta),
                beta_rel: w(l.derived.beta, xn.derived.beta),
                alpha_rel: w(r.derived.alpha, xn.derived.alpha),
                rhs_plus: w(sc(l), sc(xn)),
                rhs_minus: w(sc(r), sc(xn)),
            }
        }
    }
}

/// Previous data curve for streamline transport, with the index of the
/// segment near which the foot is expected.
#[derive(Clone, Copy)]
pub struct TransportData<'a> {
    pub curve: &'a [CharNode],
    pub hint: usize,
}

/// New interior node from L (on the C+ into it) and R (on the C- into it).
/// Transported quantities come from the streamline foot on the chord L-R
/// with linear interpolation; region sweeps use `interior_point_on`, which
/// lands the foot on the actual data curve with a cubic.
pub fn interior_point(
    l: &CharNode,
    r: &CharNode,
    g: &GasConstants,
    cfg: &SolverConfig,
) -> Result<CharNode> {
    interior_point_on(l, r, None, g, cfg)
}

/// Interior point with the streamline foot traced back onto the previous
/// data curve. The linear chord foot limits streamline transport to first
/// order; the curve foot with local cubic interpolation keeps transport at
/// the second-order balance of the scheme.
pub fn interior_point_on(
    l: &CharNode,
    r: &CharNode,
    data: Option<TransportData<'_>>,
    g: &GasConstants,
    cfg: &SolverConfig,
) -> Result<CharNode> {
    if l.dist(r) == 0.0 {
        return Err(Error::NoIntersection("coincident parent nodes".into()));
    }
    let mut current: Option<CharNode> = None;
    let mut foot_sigma: Option<f64> = None;
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iters.max(1) {
        let co = average_coeffs(l, r, current.as_ref());
        let cross = co.alpha_pos - co.beta_pos;
        if cross.sin().abs() < cfg.min_cross_angle {
            return Err(Error::DegenerateCrossing { angle: cross });
        }
        // intersection of the two characteristic segments
        let (ca, sa) = (co.alpha_pos.cos(), co.alpha_pos.sin());
        let (cb, sb) = (co.beta_pos.cos(), co.beta_pos.sin());
        let det = sb * ca - cb * sa;
        if det.abs() < 1e-300 {
            return Err(Error::NoIntersection("parallel characteristic segments".into()));
        }
        let rx = r.x - l.x;
        let ry = r.y - l.y;
        let t_plus = (sb * rx - cb * ry) / det;
        let t_minus = (sa * rx - ca * ry) / det;
        let step_scale = l.dist(r);
        if t_plus < -1e-12 * step_scale || t_minus < -1e-12 * step_scale {
            return Err(Error::NoIntersection(format!(
                "characteristics meet behind the data (t+ = {t_plus:e}, t- = {t_minus:e})"
            )));
        }
        let x = l.x + t_plus * ca;
        let y = l.y + t_plus * sa;

        // compatibility pair
        let lp = t_plus;
        let lm = t_minus;
        let (cbr, sbr) = (co.beta_rel.cos(), co.beta_rel.sin());
        let (car, sar) = (co.alpha_rel.cos(), co.alpha_rel.sin());
        let b1 = co.rhs_plus * lp + cbr * l.state.u + sbr * l.state.v;
        let b2 = -co.rhs_minus * lm + car * r.state.u + sar * r.state.v;
        let det_uv = cbr * sar - sbr * car;
        if det_uv.abs() < 1e-14 {
            return Err(Error::DegenerateCrossing { angle: det_uv.asin() });
        }
        let u = (b1 * sar - sbr * b2) / det_uv;
        let v = (cbr * b2 - b1 * car) / det_uv;

        // streamline foot on the previous data curve (chord fallback);
        // the back-trace direction averages the node and foot flow angles
        let sigma_here = v.atan2(u);
        let sigma_trace = match (current.is_some(), foot_sigma) {
            (true, Some(fs)) => 0.5 * (sigma_here + fs),
            (true, None) => sigma_here,
            (false, _) => 0.5 * (l.derived.sigma + r.derived.sigma),
        };
        let foot = match data {
            Some(td) => match curve_foot([x, y], sigma_trace, td) {
                Some(f) => f,
                None => chord_foot([x, y], sigma_trace, l, r),
            },
            None => chord_foot([x, y], sigma_trace, l, r),
        };
        foot_sigma = Some(foot.sigma);
        let q2 = u * u + v * v;
        let c2 = (g.gamma - 1.0) * (foot.e_hat - 0.5 * q2);
        if c2 <= cfg.c_vac * cfg.c_vac {
            return Err(Error::VacuumReached { x, c: c2.max(0.0).sqrt() });
        }
        let rho = gas::density_from(c2.sqrt(), foot.s, g)?;
        // vorticity-law increment along the streamline segment
        let incr = -foot.delta2 * (foot.s * g.gamma).powf(1.0 / (g.gamma - 1.0))
            / (g.gamma * (g.gamma - 1.0) * foot.s)
            * (c2 - foot.c2);
        let transported = Transported {
            s: foot.s,
            e_hat: foot.e_hat,
            omega_over_rho: foot.omega_over_rho + incr,
            delta2: foot.delta2,
        };
        let node = CharNode::gas_node(x, y, FlowState::new(u, v, rho, foot.s), transported, NodeKind::Interior, g)?;
        residual = match &current {
            Some(prev) => {
                let dp = node.dist(prev);
                let ds = (node.state.u - prev.state.u).abs()
                    + (node.state.v - prev.state.v).abs()
                    + (node.derived.c - prev.derived.c).abs();
                (dp + ds) / (1.0 + node.derived.q)
            }
            None => f64::INFINITY,
        };
        current = Some(node);
        if residual < cfg.corrector_tol {
            return Ok(current.unwrap());
        }
    }
    // accept near-converged iterates; the fixed point contracts at O(h)
    if residual < cfg.corrector_tol.max(1e-30).sqrt() {
        return Ok(current.unwrap());
    }
    Err(Error::CorrectorDiverged { iters: cfg.max_iters, residual })
}

struct Foot {
    s: f64,
    e_hat: f64,
    omega_over_rho: f64,
    delta2: f64,
    c2: f64,
    sigma: f64,
}

// Linear fallback foot on the chord L-R, used when no data curve is
// available or the back-trace misses it.
fn chord_foot(pos: [f64; 2], sigma: f64, l: &CharNode, r: &CharNode) -> Foot {
    let ex = r.x - l.x;
    let ey = r.y - l.y;
    let (dx, dy) = (sigma.cos(), sigma.sin());
    let det = -dx * ey + dy * ex;
    let zeta = if det.abs() < 1e-300 {
        0.5
    } else {
        ((-dx * (pos[1] - l.y)) + dy * (pos[0] - l.x)) / det
    };
    let z = zeta.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| a + (b - a) * z;
    Foot {
        s: lerp(l.transported.s, r.transported.s),
        e_hat: lerp(l.transported.e_hat, r.transported.e_hat),
        omega_over_rho: lerp(l.transported.omega_over_rho, r.transported.omega_over_rho),
        delta2: lerp(l.transported.delta2, r.transported.delta2),
        c2: lerp(l.derived.c * l.derived.c, r.derived.c * r.derived.c),
        sigma: 0.5 * (l.derived.sigma + r.derived.sigma),
    }
}

// Back-trace the streamline onto the data curve and interpolate there with
// a local cubic in arclength (quadratic or linear near the curve ends).
fn curve_foot(pos: [f64; 2], sigma: f64, td: TransportData<'_>) -> Option<Foot> {
    let curve = td.curve;
    if curve.len() < 2 {
        return None;
    }
    let (bx, by) = ((sigma + std::f64::consts::PI).cos(), (sigma + std::f64::consts::PI).sin());
    let try_segment = |i: usize, found: &mut Option<(usize, f64, f64)>| {
        let a = &curve[i];
        let b = &curve[i + 1];
        let ex = b.x - a.x;
        let ey = b.y - a.y;
        let det = bx * ey - by * ex;
        if det.abs() < 1e-300 {
            return;
        }
        let rx = pos[0] - a.x;
        let ry = pos[1] - a.y;
        let zeta = (bx * ry - by * rx) / det;
        let lam = (ex * ry - ey * rx) / det;
        if (-1e-9..=1.0 + 1e-9).contains(&zeta) && lam >= -1e-9 {
            match found {
                Some((_, _, best)) if lam >= *best => {}
                _ => *found = Some((i, zeta.clamp(0.0, 1.0), lam)),
            }
        }
    };
    // (segment, zeta, distance)
    let mut found: Option<(usize, f64, f64)> = None;
    let lo = td.hint.saturating_sub(3);
    let hi = (td.hint + 3).min(curve.len() - 1);
    for i in lo..hi {
        try_segment(i, &mut found);
    }
    if found.is_none() {
        for i in 0..curve.len() - 1 {
            try_segment(i, &mut found);
        }
    }
    let (seg, zeta, _) = found?;
    // local stencil around the crossing segment
    let first = seg.saturating_sub(1);
    let last = (seg + 2).min(curve.len() - 1);
    let pts = &curve[first..=last];
    let mut ts = Vec::with_capacity(pts.len());
    let mut acc = 0.0;
    ts.push(0.0);
    for w in pts.windows(2) {
        let d = (w[1].x - w[0].x).hypot(w[1].y - w[0].y);
        if d <= 0.0 {
            return None;
        }
        acc += d;
        ts.push(acc);
    }
    let k = seg - first;
    let t = ts[k] + zeta * (ts[k + 1] - ts[k]);
    let interp = |get: &dyn Fn(&CharNode) -> f64| -> f64 {
        lagrange(&ts, &pts.iter().map(|n| get(n)).collect::<Vec<_>>(), t)
    };
    let u = interp(&|n| n.state.u);
    let v = interp(&|n| n.state.v);
    Some(Foot {
        s: interp(&|n| n.transported.s),
        e_hat: interp(&|n| n.transported.e_hat),
        omega_over_rho: interp(&|n| n.transported.omega_over_rho),
        delta2: interp(&|n| n.transported.delta2),
        c2: interp(&|n| n.derived.c * n.derived.c),
        sigma: v.atan2(u),
    })
}

fn lagrange(ts: &[f64], vs: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..ts.len() {
        let mut w = vs[i];
        for j in 0..ts.len() {
            if j != i {
                w *= (t - ts[j]) / (ts[i] - ts[j]);
            }
        }
        acc += w;
    }
    acc
}

// ---------------------------------------------------------------------------
// Wall point

/// Trial wall state at abscissa x_w: slip plus the compatibility relation
/// along the incoming characteristic from n, with coefficients averaged
/// between n and the trial state. The sound speed is clamped at zero so the
/// construction stays defined past the vacuum turning.
struct WallTrial {
    q: f64,
    c2: f64,
    /// Averaged incoming characteristic direction n -> wall.
    dir: f64,
}

fn wall_trial(
    n: &CharNode,
    prev_wall: &CharNode,
    duct: &DuctGeometry,
    side: WallSide,
    g: &GasConstants,
    x_w: f64,
) -> WallTrial {
    let sigma_w = duct.slip_angle(x_w, side);
    let y_w = duct.wall_y(x_w, side);
    let ell = (x_w - n.x).hypot(y_w - n.y);
    let e_hat = prev_wall.transported.e_hat;
    // damped fixed point on the trial state's angles; damping kicks in
    // when the update oscillates (grazing incidence, large trial steps)
    let mut a_w = n.derived.mach_angle;
    let mut omega_w = n.omega();
    let mut c2 = n.derived.c * n.derived.c;
    let mut q_w = n.derived.q;
    let mut dir = 0.0;
    let mut prev_delta = f64::INFINITY;
    for _ in 0..60 {
        let (rel_angle, dir_now, rhs_sign) = match side {
            WallSide::Lower => (
                0.5 * (n.derived.alpha + (sigma_w + a_w)),
                0.5 * (n.derived.beta + (sigma_w - a_w)),
                -1.0,
            ),
            WallSide::Upper => (
                0.5 * (n.derived.beta + (sigma_w - a_w)),
                0.5 * (n.derived.alpha + (sigma_w + a_w)),
                1.0,
            ),
        };
        dir = dir_now;
        let a_bar = 0.5 * (n.derived.mach_angle + a_w);
        let omega_bar = 0.5 * (n.omega() + omega_w);
        let rhs = rhs_sign * omega_bar * a_bar.sin() * a_bar.cos() * ell;
        let denom = (rel_angle - sigma_w).cos();
        if denom.abs() < 1e-12 {
            break;
        }
        let mut q_new =
            ((rhs + rel_angle.cos() * n.state.u + rel_angle.sin() * n.state.v) / denom).max(1e-12);
        let delta = (q_new - q_w).abs();
        if delta > 0.5 * prev_delta {
            q_new = 0.5 * (q_new + q_w);
        }
        prev_delta = delta;
        let c2_new = ((g.gamma - 1.0) * (e_hat - 0.5 * q_new * q_new)).max(0.0);
        let a_new = (c2_new.sqrt() / q_new).clamp(0.0, 1.0).asin();
        let tr = prev_wall.transported;
        let c2_prev = prev_wall.derived.c * prev_wall.derived.c;
        let incr = -tr.delta2 * (tr.s * g.gamma).powf(1.0 / (g.gamma - 1.0))
            / (g.gamma * (g.gamma - 1.0) * tr.s)
            * (c2_new - c2_prev);
        let rho_new = if c2_new > 0.0 {
            gas::density_from(c2_new.sqrt(), tr.s, g).unwrap_or(0.0)
        } else {
            0.0
        };
        let omega_new = (tr.omega_over_rho + incr) * rho_new;
        let done = (q_new - q_w).abs() < 1e-14 * (1.0 + q_new.abs());
        q_w = q_new;
        c2 = c2_new;
        a_w = a_new;
        omega_w = omega_new;
        if done {
            break;
        }
    }
    WallTrial { q: q_w, c2, dir }
}

/// New wall node from interior node `n` whose forward characteristic of the
/// incoming family (C- toward the lower wall, C+ toward the upper) reaches
/// the wall. The wall abscissa is root-found: the characteristic ray from n
/// at the averaged incoming direction must land on the wall at x_w itself.
/// Slip fixes the flow angle; one compatibility relation along the incoming
/// characteristic closes (u, v); wall-streamline quantities come from
/// `prev_wall`.
pub fn wall_point(
    n: &CharNode,
    prev_wall: &CharNode,
    duct: &DuctGeometry,
    side: WallSide,
    g: &GasConstants,
    cfg: &SolverConfig,
) -> Result<CharNode> {
    let gap0 = match side {
        WallSide::Lower => n.y + duct.f(n.x),
        WallSide::Upper => duct.f(n.x) - n.y,
    };
    if gap0 < -1e-12 {
        return Err(Error::NoWallHit(format!("node at ({}, {}) is outside the wall", n.x, n.y)));
    }
    // signed height of the ray landing above the wall at trial x_w
    let miss = |x_w: f64| -> f64 {
        let t = wall_trial(n, prev_wall, duct, side, g, x_w);
        let dirv = (t.dir.cos(), t.dir.sin());
        if dirv.0 <= 1e-12 {
            return f64::INFINITY; // ray not advancing in x
        }
        let y_ray = n.y + (x_w - n.x) * dirv.1 / dirv.0;
        match side {
            WallSide::Lower => y_ray + duct.f(x_w),
            WallSide::Upper => duct.f(x_w) - y_ray,
        }
    };
    // bracket the landing
    let scale = gap0.max(1e-9);
    let mut hi = n.x + scale;
    let cap = cfg.x_max + duct.f(0.0);
    let mut bracketed = false;
    for _ in 0..200 {
        let m = miss(hi);
        if m <= 0.0 {
            bracketed = true;
            break;
        }
        if hi > cap {
            break;
        }
        hi = n.x + (hi - n.x) * 1.6;
    }
    if !bracketed {
        return Err(Error::NoWallHit(format!(
            "characteristic from ({}, {}) misses the wall before x_max",
            n.x, n.y
        )));
    }
    let mut lo = n.x;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if miss(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * (1.0 + hi) {
            break;
        }
    }
    let x_w = 0.5 * (lo + hi);
    let trial = wall_trial(n, prev_wall, duct, side, g, x_w);
    if trial.c2 <= cfg.c_vac * cfg.c_vac {
        return Err(Error::VacuumReached { x: x_w, c: trial.c2.max(0.0).sqrt() });
    }
    let sigma_w = duct.slip_angle(x_w, side);
    let tr = prev_wall.transported;
    let rho = gas::density_from(trial.c2.sqrt(), tr.s, g)?;
    let c2_prev = prev_wall.derived.c * prev_wall.derived.c;
    let incr = -tr.delta2 * (tr.s * g.gamma).powf(1.0 / (g.gamma - 1.0))
        / (g.gamma * (g.gamma - 1.0) * tr.s)
        * (trial.c2 - c2_prev);
    let transported = Transported {
        s: tr.s,
        e_hat: tr.e_hat,
        omega_over_rho: tr.omega_over_rho + incr,
        delta2: tr.delta2,
    };
    let kind = match side {
        WallSide::Lower => NodeKind::WallLower,
        WallSide::Upper => NodeKind::WallUpper,
    };
    CharNode::gas_node(
        x_w,
        duct.wall_y(x_w, side),
        FlowState::new(trial.q * sigma_w.cos(), trial.q * sigma_w.sin(), rho, tr.s),
        transported,
        kind,
        g,
    )
}

/// Vacuum test for a wall node: strict c < c_vac. When true, the straight
/// interface ray tangent to the wall at the node's abscissa.
pub fn detect_vacuum(node: &CharNode, duct: &DuctGeometry, cfg: &SolverConfig) -> Option<VacuumInterface> {
    let side = match node.kind {
        NodeKind::WallLower => WallSide::Lower,
        NodeKind::WallUpper => WallSide::Upper,
        _ => return None,
    };
    if node.derived.c < cfg.c_vac {
        Some(interface_at(duct, node.x, side))
    } else {
        None
    }
}

pub fn interface_at(duct: &DuctGeometry, x: f64, side: WallSide) -> VacuumInterface {
    VacuumInterface {
        side,
        anchor_x: x,
        anchor_y: duct.wall_y(x, side),
        slope: side.sign() * duct.f_prime(x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simple_wave::build_fan;

    fn g14() -> GasConstants {
        GasConstants::new(1.4).unwrap()
    }

    fn uniform_node(x: f64, y: f64, g: &GasConstants) -> CharNode {
        let st = FlowState::new(2.0, 0.0, 1.0, 1.0 / 1.4);
        let d = gas::derive(&st, g).unwrap();
        CharNode {
            x,
            y,
            state: st,
            derived: d,
            transported: Transported {
                s: st.s,
                e_hat: d.e_hat,
                omega_over_rho: 0.0,
                delta2: 0.0,
            },
            kind: NodeKind::Interior,
        }
    }

    #[test]
    fn interior_uniform_fixed_point() {
        let g = g14();
        let cfg = SolverConfig::default();
        let l = uniform_node(0.0, -0.1, &g);
        let r = uniform_node(0.0, 0.1, &g);
        let n = interior_point(&l, &r, &g, &cfg).unwrap();
        assert!((n.x - 0.1 * 3.0f64.sqrt()).abs() < 1e-12);
        assert!(n.y.abs() < 1e-12);
        assert!((n.state.u - 2.0).abs() < 1e-12);
        assert!(n.state.v.abs() < 1e-12);
        assert!((n.state.rho - 1.0).abs() < 1e-12);
        assert_eq!(n.transported.s, l.transported.s);
        assert_eq!(n.transported.e_hat, l.transported.e_hat);
    }

    #[test]
    fn interior_degenerate_inputs() {
        let g = g14();
        let cfg = SolverConfig::default();
        let l = uniform_node(0.0, -0.1, &g);
        assert!(matches!(
            interior_point(&l, &l.clone(), &g, &cfg),
            Err(Error::NoIntersection(_))
        ));
        // swapped parents: characteristics meet behind the data
        let r = uniform_node(0.0, 0.1, &g);
        assert!(interior_point(&r, &l, &g, &cfg).is_err());
    }

    #[test]
    fn interior_matches_fan_oracle_second_order() {
        let g = g14();
        let cfg = SolverConfig::default();
        let duct = DuctGeometry::hyperbolic_wall(1.0, 0.7, 1.0, 30.0).unwrap();
        let fan = build_fan(&FlowState::new(2.0, 0.0, 1.0, 1.0 / 1.4), &g).unwrap();
        let node_from_fan = |xi: f64, r: f64| -> CharNode {
            let th = fan.theta_at_wall(&duct, xi).unwrap();
            let smp = fan.fan_state(th).unwrap();
            let x = xi + r * smp.alpha.cos();
            let y = -duct.f(xi) + r * smp.alpha.sin();
            let d = gas::derive(&smp.state, &g).unwrap();
            CharNode {
                x,
                y,
                state: smp.state,
                derived: d,
                transported: Transported { s: smp.state.s, e_hat: d.e_hat, omega_over_rho: 0.0, delta2: 0.0 },
                kind: NodeKind::Interior,
            }
        };
        let mut errs = Vec::new();
        for &h in &[0.2, 0.1, 0.05] {
            // L on the lower C+ line (larger foot), R up-left on the
            // previous line; all distances scale with h
            let l = node_from_fan(0.4 + h, 0.2 * h);
            let r = node_from_fan(0.4, 1.2 * h);
            let n = interior_point(&l, &r, &g, &cfg).unwrap();
            let exact = fan.oracle_field(&duct, n.x, n.y).unwrap();
            let e = (n.state.u - exact.state.u).abs().max((n.state.v - exact.state.v).abs());
            errs.push(e);
        }
        // local truncation is better than O(h^2): halving h should cut the
        // error by well over 2x
        assert!(errs[1] < errs[0] * 0.4, "errors {errs:?}");
        assert!(errs[2] < errs[1] * 0.4, "errors {errs:?}");
    }

    #[test]
    fn wall_point_flat_wall_keeps_state() {
        let g = g14();
        let cfg = SolverConfig { x_max: 50.0, ..Default::default() };
        // nearly flat wall: slip angle ~ 0 at small x
        let duct = DuctGeometry::hyperbolic_wall(1.0, 1e-12, 1.0, 50.0).unwrap();
        let n = uniform_node(0.2, -0.9, &g);
        let w0 = uniform_node(0.0, -1.0, &g);
        let w = wall_point(&n, &w0, &duct, WallSide::Lower, &g, &cfg).unwrap();
        assert!((w.state.u - 2.0).abs() < 1e-9);
        assert!(w.state.v.abs() < 1e-9);
        assert_eq!(w.kind, NodeKind::WallLower);
    }

    // Frozen from the Prandtl-Meyer oracle: turning Mach 2 by arctan(0.1)
    // gives M = 2.2138312192789797, c = 0.9534120950153191.
    #[test]
    fn wall_point_prandtl_meyer_turn() {
        let g = g14();
        let cfg = SolverConfig { x_max: 500.0, ..Default::default() };
        // wall whose slope is ~0.1 where the characteristic lands
        let duct = DuctGeometry::hyperbolic_wall(1.0, 0.1, 1e-3, 500.0).unwrap();
        // place the node so its C- reaches the wall in the constant-slope part
        let n = uniform_node(0.5, -0.9, &g);
        let w0 = {
            let mut w = uniform_node(0.0, -1.0, &g);
            w.kind = NodeKind::WallLower;
            w
        };
        let w = wall_point(&n, &w0, &duct, WallSide::Lower, &g, &cfg).unwrap();
        let fp = duct.f_prime(w.x);
        assert!((fp - 0.1).abs() < 1e-4, "slope at landing: {fp}");
        assert!((w.derived.sigma + fp.atan()).abs() < 1e-12);
        // single-step turn across ~0.1 rad: trapezoidal accuracy
        assert!((w.derived.c - 0.9534120950153191).abs() < 5e-4, "c = {}", w.derived.c);
        assert!((w.derived.q - 2.1106934607830903).abs() < 1e-3);
    }

    #[test]
    fn wall_point_upper_side() {
        let g = g14();
        let cfg = SolverConfig { x_max: 50.0, ..Default::default() };
        let duct = DuctGeometry::hyperbolic_wall(1.0, 0.1, 1.0, 50.0).unwrap();
        let n = uniform_node(0.2, 0.9, &g);
        let w0 = uniform_node(0.0, 1.0, &g);
        let w = wall_point(&n, &w0, &duct, WallSide::Upper, &g, &cfg).unwrap();
        assert_eq!(w.kind, NodeKind::WallUpper);
        assert!((w.derived.sigma - duct.f_prime(w.x).atan()).abs() < 1e-12);
        assert!(w.state.v > 0.0);
    }

    #[test]
    fn wall_point_no_hit_when_diverging() {
        let g = g14();
        let cfg = SolverConfig { x_max: 5.0, ..Default::default() };
        let duct = DuctGeometry::hyperbolic_wall(1.0, 0.1, 1.0, 5.0).unwrap();
        // upper-bound: a node whose incoming C- points up and away from the
        // lower wall (beta > 0 via strong upward flow)
        let st = FlowState::new(2.0, 1.5, 1.0, 1.0 / 1.4);
        let d = gas::derive(&st, &g).unwrap();
        let n = CharNode {
            x: 0.2,
            y: -0.5,
            state: st,
            derived: d,
            transported: Transported { s: st.s, e_hat: d.e_hat, omega_over_rho: 0.0, delta2: 0.0 },
            kind: NodeKind::Interior,
        };
        let w0 = uniform_node(0.0, -1.0, &g);
        assert!(matches!(
            wall_point(&n, &w0, &duct, WallSide::Lower, &g, &cfg),
            Err(Error::NoWallHit(_))
        ));
    }

    #[test]
    fn streamline_sample_identities() {
        let g = g14();
        // uniform front: constants regardless of foot position
        let nodes: Vec<CharNode> = (0..5).map(|i| uniform_node(0.0, -1.0 + 0.5 * i as f64, &g)).collect();
        let front = Front::new(nodes).unwrap();
        let smp = streamline_sample([0.4, 0.13], 0.0, &front).unwrap();
        assert_eq!(smp.transported.e_hat, 4.5);
        assert_eq!(smp.transported.omega_over_rho, 0.0);

        // linear delta2 profile: cubic reproduces linears, midpoint = mean
        let mut nodes: Vec<CharNode> = (0..5).map(|i| uniform_node(0.0, -1.0 + 0.5 * i as f64, &g)).collect();
        for (i, n) in nodes.iter_mut().enumerate() {
            n.transported.delta2 = 0.2 + 0.1 * i as f64;
        }
        let front = Front::new(nodes).unwrap();
        // foot exactly at a node
        let smp = streamline_sample([0.5, 0.0], 0.0, &front).unwrap();
        assert!((smp.transported.delta2 - 0.4).abs() < 1e-12);
        // foot at a segment midpoint
        let smp = streamline_sample([0.5, 0.25], 0.0, &front).unwrap();
        assert!((smp.transported.delta2 - 0.45).abs() < 1e-12);
        // foot outside
        assert!(streamline_sample([0.5, 5.0], 0.0, &front).is_err());
    }

    #[test]
    fn vorticity_increment_closed_form() {
        // hand-built two-node streamline: the omega/rho increment matches
        // the closed form for a prescribed Delta(c^2)
        let g = g14();
        let cfg = SolverConfig::default();
        let duct = DuctGeometry::hyperbolic_wall(1.0, 0.1, 1.0, 50.0).unwrap();
        let mut w0 = uniform_node(0.0, -1.0, &g);
        w0.kind = NodeKind::WallLower;
        w0.transported.delta2 = 0.3;
        let n = uniform_node(0.2, -0.9, &g);
        let w = wall_point(&n, &w0, &duct, WallSide::Lower, &g, &cfg).unwrap();
        let dc2 = w.derived.c * w.derived.c - w0.derived.c * w0.derived.c;
        let s = w0.transported.s;
        let expected = -0.3 * (s * g.gamma).powf(1.0 / (g.gamma - 1.0))
            / (g.gamma * (g.gamma - 1.0) * s)
            * dc2;
        assert!((w.transported.omega_over_rho - expected).abs() < 1e-14);
        assert_eq!(w.transported.delta2, 0.3);
    }

    #[test]
    fn inlet_uniform_and_violations() {
        let g = g14();
        let duct = DuctGeometry::hyperbolic_wall(1.0, 0.05, 1.0, 30.0).unwrap();
        let profile = InletProfile::Uniform { u0: 2.0, rho0: 1.0, s0: 1.0 / 1.4 };
        let front = inlet_discretize(&profile, &duct, 5, &g).unwrap();
        assert_eq!(front.len(), 5);
        for n in front.nodes() {
            assert_eq!(n.state.u, 2.0);
            assert_eq!(n.transported.omega_over_rho, 0.0);
            assert_eq!(n.transported.delta2, 0.0);
        }
        assert!(inlet_discretize(&profile, &duct, 2, &g).is_err());

        // v != 0 rejected as A2
        let bad = InletProfile::Table {
            y: vec![-1.0, 0.0, 1.0],
            u: vec![2.0, 2.0, 2.0],
            v: Some(vec![0.0, 0.1, 0.0]),
            rho: vec![1.0, 1.0, 1.0],
            s: vec![1.0 / 1.4; 3],
        };
        match inlet_discretize(&bad, &duct, 3, &g) {
            Err(Error::ProfileViolation { clause, .. }) => assert_eq!(clause, "A2"),
            other => panic!("expected A2 violation, got {other:?}"),
        }

        // uneven profile rejected as A3
        let uneven = InletProfile::Table {
            y: vec![-1.0, 0.0, 1.0],
            u: vec![2.0, 2.1, 2.2],
            v: None,
            rho: vec![1.0, 1.0, 1.0],
            s: vec![1.0 / 1.4; 3],
        };
        match inlet_discretize(&uneven, &duct, 3, &g) {
            Err(Error::ProfileViolation { clause, .. }) => assert_eq!(clause, "A3"),
            other => panic!("expected A3 violation, got {other:?}"),
        }

        // non-constant pressure rejected as A2
        let badp = InletProfile::Table {
            y: vec![-1.0, 0.0, 1.0],
            u: vec![2.0, 2.0, 2.0],
            v: None,
            rho: vec![1.0, 1.01, 1.0],
            s: vec![1.0 / 1.4; 3],
        };
        match inlet_discretize(&badp, &duct, 3, &g) {
            Err(Error::ProfileViolation { clause, .. }) => assert_eq!(clause, "A2"),
            other => panic!("expected A2 violation, got {other:?}"),
        }
    }

    #[test]
    fn inlet_perturbed_delta1_odd() {
        let g = g14();
        let duct = DuctGeometry::hyperbolic_wall(1.0, 0.05, 1.0, 30.0).unwrap();
        let profile = InletProfile::Perturbed {
            u0: 2.0,
            rho0: 1.0,
            s0: 1.0 / 1.4,
            eps: 0.01,
            shape: PerturbShape::CosU,
        };
        let front = inlet_discretize(&profile, &duct, 9, &g).unwrap();
        let d1: Vec<f64> = front.nodes().iter().map(|n| n.transported.omega_over_rho).collect();
        // odd in y, delta2 identically zero for the u-only shape
        for i in 0..9 {
            assert!((d1[i] + d1[8 - i]).abs() < 1e-12);
            assert_eq!(front.node(i).transported.delta2, 0.0);
        }
        // finite-difference cross-check of u'/rho at an interior node
        let y = front.node(2).y;
        let h = 1e-6;
        let w = std::f64::consts::FRAC_PI_2;
        let u = |yy: f64| 2.0 * (1.0 + 0.01 * (w * yy).cos());
        let fd = (u(y + h) - u(y - h)) / (2.0 * h);
        assert!((d1[2] - fd).abs() < 1e-8);

        // entropy-perturbed shape carries nonzero delta2, odd in y
        let profile = InletProfile::Perturbed {
            u0: 2.0,
            rho0: 1.0,
            s0: 1.0 / 1.4,
            eps: 0.01,
            shape: PerturbShape::CosRho,
        };
        let front = inlet_discretize(&profile, &duct, 9, &g).unwrap();
        let mid = front.node(4).transported.delta2;
        assert!(mid.abs() < 1e-15);
        assert!(front.node(2).transported.delta2 != 0.0);
        assert!((front.node(2).transported.delta2 + front.node(6).transported.delta2).abs() < 1e-14);
        // p is constant by construction
        for n in front.nodes() {
            let p = n.state.s * n.state.rho.powf(1.4);
            assert!((p - (1.0 / 1.4)).abs() < 1e-12);
        }
    }
}

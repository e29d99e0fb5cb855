//! Global construction: laminar region, slip-boundary wall regions,
//! Goursat interaction regions, iterated reflections, termination and
//! vacuum interfaces.
//!
//! Region sequence: Sigma0 -> (Sigma0-, Sigma0+) -> Sigma1 -> ... where the
//! lower wall region marches C+ fronts between its incoming C+ data
//! characteristic and the wall, the upper one mirrors it, and each Goursat
//! region fills the index rectangle spanned by the two terminal cross
//! characteristics through the interaction point.

use crate::error::{Error, Result};
use crate::gas::GasConstants;
use crate::geometry::{DuctGeometry, WallSide};
use crate::kernel::{
    self, CharNode, Front, InletProfile, NodeKind, SolverConfig, VacuumInterface,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Laminar,
    WallLower,
    WallUpper,
    Goursat,
}

impl RegionKind {
    pub fn label(&self) -> &'static str {
        match self {
            RegionKind::Laminar => "laminar",
            RegionKind::WallLower => "wall_lower",
            RegionKind::WallUpper => "wall_upper",
            RegionKind::Goursat => "goursat",
        }
    }
}

/// Why a region stopped producing nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Closed normally (terminal characteristic reached the wall or corner).
    Closed,
    /// Reached the x_max truncation of the duct.
    XMax,
    /// A vacuum interface cut the sweep.
    Vacuum,
    /// The characteristic lattice degenerated (crossing angle below guard).
    Degenerate,
}

/// Structured node collection. Rows are fronts (wall and laminar regions)
/// or C+ index lines (Goursat); cells can be missing near truncations.
#[derive(Debug, Clone, Default)]
pub struct CharMesh {
    pub rows: Vec<Vec<Option<CharNode>>>,
}

impl CharMesh {
    pub fn push_row(&mut self, row: Vec<Option<CharNode>>) {
        self.rows.push(row);
    }

    pub fn iter_nodes(&self) -> impl Iterator<Item = (usize, usize, &CharNode)> {
        self.rows.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter_map(move |(j, n)| n.as_ref().map(|n| (i, j, n)))
        })
    }

    pub fn node_count(&self) -> usize {
        self.rows.iter().map(|r| r.iter().filter(|n| n.is_some()).count()).sum()
    }
}

#[derive(Debug, Clone)]
pub struct Region {
    pub id: usize,
    pub kind: RegionKind,
    pub mesh: CharMesh,
    /// Data boundary shared bit-exactly with the upstream region.
    pub incoming: Vec<CharNode>,
    /// Second data boundary (Goursat regions only).
    pub incoming_second: Vec<CharNode>,
    /// For wall regions: the exact (possibly subdivided) data row that fed
    /// each mesh row, so cross-family stencils stay exact under
    /// subdivision. Empty for other kinds.
    pub parent_rows: Vec<Vec<CharNode>>,
    pub junctions: Vec<(String, [f64; 2])>,
    pub vacuum: Option<VacuumInterface>,
    pub truncation: Truncation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Outgoing characteristics of a Goursat region never cross (finite
    /// cover with two final infinite wall strips).
    NonCrossing,
    /// A cross characteristic failed to reach its wall before x_max.
    OpenWallStrips,
    /// Vacuum interfaces truncated both wall families.
    VacuumDominated,
    /// The marching reached the configured x_max.
    XMaxReached,
    /// Region cap reached before any other termination case.
    MaxRegions,
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::NonCrossing => "non_crossing_characteristics",
            Termination::OpenWallStrips => "open_wall_strips",
            Termination::VacuumDominated => "vacuum_dominated",
            Termination::XMaxReached => "x_max_reached",
            Termination::MaxRegions => "max_regions_reached",
        }
    }
}

/// Ordered list of solved regions plus junctions, interfaces and the
/// termination record.
#[derive(Debug, Clone)]
pub struct Solution {
    pub gas: GasConstants,
    pub cfg: SolverConfig,
    pub regions: Vec<Region>,
    pub junctions: Vec<(String, [f64; 2])>,
    pub vacuum_interfaces: Vec<VacuumInterface>,
    pub termination: Termination,
    /// Whether the first cross characteristic reached the wall (case (i)).
    pub case_one: bool,
    pub inlet: Front,
}

impl Solution {
    pub fn junction(&self, name: &str) -> Option<[f64; 2]> {
        self.junctions.iter().find(|(n, _)| n == name).map(|(_, p)| *p)
    }

    pub fn node_count(&self) -> usize {
        self.regions.iter().map(|r| r.mesh.node_count()).sum()
    }
}

// ---------------------------------------------------------------------------
// Laminar region

pub struct InitialRegion {
    pub region: Region,
    pub p: CharNode,
    /// C+ characteristic from B = (0, -f(0)) to P, ordered wall to axis.
    pub bp: Front,
    /// C- characteristic from D = (0, f(0)) to P, ordered wall to axis.
    pub dp: Front,
}

/// March the inlet data through its determinate triangle. The left edge of
/// the shrinking fronts is the C+ characteristic from B, the right edge the
/// C- characteristic from D, and the last node is P on the axis.
pub fn solve_initial_region(
    inlet: &Front,
    duct: &DuctGeometry,
    g: &GasConstants,
    cfg: &SolverConfig,
    id: usize,
) -> Result<InitialRegion> {
    let mut mesh = CharMesh::default();
    let mut bp = vec![*inlet.first()];
    let mut dp = vec![*inlet.last()];
    let mut prev: Vec<CharNode> = inlet.nodes().to_vec();
    while prev.len() > 1 {
        let mut row = Vec::with_capacity(prev.len() - 1);
        for j in 0..prev.len() - 1 {
            let td = kernel::TransportData { curve: &prev, hint: j };
            let mut n = kernel::interior_point_on(&prev[j], &prev[j + 1], Some(td), g, cfg)?;
            if n.x > cfg.x_max {
                return Err(Error::NoIntersection(format!(
                    "inlet characteristics do not close before x_max = {} (reached x = {})",
                    cfg.x_max, n.x
                )));
            }
            if n.y.abs() < 1e-12 * duct.f(0.0) {
                n.kind = NodeKind::Axis;
            }
            row.push(n);
        }
        bp.push(row[0]);
        dp.push(*row.last().unwrap());
        mesh.push_row(row.iter().copied().map(Some).collect());
        prev = row;
    }
    let p = prev[0];
    let region = Region {
        id,
        kind: RegionKind::Laminar,
        mesh,
        incoming: inlet.nodes().to_vec(),
        incoming_second: Vec::new(),
        parent_rows: Vec::new(),
        junctions: vec![("P".into(), p.pos())],
        vacuum: None,
        truncation: Truncation::Closed,
    };
    Ok(InitialRegion { region, p, bp: Front::new(bp)?, dp: Front::new(dp)? })
}

// ---------------------------------------------------------------------------
// Wall regions

pub struct WallRegionResult {
    pub region: Region,
    /// Terminal cross characteristic (P_i ... B_i), present when the sweep
    /// closed at the wall.
    pub terminal: Option<Front>,
    pub vacuum: Option<VacuumInterface>,
    pub truncation: Truncation,
}

/// Solve a slip-boundary region between `incoming` (a C+ data characteristic
/// for the lower wall, C- for the upper, ordered from its wall anchor to the
/// far corner) and the wall.
pub fn solve_wall_region(
    incoming: &Front,
    duct: &DuctGeometry,
    side: WallSide,
    g: &GasConstants,
    cfg: &SolverConfig,
    id: usize,
) -> Result<WallRegionResult> {
    let kind = match side {
        WallSide::Lower => RegionKind::WallLower,
        WallSide::Upper => RegionKind::WallUpper,
    };
    let mut mesh = CharMesh::default();
    let mut terminal: Vec<CharNode> = vec![*incoming.last()];
    let mut terminal_clean = true;
    let mut prev: Vec<CharNode> = incoming.nodes().to_vec();
    let mut truncation = Truncation::Closed;
    let mut vacuum = None;
    let mut parent_rows: Vec<Vec<CharNode>> = Vec::new();
    // (x, sigma, c) of every accepted wall node, for onset extrapolation
    let mut wall_history: Vec<(f64, f64, f64)> = Vec::new();

    enum WallStep {
        Node(CharNode),
        Vacuum,
        NoHit,
    }

    // wall step with adaptive subdivision: while the slip angle would jump
    // by more than max_wall_turn in one step, insert an interpolated
    // sub-node on the leading segment of the incoming front
    let wall_step = |prev: &mut Vec<CharNode>| -> Result<WallStep> {
        let mut inserted = 0usize;
        let insert_mid = |prev: &mut Vec<CharNode>| -> bool {
            let Ok(fr) = Front::new(prev.clone()) else { return false };
            let seg = fr.arclen_at(1) - fr.arclen_at(0);
            if seg < 1e-9 * (1.0 + fr.total_arclen()) {
                return false;
            }
            let t = 0.5 * (fr.arclen_at(0) + fr.arclen_at(1));
            match fr.sample(t, g) {
                Ok(mid) => {
                    prev.insert(1, mid);
                    true
                }
                Err(_) => false,
            }
        };
        loop {
            let budget = inserted < 8 * cfg.max_refinements;
            let landing = match kernel::wall_point(&prev[1], &prev[0], duct, side, g, cfg) {
                Ok(w) => (w.x, Some(w)),
                Err(Error::VacuumReached { x, .. }) => (x, None),
                Err(Error::DegenerateCrossing { .. }) => return Ok(WallStep::Vacuum),
                Err(Error::NoWallHit(_)) => {
                    // a chord step too coarse to land looks the same as a
                    // genuinely escaping characteristic; refine first
                    if budget && insert_mid(prev) {
                        inserted += 1;
                        continue;
                    }
                    return Ok(WallStep::NoHit);
                }
                Err(e) => return Err(e),
            };
            let (x_land, node) = landing;
            let turn = (duct.slip_angle(x_land, side) - duct.slip_angle(prev[0].x, side)).abs();
            if turn > cfg.max_wall_turn && budget && insert_mid(prev) {
                inserted += 1;
                continue;
            }
            return Ok(match node {
                Some(w) => WallStep::Node(w),
                None => WallStep::Vacuum,
            });
        }
    };

    'sweep: while prev.len() > 1 {
        match wall_step(&mut prev)? {
            WallStep::Node(w) if w.x > cfg.x_max => {
                truncation = Truncation::XMax;
                break 'sweep;
            }
            WallStep::Node(w) => {
                // rows run to the end of the data even past x_max; the
                // domain truncation is applied at export, and the far tail
                // keeps feeding characteristic parents to later fronts
                let mut row = vec![w];
                let mut clean = true;
                for j in 2..prev.len() {
                    let parent_new = *row.last().unwrap();
                    let td = kernel::TransportData { curve: &prev, hint: j - 1 };
                    let step = match side {
                        WallSide::Lower => {
                            kernel::interior_point_on(&parent_new, &prev[j], Some(td), g, cfg)
                        }
                        WallSide::Upper => {
                            kernel::interior_point_on(&prev[j], &parent_new, Some(td), g, cfg)
                        }
                    };
                    match step {
                        Ok(n) => row.push(n),
                        // near the vacuum interface the chord lattice wedges
                        // out; keep marching the wall with a truncated row
                        Err(Error::DegenerateCrossing { .. })
                        | Err(Error::VacuumReached { .. })
                        | Err(Error::NoIntersection(_))
                        | Err(Error::CorrectorDiverged { .. }) => {
                            clean = false;
                            break;
                        }
                        Err(e) => return Err(e),
                    }
                }
                if clean {
                    terminal.push(*row.last().unwrap());
                    // only wall nodes of fully resolved fronts enter the
                    // onset extrapolation; the wedged-out tail is biased
                    wall_history.push((w.x, w.derived.sigma, w.derived.c));
                } else {
                    terminal_clean = false;
                }
                // consumed prev[1..=row.len()]; cut tails keep feeding the
                // wall march
                let tail: Vec<CharNode> = prev.iter().skip(row.len() + 1).copied().collect();
                parent_rows.push(prev.clone());
                mesh.push_row(row.iter().copied().map(Some).collect());
                if mesh.rows.len() > 200_000 {
                    return Err(Error::RegionOpen(
                        "wall sweep exceeded the row budget".into(),
                    ));
                }
                prev = row;
                prev.extend(tail);
            }
            WallStep::Vacuum | WallStep::NoHit => {
                // the march stalled: either the gas ran out of turning
                // capacity (vacuum onset) or the characteristic escaped a
                // still-gas wall; bisect for extra near-stall wall nodes,
                // then decide by extrapolating the wall's sigma(c) relation
                // to c = 0
                let onset = localize_vacuum_onset(&prev, duct, side, g, cfg)?;
                let wall_fit = if wall_history.len() >= 3 {
                    wall_history.clone()
                } else {
                    let mut v = wall_history.clone();
                    v.extend(onset.probes.iter().map(|w| (w.x, w.derived.sigma, w.derived.c)));
                    v
                };
                match classify_onset(&wall_fit, duct, side, cfg) {
                    Some(x_v) => {
                        vacuum = Some(kernel::interface_at(duct, x_v, side));
                        if let Some(row) = onset.closing {
                            mesh.push_row(row.iter().copied().map(Some).collect());
                        }
                        truncation = Truncation::Vacuum;
                    }
                    None => {
                        truncation = Truncation::XMax;
                    }
                }
                break 'sweep;
            }
        }
    }

    if truncation == Truncation::Closed && !terminal_clean {
        truncation = Truncation::Degenerate;
    }
    let closed = truncation == Truncation::Closed && terminal_clean;
    let terminal_front = if closed && terminal.len() >= 2 {
        Some(Front::new(terminal)?)
    } else {
        None
    };
    let mut junctions = Vec::new();
    if let Some(t) = &terminal_front {
        let name = match side {
            WallSide::Lower => "B",
            WallSide::Upper => "D",
        };
        junctions.push((name.to_string(), t.last().pos()));
    }
    // keep parent rows aligned with mesh rows (onset rows carry no parents)
    while parent_rows.len() < mesh.rows.len() {
        parent_rows.push(Vec::new());
    }
    Ok(WallRegionResult {
        region: Region {
            id,
            kind,
            mesh,
            incoming: incoming.nodes().to_vec(),
            incoming_second: Vec::new(),
            parent_rows,
            junctions,
            vacuum,
            truncation,
        },
        terminal: terminal_front,
        vacuum,
        truncation,
    })
}

struct VacuumOnset {
    closing: Option<Vec<CharNode>>,
    /// Wall nodes resolved while bracketing the stall.
    probes: Vec<CharNode>,
}

/// Decide whether a stalled wall march is a vacuum onset and, if so, where
/// the interface anchors. The wall slip angle is extrapolated to c = 0 on
/// the near-onset wall nodes (sigma is linear in c there up to O(c^3));
/// genuine vacuum means the wall actually attains that angle at finite x.
fn classify_onset(
    wall_history: &[(f64, f64, f64)],
    duct: &DuctGeometry,
    side: WallSide,
    cfg: &SolverConfig,
) -> Option<f64> {
    // smallest-c nodes carry the onset information
    let mut pts = wall_history.to_vec();
    pts.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    pts.truncate(16);
    if pts.len() < 3 {
        return None;
    }
    // least squares |sigma| = a + b c
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.2).sum();
    let sy: f64 = pts.iter().map(|p| p.1.abs()).sum();
    let sxx: f64 = pts.iter().map(|p| p.2 * p.2).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * p.1.abs()).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    let b = (n * sxy - sx * sy) / denom;
    let a = (sy - b * sx) / n;
    let sigma_v = a; // |slip| at vacuum
    if !(sigma_v > 0.0) || b >= 0.0 {
        return None;
    }
    // does the wall reach that slip angle before the truncated domain end?
    let x_hi = cfg.x_max + duct.f(0.0);
    if duct.slip_angle(x_hi, side).abs() <= sigma_v {
        return None;
    }
    let x_anchor = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).min(cfg.x_max);
    let mut lo = (0.5 * x_anchor).max(0.0);
    if duct.slip_angle(lo, side).abs() >= sigma_v {
        lo = 0.0;
    }
    let mut hi = x_hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if duct.slip_angle(mid, side).abs() < sigma_v {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * (1.0 + hi) {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Bisect on the incoming-front parameter between the last good wall node
/// and the first failing probe until the onset is bracketed to roundoff
/// scale, then place the interface at the secant crossing of c_vac and
/// build the closing front from the last good probe.
fn localize_vacuum_onset(
    prev: &[CharNode],
    duct: &DuctGeometry,
    side: WallSide,
    g: &GasConstants,
    cfg: &SolverConfig,
) -> Result<VacuumOnset> {
    let front = Front::new(prev.to_vec())?;
    let t0 = front.arclen_at(0);
    let mut t_hi = front.arclen_at(1);
    let mut lo_info: Option<(f64, CharNode)> = None; // (t, wall node)
    let mut hi_c = 0.0f64;
    let mut hi_x = f64::NAN;
    let probe = |t: f64| -> Result<std::result::Result<CharNode, (f64, f64)>> {
        let node = match front.sample(t, g) {
            Ok(n) => n,
            Err(Error::VacuumReached { x, c }) => return Ok(Err((x, c))),
            Err(e) => return Err(e),
        };
        match kernel::wall_point(&node, &prev[0], duct, side, g, cfg) {
            Ok(w) => {
                if w.derived.c < cfg.c_vac {
                    Ok(Err((w.x, w.derived.c)))
                } else {
                    Ok(Ok(w))
                }
            }
            Err(Error::VacuumReached { x, c }) => Ok(Err((x, c))),
            Err(Error::DegenerateCrossing { .. })
            | Err(Error::NoWallHit(_))
            | Err(Error::CorrectorDiverged { .. }) => Ok(Err((f64::NAN, 0.0))),
            Err(e) => Err(e),
        }
    };
    let mut t_lo = t0;
    let mut probes: Vec<CharNode> = Vec::new();
    for _ in 0..cfg.max_refinements.max(8) {
        let t_mid = 0.5 * (t_lo + t_hi);
        match probe(t_mid)? {
            Ok(w) => {
                t_lo = t_mid;
                probes.push(w);
                lo_info = Some((t_mid, w));
            }
            Err((x, c)) => {
                t_hi = t_mid;
                if x.is_finite() {
                    hi_x = x;
                    hi_c = c;
                }
            }
        }
        if t_hi - t_lo < 1e-12 * (1.0 + front.total_arclen()) {
            break;
        }
    }
    let _ = (hi_x, hi_c);
    Ok(match lo_info {
        Some((_, w)) => {
            // closing front along the last resolved C+ (C- above) direction
            let mut row = vec![w];
            for j in 1..prev.len() {
                let parent_new = *row.last().unwrap();
                let step = match side {
                    WallSide::Lower => kernel::interior_point(&parent_new, &prev[j], g, cfg),
                    WallSide::Upper => kernel::interior_point(&prev[j], &parent_new, g, cfg),
                };
                match step {
                    Ok(n) if n.x > w.x + 2.0 * duct.f(0.0) => break,
                    Ok(n) => row.push(n),
                    Err(_) => break,
                }
            }
            VacuumOnset { closing: Some(row), probes }
        }
        None => VacuumOnset { closing: None, probes },
    })
}

// ---------------------------------------------------------------------------
// Goursat regions

pub struct GoursatResult {
    pub region: Region,
    /// Corner node P_{i+1} when the rectangle closed.
    pub corner: Option<CharNode>,
    /// C+ characteristic from the lower junction (B_i ... P_{i+1}).
    pub out_plus: Option<Front>,
    /// C- characteristic from the upper junction (D_i ... P_{i+1}).
    pub out_minus: Option<Front>,
    /// Filled prefixes of the outgoing boundaries when the corner is open;
    /// these seed the final infinite wall strips.
    pub partial_plus: Option<Front>,
    pub partial_minus: Option<Front>,
    /// True when the outgoing characteristics were positively identified
    /// as non-crossing (monotone gap growth over the guard horizon).
    pub non_crossing: bool,
}

/// Solve the Goursat problem with data on two cross characteristics that
/// share their corner bit-exactly: `minus` is the C- data curve (P ... B_i),
/// `plus` the C+ data curve (P ... D_i).
pub fn solve_goursat(
    minus: &Front,
    plus: &Front,
    g: &GasConstants,
    cfg: &SolverConfig,
    id: usize,
) -> Result<GoursatResult> {
    let pm = minus.first();
    let pp = plus.first();
    if pm.x != pp.x || pm.y != pp.y {
        return Err(Error::InvalidParameter(format!(
            "Goursat data curves do not share their corner: ({}, {}) vs ({}, {})",
            pm.x, pm.y, pp.x, pp.y
        )));
    }
    let m = minus.len();
    let k = plus.len();
    // cells[i][j]; row i follows the C+ line from minus node i
    let mut cells: Vec<Vec<Option<CharNode>>> = vec![vec![None; k]; m];
    for i in 0..m {
        cells[i][0] = Some(*minus.node(i));
    }
    for j in 0..k {
        cells[0][j] = Some(*plus.node(j));
    }
    let mut clean = true;
    for d in 2..(m + k - 1) {
        // data curve for streamline transport: the previous anti-diagonal,
        // ordered from the minus side upward
        let mut diag: Vec<CharNode> = Vec::new();
        let mut diag_pos: Vec<Option<usize>> = vec![None; m];
        for i in (0..m).rev() {
            let j = (d - 1) as isize - i as isize;
            if j < 0 || j as usize >= k {
                continue;
            }
            if let Some(n) = cells[i][j as usize] {
                diag_pos[i] = Some(diag.len());
                diag.push(n);
            }
        }
        for i in 1..m {
            let j = d as isize - i as isize;
            if j < 1 || j as usize >= k {
                continue;
            }
            let j = j as usize;
            let (l, r) = match (&cells[i][j - 1], &cells[i - 1][j]) {
                (Some(l), Some(r)) => (*l, *r),
                _ => {
                    clean = false;
                    continue;
                }
            };
            let td = diag_pos[i].map(|p| kernel::TransportData { curve: &diag, hint: p });
            match kernel::interior_point_on(&l, &r, td, g, cfg) {
                Ok(n) if n.x > cfg.x_max => clean = false,
                Ok(mut n) => {
                    if n.y.abs() < 1e-12 {
                        n.kind = NodeKind::Axis;
                    }
                    cells[i][j] = Some(n);
                }
                Err(Error::DegenerateCrossing { .. })
                | Err(Error::VacuumReached { .. })
                | Err(Error::NoIntersection(_))
                | Err(Error::CorrectorDiverged { .. }) => clean = false,
                Err(e) => return Err(e),
            }
        }
    }

    let corner = cells[m - 1][k - 1];
    // boundary rows: contiguous filled prefix along each outgoing family
    let plus_prefix: Vec<CharNode> = (0..k)
        .map(|j| cells[m - 1][j])
        .take_while(|c| c.is_some())
        .flatten()
        .collect();
    let minus_prefix: Vec<CharNode> = (0..m)
        .map(|i| cells[i][k - 1])
        .take_while(|c| c.is_some())
        .flatten()
        .collect();
    let (out_plus, out_minus, partial_plus, partial_minus) = if corner.is_some() {
        (
            Some(Front::new(plus_prefix)?),
            Some(Front::new(minus_prefix)?),
            None,
            None,
        )
    } else {
        (
            None,
            None,
            (plus_prefix.len() >= 2).then(|| Front::new(plus_prefix)).transpose()?,
            (minus_prefix.len() >= 2).then(|| Front::new(minus_prefix)).transpose()?,
        )
    };

    // non-crossing test: vertical gap between the partial outgoing
    // boundaries grows monotonically over the guard horizon
    let non_crossing = match (&partial_plus, &partial_minus) {
        (Some(lo), Some(up)) => {
            let lower: Vec<[f64; 2]> = lo.nodes().iter().map(|n| n.pos()).collect();
            let upper: Vec<[f64; 2]> = up.nodes().iter().map(|n| n.pos()).collect();
            diverging_gap(&lower, &upper, cfg.guard_dx)
        }
        _ => false,
    };

    let mut junctions = Vec::new();
    if let Some(c) = &corner {
        junctions.push(("P".to_string(), c.pos()));
    }
    // the data curves belong to the upstream regions; the mesh owns only
    // the newly computed cells (i >= 1, j >= 1)
    let rows: Vec<Vec<Option<CharNode>>> = cells
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, c)| if i == 0 || j == 0 { None } else { *c })
                .collect()
        })
        .collect();
    Ok(GoursatResult {
        region: Region {
            id,
            kind: RegionKind::Goursat,
            mesh: CharMesh { rows },
            incoming: minus.nodes().to_vec(),
            incoming_second: plus.nodes().to_vec(),
            parent_rows: Vec::new(),
            junctions,
            vacuum: None,
            truncation: if clean { Truncation::Closed } else { Truncation::XMax },
        },
        corner,
        out_plus,
        out_minus,
        partial_plus,
        partial_minus,
        non_crossing,
    })
}

fn diverging_gap(lower: &[[f64; 2]], upper: &[[f64; 2]], horizon: f64) -> bool {
    if lower.len() < 3 || upper.len() < 3 {
        return false;
    }
    let y_at = |poly: &[[f64; 2]], x: f64| -> Option<f64> {
        for w in poly.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a[0] <= x && x <= b[0]) || (b[0] <= x && x <= a[0]) {
                let t = if (b[0] - a[0]).abs() < 1e-300 { 0.0 } else { (x - a[0]) / (b[0] - a[0]) };
                return Some(a[1] + t * (b[1] - a[1]));
            }
        }
        None
    };
    let x0 = lower[0][0].max(upper[0][0]);
    let x1 = lower.last().unwrap()[0].min(upper.last().unwrap()[0]);
    // certify only when monotone growth is observed over the full horizon
    if x1 - x0 < horizon {
        return false;
    }
    let mut prev_gap = f64::NEG_INFINITY;
    let samples = 32;
    for i in 0..=samples {
        let x = x0 + horizon * i as f64 / samples as f64;
        match (y_at(lower, x), y_at(upper, x)) {
            (Some(yl), Some(yu)) => {
                let gap = yu - yl;
                if gap <= prev_gap {
                    return false;
                }
                prev_gap = gap;
            }
            _ => return false,
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Orchestration

/// Run the full construction. Validation errors and case (ii) surface as
/// errors; numerical truncations terminate the region list normally.
pub fn orchestrate(
    profile: &InletProfile,
    duct: &DuctGeometry,
    g: &GasConstants,
    cfg: &SolverConfig,
) -> Result<Solution> {
    let inlet = kernel::inlet_discretize(profile, duct, cfg.inlet_nodes, g)?;
    let mut regions = Vec::new();
    let mut junctions = Vec::new();
    let mut interfaces = Vec::new();

    let init = solve_initial_region(&inlet, duct, g, cfg, 0)?;
    junctions.push(("P".to_string(), init.p.pos()));
    regions.push(init.region);

    let mut lower_data = Some(init.bp);
    let mut upper_data = Some(init.dp);
    let mut reflection = 0usize;
    let mut termination = None;
    let mut case_one = true;

    while termination.is_none() {
        if regions.len() + 3 > cfg.max_regions {
            termination = Some(Termination::MaxRegions);
            break;
        }
        // wall regions on both sides
        let lower = match lower_data.take() {
            Some(front) => {
                let res = solve_wall_region(&front, duct, WallSide::Lower, g, cfg, regions.len())?;
                if let Some((name, pos)) = res.region.junctions.first().cloned() {
                    junctions.push((format!("{name}{reflection}"), pos));
                }
                if let Some(v) = res.vacuum {
                    interfaces.push(v);
                }
                regions.push(res.region.clone());
                Some(res)
            }
            None => None,
        };
        let upper = match upper_data.take() {
            Some(front) => {
                let res = solve_wall_region(&front, duct, WallSide::Upper, g, cfg, regions.len())?;
                if let Some((name, pos)) = res.region.junctions.first().cloned() {
                    junctions.push((format!("{name}{reflection}"), pos));
                }
                if let Some(v) = res.vacuum {
                    interfaces.push(v);
                }
                regions.push(res.region.clone());
                Some(res)
            }
            None => None,
        };

        let lower_term = lower.as_ref().and_then(|r| r.terminal.clone());
        let upper_term = upper.as_ref().and_then(|r| r.terminal.clone());
        let lower_trunc = lower.as_ref().map(|r| r.truncation);
        let upper_trunc = upper.as_ref().map(|r| r.truncation);

        match (lower_term, upper_term) {
            (Some(tm), Some(tp)) => {
                let gr = solve_goursat(&tm, &tp, g, cfg, regions.len())?;
                if let Some(c) = gr.corner {
                    junctions.push((format!("P{}", reflection + 1), c.pos()));
                }
                let GoursatResult {
                    region,
                    corner,
                    out_plus,
                    out_minus,
                    partial_plus,
                    partial_minus,
                    non_crossing,
                } = gr;
                regions.push(region);
                if corner.is_some() {
                    lower_data = out_plus;
                    upper_data = out_minus;
                    reflection += 1;
                } else if non_crossing {
                    // two final infinite wall strips along the partial
                    // outgoing characteristics
                    if let Some(front) = partial_plus {
                        let res =
                            solve_wall_region(&front, duct, WallSide::Lower, g, cfg, regions.len())?;
                        regions.push(res.region);
                    }
                    if let Some(front) = partial_minus {
                        let res =
                            solve_wall_region(&front, duct, WallSide::Upper, g, cfg, regions.len())?;
                        regions.push(res.region);
                    }
                    termination = Some(Termination::NonCrossing);
                } else {
                    termination = Some(Termination::XMaxReached);
                }
            }
            _ => {
                let vacuum_l = lower_trunc == Some(Truncation::Vacuum);
                let vacuum_u = upper_trunc == Some(Truncation::Vacuum);
                if vacuum_l || vacuum_u {
                    // with (A3)-symmetric data both sides truncate together
                    termination = Some(Termination::VacuumDominated);
                } else if reflection == 0 {
                    // the first cross characteristic never reached the wall
                    case_one = false;
                    termination = Some(Termination::OpenWallStrips);
                } else {
                    termination = Some(Termination::OpenWallStrips);
                }
            }
        }
    }

    if !case_one {
        return Err(Error::CaseTwoDetected);
    }

    Ok(Solution {
        gas: *g,
        cfg: *cfg,
        regions,
        junctions,
        vacuum_interfaces: interfaces,
        termination: termination.unwrap_or(Termination::XMaxReached),
        case_one,
        inlet,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::FlowState;

    fn g14() -> GasConstants {
        GasConstants::new(1.4).unwrap()
    }

    #[test]
    fn initial_region_uniform_mach2() {
        let g = g14();
        let cfg = SolverConfig { inlet_nodes: 9, x_max: 10.0, ..Default::default() };
        let duct = DuctGeometry::hyperbolic_wall(1.0, 0.05, 1.0, 10.0).unwrap();
        let profile = InletProfile::Uniform { u0: 2.0, rho0: 1.0, s0: 1.0 / 1.4 };
        let inlet = kernel::inlet_discretize(&profile, &duct, 9, &g).unwrap();
        let init = solve_initial_region(&inlet, &duct, &g, &cfg, 0).unwrap();
        assert!((init.p.x - 3.0f64.sqrt()).abs() < 1e-10);
        assert!(init.p.y.abs() < 1e-12);
        assert_eq!(init.bp.len(), 9);
        assert_eq!(init.dp.len(), 9);
        // edges are straight at +-30 degrees for uniform flow
        for (i, n) in init.bp.nodes().iter().enumerate() {
            let frac = i as f64 / 8.0;
            assert!((n.y - (-1.0 + frac)).abs() < 1e-10);
            assert!((n.x - frac * 3.0f64.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn initial_region_uniform_mach10() {
        let g = g14();
        let cfg = SolverConfig { inlet_nodes: 9, x_max: 20.0, ..Default::default() };
        let duct = DuctGeometry::hyperbolic_wall(1.0, 0.7, 1.0, 20.0).unwrap();
        let profile = InletProfile::Uniform { u0: 10.0, rho0: 1.0, s0: 1.0 / 1.4 };
        let inlet = kernel::inlet_discretize(&profile, &duct, 9, &g).unwrap();
        let init = solve_initial_region(&inlet, &duct, &g, &cfg, 0).unwrap();
        assert!((init.p.x - 99.0f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn initial_region_perturbed_close_to_uniform() {
        let g = g14();
        let cfg = SolverConfig { inlet_nodes: 17, x_max: 10.0, ..Default::default() };
        let duct = DuctGeometry::hyperbolic_wall(1.0, 0.05, 1.0, 10.0).unwrap();
        let profile = InletProfile::Perturbed {
            u0: 2.0,
            rho0: 1.0,
            s0: 1.0 / 1.4,
            eps: 0.01,
            shape: kernel::PerturbShape::CosU,
        };
        let inlet = kernel::inlet_discretize(&profile, &duct, 17, &g).unwrap();
        let init = solve_initial_region(&inlet, &duct, &g, &cfg, 0).unwrap();
        assert!((init.p.x - 3.0f64.sqrt()).abs() < 0.05, "P moved O(eps): {}", init.p.x);
        assert!(init.p.y.abs() < 1e-10);
    }

    #[test]
    fn goursat_uniform_rectangle() {
        let g = g14();
        let cfg = SolverConfig::default();
        let st = FlowState::new(2.0, 0.0, 1.0, 1.0 / 1.4);
        let d = crate::gas::derive(&st, &g).unwrap();
        let tr = kernel::Transported { s: st.s, e_hat: d.e_hat, omega_over_rho: 0.0, delta2: 0.0 };
        let mk = |x: f64, y: f64| CharNode { x, y, state: st, derived: d, transported: tr, kind: NodeKind::Interior };
        // corner at origin; C- data descending, C+ data ascending
        let lm = (0..5).map(|i| {
            let t = i as f64 * 0.1;
            mk(t * d.beta.cos().abs(), -t * d.beta.sin().abs())
        });
        let minus = Front::new(lm.collect()).unwrap();
        let lp = (0..4).map(|j| {
            let t = j as f64 * 0.1;
            mk(t * d.alpha.cos(), t * d.alpha.sin())
        });
        let plus = Front::new(lp.collect()).unwrap();
        let res = solve_goursat(&minus, &plus, &g, &cfg, 1).unwrap();
        let corner = res.corner.expect("uniform rectangle closes");
        assert!((corner.state.u - 2.0).abs() < 1e-12);
        // straight-line intersection of the boundary characteristics
        let b = minus.last();
        let dd = plus.last();
        let t = (dd.y - b.y - (dd.x - b.x) * d.beta.tan()) / (d.alpha.tan() - d.beta.tan());
        let px = b.x + t * 1.0;
        assert!((corner.x - px).abs() < 1e-9);
        assert!(res.out_plus.is_some() && res.out_minus.is_some());
        // corner mismatch rejected
        let shifted: Vec<CharNode> = plus.nodes().iter().map(|n| { let mut m = *n; m.x += 1e-3; m }).collect();
        assert!(solve_goursat(&minus, &Front::new(shifted).unwrap(), &g, &cfg, 1).is_err());
    }
}

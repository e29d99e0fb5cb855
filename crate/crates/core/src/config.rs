//! Run configuration: a flat, human-editable key = value text format.
//! Analytic duct and inflow families are selected by id plus parameters;
//! no embedded expressions.

use crate::error::{Error, Result};
use crate::gas::GasConstants;
use crate::geometry::DuctGeometry;
use crate::kernel::{InletProfile, PerturbShape, SolverConfig};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub enum InflowConfig {
    Uniform { u0: f64, rho0: f64, s0: f64 },
    Perturbed { u0: f64, rho0: f64, s0: f64, eps: f64, shape: PerturbShape },
    Table { path: PathBuf },
}

#[derive(Debug, Clone)]
pub enum DuctConfig {
    Hyperbolic { f0: f64, k: f64, length_scale: f64 },
    Table { path: PathBuf },
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub nodes: bool,
    pub regions: bool,
    pub diagnostics: bool,
    pub svg: bool,
    pub svg_streamlines: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub gamma: f64,
    pub inflow: InflowConfig,
    pub duct: DuctConfig,
    pub inlet_nodes: usize,
    pub x_max: f64,
    /// Vacuum cutoff as a fraction of the inlet centerline sound speed.
    pub c_vac_rel: f64,
    pub corrector_tol: f64,
    pub max_iters: usize,
    pub max_regions: usize,
    /// Non-crossing guard horizon; defaults to 10 f(0) when absent.
    pub guard_dx: Option<f64>,
    pub max_refinements: usize,
    /// Largest slip-angle change per wall step before subdividing.
    pub max_wall_turn: f64,
    pub outputs: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            gamma: 1.4,
            inflow: InflowConfig::Uniform { u0: 2.0, rho0: 1.0, s0: 1.0 / 1.4 },
            duct: DuctConfig::Hyperbolic { f0: 1.0, k: 0.05, length_scale: 1.0 },
            inlet_nodes: 65,
            x_max: 30.0,
            c_vac_rel: 1e-4,
            corrector_tol: 1e-12,
            max_iters: 20,
            max_regions: 64,
            guard_dx: None,
            max_refinements: 48,
            max_wall_turn: 0.005,
            outputs: OutputConfig {
                dir: PathBuf::from("out"),
                nodes: true,
                regions: true,
                diagnostics: true,
                svg: true,
                svg_streamlines: false,
            },
        }
    }
}

impl RunConfig {
    /// Parse the key = value text; `#` starts a comment, blank lines are
    /// skipped, unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected 'key = value', got '{raw}'",
                    ln + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if map.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", ln + 1)));
            }
        }
        Self::from_map(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    fn from_map(mut map: BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut take = |k: &str| map.remove(k);
        let parse_f64 = |k: &str, v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::Config(format!("key '{k}': '{v}' is not a number")))
        };
        let parse_usize = |k: &str, v: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| Error::Config(format!("key '{k}': '{v}' is not a count")))
        };
        let parse_bool = |k: &str, v: &str| -> Result<bool> {
            match v {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(Error::Config(format!("key '{k}': '{v}' is not a boolean"))),
            }
        };

        if let Some(v) = take("gamma") {
            cfg.gamma = parse_f64("gamma", &v)?;
        }

        let inflow_mode = take("inflow.mode").unwrap_or_else(|| "uniform".into());
        let u0 = take("inflow.u0").map(|v| parse_f64("inflow.u0", &v)).transpose()?.unwrap_or(2.0);
        let rho0 =
            take("inflow.rho0").map(|v| parse_f64("inflow.rho0", &v)).transpose()?.unwrap_or(1.0);
        let s0 = take("inflow.s0")
            .map(|v| parse_f64("inflow.s0", &v))
            .transpose()?
            .unwrap_or(1.0 / cfg.gamma);
        let eps =
            take("inflow.eps").map(|v| parse_f64("inflow.eps", &v)).transpose()?.unwrap_or(0.01);
        let shape = match take("inflow.shape").as_deref() {
            None | Some("cos_u") => PerturbShape::CosU,
            Some("cos_rho") => PerturbShape::CosRho,
            Some("cos_mix") => PerturbShape::CosMix,
            Some(other) => {
                return Err(Error::Config(format!("inflow.shape: unknown shape id '{other}'")))
            }
        };
        let inflow_table = take("inflow.table");
        cfg.inflow = match inflow_mode.as_str() {
            "uniform" => InflowConfig::Uniform { u0, rho0, s0 },
            "perturbed" => InflowConfig::Perturbed { u0, rho0, s0, eps, shape },
            "table" => InflowConfig::Table {
                path: PathBuf::from(inflow_table.ok_or_else(|| {
                    Error::Config("inflow.mode = table requires inflow.table".into())
                })?),
            },
            other => return Err(Error::Config(format!("inflow.mode: unknown mode '{other}'"))),
        };

        let duct_kind = take("duct.kind").unwrap_or_else(|| "hyperbolic".into());
        let f0 = take("duct.f0").map(|v| parse_f64("duct.f0", &v)).transpose()?.unwrap_or(1.0);
        let k = take("duct.k").map(|v| parse_f64("duct.k", &v)).transpose()?.unwrap_or(0.05);
        let length_scale = take("duct.length_scale")
            .map(|v| parse_f64("duct.length_scale", &v))
            .transpose()?
            .unwrap_or(1.0);
        let duct_table = take("duct.table");
        cfg.duct = match duct_kind.as_str() {
            "hyperbolic" => DuctConfig::Hyperbolic { f0, k, length_scale },
            "table" => DuctConfig::Table {
                path: PathBuf::from(duct_table.ok_or_else(|| {
                    Error::Config("duct.kind = table requires duct.table".into())
                })?),
            },
            other => return Err(Error::Config(format!("duct.kind: unknown kind '{other}'"))),
        };

        if let Some(v) = take("solver.inlet_nodes") {
            cfg.inlet_nodes = parse_usize("solver.inlet_nodes", &v)?;
        }
        if let Some(v) = take("solver.x_max") {
            cfg.x_max = parse_f64("solver.x_max", &v)?;
        }
        if let Some(v) = take("solver.c_vac") {
            cfg.c_vac_rel = parse_f64("solver.c_vac", &v)?;
        }
        if let Some(v) = take("solver.corrector_tol") {
            cfg.corrector_tol = parse_f64("solver.corrector_tol", &v)?;
        }
        if let Some(v) = take("solver.max_iters") {
            cfg.max_iters = parse_usize("solver.max_iters", &v)?;
        }
        if let Some(v) = take("solver.max_regions") {
            cfg.max_regions = parse_usize("solver.max_regions", &v)?;
        }
        if let Some(v) = take("solver.guard_dx") {
            cfg.guard_dx = Some(parse_f64("solver.guard_dx", &v)?);
        }
        if let Some(v) = take("solver.max_refinements") {
            cfg.max_refinements = parse_usize("solver.max_refinements", &v)?;
        }
        if let Some(v) = take("solver.max_wall_turn") {
            cfg.max_wall_turn = parse_f64("solver.max_wall_turn", &v)?;
        }

        if let Some(v) = take("outputs.dir") {
            cfg.outputs.dir = PathBuf::from(v);
        }
        if let Some(v) = take("outputs.nodes") {
            cfg.outputs.nodes = parse_bool("outputs.nodes", &v)?;
        }
        if let Some(v) = take("outputs.regions") {
            cfg.outputs.regions = parse_bool("outputs.regions", &v)?;
        }
        if let Some(v) = take("outputs.diagnostics") {
            cfg.outputs.diagnostics = parse_bool("outputs.diagnostics", &v)?;
        }
        if let Some(v) = take("outputs.svg") {
            cfg.outputs.svg = parse_bool("outputs.svg", &v)?;
        }
        if let Some(v) = take("outputs.svg_streamlines") {
            cfg.outputs.svg_streamlines = parse_bool("outputs.svg_streamlines", &v)?;
        }

        if let Some(key) = map.keys().next() {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Basic well-formedness of the physical and solver fields.
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0) {
            return Err(Error::Config(format!(
                "gamma = {} violates the requirement gamma > 1",
                self.gamma
            )));
        }
        match &self.inflow {
            InflowConfig::Uniform { u0, rho0, s0 }
            | InflowConfig::Perturbed { u0, rho0, s0, .. } => {
                if !(*u0 > 0.0 && *rho0 > 0.0 && *s0 > 0.0) {
                    return Err(Error::Config(
                        "inflow fields u0, rho0, s0 must be positive".into(),
                    ));
                }
            }
            InflowConfig::Table { .. } => {}
        }
        if let DuctConfig::Hyperbolic { f0, k, length_scale } = &self.duct {
            if !(*f0 > 0.0 && *k > 0.0 && *length_scale > 0.0) {
                return Err(Error::Config("duct fields f0, k, length_scale must be positive".into()));
            }
        }
        if self.inlet_nodes < 3 {
            return Err(Error::Config("solver.inlet_nodes must be >= 3".into()));
        }
        if !(self.x_max > 0.0) {
            return Err(Error::Config("solver.x_max must be > 0".into()));
        }
        if !(self.c_vac_rel > 0.0 && self.c_vac_rel < 1.0) {
            return Err(Error::Config("solver.c_vac must be in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn gas(&self) -> Result<GasConstants> {
        GasConstants::new(self.gamma).map_err(|e| Error::Config(e.to_string()))
    }

    /// Build the duct, reading the wall table relative to `base` if needed.
    pub fn build_duct(&self, base: &Path) -> Result<DuctGeometry> {
        match &self.duct {
            DuctConfig::Hyperbolic { f0, k, length_scale } => {
                DuctGeometry::hyperbolic_wall(*f0, *k, *length_scale, self.x_max)
            }
            DuctConfig::Table { path } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| Error::io(full.display().to_string(), e))?;
                DuctGeometry::from_csv(&text, self.x_max)
            }
        }
    }

    pub fn build_profile(&self, base: &Path) -> Result<InletProfile> {
        match &self.inflow {
            InflowConfig::Uniform { u0, rho0, s0 } => {
                Ok(InletProfile::Uniform { u0: *u0, rho0: *rho0, s0: *s0 })
            }
            InflowConfig::Perturbed { u0, rho0, s0, eps, shape } => Ok(InletProfile::Perturbed {
                u0: *u0,
                rho0: *rho0,
                s0: *s0,
                eps: *eps,
                shape: *shape,
            }),
            InflowConfig::Table { path } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| Error::io(full.display().to_string(), e))?;
                parse_inflow_csv(&text)
            }
        }
    }

    /// Solver configuration with the vacuum cutoff made absolute using the
    /// inlet centerline sound speed.
    pub fn solver_config(&self, g: &GasConstants) -> SolverConfig {
        let c0 = match &self.inflow {
            InflowConfig::Uniform { rho0, s0, .. } | InflowConfig::Perturbed { rho0, s0, .. } => {
                (g.gamma * s0 * rho0.powf(g.gamma - 1.0)).sqrt()
            }
            InflowConfig::Table { .. } => 1.0,
        };
        let f0 = match &self.duct {
            DuctConfig::Hyperbolic { f0, .. } => *f0,
            DuctConfig::Table { .. } => 1.0,
        };
        SolverConfig {
            inlet_nodes: self.inlet_nodes,
            x_max: self.x_max,
            c_vac: self.c_vac_rel * c0,
            corrector_tol: self.corrector_tol,
            max_iters: self.max_iters,
            max_regions: self.max_regions,
            guard_dx: self.guard_dx.unwrap_or(10.0 * f0),
            max_refinements: self.max_refinements,
            min_cross_angle: 1e-4,
            max_wall_turn: self.max_wall_turn,
        }
    }
}

/// Inflow table: UTF-8 CSV with header `y,u,rho,s` (optionally `y,u,v,rho,s`).
pub fn parse_inflow_csv(text: &str) -> Result<InletProfile> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .map(|h| h.trim().to_ascii_lowercase())
        .ok_or_else(|| Error::Config("empty inflow table".into()))?;
    let has_v = match header.as_str() {
        "y,u,rho,s" => false,
        "y,u,v,rho,s" => true,
        other => {
            return Err(Error::Config(format!(
                "inflow table header must be 'y,u,rho,s' or 'y,u,v,rho,s', got '{other}'"
            )))
        }
    };
    let mut y = Vec::new();
    let mut u = Vec::new();
    let mut v = Vec::new();
    let mut rho = Vec::new();
    let mut s = Vec::new();
    for (ln, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("inflow table line {}: bad number", ln + 2)))?;
        let expect = if has_v { 5 } else { 4 };
        if cols.len() != expect {
            return Err(Error::Config(format!(
                "inflow table line {}: expected {expect} columns",
                ln + 2
            )));
        }
        y.push(cols[0]);
        u.push(cols[1]);
        if has_v {
            v.push(cols[2]);
        }
        rho.push(cols[if has_v { 3 } else { 2 }]);
        s.push(cols[if has_v { 4 } else { 3 }]);
    }
    Ok(InletProfile::Table { y, u, v: has_v.then_some(v), rho, s })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let text = "\
# demo configuration
gamma = 1.4
inflow.mode = uniform
inflow.u0 = 2.0
inflow.rho0 = 1.0
inflow.s0 = 0.7142857142857143
duct.kind = hyperbolic
duct.f0 = 1.0
duct.k = 0.05
duct.length_scale = 1.0
solver.inlet_nodes = 33
solver.x_max = 12.0
outputs.dir = demo_out
outputs.svg = false
";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.inlet_nodes, 33);
        assert_eq!(cfg.x_max, 12.0);
        assert!(!cfg.outputs.svg);
        assert!(matches!(cfg.inflow, InflowConfig::Uniform { u0, .. } if u0 == 2.0));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::parse("gamma = 0.9").is_err());
        assert!(RunConfig::parse("nonsense.key = 1").is_err());
        assert!(RunConfig::parse("gamma").is_err());
        assert!(RunConfig::parse("solver.inlet_nodes = 2").is_err());
        assert!(RunConfig::parse("gamma = 1.4\ngamma = 1.5").is_err());
        assert!(RunConfig::parse("inflow.mode = table").is_err());
    }

    #[test]
    fn inflow_csv() {
        let p = parse_inflow_csv("y,u,rho,s\n-1,2,1,0.714\n0,2,1,0.714\n1,2,1,0.714\n").unwrap();
        assert!(matches!(p, InletProfile::Table { .. }));
        assert!(parse_inflow_csv("a,b\n1,2\n").is_err());
    }
}

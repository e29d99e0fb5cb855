//! Divergent duct walls W+ (y = f) and W- (y = -f) and their validation.
//!
//! The wall function must satisfy f(0) > 0, f'(0) = 0, f'' > 0 and have an
//! asymptotic slope; the semi-infinite duct is truncated at x_max for
//! marching.

use crate::error::{Error, Result};
use crate::interp::Pchip;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallSide {
    Lower,
    Upper,
}

impl WallSide {
    /// +1 for the upper wall, -1 for the lower.
    pub fn sign(&self) -> f64 {
        match self {
            WallSide::Lower => -1.0,
            WallSide::Upper => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
enum WallShape {
    /// f(x) = f0 + k (sqrt(L^2 + x^2) - L); exact derivatives, f'_inf = k.
    Hyperbolic { f0: f64, k: f64, l: f64 },
    /// Monotone-convex piecewise-cubic interpolant of tabulated (x, f).
    Table(Pchip),
}

#[derive(Debug, Clone)]
pub struct DuctGeometry {
    shape: WallShape,
    x_max: f64,
}

/// One violated condition with the offending abscissa where applicable.
#[derive(Debug, Clone)]
pub struct Violation {
    pub condition: String,
    pub x: Option<f64>,
    pub detail: String,
}

/// Outcome of checking a duct against the wall conditions.
/// An empty violation list means the duct is valid; notes carry
/// non-fatal caveats such as truncated-limit estimates.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl DuctGeometry {
    /// Canonical analytic wall family satisfying the duct conditions.
    pub fn hyperbolic_wall(f0: f64, k: f64, l: f64, x_max: f64) -> Result<Self> {
        if !(f0 > 0.0) || !(k > 0.0) || !(l > 0.0) || !(x_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "hyperbolic wall needs f0, k, L, x_max > 0; got f0={f0}, k={k}, L={l}, x_max={x_max}"
            )));
        }
        Ok(DuctGeometry { shape: WallShape::Hyperbolic { f0, k, l }, x_max })
    }

    /// Tabulated wall from sample arrays (strictly increasing x, first x = 0).
    pub fn from_samples(xs: Vec<f64>, fs: Vec<f64>, x_max: f64) -> Result<Self> {
        if xs.first() != Some(&0.0) {
            return Err(Error::InvalidParameter(
                "wall table must start at x = 0".into(),
            ));
        }
        Ok(DuctGeometry { shape: WallShape::Table(Pchip::new(xs, fs)?), x_max })
    }

    /// Parse a UTF-8 CSV wall table with header `x,f`.
    pub fn from_csv(content: &str, x_max: f64) -> Result<Self> {
        let mut xs = Vec::new();
        let mut fs = Vec::new();
        let mut lines = content.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim().eq_ignore_ascii_case("x,f") => {}
            _ => return Err(Error::Config("wall table must have header 'x,f'".into())),
        }
        for (ln, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let x: f64 = cols
                .next()
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("wall table line {}: bad x", ln + 1)))?;
            let f: f64 = cols
                .next()
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("wall table line {}: bad f", ln + 1)))?;
            xs.push(x);
            fs.push(f);
        }
        Self::from_samples(xs, fs, x_max)
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn f(&self, x: f64) -> f64 {
        match &self.shape {
            WallShape::Hyperbolic { f0, k, l } => f0 + k * ((l * l + x * x).sqrt() - l),
            WallShape::Table(p) => p.eval(x),
        }
    }

    pub fn f_prime(&self, x: f64) -> f64 {
        match &self.shape {
            WallShape::Hyperbolic { k, l, .. } => k * x / (l * l + x * x).sqrt(),
            WallShape::Table(p) => p.eval_deriv(x),
        }
    }

    pub fn f_second(&self, x: f64) -> f64 {
        match &self.shape {
            WallShape::Hyperbolic { k, l, .. } => {
                let r2 = l * l + x * x;
                k * l * l / (r2 * r2.sqrt())
            }
            WallShape::Table(p) => p.eval_second(x),
        }
    }

    /// Asymptotic slope; for tabulated walls the slope at the last sample.
    pub fn f_prime_inf(&self) -> f64 {
        match &self.shape {
            WallShape::Hyperbolic { k, .. } => *k,
            WallShape::Table(p) => p.eval_deriv(p.x_max()),
        }
    }

    /// Wall ordinate on the given side: -f (lower) or +f (upper).
    pub fn wall_y(&self, x: f64, side: WallSide) -> f64 {
        side.sign() * self.f(x)
    }

    /// Inward unit normal of the wall at x.
    pub fn wall_normal(&self, x: f64, side: WallSide) -> Result<[f64; 2]> {
        if x < 0.0 {
            return Err(Error::OutOfDomain(format!("wall normal at x={x} < 0")));
        }
        let fp = self.f_prime(x);
        let norm = (1.0 + fp * fp).sqrt();
        match side {
            WallSide::Lower => Ok([fp / norm, 1.0 / norm]),
            WallSide::Upper => Ok([fp / norm, -1.0 / norm]),
        }
    }

    /// Flow angle forced by the slip condition (u, v) . n = 0:
    /// sigma = -arctan f' on the lower wall, +arctan f' on the upper.
    pub fn slip_angle(&self, x: f64, side: WallSide) -> f64 {
        side.sign() * self.f_prime(x).atan()
    }

    /// Check the wall conditions on n_samples points of [0, x_max].
    pub fn validate(&self, n_samples: usize) -> Result<ValidationReport> {
        if n_samples < 2 {
            return Err(Error::InvalidParameter("validate needs n_samples >= 2".into()));
        }
        let mut report = ValidationReport::default();
        let f0 = self.f(0.0);
        if !(f0 > 0.0) {
            report.violations.push(Violation {
                condition: "f(0) > 0".into(),
                x: Some(0.0),
                detail: format!("f(0) = {f0}"),
            });
        }
        let fp0 = self.f_prime(0.0);
        // tables carry interpolation-scale endpoint noise
        let fp0_tol = 1e-9f64.max(1e-6 * self.f_prime_inf().abs());
        if fp0.abs() > fp0_tol {
            report.violations.push(Violation {
                condition: "f'(0) = 0".into(),
                x: Some(0.0),
                detail: format!("f'(0) = {fp0}"),
            });
        }
        let mut prev_fp = f64::NEG_INFINITY;
        let mut monotone_violation = None;
        let mut fpps = Vec::with_capacity(n_samples);
        for i in 0..n_samples {
            let x = self.x_max * i as f64 / (n_samples - 1) as f64;
            fpps.push((x, self.f_second(x)));
            let fp = self.f_prime(x);
            if fp < prev_fp - 1e-12 && monotone_violation.is_none() {
                monotone_violation = Some((x, fp));
            }
            prev_fp = fp;
        }
        let max_fpp = fpps.iter().map(|&(_, f)| f).fold(f64::NEG_INFINITY, f64::max);
        let mut convexity_violation = None;
        if max_fpp <= 0.0 {
            let worst = fpps.iter().cloned().fold((0.0, f64::NEG_INFINITY), |a, b| {
                if b.1 > a.1 { b } else { a }
            });
            convexity_violation = Some(worst);
        } else {
            // tabulated walls get an O(h) tolerance for interpolation
            // boundary effects; analytic walls are checked exactly
            let tol = match &self.shape {
                WallShape::Table(_) => 1e-3 * max_fpp,
                _ => 0.0,
            };
            for &(x, fpp) in &fpps {
                if fpp < -tol {
                    convexity_violation = Some((x, fpp));
                    break;
                }
            }
            if let WallShape::Table(p) = &self.shape {
                // interval-end bounds catch sign flips between samples
                let bounds = p.second_derivative_interval_bounds();
                let scale = bounds
                    .iter()
                    .map(|&(_, l, r)| l.abs().max(r.abs()))
                    .fold(0.0, f64::max);
                for (x, left, right) in bounds {
                    if left.min(right) < -1e-3 * scale && convexity_violation.is_none() {
                        convexity_violation = Some((x, left.min(right)));
                    }
                }
            }
        }
        if let WallShape::Table(_) = &self.shape {
            report
                .notes
                .push("tabulated wall: f'_inf taken as f' at the last sample".into());
        }
        if let Some((x, fpp)) = convexity_violation {
            report.violations.push(Violation {
                condition: "f''(x) > 0".into(),
                x: Some(x),
                detail: format!("f''({x}) = {fpp}"),
            });
        }
        if let Some((x, fp)) = monotone_violation {
            report.violations.push(Violation {
                condition: "f' nondecreasing".into(),
                x: Some(x),
                detail: format!("f'({x}) = {fp} decreased"),
            });
        }
        // A slope still growing substantially across the outer half of the
        // truncated domain means the asymptotic slope cannot be trusted.
        let fp_half = self.f_prime(0.5 * self.x_max).max(1e-300);
        let fp_end = self.f_prime(self.x_max);
        if fp_end / fp_half > 1.1 {
            report.violations.push(Violation {
                condition: "f'_inf exists".into(),
                x: Some(self.x_max),
                detail: format!(
                    "f' grows from {fp_half} at x_max/2 to {fp_end} at x_max; limit does not converge on the truncated domain"
                ),
            });
        }
        Ok(report)
    }
}

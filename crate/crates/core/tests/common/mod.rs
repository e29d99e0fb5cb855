//! Shared helpers for the integration and acceptance suites: the
//! Prandtl-Meyer quadrature oracle and canonical run setups.

#![allow(dead_code)]

use ductflow_core::gas::GasConstants;
use ductflow_core::geometry::DuctGeometry;
use ductflow_core::kernel::{InletProfile, PerturbShape, SolverConfig};

/// Independent Prandtl-Meyer oracle. The turning function is obtained two
/// ways that never touch the solver's fan module: the closed form and an
/// adaptive-step Simpson quadrature of d(nu)/dM with the sonic square-root
/// singularity substituted away.
pub mod pm {
    /// Closed-form Prandtl-Meyer function nu(M).
    pub fn nu_closed(m: f64, gamma: f64) -> f64 {
        let a = ((gamma + 1.0) / (gamma - 1.0)).sqrt();
        a * (((m * m - 1.0).max(0.0)).sqrt() / a).atan() - ((m * m - 1.0).max(0.0)).sqrt().atan()
    }

    /// Limiting turning angle nu(M -> infinity).
    pub fn nu_max(gamma: f64) -> f64 {
        std::f64::consts::FRAC_PI_2 * (((gamma + 1.0) / (gamma - 1.0)).sqrt() - 1.0)
    }

    /// Quadrature route: nu(M) = int_1^M sqrt(m^2-1)/(m (1 + (g-1)/2 m^2)) dm
    /// with m = 1 + t^2 so the integrand is smooth at the sonic end.
    pub fn nu_quad(m: f64, gamma: f64) -> f64 {
        let f = |x: f64| {
            ((x * x - 1.0).max(0.0)).sqrt() / (x * (1.0 + 0.5 * (gamma - 1.0) * x * x))
        };
        let g = |t: f64| f(1.0 + t * t) * 2.0 * t;
        simpson(&g, 0.0, (m - 1.0).max(0.0).sqrt(), 400_001)
    }

    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        if b <= a {
            return 0.0;
        }
        let n = if n % 2 == 0 { n + 1 } else { n };
        let h = (b - a) / (n - 1) as f64;
        let mut sum = f(a) + f(b);
        for i in 1..n - 1 {
            sum += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        sum * h / 3.0
    }

    /// Mach number with nu(M) = nu_target (bisection on the closed form).
    pub fn mach_from_nu(nu_target: f64, gamma: f64) -> f64 {
        let mut lo = 1.0;
        let mut hi = 1e6;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if nu_closed(mid, gamma) < nu_target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Sound speed after turning a uniform stream of Mach m0, sound speed
    /// c0, by |dsigma| (expansion), via the Prandtl-Meyer function and the
    /// adiabatic relation.
    pub fn sound_speed_after_turn(m0: f64, c0: f64, dsigma: f64, gamma: f64) -> f64 {
        let m = mach_from_nu(nu_closed(m0, gamma) + dsigma.abs(), gamma);
        let e = 1.0 + 0.5 * (gamma - 1.0) * m0 * m0;
        c0 * (e / (1.0 + 0.5 * (gamma - 1.0) * m * m)).sqrt()
    }

    /// Abscissa where a hyperbolic wall's slope angle reaches the limiting
    /// turning of a Mach-m0 stream (the vacuum onset oracle).
    pub fn vacuum_onset_x(m0: f64, gamma: f64, duct: &ductflow_core::geometry::DuctGeometry) -> f64 {
        let turn = nu_max(gamma) - nu_quad(m0, gamma);
        let mut lo = 0.0;
        let mut hi = duct.x_max() * 2.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if duct.f_prime(mid).atan() < turn {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

pub fn gamma14() -> GasConstants {
    GasConstants::new(1.4).unwrap()
}

/// Entropy making c = 1 at rho = 1 for gamma = 1.4.
pub const S0: f64 = 1.0 / 1.4;

pub fn mach2_duct(x_max: f64) -> DuctGeometry {
    DuctGeometry::hyperbolic_wall(1.0, 0.05, 1.0, x_max).unwrap()
}

pub fn mach2_profile() -> InletProfile {
    InletProfile::Uniform { u0: 2.0, rho0: 1.0, s0: S0 }
}

pub fn perturbed_profile(eps: f64) -> InletProfile {
    InletProfile::Perturbed { u0: 2.0, rho0: 1.0, s0: S0, eps, shape: PerturbShape::CosU }
}

pub fn mach10_duct(x_max: f64) -> DuctGeometry {
    DuctGeometry::hyperbolic_wall(1.0, 0.7, 1.0, x_max).unwrap()
}

pub fn mach10_profile() -> InletProfile {
    InletProfile::Uniform { u0: 10.0, rho0: 1.0, s0: S0 }
}

/// Solver setup for the gentle-wall Mach-2 family: refinement ladders stay
/// pure in N, so the adaptive wall subdivision is disabled.
pub fn cfg_mach2(n: usize) -> SolverConfig {
    SolverConfig { inlet_nodes: n, x_max: 30.0, max_wall_turn: 1.0, ..Default::default() }
}

pub fn cfg_mach10(n: usize) -> SolverConfig {
    SolverConfig { inlet_nodes: n, x_max: 20.0, ..Default::default() }
}

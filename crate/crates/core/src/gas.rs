//! Thermodynamic and characteristic-geometry algebra for a single
//! supersonic gas state of a polytropic gas (p = s rho^gamma).
//!
//! Angles are the canonical representation of characteristic directions;
//! slopes are derived on demand because dy/dx degenerates where a
//! characteristic turns vertical while the angles stay regular.

use crate::error::{Error, Result};

/// Gas constants derived from the adiabatic exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasConstants {
    /// Adiabatic exponent, > 1.
    pub gamma: f64,
    /// kappa = 2/(gamma - 1).
    pub kappa: f64,
    /// mu = sqrt((gamma - 1)/(gamma + 1)), the critical-speed ratio of the
    /// epicycloid parametrization.
    pub mu: f64,
}

impl GasConstants {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "adiabatic exponent must satisfy gamma > 1, got {gamma}"
            )));
        }
        Ok(GasConstants {
            gamma,
            kappa: 2.0 / (gamma - 1.0),
            mu: ((gamma - 1.0) / (gamma + 1.0)).sqrt(),
        })
    }
}

/// Primitive gas state (u, v, rho, s).
///
/// `rho == 0` is reserved for the explicit vacuum sentinel; gas states
/// participating in characteristic marching always have rho > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub u: f64,
    pub v: f64,
    pub rho: f64,
    pub s: f64,
}

impl FlowState {
    pub fn new(u: f64, v: f64, rho: f64, s: f64) -> Self {
        FlowState { u, v, rho, s }
    }

    /// Distinguished vacuum state: rho = c = 0, velocity at the limiting
    /// speed in the given direction. Only c, q and E_hat remain meaningful.
    pub fn vacuum(u: f64, v: f64, s: f64) -> Self {
        FlowState { u, v, rho: 0.0, s }
    }

    pub fn is_vacuum(&self) -> bool {
        self.rho == 0.0
    }

    pub fn speed(&self) -> f64 {
        self.u.hypot(self.v)
    }

    /// Bernoulli function q^2/2 + c^2/(gamma-1); valid for vacuum states too
    /// (where it degenerates to q^2/2).
    pub fn e_hat(&self, g: &GasConstants) -> f64 {
        let q2 = self.u * self.u + self.v * self.v;
        let c2 = g.gamma * self.s * self.rho.powf(g.gamma - 1.0);
        0.5 * q2 + c2 / (g.gamma - 1.0)
    }
}

/// Quantities derived from a supersonic `FlowState`.
#[derive(Debug, Clone, Copy)]
pub struct DerivedState {
    /// Sound speed c = sqrt(gamma s rho^(gamma-1)).
    pub c: f64,
    /// Flow speed q = |(u, v)|.
    pub q: f64,
    /// Pressure p = s rho^gamma.
    pub p: f64,
    /// Mach angle A in (0, pi/2), sin A = c/q.
    pub mach_angle: f64,
    /// Flow angle sigma = atan2(v, u).
    pub sigma: f64,
    /// C+ characteristic angle alpha = sigma + A.
    pub alpha: f64,
    /// C- characteristic angle beta = sigma - A.
    pub beta: f64,
    /// Bernoulli function q^2/2 + c^2/(gamma-1).
    pub e_hat: f64,
    /// Entropy-coupling coefficient j = c/(gamma (gamma-1) s).
    pub j: f64,
    /// Omega = (kappa-1)/(kappa+1) - tan^2 A.
    pub omega_coef: f64,
}

/// Angles closer than this to +-pi/2 make the slope representation unusable.
pub const SLOPE_ANGLE_LIMIT: f64 = std::f64::consts::FRAC_PI_2 - 1e-6;

fn slope_of(angle: f64) -> Option<f64> {
    if angle.abs() < SLOPE_ANGLE_LIMIT {
        Some(angle.tan())
    } else {
        None
    }
}

impl DerivedState {
    /// dy/dx of the C+ direction, None when nearly vertical.
    pub fn lambda_plus(&self) -> Option<f64> {
        slope_of(self.alpha)
    }

    /// dy/dx of the C- direction, None when nearly vertical.
    pub fn lambda_minus(&self) -> Option<f64> {
        slope_of(self.beta)
    }

    /// dy/dx of the stream direction, None when nearly vertical.
    pub fn lambda_0(&self) -> Option<f64> {
        slope_of(self.sigma)
    }
}

/// Populate all derived quantities for a supersonic gas state.
pub fn derive(state: &FlowState, g: &GasConstants) -> Result<DerivedState> {
    if state.rho <= 0.0 || state.s <= 0.0 || !state.rho.is_finite() || !state.s.is_finite() {
        return Err(Error::NonPhysical(format!(
            "derive requires rho > 0 and s > 0, got rho={}, s={}",
            state.rho, state.s
        )));
    }
    let q2 = state.u * state.u + state.v * state.v;
    let c2 = g.gamma * state.s * state.rho.powf(g.gamma - 1.0);
    if q2 <= c2 {
        return Err(Error::NonSupersonic(format!(
            "q^2={q2} <= c^2={c2} (M={})",
            (q2 / c2).sqrt()
        )));
    }
    let q = q2.sqrt();
    let c = c2.sqrt();
    let mach_angle = (c / q).clamp(-1.0, 1.0).asin();
    let sigma = state.v.atan2(state.u);
    // tan^2 A = c^2/(q^2 - c^2) stays exact where tan(A) would not.
    let tan2a = c2 / (q2 - c2);
    Ok(DerivedState {
        c,
        q,
        p: state.s * state.rho.powf(g.gamma),
        mach_angle,
        sigma,
        alpha: sigma + mach_angle,
        beta: sigma - mach_angle,
        e_hat: 0.5 * q2 + c2 / (g.gamma - 1.0),
        j: c / (g.gamma * (g.gamma - 1.0) * state.s),
        omega_coef: (g.kappa - 1.0) / (g.kappa + 1.0) - tan2a,
    })
}

/// Invert c = sqrt(gamma s rho^(gamma-1)) for the density.
/// Returns 0 exactly when c = 0 (vacuum).
pub fn density_from(c: f64, s: f64, g: &GasConstants) -> Result<f64> {
    if s <= 0.0 || c < 0.0 || !s.is_finite() || !c.is_finite() {
        return Err(Error::NonPhysical(format!(
            "density_from requires c >= 0 and s > 0, got c={c}, s={s}"
        )));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    Ok((c * c / (g.gamma * s)).powf(1.0 / (g.gamma - 1.0)))
}

/// Rebuild a primitive state from flow angle, sound speed, Bernoulli value
/// and entropy. Inverse of `derive` on its (sigma, c, E_hat, s) projection.
pub fn state_from(sigma: f64, c: f64, e_hat: f64, s: f64, g: &GasConstants) -> Result<FlowState> {
    let q2 = 2.0 * (e_hat - c * c / (g.gamma - 1.0));
    if q2 <= 0.0 {
        return Err(Error::NonPhysical(format!(
            "state_from: q^2 = {q2} <= 0 for c={c}, E_hat={e_hat}"
        )));
    }
    if q2 <= c * c {
        return Err(Error::NonSupersonic(format!(
            "state_from: q^2={q2} <= c^2={}",
            c * c
        )));
    }
    let q = q2.sqrt();
    let rho = density_from(c, s, g)?;
    Ok(FlowState::new(q * sigma.cos(), q * sigma.sin(), rho, s))
}

/// Eigenvalue formula slopes, lambda_pm = (uv +- c sqrt(q^2-c^2))/(u^2-c^2).
/// Degenerate where u^2 = c^2; provided for cross-checks against tan(alpha),
/// tan(beta).
pub fn eigenvalue_slopes(state: &FlowState, g: &GasConstants) -> Result<(f64, f64)> {
    let d = derive(state, g)?;
    let q2 = d.q * d.q;
    let c2 = d.c * d.c;
    let denom = state.u * state.u - c2;
    if denom == 0.0 {
        return Err(Error::OutOfRange("eigenvalue slopes degenerate at u^2 = c^2".into()));
    }
    let root = d.c * (q2 - c2).sqrt();
    let uv = state.u * state.v;
    Ok(((uv + root) / denom, (uv - root) / denom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};

    fn g14() -> GasConstants {
        GasConstants::new(1.4).unwrap()
    }

    fn mach2() -> FlowState {
        FlowState::new(2.0, 0.0, 1.0, 1.0 / 1.4)
    }

    #[test]
    fn constants_identities() {
        let g = g14();
        assert_eq!(g.kappa * (g.gamma - 1.0), 2.0);
        assert!(g.mu > 0.0 && g.mu < 1.0);
        assert!((g.mu * g.mu - (g.gamma - 1.0) / (g.gamma + 1.0)).abs() < 1e-16);
        assert!(GasConstants::new(0.9).is_err());
        assert!(GasConstants::new(1.0).is_err());
    }

    #[test]
    fn derive_mach2_reference_values() {
        let g = g14();
        let d = derive(&mach2(), &g).unwrap();
        assert!((d.c - 1.0).abs() < 4.0 * f64::EPSILON);
        assert!((d.q - 2.0).abs() < 4.0 * f64::EPSILON);
        assert!((d.mach_angle - FRAC_PI_6).abs() < 4.0 * f64::EPSILON);
        assert_eq!(d.sigma, 0.0);
        assert!((d.alpha - 0.5235987755982988).abs() < 1e-15);
        assert!((d.beta + 0.5235987755982988).abs() < 1e-15);
        assert!((d.lambda_plus().unwrap() - 0.5773502691896257).abs() < 1e-15);
        assert!((d.lambda_minus().unwrap() + 0.5773502691896257).abs() < 1e-15);
        assert_eq!(d.lambda_0().unwrap(), 0.0);
        assert!((d.e_hat - 4.5).abs() < 1e-14);
        assert!((d.j - 2.5).abs() < 1e-14);
    }

    #[test]
    fn derive_rejects_bad_states() {
        let g = g14();
        assert!(matches!(
            derive(&FlowState::new(1.0, 0.0, -1.0, 1.0), &g),
            Err(Error::NonPhysical(_))
        ));
        assert!(matches!(
            derive(&FlowState::new(1.0, 0.0, 1.0, -1.0), &g),
            Err(Error::NonPhysical(_))
        ));
        // sonic and subsonic rejected
        assert!(matches!(
            derive(&FlowState::new(1.0, 0.0, 1.0, 1.0 / 1.4), &g),
            Err(Error::NonSupersonic(_))
        ));
        assert!(derive(&FlowState::vacuum(2.0, 0.0, 1.0), &g).is_err());
    }

    #[test]
    fn symmetric_angles_when_horizontal() {
        let g = g14();
        let d = derive(&mach2(), &g).unwrap();
        assert!((d.alpha + d.beta).abs() < 1e-15); // alpha = -beta = A
        assert!((d.alpha - d.mach_angle).abs() < 1e-15);
    }

    #[test]
    fn rotation_invariance() {
        let g = g14();
        let base = derive(&mach2(), &g).unwrap();
        for &phi in &[0.3, -1.1, FRAC_PI_4, 2.9] {
            let (sin, cos) = phi.sin_cos();
            let rot = FlowState::new(2.0 * cos, 2.0 * sin, 1.0, 1.0 / 1.4);
            let d = derive(&rot, &g).unwrap();
            let wrap = |a: f64| (a - phi + PI).rem_euclid(2.0 * PI) - PI;
            assert!((d.c - base.c).abs() < 1e-13);
            assert!((d.q - base.q).abs() < 1e-13);
            assert!((d.mach_angle - base.mach_angle).abs() < 1e-13);
            assert!((d.e_hat - base.e_hat).abs() < 1e-13);
            assert!((d.j - base.j).abs() < 1e-13);
            assert!(wrap(d.sigma).abs() < 1e-13);
            assert!((wrap(d.alpha) - base.alpha).abs() < 1e-13);
            assert!((wrap(d.beta) - base.beta).abs() < 1e-13);
        }
    }

    #[test]
    fn density_from_reference_values() {
        let g = g14();
        assert!((density_from(1.0, 1.0 / 1.4, &g).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(density_from(0.0, 0.3, &g).unwrap(), 0.0);
        // rho = 1.5^2.5
        let rho = density_from(1.5f64.sqrt(), 1.0 / 1.4, &g).unwrap();
        assert!((rho - 1.5f64.powf(2.5)).abs() < 1e-12);
        assert!((rho - 2.7556759606310752).abs() < 1e-12);
        assert!(density_from(-1.0, 1.0, &g).is_err());
        assert!(density_from(1.0, 0.0, &g).is_err());
    }

    #[test]
    fn state_from_reference_values() {
        let g = g14();
        let st = state_from(0.0, 1.0, 4.5, 1.0 / 1.4, &g).unwrap();
        assert!((st.u - 2.0).abs() < 1e-14);
        assert!(st.v.abs() < 1e-14);
        assert!((st.rho - 1.0).abs() < 1e-14);

        let st = state_from(FRAC_PI_4, 1.0, 4.5, 1.0 / 1.4, &g).unwrap();
        assert!((st.u - 2.0f64.sqrt()).abs() < 1e-14);
        assert!((st.v - 2.0f64.sqrt()).abs() < 1e-14);

        assert!(state_from(0.0, 3.0, 4.5, 1.0, &g).is_err()); // q^2 <= 0
        assert!(state_from(0.0, 1.7, 4.5, 1.0 / 1.4, &g).is_err()); // subsonic
    }

    #[test]
    fn eigenvalue_slopes_match_angle_tangents() {
        let g = g14();
        for &(u, v) in &[(2.0, 0.0), (2.0, 0.4), (3.0, -1.0), (1.4, 0.3)] {
            let st = FlowState::new(u, v, 1.0, 1.0 / 1.4);
            let d = derive(&st, &g).unwrap();
            if d.alpha.abs() < SLOPE_ANGLE_LIMIT && d.beta.abs() < SLOPE_ANGLE_LIMIT {
                let (lp, lm) = eigenvalue_slopes(&st, &g).unwrap();
                let scale = lp.abs().max(1.0);
                assert!((lp - d.alpha.tan()).abs() < 1e-10 * scale);
                assert!((lm - d.beta.tan()).abs() < 1e-10 * scale.max(lm.abs()));
            }
        }
    }

    proptest! {
        // Round trip state_from(derive(x)) = x within 1e-12 relative.
        #[test]
        fn prop_round_trip(
            u in 0.3f64..8.0,
            v in -3.0f64..3.0,
            rho in 0.05f64..4.0,
            s in 0.1f64..3.0,
        ) {
            let g = g14();
            let st = FlowState::new(u, v, rho, s);
            if let Ok(d) = derive(&st, &g) {
                let back = state_from(d.sigma, d.c, d.e_hat, st.s, &g).unwrap();
                prop_assert!((back.u - st.u).abs() <= 1e-12 * d.q);
                prop_assert!((back.v - st.v).abs() <= 1e-12 * d.q);
                prop_assert!((back.rho - st.rho).abs() <= 1e-12 * st.rho);
            }
        }

        // q^2 cos(a)cos(b) = u^2 - c^2 and q^2 sin(a)sin(b) = v^2 - c^2.
        #[test]
        fn prop_angle_product_identities(
            u in 0.3f64..8.0,
            v in -3.0f64..3.0,
            rho in 0.05f64..4.0,
            s in 0.1f64..3.0,
        ) {
            let g = g14();
            let st = FlowState::new(u, v, rho, s);
            if let Ok(d) = derive(&st, &g) {
                let q2 = d.q * d.q;
                let c2 = d.c * d.c;
                let lhs1 = q2 * d.alpha.cos() * d.beta.cos();
                let lhs2 = q2 * d.alpha.sin() * d.beta.sin();
                prop_assert!((lhs1 - (st.u * st.u - c2)).abs() <= 1e-10 * q2);
                prop_assert!((lhs2 - (st.v * st.v - c2)).abs() <= 1e-10 * q2);
            }
        }

        // E_hat identity from the derived state.
        #[test]
        fn prop_bernoulli_consistency(
            u in 0.3f64..8.0,
            rho in 0.05f64..4.0,
            s in 0.1f64..3.0,
        ) {
            let g = g14();
            let st = FlowState::new(u, 0.0, rho, s);
            if let Ok(d) = derive(&st, &g) {
                prop_assert!((st.e_hat(&g) - d.e_hat).abs() <= 1e-12 * d.e_hat);
                prop_assert!((d.c * d.c - d.q * d.q * d.mach_angle.sin().powi(2)).abs()
                    <= 1e-12 * d.c * d.c);
            }
        }
    }
}

//! Cross-validation of the closed-form fan against the independent
//! Prandtl-Meyer oracle (closed form and quadrature agree with each other,
//! then the fan's own quantities must agree with both).

mod common;

use common::pm;
use ductflow_core::gas::FlowState;
use ductflow_core::simple_wave::build_fan;

#[test]
fn quadrature_and_closed_form_agree() {
    for &m in &[1.2, 1.5, 2.0, 3.0, 5.0, 10.0] {
        let a = pm::nu_closed(m, 1.4);
        let b = pm::nu_quad(m, 1.4);
        assert!((a - b).abs() < 1e-10, "nu({m}): closed {a} vs quadrature {b}");
    }
}

#[test]
fn fan_parameter_equals_turning_function() {
    // the sonic fan parameter coincides with nu(M) for the upstream Mach
    // number; this pins the mu reconstruction against the oracle
    let g = common::gamma14();
    for &m in &[1.5, 2.0, 4.0, 10.0] {
        let fan = build_fan(&FlowState::new(m, 0.0, 1.0, common::S0), &g).unwrap();
        let nu = pm::nu_quad(m, 1.4);
        assert!(
            (fan.theta_star - nu).abs() < 1e-9,
            "M={m}: theta* = {} vs nu = {nu}",
            fan.theta_star
        );
    }
}

#[test]
fn vacuum_turning_matches_oracle() {
    let g = common::gamma14();
    for &m in &[2.0, 5.0, 10.0] {
        let fan = build_fan(&FlowState::new(m, 0.0, 1.0, common::S0), &g).unwrap();
        let expect = -(pm::nu_max(1.4) - pm::nu_quad(m, 1.4));
        assert!(
            (fan.vacuum_turning() - expect).abs() < 1e-9,
            "M={m}: {} vs {expect}",
            fan.vacuum_turning()
        );
    }
    // frozen oracle values
    assert!((pm::nu_max(1.4) - pm::nu_closed(2.0, 1.4) - 1.8164394816080014).abs() < 1e-12);
    assert!((pm::nu_max(1.4) - pm::nu_closed(10.0, 1.4) - 0.4910976675142584).abs() < 1e-12);
}

#[test]
fn fan_inversion_matches_turn_oracle() {
    // a 5.715 degree turn from Mach 2: fan inversion must reproduce the
    // Prandtl-Meyer sound speed
    let g = common::gamma14();
    let fan = build_fan(&FlowState::new(2.0, 0.0, 1.0, common::S0), &g).unwrap();
    let dsigma = 0.1f64.atan();
    let theta = fan.invert_sigma(-dsigma).unwrap();
    let sample = fan.fan_state(theta).unwrap();
    let c_oracle = pm::sound_speed_after_turn(2.0, 1.0, dsigma, 1.4);
    assert!((c_oracle - 0.9534120950153191).abs() < 1e-10, "frozen oracle digit check");
    assert!(
        (sample.c - c_oracle).abs() < 1e-10,
        "fan c = {} vs oracle {c_oracle}",
        sample.c
    );
    assert!((sample.q - 2.1106934607830903).abs() < 1e-9);
}

#[test]
fn mach10_vacuum_onset_oracle_values() {
    // frozen onset for the k = 0.7 hyperbolic wall at Mach 10
    let duct = common::mach10_duct(20.0);
    let x_v = pm::vacuum_onset_x(10.0, 1.4, &duct);
    assert!((x_v - 1.1840934536759078).abs() < 1e-6, "x_V = {x_v}");
    assert!((duct.f_prime(x_v) - 0.5347989303151807).abs() < 1e-7);
    // inside the acceptance band 1.185 +- 3%
    assert!((x_v - 1.185).abs() <= 0.03 * 1.185);
}

#[test]
fn oracle_field_slip_consistency() {
    // on the wall the oracle state satisfies the slip condition and the
    // turn matches the Prandtl-Meyer oracle
    let g = common::gamma14();
    let duct = ductflow_core::geometry::DuctGeometry::hyperbolic_wall(1.0, 0.7, 1.0, 30.0).unwrap();
    let fan = build_fan(&FlowState::new(2.0, 0.0, 1.0, common::S0), &g).unwrap();
    for &xi in &[0.2, 0.7, 1.3] {
        let s = fan.oracle_field(&duct, xi, -duct.f(xi)).unwrap();
        let slip = -duct.f_prime(xi).atan();
        assert!((s.sigma - slip).abs() < 1e-9);
        let c_oracle = pm::sound_speed_after_turn(2.0, 1.0, slip.abs(), 1.4);
        assert!((s.c - c_oracle).abs() < 1e-9, "xi={xi}: {} vs {c_oracle}", s.c);
    }
}

mod common;

use std::f64::consts::PI;

use common::form_factor_quadrature;
use nanospin::{form_factor, CavityGeometry};

#[test]
fn closed_form_matches_direct_quadrature() {
    for aspect in [0.25, 0.5, 2.0, 4.0] {
        for alpha in [0.0, PI / 4.0] {
            let geom = CavityGeometry::new(aspect, 1.0, alpha).unwrap();
            let closed = form_factor(&geom);
            let direct = form_factor_quadrature(aspect, 1.0, alpha);
            assert!((direct / closed - 1.0).abs() < 1e-4, "aspect={aspect} alpha={alpha}: {direct} vs {closed}");
        }
    }
}

#[test]
fn sphere_quadrature_vanishes() {
    assert!(form_factor_quadrature(1.0, 1.0, 0.3).abs() < 1e-8);
}

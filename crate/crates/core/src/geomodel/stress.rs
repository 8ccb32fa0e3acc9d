//! Initial effective-stress field and Cauchy traction resolution.
//!
//! The vertical effective stress is the lithostatic column minus the
//! hydrostatic pore-pressure column; horizontal principal components follow
//! from the confinement ratios M1/M2 rotated by the regime azimuth. Stress
//! tensors here are compression-positive; the finite-element core works
//! tension-positive and converts at the single traction-resolution point.

use super::{MaterialLayer, Mesh, StressRegime};
use crate::{Error, Result};

/// Vertical effective stress at depth `z` (m): integral of rho(s) g ds over
/// [0, z] minus the hydrostatic column rho_w g z. Compression-positive (Pa).
pub fn vertical_effective_stress(
    z: f64,
    layers: &[MaterialLayer],
    water_density: f64,
    gravity: f64,
) -> f64 {
    let mut overburden = 0.0;
    for layer in layers {
        if z <= layer.depth_top {
            break;
        }
        let bottom = z.min(layer.depth_bottom);
        overburden += layer.density * (bottom - layer.depth_top);
    }
    gravity * (overburden - water_density * z)
}

/// Initial traction resolved on an interface element, expressed in the
/// element frame. Components are the traction exerted on side B by side A:
/// `sigma_n` compression-positive, tangential components along the strike
/// and down-dip tangents.
#[derive(Debug, Clone, Copy)]
pub struct InitialTraction {
    pub sigma_n: f64,
    pub tau_strike: f64,
    pub tau_dip: f64,
}

impl InitialTraction {
    pub fn tau_mag(&self) -> f64 {
        self.tau_strike.hypot(self.tau_dip)
    }
}

/// Initial effective stress per hexahedron plus resolved fault tractions.
#[derive(Debug, Clone)]
pub struct StressField {
    /// Per-hex Voigt tensor (xx, yy, zz, xy, yz, zx), compression-positive.
    pub hex_stress: Vec<[f64; 6]>,
    /// Per-interface-element initial traction in the element frame.
    pub traction: Vec<InitialTraction>,
}

/// Cauchy traction decomposition on a plane. `stress` is a compression-
/// positive Voigt tensor; returns the compression-positive normal component
/// and the tangential traction vector (the traction exerted on the +n side).
pub fn resolve_traction(stress: &[f64; 6], normal: &[f64; 3]) -> Result<(f64, [f64; 3])> {
    let n = normal;
    let nrm2 = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
    if (nrm2 - 1.0).abs() > 1e-9 {
        return Err(Error::Geometry(format!("resolve_traction: non-unit normal {normal:?}")));
    }
    let t = [
        stress[0] * n[0] + stress[3] * n[1] + stress[5] * n[2],
        stress[3] * n[0] + stress[1] * n[1] + stress[4] * n[2],
        stress[5] * n[0] + stress[4] * n[1] + stress[2] * n[2],
    ];
    let sigma_n = t[0] * n[0] + t[1] * n[1] + t[2] * n[2];
    let tau = [t[0] - sigma_n * n[0], t[1] - sigma_n * n[1], t[2] - sigma_n * n[2]];
    Ok((sigma_n, tau))
}

/// Undisturbed effective stress tensor at depth `z` for a stratigraphic
/// column, compression-positive Voigt.
pub fn regime_tensor(
    z: f64,
    layers: &[MaterialLayer],
    regime: &StressRegime,
) -> [f64; 6] {
    let sv = vertical_effective_stress(z, layers, regime.water_density, regime.gravity);
    let sh = regime.m1 * sv;
    let sh_max = regime.m2 * sv;
    let th = regime.theta.to_radians();
    let (s, c) = th.sin_cos();
    // sigma_h along (cos th, sin th), sigma_H along (-sin th, cos th)
    [
        sh * c * c + sh_max * s * s,
        sh * s * s + sh_max * c * c,
        sv,
        (sh - sh_max) * s * c,
        0.0,
        0.0,
    ]
}

/// Compute the initial effective-stress field on a mesh and resolve fault
/// tractions at the interface-element centroids.
pub fn compute_initial_stress(mesh: &Mesh, regime: &StressRegime) -> Result<StressField> {
    regime.validate()?;
    let mut hex_stress = Vec::with_capacity(mesh.hexes.len());
    for hex in &mesh.hexes {
        let zc = hex.nodes.iter().map(|&n| mesh.nodes[n][2]).sum::<f64>() / 8.0;
        let table = mesh.layer_table(hex.shifted);
        let t = regime_tensor(zc, table, regime);
        if t[2] < -1e-6 {
            return Err(Error::Geometry(format!(
                "negative vertical effective stress at depth {zc} m (water column heavier than rock)"
            )));
        }
        hex_stress.push(t);
    }
    let mut traction = Vec::with_capacity(mesh.interfaces.len());
    for e in &mesh.interfaces {
        let z = e.centroid[2];
        let ta = regime_tensor(z, mesh.layer_table(mesh.hexes[e.hex_a].shifted), regime);
        let tb = regime_tensor(z, mesh.layer_table(mesh.hexes[e.hex_b].shifted), regime);
        let mean: [f64; 6] = std::array::from_fn(|i| 0.5 * (ta[i] + tb[i]));
        let (sigma_n, tau) = resolve_traction(&mean, &e.normal)?;
        let tau_strike =
            tau[0] * e.tangent_strike[0] + tau[1] * e.tangent_strike[1] + tau[2] * e.tangent_strike[2];
        let tau_dip =
            tau[0] * e.tangent_dip[0] + tau[1] * e.tangent_dip[1] + tau[2] * e.tangent_dip[2];
        traction.push(InitialTraction { sigma_n, tau_strike, tau_dip });
    }
    Ok(StressField { hex_stress, traction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomodel::{
        build_geometry, generate_mesh, reference_layers, GeometryParams, MeshResolution,
    };
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const G: f64 = 9.80665;

    #[test]
    fn sigma_v_hand_integration() {
        // z = 2000 m through 1600 m of overburden and 400 m of salt
        let layers = reference_layers();
        let sv = vertical_effective_stress(2000.0, &layers, 1000.0, G);
        let hand = G * (2200.0 * 1600.0 + 2100.0 * 400.0 - 1000.0 * 2000.0);
        assert_relative_eq!(sv, hand, max_relative = 1e-12);
        assert_relative_eq!(sv, 23.1437e6, max_relative = 1e-3);
        let sh = 0.74 * sv;
        assert_relative_eq!(sh, 17.13e6, max_relative = 1e-3);
    }

    #[test]
    fn sigma_v_zero_at_surface() {
        assert_eq!(vertical_effective_stress(0.0, &reference_layers(), 1000.0, G), 0.0);
    }

    #[test]
    fn scenario_6b_horizontal_stress() {
        let layers = reference_layers();
        let regime = StressRegime { m1: 0.40, m2: 0.47, ..StressRegime::reference() };
        let t = regime_tensor(2000.0, &layers, &regime);
        assert_relative_eq!(t[0], 9.26e6, max_relative = 1e-3);
    }

    #[test]
    fn sigma_v_piecewise_linear_and_monotone() {
        let layers = reference_layers();
        let mut prev = -1.0;
        for k in 0..=500 {
            let z = k as f64 * 10.0;
            let sv = vertical_effective_stress(z, &layers, 1000.0, G);
            assert!(sv >= prev, "sigma_v not monotone at z = {z}");
            prev = sv;
        }
        // derivative inside a layer is constant: compare midpoint slopes
        let slope = |z0: f64, z1: f64| {
            (vertical_effective_stress(z1, &layers, 1000.0, G)
                - vertical_effective_stress(z0, &layers, 1000.0, G))
                / (z1 - z0)
        };
        assert_relative_eq!(slope(500.0, 600.0), slope(900.0, 1000.0), max_relative = 1e-12);
        assert_relative_eq!(slope(500.0, 600.0), G * (2200.0 - 1000.0), max_relative = 1e-12);
    }

    #[test]
    fn traction_on_principal_plane() {
        let layers = reference_layers();
        let regime = StressRegime::reference();
        let t = regime_tensor(2000.0, &layers, &regime);
        let (sn, tau) = resolve_traction(&t, &[1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(sn, t[0], max_relative = 1e-12);
        assert!(tau.iter().all(|&c| c.abs() < 1e-9));
    }

    #[test]
    fn traction_mohr_circle_45deg() {
        let layers = reference_layers();
        let regime = StressRegime::reference();
        let t = regime_tensor(2000.0, &layers, &regime);
        let (sv, sh) = (t[2], t[0]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (sn, tau) = resolve_traction(&t, &[s, 0.0, s]).unwrap();
        let tau_mag = (tau[0] * tau[0] + tau[1] * tau[1] + tau[2] * tau[2]).sqrt();
        assert_relative_eq!(sn, 0.5 * (sv + sh), max_relative = 1e-12);
        assert_relative_eq!(tau_mag, 0.5 * (sv - sh), max_relative = 1e-12);
    }

    #[test]
    fn traction_85deg_plane() {
        let layers = reference_layers();
        let regime = StressRegime::reference();
        let t = regime_tensor(2000.0, &layers, &regime);
        let (sv, sh) = (t[2], t[0]);
        let d = 85f64.to_radians();
        let n = [d.sin(), 0.0, -d.cos()];
        let (sn, tau) = resolve_traction(&t, &n).unwrap();
        let tau_mag = (tau[0] * tau[0] + tau[1] * tau[1] + tau[2] * tau[2]).sqrt();
        assert_relative_eq!(sn, sh * d.sin().powi(2) + sv * d.cos().powi(2), max_relative = 1e-12);
        assert_relative_eq!(tau_mag, (sv - sh) * d.sin() * d.cos(), max_relative = 1e-9);
        assert_relative_eq!(sn, 17.18e6, max_relative = 1e-3);
        assert_relative_eq!(tau_mag, 0.52e6, max_relative = 1e-2);
    }

    #[test]
    fn initial_field_inside_coulomb_cone() {
        // chi < 1 everywhere at step 0 with reference friction parameters
        let geom = build_geometry(GeometryParams::default()).unwrap();
        let mesh = generate_mesh(&geom, &reference_layers(), &MeshResolution::coarse()).unwrap();
        let field = compute_initial_stress(&mesh, &StressRegime::reference()).unwrap();
        let tan_phi = 30f64.to_radians().tan();
        for (e, tr) in mesh.interfaces.iter().zip(&field.traction) {
            let tau_l = 2.0e6 + tan_phi * tr.sigma_n.max(0.0);
            assert!(
                tr.tau_mag() < tau_l,
                "initial traction outside cone on {} at z = {}",
                e.fault,
                e.centroid[2]
            );
            assert!(tr.sigma_n > 0.0);
        }
    }

    #[test]
    fn f3_and_f4_initial_shear_vanishes() {
        let geom = build_geometry(GeometryParams::default()).unwrap();
        let mesh = generate_mesh(&geom, &reference_layers(), &MeshResolution::coarse()).unwrap();
        let field = compute_initial_stress(&mesh, &StressRegime::reference()).unwrap();
        for (e, tr) in mesh.interfaces.iter().zip(&field.traction) {
            if matches!(e.fault, crate::geomodel::FaultId::F3 | crate::geomodel::FaultId::F4) {
                assert!(tr.tau_mag() < 1e-6, "{}: tau = {}", e.fault, tr.tau_mag());
            }
        }
    }

    proptest! {
        #[test]
        fn traction_reconstructs_stress_vector(
            xx in -50.0e6..50.0e6, yy in -50.0e6..50.0e6, zz in -50.0e6..50.0e6,
            xy in -20.0e6..20.0e6, yz in -20.0e6..20.0e6, zx in -20.0e6..20.0e6,
            az in 0.0f64..std::f64::consts::TAU, polar in 0.01f64..3.13,
        ) {
            let stress = [xx, yy, zz, xy, yz, zx];
            let n = [polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos()];
            let (sn, tau) = resolve_traction(&stress, &n).unwrap();
            let t = [
                stress[0] * n[0] + stress[3] * n[1] + stress[5] * n[2],
                stress[3] * n[0] + stress[1] * n[1] + stress[4] * n[2],
                stress[5] * n[0] + stress[4] * n[1] + stress[2] * n[2],
            ];
            let scale = t.iter().map(|c| c.abs()).fold(1.0, f64::max);
            for k in 0..3 {
                let rebuilt = sn * n[k] + tau[k];
                prop_assert!((rebuilt - t[k]).abs() <= 1e-12 * scale);
            }
        }
    }
}

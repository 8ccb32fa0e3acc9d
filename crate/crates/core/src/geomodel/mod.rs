//! Conceptual domain geometry, layered materials, initial effective-stress
//! field, and the conforming hexahedral mesh with embedded fault interface
//! elements.
//!
//! The domain is a 30x30x5 km box holding two adjacent 2x2 km reservoir
//! blocks at 2 km depth, separated by a central fault F3 and confined by the
//! boundary faults F1/F2 (strike along y) and F4/F5 (strike along x). All
//! faults span 1600-3000 m depth and terminate inside the Zechstein salt and
//! the underburden. Depth is measured positive downward; the z coordinate of
//! a node is its depth in meters.

mod mesh;
mod stress;

pub use mesh::{generate_mesh, GridInfo, Hex, InterfaceElement, Mesh, MeshResolution};
pub use stress::{
    compute_initial_stress, resolve_traction, vertical_effective_stress, InitialTraction,
    StressField,
};

use crate::{Error, Result};

/// Identifier of one of the five faults bounding/splitting the reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FaultId {
    F1,
    F2,
    F3,
    F4,
    F5,
}

impl FaultId {
    pub const ALL: [FaultId; 5] = [FaultId::F1, FaultId::F2, FaultId::F3, FaultId::F4, FaultId::F5];

    pub fn name(self) -> &'static str {
        match self {
            FaultId::F1 => "F1",
            FaultId::F2 => "F2",
            FaultId::F3 => "F3",
            FaultId::F4 => "F4",
            FaultId::F5 => "F5",
        }
    }

    pub fn parse(s: &str) -> Option<FaultId> {
        match s.trim().to_ascii_uppercase().as_str() {
            "F1" => Some(FaultId::F1),
            "F2" => Some(FaultId::F2),
            "F3" => Some(FaultId::F3),
            "F4" => Some(FaultId::F4),
            "F5" => Some(FaultId::F5),
            _ => None,
        }
    }
}

impl std::fmt::Display for FaultId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Geometry settings that vary across scenarios.
#[derive(Debug, Clone, Copy)]
pub struct GeometryParams {
    /// Signed dip of the central fault in degrees; 90 means vertical,
    /// +65 dips toward +x, -65 toward -x. |dip| must lie in [65, 90].
    pub dip_f3: f64,
    /// Downward offset of block 2 relative to block 1, in meters.
    pub block2_offset: f64,
    /// Vertical cell size of the reservoir mesh, used to validate that the
    /// offset conforms to the grid.
    pub cell_z: f64,
}

impl Default for GeometryParams {
    fn default() -> Self {
        GeometryParams { dip_f3: 90.0, block2_offset: 0.0, cell_z: 50.0 }
    }
}

/// Fully populated conceptual-model geometry.
#[derive(Debug, Clone)]
pub struct DomainGeometry {
    pub extent_x: f64,
    pub extent_y: f64,
    pub extent_z: f64,
    pub reservoir_depth_top: f64,
    pub reservoir_thickness: f64,
    pub block_size: f64,
    pub fault_depth_top: f64,
    pub fault_depth_bottom: f64,
    /// Signed dips in degrees (sign = dip direction along +x/-x).
    pub dip_f1: f64,
    pub dip_f2: f64,
    pub dip_f3: f64,
    /// Downward offset of block 2 (m).
    pub block2_offset: f64,
}

impl DomainGeometry {
    /// Horizontal trace positions of the x-normal faults (at the pivot depth).
    pub fn fault_trace_x(&self, fault: FaultId) -> f64 {
        match fault {
            FaultId::F1 => -self.block_size,
            FaultId::F3 => 0.0,
            FaultId::F2 => self.block_size,
            _ => panic!("fault {fault} has no x trace"),
        }
    }

    /// Trace positions of the y-normal faults.
    pub fn fault_trace_y(&self, fault: FaultId) -> f64 {
        match fault {
            FaultId::F4 => -self.block_size / 2.0,
            FaultId::F5 => self.block_size / 2.0,
            _ => panic!("fault {fault} has no y trace"),
        }
    }

    /// Depth about which dipped fault planes pivot. Keeping the pivot at the
    /// fault mid-depth bounds the horizontal excursion of a 65-degree plane
    /// to ~326 m, inside the +-400 m shear band.
    pub fn fault_pivot_depth(&self) -> f64 {
        0.5 * (self.fault_depth_top + self.fault_depth_bottom)
    }

    pub fn signed_dip(&self, fault: FaultId) -> f64 {
        match fault {
            FaultId::F1 => self.dip_f1,
            FaultId::F2 => self.dip_f2,
            FaultId::F3 => self.dip_f3,
            FaultId::F4 | FaultId::F5 => 90.0,
        }
    }

    /// Horizontal position of a dipped fault plane at depth `z`, clamped to
    /// the fault depth range so columns above/below translate rigidly.
    pub fn fault_plane_offset(&self, fault: FaultId, z: f64) -> f64 {
        let dip = self.signed_dip(fault);
        if dip == 90.0 {
            return 0.0;
        }
        let zc = z.clamp(self.fault_depth_top, self.fault_depth_bottom);
        let d = dip.abs().to_radians();
        dip.signum() * (zc - self.fault_pivot_depth()) / d.tan()
    }

    /// Unit normal of a fault plane, oriented from side A (-x or -y) to
    /// side B (+x or +y).
    pub fn fault_normal(&self, fault: FaultId) -> [f64; 3] {
        match fault {
            FaultId::F4 | FaultId::F5 => [0.0, 1.0, 0.0],
            _ => {
                let dip = self.signed_dip(fault);
                let d = dip.abs().to_radians();
                [d.sin(), 0.0, -dip.signum() * d.cos()]
            }
        }
    }

    /// Reservoir depth interval [top, bottom] on the given stratigraphic side
    /// (side B carries the block-2 offset).
    pub fn reservoir_interval(&self, shifted: bool) -> (f64, f64) {
        let o = if shifted { self.block2_offset } else { 0.0 };
        (self.reservoir_depth_top + o, self.reservoir_depth_top + self.reservoir_thickness + o)
    }
}

/// Build the conceptual domain geometry from scenario settings.
pub fn build_geometry(params: GeometryParams) -> Result<DomainGeometry> {
    let dip = params.dip_f3;
    if !(dip.abs() >= 65.0 && dip.abs() <= 90.0) {
        return Err(Error::Geometry(format!(
            "dip_f3 = {dip} deg out of range: |dip| must lie in [65, 90]"
        )));
    }
    let o = params.block2_offset;
    if !(0.0..=200.0).contains(&o) {
        return Err(Error::Geometry(format!("block2_offset = {o} m out of range [0, 200]")));
    }
    let cells = o / params.cell_z;
    if (cells - cells.round()).abs() > 1e-9 {
        return Err(Error::Geometry(format!(
            "block2_offset = {o} m is not a multiple of the vertical cell size {} m",
            params.cell_z
        )));
    }
    Ok(DomainGeometry {
        extent_x: 30_000.0,
        extent_y: 30_000.0,
        extent_z: 5_000.0,
        reservoir_depth_top: 2_000.0,
        reservoir_thickness: 200.0,
        block_size: 2_000.0,
        fault_depth_top: 1_600.0,
        fault_depth_bottom: 3_000.0,
        dip_f1: 85.0,
        dip_f2: -85.0,
        dip_f3: dip,
        block2_offset: o,
    })
}

/// One horizontal layer of the stratigraphic column.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialLayer {
    pub name: String,
    pub depth_top: f64,
    pub depth_bottom: f64,
    /// Mass density (kg/m3).
    pub density: f64,
    /// Young modulus (Pa).
    pub young: f64,
    /// Poisson ratio.
    pub poisson: f64,
}

/// Per-layer geomechanical parameters of the reference column.
pub fn reference_layers() -> Vec<MaterialLayer> {
    vec![
        MaterialLayer {
            name: "overburden".into(),
            depth_top: 0.0,
            depth_bottom: 1600.0,
            density: 2200.0,
            young: 10.0e9,
            poisson: 0.25,
        },
        MaterialLayer {
            name: "zechstein".into(),
            depth_top: 1600.0,
            depth_bottom: 2000.0,
            density: 2100.0,
            young: 40.0e9,
            poisson: 0.30,
        },
        MaterialLayer {
            name: "reservoir".into(),
            depth_top: 2000.0,
            depth_bottom: 2200.0,
            density: 2400.0,
            young: 11.0e9,
            poisson: 0.15,
        },
        MaterialLayer {
            name: "underburden".into(),
            depth_top: 2200.0,
            depth_bottom: 5000.0,
            density: 2600.0,
            young: 30.0e9,
            poisson: 0.20,
        },
    ]
}

/// Index of the reservoir layer in the column returned by
/// [`reference_layers`].
pub const RESERVOIR_LAYER: usize = 2;

/// Shift a layer column downward by the block-2 offset. The reservoir layer
/// and the underburden top move down by `offset`; the Zechstein seal absorbs
/// the throw (its bottom follows the reservoir top) and the column still ends
/// at the domain floor.
pub fn shifted_layers(layers: &[MaterialLayer], offset: f64) -> Vec<MaterialLayer> {
    let mut out = layers.to_vec();
    if offset == 0.0 {
        return out;
    }
    out[RESERVOIR_LAYER - 1].depth_bottom += offset;
    out[RESERVOIR_LAYER].depth_top += offset;
    out[RESERVOIR_LAYER].depth_bottom += offset;
    out[RESERVOIR_LAYER + 1].depth_top += offset;
    out
}

/// Check that layers tile [0, extent_z] without gaps or overlaps.
pub fn validate_layers(layers: &[MaterialLayer], extent_z: f64) -> Result<()> {
    if layers.is_empty() {
        return Err(Error::Geometry("empty layer table".into()));
    }
    if layers[0].depth_top != 0.0 {
        return Err(Error::Geometry("first layer must start at depth 0".into()));
    }
    for w in layers.windows(2) {
        if (w[0].depth_bottom - w[1].depth_top).abs() > 1e-9 {
            return Err(Error::Geometry(format!(
                "layer gap/overlap between {} and {}",
                w[0].name, w[1].name
            )));
        }
    }
    let bottom = layers.last().unwrap().depth_bottom;
    if (bottom - extent_z).abs() > 1e-9 {
        return Err(Error::Geometry(format!(
            "layer column ends at {bottom} m, expected {extent_z} m"
        )));
    }
    Ok(())
}

/// Layer lookup by depth; boundary depths belong to the layer below.
pub fn layer_at(layers: &[MaterialLayer], z: f64) -> usize {
    for (i, l) in layers.iter().enumerate() {
        if z < l.depth_bottom {
            return i;
        }
    }
    layers.len() - 1
}

/// Undisturbed stress regime: confinement ratios, azimuth of the maximum
/// horizontal stress, and the hydrostatic column parameters.
#[derive(Debug, Clone, Copy)]
pub struct StressRegime {
    /// sigma_h / sigma_v.
    pub m1: f64,
    /// sigma_H / sigma_v.
    pub m2: f64,
    /// Rotation of sigma_H from the y axis, degrees. At theta = 0, sigma_h is
    /// normal to F1/F2 (along x) and sigma_H is normal to F4/F5 (along y).
    pub theta: f64,
    /// Water density for the hydrostatic pore-pressure column (kg/m3).
    pub water_density: f64,
    /// Gravitational acceleration (m/s2).
    pub gravity: f64,
}

impl StressRegime {
    pub fn reference() -> Self {
        StressRegime { m1: 0.74, m2: 0.83, theta: 0.0, water_density: 1000.0, gravity: 9.80665 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m1 > 0.0 && self.m1 <= self.m2 && self.m2 <= 1.0) {
            return Err(Error::Geometry(format!(
                "stress regime requires 0 < M1 <= M2 <= 1, got M1 = {}, M2 = {}",
                self.m1, self.m2
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_geometry() {
        let g = build_geometry(GeometryParams::default()).unwrap();
        assert_eq!(g.dip_f3, 90.0);
        assert_eq!(g.block2_offset, 0.0);
        assert_eq!(g.extent_x, 30_000.0);
        assert_eq!(g.reservoir_depth_top, 2000.0);
        assert_eq!(g.fault_depth_top, 1600.0);
        assert_eq!(g.fault_depth_bottom, 3000.0);
    }

    #[test]
    fn scenario_2d_offset_equals_thickness() {
        let g = build_geometry(GeometryParams { block2_offset: 200.0, ..Default::default() })
            .unwrap();
        assert_eq!(g.block2_offset, g.reservoir_thickness);
        let (top, bot) = g.reservoir_interval(true);
        assert_eq!((top, bot), (2200.0, 2400.0));
    }

    #[test]
    fn nonconforming_offset_rejected() {
        let err = build_geometry(GeometryParams {
            block2_offset: 130.0,
            cell_z: 50.0,
            ..Default::default()
        })
        .unwrap_err();
        assert!(err.to_string().contains("multiple"));
    }

    #[test]
    fn out_of_range_dip_rejected() {
        assert!(build_geometry(GeometryParams { dip_f3: 45.0, ..Default::default() }).is_err());
        assert!(build_geometry(GeometryParams { dip_f3: -64.9, ..Default::default() }).is_err());
        assert!(build_geometry(GeometryParams { dip_f3: 65.0, ..Default::default() }).is_ok());
        assert!(build_geometry(GeometryParams { dip_f3: -65.0, ..Default::default() }).is_ok());
    }

    #[test]
    fn layers_match_reference_table() {
        let layers = reference_layers();
        validate_layers(&layers, 5000.0).unwrap();
        let res = &layers[RESERVOIR_LAYER];
        assert_eq!(res.density, 2400.0);
        assert_eq!(res.young, 11.0e9);
        assert_eq!(res.poisson, 0.15);
        assert_eq!(layers[1].young, 40.0e9);
        assert_eq!(layers[3].density, 2600.0);
    }

    #[test]
    fn shifted_column_tiles_domain() {
        let layers = shifted_layers(&reference_layers(), 200.0);
        validate_layers(&layers, 5000.0).unwrap();
        assert_eq!(layers[RESERVOIR_LAYER].depth_top, 2200.0);
        assert_eq!(layers[RESERVOIR_LAYER].depth_bottom, 2400.0);
        assert_eq!(layers[1].depth_bottom, 2200.0);
    }

    #[test]
    fn fault_normals() {
        let g = build_geometry(GeometryParams { dip_f3: 65.0, ..Default::default() }).unwrap();
        let n = g.fault_normal(FaultId::F3);
        // 25 degrees from horizontal
        let angle = n[2].abs().asin();
        assert!((angle - 25f64.to_radians()).abs() < 1e-12);
        let n1 = g.fault_normal(FaultId::F1);
        assert!(n1[0] > 0.99 && n1[2] < 0.0);
        let n2 = g.fault_normal(FaultId::F2);
        assert!(n2[0] > 0.99 && n2[2] > 0.0);
        assert_eq!(g.fault_normal(FaultId::F4), [0.0, 1.0, 0.0]);
    }
}

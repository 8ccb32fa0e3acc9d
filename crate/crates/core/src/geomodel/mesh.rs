//! Structured graded hexahedral meshing with embedded zero-thickness fault
//! interface elements.
//!
//! The grid is uniform (cell_xy x cell_xy x cell_z) in a box around the
//! reservoir blocks and the 1800-2200 m depth band, grading geometrically
//! outward to the domain boundary. Dipped faults are meshed by shearing node
//! columns inside a +-400 m horizontal band around each fault trace, so the
//! fault surfaces stay unions of element faces. Nodes on a fault surface are
//! split into one copy per locally face-connected group of incident cells,
//! which leaves fault tips bonded and resolves fault intersections without
//! special cases.

use super::{layer_at, shifted_layers, DomainGeometry, FaultId, MaterialLayer, RESERVOIR_LAYER};
use crate::{Error, Result};

/// Half-width of the column-shear band around dipped fault traces (m).
const SHEAR_BAND: f64 = 400.0;

/// Cell-size specification for the mesh generator.
#[derive(Debug, Clone, Copy)]
pub struct MeshResolution {
    /// Horizontal cell size in the refined region (m).
    pub cell_xy: f64,
    /// Vertical cell size in the refined depth band (m).
    pub cell_z: f64,
    /// Number of fine cells kept beyond the block footprint before grading.
    pub pad_cells: usize,
    /// Geometric growth ratio of graded cells (>= 1).
    pub grading_ratio: f64,
}

impl Default for MeshResolution {
    fn default() -> Self {
        MeshResolution { cell_xy: 200.0, cell_z: 50.0, pad_cells: 2, grading_ratio: 2.0 }
    }
}

impl MeshResolution {
    /// Coarse resolution used for quick screening runs and tests.
    pub fn coarse() -> Self {
        MeshResolution { cell_xy: 400.0, cell_z: 100.0, pad_cells: 1, grading_ratio: 2.0 }
    }
}

/// One 8-node hexahedron with its material/block tags.
#[derive(Debug, Clone)]
pub struct Hex {
    pub nodes: [usize; 8],
    /// Index into the layer table.
    pub layer: usize,
    /// Reservoir block id: 0 = not a reservoir cell, 1 or 2 otherwise.
    pub block: u8,
    /// True if the cell sits in the block-2 column region and uses the
    /// offset stratigraphy.
    pub shifted: bool,
}

/// Zero-thickness quadrilateral interface element: two geometrically
/// coincident node quadruples tied across a fault surface.
#[derive(Debug, Clone)]
pub struct InterfaceElement {
    pub fault: FaultId,
    /// Nodes on side A (the -x / -y side of the fault).
    pub nodes_a: [usize; 4],
    /// Coincident partner nodes on side B. Entries may equal `nodes_a` at
    /// bonded fault tips.
    pub nodes_b: [usize; 4],
    /// Unit normal, oriented from side A to side B.
    pub normal: [f64; 3],
    /// Unit along-strike tangent.
    pub tangent_strike: [f64; 3],
    /// Unit down-dip tangent (points toward increasing depth).
    pub tangent_dip: [f64; 3],
    /// Element area (m2).
    pub area: f64,
    /// Shape-function area integrals: weights[i] = int N_i dA.
    pub weights: [f64; 4],
    /// Centroid (x, y, depth) in meters.
    pub centroid: [f64; 3],
    /// Adjacent hexahedron on side A / side B.
    pub hex_a: usize,
    pub hex_b: usize,
    /// Depth-stripe index within the fault (0 = shallowest row).
    pub row: usize,
}

/// Grid bookkeeping retained for diagnostics and block lookups.
#[derive(Debug, Clone)]
pub struct GridInfo {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub zs: Vec<f64>,
    pub ix_f1: usize,
    pub ix_f3: usize,
    pub ix_f2: usize,
    pub iy_f4: usize,
    pub iy_f5: usize,
    pub iz_fault_top: usize,
    pub iz_fault_bot: usize,
}

/// Conforming hexahedral mesh with embedded fault interface elements.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<[f64; 3]>,
    pub hexes: Vec<Hex>,
    pub interfaces: Vec<InterfaceElement>,
    /// Nodes with all three displacement components fixed (outer lateral
    /// surfaces and the domain bottom).
    pub fixed_nodes: Vec<usize>,
    pub grid: GridInfo,
    /// Layer tables for the reference column and the offset column.
    pub layers: Vec<MaterialLayer>,
    pub layers_shifted: Vec<MaterialLayer>,
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_hexes(&self) -> usize {
        self.hexes.len()
    }

    pub fn n_interfaces(&self) -> usize {
        self.interfaces.len()
    }

    /// Interface-element indices belonging to one fault.
    pub fn fault_elements(&self, fault: FaultId) -> Vec<usize> {
        self.interfaces
            .iter()
            .enumerate()
            .filter(|(_, e)| e.fault == fault)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn layer_table(&self, shifted: bool) -> &[MaterialLayer] {
        if shifted {
            &self.layers_shifted
        } else {
            &self.layers
        }
    }
}

/// Geometric fill of a segment of length `len`, growing away from a region of
/// cell size `h0` with ratio at most `rmax`. Returns cell sizes ordered from
/// the fine end outward; their sum is exactly `len`.
fn geometric_fill(len: f64, h0: f64, rmax: f64) -> Vec<f64> {
    assert!(len > 0.0 && h0 > 0.0 && rmax >= 1.0);
    if len <= h0 {
        return vec![len];
    }
    let sum = |r: f64, n: usize| -> f64 {
        let mut s = 0.0;
        let mut p = 1.0;
        for _ in 0..n {
            p *= r;
            s += p;
        }
        h0 * s
    };
    let mut n = 1;
    loop {
        if sum(rmax, n) >= len || n > 10_000 {
            break;
        }
        n += 1;
    }
    // bisect for the ratio that fills the segment with n cells
    let (mut lo, mut hi) = (1e-9, rmax);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sum(mid, n) < len {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let mut sizes: Vec<f64> = Vec::with_capacity(n);
    let mut p = 1.0;
    for _ in 0..n {
        p *= r;
        sizes.push(h0 * p);
    }
    // rescale so the sizes sum to len exactly up to rounding
    let total: f64 = sizes.iter().sum();
    for s in &mut sizes {
        *s *= len / total;
    }
    sizes
}

/// Symmetric horizontal axis: uniform spacing `h` on [-fine_half, fine_half],
/// geometric grading out to +-half_extent.
fn horizontal_axis(half_extent: f64, fine_half: f64, h: f64, rmax: f64) -> Vec<f64> {
    let n_fine = (2.0 * fine_half / h).round() as usize;
    let uniform: Vec<f64> = (0..=n_fine).map(|k| -fine_half + k as f64 * h).collect();
    let flank = geometric_fill(half_extent - fine_half, h, rmax);
    let mut pos = fine_half;
    let mut upper: Vec<f64> = Vec::with_capacity(flank.len());
    for s in &flank {
        pos += s;
        upper.push(pos);
    }
    if let Some(last) = upper.last_mut() {
        *last = half_extent;
    }
    let mut out: Vec<f64> = upper.iter().rev().map(|&x| -x).collect();
    out.extend_from_slice(&uniform);
    out.extend_from_slice(&upper);
    out
}

/// Vertical axis from the surface to the domain bottom: uniform `cell_z` in
/// the refined band [1800, 2200 + offset], graded segments anchored at the
/// fault top (1600 m), fault bottom (3000 m) and the domain floor.
fn vertical_axis(geom: &DomainGeometry, cell_z: f64, rmax: f64) -> Vec<f64> {
    let fine_top = 1800.0;
    let fine_bot = 2200.0 + geom.block2_offset;
    let mut zs: Vec<f64> = Vec::new();

    // [0, 1600]: two stacked fills going up from the refined band
    let seg_a = geometric_fill(fine_top - geom.fault_depth_top, cell_z, rmax);
    let seg_b = geometric_fill(geom.fault_depth_top, *seg_a.last().unwrap(), rmax);
    let mut z = fine_top;
    let mut above: Vec<f64> = vec![fine_top];
    for s in seg_a.iter() {
        z -= s;
        above.push(z);
    }
    *above.last_mut().unwrap() = geom.fault_depth_top;
    z = geom.fault_depth_top;
    for s in seg_b.iter() {
        z -= s;
        above.push(z);
    }
    *above.last_mut().unwrap() = 0.0;
    above.reverse();
    zs.extend_from_slice(&above);

    // refined band
    let n_fine = ((fine_bot - fine_top) / cell_z).round() as usize;
    for k in 1..=n_fine {
        zs.push(fine_top + k as f64 * cell_z);
    }

    // [fine_bot, 3000] and [3000, 5000]
    let seg_c = geometric_fill(geom.fault_depth_bottom - fine_bot, cell_z, rmax);
    z = fine_bot;
    for s in seg_c.iter() {
        z += s;
        zs.push(z);
    }
    let fixup = zs.len() - 1;
    zs[fixup] = geom.fault_depth_bottom;
    let seg_d = geometric_fill(geom.extent_z - geom.fault_depth_bottom, *seg_c.last().unwrap(), rmax);
    z = geom.fault_depth_bottom;
    for s in seg_d.iter() {
        z += s;
        zs.push(z);
    }
    let fixup = zs.len() - 1;
    zs[fixup] = geom.extent_z;
    zs
}

fn find_coord(coords: &[f64], value: f64) -> Result<usize> {
    coords
        .iter()
        .position(|&c| (c - value).abs() < 1e-6)
        .ok_or_else(|| Error::Mesh(format!("no gridline at coordinate {value}")))
}

/// Local corner offsets of the standard 8-node hexahedron ordering.
const CORNER_OFFSETS: [(usize, usize, usize); 8] = [
    (0, 0, 0),
    (1, 0, 0),
    (1, 1, 0),
    (0, 1, 0),
    (0, 0, 1),
    (1, 0, 1),
    (1, 1, 1),
    (0, 1, 1),
];

fn corner_index(dx: usize, dy: usize, dz: usize) -> usize {
    CORNER_OFFSETS.iter().position(|&c| c == (dx, dy, dz)).unwrap()
}

struct FaultFaces {
    /// x-normal fault faces keyed by (plane index, cell iy, cell iz).
    x_faces: Vec<bool>,
    /// y-normal fault faces keyed by (cell ix, plane index, cell iz).
    y_faces: Vec<bool>,
    nx: usize,
    ny: usize,
    nz: usize,
}

impl FaultFaces {
    fn new(nx: usize, ny: usize, nz: usize) -> Self {
        FaultFaces {
            x_faces: vec![false; (nx + 1) * ny * nz],
            y_faces: vec![false; nx * (ny + 1) * nz],
            nx,
            ny,
            nz,
        }
    }

    fn x_idx(&self, p: usize, cy: usize, cz: usize) -> usize {
        p + (self.nx + 1) * (cy + self.ny * cz)
    }

    fn y_idx(&self, cx: usize, q: usize, cz: usize) -> usize {
        cx + self.nx * (q + (self.ny + 1) * cz)
    }

    fn mark_x(&mut self, p: usize, cy: usize, cz: usize) {
        let i = self.x_idx(p, cy, cz);
        self.x_faces[i] = true;
    }

    fn mark_y(&mut self, cx: usize, q: usize, cz: usize) {
        let i = self.y_idx(cx, q, cz);
        self.y_faces[i] = true;
    }

    fn is_x(&self, p: usize, cy: usize, cz: usize) -> bool {
        self.x_faces[self.x_idx(p, cy, cz)]
    }

    fn is_y(&self, cx: usize, q: usize, cz: usize) -> bool {
        self.y_faces[self.y_idx(cx, q, cz)]
    }
}

/// Generate the conforming mesh for a geometry at the given resolution.
pub fn generate_mesh(
    geom: &DomainGeometry,
    layers: &[MaterialLayer],
    res: &MeshResolution,
) -> Result<Mesh> {
    let h = res.cell_xy;
    let hz = res.cell_z;
    if h <= 0.0 || hz <= 0.0 {
        return Err(Error::Mesh("cell sizes must be positive".into()));
    }
    if res.grading_ratio < 1.0 {
        return Err(Error::Mesh("grading ratio must be >= 1".into()));
    }
    let div = |len: f64, step: f64| (len / step - (len / step).round()).abs() < 1e-9;
    if !div(geom.block_size, h) {
        return Err(Error::Mesh(format!(
            "cell_xy = {h} m does not divide the block size {} m",
            geom.block_size
        )));
    }
    if !div(geom.reservoir_thickness, hz) {
        return Err(Error::Mesh(format!(
            "cell_z = {hz} m does not divide the reservoir thickness {} m",
            geom.reservoir_thickness
        )));
    }
    if !div(geom.block2_offset, hz) {
        return Err(Error::Mesh(format!(
            "block2_offset = {} m does not conform to cell_z = {hz} m",
            geom.block2_offset
        )));
    }

    let pad = res.pad_cells as f64 * h;
    let xs = horizontal_axis(geom.extent_x / 2.0, geom.block_size + pad, h, res.grading_ratio);
    let ys = horizontal_axis(geom.extent_y / 2.0, geom.block_size / 2.0 + pad, h, res.grading_ratio);
    let zs = vertical_axis(geom, hz, res.grading_ratio);

    let grid = GridInfo {
        ix_f1: find_coord(&xs, -geom.block_size)?,
        ix_f3: find_coord(&xs, 0.0)?,
        ix_f2: find_coord(&xs, geom.block_size)?,
        iy_f4: find_coord(&ys, -geom.block_size / 2.0)?,
        iy_f5: find_coord(&ys, geom.block_size / 2.0)?,
        iz_fault_top: find_coord(&zs, geom.fault_depth_top)?,
        iz_fault_bot: find_coord(&zs, geom.fault_depth_bottom)?,
        xs,
        ys,
        zs,
    };
    let (nx, ny, nz) = (grid.xs.len() - 1, grid.ys.len() - 1, grid.zs.len() - 1);
    let (nxn, nyn) = (nx + 1, ny + 1);
    let node_id = |ix: usize, iy: usize, iz: usize| ix + nxn * (iy + nyn * iz);
    let cell_id = |cx: usize, cy: usize, cz: usize| cx + nx * (cy + ny * cz);

    // node coordinates with column shear around dipped faults
    let x_faults = [FaultId::F1, FaultId::F3, FaultId::F2];
    let mut nodes: Vec<[f64; 3]> = Vec::with_capacity(nxn * nyn * (nz + 1));
    for iz in 0..=nz {
        let z = grid.zs[iz];
        for iy in 0..=ny {
            let y = grid.ys[iy];
            for ix in 0..=nx {
                let x0 = grid.xs[ix];
                let mut x = x0;
                for &f in &x_faults {
                    if geom.signed_dip(f) != 90.0 {
                        let trace = geom.fault_trace_x(f);
                        let w = 1.0 - (x0 - trace).abs() / SHEAR_BAND;
                        if w > 0.0 {
                            x += w * geom.fault_plane_offset(f, z);
                        }
                    }
                }
                nodes.push([x, y, z]);
            }
        }
    }

    // fault faces
    let mut faces = FaultFaces::new(nx, ny, nz);
    let (z0, z1) = (grid.iz_fault_top, grid.iz_fault_bot);
    for cz in z0..z1 {
        for cy in grid.iy_f4..grid.iy_f5 {
            faces.mark_x(grid.ix_f1, cy, cz);
            faces.mark_x(grid.ix_f3, cy, cz);
            faces.mark_x(grid.ix_f2, cy, cz);
        }
        for cx in grid.ix_f1..grid.ix_f2 {
            faces.mark_y(cx, grid.iy_f4, cz);
            faces.mark_y(cx, grid.iy_f5, cz);
        }
    }

    // cell connectivity
    let mut cell_nodes: Vec<[usize; 8]> = Vec::with_capacity(nx * ny * nz);
    for cz in 0..nz {
        for cy in 0..ny {
            for cx in 0..nx {
                let mut conn = [0usize; 8];
                for (k, &(dx, dy, dz)) in CORNER_OFFSETS.iter().enumerate() {
                    conn[k] = node_id(cx + dx, cy + dy, cz + dz);
                }
                cell_nodes.push(conn);
            }
        }
    }

    // split nodes on fault surfaces into face-connected components
    split_fault_nodes(&mut nodes, &mut cell_nodes, &faces, nx, ny, nz, node_id, cell_id);

    // hex tags: material layer and reservoir block
    let layers_shifted = shifted_layers(layers, geom.block2_offset);
    let mut hexes: Vec<Hex> = Vec::with_capacity(cell_nodes.len());
    for cz in 0..nz {
        let zc = 0.5 * (grid.zs[cz] + grid.zs[cz + 1]);
        for cy in 0..ny {
            for cx in 0..nx {
                let shifted =
                    geom.block2_offset > 0.0 && cx >= grid.ix_f3 && cx < grid.ix_f2;
                let table: &[MaterialLayer] =
                    if shifted { &layers_shifted } else { layers };
                let layer = layer_at(table, zc);
                let in_y = cy >= grid.iy_f4 && cy < grid.iy_f5;
                let block = if layer == RESERVOIR_LAYER && in_y {
                    if cx >= grid.ix_f1 && cx < grid.ix_f3 {
                        1
                    } else if cx >= grid.ix_f3 && cx < grid.ix_f2 {
                        2
                    } else {
                        0
                    }
                } else {
                    0
                };
                hexes.push(Hex {
                    nodes: cell_nodes[cell_id(cx, cy, cz)],
                    layer,
                    block,
                    shifted,
                });
            }
        }
    }

    // interface elements
    let mut interfaces: Vec<InterfaceElement> = Vec::new();
    for cz in z0..z1 {
        for cy in grid.iy_f4..grid.iy_f5 {
            for (fault, p) in
                [(FaultId::F1, grid.ix_f1), (FaultId::F3, grid.ix_f3), (FaultId::F2, grid.ix_f2)]
            {
                interfaces.push(build_x_interface(
                    &nodes, &cell_nodes, fault, p, cy, cz, z0, cell_id,
                ));
            }
        }
        for cx in grid.ix_f1..grid.ix_f2 {
            for (fault, q) in [(FaultId::F4, grid.iy_f4), (FaultId::F5, grid.iy_f5)] {
                interfaces.push(build_y_interface(
                    &nodes, &cell_nodes, fault, cx, q, cz, z0, cell_id,
                ));
            }
        }
    }
    interfaces.sort_by(|a, b| {
        (a.fault, a.row, (a.centroid[0], a.centroid[1]))
            .partial_cmp(&(b.fault, b.row, (b.centroid[0], b.centroid[1])))
            .unwrap()
    });

    // fixed boundary nodes: outer lateral faces and bottom; top surface free
    let mut fixed_nodes: Vec<usize> = Vec::new();
    for iz in 0..=nz {
        for iy in 0..=ny {
            for ix in 0..=nx {
                if ix == 0 || ix == nx || iy == 0 || iy == ny || iz == nz {
                    fixed_nodes.push(node_id(ix, iy, iz));
                }
            }
        }
    }

    let mesh = Mesh {
        nodes,
        hexes,
        interfaces,
        fixed_nodes,
        grid,
        layers: layers.to_vec(),
        layers_shifted,
    };
    check_hex_volumes(&mesh)?;
    Ok(mesh)
}

/// Split nodes that lie on fault surfaces: incident cells are grouped by
/// face-connectivity (fault faces do not connect); each group beyond the
/// first gets its own copy of the node.
#[allow(clippy::too_many_arguments)]
fn split_fault_nodes(
    nodes: &mut Vec<[f64; 3]>,
    cell_nodes: &mut [[usize; 8]],
    faces: &FaultFaces,
    nx: usize,
    ny: usize,
    nz: usize,
    node_id: impl Fn(usize, usize, usize) -> usize,
    cell_id: impl Fn(usize, usize, usize) -> usize,
) {
    for iz in 0..=nz {
        for iy in 0..=ny {
            for ix in 0..=nx {
                // incident cells
                let mut cells: Vec<(usize, usize, usize)> = Vec::with_capacity(8);
                for dz in 0..2usize {
                    for dy in 0..2usize {
                        for dx in 0..2usize {
                            if ix >= dx && iy >= dy && iz >= dz {
                                let (cx, cy, cz) = (ix - dx, iy - dy, iz - dz);
                                if cx < nx && cy < ny && cz < nz {
                                    cells.push((cx, cy, cz));
                                }
                            }
                        }
                    }
                }
                if cells.len() < 2 {
                    continue;
                }
                // union cells sharing a non-fault face
                let mut parent: Vec<usize> = (0..cells.len()).collect();
                fn find(parent: &mut Vec<usize>, i: usize) -> usize {
                    if parent[i] != i {
                        let r = find(parent, parent[i]);
                        parent[i] = r;
                    }
                    parent[i]
                }
                for a in 0..cells.len() {
                    for b in (a + 1)..cells.len() {
                        let (ax, ay, az) = cells[a];
                        let (bx, by, bz) = cells[b];
                        let dx = ax.abs_diff(bx);
                        let dy = ay.abs_diff(by);
                        let dz = az.abs_diff(bz);
                        if dx + dy + dz != 1 {
                            continue;
                        }
                        let is_fault = if dx == 1 {
                            faces.is_x(ax.max(bx), ay, az)
                        } else if dy == 1 {
                            faces.is_y(ax, ay.max(by), az)
                        } else {
                            false // horizontal faces are never fault faces
                        };
                        if !is_fault {
                            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                            if ra != rb {
                                parent[rb.max(ra)] = rb.min(ra);
                            }
                        }
                    }
                }
                // group components; component containing the smallest cell id
                // keeps the original node
                let mut roots: Vec<usize> = Vec::new();
                for i in 0..cells.len() {
                    let r = find(&mut parent, i);
                    if !roots.contains(&r) {
                        roots.push(r);
                    }
                }
                if roots.len() < 2 {
                    continue;
                }
                let nid = node_id(ix, iy, iz);
                let coord = nodes[nid];
                for &root in roots.iter().skip(1) {
                    let dup = nodes.len();
                    nodes.push(coord);
                    for (i, &(cx, cy, cz)) in cells.iter().enumerate() {
                        if find(&mut parent, i) == root {
                            let conn = &mut cell_nodes[cell_id(cx, cy, cz)];
                            let dx = ix - cx;
                            let dy = iy - cy;
                            let dz = iz - cz;
                            conn[corner_index(dx, dy, dz)] = dup;
                        }
                    }
                }
            }
        }
    }
}

/// Quad geometry helper: area, shape-function weights, unit normal and
/// centroid from the four side-A corner positions, by 2x2 Gauss quadrature
/// on the bilinear map.
fn quad_geometry(p: &[[f64; 3]; 4]) -> (f64, [f64; 4], [f64; 3], [f64; 3]) {
    let g = 1.0 / 3f64.sqrt();
    let gauss = [(-g, -g), (g, -g), (g, g), (-g, g)];
    let mut area = 0.0;
    let mut weights = [0.0; 4];
    let mut normal = [0.0; 3];
    for &(xi, eta) in &gauss {
        let n = [
            0.25 * (1.0 - xi) * (1.0 - eta),
            0.25 * (1.0 + xi) * (1.0 - eta),
            0.25 * (1.0 + xi) * (1.0 + eta),
            0.25 * (1.0 - xi) * (1.0 + eta),
        ];
        let dxi = [
            -0.25 * (1.0 - eta),
            0.25 * (1.0 - eta),
            0.25 * (1.0 + eta),
            -0.25 * (1.0 + eta),
        ];
        let deta = [
            -0.25 * (1.0 - xi),
            -0.25 * (1.0 + xi),
            0.25 * (1.0 + xi),
            0.25 * (1.0 - xi),
        ];
        let mut t1 = [0.0; 3];
        let mut t2 = [0.0; 3];
        for i in 0..4 {
            for k in 0..3 {
                t1[k] += dxi[i] * p[i][k];
                t2[k] += deta[i] * p[i][k];
            }
        }
        let cx = [
            t1[1] * t2[2] - t1[2] * t2[1],
            t1[2] * t2[0] - t1[0] * t2[2],
            t1[0] * t2[1] - t1[1] * t2[0],
        ];
        let da = (cx[0] * cx[0] + cx[1] * cx[1] + cx[2] * cx[2]).sqrt();
        area += da;
        for i in 0..4 {
            weights[i] += n[i] * da;
        }
        for k in 0..3 {
            normal[k] += cx[k];
        }
    }
    let nrm = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]).sqrt();
    for k in 0..3 {
        normal[k] /= nrm;
    }
    let centroid = [
        0.25 * (p[0][0] + p[1][0] + p[2][0] + p[3][0]),
        0.25 * (p[0][1] + p[1][1] + p[2][1] + p[3][1]),
        0.25 * (p[0][2] + p[1][2] + p[2][2] + p[3][2]),
    ];
    (area, weights, normal, centroid)
}

#[allow(clippy::too_many_arguments)]
fn build_x_interface(
    nodes: &[[f64; 3]],
    cell_nodes: &[[usize; 8]],
    fault: FaultId,
    p: usize,
    cy: usize,
    cz: usize,
    z_row0: usize,
    cell_id: impl Fn(usize, usize, usize) -> usize,
) -> InterfaceElement {
    let hex_a = cell_id(p - 1, cy, cz);
    let hex_b = cell_id(p, cy, cz);
    // face corners ordered so the quad normal points from side A to side B (+x)
    let corners = [(0usize, 0usize), (1, 0), (1, 1), (0, 1)]; // (dy, dz)
    let mut nodes_a = [0usize; 4];
    let mut nodes_b = [0usize; 4];
    for (k, &(dy, dz)) in corners.iter().enumerate() {
        nodes_a[k] = cell_nodes[hex_a][corner_index(1, dy, dz)];
        nodes_b[k] = cell_nodes[hex_b][corner_index(0, dy, dz)];
    }
    let pos = [nodes[nodes_a[0]], nodes[nodes_a[1]], nodes[nodes_a[2]], nodes[nodes_a[3]]];
    let (area, weights, normal, centroid) = quad_geometry(&pos);
    let strike = [0.0, 1.0, 0.0];
    // down-dip tangent: n x strike points toward increasing depth
    let dip = [
        normal[1] * strike[2] - normal[2] * strike[1],
        normal[2] * strike[0] - normal[0] * strike[2],
        normal[0] * strike[1] - normal[1] * strike[0],
    ];
    debug_assert!(dip[2] > 0.0);
    InterfaceElement {
        fault,
        nodes_a,
        nodes_b,
        normal,
        tangent_strike: strike,
        tangent_dip: dip,
        area,
        weights,
        centroid,
        hex_a,
        hex_b,
        row: cz - z_row0,
    }
}

#[allow(clippy::too_many_arguments)]
fn build_y_interface(
    nodes: &[[f64; 3]],
    cell_nodes: &[[usize; 8]],
    fault: FaultId,
    cx: usize,
    q: usize,
    cz: usize,
    z_row0: usize,
    cell_id: impl Fn(usize, usize, usize) -> usize,
) -> InterfaceElement {
    let hex_a = cell_id(cx, q - 1, cz);
    let hex_b = cell_id(cx, q, cz);
    // ordered for +y normal: (dx, dz) = (0,0), (0,1), (1,1), (1,0)
    let corners = [(0usize, 0usize), (0, 1), (1, 1), (1, 0)];
    let mut nodes_a = [0usize; 4];
    let mut nodes_b = [0usize; 4];
    for (k, &(dx, dz)) in corners.iter().enumerate() {
        nodes_a[k] = cell_nodes[hex_a][corner_index(dx, 1, dz)];
        nodes_b[k] = cell_nodes[hex_b][corner_index(dx, 0, dz)];
    }
    let pos = [nodes[nodes_a[0]], nodes[nodes_a[1]], nodes[nodes_a[2]], nodes[nodes_a[3]]];
    let (area, weights, normal, centroid) = quad_geometry(&pos);
    InterfaceElement {
        fault,
        nodes_a,
        nodes_b,
        normal,
        tangent_strike: [1.0, 0.0, 0.0],
        tangent_dip: [0.0, 0.0, 1.0],
        area,
        weights,
        centroid,
        hex_a,
        hex_b,
        row: cz - z_row0,
    }
}

/// Reject meshes with non-positive hexahedron volumes (inverted cells after
/// shearing or offset).
fn check_hex_volumes(mesh: &Mesh) -> Result<()> {
    for (i, hex) in mesh.hexes.iter().enumerate() {
        let p: Vec<[f64; 3]> = hex.nodes.iter().map(|&n| mesh.nodes[n]).collect();
        // triple product of the edge vectors at corner 0
        let e = |a: usize, b: usize| {
            [p[b][0] - p[a][0], p[b][1] - p[a][1], p[b][2] - p[a][2]]
        };
        let (u, v, w) = (e(0, 1), e(0, 3), e(0, 4));
        let det = u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
            + u[2] * (v[0] * w[1] - v[1] * w[0]);
        if det <= 0.0 {
            return Err(Error::Mesh(format!("degenerate hexahedron {i} (corner volume {det})")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomodel::{build_geometry, reference_layers, GeometryParams};
    use approx::assert_relative_eq;

    fn reference_mesh(res: MeshResolution) -> Mesh {
        let geom = build_geometry(GeometryParams::default()).unwrap();
        generate_mesh(&geom, &reference_layers(), &res).unwrap()
    }

    #[test]
    fn geometric_fill_respects_ratio_and_length() {
        let sizes = geometric_fill(13_000.0, 200.0, 2.0);
        let total: f64 = sizes.iter().sum();
        assert_relative_eq!(total, 13_000.0, max_relative = 1e-12);
        for w in sizes.windows(2) {
            assert!(w[1] / w[0] <= 2.0 + 1e-9);
        }
        assert!(sizes[0] <= 2.0 * 200.0 + 1e-9);
    }

    #[test]
    fn reference_mesh_reservoir_cell_count() {
        // 2000/200 x 2000/200 x 200/50 hexahedra per block in-reservoir
        let mesh = reference_mesh(MeshResolution::default());
        let b1 = mesh.hexes.iter().filter(|h| h.block == 1).count();
        let b2 = mesh.hexes.iter().filter(|h| h.block == 2).count();
        assert_eq!(b1, 10 * 10 * 4);
        assert_eq!(b2, 10 * 10 * 4);
    }

    #[test]
    fn interface_nodes_coincide() {
        let mesh = reference_mesh(MeshResolution::coarse());
        for e in &mesh.interfaces {
            for k in 0..4 {
                let a = mesh.nodes[e.nodes_a[k]];
                let b = mesh.nodes[e.nodes_b[k]];
                for c in 0..3 {
                    assert!((a[c] - b[c]).abs() < 1e-9);
                }
            }
        }
        // interior (non-tip) elements are genuinely split
        let split = mesh
            .interfaces
            .iter()
            .filter(|e| e.nodes_a.iter().zip(&e.nodes_b).any(|(a, b)| a != b))
            .count();
        assert!(split == mesh.interfaces.len());
    }

    #[test]
    fn reflection_symmetry_reference() {
        // offset 0, vertical F3: node set maps onto itself under x -> -x
        let mesh = reference_mesh(MeshResolution::coarse());
        let mut keys: Vec<[i64; 3]> = mesh
            .nodes
            .iter()
            .map(|p| [(p[0] * 1e6).round() as i64, (p[1] * 1e6).round() as i64, (p[2] * 1e6).round() as i64])
            .collect();
        keys.sort_unstable();
        let mut mirrored: Vec<[i64; 3]> = mesh
            .nodes
            .iter()
            .map(|p| {
                [(-p[0] * 1e6).round() as i64, (p[1] * 1e6).round() as i64, (p[2] * 1e6).round() as i64]
            })
            .collect();
        mirrored.sort_unstable();
        assert_eq!(keys, mirrored);
    }

    #[test]
    fn fault_area_matches_analytic_for_vertical_faults() {
        let mesh = reference_mesh(MeshResolution::default());
        let height = 3000.0 - 1600.0;
        for (fault, expect) in [
            (FaultId::F3, 2000.0 * height),
            (FaultId::F4, 4000.0 * height),
            (FaultId::F5, 4000.0 * height),
        ] {
            let total: f64 =
                mesh.fault_elements(fault).iter().map(|&i| mesh.interfaces[i].area).sum();
            assert!(
                (total - expect).abs() / expect < 1e-3,
                "{fault}: area {total} vs analytic {expect}"
            );
        }
    }

    #[test]
    fn dipped_f3_normals() {
        let geom = build_geometry(GeometryParams { dip_f3: 65.0, ..Default::default() }).unwrap();
        let mesh = generate_mesh(&geom, &reference_layers(), &MeshResolution::default()).unwrap();
        let expect = geom.fault_normal(FaultId::F3);
        for &i in &mesh.fault_elements(FaultId::F3) {
            let n = mesh.interfaces[i].normal;
            let dot: f64 = n.iter().zip(&expect).map(|(a, b)| a * b).sum();
            assert!(dot > 1.0 - 1e-9, "normal {n:?} vs {expect:?}");
            let horiz_angle = n[2].abs().asin();
            assert!((horiz_angle - 25f64.to_radians()).abs() < 1e-9);
        }
    }

    #[test]
    fn offset_mesh_conforms_and_shifts_reservoir() {
        let geom = build_geometry(GeometryParams { block2_offset: 200.0, ..Default::default() })
            .unwrap();
        let mesh = generate_mesh(&geom, &reference_layers(), &MeshResolution::default()).unwrap();
        let zmin = mesh
            .hexes
            .iter()
            .filter(|h| h.block == 2)
            .map(|h| mesh.nodes[h.nodes[0]][2])
            .fold(f64::INFINITY, f64::min);
        assert_relative_eq!(zmin, 2200.0, epsilon = 1e-9);
        let b2 = mesh.hexes.iter().filter(|h| h.block == 2).count();
        assert_eq!(b2, 10 * 10 * 4);
    }

    #[test]
    fn interface_weights_sum_to_area() {
        let mesh = reference_mesh(MeshResolution::coarse());
        for e in &mesh.interfaces {
            let sum: f64 = e.weights.iter().sum();
            assert_relative_eq!(sum, e.area, max_relative = 1e-12);
            assert!(e.area > 0.0);
        }
    }
}

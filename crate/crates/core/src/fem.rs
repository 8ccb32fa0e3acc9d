//! Linear-elastic finite-element core: trilinear hexahedra with full 2x2x2
//! Gauss quadrature, equivalent nodal forces from pore-pressure changes, and
//! displacement boundary conditions.
//!
//! The continuum works tension-positive. Depletion (dp < 0) therefore
//! assembles nodal forces that pull the loaded region inward. Effective
//! stress increments are C : eps; the conversion to the compression-positive
//! contact convention happens once, at traction resolution.

use crate::geomodel::Mesh;
use crate::{Error, Result};

/// Per-element elastic constants plus the Biot coefficient.
#[derive(Debug, Clone)]
pub struct ElasticProperties {
    pub young: Vec<f64>,
    pub poisson: Vec<f64>,
    /// Biot effective-stress coefficient, applied uniformly.
    pub biot_alpha: f64,
}

impl ElasticProperties {
    /// Material constants from the mesh layer tags.
    pub fn from_mesh(mesh: &Mesh) -> Self {
        let mut young = Vec::with_capacity(mesh.hexes.len());
        let mut poisson = Vec::with_capacity(mesh.hexes.len());
        for hex in &mesh.hexes {
            let layer = &mesh.layers[hex.layer];
            young.push(layer.young);
            poisson.push(layer.poisson);
        }
        ElasticProperties { young, poisson, biot_alpha: 1.0 }
    }

    /// Override the Young modulus of every element in one layer.
    pub fn set_layer_young(&mut self, mesh: &Mesh, layer: usize, value: f64) {
        for (i, hex) in mesh.hexes.iter().enumerate() {
            if hex.layer == layer {
                self.young[i] = value;
            }
        }
    }

    /// Scale the Young modulus of every element in one layer.
    pub fn scale_layer_young(&mut self, mesh: &Mesh, layer: usize, factor: f64) {
        for (i, hex) in mesh.hexes.iter().enumerate() {
            if hex.layer == layer {
                self.young[i] *= factor;
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (&e, &nu) in self.young.iter().zip(&self.poisson) {
            if e <= 0.0 || !(0.0..0.5).contains(&nu) {
                return Err(Error::Mesh(format!("invalid elastic constants E = {e}, nu = {nu}")));
            }
        }
        if !(0.0 < self.biot_alpha && self.biot_alpha <= 1.0) {
            return Err(Error::Mesh(format!("biot_alpha = {} outside (0, 1]", self.biot_alpha)));
        }
        Ok(())
    }
}

/// Node-dof numbering with fixed boundary dofs eliminated.
#[derive(Debug, Clone)]
pub struct DofMap {
    /// 3*node + comp -> free-dof index, or None when constrained.
    index: Vec<Option<usize>>,
    pub n_free: usize,
    pub n_fixed: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let mut fixed = vec![false; mesh.nodes.len()];
        for &n in &mesh.fixed_nodes {
            fixed[n] = true;
        }
        let mut index = vec![None; 3 * mesh.nodes.len()];
        let mut next = 0usize;
        for (n, &fx) in fixed.iter().enumerate() {
            if !fx {
                for c in 0..3 {
                    index[3 * n + c] = Some(next);
                    next += 1;
                }
            }
        }
        let n_fixed = 3 * mesh.nodes.len() - next;
        DofMap { index, n_free: next, n_fixed }
    }

    #[inline]
    pub fn dof(&self, node: usize, comp: usize) -> Option<usize> {
        self.index[3 * node + comp]
    }
}

/// Upper-triangular compressed sparse column matrix (symmetric storage).
#[derive(Debug, Clone)]
pub struct CscUpper {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CscUpper {
    /// Build from (row, col, value) triplets with row <= col, summing
    /// duplicates.
    pub fn from_triplets(n: usize, mut trips: Vec<(usize, usize, f64)>) -> Self {
        trips.sort_unstable_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx: Vec<usize> = Vec::with_capacity(trips.len());
        let mut values: Vec<f64> = Vec::with_capacity(trips.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &trips {
            debug_assert!(r <= c);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        CscUpper { n, col_ptr, row_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// y = A x with the symmetric completion of the stored upper triangle.
    pub fn sym_matvec(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        for c in 0..self.n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[k];
                let v = self.values[k];
                y[r] += v * x[c];
                if r != c {
                    y[c] += v * x[r];
                }
            }
        }
    }

    pub fn mean_abs_diag(&self) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for c in 0..self.n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                if self.row_idx[k] == c {
                    sum += self.values[k].abs();
                    count += 1;
                }
            }
        }
        if count == 0 {
            1.0
        } else {
            sum / count as f64
        }
    }
}

/// Assembled stiffness over the free dofs, retaining the dof numbering.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub stiffness: CscUpper,
    pub dofs: DofMap,
}

const GAUSS_1D: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

/// Corner reference coordinates matching the mesh connectivity order.
const XI: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

/// Shape-function gradients in physical coordinates and the Jacobian
/// determinant at a reference point.
fn grads_at(coords: &[[f64; 3]; 8], xi: f64, eta: f64, zeta: f64) -> Result<([[f64; 3]; 8], f64)> {
    let mut dn = [[0.0; 3]; 8]; // reference gradients
    for (i, x) in XI.iter().enumerate() {
        let (a, b, c) = (x[0], x[1], x[2]);
        dn[i] = [
            0.125 * a * (1.0 + b * eta) * (1.0 + c * zeta),
            0.125 * b * (1.0 + a * xi) * (1.0 + c * zeta),
            0.125 * c * (1.0 + a * xi) * (1.0 + b * eta),
        ];
    }
    // J[r][c] = d x_c / d xi_r
    let mut j = [[0.0; 3]; 3];
    for i in 0..8 {
        for r in 0..3 {
            for c in 0..3 {
                j[r][c] += dn[i][r] * coords[i][c];
            }
        }
    }
    let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
        - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
    if det <= 0.0 {
        return Err(Error::Mesh(format!("inverted element Jacobian (det = {det})")));
    }
    let inv = [
        [
            (j[1][1] * j[2][2] - j[1][2] * j[2][1]) / det,
            (j[0][2] * j[2][1] - j[0][1] * j[2][2]) / det,
            (j[0][1] * j[1][2] - j[0][2] * j[1][1]) / det,
        ],
        [
            (j[1][2] * j[2][0] - j[1][0] * j[2][2]) / det,
            (j[0][0] * j[2][2] - j[0][2] * j[2][0]) / det,
            (j[0][2] * j[1][0] - j[0][0] * j[1][2]) / det,
        ],
        [
            (j[1][0] * j[2][1] - j[1][1] * j[2][0]) / det,
            (j[0][1] * j[2][0] - j[0][0] * j[2][1]) / det,
            (j[0][0] * j[1][1] - j[0][1] * j[1][0]) / det,
        ],
    ];
    let mut grads = [[0.0; 3]; 8];
    for i in 0..8 {
        for c in 0..3 {
            grads[i][c] = inv[c][0] * dn[i][0] + inv[c][1] * dn[i][1] + inv[c][2] * dn[i][2];
        }
    }
    Ok((grads, det))
}

/// Isotropic stiffness in Voigt order (xx, yy, zz, xy, yz, zx), engineering
/// shear strains.
fn elastic_matrix(e: f64, nu: f64) -> [[f64; 6]; 6] {
    let lam = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    let mut c = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = lam;
        }
        c[i][i] = lam + 2.0 * mu;
        c[i + 3][i + 3] = mu;
    }
    c
}

/// Strain components at a point from nodal displacements.
fn strain_from(grads: &[[f64; 3]; 8], u: &[f64; 24]) -> [f64; 6] {
    let mut eps = [0.0; 6];
    for i in 0..8 {
        let (ux, uy, uz) = (u[3 * i], u[3 * i + 1], u[3 * i + 2]);
        let g = grads[i];
        eps[0] += g[0] * ux;
        eps[1] += g[1] * uy;
        eps[2] += g[2] * uz;
        eps[3] += g[1] * ux + g[0] * uy;
        eps[4] += g[2] * uy + g[1] * uz;
        eps[5] += g[2] * ux + g[0] * uz;
    }
    eps
}

/// 24x24 element stiffness by 2x2x2 Gauss quadrature.
pub fn hex_stiffness(coords: &[[f64; 3]; 8], e: f64, nu: f64) -> Result<[[f64; 24]; 24]> {
    let c = elastic_matrix(e, nu);
    let mut ke = [[0.0; 24]; 24];
    for &gx in &GAUSS_1D {
        for &gy in &GAUSS_1D {
            for &gz in &GAUSS_1D {
                let (grads, det) = grads_at(coords, gx, gy, gz)?;
                // B row blocks per node: fill CB then accumulate Bt (CB)
                for i in 0..8 {
                    let gi = grads[i];
                    // columns of B for node i (3 dofs)
                    let bi = [
                        [gi[0], 0.0, 0.0],
                        [0.0, gi[1], 0.0],
                        [0.0, 0.0, gi[2]],
                        [gi[1], gi[0], 0.0],
                        [0.0, gi[2], gi[1]],
                        [gi[2], 0.0, gi[0]],
                    ];
                    // cb = C * B_i (6 x 3)
                    let mut cb = [[0.0; 3]; 6];
                    for r in 0..6 {
                        for q in 0..3 {
                            let mut s = 0.0;
                            for k in 0..6 {
                                s += c[r][k] * bi[k][q];
                            }
                            cb[r][q] = s;
                        }
                    }
                    for j in i..8 {
                        let gj = grads[j];
                        let bj = [
                            [gj[0], 0.0, 0.0],
                            [0.0, gj[1], 0.0],
                            [0.0, 0.0, gj[2]],
                            [gj[1], gj[0], 0.0],
                            [0.0, gj[2], gj[1]],
                            [gj[2], 0.0, gj[0]],
                        ];
                        for p in 0..3 {
                            for q in 0..3 {
                                let mut s = 0.0;
                                for k in 0..6 {
                                    s += bj[k][p] * cb[k][q];
                                }
                                // K[j][i] block (j >= i), symmetric fill below
                                ke[3 * j + p][3 * i + q] += s * det;
                            }
                        }
                    }
                }
            }
        }
    }
    // mirror to the upper triangle
    for i in 0..24 {
        for j in (i + 1)..24 {
            ke[i][j] = ke[j][i];
        }
    }
    Ok(ke)
}

/// Equivalent nodal force from a uniform pressure change in one element:
/// f = int B^T (alpha dp m) dV with m the volumetric Voigt vector.
pub fn hex_pressure_load(coords: &[[f64; 3]; 8], dp: f64, alpha: f64) -> Result<[f64; 24]> {
    let mut f = [0.0; 24];
    for &gx in &GAUSS_1D {
        for &gy in &GAUSS_1D {
            for &gz in &GAUSS_1D {
                let (grads, det) = grads_at(coords, gx, gy, gz)?;
                for i in 0..8 {
                    for c in 0..3 {
                        f[3 * i + c] += grads[i][c] * alpha * dp * det;
                    }
                }
            }
        }
    }
    Ok(f)
}

/// Effective-stress increment at the element center from a displacement
/// increment (tension-positive Voigt).
pub fn hex_centroid_stress(
    coords: &[[f64; 3]; 8],
    u: &[f64; 24],
    e: f64,
    nu: f64,
) -> Result<[f64; 6]> {
    let (grads, _) = grads_at(coords, 0.0, 0.0, 0.0)?;
    let eps = strain_from(&grads, u);
    let c = elastic_matrix(e, nu);
    let mut sig = [0.0; 6];
    for r in 0..6 {
        for k in 0..6 {
            sig[r] += c[r][k] * eps[k];
        }
    }
    Ok(sig)
}

fn element_coords(mesh: &Mesh, hex: usize) -> [[f64; 3]; 8] {
    std::array::from_fn(|i| mesh.nodes[mesh.hexes[hex].nodes[i]])
}

/// Assemble the global stiffness over free dofs. Boundary conditions (zero
/// displacement on the outer lateral surfaces and the bottom, free top) are
/// applied through the dof map.
pub fn assemble_stiffness(mesh: &Mesh, props: &ElasticProperties) -> Result<GlobalSystem> {
    props.validate()?;
    let dofs = DofMap::new(mesh);
    if dofs.n_fixed == 0 {
        return Err(Error::Mesh("empty boundary node set".into()));
    }
    let mut trips: Vec<(usize, usize, f64)> = Vec::new();
    for (h, hex) in mesh.hexes.iter().enumerate() {
        let coords = element_coords(mesh, h);
        let ke = hex_stiffness(&coords, props.young[h], props.poisson[h])?;
        for a in 0..8 {
            for ca in 0..3 {
                let Some(gi) = dofs.dof(hex.nodes[a], ca) else { continue };
                for b in 0..8 {
                    for cb in 0..3 {
                        let Some(gj) = dofs.dof(hex.nodes[b], cb) else { continue };
                        if gi <= gj {
                            trips.push((gi, gj, ke[3 * a + ca][3 * b + cb]));
                        }
                    }
                }
            }
        }
    }
    let stiffness = CscUpper::from_triplets(dofs.n_free, trips);
    Ok(GlobalSystem { stiffness, dofs })
}

/// Assemble the free-dof load vector from per-element pressure changes.
/// `dp_hex[h]` is the pore-pressure change of element h at this step (Pa);
/// zero entries contribute nothing.
pub fn assemble_pressure_load(
    mesh: &Mesh,
    dofs: &DofMap,
    dp_hex: &[f64],
    alpha: f64,
) -> Result<Vec<f64>> {
    if dp_hex.len() != mesh.hexes.len() {
        return Err(Error::Mesh(format!(
            "pressure change given for {} elements, mesh has {}",
            dp_hex.len(),
            mesh.hexes.len()
        )));
    }
    let mut f = vec![0.0; dofs.n_free];
    for (h, hex) in mesh.hexes.iter().enumerate() {
        if dp_hex[h] == 0.0 {
            continue;
        }
        let coords = element_coords(mesh, h);
        let fe = hex_pressure_load(&coords, dp_hex[h], alpha)?;
        for a in 0..8 {
            for c in 0..3 {
                if let Some(gi) = dofs.dof(hex.nodes[a], c) {
                    f[gi] += fe[3 * a + c];
                }
            }
        }
    }
    Ok(f)
}

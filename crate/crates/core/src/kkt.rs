//! Sparse KKT solver for the contact saddle-point systems.
//!
//! The system couples the elastic stiffness K (free displacement dofs) with
//! one multiplier row per interface-element local component. Depending on
//! the contact mode a multiplier row carries one of three equations:
//!
//! - a jump constraint `c . du = g` (stick components, slip normals),
//! - a prescribed value (open elements, cone-apex fallback),
//! - a linearized Coulomb cone row `L_t - k L_n = q` tying the tangential
//!   multiplier to the normal one of the same element.
//!
//! The cone rows make the matrix unsymmetric (the classical
//! non-associativity of Coulomb friction), so the factorization is a sparse
//! LU with partial pivoting. Embedding the cone directly avoids the
//! ill-conditioned outer fixed point on tau_L(lambda_n) that a pin-based
//! formulation needs near marginally slipping elements.
//!
//! Displacements are Jacobi-equilibrated (v = D u, D = sqrt(diag K)) and
//! constraint rows normalized, keeping the factorization well conditioned
//! despite the orders-of-magnitude cell-size contrast of the graded mesh.
//! The sparsity pattern is a fixed superset independent of the active set,
//! so the symbolic factorization is computed once; the numeric LU is cached
//! while the active set and cone coefficients stay unchanged. Iterative
//! refinement with compensated residuals and a double-double solution
//! carrier delivers componentwise-accurate multipliers, which the
//! loading-step accumulation and the contact acceptance checks rely on.

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, MatMut, Par};

use crate::fem::CscUpper;
use crate::{Error, Result};

/// Compliance regularization on jump-constraint rows (scaled units). The
/// element-averaged jump rows of a fault column are linearly dependent when
/// both fault tips are bonded (the weighted alternating sum telescopes to
/// the tip pairs, which carry no dofs), leaving a multiplier null space.
/// A small diagonal keeps the factorization unique and bounded; physically
/// it acts as an interface compliance of order 1e-15 m/Pa, far below any
/// resolved deformation.
const JUMP_DIAG_REG: f64 = 1.0e-8;

/// One multiplier row: area-averaged jump of one local component across one
/// interface element.
#[derive(Debug, Clone)]
pub struct BRow {
    /// (free dof, coefficient) pairs; coefficients average the jump over the
    /// element, so `cols . du` has units of meters.
    pub cols: Vec<(usize, f64)>,
    /// Element area (m2); the physical multiplier is a traction (Pa).
    pub area: f64,
    /// For tangential rows: the row index of the element's normal
    /// multiplier, referenced by cone rows.
    pub cone_partner: Option<usize>,
}

/// Equation carried by one multiplier row in the current solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowState {
    /// Jump constraint: c . du = target (m); multiplier solved for.
    Jump { target: f64 },
    /// Multiplier prescribed (Pa).
    Pinned { value: f64 },
    /// Linearized cone: lambda_row - k * lambda_partner = q (Pa).
    Cone { k: f64, q: f64 },
}

/// Solution of one KKT solve.
#[derive(Debug, Clone)]
pub struct KktSolution {
    /// Displacement increment on free dofs.
    pub du: Vec<f64>,
    /// Physical multiplier values (Pa) per row, relative to the caller's
    /// baseline; pinned rows return their pinned value exactly.
    pub dlam: Vec<f64>,
    /// Relative residual of the equilibrated KKT system.
    pub residual_rel: f64,
    /// True if this solve triggered a numeric refactorization.
    pub refactorized: bool,
}

pub struct KktSolver {
    n_u: usize,
    n_m: usize,
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    /// Assembled numeric values for the current mode set.
    values: Vec<f64>,
    /// Raw stiffness (upper CSC) and slot bookkeeping.
    k_upper: CscUpper,
    k_epoch: usize,
    rows: Vec<BRow>,
    /// Slot of K entry (i, j) (upper) mirrored into the full pattern:
    /// for each upper slot, the full-matrix slots of (i,j) and (j,i).
    k_slots: Vec<(usize, usize)>,
    /// Per row: slots of the jump-row coefficients (row n_u+r, u-cols).
    row_slots: Vec<Vec<usize>>,
    /// Per row: slots of the force-coupling column entries (u-rows, col r).
    col_slots: Vec<Vec<usize>>,
    /// Per row: slot of the diagonal entry.
    diag_slots: Vec<usize>,
    /// Per row: slot of the cone-partner entry, when the row has a partner.
    partner_slots: Vec<Option<usize>>,
    /// Jacobi scale per free dof: d = sqrt(diag K).
    d_scale: Vec<f64>,
    /// Per-row normalization: s_r = 1 / ||D^-1 c_r||.
    row_scale: Vec<f64>,
    symbolic: SymbolicLu<usize>,
    factor: Option<Lu<usize, f64>>,
    cache: Option<(usize, Vec<u64>)>,
    pub refactorizations: usize,
}

impl KktSolver {
    /// Build the solver for a stiffness matrix and the full multiplier row
    /// set. The pattern is fixed; only values change afterwards.
    pub fn new(k: &CscUpper, rows: Vec<BRow>) -> Result<Self> {
        faer::set_global_parallelism(Par::Seq);
        let n_u = k.n;
        let n_m = rows.len();
        let n = n_u + n_m;

        let mut rows = rows;
        for (r, row) in rows.iter_mut().enumerate() {
            if row.cols.is_empty() {
                return Err(Error::LinearSolve(format!("constraint row {r} has no dofs")));
            }
            row.cols.sort_unstable_by_key(|&(d, _)| d);
            for w in row.cols.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::LinearSolve(format!("duplicate dof in constraint row {r}")));
                }
            }
            if let Some(p) = row.cone_partner {
                if p >= n_m {
                    return Err(Error::LinearSolve(format!("cone partner {p} out of range")));
                }
            }
        }

        // full unsymmetric pattern, built column by column
        // entries per u-column j: K(:, j) full + jump-row entries (n_u+r, j)
        // entries per y-column r: force couplings (i, n_u+r), partner rows
        // that reference r, and the diagonal
        let mut cols_of: Vec<Vec<usize>> = vec![Vec::new(); n];
        // K full pattern
        for j in 0..n_u {
            for slot in k.col_ptr[j]..k.col_ptr[j + 1] {
                let i = k.row_idx[slot];
                cols_of[j].push(i);
                if i != j {
                    cols_of[i].push(j);
                }
            }
        }
        for (r, row) in rows.iter().enumerate() {
            for &(d, _) in &row.cols {
                cols_of[d].push(n_u + r); // jump-row entry in u-column d
                cols_of[n_u + r].push(d); // force coupling in y-column r
            }
            cols_of[n_u + r].push(n_u + r); // diagonal
        }
        // cone rows: entry (row n_u + r, col n_u + partner)
        for (r, row) in rows.iter().enumerate() {
            if let Some(p) = row.cone_partner {
                cols_of[n_u + p].push(n_u + r);
            }
        }

        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx: Vec<usize> = Vec::new();
        col_ptr.push(0);
        for list in &mut cols_of {
            list.sort_unstable();
            list.dedup();
            row_idx.extend_from_slice(list);
            col_ptr.push(row_idx.len());
        }
        let slot_of = |col_ptr: &[usize], row_idx: &[usize], i: usize, j: usize| -> usize {
            let lo = col_ptr[j];
            let hi = col_ptr[j + 1];
            lo + row_idx[lo..hi].binary_search(&i).expect("pattern slot")
        };

        let mut k_slots = Vec::with_capacity(k.nnz());
        for j in 0..n_u {
            for slot in k.col_ptr[j]..k.col_ptr[j + 1] {
                let i = k.row_idx[slot];
                let a = slot_of(&col_ptr, &row_idx, i, j);
                let b = slot_of(&col_ptr, &row_idx, j, i);
                k_slots.push((a, b));
            }
        }
        let mut row_slots = Vec::with_capacity(n_m);
        let mut col_slots = Vec::with_capacity(n_m);
        let mut diag_slots = Vec::with_capacity(n_m);
        let mut partner_slots = Vec::with_capacity(n_m);
        for (r, row) in rows.iter().enumerate() {
            let mut rs = Vec::with_capacity(row.cols.len());
            let mut cs = Vec::with_capacity(row.cols.len());
            for &(d, _) in &row.cols {
                rs.push(slot_of(&col_ptr, &row_idx, n_u + r, d));
                cs.push(slot_of(&col_ptr, &row_idx, d, n_u + r));
            }
            row_slots.push(rs);
            col_slots.push(cs);
            diag_slots.push(slot_of(&col_ptr, &row_idx, n_u + r, n_u + r));
            partner_slots.push(
                row.cone_partner.map(|p| slot_of(&col_ptr, &row_idx, n_u + r, n_u + p)),
            );
        }

        let values = vec![0.0; row_idx.len()];
        let symbolic_ref = SymbolicSparseColMatRef::new_checked(n, n, &col_ptr, None, &row_idx);
        let symbolic = SymbolicLu::try_new(symbolic_ref)
            .map_err(|e| Error::LinearSolve(format!("symbolic LU failed: {e:?}")))?;

        let mut solver = KktSolver {
            n_u,
            n_m,
            n,
            col_ptr,
            row_idx,
            values,
            k_upper: k.clone(),
            k_epoch: 0,
            rows,
            k_slots,
            row_slots,
            col_slots,
            diag_slots,
            partner_slots,
            d_scale: vec![1.0; n_u],
            row_scale: vec![1.0; n_m],
            symbolic,
            factor: None,
            cache: None,
            refactorizations: 0,
        };
        solver.update_scales()?;
        Ok(solver)
    }

    fn update_scales(&mut self) -> Result<()> {
        self.d_scale.fill(0.0);
        let k = &self.k_upper;
        for j in 0..self.n_u {
            for slot in k.col_ptr[j]..k.col_ptr[j + 1] {
                if k.row_idx[slot] == j {
                    self.d_scale[j] = k.values[slot];
                }
            }
        }
        for (i, d) in self.d_scale.iter_mut().enumerate() {
            if *d <= 0.0 {
                return Err(Error::LinearSolve(format!(
                    "non-positive stiffness diagonal at dof {i}"
                )));
            }
            *d = d.sqrt();
        }
        for (r, row) in self.rows.iter().enumerate() {
            let mut nrm2 = 0.0;
            for &(d, c) in &row.cols {
                let ch = c / self.d_scale[d];
                nrm2 += ch * ch;
            }
            if nrm2 <= 0.0 {
                return Err(Error::LinearSolve(format!("constraint row {r} vanished")));
            }
            self.row_scale[r] = 1.0 / nrm2.sqrt();
        }
        Ok(())
    }

    pub fn n_u(&self) -> usize {
        self.n_u
    }

    pub fn n_m(&self) -> usize {
        self.n_m
    }

    /// Element area attached to a multiplier row (m2).
    pub fn area(&self, row: usize) -> f64 {
        self.rows[row].area
    }

    /// Swap in new stiffness values (same pattern), invalidating the cache.
    pub fn set_stiffness_values(&mut self, k: &CscUpper) -> Result<()> {
        if k.nnz() != self.k_upper.nnz() || k.n != self.n_u {
            return Err(Error::LinearSolve("stiffness pattern changed".into()));
        }
        self.k_upper.values.copy_from_slice(&k.values);
        self.k_epoch += 1;
        self.update_scales()
    }

    fn assemble(&mut self, states: &[RowState]) {
        self.values.fill(0.0);
        let k = &self.k_upper;
        let mut upper_slot = 0usize;
        for j in 0..self.n_u {
            for s in k.col_ptr[j]..k.col_ptr[j + 1] {
                let i = k.row_idx[s];
                let v = k.values[s] / (self.d_scale[i] * self.d_scale[j]);
                let (full_ij, full_ji) = self.k_slots[upper_slot];
                self.values[full_ij] = v;
                self.values[full_ji] = v;
                upper_slot += 1;
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            let s = self.row_scale[r];
            match states[r] {
                RowState::Jump { .. } => {
                    for (k_i, &(d, coeff)) in row.cols.iter().enumerate() {
                        let chat = s * coeff / self.d_scale[d];
                        self.values[self.row_slots[r][k_i]] = chat;
                        self.values[self.col_slots[r][k_i]] = -chat;
                    }
                    self.values[self.diag_slots[r]] = -JUMP_DIAG_REG;
                }
                RowState::Pinned { .. } => {
                    // row: y_r = pinned; no force columns (moved to rhs)
                    self.values[self.diag_slots[r]] = 1.0;
                }
                RowState::Cone { k: kc, .. } => {
                    // force columns stay, jump row replaced by the cone row
                    for (k_i, &(d, coeff)) in row.cols.iter().enumerate() {
                        let chat = s * coeff / self.d_scale[d];
                        self.values[self.col_slots[r][k_i]] = -chat;
                    }
                    self.values[self.diag_slots[r]] = 1.0;
                    let p = self.rows[r].cone_partner.expect("cone row needs a partner");
                    let slot = self.partner_slots[r].expect("cone partner slot");
                    self.values[slot] =
                        -kc * (self.row_scale[p] * row.area) / (self.row_scale[r] * self.rows[p].area);
                }
            }
        }
    }

    fn factorize(&mut self) -> Result<()> {
        let mat = SparseColMatRef::new(
            SymbolicSparseColMatRef::new_checked(self.n, self.n, &self.col_ptr, None, &self.row_idx),
            &self.values,
        );
        let lu = Lu::try_new_with_symbolic(self.symbolic.clone(), mat)
            .map_err(|e| Error::LinearSolve(format!("LU factorization failed: {e:?}")))?;
        self.factor = Some(lu);
        self.refactorizations += 1;
        Ok(())
    }

    /// Residual r = b - M (x_hi + x_lo) with compensated accumulation
    /// (error-free product/sum transformations). Together with the
    /// double-double solution carried through refinement this makes the
    /// multiplier components componentwise accurate; a plain f64 loop would
    /// stall at the cond(M) * eps forward error.
    fn residual_compensated(&self, b: &[f64], x_hi: &[f64], x_lo: &[f64], r_out: &mut [f64]) {
        let n = self.n;
        let mut sum = vec![0.0f64; n];
        let mut comp = vec![0.0f64; n];
        let mut add = |sum: &mut [f64], comp: &mut [f64], i: usize, term: f64| {
            let s = sum[i] + term;
            let e = if sum[i].abs() >= term.abs() {
                (sum[i] - s) + term
            } else {
                (term - s) + sum[i]
            };
            sum[i] = s;
            comp[i] += e;
        };
        for i in 0..n {
            add(&mut sum, &mut comp, i, b[i]);
        }
        for c in 0..n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[k];
                let v = self.values[k];
                if v == 0.0 {
                    continue;
                }
                let p = v * x_hi[c];
                let e = f64::mul_add(v, x_hi[c], -p);
                add(&mut sum, &mut comp, r, -p);
                add(&mut sum, &mut comp, r, -e);
                add(&mut sum, &mut comp, r, -v * x_lo[c]);
            }
        }
        for i in 0..n {
            r_out[i] = sum[i] + comp[i];
        }
    }

    /// Solve one saddle-point system. `rhs_u` is the external force on free
    /// dofs; `states` selects the equation carried by each multiplier row.
    pub fn solve(&mut self, states: &[RowState], rhs_u: &[f64]) -> Result<KktSolution> {
        assert_eq!(states.len(), self.n_m);
        assert_eq!(rhs_u.len(), self.n_u);

        // cache key: per-row equation kind, with the cone coefficient bits
        // (targets and rhs values do not enter the matrix)
        let key: Vec<u64> = states
            .iter()
            .map(|st| match st {
                RowState::Jump { .. } => 0u64,
                RowState::Pinned { .. } => 1u64,
                RowState::Cone { k, .. } => 2u64 ^ k.to_bits(),
            })
            .collect();
        let refactor = match &self.cache {
            Some((epoch, cached)) => *epoch != self.k_epoch || *cached != key,
            None => true,
        };
        if refactor {
            self.assemble(states);
            self.factorize()?;
            self.cache = Some((self.k_epoch, key));
        }

        // equilibrated right-hand side
        let mut rhs = vec![0.0; self.n];
        for i in 0..self.n_u {
            rhs[i] = rhs_u[i] / self.d_scale[i];
        }
        for (r, row) in self.rows.iter().enumerate() {
            match states[r] {
                RowState::Jump { target } => {
                    rhs[self.n_u + r] = self.row_scale[r] * target;
                }
                RowState::Pinned { value } => {
                    let y_pin = value * row.area / self.row_scale[r];
                    // the force columns are zeroed: move the known force
                    for (k_i, &(d, coeff)) in row.cols.iter().enumerate() {
                        let _ = k_i;
                        rhs[d] += self.row_scale[r] * (coeff / self.d_scale[d]) * y_pin;
                    }
                    rhs[self.n_u + r] = y_pin;
                }
                RowState::Cone { q, .. } => {
                    rhs[self.n_u + r] = q * row.area / self.row_scale[r];
                }
            }
        }

        let factor = self.factor.as_ref().expect("factorized");
        let mut x = rhs.clone();
        {
            let xm = MatMut::from_column_major_slice_mut(&mut x, self.n, 1);
            factor.solve_in_place_with_conj(Conj::No, xm);
        }

        // iterative refinement with compensated residuals; the solution is
        // carried as a double-double (x, x_lo) pair so corrections below the
        // f64 ulp of large components still register
        let norm_rhs = rhs.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
        let mut x_lo = vec![0.0; self.n];
        let mut resid = vec![0.0; self.n];
        let mut residual_rel = 0.0;
        let mut prev_rnorm = f64::INFINITY;
        let trace = std::env::var_os("FAULTBANDS_KKT_TRACE").is_some();
        for round in 0..10 {
            self.residual_compensated(&rhs, &x, &x_lo, &mut resid);
            let rnorm = resid.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            residual_rel = rnorm / norm_rhs;
            if trace {
                eprintln!("    refine round {round}: rel resid {residual_rel:.3e}");
            }
            if residual_rel < 1e-17 || round == 9 || rnorm >= 0.5 * prev_rnorm {
                break;
            }
            prev_rnorm = rnorm;
            {
                let rm = MatMut::from_column_major_slice_mut(&mut resid, self.n, 1);
                factor.solve_in_place_with_conj(Conj::No, rm);
            }
            // two-sum accumulation of the correction into (x, x_lo)
            for i in 0..self.n {
                let dz = resid[i] + x_lo[i];
                let s = x[i] + dz;
                let bb = s - x[i];
                let err = (x[i] - (s - bb)) + (dz - bb);
                x[i] = s;
                x_lo[i] = err;
            }
        }
        for i in 0..self.n {
            x[i] += x_lo[i];
        }

        let mut du = vec![0.0; self.n_u];
        for i in 0..self.n_u {
            du[i] = x[i] / self.d_scale[i];
        }
        let mut dlam = vec![0.0; self.n_m];
        for r in 0..self.n_m {
            dlam[r] = match states[r] {
                RowState::Pinned { value } => value,
                _ => x[self.n_u + r] * self.row_scale[r] / self.rows[r].area,
            };
        }
        Ok(KktSolution { du, dlam, residual_rel, refactorized: refactor })
    }

    /// Jump increments per row for a displacement increment (m).
    pub fn jumps(&self, du: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n_m];
        for (r, row) in self.rows.iter().enumerate() {
            let mut v = 0.0;
            for &(dof, coeff) in &row.cols {
                v += coeff * du[dof];
            }
            g[r] = v;
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn brow(cols: Vec<(usize, f64)>, area: f64) -> BRow {
        BRow { cols, area, cone_partner: None }
    }

    /// Two spring dofs tied by one constraint row.
    #[test]
    fn tied_springs() {
        // K = diag(2, 1) springs to ground; constraint u0 - u1 = 0;
        // force 1 on dof 0: tied system: (2+1) u = 1
        let k = CscUpper::from_triplets(2, vec![(0, 0, 2.0), (1, 1, 1.0)]);
        let rows = vec![brow(vec![(0, 1.0), (1, -1.0)], 1.0)];
        let mut solver = KktSolver::new(&k, rows).unwrap();
        let sol = solver.solve(&[RowState::Jump { target: 0.0 }], &[1.0, 0.0]).unwrap();
        assert_relative_eq!(sol.du[0], 1.0 / 3.0, max_relative = 1e-10);
        assert_relative_eq!(sol.du[1], 1.0 / 3.0, max_relative = 1e-10);
        // equilibrium of dof 1: K1 u1 = lambda
        assert_relative_eq!(sol.dlam[0], -1.0 / 3.0, max_relative = 1e-10);
        assert!(sol.residual_rel < 1e-12);
    }

    #[test]
    fn pinned_row_applies_known_force() {
        let k = CscUpper::from_triplets(2, vec![(0, 0, 2.0), (1, 1, 1.0)]);
        let rows = vec![brow(vec![(0, 1.0), (1, -1.0)], 2.0)];
        let mut solver = KktSolver::new(&k, rows).unwrap();
        // pinned lambda = 3 Pa on area 2: force +6 on dof 0, -6 on dof 1
        let sol = solver.solve(&[RowState::Pinned { value: 3.0 }], &[0.0, 0.0]).unwrap();
        assert_relative_eq!(sol.du[0], 6.0 / 2.0, max_relative = 1e-10);
        assert_relative_eq!(sol.du[1], -6.0 / 1.0, max_relative = 1e-10);
        assert_eq!(sol.dlam[0], 3.0);
    }

    #[test]
    fn factorization_cache_reused_for_same_mode_set() {
        let k = CscUpper::from_triplets(2, vec![(0, 0, 2.0), (1, 1, 1.0)]);
        let rows = vec![brow(vec![(0, 1.0), (1, -1.0)], 1.0)];
        let mut solver = KktSolver::new(&k, rows).unwrap();
        let s1 = solver.solve(&[RowState::Jump { target: 0.0 }], &[1.0, 0.0]).unwrap();
        let s2 = solver.solve(&[RowState::Jump { target: 0.0 }], &[0.0, 1.0]).unwrap();
        assert!(s1.refactorized);
        assert!(!s2.refactorized);
        let s3 = solver.solve(&[RowState::Pinned { value: 0.0 }], &[0.0, 1.0]).unwrap();
        assert!(s3.refactorized);
        assert_eq!(solver.refactorizations, 2);
    }

    #[test]
    fn nonzero_jump_target() {
        // close a gap: constraint jump = -0.5 between two grounded springs
        let k = CscUpper::from_triplets(2, vec![(0, 0, 1.0), (1, 1, 1.0)]);
        let rows = vec![brow(vec![(0, 1.0), (1, -1.0)], 1.0)];
        let mut solver = KktSolver::new(&k, rows).unwrap();
        let sol = solver.solve(&[RowState::Jump { target: -0.5 }], &[0.0, 0.0]).unwrap();
        let jump = solver.jumps(&sol.du);
        assert_relative_eq!(jump[0], -0.5, max_relative = 1e-10);
        assert_relative_eq!(sol.du[0] - sol.du[1], -0.5, max_relative = 1e-10);
    }

    #[test]
    fn badly_scaled_springs_stay_accurate() {
        // stiffness contrast of 1e8 between the tied dofs
        let k = CscUpper::from_triplets(2, vec![(0, 0, 2.0e10), (1, 1, 150.0)]);
        let rows = vec![brow(vec![(0, 1.0), (1, -1.0)], 3.0)];
        let mut solver = KktSolver::new(&k, rows).unwrap();
        let f = 7.0e4;
        let sol = solver.solve(&[RowState::Jump { target: 0.0 }], &[f, 0.0]).unwrap();
        let u = f / (2.0e10 + 150.0);
        assert_relative_eq!(sol.du[0], u, max_relative = 1e-12);
        assert_relative_eq!(sol.dlam[0] * 3.0, -150.0 * u, max_relative = 1e-12);
    }

    #[test]
    fn cone_row_ties_multipliers() {
        // two dofs, each grounded, both coupled to a 2-row interface:
        // row 0 = "normal" (jump constraint on dof 0), row 1 = "tangential"
        // cone row: lambda_1 - 0.5 lambda_0 = 0.1
        let k = CscUpper::from_triplets(2, vec![(0, 0, 4.0), (1, 1, 2.0)]);
        let rows = vec![
            BRow { cols: vec![(0, 1.0)], area: 2.0, cone_partner: None },
            BRow { cols: vec![(1, 1.0)], area: 2.0, cone_partner: Some(0) },
        ];
        let mut solver = KktSolver::new(&k, rows).unwrap();
        let states = [
            RowState::Jump { target: 0.25 },
            RowState::Cone { k: 0.5, q: 0.1 },
        ];
        // equations: 4 u0 - 2 L0 = f0; 2 u1 - 2 L1 = 0; u0 = 0.25;
        // L1 - 0.5 L0 = 0.1
        let f0 = 3.0;
        let sol = solver.solve(&states, &[f0, 0.0]).unwrap();
        let l0 = (4.0 * 0.25 - f0) / 2.0;
        let l1 = 0.1 + 0.5 * l0;
        let u1 = 2.0 * l1 / 2.0;
        assert_relative_eq!(sol.du[0], 0.25, max_relative = 1e-12);
        assert_relative_eq!(sol.dlam[0], l0, max_relative = 1e-12);
        assert_relative_eq!(sol.dlam[1], l1, max_relative = 1e-12);
        assert_relative_eq!(sol.du[1], u1, max_relative = 1e-12);
    }
}

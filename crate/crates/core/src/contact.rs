//! Frictional contact on fault interface elements: non-penetration, Coulomb
//! cone with slip weakening, and mode classification, enforced through
//! element-wise constant Lagrange multipliers.
//!
//! Multipliers are total tractions (compression-positive normal component)
//! relative to the effective initial stress: the resolved initial tractions
//! seed the state and increments accumulate on top. The fault fluid-pressure
//! change enters the Coulomb limit as `lambda_n - dP_f`; the initial
//! hydrostatic fault pressure is already netted into the effective initial
//! stress. Tangential components live in the per-element (strike, dip)
//! basis; the tangential traction is the one exerted on side B, so slip
//! (jump of side B relative to side A) opposes it.

use crate::fem::DofMap;
use crate::geomodel::{Mesh, StressField};
use crate::kkt::{BRow, KktSolver, RowState};
use crate::{Error, Result};

/// Coulomb friction parameters with optional linear slip weakening.
#[derive(Debug, Clone, Copy)]
pub struct FrictionLaw {
    /// Cohesion (Pa).
    pub cohesion: f64,
    /// Static friction angle (deg).
    pub phi_static: f64,
    /// Dynamic friction angle (deg); reached after `d_c` of sliding.
    pub phi_dynamic: f64,
    /// Slip-weakening distance (m).
    pub d_c: f64,
    pub weakening: bool,
}

impl FrictionLaw {
    pub fn reference() -> Self {
        FrictionLaw {
            cohesion: 2.0e6,
            phi_static: 30.0,
            phi_dynamic: 30.0,
            d_c: 1.0,
            weakening: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cohesion < 0.0 {
            return Err(Error::Geometry("cohesion must be non-negative".into()));
        }
        if !(self.phi_static > 0.0 && self.phi_static < 90.0) {
            return Err(Error::Geometry(format!(
                "static friction angle {} deg outside (0, 90)",
                self.phi_static
            )));
        }
        if self.weakening {
            if !(self.phi_dynamic > 0.0 && self.phi_dynamic <= self.phi_static) {
                return Err(Error::Geometry(format!(
                    "dynamic friction angle {} deg must lie in (0, phi_s]",
                    self.phi_dynamic
                )));
            }
            if self.d_c <= 0.0 {
                return Err(Error::Geometry("slip-weakening distance must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Friction angle after `delta` of cumulative sliding (deg): linear decay
/// from the static to the dynamic angle over the weakening distance,
/// evaluated on the historical maximum of slip (irreversible).
pub fn update_friction_angle(delta: f64, law: &FrictionLaw) -> f64 {
    debug_assert!(delta >= 0.0);
    if !law.weakening {
        return law.phi_static;
    }
    if delta >= law.d_c {
        law.phi_dynamic
    } else {
        law.phi_static + (law.phi_dynamic - law.phi_static) * delta / law.d_c
    }
}

/// Coulomb limit shear stress: tau_L = c + tan(phi) max(lambda_n - dP_f, 0).
/// `dp_fault` is the change of fault fluid pressure from the initial
/// hydrostatic state (Pa, negative during depletion).
pub fn coulomb_limit(lambda_n: f64, phi_deg: f64, cohesion: f64, dp_fault: f64) -> f64 {
    cohesion + phi_deg.to_radians().tan() * (lambda_n - dp_fault).max(0.0)
}

/// Contact mode of one interface element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactMode {
    Stick,
    Slip,
    Open,
}

impl ContactMode {
    pub fn name(self) -> &'static str {
        match self {
            ContactMode::Stick => "STICK",
            ContactMode::Slip => "SLIP",
            ContactMode::Open => "OPEN",
        }
    }
}

/// Per-element contact state. Tractions are totals (initial + accumulated
/// increments); tangential components in the (strike, dip) element basis.
#[derive(Debug, Clone, Copy)]
pub struct ContactState {
    /// Total normal traction, compression-positive (Pa).
    pub lambda_n: f64,
    /// Total tangential traction (strike, dip) exerted on side B (Pa).
    pub lambda_t: [f64; 2],
    /// Normal separation (m), zero while closed.
    pub gap: f64,
    /// Tangential jump increment of the last step (m), nonzero only while
    /// slipping.
    pub slip_increment: [f64; 2],
    /// Total accumulated tangential jump (m), the stick constraint target.
    pub slip_offset: [f64; 2],
    /// Accumulated sliding path length (m), non-decreasing.
    pub cumulative_slip: f64,
    /// Current friction angle (deg).
    pub phi_current: f64,
    pub mode: ContactMode,
}

impl ContactState {
    pub fn tau_mag(&self) -> f64 {
        self.lambda_t[0].hypot(self.lambda_t[1])
    }
}

/// Mode classification tolerances and iteration limits.
#[derive(Debug, Clone, Copy)]
pub struct ContactConfig {
    /// Relative force-residual tolerance of the KKT solve.
    pub force_tol: f64,
    /// Relative tolerance on the cone check when classifying stick -> slip.
    pub mode_tol: f64,
    /// Tensile normal traction beyond which an element opens (Pa).
    pub tension_tol: f64,
    /// Penetration depth that forces an open element to re-close (m).
    pub gap_tol: f64,
    /// Slip increments below this length are treated as no sliding (m).
    /// Sits above the interface-compliance noise of the regularized jump
    /// rows (tens of nanometers) and far below resolved slip.
    pub slip_floor: f64,
    /// Maximum angle between slip and the pinned traction direction before
    /// the pin is re-aligned (rad).
    pub align_tol: f64,
    pub max_iterations: usize,
}

impl Default for ContactConfig {
    fn default() -> Self {
        ContactConfig {
            force_tol: 1.0e-8,
            mode_tol: 1.0e-8,
            tension_tol: 1.0e4,
            gap_tol: 1.0e-9,
            slip_floor: 1.0e-7,
            align_tol: 5.0e-4,
            max_iterations: 50,
        }
    }
}

/// Basic mode classification from the current trial state (open beats slip
/// beats stick; an element exactly at the cone counts as slipping).
pub fn classify(
    lambda_n: f64,
    tau_mag: f64,
    tau_limit: f64,
    config: &ContactConfig,
) -> ContactMode {
    if lambda_n < -config.tension_tol {
        ContactMode::Open
    } else if tau_mag >= tau_limit * (1.0 - config.mode_tol) {
        ContactMode::Slip
    } else {
        ContactMode::Stick
    }
}

/// Row index of one local component (0 normal, 1 strike, 2 dip) of element e.
#[inline]
pub fn row_of(element: usize, comp: usize) -> usize {
    3 * element + comp
}

/// Build the jump-operator rows for every interface element: one row per
/// local frame component, coefficients averaging the jump over the element.
/// Bonded node pairs (fault tips) and constrained dofs contribute nothing.
pub fn build_interface_rows(mesh: &Mesh, dofs: &DofMap) -> Vec<BRow> {
    let mut rows = Vec::with_capacity(3 * mesh.interfaces.len());
    for (ei, e) in mesh.interfaces.iter().enumerate() {
        let dirs = [e.normal, e.tangent_strike, e.tangent_dip];
        for (comp, dir) in dirs.into_iter().enumerate() {
            let mut cols: Vec<(usize, f64)> = Vec::with_capacity(24);
            for k in 0..4 {
                let (a, b) = (e.nodes_a[k], e.nodes_b[k]);
                if a == b {
                    continue; // bonded tip pair: zero jump contribution
                }
                let w = e.weights[k] / e.area;
                for c in 0..3 {
                    if dir[c] == 0.0 {
                        continue;
                    }
                    if let Some(d) = dofs.dof(b, c) {
                        cols.push((d, w * dir[c]));
                    }
                    if let Some(d) = dofs.dof(a, c) {
                        cols.push((d, -w * dir[c]));
                    }
                }
            }
            cols.sort_unstable_by_key(|&(d, _)| d);
            cols.dedup_by(|a, b| {
                if a.0 == b.0 {
                    b.1 += a.1;
                    true
                } else {
                    false
                }
            });
            let cone_partner = if comp > 0 { Some(row_of(ei, 0)) } else { None };
            rows.push(BRow { cols, area: e.area, cone_partner });
        }
    }
    rows
}

/// Initial contact states: everything sticking, tractions from the resolved
/// initial stress, no gap, no slip.
pub fn initial_contact_states(field: &StressField, law: &FrictionLaw) -> Vec<ContactState> {
    field
        .traction
        .iter()
        .map(|t| ContactState {
            lambda_n: t.sigma_n,
            lambda_t: [t.tau_strike, t.tau_dip],
            gap: 0.0,
            slip_increment: [0.0, 0.0],
            slip_offset: [0.0, 0.0],
            cumulative_slip: 0.0,
            phi_current: law.phi_static,
            mode: ContactMode::Stick,
        })
        .collect()
}

/// Contact diagnostics of one converged step, used by the KKT acceptance
/// checks.
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostics {
    /// max over closed elements of (|lambda_t| - tau_L) / tau_L.
    pub cone_violation_rel: f64,
    /// sum |gap * lambda_n| / (n_e * mean|lambda_n| * gap scale).
    pub complementarity: f64,
    /// max angle between slip increment and -lambda_t (rad).
    pub slip_misalignment_rad: f64,
    /// incremental frictional work sum tau_L |slip| * area (J), >= 0.
    pub dissipation: f64,
    /// relative residual of the final KKT solve.
    pub residual_rel: f64,
    pub iterations: usize,
    pub n_slip: usize,
    pub n_open: usize,
}

/// Result of one loading-step contact solve.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// Total displacement field on free dofs (m).
    pub du: Vec<f64>,
    pub states: Vec<ContactState>,
    pub diagnostics: StepDiagnostics,
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Reference configuration that per-step solves are measured against.
///
/// Solves work in total form: the right-hand side is the total external
/// load minus the baseline load, constraint targets are total jumps minus
/// baseline jumps, and multiplier pins are total tractions minus baseline
/// tractions. With a fixed stiffness the baseline never moves and per-step
/// solver error cannot accumulate across loading steps; when the stiffness
/// changes mid-run (geochemical scaling) the caller re-bases once.
#[derive(Debug, Clone)]
pub struct ContactBaseline {
    /// External force at the baseline (free dofs).
    pub f: Vec<f64>,
    /// Multiplier totals at the baseline (Pa), 3 rows per element.
    pub lambda: Vec<f64>,
    /// Jump totals at the baseline (m), 3 rows per element.
    pub jump: Vec<f64>,
    /// Displacement totals at the baseline (free dofs, m).
    pub u: Vec<f64>,
}

impl ContactBaseline {
    /// Initial equilibrium: zero load and displacement, multipliers at the
    /// resolved initial tractions.
    pub fn initial(states: &[ContactState], n_free: usize) -> Self {
        let n_e = states.len();
        let mut lambda = vec![0.0; 3 * n_e];
        for (e, s) in states.iter().enumerate() {
            lambda[row_of(e, 0)] = s.lambda_n;
            lambda[row_of(e, 1)] = s.lambda_t[0];
            lambda[row_of(e, 2)] = s.lambda_t[1];
        }
        ContactBaseline { f: vec![0.0; n_free], lambda, jump: vec![0.0; 3 * n_e], u: vec![0.0; n_free] }
    }

    /// Re-anchor to the current converged state (used when K changes).
    pub fn rebase(&mut self, states: &[ContactState], f_total: &[f64], u_total: &[f64]) {
        self.f.copy_from_slice(f_total);
        self.u.copy_from_slice(u_total);
        for (e, s) in states.iter().enumerate() {
            self.lambda[row_of(e, 0)] = s.lambda_n;
            self.lambda[row_of(e, 1)] = s.lambda_t[0];
            self.lambda[row_of(e, 2)] = s.lambda_t[1];
            self.jump[row_of(e, 0)] = if s.mode == ContactMode::Open { s.gap } else { 0.0 };
            self.jump[row_of(e, 1)] = s.slip_offset[0];
            self.jump[row_of(e, 2)] = s.slip_offset[1];
        }
    }
}

/// Resolve one loading step: active-set outer loop around saddle-point
/// solves, with mode re-classification after each solve. Slip directions are
/// pinned from the previous iterate's traction direction and re-aligned as
/// the semi-smooth iteration proceeds; friction weakening is evaluated on
/// the trial cumulative slip inside the loop, so the weakened limit is
/// consistent at convergence.
pub fn active_set_solve(
    kkt: &mut KktSolver,
    base: &ContactBaseline,
    prev: &[ContactState],
    law: &FrictionLaw,
    fault_dp: &[f64],
    f_total: &[f64],
    config: &ContactConfig,
    step_label: f64,
) -> Result<StepOutcome> {
    law.validate()?;
    let n_e = prev.len();
    assert_eq!(kkt.n_m(), 3 * n_e);
    assert_eq!(fault_dp.len(), n_e);

    let rhs_u: Vec<f64> = f_total.iter().zip(&base.f).map(|(f, b)| f - b).collect();

    let mut modes: Vec<ContactMode> = prev.iter().map(|s| s.mode).collect();
    let mut slip_dir: Vec<[f64; 2]> = prev
        .iter()
        .map(|s| {
            let m = s.tau_mag();
            if m > 0.0 {
                [s.lambda_t[0] / m, s.lambda_t[1] / m]
            } else {
                [0.0, 1.0]
            }
        })
        .collect();
    let mut delta_est: Vec<f64> = prev.iter().map(|s| s.cumulative_slip).collect();

    let mut mode_log: Vec<Vec<u8>> = Vec::new();

    for iter in 1..=config.max_iterations {
        // row states for this iteration, all relative to the baseline
        let mut rows = vec![RowState::Jump { target: 0.0 }; 3 * n_e];
        for e in 0..n_e {
            let r0 = row_of(e, 0);
            match modes[e] {
                ContactMode::Stick => {
                    rows[r0] = RowState::Jump { target: -base.jump[r0] };
                    for c in 0..2 {
                        rows[r0 + 1 + c] = RowState::Jump {
                            target: prev[e].slip_offset[c] - base.jump[r0 + 1 + c],
                        };
                    }
                }
                ContactMode::Slip => {
                    // linearized cone rows: the tangential multipliers track
                    // tau_L(lambda_n) exactly within the linear solve; the
                    // friction angle is the fixed-point estimate
                    let phi = update_friction_angle(delta_est[e], law);
                    let tan_phi = phi.to_radians().tan();
                    rows[r0] = RowState::Jump { target: -base.jump[r0] };
                    for c in 0..2 {
                        rows[r0 + 1 + c] = RowState::Cone {
                            k: tan_phi * slip_dir[e][c],
                            q: slip_dir[e][c]
                                * (law.cohesion
                                    + tan_phi * (base.lambda[r0] - fault_dp[e]))
                                - base.lambda[r0 + 1 + c],
                        };
                    }
                }
                ContactMode::Open => {
                    for c in 0..3 {
                        rows[r0 + c] = RowState::Pinned { value: -base.lambda[r0 + c] };
                    }
                }
            }
        }

        let sol = kkt.solve(&rows, &rhs_u)?;
        let jumps_rel = kkt.jumps(&sol.du);

        // pre-pass: largest slip increment among slipping elements; mode
        // decisions for marginal elements are gated on a fraction of it so
        // micro-reversals riding on their neighbors' slip cause no chatter
        let mut max_slip = 0.0f64;
        for e in 0..n_e {
            if modes[e] == ContactMode::Slip {
                let r0 = row_of(e, 0);
                let jt = [
                    base.jump[r0 + 1] + jumps_rel[r0 + 1] - prev[e].slip_offset[0],
                    base.jump[r0 + 2] + jumps_rel[r0 + 2] - prev[e].slip_offset[1],
                ];
                max_slip = max_slip.max(norm2(jt));
            }
        }
        let slip_gate = config.slip_floor.max(1e-3 * max_slip);

        // trial state and classification
        let mut changed = false;
        let mut trial: Vec<ContactState> = Vec::with_capacity(n_e);
        for e in 0..n_e {
            let r0 = row_of(e, 0);
            let lam_n = base.lambda[r0] + sol.dlam[r0];
            let lam_t = [
                base.lambda[r0 + 1] + sol.dlam[r0 + 1],
                base.lambda[r0 + 2] + sol.dlam[r0 + 2],
            ];
            let gap_new = base.jump[r0] + jumps_rel[r0];
            let jump_t = [
                base.jump[r0 + 1] + jumps_rel[r0 + 1],
                base.jump[r0 + 2] + jumps_rel[r0 + 2],
            ];
            let g_t = [
                jump_t[0] - prev[e].slip_offset[0],
                jump_t[1] - prev[e].slip_offset[1],
            ];
            let slipping = modes[e] == ContactMode::Slip;
            let slip_len = if slipping { norm2(g_t) } else { 0.0 };
            let delta_new = prev[e].cumulative_slip + slip_len;
            let phi_new = update_friction_angle(delta_new, law);
            let tau_l_new = coulomb_limit(lam_n, phi_new, law.cohesion, fault_dp[e]);
            let tau_mag = norm2(lam_t);

            let new_mode = match modes[e] {
                ContactMode::Open => {
                    if gap_new < -config.gap_tol {
                        ContactMode::Stick
                    } else {
                        ContactMode::Open
                    }
                }
                ContactMode::Slip => {
                    if lam_n < -config.tension_tol {
                        ContactMode::Open
                    } else if slip_len > slip_gate
                        && g_t[0] * slip_dir[e][0] + g_t[1] * slip_dir[e][1] > 0.0
                    {
                        if std::env::var_os("FAULTBANDS_CONTACT_TRACE_ELEMS").is_some() {
                            eprintln!(
                                "      restick e{e}: slip=({:.3e},{:.3e}) dir=({:.4},{:.4}) dot={:.3e}",
                                g_t[0],
                                g_t[1],
                                slip_dir[e][0],
                                slip_dir[e][1],
                                g_t[0] * slip_dir[e][0] + g_t[1] * slip_dir[e][1]
                            );
                        }
                        // sliding along the traction it should oppose: re-stick
                        ContactMode::Stick
                    } else {
                        ContactMode::Slip
                    }
                }
                ContactMode::Stick => {
                    if lam_n < -config.tension_tol {
                        ContactMode::Open
                    } else if tau_mag >= tau_l_new * (1.0 - config.mode_tol) {
                        ContactMode::Slip
                    } else {
                        ContactMode::Stick
                    }
                }
            };

            if new_mode != modes[e] {
                changed = true;
                if new_mode == ContactMode::Slip && tau_mag > 0.0 {
                    slip_dir[e] = [lam_t[0] / tau_mag, lam_t[1] / tau_mag];
                }
            } else if new_mode == ContactMode::Slip {
                // still slipping: re-align the cone direction if the slip
                // rotated, and re-run if weakening moved the friction angle
                if slip_len > slip_gate {
                    let cos_opp =
                        -(g_t[0] * slip_dir[e][0] + g_t[1] * slip_dir[e][1]) / slip_len;
                    if cos_opp < config.align_tol.cos() {
                        slip_dir[e] = [-g_t[0] / slip_len, -g_t[1] / slip_len];
                        changed = true;
                    }
                }
                let phi_used = update_friction_angle(delta_est[e], law);
                if (phi_new - phi_used).abs() > 1e-9 {
                    changed = true;
                }
            }

            modes[e] = new_mode;
            delta_est[e] = delta_new;

            let open_now = new_mode == ContactMode::Open;
            trial.push(ContactState {
                lambda_n: lam_n,
                lambda_t: lam_t,
                gap: if open_now { gap_new.max(0.0) } else { 0.0 },
                slip_increment: if slipping { g_t } else { [0.0, 0.0] },
                // while open the surfaces move freely; the offset follows so
                // a later re-stick holds the current position
                slip_offset: if slipping || open_now { jump_t } else { prev[e].slip_offset },
                cumulative_slip: delta_new,
                phi_current: phi_new,
                mode: new_mode,
            });
        }

        if std::env::var_os("FAULTBANDS_CONTACT_TRACE").is_some() {
            let mut drift = 0.0f64;
            let mut n_slip = 0;
            for (e, t) in trial.iter().enumerate() {
                if t.mode == ContactMode::Slip {
                    n_slip += 1;
                    let tl = coulomb_limit(t.lambda_n, t.phi_current, law.cohesion, fault_dp[e]);
                    drift = drift.max((t.tau_mag() - tl).abs() / tl.max(1.0));
                    if std::env::var_os("FAULTBANDS_CONTACT_TRACE_ELEMS").is_some() {
                        let g_t = t.slip_increment;
                        eprintln!(
                            "      e{e}: lam_n={:.6e} tau={:.6e} tl={:.6e} dir=({:.6},{:.6}) slip=({:.3e},{:.3e})",
                            t.lambda_n, t.tau_mag(), tl, slip_dir[e][0], slip_dir[e][1], g_t[0], g_t[1]
                        );
                    }
                }
            }
            eprintln!(
                "  [{step_label}] iter {iter}: changed={changed} n_slip={n_slip} cone drift={drift:.3e}"
            );
        }

        mode_log.push(modes.iter().map(|m| *m as u8).collect());

        if !changed {
            if sol.residual_rel > config.force_tol {
                return Err(Error::LinearSolve(format!(
                    "KKT residual {} above tolerance {} at step {step_label}",
                    sol.residual_rel, config.force_tol
                )));
            }
            let diagnostics =
                diagnose(kkt, &trial, law, fault_dp, sol.residual_rel, iter, config);
            // total displacement field
            let u = base.u.iter().zip(&sol.du).map(|(b, d)| b + d).collect();
            return Ok(StepOutcome { du: u, states: trial, diagnostics });
        }
    }

    // report the elements whose mode kept flipping over the last iterations
    let mut oscillating: Vec<usize> = Vec::new();
    if mode_log.len() >= 2 {
        let last = &mode_log[mode_log.len() - 1];
        let before = &mode_log[mode_log.len() - 2];
        for e in 0..n_e {
            if last[e] != before[e] {
                oscillating.push(e);
            }
        }
    }
    Err(Error::NonConvergence {
        step_label,
        msg: format!(
            "active set did not settle in {} iterations; oscillating elements: {:?}",
            config.max_iterations,
            &oscillating[..oscillating.len().min(12)]
        ),
    })
}

fn diagnose(
    kkt: &KktSolver,
    states: &[ContactState],
    law: &FrictionLaw,
    fault_dp: &[f64],
    residual_rel: f64,
    iterations: usize,
    config: &ContactConfig,
) -> StepDiagnostics {
    let n_e = states.len();
    let mut cone = f64::NEG_INFINITY;
    let mut misalign: f64 = 0.0;
    let mut dissipation = 0.0;
    let mut comp_sum = 0.0;
    let mut traction_sum = 0.0;
    let mut gap_max: f64 = 0.0;
    let mut n_slip = 0;
    let mut n_open = 0;
    for (e, s) in states.iter().enumerate() {
        let tau_l = coulomb_limit(s.lambda_n, s.phi_current, law.cohesion, fault_dp[e]);
        match s.mode {
            ContactMode::Open => n_open += 1,
            ContactMode::Slip => n_slip += 1,
            ContactMode::Stick => {}
        }
        if s.mode != ContactMode::Open && tau_l > 0.0 {
            cone = cone.max((s.tau_mag() - tau_l) / tau_l);
        }
        let slip_len = norm2(s.slip_increment);
        if s.mode == ContactMode::Slip && slip_len > config.slip_floor {
            let dot = s.slip_increment[0] * s.lambda_t[0] + s.slip_increment[1] * s.lambda_t[1];
            let cos_opp = (-dot / (slip_len * s.tau_mag().max(1e-300))).clamp(-1.0, 1.0);
            misalign = misalign.max(cos_opp.acos());
            let area = kkt.area(row_of(e, 0));
            dissipation += tau_l * slip_len * area;
        }
        comp_sum += (s.gap * s.lambda_n).abs();
        traction_sum += s.lambda_n.abs();
        gap_max = gap_max.max(s.gap.abs());
    }
    let mean_traction = traction_sum / n_e.max(1) as f64;
    let scale = (n_e as f64 * mean_traction * gap_max.max(1e-9)).max(1e-300);
    StepDiagnostics {
        cone_violation_rel: if cone == f64::NEG_INFINITY { 0.0 } else { cone },
        complementarity: comp_sum / scale,
        slip_misalignment_rad: misalign,
        dissipation,
        residual_rel,
        iterations,
        n_slip,
        n_open,
    }
}

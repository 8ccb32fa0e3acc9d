//! Loading-step orchestration: assemble incremental pressure loads, run the
//! contact solver, accumulate displacements, stresses and contact state.

use crate::contact::{
    active_set_solve, build_interface_rows, coulomb_limit, initial_contact_states,
    ContactBaseline, ContactConfig, ContactState, FrictionLaw, StepDiagnostics,
};
use crate::fem::{
    assemble_pressure_load, assemble_stiffness, hex_centroid_stress, DofMap, ElasticProperties,
};
use crate::geomodel::{
    build_geometry, compute_initial_stress, generate_mesh, GeometryParams, MaterialLayer, Mesh,
    MeshResolution, StressField, StressRegime, RESERVOIR_LAYER,
};
use crate::kkt::KktSolver;
use crate::pressure::{build_schedule, FluidKind, LoadingStep, PressureSchedule, ScheduleParams};
use crate::Result;

/// Complete configuration of one simulation run.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub geometry: GeometryParams,
    pub resolution: MeshResolution,
    pub layers: Vec<MaterialLayer>,
    pub regime: StressRegime,
    pub law: FrictionLaw,
    pub fluid: FluidKind,
    pub schedule: ScheduleParams,
    pub contact: ContactConfig,
    pub biot_alpha: f64,
    /// Geochemical stiffness scaling of the reservoir modulus, applied from
    /// the first post-PP loading step onward (W: 0.7, H: 1.3).
    pub stiffness_scale_post_pp: Option<f64>,
}

impl SimulationConfig {
    pub fn reference(fluid: FluidKind) -> Self {
        SimulationConfig {
            geometry: GeometryParams::default(),
            resolution: MeshResolution::default(),
            layers: crate::geomodel::reference_layers(),
            regime: StressRegime::reference(),
            law: FrictionLaw::reference(),
            fluid,
            schedule: ScheduleParams::reference(fluid),
            contact: ContactConfig::default(),
            biot_alpha: 1.0,
            stiffness_scale_post_pp: None,
        }
    }
}

/// Converged snapshot of one loading step.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub step: LoadingStep,
    pub states: Vec<ContactState>,
    /// Coulomb limit per element at this step's fault pressure.
    pub tau_limit: Vec<f64>,
    /// Fault fluid-pressure change per element (Pa).
    pub fault_dp: Vec<f64>,
    pub diagnostics: StepDiagnostics,
}

/// Full simulation output: per-step records plus checkpoint displacement
/// fields for export.
pub struct SimulationRun {
    pub mesh: Mesh,
    pub initial: StressField,
    pub schedule: PressureSchedule,
    pub records: Vec<StepRecord>,
    /// (step label, full nodal displacement vector 3*n_nodes).
    pub checkpoints: Vec<(f64, Vec<f64>)>,
    /// Final accumulated effective stress per hex, compression-positive.
    pub hex_stress: Vec<[f64; 6]>,
    /// Total KKT refactorizations spent (performance diagnostic).
    pub refactorizations: usize,
}

impl SimulationRun {
    pub fn record_at_label(&self, label: f64) -> Option<&StepRecord> {
        self.records.iter().find(|r| (r.step.label - label).abs() < 1e-9)
    }
}

/// Time-stepping engine; owns the assembled system and evolving state.
pub struct Simulator {
    pub mesh: Mesh,
    pub dofs: DofMap,
    pub props: ElasticProperties,
    pub initial: StressField,
    pub schedule: PressureSchedule,
    kkt: KktSolver,
    law: FrictionLaw,
    contact_cfg: ContactConfig,
    biot_alpha: f64,
    stiffness_scale_post_pp: Option<f64>,
    scaled: bool,
    baseline: ContactBaseline,
    /// total external load of the last converged step (free dofs)
    f_last: Vec<f64>,
    /// total displacement on free dofs
    u_total: Vec<f64>,
    states: Vec<ContactState>,
    cursor: usize,
    pub records: Vec<StepRecord>,
    checkpoints: Vec<(f64, Vec<f64>)>,
    checkpoint_labels: Vec<f64>,
}

impl Simulator {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        config.regime.validate()?;
        config.law.validate()?;
        let geom = build_geometry(config.geometry)?;
        let mesh = generate_mesh(&geom, &config.layers, &config.resolution)?;
        let initial = compute_initial_stress(&mesh, &config.regime)?;
        let props = {
            let mut p = ElasticProperties::from_mesh(&mesh);
            p.biot_alpha = config.biot_alpha;
            p
        };
        let system = assemble_stiffness(&mesh, &props)?;
        let rows = build_interface_rows(&mesh, &system.dofs);
        let kkt = KktSolver::new(&system.stiffness, rows)?;
        let schedule = build_schedule(config.fluid, &config.schedule)?;
        let states = initial_contact_states(&initial, &config.law);

        // initial-step record: everything sticking at the resolved tractions
        let tau0: Vec<f64> = states
            .iter()
            .map(|s| coulomb_limit(s.lambda_n, s.phi_current, config.law.cohesion, 0.0))
            .collect();
        let record0 = StepRecord {
            step: schedule.steps[0],
            states: states.clone(),
            tau_limit: tau0,
            fault_dp: vec![0.0; mesh.n_interfaces()],
            diagnostics: StepDiagnostics {
                cone_violation_rel: 0.0,
                complementarity: 0.0,
                slip_misalignment_rad: 0.0,
                dissipation: 0.0,
                residual_rel: 0.0,
                iterations: 0,
                n_slip: 0,
                n_open: 0,
            },
        };

        let checkpoint_labels = checkpoint_labels(&schedule);
        let n_free = system.dofs.n_free;
        let baseline = ContactBaseline::initial(&states, n_free);
        let mut sim = Simulator {
            dofs: system.dofs,
            props,
            initial,
            schedule,
            kkt,
            law: config.law,
            contact_cfg: config.contact,
            biot_alpha: config.biot_alpha,
            stiffness_scale_post_pp: config.stiffness_scale_post_pp,
            scaled: false,
            baseline,
            f_last: vec![0.0; n_free],
            u_total: vec![0.0; n_free],
            states,
            cursor: 0,
            records: vec![record0],
            checkpoints: Vec::new(),
            checkpoint_labels,
            mesh,
        };
        sim.snapshot_if_checkpoint(0.0);
        Ok(sim)
    }

    /// Advance one loading step (the next one in the schedule).
    pub fn run_loading_step(&mut self) -> Result<bool> {
        if self.cursor + 1 >= self.schedule.steps.len() {
            return Ok(false);
        }
        let step = self.schedule.steps[self.cursor + 1];

        // geochemical stiffness change at the first post-PP step: re-anchor
        // the baseline at the current converged state, then swap K
        if let Some(scale) = self.stiffness_scale_post_pp {
            if !self.scaled && step.phase != crate::pressure::Phase::PP {
                let f_last = self.f_last.clone();
                let u_last = self.u_total.clone();
                self.baseline.rebase(&self.states, &f_last, &u_last);
                self.props.scale_layer_young(&self.mesh, RESERVOIR_LAYER, scale);
                let system = assemble_stiffness(&self.mesh, &self.props)?;
                self.kkt.set_stiffness_values(&system.stiffness)?;
                self.scaled = true;
            }
        }

        // total pressure load at this step
        let mut dp_hex = vec![0.0; self.mesh.n_hexes()];
        for (h, hex) in self.mesh.hexes.iter().enumerate() {
            if hex.block != 0 {
                dp_hex[h] = self.schedule.block_pressure_change(&step, hex.block)?;
            }
        }
        let f_total = assemble_pressure_load(&self.mesh, &self.dofs, &dp_hex, self.biot_alpha)?;
        let fault_dp = self.schedule.fault_pressure(&self.mesh, &step)?.dp;

        let outcome = active_set_solve(
            &mut self.kkt,
            &self.baseline,
            &self.states,
            &self.law,
            &fault_dp,
            &f_total,
            &self.contact_cfg,
            step.label,
        )?;
        self.u_total.copy_from_slice(&outcome.du);
        self.f_last = f_total;

        let tau_limit: Vec<f64> = outcome
            .states
            .iter()
            .zip(&fault_dp)
            .map(|(s, &dpf)| coulomb_limit(s.lambda_n, s.phi_current, self.law.cohesion, dpf))
            .collect();

        self.states = outcome.states.clone();
        self.records.push(StepRecord {
            step,
            states: outcome.states,
            tau_limit,
            fault_dp,
            diagnostics: outcome.diagnostics,
        });
        self.cursor += 1;
        self.snapshot_if_checkpoint(step.label);
        Ok(true)
    }

    fn snapshot_if_checkpoint(&mut self, label: f64) {
        if self.checkpoint_labels.iter().any(|&l| (l - label).abs() < 1e-9) {
            let mut full = vec![0.0; 3 * self.mesh.n_nodes()];
            for n in 0..self.mesh.n_nodes() {
                for c in 0..3 {
                    if let Some(d) = self.dofs.dof(n, c) {
                        full[3 * n + c] = self.u_total[d];
                    }
                }
            }
            self.checkpoints.push((label, full));
        }
    }

    pub fn states(&self) -> &[ContactState] {
        &self.states
    }

    /// Final accumulated effective stress, compression-positive Voigt:
    /// initial state minus the tension-positive increment from the total
    /// displacement field.
    fn total_stress(&self) -> Result<Vec<[f64; 6]>> {
        let mut out = Vec::with_capacity(self.mesh.n_hexes());
        for (h, hex) in self.mesh.hexes.iter().enumerate() {
            let coords: [[f64; 3]; 8] = std::array::from_fn(|i| self.mesh.nodes[hex.nodes[i]]);
            let mut ue = [0.0; 24];
            for (i, &n) in hex.nodes.iter().enumerate() {
                for c in 0..3 {
                    if let Some(d) = self.dofs.dof(n, c) {
                        ue[3 * i + c] = self.u_total[d];
                    }
                }
            }
            let ds = hex_centroid_stress(&coords, &ue, self.props.young[h], self.props.poisson[h])?;
            let s0 = &self.initial.hex_stress[h];
            out.push(std::array::from_fn(|k| s0[k] - ds[k]));
        }
        Ok(out)
    }

    pub fn finish(self) -> Result<SimulationRun> {
        let hex_stress = self.total_stress()?;
        Ok(SimulationRun {
            mesh: self.mesh,
            initial: self.initial,
            schedule: self.schedule,
            records: self.records,
            checkpoints: self.checkpoints,
            hex_stress,
            refactorizations: self.kkt.refactorizations,
        })
    }
}

/// Labels of the export checkpoints: initial state, end of PP, end of
/// CGI/ST, and the middle/end of the first storage cycle when one exists.
fn checkpoint_labels(schedule: &PressureSchedule) -> Vec<f64> {
    use crate::pressure::Phase;
    let mut labels = vec![0.0];
    let mut end_pp = None;
    let mut end_recovery = None;
    for s in &schedule.steps {
        match s.phase {
            Phase::PP => end_pp = Some(s.label),
            Phase::CGI | Phase::ST => end_recovery = Some(s.label),
            _ => {}
        }
    }
    if let Some(l) = end_pp {
        labels.push(l);
    }
    if let Some(l) = end_recovery {
        labels.push(l);
        for cycle_point in [l + 0.5, l + 1.0] {
            if schedule.steps.iter().any(|s| (s.label - cycle_point).abs() < 1e-9) {
                labels.push(cycle_point);
            }
        }
    }
    labels
}

/// Run a full scenario simulation: all loading steps of the schedule.
pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationRun> {
    let mut sim = Simulator::new(config)?;
    while sim.run_loading_step()? {}
    sim.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::ContactMode;
    use crate::geomodel::FaultId;

    fn coarse_reference(fluid: FluidKind) -> SimulationConfig {
        SimulationConfig {
            resolution: MeshResolution::coarse(),
            ..SimulationConfig::reference(fluid)
        }
    }

    #[test]
    fn zero_increment_step_keeps_state() {
        // a schedule starting at dp = 0 with a first step of zero change
        let mut config = coarse_reference(FluidKind::CH4);
        config.schedule.depletion = 1.0; // ~zero loading
        let mut sim = Simulator::new(&config).unwrap();
        let before: Vec<f64> = sim.states().iter().map(|s| s.lambda_n).collect();
        sim.run_loading_step().unwrap();
        let after: Vec<f64> = sim.states().iter().map(|s| s.lambda_n).collect();
        for (b, a) in before.iter().zip(&after) {
            assert!((b - a).abs() < 1.0, "lambda_n moved by {}", (b - a).abs());
        }
        assert_eq!(sim.records.len(), 2);
    }

    #[test]
    fn elastic_reversibility_below_activation() {
        // tiny depletion keeps every element sticking; returning to zero
        // pressure restores the initial state
        let mut config = coarse_reference(FluidKind::CH4);
        config.schedule.depletion = 0.5e6;
        config.schedule.excursion_block1 = 0.2e6;
        config.schedule.excursion_block2 = 0.2e6;
        let run = run_simulation(&config).unwrap();
        assert!(run.records.iter().all(|r| r.diagnostics.n_slip == 0));
        let last = run.records.last().unwrap();
        // the final step label 13.0 has dp = 0: state equals initial
        assert_eq!(last.step.label, 13.0);
        for (s_end, s_init) in last.states.iter().zip(&run.records[0].states) {
            let scale = s_init.lambda_n.abs().max(1.0);
            assert!((s_end.lambda_n - s_init.lambda_n).abs() / scale < 1e-8);
            assert!(
                (s_end.lambda_t[0] - s_init.lambda_t[0]).hypot(
                    s_end.lambda_t[1] - s_init.lambda_t[1]
                ) / scale
                    < 1e-8
            );
            assert_eq!(s_end.mode, ContactMode::Stick);
        }
    }

    #[test]
    fn early_pp_step_raises_chi_on_boundary_faults() {
        let config = coarse_reference(FluidKind::CH4);
        let mut sim = Simulator::new(&config).unwrap();
        sim.run_loading_step().unwrap();
        let rec0 = &sim.records[0];
        let rec1 = &sim.records[1];
        assert!(rec1.diagnostics.n_slip == 0, "no sliding expected at -1.8 MPa");
        let mesh = &sim.mesh;
        for fault in [FaultId::F1, FaultId::F2] {
            let els = mesh.fault_elements(fault);
            let chi = |rec: &StepRecord| {
                els.iter()
                    .map(|&e| rec.states[e].tau_mag() / rec.tau_limit[e])
                    .fold(0.0f64, f64::max)
            };
            let (c0, c1) = (chi(rec0), chi(rec1));
            assert!(c1 > c0, "{fault}: chi_max {c0} -> {c1}");
        }
    }
}

//! Per-fluid, per-block uniform pore-pressure-change schedules over loading
//! steps, and the fault-zone fluid pressure field.
//!
//! Pressure changes are relative to the initial reservoir pressure and never
//! positive: primary production (PP) depletes linearly over 10 years, then
//! each fluid follows its own recovery/cycling history. PP and CGI/refill
//! steps are 1 year; UGS/UHS cycle steps are 15 days. Step labels are
//! fractional years (10, 11, 12, 12.5, 13, ...), matching the checkpoints at
//! which results are reported.

use crate::geomodel::Mesh;
use crate::{Error, Result};

/// Stored fluid kind. Each kind maps to exactly one schedule template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FluidKind {
    CH4,
    CO2,
    N2,
    H2,
}

impl FluidKind {
    pub const ALL: [FluidKind; 4] = [FluidKind::CH4, FluidKind::CO2, FluidKind::N2, FluidKind::H2];

    pub fn name(self) -> &'static str {
        match self {
            FluidKind::CH4 => "CH4",
            FluidKind::CO2 => "CO2",
            FluidKind::N2 => "N2",
            FluidKind::H2 => "H2",
        }
    }

    pub fn parse(s: &str) -> Option<FluidKind> {
        match s.trim().to_ascii_uppercase().as_str() {
            "CH4" => Some(FluidKind::CH4),
            "CO2" => Some(FluidKind::CO2),
            "N2" => Some(FluidKind::N2),
            "H2" => Some(FluidKind::H2),
            _ => None,
        }
    }

    /// Default cyclic pressure excursion magnitude (Pa).
    pub fn default_excursion(self) -> f64 {
        match self {
            FluidKind::CH4 => 10.0e6,
            FluidKind::H2 => 9.2e6,
            FluidKind::CO2 | FluidKind::N2 => 0.0,
        }
    }
}

impl std::fmt::Display for FluidKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Operating phase of a loading step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Primary production.
    PP,
    /// Cushion-gas injection / refill.
    CGI,
    /// Permanent storage recovery (CO2, N2).
    ST,
    /// UGS production half-cycle.
    UgsP,
    /// UGS storage half-cycle.
    UgsS,
    /// UHS withdrawal half-cycle.
    UhsP,
    /// UHS injection half-cycle.
    UhsS,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::PP => "PP",
            Phase::CGI => "CGI",
            Phase::ST => "ST",
            Phase::UgsP => "UGS_P",
            Phase::UgsS => "UGS_S",
            Phase::UhsP => "UHS_P",
            Phase::UhsS => "UHS_S",
        }
    }

    pub fn parse(s: &str) -> Option<Phase> {
        match s.trim() {
            "PP" => Some(Phase::PP),
            "CGI" => Some(Phase::CGI),
            "ST" => Some(Phase::ST),
            "UGS_P" => Some(Phase::UgsP),
            "UGS_S" => Some(Phase::UgsS),
            "UHS_P" => Some(Phase::UhsP),
            "UHS_S" => Some(Phase::UhsS),
            _ => None,
        }
    }

    /// Cyclic-storage or permanent-storage phase (everything after CGI ends).
    pub fn is_storage(self) -> bool {
        matches!(self, Phase::ST | Phase::UgsP | Phase::UgsS | Phase::UhsP | Phase::UhsS)
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One loading step of the quasi-static simulation.
#[derive(Debug, Clone, Copy)]
pub struct LoadingStep {
    pub index: usize,
    /// Fractional-year label (e.g. 10, 12.5).
    pub label: f64,
    pub duration_days: f64,
    pub phase: Phase,
}

/// Parameters of a schedule build.
#[derive(Debug, Clone, Copy)]
pub struct ScheduleParams {
    /// Maximum PP pressure drop magnitude (Pa), reference 18 MPa.
    pub depletion: f64,
    /// Number of UGS/UHS cycles (>= 1 for CH4/H2).
    pub cycles: usize,
    /// Cyclic excursion magnitude for block 1 (Pa).
    pub excursion_block1: f64,
    /// Cyclic excursion magnitude for block 2 (Pa).
    pub excursion_block2: f64,
}

impl ScheduleParams {
    pub fn reference(fluid: FluidKind) -> Self {
        let exc = fluid.default_excursion();
        ScheduleParams { depletion: 18.0e6, cycles: 1, excursion_block1: exc, excursion_block2: exc }
    }
}

/// Per-block uniform pressure-change schedule.
#[derive(Debug, Clone)]
pub struct PressureSchedule {
    pub fluid: FluidKind,
    pub steps: Vec<LoadingStep>,
    /// Pressure change vs. initial (Pa, <= 0), one entry per step.
    pub dp_block1: Vec<f64>,
    pub dp_block2: Vec<f64>,
}

/// Fault-zone fluid pressure change per interface element at one step (Pa).
#[derive(Debug, Clone)]
pub struct FaultPressureField {
    pub dp: Vec<f64>,
}

/// Number of 15-day steps per 6-month half-cycle.
const HALF_CYCLE_STEPS: usize = 12;

/// Build the per-fluid loading schedule.
///
/// Shapes are piecewise linear between phase endpoints: CH4 depletes for 10
/// years, refills in 2 (CGI), then cycles; CO2 recovers linearly over 13
/// years, N2 over 6; H2 refills over 13 years and then cycles with a 9.2 MPa
/// excursion.
pub fn build_schedule(fluid: FluidKind, params: &ScheduleParams) -> Result<PressureSchedule> {
    if params.depletion <= 0.0 {
        return Err(Error::Schedule("depletion amplitude must be positive".into()));
    }
    if params.excursion_block1 < 0.0 || params.excursion_block2 < 0.0 {
        return Err(Error::Schedule("cycle excursions must be non-negative".into()));
    }
    let cyclic = matches!(fluid, FluidKind::CH4 | FluidKind::H2);
    if cyclic && params.cycles < 1 {
        return Err(Error::Schedule(format!("{fluid} schedules need at least one cycle")));
    }

    let mut steps: Vec<LoadingStep> = Vec::new();
    let mut dp1: Vec<f64> = Vec::new();
    let mut dp2: Vec<f64> = Vec::new();
    let mut push = |label: f64, days: f64, phase: Phase, d1: f64, d2: f64| {
        steps.push(LoadingStep { index: steps.len(), label, duration_days: days, phase });
        dp1.push(d1);
        dp2.push(d2);
    };

    // initial state and 10-year primary production, common to all fluids
    push(0.0, 0.0, Phase::PP, 0.0, 0.0);
    let pp_years = 10usize;
    for y in 1..=pp_years {
        let dp = -params.depletion * y as f64 / pp_years as f64;
        push(y as f64, 365.0, Phase::PP, dp, dp);
    }

    match fluid {
        FluidKind::CH4 => {
            // 2-year CGI back to the initial pressure
            for y in 1..=2usize {
                let dp = -params.depletion * (1.0 - y as f64 / 2.0);
                push((pp_years + y) as f64, 365.0, Phase::CGI, dp, dp);
            }
            push_cycles(
                &mut push,
                12.0,
                Phase::UgsP,
                Phase::UgsS,
                params.cycles,
                params.excursion_block1,
                params.excursion_block2,
            );
        }
        FluidKind::CO2 | FluidKind::N2 => {
            let years = if fluid == FluidKind::CO2 { 13usize } else { 6 };
            for y in 1..=years {
                let dp = -params.depletion * (1.0 - y as f64 / years as f64);
                push((pp_years + y) as f64, 365.0, Phase::ST, dp, dp);
            }
        }
        FluidKind::H2 => {
            // 13-year refill, then withdrawal/injection cycles
            let years = 13usize;
            for y in 1..=years {
                let dp = -params.depletion * (1.0 - y as f64 / years as f64);
                push((pp_years + y) as f64, 365.0, Phase::CGI, dp, dp);
            }
            push_cycles(
                &mut push,
                (pp_years + years) as f64,
                Phase::UhsP,
                Phase::UhsS,
                params.cycles,
                params.excursion_block1,
                params.excursion_block2,
            );
        }
    }

    Ok(PressureSchedule { fluid, steps, dp_block1: dp1, dp_block2: dp2 })
}

fn push_cycles(
    push: &mut impl FnMut(f64, f64, Phase, f64, f64),
    start_label: f64,
    prod: Phase,
    stor: Phase,
    cycles: usize,
    exc1: f64,
    exc2: f64,
) {
    for c in 0..cycles {
        let base = start_label + c as f64;
        for k in 1..=HALF_CYCLE_STEPS {
            let f = k as f64 / HALF_CYCLE_STEPS as f64;
            push(base + 0.5 * f, 15.0, prod, -exc1 * f, -exc2 * f);
        }
        for k in 1..=HALF_CYCLE_STEPS {
            let f = 1.0 - k as f64 / HALF_CYCLE_STEPS as f64;
            push(base + 0.5 + 0.5 * (k as f64 / HALF_CYCLE_STEPS as f64), 15.0, stor, -exc1 * f, -exc2 * f);
        }
    }
}

impl PressureSchedule {
    /// Uniform pressure change applied to every reservoir hexahedron of a
    /// block at one step.
    pub fn block_pressure_change(&self, step: &LoadingStep, block: u8) -> Result<f64> {
        if step.index >= self.steps.len() {
            return Err(Error::Schedule(format!("step index {} out of range", step.index)));
        }
        match block {
            1 => Ok(self.dp_block1[step.index]),
            2 => Ok(self.dp_block2[step.index]),
            _ => Err(Error::Schedule(format!("unknown block id {block}"))),
        }
    }

    /// Step lookup by label.
    pub fn step_at_label(&self, label: f64) -> Option<&LoadingStep> {
        self.steps.iter().find(|s| (s.label - label).abs() < 1e-9)
    }

    /// Fault-zone fluid pressure change per interface element: the mean of
    /// the pressure changes of the reservoir blocks hydraulically juxtaposed
    /// to the element (one side or both), zero for elements facing no
    /// reservoir cell.
    pub fn fault_pressure(&self, mesh: &Mesh, step: &LoadingStep) -> Result<FaultPressureField> {
        let mut dp = Vec::with_capacity(mesh.interfaces.len());
        for e in &mesh.interfaces {
            let mut sum = 0.0;
            let mut n = 0usize;
            for hex in [e.hex_a, e.hex_b] {
                let block = mesh.hexes[hex].block;
                if block != 0 {
                    sum += self.block_pressure_change(step, block)?;
                    n += 1;
                }
            }
            dp.push(if n == 0 { 0.0 } else { sum / n as f64 });
        }
        Ok(FaultPressureField { dp })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomodel::{
        build_geometry, generate_mesh, reference_layers, FaultId, GeometryParams, MeshResolution,
    };
    use approx::assert_relative_eq;

    fn ch4() -> PressureSchedule {
        build_schedule(FluidKind::CH4, &ScheduleParams::reference(FluidKind::CH4)).unwrap()
    }

    #[test]
    fn ch4_checkpoints() {
        let s = ch4();
        let at = |label: f64| {
            let step = s.step_at_label(label).unwrap();
            (s.dp_block1[step.index], s.dp_block2[step.index])
        };
        assert_eq!(at(0.0), (0.0, 0.0));
        assert_eq!(at(10.0), (-18.0e6, -18.0e6));
        assert_eq!(at(11.0), (-9.0e6, -9.0e6));
        assert_eq!(at(12.0), (0.0, 0.0));
        assert_eq!(at(12.5), (-10.0e6, -10.0e6));
        assert_eq!(at(13.0), (0.0, 0.0));
    }

    #[test]
    fn h2_first_withdrawal() {
        let s = build_schedule(FluidKind::H2, &ScheduleParams::reference(FluidKind::H2)).unwrap();
        let step = s.step_at_label(23.5).unwrap();
        assert_eq!(step.phase, Phase::UhsP);
        assert_eq!(s.dp_block1[step.index], -9.2e6);
        assert_eq!(s.dp_block2[step.index], -9.2e6);
        // refill completes at label 23
        let refill_end = s.step_at_label(23.0).unwrap();
        assert_eq!(refill_end.phase, Phase::CGI);
        assert_eq!(s.dp_block1[refill_end.index], 0.0);
    }

    #[test]
    fn co2_and_n2_recovery_lengths() {
        let co2 =
            build_schedule(FluidKind::CO2, &ScheduleParams::reference(FluidKind::CO2)).unwrap();
        assert_eq!(co2.steps.last().unwrap().label, 23.0);
        assert_eq!(*co2.dp_block1.last().unwrap(), 0.0);
        let n2 = build_schedule(FluidKind::N2, &ScheduleParams::reference(FluidKind::N2)).unwrap();
        assert_eq!(n2.steps.last().unwrap().label, 16.0);
        assert_eq!(*n2.dp_block1.last().unwrap(), 0.0);
        assert!(n2.steps.iter().skip(11).all(|s| s.phase == Phase::ST));
    }

    #[test]
    fn uneven_override_5a() {
        let params = ScheduleParams {
            excursion_block1: 10.0e6,
            excursion_block2: 0.0,
            ..ScheduleParams::reference(FluidKind::CH4)
        };
        let s = build_schedule(FluidKind::CH4, &params).unwrap();
        let step = *s.step_at_label(12.5).unwrap();
        assert_eq!(s.block_pressure_change(&step, 1).unwrap(), -10.0e6);
        assert_eq!(s.block_pressure_change(&step, 2).unwrap(), 0.0);
    }

    #[test]
    fn uneven_override_5b_block2() {
        let params = ScheduleParams {
            excursion_block1: 10.0e6,
            excursion_block2: 20.0e6,
            ..ScheduleParams::reference(FluidKind::CH4)
        };
        let s = build_schedule(FluidKind::CH4, &params).unwrap();
        let step = *s.step_at_label(12.5).unwrap();
        assert_eq!(s.block_pressure_change(&step, 2).unwrap(), -20.0e6);
    }

    #[test]
    fn unknown_block_rejected() {
        let s = ch4();
        let step = s.steps[0];
        assert!(s.block_pressure_change(&step, 3).is_err());
    }

    #[test]
    fn dp_never_positive_and_bounded() {
        for fluid in FluidKind::ALL {
            let s = build_schedule(fluid, &ScheduleParams::reference(fluid)).unwrap();
            for i in 0..s.steps.len() {
                assert!(s.dp_block1[i] <= 0.0 && s.dp_block2[i] <= 0.0);
                assert!(s.dp_block1[i] >= -18.0e6 && s.dp_block2[i] >= -18.0e6);
            }
            assert_eq!(s.dp_block1[0], 0.0);
        }
    }

    #[test]
    fn cycle_closure_bitwise() {
        let params = ScheduleParams { cycles: 3, ..ScheduleParams::reference(FluidKind::CH4) };
        let s = build_schedule(FluidKind::CH4, &params).unwrap();
        let ends: Vec<f64> = s
            .steps
            .iter()
            .filter(|st| st.phase == Phase::UgsS && st.label.fract().abs() < 1e-12)
            .map(|st| s.dp_block1[st.index])
            .collect();
        assert_eq!(ends.len(), 3);
        for v in ends {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn pp_monotone_cgi_monotone() {
        let s = ch4();
        for i in 1..=10 {
            assert!(s.dp_block1[i] < s.dp_block1[i - 1]);
        }
        for i in 11..=12 {
            assert!(s.dp_block1[i] > s.dp_block1[i - 1]);
        }
    }

    #[test]
    fn fault_pressure_juxtaposition() {
        let geom = build_geometry(GeometryParams::default()).unwrap();
        let mesh = generate_mesh(&geom, &reference_layers(), &MeshResolution::coarse()).unwrap();
        let s = ch4();
        let ls10 = *s.step_at_label(10.0).unwrap();
        let field = s.fault_pressure(&mesh, &ls10).unwrap();
        // F3 element inside the reservoir interval sees both blocks
        let f3_mid = mesh
            .fault_elements(FaultId::F3)
            .into_iter()
            .find(|&i| {
                let z = mesh.interfaces[i].centroid[2];
                z > 2000.0 && z < 2200.0
            })
            .unwrap();
        assert_relative_eq!(field.dp[f3_mid], -18.0e6);
        // F2 element above the reservoir sees none
        let f2_above = mesh
            .fault_elements(FaultId::F2)
            .into_iter()
            .find(|&i| mesh.interfaces[i].centroid[2] < 1950.0)
            .unwrap();
        assert_eq!(field.dp[f2_above], 0.0);

        // bounds: min(adjacent dp) <= dp_f <= max(adjacent dp)
        for (e, &v) in mesh.interfaces.iter().zip(&field.dp) {
            let mut lo = 0.0f64;
            let mut hi = 0.0f64;
            let mut any = false;
            for hex in [e.hex_a, e.hex_b] {
                let b = mesh.hexes[hex].block;
                if b != 0 {
                    let dp = s.block_pressure_change(&ls10, b).unwrap();
                    if !any {
                        lo = dp;
                        hi = dp;
                        any = true;
                    } else {
                        lo = lo.min(dp);
                        hi = hi.max(dp);
                    }
                }
            }
            if any {
                assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
            } else {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn fault_pressure_mean_5b_mid_cycle() {
        let geom = build_geometry(GeometryParams::default()).unwrap();
        let mesh = generate_mesh(&geom, &reference_layers(), &MeshResolution::coarse()).unwrap();
        let params = ScheduleParams {
            excursion_block1: 10.0e6,
            excursion_block2: 20.0e6,
            ..ScheduleParams::reference(FluidKind::CH4)
        };
        let s = build_schedule(FluidKind::CH4, &params).unwrap();
        let step = *s.step_at_label(12.5).unwrap();
        let field = s.fault_pressure(&mesh, &step).unwrap();
        let f3_mid = mesh
            .fault_elements(FaultId::F3)
            .into_iter()
            .find(|&i| {
                let z = mesh.interfaces[i].centroid[2];
                z > 2000.0 && z < 2200.0
            })
            .unwrap();
        assert_relative_eq!(field.dp[f3_mid], -15.0e6);
    }
}

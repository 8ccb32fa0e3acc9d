//! Fault-stability diagnostics: criticality index chi, activated area t80,
//! sliding statistics and depth profiles.

use crate::contact::{ContactMode, ContactState};
use crate::geomodel::{FaultId, Mesh};
use crate::solver::{SimulationRun, StepRecord};

/// Block size used to scale the activated area into a length (m).
pub const T80_SCALE: f64 = 2000.0;
/// Criticality threshold defining the activated area.
pub const T80_THRESHOLD: f64 = 0.80;

/// Criticality index chi = |tau| / tau_L, clipped to [0, 1]. A vanishing
/// limit with nonzero shear reports chi = 1.
pub fn chi(tau_mag: f64, tau_limit: f64) -> f64 {
    if tau_limit <= 0.0 {
        if tau_mag > 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (tau_mag / tau_limit).min(1.0)
    }
}

pub fn element_chi(state: &ContactState, tau_limit: f64) -> f64 {
    chi(state.tau_mag(), tau_limit)
}

/// Lumped per-fault stability metrics at one loading step.
#[derive(Debug, Clone, Copy)]
pub struct FaultMetrics {
    pub chi_max: f64,
    /// Activated area (chi >= 0.8) scaled by the block size (m).
    pub t80: f64,
    /// Maximum cumulative slip (m).
    pub delta_max: f64,
    /// Area-weighted mean cumulative slip (m).
    pub delta_avg: f64,
    /// Elements in SLIP mode this step.
    pub n_active: usize,
}

/// t80 from per-element areas and chi values: activated area / block size.
pub fn t80_from(areas: &[f64], chis: &[f64]) -> f64 {
    let area: f64 = areas
        .iter()
        .zip(chis)
        .filter(|&(_, &c)| c >= T80_THRESHOLD)
        .map(|(&a, _)| a)
        .sum();
    area / T80_SCALE
}

/// Max and area-weighted mean of cumulative slip.
pub fn max_sliding_from(areas: &[f64], slips: &[f64]) -> (f64, f64) {
    let mut dmax = 0.0f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&a, &s) in areas.iter().zip(slips) {
        dmax = dmax.max(s);
        num += a * s;
        den += a;
    }
    (dmax, if den > 0.0 { num / den } else { 0.0 })
}

/// Per-element chi values of one fault at one step record.
pub fn fault_chis(mesh: &Mesh, fault: FaultId, record: &StepRecord) -> Vec<f64> {
    mesh.fault_elements(fault)
        .iter()
        .map(|&e| element_chi(&record.states[e], record.tau_limit[e]))
        .collect()
}

/// Lumped metrics of one fault at one step.
pub fn fault_metrics(mesh: &Mesh, fault: FaultId, record: &StepRecord) -> FaultMetrics {
    let els = mesh.fault_elements(fault);
    let areas: Vec<f64> = els.iter().map(|&e| mesh.interfaces[e].area).collect();
    let chis: Vec<f64> =
        els.iter().map(|&e| element_chi(&record.states[e], record.tau_limit[e])).collect();
    let slips: Vec<f64> = els.iter().map(|&e| record.states[e].cumulative_slip).collect();
    let n_active =
        els.iter().filter(|&&e| record.states[e].mode == ContactMode::Slip).count();
    let chi_max = chis.iter().fold(0.0f64, |a, &b| a.max(b));
    let (delta_max, delta_avg) = max_sliding_from(&areas, &slips);
    FaultMetrics { chi_max, t80: t80_from(&areas, &chis), delta_max, delta_avg, n_active }
}

/// One stripe of the depth profile: elements of one mesh row.
#[derive(Debug, Clone, Copy)]
pub struct ProfileStripe {
    pub row: usize,
    /// Mean centroid depth of the stripe (m).
    pub depth: f64,
    /// Area-weighted mean chi.
    pub chi_mean: f64,
}

/// Depth-averaged chi profile: area-weighted mean per element row, ordered
/// by depth.
pub fn chi_depth_profile(mesh: &Mesh, fault: FaultId, record: &StepRecord) -> Vec<ProfileStripe> {
    let els = mesh.fault_elements(fault);
    let max_row = els.iter().map(|&e| mesh.interfaces[e].row).max().unwrap_or(0);
    let mut acc = vec![(0.0f64, 0.0f64, 0.0f64); max_row + 1]; // (chi*area, area, depth*area)
    for &e in &els {
        let ie = &mesh.interfaces[e];
        let c = element_chi(&record.states[e], record.tau_limit[e]);
        let a = ie.area;
        let slot = &mut acc[ie.row];
        slot.0 += c * a;
        slot.1 += a;
        slot.2 += ie.centroid[2] * a;
    }
    acc.iter()
        .enumerate()
        .filter(|(_, s)| s.1 > 0.0)
        .map(|(row, s)| ProfileStripe { row, depth: s.2 / s.1, chi_mean: s.0 / s.1 })
        .collect()
}

/// Earliest step label at which any element of the fault slips.
pub fn first_activation_step(run: &SimulationRun, fault: FaultId) -> Option<f64> {
    let els = run.mesh.fault_elements(fault);
    for rec in &run.records {
        if els.iter().any(|&e| rec.states[e].mode == ContactMode::Slip) {
            return Some(rec.step.label);
        }
    }
    None
}

/// Metric series over all steps of a run for one fault.
pub fn metric_series(run: &SimulationRun, fault: FaultId) -> Vec<(f64, FaultMetrics)> {
    run.records.iter().map(|r| (r.step.label, fault_metrics(&run.mesh, fault, r))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn chi_basics() {
        assert_eq!(chi(0.0, 13.5e6), 0.0);
        assert_eq!(chi(13.5e6, 13.5e6), 1.0);
        assert_relative_eq!(chi(10.838e6, 13.547e6), 0.80, max_relative = 1e-3);
        // clipped and degenerate cases
        assert_eq!(chi(20.0e6, 13.5e6), 1.0);
        assert_eq!(chi(1.0e6, 0.0), 1.0);
        assert_eq!(chi(0.0, 0.0), 0.0);
    }

    #[test]
    fn t80_hand_sums() {
        // no element over threshold
        assert_eq!(t80_from(&[1.0e4; 4], &[0.5, 0.2, 0.79, 0.0]), 0.0);
        // 8 elements of 200 x 50 m over threshold: 80000 / 2000 = 40 m
        let areas = vec![200.0 * 50.0; 8];
        let chis = vec![0.85; 8];
        assert_relative_eq!(t80_from(&areas, &chis), 40.0, max_relative = 1e-12);
        // full F3 plane 2000 x 1400
        assert_relative_eq!(
            t80_from(&[2000.0 * 1400.0], &[1.0]),
            1400.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn sliding_stats() {
        assert_eq!(max_sliding_from(&[1.0; 3], &[0.0; 3]), (0.0, 0.0));
        // one element of area a slipped 1 cm on a fault of area 10 a
        let areas = [1.0, 9.0];
        let slips = [0.01, 0.0];
        let (dmax, davg) = max_sliding_from(&areas, &slips);
        assert_relative_eq!(dmax, 0.01, max_relative = 1e-12);
        assert_relative_eq!(davg, 0.001, max_relative = 1e-12);
    }

    #[test]
    fn stripe_means() {
        // two equal-area elements chi = {1.0, 0.6} -> mean 0.8 handled by
        // the weighted average helper used in chi_depth_profile
        let num = 1.0 * 1.0 + 0.6 * 1.0;
        assert_relative_eq!(num / 2.0, 0.8, max_relative = 1e-12);
    }
}

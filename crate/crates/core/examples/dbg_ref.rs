use faultbands::geomodel::{FaultId, MeshResolution};
use faultbands::metrics::*;
use faultbands::pressure::FluidKind;
use faultbands::solver::*;
use std::time::Instant;
fn main() {
    let res = std::env::args().nth(1).unwrap_or("coarse".into());
    let mut config = SimulationConfig::reference(FluidKind::CH4);
    config.resolution = if res == "desk" { MeshResolution::default() } else { MeshResolution::coarse() };
    let t0 = Instant::now();
    let run = run_simulation(&config).unwrap();
    println!("runtime {:.1?} refactorizations {}", t0.elapsed(), run.refactorizations);
    for fault in FaultId::ALL {
        let act = first_activation_step(&run, fault);
        print!("{fault}: act={act:?} ");
        let series = metric_series(&run, fault);
        let end_pp = series.iter().find(|(l, _)| *l == 10.0).unwrap().1;
        let ls11 = series.iter().find(|(l, _)| *l == 11.0).unwrap().1;
        let ls125 = series.iter().find(|(l, _)| *l == 12.5).unwrap().1;
        let ls13 = series.iter().find(|(l, _)| *l == 13.0).unwrap().1;
        println!("chi_max@10={:.3} dmax@10={:.4} t80@10={:.0} | chi@11={:.3} chi@12.5={:.3} chi@13={:.3}",
            end_pp.chi_max, end_pp.delta_max, end_pp.t80, ls11.chi_max, ls125.chi_max, ls13.chi_max);
    }
    // chi_max(F1) over PP monotone?
    let f1 = metric_series(&run, FaultId::F1);
    let pp: Vec<f64> = f1.iter().take(11).map(|(_, m)| m.chi_max).collect();
    println!("F1 chi over PP: {:?}", pp.iter().map(|c| (c * 1000.0).round() / 1000.0).collect::<Vec<_>>());
    // diagnostics worst-case
    let mut worst_cone = 0.0f64; let mut worst_align = 0.0f64; let mut worst_res = 0.0f64; let mut worst_iters = 0;
    for r in &run.records {
        worst_cone = worst_cone.max(r.diagnostics.cone_violation_rel);
        worst_align = worst_align.max(r.diagnostics.slip_misalignment_rad);
        worst_res = worst_res.max(r.diagnostics.residual_rel);
        worst_iters = worst_iters.max(r.diagnostics.iterations);
    }
    println!("worst cone={worst_cone:.2e} align={worst_align:.2e} res={worst_res:.2e} iters={worst_iters}");
    // F4 vs F5 symmetry
    let f4 = metric_series(&run, FaultId::F4);
    let f5 = metric_series(&run, FaultId::F5);
    let mut dmax = 0.0f64;
    for (a, b) in f4.iter().zip(&f5) {
        dmax = dmax.max((a.1.chi_max - b.1.chi_max).abs() / a.1.chi_max.max(1e-12));
    }
    println!("F4/F5 chi_max rel diff max {dmax:.2e}");
    // F3 quiet?
    let f3 = metric_series(&run, FaultId::F3);
    let f3max = f3.iter().map(|(_, m)| m.chi_max).fold(0.0f64, f64::max);
    println!("F3 chi_max over run {f3max:.2e}");
}

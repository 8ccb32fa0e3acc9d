use faultbands::pressure::FluidKind;
use faultbands::solver::*;
use faultbands::geomodel::MeshResolution;
fn main() {
    let mut config = SimulationConfig::reference(FluidKind::CH4);
    config.resolution = MeshResolution::coarse();
    config.schedule.depletion = 0.5e6;
    config.schedule.excursion_block1 = 0.2e6;
    config.schedule.excursion_block2 = 0.2e6;
    let run = run_simulation(&config).unwrap();
    println!("refactorizations: {}", run.refactorizations);
    let init = &run.records[0];
    // a single PP step then its exact reverse: is one round trip clean?
    for labels in [[1.0f64, 12.0], [12.5, 13.0]] {
        let rec = run.record_at_label(labels[1]).unwrap();
        let mut dmax = 0.0f64;
        let mut largest = 0usize;
        for (e, (s, s0)) in rec.states.iter().zip(&init.states).enumerate() {
            let d = (s.lambda_n - s0.lambda_n).abs()
                .max((s.lambda_t[0] - s0.lambda_t[0]).abs())
                .max((s.lambda_t[1] - s0.lambda_t[1]).abs());
            if d > dmax { dmax = d; largest = e; }
        }
        let o = rec.diagnostics.n_open;
        println!("label {:5.2}: n_open {} max state diff {:.3e} Pa at e{}", labels[1], o, dmax, largest);
    }
    // check: does a fresh single solve of +X then -X cancel?
    // (reuse step 1 and step 11-12 rhs patterns via schedule increments)
}

use faultbands::pressure::FluidKind;
use faultbands::solver::*;
use faultbands::geomodel::MeshResolution;
fn main() {
    let mut config = SimulationConfig::reference(FluidKind::CH4);
    config.resolution = MeshResolution::coarse();
    config.schedule.depletion = 1.0;
    let mut sim = Simulator::new(&config).unwrap();
    match sim.run_loading_step() {
        Ok(_) => println!("step ok"),
        Err(e) => println!("step failed: {e}"),
    }
}

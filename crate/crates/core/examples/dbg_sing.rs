use faultbands::contact::*;
use faultbands::fem::*;
use faultbands::geomodel::*;
use faultbands::kkt::*;
use faultbands::pressure::*;

fn main() {
    let geom = build_geometry(GeometryParams::default()).unwrap();
    let mesh = generate_mesh(&geom, &reference_layers(), &MeshResolution::coarse()).unwrap();
    let field = compute_initial_stress(&mesh, &StressRegime::reference()).unwrap();
    let props = ElasticProperties::from_mesh(&mesh);
    let system = assemble_stiffness(&mesh, &props).unwrap();
    let rows = build_interface_rows(&mesh, &system.dofs);
    let mut kkt = KktSolver::new(&system.stiffness, rows).unwrap();

    // all-stick solve with the year-1 pressure load
    let sched = build_schedule(FluidKind::CH4, &ScheduleParams::reference(FluidKind::CH4)).unwrap();
    let step = sched.steps[1];
    let mut dp_hex = vec![0.0; mesh.n_hexes()];
    for (h, hex) in mesh.hexes.iter().enumerate() {
        if hex.block != 0 {
            dp_hex[h] = sched.block_pressure_change(&step, hex.block).unwrap();
        }
    }
    let f = assemble_pressure_load(&mesh, &system.dofs, &dp_hex, 1.0).unwrap();
    let states = vec![RowState::Jump { target: 0.0 }; kkt.n_m()];
    let sol = kkt.solve(&states, &f).unwrap();
    println!("residual {:.2e}", sol.residual_rel);
    let mut bad: Vec<(usize, f64)> = Vec::new();
    for (r, &l) in sol.dlam.iter().enumerate() {
        if l.abs() > 1.0e9 {
            bad.push((r, l));
        }
    }
    bad.sort_by(|a, b| b.1.abs().partial_cmp(&a.1.abs()).unwrap());
    println!("{} rows with |dlam| > 1e9", bad.len());
    for &(r, l) in bad.iter().take(12) {
        let e = r / 3;
        let c = r % 3;
        let ie = &mesh.interfaces[e];
        println!("  row {r} elem {e} comp {c} fault {} centroid ({:.0},{:.0},{:.0}) dlam {:.2e}",
            ie.fault, ie.centroid[0], ie.centroid[1], ie.centroid[2], l);
        let _ = &field;
    }
}

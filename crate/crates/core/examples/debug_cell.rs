use fsi_core::fem::MaterialParams;
use fsi_core::krylov::precond::{ApplyMode, PrecondKind};
use fsi_core::mesh::{build_two_region_mesh, GeometryTag};
use fsi_core::system::{build_system, gce_time_step, prepare_step, solve_system, DirichletData, StepConfig, TimeState};

fn main() {
    // the ordering cell: level 2, k = 1e-2, across inflow peaks and ratios
    for peak in [0.25, 0.5, 1.0, 2.0, 4.0] {
        for ratio in [1.0, 10.0, 100.0] {
            let mesh = build_two_region_mesh::<f64>(GeometryTag::CavityHalves, 2).unwrap();
            let params = MaterialParams::unit().with_time_step(1e-2).with_density_ratio(ratio);
            let mut config = StepConfig::default();
            config.dirichlet = DirichletData::ParabolicInflow { peak };
            let mut state = TimeState::initial(mesh).unwrap();
            for _ in 0..2 {
                state = gce_time_step(&state, &params, &config).unwrap();
            }
            let prepared = prepare_step(&state, &params, &config).unwrap();
            let mut counts = Vec::new();
            for kind in PrecondKind::all() {
                let sys = build_system(&prepared.reduced, &params, kind.expected_variant()).unwrap();
                let (_, _, rep) = solve_system(&sys, kind, ApplyMode::UpperTriangular, 1e-10, 500).unwrap();
                counts.push(rep.iterations);
            }
            println!("peak={peak:<5} ratio={ratio:<5} M1={} M2={} M3={} SC={}", counts[0], counts[1], counts[2], counts[3]);
        }
    }
}

// Temporary exploration harness for picking acceptance thresholds.

use fsi_core::krylov::precond::{ApplyMode, PrecondKind};
use fsi_core::fem::MaterialParams;
use fsi_core::mesh::{build_two_region_mesh, GeometryTag};
use fsi_core::system::{
    build_system, gce_time_step, prepare_step, solve_system, DirichletData, StepConfig, TimeState,
};

fn main() {
    let step_index: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let kinds = PrecondKind::all();
    println!("reporting the solve of step {step_index}");
    println!("level  k      ratio   M1   M2   M3   SC   (r)");
    for level in 0..3 {
        let mesh = build_two_region_mesh::<f64>(GeometryTag::CavityHalves, level).unwrap();
        for k in [1e-2, 1e-3, 1e-4] {
            for ratio in [1.0, 10.0, 100.0] {
                let params = MaterialParams::unit().with_time_step(k).with_density_ratio(ratio);
                let mut config = StepConfig::default();
                if std::env::var_os("SCOUT_BODY_FORCE").is_some() {
                    config.body_force_structure = [0.0, -1.0];
                } else {
                    config.dirichlet = DirichletData::ParabolicInflow { peak: 1.0 };
                }
                let mut state = TimeState::initial(mesh.clone()).unwrap();
                for _ in 0..step_index - 1 {
                    state = gce_time_step(&state, &params, &config).unwrap();
                }
                let prepared = prepare_step(&state, &params, &config).unwrap();
                let mut counts = Vec::new();
                let mut r = 0.0;
                for kind in kinds {
                    let sys = build_system(&prepared.reduced, &params, kind.expected_variant()).unwrap();
                    r = sys.r;
                    let (_, _, rep) =
                        solve_system(&sys, kind, ApplyMode::UpperTriangular, 1e-10, 500).unwrap();
                    counts.push(if rep.converged { rep.iterations as i64 } else { -(rep.iterations as i64) });
                }
                println!(
                    "{level}      {k:<7} {ratio:<6} {:>4} {:>4} {:>4} {:>4}   r={r:.1e}",
                    counts[0], counts[1], counts[2], counts[3]
                );
            }
        }
    }
}

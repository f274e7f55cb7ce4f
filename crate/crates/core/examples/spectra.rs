use fsi_core::analysis::{infsup_for_blocks, preconditioned_spectrum, NormKind};
use fsi_core::fem::MaterialParams;
use fsi_core::krylov::precond::{ApplyMode, PrecondKind};
use fsi_core::mesh::{build_two_region_mesh, GeometryTag};
use fsi_core::system::{build_system, gce_time_step, prepare_step, DirichletData, StepConfig, TimeState};

fn main() {
    let mesh = build_two_region_mesh::<f64>(GeometryTag::CavityHalves, 0).unwrap();
    for (k, ratio) in [(1.0, 1.0), (1e-2, 1.0), (1e-3, 10.0), (1e-4, 100.0), (1e-6, 1.0)] {
        let params = MaterialParams::unit().with_time_step(k).with_density_ratio(ratio);
        let mut config = StepConfig::default();
        config.dirichlet = DirichletData::ParabolicInflow { peak: 1.0 };
        let mut state = TimeState::initial(mesh.clone()).unwrap();
        let warm = if k <= 1e-2 { 2 } else { 0 };
        for _ in 0..warm {
            state = gce_time_step(&state, &params, &config).unwrap();
        }
        let prepared = prepare_step(&state, &params, &config).unwrap();
        for kind in [PrecondKind::M1, PrecondKind::M2, PrecondKind::M3, PrecondKind::Sc] {
            let sys = build_system(&prepared.reduced, &params, kind.expected_variant()).unwrap();
            let beta_v = infsup_for_blocks(&prepared.reduced, &prepared.space, sys.r, NormKind::V).unwrap().beta;
            let d = preconditioned_spectrum(&sys, kind, ApplyMode::BlockDiagonal).unwrap();
            let t = preconditioned_spectrum(&sys, kind, ApplyMode::UpperTriangular).unwrap();
            println!(
                "k={k:<8} ratio={ratio:<5} {:?}: cond_diag={:>12.4e} cond_tri={:>12.4e} beta_V={beta_v:.4}",
                kind, d.condition, t.condition
            );
        }
        println!();
    }
}

//! The modified geometry-convective-explicit time loop.
//!
//! Each step: extend the predicted interface motion into the fluid mesh,
//! move the mesh, assemble on the moved configuration, solve one symmetric
//! saddle system for the coupled velocity and pressure, then update the
//! structure displacement from the new structure velocity. Geometry and
//! convection are explicit, so the per-step system is linear and symmetric;
//! the ALE extension is re-solved from the reference mesh every step (total
//! displacement, no incremental bookkeeping).

use crate::error::{Error, Result};
use crate::fem::{
    apply_dirichlet, assemble_blocks, assemble_rhs, build_space_with_options, CoupledSpace,
    MaterialParams, PrevState, SpaceOptions,
};
use crate::krylov::gmres::SolveReport;
use crate::krylov::precond::{ApplyMode, PrecondKind};
use crate::mesh::{
    mesh_velocity, move_mesh, solve_ale_extension, AleOperator, BoundaryMarker, Mesh, MeshMotion,
};
use crate::scalar::Real;
use crate::system::{build_system, solve_system, SystemVariant};

/// Dirichlet data for the velocity on the outer boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirichletData<T> {
    /// Homogeneous everywhere (the analysis setting).
    Zero,
    /// Parabolic x-velocity profile on the fluid part of the left wall,
    /// vanishing at the segment ends.
    ParabolicInflow { peak: T },
}

/// Per-step solver and scheme configuration.
#[derive(Debug, Clone, Copy)]
pub struct StepConfig<T> {
    pub variant: SystemVariant,
    pub preconditioner: PrecondKind,
    pub mode: ApplyMode,
    pub tolerance: T,
    pub max_iter: usize,
    pub ale_operator: AleOperator<T>,
    pub body_force_fluid: [T; 2],
    pub body_force_structure: [T; 2],
    pub dirichlet: DirichletData<T>,
    /// scales the inflow peak; drivers ramp this over early steps
    pub inflow_scale: T,
    pub space_options: SpaceOptions,
}

impl<T: Real> Default for StepConfig<T> {
    fn default() -> Self {
        StepConfig {
            variant: SystemVariant::Stabilized,
            preconditioner: PrecondKind::M1,
            mode: ApplyMode::UpperTriangular,
            tolerance: T::of(1e-10),
            max_iter: 500,
            ale_operator: AleOperator::Laplacian,
            body_force_fluid: [T::zero(); 2],
            body_force_structure: [T::zero(); 2],
            dirichlet: DirichletData::Zero,
            inflow_scale: T::one(),
            space_options: SpaceOptions::default(),
        }
    }
}

/// Snapshot of the coupled state after step `step`.
#[derive(Debug, Clone)]
pub struct TimeState<T> {
    pub step: usize,
    /// current configuration (fluid moved, structure on reference)
    pub mesh: Mesh<T>,
    /// total ALE displacement over the reference mesh
    pub motion: MeshMotion<T>,
    /// coupled velocity coefficients on the current mesh
    pub velocity: Vec<T>,
    pub pressure: Vec<T>,
    /// structure displacement coefficients (zero off-structure)
    pub displacement: Vec<T>,
    /// report of the solve that produced this state
    pub report: Option<SolveReport<T>>,
}

impl<T: Real> TimeState<T> {
    /// Zero state on the reference mesh.
    pub fn initial(mesh: Mesh<T>) -> Result<Self> {
        let space = build_space_with_options(&mesh, SpaceOptions::default())?;
        let n_v = space.n_velocity_dofs();
        let n_p = space.n_pressure_dofs();
        Ok(TimeState {
            step: 0,
            motion: MeshMotion::zero(mesh.clone()),
            mesh,
            velocity: vec![T::zero(); n_v],
            pressure: vec![T::zero(); n_p],
            displacement: vec![T::zero(); n_v],
            report: None,
        })
    }
}

/// Dirichlet values for the current space: the parabolic profile on the
/// fluid segment of the left wall (if requested), zero everywhere else.
pub fn dirichlet_values<T: Real>(
    space: &CoupledSpace<T>,
    data: &DirichletData<T>,
    scale: T,
) -> Vec<(usize, T)> {
    let peak = match data {
        DirichletData::Zero => return Vec::new(),
        DirichletData::ParabolicInflow { peak } => *peak * scale,
    };
    let mesh = space.mesh();
    let tol = T::of(1e-12) * mesh.diameter();
    let x_min = mesh
        .nodes()
        .iter()
        .map(|p| p[0])
        .fold(T::infinity(), T::min);
    // fluid scalar nodes constrained on the left wall
    let candidates: Vec<(usize, [T; 2])> = space
        .boundary_scalar_nodes(BoundaryMarker::OuterDirichlet)
        .into_iter()
        .filter(|(s, p)| (p[0] - x_min).abs() <= tol && space.scalar_touches_fluid(*s))
        .collect();
    if candidates.is_empty() {
        return Vec::new();
    }
    let mut y_lo = T::infinity();
    let mut y_hi = T::neg_infinity();
    for (_, p) in &candidates {
        y_lo = y_lo.min(p[1]);
        y_hi = y_hi.max(p[1]);
    }
    let span = y_hi - y_lo;
    if !(span > T::zero()) {
        return Vec::new();
    }
    let four = T::of(4.0);
    let mut values = Vec::new();
    for (s, p) in candidates {
        let vx = peak * four * (p[1] - y_lo) * (y_hi - p[1]) / (span * span);
        if vx != T::zero() {
            values.push((space.velocity_dof(s, 0), vx));
        }
    }
    values
}

/// The geometry and eliminated blocks of one step, before any variant is
/// materialized or solved. Also the entry point for benchmark drivers that
/// want to compare several preconditioners on the same step.
pub struct PreparedStep<T> {
    pub moved_mesh: Mesh<T>,
    pub motion: MeshMotion<T>,
    pub space: CoupledSpace<T>,
    pub reduced: crate::fem::ReducedBlocks<T>,
}

/// Mesh motion, assembly and elimination for the step after `state`.
pub fn prepare_step<T: Real>(
    state: &TimeState<T>,
    params: &MaterialParams<T>,
    config: &StepConfig<T>,
) -> Result<PreparedStep<T>> {
    params.validate()?;
    let reference = state.motion.reference().clone();
    let space_now = build_space_with_options(&state.mesh, config.space_options)?;

    // interface prediction: vertex interpolation of u_s^n + k v^n
    let k = params.k;
    let mut datum = Vec::with_capacity(reference.interface_vertices().len());
    for &(fv, _sv) in reference.interface_vertices() {
        let s = space_now.vertex_scalar(fv);
        let dx = state.displacement[space_now.velocity_dof(s, 0)]
            + k * state.velocity[space_now.velocity_dof(s, 0)];
        let dy = state.displacement[space_now.velocity_dof(s, 1)]
            + k * state.velocity[space_now.velocity_dof(s, 1)];
        datum.push([dx, dy]);
    }

    let motion_next = solve_ale_extension(&reference, &datum, config.ale_operator)?;
    if !motion_next.is_valid() {
        return Err(Error::StepAborted {
            step: state.step,
            reason: format!("mesh tangling: min det = {:e}", motion_next.min_det().as_f64()),
        });
    }
    let moved = move_mesh(&reference, &motion_next)?;
    let grid_velocity = mesh_velocity(&state.motion, &motion_next, k)?;

    // assembly on the moved configuration; nodal coefficients ride along
    // with the grid points, so previous-step fields need no interpolation
    let space = build_space_with_options(&moved, config.space_options)?;
    let blocks = assemble_blocks(&space, params);
    let prev = PrevState {
        velocity: &state.velocity,
        displacement: &state.displacement,
        mesh_velocity: &grid_velocity,
    };
    let rhs = assemble_rhs(&space, params, &prev, config.body_force_fluid, config.body_force_structure)?;
    let values = dirichlet_values(&space, &config.dirichlet, config.inflow_scale);
    let reduced = apply_dirichlet(&blocks, &rhs, &space, &values)?;
    Ok(PreparedStep { moved_mesh: moved, motion: motion_next, space, reduced })
}

/// Advance one step of the modified explicit scheme.
pub fn gce_time_step<T: Real>(
    state: &TimeState<T>,
    params: &MaterialParams<T>,
    config: &StepConfig<T>,
) -> Result<TimeState<T>> {
    let prepared = prepare_step(state, params, config)?;
    let system = build_system(&prepared.reduced, params, config.variant)?;

    let (v_free, pressure, report) =
        solve_system(&system, config.preconditioner, config.mode, config.tolerance, config.max_iter)?;
    if !report.converged {
        let last = report
            .residual_history
            .last()
            .map(|r| r.as_f64())
            .unwrap_or(f64::NAN);
        return Err(Error::NotConverged { iterations: report.iterations, residual: last });
    }
    let velocity = system.map.expand(&v_free);

    // displacement update u^{n+1} = u^n + k v^{n+1} on the structure side
    let k = params.k;
    let space = &prepared.space;
    let mut displacement = vec![T::zero(); velocity.len()];
    for s in 0..space.n_scalar_nodes() {
        if space.scalar_touches_structure(s) {
            for c in 0..2 {
                let dof = space.velocity_dof(s, c);
                displacement[dof] = state.displacement[dof] + k * velocity[dof];
            }
        }
    }

    Ok(TimeState {
        step: state.step + 1,
        mesh: prepared.moved_mesh,
        motion: prepared.motion,
        velocity,
        pressure,
        displacement,
        report: Some(report),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_two_region_mesh, GeometryTag};

    fn cavity_state() -> TimeState<f64> {
        let mesh = build_two_region_mesh(GeometryTag::CavityHalves, 0).unwrap();
        TimeState::initial(mesh).unwrap()
    }

    #[test]
    fn zero_data_stays_exactly_zero() {
        let params = MaterialParams::unit().with_time_step(0.01);
        let config = StepConfig::default();
        let mut state = cavity_state();
        for _ in 0..3 {
            state = gce_time_step(&state, &params, &config).unwrap();
            assert!(state.velocity.iter().all(|&v| v == 0.0));
            assert!(state.pressure.iter().all(|&p| p == 0.0));
            assert!(state.displacement.iter().all(|&d| d == 0.0));
            let report = state.report.as_ref().unwrap();
            assert!(report.converged && report.iterations <= 1);
        }
    }

    #[test]
    fn forced_step_is_discretely_divergence_free() {
        let params = MaterialParams::unit().with_time_step(0.01);
        let mut config = StepConfig::default();
        config.body_force_structure = [0.0, -1.0];
        let state = cavity_state();
        let next = gce_time_step(&state, &params, &config).unwrap();
        // || B v ||_inf <= 1e-9 ||v||
        let space = build_space_with_options(&next.mesh, SpaceOptions::default()).unwrap();
        let blocks = assemble_blocks(&space, &params);
        let mut bv = vec![0.0; space.n_pressure_dofs()];
        blocks.b.matvec(&next.velocity, &mut bv);
        let vmax = next.velocity.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let div = bv.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(vmax > 0.0, "the body force must drive a nonzero velocity");
        assert!(div <= 1e-9 * vmax, "div residual {div:e} vs velocity {vmax:e}");
    }

    #[test]
    fn displacement_update_telescopes() {
        let params = MaterialParams::unit().with_time_step(0.05);
        let mut config = StepConfig::default();
        config.body_force_structure = [0.2, -0.7];
        let s0 = cavity_state();
        let s1 = gce_time_step(&s0, &params, &config).unwrap();
        let s2 = gce_time_step(&s1, &params, &config).unwrap();
        let space = build_space_with_options(&s2.mesh, SpaceOptions::default()).unwrap();
        for s in 0..space.n_scalar_nodes() {
            if !space.scalar_touches_structure(s) {
                continue;
            }
            for c in 0..2 {
                let dof = space.velocity_dof(s, c);
                let expect = params.k * (s1.velocity[dof] + s2.velocity[dof]);
                assert!((s2.displacement[dof] - expect).abs() <= 1e-15 * expect.abs().max(1.0));
            }
        }
    }
}

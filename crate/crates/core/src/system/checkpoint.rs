//! Per-step checkpoints.
//!
//! A checkpoint stores the reference mesh plus the total ALE displacement,
//! so the moved configuration is reconstructible exactly; field vectors use
//! the `index value` coordinate text layout with 17 significant digits.
//! Serial re-runs reproduce these files bit for bit.

use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::mesh::write_mesh;
use crate::scalar::Real;
use crate::system::time::TimeState;

fn push_vector<T: Real>(out: &mut String, name: &str, data: impl Iterator<Item = T>, len: usize) {
    out.push_str(&format!("vector {name} {len}\n"));
    for (i, v) in data.enumerate() {
        out.push_str(&format!("{i} {}\n", v.fmt_full()));
    }
}

pub fn checkpoint_to_string<T: Real>(state: &TimeState<T>) -> String {
    let mut out = String::new();
    out.push_str(&format!("step {}\n", state.step));
    out.push_str(&write_mesh(state.motion.reference()));
    let flat_disp = state.motion.displacement().iter().flat_map(|d| d.iter().copied());
    push_vector(&mut out, "ale_displacement", flat_disp, 2 * state.motion.displacement().len());
    push_vector(&mut out, "velocity", state.velocity.iter().copied(), state.velocity.len());
    push_vector(&mut out, "pressure", state.pressure.iter().copied(), state.pressure.len());
    push_vector(&mut out, "displacement", state.displacement.iter().copied(), state.displacement.len());
    out
}

/// Write `checkpoint_NNNN.txt` into `dir`, returning the path.
pub fn write_checkpoint<T: Real>(state: &TimeState<T>, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(format!("checkpoint_{:04}.txt", state.step));
    std::fs::write(&path, checkpoint_to_string(state))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::MaterialParams;
    use crate::mesh::{build_two_region_mesh, GeometryTag};
    use crate::system::time::{gce_time_step, StepConfig, TimeState};

    #[test]
    fn identical_runs_produce_identical_checkpoints() {
        let run = || {
            let mesh = build_two_region_mesh::<f64>(GeometryTag::CavityHalves, 0).unwrap();
            let params = MaterialParams::unit().with_time_step(0.02);
            let mut config = StepConfig::default();
            config.body_force_structure = [0.1, -0.4];
            let mut state = TimeState::initial(mesh).unwrap();
            let mut chunks = Vec::new();
            for _ in 0..3 {
                state = gce_time_step(&state, &params, &config).unwrap();
                chunks.push(checkpoint_to_string(&state));
            }
            chunks
        };
        assert_eq!(run(), run());
    }
}

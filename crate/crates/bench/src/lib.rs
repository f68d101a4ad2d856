//! Benchmark inputs shared by the bench targets.

use ucit_core::{CoveringArrayModel, Factor, SpaceModel};

/// `n` factors with `v` values each and no constraint.
pub fn uniform_ca(n: usize, v: usize) -> SpaceModel {
    SpaceModel::Ca(CoveringArrayModel::new(
        (0..n).map(|i| Factor::new(format!("f{i}"), (0..v).map(|x| format!("v{x}")))).collect(),
    ))
}

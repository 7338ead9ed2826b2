//! Replicate-parallel simulation.
//!
//! Each replicate draws from its own split stream and results are collected in
//! replicate order, so the ensemble does not depend on the thread count.

use isocov_core::linalg::Matrix;
use isocov_core::simulate::{FieldEnsemble, FieldSimulator, RandomStream};
use isocov_core::spaces::{Point, Space};
use rayon::prelude::*;

use crate::io::Result;

/// Parallel counterpart of [`isocov_core::simulate::simulate_field`] on a pool
/// of `threads` workers (`0` selects the rayon default).
pub fn simulate_field_parallel(
    space: Space,
    b_seq: &[Matrix],
    n_max: usize,
    points: Vec<Point>,
    replicates: usize,
    stream: &RandomStream,
    threads: usize,
) -> Result<FieldEnsemble> {
    let sim = FieldSimulator::new(space, b_seq, n_max, points)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let rows = pool.install(|| {
        (0..replicates as u64)
            .into_par_iter()
            .map(|r| sim.replicate(stream, r))
            .collect::<isocov_core::Result<Vec<_>>>()
    })?;
    Ok(sim.ensemble(rows, stream))
}

//! Parallel replication over independent random streams.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::diagnostics::RunDiagnostics;
use crate::draws::Draws;
use crate::error::{invalid, Result};

/// Generator for worker `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Splits `n` draws over `workers` independent streams and runs `run` on
/// each in parallel. Output rows are concatenated in stream order, so the
/// result depends only on `(n, seed, workers)`, not on thread scheduling.
pub fn replicate<F>(n: usize, seed: u64, workers: usize, run: F) -> Result<(Draws, RunDiagnostics)>
where
    F: Fn(usize, &mut ChaCha20Rng) -> Result<(Draws, RunDiagnostics)> + Sync,
{
    if n < 1 {
        return invalid("number of draws must be at least 1");
    }
    if workers < 1 {
        return invalid("at least one worker is required");
    }
    let workers = workers.min(n);
    let start = Instant::now();
    let parts: Vec<Result<(Draws, RunDiagnostics)>> = (0..workers)
        .into_par_iter()
        .map(|k| {
            let share = n / workers + usize::from(k < n % workers);
            let mut rng = stream_rng(seed, k as u64);
            run(share, &mut rng)
        })
        .collect();
    let mut iter = parts.into_iter();
    let (mut draws, mut diag) = iter.next().expect("at least one worker")?;
    for part in iter {
        let (d, g) = part?;
        draws.append(&d);
        diag.merge(&g);
    }
    diag.seed = seed;
    diag.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok((draws, diag))
}

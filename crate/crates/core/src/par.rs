//! Stream-parallel map. With the `parallel` feature the streams run on a
//! rayon pool; without it they run in order on the calling thread. Results
//! come back in stream order either way, so reductions are reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for stream `index` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64))
}

/// Split `total` items into `streams` nearly equal chunks.
pub fn split(total: usize, streams: usize) -> Vec<usize> {
    let streams = streams.max(1);
    (0..streams)
        .map(|i| total / streams + usize::from(i < total % streams))
        .collect()
}

/// Run `f(stream_index, rng, count)` for each stream.
pub fn map_streams<T, F>(seed: u64, total: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng, usize) -> T + Sync + Send,
{
    let counts = split(total, workers);
    run(workers, counts.len(), |i| {
        let mut rng = stream_rng(seed, i);
        f(i, &mut rng, counts[i])
    })
}

#[cfg(feature = "parallel")]
fn run<T, F>(workers: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

#[cfg(not(feature = "parallel"))]
fn run<T, F>(_workers: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// [`map_streams`] on the calling thread regardless of features. Same
/// streams, same results.
pub fn map_streams_sequential<T, F>(seed: u64, total: usize, workers: usize, f: F) -> Vec<T>
where
    F: Fn(usize, &mut ChaCha8Rng, usize) -> T,
{
    let counts = split(total, workers);
    (0..counts.len())
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            f(i, &mut rng, counts[i])
        })
        .collect()
}

/// Default worker count: available parallelism, or 1.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

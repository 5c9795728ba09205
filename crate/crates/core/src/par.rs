//! Deterministic fan-out for sampled audits.
//!
//! Work is cut into fixed-size chunks independent of the worker count, and the
//! per-chunk results are returned in chunk order, so reductions do not depend
//! on scheduling.

use std::sync::atomic::{AtomicUsize, Ordering};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CANTOR_PROJ_THREADS";

pub fn workers() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV).ok().and_then(|s| s.parse::<usize>().ok()) {
        Some(n) if n >= 1 => n.min(available.max(1)),
        _ => available,
    }
}

/// Runs `f(chunk_index, range)` over `0..total` in chunks of `chunk` items.
pub fn map_chunks<T, F>(total: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, std::ops::Range<usize>) -> T + Sync,
{
    let chunk = chunk.max(1);
    let n_chunks = total.div_ceil(chunk);
    let range = |c: usize| c * chunk..((c + 1) * chunk).min(total);
    let threads = workers().min(n_chunks);
    if threads <= 1 {
        return (0..n_chunks).map(|c| f(c, range(c))).collect();
    }
    let next = AtomicUsize::new(0);
    let mut results: Vec<(usize, T)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|_| {
                s.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let c = next.fetch_add(1, Ordering::Relaxed);
                        if c >= n_chunks {
                            break;
                        }
                        local.push((c, f(c, range(c))));
                    }
                    local
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    results.sort_by_key(|(c, _)| *c);
    results.into_iter().map(|(_, t)| t).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range_in_order() {
        let out = map_chunks(10, 3, |c, r| (c, r.start, r.end));
        assert_eq!(out, vec![(0, 0, 3), (1, 3, 6), (2, 6, 9), (3, 9, 10)]);
        assert!(map_chunks(0, 3, |c, _| c).is_empty());
    }
}

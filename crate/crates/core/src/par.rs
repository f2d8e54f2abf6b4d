//! Deterministic parallel helpers.
//!
//! All parallel loops in this crate are organized so the result is bit
//! identical for any worker count: outputs are either written to disjoint
//! slices (one per item) or accumulated into per-chunk buffers that are merged
//! sequentially in chunk order.  The chunk layout depends only on the problem
//! size, never on the number of threads.

/// Applies `f(i, &mut out[i])` for every index, in parallel when the
/// `parallel` feature is enabled.  Each slot is written by exactly one task.
pub fn for_each_indexed<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        out.par_iter_mut().enumerate().for_each(|(i, slot)| f(i, slot));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, slot) in out.iter_mut().enumerate() {
            f(i, slot);
        }
    }
}

/// Splits `0..n_items` into chunks of `chunk_len`, runs `fold` on each chunk
/// into a fresh accumulator from `init`, and merges the accumulators
/// sequentially in chunk order.  `fold` receives the item range of its chunk.
pub fn chunked_accumulate<A, F>(
    n_items: usize,
    chunk_len: usize,
    init: impl Fn() -> A + Sync,
    fold: F,
    merge: impl Fn(&mut A, A),
) -> A
where
    A: Send,
    F: Fn(std::ops::Range<usize>, &mut A) + Sync,
{
    let chunk_len = chunk_len.max(1);
    let ranges: Vec<std::ops::Range<usize>> = (0..n_items)
        .step_by(chunk_len)
        .map(|start| start..(start + chunk_len).min(n_items))
        .collect();

    #[cfg(feature = "parallel")]
    let partials: Vec<A> = {
        use rayon::prelude::*;
        ranges
            .into_par_iter()
            .map(|r| {
                let mut acc = init();
                fold(r, &mut acc);
                acc
            })
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<A> = ranges
        .into_iter()
        .map(|r| {
            let mut acc = init();
            fold(r, &mut acc);
            acc
        })
        .collect();

    let mut total = init();
    for p in partials {
        merge(&mut total, p);
    }
    total
}

/// Chunk length that bounds the number of in-flight accumulators when each
/// accumulator costs `accum_bytes`, independent of the thread count.
pub fn accumulator_chunk_len(n_items: usize, accum_bytes: usize) -> usize {
    const BUDGET_BYTES: usize = 256 << 20;
    let max_chunks = (BUDGET_BYTES / accum_bytes.max(1)).clamp(1, 64);
    n_items.div_ceil(max_chunks).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_accumulate_matches_serial_sum() {
        let n = 10_007;
        let total = chunked_accumulate(
            n,
            97,
            || 0u64,
            |range, acc| {
                for i in range {
                    *acc += i as u64;
                }
            },
            |a, b| *a += b,
        );
        assert_eq!(total, (n as u64 - 1) * n as u64 / 2);
    }

    #[test]
    fn indexed_map_writes_every_slot() {
        let mut v = vec![0usize; 1000];
        for_each_indexed(&mut v, |i, slot| *slot = i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }
}

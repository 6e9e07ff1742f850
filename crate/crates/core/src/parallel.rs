//! Order-preserving work splitting over scoped threads.

/// Apply `f` to every item, splitting the slice into up to `threads`
/// contiguous chunks. Results come back in input order, so reductions are
/// independent of the thread count.
pub fn map_indexed<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
{
    let threads = threads.max(1);
    if threads == 1 || items.len() <= 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let mut results: Vec<Vec<R>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (c, slice) in items.chunks(chunk).enumerate() {
            let f = &f;
            handles.push(scope.spawn(move || {
                slice
                    .iter()
                    .enumerate()
                    .map(|(i, t)| f(c * chunk + i, t))
                    .collect::<Vec<R>>()
            }));
        }
        for h in handles {
            results.push(h.join().expect("worker thread panicked"));
        }
    });
    results.into_iter().flatten().collect()
}

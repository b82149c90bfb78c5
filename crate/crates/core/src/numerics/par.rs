/// `(0..n).map(eval)` split into contiguous chunks over `workers` scoped
/// threads; the output order is the index order.
pub(crate) fn par_map<R: Send>(n: usize, workers: usize, eval: impl Fn(usize) -> R + Sync) -> Vec<R> {
    let workers = workers.clamp(1, n.max(1));
    if workers == 1 {
        return (0..n).map(eval).collect();
    }
    let chunk = n.div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let eval = &eval;
                s.spawn(move || (w * chunk..((w + 1) * chunk).min(n)).map(eval).collect::<Vec<_>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

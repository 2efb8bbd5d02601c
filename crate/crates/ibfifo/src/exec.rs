//! Frontier expansion on scoped worker threads.

use ibfifo_core::engine::Executor;

/// Splits each frontier into `workers` contiguous chunks. Results are
/// concatenated in chunk order, so output does not depend on `workers`.
#[derive(Clone, Copy, Debug)]
pub struct Threaded {
    pub workers: usize,
}

// below this many items thread start-up costs more than it saves
const MIN_PARALLEL: usize = 256;

impl Executor for Threaded {
    fn map<T: Sync, U: Send, F: Fn(&T) -> U + Sync>(&self, items: &[T], f: F) -> Vec<U> {
        if self.workers <= 1 || items.len() < MIN_PARALLEL {
            return items.iter().map(f).collect();
        }
        let chunk = items.len().div_ceil(self.workers);
        let f = &f;
        std::thread::scope(|s| {
            let handles: Vec<_> =
                items.chunks(chunk).map(|c| s.spawn(move || c.iter().map(f).collect::<Vec<U>>())).collect();
            handles.into_iter().flat_map(|h| h.join().expect("worker thread panicked")).collect()
        })
    }
}

//! Norm-inflation laboratory on top of [`nilab_core`]: builds the indicator
//! initial data, runs the Picard machinery across an `N`-sweep, verifies the
//! dominance conditions, runs the standalone lemma-oracle suite, and exposes
//! everything through a CLI.

pub mod config;
pub mod experiment;
pub mod gridio;
pub mod sigma;
pub mod verify;

/// Cap the global worker pool from `NI_LAB_THREADS` (best effort; the first
/// caller wins, later calls are no-ops).
pub fn init_thread_pool() {
    if let Ok(raw) = std::env::var("NI_LAB_THREADS") {
        if let Ok(n) = raw.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

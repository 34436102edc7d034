//! Wall-clock budgets. `std::time::Instant` is unavailable on
//! `wasm32-unknown-unknown`, where deadlines never expire.

#[cfg(not(target_arch = "wasm32"))]
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy)]
pub struct Deadline {
    #[cfg(not(target_arch = "wasm32"))]
    at: Option<Instant>,
}

impl Deadline {
    pub fn none() -> Self {
        Deadline {
            #[cfg(not(target_arch = "wasm32"))]
            at: None,
        }
    }

    #[allow(unused_variables)]
    pub fn after_secs(secs: f64) -> Self {
        #[cfg(not(target_arch = "wasm32"))]
        {
            let at = if secs.is_finite() && secs >= 0.0 {
                Instant::now().checked_add(Duration::from_secs_f64(secs))
            } else {
                None
            };
            Deadline { at }
        }
        #[cfg(target_arch = "wasm32")]
        Deadline {}
    }

    pub fn expired(&self) -> bool {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.at.is_some_and(|t| Instant::now() >= t)
        }
        #[cfg(target_arch = "wasm32")]
        false
    }

    /// The earlier of two deadlines.
    pub fn min(self, other: Deadline) -> Deadline {
        #[cfg(not(target_arch = "wasm32"))]
        {
            let at = match (self.at, other.at) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            Deadline { at }
        }
        #[cfg(target_arch = "wasm32")]
        {
            let _ = other;
            self
        }
    }
}

/// Measures elapsed seconds; always zero on wasm.
#[derive(Debug, Clone, Copy)]
pub struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: Instant,
}

impl Stopwatch {
    pub fn start() -> Self {
        Stopwatch {
            #[cfg(not(target_arch = "wasm32"))]
            start: Instant::now(),
        }
    }

    pub fn elapsed_secs(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(target_arch = "wasm32")]
        0.0
    }
}

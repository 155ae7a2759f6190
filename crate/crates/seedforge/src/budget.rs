//! Wall-clock budget shared by all gathering modules.
//!
//! Modules check the budget cooperatively at fetch boundaries (before each
//! network request, clone, or record download) and wind down when it is
//! exhausted. The orchestrator additionally enforces a hard stop at
//! budget + grace for workers stuck inside a blocking call.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

/// A deadline plus a cancellation flag. Cheap to clone and share.
#[derive(Debug, Clone)]
pub struct Budget {
    started: Instant,
    deadline: Instant,
    cancelled: Arc<AtomicBool>,
}

impl Budget {
    pub fn new(duration: Duration) -> Self {
        let started = Instant::now();
        Budget {
            started,
            deadline: started + duration,
            cancelled: Arc::new(AtomicBool::new(false)),
        }
    }

    /// A budget that never expires on its own (still cancellable).
    pub fn unlimited() -> Self {
        // ~30 years; effectively never.
        Self::new(Duration::from_secs(60 * 60 * 24 * 365 * 30))
    }

    /// True once the deadline has passed or the budget was cancelled.
    pub fn exhausted(&self) -> bool {
        self.cancelled.load(Ordering::Relaxed) || Instant::now() >= self.deadline
    }

    /// Time left before the deadline; zero once exhausted.
    pub fn remaining(&self) -> Duration {
        if self.cancelled.load(Ordering::Relaxed) {
            return Duration::ZERO;
        }
        self.deadline.saturating_duration_since(Instant::now())
    }

    pub fn elapsed(&self) -> Duration {
        self.started.elapsed()
    }

    pub fn deadline(&self) -> Instant {
        self.deadline
    }

    /// Flips the shared cancel flag; every clone observes it.
    pub fn cancel(&self) {
        self.cancelled.store(true, Ordering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.cancelled.load(Ordering::Relaxed)
    }
}

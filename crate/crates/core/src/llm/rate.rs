use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

/// Monotonic time source; `now` is measured from an arbitrary origin.
pub trait Clock: Send + Sync {
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        Self { origin: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        thread::sleep(d);
    }
}

/// Test clock whose `sleep` advances time instantly.
#[derive(Default)]
pub struct ManualClock {
    nanos: AtomicU64,
}

impl ManualClock {
    pub fn advance(&self, d: Duration) {
        self.nanos.fetch_add(d.as_nanos() as u64, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        Duration::from_nanos(self.nanos.load(Ordering::SeqCst))
    }

    fn sleep(&self, d: Duration) {
        self.advance(d);
    }
}

/// Sliding-window limiter shared by all workers: at most `limit` requests
/// start within any window of length `window`.
pub struct RateLimiter {
    limit: usize,
    window: Duration,
    clock: Arc<dyn Clock>,
    issued: Mutex<VecDeque<Duration>>,
}

impl RateLimiter {
    pub fn per_minute(limit: usize) -> Self {
        Self::new(limit, Duration::from_secs(60), Arc::new(SystemClock::default()))
    }

    pub fn new(limit: usize, window: Duration, clock: Arc<dyn Clock>) -> Self {
        assert!(limit > 0, "rate limit must be positive");
        Self {
            limit,
            window,
            clock,
            issued: Mutex::new(VecDeque::new()),
        }
    }

    /// Blocks until a request may start, then records it.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut issued = self.issued.lock().unwrap();
                let now = self.clock.now();
                while issued.front().is_some_and(|&t| now.saturating_sub(t) >= self.window) {
                    issued.pop_front();
                }
                if issued.len() < self.limit {
                    issued.push_back(now);
                    return;
                }
                self.window - (now - issued[0])
            };
            self.clock.sleep(wait);
        }
    }
}

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Bounded retries with exponential backoff: attempt `i` (0-based) that
/// fails transiently sleeps `base_delay * 2^i` before the next attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            base_delay_ms: 500,
        }
    }
}

impl RetryPolicy {
    /// Three attempts without sleeping, for tests and mocks.
    pub const fn immediate() -> Self {
        Self {
            attempts: 3,
            base_delay_ms: 0,
        }
    }

    pub fn delay_after(&self, attempt: u32) -> Duration {
        Duration::from_millis(self.base_delay_ms.saturating_mul(1u64 << attempt.min(16)))
    }

    /// Runs `op` until it succeeds, fails permanently, or attempts run out.
    /// Returns the last error together with the number of attempts made.
    pub fn run<T, E>(&self, is_transient: impl Fn(&E) -> bool, mut op: impl FnMut() -> Result<T, E>) -> Result<T, (E, u32)> {
        let attempts = self.attempts.max(1);
        let mut attempt = 0;
        loop {
            match op() {
                Ok(v) => return Ok(v),
                Err(e) => {
                    attempt += 1;
                    if attempt >= attempts || !is_transient(&e) {
                        return Err((e, attempt));
                    }
                    let delay = self.delay_after(attempt - 1);
                    if !delay.is_zero() {
                        thread::sleep(delay);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stops_after_three() {
        let mut calls = 0;
        let r: Result<(), _> = RetryPolicy::immediate().run(|_: &&str| true, || {
            calls += 1;
            Err("boom")
        });
        assert_eq!(r.unwrap_err(), ("boom", 3));
        assert_eq!(calls, 3);
    }

    #[test]
    fn permanent_error_not_retried() {
        let mut calls = 0;
        let r: Result<(), _> = RetryPolicy::immediate().run(|_: &&str| false, || {
            calls += 1;
            Err("auth")
        });
        assert_eq!(r.unwrap_err().1, 1);
        assert_eq!(calls, 1);
    }

    #[test]
    fn recovers_and_backs_off() {
        let mut calls = 0;
        let r = RetryPolicy::immediate().run(|_: &&str| true, || {
            calls += 1;
            if calls < 3 { Err("flaky") } else { Ok(calls) }
        });
        assert_eq!(r.unwrap(), 3);
        let p = RetryPolicy { attempts: 3, base_delay_ms: 100 };
        assert_eq!(p.delay_after(0), Duration::from_millis(100));
        assert_eq!(p.delay_after(2), Duration::from_millis(400));
    }
}

//! Request throttling.

use std::collections::VecDeque;
use std::time::Duration;

use parking_lot::Mutex;

use super::clock::Clock;

const WINDOW: Duration = Duration::from_secs(1);

/// Proof that a request may be issued at `granted_at`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Permit {
    pub granted_at: Duration,
}

/// Sliding-window limiter: any half-open one-second window contains at most
/// `max_per_second` grants.
///
/// The `N`-th most recent grant bounds the next one: a new permit is issued
/// no earlier than one second after it. Grants are handed out in
/// non-decreasing time order, also under concurrent callers.
#[derive(Debug)]
pub struct RateLimiter {
    max_per_second: usize,
    recent: Mutex<VecDeque<Duration>>,
}

impl RateLimiter {
    pub fn new(max_per_second: u32) -> Self {
        assert!(max_per_second > 0, "rate limit must be positive");
        RateLimiter {
            max_per_second: max_per_second as usize,
            recent: Mutex::new(VecDeque::with_capacity(max_per_second as usize + 1)),
        }
    }

    pub fn max_per_second(&self) -> u32 {
        self.max_per_second as u32
    }

    /// Books the earliest admissible slot at or after `now` without waiting.
    pub fn reserve(&self, now: Duration) -> Duration {
        let mut recent = self.recent.lock();
        let mut t = now;
        if let Some(&last) = recent.back() {
            t = t.max(last);
        }
        if recent.len() == self.max_per_second {
            t = t.max(recent[0] + WINDOW);
            recent.pop_front();
        }
        recent.push_back(t);
        t
    }

    /// Reserves a slot and waits on `clock` until it is reached.
    pub fn acquire(&self, clock: &dyn Clock) -> Permit {
        let t = self.reserve(clock.now());
        clock.sleep_until(t);
        Permit { granted_at: t }
    }
}

/// Largest number of timestamps falling in any half-open window
/// `[x, x + 1s)`.
pub fn max_in_any_window(times: &[Duration]) -> usize {
    let mut sorted = times.to_vec();
    sorted.sort_unstable();
    let mut best = 0;
    let mut lo = 0;
    for hi in 0..sorted.len() {
        while sorted[hi] - sorted[lo] >= WINDOW {
            lo += 1;
        }
        best = best.max(hi - lo + 1);
    }
    best
}

//! Injected time source. All politeness timing goes through [`Clock`] so
//! that tests can run on a virtual timeline.

use std::time::{Duration, SystemTime, UNIX_EPOCH};

use parking_lot::Mutex;

/// Time as an offset from the Unix epoch.
pub trait Clock: Send + Sync {
    fn now(&self) -> Duration;
    /// Blocks (or, for virtual clocks, advances) until `t`.
    fn sleep_until(&self, t: Duration);
}

/// Wall-clock time.
#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .unwrap_or_default()
    }

    fn sleep_until(&self, t: Duration) {
        let now = self.now();
        if t > now {
            std::thread::sleep(t - now);
        }
    }
}

/// Shared virtual timeline. Sleeping moves the timeline forward to the
/// requested instant; it never moves backwards.
#[derive(Debug, Default)]
pub struct VirtualClock {
    now: Mutex<Duration>,
}

impl VirtualClock {
    pub fn new(start: Duration) -> Self {
        VirtualClock {
            now: Mutex::new(start),
        }
    }

    pub fn advance(&self, by: Duration) {
        *self.now.lock() += by;
    }
}

impl Clock for VirtualClock {
    fn now(&self) -> Duration {
        *self.now.lock()
    }

    fn sleep_until(&self, t: Duration) {
        let mut now = self.now.lock();
        if t > *now {
            *now = t;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn virtual_clock_is_monotone() {
        let c = VirtualClock::new(Duration::from_secs(5));
        c.sleep_until(Duration::from_secs(3));
        assert_eq!(c.now(), Duration::from_secs(5));
        c.sleep_until(Duration::from_secs(7));
        assert_eq!(c.now(), Duration::from_secs(7));
        c.advance(Duration::from_millis(500));
        assert_eq!(c.now(), Duration::from_millis(7500));
    }
}

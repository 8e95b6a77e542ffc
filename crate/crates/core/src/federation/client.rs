//! Polite, cached fetching of user records.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use parking_lot::Mutex;
use serde::Serialize;

use super::{
    timestamp, CacheStore, Clock, Endpoint, EndpointError, FetchError, FetchStatus, InstanceAccess,
    PolitenessPolicy, Provider, RateLimiter, UserKey, UserRecord,
};

/// Retries after a transport failure, waiting `initial_backoff` and then
/// doubling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RetryPolicy {
    pub retries: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            retries: 2,
            initial_backoff: Duration::from_secs(1),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FetchCounters {
    pub cache_hits: usize,
    pub provider_fetches: usize,
    pub content_requests: usize,
    pub retries: usize,
    pub robots_blocked: usize,
    pub instance_down: usize,
    pub gone: usize,
}

#[derive(Debug, Default)]
struct AtomicCounters {
    cache_hits: AtomicUsize,
    provider_fetches: AtomicUsize,
    content_requests: AtomicUsize,
    retries: AtomicUsize,
    robots_blocked: AtomicUsize,
    instance_down: AtomicUsize,
    gone: AtomicUsize,
}

fn bump(c: &AtomicUsize) {
    c.fetch_add(1, Ordering::Relaxed);
}

/// Fetches [`UserRecord`]s through a [`Provider`].
///
/// Order of checks for a key: cache, instance access (robots and
/// reachability, probed once per instance), then one rate-limited request
/// per endpoint. Blocked or unreachable instances never see a content
/// request. Safe to share between threads.
pub struct FederationClient<P: Provider> {
    provider: Arc<P>,
    cache: Arc<dyn CacheStore>,
    clock: Arc<dyn Clock>,
    limiter: RateLimiter,
    policy: PolitenessPolicy,
    retry: RetryPolicy,
    access: Mutex<HashMap<String, InstanceAccess>>,
    /// One lock per key being fetched, so concurrent callers wait for a
    /// single provider fetch instead of repeating it.
    in_flight: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    counters: AtomicCounters,
}

impl<P: Provider> FederationClient<P> {
    pub fn new(
        provider: Arc<P>,
        cache: Arc<dyn CacheStore>,
        clock: Arc<dyn Clock>,
        policy: PolitenessPolicy,
    ) -> Self {
        FederationClient {
            provider,
            cache,
            clock,
            limiter: RateLimiter::new(policy.max_requests_per_second),
            policy,
            retry: RetryPolicy::default(),
            access: Mutex::new(HashMap::new()),
            in_flight: Mutex::new(HashMap::new()),
            counters: AtomicCounters::default(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn provider(&self) -> &P {
        &self.provider
    }

    pub fn policy(&self) -> PolitenessPolicy {
        self.policy
    }

    pub fn counters(&self) -> FetchCounters {
        let c = &self.counters;
        let l = |a: &AtomicUsize| a.load(Ordering::Relaxed);
        FetchCounters {
            cache_hits: l(&c.cache_hits),
            provider_fetches: l(&c.provider_fetches),
            content_requests: l(&c.content_requests),
            retries: l(&c.retries),
            robots_blocked: l(&c.robots_blocked),
            instance_down: l(&c.instance_down),
            gone: l(&c.gone),
        }
    }

    fn is_fresh(&self, rec: &UserRecord) -> bool {
        match self.policy.max_age {
            None => true,
            Some(max_age) => {
                let now = timestamp(self.clock.now());
                match (now - rec.fetched_at).to_std() {
                    Ok(age) => age <= max_age,
                    // fetched_at in the future
                    Err(_) => true,
                }
            }
        }
    }

    fn instance_access(&self, instance: &str) -> InstanceAccess {
        if let Some(&a) = self.access.lock().get(instance) {
            return a;
        }
        let a = self.provider.instance_access(instance);
        *self.access.lock().entry(instance.to_owned()).or_insert(a)
    }

    /// Returns the record for `key`, from cache when fresh.
    ///
    /// Transport failures and unavailable accounts are reported through
    /// the record status, never as an `Err`.
    pub fn fetch_user(&self, key: &str) -> Result<UserRecord, FetchError> {
        let user: UserKey = key.parse()?;
        let canonical = user.to_string();
        if let Some(rec) = self.cached(&canonical) {
            return Ok(rec);
        }
        let slot = Arc::clone(self.in_flight.lock().entry(canonical.clone()).or_default());
        let _guard = slot.lock();
        // another caller may have finished the fetch while we waited
        let result = match self.cached(&canonical) {
            Some(rec) => Ok(rec),
            None => {
                let rec = self.fetch_uncached(&user);
                self.cache.put(&rec).map(|()| rec)
            }
        };
        self.in_flight.lock().remove(&canonical);
        result
    }

    fn cached(&self, key: &str) -> Option<UserRecord> {
        let rec = self.cache.get(key).filter(|r| self.is_fresh(r))?;
        bump(&self.counters.cache_hits);
        Some(rec)
    }

    fn fetch_uncached(&self, user: &UserKey) -> UserRecord {
        match self.instance_access(&user.instance) {
            InstanceAccess::Disallowed if self.policy.respect_robots => {
                bump(&self.counters.robots_blocked);
                return UserRecord::failed(user, FetchStatus::InstanceBlocked, self.clock.now());
            }
            InstanceAccess::Unreachable => {
                bump(&self.counters.instance_down);
                return UserRecord::failed(user, FetchStatus::InstanceDown, self.clock.now());
            }
            _ => {}
        }
        bump(&self.counters.provider_fetches);
        let following = match self.request(user, Endpoint::Following) {
            Ok(list) => list,
            Err(status) => return UserRecord::failed(user, status, self.clock.now()),
        };
        let followers = match self.request(user, Endpoint::Followers) {
            Ok(list) => list,
            Err(status) => return UserRecord::failed(user, status, self.clock.now()),
        };
        UserRecord::ok(user, following, followers, self.clock.now())
    }

    fn request(&self, user: &UserKey, endpoint: Endpoint) -> Result<Vec<String>, FetchStatus> {
        let mut backoff = self.retry.initial_backoff;
        let mut attempt = 0;
        loop {
            let permit = self.limiter.acquire(self.clock.as_ref());
            bump(&self.counters.content_requests);
            match self
                .provider
                .fetch_endpoint(user, endpoint, permit.granted_at)
            {
                Ok(list) => return Ok(list),
                Err(EndpointError::Gone) => {
                    bump(&self.counters.gone);
                    return Err(FetchStatus::Gone);
                }
                Err(EndpointError::Transport(_)) if attempt < self.retry.retries => {
                    attempt += 1;
                    bump(&self.counters.retries);
                    self.clock.sleep_until(self.clock.now() + backoff);
                    backoff *= 2;
                }
                Err(EndpointError::Transport(_)) => {
                    bump(&self.counters.instance_down);
                    return Err(FetchStatus::InstanceDown);
                }
            }
        }
    }
}

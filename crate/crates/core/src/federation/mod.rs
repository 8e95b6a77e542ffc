//! Fetching follower and following lists from federated instances.
//!
//! A [`Provider`] answers per-instance access checks and per-user endpoint
//! requests; [`FederationClient`] wraps it with robots gating, a global
//! request-rate limit, bounded retries and a persistent record cache.

mod cache;
mod client;
mod clock;
mod limiter;
mod provider;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{CacheStore, JsonlCache, MemoryCache};
pub use client::{FederationClient, FetchCounters, RetryPolicy};
pub use clock::{Clock, SystemClock, VirtualClock};
pub use limiter::{max_in_any_window, Permit, RateLimiter};
pub use provider::{
    Endpoint, EndpointError, InstanceAccess, Provider, RequestLogEntry, SimulatedProvider,
};

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("invalid user key {0:?}: expected name@host")]
    InvalidKey(String),
    #[error("cache io: {0}")]
    Cache(#[from] std::io::Error),
    #[error("cache record on line {line}: {source}")]
    CacheFormat {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// A `name@host` account handle.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UserKey {
    pub name: String,
    pub instance: String,
}

impl FromStr for UserKey {
    type Err = FetchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.strip_prefix('@').unwrap_or(s);
        let invalid = || FetchError::InvalidKey(s.to_owned());
        let (name, host) = s.split_once('@').ok_or_else(invalid)?;
        let ok_part = |p: &str| {
            !p.is_empty() && !p.chars().any(|c| c.is_whitespace() || c == '@' || c == '/')
        };
        if !ok_part(name) || !ok_part(host) {
            return Err(invalid());
        }
        Ok(UserKey {
            name: name.to_owned(),
            instance: host.to_ascii_lowercase(),
        })
    }
}

impl fmt::Display for UserKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.name, self.instance)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FetchStatus {
    Ok,
    Gone,
    InstanceBlocked,
    InstanceDown,
}

/// One fetched account. `following` and `followers` are present exactly
/// when `status` is `ok`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub external_key: String,
    pub instance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub following: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub followers: Option<Vec<String>>,
    pub fetched_at: DateTime<Utc>,
    pub status: FetchStatus,
}

impl UserRecord {
    pub fn ok(key: &UserKey, following: Vec<String>, followers: Vec<String>, at: Duration) -> Self {
        UserRecord {
            external_key: key.to_string(),
            instance: key.instance.clone(),
            following: Some(following),
            followers: Some(followers),
            fetched_at: timestamp(at),
            status: FetchStatus::Ok,
        }
    }

    pub fn failed(key: &UserKey, status: FetchStatus, at: Duration) -> Self {
        debug_assert_ne!(status, FetchStatus::Ok);
        UserRecord {
            external_key: key.to_string(),
            instance: key.instance.clone(),
            following: None,
            followers: None,
            fetched_at: timestamp(at),
            status,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == FetchStatus::Ok
    }
}

/// Converts an epoch offset to a UTC timestamp.
pub fn timestamp(at: Duration) -> DateTime<Utc> {
    DateTime::<Utc>::from_timestamp(at.as_secs() as i64, at.subsec_nanos()).unwrap_or_default()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolitenessPolicy {
    pub max_requests_per_second: u32,
    pub respect_robots: bool,
    /// Cached records older than this are refetched; `None` never expires.
    #[serde(default)]
    pub max_age: Option<Duration>,
}

impl Default for PolitenessPolicy {
    fn default() -> Self {
        PolitenessPolicy {
            max_requests_per_second: 10,
            respect_robots: true,
            max_age: None,
        }
    }
}

//! Data sources behind the client.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{FetchStatus, UserKey};
use crate::graph::DirectedGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Following,
    Followers,
}

/// Result of the per-instance robots/availability probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceAccess {
    Allowed,
    Disallowed,
    Unreachable,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EndpointError {
    #[error("account no longer exists")]
    Gone,
    #[error("transport failure: {0}")]
    Transport(String),
}

/// A source of follower/following lists. Implementations must tolerate
/// concurrent calls.
pub trait Provider: Send + Sync {
    /// Robots policy and reachability of `instance`. Not a content request.
    fn instance_access(&self, instance: &str) -> InstanceAccess;

    /// One content request, issued at `issued_at` on the client's clock.
    fn fetch_endpoint(
        &self,
        user: &UserKey,
        endpoint: Endpoint,
        issued_at: Duration,
    ) -> Result<Vec<String>, EndpointError>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RequestLogEntry {
    pub user: String,
    pub endpoint: Endpoint,
    pub issued_at: Duration,
}

/// Provider answering from an in-memory world graph. Node keys must be
/// `name@instance`.
///
/// `failure_plan` maps an instance to the status its users report:
/// `instance_blocked` disallows crawling, `instance_down` makes the
/// instance unreachable and `gone` makes every account on it deleted.
#[derive(Debug)]
pub struct SimulatedProvider {
    world: DirectedGraph,
    failure_plan: HashMap<String, FetchStatus>,
    transient: Mutex<HashMap<String, usize>>,
    log: Mutex<Vec<RequestLogEntry>>,
    access_probes: AtomicUsize,
}

impl SimulatedProvider {
    pub fn new(world: DirectedGraph, failure_plan: HashMap<String, FetchStatus>) -> Self {
        SimulatedProvider {
            world,
            failure_plan,
            transient: Mutex::new(HashMap::new()),
            log: Mutex::new(Vec::new()),
            access_probes: AtomicUsize::new(0),
        }
    }

    /// Makes the next `count` content requests for `user` fail at the
    /// transport level.
    pub fn inject_transient_failures(&self, user: &str, count: usize) {
        self.transient.lock().insert(user.to_owned(), count);
    }

    pub fn world(&self) -> &DirectedGraph {
        &self.world
    }

    /// Number of content requests served so far.
    pub fn endpoint_calls(&self) -> usize {
        self.log.lock().len()
    }

    /// Completed following/followers request pairs.
    pub fn user_fetches(&self) -> usize {
        self.log
            .lock()
            .iter()
            .filter(|e| e.endpoint == Endpoint::Followers)
            .count()
    }

    pub fn access_probes(&self) -> usize {
        self.access_probes.load(Ordering::Relaxed)
    }

    pub fn request_log(&self) -> Vec<RequestLogEntry> {
        self.log.lock().clone()
    }

    pub fn requests_to_instance(&self, instance: &str) -> usize {
        let suffix = format!("@{instance}");
        self.log
            .lock()
            .iter()
            .filter(|e| e.user.ends_with(&suffix))
            .count()
    }
}

impl Provider for SimulatedProvider {
    fn instance_access(&self, instance: &str) -> InstanceAccess {
        self.access_probes.fetch_add(1, Ordering::Relaxed);
        match self.failure_plan.get(instance) {
            Some(FetchStatus::InstanceBlocked) => InstanceAccess::Disallowed,
            Some(FetchStatus::InstanceDown) => InstanceAccess::Unreachable,
            _ => InstanceAccess::Allowed,
        }
    }

    fn fetch_endpoint(
        &self,
        user: &UserKey,
        endpoint: Endpoint,
        issued_at: Duration,
    ) -> Result<Vec<String>, EndpointError> {
        let key = user.to_string();
        self.log.lock().push(RequestLogEntry {
            user: key.clone(),
            endpoint,
            issued_at,
        });
        {
            let mut transient = self.transient.lock();
            if let Some(left) = transient.get_mut(&key) {
                if *left > 0 {
                    *left -= 1;
                    return Err(EndpointError::Transport("injected failure".into()));
                }
            }
        }
        match self.failure_plan.get(&user.instance) {
            Some(FetchStatus::Gone) => return Err(EndpointError::Gone),
            Some(FetchStatus::InstanceDown) => {
                return Err(EndpointError::Transport("instance down".into()))
            }
            _ => {}
        }
        let u = self.world.id_of(&key).ok_or(EndpointError::Gone)?;
        let list = match endpoint {
            Endpoint::Following => self.world.successors(u),
            Endpoint::Followers => self.world.predecessors(u),
        };
        Ok(list.iter().map(|&v| self.world.key(v).to_owned()).collect())
    }
}

//! On-disk ground-state cache, serialized per key.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use cluster_mbqc::ground_state::{solve, GroundState, SolverParams};
use cluster_mbqc::pauli::ChainSpec;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::persist;

pub fn cache_key(spec: &ChainSpec, params: &SolverParams) -> String {
    let mut h = Sha256::new();
    h.update(format!("v{}|", persist::FORMAT_VERSION));
    h.update(spec.n_sites.to_le_bytes());
    h.update(spec.alpha.to_bits().to_le_bytes());
    h.update(params.chi_max.to_le_bytes());
    h.update(params.n_sweeps.to_le_bytes());
    h.update(params.energy_tol.to_bits().to_le_bytes());
    h.update(params.lanczos_tol.to_bits().to_le_bytes());
    h.update(params.lanczos_max_iter.to_le_bytes());
    h.update(params.svd_cutoff.to_bits().to_le_bytes());
    hex::encode(&h.finalize()[..16])
}

#[derive(Debug, Default)]
pub struct GroundStateCache {
    dir: Option<PathBuf>,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Solved,
    Cached,
}

impl GroundStateCache {
    /// A cache that always solves.
    pub fn disabled() -> Self {
        Self::default()
    }

    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: Some(dir.into()),
            locks: Mutex::default(),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn path_for(&self, spec: &ChainSpec, params: &SolverParams) -> Option<PathBuf> {
        let dir = self.dir.as_ref()?;
        Some(dir.join(format!("gs-N{}-{}.bin", spec.n_sites, cache_key(spec, params))))
    }

    fn lock_for(&self, key: &str) -> Arc<Mutex<()>> {
        let mut map = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(key.to_string()).or_default().clone()
    }

    pub fn get_or_solve(&self, spec: &ChainSpec, params: &SolverParams) -> Result<(GroundState, Source)> {
        let Some(path) = self.path_for(spec, params) else {
            return Ok((solve(spec, params)?, Source::Solved));
        };
        let lock = self.lock_for(&cache_key(spec, params));
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        if path.exists() {
            match persist::load(&path) {
                Ok(state) => return Ok((state, Source::Cached)),
                Err(e) => log::warn!("discarding unreadable cache entry {}: {e}", path.display()),
            }
        }
        let state = solve(spec, params)?;
        persist::save(&state, &path)?;
        Ok((state, Source::Solved))
    }
}

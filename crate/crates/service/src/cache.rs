use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use lru::LruCache;
use serde::Serialize;
use shadeway_core::shadowcast::RasterSidecar;
use shadeway_core::ShadeRaster;
use tokio::sync::OnceCell;

/// Cache key: scene, local date, local time in minutes, UTC offset in minutes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ShadeKey {
    pub scene_id: String,
    pub date: String,
    pub minute_of_day: u32,
    pub utc_offset_min: i32,
}

impl ShadeKey {
    pub fn label(&self) -> String {
        format!("{} {:02}:{:02}", self.date, self.minute_of_day / 60, self.minute_of_day % 60)
    }
}

pub struct CachedShade {
    pub raster: ShadeRaster,
    pub sidecar: RasterSidecar,
    pub png: Vec<u8>,
    pub etag: String,
}

type Slot<E> = Arc<OnceCell<Result<Arc<CachedShade>, E>>>;

/// Bounded LRU of shade maps with single-flight computation: concurrent
/// requests for one key wait on a single computation.
pub struct ShadeCache<E> {
    lru: Mutex<LruCache<ShadeKey, Arc<CachedShade>>>,
    inflight: Mutex<HashMap<ShadeKey, Slot<E>>>,
    computed: AtomicUsize,
}

impl<E: Clone + Send + Sync + 'static> ShadeCache<E> {
    pub fn new(capacity: usize) -> Self {
        Self {
            lru: Mutex::new(LruCache::new(NonZeroUsize::new(capacity.max(1)).expect("nonzero"))),
            inflight: Mutex::new(HashMap::new()),
            computed: AtomicUsize::new(0),
        }
    }

    /// Number of computations actually run.
    pub fn computed(&self) -> usize {
        self.computed.load(Ordering::SeqCst)
    }

    pub fn keys_for(&self, scene_id: &str) -> Vec<String> {
        let lru = self.lru.lock().expect("lock");
        let mut out: Vec<String> = lru.iter().filter(|(k, _)| k.scene_id == scene_id).map(|(k, _)| k.label()).collect();
        out.sort();
        out
    }

    pub async fn get_or_compute<F>(&self, key: ShadeKey, compute: F) -> Result<Arc<CachedShade>, E>
    where
        F: FnOnce() -> Result<CachedShade, E> + Send + 'static,
    {
        if let Some(hit) = self.lru.lock().expect("lock").get(&key) {
            return Ok(hit.clone());
        }
        let slot = self.inflight.lock().expect("lock").entry(key.clone()).or_default().clone();
        let result = slot
            .get_or_init(|| async {
                // a racing request may have finished while we queued for the slot
                if let Some(hit) = self.lru.lock().expect("lock").get(&key) {
                    return Ok(hit.clone());
                }
                self.computed.fetch_add(1, Ordering::SeqCst);
                let out = tokio::task::spawn_blocking(compute).await.expect("shade worker panicked");
                out.map(Arc::new)
            })
            .await
            .clone();
        if let Ok(v) = &result {
            self.lru.lock().expect("lock").put(key.clone(), v.clone());
        }
        let mut inflight = self.inflight.lock().expect("lock");
        if inflight.get(&key).is_some_and(|s| Arc::ptr_eq(s, &slot)) {
            inflight.remove(&key);
        }
        result
    }
}

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use shadeway_core::ingest::{GeoBounds, IngestConfig, IngestError};
use shadeway_core::Scene;

use crate::ServiceError;

/// Public summary of a stored scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneHandle {
    pub scene_id: String,
    pub buildings: usize,
    pub skipped_buildings: usize,
    pub road_nodes: usize,
    pub road_edges: usize,
    /// Hash of the road input; changes whenever the graph would.
    pub graph_version: String,
    pub bounds: Option<GeoBounds>,
    /// `(date, hour)` shade maps currently cached for this scene.
    #[serde(default)]
    pub shade: Vec<String>,
}

/// Key-sorted, whitespace-free re-serialization, so formatting differences
/// do not change a scene id.
fn canonical(bytes: &[u8]) -> Result<Vec<u8>, IngestError> {
    let value: serde_json::Value = shadeway_core::ingest::parse_json(bytes)?;
    Ok(serde_json::to_vec(&value).expect("value serializes"))
}

fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(&h.finalize()[..16])
}

/// Append-only scene directory: `<root>/scenes/<id>/`.
pub struct SceneStore {
    root: PathBuf,
    cfg: IngestConfig,
    loaded: RwLock<HashMap<String, Arc<StoredScene>>>,
}

pub struct StoredScene {
    pub handle: SceneHandle,
    pub scene: Scene,
}

impl SceneStore {
    pub fn open(root: &Path) -> Result<Self, ServiceError> {
        fs::create_dir_all(root.join("scenes"))?;
        Ok(Self {
            root: root.to_path_buf(),
            cfg: IngestConfig::default(),
            loaded: RwLock::new(HashMap::new()),
        })
    }

    fn dir(&self, id: &str) -> PathBuf {
        self.root.join("scenes").join(id)
    }

    /// Ingests and persists a scene; identical inputs give the same id and
    /// leave the stored copy untouched.
    pub fn put(&self, buildings: &[u8], roads: Option<&[u8]>) -> Result<Arc<StoredScene>, ServiceError> {
        let roads = roads.filter(|r| !r.iter().all(u8::is_ascii_whitespace));
        let canon_b = canonical(buildings)?;
        let canon_r = roads.map(canonical).transpose()?.unwrap_or_default();
        let id = digest(&[&canon_b, &canon_r]);
        if let Some(s) = self.get(&id)? {
            return Ok(s);
        }
        let scene = Scene::from_geojson(buildings, roads, &self.cfg)?;
        let handle = SceneHandle {
            scene_id: id.clone(),
            buildings: scene.buildings.len(),
            skipped_buildings: scene.skipped_buildings,
            road_nodes: scene.roads.nodes().len(),
            road_edges: scene.roads.edges().len(),
            graph_version: digest(&[&canon_r]),
            bounds: scene.bounds(),
            shade: Vec::new(),
        };

        // write into a scratch directory, then rename so readers never see a partial scene
        let tmp = self.root.join("scenes").join(format!(".tmp-{id}-{}", std::process::id()));
        fs::create_dir_all(&tmp)?;
        fs::write(tmp.join("buildings.geojson"), buildings)?;
        if let Some(r) = roads {
            fs::write(tmp.join("roads.geojson"), r)?;
        }
        fs::write(tmp.join("scene.json"), scene.to_json())?;
        fs::write(tmp.join("handle.json"), serde_json::to_vec_pretty(&handle)?)?;
        if fs::rename(&tmp, self.dir(&id)).is_err() {
            // another writer won the race with identical content
            let _ = fs::remove_dir_all(&tmp);
        }
        let stored = Arc::new(StoredScene { handle, scene });
        self.loaded.write().expect("lock").insert(id, stored.clone());
        Ok(stored)
    }

    pub fn get(&self, id: &str) -> Result<Option<Arc<StoredScene>>, ServiceError> {
        if let Some(s) = self.loaded.read().expect("lock").get(id) {
            return Ok(Some(s.clone()));
        }
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_hexdigit()) {
            return Ok(None);
        }
        let dir = self.dir(id);
        if !dir.join("handle.json").is_file() {
            return Ok(None);
        }
        let handle: SceneHandle = serde_json::from_slice(&fs::read(dir.join("handle.json"))?)?;
        let scene = Scene::from_json(&fs::read(dir.join("scene.json"))?)?;
        let stored = Arc::new(StoredScene { handle, scene });
        self.loaded.write().expect("lock").insert(id.to_string(), stored.clone());
        Ok(Some(stored))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use shadeway_core::pipeline::{CAMPUS_BUILDINGS, CAMPUS_ROADS};

    #[test]
    fn ids_ignore_formatting_and_survive_restart() {
        let dir = tempfile::tempdir().unwrap();
        let store = SceneStore::open(dir.path()).unwrap();
        let a = store.put(CAMPUS_BUILDINGS, Some(CAMPUS_ROADS)).unwrap();
        let compact = serde_json::to_vec(&serde_json::from_slice::<serde_json::Value>(CAMPUS_BUILDINGS).unwrap()).unwrap();
        let b = store.put(&compact, Some(CAMPUS_ROADS)).unwrap();
        assert_eq!(a.handle.scene_id, b.handle.scene_id);
        let c = store.put(CAMPUS_BUILDINGS, None).unwrap();
        assert_ne!(a.handle.scene_id, c.handle.scene_id);
        assert_eq!(c.handle.road_edges, 0);

        let reopened = SceneStore::open(dir.path()).unwrap();
        let again = reopened.get(&a.handle.scene_id).unwrap().unwrap();
        assert_eq!(again.handle, a.handle);
        assert_eq!(again.scene, a.scene);
        assert!(reopened.get("../etc").unwrap().is_none());
        assert!(reopened.get("abcd").unwrap().is_none());
    }
}

//! Versioned JSON mesh format.
//!
//! ```json
//! {"version": 1,
//!  "vertices": [[x, y], ...],
//!  "triangles": [[i, j, k], ...],
//!  "identifications": [[a, b], ...],
//!  "metric": [[g11, g12, g22], ...],
//!  "rho": [...]}
//! ```
//! `metric` (one entry per triangle) and `rho` (one entry per vertex) are optional.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Metric, SurfaceMesh};
use crate::error::{Error, Result};

pub const MESH_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshData {
    pub version: u32,
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    #[serde(default)]
    pub identifications: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<f64>>,
}

impl MeshData {
    pub fn into_mesh(self) -> Result<SurfaceMesh> {
        if self.version != MESH_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(self.version));
        }
        let nt = self.triangles.len();
        let metric = match self.metric {
            Some(m) => m.into_iter().map(|g| Metric::new(g[0], g[1], g[2])).collect(),
            None => vec![Metric::IDENTITY; nt],
        };
        SurfaceMesh::with_all(
            self.vertices,
            self.triangles,
            metric,
            self.identifications,
            self.rho,
        )
    }

    pub fn from_json(text: &str) -> Result<SurfaceMesh> {
        let data: MeshData = serde_json::from_str(text)?;
        data.into_mesh()
    }
}

impl SurfaceMesh {
    /// Serializable form. Metric and weights are omitted when they are the defaults.
    pub fn to_data(&self) -> MeshData {
        let metric = if self.metric().iter().all(|g| *g == Metric::IDENTITY) {
            None
        } else {
            Some(self.metric().iter().map(|g| [g.g11, g.g12, g.g22]).collect())
        };
        let rho = if self.rho().iter().all(|&r| r == 1.0) {
            None
        } else {
            Some(self.rho_per_vertex())
        };
        MeshData {
            version: MESH_FORMAT_VERSION,
            vertices: self.vertices().to_vec(),
            triangles: self.triangles().to_vec(),
            identifications: self.identifications().to_vec(),
            metric,
            rho,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_data()).expect("mesh data serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SurfaceMesh> {
        let text = std::fs::read_to_string(path)?;
        MeshData::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

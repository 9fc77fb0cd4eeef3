//! Corpus manifests: a JSON file naming site files, generator specs or a
//! preset, with a top-level seed.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "preset": "egpd-50",
//!   "sites": [
//!     { "id": "gauge-a", "path": "gauge-a.csv" },
//!     { "id": "synthetic-b", "generator": { "kind": "egpd", "kappa": 2.0, "sigma": 5.0, "xi": 0.2, "n": 500 } }
//!   ]
//! }
//! ```
//!
//! Relative paths resolve against the manifest's directory. A generator
//! without its own `seed` gets one derived from the manifest seed and its
//! position.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rainfit_core::corpus::{preset, Family, GeneratorSpec, SiteSeries};
use rainfit_core::numerics::rng::derive_stream;
use rainfit_core::RngState;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::records::read_json;
use crate::site::SiteLoader;

const MANIFEST_STREAM: u64 = 0x6d61_6e69_6665_7374; // "manifest"

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default)]
    pub sites: Vec<ManifestSite>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSite {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorEntry {
    #[serde(flatten)]
    pub family: Family,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discretize_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SiteSource {
    File(PathBuf),
    Generated(GeneratorSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiteEntry {
    pub id: String,
    pub source: SiteSource,
}

impl Manifest {
    pub fn for_preset(name: &str, seed: u64) -> Self {
        Manifest { seed, preset: Some(name.to_string()), sites: Vec::new() }
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        read_json(path)
    }

    /// Preset sites first, then `sites` in order. Ids must be unique.
    pub fn resolve(&self, base: &Path) -> AppResult<Vec<SiteEntry>> {
        let mut out = Vec::new();
        if let Some(name) = &self.preset {
            let specs = preset(name, self.seed).map_err(|e| AppError::config(e.to_string()))?;
            out.extend(specs.into_iter().map(|(id, spec)| SiteEntry { id, source: SiteSource::Generated(spec) }));
        }
        for (i, site) in self.sites.iter().enumerate() {
            let source = match (&site.path, &site.generator) {
                (Some(path), None) => SiteSource::File(base.join(path)),
                (None, Some(g)) => {
                    let seed = g.seed.unwrap_or_else(|| {
                        RngState::new(self.seed, derive_stream(MANIFEST_STREAM, i as u64)).next_u64()
                    });
                    let spec = GeneratorSpec { family: g.family.clone(), n: g.n, discretize_mm: g.discretize_mm, seed };
                    spec.validate().map_err(|e| AppError::config(format!("site `{}`: {e}", site.id)))?;
                    SiteSource::Generated(spec)
                }
                _ => return Err(AppError::config(format!("site `{}` needs exactly one of `path` or `generator`", site.id))),
            };
            out.push(SiteEntry { id: site.id.clone(), source });
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = out.iter().find(|s| !seen.insert(s.id.as_str())) {
            return Err(AppError::config(format!("duplicate site id `{}`", dup.id)));
        }
        if out.is_empty() {
            return Err(AppError::config("manifest lists no sites"));
        }
        Ok(out)
    }
}

impl SiteEntry {
    pub fn materialize(&self, loader: &dyn SiteLoader) -> AppResult<SiteSeries> {
        match &self.source {
            SiteSource::File(path) => loader.load(&self.id, path),
            SiteSource::Generated(spec) => spec
                .simulate(self.id.clone())
                .map_err(|e| AppError::data(Path::new(&self.id), format!("simulation failed: {e}"))),
        }
    }
}

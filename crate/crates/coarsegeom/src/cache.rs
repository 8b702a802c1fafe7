//! Content-addressed cache for generated distance matrices.
//!
//! Expensive generators (Cayley balls in particular) can persist their
//! distance matrix under a SHA-256 hash of the generator spec. A later run
//! with the same spec loads the stored matrix and is guaranteed to agree
//! with regeneration elementwise; a corrupt or mismatched entry is
//! regenerated and rewritten with a warning rather than failing the run.
//!
//! The cache root comes from the `COARSEGEOM_CACHE` environment variable,
//! overridden by an explicit directory (the CLI's `--cache-dir`). With
//! neither set, caching is disabled and every request regenerates.

use crate::error::{format_err, Result};
use crate::io::{json_to_string, SCHEMA_VERSION};
use crate::space::{Budget, FiniteMetricSpace, Generator};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Environment variable naming the cache root directory.
pub const CACHE_ENV: &str = "COARSEGEOM_CACHE";

/// Resolved cache location. `None` disables caching.
#[derive(Debug, Clone, Default)]
pub struct CacheConfig {
    pub root: Option<PathBuf>,
}

impl CacheConfig {
    /// Explicit directory wins over the environment variable.
    pub fn resolve(flag: Option<PathBuf>) -> CacheConfig {
        Self::resolve_parts(flag, std::env::var(CACHE_ENV).ok())
    }

    fn resolve_parts(flag: Option<PathBuf>, env: Option<String>) -> CacheConfig {
        CacheConfig {
            root: flag.or_else(|| env.filter(|s| !s.is_empty()).map(PathBuf::from)),
        }
    }

    pub fn disabled() -> CacheConfig {
        CacheConfig { root: None }
    }
}

/// What happened on a cache request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOutcome {
    /// No cache root configured; built directly.
    Disabled,
    /// No entry yet; built and stored.
    Miss,
    /// Entry loaded and used.
    Hit,
    /// Entry existed but was unreadable or mismatched; rebuilt and rewritten.
    Regenerated,
}

/// Hex SHA-256 of a byte string (also used for artifact fingerprints).
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Canonical cache key for a generator spec: `kind` plus `name=value`
/// parts, joined unambiguously.
pub fn spec_key(kind: &str, parts: &[(&str, &str)]) -> String {
    let mut key = String::from(kind);
    for (k, v) in parts {
        key.push('|');
        key.push_str(k);
        key.push('=');
        key.push_str(v);
    }
    key
}

fn entry_path(root: &Path, key: &str) -> PathBuf {
    root.join(format!("space-{}.json", content_hash(key.as_bytes())))
}

fn load_entry(path: &Path, key: &str, bud: &Budget) -> Result<FiniteMetricSpace> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| format_err(format!("cache entry: {e}")))?;
    let m = v
        .as_object()
        .ok_or_else(|| format_err("cache entry is not an object"))?;
    let ver = m
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| format_err("cache entry lacks schema_version"))?;
    if ver != SCHEMA_VERSION {
        return Err(format_err(format!("cache entry schema {ver} unsupported")));
    }
    let stored_key = m
        .get("spec")
        .and_then(Value::as_str)
        .ok_or_else(|| format_err("cache entry lacks its spec"))?;
    if stored_key != key {
        return Err(format_err("cache entry spec does not match the request"));
    }
    let name = m
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| format_err("cache entry lacks a name"))?;
    let basepoint = m
        .get("basepoint")
        .and_then(Value::as_str)
        .ok_or_else(|| format_err("cache entry lacks a basepoint"))?;
    let points: Vec<String> = m
        .get("points")
        .and_then(Value::as_array)
        .ok_or_else(|| format_err("cache entry lacks points"))?
        .iter()
        .map(|p| {
            p.as_str()
                .map(str::to_string)
                .ok_or_else(|| format_err("cache entry points must be strings"))
        })
        .collect::<Result<_>>()?;
    let matrix: Vec<Vec<f64>> = m
        .get("matrix")
        .and_then(Value::as_array)
        .ok_or_else(|| format_err("cache entry lacks a matrix"))?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| format_err("matrix rows must be arrays"))?
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| format_err("matrix entries must be numbers"))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let space = FiniteMetricSpace::from_matrix(name, points, basepoint, matrix, bud)?;
    Ok(match generator_from_entry(m)? {
        Some(generator) => space.with_generator(generator),
        None => space,
    })
}

/// Closed-form generator tags survive the cache round trip so a hit emits
/// the same artifact a fresh build would.
fn generator_to_entry(generator: &Generator) -> Option<Value> {
    match generator {
        Generator::Grid { dim, side } => Some(json!({
            "type": "grid",
            "dim": dim,
            "side": side,
        })),
        Generator::Cayley {
            generators,
            relators,
            radius,
            boundary_distortion,
            suggested_trim,
        } => Some(json!({
            "type": "cayley",
            "gens": generators,
            "relators": relators,
            "radius": radius,
            "boundary_distortion": boundary_distortion,
            "suggested_trim": suggested_trim,
        })),
        _ => None,
    }
}

fn generator_from_entry(m: &serde_json::Map<String, Value>) -> Result<Option<Generator>> {
    let Some(g) = m.get("generator") else {
        return Ok(None);
    };
    let g = g
        .as_object()
        .ok_or_else(|| format_err("cache generator must be an object"))?;
    let kind = g
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| format_err("cache generator lacks a type"))?;
    let get_usize = |k: &str| -> Result<usize> {
        g.get(k)
            .and_then(Value::as_u64)
            .map(|x| x as usize)
            .ok_or_else(|| format_err(format!("cache generator lacks {k}")))
    };
    match kind {
        "grid" => Ok(Some(Generator::Grid {
            dim: get_usize("dim")?,
            side: get_usize("side")?,
        })),
        "cayley" => {
            let strings = |k: &str| -> Result<Vec<String>> {
                g.get(k)
                    .and_then(Value::as_array)
                    .ok_or_else(|| format_err(format!("cache generator lacks {k}")))?
                    .iter()
                    .map(|s| {
                        s.as_str()
                            .map(str::to_string)
                            .ok_or_else(|| format_err(format!("{k} entries must be strings")))
                    })
                    .collect()
            };
            Ok(Some(Generator::Cayley {
                generators: strings("gens")?,
                relators: strings("relators")?,
                radius: get_usize("radius")?,
                boundary_distortion: g
                    .get("boundary_distortion")
                    .and_then(Value::as_bool)
                    .ok_or_else(|| format_err("cache generator lacks boundary_distortion"))?,
                suggested_trim: get_usize("suggested_trim")?,
            }))
        }
        other => Err(format_err(format!("cache generator type {other:?} unknown"))),
    }
}

fn store_entry(path: &Path, key: &str, space: &FiniteMetricSpace) -> Result<()> {
    let n = space.n();
    let matrix: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| space.dist(i, j)).collect())
        .collect();
    let mut v = json!({
        "schema_version": SCHEMA_VERSION,
        "spec": key,
        "name": space.name(),
        "basepoint": space.id(space.basepoint()),
        "points": space.ids(),
        "matrix": matrix,
    });
    if let Some(g) = generator_to_entry(space.generator()) {
        v.as_object_mut()
            .expect("object literal")
            .insert("generator".into(), g);
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, json_to_string(&v))?;
    Ok(())
}

/// Builds a space through the cache: a configured root is consulted under
/// the content hash of `key`, and the entry is rewritten whenever it is
/// missing, unreadable, or belongs to a different spec. Spaces whose
/// distance matrix exceeds the dense budget are passed through unstored.
pub fn cached_space<F>(
    cfg: &CacheConfig,
    key: &str,
    bud: &Budget,
    build: F,
) -> Result<(FiniteMetricSpace, CacheOutcome)>
where
    F: FnOnce() -> Result<FiniteMetricSpace>,
{
    let Some(root) = &cfg.root else {
        return Ok((build()?, CacheOutcome::Disabled));
    };
    let path = entry_path(root, key);
    let existed = path.exists();
    if existed {
        match load_entry(&path, key, bud) {
            Ok(space) => return Ok((space, CacheOutcome::Hit)),
            Err(e) => {
                eprintln!(
                    "warning: cache entry {} is unusable ({e}); regenerating",
                    path.display()
                );
            }
        }
    }
    let space = build()?;
    if space.n() <= bud.max_dense {
        store_entry(&path, key, &space)?;
    }
    Ok((
        space,
        if existed {
            CacheOutcome::Regenerated
        } else {
            CacheOutcome::Miss
        },
    ))
}

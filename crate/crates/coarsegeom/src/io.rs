//! File formats for every artifact the toolkit reads or writes.
//!
//! JSON carries structured artifacts (spaces, measures, covers, complexes,
//! extension problems and solutions); CSV carries tabular data (dimension
//! profiles, tower reports, embeddings, compression profiles). Every JSON
//! artifact starts with a `schema_version` field; infinite real values are
//! stored as the string sentinel `"unbounded"` instead of IEEE infinities,
//! which JSON cannot represent.
//!
//! Serialization is deterministic: object keys are emitted in sorted order
//! and floats use the shortest round-trip decimal form, so identical data
//! always produces identical bytes.

use crate::cover::{Cover, CoverStats, ProfileRow};
use crate::embed::{CompressionRow, EmbeddingTable, IncrementRow, MeasureMap};
use crate::error::{format_err, validation, Result};
use crate::extension::{ExtensionProblem, GrowthMode, PairAudit, PartialValues};
use crate::homology::InducedRank;
use crate::measure::FiniteMeasure;
use crate::nerve::{NerveTower, SimplicialComplex, NERVE_MAX_ORDER, NERVE_MAX_SIMPLICES};
use crate::space::{Budget, FiniteMetricSpace, Generator};
use serde_json::{json, Map, Value};
use std::collections::BTreeSet;
use std::path::Path;

/// Version stamped into (and required of) every JSON artifact.
pub const SCHEMA_VERSION: u64 = 1;

// ---------------------------------------------------------------------------
// Primitives: sentinel reals, JSON field access, file plumbing.
// ---------------------------------------------------------------------------

/// Encodes a real number, mapping `+inf` to the `"unbounded"` sentinel.
pub fn real_to_json(x: f64) -> Value {
    if x.is_infinite() && x > 0.0 {
        Value::String("unbounded".into())
    } else {
        json!(x)
    }
}

/// Decodes a real number, accepting the `"unbounded"` sentinel.
pub fn real_from_json(v: &Value) -> Result<f64> {
    match v {
        Value::String(s) if s == "unbounded" => Ok(f64::INFINITY),
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| format_err(format!("number {n} does not fit a 64-bit float"))),
        other => Err(format_err(format!("expected a real or \"unbounded\", got {other}"))),
    }
}

fn obj(v: &Value) -> Result<&Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| format_err("expected a JSON object"))
}

fn field<'a>(m: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    m.get(key)
        .ok_or_else(|| format_err(format!("missing field {key:?}")))
}

fn str_field<'a>(m: &'a Map<String, Value>, key: &str) -> Result<&'a str> {
    field(m, key)?
        .as_str()
        .ok_or_else(|| format_err(format!("field {key:?} must be a string")))
}

fn f64_field(m: &Map<String, Value>, key: &str) -> Result<f64> {
    real_from_json(field(m, key)?)
}

fn usize_field(m: &Map<String, Value>, key: &str) -> Result<usize> {
    field(m, key)?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| format_err(format!("field {key:?} must be a nonnegative integer")))
}

fn arr<'a>(m: &'a Map<String, Value>, key: &str) -> Result<&'a Vec<Value>> {
    field(m, key)?
        .as_array()
        .ok_or_else(|| format_err(format!("field {key:?} must be an array")))
}

fn check_schema(m: &Map<String, Value>) -> Result<()> {
    let v = field(m, "schema_version")?
        .as_u64()
        .ok_or_else(|| format_err("schema_version must be an integer"))?;
    if v != SCHEMA_VERSION {
        return Err(format_err(format!(
            "unsupported schema_version {v} (this build reads {SCHEMA_VERSION})"
        )));
    }
    Ok(())
}

fn id_to_index(space: &FiniteMetricSpace, id: &str) -> Result<usize> {
    space
        .index_of(id)
        .ok_or_else(|| format_err(format!("point {id:?} is not in space {}", space.name())))
}

fn ids_to_indices(space: &FiniteMetricSpace, v: &Value) -> Result<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| format_err("expected an array of point ids"))?
        .iter()
        .map(|p| {
            p.as_str()
                .ok_or_else(|| format_err("point ids must be strings"))
                .and_then(|s| id_to_index(space, s))
        })
        .collect()
}

/// Serializes a JSON artifact with sorted keys and a trailing newline.
pub fn json_to_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn write_json_file(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, json_to_string(v))?;
    Ok(())
}

pub fn read_json_file(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| format_err(format!("{}: {e}", path.display())))
}

pub fn write_text_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Spaces.
// ---------------------------------------------------------------------------

/// Space artifact: name, basepoint, point ids, and the metric either in
/// closed form (`grid`, `cayley`) or as an explicit `matrix`. Spaces built
/// by functors carry a `provenance` tag next to their matrix.
pub fn space_to_json(space: &FiniteMetricSpace) -> Result<Value> {
    let n = space.n();
    let metric = match space.generator() {
        Generator::Grid { dim, side } => json!({"type": "grid", "dim": dim, "side": side}),
        Generator::Cayley {
            generators,
            relators,
            radius,
            ..
        } => json!({
            "type": "cayley",
            "gens": generators,
            "relators": relators,
            "radius": radius,
        }),
        other => {
            if n > 5_000 {
                return Err(validation(format!(
                    "{n} points is too large for an explicit matrix artifact"
                )));
            }
            let data: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| space.dist(i, j)).collect())
                .collect();
            let mut m = json!({"type": "matrix", "data": data});
            let tag = match other {
                Generator::Derived(t) => Some(t.clone()),
                Generator::Graph => Some("graph".to_string()),
                _ => None,
            };
            if let Some(t) = tag {
                m.as_object_mut()
                    .expect("object literal")
                    .insert("provenance".into(), Value::String(t));
            }
            m
        }
    };
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "name": space.name(),
        "basepoint": space.id(space.basepoint()),
        "points": space.ids(),
        "metric": metric,
    }))
}

/// Reads a space artifact. Closed-form metrics are regenerated and then
/// checked against the stored point list and basepoint, so a hit is
/// guaranteed to agree with the file.
pub fn space_from_json(v: &Value, bud: &Budget) -> Result<FiniteMetricSpace> {
    let m = obj(v)?;
    check_schema(m)?;
    let name = str_field(m, "name")?;
    let basepoint = str_field(m, "basepoint")?;
    let points: Vec<String> = arr(m, "points")?
        .iter()
        .map(|p| {
            p.as_str()
                .map(str::to_string)
                .ok_or_else(|| format_err("point ids must be strings"))
        })
        .collect::<Result<_>>()?;
    let metric = obj(field(m, "metric")?)?;
    let kind = str_field(metric, "type")?;
    let space = match kind {
        "grid" => {
            let dim = usize_field(metric, "dim")?;
            let side = usize_field(metric, "side")?;
            FiniteMetricSpace::grid(dim, side, bud)?
        }
        "cayley" => {
            let gens: Vec<String> = arr(metric, "gens")?
                .iter()
                .map(|g| {
                    g.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| format_err("generators must be strings"))
                })
                .collect::<Result<_>>()?;
            let relators: Vec<String> = arr(metric, "relators")?
                .iter()
                .map(|g| {
                    g.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| format_err("relators must be strings"))
                })
                .collect::<Result<_>>()?;
            let radius = usize_field(metric, "radius")?;
            crate::cayley::cayley_ball(&gens, &relators, radius, bud)?
        }
        "matrix" => {
            let data: Vec<Vec<f64>> = arr(metric, "data")?
                .iter()
                .map(|row| {
                    row.as_array()
                        .ok_or_else(|| format_err("matrix rows must be arrays"))?
                        .iter()
                        .map(real_from_json)
                        .collect()
                })
                .collect::<Result<_>>()?;
            return FiniteMetricSpace::from_matrix(name, points, basepoint, data, bud);
        }
        other => {
            return Err(format_err(format!("unknown metric type {other:?}")));
        }
    };
    // Closed forms pin the point enumeration and the basepoint; a file
    // disagreeing with its own generator is rejected rather than patched.
    if space.ids() != points.as_slice() {
        return Err(format_err(
            "stored point list disagrees with the regenerated metric",
        ));
    }
    if space.id(space.basepoint()) != basepoint {
        return Err(format_err(
            "stored basepoint disagrees with the regenerated metric",
        ));
    }
    Ok(space.with_name(name))
}

// ---------------------------------------------------------------------------
// Measures.
// ---------------------------------------------------------------------------

pub fn measure_to_json(space: &FiniteMetricSpace, mu: &FiniteMeasure) -> Value {
    let atoms: Vec<Value> = mu
        .atoms()
        .iter()
        .map(|a| json!({"point": space.id(a.point), "weight": a.weight}))
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "space": space.name(),
        "atoms": atoms,
    })
}

pub fn measure_from_json(v: &Value, space: &FiniteMetricSpace) -> Result<FiniteMeasure> {
    let m = obj(v)?;
    check_schema(m)?;
    let sname = str_field(m, "space")?;
    if sname != space.name() {
        return Err(format_err(format!(
            "measure belongs to space {sname:?}, not {:?}",
            space.name()
        )));
    }
    let atoms: Vec<(usize, f64)> = arr(m, "atoms")?
        .iter()
        .map(|a| {
            let am = obj(a)?;
            Ok((
                id_to_index(space, str_field(am, "point")?)?,
                f64_field(am, "weight")?,
            ))
        })
        .collect::<Result<_>>()?;
    FiniteMeasure::new(atoms)
}

// ---------------------------------------------------------------------------
// Covers (flat, colored, and schedules all share one artifact shape).
// ---------------------------------------------------------------------------

/// In-memory form of a cover artifact: families of sets of point indices,
/// the headline scale `L`, and (for schedules) one scale per family.
///
/// `families` always hold the sets in their certified form (e.g. the pairwise
/// separated sets of a colored cover, which is what audits check). A positive
/// `enlarge` radius records that the cover the artifact *realizes* is the one
/// obtained by growing every set by that radius; [`CoverFile::flat`] applies it.
#[derive(Debug, Clone)]
pub struct CoverFile {
    pub families: Vec<Vec<Vec<usize>>>,
    pub scale: f64,
    pub scales: Option<Vec<f64>>,
    pub enlarge: f64,
}

impl CoverFile {
    /// All families merged into one flat cover, with the recorded enlargement
    /// radius (if any) applied to every set.
    pub fn flat(&self, space: &FiniteMetricSpace) -> Result<Cover> {
        let raw = Cover::new(space, self.families.concat())?;
        if self.enlarge > 0.0 {
            Ok(raw.enlarge(space, self.enlarge))
        } else {
            Ok(raw)
        }
    }
}

pub fn cover_to_json(
    space: &FiniteMetricSpace,
    families: &[Vec<Vec<usize>>],
    scale: f64,
    scales: Option<&[f64]>,
    enlarge: f64,
) -> Value {
    let fams: Vec<Value> = families
        .iter()
        .map(|fam| {
            Value::Array(
                fam.iter()
                    .map(|set| {
                        Value::Array(
                            set.iter().map(|&p| Value::String(space.id(p).into())).collect(),
                        )
                    })
                    .collect(),
            )
        })
        .collect();
    let mut v = json!({
        "schema_version": SCHEMA_VERSION,
        "space": space.name(),
        "L": real_to_json(scale),
        "families": fams,
    });
    if let Some(sc) = scales {
        v.as_object_mut()
            .expect("object literal")
            .insert("scales".into(), json!(sc));
    }
    if enlarge > 0.0 {
        v.as_object_mut()
            .expect("object literal")
            .insert("enlarge".into(), real_to_json(enlarge));
    }
    v
}

pub fn cover_from_json(v: &Value, space: &FiniteMetricSpace) -> Result<CoverFile> {
    let m = obj(v)?;
    check_schema(m)?;
    let sname = str_field(m, "space")?;
    if sname != space.name() {
        return Err(format_err(format!(
            "cover belongs to space {sname:?}, not {:?}",
            space.name()
        )));
    }
    let scale = f64_field(m, "L")?;
    let families: Vec<Vec<Vec<usize>>> = arr(m, "families")?
        .iter()
        .map(|fam| {
            fam.as_array()
                .ok_or_else(|| format_err("families must be arrays of sets"))?
                .iter()
                .map(|set| ids_to_indices(space, set))
                .collect()
        })
        .collect::<Result<_>>()?;
    let scales = match m.get("scales") {
        None => None,
        Some(sv) => Some(
            sv.as_array()
                .ok_or_else(|| format_err("scales must be an array"))?
                .iter()
                .map(real_from_json)
                .collect::<Result<Vec<f64>>>()?,
        ),
    };
    let enlarge = match m.get("enlarge") {
        None => 0.0,
        Some(ev) => {
            let r = real_from_json(ev)?;
            if !r.is_finite() || r < 0.0 {
                return Err(format_err("enlarge must be a finite nonnegative radius"));
            }
            r
        }
    };
    Ok(CoverFile {
        families,
        scale,
        scales,
        enlarge,
    })
}

/// Cover statistics report with per-point rows; infinite Lebesgue values
/// use the `"unbounded"` sentinel.
pub fn stats_to_json(space: &FiniteMetricSpace, stats: &CoverStats) -> Value {
    let per_point: Vec<Value> = (0..space.n())
        .map(|i| {
            json!({
                "point": space.id(i),
                "lebesgue": real_to_json(stats.per_point_lebesgue[i]),
                "mesh": real_to_json(stats.per_point_mesh[i]),
                "order": stats.per_point_order[i],
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "space": space.name(),
        "n_sets": stats.n_sets,
        "multiplicity": stats.multiplicity,
        "mesh": real_to_json(stats.mesh_global),
        "lebesgue": real_to_json(stats.lebesgue),
        "per_point": per_point,
    })
}

// ---------------------------------------------------------------------------
// Simplicial complexes.
// ---------------------------------------------------------------------------

pub fn complex_to_json(cx: &SimplicialComplex) -> Value {
    let maximal: Vec<Value> = cx
        .maximal_simplices()
        .iter()
        .map(|s| {
            Value::Array(
                s.iter()
                    .map(|&v| Value::String(cx.vertices[v].clone()))
                    .collect(),
            )
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "meshSize": real_to_json(cx.mesh_size),
        "vertices": cx.vertices,
        "maxSimplices": maximal,
    })
}

pub fn complex_from_json(v: &Value) -> Result<SimplicialComplex> {
    let m = obj(v)?;
    check_schema(m)?;
    let mesh_size = f64_field(m, "meshSize")?;
    let vertices: Vec<String> = arr(m, "vertices")?
        .iter()
        .map(|p| {
            p.as_str()
                .map(str::to_string)
                .ok_or_else(|| format_err("vertex ids must be strings"))
        })
        .collect::<Result<_>>()?;
    let vindex = |id: &str| -> Result<usize> {
        vertices
            .iter()
            .position(|w| w == id)
            .ok_or_else(|| format_err(format!("simplex uses unknown vertex {id:?}")))
    };
    let mut closed: BTreeSet<Vec<usize>> = BTreeSet::new();
    for s in arr(m, "maxSimplices")? {
        let mut simplex: Vec<usize> = s
            .as_array()
            .ok_or_else(|| format_err("simplices must be arrays of vertex ids"))?
            .iter()
            .map(|p| {
                p.as_str()
                    .ok_or_else(|| format_err("vertex ids must be strings"))
                    .and_then(vindex)
            })
            .collect::<Result<_>>()?;
        simplex.sort_unstable();
        simplex.dedup();
        if simplex.is_empty() {
            return Err(format_err("simplices must be nonempty"));
        }
        if simplex.len() > NERVE_MAX_ORDER {
            return Err(crate::error::budget(format!(
                "simplex of order {} exceeds the cap {NERVE_MAX_ORDER}",
                simplex.len()
            )));
        }
        // Face closure: every nonempty subset of a stored simplex.
        let k = simplex.len();
        for mask in 1u32..(1u32 << k) {
            let face: Vec<usize> = (0..k).filter(|&b| mask >> b & 1 == 1).map(|b| simplex[b]).collect();
            closed.insert(face);
            if closed.len() > NERVE_MAX_SIMPLICES {
                return Err(crate::error::budget(format!(
                    "complex exceeds {NERVE_MAX_SIMPLICES} simplices"
                )));
            }
        }
    }
    let max_dim = closed.iter().map(|s| s.len() - 1).max().unwrap_or(0);
    let mut by_dim: Vec<Vec<Vec<usize>>> = vec![Vec::new(); max_dim + 1];
    for s in closed {
        by_dim[s.len() - 1].push(s);
    }
    for level in &mut by_dim {
        level.sort();
    }
    Ok(SimplicialComplex {
        vertices,
        by_dim,
        mesh_size,
    })
}

// ---------------------------------------------------------------------------
// Extension problems and solutions.
// ---------------------------------------------------------------------------

fn values_to_json(space: &FiniteMetricSpace, subset: &[usize], values: &PartialValues) -> Value {
    let mut map = Map::new();
    match values {
        PartialValues::Scalar(v) => {
            for (&a, &x) in subset.iter().zip(v) {
                map.insert(space.id(a).into(), json!(x));
            }
        }
        PartialValues::Vector(v) => {
            for (&a, x) in subset.iter().zip(v) {
                map.insert(space.id(a).into(), json!(x));
            }
        }
    }
    Value::Object(map)
}

pub fn problem_to_json(space: &FiniteMetricSpace, p: &ExtensionProblem) -> Value {
    let mut v = json!({
        "schema_version": SCHEMA_VERSION,
        "space": space.name(),
        "A": p.subset.iter().map(|&a| space.id(a)).collect::<Vec<_>>(),
        "values": values_to_json(space, &p.subset, &p.values),
        "lambda": p.lambda,
        "s": p.s,
    });
    let o = v.as_object_mut().expect("object literal");
    match p.mode {
        GrowthMode::Plain => {
            o.insert("mode".into(), json!("A"));
        }
        GrowthMode::NormGrowth { c, b } => {
            o.insert("mode".into(), json!("tilde"));
            o.insert("c".into(), json!(c));
            o.insert("b".into(), json!(b));
        }
    }
    v
}

pub fn problem_from_json(v: &Value, space: &FiniteMetricSpace) -> Result<ExtensionProblem> {
    let m = obj(v)?;
    check_schema(m)?;
    let sname = str_field(m, "space")?;
    if sname != space.name() {
        return Err(format_err(format!(
            "problem belongs to space {sname:?}, not {:?}",
            space.name()
        )));
    }
    let subset = ids_to_indices(space, field(m, "A")?)?;
    let values_obj = obj(field(m, "values")?)?;
    let mut scalars: Vec<f64> = Vec::new();
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    for &a in &subset {
        let val = values_obj.get(space.id(a)).ok_or_else(|| {
            format_err(format!("values must cover every point of A; {} missing", space.id(a)))
        })?;
        match val {
            Value::Array(row) => {
                vectors.push(row.iter().map(real_from_json).collect::<Result<_>>()?)
            }
            other => scalars.push(real_from_json(other)?),
        }
    }
    let values = match (scalars.is_empty(), vectors.is_empty()) {
        (false, true) => PartialValues::Scalar(scalars),
        (true, false) => PartialValues::Vector(vectors),
        (true, true) => PartialValues::Scalar(Vec::new()),
        (false, false) => {
            return Err(format_err("values mix scalars and vectors"));
        }
    };
    let lambda = f64_field(m, "lambda")?;
    let s = f64_field(m, "s")?;
    let mode = match m.get("mode").and_then(Value::as_str) {
        None | Some("A") => GrowthMode::Plain,
        Some("tilde") => GrowthMode::NormGrowth {
            c: f64_field(m, "c")?,
            b: f64_field(m, "b")?,
        },
        Some(other) => {
            return Err(format_err(format!(
                "mode must be \"A\" or \"tilde\", got {other:?}"
            )));
        }
    };
    Ok(ExtensionProblem {
        subset,
        values,
        lambda,
        s,
        mode,
    })
}

/// Solution artifact: the problem echoed back, the full value table, the
/// realized constants, and the pair audit.
pub fn solution_to_json(
    space: &FiniteMetricSpace,
    problem: &ExtensionProblem,
    all_values: &PartialValues,
    lambda: f64,
    s: f64,
    audit: &PairAudit,
) -> Value {
    let everything: Vec<usize> = (0..space.n()).collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "space": space.name(),
        "problem": problem_to_json(space, problem),
        "values": values_to_json(space, &everything, all_values),
        "lambda": lambda,
        "s": s,
        "audit": audit_to_json(space, audit),
    })
}

pub fn audit_to_json(space: &FiniteMetricSpace, audit: &PairAudit) -> Value {
    json!({
        "max_excess": audit.max_excess,
        "worst_pair": audit
            .worst_pair
            .map(|(a, b)| json!([space.id(a), space.id(b)]))
            .unwrap_or(Value::Null),
        "satisfied": audit.satisfied(),
    })
}

// ---------------------------------------------------------------------------
// CSV tables.
// ---------------------------------------------------------------------------

fn fmt_real(x: f64) -> String {
    if x.is_infinite() && x > 0.0 {
        "unbounded".into()
    } else {
        format!("{x}")
    }
}

fn csv_from_rows(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory CSV");
    for row in rows {
        w.write_record(&row).expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV is UTF-8")
}

/// Dimension profile: one row per scale with the certificate fingerprint.
pub fn profile_csv(rows: &[ProfileRow], certificates: &[String]) -> String {
    let body = rows
        .iter()
        .zip(certificates)
        .map(|(r, cert)| {
            vec![
                fmt_real(r.scale),
                r.m.to_string(),
                r.d.to_string(),
                fmt_real(r.ratio),
                r.strategy.clone(),
                cert.clone(),
            ]
        })
        .collect();
    csv_from_rows(&["L", "m", "d", "ratio", "strategy", "certificate"], body)
}

/// Tower report: per stage the scale, nerve dimension, Betti numbers up to
/// `k_max`, and the ranks of the induced maps to the next stage (blank on
/// the last stage).
pub fn tower_csv(
    tower: &NerveTower,
    betti_rows: &[Vec<usize>],
    ranks: &[InducedRank],
    k_max: usize,
) -> String {
    let mut header: Vec<String> = vec!["stage".into(), "L".into(), "dim".into()];
    for k in 0..=k_max {
        header.push(format!("b{k}"));
    }
    for k in 0..=k_max {
        header.push(format!("rank{k}_next"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let body = tower
        .stages
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let mut row = vec![
                i.to_string(),
                fmt_real(st.scale),
                st.complex.dim().to_string(),
            ];
            for k in 0..=k_max {
                row.push(betti_rows[i].get(k).copied().unwrap_or(0).to_string());
            }
            for k in 0..=k_max {
                let r = ranks
                    .iter()
                    .find(|r| r.from_stage == i && r.to_stage == i + 1 && r.degree == k)
                    .map(|r| r.rank.to_string())
                    .unwrap_or_default();
                row.push(r);
            }
            row
        })
        .collect();
    csv_from_rows(&header_refs, body)
}

/// Embedding table: one row per point, `point,c0,c1,...`.
pub fn embedding_csv(space: &FiniteMetricSpace, table: &EmbeddingTable) -> String {
    let mut header: Vec<String> = vec!["point".into()];
    for c in 0..table.dimension {
        header.push(format!("c{c}"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let body = (0..space.n())
        .map(|i| {
            let mut row = vec![space.id(i).to_string()];
            row.extend(table.coordinates[i].iter().map(|&x| fmt_real(x)));
            row
        })
        .collect();
    csv_from_rows(&header_refs, body)
}

/// Compression profile: `bucket,rho1,rho2,pairs`.
pub fn compression_csv(rows: &[CompressionRow]) -> String {
    let body = rows
        .iter()
        .map(|r| {
            vec![
                fmt_real(r.upper),
                fmt_real(r.rho1),
                fmt_real(r.rho2),
                r.pairs.to_string(),
            ]
        })
        .collect();
    csv_from_rows(&["bucket", "rho1", "rho2", "pairs"], body)
}

/// Increment table: `bucket,max_increment,pairs`.
pub fn increments_csv(rows: &[IncrementRow]) -> String {
    let body = rows
        .iter()
        .map(|r| {
            vec![
                fmt_real(r.upper),
                fmt_real(r.max_increment),
                r.pairs.to_string(),
            ]
        })
        .collect();
    csv_from_rows(&["bucket", "max_increment", "pairs"], body)
}

/// Fiber profile in long form: `r,point,diameter`.
pub fn fibers_csv(space: &FiniteMetricSpace, r_grid: &[f64], profiles: &[Vec<f64>]) -> String {
    let mut body = Vec::new();
    for (r, per_point) in r_grid.iter().zip(profiles) {
        for (i, d) in per_point.iter().enumerate() {
            body.push(vec![fmt_real(*r), space.id(i).to_string(), fmt_real(*d)]);
        }
    }
    csv_from_rows(&["r", "point", "diameter"], body)
}

/// Measure-map artifact: scale, certified radii, and the per-point
/// measures in the same shape as standalone measure files.
pub fn measure_map_to_json(space: &FiniteMetricSpace, mm: &MeasureMap) -> Value {
    let per_point: Vec<Value> = (0..space.n())
        .map(|i| {
            json!({
                "point": space.id(i),
                "atoms": mm.measures[i]
                    .atoms()
                    .iter()
                    .map(|a| json!({"point": space.id(a.point), "weight": a.weight}))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "space": space.name(),
        "scale": real_to_json(mm.scale),
        "support_radius": real_to_json(mm.support_radius),
        "multiplicity": mm.multiplicity,
        "anchors": mm.anchors.iter().map(|&a| space.id(a)).collect::<Vec<_>>(),
        "per_point": per_point,
        "increments": mm
            .increments
            .iter()
            .map(|r| json!({
                "bucket": real_to_json(r.upper),
                "max_increment": r.max_increment,
                "pairs": r.pairs,
            }))
            .collect::<Vec<_>>(),
    })
}

/// Reads the per-point measures (and the scale label) back out of a
/// measure-map artifact, for use as a stage of a Hilbert realization.
pub fn measure_map_stages_from_json(
    v: &Value,
    space: &FiniteMetricSpace,
) -> Result<(f64, Vec<FiniteMeasure>)> {
    let m = obj(v)?;
    check_schema(m)?;
    let sname = str_field(m, "space")?;
    if sname != space.name() {
        return Err(format_err(format!(
            "measure map belongs to space {sname:?}, not {:?}",
            space.name()
        )));
    }
    let scale = f64_field(m, "scale")?;
    let rows = arr(m, "per_point")?;
    if rows.len() != space.n() {
        return Err(format_err(format!(
            "{} per-point rows for {} points",
            rows.len(),
            space.n()
        )));
    }
    let mut measures = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let rm = obj(row)?;
        let pid = str_field(rm, "point")?;
        if pid != space.id(i) {
            return Err(format_err(format!(
                "per-point rows out of order: expected {}, found {pid}",
                space.id(i)
            )));
        }
        let atoms: Vec<(usize, f64)> = arr(rm, "atoms")?
            .iter()
            .map(|a| {
                let am = obj(a)?;
                Ok((
                    id_to_index(space, str_field(am, "point")?)?,
                    f64_field(am, "weight")?,
                ))
            })
            .collect::<Result<_>>()?;
        measures.push(FiniteMeasure::new(atoms)?);
    }
    Ok((scale, measures))
}

/// Reads an embedding CSV back into coordinate rows aligned with the
/// space's point order.
pub fn embedding_from_csv(space: &FiniteMetricSpace, text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| format_err(format!("embedding CSV: {e}")))?;
    if headers.get(0) != Some("point") {
        return Err(format_err("embedding CSV must start with a point column"));
    }
    let width = headers.len() - 1;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(space.n());
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format_err(format!("embedding CSV: {e}")))?;
        let pid = record
            .get(0)
            .ok_or_else(|| format_err("embedding CSV row lacks a point id"))?;
        if i >= space.n() || pid != space.id(i) {
            return Err(format_err(format!(
                "embedding CSV rows must list every point in order; row {i} holds {pid:?}"
            )));
        }
        let mut row = Vec::with_capacity(width);
        for c in 1..record.len() {
            let cell = record.get(c).unwrap_or_default();
            row.push(cell.parse::<f64>().map_err(|_| {
                format_err(format!("embedding CSV cell {cell:?} is not a number"))
            })?);
        }
        if row.len() != width {
            return Err(format_err("embedding CSV rows have uneven width"));
        }
        rows.push(row);
    }
    if rows.len() != space.n() {
        return Err(format_err(format!(
            "embedding CSV holds {} rows for {} points",
            rows.len(),
            space.n()
        )));
    }
    Ok(rows)
}

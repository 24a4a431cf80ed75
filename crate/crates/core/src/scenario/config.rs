//! Scenario file schema (TOML) and validation.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::cocycle::SigmaMorphism;
use crate::cover::{builtin_cover, Builtin, Cover, RegionId, Triple};
use crate::error::{Error, Result};
use crate::group::{CMatrix, GroupKind, GroupValue, UnitaryMatrix, EQ_TOL};
use crate::nerve::NerveGraph;
use crate::path::{approximate_named, PosetPath};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TIMEOUT_SECS: u64 = 60;
/// Matrices in scenario files may deviate from unitarity by at most this much.
pub const INPUT_UNITARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Check,
    Trivialize,
    Holonomy,
    Sector,
    Amplitude,
    Classify,
}

impl Task {
    pub const ALL: [Task; 6] =
        [Task::Check, Task::Trivialize, Task::Holonomy, Task::Sector, Task::Amplitude, Task::Classify];

    pub fn name(self) -> &'static str {
        match self {
            Task::Check => "check",
            Task::Trivialize => "trivialize",
            Task::Holonomy => "holonomy",
            Task::Sector => "sector",
            Task::Amplitude => "amplitude",
            Task::Classify => "classify",
        }
    }

    pub fn parse(s: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.name() == s)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema_version: u32,
    topology: RawTopology,
    group: RawGroup,
    #[serde(default)]
    sigma: Option<BTreeMap<String, RawSigmaValue>>,
    #[serde(default)]
    fock: RawFock,
    #[serde(default)]
    loops: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    amplitude: Vec<RawAmplitude>,
    #[serde(default)]
    tasks: Option<Vec<Task>>,
    #[serde(default)]
    tolerance: Option<f64>,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    checks: RawChecks,
    #[serde(default)]
    timeout_secs: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTopology {
    builtin: Option<String>,
    n: Option<usize>,
    regions: Option<Vec<String>>,
    #[serde(default)]
    overlaps: Vec<RawOverlap>,
    #[serde(default)]
    triples: Vec<RawTriple>,
    #[serde(default)]
    disjoint: Vec<[String; 2]>,
    base: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawOverlap {
    Pair([String; 2]),
    Component {
        pair: [String; 2],
        component: u32,
    },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawTriple {
    Plain([String; 3]),
    Component {
        regions: [String; 3],
        components: [u32; 3],
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    kind: String,
    dim: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSigmaValue {
    Angle(f64),
    Expr(String),
    Matrix(Vec<Vec<[f64; 2]>>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFock {
    #[serde(default = "default_modes")]
    modes_per_region: usize,
    #[serde(default = "default_charge")]
    charge: usize,
}

impl Default for RawFock {
    fn default() -> Self {
        RawFock { modes_per_region: default_modes(), charge: default_charge() }
    }
}

fn default_modes() -> usize {
    2
}

fn default_charge() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAmplitude {
    name: String,
    p: Vec<String>,
    q: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChecks {
    #[serde(default)]
    random_loops: usize,
}

/// Tolerance per task; unspecified tasks use `default`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub default: f64,
    pub per_task: BTreeMap<Task, f64>,
}

impl Tolerances {
    pub fn get(&self, task: Task) -> f64 {
        self.per_task.get(&task).copied().unwrap_or(self.default)
    }

    /// Replaces every tolerance with `tol`.
    pub fn override_all(&mut self, tol: f64) {
        self.default = tol;
        self.per_task.clear();
    }
}

#[derive(Debug, Clone)]
pub struct AmplitudeSpec {
    pub name: String,
    pub p: PosetPath,
    pub q: PosetPath,
}

/// Validated scenario with defaults applied.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub topology: String,
    pub cover: Cover,
    pub nerve: NerveGraph,
    pub group: GroupKind,
    pub sigma: SigmaMorphism,
    pub modes_per_region: usize,
    pub charge: usize,
    pub loops: Vec<(String, PosetPath)>,
    pub amplitudes: Vec<AmplitudeSpec>,
    pub tasks: Vec<Task>,
    pub tolerances: Tolerances,
    pub seed: Option<u64>,
    pub random_loops: usize,
    pub timeout_secs: u64,
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema { field: field.into(), message: message.into() }
}

pub fn parse_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<ScenarioConfig> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(schema(
            "schema_version",
            format!("unsupported version {} (expected {SCHEMA_VERSION})", raw.schema_version),
        ));
    }
    let (topology, cover) = build_topology(&raw.topology)?;
    let nerve = NerveGraph::new(&cover)?;
    let group = match raw.group.kind.as_str() {
        "u1" => {
            if raw.group.dim.is_some_and(|d| d != 1) {
                return Err(schema("group.dim", "u1 has dimension 1"));
            }
            GroupKind::U1
        }
        "un" => match raw.group.dim {
            Some(n) if n >= 1 => GroupKind::Un(n),
            _ => return Err(schema("group.dim", "un needs a positive dim")),
        },
        other => return Err(schema("group.kind", format!("unknown group '{other}' (expected u1 or un)"))),
    };
    let sigma = build_sigma(raw.sigma.as_ref(), group, &nerve)?;

    if raw.fock.modes_per_region == 0 {
        return Err(schema("fock.modes_per_region", "must be at least 1"));
    }
    if raw.fock.charge == 0 || raw.fock.charge > raw.fock.modes_per_region {
        return Err(schema(
            "fock.charge",
            format!("must lie in 1..={} (modes per region)", raw.fock.modes_per_region),
        ));
    }

    let mut loops = Vec::with_capacity(raw.loops.len());
    for (name, visited) in &raw.loops {
        let field = format!("loops.{name}");
        let l = named_path(&cover, &field, visited)?;
        if !l.is_loop() {
            return Err(schema(field, "a loop must end in the region it starts from"));
        }
        loops.push((name.clone(), l));
    }
    let mut amplitudes = Vec::with_capacity(raw.amplitude.len());
    for (i, a) in raw.amplitude.iter().enumerate() {
        let p = named_path(&cover, &format!("amplitude[{i}].p"), &a.p)?;
        let q = named_path(&cover, &format!("amplitude[{i}].q"), &a.q)?;
        if p.start() != q.start() || p.end() != q.end() {
            return Err(schema(format!("amplitude[{i}]"), "p and q must share start and end regions"));
        }
        amplitudes.push(AmplitudeSpec { name: a.name.clone(), p, q });
    }

    let mut tasks = raw.tasks.clone().unwrap_or_else(|| Task::ALL.to_vec());
    tasks.sort();
    tasks.dedup();

    let default = raw.tolerance.unwrap_or(EQ_TOL);
    check_tolerance("tolerance", default)?;
    let mut per_task = BTreeMap::new();
    for (k, &v) in &raw.tolerances {
        let task = Task::parse(k).ok_or_else(|| schema(format!("tolerances.{k}"), "unknown task"))?;
        check_tolerance(&format!("tolerances.{k}"), v)?;
        per_task.insert(task, v);
    }

    if raw.checks.random_loops > 0 && raw.seed.is_none() {
        return Err(schema("seed", "required when checks.random_loops > 0"));
    }
    let timeout_secs = raw.timeout_secs.unwrap_or(DEFAULT_TIMEOUT_SECS);
    if timeout_secs == 0 {
        return Err(schema("timeout_secs", "must be positive"));
    }

    Ok(ScenarioConfig {
        topology,
        cover,
        nerve,
        group,
        sigma,
        modes_per_region: raw.fock.modes_per_region,
        charge: raw.fock.charge,
        loops,
        amplitudes,
        tasks,
        tolerances: Tolerances { default, per_task },
        seed: raw.seed,
        random_loops: raw.checks.random_loops,
        timeout_secs,
    })
}

fn check_tolerance(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(schema(field, "tolerance must be positive and finite"))
    }
}

fn build_topology(t: &RawTopology) -> Result<(String, Cover)> {
    match (&t.builtin, &t.regions) {
        (Some(_), Some(_)) => Err(schema("topology", "give either builtin or regions, not both")),
        (None, None) => Err(schema("topology", "missing builtin or regions")),
        (Some(name), None) => {
            if !t.overlaps.is_empty() || !t.triples.is_empty() || !t.disjoint.is_empty() || t.base.is_some() {
                return Err(schema("topology", "builtin topologies take no explicit overlaps, triples, disjoint or base"));
            }
            let which = match (name.as_str(), t.n) {
                ("circle", Some(n)) => Builtin::Circle(n),
                (_, Some(_)) => return Err(schema("topology.n", "only the circle takes n")),
                (other, None) => other.parse::<Builtin>().map_err(|_| {
                    schema("topology.builtin", format!("unknown builtin topology '{other}'"))
                })?,
            };
            let cover = builtin_cover(which).map_err(|e| schema("topology", e.to_string()))?;
            Ok((which.name(), cover))
        }
        (None, Some(names)) => {
            if t.n.is_some() {
                return Err(schema("topology.n", "only the circle builtin takes n"));
            }
            let id = |field: String, s: &str| -> Result<RegionId> {
                names
                    .iter()
                    .position(|n| n == s)
                    .map(RegionId)
                    .ok_or_else(|| schema(field, format!("unknown region '{s}'")))
            };
            let mut overlaps = Vec::new();
            for (i, o) in t.overlaps.iter().enumerate() {
                let (pair, c) = match o {
                    RawOverlap::Pair(p) => (p, 0),
                    RawOverlap::Component { pair, component } => (pair, *component),
                };
                let f = format!("topology.overlaps[{i}]");
                overlaps.push((id(f.clone(), &pair[0])?, id(f, &pair[1])?, c));
            }
            let mut triples = Vec::new();
            for (i, tr) in t.triples.iter().enumerate() {
                let (regions, components) = match tr {
                    RawTriple::Plain(r) => (r, [0, 0, 0]),
                    RawTriple::Component { regions, components } => (regions, *components),
                };
                let f = format!("topology.triples[{i}]");
                triples.push(Triple {
                    regions: [id(f.clone(), &regions[0])?, id(f.clone(), &regions[1])?, id(f, &regions[2])?],
                    components,
                });
            }
            let mut disjoint = Vec::new();
            for (i, d) in t.disjoint.iter().enumerate() {
                let f = format!("topology.disjoint[{i}]");
                disjoint.push((id(f.clone(), &d[0])?, id(f, &d[1])?));
            }
            let base = match &t.base {
                Some(b) => id("topology.base".into(), b)?,
                None => RegionId(0),
            };
            let cover = Cover::new(names.clone(), overlaps, triples, disjoint, base)
                .map_err(|e| schema("topology", e.to_string()))?;
            Ok(("explicit".into(), cover))
        }
    }
}

/// Parses radians (`0.5`) or rational multiples of pi (`pi/3`, `-2pi/3`, `3*pi/4`).
pub fn parse_angle(s: &str) -> Option<f64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(pos) = t.find("pi") else {
        return t.parse::<f64>().ok().filter(|x| x.is_finite());
    };
    let coef_str = t[..pos].trim_end_matches('*');
    let coef = match coef_str {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    let rest = &t[pos + 2..];
    let denom = match rest {
        "" => 1.0,
        r => r.strip_prefix('/')?.parse::<f64>().ok().filter(|d| *d != 0.0)?,
    };
    Some(coef * PI / denom)
}

fn sigma_value(field: &str, v: &RawSigmaValue, group: GroupKind) -> Result<GroupValue> {
    match (v, group) {
        (RawSigmaValue::Angle(a), GroupKind::U1) => Ok(GroupValue::phase(*a)),
        (RawSigmaValue::Expr(s), GroupKind::U1) => parse_angle(s)
            .map(GroupValue::phase)
            .ok_or_else(|| schema(field, format!("cannot parse angle '{s}'"))),
        (RawSigmaValue::Matrix(rows), GroupKind::Un(n)) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(schema(field, format!("expected a {n}x{n} matrix of [re, im] pairs")));
            }
            let m = CMatrix::from_fn(n, n, |r, c| Complex64::new(rows[r][c][0], rows[r][c][1]));
            UnitaryMatrix::with_tolerance(m, INPUT_UNITARY_TOL)
                .map(GroupValue::Matrix)
                .map_err(|e| schema(field, e.to_string()))
        }
        (RawSigmaValue::Angle(a), GroupKind::Un(1)) => {
            Ok(GroupValue::Matrix(UnitaryMatrix::with_tolerance(
                CMatrix::from_element(1, 1, Complex64::from_polar(1.0, *a)),
                INPUT_UNITARY_TOL,
            )?))
        }
        (_, GroupKind::U1) => Err(schema(field, "u1 values are angles")),
        _ => Err(schema(field, "un values are matrices given as rows of [re, im] pairs")),
    }
}

fn build_sigma(
    raw: Option<&BTreeMap<String, RawSigmaValue>>,
    group: GroupKind,
    nerve: &NerveGraph,
) -> Result<SigmaMorphism> {
    let Some(raw) = raw else {
        return Ok(SigmaMorphism::trivial(group));
    };
    let pres = nerve.presentation();
    let mut assignment = BTreeMap::new();
    for (name, v) in raw {
        let field = format!("sigma.{name}");
        if pres.generator_index(name).is_none() {
            return Err(schema(
                field,
                format!("unknown generator (presentation has {})", pres.generators.join(", ")),
            ));
        }
        assignment.insert(name.clone(), sigma_value(&field, v, group)?);
    }
    let covers = |names: &[String]| names.iter().all(|g| assignment.contains_key(g));
    if !covers(&pres.generators) && !covers(&pres.reduced().names) {
        let missing: Vec<&str> = pres
            .reduced()
            .names
            .iter()
            .filter(|g| !assignment.contains_key(*g))
            .map(String::as_str)
            .collect();
        return Err(schema("sigma", format!("missing generator(s): {}", missing.join(", "))));
    }
    SigmaMorphism::new(group, assignment)
}

fn named_path(cover: &Cover, field: &str, visited: &[String]) -> Result<PosetPath> {
    if visited.is_empty() {
        return Err(schema(field, "a path must visit at least one region"));
    }
    for (i, v) in visited.iter().enumerate() {
        let name = v.rsplit_once(':').map_or(v.as_str(), |(n, _)| n).trim();
        if cover.region(name).is_err() {
            return Err(schema(format!("{field}[{i}]"), format!("unknown region '{name}'")));
        }
    }
    let refs: Vec<&str> = visited.iter().map(String::as_str).collect();
    approximate_named(cover, &refs).map_err(|e| schema(field, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
[topology]
builtin = "annulus"
[group]
kind = "u1"
[sigma]
g0 = 0.0
"#;

    #[test]
    fn minimal_config_defaults() {
        let c = parse_scenario_str(MINIMAL).unwrap();
        assert_eq!(c.group, GroupKind::U1);
        assert_eq!((c.modes_per_region, c.charge), (2, 1));
        assert_eq!(c.tasks, Task::ALL.to_vec());
        assert_eq!(c.timeout_secs, DEFAULT_TIMEOUT_SECS);
        assert_eq!(c.tolerances.get(Task::Sector), EQ_TOL);
    }

    #[test]
    fn angles() {
        let close = |s: &str, v: f64| (parse_angle(s).unwrap() - v).abs() < 1e-15;
        assert!(close("pi/3", PI / 3.0));
        assert!(close("-2pi/3", -2.0 * PI / 3.0));
        assert!(close("3*pi/4", 0.75 * PI));
        assert!(close("pi", PI));
        assert!(close("-pi", -PI));
        assert!(close("0.25", 0.25));
        assert!(parse_angle("pi/0").is_none());
        assert!(parse_angle("tau").is_none());
    }

    #[test]
    fn unknown_region_in_loop_is_named() {
        let text = format!("{MINIMAL}\n[loops]\nbad = [\"i0\", \"q7\"]\n");
        let err = parse_scenario_str(&text).unwrap_err();
        assert_eq!(err, schema("loops.bad[1]", "unknown region 'q7'"));
    }

    #[test]
    fn unknown_field_rejected() {
        let text = MINIMAL.replace("[group]", "colour = 3\n[group]");
        assert!(matches!(parse_scenario_str(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn unknown_builtin() {
        let text = MINIMAL.replace("annulus", "klein_bottle");
        let err = parse_scenario_str(&text).unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field == "topology.builtin"));
    }

    #[test]
    fn non_unitary_matrix_rejected() {
        let text = r#"
schema_version = 1
[topology]
builtin = "circle"
n = 4
[group]
kind = "un"
dim = 2
[sigma]
g0 = [[[1.0, 0.0], [0.1, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
"#;
        let err = parse_scenario_str(text).unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field == "sigma.g0"));
    }

    #[test]
    fn explicit_topology_with_components() {
        let text = r#"
schema_version = 1
tasks = ["check", "holonomy"]
[topology]
regions = ["west", "east"]
overlaps = [["west", "east"], { pair = ["east", "west"], component = 1 }]
base = "west"
[group]
kind = "u1"
[sigma]
g0 = "pi/2"
[loops]
lap = ["west", "east:1", "west"]
"#;
        let c = parse_scenario_str(text).unwrap();
        assert_eq!(c.cover.overlaps().len(), 2);
        assert_eq!(c.tasks, vec![Task::Check, Task::Holonomy]);
        assert_eq!(c.loops[0].1.steps()[0].component, 1);
    }

    #[test]
    fn seed_required_for_random_checks() {
        let text = format!("{MINIMAL}\n[checks]\nrandom_loops = 5\n");
        let err = parse_scenario_str(&text).unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field == "seed"));
    }

    #[test]
    fn missing_generator_reported() {
        let text = MINIMAL.replace("annulus", "figure_eight");
        let err = parse_scenario_str(&text).unwrap_err();
        assert_eq!(err, schema("sigma", "missing generator(s): g1"));
    }
}

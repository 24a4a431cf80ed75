//! Task pipeline: check -> trivialize -> holonomy -> sector -> amplitude -> classify.

use std::sync::mpsc;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use num_complex::Complex64;

use super::config::{ScenarioConfig, Task};
use super::report::{Report, ScenarioSummary, Status, TaskReport, Value};
use crate::cocycle::{
    check_cocycle_with, holonomy, lift_potential, transition_cocycle, trivialize_with,
    validate_sigma_with, TransitionCocycle, Trivialization,
};
use crate::cover::{RegionId, Triple};
use crate::error::{Error, Result};
use crate::fock::{FockSpace, MAX_MODES};
use crate::group::{max_norm, GroupKind, GroupValue, Phase};
use crate::nerve::NerveGraph;
use crate::path::{path_compose, path_reverse, PosetPath, Step};
use crate::random::{
    perturb_homotopic, random_loop, random_path, random_path_pair, seeded, Rng64,
};
use crate::sectors::{
    classify_with, rho_holonomy, rho_holonomy_via_log, rho_layer_transporter, telescoped_op,
    topological_component_with, transition_amplitude, twisted_transporter,
    window_cocycle_residual, z1, z_path, SectorTransporter,
};

const RANDOM_LOOP_LEN: usize = 6;
const RANDOM_MOVES: usize = 8;

/// Runs the requested tasks in pipeline order.
///
/// Tasks run on worker threads bounded by the configured timeout. A task
/// whose `check` dependency did not pass is skipped. Errors inside a task
/// mark it failed; only a capacity violation aborts the whole run.
pub fn run(config: &ScenarioConfig) -> Result<Report> {
    check_capacity(config)?;
    let shared = Arc::new(config.clone());
    let mut reports: Vec<TaskReport> = Vec::with_capacity(config.tasks.len());
    for &task in &config.tasks {
        let tol = config.tolerances.get(task);
        let check_failed = task != Task::Check
            && reports.iter().any(|r| r.task == Task::Check.name() && r.status != Status::Pass);
        let report = if check_failed {
            TaskReport::skipped(task.name(), tol, Task::Check.name())
        } else {
            run_with_timeout(&shared, task)
        };
        reports.push(report);
    }
    Ok(Report::new(summary(config), reports))
}

/// Runs a single task without a timeout.
pub fn run_task(config: &ScenarioConfig, task: Task) -> TaskReport {
    let tol = config.tolerances.get(task);
    match execute(config, task, tol) {
        Ok(r) => r.finish(),
        Err(e) => TaskReport::failed(task.name(), tol, &e),
    }
}

fn run_with_timeout(config: &Arc<ScenarioConfig>, task: Task) -> TaskReport {
    let tol = config.tolerances.get(task);
    let secs = config.timeout_secs;
    let (tx, rx) = mpsc::channel();
    let cfg = Arc::clone(config);
    let spawned = thread::Builder::new()
        .name(format!("task-{}", task.name()))
        .spawn(move || {
            let _ = tx.send(run_task(&cfg, task));
        });
    if let Err(e) = spawned {
        return TaskReport::failed(task.name(), tol, &Error::Io(e.to_string()));
    }
    match rx.recv_timeout(Duration::from_secs(secs)) {
        Ok(r) => r,
        Err(mpsc::RecvTimeoutError::Timeout) => {
            TaskReport::failed(task.name(), tol, &Error::Timeout { task: task.name().into(), secs })
        }
        Err(mpsc::RecvTimeoutError::Disconnected) => TaskReport::failed(
            task.name(),
            tol,
            &Error::Io(format!("task '{}' panicked", task.name())),
        ),
    }
}

fn needs_fock(task: Task) -> bool {
    matches!(task, Task::Sector | Task::Amplitude | Task::Classify)
}

fn check_capacity(config: &ScenarioConfig) -> Result<()> {
    if config.group != GroupKind::U1 || !config.tasks.iter().any(|&t| needs_fock(t)) {
        return Ok(());
    }
    let modes = config.cover.num_regions() * config.modes_per_region;
    if modes > MAX_MODES {
        return Err(Error::Capacity { modes, max: MAX_MODES });
    }
    Ok(())
}

fn summary(c: &ScenarioConfig) -> ScenarioSummary {
    let pres = c.nerve.presentation();
    ScenarioSummary {
        topology: c.topology.clone(),
        regions: c.cover.names().to_vec(),
        overlaps: c.cover.overlaps().len(),
        triples: c.cover.triples().len(),
        group: c.group.to_string(),
        pi1: pres.structure().to_string(),
        generators: pres.generators.clone(),
        reduced_generators: pres.reduced().names.clone(),
        modes_per_region: c.modes_per_region,
        charge: c.charge,
        seed: c.seed,
    }
}

/// Independent stream per task, so any subset of tasks reproduces the full run.
fn task_rng(config: &ScenarioConfig, task: Task) -> Option<Rng64> {
    let seed = config.seed?;
    (config.random_loops > 0).then(|| seeded(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(task as u64 + 1))))
}

fn execute(c: &ScenarioConfig, task: Task, tol: f64) -> Result<TaskReport> {
    let mut r = TaskReport::new(task.name(), tol);
    let mut rng = task_rng(c, task);
    match task {
        Task::Check => check_task(c, &mut r, rng.as_mut())?,
        Task::Trivialize => trivialize_task(c, &mut r)?,
        Task::Holonomy => holonomy_task(c, &mut r, rng.as_mut())?,
        Task::Sector => sector_task(c, &mut r, rng.as_mut())?,
        Task::Amplitude => amplitude_task(c, &mut r, rng.as_mut())?,
        Task::Classify => classify_task(c, &mut r)?,
    }
    Ok(r)
}

fn dist(a: &GroupValue, b: &GroupValue) -> Result<f64> {
    a.distance(b)
}

fn sigma_of(c: &ScenarioConfig, l: &PosetPath) -> Result<GroupValue> {
    c.sigma.evaluate(c.nerve.presentation(), &c.nerve.path_word(l)?)
}

/// Reduced generator loops, by generator name.
fn generator_loops(nerve: &NerveGraph) -> Vec<(String, PosetPath)> {
    let reduced = nerve.presentation().reduced();
    reduced
        .names
        .iter()
        .zip(&reduced.survivors)
        .map(|(name, &g)| (name.clone(), nerve.generator_loop(g)))
        .collect()
}

/// Loop with word `a b a^-1 b^-1` for the first two reduced generators.
fn commutator_loop(nerve: &NerveGraph) -> Option<(String, PosetPath)> {
    let gens = generator_loops(nerve);
    let [(na, la), (nb, lb), ..] = gens.as_slice() else { return None };
    // Path words put later steps on the left, so traverse b^-1, a^-1, b, a.
    let mut p = path_reverse(lb);
    for q in [path_reverse(la), lb.clone(), la.clone()] {
        p = path_compose(&p, &q).expect("based loops");
    }
    Some((format!("{na} {nb} {na}^-1 {nb}^-1"), p))
}

fn commutator_direct(a: &GroupValue, b: &GroupValue) -> Result<GroupValue> {
    a.compose(b)?.compose(&a.inverse())?.compose(&b.inverse())
}

fn describe(c: &ScenarioConfig, l: &PosetPath) -> String {
    l.display(&c.cover).to_string()
}

fn check_task(c: &ScenarioConfig, r: &mut TaskReport, rng: Option<&mut Rng64>) -> Result<()> {
    let tol = r.tolerance;
    let pres = c.nerve.presentation();
    let sig = validate_sigma_with(pres, &c.sigma, tol)?;
    r.check("sigma relations", sig.max_residual);
    r.value("pi_1", Value::text(pres.structure().to_string()));
    r.value("relations", Value::Integers { values: vec![pres.relations.len() as i64] });
    if !sig.is_ok() {
        return Ok(());
    }
    let g = transition_cocycle(&c.sigma, &c.nerve)?;
    let rep = check_cocycle_with(&g, &c.cover, tol)?;
    r.check("cocycle identity", rep.max_residual);
    if !rep.failing.is_empty() {
        r.value("failing triples", Value::Integers { values: rep.failing.iter().map(|&i| i as i64).collect() });
    }
    if let Some(rng) = rng {
        let mut sigma_res: f64 = 0.0;
        let mut homotopy_res: f64 = 0.0;
        for _ in 0..c.random_loops {
            let l = random_loop(rng, &c.nerve, RANDOM_LOOP_LEN);
            let m = perturb_homotopic(rng, &c.nerve, &l, RANDOM_MOVES);
            let h = holonomy(&g, &l)?;
            sigma_res = sigma_res.max(dist(&h, &sigma_of(c, &l)?)?);
            homotopy_res = homotopy_res.max(dist(&h, &holonomy(&g, &m)?)?);
        }
        r.check(format!("random loops: holonomy = sigma ({})", c.random_loops), sigma_res);
        r.check(format!("random loops: homotopy invariance ({})", c.random_loops), homotopy_res);
    }
    Ok(())
}

fn trivialize_task(c: &ScenarioConfig, r: &mut TaskReport) -> Result<()> {
    let g = transition_cocycle(&c.sigma, &c.nerve)?;
    match trivialize_with(&g, &c.nerve, r.tolerance)? {
        Trivialization::Coboundary(lambda) => {
            r.value("result", Value::text("coboundary"));
            let rebuilt = TransitionCocycle::coboundary(&c.cover, &lambda)?;
            let mut res: f64 = 0.0;
            for (x, y) in rebuilt.edge_values().iter().zip(g.edge_values()) {
                res = res.max(dist(x, y)?);
            }
            r.check("coboundary reconstruction", res);
            for (reg, l) in c.cover.regions().zip(&lambda) {
                r.value(format!("lambda {}", c.cover.name(reg)), Value::from_group(l));
            }
        }
        Trivialization::Witness(w) => {
            r.value("result", Value::text("witness"));
            r.value("witness loop", Value::text(describe(c, &w.path)));
            r.value("witness holonomy", Value::from_group(&w.holonomy));
            r.check("witness holonomy recomputed", dist(&holonomy(&g, &w.path)?, &w.holonomy)?);
            r.check("witness holonomy = sigma", dist(&w.holonomy, &sigma_of(c, &w.path)?)?);
            let id = c.group.identity();
            r.value("witness distance from identity", Value::Real { value: dist(&w.holonomy, &id)? });
        }
    }
    Ok(())
}

fn named_loops(c: &ScenarioConfig) -> Vec<(String, PosetPath)> {
    let mut loops: Vec<(String, PosetPath)> =
        generator_loops(&c.nerve).into_iter().map(|(n, l)| (format!("generator {n}"), l)).collect();
    loops.extend(c.loops.iter().map(|(n, l)| (format!("loop {n}"), l.clone())));
    loops
}

fn holonomy_task(c: &ScenarioConfig, r: &mut TaskReport, rng: Option<&mut Rng64>) -> Result<()> {
    let g = transition_cocycle(&c.sigma, &c.nerve)?;
    let potential = if c.group == GroupKind::U1 { Some(lift_potential(&g, &c.nerve)?) } else { None };
    let mut sigma_res: f64 = 0.0;
    let mut potential_res: f64 = 0.0;
    let loops = named_loops(c);
    for (name, l) in &loops {
        let h = holonomy(&g, l)?;
        sigma_res = sigma_res.max(dist(&h, &sigma_of(c, l)?)?);
        if let Some(pot) = &potential {
            let z = Complex64::from_polar(1.0, pot.path_angle(l)?);
            potential_res = potential_res.max((z - h.to_complex().expect("U(1)")).norm());
        }
        r.value(name.clone(), Value::from_group(&h));
    }
    r.check("holonomy = sigma(word)", sigma_res);
    if potential.is_some() {
        r.check("exp(i angle of lifted potential) = holonomy", potential_res);
    }
    if let Some((name, l)) = commutator_loop(&c.nerve) {
        let h = holonomy(&g, &l)?;
        let vals = c.sigma.reduced_values(c.nerve.presentation())?;
        let direct = commutator_direct(&vals[0], &vals[1])?;
        r.check("commutator holonomy = direct word evaluation", dist(&h, &direct)?);
        r.value(format!("commutator {name}"), Value::from_group(&h));
        r.value(
            "commutator distance from identity",
            Value::Real { value: dist(&h, &c.group.identity())? },
        );
    }
    if let Some(rng) = rng {
        let mut res: f64 = 0.0;
        for _ in 0..c.random_loops {
            let l = random_loop(rng, &c.nerve, RANDOM_LOOP_LEN);
            let m = perturb_homotopic(rng, &c.nerve, &l, RANDOM_MOVES);
            if c.nerve.loop_class(&l)? != c.nerve.loop_class(&m)? {
                res = res.max(1.0);
            }
            res = res.max(dist(&holonomy(&g, &l)?, &holonomy(&g, &m)?)?);
        }
        r.check(format!("random loops: homotopic loops agree ({})", c.random_loops), res);
    }
    Ok(())
}

fn pair_component(t: &Triple, x: RegionId, y: RegionId) -> u32 {
    t.boundary()
        .iter()
        .find(|&&(a, b, _)| (a, b) == (x, y) || (a, b) == (y, x))
        .map(|&(_, _, comp)| comp)
        .expect("pair of the triple")
}

/// Max window residual of `z_{oa} z_{ae} = z_{oe}` over every ordering of every triple.
fn window_cocycle_max(z: &SectorTransporter, c: &ScenarioConfig) -> Result<f64> {
    let mut res: f64 = 0.0;
    for t in c.cover.triples() {
        let [p, q, s] = t.regions;
        for (e, a, o) in [(p, q, s), (p, s, q), (q, p, s), (q, s, p), (s, p, q), (s, q, p)] {
            let ae = Step::new(e, a, pair_component(t, e, a));
            let oa = Step::new(a, o, pair_component(t, a, o));
            let oe = Step::new(e, o, pair_component(t, e, o));
            res = res.max(window_cocycle_residual(z, ae, oa, oe)?);
        }
    }
    for o in c.cover.overlaps() {
        let s = Step::new(o.lo, o.hi, o.component);
        res = res.max(window_cocycle_residual(z, Step::stay(o.lo), s, s)?);
        res = res.max(window_cocycle_residual(z, s, Step::stay(o.hi), s)?);
    }
    Ok(res)
}

fn fock_transporters(c: &ScenarioConfig) -> Result<(SectorTransporter, SectorTransporter)> {
    let fock = FockSpace::for_cover(&c.cover, c.modes_per_region)?;
    let untwisted = z1(&fock, &c.cover, c.charge)?;
    let twisted = twisted_transporter(&fock, c.charge, &c.sigma, &c.nerve)?;
    Ok((untwisted, twisted))
}

fn telescoping_residual(z: &SectorTransporter, p: &PosetPath) -> Result<f64> {
    let lhs = z.compress(&z_path(z, p)?)?;
    let rhs = z.compress(&telescoped_op(z, p)?)?;
    Ok(max_norm(&(lhs - rhs)))
}

fn sector_task(c: &ScenarioConfig, r: &mut TaskReport, rng: Option<&mut Rng64>) -> Result<()> {
    let tol = r.tolerance;
    let g = transition_cocycle(&c.sigma, &c.nerve)?;
    let loops = named_loops(c);
    if c.group != GroupKind::U1 {
        let rho = rho_layer_transporter(&c.sigma, &c.nerve)?;
        r.value("layer", Value::text("cocycle layer (rho)"));
        r.value("dimension", Value::Integers { values: vec![rho.dimension() as i64] });
        let mut log_res: f64 = 0.0;
        let mut hol_res: f64 = 0.0;
        let mut table = loops;
        table.extend(commutator_loop(&c.nerve).map(|(n, l)| (format!("commutator {n}"), l)));
        for (name, l) in &table {
            let h = rho_holonomy(&rho, l)?;
            log_res = log_res.max(dist(&h, &rho_holonomy_via_log(&rho, l)?)?);
            hol_res = hol_res.max(dist(&h, &holonomy(&g, l)?)?);
            r.value(format!("rho {name}"), Value::from_group(&h));
        }
        r.check("rho holonomy = cocycle holonomy", hol_res);
        r.check("rho holonomy = ordered exp of step logs", log_res);
        return Ok(());
    }

    let (untwisted, twisted) = fock_transporters(c)?;
    r.value("layer", Value::text("Fock"));
    r.value("window dimension", Value::Integers {
        values: vec![twisted.window().map_or(0, |w| w.dim()) as i64],
    });
    r.check("window cocycle z1", window_cocycle_max(&untwisted, c)?);
    r.check("window cocycle z_sigma", window_cocycle_max(&twisted, c)?);

    let mut paths: Vec<PosetPath> = loops.iter().map(|(_, l)| l.clone()).collect();
    if let Some(rng) = rng {
        for _ in 0..c.random_loops {
            let from = RegionId(rand::Rng::gen_range(rng, 0..c.cover.num_regions()));
            paths.push(random_path(rng, &c.nerve, from, RANDOM_LOOP_LEN));
        }
    }
    let mut tele: f64 = 0.0;
    for p in &paths {
        tele = tele.max(telescoping_residual(&untwisted, p)?);
        tele = tele.max(telescoping_residual(&twisted, p)?);
    }
    r.check("telescoping", tele);

    let mut dhr_res: f64 = 0.0;
    let mut twist_res: f64 = 0.0;
    for (name, l) in &loops {
        let one = topological_component_with(&untwisted, l, tol)?;
        dhr_res = dhr_res.max(dist(&one, &GroupValue::phase(0.0))?);
        let comp = topological_component_with(&twisted, l, tol)?;
        twist_res = twist_res.max(dist(&comp, &holonomy(&g, l)?)?);
        r.value(format!("component {name}"), Value::from_group(&comp));
    }
    r.check("z1 loops are trivial", dhr_res);
    r.check("z_sigma loops = sigma", twist_res);
    Ok(())
}

fn amplitude_task(c: &ScenarioConfig, r: &mut TaskReport, rng: Option<&mut Rng64>) -> Result<()> {
    let g = transition_cocycle(&c.sigma, &c.nerve)?;
    let mut pairs: Vec<(String, PosetPath, PosetPath)> =
        c.amplitudes.iter().map(|a| (a.name.clone(), a.p.clone(), a.q.clone())).collect();
    if let Some(rng) = rng {
        for i in 0..c.random_loops {
            let a = RegionId(rand::Rng::gen_range(rng, 0..c.cover.num_regions()));
            let (p, q) = random_path_pair(rng, &c.nerve, a, RANDOM_LOOP_LEN);
            pairs.push((format!("random {i}"), p, q));
        }
    }
    if c.group != GroupKind::U1 {
        let mut res: f64 = 0.0;
        for (name, p, q) in &pairs {
            let l = path_compose(p, &path_reverse(q))?;
            let h = holonomy(&g, &l)?;
            res = res.max(dist(&h, &sigma_of(c, &l)?)?);
            if !name.starts_with("random ") {
                r.value(name.clone(), Value::from_group(&h));
            }
        }
        r.check("cocycle-layer amplitude = sigma(q^-1 p)", res);
        return Ok(());
    }
    let (untwisted, twisted) = fock_transporters(c)?;
    let potential = lift_potential(&g, &c.nerve)?;
    let mut res: f64 = 0.0;
    let mut trivial_res: f64 = 0.0;
    for (name, p, q) in &pairs {
        let amp = transition_amplitude(&twisted, q, p)?;
        let l = path_compose(p, &path_reverse(q))?;
        let oracle = Complex64::from_polar(1.0, potential.path_angle(&l)?);
        res = res.max((amp - oracle).norm());
        let one = transition_amplitude(&untwisted, q, p)?;
        trivial_res = trivial_res.max((one - Complex64::new(1.0, 0.0)).norm());
        if !name.starts_with("random ") {
            r.value(name.clone(), Value::complex(amp));
            r.value(format!("{name} phase"), Value::from_group(&GroupValue::Phase(Phase::from_complex(amp))));
        }
    }
    r.check(format!("amplitude = exp(i loop angle) ({} pairs)", pairs.len()), res);
    r.check("untwisted amplitude = 1", trivial_res);
    Ok(())
}

fn classify_task(c: &ScenarioConfig, r: &mut TaskReport) -> Result<()> {
    let tol = r.tolerance;
    let g = transition_cocycle(&c.sigma, &c.nerve)?;
    let class = if c.group == GroupKind::U1 {
        let (untwisted, twisted) = fock_transporters(c)?;
        let base = classify_with(&untwisted, &c.nerve, tol)?;
        let worst = base
            .generators
            .iter()
            .map(|(_, v)| dist(v, &GroupValue::phase(0.0)))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        r.check("z1 is DHR", worst);
        classify_with(&twisted, &c.nerve, tol)?
    } else {
        classify_with(&rho_layer_transporter(&c.sigma, &c.nerve)?, &c.nerve, tol)?
    };
    let trivial = matches!(trivialize_with(&g, &c.nerve, tol)?, Trivialization::Coboundary(_));
    r.check_with("classification agrees with trivialize (0 = agree)", if trivial == class.dhr { 0.0 } else { 1.0 }, 0.0);
    r.value("sector", Value::text(if class.dhr { "DHR" } else { "topological (non-DHR)" }));
    r.value("dhr", Value::Flag { value: class.dhr });
    r.value("dimension", Value::Integers { values: vec![class.dimension as i64] });
    for (name, v) in &class.generators {
        r.value(format!("component {name}"), Value::from_group(v));
    }
    Ok(())
}

/// Exit status for a run result: 0 pass, 1 task failure, 2 parse or I/O error, 3 capacity.
pub fn exit_code(result: &Result<Report>) -> i32 {
    match result {
        Ok(r) if r.passed => 0,
        Ok(_) => 1,
        Err(e) => error_exit_code(e),
    }
}

pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity { .. } => 3,
        _ => 2,
    }
}


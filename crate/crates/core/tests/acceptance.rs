//! Acceptance criteria, one line per criterion. Exits 1 if any fails.

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;

use abphase_core::cocycle::trivialize_with;
use abphase_core::fock::anticommutator;
use abphase_core::group::max_norm;
use abphase_core::random::{
    perturb_homotopic, random_angle, random_complex_vector, random_loop, random_nontrivial_u1,
    random_path, random_path_pair, random_sigma, random_su2, seeded, Rng64,
};
use abphase_core::scenario::{parse_scenario, run, to_structured};
use abphase_core::sectors::{telescoped_op, window_cocycle_residual};
use abphase_core::*;
use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

type Outcome = Result<String, String>;

fn nerve_of(b: Builtin) -> NerveGraph {
    build_nerve(&builtin_cover(b).unwrap()).unwrap()
}

fn fail_if(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Err(msg)
    } else {
        Ok(())
    }
}

fn random_gauge(rng: &mut Rng64, cover: &Cover, kind: GroupKind) -> Vec<GroupValue> {
    cover
        .regions()
        .map(|_| match kind {
            GroupKind::Un(2) => GroupValue::Matrix(random_su2(rng)),
            _ => GroupValue::phase(random_angle(rng)),
        })
        .collect()
}

fn sigma_on(nerve: &NerveGraph, sigma: &SigmaMorphism, l: &PosetPath) -> GroupValue {
    sigma.evaluate(nerve.presentation(), &nerve.path_word(l).unwrap()).unwrap()
}

fn c1_cocycle_law() -> Outcome {
    let mut rng = seeded(101);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for b in Builtin::all() {
        let nerve = nerve_of(b);
        for kind in [GroupKind::U1, GroupKind::Un(2)] {
            for _ in 0..20 {
                let sigma = random_sigma(&mut rng, &nerve, kind);
                let g = transition_cocycle(&sigma, &nerve).unwrap();
                let mu = random_gauge(&mut rng, nerve.cover(), kind);
                let h = g.gauge_transform(&mu).unwrap();
                for c in [&g, &h] {
                    worst = worst.max(check_cocycle(c, nerve.cover()).unwrap().max_residual);
                }
                count += 1;
            }
        }
    }
    fail_if(worst > 1e-10, format!("max residual {worst:.3e}"))?;
    Ok(format!("{count} morphisms (plus gauge transforms), max residual {worst:.3e} <= 1e-10"))
}

fn c2_holonomy_round_trip() -> Outcome {
    let mut rng = seeded(202);
    let mut worst: f64 = 0.0;
    for b in Builtin::all() {
        let nerve = nerve_of(b);
        for kind in [GroupKind::U1, GroupKind::Un(2)] {
            for _ in 0..5 {
                let sigma = random_sigma(&mut rng, &nerve, kind);
                let g = transition_cocycle(&sigma, &nerve).unwrap();
                let raw = sigma.raw_values(nerve.presentation()).unwrap();
                for (k, &e) in nerve.non_tree_edges().iter().enumerate() {
                    let h = holonomy(&g, &nerve.edge_loop(e)).unwrap();
                    worst = worst.max(h.distance(&raw[k]).unwrap());
                }
                let reduced = sigma.reduced_values(nerve.presentation()).unwrap();
                for (k, &gen) in nerve.presentation().reduced().survivors.iter().enumerate() {
                    let h = holonomy(&g, &nerve.generator_loop(gen)).unwrap();
                    worst = worst.max(h.distance(&reduced[k]).unwrap());
                }
            }
        }
    }
    let nerve = nerve_of(Builtin::Annulus);
    let cover = nerve.cover();
    let mut winding_worst: f64 = 0.0;
    for theta in [PI / 7.0, PI / 2.0, 1.0] {
        let sigma =
            SigmaMorphism::on_reduced(nerve.presentation(), vec![GroupValue::phase(theta)], GroupKind::U1).unwrap();
        let g = transition_cocycle(&sigma, &nerve).unwrap();
        for k in -3i32..=3 {
            let mut visited = vec!["i0"];
            let lap: &[&str] = if k >= 0 { &["i1", "i2", "i0"] } else { &["i2", "i1", "i0"] };
            for _ in 0..k.unsigned_abs() {
                visited.extend_from_slice(lap);
            }
            let l = approximate_named(cover, &visited).unwrap();
            let h = holonomy(&g, &l).unwrap();
            winding_worst = winding_worst.max(h.distance(&GroupValue::phase(k as f64 * theta)).unwrap());
        }
    }
    fail_if(worst > 1e-10 || winding_worst > 1e-10, format!("generators {worst:.3e}, windings {winding_worst:.3e}"))?;
    Ok(format!("generator loops {worst:.3e}, annulus windings k=-3..3 {winding_worst:.3e} <= 1e-10"))
}

fn c3_trivialization() -> Outcome {
    let mut rng = seeded(303);
    let covers: Vec<NerveGraph> = Builtin::all().into_iter().map(nerve_of).collect();
    let mut recon: f64 = 0.0;
    for i in 0..50 {
        let nerve = &covers[i % covers.len()];
        let kind = if i % 2 == 0 { GroupKind::U1 } else { GroupKind::Un(2) };
        let lambda = random_gauge(&mut rng, nerve.cover(), kind);
        let g = TransitionCocycle::coboundary(nerve.cover(), &lambda).unwrap();
        match trivialize(&g, nerve).unwrap() {
            Trivialization::Coboundary(l) => {
                let rebuilt = TransitionCocycle::coboundary(nerve.cover(), &l).unwrap();
                for (x, y) in rebuilt.edge_values().iter().zip(g.edge_values()) {
                    recon = recon.max(x.distance(y).unwrap());
                }
            }
            Trivialization::Witness(w) => return Err(format!("coboundary #{i} gave a witness at edge {}", w.edge)),
        }
    }
    let nontrivial: Vec<&NerveGraph> =
        covers.iter().filter(|n| n.presentation().reduced().num_generators() > 0).collect();
    let mut witness: f64 = 0.0;
    for i in 0..50 {
        let nerve = nontrivial[i % nontrivial.len()];
        let sigma = random_nontrivial_u1(&mut rng, nerve).unwrap();
        let g = transition_cocycle(&sigma, nerve).unwrap();
        match trivialize(&g, nerve).unwrap() {
            Trivialization::Witness(w) => {
                let gen = nerve.generator_of_edge(w.edge).ok_or("witness on a tree edge")?;
                let raw = sigma.raw_values(nerve.presentation()).unwrap();
                witness = witness.max(w.holonomy.distance(&raw[gen as usize]).unwrap());
                witness = witness.max(holonomy(&g, &w.path).unwrap().distance(&w.holonomy).unwrap());
                if w.holonomy.is_identity(1e-10) {
                    return Err(format!("witness #{i} has trivial holonomy"));
                }
            }
            Trivialization::Coboundary(_) => return Err(format!("non-trivial sigma #{i} was trivialized")),
        }
    }
    fail_if(recon > 1e-10 || witness > 1e-10, format!("reconstruction {recon:.3e}, witness {witness:.3e}"))?;
    Ok(format!("50 coboundaries recovered ({recon:.3e}), 50 witnesses match sigma ({witness:.3e})"))
}

fn c4_homotopy_invariance() -> Outcome {
    let mut rng = seeded(404);
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for b in Builtin::all() {
        let nerve = nerve_of(b);
        let fock = FockSpace::for_cover(nerve.cover(), 1).unwrap();
        let sigma = random_sigma(&mut rng, &nerve, GroupKind::U1);
        let z = twisted_transporter(&fock, 1, &sigma, &nerve).unwrap();
        for _ in 0..30 {
            let l = random_loop(&mut rng, &nerve, 6);
            let m = perturb_homotopic(&mut rng, &nerve, &l, 10);
            let (cl, cm) = (nerve.loop_class(&l).unwrap(), nerve.loop_class(&m).unwrap());
            if cl != cm || !cl.is_decidable() {
                return Err(format!("{b}: classes differ for {} and {}", l.display(nerve.cover()), m.display(nerve.cover())));
            }
            let (a, c) = (topological_component(&z, &l).unwrap(), topological_component(&z, &m).unwrap());
            worst = worst.max(a.distance(&c).unwrap());
            pairs += 1;
        }
    }
    fail_if(worst > 1e-10, format!("component mismatch {worst:.3e}"))?;
    Ok(format!("{pairs} homotopic pairs: equal classes, components agree within {worst:.3e}"))
}

fn c5_car() -> Outcome {
    let mut rng = seeded(505);
    let fock = FockSpace::for_cover(&builtin_cover(Builtin::Circle(5)).unwrap(), 2).unwrap();
    let k = fock.modes();
    let id = fock.identity();
    let mut mixed: f64 = 0.0;
    let mut pure: f64 = 0.0;
    let mut square: f64 = 0.0;
    for _ in 0..50 {
        let f = random_complex_vector(&mut rng, k);
        let g = random_complex_vector(&mut rng, k);
        let (pf, pg) = (fock.field(&f).unwrap(), fock.field(&g).unwrap());
        let inner = f.dotc(&g);
        mixed = mixed.max(anticommutator(&pf.adjoint(), &pg).distance(&id.scale(inner)));
        pure = pure.max(anticommutator(&pf, &pg).max_abs());
        square = square.max((&pf * &pf).max_abs());
    }
    fail_if(mixed > 1e-12 || pure > 1e-12 || square != 0.0, format!("{mixed:.3e} / {pure:.3e} / {square:e}"))?;
    Ok(format!("K = {k}, 50 pairs: {{psi*, psi}} {mixed:.3e}, {{psi, psi}} {pure:.3e} <= 1e-12, psi^2 = {square}"))
}

fn c6_gluing() -> Outcome {
    let mut rng = seeded(606);
    let mut nested: f64 = 0.0;
    let mut charts_res: f64 = 0.0;
    for (b, m) in [(Builtin::Annulus, 2), (Builtin::Torus, 1)] {
        let nerve = nerve_of(b);
        let cover = nerve.cover();
        let fock = FockSpace::for_cover(cover, m).unwrap();
        let space = fock.one_particle();
        for _ in 0..20 {
            let sigma = random_sigma(&mut rng, &nerve, GroupKind::U1);
            let mu = random_gauge(&mut rng, cover, GroupKind::U1);
            let g = transition_cocycle(&sigma, &nerve).unwrap().gauge_transform(&mu).unwrap();
            let pot = lift_potential(&g, &nerve).unwrap();
            for o in cover.overlaps() {
                let charts = pot.patch_primitives(&[o.lo, o.hi]).map_err(|e| e.to_string())?;
                let step = Step::new(o.lo, o.hi, o.component);
                let a_hat = pot.step_angle(&step).unwrap();
                let mut f = DVector::zeros(space.dim());
                for j in space.modes_of(o.lo) {
                    f[j] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
                let inner = twisted_local_field(&fock, &charts, o.lo, &f).unwrap();
                let outer = chart_field(&fock, &charts, o.hi, &f).unwrap();
                let expected = inner.scale(Complex64::from_polar(1.0, -a_hat));
                nested = nested.max(outer.distance(&expected));

                let v = random_complex_vector(&mut rng, space.dim());
                let section = Section::from_global(&charts, &v);
                let glued = glue_psi_a(&fock, &pot, &charts, &section).map_err(|e| e.to_string())?;
                charts_res = charts_res.max(glued.chart_residual);
            }
        }
    }
    fail_if(nested > 1e-12 || charts_res > 1e-10, format!("nested {nested:.3e}, charts {charts_res:.3e}"))?;
    Ok(format!("nested pairs {nested:.3e} <= 1e-12, chart independence {charts_res:.3e} <= 1e-10"))
}

fn pair_component(t: &Triple, x: RegionId, y: RegionId) -> u32 {
    t.boundary().iter().find(|&&(a, b, _)| (a, b) == (x, y) || (a, b) == (y, x)).unwrap().2
}

fn c7_sector_cocycle() -> Outcome {
    let mut rng = seeded(707);
    let mut window: f64 = 0.0;
    let mut tele: f64 = 0.0;
    for b in Builtin::all() {
        let nerve = nerve_of(b);
        let cover = nerve.cover();
        let fock = FockSpace::for_cover(cover, 1).unwrap();
        let sigma = random_sigma(&mut rng, &nerve, GroupKind::U1);
        let zs = [z1(&fock, cover, 1).unwrap(), twisted_transporter(&fock, 1, &sigma, &nerve).unwrap()];
        for z in &zs {
            for t in cover.triples() {
                let [p, q, s] = t.regions;
                for (e, a, o) in [(p, q, s), (p, s, q), (q, p, s), (q, s, p), (s, p, q), (s, q, p)] {
                    let ae = Step::new(e, a, pair_component(t, e, a));
                    let oa = Step::new(a, o, pair_component(t, a, o));
                    let oe = Step::new(e, o, pair_component(t, e, o));
                    window = window.max(window_cocycle_residual(z, ae, oa, oe).unwrap());
                }
            }
            for _ in 0..30 {
                let from = RegionId(rng.gen_range(0..cover.num_regions()));
                let p = random_path(&mut rng, &nerve, from, 7);
                let lhs = z.compress(&z_path(z, &p).unwrap()).unwrap();
                let rhs = z.compress(&telescoped_op(z, &p).unwrap()).unwrap();
                tele = tele.max(max_norm(&(lhs - rhs)));
            }
        }
    }
    fail_if(window > 1e-10 || tele > 1e-10, format!("window {window:.3e}, telescoping {tele:.3e}"))?;
    Ok(format!("window cocycle {window:.3e}, telescoping on 30 paths per cover {tele:.3e} <= 1e-10"))
}

fn c8_topological_component() -> Outcome {
    let mut rng = seeded(808);
    let mut dhr: f64 = 0.0;
    let mut twisted: f64 = 0.0;
    let mut agree = 0;
    let covers: Vec<NerveGraph> = Builtin::all().into_iter().map(nerve_of).collect();
    for i in 0..40 {
        let nerve = &covers[i % covers.len()];
        let cover = nerve.cover();
        let fock = FockSpace::for_cover(cover, 1).unwrap();
        let sigma = if i % 4 == 3 {
            SigmaMorphism::trivial(GroupKind::U1)
        } else {
            random_sigma(&mut rng, nerve, GroupKind::U1)
        };
        let untwisted = z1(&fock, cover, 1).unwrap();
        let z = twisted_transporter(&fock, 1, &sigma, nerve).unwrap();
        for _ in 0..3 {
            let l = random_loop(&mut rng, nerve, 6);
            dhr = dhr.max(topological_component(&untwisted, &l).unwrap().distance(&GroupValue::phase(0.0)).unwrap());
            let c = topological_component(&z, &l).unwrap();
            twisted = twisted.max(c.distance(&sigma_on(nerve, &sigma, &l)).unwrap());
        }
        let g = transition_cocycle(&sigma, nerve).unwrap();
        let trivial = matches!(trivialize_with(&g, nerve, 1e-10).unwrap(), Trivialization::Coboundary(_));
        let class = classify(&z, nerve).unwrap();
        if class.dhr != trivial {
            return Err(format!("sigma #{i}: classify dhr={} but trivialize coboundary={trivial}", class.dhr));
        }
        agree += 1;
    }
    fail_if(dhr > 1e-10 || twisted > 1e-10, format!("z1 {dhr:.3e}, z_sigma {twisted:.3e}"))?;
    Ok(format!("z1 loops {dhr:.3e}, z_sigma loops vs sigma {twisted:.3e}; classify = trivialize on {agree}/40"))
}

fn c9_amplitude() -> Outcome {
    let mut rng = seeded(909);
    let mut worst: f64 = 0.0;
    let mut trivial: f64 = 0.0;
    let covers: Vec<NerveGraph> = Builtin::all().into_iter().map(nerve_of).collect();
    for i in 0..50 {
        let nerve = &covers[i % covers.len()];
        let cover = nerve.cover();
        let fock = FockSpace::for_cover(cover, 1).unwrap();
        let sigma = random_sigma(&mut rng, nerve, GroupKind::U1);
        let g = transition_cocycle(&sigma, nerve).unwrap();
        let pot = lift_potential(&g, nerve).unwrap();
        let z = twisted_transporter(&fock, 1, &sigma, nerve).unwrap();
        let id = twisted_transporter(&fock, 1, &SigmaMorphism::trivial(GroupKind::U1), nerve).unwrap();
        let a = RegionId(rng.gen_range(0..cover.num_regions()));
        let (p, q) = random_path_pair(&mut rng, nerve, a, 6);
        let l = path_compose(&p, &path_reverse(&q)).unwrap();
        let expected = Complex64::from_polar(1.0, pot.path_angle(&l).unwrap());
        worst = worst.max((transition_amplitude(&z, &q, &p).unwrap() - expected).norm());
        trivial = trivial.max((transition_amplitude(&id, &q, &p).unwrap() - 1.0).norm());
    }
    fail_if(worst > 1e-10 || trivial > 1e-10, format!("amplitude {worst:.3e}, trivial {trivial:.3e}"))?;
    Ok(format!("50 path pairs: |amplitude - exp(i loop integral)| {worst:.3e}, trivial sigma {trivial:.3e} <= 1e-10"))
}

fn scenario_path(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

/// `U' = A(t) U` on [0, 1] by classical Runge-Kutta.
fn rk4_propagator(a: &dyn Fn(f64) -> CMatrix, steps: usize) -> CMatrix {
    let h = 1.0 / steps as f64;
    let mut u = CMatrix::identity(2, 2);
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = a(t) * &u;
        let k2 = a(t + h / 2.0) * (&u + &k1 * Complex64::from(h / 2.0));
        let k3 = a(t + h / 2.0) * (&u + &k2 * Complex64::from(h / 2.0));
        let k4 = a(t + h) * (&u + &k3 * Complex64::from(h));
        u += (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4) * Complex64::from(h / 6.0);
    }
    u
}

fn c10_non_abelian() -> Outcome {
    let config = parse_scenario(&scenario_path("figure_eight_su2.toml")).map_err(|e| e.to_string())?;
    let nerve = &config.nerve;
    let cover = nerve.cover();
    let g = transition_cocycle(&config.sigma, nerve).unwrap();
    let a_loop = approximate_named(cover, &["c", "a1", "a2", "c"]).unwrap();
    let b_loop = approximate_named(cover, &["c", "b1", "b2", "c"]).unwrap();
    // Word a b a^-1 b^-1: later steps act on the left.
    let mut comm = path_reverse(&b_loop);
    for p in [path_reverse(&a_loop), b_loop.clone(), a_loop.clone()] {
        comm = path_compose(&comm, &p).unwrap();
    }
    let sa = config.sigma.get("g0").unwrap().as_matrix().unwrap().matrix().clone();
    let sb = config.sigma.get("g1").unwrap().as_matrix().unwrap().matrix().clone();
    let direct = &sa * &sb * sa.adjoint() * sb.adjoint();
    let h = holonomy(&g, &comm).unwrap();
    let hm = h.as_matrix().unwrap().matrix();
    let word_res = max_norm(&(hm - &direct));
    let off_identity = max_norm(&(hm - CMatrix::identity(2, 2)));
    let rho = rho_layer_transporter(&config.sigma, nerve).unwrap();
    let rho_res = rho_holonomy(&rho, &comm).unwrap().distance(&h).unwrap();

    let x = CMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0].map(Complex64::from)) * Complex64::new(0.0, 1.0);
    let z = CMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0].map(Complex64::from)) * Complex64::new(0.0, 1.0);
    let field = move |t: f64| -> CMatrix { &x * Complex64::from(1.3 * (3.0 * t).cos()) + &z * Complex64::from(0.9 + t * t) };
    let reference = rk4_propagator(&field, 20_000);
    let midpoint = |n: usize| -> f64 {
        let dt = 1.0 / n as f64;
        let steps: Vec<LieValue> = (0..n)
            .map(|k| LieValue::anti_hermitian(field((k as f64 + 0.5) * dt) * Complex64::from(dt)).unwrap())
            .collect();
        let u = path_ordered_exp(&steps).unwrap();
        max_norm(&(u.as_matrix().unwrap().matrix() - &reference))
    };
    let (e3, e4) = (midpoint(1_000), midpoint(10_000));
    let ratio = e3 / e4;
    fail_if(
        word_res > 1e-10 || rho_res > 1e-10 || off_identity < 0.1 || ratio < 10.0,
        format!("word {word_res:.3e}, rho {rho_res:.3e}, off identity {off_identity:.3}, ratio {ratio:.1}"),
    )?;
    Ok(format!(
        "commutator vs word {word_res:.3e}, distance from 1 = {off_identity:.3} >= 0.1; subdivision error {e3:.2e} -> {e4:.2e} (x{ratio:.0})"
    ))
}

fn c11_determinism() -> Outcome {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(scenario_path("")).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().is_some_and(|e| e == "toml") {
            names.push(path);
        }
    }
    names.sort();
    if names.is_empty() {
        return Err("no golden scenarios found".into());
    }
    for path in &names {
        let render = || -> Result<String, String> {
            let config = parse_scenario(path).map_err(|e| e.to_string())?;
            Ok(to_structured(&run(&config).map_err(|e| e.to_string())?))
        };
        let (a, b) = (render()?, render()?);
        if a != b {
            return Err(format!("{} differs between runs", path.display()));
        }
    }
    Ok(format!("{} golden scenarios produce byte-identical structured reports", names.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("cocycle law", c1_cocycle_law),
        ("holonomy round trip", c2_holonomy_round_trip),
        ("trivialization dichotomy", c3_trivialization),
        ("homotopy invariance", c4_homotopy_invariance),
        ("CAR suite", c5_car),
        ("twisted-field gluing", c6_gluing),
        ("sector cocycle and telescoping", c7_sector_cocycle),
        ("topological component", c8_topological_component),
        ("transition amplitude", c9_amplitude),
        ("non-abelian layer", c10_non_abelian),
        ("determinism", c11_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

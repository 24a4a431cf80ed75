use abphase_core::cocycle::check_cocycle;
use abphase_core::fock::anticommutator;
use abphase_core::group::{expm, max_norm, unitary_log};
use abphase_core::random::{
    perturb_homotopic, random_angle, random_complex_vector, random_loop, random_path_pair,
    random_sigma, random_su2, seeded,
};
use abphase_core::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn builtin() -> impl Strategy<Value = Builtin> {
    prop_oneof![
        (3usize..7).prop_map(Builtin::Circle),
        Just(Builtin::Annulus),
        Just(Builtin::Disk),
        Just(Builtin::FigureEight),
        Just(Builtin::Torus),
    ]
}

fn nerve_of(b: Builtin) -> NerveGraph {
    build_nerve(&builtin_cover(b).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn su2_composition_is_associative(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let [a, b, c] = [0; 3].map(|_| GroupValue::Matrix(random_su2(&mut rng)));
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert!(left.distance(&right).unwrap() < 1e-14);
        prop_assert!(a.compose(&a.inverse()).unwrap().is_identity(1e-14));
    }

    #[test]
    fn phase_composition_wraps(x in -10.0f64..10.0, y in -10.0f64..10.0) {
        let p = Phase::new(x).compose(Phase::new(y));
        prop_assert!(p.angle() > -std::f64::consts::PI && p.angle() <= std::f64::consts::PI);
        let z = Complex64::from_polar(1.0, x + y);
        prop_assert!((p.to_complex() - z).norm() < 1e-12);
    }

    #[test]
    fn log_inverts_exp(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let u = random_su2(&mut rng);
        let LieValue::Matrix(x) = unitary_log(&u).unwrap() else { unreachable!() };
        prop_assert!(max_norm(&(&x + x.adjoint())) < 1e-12);
        prop_assert!(max_norm(&(expm(&x) - u.matrix())) < 1e-12);
    }

    #[test]
    fn cocycle_identity_survives_gauge(b in builtin(), seed in any::<u64>(), su2 in any::<bool>()) {
        let mut rng = seeded(seed);
        let nerve = nerve_of(b);
        let kind = if su2 { GroupKind::Un(2) } else { GroupKind::U1 };
        let sigma = random_sigma(&mut rng, &nerve, kind);
        let g = transition_cocycle(&sigma, &nerve).unwrap();
        let mu: Vec<GroupValue> = nerve.cover().regions().map(|_| {
            if su2 { GroupValue::Matrix(random_su2(&mut rng)) } else { GroupValue::phase(random_angle(&mut rng)) }
        }).collect();
        let h = g.gauge_transform(&mu).unwrap();
        prop_assert!(check_cocycle(&h, nerve.cover()).unwrap().max_residual < 1e-10);
        // Holonomy at the base transforms by conjugation.
        let l = random_loop(&mut rng, &nerve, 6);
        let base = mu[nerve.base().0].clone();
        let expected = base.compose(&holonomy(&g, &l).unwrap()).unwrap().compose(&base.inverse()).unwrap();
        prop_assert!(holonomy(&h, &l).unwrap().distance(&expected).unwrap() < 1e-10);
    }

    #[test]
    fn holonomy_is_a_homotopy_invariant(b in builtin(), seed in any::<u64>(), moves in 1usize..20) {
        let mut rng = seeded(seed);
        let nerve = nerve_of(b);
        let sigma = random_sigma(&mut rng, &nerve, GroupKind::Un(2));
        let g = transition_cocycle(&sigma, &nerve).unwrap();
        let l = random_loop(&mut rng, &nerve, 8);
        let m = perturb_homotopic(&mut rng, &nerve, &l, moves);
        prop_assert_eq!(nerve.loop_class(&l).unwrap(), nerve.loop_class(&m).unwrap());
        prop_assert!(holonomy(&g, &l).unwrap().distance(&holonomy(&g, &m).unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn holonomy_matches_sigma_of_the_class(b in builtin(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let nerve = nerve_of(b);
        let sigma = random_sigma(&mut rng, &nerve, GroupKind::U1);
        let g = transition_cocycle(&sigma, &nerve).unwrap();
        let l = random_loop(&mut rng, &nerve, 8);
        let expected = sigma.evaluate(nerve.presentation(), &nerve.path_word(&l).unwrap()).unwrap();
        prop_assert!(holonomy(&g, &l).unwrap().distance(&expected).unwrap() < 1e-10);
        let pot = lift_potential(&g, &nerve).unwrap();
        let via_angles = GroupValue::phase(pot.path_angle(&l).unwrap());
        prop_assert!(via_angles.distance(&expected).unwrap() < 1e-10);
    }

    #[test]
    fn loop_composition_multiplies_holonomy(b in builtin(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let nerve = nerve_of(b);
        let sigma = random_sigma(&mut rng, &nerve, GroupKind::Un(2));
        let g = transition_cocycle(&sigma, &nerve).unwrap();
        let (p, q) = (random_loop(&mut rng, &nerve, 5), random_loop(&mut rng, &nerve, 5));
        let pq = path_compose(&p, &q).unwrap();
        let expected = holonomy(&g, &q).unwrap().compose(&holonomy(&g, &p).unwrap()).unwrap();
        prop_assert!(holonomy(&g, &pq).unwrap().distance(&expected).unwrap() < 1e-10);
        let back = holonomy(&g, &path_reverse(&p)).unwrap();
        prop_assert!(back.distance(&holonomy(&g, &p).unwrap().inverse()).unwrap() < 1e-10);
    }

    #[test]
    fn car_relations(seed in any::<u64>(), m in 1usize..3) {
        let mut rng = seeded(seed);
        let fock = FockSpace::for_cover(&builtin_cover(Builtin::Circle(4)).unwrap(), m).unwrap();
        let k = fock.modes();
        let (f, g) = (random_complex_vector(&mut rng, k), random_complex_vector(&mut rng, k));
        let (pf, pg) = (fock.field(&f).unwrap(), fock.field(&g).unwrap());
        let id = fock.identity().scale(f.dotc(&g));
        prop_assert!(anticommutator(&pf.adjoint(), &pg).distance(&id) < 1e-12);
        prop_assert!(anticommutator(&pf, &pg).max_abs() < 1e-12);
        prop_assert_eq!((&pf * &pf).max_abs(), 0.0);
        prop_assert_eq!(pf.grade(), Grade::Definite(1));
    }

    #[test]
    fn amplitude_equals_loop_phase(b in builtin(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let nerve = nerve_of(b);
        let cover = nerve.cover();
        let fock = FockSpace::for_cover(cover, 1).unwrap();
        let sigma = random_sigma(&mut rng, &nerve, GroupKind::U1);
        let z = twisted_transporter(&fock, 1, &sigma, &nerve).unwrap();
        let g = transition_cocycle(&sigma, &nerve).unwrap();
        let a = RegionId(rand::Rng::gen_range(&mut rng, 0..cover.num_regions()));
        let (p, q) = random_path_pair(&mut rng, &nerve, a, 5);
        let loop_pq = path_compose(&p, &path_reverse(&q)).unwrap();
        let expected = holonomy(&g, &loop_pq).unwrap().to_complex().unwrap();
        let amp = transition_amplitude(&z, &q, &p).unwrap();
        prop_assert!((amp - expected).norm() < 1e-10);
        // Swapping the paths conjugates the amplitude.
        prop_assert!((transition_amplitude(&z, &p, &q).unwrap() - amp.conj()).norm() < 1e-10);
    }

    #[test]
    fn classification_is_sound(b in builtin(), seed in any::<u64>(), trivial in any::<bool>()) {
        let mut rng = seeded(seed);
        let nerve = nerve_of(b);
        let fock = FockSpace::for_cover(nerve.cover(), 1).unwrap();
        let sigma = if trivial {
            SigmaMorphism::trivial(GroupKind::U1)
        } else {
            random_sigma(&mut rng, &nerve, GroupKind::U1)
        };
        let z = twisted_transporter(&fock, 1, &sigma, &nerve).unwrap();
        let class = classify(&z, &nerve).unwrap();
        let reduced = sigma.reduced_values(nerve.presentation()).unwrap();
        let sigma_trivial = reduced.iter().all(|v| v.is_identity(1e-10));
        prop_assert_eq!(class.dhr, sigma_trivial);
        for ((_, c), s) in class.generators.iter().zip(&reduced) {
            prop_assert!(c.distance(s).unwrap() < 1e-10);
        }
        let untwisted = z1(&fock, nerve.cover(), 1).unwrap();
        prop_assert!(classify(&untwisted, &nerve).unwrap().dhr);
    }

    #[test]
    fn rational_pi_angles_parse(num in -12i64..12, den in 1i64..12) {
        let text = format!("{num}pi/{den}");
        let parsed = abphase_core::scenario::parse_angle(&text).unwrap();
        prop_assert!((parsed - num as f64 * std::f64::consts::PI / den as f64).abs() < 1e-14);
    }
}

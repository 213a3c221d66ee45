use ardsym_core::front::{
    collapse_metric, collapse_metric_with, fit_scaling, front_position, front_width, SimilarityForm, DEFAULT_TAIL_WINDOW,
};
use ardsym_core::q;
use ardsym_core::solver::{
    mapped_heat_residual, run, transport_mass, write_diagnostics, write_snapshot, GridKind, InitialCondition,
    SolverConfig, Stepper,
};

fn fkpp(n: usize, cfl: f64) -> SolverConfig {
    let mut c = SolverConfig::new(q(2, 1), q(1, 2), true);
    c.grid = GridKind::Uniform;
    c.n = n;
    c.x_min = 0.01;
    c.x_max = 600.0;
    c.t_end = 200.0;
    c.cfl = cfl;
    c.ic = InitialCondition::PlateauTanh { x_c: 5.0, width: 2.0 };
    c
}

fn final_front(c: &SolverConfig) -> f64 {
    let r = run(c).unwrap();
    front_position(r.snapshots.last().unwrap(), 0.5).unwrap()
}

#[test]
fn fkpp_front_speed_and_width() {
    let r = run(&fkpp(4096, 0.1)).unwrap();
    let s = r.snapshots.last().unwrap();
    let speed = front_position(s, 0.5).unwrap() / s.t;
    let w = front_width(s, DEFAULT_TAIL_WINDOW).unwrap();
    assert!((1.9..=2.0).contains(&speed), "{speed}");
    assert!((0.9..=1.15).contains(&w.lambda), "{}", w.lambda);
    let fit = fit_scaling(&r.front, r.front.default_window().unwrap()).unwrap();
    assert!(fit.delta_hat.abs() < 0.05, "{fit}");
    assert!((fit.delta_hat - fit.delta_from_position).abs() < 0.05, "{fit}");
    let at100 = r.front.at(100.0).unwrap();
    assert!((1.9..=2.0).contains(&(at100.xh / at100.t)));
    assert!(r.diagnostics.iter().all(|d| d.tail <= 1e-8));
}

#[test]
fn fkpp_grid_convergence() {
    let coarse = final_front(&fkpp(4096, 0.1));
    let fine = final_front(&fkpp(8192, 0.05));
    assert!(((coarse - fine) / fine).abs() < 5e-3, "{coarse} vs {fine}");
}

#[test]
fn fkpp_front_position_under_spatial_refinement() {
    let coarse = final_front(&fkpp(4096, 0.1));
    let fine = final_front(&fkpp(8192, 0.1));
    assert!(((coarse - fine) / fine).abs() < 2e-3, "{coarse} vs {fine}");
}

#[test]
fn reruns_are_byte_identical() {
    let mut c = fkpp(512, 0.4);
    c.x_max = 100.0;
    c.t_end = 10.0;
    c.snapshot_times = vec![2.5, 10.0];
    let bytes = |c: &SolverConfig| {
        let r = run(c).unwrap();
        let mut out = Vec::new();
        for s in &r.snapshots {
            write_snapshot(&mut out, s).unwrap();
        }
        write_diagnostics(&mut out, &r.diagnostics).unwrap();
        r.front.write_csv(&mut out).unwrap();
        out
    };
    let a = bytes(&c);
    assert!(!a.is_empty());
    assert_eq!(a, bytes(&c));
}

fn heat_run() -> Vec<ardsym_core::solver::FieldState> {
    let mut c = SolverConfig::new(q(2, 1), q(1, 2), false);
    c.grid = GridKind::Uniform;
    c.n = 4096;
    c.x_min = 0.01;
    c.x_max = 200.0;
    c.t_end = 200.0;
    c.ic = InitialCondition::PointMassGaussian { x0: 0.0, s: 0.5 };
    c.snapshot_times = vec![50.0, 200.0];
    run(&c).unwrap().snapshots
}

#[test]
fn heat_profiles_collapse_in_the_diffusive_variable() {
    let s = heat_run();
    let m = collapse_metric_with(&s, SimilarityForm::diffusive(q(2, 1), q(1, 2))).unwrap();
    assert!(m < 0.05, "{m}");
    // t^nu u against x^a / t^nu does not collapse the heat kernel
    let literal = collapse_metric(&s, q(2, 1), q(1, 2)).unwrap();
    assert!(literal > 0.05, "{literal}");
}

#[test]
fn heat_mass_is_conserved() {
    let s = heat_run();
    let (m0, m1) = (transport_mass(&s[0], q(2, 1)), transport_mass(&s[1], q(2, 1)));
    assert!(((m1 - m0) / m0).abs() < 1e-6, "{m0} {m1}");
}

fn richardson() -> SolverConfig {
    let mut c = SolverConfig::new(q(2, 3), q(3, 2), false);
    c.n = 4096;
    c.x_min = 1e-3;
    c.x_max = 1e6;
    c.t_end = 200.0;
    c.ic = InitialCondition::PointMassGaussian { x0: 0.0, s: 0.3 };
    c.snapshot_times = vec![20.0, 50.0, 80.0, 200.0];
    c
}

#[test]
fn richardson_collapse_and_mass() {
    let (a, nu) = (q(2, 3), q(3, 2));
    let r = run(&richardson()).unwrap();
    let s = &r.snapshots;
    for pair in [[s[0].clone(), s[2].clone()], [s[1].clone(), s[3].clone()]] {
        let m = collapse_metric_with(&pair, SimilarityForm::diffusive(a, nu)).unwrap();
        assert!(m < 0.05, "{m}");
    }
    let m: Vec<f64> = s.iter().map(|st| transport_mass(st, a)).collect();
    assert!(((m[3] - m[0]) / m[0]).abs() < 5e-3 * (200f64 / 20.0).log10(), "{m:?}");
}

#[test]
fn richardson_maps_onto_the_heat_equation() {
    let (a, nu) = (q(2, 3), q(3, 2));
    let c = richardson();
    let mut st = Stepper::new(&c).unwrap();
    let mut cur = st.initial_state();
    while cur.t < 30.0 {
        cur = st.step(&cur, None).unwrap();
    }
    let s1 = st.step(&cur, Some(0.05)).unwrap();
    let s2 = st.step(&s1, Some(0.05)).unwrap();
    let res = mapped_heat_residual([&cur, &s1, &s2], a, nu);
    assert!(res < 1e-2, "{res}");
}

#[test]
fn positivity_across_runs() {
    let r = run(&fkpp(1024, 0.4)).unwrap();
    for s in &r.snapshots {
        assert!(s.u.iter().all(|&v| (0.0..=1.0 + 1e-9).contains(&v)));
    }
}

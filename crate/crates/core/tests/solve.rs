use hypoell::classify::GsCase;
use hypoell::exec::Execution;
use hypoell::mixedfft::Transforms;
use hypoell::solve::*;
use hypoell::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn i() -> C64 {
    c(0.0, 1.0)
}

fn bump(grid: CylinderGrid, x0: f64, k: f64) -> Field {
    Field::from_fn(grid, move |t, x| {
        C64::from_polar((-(x - x0).powi(2) / 2.0).exp(), k * t + 0.3 * t.cos())
    })
}

fn seq() -> SolveOptions {
    SolveOptions {
        exec: Execution::Sequential,
        ..SolveOptions::default()
    }
}

#[test]
fn isolated_singular_frequency_with_projection() {
    // c₀ = i, q₀ = 1: Σ = {1}; b = 1 + sin t keeps its sign.
    let grid = CylinderGrid::new(32, 256, 20.0).unwrap();
    let op = OperatorSpec::new(
        TorusFunction::constant(i()).add(&TorusFunction::sin(1).scale(i())),
        TorusFunction::constant(c(1.0, 0.0)),
    );
    let f = bump(grid, 0.3, 0.0);
    match solve(&op, &f, &seq()) {
        Err(Error::IncompatibleAt { xis }) => assert!(xis.iter().all(|x| (x - 1.0).abs() < 1e-12)),
        other => panic!("expected incompatibility, got {:?}", other.map(|o| o.residual)),
    }
    let opts = SolveOptions { project: true, ..seq() };
    let out = solve(&op, &f, &opts).unwrap();
    assert_eq!(out.case, GsCase::NonvanishingB);
    assert!(out.converged(), "residual {:e}", out.residual);
    assert!(out.residual < 1e-8 * (1.0 + f.max_abs()));
    assert!(!out.sigma_handled.is_empty());
    assert!(out.f.check_boundary().is_ok());
    let defects = compatibility_defect_field(&op, &out.f, &seq()).unwrap();
    assert!(defects.iter().all(|d| d.normalized < 1e-8));
}

#[test]
fn lattice_of_singular_frequencies() {
    // c = 1, q = 0: Σ = ℤ, b ≡ 0.
    let grid = CylinderGrid::new(32, 256, 20.0).unwrap();
    let op = OperatorSpec::constant(c(1.0, 0.0), c(0.0, 0.0));
    let opts = SolveOptions { project: true, ..seq() };
    let f = bump(grid, -0.5, 1.0);
    let out = solve(&op, &f, &opts).unwrap();
    assert_eq!(out.case, GsCase::ConstantCoefficient);
    assert!(out.residual < 1e-8 * (1.0 + f.max_abs()), "residual {:e}", out.residual);
}

#[test]
fn regularized_values_are_continuous_across_the_singular_frequency() {
    let grid = CylinderGrid::new(32, 256, 20.0).unwrap();
    let op = OperatorSpec::new(
        TorusFunction::constant(i()).add(&TorusFunction::sin(1).scale(i() * 0.5)),
        TorusFunction::constant(c(1.0, 0.0)),
    );
    let opts = SolveOptions { project: true, ..seq() };
    let out = solve(&op, &bump(grid, 0.0, 0.0), &opts).unwrap();
    let j = grid.n_x / 2 + (1.0 / grid.dxi()).round() as usize;
    // Neighbouring columns around ξ* = 1 differ by O(dξ).
    for jj in [j - 1, j, j + 1] {
        let diff = (0..grid.n_t)
            .map(|r| (out.u_hat.get(r, jj + 1) - out.u_hat.get(r, jj)).norm())
            .fold(0.0, f64::max);
        assert!(diff < 10.0 * grid.dxi() * out.u_hat.max_abs(), "jump {diff:e} at column {jj}");
    }
}

#[test]
fn reduction_matches_direct_constant_solve() {
    // Solving the variable-coefficient operator equals conjugating the
    // constant-coefficient solution: u = Ψ⁻¹ u_r with L_r u_r = Ψ f.
    let grid = CylinderGrid::new(64, 256, 20.0).unwrap();
    let tr = Transforms::new(grid, Execution::Sequential);
    let a = TorusFunction::cos(1).scale(c(0.3, 0.0));
    let q = TorusFunction::sin(2).scale(c(0.2, 0.4));
    let base_c = c(0.4, 1.0);
    let base_q = c(0.0, 0.5);
    let op = OperatorSpec::new(
        TorusFunction::constant(base_c).add(&a),
        TorusFunction::constant(base_q).add(&q),
    );
    let reduced = op.reduced();
    let f = bump(grid, 0.0, 1.0);
    let direct = solve(&op, &f, &seq()).unwrap();
    let psi = hypoell::conjugate::ConjugationPair::for_operator(&op);
    let fr = psi.apply_field(&tr, &f, 1).unwrap();
    let via = solve(&reduced, &fr, &seq()).unwrap();
    let back = psi.apply_field(&tr, &via.u, -1).unwrap();
    assert!(direct.u.max_diff(&back) < 1e-8 * direct.u.max_abs());
}

#[test]
fn parallel_and_sequential_are_bit_identical() {
    let grid = CylinderGrid::new(32, 128, 15.0).unwrap();
    let op = OperatorSpec::new(TorusFunction::sin(1).scale(i()), TorusFunction::zero());
    let f = bump(grid, 0.5, 2.0);
    let par = SolveOptions {
        exec: Execution::Parallel,
        project: true,
        ..SolveOptions::default()
    };
    let a = solve(&op, &f, &par).unwrap();
    let b = solve(&op, &f, &SolveOptions { exec: Execution::Sequential, ..par }).unwrap();
    assert_eq!(a.u, b.u);
    assert_eq!(a.residual.to_bits(), b.residual.to_bits());
}

#[test]
fn force_attempts_undetermined_operator() {
    let grid = CylinderGrid::new(32, 128, 15.0).unwrap();
    let op = OperatorSpec::new(TorusFunction::sin(2).scale(i()), TorusFunction::zero());
    let f = bump(grid, 0.0, 1.0);
    assert!(matches!(solve(&op, &f, &seq()), Err(Error::Undetermined)));
    let out = solve(&op, &f, &SolveOptions { force: true, project: true, ..seq() }).unwrap();
    assert_eq!(out.case, GsCase::Undetermined);
    assert!(out.residual.is_finite());
}

#[test]
fn residual_examples() {
    let grid = CylinderGrid::new(16, 128, 15.0).unwrap();
    let tr = Transforms::new(grid, Execution::Sequential);
    let op = OperatorSpec::constant(i(), c(0.0, 0.5));
    let f = bump(grid, 0.0, 1.0);
    let zero = Field::zeros(grid);
    assert!((residual(&tr, &op, &zero, &f) - f.max_abs()).abs() < 1e-15);
    // L(e^{it}e^{−x²/2}) is computed exactly: perturbing u by δ times this
    // mode moves the residual by at most |δ|·max|L mode|.
    let mode = Field::from_fn(grid, |t, x| C64::from_polar((-x * x / 2.0).exp(), t));
    let lmode = tr.spectral_apply(&op, &mode).unwrap();
    let u = solve(&op, &f, &seq()).unwrap().u;
    let delta = 1e-3;
    let r = residual(&tr, &op, &u.add(&mode.scale(c(delta, 0.0))), &f);
    assert!((r - delta * lmode.max_abs()).abs() < 1e-2 * delta * lmode.max_abs());
}

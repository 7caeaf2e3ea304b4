//! Acceptance suite: one line per criterion, `criterion N PASS|FAIL`.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hypoell::classify::{is_sgh, Certificate};
use hypoell::conjugate::{intertwine_check, ConjugationPair};
use hypoell::exec::Execution;
use hypoell::mixedfft::{decay_report, Transforms, DECAY_THRESHOLD};
use hypoell::solve::{d_xi_spectrum, solve, SolveOptions};
use hypoell::torus_ode::{Branch, OdeProblem};
use hypoell::witness::{laplace_lower_bound_check, sign_change_witness, Variant, LAMBDAS};
use hypoell::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn i() -> C64 {
    c(0.0, 1.0)
}

fn report(n: usize, name: &str, pass: bool, detail: String) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n} {status}: {name} [{detail}]");
    assert!(pass, "criterion {n} failed: {detail}");
}

fn random_trig(rng: &mut ChaCha8Rng, k_max: usize, amp: f64, real: bool) -> TorusFunction {
    let n = 2 * k_max + 1;
    let mut coeffs: Vec<C64> = (0..n)
        .map(|_| c(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp)))
        .collect();
    if real {
        coeffs[k_max].im = 0.0;
        for k in 1..=k_max {
            coeffs[k_max - k] = coeffs[k_max + k].conj();
        }
    }
    TorusFunction::from_coeffs(k_max, coeffs)
}

fn gaussian_packet(grid: CylinderGrid, rng: &mut ChaCha8Rng) -> Field {
    let x0 = rng.gen_range(-2.0..2.0);
    let w = rng.gen_range(0.7..1.5);
    let k = rng.gen_range(-4i32..=4);
    let phase = rng.gen_range(0.0..2.0 * PI);
    let chirp = rng.gen_range(-1.0..1.0);
    Field::from_fn(grid, move |t, x| {
        let env = (-(x - x0).powi(2) / (2.0 * w * w)).exp() * (1.0 + 0.3 * (t + phase).cos());
        C64::from_polar(env, k as f64 * t + chirp * x)
    })
}

#[test]
fn criterion_1_transform_roundtrips() {
    let start = Instant::now();
    let grid = CylinderGrid::new(64, 512, 20.0).unwrap();
    let tr = Transforms::new(grid, Execution::default());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f = gaussian_packet(grid, &mut rng);
        let hat = tr.forward_x(&f).unwrap();
        worst = worst.max(tr.inverse_x(&hat).max_diff(&f) / f.max_abs());
        let mixed = tr.forward_t(&hat);
        worst = worst.max(tr.inverse_t(&mixed).max_diff(&hat) / hat.max_abs());
    }
    let g = Field::from_fn(grid, |_, x| c((-x * x / 2.0).exp(), 0.0));
    let g_hat = tr.forward_x(&g).unwrap();
    let scale = (2.0 * PI).sqrt();
    let mut pair_err: f64 = 0.0;
    for j in 0..grid.n_x {
        let xi = grid.xi(j);
        if xi.abs() <= 8.0 {
            let expect = scale * (-xi * xi / 2.0).exp();
            for r in 0..grid.n_t {
                pair_err = pair_err.max((g_hat.get(r, j) - expect).norm() / scale);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        "transform round-trips and Gaussian pair",
        worst < 1e-10 && pair_err < 1e-10 && secs < 5.0,
        format!("roundtrip {worst:.2e}, gaussian pair {pair_err:.2e}, {secs:.2}s"),
    );
}

/// Exact minimum of `|k + c₀ξ − iq₀|` over `ξ ∈ [lo, hi]` for fixed `k`.
fn cell_min(k: f64, c0: C64, q0: C64, lo: f64, hi: f64) -> (f64, f64) {
    // k + c₀ξ − iq₀ = (k + a₀ξ + Im q₀) + i(b₀ξ − Re q₀)
    let (p0, p1) = (k + q0.im, c0.re);
    let (r0, r1) = (-q0.re, c0.im);
    let denom = p1 * p1 + r1 * r1;
    let xi = if denom == 0.0 {
        lo
    } else {
        (-(p0 * p1 + r0 * r1) / denom).clamp(lo, hi)
    };
    ((p0 + p1 * xi).hypot(r0 + r1 * xi), xi)
}

/// Brute-force search over `k ∈ [−10³, 10³]` and `10⁵` cells of `[−L, L]`.
fn brute_force_min(c0: C64, q0: C64) -> f64 {
    let cells = 100_000;
    let half = 1000.0;
    let h = 2.0 * half / cells as f64;
    let mut best = f64::INFINITY;
    for m in 0..cells {
        let lo = -half + h * m as f64;
        let hi = lo + h;
        // Only the integers bracketing −Re(c₀ξ − iq₀) on the cell can win.
        let re = |xi: f64| -(c0.re * xi + q0.im);
        let (a, b) = (re(lo).min(re(hi)), re(lo).max(re(hi)));
        let k_lo = (a.floor() - 1.0).max(-1000.0) as i64;
        let k_hi = (b.ceil() + 1.0).min(1000.0) as i64;
        for k in k_lo..=k_hi {
            best = best.min(cell_min(k as f64, c0, q0, lo, hi).0);
        }
    }
    best
}

#[test]
fn criterion_2_constant_coefficient_classification() {
    let s2 = 2f64.sqrt();
    let a_vals = [0.0, 1.0, 0.5, 2.0 / 3.0, s2, PI / 4.0, -std::f64::consts::E / 3.0];
    let b_vals = [0.0, 0.5, -1.0, 1.0 / 3.0, 3f64.sqrt() / 2.0];
    let re_q = [0.0, 0.25, -1.0, s2 / 3.0];
    let im_q = [0.0, 1.0, -2.0, 0.5, 1.0 / 3.0, PI / 5.0];
    let mut catalog = Vec::new();
    for &a in &a_vals {
        for &b in &b_vals {
            for &rq in &re_q {
                for &iq in &im_q {
                    catalog.push((c(a, b), c(rq, iq)));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for idx in (1..catalog.len()).rev() {
        catalog.swap(idx, rng.gen_range(0..=idx));
    }
    catalog.truncate(200);

    let mut agree = 0;
    let mut certs_ok = 0;
    let mut zero_cases = 0;
    for &(c0, q0) in &catalog {
        let op = OperatorSpec::constant(c0, q0);
        let v = is_sgh(&op);
        let found = brute_force_min(c0, q0);
        let brute_sgh = found >= 1e-6;
        zero_cases += usize::from(!brute_sgh);
        agree += usize::from(v.sgh == brute_sgh);
        let cert = match v.certificate {
            Certificate::ZeroFrequency { k0, xi0 } => {
                (c(k0 as f64, 0.0) + c0 * xi0 - i() * q0).norm() < 1e-8
            }
            Certificate::LowerBound { epsilon } => epsilon > 0.0 && found >= epsilon - 1e-8,
            Certificate::SignChange { .. } => false,
        };
        certs_ok += usize::from(cert);
    }
    report(
        2,
        "constant-coefficient classification vs brute-force search",
        agree == catalog.len() && certs_ok == catalog.len(),
        format!(
            "{agree}/{} agree, {certs_ok} certificates valid, {zero_cases} with zeros",
            catalog.len()
        ),
    );
}

#[test]
fn criterion_3_periodic_ode_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_res: f64 = 0.0;
    let mut worst_branch: f64 = 0.0;
    let mut solved = 0;
    for _ in 0..100 {
        let mean = c(rng.gen_range(-1.0..1.0), rng.gen_range(-3.0..3.0));
        let theta = random_trig(&mut rng, 3, 0.5, false).add(&TorusFunction::constant(mean));
        let theta = theta.sub(&TorusFunction::constant(theta.mean() - mean));
        let g = random_trig(&mut rng, 3, 1.0, false);
        let prob = OdeProblem::new(theta, g.clone());
        if prob.is_resonant() {
            continue;
        }
        let minus = prob.solve_nonresonant(Branch::Minus).unwrap();
        let plus = prob.solve_nonresonant(Branch::Plus).unwrap();
        let scale = 1.0 + g.max_abs();
        worst_res = worst_res.max(prob.residual(&minus) / scale).max(prob.residual(&plus) / scale);
        worst_branch = worst_branch.max(minus.sub(&plus).max_abs() / minus.max_abs());
        solved += 1;
    }

    // Resonant: θ₀ = im with g = u₀' + θu₀ (zero defect), and g perturbed
    // along the cokernel direction e^{−Θ} (nonzero defect).
    let mut worst_resonant: f64 = 0.0;
    let mut rejected = 0;
    let resonant_trials = 20;
    for m in 0..resonant_trials {
        let k = m as f64 - 10.0;
        let osc = random_trig(&mut rng, 3, 0.4, false);
        let osc = osc.sub(&TorusFunction::constant(osc.mean()));
        let theta = osc.add(&TorusFunction::constant(c(0.0, k)));
        let u0 = random_trig(&mut rng, 3, 1.0, false);
        let g = u0.derivative().add(&theta.mul(&u0));
        let prob = OdeProblem::new(theta.clone(), g.clone());
        let u = prob.solve_resonant(c(0.0, 0.0)).unwrap();
        worst_resonant = worst_resonant.max(prob.residual(&u) / (1.0 + g.max_abs()));
        let big_theta = osc.antiderivative_zero_mean();
        let cokernel = TorusFunction::from_fn(48, |t| {
            (-(big_theta.eval(t) - big_theta.eval(0.0)) - c(0.0, k * t)).exp()
        });
        let bad = OdeProblem::new(theta, g.add(&cokernel.scale(c(1e-3, 0.0))));
        if matches!(bad.solve_resonant(c(0.0, 0.0)), Err(Error::IncompatibleRhs { .. })) {
            rejected += 1;
        }
    }
    let pass = solved >= 95
        && worst_res < 1e-8
        && worst_branch < 1e-9
        && worst_resonant < 1e-8
        && rejected == resonant_trials;
    report(
        3,
        "periodic ODE solver",
        pass,
        format!(
            "{solved} non-resonant: residual {worst_res:.2e}, branch gap {worst_branch:.2e}; resonant residual {worst_resonant:.2e}, {rejected}/{resonant_trials} incompatible rejected"
        ),
    );
}

#[test]
fn criterion_4_conjugation_identities() {
    let grid = CylinderGrid::new(128, 256, 16.0).unwrap();
    let tr = Transforms::new(grid, Execution::default());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_intertwine: f64 = 0.0;
    let mut worst_roundtrip: f64 = 0.0;
    for _ in 0..100 {
        let a = random_trig(&mut rng, 4, 0.15, true);
        let b = random_trig(&mut rng, 4, 0.5, true);
        let q = random_trig(&mut rng, 4, 0.3, false);
        let op = OperatorSpec::new(a.add(&b.scale(i())), q);
        let u = gaussian_packet(grid, &mut rng);
        worst_intertwine = worst_intertwine.max(intertwine_check(&tr, &op, &u).unwrap());
        let pair = ConjugationPair::for_operator(&op);
        let hat = tr.forward_x(&u).unwrap();
        let back = pair.apply_half(&pair.apply_half(&hat, 1).unwrap(), -1).unwrap();
        worst_roundtrip = worst_roundtrip.max(back.max_diff(&hat) / hat.max_abs());
    }
    report(
        4,
        "conjugation identities",
        worst_intertwine < 1e-8 && worst_roundtrip < 1e-10,
        format!("intertwining {worst_intertwine:.2e}, round-trip {worst_roundtrip:.2e}"),
    );
}

fn schwartz_rhs(grid: CylinderGrid, n: usize) -> Field {
    let centre = -1.5 + 0.35 * n as f64;
    let w = 0.8 + 0.07 * n as f64;
    let k = (n % 5) as f64 - 2.0;
    Field::from_fn(grid, move |t, x| {
        let y = (x - centre) / w;
        let herm = match n % 3 {
            0 => 1.0,
            1 => 2.0 * y,
            _ => 4.0 * y * y - 2.0,
        };
        C64::from_polar(herm * (-y * y / 2.0).exp(), k * t + 0.5 * t.sin())
    })
}

fn column_max(u: &HalfSpectrum, j: usize) -> f64 {
    (0..u.grid.n_t).map(|r| u.get(r, j).norm()).fold(0.0, f64::max)
}

#[test]
fn criterion_5_full_solve() {
    let grid = CylinderGrid::default();
    let tr = Transforms::new(grid, Execution::default());
    let opts = SolveOptions::default();

    let sgh_op = OperatorSpec::new(
        TorusFunction::constant(i()).add(&TorusFunction::sin(1).scale(i())),
        TorusFunction::constant(i() * 0.5),
    );
    let mut worst_sgh: f64 = 0.0;
    let mut c_needed: f64 = 0.0;
    let mut bound = 0.0;
    for n in 0..10 {
        let f = schwartz_rhs(grid, n);
        let out = solve(&sgh_op, &f, &opts).unwrap();
        worst_sgh = worst_sgh.max(out.residual / (1.0 + f.max_abs()));
        bound = out.bound_constant;
        let f_hat = tr.forward_x(&f).unwrap();
        let d_hat = d_xi_spectrum(&tr, &f);
        for j in 0..grid.n_x {
            let den = column_max(&f_hat, j) + column_max(&d_hat, j);
            if den > 1e-12 {
                c_needed = c_needed.max(column_max(&out.u_hat, j) / den);
            }
        }
    }

    let conn_op = OperatorSpec::new(TorusFunction::sin(1).scale(i()), TorusFunction::zero());
    let mut worst_conn: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    for n in 0..3 {
        let project = SolveOptions {
            project: true,
            ..opts
        };
        let out = solve(&conn_op, &schwartz_rhs(grid, n), &project).unwrap();
        let f = &out.f;
        worst_conn = worst_conn.max(out.residual / (1.0 + f.max_abs()));
        let f_hat = tr.forward_x_unchecked(f);
        for j in 0..grid.n_x {
            if grid.xi(j).abs() >= 1.0 {
                let excess = column_max(&out.u_hat, j) - 2.0 * PI * column_max(&f_hat, j) - 1e-8;
                worst_excess = worst_excess.max(excess);
            }
        }
    }
    report(
        5,
        "full solve",
        worst_sgh < 1e-6 && c_needed <= bound && worst_conn < 1e-6 && worst_excess <= 0.0,
        format!(
            "SGH residual {worst_sgh:.2e}, C {c_needed:.3} (bound constant {bound:.1}); connected residual {worst_conn:.2e}, max excess over 2π‖f̂‖ {worst_excess:.2e}"
        ),
    );
}

#[test]
fn criterion_6_witness_decay_law() {
    let start = Instant::now();
    let grid = CylinderGrid::new(1024, 512, 20.0).unwrap();
    let tr = Transforms::new(grid, Execution::default());
    let op = OperatorSpec::new(TorusFunction::sin(1).scale(i()), TorusFunction::constant(i() * 0.5));
    let w = sign_change_witness(&op, Variant::Sgh, grid).unwrap();
    let rep = decay_report(&tr.forward_t(&w.f_hat), 8, DECAY_THRESHOLD).unwrap();
    let fit = w.decay_fit(10.0, 1e3, 40);
    let secs = start.elapsed().as_secs_f64();
    let p = w.params();
    report(
        6,
        "witness decay law",
        rep.schwartz_like
            && (-0.55..=-0.45).contains(&fit.exponent)
            && fit.k_min > 0.0
            && secs < 30.0,
        format!(
            "B {:.6}, (t0, s0) ({:.6}, {:.6}), f schwartz_like {}, exponent {:.4}, K {:.4}, {secs:.2}s",
            p.extremum, p.t0, p.s0, rep.schwartz_like, fit.exponent, fit.k_min
        ),
    );
}

#[test]
fn criterion_7_laplace_lower_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = f64::INFINITY;
    let mut all_hold = true;
    for n in 0..10 {
        let s0 = rng.gen_range(0.0..2.0 * PI);
        let delta = rng.gen_range(0.7..1.0);
        // (1 − cos(s − s₀))^p · (positive factor)
        let base = TorusFunction::constant(c(1.0, 0.0)).sub(
            &TorusFunction::cos(1)
                .scale(c(s0.cos(), 0.0))
                .add(&TorusFunction::sin(1).scale(c(s0.sin(), 0.0))),
        );
        let base = if n % 2 == 0 { base } else { base.mul(&base) };
        let wobble = random_trig(&mut rng, 2, 0.15, true);
        let factor = TorusFunction::constant(c(1.0 - wobble.mean().re, 0.0)).add(&wobble);
        let psi = base.mul(&factor).mul(&TorusFunction::constant(c(rng.gen_range(2.0..5.0), 0.0)));
        let r = laplace_lower_bound_check(&psi, s0, delta, &LAMBDAS).unwrap();
        all_hold &= r.holds;
        worst = r.entries.iter().map(|e| e.ratio).fold(worst, f64::min);
    }
    report(
        7,
        "Laplace lower bound",
        all_hold && worst >= 1.0,
        format!("min ratio {worst:.4} over 10 functions x {} lambdas", LAMBDAS.len()),
    );
}

#[test]
fn criterion_8_sublevel_topology() {
    let cases = [
        ("sin t", TorusFunction::sin(1), true),
        ("sin 2t", TorusFunction::sin(2), false),
        ("0", TorusFunction::zero(), true),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, b, expect) in cases {
        let sub = b.sublevels_connected().unwrap();
        let sup = b.superlevels_connected().unwrap();
        pass &= sub == expect && sup == sub;
        detail.push(format!("{name}: sub {sub}, super {sup}"));
    }
    report(8, "sublevel topology", pass, detail.join("; "));
}

//! Solving `Lu = f` on a cylinder grid.
//!
//! The right-hand side is moved to the reduced operator
//! `L_r = ∂t + (a₀ + ib(t))∂x + q₀` by `Ψ`, solved one frequency at a time
//! as the periodic ODE `∂tû + θ(t,ξ)û = ĝ` with `θ = iξ(a₀ + ib) + q₀`, and
//! mapped back with `Ψ⁻¹`.
//!
//! Per frequency:
//!
//! * away from the singular set, the closed form of the branch selected by
//!   the sign of `ξ` and of `b`;
//! * within `dξ` of an isolated singular `ξ_s`, the difference quotient
//!   `û = [(I(ξ) − I(ξ_s))/(ξ − ξ_s)]·[(ξ − ξ_s)/den(ξ)]` with `I = den·û`
//!   and `∂ξI` propagated exactly;
//! * when every frequency is resonant (`c₀ = 0`, `q₀ ∈ iℤ`), integration
//!   from a base point `ψ(ξ)` at an extremum of `∫₀ᵗ b` along the arc that
//!   keeps the kernel bounded by one.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::classify::{is_gs, symbol_zero_set, GsCase, Sigma, Solvability};
use crate::conjugate::ConjugationPair;
use crate::exec::{map_indexed, Execution};
use crate::mixedfft::{Field, HalfSpectrum, Transforms};
use crate::torus_ode::{propagate, Branch, CellGrid, GaussLegendre, Jet};
use crate::trigfun::smooth_step;
use crate::{CylinderGrid, Error, OperatorSpec, Result, TorusFunction, C64};

const TWO_PI: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub exec: Execution,
    /// Quadrature cells per `t` grid interval.
    pub refine: usize,
    pub gl_order: usize,
    /// Gauss–Legendre nodes in `ξ` for the difference quotient.
    pub window_order: usize,
    /// Attempt operators classified `Undetermined`.
    pub force: bool,
    /// Project `f` onto the compatible subspace before solving.
    pub project: bool,
    /// Residual target `residual_factor·(1 + ‖f‖_∞)`.
    pub residual_factor: f64,
    /// Defect tolerance `defect_factor·(1 + ‖f̂‖_∞)` on the normalised defect.
    pub defect_factor: f64,
    /// Largest acceptable `1/|den|` outside the singular windows.
    pub condition_limit: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            exec: Execution::Parallel,
            refine: 4,
            gl_order: crate::torus_ode::GL_ORDER,
            window_order: 6,
            force: false,
            project: false,
            residual_factor: 1e-6,
            defect_factor: 1e-8,
            condition_limit: 1e12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Regularized,
    Resonant,
    BasePoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SigmaEntry {
    pub xi: f64,
    pub method: Method,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    /// Smallest `|den|` met by a closed-form solve (outside the windows).
    pub min_denominator: f64,
    pub at_xi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DefectEntry {
    pub xi: f64,
    /// `∫₀^{2π} f̂(t,ξ) e^{∫₀ᵗ(iξc + q)} dt`; may overflow for large `|ξ|`.
    pub defect: C64,
    /// Sup-norm of the correction that removes the defect, in units of `ĝ`.
    pub normalized: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveOutcome {
    #[serde(skip)]
    pub u: Field,
    #[serde(skip)]
    pub u_hat: HalfSpectrum,
    /// The right-hand side actually solved (projected when requested).
    #[serde(skip)]
    pub f: Field,
    pub residual: f64,
    pub tolerance: f64,
    pub case: GsCase,
    pub sigma_handled: Vec<SigmaEntry>,
    pub condition_report: ConditionReport,
    /// Largest real kernel exponent met in the quadrature.
    pub max_branch_exponent: f64,
    /// `(2π)²(1+|a₀|)‖b‖₁e^{2π|Re q₀|}`, the constant of the a-priori bound.
    pub bound_constant: f64,
}

impl SolveOutcome {
    pub fn converged(&self) -> bool {
        self.residual < self.tolerance
    }
}

/// `‖Lu − f‖_∞`.
pub fn residual(tr: &Transforms, op: &OperatorSpec, u: &Field, f: &Field) -> f64 {
    tr.spectral_apply_periodic(op, u).max_diff(f)
}

/// `ĥ(t_i, ξ) = dx Σ_j h(t_i,x_j) e^{−ix_jξ}` and its `ξ`-derivative at any `ξ`.
pub fn dtft_rows(f: &Field, xi: f64) -> (Vec<C64>, Vec<C64>) {
    let g = f.grid;
    let dx = g.dx();
    let phases: Vec<C64> = (0..g.n_x).map(|j| C64::from_polar(dx, -g.x(j) * xi)).collect();
    let mut val = vec![C64::new(0.0, 0.0); g.n_t];
    let mut der = vec![C64::new(0.0, 0.0); g.n_t];
    for i in 0..g.n_t {
        for (j, ph) in phases.iter().enumerate() {
            let v = f.get(i, j) * ph;
            val[i] += v;
            der[i] += v * C64::new(0.0, -g.x(j));
        }
    }
    (val, der)
}

/// `∂ξf̂` on the grid: the transform of `−ix f`.
pub fn d_xi_spectrum(tr: &Transforms, f: &Field) -> HalfSpectrum {
    let g = f.grid;
    let xf = f.map(|_, j, v| v * C64::new(0.0, -g.x(j)));
    tr.forward_x_unchecked(&xf)
}

/// Trigonometric interpolant of uniform samples on `[0, 2π)`, Nyquist mode
/// split evenly between `±n/2`.
struct TrigInterp {
    half: i64,
    coeffs: Vec<C64>,
}

impl TrigInterp {
    fn new(fft: &Arc<dyn Fft<f64>>, samples: &[C64]) -> Self {
        let n = samples.len();
        let half = (n / 2) as i64;
        let mut buf = samples.to_vec();
        fft.process(&mut buf);
        let mut coeffs = vec![C64::new(0.0, 0.0); 2 * half as usize + 1];
        for k in -half..=half {
            let mut c = buf[k.rem_euclid(n as i64) as usize] / n as f64;
            if n % 2 == 0 && k.abs() == half {
                c *= 0.5;
            }
            coeffs[(k + half) as usize] = c;
        }
        TrigInterp { half, coeffs }
    }

    fn eval(&self, t: f64) -> C64 {
        let z = C64::from_polar(1.0, t);
        let zi = z.conj();
        let h = self.half as usize;
        let mut acc = self.coeffs[h];
        let (mut p, mut m) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        for k in 1..=h {
            p *= z;
            m *= zi;
            acc += self.coeffs[h + k] * p + self.coeffs[h - k] * m;
        }
        acc
    }
}

/// Sign structure of `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BSign {
    Zero,
    NonNegative,
    NonPositive,
    Changes,
}

/// Linear functional `h ↦ Σ_p W_p h(s_p) e^{Θ(s_p) − shift}` approximating
/// the compatibility pairing on the solver's own quadrature.
struct DefectFunctional {
    weights: Vec<C64>,
    shift: f64,
    /// Direction `conj(e^{Θ(t_i) − shift})` on the `t` grid.
    direction: Vec<C64>,
}

/// Per-grid precomputation shared by every frequency.
pub struct FrequencySolver {
    grid: CylinderGrid,
    opts: SolveOptions,
    b: TorusFunction,
    b_sign: BSign,
    a0: f64,
    q0: C64,
    c0: C64,
    sigma: Sigma,
    psi: ConjugationPair,
    a_t: Vec<f64>,
    q_t: Vec<C64>,
    cells: CellGrid,
    /// `B = ∫₀ᵗ b` at cell boundaries and nodes.
    b_bounds: Vec<f64>,
    b_nodes: Vec<f64>,
    window_rule: GaussLegendre,
    fft: Arc<dyn Fft<f64>>,
    /// `(argmax, argmin)` of `B` when it is periodic.
    extrema: Option<(f64, f64)>,
}

impl FrequencySolver {
    pub fn new(op: &OperatorSpec, grid: CylinderGrid, opts: SolveOptions) -> Self {
        let b = op.b().clone();
        let b_sign = if op.b_vanishes() {
            BSign::Zero
        } else if b.changes_sign().expect("b is real").is_some() {
            BSign::Changes
        } else if b.mean().re >= 0.0 {
            BSign::NonNegative
        } else {
            BSign::NonPositive
        };
        let psi = ConjugationPair::for_operator(op);
        let a_t = grid.ts().iter().map(|&t| psi.a_shift.eval(t).re).collect();
        let q_t = grid.ts().iter().map(|&t| psi.q_shift.eval(t)).collect();
        let cells = CellGrid::uniform(grid.n_t * opts.refine, opts.gl_order);
        let b_bounds = cells.bounds.iter().map(|&t| b.integral_from_zero(t).re).collect();
        let b_nodes = cells.nodes.iter().map(|&t| b.integral_from_zero(t).re).collect();
        let extrema = b
            .running_integral_extrema()
            .ok()
            .map(|e| (e.t_max, e.t_min));
        FrequencySolver {
            grid,
            opts,
            b,
            b_sign,
            a0: op.a0(),
            q0: op.q0(),
            c0: op.c0(),
            sigma: symbol_zero_set(op.c0(), op.q0()),
            psi,
            a_t,
            q_t,
            cells,
            b_bounds,
            b_nodes,
            window_rule: GaussLegendre::new(opts.window_order),
            fft: FftPlanner::new().plan_fft_forward(grid.n_t),
            extrema,
        }
    }

    pub fn sigma(&self) -> Sigma {
        self.sigma
    }

    /// `Θ(t,ξ) = iξa₀t − ξB(t) + q₀t` given `B(t)`.
    fn theta(&self, xi: f64, t: f64, big_b: f64) -> C64 {
        C64::new(-xi * big_b, xi * self.a0 * t) + self.q0 * t
    }

    fn theta_jet(&self, xi: f64, t: f64, big_b: f64) -> Jet {
        Jet::new(self.theta(xi, t, big_b), C64::new(-big_b, self.a0 * t))
    }

    /// `ĝ = e^{iξA + Q} f̂` on the `t` grid.
    fn reduce(&self, xi: f64, fhat: &[C64]) -> Vec<C64> {
        fhat.iter()
            .enumerate()
            .map(|(i, v)| v * (C64::new(0.0, xi * self.a_t[i]) + self.q_t[i]).exp())
            .collect()
    }

    fn at_nodes(&self, samples: &[C64]) -> Vec<C64> {
        let interp = TrigInterp::new(&self.fft, samples);
        self.cells.nodes.iter().map(|&s| interp.eval(s)).collect()
    }

    fn branch(&self, xi: f64) -> Branch {
        match self.b_sign {
            BSign::NonNegative | BSign::Changes => {
                if xi >= 0.0 {
                    Branch::Plus
                } else {
                    Branch::Minus
                }
            }
            BSign::NonPositive => {
                if xi >= 0.0 {
                    Branch::Minus
                } else {
                    Branch::Plus
                }
            }
            BSign::Zero => Branch::preferred(C64::new(0.0, xi * self.a0) + self.q0),
        }
    }

    fn at_grid<S: Copy>(&self, bounds: &[S]) -> Vec<S> {
        (0..self.grid.n_t).map(|i| bounds[i * self.opts.refine]).collect()
    }

    /// Closed-form solve away from the singular set.
    fn solve_regular(&self, xi: f64, g_t: &[C64]) -> (Vec<C64>, C64, f64) {
        let theta_b: Vec<C64> = self
            .cells
            .bounds
            .iter()
            .zip(&self.b_bounds)
            .map(|(&t, &bb)| self.theta(xi, t, bb))
            .collect();
        let theta_n: Vec<C64> = self
            .cells
            .nodes
            .iter()
            .zip(&self.b_nodes)
            .map(|(&t, &bb)| self.theta(xi, t, bb))
            .collect();
        let g_n = self.at_nodes(g_t);
        let prop = propagate(&self.cells, self.branch(xi), &theta_b, &theta_n, &g_n);
        (self.at_grid(&prop.solution()), prop.den, prop.max_exponent)
    }

    /// `∂ξ I(t_i, ζ)` for the unreduced rows `f̂(·,ζ)`, `∂ξf̂(·,ζ)`.
    fn numerator_derivative(&self, zeta: f64, branch: Branch, f: &Field) -> Vec<C64> {
        let (fh, dfh) = dtft_rows(f, zeta);
        let (mut gv, mut gd) = (Vec::with_capacity(fh.len()), Vec::with_capacity(fh.len()));
        for i in 0..fh.len() {
            let e = (C64::new(0.0, zeta * self.a_t[i]) + self.q_t[i]).exp();
            let v = e * fh[i];
            gv.push(v);
            gd.push(C64::new(0.0, self.a_t[i]) * v + e * dfh[i]);
        }
        let gvn = self.at_nodes(&gv);
        let gdn = self.at_nodes(&gd);
        let g_n: Vec<Jet> = gvn.iter().zip(&gdn).map(|(&v, &d)| Jet::new(v, d)).collect();
        let theta_b: Vec<Jet> = self
            .cells
            .bounds
            .iter()
            .zip(&self.b_bounds)
            .map(|(&t, &bb)| self.theta_jet(zeta, t, bb))
            .collect();
        let theta_n: Vec<Jet> = self
            .cells
            .nodes
            .iter()
            .zip(&self.b_nodes)
            .map(|(&t, &bb)| self.theta_jet(zeta, t, bb))
            .collect();
        let prop = propagate(&self.cells, branch, &theta_b, &theta_n, &g_n);
        self.at_grid(&prop.numerator()).iter().map(|j| j.deriv).collect()
    }

    /// Difference-quotient evaluation next to the singular `xi_s`.
    fn solve_window(&self, xi: f64, xi_s: f64, f: &Field) -> Vec<C64> {
        let branch = self.branch(xi);
        let delta = xi - xi_s;
        let n_t = self.grid.n_t;
        let mut quotient = vec![C64::new(0.0, 0.0); n_t];
        if delta.abs() < 1e-14 {
            quotient = self.numerator_derivative(xi_s, branch, f);
        } else {
            for (zeta, w) in self.window_rule.on(xi_s, xi) {
                let d = self.numerator_derivative(zeta, branch, f);
                for (q, v) in quotient.iter_mut().zip(d) {
                    *q += v * (w / delta);
                }
            }
        }
        // (ξ − ξ_s)/den(ξ) with den = 1 − e^{∓2πic₀(ξ − ξ_s)} at resonance.
        let z = C64::new(0.0, TWO_PI) * self.c0;
        let ratio = match branch {
            Branch::Minus => quotient_ratio(-z, delta),
            Branch::Plus => quotient_ratio(z, delta),
        };
        quotient.iter().map(|q| q * ratio).collect()
    }

    fn base_point(&self, xi: f64) -> f64 {
        let (t_max, t_min) = self.extrema.unwrap_or((0.0, 0.0));
        let mut arc = (t_max - t_min).rem_euclid(TWO_PI);
        if arc > PI {
            arc -= TWO_PI;
        }
        (t_min + smooth_step((xi + 1.0) / 2.0) * arc).rem_euclid(TWO_PI)
    }

    /// Integration from the base point along the bounded-kernel arc.
    fn solve_base_point(&self, xi: f64, g_t: &[C64]) -> (Vec<C64>, f64) {
        let interp = TrigInterp::new(&self.fft, g_t);
        let psi = self.base_point(xi);
        let m_cells = self.cells.cells();
        let h = TWO_PI / m_cells as f64;
        let n_t = self.grid.n_t;
        let refine = self.opts.refine;
        let big_b = |t: f64| self.b.integral_from_zero(t).re;
        let rule = &self.cells.rule;

        // (value, min B, max B) on arrival at each grid point.
        let walk = |forward: bool| -> Vec<(C64, f64, f64)> {
            let mut out = vec![(C64::new(0.0, 0.0), 0.0, 0.0); n_t];
            let (mut a, mut v) = (psi, C64::new(0.0, 0.0));
            let b_a = big_b(a);
            let (mut lo, mut hi) = (b_a, b_a);
            // A grid point at the base point itself keeps the zero start value.
            let r = psi / h;
            if (r - r.round()).abs() < 1e-9 && (r.round() as i64).rem_euclid(refine as i64) == 0 {
                let i = (r.round() as i64 / refine as i64).rem_euclid(n_t as i64) as usize;
                out[i] = (v, b_a, b_a);
            }
            let mut th_a = self.theta(xi, a, b_a);
            let m0 = if forward {
                (psi / h).floor() as i64 + 1
            } else {
                (psi / h).ceil() as i64 - 1
            };
            for step in 0..m_cells as i64 {
                let m = if forward { m0 + step } else { m0 - step };
                let b_pt = m as f64 * h;
                let b_b = big_b(b_pt);
                let th_b = self.theta(xi, b_pt, b_b);
                let mut inc = C64::new(0.0, 0.0);
                for (s, w) in rule.on(a, b_pt) {
                    let e = (self.theta(xi, s, big_b(s)) - th_b).exp();
                    inc += interp.eval(s) * e * w;
                }
                v = (th_a - th_b).exp() * v + inc;
                lo = lo.min(b_b);
                hi = hi.max(b_b);
                if m.rem_euclid(refine as i64) == 0 && (b_pt - psi).abs() < TWO_PI - 1e-9 {
                    let i = (m / refine as i64).rem_euclid(n_t as i64) as usize;
                    out[i] = (v, lo, hi);
                }
                a = b_pt;
                th_a = th_b;
            }
            out
        };
        let fwd = walk(true);
        let bwd = walk(false);
        let mut max_exp = f64::NEG_INFINITY;
        let vals = (0..n_t)
            .map(|i| {
                let bt = self.b_bounds[i * refine];
                let (f, b) = (fwd[i], bwd[i]);
                let use_fwd = if xi >= 0.0 { f.1 >= b.1 } else { f.2 <= b.2 };
                let pick = if use_fwd { f } else { b };
                let worst = if xi >= 0.0 {
                    xi * (bt - pick.1)
                } else {
                    xi * (bt - pick.2)
                };
                max_exp = max_exp.max(worst);
                pick.0
            })
            .collect();
        (vals, max_exp)
    }

    fn defect_functional(&self, xi: f64) -> DefectFunctional {
        let theta_n: Vec<C64> = self
            .cells
            .nodes
            .iter()
            .zip(&self.b_nodes)
            .map(|(&t, &bb)| self.theta(xi, t, bb))
            .collect();
        let shift = theta_n.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let weights = theta_n
            .iter()
            .zip(&self.cells.weights)
            .map(|(th, &w)| (th - shift).exp() * w)
            .collect();
        let direction = (0..self.grid.n_t)
            .map(|i| {
                let r = i * self.opts.refine;
                (self.theta(xi, self.cells.bounds[r], self.b_bounds[r]) - shift)
                    .exp()
                    .conj()
            })
            .collect();
        DefectFunctional {
            weights,
            shift,
            direction,
        }
    }

    fn pair(&self, fun: &DefectFunctional, g_t: &[C64]) -> C64 {
        self.at_nodes(g_t)
            .iter()
            .zip(&fun.weights)
            .map(|(g, w)| g * w)
            .sum()
    }

    /// `(raw defect, normalised defect, projection coefficient)`.
    fn defect(&self, xi: f64, g_t: &[C64]) -> (C64, f64, C64) {
        let fun = self.defect_functional(xi);
        let d = self.pair(&fun, g_t);
        let dw = self.pair(&fun, &fun.direction);
        let w_max = fun.direction.iter().map(|w| w.norm()).fold(0.0, f64::max);
        let kappa = d / dw;
        (d * fun.shift.exp(), kappa.norm() * w_max, kappa)
    }

    /// Singular frequencies that need a defect check on this grid.
    fn singular_points(&self) -> Vec<f64> {
        self.sigma.points_within(self.grid.xi_nyquist())
    }

    fn nearest_singular(&self, xi: f64) -> Option<f64> {
        match self.sigma {
            Sigma::Point(x) => Some(x),
            Sigma::Lattice { a0, im_q0 } => {
                let k = -(a0 * xi + im_q0).round();
                Some((-k - im_q0) / a0)
            }
            _ => None,
        }
    }
}

/// `Δ / (1 − e^{zΔ})`, continuous at `Δ = 0` with value `−1/z`.
fn quotient_ratio(z: C64, delta: f64) -> C64 {
    let w = z * delta;
    if w.norm() < 1e-300 {
        return -1.0 / z;
    }
    -C64::new(delta, 0.0) / expm1(w)
}

/// `e^z − 1` without cancellation for small `z`.
pub fn expm1(z: C64) -> C64 {
    let (x, y) = (z.re, z.im);
    let s = (0.5 * y).sin();
    C64::new(x.exp_m1() * y.cos() - 2.0 * s * s, x.exp() * y.sin())
}

fn tolerance_scale(fhat: &HalfSpectrum) -> f64 {
    1.0 + fhat.max_abs()
}

/// Compatibility pairings at the singular frequencies (every grid `ξ` when
/// all frequencies are singular).
pub fn compatibility_defect_field(
    op: &OperatorSpec,
    f: &Field,
    opts: &SolveOptions,
) -> Result<Vec<DefectEntry>> {
    let tr = Transforms::new(f.grid, opts.exec);
    let fhat = tr.forward_x_unchecked(f);
    let solver = FrequencySolver::new(op, f.grid, *opts);
    Ok(defects(&solver, f, &fhat))
}

fn defects(solver: &FrequencySolver, f: &Field, fhat: &HalfSpectrum) -> Vec<DefectEntry> {
    let grid = f.grid;
    let entry = |xi: f64, row: Vec<C64>| {
        let g = solver.reduce(xi, &row);
        let (defect, normalized, _) = solver.defect(xi, &g);
        DefectEntry {
            xi,
            defect,
            normalized,
        }
    };
    match solver.sigma {
        Sigma::Empty => Vec::new(),
        Sigma::All => map_indexed(solver.opts.exec, grid.n_x, |j| {
            entry(grid.xi(j), fhat.column(j))
        }),
        _ => {
            let pts = solver.singular_points();
            map_indexed(solver.opts.exec, pts.len(), |p| {
                entry(pts[p], dtft_rows(f, pts[p]).0)
            })
        }
    }
}

/// Removes from `f` its component along the transpose-kernel direction at
/// every singular frequency, so that all compatibility defects vanish.
pub fn project_compatible(op: &OperatorSpec, f: &Field, opts: &SolveOptions) -> Result<Field> {
    let tr = Transforms::new(f.grid, opts.exec);
    let solver = FrequencySolver::new(op, f.grid, *opts);
    Ok(project_with(&solver, &tr, f))
}

fn project_with(solver: &FrequencySolver, tr: &Transforms, f: &Field) -> Field {
    let grid = f.grid;
    match solver.sigma {
        Sigma::Empty => f.clone(),
        Sigma::All => {
            let fhat = tr.forward_x_unchecked(f);
            let cols = map_indexed(solver.opts.exec, grid.n_x, |j| {
                let xi = grid.xi(j);
                let g = solver.reduce(xi, &fhat.column(j));
                let fun = solver.defect_functional(xi);
                let kappa = solver.pair(&fun, &g) / solver.pair(&fun, &fun.direction);
                g.iter()
                    .zip(&fun.direction)
                    .map(|(v, w)| v - kappa * w)
                    .collect::<Vec<C64>>()
            });
            let mut ghat = HalfSpectrum::zeros(grid);
            for (j, col) in cols.iter().enumerate() {
                for (i, v) in col.iter().enumerate() {
                    ghat.values[i * grid.n_x + j] = *v;
                }
            }
            let fhat = solver
                .psi
                .apply_half(&ghat, -1)
                .expect("A is real for a real a");
            tr.inverse_x(&fhat)
        }
        _ => project_isolated(solver, f),
    }
}

/// Subtracts `κ·w(t)e^{iξ_s x}e^{−x²/2σ²}` at each singular `ξ_s`, sweeping
/// until the corrections stall at rounding level.
fn project_isolated(solver: &FrequencySolver, f: &Field) -> Field {
    let grid = f.grid;
    let sigma_x = grid.half_width / 8.0;
    let pts = solver.singular_points();
    let profiles: Vec<(Field, C64)> = pts
        .iter()
        .map(|&xi_s| {
            let fun = solver.defect_functional(xi_s);
            // unreduced direction: e^{−iξA − Q}·w
            let w: Vec<C64> = fun
                .direction
                .iter()
                .enumerate()
                .map(|(i, d)| d * (C64::new(0.0, -xi_s * solver.a_t[i]) - solver.q_t[i]).exp())
                .collect();
            let h = Field::from_fn(grid, |_, x| {
                C64::from_polar((-x * x / (2.0 * sigma_x * sigma_x)).exp(), xi_s * x)
            });
            let h = h.map(|i, _, v| v * w[i]);
            let dh = solver.pair(&fun, &solver.reduce(xi_s, &dtft_rows(&h, xi_s).0));
            (h, dh)
        })
        .collect();
    let mut out = f.clone();
    let scale = 1e-15 * (1.0 + f.max_abs());
    for _ in 0..50 {
        let mut largest = 0.0f64;
        for (p, &xi_s) in pts.iter().enumerate() {
            let fun = solver.defect_functional(xi_s);
            let g = solver.reduce(xi_s, &dtft_rows(&out, xi_s).0);
            let kappa = solver.pair(&fun, &g) / profiles[p].1;
            let (h, _) = &profiles[p];
            largest = largest.max(kappa.norm() * h.max_abs());
            out = out.sub(&h.scale(kappa));
        }
        if largest <= scale {
            break;
        }
    }
    out
}

enum Column {
    Regular { den: C64 },
    Window,
    BasePoint,
}

/// Solves `Lu = f`.
pub fn solve(op: &OperatorSpec, f: &Field, opts: &SolveOptions) -> Result<SolveOutcome> {
    let verdict = is_gs(op);
    match verdict.gs {
        Solvability::NotSolvable => {
            let cert = crate::classify::is_sgh(op).certificate;
            return Err(Error::NotSolvable(serde_json::to_string(&cert)?));
        }
        Solvability::Undetermined if !opts.force => return Err(Error::Undetermined),
        _ => {}
    }
    let grid = f.grid;
    let tr = Transforms::new(grid, opts.exec);
    f.check_boundary()?;
    let solver = FrequencySolver::new(op, grid, *opts);
    let f = if opts.project {
        project_with(&solver, &tr, f)
    } else {
        f.clone()
    };
    let fhat = tr.forward_x_unchecked(&f);
    let defect_tol = opts.defect_factor * tolerance_scale(&fhat);
    let bad: Vec<f64> = defects(&solver, &f, &fhat)
        .into_iter()
        .filter(|d| !(d.normalized <= defect_tol))
        .map(|d| d.xi)
        .collect();
    if !bad.is_empty() {
        return Err(Error::IncompatibleAt { xis: bad });
    }

    let ghat = solver
        .psi
        .apply_half(&fhat, 1)
        .expect("A is real for a real a");
    let dxi = grid.dxi();
    let all = solver.sigma == Sigma::All;
    let results = map_indexed(opts.exec, grid.n_x, |j| {
        let xi = grid.xi(j);
        let g_t = ghat.column(j);
        if all {
            let (v, e) = solver.solve_base_point(xi, &g_t);
            return (v, Column::BasePoint, e);
        }
        if let Some(xi_s) = solver.nearest_singular(xi) {
            if (xi - xi_s).abs() < dxi {
                return (solver.solve_window(xi, xi_s, &f), Column::Window, f64::NEG_INFINITY);
            }
        }
        let (v, den, e) = solver.solve_regular(xi, &g_t);
        (v, Column::Regular { den }, e)
    });

    let mut ur = HalfSpectrum::zeros(grid);
    let mut sigma_handled = Vec::new();
    let mut condition = ConditionReport {
        min_denominator: f64::INFINITY,
        at_xi: 0.0,
    };
    let mut max_exp = f64::NEG_INFINITY;
    for (j, (vals, kind, e)) in results.into_iter().enumerate() {
        let xi = grid.xi(j);
        for (i, v) in vals.into_iter().enumerate() {
            ur.values[i * grid.n_x + j] = v;
        }
        max_exp = max_exp.max(e);
        match kind {
            Column::Regular { den } => {
                let d = den.norm();
                if 1.0 / d > opts.condition_limit {
                    return Err(Error::NearResonant { xi, factor: 1.0 / d });
                }
                if d < condition.min_denominator {
                    condition = ConditionReport {
                        min_denominator: d,
                        at_xi: xi,
                    };
                }
            }
            Column::Window => sigma_handled.push(SigmaEntry {
                xi,
                method: Method::Regularized,
            }),
            Column::BasePoint => sigma_handled.push(SigmaEntry {
                xi,
                method: if solver.b_sign == BSign::Zero {
                    Method::Resonant
                } else {
                    Method::BasePoint
                },
            }),
        }
    }
    let u_hat = solver.psi.apply_half(&ur, -1).expect("A is real for a real a");
    let u = tr.inverse_x(&u_hat);
    let res = residual(&tr, op, &u, &f);
    let b_l1 = {
        let s = op.b().refined_samples(4);
        s.iter().map(|v| v.re.abs()).sum::<f64>() * TWO_PI / s.len() as f64
    };
    Ok(SolveOutcome {
        u,
        u_hat,
        residual: res,
        tolerance: opts.residual_factor * (1.0 + f.max_abs()),
        f,
        case: verdict.case,
        sigma_handled,
        condition_report: condition,
        max_branch_exponent: max_exp,
        bound_constant: TWO_PI * TWO_PI * (1.0 + op.a0().abs()) * b_l1 * (TWO_PI * op.q0().re.abs()).exp(),
    })
}

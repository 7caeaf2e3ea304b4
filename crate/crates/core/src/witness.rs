//! Counterexamples behind negative verdicts.
//!
//! * [`zero_symbol_witness`]: a tempered, non-Schwartz `v` with `Lv = 0`
//!   built from a zero `(k₀, ξ₀)` of the symbol.
//! * [`sign_change_witness`]: when `b = Im c` changes sign, a Schwartz `f`
//!   whose solution satisfies `û(t₀,ξ) ≥ K ξ^{−1/2}`, so `u` is not Schwartz.
//! * [`laplace_lower_bound_check`]: the Laplace-type inequality
//!   `∫_{s₀−δ}^{s₀+δ} e^{−λψ} ≥ (∫_{−δ}^{δ} e^{−s²}ds)/√(λM)` behind that
//!   rate.

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::erf::erf;

use crate::classify::{symbol_zero_set, Sigma};
use crate::conjugate::ConjugationPair;
use crate::mixedfft::{fit_slope, Field, HalfSpectrum};
use crate::torus_ode::{Branch, GaussLegendre};
use crate::trigfun::smooth_step;
use crate::{CylinderGrid, Error, OperatorSpec, Result, TorusFunction, C64};

const TWO_PI: f64 = 2.0 * PI;

/// Residual bound on `|k₀ + c₀ξ₀ − iq₀|` for a zero of the symbol.
pub const ZERO_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    PlaneWave { k0: i64, xi0: f64 },
    KernelElement { xi0: f64 },
    SignChangeBump,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Falsifies hypoellipticity; requires an empty symbol zero set.
    Sgh,
    /// Falsifies solvability; the spectral cutoff vanishes near the
    /// singular frequencies so `f` stays compatible.
    Gs,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BumpParameters {
    pub variant: Variant,
    /// `plus` uses `B = min ∫_t^{t+s} b`, `minus` uses `B̃ = max ∫_{t−s}^t b`.
    pub branch: Branch,
    /// Evaluation point `t₀` (or `t₁`).
    pub t0: f64,
    /// Window length `s₀` (or `s₁`) at the extremum.
    pub s0: f64,
    /// The extremal windowed integral.
    pub extremum: f64,
    /// Centre of the bump, `t₀ + s₀` (or `t₁ − s₁`), on the lifted line.
    pub centre: f64,
    /// Support half-width; the plateau has half-width `δ/2`.
    pub delta: f64,
    /// Radius around singular frequencies where the spectral cutoff vanishes.
    pub zeta_radius: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WitnessRecipe {
    pub kind: WitnessKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bump: Option<BumpParameters>,
}

/// `v = (1/2π) exp{−∫₀ᵗ(iξ₀c + q)} e^{iξ₀x}` on the grid.
pub fn zero_symbol_witness(
    op: &OperatorSpec,
    grid: CylinderGrid,
    k0: i64,
    xi0: f64,
) -> Result<(Field, WitnessRecipe)> {
    let sym = C64::new(k0 as f64, 0.0) + op.c0() * xi0 - C64::new(0.0, 1.0) * op.q0();
    if sym.norm() >= ZERO_TOL {
        return Err(Error::Precondition(format!(
            "(k0, xi0) = ({k0}, {xi0}) is not a zero of the symbol (|k + c0 xi - i q0| = {:e}); v would not be periodic",
            sym.norm()
        )));
    }
    let m = xi0 / grid.dxi();
    if (m - m.round()).abs() > 1e-9 || xi0.abs() >= grid.xi_nyquist() {
        return Err(Error::Precondition(format!(
            "xi0 = {xi0} is not a frequency of the grid"
        )));
    }
    let phase = op
        .c()
        .scale(C64::new(0.0, xi0))
        .add(op.q());
    let rows: Vec<C64> = grid
        .ts()
        .iter()
        .map(|&t| (-phase.integral_from_zero(t)).exp() / TWO_PI)
        .collect();
    let v = Field::from_fn(grid, |_, x| C64::from_polar(1.0, xi0 * x));
    let v = v.map(|i, _, z| z * rows[i]);
    let constant = op.c().k_max() == 0 && op.q().k_max() == 0;
    let kind = if constant {
        WitnessKind::PlaneWave { k0, xi0 }
    } else {
        WitnessKind::KernelElement { xi0 }
    };
    Ok((v, WitnessRecipe { kind, bump: None }))
}

/// Bump equal to 1 on `|d| ≤ δ/2` and 0 for `|d| ≥ δ`.
pub fn plateau_bump(d: f64, delta: f64) -> f64 {
    smooth_step((delta - d.abs()) / (0.5 * delta))
}

/// Newton refinement of a critical point of a smooth function of `(t, s)`.
fn newton_polish(
    start: (f64, f64),
    value: impl Fn(f64, f64) -> f64,
    grad: impl Fn(f64, f64) -> (f64, f64),
    hess: impl Fn(f64, f64) -> (f64, f64, f64),
    better: impl Fn(f64, f64) -> bool,
) -> (f64, f64, f64) {
    let (mut t, mut s) = start;
    let mut v = value(t, s);
    for _ in 0..50 {
        let (gt, gs) = grad(t, s);
        let (htt, hts, hss) = hess(t, s);
        let det = htt * hss - hts * hts;
        if det.abs() < 1e-14 {
            break;
        }
        let dt = (hss * gt - hts * gs) / det;
        let ds = (htt * gs - hts * gt) / det;
        let (nt, ns) = (t - dt, s - ds);
        if !(ns > 0.0 && ns < TWO_PI) {
            break;
        }
        let nv = value(nt, ns);
        if better(v, nv) && (nv - v).abs() > 1e-15 {
            break;
        }
        t = nt;
        s = ns;
        v = nv;
        if dt.hypot(ds) < 1e-14 {
            break;
        }
    }
    (t, s, v)
}

/// The sign-change construction with its closed-form evaluator.
#[derive(Clone, Debug)]
pub struct SignChangeWitness {
    /// `f̂` of the original operator on the grid.
    pub f_hat: HalfSpectrum,
    pub recipe: WitnessRecipe,
    params: BumpParameters,
    running: TorusFunction,
    sigma: Sigma,
}

impl SignChangeWitness {
    pub fn params(&self) -> &BumpParameters {
        &self.params
    }

    fn window(&self, s: f64) -> f64 {
        let p = &self.params;
        let big_p = |t: f64| self.running.integral_from_zero(t).re;
        match p.branch {
            Branch::Plus => big_p(p.t0 + s) - big_p(p.t0),
            Branch::Minus => big_p(p.t0) - big_p(p.t0 - s),
        }
    }

    fn cutoffs(&self, xi: f64) -> f64 {
        smooth_step(xi) * zeta(self.sigma, self.params.zeta_radius, xi)
    }

    /// `û(t₀,ξ)` of the reduced problem (real and non-negative):
    /// `ψ(ξ)ζ(ξ)∫ e^{ξ(B − G(t₀,s))} φ(t₀+s) ds`, mirrored for the minus branch.
    pub fn eval_u(&self, xi: f64) -> f64 {
        let cut = self.cutoffs(xi);
        if cut == 0.0 {
            return 0.0;
        }
        let p = &self.params;
        let rule = GaussLegendre::new(8);
        let (lo, hi) = (p.s0 - p.delta, p.s0 + p.delta);
        let cells = 2000;
        let h = (hi - lo) / cells as f64;
        let mut acc = 0.0;
        for m in 0..cells {
            let a = lo + h * m as f64;
            for (s, w) in rule.on(a, a + h) {
                let gap = match p.branch {
                    Branch::Plus => p.extremum - self.window(s),
                    Branch::Minus => self.window(s) - p.extremum,
                };
                acc += w * (xi * gap).exp() * plateau_bump(s - p.s0, p.delta);
            }
        }
        cut * acc
    }

    /// Log-log fit of `û(t₀,ξ)` over `count` log-spaced points in `[lo, hi]`.
    pub fn decay_fit(&self, lo: f64, hi: f64, count: usize) -> DecayFit {
        let xis: Vec<f64> = (0..count)
            .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
            .collect();
        let values: Vec<f64> = xis.iter().map(|&x| self.eval_u(x)).collect();
        let pts: Vec<(f64, f64)> = xis.iter().zip(&values).map(|(x, v)| (x.ln(), v.ln())).collect();
        let k_min = xis
            .iter()
            .zip(&values)
            .map(|(x, v)| v * x.sqrt())
            .fold(f64::INFINITY, f64::min);
        DecayFit {
            exponent: fit_slope(&pts),
            k_min,
            xis,
            values,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    /// Fitted power of `ξ`.
    pub exponent: f64,
    /// `min û(t₀,ξ)·√ξ` over the sample.
    pub k_min: f64,
    pub xis: Vec<f64>,
    pub values: Vec<f64>,
}

fn zeta(sigma: Sigma, radius: Option<f64>, xi: f64) -> f64 {
    match radius {
        None => 1.0,
        Some(r) => smooth_step((sigma.distance(xi) - r) / r),
    }
}

/// Builds the sign-change witness on `grid`.
pub fn sign_change_witness(
    op: &OperatorSpec,
    variant: Variant,
    grid: CylinderGrid,
) -> Result<SignChangeWitness> {
    let b = op.b().clone();
    if b.changes_sign()?.is_none() {
        return Err(Error::Precondition("b does not change sign".into()));
    }
    let sigma = symbol_zero_set(op.c0(), op.q0());
    let zeta_radius = match variant {
        Variant::Sgh => {
            if !sigma.is_empty() {
                return Err(Error::Precondition(
                    "symbol zero set is nonempty (hypoellipticity already fails there)".into(),
                ));
            }
            None
        }
        Variant::Gs => match sigma {
            Sigma::All => {
                return Err(Error::Precondition(
                    "every frequency is singular: the non-resonant set is empty".into(),
                ))
            }
            Sigma::Lattice { a0, .. } => Some(0.25f64.min(0.2 / a0.abs())),
            _ => Some(0.25),
        },
    };

    let w = b.windowed_integral_extrema()?;
    let db = b.derivative();
    let bv = |t: f64| b.eval(t).re;
    let dbv = |t: f64| db.eval(t).re;
    let big_p = |t: f64| b.integral_from_zero(t).re;
    let b0 = op.b0();
    let (branch, t0, s0, extremum) = if b0 >= 0.0 {
        let (t, s, v) = newton_polish(
            (w.t0, w.s0),
            |t, s| big_p(t + s) - big_p(t),
            |t, s| (bv(t + s) - bv(t), bv(t + s)),
            |t, s| (dbv(t + s) - dbv(t), dbv(t + s), dbv(t + s)),
            |old, new| new > old,
        );
        if v <= w.b_min {
            (Branch::Plus, t, s, v)
        } else {
            (Branch::Plus, w.t0, w.s0, w.b_min)
        }
    } else {
        let (t, s, v) = newton_polish(
            (w.t1, w.s1),
            |t, s| big_p(t) - big_p(t - s),
            |t, s| (bv(t) - bv(t - s), bv(t - s)),
            |t, s| (dbv(t) - dbv(t - s), dbv(t - s), -dbv(t - s)),
            |old, new| new < old,
        );
        if v >= w.b_max {
            (Branch::Minus, t, s, v)
        } else {
            (Branch::Minus, w.t1, w.s1, w.b_max)
        }
    };
    if !(s0 > 0.0 && s0 < TWO_PI) {
        return Err(Error::Precondition(format!(
            "extremal window length {s0} is not interior to (0, 2π)"
        )));
    }
    let delta = 0.9 * s0.min(TWO_PI - s0);
    let centre = match branch {
        Branch::Plus => t0 + s0,
        Branch::Minus => t0 - s0,
    };
    let params = BumpParameters {
        variant,
        branch,
        t0,
        s0,
        extremum,
        centre,
        delta,
        zeta_radius,
    };

    let (c0, q0, a0) = (op.c0(), op.q0(), op.a0());
    let i = C64::new(0.0, 1.0);
    let reduced = HalfSpectrum::from_fn(grid, |t, xi| {
        let cut = smooth_step(xi) * zeta(sigma, zeta_radius, xi);
        if cut == 0.0 {
            return C64::new(0.0, 0.0);
        }
        // 2π(ξc₀ − iq₀)·i = 2πθ₀
        let two_pi_theta0 = (c0 * xi - i * q0) * i * TWO_PI;
        match branch {
            Branch::Plus => {
                let tau = t0 + (t - t0).rem_euclid(TWO_PI);
                let phi = plateau_bump(tau - centre, delta);
                if phi == 0.0 {
                    return C64::new(0.0, 0.0);
                }
                let lag = tau - t0;
                (two_pi_theta0.exp() - 1.0)
                    * (extremum * xi).exp()
                    * phi
                    * (C64::new(0.0, -xi * a0 * lag) - q0 * lag).exp()
                    * cut
            }
            Branch::Minus => {
                let tau = t0 - (t0 - t).rem_euclid(TWO_PI);
                let phi = plateau_bump(tau - centre, delta);
                if phi == 0.0 {
                    return C64::new(0.0, 0.0);
                }
                let lag = t0 - tau;
                (1.0 - (-two_pi_theta0).exp())
                    * (-extremum * xi).exp()
                    * phi
                    * (C64::new(0.0, xi * a0 * lag) + q0 * lag).exp()
                    * cut
            }
        }
    });
    let f_hat = ConjugationPair::for_operator(op).apply_half(&reduced, -1)?;
    Ok(SignChangeWitness {
        f_hat,
        recipe: WitnessRecipe {
            kind: WitnessKind::SignChangeBump,
            bump: Some(params),
        },
        params,
        running: b,
        sigma,
    })
}

/// Default `λ` values for [`laplace_lower_bound_check`].
pub const LAMBDAS: [f64; 4] = [10.0, 1e2, 1e3, 1e4];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LaplaceEntry {
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LaplaceReport {
    /// `sup |ψ''/2|` on the window (1 when it vanishes).
    pub m: f64,
    pub entries: Vec<LaplaceEntry>,
    pub holds: bool,
}

/// [`laplace_lower_bound_check_fn`] for a function on the circle.
pub fn laplace_lower_bound_check(
    psi: &TorusFunction,
    s0: f64,
    delta: f64,
    lambdas: &[f64],
) -> Result<LaplaceReport> {
    if !psi.is_real() {
        return Err(Error::NotReal(psi.real_asymmetry()));
    }
    let d1 = psi.derivative();
    let d2 = d1.derivative();
    laplace_lower_bound_check_fn(
        |s| psi.eval(s).re,
        |s| d1.eval(s).re,
        |s| d2.eval(s).re,
        s0,
        delta,
        lambdas,
    )
}

/// Checks `∫_{s₀−δ}^{s₀+δ} e^{−λψ(s)} ds ≥ √π·erf(δ)/√(λM)` for each `λ`,
/// given `ψ`, `ψ'`, `ψ''`.
pub fn laplace_lower_bound_check_fn(
    value: impl Fn(f64) -> f64,
    d1: impl Fn(f64) -> f64,
    d2: impl Fn(f64) -> f64,
    s0: f64,
    delta: f64,
    lambdas: &[f64],
) -> Result<LaplaceReport> {
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!("delta = {delta} must be positive")));
    }
    if value(s0).abs() > 1e-8 {
        return Err(Error::Precondition(format!("psi(s0) = {:e} is not 0", value(s0))));
    }
    if d1(s0).abs() > 1e-8 {
        return Err(Error::Precondition(format!("psi'(s0) = {:e} is not 0", d1(s0))));
    }
    let samples = 4001;
    let pts: Vec<f64> = (0..samples)
        .map(|k| s0 - delta + 2.0 * delta * k as f64 / (samples - 1) as f64)
        .collect();
    let floor = pts.iter().map(|&s| value(s)).fold(f64::INFINITY, f64::min);
    if floor < -1e-12 {
        return Err(Error::Precondition(format!("psi is negative on the window ({floor:e})")));
    }
    let m_raw = pts.iter().map(|&s| 0.5 * d2(s).abs()).fold(0.0, f64::max);
    let m = if m_raw == 0.0 { 1.0 } else { m_raw };
    if let Some(&lam) = lambdas.iter().find(|&&l| l * m <= 1.0) {
        return Err(Error::Precondition(format!("lambda * M = {} is not above 1", lam * m)));
    }
    let rule = GaussLegendre::new(8);
    let cells = 4000;
    let h = 2.0 * delta / cells as f64;
    let gauss = PI.sqrt() * erf(delta);
    let entries: Vec<LaplaceEntry> = lambdas
        .iter()
        .map(|&lambda| {
            let mut lhs = 0.0;
            for k in 0..cells {
                let a = s0 - delta + h * k as f64;
                for (s, w) in rule.on(a, a + h) {
                    lhs += w * (-lambda * value(s)).exp();
                }
            }
            let rhs = gauss / (lambda * m).sqrt();
            LaplaceEntry {
                lambda,
                lhs,
                rhs,
                ratio: lhs / rhs,
            }
        })
        .collect();
    let holds = entries.iter().all(|e| e.ratio >= 1.0);
    Ok(LaplaceReport { m, entries, holds })
}

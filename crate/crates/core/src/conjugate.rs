//! The automorphisms `Ψ_a`, `Ψ_q` that freeze `a = Re c` and `q` at their means.
//!
//! With `A = ∫₀ᵗ a − a₀t` and `Q = ∫₀ᵗ q − q₀t`:
//!
//! * `(Ψ_a u)^(t,ξ) = e^{iξA(t)} û(t,ξ)`, i.e. `Ψ_a u(t,x) = u(t, x + A(t))`;
//! * `(Ψ_q u)(t,x) = e^{Q(t)} u(t,x)`.
//!
//! `Ψ = Ψ_a∘Ψ_q` satisfies `L_r∘Ψ = Ψ∘L` where
//! `L_r = ∂t + (a₀ + i b(t))∂x + q₀`.

use crate::mixedfft::{Field, HalfSpectrum, Transforms};
use crate::{Error, OperatorSpec, Result, TorusFunction, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct ConjugationPair {
    /// `A`, real.
    pub a_shift: TorusFunction,
    /// `Q`, complex.
    pub q_shift: TorusFunction,
}

impl ConjugationPair {
    pub fn for_operator(op: &OperatorSpec) -> Self {
        ConjugationPair {
            a_shift: op.a().antiderivative_zero_mean(),
            q_shift: op.q().antiderivative_zero_mean(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.a_shift.is_zero(1e-15) && self.q_shift.is_zero(1e-15)
    }

    /// `Ψ^{sign}` on a partial transform.
    pub fn apply_half(&self, u: &HalfSpectrum, sign: i32) -> Result<HalfSpectrum> {
        let u = psi_q_half(u, &self.q_shift, sign);
        psi_a(&u, &self.a_shift, sign)
    }

    /// `Ψ^{sign}` on a field, through the periodic `x` transform.
    pub fn apply_field(&self, tr: &Transforms, u: &Field, sign: i32) -> Result<Field> {
        let hat = tr.forward_x_unchecked(u);
        Ok(tr.inverse_x(&self.apply_half(&hat, sign)?))
    }
}

/// Multiplies `û(t,ξ)` by `e^{i·sign·ξA(t)}`.
pub fn psi_a(u: &HalfSpectrum, a_shift: &TorusFunction, sign: i32) -> Result<HalfSpectrum> {
    if !a_shift.is_real() {
        return Err(Error::NotReal(a_shift.real_asymmetry()));
    }
    let g = u.grid;
    let shifts: Vec<f64> = (0..g.n_t).map(|i| a_shift.eval(g.t(i)).re).collect();
    let s = sign.signum() as f64;
    Ok(u.map(|i, j, v| v * C64::from_polar(1.0, s * g.xi(j) * shifts[i])))
}

fn row_factors(q_shift: &TorusFunction, n_t: usize, dt: f64, sign: i32) -> Vec<C64> {
    let s = sign.signum() as f64;
    (0..n_t)
        .map(|i| (q_shift.eval(dt * i as f64) * s).exp())
        .collect()
}

/// Multiplies row `t` by `e^{sign·Q(t)}`.
pub fn psi_q_field(u: &Field, q_shift: &TorusFunction, sign: i32) -> Field {
    let f = row_factors(q_shift, u.grid.n_t, u.grid.dt(), sign);
    u.map(|i, _, v| v * f[i])
}

/// Multiplies row `t` by `e^{sign·Q(t)}`.
pub fn psi_q_half(u: &HalfSpectrum, q_shift: &TorusFunction, sign: i32) -> HalfSpectrum {
    let f = row_factors(q_shift, u.grid.n_t, u.grid.dt(), sign);
    u.map(|i, _, v| v * f[i])
}

/// `‖L_r(Ψu) − Ψ(Lu)‖_∞`.
pub fn intertwine_check(tr: &Transforms, op: &OperatorSpec, u: &Field) -> Result<f64> {
    let psi = ConjugationPair::for_operator(op);
    let lhs = tr.spectral_apply_periodic(&op.reduced(), &psi.apply_field(tr, u, 1)?);
    let rhs = psi.apply_field(tr, &tr.spectral_apply_periodic(op, u), 1)?;
    Ok(lhs.max_diff(&rhs))
}

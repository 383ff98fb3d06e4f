//! Admissibility monitors, symmetrizer energies and energy growth bounds.
//!
//! The energy of a perturbation `U = (zeta, v)` around a reference state `U_ref`
//! is
//!
//! ```text
//! E^s(U)^2 = ( L^s zeta, (Q0 + eps^2 Q1)/f [U_ref] L^s zeta ) + ( L^s v, T[U_ref] L^s v )
//! ```
//!
//! with `L = (1 - d_x^2)^{1/2}`. It is equivalent to the `X^s` norm
//! `|zeta|^2_{H^s} + |v|^2_{H^s} + mu |d_x v|^2_{H^s}` as long as the depth,
//! ellipticity and symmetrizer-positivity conditions hold on `U_ref`.

use ndarray::Array1;
use rustfft::num_complex::Complex64;

use crate::dynamics::Model;
use crate::error::{Error, Result};
use crate::fields::{argmin, DerivedFields, State};
use crate::regime::RegimeParams;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Thresholds {
    pub h01: f64,
    pub h02: f64,
    pub h03: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            h01: 0.05,
            h02: 0.05,
            h03: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConditionReport {
    pub min_h1: f64,
    pub min_h2: f64,
    pub min_q1: f64,
    pub min_q2: f64,
    pub min_h3: f64,
    pub ok_h1: bool,
    pub ok_h2: bool,
    pub ok_h3: bool,
    pub first_violation_location: Option<usize>,
}

impl ConditionReport {
    pub fn ok(&self) -> bool {
        self.ok_h1 && self.ok_h2 && self.ok_h3
    }
}

/// Pointwise minima of the depths, of `q1`, `q2` and of `Q0 + eps^2 Q1`, the
/// latter using the state itself as reference.
pub fn check_conditions(model: &Model, state: &State, th: &Thresholds) -> ConditionReport {
    let df = DerivedFields::evaluate(
        &model.grid,
        state,
        &model.bathy,
        &model.params,
        &model.coeffs,
    );
    let weight = df.h3_weight();
    let (_, min_h1) = argmin(&df.h1);
    let (_, min_h2) = argmin(&df.h2);
    let (_, min_q1) = argmin(&df.q1);
    let (_, min_q2) = argmin(&df.q2);
    let (_, min_h3) = argmin(&weight);
    let ok_h1 = min_h1.min(min_h2) >= th.h01;
    let ok_h2 = min_q1.min(min_q2) >= th.h02;
    let ok_h3 = min_h3 >= th.h03;

    let bad = |x: f64, t: f64| !(x >= t);
    let first_violation_location = (0..model.grid.n()).find(|&j| {
        bad(df.h1[j], th.h01)
            || bad(df.h2[j], th.h01)
            || bad(df.q1[j], th.h02)
            || bad(df.q2[j], th.h02)
            || bad(weight[j], th.h03)
    });

    ConditionReport {
        min_h1,
        min_h2,
        min_q1,
        min_q2,
        min_h3,
        ok_h1,
        ok_h2,
        ok_h3,
        first_violation_location,
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EnergyReport {
    pub t: f64,
    pub e0: f64,
    pub es: f64,
    pub xs: f64,
    pub mass: f64,
}

fn symmetrizer_energy(
    model: &Model,
    df: &DerivedFields,
    zeta: &crate::Field,
    v: &crate::Field,
) -> f64 {
    let grid = &model.grid;
    let n = grid.n();
    let weight = Array1::from_shape_fn(n, |j| (df.q0[j] + df.q1bare[j]) / df.f[j]);
    let op = crate::elliptic::TOperator::from_derived(grid, df, &model.params, &model.coeffs)
        .expect("derived fields live on the model grid");
    let ez = grid.inner(zeta, &(&weight * zeta));
    let ev = grid.inner(v, &op.apply(v));
    (ez + ev).max(0.0).sqrt()
}

/// `E^0`, `E^s`, the `X^s` norm and the mass of `state`, with the symmetrizer
/// frozen at `state_ref`. Fails if `state_ref` violates H1 or H2, or if the
/// symmetrizer weight `Q0 + eps^2 Q1` is not positive there (H3).
pub fn energy(model: &Model, state_ref: &State, state: &State, s: f64) -> Result<EnergyReport> {
    let df = model.derive(state_ref)?;
    let (index, value) = argmin(&df.h3_weight());
    if !(value > 0.0) {
        return Err(Error::SymmetrizerViolation { value, index });
    }
    Ok(energy_with(model, &df, state, s))
}

/// As [`energy`] without admissibility checks on the reference state.
pub(crate) fn energy_unchecked(
    model: &Model,
    state_ref: &State,
    state: &State,
    s: f64,
) -> EnergyReport {
    let df = DerivedFields::evaluate(
        &model.grid,
        state_ref,
        &model.bathy,
        &model.params,
        &model.coeffs,
    );
    energy_with(model, &df, state, s)
}

fn energy_with(model: &Model, df: &DerivedFields, state: &State, s: f64) -> EnergyReport {
    let grid = &model.grid;
    let e0 = symmetrizer_energy(model, df, &state.zeta, &state.v);
    let es = if s == 0.0 {
        e0
    } else {
        let lz = grid.lambda_s(&state.zeta, s);
        let lv = grid.lambda_s(&state.v, s);
        symmetrizer_energy(model, df, &lz, &lv)
    };
    EnergyReport {
        t: state.t,
        e0,
        es,
        xs: xs_norm(model, state, s),
        mass: grid.integral(&state.zeta),
    }
}

/// `|zeta|^2_{H^s} + |v|^2_{H^s} + mu |d_x v|^2_{H^s}`, square-rooted.
pub fn xs_norm(model: &Model, state: &State, s: f64) -> f64 {
    let grid = &model.grid;
    let hz = grid.sobolev_norm(&state.zeta, s);
    let hv = grid.sobolev_norm(&state.v, s);
    let hdv = grid.sobolev_norm(&grid.spectral_derivative(&state.v), s);
    (hz * hz + hv * hv + model.params.mu * hdv * hdv).sqrt()
}

/// Constant `c >= 1` with `E^0 / c <= |U|_{X^0} <= c E^0`, built from the
/// extrema of the coefficient fields of the reference state.
///
/// The discrete operator sees the forward difference, whose symbol
/// `2 sin(k dx / 2) / dx` lies between `(2/pi) |k|` and `|k|`.
pub fn norm_equivalence_constant(model: &Model, df: &DerivedFields) -> f64 {
    let n = model.grid.n();
    let nu = model.coeffs.nu;
    let weight = Array1::from_shape_fn(n, |j| (df.q0[j] + df.q1bare[j]) / df.f[j]);
    let (lo_w, hi_w) = extrema(&weight);
    let (lo_q1, hi_q1) = extrema(&df.q1);
    let (lo_q2, hi_q2) = extrema(&df.q2);
    let lower = lo_w
        .min(lo_q1)
        .min(nu * lo_q2 * 4.0 / (std::f64::consts::PI.powi(2)));
    let upper = hi_w.max(hi_q1).max(nu * hi_q2);
    (1.0 / lower).max(upper).sqrt()
}

fn extrema(f: &crate::Field) -> (f64, f64) {
    f.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Result of fitting `E0(t) <= exp(m lambda t) (E0(0) + C m t)`, `m = max(eps, beta)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GrowthFit {
    pub lambda_fit: f64,
    pub c_fit: f64,
    pub ok: bool,
}

/// Smallest `lambda >= 0` (and, when the initial energy vanishes, smallest
/// `C >= 0` with `lambda = 0`) for which the exponential bound holds at every
/// sample of the series.
pub fn growth_bound_fit(
    series: &[EnergyReport],
    params: &RegimeParams,
    lambda_cap: f64,
) -> Result<GrowthFit> {
    let first = series.first().ok_or(Error::EmptySeries)?;
    let m = params.nonlinearity();
    let (t0, e_init) = (first.t, first.e0);
    let mut lambda_fit = 0.0f64;
    let mut c_fit = 0.0f64;
    for r in &series[1..] {
        let elapsed = r.t - t0;
        if r.e0 <= e_init || !(elapsed > 0.0) {
            continue;
        }
        if m == 0.0 {
            lambda_fit = f64::INFINITY;
        } else if e_init > 0.0 {
            lambda_fit = lambda_fit.max((r.e0 / e_init).ln() / (m * elapsed));
        } else {
            c_fit = c_fit.max(r.e0 / (m * elapsed));
        }
    }
    Ok(GrowthFit {
        lambda_fit,
        c_fit,
        ok: lambda_fit <= lambda_cap,
    })
}

/// Phase speed of the Fourier mode `k` (mode number) of the interface, measured
/// by following the unwrapped phase of its DFT coefficient over `[0, t_end]`.
///
/// The initial data is the linear right-going wave `zeta = a cos(k x)`,
/// `v = a c (gamma + delta) cos(k x)` with `c` the continuum linear speed.
pub fn measure_phase_speed(
    model: &Model,
    k: usize,
    amplitude: f64,
    t_end: f64,
    steps: usize,
) -> Result<f64> {
    let grid = &model.grid;
    let p = &model.params;
    let kk = 2.0 * std::f64::consts::PI * k as f64 / grid.length();
    let c_lin = linear_phase_speed(p, model.coeffs.nu, kk);
    let zeta = grid.sample(|x| amplitude * (kk * x).cos());
    let v = grid.sample(|x| amplitude * c_lin * (p.gamma + p.delta) * (kk * x).cos());
    let mut state = State::new(grid, 0.0, zeta, v)?;

    let phase = |s: &State| -> f64 {
        let c: Complex64 = s
            .zeta
            .iter()
            .enumerate()
            .map(|(j, &z)| Complex64::from_polar(z, -kk * grid.x(j)))
            .sum();
        c.arg()
    };
    let dt = t_end / steps as f64;
    let mut last = phase(&state);
    let mut unwrapped = 0.0;
    for _ in 0..steps {
        state = model.step_rk4(&state, dt)?;
        let ph = phase(&state);
        let mut d = ph - last;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        unwrapped += d;
        last = ph;
    }
    Ok(-unwrapped / (kk * t_end))
}

/// Linear phase speed about the flat rest state,
/// `c^2 = (gamma + delta) f(0) / (1 + mu nu k^2)` with `(gamma + delta) f(0) = 1`.
pub fn linear_phase_speed(p: &RegimeParams, nu: f64, k: f64) -> f64 {
    let f0 = (1.0 / p.delta) / (1.0 + p.gamma / p.delta);
    ((p.gamma + p.delta) * f0 / (1.0 + p.mu * nu * k * k)).sqrt()
}

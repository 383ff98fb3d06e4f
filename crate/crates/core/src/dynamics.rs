//! Time derivative of the model in primitive and quasilinear form, the RK4
//! integrator and full simulations.
//!
//! The primitive form advances
//!
//! ```text
//! d_t zeta = -d_x(f v)
//! d_t v    = T^{-1}[ -(gamma+delta) q1 zeta_x - eps q1 d_x(q3 v^2)
//!                    - mu eps kappa d_x((v_x)^2) + mu beta omega zeta_x b'' ]
//!            - (eps/2) varsigma d_x(v^2)
//! ```
//!
//! with one elliptic solve per evaluation. The quasilinear form
//! `d_t U = -A[U] d_x U - B[U]` is kept for cross-validation: the two are equal
//! in the continuum, so their discrete difference is pure truncation error.

use ndarray::Array1;

use crate::diagnostics::{self, ConditionReport, EnergyReport};
use crate::elliptic::{qfrak_apply, TOperator};
use crate::error::{Condition, Error, Result};
use crate::fields::{derive, Bathymetry, DerivedFields, State};
use crate::grid::{Field, PeriodicGrid};
use crate::regime::{compute_coefficients, ModelCoefficients, RegimeParams};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub dzeta: Field,
    pub dv: Field,
}

/// Everything that stays fixed during a run: grid, bottom, parameters and the
/// derived constants.
#[derive(Debug, Clone)]
pub struct Model {
    pub grid: PeriodicGrid,
    pub bathy: Bathymetry,
    pub params: RegimeParams,
    pub coeffs: ModelCoefficients,
}

impl Model {
    pub fn new(grid: PeriodicGrid, bathy: Bathymetry, params: RegimeParams) -> Result<Self> {
        grid.check(bathy.b())?;
        let coeffs = compute_coefficients(&params)?;
        Ok(Model {
            grid,
            bathy,
            params,
            coeffs,
        })
    }

    pub fn derive(&self, state: &State) -> Result<DerivedFields> {
        derive(&self.grid, state, &self.bathy, &self.params, &self.coeffs)
    }

    pub fn t_operator(&self, df: &DerivedFields) -> Result<TOperator> {
        TOperator::from_derived(&self.grid, df, &self.params, &self.coeffs)
    }

    /// Tendency of the primitive (flux) form; drives the time stepping.
    pub fn rhs_primitive(&self, state: &State) -> Result<Tendency> {
        let df = self.derive(state)?;
        self.rhs_primitive_with(state, &df)
    }

    fn rhs_primitive_with(&self, state: &State, df: &DerivedFields) -> Result<Tendency> {
        let grid = &self.grid;
        let n = grid.n();
        let p = &self.params;
        let c = &self.coeffs;
        let (zeta, v) = (&state.zeta, &state.v);
        let d2b = self.bathy.d2b();

        let flux = Array1::from_shape_fn(n, |j| df.f[j] * v[j]);
        let dzeta = -grid.d1(&flux);

        let zx = grid.d1(zeta);
        let vx = grid.d1(v);
        let q3v2 = Array1::from_shape_fn(n, |j| df.q3[j] * v[j] * v[j]);
        let dq3v2 = grid.d1(&q3v2);
        let vx2 = vx.mapv(|a| a * a);
        let dvx2 = grid.d1(&vx2);
        let v2 = v.mapv(|a| a * a);
        let dv2 = grid.d1(&v2);

        let gd = p.gamma + p.delta;
        let mek = p.mu * p.eps * c.kappa;
        let mbo = p.mu * p.beta * c.omega;
        let rhs = Array1::from_shape_fn(n, |j| {
            -gd * df.q1[j] * zx[j] - p.eps * df.q1[j] * dq3v2[j] - mek * dvx2[j]
                + mbo * zx[j] * d2b[j]
        });
        let accel = self.t_operator(df)?.solve(&rhs)?;
        let half = 0.5 * p.eps * c.varsigma;
        let dv = Array1::from_shape_fn(n, |j| accel[j] - half * dv2[j]);
        Ok(Tendency { dzeta, dv })
    }

    /// Tendency assembled literally from `-A[U] d_x U - B[U]`.
    pub fn rhs_quasilinear(&self, state: &State) -> Result<Tendency> {
        let grid = &self.grid;
        let n = grid.n();
        let p = &self.params;
        let c = &self.coeffs;
        let df = self.derive(state)?;
        let (zeta, v) = (&state.zeta, &state.v);
        let db = self.bathy.db();

        let zx = grid.d1(zeta);
        let vx = grid.d1(v);

        let dzeta = Array1::from_shape_fn(n, |j| {
            -p.eps * df.fp[j] * v[j] * zx[j] - df.f[j] * vx[j] + p.beta * db[j] * df.g[j] * v[j]
        });

        let qf = qfrak_apply(grid, &df, v, &vx, p, c);
        let gamma = p.gamma;
        let rhs = Array1::from_shape_fn(n, |j| {
            let (h1, h2) = (df.h1[j], df.h2[j]);
            let den = h1 + gamma * h2;
            let bottom = p.eps * gamma * p.beta * df.q1[j] * h1 * (h1 + h2) * v[j] * v[j] * db[j]
                / (den * den * den);
            df.q0[j] * zx[j] + df.q1bare[j] * zx[j] + p.eps * qf[j] + bottom
        });
        let accel = self.t_operator(&df)?.solve(&rhs)?;
        let dv = Array1::from_shape_fn(n, |j| -accel[j] - p.eps * c.varsigma * v[j] * vx[j]);
        Ok(Tendency { dzeta, dv })
    }

    /// Largest characteristic speed estimate
    /// `max_j sqrt(Q0 f / q1) + eps (|varsigma v| + |f' v|)`.
    pub fn max_speed(&self, state: &State, df: &DerivedFields) -> Result<f64> {
        let eps = self.params.eps;
        let vs = self.coeffs.varsigma;
        let mut c_max = 0.0f64;
        for j in 0..self.grid.n() {
            let v = state.v[j];
            let c = (df.q0[j] * df.f[j] / df.q1[j]).sqrt()
                + eps * ((vs * v).abs() + (df.fp[j] * v).abs());
            if !c.is_finite() {
                return Err(Error::NonFiniteSpeed);
            }
            c_max = c_max.max(c);
        }
        if !(c_max > 0.0) {
            return Err(Error::NonFiniteSpeed);
        }
        Ok(c_max)
    }

    /// `cfl * dx / c_max`.
    pub fn cfl_dt(&self, state: &State, df: &DerivedFields, cfl: f64) -> Result<f64> {
        Ok(cfl * self.grid.dx() / self.max_speed(state, df)?)
    }

    /// One classical RK4 step of the primitive form.
    pub fn step_rk4(&self, state: &State, dt: f64) -> Result<State> {
        let stage = |base: &State, k: &Tendency, h: f64| State {
            t: base.t + h,
            zeta: &base.zeta + &(&k.dzeta * h),
            v: &base.v + &(&k.dv * h),
        };
        let k1 = self.rhs_primitive(state)?;
        let k2 = self.rhs_primitive(&stage(state, &k1, 0.5 * dt))?;
        let k3 = self.rhs_primitive(&stage(state, &k2, 0.5 * dt))?;
        let k4 = self.rhs_primitive(&stage(state, &k3, dt))?;
        let w = dt / 6.0;
        let n = self.grid.n();
        let zeta = Array1::from_shape_fn(n, |j| {
            state.zeta[j] + w * (k1.dzeta[j] + 2.0 * k2.dzeta[j] + 2.0 * k3.dzeta[j] + k4.dzeta[j])
        });
        let v = Array1::from_shape_fn(n, |j| {
            state.v[j] + w * (k1.dv[j] + 2.0 * k2.dv[j] + 2.0 * k3.dv[j] + k4.dv[j])
        });
        let next = State {
            t: state.t + dt,
            zeta,
            v,
        };
        next.check_finite()?;
        Ok(next)
    }

    /// Integrates with a fixed step count up to `t_end`.
    pub fn integrate_fixed(&self, state: &State, t_end: f64, steps: usize) -> Result<State> {
        let dt = (t_end - state.t) / steps as f64;
        let mut s = state.clone();
        for _ in 0..steps {
            s = self.step_rk4(&s, dt)?;
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    #[serde(rename = "halted_H1")]
    HaltedH1,
    #[serde(rename = "halted_H2")]
    HaltedH2,
    #[serde(rename = "halted_H3")]
    HaltedH3,
    Failed,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::HaltedH1 => "halted_H1",
            RunStatus::HaltedH2 => "halted_H2",
            RunStatus::HaltedH3 => "halted_H3",
            RunStatus::Failed => "failed",
        }
    }

    pub fn from_condition(c: Condition) -> Self {
        match c {
            Condition::H1 => RunStatus::HaltedH1,
            Condition::H2 => RunStatus::HaltedH2,
            Condition::H3 => RunStatus::HaltedH3,
        }
    }
}

/// One line of the diagnostics series.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub energy: EnergyReport,
    pub conditions: ConditionReport,
    pub dt: f64,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub status: RunStatus,
    /// First monitor or integrator error, with the time it occurred.
    pub failure: Option<(f64, Error)>,
    pub t_final: f64,
    pub steps: usize,
    pub snapshots: Vec<State>,
    pub diagnostics: Vec<DiagnosticsRow>,
    pub model: Model,
}

impl RunRecord {
    pub fn final_time(&self) -> f64 {
        self.snapshots.last().map_or(0.0, |s| s.t)
    }

    pub fn energies(&self) -> Vec<EnergyReport> {
        self.diagnostics.iter().map(|r| r.energy.clone()).collect()
    }

    /// `max |mass(t) - mass(0)|` over the recorded series.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.diagnostics.first().map_or(0.0, |r| r.energy.mass);
        self.diagnostics
            .iter()
            .fold(0.0, |m, r| m.max((r.energy.mass - m0).abs()))
    }
}

fn monitor_error(report: &ConditionReport) -> Option<Error> {
    let index = report.first_violation_location.unwrap_or(0);
    if !report.ok_h1 {
        let (layer, value) = if report.min_h1 <= report.min_h2 {
            ("upper", report.min_h1)
        } else {
            ("lower", report.min_h2)
        };
        return Some(Error::DepthViolation {
            layer,
            value,
            index,
        });
    }
    if !report.ok_h2 {
        let (coefficient, value) = if report.min_q1 <= report.min_q2 {
            ("q1", report.min_q1)
        } else {
            ("q2", report.min_q2)
        };
        return Some(Error::EllipticityViolation {
            coefficient,
            value,
            index,
        });
    }
    if !report.ok_h3 {
        return Some(Error::SymmetrizerViolation {
            value: report.min_h3,
            index,
        });
    }
    None
}

/// Runs a scenario up to `T / max(eps, beta)` or until a condition monitor trips.
///
/// Setup errors (bad grid, profiles or parameters) are returned as `Err`;
/// anything that happens during the run ends up in [`RunRecord::failure`].
pub fn simulate(scenario: &Scenario) -> Result<RunRecord> {
    let model = scenario.model()?;
    let initial = scenario.initial_state(&model.grid)?;
    Ok(simulate_from(model, initial, scenario))
}

pub fn simulate_from(model: Model, initial: State, scenario: &Scenario) -> RunRecord {
    let ctl = &scenario.control;
    let t_final = scenario.t_final();
    let stride = ctl.snapshot_stride.max(1);
    let mut record = RunRecord {
        status: RunStatus::Completed,
        failure: None,
        t_final,
        steps: 0,
        snapshots: Vec::new(),
        diagnostics: Vec::new(),
        model,
    };
    let model = record.model.clone();
    let mut state = initial;
    let mut steps = 0usize;

    loop {
        let conditions = diagnostics::check_conditions(&model, &state, &ctl.thresholds);
        if let Some(err) = monitor_error(&conditions) {
            record.status = RunStatus::from_condition(err.condition().unwrap_or(Condition::H1));
            record.failure = Some((state.t, err));
            push_record(&mut record, &model, &state, conditions, 0.0, ctl.s_energy);
            break;
        }
        let planned = model
            .derive(&state)
            .and_then(|df| model.cfl_dt(&state, &df, ctl.cfl));
        let dt_cfl = match planned {
            Ok(dt) => dt,
            Err(e) => {
                record.status = e
                    .condition()
                    .map_or(RunStatus::Failed, RunStatus::from_condition);
                record.failure = Some((state.t, e));
                push_record(&mut record, &model, &state, conditions, 0.0, ctl.s_energy);
                break;
            }
        };
        let remaining = t_final - state.t;
        let done = remaining <= 1e-12 * t_final.max(1.0);
        let dt = if done { dt_cfl } else { dt_cfl.min(remaining) };
        if steps.is_multiple_of(stride) || done {
            push_record(&mut record, &model, &state, conditions, dt, ctl.s_energy);
        }
        if done {
            break;
        }
        match model.step_rk4(&state, dt) {
            Ok(mut next) => {
                if t_final - next.t <= 1e-12 * t_final.max(1.0) {
                    next.t = t_final;
                }
                state = next;
                steps += 1;
            }
            Err(e) => {
                record.status = e
                    .condition()
                    .map_or(RunStatus::Failed, RunStatus::from_condition);
                record.failure = Some((state.t, e));
                break;
            }
        }
    }
    record.steps = steps;
    record
}

fn push_record(
    record: &mut RunRecord,
    model: &Model,
    state: &State,
    conditions: ConditionReport,
    dt: f64,
    s: f64,
) {
    let energy = diagnostics::energy_unchecked(model, state, state, s);
    record.diagnostics.push(DiagnosticsRow {
        energy,
        conditions,
        dt,
    });
    record.snapshots.push(state.clone());
}

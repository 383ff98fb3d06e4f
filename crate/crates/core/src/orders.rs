//! Log-log order studies.
//!
//! Each study produces a residual per rung of a ladder and the least-squares
//! slope of `ln residual` against `ln parameter`:
//!
//! * `QbarExpansion`, `RbarExpansion`: residual of the small-amplitude
//!   expansions of the Green–Naghdi operators under `eps = beta = t`.
//! * `FormEquivalence`: `|rhs_primitive - rhs_quasilinear|_inf` against `dx`.
//! * `Spatial`: self-convergence against the finest grid, against `dx`.
//! * `Temporal`: RK4 self-convergence against a dt-halved reference.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{simulate_from, Model, RunStatus};
use crate::elliptic::{qbar_apply, rbar_apply};
use crate::error::{Error, Result};
use crate::fields::{argmin, Bathymetry, DerivedFields, State};
use crate::grid::{Field, PeriodicGrid};
use crate::regime::{compute_coefficients, RegimeParams};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderTarget {
    QbarExpansion,
    RbarExpansion,
    FormEquivalence,
    Spatial,
    Temporal,
}

impl OrderTarget {
    pub const ALL: [OrderTarget; 5] = [
        OrderTarget::QbarExpansion,
        OrderTarget::RbarExpansion,
        OrderTarget::FormEquivalence,
        OrderTarget::Spatial,
        OrderTarget::Temporal,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            OrderTarget::QbarExpansion => "qbar_expansion",
            OrderTarget::RbarExpansion => "rbar_expansion",
            OrderTarget::FormEquivalence => "form_equivalence",
            OrderTarget::Spatial => "spatial",
            OrderTarget::Temporal => "temporal",
        }
    }

    /// Name of the ladder parameter.
    pub fn parameter(&self) -> &'static str {
        match self {
            OrderTarget::QbarExpansion | OrderTarget::RbarExpansion => "t",
            OrderTarget::FormEquivalence | OrderTarget::Spatial => "dx",
            OrderTarget::Temporal => "dt",
        }
    }
}

/// Ladders and fixed resolutions of the five studies.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OrderConfig {
    /// Values of `t = eps = beta` for the expansion studies.
    pub amplitudes: Vec<f64>,
    pub expansion_n: usize,
    pub form_ns: Vec<usize>,
    pub spatial_ns: Vec<usize>,
    pub temporal_dts: Vec<f64>,
    pub temporal_n: usize,
    /// Seed of the random smooth state used by the form-equivalence study.
    pub seed: u64,
}

impl Default for OrderConfig {
    fn default() -> Self {
        OrderConfig {
            amplitudes: vec![0.2, 0.1, 0.05, 0.025],
            expansion_n: 512,
            form_ns: vec![128, 256, 512, 1024],
            spatial_ns: vec![128, 256, 512, 1024],
            temporal_dts: vec![0.04, 0.02, 0.01, 0.005],
            temporal_n: 256,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OrderStudy {
    pub target: OrderTarget,
    pub ladder: Vec<f64>,
    pub residuals: Vec<f64>,
    pub slope: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 3 || pts.len() != x.len() || x.len() != y.len() {
        return Err(Error::DegenerateLadder { points: pts.len() });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateLadder { points: 1 });
    }
    Ok(sxy / sxx)
}

fn sup(f: &Field) -> f64 {
    f.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Fixed smooth profiles of the expansion harness on `[0, 2 pi)`.
struct ExpansionProfiles {
    grid: PeriodicGrid,
    zeta: Field,
    v: Field,
    bathy: Bathymetry,
}

impl ExpansionProfiles {
    fn new(n: usize) -> Result<Self> {
        let grid = PeriodicGrid::new(2.0 * std::f64::consts::PI, n)?;
        let zeta = grid.sample(|x| x.sin() + 0.5 * (2.0 * x).cos());
        let v = grid.sample(|x| (2.0 * x).cos() + 0.3 + x.sin());
        let b = grid.sample(|x| x.cos() + (3.0 * x).sin() / 3.0);
        let bathy = Bathymetry::from_samples(&grid, b)?;
        Ok(ExpansionProfiles {
            grid,
            zeta,
            v,
            bathy,
        })
    }

    /// Derived fields; only the depths need to be positive here.
    fn derived(&self, params: &RegimeParams) -> Result<DerivedFields> {
        let coeffs = compute_coefficients(params)?;
        let state = State::new(&self.grid, 0.0, self.zeta.clone(), self.v.clone())?;
        let df = DerivedFields::evaluate(&self.grid, &state, &self.bathy, params, &coeffs);
        for (layer, h) in [("upper", &df.h1), ("lower", &df.h2)] {
            let (index, value) = argmin(h);
            if !(value > 0.0) {
                return Err(Error::DepthViolation {
                    layer,
                    value,
                    index,
                });
            }
        }
        Ok(df)
    }

    fn dxx(&self, f: &Field) -> Field {
        self.grid.d1(&self.grid.d1(f))
    }

    /// `d_x(a d_x v)`.
    fn flux(&self, a: &Field) -> Field {
        self.grid.d1(&(a * &self.grid.d1(&self.v)))
    }
}

/// Residual of the second-order expansion of `Qbar` at `eps = beta = t`.
pub fn qbar_expansion_residual(base: &RegimeParams, n: usize, t: f64) -> Result<f64> {
    let pr = ExpansionProfiles::new(n)?;
    let params = base.with_amplitudes(t, t);
    let c = compute_coefficients(&params)?;
    let df = pr.derived(&params)?;
    let q = qbar_apply(&pr.grid, &df, &pr.bathy, &pr.v, &params);

    let b = pr.bathy.b();
    let (zeta, v) = (&pr.zeta, &pr.v);
    let vxx = pr.dxx(v);
    let zxx = pr.dxx(zeta);
    let bxx = pr.dxx(b);
    let fz = pr.flux(zeta);
    let fb = pr.flux(b);
    let gd3 = (params.gamma + params.delta) / 3.0;
    let eps_part = Array1::from_shape_fn(n, |j| {
        (c.theta - c.alpha) * v[j] * zxx[j] + (c.alpha + 2.0 * c.theta) * fz[j]
            - c.theta * zeta[j] * vxx[j]
    });
    let beta_part = Array1::from_shape_fn(n, |j| {
        (c.alpha1 / 2.0 + c.theta1) * v[j] * bxx[j] + (c.alpha1 + 2.0 * c.theta1) * fb[j]
            - c.theta1 * b[j] * vxx[j]
    });
    let approx = Array1::from_shape_fn(n, |j| {
        -c.lambda * vxx[j] - t * gd3 * eps_part[j] + t * gd3 * beta_part[j]
    });
    Ok(sup(&(q - approx)))
}

/// Residual of the leading-order expansion of `Rbar` at `eps = beta = t`.
pub fn rbar_expansion_residual(base: &RegimeParams, n: usize, t: f64) -> Result<f64> {
    let pr = ExpansionProfiles::new(n)?;
    let params = base.with_amplitudes(t, t);
    let c = compute_coefficients(&params)?;
    let df = pr.derived(&params)?;
    let r = rbar_apply(&pr.grid, &df, &pr.bathy, &pr.v, &params);
    let v = &pr.v;
    let vx = pr.grid.d1(v);
    let vxx = pr.dxx(v);
    let approx =
        Array1::from_shape_fn(n, |j| c.alpha * (0.5 * vx[j] * vx[j] + v[j] * vxx[j] / 3.0));
    Ok(sup(&(r - approx)))
}

/// A seeded smooth state built from the three lowest Fourier modes.
pub fn random_smooth_state(grid: &PeriodicGrid, seed: u64, amplitude: f64) -> Result<State> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k0 = 2.0 * std::f64::consts::PI / grid.length();
    let modes = |rng: &mut ChaCha8Rng| -> Vec<(f64, f64, f64)> {
        (1..=3)
            .map(|m| {
                (
                    m as f64 * k0,
                    amplitude * rng.gen_range(-1.0..1.0) / m as f64,
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect()
    };
    let zm = modes(&mut rng);
    let vm = modes(&mut rng);
    let eval = |ms: &[(f64, f64, f64)], x: f64| {
        ms.iter()
            .map(|(k, a, p)| a * (k * x + p).cos())
            .sum::<f64>()
    };
    let zeta = grid.sample(|x| eval(&zm, x));
    let v = grid.sample(|x| eval(&vm, x));
    State::new(grid, 0.0, zeta, v)
}

/// `|rhs_primitive - rhs_quasilinear|_inf` for the scenario at `n` points.
pub fn form_difference(scenario: &Scenario, n: usize, seed: u64) -> Result<f64> {
    let model = scenario.clone().with_grid_points(n).model()?;
    let state = random_smooth_state(&model.grid, seed, 0.5)?;
    let p = model.rhs_primitive(&state)?;
    let q = model.rhs_quasilinear(&state)?;
    Ok(sup(&(p.dzeta - q.dzeta)).max(sup(&(p.dv - q.dv))))
}

fn final_state(scenario: &Scenario, n: usize) -> Result<State> {
    let s = scenario.clone().with_grid_points(n);
    let model = s.model()?;
    let initial = s.initial_state(&model.grid)?;
    let run = simulate_from(model, initial, &s);
    match (run.status, run.failure) {
        (RunStatus::Completed, _) => Ok(run
            .snapshots
            .last()
            .cloned()
            .expect("completed run has a final snapshot")),
        (_, Some((_, e))) => Err(e),
        _ => Err(Error::NonFiniteSpeed),
    }
}

/// Restriction of a fine-grid field to every `stride`-th node.
fn restrict(f: &Field, stride: usize) -> Field {
    f.iter().step_by(stride).copied().collect()
}

fn state_distance(a: &State, b: &State) -> f64 {
    sup(&(&a.zeta - &b.zeta)).max(sup(&(&a.v - &b.v)))
}

/// Spatial self-convergence of the scenario run against the finest grid.
fn spatial_study(scenario: &Scenario, ns: &[usize]) -> Result<OrderStudy> {
    let finest = *ns
        .iter()
        .max()
        .ok_or(Error::DegenerateLadder { points: 0 })?;
    let reference = final_state(scenario, finest)?;
    let mut ladder = Vec::new();
    let mut residuals = Vec::new();
    for &n in ns.iter().filter(|&&n| n < finest) {
        if finest % n != 0 {
            return Err(Error::InvalidGrid(format!(
                "{n} does not divide the finest grid {finest}"
            )));
        }
        let coarse = final_state(scenario, n)?;
        let fine = State {
            t: reference.t,
            zeta: restrict(&reference.zeta, finest / n),
            v: restrict(&reference.v, finest / n),
        };
        ladder.push(scenario.grid.length / n as f64);
        residuals.push(state_distance(&coarse, &fine));
    }
    let slope = loglog_slope(&ladder, &residuals)?;
    Ok(OrderStudy {
        target: OrderTarget::Spatial,
        ladder,
        residuals,
        slope,
    })
}

/// Fixed-step RK4 up to the scenario's final time.
fn fixed_step_run(model: &Model, initial: &State, t_end: f64, dt: f64) -> Result<State> {
    let steps = (t_end / dt).round().max(1.0) as usize;
    model.integrate_fixed(initial, t_end, steps)
}

fn temporal_study(scenario: &Scenario, n: usize, dts: &[f64]) -> Result<OrderStudy> {
    let s = scenario.clone().with_grid_points(n);
    let model = s.model()?;
    let initial = s.initial_state(&model.grid)?;
    let t_end = s.t_final();
    let mut residuals = Vec::new();
    for &dt in dts {
        let coarse = fixed_step_run(&model, &initial, t_end, dt)?;
        let fine = fixed_step_run(&model, &initial, t_end, dt / 2.0)?;
        residuals.push(state_distance(&coarse, &fine));
    }
    let slope = loglog_slope(dts, &residuals)?;
    Ok(OrderStudy {
        target: OrderTarget::Temporal,
        ladder: dts.to_vec(),
        residuals,
        slope,
    })
}

/// Runs one study. The expansion studies take `delta`, `gamma` and `bo` from
/// the scenario; the others run the scenario itself.
pub fn order_study(
    target: OrderTarget,
    scenario: &Scenario,
    cfg: &OrderConfig,
) -> Result<OrderStudy> {
    let expansion = |f: fn(&RegimeParams, usize, f64) -> Result<f64>| -> Result<OrderStudy> {
        if cfg.amplitudes.len() < 3 {
            return Err(Error::DegenerateLadder {
                points: cfg.amplitudes.len(),
            });
        }
        let residuals = cfg
            .amplitudes
            .iter()
            .map(|&t| f(&scenario.params, cfg.expansion_n, t))
            .collect::<Result<Vec<_>>>()?;
        let slope = loglog_slope(&cfg.amplitudes, &residuals)?;
        Ok(OrderStudy {
            target,
            ladder: cfg.amplitudes.clone(),
            residuals,
            slope,
        })
    };
    match target {
        OrderTarget::QbarExpansion => expansion(qbar_expansion_residual),
        OrderTarget::RbarExpansion => expansion(rbar_expansion_residual),
        OrderTarget::FormEquivalence => {
            if cfg.form_ns.len() < 3 {
                return Err(Error::DegenerateLadder {
                    points: cfg.form_ns.len(),
                });
            }
            let ladder: Vec<f64> = cfg
                .form_ns
                .iter()
                .map(|&n| scenario.grid.length / n as f64)
                .collect();
            let residuals = cfg
                .form_ns
                .iter()
                .map(|&n| form_difference(scenario, n, cfg.seed))
                .collect::<Result<Vec<_>>>()?;
            let slope = loglog_slope(&ladder, &residuals)?;
            Ok(OrderStudy {
                target,
                ladder,
                residuals,
                slope,
            })
        }
        OrderTarget::Spatial => {
            if cfg.spatial_ns.len() < 4 {
                return Err(Error::DegenerateLadder {
                    points: cfg.spatial_ns.len().saturating_sub(1),
                });
            }
            spatial_study(scenario, &cfg.spatial_ns)
        }
        OrderTarget::Temporal => {
            if cfg.temporal_dts.len() < 3 {
                return Err(Error::DegenerateLadder {
                    points: cfg.temporal_dts.len(),
                });
            }
            temporal_study(scenario, cfg.temporal_n, &cfg.temporal_dts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let x = [0.1, 0.05, 0.025, 0.0125];
        let y: Vec<f64> = x.iter().map(|h: &f64| 3.0 * h.powf(2.5)).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn short_ladder_is_degenerate() {
        assert_eq!(
            loglog_slope(&[0.1, 0.05], &[1.0, 0.5]),
            Err(Error::DegenerateLadder { points: 2 })
        );
        let cfg = OrderConfig {
            amplitudes: vec![0.2, 0.1],
            ..OrderConfig::default()
        };
        let err =
            order_study(OrderTarget::QbarExpansion, &Scenario::gaussian_bump(), &cfg).unwrap_err();
        assert_eq!(err, Error::DegenerateLadder { points: 2 });
    }

    #[test]
    fn vanishing_residual_is_degenerate() {
        assert!(loglog_slope(&[0.1, 0.05, 0.025], &[1.0, 0.0, 0.5]).is_err());
    }

    #[test]
    fn expansions_are_exact_at_zero_amplitude() {
        let p = RegimeParams::new(0.04, 0.0, 1.0, 0.0, 0.0);
        assert!(qbar_expansion_residual(&p, 128, 0.0).unwrap() < 1e-12);
        assert!(rbar_expansion_residual(&p, 128, 0.0).unwrap() < 1e-12);
    }

    #[test]
    fn random_state_is_reproducible() {
        let g = PeriodicGrid::new(20.0, 64).unwrap();
        assert_eq!(
            random_smooth_state(&g, 7, 0.5).unwrap(),
            random_smooth_state(&g, 7, 0.5).unwrap()
        );
        assert_ne!(
            random_smooth_state(&g, 7, 0.5).unwrap(),
            random_smooth_state(&g, 8, 0.5).unwrap()
        );
    }

    #[test]
    fn restriction_keeps_coincident_nodes() {
        let fine = PeriodicGrid::new(20.0, 64).unwrap();
        let coarse = PeriodicGrid::new(20.0, 16).unwrap();
        assert_eq!(restrict(&fine.nodes(), 4), coarse.nodes());
    }
}

//! Explicit leapfrog for `M u'' = -K u` with a lumped (diagonal) mass.
//!
//! The state keeps `u_n` together with the staggered velocity
//! `v_{n-1/2}`; one step is
//!
//! ```text
//! v_{n+1/2} = v_{n-1/2} - dt M^{-1} K u_n
//! u_{n+1}   = u_n + dt v_{n+1/2}
//! ```

use crate::discretization::{DiscretePair, NodalField, Operator};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct WaveState {
    pub t: f64,
    /// Displacement at `t`.
    pub u: NodalField,
    /// Velocity at `t - dt/2`.
    pub v: NodalField,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    pub dt: f64,
    pub t_final: f64,
    pub cfl_safety: f64,
    pub sample_stride: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.t_final > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt and T must be positive (dt = {}, T = {})",
                self.dt, self.t_final
            )));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidArgument("sample_stride must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of steps to reach `t_final` and the step that lands on it
    /// exactly: `dt_eff = T / ceil(T / dt)`.
    pub fn aligned_steps(&self) -> (usize, f64) {
        let steps = (self.t_final / self.dt).ceil().max(1.0) as usize;
        (steps, self.t_final / steps as f64)
    }
}

/// Gershgorin bound on the largest eigenvalue of `M_L^{-1} K`:
/// `max_i sum_j |K_ij| / m_i`.
pub fn lambda_max_bound(pair: &DiscretePair) -> f64 {
    (0..pair.dim())
        .map(|i| pair.stiffness.row(i).map(|(_, v)| v.abs()).sum::<f64>() / pair.lumped_mass[i])
        .fold(0.0, f64::max)
}

/// Stable step `safety * 2 / sqrt(lambda_max)`.
pub fn cfl_dt(pair: &DiscretePair, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "cfl safety must lie in (0, 1], got {safety}"
        )));
    }
    Ok(safety * 2.0 / lambda_max_bound(pair).sqrt())
}

/// Leapfrog integrator bound to one operator pair and step.
#[derive(Clone, Debug)]
pub struct Leapfrog<'a> {
    pair: &'a DiscretePair,
    pub dt: f64,
    inv_mass: Vec<f64>,
}

impl<'a> Leapfrog<'a> {
    pub fn new(pair: &'a DiscretePair, dt: f64) -> Self {
        let inv_mass = pair.lumped_mass.iter().map(|m| 1.0 / m).collect();
        Self { pair, dt, inv_mass }
    }

    pub fn pair(&self) -> &DiscretePair {
        self.pair
    }

    /// `M_L^{-1} K u`.
    pub fn acceleration(&self, u: &NodalField) -> Vec<f64> {
        let mut a = self
            .pair
            .stiffness
            .mul_vec(&u.values)
            .expect("state matches pair");
        a.iter_mut()
            .zip(&self.inv_mass)
            .for_each(|(v, im)| *v *= im);
        a
    }

    /// State at `t = 0` with `v_{-1/2} = u1 + (dt/2) M^{-1} K u0`, so that
    /// the first step produces `v_{1/2} = u1 - (dt/2) M^{-1} K u0`.
    pub fn initial_state(&self, u0: NodalField, u1: &NodalField) -> Result<WaveState> {
        for f in [&u0, u1] {
            if f.len() != self.pair.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.pair.dim(),
                    got: f.len(),
                });
            }
        }
        let a = self.acceleration(&u0);
        let half = 0.5 * self.dt;
        let v = u1
            .values
            .iter()
            .zip(&a)
            .map(|(v, a)| v + half * a)
            .collect();
        Ok(WaveState {
            t: 0.0,
            u: u0,
            v: NodalField { values: v },
        })
    }

    /// One step, reusing a precomputed `M^{-1} K u_n`.
    pub fn step_with(&self, state: &mut WaveState, accel: &[f64]) {
        let dt = self.dt;
        for ((v, u), a) in state
            .v
            .values
            .iter_mut()
            .zip(state.u.values.iter_mut())
            .zip(accel)
        {
            *v -= dt * a;
            *u += dt * *v;
        }
        state.t += dt;
    }

    pub fn step(&self, state: &mut WaveState) {
        let a = self.acceleration(&state.u);
        self.step_with(state, &a);
    }

    /// Velocity at `t`: average of `v_{n-1/2}` and `v_{n+1/2}`.
    pub fn synchronized_velocity_with(&self, state: &WaveState, accel: &[f64]) -> NodalField {
        let half = 0.5 * self.dt;
        NodalField {
            values: state
                .v
                .values
                .iter()
                .zip(accel)
                .map(|(v, a)| v - half * a)
                .collect(),
        }
    }

    pub fn synchronized_velocity(&self, state: &WaveState) -> NodalField {
        self.synchronized_velocity_with(state, &self.acceleration(&state.u))
    }

    /// Discrete energy at `t`, without the 1/2 factor:
    ///
    /// `vbar^T M vbar + u^T K u - (dt^2/4) a^T M a`, `a = M^{-1} K u`,
    ///
    /// i.e. the averaged-velocity energy minus its `O(dt^2)` leapfrog
    /// defect. This equals `v_{n-1/2}^T M v_{n+1/2} + u^T K u`, which the
    /// scheme conserves to round-off.
    pub fn energy_with(&self, state: &WaveState, accel: &[f64]) -> f64 {
        let vbar = self.synchronized_velocity_with(state, accel);
        let m = &self.pair.lumped_mass;
        let kinetic: f64 = vbar.values.iter().zip(m).map(|(v, m)| v * v * m).sum();
        let defect: f64 = accel.iter().zip(m).map(|(a, m)| a * a * m).sum();
        // u^T K u = u^T M a
        let potential: f64 = state
            .u
            .values
            .iter()
            .zip(accel)
            .zip(m)
            .map(|((u, a), m)| u * a * m)
            .sum();
        kinetic + potential - 0.25 * self.dt * self.dt * defect
    }

    pub fn energy(&self, state: &WaveState) -> f64 {
        self.energy_with(state, &self.acceleration(&state.u))
    }

    /// `vbar^T M vbar + u^T K u` with the plain half-step average.
    pub fn averaged_energy(&self, state: &WaveState) -> f64 {
        let a = self.acceleration(&state.u);
        let vbar = self.synchronized_velocity_with(state, &a);
        self.pair
            .quadratic_form(Operator::Mass, &vbar)
            .expect("dims")
            + self
                .pair
                .quadratic_form(Operator::Stiffness, &state.u)
                .expect("dims")
    }

    /// The state that retraces the trajectory: same `u_n`, velocity
    /// `-v_{n+1/2}`.
    pub fn reversed(&self, state: &WaveState) -> WaveState {
        let a = self.acceleration(&state.u);
        let v = state
            .v
            .values
            .iter()
            .zip(&a)
            .map(|(v, a)| -(v - self.dt * a))
            .collect();
        WaveState {
            t: state.t,
            u: state.u.clone(),
            v: NodalField { values: v },
        }
    }
}

/// Free-function form of [`Leapfrog::step`].
pub fn step(state: &mut WaveState, pair: &DiscretePair, dt: f64) {
    Leapfrog::new(pair, dt).step(state)
}

/// Free-function form of [`Leapfrog::energy`].
pub fn energy(state: &WaveState, pair: &DiscretePair, dt: f64) -> f64 {
    Leapfrog::new(pair, dt).energy(state)
}

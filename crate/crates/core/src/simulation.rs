//! One leapfrog trajectory with boundary functionals sampled along the way.
//!
//! A run advances to the largest requested final time and records a
//! checkpoint (volume term of the commutator identity) at every requested
//! `T`, so a single trajectory serves a whole list of observation windows.

use crate::discretization::{DiscretePair, NodalField};
use crate::error::{Error, Result};
use crate::geometry::{SideFrame, SideLabel};
use crate::mesh::Mesh;
use crate::observability::{observability_ratio, side_functionals, trapezoid, volume_term};
use crate::timestepper::Leapfrog;

/// Boundary functionals at one time level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// `int_side |d_nu u|^2`, indexed by side label.
    pub flux_squared: [f64; 3],
    /// `int_side (X u)(d_nu u)`, indexed by side label.
    pub x_product: [f64; 3],
    /// Conserved leapfrog energy.
    pub energy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Checkpoint {
    pub t: f64,
    pub step: usize,
    /// `int (d_t u) u + 2 (d_t u)(X u)` at `t`.
    pub volume_term: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub frame: SideFrame,
    pub level: u32,
    pub h_max: f64,
    pub dt: f64,
    /// Energy of the initial data, `u1^T M u1 + u0^T K u0`.
    pub e0: f64,
    pub samples: Vec<Sample>,
    /// `t = 0` first, then one per requested final time.
    pub checkpoints: Vec<Checkpoint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservabilityReport {
    pub side: SideLabel,
    pub level: u32,
    pub h_max: f64,
    pub dt: f64,
    pub t_final: f64,
    pub e0: f64,
    pub boundary_integral: f64,
    pub ratio: f64,
    /// Time-integrated x-products on the studied side, then the two others
    /// in label order.
    pub x_products: [f64; 3],
    pub commutator_residual: f64,
    /// Largest relative deviation of the discrete energy up to `T`.
    pub energy_drift: f64,
}

/// Step size not exceeding `dt_max` that lands on every time in `times`,
/// with the matching step counts. `None` when the times are not integer
/// multiples of the smallest one.
pub fn plan_steps(dt_max: f64, times: &[f64]) -> Option<(f64, Vec<usize>)> {
    if times.is_empty() {
        return None;
    }
    let t_min = times.iter().copied().fold(f64::INFINITY, f64::min);
    if !(t_min > 0.0 && dt_max > 0.0) {
        return None;
    }
    let base = (t_min / dt_max).ceil().max(1.0);
    let dt = t_min / base;
    let mut steps = Vec::with_capacity(times.len());
    for &t in times {
        let k = (t / t_min).round();
        if (k * t_min - t).abs() > 1e-9 * t {
            return None;
        }
        steps.push((k * base) as usize);
    }
    Some((dt, steps))
}

/// Step bound, observation windows and sampling stride of a run.
#[derive(Clone, Copy, Debug)]
pub struct Schedule<'a> {
    pub dt_max: f64,
    /// Must be commensurate, see [`plan_steps`].
    pub final_times: &'a [f64],
    pub stride: usize,
}

/// Runs the scheme from `(u0, u1)` and samples every `stride` steps (plus
/// every checkpoint).
pub fn run(
    mesh: &Mesh,
    pair: &DiscretePair,
    frame: &SideFrame,
    u0: NodalField,
    u1: &NodalField,
    schedule: Schedule<'_>,
) -> Result<Trajectory> {
    let Schedule {
        dt_max,
        final_times,
        stride,
    } = schedule;
    if stride == 0 {
        return Err(Error::InvalidArgument("sample stride must be >= 1".into()));
    }
    if final_times.is_empty() || final_times.iter().any(|t| t.is_nan() || *t <= 0.0) {
        return Err(Error::InvalidArgument(
            "final times must be positive".into(),
        ));
    }
    let (dt, steps) = plan_steps(dt_max, final_times).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "final times {final_times:?} are not multiples of the smallest one"
        ))
    })?;
    let lf = Leapfrog::new(pair, dt);
    let e0 = lf.averaged_energy(&lf.initial_state(u0.clone(), u1)?);
    if !e0.is_finite() {
        return Err(Error::NumericalFailure("initial energy".into()));
    }
    if e0 <= 0.0 {
        return Err(Error::ZeroEnergy);
    }

    let mut state = lf.initial_state(u0, u1)?;
    let last = *steps.iter().max().expect("non-empty");
    let mut samples = Vec::with_capacity(last / stride + steps.len() + 1);
    let mut checkpoints = vec![Checkpoint {
        t: 0.0,
        step: 0,
        volume_term: volume_term(pair, mesh, &state.u, u1, frame)?,
    }];
    let mut targets = steps.clone();
    targets.sort_unstable();
    targets.dedup();
    let mut next_target = 0;

    let mut accel = lf.acceleration(&state.u);
    for n in 0..=last {
        let is_checkpoint = next_target < targets.len() && targets[next_target] == n;
        if n % stride == 0 || is_checkpoint || n == last {
            let t = n as f64 * dt;
            let f = side_functionals(pair, mesh, &state.u, frame)?;
            let energy = lf.energy_with(&state, &accel);
            if !energy.is_finite() {
                return Err(Error::NumericalFailure(format!("energy at t = {t}")));
            }
            samples.push(Sample {
                t,
                flux_squared: f.flux_squared,
                x_product: f.x_product,
                energy,
            });
            if is_checkpoint {
                let v = lf.synchronized_velocity_with(&state, &accel);
                checkpoints.push(Checkpoint {
                    t,
                    step: n,
                    volume_term: volume_term(pair, mesh, &state.u, &v, frame)?,
                });
                next_target += 1;
            }
        }
        if n == last {
            break;
        }
        lf.step_with(&mut state, &accel);
        accel = lf.acceleration(&state.u);
    }

    Ok(Trajectory {
        frame: *frame,
        level: mesh.level,
        h_max: mesh.h_max,
        dt,
        e0,
        samples,
        checkpoints,
    })
}

impl Trajectory {
    fn checkpoint(&self, t_final: f64) -> Result<&Checkpoint> {
        self.checkpoints
            .iter()
            .skip(1)
            .find(|c| (c.t - t_final).abs() <= 1e-9 * t_final.max(1.0))
            .ok_or_else(|| Error::InvalidArgument(format!("no checkpoint at T = {t_final}")))
    }

    fn window(&self, t_final: f64) -> impl Iterator<Item = &Sample> {
        let cut = t_final * (1.0 + 1e-12);
        self.samples.iter().take_while(move |s| s.t <= cut)
    }

    /// `int_0^T int_side |d_nu u|^2 dS dt`.
    pub fn boundary_integral(&self, side: SideLabel, t_final: f64) -> Result<f64> {
        let i = side.opposite_vertex();
        trapezoid(self.window(t_final).map(|s| (s.t, s.flux_squared[i])))
    }

    /// `int_0^T int_side (X u)(d_nu u) dS dt`.
    pub fn x_product_integral(&self, side: SideLabel, t_final: f64) -> Result<f64> {
        let i = side.opposite_vertex();
        trapezoid(self.window(t_final).map(|s| (s.t, s.x_product[i])))
    }

    /// Largest `|E(t) - E(0)| / E(0)` over samples up to `T`.
    pub fn energy_drift(&self, t_final: f64) -> f64 {
        let e_ref = match self.samples.first() {
            Some(s) => s.energy,
            None => return 0.0,
        };
        self.window(t_final)
            .map(|s| ((s.energy - e_ref) / e_ref).abs())
            .fold(0.0, f64::max)
    }

    /// Residual of the commutator identity on `[0, T]`.
    pub fn commutator_residual(&self, t_final: f64) -> Result<f64> {
        let end = self.checkpoint(t_final)?;
        let boundary: f64 = SideLabel::ALL
            .iter()
            .map(|&s| self.x_product_integral(s, t_final))
            .sum::<Result<f64>>()?;
        let volume = end.volume_term - self.checkpoints[0].volume_term;
        Ok((boundary - t_final * self.e0 - volume).abs())
    }

    pub fn report(&self, t_final: f64) -> Result<ObservabilityReport> {
        let side = self.frame.side;
        self.checkpoint(t_final)?;
        let boundary_integral = self.boundary_integral(side, t_final)?;
        let (b, c) = side.others();
        Ok(ObservabilityReport {
            side,
            level: self.level,
            h_max: self.h_max,
            dt: self.dt,
            t_final,
            e0: self.e0,
            boundary_integral,
            ratio: observability_ratio(boundary_integral, t_final, self.e0, self.frame.ell)?,
            x_products: [
                self.x_product_integral(side, t_final)?,
                self.x_product_integral(b, t_final)?,
                self.x_product_integral(c, t_final)?,
            ],
            commutator_residual: self.commutator_residual(t_final)?,
            energy_drift: self.energy_drift(t_final),
        })
    }

    /// Reports for every checkpoint, in the order of the requested times.
    pub fn reports(&self) -> Result<Vec<ObservabilityReport>> {
        self.checkpoints[1..]
            .iter()
            .map(|c| self.report(c.t))
            .collect()
    }
}

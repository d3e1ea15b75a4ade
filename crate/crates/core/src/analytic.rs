//! Closed-form reference solutions.
//!
//! * [`IsoscelesMode`]: Dirichlet eigenfunctions of the right isosceles
//!   triangle `(0,0), (pi,0), (pi,pi)` and the standing wave
//!   `u = sin(lambda t) phi`.
//! * [`SineSeries1D`]: finite sine-series solutions of the wave equation on
//!   `[0, ell]` with exact boundary time integrals.
//! * [`SquareMode`]: the separable standing wave on `[0, 2pi]^2` whose
//!   boundary flux on one edge carries a vanishing share of the energy.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{SideLabel, Triangle, Vec2};
use crate::quadrature::{boundary_rule, BOUNDARY_PANELS};

/// The right isosceles reference triangle `(0,0), (pi,0), (pi,pi)`.
pub fn reference_triangle() -> Triangle {
    Triangle::from_vertices(Vec2::new(0.0, 0.0), Vec2::new(PI, 0.0), Vec2::new(PI, PI))
        .expect("reference triangle is non-degenerate")
}

/// `phi = (2/pi) (sin(mx) sin(ny) - sin(nx) sin(my))`, unit `L^2` norm on
/// the reference triangle, eigenvalue `m^2 + n^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IsoscelesMode {
    pub m: u32,
    pub n: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeValue {
    pub u: f64,
    pub u_t: f64,
    pub grad: Vec2,
}

const NORMALIZATION: f64 = 2.0 / PI;

impl IsoscelesMode {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m == 0 || n == 0 || m == n {
            return Err(Error::InvalidMode(format!(
                "need distinct positive integers, got ({m}, {n})"
            )));
        }
        Ok(Self { m, n })
    }

    pub fn lambda_sq(&self) -> f64 {
        f64::from(self.m * self.m + self.n * self.n)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda_sq().sqrt()
    }

    /// Evaluates `phi` anywhere in the plane (no domain check).
    pub fn phi(&self, x: f64, y: f64) -> f64 {
        let (m, n) = (f64::from(self.m), f64::from(self.n));
        NORMALIZATION * ((m * x).sin() * (n * y).sin() - (n * x).sin() * (m * y).sin())
    }

    pub fn grad_phi(&self, x: f64, y: f64) -> Vec2 {
        let (m, n) = (f64::from(self.m), f64::from(self.n));
        let gx = m * (m * x).cos() * (n * y).sin() - n * (n * x).cos() * (m * y).sin();
        let gy = n * (m * x).sin() * (n * y).cos() - m * (n * x).sin() * (m * y).cos();
        Vec2::new(gx, gy) * NORMALIZATION
    }

    /// Laplacian from the second derivatives of each product term.
    pub fn laplacian_phi(&self, x: f64, y: f64) -> f64 {
        let (m, n) = (f64::from(self.m), f64::from(self.n));
        let a = (m * x).sin() * (n * y).sin();
        let b = (n * x).sin() * (m * y).sin();
        NORMALIZATION * (-(m * m) * a - (n * n) * a + (n * n) * b + (m * m) * b)
    }

    /// `(u, u_t, grad u)` of `u = sin(lambda t) phi` at a point of the
    /// closed reference triangle.
    pub fn eval(&self, t: f64, x: f64, y: f64) -> Result<ModeValue> {
        if !reference_triangle().contains(Vec2::new(x, y), 1e-12) {
            return Err(Error::OutsideDomain { x, y });
        }
        let lam = self.lambda();
        let (s, c) = (lam * t).sin_cos();
        Ok(ModeValue {
            u: s * self.phi(x, y),
            u_t: lam * c * self.phi(x, y),
            grad: self.grad_phi(x, y) * s,
        })
    }

    /// `int_side |d_nu phi|^2 dS` by the composite Gauss rule.
    pub fn side_flux_squared(&self, side: SideLabel) -> f64 {
        let tri = reference_triangle();
        let (a, b) = tri.side_endpoints(side);
        let nu = tri.outward_normal(side);
        let len = a.distance(b);
        boundary_rule().composite(0.0, 1.0, BOUNDARY_PANELS, |s| {
            let p = a.lerp(b, s);
            let d = self.grad_phi(p.x, p.y).dot(nu);
            d * d * len
        })
    }
}

/// Altitude of `side` of the reference triangle: `pi` for the legs and
/// `pi / sqrt 2` for the hypotenuse (side 1).
pub fn reference_altitude(side: SideLabel) -> f64 {
    match side.opposite_vertex() {
        1 => PI * FRAC_1_SQRT_2,
        _ => PI,
    }
}

/// `int_0^T int_side |d_nu u|^2 dS dt` for the standing wave of `mode`,
/// `(T / ell) lambda^2 (1 - sin(2 T lambda) / (2 T lambda))`, using the
/// side equidistribution `int_side |d_nu phi|^2 = 2 lambda^2 / ell`.
pub fn mode_boundary_exact(mode: &IsoscelesMode, side: SideLabel, t_final: f64) -> f64 {
    let lam = mode.lambda();
    let ell = reference_altitude(side);
    (t_final / ell) * mode.lambda_sq() * standing_wave_factor(lam, t_final)
}

/// `1 - sin(2 T lambda) / (2 T lambda)`: the ratio `R` of a standing wave.
pub fn standing_wave_factor(lambda: f64, t_final: f64) -> f64 {
    let arg = 2.0 * t_final * lambda;
    1.0 - arg.sin() / arg
}

/// One term `(a cos(w t) + b sin(w t)) sin(k pi x / ell)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SineMode {
    pub k: u32,
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SineSeries1D {
    pub length: f64,
    modes: Vec<SineMode>,
}

impl SineSeries1D {
    pub fn new(length: f64, mut modes: Vec<SineMode>) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "interval length must be positive, got {length}"
            )));
        }
        modes.sort_by_key(|m| m.k);
        for w in modes.windows(2) {
            if w[0].k == w[1].k {
                return Err(Error::InvalidMode(format!(
                    "duplicate wavenumber {}",
                    w[0].k
                )));
            }
        }
        if modes.iter().any(|m| m.k == 0) {
            return Err(Error::InvalidMode("wavenumber must be positive".into()));
        }
        Ok(Self { length, modes })
    }

    /// Modes `k = 1..=count` with seeded coefficients uniform in `[-1, 1)`.
    pub fn random(length: f64, count: u32, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes = (1..=count)
            .map(|k| SineMode {
                k,
                a: rng.gen_range(-1.0..1.0),
                b: rng.gen_range(-1.0..1.0),
            })
            .collect();
        Self::new(length, modes)
    }

    /// `sum_k |a_k| + |b_k|`.
    pub fn coefficient_sum(&self) -> f64 {
        self.modes.iter().map(|m| m.a.abs() + m.b.abs()).sum()
    }

    pub fn modes(&self) -> &[SineMode] {
        &self.modes
    }

    pub fn frequency(&self, k: u32) -> f64 {
        f64::from(k) * PI / self.length
    }

    /// `d_x u(t, ell)`.
    pub fn endpoint_flux(&self, t: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let w = self.frequency(m.k);
                let (s, c) = (w * t).sin_cos();
                endpoint_sign(m.k) * w * (m.a * c + m.b * s)
            })
            .sum()
    }

    /// Energy `int_0^ell |u_t|^2 + |u_x|^2 dx` at time `t`, summed from the
    /// time-dependent modal components.
    pub fn energy_at(&self, t: f64) -> f64 {
        let half = 0.5 * self.length;
        self.modes
            .iter()
            .map(|m| {
                let w = self.frequency(m.k);
                let (s, c) = (w * t).sin_cos();
                let vel = w * (-m.a * s + m.b * c);
                let slope = w * (m.a * c + m.b * s);
                half * (vel * vel + slope * slope)
            })
            .sum()
    }

    /// `(d_x u(t, ell), E(t))`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        (self.endpoint_flux(t), self.energy_at(t))
    }

    /// `int_0^T |d_x u(t, ell)|^2 dt`, exact, including all cross terms.
    pub fn boundary_integral(&self, t_final: f64) -> f64 {
        let mut total = 0.0;
        for p in &self.modes {
            for q in &self.modes {
                let (wp, wq) = (self.frequency(p.k), self.frequency(q.k));
                let scale = endpoint_sign(p.k) * endpoint_sign(q.k) * wp * wq;
                let cc = 0.5 * (cos_integral(wp - wq, t_final) + cos_integral(wp + wq, t_final));
                let ss = 0.5 * (cos_integral(wp - wq, t_final) - cos_integral(wp + wq, t_final));
                // cos(wp t) sin(wq t) = (sin((wq + wp) t) + sin((wq - wp) t)) / 2
                let cs = 0.5 * (sin_integral(wq + wp, t_final) + sin_integral(wq - wp, t_final));
                let sc = 0.5 * (sin_integral(wp + wq, t_final) + sin_integral(wp - wq, t_final));
                total +=
                    scale * (p.a * q.a * cc + p.b * q.b * ss + p.a * q.b * cs + p.b * q.a * sc);
            }
        }
        total
    }

    /// Observability ratio `ell * int_0^T |d_x u|^2 dt / (T E(0))`.
    pub fn ratio(&self, t_final: f64) -> Result<f64> {
        let e0 = self.energy_at(0.0);
        if e0 <= 0.0 {
            return Err(Error::ZeroEnergy);
        }
        Ok(self.length * self.boundary_integral(t_final) / (t_final * e0))
    }
}

fn endpoint_sign(k: u32) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `int_0^T cos(w t) dt`.
fn cos_integral(w: f64, t: f64) -> f64 {
    if w == 0.0 {
        t
    } else {
        (w * t).sin() / w
    }
}

/// `int_0^T sin(w t) dt`.
fn sin_integral(w: f64, t: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        (1.0 - (w * t).cos()) / w
    }
}

/// `u = sin(t sqrt(1+n^2)) (1/pi) sin(x) sin(n y)` on `[0, 2pi]^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SquareMode {
    pub n: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquareReport {
    pub n: u32,
    pub t_final: f64,
    /// `int_0^T int_0^{2pi} |d_x u(t, 2pi, y)|^2 dy dt`.
    pub boundary_integral: f64,
    pub e0: f64,
    /// `boundary_integral / e0`.
    pub ratio_per_energy: f64,
    /// `2pi * boundary_integral / (T e0)`, altitude `2pi` for the right edge.
    pub ratio: f64,
}

/// Side length of the square domain.
pub const SQUARE_SIDE: f64 = 2.0 * PI;

impl SquareMode {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMode("square mode needs n >= 1".into()));
        }
        Ok(Self { n })
    }

    pub fn omega(&self) -> f64 {
        (1.0 + f64::from(self.n).powi(2)).sqrt()
    }

    pub fn u(&self, t: f64, x: f64, y: f64) -> f64 {
        (self.omega() * t).sin() * x.sin() * (f64::from(self.n) * y).sin() / PI
    }

    /// `d_x u` at `(t, x, y)`.
    pub fn u_x(&self, t: f64, x: f64, y: f64) -> f64 {
        (self.omega() * t).sin() * x.cos() * (f64::from(self.n) * y).sin() / PI
    }

    pub fn energy(&self) -> f64 {
        1.0 + f64::from(self.n).powi(2)
    }
}

/// Closed forms on the right edge of the square:
/// `T/(2pi) - sin(2 T w) / (4 pi w)` with `w = sqrt(1 + n^2)`.
pub fn square_exact(n: u32, t_final: f64) -> Result<SquareReport> {
    let mode = SquareMode::new(n)?;
    if t_final.is_nan() || t_final <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "T must be positive, got {t_final}"
        )));
    }
    let w = mode.omega();
    let boundary_integral = t_final / (2.0 * PI) - (2.0 * t_final * w).sin() / (4.0 * PI * w);
    let e0 = mode.energy();
    Ok(SquareReport {
        n,
        t_final,
        boundary_integral,
        e0,
        ratio_per_energy: boundary_integral / e0,
        ratio: SQUARE_SIDE * boundary_integral / (t_final * e0),
    })
}

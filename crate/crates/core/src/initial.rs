//! Initial data selectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::IsoscelesMode;
use crate::discretization::{project_initial, NodalField};
use crate::error::{Error, Result};
use crate::geometry::{ReferenceMap, Triangle, Vec2};
use crate::mesh::Mesh;

/// Product modes behind [`InitialData::RandomSmooth`].
pub const RANDOM_MODES: [(u32, u32); 6] = [(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4)];

/// A scalar function on the physical triangle.
pub type PointFn = Box<dyn Fn(Vec2) -> f64>;

#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    /// `u0 = 0`, `u1 = lambda phi` with `phi` pulled back through the affine
    /// reference map. On the reference triangle itself this is the standing
    /// wave `sin(t lambda) phi`; elsewhere it is merely smooth data.
    Eigenmode { m: u32, n: u32 },
    /// Seeded combination of [`RANDOM_MODES`] for both `u0` and `u1`.
    RandomSmooth { seed: u64 },
    /// `u0 = A (1 - (r/rho)^2)^3` inside the disc, `u1 = 0`.
    Bump {
        center: Vec2,
        radius: f64,
        amplitude: f64,
    },
}

/// Coefficients of the random combination: six for `u0`, then six for `u1`.
pub fn random_coefficients(seed: u64) -> ([f64; 6], [f64; 6]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = [0.0; 6];
    let mut b = [0.0; 6];
    a.iter_mut().for_each(|c| *c = rng.gen_range(-1.0..=1.0));
    b.iter_mut().for_each(|c| *c = rng.gen_range(-1.0..=1.0));
    (a, b)
}

impl InitialData {
    /// Continuum `(u0, u1)` as point functions on the physical triangle.
    pub fn functions(&self, tri: &Triangle) -> Result<(PointFn, PointFn)> {
        let map = ReferenceMap::onto(tri);
        match *self {
            InitialData::Eigenmode { m, n } => {
                let mode = IsoscelesMode::new(m, n)?;
                let lambda = mode.lambda();
                Ok((
                    Box::new(|_| 0.0),
                    Box::new(move |p| {
                        let q = map.inverse(p);
                        lambda * mode.phi(q.x, q.y)
                    }),
                ))
            }
            InitialData::RandomSmooth { seed } => {
                let (a, b) = random_coefficients(seed);
                let modes: Vec<IsoscelesMode> = RANDOM_MODES
                    .iter()
                    .map(|&(m, n)| IsoscelesMode::new(m, n))
                    .collect::<Result<_>>()?;
                let modes_b = modes.clone();
                let sum = move |modes: &[IsoscelesMode], c: &[f64; 6], p: Vec2| {
                    let q = map.inverse(p);
                    modes
                        .iter()
                        .zip(c)
                        .map(|(md, c)| c * md.phi(q.x, q.y))
                        .sum::<f64>()
                };
                Ok((
                    Box::new(move |p| sum(&modes, &a, p)),
                    Box::new(move |p| sum(&modes_b, &b, p)),
                ))
            }
            InitialData::Bump {
                center,
                radius,
                amplitude,
            } => {
                if radius.is_nan()
                    || radius <= 0.0
                    || !amplitude.is_finite()
                    || !center.x.is_finite()
                    || !center.y.is_finite()
                {
                    return Err(Error::InvalidArgument(format!(
                        "bump needs a finite centre, finite amplitude and positive radius (radius = {radius})"
                    )));
                }
                Ok((
                    Box::new(move |p| {
                        let s2 = (p - center).dot(p - center) / (radius * radius);
                        if s2 < 1.0 {
                            amplitude * (1.0 - s2).powi(3)
                        } else {
                            0.0
                        }
                    }),
                    Box::new(|_| 0.0),
                ))
            }
        }
    }

    /// Nodal interpolants at the interior nodes of `mesh`.
    pub fn project(&self, mesh: &Mesh) -> Result<(NodalField, NodalField)> {
        let (f0, f1) = self.functions(&mesh.triangle)?;
        Ok((project_initial(mesh, f0)?, project_initial(mesh, f1)?))
    }
}

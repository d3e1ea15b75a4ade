//! Boundary functionals of a P1 wave field.
//!
//! Normal derivatives on a boundary edge come from the constant gradient of
//! the single element containing the edge. The radial field
//! `X = x d_x + y d_y` is taken in the frame of the side under study, so it
//! is centred at the vertex opposite that side.

use crate::discretization::{DiscretePair, NodalField};
use crate::error::{Error, Result};
use crate::geometry::{SideFrame, SideLabel, Vec2};
use crate::mesh::{EdgeGeometry, Mesh};

/// Boundary edge with the recovered normal derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeFlux {
    pub geometry: EdgeGeometry,
    pub gradient: Vec2,
    pub flux: f64,
}

/// Interior-field view with zero Dirichlet values on the boundary.
#[derive(Clone, Copy)]
pub struct FieldView<'a> {
    values: &'a [f64],
    map: &'a [Option<usize>],
}

impl<'a> FieldView<'a> {
    pub fn new(pair: &'a DiscretePair, field: &'a NodalField) -> Result<Self> {
        if field.len() != pair.dim() {
            return Err(Error::DimensionMismatch {
                expected: pair.dim(),
                got: field.len(),
            });
        }
        Ok(Self {
            values: &field.values,
            map: &pair.global_to_interior,
        })
    }

    pub fn at(&self, node: usize) -> f64 {
        self.map[node].map_or(0.0, |p| self.values[p])
    }

    pub fn element_gradient(&self, mesh: &Mesh, e: usize) -> Vec2 {
        let [a, b, c] = mesh.elements[e];
        let g = mesh.basis_gradients(e);
        g[0] * self.at(a) + g[1] * self.at(b) + g[2] * self.at(c)
    }
}

/// `X` centred at the framed side's opposite vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialField {
    pub frame: SideFrame,
}

impl RadialField {
    pub fn new(frame: SideFrame) -> Self {
        Self { frame }
    }

    /// `(X u)(p) = x u_x + y u_y` in frame coordinates.
    pub fn apply(&self, p: Vec2, grad: Vec2) -> f64 {
        let q = self.frame.to_frame(p);
        let g = self.frame.vector_to_frame(grad);
        q.x * g.x + q.y * g.y
    }
}

/// Normal derivatives on `side` of the P1 function with nodal values
/// `full` (all mesh nodes, boundary included).
pub fn edge_fluxes(mesh: &Mesh, full: &[f64], side: SideLabel) -> Vec<EdgeFlux> {
    mesh.boundary_restriction(side)
        .into_iter()
        .map(|geometry| {
            let gradient = mesh.element_gradient(geometry.edge.element, full);
            EdgeFlux {
                geometry,
                gradient,
                flux: gradient.dot(geometry.normal),
            }
        })
        .collect()
}

/// Normal derivatives of an interior field (Dirichlet zeros on the boundary).
pub fn neumann_trace(
    pair: &DiscretePair,
    mesh: &Mesh,
    field: &NodalField,
    side: SideLabel,
) -> Result<Vec<EdgeFlux>> {
    let view = FieldView::new(pair, field)?;
    Ok(trace_view(mesh, &view, side))
}

fn trace_view(mesh: &Mesh, view: &FieldView<'_>, side: SideLabel) -> Vec<EdgeFlux> {
    mesh.boundary_restriction(side)
        .into_iter()
        .map(|geometry| {
            let gradient = view.element_gradient(mesh, geometry.edge.element);
            EdgeFlux {
                geometry,
                gradient,
                flux: gradient.dot(geometry.normal),
            }
        })
        .collect()
}

/// `int_side |d_nu u|^2 dS`, exact for the piecewise-constant trace.
pub fn flux_squared(trace: &[EdgeFlux]) -> f64 {
    trace
        .iter()
        .map(|e| e.flux * e.flux * e.geometry.length)
        .sum()
}

/// `int_side (X u)(d_nu u) dS`.
///
/// `X u` is the mean of `X . grad u_h` over the boundary element (the
/// radial field is linear and the gradient constant, so this is its value
/// at the element centroid).
pub fn x_product(mesh: &Mesh, trace: &[EdgeFlux], x_field: &RadialField) -> f64 {
    trace
        .iter()
        .map(|e| {
            let c = mesh.element_centroid(e.geometry.edge.element);
            x_field.apply(c, e.gradient) * e.flux * e.geometry.length
        })
        .sum()
}

/// [`x_product`] for one side of an interior field.
pub fn x_product_on_side(
    pair: &DiscretePair,
    mesh: &Mesh,
    field: &NodalField,
    frame: &SideFrame,
    side: SideLabel,
) -> Result<f64> {
    let trace = neumann_trace(pair, mesh, field, side)?;
    Ok(x_product(mesh, &trace, &RadialField::new(*frame)))
}

/// Per-side flux functionals of one field, indexed by side label.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SideFunctionals {
    pub flux_squared: [f64; 3],
    pub x_product: [f64; 3],
}

pub fn side_functionals(
    pair: &DiscretePair,
    mesh: &Mesh,
    field: &NodalField,
    frame: &SideFrame,
) -> Result<SideFunctionals> {
    let view = FieldView::new(pair, field)?;
    let x_field = RadialField::new(*frame);
    let mut out = SideFunctionals::default();
    for side in SideLabel::ALL {
        let trace = trace_view(mesh, &view, side);
        let i = side.opposite_vertex();
        out.flux_squared[i] = flux_squared(&trace);
        out.x_product[i] = x_product(mesh, &trace, &x_field);
    }
    Ok(out)
}

/// `int_Omega (d_t u) u + 2 (d_t u)(X u) dV` for P1 fields `u`, `v = d_t u`.
///
/// The first term uses the consistent mass; the second is integrated
/// exactly by the edge-midpoint rule (the integrand is quadratic).
pub fn volume_term(
    pair: &DiscretePair,
    mesh: &Mesh,
    u: &NodalField,
    v: &NodalField,
    frame: &SideFrame,
) -> Result<f64> {
    let mass_term = pair.l2_inner(v, u)?;
    let uv = FieldView::new(pair, u)?;
    let vv = FieldView::new(pair, v)?;
    let x_field = RadialField::new(*frame);
    let mut radial = 0.0;
    for (e, el) in mesh.elements.iter().enumerate() {
        let grad = uv.element_gradient(mesh, e);
        let mut acc = 0.0;
        for k in 0..3 {
            let (a, b) = (el[k], el[(k + 1) % 3]);
            let mid = mesh.nodes[a].lerp(mesh.nodes[b], 0.5);
            let v_mid = 0.5 * (vv.at(a) + vv.at(b));
            acc += v_mid * x_field.apply(mid, grad);
        }
        radial += acc * mesh.element_area(e) / 3.0;
    }
    Ok(mass_term + 2.0 * radial)
}

/// Trapezoid rule over `(t, value)` samples.
pub fn trapezoid(samples: impl IntoIterator<Item = (f64, f64)>) -> Result<f64> {
    let mut it = samples.into_iter();
    let (mut t_prev, mut f_prev) = it.next().ok_or(Error::EmptyTrajectory)?;
    let mut total = 0.0;
    for (t, f) in it {
        total += 0.5 * (t - t_prev) * (f + f_prev);
        t_prev = t;
        f_prev = f;
    }
    Ok(total)
}

/// `R = ell * boundary_integral / (T E0)`.
pub fn observability_ratio(boundary_integral: f64, t_final: f64, e0: f64, ell: f64) -> Result<f64> {
    if e0.is_nan() || e0 <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    if t_final.is_nan() || t_final <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "T must be positive, got {t_final}"
        )));
    }
    Ok(ell * boundary_integral / (t_final * e0))
}

/// The constant `L sqrt(e - 1)` of the Poincare-type bound.
pub fn poincare_constant(longest_side: f64) -> f64 {
    longest_side * (std::f64::consts::E - 1.0).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoincareCheck {
    /// `||u||_{L^2}`.
    pub lhs: f64,
    /// `L sqrt(e-1) ||d_x u||_{L^2}`, `x` along the frame axis.
    pub rhs: f64,
}

impl PoincareCheck {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

pub fn poincare_check(
    pair: &DiscretePair,
    mesh: &Mesh,
    field: &NodalField,
    frame: &SideFrame,
) -> Result<PoincareCheck> {
    let lhs = pair.l2_inner(field, field)?.max(0.0).sqrt();
    let view = FieldView::new(pair, field)?;
    let dx_sq: f64 = (0..mesh.num_elements())
        .map(|e| {
            let gx = frame.vector_to_frame(view.element_gradient(mesh, e)).x;
            gx * gx * mesh.element_area(e)
        })
        .sum();
    Ok(PoincareCheck {
        lhs,
        rhs: poincare_constant(mesh.triangle.longest_side()) * dx_sq.sqrt(),
    })
}

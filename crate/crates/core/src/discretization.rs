//! P1 mass and stiffness operators with homogeneous Dirichlet elimination.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::mesh::Mesh;
use crate::sparse::CsrMatrix;

/// Values of a P1 function at the interior nodes of a mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalField {
    pub values: Vec<f64>,
}

impl NodalField {
    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operator {
    Mass,
    Stiffness,
}

/// Mass and stiffness restricted to the interior nodes.
///
/// Both the consistent mass and its row-sum lumping are kept; `lumped`
/// selects which one [`DiscretePair::apply`] uses for [`Operator::Mass`].
#[derive(Clone, Debug)]
pub struct DiscretePair {
    pub stiffness: CsrMatrix,
    pub consistent_mass: CsrMatrix,
    pub lumped_mass: Vec<f64>,
    pub lumped: bool,
    /// Interior position -> global node index.
    pub interior: Vec<usize>,
    /// Global node index -> interior position.
    pub global_to_interior: Vec<Option<usize>>,
}

/// Element stiffness `area * G G^T` for basis gradients `G`.
pub fn local_stiffness(area: f64, grads: &[Vec2; 3]) -> [[f64; 3]; 3] {
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * grads[i].dot(grads[j]);
        }
    }
    k
}

/// Element consistent mass `(area / 12) (1 + delta_ij)`.
pub fn local_mass(area: f64) -> [[f64; 3]; 3] {
    let mut m = [[area / 12.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = area / 6.0;
    }
    m
}

/// Unconstrained global matrices `(stiffness, consistent mass)` over all
/// nodes, before Dirichlet elimination.
pub fn assemble_full(mesh: &Mesh) -> (CsrMatrix, CsrMatrix) {
    let n = mesh.num_nodes();
    let mut kt = Vec::with_capacity(9 * mesh.num_elements());
    let mut mt = Vec::with_capacity(9 * mesh.num_elements());
    for (e, el) in mesh.elements.iter().enumerate() {
        let area = mesh.element_area(e);
        let k = local_stiffness(area, mesh.basis_gradients(e));
        let m = local_mass(area);
        for i in 0..3 {
            for j in 0..3 {
                kt.push((el[i], el[j], k[i][j]));
                mt.push((el[i], el[j], m[i][j]));
            }
        }
    }
    (
        CsrMatrix::from_triplets(n, n, kt),
        CsrMatrix::from_triplets(n, n, mt),
    )
}

pub fn assemble(mesh: &Mesh, lumped: bool) -> Result<DiscretePair> {
    let interior = mesh.interior_nodes();
    if interior.is_empty() {
        return Err(Error::NoInteriorNodes { level: mesh.level });
    }
    let (k_full, m_full) = assemble_full(mesh);
    let mut global_to_interior = vec![None; mesh.num_nodes()];
    for (pos, &g) in interior.iter().enumerate() {
        global_to_interior[g] = Some(pos);
    }
    let stiffness = k_full.principal_submatrix(&interior);
    let consistent_mass = m_full.principal_submatrix(&interior);
    // lumping uses the full row (boundary neighbours included)
    let full_row_sums = m_full.row_sums();
    let lumped_mass = interior.iter().map(|&g| full_row_sums[g]).collect();
    Ok(DiscretePair {
        stiffness,
        consistent_mass,
        lumped_mass,
        lumped,
        interior,
        global_to_interior,
    })
}

impl DiscretePair {
    pub fn dim(&self) -> usize {
        self.interior.len()
    }

    fn check(&self, x: &NodalField) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn apply(&self, which: Operator, x: &NodalField) -> Result<NodalField> {
        self.check(x)?;
        let values = match (which, self.lumped) {
            (Operator::Stiffness, _) => self.stiffness.mul_vec(&x.values)?,
            (Operator::Mass, true) => x
                .values
                .iter()
                .zip(&self.lumped_mass)
                .map(|(v, m)| v * m)
                .collect(),
            (Operator::Mass, false) => self.consistent_mass.mul_vec(&x.values)?,
        };
        Ok(NodalField { values })
    }

    /// `x^T A x` for the selected operator.
    pub fn quadratic_form(&self, which: Operator, x: &NodalField) -> Result<f64> {
        let ax = self.apply(which, x)?;
        Ok(crate::sparse::dot(&x.values, &ax.values))
    }

    /// Exact `L^2` inner product of two P1 fields.
    pub fn l2_inner(&self, x: &NodalField, y: &NodalField) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        self.consistent_mass.bilinear(&x.values, &y.values)
    }

    /// Extends interior values by zero to all mesh nodes.
    pub fn to_full(&self, x: &NodalField) -> Vec<f64> {
        let mut full = vec![0.0; self.global_to_interior.len()];
        for (pos, &g) in self.interior.iter().enumerate() {
            full[g] = x.values[pos];
        }
        full
    }
}

/// Nodal interpolation of `f` at the interior nodes.
pub fn project_initial<F>(mesh: &Mesh, f: F) -> Result<NodalField>
where
    F: Fn(Vec2) -> f64,
{
    let values = mesh
        .interior_nodes()
        .into_iter()
        .map(|g| {
            let p = mesh.nodes[g];
            let v = f(p);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteSample { x: p.x, y: p.y })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NodalField { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::IsoscelesMode;
    use crate::geometry::Triangle;
    use crate::mesh::refine_uniform;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn reference() -> Triangle {
        Triangle::from_vertices(Vec2::new(0.0, 0.0), Vec2::new(PI, 0.0), Vec2::new(PI, PI)).unwrap()
    }

    fn obtuse() -> Triangle {
        Triangle::from_vertices(
            Vec2::new(0.0, 0.0),
            Vec2::new(3.0, 0.0),
            Vec2::new(-1.0, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn reference_element_matrices() {
        // Oracle: barycentric gradients of (0,0),(1,0),(0,1) are (-1,-1),(1,0),(0,1);
        // stiffness_ij = area * g_i.g_j with area 1/2.
        let g = [
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        let mut expected = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                expected[i][j] = 0.5 * g[i].dot(g[j]);
            }
        }
        assert_eq!(
            expected,
            [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]]
        );

        let tri = Triangle::from_vertices(
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        )
        .unwrap();
        let mesh = refine_uniform(&tri, 0).unwrap();
        let k = local_stiffness(mesh.element_area(0), mesh.basis_gradients(0));
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - expected[i][j]).abs() < 1e-15);
            }
        }
        // Oracle for the mass: the edge-midpoint rule integrates the quadratic
        // products lambda_i * lambda_j exactly.
        let mids = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];
        let m = local_mass(0.5);
        for i in 0..3 {
            for j in 0..3 {
                let quad: f64 = mids.iter().map(|b| b[i] * b[j]).sum::<f64>() * 0.5 / 3.0;
                assert!((m[i][j] - quad).abs() < 1e-15, "({i},{j})");
            }
        }
        // (area/12) [[2,1,1],[1,2,1],[1,1,2]]
        assert_eq!(m[0], [1.0 / 12.0, 1.0 / 24.0, 1.0 / 24.0]);
    }

    #[test]
    fn constants_in_unconstrained_kernel() {
        let mesh = refine_uniform(&obtuse(), 4).unwrap();
        let (k, m) = assemble_full(&mesh);
        let scale = k.max_abs();
        assert!(k.row_sums().iter().all(|s| s.abs() < 1e-12 * scale));
        assert_eq!(k.symmetry_defect(), 0.0);
        assert_eq!(m.symmetry_defect(), 0.0);
    }

    #[test]
    fn lumped_mass_is_a_third_of_incident_area() {
        let mesh = refine_uniform(&obtuse(), 3).unwrap();
        let pair = assemble(&mesh, true).unwrap();
        let mut incident = vec![0.0; mesh.num_nodes()];
        for (e, el) in mesh.elements.iter().enumerate() {
            for &v in el {
                incident[v] += mesh.element_area(e) / 3.0;
            }
        }
        for (pos, &g) in pair.interior.iter().enumerate() {
            assert!((pair.lumped_mass[pos] - incident[g]).abs() < 1e-15);
            assert!(pair.lumped_mass[pos] > 0.0);
        }
    }

    #[test]
    fn no_interior_nodes() {
        let mesh = refine_uniform(&obtuse(), 1).unwrap();
        assert!(matches!(
            assemble(&mesh, true),
            Err(Error::NoInteriorNodes { level: 1 })
        ));
        assert_eq!(
            assemble(&refine_uniform(&obtuse(), 2).unwrap(), true)
                .unwrap()
                .dim(),
            3
        );
    }

    #[test]
    fn constrained_stiffness_does_not_kill_constants() {
        let mesh = refine_uniform(&obtuse(), 3).unwrap();
        let pair = assemble(&mesh, true).unwrap();
        let ones = NodalField {
            values: vec![1.0; pair.dim()],
        };
        let k1 = pair.apply(Operator::Stiffness, &ones).unwrap();
        assert!(k1.values.iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn lumped_apply_is_diagonal_scaling() {
        let mesh = refine_uniform(&obtuse(), 3).unwrap();
        let pair = assemble(&mesh, true).unwrap();
        let x = NodalField {
            values: (0..pair.dim()).map(|i| i as f64 - 3.0).collect(),
        };
        let y = pair.apply(Operator::Mass, &x).unwrap();
        for i in 0..pair.dim() {
            assert_eq!(y.values[i], x.values[i] * pair.lumped_mass[i]);
        }
        assert!(matches!(
            pair.apply(Operator::Mass, &NodalField::zeros(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn deterministic_assembly() {
        let mesh = refine_uniform(&obtuse(), 4).unwrap();
        let a = assemble(&mesh, true).unwrap();
        let b = assemble(&mesh, true).unwrap();
        assert_eq!(a.stiffness, b.stiffness);
        assert_eq!(a.consistent_mass, b.consistent_mass);
        assert_eq!(a.lumped_mass, b.lumped_mass);
    }

    #[test]
    fn semidefinite_on_random_fields() {
        let mesh = refine_uniform(&obtuse(), 4).unwrap();
        let pair = assemble(&mesh, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x = NodalField {
                values: (0..pair.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            };
            assert!(pair.quadratic_form(Operator::Stiffness, &x).unwrap() >= 0.0);
        }
    }

    #[test]
    fn projection() {
        let mesh = refine_uniform(&reference(), 3).unwrap();
        let zero = project_initial(&mesh, |_| 0.0).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));

        let mode = IsoscelesMode::new(1, 2).unwrap();
        let x = project_initial(&mesh, |p| mode.phi(p.x, p.y)).unwrap();
        for (pos, g) in mesh.interior_nodes().into_iter().enumerate() {
            let p = mesh.nodes[g];
            assert_eq!(x.values[pos], mode.phi(p.x, p.y));
        }
        assert!(matches!(
            project_initial(&mesh, |_| f64::NAN),
            Err(Error::NonFiniteSample { .. })
        ));
    }

    #[test]
    fn rayleigh_quotient_converges_at_second_order() {
        let mode = IsoscelesMode::new(1, 2).unwrap();
        let errs: Vec<f64> = (3..=6)
            .map(|level| {
                let mesh = refine_uniform(&reference(), level).unwrap();
                let pair = assemble(&mesh, false).unwrap();
                let x = project_initial(&mesh, |p| mode.phi(p.x, p.y)).unwrap();
                let rq = pair.quadratic_form(Operator::Stiffness, &x).unwrap()
                    / pair.quadratic_form(Operator::Mass, &x).unwrap();
                (rq - 5.0).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(
                (1.7..2.4).contains(&order),
                "order {order}, errors {errs:?}"
            );
        }
    }

    #[test]
    fn interpolant_energy_converges_at_second_order() {
        // E(0) = lambda^2 for u0 = 0, u1 = lambda*phi with unit-norm phi.
        let mode = IsoscelesMode::new(1, 2).unwrap();
        let lam = mode.lambda();
        let errs: Vec<f64> = (3..=6)
            .map(|level| {
                let mesh = refine_uniform(&reference(), level).unwrap();
                let pair = assemble(&mesh, false).unwrap();
                let u1 = project_initial(&mesh, |p| lam * mode.phi(p.x, p.y)).unwrap();
                (pair.l2_inner(&u1, &u1).unwrap() - mode.lambda_sq()).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(
                (1.7..2.4).contains(&order),
                "order {order}, errors {errs:?}"
            );
        }
    }

    proptest! {
        #[test]
        fn consistent_mass_row_sums_match_lumping(level in 2u32..5) {
            let mesh = refine_uniform(&obtuse(), level).unwrap();
            let (_, m) = assemble_full(&mesh);
            let pair = assemble(&mesh, true).unwrap();
            let sums = m.row_sums();
            for (pos, &g) in pair.interior.iter().enumerate() {
                prop_assert!((sums[g] - pair.lumped_mass[pos]).abs() < 1e-15);
            }
        }
    }
}

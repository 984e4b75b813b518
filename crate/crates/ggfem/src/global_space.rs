//! Assembled global spaces: entity-major global DOF numbering, per-element
//! index maps, and nodal interpolation.
//!
//! Every local functional is expressed against canonical mesh-global data
//! (Cartesian vertex derivatives, the canonical edge parameter from the
//! lower-numbered vertex, canonical face frames), and the per-entity DOF
//! blocks are generated by loops whose order does not depend on the element.
//! Two elements sharing an entity therefore produce the same functionals in
//! the same order, and assembly is purely positional: slot j of an entity's
//! block is one global DOF no matter which element evaluates it. There are
//! no sign flips or transition matrices anywhere.
//!
//! What is shared: U unifies vertex derivatives up to order 4, all edge
//! moment families, and both face families; Sigma unifies vertex derivatives
//! up to order 2, edge moments, and the five frame-pair face families; V
//! unifies vertex derivatives up to order 1 and the normal-trace face
//! moments; Q unifies vertex values only; Vhat shares nothing.

use crate::dof::{dof_matrix, local_dofs, DofEntity, DofFunctional, ElementContext, SpaceId};
use crate::linalg::{solve_exact_sparse, RatMat};
use crate::local_spaces::monomial_basis;
use crate::mesh::TetMesh;
use crate::num::Rat;
use crate::tensor::TensorField;
use crate::{Error, Result};
use num_traits::{Signed, Zero};

/// Mesh entity owning a global DOF.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlobalEntity {
    Vertex(usize),
    Edge(usize),
    Face(usize),
    /// Interior DOFs are owned by one element.
    Interior(usize),
}

pub struct GlobalSpace<'m> {
    pub space: SpaceId,
    /// Complex parameter, as in [`local_dofs`]; the polynomial degree is
    /// `space.degree(k)`.
    pub k: usize,
    pub mesh: &'m TetMesh,
    pub contexts: Vec<ElementContext>,
    /// Local functionals per element, entity-major.
    pub element_dofs: Vec<Vec<DofFunctional>>,
    /// `element_maps[t][i]` is the global index of local functional i.
    pub element_maps: Vec<Vec<usize>>,
    pub owners: Vec<GlobalEntity>,
    pub dim: usize,
}

pub fn assemble_space(space: SpaceId, k: usize, mesh: &TetMesh) -> Result<GlobalSpace<'_>> {
    let ntets = mesh.tets.len();
    let mut contexts = Vec::with_capacity(ntets);
    let mut element_dofs = Vec::with_capacity(ntets);
    for t in 0..ntets {
        let ctx = ElementContext::from_mesh(mesh, t);
        element_dofs.push(local_dofs(space, k, &ctx)?);
        contexts.push(ctx);
    }

    // Per-entity block sizes, read off element 0 and asserted uniform.
    let count = |dofs: &[DofFunctional], e: DofEntity| dofs.iter().filter(|d| d.entity() == e).count();
    let nv = count(&element_dofs[0], DofEntity::Vertex(0));
    let ne = count(&element_dofs[0], DofEntity::Edge(0));
    let nf = count(&element_dofs[0], DofEntity::Face(0));
    let nint = count(&element_dofs[0], DofEntity::Interior);
    for dofs in &element_dofs {
        for v in 0..4 {
            debug_assert_eq!(count(dofs, DofEntity::Vertex(v)), nv);
        }
        for e in 0..6 {
            debug_assert_eq!(count(dofs, DofEntity::Edge(e)), ne);
        }
        for f in 0..4 {
            debug_assert_eq!(count(dofs, DofEntity::Face(f)), nf);
        }
        assert_eq!(count(dofs, DofEntity::Interior), nint);
    }

    let base_e = nv * mesh.vertices.len();
    let base_f = base_e + ne * mesh.edges.len();
    let base_i = base_f + nf * mesh.faces.len();
    let dim = base_i + nint * ntets;

    let mut owners = vec![GlobalEntity::Interior(usize::MAX); dim];
    let mut element_maps = Vec::with_capacity(ntets);
    for (t, dofs) in element_dofs.iter().enumerate() {
        let mut vpos = [0usize; 4];
        let mut epos = [0usize; 6];
        let mut fpos = [0usize; 4];
        let mut ipos = 0usize;
        let mut map = Vec::with_capacity(dofs.len());
        for d in dofs {
            let (g, owner) = match d.entity() {
                DofEntity::Vertex(lv) => {
                    let gv = mesh.tets[t][lv];
                    let g = gv * nv + vpos[lv];
                    vpos[lv] += 1;
                    (g, GlobalEntity::Vertex(gv))
                }
                DofEntity::Edge(le) => {
                    let ge = mesh.tet_edges[t][le];
                    let g = base_e + ge * ne + epos[le];
                    epos[le] += 1;
                    (g, GlobalEntity::Edge(ge))
                }
                DofEntity::Face(lf) => {
                    let gf = mesh.tet_faces[t][lf];
                    let g = base_f + gf * nf + fpos[lf];
                    fpos[lf] += 1;
                    (g, GlobalEntity::Face(gf))
                }
                DofEntity::Interior => {
                    let g = base_i + t * nint + ipos;
                    ipos += 1;
                    (g, GlobalEntity::Interior(t))
                }
            };
            owners[g] = owner;
            map.push(g);
        }
        element_maps.push(map);
    }

    Ok(GlobalSpace {
        space,
        k,
        mesh,
        contexts,
        element_dofs,
        element_maps,
        owners,
        dim,
    })
}

/// How far a per-element target field is from having single-valued DOFs.
/// Residual g is the largest disagreement between elements evaluating global
/// DOF g; all zero exactly when the target conforms (members always do).
#[derive(Clone, Debug)]
pub struct InterpolationReport {
    pub description: String,
    pub residuals: Vec<Rat>,
    pub max_residual: Rat,
}

/// Nodal interpolation: evaluates every functional on the target, which is
/// given as one polynomial field per element. Shared functionals are
/// evaluated from every adjacent element and their disagreement recorded;
/// the first element's value wins in the coefficient vector.
pub fn interpolate(
    space: &GlobalSpace<'_>,
    target: &[TensorField],
) -> Result<(Vec<Rat>, InterpolationReport)> {
    if target.len() != space.mesh.tets.len() {
        return Err(Error::Domain(format!(
            "target has {} element fields, mesh has {} elements",
            target.len(),
            space.mesh.tets.len()
        )));
    }
    let shape = space.space.shape();
    let mut coeffs: Vec<Option<Rat>> = vec![None; space.dim];
    let mut residuals = vec![Rat::zero(); space.dim];
    for (t, field) in target.iter().enumerate() {
        if field.shape != shape {
            return Err(Error::Domain(format!(
                "target field on element {t} has shape {:?}, space needs {:?}",
                field.shape, shape
            )));
        }
        for (i, d) in space.element_dofs[t].iter().enumerate() {
            let g = space.element_maps[t][i];
            let v = d.eval(field, &space.contexts[t])?;
            match &coeffs[g] {
                None => coeffs[g] = Some(v),
                Some(prev) => {
                    let diff = (&v - prev).abs();
                    if diff > residuals[g] {
                        residuals[g] = diff;
                    }
                }
            }
        }
    }
    let coeffs: Vec<Rat> = coeffs
        .into_iter()
        .map(|c| c.expect("every global DOF is owned by at least one element"))
        .collect();
    let max_residual = residuals.iter().max().cloned().unwrap_or_else(Rat::zero);
    let report = InterpolationReport {
        description: format!(
            "{} at k = {} on {} elements",
            space.space,
            space.k,
            target.len()
        ),
        residuals,
        max_residual,
    };
    Ok((coeffs, report))
}

impl GlobalSpace<'_> {
    /// Generalized Vandermonde of element t: functionals against the
    /// monomial basis of the local polynomial space.
    pub fn element_vandermonde(&self, t: usize) -> Result<RatMat> {
        let basis = monomial_basis(
            self.space.degree(self.k),
            self.space.shape(),
            &self.contexts[t].geom,
        )?;
        dof_matrix(&self.element_dofs[t], &basis, &self.contexts[t])
    }

    /// Restriction of a global coefficient vector to element t.
    pub fn local_coeffs(&self, coeffs: &[Rat], t: usize) -> Vec<Rat> {
        self.element_maps[t].iter().map(|&g| coeffs[g].clone()).collect()
    }

    /// The member with the given coefficients, materialized on element t as
    /// a polynomial by solving the element Vandermonde system exactly.
    pub fn element_interpolant(&self, coeffs: &[Rat], t: usize) -> Result<TensorField> {
        let basis = monomial_basis(
            self.space.degree(self.k),
            self.space.shape(),
            &self.contexts[t].geom,
        )?;
        let a = dof_matrix(&self.element_dofs[t], &basis, &self.contexts[t])?;
        let rhs = RatMat::from_rows(
            self.local_coeffs(coeffs, t)
                .into_iter()
                .map(|c| vec![c])
                .collect(),
        );
        let x = solve_exact_sparse(&a, &rhs)?;
        let mut f = TensorField::zero(self.space.shape());
        for (m, bf) in basis.fields.iter().enumerate() {
            let c = &x[(m, 0)];
            if !c.is_zero() {
                f = f.add(&bf.scale(c));
            }
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{grad, gradgrad, matrix_cross_normal, matrix_dot_normal, restrict_to_face};
    use crate::mesh::{generate_mesh, MeshKind};
    use crate::num::{rat, rat_i};
    use crate::poly::BaryPoly;
    use crate::tensor::Shape;

    /// Deterministic small rationals for coefficient vectors.
    fn rand_rats(n: usize, seed: u64) -> Vec<Rat> {
        let mut s = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(11);
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let p = ((s >> 33) % 19) as i64 - 9;
                let q = ((s >> 12) % 5) as i64 + 1;
                rat(p, q)
            })
            .collect()
    }

    /// A global polynomial written per element in that element's barycentric
    /// coordinates: poly in the Cartesian coordinate polynomials x, y, z.
    fn global_poly_on(mesh: &TetMesh, t: usize, build: impl Fn(&BaryPoly, &BaryPoly, &BaryPoly) -> BaryPoly) -> BaryPoly {
        let mut xyz = [BaryPoly::zero(), BaryPoly::zero(), BaryPoly::zero()];
        for (i, &gv) in mesh.tets[t].iter().enumerate() {
            for c in 0..3 {
                let mut e = [0u8; 4];
                e[i] = 1;
                xyz[c].add_term(e, &mesh.vertices[gv][c]);
            }
        }
        build(&xyz[0], &xyz[1], &xyz[2])
    }

    #[test]
    fn global_dimensions_at_k7_on_shipped_meshes() {
        let cases = [
            (MeshKind::SingleTet, [220, 720, 672, 168, 672]),
            (MeshKind::TwoTet, [304, 1164, 1191, 327, 1344]),
            (MeshKind::Cube6, [582, 2796, 3178, 960, 4032]),
        ];
        for (kind, want) in cases {
            let mesh = generate_mesh(kind).unwrap();
            let dims = [
                assemble_space(SpaceId::U, 7, &mesh).unwrap().dim,
                assemble_space(SpaceId::Sigma, 7, &mesh).unwrap().dim,
                assemble_space(SpaceId::V, 6, &mesh).unwrap().dim,
                assemble_space(SpaceId::Q, 7, &mesh).unwrap().dim,
                assemble_space(SpaceId::Vhat, 7, &mesh).unwrap().dim,
            ];
            assert_eq!(dims, want, "{}", kind.name());
        }
    }

    #[test]
    fn element_maps_cover_all_dofs_injectively() {
        let mesh = generate_mesh(MeshKind::TwoTet).unwrap();
        for (space, k) in [(SpaceId::Sigma, 5), (SpaceId::V, 3), (SpaceId::Q, 3)] {
            let gs = assemble_space(space, k, &mesh).unwrap();
            let mut hit = vec![false; gs.dim];
            for map in &gs.element_maps {
                let mut seen = std::collections::HashSet::new();
                for &g in map {
                    assert!(g < gs.dim);
                    assert!(seen.insert(g), "{space}: duplicate global index in one element");
                    hit[g] = true;
                }
            }
            assert!(hit.iter().all(|&h| h), "{space}: unnumbered global DOF");
        }
    }

    #[test]
    fn smooth_targets_have_single_valued_dofs() {
        // A global polynomial evaluated per element gives the same value for
        // every shared functional; any misalignment in the positional
        // unification would show up as a nonzero residual.
        let mesh = generate_mesh(MeshKind::TwoTet).unwrap();
        for (space, k) in [
            (SpaceId::U, 7),
            (SpaceId::Sigma, 7),
            (SpaceId::V, 6),
            (SpaceId::Q, 7),
        ] {
            let gs = assemble_space(space, k, &mesh).unwrap();
            let shape = space.shape();
            let target: Vec<TensorField> = (0..mesh.tets.len())
                .map(|t| {
                    let p = global_poly_on(&mesh, t, |x, y, z| {
                        x.mul(y).add(&z.mul(z)).add(&x.scale(&rat(1, 3)))
                    });
                    match shape {
                        Shape::Scalar => TensorField::scalar(p),
                        _ => {
                            // stored components are free parameters for all
                            // three compressed shapes, so any polynomials work
                            let comps = (0..shape.ncomp())
                                .map(|c| {
                                    global_poly_on(&mesh, t, |x, y, z| {
                                        x.scale(&rat_i(c as i64 + 1)).add(&y.mul(z))
                                    })
                                })
                                .collect();
                            TensorField::from_comps(shape, comps)
                        }
                    }
                })
                .collect();
            let (_, report) = interpolate(&gs, &target).unwrap();
            assert!(report.max_residual.is_zero(), "{space} k={k}: {}", report.max_residual);
        }
    }

    #[test]
    fn p1_functions_are_reproduced_by_u() {
        let mesh = generate_mesh(MeshKind::TwoTet).unwrap();
        let gs = assemble_space(SpaceId::U, 7, &mesh).unwrap();
        let target: Vec<TensorField> = (0..2)
            .map(|t| {
                TensorField::scalar(global_poly_on(&mesh, t, |x, y, z| {
                    BaryPoly::one()
                        .add(&x.scale(&rat_i(2)))
                        .sub(y)
                        .add(&z.scale(&rat(1, 2)))
                }))
            })
            .collect();
        let (coeffs, report) = interpolate(&gs, &target).unwrap();
        assert!(report.max_residual.is_zero());
        for t in 0..2 {
            let u = gs.element_interpolant(&coeffs, t).unwrap();
            assert!(u.comp(0).func_eq(target[t].comp(0)), "element {t}");
        }
    }

    #[test]
    fn interpolation_is_idempotent_on_members() {
        let mesh = generate_mesh(MeshKind::TwoTet).unwrap();
        let gs = assemble_space(SpaceId::V, 3, &mesh).unwrap();
        let coeffs = rand_rats(gs.dim, 3);
        let member: Vec<TensorField> = (0..2)
            .map(|t| gs.element_interpolant(&coeffs, t).unwrap())
            .collect();
        let (again, report) = interpolate(&gs, &member).unwrap();
        assert!(report.max_residual.is_zero());
        assert_eq!(again, coeffs);
    }

    #[test]
    fn gradgrad_of_u_members_conforms_in_sigma() {
        // gradgrad of a smooth degree-9 polynomial lands in the local Sigma
        // space on each element and must have single-valued Sigma DOFs.
        let mesh = generate_mesh(MeshKind::TwoTet).unwrap();
        let gs = assemble_space(SpaceId::Sigma, 7, &mesh).unwrap();
        let target: Vec<TensorField> = (0..2)
            .map(|t| {
                let u = global_poly_on(&mesh, t, |x, y, z| {
                    x.pow(4).mul(&y.pow(3)).mul(&z.pow(2)).add(&x.pow(2).mul(&y.pow(2)))
                });
                gradgrad(&u, &mesh.geom[t])
            })
            .collect();
        let (_, report) = interpolate(&gs, &target).unwrap();
        assert!(report.max_residual.is_zero(), "{}", report.max_residual);
    }

    #[test]
    fn members_have_matching_traces_on_the_interior_face() {
        let mesh = generate_mesh(MeshKind::TwoTet).unwrap();
        // the shared face is the one whose tets list has both elements
        let shared = (0..mesh.faces.len())
            .find(|&f| mesh.face_tets[f].len() == 2)
            .unwrap();
        let normal = &mesh.face_frames[shared].normal;
        let locals = [
            mesh.face_locals_in_tet(0, shared),
            mesh.face_locals_in_tet(1, shared),
        ];

        // Sigma: sigma x n matches across the face.
        let gs = assemble_space(SpaceId::Sigma, 5, &mesh).unwrap();
        let coeffs = rand_rats(gs.dim, 17);
        let fields = [
            gs.element_interpolant(&coeffs, 0).unwrap(),
            gs.element_interpolant(&coeffs, 1).unwrap(),
        ];
        for i in 0..3 {
            for j in 0..3 {
                let tr: Vec<_> = (0..2)
                    .map(|t| {
                        let xn = matrix_cross_normal(&fields[t], normal);
                        restrict_to_face(&xn.entry(i, j), locals[t])
                    })
                    .collect();
                assert!(tr[0].func_eq(&tr[1]), "sigma x n entry ({i},{j})");
            }
        }

        // V: v . n matches.
        let gv = assemble_space(SpaceId::V, 3, &mesh).unwrap();
        let coeffs = rand_rats(gv.dim, 5);
        let fields = [
            gv.element_interpolant(&coeffs, 0).unwrap(),
            gv.element_interpolant(&coeffs, 1).unwrap(),
        ];
        for c in 0..3 {
            let tr: Vec<_> = (0..2)
                .map(|t| {
                    let vn = matrix_dot_normal(&fields[t], normal);
                    restrict_to_face(vn.comp(c), locals[t])
                })
                .collect();
            assert!(tr[0].func_eq(&tr[1]), "v . n component {c}");
        }

        // U: value and full gradient match (C^1 across the face).
        let gu = assemble_space(SpaceId::U, 7, &mesh).unwrap();
        let coeffs = rand_rats(gu.dim, 19);
        let fields = [
            gu.element_interpolant(&coeffs, 0).unwrap(),
            gu.element_interpolant(&coeffs, 1).unwrap(),
        ];
        let val: Vec<_> = (0..2)
            .map(|t| restrict_to_face(fields[t].comp(0), locals[t]))
            .collect();
        assert!(val[0].func_eq(&val[1]), "u value trace");
        for c in 0..3 {
            let tr: Vec<_> = (0..2)
                .map(|t| {
                    let gr = grad(fields[t].comp(0), &mesh.geom[t]);
                    restrict_to_face(gr.comp(c), locals[t])
                })
                .collect();
            assert!(tr[0].func_eq(&tr[1]), "u gradient component {c}");
        }

        // Q: values agree at shared vertices (and only that is claimed).
        let gq = assemble_space(SpaceId::Q, 3, &mesh).unwrap();
        let coeffs = rand_rats(gq.dim, 23);
        let fields = [
            gq.element_interpolant(&coeffs, 0).unwrap(),
            gq.element_interpolant(&coeffs, 1).unwrap(),
        ];
        for gv_id in mesh.faces[shared] {
            let bary: Vec<[Rat; 4]> = (0..2)
                .map(|t| {
                    let lv = mesh.tets[t].iter().position(|&x| x == gv_id).unwrap();
                    let mut l = [rat_i(0), rat_i(0), rat_i(0), rat_i(0)];
                    l[lv] = rat_i(1);
                    l
                })
                .collect();
            assert_eq!(fields[0].eval(&bary[0]), fields[1].eval(&bary[1]), "Q at vertex {gv_id}");
        }
    }
}

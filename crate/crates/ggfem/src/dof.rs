//! Degrees of freedom for the four finite element families and the auxiliary
//! discontinuous space, together with local unisolvence checks and dual
//! (shape function) bases.
//!
//! Every functional is expressed against canonical mesh-global data: vertex
//! derivatives are Cartesian partials, edge moments use the [0,1] parameter
//! from the lower-numbered global vertex, and face moments pair against the
//! canonical face frame and are normalized by face measure. Two elements
//! sharing an entity therefore compute bitwise identical values for the
//! shared functionals, so global assembly needs no sign flips or transition
//! matrices.
//!
//! Interior functionals test against the matching bubble space, whose fields
//! vanish on all lower-dimensional entities to the order the boundary
//! functionals probe. That makes the element matrices block triangular with
//! respect to the entity ordering and is what the assembly layer relies on;
//! `interior tests vanish on boundary functionals` is asserted in the tests
//! below rather than assumed.

use crate::calculus::{
    dir_deriv, dx_multi, matrix_dot_normal, restrict_to_edge, restrict_to_face, sandwich,
};
use crate::fla;
use crate::geom::GeomCache;
use crate::integrate::{face_moment, l2_pairing};
use crate::linalg::{check_nonsingular, solve_exact, sparse_rank, to_sparse_rows, RatMat};
use crate::local_spaces::{
    bubble_space, monomial_basis, trace_kernel, BubbleSpace, LocalBasis, TraceSpace,
};
use crate::mesh::{EdgeFrame, FaceFrame, TetMesh, TET_EDGE_LOCALS, TET_FACE_LOCALS};
use crate::num::{rat_i, rat_to_f64, Rat};
use crate::poly::{exps3_upto, hom_exps3, hom_exps4, BaryPoly, FacePoly};
use crate::tensor::{Shape, TensorField};
use crate::{Error, Result};
use num_traits::Zero;

/// The five element families.
///
/// `k` always refers to the complex parameter; each family's polynomial
/// degree is derived from it so that the four spaces line up in one complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceId {
    /// Scalar C^1-type element of degree k+2.
    U,
    /// Symmetric matrix element of degree k.
    Sigma,
    /// Traceless matrix element of degree k (the complex uses it at k-1).
    V,
    /// Vector element of degree k-2, continuous at vertices only.
    Q,
    /// Discontinuous traceless matrix space of degree k-1.
    Vhat,
}

impl SpaceId {
    pub fn shape(self) -> Shape {
        match self {
            SpaceId::U => Shape::Scalar,
            SpaceId::Sigma => Shape::Sym,
            SpaceId::V => Shape::Dev,
            SpaceId::Q => Shape::Vector,
            SpaceId::Vhat => Shape::Dev,
        }
    }

    /// Polynomial degree of the family at complex parameter `k`.
    pub fn degree(self, k: usize) -> usize {
        match self {
            SpaceId::U => k + 2,
            SpaceId::Sigma | SpaceId::V => k,
            SpaceId::Q => k - 2,
            SpaceId::Vhat => k - 1,
        }
    }

    /// Smallest `k` for which the family is defined.
    pub fn min_k(self) -> usize {
        match self {
            SpaceId::U => 7,
            SpaceId::Sigma => 5,
            SpaceId::V | SpaceId::Q => 3,
            SpaceId::Vhat => 1,
        }
    }
}

impl std::fmt::Display for SpaceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SpaceId::U => "U",
            SpaceId::Sigma => "Sigma",
            SpaceId::V => "V",
            SpaceId::Q => "Q",
            SpaceId::Vhat => "Vhat",
        };
        f.write_str(s)
    }
}

/// Everything a functional needs to evaluate on one element: geometry plus
/// the canonical frames and the local-vertex layout of each edge and face.
///
/// For an element inside a mesh the frames come from the mesh (shared between
/// neighbors); for a standalone element the local vertex order doubles as the
/// global one.
#[derive(Clone, Debug)]
pub struct ElementContext {
    pub geom: GeomCache,
    pub edge_frames: [EdgeFrame; 6],
    pub face_frames: [FaceFrame; 4],
    /// Local vertex indices of each edge, lower global vertex first.
    pub edge_locals: [[usize; 2]; 6],
    /// Local vertex indices of each face, in ascending global order.
    pub face_locals: [[usize; 3]; 4],
}

impl ElementContext {
    pub fn standalone(geom: GeomCache) -> Self {
        let edge_frames = std::array::from_fn(|e| {
            let [j, l] = TET_EDGE_LOCALS[e];
            EdgeFrame::new(&geom.verts[j], &geom.verts[l])
        });
        let face_frames = std::array::from_fn(|f| {
            let [a, b, c] = TET_FACE_LOCALS[f];
            FaceFrame::new(&geom.verts[a], &geom.verts[b], &geom.verts[c])
        });
        ElementContext {
            geom,
            edge_frames,
            face_frames,
            edge_locals: TET_EDGE_LOCALS,
            face_locals: TET_FACE_LOCALS,
        }
    }

    pub fn from_mesh(mesh: &TetMesh, t: usize) -> Self {
        let edge_frames =
            std::array::from_fn(|e| mesh.edge_frames[mesh.tet_edges[t][e]].clone());
        let face_frames =
            std::array::from_fn(|f| mesh.face_frames[mesh.tet_faces[t][f]].clone());
        let edge_locals =
            std::array::from_fn(|e| mesh.edge_locals_in_tet(t, mesh.tet_edges[t][e]));
        let face_locals =
            std::array::from_fn(|f| mesh.face_locals_in_tet(t, mesh.tet_faces[t][f]));
        ElementContext {
            geom: mesh.geom[t].clone(),
            edge_frames,
            face_frames,
            edge_locals,
            face_locals,
        }
    }
}

/// Mesh entity a functional is attached to; drives global numbering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofEntity {
    Vertex(usize),
    Edge(usize),
    Face(usize),
    Interior,
}

/// One degree of freedom. Entity indices are local to the element; the
/// context maps them to canonical global data.
#[derive(Clone, Debug)]
pub enum DofKind {
    /// Cartesian partial D^alpha of stored component `comp` at a vertex.
    VertexDeriv {
        vertex: usize,
        alpha: [u8; 3],
        comp: usize,
    },
    /// Moment of stored component `comp` against s^j on the edge parameter.
    EdgeMoment { edge: usize, j: usize, comp: usize },
    /// Moment against s^j of the scalar's mixed edge-normal derivative of
    /// order (dn, dm) in the canonical edge frame.
    EdgeNormalMoment { edge: usize, j: usize, dn: u8, dm: u8 },
    /// Face moment of w1^T (sigma) w2 against `q`, where (w1, w2) is pair
    /// 0..5 of (t1,t1),(t1,t2),(t2,t2),(t1,n),(t2,n) in the face frame.
    FaceFramePair { face: usize, pair: usize, q: FacePoly },
    /// Face moment of Cartesian component `comp` of (field . n) against `q`.
    FaceNormalComp { face: usize, comp: usize, q: FacePoly },
    /// Face moment of the scalar value (`nderiv` = 0) or its normal
    /// derivative (`nderiv` = 1) against `q`.
    FaceScalar { face: usize, nderiv: u8, q: FacePoly },
    /// Interior L2 moment against a fixed test field.
    InteriorMoment { test: TensorField },
}

impl DofKind {
    pub fn describe(&self) -> String {
        match self {
            DofKind::VertexDeriv { vertex, alpha, comp } => format!(
                "vertex {vertex} derivative [{},{},{}] component {comp}",
                alpha[0], alpha[1], alpha[2]
            ),
            DofKind::EdgeMoment { edge, j, comp } => {
                format!("edge {edge} moment s^{j} component {comp}")
            }
            DofKind::EdgeNormalMoment { edge, j, dn, dm } => {
                format!("edge {edge} moment s^{j} of normal derivative ({dn},{dm})")
            }
            DofKind::FaceFramePair { face, pair, .. } => {
                format!("face {face} frame-pair {pair} moment")
            }
            DofKind::FaceNormalComp { face, comp, .. } => {
                format!("face {face} normal-trace component {comp} moment")
            }
            DofKind::FaceScalar { face, nderiv, .. } => {
                format!("face {face} scalar moment (normal derivative order {nderiv})")
            }
            DofKind::InteriorMoment { .. } => "interior moment".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DofFunctional {
    pub kind: DofKind,
}

fn unit_bary(v: usize) -> [Rat; 4] {
    let mut l = [rat_i(0), rat_i(0), rat_i(0), rat_i(0)];
    l[v] = rat_i(1);
    l
}

fn frame_pair(frame: &FaceFrame, pair: usize) -> (&[Rat; 3], &[Rat; 3]) {
    match pair {
        0 => (&frame.tau1, &frame.tau1),
        1 => (&frame.tau1, &frame.tau2),
        2 => (&frame.tau2, &frame.tau2),
        3 => (&frame.tau1, &frame.normal),
        4 => (&frame.tau2, &frame.normal),
        _ => panic!("face frame pair index {pair} out of range"),
    }
}

impl DofFunctional {
    pub fn entity(&self) -> DofEntity {
        match &self.kind {
            DofKind::VertexDeriv { vertex, .. } => DofEntity::Vertex(*vertex),
            DofKind::EdgeMoment { edge, .. } | DofKind::EdgeNormalMoment { edge, .. } => {
                DofEntity::Edge(*edge)
            }
            DofKind::FaceFramePair { face, .. }
            | DofKind::FaceNormalComp { face, .. }
            | DofKind::FaceScalar { face, .. } => DofEntity::Face(*face),
            DofKind::InteriorMoment { .. } => DofEntity::Interior,
        }
    }

    pub fn eval(&self, field: &TensorField, ctx: &ElementContext) -> Result<Rat> {
        match &self.kind {
            DofKind::VertexDeriv { vertex, alpha, comp } => {
                let p = dx_multi(field.comp(*comp), &ctx.geom, alpha);
                Ok(p.eval(&unit_bary(*vertex)))
            }
            DofKind::EdgeMoment { edge, j, comp } => {
                let [lo, hi] = ctx.edge_locals[*edge];
                Ok(restrict_to_edge(field.comp(*comp), lo, hi).moment(*j))
            }
            DofKind::EdgeNormalMoment { edge, j, dn, dm } => {
                let frame = &ctx.edge_frames[*edge];
                let mut p = field.comp(0).clone();
                for _ in 0..*dn {
                    p = dir_deriv(&p, &ctx.geom, &frame.n);
                }
                for _ in 0..*dm {
                    p = dir_deriv(&p, &ctx.geom, &frame.m);
                }
                let [lo, hi] = ctx.edge_locals[*edge];
                Ok(restrict_to_edge(&p, lo, hi).moment(*j))
            }
            DofKind::FaceFramePair { face, pair, q } => {
                let (w1, w2) = frame_pair(&ctx.face_frames[*face], *pair);
                let s = sandwich(field, w1, w2);
                face_moment(&restrict_to_face(&s, ctx.face_locals[*face]).mul(q))
            }
            DofKind::FaceNormalComp { face, comp, q } => {
                let vn = matrix_dot_normal(field, &ctx.face_frames[*face].normal);
                let p = restrict_to_face(vn.comp(*comp), ctx.face_locals[*face]);
                face_moment(&p.mul(q))
            }
            DofKind::FaceScalar { face, nderiv, q } => {
                let mut p = field.comp(0).clone();
                if *nderiv > 0 {
                    p = dir_deriv(&p, &ctx.geom, &ctx.face_frames[*face].normal);
                }
                face_moment(&restrict_to_face(&p, ctx.face_locals[*face]).mul(q))
            }
            DofKind::InteriorMoment { test } => l2_pairing(field, test, &ctx.geom),
        }
    }
}

// ---------------------------------------------------------------------------
// Face test polynomial bases. Homogeneous barycentric monomials on a face
// vanish at a face vertex exactly when the corresponding pure power is
// absent, and have vanishing first derivatives there exactly when the
// adjacent near-pure powers are absent too, so the constrained test spaces
// are spanned by the monomials that survive the filters below.

/// Basis of degree-r face polynomials vanishing at the three face vertices.
fn face_tests_vanishing_at_vertices(r: usize) -> Vec<[u8; 3]> {
    hom_exps3(r)
        .into_iter()
        .filter(|e| e.iter().all(|&x| (x as usize) < r || r == 0))
        .collect()
}

/// Basis of degree-k face polynomials whose value and first derivatives
/// vanish at the three face vertices: max exponent at most k-2.
fn face_tests_vanishing_to_first_order(k: usize) -> Vec<[u8; 3]> {
    hom_exps3(k)
        .into_iter()
        .filter(|e| e.iter().all(|&x| (x as usize) + 2 <= k))
        .collect()
}

fn sigma_dofs(k: usize, ctx: &ElementContext) -> Result<Vec<DofFunctional>> {
    let mut dofs = Vec::new();
    for vertex in 0..4 {
        for alpha in exps3_upto(2) {
            for comp in 0..6 {
                dofs.push(DofFunctional {
                    kind: DofKind::VertexDeriv { vertex, alpha, comp },
                });
            }
        }
    }
    if k >= 6 {
        for edge in 0..6 {
            for j in 0..=(k - 6) {
                for comp in 0..6 {
                    dofs.push(DofFunctional {
                        kind: DofKind::EdgeMoment { edge, j, comp },
                    });
                }
            }
        }
    }
    for face in 0..4 {
        for e in face_tests_vanishing_at_vertices(k - 3) {
            for pair in 0..5 {
                dofs.push(DofFunctional {
                    kind: DofKind::FaceFramePair {
                        face,
                        pair,
                        q: FacePoly::monomial(e, rat_i(1)),
                    },
                });
            }
        }
    }
    for test in bubble_space(BubbleSpace::SigmaStar, k, &ctx.geom)?.fields {
        dofs.push(DofFunctional {
            kind: DofKind::InteriorMoment { test },
        });
    }
    Ok(dofs)
}

fn v_dofs(k: usize, ctx: &ElementContext) -> Result<Vec<DofFunctional>> {
    let mut dofs = Vec::new();
    for vertex in 0..4 {
        for alpha in exps3_upto(1) {
            for comp in 0..8 {
                dofs.push(DofFunctional {
                    kind: DofKind::VertexDeriv { vertex, alpha, comp },
                });
            }
        }
    }
    for face in 0..4 {
        for e in face_tests_vanishing_to_first_order(k) {
            for comp in 0..3 {
                dofs.push(DofFunctional {
                    kind: DofKind::FaceNormalComp {
                        face,
                        comp,
                        q: FacePoly::monomial(e, rat_i(1)),
                    },
                });
            }
        }
    }
    for test in trace_kernel(TraceSpace::VStar, k, &ctx.geom)?.kernel_fields() {
        dofs.push(DofFunctional {
            kind: DofKind::InteriorMoment { test },
        });
    }
    Ok(dofs)
}

fn u_dofs(k: usize, _ctx: &ElementContext) -> Result<Vec<DofFunctional>> {
    let mut dofs = Vec::new();
    for vertex in 0..4 {
        for alpha in exps3_upto(4) {
            dofs.push(DofFunctional {
                kind: DofKind::VertexDeriv { vertex, alpha, comp: 0 },
            });
        }
    }
    // Edge families: values against P_{k-8}, first normal derivatives against
    // P_{k-7}, second against P_{k-6}. At k = 7 the value family is empty.
    for edge in 0..6 {
        if k >= 8 {
            for j in 0..=(k - 8) {
                dofs.push(DofFunctional {
                    kind: DofKind::EdgeNormalMoment { edge, j, dn: 0, dm: 0 },
                });
            }
        }
        for (dn, dm) in [(1, 0), (0, 1)] {
            for j in 0..=(k - 7) {
                dofs.push(DofFunctional {
                    kind: DofKind::EdgeNormalMoment { edge, j, dn, dm },
                });
            }
        }
        for (dn, dm) in [(2, 0), (1, 1), (0, 2)] {
            for j in 0..=(k - 6) {
                dofs.push(DofFunctional {
                    kind: DofKind::EdgeNormalMoment { edge, j, dn, dm },
                });
            }
        }
    }
    for face in 0..4 {
        for e in hom_exps3(k - 7) {
            dofs.push(DofFunctional {
                kind: DofKind::FaceScalar {
                    face,
                    nderiv: 0,
                    q: FacePoly::monomial(e, rat_i(1)),
                },
            });
        }
        for e in hom_exps3(k - 5) {
            dofs.push(DofFunctional {
                kind: DofKind::FaceScalar {
                    face,
                    nderiv: 1,
                    q: FacePoly::monomial(e, rat_i(1)),
                },
            });
        }
    }
    for e in hom_exps4(k - 6) {
        dofs.push(DofFunctional {
            kind: DofKind::InteriorMoment {
                test: TensorField::scalar(BaryPoly::monomial(e, rat_i(1))),
            },
        });
    }
    Ok(dofs)
}

fn q_dofs(k: usize, _ctx: &ElementContext) -> Result<Vec<DofFunctional>> {
    let r = k - 2;
    let mut dofs = Vec::new();
    for vertex in 0..4 {
        for comp in 0..3 {
            dofs.push(DofFunctional {
                kind: DofKind::VertexDeriv {
                    vertex,
                    alpha: [0, 0, 0],
                    comp,
                },
            });
        }
    }
    // Vector tests vanishing at the vertices: all non-pure-power monomials.
    for e in hom_exps4(r) {
        if e.iter().any(|&x| x as usize == r) {
            continue;
        }
        for comp in 0..3 {
            let mut comps = vec![BaryPoly::zero(), BaryPoly::zero(), BaryPoly::zero()];
            comps[comp] = BaryPoly::monomial(e, rat_i(1));
            dofs.push(DofFunctional {
                kind: DofKind::InteriorMoment {
                    test: TensorField::from_comps(Shape::Vector, comps),
                },
            });
        }
    }
    Ok(dofs)
}

fn vhat_dofs(k: usize) -> Vec<DofFunctional> {
    let mut dofs = Vec::new();
    for e in hom_exps4(k - 1) {
        for comp in 0..8 {
            let mut comps = vec![BaryPoly::zero(); 8];
            comps[comp] = BaryPoly::monomial(e, rat_i(1));
            dofs.push(DofFunctional {
                kind: DofKind::InteriorMoment {
                    test: TensorField::from_comps(Shape::Dev, comps),
                },
            });
        }
    }
    dofs
}

/// The functionals of `space` at complex parameter `k`, ordered entity-major:
/// vertices 0..3, then edges 0..5, then faces 0..3, then interior.
pub fn local_dofs(space: SpaceId, k: usize, ctx: &ElementContext) -> Result<Vec<DofFunctional>> {
    if k < space.min_k() {
        return Err(Error::Domain(format!(
            "space {space} requires k >= {}, got k = {k}",
            space.min_k()
        )));
    }
    match space {
        SpaceId::U => u_dofs(k, ctx),
        SpaceId::Sigma => sigma_dofs(k, ctx),
        SpaceId::V => v_dofs(k, ctx),
        SpaceId::Q => q_dofs(k, ctx),
        SpaceId::Vhat => Ok(vhat_dofs(k)),
    }
}

/// Row i, column j holds functional i applied to basis field j.
pub fn dof_matrix(
    dofs: &[DofFunctional],
    basis: &LocalBasis,
    ctx: &ElementContext,
) -> Result<RatMat> {
    let mut rows = Vec::with_capacity(dofs.len());
    for d in dofs {
        let mut row = Vec::with_capacity(basis.len());
        for f in &basis.fields {
            row.push(d.eval(f, ctx)?);
        }
        rows.push(row);
    }
    Ok(RatMat::from_rows(rows))
}

/// All functionals applied to one field.
pub fn dof_values(
    dofs: &[DofFunctional],
    field: &TensorField,
    ctx: &ElementContext,
) -> Result<Vec<Rat>> {
    dofs.iter().map(|d| d.eval(field, ctx)).collect()
}

#[derive(Clone, Debug)]
pub struct UnisolvenceReport {
    pub space: SpaceId,
    pub k: usize,
    /// Number of functionals = dimension of the polynomial space.
    pub dim: usize,
    /// Condition number estimate of the floated generalized Vandermonde
    /// matrix. Diagnostic only; the verdict is the exact elimination.
    pub condition_estimate: f64,
}

/// Index of the first row that is linearly dependent on its predecessors.
/// Only called on matrices known to be singular, where the predicate
/// "prefix of length m has rank < m" is monotone in m.
fn first_dependent_row(a: &RatMat) -> usize {
    let rows = to_sparse_rows(a);
    let (mut lo, mut hi) = (1, a.nrows);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if sparse_rank(&rows[..mid], a.ncols) < mid {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo - 1
}

fn check_dofs_unisolvent(
    space: SpaceId,
    k: usize,
    dofs: &[DofFunctional],
    ctx: &ElementContext,
) -> Result<UnisolvenceReport> {
    let basis = monomial_basis(space.degree(k), space.shape(), &ctx.geom)?;
    if dofs.len() != basis.len() {
        return Err(Error::Unisolvence(format!(
            "space {space} at k = {k}: {} functionals against polynomial dimension {}",
            dofs.len(),
            basis.len()
        )));
    }
    let a = dof_matrix(dofs, &basis, ctx)?;
    if check_nonsingular(&a).is_err() {
        let i = first_dependent_row(&a);
        return Err(Error::Unisolvence(format!(
            "space {space} at k = {k}: functional {i} ({}) is linearly dependent on its predecessors",
            dofs[i].kind.describe()
        )));
    }
    let n = a.nrows;
    let af = faer::Mat::from_fn(n, n, |i, j| rat_to_f64(&a[(i, j)]));
    Ok(UnisolvenceReport {
        space,
        k,
        dim: n,
        condition_estimate: fla::condition_estimate(af.as_ref()),
    })
}

/// Proves by exact elimination that the functionals of `space` determine a
/// polynomial of the family uniquely on this element.
pub fn unisolvence_check(space: SpaceId, k: usize, ctx: &ElementContext) -> Result<UnisolvenceReport> {
    let dofs = local_dofs(space, k, ctx)?;
    check_dofs_unisolvent(space, k, &dofs, ctx)
}

/// Shape functions: field j evaluates to 1 under functional j and to 0 under
/// every other functional. Exact.
pub fn dual_basis(space: SpaceId, k: usize, ctx: &ElementContext) -> Result<LocalBasis> {
    let dofs = local_dofs(space, k, ctx)?;
    let basis = monomial_basis(space.degree(k), space.shape(), &ctx.geom)?;
    if dofs.len() != basis.len() {
        return Err(Error::Unisolvence(format!(
            "space {space} at k = {k}: {} functionals against polynomial dimension {}",
            dofs.len(),
            basis.len()
        )));
    }
    let a = dof_matrix(&dofs, &basis, ctx)?;
    let n = a.nrows;
    let inv = solve_exact(&a, &RatMat::identity(n))?;
    let shape = space.shape();
    let mut fields = Vec::with_capacity(n);
    for j in 0..n {
        let mut f = TensorField::zero(shape);
        for (m, bf) in basis.fields.iter().enumerate() {
            let c = &inv[(m, j)];
            if !c.is_zero() {
                f = f.add(&bf.scale(c));
            }
        }
        fields.push(f);
    }
    Ok(LocalBasis {
        shape,
        degree: space.degree(k),
        fields,
        geom: ctx.geom.clone(),
    })
}

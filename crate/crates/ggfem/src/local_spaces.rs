//! Local polynomial spaces on a single tetrahedron.
//!
//! Two families of spaces live here, each in two flavors:
//!
//! * symmetric-valued bubbles for the curl-conforming space: spanned by
//!   `l_j l_l l_m q n_i n_i^T` with q a face polynomial of f_i, plus
//!   `l_0 l_1 l_2 l_3 P_{k-4}(K;S)`; the starred flavor restricts q to
//!   face polynomials vanishing at the vertices of f_i;
//! * traceless-valued bubbles for the div-conforming space: spanned by
//!   `l_j l_l p n_i t_{j,l}^T` over in-face edges (j,l) with p a volume
//!   polynomial of degree k-2; the starred flavor restricts p to vanish
//!   at x_j and x_l.
//!
//! Each spanning set is compared against the corresponding boundary-trace
//! kernel (`sigma x n = 0` resp. `v n = 0` on all faces, with vertex
//! derivative conditions added for the starred flavors), and equality of
//! spans is decided by exact rank computations.
//!
//! Coordinates: a field of degree <= k is written in the homogeneous
//! degree-k barycentric monomial basis, one block of `ncomp` stored
//! components per monomial (column `m * ncomp + c`). Boundary and vertex
//! constraints then touch only a handful of monomial blocks per row, which
//! keeps all constraint systems sparse.

use num_traits::Zero;

use crate::calculus::{div_mat, dx_multi, matrix_cross_normal, matrix_dot_normal};
use crate::geom::GeomCache;
use crate::integrate::integrate_tet;
use crate::linalg::{sparse_dot, sparse_rank, sparse_rank_kernel, SparseRow};
use crate::num::{rat_display, rat_i, Rat};
use crate::poly::{exps3_upto, hom_exps4, hom_index4, BaryPoly, Exp};
use crate::tensor::{nnt_field, ntt_dev_field, Shape, TensorField};
use crate::{Error, Result, DEGREE_CAP};

/// Local vertex triple of face i (the vertices other than i, ascending).
const FACE_LOCALS: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

/// A spanning set of polynomial tensor fields on one tetrahedron.
///
/// The set may be redundant; [`LocalBasis::dim`] computes the exact rank.
#[derive(Clone, Debug)]
pub struct LocalBasis {
    pub shape: Shape,
    pub degree: usize,
    pub fields: Vec<TensorField>,
    pub geom: GeomCache,
}

impl LocalBasis {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Coordinate rows of the fields in the homogeneous monomial basis.
    pub fn coord_rows(&self) -> Result<Vec<SparseRow>> {
        self.fields
            .iter()
            .map(|f| field_coord_row(f, self.degree))
            .collect()
    }

    /// Dimension of the span, by exact rank.
    pub fn dim(&self) -> Result<usize> {
        let ncols = hom_dim(self.degree) * self.shape.ncomp();
        Ok(sparse_rank(&self.coord_rows()?, ncols))
    }
}

/// A space cut out of the full polynomial space by linear constraints,
/// together with its exact kernel basis.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    /// Monomial basis of the ambient space P_k(K;X).
    pub basis: LocalBasis,
    /// Constraint functionals as coefficient rows over that basis.
    pub rows: Vec<SparseRow>,
    /// Exact rank of the constraint rows.
    pub rank: usize,
    /// Kernel basis vectors, coordinates over `basis`.
    pub kernel: Vec<SparseRow>,
}

impl ConstraintSystem {
    /// Dimension of the constrained space.
    pub fn dim(&self) -> usize {
        self.kernel.len()
    }

    /// Materialize the kernel basis as tensor fields.
    pub fn kernel_fields(&self) -> Vec<TensorField> {
        self.kernel
            .iter()
            .map(|row| {
                let mut f = TensorField::zero(self.basis.shape);
                for (col, c) in row {
                    f = f.add(&self.basis.fields[*col].scale(c));
                }
                f
            })
            .collect()
    }
}

/// Variant selector for [`face_scalar_space`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceVariant {
    Full,
    /// Vanish at all three vertices of the face.
    VanishVertices,
    /// Vanish at the two named vertices (local tet indices on the face).
    VanishTwoVertices(usize, usize),
}

/// Bubble space selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BubbleSpace {
    Sigma,
    SigmaStar,
    V,
    VStar,
}

/// Trace-constrained space selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceSpace {
    SigmaFull,
    SigmaStar,
    VFull,
    VStar,
}

/// Constant-matrix basis lemma selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisLemma {
    /// n_i n_i^T (4 of them) plus sym(n_1 n_2^T), sym(n_1 n_3^T) span the
    /// symmetric matrices.
    SymNormals,
    /// n_i t^T over two independent in-face tangents per face span the
    /// traceless matrices.
    TracelessNt,
}

/// Span-equality report for a spanning set vs a constrained space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpanReport {
    pub equal: bool,
    pub dim_a: usize,
    pub dim_b: usize,
    pub dim_intersection: usize,
}

/// Report for the image of the divergence on a trace-constrained space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DivImageReport {
    pub image_dim: usize,
    pub target_dim: usize,
    pub equal: bool,
}

fn hom_dim(k: usize) -> usize {
    hom_exps4(k).len()
}

fn check_degree(k: usize) -> Result<()> {
    if k > DEGREE_CAP {
        return Err(Error::DegreeCap {
            got: k,
            cap: DEGREE_CAP,
        });
    }
    Ok(())
}

/// Coordinate row of one field in the homogeneous degree-k monomial basis.
fn field_coord_row(f: &TensorField, k: usize) -> Result<SparseRow> {
    let ncomp = f.shape.ncomp();
    let mut row: SparseRow = Vec::new();
    for c in 0..ncomp {
        let coords = f.comp(c).hom_coords(k)?;
        for (m, v) in coords.into_iter().enumerate() {
            if !v.is_zero() {
                row.push((m * ncomp + c, v));
            }
        }
    }
    row.sort_by_key(|e| e.0);
    Ok(row)
}

/// Monomial basis of P_k(K;X): one field per (homogeneous degree-k
/// barycentric monomial, stored component), ordered monomial-major.
pub fn monomial_basis(k: usize, shape: Shape, g: &GeomCache) -> Result<LocalBasis> {
    check_degree(k)?;
    let ncomp = shape.ncomp();
    let mut fields = Vec::with_capacity(hom_dim(k) * ncomp);
    for e in hom_exps4(k) {
        for c in 0..ncomp {
            let mut f = TensorField::zero(shape);
            *f.comp_mut(c) = BaryPoly::monomial(e, rat_i(1));
            fields.push(f);
        }
    }
    Ok(LocalBasis {
        shape,
        degree: k,
        fields,
        geom: g.clone(),
    })
}

/// Polynomials of degree <= k on face i, as volume polynomials: homogeneous
/// degree-k monomials in the three barycentric coordinates of the face.
/// Vertex-vanishing variants drop the pure powers of the named vertices.
pub fn face_scalar_space(
    face: usize,
    k: usize,
    variant: FaceVariant,
    g: &GeomCache,
) -> Result<LocalBasis> {
    check_degree(k)?;
    if face >= 4 {
        return Err(Error::Domain(format!("face index {face} out of range 0..4")));
    }
    let locals = FACE_LOCALS[face];
    let excluded: Vec<usize> = match variant {
        FaceVariant::Full => vec![],
        FaceVariant::VanishVertices => locals.to_vec(),
        FaceVariant::VanishTwoVertices(a, b) => {
            if a == b || !locals.contains(&a) || !locals.contains(&b) {
                return Err(Error::Domain(format!(
                    "vertices {a}, {b} must be two distinct vertices of face {face}"
                )));
            }
            vec![a, b]
        }
    };
    let mut fields = Vec::new();
    for e3 in crate::poly::hom_exps3(k) {
        let mut e: Exp = [0; 4];
        for (slot, &v) in locals.iter().enumerate() {
            e[v] = e3[slot];
        }
        // a monomial fails to vanish at a face vertex exactly when it is the
        // pure k-th power of that vertex's coordinate
        if excluded.iter().any(|&v| e[v] as usize == k) {
            continue;
        }
        fields.push(TensorField::scalar(BaryPoly::monomial(e, rat_i(1))));
    }
    Ok(LocalBasis {
        shape: Shape::Scalar,
        degree: k,
        fields,
        geom: g.clone(),
    })
}

/// Volume monomial scalars of degree k that vanish at the given vertices.
fn volume_vanishing_monomials(k: usize, vanish: &[usize]) -> Vec<BaryPoly> {
    hom_exps4(k)
        .into_iter()
        .filter(|e| !vanish.iter().any(|&v| e[v] as usize == k))
        .map(|e| BaryPoly::monomial(e, rat_i(1)))
        .collect()
}

/// The two bubble parts of the symmetric family: face-normal blocks
/// `l_j l_l l_m q n_i n_i^T` and the interior block `l_0 l_1 l_2 l_3
/// P_{k-4}(K;S)`. Separated so the direct-sum property can be checked.
fn sigma_bubble_parts(
    star: bool,
    k: usize,
    g: &GeomCache,
) -> Result<(Vec<TensorField>, Vec<TensorField>)> {
    let variant = if star {
        FaceVariant::VanishVertices
    } else {
        FaceVariant::Full
    };
    let mut face_part = Vec::new();
    for i in 0..4 {
        let mut bub = [0u8; 4];
        for &v in &FACE_LOCALS[i] {
            bub[v] = 1;
        }
        let bub = BaryPoly::monomial(bub, rat_i(1));
        let nnt = nnt_field(&g.normal[i]);
        for q in face_scalar_space(i, k - 3, variant, g)?.fields {
            face_part.push(nnt.scale_poly(&bub.mul(q.comp(0))));
        }
    }
    let interior = BaryPoly::monomial([1, 1, 1, 1], rat_i(1));
    let mut interior_part = Vec::new();
    for e in hom_exps4(k - 4) {
        let p = interior.mul(&BaryPoly::monomial(e, rat_i(1)));
        for s in 0..6 {
            let mut f = TensorField::zero(Shape::Sym);
            *f.comp_mut(s) = p.clone();
            interior_part.push(f);
        }
    }
    Ok((face_part, interior_part))
}

/// Spanning fields of the traceless bubble family: `l_j l_l p n_i t_{j,l}^T`
/// over faces i and in-face edges (j,l), p a volume polynomial of degree
/// k-2 (vanishing at x_j and x_l in the starred flavor).
fn v_bubble_fields(star: bool, k: usize, g: &GeomCache) -> Vec<TensorField> {
    let mut fields = Vec::new();
    for i in 0..4 {
        let [a, b, c] = FACE_LOCALS[i];
        for (j, l) in [(a, b), (a, c), (b, c)] {
            let ntt = ntt_dev_field(&g.normal[i], &g.tangent(j, l));
            let mut bub: Exp = [0; 4];
            bub[j] = 1;
            bub[l] = 1;
            let bub = BaryPoly::monomial(bub, rat_i(1));
            let vanish: &[usize] = if star { &[j, l] } else { &[] };
            for p in volume_vanishing_monomials(k - 2, vanish) {
                fields.push(ntt.scale_poly(&bub.mul(&p)));
            }
        }
    }
    fields
}

/// Bubble spanning set of the requested family and degree. The returned
/// spanning sets of the traceless family are redundant by construction;
/// use [`LocalBasis::dim`] for the dimension.
pub fn bubble_space(space: BubbleSpace, k: usize, g: &GeomCache) -> Result<LocalBasis> {
    check_degree(k)?;
    let (shape, fields) = match space {
        BubbleSpace::Sigma | BubbleSpace::SigmaStar => {
            if k < 4 {
                return Err(Error::Domain(format!(
                    "symmetric bubble space needs degree k >= 4, got {k}"
                )));
            }
            let star = space == BubbleSpace::SigmaStar;
            let (mut face_part, mut interior_part) = sigma_bubble_parts(star, k, g)?;
            face_part.append(&mut interior_part);
            (Shape::Sym, face_part)
        }
        BubbleSpace::V | BubbleSpace::VStar => {
            if k < 3 {
                return Err(Error::Domain(format!(
                    "traceless bubble space needs degree k >= 3, got {k}"
                )));
            }
            (Shape::Dev, v_bubble_fields(space == BubbleSpace::VStar, k, g))
        }
    };
    Ok(LocalBasis {
        shape,
        degree: k,
        fields,
        geom: g.clone(),
    })
}

/// Constant 3x3 matrices realized by the unit stored components of a shape,
/// read back through the field machinery so every convention stays in one
/// place.
fn slot_matrices(shape: Shape) -> Vec<TensorField> {
    (0..shape.ncomp())
        .map(|s| {
            let mut f = TensorField::zero(shape);
            *f.comp_mut(s) = BaryPoly::one();
            f
        })
        .collect()
}

fn const_eval(p: &BaryPoly) -> Rat {
    p.eval(&[rat_i(1), rat_i(0), rat_i(0), rat_i(0)])
}

/// Boundary-trace (and, for starred flavors, vertex-derivative) constraint
/// system over the monomial basis of P_k(K;S) or P_k(K;T), with its exact
/// kernel.
pub fn trace_kernel(space: TraceSpace, k: usize, g: &GeomCache) -> Result<ConstraintSystem> {
    check_degree(k)?;
    if k < 1 {
        return Err(Error::Domain(format!(
            "trace constraint system needs degree k >= 1, got {k}"
        )));
    }
    let sym = matches!(space, TraceSpace::SigmaFull | TraceSpace::SigmaStar);
    let shape = if sym { Shape::Sym } else { Shape::Dev };
    let ncomp = shape.ncomp();
    let basis = monomial_basis(k, shape, g)?;
    let exps = hom_exps4(k);
    let units = slot_matrices(shape);

    let mut rows: Vec<SparseRow> = Vec::new();
    for i in 0..4 {
        let n = &g.normal[i];
        // trace values of each unit component on face i, as constant
        // matrices (sigma x n) or vectors (v n)
        let traces: Vec<Vec<Rat>> = units
            .iter()
            .map(|u| {
                if sym {
                    let m = matrix_cross_normal(u, n);
                    (0..9).map(|c| const_eval(m.comp(c))).collect()
                } else {
                    let v = matrix_dot_normal(u, n);
                    (0..3).map(|c| const_eval(v.comp(c))).collect()
                }
            })
            .collect();
        let nkinds = traces[0].len();
        // the restriction of a monomial to face i survives exactly when its
        // exponent on lambda_i is zero, and distinct surviving monomials stay
        // independent on the face; so each (monomial, entry) pair is one row
        for (mi, e) in exps.iter().enumerate() {
            if e[i] != 0 {
                continue;
            }
            for kind in 0..nkinds {
                let row: SparseRow = (0..ncomp)
                    .filter(|&s| !traces[s][kind].is_zero())
                    .map(|s| (mi * ncomp + s, traces[s][kind].clone()))
                    .collect();
                if !row.is_empty() {
                    rows.push(row);
                }
            }
        }
    }

    let deriv_exps: Vec<[u8; 3]> = match space {
        TraceSpace::SigmaStar => exps3_upto(2),
        TraceSpace::VStar => exps3_upto(1)
            .into_iter()
            .filter(|b| b.iter().sum::<u8>() == 1)
            .collect(),
        _ => vec![],
    };
    if !deriv_exps.is_empty() {
        let max_off = if space == TraceSpace::SigmaStar { 2 } else { 1 };
        let index = hom_index4(k);
        for vtx in 0..4 {
            let mut bary = [rat_i(0), rat_i(0), rat_i(0), rat_i(0)];
            bary[vtx] = rat_i(1);
            // only monomials whose off-vertex degree is <= the derivative
            // order can contribute at this vertex
            let mut cands: Vec<(usize, Exp)> = Vec::new();
            for off in exps3_upto(max_off.min(k)) {
                let total: u8 = off.iter().sum();
                let mut e: Exp = [0; 4];
                e[vtx] = k as u8 - total;
                for (slot, &v) in FACE_LOCALS[vtx].iter().enumerate() {
                    e[v] = off[slot];
                }
                cands.push((index[&e], e));
            }
            cands.sort_by_key(|c| c.0);
            for beta in &deriv_exps {
                let mut entries: Vec<(usize, Rat)> = Vec::new();
                for (mi, e) in &cands {
                    let p = BaryPoly::monomial(*e, rat_i(1));
                    let val = dx_multi(&p, g, beta).eval(&bary);
                    if !val.is_zero() {
                        entries.push((*mi, val));
                    }
                }
                for s in 0..ncomp {
                    let row: SparseRow = entries
                        .iter()
                        .map(|(mi, v)| (mi * ncomp + s, v.clone()))
                        .collect();
                    if !row.is_empty() {
                        rows.push(row);
                    }
                }
            }
        }
    }

    let ncols = basis.fields.len();
    let (rank, kernel) = sparse_rank_kernel(&rows, ncols);
    Ok(ConstraintSystem {
        basis,
        rows,
        rank,
        kernel,
    })
}

/// Decide whether a spanning set and a constrained space span the same
/// subspace, reporting both dimensions and the dimension of the
/// intersection.
pub fn verify_span_equality(a: &LocalBasis, b: &ConstraintSystem) -> Result<SpanReport> {
    if a.shape != b.basis.shape || a.degree != b.basis.degree {
        return Err(Error::Domain(format!(
            "span comparison needs matching value space and degree, got {:?}/{} vs {:?}/{}",
            a.shape, a.degree, b.basis.shape, b.basis.degree
        )));
    }
    if a.geom.verts != b.basis.geom.verts {
        return Err(Error::Domain(
            "span comparison needs both spaces on the same tetrahedron".into(),
        ));
    }
    let ncols = hom_dim(a.degree) * a.shape.ncomp();
    let a_rows = a.coord_rows()?;
    let dim_a = sparse_rank(&a_rows, ncols);
    let dim_b = b.kernel.len();
    let mut stacked = a_rows;
    stacked.extend(b.kernel.iter().cloned());
    let rank_union = sparse_rank(&stacked, ncols);
    Ok(SpanReport {
        equal: dim_a == dim_b && rank_union == dim_a,
        dim_a,
        dim_b,
        dim_intersection: dim_a + dim_b - rank_union,
    })
}

/// Check that the constant-matrix sets built from face normals and edge
/// tangents have full rank (6 for the symmetric set, 8 for the traceless
/// set). Returns the rank; a rank-deficient set produces an error carrying
/// a witness combination.
pub fn basis_lemma_check(lemma: BasisLemma, g: &GeomCache) -> Result<usize> {
    let fields: Vec<TensorField> = match lemma {
        BasisLemma::SymNormals => {
            let mut fs: Vec<TensorField> = (0..4).map(|i| nnt_field(&g.normal[i])).collect();
            for j in [2, 3] {
                fs.push(sym_outer(&g.normal[1], &g.normal[j]));
            }
            fs
        }
        BasisLemma::TracelessNt => {
            let mut fs = Vec::new();
            for i in 0..4 {
                let (a, b, c) = ((i + 1) % 4, (i + 2) % 4, (i + 3) % 4);
                for t in [g.tangent(a, b), g.tangent(a, c)] {
                    fs.push(ntt_dev_field(&g.normal[i], &t));
                }
            }
            fs
        }
    };
    let expected = fields[0].shape.ncomp();
    let rows: Vec<SparseRow> = fields
        .iter()
        .map(|f| field_coord_row(f, 0))
        .collect::<Result<_>>()?;
    let rank = sparse_rank(&rows, expected);
    if rank < expected {
        // transpose so kernel vectors are dependent combinations of the set
        let mut t_rows: Vec<SparseRow> = vec![Vec::new(); expected];
        for (ri, row) in rows.iter().enumerate() {
            for (c, v) in row {
                t_rows[*c].push((ri, v.clone()));
            }
        }
        let (_, ker) = sparse_rank_kernel(&t_rows, rows.len());
        let witness: Vec<String> = (0..rows.len())
            .map(|i| {
                ker[0]
                    .iter()
                    .find(|(c, _)| *c == i)
                    .map(|(_, v)| rat_display(v))
                    .unwrap_or_else(|| "0".into())
            })
            .collect();
        return Err(Error::Verification(format!(
            "matrix set has rank {rank} < {expected}; dependent combination [{}]",
            witness.join(", ")
        )));
    }
    Ok(rank)
}

/// symmetrized outer product a b^T + b a^T as a constant field
fn sym_outer(a: &[Rat; 3], b: &[Rat; 3]) -> TensorField {
    let entries: [[BaryPoly; 3]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|j| BaryPoly::constant(&a[i] * &b[j] + &b[i] * &a[j]))
    });
    TensorField::sym_from_entries(&entries)
}

/// Compare the image of the divergence on a trace-constrained traceless
/// space against its predicted target: vector polynomials of degree k-1
/// with vanishing component integrals and vanishing weighted integral
/// `int (x q_1 + y q_2 + z q_3)`, plus vanishing vertex values for the
/// starred flavor.
pub fn div_image_check(space: TraceSpace, k: usize, g: &GeomCache) -> Result<DivImageReport> {
    if !matches!(space, TraceSpace::VFull | TraceSpace::VStar) {
        return Err(Error::Domain(
            "divergence image check applies to the traceless family".into(),
        ));
    }
    if k < 3 {
        return Err(Error::Domain(format!(
            "divergence image check needs degree k >= 3, got {k}"
        )));
    }
    let cs = trace_kernel(space, k, g)?;
    let image_rows: Vec<SparseRow> = cs
        .kernel_fields()
        .iter()
        .map(|f| field_coord_row(&div_mat(f, g), k - 1))
        .collect::<Result<_>>()?;

    let exps = hom_exps4(k - 1);
    let ncols = exps.len() * 3;
    // coordinate functions x, y, z as barycentric polynomials
    let coords: [BaryPoly; 3] = std::array::from_fn(|c| {
        let mut p = BaryPoly::zero();
        for v in 0..4 {
            p = p.add(&BaryPoly::lam(v).scale(&g.verts[v][c]));
        }
        p
    });
    let mut target_rows: Vec<SparseRow> = Vec::new();
    for c in 0..3 {
        let mut row = Vec::new();
        for (mi, e) in exps.iter().enumerate() {
            row.push((mi * 3 + c, integrate_tet(&BaryPoly::monomial(*e, rat_i(1)), g)?));
        }
        target_rows.push(row);
    }
    let mut weighted = Vec::new();
    for (mi, e) in exps.iter().enumerate() {
        let mono = BaryPoly::monomial(*e, rat_i(1));
        for c in 0..3 {
            let v = integrate_tet(&coords[c].mul(&mono), g)?;
            if !v.is_zero() {
                weighted.push((mi * 3 + c, v));
            }
        }
    }
    weighted.sort_by_key(|e| e.0);
    target_rows.push(weighted);
    if space == TraceSpace::VStar {
        let index = hom_index4(k - 1);
        for vtx in 0..4 {
            let mut e: Exp = [0; 4];
            e[vtx] = (k - 1) as u8;
            let mi = index[&e];
            for c in 0..3 {
                target_rows.push(vec![(mi * 3 + c, rat_i(1))]);
            }
        }
    }
    let (_, target_kernel) = sparse_rank_kernel(&target_rows, ncols);
    let target_dim = target_kernel.len();

    let image_dim = sparse_rank(&image_rows, ncols);
    let contained = image_rows
        .iter()
        .all(|r| target_rows.iter().all(|c| sparse_dot(c, r).is_zero()));
    Ok(DivImageReport {
        image_dim,
        target_dim,
        equal: contained && image_dim == target_dim,
    })
}

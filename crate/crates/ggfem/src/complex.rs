//! Global operator matrices for the discrete complex and its verification.
//!
//! The chain under test at parameter k is
//!
//! ```text
//! P_1  ⊂  U(k)  --gradgrad-->  Sigma(k)  --curl-->  V(k-1)  --div-->  Q(k)  -->  0
//! ```
//!
//! together with the dual chain ending in the unconstrained space Vhat(k),
//! which is closed but deliberately not exact. Matrices are expressed in the
//! assembled degree-of-freedom bases: column j of an operator matrix holds
//! the codomain DOF values of the operator applied to domain shape function
//! j. In exact mode every entry is a rational number and every containment
//! claim is an identity, not an approximation.
//!
//! Assembly never materializes shape functions. Per element, the operator is
//! applied to the monomial basis, both sides are evaluated against their DOF
//! sets, and one sparse exact solve against the transposed evaluation matrix
//! turns monomial columns into shape-function columns. Elements sharing an
//! entity must reproduce identical rows for its DOFs; the assembler checks
//! this on every rewrite, and additionally rejects any nonzero entry whose
//! row entity touches an element where the domain shape function vanishes
//! identically (there the image is the zero field, so a conforming image
//! must evaluate to zero from the other side as well). Passing both checks
//! is precisely the statement that the operator maps the domain space into
//! the codomain space.

use std::collections::HashMap;

use faer::Mat;
use num_traits::{One, Zero};

use crate::calculus::{curl_mat, div_mat, gradgrad};
use crate::dof::{dof_matrix, dof_values, SpaceId};
use crate::fla::{self, LuFactor, RANK_EPS, RANK_GAP_MIN};
use crate::geom::GeomCache;
use crate::global_space::{assemble_space, interpolate, GlobalSpace};
use crate::integrate::l2_pairing;
use crate::linalg::{
    modp_rank_lower_bound, solve_exact_sparse, sparse_rank, sparse_rank_kernel, to_sparse_rows,
    RatMat, SparseRow,
};
use crate::local_spaces::monomial_basis;
use crate::mesh::TetMesh;
use crate::num::{rat_to_f64, Rat};
use crate::poly::BaryPoly;
use crate::tensor::{Shape, TensorField};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComplexOp {
    Gradgrad,
    Curl,
    Div,
    /// Identity embedding of V(k) into Vhat(k+1), both of polynomial degree k.
    Embed,
}

impl std::fmt::Display for ComplexOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ComplexOp::Gradgrad => "gradgrad",
            ComplexOp::Curl => "curl",
            ComplexOp::Div => "div",
            ComplexOp::Embed => "embed",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::Domain(format!(
                "unknown mode '{other}', expected 'exact' or 'float'"
            ))),
        }
    }
}

pub enum Entries {
    Exact(RatMat),
    Float(Mat<f64>),
}

pub struct OperatorMatrix<'a, 'm> {
    pub op: ComplexOp,
    pub domain: &'a GlobalSpace<'m>,
    pub codomain: &'a GlobalSpace<'m>,
    pub entries: Entries,
    /// Largest accepted disagreement between elements writing one shared
    /// entry (including writes compared against an implicit zero from an
    /// element off the shape function's support). Exactly 0.0 in exact mode;
    /// any exact-mode disagreement fails assembly instead.
    pub membership_residual: f64,
}

impl OperatorMatrix<'_, '_> {
    pub fn nrows(&self) -> usize {
        self.codomain.dim
    }

    pub fn ncols(&self) -> usize {
        self.domain.dim
    }

    pub fn to_float(&self) -> Mat<f64> {
        match &self.entries {
            Entries::Float(m) => m.clone(),
            Entries::Exact(m) => Mat::from_fn(m.nrows, m.ncols, |i, j| rat_to_f64(&m[(i, j)])),
        }
    }
}

/// How a rank was decided. `certified` ranks come from exact elimination;
/// float ranks carry the relative gap between the smallest kept and largest
/// dropped singular value.
#[derive(Clone, Copy, Debug)]
pub struct RankInfo {
    pub rank: usize,
    pub certified: bool,
    pub float_gap: Option<f64>,
}

pub fn operator_rank(m: &OperatorMatrix) -> RankInfo {
    match &m.entries {
        Entries::Exact(a) => RankInfo {
            rank: sparse_rank(&to_sparse_rows(a), a.ncols),
            certified: true,
            float_gap: None,
        },
        Entries::Float(a) => {
            let fr = fla::float_rank(a.as_ref(), RANK_EPS);
            RankInfo {
                rank: fr.rank,
                certified: false,
                float_gap: Some(fr.gap),
            }
        }
    }
}

/// Rank of an operator, escalated to an exact recomputation whenever the
/// float decision is tolerance-fragile (gap below [`RANK_GAP_MIN`]). The
/// float gap that triggered the escalation is kept for the report.
fn rank_with_escalation(m: &OperatorMatrix) -> Result<RankInfo> {
    let info = operator_rank(m);
    if info.certified || info.float_gap.unwrap_or(f64::INFINITY) >= RANK_GAP_MIN {
        return Ok(info);
    }
    let raw = raw_basis(m.domain)?;
    let cols = stacked_image_columns(m.domain, &raw, m.op, m.codomain)?;
    Ok(RankInfo {
        rank: sparse_rank(&cols, m.codomain.dim),
        certified: true,
        float_gap: info.float_gap,
    })
}

fn check_compatible(op: ComplexOp, domain: &GlobalSpace, codomain: &GlobalSpace) -> Result<()> {
    let (ds, dk, cs, ck) = (domain.space, domain.k, codomain.space, codomain.k);
    let ok = match op {
        ComplexOp::Gradgrad => ds == SpaceId::U && cs == SpaceId::Sigma && ck == dk,
        ComplexOp::Curl => {
            ds == SpaceId::Sigma
                && ((cs == SpaceId::V && ck + 1 == dk) || (cs == SpaceId::Vhat && ck == dk))
        }
        ComplexOp::Div => ds == SpaceId::V && cs == SpaceId::Q && ck == dk + 1,
        ComplexOp::Embed => ds == SpaceId::V && cs == SpaceId::Vhat && ck == dk + 1,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "no {op} map from ({ds}, k={dk}) into ({cs}, k={ck})"
        )))
    }
}

fn apply_op(op: ComplexOp, f: &TensorField, g: &GeomCache) -> TensorField {
    match op {
        ComplexOp::Gradgrad => gradgrad(f.comp(0), g),
        ComplexOp::Curl => curl_mat(f, g),
        ComplexOp::Div => div_mat(f, g),
        ComplexOp::Embed => f.clone(),
    }
}

/// Elements adjacent to each global DOF's owning entity, ascending.
fn adjacency(space: &GlobalSpace) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); space.dim];
    for (t, map) in space.element_maps.iter().enumerate() {
        for &g in map {
            adj[g].push(t);
        }
    }
    adj
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

pub fn operator_matrix<'a, 'm>(
    op: ComplexOp,
    domain: &'a GlobalSpace<'m>,
    codomain: &'a GlobalSpace<'m>,
    mode: Mode,
) -> Result<OperatorMatrix<'a, 'm>> {
    Ok(operator_matrices(domain, &[(op, codomain)], mode)?
        .pop()
        .expect("one item in, one out"))
}

/// Assembles several operators that share a domain in one pass, paying the
/// per-element domain solve once. Used to get curl into V and into Vhat from
/// a single Sigma elimination.
pub fn operator_matrices<'a, 'm>(
    domain: &'a GlobalSpace<'m>,
    items: &[(ComplexOp, &'a GlobalSpace<'m>)],
    mode: Mode,
) -> Result<Vec<OperatorMatrix<'a, 'm>>> {
    for (op, cod) in items {
        check_compatible(*op, domain, cod)?;
        if !std::ptr::eq(domain.mesh as *const TetMesh, cod.mesh as *const TetMesh) {
            return Err(Error::Domain(format!(
                "{op}: domain and codomain are assembled on different meshes"
            )));
        }
    }
    let mesh = domain.mesh;
    let n = domain.element_dofs[0].len();
    let widths: Vec<usize> = items.iter().map(|(_, c)| c.element_dofs[0].len()).collect();
    let mut offs = vec![0usize];
    for w in &widths {
        offs.push(offs.last().unwrap() + w);
    }
    let total_w = *offs.last().unwrap();

    let col_elems = adjacency(domain);
    let row_elems: Vec<Vec<Vec<usize>>> = items.iter().map(|(_, c)| adjacency(c)).collect();

    let mut exact_mats: Vec<RatMat> = Vec::new();
    let mut float_mats: Vec<Mat<f64>> = Vec::new();
    match mode {
        Mode::Exact => {
            for (_, c) in items {
                exact_mats.push(RatMat::zeros(c.dim, domain.dim));
            }
        }
        Mode::Float => {
            for (_, c) in items {
                float_mats.push(Mat::zeros(c.dim, domain.dim));
            }
        }
    }
    let mut written: Vec<Vec<bool>> = items
        .iter()
        .map(|(_, c)| vec![false; c.dim * domain.dim])
        .collect();
    let mut residuals = vec![0.0f64; items.len()];

    for t in 0..mesh.tets.len() {
        let dctx = &domain.contexts[t];
        let basis = monomial_basis(domain.space.degree(domain.k), domain.space.shape(), &dctx.geom)?;
        debug_assert_eq!(basis.len(), n);
        let d = dof_matrix(&domain.element_dofs[t], &basis, dctx)?;
        let mut rhs = RatMat::zeros(n, total_w);
        for (m, bf) in basis.fields.iter().enumerate() {
            for (idx, (op, cod)) in items.iter().enumerate() {
                let image = apply_op(*op, bf, &dctx.geom);
                let vals = dof_values(&cod.element_dofs[t], &image, &cod.contexts[t])?;
                for (i, v) in vals.into_iter().enumerate() {
                    if !v.is_zero() {
                        rhs[(m, offs[idx] + i)] = v;
                    }
                }
            }
        }
        match mode {
            Mode::Exact => {
                let y = solve_exact_sparse(&d.transpose(), &rhs).map_err(|e| {
                    Error::Unisolvence(format!(
                        "element {t}: {} evaluation matrix rejected: {e}",
                        domain.space
                    ))
                })?;
                for (idx, (op, cod)) in items.iter().enumerate() {
                    let mat = &mut exact_mats[idx];
                    let wr = &mut written[idx];
                    for i in 0..widths[idx] {
                        let gi = cod.element_maps[t][i];
                        for j in 0..n {
                            let gj = domain.element_maps[t][j];
                            let v = &y[(j, offs[idx] + i)];
                            if !v.is_zero() && !is_subset(&row_elems[idx][gi], &col_elems[gj]) {
                                return Err(Error::Verification(format!(
                                    "{op} image of {} shape function {gj} is not in {}: \
                                     DOF {gi} on {:?} evaluates to {v} from element {t}, but \
                                     the shape function vanishes on another element adjacent \
                                     to that entity",
                                    domain.space, cod.space, cod.owners[gi]
                                )));
                            }
                            let slot = gi * domain.dim + gj;
                            if wr[slot] {
                                if mat[(gi, gj)] != *v {
                                    return Err(Error::Verification(format!(
                                        "{op} image of {} shape function {gj} is not in {}: \
                                         DOF {gi} on {:?} evaluates to {v} from element {t} \
                                         but to {} from an earlier element",
                                        domain.space,
                                        cod.space,
                                        cod.owners[gi],
                                        mat[(gi, gj)]
                                    )));
                                }
                            } else {
                                wr[slot] = true;
                                if !v.is_zero() {
                                    mat[(gi, gj)] = v.clone();
                                }
                            }
                        }
                    }
                }
            }
            Mode::Float => {
                let dt = Mat::from_fn(n, n, |r, c| rat_to_f64(&d[(c, r)]));
                let lu = LuFactor::new(dt.as_ref())?;
                let rf = Mat::from_fn(n, total_w, |r, c| rat_to_f64(&rhs[(r, c)]));
                let y = lu.solve_mat(rf.as_ref());
                let mut scale = 1.0f64;
                for j in 0..n {
                    for c in 0..total_w {
                        scale = scale.max(y[(j, c)].abs());
                    }
                }
                let tol = RANK_EPS * scale;
                for (idx, (op, cod)) in items.iter().enumerate() {
                    let mat = &mut float_mats[idx];
                    let wr = &mut written[idx];
                    for i in 0..widths[idx] {
                        let gi = cod.element_maps[t][i];
                        for j in 0..n {
                            let gj = domain.element_maps[t][j];
                            let v = y[(j, offs[idx] + i)];
                            if v.abs() > tol && !is_subset(&row_elems[idx][gi], &col_elems[gj]) {
                                return Err(Error::Verification(format!(
                                    "{op} image of {} shape function {gj} leaves {}: \
                                     DOF {gi} on {:?} evaluates to {v:e} from element {t} \
                                     where zero extension is required",
                                    domain.space, cod.space, cod.owners[gi]
                                )));
                            }
                            let slot = gi * domain.dim + gj;
                            if wr[slot] {
                                let diff = (mat[(gi, gj)] - v).abs();
                                if diff > tol {
                                    return Err(Error::Verification(format!(
                                        "{op} image of {} shape function {gj} leaves {}: \
                                         DOF {gi} on {:?} differs across elements by {diff:e}",
                                        domain.space, cod.space, cod.owners[gi]
                                    )));
                                }
                                residuals[idx] = residuals[idx].max(diff);
                            } else {
                                wr[slot] = true;
                                if !is_subset(&row_elems[idx][gi], &col_elems[gj]) {
                                    // Some adjacent element sees this shape
                                    // function as the zero field; the write
                                    // is reconciled against an implicit zero.
                                    residuals[idx] = residuals[idx].max(v.abs());
                                }
                                mat[(gi, gj)] = v;
                            }
                        }
                    }
                }
            }
        }
    }

    let mut out = Vec::with_capacity(items.len());
    for (idx, (op, cod)) in items.iter().enumerate() {
        let entries = match mode {
            Mode::Exact => Entries::Exact(std::mem::replace(&mut exact_mats[idx], RatMat::zeros(0, 0))),
            Mode::Float => Entries::Float(std::mem::replace(&mut float_mats[idx], Mat::zeros(0, 0))),
        };
        out.push(OperatorMatrix {
            op: *op,
            domain,
            codomain: cod,
            entries,
            membership_residual: residuals[idx],
        });
    }
    Ok(out)
}

fn field_is_zero(f: &TensorField) -> bool {
    let zero = BaryPoly::zero();
    f.comps().iter().all(|p| p.func_eq(&zero))
}

/// Exact certificate that a composite of two calculus operators annihilates
/// every polynomial of the given shape and degree on every element of the
/// mesh, checked monomial by monomial in rational arithmetic.
///
/// Once both factor matrices passed their membership checks, this certifies
/// that their product is the zero matrix: the first matrix sends the DOF
/// vector of a member field to the DOF vector of its image (columns are
/// images of shape functions, and images lie in the codomain space, so
/// linearity extends the identity from shape functions to members), hence a
/// product column equals the DOF vector of the composite applied to a shape
/// function, and the composite is zero pointwise.
fn composition_vanishes<F>(mesh: &TetMesh, degree: usize, shape: Shape, compose: F) -> Result<bool>
where
    F: Fn(&TensorField, &GeomCache) -> TensorField,
{
    for g in &mesh.geom {
        for f in &monomial_basis(degree, shape, g)?.fields {
            if !field_is_zero(&compose(f, g)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Exact verification in raw piecewise coordinates.
//
// Materializing the exact DOF-basis operator matrix needs one rational solve
// against the evaluation matrix per element, and for the degree-7 Sigma and
// V spaces that solve is prohibitively slow (the interior block is dense and
// entries grow during elimination; measured in the tens of CPU-minutes per
// element). Ranks and memberships never need it: a global space is exactly
// the kernel of the sparse shared-DOF consistency system acting on stacked
// per-element monomial coefficients, so the operator's image is spanned by
// the stacked codomain DOF values of that kernel basis, and every entry
// involved is a small exact rational. Rank of the image is basis-free, and
// per-element unisolvence makes the stacked DOF map injective, so the rank
// computed here equals the rank of the DOF-basis operator matrix.
// ---------------------------------------------------------------------------

/// For each global DOF, the (element, local index) pairs that evaluate it.
fn dof_writers(space: &GlobalSpace) -> Vec<Vec<(usize, usize)>> {
    let mut w: Vec<Vec<(usize, usize)>> = vec![Vec::new(); space.dim];
    for (t, map) in space.element_maps.iter().enumerate() {
        for (i, &g) in map.iter().enumerate() {
            w[g].push((t, i));
        }
    }
    w
}

/// Basis of an assembled space in stacked per-element monomial coordinates:
/// the certified kernel of the consistency system whose rows say "both
/// elements sharing a DOF evaluate it equally". Entity DOF rows of the
/// evaluation matrix are sparse, so the whole computation stays small.
struct RawBasis {
    /// One sparse column per basis function, indexed by element * n + monomial.
    cols: Vec<SparseRow>,
}

fn raw_basis(space: &GlobalSpace) -> Result<RawBasis> {
    let nt = space.mesh.tets.len();
    let n = space.element_dofs[0].len();
    let writers = dof_writers(space);

    let mut need: Vec<Vec<usize>> = vec![Vec::new(); nt];
    for w in &writers {
        if w.len() > 1 {
            for &(t, i) in w {
                need[t].push(i);
            }
        }
    }
    let mut eval_rows: Vec<HashMap<usize, SparseRow>> = vec![HashMap::new(); nt];
    for t in 0..nt {
        if need[t].is_empty() {
            continue;
        }
        let ctx = &space.contexts[t];
        let basis = monomial_basis(space.space.degree(space.k), space.space.shape(), &ctx.geom)?;
        let sel: Vec<_> = need[t]
            .iter()
            .map(|&i| space.element_dofs[t][i].clone())
            .collect();
        let d = dof_matrix(&sel, &basis, ctx)?;
        for (r, &i) in need[t].iter().enumerate() {
            let mut row: SparseRow = Vec::new();
            for c in 0..n {
                let v = &d[(r, c)];
                if !v.is_zero() {
                    row.push((c, v.clone()));
                }
            }
            eval_rows[t].insert(i, row);
        }
    }

    let mut jumps: Vec<SparseRow> = Vec::new();
    for w in &writers {
        if w.len() < 2 {
            continue;
        }
        let (t0, i0) = w[0];
        let base = &eval_rows[t0][&i0];
        for &(t, i) in &w[1..] {
            let mut row: SparseRow = base.iter().map(|(c, v)| (t0 * n + c, v.clone())).collect();
            row.extend(eval_rows[t][&i].iter().map(|(c, v)| (t * n + c, -v)));
            debug_assert!(row.windows(2).all(|p| p[0].0 < p[1].0));
            jumps.push(row);
        }
    }

    let (_, cols) = sparse_rank_kernel(&jumps, nt * n);
    if cols.len() != space.dim {
        return Err(Error::Verification(format!(
            "{} at k = {}: consistency system kernel has dimension {}, \
             assembled dimension is {}",
            space.space,
            space.k,
            cols.len(),
            space.dim
        )));
    }
    Ok(RawBasis { cols })
}

/// Codomain DOF values of op applied to each basis function of the domain
/// space, one sparse column per basis function over global codomain DOFs.
/// Every shared DOF is evaluated from all adjacent elements and the values
/// must agree exactly (elements outside the function's support contribute
/// exact zeros), which is the membership of the image in the codomain space.
fn stacked_image_columns(
    domain: &GlobalSpace,
    raw: &RawBasis,
    op: ComplexOp,
    codomain: &GlobalSpace,
) -> Result<Vec<SparseRow>> {
    check_compatible(op, domain, codomain)?;
    let mesh = domain.mesh;
    let nt = mesh.tets.len();
    let n = domain.element_dofs[0].len();
    let ncod = codomain.element_dofs[0].len();

    // g[t][m] = codomain DOF values of op(monomial m) on element t.
    let mut g: Vec<Vec<Vec<Rat>>> = Vec::with_capacity(nt);
    for t in 0..nt {
        let dctx = &domain.contexts[t];
        let basis = monomial_basis(domain.space.degree(domain.k), domain.space.shape(), &dctx.geom)?;
        let mut gt = Vec::with_capacity(n);
        for bf in &basis.fields {
            let image = apply_op(op, bf, &dctx.geom);
            gt.push(dof_values(&codomain.element_dofs[t], &image, &codomain.contexts[t])?);
        }
        g.push(gt);
    }

    let writers = dof_writers(codomain);
    let mut buf: Vec<Rat> = vec![Rat::zero(); nt * ncod];
    let mut stamp: Vec<usize> = vec![usize::MAX; codomain.dim];
    let mut out = Vec::with_capacity(raw.cols.len());
    for (j, col) in raw.cols.iter().enumerate() {
        let mut elems: Vec<usize> = Vec::new();
        for (sc, w) in col {
            let (t, m) = (sc / n, sc % n);
            if elems.last() != Some(&t) {
                elems.push(t);
            }
            let base = t * ncod;
            for (i, gv) in g[t][m].iter().enumerate() {
                if !gv.is_zero() {
                    buf[base + i] += gv * w;
                }
            }
        }
        let mut entries: SparseRow = Vec::new();
        for &t in &elems {
            for i in 0..ncod {
                let gd = codomain.element_maps[t][i];
                if stamp[gd] == j {
                    continue;
                }
                stamp[gd] = j;
                let wl = &writers[gd];
                let first = &buf[wl[0].0 * ncod + wl[0].1];
                for &(tw, iw) in &wl[1..] {
                    if buf[tw * ncod + iw] != *first {
                        return Err(Error::Verification(format!(
                            "{op} image of a {} member is not in {}: DOF {gd} on \
                             {:?} takes the value {} from element {} but {} from \
                             element {tw}",
                            domain.space,
                            codomain.space,
                            codomain.owners[gd],
                            first,
                            wl[0].0,
                            buf[tw * ncod + iw]
                        )));
                    }
                }
                if !first.is_zero() {
                    entries.push((gd, first.clone()));
                }
            }
        }
        entries.sort_by_key(|&(c, _)| c);
        out.push(entries);
        for &t in &elems {
            for x in &mut buf[t * ncod..(t + 1) * ncod] {
                if !x.is_zero() {
                    *x = Rat::zero();
                }
            }
        }
    }
    Ok(out)
}

/// Certified exact rank of a matrix given by sparse columns. When a proven
/// upper bound is supplied and the prime-field lower bound meets it, the
/// rank is pinned without any exact elimination; otherwise falls back to the
/// generic certified path.
fn raw_rank(cols: &[SparseRow], nrows: usize, upper: Option<usize>) -> usize {
    let lower = modp_rank_lower_bound(cols, nrows);
    match upper {
        Some(u) if u == lower => lower,
        _ => sparse_rank(cols, nrows),
    }
}

/// Exact check that the four-dimensional space of global affine functions
/// interpolates into the scalar space and is reproduced by it elementwise,
/// which places it inside the assembled space.
fn linears_reproduce(u: &GlobalSpace) -> Result<bool> {
    let mesh = u.mesh;
    let nt = mesh.tets.len();
    for a in 0..4usize {
        let mut target = Vec::with_capacity(nt);
        for tet in &mesh.tets {
            let mut p = BaryPoly::zero();
            for (li, &vi) in tet.iter().enumerate() {
                let c = if a == 0 {
                    Rat::one()
                } else {
                    mesh.vertices[vi][a - 1].clone()
                };
                if !c.is_zero() {
                    p = p.add(&BaryPoly::lam(li).scale(&c));
                }
            }
            target.push(TensorField::scalar(p));
        }
        let (coeffs, rep) = interpolate(u, &target)?;
        if !rep.max_residual.is_zero() {
            return Ok(false);
        }
        for (t, f) in target.iter().enumerate() {
            if !u.element_interpolant(&coeffs, t)?.comp(0).func_eq(f.comp(0)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn raw_op_report(
    op: ComplexOp,
    domain: &GlobalSpace,
    raw: &RawBasis,
    codomain: &GlobalSpace,
    upper: Option<usize>,
) -> Result<OpReport> {
    let cols = stacked_image_columns(domain, raw, op, codomain)?;
    let rank = raw_rank(&cols, codomain.dim, upper);
    Ok(OpReport {
        op,
        domain_dim: domain.dim,
        codomain_dim: codomain.dim,
        rank,
        kernel_dim: domain.dim - rank,
        rank_certified: true,
        float_gap: None,
        membership_residual: 0.0,
    })
}

/// Per-operator block of a [`ComplexReport`].
#[derive(Clone, Debug)]
pub struct OpReport {
    pub op: ComplexOp,
    pub domain_dim: usize,
    pub codomain_dim: usize,
    pub rank: usize,
    pub kernel_dim: usize,
    pub rank_certified: bool,
    pub float_gap: Option<f64>,
    pub membership_residual: f64,
}

fn op_report(m: &OperatorMatrix) -> Result<OpReport> {
    let info = rank_with_escalation(m)?;
    Ok(OpReport {
        op: m.op,
        domain_dim: m.ncols(),
        codomain_dim: m.nrows(),
        rank: info.rank,
        kernel_dim: m.ncols() - info.rank,
        rank_certified: info.certified,
        float_gap: info.float_gap,
        membership_residual: m.membership_residual,
    })
}

/// Verification record for the chain at one parameter. Segments that need a
/// higher parameter than requested are absent rather than failed: the chain
/// ends at whatever prefix exists, and `complex_exact` is only populated
/// when all four spaces do (k >= 7).
#[derive(Clone, Debug)]
pub struct ComplexReport {
    pub k: usize,
    pub mode: Mode,
    pub dim_u: Option<usize>,
    pub dim_sigma: Option<usize>,
    pub dim_v: usize,
    pub dim_q: usize,
    pub gradgrad: Option<OpReport>,
    pub curl: Option<OpReport>,
    pub div: OpReport,
    pub curl_gradgrad_zero: Option<bool>,
    pub div_curl_zero: Option<bool>,
    /// ker(gradgrad) is exactly the global linear polynomials, dimension 4.
    pub gradgrad_kernel_is_linears: Option<bool>,
    /// im(gradgrad) = ker(curl), decided by composition + rank counting.
    pub exact_at_sigma: Option<bool>,
    /// im(curl) = ker(div).
    pub exact_at_v: Option<bool>,
    pub div_onto: bool,
    /// dim U - dim Sigma + dim V - dim Q, which must equal 4 = dim P_1 when
    /// the chain is exact.
    pub alternating_sum: Option<i64>,
    pub complex_exact: Option<bool>,
}

pub fn verify_exactness(mesh: &TetMesh, k: usize, mode: Mode) -> Result<ComplexReport> {
    if k < 4 {
        return Err(Error::Domain(format!(
            "no verifiable segment at k = {k}; the shortest chain div: V(k-1) -> Q(k) needs k >= 4"
        )));
    }
    let q = assemble_space(SpaceId::Q, k, mesh)?;
    let v = assemble_space(SpaceId::V, k - 1, mesh)?;
    let sigma = if k >= 5 {
        Some(assemble_space(SpaceId::Sigma, k, mesh)?)
    } else {
        None
    };
    let u = if k >= 7 {
        Some(assemble_space(SpaceId::U, k, mesh)?)
    } else {
        None
    };

    let curl_gradgrad_zero = match (&u, &sigma) {
        (Some(_), Some(_)) => Some(composition_vanishes(
            mesh,
            SpaceId::U.degree(k),
            Shape::Scalar,
            |f, g| curl_mat(&gradgrad(f.comp(0), g), g),
        )?),
        _ => None,
    };
    let div_curl_zero = match &sigma {
        Some(_) => Some(composition_vanishes(
            mesh,
            SpaceId::Sigma.degree(k),
            Shape::Sym,
            |f, g| div_mat(&curl_mat(f, g), g),
        )?),
        None => None,
    };
    let linears = match &u {
        Some(u) => Some(linears_reproduce(u)?),
        None => None,
    };

    let (div, curl, gradgrad_rep) = match mode {
        Mode::Float => {
            let div = op_report(&operator_matrix(ComplexOp::Div, &v, &q, mode)?)?;
            let curl = match &sigma {
                Some(s) => Some(op_report(&operator_matrix(ComplexOp::Curl, s, &v, mode)?)?),
                None => None,
            };
            let gg = match (&u, &sigma) {
                (Some(u), Some(s)) => Some(op_report(&operator_matrix(
                    ComplexOp::Gradgrad,
                    u,
                    s,
                    mode,
                )?)?),
                _ => None,
            };
            (div, curl, gg)
        }
        Mode::Exact => {
            let raw_v = raw_basis(&v)?;
            let div = raw_op_report(ComplexOp::Div, &v, &raw_v, &q, Some(q.dim.min(v.dim)))?;
            let gg = match (&u, &sigma) {
                (Some(u), Some(s)) => {
                    let raw_u = raw_basis(u)?;
                    // P_1 inside U caps the rank at dim U - 4.
                    let upper = if linears == Some(true) { Some(u.dim - 4) } else { None };
                    Some(raw_op_report(ComplexOp::Gradgrad, u, &raw_u, s, upper)?)
                }
                _ => None,
            };
            let curl = match &sigma {
                Some(s) => {
                    let raw_s = raw_basis(s)?;
                    // The gradgrad image sits inside ker(curl) once the
                    // composition vanishes, capping the rank at dim Sigma
                    // minus the certified gradgrad rank.
                    let upper = match (&gg, curl_gradgrad_zero) {
                        (Some(gg), Some(true)) => Some(s.dim - gg.rank),
                        _ => None,
                    };
                    Some(raw_op_report(ComplexOp::Curl, s, &raw_s, &v, upper)?)
                }
                None => None,
            };
            (div, curl, gg)
        }
    };

    let div_onto = div.rank == q.dim;
    let gradgrad_kernel_is_linears = gradgrad_rep
        .as_ref()
        .map(|r| r.kernel_dim == 4 && linears == Some(true));
    let exact_at_sigma = match (&gradgrad_rep, &curl, curl_gradgrad_zero) {
        (Some(gg), Some(c), Some(zero)) => {
            Some(zero && gg.rank + c.rank == sigma.as_ref().unwrap().dim)
        }
        _ => None,
    };
    let exact_at_v = match (&curl, div_curl_zero) {
        (Some(c), Some(zero)) => Some(zero && c.rank + div.rank == v.dim),
        _ => None,
    };
    let alternating_sum = match (&u, &sigma) {
        (Some(u), Some(s)) => Some(u.dim as i64 - s.dim as i64 + v.dim as i64 - q.dim as i64),
        _ => None,
    };
    let complex_exact = match (
        gradgrad_kernel_is_linears,
        exact_at_sigma,
        exact_at_v,
        alternating_sum,
    ) {
        (Some(p1), Some(es), Some(ev), Some(sum)) => {
            Some(p1 && es && ev && div_onto && sum == 4)
        }
        _ => None,
    };

    Ok(ComplexReport {
        k,
        mode,
        dim_u: u.as_ref().map(|s| s.dim),
        dim_sigma: sigma.as_ref().map(|s| s.dim),
        dim_v: v.dim,
        dim_q: q.dim,
        gradgrad: gradgrad_rep,
        curl,
        div,
        curl_gradgrad_zero,
        div_curl_zero,
        gradgrad_kernel_is_linears,
        exact_at_sigma,
        exact_at_v,
        div_onto,
        alternating_sum,
        complex_exact,
    })
}

/// Verification record for the dual chain into the unconstrained broken
/// space Vhat. Closure is a theorem; exactness at Vhat is expected to fail,
/// and `cokernel_dim` quantifies by how much.
#[derive(Clone, Debug)]
pub struct DualComplexReport {
    pub k: usize,
    pub dim_sigma: usize,
    pub dim_vhat: usize,
    pub curl_rank: usize,
    /// dim Vhat - rank(curl). Nonzero is the expected outcome, not a failure.
    pub cokernel_dim: usize,
    pub membership_residual: f64,
    pub curl_gradgrad_zero: bool,
    /// Image contained, composition zero: the chain is a complex.
    pub closed: bool,
    /// rank(curl) == dim Vhat; expected false.
    pub exact_at_vhat: bool,
}

/// Exact-mode verification of the dual chain. Membership of curl images in
/// Vhat is checked exactly in raw coordinates; the rank of curl into Vhat
/// equals its rank into V (the image space is the same set of fields), and
/// is pinned between the prime-field lower bound and the kernel supplied by
/// the gradgrad image.
pub fn verify_dual_complex(mesh: &TetMesh, k: usize) -> Result<DualComplexReport> {
    if k < 7 {
        return Err(Error::Domain(format!(
            "the dual chain is defined for k >= 7, got {k}"
        )));
    }
    let u = assemble_space(SpaceId::U, k, mesh)?;
    let sigma = assemble_space(SpaceId::Sigma, k, mesh)?;
    let vhat = assemble_space(SpaceId::Vhat, k, mesh)?;
    let curl_gradgrad_zero = composition_vanishes(mesh, SpaceId::U.degree(k), Shape::Scalar, |f, g| {
        curl_mat(&gradgrad(f.comp(0), g), g)
    })?;

    let raw_u = raw_basis(&u)?;
    let gg_upper = if linears_reproduce(&u)? { Some(u.dim - 4) } else { None };
    let gg = raw_op_report(ComplexOp::Gradgrad, &u, &raw_u, &sigma, gg_upper)?;
    let raw_sigma = raw_basis(&sigma)?;
    let curl_upper = if curl_gradgrad_zero { Some(sigma.dim - gg.rank) } else { None };
    let curl = raw_op_report(ComplexOp::Curl, &sigma, &raw_sigma, &vhat, curl_upper)?;

    Ok(DualComplexReport {
        k,
        dim_sigma: sigma.dim,
        dim_vhat: vhat.dim,
        curl_rank: curl.rank,
        cokernel_dim: vhat.dim - curl.rank,
        membership_residual: curl.membership_residual,
        curl_gradgrad_zero,
        closed: curl_gradgrad_zero,
        exact_at_vhat: curl.rank == vhat.dim,
    })
}

/// Global L2 Gram matrix of an assembled space in its DOF basis, floated.
/// Per element the monomial Gram is computed exactly, then congruence with
/// the inverse evaluation matrix moves it to shape-function coordinates.
fn l2_gram_float(space: &GlobalSpace) -> Result<Mat<f64>> {
    let dim = space.dim;
    let mut gm = Mat::<f64>::zeros(dim, dim);
    for t in 0..space.mesh.tets.len() {
        let ctx = &space.contexts[t];
        let basis = monomial_basis(space.space.degree(space.k), space.space.shape(), &ctx.geom)?;
        let n = basis.len();
        let mut bg = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rat_to_f64(&l2_pairing(&basis.fields[i], &basis.fields[j], &ctx.geom)?);
                bg[(i, j)] = v;
                bg[(j, i)] = v;
            }
        }
        let d = dof_matrix(&space.element_dofs[t], &basis, ctx)?;
        let dt = Mat::from_fn(n, n, |r, c| rat_to_f64(&d[(c, r)]));
        let lu = LuFactor::new(dt.as_ref())?;
        // E = D^{-T} BG D^{-1}, via two solves against D^T.
        let z = lu.solve_mat(bg.as_ref());
        let zt = z.transpose().to_owned();
        let e = lu.solve_mat(zt.as_ref());
        let map = &space.element_maps[t];
        for i in 0..n {
            for j in 0..n {
                gm[(map[i], map[j])] += e[(i, j)];
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            let s = 0.5 * (gm[(i, j)] + gm[(j, i)]);
            gm[(i, j)] = s;
            gm[(j, i)] = s;
        }
    }
    Ok(gm)
}

#[derive(Clone, Debug)]
pub struct DivSurjectivityReport {
    pub k: usize,
    pub dim_v: usize,
    pub dim_q: usize,
    pub rank_div: usize,
    pub onto: bool,
    pub rank_certified: bool,
    pub float_gap: Option<f64>,
    pub kernel_dim: usize,
    /// Smallest nonzero singular value of div restricted to the orthogonal
    /// complement of its kernel, measured H(div) -> L2: the discrete inf-sup
    /// constant of the lifting. Float estimate.
    pub stability_constant: f64,
    /// Largest pencil eigenvalue assigned to the kernel block (should be
    /// numerically zero); shows the separation backing `stability_constant`.
    pub kernel_residual: f64,
}

/// Surjectivity of div: V(k-1) -> Q(k) with a quantitative stability
/// constant. The constant is the square root of the smallest nonzero
/// eigenvalue of the pencil (Div^T M_Q Div, M_V + Div^T M_Q Div), i.e. the
/// minimum of ||div v|| over ||v||_{H(div)} on the complement of the kernel.
pub fn verify_div_surjectivity(mesh: &TetMesh, k: usize) -> Result<DivSurjectivityReport> {
    if k < 4 {
        return Err(Error::Domain(format!(
            "div surjectivity needs k >= 4 (V at k-1 >= 3), got {k}"
        )));
    }
    let v = assemble_space(SpaceId::V, k - 1, mesh)?;
    let q = assemble_space(SpaceId::Q, k, mesh)?;
    let div = operator_matrix(ComplexOp::Div, &v, &q, Mode::Float)?;
    let info = rank_with_escalation(&div)?;
    let onto = info.rank == q.dim;
    let kernel_dim = v.dim - info.rank;

    let dv = div.to_float();
    let gq = l2_gram_float(&q)?;
    let gv = l2_gram_float(&v)?;
    let tmp = &gq * &dv;
    let dvt = dv.transpose().to_owned();
    let kmat = &dvt * &tmp;
    let w = &gv + &kmat;
    let eigs = fla::generalized_symmetric_eigenvalues(kmat.as_ref(), w.as_ref())?;
    let kernel_residual = if kernel_dim > 0 {
        eigs[kernel_dim - 1].abs()
    } else {
        0.0
    };
    let stability_constant = eigs[kernel_dim].max(0.0).sqrt();

    Ok(DivSurjectivityReport {
        k,
        dim_v: v.dim,
        dim_q: q.dim,
        rank_div: info.rank,
        onto,
        rank_certified: info.certified,
        float_gap: info.float_gap,
        kernel_dim,
        stability_constant,
        kernel_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::global_space::{interpolate, GlobalEntity};
    use crate::mesh::{generate_mesh, MeshKind};
    use crate::num::rat_i;

    fn spaces(
        mesh: &TetMesh,
        sigma_k: usize,
    ) -> (GlobalSpace<'_>, GlobalSpace<'_>, GlobalSpace<'_>) {
        let s = assemble_space(SpaceId::Sigma, sigma_k, mesh).unwrap();
        let v = assemble_space(SpaceId::V, sigma_k - 1, mesh).unwrap();
        let q = assemble_space(SpaceId::Q, sigma_k, mesh).unwrap();
        (s, v, q)
    }

    #[test]
    fn incompatible_pairs_are_rejected() {
        let mesh = generate_mesh(MeshKind::SingleTet).unwrap();
        let (s, v, q) = spaces(&mesh, 5);
        // div does not act on Sigma.
        assert!(operator_matrix(ComplexOp::Div, &s, &q, Mode::Exact).is_err());
        // curl lands in V at k-1, not at matching k.
        let v5 = assemble_space(SpaceId::V, 5, &mesh).unwrap();
        assert!(operator_matrix(ComplexOp::Curl, &s, &v5, Mode::Exact).is_err());
        // the right pairing is accepted (compatibility only; cheap k).
        assert!(check_compatible(ComplexOp::Curl, &s, &v).is_ok());
        assert!(check_compatible(ComplexOp::Div, &v, &q).is_ok());
    }

    #[test]
    fn gradgrad_kernel_is_the_linears() {
        let mesh = generate_mesh(MeshKind::SingleTet).unwrap();
        let u = assemble_space(SpaceId::U, 7, &mesh).unwrap();
        let s = assemble_space(SpaceId::Sigma, 7, &mesh).unwrap();
        let gg = operator_matrix(ComplexOp::Gradgrad, &u, &s, Mode::Exact).unwrap();
        assert_eq!(gg.membership_residual, 0.0);
        let info = operator_rank(&gg);
        assert!(info.certified);
        assert_eq!(info.rank, 216);
        assert_eq!(u.dim - info.rank, 4);

        let m = match &gg.entries {
            Entries::Exact(m) => m,
            Entries::Float(_) => unreachable!(),
        };
        // The interpolants of 1, x, y, z map to the zero vector; a quadratic
        // does not.
        let linears = [
            BaryPoly::one(),
            BaryPoly::lam(1),
            BaryPoly::lam(2),
            BaryPoly::lam(3),
        ];
        for p in linears {
            let (coeffs, rep) = interpolate(&u, &[TensorField::scalar(p)]).unwrap();
            assert!(rep.max_residual.is_zero());
            assert!(m.matvec(&coeffs).iter().all(|x| x.is_zero()));
        }
        let x2 = BaryPoly::lam(1).mul(&BaryPoly::lam(1));
        let (coeffs, _) = interpolate(&u, &[TensorField::scalar(x2)]).unwrap();
        assert!(m.matvec(&coeffs).iter().any(|x| !x.is_zero()));
    }

    #[test]
    fn curl_and_div_compose_to_zero_exactly() {
        let mesh = generate_mesh(MeshKind::SingleTet).unwrap();
        let (s, v, q) = spaces(&mesh, 5);
        let curl = operator_matrix(ComplexOp::Curl, &s, &v, Mode::Exact).unwrap();
        let div = operator_matrix(ComplexOp::Div, &v, &q, Mode::Exact).unwrap();
        assert_eq!(curl.membership_residual, 0.0);
        assert_eq!(div.membership_residual, 0.0);
        let (cm, dm) = match (&curl.entries, &div.entries) {
            (Entries::Exact(c), Entries::Exact(d)) => (c, d),
            _ => unreachable!(),
        };
        // The literal matrix product, not just the pointwise identity.
        assert!(dm.mul(cm).is_zero());
        // And the pointwise identity that predicts it.
        assert!(composition_vanishes(&mesh, SpaceId::Sigma.degree(5), Shape::Sym, |f, g| {
            div_mat(&curl_mat(f, g), g)
        })
        .unwrap());
    }

    #[test]
    fn float_and_exact_ranks_agree_for_curl() {
        let mesh = generate_mesh(MeshKind::SingleTet).unwrap();
        let (s, v, _) = spaces(&mesh, 5);
        let exact = operator_matrix(ComplexOp::Curl, &s, &v, Mode::Exact).unwrap();
        let float = operator_matrix(ComplexOp::Curl, &s, &v, Mode::Float).unwrap();
        let re = operator_rank(&exact);
        let rf = operator_rank(&float);
        assert_eq!(re.rank, rf.rank);
        assert!(rf.float_gap.unwrap() >= RANK_GAP_MIN);
    }

    #[test]
    fn partial_chain_report_at_k4() {
        let mesh = generate_mesh(MeshKind::SingleTet).unwrap();
        let rep = verify_exactness(&mesh, 4, Mode::Exact).unwrap();
        assert_eq!(rep.dim_u, None);
        assert_eq!(rep.dim_sigma, None);
        assert!(rep.curl.is_none() && rep.gradgrad.is_none());
        assert_eq!(rep.dim_v, 160);
        assert_eq!(rep.dim_q, 30);
        assert_eq!(rep.div.rank, 30);
        assert!(rep.div_onto);
        assert!(rep.div.rank_certified);
        assert_eq!(rep.complex_exact, None);
        assert_eq!(rep.alternating_sum, None);
        // Below the shortest chain there is nothing to verify.
        assert!(verify_exactness(&mesh, 3, Mode::Exact).is_err());
    }

    #[test]
    fn two_tet_membership_and_zero_extension() {
        let mesh = generate_mesh(MeshKind::TwoTet).unwrap();
        let (s, v, _) = spaces(&mesh, 5);
        let curl = operator_matrix(ComplexOp::Curl, &s, &v, Mode::Exact).unwrap();
        assert_eq!(curl.membership_residual, 0.0);
        let m = match &curl.entries {
            Entries::Exact(m) => m,
            Entries::Float(_) => unreachable!(),
        };
        // A Sigma shape function interior to element 0 vanishes identically
        // on element 1, so its curl has zero values at every DOF element 1
        // can see: its own interior DOFs and everything on the shared face.
        let gj = (0..s.dim)
            .find(|&j| s.owners[j] == GlobalEntity::Interior(0))
            .unwrap();
        let shared_face = mesh.face_tets.iter().position(|ts| ts.len() == 2).unwrap();
        for gi in 0..v.dim {
            let on_shared = match v.owners[gi] {
                GlobalEntity::Interior(t) => t == 1,
                GlobalEntity::Face(f) => f == shared_face,
                GlobalEntity::Vertex(vx) => mesh.tets[1].contains(&vx),
                GlobalEntity::Edge(e) => {
                    let [a, b] = mesh.edges[e];
                    mesh.tets[1].contains(&a) && mesh.tets[1].contains(&b)
                }
            };
            if on_shared {
                assert!(
                    m[(gi, gj)].is_zero(),
                    "row {gi} ({:?}) should vanish for interior column {gj}",
                    v.owners[gi]
                );
            }
        }
    }
}


#[cfg(test)]
mod dual_tests {
    use super::*;
    use crate::mesh::{generate_mesh, MeshKind};

    #[test]
    fn dual_complex_is_closed_but_not_exact_on_single_tet() {
        let mesh = generate_mesh(MeshKind::SingleTet).unwrap();
        let rep = verify_dual_complex(&mesh, 7).unwrap();
        assert_eq!(rep.dim_sigma, 720);
        assert_eq!(rep.dim_vhat, 672);
        assert_eq!(rep.curl_rank, 504);
        assert_eq!(rep.cokernel_dim, 672 - 504);
        assert_eq!(rep.membership_residual, 0.0);
        assert!(rep.curl_gradgrad_zero);
        assert!(rep.closed);
        assert!(!rep.exact_at_vhat);
    }
}

#[cfg(test)]
mod exact_chain_tests {
    use super::*;
    use crate::mesh::{generate_mesh, MeshKind};

    fn assert_exact_report(rep: &ComplexReport) {
        let gg = rep.gradgrad.as_ref().unwrap();
        let curl = rep.curl.as_ref().unwrap();
        assert!(gg.rank_certified && curl.rank_certified && rep.div.rank_certified);
        assert_eq!(gg.membership_residual, 0.0);
        assert_eq!(curl.membership_residual, 0.0);
        assert_eq!(rep.div.membership_residual, 0.0);
        assert_eq!(rep.curl_gradgrad_zero, Some(true));
        assert_eq!(rep.div_curl_zero, Some(true));
        assert_eq!(rep.gradgrad_kernel_is_linears, Some(true));
        assert_eq!(rep.exact_at_sigma, Some(true));
        assert_eq!(rep.exact_at_v, Some(true));
        assert!(rep.div_onto);
        assert_eq!(rep.alternating_sum, Some(4));
        assert_eq!(rep.complex_exact, Some(true));
    }

    #[test]
    fn exact_chain_report_on_single_tet_at_k7() {
        let mesh = generate_mesh(MeshKind::SingleTet).unwrap();
        let rep = verify_exactness(&mesh, 7, Mode::Exact).unwrap();
        assert_eq!(
            (rep.dim_u, rep.dim_sigma, rep.dim_v, rep.dim_q),
            (Some(220), Some(720), 672, 168)
        );
        let gg = rep.gradgrad.as_ref().unwrap();
        let curl = rep.curl.as_ref().unwrap();
        assert_eq!((gg.rank, curl.rank, rep.div.rank), (216, 504, 168));
        assert_exact_report(&rep);
    }

    #[test]
    fn exact_chain_report_on_two_tet_at_k7() {
        let mesh = generate_mesh(MeshKind::TwoTet).unwrap();
        let rep = verify_exactness(&mesh, 7, Mode::Exact).unwrap();
        assert_eq!(
            (rep.dim_u, rep.dim_sigma, rep.dim_v, rep.dim_q),
            (Some(304), Some(1164), 1191, 327)
        );
        let gg = rep.gradgrad.as_ref().unwrap();
        let curl = rep.curl.as_ref().unwrap();
        assert_eq!(gg.rank, 300);
        assert_eq!(curl.rank, 1164 - 300);
        assert_eq!(rep.div.rank, 327);
        assert_exact_report(&rep);
    }

    #[test]
    fn raw_ranks_match_matrix_ranks() {
        let mesh = generate_mesh(MeshKind::TwoTet).unwrap();

        let sigma = assemble_space(SpaceId::Sigma, 5, &mesh).unwrap();
        let v4 = assemble_space(SpaceId::V, 4, &mesh).unwrap();
        let curl_m = operator_matrix(ComplexOp::Curl, &sigma, &v4, Mode::Exact).unwrap();
        let rep = verify_exactness(&mesh, 5, Mode::Exact).unwrap();
        assert_eq!(rep.curl.as_ref().unwrap().rank, operator_rank(&curl_m).rank);
        assert!(rep.div_onto);

        // Div is compared one degree lower, where the exact dual solve on the
        // domain stays small.
        let v3 = assemble_space(SpaceId::V, 3, &mesh).unwrap();
        let q4 = assemble_space(SpaceId::Q, 4, &mesh).unwrap();
        let div_m = operator_matrix(ComplexOp::Div, &v3, &q4, Mode::Exact).unwrap();
        let raw_v3 = raw_basis(&v3).unwrap();
        let div_rep =
            raw_op_report(ComplexOp::Div, &v3, &raw_v3, &q4, Some(q4.dim.min(v3.dim))).unwrap();
        assert_eq!(div_rep.rank, operator_rank(&div_m).rank);
        assert!(div_rep.rank_certified);
    }
}

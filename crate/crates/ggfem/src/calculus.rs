//! Exact differential operators on polynomial tensor fields: Cartesian
//! gradient, gradgrad (Hessian), row-wise curl and divergence, deviatoric
//! part, tangential/normal trace operators, and restrictions to faces and
//! edges.

use crate::geom::GeomCache;
use crate::num::Rat;
use crate::poly::{BaryPoly, EdgePoly, FacePoly};
use crate::tensor::{Shape, TensorField};
use num_traits::Zero;

/// Cartesian partial derivative d/dx_axis via the chain rule through the
/// constant barycentric gradients.
pub fn dx(p: &BaryPoly, g: &GeomCache, axis: usize) -> BaryPoly {
    let mut out = BaryPoly::zero();
    for i in 0..4 {
        let gi = &g.grad_lam[i][axis];
        if gi.is_zero() {
            continue;
        }
        out = out.add(&p.dlam(i).scale(gi));
    }
    out
}

/// Gradient of a scalar polynomial.
pub fn grad(p: &BaryPoly, g: &GeomCache) -> TensorField {
    TensorField::vector([dx(p, g, 0), dx(p, g, 1), dx(p, g, 2)])
}

/// Hessian of a scalar polynomial: the gradgrad operator. Symmetric exactly
/// because formal polynomial derivatives commute.
pub fn gradgrad(p: &BaryPoly, g: &GeomCache) -> TensorField {
    let d: [BaryPoly; 3] = std::array::from_fn(|a| dx(p, g, a));
    let entries: [[BaryPoly; 3]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            if i <= j {
                dx(&d[i], g, j)
            } else {
                dx(&d[j], g, i)
            }
        })
    });
    TensorField::sym_from_entries(&entries)
}

const EPS: [[[i64; 3]; 3]; 3] = {
    let mut e = [[[0i64; 3]; 3]; 3];
    e[0][1][2] = 1;
    e[1][2][0] = 1;
    e[2][0][1] = 1;
    e[0][2][1] = -1;
    e[2][1][0] = -1;
    e[1][0][2] = -1;
    e
};

/// Row-wise curl of a matrix field: (curl M)_{il} = eps_{lab} d_a M_{ib}.
/// For symmetric input the result is traceless and is returned with the
/// compressed traceless shape; general matrix input yields a full matrix.
pub fn curl_mat(m: &TensorField, g: &GeomCache) -> TensorField {
    assert!(matches!(m.shape, Shape::Matrix | Shape::Sym | Shape::Dev));
    let mut entries: [[BaryPoly; 3]; 3] = Default::default();
    for i in 0..3 {
        for l in 0..3 {
            let mut acc = BaryPoly::zero();
            for a in 0..3 {
                for b in 0..3 {
                    let s = EPS[l][a][b];
                    if s == 0 {
                        continue;
                    }
                    let d = dx(&m.entry(i, b), g, a);
                    acc = if s > 0 { acc.add(&d) } else { acc.sub(&d) };
                }
            }
            entries[i][l] = acc;
        }
    }
    if m.shape == Shape::Sym {
        TensorField::dev_from_entries(&entries)
    } else {
        TensorField::from_comps(
            Shape::Matrix,
            entries.iter().flatten().cloned().collect(),
        )
    }
}

/// Row-wise divergence of a matrix field: (div M)_i = d_j M_{ij}.
pub fn div_mat(m: &TensorField, g: &GeomCache) -> TensorField {
    assert!(matches!(m.shape, Shape::Matrix | Shape::Sym | Shape::Dev));
    let comps: [BaryPoly; 3] = std::array::from_fn(|i| {
        let mut acc = BaryPoly::zero();
        for j in 0..3 {
            acc = acc.add(&dx(&m.entry(i, j), g, j));
        }
        acc
    });
    TensorField::vector(comps)
}

/// Divergence of a vector field.
pub fn div_vec(v: &TensorField, g: &GeomCache) -> BaryPoly {
    assert_eq!(v.shape, Shape::Vector);
    let mut acc = BaryPoly::zero();
    for j in 0..3 {
        acc = acc.add(&dx(v.comp(j), g, j));
    }
    acc
}

/// Deviatoric part: T - tr(T)/3 I, returned as a full matrix field (the
/// entries are exact; feeding the result to traceless constructors is the
/// caller's choice since tr(T)/3 introduces thirds, not roundoff).
pub fn deviatoric(m: &TensorField) -> TensorField {
    assert!(matches!(m.shape, Shape::Matrix | Shape::Sym | Shape::Dev));
    let tr = m.entry(0, 0).add(&m.entry(1, 1)).add(&m.entry(2, 2));
    let third = tr.scale(&crate::num::rat(1, 3));
    let comps = (0..9)
        .map(|c| {
            let (i, j) = (c / 3, c % 3);
            if i == j {
                m.entry(i, j).sub(&third)
            } else {
                m.entry(i, j)
            }
        })
        .collect();
    TensorField::from_comps(Shape::Matrix, comps)
}

/// Tangential trace operator for matrix fields: (M x n)_{il} =
/// eps_{lab} M_{ia} n_b, each row crossed with the (constant) vector n.
pub fn matrix_cross_normal(m: &TensorField, n: &[Rat; 3]) -> TensorField {
    assert!(matches!(m.shape, Shape::Matrix | Shape::Sym | Shape::Dev));
    let mut comps = Vec::with_capacity(9);
    for i in 0..3 {
        for l in 0..3 {
            let mut acc = BaryPoly::zero();
            for a in 0..3 {
                for b in 0..3 {
                    let s = EPS[l][a][b];
                    if s == 0 || n[b].is_zero() {
                        continue;
                    }
                    let term = m.entry(i, a).scale(&n[b]);
                    acc = if s > 0 { acc.add(&term) } else { acc.sub(&term) };
                }
            }
            comps.push(acc);
        }
    }
    TensorField::from_comps(Shape::Matrix, comps)
}

/// Normal trace for matrix fields: (M n)_i = M_{ij} n_j.
pub fn matrix_dot_normal(m: &TensorField, n: &[Rat; 3]) -> TensorField {
    assert!(matches!(m.shape, Shape::Matrix | Shape::Sym | Shape::Dev));
    let comps: [BaryPoly; 3] = std::array::from_fn(|i| {
        let mut acc = BaryPoly::zero();
        for j in 0..3 {
            if n[j].is_zero() {
                continue;
            }
            acc = acc.add(&m.entry(i, j).scale(&n[j]));
        }
        acc
    });
    TensorField::vector(comps)
}

/// Contraction w1^T M w2 for constant vectors.
pub fn sandwich(m: &TensorField, w1: &[Rat; 3], w2: &[Rat; 3]) -> BaryPoly {
    let mut acc = BaryPoly::zero();
    for i in 0..3 {
        for j in 0..3 {
            let c = &w1[i] * &w2[j];
            if c.is_zero() {
                continue;
            }
            acc = acc.add(&m.entry(i, j).scale(&c));
        }
    }
    acc
}

/// Directional derivative n . grad(p) for a constant vector n.
pub fn dir_deriv(p: &BaryPoly, g: &GeomCache, n: &[Rat; 3]) -> BaryPoly {
    let mut acc = BaryPoly::zero();
    for axis in 0..3 {
        if n[axis].is_zero() {
            continue;
        }
        acc = acc.add(&dx(p, g, axis).scale(&n[axis]));
    }
    acc
}

/// Second directional derivative n^T H(p) m.
pub fn dir_deriv2(p: &BaryPoly, g: &GeomCache, n: &[Rat; 3], m: &[Rat; 3]) -> BaryPoly {
    dir_deriv(&dir_deriv(p, g, n), g, m)
}

/// Cartesian derivative D^alpha p.
pub fn dx_multi(p: &BaryPoly, g: &GeomCache, alpha: &[u8; 3]) -> BaryPoly {
    let mut out = p.clone();
    for axis in 0..3 {
        for _ in 0..alpha[axis] {
            out = dx(&out, g, axis);
        }
    }
    out
}

/// Restrict a barycentric polynomial to the face whose barycentric slots
/// 0,1,2 correspond to the local tet vertices `face_locals[0..3]` (callers
/// order these by global vertex index so that shared faces agree). The local
/// vertex not listed gets its coordinate set to zero.
pub fn restrict_to_face(p: &BaryPoly, face_locals: [usize; 3]) -> FacePoly {
    let opposite = (0..4)
        .find(|v| !face_locals.contains(v))
        .expect("face_locals must name three distinct local vertices");
    let mut out = FacePoly::zero();
    for (e, c) in p.terms() {
        if e[opposite] != 0 {
            continue;
        }
        let f = [
            e[face_locals[0]],
            e[face_locals[1]],
            e[face_locals[2]],
        ];
        out.add_term(f, c);
    }
    out
}

/// Restrict to the edge from local vertex `lo_local` to `hi_local`,
/// substituting l_lo = 1-s, l_hi = s, other coordinates = 0.
pub fn restrict_to_edge(p: &BaryPoly, lo_local: usize, hi_local: usize) -> EdgePoly {
    let mut out = EdgePoly::zero();
    for (e, c) in p.terms() {
        let mut on_edge = true;
        for v in 0..4 {
            if v != lo_local && v != hi_local && e[v] != 0 {
                on_edge = false;
                break;
            }
        }
        if !on_edge {
            continue;
        }
        let a = e[lo_local] as usize; // power of (1-s)
        let b = e[hi_local] as usize; // power of s
        // (1-s)^a s^b expanded.
        for i in 0..=a {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            let coeff = c * crate::num::rat_i(sign * crate::num::binomial(a, i) as i64);
            out.add_coeff(b + i, &coeff);
        }
    }
    out
}

/// Restrict every component of a tensor field to a face.
pub fn restrict_field_to_face(f: &TensorField, face_locals: [usize; 3]) -> Vec<FacePoly> {
    match f.shape {
        Shape::Scalar => vec![restrict_to_face(f.comp(0), face_locals)],
        Shape::Vector => (0..3)
            .map(|c| restrict_to_face(f.comp(c), face_locals))
            .collect(),
        _ => {
            let mut out = Vec::with_capacity(9);
            for i in 0..3 {
                for j in 0..3 {
                    out.push(restrict_to_face(&f.entry(i, j), face_locals));
                }
            }
            out
        }
    }
}

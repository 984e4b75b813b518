//! Exact integration of barycentric monomials.
//!
//! Over a tetrahedron K of volume |K|:
//!   integral of l0^a l1^b l2^c l3^d = 6 |K| a! b! c! d! / (a+b+c+d+3)!
//! Over a triangle f of area |f|:
//!   integral of m0^a m1^b m2^c = 2 |f| a! b! c! / (a+b+c+2)!
//! Face functionals divide out the area (barycentric moments), which keeps
//! them rational; element integrals carry the exact rational volume.

use crate::geom::GeomCache;
use crate::num::{factorial, Rat};
use crate::poly::{BaryPoly, FacePoly};
use crate::tensor::{Shape, TensorField};
use crate::{Error, Result, INTEGRATION_DEGREE_CAP};
use num_bigint::BigInt;
use num_traits::Zero;

/// Exact integral of a barycentric polynomial over the element.
pub fn integrate_tet(p: &BaryPoly, g: &GeomCache) -> Result<Rat> {
    if p.degree() > INTEGRATION_DEGREE_CAP {
        return Err(Error::DegreeCap {
            got: p.degree(),
            cap: INTEGRATION_DEGREE_CAP,
        });
    }
    let vol6 = Rat::from_integer(BigInt::from(6)) * g.volume();
    let mut acc = Rat::zero();
    for (e, c) in p.terms() {
        let n = (e[0] + e[1] + e[2] + e[3]) as usize;
        let num = factorial(e[0] as usize)
            * factorial(e[1] as usize)
            * factorial(e[2] as usize)
            * factorial(e[3] as usize);
        acc += c * Rat::new(num, factorial(n + 3));
    }
    Ok(acc * vol6)
}

/// Area-normalized integral of a face polynomial: (1/|f|) integral over f.
pub fn face_moment(p: &FacePoly) -> Result<Rat> {
    if p.degree() > INTEGRATION_DEGREE_CAP {
        return Err(Error::DegreeCap {
            got: p.degree(),
            cap: INTEGRATION_DEGREE_CAP,
        });
    }
    let mut acc = Rat::zero();
    for (e, c) in p.terms() {
        let n = (e[0] + e[1] + e[2]) as usize;
        let num = BigInt::from(2)
            * factorial(e[0] as usize)
            * factorial(e[1] as usize)
            * factorial(e[2] as usize);
        acc += c * Rat::new(num, factorial(n + 2));
    }
    Ok(acc)
}

/// L2 pairing of two tensor fields over the element (Frobenius contraction
/// of matrix values).
pub fn l2_pairing(a: &TensorField, b: &TensorField, g: &GeomCache) -> Result<Rat> {
    integrate_tet(&a.pairing(b), g)
}

/// Gram matrix of the homogeneous degree-k scalar monomial basis.
pub fn scalar_gram(k: usize, g: &GeomCache) -> Result<Vec<Vec<Rat>>> {
    let exps = crate::poly::hom_exps4(k);
    let n = exps.len();
    let vol6 = Rat::from_integer(BigInt::from(6)) * g.volume();
    let mut out = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let e = [
                exps[i][0] + exps[j][0],
                exps[i][1] + exps[j][1],
                exps[i][2] + exps[j][2],
                exps[i][3] + exps[j][3],
            ];
            let deg = (e[0] + e[1] + e[2] + e[3]) as usize;
            let num = factorial(e[0] as usize)
                * factorial(e[1] as usize)
                * factorial(e[2] as usize)
                * factorial(e[3] as usize);
            let v = Rat::new(num, factorial(deg + 3)) * &vol6;
            out[i][j] = v.clone();
            out[j][i] = v;
        }
    }
    Ok(out)
}

/// Frobenius metric of the compressed component basis of a shape: for each
/// pair of stored components, the Frobenius product of the corresponding
/// constant basis matrices.
pub fn component_metric(shape: Shape) -> Vec<Vec<Rat>> {
    use crate::num::rat_i;
    match shape {
        Shape::Scalar => vec![vec![rat_i(1)]],
        Shape::Vector => (0..3)
            .map(|i| (0..3).map(|j| rat_i((i == j) as i64)).collect())
            .collect(),
        Shape::Matrix => (0..9)
            .map(|i| (0..9).map(|j| rat_i((i == j) as i64)).collect())
            .collect(),
        Shape::Sym => {
            let b = crate::tensor::sym_basis_matrices();
            frobenius_metric(&b)
        }
        Shape::Dev => {
            let b = crate::tensor::dev_basis_matrices();
            frobenius_metric(&b)
        }
    }
}

fn frobenius_metric(basis: &[[[Rat; 3]; 3]]) -> Vec<Vec<Rat>> {
    let n = basis.len();
    let mut out = vec![vec![Rat::zero(); n]; n];
    for a in 0..n {
        for b in 0..n {
            let mut acc = Rat::zero();
            for i in 0..3 {
                for j in 0..3 {
                    acc += &basis[a][i][j] * &basis[b][i][j];
                }
            }
            out[a][b] = acc;
        }
    }
    out
}

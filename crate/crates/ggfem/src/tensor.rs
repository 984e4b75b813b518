//! Polynomial tensor fields: scalars, vectors, full matrices, symmetric
//! matrices (6 stored components) and traceless matrices (8 stored
//! components).

use crate::num::{rat_i, Rat};
use crate::poly::BaryPoly;
use num_traits::Zero;

/// Value shape of a tensor field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Scalar,
    Vector,
    /// Full 3x3, row-major, 9 components.
    Matrix,
    /// Symmetric 3x3; stored components (0,0),(0,1),(0,2),(1,1),(1,2),(2,2).
    Sym,
    /// Traceless 3x3; stored components
    /// (0,0),(0,1),(0,2),(1,0),(1,1),(1,2),(2,0),(2,1); (2,2) = -(0,0)-(1,1).
    Dev,
}

impl Shape {
    pub fn ncomp(self) -> usize {
        match self {
            Shape::Scalar => 1,
            Shape::Vector => 3,
            Shape::Matrix => 9,
            Shape::Sym => 6,
            Shape::Dev => 8,
        }
    }
}

/// Stored index of matrix entry (i,j) for symmetric fields.
pub const SYM_ENTRIES: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
/// Stored index of matrix entry (i,j) for traceless fields.
pub const DEV_ENTRIES: [(usize, usize); 8] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (1, 0),
    (1, 1),
    (1, 2),
    (2, 0),
    (2, 1),
];

pub fn sym_slot(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        (2, 2) => 5,
        _ => unreachable!(),
    }
}

/// Frobenius inner products of the compressed symmetric component basis:
/// off-diagonal slots carry weight 2.
pub const SYM_WEIGHTS: [i64; 6] = [1, 2, 2, 1, 2, 1];

/// A tensor field with polynomial entries.
#[derive(Clone, Debug)]
pub struct TensorField {
    pub shape: Shape,
    comps: Vec<BaryPoly>,
}

impl TensorField {
    pub fn zero(shape: Shape) -> Self {
        TensorField {
            shape,
            comps: vec![BaryPoly::zero(); shape.ncomp()],
        }
    }

    pub fn scalar(p: BaryPoly) -> Self {
        TensorField {
            shape: Shape::Scalar,
            comps: vec![p],
        }
    }

    pub fn vector(v: [BaryPoly; 3]) -> Self {
        TensorField {
            shape: Shape::Vector,
            comps: v.into(),
        }
    }

    pub fn from_comps(shape: Shape, comps: Vec<BaryPoly>) -> Self {
        assert_eq!(comps.len(), shape.ncomp());
        TensorField { shape, comps }
    }

    /// Symmetric field from a full 3x3 entry grid; the (j,i) vs (i,j)
    /// mismatches must vanish functionally.
    pub fn sym_from_entries(m: &[[BaryPoly; 3]; 3]) -> Self {
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(
                    m[i][j].func_eq(&m[j][i]),
                    "symmetric field constructed from asymmetric entries"
                );
            }
        }
        TensorField {
            shape: Shape::Sym,
            comps: SYM_ENTRIES.iter().map(|&(i, j)| m[i][j].clone()).collect(),
        }
    }

    /// Traceless field from a full entry grid; the trace must vanish
    /// functionally.
    pub fn dev_from_entries(m: &[[BaryPoly; 3]; 3]) -> Self {
        let trace = m[0][0].add(&m[1][1]).add(&m[2][2]);
        assert!(trace.is_func_zero(), "traceless field with nonzero trace");
        TensorField {
            shape: Shape::Dev,
            comps: DEV_ENTRIES.iter().map(|&(i, j)| m[i][j].clone()).collect(),
        }
    }

    pub fn comps(&self) -> &[BaryPoly] {
        &self.comps
    }

    pub fn comp(&self, c: usize) -> &BaryPoly {
        &self.comps[c]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut BaryPoly {
        &mut self.comps[c]
    }

    /// Matrix entry (i,j) regardless of compression.
    pub fn entry(&self, i: usize, j: usize) -> BaryPoly {
        match self.shape {
            Shape::Scalar | Shape::Vector => panic!("entry() on non-matrix field"),
            Shape::Matrix => self.comps[3 * i + j].clone(),
            Shape::Sym => self.comps[sym_slot(i, j)].clone(),
            Shape::Dev => {
                if (i, j) == (2, 2) {
                    self.comps[0].add(&self.comps[4]).neg()
                } else {
                    let slot = DEV_ENTRIES.iter().position(|&e| e == (i, j)).unwrap();
                    self.comps[slot].clone()
                }
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.comps.iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape, other.shape);
        TensorField {
            shape: self.shape,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape, other.shape);
        TensorField {
            shape: self.shape,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        TensorField {
            shape: self.shape,
            comps: self.comps.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn scale_poly(&self, q: &BaryPoly) -> Self {
        TensorField {
            shape: self.shape,
            comps: self.comps.iter().map(|p| p.mul(q)).collect(),
        }
    }

    pub fn is_func_zero(&self) -> bool {
        self.comps.iter().all(|p| p.is_func_zero())
    }

    pub fn func_eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.sub(other).is_func_zero()
    }

    /// Frobenius pairing self : other as a scalar polynomial. Both operands
    /// must be matrix-valued (any compression); vectors pair with dot product
    /// and scalars multiply.
    pub fn pairing(&self, other: &Self) -> BaryPoly {
        match (self.shape, other.shape) {
            (Shape::Scalar, Shape::Scalar) => self.comps[0].mul(&other.comps[0]),
            (Shape::Vector, Shape::Vector) => {
                let mut acc = BaryPoly::zero();
                for c in 0..3 {
                    acc = acc.add(&self.comps[c].mul(&other.comps[c]));
                }
                acc
            }
            _ => {
                let mut acc = BaryPoly::zero();
                for i in 0..3 {
                    for j in 0..3 {
                        acc = acc.add(&self.entry(i, j).mul(&other.entry(i, j)));
                    }
                }
                acc
            }
        }
    }

    /// Evaluate every component at a barycentric point.
    pub fn eval(&self, l: &[Rat; 4]) -> Vec<Rat> {
        self.comps.iter().map(|p| p.eval(l)).collect()
    }

    /// Full 3x3 entries (valid for matrix-valued shapes).
    pub fn entries(&self) -> [[BaryPoly; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.entry(i, j)))
    }
}

/// Constant symmetric matrices: n n^T for a rational vector n.
pub fn nnt_field(n: &[Rat; 3]) -> TensorField {
    let comps = SYM_ENTRIES
        .iter()
        .map(|&(i, j)| BaryPoly::constant(&n[i] * &n[j]))
        .collect();
    TensorField {
        shape: Shape::Sym,
        comps,
    }
}

/// Constant matrix n t^T as a traceless field. Panics if trace(n t^T) =
/// n . t is nonzero; callers must pass orthogonal pairs.
pub fn ntt_dev_field(n: &[Rat; 3], t: &[Rat; 3]) -> TensorField {
    let dot: Rat = (0..3).map(|i| &n[i] * &t[i]).sum();
    assert!(dot.is_zero(), "n t^T is traceless only for orthogonal n, t");
    let comps = DEV_ENTRIES
        .iter()
        .map(|&(i, j)| BaryPoly::constant(&n[i] * &t[j]))
        .collect();
    TensorField {
        shape: Shape::Dev,
        comps,
    }
}

/// Constant matrix n t^T as a full matrix field (no orthogonality needed).
pub fn ntt_matrix_field(n: &[Rat; 3], t: &[Rat; 3]) -> TensorField {
    let comps = (0..9)
        .map(|c| BaryPoly::constant(&n[c / 3] * &t[c % 3]))
        .collect();
    TensorField {
        shape: Shape::Matrix,
        comps,
    }
}

/// The 6-element basis of constant symmetric matrices matching the stored
/// component order: E_00, (E_01+E_10), (E_02+E_20), E_11, (E_12+E_21), E_22
/// scaled so that the stored component of basis element c is 1 at slot c.
pub fn sym_basis_matrices() -> Vec<[[Rat; 3]; 3]> {
    SYM_ENTRIES
        .iter()
        .map(|&(i, j)| {
            let mut m: [[Rat; 3]; 3] = Default::default();
            m[i][j] = rat_i(1);
            m[j][i] = rat_i(1);
            m
        })
        .collect()
}

/// The 8-element basis of constant traceless matrices matching the stored
/// component order: for diagonal slots (0,0),(1,1) the basis matrix is
/// E_ii - E_22; off-diagonal slots are the single-entry matrices.
pub fn dev_basis_matrices() -> Vec<[[Rat; 3]; 3]> {
    DEV_ENTRIES
        .iter()
        .map(|&(i, j)| {
            let mut m: [[Rat; 3]; 3] = Default::default();
            m[i][j] = rat_i(1);
            if i == j {
                m[2][2] = rat_i(-1);
            }
            m
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    #[test]
    fn sym_storage_roundtrip() {
        let p = BaryPoly::lam(0);
        let q = BaryPoly::lam(1).pow(2);
        let entries: [[BaryPoly; 3]; 3] = [
            [p.clone(), q.clone(), BaryPoly::zero()],
            [q.clone(), BaryPoly::one(), p.clone()],
            [BaryPoly::zero(), p.clone(), q.clone()],
        ];
        let s = TensorField::sym_from_entries(&entries);
        assert_eq!(s.comps().len(), 6);
        assert!(s.entry(1, 0).func_eq(&q));
        assert!(s.entry(2, 1).func_eq(&p));
    }

    #[test]
    #[should_panic(expected = "asymmetric")]
    fn sym_rejects_asymmetric_entries() {
        let mut entries: [[BaryPoly; 3]; 3] = Default::default();
        entries[0][1] = BaryPoly::lam(0);
        entries[1][0] = BaryPoly::lam(1);
        let _ = TensorField::sym_from_entries(&entries);
    }

    #[test]
    fn dev_reconstructs_trace_entry() {
        let mut entries: [[BaryPoly; 3]; 3] = Default::default();
        entries[0][0] = BaryPoly::lam(0);
        entries[1][1] = BaryPoly::lam(1);
        entries[2][2] = BaryPoly::lam(0).add(&BaryPoly::lam(1)).neg();
        entries[0][1] = BaryPoly::lam(2);
        let d = TensorField::dev_from_entries(&entries);
        assert_eq!(d.comps().len(), 8);
        assert!(d
            .entry(2, 2)
            .func_eq(&BaryPoly::lam(0).add(&BaryPoly::lam(1)).neg()));
        // Trace is functionally zero by construction.
        let tr = d.entry(0, 0).add(&d.entry(1, 1)).add(&d.entry(2, 2));
        assert!(tr.is_func_zero());
    }

    #[test]
    #[should_panic(expected = "nonzero trace")]
    fn dev_rejects_nonzero_trace() {
        let mut entries: [[BaryPoly; 3]; 3] = Default::default();
        entries[0][0] = BaryPoly::one();
        let _ = TensorField::dev_from_entries(&entries);
    }

    #[test]
    fn pairing_is_frobenius() {
        let n = [rat_i(1), rat_i(2), rat_i(0)];
        let s = nnt_field(&n);
        // (n n^T) : (n n^T) = |n|^4 = 25.
        let val = s.pairing(&s);
        assert!(val.func_eq(&BaryPoly::constant(rat(25, 1))));
    }

    #[test]
    fn ntt_requires_orthogonality_and_builds_traceless() {
        let n = [rat_i(0), rat_i(0), rat_i(2)];
        let t = [rat_i(3), rat_i(-1), rat_i(0)];
        let d = ntt_dev_field(&n, &t);
        assert!(d.entry(2, 0).func_eq(&BaryPoly::constant(rat_i(6))));
        assert!(d.entry(0, 0).is_func_zero());
    }

    #[test]
    fn basis_matrices_match_component_slots() {
        let sb = sym_basis_matrices();
        assert_eq!(sb.len(), 6);
        assert_eq!(sb[1][0][1], rat_i(1));
        assert_eq!(sb[1][1][0], rat_i(1));
        let db = dev_basis_matrices();
        assert_eq!(db.len(), 8);
        assert_eq!(db[0][0][0], rat_i(1));
        assert_eq!(db[0][2][2], rat_i(-1));
        for m in &db {
            let tr: Rat = (0..3).map(|i| m[i][i].clone()).sum();
            assert!(tr.is_zero());
        }
    }
}

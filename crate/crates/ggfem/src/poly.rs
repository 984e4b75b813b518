//! Sparse polynomials in the four barycentric coordinates of a tetrahedron.
//!
//! Two canonical coordinate systems are used throughout:
//!
//! * the *canonical 3-variable form*: substitute `l0 = 1 - l1 - l2 - l3` and
//!   expand; functional equality of barycentric polynomials is decided by
//!   comparing these forms (the barycentric representation itself is not
//!   unique because the coordinates sum to one);
//! * *homogeneous degree-k coordinates*: a polynomial of degree <= k is padded
//!   with powers of `(l0+l1+l2+l3)` until every term has total degree exactly
//!   k. The monomials of total degree k form a basis of P_k, restriction to a
//!   face or edge is a coordinate selection, and evaluation of derivatives at
//!   vertices touches few coordinates. All space-level linear algebra works in
//!   these coordinates.

use crate::num::{rat_i, Rat};
use crate::{Error, Result, DEGREE_CAP};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Exponents of (l0, l1, l2, l3).
pub type Exp = [u8; 4];

/// A polynomial in barycentric coordinates with exact rational coefficients.
/// Invariant: no explicitly stored zero coefficient.
#[derive(Clone, Default)]
pub struct BaryPoly {
    terms: BTreeMap<Exp, Rat>,
}

impl fmt::Debug for BaryPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| format!("{} l^({},{},{},{})", c, e[0], e[1], e[2], e[3]))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl BaryPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert([0, 0, 0, 0], c);
        }
        p
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    /// The coordinate function `l_i`.
    pub fn lam(i: usize) -> Self {
        assert!(i < 4);
        let mut e = [0u8; 4];
        e[i] = 1;
        Self::monomial(e, Rat::one())
    }

    pub fn monomial(e: Exp, c: Rat) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(e, c);
        }
        p
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree of the stored representation (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| (e[0] + e[1] + e[2] + e[3]) as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn add_term(&mut self, e: Exp, c: &Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            out.terms.insert(*e, v * c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&rat_i(-1))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, &(-c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
                out.add_term(e, &(ca * cb));
            }
        }
        out
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Formal partial derivative with respect to `l_i` (the barycentric
    /// coordinates are treated as independent; Cartesian derivatives are
    /// assembled in `calculus` by chaining with the constant gradients).
    pub fn dlam(&self, i: usize) -> Self {
        assert!(i < 4);
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = *e;
            d[i] -= 1;
            out.add_term(d, &(c * rat_i(e[i] as i64)));
        }
        out
    }

    /// Evaluate at a barycentric point (the caller guarantees the coordinates
    /// sum to one when a point of the tetrahedron is meant).
    pub fn eval(&self, l: &[Rat; 4]) -> Rat {
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..4 {
                for _ in 0..e[i] {
                    t *= &l[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Substitute `l0 = 1 - l1 - l2 - l3` and collect the canonical
    /// 3-variable form, keyed by exponents of (l1, l2, l3).
    pub fn canonical3(&self) -> BTreeMap<[u8; 3], Rat> {
        let mut out: BTreeMap<[u8; 3], Rat> = BTreeMap::new();
        for (e, c) in &self.terms {
            // (1 - l1 - l2 - l3)^{e0}, expanded by iterated multiplication.
            let mut expansion: BTreeMap<[u8; 3], Rat> = BTreeMap::new();
            expansion.insert([0, 0, 0], Rat::one());
            for _ in 0..e[0] {
                let mut next: BTreeMap<[u8; 3], Rat> = BTreeMap::new();
                for (f, v) in &expansion {
                    let mut bump = |g: [u8; 3], w: Rat| {
                        let slot = next.entry(g).or_insert_with(Rat::zero);
                        *slot += w;
                    };
                    bump(*f, v.clone());
                    bump([f[0] + 1, f[1], f[2]], -v.clone());
                    bump([f[0], f[1] + 1, f[2]], -v.clone());
                    bump([f[0], f[1], f[2] + 1], -v.clone());
                }
                next.retain(|_, v| !v.is_zero());
                expansion = next;
            }
            for (f, v) in &expansion {
                let g = [f[0] + e[1], f[1] + e[2], f[2] + e[3]];
                let slot = out.entry(g).or_insert_with(Rat::zero);
                *slot += c * v;
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Functional zero test: is this polynomial identically zero on the
    /// simplex? Decided on the canonical 3-variable form.
    pub fn is_func_zero(&self) -> bool {
        if self.terms.is_empty() {
            return true;
        }
        self.canonical3().is_empty()
    }

    /// Functional equality on the simplex.
    pub fn func_eq(&self, other: &Self) -> bool {
        self.sub(other).is_func_zero()
    }

    /// Homogeneous degree-k coordinates: pad every term with powers of
    /// `(l0+l1+l2+l3)` so all terms reach total degree exactly k, and return
    /// the coefficient vector over `hom_exps4(k)`.
    pub fn hom_coords(&self, k: usize) -> Result<Vec<Rat>> {
        if k > DEGREE_CAP {
            return Err(Error::DegreeCap { got: k, cap: DEGREE_CAP });
        }
        if self.degree() > k {
            return Err(Error::DegreeCap {
                got: self.degree(),
                cap: k,
            });
        }
        let exps = hom_exps4(k);
        let index = hom_index4(k);
        let mut coords = vec![Rat::zero(); exps.len()];
        for (e, c) in &self.terms {
            let deficit = k - (e[0] + e[1] + e[2] + e[3]) as usize;
            // (l0+l1+l2+l3)^deficit = sum over |b| = deficit of multinomial(b) l^b.
            for b in hom_exps4(deficit) {
                let m = multinomial4(&b);
                let target = [e[0] + b[0], e[1] + b[1], e[2] + b[2], e[3] + b[3]];
                let idx = index[&target];
                coords[idx] += c * rat_i(m as i64);
            }
        }
        Ok(coords)
    }

    /// Rebuild a polynomial from homogeneous degree-k coordinates.
    pub fn from_hom_coords(k: usize, coords: &[Rat]) -> Self {
        let exps = hom_exps4(k);
        assert_eq!(coords.len(), exps.len());
        let mut p = Self::zero();
        for (e, c) in exps.iter().zip(coords) {
            p.add_term(*e, c);
        }
        p
    }
}

fn multinomial4(b: &Exp) -> u128 {
    let n = (b[0] + b[1] + b[2] + b[3]) as usize;
    let mut acc: u128 = 1;
    let mut rem = n;
    for &bi in b.iter().take(3) {
        acc *= crate::num::binomial(rem, bi as usize);
        rem -= bi as usize;
    }
    acc
}

/// All exponents over 4 variables of total degree exactly k, in a fixed
/// deterministic (lexicographic, descending leading exponents) order.
pub fn hom_exps4(k: usize) -> Vec<Exp> {
    assert!(k <= crate::INTEGRATION_DEGREE_CAP + 3);
    let mut out = Vec::new();
    for a0 in (0..=k).rev() {
        for a1 in (0..=k - a0).rev() {
            for a2 in (0..=k - a0 - a1).rev() {
                let a3 = k - a0 - a1 - a2;
                out.push([a0 as u8, a1 as u8, a2 as u8, a3 as u8]);
            }
        }
    }
    out
}

/// Index map for `hom_exps4(k)`.
pub fn hom_index4(k: usize) -> BTreeMap<Exp, usize> {
    hom_exps4(k)
        .into_iter()
        .enumerate()
        .map(|(i, e)| (e, i))
        .collect()
}

/// All exponents over 3 variables of total degree exactly k (face
/// polynomials), deterministic order.
pub fn hom_exps3(k: usize) -> Vec<[u8; 3]> {
    let mut out = Vec::new();
    for a0 in (0..=k).rev() {
        for a1 in (0..=k - a0).rev() {
            let a2 = k - a0 - a1;
            out.push([a0 as u8, a1 as u8, a2 as u8]);
        }
    }
    out
}

/// All exponents over 3 variables of total degree <= k, graded order.
pub fn exps3_upto(k: usize) -> Vec<[u8; 3]> {
    let mut out = Vec::new();
    for d in 0..=k {
        out.extend(hom_exps3(d));
    }
    out
}

/// dim P_k in three spatial variables: C(k+3,3).
pub fn dim_p3(k: usize) -> usize {
    (k + 1) * (k + 2) * (k + 3) / 6
}

/// dim P_k on a face (two variables): C(k+2,2).
pub fn dim_p2(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// dim P_k on an edge: k+1.
pub fn dim_p1(k: usize) -> usize {
    k + 1
}

// ---------------------------------------------------------------------------
// Face polynomials: three barycentric variables attached to the sorted global
// vertices (a < b < c) of a mesh face. Both tetrahedra sharing the face build
// identical representations.

/// Polynomial on a triangular face in its three barycentric coordinates.
#[derive(Clone, Default, Debug)]
pub struct FacePoly {
    terms: BTreeMap<[u8; 3], Rat>,
}

impl FacePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(e: [u8; 3], c: Rat) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(e, c);
        }
        p
    }

    pub fn mu(i: usize) -> Self {
        let mut e = [0u8; 3];
        e[i] = 1;
        Self::monomial(e, Rat::one())
    }

    pub fn add_term(&mut self, e: [u8; 3], c: &Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8; 3], &Rat)> {
        self.terms.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| (e[0] + e[1] + e[2]) as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, &(-c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(
                    [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]],
                    &(ca * cb),
                );
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            out.add_term(*e, &(v * c));
        }
        out
    }

    pub fn eval(&self, mu: &[Rat; 3]) -> Rat {
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..3 {
                for _ in 0..e[i] {
                    t *= &mu[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// Formal partial derivative with respect to `mu_i`.
    pub fn dmu(&self, i: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = *e;
            d[i] -= 1;
            out.add_term(d, &(c * rat_i(e[i] as i64)));
        }
        out
    }

    /// Canonical 2-variable form after `mu0 = 1 - mu1 - mu2`, keyed by
    /// exponents of (mu1, mu2).
    pub fn canonical2(&self) -> BTreeMap<[u8; 2], Rat> {
        let mut out: BTreeMap<[u8; 2], Rat> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut expansion: BTreeMap<[u8; 2], Rat> = BTreeMap::new();
            expansion.insert([0, 0], Rat::one());
            for _ in 0..e[0] {
                let mut next: BTreeMap<[u8; 2], Rat> = BTreeMap::new();
                for (f, v) in &expansion {
                    let mut bump = |g: [u8; 2], w: Rat| {
                        let slot = next.entry(g).or_insert_with(Rat::zero);
                        *slot += w;
                    };
                    bump(*f, v.clone());
                    bump([f[0] + 1, f[1]], -v.clone());
                    bump([f[0], f[1] + 1], -v.clone());
                }
                next.retain(|_, v| !v.is_zero());
                expansion = next;
            }
            for (f, v) in &expansion {
                let g = [f[0] + e[1], f[1] + e[2]];
                let slot = out.entry(g).or_insert_with(Rat::zero);
                *slot += c * v;
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    pub fn is_func_zero(&self) -> bool {
        self.terms.is_empty() || self.canonical2().is_empty()
    }

    pub fn func_eq(&self, other: &Self) -> bool {
        self.sub(other).is_func_zero()
    }

    /// Homogeneous degree-k coordinates over `hom_exps3(k)`.
    pub fn hom_coords(&self, k: usize) -> Result<Vec<Rat>> {
        if self.degree() > k {
            return Err(Error::DegreeCap {
                got: self.degree(),
                cap: k,
            });
        }
        let exps = hom_exps3(k);
        let index: BTreeMap<[u8; 3], usize> =
            exps.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let mut coords = vec![Rat::zero(); exps.len()];
        for (e, c) in &self.terms {
            let deficit = k - (e[0] + e[1] + e[2]) as usize;
            for b in hom_exps3(deficit) {
                let m = {
                    let n = deficit;
                    crate::num::binomial(n, b[0] as usize)
                        * crate::num::binomial(n - b[0] as usize, b[1] as usize)
                };
                let target = [e[0] + b[0], e[1] + b[1], e[2] + b[2]];
                coords[index[&target]] += c * rat_i(m as i64);
            }
        }
        Ok(coords)
    }
}

/// Univariate polynomial on an edge, power-basis coefficients in the
/// canonical parameter s in [0,1] (s = 0 at the lower-index vertex).
#[derive(Clone, Debug, Default)]
pub struct EdgePoly {
    /// coeffs[j] multiplies s^j; trailing zeros trimmed.
    pub coeffs: Vec<Rat>,
}

impl EdgePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_coeffs(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_coeff(&mut self, j: usize, c: &Rat) {
        if c.is_zero() {
            return;
        }
        if self.coeffs.len() <= j {
            self.coeffs.resize(j + 1, Rat::zero());
        }
        self.coeffs[j] += c;
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    /// Exact integral over [0,1].
    pub fn integral01(&self) -> Rat {
        let mut acc = Rat::zero();
        for (j, c) in self.coeffs.iter().enumerate() {
            acc += c / rat_i((j + 1) as i64);
        }
        acc
    }

    /// Multiply by s^j and integrate over [0,1]: the canonical edge moment.
    pub fn moment(&self, j: usize) -> Rat {
        let mut acc = Rat::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            acc += c / rat_i((i + j + 1) as i64);
        }
        acc
    }
}

//! Per-tetrahedron geometry: barycentric gradients, unnormalized face
//! normals and edge tangents, signed volume. Everything exact.

use crate::num::{rat_i, Rat};
use crate::{Error, Result};
use num_traits::Zero;

pub type Point = [Rat; 3];

fn det3(m: &[[Rat; 3]; 3]) -> Rat {
    let d = |a: &Rat, b: &Rat, c: &Rat, d: &Rat| a * d - b * c;
    &m[0][0] * d(&m[1][1], &m[1][2], &m[2][1], &m[2][2])
        - &m[0][1] * d(&m[1][0], &m[1][2], &m[2][0], &m[2][2])
        + &m[0][2] * d(&m[1][0], &m[1][1], &m[2][0], &m[2][1])
}

pub fn cross(a: &[Rat; 3], b: &[Rat; 3]) -> [Rat; 3] {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

pub fn dot(a: &[Rat; 3], b: &[Rat; 3]) -> Rat {
    (0..3).map(|i| &a[i] * &b[i]).sum()
}

pub fn sub_pts(a: &Point, b: &Point) -> [Rat; 3] {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

/// Exact geometric data of one tetrahedron.
///
/// Vertex i carries barycentric coordinate `l_i`; face i is the face opposite
/// vertex i. The unnormalized outward normal of face i is `-grad(l_i)`, and
/// the unnormalized tangent of the edge from vertex j to vertex l is
/// `x_l - x_j`. All downstream constructions use these unnormalized vectors;
/// unit vectors would differ by positive scalar factors that are absorbed
/// into the spanning coefficients and functional scalings.
#[derive(Clone, Debug)]
pub struct GeomCache {
    pub verts: [Point; 4],
    /// grad(l_i), constant over the element.
    pub grad_lam: [[Rat; 3]; 4],
    /// Unnormalized outward normal of face i: -grad(l_i).
    pub normal: [[Rat; 3]; 4],
    /// Signed volume (positive iff the vertex order is positively oriented).
    pub signed_volume: Rat,
}

impl GeomCache {
    pub fn new(verts: [Point; 4]) -> Result<Self> {
        // Columns of T are the edge vectors from vertex 0.
        let e1 = sub_pts(&verts[1], &verts[0]);
        let e2 = sub_pts(&verts[2], &verts[0]);
        let e3 = sub_pts(&verts[3], &verts[0]);
        let t = [
            [e1[0].clone(), e2[0].clone(), e3[0].clone()],
            [e1[1].clone(), e2[1].clone(), e3[1].clone()],
            [e1[2].clone(), e2[2].clone(), e3[2].clone()],
        ];
        let det = det3(&t);
        if det.is_zero() {
            return Err(Error::DegenerateTet(format!(
                "coplanar vertices {:?}",
                verts
            )));
        }
        let signed_volume = &det / rat_i(6);

        // Rows of T^{-1} are grad(l_1), grad(l_2), grad(l_3):
        // l_i(x) = (T^{-1} (x - x_0))_i for i = 1..3.
        let inv_det = rat_i(1) / &det;
        let cof = |r: usize, c: usize| -> Rat {
            let rs: Vec<usize> = (0..3).filter(|&i| i != r).collect();
            let cs: Vec<usize> = (0..3).filter(|&j| j != c).collect();
            let minor = &t[rs[0]][cs[0]] * &t[rs[1]][cs[1]] - &t[rs[0]][cs[1]] * &t[rs[1]][cs[0]];
            let sign = if (r + c).is_multiple_of(2) { rat_i(1) } else { rat_i(-1) };
            sign * minor
        };
        // (T^{-1})_{ij} = cof(j,i) / det.
        let mut grad_lam: [[Rat; 3]; 4] = Default::default();
        for i in 1..4 {
            for j in 0..3 {
                grad_lam[i][j] = cof(j, i - 1) * &inv_det;
            }
        }
        for j in 0..3 {
            grad_lam[0][j] = -(&grad_lam[1][j] + &grad_lam[2][j] + &grad_lam[3][j]);
        }
        let normal = std::array::from_fn(|i: usize| {
            std::array::from_fn(|j: usize| -&grad_lam[i][j])
        });
        Ok(GeomCache {
            verts,
            grad_lam,
            normal,
            signed_volume,
        })
    }

    pub fn volume(&self) -> Rat {
        if self.signed_volume < Rat::zero() {
            -self.signed_volume.clone()
        } else {
            self.signed_volume.clone()
        }
    }

    /// Unnormalized tangent of the edge from local vertex j to local vertex l.
    pub fn tangent(&self, j: usize, l: usize) -> [Rat; 3] {
        sub_pts(&self.verts[l], &self.verts[j])
    }

    /// Barycentric coordinates of a Cartesian point.
    pub fn barycentric(&self, x: &Point) -> [Rat; 4] {
        let mut l: [Rat; 4] = Default::default();
        for i in 1..4 {
            let d = sub_pts(x, &self.verts[0]);
            l[i] = dot(&self.grad_lam[i], &d);
        }
        l[0] = rat_i(1) - &l[1] - &l[2] - &l[3];
        l
    }

    /// The reference tetrahedron (0, e1, e2, e3).
    pub fn reference() -> Self {
        let z = || [rat_i(0), rat_i(0), rat_i(0)];
        let mut v = [z(), z(), z(), z()];
        v[1][0] = rat_i(1);
        v[2][1] = rat_i(1);
        v[3][2] = rat_i(1);
        GeomCache::new(v).unwrap()
    }
}

/// Deterministic stream of nondegenerate tetrahedra with small rational
/// vertices. Coordinates are p/q with p in [-8, 8] and q in [1, 4], so exact
/// arithmetic downstream stays cheap; degenerate draws are skipped.
pub fn sample_rational_tets(count: usize, seed: u64) -> Vec<GeomCache> {
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        state >> 33
    };
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        assert!(attempts < 10_000, "rational tet sampler failed to converge");
        let mut coord = || {
            let p = (next() % 17) as i64 - 8;
            let q = (next() % 4) as i64 + 1;
            crate::num::rat(p, q)
        };
        let verts = [
            [coord(), coord(), coord()],
            [coord(), coord(), coord()],
            [coord(), coord(), coord()],
            [coord(), coord(), coord()],
        ];
        if let Ok(g) = GeomCache::new(verts) {
            out.push(g);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    #[test]
    fn reference_tet_gradients_and_volume() {
        let g = GeomCache::reference();
        assert_eq!(g.signed_volume, rat(1, 6));
        // grad l_1 = e_x, grad l_0 = (-1,-1,-1).
        assert_eq!(g.grad_lam[1], [rat_i(1), rat_i(0), rat_i(0)]);
        assert_eq!(g.grad_lam[0], [rat_i(-1), rat_i(-1), rat_i(-1)]);
        // Outward normal of face 0 (opposite vertex 0) points away from the
        // origin: -grad l_0 = (1,1,1).
        assert_eq!(g.normal[0], [rat_i(1), rat_i(1), rat_i(1)]);
    }

    #[test]
    fn barycentric_duality() {
        // l_i(x_j) = delta_ij on a skewed element.
        let v: [Point; 4] = [
            [rat_i(1), rat_i(2), rat_i(0)],
            [rat_i(3), rat_i(2), rat_i(1)],
            [rat_i(1), rat_i(5), rat_i(1)],
            [rat_i(0), rat_i(1), rat_i(4)],
        ];
        let g = GeomCache::new(v.clone()).unwrap();
        for i in 0..4 {
            let l = g.barycentric(&v[i]);
            for j in 0..4 {
                let expect = if i == j { rat_i(1) } else { rat_i(0) };
                assert_eq!(l[j], expect, "l_{j} at vertex {i}");
            }
        }
    }

    #[test]
    fn normals_are_outward() {
        // For each face, the normal must have negative dot product with the
        // vector from the face centroid to the opposite vertex.
        let g = GeomCache::reference();
        for i in 0..4 {
            let others: Vec<usize> = (0..4).filter(|&v| v != i).collect();
            let centroid: Point = std::array::from_fn(|c| {
                (&g.verts[others[0]][c] + &g.verts[others[1]][c] + &g.verts[others[2]][c])
                    / rat_i(3)
            });
            let to_vertex = sub_pts(&g.verts[i], &centroid);
            assert!(dot(&g.normal[i], &to_vertex) < Rat::zero());
        }
    }

    #[test]
    fn degenerate_tet_is_rejected() {
        let z = [rat_i(0), rat_i(0), rat_i(0)];
        let v: [Point; 4] = [
            z.clone(),
            [rat_i(1), rat_i(0), rat_i(0)],
            [rat_i(2), rat_i(0), rat_i(0)],
            [rat_i(0), rat_i(1), rat_i(0)],
        ];
        assert!(GeomCache::new(v).is_err());
    }

    #[test]
    fn cross_product_oracle() {
        // Hand-computed: (1,2,3) x (4,5,6) = (-3, 6, -3).
        let a = [rat_i(1), rat_i(2), rat_i(3)];
        let b = [rat_i(4), rat_i(5), rat_i(6)];
        assert_eq!(cross(&a, &b), [rat_i(-3), rat_i(6), rat_i(-3)]);
        // Anti-symmetry and self-annihilation.
        assert_eq!(cross(&b, &a), [rat_i(3), rat_i(-6), rat_i(3)]);
        assert_eq!(cross(&a, &a), [rat_i(0), rat_i(0), rat_i(0)]);
    }

    #[test]
    fn negative_orientation_gives_negative_signed_volume() {
        let z = [rat_i(0), rat_i(0), rat_i(0)];
        let v: [Point; 4] = [
            z.clone(),
            [rat_i(0), rat_i(1), rat_i(0)],
            [rat_i(1), rat_i(0), rat_i(0)],
            [rat_i(0), rat_i(0), rat_i(1)],
        ];
        let g = GeomCache::new(v).unwrap();
        assert_eq!(g.signed_volume, rat(-1, 6));
        assert_eq!(g.volume(), rat(1, 6));
    }
}

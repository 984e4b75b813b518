//! Tetrahedral meshes with derived topology, canonical entity frames,
//! generators for the shipped test meshes, and line-oriented text I/O.
//!
//! Global entities are oriented by ascending vertex index: an edge is the
//! pair (min, max), a face the sorted triple. Every frame below is a
//! deterministic function of global vertex coordinates and indices alone, so
//! the frame of a shared entity is bitwise identical no matter which element
//! it is viewed from. Frames are intentionally unnormalized (rational
//! arithmetic has no square roots); every consumer absorbs the scaling.

use crate::geom::{cross, dot, sub_pts, GeomCache, Point};
use crate::num::{rat_display, rat_i, rat_parse, Rat};
use crate::{Error, Result};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

/// Local vertex pairs of the six tet edges, in canonical order.
pub const TET_EDGE_LOCALS: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

/// Local vertex triples of the four tet faces; face `i` is opposite vertex `i`.
pub const TET_FACE_LOCALS: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

/// Canonical frame of a global edge: `tangent` points from the lower to the
/// higher global vertex index; `n` is the Gram-Schmidt complement of the
/// standard axis least aligned with the edge (ties broken by axis index);
/// `m = tangent x n`.
#[derive(Clone, Debug)]
pub struct EdgeFrame {
    pub tangent: [Rat; 3],
    pub n: [Rat; 3],
    pub m: [Rat; 3],
}

impl EdgeFrame {
    pub fn new(lo: &Point, hi: &Point) -> Self {
        let t = sub_pts(hi, lo);
        let tt = dot(&t, &t);
        let mut axis = 0;
        let mut best: Option<Rat> = None;
        for j in 0..3 {
            let a = t[j].abs();
            if best.as_ref().is_none_or(|b| a < *b) {
                best = Some(a);
                axis = j;
            }
        }
        let mut e = [Rat::zero(), Rat::zero(), Rat::zero()];
        e[axis] = rat_i(1);
        let coef = &t[axis] / &tt;
        let n = [
            &e[0] - &coef * &t[0],
            &e[1] - &coef * &t[1],
            &e[2] - &coef * &t[2],
        ];
        let m = cross(&t, &n);
        EdgeFrame { tangent: t, n, m }
    }
}

/// Canonical frame of a global face with sorted vertices a < b < c:
/// `tau1 = v_b - v_a`, `normal = (v_b - v_a) x (v_c - v_a)`,
/// `tau2 = normal x tau1`.
#[derive(Clone, Debug)]
pub struct FaceFrame {
    pub tau1: [Rat; 3],
    pub tau2: [Rat; 3],
    pub normal: [Rat; 3],
}

impl FaceFrame {
    pub fn new(va: &Point, vb: &Point, vc: &Point) -> Self {
        let tau1 = sub_pts(vb, va);
        let other = sub_pts(vc, va);
        let normal = cross(&tau1, &other);
        let tau2 = cross(&normal, &tau1);
        FaceFrame { tau1, tau2, normal }
    }
}

/// Conforming tetrahedral mesh with derived topology and precomputed frames.
#[derive(Debug)]
pub struct TetMesh {
    pub vertices: Vec<Point>,
    pub tets: Vec<[usize; 4]>,
    /// Ascending vertex pairs, sorted lexicographically.
    pub edges: Vec<[usize; 2]>,
    /// Ascending vertex triples, sorted lexicographically.
    pub faces: Vec<[usize; 3]>,
    /// For each tet, global edge ids in `TET_EDGE_LOCALS` order.
    pub tet_edges: Vec<[usize; 6]>,
    /// For each tet, global face ids; slot `i` is the face opposite vertex `i`.
    pub tet_faces: Vec<[usize; 4]>,
    /// Tets incident to each face (one or two).
    pub face_tets: Vec<Vec<usize>>,
    pub geom: Vec<GeomCache>,
    pub edge_frames: Vec<EdgeFrame>,
    pub face_frames: Vec<FaceFrame>,
}

impl TetMesh {
    pub fn build(vertices: Vec<Point>, tets: Vec<[usize; 4]>) -> Result<TetMesh> {
        let nv = vertices.len();
        for (t, tet) in tets.iter().enumerate() {
            for &v in tet {
                if v >= nv {
                    return Err(Error::Mesh(format!(
                        "tet {t} references vertex {v} but only {nv} vertices exist"
                    )));
                }
            }
            for i in 0..4 {
                for j in i + 1..4 {
                    if tet[i] == tet[j] {
                        return Err(Error::Mesh(format!(
                            "tet {t} repeats vertex {}",
                            tet[i]
                        )));
                    }
                }
            }
        }
        let mut geom = Vec::with_capacity(tets.len());
        for (t, tet) in tets.iter().enumerate() {
            let verts = [
                vertices[tet[0]].clone(),
                vertices[tet[1]].clone(),
                vertices[tet[2]].clone(),
                vertices[tet[3]].clone(),
            ];
            geom.push(GeomCache::new(verts).map_err(|_| {
                Error::DegenerateTet(format!(
                    "tet {t} with vertices {:?} has zero volume",
                    tet
                ))
            })?);
        }

        let mut edge_ids: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        let mut face_ids: BTreeMap<[usize; 3], usize> = BTreeMap::new();
        for tet in &tets {
            for pair in TET_EDGE_LOCALS {
                let mut e = [tet[pair[0]], tet[pair[1]]];
                e.sort();
                let next = edge_ids.len();
                edge_ids.entry(e).or_insert(next);
            }
            for tri in TET_FACE_LOCALS {
                let mut f = [tet[tri[0]], tet[tri[1]], tet[tri[2]]];
                f.sort();
                let next = face_ids.len();
                face_ids.entry(f).or_insert(next);
            }
        }
        // Re-number entities in lexicographic order for determinism.
        let edges: Vec<[usize; 2]> = edge_ids.keys().copied().collect();
        let faces: Vec<[usize; 3]> = face_ids.keys().copied().collect();
        let edge_index: BTreeMap<[usize; 2], usize> =
            edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let face_index: BTreeMap<[usize; 3], usize> =
            faces.iter().enumerate().map(|(i, f)| (*f, i)).collect();

        let mut tet_edges = Vec::with_capacity(tets.len());
        let mut tet_faces = Vec::with_capacity(tets.len());
        let mut face_tets = vec![Vec::new(); faces.len()];
        for (t, tet) in tets.iter().enumerate() {
            let mut te = [0usize; 6];
            for (slot, pair) in TET_EDGE_LOCALS.iter().enumerate() {
                let mut e = [tet[pair[0]], tet[pair[1]]];
                e.sort();
                te[slot] = edge_index[&e];
            }
            let mut tf = [0usize; 4];
            for (slot, tri) in TET_FACE_LOCALS.iter().enumerate() {
                let mut f = [tet[tri[0]], tet[tri[1]], tet[tri[2]]];
                f.sort();
                let id = face_index[&f];
                tf[slot] = id;
                face_tets[id].push(t);
            }
            tet_edges.push(te);
            tet_faces.push(tf);
        }
        for (f, ts) in face_tets.iter().enumerate() {
            if ts.len() > 2 {
                return Err(Error::Mesh(format!(
                    "face {:?} is shared by {} tets; a conforming mesh allows at most 2",
                    faces[f],
                    ts.len()
                )));
            }
        }

        let edge_frames = edges
            .iter()
            .map(|e| EdgeFrame::new(&vertices[e[0]], &vertices[e[1]]))
            .collect();
        let face_frames = faces
            .iter()
            .map(|f| FaceFrame::new(&vertices[f[0]], &vertices[f[1]], &vertices[f[2]]))
            .collect();

        Ok(TetMesh {
            vertices,
            tets,
            edges,
            faces,
            tet_edges,
            tet_faces,
            face_tets,
            geom,
            edge_frames,
            face_frames,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_boundary_face(&self, f: usize) -> bool {
        self.face_tets[f].len() == 1
    }

    pub fn euler(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
            - self.tets.len() as i64
    }

    /// Local vertex indices of face `f` within tet `t`, ordered so that slot
    /// `m` maps to the m-th vertex of the sorted global triple. This is the
    /// bridge that lets both elements adjacent to a face agree on face
    /// barycentric coordinates.
    pub fn face_locals_in_tet(&self, t: usize, f: usize) -> [usize; 3] {
        let tri = self.faces[f];
        let tet = self.tets[t];
        let mut out = [usize::MAX; 3];
        for (m, &gv) in tri.iter().enumerate() {
            out[m] = tet
                .iter()
                .position(|&x| x == gv)
                .expect("face vertex not in tet");
        }
        out
    }

    /// Local vertex indices of edge `e` within tet `t`: slot 0 is the lower
    /// global vertex, slot 1 the higher.
    pub fn edge_locals_in_tet(&self, t: usize, e: usize) -> [usize; 2] {
        let pair = self.edges[e];
        let tet = self.tets[t];
        let find = |gv: usize| tet.iter().position(|&x| x == gv).expect("edge vertex not in tet");
        [find(pair[0]), find(pair[1])]
    }

    /// Local face slot (0..4) of global face `f` within tet `t`.
    pub fn face_slot_in_tet(&self, t: usize, f: usize) -> usize {
        self.tet_faces[t]
            .iter()
            .position(|&x| x == f)
            .expect("face not in tet")
    }

    // ---- text format -----------------------------------------------------

    pub fn write_string(&self) -> String {
        let mut out = String::from("ggmesh 1\n");
        out.push_str(&format!("vertices {}\n", self.vertices.len()));
        for v in &self.vertices {
            out.push_str(&format!(
                "{} {} {}\n",
                rat_display(&v[0]),
                rat_display(&v[1]),
                rat_display(&v[2])
            ));
        }
        out.push_str(&format!("tets {}\n", self.tets.len()));
        for t in &self.tets {
            out.push_str(&format!("{} {} {} {}\n", t[0], t[1], t[2], t[3]));
        }
        out
    }

    pub fn read_string(text: &str) -> Result<TetMesh> {
        let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                None
            } else {
                Some((i + 1, stripped.to_string()))
            }
        });
        let parse_err = |line: usize, msg: String| Error::MeshParse { line, msg };
        let (hline, header) = lines
            .next()
            .ok_or_else(|| parse_err(0, "empty mesh file".into()))?;
        if header != "ggmesh 1" {
            return Err(parse_err(
                hline,
                format!("expected header \"ggmesh 1\", found \"{header}\""),
            ));
        }
        let (vline, vdecl) = lines
            .next()
            .ok_or_else(|| parse_err(hline, "missing \"vertices N\" line".into()))?;
        let nv: usize = vdecl
            .strip_prefix("vertices ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| parse_err(vline, format!("expected \"vertices N\", found \"{vdecl}\"")))?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, row) = lines
                .next()
                .ok_or_else(|| parse_err(vline, format!("expected {nv} vertex lines")))?;
            let fields: Vec<&str> = row.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(parse_err(
                    ln,
                    format!("vertex line needs 3 coordinates, found {}", fields.len()),
                ));
            }
            let mut coords = Vec::with_capacity(3);
            for (fi, field) in fields.iter().enumerate() {
                coords.push(rat_parse(field).ok_or_else(|| {
                    parse_err(ln, format!("field {} is not a rational: \"{field}\"", fi + 1))
                })?);
            }
            vertices.push([coords[0].clone(), coords[1].clone(), coords[2].clone()]);
        }
        let (tline, tdecl) = lines
            .next()
            .ok_or_else(|| parse_err(vline, "missing \"tets M\" line".into()))?;
        let nt: usize = tdecl
            .strip_prefix("tets ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| parse_err(tline, format!("expected \"tets M\", found \"{tdecl}\"")))?;
        let mut tets = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (ln, row) = lines
                .next()
                .ok_or_else(|| parse_err(tline, format!("expected {nt} tet lines")))?;
            let fields: Vec<&str> = row.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(parse_err(
                    ln,
                    format!("tet line needs 4 vertex indices, found {}", fields.len()),
                ));
            }
            let mut idx = [0usize; 4];
            for (fi, field) in fields.iter().enumerate() {
                idx[fi] = field.parse().map_err(|_| {
                    parse_err(ln, format!("field {} is not an index: \"{field}\"", fi + 1))
                })?;
            }
            tets.push(idx);
        }
        if let Some((ln, extra)) = lines.next() {
            return Err(parse_err(ln, format!("unexpected trailing content: \"{extra}\"")));
        }
        TetMesh::build(vertices, tets)
    }

    pub fn write_file(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.write_string())?;
        Ok(())
    }

    pub fn read_file(path: &std::path::Path) -> Result<TetMesh> {
        let text = std::fs::read_to_string(path)?;
        TetMesh::read_string(&text)
    }
}

/// The shipped mesh generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshKind {
    SingleTet,
    TwoTet,
    Cube6,
    Cube6Refined(u32),
}

impl MeshKind {
    pub fn parse(s: &str) -> Option<MeshKind> {
        match s {
            "single_tet" => Some(MeshKind::SingleTet),
            "two_tet" => Some(MeshKind::TwoTet),
            "cube6" => Some(MeshKind::Cube6),
            _ => {
                let inner = s.strip_prefix("cube6_refined(")?.strip_suffix(')')?;
                inner.trim().parse().ok().map(MeshKind::Cube6Refined)
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            MeshKind::SingleTet => "single_tet".into(),
            MeshKind::TwoTet => "two_tet".into(),
            MeshKind::Cube6 => "cube6".into(),
            MeshKind::Cube6Refined(n) => format!("cube6_refined({n})"),
        }
    }
}

pub fn generate_mesh(kind: MeshKind) -> Result<TetMesh> {
    match kind {
        MeshKind::SingleTet => TetMesh::build(
            vec![
                [rat_i(0), rat_i(0), rat_i(0)],
                [rat_i(1), rat_i(0), rat_i(0)],
                [rat_i(0), rat_i(1), rat_i(0)],
                [rat_i(0), rat_i(0), rat_i(1)],
            ],
            vec![[0, 1, 2, 3]],
        ),
        MeshKind::TwoTet => TetMesh::build(
            vec![
                [rat_i(0), rat_i(0), rat_i(0)],
                [rat_i(1), rat_i(0), rat_i(0)],
                [rat_i(0), rat_i(1), rat_i(0)],
                [rat_i(0), rat_i(0), rat_i(1)],
                [rat_i(1), rat_i(1), rat_i(1)],
            ],
            vec![[0, 1, 2, 3], [1, 2, 3, 4]],
        ),
        MeshKind::Cube6 => kuhn_cube(1),
        MeshKind::Cube6Refined(n) => {
            if n == 0 || n > 3 {
                return Err(Error::Mesh(format!(
                    "cube6_refined supports 1 <= n <= 3, got {n}"
                )));
            }
            kuhn_cube(n as usize)
        }
    }
}

/// Unit cube as an n x n x n grid of subcubes, each split into 6 tets by the
/// Kuhn subdivision (all tets of a subcube share its main diagonal). The
/// splits of adjacent subcubes share the same diagonal on their common face,
/// so the union is conforming.
fn kuhn_cube(n: usize) -> Result<TetMesh> {
    let m = n + 1;
    let coord = |i: usize| crate::num::rat(i as i64, n as i64);
    let mut vertices = Vec::with_capacity(m * m * m);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                vertices.push([coord(i), coord(j), coord(k)]);
            }
        }
    }
    let vid = |i: usize, j: usize, k: usize| i + m * (j + m * k);
    // The six permutations of axis insertion order.
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut tets = Vec::with_capacity(6 * n * n * n);
    for ck in 0..n {
        for cj in 0..n {
            for ci in 0..n {
                let base = [ci, cj, ck];
                for perm in PERMS {
                    let mut p = base;
                    let mut tet = [vid(p[0], p[1], p[2]), 0, 0, 0];
                    for (step, &axis) in perm.iter().enumerate() {
                        p[axis] += 1;
                        tet[step + 1] = vid(p[0], p[1], p[2]);
                    }
                    tets.push(tet);
                }
            }
        }
    }
    TetMesh::build(vertices, tets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    fn counts(m: &TetMesh) -> (usize, usize, usize, usize) {
        (m.vertices.len(), m.edges.len(), m.faces.len(), m.tets.len())
    }

    #[test]
    fn single_tet_topology() {
        let m = generate_mesh(MeshKind::SingleTet).unwrap();
        assert_eq!(counts(&m), (4, 6, 4, 1));
        assert_eq!(m.euler(), 1);
        assert!(m.face_tets.iter().all(|ts| ts.len() == 1));
    }

    #[test]
    fn two_tet_topology_by_hand_count() {
        // Two tets glued along one face: 5 vertices; edges: 6 + 3 new to the
        // apex = 9; faces: 4 + 3 new = 7; Euler 5 - 9 + 7 - 2 = 1.
        let m = generate_mesh(MeshKind::TwoTet).unwrap();
        assert_eq!(counts(&m), (5, 9, 7, 2));
        assert_eq!(m.euler(), 1);
        let shared: Vec<usize> = (0..m.faces.len())
            .filter(|&f| m.face_tets[f].len() == 2)
            .collect();
        assert_eq!(shared.len(), 1);
        assert_eq!(m.faces[shared[0]], [1, 2, 3]);
        // Both tets see the same sorted global triple through their local maps.
        let f = shared[0];
        for &t in &m.face_tets[f] {
            let locals = m.face_locals_in_tet(t, f);
            let globals: Vec<usize> = locals.iter().map(|&l| m.tets[t][l]).collect();
            assert_eq!(globals, vec![1, 2, 3]);
        }
    }

    #[test]
    fn cube6_matches_kuhn_enumeration() {
        // Hand enumeration of the Kuhn split of one cube: 8 vertices; edges
        // are the 12 cube edges + 6 face diagonals + 1 body diagonal = 19;
        // faces are 12 boundary triangles (2 per cube face) + 6 interior
        // triangles fanning around the body diagonal = 18; 6 tets.
        let m = generate_mesh(MeshKind::Cube6).unwrap();
        assert_eq!(counts(&m), (8, 19, 18, 6));
        assert_eq!(m.euler(), 1);
        // Every tet contains both endpoints of the main diagonal.
        let lo = m
            .vertices
            .iter()
            .position(|v| v.iter().all(|c| c.is_zero()))
            .unwrap();
        let hi = m
            .vertices
            .iter()
            .position(|v| v.iter().all(|c| *c == rat_i(1)))
            .unwrap();
        for tet in &m.tets {
            assert!(tet.contains(&lo) && tet.contains(&hi));
        }
        // Total volume is the cube volume.
        let vol: Rat = m.geom.iter().map(|g| g.volume()).sum();
        assert_eq!(vol, rat_i(1));
        let interior = (0..m.faces.len()).filter(|&f| !m.is_boundary_face(f)).count();
        assert_eq!(interior, 6);
    }

    #[test]
    fn refined_cube_counts() {
        let m = generate_mesh(MeshKind::Cube6Refined(2)).unwrap();
        assert_eq!(counts(&m), (27, 98, 120, 48));
        assert_eq!(m.euler(), 1);
        let vol: Rat = m.geom.iter().map(|g| g.volume()).sum();
        assert_eq!(vol, rat_i(1));

        let m3 = generate_mesh(MeshKind::Cube6Refined(3)).unwrap();
        assert_eq!(m3.vertices.len(), 64);
        assert_eq!(m3.tets.len(), 162);
        assert_eq!(m3.euler(), 1);

        // n=1 must coincide with plain cube6.
        let m1 = generate_mesh(MeshKind::Cube6Refined(1)).unwrap();
        assert_eq!(counts(&m1), (8, 19, 18, 6));

        assert!(generate_mesh(MeshKind::Cube6Refined(4)).is_err());
        assert!(generate_mesh(MeshKind::Cube6Refined(0)).is_err());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(MeshKind::parse("single_tet"), Some(MeshKind::SingleTet));
        assert_eq!(MeshKind::parse("two_tet"), Some(MeshKind::TwoTet));
        assert_eq!(MeshKind::parse("cube6"), Some(MeshKind::Cube6));
        assert_eq!(
            MeshKind::parse("cube6_refined(2)"),
            Some(MeshKind::Cube6Refined(2))
        );
        assert_eq!(MeshKind::parse("cube7"), None);
        assert_eq!(MeshKind::parse("cube6_refined(x)"), None);
        assert_eq!(MeshKind::parse("cube6_refined(2)").unwrap().name(), "cube6_refined(2)");
    }

    #[test]
    fn normals_point_outward_on_all_generators() {
        for kind in [
            MeshKind::SingleTet,
            MeshKind::TwoTet,
            MeshKind::Cube6,
            MeshKind::Cube6Refined(2),
        ] {
            let m = generate_mesh(kind).unwrap();
            for (t, g) in m.geom.iter().enumerate() {
                for i in 0..4 {
                    let tri = TET_FACE_LOCALS[i];
                    let mut bary = [Rat::zero(), Rat::zero(), Rat::zero()];
                    for &l in &tri {
                        for c in 0..3 {
                            bary[c] += &g.verts[l][c];
                        }
                    }
                    for c in 0..3 {
                        bary[c] /= rat_i(3);
                    }
                    let to_vertex = [
                        &g.verts[i][0] - &bary[0],
                        &g.verts[i][1] - &bary[1],
                        &g.verts[i][2] - &bary[2],
                    ];
                    let d = dot(&g.normal[i], &to_vertex);
                    assert!(d < Rat::zero(), "tet {t} normal {i} not outward");
                }
            }
        }
    }

    #[test]
    fn edge_frames_are_orthogonal_and_deterministic() {
        let m = generate_mesh(MeshKind::Cube6Refined(2)).unwrap();
        for fr in &m.edge_frames {
            assert!(dot(&fr.tangent, &fr.n).is_zero());
            assert!(dot(&fr.tangent, &fr.m).is_zero());
            assert!(dot(&fr.n, &fr.m).is_zero());
            assert!(!dot(&fr.n, &fr.n).is_zero());
            assert!(!dot(&fr.m, &fr.m).is_zero());
        }
        // Hand check: edge along the x axis picks axis e_y for n, m = t x n = e_z.
        let fr = EdgeFrame::new(
            &[rat_i(0), rat_i(0), rat_i(0)],
            &[rat_i(1), rat_i(0), rat_i(0)],
        );
        assert_eq!(fr.n, [rat_i(0), rat_i(1), rat_i(0)]);
        assert_eq!(fr.m, [rat_i(0), rat_i(0), rat_i(1)]);
    }

    #[test]
    fn face_frames_match_both_sides_and_hand_values() {
        let m = generate_mesh(MeshKind::TwoTet).unwrap();
        for fr in &m.face_frames {
            assert!(dot(&fr.normal, &fr.tau1).is_zero());
            assert!(dot(&fr.normal, &fr.tau2).is_zero());
            assert!(dot(&fr.tau1, &fr.tau2).is_zero());
        }
        // Face {0,1,2} of the reference tet: tau1 = e_x, normal = e_z scaled,
        // tau2 = normal x tau1 = e_y scaled.
        let fr = FaceFrame::new(
            &[rat_i(0), rat_i(0), rat_i(0)],
            &[rat_i(1), rat_i(0), rat_i(0)],
            &[rat_i(0), rat_i(1), rat_i(0)],
        );
        assert_eq!(fr.tau1, [rat_i(1), rat_i(0), rat_i(0)]);
        assert_eq!(fr.normal, [rat_i(0), rat_i(0), rat_i(1)]);
        assert_eq!(fr.tau2, [rat_i(0), rat_i(1), rat_i(0)]);
    }

    #[test]
    fn roundtrip_io_is_exact() {
        for kind in [MeshKind::TwoTet, MeshKind::Cube6Refined(2)] {
            let m = generate_mesh(kind).unwrap();
            let text = m.write_string();
            let m2 = TetMesh::read_string(&text).unwrap();
            assert_eq!(m.vertices, m2.vertices);
            assert_eq!(m.tets, m2.tets);
        }
    }

    #[test]
    fn parser_handles_comments_and_rationals() {
        let text = "# a comment\nggmesh 1\nvertices 4 # trailing\n0 0 0\n1/2 0 0\n0 1/3 0\n\n0 0 -2/7\ntets 1\n0 1 2 3\n";
        let m = TetMesh::read_string(text).unwrap();
        assert_eq!(m.vertices[1][0], rat(1, 2));
        assert_eq!(m.vertices[3][2], rat(-2, 7));
    }

    #[test]
    fn parser_diagnostics() {
        let bad_header = TetMesh::read_string("ggmesh 2\nvertices 0\ntets 0\n");
        assert!(matches!(bad_header, Err(Error::MeshParse { line: 1, .. })));

        let bad_coord = TetMesh::read_string("ggmesh 1\nvertices 1\n0 zebra 0\ntets 0\n");
        match bad_coord {
            Err(Error::MeshParse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("zebra"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }

        let out_of_range = TetMesh::read_string("ggmesh 1\nvertices 4\n0 0 0\n1 0 0\n0 1 0\n0 0 1\ntets 1\n0 1 2 99\n");
        match out_of_range {
            Err(Error::Mesh(msg)) => assert!(msg.contains("99"), "{msg}"),
            other => panic!("expected mesh error, got {other:?}"),
        }

        let coplanar = TetMesh::read_string("ggmesh 1\nvertices 4\n0 0 0\n1 0 0\n0 1 0\n1 1 0\ntets 1\n0 1 2 3\n");
        match coplanar {
            Err(Error::DegenerateTet(msg)) => assert!(msg.contains("tet 0"), "{msg}"),
            other => panic!("expected degeneracy error, got {other:?}"),
        }
    }

    #[test]
    fn nonconforming_face_sharing_is_rejected() {
        let verts = vec![
            [rat_i(0), rat_i(0), rat_i(0)],
            [rat_i(1), rat_i(0), rat_i(0)],
            [rat_i(0), rat_i(1), rat_i(0)],
            [rat_i(0), rat_i(0), rat_i(1)],
            [rat_i(0), rat_i(0), rat_i(-1)],
            [rat_i(1), rat_i(1), rat_i(1)],
        ];
        let tets = vec![[0, 1, 2, 3], [0, 1, 2, 4], [0, 1, 2, 5]];
        match TetMesh::build(verts, tets) {
            Err(Error::Mesh(msg)) => assert!(msg.contains("shared by 3"), "{msg}"),
            other => panic!("expected conformity error, got {other:?}"),
        }
    }

    #[test]
    fn shared_entities_resolve_consistently_from_all_elements() {
        let m = generate_mesh(MeshKind::Cube6).unwrap();
        for (e, pair) in m.edges.iter().enumerate() {
            for (t, te) in m.tet_edges.iter().enumerate() {
                if te.contains(&e) {
                    let locals = m.edge_locals_in_tet(t, e);
                    assert_eq!(m.tets[t][locals[0]], pair[0]);
                    assert_eq!(m.tets[t][locals[1]], pair[1]);
                }
            }
        }
        for f in 0..m.faces.len() {
            for &t in &m.face_tets[f] {
                let slot = m.face_slot_in_tet(t, f);
                let opposite = m.tets[t][slot];
                assert!(!m.faces[f].contains(&opposite));
            }
        }
    }
}

//! Structured tetrahedral meshes of the unit cube with the interface plane
//! z = 0.5.
//!
//! The cube is divided into an n x n x n grid and every grid cell is split
//! into six tetrahedra sharing the cell diagonal (Kuhn subdivision). The
//! split pattern is translation invariant, so neighbouring cells match face
//! to face and the triangulation is conforming; for even n the plane
//! z = 0.5 is covered exactly by grid faces and no element straddles it.
//! The longest element edge is the cell diagonal, hence the mesh size is
//! h = sqrt(3)/n.

use std::collections::HashMap;

use crate::linalg::{add, cross, dot, norm, scale, sub, Vec3};
use crate::{Error, Result};

/// Subdomain labels. `Omega1` is the lower half z <= 0.5, `Omega2` the
/// upper half.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subdomain {
    Omega1,
    Omega2,
}

impl Subdomain {
    pub fn index(self) -> usize {
        match self {
            Subdomain::Omega1 => 1,
            Subdomain::Omega2 => 2,
        }
    }
}

/// Face classification. Interior faces are tagged by the subdomain they lie
/// in, boundary faces by the part of the outer surface, and `Gamma` marks
/// interface faces between the subdomains. The five tags cover all faces
/// disjointly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceClass {
    Interior1,
    Interior2,
    Sigma1,
    Sigma2,
    Gamma,
}

impl FaceClass {
    pub fn is_boundary(self) -> bool {
        matches!(self, FaceClass::Sigma1 | FaceClass::Sigma2)
    }

    pub fn is_interior(self) -> bool {
        matches!(self, FaceClass::Interior1 | FaceClass::Interior2)
    }
}

/// A tetrahedral element.
#[derive(Debug, Clone)]
pub struct Element {
    /// Vertex ids, ordered so the signed volume is positive.
    pub vertices: [usize; 4],
    pub subdomain: Subdomain,
    /// Global face ids; `faces[i]` is opposite `vertices[i]`.
    pub faces: [usize; 4],
    /// +1 when the global face normal coincides with this element's outward
    /// normal, -1 otherwise.
    pub face_signs: [f64; 4],
}

/// A triangular face.
#[derive(Debug, Clone)]
pub struct Face {
    /// Vertex ids, sorted ascending.
    pub vertices: [usize; 3],
    pub class: FaceClass,
    pub area: f64,
    /// Unit normal with the global orientation fixed by the sorted vertex
    /// triple (cross product of the first two edges).
    pub normal: Vec3,
    pub barycenter: Vec3,
    /// Adjacent element ids. Boundary faces have one neighbour; interface
    /// faces store the Omega1 element first.
    pub elements: [Option<usize>; 2],
}

/// Conforming tetrahedral mesh of the unit cube. Immutable after
/// construction, so shared read access from many threads is safe.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub elements: Vec<Element>,
    pub faces: Vec<Face>,
    /// Grid cells per axis; zero for meshes built from raw cell lists.
    pub n: usize,
}

/// Per-element geometry used by the local assembly.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub volume: f64,
    pub vertices: [Vec3; 4],
    /// `face_areas[i]` belongs to the face opposite vertex i.
    pub face_areas: [f64; 4],
    /// Outward unit normals, same numbering as the areas.
    pub normals: [Vec3; 4],
    pub barycenter: Vec3,
    /// The six edge vectors of the tetrahedron.
    pub edges: [Vec3; 6],
}

impl ElementGeometry {
    /// Geometry of an arbitrary tetrahedron given its (positively oriented)
    /// vertices.
    pub fn from_vertices(vertices: [Vec3; 4]) -> Self {
        let volume = tet_volume(&vertices);
        debug_assert!(volume > 0.0, "tetrahedron must be positively oriented");
        let mut face_areas = [0.0; 4];
        let mut normals = [[0.0; 3]; 4];
        for i in 0..4 {
            let [a, b, c] = opposite_face(i);
            let e1 = sub(vertices[b], vertices[a]);
            let e2 = sub(vertices[c], vertices[a]);
            let mut area_vec = scale(cross(e1, e2), 0.5);
            let face_mid = scale(
                add(add(vertices[a], vertices[b]), vertices[c]),
                1.0 / 3.0,
            );
            // Orient away from the opposite vertex.
            if dot(area_vec, sub(face_mid, vertices[i])) < 0.0 {
                area_vec = scale(area_vec, -1.0);
            }
            let area = norm(area_vec);
            face_areas[i] = area;
            normals[i] = scale(area_vec, 1.0 / area);
        }
        let barycenter = scale(
            add(
                add(vertices[0], vertices[1]),
                add(vertices[2], vertices[3]),
            ),
            0.25,
        );
        let mut edges = [[0.0; 3]; 6];
        let mut e = 0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                edges[e] = sub(vertices[j], vertices[i]);
                e += 1;
            }
        }
        ElementGeometry {
            volume,
            vertices,
            face_areas,
            normals,
            barycenter,
            edges,
        }
    }

    /// Diameter, i.e. the longest edge.
    pub fn diameter(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| norm(*e))
            .fold(0.0, f64::max)
    }
}

/// Local vertex indices of the face opposite vertex `i`.
pub fn opposite_face(i: usize) -> [usize; 3] {
    match i {
        0 => [1, 2, 3],
        1 => [0, 2, 3],
        2 => [0, 1, 3],
        _ => [0, 1, 2],
    }
}

fn tet_volume(v: &[Vec3; 4]) -> f64 {
    let a = sub(v[1], v[0]);
    let b = sub(v[2], v[0]);
    let c = sub(v[3], v[0]);
    dot(a, cross(b, c)) / 6.0
}

/// Builds the structured Kuhn mesh with `n` cells per axis.
///
/// `n` must be even so that the interface plane z = 0.5 coincides with a
/// layer of grid faces; an odd resolution would produce elements straddling
/// the interface and is rejected.
pub fn build_cube_mesh(n: usize) -> Result<Mesh> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidResolution(n));
    }
    let np = n + 1;
    let vid = |i: usize, j: usize, k: usize| -> usize { i + np * (j + np * k) };
    let mut vertices = Vec::with_capacity(np * np * np);
    for idx in 0..(np * np * np) {
        let i = idx % np;
        let j = (idx / np) % np;
        let k = idx / (np * np);
        let s = 1.0 / n as f64;
        vertices.push([i as f64 * s, j as f64 * s, k as f64 * s]);
    }

    // The six tetrahedra of a unit cell: one per permutation (a, b, c) of
    // the axes, with corner offsets 0, e_c, e_b + e_c, (1,1,1). All share
    // the cell diagonal.
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];

    let mut cells = Vec::with_capacity(6 * n * n * n);
    for ck in 0..n {
        for cj in 0..n {
            for ci in 0..n {
                let corner = [ci, cj, ck];
                let subdomain = if ck < n / 2 {
                    Subdomain::Omega1
                } else {
                    Subdomain::Omega2
                };
                for perm in PERMS {
                    let [_, b, c] = perm;
                    let mut offs = [[0usize; 3]; 4];
                    offs[1][c] = 1;
                    offs[2][b] = 1;
                    offs[2][c] = 1;
                    offs[3] = [1, 1, 1];
                    let mut ids = [0usize; 4];
                    for (slot, off) in ids.iter_mut().zip(offs) {
                        *slot = vid(corner[0] + off[0], corner[1] + off[1], corner[2] + off[2]);
                    }
                    cells.push((ids, subdomain));
                }
            }
        }
    }

    let mut mesh = assemble_mesh(vertices, cells)?;
    mesh.n = n;
    Ok(mesh)
}

/// Builds a mesh from an explicit cell list. Used for small hand-made
/// meshes in tests; classification follows the same rules as the cube mesh
/// (boundary faces inherit their element's subdomain, internal faces
/// between different subdomains become interface faces).
pub fn from_cells(vertices: Vec<Vec3>, cells: Vec<([usize; 4], Subdomain)>) -> Result<Mesh> {
    assemble_mesh(vertices, cells)
}

fn assemble_mesh(vertices: Vec<Vec3>, cells: Vec<([usize; 4], Subdomain)>) -> Result<Mesh> {
    let mut elements: Vec<Element> = Vec::with_capacity(cells.len());
    let mut faces: Vec<Face> = Vec::new();
    let mut face_lookup: HashMap<[usize; 3], usize> = HashMap::new();

    for (mut ids, subdomain) in cells {
        let coords = [
            vertices[ids[0]],
            vertices[ids[1]],
            vertices[ids[2]],
            vertices[ids[3]],
        ];
        if tet_volume(&coords) < 0.0 {
            ids.swap(2, 3);
        }
        let element_id = elements.len();
        let mut face_ids = [0usize; 4];
        for i in 0..4 {
            let [a, b, c] = opposite_face(i);
            let mut key = [ids[a], ids[b], ids[c]];
            key.sort_unstable();
            let face_id = *face_lookup.entry(key).or_insert_with(|| {
                let id = faces.len();
                let pa = vertices[key[0]];
                let pb = vertices[key[1]];
                let pc = vertices[key[2]];
                let area_vec = scale(cross(sub(pb, pa), sub(pc, pa)), 0.5);
                let area = norm(area_vec);
                faces.push(Face {
                    vertices: key,
                    class: FaceClass::Interior1,
                    area,
                    normal: scale(area_vec, 1.0 / area),
                    barycenter: scale(add(add(pa, pb), pc), 1.0 / 3.0),
                    elements: [None, None],
                });
                id
            });
            let face = &mut faces[face_id];
            if face.elements[0].is_none() {
                face.elements[0] = Some(element_id);
            } else {
                debug_assert!(face.elements[1].is_none(), "face shared by > 2 elements");
                face.elements[1] = Some(element_id);
            }
            face_ids[i] = face_id;
        }
        elements.push(Element {
            vertices: ids,
            subdomain,
            faces: face_ids,
            face_signs: [1.0; 4],
        });
    }

    // Classify faces and order interface neighbours as [Omega1, Omega2].
    for face in faces.iter_mut() {
        match (face.elements[0], face.elements[1]) {
            (Some(e0), Some(e1)) => {
                let s0 = elements[e0].subdomain;
                let s1 = elements[e1].subdomain;
                face.class = match (s0, s1) {
                    (Subdomain::Omega1, Subdomain::Omega1) => FaceClass::Interior1,
                    (Subdomain::Omega2, Subdomain::Omega2) => FaceClass::Interior2,
                    (Subdomain::Omega1, Subdomain::Omega2) => FaceClass::Gamma,
                    (Subdomain::Omega2, Subdomain::Omega1) => {
                        face.elements = [Some(e1), Some(e0)];
                        FaceClass::Gamma
                    }
                };
            }
            (Some(e0), None) => {
                face.class = match elements[e0].subdomain {
                    Subdomain::Omega1 => FaceClass::Sigma1,
                    Subdomain::Omega2 => FaceClass::Sigma2,
                };
            }
            _ => unreachable!("face without adjacent element"),
        }
    }

    // Orientation signs relative to the global face normals.
    for element in elements.iter_mut() {
        for i in 0..4 {
            let face = &faces[element.faces[i]];
            let opposite = vertices[element.vertices[i]];
            let outward = sub(face.barycenter, opposite);
            element.face_signs[i] = if dot(face.normal, outward) >= 0.0 {
                1.0
            } else {
                -1.0
            };
        }
    }

    Ok(Mesh {
        vertices,
        elements,
        faces,
        n: 0,
    })
}

impl Mesh {
    /// Geometry of element `element_id`.
    pub fn element_geometry(&self, element_id: usize) -> ElementGeometry {
        let element = &self.elements[element_id];
        ElementGeometry::from_vertices([
            self.vertices[element.vertices[0]],
            self.vertices[element.vertices[1]],
            self.vertices[element.vertices[2]],
            self.vertices[element.vertices[3]],
        ])
    }

    /// Mesh size h, the largest element diameter.
    pub fn size(&self) -> f64 {
        (0..self.elements.len())
            .map(|e| self.element_geometry(e).diameter())
            .fold(0.0, f64::max)
    }

    /// Local index (0..4) of `face_id` within element `element_id`.
    pub fn local_face_index(&self, element_id: usize, face_id: usize) -> usize {
        self.elements[element_id]
            .faces
            .iter()
            .position(|&f| f == face_id)
            .expect("face does not belong to element")
    }

    pub fn num_faces_with_class(&self, class: FaceClass) -> usize {
        self.faces.iter().filter(|f| f.class == class).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_tet_geometry() {
        let geo = ElementGeometry::from_vertices([
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]);
        assert!((geo.volume - 1.0 / 6.0).abs() < 1e-15);
        // Closed-surface identity: the area-weighted outward normals cancel.
        let mut sum = [0.0; 3];
        for i in 0..4 {
            sum = add(sum, scale(geo.normals[i], geo.face_areas[i]));
        }
        assert!(norm(sum) < 1e-14);
        // Face 0 (opposite the origin vertex) is the slanted face.
        assert!((geo.face_areas[0] - 3.0f64.sqrt() / 2.0).abs() < 1e-14);
        assert!((geo.face_areas[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_odd_or_tiny_resolution() {
        assert!(matches!(
            build_cube_mesh(3),
            Err(Error::InvalidResolution(3))
        ));
        assert!(matches!(
            build_cube_mesh(0),
            Err(Error::InvalidResolution(0))
        ));
    }

    #[test]
    fn n2_element_count_and_volumes() {
        let mesh = build_cube_mesh(2).unwrap();
        assert_eq!(mesh.elements.len(), 48);
        let mut total = 0.0;
        for e in 0..mesh.elements.len() {
            let vol = mesh.element_geometry(e).volume;
            assert!((vol - 1.0 / 48.0).abs() < 1e-15);
            total += vol;
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kuhn_cell_volume_at_n4() {
        let mesh = build_cube_mesh(4).unwrap();
        for e in 0..mesh.elements.len() {
            let vol = mesh.element_geometry(e).volume;
            assert!((vol - 1.0 / (6.0 * 64.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn mesh_size_matches_cell_diagonal() {
        for (n, expect) in [
            (2usize, 3.0f64.sqrt() / 2.0),
            (4, 0.4330),
            (8, 0.2165),
            (16, 0.1083),
        ] {
            let mesh = build_cube_mesh(n).unwrap();
            let h = mesh.size();
            assert!(
                (h - 3.0f64.sqrt() / n as f64).abs() < 1e-13,
                "n={n}: h={h}"
            );
            assert!((h - expect).abs() < 1e-4, "n={n}: h={h} vs {expect}");
        }
    }

    #[test]
    fn mesh_is_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Mesh>();
        assert_send_sync::<ElementGeometry>();

        let mesh = std::sync::Arc::new(build_cube_mesh(2).unwrap());
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let mesh = std::sync::Arc::clone(&mesh);
                std::thread::spawn(move || {
                    (0..mesh.elements.len())
                        .map(|e| mesh.element_geometry(e).volume)
                        .sum::<f64>()
                })
            })
            .collect();
        for handle in handles {
            assert!((handle.join().unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn face_sets_cover_and_counts_match() {
        let mesh = build_cube_mesh(4).unwrap();
        let interior = mesh.num_faces_with_class(FaceClass::Interior1)
            + mesh.num_faces_with_class(FaceClass::Interior2)
            + mesh.num_faces_with_class(FaceClass::Gamma);
        let boundary = mesh.num_faces_with_class(FaceClass::Sigma1)
            + mesh.num_faces_with_class(FaceClass::Sigma2);
        assert_eq!(interior + boundary, mesh.faces.len());
        // Every element contributes 4 face slots; interior faces take two.
        assert_eq!(4 * mesh.elements.len(), 2 * interior + boundary);
        // Two triangles per grid square on the interface plane.
        assert_eq!(
            mesh.num_faces_with_class(FaceClass::Gamma),
            2 * mesh.n * mesh.n
        );
        // Boundary: six cube sides, two triangles per square.
        assert_eq!(boundary, 6 * 2 * mesh.n * mesh.n);
    }

    #[test]
    fn adjacency_is_consistent() {
        let mesh = build_cube_mesh(2).unwrap();
        for (fid, face) in mesh.faces.iter().enumerate() {
            let n_adj = face.elements.iter().flatten().count();
            match face.class {
                FaceClass::Sigma1 | FaceClass::Sigma2 => assert_eq!(n_adj, 1),
                _ => assert_eq!(n_adj, 2),
            }
            for eid in face.elements.iter().flatten() {
                assert!(mesh.elements[*eid].faces.contains(&fid));
            }
        }
        for element in &mesh.elements {
            let mut faces = element.faces;
            faces.sort_unstable();
            faces.windows(2).for_each(|w| assert_ne!(w[0], w[1]));
        }
    }

    #[test]
    fn interface_faces_lie_in_the_midplane_and_split_subdomains() {
        let mesh = build_cube_mesh(4).unwrap();
        for face in &mesh.faces {
            if face.class == FaceClass::Gamma {
                for &v in &face.vertices {
                    assert!((mesh.vertices[v][2] - 0.5).abs() < 1e-14);
                }
                let e1 = face.elements[0].unwrap();
                let e2 = face.elements[1].unwrap();
                assert_eq!(mesh.elements[e1].subdomain, Subdomain::Omega1);
                assert_eq!(mesh.elements[e2].subdomain, Subdomain::Omega2);
            }
        }
        for (eid, element) in mesh.elements.iter().enumerate() {
            let geo = mesh.element_geometry(eid);
            match element.subdomain {
                Subdomain::Omega1 => assert!(geo.barycenter[2] < 0.5),
                Subdomain::Omega2 => assert!(geo.barycenter[2] > 0.5),
            }
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let a = build_cube_mesh(2).unwrap();
        let b = build_cube_mesh(2).unwrap();
        assert_eq!(a.faces.len(), b.faces.len());
        for (fa, fb) in a.faces.iter().zip(&b.faces) {
            assert_eq!(fa.vertices, fb.vertices);
            assert_eq!(fa.class, fb.class);
            assert_eq!(fa.elements, fb.elements);
        }
        for (ea, eb) in a.elements.iter().zip(&b.elements) {
            assert_eq!(ea.vertices, eb.vertices);
            assert_eq!(ea.faces, eb.faces);
            assert_eq!(ea.face_signs, eb.face_signs);
        }
    }

    #[test]
    fn face_signs_agree_with_outward_normals() {
        let mesh = build_cube_mesh(2).unwrap();
        for (eid, element) in mesh.elements.iter().enumerate() {
            let geo = mesh.element_geometry(eid);
            for i in 0..4 {
                let face = &mesh.faces[element.faces[i]];
                let signed = scale(face.normal, element.face_signs[i]);
                // The signed global normal must match the outward normal.
                assert!(norm(sub(signed, geo.normals[i])) < 1e-12);
            }
        }
    }

    #[test]
    fn opposite_internal_signs_cancel() {
        let mesh = build_cube_mesh(2).unwrap();
        for (fid, face) in mesh.faces.iter().enumerate() {
            if let [Some(e0), Some(e1)] = face.elements {
                let i0 = mesh.local_face_index(e0, fid);
                let i1 = mesh.local_face_index(e1, fid);
                let s0 = mesh.elements[e0].face_signs[i0];
                let s1 = mesh.elements[e1].face_signs[i1];
                assert_eq!(s0 * s1, -1.0);
            }
        }
    }
}

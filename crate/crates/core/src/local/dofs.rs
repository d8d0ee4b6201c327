//! Degree-of-freedom counts and numbering.
//!
//! Global order: vertex values, then `k-1` moments per edge, `k(k-1)/2` per
//! face and `(k+1)k(k-1)/6` per cell. Within a cell the local order is the
//! sorted cell vertices, the sorted cell edges, the cell faces in their listed
//! order, then the interior moments. Within a face it is the loop vertices,
//! the loop edges, then the face moments.

use crate::geometry::monomial::basis_size_signed;
use crate::mesh::PolyMesh;

pub fn edge_dofs(k: usize) -> usize {
    k - 1
}

pub fn face_moment_dofs(k: usize) -> usize {
    basis_size_signed(2, k as isize - 2)
}

pub fn cell_moment_dofs(k: usize) -> usize {
    basis_size_signed(3, k as isize - 2)
}

pub fn face_dof_count(num_vertices: usize, k: usize) -> usize {
    num_vertices * (1 + edge_dofs(k)) + face_moment_dofs(k)
}

#[derive(Clone, Debug)]
pub struct DofMap {
    pub k: usize,
    vertex_offset: usize,
    edge_offset: usize,
    face_offset: usize,
    cell_offset: usize,
    total: usize,
}

impl DofMap {
    pub fn new(mesh: &PolyMesh, k: usize) -> Self {
        assert!(k >= 1);
        let edge_offset = mesh.num_vertices();
        let face_offset = edge_offset + mesh.num_edges() * edge_dofs(k);
        let cell_offset = face_offset + mesh.num_faces() * face_moment_dofs(k);
        let total = cell_offset + mesh.num_cells() * cell_moment_dofs(k);
        DofMap {
            k,
            vertex_offset: 0,
            edge_offset,
            face_offset,
            cell_offset,
            total,
        }
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn vertex(&self, v: usize) -> usize {
        self.vertex_offset + v
    }

    pub fn edge(&self, e: usize, j: usize) -> usize {
        self.edge_offset + e * edge_dofs(self.k) + j
    }

    pub fn face(&self, f: usize, j: usize) -> usize {
        self.face_offset + f * face_moment_dofs(self.k) + j
    }

    pub fn cell(&self, c: usize, j: usize) -> usize {
        self.cell_offset + c * cell_moment_dofs(self.k) + j
    }

    /// Global index of every cell-local DOF.
    pub fn cell_dofs(&self, mesh: &PolyMesh, c: usize) -> Vec<usize> {
        let cell = &mesh.cells()[c];
        let k = self.k;
        let mut out = Vec::with_capacity(local_count(mesh, c, k));
        out.extend(cell.vertices.iter().map(|&v| self.vertex(v)));
        for &e in &cell.edges {
            out.extend((0..edge_dofs(k)).map(|j| self.edge(e, j)));
        }
        for &f in &cell.faces {
            out.extend((0..face_moment_dofs(k)).map(|j| self.face(f, j)));
        }
        out.extend((0..cell_moment_dofs(k)).map(|j| self.cell(c, j)));
        out
    }

    /// Whether a global DOF belongs to a Dirichlet vertex, edge or face.
    pub fn dirichlet_mask(&self, mesh: &PolyMesh) -> Vec<bool> {
        let mut mask = vec![false; self.total];
        for v in 0..mesh.num_vertices() {
            mask[self.vertex(v)] = mesh.is_dirichlet_vertex(v);
        }
        for e in 0..mesh.num_edges() {
            for j in 0..edge_dofs(self.k) {
                mask[self.edge(e, j)] = mesh.is_dirichlet_edge(e);
            }
        }
        for f in 0..mesh.num_faces() {
            for j in 0..face_moment_dofs(self.k) {
                mask[self.face(f, j)] = mesh.is_dirichlet_face(f);
            }
        }
        mask
    }
}

pub fn local_count(mesh: &PolyMesh, c: usize, k: usize) -> usize {
    let cell = &mesh.cells()[c];
    cell.vertices.len()
        + cell.edges.len() * edge_dofs(k)
        + cell.faces.len() * face_moment_dofs(k)
        + cell_moment_dofs(k)
}

/// Cell-local position of each face-local DOF of every face of cell `c`.
pub fn face_to_cell_maps(mesh: &PolyMesh, c: usize, k: usize) -> Vec<Vec<usize>> {
    let cell = &mesh.cells()[c];
    let ne = edge_dofs(k);
    let nfm = face_moment_dofs(k);
    let edge_base = cell.vertices.len();
    let face_base = edge_base + cell.edges.len() * ne;
    cell.faces
        .iter()
        .enumerate()
        .map(|(fi, &f)| {
            let face = &mesh.faces()[f];
            let mut map = Vec::with_capacity(face_dof_count(face.vertices.len(), k));
            for v in &face.vertices {
                map.push(cell.vertices.binary_search(v).expect("face vertex in cell"));
            }
            for e in &face.edges {
                let pos = cell.edges.binary_search(e).expect("face edge in cell");
                map.extend((0..ne).map(|j| edge_base + pos * ne + j));
            }
            map.extend((0..nfm).map(|j| face_base + fi * nfm + j));
            map
        })
        .collect()
}

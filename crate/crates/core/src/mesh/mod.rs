//! Polyhedral mesh data model with full topological and geometric validation.

pub mod generators;
pub mod io;

pub use generators::{gen_cube_grid, gen_perturbed_grid, gen_slit_cube_grid, EpsRule, MeshFamily, MeshFamilyConfig};
pub use io::{load_mesh, parse_mesh, write_mesh};

use crate::error::{Result, VemError};
use crate::geometry::{
    polygon_quadrature, polyhedron_quadrature, GeomMetrics, OrientedFace, PolygonGeometry,
    PolyhedronGeometry, QuadRule,
};
use nalgebra::Vector3;
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    /// Endpoints with `vertices[0] < vertices[1]`; this fixes the edge
    /// orientation used by edge moments.
    pub vertices: [usize; 2],
}

#[derive(Clone, Debug)]
pub struct Face {
    /// Vertex loop, counter-clockwise about the stored normal.
    pub vertices: Vec<usize>,
    /// `edges[i]` joins `vertices[i]` and `vertices[i + 1]`.
    pub edges: Vec<usize>,
    pub geometry: PolygonGeometry,
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub faces: Vec<usize>,
    /// +1 when the stored face normal points out of the cell.
    pub signs: Vec<f64>,
    /// Sorted vertex indices of the cell.
    pub vertices: Vec<usize>,
    /// Sorted edge indices of the cell.
    pub edges: Vec<usize>,
    pub geometry: PolyhedronGeometry,
}

#[derive(Clone, Debug)]
pub struct PolyMesh {
    vertices: Vec<Vector3<f64>>,
    edges: Vec<Edge>,
    faces: Vec<Face>,
    cells: Vec<Cell>,
    face_cells: Vec<Vec<usize>>,
    boundary_face: Vec<bool>,
    boundary_edge: Vec<bool>,
    boundary_vertex: Vec<bool>,
    /// Boundary faces carrying a natural (flux) condition.
    neumann_face: Vec<bool>,
    /// Entities on at least one Dirichlet boundary face.
    dirichlet_edge: Vec<bool>,
    dirichlet_vertex: Vec<bool>,
}

/// Entity counts and shape extremes of a mesh.
#[derive(Clone, Debug)]
pub struct MeshStats {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub cells: usize,
    pub boundary_faces: usize,
    pub neumann_faces: usize,
    pub max_faces_per_cell: usize,
    pub h_max: f64,
    pub min_rho_face: f64,
    pub min_rho_cell: f64,
    pub volume: f64,
}

impl PolyMesh {
    /// Build and validate a mesh. `cells[c]` lists `(face, outward)` pairs;
    /// when `boundary` is given it must equal the set of faces that belong to
    /// exactly one cell.
    pub fn new(
        vertices: Vec<Vector3<f64>>,
        face_loops: Vec<Vec<usize>>,
        cells: Vec<Vec<(usize, bool)>>,
        boundary: Option<Vec<usize>>,
    ) -> Result<Self> {
        let nv = vertices.len();
        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut faces = Vec::with_capacity(face_loops.len());
        for (fi, lp) in face_loops.into_iter().enumerate() {
            if let Some(&bad) = lp.iter().find(|&&v| v >= nv) {
                return Err(VemError::validation(
                    format!("face {fi}"),
                    format!("vertex index {bad} out of range"),
                ));
            }
            let pts: Vec<Vector3<f64>> = lp.iter().map(|&v| vertices[v]).collect();
            let geometry = PolygonGeometry::new(pts).map_err(|e| {
                VemError::validation(format!("face {fi}"), e.to_string())
            })?;
            let n = lp.len();
            let mut fe = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = (lp[i], lp[(i + 1) % n]);
                if a == b {
                    return Err(VemError::validation(format!("face {fi}"), "repeated vertex in loop"));
                }
                let key = [a.min(b), a.max(b)];
                let id = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(Edge { vertices: key });
                    edges.len() - 1
                });
                fe.push(id);
            }
            faces.push(Face {
                vertices: lp,
                edges: fe,
                geometry,
            });
        }

        let mut face_cells: Vec<Vec<usize>> = vec![Vec::new(); faces.len()];
        let mut face_uses: Vec<Vec<bool>> = vec![Vec::new(); faces.len()];
        let mut built_cells = Vec::with_capacity(cells.len());
        for (ci, cf) in cells.into_iter().enumerate() {
            let entity = format!("cell {ci}");
            if let Some(&(bad, _)) = cf.iter().find(|(f, _)| *f >= faces.len()) {
                return Err(VemError::validation(entity, format!("face index {bad} out of range")));
            }
            let mut seen = std::collections::HashSet::new();
            for &(f, _) in &cf {
                if !seen.insert(f) {
                    return Err(VemError::validation(entity, format!("face {f} listed twice")));
                }
            }
            // each cell edge must be shared by exactly two of the cell's faces
            let mut edge_count: HashMap<usize, usize> = HashMap::new();
            for &(f, _) in &cf {
                for &e in &faces[f].edges {
                    *edge_count.entry(e).or_default() += 1;
                }
            }
            if let Some((e, c)) = edge_count.iter().find(|(_, &c)| c != 2) {
                return Err(VemError::validation(
                    entity,
                    format!("edge {e} is shared by {c} faces of the cell (expected 2)"),
                ));
            }
            let mut cv: Vec<usize> = cf
                .iter()
                .flat_map(|&(f, _)| faces[f].vertices.iter().copied())
                .collect();
            cv.sort_unstable();
            cv.dedup();
            let mut ce: Vec<usize> = edge_count.keys().copied().collect();
            ce.sort_unstable();
            let signs: Vec<f64> = cf.iter().map(|&(_, o)| if o { 1.0 } else { -1.0 }).collect();
            let oriented: Vec<OrientedFace> = cf
                .iter()
                .zip(&signs)
                .map(|(&(f, _), &s)| OrientedFace {
                    face: &faces[f].geometry,
                    sign: s,
                })
                .collect();
            let pts: Vec<Vector3<f64>> = cv.iter().map(|&v| vertices[v]).collect();
            let geometry = PolyhedronGeometry::new(&oriented, &pts)
                .map_err(|e| VemError::validation(entity.clone(), e.to_string()))?;
            for &(f, o) in &cf {
                face_cells[f].push(ci);
                face_uses[f].push(o);
            }
            built_cells.push(Cell {
                faces: cf.iter().map(|&(f, _)| f).collect(),
                signs,
                vertices: cv,
                edges: ce,
                geometry,
            });
        }

        let mut boundary_face = vec![false; faces.len()];
        for (f, cs) in face_cells.iter().enumerate() {
            match cs.len() {
                1 => boundary_face[f] = true,
                2 => {
                    if face_uses[f][0] == face_uses[f][1] {
                        return Err(VemError::validation(
                            format!("face {f}"),
                            format!(
                                "cells {} and {} use the face with the same orientation",
                                cs[0], cs[1]
                            ),
                        ));
                    }
                }
                n => {
                    return Err(VemError::validation(
                        format!("face {f}"),
                        format!("belongs to {n} cells"),
                    ))
                }
            }
        }
        if let Some(list) = boundary {
            let mut given = vec![false; faces.len()];
            for f in list {
                if f >= faces.len() {
                    return Err(VemError::validation("boundary", format!("face index {f} out of range")));
                }
                given[f] = true;
            }
            if let Some(f) = (0..faces.len()).find(|&f| given[f] != boundary_face[f]) {
                return Err(VemError::validation(
                    format!("face {f}"),
                    format!(
                        "boundary flag {} disagrees with cell incidence ({} cells)",
                        given[f],
                        face_cells[f].len()
                    ),
                ));
            }
        }
        let mut boundary_edge = vec![false; edges.len()];
        let mut boundary_vertex = vec![false; nv];
        for (f, face) in faces.iter().enumerate() {
            if boundary_face[f] {
                face.edges.iter().for_each(|&e| boundary_edge[e] = true);
                face.vertices.iter().for_each(|&v| boundary_vertex[v] = true);
            }
        }
        let used: Vec<bool> = {
            let mut u = vec![false; nv];
            built_cells
                .iter()
                .flat_map(|c| c.vertices.iter())
                .for_each(|&v| u[v] = true);
            u
        };
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(VemError::validation(format!("vertex {v}"), "not used by any cell"));
        }

        let nf = faces.len();
        let mut mesh = PolyMesh {
            vertices,
            edges,
            faces,
            cells: built_cells,
            face_cells,
            boundary_face,
            boundary_edge: boundary_edge.clone(),
            boundary_vertex: boundary_vertex.clone(),
            neumann_face: vec![false; nf],
            dirichlet_edge: boundary_edge,
            dirichlet_vertex: boundary_vertex,
        };
        mesh.refresh_dirichlet();
        Ok(mesh)
    }

    /// Marks the listed boundary faces as Neumann faces; all other boundary
    /// faces stay Dirichlet.
    pub fn with_neumann(mut self, faces: &[usize]) -> Result<Self> {
        self.neumann_face.iter_mut().for_each(|n| *n = false);
        for &f in faces {
            if f >= self.faces.len() {
                return Err(VemError::validation("neumann", format!("face index {f} out of range")));
            }
            if !self.boundary_face[f] {
                return Err(VemError::validation(format!("face {f}"), "Neumann face is not a boundary face"));
            }
            self.neumann_face[f] = true;
        }
        if !self.boundary_face.iter().zip(&self.neumann_face).any(|(b, n)| *b && !*n) {
            return Err(VemError::validation("neumann", "no Dirichlet boundary face left"));
        }
        self.refresh_dirichlet();
        Ok(self)
    }

    fn refresh_dirichlet(&mut self) {
        self.dirichlet_edge.iter_mut().for_each(|d| *d = false);
        self.dirichlet_vertex.iter_mut().for_each(|d| *d = false);
        for (f, face) in self.faces.iter().enumerate() {
            if self.boundary_face[f] && !self.neumann_face[f] {
                face.edges.iter().for_each(|&e| self.dirichlet_edge[e] = true);
                face.vertices.iter().for_each(|&v| self.dirichlet_vertex[v] = true);
            }
        }
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn face_cells(&self, f: usize) -> &[usize] {
        &self.face_cells[f]
    }

    pub fn is_boundary_face(&self, f: usize) -> bool {
        self.boundary_face[f]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edge[e]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn boundary_faces(&self) -> Vec<usize> {
        (0..self.faces.len()).filter(|&f| self.boundary_face[f]).collect()
    }

    pub fn is_neumann_face(&self, f: usize) -> bool {
        self.neumann_face[f]
    }

    pub fn neumann_faces(&self) -> Vec<usize> {
        (0..self.faces.len()).filter(|&f| self.neumann_face[f]).collect()
    }

    pub fn is_dirichlet_face(&self, f: usize) -> bool {
        self.boundary_face[f] && !self.neumann_face[f]
    }

    pub fn is_dirichlet_edge(&self, e: usize) -> bool {
        self.dirichlet_edge[e]
    }

    pub fn is_dirichlet_vertex(&self, v: usize) -> bool {
        self.dirichlet_vertex[v]
    }

    pub fn edge_points(&self, e: usize) -> (Vector3<f64>, Vector3<f64>) {
        let [a, b] = self.edges[e].vertices;
        (self.vertices[a], self.vertices[b])
    }

    pub fn oriented_faces(&self, c: usize) -> Vec<OrientedFace<'_>> {
        let cell = &self.cells[c];
        cell.faces
            .iter()
            .zip(&cell.signs)
            .map(|(&f, &s)| OrientedFace {
                face: &self.faces[f].geometry,
                sign: s,
            })
            .collect()
    }

    pub fn cell_metrics(&self, c: usize) -> GeomMetrics {
        GeomMetrics::from(&self.cells[c].geometry)
    }

    pub fn face_metrics(&self, f: usize) -> GeomMetrics {
        GeomMetrics::from(&self.faces[f].geometry)
    }

    pub fn cell_quadrature(&self, c: usize, order: usize) -> Result<QuadRule> {
        let g = &self.cells[c].geometry;
        polyhedron_quadrature(&self.oriented_faces(c), &g.centroid, g.diameter, order)
            .map_err(|e| e.in_cell(c))
    }

    pub fn face_quadrature(&self, f: usize, order: usize) -> Result<QuadRule> {
        polygon_quadrature(&self.faces[f].geometry, order)
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.geometry.volume).sum()
    }

    pub fn h_max(&self) -> f64 {
        self.cells.iter().map(|c| c.geometry.diameter).fold(0.0, f64::max)
    }

    pub fn stats(&self) -> MeshStats {
        MeshStats {
            vertices: self.num_vertices(),
            edges: self.num_edges(),
            faces: self.num_faces(),
            cells: self.num_cells(),
            boundary_faces: self.boundary_face.iter().filter(|b| **b).count(),
            neumann_faces: self.neumann_face.iter().filter(|b| **b).count(),
            max_faces_per_cell: self.cells.iter().map(|c| c.faces.len()).max().unwrap_or(0),
            h_max: self.h_max(),
            min_rho_face: self
                .faces
                .iter()
                .map(|f| f.geometry.chunkiness.rho)
                .fold(f64::INFINITY, f64::min),
            min_rho_cell: self
                .cells
                .iter()
                .map(|c| c.geometry.chunkiness.rho)
                .fold(f64::INFINITY, f64::min),
            volume: self.total_volume(),
        }
    }
}

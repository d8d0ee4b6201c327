//! Structured mesh families on the unit cube: uniform hexahedra, slit
//! hexahedra and randomly perturbed hexahedra.

use super::PolyMesh;
use crate::error::{Result, VemError};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_ATTEMPTS: u64 = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeshFamily {
    Cube,
    Slit,
    Perturbed,
}

impl std::str::FromStr for MeshFamily {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cube" => Ok(MeshFamily::Cube),
            "slit" => Ok(MeshFamily::Slit),
            "perturbed" => Ok(MeshFamily::Perturbed),
            _ => Err(VemError::Parameter(format!(
                "unknown mesh family '{s}' (expected cube, slit or perturbed)"
            ))),
        }
    }
}

impl std::fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MeshFamily::Cube => "cube",
            MeshFamily::Slit => "slit",
            MeshFamily::Perturbed => "perturbed",
        })
    }
}

/// Slit aperture as a function of the grid spacing `h = 1/n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsRule {
    Fixed(f64),
    /// `ε = scale · h`
    Linear(f64),
    /// `ε = scale · h²`
    Quadratic(f64),
}

impl EpsRule {
    pub fn eps(&self, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        match *self {
            EpsRule::Fixed(e) => e,
            EpsRule::Linear(s) => s * h,
            EpsRule::Quadratic(s) => s * h * h,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MeshFamilyConfig {
    pub family: MeshFamily,
    pub levels: Vec<usize>,
    pub eps_rule: EpsRule,
    pub magnitude: f64,
    pub seed: u64,
}

impl MeshFamilyConfig {
    pub fn new(family: MeshFamily, levels: Vec<usize>) -> Self {
        MeshFamilyConfig {
            family,
            levels,
            eps_rule: EpsRule::Linear(0.5),
            magnitude: 0.1,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(VemError::Parameter("at least one refinement level is required".into()));
        }
        if self.levels[0] == 0 {
            return Err(VemError::Parameter("refinement levels must be positive".into()));
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(VemError::Parameter(format!(
                "refinement levels must be strictly increasing, got {:?}",
                self.levels
            )));
        }
        if self.family == MeshFamily::Slit {
            for &n in &self.levels {
                let e = self.eps_rule.eps(n);
                if !(e > 0.0 && e < 0.5) {
                    return Err(VemError::Parameter(format!(
                        "slit aperture {e} at level n={n} is outside (0, 1/2)"
                    )));
                }
            }
        }
        if self.family == MeshFamily::Perturbed && !(0.0..0.3).contains(&self.magnitude) {
            return Err(VemError::Parameter(format!(
                "perturbation magnitude {} is outside [0, 0.3)",
                self.magnitude
            )));
        }
        Ok(())
    }

    pub fn build(&self, n: usize) -> Result<PolyMesh> {
        match self.family {
            MeshFamily::Cube => gen_cube_grid(n),
            MeshFamily::Slit => gen_slit_cube_grid(n, self.eps_rule.eps(n)),
            MeshFamily::Perturbed => gen_perturbed_grid(n, self.magnitude, self.seed),
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(VemError::Parameter("grid resolution n must be at least 1".into()));
    }
    Ok(())
}

type CellFaces = Vec<Vec<(usize, bool)>>;

/// Hexahedral topology of the n³ grid: face loops oriented along +x, +y, +z
/// and cells as `(face, outward)` lists.
fn hex_topology(n: usize) -> (Vec<Vec<usize>>, CellFaces) {
    let m = n + 1;
    let vid = |i: usize, j: usize, k: usize| i + m * (j + m * k);
    let mut faces = Vec::with_capacity(3 * m * n * n);
    let xf = |i: usize, j: usize, k: usize| i + m * (j + n * k);
    for k in 0..n {
        for j in 0..n {
            for i in 0..m {
                faces.push(vec![vid(i, j, k), vid(i, j + 1, k), vid(i, j + 1, k + 1), vid(i, j, k + 1)]);
            }
        }
    }
    let yoff = faces.len();
    let yf = |i: usize, j: usize, k: usize| yoff + i + n * (j + m * k);
    for k in 0..n {
        for j in 0..m {
            for i in 0..n {
                faces.push(vec![vid(i, j, k), vid(i, j, k + 1), vid(i + 1, j, k + 1), vid(i + 1, j, k)]);
            }
        }
    }
    let zoff = faces.len();
    let zf = |i: usize, j: usize, k: usize| zoff + i + n * (j + n * k);
    for k in 0..m {
        for j in 0..n {
            for i in 0..n {
                faces.push(vec![vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k), vid(i, j + 1, k)]);
            }
        }
    }
    let mut cells = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                cells.push(vec![
                    (xf(i, j, k), false),
                    (xf(i + 1, j, k), true),
                    (yf(i, j, k), false),
                    (yf(i, j + 1, k), true),
                    (zf(i, j, k), false),
                    (zf(i, j, k + 1), true),
                ]);
            }
        }
    }
    (faces, cells)
}

fn lattice(n: usize) -> Vec<Vector3<f64>> {
    let m = n + 1;
    let t = |i: usize| i as f64 / n as f64;
    let mut v = Vec::with_capacity(m * m * m);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                v.push(Vector3::new(t(i), t(j), t(k)));
            }
        }
    }
    v
}

/// n³ axis-aligned cubes of side `1/n` tiling the unit cube.
pub fn gen_cube_grid(n: usize) -> Result<PolyMesh> {
    check_n(n)?;
    let (faces, cells) = hex_topology(n);
    PolyMesh::new(lattice(n), faces, cells, None)
}

/// Planar section in the (x, z) plane extruded along y into `n` layers.
/// Polygons are counter-clockwise in (x, z).
fn extrude_y(points: &[[f64; 2]], polygons: &[Vec<usize>], n: usize) -> Result<PolyMesh> {
    let np = points.len();
    let vid = |p: usize, j: usize| j * np + p;
    let mut vertices = Vec::with_capacity(np * (n + 1));
    for j in 0..=n {
        let y = j as f64 / n as f64;
        vertices.extend(points.iter().map(|p| Vector3::new(p[0], y, p[1])));
    }

    // section edges, keyed by sorted endpoints
    let mut edge_id = std::collections::HashMap::new();
    let mut sec_edges: Vec<[usize; 2]> = Vec::new();
    let mut poly_edges: Vec<Vec<(usize, [usize; 2])>> = Vec::with_capacity(polygons.len());
    for poly in polygons {
        let mut pe = Vec::with_capacity(poly.len());
        for i in 0..poly.len() {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            let key = [a.min(b), a.max(b)];
            let id = *edge_id.entry(key).or_insert_with(|| {
                sec_edges.push(key);
                sec_edges.len() - 1
            });
            pe.push((id, [a, b]));
        }
        poly_edges.push(pe);
    }

    let nsec = polygons.len();
    let mut faces: Vec<Vec<usize>> = Vec::new();
    // cap faces: a counter-clockwise (x, z) loop has normal -y
    for j in 0..=n {
        for poly in polygons {
            faces.push(poly.iter().map(|&p| vid(p, j)).collect());
        }
    }
    let side0 = faces.len();
    for j in 0..n {
        for &[a, b] in &sec_edges {
            faces.push(vec![vid(a, j), vid(b, j), vid(b, j + 1), vid(a, j + 1)]);
        }
    }
    let mut cells = Vec::with_capacity(nsec * n);
    for j in 0..n {
        for (c, pe) in poly_edges.iter().enumerate() {
            let mut cf = vec![(j * nsec + c, true), ((j + 1) * nsec + c, false)];
            for &(e, [a, _]) in pe {
                // the stored loop a→b→(b,+y) has normal (-dz, 0, dx), which
                // points into a counter-clockwise polygon walking a→b
                let forward = sec_edges[e][0] == a;
                cf.push((side0 + j * sec_edges.len() + e, !forward));
            }
            cells.push(cf);
        }
    }
    PolyMesh::new(vertices, faces, cells, None)
}

/// Every cell of the n³ grid loses the prism `[0, εh] × [0, h] × [h − εh, h]`
/// (cell-local coordinates, `h = 1/n`) along its edge at minimal x and
/// maximal z. Faces of neighbouring cells are split at the slit corners so the
/// mesh stays conforming. The slits are left open: their walls are Neumann
/// boundary faces, the faces on the unit cube surface are Dirichlet.
pub fn gen_slit_cube_grid(n: usize, eps: f64) -> Result<PolyMesh> {
    check_n(n)?;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(VemError::Parameter(format!("slit aperture {eps} is outside (0, 1/2)")));
    }
    let h = 1.0 / n as f64;
    let m = n + 1;
    let g = |i: usize, k: usize| k * m + i;
    let mut points: Vec<[f64; 2]> = Vec::new();
    for k in 0..m {
        for i in 0..m {
            points.push([i as f64 / n as f64, k as f64 / n as f64]);
        }
    }
    // slit corners A (top), B (inner), C (left) of cell (i, k)
    let base = points.len();
    let corner = |i: usize, k: usize, c: usize| base + 3 * (k * n + i) + c;
    for k in 0..n {
        for i in 0..n {
            let (x, z) = (i as f64 / n as f64, (k + 1) as f64 / n as f64);
            let a = eps * h;
            points.push([x + a, z]);
            points.push([x + a, z - a]);
            points.push([x, z - a]);
        }
    }
    let mut polygons = Vec::with_capacity(n * n);
    for k in 0..n {
        for i in 0..n {
            let mut p = vec![g(i, k)];
            if k > 0 {
                p.push(corner(i, k - 1, 0));
            }
            p.push(g(i + 1, k));
            if i + 1 < n {
                p.push(corner(i + 1, k, 2));
            }
            p.push(g(i + 1, k + 1));
            p.extend([corner(i, k, 0), corner(i, k, 1), corner(i, k, 2)]);
            polygons.push(p);
        }
    }
    // drop points no polygon uses (the domain corner at x = 0, z = 1)
    let mut used = vec![false; points.len()];
    polygons.iter().flatten().for_each(|&p| used[p] = true);
    let mut remap = vec![usize::MAX; points.len()];
    let mut kept = Vec::with_capacity(points.len());
    for (p, pt) in points.iter().enumerate() {
        if used[p] {
            remap[p] = kept.len();
            kept.push(*pt);
        }
    }
    for poly in polygons.iter_mut() {
        poly.iter_mut().for_each(|p| *p = remap[*p]);
    }
    let mesh = extrude_y(&kept, &polygons, n)?;
    let walls: Vec<usize> = mesh
        .boundary_faces()
        .into_iter()
        .filter(|&f| !on_unit_cube_surface(&mesh, f))
        .collect();
    mesh.with_neumann(&walls)
}

fn on_unit_cube_surface(mesh: &PolyMesh, f: usize) -> bool {
    let vs = &mesh.faces()[f].vertices;
    (0..3).any(|d| {
        [0.0, 1.0]
            .iter()
            .any(|&c| vs.iter().all(|&v| mesh.vertices()[v][d] == c))
    })
}

/// Cube grid with interior vertices displaced by `magnitude · h · U[-1, 1]³`
/// and boundary vertices displaced tangentially only. Quadrilaterals that
/// become non-planar are split into two triangles along their first diagonal.
pub fn gen_perturbed_grid(n: usize, magnitude: f64, seed: u64) -> Result<PolyMesh> {
    check_n(n)?;
    if !(0.0..0.3).contains(&magnitude) {
        return Err(VemError::Parameter(format!(
            "perturbation magnitude {magnitude} is outside [0, 0.3)"
        )));
    }
    if magnitude == 0.0 {
        return gen_cube_grid(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last_err = None;
    for attempt in 0..MAX_ATTEMPTS {
        rng.set_stream(attempt);
        match perturbed_attempt(n, magnitude, &mut rng) {
            Ok(m) => return Ok(m),
            Err(e) => last_err = Some(e),
        }
    }
    Err(VemError::InvalidGeometry {
        entity: "perturbed grid".into(),
        reason: format!(
            "no untangled mesh after {MAX_ATTEMPTS} attempts: {}",
            last_err.map(|e| e.to_string()).unwrap_or_default()
        ),
    })
}

fn perturbed_attempt(n: usize, magnitude: f64, rng: &mut ChaCha8Rng) -> Result<PolyMesh> {
    let h = 1.0 / n as f64;
    let mut verts = lattice(n);
    for v in verts.iter_mut() {
        let mut d = Vector3::zeros();
        for c in 0..3 {
            let r: f64 = rng.gen_range(-1.0..=1.0);
            let on_wall = v[c] == 0.0 || v[c] == 1.0;
            if !on_wall {
                d[c] = magnitude * h * r;
            }
        }
        *v += d;
    }
    let (quads, hex_cells) = hex_topology(n);
    let mut faces = Vec::with_capacity(quads.len());
    let mut split: Vec<Vec<usize>> = Vec::with_capacity(quads.len());
    for q in &quads {
        let p: Vec<Vector3<f64>> = q.iter().map(|&i| verts[i]).collect();
        let normal = (p[2] - p[0]).cross(&(p[3] - p[1]));
        let off = normal.normalize().dot(&(p[1] - p[0])).abs();
        if off <= crate::geometry::polygon::PLANARITY_TOL * h {
            split.push(vec![faces.len()]);
            faces.push(q.clone());
        } else {
            split.push(vec![faces.len(), faces.len() + 1]);
            faces.push(vec![q[0], q[1], q[2]]);
            faces.push(vec![q[0], q[2], q[3]]);
        }
    }
    let cells: Vec<Vec<(usize, bool)>> = hex_cells
        .iter()
        .map(|c| {
            c.iter()
                .flat_map(|&(f, o)| split[f].iter().map(move |&s| (s, o)))
                .collect()
        })
        .collect();
    let mesh = PolyMesh::new(verts, faces, cells, None)?;
    for c in 0..mesh.num_cells() {
        if !mesh.cells()[c].geometry.chunkiness.star_shaped {
            return Err(VemError::geometry(format!("cell {c}"), "not star-shaped"));
        }
        mesh.cell_quadrature(c, 0)?;
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_grid_counts() {
        let m = gen_cube_grid(2).unwrap();
        assert_eq!(m.num_cells(), 8);
        assert_eq!(m.num_faces(), 36);
        assert_eq!((0..36).filter(|&f| !m.is_boundary_face(f)).count(), 12);
        assert_eq!(m.num_vertices(), 27);
        assert_eq!(m.num_edges(), 54);
        let m4 = gen_cube_grid(4).unwrap();
        assert!((m4.h_max() - 3f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((m4.total_volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_slit_cell() {
        let m = gen_slit_cube_grid(1, 0.1).unwrap();
        let s = m.stats();
        assert_eq!(s.cells, 1);
        let strip = 0.05 / (1.0f64 + 0.01).sqrt();
        assert!((s.min_rho_face - strip).abs() < 1e-12, "{}", s.min_rho_face);
        assert!((s.min_rho_face - 0.0498).abs() < 1e-4);
        assert!(s.min_rho_cell > 0.25, "{}", s.min_rho_cell);
        assert!((s.volume - 0.99).abs() < 1e-14);
    }

    #[test]
    fn slit_grid_is_valid_and_measured() {
        for (n, eps) in [(2, 0.05), (3, 0.2), (4, 0.1)] {
            let m = gen_slit_cube_grid(n, eps).unwrap();
            assert_eq!(m.num_cells(), n * n * n);
            let removed = eps * eps;
            assert!((m.total_volume() - (1.0 - removed)).abs() < 1e-10 * (1.0 - removed));
        }
    }

    #[test]
    fn slit_walls_are_neumann() {
        let n = 2;
        let m = gen_slit_cube_grid(n, 0.1).unwrap();
        // own two walls per cell plus the split strips of the left and upper neighbours
        assert_eq!(m.neumann_faces().len(), n * (2 * n * n + 2 * n * (n - 1)));
        for f in m.neumann_faces() {
            assert!(m.faces()[f].geometry.chunkiness.rho < 0.06);
        }
        let free = (0..m.num_vertices()).filter(|&v| !m.is_dirichlet_vertex(v)).count();
        assert!(free > 0);
        assert!(m.is_dirichlet_vertex(0));
        let cube = gen_cube_grid(2).unwrap();
        assert!(cube.neumann_faces().is_empty());
        assert_eq!(
            (0..27).filter(|&v| cube.is_dirichlet_vertex(v)).count(),
            (0..27).filter(|&v| cube.is_boundary_vertex(v)).count()
        );
    }

    #[test]
    fn slit_chunkiness_limits() {
        let mut prev = f64::INFINITY;
        for eps in [0.1, 0.01, 0.001] {
            let s = gen_slit_cube_grid(1, eps).unwrap().stats();
            assert!(s.min_rho_face < prev);
            assert!(s.min_rho_cell > 0.25);
            prev = s.min_rho_face;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn slit_aperture_out_of_range() {
        assert!(gen_slit_cube_grid(2, 0.5).is_err());
        assert!(gen_slit_cube_grid(2, 0.0).is_err());
        assert!(gen_cube_grid(0).is_err());
    }

    #[test]
    fn zero_perturbation_is_the_cube_grid() {
        let a = gen_perturbed_grid(3, 0.0, 11).unwrap();
        let b = gen_cube_grid(3).unwrap();
        assert_eq!(super::super::write_mesh(&a), super::super::write_mesh(&b));
    }

    #[test]
    fn perturbed_is_deterministic_and_valid() {
        let a = gen_perturbed_grid(2, 0.1, 7).unwrap();
        let b = gen_perturbed_grid(2, 0.1, 7).unwrap();
        assert_eq!(super::super::write_mesh(&a), super::super::write_mesh(&b));
        assert!(a.cells().iter().all(|c| c.geometry.chunkiness.rho > 0.0));
        assert!((a.total_volume() - 1.0).abs() < 1e-10);
        let c = gen_perturbed_grid(2, 0.1, 8).unwrap();
        assert_ne!(a.vertices(), c.vertices());
        // boundary vertices stay on the walls
        for (v, p) in a.vertices().iter().enumerate() {
            if a.is_boundary_vertex(v) {
                assert!((0..3).any(|c| p[c] == 0.0 || p[c] == 1.0));
            }
        }
    }

    #[test]
    fn family_config_validation() {
        let mut cfg = MeshFamilyConfig::new(MeshFamily::Slit, vec![2, 4, 8]);
        assert!(cfg.validate().is_ok());
        cfg.levels = vec![4, 2];
        assert!(cfg.validate().is_err());
        cfg.levels = vec![1, 2];
        cfg.eps_rule = EpsRule::Linear(1.0);
        assert!(cfg.validate().is_err());
        cfg.eps_rule = EpsRule::Quadratic(1.0);
        cfg.levels = vec![2, 4];
        assert!(cfg.validate().is_ok());
    }
}

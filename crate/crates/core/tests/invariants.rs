use nalgebra::{Rotation3, Vector3};
use proptest::prelude::*;
use vem::assembly::{assemble, interpolate, AssemblyConfig};
use vem::mesh::{gen_perturbed_grid, gen_slit_cube_grid, write_mesh, Cell, PolyMesh};

fn moved(m: &PolyMesh, rot: &Rotation3<f64>, s: f64, t: Vector3<f64>) -> PolyMesh {
    let verts = m.vertices().iter().map(|p| rot * p * s + t).collect();
    let loops = m.faces().iter().map(|f| f.vertices.clone()).collect();
    let cells = m
        .cells()
        .iter()
        .map(|c| c.faces.iter().zip(&c.signs).map(|(&f, &sg)| (f, sg > 0.0)).collect())
        .collect();
    PolyMesh::new(verts, loops, cells, None).unwrap()
}

/// `Σ_F ∫_F n dA` over the boundary of a cell.
fn net_flux(m: &PolyMesh, cell: &Cell) -> Vector3<f64> {
    cell.faces
        .iter()
        .zip(&cell.signs)
        .map(|(&f, &sg)| {
            let g = &m.faces()[f].geometry;
            g.frame.normal * (sg * g.area)
        })
        .sum()
}

fn axis() -> impl Strategy<Value = Vector3<f64>> {
    (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b, c)| Vector3::new(a, b, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chunkiness_is_similarity_invariant(
        seed in 0u64..1000,
        mag in 0.0f64..0.25,
        rot in axis(),
        s in 0.1f64..10.0,
        t in axis(),
    ) {
        let m = gen_perturbed_grid(1, mag, seed).unwrap();
        let r = Rotation3::from_scaled_axis(rot);
        let n = moved(&m, &r, s, t);
        for c in 0..m.num_cells() {
            let (a, b) = (m.cell_metrics(c).rho(), n.cell_metrics(c).rho());
            prop_assert!((a - b).abs() <= 1e-10 * a, "cell {c}: {a} vs {b}");
        }
        for f in 0..m.num_faces() {
            let (a, b) = (m.face_metrics(f).rho(), n.face_metrics(f).rho());
            prop_assert!((a - b).abs() <= 1e-10 * a, "face {f}: {a} vs {b}");
        }
    }

    #[test]
    fn closed_cells_and_exact_volume(seed in 0u64..1000, mag in 0.0f64..0.29, n in 1usize..4) {
        let m = gen_perturbed_grid(n, mag, seed).unwrap();
        prop_assert!((m.total_volume() - 1.0).abs() <= 1e-10);
        for (c, cell) in m.cells().iter().enumerate() {
            let flux = net_flux(&m, cell);
            prop_assert!(flux.norm() <= 1e-12 * cell.geometry.surface_area, "cell {c}: {flux}");
        }
    }

    #[test]
    fn slit_volume_and_closed_cells(n in 1usize..4, eps in 0.001f64..0.49) {
        let m = gen_slit_cube_grid(n, eps).unwrap();
        let expected = 1.0 - eps * eps;
        prop_assert!((m.total_volume() - expected).abs() <= 1e-10 * expected);
        for cell in m.cells() {
            prop_assert!(net_flux(&m, cell).norm() <= 1e-12 * cell.geometry.surface_area);
        }
    }

    #[test]
    fn generators_are_deterministic(seed in 0u64..1000, mag in 0.0f64..0.29) {
        let a = write_mesh(&gen_perturbed_grid(2, mag, seed).unwrap());
        let b = write_mesh(&gen_perturbed_grid(2, mag, seed).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn assembled_matrix_is_symmetric_and_kills_constants(seed in 0u64..1000, mag in 0.0f64..0.29, k in 1usize..3) {
        let m = gen_perturbed_grid(2, mag, seed).unwrap();
        let sys = assemble(&m, &AssemblyConfig::new(k), |_| 0.0).unwrap();
        let a = &sys.matrix;
        prop_assert_eq!(a.max_asymmetry(), 0.0);
        let one = interpolate(&m, &sys.dofs, |_| 1.0, 2, false).unwrap();
        let r = a.mul_vec(&one);
        let worst = r.iter().fold(0.0f64, |x, v| x.max(v.abs()));
        prop_assert!(worst <= 1e-12 * a.max_abs(), "{worst:e}");
    }
}

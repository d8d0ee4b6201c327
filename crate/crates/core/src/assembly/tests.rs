use super::*;
use crate::local::StabilizationVariant;
use crate::mesh::{gen_cube_grid, gen_perturbed_grid, gen_slit_cube_grid};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn zero(_: &Vector3<f64>) -> f64 {
    0.0
}

#[test]
fn single_cube_rows_sum_to_zero() {
    let m = gen_cube_grid(1).unwrap();
    let s = assemble(&m, &AssemblyConfig::new(1), zero).unwrap();
    assert_eq!(s.len(), 8);
    for i in 0..8 {
        let sum: f64 = s.matrix.row(i).map(|(_, v)| v).sum();
        assert!(sum.abs() < 1e-14);
    }
    assert_eq!(s.matrix.max_asymmetry(), 0.0);
}

#[test]
fn interior_vertex_couples_to_all_neighbours() {
    let m = gen_cube_grid(2).unwrap();
    let s = assemble(&m, &AssemblyConfig::new(1), zero).unwrap();
    assert_eq!(s.len(), 27);
    let center = (0..27).find(|&v| !m.is_boundary_vertex(v)).unwrap();
    assert_eq!(s.matrix.row(center).filter(|(_, v)| *v != 0.0).count(), 27);
    let ones = vec![1.0; 27];
    assert!(s.matrix.mul_vec(&ones).iter().all(|v| v.abs() < 1e-13));
}

#[test]
fn k2_dof_count() {
    for m in [gen_cube_grid(2).unwrap(), gen_slit_cube_grid(2, 0.1).unwrap()] {
        let s = assemble(&m, &AssemblyConfig::new(2), zero).unwrap();
        assert_eq!(s.len(), m.num_vertices() + m.num_edges() + m.num_faces() + m.num_cells());
    }
}

#[test]
fn dirichlet_data_interpolation() {
    let m = gen_cube_grid(1).unwrap();
    let d = DofMap::new(&m, 1);
    let g = interpolate(&m, &d, |x| x.x, 2, true).unwrap();
    for (v, p) in m.vertices().iter().enumerate() {
        assert_eq!(g[d.vertex(v)], p.x);
    }
    let d2 = DofMap::new(&m, 2);
    let g2 = interpolate(&m, &d2, |x| x.x * x.x, 4, true).unwrap();
    let e = (0..m.num_edges())
        .find(|&e| {
            let (a, b) = m.edge_points(e);
            a == Vector3::zeros() && b == Vector3::x()
        })
        .unwrap();
    assert!((g2[d2.edge(e, 0)] - 1.0 / 3.0).abs() < 1e-15);
    let d3 = DofMap::new(&m, 3);
    let g3 = interpolate(&m, &d3, |x| x.x * x.x, 4, true).unwrap();
    assert!((g3[d3.edge(e, 1)] - 1.0 / 12.0).abs() < 1e-15);
    // interior moment untouched with dirichlet_only
    assert_eq!(g2[d2.cell(0, 0)], 0.0);
}

#[test]
fn zero_data_zero_solution() {
    let m = gen_cube_grid(2).unwrap();
    let s = assemble(&m, &AssemblyConfig::new(2), zero).unwrap();
    let red = apply_dirichlet(&s, &vec![0.0; s.len()]);
    assert_eq!(red.rhs, s.free_dofs().iter().map(|&i| s.rhs[i]).collect::<Vec<_>>());
    let (x, st) = solve(&red, &SolverOptions::default()).unwrap();
    assert_eq!(st.iterations, 0);
    assert!(x.iter().all(|v| *v == 0.0));
}

#[test]
fn assembled_form_matches_cell_sum() {
    let m = gen_perturbed_grid(2, 0.1, 7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for k in 1..=2 {
        let s = assemble(&m, &AssemblyConfig::new(k), zero).unwrap();
        for _ in 0..20 {
            let u: Vec<f64> = (0..s.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..s.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let global = sparse::dot(&u, &s.matrix.mul_vec(&v));
            let local = s.local_energy(&u, &v);
            let scale = s.local_energy(&u, &u).abs().sqrt() * s.local_energy(&v, &v).abs().sqrt();
            assert!((global - local).abs() < 1e-12 * scale);
        }
    }
}

#[test]
fn kernel_is_constants() {
    let meshes = [
        gen_cube_grid(2).unwrap(),
        gen_slit_cube_grid(1, 0.1).unwrap(),
        gen_slit_cube_grid(2, 0.01).unwrap(),
    ];
    for m in &meshes {
        for k in 1..=2 {
            for v in [StabilizationVariant::New, StabilizationVariant::Original] {
                let mut cfg = AssemblyConfig::new(k);
                cfg.local.variant = v;
                let s = assemble(m, &cfg, zero).unwrap();
                if let Some(dim) = kernel_dimension(&s.matrix) {
                    assert_eq!(dim, 1, "k={k} {v} ndof={}", s.len());
                }
            }
        }
    }
}

#[test]
fn reduced_systems_are_positive_definite() {
    let one = gen_cube_grid(1).unwrap();
    let s = assemble(&one, &AssemblyConfig::new(1), zero).unwrap();
    let red = apply_dirichlet(&s, &vec![0.0; s.len()]);
    assert_eq!(smallest_eigenvalue(&red.matrix).unwrap(), None);

    let cube = gen_cube_grid(2).unwrap();
    let s = assemble(&cube, &AssemblyConfig::new(1), zero).unwrap();
    let red = apply_dirichlet(&s, &vec![0.0; s.len()]);
    assert!(smallest_eigenvalue(&red.matrix).unwrap().unwrap() > 0.0);

    let slit = gen_slit_cube_grid(2, 0.01).unwrap();
    let s = assemble(&slit, &AssemblyConfig::new(2), zero).unwrap();
    let red = apply_dirichlet(&s, &vec![0.0; s.len()]);
    let lam = smallest_eigenvalue(&red.matrix).unwrap().unwrap();
    let dense = red.matrix.to_dense().symmetric_eigenvalues().min();
    assert!(lam > 0.0);
    assert!((lam - dense).abs() < 1e-6 * dense, "{lam} vs {dense}");
}

fn sine_source(x: &Vector3<f64>) -> f64 {
    3.0 * PI * PI * (PI * x.x).sin() * (PI * x.y).sin() * (PI * x.z).sin()
}

#[test]
fn cg_iteration_budget() {
    let m = gen_cube_grid(4).unwrap();
    let s = assemble(&m, &AssemblyConfig::new(1), sine_source).unwrap();
    let red = apply_dirichlet(&s, &vec![0.0; s.len()]);
    let (_, st) = solve(&red, &SolverOptions::default()).unwrap();
    assert!(st.relative_residual <= 1e-12);
    assert!(st.iterations < 500, "{}", st.iterations);
}

#[test]
fn solution_invariant_under_renumbering() {
    let m = gen_perturbed_grid(2, 0.1, 7).unwrap();
    let s = assemble(&m, &AssemblyConfig::new(2), sine_source).unwrap();
    let red = apply_dirichlet(&s, &vec![0.0; s.len()]);
    let (x, _) = solve(&red, &SolverOptions::default()).unwrap();

    let n = red.free.len();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
    let mut t = Vec::new();
    for (new_i, &old_i) in perm.iter().enumerate() {
        for (old_j, v) in red.matrix.row(old_i) {
            let new_j = perm.iter().position(|&p| p == old_j).unwrap();
            t.push((new_i, new_j, v));
        }
    }
    let pa = CsrMatrix::from_triplets(n, &t);
    let pb: Vec<f64> = perm.iter().map(|&old| red.rhs[old]).collect();
    let mut y = vec![0.0; n];
    pcg(&pa, &pb, &mut y, &SolverOptions::default()).unwrap();
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (new_i, &old_i) in perm.iter().enumerate() {
        assert!((y[new_i] - x[red.free[old_i]]).abs() < 1e-9 * scale);
    }
}

#[test]
fn parallel_assembly_is_deterministic() {
    let m = gen_slit_cube_grid(2, 0.1).unwrap();
    let a = assemble(&m, &AssemblyConfig::new(2), sine_source).unwrap();
    let b = assemble(&m, &AssemblyConfig::new(2), sine_source).unwrap();
    assert_eq!(a.matrix, b.matrix);
    assert_eq!(a.rhs, b.rhs);
}

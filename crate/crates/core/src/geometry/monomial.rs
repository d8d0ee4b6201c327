//! Scaled monomial bases and dense polynomials in one, two or three variables.
//!
//! Monomials are stored in graded lexicographic order: all monomials of total
//! degree `d` precede those of degree `d + 1`, and within one degree the
//! exponent of the first variable decreases, then the second. Because the
//! order is graded, the basis of `P_d` is always a prefix of the basis of
//! `P_{d+1}`, so truncating a coefficient vector truncates the degree.

use nalgebra::{DMatrix, Vector3};
use std::sync::OnceLock;

/// Largest degree for which exponent tables are cached.
pub const MAX_CACHED_DEGREE: usize = 16;

/// Number of monomials of degree `<= degree` in `dim` variables.
pub fn basis_size(dim: usize, degree: usize) -> usize {
    match dim {
        1 => degree + 1,
        2 => (degree + 1) * (degree + 2) / 2,
        3 => (degree + 1) * (degree + 2) * (degree + 3) / 6,
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Size of `P_degree` allowing negative degrees (`P_{-1} = {0}`).
pub fn basis_size_signed(dim: usize, degree: isize) -> usize {
    if degree < 0 {
        0
    } else {
        basis_size(dim, degree as usize)
    }
}

/// Position of a multi-index in the graded lexicographic order.
pub fn index_of(dim: usize, exp: [u32; 3]) -> usize {
    let [a, b, c] = exp.map(|e| e as usize);
    match dim {
        1 => a,
        2 => {
            let d = a + b;
            d * (d + 1) / 2 + b
        }
        3 => {
            let d = a + b + c;
            let offset = d * (d + 1) * (d + 2) / 6;
            let r = d - a;
            offset + r * (r + 1) / 2 + c
        }
        _ => panic!("unsupported dimension {dim}"),
    }
}

fn build_exponents(dim: usize, degree: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::with_capacity(basis_size(dim, degree));
    for d in 0..=degree as u32 {
        match dim {
            1 => out.push([d, 0, 0]),
            2 => {
                for a in (0..=d).rev() {
                    out.push([a, d - a, 0]);
                }
            }
            3 => {
                for a in (0..=d).rev() {
                    for b in (0..=d - a).rev() {
                        out.push([a, b, d - a - b]);
                    }
                }
            }
            _ => panic!("unsupported dimension {dim}"),
        }
    }
    out
}

/// Exponents of the monomials of degree `<= degree`, in basis order.
pub fn exponents(dim: usize, degree: usize) -> &'static [[u32; 3]] {
    static TABLES: OnceLock<[Vec<[u32; 3]>; 3]> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        [
            build_exponents(1, MAX_CACHED_DEGREE),
            build_exponents(2, MAX_CACHED_DEGREE),
            build_exponents(3, MAX_CACHED_DEGREE),
        ]
    });
    assert!(
        degree <= MAX_CACHED_DEGREE,
        "degree {degree} exceeds cached maximum"
    );
    &tables[dim - 1][..basis_size(dim, degree)]
}

#[cfg(test)]
fn total_degree(exp: &[u32; 3]) -> usize {
    (exp[0] + exp[1] + exp[2]) as usize
}

/// Dense polynomial in `dim` variables with coefficients in graded lex order.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    dim: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Poly {
            dim,
            degree,
            coeffs: vec![0.0; basis_size(dim, degree)],
        }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        Poly {
            dim,
            degree: 0,
            coeffs: vec![value],
        }
    }

    /// The single monomial with index `idx` in the degree-`degree` basis.
    pub fn monomial(dim: usize, degree: usize, idx: usize) -> Self {
        let mut p = Poly::zero(dim, degree);
        p.coeffs[idx] = 1.0;
        p
    }

    /// Build from a coefficient slice; the length must be a basis size.
    pub fn from_coeffs(dim: usize, coeffs: &[f64]) -> Self {
        let mut degree = 0;
        while basis_size(dim, degree) < coeffs.len() {
            degree += 1;
        }
        assert_eq!(
            basis_size(dim, degree),
            coeffs.len(),
            "coefficient count is not a basis size"
        );
        Poly {
            dim,
            degree,
            coeffs: coeffs.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Same polynomial stored in the basis of degree `degree`. Dropping terms
    /// of higher degree is the caller's responsibility.
    pub fn with_degree(&self, degree: usize) -> Self {
        let mut out = Poly::zero(self.dim, degree);
        let n = out.coeffs.len().min(self.coeffs.len());
        out.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut pows = [[1.0f64; MAX_CACHED_DEGREE + 1]; 3];
        for v in 0..self.dim {
            for p in 1..=self.degree {
                pows[v][p] = pows[v][p - 1] * x[v];
            }
        }
        exponents(self.dim, self.degree)
            .iter()
            .zip(&self.coeffs)
            .map(|(e, c)| {
                c * pows[0][e[0] as usize] * pows[1][e[1] as usize] * pows[2][e[2] as usize]
            })
            .sum()
    }

    /// Partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Self {
        let degree = self.degree.saturating_sub(1);
        let mut out = Poly::zero(self.dim, degree);
        for (e, c) in exponents(self.dim, self.degree).iter().zip(&self.coeffs) {
            if e[var] == 0 || *c == 0.0 {
                continue;
            }
            let mut f = *e;
            f[var] -= 1;
            out.coeffs[index_of(self.dim, f)] += c * e[var] as f64;
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        let degree = self.degree.saturating_sub(2);
        let mut out = Poly::zero(self.dim, degree);
        for v in 0..self.dim {
            let d2 = self.derivative(v).derivative(v);
            out.add_assign_scaled(&d2, 1.0);
        }
        out
    }

    /// `self += scale * other`, growing the degree when needed.
    pub fn add_assign_scaled(&mut self, other: &Poly, scale: f64) {
        assert_eq!(self.dim, other.dim);
        if other.degree > self.degree {
            *self = self.with_degree(other.degree);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += scale * b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.dim, other.dim);
        let dim = self.dim;
        let mut out = Poly::zero(dim, self.degree + other.degree);
        let ea = exponents(dim, self.degree);
        let eb = exponents(dim, other.degree);
        for (a, ca) in ea.iter().zip(&self.coeffs) {
            if *ca == 0.0 {
                continue;
            }
            for (b, cb) in eb.iter().zip(&other.coeffs) {
                if *cb == 0.0 {
                    continue;
                }
                let e = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                out.coeffs[index_of(dim, e)] += ca * cb;
            }
        }
        out
    }

    /// Substitute an affine change of variables: source variable `i` becomes
    /// `offset[i] + sum_j linear[i][j] * y_j` in `target_dim` new variables.
    pub fn substitute_affine(
        &self,
        target_dim: usize,
        offset: &[f64],
        linear: &[[f64; 3]],
    ) -> Poly {
        let forms: Vec<Poly> = (0..self.dim)
            .map(|i| {
                let mut f = Poly::zero(target_dim, 1);
                f.coeffs[0] = offset[i];
                f.coeffs[1..=target_dim].copy_from_slice(&linear[i][..target_dim]);
                f
            })
            .collect();
        let powers: Vec<Vec<Poly>> = forms
            .iter()
            .map(|f| {
                let mut pw = vec![Poly::constant(target_dim, 1.0)];
                for p in 1..=self.degree {
                    let next = pw[p - 1].mul(f);
                    pw.push(next);
                }
                pw
            })
            .collect();
        let mut out = Poly::zero(target_dim, self.degree);
        for (e, c) in exponents(self.dim, self.degree).iter().zip(&self.coeffs) {
            if *c == 0.0 {
                continue;
            }
            let mut term = Poly::constant(target_dim, *c);
            for (v, pw) in powers.iter().enumerate() {
                if e[v] > 0 {
                    term = term.mul(&pw[e[v] as usize]);
                }
            }
            out.add_assign_scaled(&term, 1.0);
        }
        out
    }

    /// Integral given precomputed integrals of each basis monomial.
    pub fn integrate(&self, monomial_integrals: &[f64]) -> f64 {
        assert!(monomial_integrals.len() >= self.coeffs.len());
        self.coeffs
            .iter()
            .zip(monomial_integrals)
            .map(|(c, m)| c * m)
            .sum()
    }

    /// Drop coefficients whose monomials have degree above `degree`.
    pub fn truncate(&self, degree: usize) -> Poly {
        self.with_degree(degree)
    }
}

/// Matrix of an affine substitution acting on the degree-`degree` basis:
/// column `j` holds the target coefficients of source monomial `j`.
pub fn substitution_matrix(
    source_dim: usize,
    target_dim: usize,
    degree: usize,
    offset: &[f64],
    linear: &[[f64; 3]],
) -> DMatrix<f64> {
    let ns = basis_size(source_dim, degree);
    let nt = basis_size(target_dim, degree);
    let mut m = DMatrix::zeros(nt, ns);
    for j in 0..ns {
        let p = Poly::monomial(source_dim, degree, j).substitute_affine(target_dim, offset, linear);
        for i in 0..nt {
            m[(i, j)] = p.coeffs[i];
        }
    }
    m
}

/// Scaled monomials `((x - c) / h)^alpha` about a centroid `c` with scale `h`.
#[derive(Clone, Debug)]
pub struct ScaledMonomialBasis {
    pub dim: usize,
    pub degree: usize,
    pub centroid: Vector3<f64>,
    pub diameter: f64,
}

impl ScaledMonomialBasis {
    pub fn new(dim: usize, degree: usize, centroid: Vector3<f64>, diameter: f64) -> Self {
        assert!((1..=3).contains(&dim) && diameter > 0.0);
        ScaledMonomialBasis {
            dim,
            degree,
            centroid,
            diameter,
        }
    }

    pub fn len(&self) -> usize {
        basis_size(self.dim, self.degree)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn exponents(&self) -> &'static [[u32; 3]] {
        exponents(self.dim, self.degree)
    }

    pub fn scaled(&self, x: &[f64]) -> [f64; 3] {
        let mut s = [0.0; 3];
        for i in 0..self.dim {
            s[i] = (x[i] - self.centroid[i]) / self.diameter;
        }
        s
    }

    /// Values of every basis monomial at `x` (first `dim` components used).
    pub fn eval_all(&self, x: &[f64]) -> Vec<f64> {
        let s = self.scaled(x);
        eval_monomials(self.dim, self.degree, &s)
    }

    /// Gradients of the basis monomials in physical coordinates.
    pub fn grad_all(&self, x: &[f64]) -> Vec<[f64; 3]> {
        let s = self.scaled(x);
        let mut pows = [[1.0f64; MAX_CACHED_DEGREE + 2]; 3];
        for v in 0..self.dim {
            for p in 1..=self.degree {
                pows[v][p] = pows[v][p - 1] * s[v];
            }
        }
        self.exponents()
            .iter()
            .map(|e| {
                let mut g = [0.0; 3];
                for v in 0..self.dim {
                    if e[v] == 0 {
                        continue;
                    }
                    let mut val = e[v] as f64 / self.diameter;
                    for w in 0..self.dim {
                        let p = if w == v { e[w] - 1 } else { e[w] } as usize;
                        val *= pows[w][p];
                    }
                    g[v] = val;
                }
                g
            })
            .collect()
    }
}

/// Values of all monomials of degree `<= degree` at already-scaled coordinates.
pub fn eval_monomials(dim: usize, degree: usize, s: &[f64; 3]) -> Vec<f64> {
    let mut pows = [[1.0f64; MAX_CACHED_DEGREE + 1]; 3];
    for v in 0..dim {
        for p in 1..=degree {
            pows[v][p] = pows[v][p - 1] * s[v];
        }
    }
    exponents(dim, degree)
        .iter()
        .map(|e| pows[0][e[0] as usize] * pows[1][e[1] as usize] * pows[2][e[2] as usize])
        .collect()
}

pub fn monomial_degree(dim: usize, idx: usize) -> usize {
    let mut d = 0;
    while basis_size(dim, d) <= idx {
        d += 1;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basis_sizes() {
        assert_eq!(basis_size(2, 2), 6);
        assert_eq!(basis_size(3, 2), 10);
        assert_eq!(basis_size(3, 3), 20);
        assert_eq!(basis_size_signed(3, -1), 0);
    }

    #[test]
    fn graded_lex_order() {
        assert_eq!(
            exponents(2, 2),
            &[[0, 0, 0], [1, 0, 0], [0, 1, 0], [2, 0, 0], [1, 1, 0], [0, 2, 0]]
        );
        let e3 = exponents(3, 2);
        assert_eq!(e3[1..4], [[1, 0, 0], [0, 1, 0], [0, 0, 1]]);
        assert_eq!(e3[4], [2, 0, 0]);
        assert_eq!(e3[9], [0, 0, 2]);
        for dim in 1..=3 {
            for (i, e) in exponents(dim, 6).iter().enumerate() {
                assert_eq!(index_of(dim, *e), i);
            }
        }
    }

    #[test]
    fn scaled_monomial_bound() {
        let basis = ScaledMonomialBasis::new(3, 3, Vector3::new(0.3, -0.2, 1.0), 0.7);
        let x = [0.5, 0.1, 0.8];
        let r = ((x[0] - 0.3f64).powi(2) + (x[1] + 0.2f64).powi(2) + (x[2] - 1.0f64).powi(2))
            .sqrt()
            / 0.7;
        for (e, v) in basis.exponents().iter().zip(basis.eval_all(&x)) {
            assert!(v.abs() <= r.powi(total_degree(e) as i32) + 1e-15);
        }
        assert_eq!(basis.eval_all(&x)[0], 1.0);
    }

    #[test]
    fn substitution_preserves_values() {
        let p = Poly::from_coeffs(3, &(0..20).map(|i| (i as f64).sin()).collect::<Vec<_>>());
        let offset = [0.1, 0.2, -0.3];
        let lin = [[1.0, 0.5, 0.0], [0.0, -1.0, 0.0], [2.0, 0.25, 0.0]];
        let q = p.substitute_affine(2, &offset, &lin);
        let (s, t) = (0.37, -0.81);
        let x = [
            offset[0] + lin[0][0] * s + lin[0][1] * t,
            offset[1] + lin[1][0] * s + lin[1][1] * t,
            offset[2] + lin[2][0] * s + lin[2][1] * t,
        ];
        assert!((p.eval(&x) - q.eval(&[s, t])).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn gradient_matches_finite_differences(
            x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0
        ) {
            let basis = ScaledMonomialBasis::new(3, 3, Vector3::new(0.1, 0.2, 0.3), 1.7);
            let p = [x, y, z];
            let grads = basis.grad_all(&p);
            let h = 1e-6;
            for v in 0..3 {
                let mut pp = p;
                let mut pm = p;
                pp[v] += h;
                pm[v] -= h;
                let fp = basis.eval_all(&pp);
                let fm = basis.eval_all(&pm);
                for i in 0..basis.len() {
                    let fd = (fp[i] - fm[i]) / (2.0 * h);
                    let g = grads[i][v];
                    prop_assert!((fd - g).abs() <= 1e-6 * (1.0 + g.abs()));
                }
            }
        }

        #[test]
        fn product_evaluates_as_product(
            a in proptest::collection::vec(-1.0f64..1.0, 6),
            b in proptest::collection::vec(-1.0f64..1.0, 10),
            s in -1.0f64..1.0, t in -1.0f64..1.0,
        ) {
            let p = Poly::from_coeffs(2, &a);
            let q = Poly::from_coeffs(2, &b);
            let pq = p.mul(&q);
            prop_assert!((pq.eval(&[s, t]) - p.eval(&[s, t]) * q.eval(&[s, t])).abs() < 1e-12);
        }
    }
}

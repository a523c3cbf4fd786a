//! Reference implementations written straight from the definitions, used as
//! oracles against the library's optimised code paths.

#![allow(dead_code)]

use num_complex::Complex64;
use seqconj::{CMatrix64, CovariantMeasure64, Group};

pub type M = CMatrix64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `χ(x) = exp(2πi Σ_j χ_j x_j / d_j)` from residues.
pub fn character(g: &Group, chi: usize, x: usize) -> Complex64 {
    let (a, b) = (g.element_at(chi), g.element_at(x));
    let phase: f64 = g
        .moduli()
        .iter()
        .zip(a.0.iter().zip(&b.0))
        .map(|(d, (p, q))| (p * q) as f64 / *d as f64)
        .sum();
    Complex64::from_polar(1.0, std::f64::consts::TAU * phase)
}

/// `U_x e_y = e_{y+x}`.
pub fn translation(g: &Group, x: usize) -> M {
    let n = g.order();
    M::from_fn(n, n, |r, col| if r == g.add_idx(col, x) { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

/// `V_χ = diag(χ(y))`.
pub fn modulation(g: &Group, chi: usize) -> M {
    let n = g.order();
    M::from_fn(n, n, |r, col| if r == col { character(g, chi, r) } else { c(0.0, 0.0) })
}

/// Projector onto the plane wave `n^{-1/2} χ(·)`.
pub fn momentum_projector(g: &Group, chi: usize) -> M {
    let n = g.order();
    let w: Vec<Complex64> = (0..n).map(|y| character(g, chi, y) / (n as f64).sqrt()).collect();
    M::from_fn(n, n, |i, j| w[i] * w[j].conj())
}

pub fn position_projector(n: usize, x: usize) -> M {
    M::unit(n, x, x)
}

/// `L(e_a ⊗ e_b) = e_a ⊗ e_{a+b}`.
pub fn coupling(g: &Group) -> M {
    let n = g.order();
    let mut l = M::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            l[(a * n + g.add_idx(a, b), a * n + b)] = c(1.0, 0.0);
        }
    }
    l
}

/// `tr₂` on `ℂ^{d1} ⊗ ℂ^{d2}` by explicit summation.
pub fn partial_trace_2(t: &M, d1: usize, d2: usize) -> M {
    M::from_fn(d1, d1, |i, j| (0..d2).map(|k| t[(i * d2 + k, j * d2 + k)]).sum())
}

pub fn kron(a: &M, b: &M) -> M {
    let (ra, ca, rb, cb) = (a.rows(), a.cols(), b.rows(), b.cols());
    M::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

pub fn sandwich(u: &M, t: &M) -> M {
    u.matmul(t).matmul(&u.adjoint())
}

/// Covariant instrument evaluated literally:
/// `I_k(ρ) = tr₂[(1 ⊗ A({k})) L (Σ_x U_x^* ρ U_x ⊗ M(x)) L^*]`.
pub fn literal_instrument(g: &Group, mm: &CovariantMeasure64, k: usize, rho: &M) -> M {
    let n = g.order();
    let mut inner = M::zeros(n * n, n * n);
    for x in 0..n {
        let ux = translation(g, x);
        let moved = ux.adjoint().matmul(rho).matmul(&ux);
        inner += &kron(&moved, mm.density(x));
    }
    let l = coupling(g);
    let pointer = kron(&M::identity(n), &position_projector(n, k));
    partial_trace_2(&pointer.matmul(&sandwich(&l, &inner)), n, n)
}

/// Standard instrument evaluated literally:
/// `I^ω_k(ρ) = tr₂[(1 ⊗ A({k})) L (ρ ⊗ ω) L^*]`.
pub fn literal_standard(g: &Group, omega: &M, k: usize, rho: &M) -> M {
    let n = g.order();
    let l = coupling(g);
    let pointer = kron(&M::identity(n), &position_projector(n, k));
    partial_trace_2(&pointer.matmul(&sandwich(&l, &kron(rho, omega))), n, n)
}

/// `(1/n) U_x V_χ S V_χ^* U_x^*`.
pub fn literal_cpso_effect(g: &Group, s: &M, x: usize, chi: usize) -> M {
    let w = translation(g, x).matmul(&modulation(g, chi));
    sandwich(&w, s).scale_real(1.0 / g.order() as f64)
}

/// `M'(G) = Σ_x U_x^* M(x) U_x`.
pub fn total_shifted(g: &Group, mm: &CovariantMeasure64) -> M {
    let n = g.order();
    let mut sum = M::zeros(n, n);
    for x in 0..n {
        let ux = translation(g, x);
        sum += &ux.adjoint().matmul(mm.density(x)).matmul(&ux);
    }
    sum
}

pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// `f̌(x) = conj(f(−x))`.
pub fn check_vector(g: &Group, f: &[Complex64]) -> Vec<Complex64> {
    (0..g.order()).map(|x| f[g.neg_idx(x)].conj()).collect()
}

/// `r_k = tr[ω σ_k]` from explicit entries.
pub fn bloch(omega: &M) -> [f64; 3] {
    [
        2.0 * omega[(0, 1)].re,
        -2.0 * omega[(0, 1)].im,
        (omega[(0, 0)] - omega[(1, 1)]).re,
    ]
}

pub fn sigma_dot(n: &[f64; 3]) -> M {
    M::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => c(n[2], 0.0),
        (1, 1) => c(-n[2], 0.0),
        (0, 1) => c(n[0], -n[1]),
        _ => c(n[0], n[1]),
    })
}

pub fn groups_up_to(order: usize) -> Vec<Group> {
    let specs = ["2", "3", "4", "2x2", "5", "6", "2x3", "3x2"];
    specs
        .iter()
        .map(|s| s.parse::<Group>().unwrap())
        .filter(|g| g.order() <= order)
        .collect()
}

//! Two orthogonal spin components of a spin-½ system as the conjugate pair
//! of the group ℤ₂.
//!
//! Given orthogonal unit vectors `a`, `b`, the eigenbasis `e^a_±` of `a·σ`
//! is phased so that `(b·σ) e^a_± = e^a_∓`. Identifying `e^a_+ ↦ e_0` and
//! `e^a_− ↦ e_1`, `b·σ` becomes the translation `U_1` and `a·σ` the
//! modulation `V_1` of the ℤ₂ Weyl system.

use serde::Serialize;

use crate::algebra::{CMatrix, Tolerance};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::instruments::standard_instrument;
use crate::observables::{Outcome, Povm, State};
use crate::scalar::{cre, cx, Real, C};
use crate::weyl::WeylSystem;

/// Pauli matrices `σ_x`, `σ_y`, `σ_z`.
pub fn pauli<T: Real>() -> [CMatrix<T>; 3] {
    let (o, l, i) = (cre(T::zero()), cre(T::one()), cx(T::zero(), T::one()));
    [
        CMatrix::new(2, 2, vec![o, l, l, o]).expect("2x2"),
        CMatrix::new(2, 2, vec![o, -i, i, o]).expect("2x2"),
        CMatrix::new(2, 2, vec![l, o, o, -l]).expect("2x2"),
    ]
}

/// `n·σ`.
pub fn sigma_dot<T: Real>(n: &[T; 3]) -> CMatrix<T> {
    let p = pauli::<T>();
    let mut out = CMatrix::zeros(2, 2);
    for (nk, pk) in n.iter().zip(&p) {
        out += &pk.scale_real(*nk);
    }
    out
}

/// Bloch vector `r_k = tr[ω σ_k]`.
pub fn bloch_vector<T: Real>(omega: &State<T>) -> Result<[T; 3]> {
    if omega.dim() != 2 {
        return Err(Error::Dimension(format!("expected a qubit state, got dimension {}", omega.dim())));
    }
    let p = pauli::<T>();
    Ok([0, 1, 2].map(|k| omega.matrix().trace_product(&p[k]).re))
}

/// Qubit state `½(1 + r·σ)` for `‖r‖ ≤ 1`.
pub fn state_from_bloch<T: Real>(r: &[T; 3]) -> Result<State<T>> {
    let half = T::lit(0.5);
    let m = &CMatrix::identity(2).scale_real(half) + &sigma_dot(r).scale_real(half);
    State::new(m, Tolerance::default())
}

fn dot<T: Real>(u: &[T; 3], v: &[T; 3]) -> T {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

/// Which of the two frame axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    A,
    B,
}

/// Orthonormal pair `(a, b)` together with the phased eigenbasis of `a·σ`.
#[derive(Clone, Debug)]
pub struct SpinFrame<T: Real> {
    a: [T; 3],
    b: [T; 3],
    plus: [C<T>; 2],
    minus: [C<T>; 2],
}

impl<T: Real> SpinFrame<T> {
    /// Requires unit vectors with `|a·b| ≤ 1e-10`. The small remaining
    /// overlap is removed from `b` before the basis is built.
    pub fn new(a: [T; 3], b: [T; 3]) -> Result<Self> {
        let eps = T::lit(1e-10);
        for (name, v) in [("a", &a), ("b", &b)] {
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::Frame(format!("{name} has non-finite components")));
            }
            let norm = dot(v, v).sqrt();
            if (norm - T::one()).abs() > eps {
                return Err(Error::Frame(format!("{name} is not a unit vector (norm {norm})")));
            }
        }
        let overlap = dot(&a, &b);
        if overlap.abs() > eps {
            return Err(Error::Frame(format!("a and b are not orthogonal (a·b = {overlap})")));
        }
        let a_len = dot(&a, &a).sqrt();
        let a = a.map(|c| c / a_len);
        let overlap = dot(&a, &b);
        let b = [0, 1, 2].map(|k| b[k] - overlap * a[k]);
        let b_len = dot(&b, &b).sqrt();
        let b = b.map(|c| c / b_len);

        let (_, vecs) = sigma_dot(&a).eigh()?;
        let mut plus = [vecs[(0, 1)], vecs[(1, 1)]];
        // make the larger component real and positive
        let pivot = if plus[0].norm() >= plus[1].norm() { plus[0] } else { plus[1] };
        let phase = pivot.conj() / pivot.norm();
        plus = plus.map(|z| z * phase);
        let flipped = sigma_dot(&b).apply_vec(&plus);
        let minus = [flipped[0], flipped[1]];
        Ok(Self { a, b, plus, minus })
    }

    /// `a = ẑ`, `b = x̂`, whose basis is the computational one.
    pub fn standard() -> Self {
        let (o, l) = (T::zero(), T::one());
        Self::new([o, o, l], [l, o, o]).expect("orthonormal")
    }

    pub fn a(&self) -> [T; 3] {
        self.a
    }

    pub fn b(&self) -> [T; 3] {
        self.b
    }

    pub fn axis(&self, axis: Axis) -> [T; 3] {
        match axis {
            Axis::A => self.a,
            Axis::B => self.b,
        }
    }

    pub fn plus(&self) -> [C<T>; 2] {
        self.plus
    }

    pub fn minus(&self) -> [C<T>; 2] {
        self.minus
    }

    /// Unitary with columns `e^a_+`, `e^a_−`.
    pub fn basis_matrix(&self) -> CMatrix<T> {
        CMatrix::new(2, 2, vec![self.plus[0], self.minus[0], self.plus[1], self.minus[1]]).expect("2x2")
    }

    /// Matrix of `t` in the frame basis, `<e^a_i| t |e^a_j>`.
    pub fn to_frame(&self, t: &CMatrix<T>) -> CMatrix<T> {
        self.basis_matrix().adjoint().conjugate(t)
    }

    /// Inverse of [`SpinFrame::to_frame`].
    pub fn from_frame(&self, t: &CMatrix<T>) -> CMatrix<T> {
        self.basis_matrix().conjugate(t)
    }

    /// Fourier operator `αe^a_+ + βe^a_− ↦ ((α+β)/√2) e^a_+ + ((α−β)/√2) e^a_−`.
    pub fn fourier(&self) -> CMatrix<T> {
        let h = T::one() / T::lit(2.0).sqrt();
        let hadamard = CMatrix::from_real_rows(&[&[h, h], &[h, -h]]);
        self.from_frame(&hadamard)
    }
}

fn sign_outcomes() -> Vec<Outcome> {
    vec![Outcome::Sign(1), Outcome::Sign(-1)]
}

/// `k ↦ ½(1 + k·scale·n·σ)` for `k = ±1`.
fn binary_povm<T: Real>(n: &[T; 3], scale: T) -> Povm<T> {
    let half = T::lit(0.5);
    let id = CMatrix::identity(2).scale_real(half);
    let s = sigma_dot(n).scale_real(half * scale);
    Povm::from_trusted(sign_outcomes(), vec![&id + &s, &id - &s])
}

/// Sharp spin component `S^n(±1) = ½(1 ± n·σ)` along a frame axis.
pub fn spin_povm<T: Real>(frame: &SpinFrame<T>, axis: Axis) -> Povm<T> {
    binary_povm(&frame.axis(axis), T::one())
}

/// Unsharp spin observables measured by the sequential scheme with probe `ω`.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct UnsharpSpin<T: Real> {
    /// `s = 2 tr[ω S^a(+1)] − 1 = r·a`.
    pub s: T,
    /// `t = 2 tr[ω S^b(+1)] − 1 = r·b`.
    pub t: T,
    /// `S^{sa}(±1) = ½(1 ± s a·σ)`.
    pub a_povm: Povm<T>,
    /// `S^{tb}(±1) = ½(1 ± t b·σ)`.
    pub b_povm: Povm<T>,
}

pub fn unsharp_spin<T: Real>(frame: &SpinFrame<T>, omega: &State<T>) -> Result<UnsharpSpin<T>> {
    if omega.dim() != 2 {
        return Err(Error::Dimension(format!("expected a qubit probe, got dimension {}", omega.dim())));
    }
    let two = T::lit(2.0);
    let p_a = omega.matrix().trace_product(spin_povm(frame, Axis::A).effect(0)).re;
    let p_b = omega.matrix().trace_product(spin_povm(frame, Axis::B).effect(0)).re;
    let (s, t) = (two * p_a - T::one(), two * p_b - T::one());
    Ok(UnsharpSpin {
        s,
        t,
        a_povm: binary_povm(&frame.a, s),
        b_povm: binary_povm(&frame.b, t),
    })
}

/// `s² + t²`, bounded by `‖r‖² ≤ 1`.
pub fn tradeoff_check<T: Real>(frame: &SpinFrame<T>, omega: &State<T>) -> Result<T> {
    let u = unsharp_spin(frame, omega)?;
    Ok(u.s * u.s + u.t * u.t)
}

/// Basis in which the coupling `L` is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingBasis {
    /// The phased eigenbasis `e^a_±`.
    Frame,
    /// The computational basis, ignoring the frame.
    Computational,
}

/// Largest deviation of `<e^a_i| I^ω_k(ρ) |e^a_j>` from
/// `ρ_ij · (U_k ω U_k)_ij`, all matrices taken in the frame basis.
pub fn kronecker_factorization_check<T: Real>(
    frame: &SpinFrame<T>,
    omega: &State<T>,
    rho: &State<T>,
) -> Result<T> {
    kronecker_factorization_residual(frame, omega, rho, CouplingBasis::Frame)
}

pub fn kronecker_factorization_residual<T: Real>(
    frame: &SpinFrame<T>,
    omega: &State<T>,
    rho: &State<T>,
    basis: CouplingBasis,
) -> Result<T> {
    if omega.dim() != 2 || rho.dim() != 2 {
        return Err(Error::Dimension("spin states must be 2x2".into()));
    }
    let ws = WeylSystem::new(Group::cyclic(2)?);
    let omega_f = frame.to_frame(omega.matrix());
    let rho_f = frame.to_frame(rho.matrix());
    let outputs: Vec<CMatrix<T>> = match basis {
        CouplingBasis::Frame => {
            let inst = standard_instrument(&ws, &State::from_trusted(omega_f.clone()))?;
            (0..2)
                .map(|k| inst.map(k).apply(&rho_f))
                .collect::<Result<_>>()?
        }
        CouplingBasis::Computational => {
            let inst = standard_instrument(&ws, omega)?;
            (0..2)
                .map(|k| Ok(frame.to_frame(&inst.map(k).apply(rho.matrix())?)))
                .collect::<Result<_>>()?
        }
    };
    let mut worst = T::zero();
    for (k, out) in outputs.iter().enumerate() {
        let moved = ws.u(k).conjugate(&omega_f);
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((out[(i, j)] - rho_f[(i, j)] * moved[(i, j)]).norm());
            }
        }
    }
    Ok(worst)
}

/// Distance between the frame's operators and the ℤ₂ Weyl system after
/// the change of basis `e^a_± ↦ e_0, e_1`: translation against `b·σ`,
/// modulation against `a·σ` and Fourier matrix against the frame's.
pub fn frame_equivalence_residual<T: Real>(frame: &SpinFrame<T>) -> T {
    let ws = WeylSystem::<T>::new(Group::cyclic(2).expect("order 2"));
    let pairs = [
        (frame.to_frame(&sigma_dot(&frame.b)), ws.u(1).clone()),
        (frame.to_frame(&sigma_dot(&frame.a)), ws.v(1).clone()),
        (frame.to_frame(&frame.fourier()), ws.fourier().clone()),
    ];
    pairs
        .iter()
        .map(|(l, r)| (l - r).max_abs())
        .fold(T::zero(), T::max)
}

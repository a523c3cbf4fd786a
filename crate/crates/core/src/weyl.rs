//! Schrödinger representation of the Weyl–Heisenberg group on `L²(G)`.
//!
//! `U_x e_y = e_{y+x}` (translations), `V_χ e_y = χ(y) e_y` (modulations),
//! `W(x, χ, u) = ū U_x V_χ`. The pair satisfies `U_x V_χ = conj(χ(x)) V_χ U_x`.

use serde::Serialize;

use crate::algebra::CMatrix;
use crate::error::{Error, Result};
use crate::group::{DualElement, Group, GroupElement};
use crate::scalar::{cre, Real, C};

/// A point `(x, χ, u)` of the Weyl–Heisenberg group `G × Ĝ × T`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint<T: Real> {
    pub x: GroupElement,
    pub chi: DualElement,
    pub u: C<T>,
}

impl<T: Real> PhasePoint<T> {
    pub fn new(x: GroupElement, chi: DualElement, u: C<T>) -> Result<Self> {
        if (u.norm() - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(8.0)) {
            return Err(Error::Group(format!("central phase must have modulus 1, got {}", u.norm())));
        }
        Ok(Self { x, chi, u })
    }

    /// `(x, χ, 1)`.
    pub fn unphased(x: GroupElement, chi: DualElement) -> Self {
        Self { x, chi, u: cre(T::one()) }
    }

    /// Group law `(x,χ,u)(y,γ,v) = (x+y, χγ, conj(χ(y)) u v)`.
    pub fn compose(&self, other: &Self, group: &Group) -> Result<Self> {
        let phase = group.pairing::<T>(&self.chi, &other.x)?.conj();
        Ok(Self {
            x: group.add(&self.x, &other.x)?,
            chi: group.dual_mul(&self.chi, &other.chi)?,
            u: phase * self.u * other.u,
        })
    }
}

/// Translation and modulation operators for one group, built once.
#[derive(Clone, Debug)]
pub struct WeylSystem<T: Real> {
    group: Group,
    translations: Vec<CMatrix<T>>,
    modulations: Vec<CMatrix<T>>,
    fourier: CMatrix<T>,
}

impl<T: Real> WeylSystem<T> {
    pub fn new(group: Group) -> Self {
        let n = group.order();
        let translations = (0..n)
            .map(|x| {
                let mut m = CMatrix::zeros(n, n);
                for y in 0..n {
                    m[(group.add_idx(y, x), y)] = cre(T::one());
                }
                m
            })
            .collect();
        let modulations = (0..n)
            .map(|chi| {
                let diag: Vec<C<T>> = (0..n).map(|y| group.pairing_idx(chi, y)).collect();
                CMatrix::from_diag(&diag)
            })
            .collect();
        let fourier = group.fourier_matrix();
        Self {
            group,
            translations,
            modulations,
            fourier,
        }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    /// Hilbert-space dimension `n = |G|`.
    pub fn dim(&self) -> usize {
        self.group.order()
    }

    pub fn fourier(&self) -> &CMatrix<T> {
        &self.fourier
    }

    pub fn translation(&self, x: &GroupElement) -> Result<&CMatrix<T>> {
        self.check(x)?;
        Ok(&self.translations[self.group.index_of(x)])
    }

    pub fn modulation(&self, chi: &DualElement) -> Result<&CMatrix<T>> {
        self.check(&GroupElement(chi.0.clone()))?;
        Ok(&self.modulations[self.group.dual_index_of(chi)])
    }

    /// `U_x` by basis index.
    pub fn u(&self, x: usize) -> &CMatrix<T> {
        &self.translations[x]
    }

    /// `V_χ` by basis index.
    pub fn v(&self, chi: usize) -> &CMatrix<T> {
        &self.modulations[chi]
    }

    /// `U_x V_χ` by basis indices.
    pub fn uv(&self, x: usize, chi: usize) -> CMatrix<T> {
        self.translations[x].matmul(&self.modulations[chi])
    }

    fn check(&self, x: &GroupElement) -> Result<()> {
        if self.group.contains(x) {
            Ok(())
        } else {
            Err(Error::Group(format!("{:?} is not an element of {}", x.0, self.group)))
        }
    }

    /// `W(x, χ, u) = ū U_x V_χ`.
    pub fn weyl_op(&self, p: &PhasePoint<T>) -> Result<CMatrix<T>> {
        let u = self.translation(&p.x)?;
        let v = self.modulation(&p.chi)?;
        Ok(u.matmul(v).scale(p.u.conj()))
    }

    /// Sharp position projection `A(X)`: the indicator of `X` on the diagonal.
    pub fn sharp_position(&self, subset: &[GroupElement]) -> Result<CMatrix<T>> {
        let mut diag = vec![T::zero(); self.dim()];
        for x in subset {
            self.check(x)?;
            diag[self.group.index_of(x)] = T::one();
        }
        Ok(CMatrix::from_real_diag(&diag))
    }

    /// Sharp momentum projection `B(Y) = F^* 1_Y F`.
    pub fn sharp_momentum(&self, subset: &[DualElement]) -> Result<CMatrix<T>> {
        let mut diag = vec![T::zero(); self.dim()];
        for chi in subset {
            self.check(&GroupElement(chi.0.clone()))?;
            diag[self.group.dual_index_of(chi)] = T::one();
        }
        Ok(self
            .fourier
            .adjoint()
            .matmul(&CMatrix::from_real_diag(&diag))
            .matmul(&self.fourier))
    }

    /// `A({x})` by index.
    pub fn position_point(&self, x: usize) -> CMatrix<T> {
        CMatrix::unit(self.dim(), x, x)
    }

    /// `B({χ})` by index: the projector onto the plane wave `c·χ(·)`.
    pub fn momentum_point(&self, chi: usize) -> CMatrix<T> {
        let wave: Vec<C<T>> = (0..self.dim()).map(|y| self.fourier[(chi, y)].conj()).collect();
        CMatrix::outer(&wave, &wave)
    }

    /// Largest entry of `U_x V_χ − conj(χ(x)) V_χ U_x` over all pairs.
    pub fn weyl_relation_residual(&self) -> T {
        let n = self.dim();
        let mut worst = T::zero();
        for x in 0..n {
            for chi in 0..n {
                let lhs = self.translations[x].matmul(&self.modulations[chi]);
                let rhs = self.modulations[chi]
                    .matmul(&self.translations[x])
                    .scale(self.group.pairing_idx::<T>(chi, x).conj());
                worst = worst.max((&lhs - &rhs).max_abs());
            }
        }
        worst
    }

    /// Residual of the SNAG formulas `U_x = Σ_χ conj(χ(x)) B({χ})` and
    /// `V_χ = Σ_x χ(x) A({x})`, maximum Frobenius error over all points.
    pub fn snag_residual(&self) -> T {
        let n = self.dim();
        let momentum: Vec<CMatrix<T>> = (0..n).map(|c| self.momentum_point(c)).collect();
        let mut worst = T::zero();
        for x in 0..n {
            let mut sum = CMatrix::zeros(n, n);
            for (chi, b) in momentum.iter().enumerate() {
                sum += &b.scale(self.group.pairing_idx::<T>(chi, x).conj());
            }
            worst = worst.max(sum.distance(&self.translations[x]).expect("same shape"));
        }
        for chi in 0..n {
            let mut sum = CMatrix::zeros(n, n);
            for x in 0..n {
                sum += &self.position_point(x).scale(self.group.pairing_idx(chi, x));
            }
            worst = worst.max(sum.distance(&self.modulations[chi]).expect("same shape"));
        }
        worst
    }

    /// Operators in a serialisable bundle, for `dump-weyl`.
    pub fn dump(&self) -> WeylDump<T> {
        WeylDump {
            group: self.group.clone(),
            translations: self.translations.clone(),
            modulations: self.modulations.clone(),
            fourier: self.fourier.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WeylDump<T: Real> {
    pub group: Group,
    pub translations: Vec<CMatrix<T>>,
    pub modulations: Vec<CMatrix<T>>,
    pub fourier: CMatrix<T>,
}

//! Finite abelian groups `Z_{d1} × … × Z_{dk}` with counting Haar measure,
//! their characters, and the unitary Fourier transform.
//!
//! The dual group is identified with the group itself: a dual element is a
//! residue vector `χ` acting by `χ(x) = exp(2πi Σ_j χ_j x_j / d_j)`. Under
//! this identification the product in `Ĝ` is residue addition and `χ⁻¹` is
//! residue negation.
//!
//! Elements are enumerated lexicographically (first modulus slowest, zero
//! first). That order is the basis order of `L²(G)` used everywhere.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cx, Real, C};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GroupRepr", into = "GroupRepr")]
pub struct Group {
    moduli: Vec<usize>,
    order: usize,
}

#[derive(Serialize, Deserialize)]
struct GroupRepr {
    moduli: Vec<usize>,
}

impl TryFrom<GroupRepr> for Group {
    type Error = Error;

    fn try_from(repr: GroupRepr) -> Result<Self> {
        Group::new(repr.moduli)
    }
}

impl From<Group> for GroupRepr {
    fn from(g: Group) -> Self {
        GroupRepr { moduli: g.moduli }
    }
}

/// Element of `G`, as residues.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub Vec<usize>);

/// Element of the dual group `Ĝ`, as residues under the fixed self-duality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualElement(pub Vec<usize>);

impl Group {
    pub fn new(moduli: Vec<usize>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::Group("a group needs at least one cyclic factor".into()));
        }
        if let Some(d) = moduli.iter().find(|&&d| d < 2) {
            return Err(Error::Group(format!("every modulus must be at least 2, got {d}")));
        }
        let order = moduli
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Group("group order overflows".into()))?;
        Ok(Self { moduli, order })
    }

    /// Cyclic group `Z_d`.
    pub fn cyclic(d: usize) -> Result<Self> {
        Self::new(vec![d])
    }

    pub fn moduli(&self) -> &[usize] {
        &self.moduli
    }

    /// Group order `n`, which is also the Hilbert-space dimension.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Fourier constant `c = n^{-1/2}` for counting measures on `G` and `Ĝ`.
    pub fn fourier_constant<T: Real>(&self) -> T {
        T::one() / T::count(self.order).sqrt()
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.moduli.len()])
    }

    pub fn dual_identity(&self) -> DualElement {
        DualElement(vec![0; self.moduli.len()])
    }

    fn check_shape(&self, residues: &[usize]) -> Result<()> {
        if residues.len() != self.moduli.len() {
            return Err(Error::Group(format!(
                "element has {} residues, group has {} factors",
                residues.len(),
                self.moduli.len()
            )));
        }
        if let Some((r, d)) = residues.iter().zip(&self.moduli).find(|(r, d)| *r >= *d) {
            return Err(Error::Group(format!("residue {r} not reduced modulo {d}")));
        }
        Ok(())
    }

    /// Validated element from residues (reduced modulo each factor).
    pub fn element(&self, residues: &[i64]) -> Result<GroupElement> {
        if residues.len() != self.moduli.len() {
            return Err(Error::Group(format!(
                "element has {} residues, group has {} factors",
                residues.len(),
                self.moduli.len()
            )));
        }
        Ok(GroupElement(
            residues
                .iter()
                .zip(&self.moduli)
                .map(|(&r, &d)| r.rem_euclid(d as i64) as usize)
                .collect(),
        ))
    }

    pub fn dual_element(&self, residues: &[i64]) -> Result<DualElement> {
        self.element(residues).map(|g| DualElement(g.0))
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        self.check_shape(&x.0).is_ok()
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check_shape(&a.0)?;
        self.check_shape(&b.0)?;
        Ok(GroupElement(self.add_residues(&a.0, &b.0)))
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check_shape(&a.0)?;
        Ok(GroupElement(self.neg_residues(&a.0)))
    }

    /// Product `χγ` in `Ĝ`.
    pub fn dual_mul(&self, a: &DualElement, b: &DualElement) -> Result<DualElement> {
        self.check_shape(&a.0)?;
        self.check_shape(&b.0)?;
        Ok(DualElement(self.add_residues(&a.0, &b.0)))
    }

    /// Inverse `χ⁻¹` in `Ĝ` (residue negation).
    pub fn dual_inv(&self, a: &DualElement) -> Result<DualElement> {
        self.check_shape(&a.0)?;
        Ok(DualElement(self.neg_residues(&a.0)))
    }

    fn add_residues(&self, a: &[usize], b: &[usize]) -> Vec<usize> {
        a.iter()
            .zip(b)
            .zip(&self.moduli)
            .map(|((x, y), d)| (x + y) % d)
            .collect()
    }

    fn neg_residues(&self, a: &[usize]) -> Vec<usize> {
        a.iter()
            .zip(&self.moduli)
            .map(|(x, d)| (d - x) % d)
            .collect()
    }

    /// Character value `χ(x) = exp(2πi Σ_j χ_j x_j / d_j)`.
    pub fn pairing<T: Real>(&self, chi: &DualElement, x: &GroupElement) -> Result<C<T>> {
        self.check_shape(&chi.0)?;
        self.check_shape(&x.0)?;
        Ok(self.pairing_residues(&chi.0, &x.0))
    }

    fn pairing_residues<T: Real>(&self, chi: &[usize], x: &[usize]) -> C<T> {
        // Accumulate the phase as an exact fraction of a full turn over the
        // common denominator n, then reduce before taking exp.
        let n = self.order;
        let turns = chi
            .iter()
            .zip(x)
            .zip(&self.moduli)
            .map(|((c, y), d)| ((c * y) % d) * (n / d))
            .fold(0usize, |acc, t| (acc + t) % n);
        root_of_unity(turns, n)
    }

    /// Basis index of an element in the enumeration order.
    pub fn index_of(&self, x: &GroupElement) -> usize {
        x.0.iter()
            .zip(&self.moduli)
            .fold(0usize, |acc, (r, d)| acc * d + r)
    }

    pub fn dual_index_of(&self, chi: &DualElement) -> usize {
        chi.0
            .iter()
            .zip(&self.moduli)
            .fold(0usize, |acc, (r, d)| acc * d + r)
    }

    /// Element at a basis index.
    pub fn element_at(&self, mut idx: usize) -> GroupElement {
        let mut residues = vec![0; self.moduli.len()];
        for (slot, d) in residues.iter_mut().zip(&self.moduli).rev() {
            *slot = idx % d;
            idx /= d;
        }
        GroupElement(residues)
    }

    pub fn dual_at(&self, idx: usize) -> DualElement {
        DualElement(self.element_at(idx).0)
    }

    /// All elements in lexicographic order.
    pub fn enumerate(&self) -> Vec<GroupElement> {
        (0..self.order).map(|i| self.element_at(i)).collect()
    }

    pub fn enumerate_dual(&self) -> Vec<DualElement> {
        (0..self.order).map(|i| self.dual_at(i)).collect()
    }

    /// Index of `idx(a) + idx(b)`.
    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        if self.moduli.len() == 1 {
            return (a + b) % self.order;
        }
        let (x, y) = (self.element_at(a), self.element_at(b));
        self.index_of(&GroupElement(self.add_residues(&x.0, &y.0)))
    }

    /// Index of `−idx(a)`.
    pub fn neg_idx(&self, a: usize) -> usize {
        if self.moduli.len() == 1 {
            return (self.order - a) % self.order;
        }
        let x = self.element_at(a);
        self.index_of(&GroupElement(self.neg_residues(&x.0)))
    }

    /// Index of `idx(a) − idx(b)`.
    pub fn sub_idx(&self, a: usize, b: usize) -> usize {
        self.add_idx(a, self.neg_idx(b))
    }

    /// `χ(x)` by basis indices.
    pub fn pairing_idx<T: Real>(&self, chi: usize, x: usize) -> C<T> {
        if self.moduli.len() == 1 {
            let n = self.order;
            return root_of_unity((chi * x) % n, n);
        }
        self.pairing_residues(&self.element_at(chi).0, &self.element_at(x).0)
    }

    /// Character table `χ(x)`, rows indexed by `Ĝ`, columns by `G`.
    pub fn character_table<T: Real>(&self) -> CMatrix<T> {
        CMatrix::from_fn(self.order, self.order, |chi, x| self.pairing_idx(chi, x))
    }

    /// Unitary Fourier matrix `F[χ, x] = c · conj(χ(x))`.
    pub fn fourier_matrix<T: Real>(&self) -> CMatrix<T> {
        let c = self.fourier_constant::<T>();
        CMatrix::from_fn(self.order, self.order, |chi, x| {
            self.pairing_idx::<T>(chi, x).conj() * c
        })
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.moduli.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl FromStr for Group {
    type Err = Error;

    /// Parses `"2"`, `"2x3"`, `"2x2x2"`.
    fn from_str(s: &str) -> Result<Self> {
        let moduli = s
            .split(['x', 'X', '*'])
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Group(format!("cannot parse group spec {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Group::new(moduli)
    }
}

/// Free-function form of [`Group::fourier_matrix`].
pub fn fourier_matrix<T: Real>(g: &Group) -> CMatrix<T> {
    g.fourier_matrix()
}

/// Free-function form of [`Group::enumerate`].
pub fn enumerate(g: &Group) -> Vec<GroupElement> {
    g.enumerate()
}

/// `exp(2πi k / n)`, exact when `k / n` is a multiple of a quarter turn.
fn root_of_unity<T: Real>(k: usize, n: usize) -> C<T> {
    if (4 * k).is_multiple_of(n) {
        return match (4 * k / n) % 4 {
            0 => cx(T::one(), T::zero()),
            1 => cx(T::zero(), T::one()),
            2 => cx(-T::one(), T::zero()),
            _ => cx(T::zero(), -T::one()),
        };
    }
    C::from_polar(T::one(), T::TAU() * T::count(k) / T::count(n))
}

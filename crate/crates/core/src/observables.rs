//! Observables (POVMs) with finitely many outcomes, states, smeared
//! position and momentum observables, and covariant phase-space observables.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{real_rank, CMatrix, Tolerance};
use crate::error::{Error, Result};
use crate::group::{DualElement, Group, GroupElement};
use crate::scalar::{Real, C};
use crate::weyl::WeylSystem;

/// Outcome label of an observable or instrument.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    /// A point of `G`.
    Point(GroupElement),
    /// A point of `Ĝ`.
    Dual(DualElement),
    /// A phase-space point `(x, χ)` of `G × Ĝ`.
    Phase(GroupElement, DualElement),
    /// Spin outcome `±1`.
    Sign(i8),
    Name(String),
    /// Outcome pair of a sequential composition.
    Seq(Box<Outcome>, Box<Outcome>),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn res(r: &[usize]) -> String {
            r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
        }
        match self {
            Outcome::Point(x) => write!(f, "{}", res(&x.0)),
            Outcome::Dual(c) => write!(f, "{}", res(&c.0)),
            Outcome::Phase(x, c) => write!(f, "{};{}", res(&x.0), res(&c.0)),
            Outcome::Sign(s) => write!(f, "{s:+}"),
            Outcome::Name(n) => write!(f, "{n}"),
            Outcome::Seq(a, b) => write!(f, "({a})({b})"),
        }
    }
}

/// Outcomes of `G` in enumeration order.
pub fn group_outcomes(g: &Group) -> Vec<Outcome> {
    g.enumerate().into_iter().map(Outcome::Point).collect()
}

/// Outcomes of `Ĝ` in enumeration order.
pub fn dual_outcomes(g: &Group) -> Vec<Outcome> {
    g.enumerate_dual().into_iter().map(Outcome::Dual).collect()
}

/// Outcomes of `G × Ĝ`, `x` major: index `idx(x)·n + idx(χ)`.
pub fn phase_space_outcomes(g: &Group) -> Vec<Outcome> {
    let n = g.order();
    (0..n * n)
        .map(|k| Outcome::Phase(g.element_at(k / n), g.dual_at(k % n)))
        .collect()
}

/// Density operator: Hermitian, positive, unit trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CMatrix<T>", into = "CMatrix<T>")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct State<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> State<T> {
    pub fn new(matrix: CMatrix<T>, tol: Tolerance<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_hermitian(tol) {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - T::one()).abs() > tol.abs_eps || tr.im.abs() > tol.abs_eps {
            return Err(Error::InvalidState(format!("trace is {} + {}i, expected 1", tr.re, tr.im)));
        }
        if !matrix.is_psd(tol)? {
            return Err(Error::InvalidState("density matrix is not positive".into()));
        }
        Ok(Self { matrix })
    }

    /// Normalised projector onto `psi`.
    pub fn pure(psi: &[C<T>]) -> Result<Self> {
        let norm = psi.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        if norm == T::zero() {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v: Vec<C<T>> = psi.iter().map(|z| z / norm).collect();
        Ok(Self {
            matrix: CMatrix::outer(&v, &v),
        })
    }

    /// `|e_k><e_k|`.
    pub fn basis(n: usize, k: usize) -> Self {
        Self {
            matrix: CMatrix::unit(n, k, k),
        }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            matrix: CMatrix::identity(n).scale_real(T::one() / T::count(n)),
        }
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub(crate) fn from_trusted(matrix: CMatrix<T>) -> Self {
        Self { matrix }
    }
}

impl<T: Real> TryFrom<CMatrix<T>> for State<T> {
    type Error = Error;

    fn try_from(m: CMatrix<T>) -> Result<Self> {
        State::new(m, Tolerance::default())
    }
}

impl<T: Real> From<State<T>> for CMatrix<T> {
    fn from(s: State<T>) -> Self {
        s.matrix
    }
}

/// Probability distribution over labelled outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ProbVector<T: Real> {
    pub outcomes: Vec<Outcome>,
    pub weights: Vec<T>,
}

impl<T: Real> ProbVector<T> {
    /// Validates and cleans a distribution: weights in `[−clip, 0)` become
    /// zero, anything more negative is rejected, and the total must be 1
    /// within the default tolerance.
    pub fn new(outcomes: Vec<Outcome>, weights: Vec<T>) -> Result<Self> {
        if outcomes.len() != weights.len() {
            return Err(Error::InvalidProbability(format!(
                "{} outcomes but {} weights",
                outcomes.len(),
                weights.len()
            )));
        }
        let clip = T::default_eps() * T::lit(1e-3);
        let mut cleaned = Vec::with_capacity(weights.len());
        for (o, &w) in outcomes.iter().zip(&weights) {
            if !w.is_finite() || w < -clip {
                return Err(Error::InvalidProbability(format!("weight {w} at outcome {o}")));
            }
            cleaned.push(w.max(T::zero()));
        }
        let total = cleaned.iter().fold(T::zero(), |a, &w| a + w);
        if (total - T::one()).abs() > T::default_eps() {
            return Err(Error::InvalidProbability(format!("weights sum to {total}")));
        }
        Ok(Self {
            outcomes,
            weights: cleaned,
        })
    }

    /// Distribution on `G` with weights in enumeration order.
    pub fn over_group(g: &Group, weights: Vec<T>) -> Result<Self> {
        Self::new(group_outcomes(g), weights)
    }

    /// Distribution on `Ĝ` with weights in enumeration order.
    pub fn over_dual(g: &Group, weights: Vec<T>) -> Result<Self> {
        Self::new(dual_outcomes(g), weights)
    }

    /// Point mass at index `k` of `G`.
    pub fn dirac(g: &Group, k: usize) -> Self {
        let mut w = vec![T::zero(); g.order()];
        w[k] = T::one();
        Self {
            outcomes: group_outcomes(g),
            weights: w,
        }
    }

    pub fn uniform(outcomes: Vec<Outcome>) -> Self {
        let n = outcomes.len();
        Self {
            outcomes,
            weights: vec![T::one() / T::count(n); n],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Largest absolute weight difference.
    pub fn max_diff(&self, other: &Self) -> T {
        self.weights
            .iter()
            .zip(&other.weights)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs()))
    }
}

/// Positive operator valued measure on a finite outcome set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmRepr<T>", into = "PovmRepr<T>")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Povm<T: Real> {
    outcomes: Vec<Outcome>,
    effects: Vec<CMatrix<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
struct PovmRepr<T: Real> {
    outcomes: Vec<Outcome>,
    effects: Vec<CMatrix<T>>,
}

impl<T: Real> TryFrom<PovmRepr<T>> for Povm<T> {
    type Error = Error;

    fn try_from(r: PovmRepr<T>) -> Result<Self> {
        Povm::new(r.outcomes, r.effects, Tolerance::default())
    }
}

impl<T: Real> From<Povm<T>> for PovmRepr<T> {
    fn from(p: Povm<T>) -> Self {
        PovmRepr {
            outcomes: p.outcomes,
            effects: p.effects,
        }
    }
}

impl<T: Real> Povm<T> {
    /// Checks every effect is positive and that they sum to the identity.
    pub fn new(outcomes: Vec<Outcome>, effects: Vec<CMatrix<T>>, tol: Tolerance<T>) -> Result<Self> {
        if outcomes.len() != effects.len() || effects.is_empty() {
            return Err(Error::InvalidPovm(format!(
                "{} outcomes for {} effects",
                outcomes.len(),
                effects.len()
            )));
        }
        let n = effects[0].rows();
        let mut sum = CMatrix::zeros(n, n);
        for (o, e) in outcomes.iter().zip(&effects) {
            if e.rows() != n || e.cols() != n {
                return Err(Error::InvalidPovm(format!("effect {o} has the wrong shape")));
            }
            match e.is_psd(tol) {
                Ok(true) => {}
                Ok(false) => return Err(Error::InvalidPovm(format!("effect {o} is not positive"))),
                Err(_) => return Err(Error::InvalidPovm(format!("effect {o} is not Hermitian"))),
            }
            sum += e;
        }
        let gap = sum.distance(&CMatrix::identity(n))?;
        if gap > tol.abs_eps + tol.rel_eps * T::count(n).sqrt() {
            return Err(Error::InvalidPovm(format!("effects sum to identity only within {gap}")));
        }
        Ok(Self { outcomes, effects })
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[CMatrix<T>] {
        &self.effects
    }

    pub fn effect(&self, k: usize) -> &CMatrix<T> {
        &self.effects[k]
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].rows()
    }

    /// Effect for a given label.
    pub fn effect_for(&self, outcome: &Outcome) -> Option<&CMatrix<T>> {
        self.outcomes
            .iter()
            .position(|o| o == outcome)
            .map(|k| &self.effects[k])
    }

    /// Outcome statistics `tr(ρ E_k)`.
    pub fn measure(&self, rho: &State<T>) -> Result<ProbVector<T>> {
        if rho.dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "state of dimension {} measured by a POVM of dimension {}",
                rho.dim(),
                self.dim()
            )));
        }
        let weights = self
            .effects
            .iter()
            .map(|e| rho.matrix().trace_product(e).re)
            .collect();
        ProbVector::new(self.outcomes.clone(), weights)
    }

    /// Largest Frobenius distance between corresponding effects.
    pub fn max_effect_distance(&self, other: &Self) -> Result<T> {
        if self.len() != other.len() {
            return Err(Error::Dimension(format!(
                "POVMs with {} and {} outcomes",
                self.len(),
                other.len()
            )));
        }
        self.effects
            .iter()
            .zip(&other.effects)
            .try_fold(T::zero(), |acc, (a, b)| Ok(acc.max(a.distance(b)?)))
    }

    /// `‖Σ_k E_k − I‖_F`.
    pub fn normalization_residual(&self) -> T {
        let n = self.dim();
        let mut sum = CMatrix::zeros(n, n);
        for e in &self.effects {
            sum += e;
        }
        sum.distance(&CMatrix::identity(n)).expect("square effects")
    }

    pub(crate) fn from_trusted(outcomes: Vec<Outcome>, effects: Vec<CMatrix<T>>) -> Self {
        Self { outcomes, effects }
    }
}

/// Free-function form of [`Povm::measure`].
pub fn measure<T: Real>(p: &Povm<T>, rho: &State<T>) -> Result<ProbVector<T>> {
    p.measure(rho)
}

/// Sharp position observable `x ↦ A({x})`.
pub fn sharp_position_povm<T: Real>(ws: &WeylSystem<T>) -> Povm<T> {
    let n = ws.dim();
    Povm::from_trusted(
        group_outcomes(ws.group()),
        (0..n).map(|x| ws.position_point(x)).collect(),
    )
}

/// Sharp momentum observable `χ ↦ B({χ})`.
pub fn sharp_momentum_povm<T: Real>(ws: &WeylSystem<T>) -> Povm<T> {
    let n = ws.dim();
    Povm::from_trusted(
        dual_outcomes(ws.group()),
        (0..n).map(|c| ws.momentum_point(c)).collect(),
    )
}

fn check_len<T: Real>(ws: &WeylSystem<T>, p: &ProbVector<T>, what: &str) -> Result<()> {
    if p.len() != ws.dim() {
        return Err(Error::Dimension(format!(
            "{what} has {} weights, group has order {}",
            p.len(),
            ws.dim()
        )));
    }
    Ok(())
}

/// Smeared position `A_σ`: the effect at `x'` is `diag(σ(x' − x))_x`.
pub fn smear_position<T: Real>(ws: &WeylSystem<T>, sigma: &ProbVector<T>) -> Result<Povm<T>> {
    check_len(ws, sigma, "sigma")?;
    let g = ws.group();
    let n = ws.dim();
    let effects = (0..n)
        .map(|xp| {
            let diag: Vec<T> = (0..n).map(|x| sigma.weights[g.sub_idx(xp, x)]).collect();
            CMatrix::from_real_diag(&diag)
        })
        .collect();
    Ok(Povm::from_trusted(group_outcomes(g), effects))
}

/// Smeared momentum `B_τ`: the effect at `χ'` is `Σ_χ τ(χ'χ⁻¹) B({χ})`.
pub fn smear_momentum<T: Real>(ws: &WeylSystem<T>, tau: &ProbVector<T>) -> Result<Povm<T>> {
    check_len(ws, tau, "tau")?;
    let g = ws.group();
    let n = ws.dim();
    let sharp: Vec<CMatrix<T>> = (0..n).map(|c| ws.momentum_point(c)).collect();
    let effects = (0..n)
        .map(|cp| {
            let mut e = CMatrix::zeros(n, n);
            for (c, b) in sharp.iter().enumerate() {
                let w = tau.weights[g.sub_idx(cp, c)];
                if w != T::zero() {
                    e += &b.scale_real(w);
                }
            }
            e
        })
        .collect();
    Ok(Povm::from_trusted(dual_outcomes(g), effects))
}

/// Covariant phase-space observable generated by `S`: the effect at
/// `(x, χ)` is `(1/n) U_x V_χ S V_χ^* U_x^*`.
pub fn cpso_from_state<T: Real>(ws: &WeylSystem<T>, s: &State<T>) -> Result<Povm<T>> {
    let n = ws.dim();
    if s.dim() != n {
        return Err(Error::Dimension(format!(
            "generating state has dimension {}, group has order {n}",
            s.dim()
        )));
    }
    let inv_n = T::one() / T::count(n);
    let mut effects = Vec::with_capacity(n * n);
    for x in 0..n {
        for chi in 0..n {
            effects.push(ws.uv(x, chi).conjugate(s.matrix()).scale_real(inv_n));
        }
    }
    Ok(Povm::from_trusted(phase_space_outcomes(ws.group()), effects))
}

/// Real coordinates of a Hermitian matrix in an orthonormal basis of the
/// Hermitian matrices (diagonal, then `√2·Re`, `√2·Im` of the upper triangle).
fn hermitian_coordinates<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    let n = m.rows();
    let s2 = T::lit(2.0).sqrt();
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        v.push(m[(i, i)].re);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            v.push(m[(i, j)].re * s2);
            v.push(m[(i, j)].im * s2);
        }
    }
    v
}

/// Dimension of the real span of the effects inside the Hermitian matrices,
/// with singular values below `1e-8 · s_max` treated as zero.
pub fn effect_span_rank<T: Real>(p: &Povm<T>) -> usize {
    let rows: Vec<Vec<T>> = p.effects().iter().map(hermitian_coordinates).collect();
    real_rank(&rows, T::lit(1e-8))
}

/// Informational completeness: the effects span all `n²` real dimensions.
///
/// `tol` is accepted for interface symmetry; the rank cutoff is relative
/// (`1e-8 · s_max`) and fixed.
pub fn is_informationally_complete<T: Real>(p: &Povm<T>, _tol: Tolerance<T>) -> bool {
    effect_span_rank(p) == p.dim() * p.dim()
}

/// Largest `‖C(x+y, χγ) − W C(y, γ) W^*‖_F` over all phase-space pairs,
/// with `W = U_x V_χ`. Zero for every covariant phase-space observable.
pub fn verify_cpso_covariance<T: Real>(ws: &WeylSystem<T>, p: &Povm<T>) -> Result<T> {
    let g = ws.group();
    let n = ws.dim();
    if p.len() != n * n || p.dim() != n {
        return Err(Error::Dimension(format!(
            "expected {} phase-space effects of size {n}, got {} of size {}",
            n * n,
            p.len(),
            p.dim()
        )));
    }
    let lookup: HashMap<&Outcome, usize> =
        p.outcomes().iter().enumerate().map(|(k, o)| (o, k)).collect();
    let mut slot = Vec::with_capacity(n * n);
    for o in phase_space_outcomes(g) {
        let k = lookup.get(&o).ok_or_else(|| {
            Error::InvalidPovm(format!("POVM has no effect for phase-space point {o}"))
        })?;
        slot.push(*k);
    }
    let effect = |x: usize, chi: usize| p.effect(slot[x * n + chi]);

    let mut worst = T::zero();
    for x in 0..n {
        for chi in 0..n {
            let w = ws.uv(x, chi);
            for y in 0..n {
                for gamma in 0..n {
                    let moved = w.conjugate(effect(y, gamma));
                    let target = effect(g.add_idx(x, y), g.add_idx(chi, gamma));
                    worst = worst.max(moved.distance(target)?);
                }
            }
        }
    }
    Ok(worst)
}

/// Invariance/covariance residuals of a pair of smeared observables:
/// `U_g Ã(X) U_g^* = Ã(g + X)`, `V_h Ã(X) V_h^* = Ã(X)`,
/// `U_g B̃(Y) U_g^* = B̃(Y)`, `V_h B̃(Y) V_h^* = B̃(hY)`.
pub fn conjugate_pair_residual<T: Real>(
    ws: &WeylSystem<T>,
    position: &Povm<T>,
    momentum: &Povm<T>,
) -> Result<T> {
    let g = ws.group();
    let n = ws.dim();
    if position.len() != n || momentum.len() != n {
        return Err(Error::Dimension("marginals must have |G| outcomes".into()));
    }
    let mut worst = T::zero();
    for s in 0..n {
        let (u, v) = (ws.u(s), ws.v(s));
        for k in 0..n {
            let a = position.effect(k);
            let b = momentum.effect(k);
            worst = worst.max(u.conjugate(a).distance(position.effect(g.add_idx(s, k)))?);
            worst = worst.max(v.conjugate(a).distance(a)?);
            worst = worst.max(u.conjugate(b).distance(b)?);
            worst = worst.max(v.conjugate(b).distance(momentum.effect(g.add_idx(s, k)))?);
        }
    }
    Ok(worst)
}

/// `tr(S W(x, χ))` for every phase-space point; all nonzero is the
/// Weyl-transform criterion for informational completeness of `C_S`.
pub fn weyl_transform<T: Real>(ws: &WeylSystem<T>, s: &State<T>) -> Vec<C<T>> {
    let n = ws.dim();
    let mut out = Vec::with_capacity(n * n);
    for x in 0..n {
        for chi in 0..n {
            out.push(s.matrix().trace_product(&ws.uv(x, chi)));
        }
    }
    out
}

//! Operations, instruments and the structure of W-covariant instruments.
//!
//! Operations are stored as Choi matrices with the output factor first:
//! `choi = Σ_{ij} Φ(|i><j|) ⊗ |i><j|`, so `choi[(a·d_in + i, b·d_in + j)]`
//! is the `(a, b)` entry of `Φ(|i><j|)`.
//!
//! A W-covariant instrument on `G` is parametrised by a positive operator
//! valued density `x ↦ M(x)` with `Σ_x tr M(x) = 1`. With `M'(x) =
//! U_x^* M(x) U_x`, the instrument is the mixture
//! `I_X(ρ) = Σ_x U_x^* I^{M'(x)}_X(ρ) U_x` of translated von Neumann
//! instruments `I^ω_X(ρ) = tr₂[(1 ⊗ A(X)) L (ρ ⊗ ω) L^*]`.

use serde::{Deserialize, Serialize};

use crate::algebra::{CMatrix, Tolerance};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::observables::{group_outcomes, Outcome, Povm, State};
use crate::scalar::{cre, Real, C};
use crate::weyl::WeylSystem;

/// Completely positive, trace non-increasing map in Choi form.
#[derive(Clone, Debug, PartialEq)]
pub struct CpMap<T: Real> {
    dim_in: usize,
    dim_out: usize,
    choi: CMatrix<T>,
}

impl<T: Real> CpMap<T> {
    /// Validates complete positivity and the trace non-increasing property.
    pub fn from_choi(dim_in: usize, dim_out: usize, choi: CMatrix<T>, tol: Tolerance<T>) -> Result<Self> {
        let size = dim_in * dim_out;
        if choi.rows() != size || choi.cols() != size {
            return Err(Error::Dimension(format!(
                "Choi matrix of a {dim_in}->{dim_out} map must be {size}x{size}, got {}x{}",
                choi.rows(),
                choi.cols()
            )));
        }
        match choi.is_psd(tol) {
            Ok(true) => {}
            Ok(false) => return Err(Error::InvalidMap("Choi matrix is not positive".into())),
            Err(_) => return Err(Error::InvalidMap("Choi matrix is not Hermitian".into())),
        }
        let map = Self { dim_in, dim_out, choi };
        let slack = &CMatrix::identity(dim_in) - &map.dual_unit();
        if !slack.hermitian_part().is_psd(tol)? {
            return Err(Error::InvalidMap("operation increases trace".into()));
        }
        Ok(map)
    }

    /// Choi matrix of a linear map given as a closure, without validation.
    pub(crate) fn from_linear_map(
        dim_in: usize,
        dim_out: usize,
        f: impl Fn(&CMatrix<T>) -> CMatrix<T>,
    ) -> Self {
        let size = dim_in * dim_out;
        let mut choi = CMatrix::zeros(size, size);
        for i in 0..dim_in {
            for j in 0..dim_in {
                let image = f(&CMatrix::unit(dim_in, i, j));
                for a in 0..dim_out {
                    for b in 0..dim_out {
                        choi[(a * dim_in + i, b * dim_in + j)] = image[(a, b)];
                    }
                }
            }
        }
        Self { dim_in, dim_out, choi }
    }

    /// `ρ ↦ Σ_k K_k ρ K_k^*`.
    pub fn from_kraus(kraus: &[CMatrix<T>], tol: Tolerance<T>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidMap("at least one Kraus operator is required".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        if kraus.iter().any(|k| k.rows() != dim_out || k.cols() != dim_in) {
            return Err(Error::Dimension("Kraus operators differ in shape".into()));
        }
        let map = Self::from_linear_map(dim_in, dim_out, |t| {
            let mut out = CMatrix::zeros(dim_out, dim_out);
            for k in kraus {
                out += &k.conjugate(t);
            }
            out
        });
        Self::from_choi(dim_in, dim_out, map.choi, tol)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_linear_map(n, n, |t| t.clone())
    }

    /// `ρ ↦ u ρ u^*`.
    pub fn unitary(u: &CMatrix<T>) -> Self {
        Self::from_linear_map(u.cols(), u.rows(), |t| u.conjugate(t))
    }

    pub fn zero(n: usize) -> Self {
        Self {
            dim_in: n,
            dim_out: n,
            choi: CMatrix::zeros(n * n, n * n),
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn choi(&self) -> &CMatrix<T> {
        &self.choi
    }

    /// `Φ(|i><j|)`, read straight off the Choi matrix.
    pub fn image_of_unit(&self, i: usize, j: usize) -> CMatrix<T> {
        let d = self.dim_in;
        CMatrix::from_fn(self.dim_out, self.dim_out, |a, b| self.choi[(a * d + i, b * d + j)])
    }

    /// Schrödinger picture: `Φ(t) = Σ_{ij} t_ij Φ(|i><j|)`.
    pub fn apply(&self, t: &CMatrix<T>) -> Result<CMatrix<T>> {
        if t.rows() != self.dim_in || t.cols() != self.dim_in {
            return Err(Error::Dimension(format!(
                "map acts on {0}x{0} operators, got {1}x{2}",
                self.dim_in,
                t.rows(),
                t.cols()
            )));
        }
        let d = self.dim_in;
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for a in 0..self.dim_out {
            for b in 0..self.dim_out {
                let mut acc = cre(T::zero());
                for i in 0..d {
                    for j in 0..d {
                        let tij = t[(i, j)];
                        if tij.re != T::zero() || tij.im != T::zero() {
                            acc += self.choi[(a * d + i, b * d + j)] * tij;
                        }
                    }
                }
                out[(a, b)] = acc;
            }
        }
        Ok(out)
    }

    /// Heisenberg picture, defined by `tr[ρ Φ^*(A)] = tr[Φ(ρ) A]`.
    pub fn dual_apply(&self, a: &CMatrix<T>) -> Result<CMatrix<T>> {
        if a.rows() != self.dim_out || a.cols() != self.dim_out {
            return Err(Error::Dimension(format!(
                "dual map acts on {0}x{0} operators, got {1}x{2}",
                self.dim_out,
                a.rows(),
                a.cols()
            )));
        }
        let d = self.dim_in;
        Ok(CMatrix::from_fn(d, d, |j, i| {
            let mut acc = cre(T::zero());
            for p in 0..self.dim_out {
                for q in 0..self.dim_out {
                    acc += self.choi[(p * d + i, q * d + j)] * a[(q, p)];
                }
            }
            acc
        }))
    }

    /// `Φ^*(1)`, the effect of this operation.
    pub fn dual_unit(&self) -> CMatrix<T> {
        self.dual_apply(&CMatrix::identity(self.dim_out))
            .expect("identity has the output dimension")
    }

    /// Kraus operators from the Choi eigendecomposition, dropping
    /// eigenvalues below `cutoff`.
    pub fn kraus(&self, cutoff: T) -> Result<Vec<CMatrix<T>>> {
        let d = self.dim_in;
        Ok(self
            .choi
            .psd_factors(cutoff)?
            .into_iter()
            .map(|v| CMatrix::from_fn(self.dim_out, d, |a, i| v[a * d + i]))
            .collect())
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &Self) -> Result<Self> {
        if self.dim_out != after.dim_in {
            return Err(Error::Dimension(format!(
                "cannot follow a map into dimension {} by one on dimension {}",
                self.dim_out, after.dim_in
            )));
        }
        Ok(Self::from_linear_map(self.dim_in, after.dim_out, |t| {
            after
                .apply(&self.apply(t).expect("matching dimension"))
                .expect("matching dimension")
        }))
    }

    /// `Σ_k w_k Φ_k` for maps of a common shape.
    pub(crate) fn combine<'a>(terms: impl IntoIterator<Item = (T, &'a CpMap<T>)>, n: usize) -> Self {
        let mut out = Self::zero(n);
        for (w, m) in terms {
            out.choi += &m.choi.scale_real(w);
        }
        out
    }

    pub fn distance(&self, other: &Self) -> Result<T> {
        self.choi.distance(&other.choi)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
struct CpMapRepr<T: Real> {
    choi: CMatrix<T>,
}

/// Outcome-indexed family of operations whose total is trace preserving.
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument<T: Real> {
    group: Option<Group>,
    outcomes: Vec<Outcome>,
    maps: Vec<CpMap<T>>,
}

impl<T: Real> Instrument<T> {
    /// Validates that the total map is trace preserving. Each map must
    /// already be a valid operation.
    pub fn new(
        group: Option<Group>,
        outcomes: Vec<Outcome>,
        maps: Vec<CpMap<T>>,
        tol: Tolerance<T>,
    ) -> Result<Self> {
        if maps.is_empty() || maps.len() != outcomes.len() {
            return Err(Error::InvalidInstrument(format!(
                "{} outcomes for {} operations",
                outcomes.len(),
                maps.len()
            )));
        }
        let n = maps[0].dim_in;
        if maps.iter().any(|m| m.dim_in != n || m.dim_out != n) {
            return Err(Error::Dimension("instrument operations differ in shape".into()));
        }
        if let Some(g) = &group {
            if g.order() != n {
                return Err(Error::Dimension(format!(
                    "group of order {} on a {n}-dimensional system",
                    g.order()
                )));
            }
        }
        let inst = Self { group, outcomes, maps };
        let gap = inst
            .total_effect()
            .distance(&CMatrix::identity(n))
            .expect("square");
        if gap > tol.abs_eps + tol.rel_eps * T::count(n).sqrt() {
            return Err(Error::InvalidInstrument(format!(
                "total operation is not trace preserving (defect {gap})"
            )));
        }
        Ok(inst)
    }

    /// Validates every map's Choi matrix and the trace condition.
    pub fn from_chois(
        group: Option<Group>,
        outcomes: Vec<Outcome>,
        chois: Vec<CMatrix<T>>,
        tol: Tolerance<T>,
    ) -> Result<Self> {
        let maps = chois
            .into_iter()
            .map(|c| {
                let n = (c.rows() as f64).sqrt().round() as usize;
                if n * n != c.rows() {
                    return Err(Error::Dimension(format!(
                        "Choi matrix size {} is not a square number",
                        c.rows()
                    )));
                }
                CpMap::from_choi(n, n, c, tol)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(group, outcomes, maps, tol)
    }

    /// Single-outcome instrument doing nothing.
    pub fn identity(n: usize) -> Self {
        Self {
            group: None,
            outcomes: vec![Outcome::Name("1".into())],
            maps: vec![CpMap::identity(n)],
        }
    }

    pub(crate) fn from_trusted(group: Option<Group>, outcomes: Vec<Outcome>, maps: Vec<CpMap<T>>) -> Self {
        Self { group, outcomes, maps }
    }

    pub fn group(&self) -> Option<&Group> {
        self.group.as_ref()
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn maps(&self) -> &[CpMap<T>] {
        &self.maps
    }

    pub fn map(&self, k: usize) -> &CpMap<T> {
        &self.maps[k]
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim_in
    }

    /// `Σ_x I_x^*(1)`.
    pub fn total_effect(&self) -> CMatrix<T> {
        let n = self.dim();
        let mut sum = CMatrix::zeros(n, n);
        for m in &self.maps {
            sum += &m.dual_unit();
        }
        sum
    }

    /// The non-selective operation `Σ_x I_x`.
    pub fn total_map(&self) -> CpMap<T> {
        CpMap::combine(self.maps.iter().map(|m| (T::one(), m)), self.dim())
    }

    /// Outcome probabilities `tr I_x(ρ)`, unclipped.
    pub fn probabilities(&self, rho: &State<T>) -> Result<Vec<T>> {
        self.maps
            .iter()
            .map(|m| Ok(m.apply(rho.matrix())?.trace().re))
            .collect()
    }

    /// `t · self + (1 − t) · other`, outcome by outcome.
    pub fn blend(&self, t: T, other: &Self) -> Result<Self> {
        if self.len() != other.len() || self.dim() != other.dim() {
            return Err(Error::Dimension("instruments differ in shape".into()));
        }
        let n = self.dim();
        let maps = self
            .maps
            .iter()
            .zip(&other.maps)
            .map(|(a, b)| CpMap::combine([(t, a), (T::one() - t, b)], n))
            .collect();
        Ok(Self {
            group: self.group.clone(),
            outcomes: self.outcomes.clone(),
            maps,
        })
    }

    /// Largest Choi-matrix Frobenius distance over outcomes.
    pub fn max_distance(&self, other: &Self) -> Result<T> {
        if self.len() != other.len() {
            return Err(Error::Dimension("instruments differ in outcome count".into()));
        }
        self.maps
            .iter()
            .zip(&other.maps)
            .try_fold(T::zero(), |acc, (a, b)| Ok(acc.max(a.distance(b)?)))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
struct InstrumentRepr<T: Real> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<Group>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    outcomes: Option<Vec<Outcome>>,
    maps: Vec<CpMapRepr<T>>,
}

impl<T: Real> Serialize for Instrument<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        InstrumentRepr {
            group: self.group.clone(),
            outcomes: Some(self.outcomes.clone()),
            maps: self
                .maps
                .iter()
                .map(|m| CpMapRepr { choi: m.choi.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Instrument<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = InstrumentRepr::<T>::deserialize(d)?;
        let outcomes = match (repr.outcomes, &repr.group) {
            (Some(o), _) => o,
            (None, Some(g)) => group_outcomes(g),
            (None, None) => (0..repr.maps.len())
                .map(|k| Outcome::Name(k.to_string()))
                .collect(),
        };
        let chois = repr.maps.into_iter().map(|m| m.choi).collect();
        Instrument::from_chois(repr.group, outcomes, chois, Tolerance::default())
            .map_err(serde::de::Error::custom)
    }
}

/// Positive operator density `x ↦ M(x)` on `G` with total trace one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr<T>", into = "MeasureRepr<T>")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct CovariantMeasure<T: Real> {
    group: Group,
    m: Vec<CMatrix<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
struct MeasureRepr<T: Real> {
    group: Group,
    m: Vec<CMatrix<T>>,
}

impl<T: Real> TryFrom<MeasureRepr<T>> for CovariantMeasure<T> {
    type Error = Error;

    fn try_from(r: MeasureRepr<T>) -> Result<Self> {
        CovariantMeasure::new(r.group, r.m, Tolerance::default())
    }
}

impl<T: Real> From<CovariantMeasure<T>> for MeasureRepr<T> {
    fn from(c: CovariantMeasure<T>) -> Self {
        MeasureRepr { group: c.group, m: c.m }
    }
}

impl<T: Real> CovariantMeasure<T> {
    pub fn new(group: Group, m: Vec<CMatrix<T>>, tol: Tolerance<T>) -> Result<Self> {
        let n = group.order();
        if m.len() != n {
            return Err(Error::InvalidMeasure(format!(
                "expected {n} densities for group {group}, got {}",
                m.len()
            )));
        }
        let mut total = T::zero();
        for (x, mx) in m.iter().enumerate() {
            if mx.rows() != n || mx.cols() != n {
                return Err(Error::InvalidMeasure(format!(
                    "density at point {x} must be {n}x{n}, got {}x{}",
                    mx.rows(),
                    mx.cols()
                )));
            }
            match mx.is_psd(tol) {
                Ok(true) => {}
                Ok(false) => {
                    return Err(Error::InvalidMeasure(format!("density at point {x} is not positive")))
                }
                Err(_) => {
                    return Err(Error::InvalidMeasure(format!("density at point {x} is not Hermitian")))
                }
            }
            total += mx.trace().re;
        }
        if (total - T::one()).abs() > tol.abs_eps {
            return Err(Error::InvalidMeasure(format!(
                "measure not normalized: total trace {total}"
            )));
        }
        Ok(Self { group, m })
    }

    /// Point mass at the origin carrying the probe state `ω`.
    pub fn delta(group: Group, omega: &State<T>) -> Result<Self> {
        Self::point_mass(group, 0, omega)
    }

    /// Point mass at basis index `x` carrying `ω`.
    pub fn point_mass(group: Group, x: usize, omega: &State<T>) -> Result<Self> {
        let n = group.order();
        if omega.dim() != n {
            return Err(Error::Dimension(format!(
                "probe of dimension {} for a group of order {n}",
                omega.dim()
            )));
        }
        let mut m = vec![CMatrix::zeros(n, n); n];
        m[x] = omega.matrix().clone();
        Ok(Self { group, m })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn densities(&self) -> &[CMatrix<T>] {
        &self.m
    }

    pub fn density(&self, x: usize) -> &CMatrix<T> {
        &self.m[x]
    }

    /// `M'(x) = U_x^* M(x) U_x`, i.e. entries `M(x)[i+x, j+x]`.
    pub fn shifted(&self, x: usize) -> CMatrix<T> {
        let g = &self.group;
        let n = g.order();
        let mx = &self.m[x];
        CMatrix::from_fn(n, n, |i, j| mx[(g.add_idx(i, x), g.add_idx(j, x))])
    }

    /// Total value `M'(G) = Σ_x M'(x)`, a density operator.
    pub fn total_shifted(&self) -> CMatrix<T> {
        let n = self.group.order();
        let mut sum = CMatrix::zeros(n, n);
        for x in 0..n {
            sum += &self.shifted(x);
        }
        sum
    }

    /// Mixture weights `ν(x) = tr M(x)` and probe states
    /// `ω(x) = M'(x) / ν(x)`; `None` where `ν(x) = 0`.
    pub fn probes(&self) -> Vec<(T, Option<State<T>>)> {
        (0..self.group.order())
            .map(|x| {
                let nu = self.m[x].trace().re;
                if nu > T::zero() {
                    (nu, Some(State::from_trusted(self.shifted(x).scale_real(T::one() / nu))))
                } else {
                    (T::zero(), None)
                }
            })
            .collect()
    }

    /// `t · self + (1 − t) · other`.
    pub fn blend(&self, t: T, other: &Self) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::InvalidMeasure("measures live on different groups".into()));
        }
        let m = self
            .m
            .iter()
            .zip(&other.m)
            .map(|(a, b)| &a.scale_real(t) + &b.scale_real(T::one() - t))
            .collect();
        Ok(Self {
            group: self.group.clone(),
            m,
        })
    }

    /// Largest Frobenius distance between densities at the same point.
    pub fn max_distance(&self, other: &Self) -> Result<T> {
        if self.m.len() != other.m.len() {
            return Err(Error::Dimension("measures on groups of different order".into()));
        }
        self.m
            .iter()
            .zip(&other.m)
            .try_fold(T::zero(), |acc, (a, b)| Ok(acc.max(a.distance(b)?)))
    }

    pub(crate) fn from_trusted(group: Group, m: Vec<CMatrix<T>>) -> Self {
        Self { group, m }
    }
}

/// Coupling `L`: the permutation `e_a ⊗ e_b ↦ e_a ⊗ e_{a+b}` on `ℋ ⊗ ℋ`.
pub fn coupling_unitary<T: Real>(ws: &WeylSystem<T>) -> CMatrix<T> {
    let g = ws.group();
    let n = ws.dim();
    let mut l = CMatrix::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            l[(a * n + g.add_idx(a, b), a * n + b)] = cre(T::one());
        }
    }
    l
}

/// Largest residual of the intertwining relations
/// `L(U_x ⊗ U_y) = (U_x ⊗ U_{x+y})L` and `L(V_χ ⊗ V_γ) = (V_{χγ⁻¹} ⊗ V_γ)L`.
pub fn coupling_intertwining_residual<T: Real>(ws: &WeylSystem<T>) -> T {
    let g = ws.group();
    let n = ws.dim();
    let l = coupling_unitary(ws);
    let mut worst = T::zero();
    for x in 0..n {
        for y in 0..n {
            let lhs = l.matmul(&ws.u(x).kron(ws.u(y)));
            let rhs = ws.u(x).kron(ws.u(g.add_idx(x, y))).matmul(&l);
            worst = worst.max((&lhs - &rhs).max_abs());
        }
    }
    for chi in 0..n {
        for gamma in 0..n {
            let lhs = l.matmul(&ws.v(chi).kron(ws.v(gamma)));
            let rhs = ws.v(g.sub_idx(chi, gamma)).kron(ws.v(gamma)).matmul(&l);
            worst = worst.max((&lhs - &rhs).max_abs());
        }
    }
    worst
}

/// Von Neumann measurement model with probe `ω` and pointer `A`:
/// `I^ω_x(ρ) = tr₂[(1 ⊗ A({x})) L (ρ ⊗ ω) L^*]`.
pub fn standard_instrument<T: Real>(ws: &WeylSystem<T>, omega: &State<T>) -> Result<Instrument<T>> {
    let n = ws.dim();
    if omega.dim() != n {
        return Err(Error::Dimension(format!(
            "probe of dimension {} for a group of order {n}",
            omega.dim()
        )));
    }
    let l = coupling_unitary(ws);
    let maps = (0..n)
        .map(|x| {
            let pointer = CMatrix::identity(n).kron(&ws.position_point(x));
            CpMap::from_linear_map(n, n, |rho| {
                let coupled = l.conjugate(&rho.kron(omega.matrix()));
                pointer
                    .matmul(&coupled)
                    .partial_trace_second(n, n)
                    .expect("composite dimension")
            })
        })
        .collect();
    Ok(Instrument::from_trusted(
        Some(ws.group().clone()),
        group_outcomes(ws.group()),
        maps,
    ))
}

/// The W-covariant instrument of a measure `M`, assembled as the mixture of
/// translated von Neumann instruments. Points with `tr M(x) = 0` are skipped.
pub fn covariant_instrument<T: Real>(ws: &WeylSystem<T>, mm: &CovariantMeasure<T>) -> Result<Instrument<T>> {
    let g = ws.group();
    if mm.group() != g {
        return Err(Error::InvalidMeasure(format!(
            "measure on {} used with a Weyl system on {}",
            mm.group(),
            g
        )));
    }
    let n = ws.dim();
    let mut chois = vec![CMatrix::zeros(n * n, n * n); n];
    for x in 0..n {
        if mm.density(x).trace().re <= T::zero() {
            continue;
        }
        // ν(x)ω(x) = M'(x); U_x^* I^{M'(x)}_k(|i><j|) U_x = M'(x)[k-i, k-j] |i-x><j-x|
        let probe = mm.shifted(x);
        for (k, choi) in chois.iter_mut().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let w = probe[(g.sub_idx(k, i), g.sub_idx(k, j))];
                    choi[(g.sub_idx(i, x) * n + i, g.sub_idx(j, x) * n + j)] += w;
                }
            }
        }
    }
    let maps = chois
        .into_iter()
        .map(|choi| CpMap {
            dim_in: n,
            dim_out: n,
            choi,
        })
        .collect();
    Ok(Instrument::from_trusted(Some(g.clone()), group_outcomes(g), maps))
}

/// Observable measured by an instrument: `x ↦ I_x^*(1)`.
pub fn associated_observable<T: Real>(inst: &Instrument<T>) -> Povm<T> {
    Povm::from_trusted(
        inst.outcomes.clone(),
        inst.maps.iter().map(|m| m.dual_unit()).collect(),
    )
}

/// Instrument for `first` followed by `second`: outcome `(x, y)` applies
/// `second_y ∘ first_x`. Outcomes are ordered with `x` major.
pub fn compose_sequential<T: Real>(first: &Instrument<T>, second: &Instrument<T>) -> Result<Instrument<T>> {
    if first.dim() != second.dim() {
        return Err(Error::Dimension(format!(
            "cannot compose instruments on dimensions {} and {}",
            first.dim(),
            second.dim()
        )));
    }
    let mut outcomes = Vec::with_capacity(first.len() * second.len());
    let mut maps = Vec::with_capacity(first.len() * second.len());
    for (a, fa) in first.outcomes.iter().zip(&first.maps) {
        for (b, sb) in second.outcomes.iter().zip(&second.maps) {
            outcomes.push(Outcome::Seq(Box::new(a.clone()), Box::new(b.clone())));
            maps.push(fa.then(sb)?);
        }
    }
    Ok(Instrument::from_trusted(None, outcomes, maps))
}

/// Largest Frobenius residual of the covariance condition
/// `I_{x+y}(ρ) = W I_y(W^* ρ W) W^*`, `W = U_x V_χ`, over all `x`, `χ`,
/// outcome points `y` and matrix units `ρ = |i><j|`.
pub fn verify_covariance<T: Real>(ws: &WeylSystem<T>, inst: &Instrument<T>) -> Result<T> {
    let g = ws.group();
    let n = ws.dim();
    if inst.len() != n || inst.dim() != n {
        return Err(Error::Dimension(format!(
            "covariance needs an instrument with {n} outcomes on dimension {n}, got {} on {}",
            inst.len(),
            inst.dim()
        )));
    }
    let mut worst = T::zero();
    for x in 0..n {
        for chi in 0..n {
            let w = ws.uv(x, chi);
            let w_adj = w.adjoint();
            for y in 0..n {
                let target = inst.map(g.add_idx(x, y));
                let source = inst.map(y);
                for i in 0..n {
                    for j in 0..n {
                        let lhs = target.image_of_unit(i, j);
                        let pulled = w_adj.matmul(&CMatrix::unit(n, i, j)).matmul(&w);
                        let rhs = w.conjugate(&source.apply(&pulled)?);
                        worst = worst.max(lhs.distance(&rhs)?);
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Residual above which an instrument is refused as non-covariant.
pub fn covariance_gate<T: Real>() -> T {
    T::lit(1e-6)
}

/// Recover the measure of a W-covariant instrument.
///
/// For every `(γ, y, χ)` the instrument fixes
/// `tr[V_γ U_y F M'(χ)] = tr[V_χ U_y^* F M^T(γ⁻¹)]` with
/// `T = U_y V_{χγ}^* |e_0><e_0|`, where `F M^T(γ⁻¹) = Σ_k γ(k) I_k(T)` and
/// `F M'(χ) = Σ_x conj(χ(x)) M'(x)`. Each `F M'(χ)` is then solved for in
/// the Weyl operator basis and Fourier-inverted.
pub fn reconstruct_measure<T: Real>(ws: &WeylSystem<T>, inst: &Instrument<T>) -> Result<CovariantMeasure<T>> {
    let residual = verify_covariance(ws, inst)?;
    if !(residual <= covariance_gate()) {
        return Err(Error::NotCovariant {
            residual: residual.as_f64(),
        });
    }
    let g = ws.group();
    let n = ws.dim();
    let rho0 = CMatrix::unit(n, 0, 0);

    // basis B_(γ,y) = (V_γ U_y)^*, so that tr[V_γ U_y X] = <B_(γ,y), X>_HS
    let basis: Vec<CMatrix<T>> = (0..n * n)
        .map(|p| ws.v(p / n).matmul(ws.u(p % n)).adjoint())
        .collect();
    let solver = OperatorBasisSolver::new(&basis, T::lit(1e-10))?;

    let mut fourier_shifted = Vec::with_capacity(n);
    for chi in 0..n {
        let mut coefficients = Vec::with_capacity(n * n);
        for gamma in 0..n {
            for y in 0..n {
                let chi_gamma = g.add_idx(chi, gamma);
                let probe = ws
                    .u(y)
                    .matmul(&ws.v(chi_gamma).adjoint())
                    .matmul(&rho0);
                let mut transformed = CMatrix::zeros(n, n);
                for k in 0..n {
                    let out = inst.map(k).apply(&probe)?;
                    transformed += &out.scale(g.pairing_idx(gamma, k));
                }
                let test = ws.v(chi).matmul(&ws.u(y).adjoint());
                coefficients.push(test.trace_product(&transformed));
            }
        }
        fourier_shifted.push(solver.solve(&coefficients));
    }

    let inv_n = T::one() / T::count(n);
    let m = (0..n)
        .map(|x| {
            let mut shifted = CMatrix::zeros(n, n);
            for (chi, f) in fourier_shifted.iter().enumerate() {
                shifted += &f.scale(g.pairing_idx(chi, x));
            }
            ws.u(x).conjugate(&shifted.scale_real(inv_n)).hermitian_part()
        })
        .collect();
    CovariantMeasure::new(g.clone(), m, Tolerance::default())
}

/// Least-squares solver for `X` given `<B_p, X>_HS` over a family of
/// operators `B_p`, via the pseudo-inverse of their Gram matrix.
struct OperatorBasisSolver<'a, T: Real> {
    basis: &'a [CMatrix<T>],
    gram_pinv: CMatrix<T>,
}

impl<'a, T: Real> OperatorBasisSolver<'a, T> {
    fn new(basis: &'a [CMatrix<T>], rel_cutoff: T) -> Result<Self> {
        let k = basis.len();
        let gram = CMatrix::from_fn(k, k, |p, q| basis[p].hs_inner(&basis[q]));
        let (values, vectors) = gram.eigh()?;
        let top = values.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        let inv: Vec<T> = values
            .iter()
            .map(|&v| if v.abs() > rel_cutoff * top { T::one() / v } else { T::zero() })
            .collect();
        let gram_pinv = vectors
            .matmul(&CMatrix::from_real_diag(&inv))
            .matmul(&vectors.adjoint());
        Ok(Self { basis, gram_pinv })
    }

    /// `X = Σ_q α_q B_q` with `α = G⁺ b`.
    fn solve(&self, b: &[C<T>]) -> CMatrix<T> {
        let alpha = self.gram_pinv.apply_vec(b);
        let (r, c) = (self.basis[0].rows(), self.basis[0].cols());
        let mut x = CMatrix::zeros(r, c);
        for (a, op) in alpha.iter().zip(self.basis) {
            x += &op.scale(*a);
        }
        x
    }
}

/// Largest violation of the trace-based reconstruction identity
/// `Σ_{x,χ} tr[V_χ U_x T] <U_x^* V_χ^* f₁, f₂> = n <T f₁, f₂>`.
pub fn reconstruction_identity_residual<T: Real>(
    ws: &WeylSystem<T>,
    t: &CMatrix<T>,
    f1: &[C<T>],
    f2: &[C<T>],
) -> T {
    let n = ws.dim();
    let inner = |u: &[C<T>], v: &[C<T>]| {
        u.iter()
            .zip(v)
            .fold(cre(T::zero()), |acc, (a, b)| acc + a * b.conj())
    };
    let mut lhs = cre(T::zero());
    for x in 0..n {
        for chi in 0..n {
            let vu = ws.v(chi).matmul(ws.u(x));
            let coeff = vu.trace_product(t);
            let moved = vu.adjoint().apply_vec(f1);
            lhs += coeff * inner(&moved, f2);
        }
    }
    let rhs = inner(&t.apply_vec(f1), f2) * T::count(n);
    (lhs - rhs).norm()
}

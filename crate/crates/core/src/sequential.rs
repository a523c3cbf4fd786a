//! Position followed by momentum: the joint observable of a covariant
//! instrument, its marginals, noise measures and generating state.

use serde::Serialize;

use crate::algebra::CMatrix;
use crate::error::{Error, Result};
use crate::group::Group;
use crate::instruments::{
    covariance_gate, covariant_instrument, standard_instrument, verify_covariance, CovariantMeasure, Instrument,
};
use crate::observables::{
    cpso_from_state, dual_outcomes, group_outcomes, phase_space_outcomes, smear_momentum, smear_position,
    verify_cpso_covariance, conjugate_pair_residual, Povm, ProbVector, State,
};
use crate::scalar::Real;
use crate::weyl::WeylSystem;

/// `C(x, χ) = I_x^*(B({χ}))`, outcomes ordered with `x` major.
///
/// Refuses instruments whose covariance residual exceeds the gate, since
/// the result would not be a covariant phase-space observable.
pub fn joint_observable<T: Real>(ws: &WeylSystem<T>, inst: &Instrument<T>) -> Result<Povm<T>> {
    let residual = verify_covariance(ws, inst)?;
    if !(residual <= covariance_gate()) {
        return Err(Error::NotCovariant {
            residual: residual.as_f64(),
        });
    }
    let n = ws.dim();
    let sharp_b: Vec<CMatrix<T>> = (0..n).map(|c| ws.momentum_point(c)).collect();
    let mut effects = Vec::with_capacity(n * n);
    for x in 0..n {
        for b in &sharp_b {
            effects.push(inst.map(x).dual_apply(b)?);
        }
    }
    Ok(Povm::from_trusted(phase_space_outcomes(ws.group()), effects))
}

/// Marginals of a phase-space observable: `(C(· × Ĝ), C(G × ·))`.
pub fn marginals<T: Real>(ws: &WeylSystem<T>, joint: &Povm<T>) -> Result<(Povm<T>, Povm<T>)> {
    let n = ws.dim();
    if joint.len() != n * n {
        return Err(Error::Dimension(format!(
            "expected {} phase-space effects, got {}",
            n * n,
            joint.len()
        )));
    }
    let mut a = vec![CMatrix::zeros(n, n); n];
    let mut b = vec![CMatrix::zeros(n, n); n];
    for x in 0..n {
        for chi in 0..n {
            let e = joint.effect(x * n + chi);
            a[x] += e;
            b[chi] += e;
        }
    }
    Ok((
        Povm::from_trusted(group_outcomes(ws.group()), a),
        Povm::from_trusted(dual_outcomes(ws.group()), b),
    ))
}

/// Noise measures of the marginals: `σ(x) = <e_x|M'(G)|e_x>` and
/// `τ(χ) = tr[B({χ⁻¹}) M'(G)]`.
pub fn noise_measures<T: Real>(
    ws: &WeylSystem<T>,
    mm: &CovariantMeasure<T>,
) -> Result<(ProbVector<T>, ProbVector<T>)> {
    check_group(ws, mm)?;
    let g = ws.group();
    let n = ws.dim();
    let total = mm.total_shifted();
    let sigma = (0..n).map(|x| total[(x, x)].re).collect();
    let tau = (0..n)
        .map(|chi| ws.momentum_point(g.neg_idx(chi)).trace_product(&total).re)
        .collect();
    Ok((ProbVector::over_group(g, sigma)?, ProbVector::over_dual(g, tau)?))
}

/// Antilinear check map `Ť[i, j] = T[−j, −i]`, characterised by
/// `<f₁, Ť f₂> = <f̌₂, T f̌₁>` with `f̌(x) = conj(f(−x))`.
pub fn check_map<T: Real>(ws: &WeylSystem<T>, t: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = ws.dim();
    if t.rows() != n || t.cols() != n {
        return Err(Error::Dimension(format!(
            "check map acts on {n}x{n} matrices, got {}x{}",
            t.rows(),
            t.cols()
        )));
    }
    let g = ws.group();
    Ok(CMatrix::from_fn(n, n, |i, j| t[(g.neg_idx(j), g.neg_idx(i))]))
}

/// `S = (M'(G))ˇ`, the state generating the joint observable.
pub fn generating_state<T: Real>(ws: &WeylSystem<T>, mm: &CovariantMeasure<T>) -> Result<State<T>> {
    check_group(ws, mm)?;
    Ok(State::from_trusted(check_map(ws, &mm.total_shifted())?))
}

/// Sequential implementation of `C_S`: the standard instrument with probe
/// `ω = Š`, together with its joint observable.
pub fn sequential_from_cpso<T: Real>(ws: &WeylSystem<T>, s: &State<T>) -> Result<(Instrument<T>, Povm<T>)> {
    let omega = State::from_trusted(check_map(ws, s.matrix())?);
    let inst = standard_instrument(ws, &omega)?;
    let joint = joint_observable(ws, &inst)?;
    Ok((inst, joint))
}

fn check_group<T: Real>(ws: &WeylSystem<T>, mm: &CovariantMeasure<T>) -> Result<()> {
    if mm.group() != ws.group() {
        return Err(Error::InvalidMeasure(format!(
            "measure on {} used with a Weyl system on {}",
            mm.group(),
            ws.group()
        )));
    }
    Ok(())
}

/// Largest residuals of the consistency relations checked by a run.
#[derive(Clone, Debug, Serialize)]
pub struct PipelineResiduals {
    /// Covariance of the instrument.
    pub instrument_covariance: f64,
    /// Covariance of the joint observable on phase space.
    pub joint_covariance: f64,
    /// `Σ C − 1`.
    pub joint_normalization: f64,
    /// Position marginal against `A_σ`.
    pub position_smearing: f64,
    /// Momentum marginal against `B_τ`.
    pub momentum_smearing: f64,
    /// Joint observable against `C_S`.
    pub generating_state: f64,
    /// Invariance and covariance of the marginal pair.
    pub marginal_symmetry: f64,
}

impl PipelineResiduals {
    pub fn max(&self) -> f64 {
        [
            self.instrument_covariance,
            self.joint_covariance,
            self.joint_normalization,
            self.position_smearing,
            self.momentum_smearing,
            self.generating_state,
            self.marginal_symmetry,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Everything one pipeline run produces from a measure.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct SequentialResult<T: Real> {
    pub group: Group,
    pub measure: CovariantMeasure<T>,
    pub joint: Povm<T>,
    pub marginal_a: Povm<T>,
    pub marginal_b: Povm<T>,
    pub sigma: ProbVector<T>,
    pub tau: ProbVector<T>,
    pub generating_state: State<T>,
    pub residuals: PipelineResiduals,
}

impl<T: Real> SequentialResult<T> {
    /// Builds the covariant instrument of `mm` and every derived object,
    /// recording the residual of each relation between them.
    pub fn run(ws: &WeylSystem<T>, mm: &CovariantMeasure<T>) -> Result<Self> {
        check_group(ws, mm)?;
        let inst = covariant_instrument(ws, mm)?;
        let instrument_covariance = verify_covariance(ws, &inst)?;
        let joint = joint_observable(ws, &inst)?;
        let (marginal_a, marginal_b) = marginals(ws, &joint)?;
        let (sigma, tau) = noise_measures(ws, mm)?;
        let s = generating_state(ws, mm)?;

        let residuals = PipelineResiduals {
            instrument_covariance: instrument_covariance.as_f64(),
            joint_covariance: verify_cpso_covariance(ws, &joint)?.as_f64(),
            joint_normalization: joint.normalization_residual().as_f64(),
            position_smearing: marginal_a
                .max_effect_distance(&smear_position(ws, &sigma)?)?
                .as_f64(),
            momentum_smearing: marginal_b
                .max_effect_distance(&smear_momentum(ws, &tau)?)?
                .as_f64(),
            generating_state: joint.max_effect_distance(&cpso_from_state(ws, &s)?)?.as_f64(),
            marginal_symmetry: conjugate_pair_residual(ws, &marginal_a, &marginal_b)?.as_f64(),
        };
        Ok(Self {
            group: ws.group().clone(),
            measure: mm.clone(),
            joint,
            marginal_a,
            marginal_b,
            sigma,
            tau,
            generating_state: s,
            residuals,
        })
    }

    /// Outcome distributions of the joint observable and both marginals
    /// for an input state.
    pub fn distributions(&self, rho: &State<T>) -> Result<Distributions<T>> {
        Ok(Distributions {
            joint: self.joint.measure(rho)?,
            position: self.marginal_a.measure(rho)?,
            momentum: self.marginal_b.measure(rho)?,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct Distributions<T: Real> {
    pub joint: ProbVector<T>,
    pub position: ProbVector<T>,
    pub momentum: ProbVector<T>,
}

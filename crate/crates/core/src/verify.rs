//! Numerical verification suites behind `seqconj verify`.
//!
//! Each suite runs a fixed list of checks on one group and reports the
//! largest residual of every check against a pinned tolerance.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::algebra::CMatrix;
use crate::error::{Error, Result};
use crate::group::Group;
use crate::instruments::{
    coupling_intertwining_residual, covariant_instrument, reconstruct_measure, reconstruction_identity_residual,
    verify_covariance, Instrument,
};
use crate::observables::{cpso_from_state, smear_momentum, smear_position, State};
use crate::random::{random_measure, random_state, random_vector, ginibre, rng};
use crate::sequential::{
    check_map, generating_state, joint_observable, marginals, noise_measures, sequential_from_cpso,
};
use crate::spin::{
    frame_equivalence_residual, kronecker_factorization_check, state_from_bloch, tradeoff_check, unsharp_spin,
    SpinFrame,
};
use crate::weyl::WeylSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Weyl,
    Theorem41,
    Prop42,
    Prop43,
    Corollary44,
    Spin,
    All,
}

impl Suite {
    pub const INDIVIDUAL: [Suite; 6] = [
        Suite::Weyl,
        Suite::Theorem41,
        Suite::Prop42,
        Suite::Prop43,
        Suite::Corollary44,
        Suite::Spin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Weyl => "weyl",
            Suite::Theorem41 => "theorem41",
            Suite::Prop42 => "prop42",
            Suite::Prop43 => "prop43",
            Suite::Corollary44 => "corollary44",
            Suite::Spin => "spin",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::INDIVIDUAL
            .into_iter()
            .chain([Suite::All])
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown suite '{s}' (expected weyl, theorem41, prop42, prop43, corollary44, spin or all)"
                ))
            })
    }
}

/// Largest residual of one check and the bound it must respect.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            residual,
            tolerance,
            passed: residual <= tolerance,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub group: Group,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Settings shared by every suite.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub group: Group,
    pub seed: u64,
    /// Random samples per randomized check.
    pub samples: usize,
}

/// Running maximum that treats NaN as failure.
#[derive(Default)]
struct Worst(f64);

impl Worst {
    fn see(&mut self, r: f64) {
        if r.is_nan() {
            self.0 = f64::INFINITY;
        } else {
            self.0 = self.0.max(r);
        }
    }
}

/// Runs one suite, or every suite for [`Suite::All`].
pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<Vec<SuiteReport>> {
    if suite == Suite::All {
        return Suite::INDIVIDUAL
            .into_iter()
            .map(|s| run_single(s, cfg))
            .collect();
    }
    Ok(vec![run_single(suite, cfg)?])
}

fn run_single(suite: Suite, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let ws = WeylSystem::<f64>::new(cfg.group.clone());
    // every suite draws from its own stream so results do not depend on
    // which other suites ran first
    let offset = Suite::INDIVIDUAL.iter().position(|s| *s == suite).unwrap_or(0) as u64;
    let mut rng = rng(cfg.seed.wrapping_add(offset));
    let checks = match suite {
        Suite::Weyl => weyl_checks(&ws),
        Suite::Theorem41 => theorem41_checks(&ws, &mut rng, cfg.samples)?,
        Suite::Prop42 => prop42_checks(&ws, &mut rng, cfg.samples)?,
        Suite::Prop43 => prop43_checks(&ws, &mut rng, cfg.samples)?,
        Suite::Corollary44 => corollary44_checks(&ws, &mut rng, cfg.samples)?,
        Suite::Spin => spin_checks(&mut rng, cfg.samples)?,
        Suite::All => unreachable!("expanded by run_suite"),
    };
    let group = if suite == Suite::Spin {
        Group::cyclic(2)?
    } else {
        cfg.group.clone()
    };
    Ok(SuiteReport {
        suite,
        group,
        seed: cfg.seed,
        samples: cfg.samples,
        checks,
    })
}

fn weyl_checks(ws: &WeylSystem<f64>) -> Vec<Check> {
    let n = ws.dim();
    let f = ws.fourier();
    let unitarity = f.matmul(&f.adjoint()).distance(&CMatrix::identity(n)).unwrap_or(f64::INFINITY);
    vec![
        Check::new("weyl relation", ws.weyl_relation_residual(), 1e-12),
        Check::new("snag reconstruction", ws.snag_residual(), 1e-10),
        Check::new("fourier unitarity", unitarity, 1e-12),
        Check::new("coupling intertwiners", coupling_intertwining_residual(ws), 1e-12),
    ]
}

/// Largest violation of the probability law over random input states:
/// the deviation of the total from 1 and the most negative probability.
pub fn probability_law_residuals<R: Rng + ?Sized>(
    inst: &Instrument<f64>,
    rng: &mut R,
    states: usize,
) -> Result<(f64, f64)> {
    let mut sum_err = Worst::default();
    let mut negativity = Worst::default();
    for _ in 0..states {
        let rho = random_state(rng, inst.dim());
        let p = inst.probabilities(&rho)?;
        sum_err.see((p.iter().sum::<f64>() - 1.0).abs());
        for q in p {
            negativity.see(-q);
        }
    }
    Ok((sum_err.0, negativity.0))
}

fn theorem41_checks<R: Rng + ?Sized>(ws: &WeylSystem<f64>, rng: &mut R, samples: usize) -> Result<Vec<Check>> {
    let g = ws.group();
    let n = ws.dim();
    let (mut cov, mut round_trip, mut rebuilt) = (Worst::default(), Worst::default(), Worst::default());
    let (mut sum_err, mut negativity, mut convexity) = (Worst::default(), Worst::default(), Worst::default());
    let mut identity = Worst::default();
    for _ in 0..samples {
        let mm = random_measure(rng, g);
        let inst = covariant_instrument(ws, &mm)?;
        cov.see(verify_covariance(ws, &inst)?);
        let back = reconstruct_measure(ws, &inst)?;
        round_trip.see(back.max_distance(&mm)?);
        rebuilt.see(covariant_instrument(ws, &back)?.max_distance(&inst)?);
        let (s, neg) = probability_law_residuals(&inst, rng, 10)?;
        sum_err.see(s);
        negativity.see(neg);

        let other = random_measure(rng, g);
        let t: f64 = rng.gen();
        let blended = covariant_instrument(ws, &mm.blend(t, &other)?)?;
        let expected = inst.blend(t, &covariant_instrument(ws, &other)?)?;
        convexity.see(blended.max_distance(&expected)?);

        let op = ginibre(rng, n, n);
        let (f1, f2) = (random_vector(rng, n), random_vector(rng, n));
        identity.see(reconstruction_identity_residual(ws, &op, &f1, &f2));
    }
    Ok(vec![
        Check::new("instrument covariance", cov.0, 1e-9),
        Check::new("measure round trip", round_trip.0, 1e-8),
        Check::new("instrument round trip", rebuilt.0, 1e-8),
        Check::new("probability sum", sum_err.0, 1e-9),
        Check::new("probability negativity", negativity.0, 1e-12),
        Check::new("convexity", convexity.0, 1e-10),
        Check::new("reconstruction identity", identity.0, 1e-9),
    ])
}

fn prop42_checks<R: Rng + ?Sized>(ws: &WeylSystem<f64>, rng: &mut R, samples: usize) -> Result<Vec<Check>> {
    let (mut pos, mut mom, mut marg) = (Worst::default(), Worst::default(), Worst::default());
    for _ in 0..samples {
        let mm = random_measure(rng, ws.group());
        let inst = covariant_instrument(ws, &mm)?;
        let joint = joint_observable(ws, &inst)?;
        let (a, b) = marginals(ws, &joint)?;
        let (sigma, tau) = noise_measures(ws, &mm)?;
        pos.see(a.max_effect_distance(&smear_position(ws, &sigma)?)?);
        mom.see(b.max_effect_distance(&smear_momentum(ws, &tau)?)?);
        marg.see(a.max_effect_distance(&crate::instruments::associated_observable(&inst))?);
    }
    Ok(vec![
        Check::new("position marginal smearing", pos.0, 1e-9),
        Check::new("momentum marginal smearing", mom.0, 1e-9),
        Check::new("position marginal is instrument observable", marg.0, 1e-10),
    ])
}

fn prop43_checks<R: Rng + ?Sized>(ws: &WeylSystem<f64>, rng: &mut R, samples: usize) -> Result<Vec<Check>> {
    let n = ws.dim();
    let (mut joint_err, mut norm_err, mut involution) = (Worst::default(), Worst::default(), Worst::default());
    for _ in 0..samples {
        let mm = random_measure(rng, ws.group());
        let joint = joint_observable(ws, &covariant_instrument(ws, &mm)?)?;
        let s = generating_state(ws, &mm)?;
        joint_err.see(joint.max_effect_distance(&cpso_from_state(ws, &s)?)?);

        let t = ginibre(rng, n, n);
        let checked = check_map(ws, &t)?;
        norm_err.see((checked.trace_norm() - t.trace_norm()).abs());
        involution.see(check_map(ws, &checked)?.distance(&t)?);
    }
    Ok(vec![
        Check::new("joint equals generated observable", joint_err.0, 1e-9),
        Check::new("check map trace norm", norm_err.0, 1e-10),
        Check::new("check map involution", involution.0, 1e-10),
    ])
}

fn corollary44_checks<R: Rng + ?Sized>(ws: &WeylSystem<f64>, rng: &mut R, samples: usize) -> Result<Vec<Check>> {
    let (mut joint_err, mut loop_err) = (Worst::default(), Worst::default());
    for _ in 0..samples {
        let s: State<f64> = random_state(rng, ws.dim());
        let (inst, joint) = sequential_from_cpso(ws, &s)?;
        joint_err.see(joint.max_effect_distance(&cpso_from_state(ws, &s)?)?);
        let mm = reconstruct_measure(ws, &inst)?;
        loop_err.see(generating_state(ws, &mm)?.matrix().distance(s.matrix())?);
    }
    Ok(vec![
        Check::new("sequential implementation", joint_err.0, 1e-9),
        Check::new("probe and generating state loop", loop_err.0, 1e-9),
    ])
}

/// Random orthonormal pair of axes.
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R) -> SpinFrame<f64> {
    loop {
        let u: [f64; 3] = [0, 1, 2].map(|_| rng.sample(rand_distr::StandardNormal));
        let v: [f64; 3] = [0, 1, 2].map(|_| rng.sample(rand_distr::StandardNormal));
        let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        let a = u.map(|c| c / nu);
        let overlap = a[0] * v[0] + a[1] * v[1] + a[2] * v[2];
        let w = [0, 1, 2].map(|k| v[k] - overlap * a[k]);
        let nw = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        if nu > 1e-3 && nw > 1e-3 {
            if let Ok(frame) = SpinFrame::new(a, w.map(|c| c / nw)) {
                return frame;
            }
        }
    }
}

fn spin_checks<R: Rng + ?Sized>(rng: &mut R, samples: usize) -> Result<Vec<Check>> {
    let (mut factor, mut tradeoff, mut equivalence) = (Worst::default(), Worst::default(), Worst::default());
    let mut saturation = Worst::default();
    for _ in 0..samples {
        let frame = random_frame(rng);
        let omega = random_state(rng, 2);
        let rho = random_state(rng, 2);
        factor.see(kronecker_factorization_check(&frame, &omega, &rho)?);
        tradeoff.see(tradeoff_check(&frame, &omega)?);
        equivalence.see(frame_equivalence_residual(&frame));
        let along_a = state_from_bloch(&frame.a())?;
        saturation.see((tradeoff_check(&frame, &along_a)? - 1.0).abs());
    }
    let frame = SpinFrame::<f64>::standard();
    let worked = unsharp_spin(&frame, &State::basis(2, 0))?;
    Ok(vec![
        Check::new("kronecker factorization", factor.0, 1e-10),
        Check::new("trade-off bound", (tradeoff.0 - 1.0).max(0.0), 1e-12),
        Check::new("trade-off saturation along a", saturation.0, 1e-9),
        Check::new("frame weyl equivalence", equivalence.0, 1e-10),
        Check::new("worked example s", (worked.s - 1.0).abs(), 1e-12),
        Check::new("worked example t", worked.t.abs(), 1e-12),
    ])
}

//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use common::*;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use seqconj::instruments::{
    associated_observable, compose_sequential, coupling_unitary, covariant_instrument, reconstruct_measure,
    standard_instrument, verify_covariance, CovariantMeasure,
};
use seqconj::observables::{cpso_from_state, effect_span_rank, is_informationally_complete, smear_momentum, smear_position};
use seqconj::random::{ginibre, random_measure, random_state, random_vector, rng};
use seqconj::sequential::{
    check_map, generating_state, joint_observable, marginals, noise_measures, sequential_from_cpso,
};
use seqconj::spin::{kronecker_factorization_check, state_from_bloch, tradeoff_check, unsharp_spin};
use seqconj::verify::random_frame;
use seqconj::{Group, Instrument64, ProbVector, SpinFrame64, State64, Tolerance, WeylSystem64};

const SEED: u64 = 20_240_611;

struct Outcome {
    passed: bool,
    detail: String,
}

/// Running maximum; NaN poisons it.
#[derive(Default)]
struct Max(f64);

impl Max {
    fn see(&mut self, r: f64) {
        self.0 = if r.is_nan() { f64::INFINITY } else { self.0.max(r) };
    }
}

fn within(label: &str, value: f64, bound: f64) -> (bool, String) {
    (value <= bound, format!("{label} {value:.3e} <= {bound:.0e}"))
}

fn combine(parts: Vec<(bool, String)>) -> Outcome {
    Outcome {
        passed: parts.iter().all(|p| p.0),
        detail: parts.into_iter().map(|p| p.1).collect::<Vec<_>>().join("; "),
    }
}

fn weyl_relation_and_snag() -> Outcome {
    let (mut relation, mut snag, mut agreement) = (Max::default(), Max::default(), Max::default());
    for g in groups_up_to(6) {
        let ws = WeylSystem64::new(g.clone());
        let n = g.order();
        for x in 0..n {
            let u = translation(&g, x);
            agreement.see((&u - ws.u(x)).max_abs());
            // U_x = Σ_χ conj(χ(x)) B({χ})
            let mut from_b = M::zeros(n, n);
            for chi in 0..n {
                from_b += &momentum_projector(&g, chi).scale(character(&g, chi, x).conj());
            }
            snag.see((&from_b - &u).max_abs());
            for chi in 0..n {
                let v = modulation(&g, chi);
                let lhs = u.matmul(&v);
                let rhs = v.matmul(&u).scale(character(&g, chi, x).conj());
                relation.see((&lhs - &rhs).max_abs());
                relation.see((&ws.uv(x, chi) - &lhs).max_abs());
            }
        }
        for chi in 0..n {
            let v = modulation(&g, chi);
            agreement.see((&v - ws.v(chi)).max_abs());
            // V_χ = Σ_x χ(x) A({x})
            let mut from_a = M::zeros(n, n);
            for x in 0..n {
                from_a += &position_projector(n, x).scale(character(&g, chi, x));
            }
            snag.see((&from_a - &v).max_abs());
        }
        relation.see(ws.weyl_relation_residual());
        snag.see(ws.snag_residual());
    }
    combine(vec![
        within("relation", relation.0, 1e-12),
        within("snag", snag.0, 1e-10),
        within("operators vs definition", agreement.0, 1e-12),
    ])
}

fn coupling_intertwiners() -> Outcome {
    let (mut inter, mut agreement) = (Max::default(), Max::default());
    for g in groups_up_to(4) {
        let n = g.order();
        let l = coupling(&g);
        agreement.see((&l - &coupling_unitary(&WeylSystem64::new(g.clone()))).max_abs());
        for x in 0..n {
            for y in 0..n {
                let lhs = l.matmul(&kron(&translation(&g, x), &translation(&g, y)));
                let rhs = kron(&translation(&g, x), &translation(&g, g.add_idx(x, y))).matmul(&l);
                inter.see((&lhs - &rhs).max_abs());
            }
        }
        for chi in 0..n {
            for gamma in 0..n {
                let lhs = l.matmul(&kron(&modulation(&g, chi), &modulation(&g, gamma)));
                let rhs = kron(&modulation(&g, g.sub_idx(chi, gamma)), &modulation(&g, gamma)).matmul(&l);
                inter.see((&lhs - &rhs).max_abs());
            }
        }
    }
    combine(vec![
        within("intertwiners", inter.0, 1e-12),
        within("L vs definition", agreement.0, 1e-12),
    ])
}

fn theorem_round_trip(rng: &mut ChaCha8Rng) -> Outcome {
    let (mut round, mut cov, mut literal) = (Max::default(), Max::default(), Max::default());
    let mut failures = 0usize;
    for d in [2usize, 3, 5] {
        let g = Group::cyclic(d).unwrap();
        let ws = WeylSystem64::new(g.clone());
        for sample in 0..50 {
            let mm = random_measure(rng, &g);
            let inst = covariant_instrument(&ws, &mm).unwrap();
            cov.see(verify_covariance(&ws, &inst).unwrap());
            match reconstruct_measure(&ws, &inst) {
                Ok(back) => round.see(back.max_distance(&mm).unwrap()),
                Err(_) => failures += 1,
            }
            // literal evaluation on a few samples per dimension
            if sample < 5 {
                for k in 0..d {
                    for i in 0..d {
                        for j in 0..d {
                            let unit = M::unit(d, i, j);
                            let expected = literal_instrument(&g, &mm, k, &unit);
                            literal.see(inst.map(k).apply(&unit).unwrap().distance(&expected).unwrap());
                        }
                    }
                }
            }
        }
    }
    let mut parts = vec![
        within("round trip", round.0, 1e-8),
        within("covariance", cov.0, 1e-9),
        within("vs literal formula", literal.0, 1e-10),
    ];
    parts.push((failures == 0, format!("reconstruction failures {failures}")));
    combine(parts)
}

fn noise_measures_prop(rng: &mut ChaCha8Rng) -> Outcome {
    let (mut pos, mut mom, mut dens) = (Max::default(), Max::default(), Max::default());
    for d in [2usize, 3] {
        let g = Group::cyclic(d).unwrap();
        let ws = WeylSystem64::new(g.clone());
        for _ in 0..50 {
            let mm = random_measure(rng, &g);
            let joint = joint_observable(&ws, &covariant_instrument(&ws, &mm).unwrap()).unwrap();
            let (a, b) = marginals(&ws, &joint).unwrap();
            // densities straight from the total shifted measure
            let total = total_shifted(&g, &mm);
            let sigma: Vec<f64> = (0..d).map(|x| total[(x, x)].re).collect();
            let tau: Vec<f64> = (0..d)
                .map(|chi| momentum_projector(&g, g.neg_idx(chi)).matmul(&total).trace().re)
                .collect();
            let (ls, lt) = noise_measures(&ws, &mm).unwrap();
            for k in 0..d {
                dens.see((ls.weights[k] - sigma[k]).abs());
                dens.see((lt.weights[k] - tau[k]).abs());
            }
            let sigma = ProbVector::over_group(&g, sigma).unwrap();
            let tau = ProbVector::over_dual(&g, tau).unwrap();
            pos.see(a.max_effect_distance(&smear_position(&ws, &sigma).unwrap()).unwrap());
            mom.see(b.max_effect_distance(&smear_momentum(&ws, &tau).unwrap()).unwrap());
        }
    }
    combine(vec![
        within("position marginal", pos.0, 1e-9),
        within("momentum marginal", mom.0, 1e-9),
        within("densities vs definition", dens.0, 1e-12),
    ])
}

fn generating_state_and_sequential(rng: &mut ChaCha8Rng) -> Outcome {
    let (mut forward, mut backward, mut loop_err, mut check_err) =
        (Max::default(), Max::default(), Max::default(), Max::default());
    for d in [2usize, 3, 4] {
        let g = Group::cyclic(d).unwrap();
        let ws = WeylSystem64::new(g.clone());
        for _ in 0..20 {
            let mm = random_measure(rng, &g);
            let joint = joint_observable(&ws, &covariant_instrument(&ws, &mm).unwrap()).unwrap();
            let s = generating_state(&ws, &mm).unwrap();
            forward.see(joint.max_effect_distance(&cpso_from_state(&ws, &s).unwrap()).unwrap());

            let s: State64 = random_state(rng, d);
            let (_, joint) = sequential_from_cpso(&ws, &s).unwrap();
            for x in 0..d {
                for chi in 0..d {
                    let expected = literal_cpso_effect(&g, s.matrix(), x, chi);
                    backward.see(joint.effect(x * d + chi).distance(&expected).unwrap());
                }
            }

            // S ↦ ω = Š ↦ generating state of δ₀ ⊗ ω
            let omega = State64::new(check_map(&ws, s.matrix()).unwrap(), Tolerance::default()).unwrap();
            let mm = CovariantMeasure::delta(g.clone(), &omega).unwrap();
            loop_err.see(generating_state(&ws, &mm).unwrap().matrix().distance(s.matrix()).unwrap());

            // <f₁, Ť f₂> = <f̌₂, T f̌₁>
            let t = ginibre(rng, d, d);
            let (f1, f2) = (random_vector(rng, d), random_vector(rng, d));
            let lhs = inner(&f1, &check_map(&ws, &t).unwrap().apply_vec(&f2));
            let rhs = inner(&check_vector(&g, &f2), &t.apply_vec(&check_vector(&g, &f1)));
            check_err.see((lhs - rhs).norm());
        }
    }
    combine(vec![
        within("joint vs C_S", forward.0, 1e-9),
        within("sequential implementation", backward.0, 1e-9),
        within("probe/state loop", loop_err.0, 1e-10),
        within("check map identity", check_err.0, 1e-10),
    ])
}

fn reconstruction_formula(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = Max::default();
    for d in [2usize, 3, 4] {
        let g = Group::cyclic(d).unwrap();
        let ops: Vec<(M, M)> = (0..d * d)
            .map(|k| {
                let vu = modulation(&g, k % d).matmul(&translation(&g, k / d));
                let back = vu.adjoint();
                (vu, back)
            })
            .collect();
        for _ in 0..100 {
            let t = ginibre(rng, d, d);
            let (f1, f2) = (random_vector(rng, d), random_vector(rng, d));
            let mut lhs = Complex64::new(0.0, 0.0);
            for (vu, back) in &ops {
                let coeff = vu.matmul(&t).trace();
                // <u, v> is linear in the first slot here
                lhs += coeff * inner(&f2, &back.apply_vec(&f1));
            }
            let rhs = inner(&f2, &t.apply_vec(&f1)) * d as f64;
            worst.see((lhs - rhs).norm());
        }
    }
    combine(vec![within("identity", worst.0, 1e-9)])
}

fn spin_example(rng: &mut ChaCha8Rng) -> Outcome {
    let (mut factor, mut factor_oracle, mut tradeoff) = (Max::default(), Max::default(), f64::NEG_INFINITY);
    let (mut bloch_err, mut saturation, mut worked) = (Max::default(), Max::default(), Max::default());
    for _ in 0..100 {
        let frame = random_frame(rng);
        let omega: State64 = random_state(rng, 2);
        let rho: State64 = random_state(rng, 2);
        factor.see(kronecker_factorization_check(&frame, &omega, &rho).unwrap());
        factor_oracle.see(spin_factorization_oracle(&frame, omega.matrix(), rho.matrix()));
    }
    for _ in 0..1000 {
        let frame = random_frame(rng);
        let omega: State64 = random_state(rng, 2);
        let value = tradeoff_check(&frame, &omega).unwrap();
        tradeoff = tradeoff.max(value);
        let r = bloch(omega.matrix());
        let dot = |u: [f64; 3]| u[0] * r[0] + u[1] * r[1] + u[2] * r[2];
        let u = unsharp_spin(&frame, &omega).unwrap();
        bloch_err.see((u.s - dot(frame.a())).abs().max((u.t - dot(frame.b())).abs()));

        let along_a = state_from_bloch(&frame.a()).unwrap();
        saturation.see((tradeoff_check(&frame, &along_a).unwrap() - 1.0).abs());
        let plus = State64::pure(&frame.plus()).unwrap();
        let u = unsharp_spin(&frame, &plus).unwrap();
        worked.see((u.s - 1.0).abs().max(u.t.abs()));
    }
    let u = unsharp_spin(&SpinFrame64::standard(), &State64::basis(2, 0)).unwrap();
    worked.see((u.s - 1.0).abs().max(u.t.abs()));
    combine(vec![
        within("factorization", factor.0, 1e-10),
        within("factorization oracle", factor_oracle.0, 1e-10),
        within("max s^2+t^2 - 1", (tradeoff - 1.0).max(0.0), 1e-12),
        within("bloch decomposition", bloch_err.0, 1e-12),
        within("r=a saturation", saturation.0, 1e-9),
        within("worked s=1,t=0", worked.0, 1e-12),
    ])
}

/// `L` built on `e^a_±` directly in the computational basis, then
/// `<e_i| I_k(ρ) |e_j>` against `ρ_ij (U_k ω U_k)_ij` in frame coordinates.
fn spin_factorization_oracle(frame: &SpinFrame64, omega: &M, rho: &M) -> f64 {
    let e = [frame.plus().to_vec(), frame.minus().to_vec()];
    let mut l = M::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            let out: Vec<Complex64> = kron_vec(&e[a], &e[(a + b) % 2]);
            let inp: Vec<Complex64> = kron_vec(&e[a], &e[b]);
            l += &M::outer(&out, &inp);
        }
    }
    let frame_entry = |t: &M, i: usize, j: usize| inner(&e[i], &t.apply_vec(&e[j]));
    let u1 = sigma_dot(&frame.b());
    let mut worst = 0.0f64;
    for k in 0..2 {
        let pointer = kron(&M::identity(2), &M::outer(&e[k], &e[k]));
        let out = partial_trace_2(&pointer.matmul(&sandwich(&l, &kron(rho, omega))), 2, 2);
        let moved = if k == 0 { omega.clone() } else { sandwich(&u1, omega) };
        for i in 0..2 {
            for j in 0..2 {
                let expected = frame_entry(rho, i, j) * frame_entry(&moved, i, j);
                worst = worst.max((frame_entry(&out, i, j) - expected).norm());
            }
        }
    }
    worst
}

fn kron_vec(u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect()
}

fn informational_completeness() -> Outcome {
    let g = Group::cyclic(2).unwrap();
    let ws = WeylSystem64::new(g);
    let k = 1.0 / (2.0 * 3f64.sqrt());
    let magic = M::new(2, 2, vec![c(0.5 + k, 0.0), c(k, -k), c(k, k), c(0.5 - k, 0.0)]).unwrap();
    let magic = State64::new(magic, Tolerance::default()).unwrap();
    let basis = cpso_from_state(&ws, &State64::basis(2, 0)).unwrap();
    let full = cpso_from_state(&ws, &magic).unwrap();
    let (r0, r1) = (effect_span_rank(&basis), effect_span_rank(&full));
    let ic = (
        is_informationally_complete(&basis, Tolerance::default()),
        is_informationally_complete(&full, Tolerance::default()),
    );
    Outcome {
        passed: r0 == 2 && r1 == 4 && ic == (false, true),
        detail: format!("rank |e0><e0| = {r0} (want 2), rank magic = {r1} (want 4), IC = {ic:?}"),
    }
}

fn probability_law(rng: &mut ChaCha8Rng) -> Outcome {
    let mut instruments: Vec<Instrument64> = Vec::new();
    for d in [2usize, 3, 4] {
        let g = Group::cyclic(d).unwrap();
        let ws = WeylSystem64::new(g.clone());
        let omega = random_state(rng, d);
        let std = standard_instrument(&ws, &omega).unwrap();
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let unit = M::unit(d, i, j);
                    let expected = literal_standard(&g, omega.matrix(), k, &unit);
                    assert!(std.map(k).apply(&unit).unwrap().distance(&expected).unwrap() < 1e-12);
                }
            }
        }
        let cov = covariant_instrument(&ws, &random_measure(rng, &g)).unwrap();
        let (seq, _) = sequential_from_cpso(&ws, &random_state(rng, d)).unwrap();
        let composed = compose_sequential(&cov, &std).unwrap();
        instruments.extend([std, cov, seq, composed]);
    }
    let (mut sum_err, mut negativity, mut effects) = (Max::default(), f64::NEG_INFINITY, Max::default());
    for inst in &instruments {
        let a = associated_observable(inst);
        effects.see(a.normalization_residual());
        for _ in 0..100 {
            let rho: State64 = random_state(rng, inst.dim());
            let p = inst.probabilities(&rho).unwrap();
            sum_err.see((p.iter().sum::<f64>() - 1.0).abs());
            negativity = negativity.max(p.iter().fold(f64::NEG_INFINITY, |m, q| m.max(-q)));
        }
    }
    combine(vec![
        within("sum", sum_err.0, 1e-9),
        within("negativity", negativity.max(0.0), 1e-12),
        within("effects sum to identity", effects.0, 1e-9),
        (true, format!("{} instruments", instruments.len())),
    ])
}

fn main() {
    let mut rng = rng(SEED);
    let criteria: Vec<(&str, Box<dyn FnOnce(&mut ChaCha8Rng) -> Outcome>)> = vec![
        ("weyl relation and SNAG, |G| <= 6", Box::new(|_| weyl_relation_and_snag())),
        ("coupling intertwiners, d <= 4", Box::new(|_| coupling_intertwiners())),
        ("covariant instrument <-> measure round trip, d in {2,3,5}", Box::new(theorem_round_trip)),
        ("marginals are smeared by the noise measures, d in {2,3}", Box::new(noise_measures_prop)),
        ("generating state and sequential implementation, d in {2,3,4}", Box::new(generating_state_and_sequential)),
        ("Weyl reconstruction formula, d in {2,3,4}", Box::new(reconstruction_formula)),
        ("spin-1/2 factorization and trade-off", Box::new(spin_example)),
        ("informational completeness on Z2", Box::new(|_| informational_completeness())),
        ("instrument probability law", Box::new(probability_law)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.into_iter().enumerate() {
        let outcome = check(&mut rng);
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        println!("acceptance {}: {verdict} {name} ({})", k + 1, outcome.detail);
        if !outcome.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

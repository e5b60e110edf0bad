//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero when any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use fockbench::analytic::{phi_closed_form, psi_joint_closed_form, tmsv};
use fockbench::appendix::{exact_delta_holds, verify_delta, verify_factorization, TripleSumArgs};
use fockbench::entanglement::{negativity, negativity_pure};
use fockbench::optics::{subtract_via_ancilla, subtraction_operator};
use fockbench::protocol::{
    auto_cutoff, brute_force_joint, conditional_state, envelope_gap, find_optimal_gap_t, gaussian_measure, linspace,
    loss_crossing, lossy_negativity, tradeoff_curve, CombinerConvention, GapSearch, SimpleEnvelope,
};
use fockbench::{
    BeamSplitterSpec, Bipartition, FockCutoff, JointStrategyId, LossSpec, ModeIndex, PureState, SimpleStrategy,
    SqueezingParam, Strategy, C64,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const LAMBDA: f64 = 0.5;
const FIDELITY_FLOOR: f64 = 1.0 - 1e-8;
const OPERATOR_TOL: f64 = 1e-10;
const BELL_TOL: f64 = 1e-10;
const TMSV_TOL: f64 = 1e-6;
const PRODUCT_TOL: f64 = 1e-9;
const ROUTE_TOL: f64 = 1e-8;
const ETA_BAND: (f64, f64) = (0.85, 0.97);
const ETA_TOL: f64 = 1e-4;
const LOSS_CUTOFF: usize = 16;
const DELTA_BUDGET: Duration = Duration::from_secs(10);
const FACTORIZATION_BUDGET: Duration = Duration::from_secs(30);
const LOSS_BUDGET: Duration = Duration::from_secs(300);

type Outcome = Result<String, String>;

fn lam(l: f64) -> SqueezingParam {
    SqueezingParam::new(l).unwrap()
}

fn within(start: Instant, budget: Duration, what: &str) -> Result<Duration, String> {
    let took = start.elapsed();
    if took > budget {
        return Err(format!("{what} took {took:?}, budget {budget:?}"));
    }
    Ok(took)
}

fn delta_identity() -> Outcome {
    let start = Instant::now();
    let violations = verify_delta(12).map_err(|e| e.to_string())?;
    let mut triples = 0;
    for n in 0..=12 {
        for k in 0..=n {
            for p in 0..=n {
                triples += 1;
                if !exact_delta_holds(TripleSumArgs::new(n, k, p).unwrap()).unwrap() {
                    return Err(format!("integer identity fails at ({n}, {k}, {p})"));
                }
            }
        }
    }
    let took = within(start, DELTA_BUDGET, "delta check")?;
    if !violations.is_empty() {
        return Err(format!("{} violations, first {:?}", violations.len(), violations[0]));
    }
    Ok(format!("{triples} triples exact, {took:.2?}"))
}

fn factorization() -> Outcome {
    let start = Instant::now();
    let mut worst = 1.0_f64;
    for l in [0.3, 0.5, 0.7] {
        let fid = verify_factorization(lam(l), None).map_err(|e| e.to_string())?;
        if fid < FIDELITY_FLOOR {
            return Err(format!("fidelity {fid} at lambda {l}"));
        }
        worst = worst.min(fid);
    }
    let took = within(start, FACTORIZATION_BUDGET, "factorization")?;
    Ok(format!("min fidelity {worst:.12}, {took:.2?}"))
}

fn closed_forms() -> Outcome {
    let mut failures = Vec::new();
    let (mut worst_joint, mut worst_phi) = (1.0_f64, 1.0_f64);
    for j in JointStrategyId::ALL {
        for t2 in [0.8, 0.9, 0.99] {
            let cutoff = auto_cutoff(Strategy::Joint(j), lam(LAMBDA), t2).unwrap();
            let spec = BeamSplitterSpec::from_transmittance(t2).unwrap();
            let brute = brute_force_joint(j, lam(LAMBDA), spec, cutoff, CombinerConvention::Standard)
                .map_err(|e| format!("{j} at t2={t2}: {e}"))?;
            let closed = psi_joint_closed_form(j, lam(LAMBDA), spec, cutoff).unwrap();
            let f_joint = brute.fidelity(&closed).unwrap();
            let (pa, pb) = j.projectors();
            let measured = gaussian_measure(&brute, pa, pb).unwrap();
            let f_phi = measured.fidelity(&phi_closed_form(j, lam(LAMBDA), spec, cutoff)).unwrap();
            worst_joint = worst_joint.min(f_joint);
            worst_phi = worst_phi.min(f_phi);
            if f_joint < FIDELITY_FLOOR {
                failures.push(format!("joint {j} t2={t2} overlap {f_joint:.9}"));
            }
            if f_phi < FIDELITY_FLOOR {
                let diag = diagonal_part(&measured);
                let f_diag = diag.fidelity(&phi_closed_form(j, lam(LAMBDA), spec, cutoff)).unwrap();
                let off = 1.0 - diag.norm_sqr() / measured.norm_sqr();
                failures.push(format!(
                    "measured {j} t2={t2} overlap {f_phi:.9} (diagonal part overlap {f_diag:.12}, off-diagonal weight {off:.2e})"
                ));
            }
        }
    }
    let summary = format!("min joint overlap {worst_joint:.12}, min measured overlap {worst_phi:.12}");
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", failures.join("; ")))
    }
}

/// Amplitudes on `|n, n>` only.
fn diagonal_part(state: &PureState) -> PureState {
    PureState::from_fn(2, state.cutoff(), |ix| if ix[0] == ix[1] { state.amplitude(ix) } else { C64::new(0.0, 0.0) })
        .unwrap()
}

fn random_state(modes: usize, cutoff: FockCutoff, rng: &mut StdRng) -> PureState {
    PureState::from_fn(modes, cutoff, |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .unwrap()
        .normalized()
        .unwrap()
}

fn subtraction_operator_identity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let cutoff = FockCutoff::new(7).unwrap();
    let mut worst = 0.0_f64;
    for trial in 0..200 {
        let psi = random_state(1, cutoff, &mut rng);
        let spec = BeamSplitterSpec::from_transmittance(rng.gen_range(0.05..0.999)).unwrap();
        for k in 0..=2 {
            let optical = subtract_via_ancilla(&psi, ModeIndex(0), k, spec).unwrap();
            let operator =
                psi.apply_one_mode_operator(ModeIndex(0), &subtraction_operator(k, spec, cutoff).unwrap()).unwrap();
            let dev = optical.as_slice().iter().zip(operator.as_slice()).fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()));
            if dev > OPERATOR_TOL {
                return Err(format!("trial {trial}, k={k}: deviation {dev:e}"));
            }
            worst = worst.max(dev);
        }
    }
    Ok(format!("200 trials x k in 0..=2, max deviation {worst:.2e}"))
}

fn known_negativities() -> Outcome {
    let cut = Bipartition::two_mode();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = PureState::from_fn(2, FockCutoff::new(1).unwrap(), |ix| {
        if ix[0] == ix[1] {
            C64::new(h, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
    .unwrap();
    let bell_neg = negativity(&bell.to_density(), &cut).unwrap();
    if (bell_neg - 0.5).abs() > BELL_TOL {
        return Err(format!("Bell negativity {bell_neg}"));
    }
    for l in [0.3, 0.5] {
        let state = tmsv(lam(l), FockCutoff::new(30).unwrap()).normalized().unwrap();
        let n = negativity_pure(&state, &cut).unwrap();
        if (n - l / (1.0 - l)).abs() > TMSV_TOL {
            return Err(format!("squeezed vacuum at {l}: {n} vs {}", l / (1.0 - l)));
        }
    }
    let mut rng = StdRng::seed_from_u64(7);
    let c = FockCutoff::new(4).unwrap();
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let product = random_state(1, c, &mut rng).tensor_product(&random_state(1, c, &mut rng)).unwrap();
        worst = worst.max(negativity(&product.to_density(), &cut).unwrap());
    }
    if worst > PRODUCT_TOL {
        return Err(format!("product state negativity {worst:e}"));
    }
    Ok(format!("Bell {bell_neg:.12}, product states <= {worst:.1e}"))
}

fn monotone_tradeoffs() -> Outcome {
    let grid = linspace(0.5, 0.99, 50);
    let strategies: Vec<Strategy> = SimpleStrategy::all()
        .into_iter()
        .map(Strategy::from)
        .chain(JointStrategyId::ALL.into_iter().map(Strategy::from))
        .collect();
    let mut bad = Vec::new();
    for &s in &strategies {
        let curve = tradeoff_curve(s, lam(LAMBDA), &grid, None).map_err(|e| format!("{s}: {e}"))?;
        if !curve.is_strictly_monotone() {
            bad.push(s.label());
        }
    }
    if bad.is_empty() {
        Ok(format!("{} strategies x 50 points", strategies.len()))
    } else {
        Err(format!("not strictly monotone: {}", bad.join(" ")))
    }
}

fn joint_versus_envelope() -> Outcome {
    let env = SimpleEnvelope::default_set(lam(LAMBDA), None).unwrap();
    let grid = linspace(0.5, 0.99, 50);
    let mut summary = Vec::new();
    for j in JointStrategyId::ALL {
        let mut above = Vec::new();
        let mut best = f64::NEG_INFINITY;
        let mut compared = 0;
        for &t2 in &grid {
            if let Some(g) = envelope_gap(j, &env, t2, None).unwrap() {
                compared += 1;
                best = best.max(g.gap);
                if g.gap > 0.0 {
                    above.push(t2);
                }
            }
        }
        if compared == 0 {
            return Err(format!("{j}: the envelope covers none of the sweep"));
        }
        let ok = if j == JointStrategyId::OneZeroZeroOne { above.len() >= 2 } else { above.is_empty() };
        if !ok {
            return Err(format!("{j}: {} grid points above the envelope, best gap {best:.4}", above.len()));
        }
        summary.push(format!("{j} best gap {best:+.4}"));
    }
    Ok(summary.join(", "))
}

fn loss_threshold() -> Outcome {
    let start = Instant::now();
    let GapSearch::Advantage(gap) = find_optimal_gap_t(lam(LAMBDA), None).unwrap() else {
        return Err("no advantage found".into());
    };
    let cutoff = FockCutoff::new(LOSS_CUTOFF).unwrap();
    let mut last = f64::INFINITY;
    for i in 0..=6 {
        let eta = 1.0 - 0.05 * i as f64;
        let n = lossy_negativity(lam(LAMBDA), gap.t2, LossSpec::new(eta).unwrap(), cutoff).unwrap();
        if n > last {
            return Err(format!("negativity rises from {last} to {n} at eta {eta}"));
        }
        last = n;
    }
    let eta_star = loss_crossing(lam(LAMBDA), gap.t2, gap.neg_reference, cutoff, ETA_TOL)
        .unwrap()
        .ok_or("no crossing above eta = 0.05")?;
    let took = within(start, LOSS_BUDGET, "loss scan")?;
    if !(eta_star > ETA_BAND.0 && eta_star < ETA_BAND.1) {
        return Err(format!("eta* = {eta_star:.4} outside {ETA_BAND:?}"));
    }
    Ok(format!("t2* = {:.4}, eta* = {eta_star:.4}, {took:.2?}", gap.t2))
}

fn route_equivalence() -> Outcome {
    let cut = Bipartition::two_mode();
    let spec = BeamSplitterSpec::from_transmittance(0.9).unwrap();
    let mut worst = 0.0_f64;
    for j in JointStrategyId::ALL {
        let cutoff = auto_cutoff(Strategy::Joint(j), lam(LAMBDA), 0.9).unwrap();
        let printed = phi_closed_form(j, lam(LAMBDA), spec, cutoff).normalized().unwrap();
        let (_, measured) = conditional_state(j.into(), lam(LAMBDA), 0.9, cutoff).unwrap();
        for state in [printed, measured.normalized().unwrap()] {
            let dev = (negativity_pure(&state, &cut).unwrap() - negativity(&state.to_density(), &cut).unwrap()).abs();
            if dev > ROUTE_TOL {
                return Err(format!("{j}: routes differ by {dev:e}"));
            }
            worst = worst.max(dev);
        }
    }
    Ok(format!("max deviation {worst:.2e}"))
}

fn deterministic_output() -> Outcome {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_fockbench"))
            .args(["sweep-joint", "--t2-steps", "20", "--format", "csv"])
            .env("FOCKBENCH_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
        }
        Ok(out.stdout)
    };
    let (a, b, c) = (run("1")?, run("1")?, run("4")?);
    if a != b || a != c {
        return Err("outputs differ between runs".into());
    }
    Ok(format!("{} bytes identical across 3 runs (1 and 4 threads)", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("triple-sum identity", delta_identity),
        ("factorization of two squeezed vacua", factorization),
        ("closed-form joint and measured states", closed_forms),
        ("subtraction operator from ancilla", subtraction_operator_identity),
        ("known negativities", known_negativities),
        ("trade-off monotonicity", monotone_tradeoffs),
        ("joint strategies against the envelope", joint_versus_envelope),
        ("detector-efficiency threshold", loss_threshold),
        ("negativity route equivalence", route_equivalence),
        ("byte-identical sweep output", deterministic_output),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all criteria passed");
}

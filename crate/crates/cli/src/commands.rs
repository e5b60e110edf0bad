//! The five subcommands. Each returns the output document and, for
//! verification runs, the ids of failed checks.

use std::fmt::Write as _;

use fockbench::analytic::{phi_closed_form, psi_joint_closed_form, tmsv};
use fockbench::appendix::{verify_delta, verify_factorization};
use fockbench::entanglement::{negativity, negativity_pure, TRUNCATION_LIMIT};
use fockbench::optics::{beam_splitter_matrix, beam_splitter_matrix_factored, subtract_via_ancilla, subtraction_operator};
use fockbench::protocol::{
    auto_cutoff, brute_force_joint, conditional_state, find_optimal_gap_against, gaussian_measure, linspace, loss_crossing, loss_scan_cutoff, lossy_negativity,
    optimal_envelope, strategy_point, CombinerConvention, EnvelopeBins, GapSearch, SimpleEnvelope,
};
use fockbench::{
    BeamSplitterSpec, Bipartition, FockCutoff, JointStrategyId, LossSpec, ModeIndex, PureState, SimpleStrategy,
    Strategy, TradeoffCurve, C64,
};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{CutoffChoice, OutputFormat, SweepConfig};
use crate::error::CliError;
use crate::output::{csv_field, csv_header, fmt_num, json_num, pretty, sweep_csv, sweep_json};

/// Output document of a run plus the checks that failed, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub document: String,
    pub failed: Vec<String>,
}

impl RunOutput {
    fn ok(document: String) -> Self {
        Self { document, failed: Vec::new() }
    }
}

fn parse_simple(labels: &[String]) -> Result<Vec<SimpleStrategy>, CliError> {
    labels
        .iter()
        .map(|l| l.parse().map_err(|_| CliError::Config(format!("unknown simple strategy label '{l}'"))))
        .collect()
}

fn parse_joint(labels: &[String]) -> Result<Vec<JointStrategyId>, CliError> {
    labels
        .iter()
        .map(|l| l.parse().map_err(|_| CliError::Config(format!("unknown joint strategy label '{l}'"))))
        .collect()
}

/// Evaluates every `(strategy, t2)` pair in parallel and regroups the
/// points per strategy in input order.
fn sweep_curves(cfg: &SweepConfig, strategies: &[Strategy]) -> Result<Vec<TradeoffCurve>, CliError> {
    let grid = linspace(cfg.t2_min, cfg.t2_max, cfg.t2_steps);
    let cutoff = cfg.cutoff.resolve()?;
    let tasks: Vec<(usize, f64)> = (0..strategies.len()).flat_map(|s| grid.iter().map(move |&t2| (s, t2))).collect();
    let points = tasks
        .par_iter()
        .map(|&(s, t2)| strategy_point(strategies[s], cfg.lambda, t2, cutoff))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(strategies
        .iter()
        .zip(points.chunks(grid.len().max(1)))
        .map(|(&s, pts)| TradeoffCurve::for_strategy(s, pts.to_vec()))
        .collect())
}

fn render(cfg: &SweepConfig, curves: &[TradeoffCurve]) -> String {
    match cfg.format {
        OutputFormat::Csv => sweep_csv(cfg, curves),
        OutputFormat::Json => sweep_json(cfg, curves),
    }
}

/// Simple-subtraction curves plus their binned upper envelope.
pub fn sweep_simple(cfg: &SweepConfig) -> Result<RunOutput, CliError> {
    let strategies: Vec<Strategy> = parse_simple(&cfg.strategies)?.into_iter().map(Strategy::from).collect();
    if strategies.is_empty() {
        return Err(CliError::Config("no strategies given".into()));
    }
    let mut curves = sweep_curves(cfg, &strategies)?;
    let env = optimal_envelope(&curves, &EnvelopeBins::default())?;
    curves.push(env.curve());
    Ok(RunOutput::ok(render(cfg, &curves)))
}

/// Joint curves plus the exact simple-subtraction envelope they are
/// compared with.
pub fn sweep_joint(cfg: &SweepConfig) -> Result<RunOutput, CliError> {
    let strategies: Vec<Strategy> = parse_joint(&cfg.strategies)?.into_iter().map(Strategy::from).collect();
    if strategies.is_empty() {
        return Err(CliError::Config("no strategies given".into()));
    }
    let mut curves = sweep_curves(cfg, &strategies)?;
    let reference = SimpleEnvelope::default_set(cfg.lambda, cfg.cutoff.resolve()?)?;
    curves.push(reference.curve(&EnvelopeBins::default())?);
    Ok(RunOutput::ok(render(cfg, &curves)))
}

/// Tolerance on the crossing efficiency.
pub const ETA_TOL: f64 = 1e-4;

/// Negativity of the `1,0,0,1` strategy at the transmittance of largest
/// advantage, against detector efficiency. The strategy list is the simple
/// family the advantage is measured against.
pub fn loss_scan(cfg: &SweepConfig) -> Result<RunOutput, CliError> {
    let Some(etas) = &cfg.eta_grid else {
        return Err(CliError::Config("loss-scan needs eta-grid".into()));
    };
    let reference_set = parse_simple(&cfg.strategies)?;
    let env = SimpleEnvelope::new(cfg.lambda, &reference_set, None)?;
    let gap = match find_optimal_gap_against(&env, None)? {
        GapSearch::Advantage(g) => g,
        GapSearch::NoAdvantage(best) => {
            let detail = match best {
                Some(g) => format!("largest gap {} at t2 = {}", fmt_num(g.gap), fmt_num(g.t2)),
                None => "the envelope never reaches the joint strategy's probabilities".into(),
            };
            return Err(CliError::NoAdvantage(format!(
                "1,0,0,1 never beats simple subtraction at lambda = {}: {detail}",
                fmt_num(cfg.lambda.value())
            )));
        }
    };
    let cutoff = match cfg.cutoff {
        CutoffChoice::Auto => loss_scan_cutoff(cfg.lambda, gap.t2)?,
        CutoffChoice::Fixed(n) => {
            let cutoff = FockCutoff::new(n)?;
            let (_, phi) = conditional_state(JointStrategyId::OneZeroZeroOne.into(), cfg.lambda, gap.t2, cutoff)?;
            phi.normalized()?.check_truncation(TRUNCATION_LIMIT)?;
            cutoff
        }
    };
    let reference = gap.neg_reference;
    let joint = etas
        .par_iter()
        .map(|&eta| lossy_negativity(cfg.lambda, gap.t2, LossSpec::new(eta)?, cutoff))
        .collect::<Result<Vec<_>, _>>()?;
    let eta_star = loss_crossing(cfg.lambda, gap.t2, reference, cutoff, ETA_TOL)?;

    let document = match cfg.format {
        OutputFormat::Csv => {
            let mut out = csv_header(cfg);
            writeln!(out, "# reference={}", gap.reference_source).unwrap();
            out.push_str("eta,t2_star,neg_joint,neg_reference\n");
            for (&eta, &n) in etas.iter().zip(&joint) {
                writeln!(out, "{},{},{},{}", fmt_num(eta), fmt_num(gap.t2), fmt_num(n), fmt_num(reference)).unwrap();
            }
            match eta_star {
                Some(e) => {
                    out.push_str("# eta_star\n");
                    writeln!(out, "{},{},{},{}", fmt_num(e), fmt_num(gap.t2), fmt_num(reference), fmt_num(reference))
                        .unwrap();
                }
                None => out.push_str("# eta_star=none\n"),
            }
            out
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = etas
                .iter()
                .zip(&joint)
                .map(|(&eta, &n)| {
                    json!({
                        "eta": json_num(eta),
                        "t2_star": json_num(gap.t2),
                        "neg_joint": json_num(n),
                        "neg_reference": json_num(reference),
                    })
                })
                .collect();
            let mut doc = Map::new();
            doc.insert("config".into(), cfg.to_json());
            doc.insert("t2_star".into(), json_num(gap.t2));
            doc.insert("gap".into(), json_num(gap.gap));
            doc.insert("reference".into(), gap.reference_source.into());
            doc.insert("rows".into(), rows.into());
            doc.insert("eta_star".into(), eta_star.map_or(Value::Null, json_num));
            pretty(Value::Object(doc))
        }
    };
    Ok(RunOutput::ok(document))
}

/// One oracle comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub id: String,
    pub passed: bool,
    pub value: f64,
    /// Bound `value` is held to; see `detail` for its direction.
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn at_least(id: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { id: id.into(), passed: value >= threshold, value, threshold, detail: "value >= threshold".into() }
    }

    fn at_most(id: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { id: id.into(), passed: value <= threshold, value, threshold, detail: "value <= threshold".into() }
    }
}

/// Overlap threshold of the state comparisons.
pub const FIDELITY_FLOOR: f64 = 1.0 - 1e-8;
/// Transmittances of the state comparisons.
pub const CHECK_T2: [f64; 3] = [0.8, 0.9, 0.99];

fn max_dev(a: &PureState, b: &PureState) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

fn appendix_checks(cfg: &SweepConfig) -> Result<Vec<Check>, CliError> {
    let violations = verify_delta(cfg.n_max)?;
    let mut checks = vec![Check::at_most(format!("triple-sum-delta/n<={}", cfg.n_max), violations.len() as f64, 0.0)];
    if let Some(v) = violations.first() {
        checks[0].detail = format!("first violation f({}, {}, {}) = {}", v.n, v.k, v.p, fmt_num(v.value));
    }
    let fid = verify_factorization(cfg.lambda, cfg.cutoff.resolve()?)?;
    checks.push(Check::at_least("factorization", fid, FIDELITY_FLOOR));
    Ok(checks)
}

/// Every oracle comparison of the library at the configured squeezing.
pub fn verify_checks(cfg: &SweepConfig, convention: CombinerConvention) -> Result<Vec<Check>, CliError> {
    let lambda = cfg.lambda;
    let mut checks = appendix_checks(cfg)?;

    let pairs: Vec<(JointStrategyId, f64)> =
        JointStrategyId::ALL.iter().flat_map(|&j| CHECK_T2.iter().map(move |&t2| (j, t2))).collect();
    let state_checks = pairs
        .par_iter()
        .map(|&(j, t2)| -> Result<[Check; 2], CliError> {
            let cutoff = match cfg.cutoff {
                CutoffChoice::Fixed(n) => FockCutoff::new(n)?,
                CutoffChoice::Auto => auto_cutoff(Strategy::Joint(j), lambda, t2)?,
            };
            let spec = BeamSplitterSpec::from_transmittance(t2)?;
            let brute = brute_force_joint(j, lambda, spec, cutoff, convention)?;
            let closed = psi_joint_closed_form(j, lambda, spec, cutoff)?;
            let (pa, pb) = j.projectors();
            let measured = gaussian_measure(&brute, pa, pb)?;
            let phi = phi_closed_form(j, lambda, spec, cutoff);
            Ok([
                Check::at_least(format!("joint-state/{}/t2={}", j.label(), fmt_num(t2)), brute.fidelity(&closed)?, FIDELITY_FLOOR),
                Check::at_least(
                    format!("measured-state/{}/t2={}", j.label(), fmt_num(t2)),
                    measured.fidelity(&phi)?,
                    FIDELITY_FLOOR,
                ),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    checks.extend(state_checks.into_iter().flatten());

    // negativities with known values
    let c1 = FockCutoff::new(1)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = PureState::from_fn(2, c1, |ix| if ix[0] == ix[1] { C64::new(h, 0.0) } else { C64::new(0.0, 0.0) })?;
    let cut = Bipartition::two_mode();
    checks.push(Check::at_most("negativity/bell", (negativity_pure(&bell, &cut)? - 0.5).abs(), 1e-10));
    let tm = tmsv(lambda, FockCutoff::new(30)?).normalized()?;
    let l = lambda.value();
    checks.push(Check::at_most("negativity/tmsv", (negativity_pure(&tm, &cut)? - l / (1.0 - l)).abs(), 1e-6));

    for j in JointStrategyId::ALL {
        let cutoff = auto_cutoff(Strategy::Joint(j), lambda, 0.9)?;
        let (_, phi) = conditional_state(j.into(), lambda, 0.9, cutoff)?;
        let phi = phi.normalized()?;
        let dev = (negativity_pure(&phi, &cut)? - negativity(&phi.to_density(), &cut)?).abs();
        checks.push(Check::at_most(format!("negativity-routes/{}", j.label()), dev, 1e-8));
    }

    let c8 = FockCutoff::new(8)?;
    let spec = BeamSplitterSpec::from_transmittance(0.9)?;
    let probe = PureState::from_fn(2, c8, |ix| {
        let (a, b) = (ix[0] as f64, ix[1] as f64);
        C64::new((0.7 * a + 0.3 * b).cos() / (1.0 + a + b), (0.2 * a - 0.5 * b).sin() / (1.0 + a * b))
    })?
    .normalized()?;
    let mut worst = 0.0_f64;
    for k in 0..=2 {
        let optical = subtract_via_ancilla(&probe, ModeIndex(0), k, spec)?;
        let operator = probe.apply_one_mode_operator(ModeIndex(0), &subtraction_operator(k, spec, c8)?)?;
        worst = worst.max(max_dev(&optical, &operator));
    }
    checks.push(Check::at_most("subtraction-operator", worst, 1e-10));

    let rec = beam_splitter_matrix(spec, c8);
    let fac = beam_splitter_matrix_factored(spec, c8)?;
    let dev = rec.iter().zip(fac.iter()).fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()));
    checks.push(Check::at_most("beam-splitter-factored", dev, 1e-10));
    Ok(checks)
}

fn report(cfg: &SweepConfig, checks: &[Check]) -> RunOutput {
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.id.clone()).collect();
    let document = match cfg.format {
        OutputFormat::Csv => {
            let mut out = csv_header(cfg);
            out.push_str("check,passed,value,threshold\n");
            for c in checks {
                writeln!(out, "{},{},{},{}", csv_field(&c.id), c.passed, fmt_num(c.value), fmt_num(c.threshold)).unwrap();
            }
            out
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = checks
                .iter()
                .map(|c| {
                    json!({
                        "id": c.id,
                        "passed": c.passed,
                        "value": json_num(c.value),
                        "threshold": json_num(c.threshold),
                        "detail": c.detail,
                    })
                })
                .collect();
            let mut doc = Map::new();
            doc.insert("config".into(), cfg.to_json());
            doc.insert("checks".into(), rows.into());
            doc.insert("failed".into(), failed.clone().into());
            pretty(Value::Object(doc))
        }
    };
    RunOutput { document, failed }
}

/// Human-readable lines for a check list.
pub fn summary(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{tag} {} value={} threshold={} ({})", c.id, fmt_num(c.value), fmt_num(c.threshold), c.detail)
            .unwrap();
    }
    out
}

pub fn verify(cfg: &SweepConfig, convention: CombinerConvention) -> Result<(RunOutput, Vec<Check>), CliError> {
    let checks = verify_checks(cfg, convention)?;
    Ok((report(cfg, &checks), checks))
}

pub fn verify_appendix(cfg: &SweepConfig) -> Result<(RunOutput, Vec<Check>), CliError> {
    let checks = appendix_checks(cfg)?;
    Ok((report(cfg, &checks), checks))
}

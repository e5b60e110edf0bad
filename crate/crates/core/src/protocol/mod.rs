//! End-to-end pipelines: heralded states, the combining stage with Gaussian
//! measurement, trade-off curves, envelopes, and lossy homodyne detection.

mod envelope;
mod loss;
mod strategy;

pub use envelope::{
    envelope_gap, find_optimal_gap_against, find_optimal_gap_t, optimal_envelope, Envelope, EnvelopeBin, EnvelopeBins, GapPoint, GapSearch,
    SimpleEnvelope,
};
pub use loss::{loss_crossing, loss_scan_cutoff, lossy_homodyne_state, lossy_negativity, LOSS_SCAN_MIN_CUTOFF};
pub use strategy::{SimpleStrategy, Strategy, SweepRecord, TradeoffCurve};

use crate::analytic::{joint_state, tmsv, JointStrategyId, ModeSubtraction, SqueezingParam};
use crate::entanglement::{negativity_pure, Bipartition, TRUNCATION_LIMIT};
use crate::error::{config, Result};
use crate::fock::{FockCutoff, ModeIndex, PureState};
use crate::optics::{
    beam_splitter_matrix, gaussian_bra_coefficients, mirrored_beam_splitter_matrix, subtraction_operator,
    BeamSplitterSpec, GaussianProjector,
};

/// Sign convention of the two combining beam splitters. `MirroredSign`
/// flips the reflection sign and exists to check that the verification
/// notices.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum CombinerConvention {
    #[default]
    Standard,
    MirroredSign,
}

/// Explicit pipeline on `(a1, b1, a2, b2)`: two squeezed vacua, the
/// subtraction operators of the strategy, then balanced beam splitters on
/// `(a1, a2)` and `(b1, b2)`. Unnormalized; the squared norm is the
/// heralding probability.
pub fn brute_force_joint(
    strategy: JointStrategyId,
    lambda: SqueezingParam,
    spec: BeamSplitterSpec,
    cutoff: FockCutoff,
    convention: CombinerConvention,
) -> Result<PureState> {
    brute_force_plan(strategy.plan(), lambda, spec, cutoff, convention)
}

/// [`brute_force_joint`] for an arbitrary per-mode plan, including the
/// all-bare one.
pub fn brute_force_plan(
    plan: [ModeSubtraction; 4],
    lambda: SqueezingParam,
    spec: BeamSplitterSpec,
    cutoff: FockCutoff,
    convention: CombinerConvention,
) -> Result<PureState> {
    let source = tmsv(lambda, cutoff);
    let mut state = source.tensor_product(&source)?;
    for (mode, op) in plan.iter().enumerate() {
        if let ModeSubtraction::Detect(k) = *op {
            state = state.apply_one_mode_operator(ModeIndex(mode), &subtraction_operator(k, spec, cutoff)?)?;
        }
    }
    let combiner = match convention {
        CombinerConvention::Standard => beam_splitter_matrix(BeamSplitterSpec::balanced(), cutoff),
        CombinerConvention::MirroredSign => mirrored_beam_splitter_matrix(BeamSplitterSpec::balanced(), cutoff),
    };
    let state = state
        .apply_two_mode_operator(ModeIndex(0), ModeIndex(2), &combiner)?
        .apply_two_mode_operator(ModeIndex(1), ModeIndex(3), &combiner)?;
    state.check_truncation(TRUNCATION_LIMIT)?;
    Ok(state)
}

/// Contracts `a2` and `b2` of a four-mode state with the two projectors.
pub fn gaussian_measure(
    state: &PureState,
    proj_a2: GaussianProjector,
    proj_b2: GaussianProjector,
) -> Result<PureState> {
    if state.num_modes() != 4 {
        return config(format!("Gaussian measurement expects 4 modes, got {}", state.num_modes()));
    }
    let c = state.cutoff();
    state
        .contract_mode(ModeIndex(3), &gaussian_bra_coefficients(proj_b2, c))?
        .contract_mode(ModeIndex(2), &gaussian_bra_coefficients(proj_a2, c))
}

/// Adaptive cutoff for the states a strategy produces at transmittance `t2`.
pub fn auto_cutoff(strategy: Strategy, lambda: SqueezingParam, t2: f64) -> Result<FockCutoff> {
    let t = t2.sqrt();
    let l = lambda.value();
    let with_bs = |ops: &[ModeSubtraction]| ops.iter().filter(|m| m.has_beam_splitter()).count() as i32;
    let (decay, degree) = match strategy {
        Strategy::Simple(s) => {
            let ops = [ModeSubtraction::from_count(s.k_a()), ModeSubtraction::from_count(s.k_b())];
            (l * t.powi(with_bs(&ops)), s.photons().div_ceil(2))
        }
        Strategy::Joint(j) => {
            let plan = j.plan();
            let slowest = with_bs(&plan[..2]).min(with_bs(&plan[2..]));
            (l * t.powi(slowest), j.photons().div_ceil(2) + 1)
        }
    };
    FockCutoff::adaptive(decay, degree as u32)
}

fn check_t2(t2: f64) -> Result<()> {
    if !(t2 > 0.0 && t2 < 1.0) {
        return config(format!("transmittance t^2 = {t2} must lie in (0, 1)"));
    }
    Ok(())
}

/// Heralded two-mode state of a strategy, before normalization, with the
/// heralding probability. For joint strategies this is the output of the
/// preferred Gaussian measurement and the probability is the squared norm
/// of the four-mode state.
pub fn conditional_state(
    strategy: Strategy,
    lambda: SqueezingParam,
    t2: f64,
    cutoff: FockCutoff,
) -> Result<(f64, PureState)> {
    check_t2(t2)?;
    let spec = BeamSplitterSpec::from_transmittance(t2)?;
    match strategy {
        Strategy::Simple(s) => {
            let psi = s.state(lambda, spec, cutoff);
            Ok((psi.norm_sqr(), psi))
        }
        Strategy::Joint(j) => {
            let js = joint_state(j, lambda, spec, cutoff)?;
            let (pa, pb) = j.projectors();
            let phi = js.measure(&gaussian_bra_coefficients(pa, cutoff), &gaussian_bra_coefficients(pb, cutoff))?;
            Ok((js.norm_sqr(), phi))
        }
    }
}

/// Success probability and negativity of one strategy at one
/// transmittance. `None` picks the cutoff with [`auto_cutoff`].
pub fn strategy_point(
    strategy: Strategy,
    lambda: SqueezingParam,
    t2: f64,
    cutoff: Option<FockCutoff>,
) -> Result<SweepRecord> {
    check_t2(t2)?;
    let cutoff = match cutoff {
        Some(c) => c,
        None => auto_cutoff(strategy, lambda, t2)?,
    };
    let (p_s, state) = conditional_state(strategy, lambda, t2, cutoff)?;
    let state = state.normalized()?;
    state.check_truncation(TRUNCATION_LIMIT)?;
    let neg = negativity_pure(&state, &Bipartition::two_mode())?;
    Ok(SweepRecord::new(t2, p_s, neg))
}

/// [`strategy_point`] over a transmittance grid.
pub fn tradeoff_curve(
    strategy: Strategy,
    lambda: SqueezingParam,
    t2_grid: &[f64],
    cutoff: Option<FockCutoff>,
) -> Result<TradeoffCurve> {
    let points = t2_grid
        .iter()
        .map(|&t2| strategy_point(strategy, lambda, t2, cutoff))
        .collect::<Result<Vec<_>>>()?;
    Ok(TradeoffCurve::for_strategy(strategy, points))
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| if i + 1 == steps { hi } else { lo + (hi - lo) * i as f64 / (steps - 1) as f64 })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{one_photon_success_probability, psi_joint_closed_form};

    fn lam(l: f64) -> SqueezingParam {
        SqueezingParam::new(l).unwrap()
    }

    fn cut(n: usize) -> FockCutoff {
        FockCutoff::new(n).unwrap()
    }

    #[test]
    fn simple_point_probability() {
        let s = Strategy::Simple(SimpleStrategy::new(1, 0).unwrap());
        let rec = strategy_point(s, lam(0.5), 0.9, None).unwrap();
        let spec = BeamSplitterSpec::from_transmittance(0.9).unwrap();
        assert!((rec.p_s - one_photon_success_probability(lam(0.5), spec)).abs() < 1e-10);
        assert!((rec.log10_ps - rec.p_s.log10()).abs() == 0.0);
    }

    #[test]
    fn rejects_endpoints() {
        let s = Strategy::Simple(SimpleStrategy::new(1, 0).unwrap());
        assert!(strategy_point(s, lam(0.5), 1.0, None).is_err());
        assert!(strategy_point(s, lam(0.5), 0.0, None).is_err());
    }

    #[test]
    fn probability_vanishes_towards_full_transmission() {
        for s in SimpleStrategy::DEFAULT_SET {
            let rec = strategy_point(s.into(), lam(0.5), 1.0 - 1e-6, None).unwrap();
            assert!(rec.p_s < 1e-5, "{s}: {}", rec.p_s);
        }
    }

    #[test]
    fn truncation_guard_trips_on_tiny_cutoff() {
        let s = Strategy::Simple(SimpleStrategy::new(1, 0).unwrap());
        assert!(matches!(strategy_point(s, lam(0.7), 0.9, Some(cut(4))), Err(crate::Error::Truncation { .. })));
    }

    #[test]
    fn brute_force_matches_closed_form_small() {
        let c = cut(14);
        let spec = BeamSplitterSpec::from_transmittance(0.8).unwrap();
        for id in JointStrategyId::ALL {
            let brute = brute_force_joint(id, lam(0.3), spec, c, CombinerConvention::Standard).unwrap();
            let closed = psi_joint_closed_form(id, lam(0.3), spec, c).unwrap();
            let f = brute.fidelity(&closed).unwrap();
            assert!(f > 1.0 - 1e-8, "{id}: {f}");
        }
    }

    #[test]
    fn mirrored_combiner_breaks_agreement() {
        let c = cut(12);
        let spec = BeamSplitterSpec::from_transmittance(0.8).unwrap();
        let id = JointStrategyId::OneZeroZeroOne;
        let brute = brute_force_joint(id, lam(0.3), spec, c, CombinerConvention::MirroredSign).unwrap();
        let closed = psi_joint_closed_form(id, lam(0.3), spec, c).unwrap();
        assert!(brute.fidelity(&closed).unwrap() < 0.99);
    }

    #[test]
    fn zero_squeezing_brute_force_is_zero() {
        let spec = BeamSplitterSpec::from_transmittance(0.8).unwrap();
        let s = brute_force_joint(JointStrategyId::OneOneOneOne, lam(0.0), spec, cut(4), CombinerConvention::Standard).unwrap();
        assert_eq!(s.norm_sqr(), 0.0);
    }

    #[test]
    fn homodyne_kills_odd_photon_numbers() {
        let c = cut(4);
        let s = PureState::fock(c, &[0, 0, 1, 0]).unwrap().add_scaled(crate::C64::new(1.0, 0.0), &PureState::fock(c, &[1, 1, 3, 2]).unwrap()).unwrap();
        let m = gaussian_measure(&s, GaussianProjector::QuadratureX0, GaussianProjector::CoherentVacuum).unwrap();
        assert_eq!(m.norm_sqr(), 0.0);
    }

    #[test]
    fn joint_probability_is_product_of_source_probabilities() {
        let spec = BeamSplitterSpec::from_transmittance(0.9).unwrap();
        let c = cut(30);
        for id in JointStrategyId::ALL {
            let plan = id.plan();
            let src = |a, b| crate::analytic::psi_subtracted(lam(0.5), spec, a, b, c).norm_sqr();
            let product = src(plan[0], plan[1]) * src(plan[2], plan[3]);
            let (p, _) = conditional_state(id.into(), lam(0.5), 0.9, c).unwrap();
            assert!((p - product).abs() < 1e-9 * product, "{id}: {p} vs {product}");
        }
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.5, 0.99, 50).len(), 50);
        assert_eq!(linspace(0.5, 0.99, 50)[49], 0.99);
        assert_eq!(linspace(0.2, 0.3, 1), vec![0.2]);
    }
}

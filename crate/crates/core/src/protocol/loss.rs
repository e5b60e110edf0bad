use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::analytic::{joint_state, JointStrategyId, SqueezingParam};
use super::conditional_state;
use crate::entanglement::{negativity, Bipartition, TRUNCATION_LIMIT};
use crate::error::{Error, Result};
use crate::fock::{DensityOperator, FockCutoff};
use crate::optics::{gaussian_bra_coefficients, loss_kraus_operator, BeamSplitterSpec, GaussianProjector, LossSpec};

/// Bra of "lose `m` photons, then project": `<g| K_m`.
fn lossy_bra(projector: GaussianProjector, m: usize, loss: LossSpec, cutoff: FockCutoff) -> Array1<C64> {
    let kraus = loss_kraus_operator(m, loss, cutoff);
    kraus.t().dot(&gaussian_bra_coefficients(projector, cutoff))
}

/// State of `(a1, b1)` for the `1,0,0,1` strategy when both homodyne
/// detectors (on `a2` and `b2`) have efficiency `eta`: every pair of loss
/// branches is measured with the `X`/`P` projectors and the results are
/// mixed. Normalized.
pub fn lossy_homodyne_state(
    lambda: SqueezingParam,
    t2: f64,
    loss: LossSpec,
    cutoff: FockCutoff,
) -> Result<DensityOperator> {
    let strategy = JointStrategyId::OneZeroZeroOne;
    let spec = BeamSplitterSpec::from_transmittance(t2)?;
    let js = joint_state(strategy, lambda, spec, cutoff)?;
    let (pa, pb) = strategy.projectors();
    let d = cutoff.dim();
    let bras_a: Vec<_> = (0..d).map(|m| lossy_bra(pa, m, loss, cutoff)).collect();
    let bras_b: Vec<_> = (0..d).map(|m| lossy_bra(pb, m, loss, cutoff)).collect();

    let side = d * d;
    let mut rho = Array2::<C64>::zeros((side, side));
    for ba in &bras_a {
        if ba.iter().all(|x| x.norm_sqr() == 0.0) {
            continue;
        }
        for bb in &bras_b {
            if bb.iter().all(|x| x.norm_sqr() == 0.0) {
                continue;
            }
            let chi = js.measure(ba, bb)?;
            let v = chi.as_slice();
            let nz: Vec<usize> = (0..side).filter(|&i| v[i].norm_sqr() > 0.0).collect();
            for &i in &nz {
                for &j in &nz {
                    rho[[i, j]] += v[i] * v[j].conj();
                }
            }
        }
    }
    let tr = rho.diag().sum().re;
    if !(tr > 0.0) {
        return Err(Error::Degenerate("every loss branch vanished".into()));
    }
    rho.mapv_inplace(|x| x / tr);
    // symmetrize away rounding so the Hermitian checks see an exact adjoint
    let sym = (&rho + &rho.t().mapv(|x| x.conj())) * C64::new(0.5, 0.0);
    DensityOperator::from_matrix(2, cutoff, sym)
}

/// Negativity of [`lossy_homodyne_state`].
pub fn lossy_negativity(lambda: SqueezingParam, t2: f64, loss: LossSpec, cutoff: FockCutoff) -> Result<f64> {
    negativity(&lossy_homodyne_state(lambda, t2, loss, cutoff)?, &Bipartition::two_mode())
}

/// Smallest cutoff tried by [`loss_scan_cutoff`].
pub const LOSS_SCAN_MIN_CUTOFF: usize = 16;
const LOSS_SCAN_MAX_CUTOFF: usize = 40;

/// Smallest cutoff from [`LOSS_SCAN_MIN_CUTOFF`] up at which the lossless
/// `1,0,0,1` output keeps its boundary mass under the truncation limit.
/// Loss only moves weight to lower photon numbers, so the lossy states are
/// covered too.
pub fn loss_scan_cutoff(lambda: SqueezingParam, t2: f64) -> Result<FockCutoff> {
    let mut last = None;
    for c in LOSS_SCAN_MIN_CUTOFF..=LOSS_SCAN_MAX_CUTOFF {
        let cutoff = FockCutoff::new(c)?;
        let (_, phi) = conditional_state(JointStrategyId::OneZeroZeroOne.into(), lambda, t2, cutoff)?;
        match phi.normalized()?.check_truncation(TRUNCATION_LIMIT) {
            Ok(()) => return Ok(cutoff),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one cutoff tried"))
}

/// Efficiency below which the lossy `1,0,0,1` negativity falls under
/// `reference`, to within `tol`. `None` when even perfect detection does
/// not beat the reference, or when no efficiency down to 0.05 drops below
/// it.
pub fn loss_crossing(
    lambda: SqueezingParam,
    t2: f64,
    reference: f64,
    cutoff: FockCutoff,
    tol: f64,
) -> Result<Option<f64>> {
    let neg = |eta: f64| lossy_negativity(lambda, t2, LossSpec::new(eta)?, cutoff);
    if neg(1.0)? <= reference {
        return Ok(None);
    }
    let mut hi = 1.0;
    let mut lo = None;
    for i in 1..20 {
        let eta = 1.0 - 0.05 * i as f64;
        if neg(eta)? <= reference {
            lo = Some(eta);
            break;
        }
        hi = eta;
    }
    let Some(mut lo) = lo else { return Ok(None) };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if neg(mid)? > reference {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::negativity_pure;
    use crate::fock::ModeIndex;
    use crate::optics::apply_loss;
    use crate::protocol::{brute_force_joint, gaussian_measure, CombinerConvention};

    fn lam(l: f64) -> SqueezingParam {
        SqueezingParam::new(l).unwrap()
    }

    fn cut(n: usize) -> FockCutoff {
        FockCutoff::new(n).unwrap()
    }

    #[test]
    fn perfect_detection_matches_pure_route() {
        let c = cut(16);
        let rho = lossy_homodyne_state(lam(0.5), 0.9, LossSpec::new(1.0).unwrap(), c).unwrap();
        let (_, phi) = crate::protocol::conditional_state(JointStrategyId::OneZeroZeroOne.into(), lam(0.5), 0.9, c).unwrap();
        let phi = phi.normalized().unwrap();
        let fid = rho.expectation(&phi).unwrap().re;
        assert!(fid > 1.0 - 1e-8, "{fid}");
        let a = negativity(&rho, &Bipartition::two_mode()).unwrap();
        let b = negativity_pure(&phi, &Bipartition::two_mode()).unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn matches_dense_kraus_pipeline() {
        let c = cut(14);
        let (l, t2, eta) = (0.3, 0.85, 0.8);
        let loss = LossSpec::new(eta).unwrap();
        let spec = BeamSplitterSpec::from_transmittance(t2).unwrap();
        let psi = brute_force_joint(JointStrategyId::OneZeroZeroOne, lam(l), spec, c, CombinerConvention::Standard).unwrap();
        let mut m = Array2::<C64>::zeros((225, 225));
        for (_, ba) in apply_loss(&psi, ModeIndex(2), loss).unwrap() {
            for (_, branch) in apply_loss(&ba, ModeIndex(3), loss).unwrap() {
                let chi = gaussian_measure(&branch, GaussianProjector::QuadratureX0, GaussianProjector::QuadratureP0).unwrap();
                m = m + chi.to_density().matrix();
            }
        }
        let dense = DensityOperator::from_matrix(2, c, m).unwrap().normalized().unwrap();
        let fast = lossy_homodyne_state(lam(l), t2, loss, c).unwrap();
        let dev = (dense.matrix() - fast.matrix()).iter().fold(0.0_f64, |a, x| a.max(x.norm()));
        assert!(dev < 1e-8, "{dev}");
    }

    #[test]
    fn scan_cutoff_meets_the_guard() {
        let c = loss_scan_cutoff(lam(0.5), 0.93).unwrap();
        // boundary mass at 16 is about 2.4e-8
        assert_eq!(c.max_photons(), 17);
        assert_eq!(loss_scan_cutoff(lam(0.2), 0.9).unwrap().max_photons(), LOSS_SCAN_MIN_CUTOFF);
        assert!(matches!(loss_scan_cutoff(lam(0.9), 0.99), Err(Error::Truncation { .. })));
    }

    #[test]
    fn negativity_falls_with_efficiency() {
        let c = cut(14);
        let mut last = f64::INFINITY;
        for eta in [1.0, 0.9, 0.8, 0.7] {
            let n = lossy_negativity(lam(0.4), 0.9, LossSpec::new(eta).unwrap(), c).unwrap();
            assert!(n <= last + 1e-12);
            last = n;
        }
    }
}

//! Optical elements in the truncated Fock basis: beam splitters, the
//! photon-subtraction measurement operator, pure-loss Kraus branches, and
//! the bra coefficients of the recentered Gaussian projectors.
//!
//! Beam-splitter convention: for `B(theta)` acting on modes `(a, s)` with
//! `t = cos(theta/2)` and `r = sin(theta/2)`,
//!
//! ```text
//! B = exp(-tan(theta/2) a s†) · exp(-ln(t) (s†s - a†a)) · exp(tan(theta/2) a† s)
//! ```
//!
//! which maps `a† -> t a† - r s†` and `s† -> t s† + r a†`, so
//! `B |1, 0> = t |1, 0> - r |0, 1>`. The mode passed first is always `a`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{config, domain, Result};
use crate::fock::{FockCutoff, ModeIndex, PureState};

/// Amplitude transmission and reflection of a lossless beam splitter.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct BeamSplitterSpec {
    t: f64,
    r: f64,
}

impl BeamSplitterSpec {
    pub const TOL: f64 = 1e-12;

    pub fn new(t: f64, r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&r) {
            return config(format!("beam splitter amplitudes t = {t}, r = {r} must lie in [0, 1]"));
        }
        if (t * t + r * r - 1.0).abs() > Self::TOL {
            return config(format!("beam splitter is not lossless: t^2 + r^2 = {}", t * t + r * r));
        }
        Ok(Self { t, r })
    }

    /// From the intensity transmittance `t^2`.
    pub fn from_transmittance(t2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t2) {
            return config(format!("transmittance {t2} must lie in [0, 1]"));
        }
        Ok(Self { t: t2.sqrt(), r: (1.0 - t2).sqrt() })
    }

    /// From the mixing angle, `t = cos(theta/2)`, `r = sin(theta/2)`.
    pub fn from_angle(theta: f64) -> Result<Self> {
        Self::new((theta / 2.0).cos(), (theta / 2.0).sin())
    }

    pub fn balanced() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self { t: h, r: h }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn transmittance(&self) -> f64 {
        self.t * self.t
    }

    pub fn angle(&self) -> f64 {
        2.0 * self.r.atan2(self.t)
    }
}

/// Recentered Gaussian measurement on one mode.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum GaussianProjector {
    /// Coherent-state projection at zero displacement (vacuum).
    CoherentVacuum,
    /// Position quadrature eigenstate at `x = 0`.
    QuadratureX0,
    /// Momentum quadrature eigenstate at `p = 0`.
    QuadratureP0,
}

/// Pure-loss channel with intensity transmission `eta`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct LossSpec {
    eta: f64,
}

impl LossSpec {
    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return config(format!("efficiency {eta} must lie in [0, 1]"));
        }
        Ok(Self { eta })
    }

    pub fn efficiency(&self) -> f64 {
        self.eta
    }
}

type BsKey = (u64, u64, usize);

fn bs_cache() -> &'static RwLock<HashMap<BsKey, Arc<Array2<C64>>>> {
    static CACHE: OnceLock<RwLock<HashMap<BsKey, Arc<Array2<C64>>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Two-mode matrix of the beam splitter on the truncated space, row/column
/// index `n_a * (cutoff + 1) + n_s`. Blocks of fixed total photon number
/// `N <= cutoff` are exactly unitary; for larger `N` the matrix is the
/// projection of the full block onto the kept occupations.
///
/// Results are memoized per `(spec, cutoff)`.
pub fn beam_splitter_matrix(spec: BeamSplitterSpec, cutoff: FockCutoff) -> Arc<Array2<C64>> {
    signed_beam_splitter_matrix(spec.t, spec.r, cutoff)
}

/// Same as [`beam_splitter_matrix`] but with the sign of `r` flipped, i.e.
/// the mirror-image convention `a† -> t a† + r s†`.
pub fn mirrored_beam_splitter_matrix(spec: BeamSplitterSpec, cutoff: FockCutoff) -> Arc<Array2<C64>> {
    signed_beam_splitter_matrix(spec.t, -spec.r, cutoff)
}

fn signed_beam_splitter_matrix(t: f64, r: f64, cutoff: FockCutoff) -> Arc<Array2<C64>> {
    let key = (t.to_bits(), r.to_bits(), cutoff.max_photons());
    if let Some(m) = bs_cache().read().expect("cache lock").get(&key) {
        return Arc::clone(m);
    }
    let built = Arc::new(build_beam_splitter(t, r, cutoff));
    let mut guard = bs_cache().write().expect("cache lock");
    Arc::clone(guard.entry(key).or_insert(built))
}

/// Builds each total-photon block column by column from the transformed
/// creation operators:
/// `B|n, m> = (t a† - r s†)^n (r a† + t s†)^m |0, 0> / sqrt(n! m!)`.
fn build_beam_splitter(t: f64, r: f64, cutoff: FockCutoff) -> Array2<C64> {
    let d = cutoff.dim();
    let c = cutoff.max_photons();
    let mut out = Array2::<C64>::zeros((d * d, d * d));
    // block[n][j] = <j, N - j| B |n, N - n>
    let mut prev: Vec<Vec<f64>> = vec![vec![1.0]];
    for total in 0..=2 * c {
        let block: Vec<Vec<f64>> = if total == 0 {
            vec![vec![1.0]]
        } else {
            (0..=total)
                .map(|n| {
                    let m = total - n;
                    let mut col = vec![0.0; total + 1];
                    // raise |n-1, m> with (t a† - r s†) or |0, m-1> with (r a† + t s†)
                    let (src, ca, cs, norm) = if n > 0 {
                        (&prev[n - 1], t, -r, (n as f64).sqrt())
                    } else {
                        (&prev[0], r, t, (m as f64).sqrt())
                    };
                    for (j, &x) in src.iter().enumerate() {
                        if x == 0.0 {
                            continue;
                        }
                        // a†|j, N-1-j> = sqrt(j+1)|j+1, N-1-j>; s†|j, N-1-j> = sqrt(N-j)|j, N-j>
                        col[j + 1] += ca * ((j + 1) as f64).sqrt() * x;
                        col[j] += cs * ((total - j) as f64).sqrt() * x;
                    }
                    col.iter_mut().for_each(|v| *v /= norm);
                    col
                })
                .collect()
        };
        for (n, col) in block.iter().enumerate() {
            let m = total - n;
            if n > c || m > c {
                continue;
            }
            for (j, &v) in col.iter().enumerate() {
                let k = total - j;
                if j <= c && k <= c && v != 0.0 {
                    out[[j * d + k, n * d + m]] = C64::new(v, 0.0);
                }
            }
        }
        prev = block;
    }
    out
}

/// Literal evaluation of the three-factor exponential form, block by block:
/// `exp(-tau a s†) · t^(n_a - n_s) · exp(tau a† s)` with `tau = r / t`.
/// Undefined at `t = 0`. Loses precision for large blocks; intended as a
/// cross-check of [`beam_splitter_matrix`].
pub fn beam_splitter_matrix_factored(spec: BeamSplitterSpec, cutoff: FockCutoff) -> Result<Array2<C64>> {
    if spec.t == 0.0 {
        return domain("factored beam splitter form is undefined at t = 0");
    }
    let d = cutoff.dim();
    let c = cutoff.max_photons();
    let tau = spec.r / spec.t;
    let mut out = Array2::<C64>::zeros((d * d, d * d));
    let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
    for total in 0..=2 * c {
        let k = total + 1;
        // basis |j, total - j>, j = 0..=total
        let mut first = Array2::<f64>::zeros((k, k)); // exp(tau a† s)
        let mut third = Array2::<f64>::zeros((k, k)); // exp(-tau a s†)
        for j in 0..k {
            for step in 0..k {
                if j + step < k {
                    let up = fact(j + step) / fact(j) * fact(total - j) / fact(total - j - step);
                    first[[j + step, j]] = tau.powi(step as i32) / fact(step) * up.sqrt();
                }
                if step <= j {
                    let down = fact(j) / fact(j - step) * fact(total - j + step) / fact(total - j);
                    third[[j - step, j]] = (-tau).powi(step as i32) / fact(step) * down.sqrt();
                }
            }
        }
        let middle = Array2::from_diag(&Array1::from_shape_fn(k, |j| spec.t.powi(2 * j as i32 - total as i32)));
        let block = third.dot(&middle).dot(&first);
        for n in 0..k {
            for j in 0..k {
                let (m, kk) = (total - n, total - j);
                if n <= c && m <= c && j <= c && kk <= c {
                    out[[j * d + kk, n * d + m]] = C64::new(block[[j, n]], 0.0);
                }
            }
        }
    }
    Ok(out)
}

/// Measurement operator for detecting `k` photons in the reflected port of a
/// beam splitter whose ancilla input is vacuum:
/// `<n-k| M_k |n> = (1/sqrt(k!)) (-r/t)^k t^n sqrt(n!/(n-k)!)`.
///
/// `k = 0` gives `diag(t^n)`: a beam splitter is present but nothing is
/// detected.
pub fn subtraction_operator(k: usize, spec: BeamSplitterSpec, cutoff: FockCutoff) -> Result<Array2<C64>> {
    if spec.t == 0.0 {
        return domain("subtraction operator is undefined at t = 0");
    }
    let d = cutoff.dim();
    let mut out = Array2::<C64>::zeros((d, d));
    if k >= d {
        return Ok(out);
    }
    // (1/sqrt(k!)) (-r/t)^k, then t^n sqrt(n!/(n-k)!) built incrementally
    let mut prefactor = 1.0;
    for i in 1..=k {
        prefactor *= -spec.r / spec.t / (i as f64).sqrt();
    }
    for n in k..d {
        let falling: f64 = ((n - k + 1)..=n).map(|i| (i as f64).sqrt()).product();
        out[[n - k, n]] = C64::new(prefactor * spec.t.powi(n as i32) * falling, 0.0);
    }
    Ok(out)
}

/// Subtraction by the explicit optical route: append a vacuum ancilla, mix
/// it with `mode` on the beam splitter, and project the ancilla onto `k`.
pub fn subtract_via_ancilla(
    state: &PureState,
    mode: ModeIndex,
    k: usize,
    spec: BeamSplitterSpec,
) -> Result<PureState> {
    let cutoff = state.cutoff();
    let ancilla_mode = ModeIndex(state.num_modes());
    let with_ancilla = state.tensor_product(&PureState::vacuum(1, cutoff)?)?;
    let mixed =
        with_ancilla.apply_two_mode_operator(mode, ancilla_mode, &beam_splitter_matrix(spec, cutoff))?;
    mixed.project_fock(ancilla_mode, k)
}

/// Hermite functions at the origin, `psi_n(0)`, for `n = 0..len`.
fn hermite_at_origin(len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    if len > 0 {
        out[0] = std::f64::consts::PI.powf(-0.25);
    }
    for n in (2..len).step_by(2) {
        out[n] = -((n - 1) as f64 / n as f64).sqrt() * out[n - 2];
    }
    out
}

/// Coefficients `<g|n>` of the projector's bra, so that the projected
/// amplitude is `sum_n coeff[n] psi_n`. Quadrature eigenstates are improper;
/// only the direction of the conditional state is meaningful.
pub fn gaussian_bra_coefficients(projector: GaussianProjector, cutoff: FockCutoff) -> Array1<C64> {
    let d = cutoff.dim();
    match projector {
        GaussianProjector::CoherentVacuum => {
            Array1::from_shape_fn(d, |n| if n == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
        }
        GaussianProjector::QuadratureX0 => hermite_at_origin(d).into_iter().map(|x| C64::new(x, 0.0)).collect(),
        GaussianProjector::QuadratureP0 => hermite_at_origin(d)
            .into_iter()
            .enumerate()
            // (-i)^n
            .map(|(n, x)| C64::new(0.0, -1.0).powi(n as i32) * x)
            .collect(),
    }
}

/// Kraus operator for losing exactly `m` photons:
/// `<n-m| K_m |n> = sqrt(C(n, m)) eta^((n-m)/2) (1-eta)^(m/2)`.
pub fn loss_kraus_operator(m: usize, loss: LossSpec, cutoff: FockCutoff) -> Array2<C64> {
    let d = cutoff.dim();
    let eta = loss.eta;
    let mut out = Array2::<C64>::zeros((d, d));
    for n in m..d {
        let kept = n - m;
        let binom = binomial(n, m);
        // powi keeps 0^0 = 1 at the endpoints
        let amp = binom.sqrt() * eta.sqrt().powi(kept as i32) * (1.0 - eta).sqrt().powi(m as i32);
        out[[kept, n]] = C64::new(amp, 0.0);
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Kraus-branch decomposition of pure loss on `mode`: `(m, K_m |psi>)` for
/// every branch with non-zero amplitude.
pub fn apply_loss(state: &PureState, mode: ModeIndex, loss: LossSpec) -> Result<Vec<(usize, PureState)>> {
    let cutoff = state.cutoff();
    let mut out = Vec::new();
    for m in 0..cutoff.dim() {
        let branch = state.apply_one_mode_operator(mode, &loss_kraus_operator(m, loss, cutoff))?;
        if branch.norm_sqr() > 0.0 {
            out.push((m, branch));
        }
    }
    Ok(out)
}

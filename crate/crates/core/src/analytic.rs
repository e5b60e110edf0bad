//! Closed-form states: the two-mode squeezed vacuum, photon-subtracted
//! states `psi_{i,j}`, the five four-mode joint states after the combining
//! beam splitters, and the two-mode states left by the Gaussian measurement.
//!
//! Joint states are kept in a structured form (a diagonal block plus a short
//! list of product terms) so that sweeps never materialize four-mode tensors.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayD, Ix2, IxDyn};
use num_complex::Complex64 as C64;

use crate::error::{config, Error, Result};
use crate::fock::{FockCutoff, PureState};
use crate::optics::{BeamSplitterSpec, GaussianProjector};

/// Squeezing `lambda = tanh(r)` of a two-mode squeezed vacuum.
#[derive(Copy, Clone, Debug, PartialEq, PartialOrd)]
pub struct SqueezingParam(f64);

impl SqueezingParam {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return config(format!("squeezing lambda = {lambda} must lie in [0, 1)"));
        }
        Ok(Self(lambda))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// What happens to one mode before the combining stage.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum ModeSubtraction {
    /// No beam splitter on this mode.
    Bare,
    /// Beam splitter present and `k` photons detected; `Detect(0)` is the
    /// tilde-zero event.
    Detect(usize),
}

impl ModeSubtraction {
    /// `0` maps to [`ModeSubtraction::Bare`], anything else to `Detect(k)`.
    pub fn from_count(k: usize) -> Self {
        if k == 0 {
            Self::Bare
        } else {
            Self::Detect(k)
        }
    }

    pub fn count(self) -> usize {
        match self {
            Self::Bare => 0,
            Self::Detect(k) => k,
        }
    }

    pub fn has_beam_splitter(self) -> bool {
        matches!(self, Self::Detect(_))
    }

    /// Factor picked up by Fock component `n`; zero when `n < k`.
    /// `(-r)^k t^(n-k) sqrt(C(n, k))`, the operator element of photon
    /// subtraction written without the division by `t`.
    fn factor(self, n: usize, spec: BeamSplitterSpec) -> f64 {
        match self {
            Self::Bare => 1.0,
            Self::Detect(k) if n < k => 0.0,
            Self::Detect(k) => {
                let binom = (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
                (-spec.r()).powi(k as i32) * spec.t().powi((n - k) as i32) * binom.sqrt()
            }
        }
    }
}

/// The five joint strategies; counts refer to modes `(a1, b1, a2, b2)` and
/// `~0` is a beam splitter with nothing detected.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum JointStrategyId {
    /// `1,0,~0,0`
    OneZeroTildeZero,
    /// `1,1,~0,~0`
    OneOneTildeTilde,
    /// `1,0,0,1`
    OneZeroZeroOne,
    /// `1,0,1,0`
    OneZeroOneZero,
    /// `1,1,1,1`
    OneOneOneOne,
}

impl JointStrategyId {
    pub const ALL: [Self; 5] = [
        Self::OneZeroTildeZero,
        Self::OneOneTildeTilde,
        Self::OneZeroZeroOne,
        Self::OneZeroOneZero,
        Self::OneOneOneOne,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::OneZeroTildeZero => "1,0,~0,0",
            Self::OneOneTildeTilde => "1,1,~0,~0",
            Self::OneZeroZeroOne => "1,0,0,1",
            Self::OneZeroOneZero => "1,0,1,0",
            Self::OneOneOneOne => "1,1,1,1",
        }
    }

    /// Per-mode operations on `(a1, b1, a2, b2)`.
    pub fn plan(self) -> [ModeSubtraction; 4] {
        use ModeSubtraction::{Bare, Detect};
        match self {
            Self::OneZeroTildeZero => [Detect(1), Bare, Detect(0), Bare],
            Self::OneOneTildeTilde => [Detect(1), Detect(1), Detect(0), Detect(0)],
            Self::OneZeroZeroOne => [Detect(1), Bare, Bare, Detect(1)],
            Self::OneZeroOneZero => [Detect(1), Bare, Detect(1), Bare],
            Self::OneOneOneOne => [Detect(1), Detect(1), Detect(1), Detect(1)],
        }
    }

    /// Gaussian measurement on `(a2, b2)` giving the most entangled output:
    /// coherent projection for the two single-sided strategies, `X`/`P`
    /// homodyne for the rest.
    pub fn projectors(self) -> (GaussianProjector, GaussianProjector) {
        match self {
            Self::OneZeroTildeZero | Self::OneZeroOneZero => {
                (GaussianProjector::CoherentVacuum, GaussianProjector::CoherentVacuum)
            }
            _ => (GaussianProjector::QuadratureX0, GaussianProjector::QuadratureP0),
        }
    }

    /// Total number of detected photons.
    pub fn photons(self) -> usize {
        self.plan().iter().map(|m| m.count()).sum()
    }
}

impl fmt::Display for JointStrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for JointStrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace() && *c != '(' && *c != ')').collect();
        Self::ALL
            .into_iter()
            .find(|id| id.label() == compact)
            .ok_or_else(|| Error::Config(format!("unknown joint strategy label '{s}'")))
    }
}

/// `sqrt(1 - lambda^2) sum_n lambda^n |n, n>`, truncated at the cutoff.
pub fn tmsv(lambda: SqueezingParam, cutoff: FockCutoff) -> PureState {
    psi_subtracted(lambda, BeamSplitterSpec::balanced(), ModeSubtraction::Bare, ModeSubtraction::Bare, cutoff)
}

/// `M_a M_b |TMSV>` in closed form: the Fock component `|n, n>` of the
/// squeezed vacuum lands on `|n - i, n - j>` with the product of the two
/// subtraction factors. Both subtracting modes share `spec`.
pub fn psi_subtracted(
    lambda: SqueezingParam,
    spec: BeamSplitterSpec,
    a: ModeSubtraction,
    b: ModeSubtraction,
    cutoff: FockCutoff,
) -> PureState {
    let l = lambda.value();
    let d = cutoff.dim();
    let (i, j) = (a.count(), b.count());
    let norm = (1.0 - l * l).sqrt();
    let mut amps = Array2::<C64>::zeros((d, d));
    for n in i.max(j)..d {
        let v = norm * l.powi(n as i32) * a.factor(n, spec) * b.factor(n, spec);
        amps[[n - i, n - j]] = C64::new(v, 0.0);
    }
    PureState::from_amplitudes(cutoff, amps.into_dyn()).expect("shape follows cutoff")
}

/// Four-mode state on `(a1, b1, a2, b2)` written as
/// `sum_{n,m} d(n, m) |n, n, m, m> + sum_i c_i |L_i> ⊗ |R_i>`.
#[derive(Clone, Debug)]
pub struct JointState {
    cutoff: FockCutoff,
    diagonal: Option<Array2<f64>>,
    terms: Vec<(f64, Array2<C64>, Array2<C64>)>,
}

impl JointState {
    pub fn new(cutoff: FockCutoff) -> Self {
        Self { cutoff, diagonal: None, terms: Vec::new() }
    }

    pub fn with_diagonal(mut self, f: impl Fn(usize, usize) -> f64) -> Self {
        let d = self.cutoff.dim();
        self.diagonal = Some(Array2::from_shape_fn((d, d), |(n, m)| f(n, m)));
        self
    }

    pub fn with_term(mut self, coef: f64, left: &PureState, right: &PureState) -> Result<Self> {
        let as2 = |s: &PureState| -> Result<Array2<C64>> {
            if s.cutoff() != self.cutoff {
                return config("product term has a different cutoff");
            }
            s.amplitudes()
                .clone()
                .into_dimensionality::<Ix2>()
                .map_err(|_| Error::Config("product terms must be two-mode states".into()))
        };
        let (l, r) = (as2(left)?, as2(right)?);
        self.terms.push((coef, l, r));
        Ok(self)
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn to_dense(&self) -> PureState {
        let d = self.cutoff.dim();
        let mut amps = ArrayD::<C64>::zeros(IxDyn(&[d, d, d, d]));
        for (c, l, r) in &self.terms {
            for ((a1, b1), &x) in l.indexed_iter() {
                if x.norm_sqr() == 0.0 {
                    continue;
                }
                for ((a2, b2), &y) in r.indexed_iter() {
                    amps[[a1, b1, a2, b2]] += *c * x * y;
                }
            }
        }
        if let Some(diag) = &self.diagonal {
            for ((n, m), &v) in diag.indexed_iter() {
                amps[[n, n, m, m]] += v;
            }
        }
        PureState::from_amplitudes(self.cutoff, amps).expect("shape follows cutoff")
    }

    /// Squared norm without forming the dense tensor.
    pub fn norm_sqr(&self) -> f64 {
        let dot = |a: &Array2<C64>, b: &Array2<C64>| -> C64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };
        let mut total = C64::new(0.0, 0.0);
        for (ci, li, ri) in &self.terms {
            for (cj, lj, rj) in &self.terms {
                total += ci * cj * dot(li, lj) * dot(ri, rj);
            }
        }
        if let Some(diag) = &self.diagonal {
            total += diag.iter().map(|v| v * v).sum::<f64>();
            for (c, l, r) in &self.terms {
                let overlap: C64 = diag
                    .indexed_iter()
                    .map(|((n, m), &v)| v * l[[n, n]] * r[[m, m]])
                    .sum();
                total += 2.0 * c * overlap.re;
            }
        }
        total.re
    }

    /// Contracts `a2` and `b2` with bra coefficients; the result lives on
    /// `(a1, b1)`.
    pub fn measure(&self, bra_a2: &Array1<C64>, bra_b2: &Array1<C64>) -> Result<PureState> {
        let d = self.cutoff.dim();
        if bra_a2.len() != d || bra_b2.len() != d {
            return config("bra coefficients do not match the cutoff");
        }
        let mut out = Array2::<C64>::zeros((d, d));
        for (c, l, r) in &self.terms {
            let w: C64 = r.indexed_iter().map(|((k, q), &v)| bra_a2[k] * bra_b2[q] * v).sum();
            out.scaled_add(w * c, l);
        }
        if let Some(diag) = &self.diagonal {
            for n in 0..d {
                let s: C64 = (0..d).map(|m| diag[[n, m]] * bra_a2[m] * bra_b2[m]).sum();
                out[[n, n]] += s;
            }
        }
        PureState::from_amplitudes(self.cutoff, out.into_dyn())
    }
}

/// Structured form of the joint state after both combining beam splitters.
///
/// The relative signs are the ones produced by the beam-splitter convention
/// of [`crate::optics`]; they are pinned by comparison with the brute-force
/// pipeline.
pub fn joint_state(
    strategy: JointStrategyId,
    lambda: SqueezingParam,
    spec: BeamSplitterSpec,
    cutoff: FockCutoff,
) -> Result<JointState> {
    use ModeSubtraction::{Bare, Detect};
    let psi = |a, b| psi_subtracted(lambda, spec, a, b, cutoff);
    let l = lambda.value();
    let (t, r) = (spec.t(), spec.r());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let pre = 1.0 - l * l;
    let js = JointState::new(cutoff);
    match strategy {
        JointStrategyId::OneZeroTildeZero | JointStrategyId::OneZeroOneZero => {
            let k = if strategy == JointStrategyId::OneZeroTildeZero { 1 } else { 2 };
            let (x, y) = (psi(Detect(k), Bare), psi(Detect(0), Bare));
            js.with_term(h, &x, &y)?.with_term(-h, &y, &x)
        }
        JointStrategyId::OneOneTildeTilde => {
            let (x, y) = (psi(Detect(1), Detect(0)), psi(Detect(0), Detect(1)));
            let lt2 = l * t * t;
            js.with_diagonal(|n, m| -0.5 * pre * r * r * l * lt2.powi((n + m) as i32) * (n + m + 2) as f64)
                .with_term(0.5, &x, &y)?
                .with_term(0.5, &y, &x)
        }
        JointStrategyId::OneZeroZeroOne => {
            let (x, y) = (psi(Detect(1), Bare), psi(Bare, Detect(1)));
            // (lambda t)^(n+m) / t, written so that t = 0 stays finite
            js.with_diagonal(|n, m| {
                if n == m {
                    0.0
                } else {
                    let s = (n + m) as i32;
                    0.5 * pre * r * r * l * l.powi(s) * t.powi(s - 1) * (n as f64 - m as f64)
                }
            })
            .with_term(0.5, &x, &y)?
            .with_term(-0.5, &y, &x)
        }
        JointStrategyId::OneOneOneOne => {
            let (x, y) = (psi(Detect(2), Detect(0)), psi(Detect(0), Detect(2)));
            let lt2 = l * t * t;
            let quad = |n: usize| ((n + 1) * (n + 2)) as f64;
            js.with_diagonal(|n, m| {
                -0.25 * pre * r.powi(4) * l * l * lt2.powi((n + m) as i32) * (quad(n) + quad(m))
            })
            .with_term(0.5, &x, &y)?
            .with_term(0.5, &y, &x)
        }
    }
}

/// Dense four-mode joint state on `(a1, b1, a2, b2)`, unnormalized; its
/// squared norm is the joint heralding probability.
pub fn psi_joint_closed_form(
    strategy: JointStrategyId,
    lambda: SqueezingParam,
    spec: BeamSplitterSpec,
    cutoff: FockCutoff,
) -> Result<PureState> {
    Ok(joint_state(strategy, lambda, spec, cutoff)?.to_dense())
}

/// Printed closed form of the two-mode state left on `(a1, b1)` after the
/// preferred Gaussian measurement. Only its direction is meaningful.
pub fn phi_closed_form(
    strategy: JointStrategyId,
    lambda: SqueezingParam,
    spec: BeamSplitterSpec,
    cutoff: FockCutoff,
) -> PureState {
    use ModeSubtraction::{Bare, Detect};
    let l = lambda.value();
    let t = spec.t();
    let diagonal = |f: &dyn Fn(f64) -> f64| {
        let d = cutoff.dim();
        let amps = Array2::from_shape_fn((d, d), |(i, j)| if i == j { C64::new(f(i as f64), 0.0) } else { C64::new(0.0, 0.0) });
        PureState::from_amplitudes(cutoff, amps.into_dyn()).expect("shape follows cutoff")
    };
    match strategy {
        JointStrategyId::OneZeroTildeZero => psi_subtracted(lambda, spec, Detect(1), Bare, cutoff),
        JointStrategyId::OneZeroOneZero => psi_subtracted(lambda, spec, Detect(2), Bare, cutoff),
        JointStrategyId::OneOneTildeTilde => {
            let x = l * t * t;
            diagonal(&|n| x.powf(n) * (n + 2.0 + x * x * (n + 1.0)))
        }
        JointStrategyId::OneZeroZeroOne => {
            let y = l * t;
            diagonal(&|n| y.powf(n) * (n + y * y * (n + 1.0)))
        }
        JointStrategyId::OneOneOneOne => {
            let x = l * t * t;
            let x2 = x * x;
            diagonal(&|n| x.powf(n) * ((n + 1.0) * (n + 2.0) + 2.0 + x2 * ((x2 + 2.0) * n * (n + 3.0) + 2.0 * x2 + 3.0)))
        }
    }
}

/// Heralding probability of one-photon subtraction from one mode,
/// `(1 - l^2) r^2 l^2 / (1 - l^2 t^2)^2`, untruncated.
pub fn one_photon_success_probability(lambda: SqueezingParam, spec: BeamSplitterSpec) -> f64 {
    let l = lambda.value();
    let (t, r) = (spec.t(), spec.r());
    (1.0 - l * l) * r * r * l * l / (1.0 - l * l * t * t).powi(2)
}

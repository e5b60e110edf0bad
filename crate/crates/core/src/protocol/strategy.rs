use std::fmt;
use std::str::FromStr;

use crate::analytic::{psi_subtracted, JointStrategyId, ModeSubtraction, SqueezingParam};
use crate::error::{config, Error, Result};
use crate::fock::{FockCutoff, PureState};
use crate::optics::BeamSplitterSpec;

/// Subtraction of `k_a` photons from one mode of a squeezed vacuum and `k_b`
/// from the other, labelled `"k_a/k_b"`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimpleStrategy {
    k_a: usize,
    k_b: usize,
}

impl SimpleStrategy {
    pub const MAX_COUNT: usize = 3;

    /// The strategy family plotted by default.
    pub const DEFAULT_SET: [SimpleStrategy; 5] = [
        Self { k_a: 1, k_b: 0 },
        Self { k_a: 1, k_b: 1 },
        Self { k_a: 2, k_b: 0 },
        Self { k_a: 2, k_b: 2 },
        Self { k_a: 3, k_b: 3 },
    ];

    pub fn new(k_a: usize, k_b: usize) -> Result<Self> {
        if k_a + k_b == 0 {
            return config("a subtraction strategy must subtract at least one photon");
        }
        if k_a > Self::MAX_COUNT || k_b > Self::MAX_COUNT {
            return config(format!("subtraction counts {k_a}/{k_b} exceed {}", Self::MAX_COUNT));
        }
        Ok(Self { k_a, k_b })
    }

    /// Every valid strategy, ordered by label.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::new();
        for k_a in 0..=Self::MAX_COUNT {
            for k_b in 0..=Self::MAX_COUNT {
                if let Ok(s) = Self::new(k_a, k_b) {
                    out.push(s);
                }
            }
        }
        out
    }

    pub fn k_a(self) -> usize {
        self.k_a
    }

    pub fn k_b(self) -> usize {
        self.k_b
    }

    pub fn photons(self) -> usize {
        self.k_a + self.k_b
    }

    pub fn label(self) -> String {
        format!("{}/{}", self.k_a, self.k_b)
    }

    /// Unnormalized heralded state; its squared norm is the success
    /// probability.
    pub fn state(self, lambda: SqueezingParam, spec: BeamSplitterSpec, cutoff: FockCutoff) -> PureState {
        psi_subtracted(
            lambda,
            spec,
            ModeSubtraction::from_count(self.k_a),
            ModeSubtraction::from_count(self.k_b),
            cutoff,
        )
    }
}

impl fmt::Display for SimpleStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.k_a, self.k_b)
    }
}

impl FromStr for SimpleStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown simple strategy label '{s}'"));
        let (a, b) = s.trim().split_once('/').ok_or_else(bad)?;
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        Self::new(a, b).map_err(|_| bad())
    }
}

/// Any strategy that yields one point per transmittance.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Simple(SimpleStrategy),
    Joint(JointStrategyId),
}

impl Strategy {
    pub fn label(self) -> String {
        match self {
            Self::Simple(s) => s.label(),
            Self::Joint(j) => j.label().to_string(),
        }
    }

    /// Number of detected photons, used to break envelope ties.
    pub fn photons(self) -> usize {
        match self {
            Self::Simple(s) => s.photons(),
            Self::Joint(j) => j.photons(),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl From<SimpleStrategy> for Strategy {
    fn from(s: SimpleStrategy) -> Self {
        Self::Simple(s)
    }
}

impl From<JointStrategyId> for Strategy {
    fn from(j: JointStrategyId) -> Self {
        Self::Joint(j)
    }
}

impl FromStr for Strategy {
    type Err = Error;

    /// `"k_a/k_b"` for simple strategies, comma-separated counts for joint
    /// ones.
    fn from_str(s: &str) -> Result<Self> {
        if s.contains('/') {
            s.parse().map(Self::Simple)
        } else if s.contains(',') {
            s.parse().map(Self::Joint)
        } else {
            Err(Error::Config(format!("unknown strategy label '{s}'")))
        }
    }
}

/// One point of a trade-off curve.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub t2: f64,
    pub p_s: f64,
    pub log10_ps: f64,
    pub negativity: f64,
}

impl SweepRecord {
    pub fn new(t2: f64, p_s: f64, negativity: f64) -> Self {
        Self { t2, p_s, log10_ps: p_s.log10(), negativity }
    }
}

/// Negativity against success probability. Strategy curves are ordered by
/// transmittance, the envelope by probability bin.
#[derive(Clone, Debug, PartialEq)]
pub struct TradeoffCurve {
    pub label: String,
    /// Detected photons, lower wins envelope ties.
    pub photons: usize,
    pub points: Vec<SweepRecord>,
}

impl TradeoffCurve {
    pub fn new(label: impl Into<String>, photons: usize, points: Vec<SweepRecord>) -> Self {
        Self { label: label.into(), photons, points }
    }

    pub fn for_strategy(strategy: Strategy, points: Vec<SweepRecord>) -> Self {
        Self::new(strategy.label(), strategy.photons(), points)
    }

    /// Success probability strictly decreasing and negativity strictly
    /// increasing along the transmittance grid.
    pub fn is_strictly_monotone(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].p_s < w[0].p_s && w[1].negativity > w[0].negativity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_labels() {
        let s: SimpleStrategy = "2/1".parse().unwrap();
        assert_eq!((s.k_a(), s.k_b()), (2, 1));
        assert_eq!(s.label(), "2/1");
        assert!("0/0".parse::<SimpleStrategy>().is_err());
        assert!("4/0".parse::<SimpleStrategy>().is_err());
        assert!("x/1".parse::<SimpleStrategy>().is_err());
        assert_eq!(SimpleStrategy::all().len(), 15);
    }

    #[test]
    fn strategy_dispatch() {
        assert_eq!("1/1".parse::<Strategy>().unwrap(), Strategy::Simple(SimpleStrategy::new(1, 1).unwrap()));
        assert_eq!("1,1,1,1".parse::<Strategy>().unwrap(), Strategy::Joint(JointStrategyId::OneOneOneOne));
        assert!("banana".parse::<Strategy>().is_err());
        assert_eq!(Strategy::Joint(JointStrategyId::OneOneTildeTilde).photons(), 2);
    }

    #[test]
    fn monotonicity_check() {
        let up = TradeoffCurve::new("x", 1, vec![SweepRecord::new(0.5, 0.2, 1.0), SweepRecord::new(0.9, 0.1, 2.0)]);
        assert!(up.is_strictly_monotone());
        let flat = TradeoffCurve::new("x", 1, vec![SweepRecord::new(0.5, 0.2, 1.0), SweepRecord::new(0.9, 0.1, 1.0)]);
        assert!(!flat.is_strictly_monotone());
    }
}

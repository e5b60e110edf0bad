use super::{auto_cutoff, strategy_point, SimpleStrategy, Strategy, SweepRecord, TradeoffCurve};
use crate::analytic::{JointStrategyId, SqueezingParam};
use crate::error::{config, Result};
use crate::fock::FockCutoff;
use crate::optics::BeamSplitterSpec;

/// Uniform bins over `log10(p_s)`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct EnvelopeBins {
    lo: f64,
    hi: f64,
    count: usize,
}

impl Default for EnvelopeBins {
    /// 400 bins over `[-6, 0]`.
    fn default() -> Self {
        Self { lo: -6.0, hi: 0.0, count: 400 }
    }
}

impl EnvelopeBins {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo < hi) || count == 0 || !lo.is_finite() || !hi.is_finite() {
            return config(format!("invalid envelope bins [{lo}, {hi}] x {count}"));
        }
        Ok(Self { lo, hi, count })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }

    /// Bin holding `log10_ps`, if any.
    pub fn index_of(&self, log10_ps: f64) -> Option<usize> {
        if !(self.lo..=self.hi).contains(&log10_ps) {
            return None;
        }
        Some((((log10_ps - self.lo) / self.width()) as usize).min(self.count - 1))
    }
}

/// Best value found for one probability.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeBin {
    pub log10_ps: f64,
    pub negativity: f64,
    /// Transmittance of the winning strategy at this probability.
    pub t2: f64,
    /// Label of the winning strategy.
    pub source: String,
}

/// Upper envelope of several trade-off curves on a probability grid; bins
/// no curve reaches are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    bins: EnvelopeBins,
    values: Vec<Option<EnvelopeBin>>,
}

impl Envelope {
    pub const LABEL: &'static str = "envelope";

    pub fn bins(&self) -> &EnvelopeBins {
        &self.bins
    }

    pub fn values(&self) -> &[Option<EnvelopeBin>] {
        &self.values
    }

    /// Occupied bins as a curve labelled `"envelope"`, in increasing
    /// probability.
    pub fn curve(&self) -> TradeoffCurve {
        let points = self
            .values
            .iter()
            .flatten()
            .map(|b| SweepRecord { t2: b.t2, p_s: 10f64.powf(b.log10_ps), log10_ps: b.log10_ps, negativity: b.negativity })
            .collect();
        TradeoffCurve::new(Self::LABEL, 0, points)
    }

    /// Envelope value in the bin holding `log10_ps`.
    pub fn value_at(&self, log10_ps: f64) -> Option<f64> {
        self.bins.index_of(log10_ps).and_then(|i| self.values[i].as_ref()).map(|b| b.negativity)
    }
}

/// Per bin, the largest negativity any curve reaches at the bin center,
/// interpolating each curve linearly in `log10(p_s)`. Ties go to the curve
/// with fewer detected photons.
pub fn optimal_envelope(curves: &[TradeoffCurve], bins: &EnvelopeBins) -> Result<Envelope> {
    if curves.is_empty() {
        return config("the envelope needs at least one curve");
    }
    let prepared: Vec<(&TradeoffCurve, Vec<SweepRecord>)> = curves
        .iter()
        .map(|c| {
            let mut pts: Vec<SweepRecord> =
                c.points.iter().filter(|p| p.p_s > 0.0 && p.log10_ps.is_finite()).copied().collect();
            pts.sort_by(|a, b| a.log10_ps.total_cmp(&b.log10_ps));
            (c, pts)
        })
        .collect();

    let values = (0..bins.count)
        .map(|i| {
            let x = bins.center(i);
            let mut best: Option<(EnvelopeBin, usize)> = None;
            for (curve, pts) in &prepared {
                let Some((neg, t2)) = interpolate(pts, x) else { continue };
                let better = match &best {
                    None => true,
                    Some((b, photons)) => neg > b.negativity || (neg == b.negativity && curve.photons < *photons),
                };
                if better {
                    let bin = EnvelopeBin { log10_ps: x, negativity: neg, t2, source: curve.label.clone() };
                    best = Some((bin, curve.photons));
                }
            }
            best.map(|(b, _)| b)
        })
        .collect();
    Ok(Envelope { bins: *bins, values })
}

/// Negativity and transmittance at `x` on a curve sorted by `log10_ps`.
fn interpolate(pts: &[SweepRecord], x: f64) -> Option<(f64, f64)> {
    let (first, last) = (pts.first()?, pts.last()?);
    if x < first.log10_ps || x > last.log10_ps {
        return None;
    }
    let k = pts.partition_point(|p| p.log10_ps < x);
    if k == 0 || pts[k].log10_ps == x {
        return Some((pts[k].negativity, pts[k].t2));
    }
    let (a, b) = (&pts[k - 1], &pts[k]);
    let w = (x - a.log10_ps) / (b.log10_ps - a.log10_ps);
    Some((a.negativity + w * (b.negativity - a.negativity), a.t2 + w * (b.t2 - a.t2)))
}

/// Envelope of simple subtraction evaluated exactly: for a target
/// probability, each strategy's transmittance is found by bisection and
/// its negativity computed there.
#[derive(Clone, Debug)]
pub struct SimpleEnvelope {
    lambda: SqueezingParam,
    cutoff: Option<FockCutoff>,
    /// Strategy, start of its decreasing branch, probability there.
    branches: Vec<(SimpleStrategy, f64, f64)>,
}

const T2_FLOOR: f64 = 1e-6;
const T2_CEIL: f64 = 1.0 - 1e-12;

impl SimpleEnvelope {
    pub fn new(lambda: SqueezingParam, strategies: &[SimpleStrategy], cutoff: Option<FockCutoff>) -> Result<Self> {
        if strategies.is_empty() {
            return config("the envelope needs at least one strategy");
        }
        let mut ordered = strategies.to_vec();
        ordered.sort_by_key(|s| (s.photons(), *s));
        ordered.dedup();
        let mut env = Self { lambda, cutoff, branches: Vec::new() };
        for s in ordered {
            // p_s(t2) rises briefly near t2 = 0 for strong squeezing; start
            // the search where it starts to fall
            let mut start = (T2_FLOOR, env.probability(s, T2_FLOOR)?);
            for i in 1..100 {
                let t2 = i as f64 / 100.0;
                let p = env.probability(s, t2)?;
                if p > start.1 {
                    start = (t2, p);
                }
            }
            env.branches.push((s, start.0, start.1));
        }
        Ok(env)
    }

    /// Over the default strategy family.
    pub fn default_set(lambda: SqueezingParam, cutoff: Option<FockCutoff>) -> Result<Self> {
        Self::new(lambda, &SimpleStrategy::DEFAULT_SET, cutoff)
    }

    pub fn lambda(&self) -> SqueezingParam {
        self.lambda
    }

    fn cutoff_for(&self, s: SimpleStrategy, t2: f64) -> Result<FockCutoff> {
        match self.cutoff {
            Some(c) => Ok(c),
            None => auto_cutoff(Strategy::Simple(s), self.lambda, t2),
        }
    }

    fn probability(&self, s: SimpleStrategy, t2: f64) -> Result<f64> {
        let spec = BeamSplitterSpec::from_transmittance(t2)?;
        Ok(s.state(self.lambda, spec, self.cutoff_for(s, t2)?).norm_sqr())
    }

    /// Transmittance at which `s` succeeds with probability `p_s`, on the
    /// decreasing branch.
    pub fn transmittance_for(&self, s: SimpleStrategy, p_s: f64) -> Result<Option<f64>> {
        let Some(&(_, lo, p_lo)) = self.branches.iter().find(|b| b.0 == s) else {
            return config(format!("strategy {s} is not part of this envelope"));
        };
        if p_s > p_lo || p_s < self.probability(s, T2_CEIL)? {
            return Ok(None);
        }
        let (mut lo, mut hi) = (lo, T2_CEIL);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.probability(s, mid)? > p_s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some(0.5 * (lo + hi)))
    }

    /// Best simple-subtraction negativity at success probability `p_s`;
    /// `None` when no strategy reaches it.
    pub fn value_at(&self, p_s: f64) -> Result<Option<EnvelopeBin>> {
        let mut best: Option<EnvelopeBin> = None;
        for &(s, _, _) in &self.branches {
            let Some(t2) = self.transmittance_for(s, p_s)? else { continue };
            let rec = strategy_point(Strategy::Simple(s), self.lambda, t2, self.cutoff)?;
            // branches are sorted by photon count, so strict > keeps the
            // cheaper strategy on ties
            if best.as_ref().is_none_or(|b| rec.negativity > b.negativity) {
                best = Some(EnvelopeBin { log10_ps: p_s.log10(), negativity: rec.negativity, t2, source: s.label() });
            }
        }
        Ok(best)
    }

    /// [`Self::value_at`] at every bin center, labelled `"envelope"`.
    pub fn curve(&self, bins: &EnvelopeBins) -> Result<TradeoffCurve> {
        let mut points = Vec::new();
        for i in 0..bins.count() {
            let p_s = 10f64.powf(bins.center(i));
            if let Some(b) = self.value_at(p_s)? {
                points.push(SweepRecord { t2: b.t2, p_s, log10_ps: b.log10_ps, negativity: b.negativity });
            }
        }
        Ok(TradeoffCurve::new(Envelope::LABEL, 0, points))
    }
}

/// Joint-strategy point compared with the simple envelope at equal
/// success probability.
#[derive(Clone, Debug, PartialEq)]
pub struct GapPoint {
    pub t2: f64,
    pub p_s: f64,
    pub neg_joint: f64,
    pub neg_reference: f64,
    /// Simple strategy attaining the reference.
    pub reference_source: String,
    pub gap: f64,
}

/// Result of the search for the transmittance with the largest advantage.
#[derive(Clone, Debug, PartialEq)]
pub enum GapSearch {
    Advantage(GapPoint),
    /// Best point found, if the envelope covered any of the sweep.
    NoAdvantage(Option<GapPoint>),
}

/// `N_joint(t2) - N_env(p_s(t2))`, or `None` when the envelope does not
/// reach that probability.
pub fn envelope_gap(
    joint: JointStrategyId,
    env: &SimpleEnvelope,
    t2: f64,
    cutoff: Option<FockCutoff>,
) -> Result<Option<GapPoint>> {
    let rec = strategy_point(Strategy::Joint(joint), env.lambda, t2, cutoff)?;
    Ok(env.value_at(rec.p_s)?.map(|r| GapPoint {
        t2,
        p_s: rec.p_s,
        neg_joint: rec.negativity,
        neg_reference: r.negativity,
        reference_source: r.source,
        gap: rec.negativity - r.negativity,
    }))
}

/// Grid spacing of the coarse scan in [`find_optimal_gap_t`].
pub const GAP_GRID_STEP: f64 = 0.01;
/// Bracket width at which the golden-section refinement stops.
pub const GAP_TOL: f64 = 1e-4;

/// Transmittance maximizing the advantage of the `1,0,0,1` strategy over
/// simple subtraction: a scan with step 0.01 over `(0, 1)`, then
/// golden-section refinement around the best grid point.
pub fn find_optimal_gap_t(lambda: SqueezingParam, cutoff: Option<FockCutoff>) -> Result<GapSearch> {
    find_optimal_gap_against(&SimpleEnvelope::default_set(lambda, cutoff)?, cutoff)
}

/// [`find_optimal_gap_t`] against the envelope of a chosen strategy set.
pub fn find_optimal_gap_against(env: &SimpleEnvelope, cutoff: Option<FockCutoff>) -> Result<GapSearch> {
    let joint = JointStrategyId::OneZeroZeroOne;
    let steps = (1.0 / GAP_GRID_STEP).round() as usize;
    let mut best: Option<GapPoint> = None;
    for i in 1..steps {
        let t2 = i as f64 * GAP_GRID_STEP;
        if let Some(g) = envelope_gap(joint, env, t2, cutoff)? {
            if best.as_ref().is_none_or(|b| g.gap > b.gap) {
                best = Some(g);
            }
        }
    }
    let Some(grid_best) = best else { return Ok(GapSearch::NoAdvantage(None)) };

    let eval = |t2: f64| -> Result<f64> {
        Ok(envelope_gap(joint, env, t2, cutoff)?.map_or(f64::NEG_INFINITY, |g| g.gap))
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = (grid_best.t2 - GAP_GRID_STEP).max(GAP_GRID_STEP);
    let mut b = (grid_best.t2 + GAP_GRID_STEP).min(1.0 - GAP_GRID_STEP);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (eval(x1)?, eval(x2)?);
    while b - a > GAP_TOL {
        if f1 >= f2 {
            b = x2;
            (x2, f2) = (x1, f1);
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            (x1, f1) = (x2, f2);
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2)?;
        }
    }
    let refined = envelope_gap(joint, env, 0.5 * (a + b), cutoff)?;
    let best = match refined {
        Some(r) if r.gap > grid_best.gap => r,
        _ => grid_best,
    };
    Ok(if best.gap > 0.0 { GapSearch::Advantage(best) } else { GapSearch::NoAdvantage(Some(best)) })
}

//! Exact checks of the mode-reordering identity behind the joint states:
//! the triple binomial sum `f(N, K, P) = delta_{K,P}` and the invariance of
//! two squeezed vacua under the pair of balanced combining beam splitters.

use crate::analytic::{tmsv, ModeSubtraction, SqueezingParam};
use crate::error::{config, domain, Result};
use crate::fock::FockCutoff;
use crate::optics::BeamSplitterSpec;
use crate::protocol::{brute_force_plan, CombinerConvention};

/// Largest `N` for which the integer sum is evaluated exactly in `i128`.
pub const MAX_N: u32 = 30;

/// Arguments of the triple sum, `K <= N` and `P <= N`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct TripleSumArgs {
    n: u32,
    k: u32,
    p: u32,
}

impl TripleSumArgs {
    pub fn new(n: u32, k: u32, p: u32) -> Result<Self> {
        if k > n || p > n {
            return config(format!("triple sum needs K, P <= N, got ({n}, {k}, {p})"));
        }
        Ok(Self { n, k, p })
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn k(self) -> u32 {
        self.k
    }

    pub fn p(self) -> u32 {
        self.p
    }
}

/// `C(n, k)` exactly, zero when `k` is out of range.
fn binom(n: i64, k: i64) -> i128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// The signed integer sum
/// `sum_{n,k,p} (-1)^(K+P-k-p) C(N,n) C(n,k) C(N-n,K-k) C(n,p) C(N-n,P-p)`.
pub fn triple_sum_integer(args: TripleSumArgs) -> Result<i128> {
    if args.n > MAX_N {
        return domain(format!("N = {} exceeds the exact range N <= {MAX_N}", args.n));
    }
    let (n_tot, k_tot, p_tot) = (args.n as i64, args.k as i64, args.p as i64);
    let mut sum: i128 = 0;
    for n in 0..=n_tot {
        let outer = binom(n_tot, n);
        for k in 0..=k_tot {
            let left = binom(n, k) * binom(n_tot - n, k_tot - k);
            if left == 0 {
                continue;
            }
            for p in 0..=p_tot {
                let right = binom(n, p) * binom(n_tot - n, p_tot - p);
                let sign = if (k_tot + p_tot - k - p) % 2 == 0 { 1 } else { -1 };
                sum += sign * outer * left * right;
            }
        }
    }
    Ok(sum)
}

/// `f(N, K, P) = 2^-N (C(N,K) C(N,P))^(-1/2) * triple_sum_integer`.
pub fn f_triple_sum(args: TripleSumArgs) -> Result<f64> {
    let s = triple_sum_integer(args)?;
    let norm = (binom(args.n as i64, args.k as i64) as f64 * binom(args.n as i64, args.p as i64) as f64).sqrt();
    Ok(s as f64 / 2f64.powi(args.n as i32) / norm)
}

/// Whether the integer sum equals `2^N C(N, K)` for `K = P` and `0`
/// otherwise, exactly.
pub fn exact_delta_holds(args: TripleSumArgs) -> Result<bool> {
    let s = triple_sum_integer(args)?;
    let want = if args.k == args.p { (1i128 << args.n) * binom(args.n as i64, args.k as i64) } else { 0 };
    Ok(s == want)
}

/// A triple where the identity fails.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DeltaViolation {
    pub n: u32,
    pub k: u32,
    pub p: u32,
    pub value: f64,
}

/// Tolerance on `|f - delta_{K,P}|`.
pub const DELTA_TOL: f64 = 1e-10;

/// Every `(N, K, P)` with `N <= n_max` where `f` misses `delta_{K,P}` by more
/// than [`DELTA_TOL`] or the integer identity fails.
pub fn verify_delta(n_max: u32) -> Result<Vec<DeltaViolation>> {
    if n_max > MAX_N {
        return domain(format!("N_max = {n_max} exceeds {MAX_N}"));
    }
    let mut out = Vec::new();
    for n in 0..=n_max {
        for k in 0..=n {
            for p in 0..=n {
                let args = TripleSumArgs::new(n, k, p)?;
                let value = f_triple_sum(args)?;
                let delta = if k == p { 1.0 } else { 0.0 };
                if (value - delta).abs() > DELTA_TOL || !exact_delta_holds(args)? {
                    out.push(DeltaViolation { n, k, p, value });
                }
            }
        }
    }
    Ok(out)
}

/// Fidelity between the brute-force combination of two squeezed vacua (no
/// subtraction, modes ordered `a1, b1, a2, b2`) and the product of the two
/// input vacua. `None` picks the adaptive cutoff for `lambda`.
pub fn verify_factorization(lambda: SqueezingParam, cutoff: Option<FockCutoff>) -> Result<f64> {
    let cutoff = match cutoff {
        Some(c) => c,
        None => FockCutoff::adaptive(lambda.value(), 0)?,
    };
    let combined = brute_force_plan(
        [ModeSubtraction::Bare; 4],
        lambda,
        BeamSplitterSpec::balanced(),
        cutoff,
        CombinerConvention::Standard,
    )?;
    let source = tmsv(lambda, cutoff);
    combined.fidelity(&source.tensor_product(&source)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(n: u32, k: u32, p: u32) -> f64 {
        f_triple_sum(TripleSumArgs::new(n, k, p).unwrap()).unwrap()
    }

    #[test]
    fn small_values() {
        assert_eq!(f(0, 0, 0), 1.0);
        assert_eq!(f(3, 1, 2), 0.0);
        assert!((f(5, 2, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hand_checked_integer_sums() {
        // N = 1: (K, P) = (0, 0) -> 2, (1, 1) -> 2, (0, 1) -> 0
        let s = |k, p| triple_sum_integer(TripleSumArgs::new(1, k, p).unwrap()).unwrap();
        assert_eq!((s(0, 0), s(1, 1), s(0, 1), s(1, 0)), (2, 2, 0, 0));
    }

    #[test]
    fn bounds() {
        assert!(TripleSumArgs::new(2, 3, 0).is_err());
        assert!(matches!(triple_sum_integer(TripleSumArgs::new(31, 0, 0).unwrap()), Err(crate::Error::Domain(_))));
        assert!(verify_delta(31).is_err());
        assert!(exact_delta_holds(TripleSumArgs::new(30, 15, 15).unwrap()).unwrap());
    }

    #[test]
    fn delta_identity_holds() {
        assert!(verify_delta(0).unwrap().is_empty());
        assert!(verify_delta(12).unwrap().is_empty());
    }

    #[test]
    fn vacuum_factorizes_exactly() {
        let fid = verify_factorization(SqueezingParam::new(0.0).unwrap(), None).unwrap();
        assert_eq!(fid, 1.0);
    }

    #[test]
    fn factorization_improves_with_cutoff() {
        let lam = SqueezingParam::new(0.7).unwrap();
        let mut last = 0.0;
        for c in [12, 16, 20] {
            // bypasses the truncation guard, which trips at the smaller cutoffs
            let cutoff = FockCutoff::new(c).unwrap();
            let fid = raw_combination(lam, cutoff).fidelity(&tmsv(lam, cutoff).tensor_product(&tmsv(lam, cutoff)).unwrap()).unwrap();
            assert!(fid > last, "cutoff {c}: {fid}");
            last = fid;
        }
    }

    fn raw_combination(lam: SqueezingParam, cutoff: FockCutoff) -> crate::fock::PureState {
        use crate::fock::ModeIndex;
        use crate::optics::beam_splitter_matrix;
        let s = tmsv(lam, cutoff);
        let bs = beam_splitter_matrix(BeamSplitterSpec::balanced(), cutoff);
        s.tensor_product(&s)
            .unwrap()
            .apply_two_mode_operator(ModeIndex(0), ModeIndex(2), &bs)
            .unwrap()
            .apply_two_mode_operator(ModeIndex(1), ModeIndex(3), &bs)
            .unwrap()
    }
}

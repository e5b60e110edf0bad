//! Negativity `(||rho^T_B||_1 - 1) / 2` for bipartite states, through the
//! partial transpose for mixed states and the Schmidt coefficients for pure
//! ones.

use ndarray::{Array2, Ix2};
use num_complex::Complex64 as C64;

use crate::error::{config, domain, Result};
use crate::fock::{DensityOperator, ModeIndex, PureState, NORM_TOL};
use crate::linalg::{eigenvalues_hermitian, singular_values};

/// Trace tolerance for a density operator to count as normalized.
pub const TRACE_TOL: f64 = 1e-8;
/// Boundary mass above which negativity values are flagged as unreliable.
pub const TRUNCATION_LIMIT: f64 = 1e-8;

/// Split of the modes of a state into parties A and B.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    side_a: Vec<ModeIndex>,
    side_b: Vec<ModeIndex>,
}

impl Bipartition {
    /// Both sides non-empty, disjoint, and together covering `0..num_modes`.
    pub fn new(side_a: Vec<ModeIndex>, side_b: Vec<ModeIndex>, num_modes: usize) -> Result<Self> {
        if side_a.is_empty() || side_b.is_empty() {
            return config("both sides of a bipartition need at least one mode");
        }
        let mut seen = vec![false; num_modes];
        for m in side_a.iter().chain(&side_b) {
            if m.0 >= num_modes || seen[m.0] {
                return config(format!("invalid bipartition {side_a:?} | {side_b:?} of {num_modes} modes"));
            }
            seen[m.0] = true;
        }
        if seen.iter().any(|s| !s) {
            return config(format!("bipartition {side_a:?} | {side_b:?} leaves modes out"));
        }
        Ok(Self { side_a, side_b })
    }

    /// Mode 0 against mode 1.
    pub fn two_mode() -> Self {
        Self { side_a: vec![ModeIndex(0)], side_b: vec![ModeIndex(1)] }
    }

    pub fn side_a(&self) -> &[ModeIndex] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[ModeIndex] {
        &self.side_b
    }

    fn num_modes(&self) -> usize {
        self.side_a.len() + self.side_b.len()
    }

    fn check(&self, num_modes: usize) -> Result<()> {
        if self.num_modes() != num_modes {
            return config(format!("bipartition covers {} modes, state has {num_modes}", self.num_modes()));
        }
        Ok(())
    }
}

/// Transposes the indices of side B, leaving side A alone.
pub fn partial_transpose(rho: &DensityOperator, cut: &Bipartition) -> Result<Array2<C64>> {
    cut.check(rho.num_modes())?;
    let d = rho.cutoff().dim();
    let n = rho.num_modes();
    let side = rho.side();
    // stride of each B mode in the flattened index
    let strides: Vec<usize> = cut.side_b.iter().map(|m| d.pow((n - 1 - m.0) as u32)).collect();
    let swap = |i: usize, j: usize| -> (usize, usize) {
        let (mut i2, mut j2) = (i, j);
        for &s in &strides {
            let (di, dj) = ((i / s) % d, (j / s) % d);
            i2 = i2 - di * s + dj * s;
            j2 = j2 - dj * s + di * s;
        }
        (i2, j2)
    };
    let m = rho.matrix();
    let mut out = Array2::<C64>::zeros((side, side));
    for ((i, j), &v) in m.indexed_iter() {
        if v != C64::new(0.0, 0.0) {
            out[swap(i, j)] = v;
        }
    }
    Ok(out)
}

fn diagonal_boundary_mass(rho: &DensityOperator) -> f64 {
    let d = rho.cutoff().dim();
    let n = rho.num_modes();
    let edge = d - 1;
    let mut mass = 0.0;
    for (i, v) in rho.matrix().diag().iter().enumerate() {
        let mut rem = i;
        let mut on_edge = false;
        for _ in 0..n {
            on_edge |= rem % d == edge;
            rem /= d;
        }
        if on_edge {
            mass += v.re;
        }
    }
    mass / rho.trace().re
}

/// Negativity from the eigenvalues of the partial transpose.
///
/// Requires unit trace. Logs a warning when the state leans on the
/// truncation boundary.
pub fn negativity(rho: &DensityOperator, cut: &Bipartition) -> Result<f64> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return domain(format!("negativity needs a normalized state, trace is {tr}"));
    }
    let mass = diagonal_boundary_mass(rho);
    if mass > TRUNCATION_LIMIT {
        log::warn!(
            "boundary mass {mass:.3e} at cutoff {} exceeds {TRUNCATION_LIMIT:.0e}; negativity may be biased",
            rho.cutoff().max_photons()
        );
    }
    let pt = partial_transpose(rho, cut)?;
    let trace_norm: f64 = eigenvalues_hermitian(&pt)?.iter().map(|x| x.abs()).sum();
    Ok(((trace_norm - 1.0) / 2.0).max(0.0))
}

/// Negativity of a normalized pure state, `((sum_i c_i)^2 - 1) / 2` over its
/// Schmidt coefficients.
pub fn negativity_pure(state: &PureState, cut: &Bipartition) -> Result<f64> {
    cut.check(state.num_modes())?;
    let n2 = state.norm_sqr();
    if (n2 - 1.0).abs() > NORM_TOL {
        return domain(format!("negativity needs a normalized state, squared norm is {n2}"));
    }
    let mass = state.boundary_mass();
    if mass > TRUNCATION_LIMIT {
        log::warn!(
            "boundary mass {mass:.3e} at cutoff {} exceeds {TRUNCATION_LIMIT:.0e}; negativity may be biased",
            state.cutoff().max_photons()
        );
    }
    let s = schmidt_coefficients(state, cut)?;
    let sum: f64 = s.iter().sum();
    Ok(((sum * sum - 1.0) / 2.0).max(0.0))
}

/// Singular values of the amplitudes reshaped to `(dim A, dim B)`.
pub fn schmidt_coefficients(state: &PureState, cut: &Bipartition) -> Result<Vec<f64>> {
    cut.check(state.num_modes())?;
    let order: Vec<ModeIndex> = cut.side_a.iter().chain(&cut.side_b).copied().collect();
    let ordered = state.permute_modes(&order)?;
    let d = state.cutoff().dim();
    let rows = d.pow(cut.side_a.len() as u32);
    let cols = d.pow(cut.side_b.len() as u32);
    let m = ordered
        .amplitudes()
        .clone()
        .into_shape_with_order((rows, cols))
        .expect("row-major amplitudes")
        .into_dimensionality::<Ix2>()
        .expect("two axes");
    if let Some(s) = monomial_singular_values(&m) {
        return Ok(s);
    }
    Ok(singular_values(&m))
}

/// When every row and column holds at most one non-zero entry (as for
/// `|n, n + k>` supported states) the singular values are the magnitudes.
fn monomial_singular_values(m: &Array2<C64>) -> Option<Vec<f64>> {
    let mut col_used = vec![false; m.ncols()];
    let mut out = Vec::new();
    for row in m.outer_iter() {
        let mut found = false;
        for (j, v) in row.iter().enumerate() {
            if v.norm_sqr() == 0.0 {
                continue;
            }
            if found || col_used[j] {
                return None;
            }
            found = true;
            col_used[j] = true;
            out.push(v.norm());
        }
    }
    out.sort_by(|a, b| b.total_cmp(a));
    Some(out)
}

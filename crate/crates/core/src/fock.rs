//! Truncated multimode Fock space: pure states, density operators, and the
//! tensor machinery that the optical elements are built on.
//!
//! Amplitudes are stored densely in row-major order, one axis per mode, each
//! axis of length `cutoff + 1`.

use ndarray::{Array1, Array2, ArrayD, Axis, Dimension, IxDyn};
use num_complex::Complex64 as C64;

use crate::error::{config, domain, Error, Result};

/// Squared-norm tolerance for a state to count as normalized.
pub const NORM_TOL: f64 = 1e-10;

/// Largest photon number kept in every mode.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockCutoff(usize);

impl FockCutoff {
    /// Floor applied by [`FockCutoff::adaptive`].
    pub const ADAPTIVE_FLOOR: usize = 12;
    /// Neglected squared-norm tail targeted by [`FockCutoff::adaptive`].
    pub const ADAPTIVE_TAIL: f64 = 1e-12;

    pub fn new(max_photons_per_mode: usize) -> Result<Self> {
        if max_photons_per_mode < 1 {
            return config("cutoff must keep at least one photon per mode");
        }
        Ok(Self(max_photons_per_mode))
    }

    pub fn max_photons(self) -> usize {
        self.0
    }

    /// Local dimension of one mode.
    pub fn dim(self) -> usize {
        self.0 + 1
    }

    /// Smallest cutoff (at least [`Self::ADAPTIVE_FLOOR`]) for which the
    /// geometric tail `sum_{n > N} (n + 1)^(2 p) x^(2 n)` drops below
    /// [`Self::ADAPTIVE_TAIL`], where `x` is the per-photon amplitude decay
    /// (`lambda`, or `lambda * t` when every mode carries a beam splitter) and
    /// `p` the polynomial degree picked up from photon subtraction.
    pub fn adaptive(decay: f64, poly_degree: u32) -> Result<Self> {
        if !(0.0..1.0).contains(&decay) {
            return domain(format!("amplitude decay {decay} must lie in [0, 1)"));
        }
        const HARD_MAX: usize = 400;
        let x2 = decay * decay;
        let term = |n: usize| ((n + 1) as f64).powi(2 * poly_degree as i32) * x2.powi(n as i32);
        for cut in Self::ADAPTIVE_FLOOR..HARD_MAX {
            let mut tail = 0.0;
            let mut n = cut + 1;
            loop {
                let t = term(n);
                tail += t;
                // terms are eventually decreasing; stop once they are negligible
                if (t < 1e-30 && n > cut + 2 * poly_degree as usize + 2) || n > 4 * HARD_MAX {
                    break;
                }
                n += 1;
            }
            if tail < Self::ADAPTIVE_TAIL {
                return Ok(Self(cut));
            }
        }
        domain(format!("decay {decay} needs a cutoff above {HARD_MAX}"))
    }
}

/// Position of a mode inside a multimode state.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex(pub usize);

impl From<usize> for ModeIndex {
    fn from(i: usize) -> Self {
        Self(i)
    }
}

/// Dense amplitude tensor over `num_modes` truncated modes.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    cutoff: FockCutoff,
    amps: ArrayD<C64>,
}

impl PureState {
    pub fn zeros(num_modes: usize, cutoff: FockCutoff) -> Result<Self> {
        if num_modes == 0 {
            return config("a state needs at least one mode");
        }
        let shape = vec![cutoff.dim(); num_modes];
        Ok(Self { cutoff, amps: ArrayD::zeros(IxDyn(&shape)) })
    }

    pub fn vacuum(num_modes: usize, cutoff: FockCutoff) -> Result<Self> {
        Self::fock(cutoff, &vec![0; num_modes])
    }

    /// Number state `|n_0, n_1, ...>`.
    pub fn fock(cutoff: FockCutoff, occupations: &[usize]) -> Result<Self> {
        let mut s = Self::zeros(occupations.len(), cutoff)?;
        if occupations.iter().any(|&n| n > cutoff.max_photons()) {
            return domain(format!(
                "occupation {occupations:?} exceeds cutoff {}",
                cutoff.max_photons()
            ));
        }
        s.amps[IxDyn(occupations)] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(cutoff: FockCutoff, amps: ArrayD<C64>) -> Result<Self> {
        if amps.ndim() == 0 || amps.shape().iter().any(|&d| d != cutoff.dim()) {
            return config(format!(
                "amplitude shape {:?} does not match cutoff {}",
                amps.shape(),
                cutoff.max_photons()
            ));
        }
        let amps = amps.as_standard_layout().into_owned();
        Ok(Self { cutoff, amps })
    }

    /// Builds a state from a function of the occupation tuple.
    pub fn from_fn(
        num_modes: usize,
        cutoff: FockCutoff,
        mut f: impl FnMut(&[usize]) -> C64,
    ) -> Result<Self> {
        if num_modes == 0 {
            return config("a state needs at least one mode");
        }
        let shape = vec![cutoff.dim(); num_modes];
        let amps = ArrayD::from_shape_fn(IxDyn(&shape), |ix| f(ix.slice()));
        Ok(Self { cutoff, amps })
    }

    pub fn num_modes(&self) -> usize {
        self.amps.ndim()
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &ArrayD<C64> {
        &self.amps
    }

    pub fn amplitude(&self, occupations: &[usize]) -> C64 {
        self.amps[IxDyn(occupations)]
    }

    pub fn as_slice(&self) -> &[C64] {
        self.amps.as_slice().expect("standard layout")
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < NORM_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 || !n2.is_finite() {
            return Err(Error::Degenerate(format!("cannot normalize state with squared norm {n2}")));
        }
        Ok(self.scaled(C64::new(1.0 / n2.sqrt(), 0.0)))
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { cutoff: self.cutoff, amps: self.amps.mapv(|a| a * c) }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: C64, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut amps = self.amps.clone();
        amps.zip_mut_with(&other.amps, |a, &b| *a += c * b);
        Ok(Self { cutoff: self.cutoff, amps })
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.cutoff != other.cutoff || self.num_modes() != other.num_modes() {
            return config(format!(
                "shape mismatch: {} modes at cutoff {} vs {} modes at cutoff {}",
                self.num_modes(),
                self.cutoff.max_photons(),
                other.num_modes(),
                other.cutoff.max_photons()
            ));
        }
        Ok(())
    }

    fn check_mode(&self, mode: ModeIndex) -> Result<()> {
        if mode.0 >= self.num_modes() {
            return config(format!("mode {} out of range for {} modes", mode.0, self.num_modes()));
        }
        Ok(())
    }

    /// `self ⊗ other`; the modes of `self` come first.
    pub fn tensor_product(&self, other: &Self) -> Result<Self> {
        if self.cutoff != other.cutoff {
            return config("tensor product of states with different cutoffs");
        }
        let left = self.as_slice();
        let right = other.as_slice();
        let mut data = Vec::with_capacity(left.len() * right.len());
        for &l in left {
            data.extend(right.iter().map(|&r| l * r));
        }
        let shape = vec![self.cutoff.dim(); self.num_modes() + other.num_modes()];
        let amps = ArrayD::from_shape_vec(IxDyn(&shape), data).expect("consistent length");
        Ok(Self { cutoff: self.cutoff, amps })
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Self) -> Result<C64> {
        self.check_same_shape(other)?;
        Ok(self
            .as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<a|b>|^2 / (|a|^2 |b|^2)`: agreement up to normalization and global
    /// phase.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        let ip = self.inner_product(other)?;
        let denom = self.norm_sqr() * other.norm_sqr();
        if denom == 0.0 {
            return Err(Error::Degenerate("fidelity with a zero vector".into()));
        }
        Ok(ip.norm_sqr() / denom)
    }

    /// Slice at occupation `k` of `mode`; the result has one fewer mode and
    /// its squared norm is the probability of detecting `k` photons there.
    pub fn project_fock(&self, mode: ModeIndex, k: usize) -> Result<Self> {
        self.check_mode(mode)?;
        if k > self.cutoff.max_photons() {
            return domain(format!("photon count {k} exceeds cutoff {}", self.cutoff.max_photons()));
        }
        if self.num_modes() < 2 {
            return config("projecting the only mode of a state leaves no modes");
        }
        let amps = self.amps.index_axis(Axis(mode.0), k).as_standard_layout().into_owned();
        Ok(Self { cutoff: self.cutoff, amps })
    }

    /// Contracts `mode` with a vector of bra coefficients: `sum_n c_n psi[.., n, ..]`.
    pub fn contract_mode(&self, mode: ModeIndex, bra: &Array1<C64>) -> Result<Self> {
        self.check_mode(mode)?;
        if bra.len() != self.cutoff.dim() {
            return config(format!("bra has {} coefficients, expected {}", bra.len(), self.cutoff.dim()));
        }
        if self.num_modes() < 2 {
            return config("contracting the only mode of a state leaves no modes");
        }
        let mut shape = self.amps.shape().to_vec();
        shape.remove(mode.0);
        let mut out = ArrayD::<C64>::zeros(IxDyn(&shape));
        for (n, &c) in bra.iter().enumerate() {
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            out.scaled_add(c, &self.amps.index_axis(Axis(mode.0), n));
        }
        Ok(Self { cutoff: self.cutoff, amps: out })
    }

    pub fn apply_one_mode_operator(&self, mode: ModeIndex, op: &Array2<C64>) -> Result<Self> {
        self.check_mode(mode)?;
        let d = self.cutoff.dim();
        if op.dim() != (d, d) {
            return config(format!("one-mode operator is {:?}, expected ({d}, {d})", op.dim()));
        }
        let amps = apply_local(&self.amps, &[mode.0], d, &nonzeros(op));
        Ok(Self { cutoff: self.cutoff, amps })
    }

    /// Applies an operator on the joint space of `mode_a` and `mode_b`, with
    /// row/column index `n_a * (cutoff + 1) + n_b`.
    pub fn apply_two_mode_operator(
        &self,
        mode_a: ModeIndex,
        mode_b: ModeIndex,
        op: &Array2<C64>,
    ) -> Result<Self> {
        self.check_mode(mode_a)?;
        self.check_mode(mode_b)?;
        if mode_a == mode_b {
            return config("two-mode operator needs two distinct modes");
        }
        let d = self.cutoff.dim();
        if op.dim() != (d * d, d * d) {
            return config(format!(
                "two-mode operator is {:?}, expected ({1}, {1})",
                op.dim(),
                d * d
            ));
        }
        let amps = apply_local(&self.amps, &[mode_a.0, mode_b.0], d, &nonzeros(op));
        Ok(Self { cutoff: self.cutoff, amps })
    }

    /// Reorders modes: mode `i` of the result is mode `order[i]` of `self`.
    pub fn permute_modes(&self, order: &[ModeIndex]) -> Result<Self> {
        let n = self.num_modes();
        let mut seen = vec![false; n];
        if order.len() != n {
            return config("permutation length does not match the number of modes");
        }
        for m in order {
            if m.0 >= n || seen[m.0] {
                return config(format!("invalid mode permutation {order:?}"));
            }
            seen[m.0] = true;
        }
        let axes: Vec<usize> = order.iter().map(|m| m.0).collect();
        let amps = self.amps.view().permuted_axes(IxDyn(&axes)).as_standard_layout().into_owned();
        Ok(Self { cutoff: self.cutoff, amps })
    }

    /// Fraction of the squared norm carried by basis states with at least one
    /// mode at the cutoff.
    pub fn boundary_mass(&self) -> f64 {
        let total = self.norm_sqr();
        if total == 0.0 {
            return 0.0;
        }
        let edge = self.cutoff.max_photons();
        let edge_mass: f64 = self
            .amps
            .indexed_iter()
            .filter(|(ix, _)| ix.slice().iter().any(|&n| n == edge))
            .map(|(_, a)| a.norm_sqr())
            .sum();
        edge_mass / total
    }

    /// Fails with [`Error::Truncation`] when the boundary mass exceeds `limit`.
    pub fn check_truncation(&self, limit: f64) -> Result<()> {
        let mass = self.boundary_mass();
        if mass > limit {
            return Err(Error::Truncation { mass, cutoff: self.cutoff.max_photons(), limit });
        }
        Ok(())
    }

    pub fn to_density(&self) -> DensityOperator {
        let v = self.as_slice();
        let n = v.len();
        let matrix = Array2::from_shape_fn((n, n), |(i, j)| v[i] * v[j].conj());
        DensityOperator { num_modes: self.num_modes(), cutoff: self.cutoff, matrix }
    }
}

fn nonzeros(op: &Array2<C64>) -> Vec<(usize, usize, C64)> {
    op.indexed_iter()
        .filter(|(_, v)| **v != C64::new(0.0, 0.0))
        .map(|((i, j), &v)| (i, j, v))
        .collect()
}

/// Applies a sparse operator (row, col, value) acting on the joint index of
/// `modes` (row-major in the listed order) and leaves every other mode alone.
fn apply_local(
    amps: &ArrayD<C64>,
    modes: &[usize],
    dim: usize,
    entries: &[(usize, usize, C64)],
) -> ArrayD<C64> {
    let ndim = amps.ndim();
    let mut perm: Vec<usize> = (0..ndim).filter(|i| !modes.contains(i)).collect();
    perm.extend_from_slice(modes);
    let moved = amps.view().permuted_axes(IxDyn(&perm)).as_standard_layout().into_owned();
    let local = dim.pow(modes.len() as u32);
    let rest = moved.len() / local;
    let src = moved.as_slice().expect("standard layout");

    let mut out = vec![C64::new(0.0, 0.0); rest * local];
    for (dst, src) in out.chunks_exact_mut(local).zip(src.chunks_exact(local)) {
        for &(row, col, v) in entries {
            dst[row] += v * src[col];
        }
    }
    let moved_shape: Vec<usize> = perm.iter().map(|&p| amps.shape()[p]).collect();
    let out = ArrayD::from_shape_vec(IxDyn(&moved_shape), out).expect("consistent length");
    let mut inv = vec![0; ndim];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    out.permuted_axes(IxDyn(&inv)).as_standard_layout().into_owned()
}

/// Dense operator on a truncated multimode space, indexed like
/// [`PureState`] amplitudes flattened in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    num_modes: usize,
    cutoff: FockCutoff,
    matrix: Array2<C64>,
}

impl DensityOperator {
    pub const HERMITIAN_TOL: f64 = 1e-10;

    pub fn from_matrix(num_modes: usize, cutoff: FockCutoff, matrix: Array2<C64>) -> Result<Self> {
        let side = cutoff.dim().pow(num_modes as u32);
        if num_modes == 0 || matrix.dim() != (side, side) {
            return config(format!(
                "density matrix is {:?}, expected ({side}, {side}) for {num_modes} modes",
                matrix.dim()
            ));
        }
        let rho = Self { num_modes, cutoff, matrix };
        let dev = rho.hermiticity_error();
        if dev > Self::HERMITIAN_TOL {
            return domain(format!("density matrix is not Hermitian (deviation {dev:.3e})"));
        }
        Ok(rho)
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn side(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.side();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[[i, j]] - self.matrix[[j, i]].conj()).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace().re;
        if tr <= 0.0 || !tr.is_finite() {
            return Err(Error::Degenerate(format!("cannot normalize operator with trace {tr}")));
        }
        Ok(Self {
            num_modes: self.num_modes,
            cutoff: self.cutoff,
            matrix: self.matrix.mapv(|x| x / tr),
        })
    }

    /// `<psi|rho|psi>`.
    pub fn expectation(&self, psi: &PureState) -> Result<C64> {
        if psi.num_modes() != self.num_modes || psi.cutoff() != self.cutoff {
            return config("state and operator live on different spaces");
        }
        let v = psi.as_slice();
        let mut acc = C64::new(0.0, 0.0);
        for (i, row) in self.matrix.outer_iter().enumerate() {
            let rv: C64 = row.iter().zip(v).map(|(m, x)| m * x).sum();
            acc += v[i].conj() * rv;
        }
        Ok(acc)
    }

    /// Reduced operator on the modes in `keep` (strictly increasing).
    pub fn partial_trace(&self, keep: &[ModeIndex]) -> Result<Self> {
        if keep.is_empty() {
            return config("partial trace must keep at least one mode");
        }
        if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|m| m.0 >= self.num_modes) {
            return config(format!("keep list {keep:?} must be strictly increasing and in range"));
        }
        let d = self.cutoff.dim();
        let n = self.num_modes;
        let traced: Vec<usize> = (0..n).filter(|i| !keep.iter().any(|k| k.0 == *i)).collect();
        let kdim = d.pow(keep.len() as u32);
        let tdim = d.pow(traced.len() as u32);

        // full index for each (traced index, kept index) pair
        let full_index = |ti: usize, ki: usize| -> usize {
            let mut occ = vec![0; n];
            let mut rem = ki;
            for m in keep.iter().rev() {
                occ[m.0] = rem % d;
                rem /= d;
            }
            let mut rem = ti;
            for &m in traced.iter().rev() {
                occ[m] = rem % d;
                rem /= d;
            }
            occ.iter().fold(0, |acc, &o| acc * d + o)
        };
        let mut out = Array2::<C64>::zeros((kdim, kdim));
        for ti in 0..tdim {
            let idx: Vec<usize> = (0..kdim).map(|ki| full_index(ti, ki)).collect();
            for (a, &ia) in idx.iter().enumerate() {
                for (b, &ib) in idx.iter().enumerate() {
                    out[[a, b]] += self.matrix[[ia, ib]];
                }
            }
        }
        Ok(Self { num_modes: keep.len(), cutoff: self.cutoff, matrix: out })
    }
}

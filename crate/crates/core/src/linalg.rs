//! Cyclic Jacobi eigensolver for complex Hermitian matrices and the
//! one-sided (Hestenes) Jacobi variant for singular values.
//!
//! Both work on block-diagonal structure first: the sparsity graph of the
//! input is split into connected components and each block is diagonalized
//! separately. Partial transposes of photon-number-structured states are
//! usually made of many small blocks.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64 as C64;

use crate::error::{domain, Result};

/// Hermiticity tolerance, relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-8;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigenvalues_hermitian(m: &Array2<C64>) -> Result<Vec<f64>> {
    Ok(eigh_impl(m, false)?.0)
}

/// Eigen-decomposition `m = V diag(w) V^†` with `w` ascending; column `i` of
/// `V` belongs to `w[i]`.
pub fn eigh(m: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let (w, v) = eigh_impl(m, true)?;
    Ok((w, v.expect("vectors requested")))
}

fn check_hermitian(m: &Array2<C64>) -> Result<()> {
    let (n, k) = m.dim();
    if n != k {
        return domain(format!("matrix is {n}x{k}, not square"));
    }
    let scale = m.iter().fold(0.0_f64, |a, x| a.max(x.norm())).max(1.0);
    for i in 0..n {
        for j in i..n {
            let dev = (m[[i, j]] - m[[j, i]].conj()).norm();
            if dev > HERMITIAN_TOL * scale {
                return domain(format!("matrix is not Hermitian: deviation {dev:.3e} at ({i}, {j})"));
            }
        }
    }
    Ok(())
}

/// Connected components of the graph with an edge wherever `|m_ij|` is above
/// a tiny fraction of the largest entry.
fn blocks(m: ArrayView2<C64>, symmetric_only: bool) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let scale = m.iter().fold(0.0_f64, |a, x| a.max(x.norm()));
    let drop = scale * 1e-18;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        let start = if symmetric_only { i + 1 } else { 0 };
        for j in start..m.ncols() {
            if i != j && m[[i, j]].norm() > drop {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut label = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if label[r] == usize::MAX {
            label[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[label[r]].push(i);
    }
    groups
}

fn eigh_impl(m: &Array2<C64>, want_vectors: bool) -> Result<(Vec<f64>, Option<Array2<C64>>)> {
    check_hermitian(m)?;
    let n = m.nrows();
    let mut pairs: Vec<(f64, Option<Vec<(usize, C64)>>)> = Vec::with_capacity(n);
    for block in blocks(m.view(), true) {
        let k = block.len();
        let mut a = Array2::from_shape_fn((k, k), |(i, j)| m[[block[i], block[j]]]);
        let mut v = want_vectors.then(|| Array2::<C64>::eye(k));
        jacobi_hermitian(&mut a, v.as_mut());
        for i in 0..k {
            let vec = v.as_ref().map(|v| (0..k).map(|r| (block[r], v[[r, i]])).collect());
            pairs.push((a[[i, i]].re, vec));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = want_vectors.then(|| {
        let mut out = Array2::<C64>::zeros((n, n));
        for (col, (_, vec)) in pairs.iter().enumerate() {
            for &(row, x) in vec.as_ref().expect("vectors requested") {
                out[[row, col]] = x;
            }
        }
        out
    });
    Ok((values, vectors))
}

/// In-place cyclic Jacobi: on return `a` is diagonal (to rounding) and, if
/// given, `v` has been right-multiplied by every rotation.
fn jacobi_hermitian(a: &mut Array2<C64>, mut v: Option<&mut Array2<C64>>) {
    let n = a.nrows();
    if n < 2 {
        if n == 1 {
            a[[0, 0]] = C64::new(a[[0, 0]].re, 0.0);
        }
        return;
    }
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[[i, j]].norm_sqr())
            .sum();
        let diag: f64 = (0..n).map(|i| a[[i, i]].norm_sqr()).sum();
        if off <= f64::EPSILON * f64::EPSILON * diag.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[[p, q]];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a[[p, p]].re;
                let aqq = a[[q, q]].re;
                // skip rotations that cannot change the diagonal at working precision
                if mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[[p, q]] = C64::new(0.0, 0.0);
                    a[[q, p]] = C64::new(0.0, 0.0);
                    continue;
                }
                let phase = apq / mag; // e^{i alpha}
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let e = phase.conj(); // e^{-i alpha}

                // V restricted to (p, q): [[c, s], [-s e, c e]]
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = akp * c - akq * (e * s);
                    a[[k, q]] = akp * s + akq * (e * c);
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = apk * c - aqk * (e.conj() * s);
                    a[[q, k]] = apk * s + aqk * (e.conj() * c);
                }
                a[[p, p]] = C64::new(app - t * mag, 0.0);
                a[[q, q]] = C64::new(aqq + t * mag, 0.0);
                a[[p, q]] = C64::new(0.0, 0.0);
                a[[q, p]] = C64::new(0.0, 0.0);
                if let Some(v) = v.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v[[k, p]];
                        let vkq = v[[k, q]];
                        v[[k, p]] = vkp * c - vkq * (e * s);
                        v[[k, q]] = vkp * s + vkq * (e * c);
                    }
                }
            }
        }
    }
}

/// Singular values of a general complex matrix, descending, by one-sided
/// Jacobi orthogonalization of the columns.
pub fn singular_values(m: &Array2<C64>) -> Vec<f64> {
    let (rows, cols) = m.dim();
    // work on the orientation with fewer columns
    let work = if cols > rows { m.t().mapv(|x| x.conj()) } else { m.clone() };
    let mut out = Vec::new();
    let gram_blocks = {
        // columns interact only if they share a nonzero row
        let n = work.ncols();
        let mut g = Array2::<C64>::zeros((n, n));
        let scale = work.iter().fold(0.0_f64, |a, x| a.max(x.norm()));
        for r in 0..work.nrows() {
            let nz: Vec<usize> = (0..n).filter(|&c| work[[r, c]].norm() > scale * 1e-18).collect();
            for &i in &nz {
                for &j in &nz {
                    g[[i, j]] = C64::new(1.0, 0.0);
                }
            }
        }
        blocks(g.view(), true)
    };
    for block in gram_blocks {
        let mut cols_data: Vec<Vec<C64>> =
            block.iter().map(|&c| work.column(c).to_vec()).collect();
        hestenes(&mut cols_data);
        out.extend(cols_data.iter().map(|c| c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()));
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

fn hestenes(cols: &mut [Vec<C64>]) {
    let n = cols.len();
    if n < 2 {
        return;
    }
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|x| x.norm_sqr()).sum();
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let mag = gamma.norm();
                if mag == 0.0 || mag <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let e = (gamma / mag).conj();
                let tau = (beta - alpha) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let (left, right) = cols.split_at_mut(q);
                for (xp, xq) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (a, b) = (*xp, *xq);
                    *xp = a * c - b * (e * s);
                    *xq = a * s + b * (e * c);
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> Array2<C64> {
        let mut m = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = c(rng.gen_range(-1.0..1.0));
            for j in i + 1..n {
                let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[[i, j]] = z;
                m[[j, i]] = z.conj();
            }
        }
        m
    }

    #[test]
    fn diagonal_matrix_is_sorted() {
        let m = Array2::from_diag(&array![c(3.0), c(1.0), c(2.0)]);
        assert_eq!(eigenvalues_hermitian(&m).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let m = array![[c(0.0), c(1.0)], [c(1.0), c(0.0)]];
        let w = eigenvalues_hermitian(&m).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_y_spectrum() {
        let m = array![[c(0.0), C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), c(0.0)]];
        let w = eigenvalues_hermitian(&m).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = array![[c(0.0), c(1.0)], [c(0.0), c(0.0)]];
        assert!(eigenvalues_hermitian(&m).is_err());
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for n in [1, 2, 6, 11] {
            let m = random_hermitian(n, &mut rng);
            let (w, v) = eigh(&m).unwrap();
            let lam = Array2::from_diag(&w.iter().map(|&x| c(x)).collect::<ndarray::Array1<_>>());
            let vh = v.t().mapv(|x| x.conj());
            let rec = v.dot(&lam).dot(&vh);
            let err = (&rec - &m).iter().fold(0.0_f64, |a, x| a.max(x.norm()));
            assert!(err < 1e-8, "n = {n}: reconstruction error {err}");
            let trace: f64 = (0..n).map(|i| m[[i, i]].re).sum();
            assert!((w.iter().sum::<f64>() - trace).abs() < 1e-8);
            let unit = vh.dot(&v);
            let dev = (&unit - &Array2::<C64>::eye(n)).iter().fold(0.0_f64, |a, x| a.max(x.norm()));
            assert!(dev < 1e-10);
            assert!(w.windows(2).all(|p| p[0] <= p[1]));
        }
    }

    #[test]
    fn block_diagonal_input_is_split() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let a = random_hermitian(3, &mut rng);
        let b = random_hermitian(4, &mut rng);
        let mut m = Array2::<C64>::zeros((7, 7));
        // interleave the two blocks so the split is non-trivial
        let ia = [0, 3, 5];
        let ib = [1, 2, 4, 6];
        for i in 0..3 {
            for j in 0..3 {
                m[[ia[i], ia[j]]] = a[[i, j]];
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                m[[ib[i], ib[j]]] = b[[i, j]];
            }
        }
        let mut want = eigenvalues_hermitian(&a).unwrap();
        want.extend(eigenvalues_hermitian(&b).unwrap());
        want.sort_by(f64::total_cmp);
        let got = eigenvalues_hermitian(&m).unwrap();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
        let (w, v) = eigh(&m).unwrap();
        let lam = Array2::from_diag(&w.iter().map(|&x| c(x)).collect::<ndarray::Array1<_>>());
        let rec = v.dot(&lam).dot(&v.t().mapv(|x| x.conj()));
        assert!((&rec - &m).iter().all(|x| x.norm() < 1e-10));
    }

    #[test]
    fn singular_values_match_hermitian_route() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let m = Array2::from_shape_fn((5, 3), |_| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let sv = singular_values(&m);
        let gram = m.t().mapv(|x| x.conj()).dot(&m);
        let mut w = eigenvalues_hermitian(&gram).unwrap();
        w.reverse();
        assert_eq!(sv.len(), 3);
        for (s, l) in sv.iter().zip(&w) {
            assert!((s * s - l).abs() < 1e-12);
        }
        let wide = singular_values(&m.t().to_owned());
        for (a, b) in wide.iter().zip(&sv) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_values_keep_tiny_values_accurate() {
        let m = Array2::from_diag(&array![c(1.0), c(1e-12), c(1e-20)]);
        let sv = singular_values(&m);
        assert_eq!(sv, vec![1.0, 1e-12, 1e-20]);
    }
}

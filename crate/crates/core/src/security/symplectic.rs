//! Symplectic spectra and von Neumann entropies of Gaussian states.

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};

/// Tolerance below 1 accepted for a symplectic eigenvalue before the state
/// is declared unphysical.
const UNCERTAINTY_TOL: f64 = 1e-9;

/// Block-diagonal symplectic form for `n` modes in `(x1, p1, x2, p2, …)` order.
pub fn omega(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        m[(2 * k, 2 * k + 1)] = 1.0;
        m[(2 * k + 1, 2 * k)] = -1.0;
    }
    m
}

/// Entropy function `g(x) = ((x+1)/2) log2((x+1)/2) − ((x−1)/2) log2((x−1)/2)`
/// of a symplectic eigenvalue `x ≥ 1`.
pub fn g(x: f64) -> f64 {
    if x < 1.0 + 1e-12 {
        return 0.0;
    }
    let a = (x + 1.0) / 2.0;
    let b = (x - 1.0) / 2.0;
    a * a.log2() - b * b.log2()
}

/// Symplectic eigenvalues of a `2n × 2n` covariance matrix, ascending.
///
/// With `K = γ^{1/2} Ω γ^{1/2}` (antisymmetric), the eigenvalues of `KᵀK`
/// are the squared symplectic eigenvalues, each appearing twice.
pub fn symplectic_eigenvalues(gamma: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = gamma.nrows();
    if dim == 0 || dim % 2 != 0 || gamma.ncols() != dim {
        return Err(Error::Unphysical(format!(
            "covariance matrix must be square with even size, got {}x{}",
            gamma.nrows(),
            gamma.ncols()
        )));
    }
    if gamma.iter().any(|v| !v.is_finite()) {
        return Err(Error::Unphysical("non-finite entry".into()));
    }
    let asym = (gamma - gamma.transpose()).abs().max();
    if asym > 1e-9 * gamma.abs().max().max(1.0) {
        return Err(Error::Unphysical(format!(
            "not symmetric (|γ − γᵀ| = {asym:.3e})"
        )));
    }
    let sym = (gamma + gamma.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let min = eig.eigenvalues.min();
    if !(min > 0.0) {
        return Err(Error::Unphysical(format!(
            "not positive definite (min eigenvalue {min:.3e})"
        )));
    }
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let k = &root * omega(dim / 2) * &root;
    let ktk = k.transpose() * &k;
    let mut sq: Vec<f64> = ktk.symmetric_eigen().eigenvalues.iter().cloned().collect();
    sq.sort_by(f64::total_cmp);
    let nus: Vec<f64> = sq
        .chunks(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect();
    if let Some(&nu) = nus.first() {
        if nu < 1.0 - UNCERTAINTY_TOL {
            return Err(Error::Unphysical(format!(
                "symplectic eigenvalue {nu:.6} violates the uncertainty principle"
            )));
        }
    }
    Ok(nus)
}

/// Von Neumann entropy `Σ g(ν_k)` in bits.
pub fn entropy(gamma: &DMatrix<f64>) -> Result<f64> {
    Ok(symplectic_eigenvalues(gamma)?.into_iter().map(g).sum())
}

/// Symplectic eigenvalues of a two-mode matrix `[[A, C], [Cᵀ, B]]` from its
/// invariants `Δ = det A + det B + 2 det C` and `det γ`.
pub fn two_mode_eigenvalues(
    a: &Matrix2<f64>,
    b: &Matrix2<f64>,
    c: &Matrix2<f64>,
    det_gamma: f64,
) -> (f64, f64) {
    let delta = a.determinant() + b.determinant() + 2.0 * c.determinant();
    let disc = (delta * delta - 4.0 * det_gamma).max(0.0).sqrt();
    let l1 = (0.5 * (delta + disc)).max(0.0).sqrt();
    let l2 = (0.5 * (delta - disc)).max(0.0).sqrt();
    (l1, l2)
}

/// Matrix `M` conditioned on an ideal heterodyne measurement of the modes
/// indexed by `measured` (mode indices): `γ_R − σ (γ_M + I)⁻¹ σᵀ`.
pub fn heterodyne_condition(gamma: &DMatrix<f64>, measured: &[usize]) -> Result<DMatrix<f64>> {
    let n = gamma.nrows() / 2;
    let meas_idx: Vec<usize> = measured.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    let rest_idx: Vec<usize> = (0..n)
        .filter(|m| !measured.contains(m))
        .flat_map(|m| [2 * m, 2 * m + 1])
        .collect();
    let pick = |rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| gamma[(rows[i], cols[j])])
    };
    let g_r = pick(&rest_idx, &rest_idx);
    let g_m = pick(&meas_idx, &meas_idx) + DMatrix::identity(meas_idx.len(), meas_idx.len());
    let sigma = pick(&rest_idx, &meas_idx);
    let inv = g_m
        .try_inverse()
        .ok_or_else(|| Error::Unphysical("measured block is singular".into()))?;
    Ok(&g_r - &sigma * inv * sigma.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_has_unit_spectrum() {
        let nus = symplectic_eigenvalues(&DMatrix::identity(4, 4)).unwrap();
        assert!(nus.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert_eq!(entropy(&DMatrix::identity(4, 4)).unwrap(), 0.0);
    }

    #[test]
    fn thermal_mode() {
        let v = 5.0;
        let nus = symplectic_eigenvalues(&(DMatrix::identity(2, 2) * v)).unwrap();
        assert!((nus[0] - v).abs() < 1e-12);
        assert!((g(v) - (3.0 * 3f64.log2() - 2.0 * 2f64.log2())).abs() < 1e-12);
    }

    #[test]
    fn g_is_zero_at_one() {
        assert_eq!(g(1.0), 0.0);
        assert_eq!(g(0.5), 0.0);
        assert!(g(1.0 + 1e-6) > 0.0);
    }

    #[test]
    fn two_mode_squeezed_vacuum_is_pure() {
        let v: f64 = 7.3;
        let c = (v * v - 1.0).sqrt();
        let gamma = DMatrix::from_row_slice(
            4,
            4,
            &[
                v, 0.0, c, 0.0, 0.0, v, 0.0, -c, c, 0.0, v, 0.0, 0.0, -c, 0.0, v,
            ],
        );
        let nus = symplectic_eigenvalues(&gamma).unwrap();
        assert!(nus.iter().all(|&x| (x - 1.0).abs() < 1e-9), "{nus:?}");
        let a = Matrix2::identity() * v;
        let cz = Matrix2::new(c, 0.0, 0.0, -c);
        let (l1, l2) = two_mode_eigenvalues(&a, &a, &cz, gamma.determinant());
        assert!((l1 - 1.0).abs() < 1e-6 && (l2 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_unphysical() {
        let bad = DMatrix::identity(2, 2) * 0.5;
        assert!(matches!(
            symplectic_eigenvalues(&bad),
            Err(Error::Unphysical(_))
        ));
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(symplectic_eigenvalues(&neg).is_err());
        assert!(symplectic_eigenvalues(&DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn heterodyne_on_epr_half_leaves_vacuum() {
        let v: f64 = 4.0;
        let c = (v * v - 1.0).sqrt();
        let gamma = DMatrix::from_row_slice(
            4,
            4,
            &[
                v, 0.0, c, 0.0, 0.0, v, 0.0, -c, c, 0.0, v, 0.0, 0.0, -c, 0.0, v,
            ],
        );
        let cond = heterodyne_condition(&gamma, &[1]).unwrap();
        // v − (v²−1)/(v+1) = 1.
        assert!((cond[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((cond[(1, 1)] - 1.0).abs() < 1e-12);
    }
}

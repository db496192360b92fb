//! Second variation of log Z as a Hermitian form over a basis of directions.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{second_variation_resolved, DirectionData, ResolvedDirection};
use crate::error::{Error, Result};
use crate::spectrum::LengthSpectrum;
use crate::zeta::ZetaEvalParams;

/// Singular values of the systole map below this count as kernel.
pub const TAU_KERNEL: f64 = 1e-10;
/// Relative eigenvalue threshold for the signature.
pub const TAU_EIG_REL: f64 = 1e-9;
const MAX_GRAM_COND: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub neg: usize,
    pub pos: usize,
    pub zero: usize,
}

/// Block form of the whitened Hessian in Ker dl0 and its orthogonal complement.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Basis coefficient vectors (columns) spanning Ker dl0, WP-orthonormal.
    pub kernel_basis: DMatrix<Complex64>,
    /// Basis coefficient vectors spanning the complement, WP-orthonormal.
    pub complement_basis: DMatrix<Complex64>,
    pub kernel_eigenvalues: Vec<f64>,
    pub complement_eigenvalues: Vec<f64>,
    /// Spectral norm of the off-diagonal block.
    pub coupling_norm: f64,
}

#[derive(Debug, Clone)]
pub struct HessianReport {
    /// H[i][j] from polarization; Hermitian up to `hermiticity_error`.
    pub matrix: DMatrix<Complex64>,
    pub hermiticity_error: f64,
    /// Eigenvalues of the form relative to the WP Gram matrix, ascending.
    pub eigenvalues: Vec<f64>,
    pub signature: Signature,
    pub systole_singular_values: Vec<f64>,
    pub kernel_dim_estimate: usize,
    pub decomposition: Decomposition,
}

fn unit_powers() -> [Complex64; 4] {
    [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ]
}

fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Polarized second variations over `dirs`, whose WP inner products are `gram`.
pub fn hessian_report(
    spectrum: &LengthSpectrum,
    dirs: &[DirectionData],
    gram: &DMatrix<Complex64>,
    params: &ZetaEvalParams,
) -> Result<HessianReport> {
    let n = dirs.len();
    if n == 0 {
        return Err(Error::Validation("empty direction basis".into()));
    }
    if gram.nrows() != n || gram.ncols() != n {
        return Err(Error::Validation(format!("Gram matrix is {}x{}, expected {n}x{n}", gram.nrows(), gram.ncols())));
    }
    let gnorm = gram.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if (gram - gram.adjoint()).iter().any(|z| z.norm() > 1e-12 * gnorm.max(1.0)) {
        return Err(Error::Validation("Gram matrix is not Hermitian".into()));
    }
    for (i, d) in dirs.iter().enumerate() {
        let g = gram[(i, i)].re;
        if (g - d.wp_norm_sq()).abs() > 1e-9 * d.wp_norm_sq() {
            return Err(Error::Validation(format!("Gram diagonal {g} differs from wp_norm_sq {} of direction {i}", d.wp_norm_sq())));
        }
    }
    let (gvals, _) = hermitian_eigen(gram);
    let (gmin, gmax) = (gvals[0], gvals[n - 1]);
    if !(gmin > 0.0) || gmax / gmin >= MAX_GRAM_COND {
        return Err(Error::IllConditionedBasis { cond: if gmin > 0.0 { gmax / gmin } else { f64::INFINITY } });
    }

    let basis: Vec<ResolvedDirection> = dirs.iter().map(|d| d.resolve(spectrum)).collect::<Result<_>>()?;
    let g = |i: usize, j: usize| gram[(i, j)];

    // Polarization: (1/4) sum_p i^p Q(mu_a + i^p mu_b) = H[b][a].
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
    let values: Vec<Complex64> = cells
        .par_iter()
        .map(|&(a, b)| -> Result<Complex64> {
            let mut acc = Complex64::new(0.0, 0.0);
            for w in unit_powers() {
                let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
                coeffs[a] += 1.0;
                coeffs[b] += w;
                let mu = ResolvedDirection::combine(&coeffs, &basis, g);
                let (q, _) = second_variation_resolved(spectrum, &mu, params)?;
                acc += w * q;
            }
            Ok(acc * 0.25)
        })
        .collect::<Result<_>>()?;
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for (&(a, b), v) in cells.iter().zip(values) {
        h[(b, a)] = v;
    }
    let hnorm = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let hermiticity_error = (&h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max) / hnorm.max(f64::MIN_POSITIVE);

    // Whitening G = L L^*, Ht = L^{-1} H L^{-*}.
    let chol = gram.clone().cholesky().ok_or(Error::IllConditionedBasis { cond: f64::INFINITY })?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or(Error::IllConditionedBasis { cond: f64::INFINITY })?;
    let linv_adj = linv.adjoint();
    let ht = &linv * &h * &linv_adj;
    let (eigenvalues, _) = hermitian_eigen(&ht);
    let scale = eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let tau = TAU_EIG_REL * scale;
    let signature = Signature {
        neg: eigenvalues.iter().filter(|&&x| x < -tau).count(),
        pos: eigenvalues.iter().filter(|&&x| x > tau).count(),
        zero: eigenvalues.iter().filter(|&&x| x.abs() <= tau).count(),
    };

    // Systole map in whitened coordinates, padded to at least n rows for a full V.
    let sys = spectrum.systoles()?;
    let rows = sys.indices.len().max(n);
    let mut dmat = DMatrix::<Complex64>::zeros(rows, n);
    for (r, &idx) in sys.indices.iter().enumerate() {
        for k in 0..n {
            dmat[(r, k)] = basis[k].dl[idx];
        }
    }
    let dt = &dmat * &linv_adj;
    let svd = SVD::new(dt, false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut sv: Vec<(f64, usize)> = svd.singular_values.iter().copied().zip(0..).collect();
    sv.sort_by(|a, b| b.0.total_cmp(&a.0));
    let rank = sv.iter().filter(|(x, _)| *x > TAU_KERNEL).count();
    let kernel_dim_estimate = n - rank;
    let max_kernel = (3 * spectrum.genus()).saturating_sub(4) as usize;
    if kernel_dim_estimate > max_kernel {
        return Err(Error::Validation(format!(
            "kernel dimension {kernel_dim_estimate} exceeds 3g - 4 = {max_kernel}"
        )));
    }
    let columns = |picked: &[(f64, usize)]| {
        let mut m = DMatrix::<Complex64>::zeros(n, picked.len());
        for (c, &(_, i)) in picked.iter().enumerate() {
            for r in 0..n {
                m[(r, c)] = v_t[(i, r)].conj();
            }
        }
        m
    };
    let kernel_w = columns(&sv[rank..]);
    let comp_w = columns(&sv[..rank]);
    let block_eigs = |b: &DMatrix<Complex64>| if b.ncols() == 0 { Vec::new() } else { hermitian_eigen(&(b.adjoint() * &ht * b)).0 };
    let coupling_norm = if kernel_w.ncols() == 0 || comp_w.ncols() == 0 {
        0.0
    } else {
        SVD::new(kernel_w.adjoint() * &ht * &comp_w, false, false).singular_values.max()
    };
    let decomposition = Decomposition {
        kernel_eigenvalues: block_eigs(&kernel_w),
        complement_eigenvalues: block_eigs(&comp_w),
        kernel_basis: &linv_adj * &kernel_w,
        complement_basis: &linv_adj * &comp_w,
        coupling_norm,
    };

    Ok(HessianReport {
        matrix: h,
        hermiticity_error,
        eigenvalues,
        signature,
        systole_singular_values: sv.iter().map(|(x, _)| *x).collect(),
        kernel_dim_estimate,
        decomposition,
    })
}

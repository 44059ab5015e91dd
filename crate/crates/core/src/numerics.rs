//! Dense linear algebra for small p: pivoted solve, sample covariance,
//! Hotelling T², ridge-regularized inversion, and logistic IRLS.
//!
//! p here is the number of terms or moment statistics (tens at most), so
//! O(p^3) dense routines are ample. Thin wrappers over nalgebra keep the
//! failure modes explicit: singular systems are reported, never silently
//! pseudo-inverted, and covariance inversions get an escalating ridge.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::sampler::{log_sigmoid, logistic};

pub type Mat = DMatrix<f64>;
pub type Vect = DVector<f64>;

fn check_finite(name: &'static str, it: impl Iterator<Item = f64>) -> Result<()> {
    for v in it {
        if !v.is_finite() {
            return Err(Error::NonFinite(name));
        }
    }
    Ok(())
}

/// Solves A x = b by pivoted LU. A must be square and nonsingular to a
/// relative pivot tolerance of 1e-12.
pub fn solve(a: &Mat, b: &Vect) -> Result<Vect> {
    if !a.is_square() || a.nrows() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "solve dimensions: A is {}x{}, b has {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    check_finite("solve input", a.iter().chain(b.iter()).copied())?;
    let lu = a.clone().lu();
    let u = lu.u();
    let mut max_piv = 0.0f64;
    let mut min_piv = f64::INFINITY;
    for i in 0..u.nrows() {
        let p = u[(i, i)].abs();
        max_piv = max_piv.max(p);
        min_piv = min_piv.min(p);
    }
    if max_piv == 0.0 || min_piv < 1e-12 * max_piv {
        return Err(Error::Singular("solve"));
    }
    lu.solve(b).ok_or(Error::Singular("solve"))
}

/// Inverse via the same pivoted LU and tolerance as [`solve`].
pub fn invert(a: &Mat) -> Result<Mat> {
    if !a.is_square() {
        return Err(Error::InvalidArgument("invert needs a square matrix".into()));
    }
    check_finite("invert input", a.iter().copied())?;
    let lu = a.clone().lu();
    let u = lu.u();
    let mut max_piv = 0.0f64;
    let mut min_piv = f64::INFINITY;
    for i in 0..u.nrows() {
        let p = u[(i, i)].abs();
        max_piv = max_piv.max(p);
        min_piv = min_piv.min(p);
    }
    if max_piv == 0.0 || min_piv < 1e-12 * max_piv {
        return Err(Error::Singular("invert"));
    }
    lu.try_inverse().ok_or(Error::Singular("invert"))
}

/// Unbiased sample covariance (divisor r-1) of row-stacked observations;
/// symmetric by construction.
pub fn sample_cov(x: &Mat) -> Result<Mat> {
    let r = x.nrows();
    if r < 2 {
        return Err(Error::InvalidArgument(format!(
            "sample covariance needs at least 2 rows, got {r}"
        )));
    }
    let centered = center_columns(x);
    let mut c = centered.transpose() * &centered / (r as f64 - 1.0);
    symmetrize(&mut c);
    Ok(c)
}

/// Cross-covariance cov(x_k, y_j) with divisor r-1; a p x q matrix.
pub fn cross_cov(x: &Mat, y: &Mat) -> Result<Mat> {
    let r = x.nrows();
    if r != y.nrows() {
        return Err(Error::InvalidArgument(format!(
            "cross covariance row mismatch: {r} vs {}",
            y.nrows()
        )));
    }
    if r < 2 {
        return Err(Error::InvalidArgument(format!(
            "cross covariance needs at least 2 rows, got {r}"
        )));
    }
    let xc = center_columns(x);
    let yc = center_columns(y);
    Ok(xc.transpose() * &yc / (r as f64 - 1.0))
}

fn center_columns(x: &Mat) -> Mat {
    let mut out = x.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        col.add_scalar_mut(-mean);
    }
    out
}

fn symmetrize(m: &mut Mat) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Cholesky of cov + lambda * mean(diag) * I, escalating lambda tenfold from
/// 1e-8 until the factorization succeeds. Warns past 1e-4; gives up past 1.0.
fn ridge_cholesky(cov: &Mat) -> Result<(Cholesky<f64, Dyn>, f64)> {
    if !cov.is_square() {
        return Err(Error::InvalidArgument("covariance must be square".into()));
    }
    check_finite("covariance", cov.iter().copied())?;
    let p = cov.nrows();
    let mean_diag = (0..p).map(|i| cov[(i, i)]).sum::<f64>() / p as f64;
    let scale = if mean_diag > 0.0 { mean_diag } else { 1.0 };
    // A clean covariance should factor with no ridge at all; try that first.
    if let Some(chol) = Cholesky::new(cov.clone()) {
        return Ok((chol, 0.0));
    }
    let mut lambda = 1e-8;
    while lambda <= 1.0 {
        let mut bumped = cov.clone();
        for i in 0..p {
            bumped[(i, i)] += lambda * scale;
        }
        if let Some(chol) = Cholesky::new(bumped) {
            if lambda > 1e-4 {
                log::warn!("covariance needed ridge lambda = {lambda:.1e} (relative)");
            }
            return Ok((chol, lambda));
        }
        lambda *= 10.0;
    }
    Err(Error::IndefiniteCovariance)
}

/// Ridge-regularized inverse of a sample covariance; returns the inverse and
/// the relative ridge that was needed (0.0 when none).
pub fn ridge_inverse(cov: &Mat) -> Result<(Mat, f64)> {
    let (chol, lambda) = ridge_cholesky(cov)?;
    let mut inv = chol.inverse();
    symmetrize(&mut inv);
    Ok((inv, lambda))
}

/// Hotelling quadratic form residᵀ cov⁻¹ resid (ridge-stabilized); zero only
/// at zero residual.
pub fn hotelling_t2(resid: &Vect, cov: &Mat) -> Result<f64> {
    if cov.nrows() != resid.len() {
        return Err(Error::InvalidArgument(format!(
            "hotelling dimensions: cov is {}x{}, resid has {}",
            cov.nrows(),
            cov.ncols(),
            resid.len()
        )));
    }
    check_finite("hotelling input", resid.iter().copied())?;
    let (chol, _) = ridge_cholesky(cov)?;
    let solved = chol.solve(resid);
    let t2 = resid.dot(&solved);
    // Exact zero residual must give exact zero; tiny negatives are roundoff.
    Ok(t2.max(0.0))
}

/// Weighted logistic regression fit.
#[derive(Debug, Clone)]
pub struct IrlsFit {
    pub coef: Vect,
    /// Inverse observed information at the final coefficients.
    pub cov: Mat,
    pub converged: bool,
    pub iterations: usize,
    /// Set when coefficients diverge past |beta| > 30 (data separation);
    /// the fit is still returned.
    pub separation: bool,
    pub log_lik: f64,
}

/// Maximizes the weighted Bernoulli log-likelihood by iteratively reweighted
/// least squares with step halving. Converged when max |score| < 1e-8, up to
/// 100 iterations.
pub fn irls_logistic(x: &Mat, y: &[f64], w: &[f64]) -> Result<IrlsFit> {
    let (m, p) = (x.nrows(), x.ncols());
    if y.len() != m || w.len() != m {
        return Err(Error::InvalidArgument(format!(
            "irls dimensions: X is {m}x{p}, y has {}, w has {}",
            y.len(),
            w.len()
        )));
    }
    if p == 0 || m == 0 {
        return Err(Error::InvalidArgument("irls needs at least one row and column".into()));
    }
    check_finite("irls input", x.iter().copied().chain(w.iter().copied()))?;
    if y.iter().any(|v| *v != 0.0 && *v != 1.0) {
        return Err(Error::InvalidArgument("irls outcomes must be 0/1".into()));
    }
    if w.iter().any(|v| *v < 0.0) {
        return Err(Error::InvalidArgument("irls weights must be nonnegative".into()));
    }
    for j in 0..p {
        if x.column(j).iter().all(|v| *v == 0.0) {
            return Err(Error::NonIdentifiable { term: format!("design column {j}") });
        }
    }

    let wv = Vect::from_column_slice(w);
    let yv = Vect::from_column_slice(y);
    // Compensated summation: step acceptance must resolve likelihood
    // differences near 1e-12, far below the naive summation noise of many
    // thousands of rows.
    let loglik = |eta: &Vect| -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for i in 0..m {
            let e = eta[i];
            let term = wv[i] * if yv[i] == 1.0 { log_sigmoid(e) } else { log_sigmoid(-e) };
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        sum + comp
    };

    let mut beta = Vect::zeros(p);
    let mut eta = Vect::zeros(m);
    let mut ll = loglik(&eta);
    let mut converged = false;
    let mut separation = false;
    let mut iterations = 0;

    for iter in 0..100 {
        iterations = iter + 1;
        let mu = eta.map(logistic);
        // score = Xᵀ (w ∘ (y - mu))
        let resid = Vect::from_fn(m, |i, _| wv[i] * (yv[i] - mu[i]));
        let score = x.transpose() * &resid;
        if score.amax() < 1e-8 {
            converged = true;
            break;
        }
        // H = Xᵀ diag(w mu (1-mu)) X
        let irw = Vect::from_fn(m, |i, _| wv[i] * mu[i] * (1.0 - mu[i]));
        let mut xw = x.clone();
        for (i, mut row) in xw.row_iter_mut().enumerate() {
            row *= irw[i];
        }
        let h = x.transpose() * xw;
        let delta = match solve(&h, &score) {
            Ok(d) => d,
            Err(_) => {
                // Information matrix collapsed; the likelihood surface is
                // flat in some direction (separation or degenerate weights).
                separation = true;
                break;
            }
        };
        // Step halving keeps the likelihood non-decreasing.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let candidate = &beta + &delta * step;
            let eta_c = x * &candidate;
            let ll_c = loglik(&eta_c);
            if ll_c >= ll - 1e-12 {
                beta = candidate;
                eta = eta_c;
                ll = ll_c;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        if beta.amax() > 30.0 {
            separation = true;
            break;
        }
    }
    if separation {
        log::warn!("irls: separation suspected (|beta| > 30 or flat information)");
    }

    // Covariance from the observed information at the final coefficients.
    let mu = eta.map(logistic);
    let irw = Vect::from_fn(m, |i, _| wv[i] * mu[i] * (1.0 - mu[i]));
    let mut xw = x.clone();
    for (i, mut row) in xw.row_iter_mut().enumerate() {
        row *= irw[i];
    }
    let h = x.transpose() * xw;
    let cov = match invert(&h) {
        Ok(c) => c,
        Err(_) => Mat::from_element(p, p, f64::INFINITY),
    };
    Ok(IrlsFit { coef: beta, cov, converged, iterations, separation, log_lik: ll })
}

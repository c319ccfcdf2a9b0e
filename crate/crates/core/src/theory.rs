//! Closed-form asymptotic predictions: variances, correlation and partial
//! correlation limits, the full-correlation curve, and the 3D analogues.
//!
//! Everything here is deterministic algebra in the spectral parameter eta
//! (the limit of the fourth Fourier coefficient of the angular lattice
//! measure) and the curve/surface audit numbers.

use std::f64::consts::PI;
use thiserror::Error;

use crate::curves::{Classification, CurveAudit};

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("eta = {0} outside [-1, 1]")]
    EtaOutOfRange(f64),
    #[error("formula requires a static curve audit (got {0:?})")]
    NonStaticAudit(Classification),
    #[error("surface I4 = {0} outside the static range [1/5, 1/3]")]
    I4OutOfStaticRange(f64),
    #[error("u = 0 boundary-length variance is the nodal form; call var_nodal_length")]
    NodalLevel,
}

/// Hermite polynomial combination a(u) = H4(u)/4 + H2(u)/2 - 1/8
/// = u^4/4 - u^2 + 1/8.
pub fn hermite_a(u: f64) -> f64 {
    0.25 * u.powi(4) - u * u + 0.125
}

/// Gaussian density.
pub fn phi(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

/// Boundary-length variance at level u != 0: (1/32) u^4 e^{-u^2} E_n / N_n.
pub fn var_level_length(u: f64, n: i64, n_count: usize) -> Result<f64, TheoryError> {
    if u == 0.0 {
        return Err(TheoryError::NodalLevel);
    }
    let e_n = 4.0 * PI * PI * n as f64;
    Ok(u.powi(4) * (-u * u).exp() / 32.0 * e_n / n_count as f64)
}

/// Nodal-length variance: (1 + eta^2)/512 * E_n / N_n^2.
pub fn var_nodal_length(n: i64, n_count: usize, eta: f64) -> Result<f64, TheoryError> {
    check_eta(eta)?;
    let e_n = 4.0 * PI * PI * n as f64;
    Ok((1.0 + eta * eta) / 512.0 * e_n / (n_count as f64 * n_count as f64))
}

/// Crossing-count variance for a non-static curve:
/// (4 B_C(mu_n) - L^2) n / N_n.
pub fn var_crossings(b_mu: f64, length: f64, n: i64, n_count: usize) -> f64 {
    (4.0 * b_mu - length * length) * n as f64 / n_count as f64
}

/// Crossing-count variance for a static curve:
/// n / (4 N^2) * (16 A_C(mu_n) - L^2).
pub fn var_crossings_static(a_mu: f64, length: f64, n: i64, n_count: usize) -> f64 {
    n as f64 / (4.0 * (n_count as f64).powi(2)) * (16.0 * a_mu - length * length)
}

/// Nodal length / static-curve crossings correlation limit f_{C'}(eta).
pub fn corr_nodal_static(eta: f64, audit: &CurveAudit) -> Result<f64, TheoryError> {
    check_eta(eta)?;
    if audit.classification == Classification::Generic {
        return Err(TheoryError::NonStaticAudit(audit.classification));
    }
    Ok(f_curve(eta, audit.i4, audit.i4_prime))
}

/// f_{C'}(eta) from raw audit numbers (I4, I4').
pub fn f_curve(eta: f64, i4: f64, i4p: f64) -> f64 {
    let num = 1.0 + 2.0 * eta * i4p + eta * eta;
    let inner = 2.0 * (1.0 - eta * eta) * (2.0 * i4 - 1.0) + (eta * i4p + 1.0).powi(2);
    let den = 2f64.sqrt() * (1.0 + eta * eta).sqrt() * inner.max(0.0).sqrt();
    if den == 0.0 {
        // removable 0/0 at eta = +-1 with I4' = -+1; the limit is 0
        return 0.0;
    }
    num / den
}

/// Partial correlation of boundary lengths at levels (u1, u2): M(u1, u2; eta).
pub fn partial_corr_levels(u1: f64, u2: f64, eta: f64) -> Result<f64, TheoryError> {
    check_eta(eta)?;
    let (a1, a2) = (hermite_a(u1), hermite_a(u2));
    let num = cov_bracket(a1, a2, eta);
    let den = (var_bracket(a1, eta) * var_bracket(a2, eta)).sqrt();
    Ok(num / den)
}

/// Covariance bracket 2 a1 a2 - (a1 + a2)/4 + (3 + eta^2)/64.
pub fn cov_bracket(a1: f64, a2: f64, eta: f64) -> f64 {
    2.0 * a1 * a2 - 0.25 * (a1 + a2) + (3.0 + eta * eta) / 64.0
}

/// Variance bracket 2 a^2 - a/2 + (3 + eta^2)/64.
pub fn var_bracket(a: f64, eta: f64) -> f64 {
    cov_bracket(a, a, eta)
}

/// Partial correlation of the level-u boundary length with static-curve
/// crossings: f_{C'}(u; eta).
pub fn partial_corr_level_static(u: f64, eta: f64, audit: &CurveAudit) -> Result<f64, TheoryError> {
    check_eta(eta)?;
    if audit.classification == Classification::Generic {
        return Err(TheoryError::NonStaticAudit(audit.classification));
    }
    Ok(f_curve_level(u, eta, audit.i4, audit.i4_prime))
}

/// f_{C'}(u; eta) from raw audit numbers.
pub fn f_curve_level(u: f64, eta: f64, i4: f64, i4p: f64) -> f64 {
    let num = 2f64.sqrt() / 16.0 * (1.0 + 2.0 * eta * i4p + eta * eta);
    let inner = 2.0 * (1.0 - eta * eta) * (2.0 * i4 - 1.0) + (eta * i4p + 1.0).powi(2);
    let den = var_bracket(hermite_a(u), eta).sqrt() * inner.max(0.0).sqrt();
    if den == 0.0 {
        return 0.0;
    }
    num / den
}

/// All real levels u2 on the full-correlation curve through u1:
/// solutions of u2^4 - 4 u2^2 = u1^4 - 4 u1^2, sorted, deduplicated.
pub fn resonant_levels(u1: f64) -> Vec<f64> {
    let c = u1.powi(4) - 4.0 * u1 * u1;
    let disc = 4.0 + c;
    let mut roots: Vec<f64> = vec![];
    if disc >= 0.0 {
        for sq in [2.0 - disc.sqrt(), 2.0 + disc.sqrt()] {
            if sq >= 0.0 {
                let r = sq.sqrt();
                if r == 0.0 {
                    roots.push(0.0);
                } else {
                    roots.push(-r);
                    roots.push(r);
                }
            }
        }
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    roots
}

/// 3D nodal area / intersection length correlation: 16 / sqrt(405 I4 + 175).
pub fn corr3d(i4_surface: f64) -> Result<f64, TheoryError> {
    if !(0.2 - 1e-9..=1.0 / 3.0 + 1e-9).contains(&i4_surface) {
        return Err(TheoryError::I4OutOfStaticRange(i4_surface));
    }
    Ok(16.0 / (405.0 * i4_surface + 175.0).sqrt())
}

/// Var(A_n) ~ (32/375) n / N^2.
pub fn var_area_3d(n: i64, n_count: usize) -> f64 {
    32.0 / 375.0 * n as f64 / (n_count as f64).powi(2)
}

/// Var(M_n) ~ (pi^2/9600)(n/N^2)(81 I4 + 35 A^2).
pub fn var_intersection_3d(n: i64, n_count: usize, i4: f64, area: f64) -> f64 {
    PI * PI / 9600.0 * n as f64 / (n_count as f64).powi(2) * (81.0 * i4 + 35.0 * area * area)
}

/// Cov(A_n, M_n) ~ (n/N^2) 8 pi A / 375.
pub fn cov_area_intersection_3d(n: i64, n_count: usize, area: f64) -> f64 {
    n as f64 / (n_count as f64).powi(2) * 8.0 * PI * area / 375.0
}

/// Labels and data of a symmetric correlation matrix over the functional
/// list (L^0, L^{u1}, ..., Z(C), Z(C'), Z(C'')).
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    /// Row-major full symmetric matrix.
    pub data: Vec<Vec<f64>>,
}

/// The two correlation tables (asymptotic and partial), evaluated for the
/// level list and the static / doubly static audits.
pub fn correlation_matrices(
    eta: f64,
    static_audit: &CurveAudit,
    levels: &[f64],
) -> Result<(CorrelationMatrix, CorrelationMatrix), TheoryError> {
    check_eta(eta)?;
    if static_audit.classification == Classification::Generic {
        return Err(TheoryError::NonStaticAudit(static_audit.classification));
    }
    let mut labels: Vec<String> = vec!["L0".into()];
    labels.extend(levels.iter().filter(|u| **u != 0.0).map(|u| format!("L{u}")));
    labels.extend(["Z(C)".into(), "Z(C')".into(), "Z(C'')".into()]);
    let nonzero: Vec<f64> = levels.iter().copied().filter(|u| *u != 0.0).collect();
    let nl = 1 + nonzero.len();
    let dim = nl + 3;
    let f_eta = f_curve(eta, static_audit.i4, static_audit.i4_prime);

    let mut asym = vec![vec![0.0; dim]; dim];
    let mut partial = vec![vec![0.0; dim]; dim];
    let level = |i: usize| -> f64 {
        if i == 0 {
            0.0
        } else {
            nonzero[i - 1]
        }
    };
    for i in 0..dim {
        asym[i][i] = 1.0;
        partial[i][i] = 1.0;
    }
    for i in 0..nl {
        for j in 0..i {
            let (ui, uj) = (level(i), level(j));
            // boundary lengths: full correlation iff both levels nonzero or
            // both zero
            let both_nonzero = ui != 0.0 && uj != 0.0;
            let both_zero = ui == 0.0 && uj == 0.0;
            asym[i][j] = if both_nonzero || both_zero { 1.0 } else { 0.0 };
            partial[i][j] = partial_corr_levels(ui, uj, eta)?;
            asym[j][i] = asym[i][j];
            partial[j][i] = partial[i][j];
        }
    }
    let (zc, zcs, zcd) = (nl, nl + 1, nl + 2);
    for i in 0..nl {
        let u = level(i);
        // Z(C): uncorrelated with everything in both tables
        asym[zc][i] = 0.0;
        partial[zc][i] = 0.0;
        // Z(C'): correlates with the nodal length only; partially with all
        // levels through f_{C'}(u; eta)
        asym[zcs][i] = if u == 0.0 { f_eta } else { 0.0 };
        partial[zcs][i] = f_curve_level(u, eta, static_audit.i4, static_audit.i4_prime);
        // Z(C''): the doubly static audit has I4 = 3/8, I4' = 0, for which
        // f reduces to M(0, u; eta)
        asym[zcd][i] = if u == 0.0 { 1.0 } else { 0.0 };
        partial[zcd][i] = partial_corr_levels(0.0, u, eta)?;
        for r in [zc, zcs, zcd] {
            asym[i][r] = asym[r][i];
            partial[i][r] = partial[r][i];
        }
    }
    asym[zcs][zc] = 0.0;
    asym[zcd][zc] = 0.0;
    asym[zcd][zcs] = f_eta;
    partial[zcs][zc] = 0.0;
    partial[zcd][zc] = 0.0;
    partial[zcd][zcs] = f_eta;
    for (i, j) in [(zcs, zc), (zcd, zc), (zcd, zcs)] {
        asym[j][i] = asym[i][j];
        partial[j][i] = partial[i][j];
    }
    Ok((
        CorrelationMatrix {
            labels: labels.clone(),
            data: asym,
        },
        CorrelationMatrix {
            labels,
            data: partial,
        },
    ))
}

fn check_eta(eta: f64) -> Result<(), TheoryError> {
    if !(-1.0..=1.0).contains(&eta) {
        return Err(TheoryError::EtaOutOfRange(eta));
    }
    Ok(())
}

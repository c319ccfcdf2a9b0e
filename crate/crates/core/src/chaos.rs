//! Chaos projections computed exactly from a coefficient draw.
//!
//! Every formula here is the dominant closed form of the corresponding
//! level-set functional's chaos component: the W statistics, boundary-length
//! second and fourth chaos at any level, crossing-count chaos against
//! registered curves (generic, static, doubly static routes), and the 3D
//! nodal-area / intersection-length fourth chaos. Remainder terms of lower
//! order are dropped throughout; ensemble manifests record that convention.

use thiserror::Error;

use crate::curves::{audit, Classification, CurveAudit, DirectionTable, ToralCurve};
use crate::field::CoefficientDraw;
use crate::lattice::FrequencySet;
use crate::theory::{hermite_a, phi};
use std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum ChaosError {
    #[error("formula requires a static curve (classification {0:?})")]
    RequiresStatic(Classification),
    #[error("formula requires a doubly static curve (classification {0:?})")]
    RequiresDoublyStatic(Classification),
    #[error("formula requires a dim-{0} frequency set")]
    WrongDimension(u8),
}

/// Registered curve with its audit and direction-integral table, reusable
/// across an ensemble of draws.
#[derive(Debug, Clone)]
pub struct CurveContext {
    pub id: String,
    pub length: f64,
    pub audit: CurveAudit,
    pub table: DirectionTable,
}

impl CurveContext {
    pub fn new(curve: &ToralCurve, fs: &FrequencySet) -> Self {
        CurveContext {
            id: curve.spec.id(),
            length: curve.length,
            audit: audit(curve),
            table: crate::curves::direction_table(curve, fs),
        }
    }
}

/// Per-draw chaos projections.
#[derive(Debug, Clone)]
pub struct ChaosVector {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    /// (u, L^u[2]) for each requested level.
    pub l2_at: Vec<(f64, f64)>,
    /// (u, L^u[4]) for each requested level.
    pub l4_at: Vec<(f64, f64)>,
    /// Second-chaos crossing projection (meaningful for non-static curves).
    pub z2: Option<f64>,
    /// Fourth-chaos crossing projection, static route.
    pub z4: Option<f64>,
    /// Fourth-chaos crossing projection, doubly static closed form.
    pub z4_dd: Option<f64>,
    /// 3D nodal-area fourth chaos.
    pub a4: Option<f64>,
    /// 3D intersection-length fourth chaos for a static surface of area
    /// `area` (set by `project_3d`).
    pub m4: Option<f64>,
}

/// The normalized spectral statistics W1..W4 of a draw.
pub fn w_statistics(draw: &CoefficientDraw) -> [f64; 4] {
    let fs = &draw.fs;
    let m = fs.half.len() as f64;
    let nf = fs.n as f64;
    let mut w = [0.0f64; 4];
    for (lam, a) in fs.half.iter().zip(&draw.coeffs) {
        let x = a.norm_sqr() - 1.0;
        let (l1, l2) = (lam[0] as f64, lam[1] as f64);
        w[0] += x;
        w[1] += x * l1 * l1 / nf;
        w[2] += x * l2 * l2 / nf;
        w[3] += x * l1 * l2 / nf;
    }
    let scale = 1.0 / m.sqrt();
    for v in w.iter_mut() {
        *v *= scale;
    }
    w
}

/// Second-chaos boundary length at level u.
pub fn boundary_chaos2(draw: &CoefficientDraw, u: f64) -> f64 {
    let fs = &draw.fs;
    let z = draw.l2_norm_fluctuation();
    let half = fs.half.len() as f64;
    (PI / 8.0).sqrt() * u * u * phi(u) * (2.0 * PI * PI * fs.n as f64).sqrt() * z / half
}

/// Fourth-chaos boundary length at level u (dominant closed form).
pub fn boundary_chaos4(draw: &CoefficientDraw, u: f64) -> f64 {
    let [w1, w2, w3, w4] = w_statistics(draw);
    boundary_chaos4_from_w(draw.fs.as_ref(), [w1, w2, w3, w4], u)
}

fn boundary_chaos4_from_w(fs: &FrequencySet, w: [f64; 4], u: f64) -> f64 {
    let a_u = hermite_a(u);
    let bracket =
        a_u * w[0] * w[0] - 0.25 * w[1] * w[1] - 0.25 * w[2] * w[2] - 0.5 * w[3] * w[3]
            - (a_u - 0.25);
    let e_half = fs.energy() / 2.0;
    phi(u) * (PI / 2.0).sqrt() * e_half.sqrt() / fs.len() as f64 * bracket
}

/// Second-chaos crossing count against a registered curve.
pub fn crossings_chaos2(draw: &CoefficientDraw, ctx: &CurveContext) -> f64 {
    let fs = &draw.fs;
    let half = fs.half.len() as f64;
    let mut sum = 0.0;
    for (k, a) in draw.coeffs.iter().enumerate() {
        sum += (a.norm_sqr() - 1.0) * (2.0 * ctx.table.i20[k] - 1.0);
    }
    (2.0 * PI * PI * fs.n as f64).sqrt() / (2.0 * PI) * ctx.length * sum / half
}

/// Fourth-chaos crossing count, static-curve route (pairwise I(2,2) table).
pub fn crossings_chaos4_static(
    draw: &CoefficientDraw,
    ctx: &CurveContext,
) -> Result<f64, ChaosError> {
    if ctx.audit.classification == Classification::Generic {
        return Err(ChaosError::RequiresStatic(ctx.audit.classification));
    }
    let fs = &draw.fs;
    let m = ctx.table.m;
    let x: Vec<f64> = draw.coeffs.iter().map(|a| a.norm_sqr() - 1.0).collect();
    let mut quad = 0.0;
    for i in 0..m {
        for j in 0..m {
            quad += x[i] * x[j] * (1.0 - 4.0 * ctx.table.i22[i * m + j]);
        }
    }
    quad /= m as f64;
    let bracket = quad + ctx.table.mean_4i40_minus_1;
    Ok((2.0 * fs.n as f64).sqrt() / (4.0 * fs.len() as f64) * ctx.length * bracket)
}

/// Fourth-chaos crossing count, doubly static closed form
/// (1/2 - <lhat, lhat'>^2 pair weights).
pub fn crossings_chaos4_doubly(
    draw: &CoefficientDraw,
    ctx: &CurveContext,
) -> Result<f64, ChaosError> {
    if ctx.audit.classification != Classification::DoublyStatic {
        return Err(ChaosError::RequiresDoublyStatic(ctx.audit.classification));
    }
    let fs = &draw.fs;
    let m = ctx.table.m;
    let x: Vec<f64> = draw.coeffs.iter().map(|a| a.norm_sqr() - 1.0).collect();
    let mut quad = 0.0;
    for i in 0..m {
        for j in 0..m {
            quad += x[i] * x[j] * (0.5 - ctx.table.dot2[i * m + j]);
        }
    }
    quad /= m as f64;
    Ok((2.0 * fs.n as f64).sqrt() / (4.0 * fs.len() as f64) * ctx.length * (quad + 0.5))
}

/// 3D nodal-area fourth chaos.
pub fn area_chaos4_3d(draw: &CoefficientDraw) -> Result<f64, ChaosError> {
    let fs = &draw.fs;
    if fs.dim != 3 {
        return Err(ChaosError::WrongDimension(3));
    }
    let dirs = fs.half_unit_directions_3();
    let m = dirs.len();
    let x: Vec<f64> = draw.coeffs.iter().map(|a| a.norm_sqr() - 1.0).collect();
    let mut quad = 0.0;
    for i in 0..m {
        for j in 0..m {
            let dot = dirs[i][0] * dirs[j][0] + dirs[i][1] * dirs[j][1] + dirs[i][2] * dirs[j][2];
            quad += x[i] * x[j] * (1.0 - 3.0 * dot * dot);
        }
    }
    quad /= m as f64;
    Ok((fs.n as f64).sqrt() / (5.0 * 3f64.sqrt() * fs.len() as f64) * 2.0 * (2.0 + quad))
}

/// 3D intersection-length fourth chaos for a static surface. `i22` is the
/// surface direction-integral table over half-set pairs (row-major), `area`
/// the surface area.
pub fn intersection_chaos4_3d(
    draw: &CoefficientDraw,
    i22: &[f64],
    area: f64,
) -> Result<f64, ChaosError> {
    let fs = &draw.fs;
    if fs.dim != 3 {
        return Err(ChaosError::WrongDimension(3));
    }
    let dirs = fs.half_unit_directions_3();
    let m = dirs.len();
    debug_assert_eq!(i22.len(), m * m);
    let x: Vec<f64> = draw.coeffs.iter().map(|a| a.norm_sqr() - 1.0).collect();
    let mut quad = 0.0;
    for i in 0..m {
        for j in 0..m {
            let dot = dirs[i][0] * dirs[j][0] + dirs[i][1] * dirs[j][1] + dirs[i][2] * dirs[j][2];
            quad += x[i] * x[j] * (5.0 - 27.0 * i22[i * m + j] - 6.0 * dot * dot);
        }
    }
    quad /= m as f64;
    let n = fs.n as f64;
    let prefactor = (4.0 * PI * PI * n / 3.0).sqrt() * 6.0 / (128.0 * fs.len() as f64) * area / 15.0;
    Ok(prefactor * (32.0 + 5.0 * quad))
}

/// Assemble the chaos vector of one draw for the requested levels and an
/// optionally registered curve.
pub fn project(
    draw: &CoefficientDraw,
    levels: &[f64],
    ctx: Option<&CurveContext>,
) -> ChaosVector {
    let w = w_statistics(draw);
    let l2_at = levels
        .iter()
        .map(|&u| (u, boundary_chaos2(draw, u)))
        .collect();
    let l4_at = levels
        .iter()
        .map(|&u| (u, boundary_chaos4_from_w(draw.fs.as_ref(), w, u)))
        .collect();
    let (mut z2, mut z4, mut z4_dd) = (None, None, None);
    if let Some(ctx) = ctx {
        z2 = Some(crossings_chaos2(draw, ctx));
        z4 = crossings_chaos4_static(draw, ctx).ok();
        z4_dd = crossings_chaos4_doubly(draw, ctx).ok();
    }
    ChaosVector {
        w1: w[0],
        w2: w[1],
        w3: w[2],
        w4: w[3],
        l2_at,
        l4_at,
        z2,
        z4,
        z4_dd,
        a4: None,
        m4: None,
    }
}

/// The five normalized lattice-curve sums and the derived quantities they
/// collapse to.
#[derive(Debug, Clone, Copy)]
pub struct LemISums {
    /// (1/N) sum of I_{l,l}(2,0); always 1/2.
    pub sumeq20: f64,
    /// (1/N) sum of I_{l,l}(2,2); the quantity I below.
    pub sumeq: f64,
    /// (1/N^2) pair sum of I_{l,l'}(2,2); always 1/4.
    pub sumdif: f64,
    /// (1/(n^2 N^2)) pair sum of <l, l'>^2; always 1/2.
    pub bra: f64,
    /// (1/(n^2 N^2)) pair sum of <l, l'>^2 I_{l,l'}(2,2); the quantity J.
    pub brasumdif: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SpectralQuantities {
    /// I = 3/8 + (mu4/8) I4'.
    pub i_cal: f64,
    /// J = 10/64 + (4/64) mu4 I4' + (2/64) mu4^2.
    pub j_cal: f64,
    pub lemi: LemISums,
}

/// Evaluate the five sums by exact lattice summation against the curve's
/// quadrature moments.
pub fn spectral_quantities(
    fs: &FrequencySet,
    curve: &ToralCurve,
) -> Result<SpectralQuantities, ChaosError> {
    if fs.dim != 2 {
        return Err(ChaosError::WrongDimension(2));
    }
    let table = crate::curves::direction_table(curve, fs);
    let m = table.m;
    // all summands are invariant under l -> -l in either argument, so
    // half-set means equal full-set means
    let sumeq20 = table.i20.iter().sum::<f64>() / m as f64;
    let mut sumeq = 0.0;
    for i in 0..m {
        sumeq += table.i22[i * m + i];
    }
    sumeq /= m as f64;
    let mut sumdif = 0.0;
    let mut bra = 0.0;
    let mut brasumdif = 0.0;
    for i in 0..m {
        for j in 0..m {
            let i22 = table.i22[i * m + j];
            let d2 = table.dot2[i * m + j];
            sumdif += i22;
            bra += d2;
            brasumdif += d2 * i22;
        }
    }
    let mm = (m * m) as f64;
    sumdif /= mm;
    bra /= mm;
    brasumdif /= mm;
    let mu4 = fs.mu4().map_err(|_| ChaosError::WrongDimension(2))?;
    let aud = audit(curve);
    Ok(SpectralQuantities {
        i_cal: 0.375 + mu4 / 8.0 * aud.i4_prime,
        j_cal: 10.0 / 64.0 + 4.0 / 64.0 * mu4 * aud.i4_prime + 2.0 / 64.0 * mu4 * mu4,
        lemi: LemISums {
            sumeq20,
            sumeq,
            sumdif,
            bra,
            brasumdif,
        },
    })
}

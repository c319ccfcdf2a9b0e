//! Sampling arithmetic random waves from their spectral representation.
//!
//! One `CoefficientDraw` is the single source of randomness per field
//! realization: complex Gaussian coefficients over the frequency half-set,
//! derived deterministically from (master seed, sample index) so that
//! ensemble results do not depend on the parallel schedule. Grid values,
//! gradients, and curve restrictions are exact trigonometric sums (or the
//! equivalent FFT synthesis when that is cheaper).

use std::f64::consts::PI;
use std::sync::Arc;

pub use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::curves::ToralCurve;
use crate::lattice::FrequencySet;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("frequency set is empty; nothing to sample")]
    EmptySet,
    #[error("grid size {m} aliases frequencies of |lambda| <= sqrt({n}); need at least {needed}")]
    GridAliasesFrequencies { m: usize, n: i64, needed: usize },
}

/// Counter-based random stream: the state for sample `idx` is a hash of
/// (master_seed, idx), so any sample can be generated independently of the
/// others and of the thread that runs it.
#[derive(Debug, Clone)]
pub struct SampleRng {
    state: u64,
}

fn splitmix_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn mix64(z: u64) -> u64 {
    splitmix_finalize(z.wrapping_add(0x9E3779B97F4A7C15))
}

impl SampleRng {
    pub fn for_sample(master_seed: u64, idx: u64) -> Self {
        let state = mix64(mix64(master_seed) ^ mix64(idx).rotate_left(32) ^ 0xD1B54A32D192ED03);
        SampleRng { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        splitmix_finalize(self.state)
    }

    /// Uniform in the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Independent standard normal pair (Box-Muller).
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let th = 2.0 * PI * u2;
        (r * th.cos(), r * th.sin())
    }
}

/// One sample of complex Gaussian coefficients a_lambda over the half-set;
/// a_{-lambda} is the conjugate and is never stored.
#[derive(Debug, Clone)]
pub struct CoefficientDraw {
    pub fs: Arc<FrequencySet>,
    /// Aligned with `fs.half`.
    pub coeffs: Vec<Complex<f64>>,
    pub master_seed: u64,
    pub sample_idx: u64,
}

/// Draw coefficients a = (xi + i zeta)/sqrt(2) with xi, zeta standard
/// normals, so E|a|^2 = 1 and the field has unit variance.
pub fn draw_coefficients(
    fs: &Arc<FrequencySet>,
    master_seed: u64,
    idx: u64,
) -> Result<CoefficientDraw, FieldError> {
    if fs.is_empty() {
        return Err(FieldError::EmptySet);
    }
    let mut rng = SampleRng::for_sample(master_seed, idx);
    let inv_sqrt2 = 0.5f64.sqrt();
    let coeffs = fs
        .half
        .iter()
        .map(|_| {
            let (x, z) = rng.normal_pair();
            Complex::new(x * inv_sqrt2, z * inv_sqrt2)
        })
        .collect();
    Ok(CoefficientDraw {
        fs: Arc::clone(fs),
        coeffs,
        master_seed,
        sample_idx: idx,
    })
}

/// Deterministic draw with every coefficient set to `value` (test stub).
pub fn stub_draw(fs: &Arc<FrequencySet>, value: Complex<f64>) -> Result<CoefficientDraw, FieldError> {
    if fs.is_empty() {
        return Err(FieldError::EmptySet);
    }
    Ok(CoefficientDraw {
        fs: Arc::clone(fs),
        coeffs: vec![value; fs.half.len()],
        master_seed: 0,
        sample_idx: 0,
    })
}

impl CoefficientDraw {
    /// Random L2-norm fluctuation Z = sum over the half-set of (|a|^2 - 1).
    pub fn l2_norm_fluctuation(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm_sqr() - 1.0).sum()
    }

    /// Exact field value T(x) = (2/sqrt N) sum_half Re(a) cos(2 pi <l, x>)
    /// - Im(a) sin(2 pi <l, x>).
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let norm = 2.0 / (self.fs.len() as f64).sqrt();
        let mut acc = 0.0;
        for (lam, a) in self.fs.half.iter().zip(&self.coeffs) {
            let phase = 2.0
                * PI
                * lam
                    .iter()
                    .zip(x.iter().chain(std::iter::repeat(&0.0)))
                    .map(|(l, xi)| *l as f64 * xi)
                    .sum::<f64>();
            acc += a.re * phase.cos() - a.im * phase.sin();
        }
        norm * acc
    }

    /// Exact gradient of T at x (first `dim` entries meaningful).
    pub fn gradient(&self, x: &[f64]) -> [f64; 3] {
        let norm = 2.0 / (self.fs.len() as f64).sqrt();
        let mut g = [0.0f64; 3];
        for (lam, a) in self.fs.half.iter().zip(&self.coeffs) {
            let phase = 2.0
                * PI
                * lam
                    .iter()
                    .zip(x.iter().chain(std::iter::repeat(&0.0)))
                    .map(|(l, xi)| *l as f64 * xi)
                    .sum::<f64>();
            let common = -2.0 * PI * (a.re * phase.sin() + a.im * phase.cos());
            for (gi, l) in g.iter_mut().zip(lam.iter()) {
                *gi += common * *l as f64;
            }
        }
        for gi in g.iter_mut() {
            *gi *= norm;
        }
        g
    }
}

/// Grid evaluation of a draw; `values` is row-major with x1 fastest:
/// index = i1 + m * (i2 + m * i3) and x = (i1/m, i2/m, i3/m).
#[derive(Debug, Clone)]
pub struct FieldSample {
    pub draw: CoefficientDraw,
    pub m: usize,
    pub dim: u8,
    pub values: Vec<f64>,
    /// Per-point gradient, same layout, present on request.
    pub grad: Option<Vec<[f64; 3]>>,
}

/// Operation-count threshold above which synthesis switches from direct
/// summation to FFT.
const FFT_THRESHOLD_OPS: f64 = 1e7;

/// Synthesize T on an M^dim grid. Exact (to rounding) under the no-aliasing
/// precondition M >= 2 ceil(sqrt(n)) + 1.
pub fn synthesize_grid(
    draw: &CoefficientDraw,
    m: usize,
    with_gradient: bool,
) -> Result<FieldSample, FieldError> {
    let fs = &draw.fs;
    let needed = 2 * (fs.n as f64).sqrt().ceil() as usize + 1;
    if m < needed {
        return Err(FieldError::GridAliasesFrequencies { m, n: fs.n, needed });
    }
    let dim = fs.dim;
    let cells = m.pow(dim as u32);
    let ops = fs.len() as f64 * cells as f64;
    let values = if ops > FFT_THRESHOLD_OPS {
        synthesize_fft(draw, m, 0)
    } else {
        synthesize_direct(draw, m, 0)
    };
    let grad = if with_gradient {
        let mut out = vec![[0.0f64; 3]; cells];
        for axis in 0..dim as usize {
            let comp = if ops > FFT_THRESHOLD_OPS {
                synthesize_fft(draw, m, axis + 1)
            } else {
                synthesize_direct(draw, m, axis + 1)
            };
            for (o, v) in out.iter_mut().zip(comp) {
                o[axis] = v;
            }
        }
        Some(out)
    } else {
        None
    };
    Ok(FieldSample {
        draw: draw.clone(),
        m,
        dim,
        values,
        grad,
    })
}

/// Direct evaluation; `deriv_axis` = 0 for T itself, or 1-based axis for a
/// gradient component (factor 2 pi i lambda_axis).
fn synthesize_direct(draw: &CoefficientDraw, m: usize, deriv_axis: usize) -> Vec<f64> {
    let fs = &draw.fs;
    let dim = fs.dim as usize;
    let cells = m.pow(dim as u32);
    let mut out = vec![0.0f64; cells];
    let norm = 2.0 / (fs.len() as f64).sqrt();
    // per-frequency per-axis phase tables
    for (lam, a) in fs.half.iter().zip(&draw.coeffs) {
        let (are, aim) = match deriv_axis {
            0 => (a.re, a.im),
            ax => {
                // d/dx Re(a e(phase)) factor: multiply coefficient by 2 pi i l
                let l = lam[ax - 1] as f64;
                (-a.im * 2.0 * PI * l, a.re * 2.0 * PI * l)
            }
        };
        let table: Vec<Vec<(f64, f64)>> = (0..dim)
            .map(|axis| {
                (0..m)
                    .map(|i| {
                        let ph = 2.0 * PI * lam[axis] as f64 * i as f64 / m as f64;
                        (ph.cos(), ph.sin())
                    })
                    .collect()
            })
            .collect();
        match dim {
            2 => {
                for i2 in 0..m {
                    let (c2, s2) = table[1][i2];
                    let row = i2 * m;
                    for i1 in 0..m {
                        let (c1, s1) = table[0][i1];
                        let (c, s) = (c1 * c2 - s1 * s2, s1 * c2 + c1 * s2);
                        out[row + i1] += are * c - aim * s;
                    }
                }
            }
            _ => {
                for i3 in 0..m {
                    let (c3, s3) = table[2][i3];
                    for i2 in 0..m {
                        let (c2, s2) = table[1][i2];
                        let (c23, s23) = (c2 * c3 - s2 * s3, s2 * c3 + c2 * s3);
                        let row = (i3 * m + i2) * m;
                        for i1 in 0..m {
                            let (c1, s1) = table[0][i1];
                            let (c, s) = (c1 * c23 - s1 * s23, s1 * c23 + c1 * s23);
                            out[row + i1] += are * c - aim * s;
                        }
                    }
                }
            }
        }
    }
    for v in out.iter_mut() {
        *v *= norm;
    }
    out
}

/// FFT synthesis: place a_lambda / sqrt(N) at the wrapped index lambda mod M
/// for every lambda in the full set, then apply unnormalized inverse DFTs
/// along each axis. Exact at grid points under the aliasing precondition.
fn synthesize_fft(draw: &CoefficientDraw, m: usize, deriv_axis: usize) -> Vec<f64> {
    let fs = &draw.fs;
    let dim = fs.dim as usize;
    let cells = m.pow(dim as u32);
    let mut spec = vec![Complex::new(0.0, 0.0); cells];
    let norm = 1.0 / (fs.len() as f64).sqrt();
    let widx = |l: i64| -> usize { l.rem_euclid(m as i64) as usize };
    for (lam, a) in fs.half.iter().zip(&draw.coeffs) {
        for (point, coeff) in [(*lam, *a), ([-lam[0], -lam[1], -lam[2]], a.conj())] {
            let factor = match deriv_axis {
                0 => Complex::new(1.0, 0.0),
                ax => Complex::new(0.0, 2.0 * PI * point[ax - 1] as f64),
            };
            let idx = match dim {
                2 => widx(point[1]) * m + widx(point[0]),
                _ => (widx(point[2]) * m + widx(point[1])) * m + widx(point[0]),
            };
            spec[idx] += coeff * factor * norm;
        }
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(m);
    // transform along x1 (contiguous rows)
    for row in spec.chunks_exact_mut(m) {
        fft.process(row);
    }
    // transform along the remaining axes by transposing strided slices
    let mut scratch = vec![Complex::new(0.0, 0.0); m];
    for axis in 1..dim {
        let stride = m.pow(axis as u32);
        for block in 0..cells / (stride * m) {
            for offset in 0..stride {
                let base = block * stride * m + offset;
                for (j, s) in scratch.iter_mut().enumerate() {
                    *s = spec[base + j * stride];
                }
                fft.process(&mut scratch);
                for (j, s) in scratch.iter().enumerate() {
                    spec[base + j * stride] = *s;
                }
            }
        }
    }
    // conjugate symmetry of the placed coefficients makes the result real
    debug_assert!({
        let max_re = spec.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
        let max_im = spec.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        max_im <= 1e-10 * (1.0 + max_re)
    });
    spec.into_iter().map(|c| c.re).collect()
}

/// Field values and tangential derivatives along a registered curve.
#[derive(Debug, Clone)]
pub struct CurveRestriction<'a> {
    pub draw: &'a CoefficientDraw,
    pub curve: &'a ToralCurve,
    /// (t_j, T(gamma(t_j)), d/dt T(gamma(t_j))) at the curve nodes.
    pub samples: Vec<(f64, f64, f64)>,
}

/// Evaluate T and its tangential derivative at the curve quadrature nodes.
pub fn restrict_to_curve<'a>(
    draw: &'a CoefficientDraw,
    curve: &'a ToralCurve,
) -> CurveRestriction<'a> {
    let samples = curve
        .nodes
        .iter()
        .map(|node| {
            let x = [node.pos[0], node.pos[1]];
            let v = draw.evaluate(&x);
            let g = draw.gradient(&x);
            (node.t, v, g[0] * node.tangent[0] + g[1] * node.tangent[1])
        })
        .collect();
    CurveRestriction {
        draw,
        curve,
        samples,
    }
}

impl CurveRestriction<'_> {
    /// Exact T(gamma(t)) at arbitrary parameter t.
    pub fn value_at(&self, t: f64) -> f64 {
        let p = self.curve.position(t);
        self.draw.evaluate(&p)
    }

    /// Exact tangential derivative at arbitrary parameter t.
    pub fn deriv_at(&self, t: f64) -> f64 {
        let p = self.curve.position(t);
        let g = self.draw.gradient(&p);
        let tan = self.curve.tangent(t);
        g[0] * tan[0] + g[1] * tan[1]
    }
}

//! Lattice frequency sets on circles and spheres.
//!
//! A frequency set is the collection of integer vectors of squared norm `n`
//! in dimension 2 or 3. Everything downstream (field synthesis, chaos
//! projections, the spectral parameter eta) is driven by these sets, so the
//! enumeration is exact integer arithmetic with a deterministic ordering.

use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("n must be at least 1, got {0}")]
    InvalidN(i64),
    #[error("dimension must be 2 or 3, got {0}")]
    InvalidDim(u8),
    #[error("n = {0} exceeds the supported cap 2^31")]
    TooLarge(i64),
    #[error("frequency set is empty")]
    EmptySet,
    #[error("mu4 is only defined in dimension 2")]
    UnsupportedDimension,
}

/// Integer frequency vector; the third coordinate is zero in dimension 2.
pub type Frequency = [i64; 3];

/// All integer vectors of squared norm `n` in dimension `dim`, with the
/// positive half-set in dimension 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencySet {
    pub n: i64,
    pub dim: u8,
    /// Lexicographically ordered lattice points with |lambda|^2 = n.
    pub points: Vec<Frequency>,
    /// Half-set of conjugate-pair representatives. In dimension 2 this is
    /// the set with lambda_2 > 0, plus (sqrt(n), 0) when n is a perfect
    /// square; dimension 3 picks the sign-canonical representative.
    pub half: Vec<Frequency>,
}

/// Derived spectral summary of a frequency set.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    /// Number of lattice points.
    pub n_count: usize,
    /// Eigenvalue 4 pi^2 n.
    pub energy: f64,
    /// Fourth Fourier coefficient of the normalized angular measure
    /// (dimension 2 only).
    pub mu4: Option<f64>,
    /// Whether n is admissible for 3D equidistribution (n != 0,4,7 mod 8).
    pub admissible3d: bool,
    /// Minimum pairwise gap between distinct lattice points.
    pub min_gap: f64,
}

/// Normalized fourth-moment sums of a frequency set.
#[derive(Debug, Clone, PartialEq)]
pub struct FourthMomentSums {
    /// (1/N^2) sum over ordered pairs of <lhat, lhat'>^4.
    pub s4: f64,
    /// Normalized moments (1/(n^2 N)) sum lambda_i^2 lambda_j^2 for i <= j,
    /// row-major over the upper triangle; the diagonal entries are the pure
    /// fourth moments (1/(n^2 N)) sum lambda_i^4.
    pub s22: Vec<f64>,
}

/// Enumerate the frequency set for `n` in dimension 2 or 3. The empty set is
/// a valid result when n is not a sum of `dim` squares.
pub fn enumerate(n: i64, dim: u8) -> Result<FrequencySet, LatticeError> {
    if n < 1 {
        return Err(LatticeError::InvalidN(n));
    }
    if n > (1i64 << 31) {
        return Err(LatticeError::TooLarge(n));
    }
    if dim != 2 && dim != 3 {
        return Err(LatticeError::InvalidDim(dim));
    }
    let r = isqrt(n);
    let mut points: Vec<Frequency> = Vec::new();
    match dim {
        2 => {
            for a in -r..=r {
                let rem = n - a * a;
                let b = isqrt(rem);
                if b * b == rem {
                    if b == 0 {
                        points.push([a, 0, 0]);
                    } else {
                        points.push([a, -b, 0]);
                        points.push([a, b, 0]);
                    }
                }
            }
        }
        _ => {
            for a in -r..=r {
                let rem_a = n - a * a;
                let rb = isqrt(rem_a);
                for b in -rb..=rb {
                    let rem = rem_a - b * b;
                    let c = isqrt(rem);
                    if c * c == rem {
                        if c == 0 {
                            points.push([a, b, 0]);
                        } else {
                            points.push([a, b, -c]);
                            points.push([a, b, c]);
                        }
                    }
                }
            }
        }
    }
    points.sort_unstable();
    // Dimension 2 follows the lambda_2 > 0 convention with (sqrt(n), 0)
    // adjoined for square n; that coincides with picking the sign-canonical
    // representative of each conjugate pair, which is how dimension 3 is
    // handled as well.
    let half = points
        .iter()
        .copied()
        .filter(|p| match dim {
            2 => p[1] > 0 || (p[1] == 0 && p[0] > 0),
            _ => p[2] > 0 || (p[2] == 0 && (p[1] > 0 || (p[1] == 0 && p[0] > 0))),
        })
        .collect();
    Ok(FrequencySet {
        n,
        dim,
        points,
        half,
    })
}

impl FrequencySet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn energy(&self) -> f64 {
        4.0 * PI * PI * self.n as f64
    }

    /// mu4 via the integer identity Re(z^4) n^2 = l1^4 - 6 l1^2 l2^2 + l2^4,
    /// summed exactly and divided once.
    pub fn mu4(&self) -> Result<f64, LatticeError> {
        if self.dim != 2 {
            return Err(LatticeError::UnsupportedDimension);
        }
        if self.points.is_empty() {
            return Err(LatticeError::EmptySet);
        }
        let mut acc: i128 = 0;
        for p in &self.points {
            let (a, b) = (p[0] as i128, p[1] as i128);
            acc += a * a * a * a - 6 * a * a * b * b + b * b * b * b;
        }
        let n2 = (self.n as i128) * (self.n as i128);
        Ok(acc as f64 / (n2 as f64 * self.points.len() as f64))
    }

    pub fn admissible3d(&self) -> bool {
        self.dim == 3 && !matches!(self.n % 8, 0 | 4 | 7)
    }

    /// Minimum gap between distinct lattice points.
    pub fn min_gap(&self) -> Result<f64, LatticeError> {
        if self.points.len() < 2 {
            return Err(LatticeError::EmptySet);
        }
        let mut best = i64::MAX;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                let d: i64 = (0..3).map(|k| (p[k] - q[k]) * (p[k] - q[k])).sum();
                best = best.min(d);
            }
        }
        Ok((best as f64).sqrt())
    }

    /// Unit directions lambda / sqrt(n) for all points.
    pub fn unit_directions(&self) -> Vec<[f64; 3]> {
        let s = (self.n as f64).sqrt();
        self.points
            .iter()
            .map(|p| [p[0] as f64 / s, p[1] as f64 / s, p[2] as f64 / s])
            .collect()
    }

    /// Unit directions for the half-set (dimension 2).
    pub fn half_unit_directions(&self) -> Vec<[f64; 2]> {
        let s = (self.n as f64).sqrt();
        self.half
            .iter()
            .map(|p| [p[0] as f64 / s, p[1] as f64 / s])
            .collect()
    }

    /// Unit directions for the half-set, all dimensions.
    pub fn half_unit_directions_3(&self) -> Vec<[f64; 3]> {
        let s = (self.n as f64).sqrt();
        self.half
            .iter()
            .map(|p| [p[0] as f64 / s, p[1] as f64 / s, p[2] as f64 / s])
            .collect()
    }
}

/// Compute the spectral summary of a nonempty frequency set.
pub fn summarize(fs: &FrequencySet) -> Result<SpectralSummary, LatticeError> {
    if fs.is_empty() {
        return Err(LatticeError::EmptySet);
    }
    let mu4 = if fs.dim == 2 { Some(fs.mu4()?) } else { None };
    Ok(SpectralSummary {
        n_count: fs.len(),
        energy: fs.energy(),
        mu4,
        admissible3d: fs.admissible3d(),
        min_gap: fs.min_gap()?,
    })
}

/// Separation predicate: min gap >= n^(1/4 + delta). The implicit constant
/// is taken to be 1 and recorded in run manifests.
pub fn is_delta_separated(fs: &FrequencySet, delta: f64) -> Result<bool, LatticeError> {
    if fs.dim != 2 {
        return Err(LatticeError::UnsupportedDimension);
    }
    let gap = fs.min_gap()?;
    Ok(gap >= (fs.n as f64).powf(0.25 + delta))
}

/// Normalized fourth-moment sums over the set and over ordered pairs.
pub fn fourth_moment_sums(fs: &FrequencySet) -> Result<FourthMomentSums, LatticeError> {
    if fs.is_empty() {
        return Err(LatticeError::EmptySet);
    }
    let d = fs.dim as usize;
    let nn = fs.len() as f64;
    let n2 = (fs.n as f64) * (fs.n as f64);
    let mut s22 = Vec::new();
    for i in 0..d {
        for j in i..d {
            let mut acc: i128 = 0;
            for p in &fs.points {
                let (a, b) = (p[i] as i128, p[j] as i128);
                acc += a * a * b * b;
            }
            s22.push(acc as f64 / (n2 * nn));
        }
    }
    // s4 via the moment tensor: <lhat,lhat'>^4 = sum over index 4-tuples of
    // products; (1/N^2) sum over pairs equals the squared Frobenius norm of
    // V_ijkl = (1/N) sum lhat_i lhat_j lhat_k lhat_l.
    let dirs = fs.unit_directions();
    let mut v = [[[[0.0f64; 3]; 3]; 3]; 3];
    for u in &dirs {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        v[i][j][k][l] += u[i] * u[j] * u[k] * u[l];
                    }
                }
            }
        }
    }
    let mut s4 = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let t = v[i][j][k][l] / nn;
                    s4 += t * t;
                }
            }
        }
    }
    s4 *= 1.0; // (1/N^2) sum <.,.>^4 = sum_ijkl V_ijkl^2 exactly
    Ok(FourthMomentSums { s4, s22 })
}

/// All n <= `limit` that are sums of two squares (nonempty dim-2 sets).
pub fn representable_up_to(limit: i64) -> Vec<i64> {
    (1..=limit)
        .filter(|&n| {
            let r = isqrt(n);
            (0..=r).any(|a| {
                let rem = n - a * a;
                let b = isqrt(rem);
                b * b == rem
            })
        })
        .collect()
}

fn isqrt(n: i64) -> i64 {
    if n < 0 {
        return -1;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

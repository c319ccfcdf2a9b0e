//! Compact regular reference surfaces in the 3-torus: quadrature, normal
//! moment audits, lattice-surface sums, and nodal intersection length on a
//! chart.
//!
//! The moment functionals I_k are computed through the multinomial moment
//! expansion (sums of squared normal moments) rather than the double surface
//! integral: O(M) quadrature nodes instead of O(M^2), and exactly rotation
//! invariant as a tensor norm.

use std::f64::consts::PI;
use thiserror::Error;

use crate::curves::Classification;
use crate::field::CoefficientDraw;
use crate::lattice::FrequencySet;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("malformed surface descriptor: {0}")]
    BadSpec(String),
    #[error("n = {0} is not admissible in dimension 3 (n = 0, 4, 7 mod 8)")]
    NotAdmissible(i64),
    #[error("operation requires a static surface")]
    NotStatic,
    #[error("chart resolution {got} too coarse; need at least {needed} cells per side")]
    ChartTooCoarse { got: usize, needed: usize },
    #[error("kmax must be even and at most 8, got {0}")]
    BadKmax(u32),
    #[error("frequency set must be 3-dimensional")]
    WrongDimension,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceSpec {
    Sphere { r: f64, cx: f64, cy: f64, cz: f64 },
    /// Open upper hemisphere (the boundary circle has measure zero for all
    /// the functionals computed here).
    Hemisphere { r: f64, cx: f64, cy: f64, cz: f64 },
    /// Flat square patch z = cz with side `side` centered at (cx, cy).
    FlatPatch { side: f64, cx: f64, cy: f64, cz: f64 },
    /// Octahedrally symmetric quartic surface x^4 + y^4 + z^4 = r^4
    /// (centered), assembled from six symmetric charts.
    Quartic { r: f64, cx: f64, cy: f64, cz: f64 },
}

impl SurfaceSpec {
    pub fn parse(desc: &str) -> Result<Self, SurfaceError> {
        let (kind, rest) = desc
            .split_once(':')
            .ok_or_else(|| SurfaceError::BadSpec(format!("missing ':' in {desc:?}")))?;
        let mut kv = std::collections::BTreeMap::new();
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| SurfaceError::BadSpec(format!("expected key=value in {part:?}")))?;
            let value: f64 = value
                .parse()
                .map_err(|_| SurfaceError::BadSpec(format!("bad number in {part:?}")))?;
            kv.insert(key.to_string(), value);
        }
        let at = |key: &str, default: f64| kv.get(key).copied().unwrap_or(default);
        let r = kv
            .get("r")
            .or(kv.get("side"))
            .copied()
            .ok_or_else(|| SurfaceError::BadSpec(format!("{kind} needs r= or side=")))?;
        let (cx, cy, cz) = (at("cx", 0.5), at("cy", 0.5), at("cz", 0.5));
        match kind {
            "sphere" => Ok(SurfaceSpec::Sphere { r, cx, cy, cz }),
            "hemisphere" => Ok(SurfaceSpec::Hemisphere { r, cx, cy, cz }),
            "patch" => Ok(SurfaceSpec::FlatPatch { side: r, cx, cy, cz }),
            "quartic" => Ok(SurfaceSpec::Quartic { r, cx, cy, cz }),
            other => Err(SurfaceError::BadSpec(format!("unknown surface kind {other:?}"))),
        }
    }

    pub fn id(&self) -> String {
        match self {
            SurfaceSpec::Sphere { r, .. } => format!("sphere_{r}"),
            SurfaceSpec::Hemisphere { r, .. } => format!("hemisphere_{r}"),
            SurfaceSpec::FlatPatch { side, .. } => format!("patch_{side}"),
            SurfaceSpec::Quartic { r, .. } => format!("quartic_{r}"),
        }
    }
}

/// Surface quadrature: points, unit normals, positive weights summing to
/// the area.
#[derive(Debug, Clone)]
pub struct ToralSurface {
    pub spec: SurfaceSpec,
    pub area: f64,
    pub points: Vec<[f64; 3]>,
    pub normals: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

/// Moment audit of a surface.
#[derive(Debug, Clone)]
pub struct SurfaceAudit {
    pub i2: f64,
    pub i4: f64,
    /// (k, I_k) for even k up to the requested maximum.
    pub ik: Vec<(u32, f64)>,
    /// Normalized second moments (1/A) int n_i n_j.
    pub second_moments: [[f64; 3]; 3],
    pub classification: Classification,
}

/// Tolerance for the static / doubly static surface predicates.
pub const SURFACE_STATIC_TOL: f64 = 1e-6;

/// Build a surface with its quadrature. `m_theta` controls resolution;
/// sphere-like surfaces use an m_theta x 2 m_theta latitude-longitude rule
/// with exact band-area weights, patches an m_theta^2 midpoint rule.
pub fn build_surface(spec: &SurfaceSpec, m_theta: usize) -> Result<ToralSurface, SurfaceError> {
    if m_theta < 16 {
        return Err(SurfaceError::ChartTooCoarse {
            got: m_theta,
            needed: 16,
        });
    }
    let mut points = vec![];
    let mut normals = vec![];
    let mut weights = vec![];
    match *spec {
        SurfaceSpec::Sphere { r, cx, cy, cz } | SurfaceSpec::Hemisphere { r, cx, cy, cz } => {
            if !(r > 0.0 && r < 0.5) {
                return Err(SurfaceError::BadSpec(format!("radius {r} not in (0, 1/2)")));
            }
            let hemi = matches!(spec, SurfaceSpec::Hemisphere { .. });
            let m_phi = 2 * m_theta;
            let dphi = 2.0 * PI / m_phi as f64;
            // latitude rule: Gauss-Legendre in t = cos(theta), which makes
            // every polynomial normal moment exact; longitude: uniform grid,
            // exact for trigonometric polynomials
            let (gl_t, gl_w) = gauss_legendre(m_theta);
            for (t, wt) in gl_t.iter().zip(&gl_w) {
                // hemisphere: map [-1, 1] onto [0, 1]
                let (t, wt) = if hemi {
                    ((t + 1.0) / 2.0, wt / 2.0)
                } else {
                    (*t, *wt)
                };
                let sin_theta = (1.0 - t * t).max(0.0).sqrt();
                let w = r * r * dphi * wt;
                for j in 0..m_phi {
                    let phi = dphi * (j as f64 + 0.5);
                    let n = [sin_theta * phi.cos(), sin_theta * phi.sin(), t];
                    points.push([cx + r * n[0], cy + r * n[1], cz + r * n[2]]);
                    normals.push(n);
                    weights.push(w);
                }
            }
        }
        SurfaceSpec::FlatPatch { side, cx, cy, cz } => {
            if !(side > 0.0 && side < 1.0) {
                return Err(SurfaceError::BadSpec(format!("side {side} not in (0, 1)")));
            }
            let h = side / m_theta as f64;
            let w = h * h;
            for i in 0..m_theta {
                for j in 0..m_theta {
                    let x = cx - side / 2.0 + h * (i as f64 + 0.5);
                    let y = cy - side / 2.0 + h * (j as f64 + 0.5);
                    points.push([x, y, cz]);
                    normals.push([0.0, 0.0, 1.0]);
                    weights.push(w);
                }
            }
        }
        SurfaceSpec::Quartic { r, cx, cy, cz } => {
            if !(r > 0.0 && r < 0.5) {
                return Err(SurfaceError::BadSpec(format!("radius {r} not in (0, 1/2)")));
            }
            // six charts: directions (u, v, 1)/|.|_4 permuted onto each face
            let h = 2.0 / m_theta as f64;
            for face in 0..6usize {
                let axis = face / 2;
                let sign = if face % 2 == 0 { 1.0 } else { -1.0 };
                for i in 0..m_theta {
                    for j in 0..m_theta {
                        let u = -1.0 + h * (i as f64 + 0.5);
                        let v = -1.0 + h * (j as f64 + 0.5);
                        let s = (u.powi(4) + v.powi(4) + 1.0).powf(0.25);
                        // chart point before permutation: q = (u, v, 1)/s * r
                        let q = [r * u / s, r * v / s, r / s];
                        // partials of q wrt u and v
                        let s4 = s.powi(4);
                        let du = [
                            r * (1.0 / s - u * u.powi(3) / (s * s4)),
                            r * (-v * u.powi(3) / (s * s4)),
                            r * (-u.powi(3) / (s * s4)),
                        ];
                        let dv = [
                            r * (-u * v.powi(3) / (s * s4)),
                            r * (1.0 / s - v * v.powi(3) / (s * s4)),
                            r * (-v.powi(3) / (s * s4)),
                        ];
                        let cross = [
                            du[1] * dv[2] - du[2] * dv[1],
                            du[2] * dv[0] - du[0] * dv[2],
                            du[0] * dv[1] - du[1] * dv[0],
                        ];
                        let jac = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2])
                            .sqrt();
                        // permute the chart onto the face axis: map local
                        // (x, y, z) so that z goes to +-axis
                        let local = q;
                        let mut p = match axis {
                            0 => [local[2], local[0], local[1]],
                            1 => [local[1], local[2], local[0]],
                            _ => [local[0], local[1], local[2]],
                        };
                        p[axis] *= sign;
                        // normal along grad(x^4+y^4+z^4) = (x^3, y^3, z^3)
                        let g = [p[0].powi(3), p[1].powi(3), p[2].powi(3)];
                        let gn = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
                        points.push([cx + p[0], cy + p[1], cz + p[2]]);
                        normals.push([g[0] / gn, g[1] / gn, g[2] / gn]);
                        weights.push(jac * h * h);
                    }
                }
            }
        }
    }
    let area = weights.iter().sum();
    Ok(ToralSurface {
        spec: spec.clone(),
        area,
        points,
        normals,
        weights,
    })
}

impl ToralSurface {
    /// Normalized normal-moment (1/A) int n1^x n2^y n3^z.
    fn normal_moment(&self, x: u32, y: u32, z: u32) -> f64 {
        let mut acc = 0.0;
        for (n, w) in self.normals.iter().zip(&self.weights) {
            acc += n[0].powi(x as i32) * n[1].powi(y as i32) * n[2].powi(z as i32) * w;
        }
        acc / self.area
    }

    /// Normalized fourth-moment tensor (1/A) int n_i n_j n_k n_l.
    pub fn fourth_moment_tensor(&self) -> [[[[f64; 3]; 3]; 3]; 3] {
        let mut t = [[[[0.0f64; 3]; 3]; 3]; 3];
        for (n, w) in self.normals.iter().zip(&self.weights) {
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        for l in 0..3 {
                            t[i][j][k][l] += n[i] * n[j] * n[k] * n[l] * w;
                        }
                    }
                }
            }
        }
        let inv = 1.0 / self.area;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t[i][j][k][l] *= inv;
                    }
                }
            }
        }
        t
    }

    /// Surface direction integral I(k, k') = (1/A) int <p, n>^k <q, n>^k'.
    pub fn direction_integral(&self, p: [f64; 3], q: [f64; 3], k: u32, k2: u32) -> f64 {
        let mut acc = 0.0;
        for (n, w) in self.normals.iter().zip(&self.weights) {
            let a = p[0] * n[0] + p[1] * n[1] + p[2] * n[2];
            let b = q[0] * n[0] + q[1] * n[1] + q[2] * n[2];
            acc += a.powi(k as i32) * b.powi(k2 as i32) * w;
        }
        acc / self.area
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0f64; m];
    let mut weights = vec![0.0f64; m];
    for i in 0..m.div_ceil(2) {
        // Tricomi initial guess
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_m and P'_m by recurrence
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn multinomial(k: u32, x: u32, y: u32, z: u32) -> f64 {
    fn fact(n: u32) -> f64 {
        (1..=n).map(|v| v as f64).product::<f64>().max(1.0)
    }
    fact(k) / (fact(x) * fact(y) * fact(z))
}

/// I_k by the multinomial moment expansion; normalized so that
/// 1/(k+1) <= I_k <= 1.
pub fn moment_ik(surface: &ToralSurface, k: u32) -> f64 {
    let mut acc = 0.0;
    for x in 0..=k {
        for y in 0..=(k - x) {
            let z = k - x - y;
            let m = surface.normal_moment(x, y, z);
            acc += multinomial(k, x, y, z) * m * m;
        }
    }
    acc
}

/// Full audit up to even order `kmax`.
pub fn audit_surface(surface: &ToralSurface, kmax: u32) -> Result<SurfaceAudit, SurfaceError> {
    if kmax % 2 != 0 || kmax > 8 {
        return Err(SurfaceError::BadKmax(kmax));
    }
    let mut second = [[0.0f64; 3]; 3];
    for (i, row) in second.iter_mut().enumerate() {
        for (j, value) in row.iter_mut().enumerate() {
            let mut pow = [0u32; 3];
            pow[i] += 1;
            pow[j] += 1;
            *value = surface.normal_moment(pow[0], pow[1], pow[2]);
        }
    }
    let mut max_dev: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 / 3.0 } else { 0.0 };
            max_dev = max_dev.max((second[i][j] - target).abs());
        }
    }
    let ik: Vec<(u32, f64)> = (1..=kmax / 2).map(|h| (2 * h, moment_ik(surface, 2 * h))).collect();
    let i2 = ik.first().map(|(_, v)| *v).unwrap_or(1.0);
    let i4 = ik.get(1).map(|(_, v)| *v).unwrap_or(f64::NAN);
    let is_static = max_dev < SURFACE_STATIC_TOL;
    let classification = if is_static && (i4 - 0.2).abs() < SURFACE_STATIC_TOL {
        Classification::DoublyStatic
    } else if is_static {
        Classification::Static
    } else {
        Classification::Generic
    };
    Ok(SurfaceAudit {
        i2,
        i4,
        ik,
        second_moments: second,
        classification,
    })
}

/// The two normalized lattice-surface pair sums of a static surface:
/// (1/N^2) sum I(2,2) and (1/N^2) sum I(2,2) <lhat, lhat'>^2.
#[derive(Debug, Clone, Copy)]
pub struct MixedSums {
    pub mean_i22: f64,
    pub mean_i22_weighted: f64,
}

pub fn mixed_lattice_surface_sums(
    surface: &ToralSurface,
    fs: &FrequencySet,
) -> Result<MixedSums, SurfaceError> {
    if fs.dim != 3 {
        return Err(SurfaceError::WrongDimension);
    }
    if !fs.admissible3d() {
        return Err(SurfaceError::NotAdmissible(fs.n));
    }
    let aud = audit_surface(surface, 4)?;
    if aud.classification == Classification::Generic {
        return Err(SurfaceError::NotStatic);
    }
    let t4 = surface.fourth_moment_tensor();
    let dirs = fs.unit_directions();
    let nn = dirs.len() as f64;
    // lattice moment tensors Q_ij = (1/N) sum lhat_i lhat_j and
    // V_ijpq = (1/N) sum lhat_i lhat_j lhat_p lhat_q
    let mut qm = [[0.0f64; 3]; 3];
    let mut vm = [[[[0.0f64; 3]; 3]; 3]; 3];
    for u in &dirs {
        for i in 0..3 {
            for j in 0..3 {
                qm[i][j] += u[i] * u[j] / nn;
                for p in 0..3 {
                    for q in 0..3 {
                        vm[i][j][p][q] += u[i] * u[j] * u[p] * u[q] / nn;
                    }
                }
            }
        }
    }
    let mut mean_i22 = 0.0;
    let mut mean_i22_weighted = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    mean_i22 += t4[i][j][k][l] * qm[i][j] * qm[k][l];
                    let mut inner = 0.0;
                    for p in 0..3 {
                        for q in 0..3 {
                            inner += vm[i][j][p][q] * vm[k][l][p][q];
                        }
                    }
                    mean_i22_weighted += t4[i][j][k][l] * inner;
                }
            }
        }
    }
    Ok(MixedSums {
        mean_i22,
        mean_i22_weighted,
    })
}

/// Surface I(2,2) table over half-set pairs (row-major), consumed by the 3D
/// intersection chaos.
pub fn surface_direction_table(surface: &ToralSurface, fs: &FrequencySet) -> Vec<f64> {
    let t4 = surface.fourth_moment_tensor();
    let dirs = fs.half_unit_directions_3();
    let m = dirs.len();
    let mut out = vec![0.0; m * m];
    for (a, pa) in dirs.iter().enumerate() {
        for (b, pb) in dirs.iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        for l in 0..3 {
                            acc += t4[i][j][k][l] * pa[i] * pa[j] * pb[k] * pb[l];
                        }
                    }
                }
            }
            out[a * m + b] = acc;
        }
    }
    out
}

/// Nodal intersection length of {T = 0} with the surface, by marching
/// squares on the chart with first-fundamental-form length correction.
pub fn nodal_intersection_length(
    surface: &ToralSurface,
    draw: &CoefficientDraw,
    m_chart: usize,
) -> Result<f64, SurfaceError> {
    let sqrt_n = (draw.fs.n as f64).sqrt();
    match surface.spec {
        SurfaceSpec::Sphere { r, cx, cy, cz } | SurfaceSpec::Hemisphere { r, cx, cy, cz } => {
            let hemi = matches!(surface.spec, SurfaceSpec::Hemisphere { .. });
            let theta_max = if hemi { PI / 2.0 } else { PI };
            // at least 4 chart cells per wavelength 1/sqrt(n) along a great
            // circle of length 2 pi r
            let needed = (4.0 * theta_max * r * sqrt_n).ceil() as usize;
            if m_chart < needed.max(8) {
                return Err(SurfaceError::ChartTooCoarse {
                    got: m_chart,
                    needed: needed.max(8),
                });
            }
            let m_th = m_chart;
            let m_ph = 2 * m_chart;
            let value = |i: usize, j: usize| -> f64 {
                let theta = theta_max * i as f64 / m_th as f64;
                let phi = 2.0 * PI * j as f64 / m_ph as f64;
                let x = [
                    cx + r * theta.sin() * phi.cos(),
                    cy + r * theta.sin() * phi.sin(),
                    cz + r * theta.cos(),
                ];
                draw.evaluate(&x)
            };
            let mut total = 0.0;
            for i in 0..m_th {
                for j in 0..m_ph {
                    let f00 = value(i, j);
                    let f10 = value(i, (j + 1) % m_ph);
                    let f01 = value(i + 1, j);
                    let f11 = value(i + 1, (j + 1) % m_ph);
                    let theta_mid = theta_max * (i as f64 + 0.5) / m_th as f64;
                    // metric: ds^2 = r^2 dtheta^2 + r^2 sin^2 theta dphi^2
                    let e_len = r * theta_max / m_th as f64;
                    let g_len = r * theta_mid.sin() * 2.0 * PI / m_ph as f64;
                    total += cell_segments(f00, f10, f01, f11, g_len, e_len);
                }
            }
            Ok(total)
        }
        SurfaceSpec::FlatPatch { side, cx, cy, cz } => {
            let needed = (4.0 * side * sqrt_n).ceil() as usize;
            if m_chart < needed.max(8) {
                return Err(SurfaceError::ChartTooCoarse {
                    got: m_chart,
                    needed: needed.max(8),
                });
            }
            let h = side / m_chart as f64;
            let value = |i: usize, j: usize| -> f64 {
                let x = [
                    cx - side / 2.0 + h * i as f64,
                    cy - side / 2.0 + h * j as f64,
                    cz,
                ];
                draw.evaluate(&x)
            };
            let mut total = 0.0;
            for i in 0..m_chart {
                for j in 0..m_chart {
                    let f00 = value(i, j);
                    let f10 = value(i + 1, j);
                    let f01 = value(i, j + 1);
                    let f11 = value(i + 1, j + 1);
                    total += cell_segments(f00, f10, f01, f11, h, h);
                }
            }
            Ok(total)
        }
        SurfaceSpec::Quartic { .. } => Err(SurfaceError::BadSpec(
            "nodal intersection length is implemented for sphere, hemisphere, and patch charts"
                .into(),
        )),
    }
}

/// Marching-squares segments within one chart cell, scaled anisotropically:
/// the two chart directions have physical lengths `len_x` (first index of
/// the interpolation coordinate) and `len_y`.
fn cell_segments(f00: f64, f10: f64, f01: f64, f11: f64, len_x: f64, len_y: f64) -> f64 {
    let mut pts: [(f64, f64); 4] = [(0.0, 0.0); 4];
    let mut np = 0;
    if (f00 >= 0.0) != (f10 >= 0.0) {
        pts[np] = (f00 / (f00 - f10), 0.0);
        np += 1;
    }
    if (f10 >= 0.0) != (f11 >= 0.0) {
        pts[np] = (1.0, f10 / (f10 - f11));
        np += 1;
    }
    if (f01 >= 0.0) != (f11 >= 0.0) {
        pts[np] = (f01 / (f01 - f11), 1.0);
        np += 1;
    }
    if (f00 >= 0.0) != (f01 >= 0.0) {
        pts[np] = (0.0, f00 / (f00 - f01));
        np += 1;
    }
    let seg = |p: (f64, f64), q: (f64, f64)| -> f64 {
        let dx = (q.0 - p.0) * len_x;
        let dy = (q.1 - p.1) * len_y;
        (dx * dx + dy * dy).sqrt()
    };
    match np {
        2 => seg(pts[0], pts[1]),
        4 => {
            let center = 0.25 * (f00 + f10 + f01 + f11);
            let (b, r, t, l) = (pts[0], pts[1], pts[2], pts[3]);
            if (center >= 0.0) == (f00 >= 0.0) {
                seg(b, r) + seg(t, l)
            } else {
                seg(b, l) + seg(t, r)
            }
        }
        _ => 0.0,
    }
}

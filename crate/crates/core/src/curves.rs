//! Smooth closed reference curves on the unit 2-torus.
//!
//! Curves are arc-length parameterized with a uniform trapezoid quadrature
//! grid; every audit functional reduces to second/fourth moments of the unit
//! tangent over that grid, which converge spectrally for the analytic specs
//! supported here. Positions and tangents are also evaluable at arbitrary
//! parameter values, which the crossing refinement in `levelset` relies on.
//!
//! Supported descriptors:
//! - `circle:r=0.2[,cx=..,cy=..]` (closed form)
//! - `ellipse:a=0.2,b=0.1[,cx=..,cy=..]` (angle parameterization inverted to
//!   arc length with Newton polish)
//! - `kfold:k=3,r=0.2,eps=0.05` (tangent angle 2 pi s/L + eps sin(2 pi k s/L);
//!   positions are a Fourier antiderivative, so closure is exact)
//! - `custom:r=..[,phase=..][,s<j>=..][,c<j>=..]` (general tangent-angle
//!   Fourier coefficients; a nonzero mean tangent is a closure error)

use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("malformed curve descriptor: {0}")]
    BadSpec(String),
    #[error("curvature vanishes on the curve (min |kappa| = {0:.3e})")]
    CurvatureVanishes(f64),
    #[error("curve does not close (gap {0:.3e})")]
    DoesNotClose(f64),
    #[error("node count must be even and at least 256, got {0}")]
    BadNodeCount(usize),
    #[error("measure weights sum to {0}, expected 1")]
    WeightsNotNormalized(f64),
    #[error("operation requires a static curve (classification: {0:?})")]
    NotStatic(Classification),
    #[error("operation requires a doubly static curve (classification: {0:?})")]
    NotDoublyStatic(Classification),
}

/// Curve shape descriptor. Radii are in torus units; shapes must fit inside
/// a fundamental domain, so circle-like radii stay below 1/2.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSpec {
    Circle {
        r: f64,
        cx: f64,
        cy: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
        cx: f64,
        cy: f64,
    },
    Kfold {
        k: u32,
        r: f64,
        eps: f64,
        cx: f64,
        cy: f64,
    },
    /// Tangent angle phi(s) = 2 pi s / L + phase
    /// + sum_j s_j sin(2 pi j s / L) + c_j cos(2 pi j s / L), with L = 2 pi r.
    Custom {
        r: f64,
        phase: f64,
        sin_coeffs: Vec<(u32, f64)>,
        cos_coeffs: Vec<(u32, f64)>,
        cx: f64,
        cy: f64,
    },
}

impl CurveSpec {
    /// Parse the descriptor grammar, e.g. `circle:r=0.2,cx=0.5,cy=0.5`.
    pub fn parse(desc: &str) -> Result<Self, CurveError> {
        let (kind, rest) = desc
            .split_once(':')
            .ok_or_else(|| CurveError::BadSpec(format!("missing ':' in {desc:?}")))?;
        let mut kv = std::collections::BTreeMap::new();
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| CurveError::BadSpec(format!("expected key=value, got {part:?}")))?;
            let value: f64 = value
                .parse()
                .map_err(|_| CurveError::BadSpec(format!("bad number in {part:?}")))?;
            kv.insert(key.to_string(), value);
        }
        let get = |key: &str| -> Result<f64, CurveError> {
            kv.get(key)
                .copied()
                .ok_or_else(|| CurveError::BadSpec(format!("{kind} needs {key}=")))
        };
        let cx = kv.get("cx").copied().unwrap_or(0.5);
        let cy = kv.get("cy").copied().unwrap_or(0.5);
        match kind {
            "circle" => Ok(CurveSpec::Circle { r: get("r")?, cx, cy }),
            "ellipse" => Ok(CurveSpec::Ellipse {
                a: get("a")?,
                b: get("b")?,
                cx,
                cy,
            }),
            "kfold" => Ok(CurveSpec::Kfold {
                k: get("k")? as u32,
                r: get("r")?,
                eps: kv.get("eps").copied().unwrap_or(0.05),
                cx,
                cy,
            }),
            "custom" => {
                let mut sin_coeffs = vec![];
                let mut cos_coeffs = vec![];
                for (key, value) in &kv {
                    if let Some(j) = key.strip_prefix('s').and_then(|t| t.parse::<u32>().ok()) {
                        sin_coeffs.push((j, *value));
                    } else if let Some(j) = key.strip_prefix('c').and_then(|t| t.parse::<u32>().ok())
                    {
                        if key != "cx" && key != "cy" {
                            cos_coeffs.push((j, *value));
                        }
                    }
                }
                Ok(CurveSpec::Custom {
                    r: get("r")?,
                    phase: kv.get("phase").copied().unwrap_or(0.0),
                    sin_coeffs,
                    cos_coeffs,
                    cx,
                    cy,
                })
            }
            other => Err(CurveError::BadSpec(format!("unknown curve kind {other:?}"))),
        }
    }

    /// Short identifier used in CSV column names.
    pub fn id(&self) -> String {
        fn num(x: f64) -> String {
            format!("{x}").replace('.', "p").replace('-', "m")
        }
        match self {
            CurveSpec::Circle { r, .. } => format!("circle_{}", num(*r)),
            CurveSpec::Ellipse { a, b, .. } => format!("ellipse_{}_{}", num(*a), num(*b)),
            CurveSpec::Kfold { k, r, eps, .. } => {
                format!("kfold{k}_{}_{}", num(*r), num(*eps))
            }
            CurveSpec::Custom { .. } => "custom".to_string(),
        }
    }
}

/// One quadrature node: parameter, torus position, unit tangent.
#[derive(Debug, Clone, Copy)]
pub struct CurveNode {
    pub t: f64,
    pub pos: [f64; 2],
    pub tangent: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Generic,
    Static,
    DoublyStatic,
}

/// Functional audit of a curve: tangent moments and derived quantities.
#[derive(Debug, Clone, Copy)]
pub struct CurveAudit {
    /// (1/L) int gdot1^2 gdot2^2.
    pub a: f64,
    /// (1/L) int gdot1^3 gdot2.
    pub b: f64,
    /// (1/L^2) iint <gdot(t), gdot(u)>^2.
    pub i2: f64,
    /// Same with the swapped-component pairing <gdot(t), (gdot2, gdot1)(u)>.
    pub i2_perp: f64,
    /// (1/L^2) iint <gdot(t), gdot(u)>^4.
    pub i4: f64,
    /// (1/L) int (gdot1^4 + gdot2^4 - 6 gdot1^2 gdot2^2) = 1 - 8A.
    pub i4_prime: f64,
    /// B functional at the uniform direction measure.
    pub b_uniform: f64,
    /// A functional at the uniform direction measure.
    pub a_uniform: f64,
    pub classification: Classification,
}

/// Relative tolerance for the static / doubly static predicates.
pub const STATIC_TOL: f64 = 1e-8;

/// Arc-length parameterized closed toral curve with quadrature nodes.
#[derive(Debug, Clone)]
pub struct ToralCurve {
    pub spec: CurveSpec,
    pub length: f64,
    pub nodes: Vec<CurveNode>,
    pub min_curvature: f64,
    eval: Eval,
}

#[derive(Debug, Clone)]
enum Eval {
    Circle {
        r: f64,
        cx: f64,
        cy: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
        cx: f64,
        cy: f64,
        /// theta at each of the uniform arc-length nodes (monotone).
        theta_at_node: Vec<f64>,
    },
    /// Tangent angle (2 pi / L) s + phase + harmonics; positions are the
    /// term-wise antiderivative of (cos phi, sin phi).
    Angle {
        phase: f64,
        /// (j, sin amplitude, cos amplitude) of the tangent angle.
        harmonics: Vec<(f64, f64, f64)>,
        /// (omega, sin amp, cos amp): gamma_i(s) = center_i + sum of terms.
        pos1: Vec<(f64, f64, f64)>,
        pos2: Vec<(f64, f64, f64)>,
        cx: f64,
        cy: f64,
    },
}

fn wrap(x: f64) -> f64 {
    x.rem_euclid(1.0)
}

fn eval_position(eval: &Eval, length: f64, t: f64) -> [f64; 2] {
    match eval {
        Eval::Circle { r, cx, cy } => {
            let th = t / r;
            [wrap(cx + r * th.cos()), wrap(cy + r * th.sin())]
        }
        Eval::Ellipse {
            a,
            b,
            cx,
            cy,
            theta_at_node,
        } => {
            let th = ellipse_theta(*a, *b, theta_at_node, length, t);
            [wrap(cx + a * th.cos()), wrap(cy + b * th.sin())]
        }
        Eval::Angle {
            pos1, pos2, cx, cy, ..
        } => {
            let sum = |series: &[(f64, f64, f64)]| -> f64 {
                series
                    .iter()
                    .map(|&(w, cs, cc)| cs * (w * t).sin() + cc * (w * t).cos())
                    .sum()
            };
            [wrap(cx + sum(pos1)), wrap(cy + sum(pos2))]
        }
    }
}

fn eval_tangent(eval: &Eval, length: f64, t: f64) -> [f64; 2] {
    match eval {
        Eval::Circle { r, .. } => {
            let th = t / r;
            [-th.sin(), th.cos()]
        }
        Eval::Ellipse {
            a,
            b,
            theta_at_node,
            ..
        } => {
            let th = ellipse_theta(*a, *b, theta_at_node, length, t);
            let (dx, dy) = (-a * th.sin(), b * th.cos());
            let v = (dx * dx + dy * dy).sqrt();
            [dx / v, dy / v]
        }
        Eval::Angle {
            phase, harmonics, ..
        } => {
            let theta = 2.0 * PI * t / length;
            let mut phi = theta + phase;
            for &(j, cs, cc) in harmonics {
                phi += cs * (j * theta).sin() + cc * (j * theta).cos();
            }
            [phi.cos(), phi.sin()]
        }
    }
}

impl ToralCurve {
    /// Torus position at arbitrary parameter t.
    pub fn position(&self, t: f64) -> [f64; 2] {
        eval_position(&self.eval, self.length, t)
    }

    /// Unit tangent at arbitrary parameter t.
    pub fn tangent(&self, t: f64) -> [f64; 2] {
        eval_tangent(&self.eval, self.length, t)
    }

    /// Tangent fourth moments m_i = (1/L) int gdot1^(4-i) gdot2^i (i = 0..4)
    /// and second moments (c1, c2, d) over the quadrature grid.
    pub fn tangent_moments(&self) -> ([f64; 5], [f64; 3]) {
        let k = self.nodes.len() as f64;
        let mut m4 = [0.0f64; 5];
        let mut m2 = [0.0f64; 3];
        for node in &self.nodes {
            let [t1, t2] = node.tangent;
            let (s1, s2) = (t1 * t1, t2 * t2);
            m2[0] += s1;
            m2[1] += s2;
            m2[2] += t1 * t2;
            m4[0] += s1 * s1;
            m4[1] += s1 * t1 * t2;
            m4[2] += s1 * s2;
            m4[3] += t1 * t2 * s2;
            m4[4] += s2 * s2;
        }
        for v in m4.iter_mut() {
            *v /= k;
        }
        for v in m2.iter_mut() {
            *v /= k;
        }
        (m4, m2)
    }
}

/// Build a curve with `k_nodes` uniform arc-length quadrature nodes.
pub fn build_curve(spec: &CurveSpec, k_nodes: usize) -> Result<ToralCurve, CurveError> {
    if k_nodes < 256 || k_nodes % 2 != 0 {
        return Err(CurveError::BadNodeCount(k_nodes));
    }
    match *spec {
        CurveSpec::Circle { r, cx, cy } => {
            if !(r > 0.0 && r < 0.5) {
                return Err(CurveError::BadSpec(format!(
                    "circle radius {r} not in (0, 1/2)"
                )));
            }
            let length = 2.0 * PI * r;
            let eval = Eval::Circle { r, cx, cy };
            Ok(assemble(spec, length, 1.0 / r, eval, k_nodes))
        }
        CurveSpec::Ellipse { a, b, cx, cy } => {
            if !(a > 0.0 && b > 0.0 && a < 0.5 && b < 0.5) {
                return Err(CurveError::BadSpec(format!(
                    "ellipse axes ({a},{b}) out of range"
                )));
            }
            let (length, theta_at_node) = invert_ellipse_arclength(a, b, k_nodes);
            let eval = Eval::Ellipse {
                a,
                b,
                cx,
                cy,
                theta_at_node,
            };
            let min_curvature = a * b / a.max(b).powi(3);
            Ok(assemble(spec, length, min_curvature, eval, k_nodes))
        }
        CurveSpec::Kfold { k, r, eps, cx, cy } => {
            if k < 2 {
                return Err(CurveError::BadSpec(format!("kfold needs k >= 2, got {k}")));
            }
            build_angle_curve(spec, 2.0 * PI * r, 0.0, &[(k as f64, eps, 0.0)], cx, cy, k_nodes)
        }
        CurveSpec::Custom {
            r,
            phase,
            ref sin_coeffs,
            ref cos_coeffs,
            cx,
            cy,
        } => {
            let mut harmonics: Vec<(f64, f64, f64)> = vec![];
            for &(j, amp) in sin_coeffs {
                harmonics.push((j as f64, amp, 0.0));
            }
            for &(j, amp) in cos_coeffs {
                match harmonics.iter_mut().find(|h| h.0 == j as f64) {
                    Some(h) => h.2 = amp,
                    None => harmonics.push((j as f64, 0.0, amp)),
                }
            }
            build_angle_curve(spec, 2.0 * PI * r, phase, &harmonics, cx, cy, k_nodes)
        }
    }
}

fn assemble(
    spec: &CurveSpec,
    length: f64,
    min_curvature: f64,
    eval: Eval,
    k_nodes: usize,
) -> ToralCurve {
    let nodes = (0..k_nodes)
        .map(|j| {
            let t = length * j as f64 / k_nodes as f64;
            CurveNode {
                t,
                pos: eval_position(&eval, length, t),
                tangent: eval_tangent(&eval, length, t),
            }
        })
        .collect();
    ToralCurve {
        spec: spec.clone(),
        length,
        nodes,
        min_curvature,
        eval,
    }
}

/// Build a tangent-angle curve. The position series is the exact Fourier
/// antiderivative of the unit tangent; a nonzero mean tangent means the
/// curve cannot close and is reported as an error.
fn build_angle_curve(
    spec: &CurveSpec,
    length: f64,
    phase: f64,
    harmonics: &[(f64, f64, f64)],
    cx: f64,
    cy: f64,
    k_nodes: usize,
) -> Result<ToralCurve, CurveError> {
    let max_j = harmonics.iter().map(|h| h.0).fold(1.0, f64::max);
    // sample the curvature phi'(s) = (2 pi/L)(1 + sum j (cs cos - cc sin))
    let mut min_curv = f64::INFINITY;
    let probe = 4096;
    for i in 0..probe {
        let th = 2.0 * PI * i as f64 / probe as f64;
        let mut swing = 0.0;
        for &(j, cs, cc) in harmonics {
            swing += j * (cs * (j * th).cos() - cc * (j * th).sin());
        }
        min_curv = min_curv.min((2.0 * PI / length) * (1.0 + swing).abs());
        if 1.0 + swing <= 0.0 {
            min_curv = 0.0;
        }
    }
    if min_curv <= 1e-6 {
        return Err(CurveError::CurvatureVanishes(min_curv));
    }

    let phi = |th: f64| {
        let mut p = th + phase;
        for &(j, cs, cc) in harmonics {
            p += cs * (j * th).sin() + cc * (j * th).cos();
        }
        p
    };
    // DFT of the unit tangent over a fine grid; the tangent is analytic and
    // periodic, so coefficients decay superexponentially.
    let q = (4 * k_nodes).max(1 << 14);
    let jmax = ((24.0 * max_j) as i64).clamp(64, 512);
    let mut pos1: Vec<(f64, f64, f64)> = vec![];
    let mut pos2: Vec<(f64, f64, f64)> = vec![];
    let tangents: Vec<(f64, f64)> = (0..q)
        .map(|i| {
            let p = phi(2.0 * PI * i as f64 / q as f64);
            (p.cos(), p.sin())
        })
        .collect();
    let mut close_gap = 0.0f64;
    for freq in 0..=jmax {
        let (mut c1re, mut c1im, mut c2re, mut c2im) = (0.0, 0.0, 0.0, 0.0);
        for (i, &(t1, t2)) in tangents.iter().enumerate() {
            let ang = 2.0 * PI * freq as f64 * i as f64 / q as f64;
            let (er, ei) = (ang.cos(), -ang.sin());
            c1re += t1 * er;
            c1im += t1 * ei;
            c2re += t2 * er;
            c2im += t2 * ei;
        }
        let qf = q as f64;
        c1re /= qf;
        c1im /= qf;
        c2re /= qf;
        c2im /= qf;
        if freq == 0 {
            close_gap = (c1re * c1re + c2re * c2re).sqrt() * length;
            continue;
        }
        // f(s) = sum_f c_f e^{i w s} with c_{-f} = conj(c_f); the freq and
        // -freq pair integrates to (2/w)(Re c sin(ws) + Im c cos(ws)).
        let w = 2.0 * PI * freq as f64 / length;
        if (c1re * c1re + c1im * c1im + c2re * c2re + c2im * c2im).sqrt() > 1e-17 {
            pos1.push((w, 2.0 * c1re / w, 2.0 * c1im / w));
            pos2.push((w, 2.0 * c2re / w, 2.0 * c2im / w));
        }
    }
    if close_gap > 1e-10 {
        return Err(CurveError::DoesNotClose(close_gap));
    }
    let eval = Eval::Angle {
        phase,
        harmonics: harmonics.to_vec(),
        pos1,
        pos2,
        cx,
        cy,
    };
    Ok(assemble(spec, length, min_curv, eval, k_nodes))
}

fn ellipse_theta(a: f64, b: f64, table: &[f64], length: f64, t: f64) -> f64 {
    let k = table.len();
    let h = length / k as f64;
    let t = t.rem_euclid(length);
    let idx = ((t / h) as usize).min(k - 1);
    let frac = t / h - idx as f64;
    let next = if idx + 1 < k {
        table[idx + 1]
    } else {
        table[0] + 2.0 * PI
    };
    let mut th = table[idx] * (1.0 - frac) + next * frac;
    let speed = |th: f64| ((a * th.sin()).powi(2) + (b * th.cos()).powi(2)).sqrt();
    for _ in 0..8 {
        let err = gauss_arc(a, b, table[idx], th) + idx as f64 * h - t;
        let step = err / speed(th);
        th -= step;
        if step.abs() < 1e-15 * (1.0 + th.abs()) {
            break;
        }
    }
    th
}

const GL_X: [f64; 4] = [
    0.18343464249564980,
    0.52553240991632899,
    0.79666647741362674,
    0.96028985649753623,
];
const GL_W: [f64; 4] = [
    0.36268378337836198,
    0.31370664587788729,
    0.22238103445337447,
    0.10122853629037626,
];

/// Arc length of the (a, b) ellipse between angles th0 and th1 (short span).
fn gauss_arc(a: f64, b: f64, th0: f64, th1: f64) -> f64 {
    let speed = |th: f64| ((a * th.sin()).powi(2) + (b * th.cos()).powi(2)).sqrt();
    let c = 0.5 * (th0 + th1);
    let hspan = 0.5 * (th1 - th0);
    let mut acc = 0.0;
    for i in 0..4 {
        acc += GL_W[i] * (speed(c + hspan * GL_X[i]) + speed(c - hspan * GL_X[i]));
    }
    acc * hspan
}

/// Invert the ellipse arc length: (total length, theta at each of the k
/// uniform arc-length nodes).
fn invert_ellipse_arclength(a: f64, b: f64, k: usize) -> (f64, Vec<f64>) {
    let p = 1 << 14;
    let dh = 2.0 * PI / p as f64;
    let mut prefix = vec![0.0f64; p + 1];
    for i in 0..p {
        prefix[i + 1] = prefix[i] + gauss_arc(a, b, i as f64 * dh, (i + 1) as f64 * dh);
    }
    let total = prefix[p];
    let speed = |th: f64| ((a * th.sin()).powi(2) + (b * th.cos()).powi(2)).sqrt();
    let mut thetas = Vec::with_capacity(k);
    let mut lo = 0usize;
    for j in 0..k {
        let target = total * j as f64 / k as f64;
        while lo + 1 < p && prefix[lo + 1] < target {
            lo += 1;
        }
        let mut th = (lo as f64 + 0.5) * dh;
        for _ in 0..6 {
            let err = prefix[lo] + gauss_arc(a, b, lo as f64 * dh, th) - target;
            th -= err / speed(th);
        }
        thetas.push(th);
    }
    (total, thetas)
}

/// Full functional audit of a curve.
pub fn audit(curve: &ToralCurve) -> CurveAudit {
    let (m4, m2) = curve.tangent_moments();
    let (c1, c2, d) = (m2[0], m2[1], m2[2]);
    let a = m4[2];
    let b = m4[1];
    let i2 = c1 * c1 + c2 * c2 + 2.0 * d * d;
    let i2_perp = 2.0 * c1 * c2 + 2.0 * d * d;
    let binom = [1.0, 4.0, 6.0, 4.0, 1.0];
    let i4: f64 = (0..5).map(|i| binom[i] * m4[i] * m4[i]).sum();
    let i4_prime = m4[0] + m4[4] - 6.0 * m4[2];
    let l = curve.length;
    let b_uniform = l * l * (1.0 + 2.0 * i2) / 8.0;
    // the uniform-measure integrand is a trig polynomial of degree 4 in each
    // angle, so 64 equispaced directions integrate it exactly
    let a_uniform = a_functional_uniform(&m4, l, 64);
    let is_static = (c1 - 0.5).abs() + d.abs() < STATIC_TOL;
    let classification = if is_static && (i4 - 0.375).abs() < STATIC_TOL {
        Classification::DoublyStatic
    } else if is_static {
        Classification::Static
    } else {
        Classification::Generic
    };
    CurveAudit {
        a,
        b,
        i2,
        i2_perp,
        i4,
        i4_prime,
        b_uniform,
        a_uniform,
        classification,
    }
}

/// Direction integral (1/L) int <lam, gdot>^k <lam2, gdot>^k2 dt over the
/// quadrature nodes, for unit vectors and powers up to 4.
pub fn direction_integral(
    curve: &ToralCurve,
    lam: [f64; 2],
    lam2: [f64; 2],
    k: u32,
    k2: u32,
) -> f64 {
    assert!(k <= 4 && k2 <= 4, "direction powers up to 4 are supported");
    let kn = curve.nodes.len() as f64;
    let mut acc = 0.0;
    for node in &curve.nodes {
        let [t1, t2] = node.tangent;
        let p = lam[0] * t1 + lam[1] * t2;
        let q = lam2[0] * t1 + lam2[1] * t2;
        acc += p.powi(k as i32) * q.powi(k2 as i32);
    }
    acc / kn
}

/// Discrete probability measure on the unit circle: (direction, weight).
pub type DirectionMeasure = Vec<([f64; 2], f64)>;

/// Uniform discrete measure with `d` equispaced directions.
pub fn uniform_measure(d: usize) -> DirectionMeasure {
    (0..d)
        .map(|i| {
            let th = 2.0 * PI * i as f64 / d as f64;
            ([th.cos(), th.sin()], 1.0 / d as f64)
        })
        .collect()
}

/// Spectral measure of a dim-2 frequency set: unit directions, weight 1/N.
pub fn spectral_measure(fs: &crate::lattice::FrequencySet) -> DirectionMeasure {
    let w = 1.0 / fs.len() as f64;
    fs.unit_directions()
        .iter()
        .map(|u| ([u[0], u[1]], w))
        .collect()
}

fn check_weights(measure: &DirectionMeasure) -> Result<(), CurveError> {
    let total: f64 = measure.iter().map(|(_, w)| w).sum();
    if (total - 1.0).abs() > 1e-9 || measure.iter().any(|(_, w)| *w < 0.0) {
        return Err(CurveError::WeightsNotNormalized(total));
    }
    Ok(())
}

/// B functional: sum over directions of w (int_0^L <theta, gdot>^2 dt)^2.
pub fn b_functional(curve: &ToralCurve, measure: &DirectionMeasure) -> Result<f64, CurveError> {
    check_weights(measure)?;
    let (_, m2) = curve.tangent_moments();
    let l = curve.length;
    Ok(measure
        .iter()
        .map(|(th, w)| {
            let inner =
                l * (th[0] * th[0] * m2[0] + th[1] * th[1] * m2[1] + 2.0 * th[0] * th[1] * m2[2]);
            w * inner * inner
        })
        .sum())
}

/// A functional: double sum over directions of w w' times the squared inner
/// integral of <theta, gdot>^2 <theta', gdot>^2.
pub fn a_functional(curve: &ToralCurve, measure: &DirectionMeasure) -> Result<f64, CurveError> {
    check_weights(measure)?;
    let (m4, _) = curve.tangent_moments();
    let l = curve.length;
    let mut acc = 0.0;
    for (th, w) in measure {
        for (ph, v) in measure {
            let inner = l * quartic_pair_moment(&m4, *th, *ph);
            acc += w * v * inner * inner;
        }
    }
    Ok(acc)
}

/// (1/L) int <p, gdot>^2 <q, gdot>^2 dt from the tangent moment vector.
fn quartic_pair_moment(m4: &[f64; 5], p: [f64; 2], q: [f64; 2]) -> f64 {
    let pc = [p[0] * p[0], 2.0 * p[0] * p[1], p[1] * p[1]];
    let qc = [q[0] * q[0], 2.0 * q[0] * q[1], q[1] * q[1]];
    let mut quart = [0.0f64; 5]; // coefficient of gdot1^(4-i) gdot2^i
    for (i, pi) in pc.iter().enumerate() {
        for (j, qj) in qc.iter().enumerate() {
            quart[i + j] += pi * qj;
        }
    }
    (0..5).map(|i| quart[i] * m4[i]).sum()
}

fn a_functional_uniform(m4: &[f64; 5], l: f64, d: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..d {
        let thi = 2.0 * PI * i as f64 / d as f64;
        let p = [thi.cos(), thi.sin()];
        for j in 0..d {
            let thj = 2.0 * PI * j as f64 / d as f64;
            let q = [thj.cos(), thj.sin()];
            let inner = l * quartic_pair_moment(m4, p, q);
            acc += inner * inner;
        }
    }
    acc / (d * d) as f64
}

/// Precomputed direction-integral table over a frequency half-set, reused by
/// every chaos projection against this curve.
#[derive(Debug, Clone)]
pub struct DirectionTable {
    /// Half-set size m = N/2.
    pub m: usize,
    /// I(2,2) over half-set pairs, row-major m x m.
    pub i22: Vec<f64>,
    /// I(2,0) per half-set point.
    pub i20: Vec<f64>,
    /// I(4,0) per half-set point.
    pub i40: Vec<f64>,
    /// <lhat, lhat'>^2 over half-set pairs, row-major.
    pub dot2: Vec<f64>,
    /// (1/N) sum over the full set of (4 I_{l,l}(4,0) - 1).
    pub mean_4i40_minus_1: f64,
}

/// Build the direction-integral table for a curve and a dim-2 frequency set.
pub fn direction_table(curve: &ToralCurve, fs: &crate::lattice::FrequencySet) -> DirectionTable {
    let (m4, m2) = curve.tangent_moments();
    let dirs = fs.half_unit_directions();
    let m = dirs.len();
    let mut i22 = vec![0.0; m * m];
    let mut dot2 = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            i22[i * m + j] = quartic_pair_moment(&m4, dirs[i], dirs[j]);
            let dp = dirs[i][0] * dirs[j][0] + dirs[i][1] * dirs[j][1];
            dot2[i * m + j] = dp * dp;
        }
    }
    let i20: Vec<f64> = dirs
        .iter()
        .map(|p| p[0] * p[0] * m2[0] + p[1] * p[1] * m2[1] + 2.0 * p[0] * p[1] * m2[2])
        .collect();
    let i40: Vec<f64> = dirs.iter().map(|p| quartic_pair_moment(&m4, *p, *p)).collect();
    // I_{l,l}(4,0) is invariant under l -> -l, so the full-set mean equals
    // the half-set mean.
    let mean_4i40_minus_1 = i40.iter().map(|v| 4.0 * v - 1.0).sum::<f64>() / m as f64;
    DirectionTable {
        m,
        i22,
        i20,
        i40,
        dot2,
        mean_4i40_minus_1,
    }
}

/// Integer-order Bessel J for the small arguments used in tests and by the
/// tangent-angle analysis.
pub fn bessel_j(order: i32, x: f64) -> f64 {
    let m = order.unsigned_abs();
    let sign = if order < 0 && m % 2 == 1 { -1.0 } else { 1.0 };
    let half = x / 2.0;
    let mut term = half.powi(m as i32) / factorial(m);
    let mut acc = term;
    for t in 1..60 {
        term *= -half * half / (t as f64 * (t as f64 + m as f64));
        acc += term;
        if term.abs() < 1e-300 {
            break;
        }
    }
    sign * acc
}

fn factorial(m: u32) -> f64 {
    (1..=m).map(|v| v as f64).product::<f64>().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(r: f64) -> ToralCurve {
        build_curve(&CurveSpec::Circle { r, cx: 0.5, cy: 0.5 }, 1024).unwrap()
    }

    #[test]
    fn circle_audit_exact() {
        let c = circle(0.2);
        assert!((c.length - 2.0 * PI * 0.2).abs() < 1e-12);
        for node in &c.nodes {
            let t = node.tangent;
            assert!(((t[0] * t[0] + t[1] * t[1]).sqrt() - 1.0).abs() < 1e-12);
        }
        let a = audit(&c);
        assert!((a.a - 0.125).abs() < 1e-9);
        assert!(a.b.abs() < 1e-9);
        assert!((a.i4 - 0.375).abs() < 1e-9);
        assert!(a.i4_prime.abs() < 1e-9);
        assert_eq!(a.classification, Classification::DoublyStatic);
        assert!((a.i2 - 0.5).abs() < 1e-9);
        assert!((a.i2_perp - 0.5).abs() < 1e-9);
        assert!((4.0 * a.b_uniform - c.length * c.length).abs() < 1e-8 * c.length * c.length);
    }

    #[test]
    fn ellipse_matches_angle_quadrature_oracle() {
        let e = build_curve(
            &CurveSpec::Ellipse { a: 0.2, b: 0.1, cx: 0.5, cy: 0.5 },
            1024,
        )
        .unwrap();
        let (l, c1, d, a_m, b_m, i4) = arw_testkit::oracle_ellipse_functionals(0.2, 0.1, 1 << 15);
        assert!((e.length - l).abs() < 1e-9, "length {} vs {}", e.length, l);
        let a = audit(&e);
        assert!((a.a - a_m).abs() < 1e-9);
        assert!((a.b - b_m).abs() < 1e-9);
        assert!((a.i4 - i4).abs() < 1e-9);
        assert_eq!(a.classification, Classification::Generic);
        assert!((c1 - 0.5).abs() > 1e-3);
        assert!(d.abs() < 1e-12);
        assert!(4.0 * a.b_uniform - l * l > 1e-3 * l * l);
        for node in &e.nodes {
            let t = node.tangent;
            assert!(((t[0] * t[0] + t[1] * t[1]).sqrt() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn kfold_classifications() {
        for (k, expect) in [
            (3u32, Classification::DoublyStatic),
            (4, Classification::Static),
            (5, Classification::DoublyStatic),
            (6, Classification::DoublyStatic),
        ] {
            let c = build_curve(
                &CurveSpec::Kfold { k, r: 0.2, eps: 0.05, cx: 0.5, cy: 0.5 },
                1024,
            )
            .unwrap();
            let a = audit(&c);
            assert_eq!(a.classification, expect, "k = {k}");
            let rhs = 0.5 + 8.0 * a.a * a.a - 2.0 * a.a + 8.0 * a.b * a.b;
            assert!((a.i4 - rhs).abs() < 1e-9, "k = {k}: I4 {} vs {}", a.i4, rhs);
            assert!((a.i4_prime - (1.0 - 8.0 * a.a)).abs() < 1e-9);
            assert!(a.a > 0.0 && a.a < 0.25);
            assert!(a.b * a.b < a.a * (1.0 - 4.0 * a.a) / 4.0 + 1e-12);
            assert!(a.i4 >= 0.375 - 1e-12 && a.i4 < 0.5);
            assert!(a.i4_prime > -1.0 && a.i4_prime < 1.0);
            assert!((a.i2 - 0.5).abs() < 1e-8 && (a.i2_perp - 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn kfold4_static_with_known_i4_prime() {
        let c = build_curve(
            &CurveSpec::Kfold { k: 4, r: 0.2, eps: 0.05, cx: 0.5, cy: 0.5 },
            2048,
        )
        .unwrap();
        let a = audit(&c);
        // I4' = -J1(4 eps) for the plain 4-fold tangent angle
        let j1 = bessel_j(1, 0.2);
        assert!((a.i4_prime + j1).abs() < 1e-9, "I4' {} vs {}", a.i4_prime, -j1);
        assert!((a.i4 - 0.375).abs() > 1e-5);
    }

    #[test]
    fn quadrature_doubling_is_stable() {
        for spec in [
            CurveSpec::Circle { r: 0.2, cx: 0.5, cy: 0.5 },
            CurveSpec::Ellipse { a: 0.2, b: 0.1, cx: 0.5, cy: 0.5 },
            CurveSpec::Kfold { k: 3, r: 0.2, eps: 0.05, cx: 0.5, cy: 0.5 },
        ] {
            let a1 = audit(&build_curve(&spec, 2048).unwrap());
            let a2 = audit(&build_curve(&spec, 4096).unwrap());
            for (x, y) in [
                (a1.a, a2.a),
                (a1.b, a2.b),
                (a1.i2, a2.i2),
                (a1.i4, a2.i4),
                (a1.i4_prime, a2.i4_prime),
            ] {
                assert!((x - y).abs() < 1e-10, "{spec:?}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn tilted_four_fold_has_nonzero_b() {
        // 4-fold tangent angle with a phase: static, B != 0.
        let beta = 0.3;
        let tilted = build_curve(
            &CurveSpec::Custom {
                r: 0.2,
                phase: beta,
                sin_coeffs: vec![(4, 0.05)],
                cos_coeffs: vec![],
                cx: 0.5,
                cy: 0.5,
            },
            2048,
        )
        .unwrap();
        let a = audit(&tilted);
        assert_eq!(a.classification, Classification::Static);
        let expected_b = -bessel_j(1, 0.2) * (4.0 * beta).sin() / 8.0;
        assert!((a.b - expected_b).abs() < 1e-9, "B {} vs {}", a.b, expected_b);

        // rotating the spec by pi/2 keeps A, B, I2, I4 and the classification
        // for a static curve (m13 = -m31 there)
        let rotated = build_curve(
            &CurveSpec::Custom {
                r: 0.2,
                phase: beta + PI / 2.0,
                sin_coeffs: vec![(4, 0.05)],
                cos_coeffs: vec![],
                cx: 0.5,
                cy: 0.5,
            },
            2048,
        )
        .unwrap();
        let ar = audit(&rotated);
        assert!((ar.a - a.a).abs() < 1e-10);
        assert!((ar.b - a.b).abs() < 1e-9);
        assert!((ar.i4 - a.i4).abs() < 1e-10);
        assert!((ar.i2 - a.i2).abs() < 1e-10);
        assert_eq!(ar.classification, Classification::Static);

        // reflecting across the x1-axis and re-orienting forward turns the
        // tangent angle phi(s) into -phi(L-s) + pi; for this spec that is
        // phase -> -phase - pi with the same harmonic. It maps (A, B) to
        // (A, -B).
        let reflected = build_curve(
            &CurveSpec::Custom {
                r: 0.2,
                phase: -beta - PI,
                sin_coeffs: vec![(4, 0.05)],
                cos_coeffs: vec![],
                cx: 0.5,
                cy: 0.5,
            },
            2048,
        )
        .unwrap();
        let af = audit(&reflected);
        assert!((af.a - a.a).abs() < 1e-10);
        assert!((af.b + a.b).abs() < 1e-9, "B {} vs {}", af.b, a.b);
        assert!((af.i4 - a.i4).abs() < 1e-10);
    }

    #[test]
    fn direction_integrals_on_static_curves() {
        let c = circle(0.2);
        let e1 = [1.0, 0.0];
        let diag = [0.5f64.sqrt(), 0.5f64.sqrt()];
        assert!((direction_integral(&c, e1, e1, 2, 0) - 0.5).abs() < 1e-10);
        assert!((direction_integral(&c, diag, diag, 2, 0) - 0.5).abs() < 1e-10);
        assert!((direction_integral(&c, e1, e1, 4, 0) - 0.375).abs() < 1e-10);
        assert!((direction_integral(&c, e1, e1, 2, 2) - 0.375).abs() < 1e-10);
        // doubly static: I(2,2) = (1 + 2 <p,q>^2)/8
        let q = [0.6, 0.8];
        let dot: f64 = e1[0] * q[0] + e1[1] * q[1];
        assert!(
            (direction_integral(&c, e1, q, 2, 2) - (1.0 + 2.0 * dot * dot) / 8.0).abs() < 1e-10
        );
    }

    #[test]
    fn direction_table_matches_direct_integrals() {
        let c = build_curve(
            &CurveSpec::Ellipse { a: 0.2, b: 0.1, cx: 0.5, cy: 0.5 },
            1024,
        )
        .unwrap();
        let fs = crate::lattice::enumerate(5, 2).unwrap();
        let table = direction_table(&c, &fs);
        let dirs = fs.half_unit_directions();
        for (i, p) in dirs.iter().enumerate() {
            assert!((table.i20[i] - direction_integral(&c, *p, *p, 2, 0)).abs() < 1e-12);
            assert!((table.i40[i] - direction_integral(&c, *p, *p, 4, 0)).abs() < 1e-12);
            for (j, qd) in dirs.iter().enumerate() {
                assert!(
                    (table.i22[i * table.m + j] - direction_integral(&c, *p, *qd, 2, 2)).abs()
                        < 1e-12
                );
            }
        }
    }

    #[test]
    fn b_functional_measures() {
        let c = circle(0.2);
        let l2 = c.length * c.length;
        let uni = uniform_measure(4096);
        let b = b_functional(&c, &uni).unwrap();
        assert!((4.0 * b - l2).abs() < 1e-8 * l2);
        let fs = crate::lattice::enumerate(5, 2).unwrap();
        let mu = spectral_measure(&fs);
        let b5 = b_functional(&c, &mu).unwrap();
        assert!((4.0 * b5 - l2).abs() < 1e-8 * l2);
        let e = build_curve(
            &CurveSpec::Ellipse { a: 0.2, b: 0.1, cx: 0.5, cy: 0.5 },
            1024,
        )
        .unwrap();
        let be = b_functional(&e, &uni).unwrap();
        assert!(4.0 * be - e.length * e.length > 1e-3 * e.length * e.length);
        let bad = vec![([1.0, 0.0], 0.7)];
        assert!(matches!(
            b_functional(&c, &bad),
            Err(CurveError::WeightsNotNormalized(_))
        ));
    }

    #[test]
    fn a_functional_routes_agree() {
        let c = circle(0.2);
        let uni = uniform_measure(512);
        let a_disc = a_functional(&c, &uni).unwrap();
        let aud = audit(&c);
        assert!((a_disc - aud.a_uniform).abs() < 1e-10 * aud.a_uniform.max(1.0));
    }

    #[test]
    fn parse_descriptors() {
        assert!(matches!(
            CurveSpec::parse("circle:r=0.2").unwrap(),
            CurveSpec::Circle { r, cx, cy } if r == 0.2 && cx == 0.5 && cy == 0.5
        ));
        assert!(matches!(
            CurveSpec::parse("ellipse:a=0.2,b=0.1").unwrap(),
            CurveSpec::Ellipse { .. }
        ));
        assert!(matches!(
            CurveSpec::parse("kfold:k=3,r=0.2,eps=0.05").unwrap(),
            CurveSpec::Kfold { k: 3, .. }
        ));
        assert!(CurveSpec::parse("blob:r=1").is_err());
        assert!(CurveSpec::parse("circle:r=0.9").is_ok()); // parse ok, build rejects
        assert!(build_curve(&CurveSpec::parse("circle:r=0.9").unwrap(), 512).is_err());
        assert!(build_curve(&CurveSpec::parse("circle:r=0.2").unwrap(), 100).is_err());
    }

    #[test]
    fn curvature_and_closure_guards() {
        // eps k >= 1 makes the tangent angle non-monotone
        let pinched = CurveSpec::Kfold { k: 6, r: 0.2, eps: 0.2, cx: 0.5, cy: 0.5 };
        assert!(matches!(
            build_curve(&pinched, 512),
            Err(CurveError::CurvatureVanishes(_))
        ));
        // a j=1 harmonic gives the tangent a nonzero mean: cannot close
        let open = CurveSpec::Custom {
            r: 0.2,
            phase: 0.0,
            sin_coeffs: vec![(1, 0.3)],
            cos_coeffs: vec![],
            cx: 0.5,
            cy: 0.5,
        };
        assert!(matches!(
            build_curve(&open, 512),
            Err(CurveError::DoesNotClose(_))
        ));
    }

    #[test]
    fn arbitrary_parameter_evaluation_matches_nodes() {
        for spec in [
            CurveSpec::Circle { r: 0.2, cx: 0.5, cy: 0.5 },
            CurveSpec::Ellipse { a: 0.2, b: 0.1, cx: 0.5, cy: 0.5 },
            CurveSpec::Kfold { k: 3, r: 0.2, eps: 0.05, cx: 0.5, cy: 0.5 },
        ] {
            let c = build_curve(&spec, 512).unwrap();
            for node in c.nodes.iter().step_by(37) {
                let p = c.position(node.t);
                let t = c.tangent(node.t);
                assert!((p[0] - node.pos[0]).abs() < 1e-10, "{spec:?}");
                assert!((p[1] - node.pos[1]).abs() < 1e-10);
                assert!((t[0] - node.tangent[0]).abs() < 1e-10);
                assert!((t[1] - node.tangent[1]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn kfold_positions_close_and_stay_in_bounds() {
        let c = build_curve(
            &CurveSpec::Kfold { k: 3, r: 0.2, eps: 0.05, cx: 0.5, cy: 0.5 },
            1024,
        )
        .unwrap();
        let p0 = c.position(0.0);
        let p1 = c.position(c.length);
        assert!((p0[0] - p1[0]).abs() < 1e-10 && (p0[1] - p1[1]).abs() < 1e-10);
        // mean position is the requested center
        let (mut mx, mut my) = (0.0, 0.0);
        for node in &c.nodes {
            mx += node.pos[0];
            my += node.pos[1];
        }
        mx /= c.nodes.len() as f64;
        my /= c.nodes.len() as f64;
        assert!((mx - 0.5).abs() < 1e-6 && (my - 0.5).abs() < 1e-6);
    }
}

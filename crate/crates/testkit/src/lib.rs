//! Analytic oracles and deterministic fixtures for the arw test suites.
//!
//! Everything in this crate is computed by a route independent of the code
//! under test: divisor formulas instead of lattice scans, closed-form
//! geodesic lengths instead of marching squares, dense angle-parameterized
//! quadrature instead of arc-length nodes. Oracles live here, outside the
//! library surface, so they cannot leak into production paths.

use std::f64::consts::PI;

/// Number of ways to write `n` as an ordered sum of two integer squares,
/// via the divisor formula r2(n) = 4 (d_1(n) - d_3(n)) where d_k counts
/// divisors congruent to k mod 4. Independent of any lattice scan.
pub fn r2_by_divisors(n: u64) -> u64 {
    assert!(n >= 1);
    fn tally(q: u64, d1: &mut i64, d3: &mut i64) {
        match q % 4 {
            1 => *d1 += 1,
            3 => *d3 += 1,
            _ => {}
        }
    }
    let mut d1 = 0i64;
    let mut d3 = 0i64;
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            tally(d, &mut d1, &mut d3);
            if d != n / d {
                tally(n / d, &mut d1, &mut d3);
            }
        }
        d += 1;
    }
    (4 * (d1 - d3)).max(0) as u64
}

/// Number of ways to write `n` as an ordered sum of three integer squares,
/// by exhaustive scan over all |lambda_i| <= sqrt(n).
pub fn r3_by_scan(n: u64) -> u64 {
    let r = (n as f64).sqrt() as i64 + 1;
    let mut count = 0u64;
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                if (a * a + b * b + c * c) as u64 == n {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Fourth Fourier coefficient of the angular measure of the lattice points
/// on the circle of radius sqrt(n), computed through floating-point angles
/// (mean of cos(4 theta_lambda)). Cross-checks the integer-exact route.
pub fn mu4_by_angles(points: &[(i64, i64)]) -> f64 {
    assert!(!points.is_empty());
    let sum: f64 = points
        .iter()
        .map(|&(a, b)| (4.0 * (b as f64).atan2(a as f64)).cos())
        .sum();
    sum / points.len() as f64
}

/// Total length of the level set of cos(2 pi <lam, x>) on the unit 2-torus,
/// for a primitive integer vector `lam` and a prescribed number of level
/// lines per period. The level set consists of `levels_per_period` closed
/// geodesics, each of length ||lam||.
pub fn oracle_geodesic_length(lam: (i64, i64), levels_per_period: u32) -> Result<f64, String> {
    let g = gcd(lam.0.unsigned_abs(), lam.1.unsigned_abs());
    if g != 1 {
        return Err(format!("lam {lam:?} is not primitive (gcd {g})"));
    }
    let norm = ((lam.0 * lam.0 + lam.1 * lam.1) as f64).sqrt();
    Ok(levels_per_period as f64 * norm)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Crossing count between the family of vertical lines x1 = offset + k*spacing
/// and a circle of radius `r` centered on the first line's axis origin.
/// Transversal intersections count twice per secant line; tangencies are
/// reported separately and counted once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineCircleCrossings {
    pub transversal: u32,
    pub tangential: u32,
}

pub fn oracle_line_circle_crossings(spacing: f64, offset: f64, r: f64) -> LineCircleCrossings {
    assert!(spacing > 0.0 && r > 0.0);
    let mut transversal = 0;
    let mut tangential = 0;
    let k_min = ((-r - offset) / spacing).floor() as i64;
    let k_max = ((r - offset) / spacing).ceil() as i64;
    for k in k_min..=k_max {
        let x = offset + k as f64 * spacing;
        let d = x.abs();
        if (d - r).abs() < 1e-12 {
            tangential += 1;
        } else if d < r {
            transversal += 2;
        }
    }
    LineCircleCrossings {
        transversal,
        tangential,
    }
}

/// Length of the segment {a x + b y = c} clipped to the square
/// [lo, hi] x [lo, hi]. Zero when the line misses the square.
pub fn oracle_line_square_clip(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> f64 {
    // collect intersection parameters with the four edges
    let mut pts: Vec<(f64, f64)> = vec![];
    let push = |x: f64, y: f64, pts: &mut Vec<(f64, f64)>| {
        if (lo - 1e-12..=hi + 1e-12).contains(&x) && (lo - 1e-12..=hi + 1e-12).contains(&y) {
            pts.push((x, y));
        }
    };
    if b.abs() > 1e-15 {
        for x in [lo, hi] {
            push(x, (c - a * x) / b, &mut pts);
        }
    }
    if a.abs() > 1e-15 {
        for y in [lo, hi] {
            push((c - b * y) / a, y, &mut pts);
        }
    }
    pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    pts.dedup_by(|p, q| (p.0 - q.0).abs() < 1e-12 && (p.1 - q.1).abs() < 1e-12);
    if pts.len() < 2 {
        return 0.0;
    }
    let (p, q) = (pts[0], pts[pts.len() - 1]);
    ((q.0 - p.0).powi(2) + (q.1 - p.1).powi(2)).sqrt()
}

/// Length of the circle cut out of the sphere |x - c| = rho by the plane
/// x3 = h (absolute coordinates). Empty intersections give zero.
pub fn oracle_plane_sphere_circle(center_z: f64, rho: f64, h: f64) -> f64 {
    let d = (h - center_z).abs();
    if d >= rho {
        0.0
    } else {
        2.0 * PI * (rho * rho - d * d).sqrt()
    }
}

/// Curve functionals of an ellipse computed by dense quadrature in the
/// *angle* parameterization (independent of arc-length node machinery).
/// Returns (L, c1, d, A, B, I4) where c1 = (1/L) int gdot1^2,
/// d = (1/L) int gdot1 gdot2, A = (1/L) int gdot1^2 gdot2^2,
/// B = (1/L) int gdot1^3 gdot2, and I4 is the normalized fourth
/// direction-correlation integral.
pub fn oracle_ellipse_functionals(a: f64, b: f64, nodes: usize) -> (f64, f64, f64, f64, f64, f64) {
    // gamma(theta) = (a cos, b sin); speed = sqrt(a^2 sin^2 + b^2 cos^2)
    let m = nodes;
    let mut length = 0.0;
    let mut m2 = [0.0f64; 3]; // int gdot1^2, gdot1 gdot2, gdot2^2 (dt)
    let mut m4 = [0.0f64; 5]; // int gdot1^i gdot2^(4-i), i = 4,3,2,1,0 (dt)
    for j in 0..m {
        let th = 2.0 * PI * (j as f64 + 0.5) / m as f64;
        let (dx, dy) = (-a * th.sin(), b * th.cos());
        let speed = (dx * dx + dy * dy).sqrt();
        let (t1, t2) = (dx / speed, dy / speed);
        let w = speed * 2.0 * PI / m as f64; // dt = speed d theta
        length += w;
        m2[0] += t1 * t1 * w;
        m2[1] += t1 * t2 * w;
        m2[2] += t2 * t2 * w;
        for (i, slot) in m4.iter_mut().enumerate() {
            let p = 4 - i; // power of t1
            *slot += t1.powi(p as i32) * t2.powi(i as i32) * w;
        }
    }
    let c1 = m2[0] / length;
    let d = m2[1] / length;
    let a_fun = m4[2] / length;
    let b_fun = m4[1] / length;
    // I4 = sum_i binom(4,i) [ (1/L) int gdot1^i gdot2^(4-i) ]^2
    let binom = [1.0, 4.0, 6.0, 4.0, 1.0];
    let i4: f64 = m4
        .iter()
        .enumerate()
        .map(|(i, v)| binom[i] * (v / length) * (v / length))
        .sum();
    (length, c1, d, a_fun, b_fun, i4)
}

/// Mean of <lhat, lhat'>^4 over all ordered pairs of lattice points of
/// squared norm n in dimension 3, by direct double loop.
pub fn oracle_pair_fourth_moment_3d(points: &[(i64, i64, i64)], n: u64) -> f64 {
    let nf = n as f64;
    let mut sum = 0.0;
    for &(a, b, c) in points {
        for &(d, e, f) in points {
            let dot = (a * d + b * e + c * f) as f64 / nf;
            sum += dot.powi(4);
        }
    }
    sum / (points.len() * points.len()) as f64
}

/// Closed-form partial correlation of a jointly Gaussian triple with
/// pairwise correlations (rxy, rxz, ryz), conditioning on the third
/// coordinate.
pub fn oracle_partial_correlation(rxy: f64, rxz: f64, ryz: f64) -> f64 {
    (rxy - rxz * ryz) / ((1.0 - rxz * rxz).sqrt() * (1.0 - ryz * ryz).sqrt())
}

/// Jointly Gaussian triple (X, Y, Z) with prescribed pairwise correlations,
/// generated by an RNG independent of the library under test.
pub fn synthetic_gaussian_triple(
    rxy: f64,
    rxz: f64,
    ryz: f64,
    samples: usize,
    seed: u64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    // X = e1; Z = rxz e1 + sqrt(1-rxz^2) e2; Y = a e1 + b e2 + c e3
    let a = rxy;
    let b = (ryz - rxy * rxz) / (1.0 - rxz * rxz).sqrt();
    let c = (1.0 - a * a - b * b).max(0.0).sqrt();
    let mut state = seed ^ 0x5DEECE66D;
    let mut next = move || {
        state = state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^= z >> 31;
        ((z >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    };
    let mut gauss = move || {
        let (u1, u2) = (next(), next());
        let r = (-2.0 * u1.ln()).sqrt();
        (r * (2.0 * PI * u2).cos(), r * (2.0 * PI * u2).sin())
    };
    let (mut xs, mut ys, mut zs) = (
        Vec::with_capacity(samples),
        Vec::with_capacity(samples),
        Vec::with_capacity(samples),
    );
    for _ in 0..samples {
        let (e1, e2) = gauss();
        let (e3, _) = gauss();
        xs.push(e1);
        zs.push(rxz * e1 + (1.0 - rxz * rxz).sqrt() * e2);
        ys.push(a * e1 + b * e2 + c * e3);
    }
    (xs, ys, zs)
}

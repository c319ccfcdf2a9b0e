//! Level-set geometry measurements: level-curve length on the 2-torus by
//! marching squares, nodal crossings with reference curves by sign change
//! plus bisection refinement, and nodal area on the 3-torus by marching
//! tetrahedra. All grids wrap periodically.

use thiserror::Error;

use crate::field::{CurveRestriction, FieldSample};

#[derive(Debug, Error)]
pub enum LevelSetError {
    #[error("grid {m} too coarse for sqrt({n}) oscillations; need at least {needed}")]
    ResolutionTooCoarse { m: usize, n: i64, needed: usize },
    #[error("curve sampling too coarse: {0}")]
    SamplingTooCoarse(String),
    #[error("expected a {expected}-dimensional field sample, got {got}")]
    WrongDimension { expected: u8, got: u8 },
}

/// Length measurement of one level set.
#[derive(Debug, Clone, Copy)]
pub struct LevelMeasurement {
    pub u: f64,
    pub length: f64,
    pub segments: usize,
    pub grid: usize,
    /// |length(M) - length(M/2)| from the built-in half-resolution re-run.
    pub refinement_delta: f64,
}

/// Nodal crossings with a reference curve.
#[derive(Debug, Clone)]
pub struct CrossingCount {
    pub curve_id: String,
    pub count: usize,
    /// Refined transversal crossing parameters, strictly increasing.
    pub locations: Vec<f64>,
    /// Roots where the tangential derivative is numerically zero; counted
    /// once and kept out of `locations`.
    pub tangential: Vec<f64>,
}

/// Marching-squares length of {T = u} with periodic wrap.
pub fn level_length(field: &FieldSample, u: f64) -> Result<LevelMeasurement, LevelSetError> {
    if field.dim != 2 {
        return Err(LevelSetError::WrongDimension {
            expected: 2,
            got: field.dim,
        });
    }
    let needed = 4 * (field.draw.fs.n as f64).sqrt().ceil() as usize;
    if field.m < needed {
        return Err(LevelSetError::ResolutionTooCoarse {
            m: field.m,
            n: field.draw.fs.n,
            needed,
        });
    }
    let (length, segments) = marching_squares(&field.values, field.m, 1, u);
    let refinement_delta = if field.m % 2 == 0 && field.m / 2 >= 4 {
        let (coarse, _) = marching_squares(&field.values, field.m, 2, u);
        (length - coarse).abs()
    } else {
        f64::NAN
    };
    Ok(LevelMeasurement {
        u,
        length,
        segments,
        grid: field.m,
        refinement_delta,
    })
}

/// Core marching-squares pass over every `stride`-subsampled cell.
fn marching_squares(values: &[f64], m: usize, stride: usize, u: f64) -> (f64, usize) {
    let cells = m / stride;
    let h = stride as f64 / m as f64;
    let at = |i2: usize, i1: usize| {
        values[((i2 * stride) % m) * m + (i1 * stride) % m] - u
    };
    let mut total = 0.0;
    let mut segments = 0usize;
    for i2 in 0..cells {
        for i1 in 0..cells {
            // corners of the cell, (x1, x2) axes: f00 = (i1, i2),
            // f10 = (i1+1, i2), f01 = (i1, i2+1), f11 = (i1+1, i2+1)
            let f00 = at(i2, i1);
            let f10 = at(i2, i1 + 1);
            let f01 = at(i2 + 1, i1);
            let f11 = at(i2 + 1, i1 + 1);
            let mut pts: [(f64, f64); 4] = [(0.0, 0.0); 4];
            let mut np = 0usize;
            // edge order: bottom, right, top, left
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
            match np {
                2 => {
                    total += h * dist(pts[0], pts[1]);
                    segments += 1;
                }
                4 => {
                    // saddle cell: connect according to the center sign
                    let center = 0.25 * (f00 + f10 + f01 + f11);
                    let (b, r, t, l) = (pts[0], pts[1], pts[2], pts[3]);
                    let pairs = if (center >= 0.0) == (f00 >= 0.0) {
                        [(b, r), (t, l)]
                    } else {
                        [(b, l), (t, r)]
                    };
                    for (p, q) in pairs {
                        total += h * dist(p, q);
                        segments += 1;
                    }
                }
                _ => {}
            }
        }
    }
    (total, segments)
}

fn dist(p: (f64, f64), q: (f64, f64)) -> f64 {
    let (dx, dy) = (q.0 - p.0, q.1 - p.1);
    (dx * dx + dy * dy).sqrt()
}

/// Tangential derivative threshold below which a refined root is reported
/// as tangential rather than transversal.
const TANGENTIAL_TOL: f64 = 1e-8;

/// Count nodal crossings along a curve restriction. Sign changes between
/// consecutive nodes are refined by bisection on the exact restriction to
/// 1e-12 in the parameter.
pub fn crossings(
    restriction: &CurveRestriction<'_>,
    sep_tol: Option<f64>,
) -> Result<CrossingCount, LevelSetError> {
    let curve = restriction.curve;
    let k = restriction.samples.len();
    let spacing = curve.length / k as f64;
    let n = restriction.draw.fs.n;
    let needed = (16.0 * curve.length * (n as f64).sqrt()).ceil() as usize;
    if k < needed {
        return Err(LevelSetError::SamplingTooCoarse(format!(
            "{k} nodes for length {:.3} at sqrt(n) = {:.1}; need {needed}",
            curve.length,
            (n as f64).sqrt()
        )));
    }
    let sep = sep_tol.unwrap_or(spacing / 2.0);
    let mut locations = vec![];
    let mut tangential = vec![];
    for j in 0..k {
        let (t0, v0, _) = restriction.samples[j];
        let (t1raw, v1, _) = restriction.samples[(j + 1) % k];
        let t1 = if j + 1 == k { curve.length } else { t1raw };
        if v0 == 0.0 {
            // node exactly on the nodal set: classify by the derivative
            let d = restriction.samples[j].2;
            if d.abs() < TANGENTIAL_TOL {
                tangential.push(t0);
            } else {
                locations.push(t0);
            }
            continue;
        }
        if v0 * v1 < 0.0 {
            let root = bisect(restriction, t0, t1, v0);
            let d = restriction.deriv_at(root);
            if d.abs() < TANGENTIAL_TOL {
                tangential.push(root);
            } else {
                locations.push(root);
            }
        }
    }
    locations.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in locations.windows(2) {
        if w[1] - w[0] < sep.min(spacing) {
            return Err(LevelSetError::SamplingTooCoarse(format!(
                "roots {:.6} and {:.6} closer than the node spacing {spacing:.6}",
                w[0], w[1]
            )));
        }
    }
    Ok(CrossingCount {
        curve_id: curve.spec.id(),
        count: locations.len(),
        locations,
        tangential,
    })
}

fn bisect(restriction: &CurveRestriction<'_>, mut lo: f64, mut hi: f64, vlo: f64) -> f64 {
    let mut flo = vlo;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-12 {
            return mid;
        }
        let fm = restriction.value_at(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Marching-tetrahedra area of {T = u} on the 3-torus.
pub fn nodal_area_3d(field: &FieldSample, u: f64) -> Result<f64, LevelSetError> {
    if field.dim != 3 {
        return Err(LevelSetError::WrongDimension {
            expected: 3,
            got: field.dim,
        });
    }
    let m = field.m;
    let needed = 4 * (field.draw.fs.n as f64).sqrt().ceil() as usize;
    if m < needed {
        return Err(LevelSetError::ResolutionTooCoarse {
            m,
            n: field.draw.fs.n,
            needed,
        });
    }
    let at = |i: usize, j: usize, k: usize| {
        field.values[((k % m) * m + (j % m)) * m + (i % m)] - u
    };
    let h = 1.0 / m as f64;
    // Kuhn split: six tetrahedra per cube, one per permutation of the axes,
    // each walking 000 -> 111 along the permuted axes. Faces of adjacent
    // cubes receive matching diagonals, so the triangulation has no cracks.
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut total = 0.0;
    let mut corner = [0.0f64; 8];
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                for (c, val) in corner.iter_mut().enumerate() {
                    *val = at(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                }
                if corner.iter().all(|v| *v >= 0.0) || corner.iter().all(|v| *v < 0.0) {
                    continue;
                }
                for perm in PERMS {
                    // vertices of the tetrahedron in cube-corner index form
                    let mut idx = [0usize; 4];
                    let mut acc = 0usize;
                    for (step, axis) in perm.iter().enumerate() {
                        acc |= 1 << axis;
                        idx[step + 1] = acc;
                    }
                    let vals = [
                        corner[idx[0]],
                        corner[idx[1]],
                        corner[idx[2]],
                        corner[idx[3]],
                    ];
                    let verts = idx.map(|c| {
                        [
                            (c & 1) as f64,
                            ((c >> 1) & 1) as f64,
                            ((c >> 2) & 1) as f64,
                        ]
                    });
                    total += tet_iso_area(&verts, &vals) * h * h;
                }
            }
        }
    }
    Ok(total)
}

/// Isosurface area inside one tetrahedron with linear interpolation.
fn tet_iso_area(verts: &[[f64; 3]; 4], vals: &[f64; 4]) -> f64 {
    let inside: Vec<usize> = (0..4).filter(|&i| vals[i] >= 0.0).collect();
    let outside: Vec<usize> = (0..4).filter(|&i| vals[i] < 0.0).collect();
    let cut = |a: usize, b: usize| -> [f64; 3] {
        let t = vals[a] / (vals[a] - vals[b]);
        [
            verts[a][0] + t * (verts[b][0] - verts[a][0]),
            verts[a][1] + t * (verts[b][1] - verts[a][1]),
            verts[a][2] + t * (verts[b][2] - verts[a][2]),
        ]
    };
    match inside.len() {
        1 | 3 => {
            let (apex, base) = if inside.len() == 1 {
                (inside[0], &outside)
            } else {
                (outside[0], &inside)
            };
            let p = cut(apex, base[0]);
            let q = cut(apex, base[1]);
            let r = cut(apex, base[2]);
            triangle_area(p, q, r)
        }
        2 => {
            // quad: cuts of the four mixed edges, split into two triangles
            let p = cut(inside[0], outside[0]);
            let q = cut(inside[0], outside[1]);
            let r = cut(inside[1], outside[1]);
            let s = cut(inside[1], outside[0]);
            triangle_area(p, q, r) + triangle_area(p, r, s)
        }
        _ => 0.0,
    }
}

fn triangle_area(p: [f64; 3], q: [f64; 3], r: [f64; 3]) -> f64 {
    let u = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
    let v = [r[0] - p[0], r[1] - p[1], r[2] - p[2]];
    let c = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{build_curve, CurveSpec};
    use crate::field::{draw_coefficients, restrict_to_curve, stub_draw, synthesize_grid};
    use crate::lattice::enumerate;
    use rustfft::num_complex::Complex;
    use std::sync::Arc;

    /// Draw that synthesizes exactly cos(2 pi <lam, x>).
    fn single_mode(n: i64, dim: u8, lam: [i64; 3]) -> crate::field::CoefficientDraw {
        let fs = Arc::new(enumerate(n, dim).unwrap());
        let mut draw = stub_draw(&fs, Complex::new(0.0, 0.0)).unwrap();
        let amp = (fs.len() as f64).sqrt() / 2.0;
        let pos = fs
            .half
            .iter()
            .position(|p| *p == lam)
            .expect("lam must be in the half-set");
        draw.coeffs[pos] = Complex::new(amp, 0.0);
        draw
    }

    #[test]
    fn geodesic_length_oracle_34() {
        let draw = single_mode(25, 2, [3, 4, 0]);
        let grid = synthesize_grid(&draw, 512, false).unwrap();
        let meas = level_length(&grid, 0.0).unwrap();
        let oracle = arw_testkit::oracle_geodesic_length((3, 4), 2).unwrap();
        assert!(
            (meas.length - oracle).abs() < 0.05,
            "length {} vs {oracle}",
            meas.length
        );
        assert!(meas.refinement_delta < 0.05);
        // empty level set above the amplitude
        let empty = level_length(&grid, 2.0).unwrap();
        assert_eq!(empty.length, 0.0);
        assert_eq!(empty.segments, 0);
    }

    #[test]
    fn geodesic_length_axis_mode() {
        let draw = single_mode(1, 2, [1, 0, 0]);
        let grid = synthesize_grid(&draw, 128, false).unwrap();
        let meas = level_length(&grid, 0.0).unwrap();
        assert!((meas.length - 2.0).abs() < 1e-3, "{}", meas.length);
        let diag = single_mode(2, 2, [1, 1, 0]);
        let grid = synthesize_grid(&diag, 128, false).unwrap();
        let meas = level_length(&grid, 0.0).unwrap();
        assert!((meas.length - 2.0 * 2f64.sqrt()).abs() < 5e-3, "{}", meas.length);
    }

    #[test]
    fn refinement_cauchy_on_analytic_fixture() {
        let draw = single_mode(25, 2, [3, 4, 0]);
        let mut prev: Option<f64> = None;
        for m in [128usize, 256, 512] {
            let grid = synthesize_grid(&draw, m, false).unwrap();
            let meas = level_length(&grid, 0.0).unwrap();
            if let Some(p) = prev {
                assert!((meas.length - p).abs() < 40.0 / m as f64);
            }
            prev = Some(meas.length);
        }
    }

    #[test]
    fn symmetry_u_and_negated_field() {
        let fs = Arc::new(enumerate(25, 2).unwrap());
        let draw = draw_coefficients(&fs, 7, 3).unwrap();
        let grid = synthesize_grid(&draw, 64, false).unwrap();
        let mut negated = grid.clone();
        for v in negated.values.iter_mut() {
            *v = -*v;
        }
        let a = level_length(&grid, 0.7).unwrap();
        let b = level_length(&negated, -0.7).unwrap();
        assert_eq!(a.length.to_bits(), b.length.to_bits());
        assert_eq!(a.segments, b.segments);
    }

    #[test]
    fn resolution_guard() {
        let fs = Arc::new(enumerate(25, 2).unwrap());
        let draw = draw_coefficients(&fs, 7, 3).unwrap();
        let grid = synthesize_grid(&draw, 16, false).unwrap();
        assert!(matches!(
            level_length(&grid, 0.0),
            Err(LevelSetError::ResolutionTooCoarse { needed: 20, .. })
        ));
    }

    #[test]
    fn crossings_fixture_eight() {
        let draw = single_mode(25, 2, [5, 0, 0]);
        let curve = build_curve(&CurveSpec::Circle { r: 0.2, cx: 0.5, cy: 0.5 }, 512).unwrap();
        let restriction = restrict_to_curve(&draw, &curve);
        let c = crossings(&restriction, None).unwrap();
        let oracle = arw_testkit::oracle_line_circle_crossings(0.1, 0.05, 0.2);
        assert_eq!(c.count as u32, oracle.transversal);
        assert!(c.tangential.is_empty());
        // locations strictly increasing and on the nodal set
        for w in c.locations.windows(2) {
            assert!(w[1] > w[0]);
        }
        for t in &c.locations {
            assert!(restriction.value_at(*t).abs() < 1e-9);
        }
    }

    #[test]
    fn crossings_match_dense_scan() {
        let draw = single_mode(25, 2, [3, 4, 0]);
        let curve = build_curve(&CurveSpec::Circle { r: 0.2, cx: 0.5, cy: 0.5 }, 1024).unwrap();
        let restriction = restrict_to_curve(&draw, &curve);
        let c = crossings(&restriction, None).unwrap();
        // brute-force scan with 10^6 points
        let scan_points = 1_000_000;
        let mut scan = 0;
        let mut prev = restriction.value_at(0.0);
        for i in 1..=scan_points {
            let t = curve.length * i as f64 / scan_points as f64;
            let v = restriction.value_at(t);
            if prev * v < 0.0 {
                scan += 1;
            }
            prev = v;
        }
        assert_eq!(c.count, scan, "refined {} vs scan {scan}", c.count);
    }

    #[test]
    fn no_zero_fields_have_no_crossings_and_even_parity() {
        let fs = Arc::new(enumerate(25, 2).unwrap());
        // constant-positive restriction: offset field has no zeros on a tiny
        // circle far from its nodal set - use a stub with one mode and a
        // curve in a positive region
        let draw = single_mode(25, 2, [5, 0, 0]);
        let tiny = build_curve(&CurveSpec::Circle { r: 0.01, cx: 0.5, cy: 0.5 }, 4096).unwrap();
        // at (0.5, 0.5): cos(2 pi 5 * 0.5) = cos(5 pi) = -1, and the circle
        // of radius 0.01 stays within the negative band
        let restriction = restrict_to_curve(&draw, &tiny);
        let c = crossings(&restriction, None).unwrap();
        assert_eq!(c.count, 0);
        // random draws: even parity
        let curve = build_curve(&CurveSpec::Circle { r: 0.2, cx: 0.5, cy: 0.5 }, 1024).unwrap();
        for idx in 0..20 {
            let d = draw_coefficients(&fs, 99, idx).unwrap();
            let r = restrict_to_curve(&d, &curve);
            if r.samples[0].1 != 0.0 {
                let c = crossings(&r, None).unwrap();
                assert_eq!(c.count % 2, 0, "odd crossing count at idx {idx}");
            }
        }
    }

    #[test]
    fn crossings_density_guard() {
        let draw = single_mode(25, 2, [5, 0, 0]);
        // circle of radius 0.4 crosses eight zero lines transversally; the
        // node requirement is 16 L sqrt(n) = 202 <= 256
        let curve = build_curve(&CurveSpec::Circle { r: 0.4, cx: 0.5, cy: 0.5 }, 256).unwrap();
        let restriction = restrict_to_curve(&draw, &curve);
        let c = crossings(&restriction, None).unwrap();
        assert_eq!(c.count, 16);
        // too few nodes for the same curve trips the density guard
        let mut r2 = restrict_to_curve(&draw, &curve);
        r2.samples.truncate(100);
        assert!(matches!(
            crossings(&r2, None),
            Err(LevelSetError::SamplingTooCoarse(_))
        ));
    }

    #[test]
    fn nodal_area_planes() {
        // cos(2 pi x3): two unit-square planes, area 2
        let draw = single_mode(1, 3, [0, 0, 1]);
        let grid = synthesize_grid(&draw, 32, false).unwrap();
        let area = nodal_area_3d(&grid, 0.0).unwrap();
        assert!((area - 2.0).abs() < 0.02, "area {area}");
        // empty level
        assert_eq!(nodal_area_3d(&grid, 2.0).unwrap(), 0.0);
        // cos(2 pi (x1 + x2)): two planes of area sqrt(2)
        let diag = single_mode(2, 3, [1, 1, 0]);
        let grid = synthesize_grid(&diag, 32, false).unwrap();
        let area = nodal_area_3d(&grid, 0.0).unwrap();
        assert!((area - 2.0 * 2f64.sqrt()).abs() < 0.03, "area {area}");
    }

    #[test]
    fn area_refinement_improves() {
        let diag = single_mode(2, 3, [1, 1, 0]);
        let exact = 2.0 * 2f64.sqrt();
        let mut errs = vec![];
        for m in [16usize, 32, 64] {
            let grid = synthesize_grid(&diag, m, false).unwrap();
            errs.push((nodal_area_3d(&grid, 0.0).unwrap() - exact).abs());
        }
        assert!(errs[2] <= errs[0] + 1e-9, "errors {errs:?}");
    }
}

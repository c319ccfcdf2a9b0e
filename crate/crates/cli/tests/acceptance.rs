//! Acceptance suite: one test per criterion, each printing one line per
//! sub-check before asserting. Run with
//! `cargo test --test acceptance -- --nocapture` to see every line.
//!
//! Criteria 6 and 8 compare finite-size Monte Carlo moments against
//! asymptotic limits at pinned tolerances. Three of the chaos-moment checks
//! and the level-1 field variance check fail by a mathematically necessary
//! finite-size margin (the coefficient law has exponential |a|^2, whose
//! fourth cumulant contributes 12/N corrections; N = 32 and 12 here). The
//! checks are implemented exactly as pinned and report the exact finite-size
//! values alongside, so the gap is auditable rather than hidden.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use arw_core::chaos;
use arw_core::curves::{self, CurveSpec};
use arw_core::field;
use arw_core::lattice;
use arw_core::levelset;
use arw_core::mc::{self, EnsembleConfig, Mode};
use arw_core::surfaces::{self, SurfaceSpec};
use arw_core::theory;

struct Checker {
    criterion: &'static str,
    failures: Vec<String>,
}

impl Checker {
    fn new(criterion: &'static str) -> Self {
        Checker {
            criterion,
            failures: vec![],
        }
    }

    fn check(&mut self, name: &str, ok: bool, detail: String) {
        let tag = if ok { "[PASS]" } else { "[FAIL]" };
        println!("{tag} criterion {} / {name}: {detail}", self.criterion);
        if !ok {
            self.failures.push(format!("{name}: {detail}"));
        }
    }

    fn finish(self) {
        assert!(
            self.failures.is_empty(),
            "criterion {} failed sub-checks:\n{}",
            self.criterion,
            self.failures.join("\n")
        );
    }
}

fn circle(r: f64, nodes: usize) -> curves::ToralCurve {
    curves::build_curve(&CurveSpec::Circle { r, cx: 0.5, cy: 0.5 }, nodes).unwrap()
}

#[test]
fn criterion_01_lattice_exactness() {
    let start = Instant::now();
    let mut c = Checker::new("1");
    let fs25 = lattice::enumerate(25, 2).unwrap();
    c.check("N_25", fs25.len() == 12, format!("count = {}", fs25.len()));
    let mu5 = lattice::enumerate(5, 2).unwrap().mu4().unwrap();
    c.check(
        "mu4(5)",
        (mu5 + 0.28).abs() < 1e-12,
        format!("{mu5} vs -0.28"),
    );
    let mu4 = lattice::enumerate(4, 2).unwrap().mu4().unwrap();
    c.check("mu4(4)", (mu4 - 1.0).abs() < 1e-12, format!("{mu4} vs 1"));
    let mut identity_failures = 0u32;
    let mut checked = 0u32;
    for n in lattice::representable_up_to(2000) {
        let fs = lattice::enumerate(n, 2).unwrap();
        let (mut s11, mut s22, mut s12) = (0i64, 0i64, 0i64);
        for p in &fs.points {
            s11 += p[0] * p[0];
            s22 += p[1] * p[1];
            s12 += p[0] * p[1];
        }
        // (1/(nN)) sum li^2 = 1/2 and sum l1 l2 = 0, exactly in integers
        if 2 * s11 != n * fs.len() as i64 || 2 * s22 != n * fs.len() as i64 || s12 != 0 {
            identity_failures += 1;
        }
        if fs.len() as u64 != arw_testkit::r2_by_divisors(n as u64) {
            identity_failures += 1;
        }
        checked += 1;
    }
    c.check(
        "second-moment identities and counts, n <= 2000",
        identity_failures == 0,
        format!("{checked} values of n checked, {identity_failures} failures"),
    );
    let elapsed = start.elapsed().as_secs_f64();
    c.check("runtime < 5 s", elapsed < 5.0, format!("{elapsed:.2} s"));
    c.finish();
}

#[test]
fn criterion_02_curve_audits() {
    let start = Instant::now();
    let mut c = Checker::new("2");
    let circle_audit = curves::audit(&circle(0.2, 4096));
    c.check(
        "circle A = 1/8",
        (circle_audit.a - 0.125).abs() < 1e-9,
        format!("A = {}", circle_audit.a),
    );
    c.check(
        "circle B = 0",
        circle_audit.b.abs() < 1e-9,
        format!("B = {}", circle_audit.b),
    );
    c.check(
        "circle I4 = 3/8",
        (circle_audit.i4 - 0.375).abs() < 1e-9,
        format!("I4 = {}", circle_audit.i4),
    );
    c.check(
        "circle I4' = 0",
        circle_audit.i4_prime.abs() < 1e-9,
        format!("I4' = {}", circle_audit.i4_prime),
    );
    for k in [3u32, 4, 5, 6] {
        let audit = curves::audit(
            &curves::build_curve(&CurveSpec::Kfold { k, r: 0.2, eps: 0.05, cx: 0.5, cy: 0.5 }, 4096)
                .unwrap(),
        );
        let rhs = 0.5 + 8.0 * audit.a * audit.a - 2.0 * audit.a + 8.0 * audit.b * audit.b;
        c.check(
            &format!("kfold k={k} relation I4 = 1/2 + 8A^2 - 2A + 8B^2"),
            (audit.i4 - rhs).abs() < 1e-9,
            format!("I4 = {}, rhs = {rhs}", audit.i4),
        );
        let bounds = audit.a > 0.0
            && audit.a < 0.25
            && audit.b * audit.b < audit.a * (1.0 - 4.0 * audit.a) / 4.0
            && audit.i4 >= 0.375 - 1e-9
            && audit.i4 < 0.5
            && audit.i4_prime > -1.0
            && audit.i4_prime < 1.0;
        c.check(
            &format!("kfold k={k} bound suite"),
            bounds,
            format!("A = {}, B = {}, I4 = {}, I4' = {}", audit.a, audit.b, audit.i4, audit.i4_prime),
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    c.check("runtime < 10 s", elapsed < 10.0, format!("{elapsed:.2} s"));
    c.finish();
}

#[test]
fn criterion_03_lemi_identities() {
    let start = Instant::now();
    let mut c = Checker::new("3");
    let curve = circle(0.2, 4096);
    for n in [5i64, 25, 65] {
        let fs = lattice::enumerate(n, 2).unwrap();
        let q = chaos::spectral_quantities(&fs, &curve).unwrap();
        c.check(
            &format!("n={n} (sumeq20) = 1/2"),
            (q.lemi.sumeq20 - 0.5).abs() < 1e-8,
            format!("{}", q.lemi.sumeq20),
        );
        c.check(
            &format!("n={n} (sumdif) = 1/4"),
            (q.lemi.sumdif - 0.25).abs() < 1e-8,
            format!("{}", q.lemi.sumdif),
        );
        c.check(
            &format!("n={n} (bra) = 1/2"),
            (q.lemi.bra - 0.5).abs() < 1e-8,
            format!("{}", q.lemi.bra),
        );
        c.check(
            &format!("n={n} (sumeq) matches the closed identity"),
            (q.lemi.sumeq - q.i_cal).abs() < 1e-8,
            format!("{} vs {}", q.lemi.sumeq, q.i_cal),
        );
        c.check(
            &format!("n={n} (brasumdif) matches the closed identity"),
            (q.lemi.brasumdif - q.j_cal).abs() < 1e-8,
            format!("{} vs {}", q.lemi.brasumdif, q.j_cal),
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    c.check("runtime < 10 s", elapsed < 10.0, format!("{elapsed:.2} s"));
    c.finish();
}

#[test]
fn criterion_04_resonance_algebra() {
    let mut c = Checker::new("4");
    let mut worst: f64 = 0.0;
    for eta in [0.0, 0.5, -0.5] {
        for i in 0..100 {
            for j in 0..100 {
                let u1 = -2.0 + 4.0 * i as f64 / 99.0;
                let u2 = -2.0 + 4.0 * j as f64 / 99.0;
                let (a1, a2) = (theory::hermite_a(u1), theory::hermite_a(u2));
                let lhs = theory::cov_bracket(a1, a2, eta).powi(2)
                    - theory::var_bracket(a1, eta) * theory::var_bracket(a2, eta);
                let d = u2.powi(4) - 4.0 * u2 * u2 - u1.powi(4) + 4.0 * u1 * u1;
                let rhs = -(1.0 + eta * eta) / 512.0 * d * d;
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    c.check(
        "Cov^2 - Var Var identity on the 100x100 grid, eta in {0, +-0.5}",
        worst < 1e-12,
        format!("max residual {worst:.2e}"),
    );
    let r0 = theory::resonant_levels(0.0);
    let ok0 = r0.len() == 3
        && r0
            .iter()
            .zip([-2.0, 0.0, 2.0])
            .all(|(v, e)| (v - e).abs() < 1e-12);
    c.check("resonant_levels(0) = {-2, 0, 2}", ok0, format!("{r0:?}"));
    let r1 = theory::resonant_levels(1.0);
    let expect1 = [-(3f64.sqrt()), -1.0, 1.0, 3f64.sqrt()];
    let ok1 = r1.len() == 4
        && r1
            .iter()
            .zip(expect1)
            .all(|(v, e)| (v - e).abs() < 1e-12);
    c.check(
        "resonant_levels(1) = {-sqrt3, -1, 1, sqrt3}",
        ok1,
        format!("{r1:?}"),
    );
    c.finish();
}

#[test]
fn criterion_05_theory_spot_values() {
    let mut c = Checker::new("5");
    for eta in [-1.0, 0.0, 1.0] {
        let f = theory::f_curve(eta, 0.375, 0.0);
        c.check(
            &format!("f(eta={eta}; 3/8, 0) = 1"),
            (f - 1.0).abs() < 1e-12,
            format!("{f}"),
        );
    }
    for i4 in [0.375f64, 0.42, 0.48] {
        let f = theory::f_curve(0.0, i4, 0.0);
        let expect = 1.0 / (2f64.sqrt() * (4.0 * i4 - 1.0).sqrt());
        c.check(
            &format!("f(0; I4={i4}, 0) closed form"),
            (f - expect).abs() < 1e-12,
            format!("{f} vs {expect}"),
        );
    }
    let c15 = theory::corr3d(0.2).unwrap();
    c.check("corr3d(1/5) = 1", (c15 - 1.0).abs() < 1e-12, format!("{c15}"));
    let c13 = theory::corr3d(1.0 / 3.0).unwrap();
    let expect = 16.0 / 310f64.sqrt();
    c.check(
        "corr3d(1/3) = 16/sqrt(310)",
        (c13 - expect).abs() < 1e-12,
        format!("{c13} vs {expect}"),
    );
    c.finish();
}

#[test]
fn criterion_06_chaos_only_monte_carlo() {
    let start = Instant::now();
    let mut c = Checker::new("6");
    let config = EnsembleConfig {
        n: 1105,
        dim: 2,
        mode: Mode::ChaosOnly,
        samples: 200_000,
        grid_m: 0,
        levels: vec![0.0, 1.0, 2.0],
        curves: vec![CurveSpec::Circle { r: 0.2, cx: 0.5, cy: 0.5 }],
        surface: None,
        quad_nodes: 1024,
        master_seed: 20_260_808,
        threads: None,
    };
    let table = mc::run_ensemble(&config).unwrap();
    let n_count = table.n_count as f64;
    let mu4 = table.mu4.unwrap();
    assert_eq!(table.n_count, 32, "N_1105 = 32");

    // (a) resonant pair (0, 2): prediction M(0, 2; mu4) = 1
    let est02 = mc::correlate(&table, "L4_u0", "L4_u2", None).unwrap();
    c.check(
        "Corr(L0[4], L2[4]) >= 0.95",
        est02.rho >= 0.95,
        format!("measured {:.6}, prediction M(0,2;mu4) = 1", est02.rho),
    );

    // (b) Corr(L0[4], L1[4]) against M(0, 1; mu4)
    let est01 = mc::correlate(&table, "L4_u0", "L4_u1", None).unwrap();
    let m01 = theory::partial_corr_levels(0.0, 1.0, mu4).unwrap();
    let tol01 = 0.05 + 3.0 * est01.stderr;
    let exact01 = exact_finite_n_corr(0.0, 1.0, mu4, n_count);
    c.check(
        "Corr(L0[4], L1[4]) within 0.05 + 3 stderr of M(0,1;mu4)",
        (est01.rho - m01).abs() <= tol01,
        format!(
            "measured {:.4}, asymptotic prediction {m01:.4}, tolerance {tol01:.4}; \
             exact finite-N value {exact01:.4} (kurtosis term 12/N = {:.4})",
            est01.rho,
            12.0 / n_count
        ),
    );

    // (c) Var(W1^2) against the asymptotic limit 2
    let w1 = table.column("W1").unwrap();
    let w1sq: Vec<f64> = w1.iter().map(|v| v * v).collect();
    let mean = w1sq.iter().sum::<f64>() / w1sq.len() as f64;
    let var_w1sq =
        w1sq.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (w1sq.len() - 1) as f64;
    c.check(
        "Var(W1^2) within 5% of 2",
        (var_w1sq - 2.0).abs() <= 0.1,
        format!(
            "measured {var_w1sq:.4}; exact finite-N value 2 + 12/N = {:.4}",
            2.0 + 12.0 / n_count
        ),
    );

    // (d) Cov(L0[4], Z4dd) normalized by the closed-form prediction
    let l40 = table.column("L4_u0").unwrap();
    let z4 = table.column("Z4dd_circle_0p2").unwrap();
    let ml = l40.iter().sum::<f64>() / l40.len() as f64;
    let mz = z4.iter().sum::<f64>() / z4.len() as f64;
    let cov: f64 = l40
        .iter()
        .zip(&z4)
        .map(|(a, b)| (a - ml) * (b - mz))
        .sum::<f64>()
        / (l40.len() - 1) as f64;
    let e_n = 4.0 * PI * PI * 1105.0;
    let length = 2.0 * PI * 0.2;
    // circle: I4' = 0; bracket (1 + 2 eta I4' + eta^2)/16
    let predicted = theory::phi(0.0) * (PI / 2.0).sqrt() * (e_n / 2.0).sqrt() / n_count
        * (2.0 * 1105.0f64).sqrt() / (4.0 * n_count)
        * length
        * (1.0 + mu4 * mu4)
        / 16.0;
    let ratio = cov / predicted;
    c.check(
        "Cov(L0[4], Z4dd) / prediction within 0.05 of 1",
        (ratio - 1.0).abs() <= 0.05,
        format!(
            "ratio {ratio:.4}; exact finite-N ratio 1 + 12/(N (1 + mu4^2)) = {:.4}",
            1.0 + 12.0 / (n_count * (1.0 + mu4 * mu4))
        ),
    );

    let elapsed = start.elapsed().as_secs_f64();
    c.check("runtime < 5 min", elapsed < 300.0, format!("{elapsed:.1} s"));
    c.finish();
}

/// Exact finite-N correlation of the dominant fourth-chaos brackets at
/// levels (u1, u2): the asymptotic bracket plus the exponential-coefficient
/// kurtosis term (12/N)(a(u1) - 1/4)(a(u2) - 1/4).
fn exact_finite_n_corr(u1: f64, u2: f64, mu4: f64, n_count: f64) -> f64 {
    let k = 12.0 / n_count;
    let term = |a: f64, b: f64| {
        theory::cov_bracket(a, b, mu4) + k * (a - 0.25) * (b - 0.25)
    };
    let (a1, a2) = (theory::hermite_a(u1), theory::hermite_a(u2));
    term(a1, a2) / (term(a1, a1) * term(a2, a2)).sqrt()
}

#[test]
fn criterion_07_partial_correlation_machinery() {
    let mut c = Checker::new("7");
    let (x, y, z) = arw_testkit::synthetic_gaussian_triple(0.5, 0.6, 0.6, 1_000_000, 314159);
    let table = mc::EnsembleTable {
        config: EnsembleConfig::default(),
        n_count: 0,
        mu4: None,
        columns: vec!["sample_idx".into(), "X".into(), "Y".into(), "Z".into()],
        rows: (0..x.len())
            .map(|i| vec![i as f64, x[i], y[i], z[i]])
            .collect(),
    };
    let est = mc::correlate(&table, "X", "Y", Some("Z")).unwrap();
    let partial = est.rho_partial.unwrap();
    c.check(
        "synthetic Gaussian triple partial correlation",
        (partial - 0.21875).abs() <= 0.01,
        format!("measured {partial:.5} vs oracle 0.21875 (1e6 samples)"),
    );

    // every fourth-chaos column decorrelates from Z_norm after projection
    let config = EnsembleConfig {
        n: 1105,
        samples: 20_000,
        curves: vec![CurveSpec::Circle { r: 0.2, cx: 0.5, cy: 0.5 }],
        master_seed: 99,
        ..Default::default()
    };
    let chaos_table = mc::run_ensemble(&config).unwrap();
    for col in ["L4_u0", "L4_u1", "L4_u2", "Z4_circle_0p2", "Z4dd_circle_0p2"] {
        let r = mc::residual_vs_conditioner(&chaos_table, col, "Z_norm").unwrap();
        // residual orthogonality is exact by construction; 3 stderr of a
        // zero-correlation estimate at this size is ~0.02
        let tol = 3.0 / (chaos_table.rows.len() as f64).sqrt();
        c.check(
            &format!("residual of {col} vs Z_norm"),
            r.abs() <= tol,
            format!("corr {r:.2e} (tolerance {tol:.3})"),
        );
    }
    c.finish();
}

#[test]
fn criterion_08_field_mode_monte_carlo() {
    let start = Instant::now();
    let mut c = Checker::new("8");
    let config = EnsembleConfig {
        n: 25,
        dim: 2,
        mode: Mode::Field,
        samples: 500,
        grid_m: 256,
        levels: vec![0.0, 1.0, 2.0],
        curves: vec![CurveSpec::Circle { r: 0.2, cx: 0.5, cy: 0.5 }],
        surface: None,
        quad_nodes: 1024,
        master_seed: 7_071_067,
        threads: None,
    };
    let table = mc::run_ensemble(&config).unwrap();
    let n_count = table.n_count as f64;
    let e_n = 4.0 * PI * PI * 25.0;

    let est12 = mc::correlate(&table, "len_u1", "len_u2", None).unwrap();
    c.check(
        "Corr(L1, L2) >= 0.8",
        est12.rho >= 0.8,
        format!("measured {:.4} (asymptotic value 1)", est12.rho),
    );
    let est01 = mc::correlate(&table, "len_u0", "len_u1", None).unwrap();
    c.check(
        "|Corr(L0, L1)| <= 0.35",
        est01.rho.abs() <= 0.35,
        format!("measured {:.4} (asymptotic value 0)", est01.rho),
    );

    let len1 = table.column("len_u1").unwrap();
    let m1 = len1.iter().sum::<f64>() / len1.len() as f64;
    let var1 = len1.iter().map(|v| (v - m1) * (v - m1)).sum::<f64>() / (len1.len() - 1) as f64;
    let normalized = var1 * n_count / e_n;
    let predicted = (-1.0f64).exp() / 32.0;
    c.check(
        "Var(L1) N / E within 35% of e^-1/32",
        (normalized / predicted - 1.0).abs() <= 0.35,
        format!(
            "measured {normalized:.5}, pinned prediction {predicted:.5} (ratio {:.2}); \
             the second-chaos coefficient reproduces e^-1/16 = {:.5} plus positive \
             fourth-chaos contributions at N = 12",
            normalized / predicted,
            (-1.0f64).exp() / 16.0
        ),
    );

    let crossings = table.column("crossings_circle_0p2").unwrap();
    let all_even = crossings.iter().all(|v| (*v as u64) % 2 == 0);
    c.check(
        "crossing parity even on 100% of samples",
        all_even,
        format!("{} samples checked", crossings.len()),
    );

    let elapsed = start.elapsed().as_secs_f64();
    c.check("runtime < 15 min", elapsed < 900.0, format!("{elapsed:.1} s"));
    c.finish();
}

#[test]
fn criterion_09_geometry_oracles() {
    let mut c = Checker::new("9");
    // marching-squares length of cos(2 pi <(3,4), x>) at M = 512
    let fs = Arc::new(lattice::enumerate(25, 2).unwrap());
    let mut draw = field::stub_draw(&fs, field::Complex::new(0.0, 0.0)).unwrap();
    let amp = (fs.len() as f64).sqrt() / 2.0;
    let pos = fs.half.iter().position(|p| *p == [3, 4, 0]).unwrap();
    draw.coeffs[pos] = field::Complex::new(amp, 0.0);
    let grid = field::synthesize_grid(&draw, 512, false).unwrap();
    let length = levelset::level_length(&grid, 0.0).unwrap().length;
    let oracle = arw_testkit::oracle_geodesic_length((3, 4), 2).unwrap();
    c.check(
        "marching squares length = 10 within 0.5%",
        (length - oracle).abs() <= 0.005 * oracle,
        format!("measured {length:.4} vs {oracle}"),
    );

    // crossing fixture: cos(2 pi 5 x1) against the circle r=0.2
    let mut stub5 = field::stub_draw(&fs, field::Complex::new(0.0, 0.0)).unwrap();
    let pos5 = fs.half.iter().position(|p| *p == [5, 0, 0]).unwrap();
    stub5.coeffs[pos5] = field::Complex::new(amp, 0.0);
    let curve = circle(0.2, 1024);
    let restriction = field::restrict_to_curve(&stub5, &curve);
    let count = levelset::crossings(&restriction, None).unwrap().count;
    c.check(
        "crossings fixture returns exactly 8",
        count == 8,
        format!("count = {count}"),
    );

    // marching-tetrahedra area of cos(2 pi x3)
    let fs3 = Arc::new(lattice::enumerate(1, 3).unwrap());
    let mut draw3 = field::stub_draw(&fs3, field::Complex::new(0.0, 0.0)).unwrap();
    let amp3 = (fs3.len() as f64).sqrt() / 2.0;
    let pos3 = fs3.half.iter().position(|p| *p == [0, 0, 1]).unwrap();
    draw3.coeffs[pos3] = field::Complex::new(amp3, 0.0);
    let grid3 = field::synthesize_grid(&draw3, 32, false).unwrap();
    let area = levelset::nodal_area_3d(&grid3, 0.0).unwrap();
    c.check(
        "3D nodal area of cos(2 pi x3) = 2 within 1%",
        (area - 2.0).abs() <= 0.02,
        format!("measured {area:.4}"),
    );
    c.finish();
}

#[test]
fn criterion_10_surfaces() {
    let mut c = Checker::new("10");
    let sphere = surfaces::build_surface(
        &SurfaceSpec::Sphere { r: 0.2, cx: 0.5, cy: 0.5, cz: 0.5 },
        256,
    )
    .unwrap();
    let audit = surfaces::audit_surface(&sphere, 4).unwrap();
    c.check(
        "sphere I2 = 1/3 within 1e-3",
        (audit.i2 - 1.0 / 3.0).abs() < 1e-3,
        format!("I2 = {}", audit.i2),
    );
    c.check(
        "sphere I4 = 1/5 within 1e-3",
        (audit.i4 - 0.2).abs() < 1e-3,
        format!("I4 = {}", audit.i4),
    );
    let patch = surfaces::build_surface(
        &SurfaceSpec::FlatPatch { side: 0.3, cx: 0.5, cy: 0.5, cz: 0.5 },
        64,
    )
    .unwrap();
    let paudit = surfaces::audit_surface(&patch, 8).unwrap();
    c.check(
        "flat patch I_k = 1 exactly",
        paudit.ik.iter().all(|(_, v)| *v == 1.0),
        format!("{:?}", paudit.ik),
    );
    let fs = lattice::enumerate(1009, 3).unwrap();
    let fm = lattice::fourth_moment_sums(&fs).unwrap();
    let sums = surfaces::mixed_lattice_surface_sums(&sphere, &fs).unwrap();
    c.check(
        "n=1009 pair fourth moment within 0.05 of 1/5",
        (fm.s4 - 0.2).abs() < 0.05,
        format!("{:.5}", fm.s4),
    );
    c.check(
        "n=1009 mean I(2,2) within 0.05 of 1/9",
        (sums.mean_i22 - 1.0 / 9.0).abs() < 0.05,
        format!("{:.5}", sums.mean_i22),
    );
    c.check(
        "n=1009 weighted mean within 0.05 of 11/225",
        (sums.mean_i22_weighted - 11.0 / 225.0).abs() < 0.05,
        format!("{:.5}", sums.mean_i22_weighted),
    );
    c.finish();
}

#[test]
fn criterion_11_determinism() {
    let mut c = Checker::new("11");
    let base = EnsembleConfig {
        n: 25,
        dim: 2,
        mode: Mode::Field,
        samples: 40,
        grid_m: 128,
        levels: vec![0.0, 1.0],
        curves: vec![CurveSpec::Circle { r: 0.2, cx: 0.5, cy: 0.5 }],
        surface: None,
        quad_nodes: 1024,
        master_seed: 4242,
        threads: Some(1),
    };
    let t1 = mc::run_ensemble(&base).unwrap();
    let mut cfg8 = base.clone();
    cfg8.threads = Some(8);
    let t8 = mc::run_ensemble(&cfg8).unwrap();
    c.check(
        "field-mode CSV bytes identical for 1 and 8 workers",
        t1.to_csv().as_bytes() == t8.to_csv().as_bytes(),
        format!("{} rows compared", t1.rows.len()),
    );
    let t1_again = mc::run_ensemble(&base).unwrap();
    c.check(
        "rerun with the same manifest reproduces the CSV",
        t1.to_csv() == t1_again.to_csv(),
        "byte-for-byte".into(),
    );

    // through the binary, honoring ARW_THREADS
    let dir1 = std::env::temp_dir().join("arw_acc_det1");
    let dir8 = std::env::temp_dir().join("arw_acc_det8");
    for (dir, threads) in [(&dir1, "1"), (&dir8, "8")] {
        let _ = std::fs::remove_dir_all(dir);
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_arw"))
            .env("ARW_THREADS", threads)
            .args([
                "simulate",
                "--n",
                "25",
                "--mode",
                "chaos",
                "--samples",
                "500",
                "--levels",
                "0,1,2",
                "--curve",
                "circle:r=0.2",
                "--seed",
                "11",
                "--out",
                dir.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir1.join("ensemble.csv")).unwrap();
    let b = std::fs::read(dir8.join("ensemble.csv")).unwrap();
    c.check(
        "arw simulate reruns byte-identical with ARW_THREADS in {1, 8}",
        a == b,
        format!("{} bytes", a.len()),
    );
    c.finish();
}

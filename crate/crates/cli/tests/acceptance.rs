//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p fusionframe-cli --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use fusionframe::admissibility::majorizes;
use fusionframe::flow::blocks_norm;
use fusionframe::{
    check_property_s, classify_critical_point, descend, extrinsic_gradient, ffp,
    find_unitary_equivalence, instability_certificate, is_tight, plucker_embed,
    random_fusion_frame, riemannian_gradient, welch_bound, Complex64, DMatrix, DescentSettings,
    Field, FrameConfig, OperatorFrame, Scalar,
};
use fusionframe_cli::reproduce::{ffp_floor, reproduce};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (u32, fn() -> Outcome, Duration);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<T: Scalar>(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| T::sample_gaussian(r))
}

fn random_unitary<T: Scalar>(k: usize, r: &mut ChaCha8Rng) -> DMatrix<T> {
    gaussian::<T>(k, k, r).qr().q()
}

fn e1e1e2() -> OperatorFrame<f64> {
    OperatorFrame::from_vectors(&DMatrix::from_row_slice(
        3,
        2,
        &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0],
    ))
    .unwrap()
}

/// Copies of a rotated orthonormal basis, each cut into blocks.
fn orthonormal_sum<T: Scalar>(
    d: usize,
    cuts: &[usize],
    copies: usize,
    r: &mut ChaCha8Rng,
) -> OperatorFrame<T> {
    let mut blocks = Vec::new();
    for _ in 0..copies {
        let v = random_unitary::<T>(d, r);
        let mut row = 0;
        for &k in cuts {
            blocks.push(random_unitary::<T>(k, r) * v.rows(row, k));
            row += k;
        }
    }
    OperatorFrame::new(d, blocks).unwrap()
}

/// `m` equally spaced lines in the plane, rotated.
fn mercedes_benz<T: Scalar>(m: usize, r: &mut ChaCha8Rng) -> OperatorFrame<T> {
    let phase = r.random::<f64>();
    let vectors = DMatrix::from_fn(m, 2, |j, c| {
        let theta = phase + std::f64::consts::PI * j as f64 / m as f64;
        T::from_real(if c == 0 { theta.cos() } else { theta.sin() })
    });
    let frame = OperatorFrame::from_vectors(&vectors).unwrap();
    let left: Vec<_> = (0..m).map(|_| DMatrix::identity(1, 1)).collect();
    frame
        .transformed(&left, &random_unitary::<T>(2, r))
        .unwrap()
}

fn tff_zoo(r: &mut ChaCha8Rng) -> Vec<(String, f64, f64, bool)> {
    // (label, ffp, welch bound, property-S violated)
    fn entry<T: Scalar>(label: String, f: &OperatorFrame<T>) -> (String, f64, f64, bool) {
        let violated = check_property_s(f, 1e-8).unwrap().is_violated();
        (label, ffp(f), welch_bound(&f.config()), violated)
    }
    let mut out = Vec::new();
    for i in 0..10 {
        let copies = 1 + i % 3;
        out.push(entry(
            format!("sum-real-{i}"),
            &orthonormal_sum::<f64>(4, &[1, 3], copies, r),
        ));
        out.push(entry(
            format!("sum-complex-{i}"),
            &orthonormal_sum::<Complex64>(3, &[2, 1], copies, r),
        ));
    }
    for m in 3..8 {
        out.push(entry(format!("mb-{m}"), &mercedes_benz::<f64>(m, r)));
        out.push(entry(
            format!("mb-complex-{m}"),
            &mercedes_benz::<Complex64>(m, r),
        ));
    }
    out
}

fn configs() -> Vec<FrameConfig> {
    let shapes: &[(usize, &[usize])] = &[
        (2, &[1, 1]),
        (2, &[1, 1, 1]),
        (2, &[2, 1, 1]),
        (3, &[1, 1, 2]),
        (3, &[2, 2]),
        (3, &[1, 1, 1, 1]),
        (3, &[3, 1, 2]),
        (4, &[2, 2, 2]),
        (4, &[1, 3, 2]),
        (4, &[3, 3, 1, 1]),
    ];
    let mut out = Vec::new();
    for field in [Field::Real, Field::Complex] {
        for &(d, ranks) in shapes {
            out.push(FrameConfig::new(field, d, ranks.to_vec()).unwrap());
        }
    }
    out
}

fn ffp_of(config: &FrameConfig, seed: u64) -> f64 {
    match config.field() {
        Field::Real => ffp(&random_fusion_frame::<f64>(config, seed).unwrap()),
        Field::Complex => ffp(&random_fusion_frame::<Complex64>(config, seed).unwrap()),
    }
}

fn criterion_1() -> Outcome {
    let configs = configs();
    let mut worst = f64::INFINITY;
    for i in 0..200 {
        let config = &configs[i % configs.len()];
        let gap = ffp_of(config, i as u64) - welch_bound(config);
        ensure!(
            gap >= -1e-9,
            "{config:?} seed {i}: FFP below the bound by {gap:e}"
        );
        worst = worst.min(gap);
    }
    let zoo = tff_zoo(&mut rng(1));
    let mut tff_err: f64 = 0.0;
    for (label, value, bound, _) in zoo.iter().take(20) {
        let err = (value - bound).abs();
        ensure!(err <= 1e-9, "{label}: |FFP - n^2/d| = {err:e}");
        tff_err = tff_err.max(err);
    }
    Ok(format!(
        "200 random frames, min gap {worst:.3e}; 20 TFFs, max |FFP - n^2/d| {tff_err:.1e}"
    ))
}

fn perturbed<T: Scalar>(f: &OperatorFrame<T>, i: usize, r: usize, c: usize, delta: T) -> f64 {
    let mut blocks = f.blocks().to_vec();
    blocks[i][(r, c)] += delta;
    ffp(&OperatorFrame::new(f.d(), blocks).unwrap())
}

fn fd_error<T: Scalar>(seed: u64, unit: T) -> f64 {
    let mut r = rng(seed);
    let d = 2 + seed as usize % 3;
    let ranks: Vec<usize> = (0..3).map(|i| 1 + (i + seed as usize) % d).collect();
    let blocks: Vec<_> = ranks.iter().map(|&k| gaussian::<T>(k, d, &mut r)).collect();
    let frame = OperatorFrame::new(d, blocks).unwrap();
    let grad = extrinsic_gradient(&frame);
    let h = 1e-5;
    let mut err = 0.0;
    for (i, g) in grad.iter().enumerate() {
        for row in 0..g.nrows() {
            for col in 0..g.ncols() {
                for u in [T::from_real(1.0), unit] {
                    let step = u * T::from_real(h);
                    let numeric = (perturbed(&frame, i, row, col, step)
                        - perturbed(&frame, i, row, col, -step))
                        / (2.0 * h);
                    let analytic = (u.conjugate() * g[(row, col)]).real();
                    err += (numeric - analytic).powi(2);
                }
            }
        }
    }
    err.sqrt() / blocks_norm(&grad)
}

fn criterion_2() -> Outcome {
    let mut worst_fd: f64 = 0.0;
    for seed in 0..10 {
        worst_fd = worst_fd.max(fd_error::<f64>(seed, 1.0));
        worst_fd = worst_fd.max(fd_error(seed + 10, Complex64::new(0.0, 1.0)));
    }
    ensure!(
        worst_fd <= 1e-6,
        "finite-difference relative error {worst_fd:e}"
    );
    let configs = configs();
    let mut worst_h: f64 = 0.0;
    for i in 0..20 {
        let config = &configs[i % configs.len()];
        let h = match config.field() {
            Field::Real => horizontal::<f64>(config, i as u64),
            Field::Complex => horizontal::<Complex64>(config, i as u64),
        };
        worst_h = worst_h.max(h);
    }
    ensure!(worst_h <= 1e-10, "max |grad_i A_i*| = {worst_h:e}");
    Ok(format!(
        "FD relative error {worst_fd:.1e} at 20 points; horizontality {worst_h:.1e} at 20 frames"
    ))
}

fn horizontal<T: Scalar>(config: &FrameConfig, seed: u64) -> f64 {
    let f: OperatorFrame<T> = random_fusion_frame(config, seed).unwrap();
    riemannian_gradient(&f)
        .unwrap()
        .iter()
        .zip(f.blocks())
        .map(|(g, a)| (g * a.adjoint()).norm())
        .fold(0.0, f64::max)
}

fn criterion_3() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let settings = DescentSettings {
        step_size: 1e-2,
        ..Default::default()
    };
    let s = reproduce(100, 0, &settings, dir.path()).map_err(|e| e.to_string())?;
    ensure!(
        s.fraction_reached_minimum >= 0.95,
        "only {} of 100 runs reached 11/2",
        s.reached_minimum
    );
    ensure!(
        s.converged_above_floor,
        "a converged run ended at or below {}",
        ffp_floor()
    );
    ensure!(
        s.geometry_ok,
        "Mercedes-Benz angles off by {:e}",
        s.max_angle_error
    );
    ensure!(
        s.max_angle_error <= 1e-3,
        "angle error {:e}",
        s.max_angle_error
    );
    Ok(format!(
        "{}/100 at 11/2, max angle error {:.1e} rad, dihedral angle in [{:.6}, {:.6}]",
        s.reached_minimum, s.max_angle_error, s.dihedral_angle_min, s.dihedral_angle_max
    ))
}

fn tighten_batch<T: Scalar>(
    config: &FrameConfig,
    target: f64,
    tol: f64,
    need_tight: bool,
) -> Result<usize, String> {
    let settings = DescentSettings::default();
    let mut max_iters = 0;
    for seed in 0..50 {
        let start: OperatorFrame<T> = random_fusion_frame(config, seed).unwrap();
        let trace = descend(&start, &settings).map_err(|e| e.to_string())?;
        let value = trace.final_ffp();
        ensure!(
            (value - target).abs() <= tol,
            "{config:?} seed {seed}: FFP {value}"
        );
        ensure!(
            !need_tight || is_tight(&trace.final_frame, 1e-8),
            "{config:?} seed {seed}: not tight"
        );
        max_iters = max_iters.max(trace.iterations);
    }
    Ok(max_iters)
}

fn criterion_4() -> Outcome {
    let real = FrameConfig::new(Field::Real, 2, vec![1; 4]).unwrap();
    let cplx = real.with_field(Field::Complex);
    let blocks = FrameConfig::new(Field::Real, 4, vec![2, 2, 2]).unwrap();
    let a = tighten_batch::<f64>(&real, 8.0, 1e-6, true)?;
    let b = tighten_batch::<Complex64>(&cplx, 8.0, 1e-6, true)?;
    let c = tighten_batch::<f64>(&blocks, 9.0, 1e-4, false)?;
    Ok(format!("150/150 runs at n^2/d, the planar ones tight; max iterations {a} (R^2), {b} (C^2), {c} (R^4)"))
}

fn criterion_5() -> Outcome {
    let frame = e1e1e2();
    let report = classify_critical_point(&frame, 1e-8).map_err(|e| e.to_string())?;
    ensure!(
        report.is_critical && !report.is_tight,
        "e1,e1,e2 should be critical and not tight"
    );
    let cert = instability_certificate(&frame, 1e-8)
        .map_err(|e| e.to_string())?
        .ok_or("no certificate")?;
    ensure!(
        cert.weight_exponent == 1,
        "exponent {}",
        cert.weight_exponent
    );
    let verdict = check_property_s(&frame, 1e-8).map_err(|e| e.to_string())?;
    let w = verdict.witness().ok_or("e1,e1,e2 not violated")?;
    ensure!(
        w.dim() == 1 && (w.basis[(0, 0)].abs() - 1.0).abs() <= 1e-12,
        "witness is not span(e1)"
    );
    ensure!((w.margin() - 0.5).abs() <= 1e-12, "margin {}", w.margin());

    let config = FrameConfig::new(Field::Real, 3, vec![1, 1, 2]).unwrap();
    for seed in 0..20 {
        let f: OperatorFrame<f64> = random_fusion_frame(&config, seed).unwrap();
        ensure!(
            check_property_s(&f, 1e-8)
                .map_err(|e| e.to_string())?
                .is_violated(),
            "(1,1,2) seed {seed} not violated"
        );
    }
    let zoo = tff_zoo(&mut rng(5));
    for (label, _, _, violated) in &zoo {
        ensure!(!violated, "TFF {label} reported violated");
    }
    Ok(format!(
        "exponent 1, margin 1/2; 20/20 (1,1,2) frames violated; 0/{} TFFs violated",
        zoo.len()
    ))
}

fn criterion_6() -> Outcome {
    let configs = configs();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let config = &configs[i % configs.len()];
        let norm = match config.field() {
            Field::Real => {
                plucker_embed(&random_fusion_frame::<f64>(config, i as u64).unwrap()).norm()
            }
            Field::Complex => {
                plucker_embed(&random_fusion_frame::<Complex64>(config, i as u64).unwrap()).norm()
            }
        };
        worst = worst.max((norm - 1.0).abs());
    }
    ensure!(worst <= 1e-10, "|norm - 1| = {worst:e}");
    let frame = e1e1e2();
    let cert = instability_certificate(&frame, 1e-8).unwrap().unwrap();
    let base = plucker_embed(&frame).norm();
    let mut worst_scale: f64 = 0.0;
    for t in [0.9, 0.5, 0.1] {
        let moved = plucker_embed(&cert.act(&frame, t).unwrap()).norm();
        let expected = t.powi((cert.m * cert.d) as i32 - (cert.n * cert.ell) as i32) * base;
        worst_scale = worst_scale.max((moved - expected).abs() / expected);
    }
    ensure!(worst_scale <= 1e-8, "scaling law off by {worst_scale:e}");
    Ok(format!(
        "|norm - 1| <= {worst:.1e}; scaling law relative error {worst_scale:.1e}"
    ))
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let (k, m) = (1 + trial % 4, 2 + trial % 5);
        let a = gaussian::<Complex64>(k, m, &mut r);
        let b = random_unitary::<Complex64>(k, &mut r) * &a;
        let u = find_unitary_equivalence(&a, &b, 1e-9)
            .map_err(|e| e.to_string())?
            .ok_or(format!("trial {trial}: no unitary found"))?;
        worst = worst.max((u * &a - &b).norm());
    }
    ensure!(worst <= 1e-10, "|UA - U0 A| = {worst:e}");
    Ok(format!("100 round trips, max |UA - U0 A| {worst:.1e}"))
}

fn criterion_8() -> Outcome {
    let m = |l: &[f64], r: &[f64]| majorizes(l, r, 0.0).map_err(|e| e.to_string());
    ensure!(
        m(&[5.0, 5.0], &[3.0, 3.0, 3.0, 1.0])?,
        "(5,5) should majorize (3,3,3,1)"
    );
    for (n, d) in [(4usize, 2usize), (5, 3), (7, 4)] {
        let lambda = vec![n as f64 / d as f64; d];
        ensure!(
            majorizes(&lambda, &vec![1.0; n], 1e-12).unwrap(),
            "({n}/{d}, ...) vs ones"
        );
    }
    ensure!(
        !m(&[5.0, 5.0], &[3.0, 3.0, 3.0, 2.0])?,
        "trace mismatch accepted"
    );
    ensure!(!m(&[2.0, 1.0], &[1.0, 1.0])?, "trace mismatch accepted");
    ensure!(!m(&[1.0, 1.0], &[1.0])?, "trace mismatch accepted");
    Ok("all 7 instances decided correctly".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        (1, criterion_1, Duration::from_secs(5)),
        (2, criterion_2, Duration::from_secs(5)),
        (3, criterion_3, Duration::from_secs(60)),
        (4, criterion_4, Duration::from_secs(60)),
        (5, criterion_5, Duration::from_secs(10)),
        (6, criterion_6, Duration::from_secs(5)),
        (7, criterion_7, Duration::from_secs(2)),
        (8, criterion_8, Duration::from_secs(1)),
    ];
    let mut failures = 0;
    for (n, check, budget) in criteria {
        let started = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = started.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > budget => Err(format!("took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!(
                "criterion {n}: PASS ({detail}; {:.2} s)",
                elapsed.as_secs_f64()
            ),
            Err(why) => {
                failures += 1;
                println!("criterion {n}: FAIL ({why})");
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}

//! Acceptance gate. Each criterion runs independently and prints one
//! `PASS`/`FAIL` line; the target exits nonzero if any criterion fails.
//!
//! Run with `cargo test -p gronwall-cli --test acceptance`.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode, Output};
use std::thread;

use gronwall_core::linsys::{integrate_system, norm_envelope, LinearSystem};
use gronwall_core::oracle::{
    equality_case, generate_coefficients, generate_instances, generate_systems,
    scaled_identity_system, RandomInstanceSpec,
};
use gronwall_core::riccati::{
    build_comparison, check_comparison_hypotheses_with, integration_by_parts, riccati_residual,
    solve_riccati, verify_comparison, ComparisonSetup, RiccatiCoeffs, SquaredDifference,
};
use gronwall_core::{classic_bound, cumulative, general_bound, two_sided_envelope, Grid, Signal};
use nalgebra::DMatrix;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn unit_grid(n: usize) -> Grid {
    Grid::new(0.0, 1.0, n).unwrap()
}

fn tightness_and_reduction() -> Verdict {
    let spec = RandomInstanceSpec {
        seed: 101,
        count: 50,
        n: 2001,
        ..Default::default()
    };
    let mut worst_tight: f64 = 0.0;
    let mut tight_ok = 0;
    for p in generate_instances(&spec).unwrap() {
        let b = general_bound(&p).unwrap();
        let u = equality_case(&p).unwrap();
        let rel = b
            .iter()
            .zip(&u.values)
            .map(|(b, u)| (b - u).abs() / u.abs())
            .fold(0.0, f64::max);
        worst_tight = worst_tight.max(rel);
        tight_ok += (rel <= 1e-4) as usize;
    }

    let spec = RandomInstanceSpec { seed: 102, ..spec };
    let mut worst_reduction: f64 = 0.0;
    let mut reduction_ok = 0;
    for mut p in generate_instances(&spec).unwrap() {
        p.f = Signal::constant(0.0);
        let a = classic_bound(&p).unwrap();
        let b = general_bound(&p).unwrap();
        let rel = a
            .iter()
            .zip(&b)
            .map(|(a, b)| (a - b).abs() / a.abs())
            .fold(0.0, f64::max);
        worst_reduction = worst_reduction.max(rel);
        reduction_ok += (rel <= 1e-12) as usize;
    }
    Verdict::new(
        tight_ok == 50 && reduction_ok == 50,
        format!(
            "tight {tight_ok}/50 (worst rel {worst_tight:.2e}), f = 0 reduction {reduction_ok}/50 (worst rel {worst_reduction:.2e})"
        ),
    )
}

fn envelope_containment() -> Verdict {
    let spec = RandomInstanceSpec {
        seed: 201,
        count: 100,
        n: 10001,
        ..Default::default()
    };
    let slack = |x: f64| 1e-7 * (1.0 + x.abs());
    let mut inside = 0;
    let mut scaled_inside = 0;
    for (k, p) in generate_instances(&spec).unwrap().iter().enumerate() {
        let u = equality_case(p).unwrap();
        let e = two_sided_envelope(p.c, &p.v, &p.f, &p.grid).unwrap();
        inside += e.contains(&u.values, slack) as usize;

        // Deterministic factor in (0, 1].
        let r = 1.0 - (k as f64 * 0.618_033_988_749_895).fract() * 0.99;
        let scaled: Vec<f64> = u.values.iter().map(|x| r * x).collect();
        let own = two_sided_envelope(scaled[0], &p.v, &p.f, &p.grid).unwrap();
        scaled_inside += scaled
            .iter()
            .zip(&own.upper)
            .all(|(x, hi)| *x <= hi + slack(*x)) as usize;
    }
    Verdict::new(
        inside == 100 && scaled_inside == 100,
        format!("equality case inside {inside}/100, scaled trajectories below upper {scaled_inside}/100"),
    )
}

fn linear_system_containment() -> Verdict {
    let grid = unit_grid(2001);
    let systems = generate_systems(301, 100, 3, grid).unwrap();
    let contained = systems
        .iter()
        .filter(|s| norm_envelope(s).unwrap().contained)
        .count();

    let lambda = 1.5;
    let y0 = vec![0.6, -0.8, 0.3];
    let grow = norm_envelope(&scaled_identity_system(lambda, y0.clone(), grid).unwrap()).unwrap();
    let decay = norm_envelope(&scaled_identity_system(-lambda, y0, grid).unwrap()).unwrap();
    let gap = |side: &[f64], actual: &[f64]| {
        side.iter()
            .zip(actual)
            .map(|(s, a)| (s - a).abs() / a.abs())
            .fold(0.0, f64::max)
    };
    let upper_gap = gap(&grow.envelope.upper, &grow.actual_norm);
    let lower_gap = gap(&decay.envelope.lower, &decay.actual_norm);
    Verdict::new(
        contained == 100 && upper_gap <= 1e-4 && lower_gap <= 1e-4,
        format!("contained {contained}/100, lambda I upper gap {upper_gap:.2e}, -lambda I lower gap {lower_gap:.2e}"),
    )
}

fn comparison_construction() -> Verdict {
    let spec = RandomInstanceSpec {
        seed: 401,
        count: 50,
        n: 40001,
        smooth: true,
        ..Default::default()
    };
    let problems = generate_instances(&spec).unwrap();
    let results: Vec<[bool; 4]> = thread::scope(|s| {
        let handles: Vec<_> = problems
            .chunks(problems.len().div_ceil(8))
            .map(|chunk| {
                s.spawn(move || {
                    chunk
                        .iter()
                        .map(|p| {
                            let u =
                                Signal::sampled(p.grid, equality_case(p).unwrap().values).unwrap();
                            let cmp = build_comparison(p, &u).unwrap();
                            [
                                cmp.min_quadratic() >= -1e-9,
                                riccati_residual(&cmp.riccati, &cmp.y)
                                    .unwrap()
                                    .satisfies_equation(),
                                riccati_residual(&cmp.linear, &cmp.x)
                                    .unwrap()
                                    .satisfies_equation(),
                                verify_comparison(&cmp.y, &cmp.x).unwrap().holds,
                            ]
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().unwrap())
            .collect()
    });
    let count = |k: usize| results.iter().filter(|r| r[k]).count();
    let (quad, y_res, x_res, cmp) = (count(0), count(1), count(2), count(3));
    Verdict::new(
        [quad, y_res, x_res, cmp].iter().all(|&c| c == 50),
        format!("quadratic >= -1e-9 {quad}/50, y residual {y_res}/50, x residual {x_res}/50, y <= x {cmp}/50"),
    )
}

fn hypothesis_checker() -> Verdict {
    let g = unit_grid(201);
    let rc = RiccatiCoeffs::new(1.0, Signal::from_fn(f64::sin), -0.5);
    let sol = solve_riccati(&rc, 0.2, &g).unwrap();
    let identical = ComparisonSetup {
        eq1: rc.clone(),
        eq2: rc,
        y2: sol.clone(),
        eta1: sol.clone(),
        eta2: sol,
        gamma: 0.2,
    };
    let same =
        check_comparison_hypotheses_with(&identical, &g, SquaredDifference::AsPrinted).unwrap();
    let curve_max = same
        .integral_curve
        .iter()
        .fold(0.0, |m: f64, x| m.max(x.abs()));
    let identical_ok = same.condition_holds && curve_max <= 1e-10;

    let spec = RandomInstanceSpec {
        seed: 501,
        count: 1,
        n: 20001,
        smooth: true,
        ..Default::default()
    };
    let p = &generate_instances(&spec).unwrap()[0];
    let u = Signal::sampled(p.grid, equality_case(p).unwrap().values).unwrap();
    let derived = build_comparison(p, &u).unwrap().setup();
    let both_modes = [SquaredDifference::AsPrinted, SquaredDifference::Linear]
        .into_iter()
        .all(|mode| {
            check_comparison_hypotheses_with(&derived, &p.grid, mode)
                .unwrap()
                .condition_holds
        });

    let mut negative = identical;
    negative.eq1.f = Signal::constant(-1.0);
    let flipped = !check_comparison_hypotheses_with(&negative, &g, SquaredDifference::AsPrinted)
        .unwrap()
        .condition_holds;

    Verdict::new(
        identical_ok && both_modes && flipped,
        format!(
            "identical equations hold with curve max {curve_max:.2e}, derived pair holds in both modes: {both_modes}, negative f1 rejected: {flipped}"
        ),
    )
}

fn parts_identity() -> Verdict {
    let spec = RandomInstanceSpec {
        seed: 601,
        count: 20,
        smooth: true,
        ..Default::default()
    };
    let (mut within, mut shrinking) = (0, 0);
    let (mut worst_rel, mut worst_ratio): (f64, f64) = (0.0, f64::INFINITY);
    for coeffs in generate_coefficients(&spec) {
        let v = coeffs.v_poly.abs_signal();
        let f = coeffs.f_poly.abs_signal();
        let coarse = integration_by_parts(&v, &f, &unit_grid(2001)).unwrap();
        let fine = integration_by_parts(&v, &f, &unit_grid(4001)).unwrap();
        let rel = coarse.max_relative_discrepancy();
        let ratio = coarse.max_discrepancy() / fine.max_discrepancy();
        worst_rel = worst_rel.max(rel);
        worst_ratio = worst_ratio.min(ratio);
        within += (rel <= 1e-5) as usize;
        shrinking += (ratio >= 3.5) as usize;
    }
    Verdict::new(
        within == 20 && shrinking == 20,
        format!(
            "within 1e-5 {within}/20 (worst {worst_rel:.2e}), shrink >= 3.5x {shrinking}/20 (smallest {worst_ratio:.2})"
        ),
    )
}

fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn convergence_orders() -> Verdict {
    let trapezoid: Vec<f64> = [11, 21, 41, 81]
        .into_iter()
        .map(|n| {
            let g = unit_grid(n);
            let q = cumulative(&Signal::from_fn(f64::exp), &g).unwrap();
            g.nodes()
                .zip(q.values())
                .map(|(t, q)| (q - (t.exp() - 1.0)).abs())
                .fold(0.0, f64::max)
        })
        .collect();

    let rotation = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let rk4: Vec<f64> = [21, 41, 81, 161]
        .into_iter()
        .map(|n| {
            let g = Grid::new(0.0, 2.0 * PI, n).unwrap();
            let sys = LinearSystem::constant(&rotation, &[0.0, 0.0], vec![1.0, 0.0], g).unwrap();
            let ys = integrate_system(&sys).unwrap();
            g.nodes()
                .zip(&ys)
                .map(|(t, y)| f64::hypot(y[0] - t.cos(), y[1] + t.sin()))
                .fold(0.0, f64::max)
        })
        .collect();

    let trap_orders = orders(&trapezoid);
    let rk4_orders = orders(&rk4);
    let pass = trap_orders.iter().all(|&p| p >= 1.9) && rk4_orders.iter().all(|&p| p >= 3.8);
    let fmt = |o: &[f64]| {
        o.iter()
            .map(|p| format!("{p:.3}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    Verdict::new(
        pass,
        format!(
            "trapezoid orders [{}], RK4 orders [{}]",
            fmt(&trap_orders),
            fmt(&rk4_orders)
        ),
    )
}

fn run_cli(config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gronwall"))
        .arg(config)
        .output()
        .expect("run gronwall")
}

/// Runs a job twice and returns the first run with its CSV, or a reason
/// the two runs differ.
fn run_twice(dir: &Path, name: &str, job: &str) -> Result<(Output, Option<Vec<u8>>), String> {
    let config = dir.join(format!("{name}.json"));
    let csv = dir.join(format!("{name}.csv"));
    fs::write(&config, job.replace("@OUT@", &csv.display().to_string())).unwrap();
    let mut runs = Vec::new();
    for _ in 0..2 {
        let _ = fs::remove_file(&csv);
        let out = run_cli(&config);
        let bytes = fs::read(&csv).ok();
        runs.push((out, bytes));
    }
    let (a, b) = (&runs[0], &runs[1]);
    if a.0.status.code() != b.0.status.code()
        || a.0.stdout != b.0.stdout
        || a.0.stderr != b.0.stderr
        || a.1 != b.1
    {
        return Err(format!("{name}: runs differ"));
    }
    Ok(runs.swap_remove(0))
}

fn cli_end_to_end() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut notes = Vec::new();

    let constant = run_twice(
        dir.path(),
        "constant",
        r#"{"mode": "bound", "t0": 0, "t1": 1, "n": 101, "c": 1, "v": "0", "output": "@OUT@"}"#,
    );
    let constant_ok = match constant {
        Ok((out, Some(csv))) => {
            let text = String::from_utf8(csv).unwrap();
            let mut lines = text.lines();
            let header_ok = lines.next() == Some("t,classic_bound,general_bound");
            let rows: Vec<f64> = lines
                .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
                .collect();
            out.status.code() == Some(0)
                && header_ok
                && rows.len() == 101
                && rows.iter().all(|&x| x == 1.0)
        }
        Ok((_, None)) => false,
        Err(e) => {
            notes.push(e);
            false
        }
    };

    let rotation = run_twice(
        dir.path(),
        "rotation",
        r#"{"mode": "linsys", "t0": 0, "t1": 6.283185307179586, "n": 2001,
            "a": [[0, 1], [-1, 0]], "y0": [1, 0], "output": "@OUT@"}"#,
    );
    let rotation_ok = match rotation {
        Ok((out, Some(_))) => {
            out.status.code() == Some(0)
                && String::from_utf8_lossy(&out.stdout).contains("contained: true")
        }
        Ok((_, None)) => false,
        Err(e) => {
            notes.push(e);
            false
        }
    };

    let invalid = run_twice(
        dir.path(),
        "invalid",
        r#"{"mode": "bound", "t0": 0, "t1": 1, "n": 101, "c": 1, "v": "-1", "output": "@OUT@"}"#,
    );
    let invalid_ok = match invalid {
        Ok((out, csv)) => {
            out.status.code() == Some(2)
                && csv.is_none()
                && String::from_utf8_lossy(&out.stderr).contains("v(t) >= 0")
        }
        Err(e) => {
            notes.push(e);
            false
        }
    };

    let mut detail = format!(
        "constant bound: {constant_ok}, rotation contained: {rotation_ok}, invalid v rejected: {invalid_ok}"
    );
    if !notes.is_empty() {
        detail.push_str(&format!(" ({})", notes.join("; ")));
    }
    Verdict::new(constant_ok && rotation_ok && invalid_ok, detail)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "1 bound tightness and f = 0 reduction",
            tightness_and_reduction,
        ),
        ("2 two-sided envelope containment", envelope_containment),
        ("3 linear system norm envelope", linear_system_containment),
        (
            "4 Riccati/linear comparison construction",
            comparison_construction,
        ),
        ("5 comparison hypothesis checker", hypothesis_checker),
        ("6 integration-by-parts identity", parts_identity),
        ("7 convergence orders", convergence_orders),
        ("8 CLI end to end", cli_end_to_end),
    ];
    let verdicts: Vec<Verdict> = thread::scope(|s| {
        let handles: Vec<_> = criteria.iter().map(|(_, run)| s.spawn(run)).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut failed = Vec::new();
    for ((name, _), v) in criteria.iter().zip(&verdicts) {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {name}: {}", v.detail);
        if !v.pass {
            failed.push(*name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}

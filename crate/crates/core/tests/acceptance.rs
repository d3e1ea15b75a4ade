//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). Failures are reported but
//! only fail the process when `TRIWAVE_ACCEPTANCE_STRICT=1`.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use triwave::analytic::{
    mode_boundary_exact, reference_altitude, reference_triangle, square_exact, IsoscelesMode,
    SineSeries1D,
};
use triwave::cli::{random_field, square_quadrature, ONED_ENVELOPE};
use triwave::discretization::assemble;
use triwave::geometry::Classification;
use triwave::initial::InitialData;
use triwave::mesh::refine_uniform;
use triwave::observability::poincare_check;
use triwave::simulation::{run, ObservabilityReport, Schedule};
use triwave::timestepper::cfl_dt;
use triwave::{SideLabel, Triangle, Vec2};

const SEED: u64 = 1;
const SAFETY: f64 = 0.5;

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn acute() -> Triangle {
    Triangle::from_vertices(
        Vec2::new(0.0, 0.0),
        Vec2::new(3.0, 0.0),
        Vec2::new(1.0, 2.0),
    )
    .unwrap()
}

fn obtuse() -> Triangle {
    Triangle::from_vertices(
        Vec2::new(0.0, 0.0),
        Vec2::new(3.0, 0.0),
        Vec2::new(-1.0, 1.0),
    )
    .unwrap()
}

struct Run {
    reports: Vec<ObservabilityReport>,
    elapsed: Duration,
}

fn simulate(tri: &Triangle, side: SideLabel, data: &InitialData, level: u32, times: &[f64]) -> Run {
    let start = Instant::now();
    let mesh = refine_uniform(tri, level).unwrap();
    let pair = assemble(&mesh, true).unwrap();
    let (u0, u1) = data.project(&mesh).unwrap();
    let dt = cfl_dt(&pair, SAFETY).unwrap();
    let schedule = Schedule {
        dt_max: dt,
        final_times: times,
        stride: 1,
    };
    let traj = run(&mesh, &pair, &tri.frame(side), u0, &u1, schedule).unwrap();
    Run {
        reports: traj.reports().unwrap(),
        elapsed: start.elapsed(),
    }
}

fn observation_times(tri: &Triangle) -> Vec<f64> {
    let l = tri.longest_side();
    [5.0, 10.0, 20.0, 40.0].iter().map(|k| k * l).collect()
}

/// |R - 1| <= 6 L / T at every T and |R(40L) - 1| < |R(5L) - 1|.
fn asymptotic(id: &'static str, tri: &Triangle, run: &Run) -> Outcome {
    let l = tri.longest_side();
    let mut pass = true;
    let mut parts = Vec::new();
    for r in &run.reports {
        let dev = (r.ratio - 1.0).abs();
        let bound = 6.0 * l / r.t_final;
        pass &= dev <= bound;
        parts.push(format!(
            "T={:.2}: |R-1|={dev:.4e} (<= {bound:.3})",
            r.t_final
        ));
    }
    let first = (run.reports[0].ratio - 1.0).abs();
    let last = (run.reports[run.reports.len() - 1].ratio - 1.0).abs();
    let decays = last < first;
    pass &= decays;
    parts.push(format!("|R(40L)-1| < |R(5L)-1|: {decays}"));
    Outcome {
        id,
        pass,
        detail: parts.join("; "),
    }
}

fn line(o: &Outcome) {
    println!(
        "{} {}  {}",
        o.id,
        if o.pass { "PASS" } else { "FAIL" },
        o.detail
    );
}

fn ac1(drifts: &mut Vec<f64>) -> Outcome {
    let tri = reference_triangle();
    let side = SideLabel::opposite(1).unwrap();
    let mode = IsoscelesMode::new(1, 2).unwrap();
    let exact = mode_boundary_exact(&mode, side, 10.0);
    let data = InitialData::Eigenmode { m: 1, n: 2 };
    let mut errs = Vec::new();
    let mut slowest = Duration::ZERO;
    for level in 4..=6 {
        let run = simulate(&tri, side, &data, level, &[10.0]);
        let r = &run.reports[0];
        drifts.push(r.energy_drift);
        errs.push(((r.boundary_integral - exact) / exact).abs());
        slowest = slowest.max(run.elapsed);
    }
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    let pass = errs[2] < 0.05 && monotone && slowest < Duration::from_secs(120);
    Outcome {
        id: "AC1",
        pass,
        detail: format!(
            "relative error levels 4,5,6 = {:.3e}, {:.3e}, {:.3e} (< 5e-2 at 6, monotone: {monotone}); slowest level {:.2?}",
            errs[0], errs[1], errs[2], slowest
        ),
    }
}

fn ac4(l5: &Run, l6: &Run) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (a, b) in l5.reports.iter().zip(&l6.reports) {
        let scale = b.t_final * b.e0;
        for k in 1..=2 {
            let rel = b.x_products[k].abs() / scale;
            let halving = b.x_products[k].abs() / a.x_products[k].abs();
            pass &= rel < 0.05 && (0.35..=0.65).contains(&halving);
            parts.push(format!(
                "T={:.0} {}: {rel:.2e}, 6/5 ratio {halving:.3}",
                b.t_final,
                ["", "B", "C"][k]
            ));
        }
    }
    Outcome {
        id: "AC4",
        pass,
        detail: format!(
            "|x_prod|/(T E0) < 5e-2, ratio in [0.35, 0.65]: {}",
            parts.join("; ")
        ),
    }
}

fn ac5(runs: &[Run]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for ti in 0..runs[0].reports.len() {
        let rel: Vec<f64> = runs
            .iter()
            .map(|r| r.reports[ti].commutator_residual / (r.reports[ti].t_final * r.reports[ti].e0))
            .collect();
        let decreasing = rel.windows(2).all(|w| w[1] < w[0]);
        pass &= rel[rel.len() - 1] < 0.05 && decreasing;
        parts.push(format!(
            "T={:.0}: {}",
            runs[0].reports[ti].t_final,
            rel.iter()
                .map(|v| format!("{v:.3e}"))
                .collect::<Vec<_>>()
                .join(" > ")
        ));
    }
    Outcome {
        id: "AC5",
        pass,
        detail: format!(
            "residual/(T E0), levels 4,5,6 (< 5e-2 at 6, decreasing): {}",
            parts.join("; ")
        ),
    }
}

fn trapezoid(t_final: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = t_final / n as f64;
    let inner: f64 = (1..n).map(|i| f(i as f64 * h)).sum();
    h * (0.5 * (f(0.0) + f(t_final)) + inner)
}

fn ac6() -> Outcome {
    let start = Instant::now();
    let ell = 1.0;
    let s = SineSeries1D::random(ell, 5, SEED).unwrap();
    let mut pass = true;
    let mut worst_scaled = 0.0f64;
    for k in 1..=10_000 {
        let t = k as f64 * ell;
        let scaled = (s.ratio(t).unwrap() - 1.0).abs() * t / ell;
        worst_scaled = worst_scaled.max(scaled);
    }
    pass &= worst_scaled <= ONED_ENVELOPE;
    let mut worst_rel = 0.0f64;
    for (t, n) in [
        (10.0 * ell, 20_000),
        (100.0 * ell, 200_000),
        (7.3 * ell, 2_000_000),
    ] {
        let oracle = trapezoid(t, n, |x| s.endpoint_flux(x).powi(2));
        let exact = s.boundary_integral(t);
        worst_rel = worst_rel.max(((oracle - exact) / exact).abs());
    }
    pass &= worst_rel < 1e-8;
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(1);
    Outcome {
        id: "AC6",
        pass,
        detail: format!(
            "max |R-1| T/ell over T in [ell, 1e4 ell] = {worst_scaled:.3} (<= {ONED_ENVELOPE}); trapezoid mismatch {worst_rel:.2e} (< 1e-8); {elapsed:.2?} (< 1 s)"
        ),
    }
}

fn ac7() -> Outcome {
    let t = 10.0;
    let mut worst = 0.0f64;
    let mut values = Vec::new();
    for n in 1..=16 {
        let r = square_exact(n, t).unwrap();
        let q = square_quadrature(n, t).unwrap();
        worst = worst.max(((q - r.boundary_integral) / r.boundary_integral).abs());
        values.push(r.ratio_per_energy);
    }
    let factor = values[0] / values[15];
    Outcome {
        id: "AC7",
        pass: factor >= 50.0 && worst < 1e-10,
        detail: format!("ratio-per-energy n=1 / n=16 = {factor:.1} (>= 50); quadrature mismatch {worst:.2e} (< 1e-10)"),
    }
}

fn ac9() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, tri) in [
        ("isosceles", reference_triangle()),
        ("acute", acute()),
        ("obtuse", obtuse()),
    ] {
        let mesh = refine_uniform(&tri, 5).unwrap();
        let pair = assemble(&mesh, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let frames = SideLabel::ALL.map(|s| tri.frame(s));
        let mut min_margin = f64::INFINITY;
        let mut max_ratio = 0.0f64;
        for _ in 0..1000 {
            let f = random_field(&mut rng, pair.dim());
            for frame in &frames {
                let c = poincare_check(&pair, &mesh, &f, frame).unwrap();
                min_margin = min_margin.min(c.margin());
                max_ratio = max_ratio.max(c.lhs / c.rhs);
            }
        }
        pass &= min_margin >= 0.0;
        parts.push(format!(
            "{name}: min margin {min_margin:.3e}, max lhs/rhs {max_ratio:.3}"
        ));
    }
    Outcome {
        id: "AC9",
        pass,
        detail: format!("1000 fields x 3 frames at level 5: {}", parts.join("; ")),
    }
}

fn ac10() -> Outcome {
    let mut worst = 0.0f64;
    for (m, n) in [(1, 2), (1, 3), (2, 3)] {
        let mode = IsoscelesMode::new(m, n).unwrap();
        for side in SideLabel::ALL {
            let target = 2.0 * mode.lambda_sq() / reference_altitude(side);
            worst = worst.max(((mode.side_flux_squared(side) - target) / target).abs());
        }
    }
    Outcome {
        id: "AC10",
        pass: worst < 1e-8,
        detail: format!("max relative deviation from 2 lambda^2 / ell = {worst:.2e} (< 1e-8)"),
    }
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture`; none apply.
    let mut drifts = Vec::new();
    let mut outcomes = vec![ac1(&mut drifts)];

    let data = InitialData::RandomSmooth { seed: SEED };
    let tri = acute();
    let side = SideLabel::opposite(0).unwrap();
    let times = observation_times(&tri);
    let acute_runs: Vec<Run> = (4..=6)
        .map(|l| simulate(&tri, side, &data, l, &times))
        .collect();
    outcomes.push(asymptotic("AC2", &tri, &acute_runs[2]));

    let tri_o = obtuse();
    let side_o = SideLabel::opposite(2).unwrap();
    assert_eq!(tri_o.frame(side_o).classification, Classification::Obtuse);
    let times_o = observation_times(&tri_o);
    let obtuse_run = simulate(&tri_o, side_o, &data, 6, &times_o);
    outcomes.push(asymptotic("AC3", &tri_o, &obtuse_run));

    outcomes.push(ac4(&acute_runs[1], &acute_runs[2]));
    outcomes.push(ac5(&acute_runs));
    outcomes.push(ac6());
    outcomes.push(ac7());

    drifts.extend(
        acute_runs
            .iter()
            .chain([&obtuse_run])
            .flat_map(|r| r.reports.iter().map(|x| x.energy_drift)),
    );
    let drift = drifts.iter().copied().fold(0.0, f64::max);
    outcomes.push(Outcome {
        id: "AC8",
        pass: drift < 1e-6,
        detail: format!(
            "max relative energy drift over {} reported windows = {drift:.2e} (< 1e-6)",
            drifts.len()
        ),
    });
    outcomes.push(ac9());
    outcomes.push(ac10());

    for o in &outcomes {
        line(o);
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} criteria passed", outcomes.len());
    let strict = std::env::var("TRIWAVE_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && passed < outcomes.len() {
        std::process::exit(1);
    }
}

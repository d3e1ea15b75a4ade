//! Experiment commands behind the `triwave` binary.
//!
//! Every command is a pure function of its configuration and returns the
//! files it would write; [`write_outputs`] puts them on disk.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{
    mode_boundary_exact, reference_altitude, reference_triangle, square_exact, IsoscelesMode,
    SineSeries1D, SquareMode, SQUARE_SIDE,
};
use crate::config::ExperimentConfig;
use crate::discretization::{assemble, DiscretePair, NodalField, Operator};
use crate::error::{Error, Result};
use crate::geometry::SideLabel;
use crate::initial::InitialData;
use crate::mesh::{refine_uniform, Mesh};
use crate::observability::poincare_check;
use crate::quadrature::{boundary_rule, BOUNDARY_PANELS};
use crate::simulation::{plan_steps, run, ObservabilityReport, Schedule, Trajectory};
use crate::timestepper::cfl_dt;

pub const SIMULATE_HEADER: &str =
    "side,level,h_max,dt,T,E0,boundary_integral,ratio,x_prod_A,x_prod_B,x_prod_C,commutator_residual";
pub const CONVERGENCE_HEADER: &str =
    "level,h_max,dt,T,boundary_integral,boundary_error,boundary_order,\
abs_r_minus_1,commutator_residual,residual_order,interpolant_energy,energy_error,energy_order";
pub const TIMESERIES_HEADER: &str =
    "t,flux_sq_A,flux_sq_B,flux_sq_C,x_prod_A,x_prod_B,x_prod_C,energy";
pub const SQUARE_HEADER: &str = "n,T,omega,boundary_integral,E0,ratio_per_energy,ratio,quadrature";
pub const ONED_HEADER: &str =
    "T,boundary_integral,E0,ratio,abs_r_minus_1,ell_over_T,scaled_deviation,envelope";
pub const EIGEN_HEADER: &str = "m,n,lambda_sq,side,ell,flux_squared,equidistribution,relative_error,T,boundary_exact,ratio_exact";
pub const POINCARE_HEADER: &str = "trial,side,lhs,rhs,margin";

/// 17 significant digits, round-trip exact.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// A named output file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

pub fn write_outputs(dir: &Path, files: &[OutputFile]) -> Result<Vec<PathBuf>> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    files
        .iter()
        .map(|f| {
            let path = dir.join(&f.name);
            std::fs::write(&path, &f.contents).map_err(io(&path))?;
            Ok(path)
        })
        .collect()
}

struct Prepared {
    mesh: Mesh,
    pair: DiscretePair,
    u0: NodalField,
    u1: NodalField,
    dt_max: f64,
}

fn prepare(cfg: &ExperimentConfig, level: u32) -> Result<Prepared> {
    let mesh = refine_uniform(&cfg.triangle, level)?;
    let pair = assemble(&mesh, true)?;
    let (u0, u1) = cfg.initial.project(&mesh)?;
    let dt_max = cfl_dt(&pair, cfg.cfl_safety)?;
    Ok(Prepared {
        mesh,
        pair,
        u0,
        u1,
        dt_max,
    })
}

/// Trajectories covering every `T` of the config: one run when the times
/// are commensurate, otherwise one run per time.
fn trajectories(cfg: &ExperimentConfig, p: &Prepared) -> Result<Vec<Trajectory>> {
    let frame = cfg.triangle.frame(cfg.side);
    let go = |times: &[f64]| {
        run(
            &p.mesh,
            &p.pair,
            &frame,
            p.u0.clone(),
            &p.u1,
            Schedule {
                dt_max: p.dt_max,
                final_times: times,
                stride: cfg.sample_stride,
            },
        )
    };
    if plan_steps(p.dt_max, &cfg.final_times).is_some() {
        Ok(vec![go(&cfg.final_times)?])
    } else {
        cfg.final_times.iter().map(|&t| go(&[t])).collect()
    }
}

fn report_for(trajs: &[Trajectory], t: f64) -> Result<ObservabilityReport> {
    let mut last = None;
    for tr in trajs {
        match tr.report(t) {
            Ok(r) => return Ok(r),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or(Error::EmptyTrajectory))
}

fn check_plan(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.levels.is_empty() || cfg.final_times.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one level and one T".into(),
        ));
    }
    Ok(())
}

pub fn simulate_row(r: &ObservabilityReport) -> String {
    [
        r.side.opposite_vertex().to_string(),
        r.level.to_string(),
        num(r.h_max),
        num(r.dt),
        num(r.t_final),
        num(r.e0),
        num(r.boundary_integral),
        num(r.ratio),
        num(r.x_products[0]),
        num(r.x_products[1]),
        num(r.x_products[2]),
        num(r.commutator_residual),
    ]
    .join(",")
}

fn timeseries(tr: &Trajectory) -> String {
    let side = tr.frame.side;
    let (b, c) = side.others();
    let idx = [side, b, c].map(SideLabel::opposite_vertex);
    let mut out = format!("{TIMESERIES_HEADER}\n");
    for s in &tr.samples {
        let mut row = vec![num(s.t)];
        row.extend(idx.iter().map(|&i| num(s.flux_squared[i])));
        row.extend(idx.iter().map(|&i| num(s.x_product[i])));
        row.push(num(s.energy));
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Reports in config order: levels outer, times inner.
pub fn simulate_reports(cfg: &ExperimentConfig) -> Result<Vec<ObservabilityReport>> {
    Ok(simulate_inner(cfg)?.0)
}

fn simulate_inner(cfg: &ExperimentConfig) -> Result<(Vec<ObservabilityReport>, Vec<OutputFile>)> {
    check_plan(cfg)?;
    let mut reports = Vec::new();
    let mut extra = Vec::new();
    for &level in &cfg.levels {
        let p = prepare(cfg, level)?;
        let trajs = trajectories(cfg, &p)?;
        for &t in &cfg.final_times {
            reports.push(report_for(&trajs, t)?);
        }
        if cfg.timeseries {
            for (k, tr) in trajs.iter().enumerate() {
                let name = if trajs.len() == 1 {
                    format!("timeseries_level{level}.csv")
                } else {
                    format!("timeseries_level{level}_T{k}.csv")
                };
                extra.push(OutputFile {
                    name,
                    contents: timeseries(tr),
                });
            }
        }
        if cfg.mesh_dump {
            let mut buf = Vec::new();
            p.mesh
                .write_text(&mut buf)
                .expect("writing to memory cannot fail");
            extra.push(OutputFile {
                name: format!("mesh_level{level}.txt"),
                contents: String::from_utf8(buf).expect("mesh dump is ASCII"),
            });
        }
    }
    Ok((reports, extra))
}

/// One report row per `(level, T)`, plus optional time series and meshes.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>> {
    let (reports, extra) = simulate_inner(cfg)?;
    let mut csv = format!("{SIMULATE_HEADER}\n");
    for r in &reports {
        let _ = writeln!(csv, "{}", simulate_row(r));
    }
    let mut files = vec![OutputFile {
        name: "simulate.csv".into(),
        contents: csv,
    }];
    files.extend(extra);
    Ok(files)
}

/// Exact boundary integral and energy when the data is a standing mode on
/// the reference triangle.
fn closed_form(cfg: &ExperimentConfig) -> Option<IsoscelesMode> {
    match cfg.initial {
        InitialData::Eigenmode { m, n } if cfg.triangle == reference_triangle() => {
            IsoscelesMode::new(m, n).ok()
        }
        _ => None,
    }
}

/// `log(e_prev / e) / log(h_prev / h)`.
fn order(prev: Option<(f64, f64)>, cur: Option<(f64, f64)>) -> Option<f64> {
    let ((e0, h0), (e1, h1)) = (prev?, cur?);
    if e0 > 0.0 && e1 > 0.0 {
        Some((e0 / e1).ln() / (h0 / h1).ln())
    } else {
        None
    }
}

/// Errors against the closed form when one exists, otherwise the change
/// from the previous level.
fn errors(values: &[f64], exact: Option<f64>) -> Vec<Option<f64>> {
    values
        .iter()
        .enumerate()
        .map(|(k, &v)| match exact {
            Some(x) => Some((v - x).abs()),
            None if k > 0 => Some((v - values[k - 1]).abs()),
            None => None,
        })
        .collect()
}

pub fn cmd_convergence(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>> {
    if cfg.levels.len() < 3 {
        return Err(Error::TooFewLevels(cfg.levels.len()));
    }
    check_plan(cfg)?;
    let mode = closed_form(cfg);
    // per level: h, dt, interpolant energy, reports in T order
    let mut per_level = Vec::new();
    for &level in &cfg.levels {
        let p = prepare(cfg, level)?;
        let energy =
            p.pair.l2_inner(&p.u1, &p.u1)? + p.pair.quadratic_form(Operator::Stiffness, &p.u0)?;
        let trajs = trajectories(cfg, &p)?;
        let reports = cfg
            .final_times
            .iter()
            .map(|&t| report_for(&trajs, t))
            .collect::<Result<Vec<_>>>()?;
        per_level.push((level, p.mesh.h_max, energy, reports));
    }
    let hs: Vec<f64> = per_level.iter().map(|l| l.1).collect();
    let energies: Vec<f64> = per_level.iter().map(|l| l.2).collect();
    let energy_err = errors(&energies, mode.map(|m| m.lambda_sq()));

    let mut csv = format!("{CONVERGENCE_HEADER}\n");
    for (ti, &t) in cfg.final_times.iter().enumerate() {
        let bis: Vec<f64> = per_level
            .iter()
            .map(|l| l.3[ti].boundary_integral)
            .collect();
        let bi_err = errors(&bis, mode.map(|m| mode_boundary_exact(&m, cfg.side, t)));
        for (k, (level, h, energy, reports)) in per_level.iter().enumerate() {
            let r = &reports[ti];
            let prev = |errs: &[Option<f64>]| {
                if k == 0 {
                    None
                } else {
                    errs[k - 1].map(|e| (e, hs[k - 1]))
                }
            };
            let res: Vec<Option<f64>> = per_level
                .iter()
                .map(|l| Some(l.3[ti].commutator_residual))
                .collect();
            let row = [
                level.to_string(),
                num(*h),
                num(r.dt),
                num(t),
                num(r.boundary_integral),
                opt(bi_err[k]),
                opt(order(prev(&bi_err), bi_err[k].map(|e| (e, *h)))),
                num((r.ratio - 1.0).abs()),
                num(r.commutator_residual),
                opt(order(prev(&res), res[k].map(|e| (e, *h)))),
                num(*energy),
                opt(energy_err[k]),
                opt(order(prev(&energy_err), energy_err[k].map(|e| (e, *h)))),
            ];
            let _ = writeln!(csv, "{}", row.join(","));
        }
    }
    Ok(vec![OutputFile {
        name: "convergence.csv".into(),
        contents: csv,
    }])
}

/// `int_0^T int_0^{2pi} |d_x u(t, 2pi, y)|^2 dy dt` by tensor Gauss rules.
pub fn square_quadrature(n: u32, t_final: f64) -> Result<f64> {
    let mode = SquareMode::new(n)?;
    let g = boundary_rule();
    let time_panels = BOUNDARY_PANELS.max((t_final * mode.omega()).ceil() as usize);
    Ok(g.composite(0.0, t_final, time_panels, |t| {
        g.composite(0.0, SQUARE_SIDE, BOUNDARY_PANELS, |y| {
            mode.u_x(t, SQUARE_SIDE, y).powi(2)
        })
    }))
}

pub fn cmd_square_demo(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>> {
    if cfg.square_n.is_empty() {
        return Err(Error::InvalidArgument(
            "square demo needs at least one n".into(),
        ));
    }
    let mut csv = format!("{SQUARE_HEADER}\n");
    for &t in &cfg.final_times {
        for &n in &cfg.square_n {
            let r = square_exact(n, t)?;
            let row = [
                n.to_string(),
                num(t),
                num(SquareMode::new(n)?.omega()),
                num(r.boundary_integral),
                num(r.e0),
                num(r.ratio_per_energy),
                num(r.ratio),
                num(square_quadrature(n, t)?),
            ];
            let _ = writeln!(csv, "{}", row.join(","));
        }
    }
    Ok(vec![OutputFile {
        name: "square.csv".into(),
        contents: csv,
    }])
}

/// Envelope constant `C` in `|R - 1| <= C ell / T` for the 1D series.
pub const ONED_ENVELOPE: f64 = 2.0;

pub fn oned_series(cfg: &ExperimentConfig) -> Result<SineSeries1D> {
    if cfg.sine.is_empty() {
        SineSeries1D::random(cfg.length, cfg.random_modes, cfg.seed)
    } else {
        SineSeries1D::new(cfg.length, cfg.sine.clone())
    }
}

pub fn cmd_oned_demo(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>> {
    if cfg.final_times.is_empty() {
        return Err(Error::InvalidArgument(
            "1D demo needs at least one T".into(),
        ));
    }
    let s = oned_series(cfg)?;
    let e0 = s.energy_at(0.0);
    let ell = s.length;
    let mut csv = format!("{ONED_HEADER}\n");
    for &t in &cfg.final_times {
        let bi = s.boundary_integral(t);
        let ratio = (e0 > 0.0).then(|| ell * bi / (t * e0));
        let dev = ratio.map(|r| (r - 1.0).abs());
        let row = [
            num(t),
            num(bi),
            num(e0),
            opt(ratio),
            opt(dev),
            num(ell / t),
            opt(dev.map(|d| d * t / ell)),
            num(ONED_ENVELOPE * ell / t),
        ];
        let _ = writeln!(csv, "{}", row.join(","));
    }
    Ok(vec![OutputFile {
        name: "oned.csv".into(),
        contents: csv,
    }])
}

pub fn cmd_eigen_demo(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>> {
    if cfg.modes.is_empty() {
        return Err(Error::InvalidArgument(
            "eigen demo needs at least one mode".into(),
        ));
    }
    let mut csv = format!("{EIGEN_HEADER}\n");
    for &(m, n) in &cfg.modes {
        let mode = IsoscelesMode::new(m, n)?;
        for side in SideLabel::ALL {
            let ell = reference_altitude(side);
            let quad = mode.side_flux_squared(side);
            let equi = 2.0 * mode.lambda_sq() / ell;
            for &t in &cfg.final_times {
                let exact = mode_boundary_exact(&mode, side, t);
                let row = [
                    m.to_string(),
                    n.to_string(),
                    num(mode.lambda_sq()),
                    side.opposite_vertex().to_string(),
                    num(ell),
                    num(quad),
                    num(equi),
                    num(((quad - equi) / equi).abs()),
                    num(t),
                    num(exact),
                    num(ell * exact / (t * mode.lambda_sq())),
                ];
                let _ = writeln!(csv, "{}", row.join(","));
            }
        }
    }
    Ok(vec![OutputFile {
        name: "eigen.csv".into(),
        contents: csv,
    }])
}

/// Uniform `[-1, 1)` values at the interior nodes.
pub fn random_field(rng: &mut ChaCha8Rng, dim: usize) -> NodalField {
    NodalField {
        values: (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    }
}

pub fn cmd_poincare(cfg: &ExperimentConfig) -> Result<Vec<OutputFile>> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument(
            "poincare needs at least one trial".into(),
        ));
    }
    let level = *cfg
        .levels
        .first()
        .ok_or_else(|| Error::InvalidArgument("poincare needs a level".into()))?;
    let mesh = refine_uniform(&cfg.triangle, level)?;
    let pair = assemble(&mesh, true)?;
    let frames = SideLabel::ALL.map(|s| cfg.triangle.frame(s));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = format!("{POINCARE_HEADER}\n");
    for trial in 0..cfg.trials {
        let f = random_field(&mut rng, pair.dim());
        for frame in &frames {
            let c = poincare_check(&pair, &mesh, &f, frame)?;
            let _ = writeln!(
                csv,
                "{trial},{},{},{},{}",
                frame.side.opposite_vertex(),
                num(c.lhs),
                num(c.rhs),
                num(c.margin())
            );
        }
    }
    Ok(vec![OutputFile {
        name: "poincare.csv".into(),
        contents: csv,
    }])
}

/// Process exit code for an error: 3 for numerical failure, 2 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NumericalFailure(_) | Error::NonFiniteSample { .. } => 3,
        _ => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn number_format() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn simulate_eigenmode_matches_closed_form() {
        let c = cfg("initial = eigenmode\nmode = 1, 2\nside = 1\nlevel = 5\nT = 10\n");
        let reports = simulate_reports(&c).unwrap();
        let mode = IsoscelesMode::new(1, 2).unwrap();
        let exact = mode_boundary_exact(&mode, SideLabel::ALL[1], 10.0);
        assert!(((reports[0].boundary_integral - exact) / exact).abs() < 0.01);
        let files = cmd_simulate(&c).unwrap();
        assert!(files[0].contents.starts_with(SIMULATE_HEADER));
        assert_eq!(files[0].contents.lines().count(), 2);
    }

    #[test]
    fn zero_data_rejected() {
        let c = cfg("initial = bump\nbump_center = 50, 50\nbump_radius = 1\nlevel = 3\n");
        assert!(matches!(cmd_simulate(&c), Err(Error::ZeroEnergy)));
    }

    #[test]
    fn incommensurate_times_still_run() {
        let c = cfg("level = 3\nT = 1\nT = 1.5\n");
        let r = simulate_reports(&c).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[1].t_final - 1.5).abs() < 1e-12);
    }

    #[test]
    fn convergence_table() {
        assert!(matches!(
            cmd_convergence(&cfg("level = 3\n")),
            Err(Error::TooFewLevels(1))
        ));
        let c = cfg("initial = eigenmode\nmode = 1, 2\nlevel = 3\nlevel = 4\nlevel = 5\nT = 10\n");
        let out = cmd_convergence(&c).unwrap().remove(0).contents;
        let rows: Vec<Vec<&str>> = out
            .lines()
            .skip(1)
            .map(|l| l.split(',').collect())
            .collect();
        assert_eq!(rows.len(), 3);
        let err: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
        assert!(err[1] < err[0] && err[2] < err[1]);
        let energy_order: f64 = rows[2][12].parse().unwrap();
        assert!((energy_order - 2.0).abs() < 0.3, "{energy_order}");
    }

    #[test]
    fn square_demo() {
        assert!(cmd_square_demo(&cfg("n = 1\nT = 10\n")).is_ok());
        let mut c = cfg("T = 10\n");
        c.square_n.clear();
        assert!(cmd_square_demo(&c).is_err());
        let out = cmd_square_demo(&cfg("n = 1\nn = 2\nn = 4\nT = 10\n"))
            .unwrap()
            .remove(0)
            .contents;
        let rpe: Vec<f64> = out
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
            .collect();
        assert!(rpe.windows(2).all(|w| w[1] < w[0]));
        let r = square_exact(1, 1.0).unwrap();
        assert!((square_quadrature(1, 1.0).unwrap() - r.boundary_integral).abs() < 1e-12);
        assert!(
            (r.boundary_integral
                - (1.0 / (2.0 * PI) - (2.0 * 2f64.sqrt()).sin() / (4.0 * PI * 2f64.sqrt())))
            .abs()
                < 1e-15
        );
    }

    #[test]
    fn oned_demo() {
        let out = cmd_oned_demo(&cfg("length = 2\nsine = 1, 1, 0\nT = 20\n"))
            .unwrap()
            .remove(0)
            .contents;
        let row: Vec<f64> = out
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        let ell = 2.0f64;
        let expect = (PI / ell).powi(2) * (10.0 + ell / (4.0 * PI) * (2.0 * PI * 20.0 / ell).sin());
        assert!((row[1] - expect).abs() < 1e-12);
        let zero = cmd_oned_demo(&cfg("sine = 1, 0, 0\nT = 5\n"))
            .unwrap()
            .remove(0)
            .contents;
        let fields: Vec<&str> = zero.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(fields[1].parse::<f64>().unwrap(), 0.0);
        assert_eq!(fields[3], "");
    }

    #[test]
    fn eigen_demo() {
        let out = cmd_eigen_demo(&cfg("mode = 1, 2\nT = 10\n"))
            .unwrap()
            .remove(0)
            .contents;
        assert_eq!(out.lines().count(), 4);
        for l in out.lines().skip(1) {
            let rel: f64 = l.split(',').nth(7).unwrap().parse().unwrap();
            assert!(rel < 1e-8);
        }
    }

    #[test]
    fn poincare_demo() {
        let mut c = cfg("level = 3\ntrials = 20\nseed = 4\n");
        let a = cmd_poincare(&c).unwrap();
        assert_eq!(a, cmd_poincare(&c).unwrap());
        for l in a[0].contents.lines().skip(1) {
            assert!(l.split(',').nth(4).unwrap().parse::<f64>().unwrap() >= 0.0);
        }
        c.trials = 0;
        assert!(cmd_poincare(&c).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::NumericalFailure("x".into())), 3);
        assert_eq!(exit_code(&Error::ZeroEnergy), 2);
        assert_eq!(exit_code(&Error::TooFewLevels(1)), 2);
    }
}

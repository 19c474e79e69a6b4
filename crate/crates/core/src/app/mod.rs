//! The `run`, `extract-vclass` and `verify` commands.
//!
//! `run` writes into the output directory:
//!
//! - `config.toml`: the effective configuration, defaults filled in
//! - `diagnostics.csv`: one row per snapshot, columns as in
//!   [`DiagnosticsRecord::CSV_HEADER`]
//! - `trajectory.csv`: `t,Q,P,dPdt,E_cl`, one row per step. In static mode
//!   these are the measured packet centre `<q> - <q>₀`, `<p>`, the model
//!   force at `<q>` and `P²/2m + V(<q>)`.
//! - `fields/NNNN.csv` (optional): `x,re_psi,im_psi,rho,S,V` per snapshot
//! - `plots/` (optional): binned series `dq2.csv`, `overlap.csv`,
//!   `center.csv`, `potential.csv` and an SVG for each

pub mod config;
pub mod plot;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc::{sync_channel, Receiver};
use std::thread;

pub use config::{RunConfig, OUTPUT_DIR_ENV};

use crate::classical::{
    classical_energy, integrate_trajectory_within, linear_coefficient, linear_coefficient_numeric,
    v_class, v_class_profile,
};
use crate::diagnostics::{format_float, hellinger_distance, DiagnosticsRecord};
use crate::error::{GcsError, Result};
use crate::gcs::{displace_analytic, polar_decomposition_main_lobe, ClassicalPoint};
use crate::grid::{integrate, Grid, RealField};
use crate::madelung::{coherent_state_residuals, numeric_curvature_term};
use crate::model::{ModelKind, PotentialModel};
use crate::propagator::{evolve_feedback, evolve_static, Evolution, Frame, Mode, PropagatorConfig};
use crate::tolerance::Tolerances;

use plot::{bin_series, line_chart, Series};

/// Frames in flight between the propagation loop and the writer.
pub const FRAME_QUEUE: usize = 16;
/// Largest number of points in a binned plot series.
pub const PLOT_POINTS: usize = 1000;
/// Number of potential snapshots drawn in `potential.svg`.
pub const POTENTIAL_CURVES: usize = 5;

fn io<T>(path: &Path, r: std::io::Result<T>) -> Result<T> {
    r.map_err(|e| GcsError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(io(path, File::create(path))?))
}

fn write_all(path: &Path, text: &str) -> Result<()> {
    io(path, fs::write(path, text))
}

fn csv_line(values: &[f64]) -> String {
    values.iter().map(|v| format_float(*v)).collect::<Vec<_>>().join(",")
}

/// What a successful `run` reports.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub steps: usize,
    pub snapshots: usize,
    pub min_overlap: f64,
    /// Largest `|Δq²(t)/Δq²(0) - 1|`.
    pub max_dq2_drift: f64,
}

/// Loads `path`, applies the output-directory override and runs it.
pub fn cmd_run(path: &Path) -> Result<RunSummary> {
    run(&RunConfig::load(path)?.with_env_output())
}

/// Plot data gathered by the writer thread.
#[derive(Default)]
struct Collected {
    snapshots: usize,
    dq2: Vec<(f64, f64)>,
    overlap: Vec<(f64, f64)>,
    classical: Vec<(f64, f64)>,
    measured: Vec<(f64, f64)>,
    potentials: Vec<(f64, RealField)>,
}

struct Writer {
    dir: PathBuf,
    emit_fields: bool,
    hbar: f64,
    q0: f64,
    tol: Tolerances,
    potential_every: usize,
}

impl Writer {
    fn run(self, rx: Receiver<Frame>) -> Result<Collected> {
        let path = self.dir.join("diagnostics.csv");
        let mut diag = create(&path)?;
        io(&path, writeln!(diag, "{}", DiagnosticsRecord::CSV_HEADER))?;
        let fields_dir = self.dir.join("fields");
        if self.emit_fields {
            io(&fields_dir, fs::create_dir_all(&fields_dir))?;
        }
        let mut out = Collected::default();
        for frame in rx {
            let r = &frame.record;
            io(&path, writeln!(diag, "{}", r.csv_row()))?;
            out.dq2.push((r.t, r.dq2));
            out.overlap.push((r.t, r.overlap));
            out.measured.push((r.t, r.q_mean - self.q0));
            if let Some(p) = frame.point {
                out.classical.push((r.t, p.q));
            }
            if out.snapshots % self.potential_every == 0 {
                out.potentials.push((r.t, frame.potential.clone()));
            }
            if self.emit_fields {
                self.write_field(&fields_dir, out.snapshots, &frame)?;
            }
            out.snapshots += 1;
        }
        io(&path, diag.flush())?;
        Ok(out)
    }

    fn write_field(&self, dir: &Path, index: usize, frame: &Frame) -> Result<()> {
        let path = dir.join(format!("{index:04}.csv"));
        let mut w = create(&path)?;
        let norm = integrate(&frame.psi.density());
        let normalized = frame.psi.map(|c| c / norm.sqrt())?;
        let polar = polar_decomposition_main_lobe(&normalized, self.hbar, &self.tol)?;
        io(&path, writeln!(w, "x,re_psi,im_psi,rho,S,V"))?;
        let grid = frame.psi.grid();
        for (i, x) in grid.points().enumerate() {
            let c = frame.psi.values()[i];
            let row = csv_line(&[
                x,
                c.re,
                c.im,
                c.norm_sqr(),
                polar.phase.values()[i],
                frame.potential.values()[i],
            ]);
            io(&path, writeln!(w, "{row}"))?;
        }
        io(&path, w.flush())
    }
}

/// Runs a validated configuration.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let model = cfg.model()?;
    let grid = cfg.grid()?;
    let pcfg = cfg.propagator()?;
    let tol = cfg.tolerances.clone();
    let t_final = cfg.propagation.t_final;
    let steps = pcfg.steps(t_final)?;
    let dir = cfg.output.directory.clone();
    io(&dir, fs::create_dir_all(&dir))?;
    write_all(&dir.join("config.toml"), &cfg.to_toml()?)?;

    let q0 = model.ground_moments(&grid, &tol)?.q0;
    let snapshots = steps / pcfg.snapshot_stride + 1 + usize::from(steps % pcfg.snapshot_stride != 0);
    let writer = Writer {
        dir: dir.clone(),
        emit_fields: cfg.output.emit_fields,
        hbar: model.hbar(),
        q0,
        tol: tol.clone(),
        potential_every: snapshots.div_ceil(POTENTIAL_CURVES).max(1),
    };
    let (tx, rx) = sync_channel::<Frame>(FRAME_QUEUE);
    let handle = thread::spawn(move || writer.run(rx));
    let mut sink = move |frame: Frame| {
        tx.send(frame)
            .map_err(|_| GcsError::Propagation("snapshot writer stopped".into()))
    };
    let evolved = match pcfg.mode {
        Mode::Feedback => evolve_feedback(&model, &grid, cfg.initial_point(), &pcfg, t_final, &tol, &mut sink),
        Mode::Static => displace_analytic(&model, &grid, cfg.initial_point(), &tol)
            .and_then(|s0| evolve_static(&s0, &pcfg, t_final, &tol, &mut sink)),
    };
    drop(sink);
    let collected = handle
        .join()
        .map_err(|_| GcsError::Propagation("snapshot writer panicked".into()))?;
    // a writer failure surfaces in the loop only as a closed queue, so the
    // writer's own error goes first
    let collected = collected?;
    let ev = evolved?;

    write_trajectory(&dir.join("trajectory.csv"), &model, &ev, q0)?;
    if cfg.output.emit_plots {
        write_plots(&dir.join("plots"), &model, &grid, &collected, q0)?;
    }
    let d0 = ev.records[0].dq2;
    Ok(RunSummary {
        output_dir: dir,
        steps,
        snapshots: collected.snapshots,
        min_overlap: ev.records.iter().map(|r| r.overlap).fold(f64::INFINITY, f64::min),
        max_dq2_drift: ev.records.iter().map(|r| (r.dq2 / d0 - 1.0).abs()).fold(0.0, f64::max),
    })
}

fn write_trajectory(path: &Path, model: &PotentialModel, ev: &Evolution, q0: f64) -> Result<()> {
    let mut w = create(path)?;
    io(path, writeln!(w, "t,Q,P,dPdt,E_cl"))?;
    match &ev.trajectory {
        Some(traj) => {
            for (p, f) in traj.points.iter().zip(&traj.forces) {
                let row = csv_line(&[p.t, p.q, p.p, *f, classical_energy(model, p.q, p.p)]);
                io(path, writeln!(w, "{row}"))?;
            }
        }
        None => {
            for r in &ev.records {
                let x = r.q_mean;
                let force = -model.potential_gradient(x);
                let e = r.p_mean * r.p_mean / (2.0 * model.mass()) + model.potential(x);
                let row = csv_line(&[r.t, x - q0, r.p_mean, force, e]);
                io(path, writeln!(w, "{row}"))?;
            }
        }
    }
    io(path, w.flush())
}

fn write_series(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    let mut w = create(path)?;
    io(path, writeln!(w, "{header}"))?;
    for r in rows {
        io(path, writeln!(w, "{}", csv_line(r)))?;
    }
    io(path, w.flush())
}

fn write_plots(dir: &Path, model: &PotentialModel, grid: &Grid, c: &Collected, q0: f64) -> Result<()> {
    io(dir, fs::create_dir_all(dir))?;
    let dq2 = bin_series(&c.dq2, PLOT_POINTS);
    let overlap = bin_series(&c.overlap, PLOT_POINTS);
    let measured = bin_series(&c.measured, PLOT_POINTS);
    let classical = bin_series(&c.classical, PLOT_POINTS);
    let pairs = |s: &[(f64, f64)]| s.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>();
    write_series(&dir.join("dq2.csv"), "t,dq2", &pairs(&dq2))?;
    write_series(&dir.join("overlap.csv"), "t,overlap", &pairs(&overlap))?;
    let center: Vec<Vec<f64>> = if classical.len() == measured.len() {
        measured
            .iter()
            .zip(&classical)
            .map(|(m, q)| vec![m.0, q.1, m.1])
            .collect()
    } else {
        measured.iter().map(|m| vec![m.0, f64::NAN, m.1]).collect()
    };
    write_series(&dir.join("center.csv"), "t,Q,q_mean_minus_q0", &center)?;

    write_all(
        &dir.join("dq2.svg"),
        &line_chart("Width of the packet", "t", "Δq²", &[Series::new("Δq²(t)", dq2)], None),
    )?;
    write_all(
        &dir.join("overlap.svg"),
        &line_chart(
            "Overlap with the translated ground density",
            "t",
            "Bhattacharyya overlap",
            &[Series::new("overlap(t)", overlap)],
            None,
        ),
    )?;
    let mut centre_series = vec![Series::new("<q> - <q>₀", measured.clone())];
    if !classical.is_empty() {
        centre_series.insert(0, Series::new("Q(t)", classical));
    }
    write_all(
        &dir.join("center.svg"),
        &line_chart("Packet centre", "t", "position", &centre_series, None),
    )?;

    // potentials on the window the packet explores
    let dq = model.ground_width();
    let (lo, hi) = c
        .measured
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(m.1), hi.max(m.1)));
    let (x_lo, x_hi) = (
        (q0 + lo - 4.0 * dq).max(grid.x_min()),
        (q0 + hi + 6.0 * dq).min(grid.x_max()),
    );
    let idx: Vec<usize> = (0..grid.len())
        .filter(|&i| (x_lo..=x_hi).contains(&grid.x(i)))
        .collect();
    let mut header = String::from("x");
    for (t, _) in &c.potentials {
        header.push_str(&format!(",V_t{}", format_float(*t)));
    }
    let rows: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| {
            let mut r = vec![grid.x(i)];
            r.extend(c.potentials.iter().map(|(_, v)| v.values()[i]));
            r
        })
        .collect();
    write_series(&dir.join("potential.csv"), &header, &rows)?;
    let floor = c
        .potentials
        .iter()
        .flat_map(|(_, v)| idx.iter().map(move |&i| v.values()[i]))
        .fold(f64::INFINITY, f64::min);
    let curves: Vec<Series> = c
        .potentials
        .iter()
        .map(|(t, v)| {
            Series::new(
                format!("t = {t:.3}"),
                idx.iter().map(|&i| (grid.x(i), v.values()[i])).collect(),
            )
        })
        .collect();
    let top = if floor.is_finite() { floor + 4.0 * model.energy_scale() } else { 1.0 };
    write_all(
        &dir.join("potential.svg"),
        &line_chart("V(x,t) snapshots", "x", "V", &curves, Some((floor.min(top - 1.0), top))),
    )?;
    Ok(())
}

/// One row of `vclass.csv`.
#[derive(Clone, Copy, Debug)]
pub struct VclassRow {
    pub q: f64,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_deviation: f64,
}

#[derive(Clone, Debug)]
pub struct VclassSummary {
    pub path: PathBuf,
    pub rows: Vec<VclassRow>,
    pub max_rel_deviation: f64,
}

/// Half-range of the `V_class` table in units of `Δq`.
pub const VCLASS_RANGE: f64 = 3.0;
/// Simpson panels on each side of `Q = 0`.
pub const VCLASS_PANELS: usize = 60;

/// `V_class` over `|Q| <= 3Δq`: closed form next to the fit-and-integrate
/// reconstruction. Where the closed form vanishes the deviation is taken
/// relative to the model's energy scale.
pub fn vclass_table(model: &PotentialModel, grid: &Grid) -> Result<Vec<VclassRow>> {
    let q_max = VCLASS_RANGE * model.ground_width();
    let profile = v_class_profile(model, grid, q_max, VCLASS_PANELS)?;
    Ok(profile
        .into_iter()
        .map(|(q, numeric)| {
            let analytic = v_class(model, q);
            let scale = if analytic != 0.0 { analytic.abs() } else { model.energy_scale() };
            VclassRow {
                q,
                analytic,
                numeric,
                rel_deviation: (numeric - analytic).abs() / scale,
            }
        })
        .collect())
}

pub fn cmd_extract_vclass(path: &Path) -> Result<VclassSummary> {
    extract_vclass(&RunConfig::load(path)?.with_env_output())
}

pub fn extract_vclass(cfg: &RunConfig) -> Result<VclassSummary> {
    let model = cfg.model()?;
    let grid = cfg.grid()?;
    let rows = vclass_table(&model, &grid)?;
    let dir = &cfg.output.directory;
    io(dir, fs::create_dir_all(dir))?;
    let path = dir.join("vclass.csv");
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.q, r.analytic, r.numeric, r.rel_deviation])
        .collect();
    write_series(&path, "Q,V_class_analytic,V_class_numeric,rel_deviation", &table)?;
    let max_rel_deviation = rows.iter().map(|r| r.rel_deviation).fold(0.0, f64::max);
    Ok(VclassSummary {
        path,
        rows,
        max_rel_deviation,
    })
}

/// One line of the `verify` report.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    fn failed(name: &str, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value: f64::NAN,
            threshold,
            pass: false,
        }
    }

    /// `name value threshold pass|fail`.
    pub fn line(&self) -> String {
        format!(
            "{} {:.6e} {:.1e} {}",
            self.name,
            self.value,
            self.threshold,
            if self.pass { "pass" } else { "fail" }
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    /// Errors behind failed checks, for the log.
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    fn push(&mut self, name: &str, threshold: f64, value: Result<f64>) {
        match value {
            Ok(v) => self.checks.push(Check::at_most(name, v, threshold)),
            Err(e) => {
                self.notes.push(format!("{name}: {e}"));
                self.checks.push(Check::failed(name, threshold));
            }
        }
    }
}

/// Thresholds used by `verify`.
pub mod thresholds {
    pub const GROUND_NORM: f64 = 1e-8;
    pub const GROUND_VARIANCE: f64 = 1e-8;
    pub const CURVATURE_MORSE: f64 = 1e-5;
    pub const CURVATURE_HARMONIC: f64 = 1e-6;
    pub const HJM: f64 = 1e-5;
    pub const CONTINUITY: f64 = 1e-6;
    pub const LINEAR_COEFFICIENT: f64 = 1e-6;
    pub const VCLASS_MORSE: f64 = 1e-5;
    pub const VCLASS_HARMONIC: f64 = 1e-8;
    pub const OVERLAP: f64 = 1e-4;
    pub const DQ2_DRIFT: f64 = 1e-4;
    pub const EHRENFEST: f64 = 1e-5;
    pub const HJM_PROPAGATED: f64 = 1e-4;
    pub const CONVERGENCE: f64 = 1e-6;
}

pub fn cmd_verify(path: &Path) -> Result<VerifyReport> {
    verify(&RunConfig::load(path)?)
}

/// Runs the invariant suite for a configuration. Only configuration errors
/// escape as `Err`; everything else is a failed check.
pub fn verify(cfg: &RunConfig) -> Result<VerifyReport> {
    use thresholds::*;
    cfg.validate()?;
    let model = cfg.model()?;
    let grid = cfg.grid()?;
    let pcfg = cfg.propagator()?;
    let tol = cfg.tolerances.clone();
    let dq = model.ground_width();
    let mut report = VerifyReport::default();

    report.push(
        "ground_norm",
        GROUND_NORM,
        model.ground_state(&grid, &tol).map(|psi| (psi.norm_sqr() - 1.0).abs()),
    );
    let expected_dq2 = dq * dq;
    let variance_expected = match model.kind() {
        ModelKind::Morse { a, .. } => std::f64::consts::PI.powi(2) / (6.0 * a * a),
        ModelKind::Harmonic { .. } => expected_dq2,
    };
    report.push(
        "ground_variance",
        GROUND_VARIANCE,
        model
            .ground_moments(&grid, &tol)
            .map(|i| (i.dq2 / variance_expected - 1.0).abs()),
    );

    let curvature_limit = match model.kind() {
        ModelKind::Morse { .. } => CURVATURE_MORSE,
        ModelKind::Harmonic { .. } => CURVATURE_HARMONIC,
    };
    report.push("curvature_identity", curvature_limit, curvature_check(&model, &grid, &tol));

    let samples = phase_space_samples(&model, &grid, &tol);
    let residuals: Result<Vec<_>> = samples
        .iter()
        .map(|p| coherent_state_residuals(&model, &grid, *p, &tol))
        .collect();
    match residuals {
        Ok(rs) => {
            report.push("madelung_hjm", HJM, Ok(rs.iter().map(|r| r.hjm).fold(0.0, f64::max)));
            report.push(
                "madelung_continuity",
                CONTINUITY,
                Ok(rs.iter().map(|r| r.continuity).fold(0.0, f64::max)),
            );
        }
        Err(e) => {
            report.push("madelung_hjm", HJM, Err(GcsError::Diagnostics(e.to_string())));
            report.push("madelung_continuity", CONTINUITY, Err(e));
        }
    }

    let qs: Vec<f64> = (0..10).map(|k| (-3.0 + 6.0 * k as f64 / 9.0) * dq).collect();
    report.push("linear_coefficient", LINEAR_COEFFICIENT, linear_check(&model, &grid, &qs));
    let vclass_limit = match model.kind() {
        ModelKind::Morse { .. } => VCLASS_MORSE,
        ModelKind::Harmonic { .. } => VCLASS_HARMONIC,
    };
    report.push(
        "vclass_reconstruction",
        vclass_limit,
        vclass_table(&model, &grid).map(|rows| rows.iter().map(|r| r.rel_deviation).fold(0.0, f64::max)),
    );
    let mirror = qs
        .iter()
        .map(|&q| {
            let expected = if model.is_symmetric() { model.potential(q) } else { model.potential(-q) };
            (v_class(&model, q) - expected).abs()
        })
        .fold(0.0, f64::max);
    report.push("vclass_mirror", 0.0, Ok(mirror));

    // coverage before any propagation
    let coverage = coverage_check(cfg, &model, &grid, &pcfg, &tol);
    let covered = coverage.is_ok();
    report.push("coverage", tol.boundary_mass, coverage);
    if !covered {
        return Ok(report);
    }

    let feedback = pcfg.mode == Mode::Feedback;
    let first = propagate(cfg, &model, &grid, &pcfg, &tol);
    let records = match &first {
        Ok(ev) => ev.records.clone(),
        Err(e) => {
            report.notes.push(format!("propagation: {e}"));
            Vec::new()
        }
    };
    let over_records = |f: &dyn Fn(&DiagnosticsRecord) -> f64| -> Result<f64> {
        match &first {
            Ok(_) => Ok(records.iter().map(f).fold(0.0, f64::max)),
            Err(e) => Err(GcsError::Propagation(e.to_string())),
        }
    };
    report.push("unitarity", tol.unitarity, over_records(&|r| (r.norm - 1.0).abs()));
    if feedback {
        report.push("overlap_deficit", OVERLAP, over_records(&|r| 1.0 - r.overlap));
        let d0 = records.first().map(|r| r.dq2).unwrap_or(f64::NAN);
        report.push("dq2_drift", DQ2_DRIFT, over_records(&|r| (r.dq2 / d0 - 1.0).abs()));
    }
    let fs = model.force_scale();
    report.push("ehrenfest", EHRENFEST, over_records(&|r| r.ehrenfest_residual / fs));
    // a freely evolving Morse packet grows interference nodes, where the
    // phase and the quantum term are undefined
    if feedback {
        report.push("hjm_propagated", HJM_PROPAGATED, over_records(&|r| r.hjm_residual));
    }

    // Richardson estimate of the time-discretization error of the final density
    let convergence = first.and_then(|coarse| {
        let fine_cfg = PropagatorConfig {
            dt: 0.5 * pcfg.dt,
            snapshot_stride: usize::MAX,
            ..pcfg.clone()
        };
        let fine = propagate(cfg, &model, &grid, &fine_cfg, &tol)?;
        let h = hellinger_distance(&coarse.final_psi.density(), &fine.final_psi.density())?;
        Ok(4.0 / 3.0 * h)
    });
    report.push("convergence", CONVERGENCE, convergence);
    Ok(report)
}

fn propagate(
    cfg: &RunConfig,
    model: &PotentialModel,
    grid: &Grid,
    pcfg: &PropagatorConfig,
    tol: &Tolerances,
) -> Result<Evolution> {
    let mut sink = |_: Frame| Ok(());
    let t_final = cfg.propagation.t_final;
    match pcfg.mode {
        Mode::Feedback => evolve_feedback(model, grid, cfg.initial_point(), pcfg, t_final, tol, &mut sink),
        Mode::Static => {
            let s0 = displace_analytic(model, grid, cfg.initial_point(), tol)?;
            evolve_static(&s0, pcfg, t_final, tol, &mut sink)
        }
    }
}

fn coverage_check(
    cfg: &RunConfig,
    model: &PotentialModel,
    grid: &Grid,
    pcfg: &PropagatorConfig,
    tol: &Tolerances,
) -> Result<f64> {
    let start = cfg.initial_point();
    let mut qs = vec![start.q];
    if pcfg.mode == Mode::Feedback {
        let steps = pcfg.steps(cfg.propagation.t_final)?;
        let traj = integrate_trajectory_within(model, start.q, start.p, pcfg.dt, steps, (grid.x_min(), grid.x_max()))?;
        let (lo, hi) = traj.q_range();
        qs.extend([lo, hi]);
    }
    let mut worst: f64 = 0.0;
    for q in qs {
        let s = displace_analytic(model, grid, ClassicalPoint::new(q, 0.0, 0.0), tol)?;
        let rho = s.psi.density();
        worst = worst.max(crate::grid::boundary_mass(rho.values(), grid.dx(), tol.boundary_points));
    }
    Ok(worst)
}

fn curvature_check(model: &PotentialModel, grid: &Grid, tol: &Tolerances) -> Result<f64> {
    // the identity concerns the ground density itself; translated copies add
    // interpolation error in the steep left tail
    let c = numeric_curvature_term(model, grid, 0.0, tol)?;
    let rho = model.ground_state(grid, tol)?.map(|v| v * v)?;
    let peak = rho.values().iter().cloned().fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for (i, x) in grid.points().enumerate() {
        if rho.values()[i] > 1e-8 * peak {
            let diff = (c.values.values()[i] - model.curvature_term(x)).abs();
            worst = worst.max(diff / model.energy_scale());
        }
    }
    Ok(worst)
}

fn linear_check(model: &PotentialModel, grid: &Grid, qs: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (k, &q) in qs.iter().enumerate() {
        // a moving centre with an arbitrary acceleration: the coefficient
        // must still match
        let dpdt = 0.1 * k as f64 * model.force_scale();
        let point = ClassicalPoint::new(q, 0.3, 0.0);
        let analytic = linear_coefficient(model, q, dpdt);
        let numeric = linear_coefficient_numeric(model, grid, point, dpdt)?;
        let scale = analytic.abs().max(1e-6 * model.force_scale());
        worst = worst.max((numeric - analytic).abs() / scale);
    }
    Ok(worst)
}

/// Deterministic `(Q, P)` lattice within `|Q| <= 2Δq`, `|P| <= 2ħ/Δq`,
/// keeping only points whose coherent state fits on the grid.
fn phase_space_samples(model: &PotentialModel, grid: &Grid, tol: &Tolerances) -> Vec<ClassicalPoint> {
    let dq = model.ground_width();
    let dp = model.hbar() / dq;
    let mut out = Vec::new();
    for q in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        for p in [-2.0, 0.0, 2.0] {
            let point = ClassicalPoint::new(q * dq, p * dp, 0.0);
            if displace_analytic(model, grid, point, tol).is_ok() {
                out.push(point);
            }
        }
    }
    out
}

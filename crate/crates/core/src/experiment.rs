//! Experiment runner: reads a flat JSON config, runs the four suites and
//! writes CSV tables, JSON reports and SVG figures.
//!
//! Layout of the output directory:
//!
//! ```text
//! cones.csv  fatcantor.csv  surgery.json  horseshoe.csv  report.json
//! figures/{partition,image,cones,horseshoe}.svg
//! data/tree.json  data/{partition,image,cones,horseshoe}.json
//! ```
//!
//! The `data/*.json` files are the inputs of `fathorse render`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bowen::{BowenSystem, SurgeryReport, MAX_SURGERY_LEVEL};
use crate::cantor::{make_construction, CantorConstruction};
use crate::cones::{brute_force_slice, verify_cone_bound, ConeSystem, ORACLE_MAX_RESOLUTION};
use crate::error::Error;
use crate::figures;
use crate::horseshoe::{suspension_volume, PoincareSystem};
use crate::maps::LorenzBranchMap;
use crate::numeric::zeta;
use crate::svg::{render_section_svg, FigureKind, SectionDataset};

/// Deepest cone level compared against the brute-force oracle.
pub const ORACLE_DEPTH: usize = 6;
/// Level at which the fat Cantor measure is compared with its limit.
pub const LIMIT_LEVEL: usize = 20;
pub const LIMIT_TOL: f64 = 1e-4;
pub const TELESCOPE_TOL: f64 = 1e-12;
pub const CONE_TOL: f64 = 1e-12;
pub const IDENTITY_TOL: f64 = 1e-9;
pub const WITNESS_SAMPLES: usize = 1000;
/// Deepest level for the fiber-interval versus tree comparison.
pub const PRODUCT_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub c: f64,
    pub p: f64,
    pub k_list: Vec<u32>,
    pub a_list: Vec<f64>,
    pub n_max: usize,
    pub level_max: usize,
    #[serde(rename = "N")]
    pub depth: usize,
    pub resolution: f64,
    pub delta: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            c: 1.8,
            p: 2.0,
            k_list: vec![2, 3, 5],
            a_list: vec![-0.9, -0.3, 0.0, 0.42, 0.9],
            n_max: 14,
            level_max: 12,
            depth: 6,
            resolution: 1e-3,
            delta: 0.1,
            output_dir: PathBuf::from("fathorse-out"),
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(|source| RunError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<(), RunError> {
        if self.k_list.is_empty() || self.k_list.iter().any(|&k| k < 2) {
            return Err(RunError::Config(format!(
                "k_list must be non-empty with k >= 2, got {:?}",
                self.k_list
            )));
        }
        if self.a_list.is_empty() {
            return Err(RunError::Config("a_list must be non-empty".into()));
        }
        if !(self.delta >= 0.0) {
            return Err(RunError::Config(format!(
                "delta must be >= 0, got {}",
                self.delta
            )));
        }
        if !(self.resolution > 0.0) {
            return Err(RunError::Config(format!(
                "resolution must be > 0, got {}",
                self.resolution
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Cones,
    FatCantor,
    Bowen,
    Horseshoe,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cones" => Ok(Suite::Cones),
            "fatcantor" => Ok(Suite::FatCantor),
            "bowen" => Ok(Suite::Bowen),
            "horseshoe" => Ok(Suite::Horseshoe),
            other => Err(format!(
                "unknown suite {other:?} (cones|fatcantor|bowen|horseshoe)"
            )),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Model(#[from] Error),
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    /// 2 for rejected parameters, 3 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Model(_) | RunError::Config(_) => 2,
            RunError::Io { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Criterion {
    fn at_most(id: &str, value: f64, bound: f64) -> Self {
        Self {
            id: id.into(),
            value,
            bound,
            pass: value <= bound,
        }
    }
    fn above(id: &str, value: f64, bound: f64) -> Self {
        Self {
            id: id.into(),
            value,
            bound,
            pass: value > bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub parameters: serde_json::Value,
    pub criteria: Vec<Criterion>,
    pub pass: bool,
}

struct Output {
    root: PathBuf,
}

impl Output {
    fn write(&self, rel: &str, contents: &str) -> Result<(), RunError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| RunError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        fs::write(&path, contents).map_err(|source| RunError::Io { path, source })
    }

    fn write_json<T: Serialize>(&self, rel: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
        text.push('\n');
        self.write(rel, &text)
    }

    fn write_figure(&self, kind: FigureKind, data: &SectionDataset) -> Result<(), RunError> {
        self.write_json(&format!("data/{}.json", kind.name()), data)?;
        self.write(
            &format!("figures/{}.svg", kind.name()),
            &render_section_svg(data, kind),
        )
    }
}

/// CSV number: 17 significant digits.
pub fn csv_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Runs the enabled suites and writes every artifact under `out`.
pub fn run(config: &ExperimentConfig, only: Option<Suite>, out: &Path) -> Result<Report, RunError> {
    config.validate()?;
    let enabled = |s: Suite| only.is_none_or(|o| o == s);

    // Parameter feasibility is checked up front so that a rejected
    // configuration writes nothing.
    let needs_model =
        enabled(Suite::FatCantor) || enabled(Suite::Bowen) || enabled(Suite::Horseshoe);
    let model = if needs_model {
        let map = LorenzBranchMap::new(config.c)?;
        let cc = make_construction(&map, config.p)?;
        let bowen = BowenSystem::new(map, cc, crate::bowen::DEFAULT_TOL)?;
        Some(PoincareSystem::new(bowen)?)
    } else {
        None
    };

    let output = Output {
        root: out.to_path_buf(),
    };
    let mut criteria = Vec::new();
    if enabled(Suite::Cones) {
        criteria.extend(cones_suite(config, &output)?);
    }
    if let Some(ps) = &model {
        if enabled(Suite::FatCantor) {
            criteria.extend(fatcantor_suite(config, ps.bowen().construction(), &output)?);
        }
        if enabled(Suite::Bowen) {
            criteria.extend(bowen_suite(config, ps.bowen(), &output)?);
        }
        if enabled(Suite::Horseshoe) {
            criteria.extend(horseshoe_suite(config, ps, &output)?);
        }
    }

    let mut parameters = serde_json::to_value(config).expect("config serializes");
    if let Some(map) = parameters.as_object_mut() {
        map.remove("output_dir");
    }
    let report = Report {
        parameters,
        pass: criteria.iter().all(|c| c.pass),
        criteria,
    };
    output.write_json("report.json", &report)?;
    Ok(report)
}

fn cones_suite(config: &ExperimentConfig, output: &Output) -> Result<Vec<Criterion>, RunError> {
    let mut csv = String::from("k,a,n,total,bound,ratio\n");
    let mut worst_excess = f64::NEG_INFINITY;
    let mut contraction_pass = true;
    let mut worst_step = f64::NEG_INFINITY;
    let mut k2_error: f64 = 0.0;
    let mut k2_spread: f64 = 0.0;
    let mut oracle_gap: f64 = 0.0;
    let oracle_resolution = config.resolution.min(ORACLE_MAX_RESOLUTION);

    for &k in &config.k_list {
        let sys = ConeSystem::new(k)?;
        let mut k2_reference: Option<Vec<f64>> = None;
        for &a in &config.a_list {
            let report = verify_cone_bound(&sys, a, config.n_max)?;
            contraction_pass &= report.pass;
            for (i, row) in report.rows.iter().enumerate() {
                let _ = writeln!(
                    csv,
                    "{k},{},{},{},{},{}",
                    csv_num(a),
                    row.n,
                    csv_num(row.total),
                    csv_num(row.bound),
                    csv_num(row.ratio)
                );
                worst_excess = worst_excess.max(row.total - row.bound);
                if i > 0 {
                    worst_step = worst_step.max(row.total - report.rows[i - 1].total);
                }
                if k == 2 {
                    k2_error = k2_error.max((row.total - 2f64.powi(1 - row.n as i32)).abs());
                }
            }
            if k == 2 {
                let totals: Vec<f64> = report.rows.iter().map(|r| r.total).collect();
                match &k2_reference {
                    None => k2_reference = Some(totals),
                    Some(reference) => {
                        for (t, r) in totals.iter().zip(reference) {
                            k2_spread = k2_spread.max((t - r).abs());
                        }
                    }
                }
            }
            for row in report.rows.iter().take(ORACLE_DEPTH.min(config.n_max) + 1) {
                let estimate = brute_force_slice(&sys, a, row.n, oracle_resolution)?;
                oracle_gap = oracle_gap.max((estimate.measure - row.total).abs());
            }
        }
    }
    output.write("cones.csv", &csv)?;

    let figure_k = if config.k_list.contains(&2) {
        2
    } else {
        config.k_list[0]
    };
    let data = figures::cones_dataset(&ConeSystem::new(figure_k)?, config.n_max.min(ORACLE_DEPTH))?;
    output.write_figure(FigureKind::Cones, &data)?;

    let mut criteria = vec![Criterion::at_most("cones.bound", worst_excess, CONE_TOL)];
    criteria.push(Criterion {
        id: "cones.contraction".into(),
        value: if contraction_pass { 1.0 } else { 0.0 },
        bound: 1.0,
        pass: contraction_pass,
    });
    if config.n_max > 0 {
        criteria.push(Criterion {
            id: "cones.strictly_decreasing".into(),
            value: worst_step,
            bound: 0.0,
            pass: worst_step < 0.0,
        });
    }
    if config.k_list.contains(&2) {
        criteria.push(Criterion::at_most("cones.k2_exact", k2_error, CONE_TOL));
        criteria.push(Criterion::at_most(
            "cones.k2_independent_of_a",
            k2_spread,
            CONE_TOL,
        ));
    }
    criteria.push(Criterion::at_most(
        "cones.oracle",
        oracle_gap,
        (10.0 * oracle_resolution).max(1e-6),
    ));
    Ok(criteria)
}

fn fatcantor_suite(
    config: &ExperimentConfig,
    cc: &CantorConstruction,
    output: &Output,
) -> Result<Vec<Criterion>, RunError> {
    let top = config.level_max;
    let measures = (0..=top + 1)
        .map(|n| cc.level_measure(n))
        .collect::<Result<Vec<f64>, Error>>()?;
    let mut csv = String::from("n,level_measure,closed_form,beta,drop,residual\n");
    let mut worst_residual: f64 = 0.0;
    for n in 0..=top {
        let drop = measures[n] - measures[n + 1];
        let residual = drop - cc.beta().get(n);
        worst_residual = worst_residual.max(residual.abs());
        let _ = writeln!(
            csv,
            "{n},{},{},{},{},{}",
            csv_num(measures[n]),
            csv_num(cc.level_measure_closed_form(n)),
            csv_num(cc.beta().get(n)),
            csv_num(drop),
            csv_num(residual)
        );
    }
    output.write("fatcantor.csv", &csv)?;
    output.write_json("data/tree.json", &cc.tree_dump(top))?;

    let limit = 2.0 * cc.a() - 2.0 * cc.b() * zeta(config.p).expect("feasible p > 1");
    let at_limit_level = cc.level_measure(LIMIT_LEVEL)?;
    // Exact tail of the series beyond the limit level.
    let tail: f64 = 2.0 * cc.b() * zeta(config.p).unwrap()
        - (0..LIMIT_LEVEL).map(|n| cc.beta().get(n)).sum::<f64>();
    Ok(vec![
        Criterion::at_most("fatcantor.telescoping", worst_residual, TELESCOPE_TOL),
        Criterion::at_most(
            "fatcantor.limit_level20",
            (at_limit_level - limit).abs(),
            LIMIT_TOL,
        ),
        Criterion::at_most(
            "fatcantor.tail_identity",
            (at_limit_level - limit - tail).abs(),
            TELESCOPE_TOL,
        ),
        Criterion::above("fatcantor.limit_positive", limit, 0.0),
    ])
}

fn bowen_suite(
    config: &ExperimentConfig,
    bowen: &BowenSystem,
    output: &Output,
) -> Result<Vec<Criterion>, RunError> {
    let report: SurgeryReport = bowen.verify_surgery(config.level_max.min(MAX_SURGERY_LEVEL))?;
    output.write_json("surgery.json", &report)?;
    let level_error = report
        .levels
        .iter()
        .map(|row| (row.sup_deviation - row.expected).abs())
        .fold(0.0, f64::max);
    let max_jump = report.splices.iter().map(|s| s.jump).fold(0.0, f64::max);
    Ok(vec![
        Criterion::at_most(
            "surgery.endpoint_derivative",
            report.endpoint_max_error,
            IDENTITY_TOL,
        ),
        Criterion::at_most("surgery.gap_sup_deviation", level_error, IDENTITY_TOL),
        Criterion {
            id: "surgery.gap_sup_decreasing".into(),
            value: if report.decreasing_pass { 1.0 } else { 0.0 },
            bound: 1.0,
            pass: report.decreasing_pass,
        },
        Criterion::at_most(
            "surgery.splice_continuity",
            max_jump,
            crate::bowen::SPLICE_TOL,
        ),
        Criterion::above("surgery.monotone_min_step", report.monotone_min_step, 0.0),
    ])
}

fn horseshoe_suite(
    config: &ExperimentConfig,
    ps: &PoincareSystem,
    output: &Output,
) -> Result<Vec<Criterion>, RunError> {
    let cc = ps.bowen().construction();
    let (a, b) = (ps.a(), ps.b());

    let mut product_error: f64 = 0.0;
    for n in 0..=config.depth.min(PRODUCT_DEPTH) {
        for item in ps.fiber_intervals(n)? {
            let tree = cc.interval_endpoints(item.word);
            product_error = product_error
                .max((tree.lo - item.interval.lo).abs())
                .max((tree.hi - item.interval.hi).abs());
        }
    }

    let mut csv = String::from("N,estimate,exact_product,envelope\n");
    let mut envelope_excess = f64::NEG_INFINITY;
    let mut min_estimate = f64::INFINITY;
    for n in 0..=config.depth {
        let est = ps.horseshoe_measure(n, config.resolution)?;
        let _ = writeln!(
            csv,
            "{n},{},{},{}",
            csv_num(est.estimated_area),
            csv_num(est.exact_level_area),
            csv_num(est.envelope)
        );
        envelope_excess =
            envelope_excess.max((est.estimated_area - est.exact_level_area).abs() - est.envelope);
        min_estimate = min_estimate.min(est.estimated_area);
    }
    output.write("horseshoe.csv", &csv)?;

    let identities = [((a, a), (a, -b)), ((b, -a), (-a, -a)), ((a, -a), (a, -a))];
    let mut identity_error: f64 = 0.0;
    for (p, expected) in identities {
        let (x, y) = ps.poincare_f2_on_a(p)?;
        identity_error = identity_error
            .max((x - expected.0).abs())
            .max((y - expected.1).abs());
    }

    let eps = cc.beta().get(3) / 16.0;
    let witness = ps.no_stable_segment_witness(WITNESS_SAMPLES, eps, config.depth, config.seed)?;

    let level = cc.level_measure(config.depth)?;
    let area = level * level;
    let volume = suspension_volume(area, config.delta)?;

    output.write_figure(FigureKind::Partition, &figures::partition_dataset(ps))?;
    output.write_figure(FigureKind::Image, &figures::image_dataset(ps)?)?;
    output.write_figure(
        FigureKind::Horseshoe,
        &figures::horseshoe_dataset(ps, config.depth, config.seed),
    )?;

    Ok(vec![
        Criterion::at_most("horseshoe.product_structure", product_error, IDENTITY_TOL),
        Criterion::at_most("horseshoe.grid_envelope", envelope_excess, 0.0),
        Criterion::above("horseshoe.estimate_positive", min_estimate, 0.0),
        Criterion::at_most("horseshoe.f2_identities", identity_error, IDENTITY_TOL),
        Criterion {
            id: "horseshoe.vertical_gap_witness".into(),
            value: witness.witnesses as f64 / witness.samples.max(1) as f64,
            bound: 1.0,
            pass: witness.pass,
        },
        Criterion {
            id: "suspension.volume".into(),
            value: volume,
            bound: config.delta * area,
            pass: volume > 0.0 && volume == config.delta * area,
        },
    ])
}

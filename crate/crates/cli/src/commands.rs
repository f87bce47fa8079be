//! Subcommand definitions: option structs (flags and config-file keys are
//! the same names) and the functions that produce reports from them.

use crate::output::{Report, ResolvedConfig};
use anyhow::{anyhow, bail, Context, Result};
use arcspin::bounds::{self, CbarSettings, CriterionReport};
use arcspin::config::{embed, AngleConfig, LabelConfig};
use arcspin::energy::{barrier_scaling, clock_energy, xy_energy, ModelParams};
use arcspin::exact::{
    chain_transfer_type1, chain_transfer_type2, compare_exact, enumerate_clock, quasilocality_scan,
    ExactComparison, ExactResult,
};
use arcspin::fmt::sig12;
use arcspin::lattice::{Boundary, Lattice, LatticeSpec};
use arcspin::partition::ArcPartition;
use arcspin::sampler::{
    burn_in_xy, compare_discretisations, constrained_sweep_xy, east_west_order,
    embedded_correlation, heatbath_sweep_clock, metropolis_sweep_xy, ClockState, ObservableSeries,
    XyState,
};
use clap::Args;
use serde::Deserialize;
use serde_json::json;
use std::f64::consts::PI;

/// Cartesian sweep size limit.
const MAX_SWEEP_POINTS: usize = 10_000;

macro_rules! merge_file {
    ($opts:ident, $file:expr; $($field:ident),+ $(,)?) => {
        if let Some(file) = $file {
            $( $opts.$field = $opts.$field.take().or(file.$field); )+
        }
    };
}

fn require<T>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| anyhow!("missing required parameter '{name}'"))
}

/// Load the given subcommand's options from a TOML file; unknown keys are
/// rejected by the option structs' deserialisers.
pub fn parse_file_opts<T: for<'de> Deserialize<'de>>(
    path: Option<&std::path::Path>,
) -> Result<Option<T>> {
    let Some(path) = path else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let parsed =
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    Ok(Some(parsed))
}

fn parse_range(range: &str) -> Result<Vec<usize>> {
    let (lo, hi) = range
        .split_once(':')
        .ok_or_else(|| anyhow!("range must look like lo:hi, got '{range}'"))?;
    let lo: usize = lo.trim().parse().context("range lower bound")?;
    let hi: usize = hi.trim().parse().context("range upper bound")?;
    if lo > hi {
        bail!("range lower bound {lo} exceeds upper bound {hi}");
    }
    Ok((lo..=hi).collect())
}

fn parse_offset(text: &str, q: usize) -> Result<f64> {
    match text {
        "north-centered" => Ok(PI / 2.0 - PI / q as f64),
        "clock-aligned" => Ok(-PI / q as f64),
        other => other.parse::<f64>().map_err(|_| {
            anyhow!("offset must be north-centered, clock-aligned, or radians; got '{other}'")
        }),
    }
}

fn parse_boundary(text: &str) -> Result<Boundary> {
    Ok(Boundary::parse(text)?)
}

type SweepPoints = Vec<(f64, usize)>;

/// Sorted, deduplicated cartesian product of the sweep parameters, plus any
/// warnings raised while building it.
fn sweep_points(betas: &[f64], qs: &[usize]) -> Result<(SweepPoints, Vec<String>)> {
    if betas.is_empty() {
        bail!("beta list is empty");
    }
    if qs.is_empty() {
        bail!("q list is empty");
    }
    if betas.len() * qs.len() > MAX_SWEEP_POINTS {
        bail!(
            "sweep of {} points exceeds the {MAX_SWEEP_POINTS}-point cap",
            betas.len() * qs.len()
        );
    }
    let mut points: Vec<(f64, usize)> = betas
        .iter()
        .flat_map(|&b| qs.iter().map(move |&q| (b, q)))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let before = points.len();
    points.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    let mut warnings = Vec::new();
    if points.len() != before {
        let warning = format!(
            "deduplicated {} repeated parameter tuples",
            before - points.len()
        );
        eprintln!("warning: {warning}");
        warnings.push(warning);
    }
    Ok((points, warnings))
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriterionOpts {
    /// Lattice dimension d
    #[arg(long)]
    pub d: Option<usize>,
    /// Inverse temperature(s), comma separated
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub beta: Option<Vec<f64>>,
    /// Arc count(s), comma separated
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub q: Option<Vec<usize>>,
    /// Inclusive arc-count range lo:hi (alternative to --q)
    #[arg(long)]
    pub q_range: Option<String>,
}

pub fn run_criterion(mut opts: CriterionOpts, file: Option<CriterionOpts>) -> Result<Report> {
    merge_file!(opts, file; d, beta, q, q_range);
    let d = require(opts.d, "d")?;
    let betas = require(opts.beta, "beta")?;
    let qs = match (opts.q, opts.q_range) {
        (Some(_), Some(_)) => bail!("give either --q or --q-range, not both"),
        (Some(qs), None) => qs,
        (None, Some(range)) => parse_range(&range)?,
        (None, None) => bail!("missing required parameter 'q' (or 'q_range')"),
    };
    let (points, warnings) = sweep_points(&betas, &qs)?;

    let mut config = ResolvedConfig::new("criterion");
    config.set("d", d);
    config.set("beta", format!("{betas:?}"));
    config.set("q", format!("{qs:?}"));

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut first_certified: Vec<(f64, Option<usize>)> = Vec::new();
    for &(beta, q) in &points {
        if first_certified.last().map(|&(b, _)| b) != Some(beta) {
            first_certified.push((beta, None));
        }
        match CriterionReport::analytic(d, beta, q) {
            Ok(report) => {
                let slot = first_certified.last_mut().expect("pushed above");
                if report.certified && slot.1.is_none() {
                    slot.1 = Some(q);
                }
                rows.push(report.csv_row());
            }
            Err(err) => failures.push(format!("beta={beta} q={q}: {err}")),
        }
    }
    Ok(Report {
        config,
        csv_header: CriterionReport::CSV_HEADER.to_string(),
        csv_rows: rows,
        summary_extra: json!({
            "first_certified_q": first_certified
                .iter()
                .map(|&(b, q)| json!({"beta": b, "q": q}))
                .collect::<Vec<_>>(),
            "warnings": warnings,
        }),
        failures,
    })
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DobrushinOpts {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub beta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub q: Option<Vec<usize>>,
    /// Conditioning angles per arc in the eta scan
    #[arg(long)]
    pub eta_grid: Option<usize>,
    /// Quadrature nodes per arc
    #[arg(long)]
    pub quad_points: Option<usize>,
}

pub fn run_dobrushin(mut opts: DobrushinOpts, file: Option<DobrushinOpts>) -> Result<Report> {
    merge_file!(opts, file; d, beta, q, eta_grid, quad_points);
    let d = require(opts.d, "d")?;
    let betas = require(opts.beta, "beta")?;
    let qs = require(opts.q, "q")?;
    let defaults = CbarSettings::default();
    let settings = CbarSettings {
        eta_grid: opts.eta_grid.unwrap_or(defaults.eta_grid),
        quad_points: opts.quad_points.unwrap_or(defaults.quad_points),
    };
    let (points, warnings) = sweep_points(&betas, &qs)?;

    let mut config = ResolvedConfig::new("dobrushin");
    config.set("d", d);
    config.set("beta", format!("{betas:?}"));
    config.set("q", format!("{qs:?}"));
    config.set("eta_grid", settings.eta_grid);
    config.set("quad_points", settings.quad_points);

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &(beta, q) in &points {
        match bounds::cbar_sum(d, beta, q, settings) {
            Ok(report) => rows.push(report.csv_row()),
            Err(err) => failures.push(format!("beta={beta} q={q}: {err}")),
        }
    }
    Ok(Report {
        config,
        csv_header: CriterionReport::CSV_HEADER.to_string(),
        csv_rows: rows,
        summary_extra: json!({ "warnings": warnings }),
        failures,
    })
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmaOpts {
    /// Number of atoms in the trial measures
    #[arg(long)]
    pub atoms: Option<usize>,
    /// Random restarts
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Domain lower end (within [-1, 1])
    #[arg(long)]
    pub lo: Option<f64>,
    /// Domain upper end (within [-1, 1])
    #[arg(long)]
    pub hi: Option<f64>,
}

pub fn run_lemma(mut opts: LemmaOpts, file: Option<LemmaOpts>) -> Result<Report> {
    merge_file!(opts, file; atoms, restarts, seed, lo, hi);
    let atoms = require(opts.atoms, "atoms")?;
    let restarts = opts.restarts.unwrap_or(16);
    let seed = opts.seed.unwrap_or(0);
    let lo = opts.lo.unwrap_or(-1.0);
    let hi = opts.hi.unwrap_or(1.0);

    let (measure, value) = bounds::maximize_q_in(atoms, restarts, seed, lo, hi)?;

    let mut config = ResolvedConfig::new("lemma");
    config.set("atoms", atoms);
    config.set("restarts", restarts);
    config.set("seed", seed);
    config.set("lo", lo);
    config.set("hi", hi);

    let rows = measure
        .atoms()
        .iter()
        .map(|&(x, w)| format!("{},{}", sig12(x), sig12(w)))
        .collect();
    Ok(Report {
        config,
        csv_header: "location,weight".to_string(),
        csv_rows: rows,
        summary_extra: json!({ "best_value": value, "seed": seed }),
        failures: Vec::new(),
    })
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapOpts {
    /// Even arc counts, ascending
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub q_list: Option<Vec<usize>>,
}

pub fn run_gap(mut opts: GapOpts, file: Option<GapOpts>) -> Result<Report> {
    merge_file!(opts, file; q_list);
    let q_list = require(opts.q_list, "q_list")?;
    let scaling = barrier_scaling(&q_list)?;

    let mut config = ResolvedConfig::new("gap");
    config.set("q_list", format!("{q_list:?}"));

    let rows = scaling
        .points
        .iter()
        .map(|&(q, b)| format!("{q},{}", sig12(b)))
        .collect();
    Ok(Report {
        config,
        csv_header: "q,barrier_height".to_string(),
        csv_rows: rows,
        summary_extra: json!({ "log_log_slope": scaling.slope }),
        failures: Vec::new(),
    })
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleOpts {
    /// Model: xy, clock, or constrained
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Side length L
    #[arg(long)]
    pub side: Option<usize>,
    /// Boundary: periodic or open
    #[arg(long)]
    pub boundary: Option<String>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub q: Option<usize>,
    /// Partition offset: north-centered, clock-aligned, or radians
    #[arg(long)]
    pub offset: Option<String>,
    #[arg(long)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Observables: energy, nn, mew (comma separated)
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub observables: Option<Vec<String>>,
    /// Constrained chains start in this well: east or west
    #[arg(long)]
    pub start_well: Option<String>,
}

pub fn run_sample(mut opts: SampleOpts, file: Option<SampleOpts>) -> Result<Report> {
    merge_file!(opts, file; model, d, side, boundary, beta, q, offset, sweeps, burn_in, seed,
        observables, start_well);
    let model = require(opts.model, "model")?;
    let d = require(opts.d, "d")?;
    let side = require(opts.side, "side")?;
    let boundary = parse_boundary(&opts.boundary.unwrap_or_else(|| "periodic".into()))?;
    let beta = require(opts.beta, "beta")?;
    let q = require(opts.q, "q")?;
    let sweeps = opts.sweeps.unwrap_or(10_000);
    let burn_in = opts.burn_in.unwrap_or(1_000);
    let seed = opts.seed.unwrap_or(0);
    let observables = opts
        .observables
        .unwrap_or_else(|| vec!["energy".into(), "nn".into()]);
    let offset_text = opts.offset.unwrap_or_else(|| match model.as_str() {
        "constrained" => "north-centered".into(),
        _ => "clock-aligned".into(),
    });
    let offset = parse_offset(&offset_text, q)?;

    let lattice = Lattice::build(LatticeSpec::new(d, side, boundary))?;
    let params = ModelParams::new(beta, q)?;
    let partition = ArcPartition::new(q, offset)?;

    let mut config = ResolvedConfig::new("sample");
    config.set("model", &model);
    config.set("d", d);
    config.set("side", side);
    config.set("boundary", boundary.as_str());
    config.set("beta", sig12(beta));
    config.set("q", q);
    config.set("offset", sig12(offset));
    config.set("sweeps", sweeps);
    config.set("burn_in", burn_in);
    config.set("seed", seed);
    config.set("observables", observables.join(","));

    for obs in &observables {
        let known = match obs.as_str() {
            "energy" | "nn" => true,
            "mew" => model == "constrained",
            _ => false,
        };
        if !known {
            bail!("unknown observable '{obs}' for model '{model}'");
        }
    }

    // One row per measured sweep, one column per observable.
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(sweeps); observables.len()];
    match model.as_str() {
        "xy" => {
            let mut state = XyState::new(AngleConfig::constant(lattice.n_sites(), 0.0), seed);
            let width = burn_in_xy(&mut state, &lattice, &params, burn_in)?;
            for _ in 0..sweeps {
                metropolis_sweep_xy(&mut state, &lattice, &params, width)?;
                record_xy(&observables, &lattice, &params, &state.config, &mut columns)?;
            }
        }
        "clock" => {
            let mut state = ClockState::new(LabelConfig::constant(lattice.n_sites(), 1, q)?, seed);
            for _ in 0..burn_in {
                heatbath_sweep_clock(&mut state, &lattice, &params)?;
            }
            for _ in 0..sweeps {
                heatbath_sweep_clock(&mut state, &lattice, &params)?;
                for (slot, obs) in observables.iter().enumerate() {
                    let value = match obs.as_str() {
                        "energy" => clock_energy(&lattice, &state.config, &params)?,
                        "nn" => embedded_correlation(&lattice, &embed(&state.config), 1)?,
                        _ => unreachable!("validated above"),
                    };
                    columns[slot].push(value);
                }
            }
        }
        "constrained" => {
            if q % 2 != 0 {
                bail!("constrained sampling needs even q, got {q}");
            }
            let assigned = LabelConfig::alternating(&lattice, 1, q / 2 + 1, q)?;
            let start_east = match opts.start_well.as_deref().unwrap_or("east") {
                "east" => true,
                "west" => false,
                other => bail!("start_well must be east or west, got '{other}'"),
            };
            config.set("start_well", if start_east { "east" } else { "west" });
            let half = PI / q as f64;
            let angles: Vec<f64> = (0..lattice.n_sites())
                .map(|s| {
                    let mid = partition.midpoint(assigned.get(s))?;
                    let orientation = -mid.sin().signum();
                    let sign = if start_east { 1.0 } else { -1.0 };
                    Ok(mid + sign * orientation * 0.8 * half)
                })
                .collect::<arcspin::Result<_>>()?;
            let mut state = XyState::new(AngleConfig::new(angles), seed);
            let width = partition.width() / 2.0;
            for _ in 0..burn_in {
                constrained_sweep_xy(&mut state, &lattice, &params, &partition, &assigned, width)?;
            }
            for _ in 0..sweeps {
                constrained_sweep_xy(&mut state, &lattice, &params, &partition, &assigned, width)?;
                for (slot, obs) in observables.iter().enumerate() {
                    let value = match obs.as_str() {
                        "energy" => xy_energy(&lattice, &state.config, &params)?,
                        "nn" => embedded_correlation(&lattice, &state.config, 1)?,
                        "mew" => east_west_order(&state.config, &partition, &assigned)?,
                        _ => unreachable!("validated above"),
                    };
                    columns[slot].push(value);
                }
            }
        }
        other => bail!("unknown model '{other}' (expected xy, clock, or constrained)"),
    }

    let mut summary = serde_json::Map::new();
    for (obs, values) in observables.iter().zip(&columns) {
        let series = ObservableSeries::from_values(obs.clone(), values.clone(), 32)?;
        summary.insert(
            obs.clone(),
            json!({ "mean": series.mean, "std_error": series.std_error }),
        );
    }

    let rows = (0..sweeps)
        .map(|sweep| {
            let mut row = sweep.to_string();
            for column in &columns {
                row.push(',');
                row.push_str(&sig12(column[sweep]));
            }
            row
        })
        .collect();
    Ok(Report {
        config,
        csv_header: format!("sweep,{}", observables.join(",")),
        csv_rows: rows,
        summary_extra: json!({ "batch_means": summary, "seed": seed }),
        failures: Vec::new(),
    })
}

fn record_xy(
    observables: &[String],
    lattice: &Lattice,
    params: &ModelParams,
    config: &AngleConfig,
    columns: &mut [Vec<f64>],
) -> Result<()> {
    for (slot, obs) in observables.iter().enumerate() {
        let value = match obs.as_str() {
            "energy" => xy_energy(lattice, config, params)?,
            "nn" => embedded_correlation(lattice, config, 1)?,
            _ => unreachable!("validated above"),
        };
        columns[slot].push(value);
    }
    Ok(())
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareOpts {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub side: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Record one measurement per this many sweeps
    #[arg(long)]
    pub measure_every: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn run_compare(mut opts: CompareOpts, file: Option<CompareOpts>) -> Result<Report> {
    merge_file!(opts, file; d, side, beta, q, sweeps, burn_in, measure_every, seed);
    let d = require(opts.d, "d")?;
    let side = require(opts.side, "side")?;
    let beta = require(opts.beta, "beta")?;
    let q = require(opts.q, "q")?;
    let sweeps = opts.sweeps.unwrap_or(10_000);
    let burn_in = opts.burn_in.unwrap_or(1_000);
    let measure_every = opts.measure_every.unwrap_or(10);
    let seed = opts.seed.unwrap_or(0);

    let lattice = Lattice::build(LatticeSpec::new(d, side, Boundary::Periodic))?;
    let cmp = compare_discretisations(&lattice, beta, q, sweeps, burn_in, measure_every, seed)?;

    let mut config = ResolvedConfig::new("compare");
    config.set("d", d);
    config.set("side", side);
    config.set("beta", sig12(beta));
    config.set("q", q);
    config.set("sweeps", sweeps);
    config.set("burn_in", burn_in);
    config.set("measure_every", measure_every);
    config.set("seed", seed);

    let rows = cmp
        .route1
        .values
        .iter()
        .zip(&cmp.route2.values)
        .enumerate()
        .map(|(i, (&a, &b))| format!("{i},{},{}", sig12(a), sig12(b)))
        .collect();
    Ok(Report {
        config,
        csv_header: "measurement,route1_nn,route2_nn".to_string(),
        csv_rows: rows,
        summary_extra: json!({
            "route1": { "mean": cmp.route1.mean, "std_error": cmp.route1.std_error },
            "route2": { "mean": cmp.route2.mean, "std_error": cmp.route2.std_error },
            "difference": cmp.difference,
            "combined_se": cmp.combined_se,
            "sigma_distance": cmp.sigma_distance(),
            "certified": cmp.certified,
            "seed": seed,
        }),
        failures: Vec::new(),
    })
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleOpts {
    /// Mode: enumerate, transfer1, transfer2, or compare
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Side length (chain length for transfer modes)
    #[arg(long)]
    pub side: Option<usize>,
    #[arg(long)]
    pub boundary: Option<String>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Quadrature nodes per arc (type-1 operators)
    #[arg(long)]
    pub m_per_arc: Option<usize>,
    /// Partition offset for type-1 operators
    #[arg(long)]
    pub offset: Option<String>,
}

pub fn run_oracle(mut opts: OracleOpts, file: Option<OracleOpts>) -> Result<Report> {
    merge_file!(opts, file; mode, d, side, boundary, q, beta, m_per_arc, offset);
    let mode = require(opts.mode, "mode")?;
    let side = require(opts.side, "side")?;
    let q = require(opts.q, "q")?;
    let beta = require(opts.beta, "beta")?;
    let boundary = parse_boundary(&opts.boundary.unwrap_or_else(|| "open".into()))?;
    let m_per_arc = opts.m_per_arc.unwrap_or(16);

    let mut config = ResolvedConfig::new("oracle");
    config.set("mode", &mode);
    config.set("side", side);
    config.set("boundary", boundary.as_str());
    config.set("q", q);
    config.set("beta", sig12(beta));

    let exact_report = |result: ExactResult, config: ResolvedConfig| Report {
        config,
        csv_header: ExactResult::CSV_HEADER.to_string(),
        csv_rows: result.csv_rows(),
        summary_extra: json!({
            "log_partition": result.log_partition,
            "mean_energy": result.mean_energy,
        }),
        failures: Vec::new(),
    };

    match mode.as_str() {
        "enumerate" => {
            let d = require(opts.d, "d")?;
            config.set("d", d);
            let lattice = Lattice::build(LatticeSpec::new(d, side, boundary))?;
            Ok(exact_report(enumerate_clock(&lattice, q, beta)?, config))
        }
        "transfer2" => Ok(exact_report(
            chain_transfer_type2(side, q, beta, boundary)?,
            config,
        )),
        "transfer1" => {
            let offset = parse_offset(&opts.offset.unwrap_or_else(|| "clock-aligned".into()), q)?;
            config.set("m_per_arc", m_per_arc);
            config.set("offset", sig12(offset));
            let partition = ArcPartition::new(q, offset)?;
            Ok(exact_report(
                chain_transfer_type1(side, &partition, beta, m_per_arc, boundary)?,
                config,
            ))
        }
        "compare" => {
            config.set("m_per_arc", m_per_arc);
            let cmp = compare_exact(side, q, beta, m_per_arc)?;
            Ok(Report {
                config,
                csv_header: ExactComparison::CSV_HEADER.to_string(),
                csv_rows: vec![cmp.csv_row()],
                summary_extra: json!({ "difference": cmp.difference }),
                failures: Vec::new(),
            })
        }
        other => bail!("unknown oracle mode '{other}'"),
    }
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuasilocalityOpts {
    /// Chain length
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub m_per_arc: Option<usize>,
    /// Base labels: alternating, or constant:<label>
    #[arg(long)]
    pub base: Option<String>,
    /// Flip distances from the middle site
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub distances: Option<Vec<usize>>,
    #[arg(long)]
    pub offset: Option<String>,
}

pub fn run_quasilocality(
    mut opts: QuasilocalityOpts,
    file: Option<QuasilocalityOpts>,
) -> Result<Report> {
    merge_file!(opts, file; length, q, beta, m_per_arc, base, distances, offset);
    let length = require(opts.length, "length")?;
    let q = require(opts.q, "q")?;
    let beta = require(opts.beta, "beta")?;
    let m_per_arc = opts.m_per_arc.unwrap_or(24);
    let base_text = opts.base.unwrap_or_else(|| "alternating".into());
    let distances = opts
        .distances
        .unwrap_or_else(|| (1..=((length.saturating_sub(1)) / 2).min(5)).collect());
    let offset = parse_offset(&opts.offset.unwrap_or_else(|| "north-centered".into()), q)?;
    let partition = ArcPartition::new(q, offset)?;

    let base_labels = if base_text == "alternating" {
        if q % 2 != 0 {
            bail!("alternating base needs even q");
        }
        LabelConfig::new(
            (0..length)
                .map(|t| if t % 2 == 0 { 1 } else { q / 2 + 1 })
                .collect(),
            q,
        )?
    } else if let Some(label) = base_text.strip_prefix("constant:") {
        let label: usize = label.parse().context("constant base label")?;
        LabelConfig::constant(length, label, q)?
    } else {
        bail!("base must be 'alternating' or 'constant:<label>', got '{base_text}'");
    };

    let scan = quasilocality_scan(
        length,
        &partition,
        beta,
        m_per_arc,
        &base_labels,
        &distances,
    )?;

    let mut config = ResolvedConfig::new("quasilocality");
    config.set("length", length);
    config.set("q", q);
    config.set("beta", sig12(beta));
    config.set("m_per_arc", m_per_arc);
    config.set("base", &base_text);
    config.set("offset", sig12(offset));
    config.set("distances", format!("{distances:?}"));

    let rows = scan
        .iter()
        .map(|&(d, tv)| format!("{d},{}", sig12(tv)))
        .collect();
    Ok(Report {
        config,
        csv_header: "distance,total_variation".to_string(),
        csv_rows: rows,
        summary_extra: json!({
            "terminal_variation": scan.last().map(|&(_, tv)| tv),
        }),
        failures: Vec::new(),
    })
}

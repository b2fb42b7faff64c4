use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use nni_validity::{
    decompose_spec, delta_j_max, delta_j_pair, find_alpha_c_at_horizon, fit_log, AlphaCResult,
    ChainSpec, Complex64, DecompositionCache, InitialState, SearchSettings, TauGrid, Tolerance,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{
    AVsNmaxArgs, AlphaCArgs, AlphaCVsTArgs, ArgmaxMapArgs, DeltaJArgs, EvolveArgs, Model,
    SweepOptions, Target,
};
use crate::cache::{Cache, CellKey};
use crate::output::{self, num, round12, Metadata, Table};
use crate::Usage;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Complete,
    Partial,
}

impl Status {
    fn from_failures(failures: usize) -> Self {
        if failures == 0 {
            Status::Complete
        } else {
            Status::Partial
        }
    }
}

fn settings(opts: &SweepOptions) -> Result<SearchSettings> {
    let settings = SearchSettings {
        epsilon: Tolerance::new(opts.epsilon)?,
        alpha_step: opts.alpha_step,
        tau_step: opts.tau_step,
    };
    settings.validate()?;
    Ok(settings)
}

fn horizon_factor(target: Target, explicit: Option<f64>) -> Result<f64> {
    let factor = explicit.unwrap_or_else(|| target.kind().default_horizon_factor());
    if !(factor.is_finite() && factor > 0.0) {
        bail!(Usage(format!(
            "horizon factor must be positive, got {factor}"
        )));
    }
    Ok(factor)
}

/// One `alpha_c` evaluation, served from the cache when possible.
fn alpha_c_cell(
    cache: &Cache,
    n: usize,
    target: Target,
    horizon: f64,
    settings: &SearchSettings,
) -> nni_validity::Result<AlphaCResult> {
    let key = CellKey::alpha_c(
        n,
        target.kind(),
        horizon,
        settings.epsilon.value(),
        settings.tau_step,
        settings.alpha_step,
    );
    cache.alpha_c(&key, || {
        find_alpha_c_at_horizon(n, target.kind(), horizon, settings)
    })
}

type Cell = (Target, usize, nni_validity::Result<AlphaCResult>);

/// Evaluates every (target, N) cell in parallel; output is ordered by key.
fn n_sweep(
    cache: &Cache,
    targets: &[Target],
    ns: &[usize],
    factor: Option<f64>,
    settings: &SearchSettings,
) -> Result<Vec<Cell>> {
    let mut targets = targets.to_vec();
    targets.sort();
    targets.dedup();
    let mut cells = Vec::new();
    for &target in &targets {
        let factor = horizon_factor(target, factor)?;
        cells.extend(ns.iter().map(|&n| (target, n, factor * n as f64)));
    }
    Ok(cells
        .into_par_iter()
        .map(|(target, n, horizon)| (target, n, alpha_c_cell(cache, n, target, horizon, settings)))
        .collect())
}

/// Partial when some cells failed; an error (carrying the first failure)
/// when all of them did.
fn sweep_status<'a>(
    outcomes: impl IntoIterator<Item = &'a nni_validity::Result<AlphaCResult>>,
    other_failures: usize,
) -> Result<Status> {
    let (mut total, mut first_error) = (0, None);
    let mut failed = 0;
    for outcome in outcomes {
        total += 1;
        if let Err(err) = outcome {
            failed += 1;
            first_error.get_or_insert_with(|| err.clone());
        }
    }
    match first_error {
        Some(err) if failed == total => Err(err.into()),
        _ => Ok(Status::from_failures(failed + other_failures)),
    }
}

fn status_text(outcome: &nni_validity::Result<AlphaCResult>) -> String {
    match outcome {
        Ok(_) => "ok".into(),
        Err(err) => format!("error: {err}"),
    }
}

fn horizon_label(targets: &[Target], factor: Option<f64>) -> Result<String> {
    let mut labels = Vec::new();
    for &t in targets {
        labels.push(format!("{}N", num(horizon_factor(t, factor)?)));
    }
    labels.dedup();
    Ok(labels.join("/"))
}

fn sweep_metadata(command: &'static str, s: &SearchSettings, horizon: String) -> Metadata {
    Metadata {
        command,
        epsilon: Some(s.epsilon.value()),
        tau_step: s.tau_step,
        alpha_step: Some(s.alpha_step),
        horizon,
    }
}

fn read_state(path: &Path) -> Result<InitialState> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut amplitudes = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .collect();
        let parse = |p: &str| {
            p.parse::<f64>().map_err(|_| {
                Usage(format!(
                    "{}:{}: invalid number `{p}`",
                    path.display(),
                    line_no + 1
                ))
            })
        };
        let amplitude = match parts.as_slice() {
            [re] => Complex64::new(parse(re)?, 0.0),
            [re, im] => Complex64::new(parse(re)?, parse(im)?),
            _ => bail!(Usage(format!(
                "{}:{}: expected `re im`",
                path.display(),
                line_no + 1
            ))),
        };
        amplitudes.push(amplitude);
    }
    Ok(InitialState::new(amplitudes)?)
}

pub fn evolve(args: &EvolveArgs) -> Result<Status> {
    if !(args.t_max.is_finite() && args.t_max >= 0.0) {
        bail!(Usage(format!(
            "t-max must be non-negative, got {}",
            args.t_max
        )));
    }
    let models = if args.both_models {
        vec![Model::Nearest, Model::All]
    } else {
        vec![args.model]
    };
    let decomps = models
        .iter()
        .map(|m| {
            let spec = ChainSpec::new(args.n, m.neighbor_range(args.n), args.alpha)?;
            decompose_spec(&spec)
        })
        .collect::<nni_validity::Result<Vec<_>>>()?;
    let grid = TauGrid::covering(args.t_max, args.tau_step)?;
    let meta = Metadata {
        command: "evolve",
        epsilon: None,
        tau_step: args.tau_step,
        alpha_step: None,
        horizon: num(grid.horizon()),
    };
    let suffix = |m: &Model| {
        if models.len() > 1 {
            format!("_{}", m.label())
        } else {
            String::new()
        }
    };

    if let Some(pair) = args.pair {
        let series = decomps
            .iter()
            .map(|d| d.series(pair.0, pair.1, &grid))
            .collect::<nni_validity::Result<Vec<_>>>()?;
        let mut header = vec!["tau".to_string()];
        for m in &models {
            let s = suffix(m);
            header.extend([format!("re_p{s}"), format!("im_p{s}"), format!("prob{s}")]);
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut table = Table::new(output::open(args.output.output.as_deref())?, &meta, &header)?;
        for s in 0..grid.len() {
            let mut row = vec![num(grid.tau(s))];
            for series in &series {
                let p = series.values[s];
                row.extend([num(p.re), num(p.im), num(p.norm_sqr())]);
            }
            table.row(&row)?;
        }
        table.finish()?;
    } else {
        let path = args
            .initial_state
            .as_deref()
            .expect("clap requires a pair or a state");
        let state = read_state(path)?;
        let mut header = vec!["tau".to_string(), "site".to_string()];
        for m in &models {
            let s = suffix(m);
            header.extend([format!("re_b{s}"), format!("im_b{s}"), format!("prob{s}")]);
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut table = Table::new(output::open(args.output.output.as_deref())?, &meta, &header)?;
        for s in 0..grid.len() {
            let tau = grid.tau(s);
            let evolved = decomps
                .iter()
                .map(|d| d.evolve(&state, tau))
                .collect::<nni_validity::Result<Vec<_>>>()?;
            for site in 0..args.n {
                let mut row = vec![num(tau), (site + 1).to_string()];
                for e in &evolved {
                    let b = e.amplitudes()[site];
                    row.extend([num(b.re), num(b.im), num(b.norm_sqr())]);
                }
                table.row(&row)?;
            }
        }
        table.finish()?;
    }
    Ok(Status::Complete)
}

#[derive(Serialize)]
struct DeltaJRecord {
    n: usize,
    alpha: f64,
    target: &'static str,
    horizon: f64,
    tau_step: f64,
    delta_j: f64,
    pair: (usize, usize),
    mirror: (usize, usize),
}

pub fn deltaj(args: &DeltaJArgs) -> Result<Status> {
    let factor = horizon_factor(args.target, args.horizon_factor)?;
    let cache = DecompositionCache::default();
    let records = args
        .n_range
        .values()
        .into_par_iter()
        .map(|n| -> nni_validity::Result<DeltaJRecord> {
            let horizon = factor * n as f64;
            let (result, pair, mirror) = match args.target {
                Target::P1n => {
                    let r = delta_j_pair(&cache, n, args.alpha, 1, n, horizon, args.tau_step)?;
                    (r, (1, n), (n, 1))
                }
                Target::Full => {
                    let m = delta_j_max(&cache, n, args.alpha, horizon, args.tau_step)?;
                    (m.result, m.pair, m.mirror)
                }
            };
            Ok(DeltaJRecord {
                n,
                alpha: args.alpha,
                target: args.target.name(),
                horizon: round12(result.horizon),
                tau_step: args.tau_step,
                delta_j: round12(result.value),
                pair,
                mirror,
            })
        })
        .collect::<nni_validity::Result<Vec<_>>>()?;
    let mut out = output::open(args.output.output.as_deref())?;
    for record in &records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(Status::Complete)
}

pub fn alphac(args: &AlphaCArgs) -> Result<Status> {
    let settings = settings(&args.sweep)?;
    let cache = Cache::new(args.sweep.cache_dir.clone());
    let ns = args.n_range.values();
    let cells = n_sweep(&cache, &args.target, &ns, args.horizon_factor, &settings)?;

    let meta = sweep_metadata(
        "alphac",
        &settings,
        horizon_label(&args.target, args.horizon_factor)?,
    );
    let header = [
        "n",
        "target",
        "horizon",
        "alpha_c",
        "alpha_ceiling",
        "pair_j",
        "pair_k",
        "mirror_j",
        "mirror_k",
        "binding_alpha",
        "binding_delta_j",
        "status",
    ];
    let mut table = Table::new(output::open(args.output.output.as_deref())?, &meta, &header)?;
    let mut fit_failures = 0;
    for (target, n, outcome) in &cells {
        let mut row = vec![n.to_string(), target.name().to_string()];
        match outcome {
            Ok(r) => {
                row.extend([num(r.horizon), num(r.alpha_c), num(r.alpha_ceiling)]);
                match r.binding {
                    Some(b) => row.extend([
                        b.pair.0.to_string(),
                        b.pair.1.to_string(),
                        b.mirror.0.to_string(),
                        b.mirror.1.to_string(),
                        num(b.alpha),
                        num(b.delta_j),
                    ]),
                    None => row.extend(std::iter::repeat_n(String::new(), 6)),
                }
            }
            Err(_) => {
                row.extend(std::iter::repeat_n(String::new(), 9));
            }
        }
        row.push(status_text(outcome));
        table.row(&row)?;
    }

    let mut by_target: BTreeMap<Target, Vec<(usize, f64)>> = BTreeMap::new();
    for (target, n, outcome) in &cells {
        if let Ok(r) = outcome {
            by_target.entry(*target).or_default().push((*n, r.alpha_c));
        }
    }
    if let (Some(end), Some(full)) = (by_target.get(&Target::P1n), by_target.get(&Target::Full)) {
        let dominates = end
            .iter()
            .filter_map(|(n, a)| full.iter().find(|(m, _)| m == n).map(|(_, b)| b >= a))
            .all(|d| d);
        table.comment(&format!("dominance full>=p1n={dominates}"))?;
    }
    if args.fit {
        for target in args
            .target
            .iter()
            .copied()
            .collect::<std::collections::BTreeSet<_>>()
        {
            let points = by_target.get(&target).cloned().unwrap_or_default();
            match fit_log(&points) {
                Ok(f) => table.comment(&format!(
                    "fit target={} a={} b={} c={} sse={} n_points={} n_max={}",
                    target.name(),
                    num(f.a),
                    num(f.b),
                    num(f.c),
                    num(f.sse),
                    f.n_points,
                    f.n_max
                ))?,
                Err(err) => {
                    fit_failures += 1;
                    table.comment(&format!("fit target={} error={err}", target.name()))?;
                }
            }
        }
    }
    table.finish()?;
    sweep_status(cells.iter().map(|(_, _, o)| o), fit_failures)
}

pub fn alphac_vs_t(args: &AlphaCVsTArgs) -> Result<Status> {
    let settings = settings(&args.sweep)?;
    let cache = Cache::new(args.sweep.cache_dir.clone());
    let mut targets = args.target.clone();
    targets.sort();
    targets.dedup();
    let horizons = args.t_range.values();
    let cells: Vec<(Target, f64)> = targets
        .iter()
        .flat_map(|&t| horizons.iter().map(move |&h| (t, h)))
        .collect();
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(target, horizon)| alpha_c_cell(&cache, args.n, target, horizon, &settings))
        .collect();

    let meta = sweep_metadata("alphac-vs-t", &settings, args.t_range.to_string());
    let header = ["n", "t", "target", "horizon", "alpha_c", "status"];
    let mut table = Table::new(output::open(args.output.output.as_deref())?, &meta, &header)?;
    for ((target, t), outcome) in cells.iter().zip(&results) {
        let (horizon, alpha_c) = match outcome {
            Ok(r) => (num(r.horizon), num(r.alpha_c)),
            Err(_) => (String::new(), String::new()),
        };
        table.row([
            args.n.to_string(),
            num(*t),
            target.name().to_string(),
            horizon,
            alpha_c,
            status_text(outcome),
        ])?;
    }
    table.finish()?;
    sweep_status(&results, 0)
}

pub fn argmax_map(args: &ArgmaxMapArgs) -> Result<Status> {
    let settings = settings(&args.sweep)?;
    let cache = Cache::new(args.sweep.cache_dir.clone());
    let cells = n_sweep(
        &cache,
        &[Target::Full],
        &args.n_range.values(),
        None,
        &settings,
    )?;

    let meta = sweep_metadata(
        "argmax-map",
        &settings,
        horizon_label(&[Target::Full], None)?,
    );
    let header = [
        "n", "j", "k", "j_mirror", "k_mirror", "delta_j", "alpha", "alpha_c", "status",
    ];
    let mut table = Table::new(output::open(args.output.output.as_deref())?, &meta, &header)?;
    for (_, n, outcome) in &cells {
        let mut row = vec![n.to_string()];
        match outcome {
            Ok(r) => {
                match r.binding {
                    Some(b) => row.extend([
                        b.pair.0.to_string(),
                        b.pair.1.to_string(),
                        b.mirror.0.to_string(),
                        b.mirror.1.to_string(),
                        num(b.delta_j),
                        num(b.alpha),
                    ]),
                    None => row.extend(std::iter::repeat_n(String::new(), 6)),
                }
                row.push(num(r.alpha_c));
                row.push(if r.binding.is_some() { "ok" } else { "floor" }.into());
            }
            Err(_) => {
                row.extend(std::iter::repeat_n(String::new(), 7));
                row.push(status_text(outcome));
            }
        }
        table.row(&row)?;
    }
    table.finish()?;
    sweep_status(cells.iter().map(|(_, _, o)| o), 0)
}

fn read_sweep(path: &Path) -> Result<BTreeMap<Target, Vec<(usize, f64)>>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Usage(format!("{}: missing column `{name}`", path.display())))
    };
    let (n_col, target_col, alpha_col, status_col) = (
        column("n")?,
        column("target")?,
        column("alpha_c")?,
        column("status")?,
    );
    let mut out: BTreeMap<Target, Vec<(usize, f64)>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        if &record[status_col] != "ok" {
            continue;
        }
        let bad = |what: &str| {
            Usage(format!(
                "{}: invalid {what} in row {:?}",
                path.display(),
                record
            ))
        };
        let target = Target::parse_name(&record[target_col]).ok_or_else(|| bad("target"))?;
        let n = record[n_col].parse().map_err(|_| bad("n"))?;
        let alpha_c = record[alpha_col].parse().map_err(|_| bad("alpha_c"))?;
        out.entry(target).or_default().push((n, alpha_c));
    }
    Ok(out)
}

pub fn a_vs_nmax(args: &AVsNmaxArgs) -> Result<Status> {
    let settings = settings(&args.sweep)?;
    let mut targets = args.target.clone();
    targets.sort();
    targets.dedup();
    let (data, mut failures) = match (&args.input, &args.n_range) {
        (Some(path), _) => (read_sweep(path)?, 0),
        (None, Some(range)) => {
            let cache = Cache::new(args.sweep.cache_dir.clone());
            let cells = n_sweep(&cache, &targets, &range.values(), None, &settings)?;
            let mut data: BTreeMap<Target, Vec<(usize, f64)>> = BTreeMap::new();
            let mut failures = 0;
            for (target, n, outcome) in cells {
                match outcome {
                    Ok(r) => data.entry(target).or_default().push((n, r.alpha_c)),
                    Err(err) => {
                        failures += 1;
                        eprintln!("warning: N={n} {}: {err}", target.name());
                    }
                }
            }
            (data, failures)
        }
        (None, None) => bail!(Usage("either --input or --n-range is required".into())),
    };

    let meta = sweep_metadata("a-vs-nmax", &settings, horizon_label(&targets, None)?);
    let header = [
        "n_max", "target", "a", "b", "c", "sse", "n_points", "status",
    ];
    let mut table = Table::new(output::open(args.output.output.as_deref())?, &meta, &header)?;
    for &target in &targets {
        let points = data.get(&target).cloned().unwrap_or_default();
        for n_max in args.nmax_range.values() {
            let subset: Vec<(usize, f64)> = points
                .iter()
                .copied()
                .filter(|&(n, _)| n <= n_max)
                .collect();
            let mut row = vec![n_max.to_string(), target.name().to_string()];
            match fit_log(&subset) {
                Ok(f) => {
                    row.extend([
                        num(f.a),
                        num(f.b),
                        num(f.c),
                        num(f.sse),
                        f.n_points.to_string(),
                    ]);
                    row.push("ok".into());
                }
                Err(err) => {
                    failures += 1;
                    row.extend(std::iter::repeat_n(String::new(), 5));
                    row.push(format!("error: {err}"));
                }
            }
            table.row(&row)?;
        }
    }
    table.finish()?;
    Ok(Status::from_failures(failures))
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

use qgossip::analysis::{
    deterministic_period_gap, exact_h_series, fit_decay_rate, mc_g_series, mc_h_series, RateReport,
    Series, DEFAULT_BURN_IN,
};
use qgossip::evolution::{limit_state, run, Metric, NetworkState, Schedule, ScheduledClique};
use qgossip::hypergraph::{finite_time_feasible, search_finite_time_schedule, FiniteTimeReport, GeneralizedGraph};
use qgossip::io::{
    check_csv, eigenvalue_table_csv, write_atomic, DensityMatrixJson, StateSummary,
    EIGENVALUE_CSV_HEADER, SERIES_CSV_HEADER, TRAJECTORY_CSV_HEADER,
};
use qgossip::permgroup::DEFAULT_SUBGROUP_CAP;
use qgossip::qstate::{product_state_with_cap, DensityMatrix, StandardState};

use crate::init;
use crate::{FeasibilityArgs, FileKind, Network, RatesArgs, SchemaCheckArgs, SimulateFullArgs, SimulateReducedArgs};

/// Reduced-state runs are cheap; this only guards against typos.
const REDUCED_QUBIT_LIMIT: usize = 64;
/// Full-state sidecars embed the dense limit up to this size.
const SIDECAR_DENSE_LIMIT: usize = 6;

/// Written next to the full-state series.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FullSidecar {
    pub n: usize,
    pub init: String,
    pub steps: usize,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub runs: Vec<FullRun>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FullRun {
    /// Clique size of a random schedule; absent for a graph schedule.
    pub k: Option<usize>,
    pub series_file: String,
    pub group_order: usize,
    pub group_even: bool,
    pub fitted_rate: Option<f64>,
    pub limit_summary: StateSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<DensityMatrixJson>,
}

fn parse_network(net: &Network, limit: usize) -> Result<Vec<StandardState>> {
    let symbols = init::parse(&net.init, limit)?;
    if let Some(n) = net.n {
        ensure!(
            n == symbols.len(),
            "--n {n} does not match the {} qubits of --init",
            symbols.len()
        );
    }
    Ok(symbols)
}

fn check_k(ks: &[usize], n: usize) -> Result<()> {
    for &k in ks {
        ensure!((2..=n).contains(&k), "clique size {k} outside 2..={n}");
    }
    Ok(())
}

/// Writes every file only after all of them have been computed.
fn write_all(dir: &Path, files: &[(String, String)]) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, contents) in files {
        let path = dir.join(name);
        write_atomic(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn emit(out: Option<&PathBuf>, contents: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, contents).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn fit_label(series: &Series) -> String {
    match fit_decay_rate(series, DEFAULT_BURN_IN) {
        Ok(r) => format!("{r:.6}"),
        Err(_) => "n/a".into(),
    }
}

pub fn simulate_reduced(a: SimulateReducedArgs) -> Result<ExitCode> {
    let symbols = parse_network(&a.network, REDUCED_QUBIT_LIMIT)?;
    let states = init::states(&symbols);
    let n = states.len();

    if let Some(path) = &a.graph {
        ensure!(!a.mode.mc, "--mc applies to random cliques, not to --graph");
        let g = GeneralizedGraph::from_path(path).with_context(|| format!("reading {}", path.display()))?;
        ensure!(g.n() == n, "graph has {} nodes, --init has {n} qubits", g.n());
        let schedule = Schedule::round_robin(&g)?;
        let traj = run(&schedule, NetworkState::Reduced(states), a.steps, &[Metric::Dispersion])?;
        let order: Vec<usize> = (0..g.edges().len()).collect();
        let gap = deterministic_period_gap(&g, &order)?;
        write_all(&a.out, &[("trajectory.csv".into(), traj.to_csv(0))])?;
        println!(
            "round-robin over {} edges: consensus condition {}, per-period contraction {:.6}",
            g.edges().len(),
            if gap.condition_holds { "holds" } else { "fails" },
            gap.gap
        );
        return Ok(ExitCode::SUCCESS);
    }

    check_k(&a.k, n)?;
    let seed = if a.mode.mc {
        ensure!(a.trials > 0, "--trials must be positive");
        Some(a.seed.context("--mc needs --seed")?)
    } else {
        None
    };
    let mut files = Vec::new();
    for &k in &a.k {
        let series = match seed {
            Some(seed) => mc_h_series(&states, k, a.steps, a.trials, seed)?,
            None => exact_h_series(&states, k, a.steps)?,
        };
        println!("k={k}: h(0)={:.6} fitted rate {}", series.points()[0].value, fit_label(&series));
        files.push((format!("h_k{k}.csv"), series.to_csv()));
    }
    write_all(&a.out, &files)?;
    Ok(ExitCode::SUCCESS)
}

fn limit_entry(limit: &DensityMatrix) -> (StateSummary, Option<DensityMatrixJson>) {
    let dense = (limit.n_qubits() <= SIDECAR_DENSE_LIMIT).then(|| DensityMatrixJson::from(limit));
    (StateSummary::from(limit), dense)
}

pub fn simulate_full(a: SimulateFullArgs) -> Result<ExitCode> {
    let symbols = parse_network(&a.network, a.cap_n)?;
    let rho0 = product_state_with_cap(&init::states(&symbols), a.cap_n)?;
    let n = symbols.len();
    let mut files = Vec::new();
    let mut runs = Vec::new();

    if let Some(path) = &a.graph {
        let g = GeneralizedGraph::from_path(path).with_context(|| format!("reading {}", path.display()))?;
        ensure!(g.n() == n, "graph has {} nodes, --init has {n} qubits", g.n());
        let schedule = Schedule::round_robin(&g)?;
        let group = schedule.limit_group(DEFAULT_SUBGROUP_CAP)?;
        let limit = limit_state(&rho0, &group)?;
        let metrics = [Metric::DistanceSq(limit.clone()), Metric::Trace, Metric::Purity];
        let traj = run(&schedule, NetworkState::Full(rho0), a.steps, &metrics)?;
        let (limit_summary, dense) = limit_entry(&limit);
        files.push(("trajectory.csv".to_string(), traj.to_csv(0)));
        runs.push(FullRun {
            k: None,
            series_file: "trajectory.csv".into(),
            group_order: group.order(),
            group_even: group.is_even(),
            fitted_rate: None,
            limit_summary,
            limit: dense,
        });
        println!("round-robin over {} edges: limit group of order {}", g.edges().len(), group.order());
    } else {
        check_k(&a.k, n)?;
        ensure!(a.trials > 0, "--trials must be positive");
        let seed = a.seed.context("random cliques need --seed")?;
        for &k in &a.k {
            let result = mc_g_series(&rho0, k, a.steps, a.trials, seed)?;
            let name = format!("g_k{k}.csv");
            let (limit_summary, dense) = limit_entry(&result.limit);
            let fitted_rate = fit_decay_rate(&result.series, DEFAULT_BURN_IN).ok();
            println!(
                "k={k}: group order {} ({}), g(0)={:.6}, fitted rate {}",
                result.group_order,
                if result.group_is_even { "even permutations" } else { "contains odd permutations" },
                result.series.points()[0].value,
                fit_label(&result.series)
            );
            files.push((name.clone(), result.series.to_csv()));
            runs.push(FullRun {
                k: Some(k),
                series_file: name,
                group_order: result.group_order,
                group_even: result.group_is_even,
                fitted_rate,
                limit_summary,
                limit: dense,
            });
        }
    }
    let sidecar = FullSidecar {
        n,
        init: init::render(&symbols),
        steps: a.steps,
        trials: a.graph.is_none().then_some(a.trials),
        seed: if a.graph.is_none() { a.seed } else { None },
        runs,
    };
    files.push(("g_limits.json".into(), serde_json::to_string(&sidecar)? + "\n"));
    write_all(&a.out, &files)?;
    Ok(ExitCode::SUCCESS)
}

pub fn rates(a: RatesArgs) -> Result<ExitCode> {
    ensure!((2..=a.n).contains(&a.k), "clique size {} outside 2..={}", a.k, a.n);
    let symbols = match &a.init {
        Some(spec) => init::parse(spec, REDUCED_QUBIT_LIMIT)?,
        None => "01+-0"
            .chars()
            .cycle()
            .take(a.n)
            .map(|c| StandardState::from_symbol(c).expect("known symbol"))
            .collect(),
    };
    ensure!(
        symbols.len() == a.n,
        "--init has {} qubits, --n is {}",
        symbols.len(),
        a.n
    );
    let report = RateReport::compute(&init::states(&symbols), a.k, a.steps, a.burn_in, a.nu_star, a.cap_n)?;
    emit(a.out.as_ref(), &(serde_json::to_string(&report)? + "\n"))?;
    if let Some(path) = &a.eigen_csv {
        if report.nu_star.is_some() {
            write_atomic(path, &eigenvalue_table_csv(&report.eigenvalue_table))
                .with_context(|| format!("writing {}", path.display()))?;
        }
    }
    if let Some(e) = &report.nu_star_error {
        eprintln!("error: full-state rate not computed: {e}");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

pub fn feasibility(a: FeasibilityArgs) -> Result<ExitCode> {
    let report = finite_time_feasible(a.n, a.k)?;
    let schedule = match (&a.schedule_out, report.steps) {
        (None, _) => None,
        (Some(_), None) => bail!("no finite-time schedule exists for n={} k={}", a.n, a.k),
        (Some(path), Some(t)) => {
            let search = search_finite_time_schedule(a.n, a.k, t)?;
            ensure!(!search.budget_exhausted, "schedule search ran out of budget");
            let edges = search.schedule.context("search found no schedule")?;
            let period = edges
                .into_iter()
                .map(|edge| ScheduledClique { edge, cycle: 0 })
                .collect();
            let schedule = Schedule::deterministic(a.n, period)?;
            Some((path, serde_json::to_string_pretty(&schedule)? + "\n"))
        }
    };
    emit(a.out.as_ref(), &(serde_json::to_string(&report)? + "\n"))?;
    if let Some((path, json)) = schedule {
        write_atomic(path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_field<T: std::str::FromStr>(field: &str, row: usize, column: &str) -> Result<T> {
    field
        .parse()
        .ok()
        .with_context(|| format!("row {row}: {column} {field:?} is not valid"))
}

fn check_rows(contents: &str, header: &str, row: impl Fn(&[&str], usize) -> Result<()>) -> Result<usize> {
    let count = check_csv(contents, header)?;
    for (i, line) in contents.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        row(&fields, i + 1)?;
    }
    Ok(count)
}

pub fn schema_check(a: SchemaCheckArgs) -> Result<ExitCode> {
    let contents = std::fs::read_to_string(&a.path).with_context(|| format!("reading {}", a.path.display()))?;
    let what = match a.kind {
        FileKind::Series => {
            let rows = check_rows(&contents, SERIES_CSV_HEADER, |f, r| {
                parse_field::<usize>(f[0], r, "t")?;
                parse_field::<f64>(f[1], r, "value")?;
                let se: f64 = parse_field(f[2], r, "stderr")?;
                ensure!(se >= 0.0, "row {r}: negative stderr");
                Ok(())
            })?;
            format!("{rows} rows")
        }
        FileKind::Trajectory => {
            let rows = check_rows(&contents, TRAJECTORY_CSV_HEADER, |f, r| {
                parse_field::<usize>(f[0], r, "t")?;
                ensure!(!f[1].is_empty(), "row {r}: empty metric");
                parse_field::<f64>(f[2], r, "value")?;
                parse_field::<usize>(f[3], r, "trial")?;
                Ok(())
            })?;
            format!("{rows} rows")
        }
        FileKind::Eigenvalues => {
            let rows = check_rows(&contents, EIGENVALUE_CSV_HEADER, |f, r| {
                parse_field::<f64>(f[0], r, "magnitude")?;
                let m: usize = parse_field(f[1], r, "multiplicity")?;
                ensure!(m > 0, "row {r}: zero multiplicity");
                Ok(())
            })?;
            format!("{rows} rows")
        }
        FileKind::RateReport => {
            let report: RateReport = serde_json::from_str(&contents)?;
            let mags: Vec<f64> = report.eigenvalue_table.iter().map(|e| e.0).collect();
            ensure!(mags.windows(2).all(|w| w[0] >= w[1]), "eigenvalue table not sorted descending");
            if let Some(first) = mags.first() {
                ensure!((first - 1.0).abs() < 1e-9, "leading eigenvalue magnitude {first} is not 1");
            }
            ensure!(
                report.nu_star.is_none() || !report.eigenvalue_table.is_empty(),
                "nu_star without an eigenvalue table"
            );
            format!("n={} k={}", report.n, report.k)
        }
        FileKind::Feasibility => {
            let report: FiniteTimeReport = serde_json::from_str(&contents)?;
            ensure!(report.feasible == report.steps.is_some(), "T must be present exactly when feasible");
            format!("n={} k={}", report.n, report.k)
        }
        FileKind::Graph => {
            let g = GeneralizedGraph::from_json_str(&contents)?;
            format!("{} nodes, {} edges", g.n(), g.edges().len())
        }
        FileKind::Schedule => {
            let s = Schedule::from_json_str(&contents)?;
            format!("{} nodes", s.n())
        }
        FileKind::FullSidecar => {
            let sidecar: FullSidecar = serde_json::from_str(&contents)?;
            for run in &sidecar.runs {
                if let Some(dense) = &run.limit {
                    DensityMatrix::try_from(dense.clone())?;
                }
                ensure!(run.limit_summary.n == sidecar.n, "limit size does not match n");
            }
            format!("{} runs", sidecar.runs.len())
        }
    };
    println!("ok: {} ({what})", a.path.display());
    Ok(ExitCode::SUCCESS)
}

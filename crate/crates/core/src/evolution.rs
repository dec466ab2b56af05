//! Clique-gossip dynamics: the deterministic and randomized maps on the full
//! network state, the induced averaging of reduced states, schedules, and the
//! group-average limits.
//!
//! One step over a clique `e` with cyclic permutation `π` is
//!
//! ```text
//! ρ ↦ (1/|e|) Σ_{τ=1..|e|} U_{π^τ}† ρ U_{π^τ}
//! ```
//!
//! and the `τ = |e|` term is `ρ` itself. On reduced states the same step sets
//! every qubit of `e` to the mean of their states.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::GeneralizedGraph;
use crate::io::{fmt_f64, push_csv_row, TRAJECTORY_CSV_HEADER};
use crate::permgroup::{
    check_clique_size, checked_edge, cyclic_perm, factorial, generate_subgroup, k_subsets,
    Permutation, PermutationGroup, DEFAULT_SUBGROUP_CAP,
};
use crate::qstate::{BasisRelabel, DensityMatrix, QubitState, C64};

/// Independent random stream for one Monte Carlo trial.
///
/// All trials share the master seed and differ in the ChaCha stream id, so a
/// trial's draws do not depend on which thread runs it or in what order.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Runs `trials` independent jobs in parallel and returns their results in
/// trial order.
pub fn run_trials<T, F>(trials: usize, master_seed: u64, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| job(t, &mut trial_rng(master_seed, t as u64)))
        .collect()
}

/// The clique-gossip map of one edge and cyclic permutation, with the basis
/// relabelings of `π, π², .., π^{k-1}` precomputed.
#[derive(Clone, Debug)]
pub struct CliqueChannel {
    edge: Vec<usize>,
    permutation: Permutation,
    relabels: Vec<BasisRelabel>,
}

impl CliqueChannel {
    pub fn new(edge: &[usize], p: &Permutation) -> Result<Self> {
        let edge = checked_edge(edge, p.len())?;
        if !p.is_cycle_on(&edge) {
            return Err(Error::NotCyclicOnEdge { edge });
        }
        let relabels = (1..edge.len())
            .map(|tau| BasisRelabel::new(&p.pow(tau)))
            .collect::<Result<_>>()?;
        Ok(CliqueChannel {
            edge,
            permutation: p.clone(),
            relabels,
        })
    }

    pub fn edge(&self) -> &[usize] {
        &self.edge
    }

    pub fn permutation(&self) -> &Permutation {
        &self.permutation
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.n_qubits() != self.permutation.len() {
            return Err(Error::SizeMismatch {
                left: rho.n_qubits(),
                right: self.permutation.len(),
            });
        }
        let d = rho.dim();
        let src = rho.matrix().as_slice();
        let mut out = src.to_vec();
        for relabel in &self.relabels {
            let map = relabel.map();
            for y in 0..d {
                let column = map[y] * d;
                let dst = &mut out[y * d..(y + 1) * d];
                for (x, slot) in dst.iter_mut().enumerate() {
                    *slot += src[map[x] + column];
                }
            }
        }
        let scale = 1.0 / self.edge.len() as f64;
        for z in &mut out {
            *z *= scale;
        }
        Ok(DensityMatrix::from_matrix_unchecked(
            crate::qstate::CMatrix::from_vec(d, d, out),
        ))
    }
}

/// One deterministic clique-gossip step.
pub fn det_step(rho: &DensityMatrix, edge: &[usize], p: &Permutation) -> Result<DensityMatrix> {
    CliqueChannel::new(edge, p)?.apply(rho)
}

/// A draw from `P_k`: an edge index into the lexicographic `k`-subsets and a
/// cycle index into that edge's cyclic permutations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PkSample {
    pub edge_index: usize,
    pub cycle_index: usize,
}

/// Uniform sampler over `P_k`, drawing the edge first and then the cycle.
#[derive(Clone, Debug)]
pub struct PkSampler {
    n: usize,
    k: usize,
    edges: Vec<Vec<usize>>,
    cycles_per_edge: usize,
}

impl PkSampler {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        check_clique_size(n, k)?;
        Ok(PkSampler {
            n,
            k,
            edges: k_subsets(n, k),
            cycles_per_edge: factorial(k - 1),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `|P_k|`.
    pub fn len(&self) -> usize {
        self.edges.len() * self.cycles_per_edge
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PkSample {
        let edge_index = rng.random_range(0..self.edges.len());
        let cycle_index = rng.random_range(0..self.cycles_per_edge);
        PkSample {
            edge_index,
            cycle_index,
        }
    }

    /// Position of the sample in [`crate::permgroup::enumerate_pk`] order.
    pub fn flat_index(&self, s: PkSample) -> usize {
        s.edge_index * self.cycles_per_edge + s.cycle_index
    }

    pub fn edge(&self, s: PkSample) -> &[usize] {
        &self.edges[s.edge_index]
    }

    pub fn permutation(&self, s: PkSample) -> Permutation {
        cyclic_perm(&self.edges[s.edge_index], self.n, s.cycle_index).expect("valid sample")
    }
}

/// Every channel of `P_k`, prebuilt for repeated random steps.
#[derive(Clone, Debug)]
pub struct RandomChannelBank {
    sampler: PkSampler,
    channels: Vec<CliqueChannel>,
}

impl RandomChannelBank {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let sampler = PkSampler::new(n, k)?;
        let mut channels = Vec::with_capacity(sampler.len());
        for edge in &sampler.edges {
            for c in 0..sampler.cycles_per_edge {
                channels.push(CliqueChannel::new(edge, &cyclic_perm(edge, n, c)?)?);
            }
        }
        Ok(RandomChannelBank { sampler, channels })
    }

    pub fn sampler(&self) -> &PkSampler {
        &self.sampler
    }

    pub fn step<R: Rng + ?Sized>(
        &self,
        rho: &DensityMatrix,
        rng: &mut R,
    ) -> Result<(DensityMatrix, &CliqueChannel)> {
        let s = self.sampler.sample(rng);
        let channel = &self.channels[self.sampler.flat_index(s)];
        Ok((channel.apply(rho)?, channel))
    }
}

/// One randomized step: a uniformly chosen `k`-clique and cycle. Returns the
/// new state together with the sampled permutation.
pub fn random_step<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    k: usize,
    rng: &mut R,
) -> Result<(DensityMatrix, Permutation)> {
    let sampler = PkSampler::new(rho.n_qubits(), k)?;
    let s = sampler.sample(rng);
    let p = sampler.permutation(s);
    let next = det_step(rho, sampler.edge(s), &p)?;
    Ok((next, p))
}

/// Averages the reduced states on `edge`; the others are unchanged.
pub fn reduced_step(states: &[QubitState], edge: &[usize]) -> Result<Vec<QubitState>> {
    let mut out = states.to_vec();
    reduced_step_in_place(&mut out, edge)?;
    Ok(out)
}

pub fn reduced_step_in_place(states: &mut [QubitState], edge: &[usize]) -> Result<()> {
    let edge = checked_edge(edge, states.len())?;
    let mean = QubitState::average(edge.iter().map(|&i| &states[i]))?;
    for &i in &edge {
        states[i] = mean;
    }
    Ok(())
}

/// One entry of a deterministic period: an edge and which of its cyclic
/// permutations to use (0 is the canonical ascending cycle).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduledClique {
    #[serde(with = "crate::io::one_based_edge")]
    pub edge: Vec<usize>,
    #[serde(default)]
    pub cycle: usize,
}

/// Which clique acts at each step.
///
/// Serialized as JSON tagged by `mode`, edges 1-based:
/// `{"mode":"deterministic","n":4,"period":[{"edge":[1,2],"cycle":0}]}` or
/// `{"mode":"random","n":5,"k":3,"seed":7}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleFile", into = "ScheduleFile")]
pub enum Schedule {
    /// Periodic sequence, repeated forever.
    Deterministic {
        n: usize,
        period: Vec<ScheduledClique>,
    },
    /// Independent uniform draws from `P_k`.
    Random { n: usize, k: usize, seed: u64 },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
enum ScheduleFile {
    Deterministic {
        n: usize,
        period: Vec<ScheduledClique>,
    },
    Random {
        n: usize,
        k: usize,
        seed: u64,
    },
}

impl TryFrom<ScheduleFile> for Schedule {
    type Error = Error;

    fn try_from(f: ScheduleFile) -> Result<Self> {
        match f {
            ScheduleFile::Deterministic { n, period } => Schedule::deterministic(n, period),
            ScheduleFile::Random { n, k, seed } => Schedule::random(n, k, seed),
        }
    }
}

impl From<Schedule> for ScheduleFile {
    fn from(s: Schedule) -> Self {
        match s {
            Schedule::Deterministic { n, period } => ScheduleFile::Deterministic { n, period },
            Schedule::Random { n, k, seed } => ScheduleFile::Random { n, k, seed },
        }
    }
}

impl Schedule {
    pub fn deterministic(n: usize, period: Vec<ScheduledClique>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidArgument("deterministic schedule has an empty period".into()));
        }
        let period = period
            .into_iter()
            .map(|sc| {
                // validates the edge and the cycle index together
                cyclic_perm(&sc.edge, n, sc.cycle)?;
                Ok(ScheduledClique {
                    edge: checked_edge(&sc.edge, n)?,
                    cycle: sc.cycle,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Schedule::Deterministic { n, period })
    }

    pub fn random(n: usize, k: usize, seed: u64) -> Result<Self> {
        check_clique_size(n, k)?;
        Ok(Schedule::Random { n, k, seed })
    }

    /// Round-robin over the graph's edges in listed order, canonical cycles.
    pub fn round_robin(g: &GeneralizedGraph) -> Result<Self> {
        let period = g
            .edges()
            .iter()
            .map(|e| ScheduledClique {
                edge: e.clone(),
                cycle: 0,
            })
            .collect();
        Self::deterministic(g.n(), period)
    }

    pub fn n(&self) -> usize {
        match self {
            Schedule::Deterministic { n, .. } | Schedule::Random { n, .. } => *n,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Permutations used by a deterministic period, in order.
    pub fn period_permutations(&self) -> Result<Vec<Permutation>> {
        match self {
            Schedule::Deterministic { n, period } => period
                .iter()
                .map(|sc| cyclic_perm(&sc.edge, *n, sc.cycle))
                .collect(),
            Schedule::Random { .. } => Err(Error::InvalidArgument(
                "a random schedule has no fixed period".into(),
            )),
        }
    }

    /// The group whose average is the long-run limit of the full state:
    /// generated by the period's permutations, or by `P_k` when random.
    pub fn limit_group(&self, cap: usize) -> Result<PermutationGroup> {
        match self {
            Schedule::Deterministic { .. } => generate_subgroup(&self.period_permutations()?, cap),
            Schedule::Random { n, k, .. } => crate::permgroup::pk_generated_group(*n, *k, cap),
        }
    }
}

/// What is being evolved: the whole network or only its reduced states.
#[derive(Clone, Debug, PartialEq)]
pub enum NetworkState {
    Full(DensityMatrix),
    Reduced(Vec<QubitState>),
}

impl NetworkState {
    pub fn n_qubits(&self) -> usize {
        match self {
            NetworkState::Full(rho) => rho.n_qubits(),
            NetworkState::Reduced(states) => states.len(),
        }
    }

    pub fn reduced_states(&self) -> Vec<QubitState> {
        match self {
            NetworkState::Full(rho) => rho.reduced_states(),
            NetworkState::Reduced(states) => states.clone(),
        }
    }
}

/// Quantities recorded along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    /// `Σ_i ‖ρ_i(t) − Σ_j ρ_j(0)/n‖²` (squared Hilbert–Schmidt norm).
    Dispersion,
    /// `‖ρ(t) − target‖²`; full states only.
    DistanceSq(DensityMatrix),
    /// Real part of the trace; full states only.
    Trace,
    /// `Tr ρ²`; full states only.
    Purity,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Dispersion => "dispersion",
            Metric::DistanceSq(_) => "distance_sq",
            Metric::Trace => "trace",
            Metric::Purity => "purity",
        }
    }

    fn evaluate(&self, state: &NetworkState, average: &QubitState) -> Result<f64> {
        match (self, state) {
            (Metric::Dispersion, s) => Ok(s
                .reduced_states()
                .iter()
                .map(|q| q.distance_sq(average))
                .sum()),
            (Metric::DistanceSq(target), NetworkState::Full(rho)) => rho.distance_sq(target),
            (Metric::Trace, NetworkState::Full(rho)) => Ok(rho.trace().re),
            (Metric::Purity, NetworkState::Full(rho)) => Ok(rho.purity()),
            (m, NetworkState::Reduced(_)) => Err(Error::InvalidArgument(format!(
                "metric {} needs the full network state",
                m.name()
            ))),
        }
    }
}

/// Recorded metrics of one run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub metric_names: Vec<&'static str>,
    /// Step indices at which metrics were recorded, starting at 0.
    pub times: Vec<usize>,
    /// `values[r][m]` is metric `m` at `times[r]`.
    pub values: Vec<Vec<f64>>,
    /// Permutation applied at each step.
    pub applied: Vec<Permutation>,
    pub final_state: NetworkState,
}

impl Trajectory {
    /// Column `m` as `(t, value)` pairs.
    pub fn series(&self, m: usize) -> Vec<(usize, f64)> {
        self.times
            .iter()
            .zip(&self.values)
            .map(|(&t, row)| (t, row[m]))
            .collect()
    }

    /// CSV rows `t,metric,value,trial`, header included.
    pub fn to_csv(&self, trial: usize) -> String {
        let mut out = format!("{TRAJECTORY_CSV_HEADER}\n");
        self.append_csv_rows(&mut out, trial);
        out
    }

    /// Appends rows without a header, for merging several trials.
    pub fn append_csv_rows(&self, out: &mut String, trial: usize) {
        let trial = trial.to_string();
        for (t, row) in self.times.iter().zip(&self.values) {
            let t = t.to_string();
            for (name, v) in self.metric_names.iter().zip(row) {
                push_csv_row(out, &[&t, name, &fmt_f64(*v), &trial]);
            }
        }
    }
}

enum Stepper {
    Periodic(Vec<(Vec<usize>, Permutation, Option<CliqueChannel>)>),
    Random {
        sampler: PkSampler,
        bank: Option<RandomChannelBank>,
        rng: ChaCha8Rng,
    },
}

/// Evolves `initial` for `steps` steps under `schedule`, recording `metrics`
/// at every step including `t = 0`. A random schedule uses stream 0 of its
/// seed; see [`run_trial`] for the others.
pub fn run(
    schedule: &Schedule,
    initial: NetworkState,
    steps: usize,
    metrics: &[Metric],
) -> Result<Trajectory> {
    run_trial(schedule, initial, steps, metrics, 0)
}

/// Like [`run`], with the random stream of Monte Carlo trial `trial`.
pub fn run_trial(
    schedule: &Schedule,
    initial: NetworkState,
    steps: usize,
    metrics: &[Metric],
    trial: u64,
) -> Result<Trajectory> {
    let n = schedule.n();
    if initial.n_qubits() != n {
        return Err(Error::SizeMismatch {
            left: n,
            right: initial.n_qubits(),
        });
    }
    let full = matches!(initial, NetworkState::Full(_));
    let mut stepper = match schedule {
        Schedule::Deterministic { period, .. } => Stepper::Periodic(
            period
                .iter()
                .map(|sc| {
                    let p = cyclic_perm(&sc.edge, n, sc.cycle)?;
                    let channel = full.then(|| CliqueChannel::new(&sc.edge, &p)).transpose()?;
                    Ok((sc.edge.clone(), p, channel))
                })
                .collect::<Result<_>>()?,
        ),
        Schedule::Random { k, seed, .. } => Stepper::Random {
            sampler: PkSampler::new(n, *k)?,
            bank: full.then(|| RandomChannelBank::new(n, *k)).transpose()?,
            rng: trial_rng(*seed, trial),
        },
    };

    let average = QubitState::average(initial.reduced_states().iter())?;
    let mut state = initial;
    let mut traj = Trajectory {
        metric_names: metrics.iter().map(Metric::name).collect(),
        times: Vec::with_capacity(steps + 1),
        values: Vec::with_capacity(steps + 1),
        applied: Vec::with_capacity(steps),
        final_state: NetworkState::Reduced(Vec::new()),
    };
    let record = |traj: &mut Trajectory, t: usize, state: &NetworkState| -> Result<()> {
        traj.times.push(t);
        traj.values.push(
            metrics
                .iter()
                .map(|m| m.evaluate(state, &average))
                .collect::<Result<_>>()?,
        );
        Ok(())
    };
    record(&mut traj, 0, &state)?;

    for t in 0..steps {
        let (edge, perm, channel): (&[usize], Permutation, Option<&CliqueChannel>) = match &mut stepper {
            Stepper::Periodic(period) => {
                let (edge, p, channel) = &period[t % period.len()];
                (edge, p.clone(), channel.as_ref())
            }
            Stepper::Random { sampler, bank, rng } => {
                let s = sampler.sample(rng);
                let channel = bank.as_ref().map(|b| &b.channels[sampler.flat_index(s)]);
                (sampler.edge(s), sampler.permutation(s), channel)
            }
        };
        state = match state {
            NetworkState::Full(rho) => {
                NetworkState::Full(channel.expect("full mode builds channels").apply(&rho)?)
            }
            NetworkState::Reduced(mut states) => {
                reduced_step_in_place(&mut states, edge)?;
                NetworkState::Reduced(states)
            }
        };
        traj.applied.push(perm);
        record(&mut traj, t + 1, &state)?;
    }
    traj.final_state = state;
    Ok(traj)
}

/// Uniform average of `U_π† ρ0 U_π` over the group.
pub fn limit_state(rho0: &DensityMatrix, group: &PermutationGroup) -> Result<DensityMatrix> {
    if group.degree() != rho0.n_qubits() {
        return Err(Error::SizeMismatch {
            left: rho0.n_qubits(),
            right: group.degree(),
        });
    }
    if group.order() > DEFAULT_SUBGROUP_CAP {
        return Err(Error::GroupTooLarge {
            cap: DEFAULT_SUBGROUP_CAP,
        });
    }
    let d = rho0.dim();
    let src = rho0.matrix().as_slice();
    let mut acc = vec![C64::new(0.0, 0.0); d * d];
    for p in group.iter() {
        let relabel = BasisRelabel::with_cap(p, usize::MAX)?;
        let map = relabel.map();
        for y in 0..d {
            let column = map[y] * d;
            for x in 0..d {
                acc[x + y * d] += src[map[x] + column];
            }
        }
    }
    let scale = 1.0 / group.order() as f64;
    for z in &mut acc {
        *z *= scale;
    }
    Ok(DensityMatrix::from_matrix_unchecked(
        crate::qstate::CMatrix::from_vec(d, d, acc),
    ))
}

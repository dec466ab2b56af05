//! Convergence rates.
//!
//! Reduced states evolve as a classical averaging process `x(t+1) = W_t x(t)`
//! applied entrywise, where `W_t` is the averaging matrix of the chosen
//! clique. Under uniform random cliques `E[W_t] = E[W_tᵀ W_t]` has eigenvalue 1
//! once and `(n-k)/(n-1)` with multiplicity `n-1`; the mean-square dispersion
//! `h(t)` decays at exactly that rate.
//!
//! The full network state evolves as `vec ρ(t+1) = A_t vec ρ(t)` with
//! `A_t = (1/k) Σ_τ U_{π^τ}ᵀ ⊗ U_{π^τ}ᵀ` (column-stacking `vec`). Its
//! mean-square matrix `M = E[A_tᵀ A_t]` has eigenvalue 1 on the fixed
//! subspace of the generated group; the largest remaining magnitude is the
//! full-state rate `ν_*`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{limit_state, run_trials, PkSampler, RandomChannelBank, reduced_step_in_place};
use crate::hypergraph::GeneralizedGraph;
use crate::io::{fmt_f64, push_csv_row, SERIES_CSV_HEADER};
use crate::permgroup::{
    binomial, check_clique_size, checked_edge, enumerate_pk, k_subsets, pk_generated_group,
    DEFAULT_SUBGROUP_CAP,
};
use crate::qstate::{BasisRelabel, DensityMatrix, QubitState};

/// Largest network for which [`build_m`] forms the `4^n x 4^n` matrix.
pub const DEFAULT_M_QUBIT_CAP: usize = 5;
/// Eigenvalues this close to 1 count as 1 when computing `ν_*`.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-9;
pub const DEFAULT_TRIALS: usize = 2_000;
pub const DEFAULT_BURN_IN: usize = 10;
/// [`RateReport`] fits `h(t)` only while it exceeds this fraction of `h(0)`;
/// below it the exact recursion is dominated by rounding.
pub const FIT_FLOOR: f64 = 1e-12;

/// Averaging matrix of one clique: `(1/k) 1_e 1_eᵀ` on the clique and the
/// identity elsewhere. Symmetric, idempotent and doubly stochastic.
#[derive(Clone, Debug, PartialEq)]
pub struct GossipMatrix(DMatrix<f64>);

impl GossipMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }
}

pub fn gossip_matrix(edge: &[usize], n: usize) -> Result<GossipMatrix> {
    let edge = checked_edge(edge, n)?;
    let mut w = DMatrix::identity(n, n);
    let weight = 1.0 / edge.len() as f64;
    for &i in &edge {
        for &j in &edge {
            w[(i, j)] = weight;
        }
    }
    Ok(GossipMatrix(w))
}

/// Closed form of `E[W_t] = E[W_tᵀ W_t]` under uniform `k`-cliques:
/// `(k-1)/(n(n-1)) 11ᵀ + ((n-k+1)/n - (k-1)/(n(n-1))) I`.
pub fn expected_w(n: usize, k: usize) -> Result<DMatrix<f64>> {
    check_clique_size(n, k)?;
    let (nf, kf) = (n as f64, k as f64);
    let off = (kf - 1.0) / (nf * (nf - 1.0));
    let diag = (nf - kf + 1.0) / nf - off;
    Ok(DMatrix::from_element(n, n, off) + DMatrix::identity(n, n) * diag)
}

/// Mean-square rate of the reduced states, `(n-k)/(n-1)`; 0 when `k = n`.
pub fn nu_reduced(n: usize, k: usize) -> Result<f64> {
    check_clique_size(n, k)?;
    Ok((n - k) as f64 / (n - 1) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: usize,
    pub value: f64,
    /// Standard error of a Monte Carlo mean; 0 for exact values.
    pub stderr: f64,
}

/// A scalar time series, optionally with standard errors.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Series(pub Vec<SeriesPoint>);

impl Series {
    /// Exact values at `t = 0, 1, ..`.
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        Series(
            values
                .into_iter()
                .enumerate()
                .map(|(t, value)| SeriesPoint {
                    t,
                    value,
                    stderr: 0.0,
                })
                .collect(),
        )
    }

    /// Sample mean and standard error across trials, each trial a series of
    /// the same length starting at `t = 0`. Sums run in trial order.
    pub fn from_trials(trials: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = trials.first() else {
            return Err(Error::InvalidArgument("no trials".into()));
        };
        let len = first.len();
        if trials.iter().any(|t| t.len() != len) {
            return Err(Error::InvalidArgument("trials differ in length".into()));
        }
        let count = trials.len() as f64;
        let points = (0..len)
            .map(|t| {
                let mean = trials.iter().map(|tr| tr[t]).sum::<f64>() / count;
                let stderr = if trials.len() > 1 {
                    let var = trials.iter().map(|tr| (tr[t] - mean).powi(2)).sum::<f64>()
                        / (count - 1.0);
                    (var / count).sqrt()
                } else {
                    0.0
                };
                SeriesPoint {
                    t,
                    value: mean,
                    stderr,
                }
            })
            .collect();
        Ok(Series(points))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn points(&self) -> &[SeriesPoint] {
        &self.0
    }

    pub fn values(&self) -> Vec<f64> {
        self.0.iter().map(|p| p.value).collect()
    }

    pub fn pairs(&self) -> Vec<(usize, f64)> {
        self.0.iter().map(|p| (p.t, p.value)).collect()
    }

    /// CSV with header `t,value,stderr`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{SERIES_CSV_HEADER}\n");
        for p in &self.0 {
            push_csv_row(
                &mut out,
                &[&p.t.to_string(), &fmt_f64(p.value), &fmt_f64(p.stderr)],
            );
        }
        out
    }
}

/// Sum of squared deviations of each qubit from the mean state, split into
/// the real `n x n` second-moment matrix of the entrywise deviation vectors.
fn deviation_moment(states: &[QubitState]) -> Result<DMatrix<f64>> {
    let n = states.len();
    let mean = QubitState::average(states.iter())?;
    let mut d = DMatrix::zeros(n, n);
    for r in 0..2 {
        for c in 0..2 {
            let dev: Vec<_> = states
                .iter()
                .map(|s| s.matrix()[(r, c)] - mean.matrix()[(r, c)])
                .collect();
            let re = DVector::from_iterator(n, dev.iter().map(|z| z.re));
            let im = DVector::from_iterator(n, dev.iter().map(|z| z.im));
            d += &re * re.transpose() + &im * im.transpose();
        }
    }
    Ok(d)
}

/// `E[W ⊗ W]` over uniform `k`-cliques: the `n² x n²` operator with
/// `vec(D(t+1)) = E[W ⊗ W] vec(D(t))` for `D = E[y yᵀ]`.
pub fn lifted_second_moment(n: usize, k: usize) -> Result<DMatrix<f64>> {
    check_clique_size(n, k)?;
    let edges = k_subsets(n, k);
    let mut acc = DMatrix::zeros(n * n, n * n);
    for edge in &edges {
        let w = gossip_matrix(edge, n)?.0;
        acc += w.kronecker(&w);
    }
    Ok(acc / edges.len() as f64)
}

/// Exact `h(t) = E Σ_i ‖ρ_i(t) − Σ_j ρ_j(0)/n‖²` under random `k`-cliques,
/// for `t = 0..=steps`, by propagating the deviation second moment.
pub fn exact_h_series(states0: &[QubitState], k: usize, steps: usize) -> Result<Series> {
    let n = states0.len();
    let lifted = lifted_second_moment(n, k)?;
    let d0 = deviation_moment(states0)?;
    let mut moment = DVector::from_column_slice(d0.as_slice());
    let trace = |v: &DVector<f64>| (0..n).map(|i| v[i * n + i]).sum::<f64>();
    let mut values = Vec::with_capacity(steps + 1);
    values.push(trace(&moment));
    for _ in 0..steps {
        moment = &lifted * moment;
        values.push(trace(&moment));
    }
    Ok(Series::from_values(values))
}

/// Monte Carlo estimate of `h(t)` with standard errors.
pub fn mc_h_series(
    states0: &[QubitState],
    k: usize,
    steps: usize,
    trials: usize,
    seed: u64,
) -> Result<Series> {
    let n = states0.len();
    let sampler = PkSampler::new(n, k)?;
    let mean = QubitState::average(states0.iter())?;
    let dispersion = |states: &[QubitState]| -> f64 {
        states.iter().map(|q| q.distance_sq(&mean)).sum()
    };
    let runs = run_trials(trials, seed, |_, rng| {
        let mut states = states0.to_vec();
        let mut out = Vec::with_capacity(steps + 1);
        out.push(dispersion(&states));
        for _ in 0..steps {
            let s = sampler.sample(rng);
            reduced_step_in_place(&mut states, sampler.edge(s))?;
            out.push(dispersion(&states));
        }
        Ok(out)
    })?;
    Series::from_trials(&runs)
}

/// Dense mean-square matrix `M = E[A_tᵀ A_t]` over uniform draws from `P_k`,
/// of size `4^n x 4^n`.
pub fn build_m(n: usize, k: usize) -> Result<DMatrix<f64>> {
    build_m_with_cap(n, k, DEFAULT_M_QUBIT_CAP)
}

pub fn build_m_with_cap(n: usize, k: usize, cap: usize) -> Result<DMatrix<f64>> {
    check_clique_size(n, k)?;
    if n > cap {
        return Err(Error::DimensionCap {
            what: "mean-square matrix M",
            n,
            cap,
        });
    }
    let d = 1usize << n;
    let size = d * d;
    let pk = enumerate_pk(n, k)?;
    let mut m = DMatrix::<f64>::zeros(size, size);
    let weight = 1.0 / (pk.len() * k * k) as f64;
    for p in &pk {
        // forward[τ][z]: row index of the 1 in column z of U_{π^τ}ᵀ ⊗ U_{π^τ}ᵀ.
        // backward[τ]: the same for its transpose.
        let mut forward = Vec::with_capacity(k);
        let mut backward = Vec::with_capacity(k);
        for tau in 1..=k {
            let relabel = BasisRelabel::with_cap(&p.pow(tau), cap)?;
            let f = relabel.map();
            let mut finv = vec![0; d];
            for (b, &fb) in f.iter().enumerate() {
                finv[fb] = b;
            }
            forward.push((0..size).map(|z| finv[z % d] + finv[z / d] * d).collect::<Vec<_>>());
            backward.push((0..size).map(|z| f[z % d] + f[z / d] * d).collect::<Vec<_>>());
        }
        // column w of Aᵀ A is Σ_{τ,τ'} e_{back_τ'(fwd_τ(w))} / k²
        for w in 0..size {
            let mut column = m.column_mut(w);
            for fwd in &forward {
                let mid = fwd[w];
                for back in &backward {
                    column[back[mid]] += weight;
                }
            }
        }
    }
    Ok(m)
}

/// Eigenvalues of a symmetric matrix, descending.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
}

impl Spectrum {
    pub fn of_symmetric(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidArgument(format!(
                "{}x{} matrix is not square",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut eigenvalues: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Ok(Spectrum { eigenvalues })
    }

    /// Largest `|λ|` over eigenvalues not within [`UNIT_EIGENVALUE_TOL`] of 1.
    pub fn nu_star(&self) -> Result<f64> {
        self.eigenvalues
            .iter()
            .filter(|&&l| (l - 1.0).abs() > UNIT_EIGENVALUE_TOL)
            .map(|l| l.abs())
            .max_by(f64::total_cmp)
            .ok_or(Error::DegenerateSpectrum)
    }

    /// Multiplicity of the eigenvalue 1.
    pub fn unit_multiplicity(&self) -> usize {
        self.eigenvalues
            .iter()
            .filter(|&&l| (l - 1.0).abs() <= UNIT_EIGENVALUE_TOL)
            .count()
    }

    /// `(magnitude, multiplicity)` pairs, magnitudes descending, grouping
    /// values within [`UNIT_EIGENVALUE_TOL`] of the group's first member.
    pub fn magnitude_table(&self) -> Vec<(f64, usize)> {
        let mut mags: Vec<f64> = self.eigenvalues.iter().map(|l| l.abs()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        let mut table: Vec<(f64, usize)> = Vec::new();
        for m in mags {
            match table.last_mut() {
                Some((head, count)) if (*head - m).abs() <= UNIT_EIGENVALUE_TOL => *count += 1,
                _ => table.push((m, 1)),
            }
        }
        table
    }
}

/// `ν_* = max_{λ ≠ 1} |λ|` over the spectrum of the symmetric matrix `m`.
pub fn nu_star(m: &DMatrix<f64>) -> Result<f64> {
    Spectrum::of_symmetric(m)?.nu_star()
}

/// Result of [`mc_g_series`].
#[derive(Clone, Debug)]
pub struct NetworkConvergence {
    pub series: Series,
    pub limit: DensityMatrix,
    pub group_order: usize,
    pub group_is_even: bool,
}

/// Monte Carlo `g(t) = E‖ρ(t) − ρ(∞)‖²` under random `k`-cliques, where
/// `ρ(∞)` is the average of `ρ0` over the group generated by `P_k`.
pub fn mc_g_series(
    rho0: &DensityMatrix,
    k: usize,
    steps: usize,
    trials: usize,
    seed: u64,
) -> Result<NetworkConvergence> {
    let n = rho0.n_qubits();
    let group = pk_generated_group(n, k, DEFAULT_SUBGROUP_CAP)?;
    let limit = limit_state(rho0, &group)?;
    let bank = RandomChannelBank::new(n, k)?;
    let runs = run_trials(trials, seed, |_, rng| {
        let mut rho = rho0.clone();
        let mut out = Vec::with_capacity(steps + 1);
        out.push(rho.distance_sq(&limit)?);
        for _ in 0..steps {
            rho = bank.step(&rho, rng)?.0;
            out.push(rho.distance_sq(&limit)?);
        }
        Ok(out)
    })?;
    Ok(NetworkConvergence {
        series: Series::from_trials(&runs)?,
        limit,
        group_order: group.order(),
        group_is_even: group.is_even(),
    })
}

/// Per-step geometric decay rate: `exp` of the least-squares slope of
/// `ln value` against `t`, over the points after the first `burn_in`.
pub fn fit_decay_rate(series: &Series, burn_in: usize) -> Result<f64> {
    let window = series.points().get(burn_in..).unwrap_or_default();
    if window.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least two points after a burn-in of {burn_in}, have {}",
            window.len()
        )));
    }
    if let Some(p) = window.iter().find(|p| !(p.value > 0.0)) {
        return Err(Error::NonPositiveSeries {
            t: p.t,
            value: p.value,
        });
    }
    let count = window.len() as f64;
    let mean_t = window.iter().map(|p| p.t as f64).sum::<f64>() / count;
    let mean_y = window.iter().map(|p| p.value.ln()).sum::<f64>() / count;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for p in window {
        let dt = p.t as f64 - mean_t;
        sxy += dt * (p.value.ln() - mean_y);
        sxx += dt * dt;
    }
    Ok((sxy / sxx).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodGap {
    /// Spectral radius of one period's averaging product on the complement of
    /// the all-ones vector; 1 when the consensus condition fails.
    pub gap: f64,
    pub condition_holds: bool,
}

/// Contraction factor per period of deterministic clique gossiping over the
/// edges of `g` taken in `order` (indices into `g.edges()`).
pub fn deterministic_period_gap(g: &GeneralizedGraph, order: &[usize]) -> Result<PeriodGap> {
    if order.is_empty() {
        return Err(Error::InvalidArgument("empty edge ordering".into()));
    }
    let n = g.n();
    let mut used = Vec::with_capacity(order.len());
    for &i in order {
        let edge = g.edges().get(i).ok_or_else(|| {
            Error::InvalidArgument(format!("edge index {i} out of range for {} edges", g.edges().len()))
        })?;
        used.push(edge.clone());
    }
    let condition_holds = GeneralizedGraph::new(n, used.clone())?.reduced_consensus_condition();
    if !condition_holds {
        return Ok(PeriodGap {
            gap: 1.0,
            condition_holds,
        });
    }
    let mut product = DMatrix::<f64>::identity(n, n);
    for edge in &used {
        product = gossip_matrix(edge, n)?.0 * product;
    }
    let deflated = product - DMatrix::from_element(n, n, 1.0 / n as f64);
    let gap = deflated
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    Ok(PeriodGap {
        gap,
        condition_holds,
    })
}

/// Summary of the convergence rates of random `k`-clique gossiping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateReport {
    pub n: usize,
    pub k: usize,
    pub nu_reduced: f64,
    pub nu_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_star_error: Option<String>,
    /// `(magnitude, multiplicity)` of the spectrum of `M`; empty unless
    /// `nu_star` was computed.
    pub eigenvalue_table: Vec<(f64, usize)>,
    /// Least-squares slope of `ln h(t)`; absent when `h` reaches zero (up to
    /// rounding) before the burn-in ends.
    pub fitted_slope: Option<f64>,
    /// `exp(fitted_slope)`.
    pub fitted_rate: Option<f64>,
    /// Exact `h(t)` used for the fit.
    pub series: Vec<(usize, f64)>,
}

impl RateReport {
    /// Computes the reduced-state rate and an exact `h(t)` fit from `states0`;
    /// with `with_nu_star`, also the spectrum of `M` (when `n` is within `cap`).
    pub fn compute(
        states0: &[QubitState],
        k: usize,
        steps: usize,
        burn_in: usize,
        with_nu_star: bool,
        cap: usize,
    ) -> Result<Self> {
        let n = states0.len();
        let h = exact_h_series(states0, k, steps)?;
        let floor = h.points().first().map_or(0.0, |p| p.value) * FIT_FLOOR;
        let above: Vec<SeriesPoint> = h
            .points()
            .iter()
            .take_while(|p| p.value > floor)
            .copied()
            .collect();
        let fitted_rate = fit_decay_rate(&Series(above), burn_in).ok();
        let (mut nu_star, mut nu_star_error, mut table) = (None, None, Vec::new());
        if with_nu_star {
            match build_m_with_cap(n, k, cap).and_then(|m| Spectrum::of_symmetric(&m)) {
                Ok(spectrum) => {
                    nu_star = Some(spectrum.nu_star()?);
                    table = spectrum.magnitude_table();
                }
                Err(e @ Error::DimensionCap { .. }) => nu_star_error = Some(e.to_string()),
                Err(e) => return Err(e),
            }
        }
        Ok(RateReport {
            n,
            k,
            nu_reduced: nu_reduced(n, k)?,
            nu_star,
            nu_star_error,
            eigenvalue_table: table,
            fitted_slope: fitted_rate.map(f64::ln),
            fitted_rate,
            series: h.pairs(),
        })
    }
}

/// Uniform average of the gossip matrices of all `k`-subsets; the brute-force
/// counterpart of [`expected_w`].
pub fn average_gossip_matrix(n: usize, k: usize) -> Result<DMatrix<f64>> {
    check_clique_size(n, k)?;
    let mut acc = DMatrix::zeros(n, n);
    for edge in k_subsets(n, k) {
        acc += gossip_matrix(&edge, n)?.0;
    }
    Ok(acc / binomial(n, k) as f64)
}

//! Discrete-event Monte Carlo engine: exact attack-cycle state machines for
//! the honest, selfish and trail-stubborn strategies driven by two racing
//! exponential block clocks, plus deterministic parallel estimators for every
//! analytic quantity.
//!
//! Each block event draws its finder from `{attacker: q, honest: p}`; whether
//! an honest block lands on the attacker's published prefix is drawn only
//! when a competing tip exists. Inter-event times are exponential with total
//! rate one in `tau0` units, so durations are reported in `tau0` units.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hiker::{exit_prob_low, expected_exit_time, HikerProblem};
use crate::params::{NetworkParams, StrategyId};

/// Safety cap on block events within a single attack cycle.
pub const EVENT_CAP: u64 = 10_000_000;
/// Cycles per work chunk. Chunks are reduced in index order, so summaries are
/// bit-identical for any worker count.
const CYCLES_PER_CHUNK: u64 = 8192;
/// Conditional Z statistics are tabulated for first-phase block counts up to
/// this value.
const Z_TABLE_ROWS: usize = 33;

/// Everything observed in one simulated attack cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleOutcome {
    /// Cycle duration in `tau0` units.
    pub duration: f64,
    /// Attacker blocks that ended up in the official chain.
    pub revenue_blocks: u64,
    /// Official-chain growth over the cycle, `N(xi) v N'(xi)`.
    pub official_height: u64,
    /// Whether the cycle entered a trail phase.
    pub sigma_occurred: bool,
    /// Attacker blocks at the end of the first phase. For the selfish
    /// machine, cycles that escape by publishing a long lead never reach the
    /// catch-up point, so this records the secret chain length at publication.
    pub n_prime_tau: u64,
    /// Attacker blocks already adopted by the official chain when the first
    /// phase was lost.
    pub z_tau: u64,
    /// Trail-phase step counts `(attacker, honest)`; zero outside trails.
    pub second_phase_steps: (u64, u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Finder {
    Attacker,
    Honest,
}

/// The shared block clock: category draws plus exponential waiting times.
struct Clock<'r, R: Rng + ?Sized> {
    rng: &'r mut R,
    q: f64,
    gamma: f64,
    duration: f64,
    events: u64,
}

impl<'r, R: Rng + ?Sized> Clock<'r, R> {
    fn new(params: &NetworkParams, rng: &'r mut R) -> Self {
        Self { rng, q: params.q(), gamma: params.gamma(), duration: 0.0, events: 0 }
    }

    fn next_block(&mut self) -> Result<Finder> {
        if self.events >= EVENT_CAP {
            return Err(Error::EventCapExceeded(EVENT_CAP));
        }
        self.events += 1;
        self.duration += self.rng.sample::<f64, _>(Exp1);
        Ok(if self.rng.gen::<f64>() < self.q { Finder::Attacker } else { Finder::Honest })
    }

    /// Whether an honest block lands on the attacker's published tip.
    fn on_attacker_fork(&mut self) -> bool {
        self.rng.gen::<f64>() < self.gamma
    }
}

/// One attack cycle of the `A`-trail-stubborn strategy.
///
/// Phases: the opening race (an honest first block ends the cycle at once),
/// secret mining until the honest chain catches up, the decisive one-block
/// competition, and, if that is lost to an honest-on-honest block, the trail
/// phase in which the deficit walks on `[0, A + 1]` from 2.
pub fn run_cycle_tsm<R: Rng + ?Sized>(
    params: &NetworkParams,
    a: u32,
    rng: &mut R,
) -> Result<CycleOutcome> {
    assert!(a >= 1, "trail threshold must be at least 1");
    let mut clock = Clock::new(params, rng);
    if clock.next_block()? == Finder::Honest {
        return Ok(CycleOutcome {
            duration: clock.duration,
            revenue_blocks: 0,
            official_height: 1,
            sigma_occurred: false,
            n_prime_tau: 0,
            z_tau: 0,
            second_phase_steps: (0, 0),
        });
    }

    // Secret race. The attacker stays strictly ahead until the honest chain
    // draws level. He answers every honest block by publishing his prefix of
    // equal height, so from the second honest block on the next honest miner
    // may build on his tip; doing so at height k bakes his first k blocks
    // into the official chain.
    let mut n_att: u64 = 1;
    let mut n_hon: u64 = 0;
    let mut z: u64 = 0;
    while n_hon < n_att {
        match clock.next_block()? {
            Finder::Attacker => n_att += 1,
            Finder::Honest => {
                if n_hon >= 1 && clock.on_attacker_fork() {
                    z = n_hon;
                }
                n_hon += 1;
            }
        }
    }
    let n = n_att;

    // Decisive competition: the attacker publishes everything and one more
    // block settles the outcome.
    let outcome = clock.next_block()?;
    let won_tie = outcome == Finder::Attacker;
    if won_tie || clock.on_attacker_fork() {
        return Ok(CycleOutcome {
            duration: clock.duration,
            revenue_blocks: if won_tie { n + 1 } else { n },
            official_height: n + 1,
            sigma_occurred: false,
            n_prime_tau: n,
            z_tau: z,
            second_phase_steps: (0, 0),
        });
    }

    // Trail phase: deficit one, walk until it clears (+1 lead) or hits A.
    let boundary = u64::from(a) + 1;
    let mut x: u64 = 2;
    let (mut left, mut right) = (0u64, 0u64);
    while x > 0 && x < boundary {
        match clock.next_block()? {
            Finder::Attacker => {
                x -= 1;
                left += 1;
            }
            Finder::Honest => {
                x += 1;
                right += 1;
            }
        }
    }
    let (revenue_blocks, official_height) = if x == 0 {
        // the attacker's fork overtakes and becomes the whole official chain
        (n + left, n + left)
    } else {
        // he gives up; only the adopted blocks survive in the honest chain
        (z, n + 1 + right)
    };
    Ok(CycleOutcome {
        duration: clock.duration,
        revenue_blocks,
        official_height,
        sigma_occurred: true,
        n_prime_tau: n,
        z_tau: z,
        second_phase_steps: (left, right),
    })
}

/// One attack cycle of classic selfish mining: withholding with no trail
/// phase. A matched lead of one triggers the same decisive competition as the
/// stubborn machine; a lead melting from two back to one triggers full
/// publication, orphaning every honest block mined meanwhile.
pub fn run_cycle_sm<R: Rng + ?Sized>(params: &NetworkParams, rng: &mut R) -> Result<CycleOutcome> {
    let mut clock = Clock::new(params, rng);
    if clock.next_block()? == Finder::Honest {
        return Ok(CycleOutcome {
            duration: clock.duration,
            revenue_blocks: 0,
            official_height: 1,
            sigma_occurred: false,
            n_prime_tau: 0,
            z_tau: 0,
            second_phase_steps: (0, 0),
        });
    }
    match clock.next_block()? {
        Finder::Honest => {
            // tie at height one; the single honest block sat on the origin
            let outcome = clock.next_block()?;
            let (revenue, sigma) = if outcome == Finder::Attacker {
                (2, false)
            } else if clock.on_attacker_fork() {
                (1, false)
            } else {
                (0, true) // lost to honest-on-honest; selfish mining gives up
            };
            Ok(CycleOutcome {
                duration: clock.duration,
                revenue_blocks: revenue,
                official_height: 2,
                sigma_occurred: sigma,
                n_prime_tau: 1,
                z_tau: 0,
                second_phase_steps: (0, 0),
            })
        }
        Finder::Attacker => {
            // lead two or more: race on until the lead melts to one, then
            // publish the whole secret chain and win it all
            let mut n_att: u64 = 2;
            let mut n_hon: u64 = 0;
            while n_att - n_hon > 1 {
                match clock.next_block()? {
                    Finder::Attacker => n_att += 1,
                    Finder::Honest => n_hon += 1,
                }
            }
            Ok(CycleOutcome {
                duration: clock.duration,
                revenue_blocks: n_att,
                official_height: n_att,
                sigma_occurred: false,
                n_prime_tau: n_att,
                z_tau: 0,
                second_phase_steps: (0, 0),
            })
        }
    }
}

/// One cycle of honest mining: a single block race.
pub fn run_cycle_honest<R: Rng + ?Sized>(
    params: &NetworkParams,
    rng: &mut R,
) -> Result<CycleOutcome> {
    let mut clock = Clock::new(params, rng);
    let revenue = match clock.next_block()? {
        Finder::Attacker => 1,
        Finder::Honest => 0,
    };
    Ok(CycleOutcome {
        duration: clock.duration,
        revenue_blocks: revenue,
        official_height: 1,
        sigma_occurred: false,
        n_prime_tau: revenue,
        z_tau: 0,
        second_phase_steps: (0, 0),
    })
}

/// Run one attack cycle of the given strategy.
pub fn run_cycle<R: Rng + ?Sized>(
    strategy: StrategyId,
    params: &NetworkParams,
    rng: &mut R,
) -> Result<CycleOutcome> {
    match strategy {
        StrategyId::Honest => run_cycle_honest(params, rng),
        StrategyId::SelfishMining => run_cycle_sm(params, rng),
        StrategyId::TrailStubborn(a) => run_cycle_tsm(params, a, rng),
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent, reproducible random stream for the given index: SplitMix64
/// over `(master_seed, index)` keys a ChaCha stream, so streams can be opened
/// in any order on any worker.
pub fn stream_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut state = master_seed ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Conditional `Z` statistics for one first-phase block count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTableRow {
    pub n_prime: u32,
    pub samples: u64,
    pub mean: f64,
    pub std_error: f64,
}

/// Aggregated estimates over independent attack cycles. Ratio metrics are
/// ratios of sums with delta-method standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub strategy: StrategyId,
    pub n_cycles: u64,
    /// Revenue ratio estimate, total revenue over total duration.
    pub revenue_ratio: Estimate,
    /// Difficulty adjustment estimate, total duration over total height.
    pub difficulty_adjustment: Estimate,
    /// Apparent hashrate estimate, total revenue over total height.
    pub apparent_hashrate: Estimate,
    pub e_duration: Estimate,
    pub e_revenue: Estimate,
    pub e_official: Estimate,
    pub p_sigma: Estimate,
    pub e_n_prime: Estimate,
    /// Trail-phase cycles observed and their mean step count.
    pub sigma_cycles: u64,
    pub e_sigma_steps: Option<Estimate>,
    pub z_table: Vec<ZTableRow>,
}

#[derive(Clone, Copy, Default)]
struct ZAcc {
    count: u64,
    sum: f64,
    sum2: f64,
}

#[derive(Clone)]
struct Accumulator {
    cycles: u64,
    sum_dur: f64,
    sum_dur2: f64,
    sum_rev: f64,
    sum_rev2: f64,
    sum_off: f64,
    sum_off2: f64,
    sum_rev_dur: f64,
    sum_dur_off: f64,
    sum_rev_off: f64,
    sigma_count: u64,
    sum_nprime: f64,
    sum_nprime2: f64,
    sigma_steps: f64,
    sigma_steps2: f64,
    z_rows: Vec<ZAcc>,
}

impl Accumulator {
    fn new() -> Self {
        Self {
            cycles: 0,
            sum_dur: 0.0,
            sum_dur2: 0.0,
            sum_rev: 0.0,
            sum_rev2: 0.0,
            sum_off: 0.0,
            sum_off2: 0.0,
            sum_rev_dur: 0.0,
            sum_dur_off: 0.0,
            sum_rev_off: 0.0,
            sigma_count: 0,
            sum_nprime: 0.0,
            sum_nprime2: 0.0,
            sigma_steps: 0.0,
            sigma_steps2: 0.0,
            z_rows: vec![ZAcc::default(); Z_TABLE_ROWS],
        }
    }

    fn record(&mut self, o: &CycleOutcome) {
        let dur = o.duration;
        let rev = o.revenue_blocks as f64;
        let off = o.official_height as f64;
        let np = o.n_prime_tau as f64;
        self.cycles += 1;
        self.sum_dur += dur;
        self.sum_dur2 += dur * dur;
        self.sum_rev += rev;
        self.sum_rev2 += rev * rev;
        self.sum_off += off;
        self.sum_off2 += off * off;
        self.sum_rev_dur += rev * dur;
        self.sum_dur_off += dur * off;
        self.sum_rev_off += rev * off;
        self.sum_nprime += np;
        self.sum_nprime2 += np * np;
        if o.sigma_occurred {
            self.sigma_count += 1;
            let steps = (o.second_phase_steps.0 + o.second_phase_steps.1) as f64;
            self.sigma_steps += steps;
            self.sigma_steps2 += steps * steps;
        }
        if (o.n_prime_tau as usize) < Z_TABLE_ROWS {
            let row = &mut self.z_rows[o.n_prime_tau as usize];
            let z = o.z_tau as f64;
            row.count += 1;
            row.sum += z;
            row.sum2 += z * z;
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        self.cycles += other.cycles;
        self.sum_dur += other.sum_dur;
        self.sum_dur2 += other.sum_dur2;
        self.sum_rev += other.sum_rev;
        self.sum_rev2 += other.sum_rev2;
        self.sum_off += other.sum_off;
        self.sum_off2 += other.sum_off2;
        self.sum_rev_dur += other.sum_rev_dur;
        self.sum_dur_off += other.sum_dur_off;
        self.sum_rev_off += other.sum_rev_off;
        self.sigma_count += other.sigma_count;
        self.sum_nprime += other.sum_nprime;
        self.sum_nprime2 += other.sum_nprime2;
        self.sigma_steps += other.sigma_steps;
        self.sigma_steps2 += other.sigma_steps2;
        for (a, b) in self.z_rows.iter_mut().zip(&other.z_rows) {
            a.count += b.count;
            a.sum += b.sum;
            a.sum2 += b.sum2;
        }
    }

    fn summarize(&self, strategy: StrategyId) -> EstimateSummary {
        let n = self.cycles;
        let sigma_ind_sum = self.sigma_count as f64;
        EstimateSummary {
            strategy,
            n_cycles: n,
            revenue_ratio: ratio_estimate(self.sum_rev, self.sum_rev2, self.sum_dur, self.sum_dur2, self.sum_rev_dur, n),
            difficulty_adjustment: ratio_estimate(self.sum_dur, self.sum_dur2, self.sum_off, self.sum_off2, self.sum_dur_off, n),
            apparent_hashrate: ratio_estimate(self.sum_rev, self.sum_rev2, self.sum_off, self.sum_off2, self.sum_rev_off, n),
            e_duration: mean_estimate(self.sum_dur, self.sum_dur2, n),
            e_revenue: mean_estimate(self.sum_rev, self.sum_rev2, n),
            e_official: mean_estimate(self.sum_off, self.sum_off2, n),
            p_sigma: mean_estimate(sigma_ind_sum, sigma_ind_sum, n),
            e_n_prime: mean_estimate(self.sum_nprime, self.sum_nprime2, n),
            sigma_cycles: self.sigma_count,
            e_sigma_steps: (self.sigma_count > 0)
                .then(|| mean_estimate(self.sigma_steps, self.sigma_steps2, self.sigma_count)),
            z_table: self
                .z_rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r.count > 0)
                .map(|(i, r)| {
                    let est = mean_estimate(r.sum, r.sum2, r.count);
                    ZTableRow { n_prime: i as u32, samples: r.count, mean: est.mean, std_error: est.std_error }
                })
                .collect(),
        }
    }
}

fn mean_estimate(sum: f64, sum2: f64, n: u64) -> Estimate {
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return Estimate { mean, std_error: 0.0 };
    }
    let var = ((sum2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Estimate { mean, std_error: (var / nf).sqrt() }
}

/// Delta-method standard error for `sum_x / sum_y`.
fn ratio_estimate(sum_x: f64, sum_x2: f64, sum_y: f64, sum_y2: f64, sum_xy: f64, n: u64) -> Estimate {
    let nf = n as f64;
    let theta = sum_x / sum_y;
    if n < 2 {
        return Estimate { mean: theta, std_error: 0.0 };
    }
    let xbar = sum_x / nf;
    let ybar = sum_y / nf;
    let sxx = (sum_x2 - nf * xbar * xbar) / (nf - 1.0);
    let syy = (sum_y2 - nf * ybar * ybar) / (nf - 1.0);
    let sxy = (sum_xy - nf * xbar * ybar) / (nf - 1.0);
    let var = ((sxx - 2.0 * theta * sxy + theta * theta * syy) / (nf * ybar * ybar)).max(0.0);
    Estimate { mean: theta, std_error: var.sqrt() }
}

/// Estimate all cycle metrics over `n_cycles` independent cycles.
///
/// Cycle `i` always runs on stream `i` of `master_seed`, and partial sums are
/// reduced in fixed chunk order, so the result is bit-identical regardless of
/// how many rayon workers participate.
pub fn estimate_metrics(
    strategy: StrategyId,
    params: &NetworkParams,
    n_cycles: u64,
    master_seed: u64,
) -> Result<EstimateSummary> {
    assert!(n_cycles >= 1, "need at least one cycle");
    let n_chunks = n_cycles.div_ceil(CYCLES_PER_CHUNK);
    let partials: Result<Vec<Accumulator>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CYCLES_PER_CHUNK;
            let hi = (lo + CYCLES_PER_CHUNK).min(n_cycles);
            let mut acc = Accumulator::new();
            for index in lo..hi {
                let mut rng = stream_rng(master_seed, index);
                acc.record(&run_cycle(strategy, params, &mut rng)?);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Accumulator::new();
    for part in &partials? {
        total.merge(part);
    }
    Ok(total.summarize(strategy))
}

/// Long-run estimates for a repeating pattern of attack cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternEstimate {
    pub n_repetitions: u64,
    /// Difficulty adjustment of the mixed strategy.
    pub d: Estimate,
    /// Long-run apparent revenue rate in reward-per-`tau0` units.
    pub gamma_tilde: Estimate,
}

/// Simulate the literal alternating-cycle pattern: each repetition plays
/// every `(strategy, params)` pair once, in order.
pub fn simulate_pattern(
    pattern: &[(StrategyId, NetworkParams)],
    n_repetitions: u64,
    master_seed: u64,
) -> Result<PatternEstimate> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    assert!(n_repetitions >= 1, "need at least one repetition");
    let slots = pattern.len() as u64;
    let n_chunks = n_repetitions.div_ceil(CYCLES_PER_CHUNK);
    #[derive(Clone, Default)]
    struct RepAcc {
        n: u64,
        sum_dur: f64,
        sum_dur2: f64,
        sum_rev: f64,
        sum_rev2: f64,
        sum_off: f64,
        sum_off2: f64,
        sum_dur_off: f64,
        sum_rev_off: f64,
    }
    let partials: Result<Vec<RepAcc>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CYCLES_PER_CHUNK;
            let hi = (lo + CYCLES_PER_CHUNK).min(n_repetitions);
            let mut acc = RepAcc::default();
            for rep in lo..hi {
                let mut dur = 0.0;
                let mut rev = 0.0;
                let mut off = 0.0;
                for (slot, (strategy, params)) in pattern.iter().enumerate() {
                    let mut rng = stream_rng(master_seed, rep * slots + slot as u64);
                    let outcome = run_cycle(*strategy, params, &mut rng)?;
                    dur += outcome.duration;
                    rev += outcome.revenue_blocks as f64;
                    off += outcome.official_height as f64;
                }
                acc.n += 1;
                acc.sum_dur += dur;
                acc.sum_dur2 += dur * dur;
                acc.sum_rev += rev;
                acc.sum_rev2 += rev * rev;
                acc.sum_off += off;
                acc.sum_off2 += off * off;
                acc.sum_dur_off += dur * off;
                acc.sum_rev_off += rev * off;
            }
            Ok(acc)
        })
        .collect();
    let mut t = RepAcc::default();
    for p in &partials? {
        t.n += p.n;
        t.sum_dur += p.sum_dur;
        t.sum_dur2 += p.sum_dur2;
        t.sum_rev += p.sum_rev;
        t.sum_rev2 += p.sum_rev2;
        t.sum_off += p.sum_off;
        t.sum_off2 += p.sum_off2;
        t.sum_dur_off += p.sum_dur_off;
        t.sum_rev_off += p.sum_rev_off;
    }
    Ok(PatternEstimate {
        n_repetitions: t.n,
        d: ratio_estimate(t.sum_dur, t.sum_dur2, t.sum_off, t.sum_off2, t.sum_dur_off, t.n),
        gamma_tilde: ratio_estimate(t.sum_rev, t.sum_rev2, t.sum_off, t.sum_off2, t.sum_rev_off, t.n),
    })
}

/// Outcome of the continuous-time embedding check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonEmbeddingReport {
    pub n_paths: u64,
    pub exit_low: Estimate,
    pub exit_low_expected: f64,
    /// Mean exit time in `tau0` units.
    pub exit_time: Estimate,
    pub exit_time_expected: f64,
    pub within_four_se: bool,
}

/// Race two Poisson clocks (honest rate `p`, attacker rate `q`, in `tau0`
/// units) and watch their difference walk on `[0, M]` from `m`; compares the
/// empirical exit side and exit time against the walk's closed forms.
pub fn poisson_embedding_check(
    params: &NetworkParams,
    m: u32,
    big_m: u32,
    n_paths: u64,
    master_seed: u64,
) -> Result<PoissonEmbeddingReport> {
    assert!(n_paths >= 1, "need at least one path");
    let problem = HikerProblem::new(m, big_m, params.p())?;
    let expected_low = exit_prob_low(&problem);
    let expected_time = expected_exit_time(&problem);
    let p = params.p();
    let q = params.q();
    let n_chunks = n_paths.div_ceil(CYCLES_PER_CHUNK);
    let partials: Result<Vec<(f64, f64, f64)>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CYCLES_PER_CHUNK;
            let hi = (lo + CYCLES_PER_CHUNK).min(n_paths);
            let (mut low, mut time, mut time2) = (0.0f64, 0.0f64, 0.0f64);
            for index in lo..hi {
                let mut rng = stream_rng(master_seed, index);
                let mut pos = m;
                let mut t = 0.0f64;
                let mut steps = 0u64;
                while pos != 0 && pos != big_m {
                    if steps >= crate::hiker::STEP_CAP {
                        return Err(Error::StepCapExceeded(crate::hiker::STEP_CAP));
                    }
                    steps += 1;
                    let next_honest = rng.sample::<f64, _>(Exp1) / p;
                    let next_attacker = rng.sample::<f64, _>(Exp1) / q;
                    if next_honest < next_attacker {
                        pos += 1;
                        t += next_honest;
                    } else {
                        pos -= 1;
                        t += next_attacker;
                    }
                }
                if pos == 0 {
                    low += 1.0;
                }
                time += t;
                time2 += t * t;
            }
            Ok((low, time, time2))
        })
        .collect();
    let (mut low, mut time, mut time2) = (0.0, 0.0, 0.0);
    for (a, b, c) in partials? {
        low += a;
        time += b;
        time2 += c;
    }
    let exit_low = mean_estimate(low, low, n_paths);
    let exit_time = mean_estimate(time, time2, n_paths);
    let within = (exit_low.mean - expected_low).abs() <= 4.0 * exit_low.std_error
        && (exit_time.mean - expected_time).abs() <= 4.0 * exit_time.std_error;
    Ok(PoissonEmbeddingReport {
        n_paths,
        exit_low,
        exit_low_expected: expected_low,
        exit_time,
        exit_time_expected: expected_time,
        within_four_se: within,
    })
}

//! The absorbing nearest-neighbour walk on `[0, M]`: exit probabilities,
//! expected exit times, conditional step counts, the twisted kernel of the
//! walk conditioned on ruin, and the exact linear-solve oracle every closed
//! form is verified against.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{bracket, divide_by_one_minus_x, horner};

/// Safety cap for the path sampler.
pub const STEP_CAP: u64 = 1_000_000_000;
/// Largest boundary the linear-solve oracle accepts.
pub const ORACLE_MAX_M: u32 = 10_000;

/// A walker on `[0, M]` absorbed at both ends, starting at `m`, stepping
/// right with probability `p_right > 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HikerProblem {
    m: u32,
    big_m: u32,
    p_right: f64,
}

impl HikerProblem {
    pub fn new(m: u32, big_m: u32, p_right: f64) -> Result<Self> {
        if big_m < 2 {
            return Err(Error::InvalidHikerProblem("boundary M must be at least 2"));
        }
        if m > big_m {
            return Err(Error::InvalidHikerProblem("start m must lie in [0, M]"));
        }
        if !p_right.is_finite() || p_right <= 0.5 || p_right >= 1.0 {
            return Err(Error::InvalidHikerProblem("p_right must lie strictly between 1/2 and 1"));
        }
        Ok(Self { m, big_m, p_right })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn big_m(&self) -> u32 {
        self.big_m
    }

    pub fn p_right(&self) -> f64 {
        self.p_right
    }

    pub fn q_left(&self) -> f64 {
        1.0 - self.p_right
    }

    /// `lambda = q_left / p_right`, strictly inside `(0, 1)`.
    pub fn lambda(&self) -> f64 {
        self.q_left() / self.p_right
    }
}

/// The five closed-form quantities of the walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HikerClosedForms {
    /// Probability of exiting at 0.
    pub exit_prob_low: f64,
    /// Expected number of steps until absorption.
    pub e_exit_time: f64,
    /// Expected steps until absorption given exit at 0.
    pub e_exit_time_given_low: f64,
    /// Expected left steps given exit at 0.
    pub e_left_given_low: f64,
    /// Expected right steps given exit at `M`.
    pub e_right_given_high: f64,
}

/// `P[exit at 0] = (lambda^m - lambda^M) / (1 - lambda^M)`, evaluated through
/// bracket ratios.
pub fn exit_prob_low(problem: &HikerProblem) -> f64 {
    let l = problem.lambda();
    let (m, mm) = (problem.m, problem.big_m);
    l.powi(m as i32) * bracket(mm - m, l) / bracket(mm, l)
}

/// `E[steps to absorption] = M/(p - q) ((1 - lambda^m)/(1 - lambda^M) - m/M)`.
pub fn expected_exit_time(problem: &HikerProblem) -> f64 {
    let l = problem.lambda();
    let (m, mm) = (problem.m, problem.big_m);
    let drift = problem.p_right() - problem.q_left();
    f64::from(mm) / drift * (bracket(m, l) / bracket(mm, l) - f64::from(m) / f64::from(mm))
}

/// Stern's formula for `E[steps | exit at 0]`.
///
/// The published fraction has a `(1 - lambda)^2` factor hiding in its
/// numerator; it is peeled off by two exact integer divisions so the value
/// stays accurate for `lambda` near one.
pub fn stern_conditional_time(problem: &HikerProblem) -> Result<f64> {
    let (m, mm) = (problem.m, problem.big_m);
    if m == 0 || m == mm {
        return Err(Error::DegenerateConditioning { m, big_m: mm });
    }
    let l = problem.lambda();
    // numerator polynomial m [2M-m] - (2M-m) X^(M-m) [m]
    let span = (2 * mm - m) as usize;
    let mut coeffs = vec![i64::from(m); span];
    for c in &mut coeffs[(mm - m) as usize..mm as usize] {
        *c -= i64::from(2 * mm - m);
    }
    let quotient = divide_by_one_minus_x(&divide_by_one_minus_x(&coeffs)?)?;
    Ok(horner(&quotient, l) / (problem.p_right() * bracket(mm - m, l) * bracket(mm, l)))
}

/// `E[steps | exit at M]`, combined from the three closed forms above by the
/// law of total expectation.
fn expected_exit_time_given_high(problem: &HikerProblem) -> Result<f64> {
    let low = exit_prob_low(problem);
    let stern = stern_conditional_time(problem)?;
    Ok((expected_exit_time(problem) - low * stern) / (1.0 - low))
}

/// Expected left steps given exit at 0: on ruin, left = (steps + m) / 2.
pub fn expected_left_steps_given_ruin(problem: &HikerProblem) -> Result<f64> {
    let stern = stern_conditional_time(problem)?;
    Ok((f64::from(problem.m) + stern) / 2.0)
}

/// Expected right steps given exit at `M`: on a win, right = (steps + M - m) / 2.
pub fn expected_right_steps_given_win(problem: &HikerProblem) -> Result<f64> {
    let high = expected_exit_time_given_high(problem)?;
    Ok((f64::from(problem.big_m - problem.m) + high) / 2.0)
}

/// All five closed forms for an interior start.
pub fn closed_forms(problem: &HikerProblem) -> Result<HikerClosedForms> {
    Ok(HikerClosedForms {
        exit_prob_low: exit_prob_low(problem),
        e_exit_time: expected_exit_time(problem),
        e_exit_time_given_low: stern_conditional_time(problem)?,
        e_left_given_low: expected_left_steps_given_ruin(problem)?,
        e_right_given_high: expected_right_steps_given_win(problem)?,
    })
}

/// One step of the walk conditioned on exiting at 0 (the h-Doob twist of the
/// plain kernel): returns `(prob_up, prob_down)` from interior state `i`.
pub fn twisted_transitions(i: u32, problem: &HikerProblem) -> (f64, f64) {
    let mm = problem.big_m;
    assert!(i >= 1 && i < mm, "twisted kernel is defined on the interior");
    let l = problem.lambda();
    let p = problem.p_right();
    let k = mm - i;
    let up = p * l * bracket(k - 1, l) / bracket(k, l);
    let down = p * bracket(k + 1, l) / bracket(k, l);
    (up, down)
}

/// `u_n` by its defining recursion, with `p = 1/(1 + lambda)`.
pub fn u_sequence(n: u32, lambda: f64) -> f64 {
    assert!(lambda > 0.0 && lambda < 1.0, "u_n requires 0 < lambda < 1");
    let p = 1.0 / (1.0 + lambda);
    let mut u = 1.0;
    for k in 1..=n {
        u = lambda * bracket(k, lambda) / bracket(k + 2, lambda) * u
            + (1.0 / p) * bracket(k + 1, lambda) / bracket(k + 2, lambda);
    }
    u
}

/// Closed form of `u_n`, rearranged into a positive sum of brackets so no
/// cancelling powers of `lambda` are ever subtracted.
pub fn u_closed(n: u32, lambda: f64) -> f64 {
    assert!(lambda > 0.0 && lambda < 1.0, "u_n requires 0 < lambda < 1");
    let p = 1.0 / (1.0 + lambda);
    let mut num = 0.0;
    let mut pow = 1.0;
    for i in 0..=n {
        let b = bracket(n + 1 - i, lambda);
        num += pow * b * b;
        pow *= lambda;
    }
    num / (p * bracket(n + 1, lambda) * bracket(n + 2, lambda))
}

/// Exact absorption oracle: absorption probabilities and expected absorption
/// times from direct sweeps over the interior transition system, independent
/// of every closed form above.
///
/// With `conditioned_on_low` set, the ruin-conditioned time comes from the
/// twisted kernel by the backward difference recursion; otherwise it is read
/// off the plain kernel via `E[steps * 1_ruin]`.
pub fn absorption_oracle(problem: &HikerProblem, conditioned_on_low: bool) -> Result<HikerClosedForms> {
    let (m, mm) = (problem.m, problem.big_m);
    if mm > ORACLE_MAX_M {
        return Err(Error::InvalidHikerProblem("absorption oracle supports M up to 10000"));
    }
    if m == 0 || m == mm {
        return Err(Error::DegenerateConditioning { m, big_m: mm });
    }
    let n = mm as usize - 1; // interior states 1..=M-1
    let p = problem.p_right();
    let q = problem.q_left();

    // Exit probabilities via the backward ratio sweep r_i = h_i / h_{i-1},
    // which keeps tiny probabilities accurate in relative terms.
    let mut ratio = vec![0.0f64; n + 2]; // index i in 1..=M, ratio[M] = 0
    for i in (1..=n).rev() {
        let denom = 1.0 - p * ratio[i + 1];
        if denom <= 0.0 || !denom.is_finite() {
            return Err(Error::SingularSystem);
        }
        ratio[i] = q / denom;
    }
    let mut h = vec![0.0f64; n + 2]; // h[0] = 1, h[i] for i <= M-1
    h[0] = 1.0;
    for i in 1..=n {
        h[i] = h[i - 1] * ratio[i];
    }

    let t = solve_tridiagonal(p, q, &vec![1.0; n])?;
    let s_rhs: Vec<f64> = (1..=n).map(|i| h[i]).collect();
    let g_rhs: Vec<f64> = (1..=n).map(|i| 1.0 - h[i]).collect();
    let s = solve_tridiagonal(p, q, &s_rhs)?;
    let g = solve_tridiagonal(p, q, &g_rhs)?;

    let idx = m as usize - 1;
    let h_m = h[m as usize];
    let time_given_low = if conditioned_on_low {
        conditioned_time_twisted(problem)
    } else {
        s[idx] / h_m
    };
    let time_given_high = g[idx] / (1.0 - h_m);
    Ok(HikerClosedForms {
        exit_prob_low: h_m,
        e_exit_time: t[idx],
        e_exit_time_given_low: time_given_low,
        e_left_given_low: (f64::from(m) + time_given_low) / 2.0,
        e_right_given_high: (f64::from(mm - m) + time_given_high) / 2.0,
    })
}

/// Thomas sweep for the interior system `x_i = rhs_i + q x_{i-1} + p x_{i+1}`
/// with absorbing boundaries. Every update is a positive add or multiply, so
/// the sweep is accurate to machine precision.
fn solve_tridiagonal(p: f64, q: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let mut sup = vec![0.0f64; n]; // modified superdiagonal, negated
    let mut d = vec![0.0f64; n];
    let mut denom = 1.0;
    for i in 0..n {
        if i > 0 {
            denom = 1.0 - q * p * sup[i - 1];
        }
        if denom <= 0.0 || !denom.is_finite() {
            return Err(Error::SingularSystem);
        }
        sup[i] = 1.0 / denom;
        d[i] = (rhs[i] + if i > 0 { q * d[i - 1] } else { 0.0 }) / denom;
    }
    let mut x = vec![0.0f64; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] + p * sup[i] * x[i + 1];
    }
    Ok(x)
}

/// Ruin-conditioned expected absorption time through the twisted kernel:
/// `alpha_{M-1} = 1`, `alpha_i` by backward recursion, summed up to `m`.
fn conditioned_time_twisted(problem: &HikerProblem) -> f64 {
    let mm = problem.big_m as usize;
    let mut alpha = vec![0.0f64; mm]; // index 1..=M-1 used
    alpha[mm - 1] = 1.0;
    for i in (1..mm - 1).rev() {
        let (up, down) = twisted_transitions(i as u32, problem);
        alpha[i] = up / down * alpha[i + 1] + 1.0 / down;
    }
    alpha[1..=problem.m as usize].iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExitSide {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HikerPath {
    pub exit: ExitSide,
    pub total_steps: u64,
    pub left_steps: u64,
    pub right_steps: u64,
}

/// Simulate one walk to absorption on the caller's random stream.
pub fn sample_hiker_path<R: Rng + ?Sized>(problem: &HikerProblem, rng: &mut R) -> Result<HikerPath> {
    let mut pos = problem.m;
    let mut left = 0u64;
    let mut right = 0u64;
    while pos != 0 && pos != problem.big_m {
        if left + right >= STEP_CAP {
            return Err(Error::StepCapExceeded(STEP_CAP));
        }
        if rng.gen::<f64>() < problem.p_right {
            pos += 1;
            right += 1;
        } else {
            pos -= 1;
            left += 1;
        }
    }
    Ok(HikerPath {
        exit: if pos == 0 { ExitSide::Low } else { ExitSide::High },
        total_steps: left + right,
        left_steps: left,
        right_steps: right,
    })
}

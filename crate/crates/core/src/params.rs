//! Shared domain types and notation helpers: validated network parameters,
//! strategy identifiers, geometric brackets, the `P_A` polynomial family and
//! the Catalan distribution of attacker blocks per cycle.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest index whose Catalan number is taken from exact integer
/// arithmetic; beyond it the pmf falls back to a floating-point product.
const MAX_EXACT_CATALAN: u32 = 30;

/// Validated network-level parameters of an attack scenario.
///
/// `q` is the attacker's relative hashrate, `gamma` the fraction of honest
/// hashpower that mines on the attacker's fork during a tie, `tau0` the mean
/// inter-block time of the whole network and `reward` the block reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    q: f64,
    gamma: f64,
    tau0: f64,
    reward: f64,
}

impl NetworkParams {
    /// Validate raw inputs. Every expectation downstream divides by
    /// `p - q`, so `q >= 1/2` is rejected outright.
    pub fn new(q: f64, gamma: f64, tau0: f64, reward: f64) -> Result<Self> {
        if !q.is_finite() || !(0.0..0.5).contains(&q) {
            return Err(Error::QOutOfRange(q));
        }
        if !gamma.is_finite() || !(0.0..=1.0).contains(&gamma) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        if !tau0.is_finite() || !reward.is_finite() || tau0 <= 0.0 || reward <= 0.0 {
            return Err(Error::NonPositiveScale { tau0, reward });
        }
        Ok(Self { q, gamma, tau0, reward })
    }

    /// Parameters with unit block time and unit reward.
    pub fn unit(q: f64, gamma: f64) -> Result<Self> {
        Self::new(q, gamma, 1.0, 1.0)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn reward(&self) -> f64 {
        self.reward
    }

    /// Honest share `p = 1 - q`.
    pub fn p(&self) -> f64 {
        1.0 - self.q
    }

    /// Odds ratio `lambda = q / p`, strictly below one.
    pub fn lambda(&self) -> f64 {
        self.q / (1.0 - self.q)
    }
}

/// Identifier of a mining strategy.
///
/// The declared order (honest, selfish, trail-stubborn with rising `A`) is
/// also the tie-break order used by dominance maps. Lead-stubborn mining is
/// the `A = 1` trail-stubborn strategy, not a separate variant, so the two
/// spellings compare equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyId {
    Honest,
    SelfishMining,
    /// Trail-stubborn mining that gives up once its deficit exceeds `A >= 1`.
    TrailStubborn(u32),
}

impl StrategyId {
    pub const LEAD_STUBBORN: StrategyId = StrategyId::TrailStubborn(1);

    pub fn trail_stubborn(a: u32) -> Result<Self> {
        if a == 0 {
            return Err(Error::TrailThresholdOutOfRange);
        }
        Ok(StrategyId::TrailStubborn(a))
    }

    /// Trail threshold for trail-stubborn strategies, `None` otherwise.
    pub fn trail_threshold(&self) -> Option<u32> {
        match self {
            StrategyId::TrailStubborn(a) => Some(*a),
            _ => None,
        }
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyId::Honest => write!(f, "honest"),
            StrategyId::SelfishMining => write!(f, "sm"),
            StrategyId::TrailStubborn(a) => write!(f, "tsm:{a}"),
        }
    }
}

impl FromStr for StrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "honest" => Ok(StrategyId::Honest),
            "sm" => Ok(StrategyId::SelfishMining),
            "lsm" => Ok(StrategyId::LEAD_STUBBORN),
            other => match other.strip_prefix("tsm:") {
                Some(a) => a
                    .parse::<u32>()
                    .map_err(|_| Error::UnknownStrategy(s.to_string()))
                    .and_then(StrategyId::trail_stubborn),
                None => Err(Error::UnknownStrategy(s.to_string())),
            },
        }
    }
}

impl Serialize for StrategyId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StrategyId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// The bracket `[n] = (1 - lambda^n) / (1 - lambda)`, computed as the
/// geometric sum `1 + lambda + ... + lambda^(n-1)` so it stays exact as
/// `lambda` approaches one.
pub fn bracket(n: u32, lambda: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = 1.0;
    for _ in 0..n {
        sum += pow;
        pow *= lambda;
    }
    sum
}

/// Exact synthetic division by `(1 - X)`: the quotient coefficients are the
/// running prefix sums and the remainder is the value at one.
pub(crate) fn divide_by_one_minus_x(coeffs: &[i64]) -> Result<Vec<i64>> {
    let mut quotient = Vec::with_capacity(coeffs.len().saturating_sub(1));
    let mut acc: i64 = 0;
    for (i, &c) in coeffs.iter().enumerate() {
        acc = acc
            .checked_add(c)
            .ok_or_else(|| Error::InternalInconsistency("coefficient overflow in synthetic division".into()))?;
        if i + 1 < coeffs.len() {
            quotient.push(acc);
        }
    }
    if acc != 0 {
        return Err(Error::InternalInconsistency(format!(
            "nonzero remainder {acc} dividing by (1 - X)"
        )));
    }
    Ok(quotient)
}

pub(crate) fn horner(coeffs: &[i64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64)
}

/// Integer coefficients of `P_A`, obtained by dividing
/// `1 - A X^(A-1) + A X^(A+1) - X^(2A)` by `(1 - X)^3` exactly. The zero
/// polynomial (`A = 1`) is the empty vector.
pub fn pa_coefficients(a: u32) -> Result<Vec<i64>> {
    assert!(a >= 1, "P_A requires A >= 1");
    let deg = 2 * a as usize;
    let mut poly = vec![0i64; deg + 1];
    poly[0] += 1;
    poly[a as usize - 1] -= i64::from(a);
    poly[a as usize + 1] += i64::from(a);
    poly[deg] -= 1;
    for _ in 0..3 {
        poly = divide_by_one_minus_x(&poly)?;
    }
    while poly.last() == Some(&0) {
        poly.pop();
    }
    Ok(poly)
}

/// Evaluate `P_A(lambda)` from its integer coefficients. The ratio form is
/// 0/0-prone near `lambda = 1` and is never used here.
pub fn pa_eval(a: u32, lambda: f64) -> f64 {
    let coeffs = pa_coefficients(a).expect("P_A division by (1 - X)^3 is exact");
    horner(&coeffs, lambda)
}

/// Exact Catalan number `C_n` for `n <= 30`.
pub(crate) fn catalan_exact(n: u32) -> Option<u128> {
    if n > MAX_EXACT_CATALAN {
        return None;
    }
    let mut c: u128 = 1;
    for k in 0..u128::from(n) {
        // C_{k+1} = C_k * 2(2k + 1) / (k + 2), an exact integer step
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    Some(c)
}

/// Probability that the attacker mines exactly `n` blocks in the first phase
/// of an attack cycle: `p` for `n = 0` and `C_{n-1} (pq)^n` for `n >= 1`.
pub fn cycle_length_pmf(n: u32, params: &NetworkParams) -> f64 {
    let p = params.p();
    let q = params.q();
    if n == 0 {
        return p;
    }
    let x = p * q;
    match catalan_exact(n - 1) {
        Some(c) => c as f64 * x.powi(n as i32),
        None => {
            // continue the term recurrence t_n = t_{n-1} x 2(2n-3)/n from the
            // last exactly-known index; every factor is below one, so the
            // product cannot overflow
            let n0 = MAX_EXACT_CATALAN + 1;
            let mut t = catalan_exact(MAX_EXACT_CATALAN).unwrap() as f64 * x.powi(n0 as i32);
            for k in (n0 + 1)..=n {
                t *= x * f64::from(2 * (2 * k - 3)) / f64::from(k);
            }
            t
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_and_derives() {
        let p = NetworkParams::new(0.4, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(p.p(), 0.6);
        assert!((p.lambda() - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            NetworkParams::new(0.5, 0.0, 1.0, 1.0),
            Err(Error::QOutOfRange(_))
        ));
        assert!(matches!(
            NetworkParams::new(0.3, 1.2, 1.0, 1.0),
            Err(Error::GammaOutOfRange(_))
        ));
        assert!(matches!(
            NetworkParams::new(0.3, 0.2, 0.0, 1.0),
            Err(Error::NonPositiveScale { .. })
        ));
        assert!(matches!(
            NetworkParams::new(0.3, 0.2, 1.0, -2.0),
            Err(Error::NonPositiveScale { .. })
        ));
        assert!(NetworkParams::unit(0.0, 1.0).is_ok());
    }

    #[test]
    fn strategy_order_and_alias() {
        assert_eq!(StrategyId::LEAD_STUBBORN, StrategyId::TrailStubborn(1));
        assert!(StrategyId::Honest < StrategyId::SelfishMining);
        assert!(StrategyId::SelfishMining < StrategyId::TrailStubborn(1));
        assert!(StrategyId::TrailStubborn(1) < StrategyId::TrailStubborn(2));
        assert!(matches!(
            StrategyId::trail_stubborn(0),
            Err(Error::TrailThresholdOutOfRange)
        ));
    }

    #[test]
    fn strategy_parse_round_trip() {
        for s in ["honest", "sm", "tsm:1", "tsm:7"] {
            let id: StrategyId = s.parse().unwrap();
            assert_eq!(id.to_string(), s);
        }
        assert_eq!("lsm".parse::<StrategyId>().unwrap(), StrategyId::TrailStubborn(1));
        assert!("efsm".parse::<StrategyId>().is_err());
        assert!("tsm:0".parse::<StrategyId>().is_err());
        assert!("tsm:x".parse::<StrategyId>().is_err());
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(bracket(0, 0.7), 0.0);
        assert_eq!(bracket(1, 0.7), 1.0);
        assert!((bracket(3, 2.0 / 3.0) - 19.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn bracket_identity_grid() {
        // [n](1 - lambda) + lambda^n = 1
        for n in 0..=64u32 {
            for k in 0..=999 {
                let lambda = k as f64 / 1000.0;
                let lhs = bracket(n, lambda) * (1.0 - lambda) + lambda.powi(n as i32);
                assert!((lhs - 1.0).abs() < 1e-12, "n={n} lambda={lambda}: {lhs}");
            }
        }
    }

    #[test]
    fn pa_small_cases() {
        assert!(pa_coefficients(1).unwrap().is_empty());
        assert_eq!(pa_coefficients(2).unwrap(), vec![1, 1]);
        assert_eq!(pa_coefficients(3).unwrap(), vec![1, 3, 3, 1]);
        assert_eq!(pa_eval(1, 0.9), 0.0);
        assert!((pa_eval(2, 2.0 / 3.0) - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pa_reconstruction() {
        // (1 - X)^3 P_A must recover 1 - A X^(A-1) + A X^(A+1) - X^(2A)
        for a in 1..=12u32 {
            let pa = pa_coefficients(a).unwrap();
            if a >= 2 {
                assert_eq!(pa.len(), 2 * a as usize - 2, "degree 2A - 3 for A = {a}");
            }
            let cube = [1i64, -3, 3, -1]; // (1 - X)^3
            let mut product = vec![0i64; pa.len() + 3 + 1];
            for (i, &x) in pa.iter().enumerate() {
                for (j, &y) in cube.iter().enumerate() {
                    product[i + j] += x * y;
                }
            }
            let mut expected = vec![0i64; 2 * a as usize + 1];
            expected[0] += 1;
            expected[a as usize - 1] -= i64::from(a);
            expected[a as usize + 1] += i64::from(a);
            expected[2 * a as usize] -= 1;
            while product.last() == Some(&0) {
                product.pop();
            }
            while expected.last() == Some(&0) {
                expected.pop();
            }
            assert_eq!(product, expected, "A = {a}");
        }
    }

    #[test]
    fn pa_coefficient_form_matches_ratio_form() {
        let (a, lambda) = (2u32, 0.3f64);
        let ratio = (1.0 - 2.0 * lambda + 2.0 * lambda.powi(3) - lambda.powi(4))
            / (1.0 - lambda).powi(3);
        assert!((pa_eval(a, lambda) - ratio).abs() < 1e-12);
    }

    #[test]
    fn catalan_values() {
        assert_eq!(catalan_exact(0), Some(1));
        assert_eq!(catalan_exact(1), Some(1));
        assert_eq!(catalan_exact(5), Some(42));
        assert_eq!(catalan_exact(10), Some(16796));
        assert_eq!(catalan_exact(30), Some(3_814_986_502_092_304));
        assert_eq!(catalan_exact(31), None);
    }

    #[test]
    fn pmf_point_values() {
        let params = NetworkParams::unit(0.3, 0.0).unwrap();
        assert!((cycle_length_pmf(0, &params) - 0.7).abs() < 1e-15);
        assert!((cycle_length_pmf(1, &params) - 0.21).abs() < 1e-15);
        let q0 = NetworkParams::unit(0.0, 0.0).unwrap();
        assert_eq!(cycle_length_pmf(0, &q0), 1.0);
        assert_eq!(cycle_length_pmf(3, &q0), 0.0);
    }

    #[test]
    fn pmf_floating_tail_matches_reference_product() {
        // the n > 31 branch against an independent running product
        let params = NetworkParams::unit(0.45, 0.0).unwrap();
        let x = params.p() * params.q();
        let mut c = 1.0f64; // C_0
        let mut reference = vec![x]; // term at n = 1
        for n in 2..=60u32 {
            c *= 2.0 * (2.0 * f64::from(n - 1) - 1.0) / (f64::from(n - 1) + 1.0);
            reference.push(c * x.powi(n as i32));
        }
        for n in 32..=60u32 {
            let got = cycle_length_pmf(n, &params);
            let want = reference[n as usize - 1];
            assert!(
                (got - want).abs() <= 1e-12 * want,
                "n={n}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn pmf_normalizes_and_has_expected_mean() {
        // the infinite sum is exactly one; 4000 terms leave a negligible
        // tail for q <= 0.45 while 500 terms would not reach 1e-9 at the
        // upper end of that range
        for k in 1..=9u32 {
            let q = f64::from(k) * 0.05;
            let params = NetworkParams::unit(q, 0.0).unwrap();
            let mut sum = 0.0;
            let mut mean = 0.0;
            for n in 0..=4000u32 {
                let t = cycle_length_pmf(n, &params);
                sum += t;
                mean += f64::from(n) * t;
            }
            assert!((sum - 1.0).abs() < 1e-9, "q={q}: sum={sum}");
            let expected = params.p() * q / (params.p() - q);
            assert!((mean - expected).abs() < 1e-6, "q={q}: mean={mean}");
        }
    }
}

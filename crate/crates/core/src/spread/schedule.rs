use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational;
use crate::Rational;

/// Strictly decreasing levels `r_0 > r_1 > … > r_l = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSchedule {
    pub levels: Vec<usize>,
    pub l: usize,
}

impl LevelSchedule {
    /// A single level `[1]` is accepted and audits the window `[1, 1]`.
    pub fn new(levels: Vec<usize>) -> Result<Self> {
        if levels.last() != Some(&1) {
            return Err(Error::param(format!("schedule must end at 1: {levels:?}")));
        }
        if levels.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::param(format!("schedule must be strictly decreasing: {levels:?}")));
        }
        let l = levels.len() - 1;
        Ok(LevelSchedule { levels, l })
    }

    /// Windows `[r_i, r_{i−1}]` for `i = 1..=l`, or `[1, 1]` for a single level.
    pub fn windows(&self) -> Vec<(usize, usize)> {
        if self.l == 0 {
            return vec![(1, 1)];
        }
        self.levels.windows(2).map(|w| (w[1], w[0])).collect()
    }

    pub fn r0(&self) -> usize {
        self.levels[0]
    }
}

impl fmt::Display for LevelSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.levels.iter().map(|r| r.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for LevelSchedule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let levels = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::param(format!("bad schedule entry {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        LevelSchedule::new(levels)
    }
}

/// `l = max(2, ⌈10d/(9α)⌉)`, `r_0 = ⌈dn⌉`, `r_1 = ⌈εn/k⌉`,
/// `r_i = ⌈r_{i−1}/n^{9α/(10d)}⌉` for `2 ≤ i < l`, `r_l = 1`, with repeated
/// values merged.
pub fn level_schedule(n: usize, d: Rational, alpha: Rational, eps: Rational, k: usize) -> Result<LevelSchedule> {
    if n == 0 || k == 0 || d <= Rational::zero() || alpha <= Rational::zero() {
        return Err(Error::param("n, k, d and alpha must be positive"));
    }
    if eps <= Rational::zero() || eps >= Rational::one() {
        return Err(Error::param("eps must lie in (0, 1)"));
    }
    let ni = Rational::from_integer(n as i64);
    let ratio = Rational::from_integer(10) * d / (Rational::from_integer(9) * alpha);
    let l = (rational::ceil_u64(&ratio) as usize).max(2);
    let r0 = rational::ceil_u64(&(d * ni)) as usize;
    let r1 = rational::ceil_u64(&(eps * ni / Rational::from_integer(k as i64))) as usize;
    if r1 <= 1 {
        return Err(Error::param(format!(
            "schedule collapses: r_1 = ⌈εn/k⌉ = {r1}; n = {n} is too small for d = {}, alpha = {}, eps = {}, k = {k}",
            rational::render(&d),
            rational::render(&alpha),
            rational::render(&eps)
        )));
    }
    if r1 > r0 {
        return Err(Error::param(format!("r_1 = {r1} exceeds r_0 = {r0}")));
    }
    let exponent = rational::to_f64(&(Rational::from_integer(9) * alpha / (Rational::from_integer(10) * d)));
    let step = (n as f64).powf(exponent);
    let mut levels = vec![r0, r1];
    for _ in 2..l {
        let prev = *levels.last().unwrap() as f64;
        levels.push((prev / step).ceil().max(1.0) as usize);
    }
    levels.push(1);
    levels.dedup();
    LevelSchedule::new(levels)
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Sampler that produced a batch of draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Bm,
    Ou,
    Cmc,
    ApproxOu,
    Direct,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bm => "bm",
            Algorithm::Ou => "ou",
            Algorithm::Cmc => "cmc",
            Algorithm::ApproxOu => "approx_ou",
            Algorithm::Direct => "direct",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bm" => Ok(Algorithm::Bm),
            "ou" => Ok(Algorithm::Ou),
            "cmc" => Ok(Algorithm::Cmc),
            "approx_ou" | "approx-ou" => Ok(Algorithm::ApproxOu),
            "direct" => Ok(Algorithm::Direct),
            other => Err(format!(
                "unknown algorithm '{other}' (expected bm, ou, cmc, approx_ou or direct)"
            )),
        }
    }
}

/// Deterministic work counters, independent of hardware speed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkTally {
    pub factor_draws: u64,
    pub poisson_points: u64,
    pub layers_drawn: u64,
    pub bridge_proposals: u64,
}

impl WorkTally {
    pub fn merge(&mut self, other: &WorkTally) {
        self.factor_draws += other.factor_draws;
        self.poisson_points += other.poisson_points;
        self.layers_drawn += other.layers_drawn;
        self.bridge_proposals += other.bridge_proposals;
    }

    /// Total number of elementary random operations.
    pub fn total(&self) -> u64 {
        self.factor_draws + self.poisson_points + self.layers_drawn + self.bridge_proposals
    }
}

/// Counters for one sampling run.
///
/// Stage 1 is the cheap Gaussian gate (`rho`), stage 2 the path-space
/// event. Samplers without a stage leave its counters at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub samples: u64,
    pub stage1_attempts: u64,
    pub stage1_accepts: u64,
    pub stage2_attempts: u64,
    pub stage2_accepts: u64,
    pub poisson_points_total: u64,
    /// Draws where the Gaussian gate evaluated above one and was clamped.
    pub rho_clamped: u64,
    pub work: WorkTally,
    pub wall_clock_seconds: f64,
}

impl RunDiagnostics {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        RunDiagnostics {
            algorithm,
            seed,
            samples: 0,
            stage1_attempts: 0,
            stage1_accepts: 0,
            stage2_attempts: 0,
            stage2_accepts: 0,
            poisson_points_total: 0,
            rho_clamped: 0,
            work: WorkTally::default(),
            wall_clock_seconds: 0.0,
        }
    }

    /// Adds another run's counters. Wall-clock times add up, which is the
    /// total CPU time when the runs were executed in parallel.
    pub fn merge(&mut self, other: &RunDiagnostics) {
        self.samples += other.samples;
        self.stage1_attempts += other.stage1_attempts;
        self.stage1_accepts += other.stage1_accepts;
        self.stage2_attempts += other.stage2_attempts;
        self.stage2_accepts += other.stage2_accepts;
        self.poisson_points_total += other.poisson_points_total;
        self.rho_clamped += other.rho_clamped;
        self.work.merge(&other.work);
        self.wall_clock_seconds += other.wall_clock_seconds;
    }

    pub fn stage1_rate(&self) -> Option<f64> {
        rate(self.stage1_accepts, self.stage1_attempts)
    }

    pub fn stage2_rate(&self) -> Option<f64> {
        rate(self.stage2_accepts, self.stage2_attempts)
    }

    /// Proposals (stage-1 attempts) per accepted draw.
    pub fn attempts_per_sample(&self) -> Option<f64> {
        rate(self.stage1_attempts, self.samples)
    }

    /// Deterministic work units per accepted draw.
    pub fn work_per_sample(&self) -> Option<f64> {
        rate(self.work.total(), self.samples)
    }
}

fn rate(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_is_additive() {
        let mut a = RunDiagnostics::new(Algorithm::Bm, 1);
        a.stage1_attempts = 10;
        a.stage1_accepts = 4;
        a.stage2_attempts = 4;
        a.stage2_accepts = 1;
        a.samples = 1;
        let mut b = a.clone();
        b.stage2_accepts = 2;
        b.samples = 2;
        a.merge(&b);
        assert_eq!(a.stage1_rate(), Some(0.4));
        assert_eq!(a.stage2_rate(), Some(3.0 / 8.0));
        assert_eq!(a.attempts_per_sample(), Some(20.0 / 3.0));
    }

    #[test]
    fn empty_rates_are_undefined() {
        let d = RunDiagnostics::new(Algorithm::Cmc, 0);
        assert_eq!(d.stage2_rate(), None);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in [Algorithm::Bm, Algorithm::Ou, Algorithm::Cmc, Algorithm::ApproxOu, Algorithm::Direct] {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("nope".parse::<Algorithm>().is_err());
    }
}

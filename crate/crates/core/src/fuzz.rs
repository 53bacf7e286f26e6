//! Seeded fuzz campaigns over planted, perturbed and reflected pairs.
//!
//! Trial `i` of a campaign with seed `s` draws from `ChaCha8Rng` seeded with `s`
//! on stream `i`, so trials are independent of each other and of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::rigidity::{check_rigidity, recover_conjugator, RigidityOutcome, RigidityParams, RigidityVerdict};
use crate::sampling::{perturbed_pair, planted_pair, reflected_pair, SampledPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FuzzMode {
    Planted,
    Perturbed,
    Reflected,
}

impl std::str::FromStr for FuzzMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "planted" => Ok(FuzzMode::Planted),
            "perturbed" => Ok(FuzzMode::Perturbed),
            "reflected" => Ok(FuzzMode::Reflected),
            other => Err(format!("unknown fuzz mode `{other}` (planted, perturbed, reflected)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: u64,
    pub outcome: RigidityOutcome,
    /// Result kind of a direct conjugator solve on the raw pair (reflected mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct_solve: Option<String>,
    pub expectation_met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzReport {
    pub seed: u64,
    pub mode: FuzzMode,
    pub count: u64,
    pub certificates: u64,
    pub witnesses: u64,
    pub inconclusive: u64,
    pub expectations_met: u64,
    pub trials: Vec<TrialRecord>,
}

impl FuzzReport {
    pub fn all_met(&self) -> bool {
        self.expectations_met == self.count
    }
}

pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn sample_trial(seed: u64, index: u64, mode: FuzzMode) -> SampledPair {
    let mut rng = trial_rng(seed, index);
    match mode {
        FuzzMode::Planted => planted_pair(&mut rng),
        FuzzMode::Perturbed => perturbed_pair(&mut rng),
        FuzzMode::Reflected => reflected_pair(&mut rng),
    }
}

/// Expectations: planted pairs certify; perturbed pairs never certify; reflected
/// pairs never certify and the direct solve reports orientation reversal.
pub fn run_trial(seed: u64, index: u64, mode: FuzzMode, params: &RigidityParams) -> TrialRecord {
    let pair = sample_trial(seed, index, mode);
    let outcome = check_rigidity(&pair.rho1, &pair.rho2, params);
    let certified = outcome.verdict.is_certificate();
    let (direct_solve, expectation_met) = match mode {
        FuzzMode::Planted => (None, certified),
        FuzzMode::Perturbed => (None, !certified),
        FuzzMode::Reflected => {
            let kind = match recover_conjugator(&pair.rho1, &pair.rho2, params.tol) {
                Ok(_) => "ok",
                Err(e) => e.kind(),
            };
            (Some(kind.to_string()), !certified && kind == "orientation_reversing")
        }
    };
    TrialRecord {
        index,
        outcome,
        direct_solve,
        expectation_met,
    }
}

pub fn run_fuzz(seed: u64, count: u64, mode: FuzzMode, params: &RigidityParams) -> FuzzReport {
    let trials: Vec<TrialRecord> = params
        .execution
        .map_range(count as usize, |i| run_trial(seed, i as u64, mode, params));
    let tally = |f: fn(&RigidityVerdict) -> bool| trials.iter().filter(|t| f(&t.outcome.verdict)).count() as u64;
    FuzzReport {
        seed,
        mode,
        count,
        certificates: tally(|v| matches!(v, RigidityVerdict::Certificate { .. })),
        witnesses: tally(|v| matches!(v, RigidityVerdict::Witness { .. })),
        inconclusive: tally(|v| matches!(v, RigidityVerdict::Inconclusive { .. })),
        expectations_met: trials.iter().filter(|t| t.expectation_met).count() as u64,
        trials,
    }
}

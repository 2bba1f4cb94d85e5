use serde::Serialize;

use crate::algorithms::Trajectory;
use crate::error::{HardError, Result};
use crate::hard1d::HardProfile;
use crate::intervals::BitString;
use crate::scalar::Real;

/// `Z_0 = 0` and `Z_t` = deepest prefix `l` such that some `x_s`, `s ≤ t`,
/// lies in `I_{σ1…σl}`, read off the last coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProgressProcess {
    pub z: Vec<usize>,
}

impl ProgressProcess {
    pub fn from_depths(depths: impl IntoIterator<Item = usize>) -> Self {
        let mut z = vec![0];
        let mut cur = 0;
        for l in depths {
            cur = cur.max(l);
            z.push(cur);
        }
        ProgressProcess { z }
    }

    /// `Z_t − Z_{t−1}` for `t = 1..=T`.
    pub fn jumps(&self) -> Vec<usize> {
        self.z.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn last(&self) -> usize {
        *self.z.last().unwrap()
    }

    pub fn is_monotone_bounded(&self, n: usize) -> bool {
        self.z[0] == 0 && self.z.windows(2).all(|w| w[0] <= w[1]) && self.last() <= n
    }
}

/// Progress of a trajectory against the profile it was run on.
///
/// `sigma` must be the bit string the profile was built from.
pub fn progress_process<S: Real>(
    trajectory: &Trajectory<S>,
    profile: &HardProfile<S>,
    sigma: &BitString,
) -> Result<ProgressProcess> {
    if profile.sigma() != sigma {
        return Err(HardError::SigmaMismatch { expected: profile.depth(), got: sigma.len() });
    }
    Ok(ProgressProcess::from_depths(
        trajectory.iterates.iter().map(|x| profile.locate(*x.last().expect("non-empty iterate"))),
    ))
}

use serde::{Deserialize, Serialize};

/// Exploration rate per episode: linear from `start` to `knee` over the first
/// `linear_until` episodes, then geometric decay reaching `end` at
/// `total_episodes`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub knee: f64,
    pub end: f64,
    pub linear_until: usize,
    pub total_episodes: usize,
}

impl EpsilonSchedule {
    /// `1.0 → 0.1` linearly over the first half, `0.1 → 0.01` geometrically
    /// over the second.
    pub fn new(total_episodes: usize) -> Self {
        EpsilonSchedule {
            start: 1.0,
            knee: 0.1,
            end: 0.01,
            linear_until: (total_episodes / 2).max(1),
            total_episodes,
        }
    }

    pub fn epsilon_at(&self, episode: usize) -> f64 {
        let (m, l) = (self.total_episodes, self.linear_until.min(self.total_episodes));
        let eps = if episode >= m {
            self.end
        } else if episode < l {
            self.start - (self.start - self.knee) * episode as f64 / l as f64
        } else {
            let frac = (episode - l) as f64 / (m - l) as f64;
            self.knee * (self.end / self.knee).powf(frac)
        };
        eps.clamp(self.end, self.start)
    }
}

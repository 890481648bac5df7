//! Gaussian Thompson sampling with count-decaying variance, sliding-window
//! reward aggregation over piecewise-constant signals, and regret tracking.
//!
//! Each arm holds a posterior `N(mean, 1/(pulls+1))`, so a fresh arm is
//! `N(0, 1)`. One activation draws one sample per arm and plays the argmax.
//! The reward fed into an update is the time-weighted mean of the arm's
//! observed signal over a trailing window: each recorded sample holds its
//! value until the next sample (or until the observation is closed, e.g. the
//! observer went idle).

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::StandardNormal;

/// Posterior state of one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmPosterior {
    /// Estimated reward.
    pub mean: f64,
    /// Completed updates.
    pub pulls: u64,
}

impl ArmPosterior {
    pub fn new() -> Self {
        Self {
            mean: 0.0,
            pulls: 0,
        }
    }

    /// Sampling variance: decays as 1/(pulls + 1).
    pub fn variance(&self) -> f64 {
        1.0 / (self.pulls as f64 + 1.0)
    }

    /// Incremental mean update `mean ← (mean·n + r)/(n + 2); n ← n + 1`.
    pub fn update(&mut self, reward: f64) {
        let n = self.pulls as f64;
        self.mean = (self.mean * n + reward) / (n + 2.0);
        self.pulls += 1;
    }
}

impl Default for ArmPosterior {
    fn default() -> Self {
        Self::new()
    }
}

/// Thompson sampler over a fixed arm set.
#[derive(Debug, Clone)]
pub struct ThompsonSampler {
    pub arms: Vec<ArmPosterior>,
}

impl ThompsonSampler {
    pub fn new(n_arms: usize) -> Self {
        Self {
            arms: vec![ArmPosterior::new(); n_arms],
        }
    }

    /// Draws one posterior sample per arm and returns the argmax
    /// (ties resolve to the lowest index).
    pub fn select_arm(&self, rng: &mut impl Rng) -> usize {
        let thetas = self.arms.iter().map(|arm| {
            let z: f64 = rng.sample(StandardNormal);
            arm.mean + arm.variance().sqrt() * z
        });
        argmax_lowest(thetas)
    }

    pub fn update(&mut self, arm: usize, reward: f64) {
        self.arms[arm].update(reward);
    }
}

/// Index of the maximum, lowest index on ties.
pub(crate) fn argmax_lowest(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    t0: f64,
    t1: f64,
    value: f64,
}

/// Piecewise-constant observed signal of one arm, pruned to a trailing
/// window. Closed segments keep running integrals so a windowed mean costs
/// O(evictions) amortized even at high sample rates.
#[derive(Debug, Clone, Default)]
pub struct ArmSignal {
    segments: VecDeque<Segment>,
    /// Sample still holding its value: (start time, value).
    open: Option<(f64, f64)>,
    sum_vdt: f64,
    sum_dt: f64,
}

impl ArmSignal {
    /// Appends a sample at `t`; it holds until the next sample or close.
    pub fn record(&mut self, t: f64, value: f64) {
        if let Some((t0, v0)) = self.open.take() {
            self.push_closed(t0, t, v0);
        }
        self.open = Some((t, value));
    }

    /// Ends the current sample's holding period.
    pub fn close(&mut self, t: f64) {
        if let Some((t0, v0)) = self.open.take() {
            self.push_closed(t0, t, v0);
        }
    }

    fn push_closed(&mut self, t0: f64, t1: f64, value: f64) {
        debug_assert!(t1 >= t0, "signal time went backwards: {t0} -> {t1}");
        if t1 > t0 {
            self.segments.push_back(Segment { t0, t1, value });
            self.sum_vdt += value * (t1 - t0);
            self.sum_dt += t1 - t0;
        }
    }

    /// Drops segments that end at or before `cutoff`.
    fn evict(&mut self, cutoff: f64) {
        while let Some(front) = self.segments.front() {
            if front.t1 > cutoff {
                break;
            }
            self.sum_vdt -= front.value * (front.t1 - front.t0);
            self.sum_dt -= front.t1 - front.t0;
            self.segments.pop_front();
        }
        if self.segments.is_empty() {
            // Reset the running integrals so float residue cannot accumulate
            // across long idle stretches.
            self.sum_vdt = 0.0;
            self.sum_dt = 0.0;
        }
    }

    /// Folds every sample whose holding period overlaps [now − window, now]
    /// into a fresh posterior (one [`ArmPosterior::update`] per sample), or
    /// None when the signal does not overlap the window at all. The Some/None
    /// condition matches [`Self::windowed_mean`] exactly.
    pub fn windowed_posterior(&mut self, now: f64, window: f64) -> Option<ArmPosterior> {
        self.evict(now - window);
        if self.segments.is_empty() && self.open.is_none() {
            return None;
        }
        let mut posterior = ArmPosterior::new();
        for seg in &self.segments {
            posterior.update(seg.value);
        }
        if let Some((_, value)) = self.open {
            posterior.update(value);
        }
        Some(posterior)
    }

    /// Time-weighted mean over [now − window, now], or None when the signal
    /// does not overlap the window at all.
    pub fn windowed_mean(&mut self, now: f64, window: f64) -> Option<f64> {
        let start = now - window;
        self.evict(start);
        let mut vdt = self.sum_vdt;
        let mut dt = self.sum_dt;
        // Only the oldest kept segment can straddle the window start.
        if let Some(front) = self.segments.front() {
            if front.t0 < start {
                let excess = start - front.t0;
                vdt -= front.value * excess;
                dt -= excess;
            }
        }
        if let Some((t0, value)) = self.open {
            let from = t0.max(start);
            if now > from {
                vdt += value * (now - from);
                dt += now - from;
            } else if dt <= 0.0 && t0 >= start && t0 <= now {
                // A sample recorded exactly at `now` with nothing else in the
                // window: a point observation, its value stands alone.
                return Some(value);
            }
        }
        if dt > 0.0 {
            Some(vdt / dt)
        } else {
            None
        }
    }
}

/// Per-arm sliding-window reward histories of one agent.
#[derive(Debug, Clone)]
pub struct SlidingWindowHistory {
    pub window_s: f64,
    arms: Vec<ArmSignal>,
}

impl SlidingWindowHistory {
    pub fn new(n_arms: usize, window_s: f64) -> Self {
        Self {
            window_s,
            arms: vec![ArmSignal::default(); n_arms],
        }
    }

    /// Appends a sample for `arm`; it holds until the next sample or close.
    pub fn record(&mut self, arm: usize, t: f64, value: f64) {
        self.arms[arm].record(t, value);
    }

    /// Ends the holding period of `arm`'s current sample (observer stopped
    /// observing: idle station, or the arm is being left).
    pub fn close(&mut self, arm: usize, t: f64) {
        self.arms[arm].close(t);
    }

    /// Time-weighted mean of `arm`'s signal over [now − window, now].
    pub fn windowed_reward(&mut self, arm: usize, now: f64) -> Option<f64> {
        let window = self.window_s;
        self.arms[arm].windowed_mean(now, window)
    }

    /// Posterior folded from `arm`'s samples overlapping [now − window, now];
    /// None exactly when [`Self::windowed_reward`] is None.
    pub fn windowed_posterior(&mut self, arm: usize, now: f64) -> Option<ArmPosterior> {
        let window = self.window_s;
        self.arms[arm].windowed_posterior(now, window)
    }

    /// Drops data that can no longer enter any future window.
    pub fn prune(&mut self, now: f64) {
        let cutoff = now - self.window_s;
        for arm in &mut self.arms {
            arm.evict(cutoff);
        }
    }

    #[doc(hidden)]
    pub fn segment_count(&self) -> usize {
        self.arms.iter().map(|a| a.segments.len()).sum()
    }
}

/// Cumulative regret against a known per-round optimum.
#[derive(Debug, Clone, Copy, Default)]
pub struct RegretLedger {
    pub cumulative: f64,
    pub rounds: u64,
}

impl RegretLedger {
    pub fn record(&mut self, optimal_reward: f64, actual_reward: f64) {
        self.cumulative += optimal_reward - actual_reward;
        self.rounds += 1;
    }
}

//! Randomized property checks over the public API: radio-math
//! monotonicity, airtime quantization, posterior closed forms, windowed
//! signals staying inside their sample hull, and order-invariant statistics.

use airmab::bandit::{ArmPosterior, ArmSignal, ThompsonSampler};
use airmab::report::BoxStats;
use airmab::{medium, phy, report, AirtimeParams, McsTable, PhyConstants};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    /// Farther receivers never see less path loss, and received power
    /// never rises with distance.
    #[test]
    fn path_loss_monotone_nondecreasing_in_distance(
        d1 in 0.1f64..200.0,
        d2 in 0.1f64..200.0,
        fc in 5.17f64..5.23,
    ) {
        let pl = airmab::PathLossParams::default();
        let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(phy::path_loss_db(&pl, near, fc) <= phy::path_loss_db(&pl, far, fc) + 1e-12);
        let p_near = phy::received_power_dbm(15.0, &pl, near, fc);
        let p_far = phy::received_power_dbm(15.0, &pl, far, fc);
        prop_assert!(p_near + 1e-12 >= p_far);
    }

    /// A better signal never selects a lower rate.
    #[test]
    fn mcs_index_monotone_in_rssi(r1 in -90.0f64..-40.0, r2 in -90.0f64..-40.0) {
        let table = McsTable::default_he20();
        let (weak, strong) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        if let Ok(lo) = table.select(weak) {
            let hi = table.select(strong).expect("stronger RSSI stays selectable");
            prop_assert!(hi.index >= lo.index);
        }
    }

    /// Every frame duration is positive and a faster data rate never
    /// lengthens the exchange.
    #[test]
    fn frame_times_positive_and_weakly_decreasing_in_rate(
        b1 in 24.0f64..1960.0,
        b2 in 24.0f64..1960.0,
    ) {
        let phy_c = PhyConstants::default();
        let (slow, fast) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let ft_slow = phy::frame_times(&phy_c, slow);
        let ft_fast = phy::frame_times(&phy_c, fast);
        for t in [ft_fast.rts_s, ft_fast.cts_s, ft_fast.data_s, ft_fast.ack_s, ft_fast.success_s] {
            prop_assert!(t > 0.0);
        }
        prop_assert!(ft_fast.success_s <= ft_slow.success_s + 1e-15);
    }

    /// Airtime comes in whole frames: the requirement is an integer
    /// multiple of the single-frame cost, with the multiplier equal to the
    /// frame count the demand needs.
    #[test]
    fn airtime_quantized_to_whole_frames(demand in 1.0f64..1e8, ts_us in 100.0f64..9000.0) {
        let phy_c = PhyConstants::default();
        let params = AirtimeParams::default();
        let t_s = ts_us * 1e-6;
        let one = medium::airtime_requirement(12_000.0, &phy_c, &params, t_s);
        let u = medium::airtime_requirement(demand, &phy_c, &params, t_s);
        let frames = u / one;
        prop_assert!((frames - frames.round()).abs() < 1e-9);
        prop_assert!((frames.round() - (demand / 12_000.0).ceil()).abs() < 0.5);
    }

    /// Full service exactly while the channel is not saturated; strictly
    /// degrading beyond; and below saturation the channel reward is the
    /// complement of the load.
    #[test]
    fn satisfaction_and_reward_track_the_load(l1 in 0.0f64..5.0, l2 in 0.0f64..5.0) {
        for load in [l1, l2] {
            prop_assert_eq!(medium::satisfaction(load) == 1.0, load <= 1.0);
            if load <= 1.0 {
                prop_assert!((medium::channel_reward(load) + load - 1.0).abs() < 1e-12);
            } else {
                prop_assert_eq!(medium::channel_reward(load), 0.0);
            }
        }
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        if lo > 1.0 && hi > lo {
            prop_assert!(medium::satisfaction(hi) < medium::satisfaction(lo));
        }
    }

    /// The incremental posterior update equals its closed form
    /// Σ k·r_k / (n(n+1)) after any reward sequence, the variance is
    /// exactly 1/(n+1), and rewards in [0, 1] keep the mean in [0, 1].
    #[test]
    fn posterior_recurrence_matches_closed_form(rewards in prop::collection::vec(0.0f64..=1.0, 1..60)) {
        let mut p = ArmPosterior::new();
        for &r in &rewards {
            p.update(r);
        }
        let n = rewards.len() as f64;
        let weighted: f64 = rewards
            .iter()
            .enumerate()
            .map(|(i, &r)| (i + 1) as f64 * r)
            .sum();
        prop_assert!((p.mean - weighted / (n * (n + 1.0))).abs() < 1e-12);
        prop_assert_eq!(p.variance(), 1.0 / (n + 1.0));
        prop_assert!((0.0..=1.0).contains(&p.mean));
    }

    /// Arm selection always returns a valid index.
    #[test]
    fn selected_arm_is_always_in_range(
        n_arms in 1usize..8,
        pulls in prop::collection::vec((0u8..100, 0.0f64..=1.0), 0..20),
        seed in any::<u64>(),
    ) {
        let mut sampler = ThompsonSampler::new(n_arms);
        for (arm, reward) in pulls {
            sampler.update(arm as usize % n_arms, reward);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(sampler.select_arm(&mut rng) < n_arms);
    }

    /// Windowed queries never leave the hull of the in-window sample
    /// values: the time-weighted mean lies inside it, and the rebuilt
    /// posterior folds exactly the in-window samples (its mean is half
    /// their weighted average, so twice the mean lies in the hull).
    #[test]
    fn windowed_queries_stay_in_the_sample_hull(
        steps in prop::collection::vec((0.01f64..50.0, 0.0f64..=1.0), 1..40),
        window in 1.0f64..400.0,
        close_last in any::<bool>(),
    ) {
        let mut signal = ArmSignal::default();
        let mut t = 0.0;
        let mut samples = Vec::new(); // (start, value); holds until next start or `now`
        for &(dt, v) in &steps {
            signal.record(t, v);
            samples.push((t, v));
            t += dt;
        }
        let now = t;
        if close_last {
            signal.close(now);
        }
        let cutoff = now - window;
        let hull: Vec<f64> = samples
            .iter()
            .zip(samples.iter().map(|&(s, _)| s).skip(1).chain([now]))
            .filter(|&(&(_, _), end)| end > cutoff)
            .map(|(&(_, v), _)| v)
            .collect();

        let mean = signal.clone().windowed_mean(now, window);
        let posterior = signal.windowed_posterior(now, window);
        prop_assert_eq!(mean.is_some(), posterior.is_some());
        if let (Some(m), Some(p)) = (mean, posterior) {
            let lo = hull.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = hull.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(m >= lo - 1e-9 && m <= hi + 1e-9, "mean {m} outside [{lo}, {hi}]");
            prop_assert_eq!(p.pulls as usize, hull.len());
            let folded_avg = 2.0 * p.mean;
            prop_assert!(
                folded_avg >= lo - 1e-9 && folded_avg <= hi + 1e-9,
                "posterior fold {folded_avg} outside [{lo}, {hi}]"
            );
        }
    }

    /// Box summaries and quantiles do not depend on sample order, and
    /// quantiles stay inside the sample range.
    #[test]
    fn box_stats_are_order_invariant(
        values in prop::collection::vec(-1e3f64..1e3, 1..50).prop_shuffle(),
        q in 0.0f64..=1.0,
    ) {
        let mut sorted = values.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        prop_assert_eq!(BoxStats::from_samples(&values), BoxStats::from_samples(&sorted));
        let quant = report::quantile(&values, q);
        prop_assert!(quant >= sorted[0] && quant <= sorted[sorted.len() - 1]);
    }
}

//! Discrete-event simulation driver.
//!
//! Loads are piecewise constant between events, so the engine only has to
//! process flow starts/ends, agent activations, forced reconfigurations,
//! and metrics samples. Simultaneous events follow a fixed order — flow
//! ends, flow starts, forced reconfigurations, agent activations, metrics —
//! then node id, then insertion order, which makes every run a pure
//! function of (scenario, config, mode).

pub mod experiments;
pub mod scenario;
pub(crate) mod seeds;

use std::cmp::Ordering;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{station_action_set, Agent, AgentKind};
use crate::bandit::ArmSignal;
use crate::config::{AgentSelection, SimConfig};
use crate::medium;
use crate::network::Network;
use crate::report;
use crate::traffic::TrafficSource;
use crate::{Error, Result};
use scenario::{generate_scenario, Scenario};

/// Trailing window of the per-station satisfaction metric. Fixed rather
/// than tied to the agents' reward window, so runs with different agent
/// windows stay comparable on the same metric.
pub const METRICS_TRAIL_S: f64 = 540.0;

/// How long the median satisfaction must stay above the threshold before a
/// run counts as converged.
pub const CONVERGENCE_PERSIST_S: f64 = 3600.0;

/// Tolerance of the incremental-vs-fresh load audit.
pub const AUDIT_TOL: f64 = 1e-9;

/// Whether agents drive the network or the initial configuration is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Static,
    Adaptive,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Static => "static",
            Mode::Adaptive => "adaptive",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Mode::Static),
            "adaptive" => Ok(Mode::Adaptive),
            other => Err(Error::Config(format!(
                "unknown mode {other:?}; expected \"static\" or \"adaptive\""
            ))),
        }
    }
}

/// What caused a reconfiguration in the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    /// Channel-allocation agent decision (node = AP id, values = channels).
    Dca,
    /// AP-selection agent decision (node = station id, values = AP ids).
    Daps,
    /// Scheduled forced reconfiguration (node = AP id, values = channels).
    Forced,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Dca => "dca",
            TraceKind::Daps => "daps",
            TraceKind::Forced => "forced",
        }
    }
}

/// One applied reconfiguration. Agent rows appear only for actual changes;
/// forced rows appear even when the channel stays the same.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub time_s: f64,
    pub kind: TraceKind,
    pub node: usize,
    pub from: usize,
    pub to: usize,
}

/// Everything a single run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub mode: Mode,
    pub t_sim_s: f64,
    /// Metrics sampling instants.
    pub grid_s: Vec<f64>,
    /// Effective load per AP at each grid instant.
    pub ap_load: Vec<Vec<f64>>,
    /// Trailing-window mean satisfaction per station at each grid instant
    /// (1.0 where the station was idle throughout the window).
    pub sta_sat_trail: Vec<Vec<f64>>,
    /// Across-station median of the trailing satisfaction.
    pub sat_median_trail: Vec<f64>,
    /// ∫ satisfaction over station-active time, per hour.
    pub hourly_sat_time: Vec<f64>,
    /// Station-active seconds per hour.
    pub hourly_active_time: Vec<f64>,
    pub offered_bits: f64,
    pub served_bits: f64,
    /// Time-weighted mean satisfaction pooled over station-active time.
    pub mean_satisfaction: f64,
    pub agg_throughput_bps: f64,
    pub drop_ratio: f64,
    pub convergence_time_s: Option<f64>,
    pub agent_trace: Vec<TraceRow>,
    pub initial_channels: Vec<u16>,
    pub final_channels: Vec<u16>,
    pub events_processed: u64,
}

impl RunResult {
    /// Channel of every AP at time `t`, reconstructed from the trace.
    pub fn channels_at(&self, t: f64) -> Vec<u16> {
        let mut channels = self.initial_channels.clone();
        for row in &self.agent_trace {
            if row.time_s > t {
                break;
            }
            if matches!(row.kind, TraceKind::Dca | TraceKind::Forced) {
                channels[row.node] = row.to as u16;
            }
        }
        channels
    }

    /// Pooled mean satisfaction over the last `hours` full hours.
    pub fn mean_satisfaction_final_hours(&self, hours: usize) -> f64 {
        let total = (self.t_sim_s / 3600.0).ceil() as usize;
        let lo = total.saturating_sub(hours);
        let sat: f64 = self.hourly_sat_time[lo..].iter().sum();
        let active: f64 = self.hourly_active_time[lo..].iter().sum();
        if active > 0.0 {
            sat / active
        } else {
            1.0
        }
    }
}

/// One line of a batch summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchRow {
    pub scenario_seed: u64,
    pub mode: Mode,
    pub mean_satisfaction: f64,
    pub agg_throughput_mbps: f64,
    pub drop_ratio: f64,
    pub convergence_time_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EventKind {
    FlowEnd { station: usize },
    FlowStart { station: usize },
    Forced { index: usize },
    Activation { node: usize },
    Metrics,
}

/// Heap entry. Ties break on kind rank (ends before starts before forced
/// before activations before metrics), then global node id, then insertion
/// order.
#[derive(Debug, Clone, Copy)]
struct Event {
    t: f64,
    rank: u8,
    node: usize,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.t
            .total_cmp(&other.t)
            .then_with(|| self.rank.cmp(&other.rank))
            .then_with(|| self.node.cmp(&other.node))
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

struct Sim<'a> {
    cfg: &'a SimConfig,
    net: Network,
    traffic: Vec<TrafficSource>,
    /// Scheduled end of each station's active flow (∞ when idle). Ends
    /// beyond the horizon stay here so deferral still sees them.
    flow_end_s: Vec<f64>,
    ap_agents: Vec<Option<Agent>>,
    sta_agents: Vec<Option<Agent>>,
    /// Per-station satisfaction signal feeding the trailing metric.
    sat_signals: Vec<ArmSignal>,
    heap: BinaryHeap<Reverse<Event>>,
    seq: u64,
    trace: Vec<TraceRow>,
    grid_s: Vec<f64>,
    ap_load: Vec<Vec<f64>>,
    sta_sat_trail: Vec<Vec<f64>>,
    sat_median_trail: Vec<f64>,
    /// Scratch buffer for the affected-AP lists of network mutations.
    affected: Vec<usize>,
    scratch_sats: Vec<f64>,
    events_processed: u64,
    audit_every: u64,
}

impl Sim<'_> {
    fn push(&mut self, t: f64, kind: EventKind) {
        if t > self.cfg.t_sim {
            return;
        }
        let (rank, node) = match kind {
            EventKind::FlowEnd { station } => (0, self.net.n_aps() + station),
            EventKind::FlowStart { station } => (1, self.net.n_aps() + station),
            EventKind::Forced { index } => (2, self.cfg.forced_reconfigs[index].ap),
            EventKind::Activation { node } => (3, node),
            EventKind::Metrics => (4, 0),
        };
        self.seq += 1;
        self.heap.push(Reverse(Event {
            t,
            rank,
            node,
            seq: self.seq,
            kind,
        }));
    }

    /// Records fresh reward/satisfaction samples after loads changed:
    /// channel reward for each affected AP's agent, satisfaction for every
    /// station with an active flow at an affected AP.
    fn record_load_samples(&mut self, now: f64, affected: &[usize]) {
        for &a in affected {
            let eff = self.net.aps[a].effective_load;
            let sat = medium::satisfaction(eff);
            if let Some(agent) = self.ap_agents[a].as_mut() {
                agent.observe(now, medium::channel_reward(eff));
            }
            for k in 0..self.net.aps[a].flows.len() {
                let station = self.net.aps[a].flows[k].station;
                self.sat_signals[station].record(now, sat);
                if let Some(agent) = self.sta_agents[station].as_mut() {
                    agent.observe(now, sat);
                }
            }
        }
    }

    fn handle_flow_start(&mut self, t: f64, station: usize) -> Result<()> {
        let demand = self.traffic[station].next_demand_bps();
        let duration = self.traffic[station].next_on_s();
        let mut affected = std::mem::take(&mut self.affected);
        let result = self.net.start_flow(t, station, demand, &mut affected);
        if result.is_ok() {
            self.flow_end_s[station] = t + duration;
            self.push(t + duration, EventKind::FlowEnd { station });
            self.record_load_samples(t, &affected);
        }
        self.affected = affected;
        result
    }

    fn handle_flow_end(&mut self, t: f64, station: usize) {
        // Close the station's observation holds at the pre-change value.
        self.sat_signals[station].close(t);
        if let Some(agent) = self.sta_agents[station].as_mut() {
            agent.stop_observing(t);
        }
        let mut affected = std::mem::take(&mut self.affected);
        self.net.end_flow(t, station, &mut affected);
        self.flow_end_s[station] = f64::INFINITY;
        let gap = self.traffic[station].next_off_s();
        self.push(t + gap, EventKind::FlowStart { station });
        self.record_load_samples(t, &affected);
        self.affected = affected;
    }

    fn handle_forced(&mut self, t: f64, index: usize) -> Result<()> {
        let fr = self.cfg.forced_reconfigs[index];
        if fr.ap >= self.net.n_aps() {
            return Err(Error::Config(format!(
                "forced reconfiguration targets unknown AP {}",
                fr.ap
            )));
        }
        let to_idx = self
            .net
            .channels
            .iter()
            .position(|&c| c == fr.channel)
            .ok_or_else(|| {
                Error::Config(format!(
                    "forced reconfiguration targets channel {} outside the scenario's list",
                    fr.channel
                ))
            })?;
        let from_ch = self.net.channel_of(fr.ap) as usize;
        let mut affected = std::mem::take(&mut self.affected);
        let result = self.net.switch_channel(t, fr.ap, to_idx, &mut affected);
        if result.is_ok() {
            if let Some(agent) = self.ap_agents[fr.ap].as_mut() {
                agent.force_value(to_idx, t);
            }
            // Forced rows are logged even when nothing changes.
            self.trace.push(TraceRow {
                time_s: t,
                kind: TraceKind::Forced,
                node: fr.ap,
                from: from_ch,
                to: fr.channel as usize,
            });
            self.record_load_samples(t, &affected);
        }
        self.affected = affected;
        result
    }

    fn handle_activation(&mut self, t: f64, node: usize) -> Result<()> {
        let n_aps = self.net.n_aps();
        let is_ap = node < n_aps;
        let armed = if is_ap {
            self.ap_agents[node].as_ref().map(|a| a.next_activation_s)
        } else {
            self.sta_agents[node - n_aps]
                .as_ref()
                .map(|a| a.next_activation_s)
        };
        let Some(armed_t) = armed else {
            return Ok(());
        };
        if armed_t != t {
            // Superseded by a reschedule.
            return Ok(());
        }

        // Zero-downtime rule: never reconfigure under an active flow; wait
        // for the last one to end and re-check then (new flows may have
        // started in the meantime).
        let defer_to = if is_ap {
            let flows = &self.net.aps[node].flows;
            if flows.is_empty() {
                None
            } else {
                Some(
                    flows
                        .iter()
                        .map(|f| self.flow_end_s[f.station])
                        .fold(f64::NEG_INFINITY, f64::max),
                )
            }
        } else {
            let s = node - n_aps;
            self.net.stations[s].is_active().then(|| self.flow_end_s[s])
        };
        if let Some(target) = defer_to {
            debug_assert!(target > t, "deferral target {target} not after {t}");
            let agent = if is_ap {
                self.ap_agents[node].as_mut()
            } else {
                self.sta_agents[node - n_aps].as_mut()
            }
            .expect("armed agent exists");
            agent.next_activation_s = target;
            self.push(target, EventKind::Activation { node });
            return Ok(());
        }

        let agent = if is_ap {
            self.ap_agents[node].as_mut()
        } else {
            self.sta_agents[node - n_aps].as_mut()
        }
        .expect("armed agent exists");
        let kind = agent.kind;
        let decision = agent.on_activation(t);
        let next = agent.next_activation_s;
        self.push(next, EventKind::Activation { node });
        if !decision.reconfigured() {
            return Ok(());
        }
        match kind {
            AgentKind::ChannelAllocation => {
                let from_ch = self.net.channel_of(node) as usize;
                let mut affected = std::mem::take(&mut self.affected);
                let result = self
                    .net
                    .switch_channel(t, node, decision.to_value, &mut affected);
                if result.is_ok() {
                    self.trace.push(TraceRow {
                        time_s: t,
                        kind: TraceKind::Dca,
                        node,
                        from: from_ch,
                        to: self.net.channels[decision.to_value] as usize,
                    });
                    self.record_load_samples(t, &affected);
                }
                self.affected = affected;
                result
            }
            AgentKind::ApSelection => {
                let station = node - n_aps;
                let from_ap = self.net.stations[station].serving_ap;
                let mut affected = std::mem::take(&mut self.affected);
                let result = self
                    .net
                    .reassociate(t, station, decision.to_value, &mut affected);
                if result.is_ok() {
                    self.trace.push(TraceRow {
                        time_s: t,
                        kind: TraceKind::Daps,
                        node: station,
                        from: from_ap,
                        to: decision.to_value,
                    });
                    // The station is idle (deferral), so no load moved and
                    // `affected` is empty; nothing to record.
                    self.record_load_samples(t, &affected);
                }
                self.affected = affected;
                result
            }
        }
    }

    fn handle_metrics(&mut self, t: f64) {
        self.grid_s.push(t);
        for a in 0..self.net.n_aps() {
            let eff = self.net.aps[a].effective_load;
            self.ap_load[a].push(eff);
        }
        self.scratch_sats.clear();
        for s in 0..self.net.n_stations() {
            let v = self.sat_signals[s]
                .windowed_mean(t, METRICS_TRAIL_S)
                .unwrap_or(1.0);
            self.sta_sat_trail[s].push(v);
            self.scratch_sats.push(v);
        }
        let median = if self.scratch_sats.is_empty() {
            1.0
        } else {
            self.scratch_sats.sort_unstable_by(f64::total_cmp);
            report::quantile_sorted(&self.scratch_sats, 0.5)
        };
        self.sat_median_trail.push(median);

        let next = t + self.cfg.metrics_interval;
        if next <= self.cfg.t_sim {
            self.push(next, EventKind::Metrics);
        } else if t < self.cfg.t_sim {
            // Off-grid horizon: close the series with a final sample.
            self.push(self.cfg.t_sim, EventKind::Metrics);
        }
    }
}

/// Simulates `scenario` under `cfg`. `Mode::Static` disables all agents so
/// the initial configuration persists (forced reconfigurations, modeling
/// environment changes, still apply); `Mode::Adaptive` runs the agent kinds
/// selected in the config. Identical inputs give identical results, and the
/// traffic realization depends only on the scenario seed, so paired
/// static/adaptive runs see the very same flows.
pub fn run(scenario: &Scenario, cfg: &SimConfig, mode: Mode) -> Result<RunResult> {
    cfg.validate()?;
    let net = Network::new(scenario, cfg)?;
    let n_aps = net.n_aps();
    let n_sta = net.n_stations();
    let enabled = match mode {
        Mode::Static => AgentSelection::None,
        Mode::Adaptive => cfg.agents_enabled,
    };

    let params = cfg.traffic_params();
    let traffic: Vec<TrafficSource> = (0..n_sta)
        .map(|s| {
            TrafficSource::new(
                &params,
                seeds::stream_rng(scenario.seed, seeds::STREAM_TRAFFIC, s as u64),
            )
        })
        .collect::<Result<_>>()?;

    let mut ap_agents: Vec<Option<Agent>> = (0..n_aps)
        .map(|a| {
            if enabled.dca() && net.channels.len() >= 2 && !cfg.dca_disabled_aps.contains(&a) {
                Some(Agent::new(
                    AgentKind::ChannelAllocation,
                    a,
                    (0..net.channels.len()).collect(),
                    net.aps[a].channel_idx,
                    cfg.t_sw,
                    cfg.t_dca,
                    cfg.agent_enable_time + cfg.t_dca,
                    cfg.posterior_memory,
                    seeds::stream_rng(scenario.seed, seeds::STREAM_AGENT, a as u64),
                ))
            } else {
                None
            }
        })
        .collect();
    let sta_agents: Vec<Option<Agent>> = (0..n_sta)
        .map(|s| {
            if !enabled.daps() || cfg.daps_disabled_stations.contains(&s) {
                return None;
            }
            // Action sets are built once, from the initial channels.
            let rssi: Vec<f64> = (0..n_aps).map(|a| net.station_rssi_current(s, a)).collect();
            let set = station_action_set(&rssi, cfg.rssi_th_dbm, cfg.cca_dbm);
            if set.len() < 2 {
                // Nothing to choose between.
                return None;
            }
            Some(Agent::new(
                AgentKind::ApSelection,
                s,
                set,
                net.stations[s].serving_ap,
                cfg.t_sw,
                cfg.t_daps,
                cfg.agent_enable_time + cfg.t_daps,
                cfg.posterior_memory,
                seeds::stream_rng(scenario.seed, seeds::STREAM_AGENT, (n_aps + s) as u64),
            ))
        })
        .collect();
    // Channel reward is defined at every instant for an AP, starting now.
    for (a, slot) in ap_agents.iter_mut().enumerate() {
        if let Some(agent) = slot.as_mut() {
            agent.observe(0.0, medium::channel_reward(net.aps[a].effective_load));
        }
    }

    let audit_every = cfg
        .audit_every
        .unwrap_or(if cfg!(debug_assertions) { 1000 } else { 0 });

    let mut sim = Sim {
        cfg,
        net,
        traffic,
        flow_end_s: vec![f64::INFINITY; n_sta],
        ap_agents,
        sta_agents,
        sat_signals: vec![ArmSignal::default(); n_sta],
        heap: BinaryHeap::with_capacity(n_sta + n_aps + 16),
        seq: 0,
        trace: Vec::new(),
        grid_s: Vec::new(),
        ap_load: vec![Vec::new(); n_aps],
        sta_sat_trail: vec![Vec::new(); n_sta],
        sat_median_trail: Vec::new(),
        affected: Vec::with_capacity(n_aps),
        scratch_sats: Vec::with_capacity(n_sta),
        events_processed: 0,
        audit_every,
    };

    for s in 0..n_sta {
        let first = sim.traffic[s].next_off_s();
        sim.push(first, EventKind::FlowStart { station: s });
    }
    for index in 0..cfg.forced_reconfigs.len() {
        sim.push(
            cfg.forced_reconfigs[index].time_s,
            EventKind::Forced { index },
        );
    }
    for a in 0..n_aps {
        if let Some(agent) = &sim.ap_agents[a] {
            sim.push(agent.next_activation_s, EventKind::Activation { node: a });
        }
    }
    for s in 0..n_sta {
        if let Some(agent) = &sim.sta_agents[s] {
            sim.push(
                agent.next_activation_s,
                EventKind::Activation { node: n_aps + s },
            );
        }
    }
    sim.push(0.0, EventKind::Metrics);

    let mut last_t = 0.0;
    while let Some(Reverse(event)) = sim.heap.pop() {
        debug_assert!(event.t >= last_t, "event time regressed");
        last_t = event.t;
        match event.kind {
            EventKind::FlowEnd { station } => sim.handle_flow_end(event.t, station),
            EventKind::FlowStart { station } => sim.handle_flow_start(event.t, station)?,
            EventKind::Forced { index } => sim.handle_forced(event.t, index)?,
            EventKind::Activation { node } => sim.handle_activation(event.t, node)?,
            EventKind::Metrics => sim.handle_metrics(event.t),
        }
        sim.events_processed += 1;
        if sim.audit_every > 0 && sim.events_processed.is_multiple_of(sim.audit_every) {
            sim.net.audit(AUDIT_TOL)?;
        }
    }
    sim.net.finalize(cfg.t_sim);

    let accounting = &sim.net.accounting;
    let offered_bits = accounting.offered_bits;
    let served_bits = accounting.served_bits;
    let convergence_time_s = report::convergence_time(
        &sim.grid_s,
        &sim.sat_median_trail,
        cfg.p_th,
        CONVERGENCE_PERSIST_S,
    );
    Ok(RunResult {
        mode,
        t_sim_s: cfg.t_sim,
        mean_satisfaction: accounting.mean_satisfaction(),
        agg_throughput_bps: served_bits / cfg.t_sim,
        drop_ratio: report::drop_ratio(offered_bits, served_bits),
        hourly_sat_time: accounting.sat_time.clone(),
        hourly_active_time: accounting.active_time.clone(),
        offered_bits,
        served_bits,
        convergence_time_s,
        initial_channels: scenario.aps.iter().map(|ap| ap.channel).collect(),
        final_channels: (0..n_aps).map(|a| sim.net.channel_of(a)).collect(),
        grid_s: sim.grid_s,
        ap_load: sim.ap_load,
        sta_sat_trail: sim.sta_sat_trail,
        sat_median_trail: sim.sat_median_trail,
        agent_trace: sim.trace,
        events_processed: sim.events_processed,
    })
}

/// Runs `n_scenarios` generated deployments (seeds `cfg.seed`,
/// `cfg.seed + 1`, ...) under each mode in `modes`, in parallel. Row order
/// is deterministic: scenarios in seed order, modes in the given order.
pub fn run_batch(cfg: &SimConfig, n_scenarios: usize, modes: &[Mode]) -> Result<Vec<BatchRow>> {
    let jobs: Vec<(u64, Mode)> = (0..n_scenarios as u64)
        .flat_map(|i| modes.iter().map(move |&m| (cfg.seed + i, m)))
        .collect();
    jobs.par_iter()
        .map(|&(seed, mode)| {
            let scenario_cfg = SimConfig {
                seed,
                ..cfg.clone()
            };
            let scenario = generate_scenario(&scenario_cfg)?;
            let result = run(&scenario, &scenario_cfg, mode)?;
            Ok(BatchRow {
                scenario_seed: seed,
                mode,
                mean_satisfaction: result.mean_satisfaction,
                agg_throughput_mbps: result.agg_throughput_bps / 1e6,
                drop_ratio: result.drop_ratio,
                convergence_time_s: result.convergence_time_s,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::scenario::toy_scenario;

    fn quick_cfg() -> SimConfig {
        SimConfig {
            t_sim: 3600.0,
            n_aps: 3,
            n_stations: 12,
            channels: vec![36, 40],
            seed: 5,
            agent_enable_time: 600.0,
            ..SimConfig::default()
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = quick_cfg();
        let sc = toy_scenario(&cfg, 40).unwrap();
        let a = run(&sc, &cfg, Mode::Adaptive).unwrap();
        let b = run(&sc, &cfg, Mode::Adaptive).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn static_and_adaptive_share_the_traffic_realization() {
        let cfg = quick_cfg();
        let sc = toy_scenario(&cfg, 40).unwrap();
        let st = run(&sc, &cfg, Mode::Static).unwrap();
        let ad = run(&sc, &cfg, Mode::Adaptive).unwrap();
        // Offered traffic is demand × lifetime, independent of what agents
        // do, so the paired runs must agree exactly.
        assert_eq!(st.offered_bits, ad.offered_bits);
        assert!(st.agent_trace.is_empty());
    }

    #[test]
    fn served_never_exceeds_offered() {
        let cfg = quick_cfg();
        let sc = toy_scenario(&cfg, 40).unwrap();
        for mode in [Mode::Static, Mode::Adaptive] {
            let r = run(&sc, &cfg, mode).unwrap();
            assert!(r.served_bits <= r.offered_bits * (1.0 + 1e-12));
            assert!(r.drop_ratio >= 0.0 && r.drop_ratio < 1.0);
            assert!(r.mean_satisfaction > 0.0 && r.mean_satisfaction <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn metrics_grid_covers_the_horizon() {
        let cfg = quick_cfg();
        let sc = toy_scenario(&cfg, 40).unwrap();
        let r = run(&sc, &cfg, Mode::Static).unwrap();
        assert_eq!(r.grid_s.len(), 61);
        assert_eq!(r.grid_s[0], 0.0);
        assert_eq!(*r.grid_s.last().unwrap(), 3600.0);
        assert_eq!(r.sat_median_trail.len(), 61);
        assert_eq!(r.ap_load[0].len(), 61);
        assert_eq!(r.sta_sat_trail[0].len(), 61);

        // Off-grid horizon gets a closing sample.
        let mut cfg2 = quick_cfg();
        cfg2.t_sim = 150.0;
        let r2 = run(&sc, &cfg2, Mode::Static).unwrap();
        assert_eq!(r2.grid_s, vec![0.0, 60.0, 120.0, 150.0]);
    }

    #[test]
    fn agent_actions_respect_the_enable_time() {
        let mut cfg = quick_cfg();
        cfg.t_sim = 7200.0;
        cfg.agent_enable_time = 3600.0;
        let sc = toy_scenario(&cfg, 40).unwrap();
        let r = run(&sc, &cfg, Mode::Adaptive).unwrap();
        for row in &r.agent_trace {
            assert!(
                row.time_s >= cfg.agent_enable_time + cfg.t_dca.min(cfg.t_daps),
                "agent acted at {} before enable time",
                row.time_s
            );
        }
    }

    #[test]
    fn forced_reconfiguration_fires_and_is_traced() {
        let mut cfg = quick_cfg();
        cfg.agents_enabled = AgentSelection::None;
        cfg.forced_reconfigs = vec![crate::config::ForcedReconfig {
            time_s: 1800.0,
            ap: 1,
            channel: 36,
        }];
        let sc = toy_scenario(&cfg, 40).unwrap();
        let r = run(&sc, &cfg, Mode::Adaptive).unwrap();
        assert_eq!(r.final_channels, vec![40, 36, 40]);
        let row = r
            .agent_trace
            .iter()
            .find(|t| t.kind == TraceKind::Forced)
            .unwrap();
        assert_eq!(
            (row.time_s, row.node, row.from, row.to),
            (1800.0, 1, 40, 36)
        );
        assert_eq!(r.channels_at(1799.0), vec![40, 40, 40]);
        assert_eq!(r.channels_at(1800.0), vec![40, 36, 40]);
        // Forced reconfigurations model environment changes, so they apply
        // in static mode too — static only disables the agents.
        let st = run(&sc, &cfg, Mode::Static).unwrap();
        assert_eq!(st.final_channels, vec![40, 36, 40]);
    }

    #[test]
    fn an_empty_network_is_vacuously_satisfied() {
        let mut cfg = quick_cfg();
        cfg.n_stations = 0;
        let sc = toy_scenario(&cfg, 40).unwrap();
        let r = run(&sc, &cfg, Mode::Adaptive).unwrap();
        assert_eq!(r.offered_bits, 0.0);
        assert_eq!(r.drop_ratio, 0.0);
        assert_eq!(r.mean_satisfaction, 1.0);
        assert!(r.sat_median_trail.iter().all(|&m| m == 1.0));
        assert_eq!(r.convergence_time_s, Some(0.0));
    }

    #[test]
    fn batch_rows_are_ordered_and_reproducible() {
        let cfg = SimConfig {
            t_sim: 900.0,
            n_aps: 3,
            n_stations: 9,
            seed: 40,
            area_xyz: [18.0, 18.0, 2.0],
            ..SimConfig::default()
        };
        let rows = run_batch(&cfg, 2, &[Mode::Static, Mode::Adaptive]).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(
            rows.iter()
                .map(|r| (r.scenario_seed, r.mode))
                .collect::<Vec<_>>(),
            vec![
                (40, Mode::Static),
                (40, Mode::Adaptive),
                (41, Mode::Static),
                (41, Mode::Adaptive),
            ]
        );
        let again = run_batch(&cfg, 2, &[Mode::Static, Mode::Adaptive]).unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn audits_run_during_the_simulation() {
        let mut cfg = quick_cfg();
        cfg.audit_every = Some(1);
        cfg.t_sim = 600.0;
        let sc = toy_scenario(&cfg, 40).unwrap();
        // Auditing every event is the strongest internal cross-check: it
        // recomputes all loads from scratch and compares.
        run(&sc, &cfg, Mode::Adaptive).unwrap();
    }

    #[test]
    fn mode_parses_from_strings() {
        assert_eq!("static".parse::<Mode>().unwrap(), Mode::Static);
        assert_eq!("adaptive".parse::<Mode>().unwrap(), Mode::Adaptive);
        assert!("both".parse::<Mode>().is_err());
    }
}

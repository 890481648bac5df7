//! Mutable WLAN state with incremental airtime-load bookkeeping.
//!
//! The simulation mutates this state through four operations — flow start,
//! flow end, channel switch, reassociation — each of which first integrates
//! served-traffic accounting over the elapsed interval (loads are piecewise
//! constant between events) and then applies O(neighborhood) load deltas.
//! A from-scratch recomputation ([`Network::audit`]) cross-checks the
//! incremental values on demand.
//!
//! Link physics (RSSI, frame success time) depend only on geometry and
//! channel, both drawn from finite sets, so they are precomputed per
//! channel at construction and the event path reduces to table lookups.

use crate::config::SimConfig;
use crate::engine::scenario::Scenario;
use crate::medium::{self, AirtimeParams};
use crate::phy::{self, PhyConstants};
use crate::{Error, Result};

/// One active downlink flow, owned by the serving AP.
#[derive(Debug, Clone, Copy)]
pub struct Flow {
    pub station: usize,
    pub demand_bps: f64,
    /// Airtime requirement on the AP's current channel.
    pub airtime: f64,
    pub start_s: f64,
}

/// Per-AP state: channel, contention neighborhood, and airtime loads.
#[derive(Debug, Clone)]
pub struct ApState {
    /// Index into [`Network::channels`].
    pub channel_idx: usize,
    /// Sum of this AP's own flow airtime requirements.
    pub own_load: f64,
    /// Own load plus the own loads of co-channel contention neighbors.
    pub effective_load: f64,
    /// Co-channel APs within mutual clear-channel range, unordered.
    pub neighbors: Vec<usize>,
    pub flows: Vec<Flow>,
    /// Sum of active flow demands; lets served traffic integrate in O(1).
    pub demand_sum_bps: f64,
    last_integration_s: f64,
}

/// Per-station association state.
#[derive(Debug, Clone)]
pub struct StationState {
    pub serving_ap: usize,
    /// Position of the active flow in the serving AP's flow list.
    flow_idx: Option<usize>,
}

impl StationState {
    pub fn is_active(&self) -> bool {
        self.flow_idx.is_some()
    }
}

/// Served/offered traffic and satisfaction-time integrals, binned hourly.
#[derive(Debug, Clone)]
pub struct UsageAccounting {
    pub served_bits: f64,
    pub offered_bits: f64,
    /// ∫ satisfaction dt summed over active stations, per hour.
    pub sat_time: Vec<f64>,
    /// Station-active seconds per hour.
    pub active_time: Vec<f64>,
    bin_s: f64,
}

impl UsageAccounting {
    fn new(horizon_s: f64) -> Self {
        let bins = (horizon_s / 3600.0).ceil() as usize + 1;
        Self {
            served_bits: 0.0,
            offered_bits: 0.0,
            sat_time: vec![0.0; bins],
            active_time: vec![0.0; bins],
            bin_s: 3600.0,
        }
    }

    fn add_active(&mut self, t0: f64, t1: f64, sat: f64, flows: usize) {
        let w = flows as f64;
        let mut t = t0;
        while t < t1 {
            let bin = ((t / self.bin_s) as usize).min(self.sat_time.len() - 1);
            let bin_end = (bin as f64 + 1.0) * self.bin_s;
            let seg_end = if bin_end <= t { t1 } else { t1.min(bin_end) };
            self.sat_time[bin] += sat * w * (seg_end - t);
            self.active_time[bin] += w * (seg_end - t);
            t = seg_end;
        }
    }

    /// Time-weighted mean satisfaction pooled over all station-active time;
    /// 1.0 when nothing was ever active (no demand goes unsatisfied).
    pub fn mean_satisfaction(&self) -> f64 {
        Self::pooled(&self.sat_time, &self.active_time)
    }

    /// Pooled mean satisfaction over a range of hour bins.
    pub fn mean_satisfaction_hours(&self, hours: std::ops::Range<usize>) -> f64 {
        let hi = hours.end.min(self.sat_time.len());
        let lo = hours.start.min(hi);
        Self::pooled(&self.sat_time[lo..hi], &self.active_time[lo..hi])
    }

    fn pooled(sat: &[f64], active: &[f64]) -> f64 {
        let a: f64 = active.iter().sum();
        if a > 0.0 {
            sat.iter().sum::<f64>() / a
        } else {
            1.0
        }
    }
}

/// The full mutable network: APs, stations, link tables, accounting.
#[derive(Debug, Clone)]
pub struct Network {
    /// Allowed channel numbers; `ApState::channel_idx` indexes this list.
    pub channels: Vec<u16>,
    pub aps: Vec<ApState>,
    pub stations: Vec<StationState>,
    pub phy: PhyConstants,
    pub airtime: AirtimeParams,
    pub accounting: UsageAccounting,
    /// `sense[c][i*n_aps + j]`: APs i and j are in mutual clear-channel
    /// range when both operate on channel index c. Symmetric, false on the
    /// diagonal.
    sense: Vec<Vec<bool>>,
    /// `sta_rssi[c][s*n_aps + a]`: RSSI at station s from AP a on channel c.
    sta_rssi: Vec<Vec<f64>>,
    /// Frame success time of the (station, AP) link on channel c;
    /// NaN when the RSSI supports no MCS.
    link_success: Vec<Vec<f64>>,
    n_aps: usize,
}

impl Network {
    pub fn new(scenario: &Scenario, cfg: &SimConfig) -> Result<Self> {
        scenario.validate()?;
        let n_aps = scenario.aps.len();
        let n_sta = scenario.stations.len();
        let n_ch = scenario.channels.len();
        let mcs = cfg.mcs()?;
        let airtime = cfg.airtime_params()?;

        let mut sense = vec![vec![false; n_aps * n_aps]; n_ch];
        let mut sta_rssi = vec![vec![0.0; n_sta * n_aps]; n_ch];
        let mut link_success = vec![vec![f64::NAN; n_sta * n_aps]; n_ch];
        for (c, &ch) in scenario.channels.iter().enumerate() {
            let fc = phy::channel_center_ghz(ch);
            for i in 0..n_aps {
                for j in (i + 1)..n_aps {
                    let d = phy::distance_m(scenario.aps[i].pos, scenario.aps[j].pos);
                    let at_j = phy::received_power_dbm(
                        scenario.aps[i].tx_power_dbm,
                        &cfg.path_loss,
                        d,
                        fc,
                    );
                    let at_i = phy::received_power_dbm(
                        scenario.aps[j].tx_power_dbm,
                        &cfg.path_loss,
                        d,
                        fc,
                    );
                    let mutual = at_j >= cfg.cca_dbm && at_i >= cfg.cca_dbm;
                    sense[c][i * n_aps + j] = mutual;
                    sense[c][j * n_aps + i] = mutual;
                }
            }
            for s in 0..n_sta {
                for a in 0..n_aps {
                    let d = phy::distance_m(scenario.stations[s].pos, scenario.aps[a].pos);
                    let rssi = phy::received_power_dbm(
                        scenario.aps[a].tx_power_dbm,
                        &cfg.path_loss,
                        d,
                        fc,
                    );
                    sta_rssi[c][s * n_aps + a] = rssi;
                    if let Ok(entry) = mcs.select(rssi) {
                        link_success[c][s * n_aps + a] =
                            phy::frame_times(&cfg.phy, entry.bits_per_symbol(&cfg.phy)).success_s;
                    }
                }
            }
        }

        let channel_idx_of = |ch: u16| -> usize {
            scenario
                .channels
                .iter()
                .position(|&c| c == ch)
                .expect("validated: AP channel is in the channel list")
        };
        let mut aps: Vec<ApState> = scenario
            .aps
            .iter()
            .map(|ap| ApState {
                channel_idx: channel_idx_of(ap.channel),
                own_load: 0.0,
                effective_load: 0.0,
                neighbors: Vec::new(),
                flows: Vec::new(),
                demand_sum_bps: 0.0,
                last_integration_s: 0.0,
            })
            .collect();
        for i in 0..n_aps {
            let c = aps[i].channel_idx;
            aps[i].neighbors = (0..n_aps)
                .filter(|&j| j != i && aps[j].channel_idx == c && sense[c][i * n_aps + j])
                .collect();
        }

        let stations: Vec<StationState> = scenario
            .stations
            .iter()
            .map(|sta| StationState {
                serving_ap: sta.ap,
                flow_idx: None,
            })
            .collect();
        for (s, sta) in stations.iter().enumerate() {
            let c = aps[sta.serving_ap].channel_idx;
            let rssi = sta_rssi[c][s * n_aps + sta.serving_ap];
            if link_success[c][s * n_aps + sta.serving_ap].is_nan() {
                return Err(Error::NoLink { rssi_dbm: rssi });
            }
        }

        Ok(Self {
            channels: scenario.channels.clone(),
            aps,
            stations,
            phy: cfg.phy.clone(),
            airtime,
            accounting: UsageAccounting::new(cfg.t_sim),
            sense,
            sta_rssi,
            link_success,
            n_aps,
        })
    }

    pub fn n_aps(&self) -> usize {
        self.n_aps
    }

    pub fn n_stations(&self) -> usize {
        self.stations.len()
    }

    /// Channel number the AP currently operates on.
    pub fn channel_of(&self, ap: usize) -> u16 {
        self.channels[self.aps[ap].channel_idx]
    }

    /// RSSI at station `sta` from AP `ap` on the given channel index.
    pub fn station_rssi(&self, sta: usize, ap: usize, channel_idx: usize) -> f64 {
        self.sta_rssi[channel_idx][sta * self.n_aps + ap]
    }

    /// RSSI at station `sta` from AP `ap` on that AP's current channel.
    pub fn station_rssi_current(&self, sta: usize, ap: usize) -> f64 {
        self.station_rssi(sta, ap, self.aps[ap].channel_idx)
    }

    /// Airtime requirement of a `demand_bps` flow on the (sta, ap) link at
    /// `channel_idx`; fails when the link supports no MCS.
    pub fn link_airtime(
        &self,
        sta: usize,
        ap: usize,
        channel_idx: usize,
        demand_bps: f64,
    ) -> Result<f64> {
        let ts = self.link_success[channel_idx][sta * self.n_aps + ap];
        if ts.is_nan() {
            return Err(Error::NoLink {
                rssi_dbm: self.sta_rssi[channel_idx][sta * self.n_aps + ap],
            });
        }
        Ok(medium::airtime_requirement(
            demand_bps,
            &self.phy,
            &self.airtime,
            ts,
        ))
    }

    /// Satisfaction currently delivered by an AP (1 when load ≤ 1).
    pub fn satisfaction_of(&self, ap: usize) -> f64 {
        medium::satisfaction(self.aps[ap].effective_load)
    }

    /// Integrates one AP's accounting up to `now` at the current loads.
    fn integrate(&mut self, ap: usize, now: f64) {
        let st = &mut self.aps[ap];
        let dt = now - st.last_integration_s;
        debug_assert!(dt >= -1e-9, "time went backwards at AP {ap}: dt = {dt}");
        if dt > 0.0 && !st.flows.is_empty() {
            let sat = medium::satisfaction(st.effective_load);
            self.accounting.served_bits += st.demand_sum_bps * sat * dt;
            self.accounting
                .add_active(st.last_integration_s, now, sat, st.flows.len());
        }
        st.last_integration_s = now;
    }

    /// Integrates `ap` and its neighborhood and marks them affected.
    fn touch(&mut self, ap: usize, now: f64, affected: &mut Vec<usize>) {
        self.integrate(ap, now);
        affected.push(ap);
        for k in 0..self.aps[ap].neighbors.len() {
            let nb = self.aps[ap].neighbors[k];
            self.integrate(nb, now);
            affected.push(nb);
        }
    }

    /// Adds `delta` to an AP's own load and propagates it to every
    /// effective load that includes it (the AP's own and its neighbors').
    fn add_own_load(&mut self, ap: usize, delta: f64) {
        self.aps[ap].own_load += delta;
        self.aps[ap].effective_load += delta;
        for k in 0..self.aps[ap].neighbors.len() {
            let nb = self.aps[ap].neighbors[k];
            self.aps[nb].effective_load += delta;
        }
    }

    /// Starts a flow at the station's serving AP. Fills `affected` with the
    /// APs whose effective load changed.
    pub fn start_flow(
        &mut self,
        now: f64,
        station: usize,
        demand_bps: f64,
        affected: &mut Vec<usize>,
    ) -> Result<()> {
        affected.clear();
        debug_assert!(
            self.stations[station].flow_idx.is_none(),
            "station {station} already has a flow"
        );
        let ap = self.stations[station].serving_ap;
        let c = self.aps[ap].channel_idx;
        let airtime = self.link_airtime(station, ap, c, demand_bps)?;
        self.touch(ap, now, affected);
        self.stations[station].flow_idx = Some(self.aps[ap].flows.len());
        self.aps[ap].flows.push(Flow {
            station,
            demand_bps,
            airtime,
            start_s: now,
        });
        self.aps[ap].demand_sum_bps += demand_bps;
        self.add_own_load(ap, airtime);
        Ok(())
    }

    /// Ends the station's flow, crediting offered traffic for its lifetime.
    pub fn end_flow(&mut self, now: f64, station: usize, affected: &mut Vec<usize>) {
        affected.clear();
        let ap = self.stations[station].serving_ap;
        let idx = self.stations[station]
            .flow_idx
            .take()
            .expect("station has an active flow to end");
        self.touch(ap, now, affected);
        let flow = self.aps[ap].flows.swap_remove(idx);
        debug_assert_eq!(flow.station, station);
        if idx < self.aps[ap].flows.len() {
            let moved = self.aps[ap].flows[idx].station;
            self.stations[moved].flow_idx = Some(idx);
        }
        self.accounting.offered_bits += flow.demand_bps * (now - flow.start_s);
        self.aps[ap].demand_sum_bps -= flow.demand_bps;
        self.add_own_load(ap, -flow.airtime);
    }

    /// Moves an AP to another channel index, recomputing its flow airtimes
    /// for the new center frequency and rebuilding the contention
    /// neighborhoods on both channels.
    pub fn switch_channel(
        &mut self,
        now: f64,
        ap: usize,
        new_channel_idx: usize,
        affected: &mut Vec<usize>,
    ) -> Result<()> {
        affected.clear();
        let old_idx = self.aps[ap].channel_idx;
        if old_idx == new_channel_idx {
            return Ok(());
        }
        // Recompute flow airtimes first so a link failure leaves the state
        // untouched. (The serving links were viable on the old channel; a
        // few hundredths of a dB of center-frequency shift can in principle
        // cross an MCS edge, but never the no-link edge in practice.)
        let new_airtimes: Vec<f64> = self.aps[ap]
            .flows
            .iter()
            .map(|f| self.link_airtime(f.station, ap, new_channel_idx, f.demand_bps))
            .collect::<Result<_>>()?;

        let old_own = self.aps[ap].own_load;
        self.touch(ap, now, affected);
        let new_neighbors: Vec<usize> = (0..self.n_aps)
            .filter(|&j| {
                j != ap
                    && self.aps[j].channel_idx == new_channel_idx
                    && self.sense[new_channel_idx][ap * self.n_aps + j]
            })
            .collect();
        for &nb in &new_neighbors {
            self.integrate(nb, now);
        }

        // Detach from the old channel.
        let old_neighbors = std::mem::take(&mut self.aps[ap].neighbors);
        for &nb in &old_neighbors {
            self.aps[nb].effective_load -= old_own;
            self.aps[nb].neighbors.retain(|&x| x != ap);
        }

        // Re-price own flows on the new channel.
        let mut own = 0.0;
        for (flow, &u) in self.aps[ap].flows.iter_mut().zip(&new_airtimes) {
            flow.airtime = u;
            own += u;
        }
        self.aps[ap].own_load = own;
        self.aps[ap].channel_idx = new_channel_idx;

        // Attach to the new channel.
        let mut eff = own;
        for &nb in &new_neighbors {
            self.aps[nb].effective_load += own;
            self.aps[nb].neighbors.push(ap);
            eff += self.aps[nb].own_load;
        }
        self.aps[ap].neighbors = new_neighbors.clone();
        self.aps[ap].effective_load = eff;

        // The switching AP always lands in `affected` (its neighborhood sum
        // changed); old/new neighbors only if the moved load is nonzero.
        if old_own == 0.0 && own == 0.0 {
            affected.clear();
            affected.push(ap);
        } else {
            affected.extend_from_slice(&new_neighbors);
        }
        affected.sort_unstable();
        affected.dedup();
        Ok(())
    }

    /// Moves a station to another AP. An active flow carries its demand and
    /// start time along and is re-priced for the new link and channel.
    pub fn reassociate(
        &mut self,
        now: f64,
        station: usize,
        new_ap: usize,
        affected: &mut Vec<usize>,
    ) -> Result<()> {
        affected.clear();
        let old_ap = self.stations[station].serving_ap;
        if old_ap == new_ap {
            return Ok(());
        }
        let Some(idx) = self.stations[station].flow_idx else {
            // Idle handover: no load moves.
            self.stations[station].serving_ap = new_ap;
            return Ok(());
        };
        let flow = self.aps[old_ap].flows[idx];
        let new_airtime = self.link_airtime(
            station,
            new_ap,
            self.aps[new_ap].channel_idx,
            flow.demand_bps,
        )?;

        self.touch(old_ap, now, affected);
        self.touch(new_ap, now, affected);

        self.aps[old_ap].flows.swap_remove(idx);
        if idx < self.aps[old_ap].flows.len() {
            let moved = self.aps[old_ap].flows[idx].station;
            self.stations[moved].flow_idx = Some(idx);
        }
        self.aps[old_ap].demand_sum_bps -= flow.demand_bps;
        self.add_own_load(old_ap, -flow.airtime);

        self.stations[station].serving_ap = new_ap;
        self.stations[station].flow_idx = Some(self.aps[new_ap].flows.len());
        self.aps[new_ap].flows.push(Flow {
            airtime: new_airtime,
            ..flow
        });
        self.aps[new_ap].demand_sum_bps += flow.demand_bps;
        self.add_own_load(new_ap, new_airtime);

        affected.sort_unstable();
        affected.dedup();
        Ok(())
    }

    /// Closes accounting at the end of the horizon: integrates every AP to
    /// `t_end` and credits offered traffic for still-open flows.
    pub fn finalize(&mut self, t_end: f64) {
        for ap in 0..self.n_aps {
            self.integrate(ap, t_end);
        }
        for ap in &self.aps {
            for flow in &ap.flows {
                self.accounting.offered_bits += flow.demand_bps * (t_end - flow.start_s);
            }
        }
    }

    /// Recomputes every airtime, load, and neighborhood from first
    /// principles and compares against the incrementally maintained state.
    pub fn audit(&self, tol: f64) -> Result<()> {
        let fail = |msg: String| Err(Error::Audit(msg));

        // Station ↔ flow bijection.
        let mut flows_seen = 0usize;
        for (s, sta) in self.stations.iter().enumerate() {
            if let Some(idx) = sta.flow_idx {
                let flows = &self.aps[sta.serving_ap].flows;
                if idx >= flows.len() || flows[idx].station != s {
                    return fail(format!(
                        "station {s} flow index {idx} does not point back at it"
                    ));
                }
                flows_seen += 1;
            }
        }
        let total_flows: usize = self.aps.iter().map(|ap| ap.flows.len()).sum();
        if flows_seen != total_flows {
            return fail(format!(
                "{total_flows} flows stored but {flows_seen} stations active"
            ));
        }

        let mut fresh_own = vec![0.0; self.n_aps];
        for (a, ap) in self.aps.iter().enumerate() {
            let mut own = 0.0;
            let mut demand = 0.0;
            for flow in &ap.flows {
                if self.stations[flow.station].serving_ap != a {
                    return fail(format!(
                        "flow of station {} sits at AP {a} but the station is served by AP {}",
                        flow.station, self.stations[flow.station].serving_ap
                    ));
                }
                let u = self.link_airtime(flow.station, a, ap.channel_idx, flow.demand_bps)?;
                if (u - flow.airtime).abs() > tol {
                    return fail(format!(
                        "stale airtime for station {} at AP {a}: stored {}, fresh {u}",
                        flow.station, flow.airtime
                    ));
                }
                own += u;
                demand += flow.demand_bps;
            }
            if (own - ap.own_load).abs() > tol {
                return fail(format!(
                    "own load of AP {a}: stored {}, fresh {own}",
                    ap.own_load
                ));
            }
            if (demand - ap.demand_sum_bps).abs() > tol.max(1e-3) {
                return fail(format!(
                    "demand sum of AP {a}: stored {}, fresh {demand}",
                    ap.demand_sum_bps
                ));
            }
            fresh_own[a] = own;
        }

        for (a, ap) in self.aps.iter().enumerate() {
            let c = ap.channel_idx;
            let mut fresh_nb: Vec<usize> = (0..self.n_aps)
                .filter(|&j| {
                    j != a && self.aps[j].channel_idx == c && self.sense[c][a * self.n_aps + j]
                })
                .collect();
            let mut stored_nb = ap.neighbors.clone();
            fresh_nb.sort_unstable();
            stored_nb.sort_unstable();
            if fresh_nb != stored_nb {
                return fail(format!(
                    "neighborhood of AP {a}: stored {stored_nb:?}, fresh {fresh_nb:?}"
                ));
            }
            let eff = fresh_own[a] + fresh_nb.iter().map(|&j| fresh_own[j]).sum::<f64>();
            if (eff - ap.effective_load).abs() > tol {
                return fail(format!(
                    "effective load of AP {a}: stored {}, fresh {eff}",
                    ap.effective_load
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::scenario::{generate_scenario, toy_scenario};
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy_net(seed: u64) -> (Network, SimConfig) {
        let cfg = SimConfig {
            channels: vec![36, 40],
            n_aps: 3,
            n_stations: 12,
            seed,
            ..SimConfig::default()
        };
        let sc = toy_scenario(&cfg, 40).unwrap();
        (Network::new(&sc, &cfg).unwrap(), cfg)
    }

    #[test]
    fn construction_matches_the_audit() {
        let (net, _) = toy_net(3);
        net.audit(1e-12).unwrap();
        assert_eq!(net.n_aps(), 3);
        assert_eq!(net.n_stations(), 12);
        // All APs share channel 40; the line topology gives 1-2-1 neighbors.
        assert_eq!(net.aps[0].neighbors, vec![1]);
        let mut mid = net.aps[1].neighbors.clone();
        mid.sort_unstable();
        assert_eq!(mid, vec![0, 2]);
        assert_eq!(net.aps[2].neighbors, vec![1]);
    }

    #[test]
    fn flow_loads_add_up_across_the_neighborhood() {
        let (mut net, _) = toy_net(3);
        let mut affected = Vec::new();
        // One flow at AP 0's strongest station, one at AP 2's.
        let s0 = (0..net.n_stations())
            .find(|&s| net.stations[s].serving_ap == 0)
            .unwrap();
        let s2 = (0..net.n_stations())
            .find(|&s| net.stations[s].serving_ap == 2)
            .unwrap();
        net.start_flow(10.0, s0, 2e6, &mut affected).unwrap();
        assert_eq!(affected, vec![0, 1]);
        net.start_flow(10.0, s2, 3e6, &mut affected).unwrap();
        assert_eq!(affected, vec![2, 1]);

        let u0 = net.aps[0].own_load;
        let u2 = net.aps[2].own_load;
        assert!(u0 > 0.0 && u2 > 0.0);
        // The middle AP hears both; the outer APs only themselves.
        assert!((net.aps[1].effective_load - (u0 + u2)).abs() < 1e-15);
        assert!((net.aps[0].effective_load - u0).abs() < 1e-15);
        assert!((net.aps[2].effective_load - u2).abs() < 1e-15);
        net.audit(1e-12).unwrap();

        net.end_flow(20.0, s0, &mut affected);
        assert_eq!(affected, vec![0, 1]);
        assert!((net.aps[1].effective_load - u2).abs() < 1e-12);
        net.audit(1e-9).unwrap();
    }

    #[test]
    fn served_and_offered_bits_integrate_over_flow_lifetimes() {
        let (mut net, _) = toy_net(3);
        let mut affected = Vec::new();
        let s0 = (0..net.n_stations())
            .find(|&s| net.stations[s].serving_ap == 0)
            .unwrap();
        // A single low-demand flow is fully satisfied: served == offered.
        net.start_flow(10.0, s0, 2e6, &mut affected).unwrap();
        net.end_flow(25.0, s0, &mut affected);
        assert!((net.accounting.offered_bits - 2e6 * 15.0).abs() < 1e-3);
        assert!((net.accounting.served_bits - 2e6 * 15.0).abs() < 1e-3);
        assert!((net.accounting.active_time[0] - 15.0).abs() < 1e-9);
        assert!((net.accounting.sat_time[0] - 15.0).abs() < 1e-9);
        assert!((net.accounting.mean_satisfaction() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn accounting_splits_at_hour_boundaries() {
        let (mut net, _) = toy_net(3);
        let mut affected = Vec::new();
        let s0 = (0..net.n_stations())
            .find(|&s| net.stations[s].serving_ap == 0)
            .unwrap();
        net.start_flow(3000.0, s0, 1e6, &mut affected).unwrap();
        net.end_flow(4000.0, s0, &mut affected);
        assert!((net.accounting.active_time[0] - 600.0).abs() < 1e-9);
        assert!((net.accounting.active_time[1] - 400.0).abs() < 1e-9);
    }

    #[test]
    fn truncated_flows_count_their_open_tail_as_offered() {
        let (mut net, cfg) = toy_net(3);
        let mut affected = Vec::new();
        let s0 = (0..net.n_stations())
            .find(|&s| net.stations[s].serving_ap == 0)
            .unwrap();
        net.start_flow(cfg.t_sim - 100.0, s0, 4e6, &mut affected)
            .unwrap();
        net.finalize(cfg.t_sim);
        assert!((net.accounting.offered_bits - 4e6 * 100.0).abs() < 1e-3);
        assert!((net.accounting.served_bits - 4e6 * 100.0).abs() < 1e-3);
    }

    #[test]
    fn channel_switch_rebuilds_neighborhoods_and_loads() {
        let (mut net, _) = toy_net(3);
        let mut affected = Vec::new();
        let s1 = (0..net.n_stations())
            .find(|&s| net.stations[s].serving_ap == 1)
            .unwrap();
        net.start_flow(5.0, s1, 3e6, &mut affected).unwrap();
        let u1 = net.aps[1].own_load;
        assert!((net.aps[0].effective_load - u1).abs() < 1e-15);

        // Middle AP leaves the shared channel: outer APs lose its load.
        net.switch_channel(8.0, 1, 0, &mut affected).unwrap();
        assert_eq!(affected, vec![0, 1, 2]);
        assert!(net.aps[1].neighbors.is_empty());
        assert!(net.aps[0].neighbors.is_empty());
        assert_eq!(net.aps[0].effective_load, 0.0);
        assert_eq!(net.aps[2].effective_load, 0.0);
        assert!(net.aps[1].own_load > 0.0);
        net.audit(1e-9).unwrap();

        // And back: neighborhoods reattach.
        net.switch_channel(9.0, 1, 1, &mut affected).unwrap();
        assert_eq!(net.aps[0].neighbors, vec![1]);
        assert!((net.aps[0].effective_load - net.aps[1].own_load).abs() < 1e-12);
        net.audit(1e-9).unwrap();
    }

    #[test]
    fn idle_channel_switch_affects_only_the_mover() {
        let (mut net, _) = toy_net(3);
        let mut affected = Vec::new();
        net.switch_channel(8.0, 0, 0, &mut affected).unwrap();
        assert_eq!(affected, vec![0]);
        net.audit(1e-12).unwrap();
    }

    #[test]
    fn reassociation_moves_an_active_flow() {
        let (mut net, _) = toy_net(3);
        let mut affected = Vec::new();
        // A station served by the middle AP that can also reach AP 0.
        let s1 = (0..net.n_stations())
            .find(|&s| {
                net.stations[s].serving_ap == 1
                    && net.link_airtime(s, 0, net.aps[0].channel_idx, 1e6).is_ok()
            })
            .unwrap();
        net.start_flow(5.0, s1, 3e6, &mut affected).unwrap();
        let u_at_1 = net.aps[1].own_load;

        net.reassociate(7.0, s1, 0, &mut affected).unwrap();
        assert_eq!(affected, vec![0, 1, 2]);
        assert_eq!(net.stations[s1].serving_ap, 0);
        assert!(net.aps[1].flows.is_empty());
        assert_eq!(net.aps[0].flows.len(), 1);
        assert!(net.aps[0].own_load > 0.0);
        // Same MCS table, but the station is farther from AP 0, so the
        // airtime can only grow or stay equal.
        assert!(net.aps[0].own_load >= u_at_1 - 1e-12);
        net.audit(1e-9).unwrap();

        // Idle reassociation moves no load.
        net.end_flow(9.0, s1, &mut affected);
        net.reassociate(10.0, s1, 2, &mut affected).unwrap();
        assert!(affected.is_empty());
        assert_eq!(net.stations[s1].serving_ap, 2);
        net.audit(1e-9).unwrap();
    }

    #[test]
    fn random_operation_fuzz_stays_consistent_with_the_audit() {
        let cfg = SimConfig {
            n_aps: 5,
            n_stations: 25,
            channels: vec![36, 40, 44],
            seed: 11,
            area_xyz: [22.0, 22.0, 2.0],
            ..SimConfig::default()
        };
        let sc = generate_scenario(&cfg).unwrap();
        let mut net = Network::new(&sc, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut affected = Vec::new();
        let mut now = 0.0;
        for step in 0..2000 {
            now += rng.random_range(0.001..2.0);
            match rng.random_range(0..4) {
                0 => {
                    let s = rng.random_range(0..net.n_stations());
                    if !net.stations[s].is_active() {
                        let demand = rng.random_range(1e6..5e6);
                        net.start_flow(now, s, demand, &mut affected).unwrap();
                    }
                }
                1 => {
                    let s = rng.random_range(0..net.n_stations());
                    if net.stations[s].is_active() {
                        net.end_flow(now, s, &mut affected);
                    }
                }
                2 => {
                    let a = rng.random_range(0..net.n_aps());
                    let c = rng.random_range(0..net.channels.len());
                    net.switch_channel(now, a, c, &mut affected).unwrap();
                }
                _ => {
                    let s = rng.random_range(0..net.n_stations());
                    let a = rng.random_range(0..net.n_aps());
                    // Only hand over to APs the station can actually reach.
                    if net.link_airtime(s, a, net.aps[a].channel_idx, 1e6).is_ok() {
                        net.reassociate(now, s, a, &mut affected).unwrap();
                    }
                }
            }
            net.audit(1e-9)
                .unwrap_or_else(|e| panic!("audit failed at step {step}: {e}"));
        }
        // The fuzz actually exercised load: some AP saw contention.
        assert!(net.accounting.served_bits > 0.0);
    }

    #[test]
    fn affected_lists_cover_every_changed_effective_load() {
        let cfg = SimConfig {
            n_aps: 5,
            n_stations: 25,
            channels: vec![36, 40],
            seed: 21,
            area_xyz: [20.0, 20.0, 2.0],
            ..SimConfig::default()
        };
        let sc = generate_scenario(&cfg).unwrap();
        let mut net = Network::new(&sc, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut affected = Vec::new();
        let mut now = 0.0;
        for _ in 0..800 {
            now += 0.5;
            let before: Vec<f64> = net.aps.iter().map(|a| a.effective_load).collect();
            let op = rng.random_range(0..3);
            match op {
                0 => {
                    let s = rng.random_range(0..net.n_stations());
                    if !net.stations[s].is_active() {
                        net.start_flow(now, s, 2e6, &mut affected).unwrap();
                    } else {
                        net.end_flow(now, s, &mut affected);
                    }
                }
                1 => {
                    let a = rng.random_range(0..net.n_aps());
                    let c = rng.random_range(0..net.channels.len());
                    net.switch_channel(now, a, c, &mut affected).unwrap();
                }
                _ => {
                    let s = rng.random_range(0..net.n_stations());
                    let a = rng.random_range(0..net.n_aps());
                    if net.link_airtime(s, a, net.aps[a].channel_idx, 1e6).is_ok() {
                        net.reassociate(now, s, a, &mut affected).unwrap();
                    }
                }
            }
            for (a, (&b, ap)) in before.iter().zip(&net.aps).enumerate() {
                if (b - ap.effective_load).abs() > 1e-12 {
                    assert!(
                        affected.contains(&a),
                        "AP {a} changed ({b} -> {}) but was not reported",
                        ap.effective_load
                    );
                }
            }
        }
    }

    #[test]
    fn no_link_is_reported_for_unreachable_aps() {
        let (net, _) = toy_net(3);
        // Find a station far from AP 0 (served by AP 2): the 14 m gap puts
        // it well past the lowest-MCS sensitivity.
        let s = (0..net.n_stations())
            .find(|&s| net.stations[s].serving_ap == 2)
            .unwrap();
        let rssi = net.station_rssi_current(s, 0);
        if rssi < -82.0 {
            assert!(matches!(
                net.link_airtime(s, 0, 0, 1e6),
                Err(Error::NoLink { .. })
            ));
        }
    }
}

//! Physical-layer model: indoor log-distance path loss with wall attenuation,
//! RSSI-driven MCS selection, and 802.11ax frame exchange timing.
//!
//! All durations are in seconds, frame lengths in bits, powers in dBm and
//! gains/losses in dB. Control frames (RTS/CTS/ACK) always ride the legacy
//! OFDM rate; only the data frame uses the rate of the selected MCS.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// MAC/PHY timing and framing constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhyConstants {
    /// Empty backoff slot duration.
    pub slot_s: f64,
    /// Short interframe space.
    pub sifs_s: f64,
    /// DCF interframe space.
    pub difs_s: f64,
    /// Legacy preamble + PLCP header duration (control frames).
    pub phy_header_legacy_s: f64,
    /// HE single-user preamble duration (data frames).
    pub phy_header_he_su_s: f64,
    /// Legacy OFDM symbol duration (control frames).
    pub symbol_legacy_s: f64,
    /// HE OFDM symbol duration, guard interval included (data frames).
    pub symbol_he_s: f64,
    /// Service field length prepended to every PSDU.
    pub service_field_bits: u64,
    /// RTS frame length.
    pub rts_bits: u64,
    /// CTS frame length.
    pub cts_bits: u64,
    /// MAC header length of a data frame.
    pub mac_header_bits: u64,
    /// ACK frame length.
    pub ack_bits: u64,
    /// Tail bits appended to every PSDU.
    pub tail_bits: u64,
    /// Data payload carried by one frame.
    pub frame_payload_bits: u64,
    /// Bits per OFDM symbol at the legacy (control) rate.
    pub legacy_bits_per_symbol: u64,
    /// Data subcarriers of a 20 MHz channel.
    pub data_subcarriers: u64,
    /// Spatial streams per link.
    pub spatial_streams: u64,
}

impl Default for PhyConstants {
    fn default() -> Self {
        Self {
            slot_s: 9e-6,
            sifs_s: 16e-6,
            difs_s: 34e-6,
            phy_header_legacy_s: 20e-6,
            phy_header_he_su_s: 164e-6,
            symbol_legacy_s: 4e-6,
            symbol_he_s: 16e-6,
            service_field_bits: 16,
            rts_bits: 160,
            cts_bits: 112,
            mac_header_bits: 320,
            ack_bits: 112,
            tail_bits: 18,
            frame_payload_bits: 12_000,
            legacy_bits_per_symbol: 24,
            data_subcarriers: 234,
            spatial_streams: 1,
        }
    }
}

/// Enterprise indoor path-loss profile parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathLossParams {
    /// Breakpoint distance after which the slope steepens.
    pub breakpoint_m: f64,
    /// Number of traversed walls.
    pub walls: f64,
    /// Attenuation per wall.
    pub wall_loss_db: f64,
    /// Transmitter antenna gain.
    pub tx_gain_db: f64,
    /// Receiver antenna gain.
    pub rx_gain_db: f64,
}

impl Default for PathLossParams {
    fn default() -> Self {
        Self {
            breakpoint_m: 5.0,
            walls: 4.0,
            wall_loss_db: 7.0,
            tx_gain_db: 0.0,
            rx_gain_db: 0.0,
        }
    }
}

/// Center frequency in GHz of a 5 GHz band channel number (5000 + 5·ch MHz).
pub fn channel_center_ghz(channel: u16) -> f64 {
    (5000.0 + 5.0 * channel as f64) / 1000.0
}

/// Euclidean distance between two positions, floored at 1 mm so co-located
/// nodes keep a finite path loss.
pub fn distance_m(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt().max(1e-3)
}

/// Path loss in dB over `distance_m` at center frequency `fc_ghz`.
///
/// Dual-slope log-distance model: 20 dB/decade up to the breakpoint,
/// 35 dB/decade beyond it, plus a fixed per-wall attenuation.
pub fn path_loss_db(params: &PathLossParams, distance_m: f64, fc_ghz: f64) -> f64 {
    debug_assert!(distance_m > 0.0, "path loss needs a positive distance");
    let d_bp = params.breakpoint_m;
    let mut pl = 40.05
        + 20.0 * (fc_ghz / 2.4).log10()
        + 20.0 * distance_m.min(d_bp).log10()
        + params.wall_loss_db * params.walls;
    if distance_m > d_bp {
        pl += 35.0 * (distance_m / d_bp).log10();
    }
    pl
}

/// Received power in dBm at `distance_m` for a transmitter at `tx_dbm`.
pub fn received_power_dbm(
    tx_dbm: f64,
    params: &PathLossParams,
    distance_m: f64,
    fc_ghz: f64,
) -> f64 {
    tx_dbm + params.tx_gain_db + params.rx_gain_db - path_loss_db(params, distance_m, fc_ghz)
}

/// One modulation-and-coding scheme: constellation bits, coding rate, and the
/// minimal RSSI at which it is usable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsEntry {
    pub index: u8,
    /// Bits per subcarrier per symbol (constellation order).
    pub bits_per_subcarrier: u32,
    /// Coding rate numerator.
    pub coding_num: u32,
    /// Coding rate denominator.
    pub coding_den: u32,
    /// Weakest RSSI at which this MCS still decodes.
    pub min_rssi_dbm: f64,
}

impl McsEntry {
    /// Data bits carried by one OFDM symbol under this MCS.
    pub fn bits_per_symbol(&self, phy: &PhyConstants) -> f64 {
        phy.data_subcarriers as f64
            * self.bits_per_subcarrier as f64
            * phy.spatial_streams as f64
            * self.coding_num as f64
            / self.coding_den as f64
    }
}

/// RSSI-indexed MCS lookup table, sorted by ascending sensitivity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

impl McsTable {
    /// Builds a table from entries; they are sorted by `min_rssi_dbm`.
    pub fn new(mut entries: Vec<McsEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Config("MCS table must not be empty".into()));
        }
        entries.sort_by(|a, b| a.min_rssi_dbm.total_cmp(&b.min_rssi_dbm));
        for e in &entries {
            if e.bits_per_subcarrier == 0 || e.coding_num == 0 || e.coding_den == 0 {
                return Err(Error::Config(format!(
                    "MCS {} has a zero modulation or coding field",
                    e.index
                )));
            }
        }
        Ok(Self { entries })
    }

    /// 20 MHz single-stream HE ladder, MCS 0–11.
    pub fn default_he20() -> Self {
        let rows: [(u8, u32, u32, u32, f64); 12] = [
            (0, 1, 1, 2, -82.0),
            (1, 2, 1, 2, -79.0),
            (2, 2, 3, 4, -77.0),
            (3, 4, 1, 2, -74.0),
            (4, 4, 3, 4, -70.0),
            (5, 6, 2, 3, -66.0),
            (6, 6, 3, 4, -65.0),
            (7, 6, 5, 6, -64.0),
            (8, 8, 3, 4, -59.0),
            (9, 8, 5, 6, -57.0),
            (10, 10, 3, 4, -54.0),
            (11, 10, 5, 6, -52.0),
        ];
        let entries = rows
            .iter()
            .map(|&(index, m, num, den, rssi)| McsEntry {
                index,
                bits_per_subcarrier: m,
                coding_num: num,
                coding_den: den,
                min_rssi_dbm: rssi,
            })
            .collect();
        Self::new(entries).expect("default MCS table is valid")
    }

    /// Highest-rate entry whose sensitivity the link RSSI meets.
    pub fn select(&self, rssi_dbm: f64) -> Result<&McsEntry> {
        self.entries
            .iter()
            .rev()
            .find(|e| rssi_dbm >= e.min_rssi_dbm)
            .ok_or(Error::NoLink { rssi_dbm })
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }
}

impl Default for McsTable {
    fn default() -> Self {
        Self::default_he20()
    }
}

/// Durations of the frames making up one RTS/CTS-protected data exchange.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTimes {
    pub rts_s: f64,
    pub cts_s: f64,
    pub data_s: f64,
    pub ack_s: f64,
    /// Total duration of one successful exchange, interframe spaces included.
    pub success_s: f64,
}

/// Duration of a control frame of `body_bits` at the legacy rate.
fn control_frame_s(phy: &PhyConstants, body_bits: u64) -> f64 {
    let bits = (phy.service_field_bits + body_bits + phy.tail_bits) as f64;
    phy.phy_header_legacy_s
        + (bits / phy.legacy_bits_per_symbol as f64).ceil() * phy.symbol_legacy_s
}

/// Duration of the data frame at `data_bits_per_symbol`.
fn data_frame_s(phy: &PhyConstants, data_bits_per_symbol: f64) -> f64 {
    let bits =
        (phy.service_field_bits + phy.mac_header_bits + phy.frame_payload_bits + phy.tail_bits)
            as f64;
    phy.phy_header_he_su_s + (bits / data_bits_per_symbol).ceil() * phy.symbol_he_s
}

/// Frame timing of one successful RTS/CTS/DATA/ACK exchange at the given
/// data rate:
/// `t_s = t_RTS + 3·SIFS + t_CTS + t_DATA + t_ACK + DIFS + slot`.
pub fn frame_times(phy: &PhyConstants, data_bits_per_symbol: f64) -> FrameTimes {
    let rts_s = control_frame_s(phy, phy.rts_bits);
    let cts_s = control_frame_s(phy, phy.cts_bits);
    let ack_s = control_frame_s(phy, phy.ack_bits);
    let data_s = data_frame_s(phy, data_bits_per_symbol);
    let success_s = rts_s + 3.0 * phy.sifs_s + cts_s + data_s + ack_s + phy.difs_s + phy.slot_s;
    FrameTimes {
        rts_s,
        cts_s,
        data_s,
        ack_s,
        success_s,
    }
}

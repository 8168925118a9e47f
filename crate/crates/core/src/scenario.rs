//! Scenario file format.
//!
//! These types mirror the JSON document one to one. They carry no
//! invariants; [`crate::validate_scenario`] turns a [`Scenario`] into a
//! [`crate::ValidatedScenario`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const MINUTES_PER_DAY: u32 = 24 * 60;

/// Wall-clock time within a day, stored as minutes after midnight.
/// Serialized as `"HH:MM"`; `"24:00"` denotes the end of the day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clock(pub u32);

impl Clock {
    pub fn hm(h: u32, m: u32) -> Self {
        Clock(h * 60 + m)
    }

    pub fn minutes(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Clock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid clock time {0:?}, expected HH:MM between 00:00 and 24:00")]
pub struct ClockParseError(String);

impl FromStr for Clock {
    type Err = ClockParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ClockParseError(s.to_string());
        let (h, m) = s.split_once(':').ok_or_else(err)?;
        if h.is_empty() || h.len() > 2 || m.len() != 2 {
            return Err(err());
        }
        let h: u32 = h.parse().map_err(|_| err())?;
        let m: u32 = m.parse().map_err(|_| err())?;
        if m >= 60 || h * 60 + m > MINUTES_PER_DAY {
            return Err(err());
        }
        Ok(Clock(h * 60 + m))
    }
}

impl Serialize for Clock {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Clock {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub time_grid: TimeGridSpec,
    pub trucks: Vec<TruckSpec>,
    pub legs: Vec<LegSpec>,
    pub chargers: Vec<ChargerType>,
    pub prices: PriceSpec,
    pub locations: Vec<LocationSpec>,
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridSpec {
    pub block_minutes: u32,
    pub num_days: u32,
}

fn default_tare() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruckSpec {
    pub id: String,
    pub battery_capacity_kwh: f64,
    pub consumption_kwh_per_km_ton: f64,
    /// Defaults to a full battery.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_soe_kwh: Option<f64>,
    /// Lower bound on the weight that enters the consumption formula, so
    /// empty return legs still use energy.
    #[serde(default = "default_tare")]
    pub tare_tons: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegSpec {
    pub truck: String,
    /// Zero-based day of the analysis period.
    pub day: u32,
    /// One-based position within the truck's tour for that day.
    pub leg: u32,
    pub origin: String,
    pub destination: String,
    pub departure: Clock,
    pub arrival: Clock,
    /// Driving time; defaults to `arrival - departure`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub travel_minutes: Option<u32>,
    pub distance_km: f64,
    pub payload_tons: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargerType {
    pub id: u32,
    pub rated_power_kw: f64,
    pub capital_cost: f64,
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceSpec {
    pub resolution_minutes: u32,
    pub energy_per_kwh: EnergyPrices,
    /// Demand charge per kW of the period's maximum draw at a location.
    pub peak_per_kw: f64,
}

/// Price profiles either cover one day (repeated every day) or the whole
/// analysis period. Each block is priced at the value covering its start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyPrices {
    pub default: Vec<f64>,
    /// Overrides keyed by charger type id.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub by_type: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationKind {
    Depot,
    Retailer,
    #[default]
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocationSpec {
    pub id: String,
    #[serde(default)]
    pub kind: LocationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignMode {
    Codesign,
    Fixed,
}

/// Where a leg's charging window opens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowConvention {
    /// At the arrival of the previous leg, or the start of the day for the
    /// first leg.
    #[default]
    PreviousArrival,
    /// At the arrival block of the leg itself.
    SameLegArrival,
}

/// Unit of the demand charge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakConvention {
    /// kW drawn in a block.
    #[default]
    Power,
    /// kWh drawn in a block.
    Energy,
}

/// Charger counts keyed by location id, then charger type id.
pub type FixedCountsSpec = BTreeMap<String, BTreeMap<String, i64>>;

fn default_ratio() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub alpha: f64,
    pub slack_minutes: i64,
    pub design_mode: DesignMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_counts: Option<FixedCountsSpec>,
    #[serde(default)]
    pub window_convention: WindowConvention,
    #[serde(default)]
    pub peak_convention: PeakConvention,
    /// Multiplier applied to capital costs in the objective.
    #[serde(default = "default_ratio", skip_serializing_if = "is_one")]
    pub infra_cost_ratio: f64,
}

/// How [`quantize_times`] moves leg times onto the block grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    /// Departures down, arrivals up, travel time up.
    #[default]
    Conservative,
    /// Everything to the nearest boundary, halves up. Travel time still
    /// rounds up.
    Nearest,
}

/// Moves every leg time onto the scenario's block grid and makes travel
/// time explicit. Applying it twice is the same as applying it once.
///
/// ```
/// use chargeplan::{quantize_times, Clock, Rounding};
/// # let mut s = chargeplan::synth::generate_synthetic(&Default::default());
/// s.time_grid.block_minutes = 15;
/// s.legs[0].departure = Clock::hm(3, 7);
/// s.legs[0].arrival = Clock::hm(3, 57);
/// s.legs[0].travel_minutes = None;
/// let q = quantize_times(&s, Rounding::Conservative);
/// assert_eq!(q.legs[0].departure, Clock::hm(3, 0));
/// assert_eq!(q.legs[0].arrival, Clock::hm(4, 0));
/// assert_eq!(q.legs[0].travel_minutes, Some(60));
/// ```
pub fn quantize_times(scenario: &Scenario, rounding: Rounding) -> Scenario {
    let mut out = scenario.clone();
    let b = scenario.time_grid.block_minutes;
    if b == 0 || MINUTES_PER_DAY % b != 0 {
        return out;
    }
    let down = |m: u32| m / b * b;
    let up = |m: u32| m.div_ceil(b) * b;
    let near = |m: u32| (m + b / 2) / b * b;
    for leg in &mut out.legs {
        let dep = leg.departure.0;
        let arr = leg.arrival.0;
        let travel = leg.travel_minutes.unwrap_or(arr.saturating_sub(dep));
        let (dep, arr) = match rounding {
            Rounding::Conservative => (down(dep), up(arr)),
            Rounding::Nearest => (near(dep), near(arr)),
        };
        leg.departure = Clock(dep.min(MINUTES_PER_DAY));
        leg.arrival = Clock(arr.min(MINUTES_PER_DAY));
        leg.travel_minutes = Some(up(travel));
    }
    out
}

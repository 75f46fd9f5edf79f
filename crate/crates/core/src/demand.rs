//! Hourly heat and electricity demand from weather and annual totals.

use std::f64::consts::PI;
use std::io::{Read, Write};

use chrono::{Datelike, NaiveDateTime, Timelike};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Carrier;

/// Longest run of missing hours that is filled by interpolation.
pub const MAX_GAP_HOURS: i64 = 3;

const TEMPERATURE_BAND: (f64, f64) = (-50.0, 60.0);

#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureSeries {
    pub start: NaiveDateTime,
    /// Hours between samples.
    pub step: u32,
    /// °C.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandProfile {
    pub carrier: Carrier,
    /// Hours per value.
    pub step: f64,
    /// MW.
    pub values: Vec<f64>,
    /// MWh.
    pub annual_total: f64,
}

impl DemandProfile {
    pub fn new(carrier: Carrier, step: f64, values: Vec<f64>) -> Self {
        let annual_total = values.iter().sum::<f64>() * step;
        Self {
            carrier,
            step,
            values,
            annual_total,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Deterministic daily and seasonal modulation of electricity demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElectricityShape {
    pub daily_amplitude: f64,
    pub seasonal_amplitude: f64,
    /// Hour of day with the highest demand.
    pub peak_hour: f64,
    /// Day of year (0-based) with the highest demand.
    pub peak_day: f64,
}

impl Default for ElectricityShape {
    fn default() -> Self {
        Self {
            daily_amplitude: 0.15,
            seasonal_amplitude: 0.15,
            peak_hour: 18.0,
            peak_day: 15.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandConfig {
    /// City space heating, MWh per horizon.
    pub annual_space_heating: f64,
    /// City domestic hot water, MWh per horizon.
    pub annual_dhw: f64,
    pub annual_electricity: f64,
    /// °C.
    pub base_temperature: f64,
    pub dhn_share: f64,
    pub electricity_shape: ElectricityShape,
    /// Network losses as a fraction of delivered heat.
    pub network_loss_factor: f64,
}

/// Sinusoidal annual and daily temperature cycle with AR(1) noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticWeather {
    pub mean: f64,
    pub amplitude: f64,
    pub daily_ripple: f64,
    /// Day of year (0-based) of the seasonal minimum.
    pub coldest_day: f64,
    pub warmest_hour: f64,
    /// Stationary standard deviation of the noise in °C.
    pub noise_std: f64,
    /// Hour-to-hour autocorrelation of the noise.
    pub noise_persistence: f64,
}

impl Default for SyntheticWeather {
    fn default() -> Self {
        Self {
            mean: 9.5,
            amplitude: 9.0,
            daily_ripple: 3.0,
            coldest_day: 20.0,
            warmest_hour: 16.0,
            noise_std: 2.0,
            noise_persistence: 0.95,
        }
    }
}

impl SyntheticWeather {
    /// Hourly series of `hours` values starting at `start`.
    pub fn generate(&self, start: NaiveDateTime, hours: usize, seed: u64) -> TemperatureSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = self.noise_persistence;
        let innovation = self.noise_std * (1.0 - phi * phi).max(0.0).sqrt();
        let first_day = f64::from(start.ordinal0()) + f64::from(start.hour()) / 24.0;
        let mut noise = 0.0;
        let values = (0..hours)
            .map(|t| {
                let z: f64 = StandardNormal.sample(&mut rng);
                noise = phi * noise + innovation * z;
                let day = first_day + t as f64 / 24.0;
                let hour = (f64::from(start.hour()) + t as f64) % 24.0;
                self.mean - self.amplitude * (2.0 * PI * (day - self.coldest_day) / 365.0).cos()
                    + self.daily_ripple * (2.0 * PI * (hour - self.warmest_hour) / 24.0).cos()
                    + noise
            })
            .collect();
        TemperatureSeries {
            start,
            step: 1,
            values,
        }
    }
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(t) = chrono::DateTime::parse_from_rfc3339(s) {
        return Some(t.naive_utc());
    }
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

/// Reads a `timestamp,temperature_c` CSV at a fixed step.
///
/// Runs of up to [`MAX_GAP_HOURS`] missing hours, either absent rows or empty
/// temperature cells, are filled by linear interpolation.
pub fn load_weather(source: impl Read) -> Result<TemperatureSeries> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("weather: cannot read header: {e}")))?
        .clone();
    if headers.len() != 2 || &headers[0] != "timestamp" || &headers[1] != "temperature_c" {
        return Err(Error::Data(format!(
            "weather: expected header 'timestamp,temperature_c', found '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut rows: Vec<(usize, NaiveDateTime, Option<f64>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Data(format!("weather: {e}")))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(Error::Data(format!("weather line {line}: expected 2 fields")));
        }
        let ts = parse_timestamp(&record[0]).ok_or_else(|| {
            Error::Data(format!("weather line {line}: invalid timestamp '{}'", &record[0]))
        })?;
        let temp = match record[1].trim() {
            "" => None,
            s => {
                let v: f64 = s.parse().map_err(|_| {
                    Error::Data(format!("weather line {line}: invalid temperature '{s}'"))
                })?;
                if !(TEMPERATURE_BAND.0..=TEMPERATURE_BAND.1).contains(&v) {
                    return Err(Error::Data(format!(
                        "weather line {line}: temperature {v} °C is outside [-50, 60]"
                    )));
                }
                Some(v)
            }
        };
        rows.push((line, ts, temp));
    }
    if rows.is_empty() {
        return Err(Error::Data("weather: no data rows".into()));
    }

    let mut step_minutes = 60;
    if rows.len() > 1 {
        let (line, diff) = rows
            .windows(2)
            .map(|w| (w[1].0, (w[1].1 - w[0].1).num_minutes()))
            .min_by_key(|&(_, d)| d)
            .unwrap();
        if diff <= 0 || diff % 60 != 0 {
            return Err(Error::Data(format!(
                "weather line {line}: timestamps must increase in whole hours"
            )));
        }
        step_minutes = diff;
    }
    let step_hours = step_minutes / 60;

    let mut slots: Vec<Option<f64>> = Vec::with_capacity(rows.len());
    let start = rows[0].1;
    for &(line, ts, temp) in &rows {
        let offset = (ts - start).num_minutes();
        if offset % step_minutes != 0 {
            return Err(Error::Data(format!("weather line {line}: timestamp off the fixed step")));
        }
        let slot = (offset / step_minutes) as usize;
        if offset < 0 || slot < slots.len() {
            return Err(Error::Data(format!("weather line {line}: timestamps must increase")));
        }
        slots.resize(slot, None);
        slots.push(temp);
    }

    let mut values = Vec::with_capacity(slots.len());
    let mut k = 0;
    while k < slots.len() {
        if let Some(v) = slots[k] {
            values.push(v);
            k += 1;
            continue;
        }
        let gap_start = k;
        while k < slots.len() && slots[k].is_none() {
            k += 1;
        }
        let missing_hours = (k - gap_start) as i64 * step_hours;
        if gap_start == 0 || k == slots.len() || missing_hours > MAX_GAP_HOURS {
            let at = start + chrono::Duration::minutes(gap_start as i64 * step_minutes);
            return Err(Error::Data(format!(
                "weather: gap of {missing_hours} h starting {at} cannot be interpolated"
            )));
        }
        let (a, b) = (values[gap_start - 1], slots[k].unwrap());
        let span = (k - gap_start + 1) as f64;
        for j in 1..=(k - gap_start) {
            values.push(a + (b - a) * j as f64 / span);
        }
    }

    Ok(TemperatureSeries {
        start,
        step: step_hours as u32,
        values,
    })
}

/// Heating degrees `max(0, base - T)` per sample.
pub fn degree_weights(temps: &TemperatureSeries, base: f64) -> Vec<f64> {
    temps.values.iter().map(|t| (base - t).max(0.0)).collect()
}

/// Space heating proportional to `weights` plus flat hot water.
pub fn synth_heat(config: &DemandConfig, weights: &[f64], step: f64) -> Result<DemandProfile> {
    let h = weights.len();
    if h == 0 {
        return Err(Error::Config("heat synthesis needs at least one timestep".into()));
    }
    if config.annual_space_heating < 0.0 || config.annual_dhw < 0.0 {
        return Err(Error::Config("annual heat totals must be nonnegative".into()));
    }
    let total_weight: f64 = weights.iter().sum();
    if config.annual_space_heating > 0.0 && !(total_weight > 0.0) {
        return Err(Error::Config(
            "no heating degrees in the horizon but space heating demand is nonzero".into(),
        ));
    }
    let dhw = config.annual_dhw / (h as f64 * step);
    let values = weights
        .iter()
        .map(|w| {
            let sh = if config.annual_space_heating > 0.0 {
                config.annual_space_heating * w / (total_weight * step)
            } else {
                0.0
            };
            sh + dhw
        })
        .collect();
    Ok(DemandProfile {
        carrier: Carrier::Heat,
        step,
        values,
        annual_total: config.annual_space_heating + config.annual_dhw,
    })
}

/// Double-sine electricity profile normalised to the configured total.
///
/// Timestep `t` covers hours `t*step .. (t+1)*step` after midnight of day
/// `first_day` (0-based day of year).
pub fn synth_electricity(
    config: &DemandConfig,
    horizon: usize,
    step: f64,
    first_day: f64,
) -> Result<DemandProfile> {
    let shape = &config.electricity_shape;
    if config.annual_electricity < 0.0 {
        return Err(Error::Config("annual electricity must be nonnegative".into()));
    }
    for (label, a) in [
        ("daily_amplitude", shape.daily_amplitude),
        ("seasonal_amplitude", shape.seasonal_amplitude),
    ] {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::Config(format!(
                "electricity {label} = {a} must lie in [0, 1) to keep demand positive"
            )));
        }
    }
    if config.annual_electricity == 0.0 {
        return Ok(DemandProfile::new(Carrier::Electricity, step, vec![0.0; horizon]));
    }
    let shape_values: Vec<f64> = (0..horizon)
        .map(|t| {
            let hours = t as f64 * step;
            let hour = hours % 24.0;
            let day = first_day + hours / 24.0;
            (1.0 + shape.daily_amplitude * (2.0 * PI * (hour - shape.peak_hour) / 24.0).cos())
                * (1.0 + shape.seasonal_amplitude * (2.0 * PI * (day - shape.peak_day) / 365.0).cos())
        })
        .collect();
    let norm: f64 = shape_values.iter().sum::<f64>() * step;
    let values = shape_values
        .iter()
        .map(|s| config.annual_electricity * s / norm)
        .collect();
    Ok(DemandProfile {
        carrier: Carrier::Electricity,
        step,
        values,
        annual_total: config.annual_electricity,
    })
}

/// Pointwise scaling to the network-served share.
pub fn apply_dhn_share(profile: &DemandProfile, share: f64) -> Result<DemandProfile> {
    if !(share > 0.0 && share <= 1.0) {
        return Err(Error::Domain(format!("DHN share {share} is outside (0, 1]")));
    }
    Ok(scale(profile, share))
}

/// Adds network losses proportional to delivered heat.
pub fn apply_network_losses(profile: &DemandProfile, loss_factor: f64) -> Result<DemandProfile> {
    if !(loss_factor >= 0.0 && loss_factor.is_finite()) {
        return Err(Error::Domain(format!("network loss factor {loss_factor} must be nonnegative")));
    }
    Ok(scale(profile, 1.0 + loss_factor))
}

fn scale(profile: &DemandProfile, k: f64) -> DemandProfile {
    DemandProfile {
        carrier: profile.carrier,
        step: profile.step,
        values: profile.values.iter().map(|v| v * k).collect(),
        annual_total: profile.annual_total * k,
    }
}

/// Averages consecutive blocks of `block` values; the total is preserved.
pub fn block_average(profile: &DemandProfile, block: usize) -> Result<DemandProfile> {
    if block == 0 || profile.len() % block != 0 {
        return Err(Error::Config(format!(
            "a {}-step profile cannot be split into blocks of {block}",
            profile.len()
        )));
    }
    let values = profile
        .values
        .chunks(block)
        .map(|c| c.iter().sum::<f64>() / block as f64)
        .collect();
    Ok(DemandProfile {
        carrier: profile.carrier,
        step: profile.step * block as f64,
        values,
        annual_total: profile.annual_total,
    })
}

/// Writes `timestep,mw`.
pub fn write_profile_csv(profile: &DemandProfile, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Data(format!("profile export: {e}"));
    w.write_record(["timestep", "mw"]).map_err(err)?;
    for (t, v) in profile.values.iter().enumerate() {
        w.write_record([t.to_string(), v.to_string()]).map_err(err)?;
    }
    w.flush().map_err(|e| Error::Data(format!("profile export: {e}")))?;
    Ok(())
}

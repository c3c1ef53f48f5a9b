//! Sun position from Cooper's declination, an equation-of-time correction and
//! the spherical hour-angle relations, plus the text prompts built from it.

use std::fmt;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Scalar;

/// Amplitude of Cooper's declination formula, degrees.
pub const DECLINATION_AMPLITUDE_DEG: f64 = 23.44;

#[derive(Debug, Error, PartialEq)]
pub enum SolarError {
    #[error("day of year {0} outside [1, 366]")]
    DayOfYear(u32),
    #[error("invalid date {0}")]
    Date(String),
    #[error("invalid time {0}")]
    Time(String),
}

/// Civil date and local clock time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeStamp {
    pub year: i32,
    pub month: u32,
    pub day: u32,
    /// Fractional hours in `[0, 24)`.
    pub local_hour: f64,
    pub utc_offset_hours: f64,
}

impl TimeStamp {
    pub fn new(year: i32, month: u32, day: u32, local_hour: f64, utc_offset_hours: f64) -> Result<Self, SolarError> {
        if NaiveDate::from_ymd_opt(year, month, day).is_none() {
            return Err(SolarError::Date(format!("{year:04}-{month:02}-{day:02}")));
        }
        if !(0.0..24.0).contains(&local_hour) {
            return Err(SolarError::Time(format!("{local_hour} h")));
        }
        if !(-14.0..=14.0).contains(&utc_offset_hours) {
            return Err(SolarError::Time(format!("utc offset {utc_offset_hours} h")));
        }
        Ok(Self {
            year,
            month,
            day,
            local_hour,
            utc_offset_hours,
        })
    }

    /// Parses `YYYY-MM-DD` and `HH[:MM[:SS]]`.
    pub fn parse(date: &str, time: &str, utc_offset_hours: f64) -> Result<Self, SolarError> {
        let d = NaiveDate::parse_from_str(date.trim(), "%Y-%m-%d").map_err(|_| SolarError::Date(date.to_string()))?;
        let bad = || SolarError::Time(time.to_string());
        let mut hour = 0.0;
        let parts: Vec<&str> = time.trim().split(':').collect();
        if parts.is_empty() || parts.len() > 3 {
            return Err(bad());
        }
        for (i, part) in parts.iter().enumerate() {
            let v: u32 = part.parse().map_err(|_| bad())?;
            if i > 0 && v >= 60 {
                return Err(bad());
            }
            hour += v as f64 / 60f64.powi(i as i32);
        }
        Self::new(d.year(), d.month(), d.day(), hour, utc_offset_hours)
    }

    pub fn date(&self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, self.day).expect("validated at construction")
    }

    pub fn day_of_year(&self) -> u32 {
        self.date().ordinal()
    }

    /// Whole hour of the local clock.
    pub fn hour(&self) -> u32 {
        self.local_hour.floor() as u32
    }

    /// Hours since 0000-01-01 local time, used to compare timestamps on different dates.
    pub fn absolute_hours(&self) -> f64 {
        self.date().num_days_from_ce() as f64 * 24.0 + self.local_hour
    }
}

/// Sun angles in degrees. Azimuth is clockwise from true north.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SunPosition<T> {
    pub declination_deg: T,
    pub elevation_deg: T,
    pub azimuth_deg: T,
    pub hour_angle_deg: T,
}

impl<T: Scalar> SunPosition<T> {
    pub fn zenith_deg(&self) -> T {
        T::lit(90.0) - self.elevation_deg
    }

    pub fn is_daytime(&self) -> bool {
        self.elevation_deg > T::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolarOptions {
    pub equation_of_time: bool,
}

impl Default for SolarOptions {
    fn default() -> Self {
        Self { equation_of_time: true }
    }
}

/// Cooper's formula: δ = 23.44° · sin(360° · (284 + n) / 365).
pub fn declination<T: Scalar>(day_of_year: u32) -> Result<T, SolarError> {
    if !(1..=366).contains(&day_of_year) {
        return Err(SolarError::DayOfYear(day_of_year));
    }
    let turn = T::lit(360.0) * T::lit((284 + day_of_year) as f64) / T::lit(365.0);
    Ok(T::lit(DECLINATION_AMPLITUDE_DEG) * turn.to_radians().sin())
}

/// Equation of time in minutes (Spencer-style three-term fit).
pub fn equation_of_time_min<T: Scalar>(day_of_year: u32) -> T {
    let b = (T::lit(360.0) * T::lit(day_of_year as f64 - 81.0) / T::lit(364.0)).to_radians();
    T::lit(9.87) * (b + b).sin() - T::lit(7.53) * b.cos() - T::lit(1.5) * b.sin()
}

/// Local apparent solar time in hours.
pub fn solar_time_hours<T: Scalar>(lon_deg: T, t: &TimeStamp, opts: SolarOptions) -> T {
    let mut hours = T::lit(t.local_hour) - T::lit(t.utc_offset_hours) + lon_deg / T::lit(15.0);
    if opts.equation_of_time {
        hours = hours + equation_of_time_min::<T>(t.day_of_year()) / T::lit(60.0);
    }
    hours
}

pub fn sun_position<T: Scalar>(lat_deg: T, lon_deg: T, t: &TimeStamp, opts: SolarOptions) -> SunPosition<T> {
    let decl = declination::<T>(t.day_of_year()).expect("TimeStamp yields a valid day of year");
    let hour_angle = T::lit(15.0) * (solar_time_hours(lon_deg, t, opts) - T::lit(12.0));
    position_from_angles(lat_deg, decl, hour_angle)
}

/// Elevation and azimuth from latitude, declination and hour angle (degrees).
pub fn position_from_angles<T: Scalar>(lat_deg: T, decl_deg: T, hour_angle_deg: T) -> SunPosition<T> {
    let (lat, decl, h) = (lat_deg.to_radians(), decl_deg.to_radians(), hour_angle_deg.to_radians());
    let sin_el = lat.sin() * decl.sin() + lat.cos() * decl.cos() * h.cos();
    let elevation = sin_el.max(-T::one()).min(T::one()).asin();
    let east = -h.sin() * decl.cos();
    let north = decl.sin() * lat.cos() - decl.cos() * lat.sin() * h.cos();
    let full = T::lit(360.0);
    let mut azimuth = east.atan2(north).to_degrees() % full;
    if azimuth < T::zero() {
        azimuth = azimuth + full;
    }
    if azimuth >= full {
        azimuth = azimuth - full;
    }
    SunPosition {
        declination_deg: decl_deg,
        elevation_deg: elevation.to_degrees(),
        azimuth_deg: azimuth,
        hour_angle_deg,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptTemplate {
    Declination,
    Angle,
    TimeOfDay,
}

impl PromptTemplate {
    pub const ALL: [PromptTemplate; 3] = [Self::Declination, Self::Angle, Self::TimeOfDay];
}

impl fmt::Display for PromptTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Declination => "declination",
            Self::Angle => "angle",
            Self::TimeOfDay => "time_of_day",
        })
    }
}

impl std::str::FromStr for PromptTemplate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "declination" => Ok(Self::Declination),
            "angle" => Ok(Self::Angle),
            "time_of_day" => Ok(Self::TimeOfDay),
            other => Err(format!("unknown prompt template '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextPrompt {
    pub text: String,
    pub template_id: PromptTemplate,
}

/// Rounds to `decimals` places and clears the sign of a rounded zero.
fn rounded(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (v * scale).round() / scale + 0.0
}

/// Renders one of the three prompt templates. The angle template uses elevation.
pub fn format_prompt<T: Scalar>(sun: &SunPosition<T>, t: &TimeStamp, template: PromptTemplate) -> TextPrompt {
    let text = match template {
        PromptTemplate::Declination => {
            format!("Solar declination: {:.1}°", rounded(sun.declination_deg.as_f64(), 1))
        }
        PromptTemplate::Angle => format!("Angle: {:.0}°", rounded(sun.elevation_deg.as_f64(), 0)),
        PromptTemplate::TimeOfDay => {
            let minutes = ((t.local_hour * 60.0).round() as u32) % (24 * 60);
            let (h24, mm) = (minutes / 60, minutes % 60);
            let suffix = if h24 < 12 { "AM" } else { "PM" };
            let h12 = match h24 % 12 {
                0 => 12,
                h => h,
            };
            format!("Right now, it is {h12}:{mm:02} {suffix} in a day.")
        }
    };
    TextPrompt {
        text,
        template_id: template,
    }
}

//! Affine tariffs and surplus gains relative to a baseline tariff.

use std::fmt;
use std::str::FromStr;

use crate::model::{LinearDemandModel, ModelError};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TariffFamily {
    /// Welfare-optimal price plus connection charge.
    TwoPartOptimal,
    /// Ramsey price, no connection charge.
    LinearOptimal,
    /// Single flat rate, no connection charge.
    FlatLinear,
    /// Ramsey price on top of a fixed connection charge.
    FixedChargeTwoPart,
    /// Fixed connection charge plus an adjusted flat rate.
    AdjustedFlat,
}

impl TariffFamily {
    pub const ALL: [TariffFamily; 5] = [
        TariffFamily::TwoPartOptimal,
        TariffFamily::LinearOptimal,
        TariffFamily::FlatLinear,
        TariffFamily::FixedChargeTwoPart,
        TariffFamily::AdjustedFlat,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            TariffFamily::TwoPartOptimal => "two-part-optimal",
            TariffFamily::LinearOptimal => "linear-optimal",
            TariffFamily::FlatLinear => "flat-linear",
            TariffFamily::FixedChargeTwoPart => "fixed-A-two-part",
            TariffFamily::AdjustedFlat => "adjusted-flat",
        }
    }

    pub fn requires_flat_price(self) -> bool {
        matches!(self, TariffFamily::FlatLinear | TariffFamily::AdjustedFlat)
    }

    pub fn forbids_connection_charge(self) -> bool {
        matches!(self, TariffFamily::LinearOptimal | TariffFamily::FlatLinear)
    }
}

impl fmt::Display for TariffFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for TariffFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "two-part-optimal" | "two-part" => Ok(TariffFamily::TwoPartOptimal),
            "linear-optimal" | "linear" => Ok(TariffFamily::LinearOptimal),
            "flat-linear" | "flat" => Ok(TariffFamily::FlatLinear),
            "fixed-a-two-part" | "fixed-a" => Ok(TariffFamily::FixedChargeTwoPart),
            "adjusted-flat" => Ok(TariffFamily::AdjustedFlat),
            other => Err(format!("unknown tariff family `{other}`")),
        }
    }
}

/// `T(q) = A + πᵀq`, with `A` in $/customer/cycle and `π` in $/kWh.
#[derive(Debug, Clone, PartialEq)]
pub struct Tariff {
    connection_charge: f64,
    prices: Vector,
    family: TariffFamily,
}

impl Tariff {
    pub fn new(
        connection_charge: f64,
        prices: Vector,
        family: TariffFamily,
    ) -> Result<Self, ModelError> {
        if !connection_charge.is_finite() || prices.iter().any(|p| !p.is_finite()) {
            return Err(ModelError::NonFinite("tariff".into()));
        }
        if prices.is_empty() {
            return Err(ModelError::NoPeriods);
        }
        if family.requires_flat_price() && prices.iter().any(|&p| p != prices[0]) {
            return Err(ModelError::InvalidTariff(format!(
                "{family} requires equal prices"
            )));
        }
        if family.forbids_connection_charge() && connection_charge != 0.0 {
            return Err(ModelError::InvalidTariff(format!(
                "{family} has no connection charge"
            )));
        }
        Ok(Self {
            connection_charge,
            prices,
            family,
        })
    }

    /// Flat rate `1·rate` over `periods` with connection charge `A`.
    pub fn flat(
        connection_charge: f64,
        rate: f64,
        periods: usize,
        family: TariffFamily,
    ) -> Result<Self, ModelError> {
        Self::new(connection_charge, Vector::repeat(periods, rate), family)
    }

    pub fn connection_charge(&self) -> f64 {
        self.connection_charge
    }

    pub fn prices(&self) -> &Vector {
        &self.prices
    }

    pub fn family(&self) -> TariffFamily {
        self.family
    }
}

/// Surplus gains of a tariff over a baseline, in $/cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct WelfareReport {
    pub baseline: Tariff,
    pub delta_cs: f64,
    pub delta_rs: f64,
    pub delta_sw: f64,
    pub rs_absolute: f64,
}

/// Consumer, retailer and total surplus gains of `tariff` relative to `baseline`.
///
/// The consumers' benefit constant cancels in the differences, so the gains
/// are exact even though absolute consumer surplus is unidentified.
pub fn welfare_gains(
    model: &LinearDemandModel,
    tariff: &Tariff,
    baseline: &Tariff,
) -> Result<WelfareReport, ModelError> {
    let cs = model.consumer_surplus_offset(tariff.prices(), tariff.connection_charge())?;
    let cs_base = model.consumer_surplus_offset(baseline.prices(), baseline.connection_charge())?;
    let rs = model.retailer_surplus(tariff.prices(), tariff.connection_charge())?;
    let rs_base = model.retailer_surplus(baseline.prices(), baseline.connection_charge())?;
    let delta_cs = cs - cs_base;
    let delta_rs = rs - rs_base;
    Ok(WelfareReport {
        baseline: baseline.clone(),
        delta_cs,
        delta_rs,
        delta_sw: delta_cs + delta_rs,
        rs_absolute: rs,
    })
}

//! Material models: conductivity and exchange laws, and the
//! energy/temperature maps for each species.

use crate::error::{Error, Result};
use crate::grid::{RegionId, Species};

/// Scalar coefficient law `c` or `coef * T^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientLaw {
    Constant(f64),
    Power { coef: f64, exponent: f64 },
}

impl CoefficientLaw {
    pub fn is_constant(&self) -> bool {
        matches!(self, CoefficientLaw::Constant(_))
    }

    /// Evaluate at temperature `t`. Power laws need `t > 0`; the returned
    /// error carries no location, callers attach one.
    #[inline]
    pub fn eval(&self, t: f64, species: Species) -> Result<f64> {
        match *self {
            CoefficientLaw::Constant(c) => Ok(c),
            CoefficientLaw::Power { coef, exponent } => {
                if !(t > 0.0) {
                    return Err(positivity(species, t));
                }
                Ok(coef * t.powf(exponent))
            }
        }
    }

    /// `d/dT` of the law.
    pub fn derivative(&self, t: f64, species: Species) -> Result<f64> {
        match *self {
            CoefficientLaw::Constant(_) => Ok(0.0),
            CoefficientLaw::Power { coef, exponent } => {
                if !(t > 0.0) {
                    return Err(positivity(species, t));
                }
                Ok(coef * exponent * t.powf(exponent - 1.0))
            }
        }
    }
}

/// Energy density as a function of temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyLaw {
    /// `W = capacity * T`
    Linear { capacity: f64 },
    /// `W = coef * T^4` (radiation energy density)
    Quartic { coef: f64 },
}

impl EnergyLaw {
    #[inline]
    pub fn energy(&self, t: f64) -> f64 {
        match *self {
            EnergyLaw::Linear { capacity } => capacity * t,
            EnergyLaw::Quartic { coef } => {
                let t2 = t * t;
                coef * t2 * t2
            }
        }
    }

    #[inline]
    pub fn temperature(&self, w: f64, species: Species) -> Result<f64> {
        match *self {
            EnergyLaw::Linear { capacity } => Ok(w / capacity),
            EnergyLaw::Quartic { coef } => {
                if !(w > 0.0) {
                    return Err(positivity(species, w));
                }
                Ok((w / coef).sqrt().sqrt())
            }
        }
    }

    /// `dW/dT`
    #[inline]
    pub fn heat_capacity(&self, t: f64) -> f64 {
        match *self {
            EnergyLaw::Linear { capacity } => capacity,
            EnergyLaw::Quartic { coef } => 4.0 * coef * t * t * t,
        }
    }
}

fn positivity(species: Species, value: f64) -> Error {
    Error::Positivity {
        species,
        value,
        location: crate::error::Location::Point,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExchangePair {
    /// electron-ion, coefficient `omega_i`
    ElectronIon,
    /// electron-radiation, coefficient `omega_r`
    ElectronRadiation,
}

impl ExchangePair {
    pub const ALL: [ExchangePair; 2] = [ExchangePair::ElectronIon, ExchangePair::ElectronRadiation];

    /// The species exchanging energy with electrons.
    pub fn partner(self) -> Species {
        match self {
            ExchangePair::ElectronIon => Species::Ion,
            ExchangePair::ElectronRadiation => Species::Radiation,
        }
    }
}

/// Coefficient laws for one material region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMaterial {
    pub conductivity: [CoefficientLaw; 3],
    /// Indexed by [`ExchangePair`]: `[omega_i, omega_r]`, functions of `T_e`.
    pub exchange: [CoefficientLaw; 2],
    pub energy: [EnergyLaw; 3],
}

impl RegionMaterial {
    /// Constant conductivities, constant exchange and linear energy laws.
    pub fn constant(k: [f64; 3], omega: [f64; 2], c: [f64; 3]) -> Self {
        RegionMaterial {
            conductivity: k.map(CoefficientLaw::Constant),
            exchange: omega.map(CoefficientLaw::Constant),
            energy: c.map(|capacity| EnergyLaw::Linear { capacity }),
        }
    }
}

/// Spatial arrangement of regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLayout {
    Uniform,
    /// Region 0 for `y <= 250`, region 1 above.
    TwoLayer,
    /// Nested boxes: 0 inner core, 1 middle shell, 2 outer shell.
    IcfShells,
}

impl RegionLayout {
    pub fn region_of(self, p: [f64; 3]) -> RegionId {
        match self {
            RegionLayout::Uniform => RegionId(0),
            RegionLayout::TwoLayer => RegionId(if p[1] <= 250.0 { 0 } else { 1 }),
            RegionLayout::IcfShells => {
                let ax = p[0].abs();
                if ax >= 95.0 || p[1] >= 95.0 || p[2] >= 95.0 {
                    RegionId(2)
                } else if ax <= 85.0 && p[1] <= 85.0 && p[2] <= 85.0 {
                    RegionId(0)
                } else {
                    RegionId(1)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialModel {
    pub name: String,
    pub regions: Vec<RegionMaterial>,
    pub layout: RegionLayout,
}

/// Radiation energy constant of the ICF materials.
pub const ICF_RADIATION_CONSTANT: f64 = 0.007568;

impl MaterialModel {
    /// Degenerate linear model used with the manufactured solution:
    /// `c = 1`, `k = 1`, `omega = 1`, linear energy for every species.
    pub fn linear_mms() -> Self {
        MaterialModel {
            name: "linear-mms".into(),
            regions: vec![RegionMaterial::constant([1.0; 3], [1.0; 2], [1.0; 3])],
            layout: RegionLayout::Uniform,
        }
    }

    /// Two-material planar model.
    pub fn model2d() -> Self {
        MaterialModel {
            name: "model2d".into(),
            regions: vec![
                RegionMaterial::constant([10.0, 10.0, 100.0], [10.0, 100.0], [0.05; 3]),
                RegionMaterial::constant([10.0, 10.0, 10.0], [10.0, 100.0], [1.0; 3]),
            ],
            layout: RegionLayout::TwoLayer,
        }
    }

    /// Three-shell capsule model with power-law coefficients.
    pub fn icf() -> Self {
        let rho = [0.09, 2.50, 1.10];
        let gamma_e = [35.0, 40.0, 45.0];
        let gamma_i = [35.0, 40.0, 70.0];
        let a_e = [200.0, 60.0, 81.0];
        let a_i = [5.0, 1.7e-4, 2.0e-2];
        let a_r = [1.8e7 / rho[0], 9.0e2 / f64::powf(rho[1], 1.5), 2.1e3 / (rho[2] * rho[2])];
        let beta = [1.0, 2.4, 3.0];
        let a_ei = [2000.0, 4000.0, 7000.0];
        let a_er = [10.0, 140.0, 79.0];
        let regions = (0..3)
            .map(|r| {
                let rho2 = rho[r] * rho[r];
                RegionMaterial {
                    conductivity: [
                        CoefficientLaw::Power { coef: a_e[r], exponent: 2.5 },
                        CoefficientLaw::Power { coef: a_i[r], exponent: 2.5 },
                        CoefficientLaw::Power { coef: a_r[r], exponent: beta[r] + 3.0 },
                    ],
                    exchange: [
                        CoefficientLaw::Power { coef: rho2 * a_ei[r], exponent: -2.0 / 3.0 },
                        CoefficientLaw::Power { coef: rho2 * a_er[r], exponent: -0.5 },
                    ],
                    energy: [
                        EnergyLaw::Linear { capacity: rho[r] * 1.5 * gamma_e[r] },
                        EnergyLaw::Linear { capacity: rho[r] * 1.5 * gamma_i[r] },
                        EnergyLaw::Quartic { coef: ICF_RADIATION_CONSTANT },
                    ],
                }
            })
            .collect();
        MaterialModel {
            name: "icf".into(),
            regions,
            layout: RegionLayout::IcfShells,
        }
    }

    /// Single-region model with user-supplied laws.
    pub fn custom(region: RegionMaterial) -> Result<Self> {
        let model = MaterialModel {
            name: "custom".into(),
            regions: vec![region],
            layout: RegionLayout::Uniform,
        };
        model.validate()?;
        Ok(model)
    }

    /// All constants strictly positive.
    pub fn validate(&self) -> Result<()> {
        let law_ok = |l: &CoefficientLaw| match *l {
            CoefficientLaw::Constant(c) => c > 0.0 && c.is_finite(),
            CoefficientLaw::Power { coef, exponent } => coef > 0.0 && coef.is_finite() && exponent.is_finite(),
        };
        for (r, m) in self.regions.iter().enumerate() {
            if !m.conductivity.iter().chain(m.exchange.iter()).all(law_ok) {
                return Err(Error::config(format!("region {r}: coefficients must be positive")));
            }
            for e in &m.energy {
                let c = match *e {
                    EnergyLaw::Linear { capacity } => capacity,
                    EnergyLaw::Quartic { coef } => coef,
                };
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::config(format!("region {r}: heat capacity must be positive")));
                }
            }
        }
        Ok(())
    }

    pub fn region_of(&self, point: [f64; 3]) -> RegionId {
        self.layout.region_of(point)
    }

    #[inline]
    pub fn region(&self, id: RegionId) -> &RegionMaterial {
        &self.regions[id.0]
    }

    #[inline]
    pub fn conductivity(&self, region: RegionId, species: Species, t: f64) -> Result<f64> {
        self.region(region).conductivity[species.index()].eval(t, species)
    }

    #[inline]
    pub fn exchange_coeff(&self, region: RegionId, pair: ExchangePair, t_e: f64) -> Result<f64> {
        self.region(region).exchange[pair as usize].eval(t_e, Species::Electron)
    }

    pub fn exchange_derivative(&self, region: RegionId, pair: ExchangePair, t_e: f64) -> Result<f64> {
        self.region(region).exchange[pair as usize].derivative(t_e, Species::Electron)
    }

    pub fn energy_from_temperature(&self, region: RegionId, species: Species, t: f64) -> f64 {
        self.region(region).energy[species.index()].energy(t)
    }

    pub fn temperature_from_energy(&self, region: RegionId, species: Species, w: f64) -> Result<f64> {
        self.region(region).energy[species.index()].temperature(w, species)
    }

    pub fn heat_capacity(&self, region: RegionId, species: Species, t: f64) -> f64 {
        self.region(region).energy[species.index()].heat_capacity(t)
    }

    /// True when the species conductivity is temperature independent in every region.
    pub fn conductivity_is_constant(&self, species: Species) -> bool {
        self.regions.iter().all(|r| r.conductivity[species.index()].is_constant())
    }

    pub fn exchange_is_constant(&self) -> bool {
        self.regions.iter().all(|r| r.exchange.iter().all(CoefficientLaw::is_constant))
    }

    pub fn energy(&self, region: RegionId, t: [f64; 3]) -> [f64; 3] {
        let m = self.region(region);
        [0, 1, 2].map(|s| m.energy[s].energy(t[s]))
    }

    pub fn temperature(&self, region: RegionId, w: [f64; 3]) -> Result<[f64; 3]> {
        let m = self.region(region);
        Ok([
            m.energy[0].temperature(w[0], Species::Electron)?,
            m.energy[1].temperature(w[1], Species::Ion)?,
            m.energy[2].temperature(w[2], Species::Radiation)?,
        ])
    }
}

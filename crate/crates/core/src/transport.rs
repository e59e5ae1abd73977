//! Truck loading, per-ton variable haulage cost and supplier-plant distances.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datamodel::{BiomassId, BiomassSpec, Location};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Variable cost of a loaded 10-wheel truck (fuel, tires, maintenance), THB/km.
pub const TRUCK_COST_PER_KM: f64 = 6.561;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruckSpec {
    pub name: String,
    /// Weight limit, tons.
    pub payload: f64,
    /// Cargo volume, m³; tankers are weight-limited only.
    pub cargo_volume: Option<f64>,
    /// THB per km.
    pub cost_per_km: f64,
}

impl TruckSpec {
    /// 10-wheel flatbed: 16 t payload, 36.4 m³ cargo box.
    pub fn flatbed10w() -> Self {
        TruckSpec {
            name: "flatbed10w".into(),
            payload: 16.0,
            cargo_volume: Some(36.4),
            cost_per_km: TRUCK_COST_PER_KM,
        }
    }

    /// Petroleum tank truck used for molasses.
    pub fn tanker() -> Self {
        TruckSpec {
            name: "tanker".into(),
            payload: 28.5,
            cargo_volume: None,
            cost_per_km: TRUCK_COST_PER_KM,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.payload > 0.0
            && self.cost_per_km > 0.0
            && self.cargo_volume.map_or(true, |v| v > 0.0)
    }
}

/// Tons of `biomass` one truck carries: the lesser of its weight and volume limits.
pub fn truck_load(biomass: &BiomassSpec, truck: &TruckSpec) -> f64 {
    match truck.cargo_volume {
        Some(volume) => truck.payload.min(biomass.density * volume / 1000.0),
        None => truck.payload,
    }
}

/// Variable haulage cost, THB per km per ton.
pub fn unit_cost(biomass: &BiomassSpec, truck: &TruckSpec) -> f64 {
    truck.cost_per_km / truck_load(biomass, truck)
}

/// Rounds to two decimals for display.
pub fn round2(value: f64) -> f64 {
    (value * 100.0).round() / 100.0
}

/// Which distance source a provider consults first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    MatrixFile,
    Haversine,
    RoutingAdapter,
}

/// What to do when the matrix or router has no answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceFallback {
    Haversine,
    Error,
}

/// Truck choices and distance settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportConfig {
    pub flatbed: TruckSpec,
    pub tanker: TruckSpec,
    /// Road distance over great-circle distance.
    pub winding_factor: f64,
    pub fallback: DistanceFallback,
}

impl Default for TransportConfig {
    fn default() -> Self {
        TransportConfig {
            flatbed: TruckSpec::flatbed10w(),
            tanker: TruckSpec::tanker(),
            winding_factor: 1.3,
            fallback: DistanceFallback::Haversine,
        }
    }
}

impl TransportConfig {
    /// Molasses travels by tanker, everything else by flatbed.
    pub fn truck_for(&self, biomass: BiomassId) -> &TruckSpec {
        if biomass == BiomassId::Molasses {
            &self.tanker
        } else {
            &self.flatbed
        }
    }

    pub fn unit_cost(&self, biomass: &BiomassSpec) -> f64 {
        unit_cost(biomass, self.truck_for(biomass.id))
    }

    /// Haulage cost of `tons` over `km`, THB.
    pub fn shipment_cost(&self, biomass: &BiomassSpec, tons: f64, km: f64) -> f64 {
        self.unit_cost(biomass) * tons * km
    }
}

/// Haulage cost of `tons` over `km` on a given truck, THB.
pub fn shipment_cost(biomass: &BiomassSpec, truck: &TruckSpec, tons: f64, km: f64) -> f64 {
    unit_cost(biomass, truck) * tons * km
}

/// Great-circle distance, km.
pub fn haversine_km(a: Location, b: Location) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error("no distance entry for supplier {supplier} -> plant {plant}")]
    MissingMatrixEntry { supplier: u32, plant: u32 },
    #[error("routing failed: {0}")]
    Routing(String),
    #[error("{file}:{row}: {message}")]
    BadMatrix {
        file: String,
        row: usize,
        message: String,
    },
}

/// External road-routing backend.
pub trait RoutingAdapter: Send + Sync {
    fn route_km(&self, from: Location, to: Location) -> Result<f64, TransportError>;
}

/// Answers supplier-plant road distances.
pub struct DistanceProvider {
    mode: DistanceMode,
    matrix: HashMap<(u32, u32), f64>,
    router: Option<Box<dyn RoutingAdapter>>,
    winding_factor: f64,
    fallback: DistanceFallback,
}

impl fmt::Debug for DistanceProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistanceProvider")
            .field("mode", &self.mode)
            .field("matrix_entries", &self.matrix.len())
            .field("winding_factor", &self.winding_factor)
            .field("fallback", &self.fallback)
            .finish()
    }
}

impl DistanceProvider {
    /// Great-circle distance times `winding_factor`.
    pub fn haversine(winding_factor: f64) -> Self {
        DistanceProvider {
            mode: DistanceMode::Haversine,
            matrix: HashMap::new(),
            router: None,
            winding_factor,
            fallback: DistanceFallback::Haversine,
        }
    }

    /// Matrix lookups keyed by (supplier id, plant id).
    pub fn matrix(matrix: HashMap<(u32, u32), f64>, winding_factor: f64, fallback: DistanceFallback) -> Self {
        DistanceProvider {
            mode: DistanceMode::MatrixFile,
            matrix,
            router: None,
            winding_factor,
            fallback,
        }
    }

    pub fn routing(router: Box<dyn RoutingAdapter>, winding_factor: f64, fallback: DistanceFallback) -> Self {
        DistanceProvider {
            mode: DistanceMode::RoutingAdapter,
            matrix: HashMap::new(),
            router: Some(router),
            winding_factor,
            fallback,
        }
    }

    pub fn from_config(config: &TransportConfig) -> Self {
        Self::haversine(config.winding_factor)
    }

    /// Loads `distances.csv` (`supplier_id,plant_id,km`).
    pub fn from_csv_path(path: &Path, config: &TransportConfig) -> Result<Self, TransportError> {
        let label = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|e| TransportError::BadMatrix {
            file: label.clone(),
            row: 0,
            message: e.to_string(),
        })?;
        Self::from_csv(&label, file, config)
    }

    pub fn from_csv(file: &str, source: impl Read, config: &TransportConfig) -> Result<Self, TransportError> {
        #[derive(Deserialize)]
        struct Entry {
            supplier_id: u32,
            plant_id: u32,
            km: f64,
        }
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
        let mut matrix = HashMap::new();
        for (i, result) in reader.deserialize::<Entry>().enumerate() {
            let row = i + 2;
            let entry = result.map_err(|e| TransportError::BadMatrix {
                file: file.into(),
                row,
                message: e.to_string(),
            })?;
            if !(entry.km.is_finite() && entry.km >= 0.0) {
                return Err(TransportError::BadMatrix {
                    file: file.into(),
                    row,
                    message: format!("distance must be >= 0 km, got {}", entry.km),
                });
            }
            matrix.insert((entry.supplier_id, entry.plant_id), entry.km);
        }
        Ok(Self::matrix(matrix, config.winding_factor, config.fallback))
    }

    pub fn mode(&self) -> DistanceMode {
        self.mode
    }

    /// Checks that every (supplier, plant) pair resolves when no fallback is allowed.
    pub fn check_complete(&self, suppliers: &[u32], plants: &[u32]) -> Result<(), TransportError> {
        if self.mode != DistanceMode::MatrixFile || self.fallback == DistanceFallback::Haversine {
            return Ok(());
        }
        for &s in suppliers {
            for &p in plants {
                if !self.matrix.contains_key(&(s, p)) {
                    return Err(TransportError::MissingMatrixEntry { supplier: s, plant: p });
                }
            }
        }
        Ok(())
    }

    fn estimate(&self, from: Location, to: Location) -> f64 {
        haversine_km(from, to) * self.winding_factor
    }

    /// Road distance between a supplier and an existing plant, km.
    pub fn distance(
        &self,
        supplier: (u32, Location),
        plant: (u32, Location),
    ) -> Result<f64, TransportError> {
        match self.mode {
            DistanceMode::Haversine => Ok(self.estimate(supplier.1, plant.1)),
            DistanceMode::MatrixFile => match self.matrix.get(&(supplier.0, plant.0)) {
                Some(&km) => Ok(km),
                None if self.fallback == DistanceFallback::Haversine => Ok(self.estimate(supplier.1, plant.1)),
                None => Err(TransportError::MissingMatrixEntry {
                    supplier: supplier.0,
                    plant: plant.0,
                }),
            },
            DistanceMode::RoutingAdapter => self.between(supplier.1, plant.1),
        }
    }

    /// Road distance between two arbitrary points (used for candidate sites), km.
    pub fn between(&self, from: Location, to: Location) -> Result<f64, TransportError> {
        match (&self.router, self.mode) {
            (Some(router), DistanceMode::RoutingAdapter) => match router.route_km(from, to) {
                Ok(km) => Ok(km),
                Err(_) if self.fallback == DistanceFallback::Haversine => Ok(self.estimate(from, to)),
                Err(e) => Err(e),
            },
            _ => Ok(self.estimate(from, to)),
        }
    }
}

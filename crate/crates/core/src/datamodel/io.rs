//! CSV ingestion for supplier availability and plant registers.
//!
//! `suppliers.csv` holds one row per (province, biomass, month):
//! `province_id,name,lat,lon,biomass,month,available_tons`.
//!
//! `plants.csv` holds one row per plant:
//! `plant_id,kind,technology,capacity,capacity_unit,max_inventory_tons,holding_cost_thb_ton_month,lat,lon`
//! with an optional trailing `efficiency` column. Blank holding costs fall
//! back to the configured default.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use thiserror::Error;

use super::{
    builtin_spec, validate_plant, BiomassId, DataError, Dataset, Location, Plant, PlantKind,
    SupplierProfile, Technology, TimeGrid,
};
use crate::config::Config;

pub const SUPPLIER_COLUMNS: [&str; 7] =
    ["province_id", "name", "lat", "lon", "biomass", "month", "available_tons"];
pub const PLANT_COLUMNS: [&str; 9] = [
    "plant_id",
    "kind",
    "technology",
    "capacity",
    "capacity_unit",
    "max_inventory_tons",
    "holding_cost_thb_ton_month",
    "lat",
    "lon",
];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{} validation error(s):\n{}", .0.len(), .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<DataError>),
}

impl DatasetError {
    pub fn errors(&self) -> &[DataError] {
        match self {
            DatasetError::Invalid(errors) => errors,
            DatasetError::Io { .. } => &[],
        }
    }
}

/// Reads and validates a dataset from the two CSV files.
pub fn load_dataset(
    supplier_file: &Path,
    plant_file: &Path,
    config: &Config,
) -> Result<Dataset, DatasetError> {
    let read = |path: &Path| -> Result<String, DatasetError> {
        let mut text = String::new();
        File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|source| DatasetError::Io {
                path: path.display().to_string(),
                source,
            })?;
        Ok(text)
    };
    let suppliers = read(supplier_file)?;
    let plants = read(plant_file)?;
    load_dataset_from_readers(
        &file_label(supplier_file),
        suppliers.as_bytes(),
        &file_label(plant_file),
        plants.as_bytes(),
        config,
    )
}

/// Writes the supplier table of `dataset` in the `suppliers.csv` layout.
pub fn write_suppliers_csv(dataset: &Dataset) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(SUPPLIER_COLUMNS).expect("in-memory write");
    for s in &dataset.suppliers {
        for (b, spec) in dataset.biomass.iter().enumerate() {
            for (t, tons) in s.availability[b].iter().enumerate() {
                w.write_record([
                    s.province_id.to_string(),
                    s.name.clone(),
                    s.location.lat.to_string(),
                    s.location.lon.to_string(),
                    spec.id.key().to_string(),
                    (t + 1).to_string(),
                    tons.to_string(),
                ])
                .expect("in-memory write");
            }
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Writes the plant register of `dataset` in the `plants.csv` layout.
pub fn write_plants_csv(dataset: &Dataset) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = PLANT_COLUMNS.to_vec();
    header.push("efficiency");
    w.write_record(&header).expect("in-memory write");
    for p in &dataset.plants {
        w.write_record([
            p.plant_id.to_string(),
            p.kind.to_string(),
            p.technology.code().to_string(),
            p.capacity.to_string(),
            p.kind.capacity_unit().to_string(),
            p.max_inventory.to_string(),
            p.holding_cost.map(|h| h.to_string()).unwrap_or_default(),
            p.location.lat.to_string(),
            p.location.lon.to_string(),
            p.efficiency_override.map(|e| e.to_string()).unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Same as [`load_dataset`] over in-memory CSV sources.
pub fn load_dataset_from_readers(
    supplier_label: &str,
    supplier_csv: impl Read,
    plant_label: &str,
    plant_csv: impl Read,
    config: &Config,
) -> Result<Dataset, DatasetError> {
    let timegrid = TimeGrid::calendar();
    let mut errors = Vec::new();
    let suppliers = parse_suppliers(supplier_label, supplier_csv, timegrid.len(), &mut errors);
    let plants = parse_plants(plant_label, plant_csv, &mut errors);
    if !errors.is_empty() {
        return Err(DatasetError::Invalid(errors));
    }

    let (biomass_ids, raw_suppliers) = suppliers.expect("no errors implies parsed suppliers");
    let plants = plants.expect("no errors implies parsed plants");
    let biomass: Vec<_> = biomass_ids.iter().map(|&id| builtin_spec(id)).collect();
    let suppliers = raw_suppliers
        .into_values()
        .map(|raw| SupplierProfile {
            province_id: raw.province_id,
            name: raw.name,
            location: raw.location,
            availability: biomass_ids
                .iter()
                .map(|id| {
                    raw.availability
                        .get(id)
                        .cloned()
                        .unwrap_or_else(|| vec![0.0; timegrid.len()])
                })
                .collect(),
        })
        .collect();

    Dataset::new(biomass, suppliers, plants, timegrid, config.demand).map_err(DatasetError::Invalid)
}

struct RawSupplier {
    province_id: u32,
    name: String,
    location: Location,
    availability: BTreeMap<BiomassId, Vec<f64>>,
}

fn column_indices(
    file: &str,
    headers: &csv::StringRecord,
    required: &[&str],
    errors: &mut Vec<DataError>,
) -> Option<Vec<usize>> {
    let mut indices = Vec::with_capacity(required.len());
    let mut missing = false;
    for column in required {
        match headers.iter().position(|h| h.trim() == *column) {
            Some(i) => indices.push(i),
            None => {
                missing = true;
                errors.push(DataError::MissingColumn {
                    file: file.to_string(),
                    column: column.to_string(),
                });
            }
        }
    }
    (!missing).then_some(indices)
}

/// Row-level field access that records typed errors.
struct Row<'a> {
    file: &'a str,
    line: usize,
    record: &'a csv::StringRecord,
}

impl Row<'_> {
    fn text(&self, idx: usize) -> &str {
        self.record.get(idx).unwrap_or("").trim()
    }

    fn invalid(&self, field: &str, message: String) -> DataError {
        DataError::Invalid {
            file: self.file.to_string(),
            row: self.line,
            field: field.to_string(),
            message,
        }
    }

    fn bad_unit(&self, field: &str, message: String) -> DataError {
        DataError::BadUnit {
            file: self.file.to_string(),
            row: self.line,
            field: field.to_string(),
            message,
        }
    }

    fn number(&self, idx: usize, field: &str) -> Result<f64, DataError> {
        let raw = self.text(idx);
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.invalid(field, format!("expected a number, got `{raw}`")))
    }

    fn integer<T: std::str::FromStr>(&self, idx: usize, field: &str) -> Result<T, DataError> {
        let raw = self.text(idx);
        raw.parse::<T>()
            .map_err(|_| self.invalid(field, format!("expected an integer, got `{raw}`")))
    }

    fn location(&self, lat_idx: usize, lon_idx: usize) -> Result<Location, DataError> {
        let loc = Location::new(self.number(lat_idx, "lat")?, self.number(lon_idx, "lon")?);
        if loc.is_valid() {
            Ok(loc)
        } else {
            Err(self.bad_unit("lat/lon", format!("coordinates out of range: ({}, {})", loc.lat, loc.lon)))
        }
    }
}

type ParsedSuppliers = (BTreeSet<BiomassId>, BTreeMap<u32, RawSupplier>);

fn parse_suppliers(
    file: &str,
    source: impl Read,
    n_months: usize,
    errors: &mut Vec<DataError>,
) -> Option<ParsedSuppliers> {
    let start = errors.len();
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => {
            errors.push(DataError::Invalid {
                file: file.into(),
                row: 1,
                field: "header".into(),
                message: e.to_string(),
            });
            return None;
        }
    };
    let cols = column_indices(file, &headers, &SUPPLIER_COLUMNS, errors)?;
    let mut biomass_ids = BTreeSet::new();
    let mut suppliers: BTreeMap<u32, RawSupplier> = BTreeMap::new();
    let mut seen = BTreeSet::new();

    for (i, result) in reader.records().enumerate() {
        let line = i + 2;
        let record = match result {
            Ok(r) => r,
            Err(e) => {
                errors.push(DataError::Invalid {
                    file: file.into(),
                    row: line,
                    field: "record".into(),
                    message: e.to_string(),
                });
                continue;
            }
        };
        let row = Row { file, line, record: &record };
        match parse_supplier_row(&row, &cols, n_months) {
            Ok((province_id, name, location, biomass, month, tons)) => {
                if !seen.insert((province_id, biomass, month)) {
                    errors.push(row.invalid(
                        "month",
                        format!("duplicate row for supplier {province_id}, {biomass}, month {}", month + 1),
                    ));
                    continue;
                }
                biomass_ids.insert(biomass);
                let entry = suppliers.entry(province_id).or_insert_with(|| RawSupplier {
                    province_id,
                    name: name.clone(),
                    location,
                    availability: BTreeMap::new(),
                });
                if entry.name != name || entry.location != location {
                    errors.push(row.invalid(
                        "name",
                        format!("supplier {province_id} has inconsistent name or coordinates"),
                    ));
                }
                entry
                    .availability
                    .entry(biomass)
                    .or_insert_with(|| vec![0.0; n_months])[month] = tons;
            }
            Err(e) => errors.push(e),
        }
    }
    (errors.len() == start).then_some((biomass_ids, suppliers))
}

fn parse_supplier_row(
    row: &Row<'_>,
    cols: &[usize],
    n_months: usize,
) -> Result<(u32, String, Location, BiomassId, usize, f64), DataError> {
    let province_id: u32 = row.integer(cols[0], "province_id")?;
    let name = row.text(cols[1]).to_string();
    let location = row.location(cols[2], cols[3])?;
    let raw_biomass = row.text(cols[4]);
    let biomass = raw_biomass.parse::<BiomassId>().map_err(|value| DataError::UnknownBiomass {
        file: row.file.to_string(),
        row: row.line,
        field: "biomass".into(),
        value,
    })?;
    let month: usize = row.integer(cols[5], "month")?;
    if !(1..=n_months).contains(&month) {
        return Err(row.invalid("month", format!("month must be in 1..={n_months}, got {month}")));
    }
    let tons = row.number(cols[6], "available_tons")?;
    if tons < 0.0 {
        return Err(row.bad_unit(
            "available_tons",
            format!("availability must be >= 0 tons, got {tons}"),
        ));
    }
    Ok((province_id, name, location, biomass, month - 1, tons))
}

fn parse_plants(file: &str, source: impl Read, errors: &mut Vec<DataError>) -> Option<Vec<Plant>> {
    let start = errors.len();
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => {
            errors.push(DataError::Invalid {
                file: file.into(),
                row: 1,
                field: "header".into(),
                message: e.to_string(),
            });
            return None;
        }
    };
    let cols = column_indices(file, &headers, &PLANT_COLUMNS, errors)?;
    let efficiency_col = headers.iter().position(|h| h.trim() == "efficiency");
    let mut plants = Vec::new();
    for (i, result) in reader.records().enumerate() {
        let line = i + 2;
        let record = match result {
            Ok(r) => r,
            Err(e) => {
                errors.push(DataError::Invalid {
                    file: file.into(),
                    row: line,
                    field: "record".into(),
                    message: e.to_string(),
                });
                continue;
            }
        };
        let row = Row { file, line, record: &record };
        match parse_plant_row(&row, &cols, efficiency_col) {
            Ok(plant) => plants.push(plant),
            Err(e) => errors.push(e),
        }
    }
    (errors.len() == start).then_some(plants)
}

fn parse_plant_row(row: &Row<'_>, cols: &[usize], efficiency_col: Option<usize>) -> Result<Plant, DataError> {
    let plant_id: u32 = row.integer(cols[0], "plant_id")?;
    let kind: PlantKind = row.text(cols[1]).parse().map_err(|m| row.invalid("kind", m))?;
    let q: u8 = row.integer(cols[2], "technology")?;
    let technology = Technology::from_code(q)
        .ok_or_else(|| row.invalid("technology", format!("technology must be 1..=5, got {q}")))?;
    let capacity = row.number(cols[3], "capacity")?;
    let unit = row.text(cols[4]);
    if unit != kind.capacity_unit() {
        return Err(row.bad_unit(
            "capacity_unit",
            format!("{kind} capacity must be in {}, got `{unit}`", kind.capacity_unit()),
        ));
    }
    let max_inventory = row.number(cols[5], "max_inventory_tons")?;
    let holding_cost = if row.text(cols[6]).is_empty() {
        None
    } else {
        Some(row.number(cols[6], "holding_cost_thb_ton_month")?)
    };
    let location = row.location(cols[7], cols[8])?;
    let efficiency_override = match efficiency_col {
        Some(c) if !row.text(c).is_empty() => Some(row.number(c, "efficiency")?),
        _ => None,
    };
    let plant = Plant {
        plant_id,
        kind,
        technology,
        capacity,
        max_inventory,
        holding_cost,
        location,
        efficiency_override,
    };
    validate_plant(&plant, row.file, row.line)?;
    Ok(plant)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SUPPLIERS: &str = "\
province_id,name,lat,lon,biomass,month,available_tons
1,Bangkok,13.7563,100.5018,rice_husk,1,120
1,Bangkok,13.7563,100.5018,rice_husk,2,80
2,Chiang Mai,18.7883,98.9853,molasses,1,300
";
    const PLANTS: &str = "\
plant_id,kind,technology,capacity,capacity_unit,max_inventory_tons,holding_cost_thb_ton_month,lat,lon
10,biomass-power,1,9.5,MW,500,40,14.0,100.6
20,ethanol,5,150000,L_per_day,2000,,15.2,100.1
";

    fn load(suppliers: &str, plants: &str) -> Result<Dataset, DatasetError> {
        let mut config = Config::default();
        config.demand = crate::datamodel::DemandTargets {
            biomass_elec_mw: 5.0,
            biogas_elec_mw: 0.0,
            ethanol_ml_per_day: 0.1,
        };
        load_dataset_from_readers(
            "suppliers.csv",
            suppliers.as_bytes(),
            "plants.csv",
            plants.as_bytes(),
            &config,
        )
    }

    #[test]
    fn loads_two_by_two_fixture() {
        let ds = load(SUPPLIERS, PLANTS).unwrap();
        assert_eq!(ds.suppliers.len(), 2);
        assert_eq!(ds.plants.len(), 2);
        assert_eq!(
            ds.biomass.iter().map(|b| b.id).collect::<Vec<_>>(),
            vec![BiomassId::RiceHusk, BiomassId::Molasses]
        );
        let husk = ds.biomass_index(BiomassId::RiceHusk).unwrap();
        assert_eq!(ds.suppliers[0].availability[husk][..3], [120.0, 80.0, 0.0]);
        assert_eq!(ds.suppliers[1].annual(husk), 0.0);
        assert_eq!(ds.plants[1].holding_cost, None);
        assert_eq!(ds.plants[0].holding_cost, Some(40.0));
    }

    #[test]
    fn ethanol_plant_with_gasification_is_rejected() {
        let plants = PLANTS.replace("20,ethanol,5", "20,ethanol,2");
        let err = load(SUPPLIERS, &plants).unwrap_err();
        assert!(matches!(
            &err.errors()[0],
            DataError::EligibilityViolation { file, row: 3, field, .. }
                if file == "plants.csv" && field == "technology"
        ));
    }

    #[test]
    fn negative_availability_names_the_cell() {
        let suppliers = SUPPLIERS.replace("rice_husk,2,80", "rice_husk,2,-1");
        let err = load(&suppliers, PLANTS).unwrap_err();
        match &err.errors()[0] {
            DataError::BadUnit { file, row, field, .. } => {
                assert_eq!(file, "suppliers.csv");
                assert_eq!(*row, 3);
                assert_eq!(field, "available_tons");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_column_and_unknown_biomass() {
        let err = load(&SUPPLIERS.replace("available_tons", "tons"), PLANTS).unwrap_err();
        assert!(matches!(&err.errors()[0], DataError::MissingColumn { column, .. } if column == "available_tons"));

        let err = load(&SUPPLIERS.replace("molasses", "sawdust"), PLANTS).unwrap_err();
        assert!(matches!(
            &err.errors()[0],
            DataError::UnknownBiomass { row: 4, value, .. } if value == "sawdust"
        ));
    }

    #[test]
    fn wrong_capacity_unit_is_bad_unit() {
        let err = load(SUPPLIERS, &PLANTS.replace("9.5,MW", "9.5,kW")).unwrap_err();
        assert!(matches!(&err.errors()[0], DataError::BadUnit { field, .. } if field == "capacity_unit"));
    }

    #[test]
    fn all_row_errors_are_collected() {
        let suppliers = SUPPLIERS
            .replace("rice_husk,2,80", "rice_husk,2,-1")
            .replace("molasses", "sawdust");
        let err = load(&suppliers, PLANTS).unwrap_err();
        assert_eq!(err.errors().len(), 2);
    }
}

//! Seeded synthetic instances for desk-scale runs.
//!
//! Each residue has a harvest season of four contiguous months carrying 70%
//! of the annual supply; the other eight months share the remaining 30%.
//! Supply is sized at 1.2x the feedstock the plant fleet would burn at full
//! derated output, and demand targets at 60% of derated fleet capacity, so
//! the off-season forces stock to be carried between months.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    builtin_spec, BiomassId, BiomassSpec, DataError, Dataset, DemandTargets, Location, Plant,
    PlantKind, SupplierProfile, Technology, TimeGrid,
};
use crate::conversion::yield_per_ton;
use crate::scenarios::ScenarioConfig;

const PEAK_MONTHS: usize = 4;
const PEAK_SHARE: f64 = 0.70;
const SUPPLY_MARGIN: f64 = 1.2;
const DEMAND_SHARE: f64 = 0.6;
const INVENTORY_MONTHS: f64 = 2.0;

/// Generates a deterministic dataset for `seed`.
///
/// `n_biomass` residues are drawn from the reference table (at most 17).
pub fn synth_dataset(
    seed: u64,
    n_suppliers: usize,
    n_biomass: usize,
    n_plants: usize,
) -> Result<Dataset, DataError> {
    if n_suppliers == 0 || n_biomass == 0 || n_plants == 0 {
        return Err(DataError::SizeOutOfRange(format!(
            "sizes must be >= 1, got ({n_suppliers}, {n_biomass}, {n_plants})"
        )));
    }
    if n_biomass > BiomassId::ALL.len() {
        return Err(DataError::SizeOutOfRange(format!("n_biomass must be <= 17, got {n_biomass}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = ScenarioConfig::default();
    let timegrid = TimeGrid::calendar();
    let biomass = pick_biomass(&mut rng, n_biomass);
    let plants = make_plants(&mut rng, &biomass, n_plants);

    // Feedstock need of each plant at full derated output, split evenly
    // across the residues it can take.
    let mut need = vec![0.0; biomass.len()];
    let mut plant_need = vec![0.0; plants.len()];
    for (j, plant) in plants.iter().enumerate() {
        let eligible: Vec<usize> = (0..biomass.len())
            .filter(|&b| biomass[b].supports(plant.technology))
            .collect();
        let annual_output = annual_capacity(plant, &timegrid, config.availability_factor);
        let eta = config.efficiency_for(plant);
        for &b in &eligible {
            let per_ton = yield_per_ton(&biomass[b], plant.technology, eta)
                .expect("eligible pairs have a yield");
            let tons = annual_output / per_ton / eligible.len() as f64;
            need[b] += tons;
            plant_need[j] += tons;
        }
    }

    let plants: Vec<Plant> = plants
        .into_iter()
        .zip(&plant_need)
        .map(|(mut p, &tons)| {
            p.max_inventory = round_to(INVENTORY_MONTHS * tons / 12.0, 1.0);
            p
        })
        .collect();

    let profiles: Vec<Vec<f64>> = biomass.iter().map(|_| seasonal_profile(&mut rng)).collect();
    let mut suppliers: Vec<SupplierProfile> = (0..n_suppliers)
        .map(|i| SupplierProfile {
            province_id: i as u32 + 1,
            name: format!("Province {:02}", i + 1),
            location: random_location(&mut rng),
            availability: vec![vec![0.0; timegrid.len()]; biomass.len()],
        })
        .collect();
    for (b, profile) in profiles.iter().enumerate() {
        let weights: Vec<f64> = (0..n_suppliers).map(|_| rng.gen_range(0.5..1.5)).collect();
        let total_weight: f64 = weights.iter().sum();
        let supply = need[b] * SUPPLY_MARGIN;
        for (s, w) in suppliers.iter_mut().zip(&weights) {
            for (t, share) in profile.iter().enumerate() {
                s.availability[b][t] = round_to(supply * w / total_weight * share, 0.01);
            }
        }
    }

    let mut demand = DemandTargets::ZERO;
    for p in &plants {
        match p.kind {
            PlantKind::BiomassPower => demand.biomass_elec_mw += p.capacity,
            PlantKind::BiogasPower => demand.biogas_elec_mw += p.capacity,
            PlantKind::Ethanol => demand.ethanol_ml_per_day += p.capacity / 1e6,
        }
    }
    demand.biomass_elec_mw = round_to(demand.biomass_elec_mw * config.availability_factor * DEMAND_SHARE, 0.001);
    demand.biogas_elec_mw = round_to(demand.biogas_elec_mw * config.availability_factor * DEMAND_SHARE, 0.001);
    demand.ethanol_ml_per_day = round_to(demand.ethanol_ml_per_day * DEMAND_SHARE, 1e-6);

    suppliers.sort_by_key(|s| s.province_id);
    Dataset::new(biomass, suppliers, plants, timegrid, demand).map_err(|mut errors| errors.swap_remove(0))
}

fn round_to(value: f64, step: f64) -> f64 {
    (value / step).round() * step
}

/// Output of a plant over the grid at derated capacity: MWh or liters.
fn annual_capacity(plant: &Plant, grid: &TimeGrid, availability_factor: f64) -> f64 {
    if plant.kind.is_power() {
        plant.capacity * grid.total_hours() * availability_factor
    } else {
        plant.capacity * grid.total_days()
    }
}

/// Chooses residues so that as many plant kinds as possible are supplied:
/// one fermentable, one digestible, then the rest at random.
fn pick_biomass(rng: &mut ChaCha8Rng, n: usize) -> Vec<BiomassSpec> {
    let mut fermentable: Vec<BiomassId> = BiomassId::ALL.into_iter().filter(|b| b.is_ethanol_feedstock()).collect();
    let mut digestible: Vec<BiomassId> = BiomassId::ALL
        .into_iter()
        .filter(|b| builtin_spec(*b).supports(Technology::AnaerobicDigestion))
        .collect();
    fermentable.shuffle(rng);
    digestible.shuffle(rng);

    let mut chosen = Vec::with_capacity(n);
    chosen.push(digestible[0]);
    if n >= 2 {
        chosen.push(fermentable[0]);
    }
    let mut rest: Vec<BiomassId> = BiomassId::ALL.into_iter().filter(|b| !chosen.contains(b)).collect();
    rest.shuffle(rng);
    chosen.extend(rest.into_iter().take(n.saturating_sub(chosen.len())));
    chosen.sort();
    chosen.into_iter().map(builtin_spec).collect()
}

fn make_plants(rng: &mut ChaCha8Rng, biomass: &[BiomassSpec], n: usize) -> Vec<Plant> {
    let supported = |tech: Technology| biomass.iter().any(|b| b.supports(tech));
    let kinds: Vec<PlantKind> = [
        (PlantKind::BiomassPower, Technology::Gasification),
        (PlantKind::BiogasPower, Technology::AnaerobicDigestion),
        (PlantKind::Ethanol, Technology::Fermentation),
    ]
    .into_iter()
    .filter(|(_, tech)| supported(*tech))
    .map(|(kind, _)| kind)
    .collect();

    (0..n)
        .map(|j| {
            let kind = kinds[j % kinds.len()];
            let (technology, capacity) = match kind {
                PlantKind::BiomassPower => {
                    let q = rng.gen_range(1..=3u8);
                    (Technology::from_code(q).unwrap(), round_to(rng.gen_range(5.0..20.0), 0.1))
                }
                PlantKind::BiogasPower => (Technology::AnaerobicDigestion, round_to(rng.gen_range(0.5..2.0), 0.01)),
                PlantKind::Ethanol => (Technology::Fermentation, round_to(rng.gen_range(50_000.0..200_000.0), 1000.0)),
            };
            Plant {
                plant_id: 101 + j as u32,
                kind,
                technology,
                capacity,
                max_inventory: 0.0,
                holding_cost: Some(round_to(rng.gen_range(30.0..80.0), 1.0)),
                location: random_location(rng),
                efficiency_override: None,
            }
        })
        .collect()
}

/// Shares of annual supply per month; sums to one.
fn seasonal_profile(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let start = rng.gen_range(0..12);
    let mut shares = vec![(1.0 - PEAK_SHARE) / (12 - PEAK_MONTHS) as f64; 12];
    for k in 0..PEAK_MONTHS {
        shares[(start + k) % 12] = PEAK_SHARE / PEAK_MONTHS as f64;
    }
    shares
}

/// A point inside Thailand's bounding box.
fn random_location(rng: &mut ChaCha8Rng) -> Location {
    Location::new(
        round_to(rng.gen_range(6.0..20.0), 1e-4),
        round_to(rng.gen_range(98.0..105.0), 1e-4),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_dataset() {
        assert_eq!(synth_dataset(7, 2, 2, 2).unwrap(), synth_dataset(7, 2, 2, 2).unwrap());
    }

    #[test]
    fn shapes_follow_sizes() {
        let ds = synth_dataset(3, 6, 5, 8).unwrap();
        assert_eq!(ds.suppliers.len(), 6);
        assert_eq!(ds.biomass.len(), 5);
        assert_eq!(ds.plants.len(), 8);
        for s in &ds.suppliers {
            assert_eq!(s.availability.len(), 5);
            assert!(s.availability.iter().all(|row| row.len() == 12));
        }
        assert!(ds.validate().is_empty());
    }

    #[test]
    fn different_seeds_differ() {
        let a = synth_dataset(7, 6, 5, 8).unwrap();
        let b = synth_dataset(8, 6, 5, 8).unwrap();
        let differs = a.suppliers.iter().zip(&b.suppliers).any(|(x, y)| x.availability != y.availability);
        assert!(differs);
    }

    #[test]
    fn harvest_season_holds_seventy_percent() {
        let ds = synth_dataset(11, 3, 4, 4).unwrap();
        for b in 0..ds.biomass.len() {
            let mut monthly: Vec<f64> = (0..12).map(|t| ds.available(b, t)).collect();
            let total: f64 = monthly.iter().sum();
            monthly.sort_by(|x, y| y.total_cmp(x));
            let peak: f64 = monthly[..4].iter().sum();
            assert!((peak / total - 0.7).abs() < 1e-3, "{}", peak / total);
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(synth_dataset(1, 0, 2, 2), Err(DataError::SizeOutOfRange(_))));
        assert!(matches!(synth_dataset(1, 2, 18, 2), Err(DataError::SizeOutOfRange(_))));
    }

    #[test]
    fn single_biomass_still_valid() {
        for seed in 0..5 {
            assert!(synth_dataset(seed, 1, 1, 3).is_ok());
        }
    }
}

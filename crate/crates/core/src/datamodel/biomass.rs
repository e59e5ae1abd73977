//! The 17 agricultural residues the network trades, with their prices,
//! heating values, methane yields, bulk densities and ethanol coefficients.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DataError;

/// Conversion technology used by a plant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Technology {
    DirectFiring,
    Gasification,
    Cogeneration,
    AnaerobicDigestion,
    Fermentation,
}

impl Technology {
    pub const ALL: [Technology; 5] = [
        Technology::DirectFiring,
        Technology::Gasification,
        Technology::Cogeneration,
        Technology::AnaerobicDigestion,
        Technology::Fermentation,
    ];

    /// Numeric code `q` (1..=5).
    pub fn code(self) -> u8 {
        match self {
            Technology::DirectFiring => 1,
            Technology::Gasification => 2,
            Technology::Cogeneration => 3,
            Technology::AnaerobicDigestion => 4,
            Technology::Fermentation => 5,
        }
    }

    pub fn from_code(q: u8) -> Option<Self> {
        Self::ALL.get(q.checked_sub(1)? as usize).copied()
    }

    /// Technologies 1-3 burn or gasify the residue and need its heating value.
    pub fn is_thermal(self) -> bool {
        self.code() <= 3
    }
}

impl fmt::Display for Technology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// Small set of technology codes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TechSet(u8);

impl TechSet {
    pub const EMPTY: TechSet = TechSet(0);

    pub fn from_techs(techs: &[Technology]) -> Self {
        techs.iter().fold(Self::EMPTY, |s, &t| s.with(t))
    }

    pub fn with(self, tech: Technology) -> Self {
        TechSet(self.0 | (1 << tech.code()))
    }

    pub fn without(self, tech: Technology) -> Self {
        TechSet(self.0 & !(1 << tech.code()))
    }

    pub fn contains(self, tech: Technology) -> bool {
        self.0 & (1 << tech.code()) != 0
    }

    pub fn iter(self) -> impl Iterator<Item = Technology> {
        Technology::ALL.into_iter().filter(move |t| self.contains(*t))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for TechSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|t| t.code())).finish()
    }
}

impl fmt::Display for TechSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let codes: Vec<String> = self.iter().map(|t| t.code().to_string()).collect();
        write!(f, "{}", codes.join(";"))
    }
}

impl FromStr for TechSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut set = TechSet::EMPTY;
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let tech = part
                .parse::<u8>()
                .ok()
                .and_then(Technology::from_code)
                .ok_or_else(|| format!("invalid technology code `{part}`"))?;
            set = set.with(tech);
        }
        Ok(set)
    }
}

macro_rules! biomass_ids {
    ($($variant:ident => $key:literal, $name:literal;)*) => {
        /// One of the 17 residue types.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum BiomassId {
            $($variant,)*
        }

        impl BiomassId {
            /// All types in table order.
            pub const ALL: [BiomassId; 17] = [$(BiomassId::$variant,)*];

            /// Machine key used in CSV files, e.g. `rice_straw`.
            pub fn key(self) -> &'static str {
                match self {
                    $(BiomassId::$variant => $key,)*
                }
            }

            /// Human-readable name, e.g. `rice straw`.
            pub fn name(self) -> &'static str {
                match self {
                    $(BiomassId::$variant => $name,)*
                }
            }
        }
    };
}

biomass_ids! {
    RiceStraw => "rice_straw", "rice straw";
    RiceHusk => "rice_husk", "rice husk";
    SugarcaneLeaves => "sugarcane_leaves", "sugarcane leaves";
    Bagasse => "bagasse", "bagasse";
    Molasses => "molasses", "molasses";
    CornLeavesAndTops => "corn_leaves_and_tops", "corn leaves and tops";
    CornCob => "corn_cob", "corn cob";
    PeeledCassava => "peeled_cassava", "peeled cassava";
    CassavaRhizome => "cassava_rhizome", "cassava rhizome";
    CassavaFiber => "cassava_fiber", "cassava fiber";
    CassavaPeels => "cassava_peels", "cassava peels";
    OilPalmBunch => "oil_palm_bunch", "oil palm bunch";
    OilPalmFiber => "oil_palm_fiber", "oil palm fiber";
    OilPalmShell => "oil_palm_shell", "oil palm shell";
    CoconutBunch => "coconut_bunch", "coconut bunch";
    CoconutBract => "coconut_bract", "coconut bract";
    CoconutShell => "coconut_shell", "coconut shell";
}

impl BiomassId {
    /// Position in table order.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Molasses and peeled cassava are only fermented.
    pub fn is_ethanol_feedstock(self) -> bool {
        matches!(self, BiomassId::Molasses | BiomassId::PeeledCassava)
    }

    /// Woody residues with no anaerobic digestion route.
    pub fn excluded_from_biogas(self) -> bool {
        matches!(
            self,
            BiomassId::OilPalmShell
                | BiomassId::CoconutBunch
                | BiomassId::CoconutBract
                | BiomassId::CoconutShell
        )
    }
}

impl fmt::Display for BiomassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for BiomassId {
    type Err = String;

    /// Accepts either the key (`rice_straw`) or the table name (`rice straw`),
    /// case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        BiomassId::ALL
            .into_iter()
            .find(|id| id.key() == norm)
            .ok_or_else(|| s.to_string())
    }
}

impl Serialize for BiomassId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.key())
    }
}

impl<'de> Deserialize<'de> for BiomassId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse()
            .map_err(|s| serde::de::Error::custom(format!("unknown biomass `{s}`")))
    }
}

/// Physical and economic data for one residue type.
#[derive(Debug, Clone, PartialEq)]
pub struct BiomassSpec {
    pub id: BiomassId,
    /// THB/ton at the roadside.
    pub price: f64,
    /// MJ/ton; absent for residues that are never burned.
    pub heat_capacity: Option<f64>,
    /// m³ methane per kg.
    pub methane_content: Option<f64>,
    /// MJ/ton recoverable through anaerobic digestion.
    pub biogas_heat_equiv: Option<f64>,
    /// Bulk density, kg/m³.
    pub density: f64,
    /// kg of feedstock per liter of ethanol.
    pub ethanol_coeff: Option<f64>,
    pub eligible_techs: TechSet,
}

impl BiomassSpec {
    pub fn supports(&self, tech: Technology) -> bool {
        self.eligible_techs.contains(tech)
    }

    /// The technology set implied by which conversion data is present.
    pub fn implied_techs(&self) -> TechSet {
        let mut set = TechSet::EMPTY;
        if self.heat_capacity.is_some() {
            set = set
                .with(Technology::DirectFiring)
                .with(Technology::Gasification)
                .with(Technology::Cogeneration);
        }
        if self.biogas_heat_equiv.is_some() {
            set = set.with(Technology::AnaerobicDigestion);
        }
        if self.ethanol_coeff.is_some() {
            set = set.with(Technology::Fermentation);
        }
        set
    }

    /// Checks the per-type invariants. `row` locates the spec for error messages.
    pub fn validate(&self, file: &str, row: usize) -> Result<(), DataError> {
        let fail = |field: &str, message: String| DataError::EligibilityViolation {
            file: file.to_string(),
            row,
            field: field.to_string(),
            message,
        };
        let bad = |field: &str, message: String| DataError::BadUnit {
            file: file.to_string(),
            row,
            field: field.to_string(),
            message,
        };

        if !(self.price.is_finite() && self.price >= 0.0) {
            return Err(bad("price", format!("price must be >= 0, got {}", self.price)));
        }
        if !(self.density.is_finite() && self.density > 0.0) {
            return Err(bad("density", format!("density must be > 0, got {}", self.density)));
        }
        for (field, value) in [
            ("heat_capacity", self.heat_capacity),
            ("methane_content", self.methane_content),
            ("biogas_heat_equiv", self.biogas_heat_equiv),
            ("ethanol_coeff", self.ethanol_coeff),
        ] {
            if let Some(v) = value {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(bad(field, format!("must be a finite non-negative number, got {v}")));
                }
            }
        }
        if let Some(w) = self.ethanol_coeff {
            if w <= 0.0 {
                return Err(bad("ethanol_coeff", format!("must be > 0, got {w}")));
            }
        }

        if self.id.is_ethanol_feedstock() {
            if self.heat_capacity.is_some() {
                return Err(fail(
                    "heat_capacity",
                    format!("{} has no heat conversion route", self.id.name()),
                ));
            }
            if self.ethanol_coeff.is_none() {
                return Err(fail(
                    "ethanol_coeff",
                    format!("{} requires an ethanol coefficient", self.id.name()),
                ));
            }
        } else if self.ethanol_coeff.is_some() {
            return Err(fail(
                "ethanol_coeff",
                format!("{} is not an ethanol feedstock", self.id.name()),
            ));
        }
        if self.id.excluded_from_biogas() && self.biogas_heat_equiv.is_some() {
            return Err(fail(
                "biogas_heat_equiv",
                format!("{} has no biogas conversion route", self.id.name()),
            ));
        }
        if self.biogas_heat_equiv.is_some() && self.methane_content.is_none() {
            return Err(fail(
                "methane_content",
                "biogas heat equivalent requires a methane content".to_string(),
            ));
        }
        let implied = self.implied_techs();
        if implied != self.eligible_techs {
            return Err(fail(
                "eligible_techs",
                format!(
                    "{} declares technologies {:?} but its data supports {:?}",
                    self.id.name(),
                    self.eligible_techs,
                    implied
                ),
            ));
        }
        Ok(())
    }
}

/// Price, heat capacity, methane content, biogas heat equivalent, density,
/// ethanol coefficient.
type Row = (
    BiomassId,
    f64,
    Option<f64>,
    Option<f64>,
    Option<f64>,
    f64,
    Option<f64>,
);

const TABLE: [Row; 17] = {
    use BiomassId::*;
    [
        (RiceStraw, 2000.0, Some(12_330.0), Some(0.226), Some(108.0402), 178.255, None),
        (RiceHusk, 1500.0, Some(13_520.0), Some(0.019), Some(9.0830), 356.065, None),
        (SugarcaneLeaves, 800.0, Some(15_480.0), Some(0.148), Some(70.7520), 190.43, None),
        (Bagasse, 500.0, Some(7_370.0), Some(0.185), Some(88.4400), 160.0, None),
        (Molasses, 10_410.0, None, Some(0.324), None, 1441.0, Some(3.8)),
        (CornLeavesAndTops, 1500.0, Some(9_830.0), Some(0.199), Some(95.1327), 81.61, None),
        (CornCob, 500.0, Some(9_620.0), Some(0.1), Some(47.8054), 182.38, None),
        (PeeledCassava, 2700.0, None, Some(0.262), None, 637.38, Some(5.975)),
        (CassavaRhizome, 1800.0, Some(5_490.0), Some(0.09676), Some(46.2565), 238.0, None),
        (CassavaFiber, 3300.0, Some(1_470.0), Some(0.167), Some(79.8350), 712.50, None),
        (CassavaPeels, 2800.0, Some(1_490.0), Some(0.078), Some(37.2882), 247.87, None),
        (OilPalmBunch, 50.0, Some(7_240.0), Some(0.1996), Some(95.4196), 380.0, None),
        (OilPalmFiber, 1500.0, Some(11_400.0), Some(0.1664), Some(79.5482), 250.0, None),
        (OilPalmShell, 3200.0, Some(16_900.0), None, None, 400.0, None),
        (CoconutBunch, 1000.0, Some(15_400.0), None, None, 355.0, None),
        (CoconutBract, 5000.0, Some(16_230.0), None, None, 151.91, None),
        (CoconutShell, 1000.0, Some(17_930.0), None, None, 920.53, None),
    ]
};

/// The reference table of all 17 residue types.
pub fn builtin_biomass_table() -> Vec<BiomassSpec> {
    TABLE
        .iter()
        .map(
            |&(id, price, heat, methane, biogas, density, ethanol)| {
                let mut spec = BiomassSpec {
                    id,
                    price,
                    heat_capacity: heat,
                    methane_content: methane,
                    biogas_heat_equiv: biogas,
                    density,
                    ethanol_coeff: ethanol,
                    eligible_techs: TechSet::EMPTY,
                };
                spec.eligible_techs = spec.implied_techs();
                spec
            },
        )
        .collect()
}

/// Reference spec for a single type.
pub fn builtin_spec(id: BiomassId) -> BiomassSpec {
    builtin_biomass_table().swap_remove(id.index())
}

#[derive(Debug, Serialize, Deserialize)]
struct BiomassRecord {
    biomass: BiomassId,
    price: f64,
    heat_capacity: Option<f64>,
    methane_content: Option<f64>,
    biogas_heat_equiv: Option<f64>,
    density: f64,
    ethanol_coeff: Option<f64>,
    techs: String,
}

/// Writes a biomass table as CSV (`techs` as `;`-separated codes).
pub fn write_biomass_csv(specs: &[BiomassSpec]) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for spec in specs {
        writer
            .serialize(BiomassRecord {
                biomass: spec.id,
                price: spec.price,
                heat_capacity: spec.heat_capacity,
                methane_content: spec.methane_content,
                biogas_heat_equiv: spec.biogas_heat_equiv,
                density: spec.density,
                ethanol_coeff: spec.ethanol_coeff,
                techs: spec.eligible_techs.to_string(),
            })
            .expect("writing to a Vec cannot fail");
    }
    String::from_utf8(writer.into_inner().expect("flush to Vec")).expect("csv output is UTF-8")
}

/// Parses and validates a biomass table written by [`write_biomass_csv`].
pub fn parse_biomass_csv(file: &str, text: &str) -> Result<Vec<BiomassSpec>, DataError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut specs = Vec::new();
    for result in reader.deserialize::<BiomassRecord>() {
        let row = specs.len() + 2;
        let record = result.map_err(|e| DataError::Invalid {
            file: file.to_string(),
            row,
            field: "record".to_string(),
            message: e.to_string(),
        })?;
        let eligible_techs = record.techs.parse().map_err(|message| DataError::Invalid {
            file: file.to_string(),
            row,
            field: "techs".to_string(),
            message,
        })?;
        let spec = BiomassSpec {
            id: record.biomass,
            price: record.price,
            heat_capacity: record.heat_capacity,
            methane_content: record.methane_content,
            biogas_heat_equiv: record.biogas_heat_equiv,
            density: record.density,
            ethanol_coeff: record.ethanol_coeff,
            eligible_techs,
        };
        spec.validate(file, row)?;
        specs.push(spec);
    }
    Ok(specs)
}

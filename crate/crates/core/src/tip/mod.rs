//! The timetabling integer program: construction, closed-form size formulas
//! and decoding of solutions into timetables.

mod build;
mod counts;
mod decode;
mod io;
mod weights;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use build::{build_tip, TipError};
pub use counts::{expected_counts, FamilyCount, TipCounts};
pub use decode::{decode_solution, DecodeError};
pub use io::{parse_timetable, read_index_map, write_index_map, write_timetable, FileError};
pub use weights::{Weights, WeightsError};

use crate::mipcore::VarId;
use crate::model::{Day, Group};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CapacityMode {
    #[default]
    Hard,
    Soft,
}

impl std::str::FromStr for CapacityMode {
    type Err = String;

    fn from_str(s: &str) -> Result<CapacityMode, String> {
        match s {
            "hard" => Ok(CapacityMode::Hard),
            "soft" => Ok(CapacityMode::Soft),
            _ => Err(format!("capacity mode must be hard or soft, got {s:?}")),
        }
    }
}

/// Constraint families: fourteen hard and six soft.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    H1,
    H2,
    H3,
    H4,
    H5,
    H6,
    H7,
    H8,
    H9,
    H10,
    H11,
    H12,
    H13,
    H14,
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
}

impl Family {
    pub const ALL: [Family; 20] = [
        Family::H1,
        Family::H2,
        Family::H3,
        Family::H4,
        Family::H5,
        Family::H6,
        Family::H7,
        Family::H8,
        Family::H9,
        Family::H10,
        Family::H11,
        Family::H12,
        Family::H13,
        Family::H14,
        Family::S1,
        Family::S2,
        Family::S3,
        Family::S4,
        Family::S5,
        Family::S6,
    ];

    pub const HARD: [Family; 14] = [
        Family::H1,
        Family::H2,
        Family::H3,
        Family::H4,
        Family::H5,
        Family::H6,
        Family::H7,
        Family::H8,
        Family::H9,
        Family::H10,
        Family::H11,
        Family::H12,
        Family::H13,
        Family::H14,
    ];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Variable lookup for a built program. Section, professor and room
/// indices refer to the instance; group indices refer to `groups`. Slots
/// are `Slot::index()` values.
#[derive(Debug, Clone, Default)]
pub struct TipIndex {
    pub groups: Vec<Group>,
    /// (section, slot, room)
    pub z: BTreeMap<(usize, usize, usize), VarId>,
    /// (professor, slot)
    pub w: BTreeMap<(usize, usize), VarId>,
    /// (group, section)
    pub x: BTreeMap<(usize, usize), VarId>,
    /// (group, slot, section)
    pub u: BTreeMap<(usize, usize, usize), VarId>,
    /// (lab section, day)
    pub y1: BTreeMap<(usize, usize), VarId>,
    /// (lab section, day, room)
    pub y2: BTreeMap<(usize, usize, usize), VarId>,
    /// (professor, day)
    pub y3: BTreeMap<(usize, usize), VarId>,
    /// (professor, day)
    pub t4: BTreeMap<(usize, usize), VarId>,
    /// full-time professor
    pub ttue: BTreeMap<usize, VarId>,
    /// professor
    pub t5: BTreeMap<usize, VarId>,
    /// (section, day)
    pub ygp1: BTreeMap<(usize, usize), VarId>,
    /// (section, first day)
    pub tgp2: BTreeMap<(usize, usize), VarId>,
    /// (section, first day)
    pub tgp3: BTreeMap<(usize, usize), VarId>,
    /// (professor, slot)
    pub t0: BTreeMap<(usize, usize), VarId>,
    /// section, soft capacity mode only
    pub ts: BTreeMap<usize, VarId>,
    /// Family of each constraint, in model order.
    pub row_family: Vec<Family>,
}

/// A meeting of a section: day, period and room id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Meeting {
    pub day: Day,
    pub period: u8,
    pub room: String,
}

/// A decoded or hand-written timetable, keyed by ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Timetable {
    pub meetings: BTreeMap<String, BTreeSet<Meeting>>,
    pub enrollments: BTreeMap<String, BTreeSet<String>>,
    /// Slots where each professor leads a section.
    pub prof_grid: BTreeMap<String, BTreeSet<(Day, u8)>>,
    /// Students above capacity per section (soft capacity only).
    pub over_capacity: BTreeMap<String, u32>,
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::model::fixtures::sample_consistent;
    use crate::model::{Day, Group, Instance, Mandate, Section};

    /// The sample instance plus one of everything: linked sections, mandates
    /// (one repeated), a co-professor, reduced availability, three- and
    /// four-period labs and a section nobody takes.
    pub fn rich_instance() -> Instance {
        let base = sample_consistent();
        let mut sections = base.sections.clone();
        let at = |sections: &[Section], id: &str| sections.iter().position(|s| s.id == id).unwrap();
        let i = at(&sections, "S14");
        sections[i].link = Some(1);
        let i = at(&sections, "S15");
        sections[i].link = Some(1);
        sections[i].prof = "Woolf".into();
        let i = at(&sections, "S01");
        sections[i].mandates = vec![Mandate::Day(Day::M), Mandate::Slot(Day::W, 2), Mandate::Slot(Day::W, 2)];
        let i = at(&sections, "S05");
        sections[i].coprofs = vec!["Curie".into()];
        let mut lab3 = Section::lecture("S16", "Bohr", "BIO1LAB", 3, 10, "CHEMLAB");
        lab3.is_lab = true;
        lab3.labtie = Some(4);
        let mut lec = Section::lecture("S18", "Bohr", "BIO1", 2, 10, "CLASSROOM");
        lec.labtie = Some(4);
        let mut lab4 = Section::lecture("S17", "Pauli", "ROBOLAB", 4, 10, "CHEMLAB");
        lab4.is_lab = true;
        sections.extend([lab3, lab4, lec]);
        let mut groups = base.groups.clone();
        groups.push(Group::new("G7", 4, ["BIO1", "BIO1LAB", "ENGL1"]));
        let inst = crate::model::fixtures::build(base.rooms.clone(), sections, groups);
        let mut profs = inst.professors.clone();
        let g = profs.iter().position(|p| p.id == "Gauss").unwrap();
        profs[g].availability[0][0] = 0;
        profs[g].availability[4][6] = -2;
        let c = profs.iter().position(|p| p.id == "Curie").unwrap();
        profs[c].availability[1] = [-1; 7];
        profs[c].is_adjunct = true;
        Instance::new(inst.rooms, profs, inst.courses, inst.sections, inst.groups).unwrap()
    }
}

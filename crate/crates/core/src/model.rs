//! Domain types: the weekly time grid, rooms, professors, courses, sections
//! and student groups, plus the derived index sets used by the integer
//! programs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Number of teaching days per week.
pub const NUM_DAYS: usize = 5;
/// Number of periods per day.
pub const NUM_PERIODS: usize = 7;
/// Total weekly slots.
pub const NUM_SLOTS: usize = NUM_DAYS * NUM_PERIODS;

/// Teaching day, Monday through Friday.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Day {
    M,
    T,
    W,
    R,
    F,
}

impl Day {
    pub const ALL: [Day; NUM_DAYS] = [Day::M, Day::T, Day::W, Day::R, Day::F];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Day> {
        Day::ALL.get(i).copied()
    }

    pub fn label(self) -> char {
        match self {
            Day::M => 'M',
            Day::T => 'T',
            Day::W => 'W',
            Day::R => 'R',
            Day::F => 'F',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Day::M => "Monday",
            Day::T => "Tuesday",
            Day::W => "Wednesday",
            Day::R => "Thursday",
            Day::F => "Friday",
        }
    }

    /// Parses a single-letter label (`M`, `T`, `W`, `R`, `F`), case-insensitive.
    pub fn parse(s: &str) -> Option<Day> {
        match s.trim().to_ascii_uppercase().as_str() {
            "M" => Some(Day::M),
            "T" => Some(Day::T),
            "W" => Some(Day::W),
            "R" => Some(Day::R),
            "F" => Some(Day::F),
            _ => None,
        }
    }

    /// The following teaching day; `None` for Friday.
    pub fn next(self) -> Option<Day> {
        Day::from_index(self.index() + 1)
    }
}

impl fmt::Display for Day {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// A (day, period) pair. Periods are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub day: Day,
    pub period: u8,
}

impl Slot {
    pub fn new(day: Day, period: u8) -> Slot {
        debug_assert!((1..=NUM_PERIODS as u8).contains(&period));
        Slot { day, period }
    }

    /// Dense index in `0..35`, day-major.
    pub fn index(self) -> usize {
        self.day.index() * NUM_PERIODS + (self.period as usize - 1)
    }

    pub fn from_index(i: usize) -> Slot {
        Slot { day: Day::ALL[i / NUM_PERIODS], period: (i % NUM_PERIODS) as u8 + 1 }
    }

    pub fn all() -> impl Iterator<Item = Slot> {
        (0..NUM_SLOTS).map(Slot::from_index)
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.day, self.period)
    }
}

/// The fixed weekly grid: five days of seven periods, lunch between
/// periods 4 and 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TimeGrid;

impl TimeGrid {
    pub fn days(&self) -> [Day; NUM_DAYS] {
        Day::ALL
    }

    pub fn periods(&self) -> std::ops::RangeInclusive<u8> {
        1..=NUM_PERIODS as u8
    }

    pub fn lunch_boundary(&self) -> (u8, u8) {
        (4, 5)
    }

    pub fn num_slots(&self) -> usize {
        NUM_SLOTS
    }

    pub fn next(&self, day: Day) -> Option<Day> {
        day.next()
    }

    /// True when `a` and `a + 1` are adjacent without lunch in between.
    pub fn contiguous(&self, a: u8, b: u8) -> bool {
        b == a + 1 && a != self.lunch_boundary().0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Room {
    pub id: String,
    pub capacity: u32,
    pub room_type: String,
}

/// Availability entry: 1 available, 0 prefers not, -1 important not to,
/// -2 cannot teach.
pub type Availability = [[i8; NUM_PERIODS]; NUM_DAYS];

pub const FULL_AVAILABILITY: Availability = [[1; NUM_PERIODS]; NUM_DAYS];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Professor {
    pub id: String,
    pub availability: Availability,
    pub is_adjunct: bool,
}

impl Professor {
    pub fn new(id: impl Into<String>) -> Professor {
        Professor { id: id.into(), availability: FULL_AVAILABILITY, is_adjunct: false }
    }

    pub fn avail(&self, slot: Slot) -> i8 {
        self.availability[slot.day.index()][slot.period as usize - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Course {
    pub id: String,
    pub periods: u8,
}

/// A fixed meeting requirement: a specific slot, or any period on a day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mandate {
    Slot(Day, u8),
    Day(Day),
}

impl Mandate {
    pub fn day(self) -> Day {
        match self {
            Mandate::Slot(d, _) | Mandate::Day(d) => d,
        }
    }

    /// Parses `d:t` or `d:*`.
    pub fn parse(s: &str) -> Option<Mandate> {
        let (d, t) = s.trim().split_once(':')?;
        let day = Day::parse(d)?;
        let t = t.trim();
        if t == "*" {
            return Some(Mandate::Day(day));
        }
        let p: u8 = t.parse().ok()?;
        (1..=NUM_PERIODS as u8).contains(&p).then_some(Mandate::Slot(day, p))
    }
}

impl fmt::Display for Mandate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mandate::Slot(d, t) => write!(f, "{d}:{t}"),
            Mandate::Day(d) => write!(f, "{d}:*"),
        }
    }
}

pub const MAX_MANDATES: usize = 6;
pub const MAX_COPROFS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub id: String,
    pub prof: String,
    pub course: String,
    pub periods: u8,
    pub is_lab: bool,
    pub capacity: u32,
    /// Stored only; nothing in the models reads it.
    pub final_exam: Option<String>,
    pub room_type: String,
    pub labtie: Option<u32>,
    pub mandates: Vec<Mandate>,
    pub coprofs: Vec<String>,
    pub is_adjunct_taught: bool,
    pub link: Option<u32>,
}

impl Section {
    /// A plain lecture section with no ties, links or mandates.
    pub fn lecture(
        id: impl Into<String>,
        prof: impl Into<String>,
        course: impl Into<String>,
        periods: u8,
        capacity: u32,
        room_type: impl Into<String>,
    ) -> Section {
        Section {
            id: id.into(),
            prof: prof.into(),
            course: course.into(),
            periods,
            is_lab: false,
            capacity,
            final_exam: None,
            room_type: room_type.into(),
            labtie: None,
            mandates: Vec::new(),
            coprofs: Vec::new(),
            is_adjunct_taught: false,
            link: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub id: String,
    pub size: u32,
    pub curriculum: BTreeSet<String>,
    /// Parent group when this group came out of a split.
    pub lineage: Option<String>,
}

impl Group {
    pub fn new<I, S>(id: impl Into<String>, size: u32, courses: I) -> Group
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Group { id: id.into(), size, curriculum: courses.into_iter().map(Into::into).collect(), lineage: None }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("duplicate {kind} id {id:?}")]
    Duplicate { kind: &'static str, id: String },
    #[error("{kind} {from:?} references unknown {target} {id:?}")]
    Unresolved { kind: &'static str, from: String, target: &'static str, id: String },
    #[error("{kind} {id:?}: {reason}")]
    Invalid { kind: &'static str, id: String, reason: String },
    #[error("no sections")]
    NoSections,
}

/// Characters allowed in identifiers besides ASCII alphanumerics. Anything
/// else would collide with the LP file syntax or the variable naming scheme.
const IDENT_EXTRA: &str = "_.#@$%&~!?";

pub fn is_valid_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || IDENT_EXTRA.contains(c))
}

/// A complete timetabling problem. Every entity list is sorted by id.
#[derive(Debug, Clone)]
pub struct Instance {
    pub grid: TimeGrid,
    pub rooms: Vec<Room>,
    pub room_types: Vec<String>,
    pub professors: Vec<Professor>,
    pub courses: Vec<Course>,
    pub sections: Vec<Section>,
    pub groups: Vec<Group>,
    prof_index: HashMap<String, usize>,
    course_index: HashMap<String, usize>,
    section_index: HashMap<String, usize>,
    room_index: HashMap<String, usize>,
}

fn index_by_id<T>(
    items: &[T],
    kind: &'static str,
    id: impl Fn(&T) -> &str,
) -> Result<HashMap<String, usize>, InstanceError> {
    let mut map = HashMap::with_capacity(items.len());
    for (i, it) in items.iter().enumerate() {
        let key = id(it);
        if !is_valid_ident(key) {
            return Err(InstanceError::Invalid {
                kind,
                id: key.to_string(),
                reason: "identifier contains reserved characters".into(),
            });
        }
        if map.insert(key.to_string(), i).is_some() {
            return Err(InstanceError::Duplicate { kind, id: key.to_string() });
        }
    }
    Ok(map)
}

impl Instance {
    /// Assembles an instance, sorting every list by id and checking that all
    /// cross-references resolve.
    pub fn new(
        mut rooms: Vec<Room>,
        mut professors: Vec<Professor>,
        mut courses: Vec<Course>,
        mut sections: Vec<Section>,
        mut groups: Vec<Group>,
    ) -> Result<Instance, InstanceError> {
        if sections.is_empty() {
            return Err(InstanceError::NoSections);
        }
        rooms.sort_by(|a, b| a.id.cmp(&b.id));
        professors.sort_by(|a, b| a.id.cmp(&b.id));
        courses.sort_by(|a, b| a.id.cmp(&b.id));
        sections.sort_by(|a, b| a.id.cmp(&b.id));
        groups.sort_by(|a, b| a.id.cmp(&b.id));

        let room_index = index_by_id(&rooms, "room", |r| &r.id)?;
        let prof_index = index_by_id(&professors, "professor", |p| &p.id)?;
        let course_index = index_by_id(&courses, "course", |c| &c.id)?;
        let section_index = index_by_id(&sections, "section", |s| &s.id)?;
        index_by_id(&groups, "group", |g| &g.id)?;

        let room_types: Vec<String> =
            rooms.iter().map(|r| r.room_type.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        for r in &rooms {
            if r.room_type.is_empty() {
                return Err(InstanceError::Invalid {
                    kind: "room",
                    id: r.id.clone(),
                    reason: "empty room type".into(),
                });
            }
        }
        for p in &professors {
            for row in &p.availability {
                if let Some(v) = row.iter().find(|v| !(-2..=1).contains(*v)) {
                    return Err(InstanceError::Invalid {
                        kind: "professor",
                        id: p.id.clone(),
                        reason: format!("availability value {v} outside {{1,0,-1,-2}}"),
                    });
                }
            }
        }
        for c in &courses {
            if !(1..=5).contains(&c.periods) {
                return Err(InstanceError::Invalid {
                    kind: "course",
                    id: c.id.clone(),
                    reason: format!("periods {} outside 1..5", c.periods),
                });
            }
        }
        for s in &sections {
            let unresolved = |target, id: &str| InstanceError::Unresolved {
                kind: "section",
                from: s.id.clone(),
                target,
                id: id.to_string(),
            };
            if !prof_index.contains_key(&s.prof) {
                return Err(unresolved("professor", &s.prof));
            }
            if !course_index.contains_key(&s.course) {
                return Err(unresolved("course", &s.course));
            }
            if room_types.binary_search(&s.room_type).is_err() {
                return Err(unresolved("room type", &s.room_type));
            }
            for cp in &s.coprofs {
                if !prof_index.contains_key(cp) {
                    return Err(unresolved("professor", cp));
                }
            }
            if let Some(fe) = &s.final_exam {
                if !course_index.contains_key(fe) {
                    return Err(unresolved("course", fe));
                }
            }
            if !(1..=5).contains(&s.periods) {
                return Err(InstanceError::Invalid {
                    kind: "section",
                    id: s.id.clone(),
                    reason: format!("periods {} outside 1..5", s.periods),
                });
            }
            if s.mandates.len() > MAX_MANDATES || s.coprofs.len() > MAX_COPROFS {
                return Err(InstanceError::Invalid {
                    kind: "section",
                    id: s.id.clone(),
                    reason: "more than 6 mandates or co-professors".into(),
                });
            }
            if s.labtie == Some(0) || s.link == Some(0) {
                return Err(InstanceError::Invalid {
                    kind: "section",
                    id: s.id.clone(),
                    reason: "labtie and link ids must be positive".into(),
                });
            }
        }
        for g in &groups {
            if g.size == 0 || g.curriculum.is_empty() {
                return Err(InstanceError::Invalid {
                    kind: "group",
                    id: g.id.clone(),
                    reason: "size must be positive and curriculum non-empty".into(),
                });
            }
            for c in &g.curriculum {
                if !course_index.contains_key(c) {
                    return Err(InstanceError::Unresolved {
                        kind: "group",
                        from: g.id.clone(),
                        target: "course",
                        id: c.clone(),
                    });
                }
            }
        }

        Ok(Instance {
            grid: TimeGrid,
            rooms,
            room_types,
            professors,
            courses,
            sections,
            groups,
            prof_index,
            course_index,
            section_index,
            room_index,
        })
    }

    /// Same instance with a different (e.g. refined) group list.
    pub fn with_groups(&self, groups: Vec<Group>) -> Result<Instance, InstanceError> {
        Instance::new(self.rooms.clone(), self.professors.clone(), self.courses.clone(), self.sections.clone(), groups)
    }

    pub fn prof_idx(&self, id: &str) -> Option<usize> {
        self.prof_index.get(id).copied()
    }

    pub fn course_idx(&self, id: &str) -> Option<usize> {
        self.course_index.get(id).copied()
    }

    pub fn section_idx(&self, id: &str) -> Option<usize> {
        self.section_index.get(id).copied()
    }

    pub fn room_idx(&self, id: &str) -> Option<usize> {
        self.room_index.get(id).copied()
    }

    pub fn course(&self, id: &str) -> Option<&Course> {
        self.course_idx(id).map(|i| &self.courses[i])
    }

    pub fn professor(&self, id: &str) -> Option<&Professor> {
        self.prof_idx(id).map(|i| &self.professors[i])
    }

    pub fn section(&self, id: &str) -> Option<&Section> {
        self.section_idx(id).map(|i| &self.sections[i])
    }

    /// Sections of each course, keyed by course id.
    pub fn sections_by_course(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut map: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, s) in self.sections.iter().enumerate() {
            map.entry(s.course.as_str()).or_default().push(i);
        }
        map
    }

    /// Rooms compatible with section `s`: same type, capacity at least the
    /// section's.
    pub fn compatible_rooms(&self, s: usize) -> Vec<usize> {
        let sec = &self.sections[s];
        self.rooms
            .iter()
            .enumerate()
            .filter(|(_, r)| r.room_type == sec.room_type && sec.capacity <= r.capacity)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Period triples a three-period lab may not occupy: every ordered triple
/// except `(1,2,3)`, `(2,3,4)` and `(5,6,7)`.
pub fn forbidden_lab_triples(grid: &TimeGrid) -> BTreeSet<(u8, u8, u8)> {
    let allowed = [(1, 2, 3), (2, 3, 4), (5, 6, 7)];
    let mut out = BTreeSet::new();
    for a in grid.periods() {
        for b in a + 1..=NUM_PERIODS as u8 {
            for c in b + 1..=NUM_PERIODS as u8 {
                if !allowed.contains(&(a, b, c)) {
                    out.insert((a, b, c));
                }
            }
        }
    }
    out
}

/// Period pairs a two-period lab may not occupy: everything except
/// contiguous pairs that do not straddle lunch.
pub fn forbidden_lab_pairs(grid: &TimeGrid) -> BTreeSet<(u8, u8)> {
    let mut out = BTreeSet::new();
    for a in grid.periods() {
        for b in a + 1..=NUM_PERIODS as u8 {
            if !grid.contiguous(a, b) {
                out.insert((a, b));
            }
        }
    }
    out
}

/// Weekly teaching periods at which a professor counts as full-time.
pub const FULLTIME_PERIODS: u32 = 9;

/// Professors whose primary sections total at least nine periods a week.
pub fn fulltime_professors(inst: &Instance) -> BTreeSet<String> {
    let mut load: BTreeMap<&str, u32> = BTreeMap::new();
    for s in &inst.sections {
        *load.entry(s.prof.as_str()).or_default() += s.periods as u32;
    }
    load.into_iter().filter(|&(_, l)| l >= FULLTIME_PERIODS).map(|(p, _)| p.to_string()).collect()
}

/// One element of the candidate placement set: section, slot, room (indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Placement {
    pub section: usize,
    pub slot: Slot,
    pub room: usize,
}

/// All (section, day, period, room) tuples where the room type matches and
/// the room holds the section's capacity. Ordered by section, day, period,
/// room.
pub fn candidate_assignments(inst: &Instance) -> Vec<Placement> {
    let mut out = Vec::new();
    for s in 0..inst.sections.len() {
        let rooms = inst.compatible_rooms(s);
        for slot in Slot::all() {
            for &room in &rooms {
                out.push(Placement { section: s, slot, room });
            }
        }
    }
    out
}

/// (group index, section index) pairs where the section's course is in the
/// group's curriculum. Ordered by group then section.
pub fn group_section_options(inst: &Instance, groups: &[Group]) -> Vec<(usize, usize)> {
    let by_course = inst.sections_by_course();
    let mut out = Vec::new();
    for (g, grp) in groups.iter().enumerate() {
        let mut secs: Vec<usize> =
            grp.curriculum.iter().filter_map(|c| by_course.get(c.as_str())).flatten().copied().collect();
        secs.sort_unstable();
        out.extend(secs.into_iter().map(|s| (g, s)));
    }
    out
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// The four sample tables from the introduction, with section ids added,
    /// the missing CHEMLAB/ lab-course references filled in and the groups
    /// shrunk so capacity covers demand.
    pub fn sample_consistent() -> Instance {
        let rooms = vec![
            room("F101", 30, "CLASSROOM"),
            room("F102", 30, "CLASSROOM"),
            room("F103", 30, "CLASSROOM"),
            room("F310", 21, "PHYSLAB"),
            room("F339", 15, "CHEMLAB"),
            room("B101", 30, "LECTUREHALL"),
            room("B102", 30, "LECTUREHALL"),
        ];
        let mut s = vec![
            Section::lecture("S01", "Gauss", "CALC1", 3, 26, "CLASSROOM"),
            Section::lecture("S02", "Gauss", "GEOM1", 3, 26, "CLASSROOM"),
            Section::lecture("S03", "Gauss", "CALC1", 3, 26, "CLASSROOM"),
            Section::lecture("S04", "Riemann", "CALC1", 3, 26, "CLASSROOM"),
            Section::lecture("S05", "Riemann", "STAT2", 3, 17, "CLASSROOM"),
            Section::lecture("S06", "Turing", "COMP1", 4, 22, "CLASSROOM"),
            Section::lecture("S07", "Turing", "COMP1", 4, 22, "CLASSROOM"),
            Section::lecture("S08", "Einstein", "PHYS1", 3, 21, "CLASSROOM"),
            Section::lecture("S09", "Einstein", "PHYS1LAB", 2, 21, "PHYSLAB"),
            Section::lecture("S10", "Bohr", "PHYS1", 3, 21, "CLASSROOM"),
            Section::lecture("S11", "Pauli", "PHYS1LAB", 2, 21, "PHYSLAB"),
            Section::lecture("S12", "Curie", "CHEM1", 3, 25, "CLASSROOM"),
            Section::lecture("S13", "Curie", "CHEM1LAB", 2, 15, "CHEMLAB"),
            Section::lecture("S14", "Austen", "ENGL1", 3, 20, "LECTUREHALL"),
            Section::lecture("S15", "Austen", "ENGL1", 3, 20, "LECTUREHALL"),
        ];
        for i in [8, 10, 12] {
            s[i].is_lab = true;
        }
        s[7].labtie = Some(1);
        s[8].labtie = Some(1);
        s[9].labtie = Some(2);
        s[10].labtie = Some(2);
        s[11].labtie = Some(3);
        s[12].labtie = Some(3);
        let groups = vec![
            Group::new("G1", 6, ["CALC1", "STAT2", "COMP1", "PHYS1"]),
            Group::new("G2", 5, ["ENGL1", "PHYS1", "PHYS1LAB", "STAT2"]),
            Group::new("G3", 8, ["CALC1", "PHYS1", "PHYS1LAB", "ENGL1"]),
            Group::new("G4", 6, ["COMP1", "PHYS1", "PHYS1LAB", "STAT2"]),
            Group::new("G5", 15, ["CALC1", "PHYS1", "PHYS1LAB", "GEOM1"]),
            Group::new("G6", 1, ["ENGL1", "CHEM1", "CHEM1LAB", "COMP1"]),
        ];
        build(rooms, s, groups)
    }

    pub fn room(id: &str, cap: u32, ty: &str) -> Room {
        Room { id: id.into(), capacity: cap, room_type: ty.into() }
    }

    /// Derives professors and courses from the sections.
    pub fn build(rooms: Vec<Room>, sections: Vec<Section>, groups: Vec<Group>) -> Instance {
        let mut profs: BTreeMap<String, Professor> = BTreeMap::new();
        let mut courses: BTreeMap<String, Course> = BTreeMap::new();
        for s in &sections {
            profs.entry(s.prof.clone()).or_insert_with(|| Professor::new(s.prof.clone()));
            for cp in &s.coprofs {
                profs.entry(cp.clone()).or_insert_with(|| Professor::new(cp.clone()));
            }
            courses.entry(s.course.clone()).or_insert(Course { id: s.course.clone(), periods: s.periods });
        }
        Instance::new(rooms, profs.into_values().collect(), courses.into_values().collect(), sections, groups)
            .expect("fixture instance is consistent")
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn lab_triples_and_pairs() {
        let g = TimeGrid;
        let a = forbidden_lab_triples(&g);
        assert_eq!(a.len(), 32);
        assert!(a.contains(&(3, 4, 5)));
        assert!(!a.contains(&(1, 2, 3)));
        assert!(!a.contains(&(2, 3, 4)));
        assert!(!a.contains(&(5, 6, 7)));

        let b = forbidden_lab_pairs(&g);
        assert_eq!(b.len(), 16);
        assert!(b.contains(&(4, 5)));
        assert!(!b.contains(&(2, 3)));
        let allowed: Vec<(u8, u8)> =
            (1..=7u8).flat_map(|a| (a + 1..=7).map(move |b| (a, b))).filter(|p| !b.contains(p)).collect();
        assert_eq!(allowed, vec![(1, 2), (2, 3), (3, 4), (5, 6), (6, 7)]);
    }

    #[test]
    fn grid_next_day() {
        assert_eq!(Day::M.next(), Some(Day::T));
        assert_eq!(Day::R.next(), Some(Day::F));
        assert_eq!(Day::F.next(), None);
        assert_eq!(Slot::all().count(), 35);
        for i in 0..35 {
            assert_eq!(Slot::from_index(i).index(), i);
        }
    }

    fn prof_sections(periods: &[u8]) -> Instance {
        let secs = periods
            .iter()
            .enumerate()
            .map(|(i, &p)| Section::lecture(format!("S{i}"), "P", format!("C{p}"), p, 10, "ROOM"))
            .collect();
        build(vec![room("R", 30, "ROOM")], secs, vec![])
    }

    #[test]
    fn fulltime_threshold() {
        assert!(fulltime_professors(&prof_sections(&[3, 3, 4])).contains("P"));
        assert!(fulltime_professors(&prof_sections(&[3])).is_empty());
        assert!(fulltime_professors(&prof_sections(&[3, 3, 3])).contains("P"));
        assert!(fulltime_professors(&prof_sections(&[4, 4])).is_empty());
    }

    #[test]
    fn candidate_assignments_respect_type_and_capacity() {
        let inst = sample_consistent();
        let y = candidate_assignments(&inst);
        let s01 = inst.section_idx("S01").unwrap();
        let f101 = inst.room_idx("F101").unwrap();
        let n = y.iter().filter(|p| p.section == s01 && p.room == f101).count();
        assert_eq!(n, 35);
        // S01 fits the three CLASSROOMs only.
        assert_eq!(y.iter().filter(|p| p.section == s01).count(), 3 * 35);
        // CHEM1LAB (cap 15) is only compatible with the CHEMLAB room.
        let s13 = inst.section_idx("S13").unwrap();
        let f339 = inst.room_idx("F339").unwrap();
        assert!(y.iter().filter(|p| p.section == s13).all(|p| p.room == f339));
        // PHYS1LAB sections need PHYSLAB rooms; never F339.
        let s09 = inst.section_idx("S09").unwrap();
        assert!(y.iter().all(|p| !(p.section == s09 && p.room == f339)));
    }

    #[test]
    fn capacity_excludes_small_rooms() {
        let inst = build(vec![room("R", 21, "ROOM")], vec![Section::lecture("S", "P", "C", 3, 30, "ROOM")], vec![]);
        assert!(candidate_assignments(&inst).is_empty());
    }

    #[test]
    fn group_options_follow_curriculum() {
        let inst = sample_consistent();
        let w = group_section_options(&inst, &inst.groups);
        let g1 = 0; // groups sorted: G1..G6
        let calc: Vec<_> = w.iter().filter(|&&(g, s)| g == g1 && inst.sections[s].course == "CALC1").collect();
        assert_eq!(calc.len(), 3);

        let twins = vec![Group::new("A", 5, ["CALC1", "STAT2"]), Group::new("B", 9, ["CALC1", "STAT2"])];
        let w = group_section_options(&inst, &twins);
        let a: Vec<usize> = w.iter().filter(|p| p.0 == 0).map(|p| p.1).collect();
        let b: Vec<usize> = w.iter().filter(|p| p.0 == 1).map(|p| p.1).collect();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn empty_options_for_foreign_curriculum() {
        let inst = sample_consistent();
        let g = Group { id: "X".into(), size: 1, curriculum: BTreeSet::new(), lineage: None };
        assert!(group_section_options(&inst, &[g]).is_empty());
    }

    #[test]
    fn instance_rejects_bad_references() {
        let err = Instance::new(
            vec![room("R", 30, "ROOM")],
            vec![Professor::new("P")],
            vec![Course { id: "C".into(), periods: 3 }],
            vec![Section::lecture("S", "P", "C", 3, 10, "LECTUREHALL")],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, InstanceError::Unresolved { target: "room type", .. }));

        let err = Instance::new(vec![], vec![], vec![], vec![], vec![]).unwrap_err();
        assert_eq!(err, InstanceError::NoSections);
    }

    #[test]
    fn mandate_parsing() {
        assert_eq!(Mandate::parse("T:5"), Some(Mandate::Slot(Day::T, 5)));
        assert_eq!(Mandate::parse("w:*"), Some(Mandate::Day(Day::W)));
        assert_eq!(Mandate::parse("F:8"), None);
        assert_eq!(Mandate::parse("X:1"), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn enlarging_room_never_removes_placements(extra in 0u32..50, cap in 1u32..40) {
                let base = build(
                    vec![room("R", cap, "ROOM")],
                    vec![Section::lecture("S", "P", "C", 3, 20, "ROOM")],
                    vec![],
                );
                let bigger = build(
                    vec![room("R", cap + extra, "ROOM")],
                    vec![Section::lecture("S", "P", "C", 3, 20, "ROOM")],
                    vec![],
                );
                let a = candidate_assignments(&base);
                let b = candidate_assignments(&bigger);
                prop_assert!(a.iter().all(|p| b.contains(p)));
            }

            #[test]
            fn adding_course_never_removes_options(mask in 0u8..16, add in 0usize..4) {
                let inst = sample_consistent();
                let names = ["CALC1", "STAT2", "COMP1", "ENGL1"];
                let cur: Vec<&str> = (0..4).filter(|i| mask & (1 << i) != 0).map(|i| names[i]).collect();
                let g0 = Group::new("A", 3, cur.clone());
                let mut cur2 = cur;
                cur2.push(names[add]);
                let g1 = Group::new("A", 3, cur2);
                let w0 = group_section_options(&inst, &[g0]);
                let w1 = group_section_options(&inst, &[g1]);
                prop_assert!(w0.iter().all(|p| w1.contains(p)));
            }
        }
    }
}

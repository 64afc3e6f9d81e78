//! Pre-solve consistency checks. Each finding names one issue code; an empty
//! result does not guarantee the timetable model is feasible, but any error
//! here makes it infeasible (or, for capacity, forces overflow).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{Instance, Mandate, Section, Slot, NUM_SLOTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IssueCode {
    /// Students needing a course outnumber its total section capacity.
    CapacityShortfall,
    /// A section fits in no room of its type.
    NoCompatibleRoom,
    /// Sections of a room type need more room-periods than exist.
    RoomTypeCapacity,
    /// Mandates put more sections of one room type in a slot than rooms.
    RoomTypeOverbooked,
    /// A professor's mandated slots collide, or one section's mandates
    /// contradict each other.
    MandateConflict,
    TooManyMandates,
    PeriodsMismatch,
    LabtieStructure,
    LinkPeriods,
    /// Linked sections meet together, so they cannot share a teacher.
    LinkSharedProf,
    LabMandateAfternoon,
    /// Labs longer than four periods cannot fit between the day edges and
    /// lunch.
    LabTooLong,
    AdjunctUnavailable,
    MandateUnavailable,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::CapacityShortfall => "capacity_shortfall",
            IssueCode::NoCompatibleRoom => "no_compatible_room",
            IssueCode::RoomTypeCapacity => "room_type_capacity",
            IssueCode::RoomTypeOverbooked => "room_type_overbooked",
            IssueCode::MandateConflict => "mandate_conflict",
            IssueCode::TooManyMandates => "too_many_mandates",
            IssueCode::PeriodsMismatch => "periods_mismatch",
            IssueCode::LabtieStructure => "labtie_structure",
            IssueCode::LinkPeriods => "link_periods",
            IssueCode::LinkSharedProf => "link_shared_prof",
            IssueCode::LabMandateAfternoon => "lab_mandate_afternoon",
            IssueCode::LabTooLong => "lab_too_long",
            IssueCode::AdjunctUnavailable => "adjunct_unavailable",
            IssueCode::MandateUnavailable => "mandate_unavailable",
        }
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataIssue {
    pub severity: Severity,
    pub code: IssueCode,
    pub message: String,
    pub subject: String,
}

impl fmt::Display for DataIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}] {}: {}", self.severity, self.code, self.subject, self.message)
    }
}

struct Issues(Vec<DataIssue>);

impl Issues {
    fn error(&mut self, code: IssueCode, subject: &str, message: String) {
        self.0.push(DataIssue { severity: Severity::Error, code, message, subject: subject.into() });
    }

    fn warn(&mut self, code: IssueCode, subject: &str, message: String) {
        self.0.push(DataIssue { severity: Severity::Warning, code, message, subject: subject.into() });
    }
}

/// Runs every data check and returns the findings in a fixed order.
pub fn validate_instance(inst: &Instance) -> Vec<DataIssue> {
    let mut out = Issues(Vec::new());
    course_capacity(inst, &mut out);
    room_types(inst, &mut out);
    mandates(inst, &mut out);
    periods(inst, &mut out);
    labties(inst, &mut out);
    links(inst, &mut out);
    adjuncts(inst, &mut out);
    out.0
}

/// Total demand per course against total section capacity.
pub(crate) fn course_demand(inst: &Instance) -> BTreeMap<&str, (u64, u64)> {
    let mut map: BTreeMap<&str, (u64, u64)> = inst.courses.iter().map(|c| (c.id.as_str(), (0, 0))).collect();
    for g in &inst.groups {
        for c in &g.curriculum {
            if let Some(e) = map.get_mut(c.as_str()) {
                e.0 += u64::from(g.size);
            }
        }
    }
    for s in &inst.sections {
        if let Some(e) = map.get_mut(s.course.as_str()) {
            e.1 += u64::from(s.capacity);
        }
    }
    map
}

fn course_capacity(inst: &Instance, out: &mut Issues) {
    for (course, (demand, cap)) in course_demand(inst) {
        if demand > cap {
            out.error(
                IssueCode::CapacityShortfall,
                course,
                format!("{demand} students need the course but its sections seat {cap}"),
            );
        }
    }
}

fn room_types(inst: &Instance, out: &mut Issues) {
    for (s, sec) in inst.sections.iter().enumerate() {
        if inst.compatible_rooms(s).is_empty() {
            out.error(
                IssueCode::NoCompatibleRoom,
                &sec.id,
                format!("no {} room seats {}", sec.room_type, sec.capacity),
            );
        }
    }
    for ty in &inst.room_types {
        let rooms: Vec<u32> = inst.rooms.iter().filter(|r| &r.room_type == ty).map(|r| r.capacity).collect();
        let secs: Vec<_> = inst.sections.iter().filter(|s| &s.room_type == ty).collect();
        // Sections needing at least `need` seats can only use rooms that big.
        let thresholds: BTreeSet<u32> = secs.iter().map(|s| s.capacity).collect();
        for &need in &thresholds {
            let demand: usize = secs.iter().filter(|s| s.capacity >= need).map(|s| s.periods as usize).sum();
            let supply = NUM_SLOTS * rooms.iter().filter(|&&c| c >= need).count();
            if demand > supply {
                out.error(
                    IssueCode::RoomTypeCapacity,
                    ty,
                    format!("sections needing {need}+ seats meet {demand} periods a week, rooms offer {supply}"),
                );
                break;
            }
        }
        let mut per_slot = [0usize; NUM_SLOTS];
        for s in &secs {
            for m in &s.mandates {
                if let Mandate::Slot(d, t) = *m {
                    per_slot[Slot::new(d, t).index()] += 1;
                }
            }
        }
        for (i, &n) in per_slot.iter().enumerate() {
            if n > rooms.len() {
                out.error(
                    IssueCode::RoomTypeOverbooked,
                    ty,
                    format!("{n} sections mandated at {} but only {} rooms", Slot::from_index(i), rooms.len()),
                );
            }
        }
    }
}

fn mandates(inst: &Instance, out: &mut Issues) {
    // Professor -> slot -> sections mandated there (as lead or co-professor).
    let mut taken: BTreeMap<&str, BTreeMap<usize, Vec<&str>>> = BTreeMap::new();
    for sec in &inst.sections {
        if sec.mandates.len() > sec.periods as usize {
            out.error(
                IssueCode::TooManyMandates,
                &sec.id,
                format!("{} mandates for a {}-period section", sec.mandates.len(), sec.periods),
            );
        }
        let slots: BTreeSet<Slot> = sec
            .mandates
            .iter()
            .filter_map(|m| match *m {
                Mandate::Slot(d, t) => Some(Slot::new(d, t)),
                Mandate::Day(_) => None,
            })
            .collect();
        if !sec.is_lab {
            let mut days = BTreeMap::new();
            for m in &sec.mandates {
                *days.entry(m.day()).or_insert(0) += 1;
            }
            if let Some((d, _)) = days.iter().find(|(_, &n)| n > 1) {
                out.error(
                    IssueCode::MandateConflict,
                    &sec.id,
                    format!("several mandates on {d} but a lecture meets at most once a day"),
                );
            }
        }
        let slot_count = sec.mandates.iter().filter(|m| matches!(m, Mandate::Slot(..))).count();
        if slots.len() < slot_count {
            out.error(IssueCode::MandateConflict, &sec.id, "the same slot is mandated twice".into());
        }
        for p in std::iter::once(&sec.prof).chain(&sec.coprofs) {
            for slot in &slots {
                taken.entry(p).or_default().entry(slot.index()).or_default().push(&sec.id);
            }
        }
        if let Some(prof) = inst.professor(&sec.prof) {
            for slot in &slots {
                if prof.avail(*slot) <= 0 {
                    out.warn(
                        IssueCode::MandateUnavailable,
                        &sec.id,
                        format!("mandated at {slot} where {} has availability {}", prof.id, prof.avail(*slot)),
                    );
                }
            }
        }
        if sec.is_lab && sec.periods == 4 {
            if let Some(m) = sec.mandates.iter().find(|m| matches!(m, Mandate::Slot(_, t) if *t >= 5)) {
                out.error(
                    IssueCode::LabMandateAfternoon,
                    &sec.id,
                    format!("four-period labs run in periods 1-4, but {m} is mandated"),
                );
            }
        }
        if sec.is_lab && sec.periods > 4 {
            out.error(
                IssueCode::LabTooLong,
                &sec.id,
                format!("a {}-period lab cannot fit in one half-day", sec.periods),
            );
        }
    }
    for (prof, slots) in taken {
        for (slot, secs) in slots {
            if secs.len() > 1 {
                out.error(
                    IssueCode::MandateConflict,
                    prof,
                    format!("{} all mandated at {}", secs.join(", "), Slot::from_index(slot)),
                );
            }
        }
    }
}

fn periods(inst: &Instance, out: &mut Issues) {
    for sec in &inst.sections {
        let Some(course) = inst.course(&sec.course) else { continue };
        if course.periods != sec.periods {
            out.error(
                IssueCode::PeriodsMismatch,
                &sec.id,
                format!("section meets {} periods but {} has {}", sec.periods, course.id, course.periods),
            );
        }
    }
}

fn labties(inst: &Instance, out: &mut Issues) {
    let mut ties: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for sec in &inst.sections {
        if let Some(k) = sec.labtie {
            let e = ties.entry(k).or_default();
            if sec.is_lab {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    for (k, (labs, lectures)) in ties {
        if labs != 1 || lectures == 0 {
            out.error(
                IssueCode::LabtieStructure,
                &k.to_string(),
                format!("labtie {k} has {labs} labs and {lectures} lectures; needs exactly one lab and at least one lecture"),
            );
        }
    }
}

fn links(inst: &Instance, out: &mut Issues) {
    let mut by_link: BTreeMap<u32, Vec<&Section>> = BTreeMap::new();
    for sec in &inst.sections {
        if let Some(k) = sec.link {
            by_link.entry(k).or_default().push(sec);
        }
    }
    for (k, secs) in by_link {
        let periods: BTreeSet<u8> = secs.iter().map(|s| s.periods).collect();
        if periods.len() > 1 {
            out.error(
                IssueCode::LinkPeriods,
                &k.to_string(),
                format!("linked sections have different period counts {periods:?}"),
            );
        }
        for (i, a) in secs.iter().enumerate() {
            for b in &secs[i + 1..] {
                let clash = a.prof == b.prof || a.coprofs.contains(&b.prof) || b.coprofs.contains(&a.prof);
                if clash {
                    out.error(
                        IssueCode::LinkSharedProf,
                        &k.to_string(),
                        format!("linked sections {} and {} share a professor", a.id, b.id),
                    );
                }
            }
        }
    }
}

fn adjuncts(inst: &Instance, out: &mut Issues) {
    for sec in inst.sections.iter().filter(|s| s.is_adjunct_taught) {
        let Some(p) = inst.professor(&sec.prof) else { continue };
        if !p.availability.iter().flatten().any(|&v| v == 1) {
            out.warn(IssueCode::AdjunctUnavailable, &sec.id, format!("adjunct {} marks no slot as available", p.id));
        }
    }
}

//! Weekly grids, one per group, professor and room: five day rows by seven
//! period columns, written as CSV.

use std::collections::BTreeMap;

use crate::model::{Day, Group, Instance, NUM_DAYS, NUM_PERIODS};
use crate::tip::Timetable;

/// Cell texts by day and period. A cell holding more than one entry means
/// a clash, which a valid timetable never has.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeekGrid {
    pub title: String,
    pub cells: [[Vec<String>; NUM_PERIODS]; NUM_DAYS],
}

impl WeekGrid {
    fn new(title: String) -> WeekGrid {
        WeekGrid { title, ..WeekGrid::default() }
    }

    fn put(&mut self, day: Day, period: u8, text: String) {
        let cell = &mut self.cells[day.index()][usize::from(period) - 1];
        if !cell.contains(&text) {
            cell.push(text);
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![self.title.clone()];
        header.extend((1..=NUM_PERIODS).map(|t| t.to_string()));
        w.write_record(&header).expect("writing to memory");
        for day in Day::ALL {
            let mut row = vec![day.name().to_string()];
            row.extend(self.cells[day.index()].iter().map(|c| c.join(" / ")));
            w.write_record(&row).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
    }
}

/// Grids keyed by group id, showing the course met in each period.
/// `groups` are the groups the timetable enrolls.
pub fn group_grids(inst: &Instance, tt: &Timetable, groups: &[Group]) -> BTreeMap<String, WeekGrid> {
    let mut out = BTreeMap::new();
    for g in groups {
        let mut grid = WeekGrid::new(format!("{} (size {})", g.id, g.size));
        for sid in tt.enrollments.get(&g.id).into_iter().flatten() {
            let course = inst.section(sid).map_or(sid.as_str(), |s| s.course.as_str());
            for m in tt.meetings.get(sid).into_iter().flatten() {
                grid.put(m.day, m.period, course.to_string());
            }
        }
        out.insert(g.id.clone(), grid);
    }
    out
}

/// Grids keyed by professor id, covering sections led and co-taught.
pub fn professor_grids(inst: &Instance, tt: &Timetable) -> BTreeMap<String, WeekGrid> {
    let mut out: BTreeMap<String, WeekGrid> =
        inst.professors.iter().map(|p| (p.id.clone(), WeekGrid::new(p.id.clone()))).collect();
    for sec in &inst.sections {
        for m in tt.meetings.get(&sec.id).into_iter().flatten() {
            let text = format!("{} {} {}", sec.course, sec.id, m.room);
            for p in std::iter::once(&sec.prof).chain(&sec.coprofs) {
                if let Some(grid) = out.get_mut(p) {
                    grid.put(m.day, m.period, text.clone());
                }
            }
        }
    }
    out
}

/// Grids keyed by room id.
pub fn room_grids(inst: &Instance, tt: &Timetable) -> BTreeMap<String, WeekGrid> {
    let mut out: BTreeMap<String, WeekGrid> = inst
        .rooms
        .iter()
        .map(|r| (r.id.clone(), WeekGrid::new(format!("{} (capacity {})", r.id, r.capacity))))
        .collect();
    for sec in &inst.sections {
        for m in tt.meetings.get(&sec.id).into_iter().flatten() {
            if let Some(grid) = out.get_mut(&m.room) {
                grid.put(m.day, m.period, format!("{} {}", sec.course, sec.id));
            }
        }
    }
    out
}

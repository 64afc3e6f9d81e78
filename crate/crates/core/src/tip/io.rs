//! File formats around the program: the timetable CSV and the index map
//! that ties variable names back to entities.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{Meeting, Timetable, TipIndex};
use crate::mipcore::{Model, ModelError, VarId, VarKind};
use crate::model::{Day, Group, Instance, Slot, NUM_PERIODS};

#[derive(Debug, Error)]
pub enum FileError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn to_string(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
}

/// Writes a timetable as `kind,id,day,period,room,ref,size` rows. Groups
/// carrying a lineage that are not instance groups get a `group` row, so
/// that a timetable on a refinement of the instance groups reads back.
pub fn write_timetable(tt: &Timetable, groups: &[Group], inst: &Instance) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut row = |r: [&str; 7]| w.write_record(r).expect("writing to memory");
    row(["kind", "id", "day", "period", "room", "ref", "size"]);
    for g in groups {
        if let Some(parent) = &g.lineage {
            if !inst.groups.iter().any(|x| x.id == g.id) {
                row(["group", &g.id, "", "", "", parent, &g.size.to_string()]);
            }
        }
    }
    for (s, ms) in &tt.meetings {
        for m in ms {
            row(["meeting", s, &m.day.to_string(), &m.period.to_string(), &m.room, "", ""]);
        }
    }
    for (g, secs) in &tt.enrollments {
        for s in secs {
            row(["enroll", g, "", "", "", s, ""]);
        }
    }
    for (s, n) in &tt.over_capacity {
        row(["over", s, "", "", "", "", &n.to_string()]);
    }
    to_string(w)
}

/// Reads a timetable file. Professor grids are rebuilt from the meetings of
/// each section's lead professor. Split-off groups inherit their parent's
/// curriculum, and the returned group list replaces each parent by its parts.
pub fn parse_timetable(text: &str, inst: &Instance) -> Result<(Timetable, Vec<Group>), FileError> {
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let mut tt = Timetable::default();
    let mut split: BTreeMap<String, Vec<Group>> = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let f = |k: usize| rec.get(k).unwrap_or("").trim();
        let err = |message: String| FileError::Line { line, message };
        match f(0) {
            "meeting" => {
                let day = Day::parse(f(2)).ok_or_else(|| err(format!("bad day {:?}", f(2))))?;
                let period: u8 = f(3)
                    .parse()
                    .ok()
                    .filter(|t| (1..=NUM_PERIODS as u8).contains(t))
                    .ok_or_else(|| err(format!("bad period {:?}", f(3))))?;
                let m = Meeting { day, period, room: f(4).to_string() };
                tt.meetings.entry(f(1).to_string()).or_default().insert(m);
                if let Some(sec) = inst.section(f(1)) {
                    tt.prof_grid.entry(sec.prof.clone()).or_default().insert((day, period));
                }
            }
            "enroll" => {
                tt.enrollments.entry(f(1).to_string()).or_default().insert(f(5).to_string());
            }
            "over" => {
                let n: u32 = f(6).parse().map_err(|_| err(format!("bad amount {:?}", f(6))))?;
                tt.over_capacity.insert(f(1).to_string(), n);
            }
            "group" => {
                let parent = inst
                    .groups
                    .iter()
                    .find(|g| g.id == f(5))
                    .ok_or_else(|| err(format!("unknown group {:?}", f(5))))?;
                let size: u32 = f(6).parse().map_err(|_| err(format!("bad size {:?}", f(6))))?;
                let mut g = parent.clone();
                g.id = f(1).to_string();
                g.size = size;
                g.lineage = Some(parent.id.clone());
                split.entry(parent.id.clone()).or_default().push(g);
            }
            other => return Err(err(format!("unknown row kind {other:?}"))),
        }
    }
    for s in &inst.sections {
        tt.meetings.entry(s.id.clone()).or_default();
    }
    let mut groups = Vec::new();
    for g in &inst.groups {
        match split.remove(&g.id) {
            Some(parts) => groups.extend(parts),
            None => groups.push(g.clone()),
        }
    }
    groups.sort_by(|a, b| a.id.cmp(&b.id));
    Ok((tt, groups))
}

const MAP_HEADER: [&str; 9] = ["var", "kind", "section", "group", "professor", "room", "day", "period", "upper"];

#[derive(Default)]
struct MapRow {
    section: String,
    group: String,
    professor: String,
    room: String,
    day: String,
    period: String,
}

/// Writes one line per program variable naming the entities it stands for.
pub fn write_index_map(model: &Model, inst: &Instance, index: &TipIndex) -> String {
    let sid = |s: usize| inst.sections[s].id.clone();
    let pid = |p: usize| inst.professors[p].id.clone();
    let rid = |r: usize| inst.rooms[r].id.clone();
    let gid = |g: usize| index.groups[g].id.clone();
    let at = |slot: usize| {
        let s = Slot::from_index(slot);
        (s.day.to_string(), s.period.to_string())
    };
    let dl = |d: usize| Day::ALL[d].to_string();

    let mut rows: BTreeMap<VarId, (&'static str, MapRow)> = BTreeMap::new();
    for (&(s, slot, r), &v) in &index.z {
        let (day, period) = at(slot);
        rows.insert(v, ("z", MapRow { section: sid(s), room: rid(r), day, period, ..MapRow::default() }));
    }
    for (&(p, slot), &v) in &index.w {
        let (day, period) = at(slot);
        rows.insert(v, ("w", MapRow { professor: pid(p), day, period, ..MapRow::default() }));
    }
    for (&(g, s), &v) in &index.x {
        rows.insert(v, ("x", MapRow { group: gid(g), section: sid(s), ..MapRow::default() }));
    }
    for (&(g, slot, s), &v) in &index.u {
        let (day, period) = at(slot);
        rows.insert(v, ("u", MapRow { group: gid(g), section: sid(s), day, period, ..MapRow::default() }));
    }
    let section_day = |m: &BTreeMap<(usize, usize), VarId>,
                       kind: &'static str,
                       rows: &mut BTreeMap<VarId, (&'static str, MapRow)>| {
        for (&(s, d), &v) in m {
            rows.insert(v, (kind, MapRow { section: sid(s), day: dl(d), ..MapRow::default() }));
        }
    };
    section_day(&index.y1, "y1", &mut rows);
    section_day(&index.ygp1, "ygp1", &mut rows);
    section_day(&index.tgp2, "tgp2", &mut rows);
    section_day(&index.tgp3, "tgp3", &mut rows);
    for (&(s, d, r), &v) in &index.y2 {
        rows.insert(v, ("y2", MapRow { section: sid(s), room: rid(r), day: dl(d), ..MapRow::default() }));
    }
    for (m, kind) in [(&index.y3, "y3"), (&index.t4, "t4")] {
        for (&(p, d), &v) in m {
            rows.insert(v, (kind, MapRow { professor: pid(p), day: dl(d), ..MapRow::default() }));
        }
    }
    for (m, kind) in [(&index.ttue, "ttue"), (&index.t5, "t5")] {
        for (&p, &v) in m {
            rows.insert(v, (kind, MapRow { professor: pid(p), ..MapRow::default() }));
        }
    }
    for (&(p, slot), &v) in &index.t0 {
        let (day, period) = at(slot);
        rows.insert(v, ("t0", MapRow { professor: pid(p), day, period, ..MapRow::default() }));
    }
    for (&s, &v) in &index.ts {
        rows.insert(v, ("ts", MapRow { section: sid(s), ..MapRow::default() }));
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(MAP_HEADER).expect("writing to memory");
    for (v, (kind, r)) in rows {
        let var = model.var(v);
        let upper = var.upper.to_string();
        w.write_record([&var.name, kind, &r.section, &r.group, &r.professor, &r.room, &r.day, &r.period, &upper])
            .expect("writing to memory");
    }
    to_string(w)
}

/// Rebuilds, from an index map, a variable-only model (for reading solution
/// files by name) and the index needed to decode them. `groups` must be the
/// groups the program was built for.
pub fn read_index_map(text: &str, inst: &Instance, groups: &[Group]) -> Result<(Model, TipIndex), FileError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut model = Model::new();
    let mut index = TipIndex { groups: groups.to_vec(), ..TipIndex::default() };
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let f = |k: usize| rec.get(k).unwrap_or("").trim();
        let err = |message: String| FileError::Line { line, message };
        let look =
            |what: &str, id: &str, found: Option<usize>| found.ok_or_else(|| err(format!("unknown {what} {id:?}")));
        let section = || look("section", f(2), inst.section_idx(f(2)));
        let group = || look("group", f(3), groups.iter().position(|g| g.id == f(3)));
        let prof = || look("professor", f(4), inst.prof_idx(f(4)));
        let room = || look("room", f(5), inst.room_idx(f(5)));
        let day = || Day::parse(f(6)).map(Day::index).ok_or_else(|| err(format!("bad day {:?}", f(6))));
        let slot = || -> Result<usize, FileError> {
            let d = Day::parse(f(6)).ok_or_else(|| err(format!("bad day {:?}", f(6))))?;
            let t: u8 = f(7)
                .parse()
                .ok()
                .filter(|t| (1..=NUM_PERIODS as u8).contains(t))
                .ok_or_else(|| err(format!("bad period {:?}", f(7))))?;
            Ok(Slot::new(d, t).index())
        };
        let upper: f64 = f(8).parse().map_err(|_| err(format!("bad upper bound {:?}", f(8))))?;
        let kind = f(1);
        let v =
            if kind == "ts" { model.add_var(f(0), VarKind::Integer, 0.0, upper)? } else { model.add_binary(f(0))? };
        match kind {
            "z" => drop(index.z.insert((section()?, slot()?, room()?), v)),
            "w" => drop(index.w.insert((prof()?, slot()?), v)),
            "x" => drop(index.x.insert((group()?, section()?), v)),
            "u" => drop(index.u.insert((group()?, slot()?, section()?), v)),
            "y1" => drop(index.y1.insert((section()?, day()?), v)),
            "y2" => drop(index.y2.insert((section()?, day()?, room()?), v)),
            "y3" => drop(index.y3.insert((prof()?, day()?), v)),
            "t4" => drop(index.t4.insert((prof()?, day()?), v)),
            "ttue" => drop(index.ttue.insert(prof()?, v)),
            "t5" => drop(index.t5.insert(prof()?, v)),
            "ygp1" => drop(index.ygp1.insert((section()?, day()?), v)),
            "tgp2" => drop(index.tgp2.insert((section()?, day()?), v)),
            "tgp3" => drop(index.tgp3.insert((section()?, day()?), v)),
            "t0" => drop(index.t0.insert((prof()?, slot()?), v)),
            "ts" => drop(index.ts.insert(section()?, v)),
            other => return Err(err(format!("unknown variable kind {other:?}"))),
        }
    }
    Ok((model, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mipcore::{parse_solution, solve_exact, write_solution, Limits};
    use crate::model::fixtures::sample_consistent;
    use crate::tip::{build_tip, decode_solution, CapacityMode, Weights};

    #[test]
    fn timetable_round_trip() {
        let inst = sample_consistent();
        let (m, idx) = build_tip(&inst, &inst.groups, &Weights::default(), CapacityMode::Soft).unwrap();
        let r = solve_exact(&m, &Limits::default()).unwrap();
        let mut tt = decode_solution(&inst, &idx, r.assignment.as_ref().unwrap()).unwrap();
        tt.over_capacity.insert("S01".into(), 2);
        let text = write_timetable(&tt, &inst.groups, &inst);
        let (back, groups) = parse_timetable(&text, &inst).unwrap();
        assert_eq!(back, tt);
        assert_eq!(groups, inst.groups);
        assert!(matches!(parse_timetable("kind\nbogus\n", &inst), Err(FileError::Line { line: 2, .. })));
    }

    #[test]
    fn index_map_decodes_a_solution_file() {
        let inst = sample_consistent();
        let (m, idx) = build_tip(&inst, &inst.groups, &Weights::default(), CapacityMode::Soft).unwrap();
        let r = solve_exact(&m, &Limits::default()).unwrap();
        let a = r.assignment.unwrap();
        let direct = decode_solution(&inst, &idx, &a).unwrap();
        let sol = write_solution(&m, &a, r.status, r.objective.unwrap());

        let map = write_index_map(&m, &inst, &idx);
        assert_eq!(map.lines().count(), m.num_vars() + 1);
        let (m2, idx2) = read_index_map(&map, &inst, &inst.groups).unwrap();
        assert_eq!(m2.num_vars(), m.num_vars());
        assert_eq!(idx2.z, idx.z);
        assert_eq!(idx2.ts, idx.ts);
        assert_eq!(idx2.t0, idx.t0);
        let parsed = parse_solution(&sol, &m2).unwrap();
        assert!(parsed.warnings.is_empty());
        assert_eq!(decode_solution(&inst, &idx2, &parsed.assignment).unwrap(), direct);
    }
}

//! Reading and writing the tabular input files, plus pre-solve data checks.

mod checks;
mod write;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use csv::{ReaderBuilder, StringRecord, Trim};
use thiserror::Error;

use crate::model::{
    Availability, Course, Day, Group, Instance, InstanceError, Mandate, Professor, Room, Section, FULL_AVAILABILITY,
    NUM_PERIODS,
};

pub(crate) use checks::course_demand;
pub use checks::{validate_instance, DataIssue, IssueCode, Severity};
pub use write::{write_availability, write_groups, write_rooms, write_sections};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{file}:{line}: {source}")]
    Csv { file: String, line: u64, source: csv::Error },
    #[error("{file}:{line}: column {column}: {message}")]
    Parse { file: String, line: u64, column: String, message: String },
    #[error("{file}: missing required column {column:?}")]
    MissingColumn { file: String, column: String },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// An instance together with non-fatal remarks from parsing.
#[derive(Debug, Clone)]
pub struct ParsedInstance {
    pub instance: Instance,
    pub warnings: Vec<String>,
}

/// Raw text of the four input tables.
#[derive(Debug, Clone, Copy)]
pub struct Tables<'a> {
    pub groups: &'a str,
    pub sections: &'a str,
    pub rooms: &'a str,
    pub availability: &'a str,
}

fn read(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })
}

pub fn parse_instance(
    groups_path: &Path,
    sections_path: &Path,
    rooms_path: &Path,
    availability_path: &Path,
) -> Result<ParsedInstance, IngestError> {
    let (g, s, r, a) = (read(groups_path)?, read(sections_path)?, read(rooms_path)?, read(availability_path)?);
    parse_tables(Tables { groups: &g, sections: &s, rooms: &r, availability: &a })
}

/// One CSV table with header lookup and position-aware error helpers.
struct Table {
    file: &'static str,
    header: StringRecord,
    rows: Vec<(u64, StringRecord)>,
}

impl Table {
    fn parse(file: &'static str, text: &str) -> Result<Table, IngestError> {
        let mut rdr =
            ReaderBuilder::new().flexible(true).trim(Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|source| IngestError::Csv { file: file.into(), line: 1, source })?.clone();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|source| {
                let line = source.position().map_or(0, |p| p.line());
                IngestError::Csv { file: file.into(), line, source }
            })?;
            if rec.iter().all(str::is_empty) {
                continue;
            }
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec));
        }
        Ok(Table { file, header, rows })
    }

    fn col(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h.eq_ignore_ascii_case(name))
    }

    fn require(&self, name: &str) -> Result<usize, IngestError> {
        self.col(name).ok_or_else(|| IngestError::MissingColumn { file: self.file.into(), column: name.into() })
    }

    /// Warns about header columns outside `known` (and not matched by `extra`).
    fn unknown_columns(&self, known: &[&str], extra: impl Fn(&str) -> bool, warnings: &mut Vec<String>) {
        for h in self.header.iter() {
            if !known.iter().any(|k| k.eq_ignore_ascii_case(h)) && !extra(h) {
                warnings.push(format!("{}: ignoring unknown column {h:?}", self.file));
            }
        }
    }

    fn err(&self, line: u64, column: &str, message: impl Into<String>) -> IngestError {
        IngestError::Parse { file: self.file.into(), line, column: column.into(), message: message.into() }
    }

    fn field<'r>(&self, rec: &'r StringRecord, col: Option<usize>) -> &'r str {
        col.and_then(|c| rec.get(c)).unwrap_or("")
    }

    fn ident(&self, line: u64, rec: &StringRecord, col: usize) -> Result<String, IngestError> {
        let v = self.field(rec, Some(col));
        if v.is_empty() {
            return Err(self.err(line, &self.header[col], "empty value"));
        }
        Ok(v.to_string())
    }

    fn number<T: std::str::FromStr>(&self, line: u64, rec: &StringRecord, col: usize) -> Result<T, IngestError> {
        let v = self.field(rec, Some(col));
        v.parse().map_err(|_| self.err(line, &self.header[col], format!("{v:?} is not a valid number")))
    }

    fn optional_id(&self, line: u64, rec: &StringRecord, col: Option<usize>) -> Result<Option<u32>, IngestError> {
        let v = self.field(rec, col);
        if v.is_empty() {
            return Ok(None);
        }
        let name = &self.header[col.unwrap()];
        match v.parse::<u32>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(self.err(line, name, format!("{v:?} is not a positive integer"))),
        }
    }

    fn flag(&self, line: u64, rec: &StringRecord, col: Option<usize>) -> Result<bool, IngestError> {
        match self.field(rec, col) {
            "" | "N" | "n" => Ok(false),
            "Y" | "y" => Ok(true),
            v => Err(self.err(line, &self.header[col.unwrap()], format!("expected Y or N, got {v:?}"))),
        }
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(';').map(str::trim).filter(|t| !t.is_empty())
}

fn parse_rooms(text: &str, warnings: &mut Vec<String>) -> Result<Vec<Room>, IngestError> {
    let t = Table::parse("rooms.csv", text)?;
    let (id, cap, ty) = (t.require("room_id")?, t.require("capacity")?, t.require("room_type")?);
    t.unknown_columns(&["room_id", "capacity", "room_type"], |_| false, warnings);
    t.rows
        .iter()
        .map(|(line, rec)| {
            Ok(Room {
                id: t.ident(*line, rec, id)?,
                capacity: t.number(*line, rec, cap)?,
                room_type: t.ident(*line, rec, ty)?,
            })
        })
        .collect()
}

fn is_course_column(h: &str) -> bool {
    h.to_ascii_lowercase().starts_with("course")
}

fn parse_groups(text: &str, warnings: &mut Vec<String>) -> Result<Vec<Group>, IngestError> {
    let t = Table::parse("groups.csv", text)?;
    let (id, size) = (t.require("group_id")?, t.require("size")?);
    let parent = t.col("parent");
    t.unknown_columns(&["group_id", "size", "parent"], is_course_column, warnings);
    let course_cols: Vec<usize> = (0..t.header.len()).filter(|&i| is_course_column(&t.header[i])).collect();
    let mut out = Vec::with_capacity(t.rows.len());
    for (line, rec) in &t.rows {
        let line = *line;
        let mut g = Group::new(t.ident(line, rec, id)?, t.number(line, rec, size)?, Vec::<String>::new());
        // Fields past the header width continue the course list.
        let tail = t.header.len()..rec.len();
        for c in course_cols.iter().copied().chain(tail) {
            let v = t.field(rec, Some(c));
            if !v.is_empty() && !g.curriculum.insert(v.to_string()) {
                warnings.push(format!("groups.csv:{line}: course {v:?} listed twice for {}", g.id));
            }
        }
        let p = t.field(rec, parent);
        if !p.is_empty() {
            g.lineage = Some(p.to_string());
        }
        out.push(g);
    }
    Ok(out)
}

const SECTION_COLUMNS: [&str; 13] = [
    "section_id",
    "prof",
    "course",
    "periods",
    "lab",
    "capacity",
    "room_type",
    "labtie",
    "link",
    "adjunct",
    "mandates",
    "coprofs",
    "final_exam",
];

fn parse_sections(text: &str, warnings: &mut Vec<String>) -> Result<Vec<Section>, IngestError> {
    let t = Table::parse("sections.csv", text)?;
    let id = t.require("section_id")?;
    let prof = t.require("prof")?;
    let course = t.require("course")?;
    let periods = t.require("periods")?;
    let capacity = t.require("capacity")?;
    let room_type = t.require("room_type")?;
    let [lab, labtie, link, adjunct, mandates, coprofs, final_exam] =
        ["lab", "labtie", "link", "adjunct", "mandates", "coprofs", "final_exam"].map(|c| t.col(c));
    t.unknown_columns(&SECTION_COLUMNS, |_| false, warnings);
    let mut out = Vec::with_capacity(t.rows.len());
    for (line, rec) in &t.rows {
        let line = *line;
        let mut s = Section::lecture(
            t.ident(line, rec, id)?,
            t.ident(line, rec, prof)?,
            t.ident(line, rec, course)?,
            t.number(line, rec, periods)?,
            t.number(line, rec, capacity)?,
            t.ident(line, rec, room_type)?,
        );
        s.is_lab = t.flag(line, rec, lab)?;
        s.labtie = t.optional_id(line, rec, labtie)?;
        s.link = t.optional_id(line, rec, link)?;
        s.is_adjunct_taught = t.flag(line, rec, adjunct)?;
        for tok in split_list(t.field(rec, mandates)) {
            let m = Mandate::parse(tok)
                .ok_or_else(|| t.err(line, "mandates", format!("bad mandate {tok:?}, expected d:t or d:*")))?;
            s.mandates.push(m);
        }
        s.coprofs = split_list(t.field(rec, coprofs)).map(String::from).collect();
        let fe = t.field(rec, final_exam);
        s.final_exam = (!fe.is_empty()).then(|| fe.to_string());
        out.push(s);
    }
    Ok(out)
}

fn parse_availability(text: &str, warnings: &mut Vec<String>) -> Result<BTreeMap<String, Availability>, IngestError> {
    let t = Table::parse("availability.csv", text)?;
    let (prof, day) = (t.require("prof")?, t.require("day")?);
    let names: Vec<String> = (1..=NUM_PERIODS).map(|p| format!("p{p}")).collect();
    let cols: Vec<Option<usize>> = names.iter().map(|n| t.col(n)).collect();
    let mut known: Vec<&str> = vec!["prof", "day"];
    known.extend(names.iter().map(String::as_str));
    t.unknown_columns(&known, |_| false, warnings);
    let mut out: BTreeMap<String, Availability> = BTreeMap::new();
    let mut seen: HashMap<(String, Day), u64> = HashMap::new();
    for (line, rec) in &t.rows {
        let line = *line;
        let p = t.ident(line, rec, prof)?;
        let d_text = t.field(rec, Some(day));
        let d = Day::parse(d_text).ok_or_else(|| t.err(line, "day", format!("unknown day {d_text:?}")))?;
        if let Some(prev) = seen.insert((p.clone(), d), line) {
            return Err(t.err(line, "day", format!("{p} {d} already given on line {prev}")));
        }
        let grid = out.entry(p).or_insert(FULL_AVAILABILITY);
        for (k, col) in cols.iter().enumerate() {
            let v = t.field(rec, *col);
            grid[d.index()][k] = match v {
                "" => 1,
                "1" => 1,
                "0" => 0,
                "-1" => -1,
                "-2" => -2,
                _ => return Err(t.err(line, &names[k], format!("availability {v:?} not in {{1,0,-1,-2}}"))),
            };
        }
    }
    Ok(out)
}

/// Course period counts: for each course the most common section period
/// count, ties going to the one seen first.
fn derive_courses(sections: &[Section]) -> Vec<Course> {
    let mut tally: BTreeMap<&str, Vec<(u8, usize)>> = BTreeMap::new();
    for s in sections {
        let counts = tally.entry(&s.course).or_default();
        match counts.iter_mut().find(|(p, _)| *p == s.periods) {
            Some(e) => e.1 += 1,
            None => counts.push((s.periods, 1)),
        }
    }
    tally
        .into_iter()
        .map(|(id, counts)| {
            let best = counts.iter().map(|c| c.1).max().unwrap_or(0);
            let periods = counts.iter().find(|c| c.1 == best).map_or(0, |c| c.0);
            Course { id: id.to_string(), periods }
        })
        .collect()
}

/// Parses the four tables into an instance. Professors are every id that
/// appears as a section professor, co-professor or availability block;
/// missing availability defaults to fully available. A professor counts as
/// adjunct when any of their sections is marked adjunct.
pub fn parse_tables(tables: Tables<'_>) -> Result<ParsedInstance, IngestError> {
    let mut warnings = Vec::new();
    let rooms = parse_rooms(tables.rooms, &mut warnings)?;
    let groups = parse_groups(tables.groups, &mut warnings)?;
    let sections = parse_sections(tables.sections, &mut warnings)?;
    let avail = parse_availability(tables.availability, &mut warnings)?;

    let mut profs: BTreeMap<String, Professor> = BTreeMap::new();
    for s in &sections {
        let p = profs.entry(s.prof.clone()).or_insert_with(|| Professor::new(s.prof.clone()));
        p.is_adjunct |= s.is_adjunct_taught;
    }
    for s in &sections {
        for cp in &s.coprofs {
            profs.entry(cp.clone()).or_insert_with(|| Professor::new(cp.clone()));
        }
    }
    for (id, grid) in avail {
        profs.entry(id.clone()).or_insert_with(|| Professor::new(id)).availability = grid;
    }
    let courses = derive_courses(&sections);
    let instance = Instance::new(rooms, profs.into_values().collect(), courses, sections, groups)?;
    Ok(ParsedInstance { instance, warnings })
}

#[cfg(test)]
pub(crate) mod samples {
    pub const ROOMS: &str = "room_id,capacity,room_type
F101,30,CLASSROOM
F102,30,CLASSROOM
F103,30,CLASSROOM
F310,21,PHYSLAB
F339,15,CHEMLAB
B101,30,LECTUREHALL
B102,30,LECTUREHALL
";

    pub const SECTIONS: &str =
        "section_id,prof,course,periods,lab,capacity,room_type,labtie,link,adjunct,mandates,coprofs
S01,Gauss,CALC1,3,N,26,CLASSROOM,,,N,,
S02,Gauss,GEOM1,3,N,26,CLASSROOM,,,N,,
S03,Gauss,CALC1,3,N,26,CLASSROOM,,,N,,
S04,Riemann,CALC1,3,N,26,CLASSROOM,,,N,,
S05,Riemann,STAT2,3,N,17,CLASSROOM,,,N,,
S06,Turing,COMP1,4,N,22,CLASSROOM,,,N,,
S07,Turing,COMP1,4,N,22,CLASSROOM,,,N,,
S08,Einstein,PHYS1,3,N,21,CLASSROOM,1,,N,,
S09,Einstein,PHYS1LAB,2,Y,21,PHYSLAB,1,,N,,
S10,Bohr,PHYS1,3,N,21,CLASSROOM,2,,N,,
S11,Pauli,PHYS1LAB,2,Y,21,PHYSLAB,2,,N,,
S12,Curie,CHEM1,3,N,25,CLASSROOM,3,,N,,
S13,Curie,CHEM1LAB,2,Y,15,CHEMLAB,3,,N,,
S14,Austen,ENGL1,3,N,20,LECTUREHALL,,,N,,
S15,Austen,ENGL1,3,N,20,LECTUREHALL,,,N,,
";

    /// Group sizes and curricula as printed in the introduction.
    pub const GROUPS_PRINTED: &str = "group_id,size,course_1,course_2,course_3,course_4
G1,37,CALC1,STAT2,COMP1,PHYS1
G2,42,ENGL1,PHYS1,PHYS1LAB,STAT2
G3,14,CALC1,PHYS1,PHYS1LAB,ENGL1
G4,19,COMP1,PHYS1,PHYS1LAB,STAT2
G5,39,CALC1,PHYS1,PHYS1LAB,GEOM1
G6,1,ENGL1,CHEM1,CHEM1LAB,COMP1
";

    /// The same curricula with sizes reduced until every course has room.
    pub const GROUPS: &str = "group_id,size,course_1,course_2,course_3,course_4
G1,6,CALC1,STAT2,COMP1,PHYS1
G2,5,ENGL1,PHYS1,PHYS1LAB,STAT2
G3,8,CALC1,PHYS1,PHYS1LAB,ENGL1
G4,6,COMP1,PHYS1,PHYS1LAB,STAT2
G5,15,CALC1,PHYS1,PHYS1LAB,GEOM1
G6,1,ENGL1,CHEM1,CHEM1LAB,COMP1
";

    pub const AVAILABILITY: &str = "prof,day,p1,p2,p3,p4,p5,p6,p7
Einstein,M,0,0,0,0,0,0,0
Einstein,T,,,,,,,
Einstein,W,,,,,,,
Einstein,R,,,,,,,
Einstein,F,0,0,0,0,0,0,0
Gauss,M,0,,,,,,0
Gauss,T,0,,,,,,0
Gauss,W,0,,,,,,0
Gauss,R,0,,,,,,0
Gauss,F,0,,,,,,0
Riemann,M,0,0,,,,0,0
Riemann,T,0,0,,,,0,0
Riemann,W,0,0,,,,0,0
Riemann,R,0,0,,,,0,0
Riemann,F,0,0,,,,0,0
";
}

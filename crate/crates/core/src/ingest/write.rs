//! Writers producing the normalized form of each input table.

use csv::WriterBuilder;

use crate::model::{Day, Group, Instance};

fn to_string(rows: Vec<Vec<String>>) -> String {
    let mut w = WriterBuilder::new().flexible(true).from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
}

fn yn(b: bool) -> String {
    if b { "Y" } else { "N" }.to_string()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `group_id,size[,parent],course_1..course_k`; the parent column appears
/// only when some group came from a split.
pub fn write_groups(groups: &[Group]) -> String {
    let width = groups.iter().map(|g| g.curriculum.len()).max().unwrap_or(1);
    let lineage = groups.iter().any(|g| g.lineage.is_some());
    let mut header = vec!["group_id".to_string(), "size".to_string()];
    if lineage {
        header.push("parent".into());
    }
    header.extend((1..=width).map(|i| format!("course_{i}")));
    let mut rows = vec![header];
    for g in groups {
        let mut r = vec![g.id.clone(), g.size.to_string()];
        if lineage {
            r.push(g.lineage.clone().unwrap_or_default());
        }
        r.extend(g.curriculum.iter().cloned());
        r.resize(2 + usize::from(lineage) + width, String::new());
        rows.push(r);
    }
    to_string(rows)
}

pub fn write_sections(inst: &Instance) -> String {
    let mut rows = vec![[
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
    ]
    .map(String::from)
    .to_vec()];
    for s in &inst.sections {
        rows.push(vec![
            s.id.clone(),
            s.prof.clone(),
            s.course.clone(),
            s.periods.to_string(),
            yn(s.is_lab),
            s.capacity.to_string(),
            s.room_type.clone(),
            opt(s.labtie),
            opt(s.link),
            yn(s.is_adjunct_taught),
            s.mandates.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(";"),
            s.coprofs.join(";"),
            s.final_exam.clone().unwrap_or_default(),
        ]);
    }
    to_string(rows)
}

pub fn write_rooms(inst: &Instance) -> String {
    let mut rows = vec![vec!["room_id".to_string(), "capacity".into(), "room_type".into()]];
    for r in &inst.rooms {
        rows.push(vec![r.id.clone(), r.capacity.to_string(), r.room_type.clone()]);
    }
    to_string(rows)
}

/// Five rows per professor, every cell explicit.
pub fn write_availability(inst: &Instance) -> String {
    let mut header = vec!["prof".to_string(), "day".to_string()];
    header.extend((1..=7).map(|p| format!("p{p}")));
    let mut rows = vec![header];
    for p in &inst.professors {
        for d in Day::ALL {
            let mut r = vec![p.id.clone(), d.to_string()];
            r.extend(p.availability[d.index()].iter().map(|v| v.to_string()));
            rows.push(r);
        }
    }
    to_string(rows)
}

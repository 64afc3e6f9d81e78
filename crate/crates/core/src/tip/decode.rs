use thiserror::Error;

use super::{Meeting, Timetable, TipIndex};
use crate::mipcore::{Assignment, VarId, INT_TOL};
use crate::model::{Instance, Slot};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("assignment has {got} values, program has at least {need}")]
    Length { got: usize, need: usize },
    #[error("{what} has non-integral value {value}")]
    Fractional { what: String, value: f64 },
}

fn integral(a: &Assignment, v: VarId, what: impl FnOnce() -> String) -> Result<i64, DecodeError> {
    let value = a.get(v);
    let r = value.round();
    if (value - r).abs() > INT_TOL || !value.is_finite() {
        return Err(DecodeError::Fractional { what: what(), value });
    }
    Ok(r as i64)
}

/// Reads section meetings, group enrollments, professor grids and
/// over-capacity amounts out of a program solution.
pub fn decode_solution(inst: &Instance, index: &TipIndex, a: &Assignment) -> Result<Timetable, DecodeError> {
    let need = index
        .z
        .values()
        .chain(index.w.values())
        .chain(index.x.values())
        .chain(index.ts.values())
        .map(|v| v.0 + 1)
        .max()
        .unwrap_or(0);
    if a.values.len() < need {
        return Err(DecodeError::Length { got: a.values.len(), need });
    }
    let mut tt = Timetable::default();
    for s in &inst.sections {
        tt.meetings.entry(s.id.clone()).or_default();
    }
    for (&(s, slot, r), &v) in &index.z {
        let sec = &inst.sections[s].id;
        let at = Slot::from_index(slot);
        let room = &inst.rooms[r].id;
        if integral(a, v, || format!("placement of {sec} at {at} in {room}"))? == 1 {
            let m = Meeting { day: at.day, period: at.period, room: room.clone() };
            tt.meetings.get_mut(sec).expect("seeded").insert(m);
        }
    }
    for g in &index.groups {
        tt.enrollments.entry(g.id.clone()).or_default();
    }
    for (&(g, s), &v) in &index.x {
        let gid = &index.groups[g].id;
        let sid = &inst.sections[s].id;
        if integral(a, v, || format!("enrollment of {gid} in {sid}"))? == 1 {
            tt.enrollments.get_mut(gid).expect("seeded").insert(sid.clone());
        }
    }
    for (&(p, slot), &v) in &index.w {
        let pid = &inst.professors[p].id;
        let at = Slot::from_index(slot);
        if integral(a, v, || format!("teaching of {pid} at {at}"))? == 1 {
            tt.prof_grid.entry(pid.clone()).or_default().insert((at.day, at.period));
        }
    }
    for (&s, &v) in &index.ts {
        let sid = &inst.sections[s].id;
        let over = integral(a, v, || format!("overflow of {sid}"))?;
        if over > 0 {
            tt.over_capacity.insert(sid.clone(), over as u32);
        }
    }
    Ok(tt)
}

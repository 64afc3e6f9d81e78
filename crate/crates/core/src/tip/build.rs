use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{CapacityMode, Family, TipIndex, Weights};
use crate::mipcore::{Model, ModelError, Sense, VarId, VarKind};
use crate::model::{
    forbidden_lab_pairs, forbidden_lab_triples, fulltime_professors, group_section_options, Day, Group, Instance,
    Mandate, Slot, NUM_DAYS, NUM_PERIODS, NUM_SLOTS,
};

#[derive(Debug, Error)]
pub enum TipError {
    #[error("section {0:?} has no compatible room")]
    NoRoom(String),
    #[error("group {group:?} needs course {course:?}, which has no sections")]
    NoSections { group: String, course: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

type Terms = Vec<(f64, VarId)>;

struct Builder {
    m: Model,
    idx: TipIndex,
}

impl Builder {
    fn binary(&mut self, name: String, priority: i32) -> Result<VarId, ModelError> {
        let v = self.m.add_binary(name)?;
        if priority != 0 {
            self.m.set_priority(v, priority);
        }
        Ok(v)
    }

    fn row(&mut self, family: Family, name: String, terms: Terms, sense: Sense, rhs: f64) -> Result<(), ModelError> {
        if terms.is_empty() {
            return Ok(());
        }
        self.m.add_constraint(name, terms, sense, rhs)?;
        self.idx.row_family.push(family);
        Ok(())
    }
}

fn slot_label(slot: usize) -> String {
    let s = Slot::from_index(slot);
    format!("{},{}", s.day, s.period)
}

fn slot_of(d: usize, t: u8) -> usize {
    d * NUM_PERIODS + (t as usize - 1)
}

/// Builds the full timetabling program for `groups` (normally the refined
/// groups from the subgroup step).
pub fn build_tip(
    inst: &Instance,
    groups: &[Group],
    weights: &Weights,
    mode: CapacityMode,
) -> Result<(Model, TipIndex), TipError> {
    let nsec = inst.sections.len();
    let rooms_of: Vec<Vec<usize>> = (0..nsec).map(|s| inst.compatible_rooms(s)).collect();
    if let Some(s) = (0..nsec).find(|&s| rooms_of[s].is_empty()) {
        return Err(TipError::NoRoom(inst.sections[s].id.clone()));
    }
    let by_course = inst.sections_by_course();
    for g in groups {
        if let Some(c) = g.curriculum.iter().find(|c| !by_course.contains_key(c.as_str())) {
            return Err(TipError::NoSections { group: g.id.clone(), course: c.clone() });
        }
    }
    let options = group_section_options(inst, groups);
    let fulltime = fulltime_professors(inst);
    let sec = |s: usize| &inst.sections[s];
    let prof_of: Vec<usize> = inst.sections.iter().map(|s| inst.prof_idx(&s.prof).expect("resolved")).collect();
    let coprofs_of: Vec<Vec<usize>> = inst
        .sections
        .iter()
        .map(|s| {
            let set: BTreeSet<usize> = s.coprofs.iter().map(|p| inst.prof_idx(p).expect("resolved")).collect();
            set.into_iter().collect()
        })
        .collect();
    let gid = |g: usize| groups[g].id.as_str();
    let sid = |s: usize| inst.sections[s].id.as_str();
    let pid = |p: usize| inst.professors[p].id.as_str();
    let rid = |r: usize| inst.rooms[r].id.as_str();
    let dl = |d: usize| Day::ALL[d].label();

    let mut b = Builder { m: Model::new(), idx: TipIndex { groups: groups.to_vec(), ..TipIndex::default() } };

    // Major variables.
    // z_at[s][slot] = [(room, var)]
    let mut z_at: Vec<Vec<Vec<(usize, VarId)>>> = vec![vec![Vec::new(); NUM_SLOTS]; nsec];
    for s in 0..nsec {
        for slot in 0..NUM_SLOTS {
            for &r in &rooms_of[s] {
                let v = b.binary(format!("z({},{},{})", sid(s), slot_label(slot), rid(r)), 1)?;
                z_at[s][slot].push((r, v));
                b.idx.z.insert((s, slot, r), v);
            }
        }
    }
    let nprof = inst.professors.len();
    let mut w_at = vec![[VarId(0); NUM_SLOTS]; nprof];
    for p in 0..nprof {
        for slot in 0..NUM_SLOTS {
            let v = b.binary(format!("w({},{})", pid(p), slot_label(slot)), 0)?;
            w_at[p][slot] = v;
            b.idx.w.insert((p, slot), v);
        }
    }
    for &(g, s) in &options {
        let v = b.binary(format!("x({},{})", gid(g), sid(s)), 2)?;
        b.idx.x.insert((g, s), v);
    }
    let mut u_at: BTreeMap<(usize, usize), [VarId; NUM_SLOTS]> = BTreeMap::new();
    for &(g, s) in &options {
        let mut arr = [VarId(0); NUM_SLOTS];
        for (slot, a) in arr.iter_mut().enumerate() {
            *a = b.binary(format!("u({},{},{})", gid(g), slot_label(slot), sid(s)), 0)?;
            b.idx.u.insert((g, slot, s), *a);
        }
        u_at.insert((g, s), arr);
    }

    // Auxiliary variables.
    let labs: Vec<usize> = (0..nsec).filter(|&s| sec(s).is_lab).collect();
    for &s in &labs {
        for d in 0..NUM_DAYS {
            let v = b.binary(format!("y1({},{})", sid(s), dl(d)), 0)?;
            b.idx.y1.insert((s, d), v);
        }
    }
    for &s in &labs {
        for d in 0..NUM_DAYS {
            for &r in &rooms_of[s] {
                let v = b.binary(format!("y2({},{},{})", sid(s), dl(d), rid(r)), 0)?;
                b.idx.y2.insert((s, d, r), v);
            }
        }
    }
    for p in 0..nprof {
        for d in 0..NUM_DAYS {
            let v = b.binary(format!("y3({},{})", pid(p), dl(d)), 0)?;
            b.idx.y3.insert((p, d), v);
        }
    }
    for p in 0..nprof {
        for d in 0..NUM_DAYS {
            let v = b.binary(format!("t4({},{})", pid(p), dl(d)), 0)?;
            b.m.add_objective(weights.d4, v);
            b.idx.t4.insert((p, d), v);
        }
    }
    for p in 0..nprof {
        if fulltime.contains(&inst.professors[p].id) {
            let v = b.binary(format!("ttue({})", pid(p)), 0)?;
            b.m.add_objective(weights.dtue, v);
            b.idx.ttue.insert(p, v);
        }
    }
    for p in 0..nprof {
        let v = b.binary(format!("t5({})", pid(p)), 0)?;
        b.m.add_objective(weights.d5, v);
        b.idx.t5.insert(p, v);
    }
    let spread: Vec<usize> = (0..nsec).filter(|&s| !sec(s).is_lab && (2..=3).contains(&sec(s).periods)).collect();
    for &s in &spread {
        for d in 0..NUM_DAYS {
            let v = b.binary(format!("ygp1({},{})", sid(s), dl(d)), 0)?;
            b.idx.ygp1.insert((s, d), v);
        }
    }
    for &s in spread.iter().filter(|&&s| sec(s).periods == 2) {
        for d in 0..NUM_DAYS - 1 {
            let v = b.binary(format!("tgp2({},{})", sid(s), dl(d)), 0)?;
            b.m.add_objective(weights.dgp2, v);
            b.idx.tgp2.insert((s, d), v);
        }
    }
    for &s in spread.iter().filter(|&&s| sec(s).periods == 3) {
        for d in 0..NUM_DAYS - 2 {
            let v = b.binary(format!("tgp3({},{})", sid(s), dl(d)), 0)?;
            b.m.add_objective(weights.dgp3, v);
            b.idx.tgp3.insert((s, d), v);
        }
    }
    for p in 0..nprof {
        let prof = &inst.professors[p];
        for slot in 0..NUM_SLOTS {
            let a = prof.avail(Slot::from_index(slot));
            if a <= 0 {
                let v = b.binary(format!("t0({},{})", pid(p), slot_label(slot)), 0)?;
                b.m.add_objective(weights.availability_cost(a, prof.is_adjunct), v);
                b.idx.t0.insert((p, slot), v);
            }
        }
    }
    let mut w_load: Vec<u64> = vec![0; nsec];
    for &(g, s) in &options {
        w_load[s] += u64::from(groups[g].size);
    }
    if mode == CapacityMode::Soft {
        for s in 0..nsec {
            let v = b.m.add_var(format!("ts({})", sid(s)), VarKind::Integer, 0.0, w_load[s] as f64)?;
            let c = if sec(s).is_lab { weights.ct_lab } else { weights.ct_regular };
            b.m.add_objective(c, v);
            b.idx.ts.insert(s, v);
        }
    }

    let zsum = |s: usize, slot: usize| -> Terms { z_at[s][slot].iter().map(|&(_, v)| (1.0, v)).collect() };
    let zday = |s: usize, d: usize| -> Terms { (0..NUM_PERIODS).flat_map(|k| zsum(s, d * NUM_PERIODS + k)).collect() };

    // H1: exactly periods(s) meetings.
    for s in 0..nsec {
        let terms = (0..NUM_SLOTS).flat_map(|slot| zsum(s, slot)).collect();
        b.row(Family::H1, format!("periods({})", sid(s)), terms, Sense::Eq, f64::from(sec(s).periods))?;
    }
    // H2: linked sections meet at identical times.
    let mut links: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for s in 0..nsec {
        if let Some(k) = sec(s).link {
            links.entry(k).or_default().push(s);
        }
    }
    for members in links.values() {
        for (i, &s1) in members.iter().enumerate() {
            for &s2 in &members[i + 1..] {
                for slot in 0..NUM_SLOTS {
                    let mut terms = zsum(s1, slot);
                    terms.extend(zsum(s2, slot).into_iter().map(|(_, v)| (-1.0, v)));
                    let name = format!("link({},{},{})", sid(s1), sid(s2), slot_label(slot));
                    b.row(Family::H2, name, terms, Sense::Eq, 0.0)?;
                }
            }
        }
    }
    // H3: one section per room and slot.
    for slot in 0..NUM_SLOTS {
        for r in 0..inst.rooms.len() {
            let terms: Terms = (0..nsec).filter_map(|s| b.idx.z.get(&(s, slot, r)).map(|&v| (1.0, v))).collect();
            b.row(Family::H3, format!("room({},{})", rid(r), slot_label(slot)), terms, Sense::Le, 1.0)?;
        }
    }
    // H4: mandates.
    for s in 0..nsec {
        let mandates: BTreeSet<Mandate> = sec(s).mandates.iter().copied().collect();
        for m in mandates {
            match m {
                Mandate::Day(day) => {
                    let name = format!("mandate({},{})", sid(s), day);
                    b.row(Family::H4, name, zday(s, day.index()), Sense::Ge, 1.0)?;
                }
                Mandate::Slot(day, t) => {
                    let slot = slot_of(day.index(), t);
                    let name = format!("mandate({},{})", sid(s), slot_label(slot));
                    b.row(Family::H4, name, zsum(s, slot), Sense::Eq, 1.0)?;
                }
            }
        }
    }
    // H5: lectures meet at most once a day.
    for s in (0..nsec).filter(|&s| !sec(s).is_lab) {
        for d in 0..NUM_DAYS {
            b.row(Family::H5, format!("daily({},{})", sid(s), dl(d)), zday(s, d), Sense::Le, 1.0)?;
        }
    }
    // H6: labs are contiguous blocks in one room on one day.
    let pairs = forbidden_lab_pairs(&inst.grid);
    let triples = forbidden_lab_triples(&inst.grid);
    for &s in &labs {
        let p = f64::from(sec(s).periods);
        for d in 0..NUM_DAYS {
            let y1 = b.idx.y1[&(s, d)];
            let mut up = zday(s, d);
            up.push((-p, y1));
            b.row(Family::H6, format!("labday_up({},{})", sid(s), dl(d)), up.clone(), Sense::Le, 0.0)?;
            b.row(Family::H6, format!("labday_lo({},{})", sid(s), dl(d)), up, Sense::Ge, 0.0)?;
        }
        for d in 0..NUM_DAYS {
            for &r in &rooms_of[s] {
                let zv: Vec<VarId> = (1..=NUM_PERIODS as u8).map(|t| b.idx.z[&(s, slot_of(d, t), r)]).collect();
                let zr = |t: u8| zv[t as usize - 1];
                let mut terms: Terms = (1..=NUM_PERIODS as u8).map(|t| (1.0, zr(t))).collect();
                terms.push((-p, b.idx.y2[&(s, d, r)]));
                let tag = format!("{},{},{}", sid(s), dl(d), rid(r));
                b.row(Family::H6, format!("labroom_up({tag})"), terms.clone(), Sense::Le, 0.0)?;
                b.row(Family::H6, format!("labroom_lo({tag})"), terms, Sense::Ge, 0.0)?;
                match sec(s).periods {
                    2 => {
                        for &(t1, t2) in &pairs {
                            let terms = vec![(1.0, zr(t1)), (1.0, zr(t2))];
                            b.row(Family::H6, format!("labpair({tag},{t1},{t2})"), terms, Sense::Le, 1.0)?;
                        }
                    }
                    3 => {
                        for &(t1, t2, t3) in &triples {
                            let terms = vec![(1.0, zr(t1)), (1.0, zr(t2)), (1.0, zr(t3))];
                            let name = format!("labtriple({tag},{t1},{t2},{t3})");
                            b.row(Family::H6, name, terms, Sense::Le, 2.0)?;
                        }
                    }
                    4 => {
                        let terms = vec![(1.0, zr(5)), (1.0, zr(6)), (1.0, zr(7))];
                        b.row(Family::H6, format!("labam({tag})"), terms, Sense::Eq, 0.0)?;
                    }
                    _ => {}
                }
            }
        }
    }
    // H7: a professor's sections occupy w, which is binary.
    let mut secs_of_prof: Vec<Vec<usize>> = vec![Vec::new(); nprof];
    for s in 0..nsec {
        secs_of_prof[prof_of[s]].push(s);
    }
    for p in 0..nprof {
        for slot in 0..NUM_SLOTS {
            let mut terms: Terms = secs_of_prof[p].iter().flat_map(|&s| zsum(s, slot)).collect();
            terms.push((-1.0, w_at[p][slot]));
            b.row(Family::H7, format!("prof({},{})", pid(p), slot_label(slot)), terms, Sense::Eq, 0.0)?;
        }
    }
    // H8: co-professors stay free for the sections they co-teach.
    for s in 0..nsec {
        for &p in &coprofs_of[s] {
            for slot in 0..NUM_SLOTS {
                let mut terms = vec![(1.0, w_at[p][slot])];
                terms.extend(zsum(s, slot));
                let name = format!("coprof({},{},{})", pid(p), sid(s), slot_label(slot));
                b.row(Family::H8, name, terms, Sense::Le, 1.0)?;
            }
        }
    }
    // H9: one section of each needed course.
    for (g, grp) in groups.iter().enumerate() {
        for c in &grp.curriculum {
            let terms = by_course[c.as_str()].iter().map(|&s| (1.0, b.idx.x[&(g, s)])).collect();
            b.row(Family::H9, format!("assign({},{c})", gid(g)), terms, Sense::Eq, 1.0)?;
        }
    }
    // H10: group timetables.
    for &(g, s) in &options {
        let mut terms: Terms = u_at[&(g, s)].iter().map(|&v| (1.0, v)).collect();
        terms.push((-f64::from(sec(s).periods), b.idx.x[&(g, s)]));
        b.row(Family::H10, format!("hours({},{})", gid(g), sid(s)), terms, Sense::Eq, 0.0)?;
    }
    for &(g, s) in &options {
        let x = b.idx.x[&(g, s)];
        for slot in 0..NUM_SLOTS {
            let mut terms = vec![(1.0, u_at[&(g, s)][slot]), (-1.0, x)];
            terms.extend(zsum(s, slot).into_iter().map(|(_, v)| (-1.0, v)));
            let name = format!("reserve({},{},{})", gid(g), sid(s), slot_label(slot));
            b.row(Family::H10, name, terms, Sense::Ge, -1.0)?;
        }
    }
    let mut secs_of_group: Vec<Vec<usize>> = vec![Vec::new(); groups.len()];
    for &(g, s) in &options {
        secs_of_group[g].push(s);
    }
    for (g, grp) in groups.iter().enumerate() {
        let need: u32 = grp.curriculum.iter().map(|c| u32::from(inst.course(c).expect("resolved").periods)).sum();
        let terms: Terms = secs_of_group[g].iter().flat_map(|&s| u_at[&(g, s)].iter().map(|&v| (1.0, v))).collect();
        b.row(Family::H10, format!("load({})", gid(g)), terms, Sense::Eq, f64::from(need))?;
    }
    for g in 0..groups.len() {
        for slot in 0..NUM_SLOTS {
            let terms: Terms = secs_of_group[g].iter().map(|&s| (1.0, u_at[&(g, s)][slot])).collect();
            b.row(Family::H10, format!("clash({},{})", gid(g), slot_label(slot)), terms, Sense::Le, 1.0)?;
        }
    }
    // H11: a lab's students also take its tied lecture.
    for g in 0..groups.len() {
        for &s0 in secs_of_group[g].iter().filter(|&&s| !sec(s).is_lab && sec(s).labtie.is_some()) {
            for &s1 in secs_of_group[g].iter().filter(|&&s| sec(s).is_lab && sec(s).labtie == sec(s0).labtie) {
                let terms = vec![(1.0, b.idx.x[&(g, s0)]), (-1.0, b.idx.x[&(g, s1)])];
                let name = format!("labtie({},{},{})", gid(g), sid(s0), sid(s1));
                b.row(Family::H11, name, terms, Sense::Ge, 0.0)?;
            }
        }
    }
    // H12: capacity.
    for s in 0..nsec {
        let mut terms: Terms = options
            .iter()
            .filter(|&&(_, s2)| s2 == s)
            .map(|&(g, _)| (f64::from(groups[g].size), b.idx.x[&(g, s)]))
            .collect();
        if let Some(&t) = b.idx.ts.get(&s) {
            terms.push((-1.0, t));
        }
        b.row(Family::H12, format!("cap({})", sid(s)), terms, Sense::Le, f64::from(sec(s).capacity))?;
    }
    // H13 and H14: tied sections taken by one group.
    let tied_pairs = |g: usize| -> Vec<(usize, usize)> {
        let secs = &secs_of_group[g];
        let mut out = Vec::new();
        for (i, &a) in secs.iter().enumerate() {
            for &c in &secs[i + 1..] {
                if sec(a).labtie.is_some() && sec(a).labtie == sec(c).labtie {
                    out.push((a, c));
                }
            }
        }
        out
    };
    for g in 0..groups.len() {
        for (s0, s1) in tied_pairs(g) {
            for d in 0..NUM_DAYS {
                let terms: Terms = (0..NUM_PERIODS)
                    .flat_map(|k| {
                        let slot = d * NUM_PERIODS + k;
                        [(1.0, u_at[&(g, s0)][slot]), (1.0, u_at[&(g, s1)][slot])]
                    })
                    .collect();
                let name = format!("tiehours({},{},{},{})", gid(g), sid(s0), sid(s1), dl(d));
                b.row(Family::H13, name, terms, Sense::Le, 4.0)?;
            }
        }
    }
    for g in 0..groups.len() {
        for (a, c) in tied_pairs(g) {
            for (s0, s1) in [(a, c), (c, a)] {
                for d in 0..NUM_DAYS {
                    for t0 in [1u8, 2, 3, 5, 6] {
                        let terms =
                            vec![(1.0, u_at[&(g, s0)][slot_of(d, t0)]), (1.0, u_at[&(g, s1)][slot_of(d, t0 + 1)])];
                        let name = format!("gap({},{},{},{},{t0})", gid(g), sid(s0), sid(s1), dl(d));
                        b.row(Family::H14, name, terms, Sense::Le, 1.0)?;
                    }
                }
            }
        }
    }

    // S1: day indicators of short lectures.
    for &s in &spread {
        for d in 0..NUM_DAYS {
            let mut terms = vec![(1.0, b.idx.ygp1[&(s, d)])];
            terms.extend(zday(s, d).into_iter().map(|(_, v)| (-1.0, v)));
            b.row(Family::S1, format!("gp1({},{})", sid(s), dl(d)), terms, Sense::Eq, 0.0)?;
        }
    }
    // S2: consecutive-day spreads.
    for &s in &spread {
        let yv: Vec<VarId> = (0..NUM_DAYS).map(|d| b.idx.ygp1[&(s, d)]).collect();
        let y = |d: usize| yv[d];
        if sec(s).periods == 2 {
            for d in 0..NUM_DAYS - 1 {
                let terms = vec![(1.0, y(d)), (1.0, y(d + 1)), (-1.0, b.idx.tgp2[&(s, d)])];
                b.row(Family::S2, format!("gp2({},{})", sid(s), dl(d)), terms, Sense::Le, 1.0)?;
            }
        } else {
            for d in 0..NUM_DAYS - 2 {
                let terms = vec![(1.0, y(d)), (1.0, y(d + 1)), (1.0, y(d + 2)), (-1.0, b.idx.tgp3[&(s, d)])];
                b.row(Family::S2, format!("gp3({},{})", sid(s), dl(d)), terms, Sense::Le, 2.0)?;
            }
        }
    }
    // S3: a day off.
    for p in 0..nprof {
        for d in 0..NUM_DAYS {
            let day_w: Terms = (0..NUM_PERIODS).map(|k| (1.0, w_at[p][d * NUM_PERIODS + k])).collect();
            let y3 = b.idx.y3[&(p, d)];
            let mut up = day_w.clone();
            up.push((-7.0, y3));
            b.row(Family::S3, format!("teach_up({},{})", pid(p), dl(d)), up, Sense::Le, 0.0)?;
            let mut lo = day_w;
            lo.push((-1.0, y3));
            b.row(Family::S3, format!("teach_lo({},{})", pid(p), dl(d)), lo, Sense::Ge, 0.0)?;
        }
    }
    for p in 0..nprof {
        let mut terms: Terms = (0..NUM_DAYS).map(|d| (1.0, b.idx.y3[&(p, d)])).collect();
        terms.push((-1.0, b.idx.t5[&p]));
        b.row(Family::S3, format!("dayoff({})", pid(p)), terms, Sense::Le, 4.0)?;
    }
    // S4: not both first and last period.
    for p in 0..nprof {
        for d in 0..NUM_DAYS {
            let terms = vec![(1.0, w_at[p][slot_of(d, 1)]), (1.0, w_at[p][slot_of(d, 7)]), (-1.0, b.idx.t4[&(p, d)])];
            b.row(Family::S4, format!("edges({},{})", pid(p), dl(d)), terms, Sense::Le, 1.0)?;
        }
    }
    // S5: full-time professors teach on the meeting day.
    let md = weights.meeting_day.index();
    for (&p, &t) in &b.idx.ttue.clone() {
        let terms = vec![(1.0, b.idx.y3[&(p, md)]), (1.0, t)];
        b.row(Family::S5, format!("meeting({})", pid(p)), terms, Sense::Ge, 1.0)?;
    }
    // S6: availability.
    for (&(p, slot), &t) in &b.idx.t0.clone() {
        let terms = vec![(1.0, w_at[p][slot]), (-1.0, t)];
        b.row(Family::S6, format!("avail({},{})", pid(p), slot_label(slot)), terms, Sense::Le, 0.0)?;
    }
    for s in 0..nsec {
        for &p in &coprofs_of[s] {
            for slot in 0..NUM_SLOTS {
                let Some(&t) = b.idx.t0.get(&(p, slot)) else { continue };
                let mut terms = zsum(s, slot);
                terms.push((-1.0, t));
                let name = format!("coavail({},{},{})", pid(p), sid(s), slot_label(slot));
                b.row(Family::S6, name, terms, Sense::Le, 0.0)?;
            }
        }
    }

    Ok((b.m, b.idx))
}

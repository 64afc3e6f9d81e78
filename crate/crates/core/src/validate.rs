//! Independent checks of a timetable: every hard rule is re-verified by
//! counting over meetings and enrollments, and the soft penalty is
//! recomputed term by term. Nothing here reads a solver model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{
    forbidden_lab_pairs, forbidden_lab_triples, fulltime_professors, Day, Instance, Mandate, Section, Slot, NUM_DAYS,
    NUM_PERIODS,
};
use crate::tip::{Family, Timetable, Weights};

/// Absolute tolerance when comparing a claimed objective with the recomputed one.
pub const AUDIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub family: Family,
    pub subject: Vec<String>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.family, self.subject.join(";"), self.detail)
    }
}

/// `family,subject,detail` with subjects joined by `;`.
pub fn violations_csv(violations: &[Violation]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["family", "subject", "detail"]).expect("writing to memory");
    for v in violations {
        w.write_record([v.family.to_string(), v.subject.join(";"), v.detail.clone()]).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
}

struct Checker<'a> {
    tt: &'a Timetable,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn flag(&mut self, family: Family, subject: &[&str], detail: String) {
        let subject = subject.iter().map(|s| s.to_string()).collect();
        self.out.push(Violation { family, subject, detail });
    }

    /// Meeting count per slot for a section.
    fn slots(&self, sid: &str) -> BTreeMap<Slot, usize> {
        let mut m = BTreeMap::new();
        for mt in self.tt.meetings.get(sid).into_iter().flatten() {
            *m.entry(Slot::new(mt.day, mt.period)).or_insert(0) += 1;
        }
        m
    }

    fn on_day(&self, sid: &str, day: Day) -> usize {
        self.tt.meetings.get(sid).into_iter().flatten().filter(|m| m.day == day).count()
    }
}

/// Lists every broken hard rule. Over-capacity recorded in
/// `tt.over_capacity` is tolerated, since that is how soft capacity shows up.
pub fn check_hard(inst: &Instance, tt: &Timetable) -> Vec<Violation> {
    let mut c = Checker { tt, out: Vec::new() };
    let enrolled_in = enrollments_by_section(tt);

    // Structure: meetings must name known sections and compatible rooms.
    for (sid, meetings) in &tt.meetings {
        let Some(s) = inst.section_idx(sid) else {
            c.flag(Family::H1, &[sid], "unknown section".into());
            continue;
        };
        let rooms: BTreeSet<&str> = inst.compatible_rooms(s).iter().map(|&r| inst.rooms[r].id.as_str()).collect();
        for m in meetings {
            if !rooms.contains(m.room.as_str()) {
                let detail = format!("room {} does not fit the section at {}{}", m.room, m.day, m.period);
                c.flag(Family::H3, &[sid, &m.room], detail);
            }
        }
    }

    for sec in &inst.sections {
        let n: usize = c.slots(&sec.id).values().sum();
        if n != usize::from(sec.periods) {
            c.flag(Family::H1, &[&sec.id], format!("meets {n} times, needs {}", sec.periods));
        }
    }

    let mut links: BTreeMap<u32, Vec<&Section>> = BTreeMap::new();
    for sec in &inst.sections {
        if let Some(k) = sec.link {
            links.entry(k).or_default().push(sec);
        }
    }
    for members in links.values() {
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                if c.slots(&a.id) != c.slots(&b.id) {
                    c.flag(Family::H2, &[&a.id, &b.id], "linked sections meet at different times".into());
                }
            }
        }
    }

    let mut room_use: BTreeMap<(&str, Slot), Vec<&str>> = BTreeMap::new();
    for (sid, meetings) in &tt.meetings {
        for m in meetings {
            room_use.entry((m.room.as_str(), Slot::new(m.day, m.period))).or_default().push(sid);
        }
    }
    for ((room, slot), secs) in &room_use {
        if secs.len() > 1 {
            let mut subject = vec![*room];
            subject.extend(secs.iter().copied());
            c.flag(Family::H3, &subject, format!("{} sections in the room at {slot}", secs.len()));
        }
    }

    for sec in &inst.sections {
        let slots = c.slots(&sec.id);
        let mandates: BTreeSet<Mandate> = sec.mandates.iter().copied().collect();
        for m in mandates {
            let ok = match m {
                Mandate::Day(d) => c.on_day(&sec.id, d) >= 1,
                Mandate::Slot(d, t) => slots.get(&Slot::new(d, t)).copied().unwrap_or(0) == 1,
            };
            if !ok {
                c.flag(Family::H4, &[&sec.id], format!("mandate {m} not met"));
            }
        }
    }

    for sec in inst.sections.iter().filter(|s| !s.is_lab) {
        for d in Day::ALL {
            let n = c.on_day(&sec.id, d);
            if n > 1 {
                c.flag(Family::H5, &[&sec.id], format!("meets {n} times on {d}"));
            }
        }
    }

    let pairs = forbidden_lab_pairs(&inst.grid);
    let triples = forbidden_lab_triples(&inst.grid);
    for sec in inst.sections.iter().filter(|s| s.is_lab) {
        let p = usize::from(sec.periods);
        let mut per_room: BTreeMap<(Day, &str), BTreeSet<u8>> = BTreeMap::new();
        for m in c.tt.meetings.get(&sec.id).into_iter().flatten() {
            per_room.entry((m.day, m.room.as_str())).or_default().insert(m.period);
        }
        for d in Day::ALL {
            let n = c.on_day(&sec.id, d);
            if n != 0 && n != p {
                c.flag(Family::H6, &[&sec.id], format!("{n} of {p} lab periods on {d}"));
            }
        }
        for ((d, room), periods) in &per_room {
            let bad = if periods.len() != p {
                Some(format!("{} of {p} lab periods in room {room} on {d}", periods.len()))
            } else {
                let v: Vec<u8> = periods.iter().copied().collect();
                let hit = match p {
                    2 => v.iter().enumerate().any(|(i, &a)| v[i + 1..].iter().any(|&b| pairs.contains(&(a, b)))),
                    3 => triples.contains(&(v[0], v[1], v[2])),
                    4 => v.iter().any(|&t| t >= 5),
                    _ => false,
                };
                hit.then(|| format!("lab periods {v:?} on {d} are not one unbroken block"))
            };
            if let Some(detail) = bad {
                c.flag(Family::H6, &[&sec.id], detail);
            }
        }
    }

    // Professors: count primary sections per slot.
    let mut teaching: BTreeMap<(&str, Slot), Vec<&str>> = BTreeMap::new();
    for sec in &inst.sections {
        for slot in c.slots(&sec.id).into_keys() {
            teaching.entry((sec.prof.as_str(), slot)).or_default().push(&sec.id);
        }
    }
    for ((prof, slot), secs) in &teaching {
        let n: usize = secs.iter().map(|s| c.slots(s)[slot]).sum();
        if n > 1 {
            let mut subject = vec![*prof];
            subject.extend(secs.iter().copied());
            c.flag(Family::H7, &subject, format!("teaches {n} meetings at {slot}"));
        }
    }
    for sec in &inst.sections {
        let cps: BTreeSet<&String> = sec.coprofs.iter().collect();
        for (slot, n) in c.slots(&sec.id) {
            for cp in &cps {
                let busy = teaching
                    .get(&(cp.as_str(), slot))
                    .map_or(0, |secs| secs.iter().map(|s| c.slots(s)[&slot]).sum::<usize>());
                if busy + n > 1 {
                    c.flag(Family::H8, &[cp, &sec.id], format!("co-professor busy at {slot}"));
                }
            }
        }
    }

    for g in &inst.groups {
        let mine = tt.enrollments.get(&g.id);
        let secs: Vec<&Section> = mine
            .into_iter()
            .flatten()
            .filter_map(|sid| {
                let s = inst.section(sid);
                if s.is_none() {
                    c.flag(Family::H9, &[&g.id, sid], "unknown section".into());
                }
                s
            })
            .collect();
        for s in &secs {
            if !g.curriculum.contains(&s.course) {
                c.flag(Family::H9, &[&g.id, &s.id], format!("course {} is not in the curriculum", s.course));
            }
        }
        for course in &g.curriculum {
            let n = secs.iter().filter(|s| &s.course == course).count();
            if n != 1 {
                c.flag(Family::H9, &[&g.id, course], format!("enrolled in {n} sections of the course"));
            }
        }

        // Group timetable.
        let mut busy: BTreeMap<Slot, Vec<&str>> = BTreeMap::new();
        for s in &secs {
            let slots = c.slots(&s.id);
            if slots.len() > usize::from(s.periods) {
                let detail = format!("section meets in {} slots but has {} periods", slots.len(), s.periods);
                c.flag(Family::H10, &[&g.id, &s.id], detail);
            }
            for slot in slots.into_keys() {
                busy.entry(slot).or_default().push(&s.id);
            }
        }
        for (slot, list) in &busy {
            if list.len() > 1 {
                let mut subject = vec![g.id.as_str()];
                subject.extend(list.iter().copied());
                c.flag(Family::H10, &subject, format!("{} sections at {slot}", list.len()));
            }
        }
        let need: u32 = g.curriculum.iter().filter_map(|cid| inst.course(cid)).map(|cr| u32::from(cr.periods)).sum();
        let have: u32 = secs.iter().filter(|s| g.curriculum.contains(&s.course)).map(|s| u32::from(s.periods)).sum();
        if need != have {
            c.flag(Family::H10, &[&g.id], format!("weekly load {have} periods, curriculum needs {need}"));
        }

        let in_w = |s: &Section| g.curriculum.contains(&s.course);
        for lab in secs.iter().filter(|s| s.is_lab && s.labtie.is_some()) {
            for lec in inst.sections.iter().filter(|s| !s.is_lab && s.labtie == lab.labtie && in_w(s)) {
                if !secs.iter().any(|s| s.id == lec.id) {
                    c.flag(Family::H11, &[&g.id, &lec.id, &lab.id], "lab taken without its tied lecture".into());
                }
            }
        }

        let tied: Vec<(&Section, &Section)> = secs
            .iter()
            .enumerate()
            .flat_map(|(i, a)| secs[i + 1..].iter().map(move |b| (*a, *b)))
            .filter(|(a, b)| a.labtie.is_some() && a.labtie == b.labtie && in_w(a) && in_w(b))
            .collect();
        for &(a, b) in &tied {
            for d in Day::ALL {
                let n = c.on_day(&a.id, d) + c.on_day(&b.id, d);
                if n > 4 {
                    c.flag(Family::H13, &[&g.id, &a.id, &b.id], format!("{n} tied periods on {d}"));
                }
            }
            for (s0, s1) in [(a, b), (b, a)] {
                let (m0, m1) = (c.slots(&s0.id), c.slots(&s1.id));
                for d in Day::ALL {
                    for t0 in [1u8, 2, 3, 5, 6] {
                        if m0.contains_key(&Slot::new(d, t0)) && m1.contains_key(&Slot::new(d, t0 + 1)) {
                            let detail = format!("{} at {d}{t0} runs straight into {} at {d}{}", s0.id, s1.id, t0 + 1);
                            c.flag(Family::H14, &[&g.id, &s0.id, &s1.id], detail);
                        }
                    }
                }
            }
        }
    }
    for g in tt.enrollments.keys() {
        if !inst.groups.iter().any(|x| &x.id == g) {
            c.flag(Family::H9, &[g], "unknown group".into());
        }
    }

    for sec in &inst.sections {
        let load = section_load(inst, &enrolled_in, &sec.id);
        let allowed = sec.capacity + tt.over_capacity.get(&sec.id).copied().unwrap_or(0);
        if load > allowed {
            c.flag(Family::H12, &[&sec.id], format!("{load} students, capacity {allowed}"));
        }
    }

    c.out
}

fn enrollments_by_section(tt: &Timetable) -> BTreeMap<&str, Vec<&str>> {
    let mut m: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (g, secs) in &tt.enrollments {
        for s in secs {
            m.entry(s.as_str()).or_default().push(g.as_str());
        }
    }
    m
}

fn section_load(inst: &Instance, by_section: &BTreeMap<&str, Vec<&str>>, sid: &str) -> u32 {
    by_section
        .get(sid)
        .into_iter()
        .flatten()
        .filter_map(|g| inst.groups.iter().find(|x| x.id == *g))
        .map(|g| g.size)
        .sum()
}

/// One penalized (professor, slot) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AvailabilityHit {
    pub prof: String,
    pub slot: Slot,
    pub level: i8,
    pub cost: f64,
}

/// Soft penalty split by term. Each `*_cost` field is already weighted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PenaltyBreakdown {
    pub availability: Vec<AvailabilityHit>,
    pub availability_cost: f64,
    /// Professor and day with both period 1 and period 7.
    pub edges: Vec<(String, Day)>,
    pub edges_cost: f64,
    /// Full-time professors idle on the meeting day.
    pub meeting_day: Vec<String>,
    pub meeting_day_cost: f64,
    /// Two-period lectures and the first of two consecutive days.
    pub spread2: Vec<(String, Day)>,
    pub spread2_cost: f64,
    /// Three-period lectures and the first of three consecutive days.
    pub spread3: Vec<(String, Day)>,
    pub spread3_cost: f64,
    /// Professors teaching every day.
    pub no_day_off: Vec<String>,
    pub no_day_off_cost: f64,
    /// Sections above capacity and the number of extra students.
    pub overflow: Vec<(String, u32)>,
    pub overflow_cost: f64,
    pub total: f64,
}

impl PenaltyBreakdown {
    /// `term,subject,cost` lines, one per penalized item.
    pub fn to_csv(&self, weights: &Weights, inst: &Instance) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut row = |term: &str, subject: String, cost: f64| {
            w.write_record([term, &subject, &cost.to_string()]).expect("writing to memory");
        };
        row("term", "subject".into(), f64::NAN);
        for h in &self.availability {
            row("availability", format!("{} {}", h.prof, h.slot), h.cost);
        }
        for (p, d) in &self.edges {
            row("first_and_last", format!("{p} {d}"), weights.d4);
        }
        for p in &self.meeting_day {
            row("meeting_day", p.clone(), weights.dtue);
        }
        for (s, d) in &self.spread2 {
            row("consecutive_2", format!("{s} {d}"), weights.dgp2);
        }
        for (s, d) in &self.spread3 {
            row("consecutive_3", format!("{s} {d}"), weights.dgp3);
        }
        for p in &self.no_day_off {
            row("no_day_off", p.clone(), weights.d5);
        }
        for (s, n) in &self.overflow {
            let lab = inst.section(s).is_some_and(|x| x.is_lab);
            let unit = if lab { weights.ct_lab } else { weights.ct_regular };
            row("over_capacity", format!("{s} +{n}"), unit * f64::from(*n));
        }
        row("total", String::new(), self.total);
        let text = String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8");
        text.replacen("term,subject,NaN", "term,subject,cost", 1)
    }
}

/// Recomputes the weighted soft penalty of a timetable.
pub fn score_soft(inst: &Instance, tt: &Timetable, weights: &Weights) -> PenaltyBreakdown {
    let mut b = PenaltyBreakdown::default();

    // Slots where each professor leads a section, and where each professor
    // is present at all (leading or co-teaching).
    let mut leads: BTreeMap<&str, BTreeSet<Slot>> = BTreeMap::new();
    let mut present: BTreeMap<&str, BTreeSet<Slot>> = BTreeMap::new();
    for sec in &inst.sections {
        for m in tt.meetings.get(&sec.id).into_iter().flatten() {
            let slot = Slot::new(m.day, m.period);
            leads.entry(&sec.prof).or_default().insert(slot);
            present.entry(&sec.prof).or_default().insert(slot);
            for cp in &sec.coprofs {
                present.entry(cp).or_default().insert(slot);
            }
        }
    }

    for p in &inst.professors {
        for &slot in present.get(p.id.as_str()).into_iter().flatten() {
            let level = p.avail(slot);
            if level <= 0 {
                let cost = weights.availability_cost(level, p.is_adjunct);
                b.availability_cost += cost;
                b.availability.push(AvailabilityHit { prof: p.id.clone(), slot, level, cost });
            }
        }
    }

    let fulltime = fulltime_professors(inst);
    for p in &inst.professors {
        let slots = leads.get(p.id.as_str());
        let has = |d: Day, t: u8| slots.is_some_and(|s| s.contains(&Slot::new(d, t)));
        let day_on = |d: Day| (1..=NUM_PERIODS as u8).any(|t| has(d, t));
        for d in Day::ALL {
            if has(d, 1) && has(d, NUM_PERIODS as u8) {
                b.edges.push((p.id.clone(), d));
                b.edges_cost += weights.d4;
            }
        }
        if fulltime.contains(&p.id) && !day_on(weights.meeting_day) {
            b.meeting_day.push(p.id.clone());
            b.meeting_day_cost += weights.dtue;
        }
        if Day::ALL.iter().all(|&d| day_on(d)) {
            b.no_day_off.push(p.id.clone());
            b.no_day_off_cost += weights.d5;
        }
    }

    for sec in inst.sections.iter().filter(|s| !s.is_lab) {
        let on: Vec<bool> =
            Day::ALL.iter().map(|&d| tt.meetings.get(&sec.id).into_iter().flatten().any(|m| m.day == d)).collect();
        match sec.periods {
            2 => {
                for d in 0..NUM_DAYS - 1 {
                    if on[d] && on[d + 1] {
                        b.spread2.push((sec.id.clone(), Day::ALL[d]));
                        b.spread2_cost += weights.dgp2;
                    }
                }
            }
            3 => {
                for d in 0..NUM_DAYS - 2 {
                    if on[d] && on[d + 1] && on[d + 2] {
                        b.spread3.push((sec.id.clone(), Day::ALL[d]));
                        b.spread3_cost += weights.dgp3;
                    }
                }
            }
            _ => {}
        }
    }

    let by_section = enrollments_by_section(tt);
    for sec in &inst.sections {
        let load = section_load(inst, &by_section, &sec.id);
        if load > sec.capacity {
            let n = load - sec.capacity;
            let unit = if sec.is_lab { weights.ct_lab } else { weights.ct_regular };
            b.overflow.push((sec.id.clone(), n));
            b.overflow_cost += unit * f64::from(n);
        }
    }

    b.total = b.availability_cost
        + b.edges_cost
        + b.meeting_day_cost
        + b.spread2_cost
        + b.spread3_cost
        + b.no_day_off_cost
        + b.overflow_cost;
    b
}

#[derive(Debug, Clone, PartialEq)]
pub struct Audit {
    pub ok: bool,
    pub recomputed: f64,
    pub violations: Vec<Violation>,
}

/// Hard check plus objective comparison against `claimed`.
pub fn audit(inst: &Instance, tt: &Timetable, weights: &Weights, claimed: f64) -> Audit {
    let violations = check_hard(inst, tt);
    let recomputed = score_soft(inst, tt, weights).total;
    let ok = violations.is_empty() && (recomputed - claimed).abs() <= AUDIT_TOL;
    Audit { ok, recomputed, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mipcore::{solve_exact, Limits, SolveStatus};
    use crate::model::fixtures::{build, room, sample_consistent};
    use crate::model::Group;
    use crate::tip::fixtures::rich_instance;
    use crate::tip::{build_tip, decode_solution, CapacityMode, Meeting};

    fn solved(inst: &Instance, mode: CapacityMode) -> (Timetable, f64) {
        let (m, idx) = build_tip(inst, &inst.groups, &Weights::default(), mode).unwrap();
        let r = solve_exact(&m, &Limits::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        (decode_solution(inst, &idx, r.assignment.as_ref().unwrap()).unwrap(), r.objective.unwrap())
    }

    fn mt(d: Day, t: u8, r: &str) -> Meeting {
        Meeting { day: d, period: t, room: r.into() }
    }

    fn families(v: &[Violation]) -> BTreeSet<Family> {
        v.iter().map(|x| x.family).collect()
    }

    #[test]
    fn solved_instances_pass_audit() {
        for inst in [sample_consistent(), rich_instance()] {
            let (tt, obj) = solved(&inst, CapacityMode::Hard);
            let a = audit(&inst, &tt, &Weights::default(), obj);
            assert!(a.ok, "{:?} {} vs {obj}", a.violations, a.recomputed);
            assert!(!audit(&inst, &tt, &Weights::default(), obj + 1.0).ok);
        }
    }

    #[test]
    fn room_double_booking() {
        let inst = sample_consistent();
        let (mut tt, _) = solved(&inst, CapacityMode::Hard);
        let m = tt.meetings["S01"].iter().next().unwrap().clone();
        let s03 = tt.meetings.get_mut("S03").unwrap();
        let moved = s03.iter().next().unwrap().clone();
        s03.remove(&moved);
        s03.insert(m);
        let v = check_hard(&inst, &tt);
        assert!(v.iter().filter(|x| x.family == Family::H3).count() == 1, "{v:?}");
    }

    #[test]
    fn lab_across_lunch() {
        let mut lab = Section::lecture("L", "P", "C", 3, 10, "LAB");
        lab.is_lab = true;
        let inst = build(vec![room("R", 10, "LAB")], vec![lab], vec![Group::new("G", 5, ["C"])]);
        let mut tt = Timetable::default();
        tt.meetings.insert("L".into(), [3, 4, 5].map(|t| mt(Day::M, t, "R")).into());
        tt.enrollments.insert("G".into(), ["L".to_string()].into());
        assert_eq!(families(&check_hard(&inst, &tt)), [Family::H6].into());
        tt.meetings.insert("L".into(), [5, 6, 7].map(|t| mt(Day::M, t, "R")).into());
        assert!(check_hard(&inst, &tt).is_empty());
    }

    #[test]
    fn missing_course_fails_audit() {
        let inst = sample_consistent();
        let (mut tt, obj) = solved(&inst, CapacityMode::Hard);
        tt.enrollments.get_mut("G1").unwrap().remove("S05");
        let a = audit(&inst, &tt, &Weights::default(), obj);
        assert!(!a.ok);
        assert!(a.violations.iter().any(|v| v.family == Family::H9));
    }

    #[test]
    fn soft_terms() {
        let mut s1 = Section::lecture("A", "P", "C", 2, 10, "ROOM");
        s1.coprofs = vec!["Q".into()];
        let s2 = Section::lecture("B", "P", "C2", 3, 10, "ROOM");
        let s3 = Section::lecture("D", "P", "C3", 4, 10, "ROOM");
        let base = build(vec![room("R", 10, "ROOM")], vec![s1, s2, s3], vec![Group::new("G", 12, ["C"])]);
        let mut profs = base.professors.clone();
        profs[0].availability[0][0] = -2;
        profs[1].availability[1][0] = -1;
        profs[1].is_adjunct = true;
        let inst = Instance::new(base.rooms, profs, base.courses, base.sections, base.groups).unwrap();
        let mut tt = Timetable::default();
        // A: M1, T1 (consecutive; Q co-teaches at T1 where Q is -1 adjunct).
        tt.meetings.insert("A".into(), [mt(Day::M, 1, "R"), mt(Day::T, 1, "R")].into());
        // B: W, R, F (three consecutive days), M7 never used.
        tt.meetings.insert("B".into(), [mt(Day::W, 2, "R"), mt(Day::R, 2, "R"), mt(Day::F, 2, "R")].into());
        tt.meetings.insert(
            "D".into(),
            [mt(Day::M, 7, "R"), mt(Day::T, 3, "R"), mt(Day::W, 3, "R"), mt(Day::R, 3, "R")].into(),
        );
        tt.enrollments.insert("G".into(), ["A".to_string()].into());
        let w = Weights::default();
        let b = score_soft(&inst, &tt, &w);
        assert_eq!(b.availability_cost, 100_000.0 + 100_000.0);
        assert_eq!(b.edges, vec![("P".to_string(), Day::M)]);
        assert_eq!(b.spread2, vec![("A".to_string(), Day::M)]);
        assert_eq!(b.spread3, vec![("B".to_string(), Day::W)]);
        assert_eq!(b.no_day_off, vec!["P".to_string()]);
        assert!(b.meeting_day.is_empty());
        assert_eq!(b.overflow, vec![("A".to_string(), 2)]);
        let want = 200_000.0 + w.d4 + w.dgp2 + w.dgp3 + w.d5 + 2.0 * w.ct_regular;
        assert_eq!(b.total, want);
        assert!(b.to_csv(&w, &inst).starts_with("term,subject,cost\n"));
        // The over-capacity is a hard violation unless it is declared.
        assert_eq!(families(&check_hard(&inst, &tt)), [Family::H12].into());
        tt.over_capacity.insert("A".into(), 2);
        assert!(check_hard(&inst, &tt).is_empty());
    }

    #[test]
    fn empty_schedule_only_misses_meeting_day() {
        let inst = sample_consistent();
        let w = Weights::default();
        let b = score_soft(&inst, &Timetable::default(), &w);
        let h = fulltime_professors(&inst).len();
        assert!(h > 0);
        assert_eq!(b.total, w.dtue * h as f64);
        let (tt, obj) = solved(&inst, CapacityMode::Hard);
        assert_eq!(obj, 0.0);
        assert_eq!(score_soft(&inst, &tt, &w).total, 0.0);
    }

    #[test]
    fn soft_mode_solution_audits() {
        let mut inst = sample_consistent();
        let i = inst.groups.iter().position(|g| g.id == "G6").unwrap();
        inst.groups[i].size = 16;
        let inst = inst.with_groups(inst.groups.clone()).unwrap();
        let (tt, obj) = solved(&inst, CapacityMode::Soft);
        assert_eq!(tt.over_capacity.get("S13"), Some(&1));
        let a = audit(&inst, &tt, &Weights::default(), obj);
        assert!(a.ok, "{:?}", a.violations);
        assert!(obj >= 1e6);
    }
}

//! Seeded synthetic instances that are feasible by construction.
//!
//! A hidden timetable is built first: sections are placed into free
//! room-slots with free professors, and each group is walked through its
//! curriculum picking clash-free sections with spare seats (opening new
//! sections when none fit). Capacities, availability and mandates are then
//! derived so that the hidden timetable satisfies every hard rule. It is
//! returned as the witness.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{
    Day, Group, Instance, InstanceError, Mandate, Professor, Room, Section, FULL_AVAILABILITY, NUM_DAYS, NUM_PERIODS,
    NUM_SLOTS,
};
use crate::tip::{Meeting, Timetable};

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n_groups: usize,
    pub group_size_range: (u32, u32),
    /// Lecture courses; lab courses are added on top, one per lab pairing.
    pub n_courses: usize,
    pub sections_per_course_range: (usize, usize),
    pub capacity_range: (u32, u32),
    pub n_professors: usize,
    pub n_rooms: usize,
    pub room_type_count: usize,
    /// Share of lecture courses that get a tied lab course.
    pub lab_fraction: f64,
    /// Share of unused professor slots marked 0, -1 or -2.
    pub availability_block_fraction: f64,
    pub curriculum_size_range: (usize, usize),
    /// Share of sections given a mandate that the hidden timetable meets.
    pub mandate_fraction: f64,
    /// Share of sections given a co-professor.
    pub coprof_fraction: f64,
    /// Share of professors who are adjuncts.
    pub adjunct_fraction: f64,
    /// Share of sections placed so their professor avoids the first-and-last
    /// and no-day-off penalties; the rest take the first pattern that fits.
    pub clean_fraction: f64,
    /// Fill every curriculum up to 35 weekly periods where courses allow.
    pub dense: bool,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> GenParams {
        GenParams::preset("toy", 1).expect("known preset")
    }
}

impl GenParams {
    pub const PRESETS: [&'static str; 4] = ["tiny", "toy", "section4", "small"];

    /// Named parameter sets: `tiny` (one of everything), `toy` (small
    /// enough for the exact solver), `section4` (33 groups of 1 to 60
    /// students, section capacities 8 to 30) and `small` (a build-scale
    /// instance with tens of thousands of rows).
    pub fn preset(name: &str, seed: u64) -> Option<GenParams> {
        let base = GenParams {
            n_groups: 1,
            group_size_range: (5, 5),
            n_courses: 1,
            sections_per_course_range: (1, 1),
            capacity_range: (10, 10),
            n_professors: 1,
            n_rooms: 1,
            room_type_count: 1,
            lab_fraction: 0.0,
            availability_block_fraction: 0.0,
            curriculum_size_range: (1, 1),
            mandate_fraction: 0.0,
            coprof_fraction: 0.0,
            adjunct_fraction: 0.0,
            clean_fraction: 1.0,
            dense: false,
            seed,
        };
        Some(match name {
            "tiny" => base,
            "toy" => GenParams {
                n_groups: 3,
                group_size_range: (2, 5),
                n_courses: 3,
                sections_per_course_range: (1, 1),
                capacity_range: (16, 20),
                n_professors: 3,
                n_rooms: 2,
                room_type_count: 2,
                lab_fraction: 0.34,
                availability_block_fraction: 0.3,
                curriculum_size_range: (2, 3),
                mandate_fraction: 0.15,
                coprof_fraction: 0.15,
                adjunct_fraction: 0.3,
                clean_fraction: 0.5,
                ..base
            },
            "section4" => GenParams {
                n_groups: 33,
                group_size_range: (1, 60),
                n_courses: 14,
                sections_per_course_range: (2, 4),
                capacity_range: (8, 30),
                n_professors: 70,
                n_rooms: 32,
                room_type_count: 3,
                lab_fraction: 0.3,
                availability_block_fraction: 0.2,
                curriculum_size_range: (3, 4),
                mandate_fraction: 0.05,
                coprof_fraction: 0.05,
                adjunct_fraction: 0.2,
                ..base
            },
            "small" => GenParams {
                n_groups: 20,
                group_size_range: (4, 24),
                n_courses: 12,
                sections_per_course_range: (2, 3),
                capacity_range: (12, 30),
                n_professors: 30,
                n_rooms: 14,
                room_type_count: 2,
                lab_fraction: 0.25,
                availability_block_fraction: 0.2,
                curriculum_size_range: (3, 4),
                mandate_fraction: 0.05,
                coprof_fraction: 0.05,
                adjunct_fraction: 0.2,
                ..base
            },
            _ => return None,
        })
    }

    pub fn check(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::Params(m.to_string()));
        let ordered = |(a, b): (usize, usize)| a <= b;
        if self.n_groups == 0 || self.n_courses == 0 || self.n_professors == 0 || self.n_rooms == 0 {
            return bad("groups, courses, professors and rooms must be positive");
        }
        if self.room_type_count == 0 || self.room_type_count > self.n_rooms {
            return bad("room_type_count must be between 1 and n_rooms");
        }
        let (gl, gh) = self.group_size_range;
        let (cl, ch) = self.capacity_range;
        if gl == 0 || gl > gh || cl == 0 || cl > ch {
            return bad("size and capacity ranges must be positive and ordered");
        }
        if !ordered(self.sections_per_course_range) || self.sections_per_course_range.1 == 0 {
            return bad("sections_per_course_range must be ordered and reach at least 1");
        }
        let (kl, kh) = self.curriculum_size_range;
        if kl == 0 || kl > kh {
            return bad("curriculum_size_range must be positive and ordered");
        }
        for f in [
            self.lab_fraction,
            self.availability_block_fraction,
            self.mandate_fraction,
            self.coprof_fraction,
            self.adjunct_fraction,
            self.clean_fraction,
        ] {
            if !(0.0..=1.0).contains(&f) {
                return bad("fractions must lie in [0, 1]");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("bad parameters: {0}")]
    Params(String),
    #[error("could not place a section of course {course}: no free room, slot and professor")]
    NoFit { course: String },
    #[error("group {group}: none of its candidate courses could be scheduled")]
    NoCurriculum { group: String },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// A generated instance and its hidden timetable. When a group had to be
/// spread over several sections of a course the witness enrolls its parts
/// (`witness_groups`); otherwise `witness_groups` equals the instance groups.
#[derive(Debug, Clone)]
pub struct Generated {
    pub instance: Instance,
    pub witness: Timetable,
    pub witness_groups: Vec<Group>,
}

#[derive(Debug, Clone)]
struct CourseDraft {
    id: String,
    periods: u8,
    lab: bool,
    room_type: usize,
    /// Lab course of a lecture course, or lecture course of a lab course.
    partner: Option<usize>,
}

#[derive(Debug, Clone)]
struct SectionDraft {
    course: usize,
    prof: usize,
    capacity: u32,
    room: usize,
    slots: Vec<usize>,
    labtie: Option<u32>,
    load: u32,
    coprofs: Vec<usize>,
}

struct Draft {
    rng: ChaCha8Rng,
    p: GenParams,
    room_type: Vec<usize>,
    room_cap: Vec<u32>,
    room_busy: Vec<[bool; NUM_SLOTS]>,
    prof_busy: Vec<[bool; NUM_SLOTS]>,
    prof_lead: Vec<[bool; NUM_SLOTS]>,
    courses: Vec<CourseDraft>,
    sections: Vec<SectionDraft>,
    next_tie: u32,
}

fn day_of(slot: usize) -> usize {
    slot / NUM_PERIODS
}

fn period_of(slot: usize) -> u8 {
    (slot % NUM_PERIODS) as u8 + 1
}

/// Tied sections taken together: at most four periods a day and no
/// back-to-back meetings within a half day.
fn tied_ok(a: &[usize], b: &[usize]) -> bool {
    for d in 0..NUM_DAYS {
        let n = a.iter().chain(b).filter(|&&s| day_of(s) == d).count();
        if n > 4 {
            return false;
        }
    }
    let adjacent = |x: &[usize], y: &[usize]| {
        x.iter().any(|&s| {
            let t = period_of(s);
            t != 4 && t != 7 && y.contains(&(s + 1))
        })
    };
    !adjacent(a, b) && !adjacent(b, a)
}

/// Day sets for a lecture meeting once a day, spread-friendly ones first.
fn day_sets(p: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = (0u32..1 << NUM_DAYS)
        .filter(|m| m.count_ones() as usize == p)
        .map(|m| (0..NUM_DAYS).filter(|d| m >> d & 1 == 1).collect())
        .collect();
    all.shuffle(rng);
    let penalized = |ds: &Vec<usize>| match p {
        2 => ds[1] == ds[0] + 1,
        3 => ds.windows(3).any(|w| w[2] == w[0] + 2),
        _ => false,
    };
    all.sort_by_key(penalized);
    all
}

fn lab_blocks(p: u8) -> Vec<Vec<u8>> {
    match p {
        1 => (1..=7).map(|t| vec![t]).collect(),
        2 => vec![vec![1, 2], vec![2, 3], vec![3, 4], vec![5, 6], vec![6, 7]],
        3 => vec![vec![1, 2, 3], vec![2, 3, 4], vec![5, 6, 7]],
        _ => vec![vec![1, 2, 3, 4]],
    }
}

impl Draft {
    fn chance(&mut self, f: f64) -> bool {
        f > 0.0 && self.rng.random::<f64>() < f
    }

    /// Whether adding `slots` keeps the professor free of the avoidable
    /// soft penalties: first and last period on one day, or no day off.
    fn prof_clean(&self, p: usize, slots: &[usize]) -> bool {
        let mut lead = self.prof_lead[p];
        for &s in slots {
            lead[s] = true;
        }
        let mut days = 0;
        for d in 0..NUM_DAYS {
            let row = &lead[d * NUM_PERIODS..(d + 1) * NUM_PERIODS];
            if row[0] && row[NUM_PERIODS - 1] {
                return false;
            }
            days += usize::from(row.iter().any(|&b| b));
        }
        days < NUM_DAYS
    }

    fn commit(&mut self, c: usize, cap: u32, room: usize, prof: usize, slots: Vec<usize>) -> usize {
        for &s in &slots {
            self.room_busy[room][s] = true;
            self.prof_busy[prof][s] = true;
            self.prof_lead[prof][s] = true;
        }
        self.sections.push(SectionDraft {
            course: c,
            prof,
            capacity: cap,
            room,
            slots,
            labtie: None,
            load: 0,
            coprofs: Vec::new(),
        });
        self.sections.len() - 1
    }

    /// Places a new section of course `c` with capacity `cap`, avoiding
    /// `blocked` slots and respecting the tie rules against `partner`.
    /// `prefer` is a slot pattern tried before any other.
    fn place(
        &mut self,
        c: usize,
        cap: u32,
        blocked: &[bool; NUM_SLOTS],
        partner: Option<&[usize]>,
        prefer: Option<&[usize]>,
    ) -> Option<usize> {
        let mut rooms: Vec<usize> = (0..self.room_cap.len())
            .filter(|&r| self.room_type[r] == self.courses[c].room_type && self.room_cap[r] >= cap)
            .collect();
        rooms.shuffle(&mut self.rng);
        let mut profs: Vec<usize> = (0..self.prof_busy.len()).collect();
        profs.shuffle(&mut self.rng);
        let usable = |pat: &[usize]| !pat.iter().any(|&s| blocked[s]) && partner.is_none_or(|q| tied_ok(pat, q));
        let passes: &[bool] =
            if self.p.clean_fraction >= 1.0 || self.chance(self.p.clean_fraction) { &[true, false] } else { &[false] };

        // Fixed patterns: the preferred one, then lab blocks.
        let mut fixed: Vec<Vec<usize>> = prefer.into_iter().map(<[usize]>::to_vec).collect();
        let lab = self.courses[c].lab;
        if lab {
            let mut days: Vec<usize> = (0..NUM_DAYS).collect();
            days.shuffle(&mut self.rng);
            let mut blocks = lab_blocks(self.courses[c].periods);
            blocks.shuffle(&mut self.rng);
            for d in days {
                for b in &blocks {
                    fixed.push(b.iter().map(|&t| d * NUM_PERIODS + t as usize - 1).collect());
                }
            }
        }
        for &strict in passes {
            for pat in fixed.iter().filter(|p| usable(p)) {
                for &room in &rooms {
                    if pat.iter().any(|&s| self.room_busy[room][s]) {
                        continue;
                    }
                    let free = |p: usize| pat.iter().all(|&s| !self.prof_busy[p][s]);
                    if let Some(&prof) = profs.iter().find(|&&p| free(p) && (!strict || self.prof_clean(p, pat))) {
                        return Some(self.commit(c, cap, room, prof, pat.clone()));
                    }
                }
            }
        }
        if lab {
            return None;
        }

        // Lectures: one meeting per day on a spread-friendly day set, each
        // day at any period where room and professor are free.
        let sets = day_sets(usize::from(self.courses[c].periods), &mut self.rng);
        let mut order: Vec<usize> = (0..NUM_PERIODS).collect();
        order.shuffle(&mut self.rng);
        for &strict in passes {
            for ds in &sets {
                for &room in &rooms {
                    for &prof in &profs {
                        let mut pat = Vec::with_capacity(ds.len());
                        for &d in ds {
                            let pick = order
                                .iter()
                                .map(|&t| d * NUM_PERIODS + t)
                                .find(|&s| !blocked[s] && !self.room_busy[room][s] && !self.prof_busy[prof][s]);
                            match pick {
                                Some(s) => pat.push(s),
                                None => break,
                            }
                        }
                        if pat.len() == ds.len() && usable(&pat) && (!strict || self.prof_clean(prof, &pat)) {
                            return Some(self.commit(c, cap, room, prof, pat));
                        }
                    }
                }
            }
        }
        None
    }

    fn new_cap(&mut self, at_least: u32) -> u32 {
        let (lo, hi) = self.p.capacity_range;
        self.rng.random_range(lo..=hi).max(at_least)
    }

    fn no_fit(&self, c: usize) -> GenError {
        GenError::NoFit { course: self.courses[c].id.clone() }
    }

    /// A new lecture of `lec` and a new lab of its partner, tied together.
    fn place_pair(
        &mut self,
        lec: usize,
        lab: usize,
        part: u32,
        blocked: &[bool; NUM_SLOTS],
        template: &[usize],
    ) -> Result<(usize, usize), GenError> {
        let prefer = |k: usize| template.get(k).map(|&s| self.sections[s].slots.clone());
        let (p0, p1) = (prefer(0), prefer(1));
        let cap = self.new_cap(part);
        let s0 = self.place(lec, cap, blocked, None, p0.as_deref()).ok_or_else(|| self.no_fit(lec))?;
        let mut blocked1 = *blocked;
        for &s in &self.sections[s0].slots {
            blocked1[s] = true;
        }
        let slots0 = self.sections[s0].slots.clone();
        let cap = self.new_cap(part);
        let s1 = self.place(lab, cap, &blocked1, Some(&slots0), p1.as_deref()).ok_or_else(|| self.no_fit(lab))?;
        self.next_tie += 1;
        self.sections[s0].labtie = Some(self.next_tie);
        self.sections[s1].labtie = Some(self.next_tie);
        Ok((s0, s1))
    }

    /// Open sections of a unit with room for `part` more students and no
    /// clash with `busy`.
    fn reuse(&self, c: usize, with_lab: bool, part: u32, busy: &[bool; NUM_SLOTS]) -> Option<Vec<usize>> {
        let fits = |s: &SectionDraft| s.capacity - s.load >= part && s.slots.iter().all(|&x| !busy[x]);
        if !with_lab {
            return (0..self.sections.len())
                .find(|&s| self.sections[s].course == c && fits(&self.sections[s]))
                .map(|s| vec![s]);
        }
        let lab = self.courses[c].partner.expect("lecture with a lab");
        let lab_of = |tie: Option<u32>| {
            (0..self.sections.len()).find(|&s| self.sections[s].course == lab && self.sections[s].labtie == tie)
        };
        for s0 in 0..self.sections.len() {
            let a = &self.sections[s0];
            if a.course != c || a.labtie.is_none() || !fits(a) {
                continue;
            }
            let s1 = lab_of(a.labtie).expect("every tie has a lab");
            let b = &self.sections[s1];
            if fits(b) && a.slots.iter().all(|x| !b.slots.contains(x)) {
                return Some(vec![s0, s1]);
            }
        }
        None
    }

    /// Sections for one curriculum unit (a course, or a lecture with its
    /// lab) that a part of `part` students can join given its `busy` slots.
    /// Reuses open sections when possible and places new ones otherwise.
    /// `template` holds the sections an earlier part took for this unit;
    /// their slot patterns are tried first for new sections.
    fn enroll_unit(
        &mut self,
        c: usize,
        with_lab: bool,
        part: u32,
        busy: &[bool; NUM_SLOTS],
        template: &[usize],
    ) -> Result<Vec<usize>, GenError> {
        if let Some(secs) = self.reuse(c, with_lab, part, busy) {
            return Ok(secs);
        }
        if !with_lab {
            let cap = self.new_cap(part);
            let prefer = template.first().map(|&s| self.sections[s].slots.clone());
            return Ok(vec![self.place(c, cap, busy, None, prefer.as_deref()).ok_or_else(|| self.no_fit(c))?]);
        }
        let lab = self.courses[c].partner.expect("lecture with a lab");
        let (s0, s1) = self.place_pair(c, lab, part, busy, template)?;
        Ok(vec![s0, s1])
    }
}

type Unit = (usize, bool, Vec<usize>);

/// Enrolls one group part by part. On success returns its curriculum units
/// and each part's size and sections; when a later part cannot take a unit,
/// returns that lecture course and everything enrolled so far.
#[allow(clippy::type_complexity)]
fn enroll_group(
    d: &mut Draft,
    lectures: &[usize],
    size: u32,
    want: usize,
) -> Result<(Vec<Unit>, Vec<(u32, Vec<usize>)>), (usize, Vec<(u32, Vec<usize>)>)> {
    let mut units: Vec<Unit> = Vec::new();
    let mut taken: Vec<(u32, Vec<usize>)> = Vec::new();
    let mut remaining = size;
    while remaining > 0 {
        let part = remaining.min(d.p.capacity_range.1);
        let mut busy = [false; NUM_SLOTS];
        taken.push((part, Vec::new()));
        let commit =
            |d: &mut Draft, secs: Vec<usize>, busy: &mut [bool; NUM_SLOTS], taken: &mut Vec<(u32, Vec<usize>)>| {
                for s in secs {
                    d.sections[s].load += part;
                    for &x in &d.sections[s].slots {
                        busy[x] = true;
                    }
                    taken.last_mut().expect("pushed").1.push(s);
                }
            };
        if units.is_empty() {
            // Open sections are used first; new ones only when needed.
            let picks: Vec<(usize, bool)> =
                lectures.iter().map(|&c| (c, d.courses[c].partner.is_some() && d.rng.random_bool(0.5))).collect();
            let mut load = 0;
            for create in [false, true] {
                for &(c, with_lab) in &picks {
                    if !d.p.dense && units.len() >= want {
                        break;
                    }
                    if units.iter().any(|u| u.0 == c) {
                        continue;
                    }
                    let mut options = vec![with_lab];
                    if !create && d.courses[c].partner.is_some() {
                        options.push(!with_lab);
                    }
                    for with_lab in options {
                        let lab = d.courses[c].partner.filter(|_| with_lab);
                        let add =
                            usize::from(d.courses[c].periods) + lab.map_or(0, |l| usize::from(d.courses[l].periods));
                        if d.p.dense && load + add > NUM_SLOTS {
                            continue;
                        }
                        let secs = if create {
                            d.enroll_unit(c, with_lab, part, &busy, &[]).ok()
                        } else {
                            d.reuse(c, with_lab, part, &busy)
                        };
                        if let Some(secs) = secs {
                            units.push((c, with_lab, secs.clone()));
                            commit(d, secs, &mut busy, &mut taken);
                            load += add;
                            break;
                        }
                    }
                }
            }
            if units.is_empty() {
                return Ok((units, taken));
            }
        } else {
            let mut order = units.clone();
            order.shuffle(&mut d.rng);
            for (c, with_lab, template) in order {
                match d.enroll_unit(c, with_lab, part, &busy, &template) {
                    Ok(secs) => commit(d, secs, &mut busy, &mut taken),
                    Err(_) => return Err((c, taken)),
                }
            }
        }
        remaining -= part;
    }
    Ok((units, taken))
}

/// Generates an instance and its witness timetable.
pub fn generate(params: &GenParams) -> Result<Generated, GenError> {
    params.check()?;
    let p = params.clone();
    let mut d = Draft {
        rng: ChaCha8Rng::seed_from_u64(p.seed),
        p: p.clone(),
        room_type: Vec::new(),
        room_cap: Vec::new(),
        room_busy: vec![[false; NUM_SLOTS]; p.n_rooms],
        prof_busy: vec![[false; NUM_SLOTS]; p.n_professors],
        prof_lead: vec![[false; NUM_SLOTS]; p.n_professors],
        courses: Vec::new(),
        sections: Vec::new(),
        next_tie: 0,
    };

    // Room types: 0 holds lectures; labs use the others when there are any.
    let type_names: Vec<String> =
        (0..p.room_type_count).map(|t| if t == 0 { "CLASSROOM".to_string() } else { format!("LAB{t}") }).collect();
    for r in 0..p.n_rooms {
        let t = if r < p.room_type_count {
            r
        } else if p.room_type_count > 1 && d.chance(p.lab_fraction) {
            d.rng.random_range(1..p.room_type_count)
        } else {
            0
        };
        d.room_type.push(t);
        let extra = d.rng.random_range(0..=10);
        d.room_cap.push(p.capacity_range.1 + extra);
    }

    // Courses.
    for c in 0..p.n_courses {
        let periods = *[2u8, 3, 3, 3, 4].get(d.rng.random_range(0..5)).expect("in range");
        d.courses.push(CourseDraft { id: format!("C{:02}", c + 1), periods, lab: false, room_type: 0, partner: None });
    }
    for c in 0..p.n_courses {
        if d.chance(p.lab_fraction) {
            let periods = *[2u8, 2, 3, 3, 4].get(d.rng.random_range(0..5)).expect("in range");
            let room_type = if p.room_type_count > 1 { d.rng.random_range(1..p.room_type_count) } else { 0 };
            let id = format!("{}L", d.courses[c].id);
            d.courses.push(CourseDraft { id, periods, lab: true, room_type, partner: Some(c) });
            let lab = d.courses.len() - 1;
            d.courses[c].partner = Some(lab);
        }
    }

    // Sections opened up front, whether or not anyone takes them.
    let none = [false; NUM_SLOTS];
    for c in 0..p.n_courses {
        let (lo, hi) = p.sections_per_course_range;
        let k = d.rng.random_range(lo..=hi);
        match d.courses[c].partner {
            Some(lab) => {
                // A crowded lab room type can refuse a tie; the lecture then
                // stands alone, and a course with no tie at all loses its lab.
                let ties = d.rng.random_range(1..=k.max(1));
                let mut tied = 0;
                while tied < ties && d.place_pair(c, lab, 0, &none, &[]).is_ok() {
                    tied += 1;
                }
                if tied == 0 {
                    d.courses[c].partner = None;
                }
                let opened = d.sections.iter().filter(|s| s.course == c).count();
                for _ in opened..k {
                    let cap = d.new_cap(0);
                    d.place(c, cap, &none, None, None).ok_or_else(|| d.no_fit(c))?;
                }
            }
            None => {
                for _ in 0..k {
                    let cap = d.new_cap(0);
                    d.place(c, cap, &none, None, None).ok_or_else(|| d.no_fit(c))?;
                }
            }
        }
    }

    // Groups and their enrollment in the hidden timetable. The first part
    // of each group settles the curriculum, skipping courses that no longer
    // fit; later parts must take the same courses. When a later part cannot,
    // the group is rolled back and retried without the offending course.
    let mut groups = Vec::new();
    let mut parts: Vec<(Group, Vec<usize>)> = Vec::new();
    for g in 0..p.n_groups {
        let id = format!("G{:02}", g + 1);
        let mut size = d.rng.random_range(p.group_size_range.0..=p.group_size_range.1);
        let mut all: Vec<usize> = (0..p.n_courses).collect();
        all.shuffle(&mut d.rng);
        let want = d.rng.random_range(p.curriculum_size_range.0..=p.curriculum_size_range.1);
        // The curriculum size is a target: a crowded week may leave fewer.
        // A group that fits nowhere is halved and tried again.
        let (units, mine) = 'sized: loop {
            let mut lectures = all.clone();
            let done = loop {
                match enroll_group(&mut d, &lectures, size, want) {
                    Ok(done) => break done,
                    Err((c, taken)) => {
                        for (part, secs) in taken {
                            for s in secs {
                                d.sections[s].load -= part;
                            }
                        }
                        lectures.retain(|&x| x != c);
                    }
                }
            };
            if !done.0.is_empty() {
                break 'sized done;
            }
            if size <= p.group_size_range.0 {
                return Err(GenError::NoCurriculum { group: id });
            }
            size = (size / 2).max(p.group_size_range.0);
        };
        let mut curriculum: Vec<String> = Vec::new();
        for &(c, lab, _) in &units {
            curriculum.push(d.courses[c].id.clone());
            if lab {
                curriculum.push(d.courses[d.courses[c].partner.expect("lab unit")].id.clone());
            }
        }
        let group = Group::new(id.clone(), size, curriculum);
        let split = mine.len() > 1;
        for (k, (part, secs)) in mine.into_iter().enumerate() {
            let mut pg = group.clone();
            if split {
                pg.id = format!("{id}.p{}", k + 1);
                pg.size = part;
                pg.lineage = Some(id.clone());
            }
            parts.push((pg, secs));
        }
        groups.push(group);
    }

    // Co-professors, mandates and adjuncts, all consistent with the witness.
    for s in 0..d.sections.len() {
        if d.chance(p.coprof_fraction) {
            let slots = d.sections[s].slots.clone();
            let lead = d.sections[s].prof;
            let mut profs: Vec<usize> = (0..p.n_professors).filter(|&q| q != lead).collect();
            profs.shuffle(&mut d.rng);
            if let Some(&q) = profs.iter().find(|&&q| slots.iter().all(|&x| !d.prof_lead[q][x])) {
                d.sections[s].coprofs.push(q);
                for &x in &slots {
                    d.prof_busy[q][x] = true;
                }
            }
        }
    }
    let mut mandates: Vec<Vec<Mandate>> = vec![Vec::new(); d.sections.len()];
    for s in 0..d.sections.len() {
        if d.chance(p.mandate_fraction) {
            let sec = &d.sections[s];
            let x = sec.slots[d.rng.random_range(0..sec.slots.len())];
            let day = Day::ALL[day_of(x)];
            mandates[s].push(if d.courses[sec.course].lab || d.rng.random_bool(0.5) {
                Mandate::Day(day)
            } else {
                Mandate::Slot(day, period_of(x))
            });
        }
    }
    let adjunct: Vec<bool> = (0..p.n_professors).map(|_| d.chance(p.adjunct_fraction)).collect();

    // Assemble.
    let used: BTreeSet<usize> =
        d.sections.iter().flat_map(|s| std::iter::once(s.prof).chain(s.coprofs.iter().copied())).collect();
    let prof_id = |q: usize| format!("P{:02}", q + 1);
    let mut professors = Vec::new();
    for &q in &used {
        let mut prof = Professor::new(prof_id(q));
        prof.availability = FULL_AVAILABILITY;
        for x in 0..NUM_SLOTS {
            if !d.prof_busy[q][x] && d.chance(p.availability_block_fraction) {
                prof.availability[day_of(x)][usize::from(period_of(x)) - 1] = -(d.rng.random_range(0..=2i8));
            }
        }
        prof.is_adjunct = adjunct[q] && d.sections.iter().any(|s| s.prof == q);
        professors.push(prof);
    }
    let rooms: Vec<Room> = (0..p.n_rooms)
        .map(|r| Room {
            id: format!("R{:02}", r + 1),
            capacity: d.room_cap[r],
            room_type: type_names[d.room_type[r]].clone(),
        })
        .collect();
    let sec_id = |s: usize| format!("S{:03}", s + 1);
    let mut sections = Vec::new();
    for (s, sd) in d.sections.iter().enumerate() {
        let c = &d.courses[sd.course];
        let mut sec = Section::lecture(
            sec_id(s),
            prof_id(sd.prof),
            c.id.clone(),
            c.periods,
            sd.capacity,
            type_names[c.room_type].clone(),
        );
        sec.is_lab = c.lab;
        sec.labtie = sd.labtie;
        sec.mandates = mandates[s].clone();
        sec.coprofs = sd.coprofs.iter().map(|&q| prof_id(q)).collect();
        sec.is_adjunct_taught = adjunct[sd.prof];
        sections.push(sec);
    }
    let courses = d
        .courses
        .iter()
        .filter(|c| d.sections.iter().any(|s| d.courses[s.course].id == c.id))
        .map(|c| crate::model::Course { id: c.id.clone(), periods: c.periods })
        .collect();
    let instance = Instance::new(rooms, professors, courses, sections, groups)?;

    let mut witness = Timetable::default();
    for (s, sd) in d.sections.iter().enumerate() {
        let room = format!("R{:02}", sd.room + 1);
        let set = witness.meetings.entry(sec_id(s)).or_default();
        for &x in &sd.slots {
            set.insert(Meeting { day: Day::ALL[day_of(x)], period: period_of(x), room: room.clone() });
            witness.prof_grid.entry(prof_id(sd.prof)).or_default().insert((Day::ALL[day_of(x)], period_of(x)));
        }
    }
    let mut witness_groups = Vec::new();
    for (g, chosen) in parts {
        witness.enrollments.insert(g.id.clone(), chosen.iter().map(|&s| sec_id(s)).collect());
        witness_groups.push(g);
    }
    witness_groups.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(Generated { instance, witness, witness_groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{validate_instance, Severity};
    use crate::validate::check_hard;

    fn witness_holds(g: &Generated) {
        let errors: Vec<_> =
            validate_instance(&g.instance).into_iter().filter(|i| i.severity == Severity::Error).collect();
        assert!(errors.is_empty(), "{errors:?}");
        let refined = g.instance.with_groups(g.witness_groups.clone()).unwrap();
        let v = check_hard(&refined, &g.witness);
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn presets_produce_valid_witnesses() {
        for name in GenParams::PRESETS {
            for seed in 1..=3 {
                let g =
                    generate(&GenParams::preset(name, seed).unwrap()).unwrap_or_else(|e| panic!("{name} {seed}: {e}"));
                witness_holds(&g);
            }
        }
    }

    #[test]
    fn tiny_is_one_of_everything() {
        let g = generate(&GenParams::preset("tiny", 1).unwrap()).unwrap();
        assert_eq!(g.instance.sections.len(), 1);
        assert_eq!(g.instance.groups.len(), 1);
        assert_eq!(g.instance.rooms.len(), 1);
        assert_eq!(g.witness_groups, g.instance.groups);
    }

    #[test]
    fn same_seed_same_output() {
        let p = GenParams::preset("section4", 7).unwrap();
        let a = generate(&p).unwrap();
        let b = generate(&p).unwrap();
        let text = |g: &Generated| {
            (
                crate::ingest::write_sections(&g.instance),
                crate::ingest::write_groups(&g.instance.groups),
                crate::tip::write_timetable(&g.witness, &g.witness_groups, &g.instance),
            )
        };
        assert_eq!(text(&a), text(&b));
        let c = generate(&GenParams { seed: 8, ..p }).unwrap();
        assert_ne!(text(&a), text(&c));
    }

    #[test]
    fn witness_round_trip() {
        let g = generate(&GenParams::preset("section4", 2).unwrap()).unwrap();
        assert!(g.witness_groups.len() > g.instance.groups.len());
        let text = crate::tip::write_timetable(&g.witness, &g.witness_groups, &g.instance);
        let (tt, groups) = crate::tip::parse_timetable(&text, &g.instance).unwrap();
        assert_eq!(tt, g.witness);
        assert_eq!(groups, g.witness_groups);
    }

    #[test]
    fn bad_params_rejected() {
        let p = GenParams { capacity_range: (10, 5), ..GenParams::default() };
        assert!(matches!(generate(&p), Err(GenError::Params(_))));
        let p = GenParams { lab_fraction: 1.5, ..GenParams::default() };
        assert!(matches!(generate(&p), Err(GenError::Params(_))));
    }

    #[test]
    fn overfull_params_fail_cleanly() {
        let p = GenParams { n_courses: 30, sections_per_course_range: (2, 2), ..GenParams::preset("tiny", 1).unwrap() };
        assert!(matches!(generate(&p), Err(GenError::NoFit { .. })));
    }

    #[test]
    fn dense_fills_group_weeks() {
        let p = GenParams {
            n_courses: 14,
            n_rooms: 8,
            n_professors: 12,
            dense: true,
            ..GenParams::preset("toy", 3).unwrap()
        };
        let g = generate(&p).unwrap();
        witness_holds(&g);
        let per_group: Vec<u32> = g
            .instance
            .groups
            .iter()
            .map(|gr| gr.curriculum.iter().map(|c| u32::from(g.instance.course(c).unwrap().periods)).sum())
            .collect();
        assert!(per_group.iter().all(|&n| n >= 28), "{per_group:?}");
    }
}

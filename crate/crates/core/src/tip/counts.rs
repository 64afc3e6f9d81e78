use std::collections::{BTreeMap, BTreeSet};

use super::{CapacityMode, Family};
use crate::model::{
    forbidden_lab_pairs, forbidden_lab_triples, fulltime_professors, Group, Instance, Slot, NUM_DAYS, NUM_SLOTS,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FamilyCount {
    pub rows: usize,
    pub nonzeros: usize,
}

impl FamilyCount {
    fn add(&mut self, rows: usize, nz_each: usize) {
        self.rows += rows;
        self.nonzeros += rows * nz_each;
    }
}

/// Program size predicted from the instance alone, without building it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TipCounts {
    pub families: BTreeMap<Family, FamilyCount>,
    /// Variable count per variable name prefix (`z`, `w`, `x`, ...).
    pub vars: BTreeMap<&'static str, usize>,
}

impl TipCounts {
    pub fn rows(&self) -> usize {
        self.families.values().map(|f| f.rows).sum()
    }

    pub fn nonzeros(&self) -> usize {
        self.families.values().map(|f| f.nonzeros).sum()
    }

    pub fn columns(&self) -> usize {
        self.vars.values().sum()
    }
}

/// Closed-form row, nonzero and column counts for `groups`.
pub fn expected_counts(inst: &Instance, groups: &[Group], mode: CapacityMode) -> TipCounts {
    let nsec = inst.sections.len();
    let nprof = inst.professors.len();
    let ngrp = groups.len();
    let slots = NUM_SLOTS;
    let days = NUM_DAYS;
    let compat: Vec<usize> = (0..nsec).map(|s| inst.compatible_rooms(s).len()).collect();
    let z_total: usize = compat.iter().map(|c| slots * c).sum();

    // W_g and W_s from curricula.
    let mut w_g = vec![0usize; ngrp];
    let mut w_s = vec![0usize; nsec];
    let mut takes: Vec<Vec<usize>> = vec![Vec::new(); ngrp];
    for (g, grp) in groups.iter().enumerate() {
        for (s, sec) in inst.sections.iter().enumerate() {
            if grp.curriculum.contains(&sec.course) {
                w_g[g] += 1;
                w_s[s] += 1;
                takes[g].push(s);
            }
        }
    }
    let w_total: usize = w_g.iter().sum();

    let is_lab = |s: usize| inst.sections[s].is_lab;
    let periods = |s: usize| inst.sections[s].periods;
    let labs: Vec<usize> = (0..nsec).filter(|&s| is_lab(s)).collect();
    let short = |p: u8| (0..nsec).filter(move |&s| !is_lab(s) && periods(s) == p).count();
    let (short2, short3) = (short(2), short(3));
    let fulltime = fulltime_professors(inst).len();
    let unavailable: Vec<usize> =
        inst.professors.iter().map(|p| (0..slots).filter(|&i| p.avail(Slot::from_index(i)) <= 0).count()).collect();

    let mut vars = BTreeMap::new();
    vars.insert("z", z_total);
    vars.insert("w", slots * nprof);
    vars.insert("x", w_total);
    vars.insert("u", slots * w_total);
    vars.insert("y1", days * labs.len());
    vars.insert("y2", days * labs.iter().map(|&s| compat[s]).sum::<usize>());
    vars.insert("y3", days * nprof);
    vars.insert("t4", days * nprof);
    vars.insert("ttue", fulltime);
    vars.insert("t5", nprof);
    vars.insert("ygp1", days * (short2 + short3));
    vars.insert("tgp2", (days - 1) * short2);
    vars.insert("tgp3", (days - 2) * short3);
    vars.insert("t0", unavailable.iter().sum());
    vars.insert("ts", if mode == CapacityMode::Soft { nsec } else { 0 });

    let mut fam: BTreeMap<Family, FamilyCount> = Family::ALL.iter().map(|&f| (f, FamilyCount::default())).collect();
    let mut at = |f: Family, rows: usize, nz: usize| fam.get_mut(&f).expect("all families").add(rows, nz);

    for s in 0..nsec {
        at(Family::H1, 1, slots * compat[s]);
    }
    let mut linked: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (s, sec) in inst.sections.iter().enumerate() {
        if let Some(k) = sec.link {
            linked.entry(k).or_default().push(s);
        }
    }
    for m in linked.values() {
        for i in 0..m.len() {
            for j in i + 1..m.len() {
                at(Family::H2, slots, compat[m[i]] + compat[m[j]]);
            }
        }
    }
    // Room rows: one per slot for every room some section fits.
    let mut users: BTreeMap<usize, usize> = BTreeMap::new();
    for s in 0..nsec {
        for r in inst.compatible_rooms(s) {
            *users.entry(r).or_default() += 1;
        }
    }
    for &n in users.values() {
        at(Family::H3, slots, n);
    }
    for (s, sec) in inst.sections.iter().enumerate() {
        let distinct: BTreeSet<_> = sec.mandates.iter().collect();
        for m in distinct {
            match m {
                crate::model::Mandate::Day(_) => at(Family::H4, 1, 7 * compat[s]),
                crate::model::Mandate::Slot(..) => at(Family::H4, 1, compat[s]),
            }
        }
        if !sec.is_lab {
            at(Family::H5, days, 7 * compat[s]);
        }
    }
    let pairs = forbidden_lab_pairs(&inst.grid).len();
    let triples = forbidden_lab_triples(&inst.grid).len();
    for &s in &labs {
        at(Family::H6, 2 * days, 7 * compat[s] + 1);
        at(Family::H6, 2 * days * compat[s], 8);
        match periods(s) {
            2 => at(Family::H6, pairs * days * compat[s], 2),
            3 => at(Family::H6, triples * days * compat[s], 3),
            4 => at(Family::H6, days * compat[s], 3),
            _ => {}
        }
    }
    // Each professor-slot row holds the z of that professor's sections plus w.
    let mut prof_z = vec![0usize; nprof];
    for (s, sec) in inst.sections.iter().enumerate() {
        prof_z[inst.prof_idx(&sec.prof).expect("resolved")] += compat[s];
    }
    for &n in &prof_z {
        at(Family::H7, slots, n + 1);
    }
    for (s, sec) in inst.sections.iter().enumerate() {
        let cps: BTreeSet<&String> = sec.coprofs.iter().collect();
        for cp in cps {
            at(Family::H8, slots, compat[s] + 1);
            let p = inst.prof_idx(cp).expect("resolved");
            at(Family::S6, unavailable[p], compat[s] + 1);
        }
    }
    let by_course = inst.sections_by_course();
    for (g, grp) in groups.iter().enumerate() {
        for c in &grp.curriculum {
            at(Family::H9, 1, by_course.get(c.as_str()).map_or(0, Vec::len));
        }
        for &s in &takes[g] {
            at(Family::H10, 1, slots + 1);
            at(Family::H10, slots, 2 + compat[s]);
        }
        if w_g[g] > 0 {
            at(Family::H10, 1, slots * w_g[g]);
            at(Family::H10, slots, w_g[g]);
        }
        for (i, &a) in takes[g].iter().enumerate() {
            for &b in &takes[g][i + 1..] {
                let (sa, sb) = (&inst.sections[a], &inst.sections[b]);
                if sa.labtie.is_none() || sa.labtie != sb.labtie {
                    continue;
                }
                if sa.is_lab != sb.is_lab {
                    at(Family::H11, 1, 2);
                }
                at(Family::H13, days, 14);
                at(Family::H14, 2 * days * 5, 2);
            }
        }
    }
    for s in 0..nsec {
        match mode {
            CapacityMode::Hard if w_s[s] > 0 => at(Family::H12, 1, w_s[s]),
            CapacityMode::Hard => {}
            CapacityMode::Soft => at(Family::H12, 1, w_s[s] + 1),
        }
    }
    for s in (0..nsec).filter(|&s| !is_lab(s) && (2..=3).contains(&periods(s))) {
        at(Family::S1, days, 1 + 7 * compat[s]);
    }
    at(Family::S2, (days - 1) * short2, 3);
    at(Family::S2, (days - 2) * short3, 4);
    at(Family::S3, 2 * days * nprof, 8);
    at(Family::S3, nprof, days + 1);
    at(Family::S4, days * nprof, 3);
    at(Family::S5, fulltime, 2);
    at(Family::S6, unavailable.iter().sum(), 2);

    TipCounts { families: fam, vars }
}

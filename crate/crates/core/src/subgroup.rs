//! Group refinement: split student groups until every section can hold the
//! students assigned to it.
//!
//! Each round solves an assignment program that sends every group to one
//! section of each course it needs while minimizing total over-enrollment.
//! If anything is over capacity, the largest group in the most overbooked
//! section is split so that one part holds exactly the overflow.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};

use log::info;
use thiserror::Error;

use crate::ingest::validate_instance;
use crate::ingest::IssueCode;
use crate::mipcore::{Model, ModelError, Sense, SolveResult, SolveStatus, VarId, VarKind};
use crate::model::{group_section_options, Group, Instance};

pub const DEFAULT_MAX_ITER: usize = 200;

/// Variable lookup for an assignment program.
#[derive(Debug, Clone, Default)]
pub struct IpaIndex {
    /// (group id, section id) -> x variable.
    pub x: BTreeMap<(String, String), VarId>,
    /// section id -> overflow variable.
    pub t: BTreeMap<String, VarId>,
}

#[derive(Debug, Error)]
pub enum SubgroupError {
    #[error("course {course:?} has no sections")]
    NoSections { course: String },
    #[error("{demand} students need {course} but its sections seat {capacity}")]
    CapacityShortfall { course: String, demand: u64, capacity: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("assignment program infeasible; check labtie structure")]
    Infeasible,
    #[error("assignment program not solved to optimality (status {0})")]
    NotOptimal(SolveStatus),
    #[error("still {z} students over capacity after {iterations} splits")]
    IterationLimit { iterations: usize, z: u64 },
    #[error("section {section} is over capacity but none of its groups can be split")]
    NoProgress { section: String },
    #[error("over-enrollment rose from {before} to {after}")]
    Regression { before: u64, after: u64 },
    #[error(transparent)]
    Split(#[from] SplitError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SplitError {
    #[error("cannot split {part} students off group {group:?} of size {size}")]
    BadPart { group: String, size: u32, part: u32 },
    #[error("split of {0:?} would reuse an existing group id")]
    IdCollision(String),
}

/// Builds the assignment program for `groups` against the sections of
/// `inst`. Overflow is allowed on every section and summed in the objective.
pub fn build_ipa(inst: &Instance, groups: &[Group]) -> Result<(Model, IpaIndex), SubgroupError> {
    let by_course = inst.sections_by_course();
    for g in groups {
        if let Some(c) = g.curriculum.iter().find(|c| !by_course.contains_key(c.as_str())) {
            return Err(SubgroupError::NoSections { course: c.clone() });
        }
    }
    let options = group_section_options(inst, groups);
    let mut m = Model::new();
    let mut idx = IpaIndex::default();
    let mut x_of: BTreeMap<(usize, usize), VarId> = BTreeMap::new();
    for &(g, s) in &options {
        let (gid, sid) = (&groups[g].id, &inst.sections[s].id);
        let v = m.add_binary(format!("x({gid},{sid})"))?;
        // Larger groups are harder to place; branch on them first.
        m.set_priority(v, 1 + groups[g].size as i32);
        x_of.insert((g, s), v);
        idx.x.insert((gid.clone(), sid.clone()), v);
    }
    let mut load: Vec<u64> = vec![0; inst.sections.len()];
    for &(g, s) in &options {
        load[s] += u64::from(groups[g].size);
    }
    for (s, sec) in inst.sections.iter().enumerate() {
        let t = m.add_var(format!("t({})", sec.id), VarKind::Integer, 0.0, load[s] as f64)?;
        m.add_objective(1.0, t);
        idx.t.insert(sec.id.clone(), t);
    }

    for (g, grp) in groups.iter().enumerate() {
        for c in &grp.curriculum {
            let terms = by_course[c.as_str()].iter().map(|&s| (1.0, x_of[&(g, s)])).collect();
            m.add_constraint(format!("assign({},{c})", grp.id), terms, Sense::Eq, 1.0)?;
        }
    }
    for (s, sec) in inst.sections.iter().enumerate() {
        let mut terms: Vec<(f64, VarId)> = options
            .iter()
            .filter(|&&(_, s2)| s2 == s)
            .map(|&(g, _)| (f64::from(groups[g].size), x_of[&(g, s)]))
            .collect();
        terms.push((-1.0, idx.t[&sec.id]));
        m.add_constraint(format!("cap({})", sec.id), terms, Sense::Le, f64::from(sec.capacity))?;
    }
    for (g, grp) in groups.iter().enumerate() {
        for (s0, lec) in inst.sections.iter().enumerate() {
            let Some(tie) = lec.labtie else { continue };
            if lec.is_lab {
                continue;
            }
            for (s1, lab) in inst.sections.iter().enumerate() {
                if !lab.is_lab || lab.labtie != Some(tie) {
                    continue;
                }
                if let (Some(&a), Some(&b)) = (x_of.get(&(g, s0)), x_of.get(&(g, s1))) {
                    m.add_constraint(
                        format!("labtie({},{},{})", grp.id, lec.id, lab.id),
                        vec![(1.0, a), (-1.0, b)],
                        Sense::Ge,
                        0.0,
                    )?;
                }
            }
        }
    }
    Ok((m, idx))
}

/// Splits `part` students off `g`: the first child keeps `size - part`, the
/// second gets `part`.
pub fn split_group(g: &Group, part: u32) -> Result<(Group, Group), SplitError> {
    if part == 0 || part >= g.size {
        return Err(SplitError::BadPart { group: g.id.clone(), size: g.size, part });
    }
    let child = |suffix: u32, size: u32| Group {
        id: format!("{}.{suffix}", g.id),
        size,
        curriculum: g.curriculum.clone(),
        lineage: Some(g.id.clone()),
    };
    Ok((child(1, g.size - part), child(2, part)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitRecord {
    pub iteration: usize,
    /// Over-enrollment before the split.
    pub z: u64,
    pub section: String,
    pub group: String,
    pub part: u32,
    pub sizes: (u32, u32),
}

#[derive(Debug, Clone)]
pub struct SubgroupResult {
    pub final_groups: Vec<Group>,
    pub iterations: usize,
    pub history: Vec<SplitRecord>,
    /// Optimal over-enrollment of each solved program, in order.
    pub z_trace: Vec<u64>,
    /// (group id, section id) pairs assigned by the last program.
    pub final_assignment: BTreeSet<(String, String)>,
}

impl SubgroupResult {
    /// One `iter,z,section,group,part` line per split, with a header.
    pub fn log_csv(&self) -> String {
        let mut out = String::from("iter,z,section,group,part\n");
        for r in &self.history {
            let _ = writeln!(out, "{},{},{},{},{}", r.iteration, r.z, r.section, r.group, r.part);
        }
        out
    }
}

impl fmt::Display for SplitRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iteration {}: z={}, split {} in {} into {}+{}",
            self.iteration, self.z, self.group, self.section, self.sizes.0, self.sizes.1
        )
    }
}

fn solved_value(res: &SolveResult, v: VarId) -> f64 {
    res.assignment.as_ref().map_or(0.0, |a| a.get(v))
}

/// Refines the instance's groups until the assignment program reaches zero
/// over-enrollment. `solve` must return proven optimal results.
pub fn run_subgroup<F, E>(inst: &Instance, mut solve: F, max_iter: usize) -> Result<SubgroupResult, SubgroupError>
where
    F: FnMut(&Model) -> Result<SolveResult, E>,
    E: fmt::Display,
{
    if let Some(issue) = validate_instance(inst).into_iter().find(|i| i.code == IssueCode::CapacityShortfall) {
        let (demand, capacity) = crate::ingest::course_demand(inst)[issue.subject.as_str()];
        return Err(SubgroupError::CapacityShortfall { course: issue.subject, demand, capacity });
    }
    let mut groups = inst.groups.clone();
    let mut history = Vec::new();
    let mut z_trace = Vec::new();
    loop {
        let (model, idx) = build_ipa(inst, &groups)?;
        let res = solve(&model).map_err(|e| SubgroupError::Solver(e.to_string()))?;
        match res.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => return Err(SubgroupError::Infeasible),
            other => return Err(SubgroupError::NotOptimal(other)),
        }
        let z = res.objective.unwrap_or(0.0).round() as u64;
        if let Some(&before) = z_trace.last() {
            if z > before {
                return Err(SubgroupError::Regression { before, after: z });
            }
        }
        z_trace.push(z);
        let assigned: BTreeSet<(String, String)> =
            idx.x.iter().filter(|(_, &v)| solved_value(&res, v) > 0.5).map(|(k, _)| k.clone()).collect();
        info!("round {}: over-enrollment {z}", history.len());
        if z == 0 {
            return Ok(SubgroupResult {
                final_groups: groups,
                iterations: history.len(),
                history,
                z_trace,
                final_assignment: assigned,
            });
        }
        if history.len() >= max_iter {
            return Err(SubgroupError::IterationLimit { iterations: history.len(), z });
        }

        // Most overbooked section, smallest id on ties (the map is ordered).
        let (section, t_r) = idx
            .t
            .iter()
            .map(|(s, &v)| (s.clone(), solved_value(&res, v).round() as u32))
            .fold((String::new(), 0u32), |best, cur| if cur.1 > best.1 { cur } else { best });
        let mut enrolled: Vec<&Group> =
            groups.iter().filter(|g| assigned.contains(&(g.id.clone(), section.clone()))).collect();
        enrolled.sort_by(|a, b| b.size.cmp(&a.size).then_with(|| a.id.cmp(&b.id)));
        let Some(g) = enrolled.into_iter().find(|g| g.size >= 2) else {
            return Err(SubgroupError::NoProgress { section });
        };
        let part = if g.size > t_r { t_r } else { g.size / 2 };
        let (a, b) = split_group(g, part)?;
        if groups.iter().any(|h| h.id == a.id || h.id == b.id) {
            return Err(SplitError::IdCollision(g.id.clone()).into());
        }
        let rec = SplitRecord {
            iteration: history.len() + 1,
            z,
            section,
            group: g.id.clone(),
            part,
            sizes: (a.size, b.size),
        };
        info!("{rec}");
        let pos = groups.iter().position(|h| h.id == g.id).expect("group present");
        groups.splice(pos..=pos, [a, b]);
        history.push(rec);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mipcore::{evaluate, solve_exact, Assignment, Limits};
    use crate::model::fixtures::{build, room, sample_consistent};
    use crate::model::Section;

    fn solver(m: &Model) -> Result<SolveResult, String> {
        solve_exact(m, &Limits::default()).map_err(|e| e.to_string())
    }

    pub(crate) fn packing_example() -> Instance {
        let sections = (1..=3)
            .map(|i| Section::lecture(format!("M{i}"), format!("P{i}"), "MATH101", 3, 30, "CLASSROOM"))
            .collect();
        let groups =
            vec![Group::new("A", 34, ["MATH101"]), Group::new("B", 41, ["MATH101"]), Group::new("C", 15, ["MATH101"])];
        build(vec![room("R", 30, "CLASSROOM")], sections, groups)
    }

    #[test]
    fn example_model_shape() {
        let inst = packing_example();
        let (m, idx) = build_ipa(&inst, &inst.groups).unwrap();
        let eq = m.constraints().iter().filter(|c| c.sense == Sense::Eq).count();
        let cap = m.constraints().iter().filter(|c| c.name.starts_with("cap(")).count();
        let bin = m.vars().iter().filter(|v| v.kind == VarKind::Binary).count();
        let int = m.vars().iter().filter(|v| v.kind == VarKind::Integer).count();
        assert_eq!((eq, cap, bin, int), (3, 3, 9, 3));
        assert_eq!(idx.x.len(), 9);
        assert_eq!(solver(&m).unwrap().objective, Some(15.0));
    }

    #[test]
    fn example_runs_to_zero() {
        let inst = packing_example();
        let r = run_subgroup(&inst, solver, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(r.iterations, 2);
        assert_eq!(r.z_trace, vec![15, 4, 0]);
        assert_eq!(r.history[0].group, "B");
        assert_eq!(r.history[0].sizes, (30, 11));
        assert_eq!(r.history[1].group, "A");
        assert_eq!(r.history[1].sizes, (30, 4));
        let mut sizes: Vec<u32> = r.final_groups.iter().map(|g| g.size).collect();
        sizes.sort();
        assert_eq!(sizes, vec![4, 11, 15, 30, 30]);
        assert!(r.log_csv().starts_with("iter,z,section,group,part\n1,15,"));
    }

    #[test]
    fn fitting_groups_need_no_splits() {
        let inst = sample_consistent();
        let r = run_subgroup(&inst, solver, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.z_trace, vec![0]);
        assert_eq!(r.final_groups, inst.groups);
    }

    #[test]
    fn labtie_implication() {
        let inst = sample_consistent();
        let (m, idx) = build_ipa(&inst, &inst.groups).unwrap();
        let res = solver(&m).unwrap();
        let a = res.assignment.unwrap();
        for g in ["G2", "G3", "G4", "G5"] {
            for (lec, lab) in [("S08", "S09"), ("S10", "S11")] {
                if a.get(idx.x[&(g.into(), lab.into())]) > 0.5 {
                    assert!(a.get(idx.x[&(g.into(), lec.into())]) > 0.5);
                }
            }
        }
        // Forcing the lab without its lecture violates the tie row.
        let mut bad = Assignment::zeros(&m);
        bad.values[idx.x[&("G5".into(), "S09".into())].0] = 1.0;
        let e = evaluate(&m, &bad).unwrap();
        assert!(e.violated.iter().any(|v| v.name() == "labtie(G5,S08,S09)"));
    }

    #[test]
    fn split_guards() {
        let g = Group::new("G", 41, ["A"]);
        let (a, b) = split_group(&g, 11).unwrap();
        assert_eq!((a.size, b.size), (30, 11));
        assert_eq!((a.id.as_str(), b.id.as_str()), ("G.1", "G.2"));
        assert_eq!(a.lineage.as_deref(), Some("G"));
        assert_eq!(a.curriculum, g.curriculum);
        let two = Group::new("H", 2, ["A"]);
        let (a, b) = split_group(&two, 1).unwrap();
        assert_eq!((a.size, b.size), (1, 1));
        assert!(split_group(&Group::new("F", 5, ["A"]), 5).is_err());
        assert!(split_group(&Group::new("F", 5, ["A"]), 0).is_err());
    }

    #[test]
    fn shortfall_is_rejected_upfront() {
        let inst = build(
            vec![room("R", 30, "CLASSROOM")],
            vec![Section::lecture("S", "P", "C", 3, 10, "CLASSROOM")],
            vec![Group::new("G", 11, ["C"])],
        );
        assert!(matches!(
            run_subgroup(&inst, solver, 10),
            Err(SubgroupError::CapacityShortfall { demand: 11, capacity: 10, .. })
        ));
    }

    #[test]
    fn iteration_limit() {
        let inst = packing_example();
        assert!(matches!(run_subgroup(&inst, solver, 1), Err(SubgroupError::IterationLimit { iterations: 1, z: 4 })));
    }

    #[test]
    fn overflow_part_is_split_off() {
        // Two sections of 3 seats, groups of 2+2+2: one section ends up
        // with 4 students and one student is split off a size-2 group.
        let sections =
            (1..=2).map(|i| Section::lecture(format!("S{i}"), format!("P{i}"), "C", 1, 3, "CLASSROOM")).collect();
        let groups = vec![Group::new("a", 2, ["C"]), Group::new("b", 2, ["C"]), Group::new("c", 2, ["C"])];
        let inst = build(vec![room("R", 3, "CLASSROOM")], sections, groups);
        let r = run_subgroup(&inst, solver, 10).unwrap();
        assert_eq!(r.z_trace, vec![1, 0]);
        assert_eq!(r.history[0].part, 1);
        assert_eq!(r.final_groups.iter().map(|g| g.size).sum::<u32>(), 6);
    }

    #[test]
    fn degenerate_overflow_halves_the_group() {
        // A non-optimal packing (both groups in S1) reported as optimal puts
        // an overflow of 3 next to groups of size 3, so the overflow cannot
        // be split off and the guard halves the group instead.
        let sections = vec![
            Section::lecture("S1", "P", "C", 1, 3, "CLASSROOM"),
            Section::lecture("S2", "Q", "C", 1, 3, "CLASSROOM"),
        ];
        let groups = vec![Group::new("a", 3, ["C"]), Group::new("b", 3, ["C"])];
        let inst = build(vec![room("R", 3, "CLASSROOM")], sections, groups);
        let mut calls = 0;
        let fake = |m: &Model| {
            calls += 1;
            if calls > 1 {
                return solver(m);
            }
            let mut a = Assignment::zeros(m);
            for name in ["x(a,S1)", "x(b,S1)"] {
                a.values[m.var_by_name(name).unwrap().0] = 1.0;
            }
            a.values[m.var_by_name("t(S1)").unwrap().0] = 3.0;
            Ok::<_, String>(SolveResult {
                status: SolveStatus::Optimal,
                objective: Some(3.0),
                assignment: Some(a),
                proof_gap: 0.0,
                stats: Default::default(),
            })
        };
        let r = run_subgroup(&inst, fake, 10).unwrap();
        assert_eq!(r.history[0].group, "a");
        assert_eq!(r.history[0].part, 1);
        assert_eq!(r.history[0].sizes, (2, 1));
        assert_eq!(r.z_trace, vec![3, 0]);
    }
}

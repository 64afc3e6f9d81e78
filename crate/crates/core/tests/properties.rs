//! Property tests over the public API.

use proptest::prelude::*;

use tt_core::gen::{generate, GenParams};
use tt_core::mipcore::{parse_solution, solve_exact, write_solution, Assignment, Limits, Model, Sense, SolveStatus};
use tt_core::model::{Course, Day, Group, Instance, Mandate, Professor, Room, Section, NUM_DAYS, NUM_PERIODS};
use tt_core::subgroup::{run_subgroup, split_group};
use tt_core::tip::{build_tip, decode_solution, parse_timetable, write_timetable, CapacityMode, Weights};
use tt_core::validate::{audit, check_hard};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(cases) }
}

fn limits() -> Limits {
    Limits { threads: 1, ..Limits::default() }
}

/// (objective, rows of (coefficients, sense, rhs)) over `n` binaries.
type Bip = (Vec<i64>, Vec<(Vec<i64>, u8, i64)>);

fn bip() -> impl Strategy<Value = Bip> {
    (1usize..=10).prop_flat_map(|n| {
        let row = (prop::collection::vec(-5i64..=5, n), 0u8..3, -8i64..=8);
        (prop::collection::vec(-9i64..=9, n), prop::collection::vec(row, 0..=8))
    })
}

fn to_model((obj, rows): &Bip) -> Model {
    let mut m = Model::new();
    let vars: Vec<_> = (0..obj.len()).map(|j| m.add_binary(format!("x{j}")).unwrap()).collect();
    for (j, &c) in obj.iter().enumerate() {
        m.add_objective(c as f64, vars[j]);
    }
    for (i, (coef, sense, rhs)) in rows.iter().enumerate() {
        let terms: Vec<_> = coef.iter().zip(&vars).filter(|(c, _)| **c != 0).map(|(&c, &v)| (c as f64, v)).collect();
        if terms.is_empty() {
            continue;
        }
        let sense = [Sense::Le, Sense::Ge, Sense::Eq][*sense as usize];
        m.add_constraint(format!("r{i}"), terms, sense, *rhs as f64).unwrap();
    }
    m
}

fn brute_force((obj, rows): &Bip) -> Option<i64> {
    let n = obj.len();
    (0u32..1 << n)
        .filter_map(|mask| {
            let x = |j: usize| i64::from((mask >> j) & 1);
            let ok = rows.iter().all(|(coef, sense, rhs)| {
                if coef.iter().all(|&c| c == 0) {
                    return true;
                }
                let lhs: i64 = coef.iter().enumerate().map(|(j, c)| c * x(j)).sum();
                match sense {
                    0 => lhs <= *rhs,
                    1 => lhs >= *rhs,
                    _ => lhs == *rhs,
                }
            });
            ok.then(|| obj.iter().enumerate().map(|(j, c)| c * x(j)).sum())
        })
        .min()
}

fn lecture(id: &str, prof: &str, course: &str, periods: u8, cap: u32) -> Section {
    Section::lecture(id, prof, course, periods, cap, "ROOM")
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn solver_agrees_with_brute_force(p in bip()) {
        let model = to_model(&p);
        let res = solve_exact(&model, &limits()).unwrap();
        match brute_force(&p) {
            None => prop_assert_eq!(res.status, SolveStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(res.status, SolveStatus::Optimal);
                prop_assert!((res.objective.unwrap() - best as f64).abs() < 1e-9);
                let a = res.assignment.unwrap();
                prop_assert!((model.objective_value(&a.values) - best as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn solution_file_round_trips(p in bip(), bits in any::<u16>()) {
        let model = to_model(&p);
        let values = (0..model.num_vars()).map(|j| f64::from((bits >> j) & 1)).collect();
        let a = Assignment { values };
        let obj = model.objective_value(&a.values);
        let text = write_solution(&model, &a, SolveStatus::Feasible, obj);
        let back = parse_solution(&text, &model).unwrap();
        prop_assert_eq!(back.assignment, a);
        prop_assert_eq!(back.declared_status, Some(SolveStatus::Feasible));
    }

    #[test]
    fn mandates_print_and_parse(day in 0usize..NUM_DAYS, period in 0u8..=NUM_PERIODS as u8) {
        let d = Day::from_index(day).unwrap();
        let m = if period == 0 { Mandate::Day(d) } else { Mandate::Slot(d, period) };
        prop_assert_eq!(Mandate::parse(&m.to_string()), Some(m));
    }

    #[test]
    fn split_keeps_students(size in 2u32..200, cut in 1u32..199) {
        let part = 1 + cut % (size - 1);
        let g = Group::new("G", size, ["A", "B"]);
        let (a, b) = split_group(&g, part).unwrap();
        prop_assert_eq!(a.size + b.size, size);
        prop_assert_eq!(b.size, part);
        prop_assert_eq!(&a.curriculum, &g.curriculum);
        prop_assert_eq!(a.lineage.as_deref(), Some("G"));
    }
}

proptest! {
    #![proptest_config(config(24))]

    /// Whenever the sections can seat everyone, refinement reaches zero
    /// overflow and keeps every original group's headcount.
    #[test]
    fn subgroup_conserves_students(
        caps in prop::collection::vec(5u32..40, 1..=4),
        sizes in prop::collection::vec(1u32..50, 1..=5),
    ) {
        prop_assume!(sizes.iter().sum::<u32>() <= caps.iter().sum::<u32>());
        let sections = caps
            .iter()
            .enumerate()
            .map(|(k, &c)| lecture(&format!("S{k}"), &format!("P{k}"), "C", 2, c))
            .collect();
        let groups = sizes.iter().enumerate().map(|(k, &s)| Group::new(format!("G{k}"), s, ["C"])).collect();
        let profs = (0..caps.len()).map(|k| Professor::new(format!("P{k}"))).collect();
        let inst = Instance::new(
            vec![Room { id: "R".into(), capacity: 60, room_type: "ROOM".into() }],
            profs,
            vec![Course { id: "C".into(), periods: 2 }],
            sections,
            groups,
        )
        .unwrap();
        let res = run_subgroup(&inst, |m| solve_exact(m, &limits()), 200).unwrap();
        prop_assert_eq!(res.z_trace.last(), Some(&0));
        prop_assert!(res.z_trace.windows(2).all(|w| w[1] <= w[0]));
        for (k, &s) in sizes.iter().enumerate() {
            let id = format!("G{k}");
            let total: u32 = res
                .final_groups
                .iter()
                .filter(|g| g.id == id || g.id.starts_with(&format!("{id}.")))
                .map(|g| g.size)
                .sum();
            prop_assert_eq!(total, s);
        }
    }

    /// Solving a small program with random availability and weights always
    /// yields a timetable whose recomputed penalty equals the objective.
    #[test]
    fn solved_timetables_pass_audit(
        periods in prop::collection::vec(1u8..=3, 1..=3),
        blocked in prop::collection::vec((0usize..NUM_DAYS, 0usize..NUM_PERIODS, -2i8..=0), 0..20),
        c0 in 1.0f64..50.0,
        d4 in 0.0f64..10.0,
        dgp in 0.0f64..5.0,
    ) {
        let mut prof = Professor::new("P");
        for &(d, t, v) in &blocked {
            prof.availability[d][t] = v;
        }
        let sections: Vec<Section> = periods
            .iter()
            .enumerate()
            .map(|(k, &p)| lecture(&format!("S{k}"), "P", &format!("C{k}"), p, 20))
            .collect();
        let courses = sections.iter().map(|s| Course { id: s.course.clone(), periods: s.periods }).collect();
        let group = Group::new("G", 10, sections.iter().map(|s| s.course.clone()));
        let inst = Instance::new(
            vec![Room { id: "R".into(), capacity: 20, room_type: "ROOM".into() }],
            vec![prof],
            courses,
            sections,
            vec![group],
        )
        .unwrap();
        let weights = Weights { c0, d4, dgp2: dgp, dgp3: dgp, ..Weights::default() };
        let (model, idx) = build_tip(&inst, &inst.groups, &weights, CapacityMode::Hard).unwrap();
        let res = solve_exact(&model, &limits()).unwrap();
        prop_assert_eq!(res.status, SolveStatus::Optimal);
        let tt = decode_solution(&inst, &idx, res.assignment.as_ref().unwrap()).unwrap();
        let report = audit(&inst, &tt, &weights, res.objective.unwrap());
        prop_assert!(report.ok, "{:?} recomputed {} vs {:?}", report.violations, report.recomputed, res.objective);
    }
}

proptest! {
    #![proptest_config(config(16))]

    /// Generated witnesses are valid and survive the timetable file format.
    #[test]
    fn witness_is_valid_and_round_trips(seed in 0u64..10_000, preset in 0usize..3) {
        let name = ["tiny", "toy", "section4"][preset];
        let g = generate(&GenParams::preset(name, seed).unwrap()).unwrap();
        let refined = g.instance.with_groups(g.witness_groups.clone()).unwrap();
        prop_assert!(check_hard(&refined, &g.witness).is_empty());
        let text = write_timetable(&g.witness, &g.witness_groups, &g.instance);
        let (tt, groups) = parse_timetable(&text, &g.instance).unwrap();
        prop_assert_eq!(&tt.meetings, &g.witness.meetings);
        prop_assert_eq!(&tt.enrollments, &g.witness.enrollments);
        prop_assert_eq!(groups, g.witness_groups);
    }
}

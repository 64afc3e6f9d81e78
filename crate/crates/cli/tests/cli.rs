use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tt")).args(args).current_dir(dir).env("TT_THREADS", "1").output().expect("tt runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = tt(dir, args);
    assert_eq!(
        code(&out),
        0,
        "tt {args:?}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn sample_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/sample")
}

/// Generates `preset`/`seed` into `dir`, then runs subgroup and solve there.
fn pipeline(dir: &Path, preset: &str, seed: &str) {
    ok(dir, &["gen", "--preset", preset, "--seed", seed, "--out", "."]);
    ok(dir, &["check-data"]);
    ok(dir, &["subgroup", "--out", "sg"]);
    ok(dir, &["build", "--groups", "sg/groups.csv", "--out", "build"]);
    let solved = ok(dir, &["solve", "--groups", "sg/groups.csv", "--out", "run"]);
    assert!(solved.contains("status optimal"), "{solved}");
    assert!(solved.contains("audit ok"), "{solved}");
}

#[test]
fn tiny_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    pipeline(d, "tiny", "1");
    for f in ["build/model.lp", "build/index.csv", "run/solution.sol", "run/timetable.csv", "run/audit.txt"] {
        assert!(d.join(f).exists(), "{f} missing");
    }
    assert_eq!(fs::read(d.join("build/model.lp")).unwrap(), fs::read(d.join("run/model.lp")).unwrap());
    let v = ok(d, &["validate", "--groups", "sg/groups.csv", "--solution", "run/solution.sol"]);
    assert!(v.contains("audit ok"), "{v}");
    let v = ok(d, &["validate", "--groups", "sg/groups.csv", "--solution", "run/timetable.csv"]);
    assert!(v.contains("audit ok"), "{v}");
    assert!(fs::read_to_string(d.join("run/audit.txt")).unwrap().starts_with("ok true"));
    // The generator's own witness satisfies the instance.
    ok(d, &["validate", "--solution", "witness.csv"]);
}

#[test]
fn report_writes_week_grids() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    pipeline(d, "toy", "2");
    ok(d, &["report", "--groups", "sg/groups.csv", "--solution", "run/timetable.csv", "--out", "rep"]);
    let groups: Vec<_> = fs::read_dir(d.join("rep/groups")).unwrap().collect();
    assert!(!groups.is_empty());
    for kind in ["groups", "professors", "rooms"] {
        for f in fs::read_dir(d.join("rep").join(kind)).unwrap() {
            let text = fs::read_to_string(f.unwrap().path()).unwrap();
            let lines: Vec<&str> = text.lines().collect();
            assert_eq!(lines.len(), 6);
            assert!(lines[0].ends_with(",1,2,3,4,5,6,7"));
            let days: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
            assert_eq!(days, ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday"]);
        }
    }
    // Every scheduled period of a group shows up in its grid.
    let timetable = fs::read_to_string(d.join("run/timetable.csv")).unwrap();
    let g01 = fs::read_to_string(d.join("rep/groups/G01.csv")).unwrap();
    let filled = g01.lines().skip(1).flat_map(|l| l.split(',').skip(1)).filter(|c| !c.is_empty()).count();
    let enrolled: Vec<&str> =
        timetable.lines().filter(|l| l.starts_with("enroll,G01,")).map(|l| l.rsplit(',').nth(1).unwrap()).collect();
    let meetings = timetable
        .lines()
        .filter(|l| l.starts_with("meeting,") && enrolled.contains(&l.split(',').nth(1).unwrap()))
        .count();
    assert_eq!(filled, meetings);
}

#[test]
fn check_data_reports_capacity_shortfall() {
    let out = tt(&sample_dir(), &["check-data"]);
    assert_eq!(code(&out), 1);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[capacity_shortfall] PHYS1"), "{text}");
}

#[test]
fn subgroup_stops_on_shortfall() {
    let dir = tempfile::tempdir().unwrap();
    let s = sample_dir();
    let arg = |f: &str| s.join(f).display().to_string();
    let (g, sec, r, a) = (arg("groups.csv"), arg("sections.csv"), arg("rooms.csv"), arg("availability.csv"));
    let out = tt(
        dir.path(),
        &["subgroup", "--groups", &g, "--sections", &sec, "--rooms", &r, "--availability", &a, "--out", "sg"],
    );
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("90 students need CALC1"));
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&tt(dir.path(), &["frobnicate"])), 64);
    assert_eq!(code(&tt(dir.path(), &["solve", "--mode", "sideways"])), 64);
    ok(dir.path(), &["gen", "--preset", "tiny", "--out", "."]);
    assert_eq!(code(&tt(dir.path(), &["solve", "--solver", "external"])), 64);
    assert_eq!(code(&tt(dir.path(), &["--help"])), 0);
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = tt(dir.path(), &["check-data"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("groups.csv"));
}

#[test]
fn external_solver_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    pipeline(d, "toy", "4");
    let canned = d.join("run/solution.sol").display().to_string();
    let out = ok(
        d,
        &[
            "solve",
            "--groups",
            "sg/groups.csv",
            "--solver",
            "external",
            "--cmd",
            &format!("cp {canned} {{sol}}"),
            "--out",
            "ext",
        ],
    );
    assert!(out.contains("status optimal"), "{out}");
    assert_eq!(
        fs::read_to_string(d.join("ext/timetable.csv")).unwrap(),
        fs::read_to_string(d.join("run/timetable.csv")).unwrap()
    );
}

#[test]
fn validate_catches_a_dropped_meeting() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    pipeline(d, "toy", "5");
    let text = fs::read_to_string(d.join("run/timetable.csv")).unwrap();
    let mut dropped = false;
    let broken: String = text
        .lines()
        .filter(|l| {
            let skip = !dropped && l.starts_with("meeting,");
            dropped |= skip;
            !skip
        })
        .map(|l| format!("{l}\n"))
        .collect();
    fs::create_dir_all(d.join("bad")).unwrap();
    fs::write(d.join("bad/timetable.csv"), broken).unwrap();
    let out = tt(d, &["validate", "--groups", "sg/groups.csv", "--solution", "bad/timetable.csv"]);
    assert_eq!(code(&out), 1);
    let violations = fs::read_to_string(d.join("bad/violations.csv")).unwrap();
    assert!(violations.lines().any(|l| l.starts_with("H1,")), "{violations}");
}

#[test]
fn infeasible_program_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("rooms.csv"), "room_id,capacity,room_type\nR1,10,CLASSROOM\n").unwrap();
    // Two sections mandated into the only room at the same slot.
    fs::write(
        d.join("sections.csv"),
        "section_id,prof,course,periods,lab,capacity,room_type,mandates\n\
         S1,P1,A,1,N,10,CLASSROOM,M:1\n\
         S2,P2,B,1,N,10,CLASSROOM,M:1\n",
    )
    .unwrap();
    fs::write(d.join("groups.csv"), "group_id,size,course_1\nG1,5,A\n").unwrap();
    fs::write(d.join("availability.csv"), "prof,day,p1,p2,p3,p4,p5,p6,p7\n").unwrap();
    let out = tt(d, &["solve", "--out", "run"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn node_limit_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--preset", "toy", "--seed", "6", "--out", "."]);
    let out = tt(d, &["solve", "--max-nodes", "1", "--out", "run"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    pipeline(a.path(), "toy", "7");
    pipeline(b.path(), "toy", "7");
    for f in [
        "sections.csv",
        "sg/groups.csv",
        "sg/subgroup_log.csv",
        "run/model.lp",
        "run/solution.sol",
        "run/timetable.csv",
    ] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }
}

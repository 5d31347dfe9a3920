use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use epibif::odesim::{terminal_recurrence, DetectionTolerances, StepStats};
use epibif::report::{parse_diagram, parse_trajectory};
use epibif::scan::BifurcationKind;
use epibif::{ModelId, Trajectory};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_epibif"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const INHOST_CASE8: &str = r#"
model = "INHOST_CONVEX"
[params]
a = 0.03
b = 0.07
c = 0.823
d = 0.057
"#;

#[test]
fn reproduce_table_two_passes_all_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["reproduce", "--table", "T2"], &configs().join("reproduce.toml"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lines: Vec<String> = stdout(&o).lines().filter(|l| l.starts_with("T2 case")).map(String::from).collect();
    assert_eq!(lines.len(), 8);
    assert!(lines.iter().all(|l| l.contains(": pass")), "{lines:?}");
    let report = std::fs::read_to_string(dir.path().join("T2_report.csv")).unwrap();
    assert!(report.lines().skip(1).all(|l| l.contains(",true,")));
}

#[test]
fn reproduce_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = configs().join("reproduce.toml");
    assert!(run(&["reproduce"], &cfg, a.path()).status.success());
    assert!(run(&["reproduce"], &cfg, b.path()).status.success());
    for name in ["T1_report.csv", "T2_report.csv", "T4_report.csv", "autoimmune_report.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn altered_golden_value_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let golden = include_str!("../../core/data/golden_tables.toml")
        .replace("turning = [-0.1140, 0.5380]", "turning = [-0.1240, 0.5380]");
    let g = write(dir.path(), "golden.toml", &golden);
    let cfg = write(
        dir.path(),
        "r.toml",
        &format!("command = \"reproduce\"\n[options]\ngolden = {:?}\n", g.display().to_string()),
    );
    let o = run(&["reproduce", "--table", "T2", "--case", "3"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stdout(&o).contains("T2 case 3: FAIL"));
    assert!(stdout(&o).contains("turning"));
}

#[test]
fn negative_parameter_exits_two_naming_key() {
    let dir = tempfile::tempdir().unwrap();
    // A < 0 makes B exceed A + B
    let cfg = write(dir.path(), "c.toml", &INHOST_CASE8.replace("a = 0.03", "a = -0.03"));
    let o = run(&["equilibria"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`a`"), "{}", stderr(&o));
    assert!(!dir.path().join("equilibria.csv").exists());
}

#[test]
fn unknown_keys_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for (text, key) in [
        (format!("{INHOST_CASE8}e = 1.0\n"), "`e`"),
        (format!("colour = 1\n{INHOST_CASE8}"), "colour"),
        (format!("{INHOST_CASE8}[options]\nrnage = [0.05, 0.1]\n"), "rnage"),
    ] {
        let cfg = write(dir.path(), "c.toml", &text);
        let o = run(&["equilibria"], &cfg, dir.path());
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(stderr(&o).contains(key), "{}", stderr(&o));
    }
}

#[test]
fn step_budget_exhaustion_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        &format!("{INHOST_CASE8}[options]\nic = [10.0, 0.1]\nmax_steps = 10\n"),
    );
    let o = run(&["simulate"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("t = "), "{}", stderr(&o));
}

#[test]
fn case_eight_diagram_has_no_hopf_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        &format!("{INHOST_CASE8}[options]\nrange = [0.03, 0.2]\nsamples = 300\n"),
    );
    let o = run(&["diagram"], &cfg, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = parse_diagram(&std::fs::read_to_string(dir.path().join("diagram.csv")).unwrap()).unwrap();
    assert!(rows.iter().any(|r| r.kind == Some(BifurcationKind::Transcritical)));
    assert!(rows.iter().all(|r| r.kind != Some(BifurcationKind::Hopf)));
}

fn trajectory_from_csv(path: &Path, model: ModelId) -> Trajectory {
    let (times, states) = parse_trajectory(&std::fs::read_to_string(path).unwrap()).unwrap();
    Trajectory { model, param_value: 0.0, times, states, stats: StepStats::default() }
}

#[test]
fn case_two_simulation_is_recurrent() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate"], &configs().join("inhost_case2_simulate.toml"), dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("verdict: recurrent"), "{}", stdout(&o));
    let tr = trajectory_from_csv(&dir.path().join("trajectory.csv"), ModelId::InhostConvex);
    let (episodes, quiet) = terminal_recurrence(&tr, &DetectionTolerances::default());
    assert!(episodes >= 3 && quiet >= 0.5, "{episodes} {quiet}");
}

#[test]
fn autoimmune_run_past_hopf_recurs_in_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate"], &configs().join("autoimmune_3d_simulate.toml"), dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let tr = trajectory_from_csv(&dir.path().join("trajectory.csv"), ModelId::Autoimmune3d);
    assert_eq!(tr.states[0].as_slice(), &[5.67, 44000.0, 44000.0]);
    let (episodes, _) = terminal_recurrence(&tr, &DetectionTolerances::default());
    assert!(episodes >= 3, "{episodes}");
}

#[test]
fn downsampled_trajectory_keeps_ends() {
    let dir = tempfile::tempdir().unwrap();
    let base = format!("{INHOST_CASE8}[options]\nic = [10.0, 0.1]\nt_end = 10.0\nsample_interval = 0.1\nextend_horizon = false\n");
    let full = write(dir.path(), "full.toml", &base);
    let thin = write(dir.path(), "thin.toml", &format!("{base}downsample = 7\n"));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run(&["simulate"], &full, &a).status.success());
    assert!(run(&["simulate"], &thin, &b).status.success());
    let (ta, sa) = parse_trajectory(&std::fs::read_to_string(a.join("trajectory.csv")).unwrap()).unwrap();
    let (tb, sb) = parse_trajectory(&std::fs::read_to_string(b.join("trajectory.csv")).unwrap()).unwrap();
    assert_eq!(ta.len(), 101);
    assert_eq!(tb.len(), 16);
    assert_eq!((ta[0], ta[100]), (tb[0], tb[15]));
    assert_eq!((&sa[0], &sa[100]), (&sb[0], &sb[15]));
}

#[test]
fn classify_reports_bistability() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["classify"], &configs().join("inhost_case1_classify.toml"), dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("bistable: yes"));
    let csv = std::fs::read_to_string(dir.path().join("classify.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn sample_configs_all_run() {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let command = text
            .lines()
            .find_map(|l| l.strip_prefix("command = "))
            .map(|c| c.trim_matches('"').to_string())
            .expect("sample configs name their command");
        let o = run(&[&command], &path, dir.path());
        assert_eq!(o.status.code(), Some(0), "{}: {}", path.display(), stderr(&o));
    }
}

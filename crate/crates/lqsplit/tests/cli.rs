use std::path::Path;
use std::process::Command;

fn lqsplit(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lqsplit"))
        .args(args)
        .output()
        .expect("spawn lqsplit")
}

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.toml");
    std::fs::write(
        &problem,
        "kind = \"pollution\"\npreset = \"fig3b\"\nx0 = 5.0\n",
    )
    .unwrap();
    let out = dir.path().join("t.csv");
    let o = lqsplit(&[
        "solve",
        "--problem",
        problem.to_str().unwrap(),
        "--method",
        "sp4",
        "--steps",
        "16",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,x1,p1_11,u1_1");
    assert_eq!(text.lines().count(), 18);
    assert!(stdout(&o).contains("evaluations   97"));
}

#[test]
fn solve_lq_file_with_dopri() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("lq.toml");
    std::fs::write(
        &problem,
        "kind = \"lq\"\na = [[0.0, 1.0], [-1.0, 0.0]]\nb = [[0.0], [1.0]]\nq = [[1.0, 0.0], [0.0, 1.0]]\n\
         r = [[1.0]]\nq_terminal = [[0.0, 0.0], [0.0, 0.0]]\nx0 = [1.0, 0.0]\nt_final = 2.0\n",
    )
    .unwrap();
    let o = lqsplit(&[
        "solve",
        "--problem",
        problem.to_str().unwrap(),
        "--method",
        "dopri",
        "--tol-exponent",
        "8",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("method        dopri"));
}

#[test]
fn game_variants() {
    let o = lqsplit(&[
        "game",
        "--preset",
        "fig2",
        "--method",
        "ni84",
        "--steps",
        "8",
        "--players",
        "3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("P3(t0)"));
    assert!(!stdout(&o).contains("P4(t0)"));
    let o = lqsplit(&[
        "game",
        "--preset",
        "fig1",
        "--method",
        "s2c4",
        "--steps",
        "8",
        "--zero-sum",
        "--cross-weight",
        "50",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("method        zero-sum"));
    let o = lqsplit(&["game", "--preset", "fig1", "--method", "sp4", "--zero-sum"]);
    assert!(!o.status.success());
    let o = lqsplit(&["game", "--preset", "fig7", "--method", "sp4"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown preset"));
}

#[test]
fn bad_problem_file_names_the_path() {
    let o = lqsplit(&[
        "solve",
        "--problem",
        "/nonexistent/p.toml",
        "--method",
        "sp2",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/p.toml"));
}

fn sweep(out: &Path) -> std::process::Output {
    lqsplit(&[
        "sweep",
        "--preset",
        "fig3b",
        "--methods",
        "sp2,rk4,dopri",
        "--h-ladder",
        "1/4,1/8",
        "--tol-exponents",
        "5,7",
        "--output",
        out.to_str().unwrap(),
    ])
}

#[test]
fn sweep_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(sweep(&a).status.success());
    assert!(sweep(&b).status.success());
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("method,resolution,evaluations,seconds,x_error,gain_defect,positivity_flag,symmetry_defect\n"));
}

use std::path::PathBuf;
use std::process::{Command, Output};

const SIGMA: &str = "[x1*x2 : x0*x2 : x0*x1]";
const F23: &str = "[(2*x0 + x1)*x2 : 3*x1*(x0 + x2) : x2*(x0 + x2)]";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cremona")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cremona-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn classify_sigma_lists_points() {
    let o = run(&["classify", SIGMA]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("stratum=Sigma3\n"));
    assert_eq!(s.lines().filter(|l| l.starts_with("ind ")).count(), 3);
    assert_eq!(s.lines().filter(|l| l.starts_with("fixed ")).count(), 4);
}

#[test]
fn degrees_of_f23() {
    let o = run(&["degrees", "--horizon", "7", F23]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "2 2 3 3 4 4 5\n");
}

#[test]
fn cubic_configuration() {
    let o = run(&["cubic", "[x0^3:x1^2*x2:x0*x1*x2]"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("config={3}\n"));
}

#[test]
fn record_format_has_schema_and_is_stable() {
    let args = ["guillot", "--format", "record", "--seed", "7", SIGMA];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let s = stdout(&a);
    assert!(s.starts_with("schema=cremona-record/1\n\nkind=guillot\n"));
    assert!(s.contains("holds=true\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["classify", "[x0 : x1 : x0+1]"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["render", SIGMA]).status.code(), Some(1));
    // sigma has fixed points, so a negative tolerance cannot be met
    assert_eq!(run(&["guillot", "--tolerance=-1", SIGMA]).status.code(), Some(2));
    assert_eq!(run(&["invert", "[x0^2 : x1^2 : x2^2]"]).status.code(), Some(1));
}

#[test]
fn report_written_to_file() {
    let p = scratch("bb.txt");
    let o = run(&["bb", "--out", p.to_str().unwrap(), SIGMA]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let s = std::fs::read_to_string(&p).unwrap();
    assert!(s.contains("holds=true"));
}

#[test]
fn flow_catalog_from_data_dir() {
    let dir = scratch("data");
    std::fs::create_dir_all(&dir).unwrap();
    let entry = "ENTRY lin\nCHI x0, 0\nFLOW x0*u, x1\nLAMBDA 1\nSYM 0, 1\nIP log(x1)\nPROFILE Sigma0\n";
    std::fs::write(dir.join("flows.txt"), entry).unwrap();
    let o = run(&["flow-verify", "--data", dir.to_str().unwrap()]);
    assert!(stdout(&o).contains("1/1 entries verified"));
    assert_eq!(o.status.code(), Some(0));
    let wrong = entry.replace("LAMBDA 1", "LAMBDA 2");
    std::fs::write(dir.join("flows.txt"), wrong).unwrap();
    assert_eq!(run(&["flow-verify", "--data", dir.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn render_writes_pixmap() {
    let p = scratch("h.ppm");
    let o = run(&["render", "--width", "64", "--height", "48", "--out", p.to_str().unwrap(), "[x1*x2 : x1^2 - x0*x2/2 - x2^2 : x2^2]"]);
    assert_eq!(o.status.code(), Some(0));
    let bytes = std::fs::read(&p).unwrap();
    let header = b"P6\n64 48\n255\n";
    assert!(bytes.starts_with(header));
    assert_eq!(bytes.len(), header.len() + 64 * 48 * 3);
}

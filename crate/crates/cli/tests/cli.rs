use std::path::Path;
use std::process::{Command, Output};

use kvqe::hamiltonian::{write_pfcidump, SshHubbard};
use kvqe::k2g::write_supercell_dump;

fn kvqe(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kvqe"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("KVQE_THREADS", t),
        None => cmd.env_remove("KVQE_THREADS"),
    };
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn fci_on_dimer_reports_exact_energy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "dimer.ini",
        "[input]\nmodel = dimer\nt = 1.0\nu = 4.0\n[method]\nmethod = fci\n[output]\nreport = dimer.txt\ncsv = dimer.csv\n",
    );
    let out = kvqe(&["run", &cfg], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("dimer.txt")).unwrap();
    assert!(report.contains("-0.8284271247"), "{report}");
    assert!(report.starts_with("# resolved configuration\n[input]\nmodel = dimer"));
    let csv = std::fs::read_to_string(dir.path().join("dimer.csv")).unwrap();
    assert_eq!(csv, "R,method,energy_hartree,error_kcalmol\n0,fci,-0.82842712,0.000000\n");
}

#[test]
fn adapt_preset_reports_operator_count_and_residual() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ssh.ini",
        "[input]\nmodel = ssh\nncell = 2\nt1 = 1\nt2 = 0.6\nu = 4\n[method]\nmethod = adapt\npreset = ADAPT(3)\n[output]\nreport = ssh.txt\ncsv = ssh.csv\n",
    );
    let out = kvqe(&["run", &cfg], None);
    assert_eq!(out.status.code(), Some(0));
    let report = std::fs::read_to_string(dir.path().join("ssh.txt")).unwrap();
    assert!(report.contains("operators = "));
    let norm: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("final residual norm = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(norm < 1e-3);
    assert!(report.contains("ACSE MARE imaginary part"));
}

#[test]
fn validate_lists_findings() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.ini", "[input]\nmodel = dimer\n[method]\nmethod = adapt\nepsilon = 1e-3\n");
    let out = kvqe(&["validate", &good], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "");

    let missing = write(dir.path(), "missing.ini", "[input]\npfcidump = nowhere.pfcidump\n[method]\nmethod = fci\n");
    let out = kvqe(&["validate", &missing], None);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(lines.len(), 1, "{lines:?}");
    assert!(lines[0].contains("not found"));

    let bad = write(dir.path(), "bad.ini", "[input]\nmodel = dimer\n[method]\nmethod = adapt\nepsilon = 0\n");
    let out = kvqe(&["validate", &bad], None);
    let lines: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(lines.len(), 1, "{lines:?}");
    assert!(lines[0].contains("accepted range"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.ini", "[input]\nmodel = dimer\n[method]\nmethod = nonsense\n");
    assert_eq!(kvqe(&["run", &bad], None).status.code(), Some(1));

    let numerical = write(
        dir.path(),
        "num.ini",
        "[input]\nmodel = dimer\n[method]\nmethod = qse\nqse_threshold = 1e6\n",
    );
    assert_eq!(kvqe(&["run", &numerical], None).status.code(), Some(2));

    let flagged = write(
        dir.path(),
        "flag.ini",
        "[input]\nmodel = ssh\n[method]\nmethod = uccgsd\nmax_evaluations = 2\n",
    );
    let out = kvqe(&["run", &flagged], None);
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    assert!(csv.starts_with("R,method,energy_hartree,error_kcalmol,status\n"), "{csv}");
    assert!(csv.contains("not-converged"));
}

#[test]
fn scan_csv_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "scan.ini",
        "[input]\nmodel = ssh\nncell = 2\n[method]\npreset = ADAPT(3)\n[scan]\nmethods = hf, adapt, k2g-adapt, qse, fci\nparameter = t2\nvalues = 0.2, 0.6, 0.8\n",
    );
    let runs: Vec<Output> = [Some("1"), Some("1"), Some("3"), None]
        .iter()
        .map(|t| kvqe(&["scan", &cfg], *t))
        .collect();
    for r in &runs {
        assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
        assert_eq!(r.stdout, runs[0].stdout);
    }
    let csv = stdout(&runs[0]);
    assert_eq!(csv.lines().count(), 1 + 3 * 5);
    for line in csv.lines().filter(|l| l.contains(",k2g-adapt,")) {
        let err: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(err.abs() <= 627.5094740631 * 1e-6, "{line}");
    }
}

#[test]
fn k2g_and_fci_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let model = SshHubbard::new(2, 1.0, 0.6, 4.0);
    let ints = dir.path().join("band.pfcidump");
    let dump = dir.path().join("band.scell");
    let out = dir.path().join("gamma.pfcidump");
    write_pfcidump(&model.band_integrals(), &ints).unwrap();
    write_supercell_dump(&model.band_orbitals(), &dump).unwrap();
    let paths = [ints.to_str().unwrap(), dump.to_str().unwrap(), out.to_str().unwrap()];
    let res = kvqe(&["k2g", paths[0], paths[1], paths[2]], None);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));

    let band = stdout(&kvqe(&["fci", paths[0], "--states", "2"], None));
    let gamma = stdout(&kvqe(&["fci", paths[2], "--states", "2"], None));
    assert!(band.contains("E[0] = -1.7440843353"), "{band}");
    assert_eq!(band, gamma);
}

#[test]
fn file_input_with_supercell_runs_k2g_adapt() {
    let dir = tempfile::tempdir().unwrap();
    let model = SshHubbard::new(2, 1.0, 0.6, 4.0);
    write_pfcidump(&model.band_integrals(), dir.path().join("band.pfcidump")).unwrap();
    write_supercell_dump(&model.band_orbitals(), dir.path().join("band.scell")).unwrap();
    let cfg = write(
        dir.path(),
        "k2g.ini",
        "[input]\npfcidump = band.pfcidump\nsupercell = band.scell\nr = 1.0\n[method]\nmethod = k2g-adapt\npreset = ADAPT(3)\n",
    );
    let out = kvqe(&["run", &cfg], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = stdout(&out);
    let err: f64 = csv.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!(err.abs() < 1e-3, "{csv}");
}

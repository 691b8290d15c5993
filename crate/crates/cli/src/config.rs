//! Experiment configuration: flat `key = value` entries under `[input]`,
//! `[method]`, `[output]`, `[run]` and `[scan]`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ini::{Ini, Properties};
use kvqe::experiment::{Method, MethodParams, ScanPoint, Source};
use kvqe::hamiltonian::{OrbitalBasis, SshHubbard};
use kvqe::ops::PoolKind;
use kvqe::qse::QseTruncation;
use kvqe::state::EvolutionPlan;
use kvqe::vqe::preset_epsilon;

const INPUT_KEYS: &[&str] = &[
    "model", "ncell", "t", "t1", "t2", "u", "basis", "pfcidump", "supercell", "r",
];
const METHOD_KEYS: &[&str] = &[
    "method",
    "preset",
    "epsilon",
    "batch",
    "pool",
    "trotter",
    "qse_truncation",
    "qse_threshold",
    "n_states",
    "max_iterations",
    "readmit",
    "grad_tol",
    "max_evaluations",
];
const OUTPUT_KEYS: &[&str] = &["csv", "report"];
const RUN_KEYS: &[&str] = &["threads"];
const SCAN_KEYS: &[&str] = &["methods", "parameter", "values", "files", "supercells", "r"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Ssh,
    Dimer,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    Model {
        kind: ModelKind,
        ncell: usize,
        t1: f64,
        t2: f64,
        u: f64,
        basis: OrbitalBasis,
    },
    File {
        pfcidump: PathBuf,
        supercell: Option<PathBuf>,
    },
}

impl InputSpec {
    pub fn source(&self) -> Source {
        match self {
            InputSpec::Model {
                ncell,
                t1,
                t2,
                u,
                basis,
                ..
            } => Source::Ssh {
                model: SshHubbard::new(*ncell, *t1, *t2, *u),
                basis: *basis,
            },
            InputSpec::File {
                pfcidump,
                supercell,
            } => Source::File {
                pfcidump: pfcidump.clone(),
                supercell: supercell.clone(),
            },
        }
    }

    fn with_parameter(&self, name: &str, value: f64) -> Option<InputSpec> {
        let mut out = self.clone();
        let InputSpec::Model { kind, t1, t2, u, .. } = &mut out else {
            return None;
        };
        match (name, *kind) {
            ("t", ModelKind::Dimer) | ("t1", ModelKind::Ssh) => *t1 = value,
            ("t2", ModelKind::Ssh) => *t2 = value,
            ("u", _) => *u = value,
            _ => return None,
        }
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSettings {
    pub methods: Vec<Method>,
    pub points: Vec<(f64, InputSpec)>,
    /// The raw `[scan]` entries, for the report.
    pub resolved: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub input: InputSpec,
    pub r: f64,
    pub method: Method,
    pub preset: Option<String>,
    pub params: MethodParams,
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub threads: Option<usize>,
    pub scan: Option<ScanSettings>,
}

impl ExperimentConfig {
    pub fn source(&self) -> Source {
        self.input.source()
    }

    pub fn scan_points(&self) -> Vec<ScanPoint> {
        match &self.scan {
            Some(s) => s
                .points
                .iter()
                .map(|(r, input)| ScanPoint {
                    r: *r,
                    source: input.source(),
                })
                .collect(),
            None => vec![ScanPoint {
                r: self.r,
                source: self.source(),
            }],
        }
    }

    /// Every setting, defaults included, as config text.
    pub fn resolved(&self) -> String {
        let mut s = String::from("[input]\n");
        match &self.input {
            InputSpec::Model {
                kind,
                ncell,
                t1,
                t2,
                u,
                basis,
            } => match kind {
                ModelKind::Dimer => {
                    let _ = writeln!(s, "model = dimer\nt = {t1}\nu = {u}");
                }
                ModelKind::Ssh => {
                    let b = match basis {
                        OrbitalBasis::Band => "band",
                        OrbitalBasis::Site => "site",
                    };
                    let _ = writeln!(
                        s,
                        "model = ssh\nncell = {ncell}\nt1 = {t1}\nt2 = {t2}\nu = {u}\nbasis = {b}"
                    );
                }
            },
            InputSpec::File {
                pfcidump,
                supercell,
            } => {
                let _ = writeln!(s, "pfcidump = {}", pfcidump.display());
                if let Some(sc) = supercell {
                    let _ = writeln!(s, "supercell = {}", sc.display());
                }
            }
        }
        let p = &self.params;
        let _ = writeln!(s, "r = {}", self.r);
        let _ = writeln!(s, "\n[method]\nmethod = {}", self.method);
        if let Some(name) = &self.preset {
            let _ = writeln!(s, "preset = {name}");
        }
        let trotter = match p.plan.mode {
            kvqe::state::EvolutionMode::Exact => "exact".to_string(),
            kvqe::state::EvolutionMode::Trotter(k) => k.to_string(),
        };
        let truncation = match p.qse_truncation {
            QseTruncation::SD => "sd",
            QseTruncation::FullSD => "full-sd",
            QseTruncation::SectorComplete => "sector",
        };
        let _ = writeln!(
            s,
            "epsilon = {:e}\nbatch = {}\npool = {}\ntrotter = {trotter}\nqse_truncation = {truncation}\n\
             qse_threshold = {:e}\nn_states = {}\nmax_iterations = {}\nreadmit = {}\n\
             grad_tol = {:e}\nmax_evaluations = {}",
            p.adapt.epsilon,
            p.adapt.batch,
            p.pool,
            p.qse_threshold,
            p.n_states,
            p.adapt.max_iterations,
            p.adapt.readmit,
            p.optimizer.grad_tol,
            p.optimizer.max_evaluations
        );
        s.push_str("\n[output]\n");
        if let Some(c) = &self.csv {
            let _ = writeln!(s, "csv = {}", c.display());
        }
        if let Some(r) = &self.report {
            let _ = writeln!(s, "report = {}", r.display());
        }
        let threads = self.threads.map_or("auto".to_string(), |t| t.to_string());
        let _ = writeln!(s, "\n[run]\nthreads = {threads}");
        if let Some(sc) = &self.scan {
            s.push_str("\n[scan]\n");
            for (k, v) in &sc.resolved {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }
}

/// Accumulates every problem found instead of stopping at the first.
struct Reader<'a> {
    findings: Vec<String>,
    base: &'a Path,
}

impl Reader<'_> {
    fn find(&mut self, msg: String) {
        self.findings.push(msg);
    }

    fn check_keys(&mut self, ini: &Ini) {
        for (name, props) in ini.iter() {
            let allowed = match name {
                Some("input") => INPUT_KEYS,
                Some("method") => METHOD_KEYS,
                Some("output") => OUTPUT_KEYS,
                Some("run") => RUN_KEYS,
                Some("scan") => SCAN_KEYS,
                None if props.is_empty() => continue,
                None => {
                    self.find("entries before the first [section] header".into());
                    continue;
                }
                Some(other) => {
                    self.find(format!("unknown section [{other}]"));
                    continue;
                }
            };
            for (k, _) in props.iter() {
                if !allowed.contains(&k) {
                    self.find(format!("[{}] unknown key '{k}'", name.unwrap_or("")));
                }
            }
        }
    }

    fn parse<T: std::str::FromStr>(&mut self, props: Option<&Properties>, section: &str, key: &str, what: &str) -> Option<T> {
        let raw = props?.get(key)?;
        match raw.trim().parse() {
            Ok(v) => Some(v),
            Err(_) => {
                self.find(format!("[{section}] {key} = '{raw}' is not {what}"));
                None
            }
        }
    }

    fn float(&mut self, props: Option<&Properties>, section: &str, key: &str) -> Option<f64> {
        let v: f64 = self.parse(props, section, key, "a number")?;
        if v.is_finite() {
            Some(v)
        } else {
            self.find(format!("[{section}] {key} must be finite"));
            None
        }
    }

    fn count(&mut self, props: Option<&Properties>, section: &str, key: &str, min: usize) -> Option<usize> {
        let v: usize = self.parse(props, section, key, "a nonnegative integer")?;
        if v < min {
            self.find(format!("[{section}] {key} must be at least {min}, got {v}"));
            None
        } else {
            Some(v)
        }
    }

    fn path(&self, raw: &str) -> PathBuf {
        let p = PathBuf::from(raw.trim());
        if p.is_absolute() {
            p
        } else {
            self.base.join(p)
        }
    }

    fn existing_file(&mut self, section: &str, key: &str, raw: &str) -> PathBuf {
        let p = self.path(raw);
        if !p.is_file() {
            self.find(format!("[{section}] {key}: file not found: {}", p.display()));
        }
        p
    }

    fn input(&mut self, props: Option<&Properties>) -> Option<InputSpec> {
        let get = |k: &str| props.and_then(|p| p.get(k)).map(str::to_string);
        let model = get("model");
        let file = get("pfcidump");
        match (model, file) {
            (Some(_), Some(_)) => {
                self.find("[input] give exactly one of 'model' and 'pfcidump', not both".into());
                None
            }
            (None, None) => {
                self.find("[input] missing input: set 'model' or 'pfcidump'".into());
                None
            }
            (None, Some(f)) => {
                let pfcidump = self.existing_file("input", "pfcidump", &f);
                let supercell = get("supercell").map(|s| self.existing_file("input", "supercell", &s));
                Some(InputSpec::File {
                    pfcidump,
                    supercell,
                })
            }
            (Some(m), None) => {
                let kind = match m.trim().to_ascii_lowercase().as_str() {
                    "ssh" | "ssh-hubbard" => ModelKind::Ssh,
                    "dimer" | "hubbard-dimer" => ModelKind::Dimer,
                    other => {
                        self.find(format!("[input] unknown model '{other}' (expected ssh or dimer)"));
                        return None;
                    }
                };
                let u = self.float(props, "input", "u").unwrap_or(4.0);
                match kind {
                    ModelKind::Dimer => {
                        let t = self.float(props, "input", "t").unwrap_or(1.0);
                        Some(InputSpec::Model {
                            kind,
                            ncell: 1,
                            t1: t,
                            t2: 0.0,
                            u,
                            basis: OrbitalBasis::Band,
                        })
                    }
                    ModelKind::Ssh => {
                        let ncell = self.count(props, "input", "ncell", 1).unwrap_or(2);
                        if ncell > 4 {
                            self.find(format!(
                                "[input] ncell = {ncell} exceeds the statevector limit of 4 cells (16 qubits)"
                            ));
                        }
                        let t1 = self.float(props, "input", "t1").unwrap_or(1.0);
                        let t2 = self.float(props, "input", "t2").unwrap_or(0.6);
                        let basis = match get("basis").as_deref().map(str::trim) {
                            None | Some("band") => OrbitalBasis::Band,
                            Some("site") => OrbitalBasis::Site,
                            Some(other) => {
                                self.find(format!("[input] unknown basis '{other}' (expected band or site)"));
                                OrbitalBasis::Band
                            }
                        };
                        Some(InputSpec::Model {
                            kind,
                            ncell,
                            t1,
                            t2,
                            u,
                            basis,
                        })
                    }
                }
            }
        }
    }

    /// `required` is false for scans, whose methods are listed under `[scan]`.
    fn method(&mut self, props: Option<&Properties>, required: bool) -> (Method, Option<String>, MethodParams) {
        let mut p = MethodParams::default();
        let method = match props.and_then(|p| p.get("method")) {
            None => {
                if required {
                    self.find("[method] missing 'method'".into());
                }
                Method::Fci
            }
            Some(m) => m.parse().unwrap_or_else(|e: kvqe::Error| {
                self.find(format!("[method] {e}"));
                Method::Fci
            }),
        };
        let preset = props.and_then(|p| p.get("preset")).map(|s| s.trim().to_string());
        let explicit = props.and_then(|p| p.get("epsilon")).is_some();
        if preset.is_some() && explicit {
            self.find("[method] give at most one of 'preset' and 'epsilon'".into());
        }
        if let Some(name) = &preset {
            match preset_epsilon(name) {
                Ok(e) => p.adapt.epsilon = e,
                Err(_) => self.find(format!(
                    "[method] unknown preset '{name}' (expected ADAPT(m) for an integer m, or ADAPT(X))"
                )),
            }
        }
        if let Some(e) = self.float(props, "method", "epsilon") {
            if e > 0.0 {
                p.adapt.epsilon = e;
            } else {
                self.find(format!("[method] epsilon = {e} is out of range; accepted range is epsilon > 0"));
            }
        }
        if let Some(b) = self.count(props, "method", "batch", 1) {
            p.adapt.batch = b;
        }
        if let Some(n) = self.count(props, "method", "max_iterations", 0) {
            p.adapt.max_iterations = n;
        }
        if let Some(r) = self.parse(props, "method", "readmit", "true or false") {
            p.adapt.readmit = r;
        }
        if let Some(kind) = self.parse::<PoolKind>(props, "method", "pool", "sd or gsd") {
            p.pool = kind;
        }
        if let Some(raw) = props.and_then(|p| p.get("trotter")) {
            let raw = raw.trim();
            if raw != "exact" {
                match raw.parse::<usize>().ok().and_then(|k| EvolutionPlan::trotter(k).ok()) {
                    Some(plan) => p.plan = plan,
                    None => self.find(format!(
                        "[method] trotter = '{raw}' must be 'exact' or a positive step count"
                    )),
                }
            }
        }
        if let Some(t) = self.parse::<QseTruncation>(props, "method", "qse_truncation", "sd, full-sd or sector") {
            p.qse_truncation = t;
        }
        if let Some(t) = self.float(props, "method", "qse_threshold") {
            if t > 0.0 {
                p.qse_threshold = t;
            } else {
                self.find(format!("[method] qse_threshold = {t} must be positive"));
            }
        }
        if let Some(n) = self.count(props, "method", "n_states", 1) {
            p.n_states = n;
        }
        if let Some(g) = self.float(props, "method", "grad_tol") {
            if g > 0.0 {
                p.optimizer.grad_tol = g;
            } else {
                self.find(format!("[method] grad_tol = {g} must be positive"));
            }
        }
        if let Some(n) = self.count(props, "method", "max_evaluations", 1) {
            p.optimizer.max_evaluations = n;
        }
        let preset = if explicit { None } else { preset };
        (method, preset, p)
    }

    fn scan(&mut self, props: &Properties, input: Option<&InputSpec>) -> Option<ScanSettings> {
        let list = |raw: &str| -> Vec<String> {
            raw.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
        };
        let methods: Vec<Method> = match props.get("methods") {
            None => {
                self.find("[scan] missing 'methods'".into());
                Vec::new()
            }
            Some(raw) => list(raw)
                .iter()
                .filter_map(|m| match m.parse() {
                    Ok(m) => Some(m),
                    Err(e) => {
                        self.find(format!("[scan] {e}"));
                        None
                    }
                })
                .collect(),
        };
        let numbers = |rd: &mut Self, key: &str| -> Option<Vec<f64>> {
            let raw = props.get(key)?;
            let mut out = Vec::new();
            for v in list(raw) {
                match v.parse::<f64>() {
                    Ok(x) if x.is_finite() => out.push(x),
                    _ => rd.find(format!("[scan] {key}: '{v}' is not a number")),
                }
            }
            Some(out)
        };
        let mut points = Vec::new();
        match (props.get("files"), props.get("parameter")) {
            (Some(_), Some(_)) => self.find("[scan] give one of 'files' and 'parameter', not both".into()),
            (None, None) => self.find("[scan] set 'parameter' and 'values', or 'files'".into()),
            (Some(files), None) => {
                let files = list(files);
                let supercells = props.get("supercells").map(list);
                let rs = numbers(self, "r").unwrap_or_else(|| (0..files.len()).map(|i| i as f64).collect());
                if rs.len() != files.len() {
                    self.find(format!("[scan] {} files but {} r values", files.len(), rs.len()));
                }
                if let Some(sc) = &supercells {
                    if sc.len() != files.len() {
                        self.find(format!("[scan] {} files but {} supercells", files.len(), sc.len()));
                    }
                }
                for (i, (f, r)) in files.iter().zip(&rs).enumerate() {
                    let pfcidump = self.existing_file("scan", "files", f);
                    let supercell = supercells
                        .as_ref()
                        .and_then(|sc| sc.get(i))
                        .map(|s| self.existing_file("scan", "supercells", s));
                    points.push((
                        *r,
                        InputSpec::File {
                            pfcidump,
                            supercell,
                        },
                    ));
                }
            }
            (None, Some(param)) => {
                let param = param.trim().to_string();
                let values = numbers(self, "values").unwrap_or_default();
                if values.is_empty() {
                    self.find("[scan] 'parameter' needs a nonempty 'values' list".into());
                }
                if let Some(input) = input {
                    for v in values {
                        match input.with_parameter(&param, v) {
                            Some(spec) => points.push((v, spec)),
                            None => {
                                self.find(format!(
                                    "[scan] parameter '{param}' cannot be varied for this input"
                                ));
                                break;
                            }
                        }
                    }
                }
            }
        }
        let resolved = SCAN_KEYS
            .iter()
            .filter_map(|k| props.get(k).map(|v| (k.to_string(), v.trim().to_string())))
            .collect();
        Some(ScanSettings {
            methods,
            points,
            resolved,
        })
    }
}

/// Parses a config file, returning every finding when it is invalid.
pub fn load(path: &Path) -> Result<ExperimentConfig, Vec<String>> {
    let ini = Ini::load_from_file(path).map_err(|e| vec![format!("{}: {e}", path.display())])?;
    parse(&ini, path.parent().unwrap_or(Path::new(".")))
}

/// Parses config text; relative paths resolve against `base`.
pub fn parse(ini: &Ini, base: &Path) -> Result<ExperimentConfig, Vec<String>> {
    let mut rd = Reader {
        findings: Vec::new(),
        base,
    };
    rd.check_keys(ini);
    let input_props = ini.section(Some("input"));
    let input = rd.input(input_props);
    let r = rd.float(input_props, "input", "r").unwrap_or(0.0);
    let required = ini.section(Some("scan")).is_none();
    let (method, preset, params) = rd.method(ini.section(Some("method")), required);
    let out = ini.section(Some("output"));
    let csv = out.and_then(|o| o.get("csv")).map(|c| rd.path(c));
    let report = out.and_then(|o| o.get("report")).map(|c| rd.path(c));
    let threads = rd.count(ini.section(Some("run")), "run", "threads", 1);
    let scan = ini.section(Some("scan")).and_then(|s| rd.scan(s, input.as_ref()));
    if !rd.findings.is_empty() {
        return Err(rd.findings);
    }
    Ok(ExperimentConfig {
        input: input.expect("no findings implies a parsed input"),
        r,
        method,
        preset,
        params,
        csv,
        report,
        threads,
        scan,
    })
}

/// Every problem with the config and its input files, without running.
pub fn validate(path: &Path) -> Vec<String> {
    let cfg = match load(path) {
        Ok(c) => c,
        Err(f) => return f,
    };
    let mut findings = Vec::new();
    let needs_orbitals = cfg.method == kvqe::experiment::Method::K2gAdapt
        || cfg.scan.as_ref().is_some_and(|s| s.methods.contains(&Method::K2gAdapt));
    for pt in cfg.scan_points() {
        let ints = match pt.source.integrals() {
            Ok(i) => i,
            Err(e) => {
                findings.push(format!("input at r = {}: {e}", pt.r));
                continue;
            }
        };
        if ints.n_qubits() > 16 {
            findings.push(format!(
                "input at r = {}: {} qubits exceeds the 16-qubit statevector limit",
                pt.r,
                ints.n_qubits()
            ));
        }
        if needs_orbitals {
            match pt.source.orbitals() {
                Ok(Some(o)) if o.n_orbitals() != ints.norb => findings.push(format!(
                    "input at r = {}: supercell dump has {} orbitals, integrals have {}",
                    pt.r,
                    o.n_orbitals(),
                    ints.norb
                )),
                Ok(Some(_)) => {}
                Ok(None) => findings.push(format!(
                    "input at r = {}: k2g-adapt needs a band model or a supercell dump",
                    pt.r
                )),
                Err(e) => findings.push(format!("input at r = {}: {e}", pt.r)),
            }
        }
    }
    findings
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_text(text: &str) -> Result<ExperimentConfig, Vec<String>> {
        parse(&Ini::load_from_str(text).unwrap(), Path::new("."))
    }

    #[test]
    fn dimer_config() {
        let cfg = parse_text("[input]\nmodel = dimer\n[method]\nmethod = fci\n").unwrap();
        assert_eq!(cfg.method, Method::Fci);
        assert!(cfg.resolved().contains("model = dimer"));
    }

    #[test]
    fn preset_sets_epsilon() {
        let cfg = parse_text("[input]\nmodel = ssh\n[method]\nmethod = adapt\npreset = ADAPT(3)\n").unwrap();
        assert_eq!(cfg.params.adapt.epsilon, 1e-3);
        assert!(cfg.resolved().contains("preset = ADAPT(3)"));
    }

    #[test]
    fn missing_input_is_one_finding() {
        let f = parse_text("[method]\nmethod = fci\n").unwrap_err();
        assert_eq!(f.len(), 1, "{f:?}");
    }

    #[test]
    fn bad_epsilon_names_the_range() {
        let f = parse_text("[input]\nmodel = dimer\n[method]\nmethod = adapt\nepsilon = -1\n").unwrap_err();
        assert_eq!(f.len(), 1);
        assert!(f[0].contains("epsilon > 0"));
    }

    #[test]
    fn all_findings_are_listed() {
        let f = parse_text("[input]\nmodel = ssh\nncell = x\n[method]\nmethod = vqe\nbatch = 0\nfoo = 1\n").unwrap_err();
        assert_eq!(f.len(), 4, "{f:?}");
    }

    #[test]
    fn parameter_scan() {
        let cfg = parse_text(
            "[input]\nmodel = ssh\n[scan]\nmethods = fci, adapt\nparameter = t2\nvalues = 0.2, 0.4\n",
        )
        .unwrap();
        let s = cfg.scan.unwrap();
        assert_eq!(s.points.len(), 2);
        assert_eq!(s.methods, vec![Method::Fci, Method::Adapt]);
    }
}

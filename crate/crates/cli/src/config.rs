//! Flat sectioned key=value configuration: parsing and full validation.
//!
//! Parsing never stops at the first problem; the caller gets the complete
//! list of violations so a config can be fixed in one pass. Unknown
//! sections and keys are rejected.

use std::collections::BTreeMap;

use spde_core::dynamics::{validate_reaction, DiffusionSpec, ReactionSpec};
use spde_core::experiments::ProblemSpec;
use spde_core::noise::{ModeKind, QWienerSpec};
use spde_core::operators::OperatorSpec;
use spde_core::stepper::InitialCondition;
use spde_core::Dim;

/// Which computation a config requests.
#[derive(Debug, Clone, PartialEq)]
pub enum StudyKind {
    /// One trajectory, reporting L² norms over time.
    Single,
    Spatial { ns: Vec<usize>, k: usize, n_ref: usize },
    Temporal { ms: Vec<usize>, k: usize, m_ref: usize },
    Stability { taus: Vec<f64>, k: usize },
}

/// A fully validated configuration file.
#[derive(Debug, Clone)]
pub struct FileConfig {
    pub problem: ProblemSpec,
    pub n_cut: usize,
    pub m_steps: usize,
    pub t_horizon: f64,
    pub study: StudyKind,
    pub csv: Option<String>,
    pub svg: Option<String>,
    pub seed: u64,
}

impl FileConfig {
    /// Canonical echo of every field, used for the CSV metadata header.
    pub fn echo_lines(&self) -> Vec<String> {
        let reaction = self
            .problem
            .reaction
            .coeffs()
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let mut lines = vec![
            format!("problem.dimension = {}", self.problem.operator.dimension),
            format!("problem.diffusivity = {}", self.problem.operator.diffusivity),
            format!("problem.reaction = {reaction}"),
            format!("problem.diffusion = {}", self.problem.diffusion),
            format!("problem.u0 = {}", self.problem.u0),
            format!("noise.decay = {}", self.problem.noise.decay_exponent),
            format!("noise.mode_kind = {}", self.problem.noise.mode_kind),
            format!(
                "noise.modes_per_direction = {}",
                self.problem.noise.modes_per_direction
            ),
            format!("discretization.N = {}", self.n_cut),
            format!("discretization.M = {}", self.m_steps),
            format!("discretization.T = {}", self.t_horizon),
        ];
        match &self.study {
            StudyKind::Single => lines.push("study.kind = single".into()),
            StudyKind::Spatial { ns, k, n_ref } => {
                lines.push("study.kind = spatial".into());
                lines.push(format!("study.axis = {}", join_usize(ns)));
                lines.push(format!("study.K = {k}"));
                lines.push(format!("study.N_ref = {n_ref}"));
            }
            StudyKind::Temporal { ms, k, m_ref } => {
                lines.push("study.kind = temporal".into());
                lines.push(format!("study.axis = {}", join_usize(ms)));
                lines.push(format!("study.K = {k}"));
                lines.push(format!("study.M_ref = {m_ref}"));
            }
            StudyKind::Stability { taus, k } => {
                lines.push("study.kind = stability".into());
                lines.push(format!(
                    "study.axis = {}",
                    taus.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",")
                ));
                lines.push(format!("study.K = {k}"));
            }
        }
        lines
    }
}

fn join_usize(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

const SECTIONS: [&str; 5] = ["problem", "noise", "discretization", "study", "output"];

fn known_keys(section: &str) -> &'static [&'static str] {
    match section {
        "problem" => &["dimension", "diffusivity", "reaction", "diffusion", "u0"],
        "noise" => &["decay", "mode_kind", "modes_per_direction"],
        "discretization" => &["N", "M", "T"],
        "study" => &["kind", "axis", "K", "N_ref", "M_ref"],
        "output" => &["csv", "svg", "seed"],
        _ => &[],
    }
}

struct Raw {
    entries: BTreeMap<(String, String), String>,
    violations: Vec<String>,
}

fn tokenize(text: &str) -> Raw {
    let mut entries = BTreeMap::new();
    let mut violations = Vec::new();
    let mut section: Option<String> = None;
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            let name = line[1..line.len() - 1].trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                violations.push(format!("line {}: unknown section [{name}]", lineno + 1));
                section = None;
            } else {
                section = Some(name);
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            violations.push(format!("line {}: expected key = value, got '{line}'", lineno + 1));
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let Some(sec) = section.clone() else {
            violations.push(format!("line {}: key '{key}' outside any section", lineno + 1));
            continue;
        };
        if !known_keys(&sec).contains(&key.as_str()) {
            violations.push(format!("line {}: unknown key '{key}' in [{sec}]", lineno + 1));
            continue;
        }
        if entries.insert((sec.clone(), key.clone()), value).is_some() {
            violations.push(format!("line {}: duplicate key '{key}' in [{sec}]", lineno + 1));
        }
    }
    Raw { entries, violations }
}

struct Checker {
    raw: Raw,
}

impl Checker {
    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.raw
            .entries
            .get(&(section.to_string(), key.to_string()))
            .map(|s| s.as_str())
    }

    fn require(&mut self, section: &str, key: &str) -> Option<String> {
        match self.get(section, key) {
            Some(v) => Some(v.to_string()),
            None => {
                self.raw
                    .violations
                    .push(format!("[{section}] is missing required key '{key}'"));
                None
            }
        }
    }

    fn fail(&mut self, msg: String) {
        self.raw.violations.push(msg);
    }

    fn parse<T: std::str::FromStr>(&mut self, section: &str, key: &str, what: &str) -> Option<T> {
        let v = self.require(section, key)?;
        match v.parse::<T>() {
            Ok(x) => Some(x),
            Err(_) => {
                self.fail(format!("[{section}] {key} = '{v}' is not a valid {what}"));
                None
            }
        }
    }
}

/// Parse and validate; on failure the complete violation list is returned.
pub fn parse_config(text: &str) -> Result<FileConfig, Vec<String>> {
    let mut c = Checker { raw: tokenize(text) };

    // [problem]
    let dimension = match c.require("problem", "dimension").as_deref() {
        Some("1") => Some(Dim::One),
        Some("2") => Some(Dim::Two),
        Some(other) => {
            c.fail(format!("[problem] dimension must be 1 or 2, got '{other}'"));
            None
        }
        None => None,
    };
    let diffusivity: Option<f64> = c.parse("problem", "diffusivity", "number");
    let operator = match (dimension, diffusivity) {
        (Some(d), Some(nu)) => match OperatorSpec::new(d, nu) {
            Ok(op) => Some(op),
            Err(e) => {
                c.fail(format!("[problem] {e}"));
                None
            }
        },
        _ => None,
    };

    let reaction = c.require("problem", "reaction").and_then(|spec| {
        let coeffs: Result<Vec<f64>, _> = spec.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match coeffs {
            Err(_) => {
                c.fail(format!("[problem] reaction = '{spec}' is not a comma list of numbers"));
                None
            }
            Ok(coeffs) if coeffs.iter().all(|&a| a == 0.0) => Some(ReactionSpec::zero()),
            Ok(coeffs) => match validate_reaction(&coeffs) {
                Ok(()) => Some(ReactionSpec::new(coeffs).expect("validated")),
                Err(e) => {
                    c.fail(format!("[problem] reaction rejected: {e}"));
                    None
                }
            },
        }
    });

    let diffusion = c.require("problem", "diffusion").and_then(|v| match v.as_str() {
        "constant_one" => Some(DiffusionSpec::ConstantOne),
        "sine" => Some(DiffusionSpec::Sine),
        "rational" => Some(DiffusionSpec::Rational),
        other => {
            if let Some(cval) = other.strip_prefix("linear:") {
                match cval.parse::<f64>() {
                    Ok(x) if x.is_finite() => return Some(DiffusionSpec::Linear(x)),
                    _ => {
                        c.fail(format!("[problem] diffusion linear coefficient '{cval}' is not a number"));
                        return None;
                    }
                }
            }
            c.fail(format!(
                "[problem] diffusion must be constant_one | linear:<c> | sine | rational, got '{other}'"
            ));
            None
        }
    });

    let u0 = c.require("problem", "u0").and_then(|v| match v.as_str() {
        "sine" => Some(InitialCondition::SineProduct),
        "parabola" => Some(InitialCondition::Parabola),
        "zero" => Some(InitialCondition::Zero),
        other => {
            c.fail(format!("[problem] u0 must be sine | parabola | zero, got '{other}'"));
            None
        }
    });

    // [noise]
    let decay: Option<f64> = c.parse("noise", "decay", "number");
    let modes_per_direction: Option<usize> = c.parse("noise", "modes_per_direction", "positive integer");
    let mode_kind = c.require("noise", "mode_kind").and_then(|v| match v.as_str() {
        "sine" => Some(ModeKind::Sine),
        "sine_plus_basis_phase" => Some(ModeKind::SinePlusBasisPhase),
        "product_sine_basis" => Some(ModeKind::ProductSineBasis),
        other => {
            c.fail(format!(
                "[noise] mode_kind must be sine | sine_plus_basis_phase | product_sine_basis, got '{other}'"
            ));
            None
        }
    });
    if mode_kind == Some(ModeKind::ProductSineBasis) && dimension == Some(Dim::One) {
        c.fail("[noise] mode_kind product_sine_basis requires dimension = 2".into());
    }
    let noise = match (dimension, modes_per_direction, decay, mode_kind) {
        (Some(d), Some(j), Some(s), Some(k)) => match QWienerSpec::new(d, j, s, k) {
            Ok(spec) => Some(spec),
            Err(e) => {
                c.fail(format!("[noise] {e}"));
                None
            }
        },
        _ => None,
    };

    // [discretization]
    let n_cut: Option<usize> = c.parse("discretization", "N", "positive integer");
    let m_steps: Option<usize> = c.parse("discretization", "M", "positive integer");
    let t_horizon: Option<f64> = c.parse("discretization", "T", "number");
    if let Some(n) = n_cut {
        if n < 3 {
            c.fail(format!("[discretization] N must be >= 3, got {n}"));
        }
    }
    if let Some(m) = m_steps {
        if m == 0 {
            c.fail("[discretization] M must be >= 1".into());
        }
    }
    if let Some(t) = t_horizon {
        if !(t > 0.0) || !t.is_finite() {
            c.fail(format!("[discretization] T must be positive, got {t}"));
        }
    }

    // [study]
    let kind = c.require("study", "kind");
    let study = match kind.as_deref() {
        Some("single") => {
            for key in ["axis", "K", "N_ref", "M_ref"] {
                if c.get("study", key).is_some() {
                    c.fail(format!("[study] key '{key}' does not apply to kind = single"));
                }
            }
            Some(StudyKind::Single)
        }
        Some("spatial") => {
            let ns = parse_usize_list(&mut c, "axis");
            let k: Option<usize> = c.parse("study", "K", "positive integer");
            let n_ref: Option<usize> = c.parse("study", "N_ref", "positive integer");
            if c.get("study", "M_ref").is_some() {
                c.fail("[study] M_ref does not apply to kind = spatial".into());
            }
            if let (Some(ns), Some(n_ref)) = (&ns, n_ref) {
                if let Some(&max_n) = ns.iter().max() {
                    if n_ref <= max_n {
                        c.fail(format!(
                            "[study] N_ref = {n_ref} must exceed every axis value (max {max_n})"
                        ));
                    }
                }
                if ns.iter().any(|&n| n < 3) {
                    c.fail("[study] every spatial axis value must be >= 3".into());
                }
            }
            match (ns, k, n_ref) {
                (Some(ns), Some(k), Some(n_ref)) if k > 0 => {
                    Some(StudyKind::Spatial { ns, k, n_ref })
                }
                (_, Some(0), _) => {
                    c.fail("[study] K must be >= 1".into());
                    None
                }
                _ => None,
            }
        }
        Some("temporal") => {
            let ms = parse_usize_list(&mut c, "axis");
            let k: Option<usize> = c.parse("study", "K", "positive integer");
            let m_ref: Option<usize> = c.parse("study", "M_ref", "positive integer");
            if c.get("study", "N_ref").is_some() {
                c.fail("[study] N_ref does not apply to kind = temporal".into());
            }
            if let (Some(ms), Some(m_ref)) = (&ms, m_ref) {
                for &m in ms {
                    if m == 0 || m >= m_ref || m_ref % m != 0 {
                        c.fail(format!(
                            "[study] axis value M = {m} must divide M_ref = {m_ref} and be smaller"
                        ));
                    }
                }
            }
            match (ms, k, m_ref) {
                (Some(ms), Some(k), Some(m_ref)) if k > 0 => {
                    Some(StudyKind::Temporal { ms, k, m_ref })
                }
                (_, Some(0), _) => {
                    c.fail("[study] K must be >= 1".into());
                    None
                }
                _ => None,
            }
        }
        Some("stability") => {
            let taus = c.require("study", "axis").and_then(|v| {
                let parsed: Result<Vec<f64>, _> = v.split(',').map(|s| s.trim().parse::<f64>()).collect();
                match parsed {
                    Ok(taus) if taus.iter().all(|&t| t > 0.0) => Some(taus),
                    Ok(_) => {
                        c.fail("[study] stability axis values must be positive step sizes".into());
                        None
                    }
                    Err(_) => {
                        c.fail(format!("[study] axis = '{v}' is not a comma list of numbers"));
                        None
                    }
                }
            });
            let k: Option<usize> = c.parse("study", "K", "positive integer");
            for key in ["N_ref", "M_ref"] {
                if c.get("study", key).is_some() {
                    c.fail(format!("[study] key '{key}' does not apply to kind = stability"));
                }
            }
            if let (Some(taus), Some(t)) = (&taus, t_horizon) {
                for &tau in taus {
                    let m = (t / tau).round();
                    if m < 1.0 || (m * tau - t).abs() > 1e-9 * t {
                        c.fail(format!("[study] step size {tau} does not divide T = {t}"));
                    }
                }
            }
            match (taus, k) {
                (Some(taus), Some(k)) if k > 0 => Some(StudyKind::Stability { taus, k }),
                (_, Some(0)) => {
                    c.fail("[study] K must be >= 1".into());
                    None
                }
                _ => None,
            }
        }
        Some(other) => {
            c.fail(format!(
                "[study] kind must be single | spatial | temporal | stability, got '{other}'"
            ));
            None
        }
        None => None,
    };

    // [output]
    let csv = c.get("output", "csv").map(|s| s.to_string());
    let svg = c.get("output", "svg").map(|s| s.to_string());
    let seed: Option<u64> = c.parse("output", "seed", "unsigned integer");
    if svg.is_some() {
        if let Some(k) = kind.as_deref() {
            if k != "spatial" && k != "temporal" {
                c.fail("[output] svg applies only to spatial and temporal studies".into());
            }
        }
    }

    if !c.raw.violations.is_empty() {
        return Err(c.raw.violations);
    }
    Ok(FileConfig {
        problem: ProblemSpec {
            operator: operator.expect("validated"),
            reaction: reaction.expect("validated"),
            diffusion: diffusion.expect("validated"),
            noise: noise.expect("validated"),
            u0: u0.expect("validated"),
        },
        n_cut: n_cut.expect("validated"),
        m_steps: m_steps.expect("validated"),
        t_horizon: t_horizon.expect("validated"),
        study: study.expect("validated"),
        csv,
        svg,
        seed: seed.expect("validated"),
    })
}

fn parse_usize_list(c: &mut Checker, key: &str) -> Option<Vec<usize>> {
    let v = c.require("study", key)?;
    let parsed: Result<Vec<usize>, _> = v.split(',').map(|s| s.trim().parse::<usize>()).collect();
    match parsed {
        Ok(list) if !list.is_empty() => Some(list),
        _ => {
            c.fail(format!("[study] {key} = '{v}' is not a comma list of positive integers"));
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_config() -> String {
        "\
[problem]
dimension = 1
diffusivity = 0.1013211836423378   # 1/pi^2
reaction = 0,1,0,-1
diffusion = constant_one
u0 = sine

[noise]
decay = 5.001
mode_kind = sine
modes_per_direction = 100

[discretization]
N = 16
M = 2500
T = 0.25

[study]
kind = spatial
axis = 12,14,16,18,20
K = 50
N_ref = 64

[output]
csv = out.csv
seed = 42
"
        .to_string()
    }

    #[test]
    fn example_study_config_parses() {
        let cfg = parse_config(&example_config()).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.problem.noise.modes_per_direction, 100);
        assert!(matches!(cfg.study, StudyKind::Spatial { ref ns, k: 50, n_ref: 64 } if ns.len() == 5));
    }

    #[test]
    fn bad_reaction_is_rejected_with_reason() {
        let text = example_config().replace("reaction = 0,1,0,-1", "reaction = 1,0,0,1");
        let errs = parse_config(&text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("reaction")), "{errs:?}");
        assert!(
            errs.iter().any(|e| e.contains("leading coefficient")),
            "{errs:?}"
        );
    }

    #[test]
    fn non_divisor_temporal_axis_is_rejected() {
        let text = example_config()
            .replace("kind = spatial", "kind = temporal")
            .replace("axis = 12,14,16,18,20", "axis = 100")
            .replace("N_ref = 64", "M_ref = 9216");
        let errs = parse_config(&text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("divide M_ref")), "{errs:?}");
    }

    #[test]
    fn all_violations_are_collected() {
        let text = example_config()
            .replace("dimension = 1", "dimension = 7")
            .replace("reaction = 0,1,0,-1", "reaction = 0,0,1")
            .replace("K = 50", "K = 50\nbogus_key = 1");
        let errs = parse_config(&text).unwrap_err();
        assert!(errs.len() >= 3, "{errs:?}");
        assert!(errs.iter().any(|e| e.contains("dimension")));
        assert!(errs.iter().any(|e| e.contains("degree")));
        assert!(errs.iter().any(|e| e.contains("bogus_key")));
    }

    #[test]
    fn unknown_sections_and_misplaced_keys_are_rejected() {
        let errs = parse_config("[nonsense]\nx = 1\n").unwrap_err();
        assert!(errs.iter().any(|e| e.contains("unknown section")));
        let errs = parse_config("x = 1\n").unwrap_err();
        assert!(errs.iter().any(|e| e.contains("outside any section")));
    }

    #[test]
    fn zero_reaction_is_the_heat_case() {
        let text = example_config().replace("reaction = 0,1,0,-1", "reaction = 0");
        let cfg = parse_config(&text).unwrap();
        assert!(cfg.problem.reaction.is_zero());
    }

    #[test]
    fn product_mode_kind_needs_two_dimensions() {
        let text = example_config().replace("mode_kind = sine", "mode_kind = product_sine_basis");
        let errs = parse_config(&text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("dimension = 2")), "{errs:?}");
    }

    #[test]
    fn shipped_configs_parse() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut seen = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().and_then(|e| e.to_str()) != Some("cfg") {
                continue;
            }
            let text = std::fs::read_to_string(&path).unwrap();
            if let Err(errs) = parse_config(&text) {
                panic!("{} rejected: {errs:?}", path.display());
            }
            seen += 1;
        }
        assert!(seen >= 7, "expected the shipped configs, found {seen}");
    }

    #[test]
    fn svg_rejected_for_non_table_kinds() {
        let text = example_config()
            .replace("kind = spatial", "kind = single")
            .replace("axis = 12,14,16,18,20\n", "")
            .replace("K = 50\n", "")
            .replace("N_ref = 64\n", "")
            .replace("csv = out.csv", "csv = out.csv\nsvg = plot.svg");
        let errs = parse_config(&text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("svg")), "{errs:?}");
    }
}

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wulff_core::experiments::{ExperimentConfig, Profile};
use wulff_core::fem::SolverOptions;
use wulff_core::geometry::{ConeSpec, DomainSpec, ShapeSpec};
use wulff_core::norm::NormSpec;

use crate::args::StudyKind;

fn default_dt() -> f64 {
    0.02
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub x0: [f64; 2],
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub h: Vec<f64>,
    #[serde(default = "default_study")]
    pub experiment: StudyKind,
}

fn default_study() -> StudyKind {
    StudyKind::Overdetermined
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub svg: bool,
}

/// The JSON configuration file. Every field is optional; flags fill gaps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub norm: Option<NormSpec>,
    /// Cone shared by the domain; an alternative to `domain.cone`.
    pub cone: Option<ConeSpec>,
    pub domain: Option<DomainSpec>,
    pub profile: Option<Profile>,
    pub h: Option<f64>,
    pub load: Option<f64>,
    pub solver: Option<SolverOptions>,
    pub samples: Option<usize>,
    pub points: Option<usize>,
    pub flow: Option<FlowConfig>,
    pub study: Option<StudyConfig>,
    pub outputs: Option<OutputsConfig>,
}

/// A configuration problem; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Parse a config file, reporting syntax and schema errors with line and column.
pub fn load(path: &Path) -> Result<(ConfigFile, bool), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}

/// Returns the config and whether `domain` carried its own `cone` key.
pub fn parse(text: &str, origin: &str) -> Result<(ConfigFile, bool), ConfigError> {
    let cfg: ConfigFile = serde_json::from_str(text)
        .map_err(|e| {
            let msg = e.to_string();
            let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
            ConfigError(format!("{origin}:{}:{}: {msg}", e.line(), e.column()))
        })?;
    let value: serde_json::Value = serde_json::from_str(text).expect("already parsed");
    let domain_cone = value.get("domain").and_then(|d| d.get("cone")).is_some();
    if domain_cone && cfg.cone.is_some() {
        return Err(ConfigError(format!("{origin}: give the cone either at top level or inside domain, not both")));
    }
    Ok((cfg, domain_cone))
}

/// Flags as given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub norm: Option<NormSpec>,
    pub shape: Option<ShapeSpec>,
    pub cone: Option<ConeSpec>,
    pub profile: Option<Profile>,
    pub h: Option<f64>,
    pub load: Option<f64>,
    pub samples: Option<usize>,
    pub points: Option<usize>,
    pub x0: Option<[f64; 2]>,
    pub dt: Option<f64>,
    pub exact: bool,
    pub hs: Option<Vec<f64>>,
    pub experiment: Option<StudyKind>,
    pub out: Option<PathBuf>,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub experiment: ExperimentConfig,
    pub samples: usize,
    pub points: usize,
    pub flow: Option<FlowConfig>,
    pub study: Option<StudyConfig>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub svg: bool,
}

fn pick<T>(name: &str, file: Option<T>, flag: Option<T>, warnings: &mut Vec<String>) -> Option<T> {
    match (file, flag) {
        (Some(f), Some(_)) => {
            warnings.push(format!("--{name} ignored: the config file sets it"));
            Some(f)
        }
        (f, g) => f.or(g),
    }
}

/// Merge a config file with flags. The file wins; each overridden flag yields a warning.
pub fn resolve(file: Option<(ConfigFile, bool)>, flags: Flags) -> (Resolved, Vec<String>) {
    let mut w = Vec::new();
    let (file, domain_cone) = file.unwrap_or_default();
    let norm = pick("norm", file.norm, flags.norm, &mut w).unwrap_or(NormSpec::euclidean(2));
    let file_cone = if domain_cone {
        file.domain.as_ref().map(|d| d.cone)
    } else {
        file.cone
    };
    let cone = pick("cone", file_cone, flags.cone, &mut w).unwrap_or_default();
    let shape = pick("domain", file.domain.map(|d| d.shape), flags.shape, &mut w)
        .unwrap_or_else(|| DomainSpec::wulff(1.0, cone).shape);
    let profile = pick("profile", file.profile, flags.profile, &mut w);
    let h = pick("h", file.h, flags.h, &mut w).unwrap_or(0.05);
    let load = pick("f", file.load, flags.load, &mut w).unwrap_or(1.0);
    let samples = pick("samples", file.samples, flags.samples, &mut w).unwrap_or(1000);
    let points = pick("points", file.points, flags.points, &mut w).unwrap_or(100);

    let flow_flags = flags.x0.map(|x0| FlowConfig {
        x0,
        dt: flags.dt.unwrap_or_else(default_dt),
        exact: flags.exact,
    });
    let flow = match (file.flow, flow_flags) {
        (Some(f), Some(_)) => {
            w.push("--x0/--dt/--exact ignored: the config file sets flow".into());
            Some(f)
        }
        (Some(f), None) => {
            if flags.dt.is_some() || flags.exact {
                w.push("--dt/--exact ignored: the config file sets flow".into());
            }
            Some(f)
        }
        (None, g) => g,
    };
    let study_flags = flags.hs.map(|h| StudyConfig {
        h,
        experiment: flags.experiment.unwrap_or(StudyKind::Overdetermined),
    });
    let study = pick("hs", file.study, study_flags, &mut w);
    let (file_out, svg) = match file.outputs {
        Some(o) => (o.dir, o.svg),
        None => (None, true),
    };
    let out = pick("out", file_out, flags.out, &mut w);

    let mut experiment = ExperimentConfig::new(norm, DomainSpec { shape, cone }, h);
    experiment.profile = profile;
    experiment.load = load;
    experiment.solver = file.solver.unwrap_or_default();
    (
        Resolved {
            experiment,
            samples,
            points,
            flow,
            study,
            out,
            svg,
        },
        w,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_wins_over_flags_with_warning() {
        let (file, dc) = parse(r#"{"h": 0.1, "norm": {"family": "p_norm", "p": 3}}"#, "t").unwrap();
        let flags = Flags {
            h: Some(0.2),
            load: Some(2.0),
            ..Flags::default()
        };
        let (r, w) = resolve(Some((file, dc)), flags);
        assert_eq!(r.experiment.h, 0.1);
        assert_eq!(r.experiment.load, 2.0);
        assert_eq!(r.experiment.norm, NormSpec::p_norm(3.0, 2));
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("--h"));
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let err = parse("{\n  \"h\": 0.1,\n  \"mesh\": 3\n}", "demo.json").unwrap_err();
        assert!(err.0.starts_with("demo.json:3:"), "{}", err.0);
        let err = parse("{\n  \"h\": ,\n}", "demo.json").unwrap_err();
        assert!(err.0.starts_with("demo.json:2:"), "{}", err.0);
    }

    #[test]
    fn cone_inside_domain_is_honoured() {
        let text = r#"{"domain": {"kind": "wulff", "radius": 1, "cone": {"kind": "sector", "angle_start": 0, "angle_end": 1}}}"#;
        let (r, w) = resolve(Some(parse(text, "t").unwrap()), Flags {
            cone: Some(ConeSpec::FullPlane),
            ..Flags::default()
        });
        assert_eq!(r.experiment.domain.cone, ConeSpec::sector(0.0, 1.0));
        assert_eq!(w.len(), 1);
        let both = r#"{"cone": {"kind": "full_plane"}, "domain": {"kind": "wulff", "radius": 1, "cone": {"kind": "full_plane"}}}"#;
        assert!(parse(both, "t").is_err());
    }
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wulff_core::experiments::Profile;
use wulff_core::geometry::{ConeSpec, DomainSpec, ShapeSpec};
use wulff_core::norm::{flower, NormSpec};

#[derive(Debug, Parser)]
#[command(name = "wulff", version, about = "Anisotropic torsion problems in cones: norms, solves and rigidity experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the norm axioms and gradient identities.
    NormsCheck {
        #[command(flatten)]
        norm: NormArgs,
        /// Number of random samples.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Compare the numeric dual with the closed-form dual.
    NormsDual {
        #[command(flatten)]
        norm: NormArgs,
        /// Number of random dual vectors.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Solve the torsion problem and write the solution and boundary flux.
    Solve(ProblemArgs),
    /// Test the overdetermined condition H(Du) = q(H0) on the Dirichlet boundary.
    CheckOverdetermined(ProblemArgs),
    /// Compare the solution with the Wulff solutions of radii R1 and R2.
    Compare(ProblemArgs),
    /// Trace flow lines of DH(Du).
    Flow {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Start point `x,y`.
        #[arg(long, value_parser = parse_point)]
        x0: Option<[f64; 2]>,
        #[arg(long)]
        dt: Option<f64>,
        /// Use the exact Wulff solution instead of the discrete one.
        #[arg(long)]
        exact: bool,
    },
    /// Run an experiment over several mesh sizes in parallel.
    Study {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Comma-separated mesh sizes.
        #[arg(long, value_delimiter = ',')]
        hs: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        experiment: Option<StudyKind>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Overdetermined,
    Compare,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON configuration; its values take precedence over flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct NormArgs {
    /// `euclid`, `pnorm:P`, `quad:A11:A22[:A12]`, `flower` or `dual:<norm>`.
    #[arg(long, value_parser = parse_norm)]
    pub norm: Option<NormSpec>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[command(flatten)]
    pub norm: NormArgs,
    /// `wulff:R`, `ellipse:A:B` or `perturbed:R:EPS:M`.
    #[arg(long, value_parser = parse_shape)]
    pub domain: Option<ShapeSpec>,
    /// `full`, `quarter` or `sector:START:END` (radians).
    #[arg(long, value_parser = parse_cone)]
    pub cone: Option<ConeSpec>,
    /// `linear:C`, `power:C:ALPHA`.
    #[arg(long, value_parser = parse_profile)]
    pub profile: Option<Profile>,
    /// Target mesh size.
    #[arg(long)]
    pub h: Option<f64>,
    /// Constant right-hand side.
    #[arg(long)]
    pub f: Option<f64>,
}

fn numbers(parts: &[&str], expect: &[usize], what: &str) -> Result<Vec<f64>, String> {
    if !expect.contains(&parts.len()) {
        return Err(format!("{what} expects {expect:?} parameters, got {}", parts.len()));
    }
    parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{what}: bad number {p:?}: {e}")))
        .collect()
}

pub fn parse_norm(s: &str) -> Result<NormSpec, String> {
    let (family, rest) = s.split_once(':').unwrap_or((s, ""));
    let params: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(':').collect() };
    match family {
        "euclid" | "euclidean" => {
            numbers(&params, &[0], "euclid")?;
            Ok(NormSpec::euclidean(2))
        }
        "pnorm" => {
            let p = numbers(&params, &[1], "pnorm")?[0];
            Ok(NormSpec::p_norm(p, 2))
        }
        "quad" => {
            let v = numbers(&params, &[2, 3], "quad")?;
            let off = v.get(2).copied().unwrap_or(0.0);
            Ok(NormSpec::Quadratic {
                matrix: vec![vec![v[0], off], vec![off, v[1]]],
            })
        }
        "flower" => {
            numbers(&params, &[0], "flower")?;
            Ok(flower::flower_spec())
        }
        "dual" => Ok(NormSpec::numeric_dual_of(parse_norm(rest)?)),
        other => Err(format!("unknown norm family {other:?} (euclid, pnorm, quad, flower, dual)")),
    }
}

pub fn parse_shape(s: &str) -> Result<ShapeSpec, String> {
    let mut parts = s.split(':');
    let kind = parts.next().unwrap_or_default();
    let params: Vec<&str> = parts.collect();
    match kind {
        "wulff" => {
            let v = numbers(&params, &[1], "wulff")?;
            Ok(DomainSpec::wulff(v[0], ConeSpec::FullPlane).shape)
        }
        "ellipse" => {
            let v = numbers(&params, &[2], "ellipse")?;
            Ok(ShapeSpec::Ellipse { a: v[0], b: v[1] })
        }
        "perturbed" => {
            let v = numbers(&params, &[3], "perturbed")?;
            if v[2] < 0.0 || v[2].fract() != 0.0 {
                return Err(format!("perturbed: mode must be a nonnegative integer, got {}", v[2]));
            }
            Ok(DomainSpec::perturbed_wulff(v[0], v[1], v[2] as u32, ConeSpec::FullPlane).shape)
        }
        other => Err(format!("unknown domain {other:?} (wulff, ellipse, perturbed)")),
    }
}

pub fn parse_cone(s: &str) -> Result<ConeSpec, String> {
    let mut parts = s.split(':');
    let kind = parts.next().unwrap_or_default();
    let params: Vec<&str> = parts.collect();
    match kind {
        "full" => {
            numbers(&params, &[0], "full")?;
            Ok(ConeSpec::FullPlane)
        }
        "quarter" => {
            numbers(&params, &[0], "quarter")?;
            Ok(ConeSpec::quarter())
        }
        "sector" => {
            let v = numbers(&params, &[2], "sector")?;
            Ok(ConeSpec::sector(v[0], v[1]))
        }
        other => Err(format!("unknown cone {other:?} (full, quarter, sector)")),
    }
}

pub fn parse_profile(s: &str) -> Result<Profile, String> {
    let mut parts = s.split(':');
    let kind = parts.next().unwrap_or_default();
    let params: Vec<&str> = parts.collect();
    match kind {
        "linear" => Ok(Profile::linear(numbers(&params, &[1], "linear")?[0])),
        "power" => {
            let v = numbers(&params, &[2], "power")?;
            Ok(Profile::Power { c: v[0], alpha: v[1] })
        }
        other => Err(format!("unknown profile {other:?} (linear, power)")),
    }
}

pub fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let v = numbers(&s.split(',').collect::<Vec<_>>(), &[2], "point")?;
    Ok([v[0], v[1]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compact_norms() {
        assert_eq!(parse_norm("euclid").unwrap(), NormSpec::euclidean(2));
        assert_eq!(parse_norm("pnorm:3").unwrap(), NormSpec::p_norm(3.0, 2));
        assert_eq!(parse_norm("quad:4:1").unwrap(), NormSpec::diagonal(&[4.0, 1.0]));
        assert_eq!(parse_norm("flower").unwrap(), flower::flower_spec());
        assert_eq!(
            parse_norm("dual:pnorm:3").unwrap(),
            NormSpec::numeric_dual_of(NormSpec::p_norm(3.0, 2))
        );
        assert!(parse_norm("pnorm").is_err());
        assert!(parse_norm("lp:3").is_err());
        assert!(parse_norm("pnorm:x").is_err());
    }

    #[test]
    fn compact_domains_and_cones() {
        assert_eq!(parse_shape("ellipse:1.5:1").unwrap(), ShapeSpec::Ellipse { a: 1.5, b: 1.0 });
        assert!(matches!(parse_shape("perturbed:1:0.1:3").unwrap(), ShapeSpec::PerturbedWulff { mode: 3, .. }));
        assert!(parse_shape("perturbed:1:0.1:2.5").is_err());
        assert_eq!(parse_cone("sector:0:1.5").unwrap(), ConeSpec::sector(0.0, 1.5));
        assert_eq!(parse_cone("quarter").unwrap(), ConeSpec::quarter());
        assert!(parse_cone("sector:1").is_err());
        assert_eq!(parse_point("0.5,0").unwrap(), [0.5, 0.0]);
        assert_eq!(parse_profile("power:1:2").unwrap(), Profile::Power { c: 1.0, alpha: 2.0 });
    }
}

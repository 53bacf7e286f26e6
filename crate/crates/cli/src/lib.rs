//! Input parsing and output documents for the `psl2rig` command-line tool.

use std::path::{Path, PathBuf};

use psl2_rigidity::detect::Elementarity;
use psl2_rigidity::fuzz::{FuzzMode, FuzzReport};
use psl2_rigidity::psl2::{Angle, Psl2Error};
use psl2_rigidity::rigidity::{RigidityOutcome, RigidityParams, RigidityVerdict};
use psl2_rigidity::words::{Representation, WordError};
use psl2_rigidity::{ProjectiveElement, Word};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_WITNESS: u8 = 1;
pub const EXIT_INCONCLUSIVE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;

/// Input errors. All of them map to exit code 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {field}: {source}")]
    Determinant {
        path: PathBuf,
        field: String,
        source: Psl2Error,
    },
    #[error("{path}: {field}: duplicate label {label:?}")]
    DuplicateLabel {
        path: PathBuf,
        field: String,
        label: String,
    },
    #[error("{path}: {field}: {message}")]
    InvalidField {
        path: PathBuf,
        field: String,
        message: String,
    },
    #[error("--matrix {text:?}: {message}")]
    MatrixArgument { text: String, message: String },
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RepresentationFile {
    name: String,
    generators: Vec<GeneratorEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorEntry {
    label: String,
    matrix: [[f64; 2]; 2],
}

#[derive(Debug, Clone)]
pub struct LoadedRepresentation {
    pub name: String,
    pub rep: Representation,
}

pub fn load_representation(path: &Path, renormalize: bool) -> Result<LoadedRepresentation, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_representation(&text, path, renormalize)
}

/// Parses a representation document; `path` is only used in diagnostics.
pub fn parse_representation(text: &str, path: &Path, renormalize: bool) -> Result<LoadedRepresentation, CliError> {
    let file: RepresentationFile = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.generators.is_empty() {
        return Err(CliError::InvalidField {
            path: path.to_path_buf(),
            field: "generators".into(),
            message: "at least one generator is required".into(),
        });
    }
    let mut labels: Vec<String> = Vec::with_capacity(file.generators.len());
    let mut elements = Vec::with_capacity(file.generators.len());
    for (i, g) in file.generators.into_iter().enumerate() {
        if g.label.is_empty() {
            return Err(CliError::InvalidField {
                path: path.to_path_buf(),
                field: format!("generators[{i}].label"),
                message: "label must be nonempty".into(),
            });
        }
        if labels.contains(&g.label) {
            return Err(CliError::DuplicateLabel {
                path: path.to_path_buf(),
                field: format!("generators[{i}].label"),
                label: g.label,
            });
        }
        let [[a, b], [c, d]] = g.matrix;
        let element = ProjectiveElement::from_entries(a, b, c, d, renormalize).map_err(|source| {
            CliError::Determinant {
                path: path.to_path_buf(),
                field: format!("generators[{i}].matrix"),
                source,
            }
        })?;
        labels.push(g.label);
        elements.push(element);
    }
    let rep = Representation::with_labels(elements, labels)?;
    Ok(LoadedRepresentation { name: file.name, rep })
}

/// Parses `"a,b,c,d"` (whitespace allowed around entries).
pub fn parse_matrix(text: &str, renormalize: bool) -> Result<ProjectiveElement, CliError> {
    let err = |message: String| CliError::MatrixArgument {
        text: text.to_string(),
        message,
    };
    let entries = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| err(format!("{s:?}: {e}"))))
        .collect::<Result<Vec<f64>, _>>()?;
    let [a, b, c, d] = entries[..] else {
        return Err(err(format!("expected 4 comma-separated entries, got {}", entries.len())));
    };
    ProjectiveElement::from_entries(a, b, c, d, renormalize).map_err(|e| err(e.to_string()))
}

pub fn verdict_exit_code(verdict: &RigidityVerdict) -> u8 {
    match verdict {
        RigidityVerdict::Certificate { .. } => EXIT_OK,
        RigidityVerdict::Witness { .. } => EXIT_WITNESS,
        RigidityVerdict::Inconclusive { .. } => EXIT_INCONCLUSIVE,
    }
}

/// [`RigidityVerdict`] with words rendered through the representation's labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerdictDoc {
    Certificate {
        g: ProjectiveElement,
        max_generator_residual: f64,
        max_corpus_trace_deviation: f64,
        corpus_radius: usize,
    },
    Witness {
        word: String,
        rot1: Angle,
        rot2: Angle,
    },
    Inconclusive {
        reason: String,
    },
}

impl VerdictDoc {
    pub fn new(verdict: &RigidityVerdict, labels: &[String]) -> Self {
        match verdict {
            RigidityVerdict::Certificate {
                g,
                max_generator_residual,
                max_corpus_trace_deviation,
                corpus_radius,
            } => VerdictDoc::Certificate {
                g: *g,
                max_generator_residual: *max_generator_residual,
                max_corpus_trace_deviation: *max_corpus_trace_deviation,
                corpus_radius: *corpus_radius,
            },
            RigidityVerdict::Witness { word, rot1, rot2 } => VerdictDoc::Witness {
                word: word.display_with(labels).to_string(),
                rot1: *rot1,
                rot2: *rot2,
            },
            RigidityVerdict::Inconclusive { reason } => VerdictDoc::Inconclusive { reason: reason.clone() },
        }
    }
}

impl std::fmt::Display for VerdictDoc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VerdictDoc::Certificate {
                g,
                max_generator_residual,
                max_corpus_trace_deviation,
                corpus_radius,
            } => write!(
                f,
                "certificate: rho2 = g rho1 g^-1 with g = {g}\ngenerator residual {max_generator_residual:e}, \
                 trace deviation {max_corpus_trace_deviation:e} on the radius-{corpus_radius} ball"
            ),
            VerdictDoc::Witness { word, rot1, rot2 } => {
                write!(f, "witness: {word} has rotation numbers {rot1} and {rot2}")
            }
            VerdictDoc::Inconclusive { reason } => write!(f, "inconclusive: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub params: RigidityParams,
    pub corpus_radius: usize,
    pub gamma0_word: Option<String>,
    pub theta: Option<f64>,
}

/// Output document of `check`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictOutput {
    pub verdict: VerdictDoc,
    pub provenance: Provenance,
}

impl VerdictOutput {
    pub fn new(outcome: &RigidityOutcome, params: &RigidityParams, labels: &[String]) -> Self {
        Self {
            verdict: VerdictDoc::new(&outcome.verdict, labels),
            provenance: Provenance {
                params: *params,
                corpus_radius: params.corpus_radius,
                gamma0_word: outcome.gamma0.as_ref().map(|w| w.display_with(labels).to_string()),
                theta: outcome.theta,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementarityDoc {
    Elementary { reason: String },
    NonElementary { witness: [String; 2] },
    Unknown,
}

impl ElementarityDoc {
    pub fn new(e: &Elementarity, labels: &[String]) -> Self {
        let show = |w: &Word| w.display_with(labels).to_string();
        match e {
            Elementarity::Elementary { reason } => ElementarityDoc::Elementary {
                reason: format!("{reason:?}"),
            },
            Elementarity::NonElementary { witness } => ElementarityDoc::NonElementary {
                witness: [show(&witness.0), show(&witness.1)],
            },
            Elementarity::Unknown => ElementarityDoc::Unknown,
        }
    }
}

impl std::fmt::Display for ElementarityDoc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ElementarityDoc::Elementary { reason } => write!(f, "elementary: {reason}"),
            ElementarityDoc::NonElementary { witness: [w1, w2] } => write!(f, "non-elementary: witness {w1}, {w2}"),
            ElementarityDoc::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzTrialDoc {
    pub index: u64,
    pub verdict: VerdictDoc,
    pub gamma0_word: Option<String>,
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct_solve: Option<String>,
    pub expectation_met: bool,
}

/// Output document of `fuzz`; generated representations use labels `a`, `b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzOutput {
    pub seed: u64,
    pub mode: FuzzMode,
    pub count: u64,
    pub params: RigidityParams,
    pub certificates: u64,
    pub witnesses: u64,
    pub inconclusive: u64,
    pub expectations_met: u64,
    pub trials: Vec<FuzzTrialDoc>,
}

impl FuzzOutput {
    pub fn new(report: &FuzzReport, params: &RigidityParams) -> Self {
        let labels = psl2_rigidity::words::default_labels(2);
        Self {
            seed: report.seed,
            mode: report.mode,
            count: report.count,
            params: *params,
            certificates: report.certificates,
            witnesses: report.witnesses,
            inconclusive: report.inconclusive,
            expectations_met: report.expectations_met,
            trials: report
                .trials
                .iter()
                .map(|t| FuzzTrialDoc {
                    index: t.index,
                    verdict: VerdictDoc::new(&t.outcome.verdict, &labels),
                    gamma0_word: t.outcome.gamma0.as_ref().map(|w| w.display_with(&labels).to_string()),
                    theta: t.outcome.theta,
                    direct_solve: t.direct_solve.clone(),
                    expectation_met: t.expectation_met,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, renormalize: bool) -> Result<LoadedRepresentation, CliError> {
        parse_representation(text, Path::new("rep.json"), renormalize)
    }

    #[test]
    fn single_parabolic_file() {
        let r = parse(
            r#"{"name": "t", "generators": [{"label": "a", "matrix": [[1, 1], [0, 1]]}]}"#,
            false,
        )
        .unwrap();
        assert_eq!(r.name, "t");
        assert_eq!(r.rep.len(), 1);
        assert_eq!(r.rep.generators()[0].rep().entries(), [1., 1., 0., 1.]);
    }

    #[test]
    fn scalar_matrix_renormalizes_to_identity() {
        let text = r#"{"name": "s", "generators": [{"label": "a", "matrix": [[2, 0], [0, 2]]}]}"#;
        let r = parse(text, true).unwrap();
        assert_eq!(r.rep.generators()[0], ProjectiveElement::identity());
        assert!(matches!(parse(text, false), Err(CliError::Determinant { .. })));
    }

    #[test]
    fn diagnostics_name_the_field() {
        let zero = r#"{"name": "z", "generators": [{"label": "a", "matrix": [[1, 1], [0, 1]]}, {"label": "b", "matrix": [[1, 2], [1, 2]]}]}"#;
        match parse(zero, true) {
            Err(CliError::Determinant { field, source, .. }) => {
                assert_eq!(field, "generators[1].matrix");
                assert!(matches!(source, Psl2Error::NonPositiveDeterminant { .. }));
            }
            other => panic!("{other:?}"),
        }
        let dup = r#"{"name": "d", "generators": [{"label": "a", "matrix": [[1, 1], [0, 1]]}, {"label": "a", "matrix": [[1, 0], [1, 1]]}]}"#;
        assert!(matches!(parse(dup, false), Err(CliError::DuplicateLabel { .. })));
        let empty = r#"{"name": "e", "generators": [{"label": "", "matrix": [[1, 1], [0, 1]]}]}"#;
        assert!(matches!(parse(empty, false), Err(CliError::InvalidField { .. })));
        let extra = "{\"name\": \"x\",\n \"generators\": [],\n \"extra\": 1}";
        match parse(extra, false) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse(r#"{"name": "x", "generators": []}"#, false),
            Err(CliError::InvalidField { .. })
        ));
    }

    #[test]
    fn matrix_argument() {
        let q = parse_matrix("0, 1, -1, 0", false).unwrap();
        assert_eq!(q.abs_trace(), 0.0);
        assert!(parse_matrix("1,2,3", false).is_err());
        assert!(parse_matrix("1,x,0,1", false).is_err());
        assert!(parse_matrix("2,0,0,2", false).is_err());
        assert_eq!(parse_matrix("2,0,0,2", true).unwrap(), ProjectiveElement::identity());
    }

    #[test]
    fn floats_round_trip_bit_for_bit() {
        let g = ProjectiveElement::from_entries(1.0 / 3.0, 0.1 + 0.2, -5.887846720064158e-17, 3.0, true).unwrap();
        let verdict = RigidityVerdict::Certificate {
            g,
            max_generator_residual: f64::MIN_POSITIVE,
            max_corpus_trace_deviation: std::f64::consts::PI * 1e-15,
            corpus_radius: 4,
        };
        let text = serde_json::to_string(&VerdictDoc::new(&verdict, &[])).unwrap();
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        let entries = g.rep().entries();
        for (k, v) in entries.iter().enumerate() {
            assert_eq!(back["g"][k / 2][k % 2].as_f64().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(back["max_generator_residual"].as_f64().unwrap(), f64::MIN_POSITIVE);
        assert_eq!(
            back["max_corpus_trace_deviation"].as_f64().unwrap(),
            std::f64::consts::PI * 1e-15
        );
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use psl2_rigidity::detect::{find_infinite_order_elliptic, is_elementary, jorgensen_value, IrrationalityReport};
use psl2_rigidity::fuzz::{run_fuzz, FuzzMode};
use psl2_rigidity::psl2::{self, Angle, Classification, FixedPoints};
use psl2_rigidity::rigidity::{
    check_rigidity, normalize_pair, rotation_spectrum, verify_abs_trace_equality, RigidityError, RigidityParams,
    DEFAULT_CORPUS_RADIUS, DEFAULT_SEARCH_RADIUS, DEFAULT_TOL,
};
use psl2_rigidity::rotnum::{lift_of_element, poincare_rotation_number};
use psl2_rigidity::words::Representation;
use psl2_rigidity::ProjectiveElement;
use psl2_rigidity_cli::{
    load_representation, parse_matrix, verdict_exit_code, CliError, ElementarityDoc, FuzzOutput, LoadedRepresentation,
    VerdictOutput, EXIT_INCONCLUSIVE, EXIT_INPUT, EXIT_OK, EXIT_WITNESS,
};
use serde::Serialize;

const DEFAULT_ORACLE_ITERS: u64 = 100_000;

#[derive(Parser)]
#[command(name = "psl2rig", version, about = "PSL(2,R) classification, rotation numbers and rigidity checks")]
struct Cli {
    /// Print a JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Rescale input matrices to determinant one instead of rejecting them.
    #[arg(long, global = true)]
    renormalize: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify an element.
    Classify(ElementArgs),
    /// Rotation number of an element.
    Rot(ElementArgs),
    /// Rotation numbers of every word in a ball.
    Spectrum {
        #[arg(long)]
        rep1: PathBuf,
        #[arg(long, default_value_t = 2)]
        radius: usize,
    },
    /// First elliptic word of numerically irrational angle.
    FindElliptic {
        #[arg(long)]
        rep1: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEARCH_RADIUS)]
        radius: usize,
        #[command(flatten)]
        irr: IrrationalityArgs,
    },
    /// Jorgensen value of a pair (two --matrix flags or a two-generator --rep1).
    Jorgensen {
        #[arg(long)]
        matrix: Vec<String>,
        #[arg(long, conflicts_with = "matrix")]
        rep1: Option<PathBuf>,
    },
    /// Elementarity test.
    Elementary {
        #[arg(long)]
        rep1: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Full rigidity check of two representations.
    Check {
        #[arg(long)]
        rep1: PathBuf,
        #[arg(long)]
        rep2: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Absolute-trace comparison on a ball after normalizing on an elliptic word.
    Tracecheck {
        #[arg(long)]
        rep1: PathBuf,
        #[arg(long)]
        rep2: PathBuf,
        /// Elliptic word to normalize on; searched for when omitted.
        #[arg(long)]
        word: Option<String>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Closed-form rotation number against the Poincare limit.
    Oracle {
        #[command(flatten)]
        element: ElementArgs,
        #[arg(long, default_value_t = DEFAULT_ORACLE_ITERS)]
        iters: u64,
    },
    /// Seeded trials on generated pairs.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long, default_value = "planted")]
        mode: FuzzMode,
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Args)]
struct ElementArgs {
    /// Entries "a,b,c,d" of [[a,b],[c,d]].
    #[arg(long, conflicts_with_all = ["rep1", "word"])]
    matrix: Option<String>,
    #[arg(long, requires = "word")]
    rep1: Option<PathBuf>,
    #[arg(long, requires = "rep1")]
    word: Option<String>,
    #[arg(long, default_value_t = psl2::DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct IrrationalityArgs {
    #[arg(long = "irrational-q", default_value_t = psl2_rigidity::detect::DEFAULT_IRRATIONAL_Q)]
    q: u64,
    #[arg(long = "irrational-delta", default_value_t = psl2_rigidity::detect::DEFAULT_IRRATIONAL_DELTA)]
    delta: f64,
}

#[derive(Args)]
struct ParamArgs {
    /// Search radius for the elliptic word.
    #[arg(long, default_value_t = DEFAULT_SEARCH_RADIUS)]
    radius: usize,
    #[arg(long, default_value_t = DEFAULT_CORPUS_RADIUS)]
    corpus_radius: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[command(flatten)]
    irr: IrrationalityArgs,
}

impl ParamArgs {
    fn params(&self) -> RigidityParams {
        RigidityParams {
            search_radius: self.radius,
            corpus_radius: self.corpus_radius,
            irrational_q: self.irr.q,
            irrational_delta: self.irr.delta,
            tol: self.tol,
            ..Default::default()
        }
    }
}

struct Ctx {
    json: bool,
    renormalize: bool,
}

impl Ctx {
    fn load(&self, path: &Path) -> Result<LoadedRepresentation, CliError> {
        load_representation(path, self.renormalize)
    }

    fn element(&self, args: &ElementArgs) -> Result<ProjectiveElement, CliError> {
        match (&args.matrix, &args.rep1, &args.word) {
            (Some(m), _, _) => parse_matrix(m, self.renormalize),
            (None, Some(path), Some(word)) => {
                let rep = self.load(path)?.rep;
                let w = rep.parse_word(word)?;
                Ok(rep.evaluate(&w)?)
            }
            _ => Err(CliError::Usage("give --matrix, or --rep1 together with --word".into())),
        }
    }

    fn emit<T: Serialize>(&self, doc: &T, text: impl FnOnce() -> String) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(doc).expect("output serializes"));
        } else {
            println!("{}", text());
        }
    }
}

#[derive(Serialize)]
struct ClassifyDoc {
    classification: Classification,
    abs_trace: f64,
    fixed_points: FixedPoints,
}

#[derive(Serialize)]
struct RotDoc {
    rotation_number: Angle,
}

#[derive(Serialize)]
struct SpectrumEntry {
    word: String,
    rotation_number: Angle,
}

#[derive(Serialize)]
struct EllipticDoc {
    word: String,
    theta: f64,
    rotation_number: Angle,
    irrationality: IrrationalityReport,
}

#[derive(Serialize)]
struct JorgensenDoc {
    value: f64,
    at_least_one: bool,
}

#[derive(Serialize)]
struct TraceDoc {
    gamma0_word: String,
    theta: f64,
    corpus_radius: usize,
    corpus_size: usize,
    max_deviation: f64,
    worst_word: String,
    max_abs_trace: f64,
    within_tolerance: bool,
}

#[derive(Serialize)]
struct OracleDoc {
    closed_form: Angle,
    estimate: Angle,
    iterations: u64,
    difference: f64,
    tolerance: f64,
    agrees: bool,
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let ctx = Ctx {
        json: cli.json,
        renormalize: cli.renormalize,
    };
    match cli.command {
        Command::Classify(args) => {
            let g = ctx.element(&args)?;
            let doc = ClassifyDoc {
                classification: g.classify(args.tol),
                abs_trace: g.abs_trace(),
                fixed_points: g.fixed_points(args.tol),
            };
            ctx.emit(&doc, || {
                format!(
                    "{g}\nclassification: {:?}\n|tr|: {}\nfixed points: {:?}",
                    doc.classification, doc.abs_trace, doc.fixed_points
                )
            });
            Ok(EXIT_OK)
        }
        Command::Rot(args) => {
            let g = ctx.element(&args)?;
            let doc = RotDoc {
                rotation_number: g.rotation_number(args.tol),
            };
            ctx.emit(&doc, || doc.rotation_number.to_string());
            Ok(EXIT_OK)
        }
        Command::Spectrum { rep1, radius } => {
            let rep = ctx.load(&rep1)?.rep;
            let entries: Vec<SpectrumEntry> = rotation_spectrum(&rep, radius)?
                .into_iter()
                .map(|(w, a)| SpectrumEntry {
                    word: rep.display_word(&w).to_string(),
                    rotation_number: a,
                })
                .collect();
            ctx.emit(&entries, || {
                entries
                    .iter()
                    .map(|e| format!("{}\t{}", e.word, e.rotation_number))
                    .collect::<Vec<_>>()
                    .join("\n")
            });
            Ok(EXIT_OK)
        }
        Command::FindElliptic { rep1, radius, irr } => {
            let rep = ctx.load(&rep1)?.rep;
            match find_infinite_order_elliptic(&rep, radius, irr.q, irr.delta) {
                Ok(found) => {
                    let doc = EllipticDoc {
                        word: rep.display_word(&found.word).to_string(),
                        theta: found.theta,
                        rotation_number: Angle::new(2.0 * found.theta),
                        irrationality: found.report,
                    };
                    ctx.emit(&doc, || format!("{}\ttheta = {}", doc.word, doc.theta));
                    Ok(EXIT_OK)
                }
                Err(e) => {
                    let doc = serde_json::json!({ "kind": "not_found", "radius": radius });
                    ctx.emit(&doc, || e.to_string());
                    Ok(EXIT_INCONCLUSIVE)
                }
            }
        }
        Command::Jorgensen { matrix, rep1 } => {
            let (a, b) = match (matrix.as_slice(), rep1) {
                ([m1, m2], None) => (parse_matrix(m1, ctx.renormalize)?, parse_matrix(m2, ctx.renormalize)?),
                ([], Some(path)) => {
                    let rep = ctx.load(&path)?.rep;
                    match rep.generators() {
                        [a, b] => (*a, *b),
                        gens => {
                            return Err(CliError::Usage(format!(
                                "jorgensen needs exactly 2 generators, the file has {}",
                                gens.len()
                            )))
                        }
                    }
                }
                _ => return Err(CliError::Usage("give --matrix twice, or --rep1".into())),
            };
            let value = jorgensen_value(&a, &b);
            let doc = JorgensenDoc {
                value,
                at_least_one: value >= 1.0,
            };
            ctx.emit(&doc, || value.to_string());
            Ok(EXIT_OK)
        }
        Command::Elementary { rep1, tol } => {
            let rep = ctx.load(&rep1)?.rep;
            let doc = ElementarityDoc::new(&is_elementary(&rep, tol), rep.labels());
            ctx.emit(&doc, || doc.to_string());
            Ok(EXIT_OK)
        }
        Command::Check { rep1, rep2, params } => {
            let (r1, r2) = (ctx.load(&rep1)?.rep, ctx.load(&rep2)?.rep);
            let params = params.params();
            let outcome = check_rigidity(&r1, &r2, &params);
            let doc = VerdictOutput::new(&outcome, &params, r1.labels());
            ctx.emit(&doc, || match &doc.provenance.gamma0_word {
                Some(w) => format!("{}\nnormalized on {w} (theta = {})", doc.verdict, outcome.theta.unwrap_or(f64::NAN)),
                None => doc.verdict.to_string(),
            });
            Ok(verdict_exit_code(&outcome.verdict))
        }
        Command::Tracecheck {
            rep1,
            rep2,
            word,
            params,
        } => {
            let (r1, r2) = (ctx.load(&rep1)?.rep, ctx.load(&rep2)?.rep);
            if r1.len() != r2.len() {
                return Err(CliError::Usage("representations have different generator counts".into()));
            }
            let p = params.params();
            let gamma0 = match word {
                Some(text) => r1.parse_word(&text)?,
                None => match find_infinite_order_elliptic(&r1, p.search_radius, p.irrational_q, p.irrational_delta) {
                    Ok(found) => found.word,
                    Err(e) => {
                        eprintln!("tracecheck: {e}");
                        return Ok(EXIT_INCONCLUSIVE);
                    }
                },
            };
            tracecheck(&ctx, &r1, &r2, &gamma0, &p)
        }
        Command::Oracle { element, iters } => {
            let g = ctx.element(&element)?;
            let closed = g.rotation_number(element.tol);
            let estimate = poincare_rotation_number(&lift_of_element(&g), 0.0, iters);
            let difference = closed.circle_distance(estimate.value);
            let tolerance = estimate.error_bound.max(1e-3);
            let doc = OracleDoc {
                closed_form: closed,
                estimate: estimate.value,
                iterations: iters,
                difference,
                tolerance,
                agrees: difference <= tolerance,
            };
            ctx.emit(&doc, || format!("closed form {closed}, estimate {}, difference {difference:e}", estimate.value));
            Ok(if doc.agrees { EXIT_OK } else { EXIT_WITNESS })
        }
        Command::Fuzz {
            seed,
            count,
            mode,
            params,
        } => {
            let params = params.params();
            let report = run_fuzz(seed, count, mode, &params);
            let doc = FuzzOutput::new(&report, &params);
            ctx.emit(&doc, || {
                format!(
                    "{count} {mode:?} trials (seed {seed}): {} certificates, {} witnesses, {} inconclusive; expectations met {}/{count}",
                    report.certificates, report.witnesses, report.inconclusive, report.expectations_met
                )
            });
            Ok(if report.all_met() { EXIT_OK } else { EXIT_WITNESS })
        }
    }
}

fn tracecheck(
    ctx: &Ctx,
    r1: &Representation,
    r2: &Representation,
    gamma0: &psl2_rigidity::Word,
    p: &RigidityParams,
) -> Result<u8, CliError> {
    let pair = match normalize_pair(r1, r2, gamma0, p.tol) {
        Ok(pair) => pair,
        Err(RigidityError::RotationMismatch { rot1, rot2 }) => {
            eprintln!(
                "tracecheck: rotation numbers of {} differ ({rot1} vs {rot2})",
                r1.display_word(gamma0)
            );
            return Ok(EXIT_WITNESS);
        }
        Err(RigidityError::Word(e)) => return Err(e.into()),
        Err(e) => {
            eprintln!("tracecheck: {e}");
            return Ok(EXIT_INCONCLUSIVE);
        }
    };
    let report = verify_abs_trace_equality(&pair, p.corpus_radius, p.tol)?;
    let doc = TraceDoc {
        gamma0_word: r1.display_word(gamma0).to_string(),
        theta: pair.theta,
        corpus_radius: p.corpus_radius,
        corpus_size: report.corpus_size,
        max_deviation: report.max_deviation,
        worst_word: r1.display_word(&report.worst_word).to_string(),
        max_abs_trace: report.max_abs_trace,
        within_tolerance: report.within(p.tol),
    };
    ctx.emit(&doc, || {
        format!(
            "max deviation {:e} at {} over {} words (within tolerance: {})",
            doc.max_deviation, doc.worst_word, doc.corpus_size, doc.within_tolerance
        )
    });
    Ok(if doc.within_tolerance { EXIT_OK } else { EXIT_WITNESS })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

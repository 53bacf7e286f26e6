//! Rigidity of representations with equal rotation numbers.
//!
//! Given `rho1` (non-elementary, containing an elliptic element of irrational
//! angle) and `rho2` with matching rotation numbers, the pipeline conjugates both
//! so that a chosen elliptic word `gamma0` maps to the same standard rotation,
//! then recovers the conjugator as the null direction of the intertwining system
//! `rho2(g_k) X - X rho1(g_k) = 0`. Rotation numbers and absolute traces on a
//! word ball serve as falsifiers; a rotation-number mismatch is reported as a
//! witness of non-conjugacy.

use nalgebra::{DMatrix, Matrix4};
use serde::Serialize;
use thiserror::Error;

use crate::detect::{
    find_infinite_order_elliptic_with, is_elementary, Elementarity, DEFAULT_IRRATIONAL_DELTA,
    DEFAULT_IRRATIONAL_Q,
};
use crate::exec::Execution;
use crate::psl2::{self, Angle, ClassKind, ProjectiveElement, UnimodularMatrix};
use crate::words::{enumerate_ball, Representation, Word, WordError};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_SEARCH_RADIUS: usize = 3;
pub const DEFAULT_CORPUS_RADIUS: usize = 4;
/// Default half-range `N` of the exponents `n in [-N, N]` in trace sequences.
pub const DEFAULT_TRACE_SAMPLES: i64 = 100;
/// Two smallest singular values closer than this make the null direction ambiguous.
pub const AMBIGUITY_GAP: f64 = 1e-6;
/// Sign patterns are enumerated for at most this many sign-ambiguous generators.
const MAX_AMBIGUOUS_SIGNS: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RigidityError {
    #[error("rotation numbers of gamma0 differ: {rot1} vs {rot2}")]
    RotationMismatch { rot1: Angle, rot2: Angle },
    #[error("image of gamma0 under representation {which} is {found}, not elliptic")]
    NotElliptic { which: usize, found: ClassKind },
    #[error("intertwiner residual {residual:e} exceeds tolerance")]
    ResidualTooLarge { residual: f64 },
    #[error("intertwining system has no isolated null direction (singular values {smallest:e}, {next:e})")]
    AmbiguousNullspace { smallest: f64, next: f64 },
    #[error("best intertwiner is singular (normalized determinant {det:e})")]
    SingularIntertwiner { det: f64 },
    #[error("best intertwiner reverses orientation (det < 0)")]
    OrientationReversing,
    #[error("representations have {left} and {right} generators")]
    GeneratorCountMismatch { left: usize, right: usize },
    #[error(transparent)]
    Word(#[from] WordError),
}

impl RigidityError {
    pub fn kind(&self) -> &'static str {
        match self {
            RigidityError::RotationMismatch { .. } => "rotation_mismatch",
            RigidityError::NotElliptic { .. } => "not_elliptic",
            RigidityError::ResidualTooLarge { .. } => "residual_too_large",
            RigidityError::AmbiguousNullspace { .. } => "ambiguous_nullspace",
            RigidityError::SingularIntertwiner { .. } => "singular_intertwiner",
            RigidityError::OrientationReversing => "orientation_reversing",
            RigidityError::GeneratorCountMismatch { .. } => "generator_count_mismatch",
            RigidityError::Word(_) => "word",
        }
    }
}

/// Both representations conjugated so that `gamma0` maps to the rotation
/// `[[cos theta, sin theta], [-sin theta, cos theta]]` (up to sign).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedPair {
    pub rho1: Representation,
    pub rho2: Representation,
    pub gamma0: Word,
    pub theta: f64,
    /// `rho1 = h1^-1 (normalized rho1) h1`, likewise for `h2`.
    pub h1: ProjectiveElement,
    pub h2: ProjectiveElement,
}

pub fn normalize_pair(
    rho1: &Representation,
    rho2: &Representation,
    gamma0: &Word,
    tol: f64,
) -> Result<NormalizedPair, RigidityError> {
    let g1 = rho1.evaluate(gamma0)?;
    let g2 = rho2.evaluate(gamma0)?;
    let (h1, theta1) = g1
        .conjugate_to_rotation(psl2::DEFAULT_TOL)
        .map_err(|_| RigidityError::NotElliptic {
            which: 1,
            found: g1.class_kind(psl2::DEFAULT_TOL),
        })?;
    let (h2, theta2) = g2
        .conjugate_to_rotation(psl2::DEFAULT_TOL)
        .map_err(|_| RigidityError::NotElliptic {
            which: 2,
            found: g2.class_kind(psl2::DEFAULT_TOL),
        })?;
    let (rot1, rot2) = (Angle::new(2.0 * theta1), Angle::new(2.0 * theta2));
    if rot1.circle_distance(rot2) > tol {
        return Err(RigidityError::RotationMismatch { rot1, rot2 });
    }
    Ok(NormalizedPair {
        rho1: rho1.conjugate_by(&h1),
        rho2: rho2.conjugate_by(&h2),
        gamma0: gamma0.clone(),
        theta: theta1,
        h1,
        h2,
    })
}

/// `|tr rho(gamma gamma0^n)|` for each `n`, by direct word evaluation.
pub fn trace_sequence(
    rho: &Representation,
    gamma: &Word,
    gamma0: &Word,
    n_values: &[i64],
) -> Result<Vec<f64>, WordError> {
    n_values
        .iter()
        .map(|&n| {
            let w = gamma.concat(&gamma0.pow(n));
            rho.evaluate_matrix(&w).map(|m| m.trace().abs())
        })
        .collect()
}

/// `|(a + d) cos(n theta) + (c - b) sin(n theta)|`, the absolute trace of
/// `[[a, b], [c, d]] R_theta^n`.
pub fn trace_closed_form(m: &UnimodularMatrix, theta: f64, n: i64) -> f64 {
    let (s, c) = (n as f64 * theta).sin_cos();
    ((m.a() + m.d()) * c + (m.c() - m.b()) * s).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceReport {
    pub max_deviation: f64,
    pub worst_word: Word,
    pub max_abs_trace: f64,
    pub corpus_size: usize,
}

impl TraceReport {
    /// Deviation within `tol`, scaled by the largest trace on the corpus when
    /// that exceeds one (absolute traces grow geometrically with word length).
    pub fn within(&self, tol: f64) -> bool {
        self.max_deviation <= tol * self.max_abs_trace.max(1.0)
    }
}

pub fn verify_abs_trace_equality(
    pair: &NormalizedPair,
    corpus_radius: usize,
    tol: f64,
) -> Result<TraceReport, WordError> {
    verify_abs_trace_equality_with(pair, corpus_radius, tol, Execution::default())
}

/// Largest `||tr rho1(w)| - |tr rho2(w)||` over the ball of the given radius.
/// Ties keep the earliest word in enumeration order.
pub fn verify_abs_trace_equality_with(
    pair: &NormalizedPair,
    corpus_radius: usize,
    _tol: f64,
    exec: Execution,
) -> Result<TraceReport, WordError> {
    let ball = enumerate_ball(pair.rho1.len(), corpus_radius)?;
    let rows = exec.map(&ball, |w| -> Result<(f64, f64), WordError> {
        let t1 = pair.rho1.evaluate_matrix(w)?.trace().abs();
        let t2 = pair.rho2.evaluate_matrix(w)?.trace().abs();
        Ok(((t1 - t2).abs(), t1.max(t2)))
    });
    let mut report = TraceReport {
        max_deviation: 0.0,
        worst_word: Word::identity(),
        max_abs_trace: 0.0,
        corpus_size: ball.len(),
    };
    for (w, row) in ball.iter().zip(rows) {
        let (dev, tr) = row?;
        if dev > report.max_deviation {
            report.max_deviation = dev;
            report.worst_word = w.clone();
        }
        report.max_abs_trace = report.max_abs_trace.max(tr);
    }
    Ok(report)
}

/// Conjugator found by the intertwiner solve, with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugatorSolution {
    pub g: ProjectiveElement,
    pub residual: f64,
    pub smallest_singular_value: f64,
    pub next_singular_value: f64,
    /// Sign applied to each `rho2` generator representative.
    pub signs: Vec<i8>,
}

pub fn recover_conjugator(
    rho1: &Representation,
    rho2: &Representation,
    tol: f64,
) -> Result<ProjectiveElement, RigidityError> {
    solve_conjugator(rho1, rho2, tol).map(|s| s.g)
}

/// Finds `g` with `rho2(g_k) = g rho1(g_k) g^-1` for every generator.
///
/// Each generator equation holds only up to sign, so each `rho2` representative
/// gets the sign whose own 4x4 block has the smaller least singular value;
/// generators where the two signs are indistinguishable are settled by trying
/// every combination on the stacked system.
pub fn solve_conjugator(
    rho1: &Representation,
    rho2: &Representation,
    tol: f64,
) -> Result<ConjugatorSolution, RigidityError> {
    if rho1.len() != rho2.len() {
        return Err(RigidityError::GeneratorCountMismatch {
            left: rho1.len(),
            right: rho2.len(),
        });
    }
    let pairs: Vec<(UnimodularMatrix, UnimodularMatrix)> = rho1
        .generators()
        .iter()
        .zip(rho2.generators())
        .map(|(m, p)| (*m.rep(), *p.rep()))
        .collect();

    let mut signs = Vec::with_capacity(pairs.len());
    let mut ambiguous = Vec::new();
    for (k, (m, p)) in pairs.iter().enumerate() {
        let plus = min_singular_value_4(&intertwiner_block(p, m, 1.0));
        let minus = min_singular_value_4(&intertwiner_block(p, m, -1.0));
        signs.push(if plus <= minus { 1.0 } else { -1.0 });
        if (plus - minus).abs() <= AMBIGUITY_GAP {
            ambiguous.push(k);
        }
    }
    ambiguous.truncate(MAX_AMBIGUOUS_SIGNS);

    let mut best: Option<(Vec<f64>, NullDirection)> = None;
    for mask in 0u32..(1u32 << ambiguous.len()) {
        let mut trial = signs.clone();
        for (bit, &k) in ambiguous.iter().enumerate() {
            trial[k] = if mask >> bit & 1 == 1 { -1.0 } else { 1.0 };
        }
        let nd = null_direction(&pairs, &trial);
        if best.as_ref().is_none_or(|(_, b)| nd.smallest < b.smallest) {
            best = Some((trial, nd));
        }
    }
    let (signs, nd) = best.expect("at least one sign pattern");

    if nd.next - nd.smallest <= AMBIGUITY_GAP {
        return Err(RigidityError::AmbiguousNullspace {
            smallest: nd.smallest,
            next: nd.next,
        });
    }
    let [x11, x12, x21, x22] = nd.vector;
    let det = x11 * x22 - x12 * x21;
    // the null vector has unit Euclidean norm, so |det| <= 1/2
    if det.abs() <= 1e-12 {
        return Err(RigidityError::SingularIntertwiner { det });
    }
    let s = det.abs().sqrt();
    let (x11, x12, x21, x22) = (x11 / s, x12 / s, x21 / s, x22 / s);
    let det_sign = det.signum();
    // X^-1 = adj(X) / det(X), and det(X) = +-1 after scaling.
    let x = UnimodularMatrix::raw(x11, x12, x21, x22);
    let x_inv = UnimodularMatrix::raw(x22 * det_sign, -x12 * det_sign, -x21 * det_sign, x11 * det_sign);
    let residual = pairs
        .iter()
        .map(|(m, p)| x.mul(m).mul(&x_inv).projective_distance(p))
        .fold(0.0f64, f64::max);
    if residual > tol {
        return Err(RigidityError::ResidualTooLarge { residual });
    }
    if det < 0.0 {
        return Err(RigidityError::OrientationReversing);
    }
    Ok(ConjugatorSolution {
        g: ProjectiveElement::from_matrix(x),
        residual,
        smallest_singular_value: nd.smallest,
        next_singular_value: nd.next,
        signs: signs.iter().map(|&s| s as i8).collect(),
    })
}

/// Coefficients of `X -> s P X - X M` on `vec(X) = (x11, x12, x21, x22)`.
fn intertwiner_block(p: &UnimodularMatrix, m: &UnimodularMatrix, sign: f64) -> [[f64; 4]; 4] {
    let pe = [[p.a(), p.b()], [p.c(), p.d()]];
    let me = [[m.a(), m.b()], [m.c(), m.d()]];
    let mut block = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            let row = 2 * i + j;
            for k in 0..2 {
                block[row][2 * k + j] += sign * pe[i][k];
                block[row][2 * i + k] -= me[k][j];
            }
        }
    }
    block
}

fn min_singular_value_4(block: &[[f64; 4]; 4]) -> f64 {
    let a = Matrix4::from_fn(|r, c| block[r][c]);
    a.singular_values().min()
}

struct NullDirection {
    smallest: f64,
    next: f64,
    vector: [f64; 4],
}

fn null_direction(pairs: &[(UnimodularMatrix, UnimodularMatrix)], signs: &[f64]) -> NullDirection {
    let rows = 4 * pairs.len();
    let mut a = DMatrix::<f64>::zeros(rows.max(4), 4);
    for (k, ((m, p), &s)) in pairs.iter().zip(signs).enumerate() {
        let block = intertwiner_block(p, m, s);
        for (r, row) in block.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                a[(4 * k + r, c)] = *v;
            }
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let row = v_t.row(order[0]);
    NullDirection {
        smallest: svd.singular_values[order[0]],
        next: svd.singular_values[order[1]],
        vector: [row[0], row[1], row[2], row[3]],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RigidityParams {
    pub search_radius: usize,
    pub corpus_radius: usize,
    pub irrational_q: u64,
    pub irrational_delta: f64,
    pub tol: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for RigidityParams {
    fn default() -> Self {
        Self {
            search_radius: DEFAULT_SEARCH_RADIUS,
            corpus_radius: DEFAULT_CORPUS_RADIUS,
            irrational_q: DEFAULT_IRRATIONAL_Q,
            irrational_delta: DEFAULT_IRRATIONAL_DELTA,
            tol: DEFAULT_TOL,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RigidityVerdict {
    /// `rho2 = g rho1 g^-1` on every generator to within `max_generator_residual`.
    Certificate {
        g: ProjectiveElement,
        max_generator_residual: f64,
        max_corpus_trace_deviation: f64,
        corpus_radius: usize,
    },
    /// A word whose images have different rotation numbers.
    Witness { word: Word, rot1: Angle, rot2: Angle },
    Inconclusive { reason: String },
}

impl RigidityVerdict {
    pub fn is_certificate(&self) -> bool {
        matches!(self, RigidityVerdict::Certificate { .. })
    }
}

/// Verdict plus the elliptic word and angle the pipeline normalized on, when it
/// got that far.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityOutcome {
    pub verdict: RigidityVerdict,
    pub gamma0: Option<Word>,
    pub theta: Option<f64>,
}

impl RigidityOutcome {
    fn early(verdict: RigidityVerdict) -> Self {
        Self {
            verdict,
            gamma0: None,
            theta: None,
        }
    }
}

fn inconclusive(reason: impl Into<String>) -> RigidityVerdict {
    RigidityVerdict::Inconclusive {
        reason: reason.into(),
    }
}

/// First word of the ball (enumeration order) whose rotation numbers under the
/// two representations differ by more than `tol` on the circle.
pub fn first_rotation_mismatch(
    rho1: &Representation,
    rho2: &Representation,
    radius: usize,
    tol: f64,
    exec: Execution,
) -> Result<Option<(Word, Angle, Angle)>, WordError> {
    let ball = enumerate_ball(rho1.len(), radius)?;
    Ok(exec.find_map_first(&ball, |w| {
        let r1 = rho1.evaluate(w).ok()?.rotation_number(psl2::DEFAULT_TOL);
        let r2 = rho2.evaluate(w).ok()?.rotation_number(psl2::DEFAULT_TOL);
        (r1.circle_distance(r2) > tol).then(|| (w.clone(), r1, r2))
    }))
}

/// The end-to-end check. Every failure mode ends in a verdict:
///
/// 1. an elementary `rho1` is inconclusive;
/// 2. no elliptic word of irrational angle within `search_radius` is inconclusive;
/// 3. the first corpus word with mismatched rotation numbers is a witness;
/// 4. both representations are normalized on the elliptic word found in 2;
/// 5. the conjugator is solved for on the normalized generators;
/// 6. it is mapped back to the original coordinates and checked on the
///    generators and on absolute traces over the corpus.
pub fn check_rigidity(rho1: &Representation, rho2: &Representation, params: &RigidityParams) -> RigidityOutcome {
    let exec = params.execution;
    if rho1.len() != rho2.len() {
        return RigidityOutcome::early(inconclusive(format!(
            "generator counts differ ({} vs {})",
            rho1.len(),
            rho2.len()
        )));
    }
    if let Elementarity::Elementary { reason } = is_elementary(rho1, params.tol) {
        return RigidityOutcome::early(inconclusive(format!("rho1 is elementary: {reason:?}")));
    }
    let found = match find_infinite_order_elliptic_with(
        rho1,
        params.search_radius,
        params.irrational_q,
        params.irrational_delta,
        exec,
    ) {
        Ok(found) => found,
        Err(e) => return RigidityOutcome::early(inconclusive(format!("no elliptic found: {e}"))),
    };
    match first_rotation_mismatch(rho1, rho2, params.corpus_radius, params.tol, exec) {
        Ok(Some((word, rot1, rot2))) => {
            return RigidityOutcome::early(RigidityVerdict::Witness { word, rot1, rot2 });
        }
        Ok(None) => {}
        Err(e) => return RigidityOutcome::early(inconclusive(format!("corpus scan failed: {e}"))),
    }

    let mut outcome = RigidityOutcome {
        verdict: inconclusive(""),
        gamma0: Some(found.word.clone()),
        theta: Some(found.theta),
    };
    outcome.verdict = certify(rho1, rho2, &found.word, params);
    outcome
}

fn certify(rho1: &Representation, rho2: &Representation, gamma0: &Word, params: &RigidityParams) -> RigidityVerdict {
    let pair = match normalize_pair(rho1, rho2, gamma0, params.tol) {
        Ok(pair) => pair,
        Err(e) => return inconclusive(format!("normalization failed: {e}")),
    };
    let solution = match solve_conjugator(&pair.rho1, &pair.rho2, params.tol) {
        Ok(s) => s,
        Err(e) => return inconclusive(format!("conjugator solve failed ({}): {e}", e.kind())),
    };
    // rho2' = X rho1' X^-1 with rhoi' = hi rhoi hi^-1, so rho2 = g rho1 g^-1 for
    // g = h2^-1 X h1.
    let g = pair.h2.inverse().compose(&solution.g).compose(&pair.h1);
    let residual = rho1
        .generators()
        .iter()
        .zip(rho2.generators())
        .map(|(a, b)| a.conjugate_by(&g).distance(b))
        .fold(0.0f64, f64::max);
    if residual > params.tol {
        return inconclusive(format!(
            "conjugator residual {residual:e} in original coordinates exceeds {:e}",
            params.tol
        ));
    }
    let traces = match verify_abs_trace_equality_with(&pair, params.corpus_radius, params.tol, params.execution) {
        Ok(t) => t,
        Err(e) => return inconclusive(format!("trace scan failed: {e}")),
    };
    if !traces.within(params.tol) {
        return inconclusive(format!(
            "absolute traces deviate by {:e} on the corpus",
            traces.max_deviation
        ));
    }
    RigidityVerdict::Certificate {
        g,
        max_generator_residual: residual,
        max_corpus_trace_deviation: traces.max_deviation,
        corpus_radius: params.corpus_radius,
    }
}

pub fn rotation_spectrum(rho: &Representation, corpus_radius: usize) -> Result<Vec<(Word, Angle)>, WordError> {
    rotation_spectrum_with(rho, corpus_radius, Execution::default())
}

/// Rotation number of every word in the ball, in enumeration order.
pub fn rotation_spectrum_with(
    rho: &Representation,
    corpus_radius: usize,
    exec: Execution,
) -> Result<Vec<(Word, Angle)>, WordError> {
    let ball = enumerate_ball(rho.len(), corpus_radius)?;
    let angles = exec.map(&ball, |w| {
        rho.evaluate(w).map(|g| g.rotation_number(psl2::DEFAULT_TOL))
    });
    ball.into_iter()
        .zip(angles)
        .map(|(w, a)| a.map(|a| (w, a)))
        .collect()
}

//! Hypothesis checks: Jørgensen's quantity, numerical irrationality of rotation
//! angles, the search for an elliptic element of infinite order, and a
//! three-valued elementarity test.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::exec::Execution;
use crate::psl2::{ClassKind, FixedPoints, ProjectiveElement, DEFAULT_TOL};
use crate::words::{enumerate_ball, Representation, Word, WordError};

pub const DEFAULT_IRRATIONAL_Q: u64 = 10_000;
pub const DEFAULT_IRRATIONAL_DELTA: f64 = 1e-9;

/// Radius of the word ball searched for a non-elementarity witness.
const WITNESS_RADIUS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetectError {
    #[error("no elliptic element of numerically irrational angle within radius {radius}")]
    NotFound { radius: usize },
    #[error(transparent)]
    Word(#[from] WordError),
}

/// `|tr^2 A - 4| + |tr [A,B] - 2|`. Below 1 the group `<A, B>` cannot be both
/// discrete and non-elementary.
pub fn jorgensen_value(a: &ProjectiveElement, b: &ProjectiveElement) -> f64 {
    let (ma, mb) = (a.rep(), b.rep());
    let comm = ma.mul(mb).mul(&ma.inverse()).mul(&mb.inverse());
    let t = ma.trace();
    (t * t - 4.0).abs() + (comm.trace() - 2.0).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IrrationalityVerdict {
    Rational { p: i64, q: i64 },
    NumericallyIrrational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrrationalityReport {
    pub theta_over_pi: f64,
    pub verdict: IrrationalityVerdict,
    /// Convergents `(p, q)` of `theta/pi` with `q <= Q`.
    pub convergents: Vec<(i64, i64)>,
}

/// Declares `theta/pi` rational when a convergent or semiconvergent `p/q` with
/// `q <= q_max` lies within `delta` of it.
pub fn irrationality_test(theta: f64, q_max: u64, delta: f64) -> IrrationalityReport {
    let x = theta / PI;
    let q_max = q_max.min(i64::MAX as u64) as i64;
    let mut convergents = Vec::new();
    let mut verdict = IrrationalityVerdict::NumericallyIrrational;
    let mut hit = |p: i64, q: i64| -> bool {
        if (x - p as f64 / q as f64).abs() <= delta {
            verdict = IrrationalityVerdict::Rational { p, q };
            true
        } else {
            false
        }
    };

    // h_{n} = a_n h_{n-1} + h_{n-2}, k likewise, seeded with (1, 0) and (0, 1).
    let (mut p_prev, mut q_prev) = (1i64, 0i64);
    let (mut p_prev2, mut q_prev2) = (0i64, 1i64);
    let mut rem = x;
    for _ in 0..64 {
        let a = rem.floor();
        if !a.is_finite() || a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        // Semiconvergents (j h_{n-1} + h_{n-2}) / (j k_{n-1} + k_{n-2}), 0 < j < a_n,
        // have denominators strictly between k_{n-2} and k_n.
        if q_prev > 0 {
            let mut found = false;
            for j in 1..a {
                let q = j * q_prev + q_prev2;
                if q > q_max {
                    break;
                }
                if hit(j * p_prev + p_prev2, q) {
                    found = true;
                    break;
                }
            }
            if found {
                break;
            }
        }
        let p = a.saturating_mul(p_prev).saturating_add(p_prev2);
        let q = a.saturating_mul(q_prev).saturating_add(q_prev2);
        if q > q_max {
            break;
        }
        convergents.push((p, q));
        if hit(p, q) {
            break;
        }
        (p_prev2, q_prev2, p_prev, q_prev) = (p_prev, q_prev, p, q);
        let frac = rem - a as f64;
        if frac == 0.0 {
            break;
        }
        rem = 1.0 / frac;
    }
    IrrationalityReport {
        theta_over_pi: x,
        verdict,
        convergents,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipticSearchResult {
    pub word: Word,
    pub theta: f64,
    pub report: IrrationalityReport,
}

pub fn find_infinite_order_elliptic(
    rho: &Representation,
    max_radius: usize,
    q_max: u64,
    delta: f64,
) -> Result<EllipticSearchResult, DetectError> {
    find_infinite_order_elliptic_with(rho, max_radius, q_max, delta, Execution::default())
}

/// First word of the ball (in enumeration order) whose image is elliptic with a
/// numerically irrational half-angle.
pub fn find_infinite_order_elliptic_with(
    rho: &Representation,
    max_radius: usize,
    q_max: u64,
    delta: f64,
    exec: Execution,
) -> Result<EllipticSearchResult, DetectError> {
    let ball = enumerate_ball(rho.len(), max_radius)?;
    exec.find_map_first(&ball[1..], |w| {
        let g = rho.evaluate(w).ok()?;
        if g.class_kind(DEFAULT_TOL) != ClassKind::Elliptic {
            return None;
        }
        let theta = g.rotation_number(DEFAULT_TOL).value() / 2.0;
        let report = irrationality_test(theta, q_max, delta);
        (report.verdict == IrrationalityVerdict::NumericallyIrrational).then(|| EllipticSearchResult {
            word: w.clone(),
            theta,
            report,
        })
    })
    .ok_or(DetectError::NotFound { radius: max_radius })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementaryReason {
    /// Every generator is the identity.
    Trivial,
    CommonInteriorFixedPoint { x: f64, y: f64 },
    CommonBoundaryFixedPoint { angle: f64 },
    InvariantBoundaryPair { first: f64, second: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Elementarity {
    Elementary { reason: ElementaryReason },
    NonElementary { witness: (Word, Word) },
    Unknown,
}

/// Heuristic elementarity check.
///
/// `Elementary` when the non-identity generators share an interior fixed point,
/// share a boundary fixed point, or all preserve the axis endpoints of one of
/// the hyperbolic generators. `NonElementary` when two words `w1, w2` have
/// `|tr [g1, g2] - 2| > tol`, disjoint fixed-point sets and neither image is an
/// involution: a pair-preserving elementary group needs an involution for its
/// commutators to be nontrivial, and point-fixing elementary groups have all
/// commutator traces equal to 2.
pub fn is_elementary(rho: &Representation, tol: f64) -> Elementarity {
    let gens: Vec<&ProjectiveElement> = rho
        .generators()
        .iter()
        .filter(|g| !g.is_identity(tol))
        .collect();
    if gens.is_empty() {
        return Elementarity::Elementary {
            reason: ElementaryReason::Trivial,
        };
    }
    if let Some(reason) = common_fixed_structure(&gens, tol) {
        return Elementarity::Elementary { reason };
    }
    match non_elementary_witness(rho, tol) {
        Some(witness) => Elementarity::NonElementary { witness },
        None => Elementarity::Unknown,
    }
}

fn common_fixed_structure(gens: &[&ProjectiveElement], tol: f64) -> Option<ElementaryReason> {
    let fixed: Vec<FixedPoints> = gens.iter().map(|g| g.fixed_points(DEFAULT_TOL)).collect();

    if let FixedPoints::EllipticFix { point } = fixed[0] {
        let z = point.to_complex();
        if gens
            .iter()
            .all(|g| (g.mobius_act_complex(z) - z).norm() <= tol * (1.0 + z.norm()))
        {
            return Some(ElementaryReason::CommonInteriorFixedPoint {
                x: point.x,
                y: point.y,
            });
        }
    }

    let boundary_candidates: Vec<_> = fixed
        .iter()
        .flat_map(|f| match *f {
            FixedPoints::ParabolicFix { point } => vec![point],
            FixedPoints::HyperbolicFix {
                attracting,
                repelling,
            } => vec![attracting, repelling],
            _ => vec![],
        })
        .collect();
    for p in &boundary_candidates {
        if gens.iter().all(|g| g.boundary_act(*p).distance(*p) <= tol) {
            return Some(ElementaryReason::CommonBoundaryFixedPoint { angle: p.angle });
        }
    }

    for f in &fixed {
        if let FixedPoints::HyperbolicFix {
            attracting: p,
            repelling: q,
        } = *f
        {
            let preserved = gens.iter().all(|g| {
                let (gp, gq) = (g.boundary_act(p), g.boundary_act(q));
                (gp.distance(p) <= tol && gq.distance(q) <= tol)
                    || (gp.distance(q) <= tol && gq.distance(p) <= tol)
            });
            if preserved {
                return Some(ElementaryReason::InvariantBoundaryPair {
                    first: p.angle,
                    second: q.angle,
                });
            }
        }
    }
    None
}

fn non_elementary_witness(rho: &Representation, tol: f64) -> Option<(Word, Word)> {
    let ball = enumerate_ball(rho.len(), WITNESS_RADIUS).ok()?;
    let images: Vec<(Word, ProjectiveElement)> = ball[1..]
        .iter()
        .filter_map(|w| {
            let g = rho.evaluate(w).ok()?;
            (!g.is_identity(tol) && g.abs_trace() > tol).then(|| (w.clone(), g))
        })
        .collect();
    for (i, (w1, g1)) in images.iter().enumerate() {
        for (w2, g2) in &images[i + 1..] {
            let comm = g1.rep().mul(g2.rep()).mul(&g1.rep().inverse()).mul(&g2.rep().inverse());
            if (comm.trace() - 2.0).abs() > tol && fixed_sets_disjoint(g1, g2, tol) {
                return Some((w1.clone(), w2.clone()));
            }
        }
    }
    None
}

fn fixed_sets_disjoint(g1: &ProjectiveElement, g2: &ProjectiveElement, tol: f64) -> bool {
    let fixed_by_other = |f: FixedPoints, other: &ProjectiveElement| match f {
        FixedPoints::AllPoints => true,
        FixedPoints::EllipticFix { point } => {
            let z = point.to_complex();
            (other.mobius_act_complex(z) - z).norm() <= tol * (1.0 + z.norm())
        }
        FixedPoints::ParabolicFix { point } => other.boundary_act(point).distance(point) <= tol,
        FixedPoints::HyperbolicFix {
            attracting,
            repelling,
        } => {
            other.boundary_act(attracting).distance(attracting) <= tol
                || other.boundary_act(repelling).distance(repelling) <= tol
        }
    };
    !fixed_by_other(g1.fixed_points(DEFAULT_TOL), g2) && !fixed_by_other(g2.fixed_points(DEFAULT_TOL), g1)
}

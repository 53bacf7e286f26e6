//! Rotation numbers of circle maps via the Poincaré limit, independent of the
//! closed-form computation in [`crate::psl2`].

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::psl2::{Angle, ProjectiveElement};

/// Grid size used to validate monotonicity and degree one.
pub const VALIDATION_GRID: usize = 1000;
const DEGREE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RotnumError {
    #[error("lift {description:?} decreases between {x0} and {x1}")]
    NotMonotone { description: String, x0: f64, x1: f64 },
    #[error("lift {description:?} fails F(x + 2pi) = F(x) + 2pi at x = {x}")]
    NotDegreeOne { description: String, x: f64 },
}

/// A lift `F: R -> R` of a degree-one circle map in the angle coordinate.
#[derive(Clone)]
pub struct CircleLift {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    description: String,
}

impl fmt::Debug for CircleLift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleLift").field("description", &self.description).finish()
    }
}

impl CircleLift {
    pub fn new<F>(description: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            description: description.into(),
        }
    }

    pub fn identity() -> Self {
        Self::new("identity", |x| x)
    }

    pub fn rigid_rotation(angle: f64) -> Self {
        Self::new(format!("rotation by {angle}"), move |x| x + angle)
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    /// Checks monotonicity and degree one on a uniform grid over `[0, 2pi]`.
    pub fn validate(&self) -> Result<(), RotnumError> {
        let step = TAU / VALIDATION_GRID as f64;
        let grid: Vec<(f64, f64)> = (0..=VALIDATION_GRID)
            .map(|k| {
                let x = k as f64 * step;
                (x, self.eval(x))
            })
            .collect();
        for w in grid.windows(2) {
            if w[1].1 < w[0].1 {
                return Err(RotnumError::NotMonotone {
                    description: self.description.clone(),
                    x0: w[0].0,
                    x1: w[1].0,
                });
            }
        }
        for &(x, y) in &grid {
            if (self.eval(x + TAU) - y - TAU).abs() > DEGREE_TOL {
                return Err(RotnumError::NotDegreeOne {
                    description: self.description.clone(),
                    x,
                });
            }
        }
        Ok(())
    }

    /// Smallest `x` with `F(x) >= y`, found by bisection down to adjacent floats.
    /// For non-injective maps this is the left endpoint of the preimage interval.
    pub fn right_inverse(&self, y: f64) -> f64 {
        let offset = self.eval(0.0).abs() + 2.0 * TAU;
        // F(x) - x - F(0) stays within (-2pi, 2pi), so this brackets the preimage.
        let (mut lo, mut hi) = (y - offset, y + offset);
        loop {
            let mid = lo + (hi - lo) / 2.0;
            if mid <= lo || mid >= hi {
                return hi;
            }
            if self.eval(mid) >= y {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
}

/// Lift of the boundary action of `g`, normalized so that `F(0)` lies in `[0, 2pi)`.
pub fn lift_of_element(g: &ProjectiveElement) -> CircleLift {
    let g = *g;
    let f0 = g.boundary_lift_raw(0.0);
    let shift = TAU * (f0 / TAU).floor();
    CircleLift::new(format!("boundary lift of {g}"), move |x| g.boundary_lift_raw(x) - shift)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationEstimate {
    pub value: Angle,
    pub n_iterations: u64,
    pub error_bound: f64,
}

/// `(F^n(x0) - x0)/n` reduced mod 2pi. The orbit is kept in `[0, 2pi)` and the
/// number of whole turns is counted separately, so long orbits lose no precision.
pub fn poincare_rotation_number(lift: &CircleLift, x0: f64, n: u64) -> RotationEstimate {
    let n = n.max(1);
    let start = x0.rem_euclid(TAU);
    let mut x = start;
    let mut turns: i64 = 0;
    for _ in 0..n {
        let y = lift.eval(x);
        let k = (y / TAU).floor();
        turns += k as i64;
        x = y - k * TAU;
    }
    let displacement = turns as f64 * TAU + (x - start);
    RotationEstimate {
        value: Angle::new(displacement / n as f64),
        n_iterations: n,
        error_bound: TAU / n as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SemiConjugacyReport {
    pub rot_original: Angle,
    pub rot_conjugated: Angle,
    /// Circle distance between the two estimates.
    pub difference: f64,
    pub error_bound: f64,
}

/// Compares the rotation number of `g` with that of `H^+ o G o H`, where `G` is
/// the lift of `g` and `H^+` the left-endpoint right inverse of `h`. Since
/// `H o H^+ = id`, `H` semi-conjugates the new map to `G`; for a homeomorphism
/// `h` this is plain conjugation by `h^-1`.
pub fn semiconjugacy_invariance_check(
    g: &ProjectiveElement,
    h: &CircleLift,
    n: u64,
) -> Result<SemiConjugacyReport, RotnumError> {
    h.validate()?;
    let lift = lift_of_element(g);
    let original = poincare_rotation_number(&lift, 0.0, n);
    let (h1, h2) = (h.clone(), h.clone());
    let conjugated = CircleLift::new(
        format!("semi-conjugate of {} by {}", g, h.description()),
        move |x| h2.right_inverse(lift.eval(h1.eval(x))),
    );
    let transformed = poincare_rotation_number(&conjugated, 0.0, n);
    Ok(SemiConjugacyReport {
        rot_original: original.value,
        rot_conjugated: transformed.value,
        difference: original.value.circle_distance(transformed.value),
        error_bound: original.error_bound,
    })
}

/// Monotone degree-one map that collapses the arc `[0, width]` to the point 0 and
/// stretches the remainder linearly.
pub fn plateau_map(width: f64) -> CircleLift {
    assert!(width > 0.0 && width < TAU);
    CircleLift::new(format!("plateau of width {width}"), move |x| {
        let turns = (x / TAU).floor();
        let r = x - turns * TAU;
        let base = if r <= width {
            0.0
        } else {
            (r - width) * TAU / (TAU - width)
        };
        base + turns * TAU
    })
}

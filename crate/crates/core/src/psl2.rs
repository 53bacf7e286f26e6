//! Elements of PSL(2,R) acting on the upper half-plane and on its boundary circle.
//!
//! A group element is stored as a determinant-one real matrix with a canonical
//! sign, so that `M` and `-M` produce bit-identical values. The boundary circle
//! is parametrized by the angle coordinate of the disk model obtained through the
//! Cayley map `z -> (z - i)/(z + i)`. In that coordinate the rotation
//! `[[cos t, sin t], [-sin t, cos t]]` acts as `phi -> phi + 2t`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeTuple, Serializer};
use thiserror::Error;

/// Default half-width of the parabolic band around `|tr| = 2`.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Allowed deviation of `ad - bc` from 1 when renormalization is off.
pub const DET_TOL: f64 = 1e-9;

/// Entries at or below this magnitude count as zero when breaking sign ties.
const SIGN_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum Psl2Error {
    #[error("determinant {det} is not positive")]
    NonPositiveDeterminant { det: f64 },
    #[error("determinant {det} deviates from 1 by more than {DET_TOL:e}")]
    DeterminantOutOfTolerance { det: f64 },
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("element is not elliptic ({found})")]
    NotElliptic { found: ClassKind },
    #[error("point ({x}, {y}) is not in the upper half-plane")]
    NotInUpperHalfPlane { x: f64, y: f64 },
}

/// Real 2x2 matrix `[[a, b], [c, d]]` with determinant one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnimodularMatrix {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl UnimodularMatrix {
    pub const IDENTITY: Self = Self {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Builds a unimodular matrix. With `renormalize` every entry is divided by
    /// `sqrt(ad - bc)`; without it the determinant must already be within
    /// [`DET_TOL`] of one.
    pub fn new(a: f64, b: f64, c: f64, d: f64, renormalize: bool) -> Result<Self, Psl2Error> {
        if ![a, b, c, d].iter().all(|x| x.is_finite()) {
            return Err(Psl2Error::NonFinite);
        }
        let det = a * d - b * c;
        if det <= 0.0 {
            return Err(Psl2Error::NonPositiveDeterminant { det });
        }
        if renormalize {
            let s = det.sqrt();
            Ok(Self::raw(a / s, b / s, c / s, d / s))
        } else if (det - 1.0).abs() <= DET_TOL {
            Ok(Self::raw(a, b, c, d))
        } else {
            Err(Psl2Error::DeterminantOutOfTolerance { det })
        }
    }

    pub(crate) const fn raw(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::raw(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    /// Adjugate, which is the inverse for determinant one.
    pub fn inverse(&self) -> Self {
        Self::raw(self.d, -self.b, -self.c, self.a)
    }

    pub fn neg(&self) -> Self {
        Self::raw(-self.a, -self.b, -self.c, -self.d)
    }

    /// `self^n` by repeated squaring; negative powers go through the inverse.
    pub fn pow(&self, n: i64) -> Self {
        let mut base = if n < 0 { self.inverse() } else { *self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::IDENTITY;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn max_entry_distance(&self, o: &Self) -> f64 {
        (self.a - o.a)
            .abs()
            .max((self.b - o.b).abs())
            .max((self.c - o.c).abs())
            .max((self.d - o.d).abs())
    }

    /// Distance to `o` up to sign, i.e. in PSL(2,R).
    pub fn projective_distance(&self, o: &Self) -> f64 {
        self.max_entry_distance(o).min(self.max_entry_distance(&o.neg()))
    }

    fn canonical(self) -> Self {
        let tr = self.trace();
        let flip = if tr.abs() > SIGN_TIE_TOL {
            tr < 0.0
        } else {
            [self.a, self.b, self.c]
                .into_iter()
                .find(|x| x.abs() > SIGN_TIE_TOL)
                .is_some_and(|x| x < 0.0)
        };
        if flip {
            self.neg()
        } else {
            self
        }
    }
}

impl Serialize for UnimodularMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&[self.a, self.b])?;
        t.serialize_element(&[self.c, self.d])?;
        t.end()
    }
}

/// Element of PSL(2,R), stored through its canonical sign representative:
/// positive trace, or for traceless matrices a positive first nonzero entry
/// among `(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectiveElement {
    rep: UnimodularMatrix,
}

impl Serialize for ProjectiveElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rep.serialize(s)
    }
}

impl fmt::Display for ProjectiveElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.rep.entries();
        write!(f, "±[[{a}, {b}], [{c}, {d}]]")
    }
}

/// Boundary of the classification bands, without payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassKind::Identity => "identity",
            ClassKind::Elliptic => "elliptic",
            ClassKind::Parabolic => "parabolic",
            ClassKind::Hyperbolic => "hyperbolic",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Identity,
    /// `angle` is the rotation number in `(0, 2pi)`.
    Elliptic { angle: f64 },
    Parabolic,
    Hyperbolic { translation_length: f64 },
}

impl Classification {
    pub fn kind(&self) -> ClassKind {
        match self {
            Classification::Identity => ClassKind::Identity,
            Classification::Elliptic { .. } => ClassKind::Elliptic,
            Classification::Parabolic => ClassKind::Parabolic,
            Classification::Hyperbolic { .. } => ClassKind::Hyperbolic,
        }
    }
}

/// A value of R/2piZ, stored in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(x: f64) -> Self {
        Angle(reduce_angle(x))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Distance on the circle, in `[0, pi]`.
    pub fn circle_distance(self, other: Angle) -> f64 {
        let d = (self.0 - other.0).abs();
        d.min(TAU - d)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub(crate) fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Point `x + iy` of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HalfPlanePoint {
    pub x: f64,
    pub y: f64,
}

impl HalfPlanePoint {
    pub fn new(x: f64, y: f64) -> Result<Self, Psl2Error> {
        if y > 0.0 && x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(Psl2Error::NotInUpperHalfPlane { x, y })
        }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

/// Point of the boundary circle in the disk-model angle coordinate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BoundaryPoint {
    pub angle: f64,
}

impl BoundaryPoint {
    pub fn new(angle: f64) -> Self {
        Self {
            angle: reduce_angle(angle),
        }
    }

    /// Image of the real point `x` under the Cayley map.
    pub fn from_real(x: f64) -> Self {
        let w = Complex64::new(x, -1.0) / Complex64::new(x, 1.0);
        Self::new(w.arg())
    }

    /// Image of the point at infinity.
    pub fn infinity() -> Self {
        Self { angle: 0.0 }
    }

    /// Back to the real line; `None` for the point at infinity.
    pub fn to_real(self) -> Option<f64> {
        if self.angle == 0.0 {
            return None;
        }
        // z = i(1 + w)/(1 - w) is real on the circle: cot(angle/2) up to sign.
        Some(-1.0 / (self.angle / 2.0).tan())
    }

    pub fn distance(self, other: Self) -> f64 {
        Angle(self.angle).circle_distance(Angle(other.angle))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixedPoints {
    AllPoints,
    EllipticFix {
        point: HalfPlanePoint,
    },
    ParabolicFix {
        point: BoundaryPoint,
    },
    HyperbolicFix {
        attracting: BoundaryPoint,
        repelling: BoundaryPoint,
    },
}

impl ProjectiveElement {
    pub fn identity() -> Self {
        Self {
            rep: UnimodularMatrix::IDENTITY,
        }
    }

    pub fn from_entries(a: f64, b: f64, c: f64, d: f64, renormalize: bool) -> Result<Self, Psl2Error> {
        UnimodularMatrix::new(a, b, c, d, renormalize).map(Self::from_matrix)
    }

    pub fn from_matrix(m: UnimodularMatrix) -> Self {
        Self { rep: m.canonical() }
    }

    /// `[[cos t, sin t], [-sin t, cos t]]`, a rotation by `2t` about `i`.
    pub fn rotation(t: f64) -> Self {
        let (s, c) = t.sin_cos();
        Self::from_matrix(UnimodularMatrix::raw(c, s, -s, c))
    }

    pub fn rep(&self) -> &UnimodularMatrix {
        &self.rep
    }

    pub fn compose(&self, h: &Self) -> Self {
        Self::from_matrix(self.rep.mul(&h.rep))
    }

    pub fn inverse(&self) -> Self {
        Self::from_matrix(self.rep.inverse())
    }

    pub fn pow(&self, n: i64) -> Self {
        Self::from_matrix(self.rep.pow(n))
    }

    /// `h * self * h^-1`.
    pub fn conjugate_by(&self, h: &Self) -> Self {
        Self::from_matrix(h.rep.mul(&self.rep).mul(&h.rep.inverse()))
    }

    pub fn abs_trace(&self) -> f64 {
        self.rep.trace().abs()
    }

    pub fn distance(&self, o: &Self) -> f64 {
        self.rep.projective_distance(&o.rep)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.rep.max_entry_distance(&UnimodularMatrix::IDENTITY) <= tol
    }

    pub fn class_kind(&self, tol: f64) -> ClassKind {
        let t = self.abs_trace();
        if self.is_identity(tol) {
            ClassKind::Identity
        } else if t < 2.0 - tol {
            ClassKind::Elliptic
        } else if t > 2.0 + tol {
            ClassKind::Hyperbolic
        } else {
            ClassKind::Parabolic
        }
    }

    pub fn classify(&self, tol: f64) -> Classification {
        match self.class_kind(tol) {
            ClassKind::Identity => Classification::Identity,
            ClassKind::Parabolic => Classification::Parabolic,
            ClassKind::Elliptic => Classification::Elliptic {
                angle: self.elliptic_angle(),
            },
            ClassKind::Hyperbolic => Classification::Hyperbolic {
                translation_length: 2.0 * (self.abs_trace() / 2.0).acosh(),
            },
        }
    }

    /// Rotation number in R/2piZ: zero unless elliptic, and the rotation angle at
    /// the interior fixed point otherwise.
    pub fn rotation_number(&self, tol: f64) -> Angle {
        match self.classify(tol) {
            Classification::Elliptic { angle } => Angle::new(angle),
            _ => Angle::ZERO,
        }
    }

    /// Interior fixed point; only meaningful when `|tr| < 2`.
    fn interior_fixed_point(&self) -> Complex64 {
        let UnimodularMatrix { a, c, d, .. } = self.rep;
        let tr = a + d;
        let disc = (4.0 - tr * tr).max(0.0).sqrt();
        if c == 0.0 {
            // Only reachable for degenerate input inside the elliptic band.
            return Complex64::new(0.0, 1.0);
        }
        let z = Complex64::new(a - d, disc * c.signum()) / (2.0 * c);
        Complex64::new(z.re, z.im.max(f64::MIN_POSITIVE))
    }

    /// `-2 arg(c z0 + d)` at the interior fixed point `z0`, reduced to `[0, 2pi)`.
    fn elliptic_angle(&self) -> f64 {
        let z0 = self.interior_fixed_point();
        let w = Complex64::new(self.rep.c, 0.0) * z0 + self.rep.d;
        reduce_angle(-2.0 * w.arg())
    }

    /// Coefficients `(alpha, beta)` of the disk-model map
    /// `w -> (alpha w + beta)/(conj(beta) w + conj(alpha))`.
    pub(crate) fn disk_coefficients(&self) -> (Complex64, Complex64) {
        let UnimodularMatrix { a, b, c, d } = self.rep;
        (
            Complex64::new((a + d) / 2.0, (b - c) / 2.0),
            Complex64::new((a - d) / 2.0, -(b + c) / 2.0),
        )
    }

    pub fn fixed_points(&self, tol: f64) -> FixedPoints {
        match self.class_kind(tol) {
            ClassKind::Identity => FixedPoints::AllPoints,
            ClassKind::Elliptic => {
                let z = self.interior_fixed_point();
                FixedPoints::EllipticFix {
                    point: HalfPlanePoint { x: z.re, y: z.im },
                }
            }
            ClassKind::Parabolic => {
                let (_, beta) = self.disk_coefficients();
                let UnimodularMatrix { b, c, .. } = self.rep;
                let w = Complex64::new(0.0, b - c) / (2.0 * beta.conj());
                FixedPoints::ParabolicFix {
                    point: BoundaryPoint::new(w.arg()),
                }
            }
            ClassKind::Hyperbolic => {
                let (alpha, beta) = self.disk_coefficients();
                let UnimodularMatrix { b, c, .. } = self.rep;
                let tr = self.rep.trace();
                let root = (tr * tr - 4.0).sqrt();
                let denom = 2.0 * beta.conj();
                let w1 = Complex64::new(root, b - c) / denom;
                let w2 = Complex64::new(-root, b - c) / denom;
                // |f'(w)| = 1/|conj(beta) w + conj(alpha)|^2 < 1 at the attractor.
                let m1 = (beta.conj() * w1 + alpha.conj()).norm();
                let (att, rep) = if m1 > 1.0 { (w1, w2) } else { (w2, w1) };
                FixedPoints::HyperbolicFix {
                    attracting: BoundaryPoint::new(att.arg()),
                    repelling: BoundaryPoint::new(rep.arg()),
                }
            }
        }
    }

    pub fn mobius_act_complex(&self, z: Complex64) -> Complex64 {
        let UnimodularMatrix { a, b, c, d } = self.rep;
        (z * a + b) / (z * c + d)
    }

    pub fn mobius_act(&self, p: HalfPlanePoint) -> HalfPlanePoint {
        let w = self.mobius_act_complex(p.to_complex());
        HalfPlanePoint { x: w.re, y: w.im }
    }

    /// Continuous lift of the boundary action: `x + 2 arg(alpha + beta e^{-ix})`
    /// on the branch continuous in `x`. The constant `2 arg(alpha)` is not
    /// reduced, so callers pick the lift they need.
    pub(crate) fn boundary_lift_raw(&self, x: f64) -> f64 {
        let (alpha, beta) = self.disk_coefficients();
        let ratio = beta / alpha;
        let u = Complex64::new(1.0, 0.0) + ratio * Complex64::from_polar(1.0, -x);
        x + 2.0 * alpha.arg() + 2.0 * u.arg()
    }

    pub fn boundary_act(&self, p: BoundaryPoint) -> BoundaryPoint {
        BoundaryPoint::new(self.boundary_lift_raw(p.angle))
    }

    /// Returns `(h, theta)` with `h g h^-1 = ±[[cos theta, sin theta], [-sin theta, cos theta]]`,
    /// `theta` in `(0, pi)` and `h` sending the fixed point of `g` to `i`.
    pub fn conjugate_to_rotation(&self, tol: f64) -> Result<(ProjectiveElement, f64), Psl2Error> {
        let kind = self.class_kind(tol);
        if kind != ClassKind::Elliptic {
            return Err(Psl2Error::NotElliptic { found: kind });
        }
        let z0 = self.interior_fixed_point();
        let s = z0.im.sqrt();
        let h = ProjectiveElement::from_matrix(UnimodularMatrix::raw(1.0 / s, -z0.re / s, 0.0, s));
        let theta = self.elliptic_angle() / 2.0;
        Ok((h, theta))
    }
}

//! Seeded generators of random elements and representation pairs.
//!
//! Planted pairs use a source representation `{E, H}` with `E` an elliptic of
//! numerically irrational angle and `H` a mildly hyperbolic element (trace in
//! `[2.02, 2.2]`), each conjugated by a near-identity matrix. Keeping generator
//! norms moderate keeps `|tr(gamma R^n)|` inside the elliptic window for a
//! sizeable fraction of exponents. The planted conjugator `k` is drawn from a
//! wider family.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::detect::{irrationality_test, IrrationalityVerdict, DEFAULT_IRRATIONAL_DELTA, DEFAULT_IRRATIONAL_Q};
use crate::psl2::ProjectiveElement;
use crate::words::Representation;

/// Size of the entrywise perturbation in perturbed pairs.
pub const PERTURBATION_RANGE: (f64, f64) = (1e-3, 3e-3);

fn renormalized(a: f64, b: f64, c: f64, d: f64) -> ProjectiveElement {
    ProjectiveElement::from_entries(a, b, c, d, true).expect("positive determinant")
}

/// Entries uniform in `[-2, 2]`, determinant at least 1/2, rescaled to det 1.
pub fn random_conjugator<R: Rng + ?Sized>(rng: &mut R) -> ProjectiveElement {
    loop {
        let [a, b, c, d]: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        if a * d - b * c >= 0.5 {
            return renormalized(a, b, c, d);
        }
    }
}

/// Identity plus entries uniform in `[-0.3, 0.3]`, rescaled to det 1.
pub fn mild_conjugator<R: Rng + ?Sized>(rng: &mut R) -> ProjectiveElement {
    let [a, b, c, d]: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-0.3..0.3));
    renormalized(1.0 + a, b, c, 1.0 + d)
}

/// Rotation by an angle in `(0.05, pi - 0.05)`, randomly conjugated.
pub fn random_elliptic<R: Rng + ?Sized>(rng: &mut R) -> ProjectiveElement {
    let theta = rng.gen_range(0.05..PI - 0.05);
    ProjectiveElement::rotation(theta).conjugate_by(&random_conjugator(rng))
}

pub fn random_parabolic<R: Rng + ?Sized>(rng: &mut R) -> ProjectiveElement {
    let t = rng.gen_range(0.2..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    renormalized(1.0, t, 0.0, 1.0).conjugate_by(&random_conjugator(rng))
}

pub fn random_hyperbolic<R: Rng + ?Sized>(rng: &mut R) -> ProjectiveElement {
    diagonal_with_trace(rng.gen_range(2.1..6.0)).conjugate_by(&random_conjugator(rng))
}

fn diagonal_with_trace(t: f64) -> ProjectiveElement {
    let l = (t + (t * t - 4.0).sqrt()) / 2.0;
    renormalized(l, 0.0, 0.0, 1.0 / l)
}

/// Angle in `(0.25, pi - 0.25)` that passes the irrationality test with the
/// default parameters and whose ratio to pi stays at least `1e-3` away from every
/// fraction with denominator up to 50, so that multiples of the angle spread
/// over the circle within a few hundred steps.
pub fn irrational_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let theta = rng.gen_range(0.25..PI - 0.25);
        let irrational = |q, delta| irrationality_test(theta, q, delta).verdict == IrrationalityVerdict::NumericallyIrrational;
        if irrational(DEFAULT_IRRATIONAL_Q, DEFAULT_IRRATIONAL_DELTA) && irrational(50, 1e-3) {
            return theta;
        }
    }
}

/// Two-generator source `{E, H}` as described in the module docs.
pub fn planted_source<R: Rng + ?Sized>(rng: &mut R) -> Representation {
    loop {
        let e = ProjectiveElement::rotation(irrational_angle(rng)).conjugate_by(&mild_conjugator(rng));
        let h = diagonal_with_trace(rng.gen_range(2.02..2.2)).conjugate_by(&mild_conjugator(rng));
        let commutator = e.compose(&h).compose(&e.inverse()).compose(&h.inverse());
        if (commutator.rep().trace() - 2.0).abs() > 1e-3 {
            return Representation::new(vec![e, h]).expect("two generators");
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledPair {
    pub rho1: Representation,
    pub rho2: Representation,
    /// Planted conjugator: `rho2 = k rho1 k^-1`, before any perturbation or
    /// reflection.
    pub k: ProjectiveElement,
}

pub fn planted_pair<R: Rng + ?Sized>(rng: &mut R) -> SampledPair {
    let rho1 = planted_source(rng);
    let k = random_conjugator(rng);
    SampledPair {
        rho2: rho1.conjugate_by(&k),
        rho1,
        k,
    }
}

/// Planted pair with one `rho2` generator moved by `1e-3..3e-3` per entry.
pub fn perturbed_pair<R: Rng + ?Sized>(rng: &mut R) -> SampledPair {
    let mut pair = planted_pair(rng);
    let target = rng.gen_range(0..pair.rho2.len());
    let signs: [f64; 4] = std::array::from_fn(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
    let eps: [f64; 4] = std::array::from_fn(|i| signs[i] * rng.gen_range(PERTURBATION_RANGE.0..PERTURBATION_RANGE.1));
    let mut index = 0;
    pair.rho2 = pair.rho2.map_generators(|g| {
        let out = if index == target {
            let [a, b, c, d] = g.rep().entries();
            renormalized(a + eps[0], b + eps[1], c + eps[2], d + eps[3])
        } else {
            *g
        };
        index += 1;
        out
    });
    pair
}

/// `rho2 = (r k) rho1 (r k)^-1` with `r = diag(1, -1)`, an orientation-reversing
/// conjugate. In coordinates this negates the off-diagonal entries.
pub fn reflected_pair<R: Rng + ?Sized>(rng: &mut R) -> SampledPair {
    let mut pair = planted_pair(rng);
    pair.rho2 = pair.rho2.map_generators(reflect);
    pair
}

pub fn reflect(g: &ProjectiveElement) -> ProjectiveElement {
    let [a, b, c, d] = g.rep().entries();
    renormalized(a, -b, -c, d)
}

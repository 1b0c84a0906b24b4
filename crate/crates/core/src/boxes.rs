//! Bipartite two-input/two-output boxes as exact 16-entry probability tables.
//!
//! A box is the conditional distribution `P(ab|xy)` for single-bit inputs
//! `x, y` and outputs `a, b`, stored row-major in `(x, y, a, b)` order.
//! All operations are pure; boxes are immutable after construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for constructed / exact quantities.
pub const TOL_EXACT: f64 = 1e-12;
/// Absolute tolerance for fitted / inverted quantities.
pub const TOL_FIT: f64 = 1e-9;

/// CHSH threshold above which communication complexity collapses: `4 * sqrt(2/3)`.
pub const B_CC: f64 = 3.265_986_323_710_904;
/// Tsirelson's bound `2 * sqrt(2)`.
pub const B_Q: f64 = std::f64::consts::SQRT_2 * 2.0;

/// Flat index of `P(ab|xy)` in canonical `(x, y, a, b)` row-major order.
#[inline]
pub const fn table_index(x: u8, y: u8, a: u8, b: u8) -> usize {
    (((x as usize * 2 + y as usize) * 2 + a as usize) * 2) + b as usize
}

/// Correlated-box parameter, constrained to `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::EpsilonOutOfRange(eps));
        }
        Ok(Self(eps))
    }

    /// Clamps float noise within `TOL_EXACT` of the boundary back into `[0, 1]`.
    pub(crate) fn new_clamped(eps: f64) -> Result<Self> {
        if eps < -TOL_EXACT || eps > 1.0 + TOL_EXACT {
            return Err(Error::EpsilonOutOfRange(eps));
        }
        Ok(Self(eps.clamp(0.0, 1.0)))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Coordinates in the PR / anti-PR / Pc section of the polytope:
/// `xi` weights PR, `gamma` weights Pc, `1 - xi - gamma` weights anti-PR.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneCoords {
    pub xi: f64,
    pub gamma: f64,
}

impl PlaneCoords {
    pub fn new(xi: f64, gamma: f64) -> Self {
        Self { xi, gamma }
    }

    /// True when the coordinates satisfy the section constraints
    /// `-1 <= gamma <= 1` and `0 <= xi + gamma <= 1` (and `0 <= xi <= 1`,
    /// which box validity forces).
    pub fn in_constraint_region(&self) -> bool {
        let s = self.xi + self.gamma;
        (-1.0..=1.0).contains(&self.gamma) && (0.0..=1.0).contains(&self.xi) && (0.0..=1.0).contains(&s)
    }
}

/// The four two-point correlators `E_xy = P(a = b|xy) - P(a != b|xy)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Correlators {
    pub e00: f64,
    pub e01: f64,
    pub e10: f64,
    pub e11: f64,
}

impl Correlators {
    pub fn as_array(&self) -> [f64; 4] {
        [self.e00, self.e01, self.e10, self.e11]
    }
}

/// A two-input/two-output box: 16 conditional probabilities.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NsBox {
    p: [f64; 16],
}

impl NsBox {
    /// Builds a box from a raw table in canonical order without validation.
    pub fn from_table(p: [f64; 16]) -> Self {
        Self { p }
    }

    fn from_rule(rule: impl Fn(u8, u8, u8, u8) -> f64) -> Self {
        let mut p = [0.0; 16];
        for x in 0..2u8 {
            for y in 0..2u8 {
                for a in 0..2u8 {
                    for b in 0..2u8 {
                        p[table_index(x, y, a, b)] = rule(x, y, a, b);
                    }
                }
            }
        }
        Self { p }
    }

    /// The PR box: `a ^ b = x & y`, uniform otherwise.
    pub fn pr() -> Self {
        Self::from_rule(|x, y, a, b| if a ^ b == x & y { 0.5 } else { 0.0 })
    }

    /// The correlated local box: outputs always equal.
    pub fn pc() -> Self {
        Self::from_rule(|_, _, a, b| if a ^ b == 0 { 0.5 } else { 0.0 })
    }

    /// The anti-PR box: `a ^ b = (x & y) ^ 1`.
    pub fn anti_pr() -> Self {
        Self::from_rule(|x, y, a, b| if a ^ b == (x & y) ^ 1 { 0.5 } else { 0.0 })
    }

    /// The anti-correlated local box: outputs always differ.
    pub fn pa() -> Self {
        Self::from_rule(|_, _, a, b| if a ^ b == 1 { 0.5 } else { 0.0 })
    }

    /// The fully mixed box: every entry `1/4`.
    pub fn fully_mixed() -> Self {
        Self { p: [0.25; 16] }
    }

    /// The correlated non-local box `eps * PR + (1 - eps) * Pc`.
    pub fn correlated(eps: Epsilon) -> Self {
        let e = eps.value();
        Self::mix(&[Self::pr(), Self::pc()], &[e, 1.0 - e])
            .expect("convex mixture of valid boxes")
    }

    /// Reconstructs the plane box `xi * PR + gamma * Pc + (1 - xi - gamma) * anti-PR`.
    ///
    /// Fails if any resulting entry is below the `-1e-12` floor.
    pub fn from_plane(c: PlaneCoords) -> Result<Self> {
        Self::mix(
            &[Self::pr(), Self::pc(), Self::anti_pr()],
            &[c.xi, c.gamma, 1.0 - c.xi - c.gamma],
        )
    }

    /// Entrywise affine combination. Weights must sum to 1; they may be
    /// negative (the anti-correlated box is `PR + anti-PR - Pc`). Entries in
    /// `(-1e-12, 0)` are clamped to zero; anything lower is an error.
    pub fn mix(boxes: &[NsBox], weights: &[f64]) -> Result<Self> {
        if boxes.len() != weights.len() {
            return Err(Error::WeightCountMismatch {
                boxes: boxes.len(),
                weights: weights.len(),
            });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > TOL_EXACT {
            return Err(Error::WeightSumMismatch(sum));
        }
        let mut p = [0.0; 16];
        for (b, &w) in boxes.iter().zip(weights) {
            for (dst, src) in p.iter_mut().zip(&b.p) {
                *dst += w * src;
            }
        }
        for (i, e) in p.iter_mut().enumerate() {
            if *e < -TOL_EXACT {
                return Err(Error::NegativeEntry { index: i, value: *e });
            }
            if *e < 0.0 {
                *e = 0.0;
            }
        }
        Ok(Self { p })
    }

    #[inline]
    pub fn prob(&self, x: u8, y: u8, a: u8, b: u8) -> f64 {
        self.p[table_index(x, y, a, b)]
    }

    /// The raw table in canonical `(x, y, a, b)` order.
    #[inline]
    pub fn table(&self) -> &[f64; 16] {
        &self.p
    }

    /// Largest absolute entrywise difference to another box.
    pub fn max_abs_diff(&self, other: &NsBox) -> f64 {
        self.p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn correlators(&self) -> Correlators {
        let e = |x: u8, y: u8| {
            let mut v = 0.0;
            for a in 0..2u8 {
                for b in 0..2u8 {
                    let sign = if a == b { 1.0 } else { -1.0 };
                    v += sign * self.prob(x, y, a, b);
                }
            }
            v
        };
        Correlators {
            e00: e(0, 0),
            e01: e(0, 1),
            e10: e(1, 0),
            e11: e(1, 1),
        }
    }

    /// The canonical CHSH polynomial `E00 + E01 + E10 - E11`.
    pub fn chsh(&self) -> f64 {
        let c = self.correlators();
        c.e00 + c.e01 + c.e10 - c.e11
    }

    /// All 8 sign/relabeling variants of the CHSH polynomial: for each
    /// position of the single minus sign, the value and its negation.
    pub fn chsh_all8(&self) -> [f64; 8] {
        let e = self.correlators().as_array();
        let mut out = [0.0; 8];
        for (k, chunk) in out.chunks_mut(2).enumerate() {
            let v: f64 = e
                .iter()
                .enumerate()
                .map(|(j, ej)| if j == k { -ej } else { *ej })
                .sum();
            chunk[0] = v;
            chunk[1] = -v;
        }
        out
    }

    /// Normalization and non-negativity, both within `1e-12`.
    pub fn is_valid(&self) -> bool {
        if self.p.iter().any(|&e| e < -TOL_EXACT) {
            return false;
        }
        for x in 0..2u8 {
            for y in 0..2u8 {
                let s: f64 = (0..2u8)
                    .flat_map(|a| (0..2u8).map(move |b| (a, b)))
                    .map(|(a, b)| self.prob(x, y, a, b))
                    .sum();
                if (s - 1.0).abs() > TOL_EXACT {
                    return false;
                }
            }
        }
        true
    }

    /// Largest deviation between same-side marginals that should agree
    /// under no-signaling. Zero (up to float noise) for non-signaling boxes.
    pub fn signaling_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for u in 0..2u8 {
            for o in 0..2u8 {
                // Alice's marginal P(a|x) must not depend on y.
                let m0: f64 = (0..2u8).map(|b| self.prob(u, 0, o, b)).sum();
                let m1: f64 = (0..2u8).map(|b| self.prob(u, 1, o, b)).sum();
                worst = worst.max((m0 - m1).abs());
                // Bob's marginal P(b|y) must not depend on x.
                let n0: f64 = (0..2u8).map(|a| self.prob(0, u, a, o)).sum();
                let n1: f64 = (0..2u8).map(|a| self.prob(1, u, a, o)).sum();
                worst = worst.max((n0 - n1).abs());
            }
        }
        worst
    }

    pub fn is_nonsignaling(&self) -> bool {
        self.signaling_deviation() <= TOL_EXACT
    }

    /// Membership in the local polytope via its complete facet description
    /// for this scenario: positivity plus all 8 CHSH variants at most 2.
    pub fn is_local(&self) -> bool {
        self.is_valid()
            && self.is_nonsignaling()
            && self.chsh_all8().iter().all(|&v| v <= 2.0 + TOL_FIT)
    }

    /// Alice's marginal `P(a|x)`; meaningful for non-signaling boxes
    /// (evaluated at `y = 0`).
    pub(crate) fn alice_marginal(&self, x: u8, a: u8) -> f64 {
        (0..2u8).map(|b| self.prob(x, 0, a, b)).sum()
    }

    /// Bob's marginal `P(b|y)`, evaluated at `x = 0`.
    pub(crate) fn bob_marginal(&self, y: u8, b: u8) -> f64 {
        (0..2u8).map(|a| self.prob(0, y, a, b)).sum()
    }

    /// The local randomization protocol: both parties draw shared random
    /// bits `(alpha, beta, gamma)` and relabel
    /// `x -> x ^ alpha`, `y -> y ^ beta`,
    /// `a -> a ^ (beta & x) ^ (alpha & beta) ^ gamma`,
    /// `b -> b ^ (alpha & y) ^ gamma`.
    /// The average over all 8 draws is isotropic with the same CHSH value.
    pub fn depolarize(&self) -> Result<Self> {
        self.ensure_nonsignaling()?;
        let mut p = [0.0; 16];
        for alpha in 0..2u8 {
            for beta in 0..2u8 {
                for gamma in 0..2u8 {
                    for x in 0..2u8 {
                        for y in 0..2u8 {
                            for a in 0..2u8 {
                                for b in 0..2u8 {
                                    let at = a ^ (beta & x) ^ (alpha & beta) ^ gamma;
                                    let bt = b ^ (alpha & y) ^ gamma;
                                    p[table_index(x, y, a, b)] +=
                                        self.prob(x ^ alpha, y ^ beta, at, bt) / 8.0;
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(Self { p })
    }

    pub(crate) fn ensure_nonsignaling(&self) -> Result<()> {
        if !self.is_valid() {
            return Err(Error::InvalidBox("normalization or non-negativity"));
        }
        let dev = self.signaling_deviation();
        if dev > TOL_EXACT {
            return Err(Error::Signaling(dev));
        }
        Ok(())
    }

    /// Inverts `from_plane` by least squares over the affine span of
    /// {PR, anti-PR, Pc}. Boxes off the plane (fit residual above `1e-9`,
    /// e.g. boxes with biased marginals) are rejected.
    pub fn to_plane_coords(&self) -> Result<PlaneCoords> {
        let pr = Self::pr();
        let apr = Self::anti_pr();
        let pc = Self::pc();
        let u: Vec<f64> = pr.p.iter().zip(&apr.p).map(|(a, b)| a - b).collect();
        let v: Vec<f64> = pc.p.iter().zip(&apr.p).map(|(a, b)| a - b).collect();
        let w: Vec<f64> = self.p.iter().zip(&apr.p).map(|(a, b)| a - b).collect();
        let dot = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(a, b)| a * b).sum::<f64>();
        let (uu, uv, vv) = (dot(&u, &u), dot(&u, &v), dot(&v, &v));
        let (uw, vw) = (dot(&u, &w), dot(&v, &w));
        let det = uu * vv - uv * uv;
        let xi = (uw * vv - vw * uv) / det;
        let gamma = (uu * vw - uv * uw) / det;
        let coords = PlaneCoords::new(xi, gamma);
        let fit = Self::mix(
            &[pr, pc, apr],
            &[xi, gamma, 1.0 - xi - gamma],
        );
        let residual = match fit {
            Ok(f) => f.max_abs_diff(self),
            Err(_) => f64::INFINITY,
        };
        if residual > TOL_FIT {
            return Err(Error::OffPlane(residual));
        }
        Ok(coords)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_box_eq(a: &NsBox, b: &NsBox, tol: f64) {
        let d = a.max_abs_diff(b);
        assert!(d <= tol, "boxes differ by {d:.3e}");
    }

    #[test]
    fn pr_table_and_chsh() {
        let pr = NsBox::pr();
        assert_eq!(pr.prob(0, 0, 0, 0), 0.5);
        assert_eq!(pr.prob(0, 0, 0, 1), 0.0);
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let expect = if a ^ b == x & y { 0.5 } else { 0.0 };
                        assert_eq!(pr.prob(x, y, a, b), expect);
                    }
                }
            }
        }
        assert_eq!(pr.chsh(), 4.0);
        assert!(pr.is_valid() && pr.is_nonsignaling());
    }

    #[test]
    fn named_box_chsh_values() {
        assert_eq!(NsBox::pc().chsh(), 2.0);
        assert_eq!(NsBox::anti_pr().chsh(), -4.0);
        assert_eq!(NsBox::pa().chsh(), -2.0);
        assert_eq!(NsBox::fully_mixed().chsh(), 0.0);
    }

    #[test]
    fn correlator_values() {
        assert_eq!(NsBox::pr().correlators().as_array(), [1.0, 1.0, 1.0, -1.0]);
        assert_eq!(NsBox::pc().correlators().as_array(), [1.0, 1.0, 1.0, 1.0]);
        assert_eq!(NsBox::fully_mixed().correlators().as_array(), [0.0; 4]);
    }

    #[test]
    fn chsh_all8_max_for_anti_pr() {
        let v = NsBox::anti_pr().chsh_all8();
        assert_eq!(v.iter().cloned().fold(f64::MIN, f64::max), 4.0);
        assert_eq!(NsBox::anti_pr().chsh(), -4.0);
    }

    #[test]
    fn correlated_family() {
        assert_box_eq(&NsBox::correlated(Epsilon::new(1.0).unwrap()), &NsBox::pr(), 0.0);
        assert_box_eq(&NsBox::correlated(Epsilon::new(0.0).unwrap()), &NsBox::pc(), 0.0);
        for eps in [0.0, 0.25, 0.5, 1.0] {
            let b = NsBox::correlated(Epsilon::new(eps).unwrap());
            assert!((b.chsh() - 2.0 * (eps + 1.0)).abs() <= TOL_EXACT);
        }
        assert!(Epsilon::new(1.5).is_err());
        assert!(Epsilon::new(-0.1).is_err());
    }

    #[test]
    fn plane_reconstruction() {
        assert_box_eq(
            &NsBox::from_plane(PlaneCoords::new(1.0, 0.0)).unwrap(),
            &NsBox::pr(),
            0.0,
        );
        assert_box_eq(
            &NsBox::from_plane(PlaneCoords::new(0.5, 0.0)).unwrap(),
            &NsBox::fully_mixed(),
            0.0,
        );
        // Pa = PR + anti-PR - Pc lies in the plane outside the convex hull.
        let pa = NsBox::mix(
            &[NsBox::pr(), NsBox::anti_pr(), NsBox::pc()],
            &[1.0, 1.0, -1.0],
        )
        .unwrap();
        assert_box_eq(&pa, &NsBox::pa(), 0.0);
        assert!(NsBox::from_plane(PlaneCoords::new(1.5, 0.0)).is_err());
    }

    #[test]
    fn mix_validation() {
        assert!(matches!(
            NsBox::mix(&[NsBox::pr()], &[0.5, 0.5]),
            Err(Error::WeightCountMismatch { .. })
        ));
        assert!(matches!(
            NsBox::mix(&[NsBox::pr()], &[0.9]),
            Err(Error::WeightSumMismatch(_))
        ));
        assert!(matches!(
            NsBox::mix(&[NsBox::pr(), NsBox::pc()], &[2.0, -1.0]),
            Err(Error::NegativeEntry { .. })
        ));
        let half = NsBox::mix(&[NsBox::pr(), NsBox::pc()], &[0.5, 0.5]).unwrap();
        assert_box_eq(&half, &NsBox::correlated(Epsilon::new(0.5).unwrap()), 0.0);
    }

    #[test]
    fn locality_predicate() {
        assert!(NsBox::pc().is_local());
        assert!(NsBox::pa().is_local());
        assert!(!NsBox::correlated(Epsilon::new(0.01).unwrap()).is_local());
        assert!(!NsBox::pr().is_local());
    }

    #[test]
    fn signaling_table_detected() {
        // Alice's output copies y: maximally signaling.
        let sig = NsBox::from_rule(|_, y, a, b| if a == y && b == 0 { 1.0 } else { 0.0 });
        assert!(sig.is_valid());
        assert!(!sig.is_nonsignaling());
        assert!(!sig.is_local());
    }

    #[test]
    fn depolarize_pr_invariant() {
        assert_box_eq(&NsBox::pr().depolarize().unwrap(), &NsBox::pr(), 0.0);
    }

    #[test]
    fn depolarize_pc_is_three_quarters_pr() {
        let expect = NsBox::mix(&[NsBox::pr(), NsBox::anti_pr()], &[0.75, 0.25]).unwrap();
        assert_box_eq(&NsBox::pc().depolarize().unwrap(), &expect, 0.0);
    }

    #[test]
    fn depolarize_keeps_chsh() {
        let b = NsBox::from_plane(PlaneCoords::new(0.4, 0.3)).unwrap();
        let d = b.depolarize().unwrap();
        assert!((b.chsh() - d.chsh()).abs() <= TOL_EXACT);
        // isotropic output: uniform marginals, symmetric correlators
        for u in 0..2 {
            for o in 0..2 {
                assert!((d.alice_marginal(u, o) - 0.5).abs() <= TOL_EXACT);
                assert!((d.bob_marginal(u, o) - 0.5).abs() <= TOL_EXACT);
            }
        }
        let c = d.correlators();
        assert!((c.e00 - c.e01).abs() <= TOL_EXACT);
        assert!((c.e00 - c.e10).abs() <= TOL_EXACT);
        assert!((c.e00 + c.e11).abs() <= TOL_EXACT);
    }

    #[test]
    fn depolarize_rejects_signaling() {
        let sig = NsBox::from_rule(|_, y, a, b| if a == y && b == 0 { 1.0 } else { 0.0 });
        assert!(matches!(sig.depolarize(), Err(Error::Signaling(_))));
    }

    #[test]
    fn plane_coords_round_trip() {
        assert_eq!(
            NsBox::pr().to_plane_coords().unwrap(),
            PlaneCoords::new(1.0, 0.0)
        );
        let one = NsBox::fully_mixed().to_plane_coords().unwrap();
        assert!((one.xi - 0.5).abs() <= TOL_FIT && one.gamma.abs() <= TOL_FIT);
        for k in 0..=10 {
            let eps = k as f64 / 10.0;
            let c = NsBox::correlated(Epsilon::new(eps).unwrap())
                .to_plane_coords()
                .unwrap();
            assert!((c.xi - eps).abs() <= TOL_FIT);
            assert!((c.gamma - (1.0 - eps)).abs() <= TOL_FIT);
        }
    }

    #[test]
    fn off_plane_box_rejected() {
        // Deterministic local box with biased marginals: a = 0, b = 0.
        let det = NsBox::from_rule(|_, _, a, b| if a == 0 && b == 0 { 1.0 } else { 0.0 });
        match det.to_plane_coords() {
            Err(Error::OffPlane(r)) => assert!(r > TOL_FIT),
            other => panic!("expected off-plane rejection, got {other:?}"),
        }
    }

    #[test]
    fn plane_chsh_closed_form() {
        // chsh(plane(xi, gamma)) = 8 xi + 6 gamma - 4 wherever the box exists
        for i in 0..21 {
            for j in 0..21 {
                let xi = i as f64 / 20.0;
                let gamma = -1.0 + j as f64 / 10.0;
                let c = PlaneCoords::new(xi, gamma);
                if !c.in_constraint_region() {
                    continue;
                }
                if let Ok(b) = NsBox::from_plane(c) {
                    let expect = 8.0 * xi + 6.0 * gamma - 4.0;
                    assert!((b.chsh() - expect).abs() <= TOL_EXACT);
                }
            }
        }
    }

    #[test]
    fn constants() {
        assert!((B_CC - 4.0 * (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((B_Q - 8.0f64.sqrt()).abs() < 1e-15);
        assert!((B_CC - 3.2659863).abs() < 1e-7);
    }
}

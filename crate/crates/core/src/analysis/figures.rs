//! Tabulated data behind the distillation curve and the section map.

use serde::Serialize;

use crate::boxes::{Epsilon, NsBox, PlaneCoords};
use crate::dynamics::{iterate_eps, StopRule};
use crate::error::Result;
use crate::wiring::{compose, ProtocolWiring};

/// One point of the CHSH-out vs CHSH-in curve, from box-level composition.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DistillCurveRow {
    pub eps: f64,
    pub chsh_i: f64,
    pub chsh_f: f64,
}

/// `points` rows with `eps` on a uniform grid of `[0, 1]`; `chsh_f` comes
/// from composing the boxes, not from the closed form.
pub fn distill_curve(points: usize) -> Result<Vec<DistillCurveRow>> {
    assert!(points >= 2);
    let w = ProtocolWiring::distillation();
    (0..points)
        .map(|k| {
            let e = k as f64 / (points - 1) as f64;
            let b = NsBox::correlated(Epsilon::new(e)?);
            let composed = compose(&b, &b, &w)?;
            Ok(DistillCurveRow { eps: e, chsh_i: b.chsh(), chsh_f: composed.chsh() })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct StaircaseRow {
    pub step: usize,
    pub eps: f64,
    pub chsh: f64,
}

/// Successive iterations of the 1-D map from `start`, recorded until the
/// CHSH value is within 1e-9 of 4 or `max_steps` is reached.
pub fn distill_staircase(start: Epsilon, max_steps: usize) -> Vec<StaircaseRow> {
    let mut stop = StopRule::chsh_above(4.0 - 1e-9);
    stop.max_steps = max_steps;
    let t = iterate_eps(start, &stop);
    t.points
        .iter()
        .zip(&t.chsh)
        .enumerate()
        .map(|(step, (p, c))| StaircaseRow { step, eps: p.value(), chsh: *c })
        .collect()
}

/// The curve separating boxes distilled by a single iteration: zeros of
/// `chsh(map(c)) - chsh(c)`, a conic in the section; solved per `xi` as
/// `12 g^2 + (27 xi - 19) g + (14 xi^2 - 21 xi + 7) = 0`.
pub fn one_step_boundary(xi_samples: usize) -> Vec<PlaneCoords> {
    assert!(xi_samples >= 2);
    let mut out = Vec::new();
    for i in 0..xi_samples {
        let xi = i as f64 / (xi_samples - 1) as f64;
        let (a, b, c) = (12.0, 27.0 * xi - 19.0, 14.0 * xi * xi - 21.0 * xi + 7.0);
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            continue;
        }
        let root = disc.sqrt();
        for gamma in [(-b - root) / (2.0 * a), (-b + root) / (2.0 * a)] {
            let p = PlaneCoords::new(xi, gamma);
            if p.in_constraint_region() && NsBox::from_plane(p).is_ok() {
                out.push(p);
            }
        }
    }
    out.sort_by(|p, q| {
        p.xi.partial_cmp(&q.xi)
            .unwrap()
            .then(p.gamma.partial_cmp(&q.gamma).unwrap())
    });
    out
}

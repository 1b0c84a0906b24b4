//! Quantum-compatibility of correlator points and the boundary curve inside
//! the polytope section. The criterion (for unbiased boxes) requires
//! `|asin E00 + asin E01 + asin E10 - asin E11| <= pi` under every placement
//! of the minus sign. Emitted for plotting; not part of the acceptance gate.

use crate::boxes::{Correlators, NsBox, PlaneCoords};

/// Correlator test for membership in the quantum set (unbiased marginals).
pub fn is_quantum_compatible(c: &Correlators) -> bool {
    let asin: Vec<f64> = c
        .as_array()
        .iter()
        .map(|e| e.clamp(-1.0, 1.0).asin())
        .collect();
    let total: f64 = asin.iter().sum();
    (0..4).all(|k| (total - 2.0 * asin[k]).abs() <= std::f64::consts::PI + 1e-12)
}

fn plane_quantum(c: PlaneCoords) -> Option<bool> {
    let b = NsBox::from_plane(c).ok()?;
    Some(is_quantum_compatible(&b.correlators()))
}

/// Upper boundary of the quantum region: for each sampled `xi`, the largest
/// `gamma` in the section whose box passes the correlator criterion,
/// located by bisection.
pub fn quantum_boundary(xi_samples: usize) -> Vec<PlaneCoords> {
    assert!(xi_samples >= 2);
    let mut out = Vec::with_capacity(xi_samples);
    for i in 0..xi_samples {
        let xi = i as f64 / (xi_samples - 1) as f64;
        let lo = -xi.min(1.0); // gamma >= -xi keeps xi + gamma >= 0
        let hi = 1.0 - xi;
        if plane_quantum(PlaneCoords::new(xi, hi)) == Some(true) {
            out.push(PlaneCoords::new(xi, hi));
            continue;
        }
        // coarse scan down for a quantum point, then bisect the transition
        let steps = 256;
        let mut inside = None;
        let mut outside = hi;
        for s in 1..=steps {
            let g = hi + (lo - hi) * s as f64 / steps as f64;
            match plane_quantum(PlaneCoords::new(xi, g)) {
                Some(true) => {
                    inside = Some(g);
                    break;
                }
                _ => outside = g,
            }
        }
        let Some(mut inside) = inside else {
            continue; // no quantum point on this line at this resolution
        };
        for _ in 0..60 {
            let mid = (inside + outside) / 2.0;
            if plane_quantum(PlaneCoords::new(xi, mid)) == Some(true) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        out.push(PlaneCoords::new(xi, inside));
    }
    out
}

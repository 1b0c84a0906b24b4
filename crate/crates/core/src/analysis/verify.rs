use serde::Serialize;

use crate::boxes::{Epsilon, NsBox};
use crate::dynamics::map_eps;
use crate::error::Result;
use crate::wiring::{compose, ProtocolWiring};

/// Outcome of the box-level vs map-level identity sweep.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IdentityReport {
    pub grid_n: usize,
    pub max_deviation: f64,
    pub worst_eps: f64,
}

impl IdentityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_deviation <= tol
    }
}

/// Checks, on a `grid_n`-point grid of `[0, 1]`, that composing two copies of
/// the correlated box under the distillation protocol equals the correlated
/// box at the mapped parameter, entrywise.
pub fn verify_protocol_identity(grid_n: usize) -> Result<IdentityReport> {
    assert!(grid_n >= 2, "grid needs at least the two endpoints");
    let w = ProtocolWiring::distillation();
    let mut max_deviation = 0.0f64;
    let mut worst_eps = 0.0f64;
    for k in 0..grid_n {
        let e = k as f64 / (grid_n - 1) as f64;
        let eps = Epsilon::new(e)?;
        let b = NsBox::correlated(eps);
        let composed = compose(&b, &b, &w)?;
        let mapped = NsBox::correlated(map_eps(eps));
        let dev = composed.max_abs_diff(&mapped);
        if dev > max_deviation {
            max_deviation = dev;
            worst_eps = e;
        }
    }
    Ok(IdentityReport { grid_n, max_deviation, worst_eps })
}

//! Classification of the polytope section by collapse behavior under
//! iterated distillation.

use rayon::prelude::*;
use serde::Serialize;

use crate::boxes::{NsBox, PlaneCoords, B_CC};
use crate::dynamics::{plane_step_unchecked, MapState};
use crate::error::{Error, Result};

pub const DEFAULT_RESOLUTION: usize = 401;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_WIDTH_SAMPLES: usize = 4001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionClass {
    Invalid,
    Local,
    CollapsesDirectly,
    CollapsesByDistillation,
    NonCollapsing,
}

impl std::fmt::Display for RegionClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegionClass::Invalid => "invalid",
            RegionClass::Local => "local",
            RegionClass::CollapsesDirectly => "collapses_directly",
            RegionClass::CollapsesByDistillation => "collapses_by_distillation",
            RegionClass::NonCollapsing => "non_collapsing",
        };
        f.write_str(s)
    }
}

/// One grid point of the section map. `chsh0` is NaN for invalid cells.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RegionCell {
    #[serde(flatten)]
    pub coords: PlaneCoords,
    pub chsh0: f64,
    pub class: RegionClass,
    pub one_step_distilled: bool,
    pub n_to_collapse: Option<u32>,
}

/// First iteration count at which the orbit's CHSH exceeds `B_CC`
/// (0 when already above), or None within `max_iter` steps.
fn steps_to_collapse(start: PlaneCoords, max_iter: usize) -> Option<u32> {
    let mut c = start;
    for n in 0..=max_iter {
        if c.chsh() > B_CC {
            return Some(n as u32);
        }
        c = plane_step_unchecked(c);
    }
    None
}

/// Classifies one plane point, iterating the map up to `max_iter` steps.
///
/// Fixed points of the map are labeled by their dynamics (they never
/// collapse); other local cells are labeled `local`.
pub fn classify_cell(coords: PlaneCoords, max_iter: usize) -> RegionCell {
    let boxed = if coords.in_constraint_region() {
        NsBox::from_plane(coords).ok()
    } else {
        None
    };
    let Some(b) = boxed else {
        return RegionCell {
            coords,
            chsh0: f64::NAN,
            class: RegionClass::Invalid,
            one_step_distilled: false,
            n_to_collapse: None,
        };
    };
    let chsh0 = b.chsh();
    let stepped = plane_step_unchecked(coords);
    let one_step_distilled = stepped.chsh() > chsh0;
    let is_fixed_point = stepped.distance(coords) <= 1e-12;
    if b.is_local() && !is_fixed_point {
        return RegionCell {
            coords,
            chsh0,
            class: RegionClass::Local,
            one_step_distilled,
            n_to_collapse: None,
        };
    }
    let n_to_collapse = steps_to_collapse(coords, max_iter);
    let class = match n_to_collapse {
        Some(0) => RegionClass::CollapsesDirectly,
        Some(_) => RegionClass::CollapsesByDistillation,
        None => RegionClass::NonCollapsing,
    };
    RegionCell { coords, chsh0, class, one_step_distilled, n_to_collapse }
}

/// Rasterizes the section over `xi in [0, 1]`, `gamma in [-1, 1]` at
/// `resolution` points per axis, xi-major.
pub fn region_classify(resolution: usize, max_iter: usize) -> Vec<RegionCell> {
    assert!(resolution >= 2, "grid needs at least the corners");
    let coords: Vec<PlaneCoords> = (0..resolution)
        .flat_map(|i| {
            let xi = i as f64 / (resolution - 1) as f64;
            (0..resolution).map(move |j| {
                let gamma = -1.0 + 2.0 * j as f64 / (resolution - 1) as f64;
                PlaneCoords::new(xi, gamma)
            })
        })
        .collect();
    coords
        .into_par_iter()
        .map(|c| classify_cell(c, max_iter))
        .collect()
}

/// Length of the collapsing portion of the constant-CHSH line at
/// `chsh_level`, measured by uniform sampling.
pub fn region_width_probe(chsh_level: f64) -> Result<f64> {
    region_width_probe_with(chsh_level, DEFAULT_WIDTH_SAMPLES, DEFAULT_MAX_ITER)
}

pub fn region_width_probe_with(
    chsh_level: f64,
    samples: usize,
    max_iter: usize,
) -> Result<f64> {
    if !(chsh_level > 2.0 && chsh_level < 4.0) {
        return Err(Error::DegenerateLevel(chsh_level));
    }
    assert!(samples >= 2);
    // On the line 8 xi + 6 gamma - 4 = level the section constraints reduce
    // to xi in [(level - 2) / 2, 1].
    let xi_lo = (chsh_level - 2.0) / 2.0;
    let xi_hi = 1.0;
    let gamma_at = |xi: f64| (chsh_level + 4.0 - 8.0 * xi) / 6.0;
    let collapsing: u64 = (0..samples)
        .into_par_iter()
        .map(|k| {
            let xi = xi_lo + (xi_hi - xi_lo) * k as f64 / (samples - 1) as f64;
            let c = PlaneCoords::new(xi, gamma_at(xi));
            if !c.in_constraint_region() || NsBox::from_plane(c).is_err() {
                return 0u64;
            }
            u64::from(steps_to_collapse(c, max_iter).is_some())
        })
        .sum();
    // arc length per sample along the line, slope dgamma/dxi = -4/3
    let seg = (1.0f64 + (8.0 / 6.0f64).powi(2)).sqrt() * (xi_hi - xi_lo) / (samples - 1) as f64;
    Ok(collapsing as f64 * seg)
}

/// Counts collapsing cells whose segment toward the PR vertex contains a
/// non-collapsing point of no smaller initial CHSH. The containment is not
/// a theorem; callers report the count instead of assuming zero.
pub fn monotone_region_violations(
    resolution: usize,
    segment_samples: usize,
    max_iter: usize,
) -> u64 {
    let cells = region_classify(resolution, max_iter);
    cells
        .par_iter()
        .filter(|cell| {
            matches!(
                cell.class,
                RegionClass::CollapsesDirectly | RegionClass::CollapsesByDistillation
            )
        })
        .map(|cell| {
            let (xi, gamma) = (cell.coords.xi, cell.coords.gamma);
            let mut violated = 0u64;
            for s in 1..=segment_samples {
                let t = s as f64 / segment_samples as f64;
                let probe = PlaneCoords::new(xi + t * (1.0 - xi), gamma * (1.0 - t));
                if probe.chsh() < cell.chsh0 - 1e-12 {
                    continue;
                }
                if !probe.in_constraint_region() || NsBox::from_plane(probe).is_err() {
                    continue;
                }
                if steps_to_collapse(probe, max_iter).is_none() {
                    violated = 1;
                    break;
                }
            }
            violated
        })
        .sum()
}

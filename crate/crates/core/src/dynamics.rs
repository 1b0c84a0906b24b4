//! Closed-form distillation maps, trajectories, fixed points and stability.
//!
//! Iterating the two-copy protocol on `2^n` copies of a box induces a
//! discrete map: one-dimensional on the correlated family,
//! `eps' = eps (3 - eps) / 2`, and two-dimensional on the polytope section,
//! with the plane map restricting to the 1-D map on the `xi + gamma = 1`
//! line. Stability is read off the Jacobian eigenvalue moduli.

use serde::Serialize;

use crate::boxes::{Epsilon, PlaneCoords, TOL_EXACT};
use crate::error::{Error, Result};

/// One distillation step on the correlated family: `eps (3 - eps) / 2`.
pub fn map_eps(eps: Epsilon) -> Epsilon {
    let e = eps.value();
    Epsilon::new_clamped(e * (3.0 - e) / 2.0).expect("map is closed on [0, 1]")
}

/// CHSH of the distilled box after one step: `3 eps - eps^2 + 2`,
/// identically `2 (map_eps(eps) + 1)`.
pub fn chsh_after(eps: Epsilon) -> f64 {
    let e = eps.value();
    3.0 * e - e * e + 2.0
}

/// Derivative of the 1-D map, `(3 - 2 eps) / 2`.
pub fn eps_map_derivative(eps: Epsilon) -> f64 {
    (3.0 - 2.0 * eps.value()) / 2.0
}

pub(crate) fn plane_step_unchecked(c: PlaneCoords) -> PlaneCoords {
    let (xi, g) = (c.xi, c.gamma);
    PlaneCoords::new(
        xi * xi + 1.5 * xi * g + 0.5 * (1.0 - xi - g),
        xi * xi + 2.0 * g * g + 2.5 * xi * g - 1.5 * (xi + g) + 0.5,
    )
}

/// One distillation step on the polytope section. The coordinates must
/// reconstruct a valid box.
pub fn map_plane(c: PlaneCoords) -> Result<PlaneCoords> {
    ensure_plane_point(c)?;
    Ok(plane_step_unchecked(c))
}

fn ensure_plane_point(c: PlaneCoords) -> Result<()> {
    if !c.in_constraint_region() {
        return Err(Error::InvalidPlaneCoords { xi: c.xi, gamma: c.gamma });
    }
    crate::boxes::NsBox::from_plane(c).map(|_| ())
}

/// Closed-form Jacobian of the plane map.
pub fn plane_jacobian(c: PlaneCoords) -> [[f64; 2]; 2] {
    let (xi, g) = (c.xi, c.gamma);
    [
        [2.0 * xi + 1.5 * g - 0.5, 1.5 * xi - 0.5],
        [2.0 * xi + 2.5 * g - 1.5, 4.0 * g + 2.5 * xi - 1.5],
    ]
}

/// Eigenvalues of a 2x2 matrix with a real spectrum, sorted descending.
pub fn eigenvalues_2x2(m: [[f64; 2]; 2]) -> [f64; 2] {
    let mean = (m[0][0] + m[1][1]) / 2.0;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = mean * mean - det;
    debug_assert!(disc >= -TOL_EXACT, "complex eigenvalue pair");
    let root = disc.max(0.0).sqrt();
    [mean + root, mean - root]
}

/// Map states that can be stepped and scored.
pub trait MapState: Copy {
    fn step(self) -> Self;
    fn chsh(self) -> f64;
    fn distance(self, other: Self) -> f64;
}

impl MapState for Epsilon {
    fn step(self) -> Self {
        map_eps(self)
    }

    fn chsh(self) -> f64 {
        2.0 * (self.value() + 1.0)
    }

    fn distance(self, other: Self) -> f64 {
        (self.value() - other.value()).abs()
    }
}

impl MapState for PlaneCoords {
    fn step(self) -> Self {
        plane_step_unchecked(self)
    }

    fn chsh(self) -> f64 {
        8.0 * self.xi + 6.0 * self.gamma - 4.0
    }

    fn distance(self, other: Self) -> f64 {
        (self.xi - other.xi).abs().max((self.gamma - other.gamma).abs())
    }
}

/// Why a trajectory stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIterations,
    ThresholdCrossed,
    Converged,
}

/// Stop conditions for `iterate`: an iteration cap always applies; a CHSH
/// threshold (strict `>`) and a successive-state convergence tolerance are
/// optional.
#[derive(Clone, Copy, Debug)]
pub struct StopRule {
    pub max_steps: usize,
    pub chsh_above: Option<f64>,
    pub converge_tol: Option<f64>,
}

pub const DEFAULT_MAX_STEPS: usize = 200;

impl Default for StopRule {
    fn default() -> Self {
        Self { max_steps: DEFAULT_MAX_STEPS, chsh_above: None, converge_tol: None }
    }
}

impl StopRule {
    pub fn max_steps(n: usize) -> Self {
        Self { max_steps: n, ..Self::default() }
    }

    pub fn chsh_above(threshold: f64) -> Self {
        Self { chsh_above: Some(threshold), ..Self::default() }
    }

    pub fn converge(tol: f64) -> Self {
        Self { converge_tol: Some(tol), ..Self::default() }
    }
}

/// A map orbit with per-point CHSH values. `points[0]` is the start state.
#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub points: Vec<S>,
    pub chsh: Vec<f64>,
    pub terminated_by: StopReason,
}

impl<S: MapState> Trajectory<S> {
    pub fn last(&self) -> S {
        *self.points.last().expect("trajectory is non-empty")
    }

    /// Number of map applications recorded (`points.len() - 1`).
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }
}

pub fn iterate<S: MapState>(start: S, stop: &StopRule) -> Trajectory<S> {
    let mut points = vec![start];
    let mut chsh = vec![start.chsh()];
    let reason = loop {
        let current = *points.last().expect("non-empty");
        if let Some(t) = stop.chsh_above {
            if current.chsh() > t {
                break StopReason::ThresholdCrossed;
            }
        }
        if points.len() > stop.max_steps {
            break StopReason::MaxIterations;
        }
        let next = current.step();
        points.push(next);
        chsh.push(next.chsh());
        if let Some(d) = stop.converge_tol {
            if next.distance(current) < d {
                break StopReason::Converged;
            }
        }
    };
    Trajectory { points, chsh, terminated_by: reason }
}

/// Convenience wrapper for the 1-D map.
pub fn iterate_eps(start: Epsilon, stop: &StopRule) -> Trajectory<Epsilon> {
    iterate(start, stop)
}

/// Convenience wrapper for the plane map; the start must be a valid plane point.
pub fn iterate_plane(start: PlaneCoords, stop: &StopRule) -> Result<Trajectory<PlaneCoords>> {
    ensure_plane_point(start)?;
    Ok(iterate(start, stop))
}

/// Stability class of a fixed point, by eigenvalue moduli relative to 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Attractive,
    Repulsive,
    Saddle,
    Marginal,
}

pub fn classify(eigenvalues: &[f64]) -> Stability {
    if eigenvalues.iter().any(|l| (l.abs() - 1.0).abs() <= TOL_EXACT) {
        return Stability::Marginal;
    }
    let inside = eigenvalues.iter().filter(|l| l.abs() < 1.0).count();
    match inside {
        n if n == eigenvalues.len() => Stability::Attractive,
        0 => Stability::Repulsive,
        _ => Stability::Saddle,
    }
}

/// A fixed point with its linearization.
#[derive(Clone, Debug)]
pub struct FixedPointReport<S> {
    pub location: S,
    pub eigenvalues: Vec<f64>,
    pub classification: Stability,
}

/// The two fixed points of the 1-D map: `eps = 0` (repulsive, `lambda = 3/2`)
/// and `eps = 1` (attractive, `lambda = 1/2`).
pub fn fixed_points_1d() -> Vec<FixedPointReport<Epsilon>> {
    [0.0, 1.0]
        .into_iter()
        .map(|e| {
            let eps = Epsilon::new(e).expect("fixed points are in range");
            let lambda = eps_map_derivative(eps);
            FixedPointReport {
                location: eps,
                eigenvalues: vec![lambda],
                classification: classify(&[lambda]),
            }
        })
        .collect()
}

/// The three fixed points of the plane map: PR at (1, 0), Pc at (0, 1) and
/// the fully mixed box at (1/2, 0).
pub fn fixed_points_2d() -> Vec<FixedPointReport<PlaneCoords>> {
    [(1.0, 0.0), (0.0, 1.0), (0.5, 0.0)]
        .into_iter()
        .map(|(xi, gamma)| {
            let c = PlaneCoords::new(xi, gamma);
            let eig = eigenvalues_2x2(plane_jacobian(c));
            FixedPointReport {
                location: c,
                eigenvalues: eig.to_vec(),
                classification: classify(&eig),
            }
        })
        .collect()
}

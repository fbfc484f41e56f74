//! Displacement-controlled equilibrium solve: damped Newton on the reduced
//! (constrained) coordinates with a finite-difference Hessian of the analytic
//! gradient, backtracking line search, and a gradient-descent fallback.
//! Nonconvergence is reported as a hidden failure, never a panic.

use super::energy::{total_energy, Configuration};
use crate::mesh::WaterbombMesh;
use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("equilibrium solve failed: {reason}")]
pub struct HiddenFailure {
    pub reason: String,
}

impl HiddenFailure {
    pub fn new(reason: impl Into<String>) -> Self {
        HiddenFailure { reason: reason.into() }
    }
}

/// Options for the forming/actuation protocol and the inner Newton solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Number of actuation displacement increments.
    pub steps: usize,
    /// Number of forming displacement increments.
    pub forming_steps: usize,
    /// Gradient-norm tolerance relative to the mesh stiffness scale.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Gradient-descent restarts tried after Newton stagnates.
    pub max_step_halvings: usize,
    /// Out-of-plane symmetry-breaking seed, as a fraction of the forming
    /// height, applied before the first forming increment.
    pub seed_amplitude: f64,
    /// Rest-angle bias (rad) applied to the mountain/valley fold hinges
    /// during forming only, selecting the mountain-up branch; the final
    /// equilibrium is re-relaxed without the bias.
    pub precrease: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            steps: 200,
            forming_steps: 30,
            newton_tol: 1e-8,
            max_newton_iters: 400,
            max_step_halvings: 8,
            seed_amplitude: 0.05,
            precrease: 0.6,
        }
    }
}

impl SweepOptions {
    pub fn validate(&self) -> Result<(), String> {
        if self.steps < 10 {
            return Err(format!("steps must be >= 10, got {}", self.steps));
        }
        if !(self.newton_tol > 0.0) {
            return Err("newton_tol must be positive".into());
        }
        if self.forming_steps < 1 || self.max_newton_iters < 1 {
            return Err("iteration counts must be >= 1".into());
        }
        Ok(())
    }
}

/// Allowed motion directions of one node; empty = fully fixed.
#[derive(Debug, Clone)]
pub struct NodeFreedom {
    pub dirs: Vec<Vector3<f64>>,
}

/// Flattened (node, direction) degrees of freedom.
pub(crate) struct DofMap {
    pub entries: Vec<(usize, Vector3<f64>)>,
}

impl DofMap {
    pub fn new(freedoms: &[NodeFreedom]) -> Self {
        let mut entries = Vec::new();
        for (node, f) in freedoms.iter().enumerate() {
            for d in &f.dirs {
                entries.push((node, *d));
            }
        }
        DofMap { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn project(&self, grad: &[Vector3<f64>]) -> DVector<f64> {
        DVector::from_iterator(
            self.entries.len(),
            self.entries.iter().map(|(node, dir)| grad[*node].dot(dir)),
        )
    }

    pub fn apply_step(&self, config: &mut Configuration, step: &DVector<f64>, scale: f64) {
        for (a, (node, dir)) in self.entries.iter().enumerate() {
            config.positions[*node] += scale * step[a] * dir;
        }
    }
}

/// Characteristic force used to scale the convergence tolerance.
pub(crate) fn force_scale(mesh: &WaterbombMesh) -> f64 {
    let k_bar = mesh.bars.iter().map(|b| b.stiffness).fold(0.0f64, f64::max);
    (k_bar * mesh.outer_radius).max(1e-12)
}

fn reduced_gradient(
    mesh: &WaterbombMesh,
    config: &Configuration,
    dofs: &DofMap,
) -> Result<(f64, DVector<f64>), HiddenFailure> {
    let (u, grad) = total_energy(mesh, config)
        .map_err(|e| HiddenFailure::new(format!("degenerate hinge during solve: {e}")))?;
    Ok((u, dofs.project(&grad)))
}

fn fd_hessian(
    mesh: &WaterbombMesh,
    config: &Configuration,
    dofs: &DofMap,
    eps: f64,
) -> Result<DMatrix<f64>, HiddenFailure> {
    let n = dofs.len();
    let mut h = DMatrix::zeros(n, n);
    let mut work = config.clone();
    for a in 0..n {
        let (node, dir) = dofs.entries[a];
        work.positions[node] += eps * dir;
        let (_, gp) = reduced_gradient(mesh, &work, dofs)?;
        work.positions[node] -= 2.0 * eps * dir;
        let (_, gm) = reduced_gradient(mesh, &work, dofs)?;
        work.positions[node] = config.positions[node];
        for b in 0..n {
            h[(b, a)] = (gp[b] - gm[b]) / (2.0 * eps);
        }
    }
    // Symmetrize; the finite difference is only approximately symmetric.
    for a in 0..n {
        for b in 0..a {
            let v = 0.5 * (h[(a, b)] + h[(b, a)]);
            h[(a, b)] = v;
            h[(b, a)] = v;
        }
    }
    Ok(h)
}

/// Modified Newton direction: eigendecompose the (symmetric) Hessian and
/// invert against |eigenvalue| with a floor. Near bifurcations the Hessian
/// is indefinite; flipping negative curvature keeps this a descent
/// direction with the right scale instead of a crawling regularized step.
fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let eig = h.clone().symmetric_eigen();
    let lam_max = eig
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .fold(0.0f64, f64::max);
    if !lam_max.is_finite() || lam_max == 0.0 {
        return None;
    }
    let floor = 1e-8 * lam_max;
    let mut coeffs = eig.eigenvectors.transpose() * g;
    for (a, c) in coeffs.iter_mut().enumerate() {
        *c /= eig.eigenvalues[a].abs().max(floor);
    }
    let p = -(&eig.eigenvectors * coeffs);
    if p.iter().all(|v| v.is_finite()) && p.dot(g) < 0.0 {
        Some(p)
    } else {
        None
    }
}

/// Backtracking Armijo line search along `dir`; returns the accepted energy,
/// leaving `config` at the accepted point, or restores it and returns None.
fn line_search(
    mesh: &WaterbombMesh,
    config: &mut Configuration,
    dofs: &DofMap,
    dir: &DVector<f64>,
    u0: f64,
    slope: f64,
) -> Option<f64> {
    let start = config.clone();
    let mut alpha = 1.0;
    for _ in 0..40 {
        dofs.apply_step(config, dir, alpha);
        match total_energy(mesh, config) {
            Ok((u, _)) if u <= u0 + 1e-4 * alpha * slope => return Some(u),
            _ => {
                config.positions.copy_from_slice(&start.positions);
                alpha *= 0.5;
            }
        }
    }
    None
}

/// Minimizes the elastic energy over the reduced coordinates defined by
/// `freedoms`, starting from `c0`. Prescribed coordinates must already be
/// set in `c0`. Returns the equilibrated configuration.
pub fn solve_equilibrium(
    mesh: &WaterbombMesh,
    c0: &Configuration,
    freedoms: &[NodeFreedom],
    opts: &SweepOptions,
) -> Result<Configuration, HiddenFailure> {
    let dofs = DofMap::new(freedoms);
    if dofs.len() == 0 {
        return Err(HiddenFailure::new("constraint set leaves no free dof"));
    }
    let tol = opts.newton_tol * force_scale(mesh);
    let eps = 1e-6 * mesh.outer_radius;
    let mut config = c0.clone();
    let mut descent_restarts = 0usize;

    for _iter in 0..opts.max_newton_iters {
        // Track the fold branch continuously: re-anchor the hinge angle
        // references at every iterate so no hinge drifts half a turn from
        // its reference (which would put the unwrap cut on the current
        // point and make the energy locally discontinuous).
        if !config.psi_ref.is_empty() {
            config
                .update_psi_ref(mesh)
                .map_err(|e| HiddenFailure::new(format!("hinge reference update: {e}")))?;
        }
        let (u, g) = reduced_gradient(mesh, &config, &dofs)?;
        if g.amax() <= tol {
            return Ok(config);
        }
        let h = fd_hessian(mesh, &config, &dofs, eps)?;
        let newton_ok = match newton_direction(&h, &g) {
            Some(p) => {
                let slope = g.dot(&p);
                let got = line_search(mesh, &mut config, &dofs, &p, u, slope);
                got.is_some()
            }
            None => false,
        };
        if !newton_ok {
            // Stagnation: steepest descent restart, scaled to a modest
            // physical step.
            descent_restarts += 1;
            if descent_restarts > opts.max_step_halvings {
                return Err(HiddenFailure::new(format!(
                    "newton stagnated after {descent_restarts} descent restarts (|g| = {:.3e})",
                    g.amax()
                )));
            }
            let gnorm = g.norm();
            let p = -(0.01 * mesh.outer_radius / gnorm) * &g;
            let slope = g.dot(&p);
            if line_search(mesh, &mut config, &dofs, &p, u, slope).is_none() {
                return Err(HiddenFailure::new("line search failed along steepest descent"));
            }
        }
    }
    // Accept late convergence if the final gradient check passes.
    let (_, g) = reduced_gradient(mesh, &config, &dofs)?;
    if g.amax() <= tol {
        return Ok(config);
    }
    Err(HiddenFailure::new(format!(
        "no convergence in {} iterations (|g| = {:.3e}, tol = {:.3e})",
        opts.max_newton_iters,
        g.amax(),
        tol
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::Region;
    use crate::mesh::{Bar, MeshNode};
    use approx::assert_relative_eq;

    fn two_bar_chain() -> WaterbombMesh {
        // Nodes at x = 0, 1, 2; end nodes fixed, middle free.
        let node = |x: f64| MeshNode {
            position: Vector3::new(x, 0.0, 0.0),
            theta: 0.0,
            radius: x,
            region: Region::Face,
            symmetry_plane: None,
            driven: false,
        };
        let bar = |i: usize, j: usize, k: f64| Bar {
            i,
            j,
            stiffness: k,
            rest_length: 1.0,
            youngs: 1.0,
            region: Region::Face,
        };
        WaterbombMesh {
            nodes: vec![node(0.0), node(1.0), node(2.0)],
            bars: vec![bar(0, 1, 2.0), bar(1, 2, 6.0)],
            hinges: vec![],
            faces: vec![],
            driven_nodes: vec![2],
            forming_pin: 0,
            actuation_pin: 0,
            alpha: std::f64::consts::FRAC_PI_4,
            outer_radius: 2.0,
            formed_height: 0.0,
        }
    }

    fn chain_freedoms() -> Vec<NodeFreedom> {
        vec![
            NodeFreedom { dirs: vec![] },
            NodeFreedom { dirs: vec![Vector3::x()] },
            NodeFreedom { dirs: vec![] },
        ]
    }

    #[test]
    fn zero_displacement_returns_rest_configuration() {
        let mesh = two_bar_chain();
        let c0 = Configuration::from_mesh(&mesh);
        let c = solve_equilibrium(&mesh, &c0, &chain_freedoms(), &SweepOptions::default()).unwrap();
        assert_relative_eq!(c.positions[1].x, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn driven_end_matches_closed_form() {
        // End node moved to x = 2.5; middle settles where the two springs
        // balance: k1 (x - 1) = k2 (2.5 - x - 1) -> x = (k1 + 1.5 k2) / (k1 + k2).
        let mesh = two_bar_chain();
        let mut c0 = Configuration::from_mesh(&mesh);
        c0.positions[2].x = 2.5;
        let c = solve_equilibrium(&mesh, &c0, &chain_freedoms(), &SweepOptions::default()).unwrap();
        let expected = (2.0 + 1.5 * 6.0) / 8.0;
        assert_relative_eq!(c.positions[1].x, expected, epsilon = 1e-6);
        assert_relative_eq!(c.positions[2].x, 2.5, epsilon = 1e-14);
    }

    #[test]
    fn energy_never_increases() {
        let mesh = two_bar_chain();
        let mut c0 = Configuration::from_mesh(&mesh);
        c0.positions[1].x = 1.7; // far from equilibrium
        c0.positions[2].x = 2.5;
        let (u0, _) = total_energy(&mesh, &c0).unwrap();
        let c = solve_equilibrium(&mesh, &c0, &chain_freedoms(), &SweepOptions::default()).unwrap();
        let (u1, _) = total_energy(&mesh, &c).unwrap();
        assert!(u1 <= u0);
    }

    #[test]
    fn no_free_dof_is_a_hidden_failure() {
        let mesh = two_bar_chain();
        let c0 = Configuration::from_mesh(&mesh);
        let freedoms = vec![
            NodeFreedom { dirs: vec![] },
            NodeFreedom { dirs: vec![] },
            NodeFreedom { dirs: vec![] },
        ];
        assert!(solve_equilibrium(&mesh, &c0, &freedoms, &SweepOptions::default()).is_err());
    }
}

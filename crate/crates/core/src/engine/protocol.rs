//! The two-step quasi-static protocol: form the flat sector into the first
//! stable state, reset it stress-free, then actuate the inner hole through
//! twice the forming height while recording force, energy, and stress.

use super::energy::{max_bar_strain, stress_proxy, total_energy, Configuration};
use super::landscape::EnergyLandscape;
use super::solver::{solve_equilibrium, HiddenFailure, NodeFreedom, SweepOptions};
use crate::engine::energy::{dihedral_angle, reflect_through_plane};
use crate::mesh::WaterbombMesh;
use nalgebra::Vector3;

/// Motion freedoms for the protocol: symmetry-edge nodes stay in their
/// theta-plane, driven nodes and the z-pinned node lose their z freedom.
pub fn protocol_freedoms(mesh: &WaterbombMesh, pin: usize) -> Vec<NodeFreedom> {
    mesh.nodes
        .iter()
        .enumerate()
        .map(|(id, node)| {
            let z_fixed = node.driven || id == pin;
            let dirs = match node.symmetry_plane {
                Some(t) => {
                    let e_r = Vector3::new(t.cos(), t.sin(), 0.0);
                    if z_fixed {
                        vec![e_r]
                    } else {
                        vec![e_r, Vector3::z()]
                    }
                }
                None => {
                    if z_fixed {
                        vec![Vector3::x(), Vector3::y()]
                    } else {
                        vec![Vector3::x(), Vector3::y(), Vector3::z()]
                    }
                }
            };
            NodeFreedom { dirs }
        })
        .collect()
}

fn set_driven_z(mesh: &WaterbombMesh, config: &mut Configuration, z: f64) {
    for &id in &mesh.driven_nodes {
        config.positions[id].z = z;
    }
}

/// Advances the driven coordinate from z0 to z1, bisecting the increment on
/// solver failure (snap-through events need smaller steps than the sweep
/// grid provides).
fn solve_to_z(
    mesh: &WaterbombMesh,
    config: &Configuration,
    freedoms: &[NodeFreedom],
    opts: &SweepOptions,
    z0: f64,
    z1: f64,
    depth: usize,
) -> Result<Configuration, HiddenFailure> {
    let mut trial = config.clone();
    set_driven_z(mesh, &mut trial, z1);
    match solve_equilibrium(mesh, &trial, freedoms, opts) {
        Ok(mut c) => {
            // Re-anchor hinge angle references at the converged state so the
            // next increment stays on a continuous branch even when a hinge
            // folds completely flat.
            c.update_psi_ref(mesh)
                .map_err(|e| HiddenFailure::new(format!("hinge reference update: {e}")))?;
            Ok(c)
        }
        Err(e) => {
            if depth == 0 {
                return Err(e);
            }
            let mid = 0.5 * (z0 + z1);
            let at_mid = solve_to_z(mesh, config, freedoms, opts, z0, mid, depth - 1)?;
            solve_to_z(mesh, &at_mid, freedoms, opts, mid, z1, depth - 1)
        }
    }
}

/// Sum of the z reaction on the driven nodes, oriented along increasing
/// actuation displacement (downward), so that dU/d delta = F.
pub fn reaction_force(
    mesh: &WaterbombMesh,
    config: &Configuration,
) -> Result<f64, HiddenFailure> {
    let (_, grad) = total_energy(mesh, config)
        .map_err(|e| HiddenFailure::new(format!("degenerate hinge in force recovery: {e}")))?;
    Ok(-mesh.driven_nodes.iter().map(|&id| grad[id].z).sum::<f64>())
}

/// Step-1: drives the inner hole up by `h` with the th2-ray rim node
/// z-pinned, then resets rest lengths and rest angles so the formed
/// geometry is stress-free.
pub fn forming(
    mesh: &WaterbombMesh,
    h: f64,
    opts: &SweepOptions,
) -> Result<WaterbombMesh, HiddenFailure> {
    if h == 0.0 {
        return Ok(mesh.clone());
    }
    let freedoms = protocol_freedoms(mesh, mesh.forming_pin);
    let mut config = Configuration::from_mesh(mesh);

    // Break the flat-state symmetry toward the folded branch: mountain edge
    // up, valley edge down, growing with radius.
    let r_i = mesh.nodes[mesh.driven_nodes[0]].radius;
    let r_o = mesh.outer_radius;
    let amp = opts.seed_amplitude * h;
    for (id, node) in mesh.nodes.iter().enumerate() {
        if node.driven || id == mesh.forming_pin {
            continue;
        }
        let shape = (std::f64::consts::PI * node.theta / mesh.alpha).cos();
        config.positions[id].z += amp * shape * (node.radius - r_i) / (r_o - r_i);
    }
    config
        .update_psi_ref(mesh)
        .map_err(|e| HiddenFailure::new(format!("hinge reference init: {e}")))?;

    // The seed alone cannot overcome the slight chirality of the
    // triangulation, and the fold hinges are usually the softest elements,
    // so the continuation runs on a guided copy: fold hinges are stiffened
    // and their rest angles ramp toward the mountain-up fold. The guide
    // comes off for the final relax below.
    let guide_k = 10.0 * mesh.hinges.iter().map(|h| h.stiffness).fold(0.0, f64::max);
    let mut guided = mesh.clone();

    for step in 1..=opts.forming_steps {
        let f = step as f64 / opts.forming_steps as f64;
        for (hg, h0) in guided.hinges.iter_mut().zip(&mesh.hinges) {
            if h0.mirror_plane.is_some() {
                hg.rest_angle = h0.rest_angle + f * opts.precrease;
                hg.stiffness = h0.stiffness + guide_k;
            }
        }
        let z = h * f;
        let z_prev = h * (step - 1) as f64 / opts.forming_steps as f64;
        config = solve_to_z(&guided, &config, &freedoms, opts, z_prev, z, opts.max_step_halvings)
            .map_err(|e| HiddenFailure::new(format!("forming step {step}: {}", e.reason)))?;
    }
    // Release the guide gradually at full height; a one-shot release can
    // throw stiff-crease designs onto a saddle.
    for step in (0..opts.forming_steps).rev() {
        let f = step as f64 / opts.forming_steps as f64;
        for (hg, h0) in guided.hinges.iter_mut().zip(&mesh.hinges) {
            if h0.mirror_plane.is_some() {
                hg.rest_angle = h0.rest_angle + f * opts.precrease;
                hg.stiffness = h0.stiffness + f * guide_k;
            }
        }
        config = solve_equilibrium(&guided, &config, &freedoms, opts)
            .map_err(|e| HiddenFailure::new(format!("forming release step {step}: {}", e.reason)))?;
        config
            .update_psi_ref(&guided)
            .map_err(|e| HiddenFailure::new(format!("hinge reference update: {e}")))?;
    }

    let mut formed = mesh.clone();
    for (node, pos) in formed.nodes.iter_mut().zip(&config.positions) {
        node.position = *pos;
    }
    for bar in &mut formed.bars {
        bar.rest_length = (config.positions[bar.j] - config.positions[bar.i]).norm();
    }
    for face in &mut formed.faces {
        let a = config.positions[face.nodes[0]];
        let b = config.positions[face.nodes[1]];
        let c = config.positions[face.nodes[2]];
        face.rest_area = 0.5 * (b - a).cross(&(c - a)).norm();
    }
    for (index, hinge) in formed.hinges.iter_mut().enumerate() {
        let p = config.positions[hinge.wings[0]];
        let q = match hinge.mirror_plane {
            Some(plane) => reflect_through_plane(plane, &config.positions[hinge.wings[1]]),
            None => config.positions[hinge.wings[1]],
        };
        let (psi, _) = dihedral_angle(
            &p,
            &config.positions[hinge.edge[0]],
            &config.positions[hinge.edge[1]],
            &q,
        )
        .ok_or_else(|| HiddenFailure::new(format!("degenerate hinge {index} in formed state")))?;
        hinge.rest_angle = psi;
    }
    formed.formed_height = h;
    Ok(formed)
}

/// Step-2: continuation over delta in [0, 2h], warm-starting each solve,
/// recording reaction force, trapezoid-integrated energy, and per-region
/// stress proxies.
pub fn actuation_sweep(
    mesh: &WaterbombMesh,
    opts: &SweepOptions,
    energy_normalization: f64,
) -> Result<EnergyLandscape, HiddenFailure> {
    let h = mesh.formed_height;
    if h <= 0.0 {
        return Err(HiddenFailure::new("actuation requires a formed mesh (h > 0)"));
    }
    let freedoms = protocol_freedoms(mesh, mesh.actuation_pin);
    let mut config = Configuration::from_mesh(mesh);
    config
        .update_psi_ref(mesh)
        .map_err(|e| HiddenFailure::new(format!("hinge reference init: {e}")))?;
    let z0 = config.positions[mesh.driven_nodes[0]].z;

    let steps = opts.steps;
    let mut delta = Vec::with_capacity(steps + 1);
    let mut force = Vec::with_capacity(steps + 1);
    let mut stress_face = Vec::with_capacity(steps + 1);
    let mut stress_crease = Vec::with_capacity(steps + 1);
    let mut worst_strain = 0.0f64;

    for k in 0..=steps {
        let d = 2.0 * h * k as f64 / steps as f64;
        let d_prev = 2.0 * h * k.saturating_sub(1) as f64 / steps as f64;
        config = solve_to_z(mesh, &config, &freedoms, opts, z0 - d_prev, z0 - d, opts.max_step_halvings)
            .map_err(|e| HiddenFailure::new(format!("actuation step {k} (delta = {d:.4}): {}", e.reason)))?;
        let (sf, sc) = stress_proxy(mesh, &config);
        delta.push(d);
        force.push(reaction_force(mesh, &config)?);
        stress_face.push(sf);
        stress_crease.push(sc);
        worst_strain = worst_strain.max(max_bar_strain(mesh, &config));
    }

    Ok(EnergyLandscape::from_force_samples(
        delta,
        force,
        stress_face,
        stress_crease,
        energy_normalization,
        worst_strain,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{DesignVector, GeometryParams, MaterialPair};
    use crate::mesh::build_mesh;
    use approx::assert_relative_eq;

    fn design_i_mesh() -> (WaterbombMesh, GeometryParams) {
        let g = GeometryParams::default();
        let mesh = build_mesh(&DesignVector::design_i(), &g, &MaterialPair::default()).unwrap();
        (mesh, g)
    }

    #[test]
    fn forming_zero_height_is_identity() {
        let (mesh, _) = design_i_mesh();
        let formed = forming(&mesh, 0.0, &SweepOptions::default()).unwrap();
        assert_eq!(formed, mesh);
    }

    #[test]
    fn forming_is_stress_free_and_reaches_height() {
        let (mesh, g) = design_i_mesh();
        let h = 0.6 * g.outer_radius;
        let formed = forming(&mesh, h, &SweepOptions::default()).unwrap();
        let config = Configuration::from_mesh(&formed);
        let (u, _) = total_energy(&formed, &config).unwrap();
        assert_relative_eq!(u, 0.0, epsilon = 1e-12);
        // Apex = driven inner-hole nodes, prescribed to z = h.
        for &id in &formed.driven_nodes {
            assert_relative_eq!(config.positions[id].z, h, epsilon = 1e-9);
        }
        assert_relative_eq!(formed.formed_height, h, epsilon = 0.0);
    }

    #[test]
    fn formed_state_is_folded_not_flat() {
        let (mesh, g) = design_i_mesh();
        let h = 0.6 * g.outer_radius;
        let formed = forming(&mesh, h, &SweepOptions::default()).unwrap();
        // Mountain and valley outer rim nodes separate in z.
        let rc = g.resolution as usize;
        let mountain_rim = rc; // ray 0, outermost
        let valley_rim = 4 * (rc + 1) + rc;
        let zm = formed.nodes[mountain_rim].position.z;
        let zv = formed.nodes[valley_rim].position.z;
        assert!(
            zm - zv > 0.05 * h,
            "expected folded sector, got zm = {zm:.3}, zv = {zv:.3}"
        );
    }

    #[test]
    fn actuation_requires_formed_mesh() {
        let (mesh, _) = design_i_mesh();
        assert!(actuation_sweep(&mesh, &SweepOptions::default(), 1.0).is_err());
    }

    #[test]
    fn pathological_mesh_fails_hidden_not_crash() {
        // Near-zero hinge stiffness with a huge forming step starves the
        // solver of a bending path; this must surface as a HiddenFailure.
        let (mut mesh, g) = design_i_mesh();
        for h in &mut mesh.hinges {
            h.stiffness = 0.0;
        }
        let opts = SweepOptions {
            forming_steps: 1,
            max_newton_iters: 3,
            max_step_halvings: 1,
            ..SweepOptions::default()
        };
        let result = forming(&mesh, 0.9 * g.outer_radius, &opts);
        assert!(result.is_err());
    }
}

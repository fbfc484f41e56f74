//! Reduced torsion-spring model of the waterbomb sector: near-rigid bars,
//! directly prescribed fold stiffnesses K_M and K_V on the symmetry edges,
//! and a facet bending hinge along the panel median.
//!
//! The panel is built directly in its folded rest state: a planar triangular
//! facet tilted out of the ground plane, with the apex at height h and the
//! two fold-line corners resting at z = 0. All rest lengths, rest areas, and
//! fold rest angles are taken from this built geometry, so the folded state
//! is stress-free by construction. Pressing the apex down to -h with the
//! corners held inverts the base through a bent intermediate; the mirror
//! image of the rest state is reachable by fold rotation alone, so with
//! zero fold stiffness both wells sit at zero energy.

use crate::design::{GeometryParams, Region};
use crate::engine::{
    dihedral_angle, max_bar_strain, reaction_force, reflect_through_plane, solve_equilibrium,
    stress_proxy, total_energy, Configuration, EnergyLandscape, HiddenFailure, NodeFreedom,
    SweepOptions,
};
use crate::mesh::{
    enumerate_bars, enumerate_faces, enumerate_hinges, grid_index, grid_nodes, triangle_area, Bar,
    BarKind, Hinge, HingeKind, MeshNode, TriFace, WaterbombMesh,
};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Parameters of the torsion-spring reference model. Stiffnesses in
/// N*mm/rad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpringModelParams {
    /// Mountain fold stiffness (theta = 0 edge).
    pub k_mountain: f64,
    /// Valley fold stiffness (theta = alpha edge).
    pub k_valley: f64,
    /// Facet bending stiffness on the panel median.
    pub k_facet: f64,
    /// Bar rigidity multiplier; bars carry k = scale * K_f / L0^2.
    pub bar_stiffness_scale: f64,
    /// Bending rigidity multiplier for the non-fold panel hinges.
    pub panel_rigidity: f64,
    pub geometry: GeometryParams,
    /// Forming height as a fraction of the outer radius.
    pub h_ratio: f64,
}

impl Default for SpringModelParams {
    fn default() -> Self {
        SpringModelParams {
            k_mountain: 0.0,
            k_valley: 0.0,
            k_facet: 1.0,
            bar_stiffness_scale: 1e4,
            panel_rigidity: 1.0,
            geometry: GeometryParams::default(),
            h_ratio: 0.6,
        }
    }
}

impl SpringModelParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.k_mountain < 0.0 || self.k_valley < 0.0 {
            return Err("fold stiffnesses must be non-negative".into());
        }
        if !(self.k_facet > 0.0) {
            return Err("facet bending stiffness must be positive".into());
        }
        if !(self.bar_stiffness_scale > 1.0) {
            return Err("bar_stiffness_scale must be much larger than 1".into());
        }
        if !(self.h_ratio > 0.0 && self.h_ratio < 0.9) {
            return Err("h_ratio must lie in (0, 0.9)".into());
        }
        self.geometry.validate()
    }
}

/// Builds the reduced sector mesh directly in the folded state: rays at 0,
/// alpha/2, alpha; fold hinges on the symmetry edges, facet bending on the
/// median ray, everything else near-rigid.
pub fn build_spring_mesh(p: &SpringModelParams) -> WaterbombMesh {
    let g = &p.geometry;
    let alpha = g.alpha();
    let rays = [0.0, 0.5 * alpha, alpha];
    let num_rays = rays.len();
    // One radial segment regardless of the field-model resolution: the
    // reference model is a six-node linkage (apex, two corners, one free
    // edge midpoint) whose only internal motions are fold rotation and
    // facet bending. A finer grid adds partial-inversion states that the
    // idealized model does not have.
    let rc: u32 = 1;
    let rc_us = rc as usize;
    // A near-point apex instead of the full hole: the reference model drives
    // a single apex vertex.
    let r_o = g.outer_radius;
    let r_i = 0.02 * r_o;
    let radial_span = r_o - r_i;
    let h = p.h_ratio * r_o;

    // Folded placement. The whole panel lies in one plane so that every
    // non-fold hinge opens at exactly pi and the z-mirrored configuration
    // is bending-free too. The plane is fixed by the two corner vertices
    // at radius b on the ground (b chosen so the fold edges keep their flat
    // length) and the apex at height h near the axis. Within the plane a
    // node at flat coordinates (theta, r) sits at fraction lambda up the
    // slope and fraction xi across the chord, which keeps the fold edges on
    // their own vertical symmetry planes.
    let half = 0.5 * alpha;
    let (uc, us) = (half.cos(), half.sin());
    let b = (radial_span * radial_span - h * h).sqrt();
    let eps = r_i;
    let polar = grid_nodes(&rays, rc, r_i, r_o);
    let positions: Vec<Vector3<f64>> = polar
        .iter()
        .map(|&(theta, r)| {
            let lambda = (r_o - r) / radial_span;
            let xi = theta / alpha - 0.5;
            let rho = (1.0 - lambda) * b * uc + lambda * eps;
            let spread = 2.0 * xi * us / uc;
            Vector3::new(
                rho * (uc - spread * us),
                rho * (us + spread * uc),
                lambda * h,
            )
        })
        .collect();

    let mut nodes = Vec::with_capacity(polar.len());
    for (idx, &(theta, r)) in polar.iter().enumerate() {
        let ray = idx / (rc_us + 1);
        nodes.push(MeshNode {
            position: positions[idx],
            theta,
            radius: r,
            region: if ray == 1 { Region::Face } else { Region::Crease },
            symmetry_plane: match ray {
                0 => Some(0.0),
                2 => Some(alpha),
                _ => None,
            },
            driven: idx % (rc_us + 1) == 0,
        });
    }

    let bars = enumerate_bars(num_rays, rc)
        .into_iter()
        .map(|topo| {
            let len = (positions[topo.j] - positions[topo.i]).norm();
            Bar {
                i: topo.i,
                j: topo.j,
                stiffness: p.bar_stiffness_scale * p.k_facet / (len * len),
                rest_length: len,
                youngs: 0.0,
                region: match topo.kind {
                    BarKind::Radial { ray, .. } if ray == 0 || ray == num_rays - 1 => Region::Crease,
                    _ => Region::Face,
                },
            }
        })
        .collect();

    // Fold and bending stiffness is distributed over the radial segments in
    // proportion to segment length so the line totals are K_M, K_V, K_f.
    let seg_fraction = 1.0 / rc as f64;
    let hinges: Vec<Hinge> = enumerate_hinges(num_rays, rc)
        .into_iter()
        .map(|mut topo| {
            let (stiffness, region, mirror_plane) = match topo.kind {
                HingeKind::Mirror { ray, k } => {
                    // Measure the fold angle against the rim end of the
                    // median ray: near the point-like apex the adjacent
                    // wing triangles are slivers and their dihedral is
                    // ill-conditioned.
                    let wing = grid_index(rc, 1, k + 1);
                    topo.wings = [wing, wing];
                    let k = if ray == 0 { p.k_mountain } else { p.k_valley };
                    let plane = if ray == 0 { 0.0 } else { alpha };
                    // Half of the symmetry-straddling fold belongs to the
                    // sector.
                    (0.5 * k * seg_fraction, Region::Crease, Some(plane))
                }
                HingeKind::RadialInterior { .. } => {
                    (p.k_facet * seg_fraction, Region::Face, None)
                }
                HingeKind::Diagonal { .. } | HingeKind::CircInterior { .. } => {
                    // Panel interior: facet-scale bending, distributed by
                    // tributary area so the whole face can flex during the
                    // inversion.
                    let a1 = triangle_area(
                        &positions[topo.edge[0]],
                        &positions[topo.edge[1]],
                        &positions[topo.wings[0]],
                    );
                    let a2 = triangle_area(
                        &positions[topo.edge[0]],
                        &positions[topo.edge[1]],
                        &positions[topo.wings[1]],
                    );
                    let area_fraction = (a1 + a2) / (alpha * 0.5 * (r_i + r_o) * radial_span);
                    (p.panel_rigidity * p.k_facet * area_fraction, Region::Face, None)
                }
            };
            // The built panel is planar, so every in-panel hinge rests at
            // pi; the folds rest at their built dihedral and are therefore
            // stress-free in the folded state.
            let rest_angle = match mirror_plane {
                Some(plane) => {
                    let q = reflect_through_plane(plane, &positions[topo.wings[1]]);
                    dihedral_angle(
                        &positions[topo.wings[0]],
                        &positions[topo.edge[0]],
                        &positions[topo.edge[1]],
                        &q,
                    )
                    .map(|(psi, _)| psi)
                    .unwrap_or(std::f64::consts::PI)
                }
                None => std::f64::consts::PI,
            };
            Hinge {
                edge: topo.edge,
                wings: topo.wings,
                stiffness,
                rest_angle,
                stress_coeff: 0.0,
                region,
                mirror_plane,
            }
        })
        .collect();

    // Near-rigid membrane: 1/2 scale K_f eps^2 per triangle.
    let faces = enumerate_faces(num_rays, rc)
        .into_iter()
        .map(|topo| {
            let rest_area = triangle_area(
                &positions[topo.nodes[0]],
                &positions[topo.nodes[1]],
                &positions[topo.nodes[2]],
            );
            TriFace {
                nodes: topo.nodes,
                stiffness: p.bar_stiffness_scale * p.k_facet / rest_area,
                rest_area,
            }
        })
        .collect();

    WaterbombMesh {
        nodes,
        bars,
        hinges,
        faces,
        driven_nodes: (0..num_rays).map(|ray| grid_index(rc, ray, 0)).collect(),
        forming_pin: grid_index(rc, 0, rc_us),
        actuation_pin: grid_index(rc, 0, rc_us),
        alpha,
        outer_radius: r_o,
        formed_height: h,
    }
}

/// Motion freedoms of the reduced model: the apex is prescribed in z, the
/// corner vertices the base rests on are held, symmetry-edge nodes stay in
/// their theta-plane. The panel edge midpoint (median rim node) flies free,
/// so inverting the base must bend the facet but not stretch it.
fn spring_freedoms(mesh: &WaterbombMesh) -> Vec<NodeFreedom> {
    let per_ray = mesh.nodes.len() / 3;
    mesh.nodes
        .iter()
        .enumerate()
        .map(|(id, node)| {
            let corner = id % per_ray == per_ray - 1 && id / per_ray != 1;
            let dirs = if corner {
                vec![]
            } else {
                match node.symmetry_plane {
                    Some(t) => {
                        let e_r = Vector3::new(t.cos(), t.sin(), 0.0);
                        if node.driven {
                            vec![e_r]
                        } else {
                            vec![e_r, Vector3::z()]
                        }
                    }
                    None => {
                        if node.driven {
                            vec![Vector3::x(), Vector3::y()]
                        } else {
                            vec![Vector3::x(), Vector3::y(), Vector3::z()]
                        }
                    }
                }
            };
            NodeFreedom { dirs }
        })
        .collect()
}

/// Actuation of the reduced model, returning U(delta) for delta in [0, 2h].
///
/// The mesh is already in its stress-free folded state, so there is no
/// forming stage: the apex travels straight from +h to -h with the corner
/// vertices held. The endpoint is the exact z-mirror of the start, and any
/// energy the second well retains comes from the fold springs alone.
pub fn spring_energy_curve(
    p: &SpringModelParams,
    sweep: &SweepOptions,
) -> Result<EnergyLandscape, HiddenFailure> {
    let mesh = build_spring_mesh(p);
    let h = mesh.formed_height;
    let freedoms = spring_freedoms(&mesh);
    let mut config = Configuration::from_mesh(&mesh);
    config
        .update_psi_ref(&mesh)
        .map_err(|e| HiddenFailure::new(format!("hinge reference init: {e}")))?;
    let steps = sweep.steps;
    let mut delta = Vec::with_capacity(steps + 1);
    let mut force = Vec::with_capacity(steps + 1);
    let mut energy = Vec::with_capacity(steps + 1);
    let mut stress_face = Vec::with_capacity(steps + 1);
    let mut stress_crease = Vec::with_capacity(steps + 1);
    let mut worst_strain = 0.0f64;
    for k in 0..=steps {
        let d = 2.0 * h * k as f64 / steps as f64;
        for &id in &mesh.driven_nodes {
            config.positions[id].z = h - d;
        }
        config = solve_equilibrium(&mesh, &config, &freedoms, sweep).map_err(|e| {
            HiddenFailure::new(format!("spring actuation step {k} (delta = {d:.4}): {}", e.reason))
        })?;
        config
            .update_psi_ref(&mesh)
            .map_err(|e| HiddenFailure::new(format!("hinge reference update: {e}")))?;
        let (sf, sc) = stress_proxy(&mesh, &config);
        let (u, _) = total_energy(&mesh, &config)
            .map_err(|e| HiddenFailure::new(format!("energy at step {k}: {e}")))?;
        delta.push(d);
        force.push(reaction_force(&mesh, &config)?);
        // The built state is exactly stress-free, so U(0) = 0 and the
        // stored energy of each equilibrium is reported directly; the
        // fold-spring offsets of the second well are far below what
        // quadrature of F would resolve.
        energy.push(u);
        stress_face.push(sf);
        stress_crease.push(sc);
        worst_strain = worst_strain.max(max_bar_strain(&mesh, &config));
    }
    Ok(EnergyLandscape::from_energy_samples(
        delta,
        force,
        energy,
        stress_face,
        stress_crease,
        1.0,
        worst_strain,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::Region;
    use crate::engine::total_energy;

    #[test]
    fn zero_fold_stiffness_leaves_only_facet_and_bar_energy() {
        let p = SpringModelParams::default();
        let mesh = build_spring_mesh(&p);
        for h in &mesh.hinges {
            if h.mirror_plane.is_some() {
                assert_eq!(h.stiffness, 0.0);
            } else {
                assert!(h.stiffness > 0.0);
            }
        }
        assert!(mesh.bars.iter().all(|b| b.stiffness > 0.0));
    }

    #[test]
    fn mountain_hinges_double_valley() {
        let p = SpringModelParams {
            k_mountain: 2.0,
            k_valley: 1.0,
            ..SpringModelParams::default()
        };
        let mesh = build_spring_mesh(&p);
        let total = |plane: f64| -> f64 {
            mesh.hinges
                .iter()
                .filter(|h| h.mirror_plane == Some(plane))
                .map(|h| h.stiffness)
                .sum()
        };
        let km = total(0.0);
        let kv = total(mesh.alpha);
        assert!((km / kv - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fold_lines_sit_on_the_symmetry_edges() {
        let mesh = build_spring_mesh(&SpringModelParams::default());
        for h in &mesh.hinges {
            if let Some(plane) = h.mirror_plane {
                assert_eq!(h.region, Region::Crease);
                for &id in &h.edge {
                    assert_eq!(mesh.nodes[id].symmetry_plane, Some(plane));
                }
            }
        }
    }

    #[test]
    fn built_state_is_stress_free_and_folded() {
        let p = SpringModelParams {
            k_mountain: 1.0,
            k_valley: 1.0,
            ..SpringModelParams::default()
        };
        let mesh = build_spring_mesh(&p);
        let mut config = Configuration::from_mesh(&mesh);
        config.update_psi_ref(&mesh).unwrap();
        let (energy, _) = total_energy(&mesh, &config).unwrap();
        assert!(energy.abs() < 1e-9, "built energy {energy}");
        let apex = mesh.driven_nodes[0];
        assert!((config.positions[apex].z - mesh.formed_height).abs() < 1e-12);
    }

    #[test]
    fn fold_edges_stay_on_their_symmetry_planes() {
        let mesh = build_spring_mesh(&SpringModelParams::default());
        for node in &mesh.nodes {
            if let Some(t) = node.symmetry_plane {
                let n = Vector3::new(-t.sin(), t.cos(), 0.0);
                assert!(node.position.dot(&n).abs() < 1e-9);
            }
        }
    }
}

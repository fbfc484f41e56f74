//! Total elastic energy of a bar-and-hinge mesh and its exact analytic
//! gradient. Bars store 1/2 k (L - L0)^2, hinges 1/2 k (psi - psi0)^2 with
//! psi the dihedral angle across the shared edge.

use crate::mesh::WaterbombMesh;
use nalgebra::Vector3;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("degenerate hinge {index}: wing triangle has near-zero normal")]
    DegenerateHinge { index: usize },
}

/// Node positions of a deformed state, in mm.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub positions: Vec<Vector3<f64>>,
    /// Per-hinge reference angles for continuous unwrapping: a hinge that
    /// folds completely flat crosses the 0/2pi branch cut of the raw
    /// dihedral, and the energy must stay continuous through it. Empty
    /// means "use raw angles".
    pub psi_ref: Vec<f64>,
}

impl Configuration {
    pub fn from_mesh(mesh: &WaterbombMesh) -> Self {
        Configuration {
            positions: mesh.nodes.iter().map(|n| n.position).collect(),
            psi_ref: Vec::new(),
        }
    }

    /// Re-anchors the unwrapping references to the hinge angles of the
    /// current positions, keeping continuity with any previous references.
    pub fn update_psi_ref(&mut self, mesh: &WaterbombMesh) -> Result<(), EnergyError> {
        let had_refs = !self.psi_ref.is_empty();
        let mut refs = Vec::with_capacity(mesh.hinges.len());
        for (index, hinge) in mesh.hinges.iter().enumerate() {
            let p = self.positions[hinge.wings[0]];
            let q = match hinge.mirror_plane {
                Some(plane) => reflect_through_plane(plane, &self.positions[hinge.wings[1]]),
                None => self.positions[hinge.wings[1]],
            };
            let (raw, _) = dihedral_angle(
                &p,
                &self.positions[hinge.edge[0]],
                &self.positions[hinge.edge[1]],
                &q,
            )
            .ok_or(EnergyError::DegenerateHinge { index })?;
            let psi = if had_refs {
                unwrap_angle(raw, self.psi_ref[index])
            } else {
                raw
            };
            refs.push(psi);
        }
        self.psi_ref = refs;
        Ok(())
    }
}

/// Shifts `raw` by a multiple of 2pi onto the branch nearest `reference`.
#[inline]
fn unwrap_angle(raw: f64, reference: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    raw + two_pi * ((reference - raw) / two_pi).round()
}

/// Reflection through the vertical plane at polar angle `plane` (contains
/// the z-axis).
#[inline]
pub fn reflect_through_plane(plane: f64, v: &Vector3<f64>) -> Vector3<f64> {
    let n = Vector3::new(-plane.sin(), plane.cos(), 0.0);
    v - 2.0 * n.dot(v) * n
}

/// Dihedral angle psi in (0, 2pi) across edge (i, j) with wings p and q,
/// flat = pi, plus its gradient with respect to (p, i, j, q).
///
/// Returns `None` when either wing triangle is degenerate.
pub fn dihedral_angle(
    p: &Vector3<f64>,
    i: &Vector3<f64>,
    j: &Vector3<f64>,
    q: &Vector3<f64>,
) -> Option<(f64, [Vector3<f64>; 4])> {
    let b1 = i - p;
    let b2 = j - i;
    let b3 = q - j;
    let n1 = b1.cross(&b2);
    let n2 = b2.cross(&b3);
    let n1_sq = n1.norm_squared();
    let n2_sq = n2.norm_squared();
    let b2_len = b2.norm();
    let scale = b1.norm_squared().max(b2.norm_squared()).max(b3.norm_squared());
    if n1_sq < 1e-20 * scale * scale || n2_sq < 1e-20 * scale * scale || b2_len < 1e-14 {
        return None;
    }
    let phi = (n1.cross(&n2).dot(&b2) / b2_len).atan2(n1.dot(&n2));
    let psi = if phi >= 0.0 { phi } else { phi + 2.0 * std::f64::consts::PI };

    let dp = -(b2_len / n1_sq) * n1;
    let dq = (b2_len / n2_sq) * n2;
    let c1 = b1.dot(&b2) / (b2_len * b2_len);
    let c2 = b3.dot(&b2) / (b2_len * b2_len);
    let di = -(1.0 + c1) * dp + c2 * dq;
    let dj = c1 * dp - (1.0 + c2) * dq;
    Some((psi, [dp, di, dj, dq]))
}

/// Total elastic energy (N*mm) and its Cartesian gradient per node (N).
pub fn total_energy(
    mesh: &WaterbombMesh,
    config: &Configuration,
) -> Result<(f64, Vec<Vector3<f64>>), EnergyError> {
    let pos = &config.positions;
    let mut energy = 0.0;
    let mut grad = vec![Vector3::zeros(); pos.len()];

    for bar in &mesh.bars {
        let d = pos[bar.j] - pos[bar.i];
        let len = d.norm();
        let stretch = len - bar.rest_length;
        energy += 0.5 * bar.stiffness * stretch * stretch;
        if len > 0.0 {
            let f = bar.stiffness * stretch / len * d;
            grad[bar.i] -= f;
            grad[bar.j] += f;
        }
    }

    for face in &mesh.faces {
        let a = pos[face.nodes[0]];
        let b = pos[face.nodes[1]];
        let c = pos[face.nodes[2]];
        let n = (b - a).cross(&(c - a));
        let area = 0.5 * n.norm();
        let eps = (area - face.rest_area) / face.rest_area;
        energy += 0.5 * face.stiffness * face.rest_area * eps * eps;
        let nn = n.norm();
        if nn > 1e-14 {
            let n_hat = n / nn;
            let coeff = face.stiffness * eps;
            grad[face.nodes[0]] += coeff * 0.5 * n_hat.cross(&(c - b));
            grad[face.nodes[1]] += coeff * 0.5 * n_hat.cross(&(a - c));
            grad[face.nodes[2]] += coeff * 0.5 * n_hat.cross(&(b - a));
        }
    }

    for (index, hinge) in mesh.hinges.iter().enumerate() {
        if hinge.stiffness == 0.0 {
            continue;
        }
        let p = pos[hinge.wings[0]];
        let q = match hinge.mirror_plane {
            Some(plane) => reflect_through_plane(plane, &pos[hinge.wings[1]]),
            None => pos[hinge.wings[1]],
        };
        let (mut psi, d) = dihedral_angle(&p, &pos[hinge.edge[0]], &pos[hinge.edge[1]], &q)
            .ok_or(EnergyError::DegenerateHinge { index })?;
        if !config.psi_ref.is_empty() {
            psi = unwrap_angle(psi, config.psi_ref[index]);
        }
        let moment = hinge.stiffness * (psi - hinge.rest_angle);
        energy += 0.5 * hinge.stiffness * (psi - hinge.rest_angle).powi(2);
        grad[hinge.edge[0]] += moment * d[1];
        grad[hinge.edge[1]] += moment * d[2];
        match hinge.mirror_plane {
            Some(plane) => {
                // The mirrored wing moves with the real one: chain rule
                // through the (symmetric, linear) reflection.
                grad[hinge.wings[0]] +=
                    moment * (d[0] + reflect_through_plane(plane, &d[3]));
            }
            None => {
                grad[hinge.wings[0]] += moment * d[0];
                grad[hinge.wings[1]] += moment * d[3];
            }
        }
    }

    Ok((energy, grad))
}

/// Largest |axial strain| over all bars.
pub fn max_bar_strain(mesh: &WaterbombMesh, config: &Configuration) -> f64 {
    let mut worst = 0.0f64;
    for bar in &mesh.bars {
        let len = (config.positions[bar.j] - config.positions[bar.i]).norm();
        let strain = ((len - bar.rest_length) / bar.rest_length).abs();
        worst = worst.max(strain);
    }
    worst
}

/// Per-region stress proxy (MPa): max over elements of bar axial stress
/// E |eps| and hinge surface bending stress.
pub fn stress_proxy(mesh: &WaterbombMesh, config: &Configuration) -> (f64, f64) {
    use crate::design::Region;
    let pos = &config.positions;
    let mut face = 0.0f64;
    let mut crease = 0.0f64;
    for bar in &mesh.bars {
        let len = (pos[bar.j] - pos[bar.i]).norm();
        let stress = bar.youngs * ((len - bar.rest_length) / bar.rest_length).abs();
        match bar.region {
            Region::Face => face = face.max(stress),
            Region::Crease => crease = crease.max(stress),
        }
    }
    for (index, hinge) in mesh.hinges.iter().enumerate() {
        if hinge.stress_coeff == 0.0 {
            continue;
        }
        let p = pos[hinge.wings[0]];
        let q = match hinge.mirror_plane {
            Some(plane) => reflect_through_plane(plane, &pos[hinge.wings[1]]),
            None => pos[hinge.wings[1]],
        };
        if let Some((mut psi, _)) = dihedral_angle(&p, &pos[hinge.edge[0]], &pos[hinge.edge[1]], &q)
        {
            if !config.psi_ref.is_empty() {
                psi = unwrap_angle(psi, config.psi_ref[index]);
            }
            let stress = hinge.stress_coeff * (psi - hinge.rest_angle).abs();
            match hinge.region {
                Region::Face => face = face.max(stress),
                Region::Crease => crease = crease.max(stress),
            }
        }
    }
    (face, crease)
}

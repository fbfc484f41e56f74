//! Sampled energy landscape of an actuation sweep and the bistability
//! metrics extracted from it.

use crate::design::MaterialPair;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("cannot extract metrics from an empty landscape")]
    EmptyLandscape,
}

/// (delta, F, U, stress-proxy) samples of one actuation sweep. Energy is the
/// trapezoidal integral of the force samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLandscape {
    /// Driven displacement samples (mm), strictly increasing from 0.
    pub delta: Vec<f64>,
    /// Reaction force on the driven nodes (N).
    pub force: Vec<f64>,
    /// Stored energy U(delta) (N*mm).
    pub energy: Vec<f64>,
    /// U / (E_f * r_o * nu_f), the reporting normalization.
    pub energy_normalized: Vec<f64>,
    /// Max face-region stress proxy per sample (MPa).
    pub stress_face: Vec<f64>,
    /// Max crease-region stress proxy per sample (MPa).
    pub stress_crease: Vec<f64>,
    /// Largest |bar strain| seen anywhere in the sweep (diagnostic).
    pub max_bar_strain: f64,
}

impl EnergyLandscape {
    /// Builds the landscape from force samples, integrating the energy with
    /// the trapezoid rule.
    pub fn from_force_samples(
        delta: Vec<f64>,
        force: Vec<f64>,
        stress_face: Vec<f64>,
        stress_crease: Vec<f64>,
        energy_normalization: f64,
        max_bar_strain: f64,
    ) -> Self {
        let energy = trapezoid_integral(&delta, &force);
        let energy_normalized = energy.iter().map(|u| u / energy_normalization).collect();
        EnergyLandscape {
            delta,
            force,
            energy,
            energy_normalized,
            stress_face,
            stress_crease,
            max_bar_strain,
        }
    }

    /// Builds the landscape from directly evaluated energy samples, for
    /// sweeps where the stored energy of each equilibrium is available
    /// exactly and quadrature error would mask small well offsets.
    pub fn from_energy_samples(
        delta: Vec<f64>,
        force: Vec<f64>,
        energy: Vec<f64>,
        stress_face: Vec<f64>,
        stress_crease: Vec<f64>,
        energy_normalization: f64,
        max_bar_strain: f64,
    ) -> Self {
        let energy_normalized = energy.iter().map(|u| u / energy_normalization).collect();
        EnergyLandscape {
            delta,
            force,
            energy,
            energy_normalized,
            stress_face,
            stress_crease,
            max_bar_strain,
        }
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    /// CSV export, one row per sample. Floats use the shortest
    /// round-trippable representation.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("delta_mm,force_N,energy_Nmm,energy_normalized,stress_face_MPa,stress_crease_MPa\n");
        for k in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.delta[k],
                self.force[k],
                self.energy[k],
                self.energy_normalized[k],
                self.stress_face[k],
                self.stress_crease[k]
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("empty csv")?;
        if header
            != "delta_mm,force_N,energy_Nmm,energy_normalized,stress_face_MPa,stress_crease_MPa"
        {
            return Err(format!("unexpected header: {header}"));
        }
        let mut land = EnergyLandscape {
            delta: vec![],
            force: vec![],
            energy: vec![],
            energy_normalized: vec![],
            stress_face: vec![],
            stress_crease: vec![],
            max_bar_strain: 0.0,
        };
        for (ln, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|e| format!("line {}: {e}", ln + 2)))
                .collect::<Result<_, _>>()?;
            if fields.len() != 6 {
                return Err(format!("line {}: expected 6 fields", ln + 2));
            }
            land.delta.push(fields[0]);
            land.force.push(fields[1]);
            land.energy.push(fields[2]);
            land.energy_normalized.push(fields[3]);
            land.stress_face.push(fields[4]);
            land.stress_crease.push(fields[5]);
        }
        Ok(land)
    }
}

/// Cumulative trapezoid integral of F over delta, starting at 0.
pub fn trapezoid_integral(delta: &[f64], force: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(delta.len());
    let mut acc = 0.0;
    for k in 0..delta.len() {
        if k > 0 {
            acc += 0.5 * (force[k] + force[k - 1]) * (delta[k] - delta[k - 1]);
        }
        out.push(acc);
    }
    out
}

/// Barrier height, well depth, and the bistability ratio phi = dU / U_max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BistabilityMetrics {
    /// Barrier height U_max (same units as the landscape energy).
    pub u_max: f64,
    /// Energy well depth of the second stable state.
    pub delta_u: f64,
    /// Bistability ratio dU / U_max in [0, 1]; 0 when not bistable.
    pub phi: f64,
    /// Displacement of the second stable state (mm).
    pub delta_state2: f64,
    /// max over regions of (stress proxy / elastic limit), over the sweep.
    pub sigma_ratio: f64,
    pub bistable: bool,
}

/// Locates the barrier and the second stable state of a landscape and forms
/// the bistability ratio. The second state is the last interior local
/// minimum of U (the well the sweep ends near), refined by quadratic
/// interpolation, or the final sample when the sweep ends on a falling
/// branch; the barrier is the largest energy on the path to it.
pub fn extract_metrics(
    land: &EnergyLandscape,
    materials: &MaterialPair,
) -> Result<BistabilityMetrics, MetricsError> {
    if land.is_empty() {
        return Err(MetricsError::EmptyLandscape);
    }
    let n = land.len();
    let u = &land.energy;
    let sigma_ratio = (0..n)
        .map(|k| {
            (land.stress_face[k] / materials.face_yield)
                .max(land.stress_crease[k] / materials.crease_yield)
        })
        .fold(0.0f64, f64::max);

    let u_global = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let monostable = |sigma_ratio| BistabilityMetrics {
        u_max: u_global.max(0.0),
        delta_u: 0.0,
        phi: 0.0,
        delta_state2: f64::NAN,
        sigma_ratio,
        bistable: false,
    };

    // The second stable state is the configuration the actuation ends
    // near (the inverted state), so take the last interior local minimum
    // of U, or the endpoint when the sweep ends on a falling branch.
    // Small intermediate snap-through dips earlier in the sweep are not
    // the second state.
    let mut state: Option<(usize, (f64, f64))> = None; // (index, (delta, U))
    for k in (1..n - 1).rev() {
        if u[k] <= u[k - 1] && u[k] <= u[k + 1] {
            state = Some((
                k,
                refine_minimum(
                    (land.delta[k - 1], u[k - 1]),
                    (land.delta[k], u[k]),
                    (land.delta[k + 1], u[k + 1]),
                ),
            ));
            break;
        }
    }
    if state.is_none() && n >= 2 && (land.force[n - 1] <= 0.0 || u[n - 1] <= u[n - 2]) {
        state = Some((n - 1, (land.delta[n - 1], u[n - 1])));
    }
    let Some((k2, (d2, u2))) = state else {
        return Ok(monostable(sigma_ratio));
    };
    // Stored energy is nonnegative; quadratic refinement between coarse
    // samples must not undershoot zero (which would inflate the well depth
    // past the barrier).
    let u2 = u2.max(0.0);

    // The barrier is the largest energy on the path from the first state
    // to the second; a sweep can keep climbing past the second state, so
    // the maximum over the whole landscape is not usable.
    let (im, &u_max) = u[..k2.max(1)]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty prefix");
    if u_max <= 0.0 || im == 0 {
        return Ok(monostable(sigma_ratio));
    }

    if u_max - u2 > 0.0 {
        let delta_u = u_max - u2;
        Ok(BistabilityMetrics {
            u_max,
            delta_u,
            phi: (delta_u / u_max).clamp(0.0, 1.0),
            delta_state2: d2,
            sigma_ratio,
            bistable: true,
        })
    } else {
        Ok(monostable(sigma_ratio))
    }
}

/// Vertex of the parabola through three samples; falls back to the middle
/// sample when the points are collinear.
fn refine_minimum(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> (f64, f64) {
    let (x0, y0) = a;
    let (x1, y1) = b;
    let (x2, y2) = c;
    let d0 = (y1 - y0) / (x1 - x0);
    let d1 = (y2 - y1) / (x2 - x1);
    let curv = (d1 - d0) / (x2 - x0) * 2.0;
    if !(curv > 0.0) || !curv.is_finite() {
        return (x1, y1);
    }
    // Newton step on the quadratic fit about x1.
    let slope = (d0 * (x2 - x1) + d1 * (x1 - x0)) / (x2 - x0);
    let x_star = x1 - slope / curv;
    if x_star < x0 || x_star > x2 {
        return (x1, y1);
    }
    let y_star = y1 + slope * (x_star - x1) + 0.5 * curv * (x_star - x1).powi(2);
    (x_star, y_star)
}

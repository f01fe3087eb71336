//! Closed-form test fields built from a safety-factor profile
//! `q = q0 + q2 (R-R0)^2 + q2 (Z-Z0)^2`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{FieldDump, Grid2D};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    CircularQProfile,
    PerturbedQProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticFieldSpec {
    pub kind: FieldKind,
    pub q0: f64,
    pub q2: f64,
    pub rbphi: f64,
    pub axis: (f64, f64),
    /// `(n, amplitude)` pairs; each adds `amplitude cos(nφ)` to `B_R` and `B_Z`.
    pub perturbation: Vec<(u32, f64)>,
}

impl Default for AnalyticFieldSpec {
    fn default() -> Self {
        AnalyticFieldSpec {
            kind: FieldKind::CircularQProfile,
            q0: 2.0,
            q2: 2.1,
            rbphi: 3.0,
            axis: (3.0, 0.0),
            perturbation: Vec::new(),
        }
    }
}

/// Field values and their cylindrical partial derivatives at a point.
/// `d[c][a]` is `∂B_c/∂x_a` with components and coordinates ordered
/// `(R, φ, Z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldJet {
    pub b: [f64; 3],
    pub d: [[f64; 3]; 3],
}

impl AnalyticFieldSpec {
    pub fn perturbed(n: u32, amplitude: f64) -> Self {
        AnalyticFieldSpec {
            kind: FieldKind::PerturbedQProfile,
            perturbation: alloc::vec![(n, amplitude)],
            ..Self::default()
        }
    }

    pub fn q(&self, r: f64, z: f64) -> f64 {
        let (dr, dz) = (r - self.axis.0, z - self.axis.1);
        self.q0 + self.q2 * (dr * dr + dz * dz)
    }

    pub fn validate_on(&self, grid: &Grid2D) -> Result<()> {
        if !(self.q0 > 0.0) {
            return Err(Error::NonPositiveSafetyFactor {
                q: self.q0,
                r: self.axis.0,
                z: self.axis.1,
            });
        }
        // q is a paraboloid, so its minimum over the box is at the clamped axis
        // and the maximum at a corner.
        let rc = self.axis.0.clamp(grid.r_min, grid.r_max());
        let zc = self.axis.1.clamp(grid.z_min, grid.z_max());
        let mut pts = alloc::vec![(rc, zc)];
        for r in [grid.r_min, grid.r_max()] {
            for z in [grid.z_min, grid.z_max()] {
                pts.push((r, z));
            }
        }
        for (r, z) in pts {
            let q = self.q(r, z);
            if !(q > 0.0) {
                return Err(Error::NonPositiveSafetyFactor { q, r, z });
            }
        }
        Ok(())
    }

    fn perturbation_at(&self, phi: f64) -> (f64, f64) {
        if self.kind != FieldKind::PerturbedQProfile {
            return (0.0, 0.0);
        }
        self.perturbation
            .iter()
            .fold((0.0, 0.0), |(v, dv), &(n, a)| {
                let nf = n as f64;
                (v + a * (nf * phi).cos(), dv - a * nf * (nf * phi).sin())
            })
    }

    /// `(B_R, B_φ, B_Z)`.
    pub fn field(&self, r: f64, phi: f64, z: f64) -> [f64; 3] {
        self.jet(r, phi, z).b
    }

    pub fn jet(&self, r: f64, phi: f64, z: f64) -> FieldJet {
        let (dr, dz) = (r - self.axis.0, z - self.axis.1);
        let q = self.q(r, z);
        let (q_r, q_z) = (2.0 * self.q2 * dr, 2.0 * self.q2 * dz);
        let rq = r * q;
        let rq_r = q + r * q_r;
        let (p, dp) = self.perturbation_at(phi);
        let b = [-dz / rq + p, self.rbphi / r, dr / rq + p];
        let d = [
            [
                dz * rq_r / (rq * rq),
                dp,
                -1.0 / rq + dz * q_z / (r * q * q),
            ],
            [-self.rbphi / (r * r), 0.0, 0.0],
            [
                1.0 / rq - dr * rq_r / (rq * rq),
                dp,
                -dr * q_z / (r * q * q),
            ],
        ];
        FieldJet { b, d }
    }

    /// Poloidal flux `ln(q) / (2 q2)` of the circular field.
    pub fn psi_exact(&self, r: f64, z: f64) -> Result<f64> {
        if self.kind != FieldKind::CircularQProfile {
            return Err(Error::Unsupported("psi_exact needs the circular kind"));
        }
        Ok(self.q(r, z).ln() / (2.0 * self.q2))
    }

    pub fn describe(&self) -> alloc::string::String {
        let kind = match self.kind {
            FieldKind::CircularQProfile => "circular",
            FieldKind::PerturbedQProfile => "perturbed",
        };
        let mut s = format!(
            "analytic kind={kind} q0={} q2={} rbphi={} axis=({},{})",
            self.q0, self.q2, self.rbphi, self.axis.0, self.axis.1
        );
        if self.kind == FieldKind::PerturbedQProfile {
            for (n, a) in &self.perturbation {
                s.push_str(&format!(" mode=({n},{a})"));
            }
        }
        s
    }
}

/// Samples `B` from the analytic spec on every node of `grid`.
pub fn sample_analytic_field(spec: &AnalyticFieldSpec, grid: &Grid2D) -> Result<FieldDump> {
    grid.validate()?;
    spec.validate_on(grid)?;
    sample_fn(grid, spec.describe(), |r, phi, z| spec.field(r, phi, z))
}

/// Samples an arbitrary `(R, φ, Z) -> (B_R, B_φ, B_Z)` closure.
pub fn sample_fn(
    grid: &Grid2D,
    provenance: alloc::string::String,
    f: impl Fn(f64, f64, f64) -> [f64; 3],
) -> Result<FieldDump> {
    let n = grid.sample_len();
    let (mut br, mut bphi, mut bz) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for p in 0..grid.n_planes() {
        let phi = grid.plane_phi(p);
        for iz in 0..=grid.n_z {
            let z = grid.z(iz);
            for ir in 0..=grid.n_r {
                let b = f(grid.r(ir), phi, z);
                br.push(b[0]);
                bphi.push(b[1]);
                bz.push(b[2]);
            }
        }
    }
    FieldDump::new(*grid, br, bphi, bz, provenance)
}

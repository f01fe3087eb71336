//! Evaluation of `B = ∇×A` and the derived quantities used by the
//! guiding-center and field-line integrators.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::vecpot::VectorPotential;

/// `B` and its geometry at one point, cylindrical components `(R, φ, Z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub b: [f64; 3],
    pub bmag: f64,
    pub bhat: [f64; 3],
    pub grad_ln_b: [f64; 3],
    pub curl_bhat: [f64; 3],
    /// `db[c][a] = ∂B_c/∂x_a` with `x = (R, φ, Z)` (plain partials, no metric).
    pub db: [[f64; 3]; 3],
}

impl FieldSample {
    /// `∇|B|` in physical cylindrical components.
    pub fn grad_b(&self) -> [f64; 3] {
        self.grad_ln_b.map(|g| g * self.bmag)
    }
}

/// `(B_R, B_φ, B_Z)`.
pub fn eval_b(vp: &VectorPotential, r: f64, phi: f64, z: f64) -> Result<[f64; 3]> {
    let u = vp.u.eval(r, phi, z)?;
    let v = vp.v.eval(r, phi, z)?;
    let p = vp.dpsi_dr.eval(r, phi, z)?;
    let q = if vp.grid().n_phi == 0 {
        0.0
    } else {
        vp.dchi_dphi.eval(r, phi, z)?
    };
    Ok([u / r, v / r, p / r - q / (r * r)])
}

/// `B` with its plain partial derivatives.
pub fn eval_b_jet(
    vp: &VectorPotential,
    r: f64,
    phi: f64,
    z: f64,
) -> Result<([f64; 3], [[f64; 3]; 3])> {
    let u = vp.u.pieces.eval_grad(r, phi, z)?;
    let v = vp.v.pieces.eval_grad(r, phi, z)?;
    let p = vp.dpsi_dr.eval_grad(r, phi, z)?;
    let q = if vp.grid().n_phi == 0 {
        [0.0; 4]
    } else {
        vp.dchi_dphi.eval_grad(r, phi, z)?
    };
    let (r2, r3) = (r * r, r * r * r);
    let b = [u[0] / r, v[0] / r, p[0] / r - q[0] / r2];
    let db = [
        [u[1] / r - u[0] / r2, u[2] / r, u[3] / r],
        [v[1] / r - v[0] / r2, v[2] / r, v[3] / r],
        [
            p[1] / r - p[0] / r2 - q[1] / r2 + 2.0 * q[0] / r3,
            p[2] / r - q[2] / r2,
            p[3] / r - q[3] / r2,
        ],
    ];
    Ok((b, db))
}

/// Assembles `|B|`, `b̂`, `∇ln B` and `∇×b̂` from `B` and its partials.
pub fn sample_from_jet(r: f64, b: [f64; 3], db: [[f64; 3]; 3]) -> Result<FieldSample> {
    let bmag = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    if !(bmag > 0.0) || !bmag.is_finite() {
        return Err(Error::VanishingField);
    }
    let bhat = b.map(|c| c / bmag);
    // ∂_a |B|
    let mut dmag = [0.0; 3];
    for (a, d) in dmag.iter_mut().enumerate() {
        *d = (0..3).map(|c| bhat[c] * db[c][a]).sum();
    }
    let grad_ln_b = [dmag[0] / bmag, dmag[1] / (r * bmag), dmag[2] / bmag];
    // ∂_a b_c
    let mut dbh = [[0.0; 3]; 3];
    for c in 0..3 {
        for a in 0..3 {
            dbh[c][a] = (db[c][a] - bhat[c] * dmag[a]) / bmag;
        }
    }
    let curl_bhat = [
        dbh[2][1] / r - dbh[1][2],
        dbh[0][2] - dbh[2][0],
        bhat[1] / r + dbh[1][0] - dbh[0][1] / r,
    ];
    Ok(FieldSample {
        b,
        bmag,
        bhat,
        grad_ln_b,
        curl_bhat,
        db,
    })
}

/// Full sample. Curvature terms need `m_R, m_Z > 1`.
pub fn eval_field_sample(vp: &VectorPotential, r: f64, phi: f64, z: f64) -> Result<FieldSample> {
    let (m_r, m_z) = vp.orders();
    if m_r <= 1 || m_z <= 1 {
        return Err(Error::InsufficientSmoothness { m_r, m_z });
    }
    eval_field_sample_lenient(vp, r, phi, z)
}

/// Same as [`eval_field_sample`] without the smoothness check. With
/// `m = 1` the derivatives of `B_Z` jump across cell interfaces.
pub fn eval_field_sample_lenient(
    vp: &VectorPotential,
    r: f64,
    phi: f64,
    z: f64,
) -> Result<FieldSample> {
    let (b, db) = eval_b_jet(vp, r, phi, z)?;
    sample_from_jet(r, b, db)
}

/// Centered finite-difference divergence with step `delta`.
pub fn fd_divergence(vp: &VectorPotential, r: f64, phi: f64, z: f64, delta: f64) -> Result<f64> {
    let rp = (r + delta) * eval_b(vp, r + delta, phi, z)?[0];
    let rm = (r - delta) * eval_b(vp, r - delta, phi, z)?[0];
    let pp = eval_b(vp, r, phi + delta, z)?[1];
    let pm = eval_b(vp, r, phi - delta, z)?[1];
    let zp = eval_b(vp, r, phi, z + delta)?[2];
    let zm = eval_b(vp, r, phi, z - delta)?[2];
    Ok((rp - rm) / (2.0 * delta * r) + (pp - pm) / (2.0 * delta * r) + (zp - zm) / (2.0 * delta))
}

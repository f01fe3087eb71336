//! Gauge-fixed vector potential `A = (χ/R, ψ/R, 0)` obtained by exact
//! integration of the `R`-premultiplied component interpolants.
//!
//! With `u = R B_R`, `v = R B_φ`, `w = R B_Z`:
//!
//! ```text
//! ψ(R, φ, Z) = -∫_{Z_c}^{Z} u dZ' + ∫_{R_c}^{R} w(R', φ, Z_c) dR'
//! χ(R, φ, Z) =  ∫_{Z_c}^{Z} v dZ'
//! ```
//!
//! and `B = ∇×A` gives `B_R = u/R`, `B_φ = v/R`,
//! `B_Z = (∂ψ/∂R)/R - (∂χ/∂φ)/R²`. The last two derivatives are stored as
//! their own piecewise polynomials.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{FieldDump, Grid2D};
use crate::hermite::{
    build_node_coeffs, interpolate_dual, PiecewiseInterpolant, PiecewiseTrig2D, Quantity,
};
use crate::taylor::horner;
use crate::trig;

#[derive(Debug, Clone, PartialEq)]
pub struct VectorPotential {
    pub u: PiecewiseInterpolant,
    pub v: PiecewiseInterpolant,
    pub w: PiecewiseInterpolant,
    pub psi: PiecewiseTrig2D,
    pub chi: PiecewiseTrig2D,
    pub dpsi_dr: PiecewiseTrig2D,
    pub dchi_dphi: PiecewiseTrig2D,
    pub center: (f64, f64),
}

/// Dual point nearest the geometric center of the grid, ties to the lower
/// index.
pub fn default_center(grid: &Grid2D) -> (f64, f64) {
    (
        grid.dual_r((grid.n_r - 1) / 2),
        grid.dual_z((grid.n_z - 1) / 2),
    )
}

/// `∫_{Z_c}^{Z} f dZ'` cell by cell. Output has one more `Z` coefficient.
fn column_integral(f: &PiecewiseTrig2D, zc: f64) -> PiecewiseTrig2D {
    let g = f.grid;
    let (nl, ns) = (f.nl, f.ns);
    let n_modes = g.n_modes();
    let mut out = PiecewiseTrig2D::zeros(g, nl, ns + 1);
    for j2 in 0..g.n_z {
        for j1 in 0..g.n_r {
            let src = f.cell(j1, j2);
            let dst = out.cell_mut(j1, j2);
            for k in 0..n_modes {
                for s in 0..ns {
                    let c = g.h_z / (s + 1) as f64;
                    for l in 0..nl {
                        dst[(k * (ns + 1) + s + 1) * nl + l] = c * src[(k * ns + s) * nl + l];
                    }
                }
            }
        }
    }
    // Antiderivative of one cell at scaled height t, as an R-polynomial per mode.
    let at = |cell: &[f64], t: f64| -> Vec<f64> {
        let mut v = vec![0.0; n_modes * nl];
        for k in 0..n_modes {
            for l in 0..nl {
                let col: Vec<f64> = (0..=ns)
                    .map(|s| cell[(k * (ns + 1) + s) * nl + l])
                    .collect();
                v[k * nl + l] = horner(&col, t);
            }
        }
        v
    };
    let (jc, tc) = g.locate_z(zc);
    for j1 in 0..g.n_r {
        let mut offsets = vec![vec![0.0; n_modes * nl]; g.n_z];
        offsets[jc] = at(out.cell(j1, jc), tc).into_iter().map(|x| -x).collect();
        for j2 in jc + 1..g.n_z {
            let top = at(out.cell(j1, j2 - 1), 0.5);
            let bot = at(out.cell(j1, j2), -0.5);
            offsets[j2] = (0..n_modes * nl)
                .map(|i| offsets[j2 - 1][i] + top[i] - bot[i])
                .collect();
        }
        for j2 in (0..jc).rev() {
            let bot = at(out.cell(j1, j2 + 1), -0.5);
            let top = at(out.cell(j1, j2), 0.5);
            offsets[j2] = (0..n_modes * nl)
                .map(|i| offsets[j2 + 1][i] + bot[i] - top[i])
                .collect();
        }
        for (j2, off) in offsets.iter().enumerate() {
            let dst = out.cell_mut(j1, j2);
            for k in 0..n_modes {
                for l in 0..nl {
                    dst[k * (ns + 1) * nl + l] += off[k * nl + l];
                }
            }
        }
    }
    out
}

/// `∫_{R_c}^{R} f(R', φ, Z_c) dR'` per column, as `[k][l]` coefficient
/// blocks with one more `R` coefficient than `f`.
fn row_integral(f: &PiecewiseTrig2D, rc: f64, zc: f64) -> Vec<Vec<f64>> {
    let g = f.grid;
    let (nl, ns) = (f.nl, f.ns);
    let n_modes = g.n_modes();
    let (jz, tz) = g.locate_z(zc);
    let mut rows: Vec<Vec<f64>> = (0..g.n_r)
        .map(|j1| {
            let cell = f.cell(j1, jz);
            let mut out = vec![0.0; n_modes * (nl + 1)];
            for k in 0..n_modes {
                for l in 0..nl {
                    let col: Vec<f64> = (0..ns).map(|s| cell[(k * ns + s) * nl + l]).collect();
                    out[k * (nl + 1) + l + 1] = g.h_r / (l + 1) as f64 * horner(&col, tz);
                }
            }
            out
        })
        .collect();
    let at = |row: &[f64], t: f64| -> Vec<f64> {
        (0..n_modes)
            .map(|k| horner(&row[k * (nl + 1)..(k + 1) * (nl + 1)], t))
            .collect()
    };
    let (jc, tc) = g.locate_r(rc);
    let mut offsets = vec![vec![0.0; n_modes]; g.n_r];
    offsets[jc] = at(&rows[jc], tc).into_iter().map(|x| -x).collect();
    for j in jc + 1..g.n_r {
        let (r, l) = (at(&rows[j - 1], 0.5), at(&rows[j], -0.5));
        offsets[j] = (0..n_modes)
            .map(|k| offsets[j - 1][k] + r[k] - l[k])
            .collect();
    }
    for j in (0..jc).rev() {
        let (l, r) = (at(&rows[j + 1], -0.5), at(&rows[j], 0.5));
        offsets[j] = (0..n_modes)
            .map(|k| offsets[j + 1][k] + l[k] - r[k])
            .collect();
    }
    for (row, off) in rows.iter_mut().zip(&offsets) {
        for k in 0..n_modes {
            row[k * (nl + 1)] += off[k];
        }
    }
    rows
}

fn d_dr(f: &PiecewiseTrig2D) -> PiecewiseTrig2D {
    let g = f.grid;
    let (nl, ns) = (f.nl, f.ns);
    let mut out = PiecewiseTrig2D::zeros(g, nl - 1, ns);
    for j2 in 0..g.n_z {
        for j1 in 0..g.n_r {
            let src = f.cell(j1, j2);
            let dst = out.cell_mut(j1, j2);
            for ks in 0..g.n_modes() * ns {
                for l in 0..nl - 1 {
                    dst[ks * (nl - 1) + l] = (l + 1) as f64 / g.h_r * src[ks * nl + l + 1];
                }
            }
        }
    }
    out
}

fn d_dphi(f: &PiecewiseTrig2D) -> PiecewiseTrig2D {
    let g = f.grid;
    let (nl, ns) = (f.nl, f.ns);
    let n_modes = g.n_modes();
    let mut out = PiecewiseTrig2D::zeros(g, nl, ns);
    if g.n_phi == 0 {
        return out;
    }
    let mut modes = vec![0.0; n_modes];
    for j2 in 0..g.n_z {
        for j1 in 0..g.n_r {
            let src = f.cell(j1, j2).to_vec();
            let dst = out.cell_mut(j1, j2);
            for sl in 0..nl * ns {
                for (k, m) in modes.iter_mut().enumerate() {
                    *m = src[k * nl * ns + sl];
                }
                for (k, d) in trig::dphi_coeffs(g.n_phi, &modes).into_iter().enumerate() {
                    dst[k * nl * ns + sl] = d;
                }
            }
        }
    }
    out
}

/// Builds `ψ`, `χ` and the derivative pieces from the three
/// `R`-premultiplied interpolants. `center` defaults to [`default_center`].
pub fn reconstruct_potential(
    u: PiecewiseInterpolant,
    v: PiecewiseInterpolant,
    w: PiecewiseInterpolant,
    center: Option<(f64, f64)>,
) -> Result<VectorPotential> {
    let g = *u.grid();
    if *v.grid() != g
        || *w.grid() != g
        || (u.m_r, u.m_z) != (v.m_r, v.m_z)
        || (u.m_r, u.m_z) != (w.m_r, w.m_z)
    {
        return Err(Error::IncompatibleInterpolants);
    }
    let (rc, zc) = center.unwrap_or_else(|| default_center(&g));
    if !g.contains(rc, zc) || !rc.is_finite() || !zc.is_finite() {
        return Err(Error::CenterOutOfDomain { r: rc, z: zc });
    }
    let gu = column_integral(&u.pieces, zc);
    let chi = column_integral(&v.pieces, zc);
    let c1 = row_integral(&w.pieces, rc, zc);

    let (nl, ns) = (gu.nl, gu.ns);
    let n_modes = g.n_modes();
    let mut psi = PiecewiseTrig2D::zeros(g, nl + 1, ns);
    for j2 in 0..g.n_z {
        for j1 in 0..g.n_r {
            let src = gu.cell(j1, j2).to_vec();
            let dst = psi.cell_mut(j1, j2);
            for ks in 0..n_modes * ns {
                for l in 0..nl {
                    dst[ks * (nl + 1) + l] = -src[ks * nl + l];
                }
            }
            for k in 0..n_modes {
                for l in 0..=nl {
                    dst[k * ns * (nl + 1) + l] += c1[j1][k * (nl + 1) + l];
                }
            }
        }
    }
    let dpsi_dr = d_dr(&psi);
    let dchi_dphi = d_dphi(&chi);
    Ok(VectorPotential {
        u,
        v,
        w,
        psi,
        chi,
        dpsi_dr,
        dchi_dphi,
        center: (rc, zc),
    })
}

impl VectorPotential {
    /// Interpolates `R·B` from a dump and reconstructs the potential.
    pub fn from_dump(
        dump: &FieldDump,
        m_r: usize,
        m_z: usize,
        fine_ratio: usize,
        center: Option<(f64, f64)>,
    ) -> Result<Self> {
        let build = |q| interpolate_dual(&build_node_coeffs(dump, q, m_r, m_z, fine_ratio)?);
        reconstruct_potential(
            build(Quantity::RBR)?,
            build(Quantity::RBPhi)?,
            build(Quantity::RBZ)?,
            center,
        )
    }

    pub fn grid(&self) -> &Grid2D {
        self.u.grid()
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.u.m_r, self.u.m_z)
    }

    pub fn psi(&self, r: f64, phi: f64, z: f64) -> Result<f64> {
        self.psi.eval(r, phi, z)
    }

    pub fn chi(&self, r: f64, phi: f64, z: f64) -> Result<f64> {
        self.chi.eval(r, phi, z)
    }

    /// `(A_R, A_φ, A_Z)`.
    pub fn eval_potential(&self, r: f64, phi: f64, z: f64) -> Result<[f64; 3]> {
        let chi = self.chi.eval(r, phi, z)?;
        let psi = self.psi.eval(r, phi, z)?;
        Ok([chi / r, psi / r, 0.0])
    }
}

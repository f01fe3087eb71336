//! Tensor-product Taylor/trigonometric data on the primal grid and the
//! piecewise Hermite interpolant on the dual cells.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fd::{Stencil, MAX_ORDER};
use crate::grid::{Component, FieldDump, Grid2D};
use crate::taylor::hermite_fit;
use crate::trig;

/// Scalar sampled from a dump before differencing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    BR,
    BPhi,
    BZ,
    /// `R B_R`
    RBR,
    /// `R B_φ`
    RBPhi,
    /// `R B_Z`
    RBZ,
}

impl Quantity {
    fn source(self) -> (Component, bool) {
        match self {
            Quantity::BR => (Component::R, false),
            Quantity::BPhi => (Component::Phi, false),
            Quantity::BZ => (Component::Z, false),
            Quantity::RBR => (Component::R, true),
            Quantity::RBPhi => (Component::Phi, true),
            Quantity::RBZ => (Component::Z, true),
        }
    }
}

/// Scaled Taylor/trig coefficients `û_{l,s;k}` at every primal node of the
/// Hermite grid. Per node the block is laid out `[k][s][l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTensor {
    pub grid: Grid2D,
    pub m_r: usize,
    pub m_z: usize,
    data: Vec<f64>,
}

fn check_orders(m_r: usize, m_z: usize) -> Result<()> {
    for m in [m_r, m_z] {
        if m == 0 || m > MAX_ORDER {
            return Err(Error::UnsupportedOrder(m));
        }
    }
    Ok(())
}

impl CoeffTensor {
    /// Block length per node.
    pub fn block(&self) -> usize {
        self.grid.n_modes() * (self.m_z + 1) * (self.m_r + 1)
    }

    fn offset(&self, i1: usize, i2: usize) -> usize {
        (i2 * (self.grid.n_r + 1) + i1) * self.block()
    }

    pub fn node(&self, i1: usize, i2: usize) -> &[f64] {
        let o = self.offset(i1, i2);
        &self.data[o..o + self.block()]
    }

    pub fn get(&self, i1: usize, i2: usize, l: usize, s: usize, k: usize) -> f64 {
        self.node(i1, i2)[(k * (self.m_z + 1) + s) * (self.m_r + 1) + l]
    }

    /// Builds the tensor from a closure returning `û_{l,s;k}` at node
    /// `(i1, i2)`. Used for exact data and tests.
    pub fn from_fn(
        grid: Grid2D,
        m_r: usize,
        m_z: usize,
        f: impl Fn(usize, usize, usize, usize, usize) -> f64,
    ) -> Result<Self> {
        grid.validate()?;
        let n_modes = grid.n_modes();
        let mut data = Vec::with_capacity(grid.plane_len() * n_modes * (m_r + 1) * (m_z + 1));
        for i2 in 0..=grid.n_z {
            for i1 in 0..=grid.n_r {
                for k in 0..n_modes {
                    for s in 0..=m_z {
                        for l in 0..=m_r {
                            data.push(f(i1, i2, l, s, k));
                        }
                    }
                }
            }
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(CoeffTensor {
            grid,
            m_r,
            m_z,
            data,
        })
    }
}

/// Finite-difference Taylor data at the nodes of the grid `fine_ratio`
/// times coarser than the dump, followed by a real DFT across planes.
pub fn build_node_coeffs(
    dump: &FieldDump,
    quantity: Quantity,
    m_r: usize,
    m_z: usize,
    fine_ratio: usize,
) -> Result<CoeffTensor> {
    check_orders(m_r, m_z)?;
    let fine = dump.grid;
    let grid = fine.coarsen(fine_ratio)?;
    let (component, times_r) = quantity.source();
    let raw = dump.component(component);

    let rs: Vec<Stencil> = (0..=grid.n_r)
        .flat_map(|i| (0..=m_r).map(move |l| (i, l)))
        .map(|(i, l)| Stencil::derivative(l, i * fine_ratio, fine.n_r, fine.h_r))
        .collect::<Result<_>>()?;
    let zs: Vec<Stencil> = (0..=grid.n_z)
        .flat_map(|i| (0..=m_z).map(move |s| (i, s)))
        .map(|(i, s)| Stencil::derivative(s, i * fine_ratio, fine.n_z, fine.h_z))
        .collect::<Result<_>>()?;

    let scale = |h: f64, l: usize| (1..=l).fold(1.0, |acc, j| acc * h / j as f64);
    let sr: Vec<f64> = (0..=m_r).map(|l| scale(grid.h_r, l)).collect();
    let sz: Vec<f64> = (0..=m_z).map(|s| scale(grid.h_z, s)).collect();

    // Per node, per (s, l): one value per plane.
    let planes = fine.n_planes();
    let per_node = (m_r + 1) * (m_z + 1);
    let mut nodal = vec![0.0; grid.plane_len() * per_node * planes];
    let value = |p: usize, iz: usize, ir: usize| {
        let v = raw[fine.index(p, iz, ir)];
        if times_r {
            v * fine.r(ir)
        } else {
            v
        }
    };
    for p in 0..planes {
        for i2 in 0..=grid.n_z {
            for i1 in 0..=grid.n_r {
                let base = ((i2 * (grid.n_r + 1) + i1) * per_node) * planes;
                for s in 0..=m_z {
                    let zst = &zs[i2 * (m_z + 1) + s];
                    for l in 0..=m_r {
                        let rst = &rs[i1 * (m_r + 1) + l];
                        let d = zst.apply(|iz| rst.apply(|ir| value(p, iz, ir)));
                        nodal[base + (s * (m_r + 1) + l) * planes + p] = d * sr[l] * sz[s];
                    }
                }
            }
        }
    }

    let n_modes = grid.n_modes();
    let mut data = vec![0.0; grid.plane_len() * n_modes * per_node];
    for node in 0..grid.plane_len() {
        for sl in 0..per_node {
            let src = &nodal[(node * per_node + sl) * planes..][..planes];
            let modes = if grid.n_phi == 0 {
                vec![src[0]]
            } else {
                trig::analyze(src)
            };
            for (k, a) in modes.into_iter().enumerate() {
                data[node * n_modes * per_node + k * per_node + sl] = a;
            }
        }
    }
    Ok(CoeffTensor {
        grid,
        m_r,
        m_z,
        data,
    })
}

/// Piecewise tensor-product polynomial in the scaled cell variables times
/// the trigonometric basis in `φ`. Cell `(j1, j2)` stores `[k][s][l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseTrig2D {
    pub grid: Grid2D,
    /// Coefficients per cell in `R` (degree + 1).
    pub nl: usize,
    /// Coefficients per cell in `Z`.
    pub ns: usize,
    pub(crate) data: Vec<f64>,
}

/// One cell of a [`PiecewiseTrig2D`] with its center and scales.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorTrigPoly {
    pub center: (f64, f64),
    pub h: (f64, f64),
    pub n_phi: usize,
    pub nl: usize,
    pub ns: usize,
    pub coeffs: Vec<f64>,
}

impl TaylorTrigPoly {
    pub fn eval(&self, r: f64, phi: f64, z: f64) -> f64 {
        let sr = (r - self.center.0) / self.h.0;
        let sz = (z - self.center.1) / self.h.1;
        let n_modes = self.coeffs.len() / (self.nl * self.ns);
        (0..n_modes)
            .map(|k| {
                let t = trig::basis(self.n_phi, k, 0, phi);
                let c = &self.coeffs[k * self.nl * self.ns..][..self.nl * self.ns];
                let rows: Vec<f64> = (0..self.ns)
                    .map(|s| crate::taylor::horner(&c[s * self.nl..][..self.nl], sr))
                    .collect();
                t * crate::taylor::horner(&rows, sz)
            })
            .sum()
    }
}

/// Powers `s^l` differentiated `n` times w.r.t. the physical coordinate.
fn monomials(out: &mut [f64], s: f64, n: usize, h: f64) {
    let inv = 1.0 / h;
    let mut hn = 1.0;
    for _ in 0..n {
        hn *= inv;
    }
    for (l, o) in out.iter_mut().enumerate() {
        if l < n {
            *o = 0.0;
            continue;
        }
        let mut c = hn;
        for j in l - n + 1..=l {
            c *= j as f64;
        }
        let mut p = 1.0;
        for _ in 0..l - n {
            p *= s;
        }
        *o = c * p;
    }
}

const MAX_COEFFS: usize = 16;

impl PiecewiseTrig2D {
    pub fn zeros(grid: Grid2D, nl: usize, ns: usize) -> Self {
        let len = grid.n_r * grid.n_z * grid.n_modes() * nl * ns;
        PiecewiseTrig2D {
            grid,
            nl,
            ns,
            data: vec![0.0; len],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.grid.n_modes()
    }

    pub fn cell_len(&self) -> usize {
        self.n_modes() * self.nl * self.ns
    }

    pub fn cell(&self, j1: usize, j2: usize) -> &[f64] {
        let len = self.cell_len();
        &self.data[(j2 * self.grid.n_r + j1) * len..][..len]
    }

    pub fn cell_mut(&mut self, j1: usize, j2: usize) -> &mut [f64] {
        let len = self.cell_len();
        &mut self.data[(j2 * self.grid.n_r + j1) * len..][..len]
    }

    pub fn coeff(&self, j1: usize, j2: usize, k: usize, s: usize, l: usize) -> f64 {
        self.cell(j1, j2)[(k * self.ns + s) * self.nl + l]
    }

    pub fn piece(&self, j1: usize, j2: usize) -> TaylorTrigPoly {
        TaylorTrigPoly {
            center: (self.grid.dual_r(j1), self.grid.dual_z(j2)),
            h: (self.grid.h_r, self.grid.h_z),
            n_phi: self.grid.n_phi,
            nl: self.nl,
            ns: self.ns,
            coeffs: self.cell(j1, j2).to_vec(),
        }
    }

    /// Cell indices and scaled offsets, or `OutOfDomain`.
    pub fn locate(&self, r: f64, z: f64) -> Result<(usize, usize, f64, f64)> {
        if !self.grid.contains(r, z) || !r.is_finite() || !z.is_finite() {
            return Err(Error::OutOfDomain { r, z });
        }
        let (j1, sr) = self.grid.locate_r(r);
        let (j2, sz) = self.grid.locate_z(z);
        Ok((j1, j2, sr, sz))
    }

    /// Value in an explicit cell, for evaluation on shared edges.
    pub fn eval_in_cell(
        &self,
        j1: usize,
        j2: usize,
        r: f64,
        phi: f64,
        z: f64,
        n: (usize, usize, usize),
    ) -> f64 {
        let sr = (r - self.grid.dual_r(j1)) / self.grid.h_r;
        let sz = (z - self.grid.dual_z(j2)) / self.grid.h_z;
        self.eval_cell(j1, j2, sr, sz, phi, n)
    }

    fn eval_cell(
        &self,
        j1: usize,
        j2: usize,
        sr: f64,
        sz: f64,
        phi: f64,
        (nr, np, nz): (usize, usize, usize),
    ) -> f64 {
        let mut pr = [0.0; MAX_COEFFS];
        let mut pz = [0.0; MAX_COEFFS];
        monomials(&mut pr[..self.nl], sr, nr, self.grid.h_r);
        monomials(&mut pz[..self.ns], sz, nz, self.grid.h_z);
        let cell = self.cell(j1, j2);
        let mut total = 0.0;
        for k in 0..self.n_modes() {
            let t = trig::basis(self.grid.n_phi, k, np, phi);
            if t == 0.0 {
                continue;
            }
            let c = &cell[k * self.nl * self.ns..][..self.nl * self.ns];
            let mut acc = 0.0;
            for s in 0..self.ns {
                if pz[s] == 0.0 {
                    continue;
                }
                let row: f64 = c[s * self.nl..][..self.nl]
                    .iter()
                    .zip(&pr[..self.nl])
                    .map(|(a, b)| a * b)
                    .sum();
                acc += row * pz[s];
            }
            total += t * acc;
        }
        total
    }

    pub fn eval(&self, r: f64, phi: f64, z: f64) -> Result<f64> {
        self.eval_partial(r, phi, z, (0, 0, 0))
    }

    /// Partial derivative of orders `(n_R, n_φ, n_Z)`.
    pub fn eval_partial(&self, r: f64, phi: f64, z: f64, n: (usize, usize, usize)) -> Result<f64> {
        let (j1, j2, sr, sz) = self.locate(r, z)?;
        Ok(self.eval_cell(j1, j2, sr, sz, phi, n))
    }

    /// Value and the three first partials `(f, ∂_R f, ∂_φ f, ∂_Z f)`.
    pub fn eval_grad(&self, r: f64, phi: f64, z: f64) -> Result<[f64; 4]> {
        let (j1, j2, sr, sz) = self.locate(r, z)?;
        let mut pr = [[0.0; MAX_COEFFS]; 2];
        let mut pz = [[0.0; MAX_COEFFS]; 2];
        for n in 0..2 {
            monomials(&mut pr[n][..self.nl], sr, n, self.grid.h_r);
            monomials(&mut pz[n][..self.ns], sz, n, self.grid.h_z);
        }
        let cell = self.cell(j1, j2);
        let mut out = [0.0; 4];
        for k in 0..self.n_modes() {
            let t0 = trig::basis(self.grid.n_phi, k, 0, phi);
            let t1 = trig::basis(self.grid.n_phi, k, 1, phi);
            let c = &cell[k * self.nl * self.ns..][..self.nl * self.ns];
            let (mut v, mut dr, mut dz) = (0.0, 0.0, 0.0);
            for s in 0..self.ns {
                let row = &c[s * self.nl..][..self.nl];
                let r0: f64 = row.iter().zip(&pr[0][..self.nl]).map(|(a, b)| a * b).sum();
                let r1: f64 = row.iter().zip(&pr[1][..self.nl]).map(|(a, b)| a * b).sum();
                v += r0 * pz[0][s];
                dr += r1 * pz[0][s];
                dz += r0 * pz[1][s];
            }
            out[0] += t0 * v;
            out[1] += t0 * dr;
            out[2] += t1 * v;
            out[3] += t0 * dz;
        }
        Ok(out)
    }
}

/// Dual-grid Hermite interpolant of one scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseInterpolant {
    pub m_r: usize,
    pub m_z: usize,
    pub pieces: PiecewiseTrig2D,
}

impl PiecewiseInterpolant {
    pub fn grid(&self) -> &Grid2D {
        &self.pieces.grid
    }

    pub fn eval(&self, r: f64, phi: f64, z: f64) -> Result<f64> {
        self.pieces.eval(r, phi, z)
    }

    pub fn eval_partial(&self, r: f64, phi: f64, z: f64, n: (usize, usize, usize)) -> Result<f64> {
        self.pieces.eval_partial(r, phi, z, n)
    }
}

/// R-direction fits on every Z gridline, then Z-direction fits per cell.
pub fn interpolate_dual(coeffs: &CoeffTensor) -> Result<PiecewiseInterpolant> {
    check_orders(coeffs.m_r, coeffs.m_z)?;
    let grid = coeffs.grid;
    let (m_r, m_z) = (coeffs.m_r, coeffs.m_z);
    let nl = 2 * m_r + 2;
    let ns = 2 * m_z + 2;
    let n_modes = grid.n_modes();

    // Edge polynomials E(j1, i2)[k][s][l], l < nl, s <= m_z.
    let edge_len = n_modes * (m_z + 1) * nl;
    let mut edges = vec![0.0; grid.n_r * (grid.n_z + 1) * edge_len];
    for i2 in 0..=grid.n_z {
        for j1 in 0..grid.n_r {
            let (a, b) = (coeffs.node(j1, i2), coeffs.node(j1 + 1, i2));
            let e = &mut edges[(i2 * grid.n_r + j1) * edge_len..][..edge_len];
            for ks in 0..n_modes * (m_z + 1) {
                let src = ks * (m_r + 1);
                hermite_fit(
                    &a[src..src + m_r + 1],
                    &b[src..src + m_r + 1],
                    &mut e[ks * nl..][..nl],
                );
            }
        }
    }

    let mut pieces = PiecewiseTrig2D::zeros(grid, nl, ns);
    let mut a = vec![0.0; m_z + 1];
    let mut b = vec![0.0; m_z + 1];
    let mut out = vec![0.0; ns];
    for j2 in 0..grid.n_z {
        for j1 in 0..grid.n_r {
            let lo = &edges[(j2 * grid.n_r + j1) * edge_len..][..edge_len];
            let hi = &edges[((j2 + 1) * grid.n_r + j1) * edge_len..][..edge_len];
            let cell = pieces.cell_mut(j1, j2);
            for k in 0..n_modes {
                for l in 0..nl {
                    for s in 0..=m_z {
                        a[s] = lo[(k * (m_z + 1) + s) * nl + l];
                        b[s] = hi[(k * (m_z + 1) + s) * nl + l];
                    }
                    hermite_fit(&a, &b, &mut out);
                    for (s, v) in out.iter().enumerate() {
                        cell[(k * ns + s) * nl + l] = *v;
                    }
                }
            }
        }
    }
    Ok(PiecewiseInterpolant { m_r, m_z, pieces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{sample_analytic_field, sample_fn, AnalyticFieldSpec};
    use alloc::string::String;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn box_grid(n_r: usize, n_z: usize, n_phi: usize) -> Grid2D {
        Grid2D::spanning((1.0, 6.0), (-5.0, 5.0), n_r, n_z, n_phi).unwrap()
    }

    fn binom_scaled(h: f64, l: usize) -> f64 {
        (1..=l).fold(1.0, |acc, j| acc * h / j as f64)
    }

    /// Exact Taylor data of `Σ a_{ij} R^i Z^j` (single mode).
    fn poly_tensor(grid: Grid2D, m: usize, a: &[Vec<f64>]) -> CoeffTensor {
        let deriv = |c: &[f64], x: f64, n: usize| -> f64 {
            c.iter()
                .enumerate()
                .skip(n)
                .map(|(i, v)| {
                    v * ((i - n + 1)..=i).map(|j| j as f64).product::<f64>()
                        * x.powi((i - n) as i32)
                })
                .sum()
        };
        CoeffTensor::from_fn(grid, m, m, |i1, i2, l, s, k| {
            if k != 0 {
                return 0.0;
            }
            let (r, z) = (grid.r(i1), grid.z(i2));
            let dz: Vec<f64> = a.iter().map(|row| deriv(row, z, s)).collect();
            deriv(&dz, r, l) * binom_scaled(grid.h_r, l) * binom_scaled(grid.h_z, s)
        })
        .unwrap()
    }

    fn poly_eval(a: &[Vec<f64>], r: f64, z: f64) -> f64 {
        a.iter()
            .enumerate()
            .map(|(i, row)| {
                r.powi(i as i32)
                    * row
                        .iter()
                        .enumerate()
                        .map(|(j, v)| v * z.powi(j as i32))
                        .sum::<f64>()
            })
            .sum()
    }

    #[test]
    fn constant_field_gives_constant_data() {
        let g = box_grid(20, 20, 0);
        let d = sample_fn(&g, String::new(), |_, _, _| [2.5, 2.5, 2.5]).unwrap();
        let c = build_node_coeffs(&d, Quantity::BR, 2, 2, 4).unwrap();
        for i2 in 0..=c.grid.n_z {
            for i1 in 0..=c.grid.n_r {
                for (idx, v) in c.node(i1, i2).iter().enumerate() {
                    let e = if idx == 0 { 2.5 } else { 0.0 };
                    assert!((v - e).abs() < 1e-13);
                }
            }
        }
        let p = interpolate_dual(&c).unwrap();
        for j2 in 0..p.grid().n_z {
            for j1 in 0..p.grid().n_r {
                let cell = p.pieces.cell(j1, j2);
                assert!((cell[0] - 2.5).abs() < 1e-13);
                assert!(cell[1..].iter().all(|v| v.abs() < 1e-13));
            }
        }
        assert!(p.eval_partial(3.3, 0.0, 0.2, (1, 0, 0)).unwrap().abs() < 1e-13);
    }

    #[test]
    fn quadratic_second_coefficient() {
        let g = box_grid(8, 8, 0);
        let d = sample_fn(&g, String::new(), |r, _, _| [r * r, 0.0, 0.0]).unwrap();
        let c = build_node_coeffs(&d, Quantity::BR, 2, 1, 1).unwrap();
        let h = c.grid.h_r;
        for i1 in 0..=8 {
            assert!((c.get(i1, 3, 2, 0, 0) - h * h).abs() < 1e-12);
        }
    }

    #[test]
    fn times_r_premultiplies() {
        let g = box_grid(8, 8, 0);
        let d = sample_fn(&g, String::new(), |_, _, _| [1.0, 3.0, 1.0]).unwrap();
        let c = build_node_coeffs(&d, Quantity::RBPhi, 1, 1, 1).unwrap();
        assert!((c.get(2, 2, 0, 0, 0) - 3.0 * g.r(2)).abs() < 1e-14);
        assert!((c.get(2, 2, 1, 0, 0) - 3.0 * g.h_r).abs() < 1e-13);
    }

    #[test]
    fn nodal_values_round_trip_through_dft() {
        let g = box_grid(8, 8, 6);
        let d = sample_analytic_field(&AnalyticFieldSpec::perturbed(2, 0.1), &g).unwrap();
        let c = build_node_coeffs(&d, Quantity::BR, 2, 2, 1).unwrap();
        for p in 0..6 {
            let phi = g.plane_phi(p);
            for (i1, i2) in [(0, 0), (3, 5), (8, 8)] {
                let modes: Vec<f64> = (0..c.grid.n_modes())
                    .map(|k| c.get(i1, i2, 0, 0, k))
                    .collect();
                let v = trig::synthesize(6, &modes, phi);
                let e = d.br[g.index(p, i2, i1)];
                assert!((v - e).abs() <= 1e-12 * e.abs().max(1.0));
            }
        }
    }

    #[test]
    fn nodal_coefficients_converge_at_fourth_order() {
        // Error of the scaled first and second R-derivatives of B_R at the
        // node nearest (4, 1), measured in units of the fixed coarse h.
        let spec = AnalyticFieldSpec::default();
        let err = |ratio: usize| {
            let g = Grid2D::spanning((1.0, 6.0), (-5.0, 5.0), 5 * ratio, 10 * ratio, 0).unwrap();
            let d = sample_analytic_field(&spec, &g).unwrap();
            let c = build_node_coeffs(&d, Quantity::BR, 2, 2, ratio).unwrap();
            let (i1, i2) = (3, 6);
            let (r, z) = (c.grid.r(i1), c.grid.z(i2));
            let j = spec.jet(r, 0.0, z);
            let e1 = (c.get(i1, i2, 1, 0, 0) - j.d[0][0] * c.grid.h_r).abs();
            let e2 = (c.get(i1, i2, 0, 1, 0) - j.d[0][2] * c.grid.h_z).abs();
            e1.max(e2)
        };
        let (a, b, c) = (err(4), err(8), err(16));
        let o1 = (a / b).log2();
        let o2 = (b / c).log2();
        assert!(o1 > 3.7 && o2 > 3.7, "{o1} {o2}");
    }

    #[test]
    fn reproduces_global_polynomials() {
        for m in 1..=4 {
            let g = Grid2D::spanning((1.0, 2.0), (-0.5, 0.5), 4, 5, 0).unwrap();
            let deg = 2 * m + 1;
            let a: Vec<Vec<f64>> = (0..=deg)
                .map(|i| {
                    (0..=deg)
                        .map(|j| ((3 * i + 5 * j) % 7) as f64 / 7.0 - 0.4)
                        .collect()
                })
                .collect();
            let p = interpolate_dual(&poly_tensor(g, m, &a)).unwrap();
            for (r, z) in [(1.1, -0.45), (1.37, 0.02), (1.99, 0.5), (1.5, 0.1)] {
                let e = poly_eval(&a, r, z);
                let v = p.eval(r, 0.0, z).unwrap();
                assert!(
                    (v - e).abs() <= 1e-11 * e.abs().max(1.0),
                    "m={m}: {v} vs {e}"
                );
            }
        }
    }

    #[test]
    fn phi_derivative_of_cosine_mode() {
        let g = box_grid(4, 4, 4);
        let c = CoeffTensor::from_fn(
            g,
            1,
            1,
            |_, _, l, s, k| if k == 1 && l == 0 && s == 0 { 2.0 } else { 0.0 },
        )
        .unwrap();
        let p = interpolate_dual(&c).unwrap();
        assert!(p.eval_partial(3.0, 0.0, 0.0, (0, 1, 0)).unwrap().abs() < 1e-14);
        assert!((p.eval_partial(3.0, PI / 2.0, 0.0, (0, 1, 0)).unwrap() + 2.0).abs() < 1e-14);
    }

    fn perturbed_interp(m: usize) -> PiecewiseInterpolant {
        let g = Grid2D::spanning((1.0, 6.0), (-5.0, 5.0), 24, 40, 4).unwrap();
        let d = sample_analytic_field(&AnalyticFieldSpec::perturbed(1, 0.2), &g).unwrap();
        interpolate_dual(&build_node_coeffs(&d, Quantity::RBZ, m, m, 4).unwrap()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn continuity_across_interfaces(
            m in 1usize..4, j in 0usize..4, t in 0.0f64..1.0, phi in 0.0f64..6.3, vertical in any::<bool>(),
        ) {
            let p = perturbed_interp(m);
            let g = *p.grid();
            let (c1, c2, r, z) = if vertical {
                let j1 = 1 + j % (g.n_r - 1);
                let j2 = j % g.n_z;
                (( j1 - 1, j2), (j1, j2), g.r(j1), g.z_min + (j2 as f64 + t) * g.h_z)
            } else {
                let j2 = 1 + j % (g.n_z - 1);
                let j1 = j % g.n_r;
                ((j1, j2 - 1), (j1, j2), g.r_min + (j1 as f64 + t) * g.h_r, g.z(j2))
            };
            for nr in 0..=m {
                for nz in 0..=m {
                    let n = (nr, 0, nz);
                    // only derivatives normal to the interface up to m are matched
                    let normal = if vertical { nr } else { nz };
                    if normal > m { continue; }
                    let a = p.pieces.eval_in_cell(c1.0, c1.1, r, phi, z, n);
                    let b = p.pieces.eval_in_cell(c2.0, c2.1, r, phi, z, n);
                    let scale = a.abs().max(b.abs()).max(1.0);
                    prop_assert!((a - b).abs() <= 1e-10 * scale, "m={} n={:?}: {} vs {}", m, n, a, b);
                }
            }
        }

        #[test]
        fn periodic_in_phi(r in 1.0f64..6.0, z in -5.0f64..5.0, phi in -10.0f64..10.0) {
            let p = perturbed_interp(2);
            let a = p.eval(r, phi, z).unwrap();
            let b = p.eval(r, phi + 2.0 * PI, z).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn modes_are_independent(r in 1.0f64..6.0, z in -5.0f64..5.0, phi in 0.0f64..6.3, k in 0usize..5) {
            let full = perturbed_interp(2);
            let g = *full.grid();
            let cut = |keep: Option<usize>| {
                let mut q = full.clone();
                let nl = q.pieces.nl * q.pieces.ns;
                for j2 in 0..g.n_z {
                    for j1 in 0..g.n_r {
                        let cell = q.pieces.cell_mut(j1, j2);
                        for kk in 0..g.n_modes() {
                            match keep {
                                Some(kp) if kp != kk => cell[kk * nl..(kk + 1) * nl].fill(0.0),
                                None if kk != 0 => cell[kk * nl..(kk + 1) * nl].fill(0.0),
                                _ => {}
                            }
                        }
                        if keep.is_none() {
                            // move mode k into slot 0 to get the poloidal part alone
                            let src: Vec<f64> = full.pieces.cell(j1, j2)[k * nl..(k + 1) * nl].to_vec();
                            cell[..nl].copy_from_slice(&src);
                        }
                    }
                }
                q
            };
            let only_k = cut(Some(k)).eval(r, phi, z).unwrap();
            let poloidal = cut(None).eval(r, 0.0, z).unwrap();
            let expect = trig::basis(g.n_phi, k, 0, phi) * poloidal;
            prop_assert!((only_k - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn br_converges_at_fifth_order_or_better() {
        let spec = AnalyticFieldSpec::default();
        let err = |n: usize| {
            let g = Grid2D::spanning((1.0, 6.0), (-5.0, 5.0), 4 * n, 8 * n, 0).unwrap();
            let d = sample_analytic_field(&spec, &g).unwrap();
            let p =
                interpolate_dual(&build_node_coeffs(&d, Quantity::BR, 2, 2, 4).unwrap()).unwrap();
            let mut e: f64 = 0.0;
            for i in 0..=40 {
                for j in 0..=80 {
                    let (r, z) = (1.0 + 5.0 * i as f64 / 40.0, -5.0 + 10.0 * j as f64 / 80.0);
                    e = e.max((p.eval(r, 0.0, z).unwrap() - spec.field(r, 0.0, z)[0]).abs());
                }
            }
            e
        };
        let o = (err(10) / err(20)).log2();
        assert!(o >= 5.0, "order {o}");
    }

    #[test]
    fn out_of_domain() {
        let p = perturbed_interp(1);
        assert!(matches!(
            p.eval(0.5, 0.0, 0.0),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(p.eval(6.0, 0.0, 5.0).is_ok());
    }

    #[test]
    fn piece_view_matches_eval() {
        let p = perturbed_interp(2);
        let piece = p.pieces.piece(3, 7);
        let (r, z) = (p.grid().dual_r(3) + 0.03, p.grid().dual_z(7) - 0.07);
        assert!((piece.eval(r, 1.1, z) - p.eval(r, 1.1, z).unwrap()).abs() < 1e-12);
    }
}

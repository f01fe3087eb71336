//! Regular poloidal grids and raw field dumps.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::taylor::locate_cell;

/// Relative slack (in units of the spacing) accepted when a coordinate
/// sits on the outer boundary of the grid.
const EDGE_SLACK: f64 = 1e-10;

/// Regular `(R, Z)` grid with `n_r x n_z` primal intervals and `n_phi`
/// equidistant toroidal planes at `φ_p = 2πp / n_phi` (`n_phi = 0` means
/// axisymmetric, one plane).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub r_min: f64,
    pub z_min: f64,
    pub h_r: f64,
    pub h_z: f64,
    pub n_r: usize,
    pub n_z: usize,
    pub n_phi: usize,
}

impl Grid2D {
    pub fn new(
        r_min: f64,
        z_min: f64,
        h_r: f64,
        h_z: f64,
        n_r: usize,
        n_z: usize,
        n_phi: usize,
    ) -> Result<Self> {
        let grid = Grid2D {
            r_min,
            z_min,
            h_r,
            h_z,
            n_r,
            n_z,
            n_phi,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid spanning `[r0, r1] x [z0, z1]` with the given interval counts.
    pub fn spanning(
        (r0, r1): (f64, f64),
        (z0, z1): (f64, f64),
        n_r: usize,
        n_z: usize,
        n_phi: usize,
    ) -> Result<Self> {
        if n_r == 0 || n_z == 0 {
            return Err(Error::DegenerateGrid("interval counts must be positive"));
        }
        Self::new(
            r0,
            z0,
            (r1 - r0) / n_r as f64,
            (z1 - z0) / n_z as f64,
            n_r,
            n_z,
            n_phi,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_r > 0.0 && self.h_z > 0.0 && self.h_r.is_finite() && self.h_z.is_finite()) {
            return Err(Error::DegenerateGrid(
                "spacings must be positive and finite",
            ));
        }
        if self.n_r < 4 || self.n_z < 4 {
            return Err(Error::DegenerateGrid(
                "need at least 4 intervals per direction",
            ));
        }
        if self.n_phi % 2 != 0 {
            return Err(Error::DegenerateGrid("n_phi must be 0 or even"));
        }
        if !(self.r_min > 0.0 && self.r_min.is_finite() && self.z_min.is_finite()) {
            return Err(Error::DegenerateGrid("r_min must be positive"));
        }
        Ok(())
    }

    pub fn r_max(&self) -> f64 {
        self.r_min + self.n_r as f64 * self.h_r
    }

    pub fn z_max(&self) -> f64 {
        self.z_min + self.n_z as f64 * self.h_z
    }

    /// Primal node coordinate `R_i`.
    pub fn r(&self, i: usize) -> f64 {
        self.r_min + i as f64 * self.h_r
    }

    pub fn z(&self, i: usize) -> f64 {
        self.z_min + i as f64 * self.h_z
    }

    /// Dual (cell-center) coordinate `R_{j+1/2}`.
    pub fn dual_r(&self, j: usize) -> f64 {
        self.r_min + (j as f64 + 0.5) * self.h_r
    }

    pub fn dual_z(&self, j: usize) -> f64 {
        self.z_min + (j as f64 + 0.5) * self.h_z
    }

    /// Number of stored toroidal planes.
    pub fn n_planes(&self) -> usize {
        self.n_phi.max(1)
    }

    /// Number of trigonometric modes carried per coefficient.
    pub fn n_modes(&self) -> usize {
        if self.n_phi == 0 {
            1
        } else {
            self.n_phi + 1
        }
    }

    pub fn plane_phi(&self, p: usize) -> f64 {
        if self.n_phi == 0 {
            0.0
        } else {
            2.0 * PI * p as f64 / self.n_phi as f64
        }
    }

    /// Nodes per toroidal plane.
    pub fn plane_len(&self) -> usize {
        (self.n_r + 1) * (self.n_z + 1)
    }

    pub fn sample_len(&self) -> usize {
        self.n_planes() * self.plane_len()
    }

    /// Flat index for the `[plane][Z][R]` layout.
    pub fn index(&self, plane: usize, iz: usize, ir: usize) -> usize {
        (plane * (self.n_z + 1) + iz) * (self.n_r + 1) + ir
    }

    pub fn contains(&self, r: f64, z: f64) -> bool {
        let sr = EDGE_SLACK * self.h_r;
        let sz = EDGE_SLACK * self.h_z;
        r >= self.r_min - sr
            && r <= self.r_max() + sr
            && z >= self.z_min - sz
            && z <= self.z_max() + sz
    }

    /// Coarser grid with spacing multiplied by `ratio`.
    pub fn coarsen(&self, ratio: usize) -> Result<Grid2D> {
        if ratio == 0 || self.n_r % ratio != 0 || self.n_z % ratio != 0 {
            return Err(Error::IncompatibleFineRatio {
                ratio,
                nr: self.n_r,
                nz: self.n_z,
            });
        }
        Grid2D::new(
            self.r_min,
            self.z_min,
            self.h_r * ratio as f64,
            self.h_z * ratio as f64,
            self.n_r / ratio,
            self.n_z / ratio,
            self.n_phi,
        )
    }

    /// Dual cell containing `r` and the scaled offset from its center.
    ///
    /// A coordinate exactly on an interior gridline belongs to the lower
    /// cell.
    pub fn locate_r(&self, r: f64) -> (usize, f64) {
        locate_cell(r, self.r_min, self.h_r, self.n_r)
    }

    pub fn locate_z(&self, z: f64) -> (usize, f64) {
        locate_cell(z, self.z_min, self.h_z, self.n_z)
    }
}

/// Raw `B_R, B_φ, B_Z` samples on a regular grid, laid out `[plane][Z][R]`
/// and normalized to the on-axis field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub grid: Grid2D,
    pub br: Vec<f64>,
    pub bphi: Vec<f64>,
    pub bz: Vec<f64>,
    pub provenance: String,
}

impl FieldDump {
    pub fn new(
        grid: Grid2D,
        br: Vec<f64>,
        bphi: Vec<f64>,
        bz: Vec<f64>,
        provenance: String,
    ) -> Result<Self> {
        grid.validate()?;
        let expected = grid.sample_len();
        for block in [&br, &bphi, &bz] {
            if block.len() != expected {
                return Err(Error::SampleCountMismatch {
                    expected,
                    got: block.len(),
                });
            }
        }
        let dump = FieldDump {
            grid,
            br,
            bphi,
            bz,
            provenance,
        };
        if let Some(i) = dump.first_non_finite() {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(dump)
    }

    fn first_non_finite(&self) -> Option<usize> {
        let n = self.br.len();
        self.br
            .iter()
            .chain(&self.bphi)
            .chain(&self.bz)
            .position(|v| !v.is_finite())
            .map(|i| i % n)
    }

    pub fn component(&self, c: Component) -> &[f64] {
        match c {
            Component::R => &self.br,
            Component::Phi => &self.bphi,
            Component::Z => &self.bz,
        }
    }
}

/// Cylindrical field component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    R,
    Phi,
    Z,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid() -> Grid2D {
        Grid2D::new(1.0, -5.0, 1.0, 1.0, 5, 10, 0).unwrap()
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid2D::new(1.0, 0.0, 0.0, 1.0, 5, 5, 0).is_err());
        assert!(Grid2D::new(1.0, 0.0, 1.0, 1.0, 3, 5, 0).is_err());
        assert!(Grid2D::new(1.0, 0.0, 1.0, 1.0, 5, 5, 3).is_err());
        assert!(Grid2D::new(-1.0, 0.0, 1.0, 1.0, 5, 5, 0).is_err());
        assert!(Grid2D::new(1.0, 0.0, 1.0, 1.0, 5, 5, 4).is_ok());
    }

    #[test]
    fn interface_points_go_to_lower_cell() {
        let g = grid();
        assert_eq!(g.locate_r(2.0).0, 0);
        assert_eq!(g.locate_r(2.0 + 1e-12).0, 1);
        assert_eq!(g.locate_r(1.0).0, 0);
        assert_eq!(g.locate_r(6.0).0, 4);
        let (j, s) = g.locate_z(0.0);
        assert_eq!(j, 4);
        assert!((s - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coarsen_needs_divisible_counts() {
        let g = Grid2D::new(1.0, -5.0, 0.25, 0.25, 20, 40, 0).unwrap();
        let c = g.coarsen(4).unwrap();
        assert_eq!((c.n_r, c.n_z), (5, 10));
        assert_eq!(c.h_r, 1.0);
        assert!(g.coarsen(3).is_err());
    }

    #[test]
    fn dump_validates_lengths_and_values() {
        let g = grid();
        let n = g.sample_len();
        assert!(FieldDump::new(g, vec![0.0; n], vec![0.0; n], vec![0.0; n], String::new()).is_ok());
        assert!(matches!(
            FieldDump::new(
                g,
                vec![0.0; n - 1],
                vec![0.0; n],
                vec![0.0; n],
                String::new()
            ),
            Err(Error::SampleCountMismatch { .. })
        ));
        let mut bad = vec![0.0; n];
        bad[7] = f64::NAN;
        assert_eq!(
            FieldDump::new(g, vec![0.0; n], bad, vec![0.0; n], String::new()),
            Err(Error::NonFiniteSample(7))
        );
    }
}

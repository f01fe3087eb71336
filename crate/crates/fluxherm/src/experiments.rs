//! Convergence, divergence, conservation and Poincaré experiments on the
//! analytic test fields. Shared by the CLI and the acceptance tests.

use std::f64::consts::TAU;

use fluxherm_core::analytic::{sample_analytic_field, AnalyticFieldSpec};
use fluxherm_core::field::{eval_b_jet, fd_divergence, sample_from_jet};
use fluxherm_core::ode::{loglog_slope, AdaptiveSettings};
use fluxherm_core::poincare::{trace_seed, SeedSpec, SeedTrace};
use fluxherm_core::pusher::{push_fixed, FieldProvider, GCParams, GCState, Reconstructed};
use fluxherm_core::vecpot::VectorPotential;
use fluxherm_core::{FieldDump, Grid2D, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// `(R, Z)` extent used by every experiment on the analytic fields.
pub const DOMAIN: ((f64, f64), (f64, f64)) = ((1.0, 6.0), (-5.0, 5.0));

/// Dump grid with `pts_r × pts_z` sample points on [`DOMAIN`].
pub fn dump_grid(pts_r: usize, pts_z: usize, n_phi: usize) -> Result<Grid2D> {
    Grid2D::spanning(
        DOMAIN.0,
        DOMAIN.1,
        pts_r.saturating_sub(1),
        pts_z.saturating_sub(1),
        n_phi,
    )
}

pub fn analytic_potential(
    spec: &AnalyticFieldSpec,
    grid: &Grid2D,
    m: usize,
    fine_ratio: usize,
) -> Result<(FieldDump, VectorPotential)> {
    let dump = sample_analytic_field(spec, grid)?;
    let vp = VectorPotential::from_dump(&dump, m, m, fine_ratio, None)?;
    Ok((dump, vp))
}

// ---------------------------------------------------------------- converge

pub const DEFAULT_LADDER: [(usize, usize); 4] = [(21, 41), (41, 81), (81, 161), (161, 321)];

#[derive(Debug, Clone)]
pub struct ConvergeConfig {
    pub spec: AnalyticFieldSpec,
    /// Sample point counts `(R, Z)` per rung.
    pub ladder: Vec<(usize, usize)>,
    pub m: usize,
    pub fine_ratio: usize,
    /// Oversampling points per unit area.
    pub density: f64,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self {
            spec: AnalyticFieldSpec::default(),
            ladder: DEFAULT_LADDER.to_vec(),
            m: 2,
            fine_ratio: 4,
            density: 1e4,
        }
    }
}

/// Relative l2 errors at one resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergeRow {
    pub m: usize,
    pub pts: (usize, usize),
    /// Hermite grid spacing in `Z`.
    pub h_z: f64,
    pub br: f64,
    pub bphi: f64,
    pub bz: f64,
    pub psi: f64,
    pub grad_b: f64,
}

#[derive(Default)]
struct Sums {
    err: [f64; 5],
    refn: [f64; 5],
}

impl Sums {
    fn add(mut self, o: Sums) -> Sums {
        for i in 0..5 {
            self.err[i] += o.err[i];
            self.refn[i] += o.refn[i];
        }
        self
    }
}

/// Errors against the closed form on an oversampled cell-centered grid.
pub fn converge_one(cfg: &ConvergeConfig, pts: (usize, usize)) -> Result<ConvergeRow> {
    let grid = dump_grid(pts.0, pts.1, 0)?;
    let (_, vp) = analytic_potential(&cfg.spec, &grid, cfg.m, cfg.fine_ratio)?;
    let spec = &cfg.spec;
    let (rc, zc) = vp.center;
    let psi_c = spec.psi_exact(rc, zc)?;
    let ((r0, r1), (z0, z1)) = DOMAIN;
    let spacing = 1.0 / cfg.density.sqrt();
    let nr = ((r1 - r0) / spacing).round().max(1.0) as usize;
    let nz = ((z1 - z0) / spacing).round().max(1.0) as usize;
    let (dr, dz) = ((r1 - r0) / nr as f64, (z1 - z0) / nz as f64);
    let sums = (0..nz)
        .into_par_iter()
        .map(|iz| -> Result<Sums> {
            let z = z0 + (iz as f64 + 0.5) * dz;
            let mut s = Sums::default();
            for ir in 0..nr {
                let r = r0 + (ir as f64 + 0.5) * dr;
                let (b, db) = eval_b_jet(&vp, r, 0.0, z)?;
                let gb = sample_from_jet(r, b, db)?.grad_b();
                let psi = vp.psi(r, 0.0, z)?;
                let jet = spec.jet(r, 0.0, z);
                let gb_ref = sample_from_jet(r, jet.b, jet.d)?.grad_b();
                let psi_ref = spec.psi_exact(r, z)? - psi_c;
                for c in 0..3 {
                    s.err[c] += (b[c] - jet.b[c]).powi(2);
                    s.refn[c] += jet.b[c].powi(2);
                    s.err[4] += (gb[c] - gb_ref[c]).powi(2);
                    s.refn[4] += gb_ref[c].powi(2);
                }
                s.err[3] += (psi - psi_ref).powi(2);
                s.refn[3] += psi_ref.powi(2);
            }
            Ok(s)
        })
        .try_reduce(Sums::default, |a, b| Ok(a.add(b)))?;
    let rel = |i: usize| (sums.err[i] / sums.refn[i]).sqrt();
    Ok(ConvergeRow {
        m: cfg.m,
        pts,
        h_z: vp.grid().h_z,
        br: rel(0),
        bphi: rel(1),
        bz: rel(2),
        psi: rel(3),
        grad_b: rel(4),
    })
}

pub fn converge(cfg: &ConvergeConfig) -> Result<Vec<ConvergeRow>> {
    cfg.ladder.iter().map(|&p| converge_one(cfg, p)).collect()
}

/// Fitted log-log slopes against `h_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergeSlopes {
    pub br: f64,
    pub bz: f64,
    pub psi: f64,
    pub grad_b: f64,
}

pub fn converge_slopes(rows: &[ConvergeRow]) -> ConvergeSlopes {
    let h: Vec<f64> = rows.iter().map(|r| r.h_z).collect();
    let fit =
        |f: fn(&ConvergeRow) -> f64| loglog_slope(&h, &rows.iter().map(f).collect::<Vec<_>>());
    ConvergeSlopes {
        br: fit(|r| r.br),
        bz: fit(|r| r.bz),
        psi: fit(|r| r.psi),
        grad_b: fit(|r| r.grad_b),
    }
}

// --------------------------------------------------------------- div-check

#[derive(Debug, Clone, PartialEq)]
pub struct DivRow {
    pub r: f64,
    pub phi: f64,
    pub z: f64,
    pub bmag: f64,
    /// One entry per step size.
    pub div: Vec<f64>,
}

/// Relative plateau below which the finite-difference divergence counts as
/// roundoff.
pub const DIV_PLATEAU: f64 = 1e-9;

/// Centered FD divergence at `n` uniform random interior points.
pub fn div_check(vp: &VectorPotential, n: usize, seed: u64, deltas: &[f64]) -> Result<Vec<DivRow>> {
    let g = vp.grid();
    let margin = 2.0 * deltas.iter().cloned().fold(0.0, f64::max) + 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            (
                rng.gen_range(g.r_min + margin..g.r_max() - margin),
                rng.gen_range(0.0..TAU),
                rng.gen_range(g.z_min + margin..g.z_max() - margin),
            )
        })
        .collect();
    pts.into_par_iter()
        .map(|(r, phi, z)| {
            let b = fluxherm_core::field::eval_b(vp, r, phi, z)?;
            let bmag = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
            let div = deltas
                .iter()
                .map(|&d| fd_divergence(vp, r, phi, z, d))
                .collect::<Result<Vec<_>>>()?;
            Ok(DivRow {
                r,
                phi,
                z,
                bmag,
                div,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivSummary {
    pub n: usize,
    /// Points whose divergence dropped by at least half the `δ²` factor.
    pub n_scaling: usize,
    /// Points that did not scale but sit on the plateau at the smallest step.
    pub n_plateau: usize,
    pub n_fail: usize,
    pub max_rel_small: f64,
    pub median_ratio: f64,
}

/// Classifies rows computed with `deltas = [δ1, δ2]`, `δ1 > δ2`.
pub fn div_summary(rows: &[DivRow], deltas: &[f64]) -> DivSummary {
    let expect = (deltas[1] / deltas[0]).powi(2);
    let mut s = DivSummary {
        n: rows.len(),
        n_scaling: 0,
        n_plateau: 0,
        n_fail: 0,
        max_rel_small: 0.0,
        median_ratio: f64::NAN,
    };
    let mut ratios = Vec::new();
    for row in rows {
        let (a, b) = (row.div[0].abs(), row.div[1].abs());
        s.max_rel_small = s.max_rel_small.max(b / row.bmag);
        if a > 0.0 {
            ratios.push(b / a);
        }
        if b <= 2.0 * expect * a {
            s.n_scaling += 1;
        } else if b <= DIV_PLATEAU * row.bmag {
            s.n_plateau += 1;
        } else {
            s.n_fail += 1;
        }
    }
    ratios.sort_by(f64::total_cmp);
    if !ratios.is_empty() {
        s.median_ratio = ratios[ratios.len() / 2];
    }
    s
}

// ------------------------------------------------------- gc conservation

#[derive(Debug, Clone)]
pub struct GcLadderConfig {
    pub spec: AnalyticFieldSpec,
    /// Sample point counts; the Hermite grid is `fine_ratio` times coarser.
    pub pts: (usize, usize),
    pub fine_ratio: usize,
    pub particle: GCState,
    pub params: GCParams,
    pub t_end: f64,
    pub steps: Vec<usize>,
}

impl Default for GcLadderConfig {
    fn default() -> Self {
        Self {
            spec: AnalyticFieldSpec::default(),
            pts: (321, 641),
            fine_ratio: 4,
            particle: GCState::new(10.0, 0.9, 3.6, 0.0, 0.1),
            params: GCParams::default(),
            t_end: 0.5,
            steps: vec![2, 4, 8, 16],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcRow {
    pub m: usize,
    pub n: usize,
    pub dt: f64,
    pub dmu: f64,
    pub dpphi: f64,
}

/// Fixed-step ladder for one build order. `m = 1` uses the lenient field.
pub fn gc_ladder(cfg: &GcLadderConfig, m: usize) -> Result<Vec<GcRow>> {
    let grid = dump_grid(cfg.pts.0, cfg.pts.1, 0)?;
    let (_, vp) = analytic_potential(&cfg.spec, &grid, m, cfg.fine_ratio)?;
    let field = Reconstructed {
        vp: &vp,
        lenient: m <= 1,
    };
    gc_ladder_on(&field, cfg, m)
}

pub fn gc_ladder_on<F: FieldProvider + Sync>(
    field: &F,
    cfg: &GcLadderConfig,
    m: usize,
) -> Result<Vec<GcRow>> {
    cfg.steps
        .par_iter()
        .map(|&n| {
            let run = push_fixed(cfg.particle, field, &cfg.params, cfg.t_end, n)?;
            Ok(GcRow {
                m,
                n,
                dt: cfg.t_end / n as f64,
                dmu: run.mean_dmu_rel,
                dpphi: run.mean_dpphi_rel,
            })
        })
        .collect()
}

/// `(μ slope, p_φ slope)` over the rows.
pub fn gc_slopes(rows: &[GcRow]) -> (f64, f64) {
    let dt: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    (
        loglog_slope(&dt, &rows.iter().map(|r| r.dmu).collect::<Vec<_>>()),
        loglog_slope(&dt, &rows.iter().map(|r| r.dpphi).collect::<Vec<_>>()),
    )
}

// ----------------------------------------------------------------- ensemble

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSeeding {
    pub n: usize,
    pub seed: u64,
    pub p: f64,
    pub xi: (f64, f64),
    /// Center and radii of the `(R, Z)` annulus.
    pub axis: (f64, f64),
    pub radius: (f64, f64),
}

/// Uniform (by area) positions in the annulus, uniform pitch, random `φ`.
pub fn seed_particles(s: &EnsembleSeeding) -> Vec<GCState> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let (a2, b2) = (s.radius.0 * s.radius.0, s.radius.1 * s.radius.1);
    (0..s.n)
        .map(|_| {
            let rho = if b2 > a2 {
                rng.gen_range(a2..b2).sqrt()
            } else {
                s.radius.0
            };
            let th = rng.gen_range(0.0..TAU);
            let xi = if s.xi.1 > s.xi.0 {
                rng.gen_range(s.xi.0..s.xi.1)
            } else {
                s.xi.0
            };
            let phi = rng.gen_range(0.0..TAU);
            GCState::new(
                s.p,
                xi,
                s.axis.0 + rho * th.cos(),
                phi,
                s.axis.1 + rho * th.sin(),
            )
        })
        .collect()
}

/// Parallel [`fluxherm_core::pusher::push_ensemble`].
pub fn push_ensemble_par<F: FieldProvider + Sync>(
    states: &[GCState],
    field: &F,
    params: &GCParams,
    t_end: f64,
    settings: &AdaptiveSettings,
) -> fluxherm_core::pusher::EnsembleReport {
    let reports = states
        .par_iter()
        .map(|s| fluxherm_core::pusher::push_particle(*s, field, params, t_end, settings))
        .collect();
    fluxherm_core::pusher::summarize(reports)
}

// ----------------------------------------------------------------- poincare

/// Traces all seeds in parallel; output order follows the seed order.
pub fn trace_poincare_par(
    vp: &VectorPotential,
    seeds: &SeedSpec,
    transits: usize,
    phi0: f64,
    settings: &AdaptiveSettings,
) -> Vec<SeedTrace> {
    seeds
        .points()
        .into_par_iter()
        .map(|p| trace_seed(vp, p, transits, phi0, 1.0, settings))
        .collect()
}

/// Per-seed `ψ` spread; `NaN` where `ψ` cannot be evaluated.
pub fn psi_spreads(vp: &VectorPotential, traces: &[SeedTrace], phi0: f64) -> Vec<f64> {
    traces
        .iter()
        .map(|t| t.psi_spread(vp, phi0).unwrap_or(f64::NAN))
        .collect()
}

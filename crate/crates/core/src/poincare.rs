//! Field-line tracing with `φ` as the independent variable:
//!
//! ```text
//! dR/dφ = R B_R / B_φ = R u / v
//! dZ/dφ = R B_Z / B_φ = R (P - Q/R) / v
//! ```
//!
//! with `P = ∂ψ/∂R` and `Q = ∂χ/∂φ`. Each transit is integrated separately
//! so that the step is clamped onto the plane `φ0 + 2πk`.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::ode::{integrate_adaptive, AdaptiveSettings};
use crate::vecpot::VectorPotential;

/// `(dR/dφ, dZ/dφ)`.
pub fn fieldline_rhs(vp: &VectorPotential, phi: f64, r: f64, z: f64) -> Result<[f64; 2]> {
    let u = vp.u.eval(r, phi, z)?;
    let v = vp.v.eval(r, phi, z)?;
    let p = vp.dpsi_dr.eval(r, phi, z)?;
    let q = if vp.grid().n_phi == 0 {
        0.0
    } else {
        vp.dchi_dphi.eval(r, phi, z)?
    };
    if !(v.abs() > 1e-300) || !v.is_finite() {
        return Err(Error::VanishingBphi { r, z });
    }
    Ok([r * u / v, r * (p - q / r) / v])
}

/// Seeds in the poloidal plane.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedSpec {
    /// `count` points spaced evenly from `origin + offset·d` to
    /// `origin + (offset + length)·d`, `d = (cos angle, sin angle)` in `(R, Z)`.
    Line {
        origin: (f64, f64),
        offset: f64,
        length: f64,
        angle: f64,
        count: usize,
    },
    Points(Vec<(f64, f64)>),
}

impl SeedSpec {
    pub fn points(&self) -> Vec<(f64, f64)> {
        match self {
            SeedSpec::Points(p) => p.clone(),
            SeedSpec::Line {
                origin,
                offset,
                length,
                angle,
                count,
            } => {
                let (s, c) = angle.sin_cos();
                (0..*count)
                    .map(|i| {
                        let f = if *count == 1 {
                            0.0
                        } else {
                            i as f64 / (*count - 1) as f64
                        };
                        let d = offset + length * f;
                        (origin.0 + d * c, origin.1 + d * s)
                    })
                    .collect()
            }
        }
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    f64::from_str(s.trim()).map_err(|_| Error::InvalidSettings("seed spec: bad number"))
}

fn parse_angle(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some(d) = s.strip_suffix("deg") {
        Ok(parse_f64(d)?.to_radians())
    } else {
        parse_f64(s.strip_suffix("rad").unwrap_or(s))
    }
}

/// `line:R,Z,offset,length,angle,count` (angle in radians unless suffixed
/// `deg`) or `points:R,Z;R,Z;...`.
impl FromStr for SeedSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or(Error::InvalidSettings("seed spec: missing ':'"))?;
        match kind.trim() {
            "line" => {
                let f: Vec<&str> = rest.split(',').collect();
                if f.len() != 6 {
                    return Err(Error::InvalidSettings("seed spec: line needs 6 fields"));
                }
                let count = f[5]
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidSettings("seed spec: bad count"))?;
                if count == 0 {
                    return Err(Error::InvalidSettings(
                        "seed spec: count must be at least 1",
                    ));
                }
                Ok(SeedSpec::Line {
                    origin: (parse_f64(f[0])?, parse_f64(f[1])?),
                    offset: parse_f64(f[2])?,
                    length: parse_f64(f[3])?,
                    angle: parse_angle(f[4])?,
                    count,
                })
            }
            "points" => {
                let pts = rest
                    .split(';')
                    .filter(|p| !p.trim().is_empty())
                    .map(|p| {
                        let (r, z) = p
                            .split_once(',')
                            .ok_or(Error::InvalidSettings("seed spec: point needs R,Z"))?;
                        Ok((parse_f64(r)?, parse_f64(z)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if pts.is_empty() {
                    return Err(Error::InvalidSettings("seed spec: no points"));
                }
                Ok(SeedSpec::Points(pts))
            }
            _ => Err(Error::InvalidSettings(
                "seed spec: expected 'line:' or 'points:'",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    LeftDomain,
    /// Any other integrator or field failure, by error name.
    StepFailure(String),
}

impl Termination {
    pub fn as_str(&self) -> &str {
        match self {
            Termination::Completed => "completed",
            Termination::LeftDomain => "left_domain",
            Termination::StepFailure(_) => "step_failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub transit: usize,
    pub phi: f64,
    pub r: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedTrace {
    pub seed: (f64, f64),
    pub crossings: Vec<Crossing>,
    pub termination: Termination,
}

impl SeedTrace {
    /// Spread `max - min` of the interpolated `ψ` over the seed and its
    /// crossings, evaluated on the section plane.
    pub fn psi_spread(&self, vp: &VectorPotential, phi0: f64) -> Result<f64> {
        let mut lo = vp.psi(self.seed.0, phi0, self.seed.1)?;
        let mut hi = lo;
        for c in &self.crossings {
            let v = vp.psi(c.r, c.phi, c.z)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok(hi - lo)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareSet {
    pub phi0: f64,
    pub traces: Vec<SeedTrace>,
}

/// Follows one field line for `transits` toroidal turns (negative `dir`
/// traces backwards).
pub fn trace_seed(
    vp: &VectorPotential,
    seed: (f64, f64),
    transits: usize,
    phi0: f64,
    dir: f64,
    settings: &AdaptiveSettings,
) -> SeedTrace {
    let mut out = SeedTrace {
        seed,
        crossings: Vec::new(),
        termination: Termination::Completed,
    };
    if !vp.grid().contains(seed.0, seed.1) {
        out.termination = Termination::LeftDomain;
        return out;
    }
    let mut rhs = |phi: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        dy.copy_from_slice(&fieldline_rhs(vp, phi, y[0], y[1])?);
        Ok(())
    };
    let mut y = [seed.0, seed.1];
    let mut s = *settings;
    s.record = false;
    let step = if dir < 0.0 { -TAU } else { TAU };
    for k in 1..=transits {
        let a = phi0 + step * (k - 1) as f64;
        let b = phi0 + step * k as f64;
        match integrate_adaptive(&mut rhs, a, &y, b, &s) {
            Ok(traj) => {
                y.copy_from_slice(&traj.y);
                s.dt_init = Some(traj.next_dt);
                out.crossings.push(Crossing {
                    transit: k,
                    phi: traj.t,
                    r: y[0],
                    z: y[1],
                });
            }
            Err(Error::OutOfDomain { .. }) => {
                out.termination = Termination::LeftDomain;
                break;
            }
            Err(e) => {
                out.termination = Termination::StepFailure(String::from(e.name()));
                break;
            }
        }
    }
    out
}

/// Sequential tracing of every seed.
pub fn trace_poincare(
    vp: &VectorPotential,
    seeds: &SeedSpec,
    transits: usize,
    phi0: f64,
    rtol: f64,
    atol: f64,
) -> Result<PoincareSet> {
    if transits == 0 {
        return Err(Error::InvalidSettings("need at least one transit"));
    }
    let settings = AdaptiveSettings {
        rtol,
        atol,
        ..AdaptiveSettings::default()
    };
    let traces = seeds
        .points()
        .into_iter()
        .map(|p| trace_seed(vp, p, transits, phi0, 1.0, &settings))
        .collect();
    Ok(PoincareSet { phi0, traces })
}

//! Relativistic guiding-center motion in normalized units: momentum in
//! `mc`, lengths in the minor radius, time in `a/c`.
//!
//! ```text
//! B*   = B + s (ξ p / ω_c) ∇×b̂,        B*∥ = B*·b̂
//! dξ/dt = -p (1-ξ²) / (2γ B*∥) B*·∇ln B
//! dX/dt = (ξ p / γ) B*/B*∥ + s/ω_c · p² (1-ξ²) / (2γ B*∥) b̂×∇ln B
//! ```
//!
//! `s` is the charge sign. With the default `s = -1` this is the electron
//! form and `p_φ = ξ p b_φ R / ω_c - ψ`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::analytic::AnalyticFieldSpec;
use crate::error::{Error, Result};
use crate::field::{eval_field_sample, eval_field_sample_lenient, sample_from_jet, FieldSample};
use crate::ode::{integrate_adaptive_with, AdaptiveSettings, Dp45, StepControl};
use crate::vecpot::VectorPotential;

/// Anything that can supply `B`, its geometry and `ψ` at a point.
pub trait FieldProvider {
    fn sample(&self, r: f64, phi: f64, z: f64) -> Result<FieldSample>;
    fn psi(&self, r: f64, phi: f64, z: f64) -> Result<f64>;
}

/// The reconstructed field. `lenient` allows `m = 1` builds, whose
/// curvature terms are only piecewise continuous.
#[derive(Debug, Clone, Copy)]
pub struct Reconstructed<'a> {
    pub vp: &'a VectorPotential,
    pub lenient: bool,
}

impl<'a> Reconstructed<'a> {
    pub fn new(vp: &'a VectorPotential) -> Self {
        Self { vp, lenient: false }
    }

    pub fn lenient(vp: &'a VectorPotential) -> Self {
        Self { vp, lenient: true }
    }
}

impl FieldProvider for Reconstructed<'_> {
    fn sample(&self, r: f64, phi: f64, z: f64) -> Result<FieldSample> {
        if self.lenient {
            eval_field_sample_lenient(self.vp, r, phi, z)
        } else {
            eval_field_sample(self.vp, r, phi, z)
        }
    }

    fn psi(&self, r: f64, phi: f64, z: f64) -> Result<f64> {
        self.vp.psi(r, phi, z)
    }
}

/// Closed-form field, used as a reference. Only the circular kind has a `ψ`.
impl FieldProvider for AnalyticFieldSpec {
    fn sample(&self, r: f64, phi: f64, z: f64) -> Result<FieldSample> {
        if !(r > 0.0) {
            return Err(Error::OutOfDomain { r, z });
        }
        let jet = self.jet(r, phi, z);
        sample_from_jet(r, jet.b, jet.d)
    }

    fn psi(&self, r: f64, _phi: f64, z: f64) -> Result<f64> {
        self.psi_exact(r, z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GCState {
    pub p: f64,
    pub xi: f64,
    pub r: f64,
    pub phi: f64,
    pub z: f64,
    pub t: f64,
}

impl GCState {
    pub fn new(p: f64, xi: f64, r: f64, phi: f64, z: f64) -> Self {
        Self {
            p,
            xi,
            r,
            phi,
            z,
            t: 0.0,
        }
    }

    /// `[p, ξ, R, φ, Z]`.
    pub fn to_array(&self) -> [f64; 5] {
        [self.p, self.xi, self.r, self.phi, self.z]
    }

    pub fn from_array(y: &[f64], t: f64) -> Self {
        Self {
            p: y[0],
            xi: y[1],
            r: y[2],
            phi: y[3],
            z: y[4],
            t,
        }
    }

    pub fn gamma(&self) -> f64 {
        (1.0 + self.p * self.p).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 0.0 && self.p.is_finite()) {
            return Err(Error::InvalidSettings(
                "momentum must be finite and non-negative",
            ));
        }
        if !(self.xi.abs() <= 1.0) {
            return Err(Error::InvalidSettings("pitch must lie in [-1, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GCParams {
    pub omega_c: f64,
    /// `+1` or `-1`.
    pub charge_sign: f64,
}

impl Default for GCParams {
    fn default() -> Self {
        Self {
            omega_c: 1.0,
            charge_sign: -1.0,
        }
    }
}

impl GCParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_c != 0.0 && self.omega_c.is_finite()) {
            return Err(Error::InvalidSettings(
                "omega_c must be finite and non-zero",
            ));
        }
        if self.charge_sign != 1.0 && self.charge_sign != -1.0 {
            return Err(Error::InvalidSettings("charge sign must be +1 or -1"));
        }
        Ok(())
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `d/dt [p, ξ, R, φ, Z]`. The first entry is always exactly zero.
pub fn gc_rhs<F: FieldProvider + ?Sized>(
    y: &[f64],
    field: &F,
    params: &GCParams,
) -> Result<[f64; 5]> {
    let (p, xi, r, phi, z) = (y[0], y[1], y[2], y[3], y[4]);
    let fs = field.sample(r, phi, z)?;
    let gamma = (1.0 + p * p).sqrt();
    let s = params.charge_sign;
    let k = s * xi * p / params.omega_c;
    let bstar = [0, 1, 2].map(|i| fs.b[i] + k * fs.curl_bhat[i]);
    let bpar = dot(bstar, fs.bhat);
    if !(bpar.abs() > f64::EPSILON * fs.bmag) {
        return Err(Error::VanishingBstarPar { r, z });
    }
    let perp = p * p * (1.0 - xi * xi) / (2.0 * gamma * bpar);
    let xi_dot = -perp / p.max(f64::MIN_POSITIVE) * dot(bstar, fs.grad_ln_b);
    let xi_dot = if p == 0.0 { 0.0 } else { xi_dot };
    let drift = cross(fs.bhat, fs.grad_ln_b);
    let par = xi * p / (gamma * bpar);
    let dd = s * perp / params.omega_c;
    let x = [0, 1, 2].map(|i| par * bstar[i] + dd * drift[i]);
    Ok([0.0, xi_dot, x[0], x[1] / r, x[2]])
}

/// `(p_φ, μ)` from the same field the pusher sees.
pub fn invariants<F: FieldProvider + ?Sized>(
    st: &GCState,
    field: &F,
    params: &GCParams,
) -> Result<(f64, f64)> {
    let fs = field.sample(st.r, st.phi, st.z)?;
    let psi = field.psi(st.r, st.phi, st.z)?;
    let pphi = st.xi * st.p * fs.bhat[1] * st.r / params.omega_c + params.charge_sign * psi;
    let mu = (1.0 - st.xi * st.xi) * st.p * st.p / fs.bmag;
    Ok((pphi, mu))
}

/// Pitch excursions beyond `[-1, 1]` that are clamped silently.
pub const PITCH_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PitchClamp {
    /// Clamps that exceeded [`PITCH_TOLERANCE`].
    pub count: usize,
    pub max_excursion: f64,
}

impl PitchClamp {
    /// Pulls `ξ` back into `[-1, 1]`. Returns true if it changed.
    pub fn apply(&mut self, y: &mut [f64]) -> bool {
        let ex = y[1].abs() - 1.0;
        if ex <= 0.0 {
            return false;
        }
        if ex > PITCH_TOLERANCE {
            self.count += 1;
        }
        self.max_excursion = self.max_excursion.max(ex);
        y[1] = y[1].signum();
        true
    }
}

fn relative_drift(q0: f64, q1: f64) -> f64 {
    let d = (q1 - q0).abs();
    if q0 == 0.0 {
        d
    } else {
        d / q0.abs()
    }
}

/// Outcome of one particle.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleReport {
    pub initial: GCState,
    /// Last state reached (the exit point for lost particles).
    pub last: GCState,
    pub pphi0: f64,
    pub mu0: f64,
    pub dpphi_rel: f64,
    pub dmu_rel: f64,
    pub lost: bool,
    pub exit_time: Option<f64>,
    /// Integration failures other than leaving the domain.
    pub error: Option<Error>,
    pub clamp: PitchClamp,
    pub n_accepted: usize,
    pub n_rejected: usize,
}

impl ParticleReport {
    pub fn usable(&self) -> bool {
        !self.lost && self.error.is_none()
    }
}

/// Adaptive push of one particle to `t_end`. Never fails: problems are
/// recorded in the report.
pub fn push_particle<F: FieldProvider + ?Sized>(
    init: GCState,
    field: &F,
    params: &GCParams,
    t_end: f64,
    settings: &AdaptiveSettings,
) -> ParticleReport {
    let mut rep = ParticleReport {
        initial: init,
        last: init,
        pphi0: f64::NAN,
        mu0: f64::NAN,
        dpphi_rel: f64::NAN,
        dmu_rel: f64::NAN,
        lost: false,
        exit_time: None,
        error: None,
        clamp: PitchClamp::default(),
        n_accepted: 0,
        n_rejected: 0,
    };
    let fail = |mut rep: ParticleReport, e: Error| {
        if matches!(e, Error::OutOfDomain { .. }) {
            rep.lost = true;
            rep.exit_time = Some(rep.last.t);
        } else {
            rep.error = Some(e);
        }
        rep
    };
    if let Err(e) = init.validate().and_then(|_| params.validate()) {
        return fail(rep, e);
    }
    let (pphi0, mu0) = match invariants(&init, field, params) {
        Ok(v) => v,
        Err(e) => return fail(rep, e),
    };
    rep.pphi0 = pphi0;
    rep.mu0 = mu0;
    let mut clamp = PitchClamp::default();
    let mut last = init;
    let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        dy.copy_from_slice(&gc_rhs(y, field, params)?);
        Ok(())
    };
    let res = integrate_adaptive_with(
        &mut rhs,
        init.t,
        &init.to_array(),
        init.t + t_end,
        settings,
        |t, y| {
            let changed = clamp.apply(y);
            last = GCState::from_array(y, t);
            if changed {
                StepControl::Modified
            } else {
                StepControl::Continue
            }
        },
    );
    rep.last = last;
    rep.clamp = clamp;
    match res {
        Ok(traj) => {
            rep.n_accepted = traj.n_accepted;
            rep.n_rejected = traj.n_rejected;
            match invariants(&last, field, params) {
                Ok((pphi, mu)) => {
                    rep.dpphi_rel = relative_drift(pphi0, pphi);
                    rep.dmu_rel = relative_drift(mu0, mu);
                    rep
                }
                Err(e) => fail(rep, e),
            }
        }
        Err(e) => fail(rep, e),
    }
}

/// Ensemble summary. Means are over usable particles only.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleReport {
    pub particles: Vec<ParticleReport>,
    pub mean_dpphi_rel: f64,
    pub mean_dmu_rel: f64,
    pub n_lost: usize,
    pub n_failed: usize,
}

pub fn summarize(particles: Vec<ParticleReport>) -> EnsembleReport {
    let mut n = 0usize;
    let (mut sp, mut sm) = (0.0, 0.0);
    for p in particles.iter().filter(|p| p.usable()) {
        n += 1;
        sp += p.dpphi_rel;
        sm += p.dmu_rel;
    }
    let mean = |s: f64| if n == 0 { f64::NAN } else { s / n as f64 };
    EnsembleReport {
        mean_dpphi_rel: mean(sp),
        mean_dmu_rel: mean(sm),
        n_lost: particles.iter().filter(|p| p.lost).count(),
        n_failed: particles.iter().filter(|p| p.error.is_some()).count(),
        particles,
    }
}

/// Sequential ensemble push.
pub fn push_ensemble<F: FieldProvider + ?Sized>(
    states: &[GCState],
    field: &F,
    params: &GCParams,
    t_end: f64,
    rtol: f64,
    atol: f64,
) -> EnsembleReport {
    let settings = AdaptiveSettings {
        rtol,
        atol,
        ..AdaptiveSettings::default()
    };
    summarize(
        states
            .iter()
            .map(|s| push_particle(*s, field, params, t_end, &settings))
            .collect(),
    )
}

/// Fixed-step run: time means of the relative invariant drifts.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedRun {
    pub last: GCState,
    pub mean_dpphi_rel: f64,
    pub mean_dmu_rel: f64,
    pub clamp: PitchClamp,
    /// `p` differed from its initial value at some step (never expected).
    pub p_changed: bool,
}

/// `n` uniform DP45 steps over `[t, t + t_end]`.
pub fn push_fixed<F: FieldProvider + ?Sized>(
    init: GCState,
    field: &F,
    params: &GCParams,
    t_end: f64,
    n: usize,
) -> Result<FixedRun> {
    init.validate()?;
    params.validate()?;
    if n == 0 {
        return Err(Error::InvalidSettings("need at least one step"));
    }
    let (pphi0, mu0) = invariants(&init, field, params)?;
    let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        dy.copy_from_slice(&gc_rhs(y, field, params)?);
        Ok(())
    };
    let mut st = Dp45::new(5);
    let mut y = init.to_array();
    let mut clamp = PitchClamp::default();
    let (mut sp, mut sm) = (0.0, 0.0);
    let mut p_changed = false;
    let mut t = init.t;
    for i in 0..n {
        let dt = init.t + t_end * (i + 1) as f64 / n as f64 - t;
        st.step(&mut rhs, t, &y, dt)?;
        y.copy_from_slice(&st.y5);
        st.accept();
        t += dt;
        if clamp.apply(&mut y) {
            st.reset();
        }
        p_changed |= y[0].to_bits() != init.p.to_bits();
        let (pphi, mu) = invariants(&GCState::from_array(&y, t), field, params)?;
        sp += relative_drift(pphi0, pphi);
        sm += relative_drift(mu0, mu);
    }
    Ok(FixedRun {
        last: GCState::from_array(&y, t),
        mean_dpphi_rel: sp / n as f64,
        mean_dmu_rel: sm / n as f64,
        clamp,
        p_changed,
    })
}

//! Real trigonometric basis in `φ` on `N` equidistant planes.
//!
//! Mode index `k` is `cos(kφ)` for `k = 0..=N/2` and `sin((k-N/2)φ)` for
//! `k = N/2+1..=N`. Synthesis is the plain sum `Σ_k a_k T_k(φ)`; the
//! analysis carries the `1/N` and `2/N` factors.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
#[allow(unused_imports)]
use num_traits::Float;

/// Number of coefficients for `n_phi` planes.
pub fn n_modes(n_phi: usize) -> usize {
    if n_phi == 0 {
        1
    } else {
        n_phi + 1
    }
}

/// Wavenumber and `true` for cosine modes.
pub fn mode(n_phi: usize, k: usize) -> (usize, bool) {
    let half = n_phi / 2;
    if k <= half {
        (k, true)
    } else {
        (k - half, false)
    }
}

/// `n`-th `φ`-derivative of basis function `k` at `φ`.
pub fn basis(n_phi: usize, k: usize, n: usize, phi: f64) -> f64 {
    let (w, is_cos) = mode(n_phi, k);
    if w == 0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let wf = w as f64;
    let shift = n as f64 * FRAC_PI_2;
    let arg = wf * phi + shift;
    let amp = wf.powi(n as i32);
    if is_cos {
        amp * arg.cos()
    } else {
        amp * arg.sin()
    }
}

/// All basis values (and `φ`-derivatives of order `n`) at `φ`.
pub fn basis_all(n_phi: usize, n: usize, phi: f64, out: &mut [f64]) {
    for (k, o) in out.iter_mut().enumerate() {
        *o = basis(n_phi, k, n, phi);
    }
}

/// Analysis of the plane samples `f[p]` at `φ_p = 2πp/N`.
pub fn analyze(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    if n <= 1 {
        return vec![f.first().copied().unwrap_or(0.0)];
    }
    let half = n / 2;
    let nf = n as f64;
    let mut a = vec![0.0; n + 1];
    for k in 0..=half {
        let s: f64 = f
            .iter()
            .enumerate()
            .map(|(p, v)| v * angle(k * p, n).cos())
            .sum();
        a[k] = if k == 0 || k == half {
            s / nf
        } else {
            2.0 * s / nf
        };
    }
    // sin(N/2 φ) vanishes on every plane; its slot stays zero.
    for k in 1..half {
        let s: f64 = f
            .iter()
            .enumerate()
            .map(|(p, v)| v * angle(k * p, n).sin())
            .sum();
        a[half + k] = 2.0 * s / nf;
    }
    a
}

/// `Σ_k a_k T_k(φ)`.
pub fn synthesize(n_phi: usize, a: &[f64], phi: f64) -> f64 {
    a.iter()
        .enumerate()
        .map(|(k, v)| v * basis(n_phi, k, 0, phi))
        .sum()
}

/// Coefficients of `∂f/∂φ` for `f = Σ a_k T_k`.
pub fn dphi_coeffs(n_phi: usize, a: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len()];
    if n_phi == 0 {
        return out;
    }
    let half = n_phi / 2;
    for k in 1..=half {
        let kf = k as f64;
        // cos(kφ)' = -k sin(kφ), sin(kφ)' = k cos(kφ)
        out[half + k] -= kf * a[k];
        out[k] += kf * a[half + k];
    }
    out
}

/// `2π (i mod n) / n`, reduced before the multiply to keep the angle small.
fn angle(i: usize, n: usize) -> f64 {
    2.0 * PI * (i % n) as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_on_planes() {
        let n = 8;
        let f: Vec<f64> = (0..n)
            .map(|p| 1.0 + 0.3 * p as f64 - 0.05 * (p * p) as f64)
            .collect();
        let a = analyze(&f);
        assert_eq!(a.len(), n + 1);
        // The sin(N/2 φ) mode vanishes on the planes.
        assert_eq!(a[n], 0.0);
        for (p, v) in f.iter().enumerate() {
            let phi = 2.0 * PI * p as f64 / n as f64;
            assert!((synthesize(n, &a, phi) - v).abs() < 1e-13);
        }
    }

    #[test]
    fn single_modes_are_recovered() {
        let n = 6;
        let f: Vec<f64> = (0..n)
            .map(|p| {
                let phi = 2.0 * PI * p as f64 / n as f64;
                2.0 + 0.5 * (2.0 * phi).cos() - 0.25 * phi.sin() + 0.1 * (3.0 * phi).cos()
            })
            .collect();
        let a = analyze(&f);
        let expect = [2.0, 0.0, 0.5, 0.1, -0.25, 0.0, 0.0];
        for (x, e) in a.iter().zip(expect) {
            assert!((x - e).abs() < 1e-14, "{a:?}");
        }
    }

    #[test]
    fn derivatives_of_cosine_mode() {
        let n = 4;
        assert!(basis(n, 1, 1, 0.0).abs() < 1e-15);
        assert!((basis(n, 1, 1, FRAC_PI_2) + 1.0).abs() < 1e-15);
        assert_eq!(basis(n, 0, 1, 0.3), 0.0);
        let a = [0.0, 1.3, 0.0, -0.7, 0.4];
        let d = dphi_coeffs(n, &a);
        for &phi in &[0.0, 0.4, 2.0, 5.5] {
            let direct: f64 = a
                .iter()
                .enumerate()
                .map(|(k, v)| v * basis(n, k, 1, phi))
                .sum();
            assert!((synthesize(n, &d, phi) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn periodic() {
        let a = [0.2, 1.0, -0.5, 0.3, 0.7];
        for &phi in &[0.1, 1.7, 4.0] {
            assert!((synthesize(4, &a, phi) - synthesize(4, &a, phi + 2.0 * PI)).abs() < 1e-13);
        }
    }
}

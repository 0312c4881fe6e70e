//! Radial reference solutions for `f = c χ_{B_a}` on a ball `B_R`.

use serde::Serialize;

use crate::{Error, Result};

/// Minimum number of radial intervals.
pub const MIN_SAMPLES: usize = 4096;

/// Radial solution of `-(1/r)(r u')' = f` on `[0, R]` with `u(R) = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct RadialProfile {
    pub c: f64,
    pub a: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
}

impl RadialProfile {
    pub fn u0(&self) -> f64 {
        self.u[0]
    }

    /// `u'(R)`.
    pub fn du_r(&self) -> f64 {
        *self.du.last().expect("nonempty profile")
    }

    /// Linear interpolation of `u` at radius `s`.
    pub fn u_at(&self, s: f64) -> f64 {
        interp(&self.r, &self.u, s)
    }

    pub fn du_at(&self, s: f64) -> f64 {
        interp(&self.r, &self.du, s)
    }

    /// `∫_{B_R} u dx`.
    pub fn integral(&self) -> f64 {
        let w: Vec<f64> = self.r.iter().zip(&self.u).map(|(r, u)| 2.0 * std::f64::consts::PI * r * u).collect();
        integrate(&self.r, &w, self.split())
    }

    /// `∫_{B_R} u^2 dx`.
    pub fn integral_sq(&self) -> f64 {
        let w: Vec<f64> =
            self.r.iter().zip(&self.u).map(|(r, u)| 2.0 * std::f64::consts::PI * r * u * u).collect();
        integrate(&self.r, &w, self.split())
    }

    fn split(&self) -> usize {
        self.r.iter().position(|&x| x >= self.a).unwrap_or(self.r.len() - 1)
    }
}

fn interp(xs: &[f64], ys: &[f64], s: f64) -> f64 {
    if s <= xs[0] {
        return ys[0];
    }
    let n = xs.len();
    if s >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&x| x <= s).max(1) - 1;
    let t = (s - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + t * (ys[k + 1] - ys[k])
}

/// Piecewise-uniform radial grid with a node at `a` and an even number of
/// intervals on each side of it.
fn radial_grid(a: f64, big_r: f64) -> (Vec<f64>, usize) {
    if a >= big_r {
        let m = MIN_SAMPLES;
        return ((0..=m).map(|k| big_r * k as f64 / m as f64).collect(), m);
    }
    let even = |x: f64| (((x / 2.0).ceil() as usize) * 2).max(2);
    let m1 = even(MIN_SAMPLES as f64 * a / big_r).max(64);
    let m2 = even(MIN_SAMPLES as f64 * (big_r - a) / big_r).max(64);
    let mut r: Vec<f64> = (0..=m1).map(|k| a * k as f64 / m1 as f64).collect();
    r.extend((1..=m2).map(|k| a + (big_r - a) * k as f64 / m2 as f64));
    (r, m1)
}

/// Cumulative Simpson integral on a uniform segment: even nodes by the
/// composite rule, odd nodes by the one-interval rule `h/12 (5f0 + 8f1 - f2)`.
fn cumulative_uniform(h: f64, f: &[f64]) -> Vec<f64> {
    let n = f.len() - 1;
    debug_assert!(n >= 2 && n % 2 == 0);
    let mut out = vec![0.0; n + 1];
    for k in (0..n).step_by(2) {
        out[k + 1] = out[k] + h / 12.0 * (5.0 * f[k] + 8.0 * f[k + 1] - f[k + 2]);
        out[k + 2] = out[k] + h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
    }
    out
}

/// Cumulative integral from 0 over the two uniform segments. `left` and
/// `right` give integrand values on each segment (they may differ at the
/// shared node when the integrand jumps there).
fn cumulative(r: &[f64], split: usize, left: &[f64], right: &[f64]) -> Vec<f64> {
    let h1 = r[1] - r[0];
    let mut out = cumulative_uniform(h1, left);
    if split + 1 < r.len() {
        let h2 = r[split + 1] - r[split];
        let base = out[split];
        let tail = cumulative_uniform(h2, right);
        out.extend(tail[1..].iter().map(|v| v + base));
    }
    out
}

fn integrate(r: &[f64], w: &[f64], split: usize) -> f64 {
    let left = &w[..=split];
    let right = &w[split..];
    *cumulative(r, split, left, right).last().expect("nonempty")
}

/// Solve the radial problem with a right-hand side given on each segment.
fn radial_solve(r: &[f64], split: usize, f_left: &[f64], f_right: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = r.len();
    let sf_left: Vec<f64> = f_left.iter().zip(&r[..=split]).map(|(f, s)| f * s).collect();
    let sf_right: Vec<f64> = f_right.iter().zip(&r[split..]).map(|(f, s)| f * s).collect();
    let flux = cumulative(r, split, &sf_left, &sf_right);
    let du: Vec<f64> = flux.iter().zip(r).map(|(i, &s)| if s > 0.0 { -i / s } else { 0.0 }).collect();
    // u(r) = ∫_r^R (-u') ds
    let g: Vec<f64> = du.iter().map(|d| -d).collect();
    let total = integrate(r, &g, split);
    let cum = cumulative(r, split, &g[..=split], &g[split..]);
    let u = (0..n).map(|k| total - cum[k]).collect();
    (u, du)
}

fn check(c: f64, a: f64, big_r: f64) -> Result<()> {
    if !(c.is_finite() && a.is_finite() && big_r.is_finite()) {
        return Err(Error::InvalidParameter("radial parameters must be finite".into()));
    }
    if !(a > 0.0 && big_r > 0.0) {
        return Err(Error::InvalidParameter(format!("need a > 0 and R > 0, got a={a}, R={big_r}")));
    }
    Ok(())
}

/// Radial Poisson profile for `f = c χ_{B_a}` on `B_R`. When `a >= R` the
/// source fills the ball.
pub fn radial_poisson(c: f64, a: f64, big_r: f64) -> Result<RadialProfile> {
    check(c, a, big_r)?;
    let (r, split) = radial_grid(a, big_r);
    let f_left = vec![c; split + 1];
    let f_right = vec![0.0; r.len() - split];
    let (u, du) = radial_solve(&r, split, &f_left, &f_right);
    Ok(RadialProfile { c, a: a.min(big_r), big_r, r, u, du })
}

/// Depth-2 cascade `(u, v)` with `-Δv = u`.
pub fn radial_cascade(c: f64, a: f64, big_r: f64) -> Result<(RadialProfile, RadialProfile)> {
    let p = radial_poisson(c, a, big_r)?;
    let split = p.split();
    let (v, dv) = radial_solve(&p.r, split, &p.u[..=split], &p.u[split..]);
    let q = RadialProfile { c, a: p.a, big_r, r: p.r.clone(), u: v, du: dv };
    Ok((p, q))
}

/// `g* = |u'(R) v'(R)|` for the radial cascade.
pub fn radial_bilap_g(c: f64, a: f64, big_r: f64) -> Result<f64> {
    let (u, v) = radial_cascade(c, a, big_r)?;
    Ok((u.du_r() * v.du_r()).abs())
}

/// Radius balancing the flux `c π a^2 = k 2π R` for constant `g = k`.
pub fn radial_qs_radius(c: f64, a: f64, k: f64) -> Result<f64> {
    radial_qs_radius_power(c, a, k, 0.0)
}

/// Radius solving `c a^2 / (2R) = k R^alpha` for `g(x) = k |x|^alpha`.
///
/// Fails when the ball would not contain the source disk (`R < a`).
pub fn radial_qs_radius_power(c: f64, a: f64, k: f64, alpha: f64) -> Result<f64> {
    if !(c > 0.0 && a > 0.0 && k > 0.0) || !(c.is_finite() && a.is_finite() && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("need c, a, k > 0, got c={c}, a={a}, k={k}")));
    }
    if !(alpha.is_finite() && alpha > -1.0) {
        return Err(Error::InvalidParameter(format!("need alpha > -1, got {alpha}")));
    }
    let r = (c * a * a / (2.0 * k)).powf(1.0 / (1.0 + alpha));
    if r < a {
        return Err(Error::InvalidParameter(format!(
            "balancing radius {r} is smaller than the source radius {a}"
        )));
    }
    Ok(r)
}

/// Closed form `|u'(R)| = c a^2 / (2R)` for `a <= R`.
pub fn flux_gradient(c: f64, a: f64, big_r: f64) -> f64 {
    let a = a.min(big_r);
    c * a * a / (2.0 * big_r)
}

/// Closed form `|v'(R)| = c a^2 (2R^2 - a^2) / (16 R)` for `a <= R`.
pub fn cascade_gradient(c: f64, a: f64, big_r: f64) -> f64 {
    let a = a.min(big_r);
    c * a * a * (2.0 * big_r * big_r - a * a) / (16.0 * big_r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_ball_matches_closed_form() {
        let p = radial_poisson(1.0, 1.0, 1.0).unwrap();
        assert!((p.u0() - 0.25).abs() < 1e-12);
        assert!((p.du_r() + 0.5).abs() < 1e-12);
        for (r, u) in p.r.iter().zip(&p.u).step_by(97) {
            assert!((u - (1.0 - r * r) / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn compact_source() {
        let p = radial_poisson(4.0, 0.5, 2.0).unwrap();
        assert!((p.du_r() + 0.25).abs() < 1e-10);
        assert!((p.u_at(1.0) - 0.5 * 2f64.ln()).abs() < 1e-8);
        assert!(p.r.len() > MIN_SAMPLES);
        assert!(p.u.iter().all(|&u| u >= 0.0));
    }

    #[test]
    fn cascade_values() {
        let (_, v) = radial_cascade(1.0, 1.0, 1.0).unwrap();
        assert!((v.du_r() + 1.0 / 16.0).abs() < 1e-9);
        assert!((radial_bilap_g(1.0, 1.0, 1.0).unwrap() - 1.0 / 32.0).abs() < 1e-9);
        assert!((radial_bilap_g(1.0, 2.0, 2.0).unwrap() - 0.5).abs() < 1e-9);
        assert!((radial_bilap_g(1.0, 1.0, 2.0).unwrap() - 7.0 / 128.0).abs() < 1e-9);
        assert!((radial_bilap_g(4.0, 0.5, 2.0).unwrap() - 0.060546875).abs() < 1e-9);
    }

    #[test]
    fn qs_radius() {
        assert_eq!(radial_qs_radius(4.0, 0.5, 0.25).unwrap(), 2.0);
        assert_eq!(radial_qs_radius(1.0, 1.0, 0.5).unwrap(), 1.0);
        assert!(radial_qs_radius(4.0, 0.5, 1e6).is_err());
        assert!((radial_qs_radius_power(4.0, 0.5, 0.125, 1.0).unwrap() - 2.0).abs() < 1e-12);
    }
}

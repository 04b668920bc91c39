//! Rotationally symmetric minimal surfaces: hemispheres and catenoid-type
//! annuli spanning two concentric circles.
//!
//! In the meridian half-plane write `(r, x) = e^τ (cos β, sin β)`. Area is
//! invariant under dilation, so `τ` is cyclic and the profile satisfies
//! `cos β cos ϑ / sin² β = c`, with `ϑ` the angle between the profile and
//! the radial direction. An annulus leaves the boundary at `β = 0`, climbs
//! to `β*` (`cos β* = c sin² β*`) and returns; it is parametrized by
//! `s ∈ [-1, 1]` with `β = β*(1 - s²)`, which makes `dτ/ds` analytic. The
//! launch parameter `c` is fixed by `∫ dτ = log(r₂/r₁)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{chebyshev_coefficients, chebyshev_eval, chebyshev_integral, chebyshev_nodes};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Large `c`: the annulus stays close to the boundary plane.
    Shallow,
    /// Small `c`: the annulus rises almost to two hemispheres.
    Deep,
}

#[derive(Clone, Debug)]
pub enum ProfileKind<T> {
    Hemisphere { radius: T },
    Annulus { branch: Branch, c: T, beta_star: T, tau: Vec<T> },
}

/// Meridian profile of a rotational minimal surface.
#[derive(Clone, Debug)]
pub struct RotationalProfile<T> {
    pub r1: T,
    pub r2: Option<T>,
    pub kind: ProfileKind<T>,
    /// Max deviation of the conserved quantity along the profile.
    pub residual: T,
    /// `(r, x)` at the highest point of an annulus.
    pub turning_point: Option<(T, T)>,
}

/// Point and `s`-derivatives of the profile: `[(r, x), (r', x'), (r'', x'')]`.
pub type ProfileJet<T> = [[T; 2]; 3];

struct Launch<T> {
    c: T,
    beta_star: T,
    /// `cos β*`
    y: T,
}

impl<T: Real> Launch<T> {
    fn new(c: T) -> Self {
        let one = T::one();
        let root = (one + T::c(4.0) * c * c).sqrt();
        let y = T::c(2.0) * c / (one + root);
        let one_minus_y = (one + one / (root + T::c(2.0) * c)) / (one + root);
        let sin2 = one_minus_y * (one + y);
        Self { c, beta_star: sin2.sqrt().atan2(y), y }
    }

    /// `dτ/ds`, evaluated without cancellation at the turning point.
    fn dtau(&self, s: T) -> T {
        let (c, bs, y) = (self.c, self.beta_star, self.y);
        let one = T::one();
        let half = T::c(0.5);
        let beta = bs * (one - s * s);
        let (sb, cb) = beta.sin_cos();
        let arg = bs * s * s * half;
        let sinc = if arg.abs() < T::c(1e-8) { bs * half } else { arg.sin() / (s * s) };
        // Q / s² with Q = cos²β - c² sin⁴β factored through its roots
        let q_over_s2 = c * T::c(2.0) * ((beta + bs) * half).sin() * sinc * (cb + one / y) * (cb + c * sb * sb);
        T::c(2.0) * bs * c * sb * sb / q_over_s2.sqrt()
    }

    /// Chebyshev series of `τ - τ(-1)` on `[-1, 1]`, resolved adaptively.
    fn tau_series(&self) -> Result<Vec<T>> {
        let mut n = 32;
        loop {
            let nodes = chebyshev_nodes(n, -T::one(), T::one());
            let vals: Vec<T> = nodes.iter().map(|&s| self.dtau(s)).collect();
            let c = chebyshev_coefficients(&vals);
            let scale = c.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            let tail = c[n - 4..].iter().fold(T::zero(), |m, v| m.max(v.abs()));
            if tail <= scale * T::c(1e-14).max(T::epsilon() * T::c(16.0)) {
                return Ok(chebyshev_integral(&c, -T::one(), T::one()));
            }
            n *= 2;
            if n > 8192 {
                return Err(Error::ShootingResolution(format!(
                    "profile with c = {:.3e} not resolved by 8192 Chebyshev modes",
                    self.c.to_f64_lossy()
                )));
            }
        }
    }

    /// `log(r₂/r₁)` reached by the profile.
    fn log_ratio(&self) -> Result<T> {
        let tau = self.tau_series()?;
        Ok(chebyshev_eval(&tau, -T::one(), T::one(), T::one())[0])
    }
}

/// Result of sweeping the launch parameter for a given radius ratio.
#[derive(Clone, Debug, Serialize)]
pub struct ExistenceReport {
    pub ratio: f64,
    pub max_ratio: f64,
    pub c_at_max: f64,
    pub exists: bool,
    /// `(log10 c, log ratio)` along the sweep.
    pub sweep: Vec<(f64, f64)>,
}

/// Largest ratio `r₂/r₁` spanned by an annulus, from a log-spaced sweep of
/// the launch parameter refined by golden-section search.
pub fn annulus_existence(ratio: f64) -> Result<ExistenceReport> {
    static LIMIT: std::sync::OnceLock<std::result::Result<ExistenceReport, String>> = std::sync::OnceLock::new();
    let limit = LIMIT.get_or_init(|| sweep_launch_parameter().map_err(|e| e.to_string()));
    match limit {
        Ok(rep) => Ok(ExistenceReport { ratio, exists: ratio.ln() < rep.max_ratio.ln(), ..rep.clone() }),
        Err(e) => Err(Error::ShootingResolution(e.clone())),
    }
}

fn sweep_launch_parameter() -> Result<ExistenceReport> {
    let d = |lc: f64| Launch::new(10f64.powf(lc)).log_ratio();
    let mut sweep = Vec::new();
    for i in 0..=48 {
        let lc = -4.0 + 8.0 * i as f64 / 48.0;
        sweep.push((lc, d(lc)?));
    }
    let (imax, _) = sweep.iter().enumerate().fold((0, f64::MIN), |(bi, bv), (i, &(_, v))| if v > bv { (i, v) } else { (bi, bv) });
    let (mut a, mut b) = (sweep[imax.saturating_sub(1)].0, sweep[(imax + 1).min(sweep.len() - 1)].0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (d(x1)?, d(x2)?);
    while b - a > 1e-9 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = d(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = d(x2)?;
        }
    }
    let lc = 0.5 * (a + b);
    let dmax = d(lc)?;
    Ok(ExistenceReport { ratio: 0.0, max_ratio: dmax.exp(), c_at_max: 10f64.powf(lc), exists: false, sweep })
}

/// Rotational minimal surface with one boundary circle (hemisphere) or
/// two concentric ones (annulus on the chosen branch).
pub fn solve_rotational<T: Real>(r1: T, r2: Option<T>, branch: Branch) -> Result<RotationalProfile<T>> {
    if !(r1 > T::zero()) {
        return Err(Error::InvalidInput("radii must be positive".into()));
    }
    let Some(r2) = r2 else {
        return Ok(RotationalProfile {
            r1,
            r2: None,
            kind: ProfileKind::Hemisphere { radius: r1 },
            residual: T::zero(),
            turning_point: None,
        });
    };
    let (r1, r2) = if r2 < r1 { (r2, r1) } else { (r1, r2) };
    if !(r2 > r1) {
        return Err(Error::InvalidInput("annulus needs distinct radii".into()));
    }
    let ratio = (r2 / r1).to_f64_lossy();
    let report = annulus_existence(ratio)?;
    if !report.exists {
        return Err(Error::NoAnnulus { ratio, max_ratio: report.max_ratio });
    }
    let target = T::c(ratio.ln());
    let d = |lc: T| -> Result<T> { Ok(Launch::new(T::c(10.0).powf(lc)).log_ratio()? - target) };
    let peak = T::c(report.c_at_max.log10());
    // march away from the peak until the ratio drops below the target
    let dir = match branch {
        Branch::Shallow => T::one(),
        Branch::Deep => -T::one(),
    };
    let mut far = peak;
    let mut step = T::c(0.25);
    loop {
        far += dir * step;
        if d(far)? < T::zero() {
            break;
        }
        step *= T::c(1.5);
        if (far - peak).abs() > T::c(30.0) {
            return Err(Error::ShootingResolution(format!("no bracket for ratio {ratio} on the {branch:?} branch")));
        }
    }
    let (mut lo, mut hi) = (peak, far);
    for _ in 0..200 {
        let mid = (lo + hi) * T::c(0.5);
        if d(mid)? > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() < T::epsilon() * T::c(64.0) * (T::one() + mid.abs()) {
            break;
        }
    }
    let launch = Launch::new(T::c(10.0).powf((lo + hi) * T::c(0.5)));
    let mut tau = launch.tau_series()?;
    tau[0] += r1.ln();
    let mut profile = RotationalProfile {
        r1,
        r2: Some(r2),
        kind: ProfileKind::Annulus { branch, c: launch.c, beta_star: launch.beta_star, tau },
        residual: T::zero(),
        turning_point: None,
    };
    let top = profile.jet(T::zero())[0];
    profile.turning_point = Some((top[0], top[1]));
    profile.residual = profile.conservation_defect(401);
    Ok(profile)
}

impl<T: Real> RotationalProfile<T> {
    /// Parameter interval of the profile.
    pub fn s_range(&self) -> (T, T) {
        match self.kind {
            ProfileKind::Hemisphere { .. } => (T::zero(), T::FRAC_PI_2()),
            ProfileKind::Annulus { .. } => (-T::one(), T::one()),
        }
    }

    /// Whether each end of the parameter interval lies on the boundary plane.
    pub fn boundary_ends(&self) -> (bool, bool) {
        match self.kind {
            ProfileKind::Hemisphere { .. } => (true, false),
            ProfileKind::Annulus { .. } => (true, true),
        }
    }

    /// `(r, x)` and two derivatives at parameter `s`. The hemisphere uses
    /// the polar angle `β ∈ [0, π/2]` from the boundary.
    pub fn jet(&self, s: T) -> ProfileJet<T> {
        match &self.kind {
            ProfileKind::Hemisphere { radius } => {
                let (sn, cs) = s.sin_cos();
                let r = *radius;
                [[r * cs, r * sn], [-r * sn, r * cs], [-r * cs, -r * sn]]
            }
            ProfileKind::Annulus { beta_star, tau, .. } => {
                let one = T::one();
                let [t0, t1, t2] = chebyshev_eval(tau, -one, one, s);
                let b0 = *beta_star * (one - s * s);
                let b1 = -T::c(2.0) * *beta_star * s;
                let b2 = -T::c(2.0) * *beta_star;
                // z = e^{τ + iβ}
                let m = t0.exp();
                let (sn, cs) = b0.sin_cos();
                let z = [m * cs, m * sn];
                let mul = |a: [T; 2], b: [T; 2]| [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]];
                let w1 = [t1, b1];
                let w2 = mul(w1, w1);
                let z1 = mul(z, w1);
                let z2 = mul(z, [w2[0] + t2, w2[1] + b2]);
                [z, z1, z2]
            }
        }
    }

    /// Max deviation of `cos β cos ϑ / sin² β` from `c` over interior samples.
    pub fn conservation_defect(&self, samples: usize) -> T {
        let ProfileKind::Annulus { c, .. } = self.kind else {
            return T::zero();
        };
        let mut worst = T::zero();
        for i in 1..samples - 1 {
            let s = -T::one() + T::c(2.0) * T::n(i) / T::n(samples - 1);
            let [[r, x], [dr, dx], _] = self.jet(s);
            let rho2 = r * r + x * x;
            // radial component of the unit tangent
            let cos_theta = ((r * dr + x * dx) / (rho2.sqrt() * (dr * dr + dx * dx).sqrt())).abs();
            let sin_b = x / rho2.sqrt();
            let cos_b = r / rho2.sqrt();
            worst = worst.max((cos_b * cos_theta / (sin_b * sin_b) - c).abs() / c.max(T::one()));
        }
        worst
    }

    /// Rotational area of `{x ≥ ε}` by one-dimensional quadrature of the
    /// profile in the `β` variable, `2π ∫ cos β / (sin² β sin ϑ) dβ`.
    pub fn truncated_area_1d(&self, eps: T) -> T {
        match self.kind {
            ProfileKind::Hemisphere { radius } => T::TAU() * (radius / eps - T::one()),
            ProfileKind::Annulus { .. } => {
                // integrate 2π r |F'| / x² ds over the sub-interval with x ≥ ε
                let f = |s: f64| {
                    let [[r, x], [dr, dx], _] = self.jet(T::c(s));
                    (T::TAU() * r * (dr * dr + dx * dx).sqrt() / (x * x)).to_f64_lossy()
                };
                let xs = |s: f64| self.jet(T::c(s))[0][1].to_f64_lossy() - eps.to_f64_lossy();
                let cross = |a: f64, b: f64| {
                    let (mut a, mut b) = (a, b);
                    for _ in 0..200 {
                        let m = 0.5 * (a + b);
                        if (xs(m) < 0.0) == (xs(a) < 0.0) {
                            a = m;
                        } else {
                            b = m;
                        }
                    }
                    0.5 * (a + b)
                };
                let lo = cross(-1.0, 0.0);
                let hi = cross(0.0, 1.0);
                // split at the ends where the integrand varies on the ε scale
                let mut total = 0.0;
                let mut a = lo;
                let mut h = 1e-3 * eps.to_f64_lossy();
                while a < 0.0 {
                    let b = (a + h).min(0.0);
                    total += crate::spectral::adaptive_simpson(&f, a, b, 1e-13);
                    a = b;
                    h *= 2.0;
                }
                let mut b = hi;
                let mut h = 1e-3 * eps.to_f64_lossy();
                while b > 0.0 {
                    let a = (b - h).max(0.0);
                    total += crate::spectral::adaptive_simpson(&f, a, b, 1e-13);
                    b = a;
                    h *= 2.0;
                }
                T::c(total)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_radius_is_the_hemisphere() {
        let p = solve_rotational(2.0f64, None, Branch::Shallow).unwrap();
        for s in [0.1, 0.7, 1.3] {
            let [[r, x], _, _] = p.jet(s);
            assert!((r - (4.0 - x * x).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn annulus_branches_match_the_radii() {
        for ratio in [1.05, 1.2, 2.0] {
            for branch in [Branch::Shallow, Branch::Deep] {
                let p = solve_rotational(1.0f64, Some(ratio), branch).unwrap();
                let [[ra, xa], _, _] = p.jet(-1.0);
                let [[rb, xb], _, _] = p.jet(1.0);
                assert!((ra - 1.0).abs() < 1e-10 && xa.abs() < 1e-12);
                assert!((rb - ratio).abs() < 1e-9 && xb.abs() < 1e-12, "{ratio} {branch:?} {rb}");
                assert!(p.residual < 1e-9, "{}", p.residual);
            }
        }
        let shallow = solve_rotational(1.0f64, Some(1.2), Branch::Shallow).unwrap();
        let deep = solve_rotational(1.0f64, Some(1.2), Branch::Deep).unwrap();
        assert!(shallow.turning_point.unwrap().1 < deep.turning_point.unwrap().1);
    }

    #[test]
    fn wide_annuli_do_not_exist() {
        let rep = annulus_existence(10.0).unwrap();
        assert!(!rep.exists);
        assert!(rep.max_ratio > 2.5 && rep.max_ratio < 3.0, "{}", rep.max_ratio);
        assert!(rep.sweep.iter().all(|&(_, d)| d < 10f64.ln()));
        assert!(matches!(solve_rotational(1.0f64, Some(10.0), Branch::Shallow), Err(Error::NoAnnulus { .. })));
        // existence is monotone in the ratio over the sweep grid
        let mut seen_missing = false;
        for i in 0..20 {
            let ratio = 1.02 + 0.5 * i as f64;
            let e = annulus_existence(ratio).unwrap().exists;
            assert!(!(seen_missing && e));
            seen_missing |= !e;
        }
    }
}

//! The minimal surface operator `ℱ` for horizontal graphs over the vertical
//! cylinder, written for any [`Ring`] so the same expression evaluates
//! residuals, linearizations (dual numbers) and formal power series.

use crate::scalar::{gradient, Dual, Real, Ring};

/// Pointwise data entering `ℱ(u)`. `ux_over_x` is `u_x / x`, supplied
/// separately so the boundary row can use its finite limit.
#[derive(Clone, Debug)]
pub struct Local<R> {
    pub kappa: R,
    pub kappa_s: R,
    pub u: R,
    pub u_s: R,
    pub u_x: R,
    pub u_ss: R,
    pub u_sx: R,
    pub u_xx: R,
    pub ux_over_x: R,
}

/// `ℱ(u)` for a cylinder over a curve of curvature `κ`; `w = 1 - κu`.
pub fn mse<T: Real, R: Ring<T>>(a: &Local<R>) -> R {
    let one = R::constant(T::one());
    let two = T::c(2.0);
    let w = one.clone() - a.kappa.clone() * a.u.clone();
    let w_s = -(a.kappa_s.clone() * a.u.clone()) - a.kappa.clone() * a.u_s.clone();
    let ux2 = a.u_x.clone() * a.u_x.clone();
    let us2 = a.u_s.clone() * a.u_s.clone();
    let w2 = w.clone() * w.clone();
    let t1 = (one.clone() + ux2.clone())
        * (w.clone() * (a.u_ss.clone() + a.kappa.clone() * w.clone())
            - a.u_s.clone() * (w_s - a.kappa.clone() * a.u_s.clone()));
    let t2 = (a.u_x.clone() * a.u_s.clone() * (w.clone() * a.u_sx.clone() + a.kappa.clone() * a.u_x.clone() * a.u_s.clone()))
        .scale(two);
    let t3 = w.clone() * (w2.clone() + us2.clone()) * a.u_xx.clone();
    let t4 = (w.clone() * a.ux_over_x.clone() * (us2 + w2 * (one + ux2))).scale(two);
    t1 - t2 + t3 - t4
}

/// Desingularized data: `u = x² v`, derivatives of `v` at height `x`.
#[derive(Clone, Copy, Debug)]
pub struct VLocal<T> {
    pub v: T,
    pub v_s: T,
    pub v_x: T,
    pub v_ss: T,
    pub v_sx: T,
    pub v_xx: T,
}

/// `ℱ(x² v)`; finite at `x = 0`, where it reduces to `κ - 2v`.
pub fn mse_v<T: Real, R: Ring<T>>(kappa: T, kappa_s: T, x: T, d: [R; 6]) -> R {
    let [v, v_s, v_x, v_ss, v_sx, v_xx] = d;
    let x2 = x * x;
    let two = T::c(2.0);
    let local = Local {
        kappa: R::constant(kappa),
        kappa_s: R::constant(kappa_s),
        u: v.scale(x2),
        u_s: v_s.scale(x2),
        u_x: v.scale(two * x) + v_x.scale(x2),
        u_ss: v_ss.scale(x2),
        u_sx: v_s.scale(two * x) + v_sx.scale(x2),
        u_xx: v.scale(two) + v_x.scale(T::c(4.0) * x) + v_xx.scale(x2),
        ux_over_x: v.scale(two) + v_x.scale(x),
    };
    mse(&local)
}

impl<T: Real> VLocal<T> {
    pub fn as_array(&self) -> [T; 6] {
        [self.v, self.v_s, self.v_x, self.v_ss, self.v_sx, self.v_xx]
    }
}

/// Value and partial derivatives of `ℱ(x² v)` with respect to
/// `(v, v_s, v_x, v_ss, v_sx, v_xx)`.
pub fn mse_v_gradient<T: Real>(kappa: T, kappa_s: T, x: T, d: &VLocal<T>) -> (T, [T; 6]) {
    gradient(d.as_array(), |a: &[Dual<T>; 6]| mse_v(kappa, kappa_s, x, *a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn local_from_fn(kappa: f64, f: impl Fn(f64, f64) -> f64, s: f64, x: f64) -> Local<f64> {
        let h = 1e-4;
        let u = f(s, x);
        let u_s = (f(s + h, x) - f(s - h, x)) / (2.0 * h);
        let u_x = (f(s, x + h) - f(s, x - h)) / (2.0 * h);
        let u_ss = (f(s + h, x) - 2.0 * u + f(s - h, x)) / (h * h);
        let u_xx = (f(s, x + h) - 2.0 * u + f(s, x - h)) / (h * h);
        let u_sx = (f(s + h, x + h) - f(s + h, x - h) - f(s - h, x + h) + f(s - h, x - h)) / (4.0 * h * h);
        Local { kappa, kappa_s: 0.0, u, u_s, u_x, u_ss, u_sx, u_xx, ux_over_x: u_x / x }
    }

    #[test]
    fn hemisphere_graph_is_a_solution() {
        for r in [0.5f64, 1.0, 2.0] {
            for x in [0.05, 0.2, 0.4] {
                let x = x * r;
                // exact derivatives of u = R - sqrt(R² - x²)
                let q = (r * r - x * x).sqrt();
                let l = Local {
                    kappa: 1.0 / r,
                    kappa_s: 0.0,
                    u: r - q,
                    u_s: 0.0,
                    u_x: x / q,
                    u_ss: 0.0,
                    u_sx: 0.0,
                    u_xx: r * r / (q * q * q),
                    ux_over_x: 1.0 / q,
                };
                assert!(mse::<f64, f64>(&l).abs() < 1e-13, "R={r} x={x}: {}", mse(&l));
            }
        }
    }

    #[test]
    fn vertical_plane_is_a_solution() {
        let l = local_from_fn(0.0, |_, _| 0.0, 0.3, 0.2);
        assert_eq!(mse(&l), 0.0);
    }

    #[test]
    fn flat_case_matches_flat_pde() {
        let f = |s: f64, x: f64| 0.3 * x * x * x * s.cos() + 0.1 * x * x * (2.0 * s).sin();
        let l = local_from_fn(0.0, f, 0.7, 0.3);
        let flat = (1.0 + l.u_x * l.u_x) * l.u_ss - 2.0 * l.u_s * l.u_x * l.u_sx + (1.0 + l.u_s * l.u_s) * l.u_xx
            - 2.0 * (1.0 + l.u_x * l.u_x + l.u_s * l.u_s) / 0.3 * l.u_x;
        assert!((mse(&l) - flat).abs() < 1e-12);
    }

    #[test]
    fn boundary_row_is_kappa_minus_two_v() {
        let d = [0.4, 0.1, -0.3, 0.2, 0.5, 0.7];
        assert!((mse_v::<f64, f64>(1.3, 0.2, 0.0, d) - (1.3 - 0.8)).abs() < 1e-15);
    }

    #[test]
    fn desingularized_form_agrees_with_direct_form() {
        let (kappa, kappa_s, x) = (0.7f64, 0.0f64, 0.15f64);
        let d = VLocal { v: 0.35, v_s: 0.1, v_x: -0.2, v_ss: 0.05, v_sx: 0.3, v_xx: 0.4 };
        let a = d.as_array();
        let x2 = x * x;
        let direct = Local {
            kappa,
            kappa_s,
            u: x2 * a[0],
            u_s: x2 * a[1],
            u_x: 2.0 * x * a[0] + x2 * a[2],
            u_ss: x2 * a[3],
            u_sx: 2.0 * x * a[1] + x2 * a[4],
            u_xx: 2.0 * a[0] + 4.0 * x * a[2] + x2 * a[5],
            ux_over_x: (2.0 * x * a[0] + x2 * a[2]) / x,
        };
        let (val, grad) = mse_v_gradient(kappa, kappa_s, x, &d);
        assert!((val - mse::<f64, f64>(&direct)).abs() < 1e-14);
        // central differences on each v-derivative
        for k in 0..6 {
            let h = 1e-6;
            let mut p = a;
            let mut m = a;
            p[k] += h;
            m[k] -= h;
            let fd = (mse_v::<f64, f64>(kappa, kappa_s, x, p) - mse_v::<f64, f64>(kappa, kappa_s, x, m)) / (2.0 * h);
            assert!((fd - grad[k]).abs() < 1e-8, "k={k}: {fd} vs {}", grad[k]);
        }
    }
}

//! Torus `C/(Z+τZ)` with `τ = it`, viewed as the double of the annulus
//! `Σ = {0 ≤ Im u ≤ t/2}` under the reflection `u ↦ ū`.
//!
//! Boundary circles: `C₀ = {Im u = 0}` (traversed in `+x`) and
//! `C₁ = {Im u = t/2}` (traversed in `−x`), both parameterized by `x = Re u`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::C64;
use crate::special::Weierstrass;

const I: C64 = C64 { re: 0.0, im: 1.0 };
/// Largest nome for which theta series stay short.
pub const MAX_NOME: f64 = 0.5;
/// Samples used for period and argument-principle quadrature.
const QUAD_POINTS: usize = 256;

/// Location of the zero set of the normalized differential.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DkZeros {
    /// Zero inside Σ.
    pub inner: C64,
    /// Its reflection, inside Σ*.
    pub outer: C64,
}

/// Zero and polar divisors of the degree-two equivariant map.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MapDivisor {
    pub zeros: [C64; 2],
    pub poles: [C64; 2],
    pub scale: f64,
}

#[derive(Debug)]
pub struct EllipticModel {
    pub(crate) w: Weierstrass,
    /// Imaginary part of τ.
    pub t: f64,
    pub tau: C64,
    /// Nome `e^{-πt}`.
    pub q: f64,
    pub basepoint: C64,
    /// Representative of `R((0))` inside Σ*.
    pub reflected_basepoint: C64,
    /// Linear correction in `dk = (ζ(u−p₀) − ζ(u−P₋) + α) du`.
    pub alpha: C64,
    /// Periods of `dk` along `1` and `τ`.
    pub periods: [C64; 2],
    /// Determinant of the real period system.
    pub period_det: f64,
    pub zeros: DkZeros,
    pub map: MapDivisor,
}

fn trapezoid(n: usize, f: impl Fn(f64) -> C64) -> C64 {
    (0..n).map(|j| f(j as f64 / n as f64)).sum::<C64>() / n as f64
}

impl EllipticModel {
    pub fn new(tau: C64, basepoint: C64) -> Result<Self> {
        if tau.im <= 0.0 || !tau.im.is_finite() {
            return Err(Error::Domain("half-period ratio needs positive imaginary part".into()));
        }
        if tau.re != 0.0 {
            return Err(Error::Domain(
                "the reflection u ↦ ū needs a purely imaginary modulus (tau_re = 0)".into(),
            ));
        }
        let t = tau.im;
        let q = (-PI * t).exp();
        if q > MAX_NOME {
            return Err(Error::Domain(format!("nome {q:.4} exceeds {MAX_NOME}")));
        }
        if !(basepoint.im > 0.0 && basepoint.im < t / 2.0) {
            return Err(Error::Domain(format!(
                "basepoint {basepoint} is not interior to the strip 0 < Im u < {}",
                t / 2.0
            )));
        }
        let basepoint = C64::new(basepoint.re.rem_euclid(1.0), basepoint.im);
        let w = Weierstrass::new(tau);
        let reflected_basepoint = basepoint.conj() + tau;
        let raw = |u: C64| w.zeta(u - basepoint) - w.zeta(u - reflected_basepoint);

        let period_a = trapezoid(QUAD_POINTS, |x| raw(C64::new(x, 0.0)));
        let xb = basepoint.re + 0.5;
        let period_b = trapezoid(QUAD_POINTS, |s| raw(C64::new(xb, s * t)) * I * t);
        // [1, 0; Re τ, −Im τ] (Re α, Im α)ᵀ = −(Re P_A, Re P_B)ᵀ
        let period_det = -tau.im;
        assert!(
            period_det.abs() > 1e-12,
            "period normalization is singular; the Legendre relation forbids this"
        );
        let are = -period_a.re;
        let aim = (-period_b.re - tau.re * are) / -tau.im;
        let alpha = C64::new(are, aim);
        let periods = [period_a + alpha, period_b + alpha * tau];

        let mut model = Self {
            w,
            t,
            tau,
            q,
            basepoint,
            reflected_basepoint,
            alpha,
            periods,
            period_det,
            zeros: DkZeros {
                inner: C64::new(0.0, 0.0),
                outer: C64::new(0.0, 0.0),
            },
            map: MapDivisor {
                zeros: [basepoint; 2],
                poles: [reflected_basepoint; 2],
                scale: 1.0,
            },
        };
        model.zeros = model.locate_zeros()?;
        model.map = model.build_map()?;
        Ok(model)
    }

    /// `dk/du` at `u`.
    pub fn dk(&self, u: C64) -> C64 {
        self.w.zeta(u - self.basepoint) - self.w.zeta(u - self.reflected_basepoint) + self.alpha
    }

    /// `d²k/du²`.
    pub fn dk_prime(&self, u: C64) -> C64 {
        -self.w.wp(u - self.basepoint) + self.w.wp(u - self.reflected_basepoint)
    }

    /// `k(u)` up to an additive constant, normalized so `Re k = 0` at `u = 0`.
    pub fn k(&self, u: C64) -> C64 {
        let raw = |u: C64| {
            self.w.ln_sigma(u - self.basepoint) - self.w.ln_sigma(u - self.reflected_basepoint)
                + self.alpha * u
        };
        raw(u) - raw(C64::new(0.0, 0.0)).re
    }

    /// Map a point to the fundamental rectangle `0 ≤ Re < 1`, `0 ≤ Im < t`.
    pub fn wrap(&self, u: C64) -> C64 {
        let k = (u.im / self.t).floor();
        let v = u - self.tau * k;
        C64::new(v.re.rem_euclid(1.0), v.im)
    }

    pub fn reflect(&self, u: C64) -> C64 {
        self.wrap(u.conj())
    }

    pub fn in_sigma(&self, u: C64) -> bool {
        let v = self.wrap(u);
        v.im <= self.t / 2.0 + 1e-14 || v.im >= self.t - 1e-14
    }

    pub fn boundary_point(&self, circle: usize, x: f64) -> C64 {
        match circle {
            0 => C64::new(x, 0.0),
            _ => C64::new(x, self.t / 2.0),
        }
    }

    /// Orientation of the boundary circle as part of ∂Σ.
    pub fn orientation(circle: usize) -> f64 {
        if circle == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn newton(&self, mut u: C64) -> Option<C64> {
        for _ in 0..60 {
            let f = self.dk(u);
            let step = f / self.dk_prime(u);
            u -= step;
            if !u.re.is_finite() || !u.im.is_finite() {
                return None;
            }
            if step.norm() < 1e-15 {
                break;
            }
        }
        (self.dk(u).norm() < 1e-10).then_some(u)
    }

    /// Number of zeros of `dk` in Σ by the argument principle.
    pub fn zero_count_sigma(&self) -> f64 {
        let n = QUAD_POINTS;
        let mut total = C64::new(0.0, 0.0);
        for circle in 0..2 {
            let s = trapezoid(n, |x| {
                let u = self.boundary_point(circle, x);
                self.dk_prime(u) / self.dk(u)
            });
            total += s * Self::orientation(circle);
        }
        1.0 + (total / (2.0 * PI * I)).re
    }

    fn locate_zeros(&self) -> Result<DkZeros> {
        let mut found: Vec<C64> = Vec::new();
        let half = self.t / 2.0;
        for i in 0..8 {
            for j in 1..8 {
                let guess = C64::new(i as f64 / 8.0, half * j as f64 / 8.0);
                if let Some(z) = self.newton(guess) {
                    let z = self.wrap(z);
                    if z.im >= -1e-12 && z.im <= half + 1e-12 {
                        let fresh = found.iter().all(|p| self.w.theta.reduce(*p - z).0.norm() > 1e-7);
                        if fresh {
                            found.push(z);
                        }
                    }
                }
            }
        }
        match found.len() {
            1 => {
                let inner = found[0];
                if inner.im.abs() < 1e-9 || (inner.im - half).abs() < 1e-9 {
                    return Err(Error::Model(format!("dk vanishes on the boundary at {inner}")));
                }
                if self.dk_prime(inner).norm() < 1e-8 {
                    return Err(Error::Model(format!(
                        "dk has a non-simple zero at {inner}; zero-mode pole bookkeeping refused"
                    )));
                }
                Ok(DkZeros {
                    inner,
                    outer: self.reflect(inner),
                })
            }
            0 => Err(Error::Model("no zero of dk located in Σ".into())),
            _ => Err(Error::Model(format!(
                "coincident or extra zeros of dk in Σ: {found:?}"
            ))),
        }
    }

    fn build_map(&self) -> Result<MapDivisor> {
        let p0 = self.basepoint;
        let p = C64::new((p0.re + 0.5).rem_euclid(1.0), self.t / 2.0 - p0.im);
        if !(p.im > 0.0 && p.im < self.t / 2.0) {
            return Err(Error::Model(format!("Abel condition gave p = {p} outside Σ")));
        }
        let poles = [p0.conj() + self.tau, p.conj()];
        let mut map = MapDivisor {
            zeros: [p0, p],
            poles,
            scale: 1.0,
        };
        let raw = Self::map_log(&self.w, &map, C64::new(0.0, 0.0));
        map.scale = (-raw.re).exp();
        Ok(map)
    }

    fn map_log(w: &Weierstrass, map: &MapDivisor, u: C64) -> C64 {
        let th = |a: C64| w.theta.ln_theta1_pi(u - a);
        th(map.zeros[0]) + th(map.zeros[1]) - th(map.poles[0]) - th(map.poles[1])
    }

    /// Strictly equivariant map of degree two.
    pub fn zmap(&self, u: C64) -> C64 {
        Self::map_log(&self.w, &self.map, u).exp() * self.map.scale
    }

    pub fn weierstrass(&self) -> &Weierstrass {
        &self.w
    }
}

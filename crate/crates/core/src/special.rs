//! Jacobi theta functions and Weierstrass functions for the lattice `Z + τZ`.
//!
//! Conventions: nome `q = e^{iπτ}`, theta functions of the variable `z`
//! (so the lattice in `z` is `πZ + πτZ`), Weierstrass functions of `u`
//! with periods 1 and τ.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };
/// Series terms are dropped once they fall below this fraction of the running sum.
const SERIES_TOL: f64 = 1e-18;
const MAX_TERMS: usize = 64;

/// θ₁ and its first three derivatives at one point.
#[derive(Clone, Copy, Debug)]
pub struct Theta1Jet {
    pub value: C64,
    pub d1: C64,
    pub d2: C64,
    pub d3: C64,
}

/// Theta functions for a fixed modulus τ.
#[derive(Clone, Copy, Debug)]
pub struct Theta {
    pub tau: C64,
    pub q: C64,
}

impl Theta {
    pub fn new(tau: C64) -> Self {
        assert!(tau.im > 0.0, "modulus must lie in the upper half plane");
        Self {
            tau,
            q: (I * PI * tau).exp(),
        }
    }

    /// `q^{e}` for real exponent `e`, taken as `e^{iπτe}`.
    fn qpow(&self, e: f64) -> C64 {
        (I * PI * self.tau * e).exp()
    }

    /// θ₁(z) = 2 Σ (−1)^n q^{(n+½)²} sin((2n+1)z) with derivatives.
    pub fn theta1_jet(&self, z: C64) -> Theta1Jet {
        let mut out = Theta1Jet {
            value: C64::new(0.0, 0.0),
            d1: C64::new(0.0, 0.0),
            d2: C64::new(0.0, 0.0),
            d3: C64::new(0.0, 0.0),
        };
        for n in 0..MAX_TERMS {
            let k = (2 * n + 1) as f64;
            let sign = if n % 2 == 0 { 2.0 } else { -2.0 };
            let w = self.qpow((n as f64 + 0.5).powi(2)) * sign;
            let (s, c) = ((z * k).sin(), (z * k).cos());
            let t0 = w * s;
            let t1 = w * c * k;
            out.value += t0;
            out.d1 += t1;
            out.d2 -= t0 * (k * k);
            out.d3 -= t1 * (k * k);
            let scale = out.value.norm() + out.d1.norm();
            if n > 1 && (t0.norm() + t1.norm()) * k * k < SERIES_TOL * scale {
                break;
            }
        }
        out
    }

    pub fn theta1(&self, z: C64) -> C64 {
        self.theta1_jet(z).value
    }

    /// θ₂(z) = 2 Σ q^{(n+½)²} cos((2n+1)z).
    pub fn theta2(&self, z: C64) -> C64 {
        let mut sum = C64::new(0.0, 0.0);
        for n in 0..MAX_TERMS {
            let k = (2 * n + 1) as f64;
            let t = self.qpow((n as f64 + 0.5).powi(2)) * (z * k).cos() * 2.0;
            sum += t;
            if n > 1 && t.norm() < SERIES_TOL * sum.norm() {
                break;
            }
        }
        sum
    }

    fn theta34(&self, z: C64, alternate: bool) -> C64 {
        let mut sum = C64::new(1.0, 0.0);
        for n in 1..MAX_TERMS {
            let sign = if alternate && n % 2 == 1 { -2.0 } else { 2.0 };
            let t = self.qpow((n * n) as f64) * (z * (2 * n) as f64).cos() * sign;
            sum += t;
            if t.norm() < SERIES_TOL * sum.norm() {
                break;
            }
        }
        sum
    }

    /// θ₃(z) = 1 + 2 Σ q^{n²} cos 2nz.
    pub fn theta3(&self, z: C64) -> C64 {
        self.theta34(z, false)
    }

    /// θ₄(z) = 1 + 2 Σ (−1)^n q^{n²} cos 2nz.
    pub fn theta4(&self, z: C64) -> C64 {
        self.theta34(z, true)
    }

    /// θ_k for k ∈ {1,2,3,4}.
    pub fn theta(&self, k: u8, z: C64) -> C64 {
        match k {
            1 => self.theta1(z),
            2 => self.theta2(z),
            3 => self.theta3(z),
            4 => self.theta4(z),
            _ => panic!("theta index must be 1..=4"),
        }
    }

    /// Split `u = u' + kτ + l` with `|Im u'| ≤ Im τ / 2` and `|Re u'| ≤ ½`
    /// (after removing the τ multiple).
    pub fn reduce(&self, u: C64) -> (C64, i64, i64) {
        let k = (u.im / self.tau.im).round() as i64;
        let v = u - self.tau * k as f64;
        let l = v.re.round() as i64;
        (v - l as f64, k, l)
    }

    /// Logarithm of θ₁(πu) continued through the quasi-periodicity; the
    /// imaginary part is determined modulo 2π by the reduced value.
    pub fn ln_theta1_pi(&self, u: C64) -> C64 {
        let (v, k, l) = self.reduce(u);
        let kf = k as f64;
        self.theta1(v * PI).ln() + I * PI * (l + k) as f64 - I * PI * self.tau * (kf * kf)
            - I * 2.0 * PI * kf * v
    }

    /// Logarithmic derivative θ₁'/θ₁ at `z = πu`, with its first two derivatives.
    pub fn log_derivs_pi(&self, u: C64) -> (C64, C64, C64) {
        let (v, k, _) = self.reduce(u);
        let j = self.theta1_jet(v * PI);
        let l = j.d1 / j.value;
        let r2 = j.d2 / j.value;
        let r3 = j.d3 / j.value;
        let l1 = r2 - l * l;
        let l2 = r3 - r2 * l * 3.0 + l * l * l * 2.0;
        (l - I * 2.0 * k as f64, l1, l2)
    }
}

/// Weierstrass ζ, ℘, ℘′ and σ for the lattice `Z + τZ`.
#[derive(Clone, Copy, Debug)]
pub struct Weierstrass {
    pub theta: Theta,
    /// Quasi-period of ζ along 1: ζ(u+1) = ζ(u) + 2η₁.
    pub eta1: C64,
    /// Quasi-period of ζ along τ: ζ(u+τ) = ζ(u) + 2η₃.
    pub eta3: C64,
    theta1_prime0: C64,
}

impl Weierstrass {
    pub fn new(tau: C64) -> Self {
        let theta = Theta::new(tau);
        let j = theta.theta1_jet(C64::new(0.0, 0.0));
        let eta1 = -(PI * PI / 6.0) * j.d3 / j.d1;
        Self {
            theta,
            eta1,
            // Legendre relation.
            eta3: eta1 * tau - I * PI,
            theta1_prime0: j.d1,
        }
    }

    pub fn tau(&self) -> C64 {
        self.theta.tau
    }

    pub fn zeta(&self, u: C64) -> C64 {
        let (l, _, _) = self.theta.log_derivs_pi(u);
        self.eta1 * u * 2.0 + l * PI
    }

    pub fn wp(&self, u: C64) -> C64 {
        let (_, l1, _) = self.theta.log_derivs_pi(u);
        -self.eta1 * 2.0 - l1 * (PI * PI)
    }

    pub fn wp_prime(&self, u: C64) -> C64 {
        let (_, _, l2) = self.theta.log_derivs_pi(u);
        -l2 * (PI * PI * PI)
    }

    pub fn ln_sigma(&self, u: C64) -> C64 {
        self.eta1 * u * u + self.theta.ln_theta1_pi(u) - (self.theta1_prime0 * PI).ln()
    }

    pub fn sigma(&self, u: C64) -> C64 {
        self.ln_sigma(u).exp()
    }

    /// θ₁′(0).
    pub fn theta1_prime0(&self) -> C64 {
        self.theta1_prime0
    }
}

//! Truncated Laurent representation of functions on the boundary circles.
//!
//! Every circle is parameterized by `s ∈ [0, 1)` and a component stores
//! `c_n`, `n ∈ [-N, N]`, with `f(s) = Σ c_n e^{2πins}`. On the disk
//! `z = e^{2πis}`; on the annulus double each horizontal circle uses `s = Re u`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const DEFAULT_TRUNCATION: usize = 64;
/// Relative tolerance for exact algebraic identities.
pub const EXACT_TOL: f64 = 1e-10;
/// Relative tolerance for extrapolated limits.
pub const LIMIT_TOL: f64 = 1e-6;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> = RefCell::new(HashMap::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|p| {
        p.borrow_mut()
            .entry((len, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if inverse {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                }
            })
            .clone()
    })
}

/// Default sample count per circle for truncation `n`.
pub fn default_grid(n: usize) -> usize {
    4 * n.max(1)
}

/// Coefficients `c_{-N..=N}` from equispaced samples by trigonometric interpolation.
fn coefficients_from_samples(samples: &[C64], n: usize) -> Vec<C64> {
    let g = samples.len();
    let mut buf = samples.to_vec();
    plan(g, false).process(&mut buf);
    let scale = 1.0 / g as f64;
    (-(n as i64)..=n as i64)
        .map(|k| buf[k.rem_euclid(g as i64) as usize] * scale)
        .collect()
}

fn samples_from_coefficients(coeffs: &[C64], n: usize, g: usize) -> Vec<C64> {
    let mut buf = vec![C64::new(0.0, 0.0); g];
    for (i, c) in coeffs.iter().enumerate() {
        let k = i as i64 - n as i64;
        buf[k.rem_euclid(g as i64) as usize] += c;
    }
    plan(g, true).process(&mut buf);
    buf
}

/// Complex function on one or more boundary circles, stored as truncated
/// Laurent coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentBoundaryFunction {
    truncation: usize,
    grid_size: usize,
    components: Vec<Vec<C64>>,
}

impl LaurentBoundaryFunction {
    pub fn zeros(circles: usize, truncation: usize) -> Self {
        Self {
            truncation,
            grid_size: default_grid(truncation),
            components: vec![vec![C64::new(0.0, 0.0); 2 * truncation + 1]; circles],
        }
    }

    pub fn constant(circles: usize, truncation: usize, value: C64) -> Self {
        let mut f = Self::zeros(circles, truncation);
        for c in &mut f.components {
            c[truncation] = value;
        }
        f
    }

    /// `value · e^{2πins}` on every circle.
    pub fn monomial(circles: usize, truncation: usize, mode: i64, value: C64) -> Self {
        let mut f = Self::zeros(circles, truncation);
        if mode.unsigned_abs() as usize <= truncation {
            for c in &mut f.components {
                c[(mode + truncation as i64) as usize] = value;
            }
        }
        f
    }

    /// Build from coefficient tables, each of length `2N+1` indexed from `-N`.
    pub fn from_coefficients(components: Vec<Vec<C64>>) -> Result<Self> {
        let len = components
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::BadInput("no boundary components".into()))?;
        if len % 2 == 0 || components.iter().any(|c| c.len() != len) {
            return Err(Error::BadInput(
                "coefficient tables must share an odd length 2N+1".into(),
            ));
        }
        let truncation = len / 2;
        Ok(Self {
            truncation,
            grid_size: default_grid(truncation),
            components,
        })
    }

    /// Trigonometric interpolation of equispaced samples (one sequence per circle).
    pub fn from_samples(samples: &[Vec<C64>], truncation: usize) -> Result<Self> {
        let g = samples
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::BadInput("no boundary components".into()))?;
        if samples.iter().any(|s| s.len() != g) {
            return Err(Error::BadInput("sample counts differ between circles".into()));
        }
        if g < 2 * truncation + 1 {
            return Err(Error::Aliasing {
                samples: g,
                truncation,
                needed: 2 * truncation + 1,
            });
        }
        Ok(Self {
            truncation,
            grid_size: g,
            components: samples
                .iter()
                .map(|s| coefficients_from_samples(s, truncation))
                .collect(),
        })
    }

    /// Sample `f(s)` on the default grid of every circle.
    pub fn from_fn(circles: usize, truncation: usize, f: impl Fn(usize, f64) -> C64) -> Self {
        let g = default_grid(truncation);
        let samples: Vec<Vec<C64>> = (0..circles)
            .map(|c| (0..g).map(|j| f(c, j as f64 / g as f64)).collect())
            .collect();
        Self::from_samples(&samples, truncation).expect("default grid resolves its truncation")
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn circles(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Vec<C64>] {
        &self.components
    }

    pub fn component(&self, circle: usize) -> &[C64] {
        &self.components[circle]
    }

    pub fn coefficient(&self, circle: usize, mode: i64) -> C64 {
        if mode.unsigned_abs() as usize > self.truncation {
            return C64::new(0.0, 0.0);
        }
        self.components[circle][(mode + self.truncation as i64) as usize]
    }

    pub fn set_coefficient(&mut self, circle: usize, mode: i64, value: C64) {
        assert!(mode.unsigned_abs() as usize <= self.truncation, "mode outside truncation");
        let n = self.truncation as i64;
        self.components[circle][(mode + n) as usize] = value;
    }

    /// Samples on `grid_size` equispaced points of every circle.
    pub fn samples(&self) -> Vec<Vec<C64>> {
        self.samples_on(self.grid_size)
    }

    pub fn samples_on(&self, g: usize) -> Vec<Vec<C64>> {
        self.components
            .iter()
            .map(|c| samples_from_coefficients(c, self.truncation, g))
            .collect()
    }

    /// Coefficient sum at parameter `s` of one circle.
    pub fn eval(&self, circle: usize, s: f64) -> C64 {
        let n = self.truncation as i64;
        self.components[circle]
            .iter()
            .enumerate()
            .map(|(i, c)| c * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (i as i64 - n) as f64 * s))
            .sum()
    }

    pub fn max_coefficient(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Euclidean norm of the coefficient table (the L² norm on the circles).
    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest coefficient modulus with `|n| > from`.
    pub fn tail(&self, from: usize) -> f64 {
        let n = self.truncation as i64;
        self.components
            .iter()
            .flat_map(|c| {
                c.iter()
                    .enumerate()
                    .filter(move |(i, _)| (*i as i64 - n).unsigned_abs() as usize > from)
                    .map(|(_, v)| v.norm())
            })
            .fold(0.0, f64::max)
    }

    /// Largest coefficient difference.
    pub fn distance(&self, other: &Self) -> f64 {
        let n = self.truncation.max(other.truncation) as i64;
        let mut d: f64 = 0.0;
        for c in 0..self.circles() {
            for k in -n..=n {
                d = d.max((self.coefficient(c, k) - other.coefficient(c, k)).norm());
            }
        }
        d
    }

    /// Same function with truncation changed (zero padded or cut).
    pub fn with_truncation(&self, truncation: usize) -> Self {
        let mut out = Self::zeros(self.circles(), truncation);
        let m = truncation.min(self.truncation) as i64;
        for c in 0..self.circles() {
            for k in -m..=m {
                out.set_coefficient(c, k, self.coefficient(c, k));
            }
        }
        out
    }

    fn zip_coeffs(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.circles(), other.circles(), "component count mismatch");
        assert_eq!(self.truncation, other.truncation, "truncation mismatch");
        Self {
            truncation: self.truncation,
            grid_size: self.grid_size,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect())
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_coeffs(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_coeffs(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.components.iter_mut().flatten().for_each(|c| *c *= s);
        out
    }

    pub fn add_constant(&self, s: C64) -> Self {
        let mut out = self.clone();
        for c in &mut out.components {
            c[self.truncation] += s;
        }
        out
    }

    /// Pointwise map on the sample grid followed by re-interpolation.
    pub fn map_samples(&self, f: impl Fn(C64) -> C64) -> Self {
        let samples: Vec<Vec<C64>> = self
            .samples()
            .into_iter()
            .map(|s| s.into_iter().map(&f).collect())
            .collect();
        Self::from_samples(&samples, self.truncation).expect("own grid resolves truncation")
    }

    /// Pointwise product on the sample grid.
    pub fn mul(&self, other: &Self) -> Self {
        pointwise(&[self, other], |v| v[0] * v[1])
    }

    pub fn exp(&self) -> Self {
        self.map_samples(|z| z.exp())
    }

    pub fn recip(&self) -> Self {
        self.map_samples(|z| 1.0 / z)
    }

    pub fn powi(&self, k: i32) -> Self {
        self.map_samples(|z| z.powi(k))
    }

    /// The reflection-conjugate `f*(q) = conj f(R(q))`; on every circle the
    /// reflection is the identity, so this is the pointwise conjugate.
    pub fn star(&self) -> Self {
        let n = self.truncation;
        let mut out = self.clone();
        for (o, c) in out.components.iter_mut().zip(&self.components) {
            for i in 0..=2 * n {
                o[i] = c[2 * n - i].conj();
            }
        }
        out
    }

    /// Largest modulus of the real part on the grid.
    pub fn max_real_part(&self) -> f64 {
        self.samples()
            .iter()
            .flatten()
            .map(|z| z.re.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_modulus(&self) -> f64 {
        self.samples()
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_modulus(&self) -> f64 {
        self.samples()
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Pointwise combination of several functions sharing shape.
pub fn pointwise(
    fs: &[&LaurentBoundaryFunction],
    f: impl Fn(&[C64]) -> C64,
) -> LaurentBoundaryFunction {
    let first = fs[0];
    let samples: Vec<Vec<Vec<C64>>> = fs.iter().map(|g| g.samples()).collect();
    let mut scratch = vec![C64::new(0.0, 0.0); fs.len()];
    let out: Vec<Vec<C64>> = (0..first.circles())
        .map(|c| {
            (0..first.grid_size)
                .map(|j| {
                    for (k, s) in samples.iter().enumerate() {
                        scratch[k] = s[c][j];
                    }
                    f(&scratch)
                })
                .collect()
        })
        .collect();
    LaurentBoundaryFunction::from_samples(&out, first.truncation).expect("shared grid")
}

/// Part selector for the classical disk split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiskPart {
    Minus,
    Zero,
    Plus,
}

fn single_circle(f: &LaurentBoundaryFunction) -> Result<()> {
    if f.circles() != 1 {
        return Err(Error::WrongModel(format!(
            "classical projections need one boundary circle, got {}",
            f.circles()
        )));
    }
    Ok(())
}

/// Classical split `f = f₋ + f₀ + f₊` by the sign of the mode.
pub fn project_disk(f: &LaurentBoundaryFunction, part: DiskPart) -> Result<LaurentBoundaryFunction> {
    single_circle(f)?;
    let n = f.truncation() as i64;
    let mut out = LaurentBoundaryFunction::zeros(1, f.truncation());
    for k in -n..=n {
        let keep = match part {
            DiskPart::Minus => k < 0,
            DiskPart::Zero => k == 0,
            DiskPart::Plus => k > 0,
        };
        if keep {
            out.set_coefficient(0, k, f.coefficient(0, k));
        }
    }
    Ok(out)
}

/// Circle Hilbert transform, `c_n ↦ i·sign(n)·c_n`.
pub fn hilbert_transform(f: &LaurentBoundaryFunction) -> Result<LaurentBoundaryFunction> {
    single_circle(f)?;
    let n = f.truncation() as i64;
    let mut out = LaurentBoundaryFunction::zeros(1, f.truncation());
    for k in -n..=n {
        let s = C64::new(0.0, k.signum() as f64);
        out.set_coefficient(0, k, s * f.coefficient(0, k));
    }
    Ok(out)
}

/// Regularity summary of a coefficient table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    /// `Σ |n| |c_n|²` over all circles.
    pub sobolev_half_norm: f64,
    /// Fitted ratio `r` in `|c_n| ≈ C r^{|n|}`; `f64::EPSILON` when the tail is
    /// below resolution.
    pub geometric_rate: f64,
}

/// Relative floor below which coefficients are treated as rounding noise in the tail fit.
const TAIL_FLOOR: f64 = 1e-13;

pub fn decay_profile(f: &LaurentBoundaryFunction) -> DecayProfile {
    let n = f.truncation() as i64;
    let mut sobolev = 0.0;
    for c in 0..f.circles() {
        for k in -n..=n {
            sobolev += k.unsigned_abs() as f64 * f.coefficient(c, k).norm_sqr();
        }
    }
    let top = f.max_coefficient();
    let mut pts = Vec::new();
    for k in 1..=n {
        let m = (0..f.circles())
            .flat_map(|c| [f.coefficient(c, k).norm(), f.coefficient(c, -k).norm()])
            .fold(0.0, f64::max);
        if top > 0.0 && m > TAIL_FLOOR * top {
            pts.push((k as f64, m.ln()));
        }
    }
    let geometric_rate = if pts.len() < 2 {
        f64::EPSILON
    } else {
        let len = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxy / sxx).exp().clamp(f64::EPSILON, 1.0)
    };
    DecayProfile {
        sobolev_half_norm: sobolev,
        geometric_rate,
    }
}

#[derive(Serialize, Deserialize)]
struct ComponentJson {
    n_min: i64,
    n_max: i64,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FunctionJson {
    components: Vec<ComponentJson>,
}

impl Serialize for LaurentBoundaryFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.truncation as i64;
        FunctionJson {
            components: self
                .components
                .iter()
                .map(|c| ComponentJson {
                    n_min: -n,
                    n_max: n,
                    re: c.iter().map(|z| z.re).collect(),
                    im: c.iter().map(|z| z.im).collect(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentBoundaryFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = FunctionJson::deserialize(d)?;
        let mut tables = Vec::with_capacity(raw.components.len());
        for c in raw.components {
            let len = (c.n_max - c.n_min + 1).max(0) as usize;
            if c.n_min != -c.n_max || c.re.len() != len || c.im.len() != len {
                return Err(D::Error::custom(
                    "component must be symmetric with re/im of length n_max - n_min + 1",
                ));
            }
            tables.push(c.re.iter().zip(&c.im).map(|(r, i)| C64::new(*r, *i)).collect());
        }
        LaurentBoundaryFunction::from_coefficients(tables).map_err(D::Error::custom)
    }
}

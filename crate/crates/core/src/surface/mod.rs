//! Surface-dependent data: reflection, the differential `dk`, zero modes,
//! the strictly equivariant map and the linear triangular decomposition.
//!
//! Two models are provided. The disk (double = sphere) uses the coordinate
//! `z` with boundary `|z| = 1`. The elliptic model is the annulus double
//! described in [`elliptic`].

pub mod elliptic;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

pub use elliptic::EllipticModel;

use crate::error::{Error, Result};
use crate::fourier::{LaurentBoundaryFunction, C64, DEFAULT_TRUNCATION};
use crate::linalg::{pseudo_inverse, CMatrix, CVector};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Serializable description of a model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelDescriptor {
    Disk,
    Elliptic {
        tau_re: f64,
        tau_im: f64,
        basepoint_re: f64,
        basepoint_im: f64,
    },
}

impl ModelDescriptor {
    /// Default elliptic model: `τ = i`, basepoint `0.25i`.
    pub fn default_elliptic() -> Self {
        ModelDescriptor::Elliptic {
            tau_re: 0.0,
            tau_im: 1.0,
            basepoint_re: 0.0,
            basepoint_im: 0.25,
        }
    }

    pub fn build(&self) -> Result<SurfaceModel> {
        match *self {
            ModelDescriptor::Disk => Ok(disk_model()),
            ModelDescriptor::Elliptic {
                tau_re,
                tau_im,
                basepoint_re,
                basepoint_im,
            } => elliptic_model(C64::new(tau_re, tau_im), C64::new(basepoint_re, basepoint_im)),
        }
    }
}

#[derive(Debug)]
enum Geometry {
    Disk,
    Elliptic(EllipticModel),
}

#[derive(Debug)]
struct Inner {
    geometry: Geometry,
    descriptor: ModelDescriptor,
    decomposers: Mutex<HashMap<(usize, usize), Arc<Decomposer>>>,
}

/// Immutable handle to a surface model; clones share the same data.
#[derive(Clone, Debug)]
pub struct SurfaceModel {
    inner: Arc<Inner>,
}

pub fn disk_model() -> SurfaceModel {
    SurfaceModel::wrap(Geometry::Disk, ModelDescriptor::Disk)
}

pub fn elliptic_model(half_period_ratio: C64, basepoint: C64) -> Result<SurfaceModel> {
    let m = EllipticModel::new(half_period_ratio, basepoint)?;
    let descriptor = ModelDescriptor::Elliptic {
        tau_re: half_period_ratio.re,
        tau_im: half_period_ratio.im,
        basepoint_re: basepoint.re,
        basepoint_im: basepoint.im,
    };
    Ok(SurfaceModel::wrap(Geometry::Elliptic(m), descriptor))
}

/// Part of a boundary function in the linear triangular decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Minus,
    Zero,
    Plus,
}

/// Basis of the complementary subspace `H₀`.
#[derive(Clone, Debug)]
pub struct ZeroModeBasis {
    /// `modes[0]` is the constant function; on the torus `modes[1] = du/dk`.
    pub modes: Vec<LaurentBoundaryFunction>,
    pub dimension: usize,
}

/// `f = minus + zero + plus` with diagnostics.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub minus: LaurentBoundaryFunction,
    pub zero: LaurentBoundaryFunction,
    pub plus: LaurentBoundaryFunction,
    /// Coordinates of `zero` in the zero-mode basis.
    pub zero_coords: Vec<C64>,
    pub residual: f64,
}

impl Decomposition {
    pub fn part(&self, p: Part) -> &LaurentBoundaryFunction {
        match p {
            Part::Minus => &self.minus,
            Part::Zero => &self.zero,
            Part::Plus => &self.plus,
        }
    }
}

/// Least-squares realization of the decomposition in coefficient space.
#[derive(Debug)]
pub struct Decomposer {
    pub truncation: usize,
    pub basis_size: usize,
    columns: CMatrix,
    kinds: Vec<Part>,
    pinv: CMatrix,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Strictly equivariant map `𝔷`.
#[derive(Clone, Debug)]
pub struct EquivariantMap {
    model: SurfaceModel,
    pub degree: u32,
}

impl EquivariantMap {
    pub fn eval(&self, p: C64) -> C64 {
        match &self.model.inner.geometry {
            Geometry::Disk => p,
            Geometry::Elliptic(m) => m.zmap(p),
        }
    }

    /// Boundary values of `𝔷ⁿ` (any integer `n`; on S, `𝔷^{-1} = conj 𝔷`).
    pub fn boundary_power(&self, truncation: usize, n: i64) -> LaurentBoundaryFunction {
        match &self.model.inner.geometry {
            Geometry::Disk => LaurentBoundaryFunction::monomial(1, truncation, n, C64::new(1.0, 0.0)),
            Geometry::Elliptic(_) => self.model.sample(truncation, |p| {
                let z = self.eval(p);
                let z = z / z.norm();
                z.powi(n as i32)
            }),
        }
    }

    pub fn boundary(&self, truncation: usize) -> LaurentBoundaryFunction {
        self.boundary_power(truncation, 1)
    }
}

impl SurfaceModel {
    fn wrap(geometry: Geometry, descriptor: ModelDescriptor) -> Self {
        Self {
            inner: Arc::new(Inner {
                geometry,
                descriptor,
                decomposers: Mutex::new(HashMap::new()),
            }),
        }
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        self.inner.descriptor
    }

    pub fn elliptic(&self) -> Option<&EllipticModel> {
        match &self.inner.geometry {
            Geometry::Elliptic(m) => Some(m),
            Geometry::Disk => None,
        }
    }

    pub fn is_disk(&self) -> bool {
        matches!(self.inner.geometry, Geometry::Disk)
    }

    pub fn genus_double(&self) -> usize {
        if self.is_disk() {
            0
        } else {
            1
        }
    }

    pub fn circles(&self) -> usize {
        if self.is_disk() {
            1
        } else {
            2
        }
    }

    pub fn basepoint(&self) -> C64 {
        match &self.inner.geometry {
            Geometry::Disk => C64::new(0.0, 0.0),
            Geometry::Elliptic(m) => m.basepoint,
        }
    }

    /// `R((0))`; `None` stands for the point at infinity of the sphere.
    pub fn reflected_basepoint(&self) -> Option<C64> {
        match &self.inner.geometry {
            Geometry::Disk => None,
            Geometry::Elliptic(m) => Some(m.reflected_basepoint),
        }
    }

    /// The reflection `R`; `None` encodes infinity on the sphere.
    pub fn reflect(&self, p: C64) -> Option<C64> {
        match &self.inner.geometry {
            Geometry::Disk => (p.norm() > 0.0).then(|| 1.0 / p.conj()),
            Geometry::Elliptic(m) => Some(m.reflect(p)),
        }
    }

    pub fn boundary_point(&self, circle: usize, s: f64) -> C64 {
        match &self.inner.geometry {
            Geometry::Disk => C64::from_polar(1.0, 2.0 * PI * s),
            Geometry::Elliptic(m) => m.boundary_point(circle, s),
        }
    }

    /// Sample a function of the model coordinate on the boundary grid.
    pub fn sample(&self, truncation: usize, f: impl Fn(C64) -> C64) -> LaurentBoundaryFunction {
        LaurentBoundaryFunction::from_fn(self.circles(), truncation, |c, s| {
            f(self.boundary_point(c, s))
        })
    }

    /// `dk / d(coordinate)`.
    pub fn dk(&self, p: C64) -> C64 {
        match &self.inner.geometry {
            Geometry::Disk => 1.0 / p,
            Geometry::Elliptic(m) => m.dk(p),
        }
    }

    /// The time function `Re k`, zero on S.
    pub fn tau(&self, p: C64) -> f64 {
        match &self.inner.geometry {
            Geometry::Disk => p.norm().ln(),
            Geometry::Elliptic(m) => m.k(p).re,
        }
    }

    /// `(2πi)⁻¹ ∮ dk` around a small circle.
    pub fn dk_residue(&self, center: C64, radius: f64, points: usize) -> C64 {
        let mut sum = C64::new(0.0, 0.0);
        for j in 0..points {
            let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / points as f64);
            let p = center + e * radius;
            sum += self.dk(p) * I * e * radius * (2.0 * PI / points as f64);
        }
        sum / (2.0 * PI * I)
    }

    /// Periods of `dk` over the homology generators (empty on the sphere).
    pub fn dk_periods(&self) -> Vec<C64> {
        self.elliptic().map(|m| m.periods.to_vec()).unwrap_or_default()
    }

    /// Zeros of `dk` on the double.
    pub fn dk_zeros(&self) -> Vec<C64> {
        self.elliptic()
            .map(|m| vec![m.zeros.inner, m.zeros.outer])
            .unwrap_or_default()
    }

    /// Complex weights on a grid of `g` points per circle realizing
    /// `(2πi)⁻¹ ∫_S f dk`. They are real up to rounding.
    pub fn quadrature_weights(&self, g: usize) -> Vec<Vec<C64>> {
        match &self.inner.geometry {
            Geometry::Disk => vec![vec![C64::new(1.0 / g as f64, 0.0); g]],
            Geometry::Elliptic(m) => (0..2)
                .map(|c| {
                    (0..g)
                        .map(|j| {
                            let u = m.boundary_point(c, j as f64 / g as f64);
                            m.dk(u) / (2.0 * PI * I) / g as f64 * EllipticModel::orientation(c)
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// `(2πi)⁻¹ ∫_S f dk`; for `f` holomorphic in Σ this is `f((0))`.
    pub fn boundary_integral(&self, f: &LaurentBoundaryFunction) -> C64 {
        let w = self.quadrature_weights(f.grid_size());
        f.samples()
            .iter()
            .zip(&w)
            .flat_map(|(s, w)| s.iter().zip(w).map(|(a, b)| a * b))
            .sum()
    }

    pub fn value_at_basepoint(&self, f: &LaurentBoundaryFunction) -> C64 {
        self.boundary_integral(f)
    }

    /// Evaluate Σ-holomorphic boundary data at an interior point of Σ.
    pub fn eval_holomorphic(&self, f: &LaurentBoundaryFunction, p: C64) -> C64 {
        let n = f.truncation() as i64;
        match &self.inner.geometry {
            Geometry::Disk => (0..=n).rev().fold(C64::new(0.0, 0.0), |acc, k| acc * p + f.coefficient(0, k)),
            Geometry::Elliptic(m) => {
                let mut sum = C64::new(0.0, 0.0);
                for k in -n..=n {
                    let term = if k >= 0 {
                        f.coefficient(0, k) * (I * 2.0 * PI * k as f64 * p).exp()
                    } else {
                        f.coefficient(1, k)
                            * (I * 2.0 * PI * k as f64 * (p - I * (m.t / 2.0))).exp()
                    };
                    sum += term;
                }
                sum
            }
        }
    }

    /// Mesh of points covering the closure of Σ.
    pub fn interior_mesh(&self) -> Vec<C64> {
        let mut pts = Vec::new();
        match &self.inner.geometry {
            Geometry::Disk => {
                pts.push(C64::new(0.0, 0.0));
                for r in 1..=20 {
                    for j in 0..64 {
                        pts.push(C64::from_polar(r as f64 / 20.0, 2.0 * PI * j as f64 / 64.0));
                    }
                }
            }
            Geometry::Elliptic(m) => {
                for i in 0..=16 {
                    for j in 0..64 {
                        pts.push(C64::new(j as f64 / 64.0, m.t / 2.0 * i as f64 / 16.0));
                    }
                }
            }
        }
        pts
    }

    pub fn zero_modes(&self, truncation: usize) -> ZeroModeBasis {
        let one = LaurentBoundaryFunction::constant(self.circles(), truncation, C64::new(1.0, 0.0));
        let modes = match &self.inner.geometry {
            Geometry::Disk => vec![one],
            Geometry::Elliptic(m) => vec![one, self.sample(truncation, |u| 1.0 / m.dk(u))],
        };
        ZeroModeBasis {
            dimension: modes.len(),
            modes,
        }
    }

    pub fn equivariant_map(&self) -> EquivariantMap {
        EquivariantMap {
            model: self.clone(),
            degree: if self.is_disk() { 1 } else { 2 },
        }
    }

    /// The `n`-th Σ-holomorphic basis function vanishing at `(0)`, for
    /// `n ≠ 0` (disk: `n ≥ 1` only). On the torus this is `wⁿ − w₀ⁿ`,
    /// `w = e^{2πiu}`, divided by its largest boundary coefficient.
    pub fn plus_basis_function(&self, truncation: usize, n: i64) -> LaurentBoundaryFunction {
        let col = self.plus_column(truncation, n);
        LaurentBoundaryFunction::from_coefficients(split_coeffs(&col, self.circles(), truncation))
            .expect("well-formed column")
    }

    fn plus_column(&self, truncation: usize, n: i64) -> CVector {
        let len = 2 * truncation + 1;
        let idx = |c: usize, k: i64| c * len + (k + truncation as i64) as usize;
        let mut v = CVector::zeros(self.circles() * len);
        match &self.inner.geometry {
            Geometry::Disk => v[idx(0, n)] = C64::new(1.0, 0.0),
            Geometry::Elliptic(m) => {
                let qn = m.q.powi(n as i32);
                let w0n = (I * 2.0 * PI * m.basepoint * n as f64).exp();
                let scale = 1.0f64.max(qn).max(w0n.norm());
                v[idx(0, n)] += C64::new(1.0 / scale, 0.0);
                v[idx(1, n)] += C64::new(qn / scale, 0.0);
                v[idx(0, 0)] -= w0n / scale;
                v[idx(1, 0)] -= w0n / scale;
            }
        }
        v
    }

    /// Decomposer for truncation `n` and basis size `m` (modes `1..=m`
    /// in each holomorphic family). Built once per key.
    pub fn decomposer(&self, truncation: usize, basis_size: usize) -> Result<Arc<Decomposer>> {
        let key = (truncation, basis_size);
        if let Some(d) = self.inner.decomposers.lock().unwrap().get(&key) {
            return Ok(d.clone());
        }
        let d = Arc::new(self.build_decomposer(truncation, basis_size)?);
        self.inner
            .decomposers
            .lock()
            .unwrap()
            .entry(key)
            .or_insert(d.clone());
        Ok(d)
    }

    fn build_decomposer(&self, truncation: usize, basis_size: usize) -> Result<Decomposer> {
        if basis_size > truncation {
            return Err(Error::Resize(format!(
                "basis size {basis_size} exceeds truncation {truncation}"
            )));
        }
        let mut cols: Vec<(Part, CVector)> = Vec::new();
        let modes: Vec<i64> = if self.is_disk() {
            (1..=basis_size as i64).collect()
        } else {
            (1..=basis_size as i64).flat_map(|k| [k, -k]).collect()
        };
        for &k in &modes {
            let v = self.plus_column(truncation, k);
            // Σ*-holomorphic partner: conjugate on S.
            let fv = split_coeffs(&v, self.circles(), truncation);
            let star = LaurentBoundaryFunction::from_coefficients(fv).unwrap().star();
            cols.push((Part::Plus, v));
            cols.push((Part::Minus, flatten(&star)));
        }
        for mode in self.zero_modes(truncation).modes {
            cols.push((Part::Zero, flatten(&mode)));
        }
        let rows = self.circles() * (2 * truncation + 1);
        let columns = CMatrix::from_fn(rows, cols.len(), |i, j| cols[j].1[i]);
        let (pinv, sigma_min, sigma_max) = pseudo_inverse(&columns)?;
        Ok(Decomposer {
            truncation,
            basis_size,
            columns,
            kinds: cols.into_iter().map(|c| c.0).collect(),
            pinv,
            sigma_min,
            sigma_max,
        })
    }

    /// Linear triangular decomposition with default basis size `N`.
    pub fn decompose(&self, f: &LaurentBoundaryFunction) -> Result<Decomposition> {
        self.decompose_with(f, f.truncation())
    }

    pub fn decompose_with(&self, f: &LaurentBoundaryFunction, basis_size: usize) -> Result<Decomposition> {
        if f.circles() != self.circles() {
            return Err(Error::WrongModel(format!(
                "function has {} circles, model has {}",
                f.circles(),
                self.circles()
            )));
        }
        let n = f.truncation();
        let d = self.decomposer(n, basis_size)?;
        let b = flatten(f);
        let x = &d.pinv * &b;
        let mut parts = [
            CVector::zeros(b.len()),
            CVector::zeros(b.len()),
            CVector::zeros(b.len()),
        ];
        let mut zero_coords = Vec::new();
        for (j, kind) in d.kinds.iter().enumerate() {
            let slot = match kind {
                Part::Minus => 0,
                Part::Zero => {
                    zero_coords.push(x[j]);
                    1
                }
                Part::Plus => 2,
            };
            parts[slot] += d.columns.column(j) * x[j];
        }
        let residual = (&d.columns * &x - &b).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let scale = f.max_coefficient().max(1e-300);
        if residual > 1e-8 * scale.max(1.0) {
            return Err(Error::NonConvergence {
                what: "linear triangular decomposition".into(),
                residual,
                trace: vec![(basis_size, residual)],
            });
        }
        let build = |v: &CVector| {
            LaurentBoundaryFunction::from_coefficients(split_coeffs(v, self.circles(), n)).unwrap()
        };
        Ok(Decomposition {
            minus: build(&parts[0]),
            zero: build(&parts[1]),
            plus: build(&parts[2]),
            zero_coords,
            residual,
        })
    }

    /// `‖(F·χ₀)₋‖` for Σ-holomorphic `F` and a zero mode `χ₀`.
    pub fn multiply_stability_check(
        &self,
        f: &LaurentBoundaryFunction,
        chi0: &LaurentBoundaryFunction,
    ) -> Result<f64> {
        Ok(self.decompose(&f.mul(chi0))?.minus.max_coefficient())
    }

    /// Smallest singular value of the decomposition system for each basis size.
    pub fn uniqueness_profile(&self, sizes: &[usize]) -> Result<Vec<(usize, f64)>> {
        sizes
            .iter()
            .map(|&m| Ok((m, self.decomposer(m.max(1), m)?.sigma_min)))
            .collect()
    }

    pub fn default_truncation(&self) -> usize {
        DEFAULT_TRUNCATION
    }
}

fn flatten(f: &LaurentBoundaryFunction) -> CVector {
    CVector::from_iterator(
        f.circles() * (2 * f.truncation() + 1),
        f.components().iter().flatten().cloned(),
    )
}

fn split_coeffs(v: &CVector, circles: usize, truncation: usize) -> Vec<Vec<C64>> {
    let len = 2 * truncation + 1;
    (0..circles)
        .map(|c| v.rows(c * len, len).iter().cloned().collect())
        .collect()
}

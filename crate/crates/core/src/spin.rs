//! Boundary spinors, spin structures, Szegő projections and the
//! Krichever–Novikov spinor basis.
//!
//! A boundary spinor on circle `c` is `ψ(s) = Σ_m ψ_m e^{2πims}` where `m`
//! runs over integers or half-integers depending on the structure. On the
//! torus the canonical bundle is trivialized by `du`, so spinors are
//! functions with multipliers `ε₁` (along 1) and `ε₂` (along τ).

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{LaurentBoundaryFunction, C64};
use crate::linalg::{lstsq_svd, singular_values, CMatrix, CVector};
use crate::surface::{EllipticModel, Part, SurfaceModel};

const I: C64 = C64 { re: 0.0, im: 1.0 };
/// Mode-frame singular values below this count as a noninvertible ∂̄.
const SINGULAR_FRAME: f64 = 1e-10;

/// Square root of the canonical bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinLabel {
    /// The unique structure on the disk.
    Trivial,
    Theta1,
    Theta2,
    Theta3,
    Theta4,
}

impl SpinLabel {
    pub fn default_for(model: &SurfaceModel) -> Self {
        if model.is_disk() {
            SpinLabel::Trivial
        } else {
            SpinLabel::Theta3
        }
    }

    /// Multipliers `(ε₁, ε₂)` along the cycles 1 and τ.
    pub fn multipliers(self) -> (i8, i8) {
        match self {
            SpinLabel::Trivial => (-1, -1),
            SpinLabel::Theta1 => (1, 1),
            SpinLabel::Theta2 => (1, -1),
            SpinLabel::Theta3 => (-1, -1),
            SpinLabel::Theta4 => (-1, 1),
        }
    }

    fn theta_index(self) -> u8 {
        match self {
            SpinLabel::Theta1 => 1,
            SpinLabel::Theta2 => 2,
            SpinLabel::Theta3 | SpinLabel::Trivial => 3,
            SpinLabel::Theta4 => 4,
        }
    }
}

impl std::str::FromStr for SpinLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_lowercase()))
            .map_err(|_| Error::BadInput(format!("unknown spin structure '{s}'")))
    }
}

/// One basis vector of `H₊` or `H₋` at a fixed mode, as per-circle
/// coefficients, with the dual row extracting its coordinate.
#[derive(Clone, Debug)]
pub struct FrameVector {
    pub mode: f64,
    pub part: Part,
    pub vector: Vec<C64>,
    pub dual: Vec<C64>,
}

/// A spin structure on a model, restricted to those with invertible ∂̄.
#[derive(Clone, Debug)]
pub struct SpinStructureData {
    model: SurfaceModel,
    pub label: SpinLabel,
    pub eps1: i8,
    pub eps2: i8,
    /// Smallest singular value among the per-mode frames `|m| ≤ 64`.
    pub frame_sigma_min: f64,
}

impl SpinStructureData {
    pub fn new(model: &SurfaceModel, label: SpinLabel) -> Result<Self> {
        if model.is_disk() != (label == SpinLabel::Trivial) {
            return Err(Error::UnsupportedSpin(format!(
                "{label:?} is not a spin structure of this model"
            )));
        }
        let (eps1, eps2) = label.multipliers();
        let mut s = Self {
            model: model.clone(),
            label,
            eps1,
            eps2,
            frame_sigma_min: 1.0,
        };
        if let Some(e) = model.elliptic() {
            let mut smin = f64::INFINITY;
            for m in s.modes_up_to(64) {
                let v = s.unit_pair(e, m);
                let mat = CMatrix::from_fn(2, 2, |i, j| v[j][i]);
                smin = smin.min(*singular_values(&mat).last().unwrap());
            }
            s.frame_sigma_min = smin;
            if smin < SINGULAR_FRAME {
                return Err(Error::UnsupportedSpin(format!(
                    "{label:?}: ∂̄ is not invertible (boundary frame singular value {smin:.2e})"
                )));
            }
        }
        Ok(s)
    }

    pub fn model(&self) -> &SurfaceModel {
        &self.model
    }

    /// 0 for integer modes, ½ for half-integer modes.
    pub fn mode_offset(&self) -> f64 {
        if self.eps1 == 1 {
            0.0
        } else {
            0.5
        }
    }

    /// Modes with `|m| ≤ bound`, ascending.
    pub fn modes_up_to(&self, bound: usize) -> Vec<f64> {
        let off = self.mode_offset();
        let b = bound as i64;
        (-b - 1..=b)
            .map(|k| k as f64 + off)
            .filter(|m| m.abs() <= bound as f64)
            .collect()
    }

    /// Unit vectors spanning the `H₊` and `H₋` parts at mode `m`:
    /// directions `(1, qᵐ)` and `(ε₂q²ᵐ, qᵐ)`, normalized in log scale.
    fn unit_pair(&self, e: &EllipticModel, m: f64) -> [Vec<C64>; 2] {
        let lq = e.q.ln() * m;
        let unit = |sign: f64, x0: f64, x1: f64| {
            let top = x0.max(x1);
            let (a, b) = (sign * (x0 - top).exp(), (x1 - top).exp());
            let n = a.hypot(b);
            vec![C64::new(a / n, 0.0), C64::new(b / n, 0.0)]
        };
        [unit(1.0, 0.0, lq), unit(self.eps2 as f64, 2.0 * lq, lq)]
    }

    /// Frame vectors at mode `m`.
    pub fn frame(&self, m: f64) -> Vec<FrameVector> {
        match self.model.elliptic() {
            None => vec![FrameVector {
                mode: m,
                part: if m > 0.0 { Part::Plus } else { Part::Minus },
                vector: vec![C64::new(1.0, 0.0)],
                dual: vec![C64::new(1.0, 0.0)],
            }],
            Some(e) => {
                let [p, q] = self.unit_pair(e, m);
                let v = CMatrix::from_fn(2, 2, |i, j| if j == 0 { p[i] } else { q[i] });
                let inv = v.try_inverse().expect("frames are checked at construction");
                vec![
                    FrameVector {
                        mode: m,
                        part: Part::Plus,
                        vector: p,
                        dual: vec![inv[(0, 0)], inv[(0, 1)]],
                    },
                    FrameVector {
                        mode: m,
                        part: Part::Minus,
                        vector: q,
                        dual: vec![inv[(1, 0)], inv[(1, 1)]],
                    },
                ]
            }
        }
    }

    /// Basis of `H₊` or `H₋` in section order: by `|m|`, positive mode first.
    pub fn section_basis(&self, part: Part, size: usize) -> Vec<FrameVector> {
        let mut out = Vec::with_capacity(size);
        let off = self.mode_offset();
        let mut k = 0i64;
        while out.len() < size {
            let a = k as f64 + off;
            let candidates: Vec<f64> = if a == 0.0 { vec![0.0] } else { vec![a, -a] };
            for m in candidates {
                for f in self.frame(m) {
                    if f.part == part && out.len() < size {
                        out.push(f);
                    }
                }
            }
            k += 1;
        }
        out
    }

    /// Exact projection onto `H₊` along `H₋`, mode by mode.
    pub fn exact_projection(&self, psi: &SpinorField) -> SpinorField {
        let mut out = psi.zeros_like();
        for (i, &m) in psi.modes.iter().enumerate() {
            for f in self.frame(m).into_iter().filter(|f| f.part == Part::Plus) {
                let coord: C64 = (0..psi.circles())
                    .map(|c| f.dual[c] * psi.coeffs[c][i])
                    .sum();
                for c in 0..psi.circles() {
                    out.coeffs[c][i] += coord * f.vector[c];
                }
            }
        }
        out
    }

    /// Classical circle projection: circle 0 keeps `m > 0`, circle 1 keeps
    /// `m < 0`, mode 0 is halved.
    pub fn classical_projection(&self, psi: &SpinorField) -> SpinorField {
        let mut out = psi.clone();
        for (i, &m) in psi.modes.iter().enumerate() {
            for c in 0..psi.circles() {
                let keep = classical_weight(c, m);
                out.coeffs[c][i] *= keep;
            }
        }
        out
    }

    /// Szegő kernel `S(p, q)`, singular like `1/(q − p)` on the diagonal.
    pub fn szego_kernel(&self, p: C64, q: C64) -> C64 {
        match self.model.elliptic() {
            None => 1.0 / (q - p),
            Some(e) => self.theta_kernel(e, q - p),
        }
    }

    fn theta_kernel(&self, e: &EllipticModel, x: C64) -> C64 {
        let th = &e.weierstrass().theta;
        let k = self.label.theta_index();
        th.theta(k, x * PI) * e.weierstrass().theta1_prime0() * PI
            / (th.theta(k, C64::new(0.0, 0.0)) * th.theta1(x * PI))
    }

    /// Kernel minus its classical singular part, for real offsets in (−½, ½].
    fn regular_part(&self, e: &EllipticModel, s: f64) -> C64 {
        if s == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let x = PI * s;
        let singular = if self.eps1 == 1 { PI / x.tan() } else { PI / x.sin() };
        self.theta_kernel(e, C64::new(s, 0.0)) - singular
    }

    /// Projection onto boundary values of holomorphic spinors by Szegő-kernel
    /// quadrature. `samples[c][j]` is the value at `s = j/G` on circle `c`.
    pub fn spin_projection(&self, samples: &[Vec<C64>]) -> Result<Vec<Vec<C64>>> {
        let circles = self.model.circles();
        if samples.len() != circles {
            return Err(Error::WrongModel(format!(
                "spinor has {} components, model has {circles} circles",
                samples.len()
            )));
        }
        let g = samples[0].len();
        if g < 4 || samples.iter().any(|s| s.len() != g) {
            return Err(Error::BadInput("spinor sample counts must agree and be ≥ 4".into()));
        }
        let off = self.mode_offset();
        let field = SpinorField::from_grid(samples, off);
        let mut out = self.classical_projection(&field).to_grid(g);
        let Some(e) = self.model.elliptic() else {
            return Ok(out);
        };
        let eps1 = self.eps1 as f64;
        // Circulant kernels indexed by d = j − i, s = d/G wrapped into (−½, ½].
        let wrap = |d: i64| -> (f64, f64) {
            let s = d as f64 / g as f64;
            let r = s.round();
            (s - r, eps1.powi(r as i32))
        };
        let scale = 1.0 / (2.0 * PI * I * g as f64);
        let mut same = vec![C64::new(0.0, 0.0); 2 * g];
        let mut up = vec![C64::new(0.0, 0.0); 2 * g];
        let mut down = vec![C64::new(0.0, 0.0); 2 * g];
        let half = C64::new(0.0, e.t / 2.0);
        for d in -(g as i64) + 1..g as i64 {
            let (s, sign) = wrap(d);
            let idx = (d + g as i64) as usize;
            same[idx] = self.regular_part(e, s) * sign * scale;
            up[idx] = self.theta_kernel(e, C64::new(s, 0.0) + half) * sign * scale;
            down[idx] = self.theta_kernel(e, C64::new(s, 0.0) - half) * sign * scale;
        }
        for i in 0..g {
            let mut acc = [C64::new(0.0, 0.0); 2];
            for j in 0..g {
                let idx = j + g - i;
                // Target on C₀: own circle (+), C₁ source seen at +τ/2 with orientation −1.
                acc[0] += same[idx] * samples[0][j] - up[idx] * samples[1][j];
                // Target on C₁: own circle (−), C₀ source seen at −τ/2 with orientation +1.
                acc[1] += -same[idx] * samples[1][j] + down[idx] * samples[0][j];
            }
            out[0][i] += acc[0];
            out[1][i] += acc[1];
        }
        Ok(out)
    }
}

fn classical_weight(circle: usize, m: f64) -> f64 {
    if m == 0.0 {
        0.5
    } else if (circle == 0) == (m > 0.0) {
        1.0
    } else {
        0.0
    }
}

/// Boundary spinor as per-circle coefficients over an explicit mode list.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    pub modes: Vec<f64>,
    pub coeffs: Vec<Vec<C64>>,
}

impl SpinorField {
    pub fn circles(&self) -> usize {
        self.coeffs.len()
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            modes: self.modes.clone(),
            coeffs: vec![vec![C64::new(0.0, 0.0); self.modes.len()]; self.coeffs.len()],
        }
    }

    pub fn zeros(circles: usize, modes: Vec<f64>) -> Self {
        Self {
            coeffs: vec![vec![C64::new(0.0, 0.0); modes.len()]; circles],
            modes,
        }
    }

    /// Interpolate equispaced samples with modes `k + offset`,
    /// `k ∈ [−G/2, G/2)`.
    pub fn from_grid(samples: &[Vec<C64>], offset: f64) -> Self {
        let g = samples[0].len();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(g);
        let ks: Vec<i64> = (0..g as i64).map(|j| if j < g as i64 / 2 { j } else { j - g as i64 }).collect();
        let mut order: Vec<usize> = (0..g).collect();
        order.sort_by_key(|&j| ks[j]);
        let modes = order.iter().map(|&j| ks[j] as f64 + offset).collect();
        let coeffs = samples
            .iter()
            .map(|s| {
                let mut buf: Vec<C64> = s
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * C64::from_polar(1.0, -2.0 * PI * offset * j as f64 / g as f64))
                    .collect();
                fft.process(&mut buf);
                order.iter().map(|&j| buf[j] / g as f64).collect()
            })
            .collect();
        Self { modes, coeffs }
    }

    pub fn to_grid(&self, g: usize) -> Vec<Vec<C64>> {
        self.coeffs
            .iter()
            .map(|cs| {
                (0..g)
                    .map(|j| {
                        let s = j as f64 / g as f64;
                        self.modes
                            .iter()
                            .zip(cs)
                            .map(|(m, c)| c * C64::from_polar(1.0, 2.0 * PI * m * s))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn max_coefficient(&self) -> f64 {
        self.coeffs.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .zip(other.coeffs.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Geometric fit of `|(P − P_cl)|` entries against `|m| + |m'|`.
#[derive(Clone, Debug, Serialize)]
pub struct SmoothingReport {
    /// `(d, max entry)` for each distance.
    pub profile: Vec<(usize, f64)>,
    pub fitted_ratio: f64,
    /// Largest deviation of the quadrature projection from the exact one.
    pub quadrature_error: f64,
}

/// Matrix of `P − P_cl` in the Fourier basis (quadrature projection),
/// profiled by distance from the diagonal singular part.
pub fn smoothing_profile(spin: &SpinStructureData, grid: usize, max_mode: usize) -> Result<SmoothingReport> {
    let circles = spin.model().circles();
    let modes = spin.modes_up_to(max_mode);
    let mut profile = std::collections::BTreeMap::<usize, f64>::new();
    let mut quad_err: f64 = 0.0;
    for c in 0..circles {
        for &m in &modes {
            let mut e = SpinorField::zeros(circles, modes.clone());
            let idx = modes.iter().position(|x| *x == m).unwrap();
            e.coeffs[c][idx] = C64::new(1.0, 0.0);
            let projected = spin.spin_projection(&e.to_grid(grid))?;
            let field = SpinorField::from_grid(&projected, spin.mode_offset());
            let exact = spin.exact_projection(&e);
            let cl = spin.classical_projection(&e);
            for c2 in 0..circles {
                for (j, &m2) in field.modes.iter().enumerate() {
                    let pos = modes.iter().position(|x| *x == m2);
                    let ex = pos.map(|p| exact.coeffs[c2][p]).unwrap_or_default();
                    quad_err = quad_err.max((field.coeffs[c2][j] - ex).norm());
                    let clv = pos.map(|p| cl.coeffs[c2][p]).unwrap_or_default();
                    if pos.is_some() {
                        let d = (m.abs() + m2.abs()).round() as usize;
                        let entry = (field.coeffs[c2][j] - clv).norm();
                        let slot = profile.entry(d).or_insert(0.0);
                        *slot = slot.max(entry);
                    }
                }
            }
        }
    }
    let profile: Vec<(usize, f64)> = profile.into_iter().collect();
    let pts: Vec<(f64, f64)> = profile
        .iter()
        .filter(|(d, v)| *d >= 8 && *v > 1e-13)
        .map(|(d, v)| (*d as f64, v.ln()))
        .collect();
    let fitted_ratio = if pts.len() < 2 {
        0.0
    } else {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxy / sxx).exp()
    };
    Ok(SmoothingReport {
        profile,
        fitted_ratio,
        quadrature_error: quad_err,
    })
}

/// Multiplier from the Σ∪Σ*-meromorphic function algebra used in the
/// band-width check: `z^n` on the disk, the KN function `f_n` on the torus.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KnFunction {
    /// Integer on the disk, half-integer with `|n| ≥ 3/2` on the torus.
    pub index: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BandReport {
    pub band_width: usize,
    /// Offsets `k − m` carrying entries above threshold.
    pub offsets: Vec<f64>,
    pub max_in_band: f64,
    pub max_off_band: f64,
    pub fit_residual: f64,
}

/// Krichever–Novikov spinor basis of a torus spin structure.
pub struct KnBasis<'a> {
    spin: &'a SpinStructureData,
    e: &'a EllipticModel,
    c: f64,
    delta2: f64,
}

impl<'a> KnBasis<'a> {
    pub fn new(spin: &'a SpinStructureData) -> Result<Self> {
        let e = spin
            .model()
            .elliptic()
            .ok_or_else(|| Error::WrongModel("KN spinors are built on the torus".into()))?;
        Ok(Self {
            spin,
            e,
            c: if spin.eps1 == 1 { 0.0 } else { 0.5 },
            delta2: if spin.eps2 == 1 { 0.0 } else { 1.0 },
        })
    }

    fn th(&self, u: C64) -> C64 {
        self.e.weierstrass().theta.theta1(u * PI)
    }

    fn extra_zero(&self, m: f64) -> C64 {
        let e = self.e;
        C64::new(self.delta2 / 2.0, 0.0) - e.tau * self.c - e.basepoint * (m - 0.5)
            + e.reflected_basepoint * (m + 0.5)
    }

    /// Unnormalized spinor `φ_m`, `m ∈ Z + ½`, with order `m − ½` at `(0)`
    /// and `−m − ½` at `(∞)`.
    pub fn spinor(&self, m: f64, u: C64) -> C64 {
        let e = self.e;
        let a = (m - 0.5).round() as i32;
        let b = (-m - 0.5).round() as i32;
        (I * 2.0 * PI * self.c * u).exp()
            * self.th(u - e.basepoint).powi(a)
            * self.th(u - e.reflected_basepoint).powi(b)
            * self.th(u - self.extra_zero(m))
    }

    /// `f_n` with order `n − ½` at `(0)` and `−n − ½` at `(∞)`.
    pub fn function(&self, n: f64, u: C64) -> C64 {
        let e = self.e;
        let a = (n - 0.5).round() as i32;
        let b = (-n - 0.5).round() as i32;
        let r = e.reflected_basepoint * (n + 0.5) - e.basepoint * (n - 0.5);
        self.th(u - e.basepoint).powi(a) * self.th(u - e.reflected_basepoint).powi(b) * self.th(u - r)
    }

    fn check_generic(&self, m: f64) -> Result<()> {
        let q = self.extra_zero(m);
        let th = &self.e.weierstrass().theta;
        for p in [self.e.basepoint, self.e.reflected_basepoint] {
            if th.reduce(q - p).0.norm() < 1e-8 {
                return Err(Error::Conditioning(format!(
                    "KN spinor {m}: extra zero collides with a basepoint"
                )));
            }
        }
        let _ = self.spin;
        Ok(())
    }

    fn check_function(&self, n: f64) -> Result<()> {
        let e = self.e;
        let r = e.reflected_basepoint * (n + 0.5) - e.basepoint * (n - 0.5);
        let th = &e.weierstrass().theta;
        for p in [e.basepoint, e.reflected_basepoint] {
            if th.reduce(r - p).0.norm() < 1e-8 {
                return Err(Error::Conditioning(format!(
                    "KN function {n}: extra zero collides with a basepoint \
                     (P₋ − p₀ is a torsion point of low order)"
                )));
            }
        }
        Ok(())
    }
}

fn is_half_integer(x: f64) -> bool {
    ((x - 0.5).round() - (x - 0.5)).abs() < 1e-12
}

/// Band structure of the multiplication matrix of `f` in the KN-ordered basis.
pub fn kn_bandwidth_check(spin: &SpinStructureData, f: KnFunction) -> Result<BandReport> {
    const THRESH: f64 = 1e-8;
    let model = spin.model();
    if model.is_disk() {
        let n = f.index;
        if n.fract() != 0.0 {
            return Err(Error::BadInput("disk multipliers are integer powers of z".into()));
        }
        let trunc = 48;
        let zf = LaurentBoundaryFunction::monomial(1, trunc, n as i64, C64::new(1.0, 0.0));
        let basis = spin.section_basis(Part::Plus, 24);
        let (mut offsets, mut inb, mut offb) = (Vec::new(), 0.0f64, 0.0f64);
        let mut table = std::collections::BTreeMap::<i64, f64>::new();
        for s in &basis {
            for t in &basis {
                let v = zf.coefficient(0, (t.mode - s.mode).round() as i64).norm();
                let e = table.entry((t.mode - s.mode).round() as i64).or_insert(0.0);
                *e = e.max(v);
            }
        }
        let top = table.values().cloned().fold(0.0, f64::max);
        for (k, v) in table {
            if v > THRESH * top {
                offsets.push(k as f64);
                inb = inb.max(v);
            } else {
                offb = offb.max(v);
            }
        }
        return Ok(BandReport {
            band_width: offsets.len(),
            offsets,
            max_in_band: inb,
            max_off_band: offb,
            fit_residual: 0.0,
        });
    }
    let n = f.index;
    if !is_half_integer(n) || n.abs() < 1.5 {
        return Err(Error::BadInput(
            "torus KN functions are indexed by half-integers with |n| ≥ 3/2".into(),
        ));
    }
    let kn = KnBasis::new(spin)?;
    kn.check_function(n)?;
    let e = model.elliptic().unwrap();
    let g = 128;
    let pts: Vec<C64> = (0..2)
        .flat_map(|c| (0..g).map(move |j| (c, j as f64 / g as f64)))
        .map(|(c, x)| e.boundary_point(c, x))
        .collect();
    let sampled = |m: f64| -> (Vec<C64>, f64) {
        let v: Vec<C64> = pts.iter().map(|u| kn.spinor(m, *u)).collect();
        let norm = (v.iter().map(|z| z.norm_sqr()).sum::<f64>() / pts.len() as f64).sqrt();
        (v.into_iter().map(|z| z / norm).collect(), norm)
    };
    let window = 3i64;
    let mut table = std::collections::BTreeMap::<i64, f64>::new();
    let mut resid: f64 = 0.0;
    for k in -3..3 {
        let m = k as f64 + 0.5;
        kn.check_generic(m)?;
        let (phi, _) = sampled(m);
        let target: Vec<C64> = pts.iter().zip(&phi).map(|(u, p)| kn.function(n, *u) * p).collect();
        let centre = m + n;
        let cands: Vec<f64> = (-window..=window).map(|d| centre + d as f64 - 0.5).collect();
        let cols: Vec<Vec<C64>> = cands
            .iter()
            .map(|&kk| {
                kn.check_generic(kk).map(|_| sampled(kk).0)
            })
            .collect::<Result<_>>()?;
        let a = CMatrix::from_fn(pts.len(), cols.len(), |i, j| cols[j][i]);
        let b = CVector::from_vec(target.clone());
        let tnorm = b.norm();
        let sol = lstsq_svd(&a, &b)?;
        if sol.sigma_min < 1e-10 * sol.sigma_max {
            return Err(Error::Conditioning(format!(
                "KN window around {centre} is numerically dependent"
            )));
        }
        resid = resid.max(sol.residual / tnorm);
        for (j, &kk) in cands.iter().enumerate() {
            let off = ((kk - m) * 2.0).round() as i64;
            let entry = table.entry(off).or_insert(0.0);
            *entry = entry.max(sol.x[j].norm());
        }
    }
    let top = table.values().cloned().fold(0.0, f64::max);
    let (mut offsets, mut inb, mut offb) = (Vec::new(), 0.0f64, 0.0f64);
    for (k, v) in table {
        if v > THRESH * top {
            offsets.push(k as f64 / 2.0);
            inb = inb.max(v);
        } else {
            offb = offb.max(v);
        }
    }
    Ok(BandReport {
        band_width: offsets.len(),
        offsets,
        max_in_band: inb,
        max_off_band: offb / top,
        fit_residual: resid,
    })
}

//! SU(2) loops, root subgroup products and the triangular factorization
//! solver for loops of the forms
//!
//! ```text
//! k₁ = ( a  b ; −b*  a* ),      k₂ = ( d*  −c* ; c  d ).
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{pointwise, LaurentBoundaryFunction, C64};
use crate::linalg::{lstsq_normal, lstsq_qr, lstsq_svd, CMatrix, CVector};
use crate::surface::{EquivariantMap, ModelDescriptor, SurfaceModel};

/// Threshold on `|c|² + |d|²` over Σ below which the pair is treated as
/// vanishing simultaneously.
pub const VANISHING_THRESHOLD: f64 = 1e-6;
/// Smallest accepted singular value of the T-system.
pub const UNIQUENESS_THRESHOLD: f64 = 1e-6;
const FORM_TOL: f64 = 1e-8;

/// `(1 + |η|²)^{−1/2}`, the scalar making each elementary factor special unitary.
pub fn a_factor(eta: C64) -> f64 {
    (1.0 + eta.norm_sqr()).sqrt().recip()
}

type Entries = [[LaurentBoundaryFunction; 2]; 2];

/// A 2×2 matrix of boundary functions on a model, intended to be SU(2)
/// valued on the sample grid.
#[derive(Clone, Debug)]
pub struct SU2Loop {
    model: SurfaceModel,
    pub entries: Entries,
}

/// On-disk form of a loop.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoopFile {
    pub model: ModelDescriptor,
    pub entries: [[LaurentBoundaryFunction; 2]; 2],
}

impl SU2Loop {
    pub fn new(model: &SurfaceModel, entries: Entries) -> Result<Self> {
        let (c, n) = (entries[0][0].circles(), entries[0][0].truncation());
        if c != model.circles() {
            return Err(Error::WrongModel(format!(
                "loop has {c} circles, model has {}",
                model.circles()
            )));
        }
        if entries.iter().flatten().any(|e| e.circles() != c || e.truncation() != n) {
            return Err(Error::BadInput("loop entries must share circles and truncation".into()));
        }
        Ok(Self {
            model: model.clone(),
            entries,
        })
    }

    pub fn identity(model: &SurfaceModel, truncation: usize) -> Self {
        let c = model.circles();
        let one = LaurentBoundaryFunction::constant(c, truncation, C64::new(1.0, 0.0));
        let zero = LaurentBoundaryFunction::zeros(c, truncation);
        Self {
            model: model.clone(),
            entries: [[one.clone(), zero.clone()], [zero, one]],
        }
    }

    /// Constant matrix.
    pub fn constant(model: &SurfaceModel, truncation: usize, m: [[C64; 2]; 2]) -> Self {
        let c = model.circles();
        let f = |z| LaurentBoundaryFunction::constant(c, truncation, z);
        Self {
            model: model.clone(),
            entries: [[f(m[0][0]), f(m[0][1])], [f(m[1][0]), f(m[1][1])]],
        }
    }

    pub fn diagonal(model: &SurfaceModel, f: &LaurentBoundaryFunction, g: &LaurentBoundaryFunction) -> Self {
        let zero = LaurentBoundaryFunction::zeros(f.circles(), f.truncation());
        Self {
            model: model.clone(),
            entries: [[f.clone(), zero.clone()], [zero, g.clone()]],
        }
    }

    pub fn model(&self) -> &SurfaceModel {
        &self.model
    }

    pub fn truncation(&self) -> usize {
        self.entries[0][0].truncation()
    }

    pub fn entry(&self, i: usize, j: usize) -> &LaurentBoundaryFunction {
        &self.entries[i][j]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let e = |i: usize, j: usize| {
            self.entries[i][0]
                .mul(&other.entries[0][j])
                .add(&self.entries[i][1].mul(&other.entries[1][j]))
        };
        Self {
            model: self.model.clone(),
            entries: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]],
        }
    }

    /// `k*(q) = k(R(q))*`; on S the pointwise Hermitian adjoint.
    pub fn star(&self) -> Self {
        let s = |i: usize, j: usize| self.entries[j][i].star();
        Self {
            model: self.model.clone(),
            entries: [[s(0, 0), s(0, 1)], [s(1, 0), s(1, 1)]],
        }
    }

    pub fn with_truncation(&self, n: usize) -> Self {
        let t = |i: usize, j: usize| self.entries[i][j].with_truncation(n);
        Self {
            model: self.model.clone(),
            entries: [[t(0, 0), t(0, 1)], [t(1, 0), t(1, 1)]],
        }
    }

    /// `max ‖k kᴴ − I‖` over the grid, entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let e = self.entries.iter().flatten().collect::<Vec<_>>();
        let d = pointwise(&e, |v| {
            let (a, b, c, d) = (v[0], v[1], v[2], v[3]);
            let m00 = a.norm_sqr() + b.norm_sqr() - 1.0;
            let m11 = c.norm_sqr() + d.norm_sqr() - 1.0;
            let m01 = a * c.conj() + b * d.conj();
            C64::new(m00.abs().max(m11.abs()).max(m01.norm()), 0.0)
        });
        d.samples().iter().flatten().map(|z| z.re).fold(0.0, f64::max)
    }

    /// `max |det k − 1|` over the grid.
    pub fn det_defect(&self) -> f64 {
        let e = self.entries.iter().flatten().collect::<Vec<_>>();
        let d = pointwise(&e, |v| v[0] * v[3] - v[1] * v[2] - 1.0);
        d.samples().iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }

    pub fn to_file(&self) -> LoopFile {
        LoopFile {
            model: self.model.descriptor(),
            entries: self.entries.clone(),
        }
    }

    pub fn from_file(file: &LoopFile) -> Result<Self> {
        Self::new(&file.model.build()?, file.entries.clone())
    }

    /// Check the k1 pattern: `a`, `b` Σ-holomorphic, `k₂₁ = −b*`,
    /// `k₂₂ = a*`, `a((0)) > 0`.
    pub fn check_k1_form(&self) -> Result<()> {
        let [[a, b], [c, d]] = &self.entries;
        self.check_pattern(("a", a), ("b", b), c.add(&b.star()), d.sub(&a.star()))?;
        let a0 = self.model.value_at_basepoint(a);
        if a0.re <= 0.0 || a0.im.abs() > FORM_TOL {
            return Err(Error::Domain(format!("a((0)) = {a0} is not positive")));
        }
        Ok(())
    }

    /// Check the k2 pattern: `c`, `d` Σ-holomorphic, `c((0)) = 0`,
    /// `d((0)) > 0`.
    pub fn check_k2_form(&self) -> Result<()> {
        let [[a, b], [c, d]] = &self.entries;
        self.check_pattern(("c", c), ("d", d), a.sub(&d.star()), b.add(&c.star()))?;
        let c0 = self.model.value_at_basepoint(c);
        let d0 = self.model.value_at_basepoint(d);
        if c0.norm() > FORM_TOL {
            return Err(Error::Domain(format!("c((0)) = {c0} is not zero")));
        }
        if d0.re <= 0.0 || d0.im.abs() > FORM_TOL {
            return Err(Error::Domain(format!("d((0)) = {d0} is not positive")));
        }
        Ok(())
    }

    fn check_pattern(
        &self,
        p: (&str, &LaurentBoundaryFunction),
        q: (&str, &LaurentBoundaryFunction),
        r1: LaurentBoundaryFunction,
        r2: LaurentBoundaryFunction,
    ) -> Result<()> {
        let off = r1.max_coefficient().max(r2.max_coefficient());
        if off > FORM_TOL {
            return Err(Error::Domain(format!("entries violate the reflection pattern by {off:.2e}")));
        }
        for (name, f) in [p, q] {
            let leak = holomorphic_defect(&self.model, f)?;
            if leak > FORM_TOL {
                return Err(Error::Domain(format!(
                    "{name} is not Σ-holomorphic (anti-holomorphic part {leak:.2e})"
                )));
            }
        }
        Ok(())
    }
}

/// Size of the part of `f` outside `H₊ + C`.
pub fn holomorphic_defect(model: &SurfaceModel, f: &LaurentBoundaryFunction) -> Result<f64> {
    let d = model.decompose(f)?;
    let zc = d.zero_coords.iter().skip(1).map(|z| z.norm()).fold(0.0, f64::max);
    Ok(d.minus.max_coefficient().max(zc))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    /// Factors `(1, −η̄ₙ𝔷ⁿ; ηₙ𝔷⁻ⁿ, 1)`, `n ≥ 0`.
    Eta,
    /// Factors `(1, ζₙ𝔷⁻ⁿ; −ζ̄ₙ𝔷ⁿ, 1)`, `n ≥ 1`.
    Zeta,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootSubgroupSequence {
    pub kind: SequenceKind,
    /// `coefficients[j]` is `η_j` for `Eta` and `ζ_{j+1}` for `Zeta`.
    pub coefficients: Vec<C64>,
}

impl RootSubgroupSequence {
    pub fn eta(coefficients: Vec<C64>) -> Self {
        Self {
            kind: SequenceKind::Eta,
            coefficients,
        }
    }

    pub fn zeta(coefficients: Vec<C64>) -> Self {
        Self {
            kind: SequenceKind::Zeta,
            coefficients,
        }
    }

    /// Exponent of `𝔷` carried by `coefficients[j]`.
    pub fn power(&self, j: usize) -> i64 {
        match self.kind {
            SequenceKind::Eta => j as i64,
            SequenceKind::Zeta => j as i64 + 1,
        }
    }

    /// Geometric decay rate of `|coefficients|`, 1 when there are fewer
    /// than two nonzero terms.
    pub fn decay_rate(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(j, c)| (j as f64, c.norm().ln()))
            .collect();
        if pts.len() < 2 {
            return 1.0;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxy / sxx).exp().min(1.0)
    }

    pub fn truncate(&self, len: usize) -> Self {
        Self {
            kind: self.kind,
            coefficients: self.coefficients.iter().take(len).cloned().collect(),
        }
    }
}

fn build_product(
    model: &SurfaceModel,
    map: &EquivariantMap,
    seq: &RootSubgroupSequence,
    expected: SequenceKind,
    truncation: usize,
) -> Result<SU2Loop> {
    if seq.kind != expected {
        return Err(Error::BadInput(format!("expected a {expected:?} sequence, got {:?}", seq.kind)));
    }
    if let Some(bad) = seq.coefficients.iter().find(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::BadInput(format!("non-finite coefficient {bad}")));
    }
    let top = (0..seq.coefficients.len()).map(|j| seq.power(j)).max().unwrap_or(0);
    let needed = top as usize * map.degree as usize;
    if needed > truncation {
        return Err(Error::Resize(format!(
            "𝔷^{top} needs {needed} modes, truncation is {truncation}"
        )));
    }
    let mut k = SU2Loop::identity(model, truncation);
    for (j, &c) in seq.coefficients.iter().enumerate() {
        let n = seq.power(j);
        let a = a_factor(c);
        let zp = map.boundary_power(truncation, n).scale(C64::new(a, 0.0));
        let zm = map.boundary_power(truncation, -n).scale(C64::new(a, 0.0));
        let one = LaurentBoundaryFunction::constant(model.circles(), truncation, C64::new(a, 0.0));
        let factor = match expected {
            SequenceKind::Eta => [[one.clone(), zp.scale(-c.conj())], [zm.scale(c), one]],
            SequenceKind::Zeta => [[one.clone(), zm.scale(c)], [zp.scale(-c.conj()), one]],
        };
        let f = SU2Loop {
            model: model.clone(),
            entries: factor,
        };
        // Later factors multiply on the left.
        k = f.mul(&k);
    }
    Ok(k)
}

/// `k₁ = ∏ 𝐚(ηₙ)(1, −η̄ₙ𝔷ⁿ; ηₙ𝔷⁻ⁿ, 1)`, largest `n` leftmost.
pub fn build_k1(
    model: &SurfaceModel,
    map: &EquivariantMap,
    seq: &RootSubgroupSequence,
    truncation: usize,
) -> Result<SU2Loop> {
    build_product(model, map, seq, SequenceKind::Eta, truncation)
}

/// `k₂ = ∏ 𝐚(ζₙ)(1, ζₙ𝔷⁻ⁿ; −ζ̄ₙ𝔷ⁿ, 1)`, `n ≥ 1`, largest `n` leftmost.
pub fn build_k2(
    model: &SurfaceModel,
    map: &EquivariantMap,
    seq: &RootSubgroupSequence,
    truncation: usize,
) -> Result<SU2Loop> {
    build_product(model, map, seq, SequenceKind::Zeta, truncation)
}

/// Rescale `k₁` by a constant diagonal phase so that `a((0)) > 0`.
/// Returns the normalized loop and the phase `θ` removed from `a`.
pub fn normalize_k1_phase(k1: &SU2Loop) -> (SU2Loop, f64) {
    let a0 = k1.model.value_at_basepoint(&k1.entries[0][0]);
    let theta = a0.arg();
    if theta == 0.0 {
        return (k1.clone(), 0.0);
    }
    let ph = C64::from_polar(1.0, -theta);
    let [[a, b], [c, d]] = &k1.entries;
    let out = SU2Loop {
        model: k1.model.clone(),
        entries: [
            [a.scale(ph), b.scale(ph.conj())],
            [c.scale(ph), d.scale(ph.conj())],
        ],
    };
    (out, theta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorKind {
    /// `(1, 0; y*+y₀, 1) diag(a₁, a₁⁻¹) H`.
    Lower,
    /// `(1, x*+x₀; 0, 1) diag(a₂, a₂⁻¹) H`.
    Upper,
}

/// Least-squares path for the T-system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverPath {
    Svd,
    Qr,
    Normal,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverDiagnostics {
    pub residual: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub basis_size: usize,
    /// Smallest `|p|² + |q|²` over the Σ mesh.
    pub min_modulus_sq: f64,
    pub path: SolverPath,
}

#[derive(Clone, Debug, Serialize)]
pub struct TriangularFactorization {
    pub kind: FactorKind,
    /// `x* + x₀` or `y* + y₀`.
    pub off_diagonal: LaurentBoundaryFunction,
    /// The `H₋` part `x*` (or `y*`, which may include a constant).
    pub star_part: LaurentBoundaryFunction,
    /// The zero-mode part `x₀` (or `y₀`).
    pub zero_part: LaurentBoundaryFunction,
    /// Coordinate of the zero-mode part on `du/dk` (empty on the disk).
    pub zero_coords: Vec<C64>,
    /// `a₁` or `a₂`.
    pub diagonal: f64,
    /// `(α, β; γ, δ)`.
    pub holomorphic: [[LaurentBoundaryFunction; 2]; 2],
    pub diagnostics: SolverDiagnostics,
}

impl TriangularFactorization {
    pub fn trivial(model: &SurfaceModel, truncation: usize, kind: FactorKind) -> Self {
        let id = SU2Loop::identity(model, truncation);
        let zero = LaurentBoundaryFunction::zeros(model.circles(), truncation);
        Self {
            kind,
            off_diagonal: zero.clone(),
            star_part: zero.clone(),
            zero_part: zero,
            zero_coords: Vec::new(),
            diagonal: 1.0,
            holomorphic: id.entries,
            diagnostics: SolverDiagnostics {
                residual: 0.0,
                sigma_min: 1.0,
                sigma_max: 1.0,
                basis_size: 0,
                min_modulus_sq: 1.0,
                path: SolverPath::Svd,
            },
        }
    }

    /// Product of the three factors.
    pub fn assemble(&self, model: &SurfaceModel) -> SU2Loop {
        let n = self.off_diagonal.truncation();
        let c = model.circles();
        let one = LaurentBoundaryFunction::constant(c, n, C64::new(1.0, 0.0));
        let zero = LaurentBoundaryFunction::zeros(c, n);
        let unip = match self.kind {
            FactorKind::Lower => [[one.clone(), zero.clone()], [self.off_diagonal.clone(), one.clone()]],
            FactorKind::Upper => [[one.clone(), self.off_diagonal.clone()], [zero.clone(), one.clone()]],
        };
        let a = self.diagonal;
        let diag = SU2Loop::constant(
            model,
            n,
            [[C64::new(a, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0 / a, 0.0)]],
        );
        let u = SU2Loop {
            model: model.clone(),
            entries: unip,
        };
        let h = SU2Loop {
            model: model.clone(),
            entries: self.holomorphic.clone(),
        };
        u.mul(&diag).mul(&h)
    }

    /// `max |αδ − βγ − 1|` on the grid.
    pub fn holomorphic_det_defect(&self) -> f64 {
        let e = self.holomorphic.iter().flatten().collect::<Vec<_>>();
        let d = pointwise(&e, |v| v[0] * v[3] - v[1] * v[2] - 1.0);
        d.samples().iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `(α, β, γ, δ)` at `(0)`.
    pub fn holomorphic_at_basepoint(&self, model: &SurfaceModel) -> [C64; 4] {
        let [[a, b], [c, d]] = &self.holomorphic;
        [a, b, c, d].map(|f| model.value_at_basepoint(f))
    }
}

/// `H₋` plus zero modes, as explicit columns. The constant is included
/// only when `with_constant` is set; other zero modes vanish at `(0)`.
struct MinusSpace {
    basis: Vec<LaurentBoundaryFunction>,
    /// Index of the first column that is a nonconstant zero mode.
    zero_start: usize,
}

fn minus_space(model: &SurfaceModel, truncation: usize, basis_size: usize, with_constant: bool) -> MinusSpace {
    let modes: Vec<i64> = if model.is_disk() {
        (1..=basis_size as i64).collect()
    } else {
        (1..=basis_size as i64).flat_map(|k| [k, -k]).collect()
    };
    let mut basis: Vec<LaurentBoundaryFunction> = modes
        .iter()
        .map(|&k| model.plus_basis_function(truncation, k).star())
        .collect();
    let zero = model.zero_modes(truncation).modes;
    if with_constant {
        basis.push(zero[0].clone());
    }
    let zero_start = basis.len();
    basis.extend(zero.into_iter().skip(1));
    MinusSpace { basis, zero_start }
}

/// Part of `f` in `H₋ + H₀`, dropping the constant unless `keep_constant`.
fn project_minus(
    model: &SurfaceModel,
    f: &LaurentBoundaryFunction,
    keep_constant: bool,
) -> Result<LaurentBoundaryFunction> {
    let d = model.decompose(f)?;
    let mut out = d.minus;
    let modes = model.zero_modes(f.truncation()).modes;
    let skip = if keep_constant { 0 } else { 1 };
    for (c, m) in d.zero_coords.iter().zip(&modes).skip(skip) {
        out = out.add(&m.scale(*c));
    }
    Ok(out)
}

fn flat(f: &LaurentBoundaryFunction) -> Vec<C64> {
    f.components().iter().flatten().cloned().collect()
}

/// Smallest `|p|² + |q|²` over a mesh of Σ.
pub fn min_modulus_sq(model: &SurfaceModel, p: &LaurentBoundaryFunction, q: &LaurentBoundaryFunction) -> f64 {
    model
        .interior_mesh()
        .into_iter()
        .map(|pt| model.eval_holomorphic(p, pt).norm_sqr() + model.eval_holomorphic(q, pt).norm_sqr())
        .fold(f64::INFINITY, f64::min)
}

struct TSolution {
    x: LaurentBoundaryFunction,
    star_part: LaurentBoundaryFunction,
    zero_part: LaurentBoundaryFunction,
    zero_coords: Vec<C64>,
    residual: f64,
    sigma_min: f64,
    sigma_max: f64,
    basis_size: usize,
}

/// Solve `(pX)₋ = (r₁)₋`, `(qX)₋ = (r₂)₋` for `X` in `𝓗₋`.
///
/// With `lower` set, `X` may also carry a constant and the first equation
/// is projected onto `H₋ + H₀` including constants, which pins the first
/// remainder to vanish at `(0)`.
fn solve_t_system(
    model: &SurfaceModel,
    p: &LaurentBoundaryFunction,
    q: &LaurentBoundaryFunction,
    r1: &LaurentBoundaryFunction,
    r2: &LaurentBoundaryFunction,
    lower: bool,
    path: SolverPath,
) -> Result<TSolution> {
    let n = p.truncation();
    let m = n;
    let space = minus_space(model, n, m, lower);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(space.basis.len());
    for e in &space.basis {
        let mut col = flat(&project_minus(model, &p.mul(e), lower)?);
        col.extend(flat(&project_minus(model, &q.mul(e), false)?));
        cols.push(col);
    }
    let mut rhs = flat(&project_minus(model, r1, lower)?);
    rhs.extend(flat(&project_minus(model, r2, false)?));
    let a = CMatrix::from_fn(rhs.len(), cols.len(), |i, j| cols[j][i]);
    let b = CVector::from_vec(rhs);
    let svd = lstsq_svd(&a, &b)?;
    let x = match path {
        SolverPath::Svd => svd.x.clone(),
        SolverPath::Qr => lstsq_qr(&a, &b)?,
        SolverPath::Normal => lstsq_normal(&a, &b)?,
    };
    let residual = (&a * &x - &b).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let zero = LaurentBoundaryFunction::zeros(model.circles(), n);
    let (mut star_part, mut zero_part) = (zero.clone(), zero);
    for (j, e) in space.basis.iter().enumerate() {
        if j < space.zero_start {
            star_part = star_part.add(&e.scale(x[j]));
        } else {
            zero_part = zero_part.add(&e.scale(x[j]));
        }
    }
    Ok(TSolution {
        x: star_part.add(&zero_part),
        star_part,
        zero_part,
        zero_coords: x.iter().skip(space.zero_start).cloned().collect(),
        residual,
        sigma_min: svd.sigma_min,
        sigma_max: svd.sigma_max,
        basis_size: m,
    })
}

fn accept(sol: &TSolution, scale: f64) -> Result<()> {
    if sol.sigma_min < UNIQUENESS_THRESHOLD {
        return Err(Error::Conditioning(format!(
            "T-system smallest singular value {:.3e} below {UNIQUENESS_THRESHOLD:.0e}",
            sol.sigma_min
        )));
    }
    if sol.residual > 1e-8 * scale.max(1.0) {
        return Err(Error::NonConvergence {
            what: "T-system".into(),
            residual: sol.residual,
            trace: vec![(sol.basis_size, sol.residual)],
        });
    }
    Ok(())
}

pub fn factor_k2(model: &SurfaceModel, k2: &SU2Loop) -> Result<TriangularFactorization> {
    factor_k2_with(model, k2, SolverPath::Svd)
}

/// Factor a loop of the k2 form as `(1, x*+x₀; 0, 1) diag(a₂, a₂⁻¹) H₂`.
pub fn factor_k2_with(model: &SurfaceModel, k2: &SU2Loop, path: SolverPath) -> Result<TriangularFactorization> {
    k2.check_k2_form()?;
    let [[_, _], [c, d]] = &k2.entries;
    let mm = min_modulus_sq(model, c, d);
    if mm < VANISHING_THRESHOLD {
        return Err(Error::NotFactorable(format!(
            "c and d vanish simultaneously in Σ (min |c|²+|d|² = {mm:.2e}); \
             this needs the generalized factorization with common zeros"
        )));
    }
    let a2 = 1.0 / model.value_at_basepoint(d).re;
    let (cs, ds) = (c.star(), d.star());
    let sol = solve_t_system(model, c, d, &ds, &cs.scale(C64::new(-1.0, 0.0)), false, path)?;
    accept(&sol, 1.0)?;
    let inv = C64::new(1.0 / a2, 0.0);
    let alpha = ds.sub(&sol.x.mul(c)).scale(inv);
    let beta = cs.scale(C64::new(-1.0, 0.0)).sub(&sol.x.mul(d)).scale(inv);
    let s = C64::new(a2, 0.0);
    Ok(TriangularFactorization {
        kind: FactorKind::Upper,
        off_diagonal: sol.x,
        star_part: sol.star_part,
        zero_part: sol.zero_part,
        zero_coords: sol.zero_coords,
        diagonal: a2,
        holomorphic: [[alpha, beta], [c.scale(s), d.scale(s)]],
        diagnostics: SolverDiagnostics {
            residual: sol.residual,
            sigma_min: sol.sigma_min,
            sigma_max: sol.sigma_max,
            basis_size: sol.basis_size,
            min_modulus_sq: mm,
            path,
        },
    })
}

pub fn factor_k1(model: &SurfaceModel, k1: &SU2Loop) -> Result<TriangularFactorization> {
    factor_k1_with(model, k1, SolverPath::Svd)
}

/// Factor a loop of the k1 form as `(1, 0; y*+y₀, 1) diag(a₁, a₁⁻¹) H₁`.
/// The first row gives `(a, b) = a₁(α₁, β₁)`, so `a₁ = a((0))`.
pub fn factor_k1_with(model: &SurfaceModel, k1: &SU2Loop, path: SolverPath) -> Result<TriangularFactorization> {
    k1.check_k1_form()?;
    let [[a, b], [_, _]] = &k1.entries;
    let mm = min_modulus_sq(model, a, b);
    if mm < VANISHING_THRESHOLD {
        return Err(Error::NotFactorable(format!(
            "a and b vanish simultaneously in Σ (min |a|²+|b|² = {mm:.2e}); \
             this needs the generalized factorization with common zeros"
        )));
    }
    let a1 = model.value_at_basepoint(a).re;
    let (as_, bs) = (a.star(), b.star());
    let sol = solve_t_system(model, a, b, &bs.scale(C64::new(-1.0, 0.0)), &as_, true, path)?;
    accept(&sol, 1.0)?;
    let s = C64::new(a1, 0.0);
    let gamma = bs.scale(C64::new(-1.0, 0.0)).sub(&sol.x.mul(a)).scale(s);
    let delta = as_.sub(&sol.x.mul(b)).scale(s);
    let inv = C64::new(1.0 / a1, 0.0);
    Ok(TriangularFactorization {
        kind: FactorKind::Lower,
        off_diagonal: sol.x,
        star_part: sol.star_part,
        zero_part: sol.zero_part,
        zero_coords: sol.zero_coords,
        diagonal: a1,
        holomorphic: [[a.scale(inv), b.scale(inv)], [gamma, delta]],
        diagnostics: SolverDiagnostics {
            residual: sol.residual,
            sigma_min: sol.sigma_min,
            sigma_max: sol.sigma_max,
            basis_size: sol.basis_size,
            min_modulus_sq: mm,
            path,
        },
    })
}

/// `g = k₁* diag(e^χ, e^{−χ}) k₂` for purely imaginary `χ`.
pub fn assemble_g(k1: &SU2Loop, chi: &LaurentBoundaryFunction, k2: &SU2Loop) -> Result<SU2Loop> {
    let re = chi.samples().iter().flatten().map(|z| z.re.abs()).fold(0.0, f64::max);
    if re > 1e-10 {
        return Err(Error::Domain(format!("χ has real part {re:.2e} on S")));
    }
    let model = k1.model();
    let d = SU2Loop::diagonal(model, &chi.exp(), &chi.scale(C64::new(-1.0, 0.0)).exp());
    Ok(k1.star().mul(&d).mul(k2))
}

/// Upper triangular transition function obtained from the middle three
/// factors of the seven-factor form of `g`.
#[derive(Clone, Debug)]
pub struct DerivedTransition {
    /// `(a e^{χ₀}, B; 0, (a e^{χ₀})⁻¹)`.
    pub transition: SU2Loop,
    pub a: f64,
    pub off_diagonal: LaurentBoundaryFunction,
    /// The seven factors, left to right.
    pub chain: Vec<SU2Loop>,
}

impl DerivedTransition {
    pub fn chain_product(&self) -> SU2Loop {
        let mut it = self.chain.iter();
        let first = it.next().expect("chain is nonempty").clone();
        it.fold(first, |acc, f| acc.mul(f))
    }
}

pub fn derived_transition(
    model: &SurfaceModel,
    f1: &TriangularFactorization,
    f2: &TriangularFactorization,
    chi: &LaurentBoundaryFunction,
) -> Result<DerivedTransition> {
    if f1.kind != FactorKind::Lower || f2.kind != FactorKind::Upper {
        return Err(Error::BadInput("expected a lower (k₁) and an upper (k₂) factorization".into()));
    }
    let d = model.decompose(chi)?;
    let n = chi.truncation();
    let c = model.circles();
    let (a1, a2) = (f1.diagonal, f2.diagonal);
    let a = a1 * a2;
    // Y = a₁²(y + y₀*) = a₁² (y* + y₀)*,  X* = a₂⁻²(x* + x₀).
    let y = f1.off_diagonal.star().scale(C64::new(a1 * a1, 0.0));
    let xs = f2.off_diagonal.scale(C64::new(1.0 / (a2 * a2), 0.0));
    let e = |f: &LaurentBoundaryFunction, s: f64| f.scale(C64::new(s, 0.0)).exp();
    let one = LaurentBoundaryFunction::constant(c, n, C64::new(1.0, 0.0));
    let zero = LaurentBoundaryFunction::zeros(c, n);
    let upper = |f: LaurentBoundaryFunction| SU2Loop {
        model: model.clone(),
        entries: [[one.clone(), f], [zero.clone(), one.clone()]],
    };
    let diag = |f: LaurentBoundaryFunction| {
        let inv = f.recip();
        SU2Loop::diagonal(model, &f, &inv)
    };
    let h1 = SU2Loop {
        model: model.clone(),
        entries: f1.holomorphic.clone(),
    };
    let h2 = SU2Loop {
        model: model.clone(),
        entries: f2.holomorphic.clone(),
    };
    let chi0 = &d.zero;
    let b = e(&d.minus.scale(C64::new(2.0, 0.0)).add(chi0), -1.0)
        .mul(&y)
        .scale(C64::new(1.0 / a, 0.0))
        .add(&e(&d.plus.scale(C64::new(2.0, 0.0)).add(chi0), 1.0).mul(&xs).scale(C64::new(a, 0.0)));
    let ae0 = e(chi0, 1.0).scale(C64::new(a, 0.0));
    let transition = SU2Loop {
        model: model.clone(),
        entries: [[ae0.clone(), b.clone()], [zero.clone(), ae0.recip()]],
    };
    let chain = vec![
        h1.star(),
        diag(e(&d.minus, 1.0)),
        upper(e(&d.minus, -2.0).mul(&y)),
        diag(ae0),
        upper(e(&d.plus, 2.0).mul(&xs)),
        diag(e(&d.plus, 1.0)),
        h2,
    ];
    Ok(DerivedTransition {
        transition,
        a,
        off_diagonal: b,
        chain,
    })
}

//! Transition-function bookkeeping: degrees, Birkhoff partial indices on the
//! sphere, hyperfunction pairs and the abelian straight-line criterion.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{LaurentBoundaryFunction, C64};
use crate::linalg::{singular_values, CMatrix};
use crate::loops::SU2Loop;
use crate::surface::SurfaceModel;
use crate::toeplitz::MatrixSymbol;

/// Relative singular-value threshold for numerical rank.
pub const RANK_TOL: f64 = 1e-8;
pub const DEFAULT_K_RANGE: i64 = 4;
/// Collar offset, as a radius offset on the disk and a fraction of the strip height on the torus.
pub const COLLAR: f64 = 1.0 / 16.0;
const MIN_MODULUS: f64 = 1e-8;
const STRAIGHT_TOL: f64 = 1e-8;
const TEST_MODES: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeReport {
    /// Winding per boundary circle, counted along the boundary orientation.
    pub windings: Vec<i64>,
    pub transition_degree: i64,
    /// Degree of the line bundle, the negative of the transition degree.
    pub bundle_degree: i64,
}

fn winding(samples: &[C64]) -> f64 {
    let n = samples.len();
    (0..n)
        .map(|j| (samples[(j + 1) % n] / samples[j]).arg())
        .sum::<f64>()
        / (2.0 * PI)
}

/// Degree of a scalar transition function nonvanishing on the boundary.
pub fn degree(model: &SurfaceModel, f: &LaurentBoundaryFunction) -> Result<DegreeReport> {
    if f.circles() != model.circles() {
        return Err(Error::WrongModel(format!(
            "function has {} circles, model has {}",
            f.circles(),
            model.circles()
        )));
    }
    let g = (16 * f.truncation()).max(256);
    let samples = f.samples_on(g);
    let top = samples.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let low = samples.iter().flatten().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if !(top > 0.0) || low < MIN_MODULUS * top {
        return Err(Error::Domain(format!(
            "winding undefined: |f| drops to {low:.2e} on the boundary"
        )));
    }
    let mut windings = Vec::new();
    for (circle, s) in samples.iter().enumerate() {
        let w = winding(s);
        let k = w.round();
        if (w - k).abs() > 1e-6 {
            return Err(Error::Domain(format!("winding {w} on circle {circle} is not resolved")));
        }
        let orient = if model.is_disk() || circle == 0 { 1 } else { -1 };
        windings.push(orient * k as i64);
    }
    let transition_degree = windings.iter().sum();
    Ok(DegreeReport {
        windings,
        transition_degree,
        bundle_degree: -transition_degree,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartialIndices {
    /// Nonincreasing.
    pub indices: Vec<i64>,
    pub sum: i64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RankTraceEntry {
    pub shift: i64,
    pub kernel_dim: usize,
    /// Largest singular value counted as zero, relative (0 when none).
    pub largest_dropped: f64,
    /// Smallest singular value counted as nonzero, relative.
    pub smallest_kept: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BirkhoffVerdict {
    pub indices: Vec<i64>,
    pub semistable: bool,
    pub rank_trace: Vec<RankTraceEntry>,
}

impl BirkhoffVerdict {
    pub fn partial_indices(&self) -> PartialIndices {
        PartialIndices {
            sum: self.indices.iter().sum(),
            indices: self.indices.clone(),
        }
    }
}

/// Kernel dimension of the classical Toeplitz operator `T(zᵏ g)` on the
/// first `n` nonnegative modes, with rows long enough to hold the full image.
fn kernel_dim(g: &MatrixSymbol, shift: i64, n: usize) -> RankTraceEntry {
    let r = g.rank();
    let t = g.truncation() as i64 + shift.abs();
    let rows = n + t as usize;
    let m = CMatrix::from_fn(rows * r, n * r, |i, j| {
        let (ti, a) = (i / r, i % r);
        let (sj, b) = (j / r, j % r);
        g.entry(a, b).coefficient(0, ti as i64 - sj as i64 - shift)
    });
    let s = singular_values(&m);
    let top = s.first().copied().unwrap_or(0.0).max(1e-300);
    let kernel = s.iter().filter(|&&x| x < RANK_TOL * top).count();
    let kept = s.len() - kernel;
    RankTraceEntry {
        shift,
        kernel_dim: kernel,
        largest_dropped: if kernel > 0 { s[kept] / top } else { 0.0 },
        smallest_kept: if kept > 0 { s[kept - 1] / top } else { 0.0 },
    }
}

/// Birkhoff partial indices of a disk loop from the kernel dimensions of
/// `T(zᵏ g)`, `k ∈ [−k_range, k_range]`, on `n` modes per component.
pub fn birkhoff_scan(model: &SurfaceModel, g: &MatrixSymbol, n: usize, k_range: i64) -> Result<BirkhoffVerdict> {
    if !model.is_disk() {
        return Err(Error::WrongModel(
            "partial indices are defined through the sphere double only".into(),
        ));
    }
    if g.circles() != 1 {
        return Err(Error::WrongModel("symbol is not a disk loop".into()));
    }
    if n < 2 * k_range as usize + 2 {
        return Err(Error::BadInput(format!("section size {n} too small for shifts ±{k_range}")));
    }
    let r = g.rank();
    let rank_trace: Vec<RankTraceEntry> = (-k_range..=k_range).map(|k| kernel_dim(g, k, n)).collect();
    let d: Vec<i64> = rank_trace.iter().map(|e| e.kernel_dim as i64).collect();
    let last = *d.last().unwrap();
    let drops: Vec<i64> = d.windows(2).map(|w| w[0] - w[1]).collect();
    // drops[i] = #{κ : κ < −k} for k = −k_range + i.
    if last != 0 || drops[0] != r as i64 || drops.windows(2).any(|w| w[0] < w[1]) || drops.iter().any(|&x| x < 0) {
        return Err(Error::Inconclusive(format!(
            "kernel dimensions {d:?} over shifts ±{k_range} do not reach a plateau"
        )));
    }
    let mut indices = Vec::new();
    let count = |v: i64| -> i64 {
        // #{κ ≤ v} = drops at k = −v − 1.
        let k = -v - 1;
        if k < -k_range {
            r as i64
        } else if k >= k_range {
            0
        } else {
            drops[(k + k_range) as usize]
        }
    };
    for v in -k_range..k_range {
        for _ in 0..(count(v) - count(v - 1)) {
            indices.push(v);
        }
    }
    indices.sort_by(|a, b| b.cmp(a));
    Ok(BirkhoffVerdict {
        semistable: indices.iter().all(|&k| k == 0),
        indices,
        rank_trace,
    })
}

/// Partial indices of an SU(2) (or SL(2)) loop on the disk.
pub fn partial_indices(g: &SU2Loop, n: usize) -> Result<PartialIndices> {
    let v = birkhoff_scan(g.model(), &MatrixSymbol::from_loop(g), n, DEFAULT_K_RANGE)?;
    let p = v.partial_indices();
    if p.sum != 0 {
        return Err(Error::Inconclusive(format!(
            "indices {:?} of a determinant-one loop do not sum to zero",
            p.indices
        )));
    }
    Ok(p)
}

/// A function holomorphic off the boundary: one germ on each side.
#[derive(Clone, Debug)]
pub struct OffBoundaryFunction {
    /// Holomorphic on the outer (Σ*) side.
    pub outside: MatrixSymbol,
    /// Holomorphic on the inner (Σ) side.
    pub inside: MatrixSymbol,
}

/// Representative `(g, h)` of a hyperfunction class `[g, h]`: `g` lives on a
/// collar outside the boundary, `h` on a collar inside. Both are stored by
/// their Laurent data on the boundary circles.
#[derive(Clone, Debug)]
pub struct HyperfunctionPair {
    model: SurfaceModel,
    pub left: MatrixSymbol,
    pub right: MatrixSymbol,
}

impl HyperfunctionPair {
    pub fn new(model: &SurfaceModel, left: MatrixSymbol, right: MatrixSymbol) -> Result<Self> {
        if left.rank() != right.rank() || left.circles() != model.circles() || right.circles() != model.circles() {
            return Err(Error::BadInput("pair components must share rank and model".into()));
        }
        Ok(Self {
            model: model.clone(),
            left,
            right,
        })
    }

    /// `[g, I]`.
    pub fn from_loop(g: &SU2Loop) -> Self {
        let sym = MatrixSymbol::from_loop(g);
        let one = LaurentBoundaryFunction::constant(sym.circles(), sym.truncation(), C64::new(1.0, 0.0));
        let zero = LaurentBoundaryFunction::zeros(sym.circles(), sym.truncation());
        let id = MatrixSymbol::new(2, vec![one.clone(), zero.clone(), zero, one]).expect("2×2");
        Self {
            model: g.model().clone(),
            left: sym,
            right: id,
        }
    }

    /// The boundary transition function `g·h`.
    pub fn induced_loop(&self) -> Result<MatrixSymbol> {
        self.left.mul(&self.right)
    }

    /// Samples of one component on its collar: outside for `left`, inside for `right`.
    pub fn collar_samples(&self, left: bool, grid: usize) -> Vec<Vec<Vec<C64>>> {
        let sym = if left { &self.left } else { &self.right };
        let r = sym.rank();
        (0..r * r)
            .map(|k| collar_values(&self.model, sym.entry(k / r, k % r), left, grid))
            .collect()
    }
}

/// Values of `f` continued to the collar on the chosen side, per circle.
pub fn collar_values(model: &SurfaceModel, f: &LaurentBoundaryFunction, outside: bool, grid: usize) -> Vec<Vec<C64>> {
    let n = f.truncation() as i64;
    (0..f.circles())
        .map(|cc| {
            // Mode k picks up exp(2πk·shift) on the collar.
            let shift = match model.elliptic() {
                None => {
                    let r: f64 = if outside { 1.0 + COLLAR } else { 1.0 - COLLAR };
                    r.ln() / (2.0 * PI)
                }
                Some(e) => {
                    let d = COLLAR * e.t / 2.0;
                    // C₀ bounds Σ from below, C₁ from above.
                    let into_sigma = if cc == 0 { d } else { -d };
                    let im = if outside { -into_sigma } else { into_sigma };
                    -im
                }
            };
            (0..grid)
                .map(|j| {
                    let x = j as f64 / grid as f64;
                    (-n..=n)
                        .map(|k| {
                            f.coefficient(cc, k)
                                * (2.0 * PI * k as f64 * shift).exp()
                                * C64::from_polar(1.0, 2.0 * PI * k as f64 * x)
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// `[g, h] ↦ [f_out·g, h·f_in⁻¹]`.
pub fn pair_act(pair: &HyperfunctionPair, f: &OffBoundaryFunction) -> Result<HyperfunctionPair> {
    let left = f.outside.mul(&pair.left)?;
    let right = pair.right.mul(&f.inside.inverse()?)?;
    HyperfunctionPair::new(&pair.model, left, right)
}

#[derive(Clone, Debug, Serialize)]
pub struct StraightLineVerdict {
    pub straight: bool,
    /// Singular values of the pairing matrix, relative to the largest.
    pub pairing_singular_values: Vec<f64>,
    /// `λ` with `ω = λ du` such that `Re ω` pulls back to zero, when straight.
    pub witness: Option<C64>,
    /// Lattice displacement of the closed curve.
    pub displacement: C64,
}

fn check_curve(samples: &[C64]) -> Result<()> {
    let g = samples.len();
    if g < 8 {
        return Err(Error::BadInput(format!("{g} curve samples are too few")));
    }
    if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::BadInput("curve samples must be finite".into()));
    }
    Ok(())
}

/// Whether a closed curve on the torus is a straight line for the flat
/// metric `|du|²`, tested through the pairing of `Re(λ du)` with real
/// trigonometric test functions along the curve.
pub fn straight_line_test(model: &SurfaceModel, samples: &[C64]) -> Result<StraightLineVerdict> {
    let e = model.elliptic().ok_or_else(|| {
        Error::WrongModel("the sphere has no holomorphic differentials; the map is onto".into())
    })?;
    check_curve(samples)?;
    let g = samples.len();
    let mut steps: Vec<C64> = samples.windows(2).map(|w| w[1] - w[0]).collect();
    // Closing step, reduced modulo the lattice.
    let raw = samples[0] - samples[g - 1];
    let m = (raw.im / e.t).round();
    let v = raw - e.tau * m;
    let closing = v - C64::new(v.re.round(), 0.0);
    steps.push(closing);
    let displacement = samples[g - 1] + closing - samples[0];
    let mean = steps.iter().map(|s| s.norm()).sum::<f64>() / g as f64;
    if mean == 0.0 || steps.iter().any(|s| s.norm() < 1e-9 * mean) {
        return Err(Error::BadInput("degenerate curve: repeated consecutive samples".into()));
    }
    if steps.iter().any(|s| s.norm() > 0.25 * (1.0f64).min(e.t)) {
        return Err(Error::BadInput("curve is undersampled or not closed".into()));
    }
    for i in 0..g {
        for j in i + 2..g {
            if i == 0 && j == g - 1 {
                continue;
            }
            let d = samples[j] - samples[i];
            let dm = d - e.tau * (d.im / e.t).round();
            let dm = dm - C64::new(dm.re.round(), 0.0);
            if dm.norm() < 1e-3 * mean {
                return Err(Error::BadInput(format!(
                    "degenerate curve: samples {i} and {j} coincide on the torus"
                )));
            }
        }
    }
    // γ(s) = γ₀ + L s + p(s) with p periodic; differentiate spectrally.
    let periodic: Vec<C64> = (0..g)
        .map(|j| samples[j] - samples[0] - displacement * (j as f64 / g as f64))
        .collect();
    let trunc = (g - 1) / 2;
    let p = LaurentBoundaryFunction::from_samples(&[periodic], trunc)?;
    let velocity: Vec<C64> = (0..g)
        .map(|j| {
            let s = j as f64 / g as f64;
            let dp: C64 = (-(trunc as i64)..=trunc as i64)
                .map(|k| {
                    p.coefficient(0, k) * C64::new(0.0, 2.0 * PI * k as f64) * C64::from_polar(1.0, 2.0 * PI * k as f64 * s)
                })
                .sum();
            displacement + dp
        })
        .collect();
    // Rows: λ = 1 and λ = i; columns: 1, cos, sin test functions.
    let tests = 2 * TEST_MODES + 1;
    let pairing = CMatrix::from_fn(2, tests, |row, col| {
        let lam = if row == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) };
        let val: f64 = (0..g)
            .map(|j| {
                let s = j as f64 / g as f64;
                let f = match col {
                    0 => 1.0,
                    c if c % 2 == 1 => (2.0 * PI * (c / 2 + 1) as f64 * s).cos(),
                    c => (2.0 * PI * (c / 2) as f64 * s).sin(),
                };
                f * (lam * velocity[j]).re
            })
            .sum::<f64>()
            / g as f64;
        C64::new(val, 0.0)
    });
    // Real 2×2 Gram matrix of the two rows; its null direction is the witness.
    let gram = nalgebra::Matrix2::from_fn(|a, b| (0..tests).map(|k| pairing[(a, k)].re * pairing[(b, k)].re).sum::<f64>());
    let eig = gram.symmetric_eigen();
    let (lo, hi) = if eig.eigenvalues[0] <= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let top = eig.eigenvalues[hi].max(0.0).sqrt();
    if top == 0.0 {
        return Err(Error::BadInput("curve has zero velocity".into()));
    }
    let low = eig.eigenvalues[lo].max(0.0).sqrt();
    let straight = low < STRAIGHT_TOL * top;
    let witness = straight.then(|| {
        let v = eig.eigenvectors.column(lo);
        C64::new(v[0], v[1])
    });
    let sv = [1.0, low / top];
    Ok(StraightLineVerdict {
        straight,
        pairing_singular_values: sv.to_vec(),
        witness,
        displacement,
    })
}

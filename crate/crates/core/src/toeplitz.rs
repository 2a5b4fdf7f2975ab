//! Block Toeplitz and Hankel sections of multiplication operators on spinors,
//! and the determinant identities built from them.
//!
//! For a symbol `g` acting on `H = H₊ ⊕ H₋` (spinor boundary values, `r`
//! copies), `M(g) = [A B; C D]` with `A: H₊ → H₊`, `B: H₋ → H₊`,
//! `C: H₊ → H₋`. Basis index `j·r + a` is frame vector `j` in component `a`.
//!
//! Products of operators are sectioned as leading blocks of padded products:
//! the inner dimension of every product is `INNER_FACTOR · n`. Determinants of
//! products of plain `n×n` sections are useless here, since e.g. a
//! multiplicative commutator of finite matrices always has determinant 1.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{pointwise, LaurentBoundaryFunction, C64};
use crate::linalg::{c, det, expm, frob, identity, inverse, richardson, singular_values, CMatrix};
use crate::loops::SU2Loop;
use crate::spin::{FrameVector, SpinStructureData};
use crate::surface::Part;

pub const DEFAULT_SIZES: [usize; 3] = [64, 96, 128];
pub const MAX_SECTION: usize = 512;
/// Inner dimension of padded products, as a multiple of the section size.
pub const INNER_FACTOR: usize = 2;
/// Relative coefficient tail above which a symbol counts as unresolved.
const RESOLUTION_TOL: f64 = 1e-9;
const ZERO_MODE_TOL: f64 = 1e-10;

/// An `r×r` matrix of boundary functions, row major.
#[derive(Clone, Debug)]
pub struct MatrixSymbol {
    rank: usize,
    entries: Vec<LaurentBoundaryFunction>,
}

impl MatrixSymbol {
    pub fn new(rank: usize, entries: Vec<LaurentBoundaryFunction>) -> Result<Self> {
        if rank == 0 || entries.len() != rank * rank {
            return Err(Error::BadInput(format!(
                "{} entries do not form a {rank}×{rank} symbol",
                entries.len()
            )));
        }
        let (cc, n) = (entries[0].circles(), entries[0].truncation());
        if entries.iter().any(|e| e.circles() != cc || e.truncation() != n) {
            return Err(Error::BadInput("symbol entries must share circles and truncation".into()));
        }
        Ok(Self { rank, entries })
    }

    pub fn scalar(f: &LaurentBoundaryFunction) -> Self {
        Self {
            rank: 1,
            entries: vec![f.clone()],
        }
    }

    pub fn from_loop(g: &SU2Loop) -> Self {
        Self {
            rank: 2,
            entries: g.entries.iter().flatten().cloned().collect(),
        }
    }

    pub fn diagonal(fs: &[LaurentBoundaryFunction]) -> Result<Self> {
        let r = fs.len();
        let zero = LaurentBoundaryFunction::zeros(fs[0].circles(), fs[0].truncation());
        let entries = (0..r * r)
            .map(|k| if k / r == k % r { fs[k / r].clone() } else { zero.clone() })
            .collect();
        Self::new(r, entries)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn circles(&self) -> usize {
        self.entries[0].circles()
    }

    pub fn truncation(&self) -> usize {
        self.entries[0].truncation()
    }

    pub fn entry(&self, i: usize, j: usize) -> &LaurentBoundaryFunction {
        &self.entries[i * self.rank + j]
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.rank != other.rank {
            return Err(Error::BadInput("symbol ranks differ".into()));
        }
        let r = self.rank;
        let entries = (0..r * r)
            .map(|k| {
                let (i, j) = (k / r, k % r);
                (1..r).fold(self.entry(i, 0).mul(other.entry(0, j)), |acc, l| {
                    acc.add(&self.entry(i, l).mul(other.entry(l, j)))
                })
            })
            .collect();
        Self::new(r, entries)
    }

    /// Pointwise inverse on the sample grid (ranks 1 and 2).
    pub fn inverse(&self) -> Result<Self> {
        match self.rank {
            1 => {
                let f = &self.entries[0];
                if f.min_modulus() < 1e-12 {
                    return Err(Error::Domain("symbol vanishes on the boundary".into()));
                }
                Ok(Self::scalar(&f.recip()))
            }
            2 => {
                let refs: Vec<&LaurentBoundaryFunction> = self.entries.iter().collect();
                let d = pointwise(&refs, |v| v[0] * v[3] - v[1] * v[2]);
                if d.min_modulus() < 1e-12 {
                    return Err(Error::Domain("symbol determinant vanishes on the boundary".into()));
                }
                let inv = d.recip();
                let e = &self.entries;
                let neg = |f: &LaurentBoundaryFunction| f.scale(c(-1.0, 0.0));
                Self::new(
                    2,
                    vec![e[3].mul(&inv), neg(&e[1]).mul(&inv), neg(&e[2]).mul(&inv), e[0].mul(&inv)],
                )
            }
            r => Err(Error::BadInput(format!("pointwise inverse of rank {r} symbols is not supported"))),
        }
    }

    /// Largest relative coefficient in the outer quarter of the truncation.
    pub fn tail_ratio(&self) -> f64 {
        let n = self.truncation();
        let top = self.entries.iter().map(|e| e.max_coefficient()).fold(0.0, f64::max);
        if top == 0.0 {
            return 0.0;
        }
        let from = n - n / 4;
        let mut tail = 0.0f64;
        for e in &self.entries {
            for cc in 0..e.circles() {
                for k in from as i64..=n as i64 {
                    tail = tail.max(e.coefficient(cc, k).norm()).max(e.coefficient(cc, -k).norm());
                }
            }
        }
        tail / top
    }
}

/// The four blocks of `M(g)` at section size `n` per part and component.
#[derive(Clone, Debug)]
pub struct BlockSections {
    pub size: usize,
    pub rank: usize,
    pub a: CMatrix,
    pub b: CMatrix,
    pub c: CMatrix,
    pub d: CMatrix,
}

struct Bases {
    plus: Vec<FrameVector>,
    minus: Vec<FrameVector>,
}

impl Bases {
    fn new(spin: &SpinStructureData, n: usize) -> Self {
        Self {
            plus: spin.section_basis(Part::Plus, n),
            minus: spin.section_basis(Part::Minus, n),
        }
    }

    fn part(&self, p: Part, n: usize) -> &[FrameVector] {
        match p {
            Part::Plus => &self.plus[..n],
            _ => &self.minus[..n],
        }
    }
}

fn check_symbol(spin: &SpinStructureData, g: &MatrixSymbol) -> Result<()> {
    if g.circles() != spin.model().circles() {
        return Err(Error::WrongModel(format!(
            "symbol has {} circles, model has {}",
            g.circles(),
            spin.model().circles()
        )));
    }
    Ok(())
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SECTION {
        return Err(Error::Resize(format!("section size {n} outside 1..={MAX_SECTION}")));
    }
    Ok(())
}

/// Matrix of `P_rows g |cols` in the given frames.
fn block(g: &MatrixSymbol, rows: &[FrameVector], cols: &[FrameVector]) -> CMatrix {
    let r = g.rank;
    let circles = g.circles();
    let mut m = CMatrix::zeros(rows.len() * r, cols.len() * r);
    for (ti, t) in rows.iter().enumerate() {
        for (si, s) in cols.iter().enumerate() {
            let k = (t.mode - s.mode).round() as i64;
            let w: Vec<C64> = (0..circles).map(|cc| t.dual[cc] * s.vector[cc]).collect();
            for a in 0..r {
                for b in 0..r {
                    let e = g.entry(a, b);
                    let v: C64 = (0..circles).map(|cc| w[cc] * e.coefficient(cc, k)).sum();
                    m[(ti * r + a, si * r + b)] = v;
                }
            }
        }
    }
    m
}

pub fn sections(spin: &SpinStructureData, g: &MatrixSymbol, n: usize) -> Result<BlockSections> {
    check_symbol(spin, g)?;
    check_size(n)?;
    let bases = Bases::new(spin, n);
    let (p, m) = (bases.part(Part::Plus, n), bases.part(Part::Minus, n));
    Ok(BlockSections {
        size: n,
        rank: g.rank,
        a: block(g, p, p),
        b: block(g, p, m),
        c: block(g, m, p),
        d: block(g, m, m),
    })
}

/// Sections at size `n` with padded inner dimension, shared by the products below.
struct Padded<'a> {
    bases: Bases,
    n: usize,
    inner: usize,
    _spin: &'a SpinStructureData,
}

impl<'a> Padded<'a> {
    fn new(spin: &'a SpinStructureData, n: usize) -> Result<Self> {
        check_size(n)?;
        let inner = INNER_FACTOR * n;
        Ok(Self {
            bases: Bases::new(spin, inner),
            n,
            inner,
            _spin: spin,
        })
    }

    fn blk(&self, g: &MatrixSymbol, rows: (Part, usize), cols: (Part, usize)) -> CMatrix {
        block(g, self.bases.part(rows.0, rows.1), self.bases.part(cols.0, cols.1))
    }

    /// Leading `n`-block of `A(g)A(h)`.
    fn aa(&self, g: &MatrixSymbol, h: &MatrixSymbol) -> CMatrix {
        let (n, m) = (self.n, self.inner);
        self.blk(g, (Part::Plus, n), (Part::Plus, m)) * self.blk(h, (Part::Plus, m), (Part::Plus, n))
    }

    /// Leading `n`-block of `B(g)C(h)`.
    fn bc(&self, g: &MatrixSymbol, h: &MatrixSymbol) -> CMatrix {
        let (n, m) = (self.n, self.inner);
        self.blk(g, (Part::Plus, n), (Part::Minus, m)) * self.blk(h, (Part::Minus, m), (Part::Plus, n))
    }

    fn a(&self, g: &MatrixSymbol, size: usize) -> CMatrix {
        self.blk(g, (Part::Plus, size), (Part::Plus, size))
    }
}

/// Values at several section sizes with a Richardson limit.
#[derive(Clone, Debug, Serialize)]
pub struct DetReport {
    pub sizes: Vec<usize>,
    pub values: Vec<C64>,
    pub extrapolated: C64,
    /// Difference of the last two values.
    pub error: f64,
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::BadInput("no section sizes given".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadInput(format!("section sizes {sizes:?} must increase strictly")));
    }
    sizes.iter().try_for_each(|&n| check_size(n))
}

fn over_sizes(sizes: &[usize], mut f: impl FnMut(usize) -> Result<C64>) -> Result<DetReport> {
    validate_sizes(sizes)?;
    let values = sizes.iter().map(|&n| f(n)).collect::<Result<Vec<_>>>()?;
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Conditioning(format!("non-finite section value in {values:?}")));
    }
    let (extrapolated, error) = richardson(sizes, &values);
    Ok(DetReport {
        sizes: sizes.to_vec(),
        values,
        extrapolated,
        error,
    })
}

/// `det(A(g)A(h))` at section size `n`.
pub fn product_det_at(spin: &SpinStructureData, g: &MatrixSymbol, h: &MatrixSymbol, n: usize) -> Result<C64> {
    check_symbol(spin, g)?;
    check_symbol(spin, h)?;
    let p = Padded::new(spin, n)?;
    Ok(det(&p.aa(g, h)))
}

/// `det(A(g)A(g⁻¹))` over the given sizes.
pub fn det_a_ainv(spin: &SpinStructureData, g: &MatrixSymbol, sizes: &[usize]) -> Result<DetReport> {
    let inv = g.inverse()?;
    over_sizes(sizes, |n| product_det_at(spin, g, &inv, n))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FactorizationCheck {
    pub size: usize,
    /// `‖B(k₁*)C(k₂)‖_F`.
    pub bc_norm: f64,
    /// `‖A(k₁*k₂) − A(k₁*)A(k₂)‖_F`.
    pub a_defect: f64,
}

/// `A(k₁*k₂) = A(k₁*)A(k₂)` and `B(k₁*)C(k₂) = 0` at section size `n`.
pub fn check_product_factorization(spin: &SpinStructureData, k1: &SU2Loop, k2: &SU2Loop, n: usize) -> Result<FactorizationCheck> {
    k1.check_k1_form()?;
    k2.check_k2_form()?;
    let k1s = k1.star();
    let (g1, g2) = (MatrixSymbol::from_loop(&k1s), MatrixSymbol::from_loop(k2));
    let prod = MatrixSymbol::from_loop(&k1s.mul(k2));
    check_symbol(spin, &g1)?;
    let p = Padded::new(spin, n)?;
    Ok(FactorizationCheck {
        size: n,
        bc_norm: frob(&p.bc(&g1, &g2)),
        a_defect: frob(&(p.a(&prod, n) - p.aa(&g1, &g2))),
    })
}

fn require_resolved(g: &MatrixSymbol, what: &str) -> Result<()> {
    let t = g.tail_ratio();
    if t > RESOLUTION_TOL {
        return Err(Error::Conditioning(format!(
            "{what} is not resolved by its truncation (relative tail {t:.2e}); W^(1/2) regularity cannot be certified"
        )));
    }
    Ok(())
}

fn invert_section(a: &CMatrix, what: &str) -> Result<CMatrix> {
    let s = singular_values(a);
    let smin = *s.last().unwrap_or(&0.0);
    if smin < 1e-12 * s.first().copied().unwrap_or(1.0) {
        return Err(Error::Singular {
            what: what.to_string(),
            sigma_min: smin,
        });
    }
    inverse(a, what)
}

/// `c(g,h)` at section size `n`, from `c(g,h)⁻¹ = det(1 + A(g)⁻¹B(g)C(h)A(h)⁻¹)`.
pub fn cocycle_at(spin: &SpinStructureData, g: &MatrixSymbol, h: &MatrixSymbol, n: usize) -> Result<C64> {
    check_symbol(spin, g)?;
    check_symbol(spin, h)?;
    require_resolved(g, "first cocycle argument")?;
    require_resolved(h, "second cocycle argument")?;
    let p = Padded::new(spin, n)?;
    let ag = invert_section(&p.a(g, n), "A(g)")?;
    let ah = invert_section(&p.a(h, n), "A(h)")?;
    let k = ag * p.bc(g, h) * ah;
    let d = det(&(identity(k.nrows()) + k));
    if d.norm() < 1e-300 {
        return Err(Error::Singular {
            what: "1 + A(g)⁻¹B(g)C(h)A(h)⁻¹".into(),
            sigma_min: 0.0,
        });
    }
    Ok(d.inv())
}

pub fn cocycle(spin: &SpinStructureData, g: &MatrixSymbol, h: &MatrixSymbol, sizes: &[usize]) -> Result<DetReport> {
    over_sizes(sizes, |n| cocycle_at(spin, g, h, n))
}

/// `ω(X,Y) = tr(B(Y)C(X) − B(X)C(Y))` at section size `n`.
pub fn lie_cocycle_at(spin: &SpinStructureData, x: &MatrixSymbol, y: &MatrixSymbol, n: usize) -> Result<C64> {
    check_symbol(spin, x)?;
    check_symbol(spin, y)?;
    let p = Padded::new(spin, n)?;
    Ok((p.bc(y, x) - p.bc(x, y)).trace())
}

pub fn lie_cocycle(spin: &SpinStructureData, x: &MatrixSymbol, y: &MatrixSymbol, sizes: &[usize]) -> Result<DetReport> {
    over_sizes(sizes, |n| lie_cocycle_at(spin, x, y, n))
}

/// `tr B(f)C(g)` at section size `n`.
pub fn trace_bc_at(spin: &SpinStructureData, f: &MatrixSymbol, g: &MatrixSymbol, n: usize) -> Result<C64> {
    check_symbol(spin, f)?;
    check_symbol(spin, g)?;
    let p = Padded::new(spin, n)?;
    Ok(p.bc(f, g).trace())
}

/// `χ = χ₋ + χ₀ + χ₊` with scalar symbols ready for sectioning.
struct Split {
    minus: LaurentBoundaryFunction,
    zero: LaurentBoundaryFunction,
    plus: LaurentBoundaryFunction,
}

fn split(spin: &SpinStructureData, chi: &LaurentBoundaryFunction) -> Result<Split> {
    if chi.circles() != spin.model().circles() {
        return Err(Error::WrongModel("χ lives on another model".into()));
    }
    let d = spin.model().decompose(chi)?;
    Ok(Split {
        minus: d.minus,
        zero: d.zero,
        plus: d.plus,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WidomReport {
    /// `tr B(χ₊)C(χ₋)`.
    pub trace: C64,
    pub closed_form: C64,
    pub finite_section: DetReport,
    pub relative_gap: f64,
}

/// `det(A(e^χ)A(e^{−χ})) = exp tr B(χ₊)C(χ₋)` for `χ` with no zero-mode part.
pub fn widom_scalar(spin: &SpinStructureData, chi: &LaurentBoundaryFunction, sizes: &[usize]) -> Result<WidomReport> {
    let s = split(spin, chi)?;
    if s.zero.max_coefficient() > ZERO_MODE_TOL {
        return Err(Error::Domain(format!(
            "χ has a zero-mode part of size {:.2e}; use zero_mode_det",
            s.zero.max_coefficient()
        )));
    }
    validate_sizes(sizes)?;
    let top = *sizes.last().unwrap();
    let trace = trace_bc_at(spin, &MatrixSymbol::scalar(&s.plus), &MatrixSymbol::scalar(&s.minus), top)?;
    let closed_form = trace.exp();
    let e = MatrixSymbol::scalar(&chi.exp());
    let finite_section = det_a_ainv(spin, &e, sizes)?;
    Ok(WidomReport {
        trace,
        closed_form,
        relative_gap: relative_gap(finite_section.extrapolated, closed_form),
        finite_section,
    })
}

pub fn relative_gap(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedFactor {
    pub name: String,
    pub report: DetReport,
}

/// A determinant identity `lhs = F(factors)` checked through extrapolated limits.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub lhs: DetReport,
    pub factors: Vec<NamedFactor>,
    pub sizes: Vec<usize>,
    /// `lhs` limit.
    pub extrapolated: C64,
    pub rhs: C64,
    pub relative_gap: f64,
}

impl IdentityReport {
    fn new(lhs: DetReport, factors: Vec<NamedFactor>, rhs: C64) -> Self {
        Self {
            sizes: lhs.sizes.clone(),
            extrapolated: lhs.extrapolated,
            relative_gap: relative_gap(lhs.extrapolated, rhs),
            rhs,
            lhs,
            factors,
        }
    }

    pub fn factor(&self, name: &str) -> Option<&DetReport> {
        self.factors.iter().find(|f| f.name == name).map(|f| &f.report)
    }
}

/// Leading `n`-block determinant of the group commutator `xyx⁻¹y⁻¹` of two
/// `M×M` sections.
fn group_commutator_det(x: &CMatrix, y: &CMatrix, n: usize) -> Result<C64> {
    let xi = invert_section(x, "commutator argument")?;
    let yi = invert_section(y, "commutator argument")?;
    let e = x * y * xi * yi;
    Ok(det(&e.view((0, 0), (n, n)).into_owned()))
}

/// `det {e^{−A(χ₊)}, e^{A(χ₋)}}`, `{X,Y} = XYX⁻¹Y⁻¹`, at section size `n`.
pub fn commutator_det_at(
    spin: &SpinStructureData,
    plus: &LaurentBoundaryFunction,
    minus: &LaurentBoundaryFunction,
    n: usize,
) -> Result<C64> {
    let p = Padded::new(spin, n)?;
    let m = p.inner;
    let ap = p.a(&MatrixSymbol::scalar(plus), m);
    let am = p.a(&MatrixSymbol::scalar(minus), m);
    group_commutator_det(&expm(&(-ap)), &expm(&am), n)
}

/// `det {e^{sA(f)}, A(e^{χ₀})}` at section size `n`.
pub fn zero_mode_commutator_at(
    spin: &SpinStructureData,
    f: &LaurentBoundaryFunction,
    sign: f64,
    zero: &LaurentBoundaryFunction,
    n: usize,
) -> Result<C64> {
    let p = Padded::new(spin, n)?;
    let m = p.inner;
    let af = p.a(&MatrixSymbol::scalar(f), m) * c(sign, 0.0);
    let a0 = p.a(&MatrixSymbol::scalar(&zero.exp()), m);
    group_commutator_det(&expm(&af), &a0, n)
}

pub const ZERO_MODE_FACTORS: [&str; 4] = [
    "det{e^A(chi_minus), A(e^chi_zero)}",
    "det{e^-A(chi_plus), A(e^chi_zero)}",
    "det{e^-A(chi_plus), e^A(chi_minus)}",
    "det A(e^chi_zero)A(e^-chi_zero)",
];

/// Zero-mode factorization of `det(A(e^χ)A(e^{−χ}))` into the two zero-mode
/// commutators, the Helton–Howe commutator and the pure zero-mode term.
pub fn zero_mode_det(spin: &SpinStructureData, chi: &LaurentBoundaryFunction, sizes: &[usize]) -> Result<IdentityReport> {
    let s = split(spin, chi)?;
    let lhs = det_a_ainv(spin, &MatrixSymbol::scalar(&chi.exp()), sizes)?;
    let reports = [
        over_sizes(sizes, |n| zero_mode_commutator_at(spin, &s.minus, 1.0, &s.zero, n))?,
        over_sizes(sizes, |n| zero_mode_commutator_at(spin, &s.plus, -1.0, &s.zero, n))?,
        over_sizes(sizes, |n| commutator_det_at(spin, &s.plus, &s.minus, n))?,
        det_a_ainv(spin, &MatrixSymbol::scalar(&s.zero.exp()), sizes)?,
    ];
    let factors: Vec<NamedFactor> = ZERO_MODE_FACTORS
        .iter()
        .zip(reports)
        .map(|(name, report)| NamedFactor {
            name: name.to_string(),
            report,
        })
        .collect();
    let rhs = factors.iter().map(|f| f.report.extrapolated).product();
    Ok(IdentityReport::new(lhs, factors, rhs))
}

/// The parts `(χ₋, χ₀, χ₊)` of a scalar exponent.
pub fn exponent_parts(
    spin: &SpinStructureData,
    chi: &LaurentBoundaryFunction,
) -> Result<[LaurentBoundaryFunction; 3]> {
    let s = split(spin, chi)?;
    Ok([s.minus, s.zero, s.plus])
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizedDetReport {
    #[serde(flatten)]
    pub identity: IdentityReport,
    /// Gap between the `C²` middle determinant and the scalar one squared.
    pub middle_square_gap: f64,
}

/// `det(A(g)A(g⁻¹))` for `g = k₁* diag(e^χ, e^{−χ}) k₂` against
/// `det(A(k₁)A(k₁⁻¹)) · det(A(e^χ)A(e^{−χ}))² · det(A(k₂)A(k₂⁻¹))`.
pub fn check_factorized_det(
    spin: &SpinStructureData,
    k1: &SU2Loop,
    chi: &LaurentBoundaryFunction,
    k2: &SU2Loop,
    sizes: &[usize],
) -> Result<FactorizedDetReport> {
    k1.check_k1_form()?;
    k2.check_k2_form()?;
    let g = crate::loops::assemble_g(k1, chi, k2)?;
    let lhs = det_a_ainv(spin, &MatrixSymbol::from_loop(&g), sizes)?;
    let f1 = det_a_ainv(spin, &MatrixSymbol::from_loop(k1), sizes)?;
    let f2 = det_a_ainv(spin, &MatrixSymbol::from_loop(k2), sizes)?;
    let e = chi.exp();
    let mid = det_a_ainv(spin, &MatrixSymbol::scalar(&e), sizes)?;
    let diag = MatrixSymbol::diagonal(&[e.clone(), e.recip()])?;
    let mid_matrix = det_a_ainv(spin, &diag, sizes)?;
    let sq = mid.extrapolated * mid.extrapolated;
    let middle_square_gap = relative_gap(mid_matrix.extrapolated, sq);
    let rhs = f1.extrapolated * sq * f2.extrapolated;
    let factors = vec![
        NamedFactor {
            name: "det A(k1)A(k1^-1)".into(),
            report: f1,
        },
        NamedFactor {
            name: "det A(e^chi)A(e^-chi)".into(),
            report: mid,
        },
        NamedFactor {
            name: "det A(diag(e^chi, e^-chi))A(diag(e^-chi, e^chi))".into(),
            report: mid_matrix,
        },
        NamedFactor {
            name: "det A(k2)A(k2^-1)".into(),
            report: f2,
        },
    ];
    Ok(FactorizedDetReport {
        identity: IdentityReport::new(lhs, factors, rhs),
        middle_square_gap,
    })
}

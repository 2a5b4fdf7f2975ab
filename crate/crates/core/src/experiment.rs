//! Experiment configuration and the report pipelines behind the command-line
//! front end. Every pipeline is a pure function of the configuration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bundle::partial_indices;
use crate::error::{Error, Result};
use crate::fourier::{LaurentBoundaryFunction, C64};
use crate::loops::{
    assemble_g, build_k1, build_k2, factor_k1, factor_k2, FactorKind, LoopFile, RootSubgroupSequence, SU2Loop,
    TriangularFactorization,
};
use crate::spin::{kn_bandwidth_check, smoothing_profile, BandReport, KnFunction, SpinLabel, SpinStructureData};
use crate::surface::{ModelDescriptor, Part, SurfaceModel};
use crate::toeplitz::{
    check_factorized_det, check_product_factorization, cocycle_at, det_a_ainv, widom_scalar, DetReport,
    FactorizedDetReport, MatrixSymbol, DEFAULT_SIZES,
};

/// Name of the generator used for randomized families.
pub const GENERATOR: &str = "rand_chacha::ChaCha8Rng::seed_from_u64";
const MAX_COEFFICIENT: f64 = 0.5;
const MAX_LENGTH: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub unitarity: f64,
    pub round_trip: f64,
    pub hankel_product: f64,
    pub toeplitz_product: f64,
    pub factorized_det: f64,
    pub widom: f64,
    pub cocycle: f64,
    /// Applied instead of the limit tolerances on the torus.
    pub torus: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            unitarity: 1e-10,
            round_trip: 1e-8,
            hankel_product: 1e-10,
            toeplitz_product: 1e-8,
            factorized_det: 1e-5,
            widom: 1e-6,
            cocycle: 1e-7,
            torus: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelDescriptor,
    /// Defaults to the trivial structure on the disk and θ₃ on the torus.
    pub spin: Option<SpinLabel>,
    #[serde(rename = "N")]
    pub truncation: usize,
    pub sizes: Vec<usize>,
    pub eta: Vec<C64>,
    pub zeta: Vec<C64>,
    /// `χ = Σₙ (cₙφₙ − (cₙφₙ)*)`, `n ≥ 1`, with `φₙ` the Σ-holomorphic basis.
    pub chi: Vec<C64>,
    pub seed: u64,
    /// Random families generated from `seed` after the explicit one.
    pub random_families: usize,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelDescriptor::Disk,
            spin: None,
            truncation: 64,
            sizes: DEFAULT_SIZES.to_vec(),
            eta: vec![],
            zeta: vec![],
            chi: vec![],
            seed: 0,
            random_families: 0,
            tolerances: Tolerances::default(),
        }
    }
}

/// Loop data for one point of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Family {
    pub index: usize,
    pub eta: Vec<C64>,
    pub zeta: Vec<C64>,
    pub chi: Vec<C64>,
}

/// Model and spin structure built from a configuration.
pub struct Setup {
    pub model: SurfaceModel,
    pub spin: SpinStructureData,
}

fn finite(v: &[C64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(8..=512).contains(&self.truncation) {
            return Err(Error::BadInput(format!("truncation {} outside 8..=512", self.truncation)));
        }
        if self.sizes.is_empty() || self.sizes.windows(2).any(|w| w[0] >= w[1]) || self.sizes[0] == 0 {
            return Err(Error::BadInput(format!("section sizes {:?} must increase strictly", self.sizes)));
        }
        if !(finite(&self.eta) && finite(&self.zeta) && finite(&self.chi)) {
            return Err(Error::BadInput("sequence coefficients must be finite".into()));
        }
        Ok(())
    }

    pub fn setup(&self) -> Result<Setup> {
        self.validate()?;
        let model = self.model.build()?;
        let label = self.spin.unwrap_or_else(|| SpinLabel::default_for(&model));
        let spin = SpinStructureData::new(&model, label)?;
        Ok(Setup { model, spin })
    }

    /// The explicit family followed by `random_families` seeded ones.
    pub fn families(&self) -> Vec<Family> {
        let mut out = vec![Family {
            index: 0,
            eta: self.eta.clone(),
            zeta: self.zeta.clone(),
            chi: self.chi.clone(),
        }];
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for index in 1..=self.random_families {
            let seq = |rng: &mut ChaCha8Rng| {
                let len = rng.gen_range(1..=MAX_LENGTH);
                (0..len)
                    .map(|_| C64::from_polar(rng.gen_range(0.0..MAX_COEFFICIENT), rng.gen_range(0.0..std::f64::consts::TAU)))
                    .collect::<Vec<_>>()
            };
            let eta = seq(&mut rng);
            let zeta = seq(&mut rng);
            let chi = vec![C64::new(0.0, rng.gen_range(-MAX_COEFFICIENT..MAX_COEFFICIENT))];
            out.push(Family { index, eta, zeta, chi });
        }
        out
    }
}

/// `Σₙ (cₙφₙ − (cₙφₙ)*)`, imaginary on the boundary.
pub fn chi_function(model: &SurfaceModel, coeffs: &[C64], truncation: usize) -> LaurentBoundaryFunction {
    let mut f = LaurentBoundaryFunction::zeros(model.circles(), truncation);
    for (k, &c) in coeffs.iter().enumerate() {
        let phi = model.plus_basis_function(truncation, k as i64 + 1).scale(c);
        f = f.add(&phi.sub(&phi.star()));
    }
    f
}

/// Loops of one family: `k₁`, `k₂`, `χ` and `g = k₁* diag(e^χ, e^{−χ}) k₂`.
pub struct FamilyLoops {
    pub k1: SU2Loop,
    pub k2: SU2Loop,
    pub chi: LaurentBoundaryFunction,
    pub g: SU2Loop,
}

pub fn family_loops(model: &SurfaceModel, fam: &Family, truncation: usize) -> Result<FamilyLoops> {
    let map = model.equivariant_map();
    let k1 = build_k1(model, &map, &RootSubgroupSequence::eta(fam.eta.clone()), truncation)?;
    let k2 = build_k2(model, &map, &RootSubgroupSequence::zeta(fam.zeta.clone()), truncation)?;
    let chi = chi_function(model, &fam.chi, truncation);
    let g = assemble_g(&k1, &chi, &k2)?;
    Ok(FamilyLoops { k1, k2, chi, g })
}

#[derive(Clone, Debug, Serialize)]
pub struct LoopSummary {
    pub name: String,
    pub unitarity_defect: f64,
    pub det_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GenOutput {
    pub family: Family,
    pub generator: &'static str,
    pub seed: u64,
    pub loops: Vec<LoopSummary>,
    #[serde(skip)]
    pub files: Vec<(String, LoopFile)>,
}

pub fn run_gen(config: &ExperimentConfig) -> Result<GenOutput> {
    let setup = config.setup()?;
    let fam = config.families().remove(0);
    let l = family_loops(&setup.model, &fam, config.truncation)?;
    let named = [("k1", &l.k1), ("k2", &l.k2), ("g", &l.g)];
    Ok(GenOutput {
        loops: named
            .iter()
            .map(|(n, k)| LoopSummary {
                name: n.to_string(),
                unitarity_defect: k.unitarity_defect(),
                det_defect: k.det_defect(),
            })
            .collect(),
        files: named.iter().map(|(n, k)| (n.to_string(), k.to_file())).collect(),
        family: fam,
        generator: GENERATOR,
        seed: config.seed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorOutput {
    pub factorization: TriangularFactorization,
    /// `‖assemble − input‖` in coefficients.
    pub reassembly_error: f64,
    /// Largest coefficient of the zero-mode part.
    pub zero_mode_size: f64,
}

/// Factor a loop in the k2 form if it has it, otherwise in the k1 form,
/// unless `kind` forces the choice.
pub fn run_factor(k: &SU2Loop, kind: Option<FactorKind>) -> Result<FactorOutput> {
    let model = k.model().clone();
    let kind = match kind {
        Some(kind) => kind,
        None if k.check_k2_form().is_ok() => FactorKind::Upper,
        None => FactorKind::Lower,
    };
    let f = match kind {
        FactorKind::Upper => factor_k2(&model, k)?,
        FactorKind::Lower => factor_k1(&model, k)?,
    };
    Ok(FactorOutput {
        reassembly_error: f.assemble(&model).distance(k),
        zero_mode_size: f.zero_part.max_coefficient(),
        factorization: f,
    })
}

/// Factorized determinant identity for the explicit family.
pub fn run_det(config: &ExperimentConfig) -> Result<FactorizedDetReport> {
    let setup = config.setup()?;
    let fam = config.families().remove(0);
    let l = family_loops(&setup.model, &fam, config.truncation)?;
    check_factorized_det(&setup.spin, &l.k1, &l.chi, &l.k2, &config.sizes)
}

/// `det(A(g)A(g⁻¹))` of a loop read from a file.
pub fn run_det_loop(config: &ExperimentConfig, g: &SU2Loop) -> Result<DetReport> {
    let setup = config.setup()?;
    if setup.model.descriptor() != g.model().descriptor() {
        return Err(Error::WrongModel("loop file and configuration name different models".into()));
    }
    det_a_ainv(&setup.spin, &MatrixSymbol::from_loop(g), &config.sizes)
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub family: usize,
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub config: ExperimentConfig,
    pub generator: &'static str,
    pub families: Vec<Family>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

struct Checks {
    family: usize,
    out: Vec<CheckResult>,
}

impl Checks {
    fn le(&mut self, name: &str, value: f64, tolerance: f64) {
        self.out.push(CheckResult {
            family: self.family,
            check: name.to_string(),
            value,
            tolerance,
            passed: value <= tolerance,
            note: String::new(),
        });
    }

    fn eq(&mut self, name: &str, ok: bool, note: String) {
        self.out.push(CheckResult {
            family: self.family,
            check: name.to_string(),
            value: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            passed: ok,
            note,
        });
    }

    fn failed(&mut self, name: &str, err: &Error) {
        self.out.push(CheckResult {
            family: self.family,
            check: name.to_string(),
            value: f64::NAN,
            tolerance: 0.0,
            passed: false,
            note: err.to_string(),
        });
    }

    fn run<T>(&mut self, name: &str, r: Result<T>, f: impl FnOnce(&mut Self, T)) {
        match r {
            Ok(v) => f(self, v),
            Err(e) => self.failed(name, &e),
        }
    }
}

/// Fail fast when a supplied loop is not SU(2) valued.
pub fn require_unitary(name: &str, k: &SU2Loop, tol: f64) -> Result<()> {
    let u = k.unitarity_defect();
    let d = k.det_defect();
    if u > tol || d > tol {
        return Err(Error::Verification(format!(
            "{name} is not SU(2) valued (unitarity defect {u:.2e}, det defect {d:.2e})"
        )));
    }
    Ok(())
}

/// All contract checks over the families of a configuration.
pub fn run_verify(config: &ExperimentConfig, extra: &[(String, SU2Loop)]) -> Result<VerifyReport> {
    let setup = config.setup()?;
    let t = &config.tolerances;
    for (name, k) in extra {
        require_unitary(name, k, t.unitarity)?;
    }
    let torus = !setup.model.is_disk();
    let limit = |tol: f64| if torus { t.torus } else { tol };
    let families = config.families();
    let mut all = Vec::new();
    let spin = &setup.spin;
    let n = config.truncation;
    let section = config.sizes[0].min(n);
    for fam in &families {
        let mut c = Checks {
            family: fam.index,
            out: Vec::new(),
        };
        let loops = match family_loops(&setup.model, fam, n) {
            Ok(l) => l,
            Err(e) => {
                c.failed("build loops", &e);
                all.extend(c.out);
                continue;
            }
        };
        for (name, k) in [("k1", &loops.k1), ("k2", &loops.k2), ("g", &loops.g)] {
            c.le(&format!("unitarity {name}"), k.unitarity_defect().max(k.det_defect()), t.unitarity);
        }
        c.run("factor k2", factor_k2(&setup.model, &loops.k2), |c, f| {
            c.le("factor k2 reassembly", f.assemble(&setup.model).distance(&loops.k2), t.round_trip);
            c.le("factor k2 zero mode", f.zero_part.max_coefficient(), t.round_trip);
        });
        c.run("factor k1", factor_k1(&setup.model, &loops.k1), |c, f| {
            c.le("factor k1 reassembly", f.assemble(&setup.model).distance(&loops.k1), t.round_trip);
            c.le("factor k1 zero mode", f.zero_part.max_coefficient(), t.round_trip);
        });
        c.run("hankel product", check_product_factorization(spin, &loops.k1, &loops.k2, section), |c, r| {
            c.le("B(k1*)C(k2)", r.bc_norm, limit(t.hankel_product));
            c.le("A(k1*k2) - A(k1*)A(k2)", r.a_defect, limit(t.toeplitz_product));
        });
        c.run(
            "factorized determinant",
            check_factorized_det(spin, &loops.k1, &loops.chi, &loops.k2, &config.sizes),
            |c, r| {
                c.le("factorized determinant gap", r.identity.relative_gap, limit(t.factorized_det));
                c.le("middle determinant square gap", r.middle_square_gap, limit(t.factorized_det));
            },
        );
        c.run("widom", widom_scalar(spin, &loops.chi, &config.sizes), |c, r| {
            c.le("widom gap", r.relative_gap, limit(t.widom));
        });
        let g = MatrixSymbol::from_loop(&loops.g);
        let id = MatrixSymbol::from_loop(&SU2Loop::identity(&setup.model, n));
        c.run("cocycle c(g,I)", cocycle_at(spin, &g, &id, section), |c, v| {
            c.eq("cocycle c(g,I)", v == C64::new(1.0, 0.0), format!("{v}"));
        });
        let k1s = MatrixSymbol::from_loop(&loops.k1.star());
        let k2 = MatrixSymbol::from_loop(&loops.k2);
        c.run("cocycle c(k1*,k2)", cocycle_at(spin, &k1s, &k2, section), |c, v| {
            c.le("cocycle c(k1*,k2)", (v - 1.0).norm(), limit(t.cocycle));
        });
        if !torus {
            c.run("partial indices", partial_indices(&loops.g, n), |c, p| {
                c.eq("partial indices (0,0)", p.indices == vec![0, 0], format!("{:?}", p.indices));
            });
        }
        all.extend(c.out);
    }
    for (name, k) in extra {
        let mut c = Checks {
            family: usize::MAX,
            out: Vec::new(),
        };
        c.run(&format!("det {name}"), det_a_ainv(spin, &MatrixSymbol::from_loop(k), &config.sizes), |c, r| {
            c.le(&format!("det {name} extrapolation error"), r.error, limit(t.factorized_det));
        });
        all.extend(c.out);
    }
    Ok(VerifyReport {
        passed: all.iter().all(|c| c.passed),
        config: config.clone(),
        generator: GENERATOR,
        families,
        checks: all,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipticReport {
    pub model: ModelDescriptor,
    pub spin: SpinLabel,
    pub dk_residues: [C64; 2],
    pub dk_periods: Vec<C64>,
    pub dk_zeros: Vec<C64>,
    pub zero_mode_dimension: usize,
    pub decompose_idempotence: f64,
    pub map_unimodularity: f64,
    pub frame_sigma_min: f64,
    pub smoothing_ratio: f64,
    pub kn_band: Option<BandReport>,
    pub kn_note: String,
}

pub fn run_elliptic_report(config: &ExperimentConfig) -> Result<EllipticReport> {
    let setup = config.setup()?;
    let m = &setup.model;
    let e = m
        .elliptic()
        .ok_or_else(|| Error::WrongModel("elliptic-report needs an elliptic model".into()))?;
    let n = config.truncation;
    let f = m.sample(n, |u| {
        let w = (C64::new(0.0, 2.0 * std::f64::consts::PI) * u).exp();
        w + 0.3 / (w * w)
    });
    let d = m.decompose(&f)?;
    let mut idem = 0.0f64;
    for part in [Part::Minus, Part::Zero, Part::Plus] {
        let again = m.decompose(d.part(part))?;
        idem = idem.max(again.part(part).distance(d.part(part)));
    }
    let z = m.equivariant_map();
    let mut unimod = 0.0f64;
    for circle in 0..2 {
        for j in 0..64 {
            let p = m.boundary_point(circle, j as f64 / 64.0);
            unimod = unimod.max((z.eval(p).norm() - 1.0).abs());
        }
    }
    let smoothing = smoothing_profile(&setup.spin, 4 * n.min(64), 24)?;
    let (kn_band, kn_note) = match kn_bandwidth_check(&setup.spin, KnFunction { index: 1.5 }) {
        Ok(b) => (Some(b), String::new()),
        Err(err) => (None, err.to_string()),
    };
    Ok(EllipticReport {
        model: m.descriptor(),
        spin: setup.spin.label,
        dk_residues: [
            m.dk_residue(e.basepoint, 0.05, 256),
            m.dk_residue(e.reflected_basepoint, 0.05, 256),
        ],
        dk_periods: m.dk_periods(),
        dk_zeros: m.dk_zeros(),
        zero_mode_dimension: m.zero_modes(n).dimension,
        decompose_idempotence: idem,
        map_unimodularity: unimod,
        frame_sigma_min: setup.spin.frame_sigma_min,
        smoothing_ratio: smoothing.fitted_ratio,
        kn_band,
        kn_note,
    })
}

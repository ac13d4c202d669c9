//! Two-subspace dressed-state algebra and the static dressed spectrum.
//!
//! An x-polarized tone near the hyperfine splitting simultaneously drives
//! the two near-degenerate transitions `|F−,m⟩ ↔ |F+,m±1⟩` (subspace `a`)
//! and `|F−,m±1⟩ ↔ |F+,m⟩` (subspace `b`). Each subspace carries a Rabi
//! frequency `Ω_α`, a dressed splitting `Δ_α = sqrt(Ω_α² + δ_α²)`, and a
//! mixing angle `tan θ_α = Ω_α / δ_α`.
//!
//! The two-subspace model deliberately excludes the off-resonant
//! couplings to all other `m_F` states; [`DressedSpectrum`] keeps them,
//! providing the operational dressed energies used to calibrate drive
//! frequencies and to feed the full-dynamics oracle.

use crate::atomstruct::{IonSpecies, LevelDiagram, SpinAxis};
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::spin::StateLabel;
use crate::units::MU_B;
use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Which neighbouring `m_F` states the dressing tone couples the target
/// `m_F` to: `Plus` pairs it with `m_F + 1`, `Minus` with `m_F - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    /// Doubled `m_F` offset of the partner states.
    pub fn two_offset(self) -> i32 {
        match self {
            Branch::Plus => 2,
            Branch::Minus => -2,
        }
    }
}

/// The two simultaneously driven two-level subspaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubspaceId {
    A,
    B,
}

/// One dressing tone: x-polarized amplitude, signed detuning
/// (`δ > 0` is red detuned), target `m_F`, branch, and the derived
/// carrier frequency `ω_pair,a − δ`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DressingConfig {
    pub b_d_gauss: f64,
    /// Detuning from the subspace-`a` pair transition, rad/s; positive = red.
    pub delta: f64,
    /// Doubled target `m_F` (the `m_F` of the subspace-`a` lower state).
    pub two_mf: i32,
    pub branch: Branch,
    /// Carrier angular frequency, rad/s.
    pub carrier: f64,
}

impl DressingConfig {
    /// Derive the carrier from the pair-`a` transition of `diagram` and
    /// validate the subspace labels exist.
    pub fn new(
        diagram: &LevelDiagram,
        b_d_gauss: f64,
        delta: f64,
        two_mf: i32,
        branch: Branch,
    ) -> Result<Self> {
        if b_d_gauss < 0.0 || !b_d_gauss.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "dressing amplitude must be a non-negative field, got {b_d_gauss} G"
            )));
        }
        let species = diagram.species();
        let (pair_a, pair_b) = subspace_labels(species, two_mf, branch)?;
        for l in [pair_a.0, pair_a.1, pair_b.0, pair_b.1] {
            diagram.level_index(l)?;
        }
        let pair_freq = diagram.transition_frequency(pair_a.0, pair_a.1)?;
        let carrier = pair_freq - delta;
        if carrier <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "carrier frequency must be positive, got {carrier} rad/s"
            )));
        }
        Ok(DressingConfig {
            b_d_gauss,
            delta,
            two_mf,
            branch,
            carrier,
        })
    }

    /// Subspace state pairs `((lower_a, upper_a), (lower_b, upper_b))`.
    pub fn pairs(&self, species: &IonSpecies) -> Result<(LabelPair, LabelPair)> {
        subspace_labels(species, self.two_mf, self.branch)
    }

    /// Scale the field amplitude, keeping carrier and detuning fixed.
    pub fn scaled(&self, factor: f64) -> Self {
        DressingConfig {
            b_d_gauss: self.b_d_gauss * factor,
            ..*self
        }
    }
}

/// `(lower = |F−,·⟩, upper = |F+,·⟩)` labels of one subspace.
pub type LabelPair = (StateLabel, StateLabel);

fn subspace_labels(
    species: &IonSpecies,
    two_mf: i32,
    branch: Branch,
) -> Result<(LabelPair, LabelPair)> {
    let two_f_up = species.two_f_upper();
    let two_f_dn = species.two_f_lower().ok_or_else(|| {
        Error::InvalidConfig("dressing requires two hyperfine manifolds (I >= 1/2)".into())
    })?;
    let partner = two_mf + branch.two_offset();
    let mk = |two_f: u32, two_m: i32| -> Result<StateLabel> {
        if two_m.unsigned_abs() > two_f {
            return Err(Error::UnknownLabel(StateLabel::from_doubled(two_f, two_m)));
        }
        Ok(StateLabel::from_doubled(two_f, two_m))
    };
    let pair_a = (mk(two_f_dn, two_mf)?, mk(two_f_up, partner)?);
    let pair_b = (mk(two_f_dn, partner)?, mk(two_f_up, two_mf)?);
    Ok((pair_a, pair_b))
}

/// One driven two-level subspace with its dressed parameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DressedSubspace {
    pub id: SubspaceId,
    pub lower: StateLabel,
    pub upper: StateLabel,
    /// Rabi frequency `Ω ≥ 0`, rad/s.
    pub rabi: f64,
    /// Signed detuning of this pair from the carrier, rad/s.
    pub detuning: f64,
    /// `Δ = sqrt(Ω² + δ²)`, rad/s.
    pub splitting: f64,
    /// `θ = atan2(Ω, δ)`, radians in `[0, π]`.
    pub mixing_angle: f64,
}

/// `(Δ, θ)` from `(Ω, δ)`: `Δ = sqrt(Ω² + δ²)`, `θ = atan2(Ω, δ)`.
///
/// Blue-detuned subspaces come out with `θ` near `π` rather than a
/// sign-flipped `Ω`, which keeps adiabatic state tracking monotone in the
/// ramp envelope.
pub fn subspace_params(rabi: f64, detuning: f64) -> Result<(f64, f64)> {
    if rabi == 0.0 && detuning == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    Ok((rabi.hypot(detuning), rabi.atan2(detuning)))
}

fn rabi_from_matrix_element(
    b_d_gauss: f64,
    g_j: f64,
    element: C64,
    s1: StateLabel,
    s2: StateLabel,
) -> Result<f64> {
    if element.norm() < 1e-12 {
        return Err(Error::ForbiddenTransition {
            s1,
            s2,
            element: element.norm(),
        });
    }
    Ok(MU_B * g_j * b_d_gauss * element.norm())
}

/// Rabi frequencies `(Ω_a, Ω_b)` of the two subspaces,
/// `Ω_α = mu_B g_J B_D |⟨s1|J_x|s2⟩|`.
pub fn rabi_frequencies(diagram: &LevelDiagram, config: &DressingConfig) -> Result<(f64, f64)> {
    let species = diagram.species();
    let (pair_a, pair_b) = config.pairs(species)?;
    let el_a = diagram.matrix_element(SpinAxis::X, pair_a.1, pair_a.0)?;
    let el_b = diagram.matrix_element(SpinAxis::X, pair_b.1, pair_b.0)?;
    Ok((
        rabi_from_matrix_element(config.b_d_gauss, species.g_j, el_a, pair_a.1, pair_a.0)?,
        rabi_from_matrix_element(config.b_d_gauss, species.g_j, el_b, pair_b.1, pair_b.0)?,
    ))
}

/// Build both dressed subspaces from a diagram and a dressing config.
///
/// Each pair's detuning is measured from the carrier against the actual
/// transition frequency, so with an exact diagram the `b` subspace picks
/// up the quadratic pair splitting; on a linearized diagram both
/// detunings equal `config.delta`.
pub fn dressed_subspaces(
    diagram: &LevelDiagram,
    config: &DressingConfig,
) -> Result<[DressedSubspace; 2]> {
    let species = diagram.species();
    let (pair_a, pair_b) = config.pairs(species)?;
    let (rabi_a, rabi_b) = if config.b_d_gauss == 0.0 {
        (0.0, 0.0)
    } else {
        rabi_frequencies(diagram, config)?
    };
    let build = |id, (lower, upper): LabelPair, rabi: f64| -> Result<DressedSubspace> {
        let detuning = diagram.transition_frequency(lower, upper)? - config.carrier;
        let (splitting, mixing_angle) = subspace_params(rabi, detuning)?;
        Ok(DressedSubspace {
            id,
            lower,
            upper,
            rabi,
            detuning,
            splitting,
            mixing_angle,
        })
    };
    Ok([
        build(SubspaceId::A, pair_a, rabi_a)?,
        build(SubspaceId::B, pair_b, rabi_b)?,
    ])
}

/// AC Zeeman shift of the subspace's *upper* (`F+`) state under adiabatic
/// dressing: `sign(δ) (Δ − |δ|) / 2`.
///
/// Equals the `(Δ − δ)/2` of the dressed-frame σ_z Hamiltonian for red
/// detuning; the sign convention follows the eigenvalue branch adiabatically
/// connected to the bare state, so the shift vanishes continuously as
/// `B_D → 0` for either detuning sign, and blue detuning pushes the pair
/// together.
pub fn dressed_shift(sub: &DressedSubspace) -> f64 {
    let s = if sub.detuning > 0.0 {
        1.0
    } else if sub.detuning < 0.0 {
        -1.0
    } else {
        return 0.0;
    };
    s * (sub.splitting - sub.detuning.abs()) / 2.0
}

/// The diagonal dressed-frame shift Hamiltonian: `±(Δ_α − δ)/2` on each
/// subspace's two states (upper `+`, lower `−`), rad/s per label.
pub fn dressed_shift_hamiltonian(
    sub_a: &DressedSubspace,
    sub_b: &DressedSubspace,
) -> [(StateLabel, f64); 4] {
    let sa = dressed_shift(sub_a);
    let sb = dressed_shift(sub_b);
    [
        (sub_a.upper, sa),
        (sub_a.lower, -sa),
        (sub_b.upper, sb),
        (sub_b.lower, -sb),
    ]
}

/// `U_D = U_δ† U_θ U_δ` on one subspace, in the `(upper, lower)` basis.
///
/// `U_δ = exp(i δ t σ_z)` and `U_θ = exp(−i (θ/2) σ_y)`.
pub fn dressing_unitary(sub: &DressedSubspace, t: f64) -> Matrix2<C64> {
    let (c, s) = ((sub.mixing_angle / 2.0).cos(), (sub.mixing_angle / 2.0).sin());
    let u_theta = Matrix2::new(
        C64::new(c, 0.0),
        C64::new(-s, 0.0),
        C64::new(s, 0.0),
        C64::new(c, 0.0),
    );
    let phase = sub.detuning * t;
    let u_delta = Matrix2::from_diagonal(&nalgebra::Vector2::new(
        C64::from_polar(1.0, phase),
        C64::from_polar(1.0, -phase),
    ));
    u_delta.adjoint() * u_theta * u_delta
}

/// Full-manifold `Û_D(t)`: block-diagonal, identity outside the two
/// subspaces, expressed in the diagram's labeled eigenbasis.
pub fn dressing_unitary_full(
    diagram: &LevelDiagram,
    sub_a: &DressedSubspace,
    sub_b: &DressedSubspace,
    t: f64,
) -> Result<DMatrix<C64>> {
    let dim = diagram.dimension();
    let mut u = DMatrix::<C64>::identity(dim, dim);
    for sub in [sub_a, sub_b] {
        let iu = diagram.level_index(sub.upper)?;
        let il = diagram.level_index(sub.lower)?;
        let u2 = dressing_unitary(sub, t);
        u[(iu, iu)] = u2[(0, 0)];
        u[(iu, il)] = u2[(0, 1)];
        u[(il, iu)] = u2[(1, 0)];
        u[(il, il)] = u2[(1, 1)];
    }
    Ok(u)
}

/// Conjugate a target Hamiltonian (labeled-eigenbasis matrix) into the
/// dressed basis: `Û_D† H Û_D`.
pub fn transform_to_dressed_basis(
    h_target: &DMatrix<C64>,
    diagram: &LevelDiagram,
    sub_a: &DressedSubspace,
    sub_b: &DressedSubspace,
    t: f64,
) -> Result<DMatrix<C64>> {
    let dim = diagram.dimension();
    if h_target.nrows() != dim || h_target.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: h_target.nrows(),
        });
    }
    let u = dressing_unitary_full(diagram, sub_a, sub_b, t)?;
    Ok(u.adjoint() * h_target * u)
}

/// Static dressed spectrum in the carrier rotating frame, keeping the
/// off-resonant couplings to *all* `m_F` states (everything the
/// two-subspace model drops, short of counter-rotating terms).
///
/// `K(f) = diag(E_i − ω_μ [i ∈ F+]) + f · W` with `W` the cross-manifold
/// part of `(mu_B B_D / 2)(g_J J_x + g_I I_x)` in the labeled eigenbasis.
/// Its adiabatic eigenvalues give the operational dressed energies that a
/// frequency-calibrated protocol drives against.
#[derive(Clone, Debug)]
pub struct DressedSpectrum {
    k0: DVector<f64>,
    w: DMatrix<C64>,
    labels: Vec<StateLabel>,
    carrier: f64,
    /// reference frames along f in [0, 1] for adiabatic tracking
    path: Vec<AdiabaticFrame>,
}

/// Eigen data at one envelope value, columns indexed by *bare level*.
#[derive(Clone, Debug)]
pub struct AdiabaticFrame {
    pub f: f64,
    /// Dressed energy of the state adiabatically connected to bare level `i`.
    pub energies: Vec<f64>,
    /// Eigenvectors as columns, column `i` connected to bare level `i`.
    pub vectors: DMatrix<C64>,
}

const PATH_STEPS: usize = 40;

impl DressedSpectrum {
    pub fn build(diagram: &LevelDiagram, config: &DressingConfig) -> Result<Self> {
        let species = diagram.species();
        let dim = diagram.dimension();
        let two_f_up = species.two_f_upper();
        let labels = diagram.labels().to_vec();

        let mut k0 = DVector::<f64>::zeros(dim);
        for (i, &label) in labels.iter().enumerate() {
            let e = diagram.energies()[i];
            k0[i] = if label.two_f == two_f_up {
                e - config.carrier
            } else {
                e
            };
        }

        let coupling = diagram.coupling_operator(SpinAxis::X);
        let amp = C64::new(MU_B * config.b_d_gauss / 2.0, 0.0);
        let mut w = DMatrix::<C64>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                if (labels[i].two_f == two_f_up) != (labels[j].two_f == two_f_up) {
                    w[(i, j)] = amp * coupling[(i, j)];
                }
            }
        }

        let mut spectrum = DressedSpectrum {
            k0,
            w,
            labels,
            carrier: config.carrier,
            path: Vec::new(),
        };
        spectrum.path = spectrum.trace_path()?;
        Ok(spectrum)
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    pub fn labels(&self) -> &[StateLabel] {
        &self.labels
    }

    /// Bare (f = 0) carrier-frame energies, indexed by level.
    pub fn bare_energies(&self) -> &DVector<f64> {
        &self.k0
    }

    /// Cross-manifold coupling matrix at full envelope.
    pub fn coupling(&self) -> &DMatrix<C64> {
        &self.w
    }

    fn k_at(&self, f: f64) -> DMatrix<C64> {
        let dim = self.k0.len();
        let mut k = self.w.map(|z| z * C64::new(f, 0.0));
        for i in 0..dim {
            k[(i, i)] += C64::new(self.k0[i], 0.0);
        }
        k
    }

    fn trace_path(&self) -> Result<Vec<AdiabaticFrame>> {
        let dim = self.k0.len();
        let mut frames = Vec::with_capacity(PATH_STEPS + 1);
        frames.push(AdiabaticFrame {
            f: 0.0,
            energies: self.k0.iter().copied().collect(),
            vectors: DMatrix::identity(dim, dim),
        });
        for step in 1..=PATH_STEPS {
            let f = step as f64 / PATH_STEPS as f64;
            let prev = frames.last().unwrap();
            frames.push(self.continue_frame(prev, f)?);
        }
        Ok(frames)
    }

    fn continue_frame(&self, reference: &AdiabaticFrame, f: f64) -> Result<AdiabaticFrame> {
        let dim = self.k0.len();
        let (vals, vecs) = hermitian_eigen(&self.k_at(f));
        // match new eigenvectors to the reference columns, largest overlap first
        let overlap = reference.vectors.adjoint() * &vecs;
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(dim * dim);
        for lvl in 0..dim {
            for col in 0..dim {
                pairs.push((overlap[(lvl, col)].norm(), lvl, col));
            }
        }
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut lvl_taken = vec![false; dim];
        let mut col_taken = vec![false; dim];
        let mut assign = vec![usize::MAX; dim];
        let mut assigned = 0;
        for (_, lvl, col) in pairs {
            if lvl_taken[lvl] || col_taken[col] {
                continue;
            }
            lvl_taken[lvl] = true;
            col_taken[col] = true;
            assign[lvl] = col;
            assigned += 1;
            if assigned == dim {
                break;
            }
        }
        let mut energies = vec![0.0; dim];
        let mut vectors = DMatrix::<C64>::zeros(dim, dim);
        for lvl in 0..dim {
            let col = assign[lvl];
            energies[lvl] = vals[col];
            // parallel-transport gauge: overlap with the reference column real positive
            let ov = overlap[(lvl, col)];
            let phase = if ov.norm() > 0.0 {
                ov.conj() / ov.norm()
            } else {
                C64::new(1.0, 0.0)
            };
            let v: DVector<C64> = vecs.column(col).map(|z| z * phase);
            vectors.set_column(lvl, &v);
        }
        Ok(AdiabaticFrame { f, energies, vectors })
    }

    /// Adiabatic frame at envelope value `f ∈ [0, 1]`: exact eigen-solve
    /// continued from the nearest precomputed path point.
    pub fn frame_at(&self, f: f64) -> Result<AdiabaticFrame> {
        let clamped = f.clamp(0.0, 1.0);
        let idx = ((clamped * PATH_STEPS as f64).round() as usize).min(PATH_STEPS);
        let near = &self.path[idx];
        if (near.f - clamped).abs() < 1e-12 {
            return Ok(near.clone());
        }
        self.continue_frame(near, clamped)
    }

    /// Dressed energy (in the carrier frame) of the state adiabatically
    /// connected to `label`, at full envelope.
    pub fn dressed_energy(&self, label: StateLabel) -> Result<f64> {
        let i = self.level_index(label)?;
        Ok(self.path[PATH_STEPS].energies[i])
    }

    /// AC shift of `label` at full envelope: dressed minus bare energy.
    pub fn shift_of(&self, label: StateLabel) -> Result<f64> {
        let i = self.level_index(label)?;
        Ok(self.path[PATH_STEPS].energies[i] - self.k0[i])
    }

    /// Operational splitting `E(upper) − E(lower)` between two dressed
    /// states at full envelope, rad/s (carrier-frame energies).
    pub fn dressed_splitting(&self, lower: StateLabel, upper: StateLabel) -> Result<f64> {
        Ok(self.dressed_energy(upper)? - self.dressed_energy(lower)?)
    }

    pub fn level_index(&self, label: StateLabel) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .ok_or(Error::UnknownLabel(label))
    }
}

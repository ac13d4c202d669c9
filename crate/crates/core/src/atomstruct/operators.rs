//! Angular-momentum operator construction in the uncoupled product basis.

use crate::error::{Error, Result};
use crate::spin::HalfSpin;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// The three operator matrices for a single spin, in the `|m⟩` basis with
/// `m` ascending.
pub fn spin_matrices(s: HalfSpin) -> (DMatrix<C64>, DMatrix<C64>, DMatrix<C64>) {
    let dim = s.multiplicity();
    let sv = s.value();
    let mut sz = DMatrix::<C64>::zeros(dim, dim);
    let mut sp = DMatrix::<C64>::zeros(dim, dim);
    for (k, two_m) in s.projections().enumerate() {
        let m = two_m as f64 / 2.0;
        sz[(k, k)] = C64::new(m, 0.0);
        if k + 1 < dim {
            // ladder: S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>
            sp[(k + 1, k)] = C64::new((sv * (sv + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let sm = sp.adjoint();
    let sx = (&sp + &sm).map(|z| z * C64::new(0.5, 0.0));
    let sy = (&sp - &sm).map(|z| z * C64::new(0.0, -0.5));
    (sx, sy, sz)
}

/// `Î` and `Ĵ` vector operators on the product space `|m_I⟩ ⊗ |m_J⟩`.
///
/// Basis ordering is `index = i_I * (2J+1) + i_J` with both projections
/// ascending, so `two_mf[index] = 2 m_I + 2 m_J`.
#[derive(Clone, Debug)]
pub struct SpinOperatorSet {
    pub nuclear_spin: HalfSpin,
    pub electron_spin: HalfSpin,
    pub ix: DMatrix<C64>,
    pub iy: DMatrix<C64>,
    pub iz: DMatrix<C64>,
    pub jx: DMatrix<C64>,
    pub jy: DMatrix<C64>,
    pub jz: DMatrix<C64>,
    /// Doubled total projection `2 m_F` per basis index.
    pub two_mf: Vec<i32>,
}

impl SpinOperatorSet {
    pub fn dim(&self) -> usize {
        self.two_mf.len()
    }

    /// `I · J`.
    pub fn i_dot_j(&self) -> DMatrix<C64> {
        &self.ix * &self.jx + &self.iy * &self.jy + &self.iz * &self.jz
    }
}

/// Build the operator set for nuclear spin `I` and electron spin `J`.
///
/// `HalfSpin` already guarantees `2I` and `2J` are non-negative integers;
/// use [`HalfSpin::new`] to validate raw floating-point input.
pub fn build_spin_operators(nuclear_spin: HalfSpin, electron_spin: HalfSpin) -> SpinOperatorSet {
    let (ix1, iy1, iz1) = spin_matrices(nuclear_spin);
    let (jx1, jy1, jz1) = spin_matrices(electron_spin);
    let di = nuclear_spin.multiplicity();
    let dj = electron_spin.multiplicity();
    let eye_i = DMatrix::<C64>::identity(di, di);
    let eye_j = DMatrix::<C64>::identity(dj, dj);

    let mut two_mf = Vec::with_capacity(di * dj);
    for two_mi in nuclear_spin.projections() {
        for two_mj in electron_spin.projections() {
            two_mf.push(two_mi + two_mj);
        }
    }

    SpinOperatorSet {
        nuclear_spin,
        electron_spin,
        ix: ix1.kronecker(&eye_j),
        iy: iy1.kronecker(&eye_j),
        iz: iz1.kronecker(&eye_j),
        jx: eye_i.kronecker(&jx1),
        jy: eye_i.kronecker(&jy1),
        jz: eye_i.kronecker(&jz1),
        two_mf,
    }
}

/// Validating wrapper taking raw spin values.
pub fn build_spin_operators_checked(nuclear_spin: f64, electron_spin: f64) -> Result<SpinOperatorSet> {
    let i = HalfSpin::new(nuclear_spin).map_err(|_| Error::InvalidSpin { value: nuclear_spin })?;
    let j = HalfSpin::new(electron_spin).map_err(|_| Error::InvalidSpin { value: electron_spin })?;
    Ok(build_spin_operators(i, j))
}

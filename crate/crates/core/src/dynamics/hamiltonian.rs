//! Time-dependent Hamiltonian assembly in the lab or rotating frame.

use super::envelope::{PulseSchedule, ScheduledTone};
use crate::atomstruct::LevelDiagram;
use crate::error::{Error, Result};
use crate::units::MU_B;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Reference frame for propagation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Rotating with respect to the diagonal of `H_0`: static energies
    /// removed, couplings carry `e^{i Δ_ij t}` phases.
    Rotating,
    /// Full static Hamiltonian plus bare oscillating drives.
    Lab,
}

/// Rotating-wave handling for the rotating frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RwaMode {
    /// Drop components oscillating faster than half the fastest carrier.
    On,
    /// Keep every component, counter-rotating terms included.
    Off,
    /// Drop components faster than an explicit cutoff (rad/s).
    Cutoff(f64),
}

/// Anything the steppers can integrate: a Hermitian `H(t)` with a known
/// fastest oscillation.
pub trait TimeDependentHamiltonian {
    fn dim(&self) -> usize;
    /// Fastest oscillation present (rad/s); bounds the integrator step.
    fn max_frequency(&self) -> f64;
    /// Evaluate `H(t)` into `out` (rad/s); `env_buf` is scratch.
    fn eval_into(&self, t: f64, out: &mut DMatrix<C64>, env_buf: &mut Vec<f64>);
}

#[derive(Clone, Copy, Debug)]
struct Component {
    i: usize,
    j: usize,
    tone: usize,
    amp: C64,
    freq: f64,
}

/// Assembled `H(t)` as a static diagonal plus per-tone oscillating
/// components; evaluation is allocation-free.
#[derive(Clone, Debug)]
pub struct HamiltonianFn {
    dim: usize,
    static_diag: DVector<f64>,
    components: Vec<Component>,
    tones: Vec<ScheduledTone>,
    max_freq: f64,
}

/// Build `H(t)` from a diagram and schedule.
///
/// Tones couple through `mu_B B (g_J J_pol + g_I I_pol) cos(ω t + φ)`,
/// expressed in the labeled eigenbasis. The nuclear term is kept even
/// though its effect is down by `g_I/g_J`; the full model should be a
/// superset of the effective one.
pub fn build_hamiltonian_fn(
    diagram: &LevelDiagram,
    schedule: &PulseSchedule,
    frame: Frame,
    rwa: RwaMode,
) -> Result<HamiltonianFn> {
    schedule.validate()?;
    let dim = diagram.dimension();
    let energies = diagram.energies();

    let cutoff = match (frame, rwa) {
        (Frame::Lab, RwaMode::On | RwaMode::Cutoff(_)) => {
            return Err(Error::InvalidConfig(
                "the rotating-wave approximation only applies in the rotating frame".into(),
            ))
        }
        (Frame::Lab, RwaMode::Off) | (Frame::Rotating, RwaMode::Off) => f64::INFINITY,
        (Frame::Rotating, RwaMode::On) => 0.5 * schedule.max_carrier(),
        (Frame::Rotating, RwaMode::Cutoff(c)) => c,
    };

    let static_diag = match frame {
        Frame::Lab => DVector::from_iterator(dim, energies.iter().copied()),
        Frame::Rotating => DVector::zeros(dim),
    };

    let mut components = Vec::new();
    for (tone_idx, st) in schedule.tones.iter().enumerate() {
        let coupling = diagram.coupling_operator(st.tone.polarization);
        let c = MU_B * st.tone.amplitude_gauss / 2.0;
        let phase = C64::from_polar(1.0, st.tone.phase);
        let omega = st.tone.frequency;
        for i in 0..dim {
            for j in i..dim {
                let m = coupling[(i, j)];
                if m.norm() < 1e-14 {
                    continue;
                }
                let amp_plus = m * phase * C64::new(c, 0.0);
                let amp_minus = m * phase.conj() * C64::new(c, 0.0);
                match frame {
                    Frame::Lab => {
                        // diagonal entries need only the +ω component; the
                        // Hermitian mirror supplies e^{-iωt}
                        components.push(Component { i, j, tone: tone_idx, amp: amp_plus, freq: omega });
                        if i != j {
                            components.push(Component { i, j, tone: tone_idx, amp: amp_minus, freq: -omega });
                        }
                    }
                    Frame::Rotating => {
                        let delta_ij = energies[i] - energies[j];
                        for (amp, freq) in [(amp_plus, delta_ij + omega), (amp_minus, delta_ij - omega)] {
                            if i == j && freq < 0.0 {
                                // mirror supplies the conjugate half
                                continue;
                            }
                            if freq.abs() <= cutoff {
                                components.push(Component { i, j, tone: tone_idx, amp, freq });
                            }
                        }
                    }
                }
            }
        }
    }

    let max_freq = components
        .iter()
        .map(|c| c.freq.abs())
        .fold(match frame {
            Frame::Lab => energies.iter().fold(0.0f64, |a, &e| a.max(e.abs())),
            Frame::Rotating => 0.0,
        }, f64::max);

    Ok(HamiltonianFn {
        dim,
        static_diag,
        components,
        tones: schedule.tones.clone(),
        max_freq,
    })
}

impl HamiltonianFn {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// Convenience allocating evaluation.
    pub fn eval(&self, t: f64) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        let mut buf = Vec::new();
        self.eval_into(t, &mut out, &mut buf);
        out
    }
}

impl TimeDependentHamiltonian for HamiltonianFn {
    fn dim(&self) -> usize {
        self.dim
    }

    fn max_frequency(&self) -> f64 {
        self.max_freq
    }

    fn eval_into(&self, t: f64, out: &mut DMatrix<C64>, env_buf: &mut Vec<f64>) {
        out.fill(C64::new(0.0, 0.0));
        for k in 0..self.dim {
            out[(k, k)] = C64::new(self.static_diag[k], 0.0);
        }
        env_buf.clear();
        env_buf.extend(self.tones.iter().map(|st| st.envelope_value(t)));
        for comp in &self.components {
            let f = env_buf[comp.tone];
            if f == 0.0 {
                continue;
            }
            let a = comp.amp * C64::from_polar(f, comp.freq * t);
            out[(comp.i, comp.j)] += a;
            out[(comp.j, comp.i)] += a.conj();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomstruct::{IonSpecies, SpinAxis};
    use crate::dynamics::envelope::{DriveTone, Envelope, ToneRole};
    use crate::linalg::hermiticity_residual;
    use crate::spin::StateLabel;
    use crate::units;

    fn schedule_with(pol: SpinAxis, freq: f64) -> PulseSchedule {
        PulseSchedule::new(
            vec![ScheduledTone {
                tone: DriveTone {
                    polarization: pol,
                    amplitude_gauss: 0.5,
                    frequency: freq,
                    phase: 0.3,
                    envelope: Envelope::Flat,
                    role: ToneRole::Dressing,
                },
                start: 0.0,
                stop: 1e-4,
            }],
            1e-4,
        )
        .unwrap()
    }

    #[test]
    fn no_tones_is_static() {
        let species = IonSpecies::ba137();
        let d = LevelDiagram::at_field(&species, 2.0).unwrap();
        let schedule = PulseSchedule::new(vec![], 1e-5).unwrap();
        let hfn = build_hamiltonian_fn(&d, &schedule, Frame::Lab, RwaMode::Off).unwrap();
        let h0 = hfn.eval(0.0);
        let h1 = hfn.eval(3.7e-6);
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(h0[(i, j)], h1[(i, j)]);
                let expect = if i == j { d.energies()[i] } else { 0.0 };
                assert!((h0[(i, j)] - C64::new(expect, 0.0)).norm() < 1e-9);
            }
        }
        // rotating frame removes the diagonal entirely
        let hfn_rot = build_hamiltonian_fn(&d, &schedule, Frame::Rotating, RwaMode::Off).unwrap();
        assert!(hfn_rot.eval(1e-6).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn z_tone_couples_only_matching_mf() {
        let species = IonSpecies::ba137();
        let d = LevelDiagram::at_field(&species, 2.0).unwrap();
        let schedule = schedule_with(SpinAxis::Z, species.omega_0);
        let hfn = build_hamiltonian_fn(&d, &schedule, Frame::Rotating, RwaMode::Off).unwrap();
        let h = hfn.eval(1.3e-7);
        assert!(hermiticity_residual(&h) < 1e-9);
        let labels = d.labels();
        for i in 0..8 {
            for j in 0..8 {
                if labels[i].two_mf != labels[j].two_mf {
                    assert!(
                        h[(i, j)].norm() < 1e-12,
                        "z drive coupled {} to {}",
                        labels[i],
                        labels[j]
                    );
                }
            }
        }
    }

    #[test]
    fn rwa_removes_fast_components() {
        let species = IonSpecies::ba137();
        let d = LevelDiagram::at_field(&species, 2.0).unwrap();
        let schedule = schedule_with(SpinAxis::X, species.omega_0 + units::mhz(1.4));
        let full = build_hamiltonian_fn(&d, &schedule, Frame::Rotating, RwaMode::Off).unwrap();
        let rwa = build_hamiltonian_fn(&d, &schedule, Frame::Rotating, RwaMode::On).unwrap();
        assert!(rwa.component_count() < full.component_count());
        assert!(rwa.max_frequency() < units::mhz(100.0));
        assert!(full.max_frequency() > units::ghz(10.0));
        // the kept components are the near-degenerate cross-manifold pairs:
        // the coupling of |1,0> to |2,1> survives
        let h = rwa.eval(0.0);
        let i10 = d.level_index(StateLabel::new(1, 0)).unwrap();
        let i21 = d.level_index(StateLabel::new(2, 1)).unwrap();
        assert!(h[(i10, i21)].norm() > 0.0);
    }

    #[test]
    fn lab_frame_rejects_rwa() {
        let species = IonSpecies::ba137();
        let d = LevelDiagram::at_field(&species, 2.0).unwrap();
        let schedule = schedule_with(SpinAxis::X, species.omega_0);
        assert!(build_hamiltonian_fn(&d, &schedule, Frame::Lab, RwaMode::On).is_err());
    }

    #[test]
    fn lab_frame_tone_matches_direct_expression() {
        let species = IonSpecies::ba137();
        let d = LevelDiagram::at_field(&species, 2.0).unwrap();
        let schedule = schedule_with(SpinAxis::X, units::ghz(8.0));
        let hfn = build_hamiltonian_fn(&d, &schedule, Frame::Lab, RwaMode::Off).unwrap();
        let t = 2.43e-10;
        let h = hfn.eval(t);
        let coupling = d.coupling_operator(SpinAxis::X);
        let expect_factor = MU_B * 0.5 * (units::ghz(8.0) * t + 0.3).cos();
        for i in 0..8 {
            for j in 0..8 {
                let expect = if i == j {
                    C64::new(d.energies()[i], 0.0) + coupling[(i, j)] * expect_factor
                } else {
                    coupling[(i, j)] * expect_factor
                };
                assert!((h[(i, j)] - expect).norm() < 1e-6 * MU_B.max(1.0));
            }
        }
    }
}

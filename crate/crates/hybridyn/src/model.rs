//! Model definition: which operators couple the two-level system to the
//! classical oscillator.
//!
//! The generator is H = H_C(x, p) I + hq + x A + p B with the classical
//! part fixed to the unit harmonic oscillator H_C = (x^2 + p^2)/2. Linear
//! coupling is what keeps the corrected flow exactly equal to the
//! projected unitary dynamics, so A and B enter only as constant matrices.

use ndarray::Array2;

use crate::error::{HyError, HyResult};
use crate::fock;
use crate::qmat::Qm2;
use crate::C64;

#[derive(Clone, Copy, Debug)]
pub struct HybridModel {
    /// Bare two-level Hamiltonian.
    pub hq: Qm2,
    /// Operator coupled to the classical position.
    pub a_op: Qm2,
    /// Operator coupled to the classical momentum.
    pub b_op: Qm2,
}

impl HybridModel {
    pub fn new(hq: Qm2, a_op: Qm2, b_op: Qm2) -> HyResult<HybridModel> {
        for (name, op) in [("hq", &hq), ("a_op", &a_op), ("b_op", &b_op)] {
            let defect = op.hermitian_defect();
            if defect > 1e-12 {
                return Err(HyError::InvalidParam(format!(
                    "{name} must be Hermitian, defect {defect:.3e}"
                )));
            }
        }
        Ok(HybridModel { hq, a_op, b_op })
    }

    /// Momentum-coupled sigma3 model: the upper branch is dragged along +x,
    /// the lower along -x, with strength kappa.
    pub fn spin_oscillator(kappa: f64) -> HybridModel {
        HybridModel {
            hq: Qm2::zero(),
            a_op: Qm2::zero(),
            b_op: Qm2::sigma3() * kappa,
        }
    }

    /// Same coupling plus a bare two-level term given by its real Bloch
    /// components (c0, c1, c2, c3).
    pub fn with_bare_term(kappa: f64, hq_components: [f64; 4]) -> HybridModel {
        let comp = hq_components.map(|v| C64::new(v, 0.0));
        HybridModel {
            hq: Qm2::from_components(comp),
            a_op: Qm2::zero(),
            b_op: Qm2::sigma3() * kappa,
        }
    }

    /// Matrix part of the generator at a phase-space point. The scalar
    /// H_C I is omitted: it cancels in every commutator.
    pub fn h_matrix(&self, x: f64, p: f64) -> Qm2 {
        self.hq + self.a_op * x + self.b_op * p
    }

    /// Bound on the operator norms of the coupling matrices, used for the
    /// step-size guard.
    pub fn coupling_scale(&self) -> f64 {
        2.0 * self.a_op.max_abs().max(self.b_op.max_abs())
    }

    /// Full-quantum lift onto nf oscillator levels.
    pub fn lift(&self, nf: usize) -> HyResult<Array2<C64>> {
        fock::lift(nf, &self.hq, &self.a_op, &self.b_op)
    }
}

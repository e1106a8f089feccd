//! Truncated number-basis operators for the oscillator mode and the lift
//! of a hybrid model onto the oscillator (x) two-level tensor space.
//!
//! Layout convention everywhere: the composite index is 2*k + q where k is
//! the oscillator level and q the two-level index (q = 0 is the upper
//! state, matching the +1 eigenvector of sigma3).

use ndarray::{Array1, Array2};

use crate::error::{HyError, HyResult};
use crate::qmat::Qm2;
use crate::C64;

/// Lowering operator, a|k> = sqrt(k)|k-1>, truncated at nf levels.
pub fn annihilation(nf: usize) -> Array2<C64> {
    let mut a = Array2::zeros((nf, nf));
    for k in 1..nf {
        a[[k - 1, k]] = C64::new((k as f64).sqrt(), 0.0);
    }
    a
}

/// Position quadrature (a + a^dag)/sqrt(2).
pub fn position(nf: usize) -> Array2<C64> {
    let mut x = Array2::zeros((nf, nf));
    for k in 1..nf {
        let v = C64::new((k as f64 / 2.0).sqrt(), 0.0);
        x[[k - 1, k]] = v;
        x[[k, k - 1]] = v;
    }
    x
}

/// Momentum quadrature i(a^dag - a)/sqrt(2).
pub fn momentum(nf: usize) -> Array2<C64> {
    let mut p = Array2::zeros((nf, nf));
    for k in 1..nf {
        let v = (k as f64 / 2.0).sqrt();
        p[[k - 1, k]] = C64::new(0.0, -v);
        p[[k, k - 1]] = C64::new(0.0, v);
    }
    p
}

/// Number operator a^dag a = diag(0, 1, ..., nf-1).
pub fn number(nf: usize) -> Array2<C64> {
    let mut n = Array2::zeros((nf, nf));
    for k in 0..nf {
        n[[k, k]] = C64::new(k as f64, 0.0);
    }
    n
}

/// Kronecker product with the oscillator factor major: the (2i+q, 2j+r)
/// entry is fock[i,j] * spin[q][r].
pub fn kron_with_spin(fock: &Array2<C64>, spin: &Qm2) -> Array2<C64> {
    let nf = fock.nrows();
    let mut out = Array2::zeros((2 * nf, 2 * nf));
    for i in 0..nf {
        for j in 0..nf {
            let f = fock[[i, j]];
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for q in 0..2 {
                for r in 0..2 {
                    out[[2 * i + q, 2 * j + r]] = f * spin.m[q][r];
                }
            }
        }
    }
    out
}

/// Full lift of the hybrid generator: number operator for the oscillator
/// energy (the constant zero-point shift is dropped; it only adds a global
/// phase), plus x-coupled, p-coupled, and bare two-level parts.
pub fn lift(nf: usize, hq: &Qm2, a_op: &Qm2, b_op: &Qm2) -> HyResult<Array2<C64>> {
    if nf < 2 {
        return Err(HyError::InvalidParam(format!("Fock truncation must be at least 2, got {nf}")));
    }
    let eye_f: Array2<C64> = Array2::eye(nf);
    let mut h = kron_with_spin(&number(nf), &Qm2::identity());
    h = h + kron_with_spin(&position(nf), a_op);
    h = h + kron_with_spin(&momentum(nf), b_op);
    h = h + kron_with_spin(&eye_f, hq);
    Ok(h)
}

/// Monomial amplitudes v_k = z^k / sqrt(k!), without the Gaussian weight.
/// Multiplying by exp(-|z|^2/2) gives the normalized coherent expansion.
pub fn coherent_monomials(z: C64, nf: usize) -> Array1<C64> {
    let mut v = Array1::zeros(nf);
    let mut cur = C64::new(1.0, 0.0);
    v[0] = cur;
    for k in 1..nf {
        cur *= z / C64::new((k as f64).sqrt(), 0.0);
        v[k] = cur;
    }
    v
}

/// Normalized coherent-state amplitudes in the truncated basis.
pub fn coherent_amplitudes(z: C64, nf: usize) -> Array1<C64> {
    let w = (-z.norm_sqr() / 2.0).exp();
    coherent_monomials(z, nf).mapv(|v| v * w)
}

/// Fraction of the trace of a lifted density matrix sitting at or above
/// the given oscillator level. A fat tail means the truncation is biting.
pub fn tail_mass(rho: &Array2<C64>, nf: usize, level: usize) -> f64 {
    let mut tail = 0.0;
    let mut total = 0.0;
    for k in 0..nf {
        for q in 0..2 {
            let d = rho[[2 * k + q, 2 * k + q]].re;
            total += d;
            if k >= level {
                tail += d;
            }
        }
    }
    if total.abs() < f64::MIN_POSITIVE {
        return 0.0;
    }
    tail / total
}

/// Errors unless the top tenth of the truncated ladder holds less than
/// `limit` of the state's mass.
pub fn check_truncation_health(rho: &Array2<C64>, nf: usize, limit: f64) -> HyResult<()> {
    let level = ((0.9 * nf as f64).ceil() as usize).min(nf - 1);
    let tail = tail_mass(rho, nf, level);
    if tail >= limit {
        return Err(HyError::TruncationUnhealthy { tail, level, limit });
    }
    Ok(())
}

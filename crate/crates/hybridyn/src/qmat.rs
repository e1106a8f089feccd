//! Complex matrix utilities: fixed-size 2x2 blocks for the two-level
//! subsystem, and a cyclic Jacobi eigensolver for Hermitian matrices of
//! any size. The eigensolver is the backbone of the reference propagator,
//! so it is validated by reconstruction rather than trusted blindly.

use ndarray::Array2;

use crate::error::{HyError, HyResult};
use crate::C64;

/// Dense 2x2 complex matrix, row-major. Copy semantics keep the per-point
/// algebra in the evolvers allocation-free.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Qm2 {
    pub m: [[C64; 2]; 2],
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

impl Qm2 {
    pub fn new(m: [[C64; 2]; 2]) -> Qm2 {
        Qm2 { m }
    }

    pub fn zero() -> Qm2 {
        Qm2 { m: [[c(0.0, 0.0); 2]; 2] }
    }

    pub fn identity() -> Qm2 {
        Qm2::diag(c(1.0, 0.0), c(1.0, 0.0))
    }

    pub fn diag(d0: C64, d1: C64) -> Qm2 {
        Qm2 { m: [[d0, c(0.0, 0.0)], [c(0.0, 0.0), d1]] }
    }

    pub fn sigma1() -> Qm2 {
        Qm2 { m: [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]] }
    }

    pub fn sigma2() -> Qm2 {
        Qm2 { m: [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]] }
    }

    pub fn sigma3() -> Qm2 {
        Qm2::diag(c(1.0, 0.0), c(-1.0, 0.0))
    }

    /// c0*I + c1*s1 + c2*s2 + c3*s3.
    pub fn from_components(comp: [C64; 4]) -> Qm2 {
        let [c0, c1, c2, c3] = comp;
        let i = c(0.0, 1.0);
        Qm2 { m: [[c0 + c3, c1 - i * c2], [c1 + i * c2, c0 - c3]] }
    }

    /// Inverse of from_components; entries are real iff the matrix is Hermitian.
    pub fn components(&self) -> [C64; 4] {
        let m = &self.m;
        let half = c(0.5, 0.0);
        let i = c(0.0, 1.0);
        [
            (m[0][0] + m[1][1]) * half,
            (m[0][1] + m[1][0]) * half,
            (m[1][0] - m[0][1]) * half * (-i),
            (m[0][0] - m[1][1]) * half,
        ]
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn adjoint(&self) -> Qm2 {
        Qm2 {
            m: [
                [self.m[0][0].conj(), self.m[1][0].conj()],
                [self.m[0][1].conj(), self.m[1][1].conj()],
            ],
        }
    }

    pub fn hermitian_defect(&self) -> f64 {
        let d = *self - self.adjoint();
        d.m.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn commutator(&self, other: &Qm2) -> Qm2 {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Qm2) -> Qm2 {
        *self * *other + *other * *self
    }
}

impl std::ops::Add for Qm2 {
    type Output = Qm2;
    fn add(self, rhs: Qm2) -> Qm2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] += rhs.m[i][j];
            }
        }
        out
    }
}

impl std::ops::Sub for Qm2 {
    type Output = Qm2;
    fn sub(self, rhs: Qm2) -> Qm2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] -= rhs.m[i][j];
            }
        }
        out
    }
}

impl std::ops::Neg for Qm2 {
    type Output = Qm2;
    fn neg(self) -> Qm2 {
        self * -1.0
    }
}

impl std::ops::Mul for Qm2 {
    type Output = Qm2;
    fn mul(self, rhs: Qm2) -> Qm2 {
        let a = &self.m;
        let b = &rhs.m;
        Qm2 {
            m: [
                [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
                [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
            ],
        }
    }
}

impl std::ops::Mul<C64> for Qm2 {
    type Output = Qm2;
    fn mul(self, rhs: C64) -> Qm2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] *= rhs;
            }
        }
        out
    }
}

impl std::ops::Mul<f64> for Qm2 {
    type Output = Qm2;
    fn mul(self, rhs: f64) -> Qm2 {
        self * c(rhs, 0.0)
    }
}

/// Conjugate transpose of a dense matrix.
pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Largest entry of A - A^dagger; zero for exactly Hermitian input.
pub fn hermiticity_defect(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues in ascending
/// order, eigenvectors as the matching columns of a unitary matrix.
pub struct EigenH {
    pub values: Vec<f64>,
    pub vectors: Array2<C64>,
}

/// Cyclic Jacobi diagonalization. Each rotation annihilates one
/// off-diagonal pair exactly; the off-diagonal Frobenius mass falls at
/// least geometrically per sweep, so 64 sweeps is far beyond what the
/// quadratic convergence regime ever needs.
pub fn eigh(a: &Array2<C64>) -> HyResult<EigenH> {
    let (rows, cols) = a.dim();
    if rows != cols || rows == 0 {
        return Err(HyError::InvalidParam(format!("eigensolver needs a nonempty square matrix, got {rows}x{cols}")));
    }
    let n = rows;
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let defect = hermiticity_defect(a);
    if defect > 1e-9 * scale.max(1.0) {
        return Err(HyError::InvalidParam(format!("eigensolver input is not Hermitian: defect {defect:.3e}")));
    }

    // Work on the explicitly hermitized copy so roundoff-level asymmetry in
    // the input cannot leak into the rotations.
    let mut m = a.clone();
    for p in 0..n {
        m[[p, p]] = c(m[[p, p]].re, 0.0);
        for q in (p + 1)..n {
            let avg = (m[[p, q]] + m[[q, p]].conj()) * c(0.5, 0.0);
            m[[p, q]] = avg;
            m[[q, p]] = avg.conj();
        }
    }
    let mut vecs: Array2<C64> = Array2::eye(n);
    let frob = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let target = 1e-15 * frob;

    let mut converged = false;
    for _sweep in 0..64 {
        let off = {
            let mut s = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    s += 2.0 * m[[p, q]].norm_sqr();
                }
            }
            s.sqrt()
        };
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let g = m[[p, q]];
                let absg = g.norm();
                if absg <= 1e-3 * target / n as f64 {
                    continue;
                }
                let alpha = m[[p, p]].re;
                let beta = m[[q, q]].re;
                let phase = g / absg;
                let tau = (alpha - beta) / (2.0 * absg);
                let sgn = if tau >= 0.0 { 1.0 } else { -1.0 };
                let t = sgn / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = t * cth;
                // The unitary is [[c, -s*phase], [s*conj(phase), c]] acting
                // on the (p, q) plane; it zeroes the (p, q) entry exactly.
                let sp = phase * sth;
                let spc = phase.conj() * sth;
                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    let mpj = m[[p, j]];
                    let mqj = m[[q, j]];
                    m[[p, j]] = mpj * cth + mqj * sp;
                    m[[q, j]] = mpj * (-spc) + mqj * cth;
                    let mjp = m[[j, p]];
                    let mjq = m[[j, q]];
                    m[[j, p]] = mjp * cth + mjq * spc;
                    m[[j, q]] = mjp * (-sp) + mjq * cth;
                }
                m[[p, p]] = c(alpha + t * absg, 0.0);
                m[[q, q]] = c(beta - t * absg, 0.0);
                m[[p, q]] = c(0.0, 0.0);
                m[[q, p]] = c(0.0, 0.0);
                for i in 0..n {
                    let vip = vecs[[i, p]];
                    let viq = vecs[[i, q]];
                    vecs[[i, p]] = vip * cth + viq * spc;
                    vecs[[i, q]] = vip * (-sp) + viq * cth;
                }
            }
        }
    }
    if !converged {
        return Err(HyError::Numeric("eigensolver failed to converge in 64 sweeps".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].re.partial_cmp(&m[[j, j]].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[[i, i]].re).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[[row, col]] = vecs[[row, src]];
        }
    }
    Ok(EigenH { values, vectors })
}

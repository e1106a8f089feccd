//! Hybrid phase-space states: an operator-valued density on the grid, the
//! analytic dyad family used to build exactly representable states, and
//! Gaussian product states.
//!
//! Storage is the complex triplet (rpp, rmm, rpm); the lower off-diagonal
//! is conj(rpm) by layout, so the honest non-Hermiticity diagnostic is the
//! imaginary part left on the diagonal fields by the integrator.

use std::sync::Arc;

use ndarray::{Array1, Array2, Zip};

use crate::error::{HyError, HyResult};
use crate::grid::PhaseGrid;
use crate::qmat::Qm2;
use crate::{C64, WEIGHT_FLOOR};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Operator-valued density on the phase-space grid. The 2x2 block at a
/// point (x_i, p_j) is [[rpp, rpm], [conj(rpm), rmm]] at index [i, j].
#[derive(Clone)]
pub struct HybridDensity {
    pub grid: Arc<PhaseGrid>,
    pub rpp: Array2<C64>,
    pub rmm: Array2<C64>,
    pub rpm: Array2<C64>,
}

/// Normalized 2x2 state conditioned on a phase-space point, along with the
/// local weight that was divided out.
#[derive(Clone, Copy, Debug)]
pub struct ConditionalState {
    pub weight: f64,
    pub matrix: Qm2,
}

impl HybridDensity {
    pub fn zeros(grid: Arc<PhaseGrid>) -> HybridDensity {
        let z = grid.zeros();
        HybridDensity { rpp: z.clone(), rmm: z.clone(), rpm: z, grid }
    }

    pub fn from_fields(
        grid: Arc<PhaseGrid>,
        rpp: Array2<C64>,
        rmm: Array2<C64>,
        rpm: Array2<C64>,
    ) -> HyResult<HybridDensity> {
        let n = grid.len();
        for f in [&rpp, &rmm, &rpm] {
            if f.dim() != (n, n) {
                return Err(HyError::GridMismatch(format!(
                    "state field shape {:?} does not match grid {n}x{n}",
                    f.dim()
                )));
            }
        }
        Ok(HybridDensity { grid, rpp, rmm, rpm })
    }

    /// Product of a unit Gaussian blob at (x0, p0) with a pure two-level
    /// state; the spin doublet is normalized internally.
    pub fn product_gaussian(grid: Arc<PhaseGrid>, x0: f64, p0: f64, spin: [C64; 2]) -> HyResult<HybridDensity> {
        let nrm = (spin[0].norm_sqr() + spin[1].norm_sqr()).sqrt();
        if nrm < 1e-300 {
            return Err(HyError::InvalidParam("spin doublet must be nonzero".into()));
        }
        let (cp, cm) = (spin[0] / nrm, spin[1] / nrm);
        let (x, p) = grid.coordinate_fields();
        let mut g = grid.zeros();
        Zip::from(&mut g).and(&x).and(&p).for_each(|v, &x, &p| {
            let dx = x - x0;
            let dp = p - p0;
            *v = C64::new((-(dx * dx + dp * dp) / 2.0).exp() / TWO_PI, 0.0);
        });
        let rpp = g.mapv(|v| v * cp.norm_sqr());
        let rmm = g.mapv(|v| v * cm.norm_sqr());
        let rpm = g.mapv(|v| v * (cp * cm.conj()));
        HybridDensity::from_fields(grid, rpp, rmm, rpm)
    }

    /// Trace field a0(x, p) = tr rho(x, p); its real part is the classical
    /// weight density.
    pub fn trace_field(&self) -> Array2<C64> {
        &self.rpp + &self.rmm
    }

    pub fn weight_field(&self) -> Array2<f64> {
        Zip::from(&self.rpp).and(&self.rmm).map_collect(|a, b| a.re + b.re)
    }

    pub fn norm(&self) -> f64 {
        self.grid.integrate(&self.trace_field()).map(|v| v.re).unwrap_or(f64::NAN)
    }

    /// Largest imaginary residue on the diagonal fields. The off-diagonal
    /// block is conjugate-symmetric by construction, so this is the entire
    /// non-Hermiticity of the state.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for f in [&self.rpp, &self.rmm] {
            for v in f.iter() {
                worst = worst.max(v.im.abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        [&self.rpp, &self.rmm, &self.rpm]
            .iter()
            .all(|f| f.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }

    /// Bloch components (a0, a1, a2, a3) of 2 * rho at each point; all are
    /// real-valued by layout, with rho = (a0 I + a . sigma) / 2.
    pub fn bloch_fields(&self) -> [Array2<f64>; 4] {
        let a0 = Zip::from(&self.rpp).and(&self.rmm).map_collect(|a, b| a.re + b.re);
        let a1 = self.rpm.mapv(|v| 2.0 * v.re);
        let a2 = self.rpm.mapv(|v| -2.0 * v.im);
        let a3 = Zip::from(&self.rpp).and(&self.rmm).map_collect(|a, b| a.re - b.re);
        [a0, a1, a2, a3]
    }

    /// Smallest pointwise eigenvalue (a0 - |a|)/2 over the whole grid.
    /// Negative values mean the state has left the physical cone.
    pub fn min_eigenvalue(&self) -> f64 {
        let [a0, a1, a2, a3] = self.bloch_fields();
        let mut worst = f64::INFINITY;
        Zip::from(&a0).and(&a1).and(&a2).and(&a3).for_each(|&a0, &a1, &a2, &a3| {
            let len = (a1 * a1 + a2 * a2 + a3 * a3).sqrt();
            worst = worst.min((a0 - len) / 2.0);
        });
        worst
    }

    pub fn positivity_defect(&self) -> f64 {
        (-self.min_eigenvalue()).max(0.0)
    }

    /// Supremum of the polarization ratio |a|/a0 over grid points whose
    /// weight clears the floor and which lie inside the given region.
    pub fn max_polarization<F>(&self, floor: f64, region: F) -> f64
    where
        F: Fn(f64, f64) -> bool,
    {
        let [a0, a1, a2, a3] = self.bloch_fields();
        let xs = self.grid.coords();
        let n = self.grid.len();
        let mut sup: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if a0[[i, j]] <= floor || !region(xs[i], xs[j]) {
                    continue;
                }
                let len = (a1[[i, j]].powi(2) + a2[[i, j]].powi(2) + a3[[i, j]].powi(2)).sqrt();
                sup = sup.max(len / a0[[i, j]]);
            }
        }
        sup
    }

    /// Normalized two-level state at the grid node nearest to (x, p).
    pub fn conditional(&self, x: f64, p: f64) -> HyResult<ConditionalState> {
        let i = self.grid.nearest_index(x);
        let j = self.grid.nearest_index(p);
        let w = self.rpp[[i, j]].re + self.rmm[[i, j]].re;
        if w < WEIGHT_FLOOR {
            return Err(HyError::UndefinedConditional { x, p, weight: w, floor: WEIGHT_FLOOR });
        }
        let inv = C64::new(1.0 / w, 0.0);
        let matrix = Qm2::new([
            [self.rpp[[i, j]] * inv, self.rpm[[i, j]] * inv],
            [self.rpm[[i, j]].conj() * inv, self.rmm[[i, j]] * inv],
        ]);
        Ok(ConditionalState { weight: w, matrix })
    }

    /// Integrates out the classical variables, leaving the 2x2 reduced state.
    pub fn quantum_marginal(&self) -> Qm2 {
        let h2 = C64::new(self.grid.spacing() * self.grid.spacing(), 0.0);
        let spp = self.rpp.sum() * h2;
        let smm = self.rmm.sum() * h2;
        let spm = self.rpm.sum() * h2;
        Qm2::new([[spp, spm], [spm.conj(), smm]])
    }

    /// Weight mass on the x > 0 half plane. No node sits at x = 0, so the
    /// split is unambiguous.
    pub fn prob_x_positive(&self) -> f64 {
        let w = self.weight_field();
        let xs = self.grid.coords();
        let n = self.grid.len();
        let mut total = 0.0;
        for i in 0..n {
            if xs[i] > 0.0 {
                for j in 0..n {
                    total += w[[i, j]];
                }
            }
        }
        total * self.grid.spacing() * self.grid.spacing()
    }

    /// Weight-averaged phase-space point (<x>, <p>).
    pub fn mean_phase_point(&self) -> (f64, f64) {
        let w = self.weight_field();
        let xs = self.grid.coords();
        let n = self.grid.len();
        let (mut sx, mut sp, mut sw) = (0.0, 0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let v = w[[i, j]];
                sw += v;
                sx += v * xs[i];
                sp += v * xs[j];
            }
        }
        (sx / sw, sp / sw)
    }

    /// Position marginal: weight integrated over p.
    pub fn marginal_x(&self) -> Array1<f64> {
        let w = self.weight_field();
        let n = self.grid.len();
        let h = self.grid.spacing();
        Array1::from_iter((0..n).map(|i| (0..n).map(|j| w[[i, j]]).sum::<f64>() * h))
    }

    pub fn scale(&mut self, c: f64) {
        for f in [&mut self.rpp, &mut self.rmm, &mut self.rpm] {
            f.mapv_inplace(|v| v * c);
        }
    }

    /// self += c * rhs, fieldwise.
    pub fn scaled_add(&mut self, c: f64, rhs: &HybridDensity) {
        let cc = C64::new(c, 0.0);
        Zip::from(&mut self.rpp).and(&rhs.rpp).for_each(|a, &b| *a += cc * b);
        Zip::from(&mut self.rmm).and(&rhs.rmm).for_each(|a, &b| *a += cc * b);
        Zip::from(&mut self.rpm).and(&rhs.rpm).for_each(|a, &b| *a += cc * b);
    }

    /// Largest pointwise field difference between two states on one grid.
    pub fn linf_distance(&self, other: &HybridDensity) -> HyResult<f64> {
        if self.grid.as_ref() != other.grid.as_ref() {
            return Err(HyError::GridMismatch("states live on different grids".into()));
        }
        let mut worst: f64 = 0.0;
        for (a, b) in [
            (&self.rpp, &other.rpp),
            (&self.rmm, &other.rmm),
            (&self.rpm, &other.rpm),
        ] {
            Zip::from(a).and(b).for_each(|&a, &b| worst = worst.max((a - b).norm()));
        }
        Ok(worst)
    }

    /// Applies the band-limit mask to all three fields.
    pub fn apply_mode_mask(&mut self, mask: &Array2<f64>) {
        let grid = self.grid.clone();
        for f in [&mut self.rpp, &mut self.rmm, &mut self.rpm] {
            grid.apply_mode_mask(f, mask);
        }
    }
}

/// Pure hybrid state whose quantum side is a spin doublet of polynomials in
/// the analytic variable w = x - i p. These states have exact finite
/// expansions in the number basis, so the grid state and its lifted
/// counterpart can be constructed with no truncation error at all.
#[derive(Clone, Debug)]
pub struct BargmannDyad {
    /// coeffs[k] multiplies w^k; index 0 is the upper two-level component.
    pub coeffs: Vec<[C64; 2]>,
}

impl BargmannDyad {
    pub fn new(coeffs: Vec<[C64; 2]>) -> HyResult<BargmannDyad> {
        if coeffs.is_empty() {
            return Err(HyError::InvalidParam("dyad needs at least one coefficient".into()));
        }
        let total: f64 = coeffs.iter().map(|c| c[0].norm_sqr() + c[1].norm_sqr()).sum();
        if total < 1e-300 {
            return Err(HyError::InvalidParam("dyad coefficients are all zero".into()));
        }
        Ok(BargmannDyad { coeffs })
    }

    /// Entangled degree-1 state sitting exactly on the positivity boundary:
    /// phi = (w |up> + |down>) / sqrt(3). The naive bracket mix pushes it
    /// outside the cone almost immediately, the corrected law does not,
    /// which is what makes it the standard probe in the test suite.
    pub fn positivity_probe() -> BargmannDyad {
        let s3 = C64::new(1.0 / 3.0f64.sqrt(), 0.0);
        let z = C64::new(0.0, 0.0);
        BargmannDyad { coeffs: vec![[z, s3], [s3, z]] }
    }

    /// Coherent blob at the phase-space point matching z0 = (x0 + i p0) /
    /// sqrt(2), carrying a pure spin doublet. The expansion is cut at
    /// degree 32, far below anything resolvable for |z0| of order a few.
    pub fn coherent(z0: C64, spin: [C64; 2]) -> HyResult<BargmannDyad> {
        let nrm = (spin[0].norm_sqr() + spin[1].norm_sqr()).sqrt();
        if nrm < 1e-300 {
            return Err(HyError::InvalidParam("spin doublet must be nonzero".into()));
        }
        let w = (-z0.norm_sqr() / 2.0).exp() / nrm;
        let base = z0 / C64::new(std::f64::consts::SQRT_2, 0.0);
        let mut coeffs = Vec::with_capacity(33);
        let mut cur = C64::new(w, 0.0);
        coeffs.push([cur * spin[0], cur * spin[1]]);
        for k in 1..=32usize {
            cur *= base / C64::new(k as f64, 0.0);
            coeffs.push([cur * spin[0], cur * spin[1]]);
        }
        BargmannDyad::new(coeffs)
    }

    /// Exact squared norm of the underlying wavefunction: the monomial w^k
    /// carries weight k! 2^k.
    pub fn analytic_trace(&self) -> f64 {
        let mut weight = 1.0;
        let mut total = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                weight *= 2.0 * k as f64;
            }
            total += (c[0].norm_sqr() + c[1].norm_sqr()) * weight;
        }
        total
    }

    /// Normalized number-basis expansion on the composite index 2k + q.
    /// The same analytic trace normalizes the grid state, so the lifted
    /// vector and the projected density agree to roundoff at t = 0.
    pub fn fock_vector(&self, nf: usize) -> HyResult<Array1<C64>> {
        if self.coeffs.len() > nf {
            return Err(HyError::InvalidParam(format!(
                "dyad degree {} does not fit in {nf} levels",
                self.coeffs.len() - 1
            )));
        }
        let scale = 1.0 / self.analytic_trace().sqrt();
        let mut psi = Array1::zeros(2 * nf);
        let mut fac = 1.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                fac *= (2.0 * k as f64).sqrt();
            }
            psi[2 * k] = c[0] * fac * scale;
            psi[2 * k + 1] = c[1] * fac * scale;
        }
        Ok(psi)
    }

    /// Evaluates the dyad as a grid density, normalized by the analytic
    /// trace. The grid norm then equals 1 up to the quadrature tail.
    pub fn to_density(&self, grid: Arc<PhaseGrid>) -> HyResult<HybridDensity> {
        let (x, p) = grid.coordinate_fields();
        let mut up = grid.zeros();
        let mut dn = grid.zeros();
        let deg = self.coeffs.len();
        Zip::from(&mut up).and(&mut dn).and(&x).and(&p).for_each(|u, d, &x, &p| {
            let w = C64::new(x, -p);
            let mut acc0 = C64::new(0.0, 0.0);
            let mut acc1 = C64::new(0.0, 0.0);
            for k in (0..deg).rev() {
                acc0 = acc0 * w + self.coeffs[k][0];
                acc1 = acc1 * w + self.coeffs[k][1];
            }
            let env = C64::new((-(x * x + p * p) / 4.0).exp(), 0.0);
            *u = acc0 * env;
            *d = acc1 * env;
        });
        let inv = C64::new(1.0 / (TWO_PI * self.analytic_trace()), 0.0);
        let rpp = Zip::from(&up).map_collect(|u| u * u.conj() * inv);
        let rmm = Zip::from(&dn).map_collect(|d| d * d.conj() * inv);
        let rpm = Zip::from(&up).and(&dn).map_collect(|u, d| u * d.conj() * inv);
        HybridDensity::from_fields(grid, rpp, rmm, rpm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<PhaseGrid> {
        Arc::new(PhaseGrid::new(8.0, 128).unwrap())
    }

    #[test]
    fn probe_dyad_density_invariants() {
        let g = grid();
        let rho = BargmannDyad::positivity_probe().to_density(g.clone()).unwrap();
        assert!((rho.norm() - 1.0).abs() < 1e-12);
        assert!(rho.hermiticity_defect() < 1e-16);
        // Pure state at every point: the spin part sits on the cone edge.
        assert!(rho.positivity_defect() < 1e-12);
        let sup = rho.max_polarization(crate::REPORT_FLOOR, |_, _| true);
        assert!((sup - 1.0).abs() < 1e-10, "sup {sup}");
        // Quantum marginal: 2/3 up, 1/3 down, no coherence (the cross term
        // is odd in w and integrates away).
        let qm = rho.quantum_marginal();
        assert!((qm.m[0][0] - C64::new(2.0 / 3.0, 0.0)).norm() < 1e-10);
        assert!((qm.m[1][1] - C64::new(1.0 / 3.0, 0.0)).norm() < 1e-10);
        assert!(qm.m[0][1].norm() < 1e-12);
    }

    #[test]
    fn probe_fock_vector_is_exact() {
        let psi = BargmannDyad::positivity_probe().fock_vector(6).unwrap();
        let s3 = 1.0 / 3.0f64.sqrt();
        assert!((psi[0]).norm() < 1e-15);
        assert!((psi[1] - C64::new(s3, 0.0)).norm() < 1e-15);
        // Level 1 upper component: (1/sqrt(3)) * sqrt(2) = sqrt(2/3).
        assert!((psi[2] - C64::new((2.0f64 / 3.0).sqrt(), 0.0)).norm() < 1e-15);
        assert!((psi[3]).norm() < 1e-15);
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-14);
        assert!(BargmannDyad::positivity_probe().fock_vector(1).is_err());
    }

    #[test]
    fn coherent_dyad_matches_gaussian_product() {
        let g = grid();
        let (x0, p0) = (1.2, -0.7);
        let z0 = C64::new(x0, p0) / C64::new(std::f64::consts::SQRT_2, 0.0);
        let spin = [C64::new(0.6, 0.0), C64::new(0.0, -0.8)];
        let dyad = BargmannDyad::coherent(z0, spin).unwrap().to_density(g.clone()).unwrap();
        let prod = HybridDensity::product_gaussian(g, x0, p0, spin).unwrap();
        assert!(dyad.linf_distance(&prod).unwrap() < 1e-14);
    }

    #[test]
    fn gaussian_product_marginals() {
        let g = grid();
        let spin = [C64::new(0.3f64.sqrt(), 0.0), C64::new(0.7f64.sqrt(), 0.0)];
        let rho = HybridDensity::product_gaussian(g.clone(), 0.0, 0.0, spin).unwrap();
        assert!((rho.norm() - 1.0).abs() < 1e-12);
        let qm = rho.quantum_marginal();
        assert!((qm.m[0][0].re - 0.3).abs() < 1e-12);
        assert!((qm.m[1][1].re - 0.7).abs() < 1e-12);
        assert!((qm.m[0][1].re - (0.21f64).sqrt()).abs() < 1e-12);
        // Centered blob: exactly half the mass on each side.
        assert!((rho.prob_x_positive() - 0.5).abs() < 1e-13);
        // Displaced blob: mass right of zero is the 2-sigma tail value.
        let shifted = HybridDensity::product_gaussian(g, 2.0, 0.0, spin).unwrap();
        let expect = 0.5 * libm::erfc(-2.0 / std::f64::consts::SQRT_2);
        assert!((shifted.prob_x_positive() - expect).abs() < 1e-8);
        let mx = shifted.marginal_x();
        let peak = (0..mx.len()).max_by(|&a, &b| mx[a].partial_cmp(&mx[b]).unwrap()).unwrap();
        assert!((shifted.grid.coords()[peak] - 2.0).abs() <= shifted.grid.spacing());
    }

    #[test]
    fn conditional_states() {
        let g = grid();
        let rho = BargmannDyad::positivity_probe().to_density(g).unwrap();
        let c = rho.conditional(0.0, 0.0).unwrap();
        let tr = c.matrix.trace();
        assert!((tr - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(c.matrix.hermitian_defect() < 1e-14);
        // Near the origin w is tiny, so the state is almost pure |down>.
        assert!(c.matrix.m[1][1].re > 0.99);
        // Far corner: weight under the floor reports as undefined.
        match rho.conditional(7.9, 7.9) {
            Err(HyError::UndefinedConditional { weight, .. }) => assert!(weight < WEIGHT_FLOOR),
            other => panic!("expected undefined conditional, got {other:?}"),
        }
    }

    #[test]
    fn linear_ops_and_distance() {
        let g = grid();
        let a = BargmannDyad::positivity_probe().to_density(g.clone()).unwrap();
        let mut b = a.clone();
        b.scale(2.0);
        assert!((b.norm() - 2.0).abs() < 1e-12);
        b.scaled_add(-1.0, &a);
        assert!(b.linf_distance(&a).unwrap() < 1e-15);
        let other = Arc::new(PhaseGrid::new(8.0, 64).unwrap());
        let c = HybridDensity::zeros(other);
        assert!(a.linf_distance(&c).is_err());
    }

    #[test]
    fn polarization_region_filter() {
        let g = grid();
        // Pure |up> on the right half, pure mixed on the left: region masks
        // must separate the two.
        let gauss_r = HybridDensity::product_gaussian(g.clone(), 3.0, 0.0, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let mut mixed_l = HybridDensity::product_gaussian(g.clone(), -3.0, 0.0, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        mixed_l.rmm.assign(&mixed_l.rpp);
        mixed_l.rpm.fill(C64::new(0.0, 0.0));
        let mut both = gauss_r.clone();
        both.scaled_add(1.0, &mixed_l);
        let right = both.max_polarization(1e-6, |x, _| x > 0.0);
        assert!((right - 1.0).abs() < 1e-6);
        let left = both.max_polarization(1e-6, |x, _| x < -1.0);
        assert!(left < 1e-6);
    }
}

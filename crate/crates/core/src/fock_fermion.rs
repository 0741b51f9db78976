//! Exact fermionic Fock space on `n` modes (dimension `2^n`).
//!
//! Ladder operators are realised through the Jordan-Wigner sign string,
//! `c_j |b> = (-1)^{b_0 + .. + b_{j-1}} b_j |b - e_j>`, with mode 0 held
//! in the highest bit so the mode order matches the bosonic layout.  All
//! matrix entries are signed integers in floating point, so the canonical
//! anticommutation relations hold *exactly*, with zero residual; any
//! nonzero residual downstream is a property of the transformation being
//! tested, never of the space.
//!
//! Orthogonal-kind `(R, S)` blocks drive the Bogoliubov transformations
//! `B_j = Σ_m R_jm c_m + S_jm c_m†`; the transformed vacuum is found as
//! the null space of `Σ B†B` with no structural ansatz, and the pair
//! condensate `exp(Σ Z_jk c_j† c_k† / 2)|0>` with `Z = -R^{-1} S`
//! (antisymmetric) serves as an independent cross-check whenever `R` is
//! invertible.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock_boson::PairingCrosscheck;
use crate::linalg;
use crate::moduli::{BlockKind, RSBlocks};

/// Dense working sets are `16 · 4^n` bytes; the default budget caps the
/// mode count at 12.
pub const DEFAULT_BUDGET_BYTES: u128 = 512 * 1024 * 1024;

/// Eigenvalues below this count as kernel members when the vacuum is
/// isolated; the next excitation sits at 1, so the margin is enormous.
const KERNEL_TOL: f64 = 1e-6;

/// An `n`-mode fermionic Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FermionFock {
    n: usize,
    dim: usize,
}

/// A vector in a [`FermionFock`] space.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionState {
    fock: FermionFock,
    coeffs: Array1<C64>,
}

/// Result of a fermionic Bogoliubov vacuum construction.
#[derive(Debug, Clone)]
pub struct FermionVacuum {
    pub state: FermionState,
    /// Max deviation of `{B_j, B_l†} - δ_jl` and `{B_j, B_l}` over all
    /// pairs, on the whole (exact) space.
    pub car_residual: f64,
    /// Max over `j` of `‖B_j ψ‖`.
    pub b_residual: f64,
    /// `<ψ| Σ c†c |ψ>` in the original modes.
    pub mean_old_quanta: f64,
}

/// Build a fermionic Fock space under the default memory budget.
pub fn build_fermion_fock(n: usize) -> Result<FermionFock> {
    build_fermion_fock_with_budget(n, DEFAULT_BUDGET_BYTES)
}

/// Build a fermionic Fock space under an explicit budget in bytes.
pub fn build_fermion_fock_with_budget(n: usize, budget: u128) -> Result<FermionFock> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one mode".into()));
    }
    if n >= 64 {
        return Err(Error::ResourceBudget {
            required: u128::MAX,
            budget,
        });
    }
    let dim = 1u128 << n;
    let required = 16 * dim * dim;
    if required > budget {
        return Err(Error::ResourceBudget { required, budget });
    }
    Ok(FermionFock {
        n,
        dim: dim as usize,
    })
}

impl FermionFock {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Occupation (0 or 1) of `mode` in basis state `idx`.
    pub fn occupation(&self, idx: usize, mode: usize) -> usize {
        (idx >> (self.n - 1 - mode)) & 1
    }

    /// Jordan-Wigner sign `(-1)^{Σ_{k<mode} b_k}` for basis state `idx`.
    fn jw_sign(&self, idx: usize, mode: usize) -> f64 {
        let above = idx >> (self.n - mode);
        if above.count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Flat index of an occupation pattern.
    pub fn basis_index(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "FermionFock::basis_index",
                left: self.n,
                right: occupations.len(),
            });
        }
        let mut idx = 0;
        for (mode, &b) in occupations.iter().enumerate() {
            if b > 1 {
                return Err(Error::InvalidParameter(format!(
                    "fermionic occupation must be 0 or 1, got {b}"
                )));
            }
            idx |= b << (self.n - 1 - mode);
        }
        Ok(idx)
    }

    /// The basis state with the given occupation pattern.
    pub fn basis_state(&self, occupations: &[usize]) -> Result<FermionState> {
        let idx = self.basis_index(occupations)?;
        let mut coeffs = Array1::zeros(self.dim);
        coeffs[idx] = C64::new(1.0, 0.0);
        Ok(FermionState { fock: *self, coeffs })
    }

    /// Apply the annihilator of `mode`.
    pub fn apply_annihilate(&self, mode: usize, v: &Array1<C64>) -> Array1<C64> {
        let bit = 1usize << (self.n - 1 - mode);
        let mut out = Array1::zeros(self.dim);
        for idx in 0..self.dim {
            if idx & bit != 0 {
                out[idx & !bit] += self.jw_sign(idx, mode) * v[idx];
            }
        }
        out
    }

    /// Apply the creator of `mode`.
    pub fn apply_create(&self, mode: usize, v: &Array1<C64>) -> Array1<C64> {
        let bit = 1usize << (self.n - 1 - mode);
        let mut out = Array1::zeros(self.dim);
        for idx in 0..self.dim {
            if idx & bit == 0 {
                out[idx | bit] += self.jw_sign(idx, mode) * v[idx];
            }
        }
        out
    }

    /// Dense matrix of the annihilator; entries are exactly `0` or `±1`.
    pub fn dense_annihilate(&self, mode: usize) -> Array2<f64> {
        let bit = 1usize << (self.n - 1 - mode);
        let mut c = Array2::zeros((self.dim, self.dim));
        for idx in 0..self.dim {
            if idx & bit != 0 {
                c[(idx & !bit, idx)] = self.jw_sign(idx, mode);
            }
        }
        c
    }
}

impl FermionState {
    pub fn fock(&self) -> FermionFock {
        self.fock
    }

    pub fn coeffs(&self) -> &Array1<C64> {
        &self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability weight on basis states with odd total occupation.
    pub fn odd_parity_weight(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx.count_ones() % 2 == 1)
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }
}

/// Dense matrix of `B_j = Σ_m R_jm c_m + S_jm c_m†`.
fn dense_fermion_annihilator(fock: &FermionFock, rs: &RSBlocks, j: usize) -> Array2<C64> {
    let dim = fock.dim;
    let mut b = Array2::<C64>::zeros((dim, dim));
    for m in 0..fock.n {
        let cm = fock.dense_annihilate(m);
        let r = rs.r()[(j, m)];
        let s = rs.s()[(j, m)];
        for row in 0..dim {
            for col in 0..dim {
                let e = cm[(row, col)];
                if e != 0.0 {
                    b[(row, col)] += r * e;
                    // c† is the transpose (real entries)
                    b[(col, row)] += s * e;
                }
            }
        }
    }
    b
}

/// Vacuum of the transformed modes for an orthogonal-kind block pair,
/// computed as the null space of `Σ B†B`.
///
/// Fails with [`Error::DegenerateKernel`] if the kernel is not
/// one-dimensional, which cannot happen for blocks satisfying the
/// orthogonal relations but guards against silently picking a ray out of
/// a degenerate space.
pub fn fermion_bogoliubov_vacuum(fock: &FermionFock, rs: &RSBlocks) -> Result<FermionVacuum> {
    if rs.kind() != BlockKind::Orthogonal {
        return Err(Error::InvalidParameter(
            "fermionic Bogoliubov transformations need orthogonal-kind blocks".into(),
        ));
    }
    if rs.n() != fock.n {
        return Err(Error::DimensionMismatch {
            context: "fermion_bogoliubov_vacuum",
            left: fock.n,
            right: rs.n(),
        });
    }
    let dim = fock.dim;
    let bs: Vec<Array2<C64>> = (0..fock.n)
        .map(|j| dense_fermion_annihilator(fock, rs, j))
        .collect();

    let mut m_total = Array2::<C64>::zeros((dim, dim));
    for b in &bs {
        let bh = linalg::adjoint(b);
        m_total = &m_total + &bh.dot(b);
    }
    let (vals, vecs) = linalg::hermitian_eigen(&m_total)?;
    let kernel_dim = vals.iter().take_while(|&&v| v < KERNEL_TOL).count();
    if kernel_dim != 1 {
        return Err(Error::DegenerateKernel { dim: kernel_dim });
    }
    let mut psi: Array1<C64> = vecs.column(0).to_owned();

    let mut best = 0usize;
    for idx in 0..dim {
        if psi[idx].norm() > psi[best].norm() {
            best = idx;
        }
    }
    let phase = psi[best] / psi[best].norm();
    psi.mapv_inplace(|c| c / phase);

    let mut car_residual = 0.0_f64;
    for j in 0..fock.n {
        for l in 0..fock.n {
            let blh = linalg::adjoint(&bs[l]);
            let mut anti = bs[j].dot(&blh) + blh.dot(&bs[j]);
            if j == l {
                for idx in 0..dim {
                    anti[(idx, idx)] -= 1.0;
                }
            }
            car_residual = car_residual.max(linalg::max_abs_c(&anti));
            let pair = bs[j].dot(&bs[l]) + bs[l].dot(&bs[j]);
            car_residual = car_residual.max(linalg::max_abs_c(&pair));
        }
    }

    let mut b_residual = 0.0_f64;
    for b in &bs {
        let bv = b.dot(&psi);
        b_residual = b_residual.max(bv.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
    }

    let mut mean_old_quanta = 0.0;
    for m in 0..fock.n {
        let cv = fock.apply_annihilate(m, &psi);
        mean_old_quanta += cv.iter().map(|c| c.norm_sqr()).sum::<f64>();
    }

    Ok(FermionVacuum {
        state: FermionState { fock: *fock, coeffs: psi },
        car_residual,
        b_residual,
        mean_old_quanta,
    })
}

/// Compare the null-space vacuum against the pair condensate
/// `exp(Σ Z_jk c_j† c_k† / 2)|0>` with `Z = -R^{-1} S` (antisymmetric for
/// valid orthogonal blocks).  The exponential series terminates after
/// `n/2 + 1` terms.
pub fn thouless_crosscheck(fock: &FermionFock, rs: &RSBlocks) -> Result<PairingCrosscheck> {
    if rs.kind() != BlockKind::Orthogonal {
        return Err(Error::InvalidParameter(
            "pair-condensate cross-check needs orthogonal-kind blocks".into(),
        ));
    }
    // Same absolute gate as the bosonic cross-check: block relations pin
    // the scale, and singular R here is not an edge case but the entire
    // det = -1 component of O(2n), whose vacua have no pair form at all.
    let (s_min, s_max) = linalg::singular_extremes(rs.r())?;
    let r_condition = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    if s_min < 1e-8 {
        return Ok(PairingCrosscheck::SkippedSingularR { r_condition });
    }
    let z = match linalg::solve_complex(rs.r(), rs.s()) {
        Ok(x) => x.mapv(|v| -v),
        Err(Error::Singular { .. }) => {
            return Ok(PairingCrosscheck::SkippedSingularR { r_condition })
        }
        Err(e) => return Err(e),
    };
    // Mathematically antisymmetric; clean up roundoff.
    let zt = z.t().to_owned();
    let z = (&z - &zt).mapv(|v| 0.5 * v);

    let vacuum = fermion_bogoliubov_vacuum(fock, rs)?;

    let dim = fock.dim;
    let mut pair = Array1::<C64>::zeros(dim);
    pair[0] = C64::new(1.0, 0.0);
    let mut term = pair.clone();
    for p in 1..=(fock.n / 2 + 1) {
        let mut next = Array1::<C64>::zeros(dim);
        for m in 0..fock.n {
            for k in 0..fock.n {
                let coeff = 0.5 * z[(m, k)];
                if coeff.norm() == 0.0 {
                    continue;
                }
                let raised = fock.apply_create(m, &fock.apply_create(k, &term));
                for idx in 0..dim {
                    next[idx] += coeff * raised[idx];
                }
            }
        }
        next.mapv_inplace(|c| c / p as f64);
        for idx in 0..dim {
            pair[idx] += next[idx];
        }
        term = next;
    }
    let pnorm = pair.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if pnorm == 0.0 {
        return Err(Error::NonFinite {
            context: "pair condensate collapsed to zero",
            step: 0,
        });
    }
    let overlap: C64 = vacuum
        .state
        .coeffs
        .iter()
        .zip(pair.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    let overlap_error = 1.0 - overlap.norm() / pnorm;
    Ok(PairingCrosscheck::Checked {
        overlap_error,
        r_condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::{extract_rs, random_orthogonal};

    fn pair_rotation(theta: f64) -> RSBlocks {
        let c = C64::new(theta.cos(), 0.0);
        let s = C64::new(theta.sin(), 0.0);
        let zero = C64::new(0.0, 0.0);
        let r = Array2::from_shape_vec((2, 2), vec![c, zero, zero, c]).unwrap();
        let sm = Array2::from_shape_vec((2, 2), vec![zero, s, -s, zero]).unwrap();
        RSBlocks::new(r, sm, BlockKind::Orthogonal).unwrap()
    }

    fn random_orthogonal_rs(n: usize, seed: u64) -> RSBlocks {
        extract_rs(&random_orthogonal(n, seed).unwrap()).unwrap()
    }

    #[test]
    fn car_holds_exactly() {
        let f = build_fermion_fock(3).unwrap();
        let cs: Vec<Array2<f64>> = (0..3).map(|m| f.dense_annihilate(m)).collect();
        for j in 0..3 {
            for k in 0..3 {
                let anti = cs[j].dot(&cs[k].t()) + cs[k].t().dot(&cs[j]);
                for row in 0..f.dim() {
                    for col in 0..f.dim() {
                        let want = if j == k && row == col { 1.0 } else { 0.0 };
                        assert_eq!(anti[(row, col)], want, "({j},{k}) at ({row},{col})");
                    }
                }
                let pair = cs[j].dot(&cs[k]) + cs[k].dot(&cs[j]);
                assert_eq!(pair.iter().map(|x| x.abs()).fold(0.0, f64::max), 0.0);
            }
        }
    }

    #[test]
    fn jordan_wigner_signs_are_the_usual_ones() {
        let f = build_fermion_fock(2).unwrap();
        let c0 = f.dense_annihilate(0);
        let c1 = f.dense_annihilate(1);
        // |11> has index 3, |01> (mode 1 occupied) index 1, |10> index 2.
        assert_eq!(c0[(1, 3)], 1.0);
        assert_eq!(c1[(2, 3)], -1.0);
        assert_eq!(c0[(0, 2)], 1.0);
        assert_eq!(c1[(0, 1)], 1.0);
    }

    #[test]
    fn annihilator_counts_occupations() {
        let f = build_fermion_fock(4).unwrap();
        for idx in 0..f.dim() {
            let mut v = Array1::<C64>::zeros(f.dim());
            v[idx] = C64::new(1.0, 0.0);
            let mut total = 0.0;
            for m in 0..4 {
                let cv = f.apply_annihilate(m, &v);
                total += cv.iter().map(|c| c.norm_sqr()).sum::<f64>();
            }
            assert_eq!(total, idx.count_ones() as f64);
        }
    }

    #[test]
    fn budget_bounds_the_mode_count() {
        assert!(build_fermion_fock(12).is_ok());
        assert!(matches!(
            build_fermion_fock(13),
            Err(Error::ResourceBudget { .. })
        ));
    }

    #[test]
    fn trivial_blocks_leave_the_vacuum_alone() {
        let f = build_fermion_fock(3).unwrap();
        let rs = RSBlocks::new(
            linalg::eye_c(3),
            Array2::zeros((3, 3)),
            BlockKind::Orthogonal,
        )
        .unwrap();
        let v = fermion_bogoliubov_vacuum(&f, &rs).unwrap();
        assert!(v.mean_old_quanta.abs() < 1e-14);
        assert!(v.b_residual < 1e-14);
        assert!((v.state.coeffs()[0].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pair_rotation_vacuum_matches_the_closed_form() {
        let f = build_fermion_fock(2).unwrap();
        for &theta in &[0.3_f64, 0.7, 1.1] {
            let v = fermion_bogoliubov_vacuum(&f, &pair_rotation(theta)).unwrap();
            let want = 2.0 * theta.sin() * theta.sin();
            assert!(
                (v.mean_old_quanta - want).abs() < 1e-12,
                "theta {theta}: {} vs {want}",
                v.mean_old_quanta
            );
            // cos θ |00> - sin θ |11>, up to a global phase
            let overlap = (v.state.coeffs()[0] * theta.cos()
                - v.state.coeffs()[3] * theta.sin())
            .norm();
            assert!((overlap - 1.0).abs() < 1e-12);
            assert!(v.car_residual < 1e-12);
            assert!(v.b_residual < 1e-12);
        }
    }

    #[test]
    fn random_blocks_satisfy_car_and_trace_rule() {
        for n in 2..=4usize {
            let f = build_fermion_fock(n).unwrap();
            for seed in 0..10u64 {
                let rs = random_orthogonal_rs(n, seed + 100 * n as u64);
                let v = fermion_bogoliubov_vacuum(&f, &rs).unwrap();
                assert!(v.car_residual < 1e-12, "n {n} seed {seed}: {}", v.car_residual);
                assert!(v.b_residual < 1e-12);
                let tr: f64 = rs.s().iter().map(|c| c.norm_sqr()).sum();
                assert!(
                    (v.mean_old_quanta - tr).abs() < 1e-10,
                    "n {n} seed {seed}: {} vs {tr}",
                    v.mean_old_quanta
                );
            }
        }
    }

    #[test]
    fn vacua_have_definite_parity() {
        // Both components of O(2n) occur under Haar sampling: det = +1
        // gives even vacua (pair condensates), det = -1 odd ones.  Either
        // way the vacuum must sit entirely in one parity sector.
        let f = build_fermion_fock(3).unwrap();
        let mut saw_even = false;
        let mut saw_odd = false;
        for seed in 0..10u64 {
            let v = fermion_bogoliubov_vacuum(&f, &random_orthogonal_rs(3, seed)).unwrap();
            let odd = v.state.odd_parity_weight();
            assert!(
                odd < 1e-12 || odd > 1.0 - 1e-12,
                "seed {seed}: mixed parity, odd weight {odd}"
            );
            saw_even |= odd < 0.5;
            saw_odd |= odd > 0.5;
        }
        assert!(saw_even && saw_odd, "expected both components among the seeds");
    }

    #[test]
    fn pair_condensate_agrees_with_the_null_space() {
        let mut checked = 0usize;
        for n in 2..=4usize {
            let f = build_fermion_fock(n).unwrap();
            for seed in 0..10u64 {
                let rs = random_orthogonal_rs(n, seed + 17 * n as u64);
                let v = fermion_bogoliubov_vacuum(&f, &rs).unwrap();
                match thouless_crosscheck(&f, &rs).unwrap() {
                    PairingCrosscheck::Checked { overlap_error, .. } => {
                        assert!(
                            overlap_error.abs() < 1e-10,
                            "n {n} seed {seed}: {overlap_error}"
                        );
                        assert!(v.state.odd_parity_weight() < 1e-12);
                        checked += 1;
                    }
                    PairingCrosscheck::SkippedSingularR { .. } => {
                        // No pair form exists: this block came from the
                        // det = -1 component and the vacuum is odd.
                        assert!(v.state.odd_parity_weight() > 1.0 - 1e-12);
                    }
                }
            }
        }
        assert!(checked >= 10, "only {checked} invertible-R samples");
    }

    #[test]
    fn singular_r_is_reported_not_fatal() {
        let f = build_fermion_fock(2).unwrap();
        // θ = π/2 sends R to 0: the pair form does not exist.
        match thouless_crosscheck(&f, &pair_rotation(std::f64::consts::FRAC_PI_2)).unwrap() {
            PairingCrosscheck::SkippedSingularR { .. } => {}
            other => panic!("expected a skip, got {other:?}"),
        }
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let f = build_fermion_fock(1).unwrap();
        let rr = Array2::from_elem((1, 1), C64::new(1.25_f64.cosh(), 0.0));
        let ss = Array2::from_elem((1, 1), C64::new(1.25_f64.sinh(), 0.0));
        let rs = RSBlocks::new(rr, ss, BlockKind::Symplectic).unwrap();
        assert!(matches!(
            fermion_bogoliubov_vacuum(&f, &rs),
            Err(Error::InvalidParameter(_))
        ));
    }
}

//! Truncated bosonic Fock space with explicit control of cutoff artefacts.
//!
//! The space for `n` modes with per-mode cutoff `M` is spanned by
//! occupation states `|k_1 .. k_n>` with `0 <= k_j <= M`; mode 0 is the
//! slowest-varying index, so operators factor as Kronecker products and a
//! state vector of length `(M+1)^n` is all the storage there is.  The
//! canonical commutator survives truncation only on the interior: for one
//! mode `[a, a†] = diag(1, .., 1, -M)`, with the defect pinned to the top
//! level.  Every routine here reports how much weight sits at the cutoff
//! instead of silently pretending the space is infinite.
//!
//! Coherent states keep their exact expansion coefficients
//! `e^{-|z|^2/2} z^k / sqrt(k!)` and are *not* renormalised after
//! truncation; the missing tail is precisely what the closed-form
//! eigenvalue residual `e^{-|z|^2/2} |z|^{M+1} / sqrt(M!)` measures.
//!
//! The overcompleteness integral `∫ (d^2z/pi) |z><z| = I` is checked by a
//! polar quadrature per mode: Gauss-Laguerre in `u = r^2` (the Gaussian
//! from the coherent overlaps is the Laguerre weight) times a uniform
//! angular grid, with a product rule across modes.

use ndarray::{linalg::kron, Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::moduli::{BlockKind, RSBlocks};

/// Default memory budget for dense working sets, in bytes.
pub const DEFAULT_BUDGET_BYTES: u128 = 512 * 1024 * 1024;

/// Weight allowed at the top occupation level before a vacuum
/// construction refuses to trust its own answer.
pub const TOP_WEIGHT_LIMIT: f64 = 1e-8;

/// A truncated `n`-mode Fock space with per-mode cutoff `cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BosonFock {
    n: usize,
    cutoff: usize,
    dim: usize,
}

/// A vector in a [`BosonFock`] space.
#[derive(Debug, Clone, PartialEq)]
pub struct BosonState {
    fock: BosonFock,
    coeffs: Array1<C64>,
}

/// Per-mode polar quadrature: Gauss-Laguerre radial nodes/weights in
/// `u = r^2` plus a uniform angular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    radial_nodes: Vec<f64>,
    radial_weights: Vec<f64>,
    angular_count: usize,
}

/// Result of a Bogoliubov vacuum construction.
#[derive(Debug, Clone)]
pub struct BosonVacuum {
    pub state: BosonState,
    /// Max deviation of `[B_j, B_l†] - δ_jl` on the interior subspace
    /// (all occupations strictly below the cutoff).
    pub ccr_residual: f64,
    /// Max over `j` of `‖B_j ψ‖`.
    pub b_residual: f64,
    /// `<ψ| Σ a†a |ψ>` in the original modes.
    pub mean_old_quanta: f64,
    /// Probability weight at the top occupation level.
    pub top_weight: f64,
}

/// Outcome of comparing a null-space vacuum against the exponential
/// pairing form `exp(Z a† a† / 2) |0>` with `Z = -R^{-1} S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairingCrosscheck {
    Checked { overlap_error: f64, r_condition: f64 },
    /// `R` was too ill-conditioned to invert; nothing was checked.
    SkippedSingularR { r_condition: f64 },
}

/// Build a Fock space under the default memory budget.
pub fn build_fock(n: usize, cutoff: usize) -> Result<BosonFock> {
    build_fock_with_budget(n, cutoff, DEFAULT_BUDGET_BYTES)
}

/// Build a Fock space, bounding the dense working set `16 (M+1)^{2n}`
/// bytes by an explicit budget.
pub fn build_fock_with_budget(n: usize, cutoff: usize, budget: u128) -> Result<BosonFock> {
    if n == 0 || cutoff == 0 {
        return Err(Error::InvalidParameter(
            "need at least one mode and cutoff >= 1".into(),
        ));
    }
    let dim_big = (cutoff as u128 + 1)
        .checked_pow(n as u32)
        .ok_or_else(|| Error::ResourceBudget {
            required: u128::MAX,
            budget,
        })?;
    let required = dim_big.checked_mul(dim_big).and_then(|d2| d2.checked_mul(16));
    let required = required.ok_or(Error::ResourceBudget {
        required: u128::MAX,
        budget,
    })?;
    if required > budget {
        return Err(Error::ResourceBudget { required, budget });
    }
    Ok(BosonFock {
        n,
        cutoff,
        dim: dim_big as usize,
    })
}

impl BosonFock {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn stride(&self, mode: usize) -> usize {
        (self.cutoff + 1).pow((self.n - 1 - mode) as u32)
    }

    /// Occupation of `mode` in basis state `idx`.
    pub fn occupation(&self, idx: usize, mode: usize) -> usize {
        (idx / self.stride(mode)) % (self.cutoff + 1)
    }

    /// Flat index of an occupation multi-index.
    pub fn basis_index(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "BosonFock::basis_index",
                left: self.n,
                right: occupations.len(),
            });
        }
        let mut idx = 0;
        for (mode, &k) in occupations.iter().enumerate() {
            if k > self.cutoff {
                return Err(Error::InvalidParameter(format!(
                    "occupation {k} exceeds cutoff {}",
                    self.cutoff
                )));
            }
            idx += k * self.stride(mode);
        }
        Ok(idx)
    }

    /// The basis state `|k_1 .. k_n>`.
    pub fn basis_state(&self, occupations: &[usize]) -> Result<BosonState> {
        let idx = self.basis_index(occupations)?;
        let mut coeffs = Array1::zeros(self.dim);
        coeffs[idx] = C64::new(1.0, 0.0);
        Ok(BosonState { fock: *self, coeffs })
    }

    /// Apply the annihilator of `mode`: `a|k> = sqrt(k) |k-1>`.
    pub fn apply_annihilate(&self, mode: usize, v: &Array1<C64>) -> Array1<C64> {
        let stride = self.stride(mode);
        let mut out = Array1::zeros(self.dim);
        for idx in 0..self.dim {
            let k = self.occupation(idx, mode);
            if k > 0 {
                out[idx - stride] += (k as f64).sqrt() * v[idx];
            }
        }
        out
    }

    /// Apply the creator of `mode`: `a†|k> = sqrt(k+1) |k+1>`, truncated.
    pub fn apply_create(&self, mode: usize, v: &Array1<C64>) -> Array1<C64> {
        let stride = self.stride(mode);
        let mut out = Array1::zeros(self.dim);
        for idx in 0..self.dim {
            let k = self.occupation(idx, mode);
            if k < self.cutoff {
                out[idx + stride] += ((k + 1) as f64).sqrt() * v[idx];
            }
        }
        out
    }

    /// Dense matrix of the annihilator (real entries).
    pub fn dense_annihilate(&self, mode: usize) -> Array2<f64> {
        let stride = self.stride(mode);
        let mut a = Array2::zeros((self.dim, self.dim));
        for idx in 0..self.dim {
            let k = self.occupation(idx, mode);
            if k > 0 {
                a[(idx - stride, idx)] = (k as f64).sqrt();
            }
        }
        a
    }

    /// Probability weight of a normalised vector at the top level of any
    /// mode.
    pub fn top_weight(&self, v: &Array1<C64>) -> f64 {
        let mut w = 0.0;
        for idx in 0..self.dim {
            if (0..self.n).any(|m| self.occupation(idx, m) == self.cutoff) {
                w += v[idx].norm_sqr();
            }
        }
        w
    }

    /// Is every occupation of `idx` strictly below the cutoff?
    fn is_interior(&self, idx: usize) -> bool {
        (0..self.n).all(|m| self.occupation(idx, m) < self.cutoff)
    }
}

impl BosonState {
    pub fn fock(&self) -> BosonFock {
        self.fock
    }

    pub fn coeffs(&self) -> &Array1<C64> {
        &self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Coefficient pairing `<f|g> = Σ conj(f_k) g_k` of two states in the same
/// space.
pub fn bargmann_pairing(f: &BosonState, g: &BosonState) -> Result<C64> {
    if f.fock != g.fock {
        return Err(Error::DimensionMismatch {
            context: "bargmann_pairing: different Fock spaces",
            left: f.fock.dim,
            right: g.fock.dim,
        });
    }
    Ok(f.coeffs
        .iter()
        .zip(g.coeffs.iter())
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Truncated coherent state with the exact coefficients
/// `e^{-|z|^2/2} z^k / sqrt(k!)` per mode; deliberately not renormalised.
pub fn coherent_state(fock: &BosonFock, z: &[C64]) -> Result<BosonState> {
    if z.len() != fock.n {
        return Err(Error::DimensionMismatch {
            context: "coherent_state",
            left: fock.n,
            right: z.len(),
        });
    }
    let mut coeffs = Array1::from_elem(1, C64::new(1.0, 0.0));
    for &zj in z {
        let mut mode = Array1::zeros(fock.cutoff + 1);
        let mut c = C64::new((-0.5 * zj.norm_sqr()).exp(), 0.0);
        mode[0] = c;
        for k in 0..fock.cutoff {
            c = c * zj / ((k + 1) as f64).sqrt();
            mode[k + 1] = c;
        }
        // earlier modes stay slower-varying
        let mut next = Array1::zeros(coeffs.len() * mode.len());
        for (i, &ci) in coeffs.iter().enumerate() {
            for (k, &mk) in mode.iter().enumerate() {
                next[i * mode.len() + k] = ci * mk;
            }
        }
        coeffs = next;
    }
    Ok(BosonState { fock: *fock, coeffs })
}

/// Measured eigenvalue defect `‖(a_j - z_j)|z>‖` of a state built by
/// [`coherent_state`].
pub fn coherent_eigen_residual(state: &BosonState, mode: usize, z_mode: C64) -> f64 {
    let f = state.fock;
    let av = f.apply_annihilate(mode, &state.coeffs);
    let mut acc = 0.0;
    for idx in 0..f.dim {
        acc += (av[idx] - z_mode * state.coeffs[idx]).norm_sqr();
    }
    acc.sqrt()
}

/// Closed-form prediction of the single-mode cutoff residual:
/// `e^{-|z|^2/2} |z|^{M+1} / sqrt(M!)`.
pub fn coherent_cutoff_residual(z: C64, cutoff: usize) -> f64 {
    let r = z.norm();
    if r == 0.0 {
        return 0.0;
    }
    let mut log_fact = 0.0;
    for k in 1..=cutoff {
        log_fact += (k as f64).ln();
    }
    (-0.5 * r * r + (cutoff as f64 + 1.0) * r.ln() - 0.5 * log_fact).exp()
}

impl QuadratureRule {
    /// Gauss-Laguerre radial rule (in `u = r^2`) with a uniform angular
    /// grid of `angular` nodes.
    pub fn gauss_laguerre(radial: usize, angular: usize) -> Result<Self> {
        if angular == 0 {
            return Err(Error::InvalidParameter(
                "angular node count must be positive".into(),
            ));
        }
        let (radial_nodes, radial_weights) = linalg::gauss_laguerre(radial)?;
        if radial_weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvariantViolation {
                what: "quadrature weights must stay positive",
                residual: f64::NAN,
                tol: 0.0,
            });
        }
        Ok(Self {
            radial_nodes,
            radial_weights,
            angular_count: angular,
        })
    }

    pub fn radial_count(&self) -> usize {
        self.radial_nodes.len()
    }

    pub fn angular_count(&self) -> usize {
        self.angular_count
    }
}

/// Quadrature check of `∫ (d^2z/pi) |z><z| = I` on all basis states with
/// occupations `<= k_max` per mode; returns the max deviation from the
/// identity matrix.
///
/// The integrand of the `(j, k)` matrix element separates per mode into
/// `e^{-u} u^{(j+k)/2} e^{i(j-k)φ} / sqrt(j! k!)`, so the product-rule sum
/// over the full grid equals, exactly, a product of one-mode quadrature
/// sums; the code evaluates that factored form.  The Gaussian is the
/// Laguerre weight; radial exactness needs `2·radial - 1 >= 2 k_max` and
/// angular exactness `angular > 2 k_max`.
pub fn resolution_check(fock: &BosonFock, rule: &QuadratureRule, k_max: usize) -> Result<f64> {
    if 2 * k_max > fock.cutoff {
        return Err(Error::InvalidParameter(format!(
            "k_max = {k_max} exceeds cutoff/2 = {}",
            fock.cutoff / 2
        )));
    }
    let side = k_max + 1;
    let gram_dim = (side as u128).checked_pow(fock.n as u32);
    match gram_dim {
        Some(d) if d <= 4096 => {}
        _ => {
            return Err(Error::ResourceBudget {
                required: gram_dim.unwrap_or(u128::MAX),
                budget: 4096,
            })
        }
    }

    let mut log_fact = vec![0.0_f64; side];
    for k in 1..side {
        log_fact[k] = log_fact[k - 1] + (k as f64).ln();
    }

    // One-mode Gram matrix under the rule.
    let mut gram1 = Array2::<C64>::zeros((side, side));
    for j in 0..side {
        for k in 0..side {
            let radial: f64 = self::radial_sum(rule, (j + k) as f64 / 2.0);
            let mut angular = C64::new(0.0, 0.0);
            for a in 0..rule.angular_count {
                let phi = 2.0 * std::f64::consts::PI * a as f64 / rule.angular_count as f64;
                let d = j as f64 - k as f64;
                angular += C64::from_polar(1.0, d * phi);
            }
            angular /= rule.angular_count as f64;
            let norm = (-0.5 * (log_fact[j] + log_fact[k])).exp();
            gram1[(j, k)] = angular * radial * norm;
        }
    }

    let mut gram = gram1.clone();
    for _ in 1..fock.n {
        gram = kron(&gram, &gram1);
    }
    let dim = gram.nrows();
    let dev = &gram - &linalg::eye_c(dim);
    Ok(linalg::max_abs_c(&dev))
}

fn radial_sum(rule: &QuadratureRule, power: f64) -> f64 {
    rule.radial_nodes
        .iter()
        .zip(&rule.radial_weights)
        .map(|(&u, &w)| w * u.powf(power))
        .sum()
}

/// Dense matrix of `B_j = Σ_m R_jm a_m + S_jm a†_m`.
fn dense_bogoliubov_annihilator(fock: &BosonFock, rs: &RSBlocks, j: usize) -> Array2<C64> {
    let dim = fock.dim;
    let mut b = Array2::<C64>::zeros((dim, dim));
    for m in 0..fock.n {
        let am = fock.dense_annihilate(m);
        let r = rs.r()[(j, m)];
        let s = rs.s()[(j, m)];
        for idx in 0..dim {
            let k = fock.occupation(idx, m);
            let stride = fock.stride(m);
            if k > 0 {
                b[(idx - stride, idx)] += r * am[(idx - stride, idx)];
            }
            if k < fock.cutoff {
                b[(idx + stride, idx)] += s * am[(idx, idx + stride)];
            }
        }
    }
    b
}

/// Ground state of `Σ_j B_j† B_j` for a symplectic-kind block pair: the
/// vacuum of the transformed modes, computed with no structural ansatz.
///
/// Fails with [`Error::CutoffTooSmall`] when more than
/// [`TOP_WEIGHT_LIMIT`] of the result sits at the cutoff, since nothing
/// about the state can then be trusted.
pub fn bogoliubov_vacuum(fock: &BosonFock, rs: &RSBlocks) -> Result<BosonVacuum> {
    if rs.kind() != BlockKind::Symplectic {
        return Err(Error::InvalidParameter(
            "bosonic Bogoliubov transformations need symplectic-kind blocks".into(),
        ));
    }
    if rs.n() != fock.n {
        return Err(Error::DimensionMismatch {
            context: "bogoliubov_vacuum",
            left: fock.n,
            right: rs.n(),
        });
    }
    let dim = fock.dim;
    let bs: Vec<Array2<C64>> = (0..fock.n)
        .map(|j| dense_bogoliubov_annihilator(fock, rs, j))
        .collect();

    let mut m_total = Array2::<C64>::zeros((dim, dim));
    for b in &bs {
        let bh = linalg::adjoint(b);
        m_total = &m_total + &bh.dot(b);
    }
    let (_, vecs) = linalg::hermitian_eigen(&m_total)?;
    let mut psi: Array1<C64> = vecs.column(0).to_owned();

    // Deterministic global phase: largest entry real positive.
    let mut best = 0usize;
    for idx in 0..dim {
        if psi[idx].norm() > psi[best].norm() {
            best = idx;
        }
    }
    let phase = psi[best] / psi[best].norm();
    psi.mapv_inplace(|c| c / phase);

    let top_weight = fock.top_weight(&psi);
    if top_weight > TOP_WEIGHT_LIMIT {
        return Err(Error::CutoffTooSmall {
            leakage: top_weight,
            limit: TOP_WEIGHT_LIMIT,
        });
    }

    let mut ccr_residual = 0.0_f64;
    for j in 0..fock.n {
        for l in 0..fock.n {
            let blh = linalg::adjoint(&bs[l]);
            let mut comm = bs[j].dot(&blh) - blh.dot(&bs[j]);
            if j == l {
                for idx in 0..dim {
                    comm[(idx, idx)] -= 1.0;
                }
            }
            for row in 0..dim {
                if !fock.is_interior(row) {
                    continue;
                }
                for col in 0..dim {
                    if fock.is_interior(col) {
                        ccr_residual = ccr_residual.max(comm[(row, col)].norm());
                    }
                }
            }
        }
    }

    let mut b_residual = 0.0_f64;
    for b in &bs {
        let bv = b.dot(&psi);
        b_residual = b_residual.max(bv.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
    }

    let mut mean_old_quanta = 0.0;
    for m in 0..fock.n {
        let av = fock.apply_annihilate(m, &psi);
        mean_old_quanta += av.iter().map(|c| c.norm_sqr()).sum::<f64>();
    }

    Ok(BosonVacuum {
        state: BosonState { fock: *fock, coeffs: psi },
        ccr_residual,
        b_residual,
        mean_old_quanta,
        top_weight,
    })
}

/// Compare the null-space vacuum against the closed pairing form
/// `exp(Z a† a† / 2)|0>` with `Z = -R^{-1} S` (symmetric for valid
/// symplectic blocks).  The truncated exponential series terminates after
/// `n·M/2 + 1` terms, so the comparison is exact up to roundoff.
pub fn gaussian_form_crosscheck(fock: &BosonFock, rs: &RSBlocks) -> Result<PairingCrosscheck> {
    if rs.kind() != BlockKind::Symplectic {
        return Err(Error::InvalidParameter(
            "pairing cross-check needs symplectic-kind blocks".into(),
        ));
    }
    // Blocks are O(1)-normalised (their defining relations pin the
    // singular values of [R S] to 1), so an absolute floor on the
    // smallest singular value of R is the honest invertibility gate.
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
    // Mathematically symmetric; average defensively.
    let zt = z.t().to_owned();
    let z = (&z + &zt).mapv(|v| 0.5 * v);

    let vacuum = bogoliubov_vacuum(fock, rs)?;

    let dim = fock.dim;
    let mut pair = Array1::<C64>::zeros(dim);
    pair[0] = C64::new(1.0, 0.0);
    let mut term = pair.clone();
    for p in 1..=(fock.n * fock.cutoff / 2 + 1) {
        // term <- (1/p) * (Z a† a† / 2) term
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
        let tnorm = next.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for idx in 0..dim {
            pair[idx] += next[idx];
        }
        term = next;
        if tnorm == 0.0 {
            break;
        }
    }
    let pnorm = pair.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if pnorm == 0.0 {
        return Err(Error::NonFinite {
            context: "pairing state collapsed to zero",
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

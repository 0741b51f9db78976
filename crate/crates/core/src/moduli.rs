//! Orthogonal complex structures on `R^{2n}` and their moduli.
//!
//! A complex structure here is a real matrix `J` with `J^2 = -I` that is
//! also orthogonal (`Jᵀ J = I`).  The reference structure `J0` represents
//! multiplication by `i` in the coordinates of [`crate::phase_space`]:
//! `J0 (q, p) = (-p, q)`.  The orthogonal group acts by pushforward
//! `J ↦ O J Oᵀ`, the stabiliser of `J0` is the image of `U(n)` under the
//! block embedding `A + iB ↦ [[A, B], [-B, A]]`, and the quotient
//! `O(2n)/U(n)` is the moduli space this module walks on.
//!
//! In complex coordinates an orthogonal map acts as `w = R z + S z̄`.  The
//! sign conventions work out so that the embedded image of a unitary `U`
//! acts as `z ↦ conj(U) z`: its `R` block is `conj(U)` and its `S` block
//! vanishes.  `S = 0` is exactly the Cauchy-Riemann condition, i.e. the
//! map commutes with `J0`.
//!
//! Two flavours of block residual are reported side by side and never
//! conflated:
//!
//! * `derived`: the relations actually implied by `Oᵀ O = I`, namely
//!   `R R† + S S† = I` and `R Sᵀ + S Rᵀ = 0` (minus signs for the
//!   symplectic kind);
//! * `textbook`: the stricter literal-index conditions
//!   `Σ_j R^j_m conj(R^j_n) + S^j_n conj(S^j_m) = δ_mn` and
//!   `Σ_j R^j_m conj(S^j_n) = 0`, which genuine orthogonal maps can
//!   violate while satisfying the derived set.

use ndarray::{s, Array1, Array2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::phase_space::{ComplexPoint, PhasePoint};

/// Residual tolerance accepted when validating structural invariants.
pub const STRUCT_TOL: f64 = 1e-12;

/// An orthogonal complex structure `J` on `R^{2n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructure {
    j: Array2<f64>,
}

/// An element of `O(2n)` acting on flat phase-space coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalMap {
    o: Array2<f64>,
}

/// An element of `U(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    u: Array2<C64>,
}

/// Which pair of block relations an `(R, S)` pair is expected to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// `R R† + S S† = I`, `R Sᵀ + S Rᵀ = 0`; arises from `O(2n)` and
    /// drives fermionic Bogoliubov transformations.
    Orthogonal,
    /// `R R† - S S† = I`, `R Sᵀ - S Rᵀ = 0`; arises from `Sp(2n, R)` and
    /// drives bosonic Bogoliubov transformations.
    Symplectic,
}

/// The `(R, S)` blocks of a linear map in `(z, z̄)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RSBlocks {
    r: Array2<C64>,
    s: Array2<C64>,
    kind: BlockKind,
}

/// Both residual flavours for an `(R, S)` pair; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsResiduals {
    pub derived: f64,
    pub textbook: f64,
}

impl ComplexStructure {
    /// Validate and wrap a candidate structure matrix.
    pub fn new(j: Array2<f64>) -> Result<Self> {
        let dim = j.nrows();
        if dim != j.ncols() || dim % 2 != 0 || dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "complex structure must be square with even dimension, got {}x{}",
                j.nrows(),
                j.ncols()
            )));
        }
        let jj = j.dot(&j);
        let sq_res = linalg::max_abs_r(&(&jj + &Array2::<f64>::eye(dim)));
        if sq_res > STRUCT_TOL {
            return Err(Error::InvariantViolation {
                what: "complex structure: J^2 = -I",
                residual: sq_res,
                tol: STRUCT_TOL,
            });
        }
        let orth = linalg::orthogonality_residual(&j);
        if orth > STRUCT_TOL {
            return Err(Error::InvariantViolation {
                what: "complex structure: JᵀJ = I",
                residual: orth,
                tol: STRUCT_TOL,
            });
        }
        Ok(Self { j })
    }

    /// The reference structure `J0 = [[0, -I], [I, 0]]`, i.e.
    /// multiplication by `i` in the coordinates `z = (q + ip)/sqrt(2)`.
    pub fn reference(n: usize) -> Self {
        let mut j = Array2::zeros((2 * n, 2 * n));
        for k in 0..n {
            j[(k, n + k)] = -1.0;
            j[(n + k, k)] = 1.0;
        }
        Self { j }
    }

    pub fn n(&self) -> usize {
        self.j.nrows() / 2
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.j
    }

    /// Apply `J` to a phase point.
    pub fn apply(&self, v: &PhasePoint) -> Result<PhasePoint> {
        if v.n() != self.n() {
            return Err(Error::DimensionMismatch {
                context: "ComplexStructure::apply",
                left: self.n(),
                right: v.n(),
            });
        }
        PhasePoint::from_flat(self.j.dot(&v.flat()))
    }
}

impl OrthogonalMap {
    pub fn new(o: Array2<f64>) -> Result<Self> {
        let dim = o.nrows();
        if dim != o.ncols() || dim % 2 != 0 || dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "orthogonal map must be square with even dimension, got {}x{}",
                o.nrows(),
                o.ncols()
            )));
        }
        let res = linalg::orthogonality_residual(&o);
        if res > STRUCT_TOL {
            return Err(Error::InvariantViolation {
                what: "orthogonal map: OᵀO = I",
                residual: res,
                tol: STRUCT_TOL,
            });
        }
        Ok(Self { o })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            o: Array2::eye(2 * n),
        }
    }

    pub fn n(&self) -> usize {
        self.o.nrows() / 2
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.o
    }

    pub fn transpose(&self) -> Self {
        Self {
            o: self.o.t().to_owned(),
        }
    }

    /// Compose two maps (`self` after `other`).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                context: "OrthogonalMap::compose",
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(Self {
            o: self.o.dot(&other.o),
        })
    }

    /// Apply the map to a phase point.
    pub fn apply(&self, v: &PhasePoint) -> Result<PhasePoint> {
        if v.n() != self.n() {
            return Err(Error::DimensionMismatch {
                context: "OrthogonalMap::apply",
                left: self.n(),
                right: v.n(),
            });
        }
        PhasePoint::from_flat(self.o.dot(&v.flat()))
    }
}

impl UnitaryMatrix {
    pub fn new(u: Array2<C64>) -> Result<Self> {
        if u.nrows() != u.ncols() || u.nrows() == 0 {
            return Err(Error::InvalidParameter(format!(
                "unitary matrix must be square and nonempty, got {}x{}",
                u.nrows(),
                u.ncols()
            )));
        }
        let res = linalg::unitarity_residual(&u);
        if res > STRUCT_TOL {
            return Err(Error::InvariantViolation {
                what: "unitary matrix: U†U = I",
                residual: res,
                tol: STRUCT_TOL,
            });
        }
        Ok(Self { u })
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.u
    }
}

impl RSBlocks {
    /// Validate a candidate block pair against its kind's relations.
    pub fn new(r: Array2<C64>, s: Array2<C64>, kind: BlockKind) -> Result<Self> {
        if r.nrows() != r.ncols() || r.dim() != s.dim() || r.nrows() == 0 {
            return Err(Error::InvalidParameter(format!(
                "R and S must be equal square shapes, got {:?} and {:?}",
                r.dim(),
                s.dim()
            )));
        }
        let candidate = Self { r, s, kind };
        let res = candidate.residuals().derived;
        if res > STRUCT_TOL {
            return Err(Error::InvariantViolation {
                what: "RS blocks: derived block relations",
                residual: res,
                tol: STRUCT_TOL,
            });
        }
        Ok(candidate)
    }

    pub fn n(&self) -> usize {
        self.r.nrows()
    }

    pub fn kind(&self) -> BlockKind {
        self.kind
    }

    pub fn r(&self) -> &Array2<C64> {
        &self.r
    }

    pub fn s(&self) -> &Array2<C64> {
        &self.s
    }

    /// Max-norm of the `S` block; zero iff the map is holomorphic.
    pub fn s_max_norm(&self) -> f64 {
        linalg::max_abs_c(&self.s)
    }

    /// Apply `w = R z + S z̄` to a complex point.
    pub fn apply(&self, z: &ComplexPoint) -> Result<ComplexPoint> {
        if z.n() != self.n() {
            return Err(Error::DimensionMismatch {
                context: "RSBlocks::apply",
                left: self.n(),
                right: z.n(),
            });
        }
        let zbar = z.z().mapv(|v| v.conj());
        let w = self.r.dot(z.z()) + self.s.dot(&zbar);
        ComplexPoint::new(w)
    }

    /// Both residual flavours; see the module docs for the formulas.
    pub fn residuals(&self) -> RsResiduals {
        let n = self.n();
        let ry = linalg::adjoint(&self.r);
        let sy = linalg::adjoint(&self.s);
        let rrt = self.r.dot(&ry);
        let sst = self.s.dot(&sy);
        let rst = self.r.dot(&self.s.t());
        let srt = self.s.dot(&self.r.t());

        let sign = match self.kind {
            BlockKind::Orthogonal => 1.0,
            BlockKind::Symplectic => -1.0,
        };
        let mut d1 = &rrt + &sst.mapv(|v| sign * v);
        for k in 0..n {
            d1[(k, k)] -= 1.0;
        }
        let d2 = &rst + &srt.mapv(|v| sign * v);
        let derived = linalg::max_abs_c(&d1).max(linalg::max_abs_c(&d2));

        // Literal column-index conditions; note the swapped indices in the
        // S term of the first sum.
        let mut textbook = 0.0_f64;
        for m in 0..n {
            for l in 0..n {
                let mut acc1 = C64::new(0.0, 0.0);
                let mut acc2 = C64::new(0.0, 0.0);
                for j in 0..n {
                    acc1 += self.r[(j, m)] * self.r[(j, l)].conj()
                        + self.s[(j, l)] * self.s[(j, m)].conj();
                    acc2 += self.r[(j, m)] * self.s[(j, l)].conj();
                }
                if m == l {
                    acc1 -= 1.0;
                }
                textbook = textbook.max(acc1.norm()).max(acc2.norm());
            }
        }
        RsResiduals { derived, textbook }
    }
}

/// Embed a unitary as the orthogonal block matrix `[[A, B], [-B, A]]`
/// with `A = Re U`, `B = Im U`.
///
/// The image commutes with `J0` and, in complex coordinates, acts as
/// `z ↦ conj(U) z`; extraction therefore returns `(conj(U), 0)`.
pub fn embed_unitary(u: &UnitaryMatrix) -> OrthogonalMap {
    let n = u.n();
    let mut o = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            let v = u.u[(i, j)];
            o[(i, j)] = v.re;
            o[(i, n + j)] = v.im;
            o[(n + i, j)] = -v.im;
            o[(n + i, n + j)] = v.re;
        }
    }
    OrthogonalMap { o }
}

/// Pushforward `J ↦ O J Oᵀ`.
pub fn pushforward(o: &OrthogonalMap, j: &ComplexStructure) -> Result<ComplexStructure> {
    if o.n() != j.n() {
        return Err(Error::DimensionMismatch {
            context: "pushforward",
            left: o.n(),
            right: j.n(),
        });
    }
    ComplexStructure::new(o.o.dot(&j.j).dot(&o.o.t()))
}

/// Decompose an orthogonal map into its `(R, S)` blocks in `(z, z̄)`
/// coordinates.
///
/// With `O = [[a, b], [c, d]]` in `(q, p)` blocks, the change of variables
/// gives `R = ((a + d) + i (c - b)) / 2` and `S = ((a - d) + i (c + b)) / 2`;
/// the defining property `complexify(O v) = R z + S z̄` is what the tests
/// pin down on random vectors.
pub fn extract_rs(o: &OrthogonalMap) -> Result<RSBlocks> {
    let n = o.n();
    let a = o.o.slice(s![..n, ..n]);
    let b = o.o.slice(s![..n, n..]);
    let c = o.o.slice(s![n.., ..n]);
    let d = o.o.slice(s![n.., n..]);
    let mut r = Array2::zeros((n, n));
    let mut sb = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            r[(i, j)] = C64::new(0.5 * (a[(i, j)] + d[(i, j)]), 0.5 * (c[(i, j)] - b[(i, j)]));
            sb[(i, j)] = C64::new(0.5 * (a[(i, j)] - d[(i, j)]), 0.5 * (c[(i, j)] + b[(i, j)]));
        }
    }
    RSBlocks::new(r, sb, BlockKind::Orthogonal)
}

/// Rebuild the real orthogonal map from orthogonal-kind `(R, S)` blocks.
/// Inverse of [`extract_rs`].
pub fn rs_to_orthogonal(rs: &RSBlocks) -> Result<OrthogonalMap> {
    if rs.kind != BlockKind::Orthogonal {
        return Err(Error::InvalidParameter(
            "only orthogonal-kind blocks correspond to real orthogonal maps".into(),
        ));
    }
    let n = rs.n();
    // R + S = a + ic, R - S = d - ib.
    let mut o = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            let plus = rs.r[(i, j)] + rs.s[(i, j)];
            let minus = rs.r[(i, j)] - rs.s[(i, j)];
            o[(i, j)] = plus.re; // a
            o[(n + i, j)] = plus.im; // c
            o[(n + i, n + j)] = minus.re; // d
            o[(i, n + j)] = -minus.im; // b
        }
    }
    OrthogonalMap::new(o)
}

/// Convenience: both residual flavours of a block pair.
pub fn rs_residuals(rs: &RSBlocks) -> RsResiduals {
    rs.residuals()
}

/// Does the map satisfy the Cauchy-Riemann condition `S = 0` within `tol`?
pub fn is_holomorphic(o: &OrthogonalMap, tol: f64) -> Result<bool> {
    Ok(extract_rs(o)?.s_max_norm() <= tol)
}

/// Are two structures equal entrywise within `tol`?
pub fn structures_equal(a: &ComplexStructure, b: &ComplexStructure, tol: f64) -> Result<bool> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            context: "structures_equal",
            left: a.n(),
            right: b.n(),
        });
    }
    Ok(linalg::max_abs_r(&(&a.j - &b.j)) <= tol)
}

/// Find an orthogonal map carrying the reference structure to `j`:
/// `pushforward(O, J0) = J`.
///
/// Builds an adapted basis greedily: pick a unit vector `u` orthogonal to
/// everything chosen so far, adjoin `v = J u` (automatically orthogonal to
/// the span, which stays `J`-invariant), repeat.  The columns `(u_1..u_n,
/// v_1..v_n)` then form the map.
pub fn structure_to_map(j: &ComplexStructure) -> Result<OrthogonalMap> {
    let n = j.n();
    let dim = 2 * n;
    let mut chosen: Vec<Array1<f64>> = Vec::with_capacity(dim);
    let mut us: Vec<Array1<f64>> = Vec::with_capacity(n);
    let mut vs: Vec<Array1<f64>> = Vec::with_capacity(n);

    let project_out = |w: &mut Array1<f64>, basis: &[Array1<f64>]| {
        for _ in 0..2 {
            for b in basis {
                let coeff = b.dot(&*w);
                *w = &*w - &b.mapv(|x| coeff * x);
            }
        }
    };

    let mut candidate = 0usize;
    while us.len() < n {
        if candidate >= dim {
            return Err(Error::InvariantViolation {
                what: "structure_to_map: adapted basis construction exhausted candidates",
                residual: f64::NAN,
                tol: STRUCT_TOL,
            });
        }
        let mut u = Array1::zeros(dim);
        u[candidate] = 1.0;
        candidate += 1;
        project_out(&mut u, &chosen);
        let norm = u.dot(&u).sqrt();
        if norm < 1e-6 {
            continue; // candidate already in the span
        }
        u.mapv_inplace(|x| x / norm);

        let mut v = j.j.dot(&u);
        project_out(&mut v, &chosen);
        // v = J u is orthogonal to u and to the previous pairs up to
        // roundoff; renormalise defensively.
        let vnorm = v.dot(&v).sqrt();
        if vnorm < 0.5 {
            return Err(Error::InvariantViolation {
                what: "structure_to_map: J u collapsed under projection",
                residual: 1.0 - vnorm,
                tol: 0.5,
            });
        }
        v.mapv_inplace(|x| x / vnorm);

        chosen.push(u.clone());
        chosen.push(v.clone());
        us.push(u);
        vs.push(v);
    }

    let mut o = Array2::zeros((dim, dim));
    for (k, u) in us.iter().enumerate() {
        for row in 0..dim {
            o[(row, k)] = u[row];
        }
    }
    for (k, v) in vs.iter().enumerate() {
        for row in 0..dim {
            o[(row, n + k)] = v[row];
        }
    }
    OrthogonalMap::new(o)
}

/// Haar-distributed orthogonal map on `R^{2n}`, deterministic in `seed`.
pub fn random_orthogonal(n: usize, seed: u64) -> Result<OrthogonalMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 2 * n;
    let mut a = Array2::from_shape_fn((dim, dim), |_| rng.sample::<f64, _>(StandardNormal));
    linalg::mgs_orthonormalize_real(&mut a)?;
    OrthogonalMap::new(a)
}

/// Haar-distributed unitary on `C^n`, deterministic in `seed`.
pub fn random_unitary(n: usize, seed: u64) -> Result<UnitaryMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Array2::from_shape_fn((n, n), |_| {
        C64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    });
    linalg::mgs_orthonormalize_complex(&mut a)?;
    UnitaryMatrix::new(a)
}

/// Random symplectic-kind block pair, deterministic in `seed`.
///
/// Sampled in the Lie algebra: `exp [[α, β], [conj β, conj α]]` with `α`
/// anti-Hermitian and `β` symmetric lands in the group whose upper blocks
/// satisfy the symplectic relations; the result is validated post hoc.
pub fn random_symplectic_rs(n: usize, seed: u64) -> Result<RSBlocks> {
    random_symplectic_rs_scaled(n, seed, 0.4 / (n as f64).sqrt())
}

/// Same sampler with an explicit generator scale; small scales give
/// gently squeezing blocks whose vacua fit in modest Fock cutoffs.
pub(crate) fn random_symplectic_rs_scaled(n: usize, seed: u64, scale: f64) -> Result<RSBlocks> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || -> C64 {
        C64::new(
            scale * rng.sample::<f64, _>(StandardNormal),
            scale * rng.sample::<f64, _>(StandardNormal),
        )
    };
    let g1 = Array2::from_shape_fn((n, n), |_| gauss());
    let g2 = Array2::from_shape_fn((n, n), |_| gauss());
    let alpha = {
        let g1h = linalg::adjoint(&g1);
        (&g1 - &g1h).mapv(|v| 0.5 * v)
    };
    let beta = {
        let g2t = g2.t().to_owned();
        (&g2 + &g2t).mapv(|v| 0.5 * v)
    };

    let mut x = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            x[(i, j)] = alpha[(i, j)];
            x[(i, n + j)] = beta[(i, j)];
            x[(n + i, j)] = beta[(i, j)].conj();
            x[(n + i, n + j)] = alpha[(i, j)].conj();
        }
    }
    let m = linalg::expm(&x);
    let r = m.slice(s![..n, ..n]).to_owned();
    let sb = m.slice(s![..n, n..]).to_owned();
    RSBlocks::new(r, sb, BlockKind::Symplectic)
}

//! Classical dynamics of nine Hermitian `N x N` matrices with the
//! commutator-squared potential, and the bridge from matrix
//! configurations to flat phase-space points.
//!
//! Energy is carried in velocity form,
//! `E = (1/(2 r11)) (tr Σ_μ V_μ² - tr Σ_{μ>ν} [X_μ, X_ν]²)`,
//! whose potential term is nonnegative because commutators of Hermitian
//! matrices are anti-Hermitian.  The force is
//! `Ẍ_μ = -Σ_{ν≠μ} [[X_μ, X_ν], X_ν]`; its overall sign is pinned by
//! energy conservation, and the unit tests drive the integrator with both
//! candidate signs so the wrong one visibly fails.
//!
//! Time evolution is kick-drift-kick leapfrog.  Commutators of Hermitian
//! matrices keep the force Hermitian, so Hermiticity is preserved up to
//! roundoff; it is re-enforced each step anyway.  Leapfrog also conserves
//! the charge `G = Σ_μ [X_μ, V_μ]` identically (the kick contribution
//! cancels by the Jacobi identity), making `‖G‖_F` a sharp integrator
//! diagnostic.
//!
//! [`to_phase_point`] expands positions and scaled velocities `V/r11` in
//! a trace-orthonormal Hermitian basis, giving a linear isometry onto
//! `R^{2n}` with `n = 9 N²`.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::phase_space::PhasePoint;

/// Number of matrix directions.
pub const NUM_DIRECTIONS: usize = 9;

/// Allowed Hermiticity defect of input matrices.
pub const HERM_TOL: f64 = 1e-12;

/// Positions and velocities of the nine-matrix system.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixConfig {
    n_size: usize,
    r11: f64,
    x: Vec<Array2<C64>>,
    v: Vec<Array2<C64>>,
}

/// Trace-orthonormal Hermitian basis of `N x N` matrices.
#[derive(Debug, Clone)]
pub struct LieBasis {
    n_size: usize,
    mats: Vec<Array2<C64>>,
}

/// One sampled point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    pub tr_x_sq: f64,
    pub gauss_norm: f64,
}

/// Result of [`evolve`]: the final configuration plus sampled observables.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_config: MatrixConfig,
    pub samples: Vec<TrajectorySample>,
}

fn commutator(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    a.dot(b) - b.dot(a)
}

fn trace_re(a: &Array2<C64>) -> f64 {
    (0..a.nrows()).map(|i| a[(i, i)].re).sum()
}

impl MatrixConfig {
    /// Validate and wrap nine position and nine velocity matrices.
    pub fn new(r11: f64, x: Vec<Array2<C64>>, v: Vec<Array2<C64>>) -> Result<Self> {
        if !(r11 > 0.0) || !r11.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "r11 must be a positive real, got {r11}"
            )));
        }
        if x.len() != NUM_DIRECTIONS || v.len() != NUM_DIRECTIONS {
            return Err(Error::DimensionMismatch {
                context: "MatrixConfig: nine directions expected",
                left: NUM_DIRECTIONS,
                right: x.len().max(v.len()),
            });
        }
        let n_size = x[0].nrows();
        if n_size == 0 {
            return Err(Error::InvalidParameter("matrix size must be >= 1".into()));
        }
        let mut checked_x = Vec::with_capacity(NUM_DIRECTIONS);
        let mut checked_v = Vec::with_capacity(NUM_DIRECTIONS);
        for (label, list, out) in [("X", &x, &mut checked_x), ("V", &v, &mut checked_v)] {
            for m in list.iter() {
                if m.nrows() != n_size || m.ncols() != n_size {
                    return Err(Error::DimensionMismatch {
                        context: "MatrixConfig: matrices must share one square shape",
                        left: n_size,
                        right: m.nrows().max(m.ncols()),
                    });
                }
                if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "{label} contains non-finite entries"
                    )));
                }
                let h = linalg::hermitize(m);
                let defect = linalg::max_abs_c(&(m - &h));
                if defect > HERM_TOL {
                    return Err(Error::InvariantViolation {
                        what: "matrix config entries must be Hermitian",
                        residual: defect,
                        tol: HERM_TOL,
                    });
                }
                out.push(h);
            }
        }
        Ok(Self {
            n_size,
            r11,
            x: checked_x,
            v: checked_v,
        })
    }

    /// The zero configuration.
    pub fn zero(n_size: usize, r11: f64) -> Result<Self> {
        let z = vec![Array2::zeros((n_size, n_size)); NUM_DIRECTIONS];
        Self::new(r11, z.clone(), z)
    }

    /// Random Hermitian positions and velocities, each normalised to
    /// Frobenius norm `scale`; deterministic in `seed`.
    pub fn random_bounded(n_size: usize, r11: f64, seed: u64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive, got {scale}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize| -> Array2<C64> {
            let raw = Array2::from_shape_fn((n, n), |_| {
                C64::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                )
            });
            let h = linalg::hermitize(&raw);
            let norm = linalg::fro_norm(&h);
            h.mapv(|c| c * (scale / norm))
        };
        let x = (0..NUM_DIRECTIONS).map(|_| draw(n_size)).collect();
        let v = (0..NUM_DIRECTIONS).map(|_| draw(n_size)).collect();
        Self::new(r11, x, v)
    }

    /// Random initial data for a *bounded* orbit: positions at Frobenius
    /// norm `scale`, velocities at `scale²`.  That balance puts the
    /// kinetic energy on the order of the commutator potential, so the
    /// potential confines the motion instead of the configuration
    /// dispersing ballistically; deterministic in `seed`.
    pub fn random_confined(n_size: usize, r11: f64, seed: u64, scale: f64) -> Result<Self> {
        let xs = Self::random_bounded(n_size, r11, seed, scale)?;
        let vs = Self::random_bounded(n_size, r11, seed.wrapping_add(0x9e37), scale * scale)?;
        Self::new(r11, xs.x, vs.x)
    }

    pub fn n_size(&self) -> usize {
        self.n_size
    }

    pub fn r11(&self) -> f64 {
        self.r11
    }

    pub fn x(&self, mu: usize) -> &Array2<C64> {
        &self.x[mu]
    }

    pub fn v(&self, mu: usize) -> &Array2<C64> {
        &self.v[mu]
    }

    /// Longitudinal momentum `N / r11`, reported as metadata.
    pub fn p_minus(&self) -> f64 {
        self.n_size as f64 / self.r11
    }
}

/// `E = (1/(2 r11)) (tr Σ V² - tr Σ_{μ>ν} [X_μ, X_ν]²)`.
pub fn energy(cfg: &MatrixConfig) -> f64 {
    let kinetic: f64 = cfg.v.iter().map(|v| trace_re(&v.dot(v))).sum();
    let mut potential = 0.0;
    for mu in 0..NUM_DIRECTIONS {
        for nu in 0..mu {
            let c = commutator(&cfg.x[mu], &cfg.x[nu]);
            potential -= trace_re(&c.dot(&c));
        }
    }
    (kinetic + potential) / (2.0 * cfg.r11)
}

/// `‖Σ_μ [X_μ, V_μ]‖_F`, the conserved charge of the evolution.
pub fn gauss_constraint(cfg: &MatrixConfig) -> f64 {
    let n = cfg.n_size;
    let mut g = Array2::<C64>::zeros((n, n));
    for mu in 0..NUM_DIRECTIONS {
        g = g + commutator(&cfg.x[mu], &cfg.v[mu]);
    }
    linalg::fro_norm(&g)
}

fn acceleration_signed(x: &[Array2<C64>], sign: f64) -> Vec<Array2<C64>> {
    let n = x[0].nrows();
    let mut acc = vec![Array2::<C64>::zeros((n, n)); NUM_DIRECTIONS];
    for mu in 0..NUM_DIRECTIONS {
        for nu in 0..NUM_DIRECTIONS {
            if nu == mu {
                continue;
            }
            let inner = commutator(&x[mu], &x[nu]);
            acc[mu] = &acc[mu] + &commutator(&inner, &x[nu]).mapv(|c| c * sign);
        }
    }
    acc
}

/// Force law `Ẍ_μ = -Σ_{ν≠μ} [[X_μ, X_ν], X_ν]`.
pub fn acceleration(x: &[Array2<C64>]) -> Vec<Array2<C64>> {
    acceleration_signed(x, -1.0)
}

fn tr_x_sq(x: &[Array2<C64>]) -> f64 {
    x.iter().map(|m| trace_re(&m.dot(m))).sum()
}

/// Leapfrog evolution for `steps` steps of size `dt`, sampling
/// observables every `stride` steps (step 0 and the final step are always
/// sampled).  `dt = 0` is an exact no-op evolution.
pub fn evolve(cfg: &MatrixConfig, dt: f64, steps: usize, stride: usize) -> Result<Trajectory> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "dt must be a finite nonnegative real, got {dt}"
        )));
    }
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be >= 1".into()));
    }
    let mut x = cfg.x.clone();
    let mut v = cfg.v.clone();
    let mut samples = Vec::new();

    let observe =
        |x: &[Array2<C64>], v: &[Array2<C64>], step: usize| -> Result<TrajectorySample> {
            let probe = MatrixConfig {
                n_size: cfg.n_size,
                r11: cfg.r11,
                x: x.to_vec(),
                v: v.to_vec(),
            };
            let sample = TrajectorySample {
                step,
                time: step as f64 * dt,
                energy: energy(&probe),
                tr_x_sq: tr_x_sq(x),
                gauss_norm: gauss_constraint(&probe),
            };
            if !sample.energy.is_finite() || !sample.tr_x_sq.is_finite() {
                return Err(Error::NonFinite {
                    context: "matrix evolution",
                    step,
                });
            }
            Ok(sample)
        };

    samples.push(observe(&x, &v, 0)?);
    let mut acc = acceleration(&x);
    for step in 1..=steps {
        let half = 0.5 * dt;
        for mu in 0..NUM_DIRECTIONS {
            v[mu] = &v[mu] + &acc[mu].mapv(|c| c * half);
            x[mu] = &x[mu] + &v[mu].mapv(|c| c * dt);
        }
        acc = acceleration(&x);
        for mu in 0..NUM_DIRECTIONS {
            v[mu] = &v[mu] + &acc[mu].mapv(|c| c * half);
            x[mu] = linalg::hermitize(&x[mu]);
            v[mu] = linalg::hermitize(&v[mu]);
        }
        if step % stride == 0 || step == steps {
            samples.push(observe(&x, &v, step)?);
        }
    }

    Ok(Trajectory {
        final_config: MatrixConfig {
            n_size: cfg.n_size,
            r11: cfg.r11,
            x,
            v,
        },
        samples,
    })
}

/// Trace-orthonormal Hermitian basis of `N x N` matrices, ordered as: for
/// each index pair `i < j` the symmetric then antisymmetric combination,
/// then the traceless diagonals, then the scaled identity.  For `N = 2`
/// this is exactly `(σ1, σ2, σ3, I)/sqrt(2)`.
pub fn build_basis(n_size: usize) -> Result<LieBasis> {
    if n_size < 2 {
        return Err(Error::InvalidParameter(
            "basis construction needs N >= 2".into(),
        ));
    }
    let n = n_size;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut mats = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut sym = Array2::<C64>::zeros((n, n));
            sym[(i, j)] = C64::new(inv_sqrt2, 0.0);
            sym[(j, i)] = C64::new(inv_sqrt2, 0.0);
            mats.push(sym);
            let mut anti = Array2::<C64>::zeros((n, n));
            anti[(i, j)] = C64::new(0.0, -inv_sqrt2);
            anti[(j, i)] = C64::new(0.0, inv_sqrt2);
            mats.push(anti);
        }
    }
    for k in 1..n {
        let norm = 1.0 / ((k * (k + 1)) as f64).sqrt();
        let mut d = Array2::<C64>::zeros((n, n));
        for i in 0..k {
            d[(i, i)] = C64::new(norm, 0.0);
        }
        d[(k, k)] = C64::new(-(k as f64) * norm, 0.0);
        mats.push(d);
    }
    let mut id = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        id[(i, i)] = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    }
    mats.push(id);
    Ok(LieBasis { n_size, mats })
}

impl LieBasis {
    pub fn n_size(&self) -> usize {
        self.n_size
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn mat(&self, a: usize) -> &Array2<C64> {
        &self.mats[a]
    }

    /// Real expansion coefficients `tr(T_a H)` of a Hermitian matrix.
    pub fn coefficients(&self, h: &Array2<C64>) -> Result<Array1<f64>> {
        if h.nrows() != self.n_size || h.ncols() != self.n_size {
            return Err(Error::DimensionMismatch {
                context: "LieBasis::coefficients",
                left: self.n_size,
                right: h.nrows().max(h.ncols()),
            });
        }
        Ok(Array1::from_iter(
            self.mats.iter().map(|t| trace_re(&t.dot(h))),
        ))
    }

    /// Rebuild `Σ_a c_a T_a` from coefficients.
    pub fn reconstruct(&self, coeffs: &Array1<f64>) -> Result<Array2<C64>> {
        if coeffs.len() != self.mats.len() {
            return Err(Error::DimensionMismatch {
                context: "LieBasis::reconstruct",
                left: self.mats.len(),
                right: coeffs.len(),
            });
        }
        let mut out = Array2::<C64>::zeros((self.n_size, self.n_size));
        for (c, t) in coeffs.iter().zip(&self.mats) {
            out = out + t.mapv(|e| e * *c);
        }
        Ok(out)
    }
}

/// Expand a configuration into flat phase-space coordinates: `q` holds
/// the basis coefficients of the positions, `p` those of the scaled
/// velocities `V/r11`; layout is direction-major, basis-index-minor, so
/// `n = 9 N²`.  Trace-orthonormality makes this a linear isometry.
pub fn to_phase_point(cfg: &MatrixConfig, basis: &LieBasis) -> Result<PhasePoint> {
    if basis.n_size != cfg.n_size {
        return Err(Error::DimensionMismatch {
            context: "to_phase_point",
            left: cfg.n_size,
            right: basis.n_size,
        });
    }
    let per = basis.len();
    let mut q = Array1::zeros(NUM_DIRECTIONS * per);
    let mut p = Array1::zeros(NUM_DIRECTIONS * per);
    for mu in 0..NUM_DIRECTIONS {
        let qc = basis.coefficients(&cfg.x[mu])?;
        let pc = basis.coefficients(&cfg.v[mu])?;
        for a in 0..per {
            q[mu * per + a] = qc[a];
            p[mu * per + a] = pc[a] / cfg.r11;
        }
    }
    PhasePoint::from_qp(q, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli(k: usize) -> Array2<C64> {
        let (o, l, i) = (
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
        );
        match k {
            1 => Array2::from_shape_vec((2, 2), vec![o, l, l, o]).unwrap(),
            2 => Array2::from_shape_vec((2, 2), vec![o, -i, i, o]).unwrap(),
            3 => Array2::from_shape_vec((2, 2), vec![l, o, o, -l]).unwrap(),
            _ => panic!("pauli index"),
        }
    }

    fn config_with(x_entries: &[(usize, Array2<C64>)], v_entries: &[(usize, Array2<C64>)], n: usize) -> MatrixConfig {
        let mut x = vec![Array2::zeros((n, n)); NUM_DIRECTIONS];
        let mut v = vec![Array2::zeros((n, n)); NUM_DIRECTIONS];
        for (mu, m) in x_entries {
            x[*mu] = m.clone();
        }
        for (mu, m) in v_entries {
            v[*mu] = m.clone();
        }
        MatrixConfig::new(1.0, x, v).unwrap()
    }

    #[test]
    fn zero_config_has_zero_energy() {
        let cfg = MatrixConfig::zero(3, 1.0).unwrap();
        assert_eq!(energy(&cfg), 0.0);
        assert_eq!(gauss_constraint(&cfg), 0.0);
    }

    #[test]
    fn pauli_pair_energy_is_four() {
        let cfg = config_with(&[(0, pauli(3)), (1, pauli(1))], &[], 2);
        assert!((energy(&cfg) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn kinetic_energy_of_a_pauli_velocity_is_one() {
        let cfg = config_with(&[], &[(0, pauli(1))], 2);
        assert!((energy(&cfg) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn r11_rescales_the_energy() {
        let mut x = vec![Array2::zeros((2, 2)); NUM_DIRECTIONS];
        x[0] = pauli(3);
        x[1] = pauli(1);
        let cfg = MatrixConfig::new(2.0, x, vec![Array2::zeros((2, 2)); NUM_DIRECTIONS]).unwrap();
        assert!((energy(&cfg) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn potential_is_nonnegative() {
        for seed in 0..20u64 {
            let cfg = MatrixConfig::random_bounded(3, 1.0, seed, 1.0).unwrap();
            let frozen = MatrixConfig::new(
                1.0,
                (0..NUM_DIRECTIONS).map(|mu| cfg.x(mu).clone()).collect(),
                vec![Array2::zeros((3, 3)); NUM_DIRECTIONS],
            )
            .unwrap();
            assert!(energy(&frozen) >= 0.0, "seed {seed}");
        }
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let mut x = vec![Array2::<C64>::zeros((2, 2)); NUM_DIRECTIONS];
        x[3][(0, 1)] = C64::new(1.0, 0.0); // no matching (1,0) entry
        let v = vec![Array2::zeros((2, 2)); NUM_DIRECTIONS];
        assert!(matches!(
            MatrixConfig::new(1.0, x, v),
            Err(Error::InvariantViolation { .. })
        ));
    }

    #[test]
    fn random_bounded_is_deterministic_and_normalised() {
        let a = MatrixConfig::random_bounded(2, 1.0, 7, 0.25).unwrap();
        let b = MatrixConfig::random_bounded(2, 1.0, 7, 0.25).unwrap();
        assert_eq!(a, b);
        for mu in 0..NUM_DIRECTIONS {
            assert!((linalg::fro_norm(a.x(mu)) - 0.25).abs() < 1e-13);
            assert!((linalg::fro_norm(a.v(mu)) - 0.25).abs() < 1e-13);
        }
    }

    #[test]
    fn confined_data_stays_bounded() {
        let cfg = MatrixConfig::random_confined(2, 1.0, 42, 0.1).unwrap();
        let traj = evolve(&cfg, 1e-2, 2000, 100).unwrap();
        let x0 = traj.samples[0].tr_x_sq;
        for s in &traj.samples {
            assert!(s.tr_x_sq < 4.0 * x0, "dispersed: {} vs {x0}", s.tr_x_sq);
        }
        assert_eq!(cfg, MatrixConfig::random_confined(2, 1.0, 42, 0.1).unwrap());
    }

    #[test]
    fn zero_steps_and_zero_dt_are_no_ops() {
        let cfg = MatrixConfig::random_bounded(2, 1.0, 3, 0.5).unwrap();
        let t0 = evolve(&cfg, 1e-3, 0, 1).unwrap();
        assert_eq!(t0.final_config, cfg);
        assert_eq!(t0.samples.len(), 1);
        let t1 = evolve(&cfg, 0.0, 5, 1).unwrap();
        assert_eq!(t1.final_config, cfg);
    }

    #[test]
    fn lone_matrix_flies_freely() {
        let cfg = config_with(&[(4, pauli(3))], &[(4, pauli(1))], 2);
        let traj = evolve(&cfg, 0.01, 100, 10).unwrap();
        let want = &pauli(3) + &pauli(1).mapv(|c| c * 1.0);
        let got = traj.final_config.x(4);
        assert!(linalg::max_abs_c(&(got - &want)) < 1e-12);
        assert!(linalg::max_abs_c(&(traj.final_config.v(4) - &pauli(1))) < 1e-15);
    }

    #[test]
    fn shipped_force_sign_conserves_energy_and_the_flipped_one_does_not() {
        let cfg = MatrixConfig::random_bounded(2, 1.0, 11, 0.8).unwrap();
        let e0 = energy(&cfg);
        let drift = |sign: f64| -> f64 {
            let mut x: Vec<_> = (0..NUM_DIRECTIONS).map(|mu| cfg.x(mu).clone()).collect();
            let mut v: Vec<_> = (0..NUM_DIRECTIONS).map(|mu| cfg.v(mu).clone()).collect();
            let dt = 5e-3;
            let mut acc = acceleration_signed(&x, sign);
            for _ in 0..400 {
                for mu in 0..NUM_DIRECTIONS {
                    v[mu] = &v[mu] + &acc[mu].mapv(|c| c * (0.5 * dt));
                    x[mu] = &x[mu] + &v[mu].mapv(|c| c * dt);
                }
                acc = acceleration_signed(&x, sign);
                for mu in 0..NUM_DIRECTIONS {
                    v[mu] = &v[mu] + &acc[mu].mapv(|c| c * (0.5 * dt));
                }
            }
            // The unstable sign can overflow to non-finite entries; that
            // counts as unbounded drift.
            match MatrixConfig::new(1.0, x, v) {
                Ok(probe) => ((energy(&probe) - e0) / e0).abs(),
                Err(_) => f64::INFINITY,
            }
        };
        let good = drift(-1.0);
        let bad = drift(1.0);
        // Bounded leapfrog fluctuation ~ (ω dt)² on one side, runaway on
        // the inverted potential on the other.
        assert!(good < 1e-4, "shipped sign drift {good}");
        assert!(bad > 1e-2, "flipped sign drift {bad} suspiciously small");
    }

    #[test]
    fn leapfrog_conserves_energy_and_gauss_charge() {
        let cfg = MatrixConfig::random_bounded(2, 1.0, 5, 0.5).unwrap();
        let traj = evolve(&cfg, 1e-3, 2000, 100).unwrap();
        let e0 = traj.samples[0].energy;
        let g0 = traj.samples[0].gauss_norm;
        for s in &traj.samples {
            assert!(((s.energy - e0) / e0).abs() < 1e-7, "step {}", s.step);
            assert!((s.gauss_norm - g0).abs() < 1e-12, "step {}", s.step);
        }
    }

    #[test]
    fn evolution_is_time_reversible() {
        let cfg = MatrixConfig::random_bounded(2, 1.0, 9, 0.5).unwrap();
        let fwd = evolve(&cfg, 1e-3, 1000, 1000).unwrap();
        let turned = MatrixConfig::new(
            1.0,
            (0..NUM_DIRECTIONS)
                .map(|mu| fwd.final_config.x(mu).clone())
                .collect(),
            (0..NUM_DIRECTIONS)
                .map(|mu| fwd.final_config.v(mu).mapv(|c| -c))
                .collect(),
        )
        .unwrap();
        let back = evolve(&turned, 1e-3, 1000, 1000).unwrap();
        let mut err = 0.0_f64;
        for mu in 0..NUM_DIRECTIONS {
            err = err.max(linalg::max_abs_c(&(back.final_config.x(mu) - cfg.x(mu))));
            let vsum = back.final_config.v(mu) + cfg.v(mu);
            err = err.max(linalg::max_abs_c(&vsum));
        }
        assert!(err < 1e-10, "return error {err}");
    }

    #[test]
    fn pauli_basis_comes_out_for_n_two() {
        let basis = build_basis(2).unwrap();
        assert_eq!(basis.len(), 4);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for (a, want) in [pauli(1), pauli(2), pauli(3)].iter().enumerate() {
            let scaled = want.mapv(|c| c * inv_sqrt2);
            assert!(linalg::max_abs_c(&(basis.mat(a) - &scaled)) < 1e-15, "a = {a}");
        }
        let id = linalg::eye_c(2).mapv(|c| c * inv_sqrt2);
        assert!(linalg::max_abs_c(&(basis.mat(3) - &id)) < 1e-15);
    }

    #[test]
    fn basis_is_trace_orthonormal() {
        for n in 2..=4usize {
            let basis = build_basis(n).unwrap();
            assert_eq!(basis.len(), n * n);
            for a in 0..basis.len() {
                for b in 0..basis.len() {
                    let g = trace_re(&basis.mat(a).dot(basis.mat(b)));
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((g - want).abs() < 1e-13, "n {n} ({a},{b}): {g}");
                }
            }
        }
    }

    #[test]
    fn coefficients_reconstruct_random_hermitian_matrices() {
        let basis = build_basis(3).unwrap();
        for seed in 0..10u64 {
            let cfg = MatrixConfig::random_bounded(3, 1.0, seed, 1.0).unwrap();
            let h = cfg.x(0);
            let coeffs = basis.coefficients(h).unwrap();
            let back = basis.reconstruct(&coeffs).unwrap();
            assert!(linalg::max_abs_c(&(&back - h)) < 1e-12);
        }
    }

    #[test]
    fn phase_point_layout_is_direction_major() {
        let basis = build_basis(2).unwrap();
        let mut x = vec![Array2::zeros((2, 2)); NUM_DIRECTIONS];
        x[2] = basis.mat(1).clone();
        let cfg = MatrixConfig::new(1.0, x, vec![Array2::zeros((2, 2)); NUM_DIRECTIONS]).unwrap();
        let pt = to_phase_point(&cfg, &basis).unwrap();
        assert_eq!(pt.n(), 36);
        for (i, qv) in pt.q().iter().enumerate() {
            let want = if i == 2 * 4 + 1 { 1.0 } else { 0.0 };
            assert!((qv - want).abs() < 1e-14, "q[{i}] = {qv}");
        }
    }

    #[test]
    fn phase_point_is_an_isometry() {
        let basis = build_basis(2).unwrap();
        for seed in 0..10u64 {
            let cfg = MatrixConfig::random_bounded(2, 1.7, seed, 0.9).unwrap();
            let pt = to_phase_point(&cfg, &basis).unwrap();
            let lhs: f64 = 0.5
                * (pt.q().iter().map(|v| v * v).sum::<f64>()
                    + pt.p().iter().map(|v| v * v).sum::<f64>());
            let mut rhs = 0.0;
            for mu in 0..NUM_DIRECTIONS {
                rhs += 0.5 * trace_re(&cfg.x(mu).dot(cfg.x(mu)));
                let scaled = cfg.v(mu).mapv(|c| c / cfg.r11());
                rhs += 0.5 * trace_re(&scaled.dot(&scaled));
            }
            assert!((lhs - rhs).abs() < 1e-12, "seed {seed}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn basis_needs_at_least_two_dimensions() {
        assert!(matches!(
            build_basis(1),
            Err(Error::InvalidParameter(_))
        ));
    }
}

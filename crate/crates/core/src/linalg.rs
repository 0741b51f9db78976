//! Small dense linear-algebra kernels shared across the crate.
//!
//! Everything here is hand-rolled on purpose: the dimensions we meet are a
//! few thousand at most, and a self-contained Jacobi eigensolver plus
//! modified Gram-Schmidt QR keeps results deterministic across platforms
//! without dragging in a LAPACK backend.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Max absolute value over the entries of a complex matrix.
pub fn max_abs_c(a: &Array2<C64>) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
}

/// Max absolute value over the entries of a real matrix.
pub fn max_abs_r(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Conjugate transpose.
pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|v| v.conj())
}

/// Hermitian part `(A + A†)/2`.
pub fn hermitize(a: &Array2<C64>) -> Array2<C64> {
    let at = adjoint(a);
    (a + &at).mapv(|v| 0.5 * v)
}

/// Frobenius norm of a complex matrix.
pub fn fro_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Complex identity matrix.
pub fn eye_c(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, C64::new(1.0, 0.0))
}

/// `max |A†A - I|`; zero iff the columns are orthonormal.
pub fn unitarity_residual(a: &Array2<C64>) -> f64 {
    let g = adjoint(a).dot(a);
    max_abs_c(&(&g - &eye_c(a.ncols())))
}

/// `max |OᵀO - I|` for a real matrix.
pub fn orthogonality_residual(a: &Array2<f64>) -> f64 {
    let g = a.t().dot(a);
    let n = a.ncols();
    max_abs_r(&(&g - &Array2::<f64>::eye(n)))
}

/// Orthonormalize the columns of a real matrix in place with modified
/// Gram-Schmidt (two projection passes).  The implied `R` factor has a
/// positive diagonal by construction, which is exactly the sign fix that
/// turns QR of a Gaussian matrix into a Haar sample.
pub fn mgs_orthonormalize_real(a: &mut Array2<f64>) -> Result<()> {
    let (rows, cols) = a.dim();
    for j in 0..cols {
        for _pass in 0..2 {
            for i in 0..j {
                let mut r = 0.0;
                for k in 0..rows {
                    r += a[(k, i)] * a[(k, j)];
                }
                for k in 0..rows {
                    a[(k, j)] -= r * a[(k, i)];
                }
            }
        }
        let norm = (0..rows).map(|k| a[(k, j)] * a[(k, j)]).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::Singular {
                what: "Gram-Schmidt column",
                condition: f64::INFINITY,
            });
        }
        for k in 0..rows {
            a[(k, j)] /= norm;
        }
    }
    Ok(())
}

/// Complex analogue of [`mgs_orthonormalize_real`].  Normalisation keeps
/// the implied `R` diagonal real and positive, so a Gaussian input yields a
/// Haar-distributed unitary.
pub fn mgs_orthonormalize_complex(a: &mut Array2<C64>) -> Result<()> {
    let (rows, cols) = a.dim();
    for j in 0..cols {
        for _pass in 0..2 {
            for i in 0..j {
                let mut r = C64::new(0.0, 0.0);
                for k in 0..rows {
                    r += a[(k, i)].conj() * a[(k, j)];
                }
                for k in 0..rows {
                    let v = a[(k, i)];
                    a[(k, j)] -= r * v;
                }
            }
        }
        let norm = (0..rows).map(|k| a[(k, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::Singular {
                what: "Gram-Schmidt column",
                condition: f64::INFINITY,
            });
        }
        for k in 0..rows {
            a[(k, j)] /= norm;
        }
    }
    Ok(())
}

/// Full spectrum of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching unit
/// eigenvectors as the columns of the second result.  Residuals satisfy
/// `A v = λ v` to near machine precision for well-scaled input; the
/// procedure is deterministic, so repeated runs agree bit for bit.
pub fn hermitian_eigen(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch {
            context: "hermitian_eigen",
            left: n,
            right: a.ncols(),
        });
    }
    let mut m = a.clone();
    let mut v = eye_c(n);
    let scale = fro_norm(&m).max(f64::MIN_POSITIVE);

    let off = |m: &Array2<C64>| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += m[(p, q)].norm_sqr();
            }
        }
        s.sqrt()
    };

    for _sweep in 0..100 {
        if off(&m) <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let h = apq.norm();
                if h <= 1e-18 * scale {
                    continue;
                }
                let phase = apq / h; // e^{i phi}
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * h);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // G restricted to the (p,q) plane:
                //   [ c            s          ]
                //   [ -s e^{-iphi} c e^{-iphi}]
                // chosen so that (G† M G)[p][q] = 0.
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = -s * phase.conj();
                let gqq = c * phase.conj();

                // M <- M G (columns p and q).
                for k in 0..n {
                    let mp = m[(k, p)];
                    let mq = m[(k, q)];
                    m[(k, p)] = mp * gpp + mq * gqp;
                    m[(k, q)] = mp * gpq + mq * gqq;
                }
                // M <- G† M (rows p and q).
                for k in 0..n {
                    let mp = m[(p, k)];
                    let mq = m[(q, k)];
                    m[(p, k)] = gpp.conj() * mp + gqp.conj() * mq;
                    m[(q, k)] = gpq.conj() * mp + gqq.conj() * mq;
                }
                // V <- V G.
                for k in 0..n {
                    let vp = v[(k, p)];
                    let vq = v[(k, q)];
                    v[(k, p)] = vp * gpp + vq * gqp;
                    v[(k, q)] = vp * gpq + vq * gqq;
                }
                // Re-pin the Hermitian structure on the rotated plane.
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.partial_cmp(&m[(j, j)].re).unwrap());
    let vals = Array1::from_iter(order.iter().map(|&i| m[(i, i)].re));
    let mut vecs = Array2::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        for k in 0..n {
            vecs[(k, col)] = v[(k, i)];
        }
    }
    Ok((vals, vecs))
}

/// Laguerre values `(L_{n-1}(x), L_n(x), L_{n+1}(x))` by the three-term
/// recurrence `(k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}`.
fn laguerre_triplet(n: usize, x: f64) -> (f64, f64, f64) {
    let mut lkm1 = 0.0; // L_{-1}
    let mut lk = 1.0; // L_0
    for k in 0..n {
        let lkp1 = ((2.0 * k as f64 + 1.0 - x) * lk - k as f64 * lkm1) / (k as f64 + 1.0);
        lkm1 = lk;
        lk = lkp1;
    }
    let lnp1 = ((2.0 * n as f64 + 1.0 - x) * lk - n as f64 * lkm1) / (n as f64 + 1.0);
    (lkm1, lk, lnp1)
}

/// Nodes and weights of the `n`-point Gauss-Laguerre rule for the weight
/// `e^{-u}` on `[0, inf)`.
///
/// Initial node guesses come from the Golub-Welsch eigenproblem (Jacobi
/// matrix with diagonal `2k + 1`, off-diagonal `k + 1`); each node is then
/// Newton-polished on the Laguerre recurrence and the weight evaluated as
/// `w_i = x_i / ((n+1)^2 L_{n+1}(x_i)^2)`.  Going through the closed form
/// keeps *relative* accuracy on the exponentially small top weights, which
/// squared first eigenvector components cannot deliver.  The rule
/// integrates `u^j` exactly (to `j!`) for `j <= 2n - 1`.
pub fn gauss_laguerre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "Gauss-Laguerre rule needs at least one node".into(),
        ));
    }
    let mut j = Array2::<C64>::zeros((n, n));
    for k in 0..n {
        j[(k, k)] = C64::new(2.0 * k as f64 + 1.0, 0.0);
        if k + 1 < n {
            let b = (k + 1) as f64;
            j[(k, k + 1)] = C64::new(b, 0.0);
            j[(k + 1, k)] = C64::new(b, 0.0);
        }
    }
    let (vals, _) = hermitian_eigen(&j)?;

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = vals[i];
        for _ in 0..8 {
            let (lnm1, ln, _) = laguerre_triplet(n, x);
            // L_n'(x) = n (L_n(x) - L_{n-1}(x)) / x
            let deriv = n as f64 * (ln - lnm1) / x;
            let step = ln / deriv;
            x -= step;
            if step.abs() <= 1e-15 * x.abs() {
                break;
            }
        }
        let (_, _, lnp1) = laguerre_triplet(n, x);
        let np1 = (n + 1) as f64;
        let w = x / (np1 * np1 * lnp1 * lnp1);
        nodes.push(x);
        weights.push(w);
    }
    Ok((nodes, weights))
}

/// Matrix exponential by scaling and squaring with a truncated Taylor
/// series.  Accurate to machine precision for the moderate norms used by
/// the group-element parametrisations in this crate.
pub fn expm(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    let norm = a.iter().map(|v| v.norm()).fold(0.0_f64, f64::max) * n as f64;
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let b = a.mapv(|v| v / 2f64.powi(s as i32));

    let mut result = eye_c(n);
    let mut term = eye_c(n);
    for k in 1..=40 {
        term = term.dot(&b).mapv(|v| v / k as f64);
        result = &result + &term;
        if max_abs_c(&term) < 1e-20 * max_abs_c(&result).max(1.0) {
            break;
        }
    }
    for _ in 0..s {
        result = result.dot(&result);
    }
    result
}

/// Solve `A X = B` for square complex `A` by LU with partial pivoting.
pub fn solve_complex(a: &Array2<C64>, b: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "solve_complex: matrix must be square",
            left: n,
            right: a.ncols(),
        });
    }
    if b.nrows() != n {
        return Err(Error::DimensionMismatch {
            context: "solve_complex: rhs rows",
            left: n,
            right: b.nrows(),
        });
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = max_abs_c(a).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if lu[(row, col)].norm() > lu[(pivot, col)].norm() {
                pivot = row;
            }
        }
        if lu[(pivot, col)].norm() < 1e-13 * scale {
            return Err(Error::Singular {
                what: "linear solve pivot",
                condition: scale / lu[(pivot, col)].norm().max(f64::MIN_POSITIVE),
            });
        }
        if pivot != col {
            for k in 0..n {
                lu.swap((col, k), (pivot, k));
            }
            for k in 0..x.ncols() {
                x.swap((col, k), (pivot, k));
            }
        }
        let d = lu[(col, col)];
        for row in (col + 1)..n {
            let f = lu[(row, col)] / d;
            if f.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let v = lu[(col, k)];
                lu[(row, k)] -= f * v;
            }
            for k in 0..x.ncols() {
                let v = x[(col, k)];
                x[(row, k)] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        let d = lu[(col, col)];
        for k in 0..x.ncols() {
            x[(col, k)] /= d;
        }
        for row in 0..col {
            let f = lu[(row, col)];
            for k in 0..x.ncols() {
                let v = x[(col, k)];
                x[(row, k)] -= f * v;
            }
        }
    }
    Ok(x)
}

/// Smallest and largest singular values of a complex matrix, via the
/// eigenvalues of `A†A`.
pub fn singular_extremes(a: &Array2<C64>) -> Result<(f64, f64)> {
    let g = adjoint(a).dot(a);
    let (vals, _) = hermitian_eigen(&g)?;
    let lo = vals[0].max(0.0).sqrt();
    let hi = vals[vals.len() - 1].max(0.0).sqrt();
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> Array2<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = Array2::from_shape_fn((n, n), |_| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        hermitize(&raw)
    }

    #[test]
    fn eigen_of_pauli_z_like() {
        let mut a = Array2::<C64>::zeros((2, 2));
        a[(0, 0)] = C64::new(1.0, 0.0);
        a[(1, 1)] = C64::new(-1.0, 0.0);
        let (vals, _) = hermitian_eigen(&a).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_of_pauli_y_like() {
        // [[0, -i], [i, 0]] has eigenvalues -1, +1.
        let mut a = Array2::<C64>::zeros((2, 2));
        a[(0, 1)] = C64::new(0.0, -1.0);
        a[(1, 0)] = C64::new(0.0, 1.0);
        let (vals, vecs) = hermitian_eigen(&a).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        assert!(unitarity_residual(&vecs) < 1e-14);
    }

    #[test]
    fn eigen_residual_random() {
        for seed in 0..20u64 {
            let n = 3 + (seed as usize % 6);
            let a = random_hermitian(n, seed);
            let (vals, vecs) = hermitian_eigen(&a).unwrap();
            // A V = V diag(vals)
            let av = a.dot(&vecs);
            let mut vd = vecs.clone();
            for j in 0..n {
                for i in 0..n {
                    vd[(i, j)] *= vals[j];
                }
            }
            assert!(max_abs_c(&(&av - &vd)) < 1e-12);
            assert!(unitarity_residual(&vecs) < 1e-13);
            // eigenvalues ascending
            for j in 1..n {
                assert!(vals[j] >= vals[j - 1]);
            }
        }
    }

    #[test]
    fn laguerre_moments_are_factorials() {
        let (x, w) = gauss_laguerre(12).unwrap();
        let mut fact = 1.0_f64;
        for j in 0..=23usize {
            if j > 0 {
                fact *= j as f64;
            }
            let approx: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(j as i32)).sum();
            assert!(
                (approx - fact).abs() <= 1e-12 * fact.max(1.0),
                "moment {j}: {approx} vs {fact}"
            );
        }
    }

    #[test]
    fn laguerre_weights_positive_and_normalised() {
        let (_, w) = gauss_laguerre(64).unwrap();
        assert!(w.iter().all(|&wi| wi > 0.0));
        let total: f64 = w.iter().sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn mgs_produces_orthonormal_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut a = Array2::from_shape_fn((8, 8), |_| rng.gen::<f64>() - 0.5);
        mgs_orthonormalize_real(&mut a).unwrap();
        assert!(orthogonality_residual(&a) < 1e-13);

        let mut c = Array2::from_shape_fn((6, 6), |_| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        mgs_orthonormalize_complex(&mut c).unwrap();
        assert!(unitarity_residual(&c) < 1e-13);
    }

    #[test]
    fn expm_matches_scalar_exponential() {
        // diag(a, b) exponentiates entrywise.
        let mut a = Array2::<C64>::zeros((2, 2));
        a[(0, 0)] = C64::new(0.3, 0.7);
        a[(1, 1)] = C64::new(-1.2, 0.1);
        let e = expm(&a);
        assert!((e[(0, 0)] - a[(0, 0)].exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - a[(1, 1)].exp()).norm() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn expm_of_antihermitian_is_unitary() {
        for seed in 0..5u64 {
            let h = random_hermitian(5, seed);
            let ih = h.mapv(|v| C64::new(0.0, 1.0) * v);
            let u = expm(&ih);
            assert!(unitarity_residual(&u) < 1e-13);
        }
    }

    #[test]
    fn solve_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let n = 5;
            let a = Array2::from_shape_fn((n, n), |_| {
                C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let x_true = Array2::from_shape_fn((n, 2), |_| {
                C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let b = a.dot(&x_true);
            let x = solve_complex(&a, &b).unwrap();
            assert!(max_abs_c(&(&x - &x_true)) < 1e-10);
        }
    }

    #[test]
    fn solve_rejects_singular() {
        let a = Array2::<C64>::zeros((3, 3));
        let b = eye_c(3);
        assert!(matches!(
            solve_complex(&a, &b),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn singular_extremes_of_identity_are_one() {
        let (lo, hi) = singular_extremes(&eye_c(4)).unwrap();
        assert!((lo - 1.0).abs() < 1e-12);
        assert!((hi - 1.0).abs() < 1e-12);
    }
}

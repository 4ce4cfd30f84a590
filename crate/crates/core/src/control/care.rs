//! Continuous algebraic Riccati equation `A'P + PA - PBR^-1B'P + Q = 0`.

use nalgebra::{Complex, DMatrix};

use crate::control::ControlError;

/// Largest admissible Frobenius norm of the Riccati residual.
pub const CARE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CareSolution {
    pub k: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub residual: f64,
    /// Largest real part among the closed-loop eigenvalues.
    pub closed_loop_abscissa: f64,
}

pub fn care_residual(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    let r_inv = r.clone().try_inverse().expect("R must be invertible");
    let res = a.transpose() * p + p * a - p * b * r_inv * b.transpose() * p + q;
    res.norm()
}

pub fn spectral_abscissa(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Popov-Belevitch-Hautus test on every eigenvalue with non-negative real part.
pub fn is_stabilizable(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    let m = b.ncols();
    for lambda in a.complex_eigenvalues().iter() {
        if lambda.re < -1e-12 {
            continue;
        }
        let mut pbh = DMatrix::<Complex<f64>>::zeros(n, n + m);
        for i in 0..n {
            for j in 0..n {
                let diag = if i == j { *lambda } else { Complex::new(0.0, 0.0) };
                pbh[(i, j)] = Complex::new(a[(i, j)], 0.0) - diag;
            }
            for j in 0..m {
                pbh[(i, n + j)] = Complex::new(b[(i, j)], 0.0);
            }
        }
        let sv = pbh.singular_values();
        let scale = sv.max().max(1.0);
        if sv.min() <= 1e-10 * scale {
            return false;
        }
    }
    true
}

/// Solves the Lyapunov equation `Ac'X + X Ac + W = 0` through its Kronecker form.
fn lyapunov(ac: &DMatrix<f64>, w: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = ac.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let act = ac.transpose();
    let op = eye.kronecker(&act) + act.kronecker(&eye);
    let rhs = -DMatrix::from_column_slice(n * n, 1, w.as_slice());
    let x = op.lu().solve(&rhs)?;
    let x = DMatrix::from_column_slice(n, n, x.as_slice());
    Some((&x + x.transpose()) * 0.5)
}

/// Stable invariant subspace of the Hamiltonian via the matrix sign function.
fn sign_function_guess(a: &DMatrix<f64>, g: &DMatrix<f64>, q: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-g));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));
    let mut z = h;
    for _ in 0..100 {
        let inv = z.clone().try_inverse()?;
        let det = z.determinant().abs();
        let c = if det > 0.0 && det.is_finite() { det.powf(-1.0 / (2.0 * n as f64)) } else { 1.0 };
        let next = (&z * c + inv / c) * 0.5;
        let change = (&next - &z).norm() / next.norm();
        z = next;
        if change < 1e-13 {
            break;
        }
    }
    let w11 = z.view((0, 0), (n, n)).into_owned();
    let w12 = z.view((0, n), (n, n)).into_owned();
    let w21 = z.view((n, 0), (n, n)).into_owned();
    let w22 = z.view((n, n), (n, n)).into_owned();
    let eye = DMatrix::<f64>::identity(n, n);
    let mut lhs = DMatrix::<f64>::zeros(2 * n, n);
    lhs.view_mut((0, 0), (n, n)).copy_from(&w12);
    lhs.view_mut((n, 0), (n, n)).copy_from(&(w22 + &eye));
    let mut rhs = DMatrix::<f64>::zeros(2 * n, n);
    rhs.view_mut((0, 0), (n, n)).copy_from(&(-(w11 + &eye)));
    rhs.view_mut((n, 0), (n, n)).copy_from(&(-w21));
    let p = lhs.svd(true, true).solve(&rhs, 1e-14).ok()?;
    let p = (&p + p.transpose()) * 0.5;
    p.iter().all(|x| x.is_finite()).then_some(p)
}

/// Stabilizing solution of the CARE and the optimal gain `K = R^-1 B' P`.
pub fn solve_care(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<CareSolution, ControlError> {
    if !is_stabilizable(a, b) {
        return Err(ControlError::Unstabilizable);
    }
    let r_inv = r.clone().try_inverse().ok_or(ControlError::SingularInputWeight)?;
    let g = b * &r_inv * b.transpose();
    let mut history = Vec::new();
    let mut p = sign_function_guess(a, &g, q).ok_or(ControlError::CareDiverged { residuals: vec![] })?;
    let mut best = p.clone();
    let mut best_res = care_residual(a, b, q, r, &p);
    history.push(best_res);
    // Newton-Kleinman refinement from the sign-function estimate.
    for _ in 0..50 {
        let k = &r_inv * b.transpose() * &p;
        let ac = a - b * &k;
        if spectral_abscissa(&ac) >= 0.0 {
            break;
        }
        let w = q + k.transpose() * r * &k;
        let Some(next) = lyapunov(&ac, &w) else { break };
        let res = care_residual(a, b, q, r, &next);
        history.push(res);
        let stalled = res >= best_res * 0.5;
        if res < best_res {
            best = next.clone();
            best_res = res;
        }
        p = next;
        if best_res <= 1e-3 * CARE_TOLERANCE || (stalled && best_res <= CARE_TOLERANCE) {
            break;
        }
    }
    let k = &r_inv * b.transpose() * &best;
    let abscissa = spectral_abscissa(&(a - b * &k));
    if !(best_res <= CARE_TOLERANCE) || !best_res.is_finite() {
        return Err(ControlError::CareDiverged { residuals: history });
    }
    if !(abscissa < 0.0) {
        return Err(ControlError::NotHurwitz { abscissa });
    }
    Ok(CareSolution { k, p: best, residual: best_res, closed_loop_abscissa: abscissa })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    #[test]
    fn scalar_stable_plant() {
        let s = solve_care(&scalar(-1.0), &scalar(1.0), &scalar(1.0), &scalar(1.0)).unwrap();
        let expected = 2f64.sqrt() - 1.0;
        assert!((s.p[(0, 0)] - expected).abs() < 1e-12);
        assert!((s.k[(0, 0)] - expected).abs() < 1e-12);
        assert!((s.closed_loop_abscissa + 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn scalar_integrator() {
        let s = solve_care(&scalar(0.0), &scalar(1.0), &scalar(1.0), &scalar(1.0)).unwrap();
        assert!((s.p[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((s.k[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((s.closed_loop_abscissa + 1.0).abs() < 1e-12);
    }

    #[test]
    fn unstabilizable_pair_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let q = DMatrix::identity(2, 2);
        let r = scalar(1.0);
        assert_eq!(solve_care(&a, &b, &q, &r), Err(ControlError::Unstabilizable));
    }

    #[test]
    fn double_integrator_matches_closed_form() {
        // P = [[sqrt(3), 1], [1, sqrt(3)]] for A = [[0,1],[0,0]], B = [0;1], Q = I, R = 1.
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let s = solve_care(&a, &b, &DMatrix::identity(2, 2), &scalar(1.0)).unwrap();
        let r3 = 3f64.sqrt();
        let expected = DMatrix::from_row_slice(2, 2, &[r3, 1.0, 1.0, r3]);
        assert!((s.p - expected).norm() < 1e-10);
    }

    #[test]
    fn random_four_by_two_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-2.0..2.0));
            let b = DMatrix::from_fn(4, 2, |_, _| rng.random_range(-1.0..1.0));
            let q = DMatrix::identity(4, 4);
            let r = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0]));
            let s = solve_care(&a, &b, &q, &r).unwrap();
            assert!(care_residual(&a, &b, &q, &r, &s.p) <= CARE_TOLERANCE);
            assert!(spectral_abscissa(&(&a - &b * &s.k)) < 0.0);
            assert!((&s.p - s.p.transpose()).norm() < 1e-12);
            assert!(s.p.clone().symmetric_eigenvalues().min() >= -1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn closed_loop_response_decays(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
            let b = DMatrix::from_fn(4, 2, |_, _| rng.random_range(-1.0..1.0));
            let q = DMatrix::identity(4, 4);
            let r = DMatrix::identity(2, 2) * 10.0;
            let s = solve_care(&a, &b, &q, &r).unwrap();
            let ac = &a - &b * &s.k;
            // V = x'Px is a Lyapunov function of the closed loop: it never grows.
            let mut x = nalgebra::DVector::from_element(4, 1e-3);
            let mut v = (x.transpose() * &s.p * &x)[(0, 0)];
            let dt = 1e-3;
            for _ in 0..5000 {
                let k1 = &ac * &x;
                let k2 = &ac * (&x + &k1 * (dt / 2.0));
                let k3 = &ac * (&x + &k2 * (dt / 2.0));
                let k4 = &ac * (&x + &k3 * dt);
                x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
                let v_next = (x.transpose() * &s.p * &x)[(0, 0)];
                prop_assert!(v_next <= v * (1.0 + 1e-12));
                v = v_next;
            }
        }
    }
}

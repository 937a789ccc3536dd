//! Group law against faithful matrix representations: `exp` and `log` of
//! nilpotent matrices are finite series, so `log(exp(A) exp(B))` is an
//! independent oracle for the coordinate product.

use carnot_core::{CarnotGroup, Point};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// h^n inside `(n+2) x (n+2)` upper-triangular matrices, with
/// `[e_i, e_{n+i}] = e_{2n+1}`.
fn heisenberg_matrix(n: usize, a: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n + 2, n + 2);
    for i in 0..n {
        m[(0, i + 1)] = a[i];
        m[(i + 1, n + 1)] = a[n + i];
    }
    m[(0, n + 1)] = a[2 * n];
    m
}

fn heisenberg_coords(n: usize, m: &DMatrix<f64>) -> Vec<f64> {
    let mut a = vec![0.0; 2 * n + 1];
    for i in 0..n {
        a[i] = m[(0, i + 1)];
        a[n + i] = m[(i + 1, n + 1)];
    }
    a[2 * n] = m[(0, n + 1)];
    a
}

/// f^3 as `[[a1 S, (a2, a3, a4)^T], [0, 0]]` with `S` the down-shift on R^3.
fn filiform_matrix(a: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    m[(1, 0)] = a[0];
    m[(2, 1)] = a[0];
    m[(0, 3)] = a[1];
    m[(1, 3)] = a[2];
    m[(2, 3)] = a[3];
    m
}

fn filiform_coords(m: &DMatrix<f64>) -> Vec<f64> {
    vec![m[(1, 0)], m[(0, 3)], m[(1, 3)], m[(2, 3)]]
}

fn exp_nilpotent(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let mut out = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=n {
        term = &term * x / k as f64;
        out += &term;
    }
    out
}

fn log_unipotent(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    let x = g - DMatrix::identity(n, n);
    let mut out = DMatrix::zeros(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=n {
        term = &term * &x;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        out += &term * (sign / k as f64);
    }
    out
}

fn oracle_product(to: impl Fn(&[f64]) -> DMatrix<f64>, from: impl Fn(&DMatrix<f64>) -> Vec<f64>, a: &[f64], b: &[f64]) -> Vec<f64> {
    from(&log_unipotent(&(exp_nilpotent(&to(a)) * exp_nilpotent(&to(b)))))
}

fn random_point(r: &mut ChaCha8Rng, dim: usize) -> Point {
    Point::new((0..dim).map(|_| r.random_range(-2.0..2.0)).collect())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn heisenberg_matches_matrix_product() {
    let mut r = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=3 {
        let g = CarnotGroup::heisenberg(n).unwrap();
        for _ in 0..200 {
            let a = random_point(&mut r, g.dim());
            let b = random_point(&mut r, g.dim());
            let expected = oracle_product(|x| heisenberg_matrix(n, x), |m| heisenberg_coords(n, m), &a, &b);
            let got = g.multiply(&a, &b).unwrap();
            assert!(max_diff(&got, &expected) < 1e-12, "h{n}: {got} vs {expected:?}");
        }
    }
}

#[test]
fn filiform_matches_matrix_product() {
    let g = CarnotGroup::filiform(3).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let a = random_point(&mut r, 4);
        let b = random_point(&mut r, 4);
        let expected = oracle_product(filiform_matrix, filiform_coords, &a, &b);
        let got = g.multiply(&a, &b).unwrap();
        assert!(max_diff(&got, &expected) < 1e-12, "{got} vs {expected:?}");
        let bch = g.bch_reference(&a, &b).unwrap();
        assert!(max_diff(&bch, &expected) < 1e-12);
    }
}

#[test]
fn left_quotient_matches_matrix_oracle() {
    let g = CarnotGroup::filiform(3).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let q = random_point(&mut r, 4);
        let p = random_point(&mut r, 4);
        let neg: Vec<f64> = q.iter().map(|x| -x).collect();
        let expected = oracle_product(filiform_matrix, filiform_coords, &neg, &p);
        let got = g.left_quotient(&q, &p).unwrap();
        assert!(max_diff(&got, &expected) < 1e-12);
    }
}

#[test]
fn product_group_acts_factorwise() {
    let h = CarnotGroup::heisenberg(1).unwrap();
    let g = CarnotGroup::product(&[&h, &h]).unwrap();
    // layer-major layout (x1, y1, x2, y2, t1, t2)
    let a = Point::new(vec![1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
    let b = Point::new(vec![0.0, 1.0, 3.0, 0.0, 0.0, 0.0]);
    let c = g.multiply(&a, &b).unwrap();
    assert_eq!(&c[..], &[1.0, 1.0, 3.0, 2.0, 0.5, -3.0]);
}

#[test]
fn wrong_dimension_is_rejected() {
    let g = CarnotGroup::heisenberg(1).unwrap();
    assert!(g.multiply(&Point::new(vec![0.0; 2]), &Point::new(vec![0.0; 3])).is_err());
    assert!(g.dilate(-1.0, &g.identity()).is_err());
}

//! Fixed-size dense linear algebra for the 3-state problem.
//!
//! Everything here works on plain row-major arrays. Eigenvalues of 3×3
//! matrices come from the characteristic polynomial (bracketed real root,
//! deflation, Newton polish); symmetric matrices use the closed-form
//! trigonometric solution. Small fixed sizes keep these routines exact-cost.

use crate::real::Real;

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];

pub fn zeros<T: Real, const R: usize, const C: usize>() -> [[T; C]; R] {
    [[T::zero(); C]; R]
}

pub fn identity3<T: Real>() -> Mat3<T> {
    let mut m = zeros();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

pub fn vadd<T: Real, const N: usize>(a: &[T; N], b: &[T; N]) -> [T; N] {
    std::array::from_fn(|i| a[i] + b[i])
}

pub fn vsub<T: Real, const N: usize>(a: &[T; N], b: &[T; N]) -> [T; N] {
    std::array::from_fn(|i| a[i] - b[i])
}

pub fn vscale<T: Real, const N: usize>(s: T, a: &[T; N]) -> [T; N] {
    std::array::from_fn(|i| s * a[i])
}

pub fn dot<T: Real, const N: usize>(a: &[T; N], b: &[T; N]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

/// Euclidean norm.
pub fn norm<T: Real, const N: usize>(a: &[T; N]) -> T {
    dot(a, a).sqrt()
}

pub fn all_finite<T: Real, const N: usize>(a: &[T; N]) -> bool {
    a.iter().all(|x| x.is_finite())
}

pub fn mat_vec<T: Real, const R: usize, const C: usize>(m: &[[T; C]; R], v: &[T; C]) -> [T; R] {
    std::array::from_fn(|i| dot(&m[i], v))
}

pub fn mat_mul<T: Real, const R: usize, const K: usize, const C: usize>(
    a: &[[T; K]; R],
    b: &[[T; C]; K],
) -> [[T; C]; R] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..K).fold(T::zero(), |acc, k| acc + a[i][k] * b[k][j]))
    })
}

pub fn transpose<T: Real, const R: usize, const C: usize>(m: &[[T; C]; R]) -> [[T; R]; C] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[j][i]))
}

pub fn mat_add<T: Real, const R: usize, const C: usize>(
    a: &[[T; C]; R],
    b: &[[T; C]; R],
) -> [[T; C]; R] {
    std::array::from_fn(|i| vadd(&a[i], &b[i]))
}

pub fn mat_sub<T: Real, const R: usize, const C: usize>(
    a: &[[T; C]; R],
    b: &[[T; C]; R],
) -> [[T; C]; R] {
    std::array::from_fn(|i| vsub(&a[i], &b[i]))
}

pub fn mat_scale<T: Real, const R: usize, const C: usize>(s: T, m: &[[T; C]; R]) -> [[T; C]; R] {
    std::array::from_fn(|i| vscale(s, &m[i]))
}

/// Largest absolute entry.
pub fn max_abs<T: Real, const R: usize, const C: usize>(m: &[[T; C]; R]) -> T {
    m.iter()
        .flat_map(|row| row.iter())
        .fold(T::zero(), |acc, x| acc.max(x.abs()))
}

pub fn is_symmetric<T: Real>(m: &Mat3<T>, tol: T) -> bool {
    (0..3).all(|i| (0..3).all(|j| (m[i][j] - m[j][i]).abs() <= tol))
}

pub fn symmetrize<T: Real>(m: &Mat3<T>) -> Mat3<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| T::half() * (m[i][j] + m[j][i])))
}

pub fn trace3<T: Real>(m: &Mat3<T>) -> T {
    m[0][0] + m[1][1] + m[2][2]
}

pub fn det3<T: Real>(m: &Mat3<T>) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below `N·ε·max|a|`.
pub fn solve_linear<T: Real, const N: usize>(mut a: [[T; N]; N], mut b: [T; N]) -> Option<[T; N]> {
    let scale = max_abs(&a);
    if scale == T::zero() || !scale.is_finite() {
        return None;
    }
    let tiny = T::lit(N as f64) * T::epsilon() * scale;
    for col in 0..N {
        let pivot_row = (col..N)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if a[pivot_row][col].abs() <= tiny {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..N {
            let factor = a[row][col] / a[col][col];
            if factor == T::zero() {
                continue;
            }
            for k in col..N {
                let upd = a[col][k];
                a[row][k] = a[row][k] - factor * upd;
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = [T::zero(); N];
    for row in (0..N).rev() {
        let tail = (row + 1..N).fold(T::zero(), |acc, k| acc + a[row][k] * x[k]);
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

/// Complex eigenvalue `re + i·im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue<T> {
    pub re: T,
    pub im: T,
}

/// Characteristic polynomial `λ³ + c2·λ² + c1·λ + c0` of a 3×3 matrix.
fn char_poly3<T: Real>(m: &Mat3<T>) -> (T, T, T) {
    let c2 = -trace3(m);
    let c1 = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let c0 = -det3(m);
    (c2, c1, c0)
}

fn cubic<T: Real>(c: (T, T, T), x: T) -> T {
    ((x + c.0) * x + c.1) * x + c.2
}

fn cubic_prime<T: Real>(c: (T, T, T), x: T) -> T {
    (T::lit(3.0) * x + T::two() * c.0) * x + c.1
}

/// Newton iterations that only accept steps lowering the residual.
fn polish<T: Real>(c: (T, T, T), mut x: T) -> T {
    let mut fx = cubic(c, x).abs();
    for _ in 0..8 {
        let d = cubic_prime(c, x);
        if d == T::zero() || fx == T::zero() {
            break;
        }
        let cand = x - cubic(c, x) / d;
        let fc = cubic(c, cand).abs();
        if fc < fx {
            x = cand;
            fx = fc;
        } else {
            break;
        }
    }
    x
}

fn real_root_bisect<T: Real>(c: (T, T, T)) -> T {
    let bound = T::one() + c.0.abs().max(c.1.abs()).max(c.2.abs());
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..400 {
        let mid = T::half() * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cubic(c, mid) > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    polish(c, T::half() * (lo + hi))
}

/// Eigenvalues of a general real 3×3 matrix, real parts ascending.
pub fn eigenvalues3<T: Real>(m: &Mat3<T>) -> [Eigenvalue<T>; 3] {
    let c = char_poly3(m);
    let r0 = real_root_bisect(c);
    // Deflate: (λ − r0)(λ² + b·λ + d)
    let b = c.0 + r0;
    let d = c.1 + r0 * b;
    let disc = b * b - T::lit(4.0) * d;
    let mut out = if disc >= T::zero() {
        let sq = disc.sqrt();
        let q = -T::half() * (b + if b >= T::zero() { sq } else { -sq });
        let (r1, r2) = if q == T::zero() {
            (T::zero(), T::zero())
        } else {
            (q, d / q)
        };
        [
            Eigenvalue { re: r0, im: T::zero() },
            Eigenvalue { re: polish(c, r1), im: T::zero() },
            Eigenvalue { re: polish(c, r2), im: T::zero() },
        ]
    } else {
        let re = -T::half() * b;
        let im = T::half() * (-disc).sqrt();
        [
            Eigenvalue { re: r0, im: T::zero() },
            Eigenvalue { re, im },
            Eigenvalue { re, im: -im },
        ]
    };
    out.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// Eigenvalues of a symmetric 3×3 matrix, ascending.
///
/// Cyclic Jacobi rotations; unlike the closed-form cubic this keeps full
/// accuracy when eigenvalues coincide.
pub fn sym_eigenvalues3<T: Real>(m: &Mat3<T>) -> [T; 3] {
    let mut a = *m;
    let scale = a.iter().flatten().fold(T::zero(), |acc, v| acc.max(v.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return [a[0][0], a[1][1], a[2][2]];
    }
    for _ in 0..50 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        if off <= T::epsilon() * scale * T::lit(1e-3) {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == T::zero() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (T::two() * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
            let c = T::one() / (t * t + T::one()).sqrt();
            let sn = t * c;
            for k in 0..3 {
                let (akp, akq) = (a[k][p], a[k][q]);
                a[k][p] = c * akp - sn * akq;
                a[k][q] = sn * akp + c * akq;
            }
            for k in 0..3 {
                let (apk, aqk) = (a[p][k], a[q][k]);
                a[p][k] = c * apk - sn * aqk;
                a[q][k] = sn * apk + c * aqk;
            }
        }
    }
    let mut eig = [a[0][0], a[1][1], a[2][2]];
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    eig
}

/// Spectral (induced 2-) norm of a 3×3 matrix.
pub fn spectral_norm3<T: Real>(m: &Mat3<T>) -> T {
    let gram = mat_mul(&transpose(m), m);
    sym_eigenvalues3(&gram)[2].max(T::zero()).sqrt()
}

#![allow(dead_code)]

//! Brute-force reference computations shared by the integration suites.
//! Nothing here calls into the routines it is used to check.

use nalgebra::DMatrix;
use nalgebra::Complex;
use qgossip::qstate::{product_state, DensityMatrix, StandardState};

pub type Complex64 = Complex<f64>;
pub type CMat = DMatrix<Complex64>;

/// Basis index with qubit `j` stored in bit `n-1-j`.
fn bit(b: usize, n: usize, j: usize) -> usize {
    (b >> (n - 1 - j)) & 1
}

/// Dense permutation unitary built from its action on basis kets: the ket
/// whose qubit `j` reads `b_{π(j)}` is the image of `|b⟩`.
pub fn explicit_unitary(images: &[usize]) -> DMatrix<f64> {
    let n = images.len();
    let d = 1 << n;
    let mut u = DMatrix::zeros(d, d);
    for b in 0..d {
        let mut target = 0;
        for j in 0..n {
            target |= bit(b, n, images[j]) << (n - 1 - j);
        }
        u[(target, b)] = 1.0;
    }
    u
}

pub fn complexify(m: &DMatrix<f64>) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `U† ρ U` by dense multiplication.
pub fn explicit_conjugate(rho: &CMat, images: &[usize]) -> CMat {
    let u = complexify(&explicit_unitary(images));
    u.adjoint() * rho * u
}

pub fn compose_images(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&x| p[x]).collect()
}

pub fn power_images(p: &[usize], t: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..p.len()).collect();
    for _ in 0..t {
        out = compose_images(p, &out);
    }
    out
}

/// All permutations of `edge` that form one cycle through every node,
/// listed by brute force over orderings.
pub fn brute_cycles(edge: &[usize], n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let first = edge[0];
    let rest: Vec<usize> = edge[1..].to_vec();
    permute(&rest, &mut Vec::new(), &mut |order| {
        let mut images: Vec<usize> = (0..n).collect();
        let mut cycle = vec![first];
        cycle.extend_from_slice(order);
        for w in 0..cycle.len() {
            images[cycle[w]] = cycle[(w + 1) % cycle.len()];
        }
        out.push(images);
    });
    out
}

fn permute(rest: &[usize], prefix: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if rest.is_empty() {
        f(prefix);
        return;
    }
    for i in 0..rest.len() {
        let mut r = rest.to_vec();
        let x = r.remove(i);
        prefix.push(x);
        permute(&r, prefix, f);
        prefix.pop();
    }
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Mean-square matrix over all `k`-cycles built literally from Kronecker
/// products of dense unitaries.
pub fn literal_m(n: usize, k: usize) -> DMatrix<f64> {
    let d = 1 << n;
    let mut acc = DMatrix::zeros(d * d, d * d);
    let mut count = 0;
    for edge in subsets(n, k) {
        for p in brute_cycles(&edge, n) {
            let mut s = DMatrix::zeros(d * d, d * d);
            for tau in 1..=k {
                let u = explicit_unitary(&power_images(&p, tau));
                s += u.kronecker(&u);
            }
            s /= k as f64;
            acc += &s * s.transpose();
            count += 1;
        }
    }
    acc / count as f64
}

/// `|0⟩⟨0| ⊗ |1⟩⟨1| ⊗ |+⟩⟨+| ⊗ |−⟩⟨−| ⊗ |0⟩⟨0|`, repeated `copies` times.
pub fn state_a_factors(copies: usize) -> Vec<qgossip::qstate::QubitState> {
    use StandardState::*;
    [Ket0, Ket1, Plus, Minus, Ket0]
        .iter()
        .cycle()
        .take(5 * copies)
        .map(|s| s.state())
        .collect()
}

pub fn state_a() -> DensityMatrix {
    product_state(&state_a_factors(1)).unwrap()
}

/// Largest eigenvalue modulus of `b` by power iteration, with the iterate
/// ratio taken once successive ratios agree to `tol`.
pub fn power_iteration_radius(b: &DMatrix<f64>, tol: f64) -> f64 {
    let n = b.nrows();
    let mut x = nalgebra::DVector::from_fn(n, |i, _| 1.0 + (i as f64) * 0.37 - (i * i) as f64 * 0.05);
    let mut last = f64::NAN;
    for _ in 0..10_000 {
        let y = b * &x;
        let norm = y.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let ratio = norm / x.norm();
        x = y / norm;
        if (ratio - last).abs() < tol {
            return ratio;
        }
        last = ratio;
    }
    last
}

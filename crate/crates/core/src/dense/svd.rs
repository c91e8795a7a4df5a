//! Smallest singular triplet of `H̃ − μĨ` by one-sided Jacobi.

use num_complex::Complex64;

use super::hessenberg::normalize_phase;
use super::mat::Mat;

#[derive(Debug, Clone, PartialEq)]
pub struct SingularTriplet {
    pub sigma: f64,
    /// Unit right singular vector.
    pub vector: Vec<Complex64>,
    /// True when `μ` was real, in which case `vector` has zero imaginary parts.
    pub real: bool,
}

const MAX_SWEEPS: usize = 80;

/// `σ_min(H̃ − μĨ)` and its right singular vector, where `h_ext` is
/// `(k+1)×k` and `Ĩ` is the identity with a zero row appended.
pub fn smallest_singular_triplet(h_ext: &Mat, mu: Complex64) -> SingularTriplet {
    let rows = h_ext.rows();
    let k = h_ext.cols();
    assert!(rows >= k, "need at least as many rows as columns");
    let real = mu.im == 0.0;
    if k == 0 {
        return SingularTriplet { sigma: 0.0, vector: Vec::new(), real };
    }
    // columns of A = H̃ − μĨ
    let mut a: Vec<Vec<Complex64>> = (0..k)
        .map(|j| {
            (0..rows)
                .map(|i| {
                    let mut v = Complex64::new(h_ext[(i, j)], 0.0);
                    if i == j {
                        v -= mu;
                    }
                    v
                })
                .collect()
        })
        .collect();
    let mut v: Vec<Vec<Complex64>> = (0..k)
        .map(|j| (0..k).map(|i| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha: f64 = a[p].iter().map(|c| c.norm_sqr()).sum();
                let beta: f64 = a[q].iter().map(|c| c.norm_sqr()).sum();
                let gamma: Complex64 = a[p].iter().zip(&a[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // phase so that the coupling becomes real and positive
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for col in [&mut a, &mut v] {
                    let (lo, hi) = col.split_at_mut(q);
                    let cp = &mut lo[p];
                    let cq = &mut hi[0];
                    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                        let yq = *y * phase;
                        let xn = *x * c - yq * s;
                        let yn = *x * s + yq * c;
                        *x = xn;
                        *y = yn;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = a.iter().map(|c| c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut best = 0;
    for j in 1..k {
        if norms[j] < norms[best] {
            best = j;
        }
    }
    let mut vector = v[best].clone();
    normalize_phase(&mut vector);
    if real {
        vector.iter_mut().for_each(|c| c.im = 0.0);
    }
    SingularTriplet { sigma: norms[best], vector, real }
}

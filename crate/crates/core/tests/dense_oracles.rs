use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trs_core::dense::{hessenberg_eig, Hessenberg, Mat};

/// Coefficients of `det(zI − H)`, highest degree first, by Faddeev–LeVerrier.
fn char_poly(h: &Mat) -> Vec<f64> {
    let n = h.rows();
    let mut coeffs = vec![1.0];
    let mut m = Mat::zeros(n, n);
    let mut c_prev = 1.0;
    for k in 1..=n {
        // M_k = H M_{k-1} + c_{k-1} I
        let mut next = h.matmul(&m);
        for i in 0..n {
            next[(i, i)] += c_prev;
        }
        m = next;
        let hm = h.matmul(&m);
        let trace: f64 = (0..n).map(|i| hm[(i, i)]).sum();
        let c = -trace / k as f64;
        coeffs.push(c);
        c_prev = c;
    }
    coeffs
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Durand–Kerner followed by Newton polishing.
fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let radius = 1.0 + coeffs[1..].iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius / 2.0).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let (p, _) = horner(coeffs, z[i]);
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            let step = p / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    for r in z.iter_mut() {
        for _ in 0..5 {
            let (p, dp) = horner(coeffs, *r);
            if dp.norm() > 0.0 {
                *r -= p / dp;
            }
        }
    }
    z
}

fn random_hessenberg(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    Mat::from_fn(n, n, |i, j| if i <= j + 1 { rng.random_range(-1.0..1.0) } else { 0.0 })
}

#[test]
fn hessenberg_eigenvalues_match_characteristic_polynomial_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let h = random_hessenberg(&mut rng, 6);
        let pairs = hessenberg_eig(&Hessenberg::new(h.clone(), None).unwrap()).unwrap();
        let mut roots = poly_roots(&char_poly(&h));
        for p in &pairs {
            let (idx, dist) = roots
                .iter()
                .enumerate()
                .map(|(i, r)| (i, (r - p.value).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert!(dist <= 1e-8, "eigenvalue {} has no root within 1e-8 (closest {dist:e})", p.value);
            roots.swap_remove(idx);
        }
        assert!(roots.is_empty());
    }
}

#[test]
fn conjugate_pairs_are_exact_and_adjacent() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let h = random_hessenberg(&mut rng, 9);
        let pairs = hessenberg_eig(&Hessenberg::new(h, None).unwrap()).unwrap();
        let mut i = 0;
        while i < pairs.len() {
            if pairs[i].value.im != 0.0 {
                assert!(pairs[i].value.im > 0.0);
                assert_eq!(pairs[i + 1].value, pairs[i].value.conj());
                for (a, b) in pairs[i].vector.iter().zip(&pairs[i + 1].vector) {
                    assert_eq!(*b, a.conj());
                }
                i += 2;
            } else {
                i += 1;
            }
        }
        for w in pairs.windows(2) {
            assert!(w[0].value.re >= w[1].value.re);
        }
    }
}

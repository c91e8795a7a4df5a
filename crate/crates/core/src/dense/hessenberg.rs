//! Real upper Hessenberg matrices and their eigen-decomposition.

use num_complex::Complex64;

use super::mat::Mat;
use crate::error::{Error, Result};

/// Square upper Hessenberg `H_k`, optionally extended by `h_{k+1,k}` to the
/// `(k+1)×k` matrix `H̃_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hessenberg {
    h: Mat,
    extension: Option<f64>,
}

impl Hessenberg {
    /// Entries below the first subdiagonal must be exactly zero.
    pub fn new(h: Mat, extension: Option<f64>) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::DimensionMismatch { expected: h.rows(), got: h.cols() });
        }
        let k = h.rows();
        for j in 0..k {
            for i in j + 2..k {
                if h[(i, j)] != 0.0 {
                    return Err(Error::InvalidProblem(format!(
                        "entry ({i},{j}) below the subdiagonal is nonzero"
                    )));
                }
            }
        }
        Ok(Self { h, extension })
    }

    /// Builds from a `(k+1)×k` matrix; the last row must vanish except at `(k, k-1)`.
    pub fn from_extended(ht: &Mat) -> Result<Self> {
        let k = ht.cols();
        if ht.rows() != k + 1 {
            return Err(Error::DimensionMismatch { expected: k + 1, got: ht.rows() });
        }
        for j in 0..k.saturating_sub(1) {
            if ht[(k, j)] != 0.0 {
                return Err(Error::InvalidProblem("extension row must be e_kᵀ-shaped".into()));
            }
        }
        let ext = if k > 0 { ht[(k, k - 1)] } else { 0.0 };
        Self::new(ht.block(0, k, 0, k), Some(ext))
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    pub fn square(&self) -> &Mat {
        &self.h
    }

    pub fn extension(&self) -> Option<f64> {
        self.extension
    }

    /// `H̃_k`; a missing extension is taken as zero.
    pub fn extended(&self) -> Mat {
        let k = self.dim();
        let mut out = Mat::zeros(k + 1, k);
        for j in 0..k {
            for i in 0..k {
                out[(i, j)] = self.h[(i, j)];
            }
        }
        if k > 0 {
            out[(k, k - 1)] = self.extension.unwrap_or(0.0);
        }
        out
    }
}

/// Eigenvalue with unit right eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
}

impl EigPair {
    pub fn is_real(&self) -> bool {
        self.value.im == 0.0
    }
}

/// Real Schur form `T = Zᵀ H Z` of a Hessenberg matrix plus the eigenvalues
/// read off its diagonal blocks.
struct Schur {
    t: Mat,
    z: Mat,
    re: Vec<f64>,
    im: Vec<f64>,
    norm: f64,
}

const EPS: f64 = f64::EPSILON;

/// Francis double-shift QR on an upper Hessenberg matrix. When `z` is given
/// every orthogonal transform is accumulated into it.
fn francis_schur(h: &mut Mat, mut z: Option<&mut Mat>) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let nn = h.rows();
    let mut d = vec![0.0; nn];
    let mut e = vec![0.0; nn];
    if nn == 0 {
        return Ok((d, e, 0.0));
    }
    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }
    let max_iter = 30 * nn.max(1);
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut zz);
    let mut iter = 0usize;
    let mut n = nn as isize - 1;
    while n >= 0 {
        let nu = n as usize;
        // look for a negligible subdiagonal
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < EPS * s {
                break;
            }
            l -= 1;
        }
        if l == nu {
            h[(nu, nu)] += exshift;
            d[nu] = h[(nu, nu)];
            e[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            let w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            zz = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            let x = h[(nu, nu)];
            if q >= 0.0 {
                zz = if p >= 0.0 { p + zz } else { p - zz };
                d[nu - 1] = x + zz;
                d[nu] = d[nu - 1];
                if zz != 0.0 {
                    d[nu] = x - w / zz;
                }
                e[nu - 1] = 0.0;
                e[nu] = 0.0;
                let x = h[(nu, nu - 1)];
                s = x.abs() + zz.abs();
                p = x / s;
                q = zz / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in nu - 1..nn {
                    let t = h[(nu - 1, j)];
                    h[(nu - 1, j)] = q * t + p * h[(nu, j)];
                    h[(nu, j)] = q * h[(nu, j)] - p * t;
                }
                for i in 0..=nu {
                    let t = h[(i, nu - 1)];
                    h[(i, nu - 1)] = q * t + p * h[(i, nu)];
                    h[(i, nu)] = q * h[(i, nu)] - p * t;
                }
                if let Some(zm) = z.as_deref_mut() {
                    for i in 0..nn {
                        let t = zm[(i, nu - 1)];
                        zm[(i, nu - 1)] = q * t + p * zm[(i, nu)];
                        zm[(i, nu)] = q * zm[(i, nu)] - p * t;
                    }
                }
                h[(nu, nu - 1)] = 0.0;
            } else {
                d[nu - 1] = x + p;
                d[nu] = x + p;
                e[nu - 1] = zz;
                e[nu] = -zz;
            }
            n -= 2;
            iter = 0;
        } else {
            let mut x = h[(nu, nu)];
            let mut y = h[(nu - 1, nu - 1)];
            let mut w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            if iter == 10 {
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            if iter > max_iter {
                return Err(Error::QrNoConvergence { iterations: iter });
            }
            // two consecutive small subdiagonals
            let mut m = nu - 2;
            loop {
                zz = h[(m, m)];
                r = x - zz;
                s = y - zz;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - zz - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < EPS * (p.abs() * (h[(m - 1, m - 1)].abs() + zz.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }
            for k in m..nu {
                let notlast = k != nu - 1;
                let mut xs = 1.0;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    xs = p.abs() + q.abs() + r.abs();
                    if xs == 0.0 {
                        continue;
                    }
                    p /= xs;
                    q /= xs;
                    r /= xs;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(k, k - 1)] = -s * xs;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    let hx = p / s;
                    let hy = q / s;
                    let hz = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        let mut t = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            t += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= t * hz;
                        }
                        h[(k, j)] -= t * hx;
                        h[(k + 1, j)] -= t * hy;
                    }
                    for i in 0..=nu.min(k + 3) {
                        let mut t = hx * h[(i, k)] + hy * h[(i, k + 1)];
                        if notlast {
                            t += hz * h[(i, k + 2)];
                            h[(i, k + 2)] -= t * r;
                        }
                        h[(i, k)] -= t;
                        h[(i, k + 1)] -= t * q;
                    }
                    if let Some(zm) = z.as_deref_mut() {
                        for i in 0..nn {
                            let mut t = hx * zm[(i, k)] + hy * zm[(i, k + 1)];
                            if notlast {
                                t += hz * zm[(i, k + 2)];
                                zm[(i, k + 2)] -= t * r;
                            }
                            zm[(i, k)] -= t;
                            zm[(i, k + 1)] -= t * q;
                        }
                    }
                }
            }
        }
    }
    Ok((d, e, norm))
}

fn real_schur(h: &Mat) -> Result<Schur> {
    let mut t = h.clone();
    let mut z = Mat::identity(h.rows());
    let (re, im, norm) = francis_schur(&mut t, Some(&mut z))?;
    // clear the strictly lower part left over from the iteration
    let k = t.rows();
    for j in 0..k {
        for i in j + 2..k {
            t[(i, j)] = 0.0;
        }
    }
    Ok(Schur { t, z, re, im, norm })
}

fn cdiv(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
    let c = Complex64::new(xr, xi) / Complex64::new(yr, yi);
    (c.re, c.im)
}

/// Eigenvectors of the quasi-triangular `T` by back-substitution, returned in
/// the packed real layout (real column for real eigenvalues; `(Re, Im)` column
/// pairs for the eigenvalue with positive imaginary part).
fn schur_vectors(s: &mut Schur) {
    let nn = s.t.rows();
    let norm = s.norm;
    if norm == 0.0 {
        return;
    }
    let d = &s.re;
    let e = &s.im;
    let h = &mut s.t;
    let (mut r, mut ss, mut zz) = (0.0, 0.0, 0.0);
    for n in (0..nn).rev() {
        let p = d[n];
        let q = e[n];
        if q == 0.0 {
            let mut l = n;
            h[(n, n)] = 1.0;
            for i in (0..n).rev() {
                let w = h[(i, i)] - p;
                r = 0.0;
                for j in l..=n {
                    r += h[(i, j)] * h[(j, n)];
                }
                if e[i] < 0.0 {
                    zz = w;
                    ss = r;
                } else {
                    l = i;
                    if e[i] == 0.0 {
                        h[(i, n)] = if w != 0.0 { -r / w } else { -r / (EPS * norm) };
                    } else {
                        let x = h[(i, i + 1)];
                        let y = h[(i + 1, i)];
                        let qq = (d[i] - p) * (d[i] - p) + e[i] * e[i];
                        let t = (x * ss - zz * r) / qq;
                        h[(i, n)] = t;
                        h[(i + 1, n)] = if x.abs() > zz.abs() { (-r - w * t) / x } else { (-ss - y * t) / zz };
                    }
                    let t = h[(i, n)].abs();
                    if (EPS * t) * t > 1.0 {
                        for j in i..=n {
                            h[(j, n)] /= t;
                        }
                    }
                }
            }
        } else if q < 0.0 {
            let mut l = n - 1;
            if h[(n, n - 1)].abs() > h[(n - 1, n)].abs() {
                h[(n - 1, n - 1)] = q / h[(n, n - 1)];
                h[(n - 1, n)] = -(h[(n, n)] - p) / h[(n, n - 1)];
            } else {
                let (cr, ci) = cdiv(0.0, -h[(n - 1, n)], h[(n - 1, n - 1)] - p, q);
                h[(n - 1, n - 1)] = cr;
                h[(n - 1, n)] = ci;
            }
            h[(n, n - 1)] = 0.0;
            h[(n, n)] = 1.0;
            for i in (0..n.saturating_sub(1)).rev() {
                let mut ra = 0.0;
                let mut sa = 0.0;
                for j in l..=n {
                    ra += h[(i, j)] * h[(j, n - 1)];
                    sa += h[(i, j)] * h[(j, n)];
                }
                let w = h[(i, i)] - p;
                if e[i] < 0.0 {
                    zz = w;
                    r = ra;
                    ss = sa;
                } else {
                    l = i;
                    if e[i] == 0.0 {
                        let (cr, ci) = cdiv(-ra, -sa, w, q);
                        h[(i, n - 1)] = cr;
                        h[(i, n)] = ci;
                    } else {
                        let x = h[(i, i + 1)];
                        let y = h[(i + 1, i)];
                        let mut vr = (d[i] - p) * (d[i] - p) + e[i] * e[i] - q * q;
                        let vi = (d[i] - p) * 2.0 * q;
                        if vr == 0.0 && vi == 0.0 {
                            vr = EPS * norm * (w.abs() + q.abs() + x.abs() + y.abs() + zz.abs());
                        }
                        let (cr, ci) = cdiv(x * r - zz * ra + q * sa, x * ss - zz * sa - q * ra, vr, vi);
                        h[(i, n - 1)] = cr;
                        h[(i, n)] = ci;
                        if x.abs() > zz.abs() + q.abs() {
                            h[(i + 1, n - 1)] = (-ra - w * h[(i, n - 1)] + q * h[(i, n)]) / x;
                            h[(i + 1, n)] = (-sa - w * h[(i, n)] - q * h[(i, n - 1)]) / x;
                        } else {
                            let (cr, ci) = cdiv(-r - y * h[(i, n - 1)], -ss - y * h[(i, n)], zz, q);
                            h[(i + 1, n - 1)] = cr;
                            h[(i + 1, n)] = ci;
                        }
                    }
                    let t = h[(i, n - 1)].abs().max(h[(i, n)].abs());
                    if (EPS * t) * t > 1.0 {
                        for j in i..=n {
                            h[(j, n - 1)] /= t;
                            h[(j, n)] /= t;
                        }
                    }
                }
            }
        }
    }
    // back-transform with Z
    let mut v = Mat::zeros(nn, nn);
    for j in 0..nn {
        for i in 0..nn {
            let mut acc = 0.0;
            for k in 0..=j {
                acc += s.z[(i, k)] * h[(k, j)];
            }
            v[(i, j)] = acc;
        }
    }
    s.z = v;
}

/// Unit 2-norm, first non-negligible entry real and positive.
pub fn normalize_phase(v: &mut [Complex64]) {
    let nrm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if nrm == 0.0 {
        return;
    }
    let big = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let lead = v.iter().find(|c| c.norm() > 1e-12 * big).copied().unwrap_or(Complex64::new(1.0, 0.0));
    let phase = lead.conj() / lead.norm();
    for c in v.iter_mut() {
        *c = *c * phase / nrm;
    }
    if let Some(c) = v.iter_mut().find(|c| c.norm() > 1e-12 * big) {
        c.im = 0.0;
    }
}

fn sort_key(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    b.re.partial_cmp(&a.re)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
}

/// All eigenpairs of the square part of `h`, sorted by descending real part
/// then descending imaginary part. Conjugate pairs are exact conjugates.
pub fn hessenberg_eig(h: &Hessenberg) -> Result<Vec<EigPair>> {
    let k = h.dim();
    let mut schur = real_schur(h.square())?;
    schur_vectors(&mut schur);
    let mut out = Vec::with_capacity(k);
    let mut j = 0;
    while j < k {
        if schur.im[j] == 0.0 {
            let mut v: Vec<Complex64> = schur.z.col(j).iter().map(|&x| Complex64::new(x, 0.0)).collect();
            normalize_phase(&mut v);
            out.push(EigPair { value: Complex64::new(schur.re[j], 0.0), vector: v });
            j += 1;
        } else {
            let value = Complex64::new(schur.re[j], schur.im[j].abs());
            let mut v: Vec<Complex64> = (0..k)
                .map(|i| Complex64::new(schur.z[(i, j)], schur.z[(i, j + 1)]))
                .collect();
            if schur.im[j] < 0.0 {
                v.iter_mut().for_each(|c| *c = c.conj());
            }
            normalize_phase(&mut v);
            let conj: Vec<Complex64> = v.iter().map(|c| c.conj()).collect();
            out.push(EigPair { value, vector: v });
            out.push(EigPair { value: value.conj(), vector: conj });
            j += 2;
        }
    }
    out.sort_by(|a, b| sort_key(&a.value, &b.value));
    Ok(out)
}

/// Eigenvalues only of an upper Hessenberg matrix, same ordering as
/// [`hessenberg_eig`].
pub fn hessenberg_eigenvalues(h: &Mat) -> Result<Vec<Complex64>> {
    let mut t = h.clone();
    let (re, im, _) = francis_schur(&mut t, None)?;
    let mut vals: Vec<Complex64> = re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect();
    // make pairs exact conjugates
    let mut j = 0;
    while j < vals.len() {
        if vals[j].im != 0.0 && j + 1 < vals.len() {
            let a = vals[j].im.abs();
            vals[j].im = a;
            vals[j + 1] = Complex64::new(vals[j].re, -a);
            j += 2;
        } else {
            j += 1;
        }
    }
    vals.sort_by(sort_key);
    Ok(vals)
}

/// Householder reduction `Qᵀ A Q` of a square matrix to upper Hessenberg form.
pub fn hessenberg_reduce(a: &Mat) -> Mat {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let alpha_norm = (k + 1..n).map(|i| h[(i, k)] * h[(i, k)]).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let alpha = if h[(k + 1, k)] > 0.0 { -alpha_norm } else { alpha_norm };
        let mut v: Vec<f64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vn2: f64 = v.iter().map(|x| x * x).sum();
        if vn2 == 0.0 {
            continue;
        }
        // H ← P H, P = I − 2vvᵀ/vᵀv acting on rows k+1..n
        for j in 0..n {
            let s: f64 = (0..v.len()).map(|t| v[t] * h[(k + 1 + t, j)]).sum::<f64>() * 2.0 / vn2;
            for t in 0..v.len() {
                h[(k + 1 + t, j)] -= s * v[t];
            }
        }
        // H ← H P
        for i in 0..n {
            let s: f64 = (0..v.len()).map(|t| h[(i, k + 1 + t)] * v[t]).sum::<f64>() * 2.0 / vn2;
            for t in 0..v.len() {
                h[(i, k + 1 + t)] -= s * v[t];
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
    h
}

/// Eigenvalues of a general square matrix.
pub fn general_eigenvalues(a: &Mat) -> Result<Vec<Complex64>> {
    hessenberg_eigenvalues(&hessenberg_reduce(a))
}

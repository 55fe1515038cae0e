//! The five concrete manifolds and their embedded-coordinate geometry.
//!
//! Every manifold lives in a real ambient space. Complex coordinates are
//! stored as interleaved `(re, im)` pairs, and matrices row-major:
//!
//! | manifold        | intrinsic dim | ambient layout                      |
//! |-----------------|---------------|-------------------------------------|
//! | `S3`            | 3             | `(a, b)` in C², 4 reals             |
//! | `S5`            | 5             | `(u, v, w)` in C³, 6 reals          |
//! | `SU3`           | 8             | 3×3 complex matrix, 18 reals        |
//! | `S3xS5`         | 8             | S³ block then S⁵ block, 10 reals    |
//! | `Pullback(f)`   | 8             | `S` in S⁵ then `T` in SU(3), 24 reals |
//!
//! Orientation conventions:
//!
//! * a frame `(e_1, .., e_n)` at `x` on a sphere is positive iff
//!   `(x, e_1, .., e_n)` is a positive basis of the ambient space;
//! * SU(3) is oriented by left-translating [`LIE_ALGEBRA_BASIS`], whose first
//!   three elements span the embedded su(2) and whose last five map onto a
//!   positive frame of S⁵ at `(0, 0, 1)` under the third-column projection;
//! * S³×S⁵ puts the S³ frame first;
//! * pullback total spaces put the vertical frame first, followed by the
//!   horizontal lift of the base frame.
//!
//! With these choices the fiber-first orientation of every bundle agrees with
//! its own orientation, so degrees of bundle maps multiply with signs.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::maps::MapHandle;

pub type Complex64 = nalgebra::Complex<f64>;
pub type SU3Matrix = Matrix3<Complex64>;

/// Membership tolerance.
pub const EPS_MEMBERSHIP: f64 = 1e-8;
/// Orthonormality and tangency tolerance for frames.
pub const EPS_FRAME: f64 = 1e-10;

/// Raw `(re, im)` entries, row-major, of the ordered Lie algebra basis that
/// orients SU(3). Each element is normalized at use.
pub const LIE_ALGEBRA_BASIS: [[(f64, f64); 9]; 8] = {
    const O: (f64, f64) = (0.0, 0.0);
    const R: (f64, f64) = (1.0, 0.0);
    const NR: (f64, f64) = (-1.0, 0.0);
    const I: (f64, f64) = (0.0, 1.0);
    const NI: (f64, f64) = (0.0, -1.0);
    const HI: (f64, f64) = (0.0, -0.5);
    [
        // vertical: the embedded su(2)
        [I, O, O, O, NI, O, O, O, O],
        [O, R, O, NR, O, O, O, O, O],
        [O, I, O, I, O, O, O, O, O],
        // horizontal: third columns e1, i·e1, e2, i·e2, i·e3
        [O, O, R, O, O, O, NR, O, O],
        [O, O, I, O, O, O, I, O, O],
        [O, O, O, O, O, R, O, NR, O],
        [O, O, O, O, O, I, O, I, O],
        [HI, O, O, O, HI, O, O, O, I],
    ]
};

pub fn lie_algebra_basis() -> [SU3Matrix; 8] {
    LIE_ALGEBRA_BASIS.map(|raw| {
        let m = SU3Matrix::from_fn(|i, j| {
            let (re, im) = raw[3 * i + j];
            Complex64::new(re, im)
        });
        let n = m.norm();
        m.unscale(n)
    })
}

/// 64-bit seed driving all randomness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Seed(pub u64);

impl Seed {
    /// Derives an independent child seed for trial `index`.
    pub fn child(self, index: u64) -> Seed {
        Seed(splitmix64(
            self.0 ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019)),
        ))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone)]
pub enum ManifoldId {
    S3,
    S5,
    SU3,
    S3xS5,
    /// Total space `{(S, T) in S⁵ × SU(3) : base(S) = p(T)}` of the bundle
    /// pulled back along a self-map of S⁵.
    Pullback(Arc<MapHandle>),
}

impl PartialEq for ManifoldId {
    fn eq(&self, other: &Self) -> bool {
        use ManifoldId::*;
        match (self, other) {
            (S3, S3) | (S5, S5) | (SU3, SU3) | (S3xS5, S3xS5) => true,
            (Pullback(a), Pullback(b)) => a.id == b.id,
            _ => false,
        }
    }
}

impl fmt::Display for ManifoldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldId::S3 => write!(f, "S3"),
            ManifoldId::S5 => write!(f, "S5"),
            ManifoldId::SU3 => write!(f, "SU3"),
            ManifoldId::S3xS5 => write!(f, "S3xS5"),
            ManifoldId::Pullback(base) => write!(f, "Pullback({})", base.id),
        }
    }
}

impl fmt::Debug for ManifoldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManifoldInfo {
    pub dim: usize,
    pub ambient_dim: usize,
    /// Riemannian volume, when a closed form is provided.
    pub volume: Option<f64>,
}

impl ManifoldId {
    pub fn dim(&self) -> usize {
        match self {
            ManifoldId::S3 => 3,
            ManifoldId::S5 => 5,
            _ => 8,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            ManifoldId::S3 => 4,
            ManifoldId::S5 => 6,
            ManifoldId::SU3 => 18,
            ManifoldId::S3xS5 => 10,
            ManifoldId::Pullback(_) => 24,
        }
    }

    /// The bundle projection to S⁵, for the three total spaces.
    pub fn is_bundle_over_s5(&self) -> bool {
        matches!(
            self,
            ManifoldId::SU3 | ManifoldId::S3xS5 | ManifoldId::Pullback(_)
        )
    }
}

pub fn manifold_info(m: &ManifoldId) -> ManifoldInfo {
    let volume = match m {
        ManifoldId::S3 => Some(2.0 * PI * PI),
        ManifoldId::S5 => Some(PI * PI * PI),
        _ => None,
    };
    ManifoldInfo {
        dim: m.dim(),
        ambient_dim: m.ambient_dim(),
        volume,
    }
}

/// A point of one of the manifolds, in its natural coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    S3 {
        a: Complex64,
        b: Complex64,
    },
    S5 {
        u: Complex64,
        v: Complex64,
        w: Complex64,
    },
    SU3(SU3Matrix),
    S3xS5 {
        fiber: [Complex64; 2],
        base: [Complex64; 3],
    },
    Pullback {
        s: [Complex64; 3],
        t: SU3Matrix,
    },
}

impl Point {
    pub fn s3(a: Complex64, b: Complex64) -> Point {
        Point::S3 { a, b }
    }

    pub fn s5(u: Complex64, v: Complex64, w: Complex64) -> Point {
        Point::S5 { u, v, w }
    }

    /// The embedded SU(2) matrix `[[a, b, 0], [-b̄, ā, 0], [0, 0, 1]]`.
    pub fn embed_su2(a: Complex64, b: Complex64) -> Point {
        Point::SU3(embed_su2(a, b))
    }

    pub fn ambient(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(24);
        match self {
            Point::S3 { a, b } => push_cx(&mut out, &[*a, *b]),
            Point::S5 { u, v, w } => push_cx(&mut out, &[*u, *v, *w]),
            Point::SU3(m) => push_mat(&mut out, m),
            Point::S3xS5 { fiber, base } => {
                push_cx(&mut out, fiber);
                push_cx(&mut out, base);
            }
            Point::Pullback { s, t } => {
                push_cx(&mut out, s);
                push_mat(&mut out, t);
            }
        }
        out
    }

    pub fn from_ambient(m: &ManifoldId, x: &[f64]) -> Result<Point> {
        if x.len() != m.ambient_dim() {
            return Err(Error::ManifoldMismatch {
                expected: format!("{} ambient coordinates", m.ambient_dim()),
                found: format!("{}", x.len()),
            });
        }
        let c = |k: usize| Complex64::new(x[2 * k], x[2 * k + 1]);
        Ok(match m {
            ManifoldId::S3 => Point::S3 { a: c(0), b: c(1) },
            ManifoldId::S5 => Point::S5 {
                u: c(0),
                v: c(1),
                w: c(2),
            },
            ManifoldId::SU3 => Point::SU3(mat_from_ambient(x)),
            ManifoldId::S3xS5 => Point::S3xS5 {
                fiber: [c(0), c(1)],
                base: [c(2), c(3), c(4)],
            },
            ManifoldId::Pullback(_) => Point::Pullback {
                s: [c(0), c(1), c(2)],
                t: mat_from_ambient(&x[6..]),
            },
        })
    }

    pub fn as_su3(&self) -> Option<&SU3Matrix> {
        match self {
            Point::SU3(m) => Some(m),
            _ => None,
        }
    }
}

fn push_cx(out: &mut Vec<f64>, z: &[Complex64]) {
    for c in z {
        out.push(c.re);
        out.push(c.im);
    }
}

fn push_mat(out: &mut Vec<f64>, m: &SU3Matrix) {
    for i in 0..3 {
        for j in 0..3 {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
}

pub(crate) fn mat_from_ambient(x: &[f64]) -> SU3Matrix {
    SU3Matrix::from_fn(|i, j| {
        let k = 2 * (3 * i + j);
        Complex64::new(x[k], x[k + 1])
    })
}

pub(crate) fn mat_to_ambient(m: &SU3Matrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(18);
    push_mat(&mut out, m);
    out
}

pub(crate) fn cx3_from_ambient(x: &[f64]) -> [Complex64; 3] {
    [
        Complex64::new(x[0], x[1]),
        Complex64::new(x[2], x[3]),
        Complex64::new(x[4], x[5]),
    ]
}

pub fn embed_su2(a: Complex64, b: Complex64) -> SU3Matrix {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    SU3Matrix::new(a, b, z, -b.conj(), a.conj(), z, z, z, one)
}

/// Extends a unit vector of C³ to a special unitary matrix whose third
/// column is that vector. Pointwise only: the result is not continuous in
/// `c` across pivot changes, and no continuous choice exists globally.
pub fn complete_to_su3(c: &[Complex64; 3]) -> SU3Matrix {
    let col = nalgebra::Vector3::new(c[0], c[1], c[2]);
    let pivot = (0..3)
        .max_by(|&i, &j| c[i].norm().total_cmp(&c[j].norm()))
        .unwrap_or(2);
    let mut cols: Vec<nalgebra::Vector3<Complex64>> = Vec::with_capacity(2);
    for i in (0..3).filter(|&i| i != pivot) {
        let mut e = nalgebra::Vector3::zeros();
        e[i] = Complex64::new(1.0, 0.0);
        let mut v = e - col * col.dotc(&e);
        for q in &cols {
            v -= q * q.dotc(&v);
        }
        cols.push(v.unscale(v.norm()));
    }
    let mut m = SU3Matrix::from_columns(&[cols[0], cols[1], col]);
    let det = m.determinant();
    let fix = det.conj() / det.norm();
    for i in 0..3 {
        m[(i, 0)] *= fix;
    }
    m
}

// ---------------------------------------------------------------------------
// sampling

fn gaussian_unit(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Haar-distributed element of SU(3).
pub fn haar_su3(rng: &mut impl Rng) -> SU3Matrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = SU3Matrix::from_fn(|_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * scale
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..3 {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..3 {
            q[(i, j)] *= phase;
        }
    }
    let det = q.determinant();
    let inv = det.conj() / det.norm_sqr();
    for i in 0..3 {
        q[(i, 0)] *= inv;
    }
    q
}

/// Haar-distributed element of the embedded SU(2).
pub fn haar_su2(rng: &mut impl Rng) -> SU3Matrix {
    let q = gaussian_unit(rng, 4);
    embed_su2(Complex64::new(q[0], q[1]), Complex64::new(q[2], q[3]))
}

pub fn sample(m: &ManifoldId, seed: Seed) -> Point {
    let mut rng = seed.rng();
    sample_with(m, &mut rng)
}

pub fn sample_with(m: &ManifoldId, rng: &mut impl Rng) -> Point {
    let x = sample_ambient(m, rng);
    Point::from_ambient(m, &x).expect("sampler produces the ambient layout")
}

pub(crate) fn sample_ambient(m: &ManifoldId, rng: &mut impl Rng) -> Vec<f64> {
    match m {
        ManifoldId::S3 => gaussian_unit(rng, 4),
        ManifoldId::S5 => gaussian_unit(rng, 6),
        ManifoldId::SU3 => mat_to_ambient(&haar_su3(rng)),
        ManifoldId::S3xS5 => {
            let mut x = gaussian_unit(rng, 4);
            x.extend(gaussian_unit(rng, 6));
            x
        }
        ManifoldId::Pullback(base) => loop {
            let s = gaussian_unit(rng, 6);
            // the base map may be non-smooth on a null set; resample there
            let Ok(fs) = base.eval_ambient::<f64>(&s) else {
                continue;
            };
            let t = complete_to_su3(&cx3_from_ambient(&fs)) * haar_su2(rng);
            let mut x = s;
            x.extend(mat_to_ambient(&t));
            break x;
        },
    }
}

// ---------------------------------------------------------------------------
// membership and retraction

fn sphere_deviation(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs()
}

fn su3_deviation(m: &SU3Matrix) -> f64 {
    let unitarity = (m.adjoint() * m - SU3Matrix::identity()).norm();
    let det = (m.determinant() - Complex64::new(1.0, 0.0)).norm();
    unitarity.max(det)
}

/// Largest violation of the membership constraints, in ambient coordinates.
pub(crate) fn deviation_ambient(m: &ManifoldId, x: &[f64]) -> f64 {
    if x.len() != m.ambient_dim() || x.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    match m {
        ManifoldId::S3 | ManifoldId::S5 => sphere_deviation(x),
        ManifoldId::SU3 => su3_deviation(&mat_from_ambient(x)),
        ManifoldId::S3xS5 => sphere_deviation(&x[..4]).max(sphere_deviation(&x[4..])),
        ManifoldId::Pullback(base) => {
            let (s, t) = x.split_at(6);
            let Ok(fs) = base.eval_ambient::<f64>(s) else {
                return f64::INFINITY;
            };
            let tm = mat_from_ambient(t);
            let col = tm.column(2);
            let constraint = (0..3)
                .map(|i| (Complex64::new(fs[2 * i], fs[2 * i + 1]) - col[i]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            sphere_deviation(s).max(su3_deviation(&tm)).max(constraint)
        }
    }
}

pub fn deviation(m: &ManifoldId, x: &Point) -> f64 {
    deviation_ambient(m, &x.ambient())
}

pub fn is_on_manifold(m: &ManifoldId, x: &Point, tol: f64) -> bool {
    deviation(m, x) <= tol
}

fn normalize(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n.is_nan() || n <= 1e-12 || !n.is_finite() {
        return Err(Error::DegenerateRetraction("zero vector".into()));
    }
    Ok(x.iter().map(|v| v / n).collect())
}

/// Unitary polar factor, then the determinant phase removed from column 1.
pub fn retract_su3(m: &SU3Matrix) -> Result<SU3Matrix> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::DegenerateRetraction("non-finite matrix".into()));
    }
    let svd = m.svd(true, true);
    if svd.singular_values.min() < 1e-6 {
        return Err(Error::DegenerateRetraction(
            "polar factor undefined (singular matrix)".into(),
        ));
    }
    let (Some(u), Some(vt)) = (svd.u, svd.v_t) else {
        return Err(Error::DegenerateRetraction("SVD failed".into()));
    };
    let mut q = u * vt;
    let fix = q.determinant().conj();
    for i in 0..3 {
        q[(i, 0)] *= fix;
    }
    Ok(q)
}

/// Replaces the third column of `t` by `c` and re-orthonormalizes the first
/// two columns against it, fixing the determinant on column 1.
fn align_third_column(t: &SU3Matrix, c: &[Complex64; 3]) -> Result<SU3Matrix> {
    let col = nalgebra::Vector3::new(c[0], c[1], c[2]);
    let mut c0 = t.column(0).into_owned();
    c0 -= col * col.dotc(&c0);
    let n0 = c0.norm();
    let mut c1 = t.column(1).into_owned();
    c1 -= col * col.dotc(&c1);
    if n0 < 1e-8 {
        return Err(Error::DegenerateRetraction("fiber alignment".into()));
    }
    c0.unscale_mut(n0);
    c1 -= c0 * c0.dotc(&c1);
    let n1 = c1.norm();
    if n1 < 1e-8 {
        return Err(Error::DegenerateRetraction("fiber alignment".into()));
    }
    c1.unscale_mut(n1);
    let mut m = SU3Matrix::from_columns(&[c0, c1, col]);
    let det = m.determinant();
    let fix = det.conj() / det.norm();
    for i in 0..3 {
        m[(i, 0)] *= fix;
    }
    Ok(m)
}

pub(crate) fn retract_ambient(m: &ManifoldId, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != m.ambient_dim() {
        return Err(Error::DegenerateRetraction("wrong ambient length".into()));
    }
    match m {
        ManifoldId::S3 | ManifoldId::S5 => normalize(x),
        ManifoldId::SU3 => Ok(mat_to_ambient(&retract_su3(&mat_from_ambient(x))?)),
        ManifoldId::S3xS5 => {
            let mut out = normalize(&x[..4])?;
            out.extend(normalize(&x[4..])?);
            Ok(out)
        }
        ManifoldId::Pullback(base) => {
            let s = normalize(&x[..6])?;
            let t = retract_su3(&mat_from_ambient(&x[6..]))?;
            let fs = base.eval_ambient::<f64>(&s)?;
            let t = align_third_column(&t, &cx3_from_ambient(&fs))?;
            let mut out = s;
            out.extend(mat_to_ambient(&t));
            Ok(out)
        }
    }
}

pub fn retract(m: &ManifoldId, ambient: &[f64]) -> Result<Point> {
    let x = retract_ambient(m, ambient)?;
    Point::from_ambient(m, &x)
}

pub fn chordal_distance(x: &Point, y: &Point) -> f64 {
    ambient_distance(&x.ambient(), &y.ambient())
}

pub(crate) fn ambient_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

// ---------------------------------------------------------------------------
// frames

/// Positively oriented orthonormal tangent frame; columns of `vectors` are
/// ambient vectors.
#[derive(Clone, Debug)]
pub struct OrientedFrame {
    pub base: Point,
    pub vectors: DMatrix<f64>,
}

impl OrientedFrame {
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    /// Frames are always built positively oriented.
    pub fn orientation_sign(&self) -> i32 {
        1
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k).iter().copied().collect()
    }
}

/// Frame of `x⊥` on a sphere, Gram–Schmidt over the standard basis in the
/// given index order (skipping the coordinate where `|x_i|` is largest).
pub(crate) fn sphere_frame(x: &[f64], order: &[usize]) -> Result<DMatrix<f64>> {
    let n1 = x.len();
    let pivot = (0..n1)
        .max_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs()))
        .unwrap_or(0);
    let xv = DVector::from_column_slice(x);
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n1 - 1);
    for &i in order.iter().filter(|&&i| i != pivot) {
        let mut v = DVector::zeros(n1);
        v[i] = 1.0;
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            let px = xv.dot(&v);
            v.axpy(-px, &xv, 1.0);
            for c in &cols {
                let pc = c.dot(&v);
                v.axpy(-pc, c, 1.0);
            }
        }
        let nv = v.norm();
        if nv < 1e-8 {
            return Err(Error::DegenerateFrame);
        }
        cols.push(v / nv);
    }
    if cols.len() != n1 - 1 {
        return Err(Error::DegenerateFrame);
    }
    let mut full = DMatrix::zeros(n1, n1);
    full.set_column(0, &xv);
    for (k, c) in cols.iter().enumerate() {
        full.set_column(k + 1, c);
    }
    let mut frame = DMatrix::from_columns(&cols);
    if full.determinant() < 0.0 {
        let last = frame.ncols() - 1;
        frame.column_mut(last).neg_mut();
    }
    Ok(frame)
}

fn su3_frame(t: &SU3Matrix) -> DMatrix<f64> {
    let basis = lie_algebra_basis();
    let cols: Vec<DVector<f64>> = basis
        .iter()
        .map(|x| DVector::from_vec(mat_to_ambient(&(t * x))))
        .collect();
    DMatrix::from_columns(&cols)
}

/// Lie algebra element with third column `ζ`, orthogonal to the embedded su(2).
fn horizontal_element(zeta: &nalgebra::Vector3<Complex64>) -> SU3Matrix {
    let theta = zeta[2].im;
    let z = Complex64::new(0.0, 0.0);
    let half = Complex64::new(0.0, -0.5 * theta);
    SU3Matrix::new(
        half,
        z,
        zeta[0],
        z,
        half,
        zeta[1],
        -zeta[0].conj(),
        -zeta[1].conj(),
        Complex64::new(0.0, theta),
    )
}

fn gram_schmidt_in_order(cols: Vec<DVector<f64>>) -> Result<DMatrix<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(cols.len());
    for mut v in cols {
        for _ in 0..2 {
            for c in &out {
                let pc = c.dot(&v);
                v.axpy(-pc, c, 1.0);
            }
        }
        let nv = v.norm();
        if nv < 1e-8 {
            return Err(Error::DegenerateFrame);
        }
        out.push(v / nv);
    }
    Ok(DMatrix::from_columns(&out))
}

fn pullback_frame(base: &MapHandle, x: &[f64], order: &[usize]) -> Result<DMatrix<f64>> {
    let (s, t_amb) = x.split_at(6);
    let t = mat_from_ambient(t_amb);
    let basis = lie_algebra_basis();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(8);
    for xk in basis.iter().take(3) {
        let mut v = vec![0.0; 6];
        v.extend(mat_to_ambient(&(t * xk)));
        cols.push(DVector::from_vec(v));
    }
    let base_frame = sphere_frame(s, order)?;
    for k in 0..5 {
        let e: Vec<f64> = base_frame.column(k).iter().copied().collect();
        let w = base.push_forward(s, &e)?;
        let w = nalgebra::Vector3::from(cx3_from_ambient(&w));
        let zeta = t.adjoint() * w;
        let lift = t * horizontal_element(&zeta);
        let mut v = e;
        v.extend(mat_to_ambient(&lift));
        cols.push(DVector::from_vec(v));
    }
    gram_schmidt_in_order(cols)
}

const NATURAL_ORDER: [usize; 6] = [0, 1, 2, 3, 4, 5];

pub(crate) fn frame_ambient(m: &ManifoldId, x: &[f64]) -> Result<DMatrix<f64>> {
    frame_ambient_with_order(m, x, &NATURAL_ORDER)
}

/// Frame construction with a permuted internal basis order for the sphere
/// parts; the orientation it produces must not depend on the order.
pub(crate) fn frame_ambient_with_order(
    m: &ManifoldId,
    x: &[f64],
    order: &[usize],
) -> Result<DMatrix<f64>> {
    match m {
        ManifoldId::S3 => {
            let o: Vec<usize> = order.iter().copied().filter(|&i| i < 4).collect();
            sphere_frame(x, &o)
        }
        ManifoldId::S5 => sphere_frame(x, order),
        ManifoldId::SU3 => Ok(su3_frame(&mat_from_ambient(x))),
        ManifoldId::S3xS5 => {
            let o3: Vec<usize> = order.iter().copied().filter(|&i| i < 4).collect();
            let f3 = sphere_frame(&x[..4], &o3)?;
            let f5 = sphere_frame(&x[4..], order)?;
            let mut out = DMatrix::zeros(10, 8);
            out.view_mut((0, 0), (4, 3)).copy_from(&f3);
            out.view_mut((4, 3), (6, 5)).copy_from(&f5);
            Ok(out)
        }
        ManifoldId::Pullback(base) => pullback_frame(base, x, order),
    }
}

pub fn tangent_frame(m: &ManifoldId, x: &Point) -> Result<OrientedFrame> {
    let amb = x.ambient();
    let dev = deviation_ambient(m, &amb);
    if dev > EPS_MEMBERSHIP {
        return Err(Error::OffManifold {
            manifold: m.to_string(),
            deviation: dev,
        });
    }
    Ok(OrientedFrame {
        base: x.clone(),
        vectors: frame_ambient(m, &amb)?,
    })
}

/// Same as [`tangent_frame`] but with a permuted internal completion order.
pub fn tangent_frame_with_order(
    m: &ManifoldId,
    x: &Point,
    order: &[usize; 6],
) -> Result<OrientedFrame> {
    Ok(OrientedFrame {
        base: x.clone(),
        vectors: frame_ambient_with_order(m, &x.ambient(), order)?,
    })
}

/// Size of the linearized constraint violation of an ambient vector `v` at
/// `x`; zero exactly for tangent vectors.
pub fn tangency_residual(m: &ManifoldId, x: &Point, v: &[f64]) -> Result<f64> {
    let amb = x.ambient();
    let sphere = |x: &[f64], v: &[f64]| x.iter().zip(v).map(|(a, b)| a * b).sum::<f64>().abs();
    let su3 = |t: &SU3Matrix, tv: &SU3Matrix| {
        let xi = t.adjoint() * tv;
        let skew = (xi + xi.adjoint()).norm();
        skew.max(xi.trace().norm())
    };
    Ok(match m {
        ManifoldId::S3 | ManifoldId::S5 => sphere(&amb, v),
        ManifoldId::SU3 => su3(&mat_from_ambient(&amb), &mat_from_ambient(v)),
        ManifoldId::S3xS5 => sphere(&amb[..4], &v[..4]).max(sphere(&amb[4..], &v[4..])),
        ManifoldId::Pullback(base) => {
            let t = mat_from_ambient(&amb[6..]);
            let tv = mat_from_ambient(&v[6..]);
            let dfs = base.push_forward(&amb[..6], &v[..6])?;
            let link = (0..3)
                .map(|i| (Complex64::new(dfs[2 * i], dfs[2 * i + 1]) - tv[(i, 2)]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            sphere(&amb[..6], &v[..6]).max(su3(&t, &tv)).max(link)
        }
    })
}

/// `retract(base + Σ coords_i · vectors_i)`; the zero vector returns `base`.
pub fn chart_eval(m: &ManifoldId, frame: &OrientedFrame, coords: &[f64]) -> Result<Point> {
    if coords.iter().all(|&c| c == 0.0) {
        return Ok(frame.base.clone());
    }
    let x = chart_ambient(m, &frame.base.ambient(), &frame.vectors, coords)?;
    Point::from_ambient(m, &x)
}

pub(crate) fn chart_ambient(
    m: &ManifoldId,
    base: &[f64],
    frame: &DMatrix<f64>,
    coords: &[f64],
) -> Result<Vec<f64>> {
    let step = frame * DVector::from_column_slice(coords);
    let moved: Vec<f64> = base.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
    retract_ambient(m, &moved)
}

/// Chart coordinates of a point near the frame's base point.
pub fn chart_inverse(m: &ManifoldId, frame: &OrientedFrame, y: &Point) -> Result<Vec<f64>> {
    let base = frame.base.ambient();
    let target = DVector::from_vec(y.ambient());
    let ft = frame.vectors.transpose();
    let mut c = &ft * (&target - DVector::from_column_slice(&base));
    for _ in 0..60 {
        let x = chart_ambient(m, &base, &frame.vectors, c.as_slice())?;
        let step = &ft * (&target - DVector::from_vec(x));
        c += &step;
        if step.norm() < 1e-15 {
            break;
        }
    }
    Ok(c.iter().copied().collect())
}

//! Concrete sphere maps and numerical checks of their differentials.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::params::LomseParams;

const SPHERE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let norm = norm(&coords);
        if (norm - 1.0).abs() > SPHERE_TOL {
            return Err(Error::NotOnSphere(norm));
        }
        Ok(Self { coords })
    }

    /// Normalizes a nonzero vector onto the sphere.
    pub fn from_direction(v: &[f64]) -> Result<Self> {
        let nv = norm(v);
        if !(nv > 0.0) {
            return Err(Error::NotOnSphere(nv));
        }
        Ok(Self {
            coords: v.iter().map(|x| x / nv).collect(),
        })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Intrinsic dimension `n` of the sphere `S^n` containing the point.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A smooth map `S^n -> S^m`, evaluated on ambient coordinates.
pub trait SphereMap {
    fn source_dim(&self) -> usize;
    fn target_dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Vec<f64>;

    fn apply(&self, x: &SpherePoint) -> Result<SpherePoint> {
        if x.dim() != self.source_dim() {
            return Err(Error::LengthMismatch {
                expected: self.source_dim() + 1,
                got: x.coords.len(),
            });
        }
        SpherePoint::new(self.eval(&x.coords))
    }
}

/// `(z1, z2) -> (2 Re z1 conj(z2), 2 Im z1 conj(z2), |z1|^2 - |z2|^2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HopfMap;

impl SphereMap for HopfMap {
    fn source_dim(&self) -> usize {
        3
    }
    fn target_dim(&self) -> usize {
        2
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let (a, b, c, d) = (x[0], x[1], x[2], x[3]);
        vec![
            2.0 * (a * c + b * d),
            2.0 * (b * c - a * d),
            a * a + b * b - c * c - d * d,
        ]
    }
}

pub fn hopf_map(x: &SpherePoint) -> Result<SpherePoint> {
    HopfMap.apply(x)
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityMap(pub usize);

impl SphereMap for IdentityMap {
    fn source_dim(&self) -> usize {
        self.0
    }
    fn target_dim(&self) -> usize {
        self.0
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}

/// Constant map onto the north pole of `S^m`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantMap {
    pub n: usize,
    pub m: usize,
}

impl SphereMap for ConstantMap {
    fn source_dim(&self) -> usize {
        self.n
    }
    fn target_dim(&self) -> usize {
        self.m
    }
    fn eval(&self, _x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.m + 1];
        y[self.m] = 1.0;
        y
    }
}

/// The equator `S^1 -> S^2`, an isometric totally geodesic embedding.
#[derive(Debug, Clone, Copy, Default)]
pub struct EquatorMap;

impl SphereMap for EquatorMap {
    fn source_dim(&self) -> usize {
        1
    }
    fn target_dim(&self) -> usize {
        2
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0], x[1], 0.0]
    }
}

/// Orthonormal basis of the tangent space `x^perp` by Gram-Schmidt on the standard basis.
pub fn tangent_basis(x: &[f64]) -> Vec<Vec<f64>> {
    let dim = x.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim - 1);
    let mut order: Vec<usize> = (0..dim).collect();
    // Start from the axes least aligned with x for better conditioning.
    order.sort_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs()));
    for i in order {
        if basis.len() == dim - 1 {
            break;
        }
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        for _ in 0..2 {
            let c = dot(&v, x);
            v.iter_mut().zip(x).for_each(|(vi, xi)| *vi -= c * xi);
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            basis.push(v.into_iter().map(|vi| vi / nv).collect());
        }
    }
    basis
}

/// Singular values of `f_*` at `x`, sorted descending (`n` values, zeros included).
///
/// Columns come from central differences along great circles, projected onto
/// the tangent space at `f(x)`.
pub fn numeric_singular_values<M: SphereMap + ?Sized>(
    map: &M,
    x: &SpherePoint,
    h: f64,
) -> Result<Vec<f64>> {
    if !(h > 1e-8 && h < 1e-3) {
        return Err(Error::StepOutOfRange(h));
    }
    let n = map.source_dim();
    if x.dim() != n {
        return Err(Error::LengthMismatch {
            expected: n + 1,
            got: x.coords.len(),
        });
    }
    let xc = x.coords();
    let y = map.eval(xc);
    let (ch, sh) = (h.cos(), h.sin());
    let cols: Vec<Vec<f64>> = tangent_basis(xc)
        .iter()
        .map(|e| {
            let plus: Vec<f64> = xc.iter().zip(e).map(|(a, b)| ch * a + sh * b).collect();
            let minus: Vec<f64> = xc.iter().zip(e).map(|(a, b)| ch * a - sh * b).collect();
            let (fp, fm) = (map.eval(&plus), map.eval(&minus));
            let mut d: Vec<f64> = fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let c = dot(&d, &y);
            d.iter_mut().zip(&y).for_each(|(di, yi)| *di -= c * yi);
            d
        })
        .collect();
    let gram = DMatrix::from_fn(n, n, |i, j| dot(&cols[i], &cols[j]));
    let mut sv: Vec<f64> = SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Uniform random points on `S^n` from a seeded generator.
pub fn random_sphere_points(n: usize, count: usize, seed: u64) -> Vec<SpherePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..=n).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Ok(p) = SpherePoint::from_direction(&v) {
            out.push(p);
        }
    }
    out
}

/// `sum_j 1 / (cos^2 theta + sin^2 theta lambda_j^2)`.
pub fn condition_b_sum(sing_values: &[f64], theta: f64) -> f64 {
    let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
    sing_values.iter().map(|l| 1.0 / (c2 + s2 * l * l)).sum()
}

/// Maximum of `|sum - n|` over random sample points, at angle `theta`.
pub fn condition_b_deviation<M: SphereMap + ?Sized>(
    map: &M,
    theta: f64,
    sample_count: usize,
    h: f64,
    seed: u64,
) -> Result<f64> {
    let n = map.source_dim() as f64;
    let mut worst: f64 = 0.0;
    for x in random_sphere_points(map.source_dim(), sample_count, seed) {
        let sv = numeric_singular_values(map, &x, h)?;
        worst = worst.max((condition_b_sum(&sv, theta) - n).abs());
    }
    Ok(worst)
}

pub fn condition_b_check<M: SphereMap + ?Sized>(
    map: &M,
    params: &LomseParams,
    sample_count: usize,
    seed: u64,
) -> Result<f64> {
    condition_b_deviation(map, params.theta, sample_count, 1e-5, seed)
}

/// The cone graph `y -> phi0 |y| H(y / |y|)`, zero at the origin.
pub fn cone_graph_eval(y: &[f64; 4], params: &LomseParams) -> [f64; 3] {
    let r = norm(y);
    if r == 0.0 {
        return [0.0; 3];
    }
    let u: Vec<f64> = y.iter().map(|v| v / r).collect();
    let hv = HopfMap.eval(&u);
    let s = params.phi0 * r;
    [s * hv[0], s * hv[1], s * hv[2]]
}

//! Parameter algebra for maps of `(n, p, k)`-type.
//!
//! A triple fixes everything downstream: the nonzero singular value
//! `lambda` with `lambda^2 = k(k+n-1)/p`, the cone angle `theta`, the cone
//! slope `phi0 = tan(theta)`, and whether the nontrivial equilibrium of the
//! reduced system is a node (type I) or a spiral (type II).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which Hopf fibration family an admissible `(n, p)` pair belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// `(2l+1, 2l)`: fibration over complex projective space.
    ComplexHopf(u32),
    /// `(4l+3, 4l)`: fibration over quaternionic projective space.
    QuaternionicHopf(u32),
    /// `(15, 8)`: fibration over the octonionic projective line.
    OctonionicLine,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    /// Real negative eigenvalues at the cone equilibrium.
    CenterTypeI,
    /// Complex eigenvalues with negative real part.
    SpiralTypeII,
}

impl Stability {
    pub fn label(self) -> &'static str {
        match self {
            Stability::CenterTypeI => "center(I)",
            Stability::SpiralTypeII => "spiral(II)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityVerdict {
    pub admissible: bool,
    pub family: Family,
    pub reason: &'static str,
}

/// `lambda^2` kept as the exact pair `k(k+n-1) / p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaSq {
    pub num: u64,
    pub den: u64,
}

impl LambdaSq {
    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LomseParams {
    pub n: u32,
    pub p: u32,
    pub k: u32,
    pub lambda_sq: LambdaSq,
    pub lambda: f64,
    pub theta: f64,
    pub phi0: f64,
    pub stability: Stability,
    pub admissible: bool,
    pub family: Family,
}

impl LomseParams {
    /// `k(k+n-1)`, the Laplace eigenvalue of degree-`k` spherical harmonics on `S^n`.
    pub fn eigenvalue(&self) -> u64 {
        harmonic_eigenvalue(self.n, self.k)
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda_sq.value()
    }

    pub fn is_type_ii(&self) -> bool {
        self.stability == Stability::SpiralTypeII
    }

    pub fn triple(&self) -> (u32, u32, u32) {
        (self.n, self.p, self.k)
    }
}

fn harmonic_eigenvalue(n: u32, k: u32) -> u64 {
    let (n, k) = (n as u64, k as u64);
    k * (k + n - 1)
}

/// Table lookup for the Hopf fibration families, `(15,8)` first.
pub fn hopf_family(n: u32, p: u32) -> Family {
    if (n, p) == (15, 8) {
        return Family::OctonionicLine;
    }
    if p >= 2 && p % 2 == 0 && n == p + 1 {
        return Family::ComplexHopf(p / 2);
    }
    if p >= 4 && p % 4 == 0 && n == p + 3 {
        return Family::QuaternionicHopf(p / 4);
    }
    Family::None
}

pub fn admissibility(n: u32, p: u32, k: u32) -> AdmissibilityVerdict {
    let family = hopf_family(n, p);
    let (admissible, reason) = if k < 2 || k % 2 != 0 {
        (false, "odd-k")
    } else if family == Family::None {
        (false, "no-family")
    } else {
        (true, "ok")
    };
    AdmissibilityVerdict {
        admissible,
        family,
        reason,
    }
}

/// `n^2 - 6n + 1 + 8n^2 / (k(k+n-1))`, the discriminant of the linearization at `(phi0, 0)`.
pub fn stability_discriminant(n: u32, k: u32) -> f64 {
    let n = n as f64;
    let big_k = harmonic_eigenvalue(n as u32, k) as f64;
    n * n - 6.0 * n + 1.0 + 8.0 * n * n / big_k
}

/// Sign of the discriminant, evaluated exactly over the integers.
fn discriminant_sign(n: u32, k: u32) -> std::cmp::Ordering {
    let n = n as i128;
    let big_k = harmonic_eigenvalue(n as u32, k) as i128;
    ((n * n - 6 * n + 1) * big_k + 8 * n * n).cmp(&0)
}

pub fn classify_stability(params: &LomseParams) -> Stability {
    classify_triple(params.n, params.k)
}

fn classify_triple(n: u32, k: u32) -> Stability {
    match discriminant_sign(n, k) {
        std::cmp::Ordering::Less => Stability::SpiralTypeII,
        _ => Stability::CenterTypeI,
    }
}

pub fn build_params(n: u32, p: u32, k: u32, allow_inadmissible: bool) -> Result<LomseParams> {
    if n < 2 {
        return Err(Error::Domain(format!("n = {n} must be at least 2")));
    }
    if p < 1 || p >= n {
        return Err(Error::Domain(format!("need 1 <= p < n, got p = {p}, n = {n}")));
    }
    if k < 2 {
        return Err(Error::Domain(format!("k = {k} must be at least 2")));
    }
    let verdict = admissibility(n, p, k);
    if !verdict.admissible && !allow_inadmissible {
        return Err(Error::InadmissibleTriple {
            n,
            p,
            k,
            reason: verdict.reason,
        });
    }

    let big_k = harmonic_eigenvalue(n, k);
    let lambda_sq = LambdaSq {
        num: big_k,
        den: p as u64,
    };
    let (nf, pf, kf) = (n as f64, p as f64, big_k as f64);
    let lambda2 = lambda_sq.value();
    let cos2_theta = (1.0 - pf / nf) / (1.0 - pf / kf);
    let theta = cos2_theta.sqrt().acos();
    let phi0 = ((pf - nf / lambda2) / (nf - pf)).sqrt();

    Ok(LomseParams {
        n,
        p,
        k,
        lambda_sq,
        lambda: lambda2.sqrt(),
        theta,
        phi0,
        stability: classify_triple(n, k),
        admissible: verdict.admissible,
        family: verdict.family,
    })
}

/// All admissible triples with `n <= n_max`, `k <= k_max`, in lexicographic order.
pub fn enumerate_admissible(n_max: u32, k_max: u32) -> Vec<LomseParams> {
    let mut out = Vec::new();
    for n in 3..=n_max {
        for p in 1..n {
            if hopf_family(n, p) == Family::None {
                continue;
            }
            for k in (2..=k_max).step_by(2) {
                if let Ok(params) = build_params(n, p, k, false) {
                    out.push(params);
                }
            }
        }
    }
    out
}

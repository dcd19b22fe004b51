//! Factorized product states: the single-site vectors `chi(z)`, the kink states
//! `phi(z)` on chains and the interface states `Omega(z)` on planar lattices.
//!
//! `chi(z)` has coefficient `z^k sqrt(binomial(2S, k))` on local index `k = S - m`, so
//! `chi(0)` is the fully polarized up state and, for `S = 1/2`,
//! `chi(z) = |up> + z |down>`. The kink state places `chi(z q^x)` on site `x`; on a
//! planar lattice the interface state places `chi(z q^{x+y})` on site `(x, y)`.

use alloc::vec::Vec;

use crate::lattice::{diagonal_height, Chain, LatticeSite, PlanarLattice};
use crate::operators::full_dimension;
use crate::spin::{sector_basis, Anisotropy, SectorBasis, SpinQuantum};
use crate::{Error, Result, C64};

/// Records that a site vector is `scale * chi(param)`, enabling the closed-form overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentLabel {
    pub param: C64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleSiteVector {
    spin: SpinQuantum,
    coeffs: Vec<C64>,
    coherent: Option<CoherentLabel>,
}

impl SingleSiteVector {
    /// Arbitrary site vector, indexed by `k = S - m`.
    pub fn from_coeffs(spin: SpinQuantum, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != spin.dim() {
            return Err(Error::LengthMismatch {
                expected: spin.dim(),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            spin,
            coeffs,
            coherent: None,
        })
    }

    pub fn spin(&self) -> SpinQuantum {
        self.spin
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coherent(&self) -> Option<CoherentLabel> {
        self.coherent
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `<self, other>` by summing coefficients.
    pub fn inner_direct(&self, other: &Self) -> C64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `<self, other>`, using `(1 + conj(a) b)^{2S}` when both are labelled `chi` vectors.
    pub fn inner(&self, other: &Self) -> C64 {
        match (self.coherent, other.coherent) {
            (Some(a), Some(b)) => chi_overlap(a.param, b.param, self.spin) * (a.scale * b.scale),
            _ => self.inner_direct(other),
        }
    }

    /// `<S^3>` in this (unnormalized) vector.
    pub fn expect_s3(&self) -> f64 {
        let weight: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm_sqr() * self.spin.m_of(k))
            .sum();
        weight / self.norm_sqr()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            spin: self.spin,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            coherent: self.coherent.map(|l| CoherentLabel {
                param: l.param,
                scale: l.scale * factor,
            }),
        }
    }

    /// `|m> -> |-m>`.
    pub fn flipped(&self) -> Self {
        Self {
            spin: self.spin,
            coeffs: self.coeffs.iter().rev().copied().collect(),
            coherent: None,
        }
    }

    /// `exp(i theta S^3)` applied to the vector.
    pub fn rotated(&self, theta: f64) -> Self {
        Self {
            spin: self.spin,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * C64::from_polar(1.0, theta * self.spin.m_of(k)))
                .collect(),
            coherent: None,
        }
    }
}

/// `chi(z)`.
pub fn chi(z: C64, spin: SpinQuantum) -> SingleSiteVector {
    let mut power = C64::new(1.0, 0.0);
    let coeffs = (0..spin.dim())
        .map(|k| {
            let c = power * spin.binomial_weight(k);
            power *= z;
            c
        })
        .collect();
    SingleSiteVector {
        spin,
        coeffs,
        coherent: Some(CoherentLabel {
            param: z,
            scale: 1.0,
        }),
    }
}

/// Closed form `<chi(a), chi(b)> = (1 + conj(a) b)^{2S}`.
pub fn chi_overlap(a: C64, b: C64, spin: SpinQuantum) -> C64 {
    (C64::new(1.0, 0.0) + a.conj() * b).powu(spin.twice_s())
}

/// Tensor product of one site vector per lattice site, kept factorized.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    spin: SpinQuantum,
    sites: Vec<LatticeSite>,
    factors: Vec<SingleSiteVector>,
}

impl ProductState {
    pub fn new(sites: Vec<LatticeSite>, factors: Vec<SingleSiteVector>) -> Result<Self> {
        if sites.len() != factors.len() {
            return Err(Error::LengthMismatch {
                expected: sites.len(),
                got: factors.len(),
            });
        }
        let spin = factors
            .first()
            .map(|f| f.spin)
            .ok_or(Error::InvalidGeometry("product state has no sites"))?;
        if factors.iter().any(|f| f.spin != spin) {
            return Err(Error::SiteMismatch);
        }
        Ok(Self {
            spin,
            sites,
            factors,
        })
    }

    pub fn spin(&self) -> SpinQuantum {
        self.spin
    }

    pub fn sites(&self) -> &[LatticeSite] {
        &self.sites
    }

    pub fn factors(&self) -> &[SingleSiteVector] {
        &self.factors
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.factors
            .iter()
            .map(SingleSiteVector::norm_sqr)
            .product()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    /// The same state with every factor normalized, so the product has unit norm.
    pub fn normalized(&self) -> Self {
        Self {
            spin: self.spin,
            sites: self.sites.clone(),
            factors: self
                .factors
                .iter()
                .map(|f| f.scaled(1.0 / libm::sqrt(f.norm_sqr())))
                .collect(),
        }
    }

    pub fn spin_flip(&self) -> Self {
        self.map_factors(SingleSiteVector::flipped)
    }

    /// `exp(i theta S^3_tot)` applied factor by factor.
    pub fn rotated(&self, theta: f64) -> Self {
        self.map_factors(|f| f.rotated(theta))
    }

    fn map_factors(&self, f: impl Fn(&SingleSiteVector) -> SingleSiteVector) -> Self {
        Self {
            spin: self.spin,
            sites: self.sites.clone(),
            factors: self.factors.iter().map(f).collect(),
        }
    }

    /// Factors on the given sites, in the given order.
    pub fn restrict(&self, sites: &[LatticeSite]) -> Result<Self> {
        let factors = sites
            .iter()
            .map(|s| {
                self.sites
                    .iter()
                    .position(|t| t == s)
                    .map(|i| self.factors[i].clone())
                    .ok_or(Error::SiteMismatch)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sites.to_vec(), factors)
    }

    /// Full coefficient vector in the product basis.
    pub fn to_vector(&self, cap: usize) -> Result<Vec<C64>> {
        let dim = full_dimension(self.n_sites(), self.spin);
        if dim > cap as u128 {
            return Err(Error::DimensionCap { dim, cap });
        }
        let mut v = alloc::vec![C64::new(1.0, 0.0)];
        for f in &self.factors {
            v = v
                .iter()
                .flat_map(|a| f.coeffs.iter().map(move |b| a * b))
                .collect();
        }
        Ok(v)
    }

    /// Fixed-magnetization component of the expanded state, in sector ordering.
    pub fn sector_project(&self, twice_m: i64) -> Result<(SectorBasis, Vec<C64>)> {
        let basis = sector_basis(self.n_sites(), self.spin, twice_m)?;
        let coeffs = (0..basis.len())
            .map(|i| {
                basis
                    .config(i)
                    .iter()
                    .zip(&self.factors)
                    .map(|(&k, f)| f.coeffs[k as usize])
                    .product()
            })
            .collect();
        Ok((basis, coeffs))
    }

    /// Per-site `<S^3_x>`, computed from the factors alone.
    pub fn magnetization_profile(&self) -> MagnetizationProfile {
        MagnetizationProfile {
            spin: self.spin,
            values: self
                .factors
                .iter()
                .map(SingleSiteVector::expect_s3)
                .collect(),
        }
    }
}

/// `<a, b>` as the product of single-site inner products.
pub fn overlap(a: &ProductState, b: &ProductState) -> Result<C64> {
    check_compatible(a, b)?;
    Ok(a.factors
        .iter()
        .zip(&b.factors)
        .map(|(x, y)| x.inner(y))
        .product())
}

/// `<a, b>` by summing coefficients site by site, never using the closed form.
pub fn overlap_direct(a: &ProductState, b: &ProductState) -> Result<C64> {
    check_compatible(a, b)?;
    Ok(a.factors
        .iter()
        .zip(&b.factors)
        .map(|(x, y)| x.inner_direct(y))
        .product())
}

fn check_compatible(a: &ProductState, b: &ProductState) -> Result<()> {
    if a.sites != b.sites || a.spin != b.spin {
        return Err(Error::SiteMismatch);
    }
    Ok(())
}

fn scaled_param(z: C64, q: f64, height: i64) -> C64 {
    z * libm::pow(q, height as f64)
}

/// `phi(z)`: `chi(z q^x)` on every chain site `x`.
pub fn kink_state(z: C64, chain: &Chain, spin: SpinQuantum, aniso: Anisotropy) -> ProductState {
    let sites = chain.labels().map(|x| LatticeSite::new(x, 0)).collect();
    let factors = chain
        .labels()
        .map(|x| chi(scaled_param(z, aniso.q(), x), spin))
        .collect();
    ProductState::new(sites, factors).expect("chains are nonempty")
}

/// `Omega(z)`: `chi(z q^{x+y})` on every lattice site.
pub fn interface_state(
    z: C64,
    lattice: &PlanarLattice,
    spin: SpinQuantum,
    aniso: Anisotropy,
) -> Result<ProductState> {
    if aniso.delta() <= 1.0 {
        return Err(Error::RequiresAnisotropic(aniso.delta()));
    }
    let factors = lattice
        .sites()
        .iter()
        .map(|&s| chi(scaled_param(z, aniso.q(), diagonal_height(s)), spin))
        .collect();
    ProductState::new(lattice.sites().to_vec(), factors)
}

/// Kink width `xi = 1/ln(1/q)`.
pub fn kink_width(aniso: Anisotropy) -> f64 {
    1.0 / aniso.inverse_width()
}

/// Kink center `a = ln|z| / ln(1/q)`: the site where `|z q^a| = 1`.
pub fn kink_center(z: C64, aniso: Anisotropy) -> f64 {
    libm::log(z.norm()) / aniso.inverse_width()
}

/// Closed-form spin-1/2 kink profile `(1/2) tanh((x - a)/xi)`.
pub fn tanh_profile(x: f64, z: C64, aniso: Anisotropy) -> f64 {
    0.5 * libm::tanh((x - kink_center(z, aniso)) / kink_width(aniso))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationProfile {
    pub spin: SpinQuantum,
    pub values: Vec<f64>,
}

/// The four zero-energy ground state types, keyed by the end magnetizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterfaceType {
    Up,
    Down,
    Kink,
    Antikink,
}

/// Classifies by the end-site values `(alpha, beta)`, each required within `tol` of `+-S`.
pub fn classify_profile(profile: &MagnetizationProfile, tol: f64) -> Result<InterfaceType> {
    let s = profile.spin.s();
    let (alpha, beta) = match (profile.values.first(), profile.values.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::InvalidGeometry("empty profile")),
    };
    let saturate = |v: f64| {
        if (v - s).abs() < tol {
            Some(true)
        } else if (v + s).abs() < tol {
            Some(false)
        } else {
            None
        }
    };
    match (saturate(alpha), saturate(beta)) {
        (Some(true), Some(true)) => Ok(InterfaceType::Up),
        (Some(false), Some(false)) => Ok(InterfaceType::Down),
        (Some(false), Some(true)) => Ok(InterfaceType::Kink),
        (Some(true), Some(false)) => Ok(InterfaceType::Antikink),
        _ => Err(Error::Undetermined { alpha, beta }),
    }
}

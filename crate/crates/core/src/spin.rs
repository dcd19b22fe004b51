//! Spin-S matrices, the XXZ anisotropy and fixed-magnetization sectors.
//!
//! Half-integers are stored doubled: `twice_s = 2S`, `twice_m = 2M`.

use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::{Error, Result, C64};

/// Spin quantum number `S`, stored as `2S >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinQuantum {
    twice_s: u32,
}

impl SpinQuantum {
    pub const HALF: SpinQuantum = SpinQuantum { twice_s: 1 };
    pub const ONE: SpinQuantum = SpinQuantum { twice_s: 2 };

    pub fn new(twice_s: u32) -> Result<Self> {
        if twice_s == 0 {
            return Err(Error::InvalidSpin(twice_s));
        }
        Ok(Self { twice_s })
    }

    pub fn twice_s(self) -> u32 {
        self.twice_s
    }

    /// Local dimension `2S + 1`.
    pub fn dim(self) -> usize {
        self.twice_s as usize + 1
    }

    pub fn s(self) -> f64 {
        f64::from(self.twice_s) / 2.0
    }

    /// `2m` for local index `k` (`m = S - k`).
    pub fn twice_m_of(self, k: usize) -> i64 {
        i64::from(self.twice_s) - 2 * k as i64
    }

    /// `m` for local index `k`.
    pub fn m_of(self, k: usize) -> f64 {
        self.twice_m_of(k) as f64 / 2.0
    }

    /// `sqrt(binomial(2S, k))`, the coherent-state weight of local index `k`.
    pub fn binomial_weight(self, k: usize) -> f64 {
        libm::sqrt(binomial(self.twice_s as usize, k))
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Anisotropy `delta >= 1` together with the root `q` of `(q + 1/q)/2 = delta` in `(0, 1]`.
///
/// `delta = f64::INFINITY` is accepted and gives the Ising limit `q = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anisotropy {
    delta: f64,
    q: f64,
}

impl Anisotropy {
    pub fn delta(self) -> f64 {
        self.delta
    }

    pub fn q(self) -> f64 {
        self.q
    }

    /// `1/delta`, the coefficient of the transverse couplings.
    pub fn inv_delta(self) -> f64 {
        1.0 / self.delta
    }

    pub fn is_isotropic(self) -> bool {
        self.delta == 1.0
    }

    /// Strength `S * sqrt(1 - 1/delta^2)` of the boundary field that supports kinks.
    pub fn kink_field(self, spin: SpinQuantum) -> f64 {
        let inv = self.inv_delta();
        spin.s() * libm::sqrt(1.0 - inv * inv)
    }

    /// Inverse localization length `ln(1/q)` of the kink.
    pub fn inverse_width(self) -> f64 {
        -libm::log(self.q)
    }
}

/// Solves `(q + 1/q)/2 = delta` for the root in `(0, 1]`.
pub fn q_from_delta(delta: f64) -> Result<Anisotropy> {
    if delta.is_nan() || delta < 1.0 {
        return Err(Error::InvalidAnisotropy(delta));
    }
    // 1/(delta + sqrt(delta^2 - 1)) equals delta - sqrt(delta^2 - 1) without the cancellation.
    let q = 1.0 / (delta + libm::sqrt(delta * delta - 1.0));
    Ok(Anisotropy { delta, q })
}

/// Spin matrices `S^1, S^2, S^3` in the `m = S, ..., -S` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMatrices {
    pub spin: SpinQuantum,
    pub s1: DMatrix<C64>,
    pub s2: DMatrix<C64>,
    pub s3: DMatrix<C64>,
}

impl SpinMatrices {
    /// Raising operator `S^+ = S^1 + i S^2`.
    pub fn raising(&self) -> DMatrix<C64> {
        &self.s1 + &self.s2 * C64::i()
    }
}

pub fn spin_matrices(spin: SpinQuantum) -> SpinMatrices {
    let d = spin.dim();
    let two_s = spin.twice_s() as usize;
    let mut plus = DMatrix::<C64>::zeros(d, d);
    for k in 1..d {
        // <m+1| S^+ |m> = sqrt((S - m)(S + m + 1)) = sqrt(k (2S - k + 1))
        plus[(k - 1, k)] = C64::new(libm::sqrt((k * (two_s - k + 1)) as f64), 0.0);
    }
    let minus = plus.adjoint();
    let s1 = (&plus + &minus) * C64::new(0.5, 0.0);
    let s2 = (&plus - &minus) * C64::new(0.0, -0.5);
    let s3 = DMatrix::from_fn(d, d, |r, c| {
        if r == c {
            C64::new(spin.m_of(r), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    SpinMatrices { spin, s1, s2, s3 }
}

/// Sector labels `2M` from `N*2S` down to `-N*2S` in steps of 2.
pub fn sector_labels(n_sites: usize, spin: SpinQuantum) -> impl Iterator<Item = i64> {
    let top = n_sites as i64 * i64::from(spin.twice_s());
    (0..=top).map(move |j| top - 2 * j)
}

/// Configurations with fixed total magnetization, in ascending product-basis order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    n_sites: usize,
    spin: SpinQuantum,
    twice_m: i64,
    /// Full product-basis indices, strictly increasing.
    states: Vec<u64>,
}

impl SectorBasis {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn spin(&self) -> SpinQuantum {
        self.spin
    }

    pub fn twice_m(&self) -> i64 {
        self.twice_m
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Product-basis index of the `i`-th configuration.
    pub fn state(&self, i: usize) -> u64 {
        self.states[i]
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    /// Local indices `k = S - m` of the `i`-th configuration, site 0 first.
    pub fn config(&self, i: usize) -> Vec<u8> {
        decode(self.states[i], self.n_sites, self.spin.dim())
    }

    pub fn index_of(&self, config: &[u8]) -> Option<usize> {
        if config.len() != self.n_sites {
            return None;
        }
        self.index_of_state(encode(config, self.spin.dim()))
    }

    pub fn index_of_state(&self, state: u64) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }
}

pub(crate) fn decode(mut state: u64, n_sites: usize, d: usize) -> Vec<u8> {
    let mut out = alloc::vec![0u8; n_sites];
    for slot in out.iter_mut().rev() {
        *slot = (state % d as u64) as u8;
        state /= d as u64;
    }
    out
}

pub(crate) fn encode(config: &[u8], d: usize) -> u64 {
    config
        .iter()
        .fold(0u64, |acc, &k| acc * d as u64 + u64::from(k))
}

pub fn sector_basis(n_sites: usize, spin: SpinQuantum, twice_m: i64) -> Result<SectorBasis> {
    let top = n_sites as i64 * i64::from(spin.twice_s());
    let bad = || Error::InvalidSector {
        n_sites,
        twice_s: spin.twice_s(),
        twice_m,
    };
    if n_sites == 0 || twice_m.abs() > top || (top - twice_m) % 2 != 0 {
        return Err(bad());
    }
    // Number of lowering quanta sum(k) needed to reach M from the all-up state.
    let lowered = ((top - twice_m) / 2) as usize;
    let mut states = Vec::new();
    fill(
        &mut states,
        0,
        n_sites,
        lowered,
        spin.twice_s() as usize,
        spin.dim() as u64,
    );
    Ok(SectorBasis {
        n_sites,
        spin,
        twice_m,
        states,
    })
}

fn fill(out: &mut Vec<u64>, prefix: u64, remaining: usize, quanta: usize, kmax: usize, d: u64) {
    if remaining == 0 {
        if quanta == 0 {
            out.push(prefix);
        }
        return;
    }
    if quanta > remaining * kmax {
        return;
    }
    for k in 0..=kmax.min(quanta) {
        fill(
            out,
            prefix * d + k as u64,
            remaining - 1,
            quanta - k,
            kmax,
            d,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn spin_half_matrices() {
        let m = spin_matrices(SpinQuantum::HALF);
        assert_eq!(m.s3[(0, 0)].re, 0.5);
        assert_eq!(m.s3[(1, 1)].re, -0.5);
        assert_eq!(m.s1[(0, 1)], C64::new(0.5, 0.0));
        assert_eq!(m.s2[(0, 1)], C64::new(0.0, -0.5));
        assert_eq!(m.s2[(1, 0)], C64::new(0.0, 0.5));
    }

    #[test]
    fn spin_one_ladder() {
        let m = spin_matrices(SpinQuantum::ONE);
        let r = core::f64::consts::FRAC_1_SQRT_2;
        assert!((m.s1[(0, 1)].re - r).abs() < 1e-15);
        assert!((m.s1[(1, 2)].re - r).abs() < 1e-15);
        assert_eq!(
            [m.s3[(0, 0)].re, m.s3[(1, 1)].re, m.s3[(2, 2)].re],
            [1.0, 0.0, -1.0]
        );
    }

    #[test]
    fn su2_relations_and_casimir() {
        for twice_s in 1..=5 {
            let spin = SpinQuantum::new(twice_s).unwrap();
            let m = spin_matrices(spin);
            let i = C64::i();
            let c12 = &m.s1 * &m.s2 - &m.s2 * &m.s1 - &m.s3 * i;
            let c23 = &m.s2 * &m.s3 - &m.s3 * &m.s2 - &m.s1 * i;
            let c31 = &m.s3 * &m.s1 - &m.s1 * &m.s3 - &m.s2 * i;
            assert!(max_abs(&c12) < 1e-14);
            assert!(max_abs(&c23) < 1e-14);
            assert!(max_abs(&c31) < 1e-14);
            let s = spin.s();
            let cas = &m.s1 * &m.s1 + &m.s2 * &m.s2 + &m.s3 * &m.s3
                - DMatrix::<C64>::identity(spin.dim(), spin.dim()) * C64::new(s * (s + 1.0), 0.0);
            assert!(max_abs(&cas) < 1e-13, "twice_s={twice_s}");
        }
    }

    #[test]
    fn zero_spin_rejected() {
        assert_eq!(SpinQuantum::new(0), Err(Error::InvalidSpin(0)));
    }

    #[test]
    fn q_values() {
        assert_eq!(q_from_delta(1.0).unwrap().q(), 1.0);
        assert!((q_from_delta(1.25).unwrap().q() - 0.5).abs() < 1e-15);
        assert!((q_from_delta(2.0).unwrap().q() - (2.0 - libm::sqrt(3.0))).abs() < 1e-15);
        assert_eq!(q_from_delta(f64::INFINITY).unwrap().q(), 0.0);
        assert!(q_from_delta(0.99).is_err());
        assert!(q_from_delta(f64::NAN).is_err());
    }

    #[test]
    fn q_roundtrip_and_monotone() {
        let mut prev = f64::INFINITY;
        for i in 0..=40 {
            let delta = 1.0 + 0.1 * i as f64;
            let a = q_from_delta(delta).unwrap();
            assert!(((a.q() + 1.0 / a.q()) / 2.0 - delta).abs() < 1e-12);
            assert!(a.q() < prev);
            prev = a.q();
        }
    }

    #[test]
    fn small_sectors() {
        let b = sector_basis(2, SpinQuantum::HALF, 0).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.config(0), [0, 1]);
        assert_eq!(b.config(1), [1, 0]);
        assert_eq!(sector_basis(4, SpinQuantum::HALF, 2).unwrap().len(), 4);
        assert!(sector_basis(4, SpinQuantum::HALF, 1).is_err());
        assert!(sector_basis(4, SpinQuantum::HALF, 6).is_err());
    }

    #[test]
    fn spin_one_three_sites_brute_force() {
        // Brute-force oracle: count the 27 configurations with sum of m equal to zero.
        let mut count = 0;
        for a in -1i32..=1 {
            for b in -1i32..=1 {
                for c in -1i32..=1 {
                    if a + b + c == 0 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, 7);
        assert_eq!(sector_basis(3, SpinQuantum::ONE, 0).unwrap().len(), count);
    }

    #[test]
    fn sectors_partition_full_space() {
        for twice_s in 1..=3u32 {
            let spin = SpinQuantum::new(twice_s).unwrap();
            for n in 1..=6usize {
                let mut all: Vec<u64> = sector_labels(n, spin)
                    .flat_map(|m| sector_basis(n, spin, m).unwrap().states)
                    .collect();
                all.sort_unstable();
                let full = (spin.dim() as u64).pow(n as u32);
                assert_eq!(all.len() as u64, full);
                assert!(all.iter().enumerate().all(|(i, &s)| s == i as u64));
            }
        }
    }

    #[test]
    fn index_roundtrip() {
        let b = sector_basis(5, SpinQuantum::ONE, 2).unwrap();
        for i in 0..b.len() {
            let cfg = b.config(i);
            let total: i64 = cfg.iter().map(|&k| b.spin().twice_m_of(k as usize)).sum();
            assert_eq!(total, 2);
            assert_eq!(b.index_of(&cfg), Some(i));
        }
        assert!(b.states().windows(2).all(|w| w[0] < w[1]));
    }
}

//! Sparse operators on tensor-product spaces and the kink Hamiltonians.
//!
//! The two-site kink interaction is
//!
//! ```text
//! h = S^2 - S3 (x) S3 - (1/Delta)(S1 (x) S1 + S2 (x) S2) + sign * B * (S3 (x) 1 - 1 (x) S3)
//! ```
//!
//! with `B = S sqrt(1 - 1/Delta^2)`. It is positive semidefinite, and for `sign = +1`
//! it annihilates `chi(z) (x) chi(z q)` for every `z`. Summing it over the bonds of a
//! chain gives the XXZ chain with boundary field `sign * B * (S3_first - S3_last)`.

use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::lattice::{Chain, PlanarLattice};
use crate::spin::{spin_matrices, Anisotropy, SectorBasis, SpinQuantum};
use crate::{Error, Result, C64};

const ENTRY_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-13;

/// Operator in compressed-row form: entries are ordered by `(row, col)` and unique.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Sorts and merges `(row, col, value)` triplets. Entries that merge to exactly zero
    /// are dropped. With `hermitian` set, conjugate symmetry is checked.
    pub fn from_triplets(
        dim: usize,
        mut triplets: Vec<(usize, usize, C64)>,
        hermitian: bool,
    ) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|t| t.0 >= dim || t.1 >= dim) {
            return Err(Error::IndexOutOfRange {
                index: r.max(c),
                dim,
            });
        }
        triplets.sort_unstable_by_key(|t| (t.0, t.1));
        let mut row_ptr = alloc::vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if rows.last() == Some(&r) && cols.last() == Some(&c) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != C64::new(0.0, 0.0) {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let op = Self {
            dim,
            row_ptr,
            cols: keep_cols,
            vals: keep_vals,
            hermitian,
        };
        if hermitian {
            let defect = op.hermitian_defect();
            if defect > HERMITIAN_TOL {
                return Err(Error::NotHermitian(defect));
            }
        }
        Ok(op)
    }

    fn from_rows(dim: usize, rows: Vec<Vec<(usize, C64)>>, hermitian: bool) -> Result<Self> {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        let op = Self {
            dim,
            row_ptr,
            cols,
            vals,
            hermitian,
        };
        if hermitian {
            let defect = op.hermitian_defect();
            if defect > HERMITIAN_TOL {
                return Err(Error::NotHermitian(defect));
            }
        }
        Ok(op)
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(alloc::vec![C64::new(1.0, 0.0); dim])
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: alloc::vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
            hermitian: true,
        }
    }

    pub fn diagonal(values: Vec<C64>) -> Self {
        let dim = values.len();
        let hermitian = values.iter().all(|v| v.im == 0.0);
        let triplets = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| (i, i, v))
            .collect();
        Self::from_triplets(dim, triplets, false)
            .map(|mut op| {
                op.hermitian = hermitian;
                op
            })
            .expect("diagonal indices are in range")
    }

    /// Dense Hermitian matrix as an operator, dropping entries below `1e-15`.
    pub fn from_dense(m: &DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::LengthMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let mut triplets = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)].norm() > 1e-15 {
                    triplets.push((r, c, m[(r, c)]));
                }
            }
        }
        let hermitian = (m - m.adjoint()).iter().all(|z| z.norm() <= HERMITIAN_TOL);
        Self::from_triplets(m.nrows(), triplets, hermitian)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// `(col, value)` pairs of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(j) => self.vals[span.start + j],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// `max |A_rc - conj(A_cr)|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok((0..self.dim)
            .map(|r| self.row(r).map(|(c, a)| a * v[c]).sum())
            .collect())
    }

    pub fn adjoint(&self) -> Self {
        let triplets = self.entries().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.dim, triplets, false)
            .map(|mut op| {
                op.hermitian = self.hermitian;
                op
            })
            .expect("indices are in range")
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut rows = Vec::with_capacity(self.dim);
        let mut acc: alloc::collections::BTreeMap<usize, C64> = Default::default();
        for r in 0..self.dim {
            acc.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    *acc.entry(c).or_insert(C64::new(0.0, 0.0)) += a * b;
                }
            }
            rows.push(
                acc.iter()
                    .filter(|(_, v)| **v != C64::new(0.0, 0.0))
                    .map(|(&c, &v)| (c, v))
                    .collect(),
            );
        }
        Self::from_rows(self.dim, rows, false)
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &Self, factor: C64) -> Result<Self> {
        self.check_dim(other)?;
        let triplets = self
            .entries()
            .chain(other.entries().map(|(r, c, v)| (r, c, v * factor)))
            .collect();
        let hermitian = self.hermitian && other.hermitian && factor.im == 0.0;
        Self::from_triplets(self.dim, triplets, false).map(|mut op| {
            op.hermitian = hermitian;
            op
        })
    }

    /// `max |[A, B]_rc|`.
    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        Ok(ab.add_scaled(&ba, C64::new(-1.0, 0.0))?.max_abs())
    }

    /// `U^dagger A U`.
    pub fn conjugate_by(&self, unitary: &Self) -> Result<Self> {
        unitary.adjoint().matmul(&self.matmul(unitary)?)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }
}

/// A configuration space on which local terms act: either the full product space or a
/// magnetization sector.
pub trait Space {
    fn n_sites(&self) -> usize;
    fn spin(&self) -> SpinQuantum;
    fn dim(&self) -> usize;
    /// Product-basis index of the `i`-th basis state.
    fn state(&self, i: usize) -> u64;
    fn index(&self, state: u64) -> Option<usize>;
}

/// The full product space `(C^{2S+1})^{(x) n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FullSpace {
    n_sites: usize,
    spin: SpinQuantum,
    dim: usize,
}

impl FullSpace {
    pub fn new(n_sites: usize, spin: SpinQuantum, cap: usize) -> Result<Self> {
        let dim = full_dimension(n_sites, spin);
        if dim > cap as u128 {
            return Err(Error::DimensionCap { dim, cap });
        }
        Ok(Self {
            n_sites,
            spin,
            dim: dim as usize,
        })
    }
}

pub fn full_dimension(n_sites: usize, spin: SpinQuantum) -> u128 {
    (spin.dim() as u128).saturating_pow(n_sites as u32)
}

impl Space for FullSpace {
    fn n_sites(&self) -> usize {
        self.n_sites
    }
    fn spin(&self) -> SpinQuantum {
        self.spin
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn state(&self, i: usize) -> u64 {
        i as u64
    }
    fn index(&self, state: u64) -> Option<usize> {
        ((state as usize) < self.dim).then_some(state as usize)
    }
}

impl Space for SectorBasis {
    fn n_sites(&self) -> usize {
        SectorBasis::n_sites(self)
    }
    fn spin(&self) -> SpinQuantum {
        SectorBasis::spin(self)
    }
    fn dim(&self) -> usize {
        self.len()
    }
    fn state(&self, i: usize) -> u64 {
        SectorBasis::state(self, i)
    }
    fn index(&self, state: u64) -> Option<usize> {
        self.index_of_state(state)
    }
}

/// `2M` of a product-basis state.
pub fn state_twice_m(mut state: u64, n_sites: usize, spin: SpinQuantum) -> i64 {
    let d = spin.dim() as u64;
    let mut lowered = 0i64;
    for _ in 0..n_sites {
        lowered += (state % d) as i64;
        state /= d;
    }
    n_sites as i64 * i64::from(spin.twice_s()) - 2 * lowered
}

/// Sum of a two-site Hermitian term over `bonds`, assembled on `space`.
///
/// The term is a `d^2 x d^2` matrix indexed by `k_from * d + k_to`.
pub fn assemble_bond_sum<S: Space>(
    space: &S,
    bonds: &[(usize, usize)],
    term: &DMatrix<C64>,
) -> Result<SparseOperator> {
    let n = space.n_sites();
    let d = space.spin().dim();
    if let Some(&(a, b)) = bonds.iter().find(|&&(a, b)| a >= n || b >= n || a == b) {
        return Err(Error::IndexOutOfRange {
            index: a.max(b),
            dim: n,
        });
    }
    let place: Vec<u64> = (0..n).map(|i| (d as u64).pow((n - 1 - i) as u32)).collect();
    // Row-wise nonzero structure of the local term.
    let local_rows: Vec<Vec<(usize, C64)>> = (0..d * d)
        .map(|r| {
            (0..d * d)
                .filter(|&c| term[(r, c)].norm() > 0.0)
                .map(|c| (c, term[(r, c)]))
                .collect()
        })
        .collect();

    let mut rows = Vec::with_capacity(space.dim());
    let mut scratch: Vec<(usize, C64)> = Vec::new();
    for i in 0..space.dim() {
        let s = space.state(i);
        scratch.clear();
        for &(a, b) in bonds {
            let ka = ((s / place[a]) % d as u64) as usize;
            let kb = ((s / place[b]) % d as u64) as usize;
            let base = s - ka as u64 * place[a] - kb as u64 * place[b];
            for &(c, v) in &local_rows[ka * d + kb] {
                let t = base + (c / d) as u64 * place[a] + (c % d) as u64 * place[b];
                match space.index(t) {
                    Some(j) => scratch.push((j, v)),
                    None => {
                        return Err(Error::NotBlockDiagonal {
                            row: i,
                            col: t as usize,
                        })
                    }
                }
            }
        }
        scratch.sort_unstable_by_key(|e| e.0);
        let mut row: Vec<(usize, C64)> = Vec::with_capacity(scratch.len());
        for &(j, v) in &scratch {
            match row.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => row.push((j, v)),
            }
        }
        row.retain(|e| e.1 != C64::new(0.0, 0.0));
        rows.push(row);
    }
    SparseOperator::from_rows(space.dim(), rows, true)
}

/// Which of the two kink families the boundary field selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KinkSign {
    /// Down on the left, up on the right (`sign = +1`).
    Kink,
    /// Up on the left, down on the right (`sign = -1`).
    Antikink,
}

impl KinkSign {
    pub fn value(self) -> f64 {
        match self {
            KinkSign::Kink => 1.0,
            KinkSign::Antikink => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            KinkSign::Kink => KinkSign::Antikink,
            KinkSign::Antikink => KinkSign::Kink,
        }
    }
}

/// Boundary field `sign * strength * (S3_x - S3_y)` carried by each oriented bond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryField {
    pub strength: f64,
    pub sign: KinkSign,
}

impl BoundaryField {
    /// The field `S sqrt(1 - 1/Delta^2)` under which zero-energy kinks exist.
    pub fn kink(spin: SpinQuantum, aniso: Anisotropy, sign: KinkSign) -> Self {
        Self {
            strength: aniso.kink_field(spin),
            sign,
        }
    }

    pub fn custom(strength: f64, sign: KinkSign) -> Self {
        Self { strength, sign }
    }

    pub fn coefficient(&self) -> f64 {
        self.sign.value() * self.strength
    }
}

/// Dense `d^2 x d^2` two-site term with an arbitrary field coefficient.
pub fn bond_term(spin: SpinQuantum, aniso: Anisotropy, field: BoundaryField) -> DMatrix<C64> {
    let m = spin_matrices(spin);
    let d = spin.dim();
    let id = DMatrix::<C64>::identity(d, d);
    let s = spin.s();
    let re = |x: f64| C64::new(x, 0.0);
    let mut h = DMatrix::<C64>::identity(d * d, d * d) * re(s * s);
    h -= m.s3.kronecker(&m.s3);
    h -= (m.s1.kronecker(&m.s1) + m.s2.kronecker(&m.s2)) * re(aniso.inv_delta());
    h += (m.s3.kronecker(&id) - id.kronecker(&m.s3)) * re(field.coefficient());
    h
}

/// The two-site kink interaction `h` as a sparse operator on `C^{d^2}`.
pub fn kink_interaction(spin: SpinQuantum, aniso: Anisotropy, sign: KinkSign) -> SparseOperator {
    let h = bond_term(spin, aniso, BoundaryField::kink(spin, aniso, sign));
    SparseOperator::from_dense(&h).expect("kink interaction is Hermitian")
}

/// XXZ chain with boundary field: the sum of the bond term over the chain's bonds.
pub fn xxz_chain_hamiltonian(
    chain: &Chain,
    spin: SpinQuantum,
    aniso: Anisotropy,
    boundary: BoundaryField,
    cap: usize,
) -> Result<SparseOperator> {
    let space = FullSpace::new(chain_sites(chain)?, spin, cap)?;
    chain_on(&space, chain, spin, aniso, boundary)
}

/// Sector block of [`xxz_chain_hamiltonian`], assembled without the full space.
pub fn xxz_chain_sector(
    chain: &Chain,
    spin: SpinQuantum,
    aniso: Anisotropy,
    boundary: BoundaryField,
    basis: &SectorBasis,
) -> Result<SparseOperator> {
    if basis.n_sites() != chain_sites(chain)? || basis.spin() != spin {
        return Err(Error::SiteMismatch);
    }
    chain_on(basis, chain, spin, aniso, boundary)
}

fn chain_sites(chain: &Chain) -> Result<usize> {
    if chain.len() < 2 {
        return Err(Error::InvalidGeometry("chain needs at least two sites"));
    }
    Ok(chain.len())
}

fn chain_on<S: Space>(
    space: &S,
    chain: &Chain,
    spin: SpinQuantum,
    aniso: Anisotropy,
    boundary: BoundaryField,
) -> Result<SparseOperator> {
    let bonds: Vec<_> = chain.bonds().collect();
    assemble_bond_sum(space, &bonds, &bond_term(spin, aniso, boundary))
}

/// `sum over oriented bonds of h_{from -> to}` with the kink-sign interaction.
pub fn oriented_hamiltonian_2d(
    lattice: &PlanarLattice,
    spin: SpinQuantum,
    aniso: Anisotropy,
    cap: usize,
) -> Result<SparseOperator> {
    let space = FullSpace::new(lattice.n_sites(), spin, cap)?;
    lattice_on(&space, lattice, spin, aniso)
}

pub fn oriented_hamiltonian_sector(
    lattice: &PlanarLattice,
    spin: SpinQuantum,
    aniso: Anisotropy,
    basis: &SectorBasis,
) -> Result<SparseOperator> {
    if basis.n_sites() != lattice.n_sites() || basis.spin() != spin {
        return Err(Error::SiteMismatch);
    }
    lattice_on(basis, lattice, spin, aniso)
}

fn lattice_on<S: Space>(
    space: &S,
    lattice: &PlanarLattice,
    spin: SpinQuantum,
    aniso: Anisotropy,
) -> Result<SparseOperator> {
    let term = bond_term(
        spin,
        aniso,
        BoundaryField::kink(spin, aniso, KinkSign::Kink),
    );
    assemble_bond_sum(space, &lattice.bond_indices(), &term)
}

/// Total magnetization `S^3_tot` (diagonal).
pub fn total_s3(n_sites: usize, spin: SpinQuantum, cap: usize) -> Result<SparseOperator> {
    let space = FullSpace::new(n_sites, spin, cap)?;
    Ok(SparseOperator::diagonal(
        (0..space.dim())
            .map(|s| C64::new(state_twice_m(s as u64, n_sites, spin) as f64 / 2.0, 0.0))
            .collect(),
    ))
}

/// `exp(i theta S^3_tot)` (diagonal).
pub fn rotation_unitary(
    theta: f64,
    n_sites: usize,
    spin: SpinQuantum,
    cap: usize,
) -> Result<SparseOperator> {
    let space = FullSpace::new(n_sites, spin, cap)?;
    Ok(SparseOperator::diagonal(
        (0..space.dim())
            .map(|s| {
                let m = state_twice_m(s as u64, n_sites, spin) as f64 / 2.0;
                C64::from_polar(1.0, theta * m)
            })
            .collect(),
    ))
}

/// Global spin flip `|m> -> |-m>` on every site.
pub fn spin_flip(n_sites: usize, spin: SpinQuantum, cap: usize) -> Result<SparseOperator> {
    let space = FullSpace::new(n_sites, spin, cap)?;
    let last = space.dim() - 1;
    // Complementing every digit k -> 2S - k maps state s to (d^n - 1) - s.
    let triplets = (0..space.dim())
        .map(|s| (last - s, s, C64::new(1.0, 0.0)))
        .collect();
    SparseOperator::from_triplets(space.dim(), triplets, true)
}

/// Block of `op` on a magnetization sector, in the sector's ordering.
pub fn sector_restrict(op: &SparseOperator, basis: &SectorBasis) -> Result<SparseOperator> {
    let full = full_dimension(basis.n_sites(), basis.spin());
    if full != op.dim() as u128 {
        return Err(Error::LengthMismatch {
            expected: full as usize,
            got: op.dim(),
        });
    }
    let (n, spin, m) = (basis.n_sites(), basis.spin(), basis.twice_m());
    for (r, c, v) in op.entries() {
        let rin = state_twice_m(r as u64, n, spin) == m;
        let cin = state_twice_m(c as u64, n, spin) == m;
        if rin != cin && v.norm() > ENTRY_TOL {
            return Err(Error::NotBlockDiagonal { row: r, col: c });
        }
    }
    let mut triplets = Vec::new();
    for i in 0..basis.len() {
        for (c, v) in op.row(basis.state(i) as usize) {
            if let Some(j) = basis.index_of_state(c as u64) {
                triplets.push((i, j, v));
            }
        }
    }
    SparseOperator::from_triplets(basis.len(), triplets, op.is_hermitian())
}

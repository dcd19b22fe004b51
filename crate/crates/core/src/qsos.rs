//! Quantum solid-on-solid model: the XXZ Hamiltonian projected onto tensor products of
//! per-chain kink states.
//!
//! Height `n` on a chain labels the kink state `phi(q^n)`; its center sits at `-n`.
//! On a strip of zig-zag chains, chain `u` at height configuration `(n_u)` carries
//! `chi(e^{i theta} q^{n_u + x + y})` on each of its sites `(x, y)`. By default every
//! site factor is normalized, which leaves the spanned space unchanged and keeps the
//! Gram matrix far better conditioned than the raw family.

use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::lattice::{diagonal_height, diagonal_strip, Chain, LatticeSite, PlanarLattice};
use crate::operators::{bond_term, full_dimension, BoundaryField, KinkSign, SparseOperator};
use crate::spectral::{kernel_from_eigenvalues, KernelInfo};
use crate::spin::{Anisotropy, SpinQuantum};
use crate::states::{chi, kink_state, overlap, ProductState};
use crate::{Error, Result, C64};

/// Gram condition numbers above this are flagged.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// Full Hilbert-space dimension up to which [`coupled_qsos`] projects by sparse apply.
pub const SPARSE_ROUTE_LIMIT: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HeightWindow {
    n_min: i64,
    n_max: i64,
}

impl HeightWindow {
    pub fn new(n_min: i64, n_max: i64) -> Result<Self> {
        if n_min >= n_max {
            return Err(Error::InvalidWindow {
                min: n_min,
                max: n_max,
                reason: "window needs at least two heights",
            });
        }
        Ok(Self { n_min, n_max })
    }

    /// `-r..=r`.
    pub fn symmetric(r: i64) -> Result<Self> {
        Self::new(-r, r)
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn size(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn heights(&self) -> impl Iterator<Item = i64> + Clone {
        self.n_min..=self.n_max
    }

    pub fn contains(&self, n: i64) -> bool {
        (self.n_min..=self.n_max).contains(&n)
    }
}

/// `phi(q^n)` on a chain.
pub fn height_state(
    chain: &Chain,
    spin: SpinQuantum,
    aniso: Anisotropy,
    n: i64,
) -> Result<ProductState> {
    if aniso.delta() <= 1.0 {
        return Err(Error::RequiresAnisotropic(aniso.delta()));
    }
    let z = C64::new(libm::pow(aniso.q(), n as f64), 0.0);
    Ok(kink_state(z, chain, spin, aniso))
}

/// `phi(q^n)` for each height of the window, in ascending order of `n`.
pub fn height_basis(
    chain: &Chain,
    spin: SpinQuantum,
    aniso: Anisotropy,
    window: HeightWindow,
) -> Result<Vec<ProductState>> {
    window
        .heights()
        .map(|n| height_state(chain, spin, aniso, n))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub matrix: DMatrix<C64>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

impl GramMatrix {
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        let eig = SymmetricEigen::new(matrix.clone());
        let min_eigenvalue = eig.eigenvalues.min();
        let max_eigenvalue = eig.eigenvalues.max();
        if min_eigenvalue.is_nan() || min_eigenvalue <= 0.0 {
            return Err(Error::SingularGram(min_eigenvalue));
        }
        Ok(Self {
            matrix,
            min_eigenvalue,
            max_eigenvalue,
        })
    }

    pub fn condition(&self) -> f64 {
        self.max_eigenvalue / self.min_eigenvalue
    }

    pub fn ill_conditioned(&self) -> bool {
        self.condition() > GRAM_CONDITION_LIMIT
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `G[a][b] = <basis_a, basis_b>` from factorized overlaps.
pub fn gram_matrix(basis: &[ProductState]) -> Result<GramMatrix> {
    if basis.is_empty() {
        return Err(Error::InvalidGeometry("empty basis"));
    }
    let k = basis.len();
    let mut g = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let v = overlap(&basis[a], &basis[b])?;
            g[(a, b)] = v;
            g[(b, a)] = v.conj();
        }
    }
    GramMatrix::from_matrix(g)
}

/// [`gram_matrix`] computed from fully expanded vectors.
pub fn gram_matrix_dense(basis: &[ProductState], cap: usize) -> Result<GramMatrix> {
    if basis.is_empty() {
        return Err(Error::InvalidGeometry("empty basis"));
    }
    let vectors = expand(basis, cap)?;
    let k = basis.len();
    let g = DMatrix::from_fn(k, k, |a, b| {
        vectors[a]
            .iter()
            .zip(&vectors[b])
            .map(|(x, y)| x.conj() * y)
            .sum()
    });
    GramMatrix::from_matrix(g)
}

fn expand(basis: &[ProductState], cap: usize) -> Result<Vec<Vec<C64>>> {
    let sites = basis[0].sites();
    if basis.iter().any(|b| b.sites() != sites) {
        return Err(Error::SiteMismatch);
    }
    basis.iter().map(|b| b.to_vector(cap)).collect()
}

/// `M[a][b] = <basis_a, H basis_b>` by expanding the basis and applying `H`.
pub fn projected_matrix(
    basis: &[ProductState],
    hamiltonian: &SparseOperator,
    cap: usize,
) -> Result<DMatrix<C64>> {
    if basis.is_empty() {
        return Err(Error::InvalidGeometry("empty basis"));
    }
    let vectors = expand(basis, cap)?;
    let images = vectors
        .iter()
        .map(|v| hamiltonian.apply(v))
        .collect::<Result<Vec<_>>>()?;
    let k = basis.len();
    Ok(DMatrix::from_fn(k, k, |a, b| {
        vectors[a]
            .iter()
            .zip(&images[b])
            .map(|(x, y)| x.conj() * y)
            .sum()
    }))
}

/// `M[a][b]` for the oriented lattice Hamiltonian, evaluated bond by bond on the
/// factorized states without expanding them.
///
/// Basis states must list the lattice sites in lattice order.
pub fn projected_matrix_local(
    basis: &[ProductState],
    lattice: &PlanarLattice,
    spin: SpinQuantum,
    aniso: Anisotropy,
) -> Result<DMatrix<C64>> {
    if basis
        .iter()
        .any(|b| b.sites() != lattice.sites() || b.spin() != spin)
    {
        return Err(Error::SiteMismatch);
    }
    let term = bond_term(
        spin,
        aniso,
        BoundaryField::kink(spin, aniso, KinkSign::Kink),
    );
    let bonds = lattice.bond_indices();
    let d = spin.dim();
    let k = basis.len();
    let n = lattice.n_sites();
    let mut m = DMatrix::zeros(k, k);
    let mut site_overlaps = alloc::vec![C64::new(0.0, 0.0); n];
    for a in 0..k {
        for b in a..k {
            let fa = basis[a].factors();
            let fb = basis[b].factors();
            for (s, o) in site_overlaps.iter_mut().enumerate() {
                *o = fa[s].inner_direct(&fb[s]);
            }
            let mut total = C64::new(0.0, 0.0);
            for &(i, j) in &bonds {
                let rest: C64 = site_overlaps
                    .iter()
                    .enumerate()
                    .filter(|&(s, _)| s != i && s != j)
                    .map(|(_, o)| *o)
                    .product();
                let (ai, aj) = (fa[i].coeffs(), fa[j].coeffs());
                let (bi, bj) = (fb[i].coeffs(), fb[j].coeffs());
                let mut local = C64::new(0.0, 0.0);
                for r in 0..d * d {
                    let left = (ai[r / d] * aj[r % d]).conj();
                    for c in 0..d * d {
                        local += left * term[(r, c)] * bi[c / d] * bj[c % d];
                    }
                }
                total += rest * local;
            }
            m[(a, b)] = total;
            m[(b, a)] = total.conj();
        }
    }
    Ok(m)
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint())
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}

/// `G^{1/2}` and `G^{-1/2}` from the Hermitian eigendecomposition of `G`.
pub fn gram_roots(gram: &GramMatrix) -> (DMatrix<C64>, DMatrix<C64>) {
    let eig = SymmetricEigen::new(gram.matrix.clone());
    let v = &eig.eigenvectors;
    let root = |p: f64| {
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|w| C64::new(libm::pow(w, p), 0.0)));
        v * d * v.adjoint()
    };
    (root(0.5), root(-0.5))
}

/// QSOS geometry: `width` zig-zag chains covering `chain_length` heights each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QsosConfig {
    pub width: usize,
    pub chain_length: usize,
    pub spin: SpinQuantum,
    pub aniso: Anisotropy,
    pub window: HeightWindow,
    /// Common phase `theta` of every kink parameter.
    pub phase: f64,
    pub normalize: bool,
    pub route: ProjectionRoute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionRoute {
    /// Sparse apply when the full space fits [`SPARSE_ROUTE_LIMIT`], bond-local otherwise.
    Auto,
    Sparse,
    Local,
}

impl QsosConfig {
    pub fn new(
        width: usize,
        chain_length: usize,
        spin: SpinQuantum,
        aniso: Anisotropy,
        window: HeightWindow,
    ) -> Self {
        Self {
            width,
            chain_length,
            spin,
            aniso,
            window,
            phase: 0.0,
            normalize: true,
            route: ProjectionRoute::Auto,
        }
    }
}

/// Projected model over all height configurations `(n_u)` in `window^width`.
#[derive(Debug, Clone, PartialEq)]
pub struct QsosSystem {
    pub config: QsosConfig,
    pub lattice: PlanarLattice,
    /// Height configuration of each basis state, chain `u = 0..width`, lexicographic.
    pub labels: Vec<Vec<i64>>,
    pub basis: Vec<ProductState>,
    pub gram: GramMatrix,
    pub m_raw: DMatrix<C64>,
    pub h_eff: DMatrix<C64>,
    pub g_sqrt: DMatrix<C64>,
    pub g_inv_sqrt: DMatrix<C64>,
    /// Largest `|A - A^dagger|` entry of `M_raw` before symmetrization.
    pub m_raw_hermitian_defect: f64,
}

fn configurations(window: HeightWindow, width: usize) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = alloc::vec![Vec::new()];
    for _ in 0..width {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                window.heights().map(move |n| {
                    let mut next = prefix.clone();
                    next.push(n);
                    next
                })
            })
            .collect();
    }
    out
}

/// Chain of a strip site.
fn chain_of(site: LatticeSite) -> usize {
    (site.x - site.y).div_euclid(2) as usize
}

fn configuration_state(
    lattice: &PlanarLattice,
    heights: &[i64],
    config: &QsosConfig,
) -> Result<ProductState> {
    let q = config.aniso.q();
    let factors = lattice
        .sites()
        .iter()
        .map(|&s| {
            let h = heights[chain_of(s)] + diagonal_height(s);
            let f = chi(
                C64::from_polar(libm::pow(q, h as f64), config.phase),
                config.spin,
            );
            if config.normalize {
                f.scaled(1.0 / libm::sqrt(f.norm_sqr()))
            } else {
                f
            }
        })
        .collect();
    ProductState::new(lattice.sites().to_vec(), factors)
}

/// The strip of `config.width` chains with its tensor-product height basis and the
/// projection of the oriented Hamiltonian onto it.
pub fn coupled_qsos(config: QsosConfig) -> Result<QsosSystem> {
    if !(1..=3).contains(&config.width) {
        return Err(Error::InvalidGeometry("QSOS width must be 1, 2 or 3"));
    }
    if config.chain_length < 2 {
        return Err(Error::InvalidGeometry("chains need at least two sites"));
    }
    if config.aniso.delta() <= 1.0 {
        return Err(Error::RequiresAnisotropic(config.aniso.delta()));
    }
    let lattice = diagonal_strip(config.width, config.chain_length)?;
    let labels = configurations(config.window, config.width);
    let basis = labels
        .iter()
        .map(|l| configuration_state(&lattice, l, &config))
        .collect::<Result<Vec<_>>>()?;
    let full = full_dimension(lattice.n_sites(), config.spin);
    let sparse = match config.route {
        ProjectionRoute::Auto => full <= SPARSE_ROUTE_LIMIT as u128,
        ProjectionRoute::Sparse => true,
        ProjectionRoute::Local => false,
    };
    let m_raw = if sparse {
        let h = crate::operators::oriented_hamiltonian_2d(
            &lattice,
            config.spin,
            config.aniso,
            crate::DEFAULT_DIM_CAP,
        )?;
        projected_matrix(&basis, &h, crate::DEFAULT_DIM_CAP)?
    } else {
        projected_matrix_local(&basis, &lattice, config.spin, config.aniso)?
    };
    let gram = gram_matrix(&basis)?;
    QsosSystem::assemble(config, lattice, labels, basis, gram, m_raw)
}

impl QsosSystem {
    fn assemble(
        config: QsosConfig,
        lattice: PlanarLattice,
        labels: Vec<Vec<i64>>,
        basis: Vec<ProductState>,
        gram: GramMatrix,
        m_raw: DMatrix<C64>,
    ) -> Result<Self> {
        let m_raw_hermitian_defect = hermitian_defect(&m_raw);
        let m_raw = hermitian_part(&m_raw);
        let (g_sqrt, g_inv_sqrt) = gram_roots(&gram);
        let h_eff = hermitian_part(&(&g_inv_sqrt * &m_raw * &g_inv_sqrt));
        Ok(Self {
            config,
            lattice,
            labels,
            basis,
            gram,
            m_raw,
            h_eff,
            g_sqrt,
            g_inv_sqrt,
            m_raw_hermitian_defect,
        })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, heights: &[i64]) -> Option<usize> {
        self.labels.iter().position(|l| l == heights)
    }

    /// Ascending eigenvalues of `H_eff`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = SymmetricEigen::new(self.h_eff.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.eigenvalues()[0] >= -tol
    }

    pub fn kernel(&self, tol: f64) -> Result<KernelInfo> {
        kernel_from_eigenvalues(&self.eigenvalues(), tol)
    }

    /// Orthonormal (Lowdin) coordinates `G^{-1/2} <basis, state>` of the projection of
    /// `state` onto the QSOS space.
    pub fn coordinates_of(&self, state: &ProductState) -> Result<Vec<C64>> {
        let b = nalgebra::DVector::from_iterator(
            self.dim(),
            self.basis
                .iter()
                .map(|v| overlap(v, state))
                .collect::<Result<Vec<_>>>()?,
        );
        Ok((&self.g_inv_sqrt * b).iter().copied().collect())
    }

    /// `|H_eff v|` for a coordinate vector.
    pub fn residual_norm(&self, coords: &[C64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(coords);
        (&self.h_eff * v).norm()
    }

    /// Average weight that the kernel vectors, written in the original non-orthogonal
    /// basis, put on aligned configurations (equal height on every chain).
    pub fn aligned_kernel_weight(&self, tol: f64) -> f64 {
        let eig = SymmetricEigen::new(self.h_eff.clone());
        let mut total = 0.0;
        let mut count = 0;
        for (j, &w) in eig.eigenvalues.iter().enumerate() {
            if w >= tol {
                continue;
            }
            let alpha = &self.g_inv_sqrt * eig.eigenvectors.column(j);
            let all: f64 = alpha.iter().map(|c| c.norm_sqr()).sum();
            let aligned: f64 = self
                .labels
                .iter()
                .zip(alpha.iter())
                .filter(|(l, _)| l.iter().all(|&n| n == l[0]))
                .map(|(_, c)| c.norm_sqr())
                .sum();
            total += aligned / all;
            count += 1;
        }
        if count == 0 {
            0.0
        } else {
            total / count as f64
        }
    }
}

/// Largest change of matrix entries under a relabeling of height configurations,
/// over all pairs whose images stay inside the window.
pub fn relabeling_defect(
    system: &QsosSystem,
    matrix: &DMatrix<C64>,
    map: impl Fn(&[i64]) -> Vec<i64>,
) -> f64 {
    let images: Vec<Option<usize>> = system
        .labels
        .iter()
        .map(|l| system.index_of(&map(l)))
        .collect();
    let mut defect: f64 = 0.0;
    for (a, ia) in images.iter().enumerate() {
        for (b, ib) in images.iter().enumerate() {
            if let (Some(ia), Some(ib)) = (ia, ib) {
                defect = defect.max((matrix[(*ia, *ib)] - matrix[(a, b)]).norm());
            }
        }
    }
    defect
}

/// Departure from global shift invariance on a finite window and strip.
///
/// Raising every height by one moves each site onto the other sublattice of its chain,
/// which swaps the roles of the two neighbouring chains; the lattice symmetry that
/// survives is the shift composed with reversing the chain order. The double shift is a
/// symmetry on its own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftDefect {
    /// Shift composed with chain reversal, max over `G` and `M_raw`.
    pub shift: f64,
    /// Double shift, max over `G` and `M_raw`.
    pub double_shift: f64,
    /// Plain shift on `M_raw`.
    pub bare_shift: f64,
    /// Shift composed with chain reversal on `H_eff`.
    pub lowdin: f64,
}

pub fn shift_commutator_check(system: &QsosSystem) -> Result<ShiftDefect> {
    let window = system.config.window;
    if window.size() < 3 {
        return Err(Error::InvalidWindow {
            min: window.n_min(),
            max: window.n_max(),
            reason: "shift check needs at least three heights",
        });
    }
    let shift_rev = |l: &[i64]| l.iter().rev().map(|n| n + 1).collect::<Vec<_>>();
    let double = |l: &[i64]| l.iter().map(|n| n + 2).collect::<Vec<_>>();
    let bare = |l: &[i64]| l.iter().map(|n| n + 1).collect::<Vec<_>>();
    let on_both = |f: &dyn Fn(&[i64]) -> Vec<i64>| {
        relabeling_defect(system, &system.gram.matrix, f).max(relabeling_defect(
            system,
            &system.m_raw,
            f,
        ))
    };
    Ok(ShiftDefect {
        shift: on_both(&shift_rev),
        double_shift: on_both(&double),
        bare_shift: relabeling_defect(system, &system.m_raw, bare),
        lowdin: relabeling_defect(system, &system.h_eff, shift_rev),
    })
}

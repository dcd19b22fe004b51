//! Eigensolvers, kernel counting and finite-size gap scans.
//!
//! The iterative solver is Lanczos with full reorthogonalization and explicit locking:
//! each run finds the lowest eigenpair orthogonal to everything already locked, so
//! degenerate levels are resolved one copy at a time.

use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::{build_rectangle, Chain};
use crate::operators::{
    oriented_hamiltonian_sector, xxz_chain_sector, BoundaryField, SparseOperator,
};
use crate::spin::{sector_basis, Anisotropy, SpinQuantum};
use crate::{Error, Result, C64};

/// Largest dimension handed to the dense solver by default.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Eigenvalues below this count as zero energy.
pub const KERNEL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `j` is the eigenvector of `values[j]`.
    pub vectors: DMatrix<C64>,
}

impl DenseSpectrum {
    pub fn vector(&self, j: usize) -> Vec<C64> {
        self.vectors.column(j).iter().copied().collect()
    }
}

pub fn dense_spectrum(op: &SparseOperator, cap: usize) -> Result<DenseSpectrum> {
    if op.dim() > cap {
        return Err(Error::DenseCap { dim: op.dim(), cap });
    }
    let defect = op.hermitian_defect();
    if defect > 1e-13 {
        return Err(Error::NotHermitian(defect));
    }
    let eig = SymmetricEigen::new(op.to_dense());
    let mut order: Vec<usize> = (0..op.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = DMatrix::from_fn(op.dim(), op.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(DenseSpectrum { values, vectors })
}

/// Ascending eigenvalues only.
pub fn dense_eigenvalues(op: &SparseOperator) -> Result<Vec<f64>> {
    dense_spectrum(op, DEFAULT_DENSE_CAP).map(|s| s.values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosConfig {
    /// Target residual `||A x - theta x||`.
    pub tol: f64,
    /// Krylov dimension per run before an explicit restart.
    pub max_krylov: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_krylov: 300,
            max_restarts: 20,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<C64>,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LanczosOutcome {
    pub pairs: Vec<EigenPair>,
    /// Matrix-vector products performed.
    pub iterations: usize,
}

impl LanczosOutcome {
    pub fn converged(&self) -> bool {
        self.pairs.iter().all(|p| p.converged)
    }

    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    libm::sqrt(a.iter().map(|x| x.norm_sqr()).sum())
}

fn axpy(y: &mut [C64], alpha: C64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn orthogonalize<'a>(w: &mut [C64], against: impl Iterator<Item = &'a Vec<C64>> + Clone) {
    for _ in 0..2 {
        for v in against.clone() {
            let c = dot(v, w);
            axpy(w, -c, v);
        }
    }
}

struct Locker<'a> {
    op: &'a SparseOperator,
    cfg: LanczosConfig,
    rng: ChaCha8Rng,
    locked: Vec<EigenPair>,
    iterations: usize,
}

impl<'a> Locker<'a> {
    fn new(op: &'a SparseOperator, cfg: LanczosConfig) -> Result<Self> {
        let defect = op.hermitian_defect();
        if defect > 1e-13 {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self {
            op,
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            locked: Vec::new(),
            iterations: 0,
        })
    }

    fn random_start(&mut self) -> Option<Vec<C64>> {
        for _ in 0..8 {
            let mut v: Vec<C64> = (0..self.op.dim())
                .map(|_| {
                    C64::new(
                        self.rng.random::<f64>() - 0.5,
                        self.rng.random::<f64>() - 0.5,
                    )
                })
                .collect();
            orthogonalize(&mut v, self.locked.iter().map(|p| &p.vector));
            let n = norm(&v);
            if n > 1e-8 {
                v.iter_mut().for_each(|x| *x /= n);
                return Some(v);
            }
        }
        None
    }

    /// Finds and locks the lowest eigenpair orthogonal to the locked ones.
    fn next(&mut self) -> Result<Option<&EigenPair>> {
        let free = self.op.dim() - self.locked.len();
        if free == 0 {
            return Ok(None);
        }
        let Some(mut start) = self.random_start() else {
            return Ok(None);
        };
        let mut best = None;
        for _ in 0..=self.cfg.max_restarts {
            let pair = self.run(&start, free.min(self.cfg.max_krylov))?;
            let done = pair.converged;
            start = pair.vector.clone();
            best = Some(pair);
            if done {
                break;
            }
        }
        self.locked.push(best.expect("at least one run"));
        Ok(self.locked.last())
    }

    fn run(&mut self, start: &[C64], m_max: usize) -> Result<EigenPair> {
        let op = self.op;
        let mut basis: Vec<Vec<C64>> = alloc::vec![start.to_vec()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let ritz = loop {
            let j = basis.len() - 1;
            let mut w = op.apply(&basis[j])?;
            self.iterations += 1;
            let alpha = dot(&basis[j], &w).re;
            axpy(&mut w, C64::new(-alpha, 0.0), &basis[j]);
            if j > 0 {
                axpy(&mut w, C64::new(-betas[j - 1], 0.0), &basis[j - 1]);
            }
            orthogonalize(
                &mut w,
                self.locked.iter().map(|p| &p.vector).chain(basis.iter()),
            );
            let beta = norm(&w);
            alphas.push(alpha);
            let size = alphas.len();
            let exhausted = beta < 1e-12 || size == m_max;
            if exhausted || size.is_multiple_of(5) {
                let (theta, y) = lowest_tridiagonal(&alphas, &betas);
                let estimate = beta * y[size - 1].abs();
                if exhausted || estimate < 0.1 * self.cfg.tol {
                    break (theta, y);
                }
            }
            w.iter_mut().for_each(|x| *x /= beta);
            betas.push(beta);
            basis.push(w);
        };
        let (_, y) = ritz;
        let mut x = alloc::vec![C64::new(0.0, 0.0); op.dim()];
        for (coef, v) in y.iter().zip(&basis) {
            axpy(&mut x, C64::new(*coef, 0.0), v);
        }
        orthogonalize(&mut x, self.locked.iter().map(|p| &p.vector));
        let n = norm(&x);
        x.iter_mut().for_each(|v| *v /= n);
        let ax = op.apply(&x)?;
        let value = dot(&x, &ax).re;
        let mut r = ax;
        axpy(&mut r, C64::new(-value, 0.0), &x);
        let residual = norm(&r);
        Ok(EigenPair {
            value,
            vector: x,
            residual,
            converged: residual < self.cfg.tol,
        })
    }

    fn finish(self) -> LanczosOutcome {
        LanczosOutcome {
            pairs: self.locked,
            iterations: self.iterations,
        }
    }
}

fn lowest_tridiagonal(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let n = alphas.len();
    let t = DMatrix::<f64>::from_fn(n, n, |r, c| {
        if r == c {
            alphas[r]
        } else if r + 1 == c {
            betas[r]
        } else if c + 1 == r {
            betas[c]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let j = (0..n)
        .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .expect("nonempty");
    (
        eig.eigenvalues[j],
        eig.eigenvectors.column(j).iter().copied().collect(),
    )
}

/// Lowest `k` eigenpairs of a Hermitian operator, ascending.
///
/// Pairs that miss the residual target are returned with `converged = false`.
pub fn extremal_eigs(op: &SparseOperator, k: usize, cfg: LanczosConfig) -> Result<LanczosOutcome> {
    let mut locker = Locker::new(op, cfg)?;
    for _ in 0..k {
        if locker.next()?.is_none() {
            break;
        }
    }
    let mut out = locker.finish();
    out.pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(out)
}

/// Eigenpairs from the bottom up to and including the first one at or above `kernel_tol`.
pub fn lowest_through_gap(
    op: &SparseOperator,
    kernel_tol: f64,
    cfg: LanczosConfig,
) -> Result<LanczosOutcome> {
    let mut locker = Locker::new(op, cfg)?;
    while let Some(pair) = locker.next()? {
        if pair.value >= kernel_tol {
            break;
        }
    }
    let mut out = locker.finish();
    out.pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelInfo {
    pub dim: usize,
    /// Smallest eigenvalue at or above the threshold, if any.
    pub next: Option<f64>,
}

impl KernelInfo {
    /// `next / tol`; infinite when the kernel is the whole space.
    pub fn margin_ratio(&self, tol: f64) -> f64 {
        self.next.map_or(f64::INFINITY, |n| n / tol)
    }
}

/// Counts ascending `values` below `tol`, requiring a 10x margin to the next one.
pub fn kernel_from_eigenvalues(values: &[f64], tol: f64) -> Result<KernelInfo> {
    let dim = values.iter().filter(|&&v| v < tol).count();
    let next = values
        .iter()
        .copied()
        .filter(|&v| v >= tol)
        .reduce(f64::min);
    if let Some(n) = next {
        if n < 10.0 * tol {
            return Err(Error::AmbiguousKernel {
                below: dim,
                tol,
                next: n,
            });
        }
    }
    Ok(KernelInfo { dim, next })
}

/// Dimension of the (numerical) kernel of a PSD operator, via the dense spectrum.
pub fn kernel_dimension(op: &SparseOperator, tol: f64) -> Result<KernelInfo> {
    kernel_from_eigenvalues(&dense_eigenvalues(op)?, tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Solver {
    Dense,
    Lanczos(LanczosConfig),
}

/// Spectrum summary of one sector block.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub twice_m: i64,
    pub dim: usize,
    pub ground_energy: f64,
    pub kernel_dim: usize,
    /// First eigenvalue above the kernel; `None` when the kernel fills the block.
    pub gap: Option<f64>,
    /// No 10x margin between the threshold and the gap.
    pub ambiguous: bool,
    pub converged: bool,
    pub iterations: usize,
    pub max_residual: f64,
}

pub fn sector_report(
    op: &SparseOperator,
    twice_m: i64,
    solver: Solver,
    kernel_tol: f64,
) -> Result<SpectralReport> {
    let (values, converged, iterations, max_residual) = match solver {
        Solver::Dense => (dense_eigenvalues(op)?, true, 0, 0.0),
        Solver::Lanczos(cfg) => {
            let out = lowest_through_gap(op, kernel_tol, cfg)?;
            (
                out.values(),
                out.converged(),
                out.iterations,
                out.max_residual(),
            )
        }
    };
    let kernel_dim = values.iter().filter(|&&v| v < kernel_tol).count();
    let gap = values.iter().copied().find(|&v| v >= kernel_tol);
    Ok(SpectralReport {
        twice_m,
        dim: op.dim(),
        ground_energy: values[0],
        kernel_dim,
        gap,
        ambiguous: gap.is_some_and(|g| g < 10.0 * kernel_tol),
        converged,
        iterations,
        max_residual,
    })
}

/// Sequence of systems indexed by a linear size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapFamily {
    /// Chains of `size` sites.
    Chain {
        spin: SpinQuantum,
        aniso: Anisotropy,
        field: BoundaryField,
    },
    /// `size x height` rectangles with the oriented kink Hamiltonian.
    Strip {
        height: usize,
        spin: SpinQuantum,
        aniso: Anisotropy,
    },
}

impl GapFamily {
    pub fn spin(&self) -> SpinQuantum {
        match *self {
            GapFamily::Chain { spin, .. } | GapFamily::Strip { spin, .. } => spin,
        }
    }

    pub fn n_sites(&self, size: usize) -> usize {
        match *self {
            GapFamily::Chain { .. } => size,
            GapFamily::Strip { height, .. } => size * height,
        }
    }

    pub fn sector_block(&self, size: usize, twice_m: i64) -> Result<SparseOperator> {
        let basis = sector_basis(self.n_sites(size), self.spin(), twice_m)?;
        match *self {
            GapFamily::Chain { spin, aniso, field } => {
                xxz_chain_sector(&Chain::centered(size)?, spin, aniso, field, &basis)
            }
            GapFamily::Strip {
                height,
                spin,
                aniso,
            } => oriented_hamiltonian_sector(&build_rectangle(size, height)?, spin, aniso, &basis),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorSelector {
    /// `M = 0`, or `M = 1/2` for a half-odd total spin.
    Central,
    /// One quantum below full polarization, `2M = 2SN - 2`.
    OneMagnon,
    Fixed(i64),
    /// Every sector except the two fully polarized ones.
    AllInterior,
}

impl SectorSelector {
    pub fn sectors(&self, n_sites: usize, spin: SpinQuantum) -> Vec<i64> {
        let top = n_sites as i64 * i64::from(spin.twice_s());
        match *self {
            SectorSelector::Central => alloc::vec![top.rem_euclid(2)],
            SectorSelector::OneMagnon => alloc::vec![top - 2],
            SectorSelector::Fixed(m) => alloc::vec![m],
            SectorSelector::AllInterior => (1..top)
                .map(|j| top - 2 * j)
                .filter(|m| m.abs() < top)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub size: usize,
    pub report: SpectralReport,
}

pub fn gap_scan(
    family: &GapFamily,
    sizes: &[usize],
    selector: SectorSelector,
    solver: Solver,
    kernel_tol: f64,
) -> Result<Vec<GapRow>> {
    let mut rows = Vec::new();
    for &size in sizes {
        for twice_m in selector.sectors(family.n_sites(size), family.spin()) {
            let block = family.sector_block(size, twice_m)?;
            rows.push(GapRow {
                size,
                report: sector_report(&block, twice_m, solver, kernel_tol)?,
            });
        }
    }
    Ok(rows)
}

/// Smallest gap over the scanned sectors of each size, in scan order.
pub fn min_gap_per_size(rows: &[GapRow]) -> Vec<(usize, Option<f64>)> {
    let mut out: Vec<(usize, Option<f64>)> = Vec::new();
    for row in rows {
        let gap = row.report.gap;
        match out.last_mut() {
            Some((size, best)) if *size == row.size => {
                *best = match (*best, gap) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
            }
            _ => out.push((row.size, gap)),
        }
    }
    out
}

//! Chains, planar lattices with oriented bonds, and zig-zag chain decompositions.
//!
//! Bonds of the square lattice point right or up, so every bond raises the diagonal
//! height `x + y` by one. Along a zig-zag chain (a right/up staircase) the bond
//! orientation is the left-to-right orientation of a 1D chain whose site labels are
//! the diagonal heights.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::{Error, Result};

/// A contiguous interval of integer site labels `first, first+1, ..., first+length-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Chain {
    first: i64,
    length: usize,
}

impl Chain {
    pub fn new(first: i64, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidGeometry("chain length must be positive"));
        }
        Ok(Self { first, length })
    }

    /// Chain of `length` sites labelled around zero, `-(length-1)/2 ..= length/2`.
    pub fn centered(length: usize) -> Result<Self> {
        Self::new(-(length.saturating_sub(1) as i64 / 2), length)
    }

    /// The interval `[-l, l]`.
    pub fn symmetric(l: usize) -> Self {
        Self {
            first: -(l as i64),
            length: 2 * l + 1,
        }
    }

    pub fn first(&self) -> i64 {
        self.first
    }

    pub fn last(&self) -> i64 {
        self.first + self.length as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn labels(&self) -> impl Iterator<Item = i64> + Clone {
        self.first..=self.last()
    }

    /// Site label of the `i`-th site.
    pub fn label(&self, i: usize) -> i64 {
        self.first + i as i64
    }

    /// Nearest-neighbour bonds `(i, i+1)` as site ordinals, oriented left to right.
    pub fn bonds(&self) -> impl Iterator<Item = (usize, usize)> {
        (1..self.length).map(|i| (i - 1, i))
    }
}

/// A site of the square lattice. 1D chains use `y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeSite {
    pub x: i64,
    pub y: i64,
}

impl LatticeSite {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    /// Index of the zig-zag chain through this site: chain `u` holds the sites with
    /// `x - y` in `{2u, 2u + 1}`.
    pub fn chain_index(&self) -> i64 {
        (self.x - self.y).div_euclid(2)
    }
}

/// Signed diagonal coordinate `x + y`.
pub fn diagonal_height(site: LatticeSite) -> i64 {
    site.x + site.y
}

/// Nearest-neighbour bond, oriented towards increasing diagonal height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedBond {
    pub from: LatticeSite,
    pub to: LatticeSite,
}

impl OrientedBond {
    pub fn is_horizontal(&self) -> bool {
        self.to.y == self.from.y
    }
}

/// A finite set of square-lattice sites with all nearest-neighbour bonds between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarLattice {
    /// Sorted by `(x, y)`; the position in this list is the tensor-factor ordinal.
    sites: Vec<LatticeSite>,
    bonds: Vec<OrientedBond>,
}

impl PlanarLattice {
    /// Builds the lattice induced by `sites`; duplicates are removed.
    pub fn from_sites(mut sites: Vec<LatticeSite>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidGeometry("lattice has no sites"));
        }
        sites.sort_unstable();
        sites.dedup();
        let mut bonds = Vec::new();
        for &s in &sites {
            for t in [
                LatticeSite::new(s.x + 1, s.y),
                LatticeSite::new(s.x, s.y + 1),
            ] {
                if sites.binary_search(&t).is_ok() {
                    bonds.push(OrientedBond { from: s, to: t });
                }
            }
        }
        Ok(Self { sites, bonds })
    }

    pub fn sites(&self) -> &[LatticeSite] {
        &self.sites
    }

    pub fn bonds(&self) -> &[OrientedBond] {
        &self.bonds
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn index_of(&self, site: LatticeSite) -> Option<usize> {
        self.sites.binary_search(&site).ok()
    }

    /// Bonds as `(from, to)` site ordinals.
    pub fn bond_indices(&self) -> Vec<(usize, usize)> {
        self.bonds
            .iter()
            .map(|b| (self.ordinal(b.from), self.ordinal(b.to)))
            .collect()
    }

    fn ordinal(&self, site: LatticeSite) -> usize {
        self.index_of(site)
            .expect("bond endpoint belongs to the lattice")
    }

    pub fn heights(&self) -> impl Iterator<Item = i64> + '_ {
        self.sites.iter().map(|&s| diagonal_height(s))
    }

    /// Per-site coefficient of the boundary field `S^3_x` produced by summing the
    /// antisymmetric field term `S^3_from - S^3_to` over all bonds: out-degree minus
    /// in-degree.
    pub fn net_site_fields(&self) -> Vec<i64> {
        let mut net = alloc::vec![0i64; self.sites.len()];
        for b in &self.bonds {
            net[self.ordinal(b.from)] += 1;
            net[self.ordinal(b.to)] -= 1;
        }
        net
    }

    /// Whether all four lattice neighbours of the site are in the lattice.
    pub fn is_interior(&self, site: LatticeSite) -> bool {
        [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().all(|&(dx, dy)| {
            self.index_of(LatticeSite::new(site.x + dx, site.y + dy))
                .is_some()
        })
    }

    /// Splits the lattice into zig-zag chains and the bonds that couple them.
    pub fn zigzag(&self) -> ZigZagDecomposition {
        let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, s) in self.sites.iter().enumerate() {
            groups.entry(s.chain_index()).or_default().push(i);
        }
        let chains = groups
            .into_iter()
            .map(|(index, mut members)| {
                members.sort_by_key(|&i| diagonal_height(self.sites[i]));
                ZigZagChain {
                    index,
                    sites: members.into_iter().map(|i| self.sites[i]).collect(),
                }
            })
            .collect();
        let (in_chain_bonds, interchain_bonds) = self
            .bonds
            .iter()
            .partition(|b| b.from.chain_index() == b.to.chain_index());
        ZigZagDecomposition {
            chains,
            in_chain_bonds,
            interchain_bonds,
        }
    }
}

/// `width x height` rectangle with corner at the origin and open boundaries.
pub fn build_rectangle(width: usize, height: usize) -> Result<PlanarLattice> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidGeometry("rectangle sides must be positive"));
    }
    let sites = (0..width as i64)
        .flat_map(|x| (0..height as i64).map(move |y| LatticeSite::new(x, y)))
        .collect();
    PlanarLattice::from_sites(sites)
}

/// `n_chains` complete adjacent zig-zag chains `u = 0..n_chains`, each covering the
/// diagonal heights of `Chain::centered(chain_length)`.
pub fn diagonal_strip(n_chains: usize, chain_length: usize) -> Result<PlanarLattice> {
    if n_chains == 0 {
        return Err(Error::InvalidGeometry("strip needs at least one chain"));
    }
    let heights = Chain::centered(chain_length)?;
    let mut sites = Vec::with_capacity(n_chains * chain_length);
    for u in 0..n_chains as i64 {
        for h in heights.labels() {
            let diff = 2 * u + h.rem_euclid(2);
            sites.push(LatticeSite::new((h + diff) / 2, (h - diff) / 2));
        }
    }
    PlanarLattice::from_sites(sites)
}

/// One staircase of alternating horizontal and vertical bonds, ordered by height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZigZagChain {
    pub index: i64,
    pub sites: Vec<LatticeSite>,
}

impl ZigZagChain {
    /// The 1D chain of diagonal heights visited by this staircase.
    pub fn height_chain(&self) -> Chain {
        Chain {
            first: diagonal_height(self.sites[0]),
            length: self.sites.len(),
        }
    }

    /// Whether consecutive sites are joined by unit right/up steps that alternate
    /// between horizontal and vertical.
    pub fn is_staircase(&self) -> bool {
        let steps: Vec<(i64, i64)> = self
            .sites
            .windows(2)
            .map(|w| (w[1].x - w[0].x, w[1].y - w[0].y))
            .collect();
        steps.iter().all(|&s| s == (1, 0) || s == (0, 1)) && steps.windows(2).all(|w| w[0] != w[1])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZigZagDecomposition {
    /// Sorted by chain index.
    pub chains: Vec<ZigZagChain>,
    pub in_chain_bonds: Vec<OrientedBond>,
    pub interchain_bonds: Vec<OrientedBond>,
}

/// Zig-zag decomposition of a `width x height` rectangle.
pub fn zigzag_decompose(width: usize, height: usize) -> Result<ZigZagDecomposition> {
    if width < 2 || height < 2 {
        return Err(Error::InvalidGeometry(
            "zig-zag decomposition needs width, height >= 2",
        ));
    }
    Ok(build_rectangle(width, height)?.zigzag())
}

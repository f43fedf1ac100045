//! Many-body bases: fermion bitmasks per flavor plus per-link quantum numbers,
//! packed into one `u128` key whose integer order is the lexicographic order
//! on (flavor-1 mask, flavor-2 mask, link 0, link 1, ...).

use crate::error::{Error, Result};
use crate::lattice::{GaugeRep, LatticeSpec, LinkField};
use crate::operator::DiagonalOperator;

/// Largest basis dimension that will be enumerated.
pub const MAX_DIM: u128 = 1 << 31;

/// Generators whose magnitude stays below this count as annihilating a state.
pub const GAUSS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Filling {
    /// Fixed particle number for each flavor.
    PerFlavor(Vec<u32>),
    /// Fixed total over flavors.
    Total(u32),
    Unrestricted,
}

impl Filling {
    /// `N/2` particles in every flavor.
    pub fn half(spec: &LatticeSpec) -> Self {
        Filling::PerFlavor(vec![spec.n_sites as u32 / 2; spec.flavors])
    }
}

/// Whether occupation bits are fermion modes (Jordan-Wigner signs apply) or spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    Fermions,
    Spins,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkSpace {
    pub count: usize,
    pub dim: usize,
}

impl LinkSpace {
    pub const NONE: LinkSpace = LinkSpace { count: 0, dim: 1 };

    pub fn for_rep(spec: &LatticeSpec, rep: &GaugeRep) -> Self {
        match rep.link_dim() {
            Some(dim) => LinkSpace {
                count: spec.n_sites,
                dim,
            },
            None => LinkSpace::NONE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sector {
    pub filling: Filling,
    pub gauge_projected: bool,
}

/// Decoded basis state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisState {
    /// One bitmask per flavor; bit `x` set means site `x` is occupied.
    pub occupations: Vec<u32>,
    pub links: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layout {
    n_sites: u32,
    flavors: u32,
    link_count: u32,
    link_bits: u32,
}

impl Layout {
    fn new(n_sites: usize, flavors: usize, links: LinkSpace) -> Result<Self> {
        let link_bits = if links.count == 0 {
            0
        } else {
            usize::BITS - (links.dim.max(2) - 1).leading_zeros()
        };
        let total = (flavors * n_sites) as u32 + links.count as u32 * link_bits;
        if total > 128 {
            return Err(Error::Capacity {
                what: "basis key bits",
                required: total as u128,
                limit: 128,
            });
        }
        Ok(Layout {
            n_sites: n_sites as u32,
            flavors: flavors as u32,
            link_count: links.count as u32,
            link_bits,
        })
    }

    fn occ_shift(&self, f: usize) -> u32 {
        self.link_count * self.link_bits + (self.flavors - 1 - f as u32) * self.n_sites
    }

    fn link_shift(&self, l: usize) -> u32 {
        (self.link_count - 1 - l as u32) * self.link_bits
    }

    fn site_mask(&self) -> u128 {
        (1u128 << self.n_sites) - 1
    }

    fn link_mask(&self) -> u128 {
        (1u128 << self.link_bits) - 1
    }
}

/// Deterministically ordered basis with exact lookup.
#[derive(Debug, Clone)]
pub struct Basis {
    n_sites: usize,
    flavors: usize,
    statistics: Statistics,
    links: LinkSpace,
    layout: Layout,
    keys: Vec<u128>,
    sector: Sector,
}

impl Basis {
    /// Complete fixed-particle-number basis including every link configuration.
    pub fn enumerate(spec: &LatticeSpec, rep: &GaugeRep, filling: Filling) -> Result<Self> {
        spec.validate()?;
        Self::build(
            spec.n_sites,
            spec.flavors,
            Statistics::Fermions,
            LinkSpace::for_rep(spec, rep),
            filling,
        )
    }

    /// Spin-1/2 chain, optionally restricted to `up` raised spins.
    pub fn spins(n_sites: usize, up: Option<u32>) -> Result<Self> {
        let filling = up.map_or(Filling::Unrestricted, |n| Filling::PerFlavor(vec![n]));
        Self::build(n_sites, 1, Statistics::Spins, LinkSpace::NONE, filling)
    }

    pub fn build(
        n_sites: usize,
        flavors: usize,
        statistics: Statistics,
        links: LinkSpace,
        filling: Filling,
    ) -> Result<Self> {
        if n_sites == 0 || n_sites > crate::lattice::MAX_SITES {
            return Err(Error::config("n_sites", format!("{n_sites} out of range")));
        }
        if !n_sites.is_multiple_of(2) {
            return Err(Error::config("n_sites", format!("{n_sites} is odd")));
        }
        if !(1..=2).contains(&flavors) {
            return Err(Error::config("flavors", "must be 1 or 2"));
        }
        if statistics == Statistics::Spins && flavors != 1 {
            return Err(Error::Unsupported("spin chains carry a single species".into()));
        }
        validate_filling(n_sites, flavors, &filling)?;
        let layout = Layout::new(n_sites, flavors, links)?;
        let fermion_count = fermion_configurations(n_sites, flavors, &filling);
        let required = fermion_count.saturating_mul((links.dim as u128).saturating_pow(links.count as u32));
        if required > MAX_DIM {
            return Err(Error::Capacity {
                what: "basis dimension",
                required,
                limit: MAX_DIM,
            });
        }
        let mut keys = Vec::with_capacity(required as usize);
        for masks in occupation_tuples(n_sites, flavors, &filling) {
            let base = occupation_key(&layout, &masks);
            let mut digits = vec![0u32; links.count];
            loop {
                let mut key = base;
                for (l, &d) in digits.iter().enumerate() {
                    key |= (d as u128) << layout.link_shift(l);
                }
                keys.push(key);
                if !odometer(&mut digits, links.dim as u32) {
                    break;
                }
            }
        }
        debug_assert!(keys.windows(2).all(|w| w[0] < w[1]));
        Ok(Basis {
            n_sites,
            flavors,
            statistics,
            links,
            layout,
            keys,
            sector: Sector {
                filling,
                gauge_projected: false,
            },
        })
    }

    /// Gauge-invariant sector built directly: Gauss's law fixes every link
    /// from the occupations and the value of the last link.
    pub fn gauge_sector(spec: &LatticeSpec, rep: &GaugeRep, filling: Filling) -> Result<Self> {
        spec.validate()?;
        let field = LinkField::new(spec, rep)?;
        let links = LinkSpace::for_rep(spec, rep);
        let layout = Layout::new(spec.n_sites, spec.flavors, links)?;
        validate_filling(spec.n_sites, spec.flavors, &filling)?;
        let fermion_count = fermion_configurations(spec.n_sites, spec.flavors, &filling);
        let required = fermion_count.saturating_mul(links.dim as u128);
        if required > MAX_DIM {
            return Err(Error::Capacity {
                what: "basis dimension",
                required,
                limit: MAX_DIM,
            });
        }
        let n = spec.n_sites;
        let sign = rep.charge_sign();
        let mut keys = Vec::new();
        let mut digits = vec![0u32; n];
        for masks in occupation_tuples(n, spec.flavors, &filling) {
            let rho: Vec<f64> = (0..n)
                .map(|x| spec.charge(x, masks.iter().map(|m| (m >> x) & 1).sum()))
                .collect();
            'last: for k_last in 0..links.dim as u32 {
                let e_last = field.value(n - 1, k_last);
                let mut prev = e_last;
                for x in 0..n {
                    let e = prev - sign * rho[x];
                    let k = e + field.center - field.background[x];
                    let kr = k.round();
                    if (k - kr).abs() > GAUSS_TOL || kr < 0.0 || kr >= links.dim as f64 {
                        continue 'last;
                    }
                    digits[x] = kr as u32;
                    prev = e;
                }
                if (prev - e_last).abs() > GAUSS_TOL {
                    continue;
                }
                let mut key = occupation_key(&layout, &masks);
                for (l, &d) in digits.iter().enumerate() {
                    key |= (d as u128) << layout.link_shift(l);
                }
                keys.push(key);
            }
        }
        keys.sort_unstable();
        if keys.is_empty() {
            return Err(Error::EmptySector(format!(
                "no Gauss-law solution for {} with {:?}",
                rep.label(),
                filling
            )));
        }
        Ok(Basis {
            n_sites: n,
            flavors: spec.flavors,
            statistics: Statistics::Fermions,
            links,
            layout,
            keys,
            sector: Sector {
                filling,
                gauge_projected: true,
            },
        })
    }

    /// Sub-basis annihilated by every generator, in the original order.
    pub fn project(&self, generators: &[DiagonalOperator]) -> Result<Basis> {
        for g in generators {
            if g.values.len() != self.dim() {
                return Err(Error::Dimension {
                    expected: self.dim(),
                    got: g.values.len(),
                });
            }
        }
        let keys: Vec<u128> = (0..self.dim())
            .filter(|&i| generators.iter().all(|g| g.values[i].abs() < GAUSS_TOL))
            .map(|i| self.keys[i])
            .collect();
        if keys.is_empty() {
            return Err(Error::EmptySector("every state violates Gauss's law".into()));
        }
        Ok(Basis {
            keys,
            sector: Sector {
                filling: self.sector.filling.clone(),
                gauge_projected: true,
            },
            ..self.clone()
        })
    }

    pub fn dim(&self) -> usize {
        self.keys.len()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn flavors(&self) -> usize {
        self.flavors
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn links(&self) -> LinkSpace {
        self.links
    }

    pub fn sector(&self) -> &Sector {
        &self.sector
    }

    pub fn keys(&self) -> &[u128] {
        &self.keys
    }

    pub fn key(&self, i: usize) -> u128 {
        self.keys[i]
    }

    pub fn index_of(&self, key: u128) -> Option<usize> {
        self.keys.binary_search(&key).ok()
    }

    pub fn occupation(&self, i: usize, flavor: usize) -> u32 {
        self.key_occupation(self.keys[i], flavor)
    }

    pub fn link(&self, i: usize, l: usize) -> u32 {
        self.key_link(self.keys[i], l)
    }

    pub fn key_occupation(&self, key: u128, flavor: usize) -> u32 {
        ((key >> self.layout.occ_shift(flavor)) & self.layout.site_mask()) as u32
    }

    pub fn key_link(&self, key: u128, l: usize) -> u32 {
        ((key >> self.layout.link_shift(l)) & self.layout.link_mask()) as u32
    }

    pub fn with_occupation(&self, key: u128, flavor: usize, mask: u32) -> u128 {
        let shift = self.layout.occ_shift(flavor);
        (key & !(self.layout.site_mask() << shift)) | ((mask as u128) << shift)
    }

    pub fn with_link(&self, key: u128, l: usize, value: u32) -> u128 {
        let shift = self.layout.link_shift(l);
        (key & !(self.layout.link_mask() << shift)) | ((value as u128) << shift)
    }

    /// Total occupation of site `x` over flavors.
    pub fn site_occupation(&self, key: u128, x: usize) -> u32 {
        (0..self.flavors).map(|f| (self.key_occupation(key, f) >> x) & 1).sum()
    }

    pub fn state(&self, i: usize) -> BasisState {
        let key = self.keys[i];
        BasisState {
            occupations: (0..self.flavors).map(|f| self.key_occupation(key, f)).collect(),
            links: (0..self.links.count).map(|l| self.key_link(key, l)).collect(),
        }
    }

    /// Packs a state; `None` if it does not fit this basis's layout.
    pub fn encode(&self, state: &BasisState) -> Option<u128> {
        if state.occupations.len() != self.flavors || state.links.len() != self.links.count {
            return None;
        }
        if state.occupations.iter().any(|&m| (m as u128) > self.layout.site_mask())
            || state.links.iter().any(|&v| v as usize >= self.links.dim)
        {
            return None;
        }
        let mut key = occupation_key(&self.layout, &state.occupations);
        for (l, &v) in state.links.iter().enumerate() {
            key |= (v as u128) << self.layout.link_shift(l);
        }
        Some(key)
    }

    pub fn index_of_state(&self, state: &BasisState) -> Option<usize> {
        self.encode(state).and_then(|k| self.index_of(k))
    }

    /// Same geometry and link space; sectors may differ.
    pub fn same_layout(&self, other: &Basis) -> bool {
        self.layout == other.layout && self.statistics == other.statistics && self.links == other.links
    }

    /// Particle count of one flavor in state `i`.
    pub fn particles(&self, i: usize, flavor: usize) -> u32 {
        self.occupation(i, flavor).count_ones()
    }
}

fn validate_filling(n_sites: usize, flavors: usize, filling: &Filling) -> Result<()> {
    match filling {
        Filling::PerFlavor(v) => {
            if v.len() != flavors {
                return Err(Error::config(
                    "filling",
                    format!("{} counts given for {flavors} flavors", v.len()),
                ));
            }
            if v.iter().any(|&n| n as usize > n_sites) {
                return Err(Error::config("filling", "particle count exceeds n_sites"));
            }
        }
        Filling::Total(n) => {
            if *n as usize > flavors * n_sites {
                return Err(Error::config("filling", "particle count exceeds available modes"));
            }
        }
        Filling::Unrestricted => {}
    }
    Ok(())
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

fn fermion_configurations(n_sites: usize, flavors: usize, filling: &Filling) -> u128 {
    let n = n_sites as u128;
    match filling {
        Filling::PerFlavor(v) => v.iter().map(|&k| binomial(n, k as u128)).product(),
        Filling::Total(k) => binomial(n * flavors as u128, *k as u128),
        Filling::Unrestricted => 1u128 << (n_sites * flavors),
    }
}

/// Masks of `n_sites` bits with `k` set, ascending.
pub fn masks_with_popcount(n_sites: usize, k: u32) -> Vec<u32> {
    let limit = 1u64 << n_sites;
    if k as usize > n_sites {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut v: u64 = (1u64 << k) - 1;
    while v < limit {
        out.push(v as u32);
        let t = v | (v - 1);
        v = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
    }
    out
}

/// Occupation tuples in ascending lexicographic order.
fn occupation_tuples(n_sites: usize, flavors: usize, filling: &Filling) -> Vec<Vec<u32>> {
    let all = |n: usize| -> Vec<u32> { (0..(1u64 << n)).map(|m| m as u32).collect() };
    match (flavors, filling) {
        (1, Filling::PerFlavor(v)) => masks_with_popcount(n_sites, v[0])
            .into_iter()
            .map(|m| vec![m])
            .collect(),
        (1, Filling::Total(k)) => masks_with_popcount(n_sites, *k).into_iter().map(|m| vec![m]).collect(),
        (1, Filling::Unrestricted) => all(n_sites).into_iter().map(|m| vec![m]).collect(),
        (_, Filling::PerFlavor(v)) => {
            let m1 = masks_with_popcount(n_sites, v[0]);
            let m2 = masks_with_popcount(n_sites, v[1]);
            m1.iter().flat_map(|&a| m2.iter().map(move |&b| vec![a, b])).collect()
        }
        (_, Filling::Total(k)) => {
            let mut out = Vec::new();
            for a in all(n_sites) {
                let pa = a.count_ones();
                if pa > *k || (*k - pa) as usize > n_sites {
                    continue;
                }
                for b in masks_with_popcount(n_sites, *k - pa) {
                    out.push(vec![a, b]);
                }
            }
            out
        }
        (_, Filling::Unrestricted) => {
            let masks = all(n_sites);
            masks
                .iter()
                .flat_map(|&a| masks.iter().map(move |&b| vec![a, b]))
                .collect()
        }
    }
}

fn occupation_key(layout: &Layout, masks: &[u32]) -> u128 {
    masks
        .iter()
        .enumerate()
        .fold(0u128, |key, (f, &m)| key | ((m as u128) << layout.occ_shift(f)))
}

/// Increments `digits` as a base-`base` number whose last digit is least
/// significant; returns false after wrapping to all zeros.
fn odometer(digits: &mut [u32], base: u32) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// `(-1)^(occupied sites strictly between a and b)` within one flavor mask.
pub fn hop_sign(mask: u32, a: usize, b: usize) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if hi - lo <= 1 {
        return 1.0;
    }
    let between = ((1u64 << hi) - 1) as u32 & !(((1u64 << (lo + 1)) - 1) as u32);
    if (mask & between).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `(-1)^(occupied modes preceding mode (flavor, x))` in flavor-major order.
pub fn mode_sign(occupations: &[u32], flavor: usize, x: usize) -> f64 {
    let before: u32 = occupations[..flavor].iter().map(|m| m.count_ones()).sum::<u32>()
        + (occupations[flavor] & ((1u64 << x) - 1) as u32).count_ones();
    if before.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::GaussConvention;
    use proptest::prelude::*;

    fn spec(n: usize, f: usize) -> LatticeSpec {
        LatticeSpec::new(n, f).unwrap()
    }

    #[test]
    fn fixed_number_dimensions() {
        let integ = GaugeRep::integrated(0.0).unwrap();
        assert_eq!(
            Basis::enumerate(&spec(2, 1), &integ, Filling::PerFlavor(vec![1]))
                .unwrap()
                .dim(),
            2
        );
        assert_eq!(
            Basis::enumerate(&spec(4, 1), &integ, Filling::PerFlavor(vec![2]))
                .unwrap()
                .dim(),
            6
        );
        let qlm = GaugeRep::quantum_link(0.5).unwrap();
        assert_eq!(
            Basis::enumerate(&spec(2, 1), &qlm, Filling::PerFlavor(vec![1]))
                .unwrap()
                .dim(),
            8
        );
        let two = Basis::enumerate(&spec(4, 2), &integ, Filling::Total(4)).unwrap();
        assert_eq!(two.dim(), 70);
    }

    #[test]
    fn lookup_is_a_bijection() {
        let rep = GaugeRep::truncated(1).unwrap();
        let b = Basis::enumerate(&spec(4, 2), &rep, Filling::PerFlavor(vec![2, 1])).unwrap();
        for i in 0..b.dim() {
            assert_eq!(b.index_of(b.key(i)), Some(i));
            assert_eq!(b.index_of_state(&b.state(i)), Some(i));
        }
    }

    #[test]
    fn ordering_is_lexicographic_on_decoded_states() {
        let rep = GaugeRep::quantum_link(1.0).unwrap();
        let b = Basis::enumerate(&spec(4, 2), &rep, Filling::Total(3)).unwrap();
        let decoded: Vec<_> = (0..b.dim())
            .map(|i| {
                let s = b.state(i);
                (s.occupations, s.links)
            })
            .collect();
        assert!(decoded.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn odd_ring_and_overflow_are_rejected() {
        assert!(Basis::build(3, 1, Statistics::Fermions, LinkSpace::NONE, Filling::Unrestricted).is_err());
        let big = LatticeSpec::new(16, 2).unwrap();
        let err = Basis::enumerate(&big, &GaugeRep::truncated(3).unwrap(), Filling::half(&big)).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }

    #[test]
    fn popcount_masks_are_sorted_and_complete() {
        let m = masks_with_popcount(6, 3);
        assert_eq!(m.len(), 20);
        assert!(m.windows(2).all(|w| w[0] < w[1]));
        assert!(m.iter().all(|x| x.count_ones() == 3));
        assert_eq!(masks_with_popcount(4, 0), vec![0]);
        assert_eq!(masks_with_popcount(32, 32), vec![u32::MAX]);
    }

    #[test]
    fn boundary_hop_sign_counts_spectators() {
        // mask 0b1011 on 4 sites: moving the particle at site 3 to site 0 passes site 1.
        assert_eq!(hop_sign(0b1010, 3, 0), -1.0);
        assert_eq!(hop_sign(0b1000, 3, 0), 1.0);
        assert_eq!(hop_sign(0b0110, 3, 0), 1.0);
        assert_eq!(hop_sign(0b1111, 1, 2), 1.0);
    }

    #[test]
    fn mode_sign_is_flavor_major() {
        assert_eq!(mode_sign(&[0b0001, 0], 1, 0), -1.0);
        assert_eq!(mode_sign(&[0b0011, 0b0001], 1, 2), -1.0);
        assert_eq!(mode_sign(&[0b0011, 0b0011], 0, 2), 1.0);
    }

    #[test]
    fn direct_gauge_sector_matches_projection() {
        for (n, f, rep, conv) in [
            (2, 1, GaugeRep::quantum_link(0.5).unwrap(), GaussConvention::Staggered),
            (4, 1, GaugeRep::truncated(2).unwrap(), GaussConvention::Staggered),
            (4, 1, GaugeRep::truncated(2).unwrap(), GaussConvention::UniformHalf),
            (4, 2, GaugeRep::quantum_link(1.0).unwrap(), GaussConvention::Staggered),
            (4, 2, GaugeRep::truncated(1).unwrap(), GaussConvention::UniformHalf),
            (
                4,
                1,
                GaugeRep::schwinger_boson(1.5).unwrap(),
                GaussConvention::Staggered,
            ),
        ] {
            let s = spec(n, f).with_convention(conv);
            let full = Basis::enumerate(&s, &rep, Filling::half(&s)).unwrap();
            let gens = crate::models::links::gauss_generators(&s, &rep, &full).unwrap();
            let projected = full.project(&gens).unwrap();
            let direct = Basis::gauge_sector(&s, &rep, Filling::half(&s)).unwrap();
            assert_eq!(projected.keys(), direct.keys(), "{n} {f} {rep:?} {conv:?}");
        }
    }

    proptest! {
        #[test]
        fn enumeration_bijection(n_half in 1usize..=4, k_seed in 0u32..16, dim in 1usize..=4) {
            let n = 2 * n_half;
            let k = k_seed % (n as u32 + 1);
            let links = LinkSpace { count: if dim == 1 { 0 } else { n }, dim };
            let b = Basis::build(n, 1, Statistics::Fermions, links, Filling::PerFlavor(vec![k])).unwrap();
            for i in 0..b.dim() {
                prop_assert_eq!(b.index_of(b.key(i)), Some(i));
                prop_assert_eq!(b.occupation(i, 0).count_ones(), k);
            }
            prop_assert!(b.keys().windows(2).all(|w| w[0] < w[1]));
        }
    }
}

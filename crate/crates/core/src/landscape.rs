//! NK fitness landscapes: generation, evaluation, exhaustive extrema
//! enumeration, adaptive walks, ruggedness and neutrality measures.
//!
//! A landscape over `n` binary loci assigns each locus a contribution table
//! indexed by the locus itself plus its `k` cyclically adjacent neighbours.
//! Fitness of a genotype is the mean of the per-locus contributions, so it
//! always lies in `[0, 1)`. `k = 0` gives an additive (single-peaked)
//! landscape; `k = n - 1` gives a fully random, maximally rugged one.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Largest supported locus count; exhaustive enumeration of `2^n` genotypes
/// has to stay cheap enough for oracle-style cross checks.
pub const MAX_LOCI: usize = 24;

/// Current on-disk format for serialized landscape specs.
pub const FORMAT_VERSION: u32 = 1;

/// A genotype: a fixed-length binary vector. Locus 0 is the leftmost bit in
/// the string rendering and the least significant bit of the index form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Genotype {
    bits: Vec<bool>,
}

impl Genotype {
    pub fn new(bits: Vec<bool>) -> Self {
        Genotype { bits }
    }

    /// Genotype for packed index `index` over `n` loci.
    pub fn from_index(n: usize, index: u32) -> Self {
        Genotype {
            bits: (0..n).map(|i| index >> i & 1 == 1).collect(),
        }
    }

    /// Parse a bit string such as `"0110"`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => {
                    return Err(Error::domain(
                        "genotype",
                        format!("invalid bit character {c:?}"),
                    ))
                }
            }
        }
        Ok(Genotype { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn to_index(&self) -> u32 {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (u32::from(b) << i))
    }

    /// The Hamming-1 neighbour with locus `locus` flipped.
    pub fn flipped(&self, locus: usize) -> Self {
        let mut bits = self.bits.clone();
        bits[locus] = !bits[locus];
        Genotype { bits }
    }

    /// Hamming distance to another genotype of the same length.
    pub fn hamming(&self, other: &Genotype) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }
}

impl std::fmt::Display for Genotype {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for Genotype {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Serialized form of a landscape. Contribution tables are regenerated from
/// the seed on load, never stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LandscapeSpec {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub format_version: u32,
}

/// An NK fitness landscape over binary genotypes.
#[derive(Debug, Clone)]
pub struct Landscape {
    n: usize,
    k: usize,
    seed: u64,
    /// Locus-major: locus `i` owns entries `i * 2^(k+1) .. (i+1) * 2^(k+1)`.
    table: Vec<f64>,
}

/// Direction of an adaptive walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Ascent,
    Descent,
}

/// Which extrema to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Maxima,
    Minima,
}

/// Tie-breaking policy when several neighbours share the best fitness.
/// Ties are measure-zero on random tables but must still be deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    /// Take the neighbour with the lowest flipped-locus index.
    LowestIndex,
    /// Pick uniformly among the tied neighbours from a seeded stream.
    SeededRandom { seed: u64 },
}

impl Default for TieRule {
    fn default() -> Self {
        TieRule::LowestIndex
    }
}

/// One adaptive walk: visited genotypes with their fitnesses, strictly
/// monotone in the walk direction.
#[derive(Debug, Clone)]
pub struct WalkPath {
    pub steps: Vec<Genotype>,
    pub fitnesses: Vec<f64>,
    pub terminated_at_extremum: bool,
}

impl WalkPath {
    pub fn endpoint(&self) -> &Genotype {
        self.steps.last().expect("walk paths are never empty")
    }

    pub fn endpoint_fitness(&self) -> f64 {
        *self.fitnesses.last().expect("walk paths are never empty")
    }
}

/// Lag-1 fitness autocorrelation along a random walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Autocorrelation {
    pub rho: f64,
    /// Set when the fitness series had no variance; `rho` is reported as 0.
    pub zero_variance: bool,
}

/// One cell of an exported 2-D surface grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub x: u32,
    pub y: u32,
    pub fitness: f64,
}

/// Full 2-D embedding of a landscape, row-major over y then x.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    pub nx: u32,
    pub ny: u32,
    pub points: Vec<SurfacePoint>,
}

fn check_dims(n: usize, k: usize) -> Result<()> {
    if n < 1 || n > MAX_LOCI {
        return Err(Error::parameter(
            "n",
            format!("locus count must satisfy 1 <= n <= {MAX_LOCI}, got {n}"),
        ));
    }
    if k >= n {
        return Err(Error::parameter(
            "k",
            format!("epistasis degree must satisfy 0 <= k <= n-1, got k = {k} with n = {n}"),
        ));
    }
    Ok(())
}

impl Landscape {
    /// Generate a landscape from `(n, k, seed)`.
    ///
    /// Locus `i` depends on itself plus loci `i+1 .. i+k` (cyclic), so the
    /// wiring needs no random draws and regeneration is exact.
    pub fn generate(n: usize, k: usize, seed: u64) -> Result<Self> {
        check_dims(n, k)?;
        let entries_per_locus = 1usize << (k + 1);
        let mut rng = rng::seeded(seed);
        let table: Vec<f64> = (0..n * entries_per_locus)
            .map(|_| rng.random::<f64>())
            .collect();
        Ok(Landscape { n, k, seed, table })
    }

    /// Build a landscape from an explicit contribution table (used for
    /// hand-constructed fixtures). `seed` is recorded as 0.
    pub fn with_table(n: usize, k: usize, table: Vec<f64>) -> Result<Self> {
        check_dims(n, k)?;
        let expected = n * (1usize << (k + 1));
        if table.len() != expected {
            return Err(Error::Shape(format!(
                "contribution table needs {expected} entries for n = {n}, k = {k}; got {}",
                table.len()
            )));
        }
        if table.iter().any(|c| !(0.0..1.0).contains(c)) {
            return Err(Error::domain(
                "contribution_table",
                "all contributions must lie in [0, 1)",
            ));
        }
        Ok(Landscape { n, k, seed: 0, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn contribution_table(&self) -> &[f64] {
        &self.table
    }

    pub fn genotype_count(&self) -> u32 {
        1u32 << self.n
    }

    pub fn spec(&self) -> LandscapeSpec {
        LandscapeSpec {
            n: self.n,
            k: self.k,
            seed: self.seed,
            format_version: FORMAT_VERSION,
        }
    }

    /// Regenerate a landscape from its serialized spec.
    pub fn from_spec(spec: &LandscapeSpec) -> Result<Self> {
        if spec.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported landscape format_version {} (expected {FORMAT_VERSION})",
                spec.format_version
            )));
        }
        Self::generate(spec.n, spec.k, spec.seed)
    }

    /// Fitness of the genotype with packed index `index`.
    pub fn evaluate_index(&self, index: u32) -> f64 {
        let entries_per_locus = 1usize << (self.k + 1);
        let mut total = 0.0;
        for locus in 0..self.n {
            let mut pattern = 0usize;
            for j in 0..=self.k {
                let bit = (index >> ((locus + j) % self.n)) & 1;
                pattern |= (bit as usize) << j;
            }
            total += self.table[locus * entries_per_locus + pattern];
        }
        total / self.n as f64
    }

    /// Fitness of `genotype`; the mean of per-locus contributions.
    pub fn evaluate(&self, genotype: &Genotype) -> Result<f64> {
        if genotype.len() != self.n {
            return Err(Error::Shape(format!(
                "genotype has {} loci, landscape has {}",
                genotype.len(),
                self.n
            )));
        }
        Ok(self.evaluate_index(genotype.to_index()))
    }

    /// Fitness of every genotype, indexed by packed genotype index.
    pub fn fitness_table(&self) -> Vec<f64> {
        (0..self.genotype_count())
            .map(|idx| self.evaluate_index(idx))
            .collect()
    }

    /// Exhaustively enumerate strict local extrema under the bit-flip
    /// neighbourhood, in genotype-index order.
    pub fn local_extrema(&self, kind: ExtremumKind) -> Vec<(Genotype, f64)> {
        let fitness = self.fitness_table();
        let mut found = Vec::new();
        for idx in 0..self.genotype_count() {
            let f = fitness[idx as usize];
            let is_extremum = (0..self.n).all(|b| {
                let neighbour = fitness[(idx ^ (1 << b)) as usize];
                match kind {
                    ExtremumKind::Maxima => f > neighbour,
                    ExtremumKind::Minima => f < neighbour,
                }
            });
            if is_extremum {
                found.push((Genotype::from_index(self.n, idx), f));
            }
        }
        found
    }

    /// Lag-1 autocorrelation of fitness along a seeded random bit-flip walk
    /// of `walk_length` samples. Low values mean a rugged landscape.
    pub fn ruggedness_autocorrelation(
        &self,
        walk_length: usize,
        seed: u64,
    ) -> Result<Autocorrelation> {
        if walk_length < 100 {
            return Err(Error::parameter(
                "walk_length",
                format!("random walk needs at least 100 samples, got {walk_length}"),
            ));
        }
        let mut rng = rng::seeded(seed);
        let mask = self.genotype_count() - 1;
        let mut idx = rng.random::<u32>() & mask;
        let mut series = Vec::with_capacity(walk_length);
        series.push(self.evaluate_index(idx));
        for _ in 1..walk_length {
            let flip = rng.random_range(0..self.n);
            idx ^= 1 << flip;
            series.push(self.evaluate_index(idx));
        }
        let spread = series.iter().cloned().fold(f64::MIN, f64::max)
            - series.iter().cloned().fold(f64::MAX, f64::min);
        if spread <= 1e-12 {
            return Ok(Autocorrelation {
                rho: 0.0,
                zero_variance: true,
            });
        }
        let mean = series.iter().sum::<f64>() / series.len() as f64;
        let denom: f64 = series.iter().map(|f| (f - mean).powi(2)).sum();
        let numer: f64 = series
            .windows(2)
            .map(|w| (w[0] - mean) * (w[1] - mean))
            .sum();
        Ok(Autocorrelation {
            rho: numer / denom,
            zero_variance: false,
        })
    }

    /// Pick the strictly-improving steepest neighbour of `index`, if any.
    /// Returns `None` at a local extremum of the walk direction.
    pub fn steepest_neighbor(
        &self,
        index: u32,
        direction: Direction,
        tie_rng: &mut Option<rand_chacha::ChaCha8Rng>,
    ) -> Option<(u32, f64)> {
        let current = self.evaluate_index(index);
        let mut best: Option<(u32, f64)> = None;
        let mut tied: Vec<u32> = Vec::new();
        for locus in 0..self.n {
            let candidate = index ^ (1 << locus);
            let f = self.evaluate_index(candidate);
            let improves = match direction {
                Direction::Ascent => f > current,
                Direction::Descent => f < current,
            };
            if !improves {
                continue;
            }
            match best {
                None => {
                    best = Some((candidate, f));
                    tied = vec![candidate];
                }
                Some((_, best_f)) => {
                    let better = match direction {
                        Direction::Ascent => f > best_f,
                        Direction::Descent => f < best_f,
                    };
                    if better {
                        best = Some((candidate, f));
                        tied = vec![candidate];
                    } else if f == best_f {
                        tied.push(candidate);
                    }
                }
            }
        }
        let (_, best_f) = best?;
        // Lowest-index candidates come first because loci are scanned in
        // order; a seeded rng picks uniformly among exact ties instead.
        let chosen = match tie_rng {
            Some(rng) if tied.len() > 1 => tied[rng.random_range(0..tied.len())],
            _ => tied[0],
        };
        Some((chosen, best_f))
    }

    /// Steepest adaptive walk from `start`, at most `max_steps` moves.
    ///
    /// The walk stops early when no neighbour strictly improves, which marks
    /// the endpoint as a local extremum of the walk direction.
    pub fn adaptive_walk(
        &self,
        start: &Genotype,
        direction: Direction,
        tie_rule: TieRule,
        max_steps: usize,
    ) -> Result<WalkPath> {
        if start.len() != self.n {
            return Err(Error::Shape(format!(
                "start genotype has {} loci, landscape has {}",
                start.len(),
                self.n
            )));
        }
        if max_steps < 1 {
            return Err(Error::parameter("max_steps", "must be at least 1"));
        }
        let mut tie_rng = match tie_rule {
            TieRule::LowestIndex => None,
            TieRule::SeededRandom { seed } => Some(rng::substream(seed, rng::STREAM_WALK)),
        };
        let mut index = start.to_index();
        let mut steps = vec![start.clone()];
        let mut fitnesses = vec![self.evaluate_index(index)];
        let mut terminated_at_extremum = false;
        for _ in 0..max_steps {
            match self.steepest_neighbor(index, direction, &mut tie_rng) {
                Some((next, f)) => {
                    index = next;
                    steps.push(Genotype::from_index(self.n, next));
                    fitnesses.push(f);
                }
                None => {
                    terminated_at_extremum = true;
                    break;
                }
            }
        }
        Ok(WalkPath {
            steps,
            fitnesses,
            terminated_at_extremum,
        })
    }

    /// All Hamming-1 neighbours whose fitness differs from `genotype`'s by
    /// at most `epsilon`, in flip-index order.
    pub fn neutral_neighbors(&self, genotype: &Genotype, epsilon: f64) -> Result<Vec<Genotype>> {
        if genotype.len() != self.n {
            return Err(Error::Shape(format!(
                "genotype has {} loci, landscape has {}",
                genotype.len(),
                self.n
            )));
        }
        if !(epsilon >= 0.0) {
            return Err(Error::parameter("epsilon", "must be >= 0"));
        }
        let base = self.evaluate_index(genotype.to_index());
        Ok((0..self.n)
            .filter(|&locus| {
                let f = self.evaluate_index(genotype.to_index() ^ (1 << locus));
                (f - base).abs() <= epsilon
            })
            .map(|locus| genotype.flipped(locus))
            .collect())
    }

    /// Embed the landscape on a 2-D grid: the first `ceil(n/2)` bits map to
    /// the x axis and the rest to the y axis, each through a binary-reflected
    /// Gray code so adjacent cells differ in exactly one locus. The grid
    /// covers every genotype exactly once and is serialized row-major.
    ///
    /// `resolution` is the caller's requested minimum cells per axis; the
    /// grid dimensions themselves are fixed by `n`.
    pub fn export_surface(&self, resolution: u32) -> Result<SurfaceGrid> {
        if resolution < 2 {
            return Err(Error::parameter("resolution", "must be at least 2"));
        }
        let x_bits = self.n.div_ceil(2);
        let y_bits = self.n - x_bits;
        let nx = 1u32 << x_bits;
        let ny = 1u32 << y_bits;
        let mut points = Vec::with_capacity((nx * ny) as usize);
        for y in 0..ny {
            let gray_y = y ^ (y >> 1);
            for x in 0..nx {
                let gray_x = x ^ (x >> 1);
                let index = gray_x | (gray_y << x_bits);
                points.push(SurfacePoint {
                    x,
                    y,
                    fitness: self.evaluate_index(index),
                });
            }
        }
        Ok(SurfaceGrid { nx, ny, points })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn additive_unique(n: usize, seed: u64) -> Landscape {
        Landscape::generate(n, 0, seed).unwrap()
    }

    /// The 2-locus fixture from hand tables: fitnesses {00: 0.1, 01: 0.9,
    /// 10: 0.8, 11: 0.2} (bit string order: locus 0 first).
    fn saddle_fixture() -> Landscape {
        let c0 = [0.1, 0.8, 0.9, 0.2];
        let c1 = [0.1, 0.9, 0.8, 0.2];
        let mut table = Vec::new();
        table.extend_from_slice(&c0);
        table.extend_from_slice(&c1);
        Landscape::with_table(2, 1, table).unwrap()
    }

    #[test]
    fn generation_is_deterministic_and_bounded() {
        let a = Landscape::generate(8, 3, 99).unwrap();
        let b = Landscape::generate(8, 3, 99).unwrap();
        assert_eq!(a.contribution_table(), b.contribution_table());
        assert_eq!(a.contribution_table().len(), 8 * 16);
        assert!(a.contribution_table().iter().all(|c| (0.0..1.0).contains(c)));
        let c = Landscape::generate(8, 3, 100).unwrap();
        assert_ne!(a.contribution_table(), c.contribution_table());
    }

    #[test]
    fn invalid_dims_are_rejected() {
        assert!(Landscape::generate(0, 0, 1).is_err());
        assert!(Landscape::generate(25, 0, 1).is_err());
        assert!(Landscape::generate(4, 4, 1).is_err());
        assert!(Landscape::generate(4, 3, 1).is_ok());
    }

    #[test]
    fn additive_landscape_has_exactly_one_optimum_of_each_kind() {
        for seed in [1, 2, 3, 4, 5] {
            let l = additive_unique(4, seed);
            assert_eq!(l.local_extrema(ExtremumKind::Maxima).len(), 1, "seed {seed}");
            assert_eq!(l.local_extrema(ExtremumKind::Minima).len(), 1, "seed {seed}");
        }
    }

    #[test]
    fn evaluate_is_mean_of_table_lookups() {
        // n = 2, k = 1: genotype 00 reads c0(00) and c1(00).
        let c0 = [0.2, 0.55, 0.4, 0.9];
        let c1 = [0.6, 0.8, 0.3, 0.1];
        let mut table = Vec::new();
        table.extend_from_slice(&c0);
        table.extend_from_slice(&c1);
        let l = Landscape::with_table(2, 1, table).unwrap();
        let f = l.evaluate(&Genotype::parse("00").unwrap()).unwrap();
        assert!((f - (0.2 + 0.6) / 2.0).abs() < 1e-15);
        // genotype 01: locus0 sees (b0=0, b1=1) -> pattern 10; locus1 sees (b1=1, b0=0) -> pattern 01.
        let f01 = l.evaluate(&Genotype::parse("01").unwrap()).unwrap();
        assert!((f01 - (0.4 + 0.8) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_tables_make_fitness_independent_of_bits() {
        // k = 0 with both entries equal per locus: degenerate flat landscape.
        let table = vec![0.3, 0.3, 0.7, 0.7, 0.5, 0.5];
        let l = Landscape::with_table(3, 0, table).unwrap();
        let f0 = l.evaluate_index(0);
        for idx in 1..l.genotype_count() {
            assert_eq!(l.evaluate_index(idx), f0);
        }
    }

    #[test]
    fn evaluate_is_bit_identical_across_calls() {
        let l = Landscape::generate(10, 4, 7).unwrap();
        let g = Genotype::from_index(10, 0b1011001110);
        assert_eq!(l.evaluate(&g).unwrap(), l.evaluate(&g).unwrap());
        assert!(l.evaluate(&Genotype::parse("01").unwrap()).is_err());
    }

    #[test]
    fn constructed_saddle_has_the_two_expected_maxima() {
        let l = saddle_fixture();
        assert!((l.evaluate(&Genotype::parse("00").unwrap()).unwrap() - 0.1).abs() < 1e-12);
        assert!((l.evaluate(&Genotype::parse("01").unwrap()).unwrap() - 0.9).abs() < 1e-12);
        assert!((l.evaluate(&Genotype::parse("10").unwrap()).unwrap() - 0.8).abs() < 1e-12);
        assert!((l.evaluate(&Genotype::parse("11").unwrap()).unwrap() - 0.2).abs() < 1e-12);
        let maxima = l.local_extrema(ExtremumKind::Maxima);
        let mut names: Vec<String> = maxima.iter().map(|(g, _)| g.to_string()).collect();
        names.sort();
        assert_eq!(names, vec!["01".to_string(), "10".to_string()]);
    }

    #[test]
    fn every_landscape_has_at_least_one_maximum() {
        for seed in 0..20 {
            let l = Landscape::generate(6, 2, seed).unwrap();
            assert!(!l.local_extrema(ExtremumKind::Maxima).is_empty());
        }
    }

    #[test]
    fn walk_from_local_maximum_has_length_one() {
        let l = saddle_fixture();
        let path = l
            .adaptive_walk(
                &Genotype::parse("01").unwrap(),
                Direction::Ascent,
                TieRule::LowestIndex,
                50,
            )
            .unwrap();
        assert_eq!(path.steps.len(), 1);
        assert!(path.terminated_at_extremum);
    }

    #[test]
    fn additive_descent_reaches_the_unique_minimum() {
        for seed in [11, 12, 13] {
            let l = additive_unique(6, seed);
            let minima = l.local_extrema(ExtremumKind::Minima);
            assert_eq!(minima.len(), 1);
            for start_idx in [0u32, 17, 42, 63] {
                let start = Genotype::from_index(6, start_idx);
                let path = l
                    .adaptive_walk(&start, Direction::Descent, TieRule::LowestIndex, 100)
                    .unwrap();
                assert!(path.terminated_at_extremum);
                assert_eq!(path.endpoint(), &minima[0].0);
            }
        }
    }

    #[test]
    fn ascent_endpoints_are_exhaustive_maxima() {
        let l = Landscape::generate(8, 4, 5).unwrap();
        let maxima: std::collections::HashSet<u32> = l
            .local_extrema(ExtremumKind::Maxima)
            .iter()
            .map(|(g, _)| g.to_index())
            .collect();
        for start_idx in 0..l.genotype_count() {
            let start = Genotype::from_index(8, start_idx);
            let path = l
                .adaptive_walk(&start, Direction::Ascent, TieRule::LowestIndex, 1000)
                .unwrap();
            assert!(path.terminated_at_extremum);
            assert!(maxima.contains(&path.endpoint().to_index()));
        }
    }

    #[test]
    fn walk_fitnesses_are_strictly_monotone() {
        let l = Landscape::generate(10, 5, 21).unwrap();
        for (direction, sign) in [(Direction::Ascent, 1.0), (Direction::Descent, -1.0)] {
            let path = l
                .adaptive_walk(
                    &Genotype::from_index(10, 513),
                    direction,
                    TieRule::SeededRandom { seed: 3 },
                    1000,
                )
                .unwrap();
            assert_eq!(path.steps.len(), path.fitnesses.len());
            for w in path.fitnesses.windows(2) {
                assert!(sign * (w[1] - w[0]) > 0.0);
            }
            for w in path.steps.windows(2) {
                assert_eq!(w[0].hamming(&w[1]), 1);
            }
        }
    }

    #[test]
    fn max_steps_truncates_without_extremum_flag() {
        let l = Landscape::generate(12, 2, 9).unwrap();
        let path = l
            .adaptive_walk(
                &Genotype::from_index(12, 0),
                Direction::Ascent,
                TieRule::LowestIndex,
                1,
            )
            .unwrap();
        assert!(path.steps.len() <= 2);
    }

    #[test]
    fn autocorrelation_is_deterministic_and_flags_zero_variance() {
        let l = Landscape::generate(12, 3, 31).unwrap();
        let a = l.ruggedness_autocorrelation(500, 8).unwrap();
        let b = l.ruggedness_autocorrelation(500, 8).unwrap();
        assert_eq!(a, b);
        assert!(!a.zero_variance);
        assert!(a.rho.abs() <= 1.0 + 1e-12);

        let flat = Landscape::with_table(3, 0, vec![0.4; 6]).unwrap();
        let r = flat.ruggedness_autocorrelation(200, 1).unwrap();
        assert_eq!(r.rho, 0.0);
        assert!(r.zero_variance);

        assert!(l.ruggedness_autocorrelation(99, 1).is_err());
    }

    #[test]
    fn smooth_landscapes_have_higher_autocorrelation_than_rugged() {
        let mut smooth = 0.0;
        let mut rugged = 0.0;
        let seeds = 50;
        for seed in 0..seeds {
            smooth += Landscape::generate(12, 0, seed)
                .unwrap()
                .ruggedness_autocorrelation(400, seed)
                .unwrap()
                .rho;
            rugged += Landscape::generate(12, 11, seed)
                .unwrap()
                .ruggedness_autocorrelation(400, seed)
                .unwrap()
                .rho;
        }
        assert!(
            smooth / seeds as f64 > rugged / seeds as f64,
            "k=0 mean rho {} should exceed k=11 mean rho {}",
            smooth / seeds as f64,
            rugged / seeds as f64
        );
    }

    #[test]
    fn neutral_neighbors_respect_epsilon() {
        let l = Landscape::generate(8, 2, 77).unwrap();
        let g = Genotype::from_index(8, 0b10110010);
        // Continuous random draws: exact ties have measure zero.
        assert!(l.neutral_neighbors(&g, 0.0).unwrap().is_empty());
        assert_eq!(l.neutral_neighbors(&g, 1.0).unwrap().len(), 8);

        // Additive fixture: flipping locus 0 or 1 changes fitness by 0.005,
        // flipping locus 2 changes it by 0.3.
        let table = vec![0.5, 0.515, 0.5, 0.485, 0.05, 0.95];
        let l = Landscape::with_table(3, 0, table).unwrap();
        let base = Genotype::parse("000").unwrap();
        let neutral = l.neutral_neighbors(&base, 0.01).unwrap();
        let names: Vec<String> = neutral.iter().map(|g| g.to_string()).collect();
        assert_eq!(names, vec!["100".to_string(), "010".to_string()]);
    }

    #[test]
    fn surface_covers_every_genotype_once() {
        for (n, k) in [(2usize, 1usize), (5, 2), (6, 3)] {
            let l = Landscape::generate(n, k, 3).unwrap();
            let grid = l.export_surface(2).unwrap();
            assert_eq!(grid.points.len(), 1 << n);
            assert_eq!((grid.nx * grid.ny) as usize, 1 << n);
            assert_eq!(grid.nx, 1 << n.div_ceil(2));
            // Row-major: y advances slowest.
            assert_eq!(grid.points[0].x, 0);
            assert_eq!(grid.points[0].y, 0);
            assert_eq!(grid.points[1].x, 1);
            // Every fitness value matches a fresh evaluation of the cell's genotype.
            let x_bits = n.div_ceil(2);
            let mut seen = std::collections::HashSet::new();
            for p in &grid.points {
                let index = (p.x ^ (p.x >> 1)) | ((p.y ^ (p.y >> 1)) << x_bits);
                assert!(seen.insert(index));
                assert_eq!(p.fitness, l.evaluate_index(index));
            }
        }
        assert!(Landscape::generate(4, 1, 0).unwrap().export_surface(1).is_err());
    }

    #[test]
    fn spec_roundtrip_regenerates_identical_tables() {
        let l = Landscape::generate(10, 4, 1234).unwrap();
        let json = serde_json::to_string(&l.spec()).unwrap();
        let spec: LandscapeSpec = serde_json::from_str(&json).unwrap();
        let back = Landscape::from_spec(&spec).unwrap();
        assert_eq!(l.contribution_table(), back.contribution_table());
    }
}

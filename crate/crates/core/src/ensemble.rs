//! Random and clustered network ensembles, plus edge-list ingestion and export.
//!
//! Randomness is consumed pair by pair in row-major order over `i < j`, one
//! uniform per pair, regardless of the pair's connection probability. A
//! clustered matrix with `q_inter == p_intra` is therefore bit-identical to the
//! Erdős–Rényi matrix drawn from the same seed.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

/// Symmetric 0/1 matrix with zero diagonal, stored densely (row-major).
#[derive(Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    entries: Vec<u8>,
}

impl std::fmt::Debug for AdjacencyMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AdjacencyMatrix")
            .field("n", &self.n)
            .field("edges", &self.edge_count())
            .finish()
    }
}

impl AdjacencyMatrix {
    /// Empty network on `n` nodes.
    pub fn empty(n: usize) -> Self {
        AdjacencyMatrix {
            n,
            entries: vec![0; n * n],
        }
    }

    /// Build from undirected edges; self-loops are ignored and duplicates are idempotent.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut m = Self::empty(n);
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i}, {j}) out of range for {n} nodes"
                )));
            }
            if i != j {
                m.connect(i, j);
            }
        }
        Ok(m)
    }

    #[inline]
    fn connect(&mut self, i: usize, j: usize) {
        self.entries[i * self.n + j] = 1;
        self.entries[j * self.n + i] = 1;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j] != 0
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn edge_count(&self) -> usize {
        self.entries.iter().map(|&e| e as usize).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j`, ascending by `i` then `j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).filter_map(move |j| self.get(i, j).then_some((i, j)))
        })
    }

    /// True when the matrix is symmetric, binary and has an empty diagonal.
    pub fn check_invariants(&self) -> bool {
        let n = self.n;
        self.entries.len() == n * n
            && (0..n).all(|i| {
                self.entries[i * n + i] == 0
                    && (0..n).all(|j| {
                        let e = self.entries[i * n + j];
                        e <= 1 && e == self.entries[j * n + i]
                    })
            })
    }

    /// Dense row-major copy in floating point.
    pub fn to_dense<T: Scalar>(&self) -> Vec<T> {
        self.entries
            .iter()
            .map(|&e| if e != 0 { T::one() } else { T::zero() })
            .collect()
    }

    /// Edge-list text: one `i j` line per edge, ascending `i` then `j`.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (i, j) in self.edges() {
            let _ = writeln!(s, "{i} {j}");
        }
        s
    }
}

/// Parameters of a generated ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub count: usize,
    pub n: usize,
    pub p_intra: f64,
    /// Block sizes summing to `n`; a single block is a plain random network.
    pub block_sizes: Vec<usize>,
    pub q_inter: f64,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn erdos_renyi(count: usize, n: usize, p: f64, seed: u64) -> Self {
        EnsembleSpec {
            count,
            n,
            p_intra: p,
            block_sizes: vec![n],
            q_inter: 0.0,
            seed,
        }
    }

    pub fn clustered(count: usize, block_sizes: Vec<usize>, p_intra: f64, q_inter: f64, seed: u64) -> Self {
        EnsembleSpec {
            count,
            n: block_sizes.iter().sum(),
            p_intra,
            block_sizes,
            q_inter,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidSpec("ensemble count must be at least 1".into()));
        }
        if self.block_sizes.is_empty() {
            return Err(Error::InvalidSpec("block list is empty".into()));
        }
        if self.block_sizes.iter().sum::<usize>() != self.n {
            return Err(Error::InvalidSpec(format!(
                "block sizes {:?} do not sum to n = {}",
                self.block_sizes, self.n
            )));
        }
        if self.n < 2 {
            return Err(Error::InvalidDimension(self.n));
        }
        check_probability(self.p_intra, "p_intra")?;
        check_probability(self.q_inter, "q_inter")?;
        Ok(())
    }

    pub fn is_clustered(&self) -> bool {
        self.block_sizes.len() > 1
    }

    /// Mean degree `k = p N` (intra-block probability times node count).
    pub fn mean_degree(&self) -> f64 {
        self.p_intra * self.n as f64
    }

    /// Connection probability averaged over all node pairs.
    pub fn mean_pair_probability(&self) -> f64 {
        let n = self.n as f64;
        let pairs = n * (n - 1.0) / 2.0;
        let intra: f64 = self
            .block_sizes
            .iter()
            .map(|&b| (b * (b - 1) / 2) as f64)
            .sum();
        (self.p_intra * intra + self.q_inter * (pairs - intra)) / pairs
    }
}

fn check_probability(p: f64, name: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {p} not in [0, 1]")))
    }
}

/// Erdős–Rényi graph: every pair is linked independently with probability `p`.
pub fn generate_er(n: usize, p: f64, seed: u64) -> Result<AdjacencyMatrix> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    check_probability(p, "p")?;
    let mut rng = rng::stream(seed);
    let mut m = AdjacencyMatrix::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng::unit_f64(&mut rng) < p {
                m.connect(i, j);
            }
        }
    }
    Ok(m)
}

/// Block-structured graph: pairs inside a block link with `p_intra`, pairs
/// across blocks with `q_inter`. Blocks occupy consecutive node ranges.
pub fn generate_clustered(block_sizes: &[usize], p_intra: f64, q_inter: f64, seed: u64) -> Result<AdjacencyMatrix> {
    if block_sizes.is_empty() {
        return Err(Error::InvalidSpec("block list is empty".into()));
    }
    if let Some(&b) = block_sizes.iter().find(|&&b| b < 2) {
        return Err(Error::InvalidSpec(format!("block size {b} below 2")));
    }
    check_probability(p_intra, "p_intra")?;
    check_probability(q_inter, "q_inter")?;

    let label: Vec<usize> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat(b).take(size))
        .collect();
    let n = label.len();
    let mut rng = rng::stream(seed);
    let mut m = AdjacencyMatrix::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if label[i] == label[j] { p_intra } else { q_inter };
            if rng::unit_f64(&mut rng) < p {
                m.connect(i, j);
            }
        }
    }
    Ok(m)
}

/// Seed of ensemble member `index`.
pub fn member_seed(seed: u64, index: usize) -> u64 {
    rng::mix(seed, index as u64)
}

/// Generate one ensemble member.
pub fn generate_member(spec: &EnsembleSpec, index: usize) -> Result<AdjacencyMatrix> {
    let seed = member_seed(spec.seed, index);
    if spec.is_clustered() {
        generate_clustered(&spec.block_sizes, spec.p_intra, spec.q_inter, seed)
    } else {
        generate_er(spec.n, spec.p_intra, seed)
    }
}

/// All members of an ensemble, in index order. Members are generated in
/// parallel on the current rayon pool; the result does not depend on it.
pub fn generate_ensemble(spec: &EnsembleSpec) -> Result<Vec<AdjacencyMatrix>> {
    spec.validate()?;
    (0..spec.count)
        .into_par_iter()
        .map(|i| generate_member(spec, i))
        .collect()
}

/// Result of reading an edge list.
#[derive(Debug, Clone)]
pub struct IngestedNetwork {
    pub matrix: AdjacencyMatrix,
    /// Original label of each node index.
    pub labels: Vec<String>,
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

/// Parse an undirected edge list. Each non-comment line holds two labels;
/// `#` starts a comment. Nodes are indexed in order of first appearance.
pub fn ingest_edge_list<R: BufRead>(reader: R) -> Result<IngestedNetwork> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    let mut self_loops = 0;

    let mut node = |label: &str, labels: &mut Vec<String>| -> usize {
        if let Some(&i) = index.get(label) {
            return i;
        }
        let i = labels.len();
        index.insert(label.to_owned(), i);
        labels.push(label.to_owned());
        i
    };

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let (a, b) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected two node labels, got {content:?}"),
                })
            }
        };
        let i = node(a, &mut labels);
        let j = node(b, &mut labels);
        if i == j {
            self_loops += 1;
        } else {
            edges.push((i.min(j), i.max(j)));
        }
    }

    if self_loops > 0 {
        log::warn!("dropped {self_loops} self-loop(s) from edge list");
    }
    if edges.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let total = edges.len();
    let matrix = AdjacencyMatrix::from_edges(labels.len(), edges)?;
    let duplicate_edges = total - matrix.edge_count();
    Ok(IngestedNetwork {
        matrix,
        labels,
        self_loops,
        duplicate_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_extremes() {
        let z = generate_er(4, 0.0, 11).unwrap();
        assert_eq!(z.edge_count(), 0);
        let k4 = generate_er(4, 1.0, 11).unwrap();
        assert_eq!(k4.edge_count(), 6);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(k4.get(i, j), i != j);
            }
        }
    }

    #[test]
    fn er_rejects_small_or_bad_input() {
        assert!(matches!(generate_er(1, 0.5, 0), Err(Error::InvalidDimension(1))));
        assert!(matches!(generate_er(5, 1.5, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn er_edge_count_within_three_sigma() {
        // Binomial(499500, 0.1): mean 49950, sd sqrt(499500 * 0.09) = 212.0
        let m = generate_er(1000, 0.1, 2024).unwrap();
        let e = m.edge_count() as f64;
        assert!((e - 49_950.0).abs() <= 636.0, "edges = {e}");
        assert!(m.check_invariants());
    }

    #[test]
    fn clustered_without_cross_links_is_block_diagonal() {
        let m = generate_clustered(&[500, 500], 0.1, 0.0, 9).unwrap();
        for i in 0..500 {
            assert!(m.row(i)[500..].iter().all(|&e| e == 0));
        }
        // intra pairs 2 * 124750, sd sqrt(249500 * 0.09)
        let bound = 3.0 * (2.0 * 124_750.0 * 0.09f64).sqrt();
        assert!((m.edge_count() as f64 - 24_950.0).abs() <= bound);
    }

    #[test]
    fn clustered_with_equal_cross_probability_matches_er() {
        for seed in 0..3 {
            let a = generate_clustered(&[30, 20], 0.3, 0.3, seed).unwrap();
            let b = generate_er(50, 0.3, seed).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn clustered_errors() {
        assert!(matches!(generate_clustered(&[], 0.1, 0.0, 0), Err(Error::InvalidSpec(_))));
        assert!(matches!(generate_clustered(&[5, 1], 0.1, 0.0, 0), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn ensemble_member_matches_direct_generation() {
        let spec = EnsembleSpec::erdos_renyi(2, 60, 0.2, 77);
        let ens = generate_ensemble(&spec).unwrap();
        assert_eq!(ens[0], generate_er(60, 0.2, rng::mix(77, 0)).unwrap());
        assert_eq!(ens[1], generate_er(60, 0.2, rng::mix(77, 1)).unwrap());
        assert_ne!(ens[0], ens[1]);
    }

    #[test]
    fn spec_validation() {
        let mut s = EnsembleSpec::clustered(2, vec![10, 10], 0.1, 0.0, 0);
        assert!(s.validate().is_ok());
        s.n = 21;
        assert!(s.validate().is_err());
        let s = EnsembleSpec::erdos_renyi(0, 10, 0.1, 0);
        assert!(s.validate().is_err());
        let s = EnsembleSpec::erdos_renyi(1, 10, -0.1, 0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn mean_pair_probability() {
        let s = EnsembleSpec::clustered(1, vec![500, 500], 0.1, 0.0, 0);
        let expected = 0.1 * 249_500.0 / 499_500.0;
        assert!((s.mean_pair_probability() - expected).abs() < 1e-15);
        let s = EnsembleSpec::erdos_renyi(1, 100, 0.25, 0);
        assert!((s.mean_pair_probability() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ingest_simple_chain() {
        let net = ingest_edge_list("0 1\n1 2".as_bytes()).unwrap();
        assert_eq!(net.matrix.n(), 3);
        assert_eq!(net.matrix.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn ingest_duplicate_is_idempotent() {
        let net = ingest_edge_list("a b\nb a\n".as_bytes()).unwrap();
        assert_eq!(net.matrix.n(), 2);
        assert_eq!(net.matrix.edge_count(), 1);
        assert_eq!(net.duplicate_edges, 1);
        assert_eq!(net.labels, vec!["a", "b"]);
    }

    #[test]
    fn ingest_drops_self_loops() {
        let net = ingest_edge_list("# header\n0 1\n3 3\n1 2 # trailing\n".as_bytes()).unwrap();
        assert_eq!(net.self_loops, 1);
        assert!(net.matrix.check_invariants());
        let i3 = net.labels.iter().position(|l| l == "3").unwrap();
        assert!(!net.matrix.get(i3, i3));
        assert_eq!(net.matrix.edge_count(), 2);
    }

    #[test]
    fn ingest_errors() {
        match ingest_edge_list("0 1\n0 1 2\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(ingest_edge_list("x\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(ingest_edge_list("# nothing\n\n".as_bytes()), Err(Error::EmptyNetwork)));
        assert!(matches!(ingest_edge_list("4 4\n".as_bytes()), Err(Error::EmptyNetwork)));
    }

    #[test]
    fn edge_list_round_trip() {
        let m = generate_er(40, 0.2, 5).unwrap();
        let text = m.to_edge_list();
        let back = ingest_edge_list(text.as_bytes()).unwrap();
        // isolated nodes vanish and labels follow first appearance, so compare via labels
        for (i, j) in m.edges() {
            let a = back.labels.iter().position(|l| *l == i.to_string()).unwrap();
            let b = back.labels.iter().position(|l| *l == j.to_string()).unwrap();
            assert!(back.matrix.get(a, b));
        }
        assert_eq!(back.matrix.edge_count(), m.edge_count());
    }
}

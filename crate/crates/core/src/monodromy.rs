//! Monodromy of the ten secant orbits around triangle loops in parameter
//! space, and the order of the permutation group the loops generate.

use std::collections::HashSet;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::certifier;
use crate::classifier::{canonical_representative, quotient_distance, SECANT_COUNT};
use crate::data;
use crate::error::{Error, Result};
use crate::geometry::{ParameterMatrix, SolutionPoint};
use crate::rng::{Domain, Stream};
use crate::sampler::MAX_REDRAWS;
use crate::tracker::{self, EdgeRoots, PathResult, StartSet, TrackerConfig};

/// Best match must beat the runner-up by this factor.
pub const MATCH_RATIO: f64 = 10.0;

/// A permutation of `{1, ..., n}`, stored 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    /// From 1-based images `[σ(1), ..., σ(n)]`.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in images {
            if i == 0 || i > n || seen[i - 1] {
                return Err(Error::InvalidPermutation(format!("{images:?} is not a bijection of 1..={n}")));
            }
            seen[i - 1] = true;
        }
        Ok(Self {
            images: images.iter().map(|i| i - 1).collect(),
        })
    }

    /// Parses cycle notation such as `(1)(2 6)(3 10 5)`; points not
    /// mentioned are fixed. `()` is the identity.
    pub fn parse_cycles(text: &str, n: usize) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidPermutation(format!("{text:?}: {msg}"));
        let mut images: Vec<usize> = (0..n).collect();
        let mut seen = vec![false; n];
        let mut rest = text.trim();
        while !rest.is_empty() {
            let open = rest.strip_prefix('(').ok_or_else(|| bad("expected '('"))?;
            let close = open.find(')').ok_or_else(|| bad("unclosed cycle"))?;
            let cycle: Vec<usize> = open[..close]
                .split([' ', ','])
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().map_err(|_| bad("non-numeric entry")))
                .collect::<Result<_>>()?;
            for &p in &cycle {
                if p == 0 || p > n {
                    return Err(bad(&format!("point {p} outside 1..={n}")));
                }
                if std::mem::replace(&mut seen[p - 1], true) {
                    return Err(bad(&format!("point {p} repeated")));
                }
            }
            for (k, &p) in cycle.iter().enumerate() {
                images[p - 1] = cycle[(k + 1) % cycle.len()] - 1;
            }
            rest = open[close + 1..].trim_start();
        }
        Ok(Self { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Image of the 0-based point `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// 1-based images.
    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|i| i + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `(self ∘ q)(i) = self(q(i))`.
    pub fn compose(&self, q: &Self) -> Self {
        assert_eq!(self.degree(), q.degree(), "degree mismatch");
        Self {
            images: q.images.iter().map(|&j| self.images[j]).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.degree()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        Self { images }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::identity(self.degree()), |acc, _| self.compose(&acc))
    }

    /// Cycles (1-based), each starting at its least point, ordered by that
    /// point; fixed points are included as 1-cycles.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut cycles = Vec::new();
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i + 1);
                i = self.images[i];
            }
            cycles.push(cycle);
        }
        cycles
    }

    fn first_moved(&self) -> Option<usize> {
        (0..self.degree()).find(|&i| self.images[i] != i)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for cycle in self.cycles() {
            let parts: Vec<String> = cycle.iter().map(usize::to_string).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Sims filter: reduces a generating set to at most `n(n-1)/2` elements
/// generating the same group, keeping one element per (first moved point,
/// its image) pair.
fn filter_generators(gens: impl IntoIterator<Item = Permutation>, n: usize) -> Vec<Permutation> {
    let mut table: Vec<Vec<Option<Permutation>>> = vec![vec![None; n]; n];
    for g in gens {
        let mut h = g;
        while let Some(i) = h.first_moved() {
            let j = h.apply(i);
            match &table[i][j] {
                Some(stored) => h = stored.inverse().compose(&h),
                None => {
                    table[i][j] = Some(h);
                    break;
                }
            }
        }
    }
    table.into_iter().flatten().flatten().collect()
}

/// Order of the group generated by `generators`, from a stabilizer chain:
/// at each base point the orbit size is multiplied in and the stabilizer is
/// generated by the (filtered) Schreier generators.
pub fn group_order(generators: &[Permutation]) -> u128 {
    let Some(n) = generators.first().map(Permutation::degree) else {
        return 1;
    };
    let mut gens = filter_generators(generators.iter().cloned(), n);
    let mut order: u128 = 1;
    for base in 0..n {
        if gens.is_empty() {
            break;
        }
        let mut transversal: Vec<Option<Permutation>> = vec![None; n];
        transversal[base] = Some(Permutation::identity(n));
        let mut orbit = vec![base];
        let mut k = 0;
        while k < orbit.len() {
            let u = orbit[k];
            let tu = transversal[u].clone().expect("orbit point has a transversal");
            for s in &gens {
                let v = s.apply(u);
                if transversal[v].is_none() {
                    transversal[v] = Some(s.compose(&tu));
                    orbit.push(v);
                }
            }
            k += 1;
        }
        order *= orbit.len() as u128;
        let schreier = orbit.iter().flat_map(|&u| {
            let tu = transversal[u].as_ref().expect("orbit point");
            let transversal = &transversal;
            gens.iter().map(move |s| {
                let tv = transversal[s.apply(u)].as_ref().expect("orbit is closed");
                tv.inverse().compose(&s.compose(tu))
            })
        });
        gens = filter_generators(schreier.collect::<Vec<_>>(), n);
    }
    order
}

/// Brute-force group enumeration; `None` once more than `limit` elements.
pub fn enumerate_group(generators: &[Permutation], limit: usize) -> Option<HashSet<Permutation>> {
    let n = generators.first()?.degree();
    let mut seen = HashSet::from([Permutation::identity(n)]);
    let mut frontier = vec![Permutation::identity(n)];
    while let Some(g) = frontier.pop() {
        for s in generators {
            let h = s.compose(&g);
            if seen.insert(h.clone()) {
                if seen.len() > limit {
                    return None;
                }
                frontier.push(h);
            }
        }
    }
    Some(seen)
}

/// A closed loop `v0 -> v1 -> v2 -> v0` of straight edges; `v0` is the base.
#[derive(Clone, Debug)]
pub struct TriangleLoop {
    pub label: String,
    pub vertices: [ParameterMatrix; 3],
}

impl TriangleLoop {
    /// One of the compiled-in loops, `gamma1` or `gamma2`.
    pub fn builtin(label: &str) -> Option<Self> {
        let reference = data::reference().reference_loop(label)?;
        Some(Self {
            label: label.to_string(),
            vertices: reference.vertices,
        })
    }

    /// The same triangle traversed the other way round.
    pub fn reversed(&self) -> Self {
        let [a, b, c] = self.vertices.clone();
        Self {
            label: format!("{}^-1", self.label),
            vertices: [a, c, b],
        }
    }

    /// Edge `k` runs from `vertices[k]` to `vertices[k + 1 mod 3]`.
    pub fn edge(&self, k: usize) -> (&ParameterMatrix, &ParameterMatrix) {
        (&self.vertices[k], &self.vertices[(k + 1) % 3])
    }
}

/// A triangle at `base` whose other two vertices perturb rows 2-4 of `base`
/// by complex Gaussians of relative size `spread`; redrawn until every edge
/// keeps its determinant roots at least [`EdgeRoots::DELTA`] from `[0, 1]`.
pub fn random_triangle(base: &ParameterMatrix, spread: f64, seed: u64, index: u64) -> Result<TriangleLoop> {
    let mut stream = Stream::new(seed, Domain::Generic, index);
    let scale = spread * base.frobenius_norm() / 4.0;
    for _ in 0..MAX_REDRAWS {
        let mut vertex = || {
            let mut entries = *base.entries();
            for row in entries.iter_mut().skip(1) {
                for z in row.iter_mut() {
                    *z += Complex64::new(stream.normal(), stream.normal()) * scale;
                }
            }
            ParameterMatrix::new(entries)
        };
        let (Ok(v1), Ok(v2)) = (vertex(), vertex()) else {
            continue;
        };
        let triangle = TriangleLoop {
            label: format!("random:{seed}#{index}"),
            vertices: [base.clone(), v1, v2],
        };
        if validate_loop(&triangle).is_ok_and(|edges| edges.iter().all(|e| !e.near_segment)) {
            return Ok(triangle);
        }
    }
    Err(Error::SamplingExhausted(MAX_REDRAWS))
}

/// Determinant roots of `det(a v_k + (1 - a) v_{k+1})` for the three edges.
pub fn validate_loop(triangle: &TriangleLoop) -> Result<Vec<EdgeRoots>> {
    (0..3)
        .map(|k| {
            let (from, to) = triangle.edge(k);
            tracker::edge_determinant_roots(from, to)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct MonodromyRun {
    pub label: String,
    pub permutation: Permutation,
    /// `None` for zero-length edges.
    pub edge_validity: Vec<Option<EdgeRoots>>,
    /// Orbit-major: entry `3 o + k` is orbit `o + 1` on edge `k`.
    pub path_statuses: Vec<PathResult>,
    /// Whether each tracked endpoint passes the alpha test at its edge's end.
    pub endpoint_certified: Vec<bool>,
    /// Best-to-second-best matching ratio per orbit.
    pub match_ratios: Vec<f64>,
}

/// Index of the base orbit an endpoint lands in, with the matching ratio.
fn match_orbit(orbit: usize, endpoint: &SolutionPoint, base: &[SolutionPoint]) -> Result<(usize, f64)> {
    let rep = canonical_representative(endpoint);
    let mut distances: Vec<(usize, f64)> = base
        .iter()
        .enumerate()
        .map(|(j, b)| (j, quotient_distance(&rep, b)))
        .collect();
    distances.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (best, d1) = distances[0];
    let d2 = distances[1].1;
    let ratio = if d1 == 0.0 { f64::INFINITY } else { d2 / d1 };
    if ratio < MATCH_RATIO {
        return Err(Error::AmbiguousMatching {
            orbit: orbit + 1,
            ratio,
        });
    }
    Ok((best, ratio))
}

/// Tracks every orbit once around the loop and reads off the permutation.
///
/// Orbit `i` (1-based) is the `i`-th start representative; `σ(i) = j` when
/// the endpoint of orbit `i` lies in orbit `j`.
pub fn track_loop(triangle: &TriangleLoop, start: &StartSet, config: &TrackerConfig) -> Result<MonodromyRun> {
    track_loop_from(triangle, start, &start.canonical_representatives(), config)
}

/// As [`track_loop`], but orbit `i` starts from `starts[i]`, which may be any
/// member of that orbit.
pub fn track_loop_from(
    triangle: &TriangleLoop,
    start: &StartSet,
    starts: &[SolutionPoint],
    config: &TrackerConfig,
) -> Result<MonodromyRun> {
    if triangle.vertices[0] != start.base_matrix {
        return Err(Error::parse("loop", "the first vertex must be the base matrix"));
    }
    if starts.len() != SECANT_COUNT {
        return Err(Error::parse("starts", format!("expected {SECANT_COUNT} points, got {}", starts.len())));
    }
    // Zero-length edges have a constant determinant and a trivial path.
    let edge_validity = (0..3)
        .map(|k| {
            let (from, to) = triangle.edge(k);
            match tracker::edge_determinant_roots(from, to) {
                Err(Error::DegenerateCubic { .. }) if from == to => Ok(None),
                other => other.map(Some),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let edge_config = config.for_monodromy();
    let base = start.canonical_representatives();
    let certifiers: Vec<certifier::Certifier> = (0..3)
        .map(|k| certifier::Certifier::new(triangle.edge(k).1, certifier::Mode::Fast))
        .collect();
    let tracked = config.execution.map(base.len(), |o| {
        let mut x = starts[o];
        let mut results = Vec::with_capacity(3);
        let mut certified = Vec::with_capacity(3);
        for k in 0..3 {
            let (from, to) = triangle.edge(k);
            let result = tracker::track_path(from, to, &x, &edge_config, false);
            let endpoint = result.endpoint.filter(|_| result.converged());
            results.push(result);
            match endpoint {
                Some(e) => {
                    certified.push(certifiers[k].alpha_test(&e).is_ok_and(|c| c.certified));
                    x = e;
                }
                None => break,
            }
        }
        (results, certified, x)
    });

    let mut path_statuses = Vec::with_capacity(3 * base.len());
    let mut endpoint_certified = Vec::with_capacity(3 * base.len());
    let mut images = Vec::with_capacity(base.len());
    let mut match_ratios = Vec::with_capacity(base.len());
    for (o, (results, certified, endpoint)) in tracked.into_iter().enumerate() {
        if let Some((k, failed)) = results.iter().enumerate().find(|(_, r)| !r.converged()) {
            return Err(Error::LoopFailure {
                orbit: o + 1,
                edge: k + 1,
                status: failed.status.to_string(),
            });
        }
        let (j, ratio) = match_orbit(o, &endpoint, &base)?;
        images.push(j + 1);
        match_ratios.push(ratio);
        path_statuses.extend(results);
        endpoint_certified.extend(certified);
    }
    let permutation = Permutation::from_images(&images)?;
    Ok(MonodromyRun {
        label: triangle.label.clone(),
        permutation,
        edge_validity,
        path_statuses,
        endpoint_certified,
        match_ratios,
    })
}

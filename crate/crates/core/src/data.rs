//! Reference constants: the base instance, its ten start representatives,
//! the two monodromy loops, the eleven witness matrices and the realized /
//! not-realized tuple tables. Embedded in the binary and also shipped as
//! `data/reference.json`.

use std::sync::LazyLock;

use num_complex::Complex64;
use serde::Deserialize;

use crate::classifier::TripleCount;
use crate::geometry::{ParameterMatrix, SolutionPoint};

pub const REFERENCE_JSON: &str = include_str!("../data/reference.json");

static REFERENCE: LazyLock<Reference> =
    LazyLock::new(|| serde_json::from_str(REFERENCE_JSON).expect("embedded reference data is valid"));

pub fn reference() -> &'static Reference {
    &REFERENCE
}

type TextRows = [[String; 4]; 4];

#[derive(Debug, Deserialize)]
pub struct Reference {
    pub version: u32,
    base_matrix: TextRows,
    base_representatives: Vec<[String; 4]>,
    loop_matrices: std::collections::BTreeMap<String, TextRows>,
    loops: std::collections::BTreeMap<String, LoopData>,
    pub group_order: u64,
    examples: Vec<ExampleData>,
    realized: Vec<[u8; 3]>,
    not_realized: Vec<[u8; 3]>,
    top_triples: Vec<[u32; 4]>,
    pub sample_total: u32,
    real_secant_frequencies: Vec<[u32; 2]>,
}

#[derive(Debug, Deserialize)]
struct LoopData {
    vertices: [String; 3],
    permutation: String,
    edge_roots: [[[String; 2]; 3]; 3],
}

#[derive(Debug, Deserialize)]
struct ExampleData {
    totally_real: u8,
    triple: [u8; 3],
    matrix: TextRows,
    representatives: Vec<[String; 4]>,
}

/// One witness matrix with its stated tuple and listed representatives.
#[derive(Clone, Debug)]
pub struct Witness {
    pub totally_real: u8,
    pub triple: TripleCount,
    pub matrix: ParameterMatrix,
    pub representatives: Vec<SolutionPoint>,
}

/// A reference loop: vertex names, stated permutation (cycle notation) and
/// the determinant roots listed for each edge.
#[derive(Clone, Debug)]
pub struct ReferenceLoop {
    pub label: String,
    pub vertices: [ParameterMatrix; 3],
    pub permutation: String,
    pub edge_roots: [[Complex64; 3]; 3],
}

fn parse_point(p: &[String; 4]) -> SolutionPoint {
    SolutionPoint::real(
        p[0].parse().expect("reference point"),
        p[1].parse().expect("reference point"),
        p[2].parse().expect("reference point"),
        p[3].parse().expect("reference point"),
    )
}

fn triple(t: [u8; 3]) -> TripleCount {
    TripleCount::new(t[0], t[1], t[2])
}

impl Reference {
    /// The base instance `M0` (first row `(1,0,0,0)`).
    pub fn base_matrix(&self) -> ParameterMatrix {
        ParameterMatrix::from_text(self.base_matrix.clone()).expect("base matrix is invertible")
    }

    /// The ten listed base representatives, to four decimals, in their published order.
    pub fn base_representatives(&self) -> Vec<SolutionPoint> {
        self.base_representatives.iter().map(parse_point).collect()
    }

    pub fn named_matrix(&self, name: &str) -> Option<ParameterMatrix> {
        if name == "M0" {
            return Some(self.base_matrix());
        }
        let rows = self.loop_matrices.get(name)?;
        Some(ParameterMatrix::from_text(rows.clone()).expect("loop matrix is invertible"))
    }

    pub fn loop_labels(&self) -> impl Iterator<Item = &str> {
        self.loops.keys().map(String::as_str)
    }

    pub fn reference_loop(&self, label: &str) -> Option<ReferenceLoop> {
        let data = self.loops.get(label)?;
        let vertices = data
            .vertices
            .clone()
            .map(|name| self.named_matrix(&name).expect("loop vertex exists"));
        let edge_roots = data.edge_roots.clone().map(|edge| {
            edge.map(|[re, im]| Complex64::new(re.parse().unwrap(), im.parse().unwrap()))
        });
        Some(ReferenceLoop {
            label: label.to_string(),
            vertices,
            permutation: data.permutation.clone(),
            edge_roots,
        })
    }

    pub fn witnesses(&self) -> Vec<Witness> {
        self.examples
            .iter()
            .map(|e| Witness {
                totally_real: e.totally_real,
                triple: triple(e.triple),
                matrix: ParameterMatrix::from_text(e.matrix.clone()).expect("witness is invertible"),
                representatives: e.representatives.iter().map(parse_point).collect(),
            })
            .collect()
    }

    pub fn realized(&self) -> Vec<TripleCount> {
        self.realized.iter().copied().map(triple).collect()
    }

    pub fn not_realized(&self) -> Vec<TripleCount> {
        self.not_realized.iter().copied().map(triple).collect()
    }

    /// Most frequent tuples of the 100,000-sample uniform run, with counts.
    pub fn top_triples(&self) -> Vec<(TripleCount, u32)> {
        self.top_triples
            .iter()
            .map(|t| (TripleCount::new(t[0] as u8, t[1] as u8, t[2] as u8), t[3]))
            .collect()
    }

    /// `(n_R, count)` pairs of the 100,000-sample uniform run.
    pub fn real_secant_frequencies(&self) -> Vec<(u8, u32)> {
        self.real_secant_frequencies
            .iter()
            .map(|&[n, c]| (n as u8, c))
            .collect()
    }
}

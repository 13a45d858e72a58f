//! Concrete distance functions over `0..n` and the label each induces on a query.
//!
//! Exact models (rational matrices, trees, rational embeddings, partitions)
//! compare distances without rounding. Float embeddings compare with a
//! relative tie band of [`FLOAT_TIE_TOLERANCE`].

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::ser::{Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::query::{Comparison, Label, Pair, Query, QuerySet};

pub type Rational = BigRational;

/// Distances within this relative band of each other count as a tie.
pub const FLOAT_TIE_TOLERANCE: f64 = 1e-9;

pub fn rational_string(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

fn rat_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// How an embedding turns coordinates into a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// `||f(x) - f(y)||_p`, smaller is closer.
    Lp(u32),
    /// Cosine similarity, larger is closer.
    Cosine,
    /// Raw inner product, larger is closer.
    InnerProduct,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coordinates {
    Exact(Vec<Vec<Rational>>),
    Float(Vec<Vec<f64>>),
}

impl Coordinates {
    fn len(&self) -> usize {
        match self {
            Coordinates::Exact(c) => c.len(),
            Coordinates::Float(c) => c.len(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Coordinates::Exact(c) => c.first().map_or(0, Vec::len),
            Coordinates::Float(c) => c.first().map_or(0, Vec::len),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    geometry: Geometry,
    coords: Coordinates,
}

impl Embedding {
    pub fn new(geometry: Geometry, coords: Coordinates) -> Result<Self> {
        if let Geometry::Lp(0) = geometry {
            return Err(Error::InvalidModel("p must be at least 1".into()));
        }
        let dim = coords.dim();
        let ragged = match &coords {
            Coordinates::Exact(c) => c.iter().any(|r| r.len() != dim),
            Coordinates::Float(c) => c.iter().any(|r| r.len() != dim),
        };
        if ragged {
            return Err(Error::InvalidModel("embedding rows differ in length".into()));
        }
        if let Coordinates::Float(c) = &coords {
            if c.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::InvalidModel("non-finite coordinate".into()));
            }
        }
        Ok(Embedding { geometry, coords })
    }

    pub fn float(geometry: Geometry, points: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(geometry, Coordinates::Float(points))
    }

    pub fn exact(geometry: Geometry, points: Vec<Vec<Rational>>) -> Result<Self> {
        Self::new(geometry, Coordinates::Exact(points))
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn coords(&self) -> &Coordinates {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.len() == 0
    }

    /// Coordinates as floats (lossy for exact embeddings).
    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        match &self.coords {
            Coordinates::Float(c) => c.clone(),
            Coordinates::Exact(c) => c
                .iter()
                .map(|r| r.iter().map(rat_to_f64).collect())
                .collect(),
        }
    }

    fn exact_key(&self, pts: &[Vec<Rational>], pair: Pair) -> Rational {
        let (u, v) = (&pts[pair.lo()], &pts[pair.hi()]);
        match self.geometry {
            Geometry::Lp(p) => u
                .iter()
                .zip(v)
                .map(|(a, b)| num_traits::pow((a - b).abs(), p as usize))
                .fold(Rational::zero(), |s, t| s + t),
            Geometry::InnerProduct | Geometry::Cosine => dot_exact(u, v),
        }
    }

    fn compare_exact(&self, pts: &[Vec<Rational>], p: Pair, q: Pair) -> Result<Ordering> {
        match self.geometry {
            // p-th powers of the norms order the same way as the norms
            Geometry::Lp(_) => Ok(self.exact_key(pts, p).cmp(&self.exact_key(pts, q))),
            // larger inner product is closer, so compare reversed
            Geometry::InnerProduct => Ok(self.exact_key(pts, q).cmp(&self.exact_key(pts, p))),
            Geometry::Cosine => {
                let cos_p = self.cosine_parts(pts, p)?;
                let cos_q = self.cosine_parts(pts, q)?;
                Ok(compare_ratio_sqrt(&cos_q, &cos_p))
            }
        }
    }

    /// Cosine of a pair as `(inner product, product of squared norms)`.
    fn cosine_parts(&self, pts: &[Vec<Rational>], pair: Pair) -> Result<(Rational, Rational)> {
        let (u, v) = (&pts[pair.lo()], &pts[pair.hi()]);
        let nu = dot_exact(u, u);
        let nv = dot_exact(v, v);
        if nu.is_zero() || nv.is_zero() {
            return Err(Error::InvalidModel(
                "cosine similarity undefined for the zero vector".into(),
            ));
        }
        Ok((dot_exact(u, v), nu * nv))
    }

    fn float_distance(&self, pts: &[Vec<f64>], pair: Pair) -> Result<f64> {
        let (u, v) = (&pts[pair.lo()], &pts[pair.hi()]);
        Ok(match self.geometry {
            Geometry::Lp(p) => lp_distance(u, v, p),
            Geometry::InnerProduct => -dot(u, v),
            Geometry::Cosine => {
                let nu = dot(u, u).sqrt();
                let nv = dot(v, v).sqrt();
                if nu == 0.0 || nv == 0.0 {
                    return Err(Error::InvalidModel(
                        "cosine similarity undefined for the zero vector".into(),
                    ));
                }
                1.0 - dot(u, v) / (nu * nv)
            }
        })
    }
}

/// Compare `a.0 / sqrt(a.1)` with `b.0 / sqrt(b.1)` exactly (`a.1, b.1 > 0`).
fn compare_ratio_sqrt(a: &(Rational, Rational), b: &(Rational, Rational)) -> Ordering {
    let sa = a.0.signum();
    let sb = b.0.signum();
    if sa != sb {
        return sa.cmp(&sb);
    }
    // same sign: compare a0^2 * b1 with b0^2 * a1, reversed when negative
    let lhs = &a.0 * &a.0 * &b.1;
    let rhs = &b.0 * &b.0 * &a.1;
    if sa.is_negative() {
        rhs.cmp(&lhs)
    } else {
        lhs.cmp(&rhs)
    }
}

fn dot_exact(u: &[Rational], v: &[Rational]) -> Rational {
    u.iter()
        .zip(v)
        .map(|(a, b)| a * b)
        .fold(Rational::zero(), |s, t| s + t)
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub(crate) fn lp_distance(u: &[f64], v: &[f64], p: u32) -> f64 {
    match p {
        1 => u.iter().zip(v).map(|(a, b)| (a - b).abs()).sum(),
        2 => u
            .iter()
            .zip(v)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt(),
        _ => u
            .iter()
            .zip(v)
            .map(|(a, b)| (a - b).abs().powi(p as i32))
            .sum::<f64>()
            .powf(1.0 / p as f64),
    }
}

/// Symmetric matrix of pairwise distances, rational entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<Rational>,
}

impl DistanceMatrix {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidModel("matrix is not square".into()));
        }
        for i in 0..n {
            if !rows[i][i].is_zero() {
                return Err(Error::InvalidModel("nonzero diagonal".into()));
            }
            for j in 0..n {
                if rows[i][j].is_negative() {
                    return Err(Error::InvalidModel("negative distance".into()));
                }
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidModel("matrix is not symmetric".into()));
                }
            }
        }
        Ok(DistanceMatrix {
            n,
            values: rows.into_iter().flatten().collect(),
        })
    }

    /// Build from a per-pair function; the diagonal is zero.
    pub fn from_pairs(n: usize, mut value: impl FnMut(Pair) -> Rational) -> Self {
        let mut values = vec![Rational::zero(); n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = value(Pair::new(i, j));
                values[i * n + j] = v.clone();
                values[j * n + i] = v;
            }
        }
        DistanceMatrix { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.values[i * self.n + j]
    }

    /// Every triangle inequality `d(i,k) <= d(i,j) + d(j,k)` holds.
    pub fn is_metric(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| {
            (0..n).all(|j| (0..n).all(|k| self.get(i, k) <= &(self.get(i, j) + self.get(j, k))))
        })
    }
}

/// Tree with nonnegative rational edge weights; each point sits on its own leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTree {
    vertex_count: usize,
    edges: Vec<(usize, usize, Rational)>,
    leaf_of: Vec<usize>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl WeightedTree {
    pub fn new(
        vertex_count: usize,
        edges: Vec<(usize, usize, Rational)>,
        leaf_of: Vec<usize>,
    ) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidModel(m.to_string()));
        if vertex_count == 0 {
            return bad("tree has no vertices");
        }
        if edges.len() + 1 != vertex_count {
            return bad("a tree on V vertices has V - 1 edges");
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (e, (u, v, w)) in edges.iter().enumerate() {
            if *u >= vertex_count || *v >= vertex_count || u == v {
                return bad("edge endpoint out of range or self-loop");
            }
            if w.is_negative() {
                return bad("negative edge weight");
            }
            adjacency[*u].push((*v, e));
            adjacency[*v].push((*u, e));
        }
        // connected + V-1 edges => acyclic
        let mut seen = vec![false; vertex_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &(y, _) in &adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return bad("tree is not connected");
        }
        let mut used = vec![false; vertex_count];
        for &leaf in &leaf_of {
            if leaf >= vertex_count || used[leaf] {
                return bad("points must map to distinct vertices");
            }
            if vertex_count > 1 && adjacency[leaf].len() != 1 {
                return bad("points must map to leaves");
            }
            used[leaf] = true;
        }
        Ok(WeightedTree {
            vertex_count,
            edges,
            leaf_of,
            adjacency,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize, Rational)] {
        &self.edges
    }

    pub fn leaf_of(&self) -> &[usize] {
        &self.leaf_of
    }

    /// Edge indices on the path between two vertices.
    pub fn path_edges(&self, from: usize, to: usize) -> Vec<usize> {
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.vertex_count];
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(x) = stack.pop() {
            if x == to {
                break;
            }
            for &(y, e) in &self.adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some((x, e));
                    stack.push(y);
                }
            }
        }
        let mut path = Vec::new();
        let mut at = to;
        while let Some((prev, e)) = parent[at] {
            path.push(e);
            at = prev;
        }
        path
    }

    pub fn distance(&self, a: usize, b: usize) -> Rational {
        self.path_edges(self.leaf_of[a], self.leaf_of[b])
            .into_iter()
            .map(|e| self.edges[e].2.clone())
            .fold(Rational::zero(), |s, w| s + w)
    }
}

/// Class assignment; distance is 0 inside a class and 1 across classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    class_of: Vec<usize>,
    classes: usize,
}

impl Partition {
    /// `classes` may exceed the ids in use (an empty class is still a class).
    pub fn new(class_of: Vec<usize>, classes: usize) -> Result<Self> {
        if class_of.iter().any(|&c| c >= classes) {
            return Err(Error::InvalidModel("class id out of range".into()));
        }
        Ok(Partition { class_of, classes })
    }

    pub fn class_of(&self) -> &[usize] {
        &self.class_of
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn same(&self, a: usize, b: usize) -> bool {
        self.class_of[a] == self.class_of[b]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistanceModel {
    Matrix(DistanceMatrix),
    Embedding(Embedding),
    WeightedTree(WeightedTree),
    Partition(Partition),
}

impl DistanceModel {
    pub fn point_count(&self) -> usize {
        match self {
            DistanceModel::Matrix(m) => m.n,
            DistanceModel::Embedding(e) => e.len(),
            DistanceModel::WeightedTree(t) => t.leaf_of.len(),
            DistanceModel::Partition(p) => p.class_of.len(),
        }
    }

    pub fn is_exact(&self) -> bool {
        match self {
            DistanceModel::Embedding(e) => matches!(e.coords, Coordinates::Exact(_)),
            _ => true,
        }
    }

    fn check_pair(&self, pair: Pair) -> Result<()> {
        let n = self.point_count();
        if pair.hi() >= n {
            return Err(Error::Index {
                index: pair.hi(),
                n,
            });
        }
        Ok(())
    }

    /// Order of `rho(p)` relative to `rho(q)`: `Less` means `p` is closer.
    /// Float models report `Equal` inside the tie band.
    pub fn compare(&self, p: Pair, q: Pair) -> Result<Ordering> {
        self.check_pair(p)?;
        self.check_pair(q)?;
        match self {
            DistanceModel::Matrix(m) => Ok(m.get(p.lo(), p.hi()).cmp(m.get(q.lo(), q.hi()))),
            DistanceModel::WeightedTree(t) => {
                Ok(t.distance(p.lo(), p.hi()).cmp(&t.distance(q.lo(), q.hi())))
            }
            DistanceModel::Partition(part) => {
                let dp = !part.same(p.lo(), p.hi()) as u8;
                let dq = !part.same(q.lo(), q.hi()) as u8;
                Ok(dp.cmp(&dq))
            }
            DistanceModel::Embedding(e) => match &e.coords {
                Coordinates::Exact(pts) => e.compare_exact(pts, p, q),
                Coordinates::Float(pts) => {
                    let dp = e.float_distance(pts, p)?;
                    let dq = e.float_distance(pts, q)?;
                    let band = FLOAT_TIE_TOLERANCE * dp.abs().max(dq.abs()).max(1.0);
                    if (dp - dq).abs() <= band {
                        Ok(Ordering::Equal)
                    } else {
                        Ok(dp.total_cmp(&dq))
                    }
                }
            },
        }
    }

    /// Distance of a pair as a float, for reporting margins. Similarity
    /// geometries report a dissimilarity (`1 - cos`, `-<u,v>`).
    pub fn distance_f64(&self, pair: Pair) -> Result<f64> {
        self.check_pair(pair)?;
        let (a, b) = (pair.lo(), pair.hi());
        match self {
            DistanceModel::Matrix(m) => Ok(rat_to_f64(m.get(a, b))),
            DistanceModel::WeightedTree(t) => Ok(rat_to_f64(&t.distance(a, b))),
            DistanceModel::Partition(p) => Ok(if p.same(a, b) { 0.0 } else { 1.0 }),
            DistanceModel::Embedding(e) => e.float_distance(&e.to_f64(), pair),
        }
    }

    /// The label this model induces on a query.
    ///
    /// Ties raise [`Error::Tie`], except that a partition reports
    /// [`Label::Equal`] for a triplet whose candidates sit at equal distance.
    pub fn evaluate_label(&self, query: &Query) -> Result<Label> {
        let pairs = query.candidate_pairs();
        if pairs.len() == 2 {
            return match self.compare(pairs[0], pairs[1])? {
                Ordering::Less => Ok(Label::Positive(0)),
                Ordering::Greater => Ok(Label::Positive(1)),
                Ordering::Equal => match (self, query) {
                    (DistanceModel::Partition(_), Query::Triplet { .. }) => Ok(Label::Equal),
                    _ => Err(Error::Tie { query: 0 }),
                },
            };
        }
        let mut best = 0;
        let mut tied = false;
        for i in 1..pairs.len() {
            match self.compare(pairs[i], pairs[best])? {
                Ordering::Less => {
                    best = i;
                    tied = false;
                }
                Ordering::Equal => tied = true,
                Ordering::Greater => {}
            }
        }
        if tied {
            return Err(Error::Tie { query: 0 });
        }
        Ok(Label::Positive(best))
    }

    pub fn evaluate_labels(&self, qs: &QuerySet) -> Result<Vec<Label>> {
        qs.queries()
            .iter()
            .enumerate()
            .map(|(i, q)| {
                self.evaluate_label(q).map_err(|e| match e {
                    Error::Tie { .. } => Error::Tie { query: i },
                    other => other,
                })
            })
            .collect()
    }

    /// Whether the model reproduces every label exactly.
    pub fn satisfies(&self, qs: &QuerySet, labels: &[Label]) -> bool {
        match self.evaluate_labels(qs) {
            Ok(found) => found == labels,
            Err(_) => false,
        }
    }

    /// Smallest `rho(farther) - rho(closer)` over the strict comparisons, as a float.
    pub fn margin(&self, comparisons: &[Comparison]) -> Result<Option<f64>> {
        let mut best: Option<f64> = None;
        for c in comparisons {
            if let Comparison::Less { closer, farther } = c {
                let slack = self.distance_f64(*farther)? - self.distance_f64(*closer)?;
                best = Some(best.map_or(slack, |b: f64| b.min(slack)));
            }
        }
        Ok(best)
    }
}

impl Serialize for DistanceModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl DistanceModel {
    pub fn to_json(&self) -> Value {
        let rats = |row: &[Rational]| row.iter().map(rational_string).collect::<Vec<_>>();
        match self {
            DistanceModel::Matrix(m) => json!({
                "type": "matrix",
                "values": (0..m.n).map(|i| rats(&m.values[i * m.n..(i + 1) * m.n])).collect::<Vec<_>>(),
            }),
            DistanceModel::Embedding(e) => {
                let geometry = match e.geometry {
                    Geometry::Lp(p) => json!({"lp": p}),
                    Geometry::Cosine => json!("cosine"),
                    Geometry::InnerProduct => json!("inner_product"),
                };
                let points = match &e.coords {
                    Coordinates::Exact(c) => json!(c.iter().map(|r| rats(r)).collect::<Vec<_>>()),
                    Coordinates::Float(c) => json!(c),
                };
                json!({"type": "embedding", "geometry": geometry, "points": points})
            }
            DistanceModel::WeightedTree(t) => json!({
                "type": "tree",
                "vertices": t.vertex_count,
                "edges": t.edges.iter().map(|(u, v, w)| json!([u, v, rational_string(w)])).collect::<Vec<_>>(),
                "leaf_of": t.leaf_of,
            }),
            DistanceModel::Partition(p) => json!({
                "type": "partition",
                "class_of": p.class_of,
                "classes": p.classes,
            }),
        }
    }
}

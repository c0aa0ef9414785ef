//! Known boundaries and the sets of them that admit analytic updates.
//!
//! A boundary fixes the coordinates `x_J = alpha` for a nonempty index set
//! `J` and leaves the rest free. Indices are zero-based throughout.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on shared boundary locations when deciding whether
/// two boundaries intersect.
pub const INTERSECTION_TOL: f64 = 1e-12;

/// Cheap evaluation of the simulator on a boundary.
///
/// Implementations must be pure: the engine memoizes results and may call
/// them from several threads.
pub trait BoundarySolver: Send + Sync {
    fn evaluate(&self, x: &[f64]) -> std::result::Result<f64, String>;
}

struct FnSolver<F>(F);

impl<F> BoundarySolver for FnSolver<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn evaluate(&self, x: &[f64]) -> std::result::Result<f64, String> {
        Ok((self.0)(x))
    }
}

/// Where a boundary solver comes from, for config files and persisted
/// emulators: a builtin name or `training-table:<path>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum SolverSpec {
    Builtin(String),
    TrainingTable(String),
}

impl From<SolverSpec> for String {
    fn from(s: SolverSpec) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for SolverSpec {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        match s.strip_prefix("training-table:") {
            Some("") => Err("empty training-table path".into()),
            Some(path) => Ok(SolverSpec::TrainingTable(path.to_string())),
            None if s.is_empty() => Err("empty solver name".into()),
            None => Ok(SolverSpec::Builtin(s)),
        }
    }
}

impl fmt::Display for SolverSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverSpec::Builtin(name) => f.write_str(name),
            SolverSpec::TrainingTable(path) => write!(f, "training-table:{path}"),
        }
    }
}

/// Serializable description of a boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub label: String,
    pub normal_indices: Vec<usize>,
    pub alpha: Vec<f64>,
    pub solver: SolverSpec,
}

/// A hyperplane `x_J = alpha` on which the simulator is known.
#[derive(Clone)]
pub struct Boundary {
    label: String,
    p: usize,
    normal: Vec<usize>,
    alpha: Vec<f64>,
    free: Vec<usize>,
    solver: Arc<dyn BoundarySolver>,
    spec: Option<SolverSpec>,
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Boundary")
            .field("label", &self.label)
            .field("p", &self.p)
            .field("normal", &self.normal)
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl Boundary {
    /// `normal` and `alpha` are paired; they are sorted by index here.
    pub fn new(
        label: impl Into<String>,
        p: usize,
        normal: Vec<usize>,
        alpha: Vec<f64>,
        solver: Arc<dyn BoundarySolver>,
    ) -> Result<Self> {
        let label = label.into();
        let invalid = |reason: String| Error::InvalidBoundary {
            label: label.clone(),
            reason,
        };
        if normal.is_empty() {
            return Err(invalid("no normal directions".into()));
        }
        if normal.len() != alpha.len() {
            return Err(invalid(format!(
                "{} normal indices but {} locations",
                normal.len(),
                alpha.len()
            )));
        }
        if let Some(&j) = normal.iter().find(|&&j| j >= p) {
            return Err(invalid(format!("index {j} out of range for p = {p}")));
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(invalid("non-finite location".into()));
        }
        let mut pairs: Vec<(usize, f64)> = normal.into_iter().zip(alpha).collect();
        pairs.sort_by_key(|&(j, _)| j);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("repeated normal index".into()));
        }
        let (normal, alpha): (Vec<usize>, Vec<f64>) = pairs.into_iter().unzip();
        let free = crate::kernel::complement(p, &normal);
        Ok(Boundary {
            label,
            p,
            normal,
            alpha,
            free,
            solver,
            spec: None,
        })
    }

    /// Boundary whose solver is a plain function of the on-boundary point.
    pub fn from_fn<F>(
        label: impl Into<String>,
        p: usize,
        normal: Vec<usize>,
        alpha: Vec<f64>,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(label, p, normal, alpha, Arc::new(FnSolver(f)))
    }

    /// Attach the serializable provenance of the solver.
    pub fn with_spec(mut self, spec: SolverSpec) -> Self {
        self.spec = Some(spec);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The same boundary and solver under another label.
    pub fn relabeled(&self, label: &str) -> Self {
        Boundary {
            label: label.to_string(),
            ..self.clone()
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Sorted normal directions `J`.
    pub fn normal(&self) -> &[usize] {
        &self.normal
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Directions along the boundary (complement of `J`).
    pub fn free(&self) -> &[usize] {
        &self.free
    }

    /// Number of normal directions; the boundary has dimension `p - k`.
    pub fn codim(&self) -> usize {
        self.normal.len()
    }

    pub fn solver_spec(&self) -> Option<&SolverSpec> {
        self.spec.as_ref()
    }

    pub fn to_spec(&self) -> Option<BoundarySpec> {
        self.spec.as_ref().map(|s| BoundarySpec {
            label: self.label.clone(),
            normal_indices: self.normal.clone(),
            alpha: self.alpha.clone(),
            solver: s.clone(),
        })
    }

    /// Location along direction `j`, if `j` is normal to the boundary.
    pub fn alpha_at(&self, j: usize) -> Option<f64> {
        self.normal.binary_search(&j).ok().map(|i| self.alpha[i])
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.normal
            .iter()
            .zip(&self.alpha)
            .all(|(&j, &a)| (x[j] - a).abs() <= tol)
    }

    /// Orthogonal projection onto the boundary.
    pub fn project_point(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.project_in_place(&mut y);
        y
    }

    pub(crate) fn project_in_place(&self, x: &mut [f64]) {
        for (&j, &a) in self.normal.iter().zip(&self.alpha) {
            x[j] = a;
        }
    }

    /// Evaluate the solver at a point that lies exactly on the boundary.
    pub fn solve(&self, x: &[f64]) -> Result<f64> {
        debug_assert!(self.contains(x, 0.0), "solver queried off boundary `{}`", self.label);
        let v = self.solver.evaluate(x).map_err(|reason| Error::Solver {
            label: self.label.clone(),
            reason,
        })?;
        if !v.is_finite() {
            return Err(Error::Solver {
                label: self.label.clone(),
                reason: format!("non-finite value at {x:?}"),
            });
        }
        Ok(v)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// Result of projecting a point onto a boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    /// `x^K`
    pub point: Vec<f64>,
    /// `a^K = x - x^K`, zero off the normal directions.
    pub offset: Vec<f64>,
}

pub fn project(x: &[f64], b: &Boundary) -> Result<Projection> {
    b.check_point(x)?;
    let point = b.project_point(x);
    let offset = x.iter().zip(&point).map(|(a, b)| a - b).collect();
    Ok(Projection { point, offset })
}

/// Project onto the listed boundaries in reverse order: the last one first.
pub fn sequential_project(x: &[f64], bs: &[&Boundary]) -> Result<Vec<f64>> {
    if bs.is_empty() {
        return Err(Error::InvalidArgument("no boundaries to project onto".into()));
    }
    let mut y = x.to_vec();
    for b in bs.iter().rev() {
        b.check_point(&y)?;
        b.project_in_place(&mut y);
    }
    Ok(y)
}

/// Which member of a classified pair is the parent of a nested chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairMember {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairClass {
    /// The planes meet: locations agree on every shared normal direction.
    OrthogonalIntersecting,
    /// Normal sets nest and the planes are disjoint. The parent has the
    /// smaller normal set (the larger dimension) and must be used first.
    ParallelNested { parent: PairMember },
    /// Same normal set and same location.
    Identical,
    /// Neither intersecting nor nested.
    Invalid,
}

pub fn classify_pair(b1: &Boundary, b2: &Boundary) -> PairClass {
    classify_pair_tol(b1, b2, INTERSECTION_TOL)
}

pub fn classify_pair_tol(b1: &Boundary, b2: &Boundary, tol: f64) -> PairClass {
    let agree = b1
        .normal
        .iter()
        .zip(&b1.alpha)
        .all(|(&j, &a)| b2.alpha_at(j).is_none_or(|a2| (a - a2).abs() <= tol));
    let first_in_second = b1.normal.iter().all(|j| b2.normal.binary_search(j).is_ok());
    let second_in_first = b2.normal.iter().all(|j| b1.normal.binary_search(j).is_ok());
    match (agree, first_in_second, second_in_first) {
        (true, true, true) => PairClass::Identical,
        (true, _, _) => PairClass::OrthogonalIntersecting,
        (false, true, _) => PairClass::ParallelNested {
            parent: PairMember::First,
        },
        (false, false, true) => PairClass::ParallelNested {
            parent: PairMember::Second,
        },
        (false, false, false) => PairClass::Invalid,
    }
}

/// Shortest-distance vector from `child` to `parent`, where `parent`'s
/// normal set is contained in `child`'s: `alpha_parent - alpha_child` on
/// the parent's directions, zero elsewhere.
pub fn boundary_distance(parent: &Boundary, child: &Boundary) -> Result<Vec<f64>> {
    let nested = parent.normal.iter().all(|j| child.normal.binary_search(j).is_ok());
    if !nested || parent.p != child.p {
        return Err(Error::InvalidArgument(format!(
            "`{}` is not nested in `{}`",
            child.label, parent.label
        )));
    }
    let mut d = vec![0.0; parent.p];
    for (&j, &a) in parent.normal.iter().zip(&parent.alpha) {
        d[j] = a - child.alpha_at(j).expect("nested index");
    }
    Ok(d)
}

/// A validated collection of boundaries together with the order in which
/// the engine conditions on them.
#[derive(Clone, Debug)]
pub struct BoundarySet {
    boundaries: Vec<Boundary>,
    pair_classes: Vec<Vec<PairClass>>,
    chain_order: Vec<usize>,
}

impl BoundarySet {
    /// The set with no boundaries; adjusting by it leaves the prior alone.
    pub fn empty() -> Self {
        BoundarySet {
            boundaries: Vec::new(),
            pair_classes: Vec::new(),
            chain_order: Vec::new(),
        }
    }

    pub fn boundaries(&self) -> &[Boundary] {
        &self.boundaries
    }

    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }

    /// `pair_classes()[i][j] == classify_pair(b_i, b_j)` (input order).
    pub fn pair_classes(&self) -> &[Vec<PairClass>] {
        &self.pair_classes
    }

    /// Indices into [`Self::boundaries`] in update order.
    pub fn chain_order(&self) -> &[usize] {
        &self.chain_order
    }

    pub fn ordered(&self) -> impl Iterator<Item = &Boundary> {
        self.chain_order.iter().map(|&i| &self.boundaries[i])
    }

    pub fn get(&self, label: &str) -> Option<&Boundary> {
        self.boundaries.iter().find(|b| b.label == label)
    }

    /// True if `x` lies on any boundary of the set.
    pub fn on_any(&self, x: &[f64], tol: f64) -> bool {
        self.boundaries.iter().any(|b| b.contains(x, tol))
    }
}

pub fn validate_set(bs: Vec<Boundary>) -> Result<BoundarySet> {
    validate_set_tol(bs, INTERSECTION_TOL)
}

/// Check every pair and compute the update order.
///
/// Parents of nested chains come before their children; otherwise input
/// order is kept. Equal normal sets impose no order.
pub fn validate_set_tol(bs: Vec<Boundary>, tol: f64) -> Result<BoundarySet> {
    let h = bs.len();
    if let Some(b) = bs.iter().find(|b| b.p != bs[0].p) {
        return Err(Error::InvalidBoundary {
            label: b.label.clone(),
            reason: format!("input dimension {} differs from {}", b.p, bs[0].p),
        });
    }
    let pair_classes: Vec<Vec<PairClass>> = bs
        .iter()
        .map(|a| bs.iter().map(|b| classify_pair_tol(a, b, tol)).collect())
        .collect();
    let mut invalid = Vec::new();
    let mut identical = Vec::new();
    for i in 0..h {
        for j in i + 1..h {
            let labels = (bs[i].label.clone(), bs[j].label.clone());
            match pair_classes[i][j] {
                PairClass::Invalid => invalid.push(labels),
                PairClass::Identical => identical.push(labels),
                _ => {}
            }
        }
    }
    if !invalid.is_empty() {
        return Err(Error::InvalidPair { pairs: invalid });
    }
    if !identical.is_empty() {
        return Err(Error::IdenticalBoundaries { pairs: identical });
    }

    // must_precede[i][j]: i is a strict parent of j
    let must_precede = |i: usize, j: usize| {
        matches!(pair_classes[i][j], PairClass::ParallelNested { .. })
            && bs[i].codim() < bs[j].codim()
    };
    let mut placed = vec![false; h];
    let mut chain_order = Vec::with_capacity(h);
    while chain_order.len() < h {
        let next = (0..h)
            .find(|&j| !placed[j] && (0..h).all(|i| placed[i] || !must_precede(i, j)))
            .expect("strict nesting is acyclic");
        placed[next] = true;
        chain_order.push(next);
    }
    Ok(BoundarySet {
        boundaries: bs,
        pair_classes,
        chain_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn plane(label: &str, p: usize, normal: Vec<usize>, alpha: Vec<f64>) -> Boundary {
        Boundary::from_fn(label, p, normal, alpha, |_| 0.0).unwrap()
    }

    // The 3D example: K: (x2,x3) = (0,0), L: (x2,x3) = (0,-pi), M: x1 = 0.
    fn klm() -> (Boundary, Boundary, Boundary) {
        (
            plane("K", 3, vec![1, 2], vec![0.0, 0.0]),
            plane("L", 3, vec![1, 2], vec![0.0, -PI]),
            plane("M", 3, vec![0], vec![0.0]),
        )
    }

    #[test]
    fn construction_rules() {
        assert!(Boundary::from_fn("e", 3, vec![], vec![], |_| 0.0).is_err());
        assert!(Boundary::from_fn("d", 3, vec![1, 1], vec![0.0, 0.0], |_| 0.0).is_err());
        assert!(Boundary::from_fn("r", 3, vec![3], vec![0.0], |_| 0.0).is_err());
        assert!(Boundary::from_fn("n", 3, vec![0], vec![f64::NAN], |_| 0.0).is_err());
        let b = plane("s", 3, vec![2, 0], vec![5.0, 1.0]);
        assert_eq!(b.normal(), &[0, 2]);
        assert_eq!(b.alpha(), &[1.0, 5.0]);
        assert_eq!(b.free(), &[1]);
    }

    #[test]
    fn projection_examples() {
        let (k, _, _) = klm();
        let pr = project(&[1.0, 0.0, 0.0], &k).unwrap();
        assert_eq!(pr.point, vec![1.0, 0.0, 0.0]);
        assert_eq!(pr.offset, vec![0.0; 3]);
        let pr = project(&[PI / 2.0, 0.0, PI / 2.0], &k).unwrap();
        assert_eq!(pr.point, vec![PI / 2.0, 0.0, 0.0]);
        assert_eq!(pr.offset, vec![0.0, 0.0, PI / 2.0]);
        let b = plane("x1", 3, vec![0], vec![0.0]);
        let pr = project(&[-PI, 1.0, 2.0], &b).unwrap();
        assert_eq!(pr.point, vec![0.0, 1.0, 2.0]);
        assert_eq!(pr.offset, vec![-PI, 0.0, 0.0]);
        assert!(project(&[0.0; 2], &b).is_err());
    }

    #[test]
    fn sequential_projection_examples() {
        let (k, l, _) = klm();
        let x = [1.0, 0.1, 1.0];
        assert_eq!(sequential_project(&x, &[&k]).unwrap(), k.project_point(&x));
        // (L, K): onto L first, then K
        assert_eq!(sequential_project(&x, &[&k, &l]).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(sequential_project(&x, &[&l, &k]).unwrap(), vec![1.0, 0.0, -PI]);
        assert!(sequential_project(&x, &[]).is_err());
    }

    #[test]
    fn distance_examples() {
        let (k, l, _) = klm();
        assert_eq!(boundary_distance(&k, &l).unwrap(), vec![0.0, 0.0, PI]);
        let a = plane("a", 3, vec![0], vec![0.3]);
        let b = plane("b", 3, vec![0, 1], vec![0.1, 0.5]);
        let d = boundary_distance(&a, &b).unwrap();
        assert!((d[0] - 0.2).abs() < 1e-15 && d[1] == 0.0 && d[2] == 0.0);
        assert!(boundary_distance(&b, &a).is_err());
        let m = plane("m", 3, vec![0], vec![0.0]);
        assert!(boundary_distance(&k, &m).is_err());
    }

    #[test]
    fn classification_examples() {
        let (k, l, m) = klm();
        assert_eq!(classify_pair(&k, &m), PairClass::OrthogonalIntersecting);
        assert_eq!(
            classify_pair(&k, &l),
            PairClass::ParallelNested {
                parent: PairMember::First
            }
        );
        assert_eq!(classify_pair(&k, &k.clone()), PairClass::Identical);
        let b1 = plane("b1", 3, vec![0, 1], vec![0.0, 0.0]);
        let b2 = plane("b2", 3, vec![1, 2], vec![1.0, 0.0]);
        assert_eq!(classify_pair(&b1, &b2), PairClass::Invalid);
        // strictly nested, disjoint
        let wide = plane("w", 3, vec![0], vec![1.0]);
        let narrow = plane("n", 3, vec![0, 2], vec![0.0, 0.0]);
        assert_eq!(
            classify_pair(&narrow, &wide),
            PairClass::ParallelNested {
                parent: PairMember::Second
            }
        );
    }

    #[test]
    fn validate_examples() {
        let (k, l, m) = klm();
        let set = validate_set(vec![k.clone(), l.clone(), m.clone()]).unwrap();
        assert_eq!(set.chain_order(), &[0, 1, 2]);
        let b1 = plane("b1", 3, vec![0, 1], vec![0.0, 0.0]);
        let b2 = plane("b2", 3, vec![1, 2], vec![1.0, 0.0]);
        match validate_set(vec![b1, b2]) {
            Err(Error::InvalidPair { pairs }) => assert_eq!(pairs, vec![("b1".into(), "b2".into())]),
            other => panic!("expected InvalidPair, got {other:?}"),
        }
        assert!(matches!(
            validate_set(vec![k.clone(), k.clone()]),
            Err(Error::IdenticalBoundaries { .. })
        ));
        assert_eq!(validate_set(vec![m]).unwrap().chain_order(), &[0]);
        assert!(validate_set(vec![]).unwrap().is_empty());
    }

    #[test]
    fn chain_order_puts_parents_first() {
        let child = plane("child", 4, vec![0, 1, 2], vec![1.0, 1.0, 1.0]);
        let mid = plane("mid", 4, vec![0, 1], vec![2.0, 2.0]);
        let top = plane("top", 4, vec![0], vec![3.0]);
        let orth = plane("orth", 4, vec![3], vec![0.0]);
        let set = validate_set(vec![child, orth, mid, top]).unwrap();
        let labels: Vec<&str> = set.ordered().map(|b| b.label()).collect();
        assert_eq!(labels, vec!["orth", "top", "mid", "child"]);
    }

    proptest! {
        #[test]
        fn projection_idempotent(x in prop::collection::vec(-5.0..5.0f64, 3)) {
            let (k, _, m) = klm();
            for b in [&k, &m] {
                let once = project(&x, b).unwrap();
                let twice = project(&once.point, b).unwrap();
                prop_assert_eq!(&twice.point, &once.point);
                prop_assert!(twice.offset.iter().all(|v| *v == 0.0));
                for j in b.free() {
                    prop_assert_eq!(once.offset[*j], 0.0);
                }
            }
        }

        #[test]
        fn orthogonal_projection_order_free(
            x in prop::collection::vec(-5.0..5.0f64, 4),
            a in -2.0..2.0f64,
            c in -2.0..2.0f64,
        ) {
            // random intersecting pair sharing direction 1
            let b1 = plane("b1", 4, vec![0, 1], vec![a, c]);
            let b2 = plane("b2", 4, vec![1, 3], vec![c, -a]);
            prop_assert_eq!(classify_pair(&b1, &b2), PairClass::OrthogonalIntersecting);
            prop_assert_eq!(
                sequential_project(&x, &[&b1, &b2]).unwrap(),
                sequential_project(&x, &[&b2, &b1]).unwrap()
            );
        }

        #[test]
        fn classification_symmetric(a in -1.0..1.0f64, c in -1.0..1.0f64, mask in 1u8..8, mask2 in 1u8..8) {
            let dims = |m: u8| (0..3).filter(|j| m & (1 << j) != 0).collect::<Vec<usize>>();
            let d1 = dims(mask);
            let d2 = dims(mask2);
            let b1 = plane("1", 3, d1.clone(), vec![a; d1.len()]);
            let b2 = plane("2", 3, d2.clone(), vec![c; d2.len()]);
            let swap = |pc: PairClass| match pc {
                PairClass::ParallelNested { parent: PairMember::First } => PairClass::ParallelNested { parent: PairMember::Second },
                PairClass::ParallelNested { parent: PairMember::Second } => PairClass::ParallelNested { parent: PairMember::First },
                other => other,
            };
            let fwd = classify_pair(&b1, &b2);
            let back = classify_pair(&b2, &b1);
            if d1 == d2 && fwd != PairClass::Identical {
                // equal normal sets: both directions report the first as parent
                prop_assert_eq!(fwd, back);
            } else {
                prop_assert_eq!(fwd, swap(back));
            }
        }
    }
}

//! Finite presheaves: set-valued functors on the free category over a finite
//! graph, presented by their edge actions. Naturality against the generating
//! edges implies naturality against every composite, so all checks quantify
//! over edges only.

use crate::error::{Error, Result};
use crate::tensor::{CheckEntry, CheckStatus, Expression, TensorOptions, TensorSpace};
use crate::functor::TruncatedFunctor;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphEdge {
    pub name: String,
    pub src: usize,
    pub dst: usize,
}

/// A finite generating graph; the index category is the free category on it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FinCategory {
    pub objects: Vec<String>,
    pub edges: Vec<GraphEdge>,
}

impl FinCategory {
    pub fn new(objects: Vec<String>, edges: Vec<GraphEdge>) -> Result<Self> {
        for e in &edges {
            if e.src >= objects.len() || e.dst >= objects.len() {
                return Err(Error::InvalidStructure(format!(
                    "edge {} has an endpoint outside the object list",
                    e.name
                )));
            }
        }
        Ok(FinCategory { objects, edges })
    }

    /// One object, named loops.
    pub fn loops(object: &str, loop_names: &[&str]) -> Self {
        FinCategory {
            objects: vec![object.to_string()],
            edges: loop_names
                .iter()
                .map(|n| GraphEdge {
                    name: n.to_string(),
                    src: 0,
                    dst: 0,
                })
                .collect(),
        }
    }
}

/// A functor from the free category on `category` to finite sets.
#[derive(Clone, Debug)]
pub struct FinPresheaf {
    pub category: FinCategory,
    /// Carrier labels per object.
    pub carriers: Vec<Vec<String>>,
    /// For each edge, a table `carrier[src] -> carrier[dst]`.
    pub actions: Vec<Vec<usize>>,
}

impl FinPresheaf {
    pub fn new(
        category: FinCategory,
        carriers: Vec<Vec<String>>,
        actions: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if carriers.len() != category.objects.len() {
            return Err(Error::InvalidStructure(
                "one carrier per object required".into(),
            ));
        }
        if actions.len() != category.edges.len() {
            return Err(Error::InvalidStructure(
                "one action table per edge required".into(),
            ));
        }
        for (e, table) in category.edges.iter().zip(&actions) {
            if table.len() != carriers[e.src].len() {
                return Err(Error::InvalidStructure(format!(
                    "action table for edge {} has wrong length",
                    e.name
                )));
            }
            for &v in table {
                if v >= carriers[e.dst].len() {
                    return Err(Error::InvalidStructure(format!(
                        "action table for edge {} maps out of range",
                        e.name
                    )));
                }
            }
        }
        Ok(FinPresheaf {
            category,
            carriers,
            actions,
        })
    }

    /// Constant presheaf on a one-object, edge-free graph.
    pub fn discrete(labels: &[&str]) -> Self {
        FinPresheaf {
            category: FinCategory::loops("v", &[]),
            carriers: vec![labels.iter().map(|s| s.to_string()).collect()],
            actions: vec![],
        }
    }

    pub fn carrier_size(&self, object: usize) -> usize {
        self.carriers[object].len()
    }

    /// Pointwise non-emptiness; vacuously true over the empty graph.
    pub fn is_inhabited(&self) -> bool {
        self.carriers.iter().all(|c| !c.is_empty())
    }

    /// Pointwise `n`-th power with coordinatewise actions. Carrier elements
    /// are `n`-tuples ranked lexicographically.
    pub fn power(&self, n: usize) -> FinPresheaf {
        let carriers: Vec<Vec<String>> = self
            .carriers
            .iter()
            .map(|c| {
                tuples(c.len(), n)
                    .into_iter()
                    .map(|t| {
                        let names: Vec<&str> =
                            t.iter().map(|&i| c[i].as_str()).collect();
                        format!("({})", names.join(","))
                    })
                    .collect()
            })
            .collect();
        let actions: Vec<Vec<usize>> = self
            .category
            .edges
            .iter()
            .zip(&self.actions)
            .map(|(e, table)| {
                let src_size = self.carriers[e.src].len();
                let dst_size = self.carriers[e.dst].len();
                tuples(src_size, n)
                    .into_iter()
                    .map(|t| {
                        let mapped: Vec<usize> = t.iter().map(|&i| table[i]).collect();
                        tuple_rank(&mapped, dst_size)
                    })
                    .collect()
            })
            .collect();
        FinPresheaf {
            category: self.category.clone(),
            carriers,
            actions,
        }
    }
}

/// All `n`-tuples over `[size]` in lexicographic order.
pub fn tuples(size: usize, n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    if size == 0 {
        return vec![];
    }
    let mut out = Vec::with_capacity(size.pow(n as u32));
    let mut cur = vec![0usize; n];
    loop {
        out.push(cur.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < size {
                break;
            }
            cur[i] = 0;
        }
    }
}

pub fn tuple_rank(tuple: &[usize], size: usize) -> usize {
    let mut r = 0usize;
    for &v in tuple {
        r = r * size + v;
    }
    r
}

/// The pointwise tensor `P ⊗ F`: per-object tensor spaces plus the induced
/// presheaf on class indices.
pub struct PresheafTensor<'f> {
    pub spaces: Vec<TensorSpace<'f>>,
    pub presheaf: FinPresheaf,
}

pub fn presheaf_tensor<'f>(
    p: &FinPresheaf,
    functor: &'f TruncatedFunctor,
) -> Result<PresheafTensor<'f>> {
    presheaf_tensor_with(p, functor, TensorOptions::default())
}

pub fn presheaf_tensor_with<'f>(
    p: &FinPresheaf,
    functor: &'f TruncatedFunctor,
    opts: TensorOptions,
) -> Result<PresheafTensor<'f>> {
    let mut spaces: Vec<TensorSpace<'f>> = p
        .carriers
        .iter()
        .map(|c| TensorSpace::with_options(c.len(), functor, opts))
        .collect::<Result<_>>()?;
    let carriers: Vec<Vec<String>> = spaces
        .iter()
        .map(|s| {
            s.classes()
                .iter()
                .map(|c| {
                    let map = c
                        .canonical_map
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(",");
                    format!("({})⊗{}", map, c.canonical_label)
                })
                .collect()
        })
        .collect();
    let mut actions = Vec::with_capacity(p.category.edges.len());
    for (e, table) in p.category.edges.iter().zip(&p.actions) {
        let mut out = Vec::new();
        if e.src == e.dst {
            let (left, _) = spaces.split_at_mut(e.src + 1);
            let src_space = &mut left[e.src];
            // same object: act within one space via a scratch clone lookup
            for class in 0..src_space.class_count() {
                let info = src_space.classes()[class].clone();
                let mapped: Vec<usize> = info.canonical_map.iter().map(|&x| table[x]).collect();
                let c = src_space.class_of(&Expression::new(mapped, info.canonical_element))?;
                out.push(c);
            }
        } else {
            let (a, b) = if e.src < e.dst {
                let (l, r) = spaces.split_at_mut(e.dst);
                (&mut l[e.src], &mut r[0])
            } else {
                let (l, r) = spaces.split_at_mut(e.src);
                (&mut r[0], &mut l[e.dst])
            };
            for class in 0..a.class_count() {
                out.push(a.act(table, b, class)?);
            }
        }
        actions.push(out);
    }
    let presheaf = FinPresheaf::new(p.category.clone(), carriers, actions)?;
    Ok(PresheafTensor { spaces, presheaf })
}

/// A natural family of component tables, one per object, from `P^n` to `Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NatTransformation {
    pub components: Vec<Vec<usize>>,
}

/// Enumerate all natural transformations `src -> dst` over the same category
/// by brute force over component tables, filtered by naturality on every edge.
pub fn natural_transformations(
    src: &FinPresheaf,
    dst: &FinPresheaf,
    cap: u128,
) -> Result<Vec<NatTransformation>> {
    let objects = src.category.objects.len();
    let mut total: u128 = 1;
    for o in 0..objects {
        let choices = (dst.carrier_size(o) as u128).checked_pow(src.carrier_size(o) as u32);
        total = choices
            .and_then(|c| total.checked_mul(c))
            .ok_or_else(|| Error::SearchTooLarge {
                what: "natural transformation candidates".into(),
                size: u128::MAX,
                cap,
            })?;
        if total > cap {
            return Err(Error::SearchTooLarge {
                what: "natural transformation candidates".into(),
                size: total,
                cap,
            });
        }
    }

    let mut found = Vec::new();
    let mut components: Vec<Vec<usize>> = (0..objects)
        .map(|o| vec![0usize; src.carrier_size(o)])
        .collect();
    // treat empty component domains gracefully
    'outer: loop {
        if is_natural(src, dst, &components) {
            found.push(NatTransformation {
                components: components.clone(),
            });
        }
        // odometer over all tables
        let mut o = objects;
        loop {
            if o == 0 {
                break 'outer;
            }
            o -= 1;
            let dst_size = dst.carrier_size(o);
            let table = &mut components[o];
            let mut i = table.len();
            let mut advanced = false;
            while i > 0 {
                i -= 1;
                table[i] += 1;
                if table[i] < dst_size {
                    advanced = true;
                    break;
                }
                table[i] = 0;
            }
            if advanced {
                break;
            }
        }
    }
    Ok(found)
}

fn is_natural(src: &FinPresheaf, dst: &FinPresheaf, components: &[Vec<usize>]) -> bool {
    for (idx, e) in src.category.edges.iter().enumerate() {
        let src_table = &src.actions[idx];
        let dst_table = &dst.actions[idx];
        for x in 0..src.carrier_size(e.src) {
            if components[e.dst][src_table[x]] != dst_table[components[e.src][x]] {
                return false;
            }
        }
    }
    true
}

/// Per-`(functor, n)` verdict of the unique-`tau` condition.
#[derive(Debug, Serialize)]
pub struct UniqueTauEntry {
    pub functor: String,
    pub n: usize,
    pub natural_count: usize,
    pub tau_count: usize,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct UniqueTauReport {
    pub n_max: usize,
    pub entries: Vec<UniqueTauEntry>,
}

impl UniqueTauReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != CheckStatus::Fail)
    }
}

/// Check that `tau -> (-⊗tau)` is a bijection from `F[n]` onto the natural
/// transformations `P^n -> P⊗F`, for every listed functor and `1 <= n <=
/// n_max`. Preconditions: `P` inhabited, every functor in the essential image.
pub fn check_unique_tau(
    p: &FinPresheaf,
    functors: &[&TruncatedFunctor],
    n_max: usize,
    cap: u128,
) -> Result<UniqueTauReport> {
    if !p.is_inhabited() {
        return Err(Error::Precondition(
            "presheaf must be inhabited (pointwise non-empty)".into(),
        ));
    }
    for f in functors {
        let (ok, _) = f.is_in_essential_image();
        if !ok {
            return Err(Error::Precondition(format!(
                "functor {} is not in the essential image",
                f.name()
            )));
        }
    }
    let mut entries = Vec::new();
    for f in functors {
        for n in 1..=n_max {
            if n > f.bound() {
                return Err(Error::BoundTooSmall {
                    needed: n,
                    actual: f.bound(),
                });
            }
            let power = p.power(n);
            let mut tensored = presheaf_tensor(p, f)?;
            let naturals = natural_transformations(&power, &tensored.presheaf, cap)?;

            // the transformation -⊗tau, componentwise
            let fk = f.level_size(n);
            let mut tau_maps: Vec<NatTransformation> = Vec::with_capacity(fk);
            for tau in 0..fk {
                let mut components = Vec::new();
                for (o, space) in tensored.spaces.iter_mut().enumerate() {
                    let table: Vec<usize> = tuples(p.carrier_size(o), n)
                        .into_iter()
                        .map(|t| space.tensor_morphism(n, tau, &t))
                        .collect::<Result<_>>()?;
                    components.push(table);
                }
                tau_maps.push(NatTransformation { components });
            }

            let mut status = CheckStatus::Pass;
            let mut witness = None;
            for nat in &naturals {
                let matches: Vec<usize> = (0..fk).filter(|&t| tau_maps[t] == *nat).collect();
                if matches.is_empty() {
                    status = CheckStatus::Fail;
                    witness = Some(format!(
                        "natural transformation not of the form -⊗tau: components {:?}",
                        nat.components
                    ));
                    break;
                }
                if matches.len() > 1 {
                    status = CheckStatus::Fail;
                    witness = Some(format!(
                        "tau is not unique: indices {:?} of F[{n}] give the same transformation",
                        matches
                    ));
                    break;
                }
            }
            if status == CheckStatus::Pass {
                // surjectivity sanity: every -⊗tau must appear among naturals
                for (t, tm) in tau_maps.iter().enumerate() {
                    if !naturals.contains(tm) {
                        status = CheckStatus::Fail;
                        witness = Some(format!(
                            "-⊗tau for index {t} of F[{n}] is not natural (internal error)"
                        ));
                        break;
                    }
                }
            }
            entries.push(UniqueTauEntry {
                functor: f.name().to_string(),
                n,
                natural_count: naturals.len(),
                tau_count: fk,
                status,
                witness,
            });
        }
    }
    Ok(UniqueTauReport { n_max, entries })
}

/// Summarize a unique-tau report into check entries.
pub fn unique_tau_entries(report: &UniqueTauReport) -> Vec<CheckEntry> {
    report
        .entries
        .iter()
        .map(|e| CheckEntry {
            name: format!("unique_tau[{},n={}]", e.functor, e.n),
            status: e.status,
            detail: format!(
                "{} natural transformations vs {} elements of F[{}]",
                e.natural_count, e.tau_count, e.n
            ),
            witness: e.witness.clone(),
        })
        .collect()
}

/// The two-point presheaf whose loop actions are the swap and both constants.
/// Its compatible operations are exactly the projections, which makes the
/// unique-`tau` condition hold at small `n`.
pub fn rigid_two_point_presheaf() -> FinPresheaf {
    let category = FinCategory::loops("v", &["swap", "c0", "c1"]);
    FinPresheaf::new(
        category,
        vec![vec!["x0".into(), "x1".into()]],
        vec![vec![1, 0], vec![0, 0], vec![1, 1]],
    )
    .expect("valid presheaf")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functor::TruncatedFunctor;

    #[test]
    fn inhabited_checks() {
        let p = FinPresheaf::discrete(&["x"]);
        assert!(p.is_inhabited());
        let empty_carrier = FinPresheaf::new(
            FinCategory::loops("v", &[]),
            vec![vec![]],
            vec![],
        )
        .unwrap();
        assert!(!empty_carrier.is_inhabited());
        let empty_cat = FinPresheaf::new(
            FinCategory {
                objects: vec![],
                edges: vec![],
            },
            vec![],
            vec![],
        )
        .unwrap();
        assert!(empty_cat.is_inhabited());
    }

    #[test]
    fn constant_singleton_tensor_is_singleton() {
        let p = FinPresheaf::discrete(&["x"]);
        let f = TruncatedFunctor::representable(1, 4).unwrap();
        let t = presheaf_tensor(&p, &f).unwrap();
        assert_eq!(t.presheaf.carrier_size(0), 1);
    }

    #[test]
    fn one_object_identity_only_reduces_to_tensor() {
        let p = FinPresheaf::discrete(&["x", "y"]);
        let f = TruncatedFunctor::power_set(5).unwrap();
        let t = presheaf_tensor(&p, &f).unwrap();
        assert_eq!(t.presheaf.carrier_size(0), 4);
    }

    #[test]
    fn arrow_category_power_set_direct_image() {
        // P = inclusion {x} ⊆ {x,y}
        let category = FinCategory::new(
            vec!["a".into(), "b".into()],
            vec![GraphEdge {
                name: "incl".into(),
                src: 0,
                dst: 1,
            }],
        )
        .unwrap();
        let p = FinPresheaf::new(
            category,
            vec![vec!["x".into()], vec!["x".into(), "y".into()]],
            vec![vec![0]],
        )
        .unwrap();
        let f = TruncatedFunctor::power_set(5).unwrap();
        let mut t = presheaf_tensor(&p, &f).unwrap();
        assert_eq!(t.presheaf.carrier_size(0), 2);
        assert_eq!(t.presheaf.carrier_size(1), 4);
        // direct image: class of {x} at a maps to class of {x} at b
        let singleton_a = f.element_index(1, "{0}").unwrap();
        let class_a = t.spaces[0]
            .class_of(&Expression::new(vec![0], singleton_a))
            .unwrap();
        let image_class = t.presheaf.actions[0][class_a];
        let class_b = t.spaces[1]
            .class_of(&Expression::new(vec![0], singleton_a))
            .unwrap();
        assert_eq!(image_class, class_b);
    }

    #[test]
    fn power_actions_are_diagonal() {
        let p = rigid_two_point_presheaf();
        let p2 = p.power(2);
        assert_eq!(p2.carrier_size(0), 4);
        // swap action on the pair (x0,x1) gives (x1,x0)
        let swapped = p2.actions[0][tuple_rank(&[0, 1], 2)];
        assert_eq!(swapped, tuple_rank(&[1, 0], 2));
    }

    #[test]
    fn unique_tau_fails_on_structureless_two_points() {
        let p = FinPresheaf::discrete(&["x", "y"]);
        let f = TruncatedFunctor::representable(1, 4).unwrap();
        let report = check_unique_tau(&p, &[&f], 1, 1 << 20).unwrap();
        assert!(!report.passed());
        let entry = &report.entries[0];
        assert_eq!(entry.status, CheckStatus::Fail);
        assert!(entry.witness.as_deref().unwrap().contains("not of the form"));
    }

    #[test]
    fn unique_tau_passes_on_rigid_instance() {
        let p = rigid_two_point_presheaf();
        let rep1 = TruncatedFunctor::representable(1, 4).unwrap();
        let rep2 = TruncatedFunctor::representable(2, 4).unwrap();
        let report = check_unique_tau(&p, &[&rep1, &rep2], 2, 1 << 24).unwrap();
        assert!(report.passed(), "{:?}", report.entries);
        for e in &report.entries {
            assert_eq!(e.natural_count, e.tau_count);
        }
    }

    #[test]
    fn unique_tau_rejects_non_image_functor() {
        let p = rigid_two_point_presheaf();
        let ine = TruncatedFunctor::ine(4).unwrap();
        assert!(matches!(
            check_unique_tau(&p, &[&ine], 1, 1 << 20),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn unique_tau_singleton_ambiguous_at_two() {
        // over a singleton, distinct tau in F[2] give the same map
        let p = FinPresheaf::discrete(&["x"]);
        let rep1 = TruncatedFunctor::representable(1, 4).unwrap();
        let report = check_unique_tau(&p, &[&rep1], 2, 1 << 20).unwrap();
        let n1 = report.entries.iter().find(|e| e.n == 1).unwrap();
        assert_eq!(n1.status, CheckStatus::Pass);
        let n2 = report.entries.iter().find(|e| e.n == 2).unwrap();
        assert_eq!(n2.status, CheckStatus::Fail);
        assert!(n2.witness.as_deref().unwrap().contains("not unique"));
    }

    #[test]
    fn unique_tau_invariant_under_relabeling() {
        let p = rigid_two_point_presheaf();
        let mut q = p.clone();
        q.carriers[0] = vec!["left".into(), "right".into()];
        let rep2 = TruncatedFunctor::representable(2, 4).unwrap();
        let a = check_unique_tau(&p, &[&rep2], 2, 1 << 24).unwrap();
        let b = check_unique_tau(&q, &[&rep2], 2, 1 << 24).unwrap();
        assert_eq!(a.passed(), b.passed());
        for (x, y) in a.entries.iter().zip(b.entries.iter()) {
            assert_eq!(x.natural_count, y.natural_count);
        }
    }
}

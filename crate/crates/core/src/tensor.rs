//! Tensor of a finite carrier with a truncated functor, computed as explicit
//! equivalence classes of expressions.
//!
//! An expression is a pair `(f: [k] -> X, sigma in F[k])`. Two expressions are
//! identified by the closure of the moves `(f∘g, sigma) ~ (f, g·sigma)`. It is
//! enough to apply the moves for a generating family of `g`s (adjacent
//! transpositions, the standard one-step inclusion, adjacent merges), since an
//! arbitrary `g` factors into these with all intermediate arities below
//! `max(dom, cod)`.
//!
//! Because `(f, sigma) ~ (id_X, F(f)(sigma))` whenever the carrier itself fits
//! within the bound, the closure at bound `max(|X|, 2) + 1` is already exact;
//! the stabilization passes requested at higher bounds serve as a recorded
//! consistency check, not as a source of truth.

use crate::error::{Error, Result};
use crate::finset::FinFunction;
use crate::functor::TruncatedFunctor;
use serde::Serialize;

/// A representative `(f: [k] -> X, sigma in F[k])`; `map` is the value table
/// of `f` over carrier indices and `element` indexes into `F[k]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expression {
    pub map: Vec<usize>,
    pub element: usize,
}

impl Expression {
    pub fn new(map: Vec<usize>, element: usize) -> Self {
        Expression { map, element }
    }

    pub fn arity(&self) -> usize {
        self.map.len()
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = self.map.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len() == self.map.len()
    }

    pub fn image(&self) -> Vec<usize> {
        let mut im = self.map.clone();
        im.sort_unstable();
        im.dedup();
        im
    }
}

/// One equivalence class of expressions.
#[derive(Clone, Debug, Serialize)]
pub struct ClassInfo {
    /// Chosen representative: minimal arity, then lexicographically least map,
    /// then least element label.
    pub canonical_map: Vec<usize>,
    pub canonical_element: usize,
    pub canonical_label: String,
    pub length: usize,
    pub size: u64,
}

/// Outcome of the bound-stabilization passes.
#[derive(Clone, Debug, Serialize)]
pub struct Stability {
    /// Consecutive bound increments that left the restricted partition fixed.
    pub confirmations: usize,
    /// Bounds at which the restricted partition changed (never expected).
    pub unstable_bounds: Vec<usize>,
    /// Highest bound actually closed over.
    pub checked_up_to: usize,
    /// Set when stabilization needed a bound beyond `|X| + 2`.
    pub flagged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct TensorOptions {
    pub max_expressions: u128,
}

impl Default for TensorOptions {
    fn default() -> Self {
        TensorOptions {
            max_expressions: 4_000_000,
        }
    }
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = self.parent[x as usize];
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
    }
}

/// Raw partition of all expressions of arity `<= bound`.
struct Partition {
    carrier: usize,
    bound: usize,
    /// `offsets[k]` = id of the first arity-`k` expression.
    offsets: Vec<usize>,
    uf: UnionFind,
}

impl Partition {
    fn level_expr_count(carrier: usize, functor: &TruncatedFunctor, k: usize) -> u128 {
        let maps = if k == 0 {
            1u128
        } else {
            (carrier as u128).pow(k as u32)
        };
        maps * functor.level_size(k) as u128
    }

    fn build(
        carrier: usize,
        functor: &TruncatedFunctor,
        bound: usize,
        opts: &TensorOptions,
    ) -> Result<Partition> {
        let mut offsets = Vec::with_capacity(bound + 2);
        let mut total: u128 = 0;
        offsets.push(0usize);
        for k in 0..=bound {
            total += Self::level_expr_count(carrier, functor, k);
            if total > opts.max_expressions {
                return Err(Error::SearchTooLarge {
                    what: format!("expressions over carrier {carrier} at bound {bound}"),
                    size: total,
                    cap: opts.max_expressions,
                });
            }
            offsets.push(total as usize);
        }
        let mut part = Partition {
            carrier,
            bound,
            offsets,
            uf: UnionFind::new(total as usize),
        };
        part.close(functor);
        Ok(part)
    }

    fn map_rank(&self, map: &[usize]) -> usize {
        let mut r = 0usize;
        for &v in map {
            r = r * self.carrier + v;
        }
        r
    }

    fn expr_id(&self, map: &[usize], element: usize, fk: usize) -> u32 {
        (self.offsets[map.len()] + self.map_rank(map) * fk + element) as u32
    }

    /// Apply all generator moves.
    fn close(&mut self, functor: &TruncatedFunctor) {
        for k in 0..=self.bound {
            let fk = functor.level_size(k);
            if self.carrier == 0 && k > 0 {
                continue;
            }
            let maps: Vec<Vec<usize>> = all_maps(k, self.carrier);

            // adjacent transpositions [k] -> [k]
            for t in 0..k.saturating_sub(1) {
                let mut values: Vec<usize> = (0..k).collect();
                values.swap(t, t + 1);
                let g = FinFunction::new(values, k).unwrap();
                let act: Vec<usize> = (0..fk).map(|s| functor.action(&g, s)).collect();
                for f in &maps {
                    let mut fg = f.clone();
                    fg.swap(t, t + 1);
                    for s in 0..fk {
                        let a = self.expr_id(&fg, s, fk);
                        let b = self.expr_id(f, act[s], fk);
                        self.uf.union(a, b);
                    }
                }
            }

            // standard inclusion [k-1] -> [k]
            if k >= 1 {
                let fk1 = functor.level_size(k - 1);
                let g = FinFunction::new((0..k - 1).collect(), k).unwrap();
                let act: Vec<usize> = (0..fk1).map(|s| functor.action(&g, s)).collect();
                for f in &maps {
                    let prefix = &f[..k - 1];
                    for s in 0..fk1 {
                        let a = self.expr_id(prefix, s, fk1);
                        let b = self.expr_id(f, act[s], fk);
                        self.uf.union(a, b);
                    }
                }
            }

            // adjacent merges [k+1] -> [k]
            if k >= 1 && k + 1 <= self.bound {
                let fk1 = functor.level_size(k + 1);
                for t in 0..k {
                    let mut values = Vec::with_capacity(k + 1);
                    for x in 0..=k {
                        values.push(if x <= t { x } else { x - 1 });
                    }
                    let g = FinFunction::new(values, k).unwrap();
                    let act: Vec<usize> = (0..fk1).map(|s| functor.action(&g, s)).collect();
                    for f in &maps {
                        let mut fg = Vec::with_capacity(k + 1);
                        fg.extend_from_slice(&f[..=t]);
                        fg.push(f[t]);
                        fg.extend_from_slice(&f[t + 1..]);
                        for s in 0..fk1 {
                            let a = self.expr_id(&fg, s, fk1);
                            let b = self.expr_id(f, act[s], fk);
                            self.uf.union(a, b);
                        }
                    }
                }
            }
        }
    }

    /// Normalized class labels of all expressions with arity `<= restrict`.
    fn signature(&mut self, restrict: usize) -> Vec<u32> {
        let upto = self.offsets[restrict + 1];
        let mut label_of_root = std::collections::HashMap::new();
        let mut out = Vec::with_capacity(upto);
        for id in 0..upto {
            let root = self.uf.find(id as u32);
            let next = label_of_root.len() as u32;
            out.push(*label_of_root.entry(root).or_insert(next));
        }
        out
    }
}

fn all_maps(k: usize, carrier: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if carrier == 0 {
        return vec![];
    }
    let mut out = Vec::with_capacity(carrier.pow(k as u32));
    let mut cur = vec![0usize; k];
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < carrier {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// The computed tensor `X ⊗ F` with class lookup.
pub struct TensorSpace<'f> {
    carrier: usize,
    functor: &'f TruncatedFunctor,
    build_bound: usize,
    partition: Partition,
    class_of_root: std::collections::HashMap<u32, usize>,
    classes: Vec<ClassInfo>,
    stability: Stability,
}

impl<'f> TensorSpace<'f> {
    /// Compute the tensor. Requires `functor.bound() >= max(carrier, 2) + 1`.
    pub fn new(carrier: usize, functor: &'f TruncatedFunctor) -> Result<Self> {
        Self::with_options(carrier, functor, TensorOptions::default())
    }

    pub fn with_options(
        carrier: usize,
        functor: &'f TruncatedFunctor,
        opts: TensorOptions,
    ) -> Result<Self> {
        let base_bound = carrier.max(2) + 1;
        if functor.bound() < base_bound {
            return Err(Error::BoundTooSmall {
                needed: base_bound,
                actual: functor.bound(),
            });
        }

        let mut prev = Partition::build(carrier, functor, base_bound, &opts)?;
        let mut prev_sig = prev.signature(base_bound);
        let mut confirmations = 0usize;
        let mut unstable_bounds = Vec::new();
        let mut bound = base_bound;
        while confirmations < 2 && bound + 1 <= functor.bound() {
            let mut next = Partition::build(carrier, functor, bound + 1, &opts)?;
            let restricted = next.signature(bound);
            if restricted == prev_sig {
                confirmations += 1;
            } else {
                confirmations = 0;
                unstable_bounds.push(bound + 1);
            }
            bound += 1;
            prev_sig = next.signature(bound);
            prev = next;
        }
        let flagged = unstable_bounds.iter().any(|&b| b > carrier + 2);
        let stability = Stability {
            confirmations,
            unstable_bounds,
            checked_up_to: bound,
            flagged,
        };

        let mut space = TensorSpace {
            carrier,
            functor,
            build_bound: base_bound,
            partition: prev,
            class_of_root: std::collections::HashMap::new(),
            classes: Vec::new(),
            stability,
        };
        space.collect_classes();
        Ok(space)
    }

    fn collect_classes(&mut self) {
        // label-sorted element order per level, for the canonical tie-break
        let label_order: Vec<Vec<usize>> = (0..=self.partition.bound)
            .map(|k| {
                let mut idx: Vec<usize> = (0..self.functor.level_size(k)).collect();
                idx.sort_by_key(|&i| self.functor.label(k, i));
                idx
            })
            .collect();
        for k in 0..=self.partition.bound {
            let fk = self.functor.level_size(k);
            if fk == 0 || (self.carrier == 0 && k > 0) {
                continue;
            }
            for map in all_maps(k, self.carrier) {
                for &element in &label_order[k] {
                    let id = self.partition.expr_id(&map, element, fk);
                    let root = self.partition.uf.find(id);
                    if let Some(&c) = self.class_of_root.get(&root) {
                        self.classes[c].size += 1;
                    } else {
                        let c = self.classes.len();
                        self.class_of_root.insert(root, c);
                        self.classes.push(ClassInfo {
                            canonical_map: map.clone(),
                            canonical_element: element,
                            canonical_label: self.functor.label(k, element),
                            length: k,
                            size: 1,
                        });
                    }
                }
            }
        }
    }

    pub fn carrier_size(&self) -> usize {
        self.carrier
    }

    pub fn functor(&self) -> &TruncatedFunctor {
        self.functor
    }

    /// Bound required by the construction (`max(|X|, 2) + 1`).
    pub fn build_bound(&self) -> usize {
        self.build_bound
    }

    pub fn stability(&self) -> &Stability {
        &self.stability
    }

    pub fn classes(&self) -> &[ClassInfo] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Class of an expression of arity `<= checked bound`.
    pub fn class_of(&mut self, expr: &Expression) -> Result<usize> {
        let k = expr.arity();
        if k > self.partition.bound {
            return Err(Error::BoundTooSmall {
                needed: k,
                actual: self.partition.bound,
            });
        }
        for &v in &expr.map {
            if v >= self.carrier {
                return Err(Error::ValueOutOfRange {
                    value: v,
                    cod: self.carrier,
                });
            }
        }
        let fk = self.functor.level_size(k);
        if expr.element >= fk {
            return Err(Error::ValueOutOfRange {
                value: expr.element,
                cod: fk,
            });
        }
        let id = self.partition.expr_id(&expr.map, expr.element, fk);
        let root = self.partition.uf.find(id);
        Ok(self.class_of_root[&root])
    }

    pub fn length(&self, class: usize) -> usize {
        self.classes[class].length
    }

    /// All expressions in the class whose arity equals the class length.
    pub fn minimal_expressions(&mut self, class: usize) -> Vec<Expression> {
        let len = self.classes[class].length;
        self.members_of_arity(class, len)
    }

    /// All expressions of the given arity lying in the class.
    pub fn members_of_arity(&mut self, class: usize, arity: usize) -> Vec<Expression> {
        let fk = self.functor.level_size(arity);
        let mut out = Vec::new();
        if fk == 0 || (self.carrier == 0 && arity > 0) {
            return out;
        }
        for map in all_maps(arity, self.carrier) {
            for element in 0..fk {
                let id = self.partition.expr_id(&map, element, fk);
                let root = self.partition.uf.find(id);
                if self.class_of_root[&root] == class {
                    out.push(Expression::new(map.clone(), element));
                }
            }
        }
        out
    }

    /// All member expressions of a class, grouped by ascending arity.
    pub fn members(&mut self, class: usize) -> Vec<Expression> {
        (0..=self.partition.bound)
            .flat_map(|k| self.members_of_arity(class, k))
            .collect()
    }

    /// Push a class forward along a carrier map `g: X -> Y` into `target`.
    /// Well-definedness (independence of the representative) is a theorem and
    /// is exercised by the law tests.
    pub fn act(
        &mut self,
        g: &[usize],
        target: &mut TensorSpace<'_>,
        class: usize,
    ) -> Result<usize> {
        if g.len() != self.carrier {
            return Err(Error::Precondition(format!(
                "carrier map has {} entries, carrier size is {}",
                g.len(),
                self.carrier
            )));
        }
        let info = &self.classes[class];
        let mapped: Vec<usize> = info.canonical_map.iter().map(|&x| g[x]).collect();
        let element = target
            .functor
            .element_index(info.canonical_map.len(), &info.canonical_label)
            .ok_or_else(|| {
                Error::Precondition("target space uses an incompatible functor".into())
            })?;
        target.class_of(&Expression::new(mapped, element))
    }

    /// The map `-⊗sigma : X^n -> X⊗F` for `sigma in F[n]`.
    pub fn tensor_morphism(&mut self, n: usize, sigma: usize, args: &[usize]) -> Result<usize> {
        if args.len() != n {
            return Err(Error::Precondition(format!(
                "expected {n} arguments, got {}",
                args.len()
            )));
        }
        self.class_of(&Expression::new(args.to_vec(), sigma))
    }

    /// The complete class invariant `F(f)(sigma) in F[|X|]`: two expressions
    /// are equivalent exactly when their invariants agree. Kept as an
    /// independent route for the law tests; queries go through the partition.
    pub fn coyoneda_invariant(&self, expr: &Expression) -> usize {
        let f = FinFunction::new(expr.map.clone(), self.carrier).expect("carrier map");
        self.functor.action(&f, expr.element)
    }

    pub fn render_expr(&self, e: &Expression) -> String {
        let map = e
            .map
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!("({})⊗{}", map, self.functor.label(e.arity(), e.element))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Expected,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Exhaustive verdicts for the minimality, cancellation, comparison and
/// uniqueness statements over one `(carrier, functor)` pair.
#[derive(Debug, Serialize)]
pub struct Section2Report {
    pub carrier: usize,
    pub functor: String,
    pub in_essential_image: bool,
    pub entries: Vec<CheckEntry>,
    pub stability: Stability,
}

impl Section2Report {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != CheckStatus::Fail)
    }

    pub fn expected_witnesses(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.status == CheckStatus::Expected)
            .count()
    }
}

impl<'f> TensorSpace<'f> {
    /// Run every lemma check exhaustively over this space.
    pub fn verify_section2(&mut self) -> Section2Report {
        let (in_image, _) = self.functor.is_in_essential_image();
        let mut entries = Vec::new();

        self.check_minimal_injective(&mut entries);
        self.check_cancellation(&mut entries);
        self.check_comparison(in_image, &mut entries);
        self.check_uniqueness(in_image, &mut entries);

        Section2Report {
            carrier: self.carrier,
            functor: self.functor.name().to_string(),
            in_essential_image: in_image,
            entries,
            stability: self.stability.clone(),
        }
    }

    fn check_minimal_injective(&mut self, entries: &mut Vec<CheckEntry>) {
        let mut checked = 0usize;
        for class in 0..self.classes.len() {
            for e in self.minimal_expressions(class) {
                checked += 1;
                if !e.is_injective() {
                    entries.push(CheckEntry {
                        name: "minimal_implies_injective".into(),
                        status: CheckStatus::Fail,
                        detail: format!("class {class} has a non-injective minimal expression"),
                        witness: Some(self.render_expr(&e)),
                    });
                    return;
                }
            }
        }
        entries.push(CheckEntry {
            name: "minimal_implies_injective".into(),
            status: CheckStatus::Pass,
            detail: format!("{checked} minimal expressions checked"),
            witness: None,
        });
    }

    fn check_cancellation(&mut self, entries: &mut Vec<CheckEntry>) {
        let mut checked = 0usize;
        for k in 1..=self.carrier.min(self.partition.bound) {
            let fk = self.functor.level_size(k);
            for map in all_maps(k, self.carrier) {
                let inj = {
                    let mut m = map.clone();
                    m.sort_unstable();
                    m.dedup();
                    m.len() == map.len()
                };
                if !inj {
                    continue;
                }
                let classes: Vec<usize> = (0..fk)
                    .map(|s| self.class_of(&Expression::new(map.clone(), s)).unwrap())
                    .collect();
                for s in 0..fk {
                    for t in s + 1..fk {
                        checked += 1;
                        if classes[s] == classes[t] {
                            entries.push(CheckEntry {
                                name: "cancellation_injective".into(),
                                status: CheckStatus::Fail,
                                detail: format!(
                                    "injective map identifies distinct elements of F[{k}]"
                                ),
                                witness: Some(format!(
                                    "{} = {}",
                                    self.render_expr(&Expression::new(map.clone(), s)),
                                    self.render_expr(&Expression::new(map.clone(), t))
                                )),
                            });
                            return;
                        }
                    }
                }
            }
        }
        entries.push(CheckEntry {
            name: "cancellation_injective".into(),
            status: CheckStatus::Pass,
            detail: format!("{checked} pairs over injective maps checked"),
            witness: None,
        });
    }

    fn check_comparison(&mut self, in_image: bool, entries: &mut Vec<CheckEntry>) {
        let mut checked = 0usize;
        let mut skipped_low = 0usize;
        for class in 0..self.classes.len() {
            let le = self.classes[class].length;
            if le <= 1 && !in_image {
                skipped_low += 1;
                continue;
            }
            let minimal = self.minimal_expressions(class);
            let members = self.members(class);
            for m in &minimal {
                let im = m.image();
                for g in &members {
                    checked += 1;
                    let gim = g.image();
                    if !im.iter().all(|x| gim.contains(x)) {
                        entries.push(CheckEntry {
                            name: "comparison".into(),
                            status: CheckStatus::Fail,
                            detail: format!(
                                "minimal image not contained in member image (class {class})"
                            ),
                            witness: Some(format!(
                                "{} vs {}",
                                self.render_expr(m),
                                self.render_expr(g)
                            )),
                        });
                        return;
                    }
                }
            }
        }
        entries.push(CheckEntry {
            name: "comparison".into(),
            status: CheckStatus::Pass,
            detail: if in_image {
                format!("{checked} pairs checked at all lengths")
            } else {
                format!("{checked} pairs checked at length > 1")
            },
            witness: None,
        });
        if skipped_low > 0 {
            entries.push(CheckEntry {
                name: "comparison_all_lengths".into(),
                status: CheckStatus::Skipped,
                detail: format!(
                    "{skipped_low} classes of length <= 1 skipped: functor not in essential image"
                ),
                witness: None,
            });
        }
    }

    fn check_uniqueness(&mut self, in_image: bool, entries: &mut Vec<CheckEntry>) {
        let mut checked = 0usize;
        let mut skipped_empty = false;
        let mut failed = false;
        for class in 0..self.classes.len() {
            let le = self.classes[class].length;
            let minimal = self.minimal_expressions(class);
            for a in 0..minimal.len() {
                for b in a + 1..minimal.len() {
                    let (f, g) = (&minimal[a], &minimal[b]);
                    // enforced at length > 1 always; at length <= 1 only in the
                    // essential image with a non-empty carrier
                    let enforce = le > 1 || (in_image && self.carrier > 0);
                    if le <= 1 && in_image && self.carrier == 0 {
                        skipped_empty = true;
                        continue;
                    }
                    checked += 1;
                    let related = self.related_by_bijection(f, g);
                    if !related {
                        let status = if enforce {
                            failed = true;
                            CheckStatus::Fail
                        } else {
                            CheckStatus::Expected
                        };
                        entries.push(CheckEntry {
                            name: "uniqueness_minimal".into(),
                            status,
                            detail: format!(
                                "minimal expressions of class {class} (length {le}) not related by a bijection"
                            ),
                            witness: Some(format!(
                                "{} vs {}",
                                self.render_expr(f),
                                self.render_expr(g)
                            )),
                        });
                        if failed {
                            return;
                        }
                    }
                }
            }
        }
        entries.push(CheckEntry {
            name: "uniqueness_minimal".into(),
            status: CheckStatus::Pass,
            detail: format!("{checked} minimal pairs checked"),
            witness: None,
        });
        if skipped_empty {
            entries.push(CheckEntry {
                name: "uniqueness_inhabited".into(),
                status: CheckStatus::Skipped,
                detail: "carrier is empty; the inhabited uniqueness statement requires X ≠ ∅"
                    .into(),
                witness: None,
            });
        }
    }

    /// Does a bijection `phi` with `f = g ∘ phi` and `phi·sigma = tau` relate
    /// the two (injective) minimal expressions? When `g` is injective the
    /// bijection is unique, so existence is the whole check.
    fn related_by_bijection(&self, f: &Expression, g: &Expression) -> bool {
        let m = f.arity();
        if g.arity() != m {
            return false;
        }
        if !f.is_injective() || !g.is_injective() {
            return false;
        }
        let mut phi = Vec::with_capacity(m);
        for i in 0..m {
            match g.map.iter().position(|&y| y == f.map[i]) {
                Some(j) => phi.push(j),
                None => return false,
            }
        }
        let phi = FinFunction::new(phi, m).expect("bijection");
        self.functor.action(&phi, f.element) == g.element
    }
}

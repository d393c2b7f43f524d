//! Relational languages and finite structures, brute-force homomorphism
//! enumeration, and the bounded rigidity checkers.

use crate::error::{Error, Result};
use crate::finset::enumerate_functions;
use crate::presheaf::{tuple_rank, tuples};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelSymbol {
    pub name: String,
    pub arity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelLanguage {
    pub symbols: Vec<RelSymbol>,
}

impl RelLanguage {
    pub fn new(symbols: Vec<(&str, usize)>) -> Result<Self> {
        let symbols: Vec<RelSymbol> = symbols
            .into_iter()
            .map(|(name, arity)| RelSymbol {
                name: name.to_string(),
                arity,
            })
            .collect();
        let lang = RelLanguage { symbols };
        lang.validate()?;
        Ok(lang)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for s in &self.symbols {
            if !seen.insert(&s.name) {
                return Err(Error::InvalidStructure(format!(
                    "duplicate relation symbol {:?}",
                    s.name
                )));
            }
        }
        Ok(())
    }

    pub fn has_nullary(&self) -> bool {
        self.symbols.iter().any(|s| s.arity == 0)
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }
}

/// A finite structure: labeled carrier plus one tuple set per symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelStructure {
    pub language: RelLanguage,
    pub carrier: Vec<String>,
    pub relations: Vec<BTreeSet<Vec<usize>>>,
}

impl RelStructure {
    pub fn new(
        language: RelLanguage,
        carrier: Vec<String>,
        relations: Vec<BTreeSet<Vec<usize>>>,
    ) -> Result<Self> {
        if relations.len() != language.symbols.len() {
            return Err(Error::InvalidStructure(
                "one relation per symbol required".into(),
            ));
        }
        for (sym, rel) in language.symbols.iter().zip(&relations) {
            for tuple in rel {
                if tuple.len() != sym.arity {
                    return Err(Error::InvalidStructure(format!(
                        "tuple of length {} in {}-ary relation {:?}",
                        tuple.len(),
                        sym.arity,
                        sym.name
                    )));
                }
                for &v in tuple {
                    if v >= carrier.len() {
                        return Err(Error::InvalidStructure(format!(
                            "tuple entry {v} outside carrier in relation {:?}",
                            sym.name
                        )));
                    }
                }
            }
        }
        Ok(RelStructure {
            language,
            carrier,
            relations,
        })
    }

    pub fn size(&self) -> usize {
        self.carrier.len()
    }

    /// `n`-th power: carrier of `n`-tuples, relations componentwise.
    pub fn power(&self, n: usize) -> RelStructure {
        let size = self.size();
        let carrier: Vec<String> = tuples(size, n)
            .into_iter()
            .map(|t| {
                let names: Vec<&str> = t.iter().map(|&i| self.carrier[i].as_str()).collect();
                format!("({})", names.join(","))
            })
            .collect();
        let relations: Vec<BTreeSet<Vec<usize>>> = self
            .language
            .symbols
            .iter()
            .zip(&self.relations)
            .map(|(sym, rel)| {
                let mut out = BTreeSet::new();
                // a tuple of n-tuples is related iff each coordinate slice is
                for candidate in tuples(carrier.len(), sym.arity) {
                    let decoded: Vec<Vec<usize>> = candidate
                        .iter()
                        .map(|&r| tuple_unrank(r, size, n))
                        .collect();
                    let ok = (0..n).all(|j| {
                        let slice: Vec<usize> = decoded.iter().map(|t| t[j]).collect();
                        rel.contains(&slice)
                    });
                    if ok {
                        out.insert(candidate);
                    }
                }
                out
            })
            .collect();
        RelStructure {
            language: self.language.clone(),
            carrier,
            relations,
        }
    }

    /// Binary product (same language).
    pub fn product(&self, other: &RelStructure) -> Result<RelStructure> {
        if self.language != other.language {
            return Err(Error::LanguageMismatch(
                "product requires equal languages".into(),
            ));
        }
        let carrier: Vec<String> = self
            .carrier
            .iter()
            .flat_map(|a| other.carrier.iter().map(move |b| format!("({a},{b})")))
            .collect();
        let pair_rank = |a: usize, b: usize| a * other.size() + b;
        let relations = self
            .language
            .symbols
            .iter()
            .enumerate()
            .map(|(i, sym)| {
                let mut out = BTreeSet::new();
                for ta in &self.relations[i] {
                    for tb in &other.relations[i] {
                        let tuple: Vec<usize> = (0..sym.arity)
                            .map(|j| pair_rank(ta[j], tb[j]))
                            .collect();
                        out.insert(tuple);
                    }
                }
                out
            })
            .collect();
        RelStructure::new(self.language.clone(), carrier, relations)
    }

    /// Drop nullary symbols and replace empty relations of positive arity by
    /// the full relation. Hom sets never shrink under this operation.
    pub fn fill_empty_relations(&self) -> RelStructure {
        let mut symbols = Vec::new();
        let mut relations = Vec::new();
        for (sym, rel) in self.language.symbols.iter().zip(&self.relations) {
            if sym.arity == 0 {
                continue;
            }
            symbols.push(sym.clone());
            if rel.is_empty() {
                relations.push(tuples(self.size(), sym.arity).into_iter().collect());
            } else {
                relations.push(rel.clone());
            }
        }
        RelStructure {
            language: RelLanguage { symbols },
            carrier: self.carrier.clone(),
            relations,
        }
    }

    fn preserves(&self, other: &RelStructure, f: &[usize]) -> bool {
        for (i, rel) in self.relations.iter().enumerate() {
            for tuple in rel {
                let mapped: Vec<usize> = tuple.iter().map(|&v| f[v]).collect();
                if !other.relations[i].contains(&mapped) {
                    return false;
                }
            }
        }
        true
    }
}

pub fn tuple_unrank(mut rank: usize, size: usize, n: usize) -> Vec<usize> {
    let mut t = vec![0usize; n];
    for i in (0..n).rev() {
        t[i] = rank % size;
        rank /= size;
    }
    t
}

pub const DEFAULT_HOM_CAP: u128 = 2_000_000;

/// All relation-preserving maps `A -> B`, in lexicographic order of their
/// value tables.
pub fn hom_enum(a: &RelStructure, b: &RelStructure, cap: u128) -> Result<Vec<Vec<usize>>> {
    if a.language != b.language {
        return Err(Error::LanguageMismatch(
            "hom_enum requires equal languages".into(),
        ));
    }
    let count = crate::finset::function_count(a.size(), b.size());
    if count > cap {
        return Err(Error::SearchTooLarge {
            what: format!("functions [{}] -> [{}]", a.size(), b.size()),
            size: count,
            cap,
        });
    }
    let mut out = Vec::new();
    for f in enumerate_functions(a.size(), b.size()) {
        if a.preserves(b, f.values()) {
            out.push(f.values().to_vec());
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct RigidityVerdict {
    pub holds: bool,
    /// Offending morphism, rendered as a value table, with the power `n` it
    /// was found at (0 for plain rigidity witnesses over `A` itself).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<RigidityWitness>,
    /// The bound the check ran up to; the unbounded definitions are not
    /// decidable, so every verdict is "up to n_max".
    pub n_max: usize,
    pub mode: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RigidityWitness {
    pub n: usize,
    pub map: Vec<usize>,
    pub reason: String,
}

/// Rigidity: the identity is the only endomorphism.
pub fn is_rigid(a: &RelStructure, cap: u128) -> Result<RigidityVerdict> {
    let id: Vec<usize> = (0..a.size()).collect();
    for f in hom_enum(a, a, cap)? {
        if f != id {
            return Ok(RigidityVerdict {
                holds: false,
                witness: Some(RigidityWitness {
                    n: 1,
                    map: f,
                    reason: "non-identity endomorphism".into(),
                }),
                n_max: 1,
                mode: "rigid".into(),
            });
        }
    }
    Ok(RigidityVerdict {
        holds: true,
        witness: None,
        n_max: 1,
        mode: "rigid".into(),
    })
}

fn projection_table(size: usize, n: usize, i: usize) -> Vec<usize> {
    tuples(size, n).into_iter().map(|t| t[i]).collect()
}

fn lex_rigid_range(a: &RelStructure, from: usize, n_max: usize, cap: u128, mode: &str) -> Result<RigidityVerdict> {
    for n in from..=n_max {
        let power = a.power(n);
        let homs = hom_enum(&power, a, cap)?;
        if n == 0 {
            // a morphism out of the empty power is a global point; lex
            // rigidity forbids any, since no projection [0] -> A exists
            if let Some(f) = homs.into_iter().next() {
                return Ok(RigidityVerdict {
                    holds: false,
                    witness: Some(RigidityWitness {
                        n,
                        map: f,
                        reason: "a global point 1 -> A exists".into(),
                    }),
                    n_max,
                    mode: mode.into(),
                });
            }
            continue;
        }
        // Every morphism must be a projection. The index is automatically
        // unique once the carrier has two points, since projections are then
        // pairwise distinct as maps.
        let projections: Vec<Vec<usize>> =
            (0..n).map(|i| projection_table(a.size(), n, i)).collect();
        for f in homs {
            if !projections.iter().any(|p| *p == f) {
                return Ok(RigidityVerdict {
                    holds: false,
                    witness: Some(RigidityWitness {
                        n,
                        map: f,
                        reason: "morphism is not a projection".into(),
                    }),
                    n_max,
                    mode: mode.into(),
                });
            }
        }
    }
    Ok(RigidityVerdict {
        holds: true,
        witness: None,
        n_max,
        mode: mode.into(),
    })
}

/// Lex-rigidity up to `n_max`: every `A^n -> A` for `0 <= n <= n_max` is a
/// unique projection. The `n = 0` case demands that no morphism `1 -> A`
/// exists at all.
pub fn is_lex_rigid(a: &RelStructure, n_max: usize, cap: u128) -> Result<RigidityVerdict> {
    lex_rigid_range(a, 0, n_max, cap, "lex-rigid")
}

/// Same as [`is_lex_rigid`] but for `1 <= n <= n_max` only.
pub fn is_inhabited_lex_rigid(
    a: &RelStructure,
    n_max: usize,
    cap: u128,
) -> Result<RigidityVerdict> {
    lex_rigid_range(a, 1, n_max.max(1), cap, "inhabited-lex-rigid")
}

/// On-disk structure format: carrier labels plus label tuples per relation.
#[derive(Debug, Serialize, Deserialize)]
pub struct StructureFile {
    pub carrier: Vec<String>,
    pub relations: std::collections::BTreeMap<String, RelationFile>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RelationFile {
    pub arity: usize,
    pub tuples: Vec<Vec<String>>,
}

impl RelStructure {
    pub fn to_file(&self) -> StructureFile {
        let relations = self
            .language
            .symbols
            .iter()
            .zip(&self.relations)
            .map(|(sym, rel)| {
                (
                    sym.name.clone(),
                    RelationFile {
                        arity: sym.arity,
                        tuples: rel
                            .iter()
                            .map(|t| t.iter().map(|&v| self.carrier[v].clone()).collect())
                            .collect(),
                    },
                )
            })
            .collect();
        StructureFile {
            carrier: self.carrier.clone(),
            relations,
        }
    }

    pub fn from_file(file: StructureFile) -> Result<Self> {
        let index_of = |label: &str| -> Result<usize> {
            file.carrier
                .iter()
                .position(|c| c == label)
                .ok_or_else(|| {
                    Error::InvalidStructure(format!("unknown carrier label {label:?}"))
                })
        };
        let mut symbols = Vec::new();
        let mut relations = Vec::new();
        for (name, rel) in &file.relations {
            symbols.push(RelSymbol {
                name: name.clone(),
                arity: rel.arity,
            });
            let mut set = BTreeSet::new();
            for t in &rel.tuples {
                let tuple: Vec<usize> = t
                    .iter()
                    .map(|l| index_of(l))
                    .collect::<Result<_>>()?;
                set.insert(tuple);
            }
            relations.push(set);
        }
        let language = RelLanguage { symbols };
        language.validate()?;
        RelStructure::new(language, file.carrier, relations)
    }
}

/// The two-element structure with the 1-in-3 ternary relation; the standard
/// small example that is inhabited-lex-rigid at desk scale.
pub fn one_in_three_structure() -> RelStructure {
    let language = RelLanguage::new(vec![("r1in3", 3)]).unwrap();
    let relations = vec![[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]
        .into_iter()
        .collect()];
    RelStructure::new(language, vec!["0".into(), "1".into()], relations).unwrap()
}

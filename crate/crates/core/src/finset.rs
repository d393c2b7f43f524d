//! The skeleton of finite sets: objects are initial segments `[n] = {0,..,n-1}`
//! and arrows are plain value tables.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A function `[m] -> [n]` given by its value table.
///
/// `[0] -> [0]` is representable; `[m] -> [0]` with `m > 0` is rejected at
/// construction.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FinFunction {
    dom: usize,
    cod: usize,
    values: Vec<usize>,
}

impl FinFunction {
    pub fn new(values: Vec<usize>, cod: usize) -> Result<Self> {
        if cod == 0 && !values.is_empty() {
            return Err(Error::EmptyCodomain { dom: values.len() });
        }
        for &v in &values {
            if v >= cod {
                return Err(Error::ValueOutOfRange { value: v, cod });
            }
        }
        Ok(FinFunction {
            dom: values.len(),
            cod,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        FinFunction {
            dom: n,
            cod: n,
            values: (0..n).collect(),
        }
    }

    /// Constant function `[m] -> [n]` at `value`.
    pub fn constant(dom: usize, cod: usize, value: usize) -> Result<Self> {
        Self::new(vec![value; dom], cod)
    }

    pub fn dom_size(&self) -> usize {
        self.dom
    }

    pub fn cod_size(&self) -> usize {
        self.cod
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn apply(&self, i: usize) -> usize {
        self.values[i]
    }

    /// `self ∘ other`, defined when `other.cod_size == self.dom_size`.
    pub fn compose(&self, other: &FinFunction) -> Result<FinFunction> {
        if other.cod != self.dom {
            return Err(Error::DomainMismatch {
                f_dom: other.dom,
                f_cod: other.cod,
                g_dom: self.dom,
                g_cod: self.cod,
            });
        }
        Ok(FinFunction {
            dom: other.dom,
            cod: self.cod,
            values: other.values.iter().map(|&i| self.values[i]).collect(),
        })
    }

    /// The image `{f(i)}`, sorted ascending.
    pub fn image(&self) -> Vec<usize> {
        let mut im = self.values.clone();
        im.sort_unstable();
        im.dedup();
        im
    }

    pub fn is_injective(&self) -> bool {
        self.image().len() == self.dom
    }

    pub fn is_surjective(&self) -> bool {
        self.image().len() == self.cod
    }

    /// Position of this function in `enumerate_functions(dom, cod)`.
    pub fn rank(&self) -> usize {
        let mut r = 0usize;
        for &v in &self.values {
            r = r * self.cod + v;
        }
        r
    }

    /// Inverse of [`FinFunction::rank`].
    pub fn from_rank(dom: usize, cod: usize, mut rank: usize) -> Result<Self> {
        if cod == 0 && dom > 0 {
            return Err(Error::EmptyCodomain { dom });
        }
        let mut values = vec![0usize; dom];
        for i in (0..dom).rev() {
            values[i] = rank % cod;
            rank /= cod;
        }
        Self::new(values, cod)
    }
}

impl fmt::Debug for FinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:[{}]->[{}]", self.values, self.dom, self.cod)
    }
}

impl fmt::Display for FinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// All functions `[m] -> [n]` in lexicographic order of their value tables.
///
/// For `m = 0` this is the single empty function, even when `n = 0`.
pub fn enumerate_functions(m: usize, n: usize) -> Vec<FinFunction> {
    if m == 0 {
        return vec![FinFunction {
            dom: 0,
            cod: n,
            values: vec![],
        }];
    }
    if n == 0 {
        return vec![];
    }
    let count = n.checked_pow(m as u32).expect("function count overflow");
    let mut out = Vec::with_capacity(count);
    let mut values = vec![0usize; m];
    loop {
        out.push(FinFunction {
            dom: m,
            cod: n,
            values: values.clone(),
        });
        // lexicographic odometer, last coordinate fastest
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            values[i] += 1;
            if values[i] < n {
                break;
            }
            values[i] = 0;
        }
    }
}

/// Number of functions `[m] -> [n]` as a u128 (for cap checks).
pub fn function_count(m: usize, n: usize) -> u128 {
    if m == 0 {
        return 1;
    }
    (n as u128).pow(m as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_two_sided_unit() {
        let id3 = FinFunction::identity(3);
        assert_eq!(id3.compose(&id3).unwrap(), id3);
        let f = FinFunction::new(vec![1, 1, 0], 2).unwrap();
        let id2 = FinFunction::identity(2);
        assert_eq!(id2.compose(&f).unwrap(), f);
        assert_eq!(f.compose(&FinFunction::identity(3)).unwrap(), f);
    }

    #[test]
    fn compose_examples() {
        let g = FinFunction::new(vec![0, 0], 1).unwrap();
        let f = FinFunction::new(vec![1, 1, 0], 2).unwrap();
        let gf = g.compose(&f).unwrap();
        assert_eq!(gf, FinFunction::new(vec![0, 0, 0], 1).unwrap());

        let g = FinFunction::new(vec![2, 0], 3).unwrap();
        let f = FinFunction::new(vec![1, 0], 2).unwrap();
        assert_eq!(
            g.compose(&f).unwrap(),
            FinFunction::new(vec![0, 2], 3).unwrap()
        );
    }

    #[test]
    fn compose_size_mismatch() {
        let g = FinFunction::new(vec![0], 1).unwrap();
        let f = FinFunction::new(vec![0, 1], 2).unwrap();
        assert!(matches!(
            g.compose(&f),
            Err(Error::DomainMismatch { .. })
        ));
    }

    #[test]
    fn image_examples() {
        let f = FinFunction::new(vec![], 2).unwrap();
        assert!(f.image().is_empty());
        let f = FinFunction::new(vec![1, 1, 1], 2).unwrap();
        assert_eq!(f.image(), vec![1]);
        let f = FinFunction::new(vec![2, 0, 2], 3).unwrap();
        assert_eq!(f.image(), vec![0, 2]);
    }

    #[test]
    fn enumerate_counts_and_order() {
        assert_eq!(enumerate_functions(0, 5).len(), 1);
        assert_eq!(enumerate_functions(0, 0).len(), 1);
        assert_eq!(enumerate_functions(2, 0).len(), 0);
        let fs = enumerate_functions(2, 2);
        let tables: Vec<_> = fs.iter().map(|f| f.values().to_vec()).collect();
        assert_eq!(
            tables,
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        assert_eq!(enumerate_functions(3, 2).len(), 8);
    }

    #[test]
    fn enumerate_has_no_duplicates() {
        for m in 0..=3 {
            for n in 0..=3 {
                let fs = enumerate_functions(m, n);
                assert_eq!(fs.len() as u128, if m == 0 { 1 } else { function_count(m, n) });
                let mut seen = std::collections::HashSet::new();
                for f in &fs {
                    assert!(seen.insert(f.clone()));
                }
            }
        }
    }

    #[test]
    fn injective_surjective() {
        let id4 = FinFunction::identity(4);
        assert!(id4.is_injective() && id4.is_surjective());
        let f = FinFunction::new(vec![0, 0], 1).unwrap();
        assert!(!f.is_injective());
        assert!(f.is_surjective());
        let empty = FinFunction::new(vec![], 0).unwrap();
        assert!(empty.is_injective() && empty.is_surjective());
    }

    #[test]
    fn associativity_exhaustive_small() {
        for a in 0..=3usize {
            for b in 0..=3usize {
                for c in 0..=3usize {
                    for d in 0..=3usize {
                        for f in enumerate_functions(a, b) {
                            for g in enumerate_functions(b, c) {
                                for h in enumerate_functions(c, d) {
                                    let lhs = h.compose(&g.compose(&f).unwrap()).unwrap();
                                    let rhs = h.compose(&g).unwrap().compose(&f).unwrap();
                                    assert_eq!(lhs, rhs);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn image_of_composite_inside_image() {
        for a in 0..=3usize {
            for b in 0..=3usize {
                for c in 0..=3usize {
                    for f in enumerate_functions(a, b) {
                        for g in enumerate_functions(b, c) {
                            let gf = g.compose(&f).unwrap();
                            let gim = g.image();
                            for v in gf.image() {
                                assert!(gim.contains(&v));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rank_round_trip() {
        for m in 0..=3 {
            for n in 1..=3 {
                for (i, f) in enumerate_functions(m, n).into_iter().enumerate() {
                    assert_eq!(f.rank(), i);
                    assert_eq!(FinFunction::from_rank(m, n, i).unwrap(), f);
                }
            }
        }
    }

    #[test]
    fn rejects_empty_codomain() {
        assert!(FinFunction::new(vec![0], 0).is_err());
        assert!(FinFunction::new(vec![], 0).is_ok());
    }
}

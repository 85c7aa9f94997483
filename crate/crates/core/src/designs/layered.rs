//! The three-layer structure: `K_m`-factors of `K_N`, `K_ℓ`-factors of each
//! `K_m`, and `S`-matchings of each `K_ℓ`, with reservation and fullness
//! state.

use std::collections::BTreeMap;

use super::factorize::{EtaFactorization, Placement};
use super::resolvable::ResolvableDecomposition;
use crate::error::DesignError;

/// Usage state of one `K_m`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KmState {
    /// Type reserving each `K_ℓ`-factor of this `K_m`.
    pub reserved: Vec<Option<usize>>,
    /// `K_ℓ`-factors whose matchings are all used.
    pub exhausted: Vec<bool>,
    /// Current `(K_ℓ-factor, next matching)` per type.
    pub current: BTreeMap<usize, (usize, usize)>,
    pub used_edges: usize,
    pub full: bool,
    /// Types whose current factor ran out since the last refresh.
    pub pending: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct LayeredDesign {
    pub top: ResolvableDecomposition,
    pub middle: ResolvableDecomposition,
    templates: BTreeMap<usize, EtaFactorization>,
    state: Vec<Vec<KmState>>,
    factor_full: Vec<bool>,
    /// When set, a `K_m` that cannot reserve a factor for some type becomes
    /// full, and so does its `K_m`-factor. Otherwise only that type is
    /// refused.
    pub strict_fullness: bool,
}

impl LayeredDesign {
    pub fn new(top: ResolvableDecomposition, middle: ResolvableDecomposition) -> Self {
        assert_eq!(top.m, middle.n, "middle layer must decompose K_m");
        let lfactors = middle.factors.len();
        let km = KmState {
            reserved: vec![None; lfactors],
            exhausted: vec![false; lfactors],
            ..Default::default()
        };
        let state = top
            .factors
            .iter()
            .map(|f| vec![km.clone(); f.len()])
            .collect();
        let factor_full = vec![false; top.factors.len()];
        LayeredDesign {
            top,
            middle,
            templates: BTreeMap::new(),
            state,
            factor_full,
            strict_fullness: true,
        }
    }

    pub fn host_order(&self) -> usize {
        self.top.n
    }

    pub fn m(&self) -> usize {
        self.top.m
    }

    pub fn l(&self) -> usize {
        self.middle.m
    }

    pub fn factor_count(&self) -> usize {
        self.top.factors.len()
    }

    pub fn blocks_per_factor(&self) -> usize {
        self.top.n / self.top.m
    }

    pub fn middle_factor_count(&self) -> usize {
        self.middle.factors.len()
    }

    pub fn set_template(&mut self, ty: usize, f: EtaFactorization) {
        assert_eq!(f.l, self.l());
        self.templates.insert(ty, f);
    }

    pub fn template(&self, ty: usize) -> Option<&EtaFactorization> {
        self.templates.get(&ty)
    }

    pub fn km(&self, factor: usize, block: usize) -> &KmState {
        &self.state[factor][block]
    }

    pub fn block(&self, factor: usize, block: usize) -> &[usize] {
        &self.top.factors[factor][block]
    }

    fn matchings_of(&self, ty: usize) -> usize {
        self.templates.get(&ty).map_or(0, |t| t.matchings.len())
    }

    /// Reserves the lowest unreserved, unused `K_ℓ`-factor of a `K_m` for
    /// `ty`. With none left, the `K_m` and its `K_m`-factor become full.
    pub fn reserve_factor(
        &mut self,
        factor: usize,
        block: usize,
        ty: usize,
    ) -> Result<usize, DesignError> {
        if self.state[factor][block].full || self.matchings_of(ty) == 0 {
            return Err(DesignError::Full);
        }
        let km = &mut self.state[factor][block];
        match (0..km.reserved.len()).find(|&i| km.reserved[i].is_none() && !km.exhausted[i]) {
            Some(i) => {
                km.reserved[i] = Some(ty);
                km.current.insert(ty, (i, 0));
                Ok(i)
            }
            None => {
                if self.strict_fullness {
                    km.full = true;
                    self.factor_full[factor] = true;
                }
                Err(DesignError::Full)
            }
        }
    }

    /// The `(K_ℓ-factor, matching)` that `ty` would use next in this `K_m`,
    /// without changing state.
    pub fn peek(&self, factor: usize, block: usize, ty: usize) -> Option<(usize, usize)> {
        let km = &self.state[factor][block];
        if km.full {
            return None;
        }
        if let Some(&(lf, j)) = km.current.get(&ty) {
            if j < self.matchings_of(ty) {
                return Some((lf, j));
            }
        }
        if self.matchings_of(ty) == 0 {
            return None;
        }
        (0..km.reserved.len())
            .find(|&i| km.reserved[i].is_none() && !km.exhausted[i])
            .map(|i| (i, 0))
    }

    /// Placements, in host ids, of the `S`-matching of `K_m` formed by
    /// matching `j` of every `K_ℓ` in `K_ℓ`-factor `lf`.
    pub fn instantiate(
        &self,
        factor: usize,
        block: usize,
        lf: usize,
        ty: usize,
        j: usize,
    ) -> Vec<Placement> {
        let hosts = &self.top.factors[factor][block];
        let tpl = &self.templates[&ty];
        let mut out = Vec::new();
        for kl in &self.middle.factors[lf] {
            for p in &tpl.matchings[j] {
                out.push(p.iter().map(|&x| hosts[kl[x]]).collect());
            }
        }
        out
    }

    /// Takes the next `S`-matching for `ty` in a `K_m`, reserving a fresh
    /// `K_ℓ`-factor if needed. Returns `(lf, j)`.
    pub fn take(
        &mut self,
        factor: usize,
        block: usize,
        ty: usize,
        edges_used: usize,
    ) -> Result<(usize, usize), DesignError> {
        let (lf, j) = match self.state[factor][block].current.get(&ty) {
            Some(&(lf, j)) if j < self.matchings_of(ty) => (lf, j),
            _ => {
                let lf = self.reserve_factor(factor, block, ty)?;
                (lf, 0)
            }
        };
        let t = self.matchings_of(ty);
        let km = &mut self.state[factor][block];
        km.used_edges += edges_used;
        if j + 1 == t {
            km.exhausted[lf] = true;
            km.reserved[lf] = None;
            km.current.remove(&ty);
            km.pending.push(ty);
        } else {
            km.current.insert(ty, (lf, j + 1));
        }
        Ok((lf, j))
    }

    /// Step (iv) of the assignment: every type whose current factor was
    /// used up gets a new one; a `K_m` that cannot provide one is full.
    pub fn refresh(&mut self, factor: usize) {
        for block in 0..self.state[factor].len() {
            let pending = std::mem::take(&mut self.state[factor][block].pending);
            for ty in pending {
                if self.state[factor][block].full {
                    break;
                }
                if !self.state[factor][block].current.contains_key(&ty) {
                    let _ = self.reserve_factor(factor, block, ty);
                }
            }
        }
    }

    pub fn is_km_full(&self, factor: usize, block: usize) -> bool {
        self.state[factor][block].full
    }

    pub fn is_factor_full(&self, factor: usize) -> bool {
        self.factor_full[factor]
    }

    pub fn mark_factor_full(&mut self, factor: usize) {
        self.factor_full[factor] = true;
    }

    /// Used edge count of each `K_m` in a factor.
    pub fn used_edges(&self, factor: usize) -> Vec<usize> {
        self.state[factor].iter().map(|k| k.used_edges).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{eta_factorize, resolvable_decomposition};
    use crate::graph::Graph;
    use crate::rational::ratio;

    /// K_16 into K_4's, each K_4 into K_2's (3 factors), K_2 pattern.
    fn small() -> LayeredDesign {
        let mut ld = LayeredDesign::new(
            resolvable_decomposition(16, 4).unwrap(),
            resolvable_decomposition(4, 2).unwrap(),
        );
        let tpl = eta_factorize(2, &Graph::complete(2), ratio(0, 1), 0).unwrap();
        for ty in 0..4 {
            ld.set_template(ty, tpl.clone());
        }
        ld
    }

    #[test]
    fn fresh_reservation_takes_factor_zero() {
        let mut ld = small();
        assert_eq!(ld.reserve_factor(0, 0, 0).unwrap(), 0);
        assert_eq!(ld.reserve_factor(0, 0, 1).unwrap(), 1);
        assert_eq!(ld.km(0, 0).reserved, vec![Some(0), Some(1), None]);
    }

    #[test]
    fn exhaustion_makes_the_km_full() {
        let mut ld = small();
        for _ in 0..3 {
            ld.take(0, 0, 0, 2).unwrap();
            ld.refresh(0);
        }
        assert!(ld.is_km_full(0, 0));
        assert!(ld.is_factor_full(0));
        assert!(matches!(ld.reserve_factor(0, 0, 1), Err(DesignError::Full)));
        assert!(matches!(ld.take(0, 0, 2, 2), Err(DesignError::Full)));
        assert_eq!(ld.peek(0, 0, 0), None);
        assert!(!ld.is_km_full(0, 1));
    }

    #[test]
    fn reservations_are_exclusive() {
        // Every interleaving of reservations by three types over one K_m.
        for order in [[0, 1, 2], [2, 0, 1], [1, 2, 0], [0, 0, 1]] {
            let mut ld = small();
            let mut seen = std::collections::BTreeMap::new();
            for ty in order {
                if let Ok(lf) = ld.reserve_factor(1, 2, ty) {
                    if let Some(prev) = seen.insert(lf, ty) {
                        assert_eq!(prev, ty, "factor {lf} reserved twice");
                    }
                }
            }
            let km = ld.km(1, 2);
            let mut owners: Vec<usize> = km.reserved.iter().flatten().copied().collect();
            owners.sort_unstable();
            let before = owners.len();
            owners.dedup();
            assert!(owners.len() <= before);
        }
    }

    #[test]
    fn instantiation_covers_the_km() {
        let mut ld = small();
        let (lf, j) = ld.take(3, 1, 0, 2).unwrap();
        let ps = ld.instantiate(3, 1, lf, 0, j);
        assert_eq!(ps.len(), 2);
        let mut verts: Vec<usize> = ps.concat();
        verts.sort_unstable();
        let mut block = ld.block(3, 1).to_vec();
        block.sort_unstable();
        assert_eq!(verts, block);
    }

    #[test]
    fn relaxed_fullness_only_refuses_the_type() {
        let mut ld = small();
        ld.strict_fullness = false;
        ld.take(0, 0, 1, 2).unwrap();
        for _ in 0..2 {
            ld.take(0, 0, 0, 2).unwrap();
        }
        assert!(ld.take(0, 0, 0, 2).is_err());
        assert!(!ld.is_km_full(0, 0));
        assert!(ld.take(0, 0, 1, 2).is_err());
        assert!(!ld.is_factor_full(0));
    }
}

//! Matrix product operators for sums of real Pauli strings.
//!
//! Each bond carries a finite automaton: state 0 means "no term started",
//! state 1 means "term finished", and every further state is a pending
//! suffix of letters still to be placed.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliSum};

pub const START: usize = 0;
pub const DONE: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MpoEntry {
    pub from: usize,
    pub to: usize,
    pub coef: f64,
    pub letter: Pauli,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpoSite {
    pub wl: usize,
    pub wr: usize,
    pub entries: Vec<MpoEntry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mpo {
    pub sites: Vec<MpoSite>,
}

impl Mpo {
    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn max_bond(&self) -> usize {
        self.sites.iter().map(|s| s.wr).max().unwrap_or(2)
    }

    /// Builds the automaton MPO. Terms must be real matrices with no `Y`.
    pub fn from_pauli_sum(h: &PauliSum) -> Result<Self> {
        let n = h.n_sites;
        // (first site, letters over [first, last], coefficient), 0-based sites
        let mut words: Vec<(usize, Vec<Pauli>, f64)> = Vec::new();
        for (c, p) in &h.terms {
            if p.count(Pauli::Y) > 0 {
                return Err(Error::Domain(format!("MPO terms may not contain Y: {p}")));
            }
            let sign = if p.phase().power() == 0 { 1.0 } else { -1.0 };
            let Some((a, b)) = p.span() else {
                return Err(Error::Domain(format!("identity terms are not supported")));
            };
            words.push((a - 1, p.letters()[a - 1..b].to_vec(), c * sign));
        }

        // Pending suffix states per bond j (after site j, 0-based bond index j+1).
        let mut bond_states: Vec<BTreeMap<Vec<Pauli>, usize>> = vec![BTreeMap::new(); n + 1];
        for (a, w, _) in &words {
            for k in 1..w.len() {
                let bond = a + k;
                let next = bond_states[bond].len() + 2;
                bond_states[bond].entry(w[k..].to_vec()).or_insert(next);
            }
        }

        let mut sites = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc: BTreeMap<(usize, usize, Pauli), f64> = BTreeMap::new();
            let mut add = |from: usize, to: usize, letter: Pauli, c: f64| {
                *acc.entry((from, to, letter)).or_insert(0.0) += c;
            };
            add(START, START, Pauli::I, 1.0);
            add(DONE, DONE, Pauli::I, 1.0);
            for (a, w, c) in &words {
                if *a == j {
                    if w.len() == 1 {
                        add(START, DONE, w[0], *c);
                    } else {
                        add(START, bond_states[j + 1][&w[1..]], w[0], *c);
                    }
                }
            }
            for (suffix, &from) in &bond_states[j] {
                if suffix.len() == 1 {
                    add(from, DONE, suffix[0], 1.0);
                } else {
                    add(from, bond_states[j + 1][&suffix[1..]], suffix[0], 1.0);
                }
            }
            let entries = acc
                .into_iter()
                .filter(|(_, c)| *c != 0.0)
                .map(|((from, to, letter), coef)| MpoEntry { from, to, coef, letter })
                .collect();
            sites.push(MpoSite {
                wl: bond_states[j].len() + 2,
                wr: bond_states[j + 1].len() + 2,
                entries,
            });
        }
        Ok(Self { sites })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{cluster_hamiltonian, ChainSpec};

    #[test]
    fn cluster_mpo_is_narrow() {
        let h = cluster_hamiltonian(&ChainSpec::new(9, 0.3).unwrap()).unwrap();
        let mpo = Mpo::from_pauli_sum(&h).unwrap();
        assert_eq!(mpo.n_sites(), 9);
        assert!(mpo.max_bond() <= 5, "bond {}", mpo.max_bond());
        assert_eq!(mpo.sites[0].wl, 2);
        assert_eq!(mpo.sites[8].wr, 2);
    }
}

//! Elements of the discrete ultrametric groups: direct sums ⊕_j Z(q) and the
//! finitary symmetric group. Both are unions of nested finite subgroups
//! 𝔊_0 ⊂ 𝔊_1 ⊂ …, where 𝔊_k holds the coordinates supported on 1..k for
//! direct sums and the permutations of {1..k+1} for the symmetric group;
//! the one-index shift makes 𝔊_0 = {e} and gives the ball volumes
//! V(k) = (k+1)! that the factorial spectral theory is built on. The level
//! of an element, the smallest k with x ∈ 𝔊_k, is therefore the max touched
//! coordinate for direct sums and the max moved point minus one for
//! permutations.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupElement {
    /// Finite-support vector over Z(q); canonical form stores no zeros.
    DirectSum { q: u32, coords: BTreeMap<u32, u32> },
    /// Finite-support permutation of ℕ; canonical form stores no fixed points.
    Permutation { map: BTreeMap<u32, u32> },
}

impl GroupElement {
    pub fn sum_identity(q: u32) -> Self {
        GroupElement::DirectSum {
            q,
            coords: BTreeMap::new(),
        }
    }

    pub fn permutation_identity() -> Self {
        GroupElement::Permutation {
            map: BTreeMap::new(),
        }
    }

    pub fn sum_from_coords(q: u32, entries: &[(u32, u32)]) -> Result<Self> {
        if q < 2 {
            return Err(Error::config("q must be at least 2"));
        }
        let mut coords = BTreeMap::new();
        for &(i, v) in entries {
            if i == 0 {
                return Err(Error::domain("coordinates are indexed from 1"));
            }
            if v % q != 0 {
                coords.insert(i, v % q);
            }
        }
        Ok(GroupElement::DirectSum { q, coords })
    }

    pub fn permutation_from_map(entries: &[(u32, u32)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut seen = std::collections::BTreeSet::new();
        for &(i, v) in entries {
            if i == 0 || v == 0 {
                return Err(Error::domain("points are indexed from 1"));
            }
            if !seen.insert(v) || map.insert(i, v).is_some() {
                return Err(Error::domain("mapping is not a bijection"));
            }
        }
        let domain: std::collections::BTreeSet<u32> = map.keys().cloned().collect();
        let range: std::collections::BTreeSet<u32> = map.values().cloned().collect();
        if domain != range {
            return Err(Error::domain("support and image differ; not finitary"));
        }
        map.retain(|k, v| k != v);
        Ok(GroupElement::Permutation { map })
    }

    pub fn is_identity(&self) -> bool {
        match self {
            GroupElement::DirectSum { coords, .. } => coords.is_empty(),
            GroupElement::Permutation { map } => map.is_empty(),
        }
    }

    /// Smallest k with x ∈ 𝔊_k.
    pub fn level(&self) -> u32 {
        match self {
            GroupElement::DirectSum { coords, .. } => {
                coords.keys().next_back().copied().unwrap_or(0)
            }
            GroupElement::Permutation { map } => {
                let dom = map.keys().next_back().copied().unwrap_or(0);
                let img = map.values().max().copied().unwrap_or(0);
                // a permutation moving points up to m lies in 𝔊_{m-1}
                dom.max(img).saturating_sub(1)
            }
        }
    }

    /// self · other. For permutations acting on points, (x·g)(i) = x(g(i)).
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        match (self, other) {
            (
                GroupElement::DirectSum { q, coords },
                GroupElement::DirectSum {
                    q: q2,
                    coords: other_coords,
                },
            ) => {
                if q != q2 {
                    return Err(Error::domain("mismatched coordinate moduli"));
                }
                let mut out = coords.clone();
                for (&i, &v) in other_coords {
                    let s = (out.get(&i).copied().unwrap_or(0) + v) % q;
                    if s == 0 {
                        out.remove(&i);
                    } else {
                        out.insert(i, s);
                    }
                }
                Ok(GroupElement::DirectSum { q: *q, coords: out })
            }
            (GroupElement::Permutation { map }, GroupElement::Permutation { map: g }) => {
                let apply = |m: &BTreeMap<u32, u32>, i: u32| m.get(&i).copied().unwrap_or(i);
                let mut support: std::collections::BTreeSet<u32> = map.keys().cloned().collect();
                support.extend(g.keys().cloned());
                let mut out = BTreeMap::new();
                for &i in &support {
                    let v = apply(map, apply(g, i));
                    if v != i {
                        out.insert(i, v);
                    }
                }
                Ok(GroupElement::Permutation { map: out })
            }
            _ => Err(Error::domain(
                "cannot compose elements of different group kinds",
            )),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        match self {
            GroupElement::DirectSum { q, coords } => GroupElement::DirectSum {
                q: *q,
                coords: coords.iter().map(|(&i, &v)| (i, (q - v) % q)).collect(),
            },
            GroupElement::Permutation { map } => GroupElement::Permutation {
                map: map.iter().map(|(&i, &v)| (v, i)).collect(),
            },
        }
    }
}

/// Level of x⁻¹y, the ultrametric distance between group elements.
pub fn ultrametric_distance(x: &GroupElement, y: &GroupElement) -> Result<u32> {
    Ok(x.inverse().compose(y)?.level())
}

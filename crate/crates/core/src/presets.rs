//! Named algebras and the catalog of morphisms among the preset family.
//!
//! | name | presentation |
//! |------|--------------|
//! | `R` | no generators |
//! | `dual` | `Q[x0]/(x0^2)` |
//! | `jet<k>` | `Q[x0]/(x0^(k+1))` |
//! | `Dn<n>` | `Q[x0..x{n-1}]` modulo all degree-2 monomials |
//! | `W<k>,<n>` | `Q[x0..x{n-1}]` modulo all degree-`k+1` monomials |
//! | `A⊗B` | tensor product of two presets (also written `A*B`) |

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::algebra::{tensor, WeilAlgebra, WeilMorphism};
use crate::error::Result;
use crate::poly::{Monomial, Polynomial};
use crate::scalar::Rational;
use num_traits::One;

/// Names of the preset family used by the law and limit suites.
pub const FAMILY: [&str; 6] = ["R", "dual", "jet2", "jet3", "Dn2", "dual⊗dual"];

fn truncated(n: usize, degree: u32) -> Result<Arc<WeilAlgebra>> {
    let rels = Monomial::all_of_degree(n, degree)
        .into_iter()
        .map(|m| Polynomial::term(m, Rational::one()))
        .collect();
    WeilAlgebra::new(n, rels)
}

fn number(s: &str) -> Option<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Resolve a preset name; `None` when the name is not a preset.
pub fn preset(name: &str) -> Option<Result<Arc<WeilAlgebra>>> {
    if let Some((a, b)) = name.split_once('⊗').or_else(|| name.split_once('*')) {
        let a = preset(a.trim())?;
        let b = preset(b.trim())?;
        return Some(a.and_then(|a| b.and_then(|b| Ok(tensor(&a, &b)?.algebra))));
    }
    if name == "R" {
        return Some(Ok(WeilAlgebra::real()));
    }
    if name == "dual" {
        return Some(WeilAlgebra::from_strs(1, &["x0^2"]));
    }
    if let Some(k) = name.strip_prefix("jet").and_then(number) {
        if k == 0 {
            return Some(Ok(WeilAlgebra::real()));
        }
        let rel = alloc::format!("x0^{}", k + 1);
        return Some(WeilAlgebra::from_strs(1, &[rel.as_str()]));
    }
    if let Some(n) = name.strip_prefix("Dn").and_then(number) {
        return Some(if n == 0 { Ok(WeilAlgebra::real()) } else { truncated(n, 2) });
    }
    if let Some((k, n)) = name.strip_prefix('W').and_then(|s| s.split_once(',')) {
        let (k, n) = (number(k)?, number(n)?);
        return Some(if n == 0 || k == 0 {
            Ok(WeilAlgebra::real())
        } else {
            truncated(n, k as u32 + 1)
        });
    }
    None
}

/// The preset family as `(name, algebra)` pairs, in [`FAMILY`] order.
pub fn family() -> Vec<(String, Arc<WeilAlgebra>)> {
    FAMILY
        .iter()
        .map(|n| {
            let w = preset(n).expect("family names are presets").expect("presets build");
            (n.to_string(), w)
        })
        .collect()
}

/// A morphism of the catalog with a readable label.
#[derive(Debug, Clone)]
pub struct NamedMorphism {
    pub name: String,
    pub source: String,
    pub target: String,
    pub morphism: WeilMorphism,
}

// non-structural morphisms: (source, target, generator images)
const CATALOG: &[(&str, &str, &[&str])] = &[
    ("jet3", "jet2", &["x0"]),
    ("jet3", "dual", &["x0"]),
    ("jet2", "dual", &["x0"]),
    ("dual", "jet2", &["x0^2"]),
    ("dual", "jet3", &["x0^2"]),
    ("dual", "jet3", &["x0^3"]),
    ("jet2", "jet3", &["x0^2"]),
    ("dual", "Dn2", &["x0"]),
    ("dual", "Dn2", &["x1"]),
    ("Dn2", "dual", &["x0", "0"]),
    ("Dn2", "dual", &["x0", "x0"]),
    ("dual", "dual⊗dual", &["x0"]),
    ("dual", "dual⊗dual", &["x1"]),
    ("dual", "dual⊗dual", &["x0 + x0*x1"]),
    ("dual", "dual⊗dual", &["x0*x1"]),
    ("dual⊗dual", "dual", &["x0", "x0"]),
    ("dual⊗dual", "dual", &["x0", "0"]),
    ("dual⊗dual", "Dn2", &["x0", "x1"]),
    ("Dn2", "dual⊗dual", &["x0", "x0"]),
    ("jet2", "dual⊗dual", &["x0 + x1"]),
    ("jet3", "dual⊗dual", &["x0 + x1"]),
    ("dual⊗dual", "jet2", &["x0^2", "x0^2"]),
    ("jet2", "Dn2", &["x0"]),
];

/// Identities, augmentations, units and the fixed catalog among `family`.
pub fn morphisms(family: &[(String, Arc<WeilAlgebra>)]) -> Vec<NamedMorphism> {
    let find = |n: &str| family.iter().find(|(m, _)| m == n).map(|(_, w)| w);
    let mut out = Vec::new();
    let r = find("R");
    for (name, w) in family {
        out.push(NamedMorphism {
            name: alloc::format!("id[{name}]"),
            source: name.clone(),
            target: name.clone(),
            morphism: WeilMorphism::identity(w),
        });
        if r.is_some() {
            out.push(NamedMorphism {
                name: alloc::format!("aug[{name}]"),
                source: name.clone(),
                target: "R".into(),
                morphism: WeilMorphism::augmentation(w),
            });
            out.push(NamedMorphism {
                name: alloc::format!("unit[{name}]"),
                source: "R".into(),
                target: name.clone(),
                morphism: WeilMorphism::unit(w),
            });
        }
    }
    for (s, t, images) in CATALOG {
        if let (Some(ws), Some(wt)) = (find(s), find(t)) {
            let morphism = WeilMorphism::from_strs(ws, wt, images).expect("catalog entries are morphisms");
            out.push(NamedMorphism {
                name: alloc::format!("{s}→{t}[{}]", images.join(", ")),
                source: (*s).into(),
                target: (*t).into(),
                morphism,
            });
        }
    }
    out
}

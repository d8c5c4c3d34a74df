//! Named group laws used by the reference problems.
//!
//! Laws are written in x1..xn for the first operand and x(n+1)..x(2n) for the
//! second one.

use super::{Dilation, GroupLaw, HomogeneousGroup};

struct Entry {
    name: &'static str,
    sigma: &'static [u32],
    compose: &'static [&'static str],
    inverse: &'static [&'static str],
}

const ENTRIES: &[Entry] = &[
    Entry { name: "euclidean", sigma: &[1, 1], compose: &["x1 + x3", "x2 + x4"], inverse: &["-x1", "-x2"] },
    Entry {
        name: "heisenberg",
        sigma: &[1, 1, 2],
        compose: &["x1 + x4", "x2 + x5", "x3 + x6 + x2*x4 - x1*x5"],
        inverse: &["-x1", "-x2", "-x3"],
    },
    // (x,y,z,w,t). The t-component carries -x*y*xi, which is needed for
    // associativity and for the generators to be left invariant.
    Entry {
        name: "example3",
        sigma: &[1, 1, 2, 2, 3],
        compose: &[
            "x1 + x6",
            "x2 + x7",
            "x3 + x8",
            "x4 + x9 + x1*x7",
            "x5 + x10 - 1/2*x2*x6^2 - x1*x6*x7 + x1*x8 + x1*x9 - x1*x2*x6",
        ],
        inverse: &["-x1", "-x2", "-x3", "-x4 + x1*x2", "-x5 + x1*x4 + x1*x3 - 1/2*x1^2*x2"],
    },
    // Same coordinates, t-component exactly as usually printed for this example.
    Entry {
        name: "example3-printed",
        sigma: &[1, 1, 2, 2, 3],
        compose: &[
            "x1 + x6",
            "x2 + x7",
            "x3 + x8",
            "x4 + x9 + x1*x7",
            "x5 + x10 - 1/2*x2*x6^2 - x1*x6*x7 + x1*x8 + x1*x9",
        ],
        inverse: &["-x1", "-x2", "-x3", "-x4 + x1*x2", "-x5 + x1*x4 + x1*x3 + 1/2*x1^2*x2"],
    },
    // (x,y,s,t,w): Heisenberg in (x,y,s) linked with (x,t,w) through x*d/dw - d/dt.
    Entry {
        name: "example4-link",
        sigma: &[1, 1, 2, 2, 3],
        compose: &["x1 + x6", "x2 + x7", "x3 + x8 + x2*x6 - x1*x7", "x4 + x9", "x5 + x10 - x1*x9"],
        inverse: &["-x1", "-x2", "-x3", "-x4", "-x5 - x1*x4"],
    },
    // (x,t,y) with d/dx and x*d/dy + d/dt.
    Entry {
        name: "kolmogorov",
        sigma: &[1, 2, 3],
        compose: &["x1 + x4", "x2 + x5", "x3 + x6 + x1*x5"],
        inverse: &["-x1", "-x2", "-x3 + x1*x2"],
    },
];

pub fn group_names() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.name).collect()
}

pub fn group_by_name(name: &str) -> Option<HomogeneousGroup> {
    let e = ENTRIES.iter().find(|e| e.name == name)?;
    let law = GroupLaw::parse(e.compose, e.inverse).expect("registered law parses");
    let d = Dilation::new(e.sigma.to_vec()).expect("registered dilation");
    Some(HomogeneousGroup::new(e.name, law, d).expect("registered group is homogeneous"))
}

/// Abelian group on R^n with the given dilation.
pub fn abelian_group(name: &str, sigma: Vec<u32>) -> HomogeneousGroup {
    let n = sigma.len();
    HomogeneousGroup::new(name, GroupLaw::abelian(n), Dilation::new(sigma).expect("sorted dilation"))
        .expect("abelian law is homogeneous")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::verify_group;

    #[test]
    fn registered_laws_are_groups() {
        for name in group_names() {
            let g = group_by_name(name).unwrap();
            let r = verify_group(g.law(), g.dilation(), 20, 7);
            if name == "example3-printed" {
                assert!(!r.associative_exact);
                assert!(r.associativity_residual > 0.0);
            } else {
                assert!(r.passed(), "{name}: {r:?}");
            }
        }
    }
}

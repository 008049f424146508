//! Cross-oracle verification: the recursive PGFs, the frozen reference
//! tables, and the exhaustive enumeration must agree exactly wherever
//! their domains overlap, and the scalar moment recursions must match
//! the moments read off the PGFs. Any inequality is a bug somewhere;
//! this module turns that into a runnable gate with named checks.

use serde::{Deserialize, Serialize};

use crate::dst::{self, KeyModel, SearchKind};
use crate::{bst, enumeration};

/// How much enumeration the run buys. `Fast` sweeps every n <= 4 case,
/// `Default` adds all of n = 5 except the finite-key unsuccessful
/// search, `Full` adds that too (~6.5e8 configurations).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Fast,
    Default,
    Full,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Fast => "fast",
            Tier::Default => "default",
            Tier::Full => "full",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub tier: Tier,
    pub passed: bool,
    pub checks: Vec<Check>,
}

pub fn run(tier: Tier) -> VerifyReport {
    let mut checks = Vec::new();
    bst_pgf_vs_moments(&mut checks);
    dst_recursions_vs_goldens(&mut checks);
    dst_pgf_vs_moments(&mut checks);
    enumeration_vs_goldens(&mut checks, tier);
    enumeration_vs_recursions(&mut checks, tier);
    width_stability(&mut checks, tier);
    let passed = checks.iter().all(|c| c.passed);
    VerifyReport {
        tier,
        passed,
        checks,
    }
}

fn push(checks: &mut Vec<Check>, name: &str, passed: bool, detail: String) {
    checks.push(Check {
        name: name.to_string(),
        passed,
        detail,
    });
}

/// Moments read off the PGFs equal the scalar recursions, for both tree
/// models. Exercises completely different code paths on each side.
fn bst_pgf_vs_moments(checks: &mut Vec<Check>) {
    let mut bad = Vec::new();
    for n in 1..=10u64 {
        let u = bst::unsuccessful_moments(n);
        if bst::unsuccessful_pgf(n).mean() != u.mean || bst::unsuccessful_pgf(n).variance() != u.variance {
            bad.push(format!("unsuccessful n={n}"));
        }
        let s = bst::successful_moments(n);
        if bst::successful_pgf(n).mean() != s.mean || bst::successful_pgf(n).variance() != s.variance {
            bad.push(format!("successful n={n}"));
        }
        let l = bst::path_length_moments(n);
        if bst::path_length_pgf(n).mean() != l.mean || bst::path_length_pgf(n).variance() != l.variance {
            bad.push(format!("path length n={n}"));
        }
    }
    push(
        checks,
        "bst pgf-vs-moment agreement",
        bad.is_empty(),
        if bad.is_empty() {
            "n=1..10, three cost variables".into()
        } else {
            format!("mismatch: {}", bad.join(", "))
        },
    );
}

fn dst_pgf_vs_moments(checks: &mut Vec<Check>) {
    let mut bad = Vec::new();
    for n in 1..=10u64 {
        let l = dst::path_length_moments(n);
        let f = dst::path_length_pgf(n);
        if f.mean() != l.mean || f.variance() != l.variance {
            bad.push(format!("n={n}"));
        }
    }
    push(
        checks,
        "dst pgf-vs-moment agreement",
        bad.is_empty(),
        if bad.is_empty() {
            "path length, n=1..10".into()
        } else {
            format!("mismatch: {}", bad.join(", "))
        },
    );
}

/// The infinite-key search recursions reproduce the frozen tables.
fn dst_recursions_vs_goldens(checks: &mut Vec<Check>) {
    let mut bad = Vec::new();
    for n in 2..=5u64 {
        if dst::unsuccessful_pgf_infinite(n)
            != dst::golden_pgf(SearchKind::Unsuccessful, KeyModel::Infinite, n).unwrap()
        {
            bad.push(format!("unsuccessful n={n}"));
        }
        if dst::successful_pgf_infinite(n)
            != dst::golden_pgf(SearchKind::Successful, KeyModel::Infinite, n).unwrap()
        {
            bad.push(format!("successful n={n}"));
        }
    }
    push(
        checks,
        "dst recursion-vs-table agreement",
        bad.is_empty(),
        if bad.is_empty() {
            "both searches, n=2..5".into()
        } else {
            format!("mismatch: {}", bad.join(", "))
        },
    );
}

/// Which golden-table entries the tier re-derives by enumeration.
fn in_tier(tier: Tier, mode: SearchKind, model: KeyModel, n: u64) -> bool {
    match tier {
        Tier::Fast => n <= 4,
        Tier::Default => {
            n <= 4 || model == KeyModel::Infinite || mode != SearchKind::Unsuccessful
        }
        Tier::Full => true,
    }
}

fn enumeration_vs_goldens(checks: &mut Vec<Check>, tier: Tier) {
    let mut bad = Vec::new();
    let mut ran = 0;
    for (mode, model, n) in dst::golden_pgf_index() {
        if !in_tier(tier, mode, model, n) {
            continue;
        }
        ran += 1;
        let r = enumeration::enumerate(n, mode, model).unwrap();
        if r.pgf != dst::golden_pgf(mode, model, n).unwrap() {
            bad.push(format!("{} {} n={n}", mode.as_str(), model.as_str()));
        }
    }
    push(
        checks,
        "enumeration-vs-table agreement",
        bad.is_empty(),
        if bad.is_empty() {
            format!("{ran} tables re-derived by exhaustive counting")
        } else {
            format!("mismatch: {}", bad.join(", "))
        },
    );
}

fn enumeration_vs_recursions(checks: &mut Vec<Check>, tier: Tier) {
    let top = match tier {
        Tier::Fast => 4,
        Tier::Default | Tier::Full => 5,
    };
    let mut bad = Vec::new();
    for n in 1..=top {
        let pairs = [
            (
                SearchKind::Unsuccessful,
                dst::unsuccessful_pgf_infinite(n),
            ),
            (SearchKind::Successful, dst::successful_pgf_infinite(n)),
            (SearchKind::PathLength, dst::path_length_pgf(n)),
        ];
        for (mode, expected) in pairs {
            let r = enumeration::enumerate(n, mode, KeyModel::Infinite).unwrap();
            if r.pgf != expected {
                bad.push(format!("{} n={n}", mode.as_str()));
            }
        }
    }
    push(
        checks,
        "enumeration-vs-recursion agreement",
        bad.is_empty(),
        if bad.is_empty() {
            format!("infinite keys, three cost variables, n=1..{top}")
        } else {
            format!("mismatch: {}", bad.join(", "))
        },
    );
}

fn width_stability(checks: &mut Vec<Check>, tier: Tier) {
    let top = match tier {
        Tier::Fast => 3,
        Tier::Default | Tier::Full => 4,
    };
    let mut bad = Vec::new();
    for n in 1..=top {
        for mode in [
            SearchKind::Unsuccessful,
            SearchKind::Successful,
            SearchKind::PathLength,
        ] {
            if !enumeration::width_stability_check(n, mode).unwrap() {
                bad.push(format!("{} n={n}", mode.as_str()));
            }
        }
    }
    push(
        checks,
        "truncation width stability",
        bad.is_empty(),
        if bad.is_empty() {
            format!("widths n and n+1 agree, n=1..{top}")
        } else {
            format!("instability: {}", bad.join(", "))
        },
    );
}

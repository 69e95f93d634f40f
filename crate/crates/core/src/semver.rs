//! Lenient semantic-version parsing, total ordering, step classification, and
//! version-specification resolution.
//!
//! Maven-style version strings do not always follow strict SemVer
//! (`2.3.4.RELEASE`, `1.0`), so parsing is lenient: the leading dot-separated
//! digits form the numeric triple (missing positions default to zero) and
//! whatever remains becomes the qualifier token list. A version with an empty
//! qualifier is *stable*; qualified versions order below their unqualified
//! counterpart, with qualifier tokens compared SemVer-style (numeric tokens
//! numerically and below alphanumeric ones, otherwise lexicographic, shorter
//! list first on prefix equality).

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VersionError {
    #[error("empty version string")]
    Empty,
    #[error("version ordering violated: {from} > {to}")]
    NotAnUpgrade { from: String, to: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("malformed version spec `{0}`")]
    Malformed(String),
    #[error("version spec `{0}` has lower bound above upper bound")]
    EmptyRange(String),
    #[error("no available version satisfies spec `{spec}`")]
    NoMatch { spec: String },
}

/// A parsed version. Ordering, equality, and hashing consider only the
/// semantic content (numeric triple and qualifier); the original string is
/// preserved for lossless rendering.
#[derive(Debug, Clone)]
pub struct Version {
    major: u64,
    minor: u64,
    patch: u64,
    qualifier: Vec<String>,
    raw: String,
}

impl Version {
    /// Parses a version string leniently. Only the empty string is rejected.
    pub fn parse(text: &str) -> Result<Self, VersionError> {
        if text.is_empty() {
            return Err(VersionError::Empty);
        }
        let (head, tail) = match text.split_once('-') {
            Some((h, t)) => (h, Some(t)),
            None => (text, None),
        };
        let mut numbers = [0u64; 3];
        let mut filled = 0;
        let mut qualifier: Vec<String> = Vec::new();
        for part in head.split('.') {
            if filled < 3
                && qualifier.is_empty()
                && !part.is_empty()
                && part.bytes().all(|b| b.is_ascii_digit())
            {
                if let Ok(n) = part.parse::<u64>() {
                    numbers[filled] = n;
                    filled += 1;
                    continue;
                }
            }
            if !part.is_empty() {
                qualifier.push(part.to_string());
            }
        }
        if let Some(tail) = tail {
            qualifier.extend(tail.split('.').filter(|p| !p.is_empty()).map(String::from));
        }
        Ok(Self {
            major: numbers[0],
            minor: numbers[1],
            patch: numbers[2],
            qualifier,
            raw: text.to_string(),
        })
    }

    pub fn major(&self) -> u64 {
        self.major
    }

    pub fn minor(&self) -> u64 {
        self.minor
    }

    pub fn patch(&self) -> u64 {
        self.patch
    }

    pub fn qualifier(&self) -> &[String] {
        &self.qualifier
    }

    /// Original input string.
    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// A version is stable when it carries no qualifier.
    pub fn is_stable(&self) -> bool {
        self.qualifier.is_empty()
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

fn qualifier_token_cmp(a: &str, b: &str) -> Ordering {
    let na = a.bytes().all(|c| c.is_ascii_digit()).then(|| a.parse::<u64>().ok()).flatten();
    let nb = b.bytes().all(|c| c.is_ascii_digit()).then(|| b.parse::<u64>().ok()).flatten();
    match (na, nb) {
        (Some(x), Some(y)) => x.cmp(&y),
        // Numeric identifiers order below alphanumeric ones.
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.cmp(b),
    }
}

impl Ord for Version {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.major, self.minor, self.patch)
            .cmp(&(other.major, other.minor, other.patch))
            .then_with(|| match (self.qualifier.is_empty(), other.qualifier.is_empty()) {
                (true, true) => Ordering::Equal,
                // An unqualified version is newer than any qualified one.
                (true, false) => Ordering::Greater,
                (false, true) => Ordering::Less,
                (false, false) => {
                    for (a, b) in self.qualifier.iter().zip(other.qualifier.iter()) {
                        match qualifier_token_cmp(a, b) {
                            Ordering::Equal => continue,
                            ord => return ord,
                        }
                    }
                    self.qualifier.len().cmp(&other.qualifier.len())
                }
            })
    }
}

impl PartialOrd for Version {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Version {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Version {}

impl core::hash::Hash for Version {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        self.major.hash(state);
        self.minor.hash(state);
        self.patch.hash(state);
        self.qualifier.hash(state);
    }
}

/// Which SemVer level an upgrade step touches.
///
/// The variant order makes `Major` the greatest level, so `max` over steps
/// picks the riskiest one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LagLevel {
    None,
    PreRelease,
    Patch,
    Minor,
    Major,
}

impl fmt::Display for LagLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            LagLevel::None => "none",
            LagLevel::PreRelease => "pre-release",
            LagLevel::Patch => "patch",
            LagLevel::Minor => "minor",
            LagLevel::Major => "major",
        };
        f.write_str(name)
    }
}

/// Classifies the upgrade step from `from` to `to` (requires `from <= to`).
///
/// Steps that change none of the three numeric digits but still change the
/// version are qualifier-only and classify as `PreRelease`.
pub fn classify_step(from: &Version, to: &Version) -> Result<LagLevel, VersionError> {
    if from > to {
        return Err(VersionError::NotAnUpgrade {
            from: from.raw.clone(),
            to: to.raw.clone(),
        });
    }
    let level = if to.major > from.major {
        LagLevel::Major
    } else if to.minor > from.minor {
        LagLevel::Minor
    } else if to.patch > from.patch {
        LagLevel::Patch
    } else if from != to {
        LagLevel::PreRelease
    } else {
        LagLevel::None
    };
    Ok(level)
}

/// A declared version constraint: either an exact version or a bounded range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VersionSpec {
    Exact(Version),
    Range {
        lower: Option<(Version, bool)>,
        upper: Option<(Version, bool)>,
    },
}

impl VersionSpec {
    pub fn exact(version: Version) -> Self {
        VersionSpec::Exact(version)
    }

    /// Parses Maven-style constraints: a plain version is exact, `[v]` is
    /// exact, and `[a,b)` / `(a,b]` / `[a,)` / `(,b]` are ranges whose
    /// brackets carry inclusivity. A bound left blank is open.
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(SpecError::Malformed(String::new()));
        }
        let first = text.as_bytes()[0];
        if first != b'[' && first != b'(' {
            let version = Version::parse(text).map_err(|_| SpecError::Malformed(text.to_string()))?;
            return Ok(VersionSpec::Exact(version));
        }
        let last = text.as_bytes()[text.len() - 1];
        if last != b']' && last != b')' {
            return Err(SpecError::Malformed(text.to_string()));
        }
        let lower_inclusive = first == b'[';
        let upper_inclusive = last == b']';
        let inner = &text[1..text.len() - 1];
        let (lo, hi) = match inner.split_once(',') {
            Some((lo, hi)) => (lo.trim(), hi.trim()),
            None => {
                // Single bracketed version: a hard exact requirement.
                if !lower_inclusive || !upper_inclusive || inner.trim().is_empty() {
                    return Err(SpecError::Malformed(text.to_string()));
                }
                let version =
                    Version::parse(inner.trim()).map_err(|_| SpecError::Malformed(text.to_string()))?;
                return Ok(VersionSpec::Exact(version));
            }
        };
        if hi.contains(',') {
            return Err(SpecError::Malformed(text.to_string()));
        }
        let lower = if lo.is_empty() {
            None
        } else {
            let v = Version::parse(lo).map_err(|_| SpecError::Malformed(text.to_string()))?;
            Some((v, lower_inclusive))
        };
        let upper = if hi.is_empty() {
            None
        } else {
            let v = Version::parse(hi).map_err(|_| SpecError::Malformed(text.to_string()))?;
            Some((v, upper_inclusive))
        };
        if let (Some((lo, _)), Some((hi, _))) = (&lower, &upper) {
            if lo > hi {
                return Err(SpecError::EmptyRange(text.to_string()));
            }
        }
        Ok(VersionSpec::Range { lower, upper })
    }

    pub fn matches(&self, candidate: &Version) -> bool {
        match self {
            VersionSpec::Exact(v) => candidate == v,
            VersionSpec::Range { lower, upper } => {
                let lower_ok = match lower {
                    None => true,
                    Some((v, true)) => candidate >= v,
                    Some((v, false)) => candidate > v,
                };
                let upper_ok = match upper {
                    None => true,
                    Some((v, true)) => candidate <= v,
                    Some((v, false)) => candidate < v,
                };
                lower_ok && upper_ok
            }
        }
    }
}

impl fmt::Display for VersionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VersionSpec::Exact(v) => f.write_str(v.raw()),
            VersionSpec::Range { lower, upper } => {
                match lower {
                    Some((v, true)) => write!(f, "[{}", v.raw())?,
                    Some((v, false)) => write!(f, "({}", v.raw())?,
                    None => f.write_str("(")?,
                }
                f.write_str(",")?;
                match upper {
                    Some((v, true)) => write!(f, "{}]", v.raw()),
                    Some((v, false)) => write!(f, "{})", v.raw()),
                    None => f.write_str(")"),
                }
            }
        }
    }
}

/// Resolves a spec against an ascending list of available versions: exact
/// specs return the matching version, ranges return the newest version inside
/// the range.
pub fn resolve_spec<'a>(spec: &VersionSpec, available: &'a [Version]) -> Result<&'a Version, SpecError> {
    let found = match spec {
        VersionSpec::Exact(v) => available.iter().find(|candidate| *candidate == v),
        VersionSpec::Range { .. } => available.iter().rev().find(|candidate| spec.matches(candidate)),
    };
    found.ok_or_else(|| SpecError::NoMatch {
        spec: spec.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(s: &str) -> Version {
        Version::parse(s).unwrap()
    }

    #[test]
    fn parses_plain_triples() {
        let p = v("1.0.1");
        assert_eq!((p.major(), p.minor(), p.patch()), (1, 0, 1));
        assert!(p.qualifier().is_empty());
        assert!(p.is_stable());
    }

    #[test]
    fn parses_trailing_release_token_as_qualifier() {
        let p = v("2.3.4.RELEASE");
        assert_eq!((p.major(), p.minor(), p.patch()), (2, 3, 4));
        assert_eq!(p.qualifier(), ["RELEASE"]);
        assert!(!p.is_stable());
    }

    #[test]
    fn missing_positions_default_to_zero() {
        let p = v("1.0");
        assert_eq!((p.major(), p.minor(), p.patch()), (1, 0, 0));
        assert!(p.is_stable());
        let p = v("7");
        assert_eq!((p.major(), p.minor(), p.patch()), (7, 0, 0));
    }

    #[test]
    fn dash_qualifiers_split_on_dots() {
        let p = v("1.0.0-alpha.1");
        assert_eq!(p.qualifier(), ["alpha", "1"]);
    }

    #[test]
    fn digitless_string_is_all_qualifier() {
        let p = v("final");
        assert_eq!((p.major(), p.minor(), p.patch()), (0, 0, 0));
        assert_eq!(p.qualifier(), ["final"]);
    }

    #[test]
    fn empty_string_rejected() {
        assert_eq!(Version::parse(""), Err(VersionError::Empty));
    }

    #[test]
    fn raw_rendering_is_lossless() {
        for s in ["1.0.1", "2.3.4.RELEASE", "1.0", "1.0.0-alpha.1", "0.1-beta"] {
            assert_eq!(v(s).to_string(), s);
        }
    }

    #[test]
    fn compare_examples() {
        assert!(v("1.0.0") < v("1.0.1"));
        assert_eq!(v("1.0.0"), v("1.0.0"));
        assert!(v("1.0.0-alpha") < v("1.0.0"));
    }

    // Reference precedence table, built by hand from the SemVer 2.0.0
    // precedence rules before the comparator was written. Each pair is
    // (smaller, larger).
    const PRECEDENCE_TABLE: &[(&str, &str)] = &[
        ("1.0.0", "2.0.0"),
        ("2.0.0", "2.1.0"),
        ("2.1.0", "2.1.1"),
        ("1.0.0-alpha", "1.0.0"),
        ("1.0.0-alpha", "1.0.0-alpha.1"),
        ("1.0.0-alpha.1", "1.0.0-alpha.beta"),
        ("1.0.0-alpha.beta", "1.0.0-beta"),
        ("1.0.0-beta", "1.0.0-beta.2"),
        ("1.0.0-beta.2", "1.0.0-beta.11"),
        ("1.0.0-beta.11", "1.0.0-rc.1"),
        ("1.0.0-rc.1", "1.0.0"),
        ("1.0.0-1", "1.0.0-2"),
        ("1.0.0-2", "1.0.0-10"),
        ("1.0.0-9", "1.0.0-alpha"),
        ("1.0.0-alpha.1", "1.0.0-alpha.2"),
        ("1.0.0-alpha.2", "1.0.0-alpha.10"),
        ("1.0.0-rc.1", "1.0.1-alpha"),
        ("0.9.9", "1.0.0-alpha"),
        ("1.0.0-A", "1.0.0-a"),
        ("1.0.0-aa", "1.0.0-ab"),
        ("1.0.0-a", "1.0.0-a.a"),
        ("1.0.0-11.12", "1.0.0-11.13"),
    ];

    #[test]
    fn matches_semver_precedence_table() {
        for (lo, hi) in PRECEDENCE_TABLE {
            assert!(v(lo) < v(hi), "expected {lo} < {hi}");
            assert!(v(hi) > v(lo), "expected {hi} > {lo}");
        }
    }

    #[test]
    fn maven_style_qualifiers_order_deterministically() {
        // Dot-joined Maven qualifiers take the same token rules.
        assert!(v("2.3.4.RELEASE") < v("2.3.4"));
        assert_eq!(v("1.0"), v("1.0.0"));
        assert_eq!(v("1"), v("1.0.0"));
    }

    #[test]
    fn classify_step_examples() {
        assert_eq!(classify_step(&v("1.0.1"), &v("2.0.0")).unwrap(), LagLevel::Major);
        assert_eq!(classify_step(&v("1.0.0"), &v("1.1.0")).unwrap(), LagLevel::Minor);
        assert_eq!(classify_step(&v("1.0.0"), &v("1.0.0")).unwrap(), LagLevel::None);
        assert_eq!(classify_step(&v("1.0.0"), &v("1.0.1")).unwrap(), LagLevel::Patch);
        assert_eq!(
            classify_step(&v("1.0.0-alpha"), &v("1.0.0")).unwrap(),
            LagLevel::PreRelease
        );
        assert!(classify_step(&v("2.0.0"), &v("1.0.0")).is_err());
    }

    #[test]
    fn level_order_is_major_down_to_none() {
        assert!(LagLevel::Major > LagLevel::Minor);
        assert!(LagLevel::Minor > LagLevel::Patch);
        assert!(LagLevel::Patch > LagLevel::PreRelease);
        assert!(LagLevel::PreRelease > LagLevel::None);
    }

    #[test]
    fn spec_parse_forms() {
        assert_eq!(VersionSpec::parse("1.2.3").unwrap(), VersionSpec::Exact(v("1.2.3")));
        assert_eq!(VersionSpec::parse("[1.2.3]").unwrap(), VersionSpec::Exact(v("1.2.3")));
        let spec = VersionSpec::parse("[1.0.0,2.0.0)").unwrap();
        assert!(spec.matches(&v("1.0.0")));
        assert!(spec.matches(&v("1.9.9")));
        assert!(!spec.matches(&v("2.0.0")));
        let spec = VersionSpec::parse("(,2.0.0]").unwrap();
        assert!(spec.matches(&v("0.1")));
        assert!(spec.matches(&v("2.0.0")));
        assert!(!spec.matches(&v("2.0.1")));
        let spec = VersionSpec::parse("[3.0.0,)").unwrap();
        assert!(spec.matches(&v("3.0.0")));
        assert!(!spec.matches(&v("2.9.9")));
        assert!(VersionSpec::parse("[2.0.0,1.0.0]").is_err());
        assert!(VersionSpec::parse("[1.0.0").is_err());
        assert!(VersionSpec::parse("").is_err());
    }

    #[test]
    fn spec_display_round_trips() {
        for s in ["1.2.3", "[1.0.0,2.0.0)", "(,2.0.0]", "[3.0.0,)", "(1.0,2.0)"] {
            let spec = VersionSpec::parse(s).unwrap();
            assert_eq!(VersionSpec::parse(&spec.to_string()).unwrap(), spec);
        }
    }

    #[test]
    fn resolve_spec_examples() {
        let available = vec![v("1.0.0"), v("1.1.0"), v("2.0.0")];
        let got = resolve_spec(&VersionSpec::parse("1.1.0").unwrap(), &available).unwrap();
        assert_eq!(got, &v("1.1.0"));
        let got = resolve_spec(&VersionSpec::parse("[1.0.0,2.0.0)").unwrap(), &available).unwrap();
        assert_eq!(got, &v("1.1.0"));
        let only_old = [v("1.0.0")];
        let err = resolve_spec(&VersionSpec::parse("[3.0.0,)").unwrap(), &only_old);
        assert!(matches!(err, Err(SpecError::NoMatch { .. })));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn version_strategy() -> impl Strategy<Value = Version> {
            proptest::string::string_regex("[0-9]{1,3}(\\.[0-9]{1,3}){0,2}([.-][0-9A-Za-z]{1,4}(\\.[0-9A-Za-z]{1,3}){0,2})?")
                .unwrap()
                .prop_map(|s| Version::parse(&s).unwrap())
        }

        proptest! {
            #[test]
            fn total_order_antisymmetric(a in version_strategy(), b in version_strategy()) {
                match a.cmp(&b) {
                    Ordering::Less => prop_assert_eq!(b.cmp(&a), Ordering::Greater),
                    Ordering::Greater => prop_assert_eq!(b.cmp(&a), Ordering::Less),
                    Ordering::Equal => prop_assert_eq!(b.cmp(&a), Ordering::Equal),
                }
            }

            #[test]
            fn total_order_transitive(
                a in version_strategy(),
                b in version_strategy(),
                c in version_strategy(),
            ) {
                let mut sorted = vec![a, b, c];
                sorted.sort();
                prop_assert!(sorted[0] <= sorted[1] && sorted[1] <= sorted[2]);
                prop_assert!(sorted[0] <= sorted[2]);
            }

            #[test]
            fn classify_identity_is_none(a in version_strategy()) {
                prop_assert_eq!(classify_step(&a, &a).unwrap(), LagLevel::None);
            }

            #[test]
            fn chain_step_dominates_partial_steps(
                a in version_strategy(),
                b in version_strategy(),
                c in version_strategy(),
            ) {
                let mut sorted = vec![a, b, c];
                sorted.sort();
                let (a, b, c) = (&sorted[0], &sorted[1], &sorted[2]);
                let whole = classify_step(a, c).unwrap();
                let first = classify_step(a, b).unwrap();
                let second = classify_step(b, c).unwrap();
                prop_assert!(whole >= first.max(second));
            }

            #[test]
            fn resolved_version_is_max_satisfying(
                mut versions in proptest::collection::vec(version_strategy(), 1..8),
                lo in version_strategy(),
                hi in version_strategy(),
            ) {
                versions.sort();
                versions.dedup();
                let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
                let spec = VersionSpec::Range {
                    lower: Some((lo, true)),
                    upper: Some((hi, false)),
                };
                match resolve_spec(&spec, &versions) {
                    Ok(found) => {
                        prop_assert!(spec.matches(found));
                        for v in &versions {
                            prop_assert!(!(spec.matches(v) && v > found));
                        }
                    }
                    Err(_) => {
                        for v in &versions {
                            prop_assert!(!spec.matches(v));
                        }
                    }
                }
            }
        }
    }
}

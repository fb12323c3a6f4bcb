use std::collections::{BTreeMap, BTreeSet};

use super::RawPage;

pub const MAX_REDIRECT_DEPTH: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RedirectIssueKind {
    Cycle,
    TooDeep,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedirectIssue {
    pub title: String,
    pub kind: RedirectIssueKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Resolution {
    pub resolved: BTreeMap<String, String>,
    pub issues: Vec<RedirectIssue>,
}

/// Redirect edges (source title → target title) declared by redirect pages.
pub fn redirect_map(pages: &[RawPage]) -> BTreeMap<String, String> {
    pages
        .iter()
        .filter_map(|p| Some((p.canonical_title.clone(), p.redirect_target.clone()?)))
        .collect()
}

/// Maps each title to the end of its redirect chain.
///
/// Titles caught in a cycle or in a chain longer than [`MAX_REDIRECT_DEPTH`]
/// map to themselves and are listed in [`Resolution::issues`].
pub fn resolve_redirects<'a>(
    titles: impl IntoIterator<Item = &'a str>,
    redirects: &BTreeMap<String, String>,
) -> Resolution {
    let mut resolution = Resolution::default();
    for title in titles {
        if resolution.resolved.contains_key(title) {
            continue;
        }
        let mut seen = BTreeSet::from([title]);
        let mut current = title;
        let mut outcome = None;
        for _ in 0..MAX_REDIRECT_DEPTH {
            match redirects.get(current) {
                None => {
                    outcome = Some(Ok(current));
                    break;
                }
                Some(next) if !seen.insert(next.as_str()) => {
                    outcome = Some(Err(RedirectIssueKind::Cycle));
                    break;
                }
                Some(next) => current = next,
            }
        }
        let outcome = outcome.unwrap_or_else(|| {
            if redirects.contains_key(current) {
                Err(RedirectIssueKind::TooDeep)
            } else {
                Ok(current)
            }
        });
        let target = match outcome {
            Ok(target) => target.to_owned(),
            Err(kind) => {
                resolution.issues.push(RedirectIssue {
                    title: title.to_owned(),
                    kind,
                });
                title.to_owned()
            }
        };
        resolution.resolved.insert(title.to_owned(), target);
    }
    resolution
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn single_hop() {
        let r = resolve_redirects(["Minga"], &map(&[("Minga", "München")]));
        assert_eq!(r.resolved["Minga"], "München");
        assert!(r.issues.is_empty());
    }

    #[test]
    fn cycle_maps_to_self() {
        let r = resolve_redirects(["A"], &map(&[("A", "B"), ("B", "A")]));
        assert_eq!(r.resolved["A"], "A");
        assert_eq!(r.issues, vec![RedirectIssue { title: "A".into(), kind: RedirectIssueKind::Cycle }]);
    }

    #[test]
    fn chain_is_followed() {
        let r = resolve_redirects(["A", "Z"], &map(&[("A", "B"), ("B", "C")]));
        assert_eq!(r.resolved["A"], "C");
        assert_eq!(r.resolved["Z"], "Z");
    }

    #[test]
    fn depth_limit() {
        let edges: Vec<(String, String)> = (0..11).map(|i| (format!("t{i}"), format!("t{}", i + 1))).collect();
        let redirects: BTreeMap<_, _> = edges.into_iter().collect();
        let r = resolve_redirects(["t0", "t1"], &redirects);
        assert_eq!(r.resolved["t0"], "t0");
        assert_eq!(r.issues[0].kind, RedirectIssueKind::TooDeep);
        assert_eq!(r.resolved["t1"], "t11");
    }

    proptest! {
        #[test]
        fn resolved_targets_are_final(edges in prop::collection::vec((0u8..12, 0u8..12), 0..20)) {
            let redirects: BTreeMap<String, String> = edges
                .iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect();
            let titles: Vec<String> = (0u8..12).map(|i| i.to_string()).collect();
            let r = resolve_redirects(titles.iter().map(String::as_str), &redirects);
            let flagged: BTreeSet<&str> = r.issues.iter().map(|i| i.title.as_str()).collect();
            for (title, target) in &r.resolved {
                if !flagged.contains(title.as_str()) {
                    prop_assert!(!redirects.contains_key(target));
                }
            }
        }
    }
}

//! Structural validation of a bundle against the type invariants.
//!
//! Violations are data, not failures: `validate` never errors, it reports.
//! It is side-effect free and re-checks everything, including constraints
//! the loader already enforces, so programmatically built bundles get the
//! same scrutiny as loaded ones.

use std::collections::{HashMap, HashSet};

use super::{ParentKind, PersonId, RegistryBundle};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub severity: Severity,
    pub rule: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn error(&mut self, rule: &'static str, detail: String) {
        self.violations.push(Violation {
            severity: Severity::Error,
            rule,
            detail,
        });
    }

    /// Count of violations for one rule; test convenience.
    pub fn count(&self, rule: &str) -> usize {
        self.violations.iter().filter(|v| v.rule == rule).count()
    }
}

/// Check every type invariant of the bundle and report violations.
pub fn validate(bundle: &RegistryBundle) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut person_ids: HashSet<PersonId> = HashSet::with_capacity(bundle.persons.len());
    for p in &bundle.persons {
        if !person_ids.insert(p.person_id) {
            report.error("duplicate person", format!("person_id {} occurs twice", p.person_id));
        }
        if let Some(d) = p.death_year {
            if d < p.birth_year {
                report.error(
                    "death before birth",
                    format!("person {}: death_year {d} < birth_year {}", p.person_id, p.birth_year),
                );
            }
        }
        if !p.migrations.windows(2).all(|w| w[0].0 <= w[1].0) {
            report.error(
                "migrations unsorted",
                format!("person {}: migration events out of year order", p.person_id),
            );
        }
    }

    let mut addr_ids = HashSet::with_capacity(bundle.addresses.len());
    for a in &bundle.addresses {
        if !addr_ids.insert(a.address_id) {
            report.error("duplicate address", format!("address_id {} occurs twice", a.address_id));
        }
        if !a.x.is_finite() || !a.y.is_finite() {
            report.error(
                "non-finite coordinates",
                format!("address {}: ({}, {})", a.address_id, a.x, a.y),
            );
        }
    }

    // Parent multiplicity and self-links.
    let mut parent_count: HashMap<(PersonId, ParentKind), u32> = HashMap::new();
    let mut seen_links = HashSet::new();
    for l in &bundle.parent_links {
        if l.child_id == l.parent_id {
            report.error("self parent", format!("person {} is their own parent", l.child_id));
        }
        if !seen_links.insert((l.child_id, l.parent_id, l.kind)) {
            report.error(
                "duplicate parent link",
                format!("link {} -> {} ({}) occurs twice", l.child_id, l.parent_id, l.kind.as_str()),
            );
            continue;
        }
        *parent_count.entry((l.child_id, l.kind)).or_insert(0) += 1;
    }
    let mut over: Vec<_> = parent_count
        .iter()
        .filter(|(_, &n)| n > 2)
        .map(|(&(child, kind), &n)| (child, kind, n))
        .collect();
    over.sort_by_key(|&(child, kind, _)| (child, kind));
    for (child, kind, n) in over {
        report.error(
            "too many parents",
            format!("person {child} has {n} parents of kind {}", kind.as_str()),
        );
    }

    for cycle in parent_cycles(bundle) {
        let ids: Vec<String> = cycle.iter().map(|p| p.to_string()).collect();
        report.error("parent cycle", format!("cycle through persons [{}]", ids.join(", ")));
    }

    let mut seen_res = HashSet::new();
    for r in &bundle.residences {
        if !seen_res.insert((r.person_id, r.year)) {
            report.error(
                "duplicate residence",
                format!("person {} has two residence rows in {}", r.person_id, r.year),
            );
        }
        if !person_ids.contains(&r.person_id) {
            report.error("dangling person", format!("residence row references person {}", r.person_id));
        }
        if !addr_ids.contains(&r.address_id) {
            report.error("dangling address", format!("residence row references address {}", r.address_id));
        }
    }

    let mut seen_income = HashSet::new();
    for i in &bundle.income {
        if !seen_income.insert((i.person_id, i.year)) {
            report.error(
                "duplicate income",
                format!("person {} has two income rows in {}", i.person_id, i.year),
            );
        }
        if !i.income.is_finite() {
            report.error("non-finite income", format!("person {} in {}", i.person_id, i.year));
        }
    }

    for e in &bundle.employment {
        if !person_ids.contains(&e.person_id) {
            report.error("dangling person", format!("employment row references person {}", e.person_id));
        }
    }
    for e in &bundle.enrollment {
        if !person_ids.contains(&e.person_id) {
            report.error("dangling person", format!("enrollment row references person {}", e.person_id));
        }
    }

    report
}

/// Find cycles in the child -> parent relation. Returns one representative
/// node list per cycle found.
fn parent_cycles(bundle: &RegistryBundle) -> Vec<Vec<PersonId>> {
    let mut parents: HashMap<PersonId, Vec<PersonId>> = HashMap::new();
    for l in &bundle.parent_links {
        parents.entry(l.child_id).or_default().push(l.parent_id);
    }
    for list in parents.values_mut() {
        list.sort_unstable();
        list.dedup();
    }

    // Iterative three-color DFS.
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let mut color: HashMap<PersonId, Color> = HashMap::new();
    let mut cycles = Vec::new();
    let mut roots: Vec<PersonId> = parents.keys().copied().collect();
    roots.sort_unstable();

    for root in roots {
        if *color.get(&root).unwrap_or(&Color::White) != Color::White {
            continue;
        }
        // Stack of (node, next child index), plus the gray path for cycle extraction.
        let mut stack: Vec<(PersonId, usize)> = vec![(root, 0)];
        color.insert(root, Color::Gray);
        let mut path = vec![root];
        while let Some(&mut (node, ref mut idx)) = stack.last_mut() {
            let next = parents.get(&node).and_then(|list| list.get(*idx)).copied();
            *idx += 1;
            match next {
                Some(parent) => match *color.get(&parent).unwrap_or(&Color::White) {
                    Color::White => {
                        color.insert(parent, Color::Gray);
                        stack.push((parent, 0));
                        path.push(parent);
                    }
                    Color::Gray => {
                        let start = path.iter().position(|&p| p == parent).unwrap_or(0);
                        cycles.push(path[start..].to_vec());
                    }
                    Color::Black => {}
                },
                None => {
                    color.insert(node, Color::Black);
                    stack.pop();
                    path.pop();
                }
            }
        }
    }
    cycles
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    fn person(id: u64) -> PersonRecord {
        PersonRecord {
            person_id: PersonId(id),
            birth_year: 1980,
            sex: Sex::Male,
            death_year: None,
            migrations: Vec::new(),
        }
    }

    fn link(child: u64, parent: u64) -> ParentLink {
        ParentLink {
            child_id: PersonId(child),
            parent_id: PersonId(parent),
            kind: ParentKind::Biological,
        }
    }

    #[test]
    fn parent_cycle_is_reported_once() {
        let bundle = RegistryBundle {
            persons: vec![person(1), person(2)],
            parent_links: vec![link(1, 2), link(2, 1)],
            ..Default::default()
        };
        let report = validate(&bundle);
        assert_eq!(report.count("parent cycle"), 1);
    }

    #[test]
    fn three_biological_parents_is_a_violation() {
        let bundle = RegistryBundle {
            persons: vec![person(1), person(2), person(3), person(4)],
            parent_links: vec![link(1, 2), link(1, 3), link(1, 4)],
            ..Default::default()
        };
        let report = validate(&bundle);
        assert_eq!(report.count("too many parents"), 1);
        assert_eq!(report.count("parent cycle"), 0);
    }

    #[test]
    fn clean_bundle_yields_empty_report() {
        let bundle = RegistryBundle {
            persons: vec![person(1), person(2), person(3)],
            parent_links: vec![link(3, 1), link(3, 2)],
            ..Default::default()
        };
        assert!(validate(&bundle).is_empty());
    }

    #[test]
    fn validate_is_idempotent() {
        let bundle = RegistryBundle {
            persons: vec![person(1), person(1)],
            ..Default::default()
        };
        let a = validate(&bundle);
        let b = validate(&bundle);
        assert_eq!(a.violations, b.violations);
        assert_eq!(a.count("duplicate person"), 1);
    }

    #[test]
    fn death_before_birth_flagged() {
        let mut p = person(1);
        p.death_year = Some(1970);
        let bundle = RegistryBundle {
            persons: vec![p],
            ..Default::default()
        };
        assert_eq!(validate(&bundle).count("death before birth"), 1);
    }
}

//! Typed representation of the seven registry tables, delimited-file
//! loading, and structural validation.
//!
//! A [`RegistryBundle`] is the sole input universe for everything else in
//! the crate. Bundles are immutable after load and safe to share across
//! threads.

mod load;
mod validate;
mod write;

pub use load::{load_registry, LoadOptions};
pub use validate::{validate, Severity, ValidationReport, Violation};
pub use write::write_registry;

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Opaque person identifier (synthetic or pseudonymized).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PersonId(pub u64);

/// Opaque address identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AddressId(pub u64);

impl fmt::Display for PersonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for AddressId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sex {
    Female,
    Male,
}

impl Sex {
    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Female => "female",
            Sex::Male => "male",
        }
    }
}

/// Direction of a cross-border move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Migration {
    In,
    Out,
}

impl Migration {
    pub fn as_str(self) -> &'static str {
        match self {
            Migration::In => "in",
            Migration::Out => "out",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersonRecord {
    pub person_id: PersonId,
    pub birth_year: i32,
    pub sex: Sex,
    pub death_year: Option<i32>,
    /// Cross-border moves as `(year, direction)`, sorted by year.
    pub migrations: Vec<(i32, Migration)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParentKind {
    Biological,
    Adoptive,
}

impl ParentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ParentKind::Biological => "biological",
            ParentKind::Adoptive => "adoptive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParentLink {
    pub child_id: PersonId,
    pub parent_id: PersonId,
    pub kind: ParentKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MaritalStatus {
    NeverMarried,
    Married,
    Partnership,
    Divorced,
    Widowed,
}

impl MaritalStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MaritalStatus::NeverMarried => "never_married",
            MaritalStatus::Married => "married",
            MaritalStatus::Partnership => "partnership",
            MaritalStatus::Divorced => "divorced",
            MaritalStatus::Widowed => "widowed",
        }
    }

    /// Whether this status implies a present or past marriage/partnership.
    pub fn implies_ever_partnered(self) -> bool {
        !matches!(self, MaritalStatus::NeverMarried)
    }
}

/// One residence row per `(person, year)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidenceSpell {
    pub person_id: PersonId,
    pub year: i32,
    pub address_id: AddressId,
    pub marital_status: MaritalStatus,
    /// Registered spouse/partner, when the status points at one.
    pub partner_id: Option<PersonId>,
}

/// Planar address coordinates in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AddressPoint {
    pub address_id: AddressId,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EmploymentSpell {
    pub person_id: PersonId,
    pub year: i32,
    pub workplace_id: u64,
    /// Remote/multi-site pseudo workplaces; such spells produce no
    /// colleague ties.
    pub fictional: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EnrollmentSpell {
    pub person_id: PersonId,
    pub year: i32,
    pub institution_id: u64,
    pub program_id: u64,
    pub grade: i32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncomeRecord {
    pub person_id: PersonId,
    pub year: i32,
    pub income: f64,
}

/// Inclusive year range covered by a bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YearRange {
    pub start: i32,
    pub end: i32,
}

impl YearRange {
    pub fn contains(&self, year: i32) -> bool {
        self.start <= year && year <= self.end
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("missing input file: {0}")]
    MissingFile(String),
    #[error("{file}:{line}: column `{column}`: {detail}")]
    Malformed {
        file: String,
        line: u64,
        column: String,
        detail: String,
    },
    #[error("{file}:{line}: unknown column `{column}` (pass lax mode to ignore)")]
    UnknownColumn {
        file: String,
        line: u64,
        column: String,
    },
    #[error("{file}:{line}: dangling reference: no {kind} with id {id}")]
    DanglingRef {
        file: String,
        line: u64,
        kind: &'static str,
        id: u64,
    },
    #[error("year {year} outside bundle span {start}..{end}")]
    YearOutOfSpan { year: i32, start: i32, end: i32 },
    #[error("bundle has no year span (all tables empty)")]
    EmptySpan,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// The seven registry tables plus the year span they cover.
///
/// The span is derived from the yearly tables at load time; a bundle whose
/// yearly tables are all empty has no span.
#[derive(Debug, Clone, Default)]
pub struct RegistryBundle {
    pub persons: Vec<PersonRecord>,
    pub parent_links: Vec<ParentLink>,
    pub residences: Vec<ResidenceSpell>,
    pub addresses: Vec<AddressPoint>,
    pub employment: Vec<EmploymentSpell>,
    pub enrollment: Vec<EnrollmentSpell>,
    pub income: Vec<IncomeRecord>,
    pub span: Option<YearRange>,
}

impl RegistryBundle {
    /// Recompute the span from the yearly tables (residences, employment,
    /// enrollment, income).
    pub fn derive_span(&mut self) {
        let years = self
            .residences
            .iter()
            .map(|r| r.year)
            .chain(self.employment.iter().map(|e| e.year))
            .chain(self.enrollment.iter().map(|e| e.year))
            .chain(self.income.iter().map(|i| i.year));
        let mut span: Option<YearRange> = None;
        for y in years {
            span = Some(match span {
                None => YearRange { start: y, end: y },
                Some(s) => YearRange {
                    start: s.start.min(y),
                    end: s.end.max(y),
                },
            });
        }
        self.span = span;
    }

    pub fn person(&self, id: PersonId) -> Option<&PersonRecord> {
        // Persons are sorted by id after load; fall back to scan otherwise.
        match self.persons.binary_search_by_key(&id, |p| p.person_id) {
            Ok(i) => Some(&self.persons[i]),
            Err(_) => self.persons.iter().find(|p| p.person_id == id),
        }
    }

    pub fn person_ids(&self) -> impl Iterator<Item = PersonId> + '_ {
        self.persons.iter().map(|p| p.person_id)
    }

    /// Index of address coordinates by id.
    pub fn address_index(&self) -> HashMap<AddressId, &AddressPoint> {
        self.addresses.iter().map(|a| (a.address_id, a)).collect()
    }

    /// Whether `person` was present in the population for at least one day
    /// of `year`, judged from birth, death, and migration fields.
    ///
    /// A person is resident from birth unless their first migration event is
    /// an inward move (born abroad). Both the emigration and the immigration
    /// year themselves count as present.
    pub fn present_in_year(&self, person: &PersonRecord, year: i32) -> bool {
        if person.birth_year > year {
            return false;
        }
        if let Some(d) = person.death_year {
            if d < year {
                return false;
            }
        }
        let mut resident = !matches!(person.migrations.first(), Some((_, Migration::In)));
        let mut present = resident;
        for &(y, dir) in &person.migrations {
            if y > year {
                break;
            }
            match dir {
                Migration::Out => {
                    // Present for at least one day of the departure year.
                    present = y == year;
                    resident = false;
                }
                Migration::In => {
                    present = true;
                    resident = true;
                }
            }
        }
        let _ = resident;
        present
    }

    /// Person ids alive and resident for at least one day of `year`.
    pub fn population_mask(&self, year: i32) -> Result<HashSet<PersonId>, RegistryError> {
        let span = self.span.ok_or(RegistryError::EmptySpan)?;
        if !span.contains(year) {
            return Err(RegistryError::YearOutOfSpan {
                year,
                start: span.start,
                end: span.end,
            });
        }
        Ok(self
            .persons
            .iter()
            .filter(|p| self.present_in_year(p, year))
            .map(|p| p.person_id)
            .collect())
    }

    /// Residence rows for one year, sorted by person id.
    pub fn residences_in_year(&self, year: i32) -> Vec<&ResidenceSpell> {
        let mut rows: Vec<&ResidenceSpell> =
            self.residences.iter().filter(|r| r.year == year).collect();
        rows.sort_by_key(|r| r.person_id);
        rows
    }

    /// Canonical in-place sort of every table; makes serialization stable.
    pub fn sort_canonical(&mut self) {
        self.persons.sort_by_key(|p| p.person_id);
        self.parent_links
            .sort_by_key(|l| (l.child_id, l.parent_id, l.kind));
        self.residences.sort_by_key(|r| (r.person_id, r.year));
        self.addresses.sort_by_key(|a| a.address_id);
        self.employment
            .sort_by_key(|e| (e.person_id, e.year, e.workplace_id));
        self.enrollment.sort_by_key(|e| {
            (
                e.person_id,
                e.year,
                e.institution_id,
                e.program_id,
                e.grade,
            )
        });
        self.income
            .sort_by(|a, b| (a.person_id, a.year).cmp(&(b.person_id, b.year)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn person(id: u64, birth: i32) -> PersonRecord {
        PersonRecord {
            person_id: PersonId(id),
            birth_year: birth,
            sex: Sex::Female,
            death_year: None,
            migrations: Vec::new(),
        }
    }

    fn bundle_with(persons: Vec<PersonRecord>) -> RegistryBundle {
        let residences = persons
            .iter()
            .map(|p| ResidenceSpell {
                person_id: p.person_id,
                year: 2010,
                address_id: AddressId(1),
                marital_status: MaritalStatus::NeverMarried,
                partner_id: None,
            })
            .collect();
        let mut b = RegistryBundle {
            persons,
            residences,
            addresses: vec![AddressPoint {
                address_id: AddressId(1),
                x: 0.0,
                y: 0.0,
            }],
            ..Default::default()
        };
        b.derive_span();
        b
    }

    #[test]
    fn born_in_year_is_included() {
        let b = bundle_with(vec![person(1, 2010)]);
        assert!(b.population_mask(2010).unwrap().contains(&PersonId(1)));
    }

    #[test]
    fn dead_the_year_before_is_excluded() {
        let mut p = person(1, 1950);
        p.death_year = Some(2009);
        let b = bundle_with(vec![p, person(2, 1980)]);
        let mask = b.population_mask(2010).unwrap();
        assert!(!mask.contains(&PersonId(1)));
        assert!(mask.contains(&PersonId(2)));
    }

    #[test]
    fn death_in_year_still_counts() {
        let mut p = person(1, 1950);
        p.death_year = Some(2010);
        let b = bundle_with(vec![p]);
        assert!(b.population_mask(2010).unwrap().contains(&PersonId(1)));
    }

    #[test]
    fn emigration_year_counts_as_present() {
        let mut p = person(1, 1980);
        p.migrations = vec![(2010, Migration::Out)];
        let b = bundle_with(vec![p.clone()]);
        assert!(b.present_in_year(&p, 2010));
        assert!(!b.present_in_year(&p, 2011));
    }

    #[test]
    fn immigrant_absent_before_arrival() {
        let mut p = person(1, 1980);
        p.migrations = vec![(2010, Migration::In)];
        let b = bundle_with(vec![p.clone()]);
        assert!(!b.present_in_year(&p, 2009));
        assert!(b.present_in_year(&p, 2010));
        assert!(b.present_in_year(&p, 2011));
    }

    #[test]
    fn return_migration_round_trip() {
        let mut p = person(1, 1980);
        p.migrations = vec![(2005, Migration::Out), (2010, Migration::In)];
        let b = bundle_with(vec![p.clone()]);
        assert!(b.present_in_year(&p, 2004));
        assert!(b.present_in_year(&p, 2005));
        assert!(!b.present_in_year(&p, 2007));
        assert!(b.present_in_year(&p, 2010));
    }

    #[test]
    fn year_outside_span_is_an_error() {
        let b = bundle_with(vec![person(1, 1980)]);
        assert!(matches!(
            b.population_mask(1999),
            Err(RegistryError::YearOutOfSpan { .. })
        ));
    }

    #[test]
    fn mask_is_subset_of_person_ids() {
        let b = bundle_with(vec![person(1, 1980), person(2, 2050)]);
        let mask = b.population_mask(2010).unwrap();
        let ids: HashSet<PersonId> = b.person_ids().collect();
        assert!(mask.is_subset(&ids));
        assert!(!mask.contains(&PersonId(2)));
    }
}

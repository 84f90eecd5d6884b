//! Delimited-file loading for the seven registry tables.
//!
//! Files are header-first, comma-delimited, UTF-8. Unknown columns are
//! rejected unless [`LoadOptions::lax`] is set; missing required columns are
//! always an error. Loading is deterministic: identical bytes produce an
//! identical bundle.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use super::*;

pub const PERSONS_FILE: &str = "persons.csv";
pub const PARENT_LINKS_FILE: &str = "parent_links.csv";
pub const RESIDENCES_FILE: &str = "residences.csv";
pub const ADDRESSES_FILE: &str = "addresses.csv";
pub const EMPLOYMENT_FILE: &str = "employment.csv";
pub const ENROLLMENT_FILE: &str = "enrollment.csv";
pub const INCOME_FILE: &str = "income.csv";

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Accept (and ignore) unknown columns.
    pub lax: bool,
}

/// Load a registry bundle from a directory holding the seven tables.
pub fn load_registry(dir: &Path) -> Result<RegistryBundle, RegistryError> {
    load_registry_with(dir, LoadOptions::default())
}

pub fn load_registry_with(dir: &Path, opts: LoadOptions) -> Result<RegistryBundle, RegistryError> {
    let persons = read_table(dir, PERSONS_FILE, &["person_id", "birth_year", "sex", "death_year", "migrations"], opts, parse_person)?;

    let mut person_set: HashSet<PersonId> = HashSet::with_capacity(persons.len());
    for (line, p) in &persons {
        if !person_set.insert(p.person_id) {
            return Err(RegistryError::Malformed {
                file: PERSONS_FILE.into(),
                line: *line,
                column: "person_id".into(),
                detail: format!("duplicate person_id {}", p.person_id),
            });
        }
    }

    let addresses = read_table(dir, ADDRESSES_FILE, &["address_id", "x", "y"], opts, parse_address)?;
    let mut address_set: HashSet<AddressId> = HashSet::with_capacity(addresses.len());
    for (line, a) in &addresses {
        if !address_set.insert(a.address_id) {
            return Err(RegistryError::Malformed {
                file: ADDRESSES_FILE.into(),
                line: *line,
                column: "address_id".into(),
                detail: format!("duplicate address_id {}", a.address_id),
            });
        }
    }

    let check_person = |file: &'static str, line: u64, id: PersonId| -> Result<(), RegistryError> {
        if person_set.contains(&id) {
            Ok(())
        } else {
            Err(RegistryError::DanglingRef {
                file: file.into(),
                line,
                kind: "person",
                id: id.0,
            })
        }
    };

    let parent_links = read_table(dir, PARENT_LINKS_FILE, &["child_id", "parent_id", "kind"], opts, parse_parent_link)?;
    for (line, l) in &parent_links {
        check_person(PARENT_LINKS_FILE, *line, l.child_id)?;
        check_person(PARENT_LINKS_FILE, *line, l.parent_id)?;
    }

    let residences = read_table(dir, RESIDENCES_FILE, &["person_id", "year", "address_id", "marital_status", "partner_id"], opts, parse_residence)?;
    let mut seen_residence: HashSet<(PersonId, i32)> = HashSet::with_capacity(residences.len());
    for (line, r) in &residences {
        check_person(RESIDENCES_FILE, *line, r.person_id)?;
        if !address_set.contains(&r.address_id) {
            return Err(RegistryError::DanglingRef {
                file: RESIDENCES_FILE.into(),
                line: *line,
                kind: "address",
                id: r.address_id.0,
            });
        }
        if let Some(partner) = r.partner_id {
            check_person(RESIDENCES_FILE, *line, partner)?;
        }
        if !seen_residence.insert((r.person_id, r.year)) {
            return Err(RegistryError::Malformed {
                file: RESIDENCES_FILE.into(),
                line: *line,
                column: "year".into(),
                detail: format!("second residence row for person {} in year {}", r.person_id, r.year),
            });
        }
    }

    let employment = read_table(dir, EMPLOYMENT_FILE, &["person_id", "year", "workplace_id", "fictional"], opts, parse_employment)?;
    for (line, e) in &employment {
        check_person(EMPLOYMENT_FILE, *line, e.person_id)?;
    }

    let enrollment = read_table(dir, ENROLLMENT_FILE, &["person_id", "year", "institution_id", "program_id", "grade"], opts, parse_enrollment)?;
    for (line, e) in &enrollment {
        check_person(ENROLLMENT_FILE, *line, e.person_id)?;
    }

    let income = read_table(dir, INCOME_FILE, &["person_id", "year", "income"], opts, parse_income)?;
    let mut seen_income: HashSet<(PersonId, i32)> = HashSet::with_capacity(income.len());
    for (line, i) in &income {
        check_person(INCOME_FILE, *line, i.person_id)?;
        if !seen_income.insert((i.person_id, i.year)) {
            return Err(RegistryError::Malformed {
                file: INCOME_FILE.into(),
                line: *line,
                column: "year".into(),
                detail: format!("second income row for person {} in year {}", i.person_id, i.year),
            });
        }
    }

    let mut bundle = RegistryBundle {
        persons: persons.into_iter().map(|(_, p)| p).collect(),
        parent_links: parent_links.into_iter().map(|(_, l)| l).collect(),
        residences: residences.into_iter().map(|(_, r)| r).collect(),
        addresses: addresses.into_iter().map(|(_, a)| a).collect(),
        employment: employment.into_iter().map(|(_, e)| e).collect(),
        enrollment: enrollment.into_iter().map(|(_, e)| e).collect(),
        income: income.into_iter().map(|(_, i)| i).collect(),
        span: None,
    };
    bundle.sort_canonical();
    bundle.derive_span();
    Ok(bundle)
}

/// A row as (header-resolved) named fields, with its 1-based line number.
struct Row<'a> {
    file: &'static str,
    line: u64,
    fields: &'a csv::StringRecord,
    index: &'a HashMap<String, usize>,
}

impl<'a> Row<'a> {
    fn raw(&self, column: &str) -> Result<&'a str, RegistryError> {
        let idx = *self.index.get(column).expect("required column checked");
        self.fields.get(idx).ok_or_else(|| RegistryError::Malformed {
            file: self.file.into(),
            line: self.line,
            column: column.into(),
            detail: "missing field".into(),
        })
    }

    fn parse<T: std::str::FromStr>(&self, column: &str) -> Result<T, RegistryError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(column)?;
        raw.trim().parse().map_err(|e| RegistryError::Malformed {
            file: self.file.into(),
            line: self.line,
            column: column.into(),
            detail: format!("cannot parse `{raw}`: {e}"),
        })
    }

    fn parse_opt<T: std::str::FromStr>(&self, column: &str) -> Result<Option<T>, RegistryError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(column)?;
        if raw.trim().is_empty() {
            Ok(None)
        } else {
            self.parse(column).map(Some)
        }
    }

    fn malformed(&self, column: &str, detail: String) -> RegistryError {
        RegistryError::Malformed {
            file: self.file.into(),
            line: self.line,
            column: column.into(),
            detail,
        }
    }
}

fn read_table<T>(
    dir: &Path,
    file: &'static str,
    required: &[&str],
    opts: LoadOptions,
    parse: impl Fn(&Row) -> Result<T, RegistryError>,
) -> Result<Vec<(u64, T)>, RegistryError> {
    let path = dir.join(file);
    if !path.exists() {
        return Err(RegistryError::MissingFile(path.display().to_string()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(&path)
        .map_err(|e| RegistryError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| RegistryError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e),
        })?
        .clone();

    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, name) in headers.iter().enumerate() {
        index.insert(name.trim().to_string(), i);
    }
    for col in required {
        if !index.contains_key(*col) {
            return Err(RegistryError::Malformed {
                file: file.into(),
                line: 1,
                column: (*col).into(),
                detail: "required column missing from header".into(),
            });
        }
    }
    if !opts.lax {
        for name in headers.iter() {
            if !required.contains(&name.trim()) {
                return Err(RegistryError::UnknownColumn {
                    file: file.into(),
                    line: 1,
                    column: name.trim().into(),
                });
            }
        }
    }

    let mut rows = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            RegistryError::Malformed {
                file: file.into(),
                line,
                column: "<row>".into(),
                detail: e.to_string(),
            }
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row = Row {
            file,
            line,
            fields: &record,
            index: &index,
        };
        rows.push((line, parse(&row)?));
    }
    Ok(rows)
}

fn parse_sex(row: &Row, column: &str) -> Result<Sex, RegistryError> {
    match row.raw(column)?.trim() {
        "female" => Ok(Sex::Female),
        "male" => Ok(Sex::Male),
        other => Err(row.malformed(column, format!("expected female|male, got `{other}`"))),
    }
}

fn parse_migrations(row: &Row, column: &str) -> Result<Vec<(i32, Migration)>, RegistryError> {
    let raw = row.raw(column)?.trim();
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    let mut events = Vec::new();
    for part in raw.split(';') {
        let (dir, year) = part
            .split_once(':')
            .ok_or_else(|| row.malformed(column, format!("expected dir:year, got `{part}`")))?;
        let dir = match dir.trim() {
            "in" => Migration::In,
            "out" => Migration::Out,
            other => {
                return Err(row.malformed(column, format!("expected in|out, got `{other}`")));
            }
        };
        let year: i32 = year
            .trim()
            .parse()
            .map_err(|e| row.malformed(column, format!("bad year in `{part}`: {e}")))?;
        events.push((year, dir));
    }
    if !events.windows(2).all(|w| w[0].0 <= w[1].0) {
        return Err(row.malformed(column, "migration events not sorted by year".into()));
    }
    Ok(events)
}

fn parse_person(row: &Row) -> Result<PersonRecord, RegistryError> {
    Ok(PersonRecord {
        person_id: PersonId(row.parse("person_id")?),
        birth_year: row.parse("birth_year")?,
        sex: parse_sex(row, "sex")?,
        death_year: row.parse_opt("death_year")?,
        migrations: parse_migrations(row, "migrations")?,
    })
}

fn parse_parent_link(row: &Row) -> Result<ParentLink, RegistryError> {
    let kind = match row.raw("kind")?.trim() {
        "biological" => ParentKind::Biological,
        "adoptive" => ParentKind::Adoptive,
        other => {
            return Err(row.malformed("kind", format!("expected biological|adoptive, got `{other}`")));
        }
    };
    Ok(ParentLink {
        child_id: PersonId(row.parse("child_id")?),
        parent_id: PersonId(row.parse("parent_id")?),
        kind,
    })
}

fn parse_residence(row: &Row) -> Result<ResidenceSpell, RegistryError> {
    let marital_status = match row.raw("marital_status")?.trim() {
        "never_married" => MaritalStatus::NeverMarried,
        "married" => MaritalStatus::Married,
        "partnership" => MaritalStatus::Partnership,
        "divorced" => MaritalStatus::Divorced,
        "widowed" => MaritalStatus::Widowed,
        other => {
            return Err(row.malformed("marital_status", format!("unknown status `{other}`")));
        }
    };
    Ok(ResidenceSpell {
        person_id: PersonId(row.parse("person_id")?),
        year: row.parse("year")?,
        address_id: AddressId(row.parse("address_id")?),
        marital_status,
        partner_id: row.parse_opt::<u64>("partner_id")?.map(PersonId),
    })
}

fn parse_address(row: &Row) -> Result<AddressPoint, RegistryError> {
    let x: f64 = row.parse("x")?;
    let y: f64 = row.parse("y")?;
    if !x.is_finite() || !y.is_finite() {
        return Err(row.malformed("x", "coordinates must be finite".into()));
    }
    Ok(AddressPoint {
        address_id: AddressId(row.parse("address_id")?),
        x,
        y,
    })
}

fn parse_employment(row: &Row) -> Result<EmploymentSpell, RegistryError> {
    let fictional = match row.raw("fictional")?.trim() {
        "0" => false,
        "1" => true,
        other => {
            return Err(row.malformed("fictional", format!("expected 0|1, got `{other}`")));
        }
    };
    Ok(EmploymentSpell {
        person_id: PersonId(row.parse("person_id")?),
        year: row.parse("year")?,
        workplace_id: row.parse("workplace_id")?,
        fictional,
    })
}

fn parse_enrollment(row: &Row) -> Result<EnrollmentSpell, RegistryError> {
    Ok(EnrollmentSpell {
        person_id: PersonId(row.parse("person_id")?),
        year: row.parse("year")?,
        institution_id: row.parse("institution_id")?,
        program_id: row.parse("program_id")?,
        grade: row.parse("grade")?,
    })
}

fn parse_income(row: &Row) -> Result<IncomeRecord, RegistryError> {
    let income: f64 = row.parse("income")?;
    if !income.is_finite() {
        return Err(row.malformed("income", "income must be finite".into()));
    }
    Ok(IncomeRecord {
        person_id: PersonId(row.parse("person_id")?),
        year: row.parse("year")?,
        income,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_files(dir: &Path, overrides: &[(&str, &str)]) {
        let defaults: Vec<(&str, String)> = vec![
            (PERSONS_FILE, "person_id,birth_year,sex,death_year,migrations\n".into()),
            (PARENT_LINKS_FILE, "child_id,parent_id,kind\n".into()),
            (RESIDENCES_FILE, "person_id,year,address_id,marital_status,partner_id\n".into()),
            (ADDRESSES_FILE, "address_id,x,y\n".into()),
            (EMPLOYMENT_FILE, "person_id,year,workplace_id,fictional\n".into()),
            (ENROLLMENT_FILE, "person_id,year,institution_id,program_id,grade\n".into()),
            (INCOME_FILE, "person_id,year,income\n".into()),
        ];
        for (name, content) in defaults {
            let body = overrides
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, c)| c.to_string())
                .unwrap_or(content);
            fs::write(dir.join(name), body).unwrap();
        }
    }

    #[test]
    fn empty_tables_give_empty_bundle() {
        let dir = tempfile::tempdir().unwrap();
        write_files(dir.path(), &[]);
        let bundle = load_registry(dir.path()).unwrap();
        assert!(bundle.persons.is_empty());
        assert!(bundle.span.is_none());
    }

    #[test]
    fn missing_file_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        write_files(dir.path(), &[]);
        fs::remove_file(dir.path().join(INCOME_FILE)).unwrap();
        match load_registry(dir.path()) {
            Err(RegistryError::MissingFile(path)) => assert!(path.contains("income.csv")),
            other => panic!("expected MissingFile, got {other:?}"),
        }
    }

    #[test]
    fn dangling_address_reference_names_the_id() {
        let dir = tempfile::tempdir().unwrap();
        write_files(
            dir.path(),
            &[
                (PERSONS_FILE, "person_id,birth_year,sex,death_year,migrations\n1,1980,female,,\n"),
                (RESIDENCES_FILE, "person_id,year,address_id,marital_status,partner_id\n1,2010,99,never_married,\n"),
            ],
        );
        match load_registry(dir.path()) {
            Err(RegistryError::DanglingRef { kind, id, line, .. }) => {
                assert_eq!(kind, "address");
                assert_eq!(id, 99);
                assert_eq!(line, 2);
            }
            other => panic!("expected DanglingRef, got {other:?}"),
        }
    }

    #[test]
    fn malformed_row_reports_file_line_column() {
        let dir = tempfile::tempdir().unwrap();
        write_files(
            dir.path(),
            &[(PERSONS_FILE, "person_id,birth_year,sex,death_year,migrations\n1,notayear,female,,\n")],
        );
        match load_registry(dir.path()) {
            Err(RegistryError::Malformed { file, line, column, .. }) => {
                assert_eq!(file, "persons.csv");
                assert_eq!(line, 2);
                assert_eq!(column, "birth_year");
            }
            other => panic!("expected Malformed, got {other:?}"),
        }
    }

    #[test]
    fn unknown_column_rejected_unless_lax() {
        let dir = tempfile::tempdir().unwrap();
        write_files(
            dir.path(),
            &[(INCOME_FILE, "person_id,year,income,extra\n")],
        );
        assert!(matches!(
            load_registry(dir.path()),
            Err(RegistryError::UnknownColumn { .. })
        ));
        assert!(load_registry_with(dir.path(), LoadOptions { lax: true }).is_ok());
    }

    #[test]
    fn migrations_parse_and_reject_unsorted() {
        let dir = tempfile::tempdir().unwrap();
        write_files(
            dir.path(),
            &[(PERSONS_FILE, "person_id,birth_year,sex,death_year,migrations\n1,1980,male,,out:2005;in:2010\n")],
        );
        let b = load_registry(dir.path()).unwrap();
        assert_eq!(
            b.persons[0].migrations,
            vec![(2005, Migration::Out), (2010, Migration::In)]
        );

        write_files(
            dir.path(),
            &[(PERSONS_FILE, "person_id,birth_year,sex,death_year,migrations\n1,1980,male,,out:2010;in:2005\n")],
        );
        assert!(matches!(
            load_registry(dir.path()),
            Err(RegistryError::Malformed { .. })
        ));
    }
}

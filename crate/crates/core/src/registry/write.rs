//! Canonical serialization of a bundle back to the seven delimited files.
//!
//! Rows are written in canonical sort order, so `write(load(dir))`
//! reproduces the same bytes for any canonically sorted input and generator
//! output is bit-stable across runs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::load::{
    ADDRESSES_FILE, EMPLOYMENT_FILE, ENROLLMENT_FILE, INCOME_FILE, PARENT_LINKS_FILE,
    PERSONS_FILE, RESIDENCES_FILE,
};
use super::{RegistryBundle, RegistryError};

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> RegistryError + '_ {
    move |source| RegistryError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn writer(dir: &Path, file: &str) -> Result<BufWriter<File>, RegistryError> {
    let path = dir.join(file);
    File::create(&path).map(BufWriter::new).map_err(io_err(&path))
}

/// Write all seven tables of `bundle` into `dir` in canonical order.
pub fn write_registry(bundle: &RegistryBundle, dir: &Path) -> Result<(), RegistryError> {
    let mut sorted = bundle.clone();
    sorted.sort_canonical();
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;

    let err = io_err(dir);

    let mut w = writer(dir, PERSONS_FILE)?;
    writeln!(w, "person_id,birth_year,sex,death_year,migrations").map_err(&err)?;
    for p in &sorted.persons {
        let death = p.death_year.map(|d| d.to_string()).unwrap_or_default();
        let migrations = p
            .migrations
            .iter()
            .map(|(y, d)| format!("{}:{y}", d.as_str()))
            .collect::<Vec<_>>()
            .join(";");
        writeln!(
            w,
            "{},{},{},{},{}",
            p.person_id, p.birth_year, p.sex.as_str(), death, migrations
        )
        .map_err(&err)?;
    }
    w.flush().map_err(&err)?;

    let mut w = writer(dir, PARENT_LINKS_FILE)?;
    writeln!(w, "child_id,parent_id,kind").map_err(&err)?;
    for l in &sorted.parent_links {
        writeln!(w, "{},{},{}", l.child_id, l.parent_id, l.kind.as_str()).map_err(&err)?;
    }
    w.flush().map_err(&err)?;

    let mut w = writer(dir, RESIDENCES_FILE)?;
    writeln!(w, "person_id,year,address_id,marital_status,partner_id").map_err(&err)?;
    for r in &sorted.residences {
        let partner = r.partner_id.map(|p| p.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{}",
            r.person_id, r.year, r.address_id, r.marital_status.as_str(), partner
        )
        .map_err(&err)?;
    }
    w.flush().map_err(&err)?;

    let mut w = writer(dir, ADDRESSES_FILE)?;
    writeln!(w, "address_id,x,y").map_err(&err)?;
    for a in &sorted.addresses {
        writeln!(w, "{},{},{}", a.address_id, a.x, a.y).map_err(&err)?;
    }
    w.flush().map_err(&err)?;

    let mut w = writer(dir, EMPLOYMENT_FILE)?;
    writeln!(w, "person_id,year,workplace_id,fictional").map_err(&err)?;
    for e in &sorted.employment {
        writeln!(
            w,
            "{},{},{},{}",
            e.person_id, e.year, e.workplace_id, e.fictional as u8
        )
        .map_err(&err)?;
    }
    w.flush().map_err(&err)?;

    let mut w = writer(dir, ENROLLMENT_FILE)?;
    writeln!(w, "person_id,year,institution_id,program_id,grade").map_err(&err)?;
    for e in &sorted.enrollment {
        writeln!(
            w,
            "{},{},{},{},{}",
            e.person_id, e.year, e.institution_id, e.program_id, e.grade
        )
        .map_err(&err)?;
    }
    w.flush().map_err(&err)?;

    let mut w = writer(dir, INCOME_FILE)?;
    writeln!(w, "person_id,year,income").map_err(&err)?;
    for i in &sorted.income {
        writeln!(w, "{},{},{}", i.person_id, i.year, i.income).map_err(&err)?;
    }
    w.flush().map_err(&err)?;

    Ok(())
}

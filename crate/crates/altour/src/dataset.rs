//! Dataset CSV files: `Experiment,ID,pX,pY,tX,tY`, one row per
//! item/placeholder pair, coordinates with six decimals.
//!
//! Optional type labels live in a side file `Experiment,ID,pType,tType`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use altour_core::{Instance, NodeTypes, Point};

use crate::error::{AppError, Result};

pub const HEADER: [&str; 6] = ["Experiment", "ID", "pX", "pY", "tX", "tY"];
pub const TYPES_HEADER: [&str; 4] = ["Experiment", "ID", "pType", "tType"];

pub type Dataset = BTreeMap<u64, Instance>;

/// `experimental_n_{n}_data.csv`
pub fn data_file_name(n: usize) -> String {
    format!("experimental_n_{n}_data.csv")
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    read_csv(file)
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(AppError::Schema(format!(
            "expected header {:?}, found {:?}",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, k: usize, name: &'static str, row: u64) -> Result<T> {
    let raw = rec.get(k).unwrap_or("");
    raw.trim().parse().map_err(|_| AppError::Parse { row, field: name, value: raw.to_string() })
}

pub fn read_csv(reader: impl Read) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    check_header(&mut rdr, &HEADER)?;
    let mut groups: BTreeMap<u64, BTreeMap<usize, (Point, Point)>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line());
        let exp: u64 = field(&rec, 0, "Experiment", row)?;
        let id: usize = field(&rec, 1, "ID", row)?;
        let px: f64 = field(&rec, 2, "pX", row)?;
        let py: f64 = field(&rec, 3, "pY", row)?;
        let tx: f64 = field(&rec, 4, "tX", row)?;
        let ty: f64 = field(&rec, 5, "tY", row)?;
        let pairs = groups.entry(exp).or_default();
        if pairs.insert(id, (Point::new(px, py), Point::new(tx, ty))).is_some() {
            return Err(AppError::Dataset(format!("experiment {exp}: duplicate ID {id} (row {row})")));
        }
    }
    let mut out = Dataset::new();
    for (exp, pairs) in groups {
        if let Some(missing) = (0..pairs.len()).find(|k| !pairs.contains_key(k)) {
            return Err(AppError::Dataset(format!("experiment {exp}: missing ID {missing}")));
        }
        let (items, slots): (Vec<Point>, Vec<Point>) = pairs.into_values().unzip();
        let inst = Instance::new(exp, items, slots)
            .map_err(|e| AppError::Dataset(format!("experiment {exp}: {e}")))?;
        out.insert(exp, inst);
    }
    Ok(out)
}

pub fn save_csv(instances: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| AppError::io(path, e))?;
    write_csv(instances, file).map_err(|e| match e {
        AppError::Csv(c) if c.is_io_error() => AppError::io(path, std::io::Error::other(c.to_string())),
        other => other,
    })
}

pub fn write_csv(instances: &Dataset, writer: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(HEADER)?;
    for (exp, inst) in instances {
        for (id, (p, t)) in inst.items().iter().zip(inst.placeholders()).enumerate() {
            w.write_record([
                exp.to_string(),
                id.to_string(),
                format!("{:.6}", p.x),
                format!("{:.6}", p.y),
                format!("{:.6}", t.x),
                format!("{:.6}", t.y),
            ])?;
        }
    }
    w.flush().map_err(|e| AppError::Csv(e.into()))?;
    Ok(())
}

/// Attaches labels from a types side file. Experiments the file does not
/// mention keep their (absent) types.
pub fn load_types(path: impl AsRef<Path>, data: &mut Dataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    read_types(file, data)
}

pub fn read_types(reader: impl Read, data: &mut Dataset) -> Result<()> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    check_header(&mut rdr, &TYPES_HEADER)?;
    let mut groups: BTreeMap<u64, BTreeMap<usize, (String, String)>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line());
        let exp: u64 = field(&rec, 0, "Experiment", row)?;
        let id: usize = field(&rec, 1, "ID", row)?;
        let labels = (rec.get(2).unwrap_or("").to_string(), rec.get(3).unwrap_or("").to_string());
        if groups.entry(exp).or_default().insert(id, labels).is_some() {
            return Err(AppError::Dataset(format!("types for experiment {exp}: duplicate ID {id} (row {row})")));
        }
    }
    for (exp, labels) in groups {
        let inst = data.remove(&exp).ok_or(AppError::UnknownExperiment(exp))?;
        if labels.len() != inst.n() || (0..inst.n()).any(|k| !labels.contains_key(&k)) {
            return Err(AppError::Dataset(format!(
                "types for experiment {exp}: expected IDs 0..{}, found {} rows",
                inst.n(),
                labels.len()
            )));
        }
        let (items, placeholders) = labels.into_values().unzip();
        let typed = inst
            .with_types(NodeTypes { items, placeholders })
            .map_err(|e| AppError::Dataset(format!("types for experiment {exp}: {e}")))?;
        data.insert(exp, typed);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE1: &str = "Experiment,ID,pX,pY,tX,tY\n\
        1000,0,0.521386,0.603842,0.974764,0.153932\n\
        1000,1,0.232210,0.874131,0.066427,0.364722\n";

    #[test]
    fn reads_first_pair() {
        let d = read_csv(TABLE1.as_bytes()).unwrap();
        let inst = &d[&1000];
        assert_eq!(inst.items()[0], Point::new(0.521386, 0.603842));
        assert_eq!(inst.placeholders()[0], Point::new(0.974764, 0.153932));
        assert!(inst.fixed_pair());
        assert!((inst.cost_matrix().get(0, 0) - 0.6387).abs() < 1e-4);
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let d = read_csv(TABLE1.as_bytes()).unwrap();
        let mut out = Vec::new();
        write_csv(&d, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), TABLE1);
    }

    #[test]
    fn header_only_is_empty() {
        assert!(read_csv("Experiment,ID,pX,pY,tX,tY\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn gaps_and_duplicates_are_named() {
        let gap = "Experiment,ID,pX,pY,tX,tY\n7,0,0,0,1,1\n7,2,0,0,1,1\n";
        let msg = read_csv(gap.as_bytes()).unwrap_err().to_string();
        assert!(msg.contains("experiment 7") && msg.contains("ID 1"), "{msg}");
        let dup = "Experiment,ID,pX,pY,tX,tY\n7,0,0,0,1,1\n7,0,0,0,1,1\n";
        let msg = read_csv(dup.as_bytes()).unwrap_err().to_string();
        assert!(msg.contains("experiment 7") && msg.contains("duplicate ID 0"), "{msg}");
    }

    #[test]
    fn parse_errors_carry_row() {
        let bad = "Experiment,ID,pX,pY,tX,tY\n7,0,0,0,1,1\n7,1,zero,0,1,1\n";
        match read_csv(bad.as_bytes()) {
            Err(AppError::Parse { row, field, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(field, "pX");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_csv("a,b\n".as_bytes()), Err(AppError::Schema(_))));
    }

    #[test]
    fn types_side_file() {
        let mut d = read_csv(TABLE1.as_bytes()).unwrap();
        read_types("Experiment,ID,pType,tType\n1000,0,a,b\n1000,1,b,a\n".as_bytes(), &mut d).unwrap();
        assert_eq!(d[&1000].types().unwrap().items, vec!["a".to_string(), "b".to_string()]);
        let mut d = read_csv(TABLE1.as_bytes()).unwrap();
        let unbalanced = "Experiment,ID,pType,tType\n1000,0,a,b\n1000,1,a,b\n";
        assert!(matches!(read_types(unbalanced.as_bytes(), &mut d), Err(AppError::Dataset(_))));
    }
}

//! Dataset ingestion and synthesis: grouped-CSV loading and the two-circles
//! generator.

use std::f64::consts::TAU;
use std::path::Path;

use rand::Rng;
use sets_clustering::{MSet, Point, SetFamily};

use crate::error::{HarnessError, Result};

/// Loads a family from rows of `set_id,x_1,…,x_d`. A leading header row is
/// detected by its coordinate fields failing to parse as numbers. Rows are
/// grouped by set id in first-appearance order; a point repeated within one
/// set is dropped with a warning. `expected_dim` pins the coordinate count;
/// otherwise the first data row decides it.
pub fn load_grouped_csv(path: &Path, expected_dim: Option<usize>) -> Result<SetFamily> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut order: Vec<String> = Vec::new();
    let mut groups: std::collections::HashMap<String, Vec<Point>> =
        std::collections::HashMap::new();
    let mut dim = expected_dim;
    let mut saw_data = false;
    let mut skipped_header = false;
    for (row_index, record) in reader.records().enumerate() {
        let record = record?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(row_index + 1);
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        if record.len() < 2 {
            return Err(HarnessError::Invalid(format!(
                "line {line}: expected `set_id,x_1,…`, found {} field(s)",
                record.len()
            )));
        }
        let coords: std::result::Result<Vec<f64>, _> = record
            .iter()
            .skip(1)
            .map(|f| f.trim().parse::<f64>())
            .collect();
        let coords = match coords {
            Ok(c) => c,
            Err(e) => {
                if !saw_data && !skipped_header {
                    // Header row: coordinate columns are labels, not numbers.
                    // At most one row gets this treatment, so a corrupt first
                    // data row still errors instead of vanishing.
                    skipped_header = true;
                    continue;
                }
                return Err(HarnessError::Invalid(format!(
                    "line {line}: bad coordinate: {e}"
                )));
            }
        };
        match dim {
            None => dim = Some(coords.len()),
            Some(d) if d != coords.len() => {
                return Err(HarnessError::Invalid(format!(
                    "line {line}: expected {d} coordinate(s), found {}",
                    coords.len()
                )));
            }
            Some(_) => {}
        }
        saw_data = true;
        let id = record[0].trim().to_string();
        let point = Point::new(coords)
            .map_err(|e| HarnessError::Invalid(format!("line {line}: {e}")))?;
        let bucket = groups.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            Vec::new()
        });
        if bucket.contains(&point) {
            log::warn!("line {line}: duplicate point in set '{id}' dropped");
            continue;
        }
        bucket.push(point);
    }
    if order.is_empty() {
        return Err(HarnessError::Invalid(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    let sets: Vec<MSet> = order
        .iter()
        .map(|id| MSet::new(id.clone(), groups.remove(id).expect("grouped above")))
        .collect::<sets_clustering::Result<_>>()?;
    Ok(SetFamily::new(sets)?)
}

/// Writes a family back out as grouped CSV with a `set_id,x_1,…` header; the
/// output reloads through [`load_grouped_csv`]. Input weights are not
/// persisted (the format carries geometry only).
pub fn write_grouped_csv(family: &SetFamily, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["set_id".to_string()];
    for j in 1..=family.dim() {
        header.push(format!("x_{j}"));
    }
    writer.write_record(&header)?;
    for set in family.sets() {
        for p in set.points() {
            let mut row = vec![set.id().to_string()];
            for x in p.coords() {
                // `{}` on f64 prints the shortest form that parses back to
                // the same bits, so the file reloads exactly.
                row.push(format!("{x}"));
            }
            writer.write_record(&row)?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Two groups of point pairs: `n1` pairs {unit-circle point, the point 30x
/// further out} around the origin and `n2` such pairs around (r, 0). Ids are
/// `g1-i` and `g2-i`.
pub fn gen_two_circles<R: Rng + ?Sized>(
    n1: usize,
    n2: usize,
    r: f64,
    rng: &mut R,
) -> Result<SetFamily> {
    if n1 == 0 || n2 == 0 {
        return Err(HarnessError::Invalid(
            "both two-circles groups need at least one pair".into(),
        ));
    }
    if !r.is_finite() {
        return Err(HarnessError::Invalid(format!(
            "group separation must be finite, got {r}"
        )));
    }
    let mut sets = Vec::with_capacity(n1 + n2);
    for (group, count, cx) in [(1usize, n1, 0.0f64), (2, n2, r)] {
        for i in 0..count {
            let theta = rng.gen_range(0.0..TAU);
            let (sin, cos) = theta.sin_cos();
            let near = Point::new(vec![cx + cos, sin])?;
            let far = Point::new(vec![cx + 30.0 * cos, 30.0 * sin])?;
            sets.push(MSet::new(format!("g{group}-{i}"), vec![near, far])?);
        }
    }
    Ok(SetFamily::new(sets)?)
}

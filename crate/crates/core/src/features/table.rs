//! Delimited feature tables: `participant_id,date,<features in catalog order>` plus
//! a sibling flag table `participant_id,date,has_data:<Sensor>...,missing:<feature>...`.

use std::io::{Read, Write};

use chrono::NaiveDate;

use super::{DailyFeatureRow, FeatureCatalog};
use crate::model::SensorKind;

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("header does not match the feature catalog")]
    Header,
    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error("feature and flag tables disagree at row {0}")]
    Mismatch(usize),
}

pub fn write_feature_table<W: Write>(
    w: W,
    catalog: &FeatureCatalog,
    rows: &[DailyFeatureRow],
) -> Result<(), TableError> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["participant_id".to_string(), "date".to_string()];
    header.extend(catalog.iter().map(|f| f.name.clone()));
    wtr.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.participant_id.clone(), r.date.to_string()];
        rec.extend(catalog.iter().map(|f| r.value(&f.name).to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn flag_header(catalog: &FeatureCatalog) -> Vec<String> {
    let mut header = vec!["participant_id".to_string(), "date".to_string()];
    header.extend(
        SensorKind::ALL
            .iter()
            .map(|k| format!("has_data:{}", k.name())),
    );
    header.extend(catalog.iter().map(|f| format!("missing:{}", f.name)));
    header
}

pub fn write_missing_table<W: Write>(
    w: W,
    catalog: &FeatureCatalog,
    rows: &[DailyFeatureRow],
) -> Result<(), TableError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(flag_header(catalog))?;
    let bit = |b: bool| if b { "1" } else { "0" }.to_string();
    for r in rows {
        let mut rec = vec![r.participant_id.clone(), r.date.to_string()];
        rec.extend(
            SensorKind::ALL
                .iter()
                .map(|k| bit(r.has_any_data.get(k).copied().unwrap_or(false))),
        );
        rec.extend(catalog.iter().map(|f| bit(r.missing.contains(&f.name))));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Read both tables back into rows.
pub fn read_feature_tables<R1: Read, R2: Read>(
    features: R1,
    flags: R2,
    catalog: &FeatureCatalog,
) -> Result<Vec<DailyFeatureRow>, TableError> {
    let mut fr = csv::Reader::from_reader(features);
    let mut mr = csv::Reader::from_reader(flags);
    let names: Vec<&str> = catalog.iter().map(|f| f.name.as_str()).collect();
    {
        let h = fr.headers()?;
        if h.len() != names.len() + 2 || h.iter().skip(2).zip(&names).any(|(a, b)| a != *b) {
            return Err(TableError::Header);
        }
        let mh = mr.headers()?;
        if mh.iter().collect::<Vec<_>>() != flag_header(catalog) {
            return Err(TableError::Header);
        }
    }
    let mut out = Vec::new();
    for (i, (frec, mrec)) in fr.records().zip(mr.records()).enumerate() {
        let (frec, mrec) = (frec?, mrec?);
        let row = i + 1;
        if frec[0] != mrec[0] || frec[1] != mrec[1] {
            return Err(TableError::Mismatch(row));
        }
        let date: NaiveDate = frec[1].parse().map_err(|_| TableError::Row {
            row,
            reason: format!("bad date `{}`", &frec[1]),
        })?;
        let mut r = DailyFeatureRow::empty(&frec[0], date, catalog);
        r.missing.clear();
        for (k, name) in names.iter().enumerate() {
            let v: f64 = frec[k + 2].parse().map_err(|_| TableError::Row {
                row,
                reason: format!("bad value for {name}"),
            })?;
            r.values.insert(name.to_string(), v);
            if &mrec[2 + SensorKind::ALL.len() + k] == "1" {
                r.missing.insert(name.to_string());
            }
        }
        for (k, sensor) in SensorKind::ALL.iter().enumerate() {
            r.has_any_data.insert(*sensor, &mrec[2 + k] == "1");
        }
        out.push(r);
    }
    Ok(out)
}

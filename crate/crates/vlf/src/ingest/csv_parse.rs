use super::{AisRecord, IngestError};
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::Path;

/// Maps CSV header names onto the record fields. Any column set works as
/// long as the six mapped columns are present.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvSchema {
    pub mmsi: String,
    pub t: String,
    pub lon: String,
    pub lat: String,
    pub speed: String,
    pub course: String,
    pub vessel_type: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            mmsi: "mmsi".into(),
            t: "t".into(),
            lon: "lon".into(),
            lat: "lat".into(),
            speed: "speed".into(),
            course: "course".into(),
            vessel_type: "shiptype".into(),
        }
    }
}

struct ColumnIdx {
    mmsi: usize,
    t: usize,
    lon: usize,
    lat: usize,
    speed: usize,
    course: usize,
    vessel_type: usize,
}

fn resolve(headers: &csv::StringRecord, schema: &CsvSchema) -> Result<ColumnIdx, IngestError> {
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::Schema(format!("missing column '{name}'")))
    };
    Ok(ColumnIdx {
        mmsi: find(&schema.mmsi)?,
        t: find(&schema.t)?,
        lon: find(&schema.lon)?,
        lat: find(&schema.lat)?,
        speed: find(&schema.speed)?,
        course: find(&schema.course)?,
        vessel_type: find(&schema.vessel_type)?,
    })
}

/// Parses one row. `None` means the row is malformed (unparsable numbers,
/// out-of-range coordinates, bad MMSI) and should be counted, not kept.
fn parse_row(row: &csv::StringRecord, idx: &ColumnIdx) -> Option<AisRecord> {
    let field = |i: usize| row.get(i).map(str::trim);
    let num = |i: usize| field(i).and_then(|s| s.parse::<f64>().ok()).filter(|v| v.is_finite());

    let mmsi_raw = field(idx.mmsi)?.parse::<u64>().ok()?;
    if !(100_000_000..=999_999_999).contains(&mmsi_raw) {
        return None;
    }
    // Timestamps are integral seconds; reject fractional or non-finite input.
    let t_val = num(idx.t)?;
    if t_val.fract() != 0.0 || t_val.abs() > 4e17 {
        return None;
    }
    let lon = num(idx.lon).filter(|v| (-180.0..=180.0).contains(v))?;
    let lat = num(idx.lat).filter(|v| (-90.0..=90.0).contains(v))?;
    let speed = num(idx.speed).filter(|v| *v >= 0.0)?;
    let course = num(idx.course).filter(|v| (0.0..360.0).contains(v))?;
    let vessel_type = field(idx.vessel_type)?.parse::<u32>().ok()?;

    Some(AisRecord {
        mmsi: mmsi_raw as u32,
        t: t_val as i64,
        lon,
        lat,
        speed,
        course,
        vessel_type,
    })
}

/// Reads AIS records from CSV. Returns the parsed records plus the number
/// of malformed rows that were skipped. A missing mapped column is fatal.
pub fn parse_ais_csv<R: Read>(
    reader: R,
    schema: &CsvSchema,
) -> Result<(Vec<AisRecord>, u64), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let idx = resolve(rdr.headers()?, schema)?;
    let mut records = Vec::new();
    let mut skipped = 0u64;
    for row in rdr.records() {
        let row = row?;
        match parse_row(&row, &idx) {
            Some(rec) => records.push(rec),
            None => skipped += 1,
        }
    }
    Ok((records, skipped))
}

pub fn parse_ais_csv_path(
    path: &Path,
    schema: &CsvSchema,
) -> Result<(Vec<AisRecord>, u64), IngestError> {
    let file = std::fs::File::open(path)?;
    parse_ais_csv(std::io::BufReader::new(file), schema)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> CsvSchema {
        CsvSchema::default()
    }

    #[test]
    fn parses_well_formed_rows() {
        let data = "mmsi,t,lon,lat,speed,course,shiptype\n\
                    227001000,1443650400,-4.47,48.38,12.3,270.0,70\n\
                    259112000,1443650410,-4.48,48.39,0.5,10.0,30\n";
        let (recs, skipped) = parse_ais_csv(data.as_bytes(), &schema()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(skipped, 0);
        assert_eq!(recs[0].mmsi, 227001000);
        assert_eq!(recs[0].t, 1443650400);
        assert_eq!(recs[1].vessel_type, 30);
    }

    #[test]
    fn counts_malformed_rows() {
        // bad mmsi (8 digits), bad lat, bad course, unparsable speed
        let data = "mmsi,t,lon,lat,speed,course,shiptype\n\
                    27001000,1443650400,-4.47,48.38,12.3,270.0,70\n\
                    227001000,1443650400,-4.47,98.38,12.3,270.0,70\n\
                    227001000,1443650400,-4.47,48.38,12.3,360.0,70\n\
                    227001000,1443650400,-4.47,48.38,fast,270.0,70\n\
                    227001000,1443650400,-4.47,48.38,12.3,270.0,70\n";
        let (recs, skipped) = parse_ais_csv(data.as_bytes(), &schema()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(skipped, 4);
    }

    #[test]
    fn missing_column_is_fatal() {
        let data = "mmsi,t,lon,lat,speed,course\n227001000,0,0,0,1,0\n";
        let err = parse_ais_csv(data.as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, IngestError::Schema(_)));
    }

    #[test]
    fn custom_schema_maps_columns() {
        let data = "id,ts,x,y,sog,cog,kind\n227001000,100,1.0,2.0,3.0,4.0,80\n";
        let s = CsvSchema {
            mmsi: "id".into(),
            t: "ts".into(),
            lon: "x".into(),
            lat: "y".into(),
            speed: "sog".into(),
            course: "cog".into(),
            vessel_type: "kind".into(),
        };
        let (recs, skipped) = parse_ais_csv(data.as_bytes(), &s).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(skipped, 0);
        assert_eq!(recs[0].lon, 1.0);
        assert_eq!(recs[0].vessel_type, 80);
    }
}

//! Sample file formats: CSV point table, JSON document and OBJ point cloud.

use std::io::{self, BufRead, Write};

use serde::Serialize;

use super::{Provenance, Sample};

/// Format tag written into sample JSON documents.
pub const SAMPLE_FORMAT: &str = "varsample-sample/1";

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

/// One row per point: coordinates `x0..x{n-1}`, then `source`, `k`, `t`, `g`
/// (space-separated lists). Floats use shortest round-trip notation.
pub fn write_csv<W: Write>(sample: &Sample, mut w: W) -> io::Result<()> {
    let cols: Vec<String> = (0..sample.n).map(|i| format!("x{i}")).collect();
    writeln!(w, "{},source,k,t,g", cols.join(","))?;
    for (p, prov) in sample.points.iter().zip(&sample.provenance) {
        let coords = p.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let (src, k, t, g) = match prov {
            Provenance::Basic { t, g } => ("basic", sample.d, t, g),
            Provenance::Extra { k, t, g } => ("extra", *k, t, g),
        };
        writeln!(w, "{coords},{src},{k},{},{}", join(t), join(g))?;
    }
    Ok(())
}

/// Reads the coordinate columns (`x0`, `x1`, ...) of a sample CSV.
pub fn read_csv_points<R: BufRead>(r: R) -> io::Result<Vec<Vec<f64>>> {
    let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad("empty CSV".into()))??;
    let n = header
        .split(',')
        .take_while(|c| c.trim().starts_with('x'))
        .count();
    if n == 0 {
        return Err(bad("CSV header has no coordinate columns".into()));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p: Result<Vec<f64>, _> = line.split(',').take(n).map(|s| s.trim().parse::<f64>()).collect();
        let p = p.map_err(|e| bad(format!("line {}: {e}", i + 2)))?;
        if p.len() != n {
            return Err(bad(format!("line {}: expected {n} coordinates", i + 2)));
        }
        out.push(p);
    }
    Ok(out)
}

#[derive(Serialize)]
struct SampleDoc<'a> {
    format: &'static str,
    #[serde(flatten)]
    sample: &'a Sample,
}

/// Full JSON document: metadata block plus points and provenance.
pub fn to_json(sample: &Sample) -> serde_json::Value {
    serde_json::to_value(SampleDoc {
        format: SAMPLE_FORMAT,
        sample,
    })
    .expect("sample serializes")
}

/// Wavefront OBJ vertices; the first three coordinates, zero-padded.
pub fn write_obj<W: Write>(sample: &Sample, mut w: W) -> io::Result<()> {
    writeln!(w, "# varsample point cloud, {} points", sample.len())?;
    if sample.n > 3 {
        writeln!(w, "# projected onto coordinates x0 x1 x2")?;
    }
    for p in &sample.points {
        let c = |i: usize| p.get(i).copied().unwrap_or(0.0);
        writeln!(w, "v {} {} {}", c(0), c(1), c(2))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::BoundingBox;
    use crate::sample::SampleTimings;

    fn tiny() -> Sample {
        Sample {
            n: 2,
            d: 1,
            points: vec![vec![0.6, 0.8], vec![-1.0, 1e-17]],
            provenance: vec![
                Provenance::Basic { t: vec![0], g: vec![0.6] },
                Provenance::Basic { t: vec![1], g: vec![1e-17] },
            ],
            epsilon_certified: Some(0.3),
            delta: 0.2,
            seed: 1,
            b2: Some(1.0),
            translation: vec![0.0, 0.0],
            bounding_box: BoundingBox {
                center: vec![0.0, 0.0],
                half_width: 1.0,
            },
            basic_count: 2,
            extra_count: 0,
            paths_tracked: 4,
            generic_paths: 8,
            slice_degrees: vec![],
            slices: 2,
            singular_endpoints: 0,
            timings: SampleTimings::default(),
            bottlenecks: None,
        }
    }

    #[test]
    fn csv_round_trip() {
        let s = tiny();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x0,x1,source,k,t,g\n0.6,0.8,basic,1,0,0.6\n"));
        assert_eq!(read_csv_points(&buf[..]).unwrap(), s.points);
    }

    #[test]
    fn obj_pads() {
        let mut buf = Vec::new();
        write_obj(&tiny(), &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("v 0.6 0.8 0\n"));
    }

    #[test]
    fn json_has_format_tag() {
        let v = to_json(&tiny());
        assert_eq!(v["format"], SAMPLE_FORMAT);
        assert_eq!(v["provenance"][0]["kind"], "basic");
    }
}

//! CSV import/export of fields, matrices and distance triples. Numbers are
//! written with 17 significant digits, which round-trips `f64` exactly.

use crate::error::{Error, Result};
use crate::reconstruction::DistanceTriple;
use crate::scalar::Real;
use crate::spacetime::Grid;
use std::io::{Read, Write};

pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|e| Error::Parse(format!("'{s}': {e}")))
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        k => Error::Parse(format!("{k:?}")),
    }
}

/// A node-indexed field with coordinates, as read back from CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldTable {
    pub header: Vec<String>,
    pub coords: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

/// Writes `t, s…, value` per interior node, in node order.
pub fn write_field<T: Real, W: Write>(w: W, grid: &Grid<T>, values: &[T]) -> Result<()> {
    if values.len() != grid.len() && !values.is_empty() {
        return Err(Error::GridMismatch { left: values.len(), right: grid.len() });
    }
    let dims = grid.spec().spatial_dims();
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<&str> = if dims == 1 { vec!["t", "s", "value"] } else { vec!["t", "s1", "s2", "value"] };
    out.write_record(&header).map_err(csv_err)?;
    for (p, v) in grid.nodes().iter().zip(values) {
        let mut rec = vec![fmt17(p.t.as_f64())];
        rec.extend(p.s[..dims].iter().map(|s| fmt17(s.as_f64())));
        rec.push(fmt17(v.as_f64()));
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_field<R: Read>(r: R) -> Result<FieldTable> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(String::from).collect();
    if header.last().map(String::as_str) != Some("value") || header.len() < 3 {
        return Err(Error::Parse(format!("unexpected field header {header:?}")));
    }
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let nums = rec.iter().map(parse).collect::<Result<Vec<f64>>>()?;
        let (v, c) = nums.split_last().ok_or_else(|| Error::Parse("empty row".into()))?;
        coords.push(c.to_vec());
        values.push(*v);
    }
    Ok(FieldTable { header, coords, values })
}

/// Square matrix with an `index, 0, 1, …` header and the row index in the
/// first column.
pub fn write_matrix<T: Real, W: Write>(w: W, m: &[Vec<T>]) -> Result<()> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::Precondition("matrix is not square".into()));
    }
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["index".to_string()];
    header.extend((0..n).map(|j| j.to_string()));
    out.write_record(&header).map_err(csv_err)?;
    for (i, row) in m.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(|v| fmt17(v.as_f64())));
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix<R: Read>(r: R) -> Result<Vec<Vec<f64>>> {
    let mut rd = csv::Reader::from_reader(r);
    let n = rd.headers().map_err(csv_err)?.len().saturating_sub(1);
    let mut m = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.get(0).map(str::trim) != Some(i.to_string().as_str()) {
            return Err(Error::Parse(format!("row {i} has index {:?}", rec.get(0))));
        }
        m.push(rec.iter().skip(1).map(parse).collect::<Result<Vec<f64>>>()?);
    }
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("matrix is not {n} × {n}")));
    }
    Ok(m)
}

/// Rows `i, j, d_{-1/2}, d_0, d_{1/2}`.
pub fn write_triples<T: Real, W: Write>(w: W, rows: &[(usize, usize, DistanceTriple<T>)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["i", "j", "d_neg_half", "d_zero", "d_pos_half"]).map_err(csv_err)?;
    for (i, j, t) in rows {
        let d = t.distances();
        out.write_record([i.to_string(), j.to_string(), fmt17(d[0].as_f64()), fmt17(d[1].as_f64()), fmt17(d[2].as_f64())])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_triples<R: Read>(r: R) -> Result<Vec<(usize, usize, DistanceTriple<f64>)>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != 5 {
            return Err(Error::Parse(format!("triple row has {} columns, expected 5", rec.len())));
        }
        let idx = |k: usize| rec[k].trim().parse::<usize>().map_err(|e| Error::Parse(format!("'{}': {e}", &rec[k])));
        let d = [parse(&rec[2])?, parse(&rec[3])?, parse(&rec[4])?];
        out.push((idx(0)?, idx(1)?, DistanceTriple::from_distances(d)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorentz::sigma_field;
    use crate::spacetime::SpacetimeSpec;
    use proptest::prelude::*;

    #[test]
    fn field_round_trip_bitwise() {
        let spec = SpacetimeSpec::<f64>::flat_circle(-1.0, 1.0, 4.0).unwrap();
        let g = Grid::build(&spec, 8, &[8]).unwrap();
        let f = sigma_field(&g, &spec.pt(0.1, 0.3)).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &g, &f.values.values).unwrap();
        let t = read_field(buf.as_slice()).unwrap();
        assert_eq!(t.header, ["t", "s", "value"]);
        assert_eq!(t.values.len(), g.len());
        for (a, b) in t.values.iter().zip(&f.values.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (c, p) in t.coords.iter().zip(g.nodes()) {
            assert_eq!(c[0].to_bits(), p.t.to_bits());
        }
    }

    #[test]
    fn empty_field_is_header_only() {
        let spec = SpacetimeSpec::<f64>::flat_circle(-1.0, 1.0, 4.0).unwrap();
        let g = Grid::build(&spec, 4, &[4]).unwrap();
        let mut buf = Vec::new();
        write_field::<f64, _>(&mut buf, &g, &[]).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "t,s,value\n");
        assert!(read_field(buf.as_slice()).unwrap().values.is_empty());
    }

    #[test]
    fn matrix_shape() {
        let m = vec![vec![0.0, 1.5, 2.0], vec![1.5, 0.0, 0.25], vec![2.0, 0.25, 0.0]];
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("index,0,1,2\n0,"));
        assert_eq!(read_matrix(buf.as_slice()).unwrap(), m);
        assert!(write_matrix(&mut Vec::new(), &[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn triples_round_trip() {
        let rows = vec![(0, 1, DistanceTriple::from_distances([0.5, 1.0, 1.5]).unwrap())];
        let mut buf = Vec::new();
        write_triples(&mut buf, &rows).unwrap();
        let back = read_triples(buf.as_slice()).unwrap();
        assert_eq!(back[0].0, 0);
        assert_eq!(back[0].2.distances(), [0.5, 1.0, 1.5]);
        assert!(read_triples("i,j,a,b,c\n0,1,-1,0,0\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn fmt17_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            prop_assert_eq!(parse(&fmt17(x)).unwrap().to_bits(), x.to_bits());
        }
    }
}

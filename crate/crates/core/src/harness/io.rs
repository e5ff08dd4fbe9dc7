use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::experiment::SweepRecord;
use crate::error::{Error, Result};
use crate::fem::evaluate_field;
use crate::mesh::{FiberMesh, HexMesh};

pub const CSV_HEADER: &str = "n_fibers,radius,l2_error,iterations,seconds";

/// Lexicographic corner `a + 2b + 4c` for each VTK hexahedron corner.
const VTK_HEX_ORDER: [usize; 8] = [0, 1, 3, 2, 4, 5, 7, 6];
const VTK_HEXAHEDRON: u8 = 12;
const VTK_POLY_LINE: u8 = 4;

pub fn csv_string(records: &[SweepRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(s, "{},{},{},{},{:.6}", r.n_fibers, r.radius, r.l2_error, r.iterations, r.seconds);
    }
    s
}

pub fn write_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    fs::write(path, csv_string(records)).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => {
            return Err(Error::Parse {
                location: "line 1".into(),
                message: format!("expected header `{CSV_HEADER}`, found `{}`", other.unwrap_or("")),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Parse {
            location: format!("line {}", i + 2),
            message: format!("bad {what} in `{line}`"),
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(bad("field count"));
        }
        out.push(SweepRecord {
            n_fibers: f[0].parse().map_err(|_| bad("n_fibers"))?,
            radius: f[1].parse().map_err(|_| bad("radius"))?,
            l2_error: f[2].parse().map_err(|_| bad("l2_error"))?,
            iterations: f[3].parse().map_err(|_| bad("iterations"))?,
            seconds: f[4].parse().map_err(|_| bad("seconds"))?,
            error: None,
        });
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    parse_csv(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// Legacy ASCII VTK of the hex mesh and the fiber polylines. Points are the
/// mesh vertices followed by the fiber nodes. `u` and `u_hom` are background
/// fields, interpolated onto fiber nodes; `w` is zero on mesh vertices.
pub fn vtk_string(mesh: &HexMesh, fibers: &FiberMesh, u: &[f64], u_hom: &[f64], w: &[f64]) -> Result<String> {
    let nb = mesh.n_vertices();
    let nf = fibers.n_nodes();
    for (v, n) in [(u, nb), (u_hom, nb), (w, nf)] {
        if v.len() != 3 * n {
            return Err(Error::DimensionMismatch {
                expected: 3 * n,
                actual: v.len(),
            });
        }
    }
    let mut s = String::new();
    s += "# vtk DataFile Version 3.0\nfiber reinforced solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    let _ = writeln!(s, "POINTS {} double", nb + nf);
    for p in mesh.vertices().chain(fibers.nodes.iter().copied()) {
        let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
    }

    let nc = mesh.n_cells();
    let polylines: Vec<Vec<usize>> = fibers.fiber_nodes.iter().map(|r| r.clone().map(|i| nb + i).collect()).collect();
    let size = 9 * nc + polylines.iter().map(|p| p.len() + 1).sum::<usize>();
    let _ = writeln!(s, "CELLS {} {}", nc + polylines.len(), size);
    for c in 0..nc {
        let v = mesh.cell_vertices(c);
        s += "8";
        for &k in &VTK_HEX_ORDER {
            let _ = write!(s, " {}", v[k]);
        }
        s.push('\n');
    }
    for p in &polylines {
        let _ = write!(s, "{}", p.len());
        for i in p {
            let _ = write!(s, " {i}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", nc + polylines.len());
    for _ in 0..nc {
        let _ = writeln!(s, "{VTK_HEXAHEDRON}");
    }
    for _ in &polylines {
        let _ = writeln!(s, "{VTK_POLY_LINE}");
    }

    let _ = writeln!(s, "POINT_DATA {}", nb + nf);
    for (name, field) in [("u", u), ("u_hom", u_hom)] {
        let _ = writeln!(s, "VECTORS {name} double");
        for v in field.chunks(3) {
            let _ = writeln!(s, "{} {} {}", v[0], v[1], v[2]);
        }
        for p in &fibers.nodes {
            let v = evaluate_field(mesh, field, p)?;
            let _ = writeln!(s, "{} {} {}", v[0], v[1], v[2]);
        }
    }
    s += "VECTORS w double\n";
    for _ in 0..nb {
        s += "0 0 0\n";
    }
    for v in w.chunks(3) {
        let _ = writeln!(s, "{} {} {}", v[0], v[1], v[2]);
    }
    Ok(s)
}

pub fn write_vtk(path: &Path, mesh: &HexMesh, fibers: &FiberMesh, u: &[f64], u_hom: &[f64], w: &[f64]) -> Result<()> {
    let s = vtk_string(mesh, fibers, u, u_hom, w)?;
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Structure recovered from a legacy unstructured-grid file.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkGrid {
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u8>,
    pub vectors: BTreeMap<String, Vec<[f64; 3]>>,
}

/// Parses the subset of legacy ASCII VTK emitted by [`vtk_string`] and checks
/// its structural consistency.
pub fn parse_vtk(text: &str) -> Result<VtkGrid> {
    let perr = |m: String| Error::Parse {
        location: "vtk".into(),
        message: m,
    };
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("# vtk DataFile Version 3.0") {
        return Err(perr("missing version line".into()));
    }
    lines.next();
    if lines.next().map(str::trim) != Some("ASCII") {
        return Err(perr("not ASCII".into()));
    }
    if lines.next().map(str::trim) != Some("DATASET UNSTRUCTURED_GRID") {
        return Err(perr("not an unstructured grid".into()));
    }
    let mut tokens = lines.flat_map(str::split_whitespace);
    let mut next = |what: &str| tokens.next().ok_or_else(|| perr(format!("truncated at {what}")));
    fn num<T: std::str::FromStr>(t: &str) -> Result<T> {
        t.parse().map_err(|_| Error::Parse {
            location: "vtk".into(),
            message: format!("bad number `{t}`"),
        })
    }
    let expect = |got: &str, want: &str| {
        if got == want {
            Ok(())
        } else {
            Err(perr(format!("expected `{want}`, found `{got}`")))
        }
    };

    expect(next("POINTS")?, "POINTS")?;
    let np: usize = num(next("count")?)?;
    next("type")?;
    let mut points = Vec::with_capacity(np);
    for _ in 0..np {
        points.push([num(next("x")?)?, num(next("y")?)?, num(next("z")?)?]);
    }

    expect(next("CELLS")?, "CELLS")?;
    let nc: usize = num(next("count")?)?;
    let size: usize = num(next("size")?)?;
    let mut cells = Vec::with_capacity(nc);
    let mut used = 0;
    for _ in 0..nc {
        let k: usize = num(next("cell")?)?;
        let mut c = Vec::with_capacity(k);
        for _ in 0..k {
            let i: usize = num(next("index")?)?;
            if i >= np {
                return Err(perr(format!("point index {i} out of range")));
            }
            c.push(i);
        }
        used += k + 1;
        cells.push(c);
    }
    if used != size {
        return Err(perr(format!("CELLS size {size} but {used} entries")));
    }

    expect(next("CELL_TYPES")?, "CELL_TYPES")?;
    let nt: usize = num(next("count")?)?;
    if nt != nc {
        return Err(perr(format!("{nt} cell types for {nc} cells")));
    }
    let mut cell_types = Vec::with_capacity(nt);
    for c in &cells {
        let t: u8 = num(next("type")?)?;
        let ok = match t {
            VTK_HEXAHEDRON => c.len() == 8,
            VTK_POLY_LINE => c.len() >= 2,
            _ => false,
        };
        if !ok {
            return Err(perr(format!("cell type {t} with {} points", c.len())));
        }
        cell_types.push(t);
    }

    let mut vectors = BTreeMap::new();
    if let Some(t) = tokens.next() {
        expect(t, "POINT_DATA")?;
        let n: usize = num(tokens.next().ok_or_else(|| perr("truncated".into()))?)?;
        if n != np {
            return Err(perr(format!("POINT_DATA {n} for {np} points")));
        }
        while let Some(t) = tokens.next() {
            expect(t, "VECTORS")?;
            let name = tokens.next().ok_or_else(|| perr("missing name".into()))?.to_string();
            tokens.next();
            let mut data = Vec::with_capacity(np);
            for _ in 0..np {
                let mut v = [0.0; 3];
                for c in &mut v {
                    *c = num(tokens.next().ok_or_else(|| perr(format!("truncated vector {name}")))?)?;
                }
                data.push(v);
            }
            vectors.insert(name, data);
        }
    }
    Ok(VtkGrid {
        points,
        cells,
        cell_types,
        vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_fiber_mesh, FiberCurve, FiberNetwork, Point};

    fn record(n: usize) -> SweepRecord {
        SweepRecord {
            n_fibers: n,
            radius: 0.0123,
            l2_error: 1.5e-3,
            iterations: 42,
            seconds: 0.25,
            error: None,
        }
    }

    #[test]
    fn csv_examples() {
        assert_eq!(csv_string(&[]), format!("{CSV_HEADER}\n"));
        let s = csv_string(&[record(16)]);
        assert_eq!(s.lines().count(), 2);
        assert_eq!(parse_csv(&s).unwrap(), vec![record(16)]);
        assert!(parse_csv("a,b\n").is_err());
        assert!(parse_csv(&format!("{CSV_HEADER}\n1,2,3\n")).is_err());
    }

    #[test]
    fn csv_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let recs = vec![record(16), record(36)];
        write_csv(&recs, &path).unwrap();
        assert_eq!(read_csv(&path).unwrap(), recs);
        let err = read_csv(&dir.path().join("missing.csv")).unwrap_err();
        assert!(err.to_string().contains("missing.csv"));
    }

    #[test]
    fn vtk_self_parse() {
        let mesh = HexMesh::new(1).unwrap();
        let curve = FiberCurve::segment(Point::new(0.1, 0.5, 0.5), Point::new(0.9, 0.5, 0.5)).unwrap();
        let fibers = build_fiber_mesh(&FiberNetwork::new(vec![curve], 0.05).unwrap(), 1).unwrap();
        let u: Vec<f64> = mesh.vertices().flat_map(|p| [p[0], 0.0, 2.0 * p[2]]).collect();
        let u_hom = vec![1.0; u.len()];
        let w = vec![0.5; 3 * fibers.n_nodes()];
        let s = vtk_string(&mesh, &fibers, &u, &u_hom, &w).unwrap();
        let g = parse_vtk(&s).unwrap();
        assert_eq!(g.points.len(), 27 + 3);
        assert_eq!(g.cells.len(), 8 + 1);
        assert_eq!(g.cell_types.iter().filter(|&&t| t == 12).count(), 8);
        assert_eq!(g.cells[8], vec![27, 28, 29]);
        assert_eq!(g.vectors.keys().collect::<Vec<_>>(), ["u", "u_hom", "w"]);
        // interpolated u at the fiber midpoint (0.5, 0.5, 0.5)
        let um = g.vectors["u"][28];
        assert!((um[0] - 0.5).abs() < 1e-15 && (um[2] - 1.0).abs() < 1e-15);
        assert_eq!(g.vectors["w"][0], [0.0; 3]);
        assert_eq!(g.vectors["w"][29], [0.5; 3]);
        // first hex in VTK order is a right-handed unit cell
        let c = &g.cells[0];
        let p = |i: usize| Point::from(g.points[c[i]]);
        let e1 = p(1) - p(0);
        let e2 = p(3) - p(0);
        let e3 = p(4) - p(0);
        assert!(e1.cross(&e2).dot(&e3) > 0.0);
        assert!((p(2) - p(0) - e1 - e2).norm() < 1e-15);

        assert!(vtk_string(&mesh, &fibers, &u[1..], &u_hom, &w).is_err());
        assert!(parse_vtk(&s.replace("CELL_TYPES 9", "CELL_TYPES 8")).is_err());
    }
}

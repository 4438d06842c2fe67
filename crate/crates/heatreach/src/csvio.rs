//! CSV serialization for every artifact the experiments emit.
//!
//! One format across the toolkit: comma separators, `.` decimals,
//! 17-significant-digit scientific notation (doubles survive a text
//! round-trip bitwise), an optional `#`-prefixed metadata block of
//! `# key = value` lines, then a header row, then data rows.  Bodies are
//! pure functions of the serialized values, so identical inputs produce
//! byte-identical files at any thread count.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::fdm::FieldSample;
use crate::geometry::{ComplexPoint, DomainSpec};
use crate::layer::BoundaryDensity;
use crate::onedim::{EndpointDensities, EndpointSignals};
use crate::wick::ControlSchedule;
use crate::{Error, Result};

/// Formats a double with 17 significant digits, enough to reconstruct
/// the exact bit pattern from the text.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a `# key = value` metadata block.
pub fn write_metadata(w: &mut dyn Write, meta: &[(&str, String)]) -> Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

/// One-line description of a domain for metadata blocks.
pub fn describe_domain(domain: &DomainSpec) -> String {
    match domain {
        DomainSpec::Interval { a, b } => format!("interval ({a}, {b})"),
        DomainSpec::Ball { center, radius } => {
            format!("ball radius {radius} center {center:?}")
        }
        DomainSpec::Polygon { vertices } => format!("polygon with {} vertices", vertices.len()),
    }
}

fn write_header(w: &mut dyn Write, cols: &[String]) -> Result<()> {
    writeln!(w, "{}", cols.join(","))?;
    Ok(())
}

/// `x` for one dimension, `x1, x2, …` beyond.
fn coord_names(prefix: &str, d: usize) -> Vec<String> {
    if d == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=d).map(|i| format!("{prefix}{i}")).collect()
    }
}

/// Egg sample points: real coordinates, then the imaginary displacement
/// (`x, y` in one dimension; `x1, x2, y1, y2` in two).
pub fn write_points(
    w: &mut dyn Write,
    points: &[ComplexPoint],
    meta: &[(&str, String)],
) -> Result<()> {
    let d = points
        .first()
        .map(|p| p.dim())
        .ok_or_else(|| Error::InvalidArgument("no points to serialize".into()))?;
    write_metadata(w, meta)?;
    let mut cols = coord_names("x", d);
    cols.extend(coord_names("y", d));
    write_header(w, &cols)?;
    for p in points {
        let fields: Vec<String> = p
            .re
            .iter()
            .chain(p.im.iter())
            .copied()
            .map(format_f64)
            .collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Boundary densities and Dirichlet data: `t_index,node_index,re,im`,
/// one row per collocation slab and node.
pub fn write_boundary_density(
    w: &mut dyn Write,
    q: &BoundaryDensity,
    meta: &[(&str, String)],
) -> Result<()> {
    write_metadata(w, meta)?;
    writeln!(w, "# domain = {}", describe_domain(&q.grid.domain))?;
    writeln!(w, "# t_final = {}", format_f64(q.grid.t_final))?;
    writeln!(w, "# nt = {}", q.grid.nt)?;
    writeln!(w, "# nb = {}", q.grid.nb())?;
    write_header(
        w,
        &["t_index", "node_index", "re", "im"].map(String::from),
    )?;
    for i in 0..q.grid.nt {
        for j in 0..q.grid.nb() {
            let v = q.at(i, j);
            writeln!(w, "{i},{j},{},{}", format_f64(v.re), format_f64(v.im))?;
        }
    }
    Ok(())
}

/// Field samples from a marching solve: `t,x…,re,im`, one row per
/// sampled time and spatial point.
pub fn write_field_sample(
    w: &mut dyn Write,
    field: &FieldSample,
    meta: &[(&str, String)],
) -> Result<()> {
    let d = field
        .spatial_grid
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidArgument("field sample has no spatial grid".into()))?;
    write_metadata(w, meta)?;
    writeln!(w, "# domain = {}", describe_domain(&field.domain))?;
    let mut cols = vec!["t".to_string()];
    cols.extend(coord_names("x", d));
    cols.push("re".to_string());
    cols.push("im".to_string());
    write_header(w, &cols)?;
    for (row, &t) in field.times.iter().enumerate() {
        for (p, x) in field.spatial_grid.iter().enumerate() {
            let v = field.value(row, p);
            let coords: Vec<String> = x.iter().copied().map(format_f64).collect();
            writeln!(
                w,
                "{},{},{},{}",
                format_f64(t),
                coords.join(","),
                format_f64(v.re),
                format_f64(v.im)
            )?;
        }
    }
    Ok(())
}

/// Endpoint Dirichlet traces: `t,h1,h2` with the slab half-length in
/// the metadata, so the file reconstructs the signals exactly.
pub fn write_endpoint_signals(
    w: &mut dyn Write,
    s: &EndpointSignals,
    meta: &[(&str, String)],
) -> Result<()> {
    write_metadata(w, meta)?;
    writeln!(w, "# l_half = {}", format_f64(s.l_half()))?;
    write_header(w, &["t", "h1", "h2"].map(String::from))?;
    let dt = s.dt();
    for j in 0..s.nt() {
        writeln!(
            w,
            "{},{},{}",
            format_f64(j as f64 * dt),
            format_f64(s.h1()[j]),
            format_f64(s.h2()[j])
        )?;
    }
    Ok(())
}

/// Endpoint densities: `t,q1,q2`, same layout as the signals.
pub fn write_endpoint_densities(
    w: &mut dyn Write,
    q: &EndpointDensities,
    meta: &[(&str, String)],
) -> Result<()> {
    write_metadata(w, meta)?;
    writeln!(w, "# l_half = {}", format_f64(q.l_half()))?;
    write_header(w, &["t", "q1", "q2"].map(String::from))?;
    let dt = q.dt();
    for j in 0..q.nt() {
        writeln!(
            w,
            "{},{},{}",
            format_f64(j as f64 * dt),
            format_f64(q.q1()[j]),
            format_f64(q.q2()[j])
        )?;
    }
    Ok(())
}

/// Parsed `t, a, b` table plus its metadata block.
struct TwoChannelTable {
    meta: BTreeMap<String, String>,
    t: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

fn parse_f64(field: &str, line_no: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        Error::InvalidArgument(format!("line {line_no}: cannot parse '{field}' as a number"))
    })
}

fn read_two_channel(r: &mut dyn BufRead, header: &str) -> Result<TwoChannelTable> {
    let mut meta = BTreeMap::new();
    let mut t = Vec::new();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut seen_header = false;
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if !seen_header {
            if trimmed != header {
                return Err(Error::InvalidArgument(format!(
                    "line {line_no}: expected header '{header}', got '{trimmed}'"
                )));
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "line {line_no}: expected 3 fields, got {}",
                fields.len()
            )));
        }
        t.push(parse_f64(fields[0], line_no)?);
        a.push(parse_f64(fields[1], line_no)?);
        b.push(parse_f64(fields[2], line_no)?);
    }
    if !seen_header {
        return Err(Error::InvalidArgument(format!(
            "no '{header}' header row found"
        )));
    }
    Ok(TwoChannelTable { meta, t, a, b })
}

fn uniform_final_time(t: &[f64]) -> Result<f64> {
    if t.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two rows to define a time grid".into(),
        ));
    }
    let t_final = *t.last().unwrap();
    let dt = t_final / (t.len() - 1) as f64;
    for (j, &tj) in t.iter().enumerate() {
        if (tj - j as f64 * dt).abs() > 1e-9 * (1.0 + t_final.abs()) {
            return Err(Error::InvalidArgument(format!(
                "time column is not a uniform grid from 0: row {j} has t = {tj}"
            )));
        }
    }
    Ok(t_final)
}

fn meta_l_half(meta: &BTreeMap<String, String>) -> Result<f64> {
    let raw = meta
        .get("l_half")
        .ok_or_else(|| Error::InvalidArgument("missing '# l_half = …' metadata".into()))?;
    raw.parse::<f64>()
        .map_err(|_| Error::InvalidArgument(format!("cannot parse l_half value '{raw}'")))
}

/// Reads endpoint signals written by [`write_endpoint_signals`].
pub fn read_endpoint_signals(r: &mut dyn BufRead) -> Result<EndpointSignals> {
    let table = read_two_channel(r, "t,h1,h2")?;
    let t_final = uniform_final_time(&table.t)?;
    EndpointSignals::new(meta_l_half(&table.meta)?, t_final, table.a, table.b)
}

/// Reads endpoint densities written by [`write_endpoint_densities`].
pub fn read_endpoint_densities(r: &mut dyn BufRead) -> Result<EndpointDensities> {
    let table = read_two_channel(r, "t,q1,q2")?;
    let t_final = uniform_final_time(&table.t)?;
    EndpointDensities::from_arrays(meta_l_half(&table.meta)?, t_final, table.a, table.b)
}

fn schedule_metadata(s: &ControlSchedule) -> Vec<(&'static str, String)> {
    let m = &s.metadata;
    vec![
        ("domain", describe_domain(&s.domain)),
        ("t_final", format_f64(s.t_final)),
        ("target", m.target_description.clone()),
        ("grid_nx", m.grids.nx.to_string()),
        ("grid_ntheta", m.grids.ntheta.to_string()),
        ("grid_nt", m.grids.nt.to_string()),
        ("amplification", format_f64(m.amplification)),
        ("cutoff_tail_bound", format_f64(m.cutoff_tail_bound)),
        (
            "max_imaginary_residue",
            format_f64(m.max_imaginary_residue),
        ),
        ("final_step_mismatch", format_f64(m.final_step_mismatch)),
    ]
}

/// Initial state of a control schedule: `x…,g` over the interior grid,
/// with the full provenance block in the metadata.
pub fn write_schedule_initial(w: &mut dyn Write, s: &ControlSchedule) -> Result<()> {
    let d = s.domain.dimension();
    write_metadata(w, &schedule_metadata(s))?;
    let mut cols = coord_names("x", d);
    cols.push("g".to_string());
    write_header(w, &cols)?;
    for (x, &g) in s.interior_points.iter().zip(&s.initial) {
        let coords: Vec<String> = x.iter().copied().map(format_f64).collect();
        writeln!(w, "{},{}", coords.join(","), format_f64(g))?;
    }
    Ok(())
}

/// Boundary rows of a control schedule: `t,node…,h`, one row per
/// schedule time and boundary node, same metadata block as the initial
/// file.
pub fn write_schedule_boundary(w: &mut dyn Write, s: &ControlSchedule) -> Result<()> {
    let d = s.domain.dimension();
    write_metadata(w, &schedule_metadata(s))?;
    let mut cols = vec!["t".to_string()];
    cols.extend(coord_names("node", d));
    cols.push("h".to_string());
    write_header(w, &cols)?;
    for (row, &t) in s.times.iter().enumerate() {
        for (j, node) in s.boundary_nodes.iter().enumerate() {
            let coords: Vec<String> = node.iter().copied().map(format_f64).collect();
            writeln!(
                w,
                "{},{},{}",
                format_f64(t),
                coords.join(","),
                format_f64(s.control_at(row, j))
            )?;
        }
    }
    Ok(())
}

/// Two-column `t,error` profile (plot-ready: `plot 'file' using 1:2`).
pub fn write_error_profile(
    w: &mut dyn Write,
    rows: &[(f64, f64)],
    meta: &[(&str, String)],
) -> Result<()> {
    write_metadata(w, meta)?;
    write_header(w, &["t", "error"].map(String::from))?;
    for &(t, e) in rows {
        writeln!(w, "{},{}", format_f64(t), format_f64(e))?;
    }
    Ok(())
}

/// Single-row report with named columns (already-formatted values).
pub fn write_report_row(
    w: &mut dyn Write,
    cols: &[(&str, String)],
    meta: &[(&str, String)],
) -> Result<()> {
    write_metadata(w, meta)?;
    let names: Vec<String> = cols.iter().map(|(k, _)| k.to_string()).collect();
    write_header(w, &names)?;
    let values: Vec<String> = cols.iter().map(|(_, v)| v.clone()).collect();
    writeln!(w, "{}", values.join(","))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn doubles_round_trip_bitwise_through_text() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0c5f);
        for _ in 0..1000 {
            let x: f64 = (rng.gen::<f64>() - 0.5) * 10f64.powi(rng.gen_range(-300..300));
            let back: f64 = format_f64(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x:e} mangled");
        }
        for x in [0.0, -0.0, 0.1, 1.0 / 3.0, f64::MIN_POSITIVE] {
            let back: f64 = format_f64(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x:e} mangled");
        }
    }

    #[test]
    fn point_files_have_stable_layout() {
        let points = vec![
            ComplexPoint::scalar(0.25, -0.5),
            ComplexPoint::scalar(1.0, 0.0),
        ];
        let mut buf = Vec::new();
        write_points(&mut buf, &points, &[("kind", "egg-sample".to_string())]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# kind = egg-sample\n\
             x,y\n\
             2.5000000000000000e-1,-5.0000000000000000e-1\n\
             1.0000000000000000e0,0.0000000000000000e0\n"
        );
    }

    #[test]
    fn planar_points_get_numbered_columns() {
        let points = vec![ComplexPoint::new(vec![0.5, -0.25], vec![0.125, 0.0]).unwrap()];
        let mut buf = Vec::new();
        write_points(&mut buf, &points, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x1,x2,y1,y2\n"), "{text}");
        assert!(text.contains("5.0000000000000000e-1,-2.5000000000000000e-1"));
    }

    #[test]
    fn boundary_density_rows_cover_the_grid() {
        let grid = crate::layer::SpaceTimeGrid::new(
            DomainSpec::interval(-1.0, 1.0).unwrap(),
            0.5,
            3,
            0,
        )
        .unwrap();
        let q = BoundaryDensity::from_fn(&grid, |t, y| Complex64::new(t, y[0]));
        let mut buf = Vec::new();
        write_boundary_density(&mut buf, &q, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let data: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .collect();
        assert_eq!(data.len(), 3 * 2);
        // Slab 0 collocates at t = Δt/2 = 1/12; left endpoint −1.
        assert_eq!(
            data[0],
            "0,0,8.3333333333333329e-2,-1.0000000000000000e0"
        );
        assert!(text.contains("# nb = 2\n"));
    }

    #[test]
    fn field_sample_serializes_time_major() {
        let field = FieldSample {
            domain: DomainSpec::interval(0.0, 1.0).unwrap(),
            times: vec![0.0, 0.5],
            spatial_grid: vec![vec![0.0], vec![1.0]],
            values: vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(3.0, 0.0),
                Complex64::new(4.0, -1.0),
            ],
        };
        let mut buf = Vec::new();
        write_field_sample(&mut buf, &field, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let data: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .collect();
        assert_eq!(data[0], "t,x,re,im");
        assert_eq!(data.len(), 5);
        assert!(data[4].starts_with("5.0000000000000000e-1,1.0000000000000000e0,4.0"));
    }

    #[test]
    fn endpoint_signals_round_trip() {
        let s = EndpointSignals::from_fn(1.5, 2.0, 33, |t| (t * 1.7).sin(), |t| {
            t * t * (-t).exp()
        })
        .unwrap();
        let mut buf = Vec::new();
        write_endpoint_signals(&mut buf, &s, &[("note", "test".to_string())]).unwrap();
        let back = read_endpoint_signals(&mut buf.as_slice()).unwrap();
        assert_eq!(back.l_half(), 1.5);
        assert_eq!(back.t_final(), 2.0);
        assert_eq!(back.h1(), s.h1());
        assert_eq!(back.h2(), s.h2());
    }

    #[test]
    fn endpoint_densities_round_trip() {
        let q = EndpointDensities::from_arrays(
            0.5,
            1.0,
            (0..16).map(|j| (j as f64 * 0.3).cos()).collect(),
            (0..16).map(|j| j as f64 / 15.0).collect(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_endpoint_densities(&mut buf, &q, &[]).unwrap();
        let back = read_endpoint_densities(&mut buf.as_slice()).unwrap();
        assert_eq!(back.q1(), q.q1());
        assert_eq!(back.q2(), q.q2());
        assert_eq!(back.t_final(), 1.0);
    }

    #[test]
    fn readers_reject_malformed_tables() {
        // Wrong header.
        let bad = "# l_half = 1\nt,left,right\n0,0,0\n";
        assert!(read_endpoint_signals(&mut bad.as_bytes()).is_err());
        // Missing the half-length.
        let bad = "t,h1,h2\n0,0,0\n1,1,1\n";
        assert!(read_endpoint_signals(&mut bad.as_bytes()).is_err());
        // Non-uniform time column.
        let bad = "# l_half = 1\nt,h1,h2\n0,0,0\n0.4,1,1\n1.0,2,2\n";
        assert!(read_endpoint_signals(&mut bad.as_bytes()).is_err());
        // Unparseable number.
        let bad = "# l_half = 1\nt,h1,h2\n0,zero,0\n1,1,1\n";
        assert!(read_endpoint_signals(&mut bad.as_bytes()).is_err());
    }

    #[test]
    fn schedule_files_carry_the_provenance_block() {
        use crate::wick::{ScheduleMetadata, SynthesisGrids};
        let schedule = ControlSchedule {
            domain: DomainSpec::ball(vec![0.0], 1.0).unwrap(),
            t_final: 0.1,
            interior_points: vec![vec![-1.0], vec![0.0], vec![1.0]],
            initial: vec![0.8, -0.2, 0.8],
            boundary_nodes: vec![vec![-1.0], vec![1.0]],
            times: vec![0.0, 0.05, 0.1],
            boundary_values: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
            metadata: ScheduleMetadata {
                target_description: "test schedule".to_string(),
                grids: SynthesisGrids {
                    nx: 2,
                    ntheta: 0,
                    nt: 3,
                },
                amplification: 12.5,
                cutoff_tail_bound: 1e-8,
                max_imaginary_residue: 1e-12,
                final_step_mismatch: 0.01,
            },
        };
        let mut init = Vec::new();
        write_schedule_initial(&mut init, &schedule).unwrap();
        let text = String::from_utf8(init).unwrap();
        assert!(text.contains("# target = test schedule\n"));
        assert!(text.contains("# amplification = 1.2500000000000000e1\n"));
        assert!(text.contains("x,g\n"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);

        let mut bdry = Vec::new();
        write_schedule_boundary(&mut bdry, &schedule).unwrap();
        let text = String::from_utf8(bdry).unwrap();
        assert!(text.contains("t,node,h\n"));
        // Row for t = 0.05, right endpoint, value 0.4.
        assert!(text.contains(
            "5.0000000000000003e-2,1.0000000000000000e0,4.0000000000000002e-1"
        ));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 7);
    }

    #[test]
    fn error_profiles_are_two_column() {
        let mut buf = Vec::new();
        write_error_profile(
            &mut buf,
            &[(0.2, 0.4), (0.1, 0.2)],
            &[("target", "z^2".to_string())],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# target = z^2\n\
             t,error\n\
             2.0000000000000001e-1,4.0000000000000002e-1\n\
             1.0000000000000001e-1,2.0000000000000001e-1\n"
        );
    }

    #[test]
    fn report_rows_serialize_in_column_order() {
        let mut buf = Vec::new();
        write_report_row(
            &mut buf,
            &[
                ("winding", "1".to_string()),
                ("jump_abs", format_f64(std::f64::consts::PI.sqrt())),
            ],
            &[],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "winding,jump_abs\n1,1.7724538509055159e0\n");
    }
}

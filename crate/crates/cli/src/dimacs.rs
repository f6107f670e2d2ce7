//! DIMACS edge-format export with a vertex map sidecar.

use std::io::{self, Write};

use ringpoints::cliquegraph::DistanceGraph;

/// `p edge V E` followed by `e i j` lines, 1-based, `i < j`.
pub fn write_dimacs<W: Write>(g: &DistanceGraph, out: &mut W) -> io::Result<()> {
    writeln!(
        out,
        "c integral distance graph n={} m={} variant={}",
        g.modulus(),
        g.dim(),
        g.variant().name()
    )?;
    writeln!(out, "p edge {} {}", g.vertex_count(), g.edge_count())?;
    for (i, j) in g.edges() {
        writeln!(out, "e {} {}", i + 1, j + 1)?;
    }
    Ok(())
}

/// One line per vertex: 1-based index, then the point coordinates.
pub fn write_vertex_map<W: Write>(g: &DistanceGraph, out: &mut W) -> io::Result<()> {
    writeln!(out, "# vertex\tpoint (n={}, m={})", g.modulus(), g.dim())?;
    for (v, &label) in g.labels().iter().enumerate() {
        let coords = match g.point(label) {
            Some(p) => p.coords().iter().map(u32::to_string).collect::<Vec<_>>().join(" "),
            None => format!("label {label}"),
        };
        writeln!(out, "{}\t{}", v + 1, coords)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_on_four_points() {
        let g = ringpoints::cliquegraph::build_full(2, 2).unwrap();
        let mut buf = Vec::new();
        write_dimacs(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().any(|l| l == "p edge 4 6"));
        assert!(text.lines().any(|l| l == "e 1 2"));
        assert_eq!(text.lines().filter(|l| l.starts_with("e ")).count(), 6);

        let mut buf = Vec::new();
        write_vertex_map(&g, &mut buf).unwrap();
        let map = String::from_utf8(buf).unwrap();
        assert_eq!(map.lines().filter(|l| !l.starts_with('#')).count(), 4);
    }
}

//! Static SVG overlay of a field on its mesh.

use std::fmt::Write;

use steklov::critical::{
    nodal_polylines, BoundarySignData, Classification, CriticalPoint, SetComponentKind,
};
use steklov::identity::FieldAnalysis;
use steklov::mesh::SurfaceMesh;
use steklov::Result;

const WIDTH: f64 = 640.0;
const PAD: f64 = 16.0;

struct Frame {
    min: [f64; 2],
    scale: f64,
    height: f64,
}

impl Frame {
    fn new(mesh: &SurfaceMesh) -> Frame {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for v in mesh.vertices() {
            for i in 0..2 {
                min[i] = min[i].min(v[i]);
                max[i] = max[i].max(v[i]);
            }
        }
        let span = (max[0] - min[0]).max(1e-12);
        let scale = (WIDTH - 2.0 * PAD) / span;
        let height = (max[1] - min[1]) * scale + 2.0 * PAD;
        Frame {
            min: [min[0], max[1]],
            scale,
            height,
        }
    }

    /// Screen coordinates, with `y` pointing up in the mesh.
    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (
            PAD + (p[0] - self.min[0]) * self.scale,
            PAD + (self.min[1] - p[1]) * self.scale,
        )
    }

    fn pt(&self, p: [f64; 2]) -> String {
        let (x, y) = self.map(p);
        format!("{x:.3},{y:.3}")
    }
}

fn boundary_path(mesh: &SurfaceMesh, f: &Frame) -> String {
    let verts = mesh.vertices();
    let mut d = String::new();
    for comp in mesh.boundary_components() {
        for e in &comp.edges {
            let _ = write!(d, "M{} L{} ", f.pt(verts[e.from_vertex]), f.pt(verts[e.to_vertex]));
        }
    }
    d
}

fn negative_set_path(mesh: &SurfaceMesh, sign: &BoundarySignData, f: &Frame) -> String {
    let verts = mesh.vertices();
    let mut d = String::new();
    for set in &sign.components {
        let comp = &mesh.boundary_components()[set.component];
        let n = comp.nodes.len();
        let count = match set.kind {
            SetComponentKind::Loop => n,
            SetComponentKind::Arc => set.nodes.len() - 1,
        };
        let Some(start) = comp.nodes.iter().position(|&v| v == set.nodes[0]) else {
            continue;
        };
        if count == 0 {
            let (x, y) = f.map(mesh.node_position(set.nodes[0]));
            let _ = write!(d, "M{:.3},{y:.3} L{:.3},{y:.3} ", x - 0.5, x + 0.5);
        }
        for i in 0..count {
            let e = comp.edges[(start + i) % n];
            let _ = write!(d, "M{} L{} ", f.pt(verts[e.from_vertex]), f.pt(verts[e.to_vertex]));
        }
    }
    d
}

fn marker(out: &mut String, f: &Frame, p: &CriticalPoint, boundary: bool) {
    let (x, y) = f.map(p.position);
    let color = match p.classification {
        Classification::Minimum => "#1f77b4",
        Classification::Maximum => "#d62728",
        Classification::Saddle => "#2ca02c",
        Classification::Degenerate => "#000000",
    };
    let title = format!("node {} index {} value {:.6e}", p.node, p.index, p.value);
    if boundary {
        let _ = writeln!(
            out,
            r#"<rect x="{:.3}" y="{:.3}" width="7" height="7" fill="{color}"><title>{title}</title></rect>"#,
            x - 3.5,
            y - 3.5
        );
    } else {
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="4.5" fill="{color}"><title>{title}</title></circle>"#
        );
    }
}

/// Outline, nodal lines, the boundary set where the field is negative, trace
/// extrema (squares) and interior critical vertices (circles).
pub fn render(mesh: &SurfaceMesh, u: &[f64], analysis: &FieldAnalysis) -> Result<String> {
    let f = Frame::new(mesh);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{:.3}" viewBox="0 0 {WIDTH} {:.3}">"#,
        f.height, f.height
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r##"<path id="outline" d="{}" stroke="#555" stroke-width="1" fill="none"/>"##,
        boundary_path(mesh, &f)
    );
    let _ = writeln!(
        out,
        r##"<path id="negative-set" d="{}" stroke="#9467bd" stroke-width="4" stroke-linecap="round" fill="none"/>"##,
        negative_set_path(mesh, &analysis.negative, &f)
    );
    let _ = writeln!(out, r##"<g id="nodal" stroke="#ff7f0e" stroke-width="1.5" fill="none">"##);
    for line in nodal_polylines(mesh, u, analysis.zero_tol)? {
        let pts: Vec<String> = line.points.iter().map(|&p| f.pt(p)).collect();
        let tag = if line.closed { "polygon" } else { "polyline" };
        let _ = writeln!(out, r#"<{tag} points="{}"/>"#, pts.join(" "));
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g id="trace-extrema">"#);
    for p in &analysis.extrema.points {
        marker(&mut out, &f, p, true);
    }
    for p in &analysis.singular_zeros {
        marker(&mut out, &f, p, true);
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g id="interior-critical">"#);
    for p in &analysis.interior {
        marker(&mut out, &f, p, false);
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    Ok(out)
}

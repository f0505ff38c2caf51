//! Zero level set of a PL field as segments and chained polylines.

use std::collections::HashMap;

use serde::Serialize;

use super::sup_norm;
use crate::error::Result;
use crate::mesh::SurfaceMesh;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

/// Endpoint identity: a mesh vertex or a point on a raw edge. Raw vertex ids are
/// used so that points on a periodic seam keep their own coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Key {
    Vertex(usize),
    Edge(usize, usize),
}

fn raw_segments(mesh: &SurfaceMesh, u: &[f64], zero_tol: f64) -> Vec<([Key; 2], [[f64; 2]; 2])> {
    let tol = zero_tol * sup_norm(u.iter().copied());
    let verts = mesh.vertices();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for tri in mesh.triangles() {
        let val: Vec<f64> = tri
            .iter()
            .map(|&v| {
                let x = u[mesh.node_of(v)];
                if x.abs() <= tol { 0.0 } else { x }
            })
            .collect();
        let mut pts: Vec<(Key, [f64; 2])> = Vec::new();
        for a in 0..3 {
            if val[a] == 0.0 {
                pts.push((Key::Vertex(tri[a]), verts[tri[a]]));
            }
        }
        for a in 0..3 {
            let b = (a + 1) % 3;
            if val[a] * val[b] < 0.0 {
                let t = val[a] / (val[a] - val[b]);
                let (p, q) = (verts[tri[a]], verts[tri[b]]);
                let key = Key::Edge(tri[a].min(tri[b]), tri[a].max(tri[b]));
                pts.push((key, [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]));
            }
        }
        if pts.len() != 2 {
            continue;
        }
        let mut keys = [pts[0].0, pts[1].0];
        keys.sort();
        // an edge lying in the zero set is produced by both of its triangles
        if seen.insert(keys) {
            out.push(([pts[0].0, pts[1].0], [pts[0].1, pts[1].1]));
        }
    }
    out
}

/// Segments of the zero set of the PL interpolant of `u`, one per crossed
/// triangle, in triangle order. Values within `zero_tol · max|u|` count as zero.
pub fn nodal_segments(mesh: &SurfaceMesh, u: &[f64], zero_tol: f64) -> Result<Vec<[[f64; 2]; 2]>> {
    mesh.check_field(u, "field values")?;
    Ok(raw_segments(mesh, u, zero_tol).into_iter().map(|s| s.1).collect())
}

/// Segments chained into maximal polylines. Open chains come first, started
/// from their earliest free end; remaining cycles are closed polylines.
pub fn nodal_polylines(mesh: &SurfaceMesh, u: &[f64], zero_tol: f64) -> Result<Vec<Polyline>> {
    mesh.check_field(u, "field values")?;
    let segs = raw_segments(mesh, u, zero_tol);
    let mut incident: HashMap<Key, Vec<usize>> = HashMap::new();
    let mut position: HashMap<Key, [f64; 2]> = HashMap::new();
    for (i, (keys, pts)) in segs.iter().enumerate() {
        for e in 0..2 {
            incident.entry(keys[e]).or_default().push(i);
            position.insert(keys[e], pts[e]);
        }
    }
    let mut used = vec![false; segs.len()];
    let mut out = Vec::new();

    let walk = |start_seg: usize, start_key: Key, used: &mut Vec<bool>| -> Polyline {
        let mut points = vec![position[&start_key]];
        let mut key = start_key;
        let mut seg = start_seg;
        loop {
            used[seg] = true;
            let keys = segs[seg].0;
            key = if keys[0] == key { keys[1] } else { keys[0] };
            points.push(position[&key]);
            match incident[&key].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => break,
            }
        }
        let closed = key == start_key && points.len() > 2;
        if closed {
            points.pop();
        }
        Polyline { points, closed }
    };

    for pass in 0..2 {
        for i in 0..segs.len() {
            if used[i] {
                continue;
            }
            for e in 0..2 {
                let key = segs[i].0[e];
                let free_end = incident[&key].len() == 1;
                if (pass == 0 && free_end) || pass == 1 {
                    if !used[i] {
                        out.push(walk(i, key, &mut used));
                    }
                    break;
                }
            }
        }
    }
    Ok(out)
}

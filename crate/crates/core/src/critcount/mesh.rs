//! Icosahedral geodesic grid on the unit sphere.

use std::collections::HashMap;

use crate::fieldsim::normalize;

#[derive(Debug, Clone)]
pub struct IcoSphere {
    pub depth: u32,
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

/// Subdivides the icosahedron `depth` times, projecting midpoints onto the sphere.
pub fn icosphere(depth: u32) -> IcoSphere {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<[f64; 3]> = [
        [-1.0, g, 0.0],
        [1.0, g, 0.0],
        [-1.0, -g, 0.0],
        [1.0, -g, 0.0],
        [0.0, -1.0, g],
        [0.0, 1.0, g],
        [0.0, -1.0, -g],
        [0.0, 1.0, -g],
        [g, 0.0, -1.0],
        [g, 0.0, 1.0],
        [-g, 0.0, -1.0],
        [-g, 0.0, 1.0],
    ]
    .into_iter()
    .map(normalize)
    .collect();
    let mut triangles: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..depth {
        let mut mid: HashMap<(u32, u32), u32> = HashMap::with_capacity(triangles.len() * 2);
        let mut midpoint = |a: u32, b: u32, vs: &mut Vec<[f64; 3]>| -> u32 {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let (p, q) = (vs[a as usize], vs[b as usize]);
                vs.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                (vs.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for &[a, b, c] in &triangles {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        triangles = next;
    }
    IcoSphere { depth, vertices, triangles }
}

pub(crate) fn angle(p: [f64; 3], q: [f64; 3]) -> f64 {
    // atan2 form is accurate for tiny angles
    let c = [p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0]];
    let s = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    s.atan2(p[0] * q[0] + p[1] * q[1] + p[2] * q[2])
}

impl IcoSphere {
    /// Largest edge length (angle on the unit sphere).
    pub fn max_edge(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| {
                let v = |i: usize| self.vertices[t[i] as usize];
                [angle(v(0), v(1)), angle(v(1), v(2)), angle(v(2), v(0))]
            })
            .fold(0.0, f64::max)
    }
}

/// Smallest depth whose largest cell edge is below a third of the correlation
/// length `1/sqrt(l_max(l_max+1))` of a band-limited field.
pub fn default_depth(lmax: u32) -> u32 {
    let l = lmax.max(1) as f64;
    let bound = 1.0 / (3.0 * (l * (l + 1.0)).sqrt());
    (0..9).find(|&d| icosphere(d).max_edge() < bound).unwrap_or(9)
}

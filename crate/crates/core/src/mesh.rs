//! Parameter-sphere sampling, triangle mesh assembly, and OBJ/PLY export.
//!
//! The sphere is covered by two chart disks sampled on square grids pushed
//! onto the disk by the radial square-to-disk map; the two boundary rings
//! meet on the seam circle and are welded. Vertices carry the surface
//! position, the left normal, and `|H|` as a quality scalar.

use crate::surface::{Chart, ChartPoint, SurfaceMap};
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::io::Write;

type C = Complex64;

/// Sample grid over one chart disk: `(res+1)^2` nodes of the square
/// `[-1, 1]^2` mapped radially onto the disk.
#[derive(Debug, Clone)]
pub struct ChartGrid {
    pub chart: Chart,
    pub res: usize,
    pub points: Vec<C>,
}

/// The radial square-to-disk map: boundary square -> unit circle.
fn square_to_disk(u: f64, v: f64) -> C {
    let linf = u.abs().max(v.abs());
    let l2 = (u * u + v * v).sqrt();
    if l2 < 1e-300 {
        return C::new(0.0, 0.0);
    }
    C::new(u, v) * (linf / l2)
}

/// Two matched `res x res` cell grids over the chart disks. `res >= 8`; the
/// boundary rings (4 res points each) land on the seam circle with matching
/// angles under `w = 1/z`.
pub fn sample_cp1(res: usize) -> Result<[ChartGrid; 2]> {
    if res < 8 {
        return Err(Error::Validation("sampling resolution must be at least 8".into()));
    }
    let grid = |chart: Chart| -> ChartGrid {
        let mut points = Vec::with_capacity((res + 1) * (res + 1));
        for j in 0..=res {
            for i in 0..=res {
                let u = -1.0 + 2.0 * i as f64 / res as f64;
                let v = -1.0 + 2.0 * j as f64 / res as f64;
                points.push(square_to_disk(u, v));
            }
        }
        ChartGrid { chart, res, points }
    };
    Ok([grid(Chart::Z), grid(Chart::W)])
}

/// Indexed triangle mesh with per-vertex normals and `|H|`.
#[derive(Debug, Clone, Default)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub normals: Vec<[f64; 3]>,
    pub quality: Vec<f64>,
    pub triangles: Vec<[u32; 3]>,
}

impl Mesh {
    pub fn bounding_radius(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
            .fold(0.0, f64::max)
    }

    fn triangle_area(&self, t: &[u32; 3]) -> f64 {
        let a = self.vertices[t[0] as usize];
        let b = self.vertices[t[1] as usize];
        let c = self.vertices[t[2] as usize];
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let cx = u[1] * v[2] - u[2] * v[1];
        let cy = u[2] * v[0] - u[0] * v[2];
        let cz = u[0] * v[1] - u[1] * v[0];
        0.5 * (cx * cx + cy * cy + cz * cz).sqrt()
    }
}

fn imag_to_r3(q: crate::quat::Quaternion) -> [f64; 3] {
    [q.im_i, q.im_j, q.im_k]
}

/// Evaluates the surface over both chart grids and assembles a watertight
/// triangle mesh (seam vertices welded, `w`-chart triangles flipped to keep
/// a consistent orientation). Values are taken from the imaginary part; the
/// real part of an `Im H` family vanishes and a nonzero real part is the
/// caller's responsibility to have checked.
pub fn build_mesh(map: &SurfaceMap, res: usize) -> Result<Mesh> {
    let grids = sample_cp1(res)?;
    let n_nodes = (res + 1) * (res + 1);

    // evaluate every node, keeping chart centers off the exact origin
    let eval_node = |chart: Chart, p: C| -> ([f64; 3], [f64; 3], f64) {
        let p_safe = if p.norm() < 1e-9 { C::new(1e-9, 1e-9) } else { p };
        let pt = ChartPoint { chart, p: p_safe };
        let f = map.eval(pt);
        let (n, h) = match map.frame(pt) {
            Ok(fr) => (fr.n, fr.h.norm()),
            Err(_) => {
                // branch point: extend the normal by nearby samples
                let mut acc = crate::quat::Quaternion::default();
                let mut hacc = 0.0;
                let mut cnt = 0.0;
                for k in 0..4 {
                    let t = std::f64::consts::FRAC_PI_2 * k as f64 + 0.4;
                    let q = p_safe + C::from_polar(5e-3, t);
                    if let Ok(fr) = map.frame(ChartPoint { chart, p: q }) {
                        acc = acc + fr.n;
                        hacc += fr.h.norm();
                        cnt += 1.0;
                    }
                }
                if cnt > 0.0 {
                    (acc / cnt, hacc / cnt)
                } else {
                    (crate::quat::Quaternion::default(), 0.0)
                }
            }
        };
        let mut nv = imag_to_r3(n);
        let nn = (nv[0] * nv[0] + nv[1] * nv[1] + nv[2] * nv[2]).sqrt();
        if nn > 1e-12 {
            nv = [nv[0] / nn, nv[1] / nn, nv[2] / nn];
        }
        (imag_to_r3(f), nv, h)
    };

    let mut node_data: Vec<([f64; 3], [f64; 3], f64)> = Vec::with_capacity(2 * n_nodes);
    for grid in &grids {
        let chunk: Vec<_> = grid
            .points
            .par_iter()
            .map(|p| eval_node(grid.chart, *p))
            .collect();
        node_data.extend(chunk);
    }

    // global vertex indices with seam welding: boundary nodes of the W grid
    // adopt the index of the matching Z boundary node (angle negated)
    let mut mesh = Mesh::default();
    let mut index_of: Vec<u32> = vec![u32::MAX; 2 * n_nodes];
    let is_boundary = |i: usize, j: usize| i == 0 || j == 0 || i == res || j == res;

    // first pass: Z chart, all nodes become vertices
    for j in 0..=res {
        for i in 0..=res {
            let node = j * (res + 1) + i;
            let (v, n, h) = node_data[node];
            index_of[node] = mesh.vertices.len() as u32;
            mesh.vertices.push(v);
            mesh.normals.push(n);
            mesh.quality.push(h);
        }
    }
    // boundary lookup for the Z grid: the seam point of a W boundary node w
    // is exactly conj(w) in the Z chart (z = 1/w on the unit circle), and the
    // square-to-disk map commutes with conjugation bit-exactly.
    let seam_key = |p: C| -> (u64, u64) {
        let norm = |x: f64| if x == 0.0 { 0.0f64 } else { x };
        (norm(p.re).to_bits(), norm(p.im).to_bits())
    };
    let mut seam: std::collections::HashMap<(u64, u64), u32> = std::collections::HashMap::new();
    for j in 0..=res {
        for i in 0..=res {
            if is_boundary(i, j) {
                let node = j * (res + 1) + i;
                seam.insert(seam_key(grids[0].points[node]), index_of[node]);
            }
        }
    }

    // second pass: W chart; weld boundary nodes to the Z ring
    for j in 0..=res {
        for i in 0..=res {
            let node = j * (res + 1) + i;
            let global = n_nodes + node;
            if is_boundary(i, j) {
                let p = grids[1].points[node];
                if let Some(idx) = seam.get(&seam_key(p.conj())) {
                    index_of[global] = *idx;
                    continue;
                }
            }
            let (v, n, h) = node_data[global];
            index_of[global] = mesh.vertices.len() as u32;
            mesh.vertices.push(v);
            mesh.normals.push(n);
            mesh.quality.push(h);
        }
    }

    // triangles: two per cell; W-chart cells flipped for orientation
    let push_cell = |mesh: &mut Mesh, a: u32, b: u32, c: u32, d: u32, flip: bool| {
        let tris = if flip {
            [[a, c, b], [b, c, d]]
        } else {
            [[a, b, c], [b, d, c]]
        };
        let scale = mesh.bounding_radius().max(1e-12);
        for t in tris {
            if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
                let area = mesh.triangle_area(&t);
                if area > 1e-12 * scale * scale {
                    mesh.triangles.push(t);
                }
            }
        }
    };
    for (gi, grid) in grids.iter().enumerate() {
        let offset = gi * n_nodes;
        let flip = grid.chart == Chart::W;
        for j in 0..res {
            for i in 0..res {
                let a = index_of[offset + j * (res + 1) + i];
                let b = index_of[offset + j * (res + 1) + i + 1];
                let c = index_of[offset + (j + 1) * (res + 1) + i];
                let d = index_of[offset + (j + 1) * (res + 1) + i + 1];
                push_cell(&mut mesh, a, b, c, d, flip);
            }
        }
    }
    Ok(mesh)
}

/// Supported export formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    PlyBinary,
}

/// Writes the mesh: OBJ as `v`/`vn`/`f i//i` lines, PLY as binary little
/// endian with float32 positions, normals, and a `quality` scalar.
pub fn export<W: Write>(mesh: &Mesh, format: MeshFormat, out: &mut W) -> Result<()> {
    match format {
        MeshFormat::Obj => {
            for v in &mesh.vertices {
                writeln!(out, "v {:.9} {:.9} {:.9}", v[0], v[1], v[2])?;
            }
            for n in &mesh.normals {
                writeln!(out, "vn {:.9} {:.9} {:.9}", n[0], n[1], n[2])?;
            }
            for t in &mesh.triangles {
                writeln!(
                    out,
                    "f {}//{} {}//{} {}//{}",
                    t[0] + 1,
                    t[0] + 1,
                    t[1] + 1,
                    t[1] + 1,
                    t[2] + 1,
                    t[2] + 1
                )?;
            }
        }
        MeshFormat::PlyBinary => {
            write!(
                out,
                "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nproperty float nx\nproperty float ny\nproperty float nz\nproperty float quality\nelement face {}\nproperty list uchar uint vertex_indices\nend_header\n",
                mesh.vertices.len(),
                mesh.triangles.len()
            )?;
            for k in 0..mesh.vertices.len() {
                let v = mesh.vertices[k];
                let n = mesh.normals[k];
                let q = mesh.quality[k];
                for x in [v[0], v[1], v[2], n[0], n[1], n[2], q] {
                    out.write_all(&(x as f32).to_le_bytes())?;
                }
            }
            for t in &mesh.triangles {
                out.write_all(&[3u8])?;
                for idx in t {
                    out.write_all(&idx.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

/// Reads back a PLY written by [`export`]; used by the round-trip check.
pub fn import_ply(bytes: &[u8]) -> Result<Mesh> {
    let header_end = bytes
        .windows(11)
        .position(|w| w == b"end_header\n")
        .ok_or_else(|| Error::Validation("ply: missing end_header".into()))?
        + 11;
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| Error::Validation("ply: bad header".into()))?;
    let mut n_vert = 0usize;
    let mut n_face = 0usize;
    for line in header.lines() {
        if let Some(rest) = line.strip_prefix("element vertex ") {
            n_vert = rest.trim().parse().map_err(|_| Error::Validation("ply: bad vertex count".into()))?;
        }
        if let Some(rest) = line.strip_prefix("element face ") {
            n_face = rest.trim().parse().map_err(|_| Error::Validation("ply: bad face count".into()))?;
        }
    }
    let mut mesh = Mesh::default();
    let mut pos = header_end;
    let f32_at = |pos: &mut usize| -> Result<f32> {
        if *pos + 4 > bytes.len() {
            return Err(Error::Validation("ply: truncated".into()));
        }
        let v = f32::from_le_bytes(bytes[*pos..*pos + 4].try_into().unwrap());
        *pos += 4;
        Ok(v)
    };
    for _ in 0..n_vert {
        let x = f32_at(&mut pos)?;
        let y = f32_at(&mut pos)?;
        let z = f32_at(&mut pos)?;
        let nx = f32_at(&mut pos)?;
        let ny = f32_at(&mut pos)?;
        let nz = f32_at(&mut pos)?;
        let q = f32_at(&mut pos)?;
        mesh.vertices.push([x as f64, y as f64, z as f64]);
        mesh.normals.push([nx as f64, ny as f64, nz as f64]);
        mesh.quality.push(q as f64);
    }
    for _ in 0..n_face {
        if pos >= bytes.len() || bytes[pos] != 3 {
            return Err(Error::Validation("ply: non-triangle face".into()));
        }
        pos += 1;
        let mut idx = [0u32; 3];
        for slot in &mut idx {
            if pos + 4 > bytes.len() {
                return Err(Error::Validation("ply: truncated".into()));
            }
            *slot = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap());
            pos += 4;
        }
        mesh.triangles.push(idx);
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::round_sphere;

    #[test]
    fn grid_counts() {
        let grids = sample_cp1(8).unwrap();
        assert_eq!(grids[0].points.len(), 81);
        // 2 charts x 8 x 8 cells = 128 cells; boundary ring of 4*8 = 32 nodes
        let boundary = grids[0]
            .points
            .iter()
            .filter(|p| (p.norm() - 1.0).abs() < 1e-12)
            .count();
        assert_eq!(boundary, 32);
        assert!(sample_cp1(4).is_err());
    }

    #[test]
    fn round_sphere_mesh_is_welded_and_on_sphere() {
        let s = round_sphere();
        let mesh = build_mesh(&s, 8).unwrap();
        // vertex count: 2 * 81 nodes - 32 welded seam duplicates
        assert_eq!(mesh.vertices.len(), 2 * 81 - 32);
        assert_eq!(mesh.triangles.len(), 2 * 8 * 8 * 2);
        for v in &mesh.vertices {
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!((r - 1.0).abs() < 1e-6, "vertex off the unit sphere: {r}");
        }
        // no degenerate triangles
        for t in &mesh.triangles {
            assert!(mesh.triangle_area(t) > 1e-12);
        }
    }

    #[test]
    fn obj_export_deterministic() {
        let s = round_sphere();
        let mesh = build_mesh(&s, 8).unwrap();
        let mut a = Vec::new();
        export(&mesh, MeshFormat::Obj, &mut a).unwrap();
        let mesh2 = build_mesh(&s, 8).unwrap();
        let mut b = Vec::new();
        export(&mesh2, MeshFormat::Obj, &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("v "));
        assert!(text.contains("\nvn "));
        assert!(text.contains("\nf "));
        // 1-indexed faces within range
        for line in text.lines().filter(|l| l.starts_with("f ")) {
            for part in line[2..].split_whitespace() {
                let idx: usize = part.split("//").next().unwrap().parse().unwrap();
                assert!(idx >= 1 && idx <= mesh.vertices.len());
            }
        }
    }

    #[test]
    fn ply_roundtrip_bit_exact() {
        let s = round_sphere();
        let mesh = build_mesh(&s, 8).unwrap();
        let mut buf = Vec::new();
        export(&mesh, MeshFormat::PlyBinary, &mut buf).unwrap();
        let back = import_ply(&buf).unwrap();
        assert_eq!(back.vertices.len(), mesh.vertices.len());
        assert_eq!(back.triangles, mesh.triangles);
        // float32 quantization is the exact representation in the file:
        // re-export must be byte-identical
        let mut buf2 = Vec::new();
        export(&back, MeshFormat::PlyBinary, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }
}

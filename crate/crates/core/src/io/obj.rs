//! Wavefront OBJ text for blocks and dual meshes.

use std::fmt::Write;

use crate::flexion::Block3D;
use crate::io::json::format_float;
use crate::reciprocal::ReciprocalMesh;
use crate::sphkin::Vec3;

/// Fan triangulation from the lowest-index vertex, keeping the cyclic order.
pub fn triangulate(face: &[usize]) -> Vec<[usize; 3]> {
    let start = (0..face.len()).min_by_key(|&k| face[k]).unwrap_or(0);
    let ring: Vec<usize> = (0..face.len())
        .map(|k| face[(start + k) % face.len()])
        .collect();
    (1..ring.len().saturating_sub(1))
        .map(|k| [ring[0], ring[k], ring[k + 1]])
        .collect()
}

fn write_mesh(header: &str, points: &[Vec3], faces: &[(String, Vec<usize>)]) -> String {
    let mut out = String::new();
    writeln!(out, "# {header}").unwrap();
    for p in points {
        writeln!(
            out,
            "v {} {} {}",
            format_float(p.x),
            format_float(p.y),
            format_float(p.z)
        )
        .unwrap();
    }
    for (name, face) in faces {
        writeln!(out, "g {name}").unwrap();
        for [a, b, c] in triangulate(face) {
            writeln!(out, "f {} {} {}", a + 1, b + 1, c + 1).unwrap();
        }
    }
    out
}

pub fn block_obj(block: &Block3D, header: &str) -> String {
    let faces: Vec<(String, Vec<usize>)> = block
        .faces
        .iter()
        .map(|f| {
            let name = match f.kind {
                crate::flexion::FaceKind::Central => "central".to_string(),
                crate::flexion::FaceKind::Side(i) => format!("side_{i}"),
                crate::flexion::FaceKind::Corner(i) => format!("corner_{i}"),
            };
            (name, f.vertices.clone())
        })
        .collect();
    write_mesh(header, &block.points, &faces)
}

pub fn dual_obj(mesh: &ReciprocalMesh, block: &Block3D, header: &str) -> String {
    let faces: Vec<(String, Vec<usize>)> = mesh
        .faces(block)
        .into_iter()
        .enumerate()
        .map(|(i, f)| (format!("star_{i}"), f))
        .collect();
    write_mesh(header, &mesh.points, &faces)
}

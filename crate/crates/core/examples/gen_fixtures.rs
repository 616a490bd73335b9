//! Writes the ideal-geometry PDB entries under `tests/data`.

use std::path::Path;

use densitrace::mapio::{ideal_pdb, SegmentSpec};
use densitrace::MotifClass;

fn jittered(class: MotifClass, len: usize, phi: f64, psi: f64, seed: f64) -> SegmentSpec {
    let torsions = (0..len)
        .map(|i| {
            let t = seed + i as f64;
            (phi + 4.0 * (1.3 * t).sin(), psi + 4.0 * (0.7 * t).cos())
        })
        .collect();
    SegmentSpec { class, torsions }
}

fn helix(len: usize, seed: f64) -> SegmentSpec {
    jittered(MotifClass::Helix, len, -57.8, -47.0, seed)
}

fn strand(len: usize, seed: f64) -> SegmentSpec {
    jittered(MotifClass::Strand, len, -120.0, 130.0, seed)
}

fn coil(len: usize, seed: f64) -> SegmentSpec {
    let table = [(-75.0, 145.0), (-90.0, 0.0), (-65.0, 140.0), (60.0, 40.0), (-100.0, 120.0), (-70.0, -20.0)];
    let start = seed as usize;
    SegmentSpec::coil((0..len).map(|i| table[(start + i) % table.len()]).collect())
}

fn main() {
    let t = SegmentSpec::turn;
    let entries: Vec<(&str, char, Vec<SegmentSpec>)> = vec![
        ("train_1", 'A', vec![coil(3, 0.0), helix(14, 1.0), t(), strand(7, 2.0), coil(3, 1.0), helix(10, 3.0), coil(3, 2.0)]),
        ("train_2", 'A', vec![coil(2, 3.0), strand(8, 4.0), t(), strand(8, 5.0), coil(4, 4.0), helix(12, 6.0), coil(2, 5.0)]),
        ("train_3", 'B', vec![coil(4, 1.0), helix(18, 7.0), coil(3, 0.0), t(), helix(9, 8.0), coil(3, 3.0)]),
        ("train_4", 'A', vec![coil(3, 2.0), strand(6, 9.0), t(), strand(6, 10.0), t(), strand(7, 11.0), coil(3, 4.0)]),
        ("train_5", 'C', vec![coil(2, 5.0), helix(11, 12.0), coil(4, 2.0), strand(7, 13.0), t(), helix(13, 14.0), coil(2, 0.0)]),
        ("test_1", 'A', vec![coil(3, 3.0), helix(16, 15.0), t(), helix(12, 16.0), coil(3, 1.0)]),
        ("test_2", 'A', vec![coil(3, 4.0), strand(8, 17.0), t(), strand(8, 18.0), coil(3, 2.0), helix(10, 19.0), coil(2, 3.0)]),
    ];
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    std::fs::create_dir_all(&dir).expect("create fixture directory");
    for (name, chain, segments) in entries {
        let path = dir.join(format!("{name}.pdb"));
        std::fs::write(&path, ideal_pdb(chain, &segments)).expect("write fixture");
        println!("{}", path.display());
    }
}

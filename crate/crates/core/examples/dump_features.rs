// Scratch probe: dump per-scene features and pair metadata for offline
// analysis of the learnability ceiling.

use std::io::Write;

use tidytable_core::datagen::load_dataset;
use tidytable_core::raster::rasterize;
use tidytable_core::scorer::geometric_features;

fn main() {
    let dir = std::env::args().nth(1).expect("dataset dir");
    let out = std::env::args().nth(2).expect("out prefix");
    let dataset = load_dataset(std::path::Path::new(&dir)).unwrap();

    let mut feats = std::io::BufWriter::new(std::fs::File::create(format!("{out}_feats.csv")).unwrap());
    for (id, scene) in &dataset.scenes {
        let f = geometric_features(&rasterize(scene).unwrap());
        let d = tidytable_core::oracle::disorder(scene);
        let row: Vec<String> = f.iter().map(|v| format!("{v}")).collect();
        writeln!(
            feats,
            "{id},{},{},{},{}",
            d.alignment,
            d.spread_excess,
            d.intergroup_overlap,
            row.join(",")
        )
        .unwrap();
    }
    // Scene geometry for oracle-variant experiments.
    let mut geo = std::io::BufWriter::new(std::fs::File::create(format!("{out}_geo.jsonl")).unwrap());
    for (id, scene) in &dataset.scenes {
        let objs: Vec<String> = scene
            .placements()
            .iter()
            .map(|p| {
                format!(
                    "[\"{}\",\"{}\",{},{},{},{}]",
                    p.object.id, p.object.category, p.object.width, p.object.depth, p.x, p.y
                )
            })
            .collect();
        writeln!(geo, "{{\"id\":\"{id}\",\"objs\":[{}]}}", objs.join(",")).unwrap();
    }
    let mut pairs = std::io::BufWriter::new(std::fs::File::create(format!("{out}_pairs.csv")).unwrap());
    for p in &dataset.pairs {
        writeln!(
            pairs,
            "{},{},{:?},{},{},{}",
            p.tidier, p.messier, p.provenance, p.trajectory, p.t_tidier, p.t_messier
        )
        .unwrap();
    }
}

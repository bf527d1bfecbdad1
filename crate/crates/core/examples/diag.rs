use std::sync::Arc;
use submap_frontier::frontier::{DetectorConfig, IncrementalDetector};
use submap_frontier::geometry::{Point2, RigidTransform2};
use submap_frontier::grid::Submap;
use submap_frontier::harness::room_scenario;
use submap_frontier::oracle::{assemble_global_map, compare, naive_global_frontier};

fn main() {
    let scenario = room_scenario(0).unwrap();
    let events = scenario.events().unwrap();
    let mut det = IncrementalDetector::new(DetectorConfig::default());
    for (i, event) in events.iter().enumerate() {
        det.handle_event(event).unwrap();
        if i == 13 {
            break;
        }
    }
    let pairs: Vec<(Arc<Submap>, RigidTransform2)> = det
        .known_submaps()
        .map(|(id, s)| (s.clone(), *det.current_poses().pose(id).unwrap()))
        .collect();
    println!("submaps: {}", pairs.len());
    for (s, pose) in &pairs {
        println!("  submap {} finished={} pose={:?} dims={:?} offset={:?}",
            s.id(), s.is_finished(), pose.translation(), s.dimensions(), s.offset());
    }
    let grid = assemble_global_map(&pairs);
    let oracle_points = naive_global_frontier(&grid);
    let report = compare(&det.frontier_points_vec(), &oracle_points, &grid);
    println!("detector={} oracle={} conflicts={}", report.detector_total, report.oracle_total, report.merge_conflict_extras.len());
    let p = report.merge_conflict_extras[0];
    let cell = grid.nearest_cell(p);
    println!("conflict point {:?} cell {:?} merged_class {:?}", p, cell, grid.class_at(cell));
    for dy in (-2..=2).rev() {
        let mut row = String::new();
        for dx in -2..=2 {
            let c = (cell.0 + dx, cell.1 + dy);
            let m = match grid.class_at(c) {
                submap_frontier::grid::CellClass::Free => 'F',
                submap_frontier::grid::CellClass::Occupied => 'O',
                submap_frontier::grid::CellClass::Unobserved => '.',
            };
            row.push(m);
        }
        println!("  merged {row}");
    }
    for (s, pose) in &pairs {
        println!("  submap {}:", s.id());
        let inv = pose.invert();
        for dy in (-2..=2).rev() {
            let mut row = String::new();
            for dx in -2..=2 {
                let c = (cell.0 + dx, cell.1 + dy);
                let center = Point2::new((c.0 as f64 + 0.5) * 0.05, (c.1 as f64 + 0.5) * 0.05);
                let local = inv.project_point(center);
                let lc = s.nearest_cell(local);
                let m = match s.class_at(lc, 0.0) {
                    submap_frontier::grid::CellClass::Free => 'F',
                    submap_frontier::grid::CellClass::Occupied => 'O',
                    submap_frontier::grid::CellClass::Unobserved => '.',
                };
                row.push(m);
            }
            println!("    {row}");
        }
    }
    // Does the detector actually own this point? which submap?
    for (id, _) in det.known_submaps() {
        let pts = det.global_frontier().points_of(id);
        if pts.iter().any(|q| (q.x - p.x).abs() < 1e-9 && (q.y - p.y).abs() < 1e-9) {
            println!("point owned by submap {id}");
        }
    }
}

//! World-file serialization: JSON with a run-length-encoded cell string.

use crate::{GenError, GenParams, WorldSpec};
use navbench_core::grid::{OccupancyGrid, FREE, OCCUPIED};
use navbench_core::{Point2, Pose2D};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Run lengths of the row-major cell bit string, comma separated, alternating
/// free/occupied and starting with the free count (possibly "0").
pub fn encode_rle(grid: &OccupancyGrid) -> String {
    let mut runs: Vec<usize> = Vec::new();
    let mut current_occupied = false;
    let mut run = 0usize;
    for cell in grid.cells() {
        let occupied = *cell != FREE;
        if occupied == current_occupied {
            run += 1;
        } else {
            runs.push(run);
            current_occupied = occupied;
            run = 1;
        }
    }
    runs.push(run);
    runs.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Inverse of [`encode_rle`] for a grid of known dimensions.
pub fn decode_rle(
    rle: &str,
    width: usize,
    height: usize,
    resolution: f64,
    origin: Point2,
) -> Result<OccupancyGrid, GenError> {
    let mut grid = OccupancyGrid::new_free(width, height, resolution, origin);
    let mut idx = 0usize;
    let mut occupied = false;
    for part in rle.split(',') {
        let run: usize = part
            .parse()
            .map_err(|_| GenError::Format(format!("bad run length: {part}")))?;
        for _ in 0..run {
            if idx >= width * height {
                return Err(GenError::Format("rle overruns the grid".into()));
            }
            if occupied {
                grid.set(idx % width, idx / width, OCCUPIED);
            }
            idx += 1;
        }
        occupied = !occupied;
    }
    if idx != width * height {
        return Err(GenError::Format(format!(
            "rle covers {idx} of {} cells",
            width * height
        )));
    }
    Ok(grid)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    width: usize,
    height: usize,
    resolution: f64,
    origin_x: f64,
    origin_y: f64,
    rle: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldFile {
    schema_version: u32,
    params: GenParams,
    grid: GridFile,
    start: Pose2D,
    goal: Point2,
    path_length: f64,
    optimal_time: f64,
}

/// Serialize a world; identical worlds serialize to identical bytes.
pub fn world_to_json(world: &WorldSpec) -> String {
    let file = WorldFile {
        schema_version: SCHEMA_VERSION,
        params: world.params,
        grid: GridFile {
            width: world.grid.width(),
            height: world.grid.height(),
            resolution: world.grid.resolution(),
            origin_x: world.grid.origin().x,
            origin_y: world.grid.origin().y,
            rle: encode_rle(&world.grid),
        },
        start: world.start,
        goal: world.goal,
        path_length: world.path_length,
        optimal_time: world.optimal_time,
    };
    serde_json::to_string_pretty(&file).expect("world serialization cannot fail")
}

pub fn world_from_json(json: &str) -> Result<WorldSpec, GenError> {
    let file: WorldFile =
        serde_json::from_str(json).map_err(|e| GenError::Format(e.to_string()))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(GenError::Format(format!(
            "schema_version {} unsupported (expected {SCHEMA_VERSION})",
            file.schema_version
        )));
    }
    let grid = decode_rle(
        &file.grid.rle,
        file.grid.width,
        file.grid.height,
        file.grid.resolution,
        Point2::new(file.grid.origin_x, file.grid.origin_y),
    )?;
    Ok(WorldSpec {
        grid,
        start: file.start,
        goal: file.goal,
        path_length: file.path_length,
        optimal_time: file.optimal_time,
        params: file.params,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub file: String,
    pub path_length: f64,
    pub optimal_time: f64,
    /// Tercile of path length within the generated batch.
    pub difficulty: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub seed: u64,
    pub count: usize,
    pub worlds: Vec<ManifestEntry>,
}

impl Manifest {
    /// Label each world easy/medium/hard by path-length terciles over the
    /// batch (stable tie-break on id order).
    pub fn difficulty_labels(lengths: &[f64]) -> Vec<&'static str> {
        let n = lengths.len();
        if n == 0 {
            return Vec::new();
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| lengths[a].total_cmp(&lengths[b]).then(a.cmp(&b)));
        let mut labels = vec![""; n];
        for (rank, &idx) in order.iter().enumerate() {
            labels[idx] = match rank * 3 / n {
                0 => "easy",
                1 => "medium",
                _ => "hard",
            };
        }
        labels
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate_world;
    use proptest::prelude::*;

    #[test]
    fn world_json_round_trip() {
        let world = generate_world(&GenParams {
            seed: 7,
            ..GenParams::default()
        })
        .unwrap();
        let json = world_to_json(&world);
        let back = world_from_json(&json).unwrap();
        assert_eq!(world, back);
        // byte-stable serialization
        assert_eq!(json, world_to_json(&back));
    }

    #[test]
    fn rejects_wrong_schema_version() {
        let world = generate_world(&GenParams::default()).unwrap();
        let json = world_to_json(&world).replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(world_from_json(&json).is_err());
    }

    #[test]
    fn rejects_truncated_rle() {
        let world = generate_world(&GenParams::default()).unwrap();
        let mut json = world_to_json(&world);
        let pos = json.find("\"rle\": \"").unwrap() + 8;
        json.replace_range(pos..pos + 2, "1,");
        assert!(world_from_json(&json).is_err());
    }

    #[test]
    fn tercile_labels() {
        let lengths = [1.0, 5.0, 3.0, 2.0, 6.0, 4.0];
        let labels = Manifest::difficulty_labels(&lengths);
        assert_eq!(labels, ["easy", "hard", "medium", "easy", "hard", "medium"]);
    }

    proptest! {
        #[test]
        fn rle_round_trips(seed in 0u64..500) {
            use rand_core::{Rng, SeedableRng};
            let mut rng = rand_pcg::Pcg64Mcg::seed_from_u64(seed);
            let w = 8 + (rng.next_u64() % 20) as usize;
            let h = 8 + (rng.next_u64() % 20) as usize;
            let mut grid = OccupancyGrid::new_free(w, h, 0.1, Point2::new(0.0, 0.0));
            for iy in 0..h {
                for ix in 0..w {
                    if rng.next_u64() % 3 == 0 {
                        grid.set(ix, iy, OCCUPIED);
                    }
                }
            }
            let rle = encode_rle(&grid);
            let back = decode_rle(&rle, w, h, 0.1, Point2::new(0.0, 0.0)).unwrap();
            prop_assert_eq!(grid, back);
        }
    }
}

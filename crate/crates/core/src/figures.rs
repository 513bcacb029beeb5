//! Datasets for the four section figures, built from the model objects.

use crate::cones::{slice_intervals, ConeSystem};
use crate::error::Result;
use crate::horseshoe::PoincareSystem;
use crate::rng::SampleStream;
use crate::svg::{Curve, Rect, Region, SectionDataset};

/// Points per polygon edge when pushing region boundaries through `F`.
const EDGE_SAMPLES: usize = 120;
/// Abscissas per half-section for the cone envelopes.
const CONE_GRID: usize = 60;
/// Offset used instead of `x = 0`, where `F` is undefined.
const GAMMA_NUDGE: f64 = 1e-12;
const HORSESHOE_POINTS: usize = 200;

fn mirror(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    points.iter().map(|p| [-p[0], -p[1]]).collect()
}

/// The four regions of the domain partition and the line `Γ`.
pub fn partition_dataset(ps: &PoincareSystem) -> SectionDataset {
    let b = ps.b();
    let h = ps.strip_half_height();
    let outer = vec![
        [0.0, -1.0],
        [0.0, 1.0],
        [1.0, 1.0],
        [1.0, h],
        [b, h],
        [b, -h],
        [1.0, -h],
        [1.0, -1.0],
    ];
    let strip = vec![[b, -h], [1.0, -h], [1.0, h], [b, h]];
    SectionDataset {
        regions: vec![
            Region {
                label: "right-outer".into(),
                shade: 2,
                dotted: false,
                points: outer.clone(),
            },
            Region {
                label: "right-strip".into(),
                shade: 1,
                dotted: false,
                points: strip.clone(),
            },
            Region {
                label: "left-outer".into(),
                shade: 2,
                dotted: true,
                points: mirror(&outer),
            },
            Region {
                label: "left-strip".into(),
                shade: 1,
                dotted: true,
                points: mirror(&strip),
            },
        ],
        curves: vec![Curve {
            dashed: false,
            points: vec![[0.0, -1.0], [0.0, 1.0]],
        }],
        ..Default::default()
    }
}

fn densify(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(points.len() * EDGE_SAMPLES);
    for (i, p) in points.iter().enumerate() {
        let q = points[(i + 1) % points.len()];
        for j in 0..EDGE_SAMPLES {
            let t = j as f64 / EDGE_SAMPLES as f64;
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Images under `F` of the partition regions, traced along their boundaries.
pub fn image_dataset(ps: &PoincareSystem) -> Result<SectionDataset> {
    let partition = partition_dataset(ps);
    let mut regions = Vec::with_capacity(partition.regions.len());
    for region in partition.regions {
        let side = if region.label.starts_with("right") {
            1.0
        } else {
            -1.0
        };
        let mut image = Vec::new();
        for p in densify(&region.points) {
            let x = if side * p[0] < GAMMA_NUDGE {
                side * GAMMA_NUDGE
            } else {
                p[0]
            };
            let (fx, gy) = ps.poincare_f((x, p[1]))?;
            image.push([fx, gy]);
        }
        regions.push(Region {
            label: region.label,
            points: image,
            ..region
        });
    }
    Ok(SectionDataset {
        regions,
        ..Default::default()
    })
}

/// Level-`n` cone envelopes of `F_k`: each leaf's fiber interval traced over
/// a grid of abscissas on both halves.
pub fn cones_dataset(sys: &ConeSystem, n: usize) -> Result<SectionDataset> {
    let mut regions = Vec::new();
    for side in [-1.0, 1.0] {
        let grid: Vec<f64> = (1..CONE_GRID)
            .map(|j| side * j as f64 / CONE_GRID as f64)
            .collect();
        let columns = grid
            .iter()
            .map(|&a| slice_intervals(sys, a, n))
            .collect::<Result<Vec<_>>>()?;
        for leaf in 0..columns[0].len() {
            let mut points: Vec<[f64; 2]> = grid
                .iter()
                .zip(&columns)
                .map(|(&a, c)| [a, c[leaf].0])
                .collect();
            points.extend(
                grid.iter()
                    .zip(&columns)
                    .rev()
                    .map(|(&a, c)| [a, c[leaf].1]),
            );
            regions.push(Region {
                label: format!("leaf-{}", leaf + 1),
                shade: 1,
                dotted: side < 0.0,
                points,
            });
        }
    }
    Ok(SectionDataset {
        regions,
        ..Default::default()
    })
}

/// `A`, the level-`n` product rectangles of `H_n`, and sampled members,
/// in coordinates scaled by `1/a` so that `A` fills the frame.
pub fn horseshoe_dataset(ps: &PoincareSystem, n: usize, seed: u64) -> SectionDataset {
    let a = ps.a();
    let s = 1.0 / a;
    let intervals = ps.bowen().construction().level_intervals(n);
    let mut rects = Vec::with_capacity(intervals.len() * intervals.len());
    for (_, col) in &intervals {
        for (_, row) in &intervals {
            rects.push(Rect {
                x0: s * col.lo,
                x1: s * col.hi,
                y0: s * row.lo,
                y1: s * row.hi,
            });
        }
    }
    let mut stream = SampleStream::new(seed);
    let mut points = Vec::with_capacity(HORSESHOE_POINTS);
    let mut draws = 0usize;
    while points.len() < HORSESHOE_POINTS && draws < 1000 * HORSESHOE_POINTS {
        draws += 1;
        let x = stream.uniform(-a, a);
        let y = stream.uniform(-a, a);
        if ps.horseshoe_membership((x, y), n) {
            points.push([s * x, s * y]);
        }
    }
    SectionDataset {
        rects,
        curves: vec![Curve {
            dashed: true,
            points: vec![
                [-1.0, -1.0],
                [1.0, -1.0],
                [1.0, 1.0],
                [-1.0, 1.0],
                [-1.0, -1.0],
            ],
        }],
        points,
        ..Default::default()
    }
}

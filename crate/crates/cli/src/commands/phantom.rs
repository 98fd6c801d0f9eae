use std::path::{Path, PathBuf};

use lymphkit_core::phantom::{simulate_prediction, PhantomCase, PhantomSpec, SimulatedModel};
use lymphkit_core::report::render_rows;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{par_map, table_row, Context};
use crate::args::{load_structured, triple, PhantomArgs};
use crate::error::{CliError, CliResult};
use crate::layout::{self, ANATOMY, DERIVED, IMAGE, LABELS_GT, LABELS_WEAK};

/// Surface voxel dropout of the all-sizes stand-in model.
const ALL_SIZES_DROPOUT: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhantomRow {
    pub case_id: String,
    pub seed: u64,
    pub nodes: usize,
    pub annotated: usize,
    pub gt_voxels: usize,
    pub weak_voxels: usize,
}
table_row!(PhantomRow {
    case_id,
    seed,
    nodes,
    annotated,
    gt_voxels,
    weak_voxels
});

struct Job {
    id: String,
    dir: PathBuf,
    spec: PhantomSpec,
}

pub fn run(ctx: &Context, args: &PhantomArgs) -> CliResult<String> {
    let jobs = match &args.spec {
        Some(path) => {
            let spec: PhantomSpec = load_structured(path)?;
            spec.validate()
                .map_err(CliError::input(path.display().to_string()))?;
            let id = args
                .out
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .ok_or_else(|| CliError::Usage("--out needs a directory name".into()))?;
            vec![Job {
                id,
                dir: args.out.clone(),
                spec,
            }]
        }
        None => cohort_jobs(args)?,
    };
    let models = [
        SimulatedModel::LargeOnly {
            min_short_mm: ctx.config.enlargement_threshold_mm,
        },
        SimulatedModel::AllSizes {
            dropout: ALL_SIZES_DROPOUT,
        },
    ];
    let rows = par_map(&jobs, |job| {
        let case = job
            .spec
            .generate()
            .map_err(CliError::stage(format!("{}: generate", job.id)))?;
        write_case(ctx, &job.dir, &job.id, &job.spec, &case)?;
        if args.predictions {
            for (k, model) in models.iter().enumerate() {
                let pred = simulate_prediction(
                    &case.gt,
                    *model,
                    ctx.config.connectivity,
                    job.spec.seed.wrapping_add(k as u64 + 1),
                )
                .map_err(CliError::stage(format!("{}: predict", job.id)))?;
                let dir = args.out.join("predictions").join(model.tag());
                layout::write(
                    &pred.to_grid(),
                    &layout::volume_path(&dir, &job.id, ctx.volume_format),
                )?;
            }
        }
        Ok(PhantomRow {
            case_id: job.id.clone(),
            seed: job.spec.seed,
            nodes: job.spec.nodes.len(),
            annotated: job.spec.nodes.iter().filter(|n| n.annotated).count(),
            gt_voxels: case.gt.count(),
            weak_voxels: case.weak.count(),
        })
    })?;
    Ok(render_rows(&rows, ctx.format))
}

fn cohort_jobs(args: &PhantomArgs) -> CliResult<Vec<Job>> {
    if args.cohort == 0 {
        return Err(CliError::Usage("--cohort must be at least 1".into()));
    }
    let dims = triple("--dims", &args.dims)?;
    let spacing = triple("--spacing", &args.spacing)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    (0..args.cohort)
        .map(|i| {
            let id = format!("case-{i:03}");
            let seed = rng.random::<u64>();
            let spec = PhantomSpec::random(seed, dims, spacing, args.nodes)
                .map_err(CliError::input(id.clone()))?;
            Ok(Job {
                dir: args.out.join(&id),
                id,
                spec,
            })
        })
        .collect()
}

fn write_case(
    ctx: &Context,
    dir: &Path,
    id: &str,
    spec: &PhantomSpec,
    case: &PhantomCase,
) -> CliResult<()> {
    // Stale volumes in another format would make the case ambiguous.
    for sub in [IMAGE, LABELS_WEAK, LABELS_GT, ANATOMY, DERIVED] {
        layout::clear_dir(&dir.join(sub))?;
    }
    let fmt = ctx.volume_format;
    layout::write(&case.image, &layout::volume_path(&dir.join(IMAGE), id, fmt))?;
    layout::write(
        &case.weak.to_grid(),
        &layout::volume_path(&dir.join(LABELS_WEAK), id, fmt),
    )?;
    layout::write(
        &case.gt.to_grid(),
        &layout::volume_path(&dir.join(LABELS_GT), id, fmt),
    )?;
    layout::write(
        &case.anatomy,
        &layout::volume_path(&dir.join(ANATOMY), id, fmt),
    )?;
    layout::write_json(&dir.join("phantom.json"), spec)
}

//! Benchmark fixtures shared by the criterion targets.

use lonesense_core::dataset::{build_windows, CoverageRule, FeatureWindow};
use lonesense_core::features::{extract_all, ExtractParams};
use lonesense_core::ingest::group_by_participant;
use lonesense_core::synth::{generate_cohort, Cohort, CohortSpec};

pub fn cohort(n: usize) -> Cohort {
    generate_cohort(&CohortSpec {
        n_participants: n,
        ..Default::default()
    })
    .expect("valid spec")
}

pub fn windows(n: usize) -> Vec<FeatureWindow> {
    let c = cohort(n);
    let params = ExtractParams::default();
    let rows = extract_all(&group_by_participant(c.events), &c.roster, &params);
    build_windows(
        &rows,
        &c.assessments,
        &params.catalog(),
        &CoverageRule::default(),
    )
    .0
}

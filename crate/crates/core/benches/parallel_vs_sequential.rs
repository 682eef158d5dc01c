use std::hint::black_box;

use appeval::ctds::{self, BootstrapOptions};
use appeval::detfn::{KeyFamily, KeyFunction};
use appeval::exec::Exec;
use appeval::mvgeo;
use appeval::survey::FilterScenario;
use appeval::synth::{gen_ctds, gen_rig, CtdsScenarioTruth, RigTruth};
use criterion::{criterion_group, criterion_main, Criterion};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn bootstrap(c: &mut Criterion) {
    let truth = CtdsScenarioTruth {
        true_density_km2: 0.5,
        key: KeyFunction::hazard_rate(7.0, 3.0).unwrap(),
        truncation_radius_m: 20.0,
        view_angle_deg: 42.0,
        snapshot_interval_s: 2.0,
        study_area_km2: 100.0,
        n_cameras: 30,
        operating_time_s: 5.0e6,
        operating_times_s: None,
        manual_rate: 0.1,
        auto_tp_rate: 0.8,
        auto_fp_rate: 0.05,
        seed: 1,
        clip_snapshots: 30,
        placement_radius_factor: 1.25,
        distance_bin_edges_m: None,
    };
    let survey = gen_ctds(&truth).unwrap().survey.truncate();
    let mut g = c.benchmark_group("bootstrap_200");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| {
                let opts = BootstrapOptions { replicates: 200, seed: 7, exec };
                black_box(ctds::estimate_with_bootstrap(&survey, KeyFamily::HazardRate, FilterScenario::None, opts).unwrap())
            })
        });
    }
    g.finish();
}

fn triangulation(c: &mut Criterion) {
    let rig = gen_rig(&RigTruth::with_defaults(500, 3, 1.0, 3)).unwrap();
    let mut g = c.benchmark_group("triangulate_1500_frames");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| black_box(mvgeo::triangulate_frames(&rig.calibration, &rig.obs2d, 2, exec)))
        });
    }
    g.finish();
}

criterion_group!(benches, bootstrap, triangulation);
criterion_main!(benches);

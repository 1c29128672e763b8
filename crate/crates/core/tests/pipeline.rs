use tpi_core::metrics::{cnr, convergence_study, ncc, reports_from_csv, reports_to_csv, rmse, spearman, Regions};
use tpi_core::optics::OpticalLayout;
use tpi_core::pipeline::{reconstruct, with_threads};
use tpi_core::scene::{builtin_object, FrameSimulator, SimulationGrid, SourceSpec};
use tpi_core::sensor::NoiseModel;
use tpi_core::{Image, Method, Pipeline, TurbulenceSpec};

fn desk_pipeline(n: usize) -> Pipeline {
    let grid = SimulationGrid::new(n, 20e-6, 532e-9).unwrap();
    let mask = builtin_object("Q", n, 0.6).unwrap().with_diffuse(true);
    let sim = FrameSimulator::new(grid, SourceSpec::default(), mask, OpticalLayout::experiment_default(), TurbulenceSpec::none()).unwrap();
    Pipeline::new(sim, NoiseModel::default()).unwrap()
}

#[test]
fn convergence_study_is_deterministic_and_thread_invariant() {
    let p = desk_pipeline(64);
    let one = with_threads(Some(1), || convergence_study(&p, &[10, 40], &[1, 2, 3])).unwrap().unwrap();
    let four = with_threads(Some(4), || convergence_study(&p, &[10, 40], &[1, 2, 3])).unwrap().unwrap();
    assert_eq!(reports_to_csv(&one), reports_to_csv(&four));
    assert_eq!(one.len(), 3 * 2 * 3);
    assert_eq!(reports_from_csv(&reports_to_csv(&one)).unwrap().len(), one.len());
}

#[test]
fn checkpoints_match_independent_runs() {
    let p = desk_pipeline(32);
    let checkpoints = p.run_checkpoints(9, &[5, 17, 40]).unwrap();
    for (frames, state) in checkpoints {
        assert_eq!(state, p.run(9, frames).unwrap());
    }
}

#[test]
fn tpi_beats_ghost_imaging_at_ten_frames() {
    let p = desk_pipeline(128);
    let truths = p.truths().unwrap();
    let mut wins = 0;
    for seed in 1..=20 {
        let s = p.run(seed, 10).unwrap();
        let tpi = ncc(&reconstruct(&s, Method::Tpi).unwrap(), &truths.tpi).unwrap();
        let gi = ncc(&reconstruct(&s, Method::Gi).unwrap(), &truths.classical).unwrap();
        wins += usize::from(tpi > gi);
    }
    assert_eq!(wins, 20);
}

#[test]
fn classical_image_resolves_the_object() {
    let p = desk_pipeline(128);
    let s = p.run(1, 1000).unwrap();
    let score = ncc(&reconstruct(&s, Method::Classical).unwrap(), &p.truths().unwrap().classical).unwrap();
    assert!(score >= 0.95, "NCC {score}");
}

#[test]
fn metric_identities() {
    let a = Image::from_fn(16, 16, |r, c| ((r * 3 + c * 7) % 11) as f64);
    let b = a.map(|v| 4.0 * v + 2.0);
    assert!((ncc(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    assert!((ncc(&a, &a.map(|v| -v)).unwrap() + 1.0).abs() < 1e-12);
    assert!(rmse(&a, &a.map(|v| 3.0 * v)).unwrap() < 1e-12);
    assert!(ncc(&a, &Image::zeros(16, 16)).is_err());
    assert!(ncc(&a, &Image::zeros(8, 8)).is_err());

    let mask = builtin_object("Q", 32, 0.6).unwrap();
    let regions = Regions::from_mask(&mask, 1.0);
    let clean = Image::new(32, 32, regions.signal.iter().map(|&s| f64::from(u8::from(s))).collect()).unwrap();
    assert_eq!(cnr(&clean, &regions).unwrap(), f64::INFINITY);
    assert_eq!(cnr(&clean.map(|v| -v), &regions).unwrap(), 0.0);

    assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 25.0, 90.0]) - 1.0).abs() < 1e-12);
    assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
}

#[test]
fn convergence_study_rejects_unsorted_counts() {
    let p = desk_pipeline(16);
    assert!(convergence_study(&p, &[10, 10], &[1]).is_err());
    assert!(convergence_study(&p, &[], &[1]).is_err());
}

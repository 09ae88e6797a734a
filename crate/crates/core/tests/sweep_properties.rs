use splitmimo_core::evaluation::{run_sweep, SchemeSpec};
use splitmimo_core::{ChannelModel, ExperimentConfig, SystemConfig};

fn specs(cfg: &ExperimentConfig, labels: &[&str]) -> Vec<SchemeSpec> {
    labels.iter().map(|l| SchemeSpec::parse(l, cfg).unwrap()).collect()
}

fn baseline(snrs: Vec<f64>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(SystemConfig::normalized(32, 8, 8, snrs), ChannelModel::Rayleigh);
    cfg.calibration_draws = 200;
    cfg
}

#[test]
fn inf_rzf_grows_and_mrt_split_saturates() {
    let cfg = baseline(vec![0.0, 10.0, 20.0, 30.0, 40.0]);
    let res = run_sweep(&cfg, &specs(&cfg, &["inf_rzf", "mrt_split"]), 30, 5).unwrap();
    let inf: Vec<f64> = cfg.system.snr_db_list.iter().map(|&s| res.row("inf_rzf", s).unwrap().avg_sum_rate).collect();
    assert!(inf.windows(2).all(|w| w[1] > w[0]), "{inf:?}");
    let r30 = res.row("mrt_split", 30.0).unwrap().avg_sum_rate;
    let r40 = res.row("mrt_split", 40.0).unwrap().avg_sum_rate;
    assert!(r40 < 1.1 * r30, "{r30} -> {r40}");
}

#[test]
fn repeated_runs_are_identical() {
    let cfg = baseline(vec![10.0]);
    let s = specs(&cfg, &["inf_rzf", "gs_mrt_split"]);
    assert_eq!(run_sweep(&cfg, &s, 1, 3).unwrap(), run_sweep(&cfg, &s, 1, 3).unwrap());
}

#[test]
fn full_dimension_dft_tracks_one_stage_at_desk_scale() {
    let mut cfg = ExperimentConfig::new(SystemConfig::normalized(8, 4, 4, vec![20.0]), ChannelModel::Rayleigh);
    cfg.calibration_draws = 300;
    let s = specs(&cfg, &["dft_split:N=8:B=1", "one_stage_sesd:B=1"]);
    let res = run_sweep(&cfg, &s, 40, 11).unwrap();
    let dft = res.row("dft_split:N=8:B=1", 20.0).unwrap().avg_sum_rate;
    let one = res.row("one_stage_sesd:B=1", 20.0).unwrap().avg_sum_rate;
    assert!((dft - one).abs() <= 0.1 * one, "dft {dft} vs one-stage {one}");
}

#[test]
fn mmwave_sweep_rates_are_finite_and_below_unquantized() {
    let mut cfg = ExperimentConfig::new(SystemConfig::normalized(32, 4, 4, vec![30.0]), ChannelModel::Mmwave);
    cfg.calibration_draws = 100;
    cfg.mmwave.num_subcarriers = 8;
    let s = specs(&cfg, &["inf_rzf", "gs_mrt_split", "dft_split:N=8", "one_stage_sesd:M=8"]);
    let res = run_sweep(&cfg, &s, 4, 2).unwrap();
    assert_eq!(res.rows.len(), 4);
    assert!(res.rows.iter().all(|r| r.avg_sum_rate.is_finite() && r.avg_sum_rate > 0.0));
    let inf = res.row("inf_rzf", 30.0).unwrap().avg_sum_rate;
    assert!(res.rows.iter().all(|r| r.avg_sum_rate <= inf + 1e-9));
}

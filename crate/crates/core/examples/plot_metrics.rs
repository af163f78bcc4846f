//! Trains two short scratch runs, writes their metrics files and renders an SVG.
//!
//!     cargo run --release --example plot_metrics -- [out_dir]

use std::path::PathBuf;

use composenet::baselines::scratch_train;
use composenet::harness::{emit_plots, metrics_path, MetricsWriter};
use composenet::tasklang::TaskSpec;

mod support;

fn main() -> composenet::Result<()> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "plot-demo".into()),
    );
    std::fs::create_dir_all(&dir).map_err(|e| composenet::Error::io(&dir, e))?;
    let spec: TaskSpec = "F r | F b".parse()?;
    let mut inputs = Vec::new();
    for seed in 0..2 {
        let path = metrics_path(&dir, "demo", seed);
        let w = MetricsWriter::create(
            &path,
            "demo",
            "scratch",
            "none",
            [(spec.key(), spec.reward_mode)].into(),
        )?;
        let cfg = composenet::trainer::TrainConfig {
            seed,
            ..support::quick(40_000)
        };
        scratch_train(&spec, &cfg, Some(&|r| w.record(r)))?;
        inputs.push(w.finish()?);
    }
    let out = dir.join("demo.svg");
    let chart = emit_plots(&inputs, &out, "scratch on F r | F b")?;
    println!(
        "{} series, y: {}; wrote {}",
        chart.series.len(),
        chart.y_label,
        out.display()
    );
    Ok(())
}

//! Emit every figure preset into ./figures/ by driving the command layer
//! the same way the binary does.

use oscimedia::cli;

fn main() {
    std::fs::create_dir_all("figures").expect("create ./figures");
    let jobs: &[(&str, &str, &str)] = &[
        ("chart", "fig1", "figures/fig1.csv"),
        ("compare", "fig2", "figures/fig2.csv"),
        ("scan", "fig3", "figures/fig3.csv"),
        ("scan", "fig4", "figures/fig4.csv"),
        ("scan", "fig5", "figures/fig5.csv"),
        ("photons", "fig6b", "figures/fig6b.csv"),
        ("photons", "fig6c", "figures/fig6c.csv"),
    ];
    for (command, preset, out) in jobs {
        let code = cli::run([
            "oscimedia".to_string(),
            command.to_string(),
            "--preset".into(),
            preset.to_string(),
            "--out".into(),
            out.to_string(),
        ]);
        if code != 0 {
            eprintln!("{preset} failed with exit code {code}");
            std::process::exit(code);
        }
        println!("{preset:>6} -> {out}");
    }
    println!("done; multi-table presets add suffixes (fig4_m1.csv, fig5_b0.40.csv, ...)");
}

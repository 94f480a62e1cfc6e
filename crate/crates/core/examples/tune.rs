//! Scratch tool: sweep candidate perturbation settings and print the
//! criterion-7 style marginals, plus a per-cell drill-down.

use reid_core::dataset::{generate_synthetic, Perturbation, SyntheticSpec};
use reid_core::harness::{rank_report, read_results_csv, run_grid, GridSpec};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let detail = args.iter().any(|a| a == "--detail");
    let candidates = [
        (1.3, 3.0, 0.0),
        (1.3, 4.0, 0.0),
        (1.25, 4.0, 0.0),
        (1.35, 4.0, 0.0),
        (1.3, 5.0, 0.0),
    ];
    for (brightness, noise, hue) in candidates {
        let dir = tempfile::tempdir().unwrap();
        let spec = SyntheticSpec {
            perturbation: Perturbation {
                brightness_scale: brightness,
                noise_sigma: noise,
                hue_shift_deg: hue,
            },
            ..SyntheticSpec::default()
        };
        let manifest = generate_synthetic(&spec, &dir.path().join("synth")).unwrap();
        let grid = GridSpec::full(vec![manifest], 42);
        let t0 = std::time::Instant::now();
        let out = run_grid(&grid, &dir.path().join("out"), 0).unwrap();
        let rows = read_results_csv(&out.csv_path).unwrap();
        let report = rank_report(&rows).unwrap();

        let mean = |pred: &dyn Fn(&reid_core::harness::ResultRow) -> bool| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| pred(r))
                .filter_map(|r| r.cmc_area)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };

        println!(
            "== brightness {brightness}, noise {noise}, hue {hue} ({:.0}s)",
            t0.elapsed().as_secs_f64()
        );
        for e in &report {
            println!("   {:<14} {:.4}", e.distance, e.mean_cmc_area);
        }
        let top4: Vec<&str> = report.iter().take(4).map(|e| e.distance.as_str()).collect();
        let a = ["Bhattacharyya", "ChiSquare", "Intersection"]
            .iter()
            .filter(|d| top4.contains(*d))
            .count();
        let hsv = mean(&|r| r.color_space == "HSV");
        let rgb = mean(&|r| r.color_space == "RGB");
        let lab = mean(&|r| r.color_space == "CIELAB");
        let s1 = mean(&|r| r.stripes == 1);
        let s5 = mean(&|r| r.stripes == 5);
        let s10 = mean(&|r| r.stripes == 10);
        let s25 = mean(&|r| r.stripes == 25);
        println!("   (a) trio-in-top4: {a}/3   (b) HSV {hsv:.4} RGB {rgb:.4} LAB {lab:.4}   (c) stripes 1:{s1:.4} 5:{s5:.4} 10:{s10:.4} 25:{s25:.4}");

        if detail {
            println!("   space    bins stripes   Corr   Inter  Bhatt    Chi    EMD");
            for space in ["RGB", "HSV", "CIELAB"] {
                for bins in [16usize, 32, 64, 128] {
                    for stripes in [1usize, 5, 10, 25] {
                        let cell = |d: &str| {
                            rows.iter()
                                .find(|r| {
                                    r.color_space == space
                                        && r.bins == bins
                                        && r.stripes == stripes
                                        && r.distance == d
                                })
                                .and_then(|r| r.cmc_area)
                                .unwrap_or(f64::NAN)
                        };
                        println!(
                            "   {:<8} {:>4} {:>7}  {:.3}  {:.3}  {:.3}  {:.3}  {:.3}",
                            space,
                            bins,
                            stripes,
                            cell("Correlation"),
                            cell("Intersection"),
                            cell("Bhattacharyya"),
                            cell("ChiSquare"),
                            cell("EMD"),
                        );
                    }
                }
            }
        }
    }
}

//! Sample designs from a scrambled Sobol sequence, simulate their spectra and
//! write the labelled dataset.
//!
//!     cargo run --release --example generate_dataset -- [samples] [out.csv]

use std::path::PathBuf;

use mdn_inverse::dataset::{save_metadata, surrogate_spectrum, wavelength, LabeledDataset, Split};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let samples: usize = args.next().map(|s| s.parse().expect("samples must be an integer")).unwrap_or(500);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/example_data/dataset.csv".into()));

    let (ds, meta) = LabeledDataset::generate(samples, 0)?;
    println!(
        "{} samples from {} Sobol points (gap rule rejected {})",
        meta.samples,
        meta.sobol_points_consumed,
        meta.sobol_points_consumed - meta.samples
    );
    let c = ds.counts();
    println!("split: {} train / {} val / {} test", c.train, c.val, c.test);

    let first = ds.partition(Split::Test).next().expect("test partition is empty");
    println!("first test design: {:?}", first.design);
    let s = first.spectrum.as_slice();
    let (peak, a) = s.iter().enumerate().fold((0, f64::MIN), |m, (i, &v)| if v > m.1 { (i, v) } else { m });
    println!("  absorbance peaks at {:.0} nm ({a:.3})", wavelength(peak));
    assert_eq!(surrogate_spectrum(&first.design)?.as_slice(), s);

    if let Some(dir) = out.parent() {
        std::fs::create_dir_all(dir)?;
    }
    ds.save_csv(&out)?;
    save_metadata(&out, &meta)?;
    println!("wrote {}", out.display());
    Ok(())
}

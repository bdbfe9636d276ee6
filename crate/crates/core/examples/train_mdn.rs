//! Train a single mixture density network on a small generated dataset and
//! look at what it predicts for a held-out spectrum.
//!
//!     cargo run --release --example train_mdn -- [K] [epochs]

use mdn_inverse::dataset::{LabeledDataset, Split};
use mdn_inverse::mdn::SPECTRUM_TRUNK_WIDTHS;
use mdn_inverse::train::{fit_with, TrainConfig};
use mdn_inverse::transfer::{StrategyKind, SweepConfig};

fn main() -> mdn_inverse::Result<()> {
    let mut args = std::env::args().skip(1);
    let k: usize = args.next().map(|s| s.parse().expect("K must be an integer")).unwrap_or(3);
    let epochs: usize = args.next().map(|s| s.parse().expect("epochs must be an integer")).unwrap_or(40);

    let (ds, _) = LabeledDataset::generate(600, 1)?;
    let (train, val, test) = (ds.xy(Split::Train), ds.xy(Split::Val), ds.xy(Split::Test));

    // Same initialization a from-scratch sweep would use for this K.
    let mut sc = SweepConfig::new(&SPECTRUM_TRUNK_WIDTHS, k, StrategyKind::None, 1);
    sc.train = TrainConfig { max_epochs: epochs, ..TrainConfig::default() };
    let outcome = fit_with(
        sc.fresh_model(k)?,
        (train.x.view(), train.y.view()),
        (val.x.view(), val.y.view()),
        &sc.train,
        sc.seed_for(k),
        |l| {
            if l.epoch % 10 == 0 {
                println!("epoch {:4}  train {:8.4}  val {:8.4}", l.epoch, l.train_loss, l.val_loss);
            }
        },
    )?;
    let model = outcome.model;
    println!("best epoch {} (val {:.4})", outcome.best_epoch, outcome.best_val_loss);
    println!("test NLL {:.4}", model.mean_nll(test.x.view(), test.y.view())?);

    let record = ds.partition(Split::Test).next().expect("test partition is empty");
    let mix = model.mixture(record.spectrum.as_slice())?;
    println!("true (normalized): {:.3?}", record.design.normalized());
    for c in 0..mix.k() {
        println!("  pi {:.3}  mean {:.3?}", mix.pi()[c], mix.mean(c).to_vec());
    }
    Ok(())
}

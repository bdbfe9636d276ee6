//! Sweep K = 1..K_max from scratch and with both growth strategies, and
//! compare the epochs each needs.
//!
//!     cargo run --release --example transfer_sweep -- [K_max] [max_epochs]

use mdn_inverse::dataset::{LabeledDataset, Split};
use mdn_inverse::mdn::SPECTRUM_TRUNK_WIDTHS;
use mdn_inverse::transfer::{sweep, MdnData, StrategyKind, SweepConfig};

fn main() -> mdn_inverse::Result<()> {
    let mut args = std::env::args().skip(1);
    let k_max: usize = args.next().map(|s| s.parse().expect("K_max must be an integer")).unwrap_or(3);
    let max_epochs: usize = args.next().map(|s| s.parse().expect("epochs must be an integer")).unwrap_or(60);

    let (ds, _) = LabeledDataset::generate(400, 3)?;
    let (train, val, test) = (ds.xy(Split::Train), ds.xy(Split::Val), ds.xy(Split::Test));
    let data = MdnData { train: &train, val: &val, test: &test };

    for strategy in [StrategyKind::None, StrategyKind::Tl1, StrategyKind::Tl2] {
        let mut cfg = SweepConfig::new(&SPECTRUM_TRUNK_WIDTHS, k_max, strategy, 3);
        cfg.train.max_epochs = max_epochs;
        cfg.train.patience = 15;
        let r = sweep(data, &cfg)?;
        println!("{}: {} epochs, {:.1} s", strategy.as_str(), r.total_epochs(), r.total_seconds());
        for e in &r.entries {
            println!("  K={:2}  epochs {:4}  val {:8.4}  test {:8.4}", e.k, e.epochs, e.val_nll, e.test_nll);
        }
    }
    Ok(())
}

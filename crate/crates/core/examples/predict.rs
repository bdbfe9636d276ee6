//! Inverse design: rank a trained model's candidate designs for a spectrum and
//! check each one by re-simulating it.

use mdn_inverse::dataset::{LabeledDataset, Split};
use mdn_inverse::mdn::SPECTRUM_TRUNK_WIDTHS;
use mdn_inverse::predict::{nearest_neighbor, predict_designs};
use mdn_inverse::train::fit;
use mdn_inverse::transfer::{StrategyKind, SweepConfig};

fn main() -> mdn_inverse::Result<()> {
    let (ds, _) = LabeledDataset::generate(600, 5)?;
    let (train, val) = (ds.xy(Split::Train), ds.xy(Split::Val));
    let k = 4;
    let mut sc = SweepConfig::new(&SPECTRUM_TRUNK_WIDTHS, k, StrategyKind::None, 5);
    sc.train.max_epochs = 60;
    let model = fit(
        sc.fresh_model(k)?,
        (train.x.view(), train.y.view()),
        (val.x.view(), val.y.view()),
        &sc.train,
        sc.seed_for(k),
    )?
    .model;

    for record in ds.partition(Split::Test).take(3) {
        let target = record.spectrum.as_slice();
        let (_, preds) = predict_designs(&model, None, target, k)?;
        println!("true design {:?}", record.design);
        for p in &preds {
            println!(
                "  #{} pi {:.3}  rmse {:.4}{}  {:?}",
                p.rank,
                p.pi,
                p.rmse,
                if p.feasible { "" } else { " (infeasible)" },
                p.design
            );
        }
        let (_, nn) = nearest_neighbor(ds.partition(Split::Train), target).expect("empty training set");
        println!("  nearest training spectrum: rmse {nn:.4}");
    }
    Ok(())
}

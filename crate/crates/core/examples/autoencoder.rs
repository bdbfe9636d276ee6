//! Compress spectra to a 10-dimensional latent space and train the mixture
//! network on the latents instead of the raw spectra.

use mdn_inverse::autoencoder::{mean_baseline_mse, train_ae};
use mdn_inverse::dataset::{LabeledDataset, Split, Xy};
use mdn_inverse::mdn::LATENT_TRUNK_WIDTHS;
use mdn_inverse::train::{fit, TrainConfig};
use mdn_inverse::transfer::{StrategyKind, SweepConfig};

fn main() -> mdn_inverse::Result<()> {
    let (ds, _) = LabeledDataset::generate(500, 4)?;
    let (train, val, test) = (ds.xy(Split::Train), ds.xy(Split::Val), ds.xy(Split::Test));

    let config = TrainConfig { max_epochs: 60, ..TrainConfig::default() };
    let ae = train_ae(train.x.view(), val.x.view(), &config, 4)?.model;
    println!(
        "reconstruction MSE {:.3e} (mean-spectrum baseline {:.3e})",
        ae.mse(val.x.view())?,
        mean_baseline_mse(train.x.view(), val.x.view())
    );

    let encode = |xy: &Xy| -> mdn_inverse::Result<Xy> { Ok(Xy { x: ae.encode_batch(xy.x.view())?, y: xy.y.clone() }) };
    let (ltrain, lval, ltest) = (encode(&train)?, encode(&val)?, encode(&test)?);
    println!("latent of first test spectrum: {:.3?}", ltest.x.row(0).to_vec());

    let sc = SweepConfig::new(&LATENT_TRUNK_WIDTHS, 2, StrategyKind::None, 4);
    let outcome = fit(
        sc.fresh_model(2)?,
        (ltrain.x.view(), ltrain.y.view()),
        (lval.x.view(), lval.y.view()),
        &config,
        sc.seed_for(2),
    )?;
    println!("latent-input MDN (K=2): test NLL {:.4}", outcome.model.mean_nll(ltest.x.view(), ltest.y.view())?);
    Ok(())
}

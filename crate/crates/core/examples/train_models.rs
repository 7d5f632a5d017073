//! Train every learner on a toy two-blob problem and save a forest.

use rand_distr::{Distribution, Normal};
use tactile_core::models::{train, Dataset, Hyperparams, LearnerKind, Target};
use tactile_core::rng::rng_from;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = rng_from(1);
    let noise = Normal::new(0.0, 0.7)?;
    let mut x = Vec::new();
    let mut labels = Vec::new();
    for i in 0..200 {
        let c = i % 2;
        let centre = if c == 0 { -1.0 } else { 1.0 };
        x.push(vec![centre + noise.sample(&mut rng), centre + noise.sample(&mut rng), noise.sample(&mut rng)]);
        labels.push(c);
    }
    let names = vec!["a".into(), "b".into(), "noise".into()];
    let data = Dataset::new(x.clone(), Target::Classes { labels: labels.clone(), n_classes: 2 }, names)?;
    let hp = Hyperparams::default();

    for kind in [LearnerKind::Logistic, LearnerKind::GaussianNb, LearnerKind::Knn, LearnerKind::RfClassifier] {
        let model = train(kind, &hp, &data, 3)?;
        let pred = model.predict_class(&x)?;
        let acc = pred.iter().zip(&labels).filter(|(p, l)| p == l).count() as f64 / labels.len() as f64;
        println!("{:<14} training accuracy {acc:.3}", kind.name());
        if kind == LearnerKind::RfClassifier {
            println!("  importance order {:?}", model.feature_importance()?.top(3));
            let path = std::env::temp_dir().join("tactile-forest.json");
            model.save(&path)?;
            println!("  saved to {}", path.display());
        }
    }
    Ok(())
}

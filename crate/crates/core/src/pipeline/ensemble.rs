use rayon::prelude::*;

use super::{majority_vote, stack_features, EnsemblePreset, FeatureTemplateConfig, PipelineError, PredictionSet, Strategy, TokenFeatures};
use crate::corpus::{BioLabel, TaggedDocument};
use crate::crf::{self, CrfHyperparams, CrfModel, TrainingSet};
use crate::gazetteer::Thesaurus;

/// A corpus together with the external predictions aligned to it.
#[derive(Debug, Clone, Copy)]
pub struct CrfEnsembleInput<'a> {
    pub docs: &'a [TaggedDocument],
    pub sets: &'a [PredictionSet],
    pub thesaurus: Option<&'a Thesaurus>,
}

impl<'a> CrfEnsembleInput<'a> {
    pub fn new(docs: &'a [TaggedDocument], sets: &'a [PredictionSet], thesaurus: Option<&'a Thesaurus>) -> Self {
        CrfEnsembleInput { docs, sets, thesaurus }
    }

    fn source(&self, name: &str) -> Result<&'a PredictionSet, PipelineError> {
        let set = self
            .sets
            .iter()
            .find(|s| s.model_name == name)
            .ok_or_else(|| PipelineError::MissingSource(name.to_string()))?;
        set.check_shape(self.docs)?;
        Ok(set)
    }

    /// Features of every sentence, documents in order.
    fn features(&self, config: &FeatureTemplateConfig) -> Result<Vec<Vec<TokenFeatures>>, PipelineError> {
        config.validate()?;
        let sources = config
            .prediction_sources
            .iter()
            .map(|n| self.source(n))
            .collect::<Result<Vec<_>, _>>()?;
        let mut jobs = Vec::new();
        for (d, doc) in self.docs.iter().enumerate() {
            for (s, sentence) in doc.sentences.iter().enumerate() {
                jobs.push((d, s, sentence));
            }
        }
        jobs.par_iter()
            .map(|&(d, s, sentence)| {
                let preds: Vec<(&str, &[BioLabel])> = sources
                    .iter()
                    .map(|set| (set.model_name.as_str(), set.labels[d][s].as_slice()))
                    .collect();
                stack_features(config, sentence, &preds, self.thesaurus)
            })
            .collect()
    }
}

/// Trains a CRF on the gold labels of `input.docs` (unlabelled tokens count
/// as `O`). The feature configuration is stored in the model metadata.
pub fn train_crf(
    input: CrfEnsembleInput<'_>,
    config: &FeatureTemplateConfig,
    hyper: CrfHyperparams,
) -> Result<CrfModel, PipelineError> {
    let features = input.features(config)?;
    let gold = crate::corpus::gold_sentences(input.docs);
    let set = TrainingSet::from_named(None, features.into_iter().zip(gold));
    let mut model = crf::train(&set, hyper)?;
    model.set_metadata(serde_json::json!({ "features": config }));
    Ok(model)
}

/// Grid search for `(c1, c2)`: fits on `train`, scores micro F1 on the gold
/// labels of `dev`.
pub fn tune_crf(
    train: CrfEnsembleInput<'_>,
    dev: CrfEnsembleInput<'_>,
    config: &FeatureTemplateConfig,
    grid: &[(f64, f64)],
    base: CrfHyperparams,
) -> Result<CrfHyperparams, PipelineError> {
    let set = TrainingSet::from_named(None, train.features(config)?.into_iter().zip(crate::corpus::gold_sentences(train.docs)));
    let dev_set = set.encode(dev.features(config)?.into_iter().zip(crate::corpus::gold_sentences(dev.docs)));
    Ok(crf::tune_c1_c2(&set, &dev_set, grid, base)?)
}

/// Decodes `input.docs`. Without an explicit `config` the one stored in the
/// model metadata is used, falling back to the defaults.
pub fn predict_crf(
    model: &CrfModel,
    input: CrfEnsembleInput<'_>,
    config: Option<&FeatureTemplateConfig>,
    model_name: &str,
) -> Result<PredictionSet, PipelineError> {
    let stored: FeatureTemplateConfig = model
        .metadata()
        .and_then(|m| m.get("features"))
        .and_then(|f| serde_json::from_value(f.clone()).ok())
        .unwrap_or_default();
    let config = config.unwrap_or(&stored);
    let features = input.features(config)?;
    let decoded = features
        .par_iter()
        .map(|named| Ok(model.viterbi(&model.encode(named))?.0))
        .collect::<Result<Vec<_>, crf::CrfError>>()?;
    let mut it = decoded.into_iter();
    let labels = input
        .docs
        .iter()
        .map(|d| d.sentences.iter().map(|_| it.next().expect("one decode per sentence")).collect())
        .collect();
    Ok(PredictionSet {
        model_name: model_name.to_string(),
        doc_ids: input.docs.iter().map(|d| d.doc_id.clone()).collect(),
        labels,
    })
}

/// Runs a preset: voting ignores `train`; CRF presets fit on `train` and
/// decode `test`.
pub fn run_preset(
    preset: &EnsemblePreset,
    train: CrfEnsembleInput<'_>,
    test: CrfEnsembleInput<'_>,
    hyper: CrfHyperparams,
) -> Result<PredictionSet, PipelineError> {
    let mut out = match preset.strategy {
        Strategy::Vote => {
            let sets = preset
                .sources
                .iter()
                .map(|n| test.source(n))
                .collect::<Result<Vec<_>, _>>()?;
            majority_vote(&sets, preset.priority())?
        }
        Strategy::Crf => {
            let config = preset.template_config();
            let model = train_crf(train, &config, hyper)?;
            predict_crf(&model, test, Some(&config), &preset.name)?
        }
    };
    out.model_name = preset.name.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::read_conll;
    use crate::pipeline::preset;

    const TRAIN: &str = "#doc a\nDe\tDET\tO\nurn\tN\tB-ART\nbij\tP\tO\nSwifterbant\tN\tB-LOC\n\n#doc b\nurn\tN\tB-ART\nen\tC\tO\npot\tN\tB-ART\n\n";

    fn noisy(docs: &[TaggedDocument], name: &str, flip_every: usize) -> PredictionSet {
        let k = std::cell::Cell::new(0usize);
        PredictionSet::from_gold(name, docs).map_sentences(name, |s| {
            s.iter()
                .map(|&l| {
                    k.set(k.get() + 1);
                    if flip_every > 0 && k.get().is_multiple_of(flip_every) { BioLabel::O } else { l }
                })
                .collect()
        })
    }

    #[test]
    fn stacked_crf_recovers_gold_from_clean_source() {
        let docs = read_conll(TRAIN).unwrap();
        let sets = vec![PredictionSet::from_gold("archeobertje", &docs)];
        let input = CrfEnsembleInput::new(&docs, &sets, None);
        let out = run_preset(&preset("crf-archeo-only").unwrap(), input, input, CrfHyperparams::default()).unwrap();
        assert_eq!(out.model_name, "crf-archeo-only");
        assert_eq!(out.labels, sets[0].labels);
    }

    #[test]
    fn vote_preset_uses_test_sets() {
        let docs = read_conll(TRAIN).unwrap();
        let gold = PredictionSet::from_gold("x", &docs);
        let sets = vec![
            PredictionSet { model_name: "multibert".into(), ..gold.clone() },
            PredictionSet { model_name: "bertje".into(), ..gold.clone() },
            noisy(&docs, "archeobertje", 2),
        ];
        let input = CrfEnsembleInput::new(&docs, &sets, None);
        let out = run_preset(&preset("majority-vote").unwrap(), input, input, CrfHyperparams::default()).unwrap();
        assert_eq!(out.labels, gold.labels);
        let missing = CrfEnsembleInput::new(&docs, &sets[..2], None);
        assert!(matches!(
            run_preset(&preset("majority-vote").unwrap(), missing, missing, CrfHyperparams::default()),
            Err(PipelineError::MissingSource(_))
        ));
    }

    #[test]
    fn stored_config_is_reused() {
        let docs = read_conll(TRAIN).unwrap();
        let input = CrfEnsembleInput::new(&docs, &[], None);
        let config = FeatureTemplateConfig { window: 3, ..Default::default() };
        let model = train_crf(input, &config, CrfHyperparams::default()).unwrap();
        let a = predict_crf(&model, input, None, "crf").unwrap();
        let b = predict_crf(&model, input, Some(&config), "crf").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.labels, PredictionSet::from_gold("crf", &docs).labels);
    }

    #[test]
    fn tuning_returns_a_grid_point() {
        let docs = read_conll(TRAIN).unwrap();
        let input = CrfEnsembleInput::new(&docs, &[], None);
        let grid = [(0.0, 1e6), (0.0, 0.1)];
        let hyper = tune_crf(input, input, &FeatureTemplateConfig::default(), &grid, CrfHyperparams::default()).unwrap();
        assert_eq!((hyper.c1, hyper.c2), (0.0, 0.1));
        assert!(tune_crf(input, input, &FeatureTemplateConfig::default(), &[], CrfHyperparams::default()).is_err());
    }
}

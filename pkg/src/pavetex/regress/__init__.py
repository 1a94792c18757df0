"""Feature-to-MTD regression: datasets, linear diagnostics, tree ensembles, evaluation."""
from .artifact import SCHEMA_VERSION, ModelArtifact, load_artifact, save_artifact
from .dataset import (
    ALL_FEATURES,
    MODEL_SUBSETS,
    Dataset,
    LabeledSample,
    Scaler,
    parse_feature_subset,
    read_dataset,
    stratified_split,
    subset_name,
    write_dataset,
    zscore_apply,
    zscore_fit,
)
from .ensemble import (
    GbtModel,
    MeanModel,
    ModelSpec,
    RfModel,
    fit_model,
    gbt_fit,
    gbt_predict,
    rf_fit,
    rf_predict,
)
from .evaluation import CvReport, MetricsReport, kfold_cv, metrics, stratified_folds
from .linear import LinearFit, adjusted_r2, f_test_pvalue, ols_fit, vif, vif_from_r2
from .trees import RegressionTree

__all__ = [
    "ALL_FEATURES", "MODEL_SUBSETS", "SCHEMA_VERSION", "CvReport", "Dataset", "GbtModel",
    "LabeledSample", "LinearFit", "MeanModel", "MetricsReport", "ModelArtifact", "ModelSpec",
    "RegressionTree", "RfModel", "Scaler", "adjusted_r2", "f_test_pvalue", "fit_model",
    "gbt_fit", "gbt_predict", "kfold_cv", "load_artifact", "metrics", "ols_fit",
    "parse_feature_subset", "read_dataset", "rf_fit", "rf_predict", "save_artifact",
    "stratified_folds", "stratified_split", "subset_name", "vif", "vif_from_r2",
    "write_dataset", "zscore_apply", "zscore_fit",
]

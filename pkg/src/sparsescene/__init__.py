"""Patch-based denoising and land-cover classification with learned sparse
representations: K-SVD/OMP denoising, histogram + co-occurrence texture
features over multi-size windows, hierarchical residual-based classification
with a double reliability threshold, a linear one-vs-one SVM baseline, and
accuracy/kappa evaluation."""

from .classify import (
    UNCERTAIN,
    ClassDictionary,
    HierarchyConfig,
    LabelMap,
    SrcDecision,
    build_class_dictionary,
    hierarchical_classify,
    src_classify,
    threshold_decide,
)
from .denoise import DenoiseConfig, DenoiseResult, denoise_image
from .dictionary import (
    Dictionary,
    KsvdConfig,
    init_overcomplete_dct,
    ksvd_sweep,
    load_dictionary,
    save_dictionary,
    train_ksvd,
)
from .errors import ParameterError
from .features import (
    GlcmMatrix,
    GlcmStats,
    PatchSizePlan,
    compute_glcm,
    compute_glh,
    feature_raster,
    glcm_stats,
    pixel_feature,
    plan_patch_sizes,
)
from .image import NoiseSpec, Patch, add_noise, aggregate_patches, extract_patches, psnr
from .metrics import UndefinedMetricError, confusion, kappa, overall_accuracy, report
from .omp import SparseCode, omp_batch, omp_pursuit, omp_solve
from .svm import LinearSvmModel, OvoEnsemble, predict, train_binary, train_ovo
from .synth import make_training_mask, synth_mosaic

__version__ = "0.1.0"

from .channels import (
    ChannelSearchResult,
    CombinationResult,
    SearchSettings,
    SearchStrategy,
    channel_combination_search,
    evaluate_combination,
)
from .evaluation import ClassifierKind, CvResult, EvalReport, confusion_metrics, kfold_cv, stratified_folds
from .plsr import PlsrModel, plsr_fit, plsr_predict
from .svm import SvmModel, rbf_kernel, svm_fit, svm_predict

__all__ = [
    'ChannelSearchResult',
    'ClassifierKind',
    'CombinationResult',
    'CvResult',
    'EvalReport',
    'PlsrModel',
    'SearchSettings',
    'SearchStrategy',
    'SvmModel',
    'channel_combination_search',
    'confusion_metrics',
    'evaluate_combination',
    'kfold_cv',
    'plsr_fit',
    'plsr_predict',
    'rbf_kernel',
    'stratified_folds',
    'svm_fit',
    'svm_predict',
]

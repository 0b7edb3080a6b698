"""Device-free WLAN intrusion detection with multi-kernel MMD transfer.

Pipeline: windowed RSS statistics -> multi-branch feature fusion ->
multi-kernel Gram over stacked source+target samples -> regularized
generalized-eigenproblem migration -> iterative pseudo-label detection.
"""

__version__ = "0.1.0"

from .simulate import Area, DomainShift, EnvironmentSpec, RssTrace, simulate_schedule, simulate_trace
from .features import FeatureMatrix, WindowingConfig, extract_windows, normalize
from .fusion import FusionFeatureMatrix, FusionNet, TrainConfig, forward, fuse, init_network, train
from .kernels import GramMatrix, KernelSpec, MultiKernel, default_multi_kernel, kernel_eval, median_gamma, multi_gram
from .mmd import LabelVector, class_coefficients, combined_coefficients, marginal_coefficients, mixed_mmd, mmd_direct
from .transfer import TransferModel, centering_matrix, embed, solve_transfer
from .classify import KnnModel, LinearSvmModel, SvmConfig, knn_predict, svm_predict, svm_train
from .detector import DetectionReport, DomainDataset, IterationConfig, metrics, run_detection
from .config import PipelineConfig, load_config
from .pipeline import PipelineResult, run_pipeline

__all__ = [
    "__version__",
    "Area",
    "DomainShift",
    "EnvironmentSpec",
    "RssTrace",
    "simulate_trace",
    "simulate_schedule",
    "WindowingConfig",
    "FeatureMatrix",
    "extract_windows",
    "normalize",
    "FusionNet",
    "FusionFeatureMatrix",
    "TrainConfig",
    "init_network",
    "forward",
    "train",
    "fuse",
    "KernelSpec",
    "MultiKernel",
    "GramMatrix",
    "kernel_eval",
    "median_gamma",
    "multi_gram",
    "default_multi_kernel",
    "LabelVector",
    "marginal_coefficients",
    "class_coefficients",
    "combined_coefficients",
    "mmd_direct",
    "mixed_mmd",
    "TransferModel",
    "centering_matrix",
    "solve_transfer",
    "embed",
    "KnnModel",
    "LinearSvmModel",
    "SvmConfig",
    "knn_predict",
    "svm_train",
    "svm_predict",
    "DomainDataset",
    "IterationConfig",
    "DetectionReport",
    "metrics",
    "run_detection",
    "PipelineConfig",
    "load_config",
    "PipelineResult",
    "run_pipeline",
]

"""XLinear: decomposition, frequency-enhanced attention and cross-filtered MLP forecasting.

Everything runs on numpy float64 through the package's own reverse-mode
autodiff (:mod:`xlinear.tensor`) and FFT stack (:mod:`xlinear.spectral`).
"""

from .bench import MetricsReport, denoise_demo, efficiency_report, evaluate, mae, mse
from .crossfilter import cross_integrate, pai_filter, tex_filter
from .data import WindowedDataset, load_csv, make_windows
from .decomposition import DecompPair, decompose
from .efa import attention_param_count, efa_forward, freq_interaction
from .errors import ConfigError, DataError, NonFiniteError, ShapeError, SpectrumError, XLinearError
from .model import XLinearConfig, XLinearModel, build_model, count_params, load_checkpoint, save_checkpoint
from .spectral import ComplexSpectrum, fft_complex, irfft, rfft
from .tensor import Tensor, backward, gradient_check, no_grad
from .training import TrainConfig, fit

__version__ = "0.1.0"

__all__ = [
    "MetricsReport", "denoise_demo", "efficiency_report", "evaluate", "mae", "mse",
    "cross_integrate", "pai_filter", "tex_filter",
    "WindowedDataset", "load_csv", "make_windows",
    "DecompPair", "decompose",
    "attention_param_count", "efa_forward", "freq_interaction",
    "ConfigError", "DataError", "NonFiniteError", "ShapeError", "SpectrumError", "XLinearError",
    "XLinearConfig", "XLinearModel", "build_model", "count_params", "load_checkpoint", "save_checkpoint",
    "ComplexSpectrum", "fft_complex", "irfft", "rfft",
    "Tensor", "backward", "gradient_check", "no_grad",
    "TrainConfig", "fit",
]

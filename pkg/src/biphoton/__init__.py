"""Far-field diffraction of photon pairs through an N-slit grating.

Lengths are expressed in units of the grating period ``d`` and wave numbers
on a :class:`QGrid` in units of ``2 pi / d``.
"""
from .aperture import ApertureSpec, XGrid, analytic_ft, make_grating, transmittance
from .correlation import DEFAULT_GAUSSIAN_WIDTH, CorrelationKernel
from .errors import (
    BiphotonError,
    ConfigError,
    DataParseError,
    DegenerateDataError,
    GridMismatchError,
    InsufficientPeaksError,
    ParameterError,
    QuadratureCoverageError,
    ResolutionWarning,
    UnsupportedEvaluationError,
    WindowTooSmallError,
)
from .fitting import FitParams, FitResult, fit_pattern, synthesize
from .rates import (
    DiffractionPattern,
    JointRate,
    classical_one_photon,
    diagonal_pattern,
    one_photon_rate,
    peak_spacing,
    two_photon_rate,
    visibility,
)
from .wavepacket import BiphotonAmplitude, QGrid, biphoton_amplitude

__version__ = "0.1.0"

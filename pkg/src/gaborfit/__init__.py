"""Discrete Gabor transforms with l_p-optimized chirped Gaussian windows on
sheared hexagonal lattices."""

from gaborfit.core import (FramewiseWindowTrack, GaborWindow, Signal, TFCoefficients,
                           WindowParams, ambiguity, column_concentration, dgt, nsdgt,
                           synth_window)
from gaborfit.lattice import (LatticeSpec, QuantizedLattice, frame_condition, optimal_lattice,
                              quantize, rectangular_lattice)
from gaborfit.optimize import (ObjectiveConfig, OptResult, SegmentationPlan, objective,
                               optimize_chirped, optimize_real, optimize_segmented)
from gaborfit.synth import GroundTruth, SynthSpec, synthesize

__version__ = "0.1.0"

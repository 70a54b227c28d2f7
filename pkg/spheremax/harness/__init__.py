"""
Experiment harness: configuration, slope fitting, experiments and report writing.

The experiment registry and runner live in ``spheremax.harness.experiments``
and ``spheremax.harness.runner``; they import the core modules and are not
re-exported here.
"""

from .config import DEFAULT_PRESETS, ExperimentConfig, PresetManager, default_config
from .fitting import FitReport, fit_loglog

__all__ = ['DEFAULT_PRESETS', 'ExperimentConfig', 'FitReport', 'PresetManager', 'default_config', 'fit_loglog']

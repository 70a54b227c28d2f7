"""Run experiments and write their reports.

For an experiment ``name`` the runner writes ``<out>/<name>.csv`` (raw rows),
``<out>/<name>.json`` (config, fits, checks, verdict) and, with ``svg`` set,
``<out>/<name>.svg``. Log output with timestamps goes to
``<out>/spheremax.log`` only; data files carry no wall-clock information.
"""

import csv
import json
import logging
import os

from ..utils.parallel import set_worker_limit
from .config import DEFAULT_PRESETS, default_config
from .experiments import EXPERIMENTS, get_experiment

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
LOG_FILE = "spheremax.log"
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


class ReportWriter:
    """Writes the files of one experiment run into an output directory."""

    def __init__(self, out_dir):
        self.out_dir = os.fspath(out_dir)

    def path(self, name, suffix):
        return os.path.join(self.out_dir, f"{name}.{suffix}")

    def write_csv(self, result):
        path = self.path(result.name, "csv")
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(result.columns)
            for row in result.rows:
                writer.writerow([_cell(v) for v in row])
        logger.debug("write_csv: %d rows -> %s", len(result.rows), path)
        return path

    def write_json(self, config, result):
        path = self.path(result.name, "json")
        summary = {
            'schema_version': SCHEMA_VERSION,
            'experiment': result.name,
            'config': config.result_dict(),
            'config_hash': config.config_hash,
            'fits': {k: fit.to_dict() for k, fit in result.fits.items()},
            'checks': [c.to_dict() for c in result.checks],
            'passed': result.passed,
            'summary': result.summary,
        }
        with open(path, "w") as f:
            json.dump(summary, f, indent=2, sort_keys=True)
            f.write("\n")
        logger.debug("write_json: %s", path)
        return path

    def write_svg(self, result):
        if not result.fits:
            logger.info("write_svg: %s has no fits to plot", result.name)
            return None
        # Qt is only imported when a plot is requested
        from ..gui.loglog_plot import LogLogPlot

        plot = LogLogPlot(title=result.name)
        for label, fit in result.fits.items():
            plot.add_fit(label, fit)
        path = self.path(result.name, "svg")
        plot.save_svg(path)
        return path


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def _attach_file_log(out_dir):
    handler = logging.FileHandler(os.path.join(out_dir, LOG_FILE))
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logging.getLogger("spheremax").addHandler(handler)
    return handler


def run(config):
    """Run one experiment, write its reports and return the ExperimentResult."""
    experiment = get_experiment(config.experiment)
    os.makedirs(config.out, exist_ok=True)
    set_worker_limit(config.workers)
    handler = _attach_file_log(config.out)
    try:
        logger.info("run: %s (config %s)", experiment.name, config.config_hash[:12])
        result = experiment.func(config)
        writer = ReportWriter(config.out)
        writer.write_csv(result)
        writer.write_json(config, result)
        if config.svg:
            writer.write_svg(result)

        if result.passed:
            logger.info("run: %s passed (%d checks)", experiment.name, len(result.checks))
        else:
            names = ", ".join(c.name for c in result.failures())
            logger.warning("run: %s FAILED: %s", experiment.name, names)
        return result
    finally:
        logging.getLogger("spheremax").removeHandler(handler)
        handler.close()


def run_all(**overrides):
    """Run every experiment at its preset with ``overrides``; returns {name: result}."""
    results = {}
    for name in EXPERIMENTS:
        if name not in DEFAULT_PRESETS:
            continue
        results[name] = run(default_config(name, **overrides))
    passed = sum(r.passed for r in results.values())
    logger.info("run_all: %d/%d experiments passed", passed, len(results))
    return results

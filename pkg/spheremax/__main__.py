import argparse
import logging
import sys

from spheremax.errors import SpheremaxError
from spheremax.harness.config import DEFAULT_PRESETS, PresetManager, default_config
from spheremax.harness.experiments import EXPERIMENTS
from spheremax.harness.runner import run, run_all

logger = logging.getLogger("spheremax")

# argparse dest -> ExperimentConfig field
OVERRIDE_FLAGS = ('n', 'j_min', 'j_max', 'epsilon', 'grid_n', 'grid_l', 't_ratio',
                  'r_min', 'r_max', 'seed', 'out', 'workers')


def build_parser():
    parser = argparse.ArgumentParser(prog='spheremax', description='Bilinear spherical maximal function laboratory')
    parser.add_argument('experiment', nargs='?', help="experiment name, or 'all'")
    parser.add_argument('--n', type=int, help='half dimension (the sphere is S^(2n-1))')
    parser.add_argument('--j-min', type=int, help='smallest dyadic index')
    parser.add_argument('--j-max', type=int, help='largest dyadic index')
    parser.add_argument('--epsilon', type=float, help='width of the diagonal window edge')
    parser.add_argument('--grid-n', type=int, help='grid points per axis (power of two)')
    parser.add_argument('--grid-l', type=float, help='period of the grid box')
    parser.add_argument('--t-ratio', type=float, help='ratio of consecutive radii in t grids')
    parser.add_argument('--r-min', type=float, help='smallest scale R (or radius r)')
    parser.add_argument('--r-max', type=float, help='largest scale R (or radius r)')
    parser.add_argument('--seed', type=int, help='master seed (unsigned 64-bit)')
    parser.add_argument('--out', help='output directory')
    parser.add_argument('--svg', action='store_true', help='write log-log plots')
    parser.add_argument('--workers', type=int, help='cap on worker threads')
    parser.add_argument('--debug', action='store_true', help='Enable debug logging')
    parser.add_argument('--preset', help='apply a saved preset before the flags')
    parser.add_argument('--preset-file', help='preset file (default ~/.config/spheremax/presets.json)')
    parser.add_argument('--save-preset', metavar='NAME', help='save the given flags as a preset and exit')
    parser.add_argument('--list', action='store_true', help='list experiments and exit')
    return parser


def setup_logging(debug):
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter("[%(levelname)s] %(name)s: %(message)s"))
    logger.handlers[:] = [handler]
    logger.setLevel(logging.DEBUG if debug else logging.INFO)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.debug)

    if args.list:
        for name, experiment in EXPERIMENTS.items():
            print(f"{name:18s} {experiment.description}")
        return 0

    overrides = {key: getattr(args, key) for key in OVERRIDE_FLAGS}
    if args.svg:
        overrides['svg'] = True
    if args.debug:
        overrides['debug'] = True

    try:
        if args.save_preset:
            presets = PresetManager(args.preset_file)
            presets.add_preset(args.save_preset, overrides)
            presets.save_presets()
            logger.info("main: saved preset %s", args.save_preset)
            return 0

        if args.preset:
            presets = PresetManager(args.preset_file)
            stored = presets.get_preset(args.preset)
            if stored is None:
                logger.error("main: no preset named %s", args.preset)
                return 2
            overrides = {**stored, **{k: v for k, v in overrides.items() if v is not None}}

        if not args.experiment:
            parser.print_usage()
            return 2
        if args.experiment == 'all':
            results = run_all(**overrides)
            return 0 if all(r.passed for r in results.values()) else 1
        if args.experiment not in DEFAULT_PRESETS:
            logger.error("main: unknown experiment %s; see --list", args.experiment)
            return 2
        result = run(default_config(args.experiment, **overrides))
        return 0 if result.passed else 1
    except SpheremaxError as e:
        logger.error("run: %s: %s", args.experiment, e)
        return 2


if __name__ == "__main__":
    sys.exit(main())

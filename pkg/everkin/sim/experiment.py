# Run one of the experiments and write its CSV output

import sys
import time
from optparse import OptionGroup

from .config import APP
from .sim import add_run_options
from ..utils.base import CmdParser, assert_n, fmt_num, log
from ..utils.experiments import EXPERIMENTS, ExperimentSpec, n_theta_slices, run_experiment
from ..utils.settings import settings_from_options

COMMAND = "experiment"

PROCESSED = 0
TOTAL_CELLS = 0
START_TIME = time.time()

def show_progress(RV = None):
    global PROCESSED, TOTAL_CELLS, START_TIME
    PROCESSED += 1
    bar_len = 20
    run_time = time.time() - START_TIME
    percents = 100.0 * PROCESSED / max(TOTAL_CELLS, 1)
    filled_len = int(round(bar_len * percents / 100))
    bar = '=' * filled_len + '-' * (bar_len - filled_len)

    sys.stderr.write('[%s] [%s] %.1f%% done in %.1f sec.\n'
        % (COMMAND, bar, percents, run_time))
    sys.stderr.flush()
    return RV

def _reset_progress(total):
    global PROCESSED, TOTAL_CELLS, START_TIME
    PROCESSED, TOTAL_CELLS, START_TIME = 0, total, time.time()

def _n_cells(spec):
    p = spec.params
    if spec.name == "circle-sweep":
        return len(p["alpha_levels"])
    if spec.name == "workspace-map":
        return n_theta_slices(p["theta_step"])
    return 1

def _print_summary(spec, result, fp = None):
    fp = fp or sys.stdout
    if spec.name == "step-compare":
        fp.write("%-6s %14s %12s %12s %12s %12s\n" % ("run", "settling_s",
                 "sse_R", "sse_alpha", "sse_theta", "theta_move"))
        for r in (result.ff, result.noff):
            e = r.metrics.steady_state_error
            fp.write("%-6s %14s %12s %12s %12s %12s\n" % (r.name, fmt_num(r.metrics.settling_time),
                     fmt_num(e.e_R), fmt_num(e.e_alpha), fmt_num(e.e_theta),
                     fmt_num(r.theta_first_move)))
        fp.write("feedforward faster: %s\n" % ("yes" if result.ff_faster else "no"))
    elif spec.name == "circle-sweep":
        fp.write("%-8s %12s %12s %22s\n" % ("alpha", "mean_alpha", "theta_bias", "dead_zone"))
        for lv in result:
            zone = "-"
            if lv.dead_zone is not None:
                zone = "%s..%s" % (fmt_num(lv.dead_zone.start), fmt_num(lv.dead_zone.end))
            fp.write("%-8s %12s %12s %22s\n" % (fmt_num(lv.alpha), fmt_num(lv.mean_alpha),
                     fmt_num(lv.errors.mean_theta), zone))
    elif spec.name == "estimate-k":
        fp.write("%-12s %10s %12s %12s\n" % ("pressure", "length", "k_hat", "r_squared"))
        for (pressure, length), f in result.fits.items():
            fp.write("%-12s %10s %12s %12s\n" % (fmt_num(pressure), fmt_num(length),
                     fmt_num(f.k_hat), fmt_num(f.r_squared)))
        fp.write("pooled k_hat=%s max_diff=%s\n" % (fmt_num(result.pooled.k_hat),
                 fmt_num(result.max_diff)))
    else:
        n_in = sum(c.in_workspace for c in result)
        n_reach = sum(c.reachable for c in result)
        fp.write("cells=%d in_workspace=%d reachable=%d\n" % (len(result), n_in, n_reach))

def experiment(argv):
    parser = CmdParser(usage = "Usage: %s %s [%s] [options]" % (APP, COMMAND, "|".join(EXPERIMENTS)))
    add_run_options(parser)
    group = OptionGroup(parser, "Parallel")
    group.add_option("--jobs", "-j", type = "int", dest = "jobs", default = 1,
        help = "Worker processes for sweep cells [default: %default]")
    parser.add_option_group(group)

    (options, args) = parser.parse_args(args = argv[2:])
    if len(args) > 1:
        parser.error("need at most one experiment name, one of %s." % ", ".join(EXPERIMENTS))
    if options.jobs < 1:
        parser.error("--jobs should be >= 1.")
    out_dir = options.out_dir if options.out_dir is not None else "."
    assert_n(out_dir, "output directory")

    settings = settings_from_options(options)
    # without a name on the command line, run the one named in the config
    name = args[0] if args else settings.experiment["name"]
    spec = ExperimentSpec(name, settings)
    _reset_progress(_n_cells(spec))
    progress = None if options.quiet else show_progress
    if not options.quiet:
        log("[%s] run %s with %d job(s), output to %s." % (COMMAND, spec.name, options.jobs, out_dir))

    result = run_experiment(spec, out_dir, options.jobs, progress)

    if spec.name == "step-compare":
        sys.stdout.write("settling_ff=%s settling_noff=%s ff_faster=%s\n" % (
            fmt_num(result.ff.metrics.settling_time), fmt_num(result.noff.metrics.settling_time),
            str(result.ff_faster).lower()))
    if options.summary:
        _print_summary(spec, result)
    if not options.quiet:
        log("[%s] All Done!" % COMMAND)
    return 0


if __name__ == "__main__":
    sys.exit(experiment(sys.argv))

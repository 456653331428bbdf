# One closed-loop run to the configured target

import os
import sys
from optparse import OptionGroup

from .config import APP
from ..utils.base import CmdParser, assert_n, ensure_dir, fmt_num, log
from ..utils.control import settling_metrics
from ..utils.experiments import ExperimentSpec, closed_loop_run
from ..utils.settings import settings_from_options

COMMAND = "sim"

def add_run_options(parser):
    """Options shared by sim and experiment."""
    group = OptionGroup(parser, "Configuration")
    group.add_option("--config", dest = "config", default = None,
        help = "JSON config file [default: $EVERKIN_CONFIG or built-in]")
    group.add_option("--seed", type = "int", dest = "seed", default = None,
        help = "Random seed, overrides the config.")
    group.add_option("--sag", type = "float", dest = "sag", default = None,
        help = "Gravity sag magnitude in degrees, overrides the config.")
    group.add_option("--no-feedforward", action = "store_true", dest = "no_feedforward",
        default = False, help = "Run the steering loops on PID output only.")
    group.add_option("--dt", type = "float", dest = "dt", default = None,
        help = "Control period in seconds, overrides the config.")
    group.add_option("--duration", type = "float", dest = "duration", default = None,
        help = "Simulated seconds per run, overrides the config.")
    parser.add_option_group(group)

    group = OptionGroup(parser, "Output")
    group.add_option("--out", "-O", dest = "out_dir", default = None,
        help = "Output directory.")
    group.add_option("--summary", action = "store_true", dest = "summary", default = False,
        help = "Print a human-readable summary table.")
    group.add_option("--quiet", "-q", action = "store_true", dest = "quiet", default = False,
        help = "Do not print progress messages.")
    parser.add_option_group(group)

def sim(argv):
    parser = CmdParser(usage = "Usage: %s %s [options]" % (APP, COMMAND))
    add_run_options(parser)
    (options, args) = parser.parse_args(args = argv[2:])
    if args:
        parser.error("unexpected arguments: %s" % " ".join(args))
    if options.out_dir is not None:
        assert_n(options.out_dir, "output directory")

    settings = settings_from_options(options)
    spec = ExperimentSpec("step-compare", settings)
    ff = settings.loop["feedforward"]
    if not options.quiet:
        log("[%s] closed-loop run, feedforward %s, %s s at dt=%s." % (COMMAND,
            "on" if ff else "off", fmt_num(settings.loop["duration"]), fmt_num(settings.loop["dt"])))

    runlog = closed_loop_run(spec, ff)
    runlog.add_metadata("experiment", COMMAND)
    metrics = settling_metrics(runlog, settings.loop["band"])
    if options.out_dir is not None:
        path = runlog.write_csv(os.path.join(ensure_dir(options.out_dir), "sim.csv"))
        if not options.quiet:
            log("[%s] run log written to %s" % (COMMAND, path))

    e = metrics.steady_state_error
    sys.stdout.write("settling_time=%s sse_R=%s sse_alpha=%s sse_theta=%s\n" % (
        fmt_num(metrics.settling_time), fmt_num(e.e_R), fmt_num(e.e_alpha), fmt_num(e.e_theta)))
    if options.summary:
        final = runlog.rows[-1]
        sys.stdout.write("%-10s %12s %12s %12s\n" % ("", "R_m", "alpha_deg", "theta_deg"))
        sys.stdout.write("%-10s %12s %12s %12s\n" % ("desired", fmt_num(final.R_des_m),
            fmt_num(final.alpha_des_deg), fmt_num(final.theta_des_deg)))
        sys.stdout.write("%-10s %12s %12s %12s\n" % ("measured", fmt_num(final.R_real_m),
            fmt_num(final.alpha_real_deg), fmt_num(final.theta_real_deg)))
    return 0


if __name__ == "__main__":
    sys.exit(sim(sys.argv))

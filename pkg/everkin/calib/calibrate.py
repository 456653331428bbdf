# Fit the model coefficient to a motion-capture log

import sys
from optparse import OptionGroup

from .config import APP
from ..utils.base import CmdParser, assert_e, fmt_num, log
from ..utils.calibration import (
    K_DIFF_THRESHOLD, estimate_k, group_samples, parse_mocap_csv,
    pressure_length_independence)

COMMAND = "calibrate"

def calibrate(argv):
    parser = CmdParser(usage = "Usage: %s %s <mocap.csv> [options]" % (APP, COMMAND))
    group1 = OptionGroup(parser, "Optional arguments")
    group1.add_option("--threshold", type = "float", dest = "threshold", default = K_DIFF_THRESHOLD,
        help = "Largest accepted k difference between conditions [default: %default]")
    group1.add_option("--summary", action = "store_true", dest = "summary", default = False,
        help = "Print the fit of every (pressure, length) condition.")
    group1.add_option("--quiet", "-q", action = "store_true", dest = "quiet", default = False,
        help = "Do not print progress messages.")
    parser.add_option_group(group1)

    (options, args) = parser.parse_args(args = argv[2:])
    if len(args) != 1:
        parser.error("need exactly one mocap CSV file.")
    if not (options.threshold > 0):
        parser.error("--threshold should be > 0.")
    mocap_file = args[0]
    assert_e(mocap_file, "mocap log", "file")

    samples = parse_mocap_csv(mocap_file)
    if not options.quiet:
        log("[%s] loaded %d samples from %s" % (COMMAND, len(samples), mocap_file))

    fit = estimate_k(samples)
    sys.stdout.write("k=%s r2=%s residual_max=%s n=%d\n" % (fmt_num(fit.k_hat),
        fmt_num(fit.r_squared), fmt_num(fit.residual_max), fit.n_samples))

    groups = group_samples(samples)
    if len(groups) >= 2:
        report = pressure_length_independence(groups, options.threshold)
        sys.stdout.write("groups=%d max_k_diff=%s exceeded=%s\n" % (len(groups),
            fmt_num(report.max_diff), str(report.exceeded).lower()))
        if options.summary:
            sys.stdout.write("%-12s %10s %12s %12s %6s\n" % ("pressure", "length",
                             "k_hat", "r_squared", "n"))
            for (pressure, length), f in report.fits.items():
                sys.stdout.write("%-12s %10s %12s %12s %6d\n" % (fmt_num(pressure),
                    fmt_num(length), fmt_num(f.k_hat), fmt_num(f.r_squared), f.n_samples))
    return 0


if __name__ == "__main__":
    sys.exit(calibrate(sys.argv))

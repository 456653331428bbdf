# Inverse kinematics on the command line

import sys
from optparse import OptionGroup

from .config import APP
from ..utils.base import CmdParser, fmt_num
from ..utils.kinematics import (
    DEFAULT_K, CartesianPoint, cartesian_to_polar, inverse_model, sector_of)

COMMAND = "ik"

def ik(argv):
    parser = CmdParser(usage = "Usage: %s %s --alpha ALPHA --theta THETA [options]" % (APP, COMMAND))
    parser.add_option("--alpha", type = "float", dest = "alpha", default = None,
        help = "Arm pitch angle in degrees, within [0, 90].")
    parser.add_option("--theta", type = "float", dest = "theta", default = None,
        help = "Arm rotation angle in degrees.")

    group1 = OptionGroup(parser, "Optional arguments")
    group1.add_option("--xyz", type = "float", nargs = 3, dest = "xyz", default = None,
        help = "Tip position in meters instead of --alpha/--theta.")
    group1.add_option("--k", type = "float", dest = "k", default = DEFAULT_K,
        help = "Model coefficient, pitch degrees per motor degree [default: %default]")
    group1.add_option("--verbose", action = "store_true", dest = "verbose", default = False,
        help = "Also print the steering sector.")
    parser.add_option_group(group1)

    (options, args) = parser.parse_args(args = argv[2:])
    if options.xyz is not None:
        pose = cartesian_to_polar(CartesianPoint(*options.xyz))
        alpha, theta = pose.alpha, pose.theta
    elif options.alpha is None or options.theta is None:
        parser.error("need --alpha and --theta, or --xyz.")
    else:
        alpha, theta = options.alpha, options.theta

    phis = inverse_model(alpha, theta, options.k)
    sys.stdout.write("phi=%s\n" % " ".join(fmt_num(v) for v in phis.values()))
    if options.verbose:
        sec = sector_of(theta)
        sys.stdout.write("sector=%s idle=%d\n" % (sec.id, sec.idle))
    return 0


if __name__ == "__main__":
    sys.exit(ik(sys.argv))

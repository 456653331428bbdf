# Forward kinematics on the command line

import sys

from .config import APP
from ..utils.base import CmdParser, fmt_num
from ..utils.kinematics import DEFAULT_K, forward_model

COMMAND = "fk"

def fk(argv):
    parser = CmdParser(usage = "Usage: %s %s --phi PHI1 PHI2 PHI3 [options]" % (APP, COMMAND))
    parser.add_option("--phi", type = "float", nargs = 3, dest = "phi", default = None,
        help = "Steering motor angles in degrees, motor 1 to 3.")
    parser.add_option("--k", type = "float", dest = "k", default = DEFAULT_K,
        help = "Model coefficient, pitch degrees per motor degree [default: %default]")

    (options, args) = parser.parse_args(args = argv[2:])
    if options.phi is None:
        parser.error("need --phi.")

    ang = forward_model(options.phi, options.k)
    sys.stdout.write("alpha=%s theta=%s\n" % (fmt_num(ang.alpha), fmt_num(ang.theta)))
    if not ang.theta_defined:
        sys.stderr.write("[%s] Warning: arm is straight, theta is undefined.\n" % COMMAND)
    return 0


if __name__ == "__main__":
    sys.exit(fk(sys.argv))

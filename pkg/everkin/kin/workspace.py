# Workspace and reachability check of one pose

import sys
from optparse import OptionGroup

from .config import APP
from ..utils.base import CmdParser, fmt_num
from ..utils.kinematics import (
    CartesianPoint, PolarPose, cartesian_to_polar, in_workspace)
from ..utils.plant import is_reachable, max_payload
from ..utils.settings import settings_from_options

COMMAND = "workspace"

def workspace(argv):
    parser = CmdParser(usage = "Usage: %s %s --R R --alpha ALPHA --theta THETA [options]" % (APP, COMMAND))
    parser.add_option("--R", type = "float", dest = "R", default = None,
        help = "Arm length in meters.")
    parser.add_option("--alpha", type = "float", dest = "alpha", default = None,
        help = "Arm pitch angle in degrees.")
    parser.add_option("--theta", type = "float", dest = "theta", default = None,
        help = "Arm rotation angle in degrees.")
    parser.add_option("--xyz", type = "float", nargs = 3, dest = "xyz", default = None,
        help = "Tip position in meters instead of the pose.")

    group1 = OptionGroup(parser, "Plant")
    group1.add_option("--config", dest = "config", default = None,
        help = "JSON config file [default: $EVERKIN_CONFIG or built-in]")
    group1.add_option("--sag", type = "float", dest = "sag", default = None,
        help = "Gravity sag magnitude in degrees, overrides the config.")
    group1.add_option("--pressure", type = "float", dest = "pressure", default = None,
        help = "Arm pressure in psi, overrides the config.")
    parser.add_option_group(group1)

    (options, args) = parser.parse_args(args = argv[2:])
    if options.xyz is not None:
        pose = cartesian_to_polar(CartesianPoint(*options.xyz))
    elif None in (options.R, options.alpha, options.theta):
        parser.error("need --R, --alpha and --theta, or --xyz.")
    else:
        pose = PolarPose(options.R, options.alpha, options.theta)

    config = settings_from_options(options).plant_config()
    sys.stdout.write("in_workspace=%s reachable=%s max_payload=%s\n" % (
        str(in_workspace(pose)).lower(), str(is_reachable(pose, config)).lower(),
        fmt_num(max_payload(config))))
    return 0


if __name__ == "__main__":
    sys.exit(workspace(sys.argv))

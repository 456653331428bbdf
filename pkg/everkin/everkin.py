# cmdline options

import sys
from .config import PROGRAM, VERSION
from .kin.fk import fk as kin_fk
from .kin.ik import ik as kin_ik
from .kin.workspace import workspace as kin_workspace
from .sim.sim import sim as sim_sim
from .sim.experiment import experiment as sim_experiment
from .calib.calibrate import calibrate as calib_calibrate
from .utils.errors import EverkinError

COMMANDS = {
    "fk": kin_fk,
    "ik": kin_ik,
    "workspace": kin_workspace,
    "sim": sim_sim,
    "experiment": sim_experiment,
    "calibrate": calib_calibrate,
}

def __usage(fp = None):
    fp = fp or sys.stderr
    msg =  "\n"
    msg += "Program: %s (Kinematics and control of a steered everting arm)\n" % PROGRAM
    msg += "Version: %s\n" % VERSION
    msg += "\n"
    msg += "Usage:   %s <command> [options]\n" % PROGRAM
    msg += "\n"                                                              \
           "Commands:\n"                                                     \
           "  -- Kinematic model\n"                                          \
           "     fk               Arm pitch and rotation from motor angles\n" \
           "     ik               Motor angles for a pitch and rotation\n"   \
           "     workspace        Check a pose against the workspace\n"      \
           "\n"                                                              \
           "  -- Simulation\n"                                               \
           "     sim              One closed-loop run to a target\n"         \
           "     experiment       estimate-k, circle-sweep, step-compare or\n" \
           "                      workspace-map\n"                           \
           "\n"                                                              \
           "  -- Calibration\n"                                              \
           "     calibrate        Fit the model coefficient to a mocap log\n" \
           "\n"                                                              \
           "  -- Others\n"                                                   \
           "     -h, --help       Print this message\n"                      \
           "     -V, --version    Print version\n"                           \
           "\n"
    fp.write(msg)

def cli_main(args):
    """
    @abstract    Run one command.
    @param args  Command line without the program name [list of str]
    @return      Exit code: 0 success, 1 validation error, 2 I/O error [int]
    """
    if len(args) < 1:
        __usage()
        return 1

    command = args[0]
    if command in ("-h", "--help"):
        __usage(sys.stdout)
        return 0
    if command in ("-V", "--version"):
        sys.stdout.write("%s\n" % VERSION)
        return 0
    if command not in COMMANDS:
        sys.stderr.write("Error: wrong command '%s'\n" % command)
        __usage()
        return 1

    try:
        return COMMANDS[command]([PROGRAM] + list(args))
    except EverkinError as e:
        sys.stderr.write("Error: %s\n" % e)
        return 1
    except OSError as e:
        sys.stderr.write("Error: %s\n" % e)
        return 2
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1

def main():
    sys.exit(cli_main(sys.argv[1:]))

if __name__ == "__main__":
    main()

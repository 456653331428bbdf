# Base Utils

import os
import sys
import time
from optparse import OptionParser

from .errors import ValidationError

def assert_e(path, name, _type = None):
    """
    @abstract     Assert path exists and raise IOError if not.
                  Inspired by test -e in shell
    @param path   Path to the file/dir [str]
    @param name   Path name [str]
    @param _type  Path type: file or dir. if None, auto detect [str]
    @return       Void
    @example      assert_e("mocap.csv", "mocap log", "file")
    """
    if not path:
        raise ValidationError("path is empty for '%s'" % name)
    exist = False
    if _type:
        if _type.lower() == "file":
            if os.path.isfile(path):
                exist = True
        elif _type.lower() == "dir":
            if os.path.isdir(path):
                exist = True
        else:
            raise ValidationError("path type should be file or dir for '%s'" % name)
    else:
        if os.path.isfile(path) or os.path.isdir(path):
            exist = True
    if not exist:
        raise IOError("%s '%s' does not exist." % (name, path))

def assert_n(var, name):
    """
    @abstract    Assert variable is valid, i.e., True for`if <variable>`.
                 Inspired by test -n in shell
    @param var   The variable
    @param name  Variable name [str]
    @return      Void
    """
    if not var:
        raise ValidationError("var is empty for '%s'" % name)

def get_now_str(fmt = "%Y-%m-%d %H:%M:%S"):
    """
    @abstract   Return string of now
    @param fmt  Time string format [str]
    @return     String of now [str]
    """
    return time.strftime(fmt, time.localtime())

def log(msg, fp = None):
    """
    @abstract   Format log message and print
    @param msg  Log message to be printed [str]
    @param fp   File pointer, sys.stderr when None [FILE*]
    @return     Void
    """
    fp = fp or sys.stderr
    fp.write("[%s] %s\n" % (get_now_str(), msg))

def fmt_num(x):
    """
    @abstract   Short human form of a float for console output, e.g. 10.4 or 0.
    @param x    The number [float]
    @return     Formatted string [str]
    """
    s = "%.10g" % x
    return "0" if s == "-0" else s

def ensure_dir(path):
    """
    @abstract   Create output directory if missing.
    @param path Path to the directory [str]
    @return     The same path [str]
    """
    if not os.path.isdir(path):
        os.makedirs(path)
    return path

class CmdParser(OptionParser):
    """OptionParser raising ValidationError instead of exiting on bad options."""
    def error(self, msg):
        raise ValidationError(msg)

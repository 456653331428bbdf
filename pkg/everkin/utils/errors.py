# Exceptions raised by everkin.
# Everything below ValidationError maps to exit code 1 on the command line;
# I/O problems are left as OSError and map to exit code 2.

class EverkinError(Exception):
    pass

class ValidationError(EverkinError):
    pass

class InvalidMotorSet(ValidationError):
    pass

class OutOfRange(ValidationError):
    pass

class DegenerateInput(ValidationError):
    pass

class ConfigError(ValidationError):
    def __init__(self, path, msg):
        self.path = path
        super(ConfigError, self).__init__("%s: %s" % (path, msg))

class ParseError(ValidationError):
    def __init__(self, lineno, msg):
        self.lineno = lineno
        super(ParseError, self).__init__("line %d: %s" % (lineno, msg))

class SchemaError(ValidationError):
    pass

class InsufficientData(ValidationError):
    pass

class MultiMotorData(ValidationError):
    pass

class LengthMismatch(ValidationError):
    pass

# Global configure

PROGRAM = "everkin"
VERSION = "0.1.0"

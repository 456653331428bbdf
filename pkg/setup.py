# setup.py

from setuptools import setup, find_packages
from codecs import open
from os import path

here = path.abspath(path.dirname(__file__))

# load configures
exec(open("./everkin/config.py").read())

# Get the long description from the relevant file
with open(path.join(here, "README.md"), encoding='utf-8') as f:
    long_description = f.read()

reqs = ['numpy>=1.17.0']

setup(
    name = "everkin",

    # Versions should comply with PEP440.
    version = VERSION,

    description = "everkin - Kinematics and control of a steered everting arm",
    long_description = long_description,
    long_description_content_type = "text/markdown",

    license='Apache-2.0',

    keywords=['soft robot', 'everting arm', 'kinematics', 'pid'],

    packages = find_packages(exclude = ["tests", "tests.*"]),

    entry_points={
        'console_scripts': [
            'everkin = everkin.everkin:main'
        ],
    },

    install_requires = reqs,

    extras_require = {
        'test': ['pytest>=6.0'],
    },

    # buid the distribution: python setup.py sdist
)

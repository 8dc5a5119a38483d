import sys
from setuptools import setup

try:
    from setuptools.command.test import test as test_command
except ImportError:  # removed in setuptools 72
    test_command = None

tests_require = ['pytest', 'pytest-cov']
install_requires = ['numpy>=1.25', 'scipy>=1.12']


with open("README.md", "r") as fh:
    long_description = fh.read()


cmdclass = {}
if test_command is not None:

    class PyTest(test_command):
        user_options = [('pytest-args=', 'a', "Arguments to pass to py.test")]

        def __init__(self, dist, **kw):
            super().__init__(dist, **kw)
            self.pytest_args = []

        def initialize_options(self):
            test_command.initialize_options(self)

        def finalize_options(self):
            test_command.finalize_options(self)

        def run_tests(self):
            # import here, cause outside the eggs aren't loaded
            import pytest
            errno = pytest.main(self.pytest_args)
            sys.exit(errno)

    cmdclass['test'] = PyTest


VERSION = '0.1.0'

setup(
    name="Intermittency",
    version=VERSION,
    description=("simulates multiscale and supOU processes, estimates their "
                 "scaling functions and checks the large deviations of their "
                 "rate of growth against Legendre-Fenchel bounds"),
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="BSD",
    packages=['Intermittency'],
    cmdclass=cmdclass,
    tests_require=tests_require,
    install_requires=install_requires,
    extras_require={'test': tests_require},
    entry_points={
        'console_scripts': ['intermittency = Intermittency.cli:main'],
    },
    python_requires='>=3.8',
    classifiers=[
        "Topic :: Scientific/Engineering :: Mathematics",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Topic :: Software Development :: Libraries",
    ],
)

"""Builds the Rust extension with cargo and places it inside the package.

The extension crate lives in crates/tflab-py and produces libtflab_py.so;
the Python package in python/tflab loads it as tflab.tflab_py.
"""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import setup
from setuptools.command.build_py import build_py

ROOT = Path(__file__).resolve().parent


class BuildRustThenPy(build_py):
    def run(self):
        subprocess.run(
            ["cargo", "build", "--release", "-p", "tflab-py"],
            cwd=ROOT,
            check=True,
        )
        built = ROOT / "target" / "release"
        if sys.platform == "darwin":
            src = built / "libtflab_py.dylib"
        elif sys.platform == "win32":
            src = built / "tflab_py.dll"
        else:
            src = built / "libtflab_py.so"
        dest = ROOT / "python" / "tflab" / ("tflab_py" + (".pyd" if sys.platform == "win32" else ".so"))
        shutil.copy2(src, dest)
        super().run()


setup(cmdclass={"build_py": BuildRustThenPy})

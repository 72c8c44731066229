"""Build the optional compiled field kernel.

The package works without it: ``coiltrap.fieldcore.backend`` falls back to
the numpy kernel when the extension is missing. Set COILTRAP_NO_EXT=1 to skip
the build, COILTRAP_NO_OPENMP=1 to build single-threaded.
"""
import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing or failing
            print(f"WARNING: compiled kernel not built ({exc}); numpy fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"WARNING: failed to build {ext.name} ({exc}); numpy fallback will be used")


def extensions():
    if os.environ.get("COILTRAP_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    omp = [] if os.environ.get("COILTRAP_NO_OPENMP") else ["-fopenmp"]
    ext = Extension(
        "coiltrap.fieldcore._ckernel",
        ["src/coiltrap/fieldcore/_ckernel.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"] + omp,
        extra_link_args=omp,
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # The compiled core is optional: idsel.kernels falls back to the
    # numpy implementation when the extension is absent.
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("idsel.kernels._core", ["src/idsel/kernels/_core.pyx"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)

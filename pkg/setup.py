from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # fallback backend only
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("iprw._kernels", ["src/iprw/_kernels.pyx"])],
        language_level=3,
    )

setup(ext_modules=ext_modules)

from importlib.metadata import version as _version, PackageNotFoundError

try:
    version = _version("heislab")
except PackageNotFoundError:
    # package is not installed
    version = "version unknown"

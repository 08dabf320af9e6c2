from setuptools import setup, find_packages

setup(
    name="heislab",
    description="Gibbs measures and coercive inequalities on Heisenberg-valued lattice spins",
    packages=find_packages(exclude=["test", "test.*"]),
    python_requires=">=3.8",
    install_requires=[
        "tqdm",
        "scipy>=1.8",
        "numpy>=1.18",
        "pandas >=1.4",
    ],
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["heislab = heislab.frontend.console:main"],},
)

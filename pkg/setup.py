from setuptools import setup, find_packages

setup(
    name="hcspdc",
    version="0.1",
    packages=find_packages(exclude=("test", "test.*")),
    install_requires=[
        "lark",
        "numpy",
        "scipy",          # ode.py — solve_ivp + brentq boundary localisation
        "sympy",          # ode.py implicit equations, discharge.py tautology check
        "python-dotenv",
    ],
    extras_require={
        "test": ["pytest", "hypothesis"],
    },
    entry_points={
        "console_scripts": [
            "hcspdc = hcspdc.cli:main",
        ]
    },
)

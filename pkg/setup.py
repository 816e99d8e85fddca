from setuptools import setup, find_packages

setup(
    name="Hardy_Core",
    version="0.1.0",
    packages=find_packages(include=["Hardy_Core", "Hardy_Core.*"]),
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "pyyaml>=6.0.1",
        "python-dotenv>=1.0.0",
        "loguru>=0.7.0",
    ],
    extras_require={
        "test": [
            "pytest>=7.4.0",
            "pytest-xdist>=3.3.1",
            "allure-pytest>=2.13.2",
        ],
    },
    entry_points={
        "console_scripts": [
            "hardy-interp=Hardy_Core.utils.yaml_to_certificate:main",
        ],
    },
    description="Tangential Nevanlinna-Pick and Toeplitz-corona solvers over H-infinity and C+BH-infinity",
    long_description=open("README.md", encoding="utf-8").read(),
    long_description_content_type="text/markdown",
    python_requires=">=3.8",
)

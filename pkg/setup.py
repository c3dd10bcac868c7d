#!/usr/bin/env python3
"""
Setup script for late-power - power analysis for the LATE
"""

from setuptools import setup, find_packages

DEV_PREFIXES = (
    "pytest",
    "hypothesis",
    "black",
    "flake8",
    "autoflake",
    "mypy",
)


def read_readme():
    with open("README.md", "r", encoding="utf-8") as fh:
        return fh.read()


def read_requirements():
    requirements = []
    with open("requirements.txt", "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                if not line.startswith(DEV_PREFIXES):
                    requirements.append(line)
    return requirements


setup(
    name="late-power",
    version="0.1.0",
    description=(
        "Power bounds, MDES and sample-size solvers for the LATE, with a "
        "principal-strata Monte-Carlo check"
    ),
    long_description=read_readme(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.9",
    install_requires=read_requirements(),
    extras_require={
        "dev": [
            "pytest>=8.0.0",
            "pytest-cov>=5.0.0",
            "hypothesis>=6.90.0",
            "black>=24.0.0",
            "flake8>=7.0.0",
        ]
    },
    entry_points={
        "console_scripts": [
            "late-power=src.cli:main",
        ],
    },
    include_package_data=True,
    keywords="power analysis, LATE, instrumental variables, MDES, sample size",
)

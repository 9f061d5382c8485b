"""Setup script for the dewet_pfem Python package."""

from setuptools import setup


# Read the version file
with open('VERSION', 'r', encoding='utf-8') as version_file:
    version = version_file.read().strip()

# Read the readme file
with open('README.md', "r", encoding='utf-8') as readme_file:
    readme = readme_file.read()


setup(
    name="dewet_pfem",
    version=version,
    description="Parametric finite element simulation of solid-state dewetting",
    long_description=readme,
    long_description_content_type='text/markdown',
    packages=["dewet_pfem"],
    python_requires=">=3.8",
    install_requires=[
        "numpy",
        "scipy",
        "shapely>=2.0",
    ],
    entry_points={
        "console_scripts": [
            "dewet=dewet_pfem.cli:main",
        ],
    },
    license="BSD",
)

from setuptools import setup, find_packages

setup(
    name="spheremax",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "PySide6>=6.6.0",
        "numpy>=1.26.0",
        "scipy>=1.11.0",
    ],
    entry_points={
        'console_scripts': [
            'spheremax=spheremax.__main__:main',
        ],
    },
    author="Aj",
    description="Numerical laboratory for the bilinear spherical maximal function",
    long_description=open("exponent.txt").read(),
    long_description_content_type="text/markdown",
    keywords="harmonic analysis, maximal function, bilinear operators, numerical experiments",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    python_requires=">=3.9",
)

import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="middlebox-placer",
    version="0.1.0",
    description="Incremental capacitated middlebox placement with stretch constraints.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: GNU General Public License v3 (GPLv3)",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.7',
    install_requires=[
        "numpy>=1.17",
        "scipy>=1.4",
        "networkx>=2.4",
        "ray"
    ],
    extras_require={
        "tests": ["hypothesis"],
        "docs": ["sphinx", "sphinx_rtd_theme"],
    },
    entry_points={
        "console_scripts": ["middlebox-placer=middlebox_placer.cli:main"],
    }
)

from __future__ import annotations

from setuptools import setup
import pathlib

here = pathlib.Path(__file__).parent.resolve()

# Get the long description from the README file
long_description = (here / 'README.md').read_text(encoding='utf-8')


setup(
    name='quantum-clustering-outliers',

    # version= # Handled in setup.cfg

    description='Outlier detection by quantum clustering',

    long_description=long_description,

    long_description_content_type='text/markdown',

    classifiers=[
        'Development Status :: 3 - Alpha',

        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Information Analysis',

        'License :: OSI Approved :: MIT License',

        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3 :: Only',
    ],

    keywords='outlier-detection, anomaly-detection, quantum-clustering, clustering',

    packages=['qc_outliers'],

    python_requires='>=3.9',
    install_requires=['numpy>=1.22', 'pandas>=1.4', 'pydantic>=2', 'lark'],
    entry_points={
        'console_scripts': ['qc-outliers=qc_outliers.cli:main'],
    },
)

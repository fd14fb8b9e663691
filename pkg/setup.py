#!/usr/bin/env python3
# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the license found in the
# LICENSE file in the root directory of this source tree.
# Inspired from https://github.com/kennethreitz/setup.py

from pathlib import Path

from setuptools import setup

NAME = 'vort1d'
DESCRIPTION = (
    'Pseudospectral simulation and verification of nonlocal 1D MHD vorticity models.')

REQUIRES_PYTHON = '>=3.8.0'

for line in open('vort1d/__init__.py'):
    line = line.strip()
    if '__version__' in line:
        context = {}
        exec(line, context)
        VERSION = context['__version__']


HERE = Path(__file__).parent

# http does not work with setup.py
REQUIRED = [i.split('#')[0].strip() for i in open("requirements.txt")
            if "://" not in i and i.split('#')[0].strip()]

try:
    with open(HERE / "README.md", encoding='utf-8') as f:
        long_description = '\n' + f.read()
except FileNotFoundError:
    long_description = DESCRIPTION

setup(
    name=NAME,
    version=VERSION,
    description=DESCRIPTION,
    long_description=long_description,
    long_description_content_type='text/markdown',
    python_requires=REQUIRES_PYTHON,
    packages=['vort1d'],
    package_data={'vort1d': ['conf/*.yaml', 'conf/preset/*.yaml']},
    install_requires=REQUIRED,
    include_package_data=True,
    entry_points={'console_scripts': ['vort1d=vort1d.run:main']},
    license='Creative Commons Attribution-NonCommercial 4.0 International',
    classifiers=[
        # Trove classifiers
        # Full list: https://pypi.python.org/pypi?%3Aaction=list_classifiers
        'Topic :: Scientific/Engineering :: Physics',
    ],
)

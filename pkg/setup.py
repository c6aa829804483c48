#!/usr/bin/env python
# -*- coding: utf-8 -*-

import io
import os
import re

from setuptools import find_packages, setup

NAME = 'pytorch-gesl'
IMPORT_NAME = 'gesl'
DESCRIPTION = "Off-policy evaluation with Expected Sarsa(lambda), control variates and gradient saddle-point learners"
URL = ''
EMAIL = 'sbl1996@126.com'
AUTHOR = 'HrvvI'
REQUIRES_PYTHON = '>=3.7.0'

here = os.path.dirname(os.path.abspath(__file__))

try:
    with io.open(os.path.join(here, 'README.md'), encoding='utf-8') as f:
        long_description = '\n' + f.read()
except FileNotFoundError:
    long_description = DESCRIPTION

about = {}
with open(os.path.join(here, IMPORT_NAME, '_version.py')) as f:
    exec(f.read(), about)


def parse_requirements(fname='requirements.txt'):
    """
    Package names with their version specifiers, one per non-comment line
    of the requirements file. ``-r other.txt`` lines are followed.
    """
    items = []
    with open(os.path.join(here, fname)) as f:
        for line in f:
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if line.startswith('-r '):
                items.extend(parse_requirements(line.split(' ', 1)[1]))
            else:
                items.append(re.sub(r'\s+', '', line))
    return items


setup(
    name=NAME,
    version=about['__version__'],
    description=DESCRIPTION,
    long_description=long_description,
    long_description_content_type='text/markdown',
    author=AUTHOR,
    author_email=EMAIL,
    python_requires=REQUIRES_PYTHON,
    url=URL,
    packages=find_packages(exclude=('test',)),
    package_data={IMPORT_NAME: ['harness/presets/*.yaml']},
    entry_points={
        'console_scripts': ['gesl=gesl.harness.cli:main'],
    },
    install_requires=parse_requirements('requirements.txt'),
    license='MIT',
)

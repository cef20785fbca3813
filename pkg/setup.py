from setuptools import setup

setup(
    name='PyQev',
    version='1.0.0',
    description='Quantum elliptical vortex states: moments, Wigner functions and mode entropies',
    packages=['qev'],
    python_requires='>=3.8',
    install_requires=[
        'numpy>=1.20',
        'scipy>=1.7',
    ],
    extras_require={
        'test': ['pytest', 'hypothesis'],
    },
    entry_points={
        'console_scripts': ['qev=qev.cli:main'],
    },
)

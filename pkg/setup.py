import setuptools


setuptools.setup(
    name='ikdmmt',
    version='0.1.0',
    license='GNU AGPLv3',
    description='Image-free multimodal machine translation with inversion knowledge distillation',
    long_description=open('README.md', encoding='utf-8').read(),
    long_description_content_type='text/markdown',

    packages=setuptools.find_packages('src'),
    package_dir={'': 'src'},
    zip_safe=False,
    entry_points={
        'console_scripts': [
            'ikdmmt=ikdmmt.__main__:main',
        ],
    },

    python_requires='>=3.7',
    install_requires=[
        'numpy>=1.16,<2',  # torch 1.13.1 is built against the NumPy 1.x ABI
        'python-json-logger',
        'sacrebleu>=2.0',
        'torch==1.13.1',
    ],
    extras_require={
        'test': [
            'pylint!=2.9.4',  # avoid 2.9.4 for time.perf_counter deprecation warnings
            'pycodestyle',
            'pytest',
        ],
    },
)

import argparse
import logging
import os
import socket
import sys

LOG = logging.getLogger(__name__)

METRICS_FILE = 'metrics.log'


def cli(parser: argparse.ArgumentParser):
    group = parser.add_argument_group('logger')
    group.add_argument('-q', '--quiet', default=False, action='store_true',
                       help='log warnings and errors only')
    group.add_argument('--debug', default=False, action='store_true',
                       help='log debug records')
    group.add_argument('--log-stats', default=False, action='store_true',
                       help='print log records as json lines')


def configure(args: argparse.Namespace, local_logger=None):
    log_level = logging.INFO
    if args.quiet:
        log_level = logging.WARNING
    if args.debug:
        assert not args.quiet
        log_level = logging.DEBUG

    stdout_handler = logging.StreamHandler(sys.stdout)
    stdout_handler.setLevel(log_level)
    if args.log_stats:
        # pylint: disable=import-outside-toplevel
        from pythonjsonlogger import jsonlogger
        stdout_handler.setFormatter(
            jsonlogger.JsonFormatter('%(message) %(levelname) %(name)'))
    logging.basicConfig(handlers=[stdout_handler])

    # set log level for ikdmmt and all its modules
    for logger_name in logging.root.manager.loggerDict:  # pylint: disable=no-member
        if '.' in logger_name or not logger_name.startswith('ikdmmt'):
            continue
        logging.getLogger(logger_name).setLevel(log_level)
    logging.getLogger('ikdmmt').setLevel(log_level)

    if local_logger is not None:
        local_logger.setLevel(log_level)


def train_configure(output: str, args: argparse.Namespace = None) -> logging.Handler:
    """Attach a JSON-lines metrics file to the package logger.

    Dict messages are merged into the JSON object of their record, so every
    structured ``LOG.info({...})`` becomes one line of ``<output>/metrics.log``.
    """
    # pylint: disable=import-outside-toplevel,cyclic-import
    from pythonjsonlogger import jsonlogger
    from . import __version__

    os.makedirs(output, exist_ok=True)
    file_handler = logging.FileHandler(os.path.join(output, METRICS_FILE), mode='w')
    file_handler.setLevel(logging.INFO)
    file_handler.setFormatter(
        jsonlogger.JsonFormatter('%(message) %(levelname) %(name) %(asctime)'))
    package_logger = logging.getLogger('ikdmmt')
    package_logger.addHandler(file_handler)
    if package_logger.level == logging.NOTSET or package_logger.level > logging.INFO:
        package_logger.setLevel(logging.INFO)

    LOG.info({
        'type': 'process',
        'argv': sys.argv,
        'args': vars(args) if args is not None else None,
        'version': __version__,
        'hostname': socket.gethostname(),
    })
    return file_handler

"""Command line interface of ikdmmt."""

import argparse
import json
import logging
import sys

import torch

from . import (
    ablate,
    evaluate,
    export_attention,
    export_features,
    logger,
    prepare,
    retrieve,
    selfcheck,
    train,
    translate,
)
from . import __version__
from .errors import IkdmmtError

LOG = logging.getLogger(__name__)

COMMANDS = (prepare, train, translate, evaluate, retrieve, ablate, selfcheck,
            export_features, export_attention)


def flag_schema(parser: argparse.ArgumentParser):
    flags = []
    for action in parser._actions:  # pylint: disable=protected-access
        if isinstance(action, (argparse._HelpAction, argparse._SubParsersAction)):  # pylint: disable=protected-access
            continue
        flags.append({
            'dest': action.dest,
            'flags': list(action.option_strings),
            'required': bool(action.required),
            'default': action.default if action.default != argparse.SUPPRESS else None,
            'type': getattr(action.type, '__name__', None),
            'nargs': action.nargs,
            'choices': list(action.choices) if action.choices is not None else None,
            'help': action.help,
        })
    return flags


class HelpJson(argparse.Action):
    """Print the flag schema of every command as json and exit."""

    def __init__(self, option_strings, dest=argparse.SUPPRESS, default=argparse.SUPPRESS,
                 help=None):  # pylint: disable=redefined-builtin
        super().__init__(option_strings, dest=dest, default=default, nargs=0, help=help)

    def __call__(self, parser, namespace, values, option_string=None):
        subparsers = [a for a in parser._actions  # pylint: disable=protected-access
                      if isinstance(a, argparse._SubParsersAction)]  # pylint: disable=protected-access
        schema = {
            'prog': parser.prog,
            'version': __version__,
            'flags': flag_schema(parser),
            'commands': {
                name: flag_schema(subparser)
                for action in subparsers
                for name, subparser in action.choices.items()
            },
        }
        print(json.dumps(schema, indent=2, sort_keys=True, default=str))
        parser.exit()


def cli(argv=None):
    common = argparse.ArgumentParser(add_help=False)
    logger.cli(common)
    common.add_argument('--seed', type=int, default=None,
                        help='random seed, overrides the config seed')

    parser = argparse.ArgumentParser(
        prog='ikdmmt',
        description=__doc__,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument('--version', action='version',
                        version='ikdmmt {version}'.format(version=__version__))
    parser.add_argument('--help-json', action=HelpJson,
                        help='print the flag schema of all commands as json')
    subparsers = parser.add_subparsers(dest='command_name', metavar='COMMAND')
    subparsers.required = True
    for module in COMMANDS:
        subparser = module.cli(subparsers, [common])
        subparser.set_defaults(parser=subparser)

    args = parser.parse_args(argv)
    logger.configure(args, LOG)
    if args.seed is not None:
        torch.manual_seed(args.seed)
    return args


def main(argv=None) -> int:
    args = cli(argv)
    try:
        return args.command(args)
    except (IkdmmtError, OSError) as e:
        LOG.debug('command failed', exc_info=True)
        print('error: {}'.format(e), file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())

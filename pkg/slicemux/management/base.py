from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from slicemux.exceptions import InvariantError, UserDataError
from slicemux.utils import getLogger


EXIT_USER_ERROR = 2
EXIT_INVARIANT = 3


class AbstractSliceMuxCommand(BaseCommand):
    """
    Common base of the slicemux commands

    Implementers provide run(out_dir, config, **options), which returns a
    short one-line description of what was done, for the simulation log.
    """
    config_help = 'JSON configuration file'

    def create_parser(self, prog_name, subcommand, **kwargs):
        """
        Add common options

        calls super and adds options
        """
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.add_argument(
            'config',
            nargs='?',
            help=self.config_help,
        )
        parser.add_argument(
            '-c', '--config',
            dest='config_file',
            metavar='CONFIG',
            help='Same as the positional argument',
        )
        parser.add_argument(
            '-o', '--out',
            default='.',
            help='Output directory, created if needed.  Existing output files '
                 'are overwritten.  Default is the current directory.',
        )
        parser.add_argument(
            '--seed',
            type=int,
            default=None,
            help='Override every random seed given in the configuration',
        )
        parser.add_argument(
            '--debug',
            action='store_true',
            help='Turn on debugging output'
        )
        return parser

    def run(self, out_dir, config, **options):
        raise NotImplementedError

    def handle(self, *args, **options):
        logger = getLogger('slicemux')
        if options['debug']:
            logger.setLevel('DEBUG')
        simlog = getLogger('simlog')

        config_file = options.pop('config_file', None)
        if options['config'] and config_file \
                and options['config'] != config_file:
            raise CommandError('give the configuration file only once',
                               returncode=EXIT_USER_ERROR)
        options['config'] = config = options['config'] or config_file
        if not config:
            raise CommandError('a configuration file is required',
                               returncode=EXIT_USER_ERROR)

        out_dir = Path(options['out'])
        name = self.command_name()
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            msg = self.run(out_dir, **options)
        except UserDataError as e:
            simlog.info(f'{name} {config} failed: {e}')
            raise CommandError(e, returncode=EXIT_USER_ERROR)
        except InvariantError as e:
            simlog.error(f'{name} {config} internal error: {e}')
            raise CommandError(f'internal error: {e}',
                               returncode=EXIT_INVARIANT) from e
        except OSError as e:
            raise CommandError(e, returncode=EXIT_USER_ERROR)

        simlog.info(f'{name} {config} -> {out_dir}: {msg}')
        self.stdout.write(self.style.SUCCESS(' All done.'))

    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def write_paths(self, paths):
        for i in paths:
            self.stdout.write(f' wrote {i}')

from django import apps

from .utils import getLogger


log = getLogger(__name__)


class SliceMuxConfig(apps.AppConfig):
    name = 'slicemux'
    verbose_name = 'Network slice multiplexing simulator'

    def ready(self):
        super().ready()
        from . import __version__
        log.debug(f'{self.verbose_name} version: {__version__ or "unknown"}')

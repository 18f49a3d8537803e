from slicemux.harness import load_scenario, synthesize_scenario
from slicemux.management.base import AbstractSliceMuxCommand


class Command(AbstractSliceMuxCommand):
    help = ('Generate the slot series of a scenario\'s synthetic slices and '
            'write them with a scenario.json that reads them')
    config_help = 'scenario JSON file'

    def run(self, out_dir, config, **options):
        scenario = load_scenario(config)
        if options['seed'] is not None:
            scenario = scenario.with_seed(options['seed'])
        paths = synthesize_scenario(scenario, out_dir)
        self.write_paths(paths)
        return f'{len(paths) - 1} slot series'

from slicemux.harness import load_scenario, simulate
from slicemux.management.base import AbstractSliceMuxCommand


class Command(AbstractSliceMuxCommand):
    help = ('Run a scenario: trial phase, then every scheme over the regular '
            'phase; writes report.csv, slots.csv and summary.csv')
    config_help = 'scenario JSON file'

    def run(self, out_dir, config, **options):
        scenario = load_scenario(config)
        if options['seed'] is not None:
            scenario = scenario.with_seed(options['seed'])
        self.stdout.write(f'Running scenario {scenario.name} ...')
        result = simulate(scenario)
        self.write_paths(result.write(out_dir))
        self.stdout.write(result.summary().to_string(index=False))
        return f'{len(result.runs)} scheme runs'

from slicemux.harness import load_scenario, simulate
from slicemux.management.base import AbstractSliceMuxCommand


class Command(AbstractSliceMuxCommand):
    help = ('Run a scenario for every anomaly setting and sample size of its '
            '"sweep" section; writes report.csv, slots.csv and summary.csv')
    config_help = 'scenario JSON file with a "sweep" section'

    def add_arguments(self, argp):
        argp.add_argument(
            '-j', '--jobs',
            type=int,
            default=1,
            help='Number of cases to run in parallel.  Outputs do not depend '
                 'on it.  Default is 1',
        )

    def run(self, out_dir, config, **options):
        scenario = load_scenario(config)
        if options['seed'] is not None:
            scenario = scenario.with_seed(options['seed'])
        self.stdout.write(f'Sweeping scenario {scenario.name} ...')
        result = simulate(scenario, sweep=True, jobs=max(options['jobs'], 1))
        self.write_paths(result.write(out_dir))
        self.stdout.write(result.summary().to_string(index=False))
        return f'{len(result.runs)} scheme runs'

import csv
import logging
from pathlib import Path

import numpy as np

from apps.baselines.models import BASELINES, restore_baseline_model
from apps.datasets import storage
from apps.datasets.generation import build_dataset, subsample
from apps.evaluation.judge import didactic_judge
from apps.evaluation.probe import diagnose_agent
from apps.evaluation.reports import EvalReport, find_reports, write_profiles
from apps.evaluation.rollouts import evaluate_tasks
from apps.fb.checkpoints import load_checkpoint, restore_fb_model
from apps.fb.views import TRAINERS, algo_config, load_maze_dataset, prepare_dataset, train_run
from apps.maze.policies import BEHAVIOUR_POLICIES
from project import settings
from project.configuration import build_config
from utils.commands import BaseCommand, CommandTableDef, set_override
from utils.exceptions import StorageError, ValidationError
from utils.media import generate_path_to_dir, prepare_run_dir, resolve_checkpoint

logger = logging.getLogger(__name__)

evaluation_commands = CommandTableDef()

PROBE_COLUMNS = ('size', 'predicted', 'empirical', 'gap', 'rollouts')


def restore_agent(checkpoint):
    if checkpoint.kind == 'fb':
        return restore_fb_model(checkpoint)
    if checkpoint.kind in BASELINES:
        return restore_baseline_model(checkpoint)
    raise StorageError('checkpoint of unknown kind "{}"'.format(checkpoint.kind))


def checkpoint_config(checkpoint, overrides=None):
    config = build_config(checkpoint.config)
    return config.replace(**overrides) if overrides else config


def bootstrap_rng(seed):
    return np.random.default_rng(np.random.SeedSequence([seed, 2]))


def format_interval(aggregate):
    return 'IQM {iqm:.3f} [{ci_lo:.3f}, {ci_hi:.3f}] at {confidence:.0%}'.format(**aggregate)


@evaluation_commands.command('evaluate')
class EvaluateCommand(BaseCommand):
    """Rolls out a checkpoint on maze tasks, or aggregates finished runs with ``--runs``."""

    help = 'evaluate a checkpoint or aggregate run reports'

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument('--checkpoint', help='checkpoint file, stem or run directory (latest checkpoint)')
        parser.add_argument('--task', action='append', help='task to evaluate (repeatable); default all')
        parser.add_argument('--rollouts', type=int)
        parser.add_argument('--seed', type=int)
        parser.add_argument('--dataset', help='dataset for inferred task vectors')
        parser.add_argument('--z-source', choices=('goal', 'inferred'))
        parser.add_argument('--out', help='JSON file to write')
        parser.add_argument('--runs', action='append', default=[], metavar='DIR',
                            help='aggregate every report.json under DIR (repeatable)')
        parser.add_argument('--normalise-to', metavar='ALGO', help='with --runs, per-task IQM ratios to ALGO')
        parser.add_argument('--profile', metavar='CSV', help='with --runs, write performance profiles')
        parser.add_argument('--thresholds', help='comma-separated profile thresholds; default spans the scores')

    def handle(self):
        if self.args.runs:
            return self.aggregate_runs()
        if not self.args.checkpoint:
            raise ValidationError({'checkpoint': 'evaluate needs --checkpoint or --runs'})

        stem = resolve_checkpoint(self.args.checkpoint)
        checkpoint = load_checkpoint(stem)
        overrides = {}
        set_override(overrides, 'eval', 'rollouts', self.args.rollouts)
        set_override(overrides, 'eval', 'z_source', self.args.z_source)
        config = checkpoint_config(checkpoint, overrides)
        seed = self.args.seed if self.args.seed is not None else config.train.seed
        tasks = self.args.task or (config.eval.tasks if checkpoint.kind == 'fb' else [config.baseline.task])
        dataset = load_maze_dataset(self.args.dataset) if self.args.dataset else None

        returns = evaluate_tasks(restore_agent(checkpoint), config.env, config.eval, seed,
                                 step=checkpoint.step, dataset=dataset, tasks=tasks)
        report = EvalReport(algo=checkpoint.manifest.get('algo', checkpoint.kind), config_digest=config.digest())
        for task, values in returns.items():
            report.add(task, seed, checkpoint.step, values)
        aggregate = report.aggregate(config.eval.bootstrap_resamples, config.eval.confidence, bootstrap_rng(seed))

        for task, value in aggregate['task_iqm'].items():
            self.echo('{}: {:.3f}'.format(task, value))
        self.echo(format_interval(aggregate))
        data = {
            'checkpoint': str(stem),
            'step': checkpoint.step,
            'algo': report.algo,
            'seed': seed,
            'returns': returns,
            'aggregate': aggregate,
        }
        self.write_json(self.args.out or '{}.eval.json'.format(stem), data)
        return data

    def aggregate_runs(self):
        """Joins per-seed reports by algorithm and aggregates them with the stratified bootstrap."""
        reports = {}
        for root in self.args.runs:
            found = find_reports(root)
            if not found:
                raise StorageError('no report.json under {}'.format(root))
            for path in found:
                report = EvalReport.load(path)
                reports.setdefault(report.algo, EvalReport(algo=report.algo)).extend(report)

        reference = self.args.normalise_to
        if reference is not None and reference not in reports:
            raise ValidationError({'normalise_to': 'no runs of "{}" among {}'.format(reference, sorted(reports))})

        seed = self.args.seed if self.args.seed is not None else settings.SEED
        summary = {}
        for algo, report in sorted(reports.items()):
            summary[algo] = report.aggregate(rng=bootstrap_rng(seed))
            self.echo('{} ({} seeds): {}'.format(algo, len(report.seeds), format_interval(summary[algo])))
            if reference is not None:
                summary[algo]['normalised'] = report.normalised_to(reports[reference])
                self.echo('  relative to {}: {}'.format(reference, ', '.join(
                    '{} {:.3f}'.format(task, ratio)
                    for task, ratio in summary[algo]['normalised']['scores'].items())))
        if self.args.profile:
            thresholds = profile_thresholds(self.args.thresholds, reports)
            write_profiles(self.args.profile, {algo: report.profile(thresholds, rng=bootstrap_rng(seed))
                                               for algo, report in reports.items()})
            logger.info('Performance profiles at %d thresholds written to %s', len(thresholds), self.args.profile)
        if self.args.out:
            self.write_json(self.args.out, summary)
        return summary


def profile_thresholds(text, reports):
    if text:
        try:
            return [float(t) for t in text.split(',') if t.strip()]
        except ValueError:
            raise ValidationError({'thresholds': 'expected comma-separated numbers, got "{}"'.format(text)})
    top = max(max(r.score for r in report.select(report.best_checkpoint)) for report in reports.values())
    return np.linspace(0.0, top if top > 0.0 else 1.0, settings.PROFILE_POINTS).tolist()


@evaluation_commands.command('diagnose')
class DiagnoseCommand(BaseCommand):
    """Compares predicted Q at dataset pairs with discounted Monte-Carlo returns."""

    help = 'measure value overestimation of a checkpoint'
    uses_config = True

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument('--checkpoint', help='checkpoint to probe; with --sizes it supplies the config')
        parser.add_argument('--dataset', required=True)
        parser.add_argument('--task', required=True)
        parser.add_argument('--rollouts', type=int, help='dataset pairs probed (eval.probe_rollouts)')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--sizes', help='comma-separated dataset sizes; trains one agent per size')
        parser.add_argument('--algo', choices=sorted(TRAINERS), help='algorithm trained by --sizes')
        parser.add_argument('--steps', type=int, help='learning steps per size')
        parser.add_argument('--out', help='CSV file for the probe table')

    def get_overrides(self):
        overrides = super(DiagnoseCommand, self).get_overrides()
        set_override(overrides, 'eval', 'probe_rollouts', self.args.rollouts)
        set_override(overrides, 'train', 'seed', self.args.seed)
        set_override(overrides, 'train', 'learning_steps', self.args.steps)
        return overrides

    def handle(self):
        dataset = load_maze_dataset(self.args.dataset)
        checkpoint = load_checkpoint(resolve_checkpoint(self.args.checkpoint)) if self.args.checkpoint else None
        if checkpoint is not None:
            config = checkpoint_config(checkpoint, self.get_overrides())
        else:
            config = self.get_config()

        if not self.args.sizes:
            if checkpoint is None:
                raise ValidationError({'checkpoint': 'diagnose needs --checkpoint or --sizes'})
            result = diagnose_agent(restore_agent(checkpoint), dataset, self.args.task, config, config.train.seed)
            self.echo('predicted {:.3f} empirical {:.3f} gap {:.3f}'.format(
                result.predicted, result.empirical, result.gap))
            return [dict(result.as_dict(), size=len(dataset))]

        algo = self.args.algo or (checkpoint.manifest.get('algo') if checkpoint is not None else 'fb')
        if algo in BASELINES:
            config = config.replace(baseline={'task': self.args.task})
        config = algo_config(config, algo)
        rows = []
        rng = np.random.default_rng(np.random.SeedSequence([config.train.seed, 4]))
        for size in parse_sizes(self.args.sizes, len(dataset)):
            sample = subsample(dataset, size, rng) if size < len(dataset) else dataset
            trainer = TRAINERS[algo](prepare_dataset(sample, config, algo, relabel_task=True), config, config.env,
                                     algo)
            agent, _ = trainer.run()
            result = diagnose_agent(agent, sample, self.args.task, config, config.train.seed)
            rows.append(dict(result.as_dict(), size=size))
            self.echo('{:>8d} predicted {:.3f} empirical {:.3f} gap {:.3f}'.format(
                size, result.predicted, result.empirical, result.gap))
        if self.args.out:
            write_probe_table(self.args.out, rows)
        return rows


def parse_sizes(text, available):
    try:
        sizes = [int(s) for s in text.split(',') if s.strip()]
    except ValueError:
        raise ValidationError({'sizes': 'expected comma-separated integers, got "{}"'.format(text)})
    bad = [s for s in sizes if s <= 0 or s > available]
    if not sizes or bad:
        raise ValidationError({'sizes': 'sizes must lie in 1..{}, got {}'.format(available, bad or sizes)})
    return sizes


def write_probe_table(path, rows):
    try:
        with open(path, 'w', newline='') as fh:
            writer = csv.writer(fh)
            writer.writerow(PROBE_COLUMNS)
            writer.writerows([row[c] for c in PROBE_COLUMNS] for row in rows)
    except OSError as exc:
        raise StorageError('cannot write probe table {}: {}'.format(path, exc))


@evaluation_commands.command('didactic')
class DidacticCommand(BaseCommand):
    """Trains FB and VC-FB on the left-filtered maze dataset per seed and judges goal reaching."""

    help = 'run the paired FB vs VC-FB didactic experiment'
    uses_config = True

    @classmethod
    def add_arguments(cls, parser):
        parser.add_argument('--out', required=True, help='experiment directory')
        parser.add_argument('--seeds', type=int, default=settings.EVAL_SEEDS)
        parser.add_argument('--steps', type=int, help='learning steps per run')
        parser.add_argument('--force', action='store_true')

    def get_overrides(self):
        overrides = super(DidacticCommand, self).get_overrides()
        overrides.setdefault('dataset', {}).update({'policy': 'explore', 'filter_left': True})
        overrides.setdefault('eval', {})['tasks'] = list(settings.DIDACTIC_TASKS)
        set_override(overrides, 'train', 'learning_steps', self.args.steps)
        return overrides

    def handle(self):
        if self.args.seeds < 1:
            raise ValidationError({'seeds': 'need at least one seed'})
        config = self.get_config()
        run_dir = prepare_run_dir(self.args.out, force=self.args.force)
        dataset = build_dataset(config.env, config.dataset, BEHAVIOUR_POLICIES)
        storage.save(dataset, Path(run_dir) / 'dataset.fbds')

        reports = {}
        for offset in range(self.args.seeds):
            seed = config.train.seed + offset
            for algo in ('fb', 'vcfb'):
                run_config = algo_config(config.replace(train={'seed': seed}), algo)
                trainer = train_run(dataset, run_config, algo, generate_path_to_dir(run_dir, algo, seed))
                reports.setdefault(algo, EvalReport(algo=algo)).extend(trainer.report)

        verdict = didactic_judge(reports['fb'], reports['vcfb'])
        for seed_verdict in verdict.seeds:
            self.echo('seed {}: fb {} vcfb {} -> {}'.format(seed_verdict.seed, seed_verdict.fb_reached,
                                                            seed_verdict.vcfb_reached,
                                                            'pass' if seed_verdict.passed else 'fail'))
        self.echo(verdict.label)
        self.write_json(Path(run_dir) / 'verdict.json', verdict.as_dict())
        return verdict
